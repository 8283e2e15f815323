//! Immutable DC-power-flow network model.
//!
//! A [`Network`] owns its buses and lines and is safe to share across
//! concurrent scenario evaluations. Susceptances are per-unit MW/rad on the
//! system base (flow in MW equals susceptance times the angle difference in
//! radians); power is MW throughout. The reference bus angle is pinned to
//! zero wherever angles appear in an optimization.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::lpsolve::{LinearProgram, SolveStatus, Tolerances};
use crate::validate::{ValidationReport, ViolationKind};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("angle vector has {got} entries, network has {want} buses")]
    AngleCountMismatch { got: usize, want: usize },
    #[error("unknown bus `{0}`")]
    UnknownBus(String),
    #[error("deliverability program ended {0:?}")]
    Deliverability(SolveStatus),
}

/// A network node. Coordinates are optional and only used for map export.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    pub name: String,
    pub coordinates: Option<(f64, f64)>,
}

impl Bus {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        Bus {
            name: id.clone(),
            id,
            coordinates: None,
        }
    }

    pub fn with_coordinates(mut self, lat: f64, lon: f64) -> Self {
        self.coordinates = Some((lat, lon));
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

/// A transmission line between two buses.
///
/// `susceptance` must be positive; `flow_min <= 0 <= flow_max` so the
/// unloaded network is always feasible. Parallel circuits between the same
/// bus pair must be merged (susceptances summed) before construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from_bus: String,
    pub to_bus: String,
    pub susceptance: f64,
    pub flow_min: f64,
    pub flow_max: f64,
}

impl Line {
    pub fn new(
        from: impl Into<String>,
        to: impl Into<String>,
        susceptance: f64,
        flow_min: f64,
        flow_max: f64,
    ) -> Self {
        Line {
            from_bus: from.into(),
            to_bus: to.into(),
            susceptance,
            flow_min,
            flow_max,
        }
    }

    /// Symmetric thermal rating: limits are `[-rating, +rating]`.
    pub fn with_rating(from: impl Into<String>, to: impl Into<String>, susceptance: f64, rating: f64) -> Self {
        Line::new(from, to, susceptance, -rating, rating)
    }

    /// No thermal limit in either direction.
    pub fn unlimited(from: impl Into<String>, to: impl Into<String>, susceptance: f64) -> Self {
        Line::new(from, to, susceptance, f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_limited(&self) -> bool {
        self.flow_min.is_finite() || self.flow_max.is_finite()
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.from_bus, self.to_bus)
    }
}

/// Buses, lines, and the angle reference. Construction accepts any data;
/// [`validate_network`] reports invariant violations, and operations that
/// need a well-formed network return errors when they cannot proceed.
#[derive(Debug, Clone)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    reference_bus: String,
    index: BTreeMap<String, usize>,
}

impl Network {
    pub fn new(buses: Vec<Bus>, lines: Vec<Line>, reference_bus: impl Into<String>) -> Self {
        let mut index = BTreeMap::new();
        for (i, b) in buses.iter().enumerate() {
            index.entry(b.id.clone()).or_insert(i);
        }
        Network {
            buses,
            lines,
            reference_bus: reference_bus.into(),
            index,
        }
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn reference_bus(&self) -> &str {
        &self.reference_bus
    }

    pub fn num_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Endpoint indices of every line; `None` entries mark dangling
    /// references.
    fn line_endpoints(&self) -> Vec<Option<(usize, usize)>> {
        self.lines
            .iter()
            .map(|l| {
                match (self.bus_index(&l.from_bus), self.bus_index(&l.to_bus)) {
                    (Some(a), Some(b)) => Some((a, b)),
                    _ => None,
                }
            })
            .collect()
    }

    /// A copy of the network with every line limit removed, the idealized
    /// copper plate.
    pub fn copper_plate(&self) -> Network {
        let mut net = self.clone();
        for line in &mut net.lines {
            line.flow_min = f64::NEG_INFINITY;
            line.flow_max = f64::INFINITY;
        }
        net
    }

    /// Per-line MW flows implied by a bus angle vector (radians, in bus
    /// order), oriented from `from_bus` to `to_bus`.
    pub fn dc_flows(&self, angles: &[f64]) -> Result<Vec<f64>, GridError> {
        if angles.len() != self.buses.len() {
            return Err(GridError::AngleCountMismatch {
                got: angles.len(),
                want: self.buses.len(),
            });
        }
        self.lines
            .iter()
            .map(|l| {
                let a = self
                    .bus_index(&l.from_bus)
                    .ok_or_else(|| GridError::UnknownBus(l.from_bus.clone()))?;
                let b = self
                    .bus_index(&l.to_bus)
                    .ok_or_else(|| GridError::UnknownBus(l.to_bus.clone()))?;
                Ok(l.susceptance * (angles[a] - angles[b]))
            })
            .collect()
    }

    /// Net MW injection at every bus implied by an angle vector (positive
    /// means power leaves the bus over its lines).
    pub fn dc_injections(&self, angles: &[f64]) -> Result<Vec<f64>, GridError> {
        let flows = self.dc_flows(angles)?;
        let mut inj = vec![0.0; self.buses.len()];
        for (line, flow) in self.lines.iter().zip(&flows) {
            let a = self.bus_index(&line.from_bus).unwrap();
            let b = self.bus_index(&line.to_bus).unwrap();
            inj[a] += flow;
            inj[b] -= flow;
        }
        Ok(inj)
    }

    /// Maximum MW deliverable to `sink` from the given sources alone,
    /// respecting line limits. Solved as a small auxiliary program that
    /// maximizes the sink withdrawal.
    pub fn max_deliverable(
        &self,
        sources: &[(String, f64)],
        sink: &str,
    ) -> Result<f64, GridError> {
        let sink_idx = self
            .bus_index(sink)
            .ok_or_else(|| GridError::UnknownBus(sink.to_string()))?;
        let mut lp = LinearProgram::new("max-deliverable");
        let total_cap: f64 = sources.iter().map(|(_, c)| c.max(0.0)).sum();
        let withdraw = lp
            .add_variable("withdraw", 0.0, total_cap, 1.0)
            .expect("fresh program");
        let mut injections: Vec<Vec<(crate::lpsolve::VarId, f64)>> =
            vec![Vec::new(); self.buses.len()];
        injections[sink_idx].push((withdraw, 1.0));
        for (k, (bus, cap)) in sources.iter().enumerate() {
            let idx = self
                .bus_index(bus)
                .ok_or_else(|| GridError::UnknownBus(bus.clone()))?;
            let v = lp
                .add_variable(format!("inject[{k}]"), 0.0, cap.max(0.0), 0.0)
                .expect("unique name");
            injections[idx].push((v, -1.0));
        }
        let angles: Vec<_> = self
            .buses
            .iter()
            .map(|b| {
                lp.add_variable(
                    format!("angle[{}]", b.id),
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    0.0,
                )
                .expect("unique name")
            })
            .collect();
        for (n, bus) in self.buses.iter().enumerate() {
            let mut terms = injections[n].clone();
            for (line, ep) in self.lines.iter().zip(self.line_endpoints()) {
                let Some((a, b)) = ep else {
                    return Err(GridError::UnknownBus(line.from_bus.clone()));
                };
                if a == n {
                    terms.push((angles[a], line.susceptance));
                    terms.push((angles[b], -line.susceptance));
                } else if b == n {
                    terms.push((angles[b], line.susceptance));
                    terms.push((angles[a], -line.susceptance));
                }
            }
            lp.add_equality(format!("balance[{}]", bus.id), &terms, 0.0)
                .expect("unique name");
        }
        for (i, (line, ep)) in self.lines.iter().zip(self.line_endpoints()).enumerate() {
            let (a, b) = ep.unwrap();
            lp.add_range(
                format!("flow[{i}]"),
                &[
                    (angles[a], line.susceptance),
                    (angles[b], -line.susceptance),
                ],
                line.flow_min,
                line.flow_max,
            )
            .expect("unique name");
        }
        let ref_idx = self
            .bus_index(&self.reference_bus)
            .ok_or_else(|| GridError::UnknownBus(self.reference_bus.clone()))?;
        lp.add_equality("reference-pin", &[(angles[ref_idx], 1.0)], 0.0)
            .expect("unique name");
        let sol = lp.solve(&Tolerances::default());
        if !sol.is_optimal() {
            return Err(GridError::Deliverability(sol.status));
        }
        Ok(sol.value(withdraw))
    }
}

/// Checks every network invariant and reports all findings.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut seen = BTreeSet::new();
    for bus in net.buses() {
        if !seen.insert(bus.id.clone()) {
            report.push(ViolationKind::DuplicateBusId, format!("bus `{}`", bus.id));
        }
    }
    if net.bus_index(net.reference_bus()).is_none() {
        report.push(
            ViolationKind::MissingReferenceBus,
            format!("reference bus `{}` does not exist", net.reference_bus()),
        );
    }
    let mut pairs = BTreeSet::new();
    for line in net.lines() {
        let label = line.label();
        if line.from_bus == line.to_bus {
            report.push(ViolationKind::SelfLoop, format!("line `{label}`"));
        }
        if !(line.susceptance > 0.0) || !line.susceptance.is_finite() {
            report.push(
                ViolationKind::NonpositiveSusceptance,
                format!("line `{}` susceptance {}", label, line.susceptance),
            );
        }
        if line.flow_min > 0.0 || line.flow_max < 0.0 || line.flow_min > line.flow_max {
            report.push(
                ViolationKind::LimitsDontBracketZero,
                format!(
                    "line `{}` limits [{}, {}]",
                    label, line.flow_min, line.flow_max
                ),
            );
        }
        for bus in [&line.from_bus, &line.to_bus] {
            if net.bus_index(bus).is_none() {
                report.push(
                    ViolationKind::DanglingBusReference,
                    format!("line `{label}` references unknown bus `{bus}`"),
                );
            }
        }
        let key = if line.from_bus <= line.to_bus {
            (line.from_bus.clone(), line.to_bus.clone())
        } else {
            (line.to_bus.clone(), line.from_bus.clone())
        };
        if !pairs.insert(key) {
            report.push(ViolationKind::ParallelLines, format!("line `{label}`"));
        }
    }
    // Connectivity over the undirected line graph.
    if !net.buses().is_empty() {
        let n = net.buses().len();
        let mut adj = vec![Vec::new(); n];
        for ep in net.line_endpoints().into_iter().flatten() {
            adj[ep.0].push(ep.1);
            adj[ep.1].push(ep.0);
        }
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        for (i, seen) in visited.iter().enumerate() {
            if !seen {
                report.push(
                    ViolationKind::Disconnected,
                    format!("bus `{}` unreachable from `{}`", net.buses()[i].id, net.buses()[0].id),
                );
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Network {
        Network::new(
            vec![Bus::new("a"), Bus::new("b"), Bus::new("c")],
            vec![
                Line::unlimited("a", "b", 5.0),
                Line::unlimited("b", "c", 5.0),
                Line::unlimited("a", "c", 5.0),
            ],
            "a",
        )
    }

    #[test]
    fn well_formed_triangle_validates() {
        assert!(validate_network(&triangle()).is_valid());
    }

    #[test]
    fn isolated_bus_is_disconnected() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b"), Bus::new("island")],
            vec![Line::unlimited("a", "b", 5.0)],
            "a",
        );
        let report = validate_network(&net);
        assert!(report.has(ViolationKind::Disconnected));
    }

    #[test]
    fn zero_susceptance_is_flagged() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::unlimited("a", "b", 0.0)],
            "a",
        );
        let report = validate_network(&net);
        assert!(report.has(ViolationKind::NonpositiveSusceptance));
    }

    #[test]
    fn missing_reference_is_flagged() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::unlimited("a", "b", 1.0)],
            "zz",
        );
        assert!(validate_network(&net).has(ViolationKind::MissingReferenceBus));
    }

    #[test]
    fn parallel_and_self_loops_are_flagged() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![
                Line::unlimited("a", "b", 1.0),
                Line::unlimited("b", "a", 2.0),
                Line::unlimited("a", "a", 1.0),
            ],
            "a",
        );
        let report = validate_network(&net);
        assert!(report.has(ViolationKind::ParallelLines));
        assert!(report.has(ViolationKind::SelfLoop));
    }

    #[test]
    fn zero_angles_zero_flows() {
        let net = triangle();
        let flows = net.dc_flows(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(flows, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_bus_flow_definition() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::unlimited("a", "b", 10.0)],
            "b",
        );
        let flows = net.dc_flows(&[0.1, 0.0]).unwrap();
        assert!((flows[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angle_count_mismatch_errors() {
        let net = triangle();
        assert!(matches!(
            net.dc_flows(&[0.0, 0.0]),
            Err(GridError::AngleCountMismatch { got: 2, want: 3 })
        ));
    }

    #[test]
    fn injections_sum_to_zero() {
        let net = triangle();
        let inj = net.dc_injections(&[0.3, -0.1, 0.07]).unwrap();
        let total: f64 = inj.iter().sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn flows_are_linear_in_angles() {
        let net = triangle();
        let d1 = [0.2, -0.1, 0.05];
        let d2 = [-0.03, 0.08, 0.11];
        let (a, b) = (2.0, -0.5);
        let combo: Vec<f64> = d1.iter().zip(&d2).map(|(x, y)| a * x + b * y).collect();
        let f1 = net.dc_flows(&d1).unwrap();
        let f2 = net.dc_flows(&d2).unwrap();
        let fc = net.dc_flows(&combo).unwrap();
        for i in 0..3 {
            assert!((fc[i] - (a * f1[i] + b * f2[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn capacity_limited_delivery() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::unlimited("a", "b", 10.0)],
            "a",
        );
        let got = net
            .max_deliverable(&[("a".to_string(), 7.0)], "b")
            .unwrap();
        assert!((got - 7.0).abs() < 1e-8);
    }

    #[test]
    fn line_limited_delivery() {
        let net = Network::new(
            vec![Bus::new("a"), Bus::new("b")],
            vec![Line::with_rating("a", "b", 10.0, 4.0)],
            "a",
        );
        let got = net
            .max_deliverable(&[("a".to_string(), 7.0)], "b")
            .unwrap();
        assert!((got - 4.0).abs() < 1e-8);
    }

    #[test]
    fn deliverability_monotone_in_limits_and_capacity() {
        let build = |rating: f64| {
            Network::new(
                vec![Bus::new("a"), Bus::new("b")],
                vec![Line::with_rating("a", "b", 10.0, rating)],
                "a",
            )
        };
        let tight = build(2.0)
            .max_deliverable(&[("a".to_string(), 10.0)], "b")
            .unwrap();
        let loose = build(6.0)
            .max_deliverable(&[("a".to_string(), 10.0)], "b")
            .unwrap();
        assert!(loose >= tight - 1e-9);
        let small = build(6.0)
            .max_deliverable(&[("a".to_string(), 3.0)], "b")
            .unwrap();
        assert!(loose >= small - 1e-9);
    }
}
