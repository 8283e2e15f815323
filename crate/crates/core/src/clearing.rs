//! The two market-clearing programs and their price extraction.
//!
//! Standard clearing maximizes bid-weighted load value minus offer-weighted
//! generation cost over block dispatch, bus angles, nodal balance, and line
//! limits. Dual-pricing dispatch (DPD) adds a per-load split of served
//! energy into a green and a black portion, a system-wide green balance row
//! tying total green allocation to total green generation, and rewards the
//! green portion with the load's premium.
//!
//! Nodal balance rows are written `loads + outgoing flows - generation = 0`,
//! which makes the row dual directly the price an incremental withdrawal at
//! that bus would pay: the black LMP. The dual of the green balance row is
//! the system-wide offset `lambda_green`, and every bus's green LMP is its
//! black LMP plus that offset. Degenerate optima exist (ties between equal
//! price blocks); duals are then basis-dependent, as is standard for LMPs,
//! and the fixed pivoting rule keeps them deterministic.

use thiserror::Error;

use crate::grid::Network;
use crate::lpsolve::{LinearProgram, LpSolution, SolveStatus, Tolerances, VarId};
use crate::orderbook::{EnergyClass, OrderBook};
use crate::validate::{validate_all, ValidationReport};

/// Line flows within this distance of a limit count as congested.
pub const DEFAULT_CONGESTION_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum ClearingError {
    #[error("inputs failed validation:\n{0}")]
    InvalidInputs(ValidationReport),
    #[error("clearing program is infeasible")]
    Infeasible,
    #[error("clearing program is unbounded")]
    Unbounded,
    #[error("solver failed numerically")]
    Numerical,
    #[error("dual-pricing dispatch requires a tagged green balance row")]
    MissingGreenBalance,
}

fn status_error(status: SolveStatus) -> ClearingError {
    match status {
        SolveStatus::Infeasible => ClearingError::Infeasible,
        SolveStatus::Unbounded => ClearingError::Unbounded,
        _ => ClearingError::Numerical,
    }
}

/// Tag keys used to find entities in the built programs.
pub mod tag {
    pub fn balance(bus: &str) -> String {
        format!("balance:{bus}")
    }
    pub fn flow(line_index: usize) -> String {
        format!("flow:{line_index}")
    }
    pub fn angle(bus: &str) -> String {
        format!("angle:{bus}")
    }
    pub fn gen_block(gen: &str, block: usize) -> String {
        format!("gen:{gen}:{block}")
    }
    pub fn load_block(load: &str, block: usize) -> String {
        format!("load:{load}:{block}")
    }
    pub fn load_green(load: &str) -> String {
        format!("load-green:{load}")
    }
    pub fn load_black(load: &str) -> String {
        format!("load-black:{load}")
    }
    pub fn load_split(load: &str) -> String {
        format!("split:{load}")
    }
    pub const GREEN_BALANCE: &str = "green-balance";
    pub const REFERENCE_PIN: &str = "reference-pin";
}

/// Dispatch, prices, and flows from a standard clearing.
#[derive(Debug, Clone)]
pub struct ClearingSolution {
    /// Market surplus at the optimum, $.
    pub objective: f64,
    /// MWh per generator per block, aligned with the order book.
    pub generator_dispatch: Vec<Vec<f64>>,
    /// MWh per load per block.
    pub load_service: Vec<Vec<f64>>,
    /// Bus angles, rad, in network bus order.
    pub angles: Vec<f64>,
    /// Line flows, MW, in network line order.
    pub flows: Vec<f64>,
    /// Black LMP per bus, $/MWh: the dual of each balance row.
    pub black_lmp: Vec<f64>,
    /// Indices of lines at a limit.
    pub congested_lines: Vec<usize>,
    /// Totals by class, MWh.
    pub green_dispatch: f64,
    pub black_dispatch: f64,
    pub total_load_served: f64,
    /// Participant ids, for instance-matching checks.
    pub generator_ids: Vec<String>,
    pub load_ids: Vec<String>,
}

impl ClearingSolution {
    pub fn generator_total(&self, index: usize) -> f64 {
        self.generator_dispatch[index].iter().sum()
    }

    pub fn load_total(&self, index: usize) -> f64 {
        self.load_service[index].iter().sum()
    }
}

/// Everything in [`ClearingSolution`] plus the green split and dual prices.
#[derive(Debug, Clone)]
pub struct DpdSolution {
    pub clearing: ClearingSolution,
    /// Green MWh allocated to each load.
    pub green_allocation: Vec<f64>,
    /// Black MWh allocated to each load.
    pub black_allocation: Vec<f64>,
    /// Dual of the green balance row, $/MWh; nonnegative when premiums are.
    pub lambda_green: f64,
    /// Green LMP per bus: black LMP plus `lambda_green`.
    pub green_lmp: Vec<f64>,
}

/// Cash flows implied by settling a DPD outcome at the dual prices.
#[derive(Debug, Clone)]
pub struct Settlement {
    /// Per-load payment, $: black portion at the bus's black LMP plus green
    /// portion at its green LMP.
    pub load_payments: Vec<f64>,
    /// Per-generator revenue, $: dispatch at the bus's class price.
    pub generator_revenues: Vec<f64>,
    pub total_payments: f64,
    pub total_revenues: f64,
    /// Payments minus revenues; retained by the market operator.
    pub merchandising_surplus: f64,
}

fn validated(net: &Network, ob: &OrderBook) -> Result<(), ClearingError> {
    let report = validate_all(net, ob);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ClearingError::InvalidInputs(report))
    }
}

struct ProgramVars {
    gen_blocks: Vec<Vec<VarId>>,
    load_blocks: Vec<Vec<VarId>>,
}

/// Shared core of both programs: block variables, angles, balance rows,
/// line-limit rows, and the reference pin.
fn build_base(lp: &mut LinearProgram, net: &Network, ob: &OrderBook) -> ProgramVars {
    let nbuses = net.num_buses();
    let mut gen_blocks = Vec::with_capacity(ob.generators.len());
    for gen in &ob.generators {
        let mut vars = Vec::with_capacity(gen.blocks.len());
        for (bi, block) in gen.blocks.iter().enumerate() {
            let v = lp
                .add_variable(
                    tag::gen_block(&gen.id, bi),
                    block.quantity_min,
                    block.quantity_max,
                    -block.price,
                )
                .expect("validated ids are unique");
            lp.tag_variable(tag::gen_block(&gen.id, bi), v);
            vars.push(v);
        }
        gen_blocks.push(vars);
    }
    let mut load_blocks = Vec::with_capacity(ob.loads.len());
    for load in &ob.loads {
        let mut vars = Vec::with_capacity(load.blocks.len());
        for (bi, block) in load.blocks.iter().enumerate() {
            let v = lp
                .add_variable(
                    tag::load_block(&load.id, bi),
                    block.quantity_min,
                    block.quantity_max,
                    block.value,
                )
                .expect("validated ids are unique");
            lp.tag_variable(tag::load_block(&load.id, bi), v);
            vars.push(v);
        }
        load_blocks.push(vars);
    }
    let angles: Vec<VarId> = net
        .buses()
        .iter()
        .map(|bus| {
            let v = lp
                .add_variable(
                    tag::angle(&bus.id),
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    0.0,
                )
                .expect("bus ids are unique");
            lp.tag_variable(tag::angle(&bus.id), v);
            v
        })
        .collect();

    // Balance per bus: loads + outgoing flows - generation = 0, so the row
    // dual prices an incremental withdrawal.
    let mut terms: Vec<Vec<(VarId, f64)>> = vec![Vec::new(); nbuses];
    for (load, vars) in ob.loads.iter().zip(&load_blocks) {
        let n = net.bus_index(&load.bus).expect("validated bus");
        for &v in vars {
            terms[n].push((v, 1.0));
        }
    }
    for (gen, vars) in ob.generators.iter().zip(&gen_blocks) {
        let n = net.bus_index(&gen.bus).expect("validated bus");
        for &v in vars {
            terms[n].push((v, -1.0));
        }
    }
    for line in net.lines() {
        let a = net.bus_index(&line.from_bus).expect("validated bus");
        let b = net.bus_index(&line.to_bus).expect("validated bus");
        terms[a].push((angles[a], line.susceptance));
        terms[a].push((angles[b], -line.susceptance));
        terms[b].push((angles[b], line.susceptance));
        terms[b].push((angles[a], -line.susceptance));
    }
    for (n, bus) in net.buses().iter().enumerate() {
        let row = lp
            .add_equality(tag::balance(&bus.id), &terms[n], 0.0)
            .expect("bus ids are unique");
        lp.tag_row(tag::balance(&bus.id), row);
    }
    for (i, line) in net.lines().iter().enumerate() {
        let a = net.bus_index(&line.from_bus).expect("validated bus");
        let b = net.bus_index(&line.to_bus).expect("validated bus");
        let row = lp
            .add_range(
                tag::flow(i),
                &[
                    (angles[a], line.susceptance),
                    (angles[b], -line.susceptance),
                ],
                line.flow_min,
                line.flow_max,
            )
            .expect("indices are unique");
        lp.tag_row(tag::flow(i), row);
    }
    let ref_idx = net
        .bus_index(net.reference_bus())
        .expect("validated reference");
    let pin = lp
        .add_equality(tag::REFERENCE_PIN, &[(angles[ref_idx], 1.0)], 0.0)
        .expect("single pin row");
    lp.tag_row(tag::REFERENCE_PIN, pin);

    ProgramVars {
        gen_blocks,
        load_blocks,
    }
}

/// Builds the standard surplus-maximization program.
///
/// Callers are expected to validate inputs first; [`clear_standard`] does.
pub fn build_standard_clearing(net: &Network, ob: &OrderBook) -> LinearProgram {
    let mut lp = LinearProgram::new("standard-clearing");
    build_base(&mut lp, net, ob);
    lp
}

/// Builds the dual-pricing dispatch program: the standard program plus
/// per-load green/black split variables, per-load split equalities, the
/// system green balance row, and the premium term on green allocations.
pub fn build_dpd_clearing(net: &Network, ob: &OrderBook) -> LinearProgram {
    let mut lp = LinearProgram::new("dpd-clearing");
    let vars = build_base(&mut lp, net, ob);
    let mut green_balance_terms: Vec<(VarId, f64)> = Vec::new();
    for (load, blocks) in ob.loads.iter().zip(&vars.load_blocks) {
        let cap = load.demand_cap();
        let green = lp
            .add_variable(tag::load_green(&load.id), 0.0, cap, load.alpha)
            .expect("validated ids are unique");
        let black = lp
            .add_variable(tag::load_black(&load.id), 0.0, cap, 0.0)
            .expect("validated ids are unique");
        lp.tag_variable(tag::load_green(&load.id), green);
        lp.tag_variable(tag::load_black(&load.id), black);
        // green + black = total served across the load's blocks.
        let mut terms = vec![(green, 1.0), (black, 1.0)];
        for &b in blocks {
            terms.push((b, -1.0));
        }
        let row = lp
            .add_equality(tag::load_split(&load.id), &terms, 0.0)
            .expect("validated ids are unique");
        lp.tag_row(tag::load_split(&load.id), row);
        green_balance_terms.push((green, 1.0));
    }
    for (gen, blocks) in ob.generators.iter().zip(&vars.gen_blocks) {
        if gen.energy_class == EnergyClass::Green {
            for &b in blocks {
                green_balance_terms.push((b, -1.0));
            }
        }
    }
    let row = lp
        .add_equality(tag::GREEN_BALANCE, &green_balance_terms, 0.0)
        .expect("single green balance row");
    lp.tag_row(tag::GREEN_BALANCE, row);
    lp
}

fn extract_clearing(
    lp: &LinearProgram,
    sol: &LpSolution,
    net: &Network,
    ob: &OrderBook,
) -> ClearingSolution {
    let generator_dispatch: Vec<Vec<f64>> = ob
        .generators
        .iter()
        .map(|g| {
            (0..g.blocks.len())
                .map(|bi| sol.value(lp.tagged_variable(&tag::gen_block(&g.id, bi)).unwrap()))
                .collect()
        })
        .collect();
    let load_service: Vec<Vec<f64>> = ob
        .loads
        .iter()
        .map(|l| {
            (0..l.blocks.len())
                .map(|bi| sol.value(lp.tagged_variable(&tag::load_block(&l.id, bi)).unwrap()))
                .collect()
        })
        .collect();
    let angles: Vec<f64> = net
        .buses()
        .iter()
        .map(|b| sol.value(lp.tagged_variable(&tag::angle(&b.id)).unwrap()))
        .collect();
    let flows = net.dc_flows(&angles).expect("angles cover every bus");
    let black_lmp: Vec<f64> = net
        .buses()
        .iter()
        .map(|b| sol.dual(lp.tagged_row(&tag::balance(&b.id)).unwrap()))
        .collect();
    let congested = congested_lines(net, &flows, DEFAULT_CONGESTION_TOL);
    let mut green = 0.0;
    let mut black = 0.0;
    for (gen, blocks) in ob.generators.iter().zip(&generator_dispatch) {
        let total: f64 = blocks.iter().sum();
        match gen.energy_class {
            EnergyClass::Green => green += total,
            EnergyClass::Black => black += total,
        }
    }
    let served = load_service.iter().flatten().sum();
    ClearingSolution {
        objective: sol.objective,
        generator_dispatch,
        load_service,
        angles,
        flows,
        black_lmp,
        congested_lines: congested,
        green_dispatch: green,
        black_dispatch: black,
        total_load_served: served,
        generator_ids: ob.generators.iter().map(|g| g.id.clone()).collect(),
        load_ids: ob.loads.iter().map(|l| l.id.clone()).collect(),
    }
}

/// Clears the market under standard surplus maximization.
pub fn clear_standard(net: &Network, ob: &OrderBook) -> Result<ClearingSolution, ClearingError> {
    clear_standard_with(net, ob, &Tolerances::default())
}

pub fn clear_standard_with(
    net: &Network,
    ob: &OrderBook,
    tol: &Tolerances,
) -> Result<ClearingSolution, ClearingError> {
    validated(net, ob)?;
    let lp = build_standard_clearing(net, ob);
    let sol = lp.solve(tol);
    if !sol.is_optimal() {
        return Err(status_error(sol.status));
    }
    Ok(extract_clearing(&lp, &sol, net, ob))
}

/// Clears the market under dual-pricing dispatch.
pub fn clear_dpd(net: &Network, ob: &OrderBook) -> Result<DpdSolution, ClearingError> {
    clear_dpd_with(net, ob, &Tolerances::default())
}

pub fn clear_dpd_with(
    net: &Network,
    ob: &OrderBook,
    tol: &Tolerances,
) -> Result<DpdSolution, ClearingError> {
    validated(net, ob)?;
    let lp = build_dpd_clearing(net, ob);
    let sol = lp.solve(tol);
    if !sol.is_optimal() {
        return Err(status_error(sol.status));
    }
    let clearing = extract_clearing(&lp, &sol, net, ob);
    let green_allocation: Vec<f64> = ob
        .loads
        .iter()
        .map(|l| sol.value(lp.tagged_variable(&tag::load_green(&l.id)).unwrap()))
        .collect();
    let black_allocation: Vec<f64> = ob
        .loads
        .iter()
        .map(|l| sol.value(lp.tagged_variable(&tag::load_black(&l.id)).unwrap()))
        .collect();
    let lambda_green = sol.dual(
        lp.tagged_row(tag::GREEN_BALANCE)
            .ok_or(ClearingError::MissingGreenBalance)?,
    );
    let green_lmp = clearing.black_lmp.iter().map(|p| p + lambda_green).collect();
    Ok(DpdSolution {
        clearing,
        green_allocation,
        black_allocation,
        lambda_green,
        green_lmp,
    })
}

/// Lines whose flow sits within `tol` of either limit.
pub fn congested_lines(net: &Network, flows: &[f64], tol: f64) -> Vec<usize> {
    net.lines()
        .iter()
        .zip(flows)
        .enumerate()
        .filter_map(|(i, (line, &flow))| {
            let at_max = line.flow_max.is_finite() && (flow - line.flow_max).abs() <= tol;
            let at_min = line.flow_min.is_finite() && (flow - line.flow_min).abs() <= tol;
            (at_max || at_min).then_some(i)
        })
        .collect()
}

/// Settles a DPD outcome: loads pay their bus prices on each portion, green
/// generators are paid the green LMP, black generators the black LMP.
pub fn settle(sol: &DpdSolution, net: &Network, ob: &OrderBook) -> Settlement {
    let load_payments: Vec<f64> = ob
        .loads
        .iter()
        .enumerate()
        .map(|(i, load)| {
            let n = net.bus_index(&load.bus).expect("validated bus");
            sol.clearing.black_lmp[n] * sol.black_allocation[i]
                + sol.green_lmp[n] * sol.green_allocation[i]
        })
        .collect();
    let generator_revenues: Vec<f64> = ob
        .generators
        .iter()
        .enumerate()
        .map(|(k, gen)| {
            let n = net.bus_index(&gen.bus).expect("validated bus");
            let price = match gen.energy_class {
                EnergyClass::Green => sol.green_lmp[n],
                EnergyClass::Black => sol.clearing.black_lmp[n],
            };
            price * sol.clearing.generator_total(k)
        })
        .collect();
    let total_payments: f64 = load_payments.iter().sum();
    let total_revenues: f64 = generator_revenues.iter().sum();
    Settlement {
        load_payments,
        generator_revenues,
        total_payments,
        total_revenues,
        merchandising_surplus: total_payments - total_revenues,
    }
}
