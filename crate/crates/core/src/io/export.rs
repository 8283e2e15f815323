//! CSV export of clearing results and sweep reports.
//!
//! Files written into the output directory:
//! - `buses.csv`: id, name, lat, lon, black and green LMP per bus.
//! - `lines.csv`: endpoints, flow, limits, congested flag.
//! - `participants.csv`: dispatch or service, green/black split, settlement.
//! - `report.csv`: one row per sweep point (deltas, lambda, congestion
//!   counts, emissions, homes, settlement totals).
//! - `lmp_histogram.csv`: binned black and green LMP counts for plotting.

use std::fmt::Write as _;
use std::path::Path;

use crate::clearing::{ClearingSolution, DpdSolution, Settlement};
use crate::grid::Network;
use crate::orderbook::OrderBook;
use crate::scenario::ScenarioReport;

use super::IoError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), IoError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

/// A standard solution exports with green prices equal to black (no premium
/// was in play); a DPD solution exports its own green side.
pub struct ExportView<'a> {
    pub net: &'a Network,
    pub ob: &'a OrderBook,
    pub clearing: &'a ClearingSolution,
    pub dpd: Option<&'a DpdSolution>,
    pub settlement: Option<&'a Settlement>,
}

impl<'a> ExportView<'a> {
    pub fn standard(net: &'a Network, ob: &'a OrderBook, sol: &'a ClearingSolution) -> Self {
        ExportView {
            net,
            ob,
            clearing: sol,
            dpd: None,
            settlement: None,
        }
    }

    pub fn dual(
        net: &'a Network,
        ob: &'a OrderBook,
        sol: &'a DpdSolution,
        settlement: &'a Settlement,
    ) -> Self {
        ExportView {
            net,
            ob,
            clearing: &sol.clearing,
            dpd: Some(sol),
            settlement: Some(settlement),
        }
    }

    fn lambda(&self) -> f64 {
        self.dpd.map_or(0.0, |d| d.lambda_green)
    }

    fn green_lmp(&self, bus: usize) -> f64 {
        self.clearing.black_lmp[bus] + self.lambda()
    }
}

/// Writes the full result set for one solved instance.
pub fn export_solution(dir: &Path, view: &ExportView) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    write_file(dir, "buses.csv", &buses_csv(view))?;
    write_file(dir, "lines.csv", &lines_csv(view))?;
    write_file(dir, "participants.csv", &participants_csv(view))?;
    write_file(dir, "lmp_histogram.csv", &histogram_csv(view))?;
    Ok(())
}

fn buses_csv(view: &ExportView) -> String {
    let mut out = String::from("bus,name,lat,lon,black_lmp,green_lmp\n");
    for (n, bus) in view.net.buses().iter().enumerate() {
        let (lat, lon) = bus
            .coordinates
            .map_or((String::new(), String::new()), |(a, b)| {
                (format!("{a}"), format!("{b}"))
            });
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            bus.id,
            bus.name,
            lat,
            lon,
            view.clearing.black_lmp[n],
            view.green_lmp(n)
        );
    }
    out
}

fn lines_csv(view: &ExportView) -> String {
    let mut out = String::from("from,to,flow_mw,flow_min,flow_max,congested\n");
    let congested = &view.clearing.congested_lines;
    for (i, line) in view.net.lines().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{:.6},{},{},{}",
            line.from_bus,
            line.to_bus,
            view.clearing.flows[i],
            fmt_limit(line.flow_min),
            fmt_limit(line.flow_max),
            congested.contains(&i)
        );
    }
    out
}

fn fmt_limit(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

fn participants_csv(view: &ExportView) -> String {
    let mut out = String::from(
        "id,kind,bus,class,quantity_mwh,green_mwh,black_mwh,price_per_mwh,settlement_dollars\n",
    );
    for (k, gen) in view.ob.generators.iter().enumerate() {
        let n = view.net.bus_index(&gen.bus).expect("validated bus");
        let dispatch = view.clearing.generator_total(k);
        let (price, green_part) = match gen.energy_class {
            crate::orderbook::EnergyClass::Green => (view.green_lmp(n), dispatch),
            crate::orderbook::EnergyClass::Black => (view.clearing.black_lmp[n], 0.0),
        };
        let revenue = view
            .settlement
            .map_or(price * dispatch, |s| s.generator_revenues[k]);
        let _ = writeln!(
            out,
            "{},generator,{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            gen.id,
            gen.bus,
            gen.energy_class.as_str(),
            dispatch,
            green_part,
            dispatch - green_part,
            price,
            revenue
        );
    }
    for (i, load) in view.ob.loads.iter().enumerate() {
        let n = view.net.bus_index(&load.bus).expect("validated bus");
        let served = view.clearing.load_total(i);
        let (green, black) = view
            .dpd
            .map_or((0.0, served), |d| {
                (d.green_allocation[i], d.black_allocation[i])
            });
        let payment = view.settlement.map_or(
            view.clearing.black_lmp[n] * black + view.green_lmp(n) * green,
            |s| s.load_payments[i],
        );
        let _ = writeln!(
            out,
            "{},load,{},,{:.6},{:.6},{:.6},{:.6},{:.6}",
            load.id,
            load.bus,
            served,
            green,
            black,
            view.clearing.black_lmp[n],
            payment
        );
    }
    out
}

/// Fixed-width histogram over both price vectors, 20 bins.
fn histogram_csv(view: &ExportView) -> String {
    let black = &view.clearing.black_lmp;
    let greens: Vec<f64> = (0..black.len()).map(|n| view.green_lmp(n)).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in black.iter().chain(&greens) {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    let mut out = String::from("bin_low,bin_high,black_count,green_count\n");
    if !lo.is_finite() || !hi.is_finite() {
        return out;
    }
    let bins = 20usize;
    let width = ((hi - lo) / bins as f64).max(1e-9);
    let index = |v: f64| (((v - lo) / width) as usize).min(bins - 1);
    let mut black_counts = vec![0usize; bins];
    let mut green_counts = vec![0usize; bins];
    for &v in black {
        black_counts[index(v)] += 1;
    }
    for &v in &greens {
        green_counts[index(v)] += 1;
    }
    for b in 0..bins {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{},{}",
            lo + width * b as f64,
            lo + width * (b + 1) as f64,
            black_counts[b],
            green_counts[b]
        );
    }
    out
}

/// One row per report; a header-only file when the list is empty.
pub fn reports_csv(reports: &[ScenarioReport]) -> String {
    let mut out = String::from(
        "res_share,delta_green_mwh,delta_black_mwh,lambda_green,congested_before,\
         congested_after,avg_emissions_before,avg_emissions_after,homes_powered,\
         total_load_payment,total_gen_revenue,merchandising_surplus\n",
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{},{},{},{},{:.6},{:.6},{:.6}",
            r.res_share,
            r.delta_green,
            r.delta_black,
            r.lambda_green,
            r.congested_before,
            r.congested_after,
            fmt_opt(r.avg_emissions_before),
            fmt_opt(r.avg_emissions_after),
            r.homes_powered,
            r.total_load_payment,
            r.total_gen_revenue,
            r.merchandising_surplus
        );
    }
    out
}

pub fn export_reports(dir: &Path, reports: &[ScenarioReport]) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.display().to_string(),
        source,
    })?;
    write_file(dir, "report.csv", &reports_csv(reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clearing;
    use crate::grid::{Bus, Line, Network};
    use crate::orderbook::{BidBlock, EnergyClass, Generator, Load, OfferBlock, OrderBook};

    fn three_bus() -> (Network, OrderBook) {
        let net = Network::new(
            vec![Bus::new("G").with_coordinates(30.0, -97.0), Bus::new("B"), Bus::new("L")],
            vec![
                Line::with_rating("G", "B", 10.0, 1.0),
                Line::unlimited("G", "L", 10.0),
                Line::unlimited("B", "L", 10.0),
            ],
            "L",
        );
        let ob = OrderBook::new(
            vec![
                Generator::new("g1", "G", EnergyClass::Green, vec![OfferBlock::new(4.0, 0.0)], 12.0),
                Generator::new("b1", "B", EnergyClass::Black, vec![OfferBlock::new(4.0, 10.0)], 1000.0),
            ],
            vec![Load::new("l1", "L", vec![BidBlock::new(8.0, 4.0)], 3.0)],
        );
        (net, ob)
    }

    #[test]
    fn bus_csv_green_minus_black_is_lambda() {
        let (net, ob) = three_bus();
        let sol = clearing::clear_dpd(&net, &ob).unwrap();
        let settlement = clearing::settle(&sol, &net, &ob);
        let view = ExportView::dual(&net, &ob, &sol, &settlement);
        let csv = buses_csv(&view);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 4);
        for row in &lines[1..] {
            let cols: Vec<&str> = row.split(',').collect();
            let black: f64 = cols[4].parse().unwrap();
            let green: f64 = cols[5].parse().unwrap();
            assert!((green - black - sol.lambda_green).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_report_list_is_header_only() {
        let csv = reports_csv(&[]);
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("res_share,"));
    }

    #[test]
    fn solution_export_writes_all_files() {
        let (net, ob) = three_bus();
        let sol = clearing::clear_standard(&net, &ob).unwrap();
        let view = ExportView::standard(&net, &ob, &sol);
        let dir = std::env::temp_dir().join("gridclear-export-test");
        let _ = std::fs::remove_dir_all(&dir);
        export_solution(&dir, &view).unwrap();
        for f in ["buses.csv", "lines.csv", "participants.csv", "lmp_histogram.csv"] {
            assert!(dir.join(f).exists(), "{f} missing");
        }
        let lines = std::fs::read_to_string(dir.join("lines.csv")).unwrap();
        assert!(lines.contains("true"), "congested tie line not flagged:\n{lines}");
        let _ = std::fs::remove_dir_all(&dir);
    }
}
