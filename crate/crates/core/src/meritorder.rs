//! Copper-plate clearing by aggregated step-curve intersection.
//!
//! Supply steps are offer blocks sorted by ascending price, demand steps bid
//! blocks by descending value; equal-price blocks merge into one step (in
//! participant order within the book). The cleared volume is the largest
//! quantity at which the demand value still covers the supply price, and the
//! clearing price is taken from the competitive price interval at that
//! volume: `[max(supply left-price, demand right-price), min(demand
//! left-price, supply right-price)]`. The interval collapses to a point
//! except at degenerate crossings, where its midpoint is used; ties resolve
//! toward the larger traded volume because equal-price segments are walked
//! through rather than stopped at.

use std::fmt::Write as _;

use crate::orderbook::{EnergyClass, OrderBook};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Supply,
    Demand,
}

/// One merged step of an aggregated curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// Cumulative quantity at the end of this step, MWh.
    pub cumulative_to: f64,
    /// Price ($/MWh) of every unit inside the step.
    pub price: f64,
    /// MWh of the step that came from green-classed blocks (supply only).
    pub green_quantity: f64,
}

/// An aggregated supply or demand curve as a step function of quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve {
    pub kind: CurveKind,
    pub steps: Vec<Step>,
}

impl StepCurve {
    pub fn total_quantity(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.cumulative_to)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Two-column CSV (cumulative MWh, $/MWh) of the step breakpoints.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cumulative_mwh,price_per_mwh\n");
        let mut from = 0.0;
        for step in &self.steps {
            let _ = writeln!(out, "{},{}", from, step.price);
            let _ = writeln!(out, "{},{}", step.cumulative_to, step.price);
            from = step.cumulative_to;
        }
        out
    }
}

/// Offer blocks merged and sorted ascending by price.
pub fn build_supply_curve(ob: &OrderBook) -> StepCurve {
    // (price, quantity, green quantity), stable in participant order.
    let mut blocks: Vec<(f64, f64, f64)> = Vec::new();
    for gen in &ob.generators {
        for block in &gen.blocks {
            let qty = block.quantity_max;
            if qty > 0.0 {
                let green = match gen.energy_class {
                    EnergyClass::Green => qty,
                    EnergyClass::Black => 0.0,
                };
                blocks.push((block.price, qty, green));
            }
        }
    }
    blocks.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite prices"));
    StepCurve {
        kind: CurveKind::Supply,
        steps: merge_steps(blocks),
    }
}

/// Bid blocks merged and sorted descending by value.
pub fn build_demand_curve(ob: &OrderBook) -> StepCurve {
    let mut blocks: Vec<(f64, f64, f64)> = Vec::new();
    for load in &ob.loads {
        for block in &load.blocks {
            if block.quantity_max > 0.0 {
                blocks.push((block.value, block.quantity_max, 0.0));
            }
        }
    }
    blocks.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values"));
    StepCurve {
        kind: CurveKind::Demand,
        steps: merge_steps(blocks),
    }
}

fn merge_steps(blocks: Vec<(f64, f64, f64)>) -> Vec<Step> {
    let mut steps: Vec<Step> = Vec::new();
    let mut cumulative = 0.0;
    for (price, qty, green) in blocks {
        cumulative += qty;
        match steps.last_mut() {
            Some(last) if last.price == price => {
                last.cumulative_to = cumulative;
                last.green_quantity += green;
            }
            _ => steps.push(Step {
                cumulative_to: cumulative,
                price,
                green_quantity: green,
            }),
        }
    }
    steps
}

/// Result of intersecting the aggregated curves.
#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    /// Cleared volume, MWh.
    pub volume: f64,
    /// Uniform clearing price; `None` when nothing trades.
    pub price: Option<f64>,
    /// Fraction of the cleared supply that came from green blocks.
    pub green_share: f64,
}

/// Intersects a supply and a demand curve.
pub fn intersect(supply: &StepCurve, demand: &StepCurve) -> Intersection {
    debug_assert_eq!(supply.kind, CurveKind::Supply);
    debug_assert_eq!(demand.kind, CurveKind::Demand);
    let mut volume = 0.0f64;
    let mut si = 0usize;
    let mut di = 0usize;
    // Prices on each side of the final volume; beyond the curve end supply
    // jumps to +inf and demand to -inf.
    let mut s_left = f64::NAN;
    let mut d_left = f64::NAN;
    loop {
        let s_price = supply.steps.get(si).map(|s| s.price);
        let d_price = demand.steps.get(di).map(|s| s.price);
        let (Some(sp), Some(dp)) = (s_price, d_price) else {
            break;
        };
        if dp < sp {
            break;
        }
        // The current pair of steps trades up to the nearer breakpoint.
        let s_end = supply.steps[si].cumulative_to;
        let d_end = demand.steps[di].cumulative_to;
        volume = s_end.min(d_end);
        s_left = sp;
        d_left = dp;
        if s_end <= volume + 0.0 && s_end <= d_end {
            si += 1;
        }
        if d_end <= s_end {
            di += 1;
        }
    }
    if volume <= 0.0 {
        return Intersection {
            volume: 0.0,
            price: None,
            green_share: 0.0,
        };
    }
    let s_right = supply
        .steps
        .iter()
        .find(|s| s.cumulative_to > volume)
        .map_or(f64::INFINITY, |s| s.price);
    let d_right = demand
        .steps
        .iter()
        .find(|s| s.cumulative_to > volume)
        .map_or(f64::NEG_INFINITY, |s| s.price);
    let lo = s_left.max(d_right);
    let hi = d_left.min(s_right);
    let price = if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo
    } else {
        hi
    };
    // Green share of the cleared supply, prorating the marginal step.
    let mut green = 0.0;
    let mut from = 0.0;
    for step in &supply.steps {
        if volume <= from {
            break;
        }
        let width = step.cumulative_to - from;
        let used = (volume - from).min(width);
        if width > 0.0 {
            green += step.green_quantity * used / width;
        }
        from = step.cumulative_to;
    }
    Intersection {
        volume,
        price: Some(price),
        green_share: green / volume,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orderbook::{BidBlock, Generator, Load, OfferBlock, OrderBook};
    use approx::assert_abs_diff_eq;

    fn three_bus_book() -> OrderBook {
        OrderBook::new(
            vec![
                Generator::new(
                    "green1",
                    "G",
                    EnergyClass::Green,
                    vec![OfferBlock::new(4.0, 0.0)],
                    12.0,
                ),
                Generator::new(
                    "black1",
                    "B",
                    EnergyClass::Black,
                    vec![OfferBlock::new(4.0, 10.0)],
                    1000.0,
                ),
            ],
            vec![Load::new("load1", "L", vec![BidBlock::new(8.0, 4.0)], 3.0)],
        )
    }

    #[test]
    fn supply_curve_steps_for_three_bus() {
        let curve = build_supply_curve(&three_bus_book());
        assert_eq!(curve.steps.len(), 2);
        assert_abs_diff_eq!(curve.steps[0].cumulative_to, 4.0);
        assert_abs_diff_eq!(curve.steps[0].price, 0.0);
        assert_abs_diff_eq!(curve.steps[1].cumulative_to, 8.0);
        assert_abs_diff_eq!(curve.steps[1].price, 10.0);
    }

    #[test]
    fn empty_book_gives_empty_curves() {
        let ob = OrderBook::default();
        assert!(build_supply_curve(&ob).is_empty());
        assert!(build_demand_curve(&ob).is_empty());
    }

    #[test]
    fn equal_price_blocks_merge() {
        let ob = OrderBook::new(
            vec![
                Generator::new(
                    "a",
                    "x",
                    EnergyClass::Green,
                    vec![OfferBlock::new(2.0, 5.0)],
                    0.0,
                ),
                Generator::new(
                    "b",
                    "x",
                    EnergyClass::Black,
                    vec![OfferBlock::new(3.0, 5.0)],
                    0.0,
                ),
            ],
            vec![],
        );
        let curve = build_supply_curve(&ob);
        assert_eq!(curve.steps.len(), 1);
        assert_abs_diff_eq!(curve.steps[0].cumulative_to, 5.0);
        assert_abs_diff_eq!(curve.steps[0].green_quantity, 2.0);
    }

    #[test]
    fn demand_curve_is_descending() {
        let ob = OrderBook::new(
            vec![],
            vec![
                Load::new(
                    "l1",
                    "x",
                    vec![BidBlock::new(1.0, 10.0), BidBlock::new(2.0, 4.0)],
                    0.0,
                ),
                Load::new("l2", "x", vec![BidBlock::new(1.5, 7.0)], 0.0),
            ],
        );
        let curve = build_demand_curve(&ob);
        let prices: Vec<f64> = curve.steps.iter().map(|s| s.price).collect();
        assert_eq!(prices, vec![10.0, 7.0, 4.0]);
        assert_abs_diff_eq!(curve.total_quantity(), 4.5);
    }

    #[test]
    fn three_bus_intersection_volume_and_price() {
        let ob = three_bus_book();
        let hit = intersect(&build_supply_curve(&ob), &build_demand_curve(&ob));
        assert_abs_diff_eq!(hit.volume, 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.price.unwrap(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.green_share, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn demand_below_supply_trades_nothing() {
        let ob = OrderBook::new(
            vec![Generator::new(
                "g",
                "x",
                EnergyClass::Black,
                vec![OfferBlock::new(5.0, 50.0)],
                0.0,
            )],
            vec![Load::new("l", "x", vec![BidBlock::new(5.0, 10.0)], 0.0)],
        );
        let hit = intersect(&build_supply_curve(&ob), &build_demand_curve(&ob));
        assert_eq!(hit.volume, 0.0);
        assert_eq!(hit.price, None);
    }

    #[test]
    fn flat_overlap_trades_the_common_quantity() {
        // Supply flat at 5 for 10 MWh, demand flat at 5 for 6 MWh: the full
        // mutually agreeable 6 MWh trades at the shared price.
        let ob = OrderBook::new(
            vec![Generator::new(
                "g",
                "x",
                EnergyClass::Green,
                vec![OfferBlock::new(10.0, 5.0)],
                0.0,
            )],
            vec![Load::new("l", "x", vec![BidBlock::new(6.0, 5.0)], 0.0)],
        );
        let hit = intersect(&build_supply_curve(&ob), &build_demand_curve(&ob));
        assert_abs_diff_eq!(hit.volume, 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.price.unwrap(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn volume_never_exceeds_either_side() {
        let ob = three_bus_book();
        let s = build_supply_curve(&ob);
        let d = build_demand_curve(&ob);
        let hit = intersect(&s, &d);
        assert!(hit.volume <= s.total_quantity() + 1e-12);
        assert!(hit.volume <= d.total_quantity() + 1e-12);
    }

    #[test]
    fn price_between_marginal_supply_and_demand() {
        let ob = OrderBook::new(
            vec![Generator::new(
                "g",
                "x",
                EnergyClass::Black,
                vec![OfferBlock::new(3.0, 2.0), OfferBlock::new(3.0, 6.0)],
                0.0,
            )],
            vec![Load::new("l", "x", vec![BidBlock::new(4.0, 9.0)], 0.0)],
        );
        let hit = intersect(&build_supply_curve(&ob), &build_demand_curve(&ob));
        assert_abs_diff_eq!(hit.volume, 4.0, epsilon = 1e-12);
        let p = hit.price.unwrap();
        assert!((6.0..=9.0).contains(&p));
    }

    #[test]
    fn csv_has_two_rows_per_step() {
        let curve = build_supply_curve(&three_bus_book());
        let csv = curve.to_csv();
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 1 + 2 * curve.steps.len());
        assert_eq!(lines[0], "cumulative_mwh,price_per_mwh");
    }
}
