//! Market participants: classed generators with multi-block offers and
//! loads with multi-block bids plus a uniform green premium.
//!
//! Quantities are MWh over the one-hour clearing window, prices $/MWh.
//! Offer blocks must be priced nondecreasing and bid blocks nonincreasing so
//! that merit-order semantics hold; validation enforces this, the clearing
//! programs themselves do not require it.

use std::collections::BTreeSet;

use crate::grid::Network;
use crate::validate::{ValidationReport, ViolationKind};

/// Energy source classing used for dual pricing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyClass {
    Green,
    Black,
}

impl EnergyClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            EnergyClass::Green => "green",
            EnergyClass::Black => "black",
        }
    }
}

/// Class filter for capacity queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassFilter {
    Green,
    Black,
    All,
}

impl ClassFilter {
    fn matches(&self, class: EnergyClass) -> bool {
        match self {
            ClassFilter::Green => class == EnergyClass::Green,
            ClassFilter::Black => class == EnergyClass::Black,
            ClassFilter::All => true,
        }
    }
}

/// One step of a generator's offer curve.
#[derive(Debug, Clone, PartialEq)]
pub struct OfferBlock {
    pub quantity_min: f64,
    pub quantity_max: f64,
    pub price: f64,
}

impl OfferBlock {
    /// Fully elastic block from zero up to `quantity_max`.
    pub fn new(quantity_max: f64, price: f64) -> Self {
        OfferBlock {
            quantity_min: 0.0,
            quantity_max,
            price,
        }
    }
}

/// One step of a load's bid curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BidBlock {
    pub quantity_min: f64,
    pub quantity_max: f64,
    pub value: f64,
}

impl BidBlock {
    pub fn new(quantity_max: f64, value: f64) -> Self {
        BidBlock {
            quantity_min: 0.0,
            quantity_max,
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    pub energy_class: EnergyClass,
    pub blocks: Vec<OfferBlock>,
    /// kg CO2e per MWh produced.
    pub emission_factor: f64,
}

impl Generator {
    pub fn new(
        id: impl Into<String>,
        bus: impl Into<String>,
        energy_class: EnergyClass,
        blocks: Vec<OfferBlock>,
        emission_factor: f64,
    ) -> Self {
        Generator {
            id: id.into(),
            bus: bus.into(),
            energy_class,
            blocks,
            emission_factor,
        }
    }

    pub fn capacity(&self) -> f64 {
        self.blocks.iter().map(|b| b.quantity_max).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: String,
    pub bus: String,
    pub blocks: Vec<BidBlock>,
    /// Uniform green premium across all blocks, $/MWh, nonnegative.
    pub alpha: f64,
}

impl Load {
    pub fn new(
        id: impl Into<String>,
        bus: impl Into<String>,
        blocks: Vec<BidBlock>,
        alpha: f64,
    ) -> Self {
        Load {
            id: id.into(),
            bus: bus.into(),
            blocks,
            alpha,
        }
    }

    pub fn demand_cap(&self) -> f64 {
        self.blocks.iter().map(|b| b.quantity_max).sum()
    }
}

/// All participants of one clearing window. Immutable after validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OrderBook {
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
}

impl OrderBook {
    pub fn new(generators: Vec<Generator>, loads: Vec<Load>) -> Self {
        OrderBook { generators, loads }
    }

    /// Sum of block caps over generators in the class.
    pub fn total_capacity(&self, filter: ClassFilter) -> f64 {
        self.generators
            .iter()
            .filter(|g| filter.matches(g.energy_class))
            .map(Generator::capacity)
            .sum()
    }

    /// The same book with per-load premiums replaced in load order.
    pub fn with_alphas(&self, alphas: &[f64]) -> OrderBook {
        let mut book = self.clone();
        for (load, &alpha) in book.loads.iter_mut().zip(alphas) {
            load.alpha = alpha;
        }
        book
    }

    /// The same book with every premium set to the given value.
    pub fn with_uniform_alpha(&self, alpha: f64) -> OrderBook {
        let mut book = self.clone();
        for load in &mut book.loads {
            load.alpha = alpha;
        }
        book
    }
}

/// Checks participant invariants and bus references against a network.
pub fn validate_orderbook(ob: &OrderBook, net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut ids = BTreeSet::new();
    for gen in &ob.generators {
        if !ids.insert(gen.id.clone()) {
            report.push(
                ViolationKind::DuplicateParticipantId,
                format!("generator `{}`", gen.id),
            );
        }
        if net.bus_index(&gen.bus).is_none() {
            report.push(
                ViolationKind::DanglingBusReference,
                format!("generator `{}` at unknown bus `{}`", gen.id, gen.bus),
            );
        }
        if gen.emission_factor < 0.0 || !gen.emission_factor.is_finite() {
            report.push(
                ViolationKind::NegativeEmissionFactor,
                format!("generator `{}` factor {}", gen.id, gen.emission_factor),
            );
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, block) in gen.blocks.iter().enumerate() {
            if !block.price.is_finite() {
                report.push(
                    ViolationKind::NonFiniteNumber,
                    format!("generator `{}` block {} price", gen.id, i),
                );
            }
            if block.price < prev {
                report.push(
                    ViolationKind::NonMonotoneOffer,
                    format!(
                        "generator `{}` block {} price {} below previous {}",
                        gen.id, i, block.price, prev
                    ),
                );
            }
            prev = block.price;
            check_block_bounds(&mut report, &gen.id, i, block.quantity_min, block.quantity_max);
        }
    }
    for load in &ob.loads {
        if !ids.insert(load.id.clone()) {
            report.push(
                ViolationKind::DuplicateParticipantId,
                format!("load `{}`", load.id),
            );
        }
        if net.bus_index(&load.bus).is_none() {
            report.push(
                ViolationKind::DanglingBusReference,
                format!("load `{}` at unknown bus `{}`", load.id, load.bus),
            );
        }
        if load.alpha < 0.0 || !load.alpha.is_finite() {
            report.push(
                ViolationKind::NegativeAlpha,
                format!("load `{}` alpha {}", load.id, load.alpha),
            );
        }
        let mut prev = f64::INFINITY;
        for (i, block) in load.blocks.iter().enumerate() {
            if !block.value.is_finite() {
                report.push(
                    ViolationKind::NonFiniteNumber,
                    format!("load `{}` block {} value", load.id, i),
                );
            }
            if block.value > prev {
                report.push(
                    ViolationKind::NonMonotoneBid,
                    format!(
                        "load `{}` block {} value {} above previous {}",
                        load.id, i, block.value, prev
                    ),
                );
            }
            prev = block.value;
            check_block_bounds(&mut report, &load.id, i, block.quantity_min, block.quantity_max);
        }
    }
    report
}

fn check_block_bounds(
    report: &mut ValidationReport,
    id: &str,
    index: usize,
    min: f64,
    max: f64,
) {
    if !(0.0 <= min && min <= max) || !min.is_finite() || !max.is_finite() {
        report.push(
            ViolationKind::BadBlockBounds,
            format!("`{id}` block {index} bounds [{min}, {max}]"),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Bus, Line, Network};

    fn small_net() -> Network {
        Network::new(
            vec![Bus::new("n1"), Bus::new("n2")],
            vec![Line::unlimited("n1", "n2", 5.0)],
            "n1",
        )
    }

    fn small_book() -> OrderBook {
        OrderBook::new(
            vec![
                Generator::new(
                    "g1",
                    "n1",
                    EnergyClass::Green,
                    vec![OfferBlock::new(4.0, 0.0)],
                    12.0,
                ),
                Generator::new(
                    "g2",
                    "n2",
                    EnergyClass::Black,
                    vec![OfferBlock::new(4.0, 10.0)],
                    1000.0,
                ),
            ],
            vec![Load::new("l1", "n2", vec![BidBlock::new(8.0, 4.0)], 0.0)],
        )
    }

    #[test]
    fn well_formed_book_validates() {
        assert!(validate_orderbook(&small_book(), &small_net()).is_valid());
    }

    #[test]
    fn negative_alpha_is_flagged() {
        let mut ob = small_book();
        ob.loads[0].alpha = -1.0;
        let report = validate_orderbook(&ob, &small_net());
        assert!(report.has(ViolationKind::NegativeAlpha));
    }

    #[test]
    fn decreasing_offer_prices_are_flagged() {
        let mut ob = small_book();
        ob.generators[0].blocks = vec![OfferBlock::new(2.0, 5.0), OfferBlock::new(2.0, 3.0)];
        let report = validate_orderbook(&ob, &small_net());
        assert!(report.has(ViolationKind::NonMonotoneOffer));
    }

    #[test]
    fn increasing_bid_values_are_flagged() {
        let mut ob = small_book();
        ob.loads[0].blocks = vec![BidBlock::new(2.0, 3.0), BidBlock::new(2.0, 5.0)];
        let report = validate_orderbook(&ob, &small_net());
        assert!(report.has(ViolationKind::NonMonotoneBid));
    }

    #[test]
    fn dangling_bus_is_flagged() {
        let mut ob = small_book();
        ob.generators[0].bus = "nowhere".into();
        let report = validate_orderbook(&ob, &small_net());
        assert!(report.has(ViolationKind::DanglingBusReference));
    }

    #[test]
    fn capacity_sums_by_class() {
        let ob = small_book();
        assert_eq!(ob.total_capacity(ClassFilter::Green), 4.0);
        assert_eq!(ob.total_capacity(ClassFilter::Black), 4.0);
        assert_eq!(ob.total_capacity(ClassFilter::All), 8.0);
        assert_eq!(OrderBook::default().total_capacity(ClassFilter::All), 0.0);
    }
}
