//! Market clearing for DC-power-flow electricity networks.
//!
//! The crate models a transmission grid ([`grid::Network`]) and an order book
//! of classed generators and elastic loads ([`orderbook::OrderBook`]), builds
//! the two market-clearing linear programs (standard surplus maximization and
//! dual-pricing dispatch with green premiums), and extracts dispatch, black
//! and green locational marginal prices, allocations, and settlements from
//! the LP duals.
//!
//! Subsystems:
//! - [`grid`]: immutable network model, DC flow evaluation, deliverability.
//! - [`orderbook`]: multi-block offers/bids, green/black classing, premiums.
//! - [`lpsolve`]: canonical LP representation and a dual-capable simplex.
//! - [`clearing`]: the two clearing programs, LMP extraction, settlement.
//! - [`meritorder`]: copper-plate clearing via step-curve intersection.
//! - [`scenario`]: RES scaling, premium sampling, sweeps, emissions reports.
//! - [`io`]: native and MATPOWER-style case ingestion, CSV result export.

pub mod clearing;
pub mod grid;
pub mod io;
pub mod lpsolve;
pub mod meritorder;
pub mod orderbook;
pub mod scenario;
pub mod validate;
