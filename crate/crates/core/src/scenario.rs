//! Experiment generation and analysis on top of the clearing engine:
//! renewable-share scaling, premium sampling, dispatch deltas, emissions,
//! and sweep reports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::clearing::{self, ClearingError, ClearingSolution, DpdSolution};
use crate::grid::Network;
use crate::orderbook::{ClassFilter, EnergyClass, OrderBook};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot scale {0} capacity up from zero")]
    ScaleFromZero(&'static str),
    #[error("target share {0} must lie strictly between 0 and 1")]
    BadTargetShare(f64),
    #[error("solutions come from different instances")]
    MismatchedInstances,
    #[error(transparent)]
    Clearing(#[from] ClearingError),
}

/// Knobs for scenario construction, mirroring the config file keys.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    /// Desired green share of total capacity for scaling experiments.
    pub target_res_share: f64,
    /// Green premium distribution, $/MWh.
    pub alpha_mean: f64,
    pub alpha_std: f64,
    pub rng_seed: u64,
    /// Homes one MW can supply for an hour.
    pub homes_per_mw: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            target_res_share: 0.5,
            alpha_mean: 5.0,
            alpha_std: 1.0,
            rng_seed: 1,
            homes_per_mw: 800.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.target_res_share) {
            return Err(format!(
                "target_res_share {} outside [0, 1]",
                self.target_res_share
            ));
        }
        if self.alpha_std < 0.0 {
            return Err(format!("alpha_std {} negative", self.alpha_std));
        }
        if !(self.homes_per_mw > 0.0) {
            return Err(format!("homes_per_mw {} not positive", self.homes_per_mw));
        }
        Ok(())
    }
}

/// One row of a sweep: how dual pricing changed the outcome at a RES share.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub res_share: f64,
    /// DPD minus standard dispatch by class, MWh.
    pub delta_green: f64,
    pub delta_black: f64,
    pub lambda_green: f64,
    pub congested_before: usize,
    pub congested_after: usize,
    /// kg CO2e per served MWh; `None` when nothing was served.
    pub avg_emissions_before: Option<f64>,
    pub avg_emissions_after: Option<f64>,
    pub homes_powered: u64,
    pub total_load_payment: f64,
    pub total_gen_revenue: f64,
    pub merchandising_surplus: f64,
}

/// Rescales block quantities class-uniformly so that green capacity divided
/// by total capacity hits `target_share`, preserving total capacity.
/// Locations and prices are untouched.
pub fn scale_res(ob: &OrderBook, target_share: f64) -> Result<OrderBook, ScenarioError> {
    if !(target_share > 0.0 && target_share < 1.0) {
        return Err(ScenarioError::BadTargetShare(target_share));
    }
    let green = ob.total_capacity(ClassFilter::Green);
    let black = ob.total_capacity(ClassFilter::Black);
    let total = green + black;
    if green <= 0.0 {
        return Err(ScenarioError::ScaleFromZero("green"));
    }
    if black <= 0.0 {
        return Err(ScenarioError::ScaleFromZero("black"));
    }
    let green_factor = target_share * total / green;
    let black_factor = (1.0 - target_share) * total / black;
    let mut scaled = ob.clone();
    for gen in &mut scaled.generators {
        let f = match gen.energy_class {
            EnergyClass::Green => green_factor,
            EnergyClass::Black => black_factor,
        };
        for block in &mut gen.blocks {
            block.quantity_min *= f;
            block.quantity_max *= f;
        }
    }
    Ok(scaled)
}

/// Draws one premium per load from Normal(mean, std) truncated at zero by
/// re-drawing, in stable load order, deterministic for a fixed seed.
pub fn sample_alphas(loads_in_order: usize, mean: f64, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if std == 0.0 {
        return vec![mean.max(0.0); loads_in_order];
    }
    let normal = Normal::new(mean, std).expect("std checked nonnegative");
    (0..loads_in_order)
        .map(|_| {
            for _ in 0..10_000 {
                let draw = normal.sample(&mut rng);
                if draw >= 0.0 {
                    return draw;
                }
            }
            // A distribution with essentially no nonnegative mass; fall back
            // to the truncation point.
            0.0
        })
        .collect()
}

/// Per-class dispatch difference, DPD minus standard.
pub fn dispatch_delta(
    standard: &ClearingSolution,
    dpd: &DpdSolution,
) -> Result<(f64, f64), ScenarioError> {
    if standard.generator_ids != dpd.clearing.generator_ids
        || standard.load_ids != dpd.clearing.load_ids
    {
        return Err(ScenarioError::MismatchedInstances);
    }
    Ok((
        dpd.clearing.green_dispatch - standard.green_dispatch,
        dpd.clearing.black_dispatch - standard.black_dispatch,
    ))
}

/// Average emissions of a dispatch: sum of dispatch times factor over served
/// load. `None` when nothing was served.
pub fn emissions_report(sol: &ClearingSolution, ob: &OrderBook) -> Option<f64> {
    if sol.total_load_served <= 0.0 {
        return None;
    }
    let total: f64 = ob
        .generators
        .iter()
        .enumerate()
        .map(|(k, gen)| sol.generator_total(k) * gen.emission_factor)
        .sum();
    Some(total / sol.total_load_served)
}

/// Homes an extra green dispatch can power for the hour.
pub fn homes_powered(delta_green_mwh: f64, homes_per_mw: f64) -> u64 {
    if delta_green_mwh <= 0.0 || homes_per_mw <= 0.0 {
        return 0;
    }
    (delta_green_mwh * homes_per_mw).floor() as u64
}

/// Clears one scenario both ways and assembles its report row.
pub fn evaluate(
    net: &Network,
    ob: &OrderBook,
    config: &ScenarioConfig,
    res_share: f64,
) -> Result<ScenarioReport, ScenarioError> {
    let alphas = sample_alphas(ob.loads.len(), config.alpha_mean, config.alpha_std, config.rng_seed);
    let book = ob.with_alphas(&alphas);
    let standard = clearing::clear_standard(net, &book.with_uniform_alpha(0.0))?;
    let dpd = clearing::clear_dpd(net, &book)?;
    let (delta_green, delta_black) = dispatch_delta(&standard, &dpd)?;
    let settlement = clearing::settle(&dpd, net, &book);
    Ok(ScenarioReport {
        res_share,
        delta_green,
        delta_black,
        lambda_green: dpd.lambda_green,
        congested_before: standard.congested_lines.len(),
        congested_after: dpd.clearing.congested_lines.len(),
        avg_emissions_before: emissions_report(&standard, &book),
        avg_emissions_after: emissions_report(&dpd.clearing, &book),
        homes_powered: homes_powered(delta_green, config.homes_per_mw),
        total_load_payment: settlement.total_payments,
        total_gen_revenue: settlement.total_revenues,
        merchandising_surplus: settlement.merchandising_surplus,
    })
}

/// Scales the book to each share, samples premiums with the configured seed,
/// clears both ways, and reports. Deterministic for a fixed seed.
pub fn res_sweep(
    net: &Network,
    ob: &OrderBook,
    config: &ScenarioConfig,
    shares: &[f64],
) -> Result<Vec<ScenarioReport>, ScenarioError> {
    shares
        .iter()
        .map(|&share| {
            let scaled = scale_res(ob, share)?;
            evaluate(net, &scaled, config, share)
        })
        .collect()
}
