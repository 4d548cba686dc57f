//! Monte Carlo validation of the analytical bounds.
//!
//! A trial draws a vote distribution uniformly from the simplex, computes
//! its true aggregate ranking, perturbs the distribution with the
//! calibrated Gaussian noise, and checks whether the noised ranking
//! differs. Trials are independent across a counter-seeded stream cipher,
//! so runs are reproducible bit-for-bit at any thread count: trial `t`
//! always consumes streams `2t` (distribution) and `2t + 1` (noise) of the
//! configured master seed.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{max_slice_bound, midpoint_bound, rule_specific_bound, BoundQuery};
use crate::error::{Error, Result};
use crate::privacy::{DeltaSpec, NoiseSeed, PrivacyParams};
use crate::ranking::{aggregate, factorial, PositionalRule};

/// Uniform sample from the standard `(points-1)`-simplex: i.i.d. unit
/// exponentials, normalized. `Exp1` never returns zero, so the sum is
/// strictly positive.
pub fn sample_simplex_uniform(points: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..points).map(|_| rng.sample(Exp1)).collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

/// One experiment: a rule, a privacy setting, a trial count, and the
/// master seed for the trial streams.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub rule: PositionalRule,
    pub params: PrivacyParams,
    pub trials: u64,
    pub seed: u64,
}

/// What one trial produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// The noised ranking differs from the true one.
    pub error: bool,
    /// Either ranking had an exact score tie (broken by candidate index,
    /// and counted so that suspiciously tie-heavy runs are visible).
    pub tied: bool,
}

/// Runs trial `trial` of the configured experiment.
pub fn run_trial(config: &SimulationConfig, trial: u64) -> Result<TrialOutcome> {
    run_trial_noised(&config.rule, config.params.sigma_hat(), config.seed, trial)
}

/// Trial with an explicit normalized noise scale; `sigma_hat = 0` turns
/// the noise off, which is useful for testing the harness itself (the
/// ranking then never changes and the error flag must stay false).
pub fn run_trial_noised(
    rule: &PositionalRule,
    sigma_hat: f64,
    master_seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    if !(sigma_hat >= 0.0) {
        return Err(Error::Domain(format!("sigma_hat must be nonnegative, got {sigma_hat}")));
    }
    let d = factorial(rule.m());
    let mut value_rng = NoiseSeed::new(master_seed).with_stream(2 * trial).rng();
    let weights = sample_simplex_uniform(d, &mut value_rng);
    let truth = aggregate(rule, &weights)?;

    let mut noise_rng = NoiseSeed::new(master_seed).with_stream(2 * trial + 1).rng();
    let noised: Vec<f64> = weights
        .iter()
        .map(|w| w + sigma_hat * noise_rng.sample::<f64, _>(StandardNormal))
        .collect();
    let noisy = aggregate(rule, &noised)?;

    Ok(TrialOutcome {
        error: noisy.order != truth.order,
        tied: truth.tied || noisy.tied,
    })
}

/// An estimated error rate with its 95% Wilson confidence interval.
#[derive(Debug, Clone, Copy)]
pub struct ErrorRateEstimate {
    pub trials: u64,
    pub errors: u64,
    pub ties: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for a binomial proportion at 95% two-sided
/// coverage. Well-behaved at the extremes (0 or `trials` successes),
/// unlike the normal-approximation interval.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Runs all trials (in parallel) and aggregates the outcome counts. The
/// counts are integers combined by addition, so the estimate is identical
/// no matter how rayon splits the range.
pub fn estimate_error_rate(config: &SimulationConfig) -> Result<ErrorRateEstimate> {
    if config.trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let (errors, ties) = (0..config.trials)
        .into_par_iter()
        .map(|t| -> Result<(u64, u64)> {
            let outcome = run_trial(config, t)?;
            Ok((outcome.error as u64, outcome.tied as u64))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let (ci_low, ci_high) = wilson_interval(errors, config.trials);
    Ok(ErrorRateEstimate {
        trials: config.trials,
        errors,
        ties,
        rate: errors as f64 / config.trials as f64,
        ci_low,
        ci_high,
    })
}

/// Which experiment knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Epsilon,
    Voters,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Voters => "voters",
        }
    }
}

/// The varying axis of a sweep together with the fixed complement.
#[derive(Debug, Clone)]
pub enum SweepValues {
    Epsilon { values: Vec<f64>, voters: u64 },
    Voters { values: Vec<u64>, epsilon: f64 },
}

/// A full sweep: one simulated point plus bound evaluations per value.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub rule: PositionalRule,
    pub values: SweepValues,
    pub delta: DeltaSpec,
    pub trials: u64,
    pub seed: u64,
}

/// One row of sweep output.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub estimate: ErrorRateEstimate,
    pub params: PrivacyParams,
    pub bound_max_slice: f64,
    pub bound_midpoint: f64,
    /// `None` when the exact density (and with it the rule-specific bound)
    /// is unavailable, i.e. for `m > 6`.
    pub bound_rule_specific: Option<f64>,
}

/// Runs the sweep. Every row reuses the same master seed, so rows differ
/// only through the noise scale (common random numbers); this sharpens
/// comparisons along the axis.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let points: Vec<(f64, u64)> = match &config.values {
        SweepValues::Epsilon { values, voters } => {
            values.iter().map(|&e| (e, *voters)).collect()
        }
        SweepValues::Voters { values, epsilon } => {
            values.iter().map(|&n| (*epsilon, n)).collect()
        }
    };
    if points.is_empty() {
        return Err(Error::Config("sweep needs at least one axis value".into()));
    }
    let axis = match &config.values {
        SweepValues::Epsilon { .. } => SweepAxis::Epsilon,
        SweepValues::Voters { .. } => SweepAxis::Voters,
    };

    let mut rows = Vec::with_capacity(points.len());
    for (epsilon, voters) in points {
        let params = PrivacyParams::new(epsilon, config.delta.resolve(voters), voters)?;
        let sim = SimulationConfig {
            rule: config.rule.clone(),
            params: params.clone(),
            trials: config.trials,
            seed: config.seed,
        };
        let estimate = estimate_error_rate(&sim)?;
        let query = BoundQuery::new(config.rule.m(), params.clone())?;
        let bound_max_slice = max_slice_bound(&query)?.value;
        let bound_midpoint = midpoint_bound(&query)?.value;
        let bound_rule_specific = if config.rule.m() <= crate::geometry::MAX_EXACT_DENSITY_CANDIDATES
        {
            let rq = BoundQuery::new(config.rule.m(), params.clone())?
                .with_rule(config.rule.clone())?;
            Some(rule_specific_bound(&rq)?.value)
        } else {
            None
        };
        rows.push(SweepRow {
            axis,
            value: match axis {
                SweepAxis::Epsilon => epsilon,
                SweepAxis::Voters => voters as f64,
            },
            estimate,
            params,
            bound_max_slice,
            bound_midpoint,
            bound_rule_specific,
        });
    }
    Ok(rows)
}
