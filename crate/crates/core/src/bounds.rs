//! Analytical upper bounds on the probability that calibrated Gaussian
//! noise changes the aggregate ranking.
//!
//! Every bound has the same shape: a union over the `C(m,2)` candidate
//! pairs of `P(the noised point and the true point disagree about one
//! pair)`, split at a slack radius `tau` into
//!
//! * a geometry term: the chance that a uniformly random vote distribution
//!   lies within `tau` of the tie hyperplane, and
//! * a noise term: `Q(tau / sigma_hat)`, the chance that the projected
//!   Gaussian noise jumps further than `tau`.
//!
//! The variants differ only in how the geometry term is estimated:
//!
//! * [`max_slice_bound`] caps the distance density by its global maximum
//!   `(m! - 1)/sqrt(2)` over all unit directions. Coarse, but it admits a
//!   closed-form optimal `tau` and applies to every positional rule.
//! * [`midpoint_bound`] replaces the cap with the density-at-the-midpoint
//!   shortcut `sqrt(2) (m!-1) Q(tau/(2 sigma_hat)) tau`; see its docs for
//!   the `tau` it is evaluated at.
//! * [`simplified_bound`] is the max-slice bound at the fixed radius
//!   `tau = 2 sqrt(ln N ln(2/delta)) / (eps N)`, giving a closed form with
//!   an explicit `O~(1/N)` decay.
//! * [`rule_specific_bound`] integrates the exact distance density of the
//!   rule at hand, which is far smaller than the worst-case cap.

use crate::error::{Error, Result};
use crate::geometry::{DistanceDensity, DISTANCE_MAX};
use crate::privacy::PrivacyParams;
use crate::ranking::{factorial, PositionalRule, MIN_CANDIDATES};

/// Gaussian upper tail `Q(x) = P(Z > x)` for standard normal `Z`,
/// accurate to well under 1e-12 in relative terms across `[-8, 8]`
/// (libm's erfc is the fdlibm implementation, correct to about 1 ulp).
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Which bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMethod {
    MaxSlice,
    Midpoint,
    Simplified,
    RuleSpecific,
}

impl BoundMethod {
    /// Stable identifier used in CSV output and CLI flags.
    pub fn label(&self) -> &'static str {
        match self {
            BoundMethod::MaxSlice => "max-slice",
            BoundMethod::Midpoint => "midpoint",
            BoundMethod::Simplified => "simplified",
            BoundMethod::RuleSpecific => "rule-specific",
        }
    }
}

/// A bound request: candidate count, privacy setting, and optionally a
/// fixed slack radius and a concrete rule.
#[derive(Debug, Clone)]
pub struct BoundQuery {
    m: usize,
    params: PrivacyParams,
    tau: Option<f64>,
    rule: Option<PositionalRule>,
}

impl BoundQuery {
    pub fn new(m: usize, params: PrivacyParams) -> Result<Self> {
        if m < MIN_CANDIDATES {
            return Err(Error::Domain(format!("need at least {MIN_CANDIDATES} candidates, got {m}")));
        }
        Ok(Self { m, params, tau: None, rule: None })
    }

    /// Fixes the slack radius instead of optimizing it. Must lie in
    /// `(0, sqrt(2)]`, the range of distances possible on the simplex.
    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 || tau > DISTANCE_MAX {
            return Err(Error::Domain(format!(
                "tau must lie in (0, {DISTANCE_MAX}], got {tau}"
            )));
        }
        self.tau = Some(tau);
        Ok(self)
    }

    /// Attaches the positional rule (required by [`rule_specific_bound`]).
    pub fn with_rule(mut self, rule: PositionalRule) -> Result<Self> {
        if rule.m() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: rule.m() });
        }
        self.rule = Some(rule);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn params(&self) -> &PrivacyParams {
        &self.params
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    pub fn rule(&self) -> Option<&PositionalRule> {
        self.rule.as_ref()
    }
}

/// An evaluated bound. `raw` is the bare expression; `value` clamps it to 1
/// (it is a probability bound). `tau` records the radius actually used.
#[derive(Debug, Clone, Copy)]
pub struct BoundResult {
    pub method: BoundMethod,
    pub value: f64,
    pub raw: f64,
    pub tau: f64,
}

impl BoundResult {
    fn new(method: BoundMethod, raw: f64, tau: f64) -> Self {
        Self { method, value: raw.min(1.0), raw, tau }
    }
}

fn pairs(m: usize) -> f64 {
    (m * (m - 1) / 2) as f64
}

/// `m! - 1` as f64; switches to a log-gamma evaluation once the exact
/// integer no longer fits.
fn factorial_minus_one(m: usize) -> f64 {
    if m <= 20 {
        (factorial(m) - 1) as f64
    } else {
        libm::lgamma(m as f64 + 1.0).exp()
    }
}

/// Coefficient of `tau` in the max-slice bound: `C(m,2) (m!-1)/sqrt(2)`,
/// the pair count times the global cap on any distance density.
fn max_slice_coefficient(m: usize) -> f64 {
    pairs(m) * factorial_minus_one(m) / std::f64::consts::SQRT_2
}

fn max_slice_value(m: usize, sigma_hat: f64, tau: f64) -> f64 {
    max_slice_coefficient(m) * tau + q_function(tau / sigma_hat)
}

/// The stationary radius of the max-slice bound in closed form:
/// `tau* = sigma_hat sqrt(-2 ln a)` with `a = sqrt(2 pi) B sigma_hat` and
/// `B` the linear coefficient, valid whenever `a < 1`. Otherwise the
/// expression is minimized at the boundary and [`Error::NoInteriorMinimum`]
/// is returned ([`max_slice_bound`] then falls back to a line search).
pub fn optimal_tau(m: usize, params: &PrivacyParams) -> Result<f64> {
    if m < MIN_CANDIDATES {
        return Err(Error::Domain(format!("need at least {MIN_CANDIDATES} candidates, got {m}")));
    }
    let sigma_hat = params.sigma_hat();
    let a = (2.0 * std::f64::consts::PI).sqrt() * max_slice_coefficient(m) * sigma_hat;
    if !(a < 1.0) {
        return Err(Error::NoInteriorMinimum);
    }
    Ok(sigma_hat * (-2.0 * a.ln()).sqrt())
}

/// Golden-section minimizer on `(lo, hi]`; assumes a unimodal objective.
/// Returns the abscissa and value of the best point found.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const TAU_SEARCH_LO: f64 = 1e-9;
const TAU_SEARCH_TOL: f64 = 1e-8;

/// The radius the unconstrained bounds are evaluated at: the closed-form
/// stationary point when it exists, otherwise a golden-section minimizer of
/// the max-slice objective over `(1e-9, sqrt(2)]`.
fn default_tau(m: usize, params: &PrivacyParams) -> f64 {
    match optimal_tau(m, params) {
        Ok(tau) => tau,
        Err(_) => {
            let sigma_hat = params.sigma_hat();
            golden_min(
                |t| max_slice_value(m, sigma_hat, t),
                TAU_SEARCH_LO,
                DISTANCE_MAX,
                TAU_SEARCH_TOL,
            )
            .0
        }
    }
}

/// Union bound with the worst-case density cap:
/// `C(m,2) (m!-1)/sqrt(2) tau + Q(tau/sigma_hat)`, minimized over `tau`
/// unless the query pins one.
pub fn max_slice_bound(query: &BoundQuery) -> Result<BoundResult> {
    let sigma_hat = query.params.sigma_hat();
    let tau = query.tau.unwrap_or_else(|| default_tau(query.m, &query.params));
    let raw = max_slice_value(query.m, sigma_hat, tau);
    Ok(BoundResult::new(BoundMethod::MaxSlice, raw, tau))
}

fn midpoint_value(m: usize, sigma_hat: f64, tau: f64) -> f64 {
    pairs(m) * std::f64::consts::SQRT_2 * factorial_minus_one(m) * q_function(tau / (2.0 * sigma_hat)) * tau
        + q_function(tau / sigma_hat)
}

/// Variant of the max-slice bound that keeps the noise tail inside the
/// geometry term, evaluating it at the slab midpoint:
/// `C(m,2) sqrt(2) (m!-1) Q(tau/(2 sigma_hat)) tau + Q(tau/sigma_hat)`.
///
/// The midpoint shortcut under-estimates the convex tail integral it
/// stands in for, so the expression is only trustworthy at moderate radii;
/// minimizing it freely over `tau` would drive it to zero. When the query
/// does not pin `tau`, the bound is therefore evaluated at the max-slice
/// optimal radius, where the shortcut tightens the max-slice bound rather
/// than undercutting the true error rate.
pub fn midpoint_bound(query: &BoundQuery) -> Result<BoundResult> {
    let sigma_hat = query.params.sigma_hat();
    let tau = query.tau.unwrap_or_else(|| default_tau(query.m, &query.params));
    let raw = midpoint_value(query.m, sigma_hat, tau);
    Ok(BoundResult::new(BoundMethod::Midpoint, raw, tau))
}

/// Closed-form max-slice bound at `tau = 2 sqrt(ln N ln(2/delta))/(eps N)`:
///
/// `(1/N) [ C(m,2)(m!-1) sqrt(2 ln N ln(2/delta)) / eps + 1/(2 sqrt(pi ln N)) ]`
///
/// Needs `N >= 2` (so `ln N > 0`) and rejects queries that pin `tau`,
/// since the radius is part of the formula.
pub fn simplified_bound(query: &BoundQuery) -> Result<BoundResult> {
    if query.tau.is_some() {
        return Err(Error::Domain(
            "the simplified bound fixes its own tau; drop the tau override".into(),
        ));
    }
    let n = query.params.voters() as f64;
    if query.params.voters() < 2 {
        return Err(Error::Domain("the simplified bound needs at least 2 voters".into()));
    }
    let eps = query.params.epsilon();
    let log_privacy = (2.0 / query.params.delta()).ln();
    let tau = 2.0 * (n.ln() * log_privacy).sqrt() / (eps * n);
    let raw = (pairs(query.m) * factorial_minus_one(query.m) * (2.0 * n.ln() * log_privacy).sqrt()
        / eps
        + 0.5 / (std::f64::consts::PI * n.ln()).sqrt())
        / n;
    Ok(BoundResult::new(BoundMethod::Simplified, raw, tau))
}

/// Simpson quadrature of `f` over `[a, b]` with `n` (even) intervals.
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Union bound with the exact distance density of the queried rule:
/// `C(m,2) . 2 int_0^tau p_D(l) Q(l/sigma_hat) dl + Q(tau/sigma_hat)`,
/// minimized over `tau` unless the query pins one. Requires a rule and the
/// exact density path (`m <= 6`).
pub fn rule_specific_bound(query: &BoundQuery) -> Result<BoundResult> {
    let rule = query
        .rule
        .as_ref()
        .ok_or_else(|| Error::Domain("the rule-specific bound needs a positional rule".into()))?;
    let density = DistanceDensity::exact(rule)?;
    let sigma_hat = query.params.sigma_hat();
    let np = pairs(query.m);

    // The integrand decays like the Gaussian tail beyond a few sigma_hat,
    // so split the quadrature there: the inner piece resolves the decay,
    // the outer piece resolves the density. 512 intervals each keeps the
    // Simpson error far below the values compared in tests.
    let value = |tau: f64| {
        let split = (12.0 * sigma_hat).min(tau);
        let integrand = |l: f64| density.value_at(l) * q_function(l / sigma_hat);
        let mut integral = simpson(&integrand, 0.0, split, 512);
        if split < tau {
            integral += simpson(&integrand, split, tau, 512);
        }
        np * 2.0 * integral + q_function(tau / sigma_hat)
    };

    let tau = match query.tau {
        Some(t) => t,
        None => golden_min(value, TAU_SEARCH_LO, DISTANCE_MAX, TAU_SEARCH_TOL).0,
    };
    Ok(BoundResult::new(BoundMethod::RuleSpecific, value(tau), tau))
}

/// Evaluates one bound through a uniform entry point.
pub fn evaluate(method: BoundMethod, query: &BoundQuery) -> Result<BoundResult> {
    match method {
        BoundMethod::MaxSlice => max_slice_bound(query),
        BoundMethod::Midpoint => midpoint_bound(query),
        BoundMethod::Simplified => simplified_bound(query),
        BoundMethod::RuleSpecific => rule_specific_bound(query),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(epsilon: f64, delta: f64, voters: u64) -> PrivacyParams {
        PrivacyParams::new(epsilon, delta, voters).unwrap()
    }

    fn reference_params() -> PrivacyParams {
        params(0.1, 5e-4, 2000)
    }

    #[test]
    fn q_matches_high_precision_references() {
        // 40-digit erfc evaluations
        let cases = [
            (0.0, 0.5),
            (0.5, 0.3085375387259868963623),
            (1.0, 0.1586552539314570514148),
            (2.0, 0.02275013194817920720028),
            (3.0, 0.001349898031630094526652),
            (4.0, 3.167124183311992125377e-5),
            (5.0, 2.866515718791939116738e-7),
            (6.0, 9.865876450376981407471e-10),
            (8.0, 6.220960574271784860433e-16),
            (-1.0, 0.8413447460685429485852),
            (-3.0, 0.9986501019683699054733),
            (0.1, 0.4601721627229710185346),
        ];
        for (x, want) in cases {
            assert_relative_eq!(q_function(x), want, max_relative = 1e-12);
        }
        // symmetry and the Chernoff cap
        for x in [0.3, 1.7, 4.2] {
            assert_relative_eq!(q_function(x) + q_function(-x), 1.0, epsilon = 1e-15);
            assert!(q_function(x) <= (-0.5 * x * x).exp() / 2.0 + 1e-300);
        }
    }

    #[test]
    fn closed_form_tau_matches_reference_and_is_stationary() {
        let p = reference_params();
        let tau = optimal_tau(3, &p).unwrap();
        assert_relative_eq!(tau, 0.022558573998594441, max_relative = 1e-12);

        // central difference of the objective at tau* vanishes
        let sigma_hat = p.sigma_hat();
        let h = 1e-6;
        let f = |t: f64| max_slice_value(3, sigma_hat, t);
        let derivative = (f(tau + h) - f(tau - h)) / (2.0 * h);
        assert!(derivative.abs() < 1e-6, "derivative {derivative}");
    }

    #[test]
    fn closed_form_tau_agrees_with_grid_search() {
        let p = params(0.15, 1e-3, 50_000);
        let tau = optimal_tau(3, &p).unwrap();
        let sigma_hat = p.sigma_hat();
        let hi = (10.0 * sigma_hat).min(DISTANCE_MAX);
        let n = 10_000;
        let best = (1..=n)
            .map(|k| k as f64 * hi / n as f64)
            .min_by(|&a, &b| {
                max_slice_value(3, sigma_hat, a).total_cmp(&max_slice_value(3, sigma_hat, b))
            })
            .unwrap();
        assert_relative_eq!(tau, best, max_relative = 1e-3);
    }

    #[test]
    fn max_slice_bound_matches_reference_minimum() {
        let q = BoundQuery::new(3, reference_params()).unwrap();
        let b = max_slice_bound(&q).unwrap();
        assert_relative_eq!(b.value, 0.37325384598509056, max_relative = 1e-12);
        assert_relative_eq!(b.tau, 0.022558573998594441, max_relative = 1e-12);
        assert_eq!(b.method, BoundMethod::MaxSlice);
    }

    #[test]
    fn saturated_noise_reports_no_interior_minimum_and_falls_back() {
        // eps * N = 5: the noise dwarfs the simplex and the objective is
        // increasing on the whole interval
        let p = params(0.05, 5e-4, 100);
        assert!(matches!(optimal_tau(3, &p), Err(Error::NoInteriorMinimum)));
        let b = max_slice_bound(&BoundQuery::new(3, p).unwrap()).unwrap();
        assert!((b.value - 0.5).abs() < 1e-4, "fallback value {}", b.value);
        assert!(b.tau < 1e-6);
    }

    #[test]
    fn tiny_tau_reduces_to_the_noise_term() {
        let q = BoundQuery::new(3, reference_params()).unwrap().with_tau(1e-12).unwrap();
        let b = max_slice_bound(&q).unwrap();
        assert_relative_eq!(b.value, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn bounds_shrink_with_more_privacy_budget_and_more_voters() {
        let base = max_slice_bound(&BoundQuery::new(3, params(0.1, 5e-4, 2000)).unwrap())
            .unwrap()
            .value;
        let more_eps = max_slice_bound(&BoundQuery::new(3, params(0.2, 5e-4, 2000)).unwrap())
            .unwrap()
            .value;
        let more_voters = max_slice_bound(&BoundQuery::new(3, params(0.1, 5e-4, 20_000)).unwrap())
            .unwrap()
            .value;
        assert!(more_eps < base);
        assert!(more_voters < base);
    }

    #[test]
    fn midpoint_refines_max_slice_at_any_shared_tau() {
        let p = reference_params();
        let sigma_hat = p.sigma_hat();
        for k in 1..=50 {
            let tau = k as f64 * DISTANCE_MAX / 50.0;
            let mid = midpoint_value(3, sigma_hat, tau);
            let cap = max_slice_value(3, sigma_hat, tau);
            assert!(
                mid <= cap + 1e-12,
                "tau={tau}: midpoint {mid} above max-slice {cap}"
            );
        }
    }

    #[test]
    fn midpoint_bound_matches_references_and_decays_with_voters() {
        let cases = [
            (10_000_u64, 0.044066979255252305),
            (100_000, 0.0030348705976361703),
            (1_000_000, 0.00021294468261198844),
        ];
        let mut last = f64::INFINITY;
        for (voters, want) in cases {
            let q = BoundQuery::new(3, params(0.1, 5e-4, voters)).unwrap();
            let b = midpoint_bound(&q).unwrap();
            assert_relative_eq!(b.value, want, max_relative = 1e-10);
            assert!(b.value < last);
            last = b.value;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn simplified_bound_matches_reference_and_dominates_max_slice_at_its_tau() {
        let q = BoundQuery::new(3, reference_params()).unwrap();
        let simplified = simplified_bound(&q).unwrap();
        assert_relative_eq!(simplified.value, 0.84220640184361970, max_relative = 1e-12);

        // the simplified form replaces Q by its Chernoff cap, so the exact
        // max-slice expression at the same radius sits below it
        let pinned = BoundQuery::new(3, reference_params())
            .unwrap()
            .with_tau(simplified.tau)
            .unwrap();
        let exact = max_slice_bound(&pinned).unwrap();
        assert!(exact.raw <= simplified.raw);
    }

    #[test]
    fn simplified_bound_rejects_bad_queries() {
        let q = BoundQuery::new(3, params(0.1, 5e-4, 1)).unwrap();
        assert!(matches!(simplified_bound(&q), Err(Error::Domain(_))));
        let q = BoundQuery::new(3, reference_params()).unwrap().with_tau(0.1).unwrap();
        assert!(matches!(simplified_bound(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn rule_specific_bound_needs_a_rule() {
        let q = BoundQuery::new(3, reference_params()).unwrap();
        assert!(matches!(rule_specific_bound(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn rule_specific_bound_matches_reference_union_value() {
        // at these settings the objective decreases all the way to sqrt(2),
        // where it equals the pair-union integral 2 C(3,2) E[Q(|D|/sigma_hat)]
        let rule = PositionalRule::borda(3).unwrap();
        let q = BoundQuery::new(3, reference_params()).unwrap().with_rule(rule).unwrap();
        let b = rule_specific_bound(&q).unwrap();
        assert_relative_eq!(b.value, 0.116797147328, max_relative = 1e-4);
        assert!((b.tau - DISTANCE_MAX).abs() < 1e-3);
    }

    #[test]
    fn rule_specific_stays_below_max_slice_at_any_shared_tau() {
        let rule = PositionalRule::borda(3).unwrap();
        let p = reference_params();
        for k in 1..=20 {
            let tau = k as f64 * DISTANCE_MAX / 20.0;
            let q = BoundQuery::new(3, p.clone())
                .unwrap()
                .with_tau(tau)
                .unwrap()
                .with_rule(rule.clone())
                .unwrap();
            let rs = rule_specific_bound(&q).unwrap();
            let cap = max_slice_bound(&q).unwrap();
            assert!(
                rs.raw <= cap.raw + 1e-12,
                "tau={tau}: rule-specific {} above max-slice {}",
                rs.raw,
                cap.raw
            );
        }
    }

    #[test]
    fn rule_specific_bound_vanishes_for_many_voters() {
        let rule = PositionalRule::borda(3).unwrap();
        let q = BoundQuery::new(3, params(0.1, 5e-4, 100_000_000))
            .unwrap()
            .with_rule(rule)
            .unwrap();
        let b = rule_specific_bound(&q).unwrap();
        assert!(b.value < 1e-4, "got {}", b.value);
    }

    #[test]
    fn query_validation_rejects_out_of_range_inputs() {
        assert!(BoundQuery::new(2, reference_params()).is_err());
        let q = BoundQuery::new(3, reference_params()).unwrap();
        assert!(q.clone().with_tau(0.0).is_err());
        assert!(q.clone().with_tau(DISTANCE_MAX + 1e-9).is_err());
        assert!(q.clone().with_tau(f64::NAN).is_err());
        let rule4 = PositionalRule::borda(4).unwrap();
        assert!(matches!(
            q.with_rule(rule4),
            Err(Error::DimensionMismatch { expected: 3, got: 4 })
        ));
    }

    #[test]
    fn evaluate_dispatches_by_method() {
        let rule = PositionalRule::borda(3).unwrap();
        let q = BoundQuery::new(3, reference_params()).unwrap().with_rule(rule).unwrap();
        for method in [
            BoundMethod::MaxSlice,
            BoundMethod::Midpoint,
            BoundMethod::Simplified,
            BoundMethod::RuleSpecific,
        ] {
            let b = evaluate(method, &q).unwrap();
            assert_eq!(b.method, method);
            assert!(b.value > 0.0 && b.value <= 1.0);
        }
    }
}
