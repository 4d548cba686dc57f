//! Geometry of the ranking simplex.
//!
//! A vote distribution is a point on the `(m! - 1)`-simplex. Two candidates
//! swap places in the aggregate exactly when the point crosses the
//! hyperplane where their score totals agree, so the error behavior of a
//! noised election is controlled by how the simplex mass sits around those
//! hyperplanes. This module builds the hyperplanes, measures signed
//! distances, and evaluates the density `p_D` of the signed distance of a
//! uniformly random distribution - equivalently, normalized cross-section
//! volumes of the simplex.
//!
//! `p_D` is computed exactly: the signed distance `beta . W` of a uniform
//! simplex point `W` has the B-spline with knots `beta_1..beta_d` as its
//! density (a confluent divided difference of truncated powers), which the
//! Cox-de Boor recurrence evaluates stably at any knot multiplicity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ranking::{factorial, for_each_permutation, PositionalRule, VoteDistribution};

/// Signed distances on the simplex can never exceed its diameter sqrt(2);
/// density grids and tau searches use this as their right endpoint.
pub const DISTANCE_MAX: f64 = std::f64::consts::SQRT_2;

/// Number of points in the uniform density grid on `[0, DISTANCE_MAX]`:
/// 512 intervals, so composite Simpson applies directly.
pub const DENSITY_GRID_LEN: usize = 513;

/// Candidate counts with an exact density path: `m! <= 720` coordinates.
pub const MAX_EXACT_DENSITY_CANDIDATES: usize = 6;

/// The locus where candidates `i` and `j` tie under a positional rule,
/// stored as a unit normal in permutation space. The hyperplane passes
/// through the origin and the simplex centroid (its coefficients sum to 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vec<f64>,
    pair: (usize, usize),
    m: usize,
}

impl Hyperplane {
    /// Unit normal, indexed by lexicographic permutation rank. Positive
    /// components favor candidate `pair.0`.
    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn pair(&self) -> (usize, usize) {
        self.pair
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

/// Builds the tie hyperplane for candidates `i` and `j`: the normalized
/// difference of their score-matrix rows.
pub fn hyperplane(rule: &PositionalRule, i: usize, j: usize) -> Result<Hyperplane> {
    let m = rule.m();
    if i == j || i >= m || j >= m {
        return Err(Error::InvalidPair(i, j));
    }
    if m > crate::ranking::MAX_CANDIDATES {
        return Err(Error::Unsupported(format!(
            "hyperplanes need m <= {}, got {m}",
            crate::ranking::MAX_CANDIDATES
        )));
    }
    let mut coeffs = vec![0.0; factorial(m)];
    for_each_permutation(m, |k, order| {
        let pos_i = order.iter().position(|&c| c == i).unwrap();
        let pos_j = order.iter().position(|&c| c == j).unwrap();
        coeffs[k] = rule.scores()[pos_i] - rule.scores()[pos_j];
    });
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    // norm > 0 because some ballot puts i first and j last
    coeffs.iter_mut().for_each(|c| *c /= norm);
    Ok(Hyperplane { normal: coeffs, pair: (i, j), m })
}

/// Signed distance from a distribution to the hyperplane; positive means
/// `pair.0` currently beats `pair.1`.
pub fn signed_distance(v: &VoteDistribution, h: &Hyperplane) -> Result<f64> {
    if v.m() != h.m {
        return Err(Error::DimensionMismatch { expected: h.m, got: v.m() });
    }
    Ok(h.normal.iter().zip(v.weights()).map(|(n, w)| n * w).sum())
}

/// Volume of the standard `(points-1)`-simplex embedded in `R^points`:
/// `sqrt(points) / (points-1)!`. Evaluated in log space; for `points = 720`
/// the true value is below f64's subnormal range and 0 is returned.
pub fn simplex_volume(points: usize) -> f64 {
    (0.5 * (points as f64).ln() - libm::lgamma(points as f64)).exp()
}

/// Normalized B-spline with the full `knots` vector (degree `d - 2`),
/// scaled to integrate to 1: the density of `knots . W` for `W` uniform on
/// the simplex. Zero outside `[knots[0], knots[d-1])`.
fn bspline_density(knots: &[f64], x: f64) -> f64 {
    let d = knots.len();
    let (lo, hi) = (knots[0], knots[d - 1]);
    if !(lo..hi).contains(&x) {
        return 0.0;
    }
    let mut n: Vec<f64> = (0..d - 1)
        .map(|j| if (knots[j]..knots[j + 1]).contains(&x) { 1.0 } else { 0.0 })
        .collect();
    for k in 1..=d - 2 {
        for j in 0..d - 1 - k {
            let den_l = knots[j + k] - knots[j];
            let den_r = knots[j + k + 1] - knots[j + 1];
            let left = if den_l > 0.0 { (x - knots[j]) / den_l * n[j] } else { 0.0 };
            let right = if den_r > 0.0 {
                (knots[j + k + 1] - x) / den_r * n[j + 1]
            } else {
                0.0
            };
            n[j] = left + right;
        }
    }
    (d as f64 - 1.0) / (hi - lo) * n[0]
}

fn sorted_knots(h: &Hyperplane) -> Vec<f64> {
    let mut knots = h.normal.clone();
    knots.sort_by(f64::total_cmp);
    knots
}

/// The `(m! - 2)`-volume of the simplex slice at signed distance `offset`
/// from the hyperplane: density times total simplex volume. Exact for
/// `m <= 6`; note that for `m = 6` the absolute volume scale `sqrt(720)/719!`
/// underflows f64, so prefer [`DistanceDensity`] (the normalized form)
/// whenever only ratios matter.
pub fn cross_section_volume(h: &Hyperplane, offset: f64) -> Result<f64> {
    if h.m > MAX_EXACT_DENSITY_CANDIDATES {
        return Err(Error::Unsupported(format!(
            "exact cross sections need m <= {MAX_EXACT_DENSITY_CANDIDATES}, got {}",
            h.m
        )));
    }
    Ok(bspline_density(&sorted_knots(h), offset) * simplex_volume(factorial(h.m)))
}

/// How the density was obtained.
#[derive(Debug, Clone)]
enum DensitySource {
    /// Exact B-spline with these sorted knots.
    Exact { knots: Vec<f64> },
    /// Monte Carlo slab estimates with per-point standard errors.
    MonteCarlo { std_errors: Vec<f64>, samples: u64 },
}

/// The distance density `p_D` for one rule, tabulated on the uniform grid
/// over `[0, DISTANCE_MAX]`. `p_D` is even in the offset and identical for
/// every candidate pair of a given rule (relabeling symmetry), so a single
/// table serves all pairs.
#[derive(Debug, Clone)]
pub struct DistanceDensity {
    m: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
    source: DensitySource,
}

fn density_grid() -> Vec<f64> {
    let h = DISTANCE_MAX / (DENSITY_GRID_LEN - 1) as f64;
    (0..DENSITY_GRID_LEN).map(|k| k as f64 * h).collect()
}

impl DistanceDensity {
    /// Exact density via the B-spline form. Supports `m <= 6`; beyond that
    /// use [`DistanceDensity::monte_carlo`].
    pub fn exact(rule: &PositionalRule) -> Result<Self> {
        if rule.m() > MAX_EXACT_DENSITY_CANDIDATES {
            return Err(Error::Unsupported(format!(
                "exact density needs m <= {MAX_EXACT_DENSITY_CANDIDATES}, got {}; \
                 the Monte Carlo estimator covers larger m",
                rule.m()
            )));
        }
        let knots = sorted_knots(&hyperplane(rule, 0, 1)?);
        let grid = density_grid();
        let values = grid.iter().map(|&l| bspline_density(&knots, l)).collect();
        Ok(Self { m: rule.m(), grid, values, source: DensitySource::Exact { knots } })
    }

    /// Slab-count estimate of the density: uniform simplex samples are
    /// binned by signed distance, one bin per grid point. Works for any
    /// supported `m`; standard errors are reported per point.
    pub fn monte_carlo(rule: &PositionalRule, samples: u64, seed: u64) -> Result<Self> {
        let m = rule.m();
        let plane = hyperplane(rule, 0, 1)?;
        let d = factorial(m);
        let grid = density_grid();
        let width = DISTANCE_MAX / (DENSITY_GRID_LEN - 1) as f64;
        if samples == 0 {
            return Err(Error::Domain("need at least one sample".into()));
        }

        const CHUNK: u64 = 1 << 14;
        let chunks = samples.div_ceil(CHUNK);
        let counts = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk);
                let todo = CHUNK.min(samples - chunk * CHUNK);
                let mut bins = vec![0u64; DENSITY_GRID_LEN];
                let mut point = vec![0.0f64; d];
                for _ in 0..todo {
                    let mut sum = 0.0;
                    for w in point.iter_mut() {
                        *w = rng.sample(Exp1);
                        sum += *w;
                    }
                    let s: f64 = plane
                        .normal
                        .iter()
                        .zip(&point)
                        .map(|(n, w)| n * w)
                        .sum::<f64>()
                        / sum;
                    let idx = (s / width + 0.5).floor();
                    if (0.0..DENSITY_GRID_LEN as f64).contains(&idx) {
                        bins[idx as usize] += 1;
                    }
                }
                bins
            })
            .reduce(
                || vec![0u64; DENSITY_GRID_LEN],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            );

        let n = samples as f64;
        let mut values = Vec::with_capacity(DENSITY_GRID_LEN);
        let mut std_errors = Vec::with_capacity(DENSITY_GRID_LEN);
        for &c in &counts {
            let p = c as f64 / n;
            values.push(p / width);
            std_errors.push((p * (1.0 - p) / n).sqrt() / width);
        }
        Ok(Self { m, grid, values, source: DensitySource::MonteCarlo { std_errors, samples } })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Grid abscissae on `[0, DISTANCE_MAX]`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// `p_D` at each grid point.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Per-point standard errors (Monte Carlo source only).
    pub fn std_errors(&self) -> Option<&[f64]> {
        match &self.source {
            DensitySource::MonteCarlo { std_errors, .. } => Some(std_errors),
            DensitySource::Exact { .. } => None,
        }
    }

    /// Sample count behind a Monte Carlo estimate.
    pub fn samples(&self) -> Option<u64> {
        match &self.source {
            DensitySource::MonteCarlo { samples, .. } => Some(*samples),
            DensitySource::Exact { .. } => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.source, DensitySource::Exact { .. })
    }

    /// `p_D(l)` at an arbitrary offset. Exact sources evaluate the spline
    /// (any sign, any offset); Monte Carlo sources interpolate the grid
    /// through `|l|`, using the evenness of the density.
    pub fn value_at(&self, l: f64) -> f64 {
        match &self.source {
            DensitySource::Exact { knots } => bspline_density(knots, l),
            DensitySource::MonteCarlo { .. } => {
                let a = l.abs();
                if a >= DISTANCE_MAX {
                    return 0.0;
                }
                let step = DISTANCE_MAX / (DENSITY_GRID_LEN - 1) as f64;
                let t = a / step;
                let j = (t.floor() as usize).min(DENSITY_GRID_LEN - 2);
                let frac = t - j as f64;
                self.values[j] * (1.0 - frac) + self.values[j + 1] * frac
            }
        }
    }

    /// Composite-Simpson integral of the tabulated half-density over
    /// `[0, DISTANCE_MAX]`; 1/2 up to quadrature error for exact sources.
    pub fn integral(&self) -> f64 {
        let h = DISTANCE_MAX / (DENSITY_GRID_LEN - 1) as f64;
        let mut acc = self.values[0] + self.values[DENSITY_GRID_LEN - 1];
        for (k, v) in self.values.iter().enumerate().skip(1).take(DENSITY_GRID_LEN - 2) {
            acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        acc * h / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranking::{Histogram, Permutation};
    use approx::assert_relative_eq;

    fn borda3() -> PositionalRule {
        PositionalRule::borda(3).unwrap()
    }

    #[test]
    fn bspline_matches_hand_computed_low_dimensional_cases() {
        // three knots give the hat function: peak 2/(t2-t0) at the middle knot
        assert_relative_eq!(bspline_density(&[-1.0, 0.0, 1.0], 0.0), 1.0);
        assert_relative_eq!(bspline_density(&[-1.0, 0.0, 1.0], 0.5), 0.5);
        // doubled left knot: density of W3 ~ Beta(1,2), i.e. 2(1-x)
        assert_relative_eq!(bspline_density(&[0.0, 0.0, 1.0], 0.25), 1.5);
        // outside the support
        assert_eq!(bspline_density(&[-1.0, 0.0, 1.0], 1.1), 0.0);
        assert_eq!(bspline_density(&[-1.0, 0.0, 1.0], -1.0001), 0.0);
    }

    #[test]
    fn hyperplane_normals_are_unit_and_centered() {
        for rule in [borda3(), PositionalRule::plurality(3).unwrap()] {
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let h = hyperplane(&rule, i, j).unwrap();
                let norm: f64 = h.normal().iter().map(|c| c * c).sum();
                assert_relative_eq!(norm, 1.0, max_relative = 1e-14);
                let sum: f64 = h.normal().iter().sum();
                assert!(sum.abs() < 1e-14, "coefficients sum to {sum}");
            }
        }
        assert!(hyperplane(&borda3(), 1, 1).is_err());
        assert!(hyperplane(&borda3(), 0, 3).is_err());
    }

    #[test]
    fn point_mass_distance_is_normalized_score_gap() {
        // all mass on ballot (0,1,2): distance to the 0-1 tie plane is the
        // normal's first coefficient, 0.5/sqrt(3) = 1/sqrt(12)
        let h = Histogram::from_ballots(&[Permutation::new(vec![0, 1, 2]).unwrap()]).unwrap();
        let v = h.normalize().unwrap();
        let plane = hyperplane(&borda3(), 0, 1).unwrap();
        let d = signed_distance(&v, &plane).unwrap();
        assert_relative_eq!(d, 1.0 / 12.0_f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn swapping_the_pair_negates_distances() {
        let v = Histogram::from_counts(3, vec![5.0, 1.0, 2.0, 0.0, 3.0, 1.0])
            .unwrap()
            .normalize()
            .unwrap();
        // relabel candidates 0 <-> 1 in every ballot
        let mut swapped = vec![0.0; 6];
        for_each_permutation(3, |k, order| {
            let relabeled: Vec<usize> =
                order.iter().map(|&c| [1usize, 0, 2][c]).collect();
            swapped[Permutation::new(relabeled).unwrap().index()] = v.weights()[k];
        });
        let sv = VoteDistribution::from_weights(3, swapped).unwrap();
        let plane = hyperplane(&borda3(), 0, 1).unwrap();
        let d = signed_distance(&v, &plane).unwrap();
        let ds = signed_distance(&sv, &plane).unwrap();
        assert_relative_eq!(d, -ds, max_relative = 1e-12);
    }

    #[test]
    fn exact_density_matches_high_precision_references() {
        // 60-digit divided-difference oracle values for Borda-3
        let dens = DistanceDensity::exact(&borda3()).unwrap();
        let cases = [
            (0.0, 2.405626121623440685455),
            (0.05, 2.319889606648781259425),
            (0.1, 2.073072366570216245098),
            (0.2, 1.241687978937155144204),
            (1.0 / 12.0_f64.sqrt(), 0.4811252243246881521215),
            (0.4, 0.0685406196938365658454),
            (0.5, 0.002480092828082631156193),
        ];
        for (l, want) in cases {
            assert_relative_eq!(dens.value_at(l), want, max_relative = 1e-12);
        }
        // plurality-3 values are exact rationals
        let dens = DistanceDensity::exact(&PositionalRule::plurality(3).unwrap()).unwrap();
        assert_relative_eq!(dens.value_at(0.0), 2.5, max_relative = 1e-13);
        assert_relative_eq!(dens.value_at(0.2), 1.188, max_relative = 1e-13);
    }

    #[test]
    fn density_is_even_and_integrates_to_half() {
        for rule in [borda3(), PositionalRule::plurality(3).unwrap()] {
            let dens = DistanceDensity::exact(&rule).unwrap();
            for l in [0.1, 0.25, 0.4, 0.55] {
                assert_relative_eq!(dens.value_at(l), dens.value_at(-l), max_relative = 1e-12);
            }
            assert_relative_eq!(dens.integral(), 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn every_pair_shares_one_density() {
        for rule in [borda3(), PositionalRule::plurality(3).unwrap()] {
            let reference = sorted_knots(&hyperplane(&rule, 0, 1).unwrap());
            for (i, j) in [(1, 2), (0, 2), (2, 1)] {
                let knots = sorted_knots(&hyperplane(&rule, i, j).unwrap());
                for (a, b) in reference.iter().zip(&knots) {
                    assert_relative_eq!(a, b, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn central_slice_of_the_vertex_midpoint_direction_is_maximal() {
        // the slice through d-2 vertices and the midpoint of the remaining
        // two has the extremal volume sqrt(d)/(sqrt(2)(d-2)!); its direction
        // has knots (-1/sqrt2, 0, .., 0, 1/sqrt2)
        let r = std::f64::consts::SQRT_2.recip();
        let knots = [-r, 0.0, 0.0, 0.0, 0.0, r];
        assert_relative_eq!(
            bspline_density(&knots, 0.0),
            5.0 / std::f64::consts::SQRT_2,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bspline_density(&knots, 0.0) * simplex_volume(6),
            0.07216878364870322,
            max_relative = 1e-13
        );
    }

    #[test]
    fn simplex_volume_matches_closed_form() {
        assert_relative_eq!(simplex_volume(6), 6.0_f64.sqrt() / 120.0, max_relative = 1e-13);
        assert_relative_eq!(
            simplex_volume(24),
            24.0_f64.sqrt() / 2.585201673888498e22,
            max_relative = 1e-12
        );
        // below the subnormal range for m = 6 histograms (720 coordinates)
        assert_eq!(simplex_volume(720), 0.0);
    }

    #[test]
    fn cross_sections_vanish_outside_the_simplex() {
        let plane = hyperplane(&borda3(), 0, 1).unwrap();
        for offset in [0.6, 1.0, DISTANCE_MAX, -DISTANCE_MAX, 2.0] {
            assert_eq!(cross_section_volume(&plane, offset).unwrap(), 0.0);
        }
        let v = cross_section_volume(&plane, 0.0).unwrap();
        assert_relative_eq!(v, 2.405626121623440685 * simplex_volume(6), max_relative = 1e-12);
    }

    #[test]
    fn monte_carlo_estimator_tracks_the_exact_density() {
        let rule = borda3();
        let exact = DistanceDensity::exact(&rule).unwrap();
        let mc = DistanceDensity::monte_carlo(&rule, 200_000, 9).unwrap();
        let se = mc.std_errors().unwrap();
        for (k, l) in [(0usize, 0.0), (36, 0.1), (72, 0.2)] {
            let diff = (mc.values()[k] - exact.value_at(l)).abs();
            assert!(diff < 5.0 * se[k] + 1e-3, "l={l}: diff {diff}, se {}", se[k]);
        }
    }

    #[test]
    fn exact_density_rejects_large_m() {
        let rule = PositionalRule::borda(7).unwrap();
        assert!(matches!(DistanceDensity::exact(&rule), Err(Error::Unsupported(_))));
    }
}
