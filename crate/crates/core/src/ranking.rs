//! Rankings, positional voting rules, and ranking histograms.
//!
//! A ballot is a full strict order over `m` candidates (ids `0..m`). The
//! module indexes the `m!` possible ballots lexicographically, turns ballot
//! collections into histograms, and aggregates either representation under a
//! positional rule (Borda, plurality, or custom normalized score vectors).

use crate::error::{Error, Result};

/// Smallest and largest candidate counts for which ballots and histograms
/// are supported. The upper limit keeps histogram length (`m!`) at 40320.
pub const MIN_CANDIDATES: usize = 3;
pub const MAX_CANDIDATES: usize = 8;

/// `n!` as a `usize`. Panics in debug builds for `n > 20` (overflow).
pub fn factorial(n: usize) -> usize {
    debug_assert!(n <= 20);
    (2..=n).product()
}

fn check_candidate_count(m: usize) -> Result<()> {
    if !(MIN_CANDIDATES..=MAX_CANDIDATES).contains(&m) {
        return Err(Error::Unsupported(format!(
            "candidate count {m} outside {MIN_CANDIDATES}..={MAX_CANDIDATES}"
        )));
    }
    Ok(())
}

/// A full strict ranking of `m` candidates, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    order: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from a best-to-worst candidate list. Every id in
    /// `0..order.len()` must appear exactly once.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        check_candidate_count(m)?;
        let mut seen = vec![false; m];
        for &c in &order {
            if c >= m || seen[c] {
                return Err(Error::InvalidPermutation(format!(
                    "{order:?} is not a permutation of 0..{m}"
                )));
            }
            seen[c] = true;
        }
        Ok(Self { order })
    }

    /// Candidate ids, best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Number of candidates.
    pub fn m(&self) -> usize {
        self.order.len()
    }

    /// Lexicographic rank of this permutation among all `m!`, via the Lehmer
    /// code: `(0,1,2) -> 0`, `(2,1,0) -> m!-1`.
    pub fn index(&self) -> usize {
        let m = self.m();
        let mut idx = 0;
        for i in 0..m {
            let smaller_later = self.order[i + 1..]
                .iter()
                .filter(|&&c| c < self.order[i])
                .count();
            idx += smaller_later * factorial(m - 1 - i);
        }
        idx
    }

    /// Inverse of [`Permutation::index`]: the permutation at lexicographic
    /// rank `k` among `m!`.
    pub fn at(m: usize, k: usize) -> Result<Self> {
        check_candidate_count(m)?;
        if k >= factorial(m) {
            return Err(Error::Domain(format!("rank {k} out of range for m={m}")));
        }
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut k = k;
        let mut order = Vec::with_capacity(m);
        for i in 0..m {
            let f = factorial(m - 1 - i);
            order.push(remaining.remove(k / f));
            k %= f;
        }
        Ok(Self { order })
    }

    /// Rank of a 3-candidate permutation in Steinhaus-Johnson-Trotter (plain
    /// changes) order: `abc, acb, cab, cba, bca, bac`. Hand-worked
    /// three-candidate tables conventionally use this enumeration, so it is
    /// exposed for cross-checks; lexicographic order is used everywhere else.
    pub fn sjt_index(&self) -> Result<usize> {
        if self.m() != 3 {
            return Err(Error::Unsupported(format!(
                "SJT indexing is provided for 3 candidates only, got {}",
                self.m()
            )));
        }
        Ok(match self.order[..] {
            [0, 1, 2] => 0,
            [0, 2, 1] => 1,
            [2, 0, 1] => 2,
            [2, 1, 0] => 3,
            [1, 2, 0] => 4,
            [1, 0, 2] => 5,
            _ => unreachable!("validated on construction"),
        })
    }

    /// The same ranking read worst-to-best.
    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Self { order }
    }
}

/// Visits all permutations of `0..m` in lexicographic order as `(rank, order)`.
///
/// Uses the classic next-permutation rearrangement, so the whole sweep is
/// O(m!) with no per-step allocation.
pub fn for_each_permutation<F: FnMut(usize, &[usize])>(m: usize, mut f: F) {
    let mut order: Vec<usize> = (0..m).collect();
    let mut k = 0;
    loop {
        f(k, &order);
        k += 1;
        // find the rightmost ascent
        let Some(i) = (0..m - 1).rev().find(|&i| order[i] < order[i + 1]) else {
            return;
        };
        let j = (i + 1..m).rev().find(|&j| order[j] > order[i]).unwrap();
        order.swap(i, j);
        order[i + 1..].reverse();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum RuleKind {
    Borda,
    Plurality,
    Custom,
}

/// A positional voting rule: position `i` (0-based, best first) is worth
/// `scores[i]`, normalized so `scores[0] = 1`, `scores[m-1] = 0`, and the
/// vector is non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionalRule {
    scores: Vec<f64>,
    kind: RuleKind,
}

impl PositionalRule {
    /// Borda count: position `i` scores `(m-1-i)/(m-1)`.
    pub fn borda(m: usize) -> Result<Self> {
        if m < MIN_CANDIDATES {
            return Err(Error::Unsupported(format!("need at least 3 candidates, got {m}")));
        }
        let scores = (0..m).map(|i| (m - 1 - i) as f64 / (m - 1) as f64).collect();
        Ok(Self { scores, kind: RuleKind::Borda })
    }

    /// Plurality: only the top position scores.
    pub fn plurality(m: usize) -> Result<Self> {
        if m < MIN_CANDIDATES {
            return Err(Error::Unsupported(format!("need at least 3 candidates, got {m}")));
        }
        let mut scores = vec![0.0; m];
        scores[0] = 1.0;
        Ok(Self { scores, kind: RuleKind::Plurality })
    }

    /// An arbitrary non-increasing score vector. Scores are affinely rescaled
    /// to the normalized form, which never changes the induced ranking (every
    /// candidate occupies exactly one position per ballot).
    pub fn custom(scores: &[f64]) -> Result<Self> {
        let m = scores.len();
        if m < MIN_CANDIDATES {
            return Err(Error::Unsupported(format!("need at least 3 scores, got {m}")));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("scores must be finite".into()));
        }
        if scores.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("scores must be non-increasing: {scores:?}")));
        }
        let (top, bottom) = (scores[0], scores[m - 1]);
        if top <= bottom {
            return Err(Error::DegenerateInput(
                "constant score vector ranks nothing".into(),
            ));
        }
        let scores = scores.iter().map(|s| (s - bottom) / (top - bottom)).collect();
        Ok(Self { scores, kind: RuleKind::Custom })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn m(&self) -> usize {
        self.scores.len()
    }

    /// Stable text form, also accepted back by the CLI's `--rule` parser.
    pub fn label(&self) -> String {
        match self.kind {
            RuleKind::Borda => "borda".into(),
            RuleKind::Plurality => "plurality".into(),
            RuleKind::Custom => {
                let parts: Vec<String> =
                    self.scores.iter().map(|s| crate::io::format_real(*s)).collect();
                format!("custom:{}", parts.join(","))
            }
        }
    }
}

/// The `m x m!` score matrix: entry `(c, k)` is the score candidate `c`
/// earns from the ballot at lexicographic rank `k`.
pub fn score_matrix(rule: &PositionalRule) -> Result<Vec<Vec<f64>>> {
    let m = rule.m();
    check_candidate_count(m)?;
    let mut rows = vec![vec![0.0; factorial(m)]; m];
    for_each_permutation(m, |k, order| {
        for (pos, &c) in order.iter().enumerate() {
            rows[c][k] = rule.scores()[pos];
        }
    });
    Ok(rows)
}

/// Ballot counts per permutation, indexed lexicographically. Counts are kept
/// as reals so that noised histograms (which may go negative or fractional)
/// share the type.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    m: usize,
    counts: Vec<f64>,
}

impl Histogram {
    pub fn zeros(m: usize) -> Result<Self> {
        check_candidate_count(m)?;
        Ok(Self { m, counts: vec![0.0; factorial(m)] })
    }

    /// Tallies a ballot list. O(N * m^2) for the index computations.
    pub fn from_ballots(ballots: &[Permutation]) -> Result<Self> {
        let Some(first) = ballots.first() else {
            return Err(Error::DegenerateInput("empty ballot list".into()));
        };
        let mut h = Self::zeros(first.m())?;
        for b in ballots {
            if b.m() != h.m {
                return Err(Error::DimensionMismatch { expected: h.m, got: b.m() });
            }
            h.counts[b.index()] += 1.0;
        }
        Ok(h)
    }

    /// Wraps an existing count vector; length must be `m!`.
    pub fn from_counts(m: usize, counts: Vec<f64>) -> Result<Self> {
        check_candidate_count(m)?;
        if counts.len() != factorial(m) {
            return Err(Error::DimensionMismatch {
                expected: factorial(m),
                got: counts.len(),
            });
        }
        if counts.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("histogram counts must be finite".into()));
        }
        Ok(Self { m, counts })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// This histogram with one extra ballot.
    pub fn plus_ballot(&self, ballot: &Permutation) -> Result<Self> {
        if ballot.m() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: ballot.m() });
        }
        let mut h = self.clone();
        h.counts[ballot.index()] += 1.0;
        Ok(h)
    }

    /// Normalizes by total mass. Errors unless the total is positive.
    pub fn normalize(&self) -> Result<VoteDistribution> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::DegenerateInput(format!(
                "histogram total {total} is not positive"
            )));
        }
        Ok(VoteDistribution {
            m: self.m,
            weights: self.counts.iter().map(|c| c / total).collect(),
        })
    }

    /// Normalizes by an explicit voter count instead of the summed mass.
    /// For a raw tally of `voters` ballots the two agree; this form is the
    /// one whose noise behavior is checked bit-for-bit against noising the
    /// histogram itself (see `privacy::NoisySample::to_distribution`).
    pub fn normalized_by(&self, voters: u64) -> Result<VoteDistribution> {
        if voters == 0 {
            return Err(Error::DegenerateInput("voter count must be positive".into()));
        }
        let n = voters as f64;
        Ok(VoteDistribution {
            m: self.m,
            weights: self.counts.iter().map(|c| c / n).collect(),
        })
    }
}

/// A point on the ranking simplex: per-permutation vote shares, lexicographic
/// order, non-negative, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteDistribution {
    m: usize,
    weights: Vec<f64>,
}

impl VoteDistribution {
    pub fn from_weights(m: usize, weights: Vec<f64>) -> Result<Self> {
        check_candidate_count(m)?;
        if weights.len() != factorial(m) {
            return Err(Error::DimensionMismatch {
                expected: factorial(m),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Domain("weights must be finite and non-negative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("weights sum to {sum}, expected 1")));
        }
        Ok(Self { m, weights })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// An aggregation outcome: candidates best-first, their score totals, and
/// whether any pair of totals was exactly equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    /// Candidate ids, best first. Exact ties break toward the smaller id.
    pub order: Vec<usize>,
    /// Score totals indexed by candidate id (not by rank).
    pub scores: Vec<f64>,
    /// True when some pair of totals compared exactly equal.
    pub tied: bool,
}

fn rank_totals(totals: Vec<f64>) -> Ranking {
    let mut order: Vec<usize> = (0..totals.len()).collect();
    order.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    let tied = order
        .windows(2)
        .any(|w| totals[w[0]] == totals[w[1]]);
    Ranking { order, scores: totals, tied }
}

/// Applies a positional rule to per-permutation weights (histogram counts or
/// vote shares; any positive rescaling of the input leaves the ranking
/// unchanged). `weights` is indexed lexicographically and must have length
/// `m!`.
pub fn aggregate(rule: &PositionalRule, weights: &[f64]) -> Result<Ranking> {
    let m = rule.m();
    check_candidate_count(m)?;
    if weights.len() != factorial(m) {
        return Err(Error::DimensionMismatch {
            expected: factorial(m),
            got: weights.len(),
        });
    }
    let mut totals = vec![0.0; m];
    for_each_permutation(m, |k, order| {
        let w = weights[k];
        if w != 0.0 {
            for (pos, &c) in order.iter().enumerate() {
                totals[c] += rule.scores()[pos] * w;
            }
        }
    });
    Ok(rank_totals(totals))
}

/// Aggregates a ballot list directly, without materializing the histogram:
/// O(m*N) plus the final sort. Produces exactly the same totals as routing
/// through [`Histogram::from_ballots`] and [`aggregate`] when the additions
/// happen to round identically; the induced ranking always agrees on
/// untied profiles.
pub fn aggregate_ballots(rule: &PositionalRule, ballots: &[Permutation]) -> Result<Ranking> {
    let m = rule.m();
    if ballots.is_empty() {
        return Err(Error::DegenerateInput("empty ballot list".into()));
    }
    let mut totals = vec![0.0; m];
    for b in ballots {
        if b.m() != m {
            return Err(Error::DimensionMismatch { expected: m, got: b.m() });
        }
        for (pos, &c) in b.order().iter().enumerate() {
            totals[c] += rule.scores()[pos];
        }
    }
    Ok(rank_totals(totals))
}
