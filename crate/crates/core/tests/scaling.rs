//! Wall-clock sanity for tally cost growth. Ignored by default: timing
//! assertions are machine dependent and belong in a manual run.

use std::time::Instant;

use dpvote::ranking::{aggregate_ballots, factorial, Permutation, PositionalRule};

#[test]
#[ignore = "wall-clock measurement; run explicitly on a quiet machine"]
fn tally_cost_grows_about_linearly_with_ballots() {
    let rule = PositionalRule::borda(4).unwrap();
    let time = |n: usize| {
        let ballots: Vec<Permutation> =
            (0..n).map(|i| Permutation::at(4, i % factorial(4)).unwrap()).collect();
        let start = Instant::now();
        let ranking = aggregate_ballots(&rule, &ballots).unwrap();
        assert_eq!(ranking.order.len(), 4);
        start.elapsed().as_secs_f64()
    };
    time(50_000);
    let base = time(100_000);
    let ten_fold = time(1_000_000);
    let ratio = ten_fold / base;
    assert!(ratio < 30.0, "10x the ballots took {ratio:.1}x the time");
}
