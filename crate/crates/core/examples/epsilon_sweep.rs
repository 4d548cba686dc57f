//! Empirical error rates against the analytical bounds across the privacy
//! budget: a desk-scale rendition of the epsilon sweep (the bundled
//! configs/epsilon_sweep.cfg runs the full-resolution version).
//!
//! Run with: cargo run -p dpvote --example epsilon_sweep

use dpvote::privacy::DeltaSpec;
use dpvote::ranking::PositionalRule;
use dpvote::simulator::{sweep, SweepConfig, SweepValues};

fn main() {
    let cfg = SweepConfig {
        rule: PositionalRule::borda(3).unwrap(),
        values: SweepValues::Epsilon {
            values: (0..10).map(|k| 0.05 + 0.02 * k as f64).collect(),
            voters: 2000,
        },
        delta: DeltaSpec::Absolute(5e-4),
        trials: 2000,
        seed: 42,
    };
    println!(
        "3-candidate borda, 2000 voters, delta 5e-4, {} trials per point",
        cfg.trials
    );
    println!("(every row reuses the same seed, so rows differ only through sigma)\n");

    println!(
        "{:>8} {:>9} {:>19} {:>11} {:>10} {:>11}",
        "epsilon", "rate", "95% CI", "rule-spec", "midpoint", "max-slice"
    );
    for row in sweep(&cfg).unwrap() {
        let e = &row.estimate;
        println!(
            "{:>8.2} {:>9.4} [{:>7.4}, {:>7.4}] {:>11.4} {:>10.4} {:>11.4}",
            row.value,
            e.rate,
            e.ci_low,
            e.ci_high,
            row.bound_rule_specific.unwrap(),
            row.bound_midpoint,
            row.bound_max_slice,
        );
    }
    println!("\nempirical rates fall with epsilon and sit below every bound;");
    println!("the rule-specific curve tracks them closest because it uses the");
    println!("actual borda geometry instead of the worst-case density cap.");
}
