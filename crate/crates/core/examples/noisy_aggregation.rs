//! The Gaussian mechanism on a ranking histogram: how the calibrated noise
//! scale moves with (epsilon, delta), what it does to a real tally, and
//! why noising counts or vote shares is the same experiment.
//!
//! Run with: cargo run -p dpvote --example noisy_aggregation

use dpvote::privacy::{add_noise, add_noise_normalized, NoiseSeed, PrivacyParams};
use dpvote::ranking::{aggregate, Histogram, PositionalRule};

fn main() {
    // a 2000-voter histogram with a clear ranking 0 > 1 > 2
    let counts = vec![620.0, 410.0, 340.0, 260.0, 190.0, 180.0];
    let hist = Histogram::from_counts(3, counts).unwrap();
    let voters = hist.total() as u64;
    let rule = PositionalRule::borda(3).unwrap();
    let truth = aggregate(&rule, hist.counts()).unwrap();
    let order: Vec<String> = truth.order.iter().map(|c| c.to_string()).collect();
    println!("true ranking: {}  ({voters} voters)\n", order.join(" > "));

    println!("{:>8} {:>10} {:>12} {:>14}", "epsilon", "sigma", "sigma_hat", "flips/100");
    for epsilon in [0.5, 0.2, 0.1, 0.05, 0.02] {
        let params = PrivacyParams::new(epsilon, 5e-4, voters).unwrap();
        // re-noise the same histogram 100 times on distinct seed streams
        let flips = (0..100)
            .filter(|&s| {
                let sample = add_noise(&hist, &params, NoiseSeed::new(2024).with_stream(s));
                let noised = aggregate(&rule, sample.values()).unwrap();
                noised.order != truth.order
            })
            .count();
        println!(
            "{:>8} {:>10.3} {:>12.6} {:>14}",
            epsilon,
            params.sigma(),
            params.sigma_hat(),
            flips
        );
    }

    // noising raw counts and noising vote shares are the same experiment:
    // with the same seed they reuse the same standard-normal draws, and
    // rescaling the count path reproduces the share path bit for bit
    let params = PrivacyParams::new(0.1, 5e-4, voters).unwrap();
    let seed = NoiseSeed::new(7);
    let on_counts = add_noise(&hist, &params, seed);
    let on_shares = add_noise_normalized(&hist.normalize().unwrap(), &params, seed);
    let rescaled = on_counts.to_distribution(voters).unwrap();
    let identical = rescaled
        .iter()
        .zip(on_shares.values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("\ncount path rescaled == share path (bit-exact): {identical}");
}
