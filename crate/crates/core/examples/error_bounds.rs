//! The four analytical bounds on the probability that calibrated noise
//! changes the aggregate ranking, and how they relate: from the universal
//! worst-case cap down to the rule-specific geometry.
//!
//! Run with: cargo run -p dpvote --example error_bounds

use dpvote::bounds::{
    max_slice_bound, midpoint_bound, optimal_tau, rule_specific_bound, simplified_bound,
    BoundQuery,
};
use dpvote::privacy::PrivacyParams;
use dpvote::ranking::PositionalRule;

fn main() {
    let rule = PositionalRule::borda(3).unwrap();
    let params = PrivacyParams::new(0.1, 5e-4, 2000).unwrap();
    println!(
        "3 candidates, epsilon 0.1, delta 5e-4, 2000 voters (sigma_hat {:.6})\n",
        params.sigma_hat()
    );

    let q = BoundQuery::new(3, params.clone()).unwrap();
    let with_rule = BoundQuery::new(3, params.clone())
        .unwrap()
        .with_rule(rule.clone())
        .unwrap();

    let ms = max_slice_bound(&q).unwrap();
    let mid = midpoint_bound(&q).unwrap();
    let rs = rule_specific_bound(&with_rule).unwrap();
    let simple = simplified_bound(&q).unwrap();

    println!("{:<14} {:>12} {:>12}", "method", "bound", "tau");
    for b in [&ms, &mid, &rs, &simple] {
        println!("{:<14} {:>12.6} {:>12.6}", b.method.label(), b.value, b.tau);
    }
    println!(
        "\nchain at the reported radii: {:.4} <= {:.4} <= {:.4}",
        rs.value, mid.value, ms.value
    );
    println!(
        "closed-form optimal tau: {:.8}",
        optimal_tau(3, &params).unwrap()
    );

    // the slack radius trades the two error sources against each other;
    // pinning tau shows the curve the optimizer walks
    println!("\nmax-slice bound as a function of tau:");
    for tau in [0.005, 0.01, 0.02, 0.0226, 0.03, 0.05, 0.1] {
        let pinned = BoundQuery::new(3, params.clone())
            .unwrap()
            .with_tau(tau)
            .unwrap();
        println!("  tau {:>7.4}: {:.6}", tau, max_slice_bound(&pinned).unwrap().value);
    }

    // when the noise dwarfs the simplex there is no interior optimum and
    // every bound saturates near 1/2 + slack
    let drowned = PrivacyParams::new(0.05, 5e-4, 100).unwrap();
    println!(
        "\nepsilon 0.05 with 100 voters: optimal_tau -> {:?}",
        optimal_tau(3, &drowned).map_err(|e| e.to_string())
    );
    let fallback = max_slice_bound(&BoundQuery::new(3, drowned).unwrap()).unwrap();
    println!("max-slice falls back to a line search: {:.6}", fallback.value);

    // the closed-form simplified bound decays like sqrt(ln N)/N
    println!("\nsimplified bound vs voters (epsilon 0.1, delta 5e-4):");
    for n in [2_000u64, 20_000, 200_000, 2_000_000] {
        let p = PrivacyParams::new(0.1, 5e-4, n).unwrap();
        let b = simplified_bound(&BoundQuery::new(3, p).unwrap()).unwrap();
        println!("  N {:>9}: {:.8}", n, b.value);
    }
}
