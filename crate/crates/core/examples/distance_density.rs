//! The geometry behind the error bounds: the density of the signed
//! distance from a uniformly random vote distribution to a tie hyperplane,
//! computed exactly as a B-spline and cross-checked by Monte Carlo.
//!
//! Run with: cargo run -p dpvote --example distance_density

use dpvote::geometry::{
    cross_section_volume, hyperplane, simplex_volume, DistanceDensity,
};
use dpvote::ranking::{factorial, PositionalRule};

fn main() {
    let borda = PositionalRule::borda(3).unwrap();
    let plurality = PositionalRule::plurality(3).unwrap();

    let exact_b = DistanceDensity::exact(&borda).unwrap();
    let exact_p = DistanceDensity::exact(&plurality).unwrap();
    let mc = DistanceDensity::monte_carlo(&borda, 2_000_000, 11).unwrap();

    println!("distance density p_D for 3 candidates (6-dimensional histograms)\n");
    println!(
        "{:>6} {:>14} {:>14} {:>16}",
        "l", "borda exact", "plurality", "borda MC (2e6)"
    );
    for l in [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
        println!(
            "{:>6} {:>14.8} {:>14.8} {:>16.8}",
            l,
            exact_b.value_at(l),
            exact_p.value_at(l),
            mc.value_at(l),
        );
    }

    // the density is even and integrates to 1, so its half-integral is 1/2
    println!("\nintegral of p_D over [0, sqrt(2)]: {:.9} (expected 0.5)", exact_b.integral());

    // the central slice is the fattest one, and no rule's central density
    // can exceed (m! - 1)/sqrt(2)
    let cap = (factorial(3) - 1) as f64 / std::f64::consts::SQRT_2;
    println!(
        "p_D(0): borda {:.6}, plurality {:.6}, universal cap {:.6}",
        exact_b.value_at(0.0),
        exact_p.value_at(0.0),
        cap
    );

    // the same object in un-normalized form: slice volumes of the simplex
    let h = hyperplane(&borda, 0, 1).unwrap();
    println!(
        "\nsimplex volume {:.8}; central cross-section {:.8}",
        simplex_volume(factorial(3)),
        cross_section_volume(&h, 0.0).unwrap()
    );

    // support ends at the largest hyperplane coefficient, well inside the
    // simplex diameter sqrt(2)
    let past_support = exact_b.value_at(0.6);
    println!("p_D(0.6) = {past_support} (outside the support of the borda density)");
}
