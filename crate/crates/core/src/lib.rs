//! Differentially private rank aggregation.
//!
//! Positional voting rules (Borda, plurality, custom score vectors) applied
//! to ranking histograms under calibrated Gaussian noise, together with the
//! two things one needs to reason about the privacy/accuracy trade-off:
//!
//! * analytical upper bounds on the probability that noise changes the
//!   aggregate ranking ([`bounds`]), driven by the exact geometry of
//!   rank-simplex cross sections ([`geometry`]);
//! * a deterministic, parallel Monte Carlo harness that estimates the true
//!   error rate and places it against those bounds ([`simulator`]).
//!
//! # Modules
//!
//! * [`ranking`] - permutations, positional rules, histograms, aggregation
//! * [`privacy`] - the Gaussian mechanism, noise scales, seed streams
//! * [`geometry`] - pairwise-order hyperplanes and distance densities
//! * [`bounds`] - error-rate upper bounds and their tau optimizers
//! * [`simulator`] - trials, error-rate estimates, parameter sweeps
//! * [`cli`] - the `dpvote` command-line front end
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run -p dpvote --example aggregate_ballots   # rules and tallies
//! cargo run -p dpvote --example noisy_aggregation   # Gaussian mechanism
//! cargo run -p dpvote --example distance_density    # simplex cross sections
//! cargo run -p dpvote --example error_bounds        # the four bounds
//! cargo run -p dpvote --example epsilon_sweep       # simulation vs bounds
//! cargo run -p dpvote --example voter_sweep         # accuracy as N grows
//! ```
//!
//! # Quick start
//!
//! ```
//! use dpvote::privacy::{add_noise, NoiseSeed, PrivacyParams};
//! use dpvote::ranking::{aggregate, Histogram, Permutation, PositionalRule};
//!
//! let ballots: Vec<Permutation> = [[0, 1, 2], [0, 2, 1], [1, 0, 2]]
//!     .into_iter()
//!     .map(|o| Permutation::new(o.to_vec()).unwrap())
//!     .collect();
//! let rule = PositionalRule::borda(3).unwrap();
//! let h = Histogram::from_ballots(&ballots).unwrap();
//! let clear = aggregate(&rule, h.counts()).unwrap();
//!
//! let params = PrivacyParams::new(1.0, 1e-3, ballots.len() as u64).unwrap();
//! let noisy = add_noise(&h, &params, NoiseSeed::new(42));
//! let private = aggregate(&rule, noisy.values()).unwrap();
//!
//! assert_eq!(clear.order[0], 0);
//! assert_eq!(private.order.len(), 3);
//! ```

pub mod bounds;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod privacy;
pub mod ranking;
pub mod simulator;

pub use error::{Error, Result};
