//! Randomized suites for the algebra kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    chebyshev_sum_holds, generalized_chebyshev_holds, power_mean_holds, squared_weight_chebyshev_holds, ExponentPair,
    MonotoneTriple, Tolerance,
};

/// Exponent pairs drawn per triple in the generalized suite.
pub const PAIRS_PER_TRIPLE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSuite {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest `margin / (|lhs| + |rhs|)` seen; negative means a violation.
    pub worst_relative_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub suites: Vec<FuzzSuite>,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.violations == 0)
    }
}

struct Tally {
    suite: FuzzSuite,
}

impl Tally {
    fn new(name: &str) -> Self {
        Self {
            suite: FuzzSuite {
                name: name.to_string(),
                trials: 0,
                violations: 0,
                worst_relative_margin: f64::INFINITY,
            },
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, holds: bool) {
        self.suite.trials += 1;
        if !holds {
            self.suite.violations += 1;
        }
        let scale = lhs.abs() + rhs.abs();
        if scale > 0.0 {
            self.suite.worst_relative_margin = self.suite.worst_relative_margin.min((rhs - lhs) / scale);
        }
    }
}

fn sorted(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64, descending: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(lo..hi)).collect();
    v.sort_by(f64::total_cmp);
    if descending {
        v.reverse();
    }
    v
}

/// A monotone triple with strictly positive `A` spread over several decades.
pub fn random_triple(rng: &mut ChaCha8Rng) -> MonotoneTriple {
    let len = rng.random_range(1..=12);
    let a: Vec<f64> = sorted(rng, len, -2.0, 2.0, true).into_iter().map(|x| 10f64.powf(x)).collect();
    let b = sorted(rng, len, 0.0, 10.0, false);
    let c = sorted(rng, len, 0.0, 10.0, false);
    MonotoneTriple::new(a, b, c).expect("generated in order")
}

/// `α ∈ [-3, 3]`, `β = α²/2 + t` with `t ∈ [0, 3)`.
pub fn random_admissible_pair(rng: &mut ChaCha8Rng) -> ExponentPair {
    let alpha = rng.random_range(-3.0..3.0);
    let beta = alpha * alpha / 2.0 + rng.random_range(0.0..3.0);
    ExponentPair { alpha, beta }
}

/// Runs the generalized Chebyshev suite (`trials` triples, each with
/// [`PAIRS_PER_TRIPLE`] pairs), its squared-weight specialization, and the
/// power-mean and Chebyshev-sum suites with `trials` cases each.
pub fn fuzz_algebra(trials: usize, seed: u64, tol: Tolerance) -> FuzzSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut general = Tally::new("generalized_chebyshev");
    let mut squared = Tally::new("squared_weight_chebyshev");
    let mut power = Tally::new("power_mean");
    let mut cheb = Tally::new("chebyshev_sum");

    for _ in 0..trials {
        let t = random_triple(&mut rng);
        for _ in 0..PAIRS_PER_TRIPLE {
            let e = random_admissible_pair(&mut rng);
            let c = generalized_chebyshev_holds(&t, e, tol).expect("admissible pair, positive A");
            general.record(c.lhs, c.rhs, c.holds);
        }
        let c = squared_weight_chebyshev_holds(&t, tol);
        squared.record(c.lhs, c.rhs, c.holds);

        let len = rng.random_range(1..=12);
        let s: Vec<f64> = (0..len).map(|_| rng.random_range(0.0..10.0)).collect();
        let gamma = rng.random_range(1.0..5.0);
        let c = power_mean_holds(&s, gamma, tol).expect("valid input");
        power.record(c.lhs, c.rhs, c.holds);

        let len = rng.random_range(1..=12);
        let a = sorted(&mut rng, len, -5.0, 5.0, true);
        let b = sorted(&mut rng, len, -5.0, 5.0, false);
        let c = chebyshev_sum_holds(&a, &b, tol).expect("oppositely ordered");
        cheb.record(c.lhs, c.rhs, c.holds);
    }
    FuzzSummary {
        seed,
        suites: [general, squared, power, cheb].into_iter().map(|t| t.suite).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_is_clean_and_reproducible() {
        let a = fuzz_algebra(300, 11, Tolerance::default());
        assert!(a.passed(), "{a:?}");
        assert_eq!(a.suites[0].trials, 300 * PAIRS_PER_TRIPLE);
        assert_eq!(a, fuzz_algebra(300, 11, Tolerance::default()));
    }
}
