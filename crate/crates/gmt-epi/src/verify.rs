//! Randomized checks of the elementary inequalities behind the comparison
//! surface, and the decay bound on a synthetic power-law family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::measure::geometric_grid;
use crate::moments::{squares, two_terms};
use crate::mono::{decay_bound, default_lambda, DecayProblem, DecayReport, Gauge};
use crate::unit_ball_volume;

/// Relative tolerance used to call an inequality violated.
pub const SUITE_TOL: f64 = 1e-12;

/// One row of the suite table. `worst` is the largest normalized excess
/// (lhs − rhs)/max(1, |lhs|, |rhs|) seen, with its lhs and rhs.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteRow {
    pub check: String,
    pub trials: usize,
    pub violations: usize,
    pub worst: f64,
    pub measured: f64,
    pub bound: f64,
}

impl SuiteRow {
    fn new(check: &str) -> SuiteRow {
        SuiteRow {
            check: check.into(),
            trials: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            measured: f64::NAN,
            bound: f64::NAN,
        }
    }

    fn record(&mut self, (lhs, rhs): (f64, f64)) {
        self.trials += 1;
        let excess = (lhs - rhs) / 1f64.max(lhs.abs()).max(rhs.abs());
        if !(excess <= SUITE_TOL) {
            self.violations += 1;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
            self.measured = lhs;
            self.bound = rhs;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.trials > 0
    }
}

/// Nonnegative magnitude spread over many decades, with exact zeros now and then.
fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.02) {
        0.0
    } else {
        10f64.powf(rng.gen_range(-6.0..6.0))
    }
}

fn fraction(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.02) {
        1.0
    } else {
        10f64.powf(rng.gen_range(-4.0..0.0))
    }
}

/// The four square-root inequalities and the two-term estimate, each on
/// `trials` random admissible inputs.
pub fn inequality_suite(trials: usize, seed: u64) -> Vec<SuiteRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<SuiteRow> = [
        "squares_sum",
        "squares_convex",
        "squares_scaled",
        "squares_product",
        "two_terms",
    ]
    .iter()
    .map(|s| SuiteRow::new(s))
    .collect();
    for _ in 0..trials {
        let (a, b) = (magnitude(&mut rng), magnitude(&mut rng));
        rows[0].record(squares::sum_of_squares(a, b));

        let k = rng.gen_range(1..=8);
        let pts: Vec<f64> = (0..k).map(|_| magnitude(&mut rng)).collect();
        let mut w: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|x| *x /= total);
        } else {
            w = vec![1.0 / k as f64; k];
        }
        rows[1].record(squares::convex_combination(&pts, &w));

        rows[2].record(squares::scaled(magnitude(&mut rng), fraction(&mut rng)));
        rows[3].record(squares::product(
            magnitude(&mut rng),
            magnitude(&mut rng),
            fraction(&mut rng),
        ));

        let len = rng.gen_range(1..=16);
        let f: Vec<f64> = (0..len).map(|_| magnitude(&mut rng).max(1e-300)).collect();
        let mu: Vec<f64> = (0..len)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
            .collect();
        rows[4].record(two_terms(&f, &mu));
    }
    rows
}

/// Masses f(r) = θα(m)r^m(1 + r^β) with gauge ξ = c·r^β, on a 200-point
/// geometric grid (ratio 1.02) ending at r₀ = (10⁻³/c)^{1/β}, so ξ(r₀) = 10⁻³.
pub fn power_family_decay(m: usize, theta: f64, c: f64, beta: f64) -> Result<DecayReport> {
    let xi = Gauge::power(c, beta, 1.0)?;
    let r0 = (1e-3 / c).powf(1.0 / beta);
    let radii = geometric_grid(r0 * 1.02f64.powi(-199), r0, 200);
    let th = theta * unit_ball_volume(m);
    let mass: Vec<f64> = radii
        .iter()
        .map(|r| th * r.powi(m as i32) * (1.0 + r.powf(beta)))
        .collect();
    decay_bound(&DecayProblem {
        radii: &radii,
        mass: &mass,
        theta: th,
        m,
        xi: &xi,
        lambda: default_lambda(m),
        lambda0: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_no_violations() {
        for row in inequality_suite(2000, 7) {
            assert!(row.passed(), "{row:?}");
            assert_eq!(row.trials, 2000);
        }
    }

    #[test]
    fn a_false_inequality_is_caught() {
        let mut row = SuiteRow::new("reversed");
        row.record((2.0, 1.0));
        row.record((1.0, 1.0 + 1e-14));
        assert_eq!(row.violations, 1);
        assert_eq!(row.measured, 2.0);
    }

    #[test]
    fn power_family_slack_is_positive() {
        for beta in [0.25, 0.5, 1.0] {
            let rep = power_family_decay(2, 1.0, 0.1, beta).unwrap();
            assert!(
                rep.conclusion_holds && rep.min_slack > 0.0,
                "{beta}: {}",
                rep.min_slack
            );
            assert_eq!(rep.rows.len(), 200);
        }
    }
}
