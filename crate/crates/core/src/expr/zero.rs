//! Probabilistic zero-testing: structural simplification first, then seeded
//! random evaluation on the chart's sampling box. Full symbolic
//! zero-equivalence is undecidable in general; a recorded seed makes every
//! verdict reproducible.

use super::eval::Point;
use super::Expr;
use crate::chart::Chart;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative threshold for declaring a sampled value zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;

/// Free constants are sampled from this interval.
const CONSTANT_BOX: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ZeroTestError {
    #[error("zero test indeterminate: {failures} consecutive sampling failures")]
    Indeterminate { failures: u32 },
    #[error("zero test cannot sample unresolved free function {0}")]
    UnresolvedFreeFunction(String),
}

/// `is_zero` with the default tolerance.
pub fn is_zero(e: &Expr, chart: &Chart, trials: u32, seed: u64) -> Result<bool, ZeroTestError> {
    is_zero_with(e, chart, trials, seed, DEFAULT_ZERO_TOL)
}

/// Structural zero implies true; otherwise evaluate at `trials` seeded
/// pseudo-random points and accept only if every sample is below
/// `tol * (1 + running magnitude)`. Deterministic for a fixed seed; points
/// hitting domain errors are redrawn, and persistent failure to sample is an
/// `Indeterminate` error rather than a verdict.
pub fn is_zero_with(
    e: &Expr,
    chart: &Chart,
    trials: u32,
    seed: u64,
    tol: f64,
) -> Result<bool, ZeroTestError> {
    assert!(trials >= 1, "trials must be at least 1");
    if e.is_zero_structural() {
        return Ok(true);
    }
    for s in e.symbols() {
        if !s.deps().is_empty() {
            return Err(ZeroTestError::UnresolvedFreeFunction(s.name().to_string()));
        }
    }
    let names: Vec<_> = e.symbols().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0u32;
    let mut failures = 0u32;
    let mut running_mag = 0.0f64;
    while done < trials {
        if failures >= 10 * trials {
            return Err(ZeroTestError::Indeterminate { failures });
        }
        let point = sample_point(chart, &names, &mut rng);
        let v = match e.eval_numeric(&point) {
            Ok(v) => v,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let mag = match e.magnitude(&point) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        running_mag = running_mag.max(mag);
        if v.abs() >= tol * (1.0 + running_mag) {
            return Ok(false);
        }
        done += 1;
    }
    Ok(true)
}

fn sample_point(
    chart: &Chart,
    symbols: &[super::Symbol],
    rng: &mut ChaCha8Rng,
) -> Point {
    let mut point = Point::new();
    for s in symbols {
        let v = if s.is_coordinate() {
            match chart.index_of(s.name()) {
                Some(i) => {
                    let (lo, hi) = chart.box_f64(i);
                    rng.gen_range(lo..hi)
                }
                // Symbol unknown to the chart: fall back to the constant box.
                None => rng.gen_range(CONSTANT_BOX.0..CONSTANT_BOX.1),
            }
        } else {
            rng.gen_range(CONSTANT_BOX.0..CONSTANT_BOX.1)
        };
        point.insert(s.name().to_string(), v);
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chart() -> Chart {
        Chart::new(
            vec!["theta".into(), "phi".into()],
            vec![
                (
                    super::super::Num::new(3.into(), 10.into()),
                    super::super::Num::new(14.into(), 5.into()),
                ),
                (
                    super::super::Num::new(1.into(), 10.into()),
                    super::super::Num::from_integer(6.into()),
                ),
            ],
        )
        .unwrap()
    }

    #[test]
    fn pythagorean_is_zero() {
        let t = Expr::coord("theta");
        let e = Expr::add(vec![
            Expr::powi(Expr::sin(t.clone()), 2),
            Expr::powi(Expr::cos(t), 2),
            Expr::int(-1),
        ]);
        assert!(is_zero(&e, &chart(), 12, 42).unwrap());
    }

    #[test]
    fn sin_minus_theta_is_not_zero() {
        let t = Expr::coord("theta");
        let e = Expr::sub2(Expr::sin(t.clone()), t);
        assert!(!is_zero(&e, &chart(), 12, 42).unwrap());
    }

    #[test]
    fn deterministic_per_seed() {
        let t = Expr::coord("theta");
        let e = Expr::sub2(Expr::sin(t.clone()), Expr::mul2(Expr::ratio(99, 100), t));
        let a = is_zero(&e, &chart(), 12, 7).unwrap();
        let b = is_zero(&e, &chart(), 12, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn free_function_is_rejected() {
        let e = Expr::free_fn("c1", &["phi"]);
        assert!(matches!(
            is_zero(&e, &chart(), 4, 1),
            Err(ZeroTestError::UnresolvedFreeFunction(_))
        ));
    }

    #[test]
    fn everywhere_singular_expression_is_indeterminate() {
        // log of a negative number fails at every sample point
        let t = Expr::coord("theta");
        let e = Expr::log(Expr::neg1(Expr::add2(t, Expr::int(10))));
        assert!(matches!(
            is_zero(&e, &chart(), 4, 1),
            Err(ZeroTestError::Indeterminate { .. })
        ));
    }
}
