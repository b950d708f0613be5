//! IEEE double evaluation of expressions at a point.

use super::{Expr, ExprKind, Func};
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use thiserror::Error;

/// Assignment of finite floats to symbol names (coordinates and free
/// constants alike).
pub type Point = BTreeMap<String, f64>;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("domain error: {0}")]
pub struct DomainError(pub String);

impl Expr {
    /// Evaluate at a point. Every symbol appearing in the expression must be
    /// assigned; log/sqrt of a nonpositive argument, division by zero and
    /// non-finite intermediates are domain errors.
    pub fn eval_numeric(&self, point: &Point) -> Result<f64, DomainError> {
        let v = self.eval_inner(point)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DomainError("non-finite result".into()))
        }
    }

    fn eval_inner(&self, point: &Point) -> Result<f64, DomainError> {
        match self.kind() {
            ExprKind::Number(n) => n
                .to_f64()
                .ok_or_else(|| DomainError("rational out of f64 range".into())),
            ExprKind::Symbol(s) => point
                .get(s.name())
                .copied()
                .ok_or_else(|| DomainError(format!("unassigned symbol {}", s.name()))),
            ExprKind::Sum(cs) => {
                let mut acc = 0.0;
                for c in cs {
                    acc += c.eval_inner(point)?;
                }
                Ok(acc)
            }
            ExprKind::Product(cs) => {
                let mut acc = 1.0;
                for c in cs {
                    acc *= c.eval_inner(point)?;
                }
                Ok(acc)
            }
            ExprKind::Pow(b, q) => {
                let base = b.eval_inner(point)?;
                if q.is_integer() {
                    let k = q
                        .to_integer()
                        .to_i32()
                        .ok_or_else(|| DomainError("exponent out of range".into()))?;
                    if base == 0.0 && k < 0 {
                        return Err(DomainError("division by zero".into()));
                    }
                    Ok(base.powi(k))
                } else {
                    let e = q
                        .to_f64()
                        .ok_or_else(|| DomainError("exponent out of range".into()))?;
                    if base < 0.0 {
                        return Err(DomainError(format!(
                            "fractional power of negative base {base}"
                        )));
                    }
                    if base == 0.0 && e < 0.0 {
                        return Err(DomainError("division by zero".into()));
                    }
                    Ok(base.powf(e))
                }
            }
            ExprKind::Call(f, a) => {
                let x = a.eval_inner(point)?;
                match f {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(DomainError(format!("log of nonpositive argument {x}")))
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Sinh => Ok(x.sinh()),
                    Func::Cosh => Ok(x.cosh()),
                }
            }
        }
    }

    /// Magnitude estimate at a point: the sum of absolute values of the
    /// top-level terms. Used to scale zero-test thresholds so cancellation
    /// between large terms does not masquerade as a nonzero residual.
    pub fn magnitude(&self, point: &Point) -> Result<f64, DomainError> {
        match self.kind() {
            ExprKind::Sum(cs) => {
                let mut acc = 0.0;
                for c in cs {
                    acc += c.eval_numeric(point)?.abs();
                }
                Ok(acc)
            }
            _ => Ok(self.eval_numeric(point)?.abs()),
        }
    }
}

/// Build a point from name/value pairs.
pub fn point_of(pairs: &[(&str, f64)]) -> Point {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[cfg(test)]
mod tests {
    use super::super::Expr;
    use super::*;

    #[test]
    fn sin_squared_at_half_pi() {
        let t = Expr::coord("theta");
        let e = Expr::powi(Expr::sin(t), 2);
        let v = e
            .eval_numeric(&point_of(&[("theta", std::f64::consts::FRAC_PI_2)]))
            .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pole_is_domain_error() {
        let t = Expr::coord("theta");
        let e = Expr::powi(Expr::sin(t), -1);
        assert!(e.eval_numeric(&point_of(&[("theta", 0.0)])).is_err());
    }

    #[test]
    fn cot_at_one() {
        let t = Expr::coord("theta");
        let e = Expr::div2(Expr::cos(t.clone()), Expr::sin(t));
        let v = e.eval_numeric(&point_of(&[("theta", 1.0)])).unwrap();
        assert!((v - 0.6420926159343306).abs() < 1e-12);
    }

    #[test]
    fn log_of_nonpositive_is_domain_error() {
        let x = Expr::coord("x");
        let e = Expr::log(x);
        assert!(e.eval_numeric(&point_of(&[("x", -1.0)])).is_err());
        assert!(e.eval_numeric(&point_of(&[("x", 2.0)])).is_ok());
    }
}
