//! Symbolic differentiation. Total on well-formed expressions; free
//! constants differentiate to zero. Differentiating a free-function
//! placeholder with respect to one of its declared dependencies is a
//! programming error (placeholders are opaque until resolved) and panics.

use super::{Expr, ExprKind, Func, Num};
use num_traits::One;

impl Expr {
    /// Partial derivative with respect to the named coordinate, in canonical
    /// form.
    pub fn diff(&self, v: &str) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        match self.kind() {
            ExprKind::Number(_) => Expr::zero(),
            ExprKind::Symbol(s) => {
                if s.is_coordinate() {
                    if s.name() == v {
                        Expr::one()
                    } else {
                        Expr::zero()
                    }
                } else if s.deps().iter().any(|d| &**d == v) {
                    panic!(
                        "cannot differentiate unresolved free function {}[..] with respect to {}",
                        s.name(),
                        v
                    );
                } else {
                    Expr::zero()
                }
            }
            ExprKind::Sum(cs) => Expr::add(cs.iter().map(|c| c.diff(v)).collect()),
            ExprKind::Product(cs) => {
                let mut terms = Vec::with_capacity(cs.len());
                for (i, c) in cs.iter().enumerate() {
                    if !c.depends_on(v) {
                        continue;
                    }
                    let mut factors: Vec<Expr> = Vec::with_capacity(cs.len());
                    factors.push(c.diff(v));
                    for (j, o) in cs.iter().enumerate() {
                        if j != i {
                            factors.push(o.clone());
                        }
                    }
                    terms.push(Expr::mul(factors));
                }
                Expr::add(terms)
            }
            ExprKind::Pow(b, q) => {
                // d(b^q) = q * b^(q-1) * b'
                Expr::mul(vec![
                    Expr::num(q.clone()),
                    Expr::pow_rat(b.clone(), q.clone() - Num::one()),
                    b.diff(v),
                ])
            }
            ExprKind::Call(f, a) => {
                let da = a.diff(v);
                let outer = match f {
                    Func::Sin => Expr::cos(a.clone()),
                    Func::Cos => Expr::neg1(Expr::sin(a.clone())),
                    Func::Exp => Expr::exp(a.clone()),
                    Func::Log => Expr::powi(a.clone(), -1),
                    Func::Sinh => Expr::cosh(a.clone()),
                    Func::Cosh => Expr::sinh(a.clone()),
                };
                Expr::mul2(outer, da)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_on_sin_cos() {
        let t = Expr::coord("theta");
        let e = Expr::mul2(Expr::sin(t.clone()), Expr::cos(t.clone()));
        let d = e.diff("theta");
        let want = Expr::sub2(
            Expr::powi(Expr::cos(t.clone()), 2),
            Expr::powi(Expr::sin(t.clone()), 2),
        );
        assert_eq!(d, want);
    }

    #[test]
    fn free_constant_differentiates_to_zero() {
        let c = Expr::constant("c1");
        assert!(c.diff("theta").is_zero_structural());
    }

    #[test]
    fn chain_rule_log_sin() {
        let t = Expr::coord("theta");
        let e = Expr::log(Expr::sin(t.clone()));
        let d = e.diff("theta");
        let want = Expr::div2(Expr::cos(t.clone()), Expr::sin(t));
        assert_eq!(d, want);
    }

    #[test]
    fn cot_derivative_normalizes() {
        let t = Expr::coord("theta");
        let cot = Expr::div2(Expr::cos(t.clone()), Expr::sin(t.clone()));
        // d cot = -1/sin^2 after Pythagorean normalization
        let want = Expr::neg1(Expr::powi(Expr::sin(t), -2));
        assert_eq!(cot.diff("theta"), want);
    }

    #[test]
    #[should_panic(expected = "free function")]
    fn free_function_diff_panics_inside_deps() {
        let c = Expr::free_fn("c1", &["x2"]);
        let _ = c.diff("x2");
    }
}
