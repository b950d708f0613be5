//! Rule-based antiderivatives. Failure is a value, not an error: anything
//! outside the rule table returns `None` and the caller falls back to
//! numeric transport.
//!
//! Rule table: constants, polynomials in v, v^q (q != -1), 1/v -> log,
//! sin/cos/exp/sinh/cosh of a linear argument, derivative-divides
//! c*u^p*u' (p = -1 giving c*log u, which covers cot -> log sin), linearity
//! and constant factoring. Every hit is verified by differentiating the
//! candidate back and checking structural cancellation; a rule that cannot
//! prove itself returns `None`.

use super::{match_constant_multiple, Expr, ExprKind, Func, Num};
use num_traits::One;
use std::collections::BTreeSet;

const MAX_CANDIDATES: usize = 64;

impl Expr {
    /// Antiderivative of `self` with respect to coordinate `v`, or `None`
    /// when the rule table does not apply.
    pub fn integrate(&self, v: &str) -> Option<Expr> {
        let result = integrate_inner(self, v)?;
        // diff . integrate must reproduce the integrand exactly.
        let check = Expr::sub2(result.diff(v), self.clone());
        if check.is_zero_structural() {
            Some(result)
        } else {
            None
        }
    }
}

fn integrate_inner(e: &Expr, v: &str) -> Option<Expr> {
    if !e.depends_on(v) {
        return Some(Expr::mul2(e.clone(), Expr::coord(v)));
    }
    // Constant factoring: pull out every factor independent of v.
    if let ExprKind::Product(cs) = e.kind() {
        let (dep, indep): (Vec<Expr>, Vec<Expr>) =
            cs.iter().cloned().partition(|c| c.depends_on(v));
        if !indep.is_empty() {
            let inner = integrate_inner(&Expr::mul(dep), v)?;
            return Some(Expr::mul2(Expr::mul(indep), inner));
        }
    }
    if let Some(r) = table_rules(e, v) {
        return Some(r);
    }
    if let Some(r) = derivative_divides(e, v) {
        return Some(r);
    }
    // Linearity, after whole-expression matches have had their chance.
    if let ExprKind::Sum(cs) = e.kind() {
        let mut parts = Vec::with_capacity(cs.len());
        for c in cs {
            parts.push(integrate_inner(c, v)?);
        }
        return Some(Expr::add(parts));
    }
    None
}

fn table_rules(e: &Expr, v: &str) -> Option<Expr> {
    match e.kind() {
        ExprKind::Symbol(s) if s.name() == v => {
            Some(Expr::mul2(Expr::ratio(1, 2), Expr::powi(e.clone(), 2)))
        }
        ExprKind::Pow(b, q) => {
            if let ExprKind::Symbol(s) = b.kind() {
                if s.name() == v {
                    return power_rule(b, q);
                }
            }
            None
        }
        ExprKind::Call(f, arg) => {
            // f(a*v + b) with constant a != 0
            let a = arg.diff(v);
            if a.depends_on(v) || a.is_zero_structural() {
                return None;
            }
            let outer = match f {
                Func::Sin => Expr::neg1(Expr::cos(arg.clone())),
                Func::Cos => Expr::sin(arg.clone()),
                Func::Exp => Expr::exp(arg.clone()),
                Func::Sinh => Expr::cosh(arg.clone()),
                Func::Cosh => Expr::sinh(arg.clone()),
                Func::Log => return None,
            };
            Some(Expr::div2(outer, a))
        }
        _ => None,
    }
}

fn power_rule(base: &Expr, q: &Num) -> Option<Expr> {
    if (-q.clone()).is_one() {
        return Some(Expr::log(base.clone()));
    }
    let q1 = q.clone() + Num::one();
    Some(Expr::mul2(
        Expr::num(q1.clone().recip()),
        Expr::pow_rat(base.clone(), q1),
    ))
}

/// Derivative-divides: look for `e == c * u^p * u'` over candidate
/// subexpressions u. Tried on the whole expression (sums included) before
/// linearity so that multi-term u' such as d(1 - 2/r + q/r^2) are caught.
fn derivative_divides(e: &Expr, v: &str) -> Option<Expr> {
    let mut candidates = BTreeSet::new();
    collect_candidates(e, v, &mut candidates);
    for u in candidates.into_iter().take(MAX_CANDIDATES) {
        if matches!(u.kind(), ExprKind::Symbol(_)) {
            continue; // plain v is the power rule's business
        }
        let du = u.diff(v);
        if du.is_zero_structural() {
            continue;
        }
        for p in -3i64..=3 {
            let target = if p == 0 {
                du.clone()
            } else {
                Expr::mul2(Expr::powi(u.clone(), p), du.clone())
            };
            if let Some(c) = match_constant_multiple(e, &target) {
                let q = Num::from_integer(p.into());
                let anti = if p == -1 {
                    Expr::log(u.clone())
                } else {
                    power_rule(&u, &q)?
                };
                return Some(Expr::mul2(Expr::num(c), anti));
            }
        }
    }
    None
}

fn collect_candidates(e: &Expr, v: &str, out: &mut BTreeSet<Expr>) {
    if !e.depends_on(v) || out.len() > 4 * MAX_CANDIDATES {
        return;
    }
    out.insert(e.clone());
    match e.kind() {
        ExprKind::Sum(cs) | ExprKind::Product(cs) => {
            for c in cs {
                collect_candidates(c, v, out);
            }
        }
        ExprKind::Pow(b, _) => collect_candidates(b, v, out),
        ExprKind::Call(_, a) => collect_candidates(a, v, out),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_zero_and_constants() {
        assert!(Expr::zero().integrate("theta").unwrap().is_zero_structural());
        let c = Expr::constant("c1");
        assert_eq!(
            c.integrate("theta").unwrap(),
            Expr::mul2(c, Expr::coord("theta"))
        );
    }

    #[test]
    fn cot_integrates_to_log_sin() {
        let t = Expr::coord("theta");
        let cot = Expr::div2(Expr::cos(t.clone()), Expr::sin(t.clone()));
        let r = cot.integrate("theta").unwrap();
        assert_eq!(r, Expr::log(Expr::sin(t)));
    }

    #[test]
    fn two_cot_feeds_exp_to_sin_squared() {
        let t = Expr::coord("theta");
        let f = Expr::mul(vec![
            Expr::int(2),
            Expr::cos(t.clone()),
            Expr::powi(Expr::sin(t.clone()), -1),
        ]);
        let phi = f.integrate("theta").unwrap();
        assert_eq!(Expr::exp(phi), Expr::powi(Expr::sin(t), 2));
    }

    #[test]
    fn power_and_reciprocal_rules() {
        let r = Expr::coord("r");
        assert_eq!(
            Expr::powi(r.clone(), 3).integrate("r").unwrap(),
            Expr::mul2(Expr::ratio(1, 4), Expr::powi(r.clone(), 4))
        );
        assert_eq!(
            Expr::powi(r.clone(), -1).integrate("r").unwrap(),
            Expr::log(r)
        );
    }

    #[test]
    fn linear_argument_rules() {
        let x = Expr::coord("x");
        let e = Expr::exp(Expr::mul2(Expr::int(3), x.clone()));
        let r = e.clone().integrate("x").unwrap();
        assert_eq!(r, Expr::mul2(Expr::ratio(1, 3), e));
        let s = Expr::sin(x.clone()).integrate("x").unwrap();
        assert_eq!(s, Expr::neg1(Expr::cos(x)));
    }

    #[test]
    fn schwarzschild_factor_via_derivative_divides() {
        // d/dr log(1 - 2/r) = (2/r^2) / (1 - 2/r)
        let r = Expr::coord("r");
        let f = Expr::sub2(Expr::one(), Expr::div2(Expr::int(2), r.clone()));
        let integrand = Expr::mul2(
            Expr::mul2(Expr::int(2), Expr::powi(r, -2)),
            Expr::powi(f.clone(), -1),
        );
        assert_eq!(integrand.integrate("r").unwrap(), Expr::log(f));
    }

    #[test]
    fn multi_term_derivative_divides() {
        // f = 1 - 2/r + 1/(4 r^2): integrand f'/f has a two-term numerator.
        let r = Expr::coord("r");
        let f = Expr::add(vec![
            Expr::one(),
            Expr::mul2(Expr::int(-2), Expr::powi(r.clone(), -1)),
            Expr::mul2(Expr::ratio(1, 4), Expr::powi(r.clone(), -2)),
        ]);
        let integrand = Expr::mul2(f.diff("r"), Expr::powi(f.clone(), -1));
        assert_eq!(integrand.integrate("r").unwrap(), Expr::log(f));
    }

    #[test]
    fn gaussian_is_unsolved() {
        let t = Expr::coord("theta");
        let e = Expr::exp(Expr::powi(t, 2));
        assert!(e.integrate("theta").is_none());
    }

    #[test]
    fn polynomial_linearity() {
        let x = Expr::coord("x");
        let e = Expr::add(vec![
            Expr::mul2(Expr::int(3), Expr::powi(x.clone(), 2)),
            Expr::mul2(Expr::int(2), x.clone()),
            Expr::one(),
        ]);
        let r = e.integrate("x").unwrap();
        let want = Expr::add(vec![
            Expr::powi(x.clone(), 3),
            Expr::powi(x.clone(), 2),
            x,
        ]);
        assert_eq!(r, want);
    }
}
