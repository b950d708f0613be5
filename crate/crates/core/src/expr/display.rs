//! Rendering of expressions in the same grammar the parser accepts, so that
//! every printed expression round-trips.

use super::{Expr, ExprKind, Func, Num};
use num_rational::BigRational;
use num_traits::{One, Signed};
use std::fmt;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render(self))
    }
}

fn render_num(n: &Num) -> String {
    if n.is_integer() {
        n.numer().to_string()
    } else {
        format!("{}/{}", n.numer(), n.denom())
    }
}

/// Render a product as `num/den`, splitting factors by exponent sign.
fn render_factors(coef: &Num, factors: &[Expr]) -> String {
    let mut num_parts: Vec<String> = Vec::new();
    let mut den_parts: Vec<String> = Vec::new();
    let coef_abs = coef.abs();
    if !coef_abs.is_one() {
        if coef_abs.is_integer() {
            num_parts.push(coef_abs.numer().to_string());
        } else {
            num_parts.push(coef_abs.numer().to_string());
            den_parts.push(coef_abs.denom().to_string());
        }
    }
    for fac in factors {
        match fac.kind() {
            ExprKind::Pow(b, q) if q.is_negative() => {
                let minus_q = -q.clone();
                if minus_q.is_one() {
                    den_parts.push(atom(b));
                } else {
                    den_parts.push(pow_str(b, &minus_q));
                }
            }
            _ => num_parts.push(factor_str(fac)),
        }
    }
    if num_parts.is_empty() {
        num_parts.push("1".to_string());
    }
    let num = num_parts.join("*");
    let mut out = String::new();
    if coef.is_negative() {
        out.push('-');
    }
    out.push_str(&num);
    if !den_parts.is_empty() {
        out.push('/');
        if den_parts.len() == 1 && !den_parts[0].contains('*') {
            out.push_str(&den_parts[0]);
        } else {
            out.push('(');
            out.push_str(&den_parts.join("*"));
            out.push(')');
        }
    }
    out
}

fn pow_str(base: &Expr, exp: &Num) -> String {
    if *exp == BigRational::new(1.into(), 2.into()) {
        return format!("sqrt({})", render(base));
    }
    let e = if exp.is_integer() && exp.is_positive() {
        render_num(exp)
    } else {
        format!("({})", render_num(exp))
    };
    format!("{}^{}", atom(base), e)
}

/// Wrap in parentheses unless the expression is self-delimiting.
fn atom(e: &Expr) -> String {
    match e.kind() {
        ExprKind::Symbol(_) | ExprKind::Call(..) => render(e),
        ExprKind::Number(n) if n.is_integer() && !n.is_negative() => render_num(n),
        _ => format!("({})", render(e)),
    }
}

fn factor_str(e: &Expr) -> String {
    match e.kind() {
        ExprKind::Sum(_) => format!("({})", render(e)),
        ExprKind::Pow(b, q) => pow_str(b, q),
        _ => render(e),
    }
}

fn render(e: &Expr) -> String {
    match e.kind() {
        ExprKind::Number(n) => render_num(n),
        ExprKind::Symbol(s) => s.name().to_string(),
        ExprKind::Call(f, a) => format!("{}({})", func_name(*f), render(a)),
        ExprKind::Pow(b, q) => {
            if q.is_negative() {
                render_factors(&Num::one(), std::slice::from_ref(e))
            } else {
                pow_str(b, q)
            }
        }
        ExprKind::Product(cs) => {
            let (coef, rest) = match cs[0].kind() {
                ExprKind::Number(n) => (n.clone(), &cs[1..]),
                _ => (Num::one(), &cs[..]),
            };
            render_factors(&coef, rest)
        }
        ExprKind::Sum(cs) => {
            let mut out = String::new();
            for (i, t) in cs.iter().enumerate() {
                let (coef, _) = super::split_coef(t);
                if i == 0 {
                    out.push_str(&term_str(t));
                } else if coef.is_negative() {
                    out.push_str(" - ");
                    out.push_str(&term_str(&Expr::neg1(t.clone())));
                } else {
                    out.push_str(" + ");
                    out.push_str(&term_str(t));
                }
            }
            out
        }
    }
}

fn term_str(t: &Expr) -> String {
    match t.kind() {
        ExprKind::Sum(_) => format!("({})", render(t)),
        _ => render(t),
    }
}

fn func_name(f: Func) -> &'static str {
    f.name()
}
