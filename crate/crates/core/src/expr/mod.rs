//! Minimal computer-algebra kernel: immutable expression trees over exact
//! rational constants, coordinate symbols and free-constant symbols, with a
//! fixed function basis of sin, cos, exp, log, sqrt, sinh and cosh.
//!
//! Expressions are canonicalized on construction: sums and products are
//! flattened and sorted under a fixed total order, rational constants are
//! folded exactly, `x^0 -> 1`, `x^1 -> x`, `0*e -> 0`, `1*e -> e`, and even
//! powers of cos/cosh are rewritten through the Pythagorean identities so
//! that polynomial collection cancels trig squares without a separate
//! simplification pass. tan, cot, sec, csc, tanh and coth never appear as
//! nodes; the parser rewrites them into the basis at construction time.

mod diff;
mod display;
mod eval;
mod integrate;
mod zero;

pub use eval::{point_of, DomainError, Point};
pub use zero::{is_zero, is_zero_with, ZeroTestError, DEFAULT_ZERO_TOL};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

/// Exact rational scalar used throughout the kernel.
pub type Num = BigRational;

/// Expansion guard: products of sums are distributed only while the
/// estimated term count stays below this bound. Oversized expressions keep
/// their factored shape; downstream consumers fall back to numeric paths.
pub const EXPAND_TERM_LIMIT: usize = 1024;

/// Function basis of the kernel. `sqrt` is represented as `Pow(e, 1/2)`.
/// Variant order fixes the canonical (and display) order of factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Cos,
    Cosh,
    Exp,
    Log,
    Sin,
    Sinh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
        }
    }
}

/// What a symbol stands for. Free constants differentiate to zero; a
/// constant with a nonempty dependency set is a placeholder for an unknown
/// function of those coordinates (an "arbitrary function of integration")
/// and is owned by the PDE layer until resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolKind {
    Coordinate,
    Constant { deps: Arc<[Arc<str>]> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    name: Arc<str>,
    kind: SymbolKind,
}

impl Symbol {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_coordinate(&self) -> bool {
        matches!(self.kind, SymbolKind::Coordinate)
    }

    pub fn is_constant(&self) -> bool {
        !self.is_coordinate()
    }

    /// Dependency set of a free-function placeholder; empty for true constants.
    pub fn deps(&self) -> &[Arc<str>] {
        match &self.kind {
            SymbolKind::Coordinate => &[],
            SymbolKind::Constant { deps } => deps,
        }
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        let rank = |k: &SymbolKind| match k {
            SymbolKind::Coordinate => 0u8,
            SymbolKind::Constant { .. } => 1,
        };
        self.name
            .cmp(&other.name)
            .then_with(|| rank(&self.kind).cmp(&rank(&other.kind)))
            .then_with(|| match (&self.kind, &other.kind) {
                (SymbolKind::Constant { deps: a }, SymbolKind::Constant { deps: b }) => a.cmp(b),
                _ => Ordering::Equal,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Number(Num),
    Symbol(Symbol),
    /// >= 2 children, none of which is a Sum or a zero Number; like terms
    /// collected; sorted.
    Sum(Vec<Expr>),
    /// >= 2 children, at most one leading Number (!= 0, 1), no nested
    /// Product, equal bases merged into powers; sorted.
    Product(Vec<Expr>),
    /// Rational exponent not in {0, 1}.
    Pow(Expr, Num),
    Call(Func, Expr),
}

#[derive(Debug)]
struct ExprNode {
    kind: ExprKind,
    node_count: u32,
    symbol_bloom: u64,
}

/// Immutable, canonical symbolic expression. Cheap to clone and safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct Expr(Arc<ExprNode>);

fn bloom_bit(name: &str) -> u64 {
    // FNV-1a, reduced to one of 64 bits.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    1u64 << (h % 64)
}

impl Expr {
    fn new(kind: ExprKind) -> Self {
        let (count, bloom) = match &kind {
            ExprKind::Number(_) => (1, 0),
            ExprKind::Symbol(s) => {
                let mut b = bloom_bit(&s.name);
                for d in s.deps() {
                    b |= bloom_bit(d);
                }
                (1, b)
            }
            ExprKind::Sum(cs) | ExprKind::Product(cs) => {
                let mut n: u32 = 1;
                let mut b = 0;
                for c in cs {
                    n = n.saturating_add(c.0.node_count);
                    b |= c.0.symbol_bloom;
                }
                (n, b)
            }
            ExprKind::Pow(b, _) => (1 + b.0.node_count, b.0.symbol_bloom),
            ExprKind::Call(_, a) => (1 + a.0.node_count, a.0.symbol_bloom),
        };
        Expr(Arc::new(ExprNode {
            kind,
            node_count: count,
            symbol_bloom: bloom,
        }))
    }

    pub fn kind(&self) -> &ExprKind {
        &self.0.kind
    }

    pub fn node_count(&self) -> usize {
        self.0.node_count as usize
    }

    // ---------------------------------------------------------------- atoms

    pub fn zero() -> Expr {
        static Z: OnceLock<Expr> = OnceLock::new();
        Z.get_or_init(|| Expr::new(ExprKind::Number(Num::zero())))
            .clone()
    }

    pub fn one() -> Expr {
        static O: OnceLock<Expr> = OnceLock::new();
        O.get_or_init(|| Expr::new(ExprKind::Number(Num::one())))
            .clone()
    }

    pub fn num(n: Num) -> Expr {
        if n.is_zero() {
            Expr::zero()
        } else if n.is_one() {
            Expr::one()
        } else {
            Expr::new(ExprKind::Number(n))
        }
    }

    pub fn int(v: i64) -> Expr {
        Expr::num(Num::from_integer(BigInt::from(v)))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        assert!(q != 0, "zero denominator");
        Expr::num(Num::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn coord(name: &str) -> Expr {
        Expr::new(ExprKind::Symbol(Symbol {
            name: Arc::from(name),
            kind: SymbolKind::Coordinate,
        }))
    }

    pub fn constant(name: &str) -> Expr {
        Expr::new(ExprKind::Symbol(Symbol {
            name: Arc::from(name),
            kind: SymbolKind::Constant { deps: Arc::from([]) },
        }))
    }

    /// Free-function placeholder: a constant symbol tagged with the
    /// coordinates it is allowed to depend on.
    pub fn free_fn(name: &str, deps: &[&str]) -> Expr {
        let deps: Vec<Arc<str>> = deps.iter().map(|d| Arc::from(*d)).collect();
        Expr::new(ExprKind::Symbol(Symbol {
            name: Arc::from(name),
            kind: SymbolKind::Constant { deps: Arc::from(deps) },
        }))
    }

    // ------------------------------------------------------------ structure

    pub fn is_zero_structural(&self) -> bool {
        matches!(self.kind(), ExprKind::Number(n) if n.is_zero())
    }

    pub fn is_one_structural(&self) -> bool {
        matches!(self.kind(), ExprKind::Number(n) if n.is_one())
    }

    pub fn as_number(&self) -> Option<&Num> {
        match self.kind() {
            ExprKind::Number(n) => Some(n),
            _ => None,
        }
    }

    pub fn depends_on(&self, name: &str) -> bool {
        if self.0.symbol_bloom & bloom_bit(name) == 0 {
            return false;
        }
        match self.kind() {
            ExprKind::Number(_) => false,
            ExprKind::Symbol(s) => s.name() == name || s.deps().iter().any(|d| &**d == name),
            ExprKind::Sum(cs) | ExprKind::Product(cs) => cs.iter().any(|c| c.depends_on(name)),
            ExprKind::Pow(b, _) => b.depends_on(name),
            ExprKind::Call(_, a) => a.depends_on(name),
        }
    }

    /// All symbols appearing in the expression, sorted by name.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.kind() {
            ExprKind::Number(_) => {}
            ExprKind::Symbol(s) => {
                out.insert(s.clone());
            }
            ExprKind::Sum(cs) | ExprKind::Product(cs) => {
                for c in cs {
                    c.collect_symbols(out);
                }
            }
            ExprKind::Pow(b, _) => b.collect_symbols(out),
            ExprKind::Call(_, a) => a.collect_symbols(out),
        }
    }

    /// True if the expression contains a free-function placeholder with a
    /// nonempty dependency set.
    pub fn has_free_functions(&self) -> bool {
        match self.kind() {
            ExprKind::Number(_) => false,
            ExprKind::Symbol(s) => !s.deps().is_empty(),
            ExprKind::Sum(cs) | ExprKind::Product(cs) => cs.iter().any(|c| c.has_free_functions()),
            ExprKind::Pow(b, _) => b.has_free_functions(),
            ExprKind::Call(_, a) => a.has_free_functions(),
        }
    }

    // --------------------------------------------------------- constructors

    pub fn add(terms: Vec<Expr>) -> Expr {
        let mut collected: BTreeMap<Expr, Num> = BTreeMap::new();
        let mut stack = terms;
        while let Some(t) = stack.pop() {
            match t.kind() {
                ExprKind::Sum(cs) => stack.extend(cs.iter().cloned()),
                _ => {
                    let (coef, key) = split_coef(&t);
                    if coef.is_zero() {
                        continue;
                    }
                    let slot = collected.entry(key).or_insert_with(Num::zero);
                    *slot += coef;
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(collected.len());
        for (key, coef) in collected {
            if coef.is_zero() {
                continue;
            }
            if key.is_one_structural() {
                out.push(Expr::num(coef));
            } else if coef.is_one() {
                out.push(key);
            } else {
                out.push(attach_coef(coef, key));
            }
        }
        out.sort();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::new(ExprKind::Sum(out)),
        }
    }

    pub fn add2(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, b])
    }

    pub fn sub2(a: Expr, b: Expr) -> Expr {
        Expr::add(vec![a, Expr::neg1(b)])
    }

    pub fn neg1(e: Expr) -> Expr {
        Expr::mul(vec![Expr::int(-1), e])
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        let mut pending = factors;
        let mut coef = Num::one();
        let mut bases: BTreeMap<Expr, Num> = BTreeMap::new();

        // Collect factors into (base, exponent) pairs; pow() rebuilding may
        // introduce new products or numbers, so iterate to a fixed point.
        for _round in 0..16 {
            while let Some(f) = pending.pop() {
                match f.kind() {
                    ExprKind::Number(n) => {
                        if n.is_zero() {
                            return Expr::zero();
                        }
                        coef *= n.clone();
                    }
                    ExprKind::Product(cs) => pending.extend(cs.iter().cloned()),
                    ExprKind::Pow(b, q) => {
                        *bases.entry(b.clone()).or_insert_with(Num::zero) += q.clone();
                    }
                    _ => {
                        *bases.entry(f.clone()).or_insert_with(Num::zero) += Num::one();
                    }
                }
            }
            let mut stable = true;
            let mut rebuilt: Vec<Expr> = Vec::with_capacity(bases.len());
            for (b, q) in std::mem::take(&mut bases) {
                if q.is_zero() {
                    continue;
                }
                let p = Expr::pow_rat(b, q);
                match p.kind() {
                    ExprKind::Number(_) | ExprKind::Product(_) => {
                        stable = false;
                        pending.push(p);
                    }
                    _ => rebuilt.push(p),
                }
            }
            if stable {
                pending = rebuilt;
                break;
            }
            for r in rebuilt {
                pending.push(r);
            }
        }

        if coef.is_zero() {
            return Expr::zero();
        }

        // Distribute over sum factors while the expansion stays small.
        let term_estimate: usize = pending
            .iter()
            .map(|f| match f.kind() {
                ExprKind::Sum(cs) => cs.len(),
                _ => 1,
            })
            .try_fold(1usize, |acc, n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        let has_sum = pending.iter().any(|f| matches!(f.kind(), ExprKind::Sum(_)));
        if has_sum && term_estimate <= EXPAND_TERM_LIMIT {
            let (sums, flat): (Vec<Expr>, Vec<Expr>) = pending
                .into_iter()
                .partition(|f| matches!(f.kind(), ExprKind::Sum(_)));
            let mut acc = vec![assemble_product(coef, flat)];
            for s in sums {
                let terms = match s.kind() {
                    ExprKind::Sum(cs) => cs.clone(),
                    _ => unreachable!(),
                };
                let mut next = Vec::with_capacity(acc.len() * terms.len());
                for a in &acc {
                    for t in &terms {
                        next.push(Expr::mul(vec![a.clone(), t.clone()]));
                    }
                }
                acc = next;
            }
            return Expr::add(acc);
        }

        assemble_product(coef, pending)
    }

    pub fn mul2(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, b])
    }

    pub fn div2(a: Expr, b: Expr) -> Expr {
        Expr::mul(vec![a, Expr::pow_rat(b, -Num::one())])
    }

    pub fn powi(e: Expr, k: i64) -> Expr {
        Expr::pow_rat(e, Num::from_integer(BigInt::from(k)))
    }

    pub fn sqrt(e: Expr) -> Expr {
        Expr::pow_rat(e, Num::new(BigInt::from(1), BigInt::from(2)))
    }

    pub fn pow_rat(base: Expr, exp: Num) -> Expr {
        if exp.is_zero() {
            return Expr::one();
        }
        if exp.is_one() {
            return base;
        }
        match base.kind() {
            ExprKind::Number(n) => {
                if let Some(v) = pow_number(n, &exp) {
                    return Expr::num(v);
                }
                if n.is_one() {
                    return Expr::one();
                }
            }
            ExprKind::Pow(inner, q) => {
                // (x^q)^e folds unless q is an integer and e is not: (x^2)^(1/2)
                // is |x|, not x.
                let unsafe_fold = q.is_integer() && !exp.is_integer();
                if !unsafe_fold {
                    return Expr::pow_rat(inner.clone(), q.clone() * exp);
                }
            }
            ExprKind::Product(cs) => {
                if exp.is_integer() {
                    let parts = cs
                        .iter()
                        .map(|c| Expr::pow_rat(c.clone(), exp.clone()))
                        .collect();
                    return Expr::mul(parts);
                }
            }
            ExprKind::Sum(cs) => {
                if exp.is_integer() && exp > Num::one() {
                    if let Some(k) = exp.to_integer().to_u32() {
                        let est = cs.len().checked_pow(k).unwrap_or(usize::MAX);
                        if k <= 8 && est <= EXPAND_TERM_LIMIT {
                            // Distribute term-by-term; delegating to mul()
                            // would just re-collect the equal sum factors
                            // into this same power.
                            let terms = cs.clone();
                            let mut acc = terms.clone();
                            for _ in 1..k {
                                let mut next = Vec::with_capacity(acc.len() * terms.len());
                                for a in &acc {
                                    for t in &terms {
                                        next.push(Expr::mul2(a.clone(), t.clone()));
                                    }
                                }
                                acc = next;
                            }
                            return Expr::add(acc);
                        }
                    }
                }
            }
            ExprKind::Call(f, arg) => {
                // cos^2 -> 1 - sin^2 (cosh^2 -> 1 + sinh^2): keeps trig
                // polynomials in a sin-normal form where Pythagorean
                // cancellation is plain like-term collection.
                if exp.is_integer() && exp >= Num::from_integer(BigInt::from(2)) {
                    let sign = match f {
                        Func::Cos => Some(-1i64),
                        Func::Cosh => Some(1),
                        _ => None,
                    };
                    if let Some(sign) = sign {
                        let k = exp.to_integer();
                        let half = &k / BigInt::from(2);
                        let rem = &k % BigInt::from(2);
                        let dual = match f {
                            Func::Cos => Func::Sin,
                            _ => Func::Sinh,
                        };
                        let sq = Expr::add2(
                            Expr::one(),
                            Expr::mul(vec![
                                Expr::int(sign),
                                Expr::powi(Expr::call(dual, arg.clone()), 2),
                            ]),
                        );
                        let mut parts =
                            vec![Expr::pow_rat(sq, Num::from_integer(half))];
                        if !rem.is_zero() {
                            parts.push(base.clone());
                        }
                        return Expr::mul(parts);
                    }
                }
            }
            _ => {}
        }
        Expr::new(ExprKind::Pow(base, exp))
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        if let Some(n) = arg.as_number() {
            match f {
                Func::Sin | Func::Sinh if n.is_zero() => return Expr::zero(),
                Func::Cos | Func::Cosh | Func::Exp if n.is_zero() => return Expr::one(),
                Func::Log if n.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        match f {
            // Parity normalization: odd functions pull a leading minus out,
            // even functions drop it.
            Func::Sin | Func::Sinh if leading_coef(&arg).is_negative() => {
                return Expr::neg1(Expr::call(f, Expr::neg1(arg)));
            }
            Func::Cos | Func::Cosh if leading_coef(&arg).is_negative() => {
                return Expr::call(f, Expr::neg1(arg));
            }
            Func::Log => {
                if let ExprKind::Call(Func::Exp, inner) = arg.kind() {
                    return inner.clone();
                }
                // log(b^q) -> q*log(b) where the exponent forces b > 0 on
                // the argument's domain (odd or fractional q); even integer
                // exponents would need |b|.
                if let ExprKind::Pow(b, q) = arg.kind() {
                    let even = q.is_integer() && (q.numer() % BigInt::from(2)).is_zero();
                    if !even {
                        return Expr::mul2(Expr::num(q.clone()), Expr::log(b.clone()));
                    }
                }
            }
            Func::Exp => {
                // exp(q*log f + rest) -> f^q * exp(rest)
                let terms: Vec<Expr> = match arg.kind() {
                    ExprKind::Sum(cs) => cs.clone(),
                    _ => vec![arg.clone()],
                };
                let mut factors = Vec::new();
                let mut rest = Vec::new();
                for t in &terms {
                    if let Some((q, inner)) = as_log_multiple(t) {
                        factors.push(Expr::pow_rat(inner, q));
                    } else {
                        rest.push(t.clone());
                    }
                }
                if !factors.is_empty() {
                    let rest_sum = Expr::add(rest);
                    if !rest_sum.is_zero_structural() {
                        factors.push(Expr::new(ExprKind::Call(Func::Exp, rest_sum)));
                    }
                    return Expr::mul(factors);
                }
            }
            _ => {}
        }
        Expr::new(ExprKind::Call(f, arg))
    }

    pub fn sin(e: Expr) -> Expr {
        Expr::call(Func::Sin, e)
    }
    pub fn cos(e: Expr) -> Expr {
        Expr::call(Func::Cos, e)
    }
    pub fn exp(e: Expr) -> Expr {
        Expr::call(Func::Exp, e)
    }
    pub fn log(e: Expr) -> Expr {
        Expr::call(Func::Log, e)
    }
    pub fn sinh(e: Expr) -> Expr {
        Expr::call(Func::Sinh, e)
    }
    pub fn cosh(e: Expr) -> Expr {
        Expr::call(Func::Cosh, e)
    }

    /// Replace every occurrence of the named symbol by `value`, rebuilding
    /// canonically.
    pub fn subst(&self, name: &str, value: &Expr) -> Expr {
        if !self.depends_on(name) {
            return self.clone();
        }
        match self.kind() {
            ExprKind::Number(_) => self.clone(),
            ExprKind::Symbol(s) => {
                if s.name() == name {
                    value.clone()
                } else {
                    self.clone()
                }
            }
            ExprKind::Sum(cs) => Expr::add(cs.iter().map(|c| c.subst(name, value)).collect()),
            ExprKind::Product(cs) => Expr::mul(cs.iter().map(|c| c.subst(name, value)).collect()),
            ExprKind::Pow(b, q) => Expr::pow_rat(b.subst(name, value), q.clone()),
            ExprKind::Call(f, a) => Expr::call(*f, a.subst(name, value)),
        }
    }
}

/// Split a canonical non-sum term into (rational coefficient, key), where
/// the key is the term with its leading number removed and a pure number has
/// key 1.
fn split_coef(t: &Expr) -> (Num, Expr) {
    match t.kind() {
        ExprKind::Number(n) => (n.clone(), Expr::one()),
        ExprKind::Product(cs) => {
            if let ExprKind::Number(n) = cs[0].kind() {
                let rest: Vec<Expr> = cs[1..].to_vec();
                let key = if rest.len() == 1 {
                    rest.into_iter().next().unwrap()
                } else {
                    Expr::new(ExprKind::Product(rest))
                };
                (n.clone(), key)
            } else {
                (Num::one(), t.clone())
            }
        }
        _ => (Num::one(), t.clone()),
    }
}

/// Reattach a coefficient to a non-number, non-sum key. The key is already
/// canonical, so the product can be assembled directly.
fn attach_coef(coef: Num, key: Expr) -> Expr {
    debug_assert!(!coef.is_zero() && !coef.is_one());
    match key.kind() {
        ExprKind::Product(cs) => {
            let mut children = Vec::with_capacity(cs.len() + 1);
            children.push(Expr::num(coef));
            children.extend(cs.iter().cloned());
            children.sort();
            Expr::new(ExprKind::Product(children))
        }
        _ => {
            let mut children = vec![Expr::num(coef), key];
            children.sort();
            Expr::new(ExprKind::Product(children))
        }
    }
}

fn assemble_product(coef: Num, mut parts: Vec<Expr>) -> Expr {
    if parts.is_empty() {
        return Expr::num(coef);
    }
    parts.sort();
    if coef.is_one() {
        if parts.len() == 1 {
            return parts.pop().unwrap();
        }
        return Expr::new(ExprKind::Product(parts));
    }
    let mut children = Vec::with_capacity(parts.len() + 1);
    children.push(Expr::num(coef));
    children.extend(parts);
    children.sort();
    Expr::new(ExprKind::Product(children))
}

/// Exact rational power when it exists: integer exponents always, fractional
/// exponents only for perfect roots of nonnegative rationals.
fn pow_number(base: &Num, exp: &Num) -> Option<Num> {
    if base.is_zero() {
        return if exp.is_positive() { Some(Num::zero()) } else { None };
    }
    if exp.is_integer() {
        let k = exp.to_integer().to_i64()?;
        if k.unsigned_abs() > 256 {
            return None;
        }
        let p = num_traits::pow::pow(base.clone(), k.unsigned_abs() as usize);
        return Some(if k < 0 { p.recip() } else { p });
    }
    if base.is_negative() {
        return None;
    }
    let denom = exp.denom().to_u32()?;
    let root_n = exact_root(base.numer(), denom)?;
    let root_d = exact_root(base.denom(), denom)?;
    let root = Num::new(root_n, root_d);
    let k = exp.numer().to_i64()?;
    if k.unsigned_abs() > 256 {
        return None;
    }
    let p = num_traits::pow::pow(root, k.unsigned_abs() as usize);
    Some(if k < 0 { p.recip() } else { p })
}

fn exact_root(v: &BigInt, n: u32) -> Option<BigInt> {
    if v.is_negative() {
        return None;
    }
    let r = v.nth_root(n);
    if num_traits::pow::pow(r.clone(), n as usize) == *v {
        Some(r)
    } else {
        None
    }
}

/// Leading rational coefficient used for sign normalization.
fn leading_coef(e: &Expr) -> Num {
    match e.kind() {
        ExprKind::Number(n) => n.clone(),
        ExprKind::Product(cs) => match cs[0].kind() {
            ExprKind::Number(n) => n.clone(),
            _ => Num::one(),
        },
        ExprKind::Sum(cs) => leading_coef(&cs[0]),
        _ => Num::one(),
    }
}

/// Match `q * log(f)` (including bare `log(f)` with q = 1).
fn as_log_multiple(t: &Expr) -> Option<(Num, Expr)> {
    match t.kind() {
        ExprKind::Call(Func::Log, inner) => Some((Num::one(), inner.clone())),
        ExprKind::Product(cs) if cs.len() == 2 => {
            if let (ExprKind::Number(q), ExprKind::Call(Func::Log, inner)) =
                (cs[0].kind(), cs[1].kind())
            {
                Some((q.clone(), inner.clone()))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Structural constant-multiple match: returns q with `a == q * b` as
/// canonical expressions, or None.
pub fn match_constant_multiple(a: &Expr, b: &Expr) -> Option<Num> {
    if b.is_zero_structural() {
        return None;
    }
    if a.is_zero_structural() {
        return Some(Num::zero());
    }
    let la = leading_coef(a);
    let lb = leading_coef(b);
    if lb.is_zero() {
        return None;
    }
    let q = la / lb;
    if q.is_zero() {
        return None;
    }
    let probe = Expr::sub2(a.clone(), Expr::mul2(Expr::num(q.clone()), b.clone()));
    if probe.is_zero_structural() {
        Some(q)
    } else {
        None
    }
}

// -------------------------------------------------------------- comparisons

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.node_count != other.0.node_count
            || self.0.symbol_bloom != other.0.symbol_bloom
        {
            return false;
        }
        self.0.kind == other.0.kind
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(k: &ExprKind) -> u8 {
            match k {
                ExprKind::Number(_) => 0,
                ExprKind::Symbol(_) => 1,
                ExprKind::Call(..) => 2,
                ExprKind::Pow(..) => 3,
                ExprKind::Product(_) => 4,
                ExprKind::Sum(_) => 5,
            }
        }
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (&self.0.kind, &other.0.kind);
        rank(a).cmp(&rank(b)).then_with(|| match (a, b) {
            (ExprKind::Number(x), ExprKind::Number(y)) => x.cmp(y),
            (ExprKind::Symbol(x), ExprKind::Symbol(y)) => x.cmp(y),
            (ExprKind::Call(f, x), ExprKind::Call(g, y)) => f.cmp(g).then_with(|| x.cmp(y)),
            (ExprKind::Pow(x, p), ExprKind::Pow(y, q)) => x.cmp(y).then_with(|| p.cmp(q)),
            (ExprKind::Product(xs), ExprKind::Product(ys))
            | (ExprKind::Sum(xs), ExprKind::Sum(ys)) => xs
                .iter()
                .zip(ys.iter())
                .map(|(x, y)| x.cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or_else(|| xs.len().cmp(&ys.len())),
            _ => unreachable!("rank already discriminated"),
        })
    }
}

// ---------------------------------------------------------------- operators

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add2(self.clone(), rhs.clone())
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub2(self.clone(), rhs.clone())
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul2(self.clone(), rhs.clone())
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div2(self.clone(), rhs.clone())
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg1(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> Expr {
        Expr::coord("theta")
    }

    #[test]
    fn rational_folding_is_exact() {
        let e = Expr::add2(Expr::ratio(1, 3), Expr::ratio(1, 6));
        assert_eq!(e, Expr::ratio(1, 2));
    }

    #[test]
    fn neutral_elements() {
        let x = theta();
        assert_eq!(Expr::mul2(Expr::one(), x.clone()), x);
        assert_eq!(Expr::mul2(Expr::zero(), x.clone()), Expr::zero());
        assert_eq!(Expr::add2(Expr::zero(), x.clone()), x);
        assert_eq!(Expr::powi(x.clone(), 1), x);
        assert_eq!(Expr::powi(x.clone(), 0), Expr::one());
    }

    #[test]
    fn products_flatten_and_merge_bases() {
        let x = theta();
        let e = Expr::mul(vec![x.clone(), Expr::mul2(x.clone(), x.clone())]);
        assert_eq!(e, Expr::powi(x, 3));
    }

    #[test]
    fn like_terms_cancel() {
        let x = theta();
        let e = Expr::add(vec![
            Expr::mul2(Expr::int(2), x.clone()),
            Expr::mul2(Expr::int(-2), x.clone()),
        ]);
        assert!(e.is_zero_structural());
    }

    #[test]
    fn pythagorean_identity_is_structural_zero() {
        let t = theta();
        let e = Expr::add(vec![
            Expr::powi(Expr::sin(t.clone()), 2),
            Expr::powi(Expr::cos(t.clone()), 2),
            Expr::int(-1),
        ]);
        assert!(e.is_zero_structural());
    }

    #[test]
    fn cos_squared_minus_one_normalizes() {
        let t = theta();
        let e = Expr::sub2(Expr::powi(Expr::cos(t.clone()), 2), Expr::one());
        let want = Expr::neg1(Expr::powi(Expr::sin(t), 2));
        assert_eq!(e, want);
    }

    #[test]
    fn product_of_inverse_cancels() {
        let r = Expr::coord("r");
        let e = Expr::mul2(r.clone(), Expr::powi(r.clone(), -1));
        assert!(e.is_one_structural());
        let f = Expr::add2(Expr::one(), Expr::neg1(Expr::div2(Expr::int(2), r.clone())));
        let g = Expr::mul2(f.clone(), Expr::powi(f, -1));
        assert!(g.is_one_structural());
    }

    #[test]
    fn exp_of_log_multiples_folds() {
        let t = theta();
        let s = Expr::sin(t);
        let e = Expr::exp(Expr::mul2(Expr::int(2), Expr::log(s.clone())));
        assert_eq!(e, Expr::powi(s, 2));
    }

    #[test]
    fn exp_of_log_sum_splits() {
        let r = Expr::coord("r");
        let t = theta();
        let arg = Expr::add2(
            Expr::mul2(Expr::int(2), Expr::log(r.clone())),
            Expr::mul2(Expr::int(2), Expr::log(Expr::sin(t.clone()))),
        );
        let e = Expr::exp(arg);
        let want = Expr::mul2(Expr::powi(r, 2), Expr::powi(Expr::sin(t), 2));
        assert_eq!(e, want);
    }

    #[test]
    fn odd_even_parity_normalization() {
        let t = theta();
        assert_eq!(
            Expr::sin(Expr::neg1(t.clone())),
            Expr::neg1(Expr::sin(t.clone()))
        );
        assert_eq!(Expr::cos(Expr::neg1(t.clone())), Expr::cos(t));
    }

    #[test]
    fn numeric_roots_fold_when_exact() {
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::pow_rat(Expr::int(8), Num::new(1.into(), 3.into())), Expr::int(2));
        // 2^(1/2) stays symbolic
        assert!(matches!(Expr::sqrt(Expr::int(2)).kind(), ExprKind::Pow(..)));
    }

    #[test]
    fn nested_pow_safety() {
        let x = theta();
        // (x^(1/2))^2 == x, but (x^2)^(1/2) must stay unfolded.
        assert_eq!(Expr::powi(Expr::sqrt(x.clone()), 2), x);
        let e = Expr::sqrt(Expr::powi(x.clone(), 2));
        assert!(matches!(e.kind(), ExprKind::Pow(..)));
    }

    #[test]
    fn subst_rebuilds_canonically() {
        let t = theta();
        let e = Expr::add2(Expr::powi(Expr::sin(t.clone()), 2), Expr::powi(Expr::cos(t.clone()), 2));
        assert!(e.subst("theta", &Expr::coord("x")).is_one_structural());
    }

    #[test]
    fn free_constants_compare_distinct_from_coords() {
        assert_ne!(Expr::coord("c"), Expr::constant("c"));
        let f = Expr::free_fn("c1", &["x2", "x3"]);
        assert!(f.has_free_functions());
        assert!(f.depends_on("x2"));
    }

    #[test]
    fn match_constant_multiple_detects_scaling() {
        let t = theta();
        let a = Expr::mul2(Expr::int(6), Expr::cos(t.clone()));
        let b = Expr::mul2(Expr::int(2), Expr::cos(t.clone()));
        assert_eq!(match_constant_multiple(&a, &b), Some(Num::from_integer(3.into())));
        assert_eq!(match_constant_multiple(&a, &Expr::sin(t)), None);
    }

    fn send_sync<T: Send + Sync>() {}

    #[test]
    fn exprs_are_send_and_sync() {
        send_sync::<Expr>();
    }
}
