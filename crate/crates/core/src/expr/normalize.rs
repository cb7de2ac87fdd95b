//! Canonical-form engine.
//!
//! Every expression is expanded into a sum of terms `c * prod(base^exp)`
//! where `c` is an exact rational, each base is an atom (symbol, jet,
//! opaque function, elementary function application, or a non-expandable
//! sum/product) and each exponent is itself a normalized expression. Sums
//! raised to positive integer powers are multiplied out; sums raised to
//! negative integer powers are scaled so their leading coefficient is 1.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, FuncKind, Node, Rational};

/// Largest positive integer power of a sum that gets multiplied out.
const MAX_EXPAND: i64 = 24;

/// Symbols (and `u`) assumed strictly positive. Enables power and logarithm
/// laws that only hold on the positive reals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assumptions {
    positive: BTreeSet<String>,
}

impl Assumptions {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn positive<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Assumptions {
            positive: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn with(mut self, name: &str) -> Self {
        self.positive.insert(name.to_string());
        self
    }

    pub fn union(&self, other: &Assumptions) -> Assumptions {
        Assumptions {
            positive: self.positive.union(&other.positive).cloned().collect(),
        }
    }

    pub fn is_positive_name(&self, name: &str) -> bool {
        self.positive.contains(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.positive.iter().map(String::as_str)
    }

    /// Sufficient (not necessary) test for strict positivity.
    pub fn is_known_positive(&self, e: &Expr) -> bool {
        match e.node() {
            Node::Const(c) => c.is_positive(),
            Node::Sym(s) => self.is_positive_name(s.name()),
            Node::Jet(j) => j.order() == 0 && self.is_positive_name("u"),
            Node::Fn(_) => false,
            Node::Add(v) | Node::Mul(v) => v.iter().all(|c| self.is_known_positive(c)),
            Node::Pow(b, _) => self.is_known_positive(b),
            Node::Func(FuncKind::Exp, _) => true,
            Node::Func(FuncKind::Sqrt, a) => self.is_known_positive(a),
            Node::Func(_, _) => false,
        }
    }
}

pub(crate) type Mono = Vec<(Expr, Expr)>;

/// Expanded sum of monomials with exact rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Poly {
    pub terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn monomial(mono: Mono, c: Rational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn atom(base: Expr) -> Self {
        Poly::monomial(vec![(base, Expr::one())], Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Mono, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, mono: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_owned(&mut self, other: Poly) {
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-Rational::one())
    }

    pub fn mul(&self, other: &Poly, asm: &Assumptions) -> Poly {
        let mut out = Poly::zero();
        if self.is_zero() || other.is_zero() {
            return out;
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let c = c1 * c2;
                if m1.is_empty() {
                    out.add_term(m2.clone(), c);
                    continue;
                }
                if m2.is_empty() {
                    out.add_term(m1.clone(), c);
                    continue;
                }
                if let Some(m) = merge_simple(m1, m2) {
                    out.add_term(m, c);
                } else {
                    let mut factors = m1.clone();
                    factors.extend(m2.iter().cloned());
                    out.add_owned(build_term(c, factors, asm));
                }
            }
        }
        out
    }

    pub fn pow_int(&self, k: u32, asm: &Assumptions) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base, asm);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base, asm);
            }
        }
        result
    }

    /// Coefficient of the first term in canonical order.
    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.terms.values().next()
    }
}

/// Fast path for multiplying two monomials whose factors are plain atoms
/// raised to rational powers and never need canonical fix-ups.
fn merge_simple(m1: &Mono, m2: &Mono) -> Option<Mono> {
    let simple = |m: &Mono| {
        m.iter()
            .all(|(b, e)| matches!(b.node(), Node::Sym(_) | Node::Jet(_) | Node::Fn(_)) && e.as_const().is_some())
    };
    if !simple(m1) || !simple(m2) {
        return None;
    }
    let mut out: Mono = Vec::with_capacity(m1.len() + m2.len());
    let (mut i, mut j) = (0, 0);
    while i < m1.len() || j < m2.len() {
        if j >= m2.len() || (i < m1.len() && m1[i].0 < m2[j].0) {
            out.push(m1[i].clone());
            i += 1;
        } else if i >= m1.len() || m2[j].0 < m1[i].0 {
            out.push(m2[j].clone());
            j += 1;
        } else {
            let s = m1[i].1.as_const().unwrap() + m2[j].1.as_const().unwrap();
            if !s.is_zero() {
                out.push((m1[i].0.clone(), Expr::constant(s)));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

fn add_exponents(a: &Expr, b: &Expr, asm: &Assumptions) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x + y),
        _ => normalize_with(&Expr::add_all(vec![a.clone(), b.clone()]), asm),
    }
}

fn mul_exponents(a: &Expr, b: &Expr, asm: &Assumptions) -> Expr {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Expr::constant(x * y),
        _ => normalize_with(&Expr::mul_all(vec![a.clone(), b.clone()]), asm),
    }
}

fn rational_pow(c: &Rational, k: i64) -> Option<Rational> {
    if c.is_zero() && k < 0 {
        return None;
    }
    let kk = i32::try_from(k).ok()?;
    Some(num_traits::pow::Pow::pow(c, kk))
}

fn exact_root(n: &BigInt, q: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(q);
    (num_traits::pow::Pow::pow(&r, q) == *n).then_some(r)
}

/// `c^(p/q)` as an exact rational when `c > 0` is a perfect `q`-th power.
fn rational_root_pow(c: &Rational, e: &Rational) -> Option<Rational> {
    if !c.is_positive() {
        return None;
    }
    let q = e.denom().to_u32()?;
    let num = exact_root(c.numer(), q)?;
    let den = exact_root(c.denom(), q)?;
    let root = Rational::new(num, den);
    rational_pow(&root, e.numer().to_i64()?)
}

fn is_exp(e: &Expr) -> bool {
    matches!(e.node(), Node::Func(FuncKind::Exp, _))
}

/// Assemble `coeff * prod(factors)` into canonical form.
pub(crate) fn build_term(coeff: Rational, factors: Vec<(Expr, Expr)>, asm: &Assumptions) -> Poly {
    if coeff.is_zero() {
        return Poly::zero();
    }
    let mut coeff = coeff;
    let mut group: BTreeMap<Expr, Expr> = BTreeMap::new();
    let mut pending = factors;
    let mut expansions: Vec<(Expr, u32)> = Vec::new();
    let mut extra = Poly::one();

    loop {
        for (b, e) in pending.drain(..) {
            match group.get_mut(&b) {
                Some(old) => *old = add_exponents(old, &e, asm),
                None => {
                    group.insert(b, e);
                }
            }
        }
        group.retain(|_, e| !e.is_zero_const());

        let mut next: Vec<(Expr, Expr)> = Vec::new();

        // exponentials collapse into a single exp(...) factor
        let exps: Vec<Expr> = group.keys().filter(|b| is_exp(b)).cloned().collect();
        let needs_exp_merge = exps.len() > 1 || exps.iter().any(|b| !group[b].is_one_const());
        if needs_exp_merge {
            let mut arg = Poly::zero();
            for b in &exps {
                let e = group.remove(b).unwrap();
                if let Node::Func(_, a) = b.node() {
                    let term = to_poly(a, asm).mul(&to_poly(&e, asm), asm);
                    arg.add_owned(term);
                }
            }
            extra = extra.mul(&exp_poly(&arg, asm), asm);
        }

        let keys: Vec<Expr> = group.keys().cloned().collect();
        for b in keys {
            let e = group[&b].clone();
            match b.node() {
                Node::Const(c) => {
                    if c.is_one() {
                        group.remove(&b);
                    } else if c.is_zero() {
                        if e.as_const().is_some() {
                            group.insert(b, Expr::int(-1));
                        }
                    } else if let Some(k) = e.as_integer() {
                        if let Some(v) = rational_pow(c, k) {
                            coeff *= v;
                            group.remove(&b);
                        }
                    } else if let Some(r) = e.as_const() {
                        if let Some(v) = rational_root_pow(c, r) {
                            coeff *= v;
                            group.remove(&b);
                        }
                    }
                }
                Node::Add(_) => {
                    if let Some(k) = e.as_integer() {
                        if k > 0 && k <= MAX_EXPAND {
                            group.remove(&b);
                            expansions.push((b, k as u32));
                        } else if k < 0 {
                            let bp = to_poly(&b, asm);
                            let lead = bp.leading_coeff().cloned().unwrap_or_else(Rational::one);
                            if !lead.is_one() {
                                group.remove(&b);
                                coeff *= rational_pow(&lead, k).unwrap();
                                let scaled = from_poly(&bp.scale(&lead.recip()));
                                next.push((scaled, e));
                            }
                        }
                    }
                }
                Node::Pow(z, _) if z.is_zero_const() => {
                    if e.as_integer().is_some_and(|k| k > 0) {
                        group.insert(b, Expr::one());
                    }
                }
                Node::Mul(_) | Node::Pow(..) => {
                    if e.as_integer().is_some() {
                        let bp = to_poly(&b, asm);
                        let opaque = bp.single_term().is_some_and(|(m, _)| m.len() == 1 && m[0].0 == b);
                        if !opaque {
                            group.remove(&b);
                            extra = extra.mul(&pow_poly(bp, e, asm), asm);
                        }
                    }
                }
                _ => {}
            }
        }
        if next.is_empty() {
            break;
        }
        pending = next;
    }

    let mono: Mono = group.into_iter().collect();
    let mut p = Poly::monomial(mono, coeff);
    for (b, k) in expansions {
        let bp = to_poly(&b, asm);
        p = p.mul(&bp.pow_int(k, asm), asm);
    }
    if extra.as_constant().map(|c| c.is_one()) != Some(true) {
        p = p.mul(&extra, asm);
    }
    p
}

/// `exp(arg)`: terms of the form `f * ln(X)` become `X^f`.
fn exp_poly(arg: &Poly, asm: &Assumptions) -> Poly {
    let mut rest = Poly::zero();
    let mut out = Poly::one();
    for (mono, c) in &arg.terms {
        let ln_positions: Vec<usize> = mono
            .iter()
            .enumerate()
            .filter(|(_, (b, e))| matches!(b.node(), Node::Func(FuncKind::Ln, _)) && e.is_one_const())
            .map(|(i, _)| i)
            .collect();
        if ln_positions.len() == 1 {
            let i = ln_positions[0];
            let inner = match mono[i].0.node() {
                Node::Func(_, a) => a.clone(),
                _ => unreachable!(),
            };
            let mut others = mono.clone();
            others.remove(i);
            let power = from_poly(&Poly::monomial(others, c.clone()));
            out = out.mul(&pow_poly(to_poly(&inner, asm), power, asm), asm);
        } else {
            rest.add_term(mono.clone(), c.clone());
        }
    }
    if !rest.is_zero() {
        let e = Expr::apply(FuncKind::Exp, from_poly(&rest));
        out = out.mul(&Poly::atom(e), asm);
    }
    out
}

fn ln_poly(arg: Poly, asm: &Assumptions) -> Poly {
    if let Some(c) = arg.as_constant() {
        if c.is_one() {
            return Poly::zero();
        }
        return Poly::atom(Expr::apply(FuncKind::Ln, Expr::constant(c)));
    }
    if let Some((mono, c)) = arg.single_term() {
        if c.is_one() && mono.len() == 1 {
            let (b, e) = &mono[0];
            if let Node::Func(FuncKind::Exp, a) = b.node() {
                if e.is_one_const() {
                    return to_poly(a, asm);
                }
            }
            if e.is_one_const() {
                return Poly::atom(Expr::apply(FuncKind::Ln, b.clone()));
            }
        }
        if c.is_positive() && mono.iter().all(|(b, _)| asm.is_known_positive(b)) {
            let mut out = Poly::zero();
            if !c.is_one() {
                out.add_term(
                    vec![(Expr::apply(FuncKind::Ln, Expr::constant(c.clone())), Expr::one())],
                    Rational::one(),
                );
            }
            for (b, e) in mono {
                let lb = ln_poly(to_poly(b, asm), asm);
                out.add_owned(lb.mul(&to_poly(e, asm), asm));
            }
            return out;
        }
    }
    Poly::atom(Expr::apply(FuncKind::Ln, from_poly(&arg)))
}

fn odd_even(kind: FuncKind, arg: Poly) -> Poly {
    let negative_lead = arg.leading_coeff().map(|c| c.is_negative()).unwrap_or(false);
    match kind {
        FuncKind::Sin | FuncKind::Tanh | FuncKind::Arctan => {
            if arg.is_zero() {
                return Poly::zero();
            }
            if negative_lead {
                Poly::atom(Expr::apply(kind, from_poly(&arg.neg()))).neg()
            } else {
                Poly::atom(Expr::apply(kind, from_poly(&arg)))
            }
        }
        FuncKind::Cos => {
            if arg.is_zero() {
                return Poly::one();
            }
            let a = if negative_lead { arg.neg() } else { arg };
            Poly::atom(Expr::apply(kind, from_poly(&a)))
        }
        _ => unreachable!(),
    }
}

/// Every negative power of zero normalizes to the single atom `0^-1`.
fn zero_pole() -> Poly {
    Poly::atom(Expr::new(Node::Pow(Expr::zero(), Expr::int(-1))))
}

fn is_zero_pole(b: &Expr) -> bool {
    matches!(b.node(), Node::Pow(z, _) if z.is_zero_const())
}

fn pow_poly(base: Poly, exponent: Expr, asm: &Assumptions) -> Poly {
    if exponent.is_zero_const() {
        return Poly::one();
    }
    if exponent.is_one_const() {
        return base;
    }
    if let Some(k) = exponent.as_integer() {
        if base.is_zero() {
            return if k > 0 { Poly::zero() } else { zero_pole() };
        }
        if let Some((mono, c)) = base.single_term() {
            let Some(ck) = rational_pow(c, k) else {
                return Poly::atom(from_poly(&base).pow(exponent));
            };
            let factors = mono
                .iter()
                .map(|(b, e)| (b.clone(), mul_exponents(e, &exponent, asm)))
                .collect();
            return build_term(ck, factors, asm);
        }
        if k > 0 && k <= MAX_EXPAND {
            return base.pow_int(k as u32, asm);
        }
        return build_term(Rational::one(), vec![(from_poly(&base), exponent)], asm);
    }
    if base.is_zero() {
        match exponent.as_const() {
            Some(c) if c.is_positive() => return Poly::zero(),
            Some(_) => return zero_pole(),
            None => return Poly::atom(Expr::zero().pow(exponent)),
        }
    }
    if let Some((mono, c)) = base.single_term() {
        if c.is_one() && mono.len() == 1 && mono[0].1.is_one_const() {
            return build_term(Rational::one(), vec![(mono[0].0.clone(), exponent)], asm);
        }
        if c.is_positive() && mono.iter().all(|(b, _)| asm.is_known_positive(b)) {
            let mut factors: Vec<(Expr, Expr)> = mono
                .iter()
                .map(|(b, e)| (b.clone(), mul_exponents(e, &exponent, asm)))
                .collect();
            factors.push((Expr::constant(c.clone()), exponent));
            return build_term(Rational::one(), factors, asm);
        }
    }
    build_term(Rational::one(), vec![(from_poly(&base), exponent)], asm)
}

pub(crate) fn to_poly(e: &Expr, asm: &Assumptions) -> Poly {
    match e.node() {
        Node::Const(c) => Poly::constant(c.clone()),
        Node::Sym(_) | Node::Jet(_) | Node::Fn(_) => Poly::atom(e.clone()),
        Node::Add(v) => {
            let mut p = Poly::zero();
            for c in v {
                p.add_owned(to_poly(c, asm));
            }
            p
        }
        Node::Mul(v) => {
            let mut p = Poly::one();
            for c in v {
                let q = to_poly(c, asm);
                if q.is_zero() {
                    return Poly::zero();
                }
                p = p.mul(&q, asm);
            }
            p
        }
        Node::Pow(b, x) => {
            let nx = normalize_with(x, asm);
            pow_poly(to_poly(b, asm), nx, asm)
        }
        Node::Func(kind, a) => {
            let pa = to_poly(a, asm);
            match kind {
                FuncKind::Exp => {
                    if pa.is_zero() {
                        Poly::one()
                    } else {
                        exp_poly(&pa, asm)
                    }
                }
                FuncKind::Ln => ln_poly(pa, asm),
                FuncKind::Sqrt => pow_poly(pa, Expr::rational(1, 2), asm),
                k => odd_even(*k, pa),
            }
        }
    }
}

fn factor_expr(b: &Expr, e: &Expr) -> Expr {
    if e.is_one_const() {
        b.clone()
    } else {
        b.pow(e.clone())
    }
}

pub(crate) fn mono_expr(mono: &Mono, c: &Rational) -> Expr {
    let mut factors: Vec<Expr> = Vec::with_capacity(mono.len() + 1);
    if !c.is_one() || mono.is_empty() {
        factors.push(Expr::constant(c.clone()));
    }
    factors.extend(mono.iter().map(|(b, e)| factor_expr(b, e)));
    Expr::mul_all(factors)
}

pub(crate) fn from_poly(p: &Poly) -> Expr {
    if p.is_zero() {
        return Expr::zero();
    }
    // a division by zero anywhere makes the whole sum undefined
    if p.terms.keys().flatten().any(|(b, _)| is_zero_pole(b)) {
        return Expr::new(Node::Pow(Expr::zero(), Expr::int(-1)));
    }
    Expr::add_all(p.terms.iter().map(|(m, c)| mono_expr(m, c)).collect())
}

pub fn normalize_with(e: &Expr, asm: &Assumptions) -> Expr {
    from_poly(&to_poly(e, asm))
}

impl Expr {
    /// Canonical form with no positivity assumptions.
    pub fn normalize(&self) -> Expr {
        normalize_with(self, &Assumptions::default())
    }

    pub fn normalize_with(&self, asm: &Assumptions) -> Expr {
        normalize_with(self, asm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn x() -> Expr {
        Expr::sym("x")
    }
    fn y() -> Expr {
        Expr::sym("y")
    }

    #[test]
    fn identity_and_binomial() {
        assert_eq!((x() + Expr::zero()).normalize(), x());
        let lhs = (x() + y()).powi(2) - x().powi(2) - Expr::int(2) * x() * y() - y().powi(2);
        assert!(lhs.normalize().is_zero_const());
    }

    #[test]
    fn constants_fold_to_lowest_terms() {
        let e = Expr::rational(-3, 6);
        assert_eq!(e.normalize(), Expr::rational(-1, 2));
        let e = Expr::int(4).pow(Expr::rational(1, 2));
        assert_eq!(e.normalize(), Expr::int(2));
    }

    #[test]
    fn symbolic_exponents_combine() {
        let u = Expr::u();
        let n = Expr::sym("n");
        let e = u.pow(n.clone()) * u.recip() - u.pow(n - Expr::one());
        assert!(e.normalize().is_zero_const());
    }

    #[test]
    fn exp_ln_rules() {
        let u = Expr::u();
        assert_eq!(u.ln().exp().normalize(), u);
        assert_eq!(u.exp().ln().normalize(), u);
        let e = (u.exp() * u.exp()).normalize();
        assert_eq!(e, (Expr::int(2) * u.clone()).exp().normalize());
        // ln(u^n) only splits under positivity
        let n = Expr::sym("n");
        let l = u.pow(n.clone()).ln();
        assert_ne!(l.normalize(), (n.clone() * u.ln()).normalize());
        let asm = Assumptions::positive(["u"]);
        assert_eq!(l.normalize_with(&asm), (n * u.ln()).normalize());
    }

    #[test]
    fn sum_denominators_are_primitive() {
        let t = Expr::sym("t");
        let q = Expr::sym("q");
        let a = (Expr::int(4) * t.clone() + Expr::int(2) * q.clone()).recip();
        let b = (Expr::int(2) * t + q).recip() / Expr::int(2);
        assert!((a - b).normalize().is_zero_const());
    }

    #[test]
    fn sqrt_squares_back() {
        let s = (x() + Expr::one()).sqrt();
        assert_eq!((s.clone() * s).normalize(), (x() + Expr::one()).normalize());
    }

    #[test]
    fn odd_functions_pull_sign() {
        let e = Expr::apply(FuncKind::Tanh, -x()) + Expr::apply(FuncKind::Tanh, x());
        assert!(e.normalize().is_zero_const());
        let c = Expr::apply(FuncKind::Cos, -x()) - Expr::apply(FuncKind::Cos, x());
        assert!(c.normalize().is_zero_const());
    }

    #[test]
    fn idempotent_on_mixed_expression() {
        let u = Expr::u();
        let e = (u.clone() + x()).powi(-2) * (y() * Expr::rational(3, 7)).exp() + u.pow(Expr::sym("n"))
            - (x() * y()).sqrt();
        let n1 = e.normalize();
        assert_eq!(n1.normalize(), n1);
    }

    #[test]
    fn division_by_zero_has_one_form() {
        let pole = Expr::zero().powi(-1).normalize();
        for e in [
            Expr::zero().powi(-2),
            Expr::zero().pow(Expr::rational(-1, 3)) * Expr::rational(1, 2),
            x() + Expr::zero().powi(-1),
            Expr::zero().powi(-1).powi(3),
        ] {
            assert_eq!(e.normalize(), pole, "{e}");
        }
        assert_eq!(pole.to_string(), "1/0");
    }

    #[test]
    fn integer_powers_of_products_distribute() {
        let half = x() * Expr::rational(1, 2);
        assert_eq!(
            half.sqrt().powi(4).normalize(),
            (x().powi(2) / Expr::int(4)).normalize()
        );
        assert_eq!(x().sqrt().sqrt().powi(4).normalize(), x());
    }
}
