//! Sparse multivariate polynomials over Q in named parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::expr::{Expr, Node, Rational};

/// Sorted `(variable, exponent)` pairs with positive exponents.
pub type Monomial = Vec<(String, u32)>;

#[derive(Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct MPoly {
    terms: BTreeMap<Monomial, Rational>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (v, e) in b {
        *out.entry(v.clone()).or_insert(0) += e;
    }
    out.into_iter().collect()
}

fn mono_div(a: &Monomial, b: &Monomial) -> Option<Monomial> {
    let mut out: BTreeMap<String, u32> = a.iter().cloned().collect();
    for (v, e) in b {
        let slot = out.get_mut(v)?;
        if *slot < *e {
            return None;
        }
        *slot -= e;
        if *slot == 0 {
            out.remove(v);
        }
    }
    Some(out.into_iter().collect())
}

fn degree(m: &Monomial) -> u32 {
    m.iter().map(|(_, e)| e).sum()
}

fn exponent(m: &Monomial, v: &str) -> u32 {
    m.iter().find(|(n, _)| n == v).map_or(0, |(_, e)| *e)
}

/// Graded lexicographic monomial order (variables ordered by name).
fn grlex_cmp(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    degree(a).cmp(&degree(b)).then_with(|| {
        let mut names: Vec<&str> = a.iter().chain(b.iter()).map(|(n, _)| n.as_str()).collect();
        names.sort();
        names.dedup();
        for n in names {
            let o = exponent(a, n).cmp(&exponent(b, n));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    })
}

impl MPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        MPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = MPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = MPoly::zero();
        p.terms.insert(vec![(name.to_string(), 1)], Rational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&Vec::new()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn variables(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .terms
            .keys()
            .flat_map(|m| m.iter().map(|(n, _)| n.clone()))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, k: &Rational) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, o: &MPoly) -> MPoly {
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        let mut out = MPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        out
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|(a, _), (b, _)| grlex_cmp(a, b))
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        let mut r = self.clone();
        let mut q = MPoly::zero();
        while let Some((rm, rc)) = r.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let tm = mono_div(&rm, &dm)?;
            let tc = rc / dc.clone();
            let t = MPoly {
                terms: std::iter::once((tm, tc)).collect(),
            };
            r = r.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    pub fn eval(&self, values: &BTreeMap<String, f64>) -> Option<f64> {
        let mut s = 0.0;
        for (m, c) in &self.terms {
            let mut t = c.to_f64()?;
            for (v, e) in m {
                t *= values.get(v)?.powi(*e as i32);
            }
            s += t;
        }
        Some(s)
    }

    pub fn eval_rational(&self, values: &BTreeMap<String, Rational>) -> Option<Rational> {
        let mut s = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m {
                t *= num_traits::pow::Pow::pow(values.get(v)?, *e);
            }
            s += t;
        }
        Some(s)
    }

    /// Leading coefficient in the internal term order; used to pick a sign
    /// convention.
    pub fn first_coeff(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    /// Read a normalized expression that is polynomial in `vars`.
    pub fn from_expr(e: &Expr, vars: &[String]) -> Option<MPoly> {
        match e.node() {
            Node::Const(c) => Some(MPoly::constant(c.clone())),
            Node::Sym(s) if vars.iter().any(|v| v == s.name()) => Some(MPoly::var(s.name())),
            Node::Add(v) => {
                let mut out = MPoly::zero();
                for c in v {
                    out = out.add(&MPoly::from_expr(c, vars)?);
                }
                Some(out)
            }
            Node::Mul(v) => {
                let mut out = MPoly::one();
                for c in v {
                    out = out.mul(&MPoly::from_expr(c, vars)?);
                }
                Some(out)
            }
            Node::Pow(b, x) => {
                let k = x.as_integer()?;
                if k < 0 {
                    return None;
                }
                let base = MPoly::from_expr(b, vars)?;
                let mut out = MPoly::one();
                for _ in 0..k {
                    out = out.mul(&base);
                }
                Some(out)
            }
            _ => None,
        }
    }

    pub fn to_expr(&self) -> Expr {
        let terms: Vec<Expr> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut f = vec![Expr::constant(c.clone())];
                for (v, e) in m {
                    f.push(Expr::sym(v).powi(*e as i64));
                }
                Expr::mul_all(f)
            })
            .collect();
        Expr::add_all(terms).normalize()
    }

    /// Make the first coefficient positive; returns the sign applied.
    pub fn sign_normalized(&self) -> (MPoly, bool) {
        match self.first_coeff() {
            Some(c) if c.is_negative() => (self.neg(), true),
            _ => (self.clone(), false),
        }
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn v(n: &str) -> MPoly {
        MPoly::var(n)
    }

    #[test]
    fn exact_division() {
        let a = v("a").add(&MPoly::one());
        let b = v("b").sub(&v("a"));
        let p = a.mul(&b).mul(&b);
        assert_eq!(p.div_exact(&b).unwrap(), a.mul(&b));
        assert!(p.div_exact(&v("c")).is_none());
        assert_eq!(p.scale(&rat(3, 2)).div_exact(&p).unwrap(), MPoly::constant(rat(3, 2)));
    }

    #[test]
    fn expr_round_trip() {
        let vars = vec!["v".to_string()];
        let e = (Expr::sym("v").powi(2) * Expr::int(3) - Expr::one()).normalize();
        let p = MPoly::from_expr(&e, &vars).unwrap();
        assert_eq!(p.to_expr(), e);
        assert!(MPoly::from_expr(&Expr::sym("x"), &vars).is_none());
    }
}
