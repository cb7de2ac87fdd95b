use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{Expr, FnAtom, FuncKind, Jet, Node, Rational, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value bound for `{0}`")]
    Unbound(String),
    #[error("domain violation: {0}")]
    Domain(String),
}

/// Numeric assignment for symbols, jet coordinates and opaque function atoms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Point {
    vars: BTreeMap<Var, f64>,
    fns: BTreeMap<FnAtom, f64>,
}

impl Point {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, v: Var, value: f64) -> &mut Self {
        self.vars.insert(v, value);
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        let v = if name == "u" { Var::u() } else { Var::sym(name) };
        self.vars.insert(v, value);
        self
    }

    pub fn with_jet(mut self, j: Jet, value: f64) -> Self {
        self.vars.insert(Var::Jet(j), value);
        self
    }

    pub fn set_fn(&mut self, f: FnAtom, value: f64) -> &mut Self {
        self.fns.insert(f, value);
        self
    }

    pub fn get(&self, v: &Var) -> Option<f64> {
        self.vars.get(v).copied()
    }

    pub fn get_fn(&self, f: &FnAtom) -> Option<f64> {
        self.fns.get(f).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Var, &f64)> {
        self.vars.iter()
    }

    /// Human-readable listing, e.g. `t=0.5, x=-1.25`.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.vars.iter().map(|(v, x)| format!("{}={}", v.name(), x)).collect();
        parts.extend(self.fns.iter().map(|(f, x)| format!("{}={}", f.display_name(), x)));
        parts.join(", ")
    }
}

fn check(v: f64, what: &str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Domain(format!("non-finite value in {what}")))
    }
}

fn real_pow(b: f64, e: f64, int_exp: Option<i64>) -> Result<f64, EvalError> {
    if let Some(k) = int_exp {
        if b == 0.0 && k < 0 {
            return Err(EvalError::Domain("division by zero".into()));
        }
        return check(b.powi(k as i32), "power");
    }
    if b < 0.0 {
        return Err(EvalError::Domain("non-integer power of a negative base".into()));
    }
    if b == 0.0 && e <= 0.0 {
        return Err(EvalError::Domain("zero base with non-positive exponent".into()));
    }
    check(b.powf(e), "power")
}

impl Expr {
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        match self.node() {
            Node::Const(c) => Ok(c.to_f64().unwrap_or(f64::NAN)),
            Node::Sym(s) => p
                .get(&Var::Sym(s.clone()))
                .ok_or_else(|| EvalError::Unbound(s.to_string())),
            Node::Jet(j) => p.get(&Var::Jet(*j)).ok_or_else(|| EvalError::Unbound(j.name())),
            Node::Fn(f) => p.get_fn(f).ok_or_else(|| EvalError::Unbound(f.display_name())),
            Node::Add(v) => {
                let mut s = 0.0;
                for c in v {
                    s += c.eval(p)?;
                }
                check(s, "sum")
            }
            Node::Mul(v) => {
                let mut s = 1.0;
                for c in v {
                    s *= c.eval(p)?;
                }
                check(s, "product")
            }
            Node::Pow(b, e) => {
                let bv = b.eval(p)?;
                let int_exp = e.as_integer().filter(|k| k.abs() < i32::MAX as i64);
                let ev = if int_exp.is_some() { 0.0 } else { e.eval(p)? };
                real_pow(bv, ev, int_exp)
            }
            Node::Func(k, a) => {
                let x = a.eval(p)?;
                let v = match k {
                    FuncKind::Exp => x.exp(),
                    FuncKind::Ln => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain("logarithm of a non-positive value".into()));
                        }
                        x.ln()
                    }
                    FuncKind::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain("square root of a negative value".into()));
                        }
                        x.sqrt()
                    }
                    FuncKind::Sin => x.sin(),
                    FuncKind::Cos => x.cos(),
                    FuncKind::Tanh => x.tanh(),
                    FuncKind::Arctan => x.atan(),
                };
                check(v, k.name())
            }
        }
    }
}

impl Expr {
    /// Value together with a first-order bound on its rounding sensitivity:
    /// sums add magnitudes, products multiply them, and functions add
    /// `|f'(a)|` times the magnitude of their argument.
    pub fn eval_with_magnitude(&self, p: &Point) -> Result<(f64, f64), EvalError> {
        match self.node() {
            Node::Const(_) | Node::Sym(_) | Node::Jet(_) | Node::Fn(_) => {
                let v = self.eval(p)?;
                Ok((v, v.abs()))
            }
            Node::Add(v) => {
                let (mut s, mut m) = (0.0, 0.0);
                for c in v {
                    let (a, b) = c.eval_with_magnitude(p)?;
                    s += a;
                    m += b;
                }
                Ok((check(s, "sum")?, m))
            }
            Node::Mul(v) => {
                let (mut s, mut m) = (1.0, 1.0);
                for c in v {
                    let (a, b) = c.eval_with_magnitude(p)?;
                    s *= a;
                    m *= b;
                }
                Ok((check(s, "product")?, m))
            }
            Node::Pow(b, e) => {
                let (bv, bm) = b.eval_with_magnitude(p)?;
                let (ev, em) = if e.as_const().is_some() {
                    (e.eval(p)?, 0.0)
                } else {
                    e.eval_with_magnitude(p)?
                };
                let v = self.eval(p)?;
                let rel = if bv != 0.0 { bm / bv.abs() } else { 1.0 };
                Ok((v, v.abs() * rel.powf(ev.abs()) * (1.0 + bv.abs().ln().abs() * em)))
            }
            Node::Func(k, a) => {
                let (x, am) = a.eval_with_magnitude(p)?;
                let v = self.eval(p)?;
                let d = match k {
                    FuncKind::Exp => v,
                    FuncKind::Ln => 1.0 / x,
                    FuncKind::Sqrt => 0.5 / v.max(f64::MIN_POSITIVE),
                    FuncKind::Sin => x.cos(),
                    FuncKind::Cos => x.sin(),
                    FuncKind::Tanh => 1.0 - v * v,
                    FuncKind::Arctan => 1.0 / (1.0 + x * x),
                };
                Ok((v, v.abs() + d.abs() * am))
            }
        }
    }
}

/// Exact assignment of rationals; used where ranks must be exact.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExactPoint {
    pub vars: BTreeMap<Var, Rational>,
    pub fns: BTreeMap<FnAtom, Rational>,
}

impl Expr {
    /// Exact rational value, or `None` when undefined, unbound or
    /// irrational.
    pub fn eval_exact(&self, p: &ExactPoint) -> Option<Rational> {
        match self.node() {
            Node::Const(c) => Some(c.clone()),
            Node::Sym(s) => p.vars.get(&Var::Sym(s.clone())).cloned(),
            Node::Jet(j) => p.vars.get(&Var::Jet(*j)).cloned(),
            Node::Fn(f) => p.fns.get(f).cloned(),
            Node::Add(v) => v.iter().map(|c| c.eval_exact(p)).sum(),
            Node::Mul(v) => v.iter().map(|c| c.eval_exact(p)).product(),
            Node::Pow(b, e) => {
                let bv = b.eval_exact(p)?;
                let ev = e.eval_exact(p)?;
                if !ev.is_integer() {
                    let r = Expr::constant(bv).pow(Expr::constant(ev)).normalize();
                    return r.as_const().cloned();
                }
                let k = ev.to_integer().to_i32()?;
                if bv.is_zero() && k < 0 {
                    return None;
                }
                Some(num_traits::pow::Pow::pow(&bv, k))
            }
            Node::Func(k, a) => {
                let av = a.eval_exact(p)?;
                match k {
                    FuncKind::Exp if av.is_zero() => Some(Rational::from_integer(1.into())),
                    FuncKind::Ln if av == Rational::from_integer(1.into()) => Some(Rational::zero()),
                    FuncKind::Sqrt if !av.is_negative() => Expr::apply(FuncKind::Sqrt, Expr::constant(av))
                        .normalize()
                        .as_const()
                        .cloned(),
                    FuncKind::Sin | FuncKind::Tanh | FuncKind::Arctan if av.is_zero() => Some(av),
                    FuncKind::Cos if av.is_zero() => Some(Rational::from_integer(1.into())),
                    _ => None,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_elementary_functions() {
        let x = Expr::sym("x");
        let e = x.exp().ln() + x.sqrt() * x.sqrt() - Expr::int(2) * x.clone();
        let p = Point::new().with("x", 1.7);
        assert!(e.eval(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reports_domain_and_unbound() {
        let x = Expr::sym("x");
        let p = Point::new().with("x", -1.0);
        assert!(matches!(x.ln().eval(&p), Err(EvalError::Domain(_))));
        assert!(matches!(Expr::sym("y").eval(&p), Err(EvalError::Unbound(_))));
        assert!(matches!(Expr::zero().recip().eval(&p), Err(EvalError::Domain(_))));
    }
}
