use thiserror::Error;

use super::{Assumptions, Expr, FuncKind, Indep, Jet, Node, Var, MAX_JET_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("total derivative of `{jet}` would exceed jet order {max}")]
pub struct JetOrderError {
    pub jet: String,
    pub max: u8,
}

fn fn_arg_index(v: &Var) -> Option<usize> {
    match v {
        Var::Sym(s) => match s.name() {
            "t" => Some(0),
            "x" => Some(1),
            "y" => Some(2),
            _ => None,
        },
        Var::Jet(j) if *j == Jet::U => Some(3),
        Var::Jet(_) => None,
    }
}

fn raw_diff(e: &Expr, v: &Var) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Sym(s) => match v {
            Var::Sym(w) if w == s => Expr::one(),
            _ => Expr::zero(),
        },
        Node::Jet(j) => match v {
            Var::Jet(k) if k == j => Expr::one(),
            _ => Expr::zero(),
        },
        Node::Fn(f) => match fn_arg_index(v) {
            Some(i) => Expr::func_atom(f.derivative(i)),
            None => Expr::zero(),
        },
        Node::Add(terms) => Expr::add_all(
            terms
                .iter()
                .filter(|t| t.contains_var(v))
                .map(|t| raw_diff(t, v))
                .collect(),
        ),
        Node::Mul(factors) => {
            let mut sum = Vec::new();
            for (i, f) in factors.iter().enumerate() {
                if !f.contains_var(v) {
                    continue;
                }
                let mut prod: Vec<Expr> = factors.clone();
                prod[i] = raw_diff(f, v);
                sum.push(Expr::mul_all(prod));
            }
            Expr::add_all(sum)
        }
        Node::Pow(b, x) => {
            let db = if b.contains_var(v) { Some(raw_diff(b, v)) } else { None };
            if !x.contains_var(v) {
                match db {
                    None => Expr::zero(),
                    Some(db) => x * b.pow(x - Expr::one()) * db,
                }
            } else {
                // d(b^x) = b^x (x' ln b + x b'/b)
                let mut inner = vec![raw_diff(x, v) * b.ln()];
                if let Some(db) = db {
                    inner.push(x * db / b);
                }
                e * Expr::add_all(inner)
            }
        }
        Node::Func(k, a) => {
            if !a.contains_var(v) {
                return Expr::zero();
            }
            let da = raw_diff(a, v);
            let outer = match k {
                FuncKind::Exp => e.clone(),
                FuncKind::Ln => a.recip(),
                FuncKind::Sqrt => (Expr::int(2) * e).recip(),
                FuncKind::Sin => Expr::apply(FuncKind::Cos, a.clone()),
                FuncKind::Cos => -Expr::apply(FuncKind::Sin, a.clone()),
                FuncKind::Tanh => Expr::one() - e.powi(2),
                FuncKind::Arctan => (Expr::one() + a.powi(2)).recip(),
            };
            outer * da
        }
    }
}

impl Expr {
    /// Exact partial derivative; jet coordinates are independent atoms and
    /// opaque function atoms depend on `t, x, y, u`.
    pub fn diff(&self, v: &Var) -> Expr {
        self.diff_with(v, &Assumptions::default())
    }

    pub fn diff_with(&self, v: &Var, asm: &Assumptions) -> Expr {
        raw_diff(self, v).normalize_with(asm)
    }

    pub fn diff_sym(&self, name: &str) -> Expr {
        self.diff(&Var::sym(name))
    }

    /// Total derivative `D_w` over the jet space.
    pub fn total_derivative(&self, w: Indep) -> Result<Expr, JetOrderError> {
        self.total_derivative_with(w, &Assumptions::default())
    }

    pub fn total_derivative_with(&self, w: Indep, asm: &Assumptions) -> Result<Expr, JetOrderError> {
        let mut jets = self.jets();
        if let Some(j) = jets.iter().find(|j| j.order() >= MAX_JET_ORDER) {
            return Err(JetOrderError {
                jet: j.name(),
                max: MAX_JET_ORDER,
            });
        }
        if !self.fn_atoms().is_empty() {
            jets.insert(Jet::U);
        }
        let mut terms = vec![raw_diff(self, &Var::indep(w))];
        for j in jets {
            let v = Var::Jet(j);
            let d = raw_diff(self, &v);
            terms.push(d * Expr::jet(j.bump(w)));
        }
        Ok(Expr::add_all(terms).normalize_with(asm))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::FnAtom;

    #[test]
    fn polynomial_and_chain_rule() {
        let x = Expr::sym("x");
        let y = Expr::sym("y");
        let e = x.powi(2) * y.clone();
        assert_eq!(e.diff_sym("x"), (Expr::int(2) * x.clone() * y).normalize());
        let w = Expr::sym("w");
        let th = Expr::apply(FuncKind::Tanh, w.clone());
        let d = th.powi(2).diff_sym("w");
        let expected = (Expr::int(2) * th.clone() * (Expr::one() - th.powi(2))).normalize();
        assert!((d - expected).normalize().is_zero_const());
    }

    #[test]
    fn symbolic_power_rule() {
        let n = Expr::sym("n");
        let d = Expr::u().pow(n.clone()).diff(&Var::u());
        let expected = (n.clone() * Expr::u().pow(n - Expr::one())).normalize();
        assert_eq!(d, expected);
    }

    #[test]
    fn total_derivative_examples() {
        let u = Expr::u();
        let x = Expr::sym("x");
        assert_eq!(
            u.powi(2).total_derivative(Indep::X).unwrap(),
            (Expr::int(2) * u.clone() * Expr::u_of("x")).normalize()
        );
        let q = -u.clone() - x.clone() * Expr::u_of("x");
        let d = q.total_derivative(Indep::X).unwrap();
        let expected = (Expr::int(-2) * Expr::u_of("x") - x.clone() * Expr::u_of("xx")).normalize();
        assert_eq!(d, expected);
        let e = x.clone() * Expr::u_of("y");
        assert_eq!(
            e.total_derivative(Indep::T).unwrap(),
            (x * Expr::u_of("ty")).normalize()
        );
    }

    #[test]
    fn total_derivative_rejects_third_order() {
        assert!(Expr::u_of("xxy").total_derivative(Indep::X).is_err());
    }

    #[test]
    fn function_atoms_follow_u() {
        let xi = Expr::func_atom(FnAtom::new("xi"));
        let d = xi.total_derivative(Indep::X).unwrap();
        let expected = (Expr::func_atom(FnAtom::new("xi").derivative(1))
            + Expr::func_atom(FnAtom::new("xi").derivative(3)) * Expr::u_of("x"))
        .normalize();
        assert_eq!(d, expected);
    }
}
