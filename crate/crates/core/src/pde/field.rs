use std::fmt;

use serde::Serialize;

use crate::expr::{Assumptions, Expr, FnAtom, Indep, Node, Var};

/// Infinitesimal generator `tau*d_t + xi*d_x + eta*d_y + phi*d_u`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VectorField {
    pub tau: Expr,
    pub xi: Expr,
    pub eta: Expr,
    pub phi: Expr,
}

/// Names of the infinitesimals in `(t, x, y, u)` order.
pub const COMPONENT_NAMES: [&str; 4] = ["tau", "xi", "eta", "phi"];

impl VectorField {
    pub fn new(tau: Expr, xi: Expr, eta: Expr, phi: Expr) -> Self {
        VectorField {
            tau: tau.normalize(),
            xi: xi.normalize(),
            eta: eta.normalize(),
            phi: phi.normalize(),
        }
    }

    pub fn from_components(c: [Expr; 4]) -> Self {
        let [tau, xi, eta, phi] = c;
        VectorField::new(tau, xi, eta, phi)
    }

    pub fn zero() -> Self {
        VectorField::new(Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero())
    }

    /// Unit field along one coordinate: 0 = t, 1 = x, 2 = y, 3 = u.
    pub fn coordinate(axis: usize) -> Self {
        let mut c = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
        c[axis] = Expr::one();
        VectorField::from_components(c)
    }

    /// Generator with unknown function atoms; `tau` fixed to 1 when asked.
    pub fn unknown(tau_fixed: bool) -> Self {
        let f = |n: &str| Expr::func_atom(FnAtom::new(n));
        VectorField {
            tau: if tau_fixed { Expr::one() } else { f("tau") },
            xi: f("xi"),
            eta: f("eta"),
            phi: f("phi"),
        }
    }

    pub fn components(&self) -> [&Expr; 4] {
        [&self.tau, &self.xi, &self.eta, &self.phi]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        VectorField {
            tau: f(&self.tau),
            xi: f(&self.xi),
            eta: f(&self.eta),
            phi: f(&self.phi),
        }
    }

    pub fn normalize_with(&self, asm: &Assumptions) -> Self {
        self.map(|e| e.normalize_with(asm))
    }

    pub fn scale(&self, c: &Expr) -> Self {
        self.map(|e| (c * e).normalize())
    }

    pub fn add(&self, o: &VectorField) -> Self {
        VectorField::new(
            &self.tau + &o.tau,
            &self.xi + &o.xi,
            &self.eta + &o.eta,
            &self.phi + &o.phi,
        )
    }

    pub fn sub(&self, o: &VectorField) -> Self {
        VectorField::new(
            &self.tau - &o.tau,
            &self.xi - &o.xi,
            &self.eta - &o.eta,
            &self.phi - &o.phi,
        )
    }

    pub fn combination(basis: &[VectorField], coeffs: &[Expr]) -> Self {
        let mut c: [Vec<Expr>; 4] = Default::default();
        for (v, k) in basis.iter().zip(coeffs) {
            for (i, e) in v.components().into_iter().enumerate() {
                c[i].push(k * e);
            }
        }
        let [a, b, d, e] = c.map(Expr::add_all);
        VectorField::new(a, b, d, e)
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|e| e.is_zero_const())
    }

    /// Point symmetry: no jet coordinates beyond `u`.
    pub fn is_point(&self) -> bool {
        self.components().iter().all(|e| e.max_jet_order() == 0)
    }

    /// `v(f) = tau f_t + xi f_x + eta f_y + phi f_u`, normalized.
    pub fn apply(&self, f: &Expr) -> Expr {
        self.apply_with(f, &Assumptions::default())
    }

    pub fn apply_with(&self, f: &Expr, asm: &Assumptions) -> Expr {
        let vars = [
            Var::indep(Indep::T),
            Var::indep(Indep::X),
            Var::indep(Indep::Y),
            Var::u(),
        ];
        let mut terms = Vec::new();
        for (c, v) in self.components().into_iter().zip(vars) {
            if c.is_zero_const() || !f.contains_var(&v) {
                continue;
            }
            terms.push(c * f.diff_with(&v, asm));
        }
        Expr::add_all(terms).normalize_with(asm)
    }

    /// Characteristic `Q = phi - tau u_t - xi u_x - eta u_y`.
    pub fn characteristic(&self) -> Expr {
        (&self.phi - &self.tau * Expr::u_of("t") - &self.xi * Expr::u_of("x") - &self.eta * Expr::u_of("y")).normalize()
    }
}

fn wrap(e: &Expr) -> String {
    match e.node() {
        Node::Add(_) => format!("({e})"),
        _ => e.to_string(),
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (c, d) in self.components().into_iter().zip(["d_t", "d_x", "d_y", "d_u"]) {
            if c.is_zero_const() {
                continue;
            }
            if c.is_one_const() {
                parts.push(d.to_string());
            } else {
                parts.push(format!("{}*{}", wrap(c), d));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        f.write_str(&parts.join(" + ").replace("+ -", "- "))
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_and_display() {
        let x = Expr::sym("x");
        let v = VectorField::new(Expr::zero(), x.clone(), Expr::zero(), -Expr::u());
        assert_eq!(v.apply(&(x.clone() * Expr::u())).normalize(), Expr::zero());
        assert_eq!(v.to_string(), "x*d_x - u*d_u");
        assert_eq!(v.characteristic(), (-Expr::u() - x * Expr::u_of("x")).normalize());
    }
}
