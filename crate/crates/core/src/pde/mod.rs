//! The evolution-equation family, prolongation of generators, the
//! invariance condition and the determining system.

mod determining;
mod field;
mod model;
mod span;

pub use determining::{DeterminingEquation, DeterminingSystem};
pub use field::{VectorField, COMPONENT_NAMES};
pub use model::{coeff_jet_monomial, ModelError, PdeModel, BUILTIN_MODELS, COEFF_NAMES};
pub use span::{compare_spans, linear_form, SpanComparison};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Assumptions, Expr, Indep, Jet, JetOrderError, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error(transparent)]
    JetOrder(#[from] JetOrderError),
    #[error("generator is not a point symmetry (its coefficients contain derivatives of u)")]
    NotPoint,
    #[error("on-shell substitution left `{0}` in the expression")]
    ResidualTimeJet(String),
    #[error("expression is not polynomial in the jet coordinate `{0}`")]
    NotPolynomialInJets(String),
}

/// Extended coefficients `phi^J` for the jets of the equation.
#[derive(Clone, Debug, PartialEq)]
pub struct Prolongation {
    pub coeffs: BTreeMap<Jet, Expr>,
}

impl Prolongation {
    pub fn get(&self, j: Jet) -> &Expr {
        &self.coeffs[&j]
    }

    pub fn of(&self, suffix: &str) -> &Expr {
        let mut j = Jet::U;
        for c in suffix.chars() {
            j = j.bump(Indep::from_letter(c).expect("jet letter"));
        }
        self.get(j)
    }
}

/// Jets whose extended coefficients are produced by [`prolong`].
pub fn prolonged_jets() -> Vec<Jet> {
    vec![
        Jet::new(1, 0, 0),
        Jet::new(0, 1, 0),
        Jet::new(0, 0, 1),
        Jet::new(0, 2, 0),
        Jet::new(0, 1, 1),
        Jet::new(0, 0, 2),
    ]
}

/// Second prolongation: `phi^J = D_J Q + tau u_Jt + xi u_Jx + eta u_Jy`.
pub fn prolong(v: &VectorField) -> Result<Prolongation, PdeError> {
    prolong_with(v, &Assumptions::default())
}

pub fn prolong_with(v: &VectorField, asm: &Assumptions) -> Result<Prolongation, PdeError> {
    if !v.is_point() {
        return Err(PdeError::NotPoint);
    }
    let q = v.characteristic();
    let mut derived: BTreeMap<Jet, Expr> = BTreeMap::new();
    derived.insert(Jet::U, q);
    let mut out = BTreeMap::new();
    for j in prolonged_jets() {
        // D_J Q built from a cached lower derivative
        let (parent, step) = split_last(j);
        let dq = match derived.get(&j) {
            Some(d) => d.clone(),
            None => {
                let base = derived[&parent].clone();
                let d = base.total_derivative_with(step, asm)?;
                derived.insert(j, d.clone());
                d
            }
        };
        let e = dq
            + &v.tau * Expr::jet(j.bump(Indep::T))
            + &v.xi * Expr::jet(j.bump(Indep::X))
            + &v.eta * Expr::jet(j.bump(Indep::Y));
        out.insert(j, e.normalize_with(asm));
    }
    Ok(Prolongation { coeffs: out })
}

/// Remove one derivative from a nonzero multi-index.
fn split_last(j: Jet) -> (Jet, Indep) {
    for v in [Indep::Y, Indep::X, Indep::T] {
        if j.count(v) > 0 {
            let mut p = j;
            match v {
                Indep::T => p.t -= 1,
                Indep::X => p.x -= 1,
                Indep::Y => p.y -= 1,
            }
            return (p, v);
        }
    }
    unreachable!("split_last on u")
}

/// `pr v (u_t - rhs)` before restricting to solutions.
pub fn invariance_expression(m: &PdeModel, v: &VectorField) -> Result<Expr, PdeError> {
    let asm = &m.positive;
    let delta = m.residual_expr();
    let pr = prolong_with(v, asm)?;
    let mut terms = Vec::new();
    let point_vars = [
        (&v.tau, Var::indep(Indep::T)),
        (&v.xi, Var::indep(Indep::X)),
        (&v.eta, Var::indep(Indep::Y)),
        (&v.phi, Var::u()),
    ];
    for (c, var) in point_vars {
        if !c.is_zero_const() && delta.contains_var(&var) {
            terms.push(c * delta.diff_with(&var, asm));
        }
    }
    for (j, phi_j) in &pr.coeffs {
        let var = Var::Jet(*j);
        if delta.contains_var(&var) {
            terms.push(phi_j * delta.diff_with(&var, asm));
        }
    }
    Ok(Expr::add_all(terms).normalize_with(asm))
}

/// Restrict to solutions: replace `u_t`, `u_tx`, `u_ty` and `u_2t` by
/// the right-hand side and its total derivatives.
pub fn on_shell(e: &Expr, m: &PdeModel) -> Result<Expr, PdeError> {
    let asm = &m.positive;
    let rhs = m.rhs();
    let e = e.normalize_with(asm);
    let jets = e.jets();
    let mut map: BTreeMap<Var, Expr> = BTreeMap::new();
    map.insert(Var::Jet(Jet::new(1, 0, 0)), rhs.clone());
    let first = |w: Indep| rhs.total_derivative_with(w, asm);
    if jets.contains(&Jet::new(1, 1, 0)) {
        map.insert(Var::Jet(Jet::new(1, 1, 0)), first(Indep::X)?);
    }
    if jets.contains(&Jet::new(1, 0, 1)) {
        map.insert(Var::Jet(Jet::new(1, 0, 1)), first(Indep::Y)?);
    }
    if jets.contains(&Jet::new(2, 0, 0)) {
        // D_t rhs carries u_t, u_tx, u_ty and u_txx-type terms
        let dt = first(Indep::T)?;
        let inner = on_shell_first_order(&dt, m)?;
        map.insert(Var::Jet(Jet::new(2, 0, 0)), inner);
    }
    let out = e.subs(&map).normalize_with(asm);
    if let Some(j) = out.jets().into_iter().find(|j| j.t > 0) {
        return Err(PdeError::ResidualTimeJet(j.name()));
    }
    Ok(out)
}

fn on_shell_first_order(e: &Expr, m: &PdeModel) -> Result<Expr, PdeError> {
    let asm = &m.positive;
    let rhs = m.rhs();
    let mut map: BTreeMap<Var, Expr> = BTreeMap::new();
    map.insert(Var::Jet(Jet::new(1, 0, 0)), rhs.clone());
    map.insert(Var::Jet(Jet::new(1, 1, 0)), rhs.total_derivative_with(Indep::X, asm)?);
    map.insert(Var::Jet(Jet::new(1, 0, 1)), rhs.total_derivative_with(Indep::Y, asm)?);
    Ok(e.subs(&map).normalize_with(asm))
}

/// Does `v` leave the model invariant? Exact first, sampled otherwise.
pub fn admits(m: &PdeModel, v: &VectorField, seed: u64) -> Result<crate::expr::ZeroTest, PdeError> {
    let e = on_shell(&invariance_expression(m, v)?, m)?;
    let cfg = crate::expr::ZeroTestConfig::default()
        .with_positive(&m.positive)
        .with_seed(seed);
    Ok(crate::expr::is_zero(&e, &cfg))
}
