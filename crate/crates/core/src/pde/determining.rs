use std::collections::BTreeMap;

use serde::Serialize;

use crate::expr::{from_poly, to_poly, Assumptions, Expr, FnAtom, Indep, Node, Var};

use super::{invariance_expression, on_shell, PdeError, PdeModel, VectorField, COMPONENT_NAMES};

/// One equation: the coefficient of a jet monomial in the on-shell
/// invariance condition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminingEquation {
    pub monomial: Expr,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeterminingSystem {
    pub equations: Vec<DeterminingEquation>,
    /// Names of the unknown infinitesimal functions.
    pub unknowns: Vec<String>,
    pub tau_fixed: bool,
}

/// Split a normalized expression into coefficients of monomials in jets of
/// order at least one.
pub(crate) fn collect_by_jets(e: &Expr, asm: &Assumptions) -> Result<BTreeMap<Expr, Expr>, PdeError> {
    let p = to_poly(e, asm);
    let mut groups: BTreeMap<Vec<(Expr, Expr)>, crate::expr::Poly> = BTreeMap::new();
    for (mono, c) in &p.terms {
        let mut jet_part = Vec::new();
        let mut rest = Vec::new();
        for (b, x) in mono {
            match b.node() {
                Node::Jet(j) if j.order() > 0 => {
                    if x.as_integer().map_or(true, |k| k < 0) {
                        return Err(PdeError::NotPolynomialInJets(j.name()));
                    }
                    jet_part.push((b.clone(), x.clone()));
                }
                _ => {
                    if let Some(j) = b.jets().into_iter().chain(x.jets()).find(|j| j.order() > 0) {
                        return Err(PdeError::NotPolynomialInJets(j.name()));
                    }
                    rest.push((b.clone(), x.clone()));
                }
            }
        }
        groups.entry(jet_part).or_default().add_term(rest, c.clone());
    }
    Ok(groups
        .into_iter()
        .map(|(jm, coeff)| {
            let mono = from_poly(&crate::expr::Poly::monomial(
                jm,
                crate::expr::Rational::from_integer(1.into()),
            ));
            (mono, from_poly(&coeff))
        })
        .filter(|(_, c)| !c.is_zero_const())
        .collect())
}

impl DeterminingSystem {
    /// Unknown infinitesimals as opaque functions with formal derivatives.
    pub fn symbolic(m: &PdeModel, tau_fixed: bool) -> Result<Self, PdeError> {
        let v = VectorField::unknown(tau_fixed);
        let e = on_shell(&invariance_expression(m, &v)?, m)?;
        let groups = collect_by_jets(&e, &m.positive)?;
        let equations = groups
            .into_iter()
            .map(|(monomial, expr)| DeterminingEquation { monomial, expr })
            .collect();
        let unknowns = COMPONENT_NAMES
            .iter()
            .filter(|n| !(tau_fixed && **n == "tau"))
            .map(|s| s.to_string())
            .collect();
        Ok(DeterminingSystem {
            equations,
            unknowns,
            tau_fixed,
        })
    }

    pub fn is_unknown(&self, f: &FnAtom) -> bool {
        self.unknowns.iter().any(|n| n == f.name.name())
    }

    /// Every term has degree at most one in the unknowns and their
    /// derivatives. With `tau` fixed to 1 the known time component
    /// contributes unknown-free terms, so equations are affine.
    pub fn is_linear(&self) -> bool {
        self.equations.iter().all(|eq| {
            to_poly(&eq.expr, &Assumptions::default()).terms.keys().all(|mono| {
                let mut degree = 0;
                for (b, x) in mono {
                    let has_unknown = {
                        let mut found = false;
                        b.walk(&mut |n| {
                            if let Node::Fn(f) = n.node() {
                                if self.is_unknown(f) {
                                    found = true;
                                }
                            }
                        });
                        found
                    };
                    if has_unknown {
                        match (b.node(), x.as_integer()) {
                            (Node::Fn(_), Some(1)) => degree += 1,
                            _ => return false,
                        }
                    }
                }
                degree <= 1
            })
        })
    }

    /// Replace the unknown functions (and their derivatives) by the
    /// components of a concrete field.
    pub fn substitute(&self, v: &VectorField, asm: &Assumptions) -> Vec<Expr> {
        let comps = v.components();
        let vars = [
            Var::indep(Indep::T),
            Var::indep(Indep::X),
            Var::indep(Indep::Y),
            Var::u(),
        ];
        let lookup = |f: &FnAtom| -> Option<Expr> {
            let i = COMPONENT_NAMES.iter().position(|n| *n == f.name.name())?;
            if !self.unknowns.iter().any(|n| n == f.name.name()) {
                return None;
            }
            let mut e = comps[i].clone();
            for (k, var) in vars.iter().enumerate() {
                for _ in 0..f.d[k] {
                    e = e.diff_with(var, asm);
                }
            }
            Some(e)
        };
        self.equations
            .iter()
            .map(|eq| eq.expr.subs_fn(&lookup).normalize_with(asm))
            .collect()
    }
}
