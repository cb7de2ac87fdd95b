//! Polynomial ansatz for the infinitesimals, solved exactly.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{to_poly, Assumptions, Expr, Node, Rational, ZeroTest};
use crate::linalg;
use crate::mpoly::MPoly;
use crate::pde::{admits, DeterminingSystem, PdeError, PdeModel, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TauMode {
    /// `tau` is a constant unknown; generators with `tau = 0` are returned
    /// and a `tau = 1` solution, if any, is reported separately.
    Fixed,
    /// `tau` carries the same polynomial ansatz as the other components.
    Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Ansatz {
    /// Joint degree in `(x, y, t)`.
    pub degree: i32,
    pub u_degree: u32,
    pub tau: TauMode,
}

impl Default for Ansatz {
    fn default() -> Self {
        Ansatz {
            degree: 1,
            u_degree: 1,
            tau: TauMode::Fixed,
        }
    }
}

impl Ansatz {
    pub fn with_degree(degree: i32) -> Self {
        Ansatz {
            degree,
            ..Ansatz::default()
        }
    }

    /// Exponents `(a, b, c, e)` of `x^a y^b t^c u^e`.
    pub fn monomials(&self) -> Vec<[u32; 4]> {
        let mut out = Vec::new();
        if self.degree < 0 {
            return out;
        }
        let d = self.degree as u32;
        for total in 0..=d {
            for a in (0..=total).rev() {
                for b in (0..=total - a).rev() {
                    let c = total - a - b;
                    for e in 0..=self.u_degree {
                        out.push([a, b, c, e]);
                    }
                }
            }
        }
        out
    }
}

fn monomial_expr(m: &[u32; 4]) -> Expr {
    Expr::mul_all(vec![
        Expr::sym("x").powi(m[0] as i64),
        Expr::sym("y").powi(m[1] as i64),
        Expr::sym("t").powi(m[2] as i64),
        Expr::u().powi(m[3] as i64),
    ])
    .normalize()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnsatzError {
    #[error("empty ansatz: degree must be at least 0")]
    EmptyAnsatz,
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("parameter `{0}` enters the system non-polynomially")]
    NonPolynomialParameter(String),
    #[error("determining system is not linear in the ansatz coefficients")]
    NonLinear,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryBasis {
    pub generators: Vec<VectorField>,
    /// Solution with `tau = 1` when the time component was fixed.
    pub time_generator: Option<VectorField>,
    pub parameters: Vec<String>,
    /// Parameter polynomials assumed nonzero during elimination. On their
    /// zero sets the dimension may jump.
    pub conditions: Vec<String>,
}

impl SymmetryBasis {
    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn span_equal(&self, other: &[VectorField]) -> bool {
        span_equal(&self.generators, other, &self.parameters)
    }
}

struct Unknowns {
    names: Vec<String>,
    field: VectorField,
}

fn unknown_field(a: &Ansatz) -> Unknowns {
    let monos = a.monomials();
    let mut names = Vec::new();
    let mut comps: Vec<Expr> = Vec::new();
    let next = |names: &mut Vec<String>| {
        let n = format!("@k{}", names.len());
        names.push(n.clone());
        Expr::sym(&n)
    };
    let mut tau_terms = Vec::new();
    match a.tau {
        TauMode::Fixed => {}
        TauMode::Polynomial => {
            for m in &monos {
                tau_terms.push(next(&mut names) * monomial_expr(m));
            }
        }
    }
    for _ in 0..3 {
        let mut terms = Vec::new();
        for m in &monos {
            terms.push(next(&mut names) * monomial_expr(m));
        }
        comps.push(Expr::add_all(terms));
    }
    // the constant time coefficient goes last so it tends to be a free column
    if a.tau == TauMode::Fixed {
        tau_terms.push(next(&mut names));
    }
    let [xi, eta, phi]: [Expr; 3] = comps.try_into().unwrap();
    Unknowns {
        names,
        field: VectorField::new(Expr::add_all(tau_terms), xi, eta, phi),
    }
}

type Row = BTreeMap<usize, MPoly>;

/// Split each equation into rows indexed by the monomials in everything
/// that is neither an unknown nor a parameter.
fn build_rows(
    equations: &[Expr],
    unknowns: &[String],
    params: &[String],
    asm: &Assumptions,
) -> Result<Vec<Row>, AnsatzError> {
    let col: BTreeMap<&str, usize> = unknowns.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let mut rows = Vec::new();
    for eq in equations {
        let p = to_poly(eq, asm);
        let mut grouped: BTreeMap<Vec<(Expr, Expr)>, Row> = BTreeMap::new();
        for (mono, c) in &p.terms {
            let mut column = None;
            let mut coeff = MPoly::constant(c.clone());
            let mut key = Vec::new();
            for (b, x) in mono {
                match b.node() {
                    Node::Sym(s) if col.contains_key(s.name()) => {
                        if column.is_some() || !x.is_one_const() {
                            return Err(AnsatzError::NonLinear);
                        }
                        column = Some(col[s.name()]);
                    }
                    Node::Sym(s) if params.iter().any(|q| q == s.name()) => match x.as_integer() {
                        Some(k) if k > 0 => {
                            for _ in 0..k {
                                coeff = coeff.mul(&MPoly::var(s.name()));
                            }
                        }
                        _ => return Err(AnsatzError::NonPolynomialParameter(s.name().to_string())),
                    },
                    _ => {
                        if b.symbols()
                            .iter()
                            .chain(x.symbols().iter())
                            .any(|s| col.contains_key(s.name()))
                        {
                            return Err(AnsatzError::NonLinear);
                        }
                        key.push((b.clone(), x.clone()));
                    }
                }
            }
            let Some(column) = column else {
                return Err(AnsatzError::NonLinear);
            };
            let row = grouped.entry(key).or_default();
            let entry = row.entry(column).or_insert_with(MPoly::zero);
            *entry = entry.add(&coeff);
        }
        for (_, mut row) in grouped {
            row.retain(|_, v| !v.is_zero());
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Solve the determining system under a polynomial ansatz.
pub fn solve_symmetries(m: &PdeModel, a: &Ansatz) -> Result<SymmetryBasis, AnsatzError> {
    if a.degree < 0 {
        return Err(AnsatzError::EmptyAnsatz);
    }
    let sys = DeterminingSystem::symbolic(m, false)?;
    let unk = unknown_field(a);
    let equations = sys.substitute(&unk.field, &m.positive);
    let rows = build_rows(&equations, &unk.names, &m.parameters, &m.positive)?;
    let n = unk.names.len();
    let all_constant = rows.iter().all(|r| r.values().all(MPoly::is_constant));
    let (vectors, conditions): (Vec<Vec<MPoly>>, Vec<String>) = if all_constant {
        let dense: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![Rational::zero(); n];
                for (c, p) in r {
                    v[*c] = p.as_constant().unwrap();
                }
                v
            })
            .collect();
        let ns = linalg::nullspace(&dense, n);
        (
            ns.into_iter()
                .map(|v| v.into_iter().map(MPoly::constant).collect())
                .collect(),
            vec![],
        )
    } else {
        let dense: Vec<Vec<MPoly>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![MPoly::zero(); n];
                for (c, p) in r {
                    v[*c] = p.clone();
                }
                v
            })
            .collect();
        let (ns, ff) = linalg::nullspace_poly(&dense, n);
        (ns, ff.conditions.iter().map(|c| format!("{c} != 0")).collect())
    };

    let tau_col = (a.tau == TauMode::Fixed).then_some(n - 1);
    let to_field = |v: &[MPoly]| -> VectorField {
        let map: BTreeMap<crate::expr::Var, Expr> = unk
            .names
            .iter()
            .zip(v)
            .map(|(name, p)| (crate::expr::Var::sym(name), p.to_expr()))
            .collect();
        unk.field.map(|e| e.subs(&map).normalize_with(&m.positive))
    };

    let mut generators = Vec::new();
    let mut time_generator = None;
    let mut with_tau: Option<Vec<MPoly>> = None;
    let mut without_tau: Vec<Vec<MPoly>> = Vec::new();
    for v in vectors {
        match tau_col {
            Some(tc) if !v[tc].is_zero() => {
                if let Some(w) = &with_tau {
                    // eliminate the time coefficient against the first such vector
                    let combo: Vec<MPoly> = v
                        .iter()
                        .zip(w)
                        .map(|(vi, wi)| w[tc].mul(vi).sub(&v[tc].mul(wi)))
                        .collect();
                    without_tau.push(combo);
                } else {
                    with_tau = Some(v);
                }
            }
            _ => without_tau.push(v),
        }
    }
    if let (Some(w), Some(tc)) = (with_tau, tau_col) {
        let scaled: Vec<MPoly> = match w[tc].as_constant() {
            Some(c) => w.iter().map(|x| x.scale(&c.recip())).collect(),
            None => w,
        };
        time_generator = Some(to_field(&scaled));
    }
    for v in without_tau {
        let f = to_field(&v);
        if !f.is_zero() {
            generators.push(f);
        }
    }
    Ok(SymmetryBasis {
        generators,
        time_generator,
        parameters: m.parameters.clone(),
        conditions,
    })
}

/// Per-generator admission check on the model.
pub fn verify_basis(m: &PdeModel, b: &SymmetryBasis, seed: u64) -> Vec<(VectorField, Result<ZeroTest, PdeError>)> {
    b.generators
        .iter()
        .chain(b.time_generator.iter())
        .map(|v| (v.clone(), admits(m, v, seed)))
        .collect()
}

/// Coordinates of fields over a common basis of component monomials, with
/// coefficients polynomial in the parameters.
pub(crate) type CoordKey = (usize, Vec<(Expr, Expr)>);

pub(crate) fn coordinates(fields: &[VectorField], params: &[String]) -> Vec<BTreeMap<CoordKey, MPoly>> {
    let asm = Assumptions::default();
    let mut out = Vec::new();
    for f in fields {
        let mut coords: BTreeMap<CoordKey, MPoly> = BTreeMap::new();
        for (i, comp) in f.components().into_iter().enumerate() {
            for (mono, c) in &to_poly(comp, &asm).terms {
                let mut coeff = MPoly::constant(c.clone());
                let mut key = Vec::new();
                for (b, x) in mono {
                    match (b.node(), x.as_integer()) {
                        (Node::Sym(s), Some(k)) if k > 0 && params.iter().any(|p| p == s.name()) => {
                            for _ in 0..k {
                                coeff = coeff.mul(&MPoly::var(s.name()));
                            }
                        }
                        _ => key.push((b.clone(), x.clone())),
                    }
                }
                let e = coords.entry((i, key)).or_insert_with(MPoly::zero);
                *e = e.add(&coeff);
            }
        }
        coords.retain(|_, v| !v.is_zero());
        out.push(coords);
    }
    out
}

fn rank_of(fields: &[VectorField], params: &[String]) -> usize {
    let coords = coordinates(fields, params);
    let mut keys: Vec<&CoordKey> = coords.iter().flat_map(|c| c.keys()).collect();
    keys.sort();
    keys.dedup();
    let index: BTreeMap<_, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let rows: Vec<Vec<MPoly>> = coords
        .iter()
        .map(|c| {
            let mut r = vec![MPoly::zero(); keys.len()];
            for (k, v) in c {
                r[index[k]] = v.clone();
            }
            r
        })
        .collect();
    linalg::rank_poly(&rows, keys.len())
}

/// Equal spans over the rational functions in `params`.
pub fn span_equal(a: &[VectorField], b: &[VectorField], params: &[String]) -> bool {
    let ra = rank_of(a, params);
    let rb = rank_of(b, params);
    let mut u = a.to_vec();
    u.extend_from_slice(b);
    let ru = rank_of(&u, params);
    ra == rb && ra == ru
}

/// `span(a)` is contained in `span(b)`.
pub fn span_contains(b: &[VectorField], a: &[VectorField], params: &[String]) -> bool {
    let rb = rank_of(b, params);
    let mut u = b.to_vec();
    u.extend_from_slice(a);
    rank_of(&u, params) == rb
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count() {
        assert_eq!(Ansatz::with_degree(1).monomials().len(), 8);
        assert_eq!(Ansatz::with_degree(0).monomials().len(), 2);
        assert!(Ansatz::with_degree(-1).monomials().is_empty());
    }

    #[test]
    fn empty_ansatz_is_rejected() {
        let m = PdeModel::builtin("ricci").unwrap();
        assert_eq!(
            solve_symmetries(&m, &Ansatz::with_degree(-1)).unwrap_err(),
            AnsatzError::EmptyAnsatz
        );
    }

    #[test]
    fn ricci_linear_sector() {
        let m = PdeModel::builtin("ricci").unwrap();
        let b = solve_symmetries(&m, &Ansatz::default()).unwrap();
        assert_eq!(b.dimension(), 4, "{:?}", b.generators);
        assert!(b.span_equal(&m.reference_basis().unwrap()));
        assert_eq!(b.time_generator, Some(VectorField::coordinate(0)));
    }

    #[test]
    fn span_equal_examples() {
        let m = PdeModel::builtin("ricci").unwrap();
        let r = m.reference_basis().unwrap();
        let mut rev = r.clone();
        rev.reverse();
        assert!(span_equal(&r, &rev, &[]));
        let mixed = vec![r[0].add(&r[2]), r[1].clone(), r[2].clone(), r[3].clone()];
        assert!(span_equal(&r, &mixed, &[]));
        assert!(!span_equal(&r, &r[..3], &[]));
    }

    #[test]
    fn ricci_dimension_grows_with_degree() {
        let m = PdeModel::builtin("ricci").unwrap();
        let mut prev: Option<Vec<VectorField>> = None;
        for d in 1..=3 {
            let b = solve_symmetries(&m, &Ansatz::with_degree(d)).unwrap();
            assert_eq!(b.dimension(), 2 * d as usize + 2, "degree {d}");
            for (v, r) in verify_basis(&m, &b, 0) {
                assert!(r.unwrap().is_zero(), "{v}");
            }
            if let Some(p) = &prev {
                assert!(span_contains(&b.generators, p, &[]));
            }
            prev = Some(b.generators);
        }
    }

    #[test]
    fn convdiff_linear_sector() {
        let m = PdeModel::builtin("convdiff").unwrap();
        let b = solve_symmetries(&m, &Ansatz::default()).unwrap();
        assert_eq!(b.dimension(), 4, "{:?}", b.generators);
        assert!(b.span_equal(&m.reference_basis().unwrap()));
        for (v, r) in verify_basis(&m, &b, 0) {
            assert!(r.unwrap().is_zero(), "{v}");
        }
    }
}
