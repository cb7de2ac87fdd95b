//! Brackets, structure constants and the adjoint action.

mod adjoint;
mod optimal;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

pub use adjoint::{expm_numeric, AdjointMap, ClosedAdjoint, EPSILON};
pub use optimal::{
    reduce_to_representative, verify_optimal, CaseLogic, Classifier, OptimalError, OptimalSystem, PairSeparation,
    ParameterSeparation, PatternCheck, Reduction, VerifyReport, RECONSTRUCTION_TOL,
};

use crate::ansatz::coordinates;
use crate::expr::{Assumptions, Expr, Rational, ZeroTestConfig};
use crate::linalg;
use crate::mpoly::MPoly;
use crate::pde::VectorField;

/// `[v, w]` with components `v(w^k) - w(v^k)`.
pub fn commutator(v: &VectorField, w: &VectorField) -> VectorField {
    commutator_with(v, w, &Assumptions::default())
}

pub fn commutator_with(v: &VectorField, w: &VectorField, asm: &Assumptions) -> VectorField {
    let a = v.components();
    let b = w.components();
    let c: [Expr; 4] = std::array::from_fn(|k| (v.apply_with(b[k], asm) - w.apply_with(a[k], asm)).normalize_with(asm));
    VectorField::from_components(c)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("not closed: [V{i}, V{j}] = {bracket} leaves the span of the basis")]
    NotClosed { i: usize, j: usize, bracket: String },
    #[error("basis is linearly dependent")]
    Dependent,
    #[error("structure constant c^{k}_{{{i}{j}}} = {value} is not a rational number")]
    NonRational {
        i: usize,
        j: usize,
        k: usize,
        value: String,
    },
}

/// A finite-dimensional algebra of vector fields with its structure constants
/// `[V_i, V_j] = sum_k c[i][j][k] V_k` (indices from 0).
#[derive(Clone, Debug, Serialize)]
pub struct LieAlgebra {
    pub basis: Vec<VectorField>,
    pub parameters: Vec<String>,
    pub constants: Vec<Vec<Vec<Expr>>>,
}

/// Solve `basis * c = target` over `Q(params)`.
fn express_in_basis(
    basis: &[VectorField],
    target: &VectorField,
    params: &[String],
) -> Result<Option<Vec<Expr>>, LieError> {
    let mut fields = basis.to_vec();
    fields.push(target.clone());
    let coords = coordinates(&fields, params);
    let mut keys: Vec<_> = coords.iter().flat_map(|c| c.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let r = basis.len();
    let mut rows: Vec<Vec<MPoly>> = keys
        .iter()
        .map(|k| coords.iter().map(|c| c.get(k).cloned().unwrap_or_default()).collect())
        .collect();
    let ff = linalg::fraction_free_gauss_jordan(&mut rows, r + 1);
    if ff.pivots.iter().filter(|&&p| p < r).count() < r {
        return Err(LieError::Dependent);
    }
    if ff.pivots.contains(&r) {
        return Ok(None);
    }
    let det = rows[0][ff.pivots[0]].to_expr();
    Ok(Some(
        rows.iter()
            .take(r)
            .map(|row| (row[r].to_expr() / det.clone()).normalize())
            .collect(),
    ))
}

impl LieAlgebra {
    /// Compute the structure table; fails if some bracket leaves the span.
    pub fn structure_table(basis: &[VectorField], params: &[String], asm: &Assumptions) -> Result<Self, LieError> {
        let r = basis.len();
        let mut constants = vec![vec![vec![Expr::zero(); r]; r]; r];
        for i in 0..r {
            for j in (i + 1)..r {
                let b = commutator_with(&basis[i], &basis[j], asm);
                let c = express_in_basis(basis, &b, params)?.ok_or_else(|| LieError::NotClosed {
                    i: i + 1,
                    j: j + 1,
                    bracket: b.to_string(),
                })?;
                for (k, ck) in c.into_iter().enumerate() {
                    constants[j][i][k] = (-&ck).normalize();
                    constants[i][j][k] = ck;
                }
            }
        }
        Ok(LieAlgebra {
            basis: basis.to_vec(),
            parameters: params.to_vec(),
            constants,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `[V_i, V_j]` written in the basis, e.g. `-V3/2`.
    pub fn cell_text(&self, i: usize, j: usize) -> String {
        let terms: Vec<Expr> = self.constants[i][j]
            .iter()
            .enumerate()
            .map(|(k, c)| c * Expr::sym(&format!("V{}", k + 1)))
            .collect();
        Expr::add_all(terms).normalize().to_string()
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().flatten().flatten().all(Expr::is_zero_const)
    }

    /// Structure constants as rationals.
    pub fn rational_constants(&self) -> Result<Vec<Vec<Vec<Rational>>>, LieError> {
        let r = self.dim();
        let mut out = vec![vec![vec![Rational::zero(); r]; r]; r];
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let c = &self.constants[i][j][k];
                    out[i][j][k] = c.as_const().cloned().ok_or_else(|| LieError::NonRational {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                        value: c.to_string(),
                    })?;
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad V_i` on coefficient vectors: `(ad V_i)[k][j] = c^k_{ij}`.
    pub fn ad_matrix(&self, i: usize) -> Result<Vec<Vec<Rational>>, LieError> {
        let c = self.rational_constants()?;
        let r = self.dim();
        Ok((0..r).map(|k| (0..r).map(|j| c[i][j][k].clone()).collect()).collect())
    }

    /// `ad X` for `X = sum a_i V_i`, numerically.
    pub fn ad_of(&self, a: &[f64]) -> Result<Vec<Vec<f64>>, LieError> {
        use num_traits::ToPrimitive;
        let c = self.rational_constants()?;
        let r = self.dim();
        let mut m = vec![vec![0.0; r]; r];
        for (i, ai) in a.iter().enumerate() {
            for j in 0..r {
                for k in 0..r {
                    m[k][j] += ai * c[i][j][k].to_f64().unwrap();
                }
            }
        }
        Ok(m)
    }

    /// Coefficients of `[X, Y]` for coefficient vectors `a`, `b`.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>, LieError> {
        let m = self.ad_of(a)?;
        Ok(m.iter()
            .map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum())
            .collect())
    }

    pub fn antisymmetric(&self) -> bool {
        let r = self.dim();
        (0..r).all(|i| {
            (0..r).all(|j| {
                (0..r).all(|k| {
                    (&self.constants[i][j][k] + &self.constants[j][i][k])
                        .normalize()
                        .is_zero_const()
                })
            })
        })
    }

    /// Jacobi identity on the structure constants, exactly.
    pub fn jacobi_holds(&self) -> bool {
        let r = self.dim();
        let c = &self.constants;
        let cfg = ZeroTestConfig::default();
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    for l in 0..r {
                        let mut terms = Vec::new();
                        for m in 0..r {
                            terms.push(&c[i][j][m] * &c[m][k][l]);
                            terms.push(&c[j][k][m] * &c[m][i][l]);
                            terms.push(&c[k][i][m] * &c[m][j][l]);
                        }
                        if !Expr::add_all(terms).is_zero_with(&cfg).is_zero() {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// `sum a_i V_i` as a vector field.
    pub fn field(&self, a: &[Expr]) -> VectorField {
        VectorField::combination(&self.basis, a).normalize_with(&Assumptions::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::PdeModel;

    fn algebra(name: &str) -> LieAlgebra {
        let m = PdeModel::builtin(name).unwrap();
        LieAlgebra::structure_table(&m.reference_basis().unwrap(), &m.parameters, &m.positive).unwrap()
    }

    #[test]
    fn ricci_brackets() {
        let a = algebra("ricci");
        assert_eq!(a.cell_text(1, 0), "V2");
        assert_eq!(a.cell_text(0, 1), "-V2");
        assert_eq!(a.cell_text(3, 2), "V4");
        assert_eq!(a.cell_text(0, 2), "0");
        assert!(a.antisymmetric() && a.jacobi_holds());
    }

    #[test]
    fn convdiff_brackets() {
        let a = algebra("convdiff");
        assert_eq!(a.cell_text(0, 2), "-V3/2");
        assert_eq!(a.cell_text(3, 1), "V3");
        assert_eq!(a.cell_text(1, 2), "V4");
        assert!(a.jacobi_holds());
    }

    #[test]
    fn self_bracket_vanishes() {
        let m = PdeModel::builtin("convdiff").unwrap();
        for v in m.reference_basis().unwrap() {
            assert!(commutator(&v, &v).is_zero());
        }
    }

    #[test]
    fn abelian_pair_and_not_closed() {
        let dx = VectorField::coordinate(1);
        let dy = VectorField::coordinate(2);
        let a = LieAlgebra::structure_table(&[dx.clone(), dy], &[], &Assumptions::default()).unwrap();
        assert!(a.is_abelian());
        let xdy = VectorField::new(Expr::zero(), Expr::zero(), Expr::sym("x").powi(2), Expr::zero());
        let e = LieAlgebra::structure_table(&[dx, xdy], &[], &Assumptions::default()).unwrap_err();
        assert!(matches!(e, LieError::NotClosed { .. }), "{e}");
    }
}
