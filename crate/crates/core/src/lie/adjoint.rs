use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::{LieAlgebra, LieError};
use crate::expr::{rational_sqrt, ExactPoint, Expr, FuncKind, Point, Rational, Var};
use crate::linalg;

/// Name of the group parameter in closed-form adjoint matrices.
pub const EPSILON: &str = "epsilon";

/// `Ad(exp(epsilon V_i))` as a matrix of expressions in `epsilon`.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedAdjoint {
    pub generator: usize,
    pub matrix: Vec<Vec<Expr>>,
}

impl ClosedAdjoint {
    pub fn eval(&self, eps: f64) -> Vec<Vec<f64>> {
        let p = Point::new().with(EPSILON, eps);
        self.matrix
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&p).unwrap_or(f64::NAN)).collect())
            .collect()
    }

    /// Substitute an expression for `epsilon`.
    pub fn at(&self, eps: &Expr) -> Vec<Vec<Expr>> {
        let v = Var::sym(EPSILON);
        self.matrix
            .iter()
            .map(|row| row.iter().map(|e| e.subs1(&v, eps).normalize()).collect())
            .collect()
    }
}

/// Numeric `Ad(exp(epsilon V_i))` acting on coefficient vectors.
#[derive(Clone, Debug, Serialize)]
pub struct AdjointMap {
    pub generator: usize,
    pub epsilon: f64,
    pub matrix: Vec<Vec<f64>>,
    pub closed_form: bool,
}

impl AdjointMap {
    pub fn apply(&self, a: &[f64]) -> Vec<f64> {
        mat_vec(&self.matrix, a)
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &AdjointMap) -> Vec<Vec<f64>> {
        mat_mul(&self.matrix, &first.matrix)
    }
}

pub(crate) fn mat_vec(m: &[Vec<f64>], a: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(a).map(|(x, y)| x * y).sum())
        .collect()
}

pub(crate) fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect())
        .collect()
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn norm_inf(m: &[Vec<f64>]) -> f64 {
    m.iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a Taylor series.
pub fn expm_numeric(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let norm = norm_inf(m);
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let a: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..40 {
        term = mat_mul(&term, &a);
        for row in term.iter_mut() {
            for x in row.iter_mut() {
                *x /= k as f64;
            }
        }
        for (r, t) in result.iter_mut().zip(&term) {
            for (x, y) in r.iter_mut().zip(t) {
                *x += y;
            }
        }
        if norm_inf(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = mat_mul(&result, &result);
    }
    result
}

type QMat = Vec<Vec<Rational>>;

fn q_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|l| &a[i][l] * &b[l][j]).sum()).collect())
        .collect()
}

fn q_identity(n: usize) -> QMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

/// Characteristic polynomial coefficients, lowest degree first, monic.
fn char_poly(m: &QMat) -> Vec<Rational> {
    let n = m.len();
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = Rational::one();
    let mut mk = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        let mut next = q_mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &c[n - k + 1];
        }
        mk = next;
        let am = q_mul(m, &mk);
        let tr: Rational = (0..n).map(|i| am[i][i].clone()).sum();
        c[n - k] = -tr / Rational::from_integer(BigInt::from(k));
    }
    c
}

/// Characteristic polynomial of a rational matrix, lowest degree first.
pub(crate) fn char_poly_of(m: &[Vec<Rational>]) -> Vec<Rational> {
    char_poly(&m.to_vec())
}

fn poly_eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divide by `(lambda - r)`; assumes `r` is a root.
fn deflate(p: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = p.len() - 1;
    let mut q = vec![Rational::zero(); n];
    let mut carry = Rational::zero();
    for i in (0..n).rev() {
        carry = &p[i + 1] + carry * r;
        q[i] = carry.clone();
    }
    q
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n > 1_000_000 {
        return None;
    }
    Some((1..=n).filter(|d| n % d == 0).map(BigInt::from).collect())
}

/// Roots of the characteristic polynomial in the closed-form classes.
enum Root {
    Real(Rational, usize),
    Complex(Rational, Rational),
}

fn classify_roots(p: &[Rational]) -> Option<Vec<Root>> {
    let mut p = p.to_vec();
    let mut roots: Vec<(Rational, usize)> = Vec::new();
    let push = |r: Rational, roots: &mut Vec<(Rational, usize)>| match roots.iter_mut().find(|(x, _)| *x == r) {
        Some((_, m)) => *m += 1,
        None => roots.push((r, 1)),
    };
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        push(Rational::zero(), &mut roots);
    }
    'outer: while p.len() > 1 {
        let lcm = p
            .iter()
            .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
        let ints: Vec<BigInt> = p
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let num = divisors(&ints[0])?;
        let den = divisors(ints.last().unwrap())?;
        for a in &num {
            for b in &den {
                for sign in [1, -1] {
                    let r = Rational::new(a * sign, b.clone());
                    if poly_eval(&p, &r).is_zero() {
                        p = deflate(&p, &r);
                        push(r, &mut roots);
                        continue 'outer;
                    }
                }
            }
        }
        break;
    }
    let mut out: Vec<Root> = roots.into_iter().map(|(r, m)| Root::Real(r, m)).collect();
    match p.len() {
        1 => {}
        3 => {
            // monic lambda^2 + b lambda + c with no rational roots
            let lead = p[2].clone();
            let b = &p[1] / &lead;
            let c = &p[0] / &lead;
            let disc = &b * &b - Rational::from_integer(4.into()) * &c;
            if !disc.is_negative() {
                return None;
            }
            let im2 = -disc / Rational::from_integer(4.into());
            let im = rational_sqrt(&im2)?;
            out.push(Root::Complex(-b / Rational::from_integer(2.into()), im));
        }
        _ => return None,
    }
    Some(out)
}

/// Elementary solutions of `p(d/d eps) y = 0`.
fn elementary(roots: &[Root]) -> Vec<Expr> {
    let eps = Expr::sym(EPSILON);
    let mut out = Vec::new();
    for r in roots {
        match r {
            Root::Real(l, m) => {
                for j in 0..*m {
                    let e = (Expr::constant(l.clone()) * eps.clone()).exp();
                    out.push((eps.powi(j as i64) * e).normalize());
                }
            }
            Root::Complex(a, b) => {
                let e = (Expr::constant(a.clone()) * eps.clone()).exp();
                let arg = Expr::constant(b.clone()) * eps.clone();
                out.push((e.clone() * Expr::apply(FuncKind::Cos, arg.clone())).normalize());
                out.push((e * Expr::apply(FuncKind::Sin, arg)).normalize());
            }
        }
    }
    out
}

impl LieAlgebra {
    /// Closed form of `exp(-epsilon ad V_i)` when the eigenvalues of
    /// `ad V_i` are rational or rational complex pairs.
    pub fn closed_adjoint(&self, i: usize) -> Result<Option<ClosedAdjoint>, LieError> {
        let a = self.ad_matrix(i)?;
        let n = a.len();
        let m: QMat = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let p = char_poly(&m);
        let Some(roots) = classify_roots(&p) else {
            return Ok(None);
        };
        let g = elementary(&roots);
        debug_assert_eq!(g.len(), n);
        let eps = Var::sym(EPSILON);
        let mut at0 = ExactPoint::default();
        at0.vars.insert(eps.clone(), Rational::zero());
        // w[j][k] = g_j^(k)(0)
        let mut w: QMat = Vec::with_capacity(n);
        for gj in &g {
            let mut row = Vec::with_capacity(n);
            let mut d = gj.clone();
            for _ in 0..n {
                row.push(d.eval_exact(&at0).expect("elementary solutions are exact at 0"));
                d = d.diff(&eps);
            }
            w.push(row);
        }
        // fundamental solutions y_k = sum_j c[k][j] g_j with c w = I
        let wt: QMat = (0..n).map(|l| (0..n).map(|j| w[j][l].clone()).collect()).collect();
        let mut y = Vec::with_capacity(n);
        for k in 0..n {
            let rhs: Vec<Rational> = (0..n)
                .map(|l| if l == k { Rational::one() } else { Rational::zero() })
                .collect();
            let c = linalg::solve(&wt, &rhs).expect("Wronskian at 0 is invertible");
            let terms: Vec<Expr> = c
                .iter()
                .zip(&g)
                .map(|(ck, gj)| Expr::constant(ck.clone()) * gj.clone())
                .collect();
            y.push(Expr::add_all(terms));
        }
        let mut power = q_identity(n);
        let mut entries: Vec<Vec<Vec<Expr>>> = vec![vec![Vec::new(); n]; n];
        for yk in &y {
            for r in 0..n {
                for c in 0..n {
                    if !power[r][c].is_zero() {
                        entries[r][c].push(Expr::constant(power[r][c].clone()) * yk.clone());
                    }
                }
            }
            power = q_mul(&power, &m);
        }
        let matrix = entries
            .into_iter()
            .map(|row| row.into_iter().map(|t| Expr::add_all(t).normalize()).collect())
            .collect();
        Ok(Some(ClosedAdjoint { generator: i, matrix }))
    }

    /// `exp(-epsilon ad V_i)` by the numeric series.
    pub fn adjoint_numeric(&self, i: usize, eps: f64) -> Result<AdjointMap, LieError> {
        let a = self.ad_matrix(i)?;
        let m: Vec<Vec<f64>> = a
            .iter()
            .map(|r| r.iter().map(|x| -eps * x.to_f64().unwrap()).collect())
            .collect();
        Ok(AdjointMap {
            generator: i,
            epsilon: eps,
            matrix: expm_numeric(&m),
            closed_form: false,
        })
    }

    /// `Ad(exp(eps V_i))`, closed form when available.
    pub fn adjoint(&self, i: usize, eps: f64) -> Result<AdjointMap, LieError> {
        match self.closed_adjoint(i)? {
            Some(c) => Ok(AdjointMap {
                generator: i,
                epsilon: eps,
                matrix: c.eval(eps),
                closed_form: true,
            }),
            None => self.adjoint_numeric(i, eps),
        }
    }

    /// All closed forms, computed once.
    pub fn closed_adjoints(&self) -> Result<Vec<Option<ClosedAdjoint>>, LieError> {
        (0..self.dim()).map(|i| self.closed_adjoint(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Assumptions;
    use crate::pde::PdeModel;

    fn algebra(name: &str) -> LieAlgebra {
        let m = PdeModel::builtin(name).unwrap();
        LieAlgebra::structure_table(&m.reference_basis().unwrap(), &m.parameters, &Assumptions::default()).unwrap()
    }

    fn eps() -> Expr {
        Expr::sym(EPSILON)
    }

    #[test]
    fn char_poly_of_rotation() {
        let m: QMat = vec![
            vec![Rational::zero(), -Rational::one()],
            vec![Rational::one(), Rational::zero()],
        ];
        assert_eq!(char_poly(&m), vec![Rational::one(), Rational::zero(), Rational::one()]);
    }

    #[test]
    fn ricci_closed_forms() {
        let a = algebra("ricci");
        let c1 = a.closed_adjoint(0).unwrap().unwrap();
        assert_eq!(c1.matrix[1][1], eps().exp().normalize());
        let c2 = a.closed_adjoint(1).unwrap().unwrap();
        assert_eq!(c2.matrix[0][0], Expr::one());
        assert_eq!(c2.matrix[1][0], (-eps()).normalize());
    }

    #[test]
    fn convdiff_rotation() {
        let a = algebra("convdiff");
        let c = a.closed_adjoint(1).unwrap().unwrap();
        assert_eq!(c.matrix[2][2], Expr::apply(FuncKind::Cos, eps()).normalize());
        assert_eq!(c.matrix[3][2], (-Expr::apply(FuncKind::Sin, eps())).normalize());
    }

    #[test]
    fn numeric_matches_closed() {
        for name in ["ricci", "convdiff"] {
            let a = algebra(name);
            for i in 0..a.dim() {
                for eps in [-1.3, 0.0, 0.4, 2.5] {
                    let c = a.adjoint(i, eps).unwrap();
                    assert!(c.closed_form);
                    let n = a.adjoint_numeric(i, eps).unwrap();
                    for (r, s) in c.matrix.iter().zip(&n.matrix) {
                        for (x, y) in r.iter().zip(s) {
                            assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{name} {i} {eps}: {x} vs {y}");
                        }
                    }
                }
            }
        }
    }
}
