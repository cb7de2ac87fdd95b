//! Exact elimination over Q and over polynomial rings in parameters.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::expr::Rational;
use crate::mpoly::MPoly;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Vec<Vec<Rational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &[Vec<Rational>], ncols: usize) -> usize {
    let mut a = m.to_vec();
    rref(&mut a, ncols).len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a, ncols);
    let mut out = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); ncols];
        v[f] = Rational::one();
        for (row, &pc) in a.iter().zip(&pivots) {
            v[pc] = -row[f].clone();
        }
        out.push(v);
    }
    out
}

/// Solve `m x = b`; `None` if inconsistent. Free variables are set to 0.
pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let ncols = m.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut a, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &pc) in a.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

/// Outcome of fraction-free elimination over `Q[params]`.
#[derive(Clone, Debug, Serialize)]
pub struct FractionFree {
    pub pivots: Vec<usize>,
    /// Non-constant pivots that were assumed nonzero.
    #[serde(serialize_with = "ser_polys")]
    pub conditions: Vec<MPoly>,
}

fn ser_polys<S: serde::Serializer>(v: &[MPoly], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for p in v {
        seq.serialize_element(&p.to_string())?;
    }
    seq.end()
}

/// Fraction-free Gauss–Jordan (Bareiss). On return every pivot row has the
/// same pivot value (the last pivot) and every other entry in a pivot
/// column is zero. Constant pivots are preferred.
pub fn fraction_free_gauss_jordan(m: &mut Vec<Vec<MPoly>>, ncols: usize) -> FractionFree {
    let mut pivots = Vec::new();
    let mut conditions = Vec::new();
    let mut prev = MPoly::one();
    let mut r = 0;
    for c in 0..ncols {
        if r >= m.len() {
            break;
        }
        let candidates: Vec<usize> = (r..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
        let Some(&p) = candidates
            .iter()
            .find(|&&i| m[i][c].is_constant())
            .or_else(|| candidates.iter().min_by_key(|&&i| m[i][c].terms().count()))
        else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        if !piv.is_constant() {
            let (n, _) = piv.sign_normalized();
            if !conditions.contains(&n) {
                conditions.push(n);
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            for (j, x) in row.iter_mut().enumerate() {
                let t = piv.mul(x);
                let t = if f.is_zero() || pivot_row[j].is_zero() {
                    t
                } else {
                    t.sub(&f.mul(&pivot_row[j]))
                };
                *x = t
                    .div_exact(&prev)
                    .expect("fraction-free elimination must divide exactly");
            }
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    FractionFree { pivots, conditions }
}

/// Nullspace basis over `Q(params)` with polynomial entries.
pub fn nullspace_poly(m: &[Vec<MPoly>], ncols: usize) -> (Vec<Vec<MPoly>>, FractionFree) {
    let mut a = m.to_vec();
    let ff = fraction_free_gauss_jordan(&mut a, ncols);
    let det = match (a.first(), ff.pivots.first()) {
        (Some(row), Some(&c)) => row[c].clone(),
        _ => MPoly::one(),
    };
    let mut out = Vec::new();
    for f in (0..ncols).filter(|c| !ff.pivots.contains(c)) {
        let mut v = vec![MPoly::zero(); ncols];
        v[f] = det.clone();
        for (row, &pc) in a.iter().zip(&ff.pivots) {
            v[pc] = row[f].neg();
        }
        // divide out the common pivot when possible
        if let Some(w) = v.iter().map(|x| x.div_exact(&det)).collect::<Option<Vec<_>>>() {
            v = w;
        }
        out.push(v);
    }
    (out, ff)
}

pub fn rank_poly(m: &[Vec<MPoly>], ncols: usize) -> usize {
    let mut a = m.to_vec();
    fraction_free_gauss_jordan(&mut a, ncols).pivots.len()
}
