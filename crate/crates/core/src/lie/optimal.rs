//! One-dimensional optimal systems: reduction of a coefficient vector to a
//! catalog representative by adjoint maps, and verification of catalogs.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::adjoint::ClosedAdjoint;
use super::{AdjointMap, LieAlgebra, LieError};
use crate::expr::{ExactPoint, Expr, Point, Rational, Var};
use crate::io::{read_entries, split_list, FileError, ParseContext};
use crate::linalg;
use crate::parallel::Execution;

/// Hand-derived case analysis used before the generic search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseLogic {
    Ricci,
    ConvDiff,
    Generic,
}

impl CaseLogic {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "ricci" => Some(CaseLogic::Ricci),
            "convdiff" => Some(CaseLogic::ConvDiff),
            "generic" => Some(CaseLogic::Generic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimalError {
    #[error("the zero vector spans no subalgebra")]
    Zero,
    #[error("coefficient vector has length {got}, algebra has dimension {want}")]
    Dimension { got: usize, want: usize },
    #[error("no case matched for {coefficients:?}: {reason}")]
    NoCaseMatched { coefficients: Vec<f64>, reason: String },
    #[error("representative {0} is not affine in its parameters with a nonzero constant part")]
    NotAffine(usize),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    File(#[from] FileError),
    #[error("unknown optimal-system catalog `{0}`")]
    Unknown(String),
}

/// Finite list of representative families, each a coefficient vector of
/// expressions in the declared parameters.
#[derive(Clone, Debug, Serialize)]
pub struct OptimalSystem {
    pub name: String,
    pub parameters: Vec<String>,
    pub representatives: Vec<Vec<Expr>>,
    pub logic: CaseLogic,
}

const RICCI_CATALOG: &str = "name = ricci
logic = ricci
parameters = alpha, beta
representative = 0, 1, alpha, 0
representative = 1, 0, beta, 0
representative = 0, 0, 1, 0
representative = 0, 0, 0, 1
";

const CONVDIFF_CATALOG: &str = "name = convdiff
logic = convdiff
parameters = alpha, beta
representative = 0, 1, 0, 0
representative = 0, 0, 1, 0
representative = 1, alpha, 0, beta
";

impl OptimalSystem {
    pub fn builtin(name: &str) -> Option<Self> {
        let text = match name {
            "ricci" => RICCI_CATALOG,
            "convdiff" => CONVDIFF_CATALOG,
            _ => return None,
        };
        Some(OptimalSystem::from_text(text).expect("builtin catalogs parse"))
    }

    /// Builtin name or path to a catalog file.
    pub fn load(spec: &str) -> Result<Self, OptimalError> {
        if let Some(s) = OptimalSystem::builtin(spec) {
            return Ok(s);
        }
        let text = std::fs::read_to_string(spec).map_err(|_| OptimalError::Unknown(spec.to_string()))?;
        OptimalSystem::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self, OptimalError> {
        let entries = read_entries(text)?;
        let mut name = "custom".to_string();
        let mut parameters = Vec::new();
        let mut logic = CaseLogic::Generic;
        for e in &entries {
            match e.key.as_str() {
                "name" => name = e.value.clone(),
                "parameters" => parameters = split_list(&e.value),
                "logic" => {
                    logic = CaseLogic::parse(&e.value)
                        .ok_or_else(|| e.invalid(format!("unknown case logic `{}`", e.value)))?
                }
                "representative" => {}
                _ => return Err(e.invalid(format!("unknown key `{}`", e.key)).into()),
            }
        }
        let ctx = ParseContext::default().with_params(parameters.clone());
        ctx.validate().map_err(|m| FileError::Invalid { line: 0, message: m })?;
        let mut representatives = Vec::new();
        for e in entries.iter().filter(|e| e.key == "representative") {
            let mut coeffs = Vec::new();
            for part in split_list(&e.value) {
                let sub = crate::io::Entry {
                    key: e.key.clone(),
                    value: part,
                    line: e.line,
                };
                let c = sub.parse_expr(&ctx)?;
                if c.symbols().iter().any(|s| !parameters.iter().any(|p| p == s.name())) {
                    return Err(e.invalid("coefficients may only use the declared parameters").into());
                }
                coeffs.push(c);
            }
            representatives.push(coeffs);
        }
        if representatives.is_empty() {
            return Err(FileError::Missing("representative".into()).into());
        }
        let r = representatives[0].len();
        if let Some(bad) = entries
            .iter()
            .filter(|e| e.key == "representative")
            .zip(&representatives)
            .find(|(_, c)| c.len() != r)
        {
            return Err(bad.0.invalid("representatives differ in length").into());
        }
        Ok(OptimalSystem {
            name,
            parameters,
            representatives,
            logic,
        })
    }

    /// `V2 + alpha*V3` style label.
    pub fn label(&self, k: usize) -> String {
        let mut out = String::new();
        for (i, c) in self.representatives[k].iter().enumerate() {
            if c.is_zero_const() {
                continue;
            }
            let text = c.to_string();
            let (neg, body) = match text.strip_prefix('-') {
                Some(rest) if !matches!(c.node(), crate::expr::Node::Add(_)) => (true, rest.to_string()),
                _ => (false, text),
            };
            let term = match body.as_str() {
                "1" => format!("V{}", i + 1),
                _ if matches!(c.node(), crate::expr::Node::Add(_)) => format!("({body})*V{}", i + 1),
                _ => format!("{body}*V{}", i + 1),
            };
            match (out.is_empty(), neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    /// Same catalog without representative `k`.
    pub fn without(&self, k: usize) -> Self {
        let mut s = self.clone();
        s.representatives.remove(k);
        s
    }

    fn params_of(&self, k: usize) -> Vec<String> {
        let mut out: Vec<String> = self
            .parameters
            .iter()
            .filter(|p| {
                self.representatives[k]
                    .iter()
                    .any(|c| c.symbols().iter().any(|s| s.name() == p.as_str()))
            })
            .cloned()
            .collect();
        out.dedup();
        out
    }

    fn eval_at(&self, k: usize, values: &BTreeMap<String, f64>) -> Vec<f64> {
        let mut p = Point::new();
        for (n, v) in values {
            p = p.with(n, *v);
        }
        self.representatives[k]
            .iter()
            .map(|c| c.eval(&p).unwrap_or(f64::NAN))
            .collect()
    }

    fn exact_at(&self, k: usize, values: &BTreeMap<String, Rational>) -> Option<Vec<Rational>> {
        let mut p = ExactPoint::default();
        for (n, v) in values {
            p.vars.insert(Var::sym(n), v.clone());
        }
        self.representatives[k].iter().map(|c| c.eval_exact(&p)).collect()
    }
}

/// Family `r0 + sum p_k r_k` of one representative.
#[derive(Clone, Debug)]
struct AffineFamily {
    params: Vec<String>,
    r0: Vec<f64>,
    dirs: Vec<Vec<f64>>,
}

fn affine_family(sys: &OptimalSystem, k: usize) -> Result<AffineFamily, OptimalError> {
    let params = sys.params_of(k);
    let zero: BTreeMap<String, f64> = params.iter().map(|p| (p.clone(), 0.0)).collect();
    let r0 = sys.eval_at(k, &zero);
    let mut dirs = Vec::new();
    for p in &params {
        let mut at = zero.clone();
        at.insert(p.clone(), 1.0);
        let v = sys.eval_at(k, &at);
        dirs.push(v.iter().zip(&r0).map(|(a, b)| a - b).collect::<Vec<f64>>());
    }
    // affine check at an off-axis point
    let probe: BTreeMap<String, f64> = params
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), 1.5 + i as f64))
        .collect();
    let got = sys.eval_at(k, &probe);
    let mut want = r0.clone();
    for (i, d) in dirs.iter().enumerate() {
        for (w, x) in want.iter_mut().zip(d) {
            *w += (1.5 + i as f64) * x;
        }
    }
    let affine = got
        .iter()
        .zip(&want)
        .all(|(a, b)| (a - b).abs() < 1e-12 * (1.0 + b.abs()));
    if !affine || r0.iter().all(|x| *x == 0.0) || r0.iter().any(|x| !x.is_finite()) {
        return Err(OptimalError::NotAffine(k));
    }
    Ok(AffineFamily { params, r0, dirs })
}

/// Least-squares solve of small dense systems via normal equations.
fn least_squares(cols: &[Vec<f64>], target: &[f64]) -> Option<Vec<f64>> {
    let n = cols.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
        }
        a[i][n] = cols[i].iter().zip(target).map(|(x, y)| x * y).sum();
    }
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for j in c..=n {
                    a[i][j] -= f * a[c][j];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

/// Fit `s*b = r0 + sum p_k r_k`; returns `(s, p, max error, euclidean error)`.
fn fit(fam: &AffineFamily, b: &[f64]) -> Option<(f64, Vec<f64>, f64, f64)> {
    let mut cols = vec![b.to_vec()];
    cols.extend(fam.dirs.iter().map(|d| d.iter().map(|x| -x).collect::<Vec<f64>>()));
    let x = least_squares(&cols, &fam.r0)?;
    let s = x[0];
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    let mut err: f64 = 0.0;
    let mut sq = 0.0;
    for i in 0..b.len() {
        let mut rep = fam.r0[i];
        for (k, d) in fam.dirs.iter().enumerate() {
            rep += x[k + 1] * d[i];
        }
        let e = s * b[i] - rep;
        err = err.max(e.abs());
        sq += e * e;
    }
    Some((s, x[1..].to_vec(), err, sq.sqrt()))
}

/// Outcome of reducing one coefficient vector.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    pub coefficients: Vec<f64>,
    pub representative: usize,
    pub label: String,
    pub parameters: BTreeMap<String, f64>,
    /// Applied first to last.
    pub maps: Vec<AdjointMap>,
    pub scaling: f64,
    /// `scaling * maps(coefficients)`.
    pub image: Vec<f64>,
    /// Max deviation from the representative, relative to `max(1, |image|)`.
    pub error: f64,
    pub notes: Vec<String>,
}

/// Acceptance threshold for `scaling * maps(a)` against the representative.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Reduction machinery for one algebra and one catalog.
pub struct Classifier<'a> {
    pub algebra: &'a LieAlgebra,
    pub system: &'a OptimalSystem,
    closed: Vec<Option<ClosedAdjoint>>,
    families: Vec<AffineFamily>,
}

impl<'a> Classifier<'a> {
    pub fn new(algebra: &'a LieAlgebra, system: &'a OptimalSystem) -> Result<Self, OptimalError> {
        let r = algebra.dim();
        if let Some(bad) = system.representatives.iter().find(|c| c.len() != r) {
            return Err(OptimalError::Dimension {
                got: bad.len(),
                want: r,
            });
        }
        let closed = algebra.closed_adjoints()?;
        let families = (0..system.representatives.len())
            .map(|k| affine_family(system, k))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Classifier {
            algebra,
            system,
            closed,
            families,
        })
    }

    pub fn adjoint(&self, i: usize, eps: f64) -> Result<AdjointMap, OptimalError> {
        Ok(match &self.closed[i] {
            Some(c) => AdjointMap {
                generator: i,
                epsilon: eps,
                matrix: c.eval(eps),
                closed_form: true,
            },
            None => self.algebra.adjoint_numeric(i, eps)?,
        })
    }

    /// Carry `a` onto a catalog representative. The result is checked by
    /// re-applying the returned maps.
    pub fn reduce(&self, a: &[f64]) -> Result<Reduction, OptimalError> {
        let r = self.algebra.dim();
        if a.len() != r {
            return Err(OptimalError::Dimension { got: a.len(), want: r });
        }
        let norm = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm == 0.0 {
            return Err(OptimalError::Zero);
        }
        let mut notes = Vec::new();
        let maps = match self.system.logic {
            CaseLogic::Ricci => self.ricci_steps(a, norm)?,
            CaseLogic::ConvDiff => self.convdiff_steps(a, norm, &mut notes)?,
            CaseLogic::Generic => self.search_steps(a)?,
        };
        let mut b = a.to_vec();
        for m in &maps {
            b = m.apply(&b);
        }
        self.finish(a, b, maps, notes)
    }

    fn finish(
        &self,
        a: &[f64],
        b: Vec<f64>,
        maps: Vec<AdjointMap>,
        notes: Vec<String>,
    ) -> Result<Reduction, OptimalError> {
        let best = self
            .families
            .iter()
            .enumerate()
            .filter_map(|(k, f)| fit(f, &b).map(|x| (k, x)))
            .min_by(|x, y| x.1 .2.total_cmp(&y.1 .2));
        let Some((k, (s, p, err, _))) = best else {
            return Err(OptimalError::NoCaseMatched {
                coefficients: a.to_vec(),
                reason: format!("image {b:?} fits no representative"),
            });
        };
        let image: Vec<f64> = b.iter().map(|x| s * x).collect();
        let scale = image.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if err > RECONSTRUCTION_TOL * scale {
            return Err(OptimalError::NoCaseMatched {
                coefficients: a.to_vec(),
                reason: format!(
                    "closest representative {} misses the image {:?} by {:.3e}",
                    self.system.label(k),
                    image,
                    err
                ),
            });
        }
        Ok(Reduction {
            coefficients: a.to_vec(),
            representative: k,
            label: self.system.label(k),
            parameters: self.families[k].params.iter().cloned().zip(p).collect(),
            maps,
            scaling: s,
            image,
            error: err / scale,
            notes,
        })
    }

    fn nonzero(x: f64, norm: f64) -> bool {
        x.abs() > 1e-12 * norm
    }

    /// Basis order `V1 = x d_x - u d_u, V2 = d_x, V3 = y d_y - u d_u, V4 = d_y`.
    fn ricci_steps(&self, a: &[f64], norm: f64) -> Result<Vec<AdjointMap>, OptimalError> {
        let nz = |x: f64| Self::nonzero(x, norm);
        let mut maps = Vec::new();
        let mut v = a.to_vec();
        let lead = if nz(a[0]) {
            0
        } else if nz(a[1]) {
            1
        } else if nz(a[2]) {
            2
        } else {
            3
        };
        let s = 1.0 / a[lead];
        v.iter_mut().for_each(|x| *x *= s);
        if lead == 0 && nz(v[1]) {
            let m = self.adjoint(1, v[1])?;
            v = m.apply(&v);
            maps.push(m);
        }
        if lead <= 2 && nz(v[3]) {
            if !nz(v[2]) {
                return Err(OptimalError::NoCaseMatched {
                    coefficients: a.to_vec(),
                    reason: "the V4 coefficient cannot be removed when the V3 coefficient vanishes".into(),
                });
            }
            let m = self.adjoint(3, v[3] / v[2])?;
            maps.push(m);
        }
        Ok(maps)
    }

    /// Basis order `V1` (scaling), `V2` (rotation), `V3 = d_x`, `V4 = d_y`.
    fn convdiff_steps(&self, a: &[f64], norm: f64, notes: &mut Vec<String>) -> Result<Vec<AdjointMap>, OptimalError> {
        let nz = |x: f64| Self::nonzero(x, norm);
        let mut maps = Vec::new();
        let mut v = a.to_vec();
        if nz(a[0]) {
            let s = 1.0 / a[0];
            v.iter_mut().for_each(|x| *x *= s);
            if nz(v[2]) {
                maps.push(self.adjoint(2, 2.0 * v[2])?);
            }
        } else if nz(a[1]) {
            let s = 1.0 / a[1];
            v.iter_mut().for_each(|x| *x *= s);
            if nz(v[2]) {
                let m = self.adjoint(3, v[2])?;
                v = m.apply(&v);
                maps.push(m);
            }
            if nz(v[3]) {
                maps.push(self.adjoint(2, -v[3])?);
            }
        } else if nz(a[2]) {
            let s = 1.0 / a[2];
            v.iter_mut().for_each(|x| *x *= s);
            let b4 = v[3];
            if nz(b4) {
                // root of (b4/2) eps^2 + eps - b4 = 0 that vanishes with b4
                let eq = ((1.0 + 2.0 * b4 * b4).sqrt() - 1.0) / b4;
                let m = self.adjoint(1, eq)?;
                let w = m.apply(&v);
                let scale = w.iter().fold(1.0f64, |m, x| m.max(x.abs()));
                if w[3].abs() <= RECONSTRUCTION_TOL * scale {
                    maps.push(m);
                } else {
                    notes.push(format!(
                        "quadratic step eps = {eq:.12} leaves V4 coefficient {:.3e}; exact step eps = atan(b4) = {:.12} used",
                        w[3],
                        b4.atan()
                    ));
                    maps.push(self.adjoint(1, b4.atan())?);
                }
            }
        } else {
            notes.push("pure V4: rotated onto V3 by eps = pi/2".into());
            maps.push(self.adjoint(1, FRAC_PI_2)?);
        }
        Ok(maps)
    }

    /// Coordinate descent over one adjoint parameter per generator,
    /// each bounded by `|eps| <= 10`, run separately for every family.
    fn search_steps(&self, a: &[f64]) -> Result<Vec<AdjointMap>, OptimalError> {
        let r = self.algebra.dim();
        let mut orders: Vec<Vec<usize>> = vec![(0..r).collect()];
        if r <= 5 {
            orders = permutations(r);
        }
        let mut best: Option<(f64, Vec<f64>)> = None;
        'search: for fam in &self.families {
            for order in &orders {
                let (f, eps) = self.descend(a, fam, order);
                if best.as_ref().map_or(true, |(b, _)| f < *b) {
                    best = Some((f, eps));
                }
                if f < 1e-13 {
                    break 'search;
                }
            }
        }
        let eps = best.map(|b| b.1).unwrap_or_default();
        eps.iter()
            .enumerate()
            .filter(|(_, e)| **e != 0.0)
            .map(|(i, e)| self.adjoint(i, *e))
            .collect()
    }

    fn descend(&self, a: &[f64], fam: &AffineFamily, order: &[usize]) -> (f64, Vec<f64>) {
        let r = self.algebra.dim();
        let objective = |eps: &[f64]| -> f64 {
            let mut b = a.to_vec();
            for (i, e) in eps.iter().enumerate() {
                match self.adjoint(i, *e) {
                    Ok(m) => b = m.apply(&b),
                    Err(_) => return f64::INFINITY,
                }
            }
            let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            fit(fam, &b).map_or(f64::INFINITY, |(s, _, _, e)| e / (s.abs() * scale).max(1.0))
        };
        let mut eps = vec![0.0; r];
        let mut best = objective(&eps);
        for _ in 0..8 {
            if best < 1e-13 {
                break;
            }
            let before = best;
            for &i in order {
                let mut arg = eps[i];
                for k in 0..=80 {
                    let mut e = eps.clone();
                    e[i] = -10.0 + 20.0 * k as f64 / 80.0;
                    let f = objective(&e);
                    if f < best {
                        best = f;
                        arg = e[i];
                    }
                }
                // golden-section refinement around the best grid point
                let mut lo = (arg - 0.25).max(-10.0);
                let mut hi = (arg + 0.25).min(10.0);
                let g = (5f64.sqrt() - 1.0) / 2.0;
                let at = |t: f64| {
                    let mut e = eps.clone();
                    e[i] = t;
                    objective(&e)
                };
                for _ in 0..80 {
                    let c = hi - g * (hi - lo);
                    let d = lo + g * (hi - lo);
                    if at(c) < at(d) {
                        hi = d;
                    } else {
                        lo = c;
                    }
                }
                let mid = (lo + hi) / 2.0;
                let f = at(mid);
                if f < best {
                    best = f;
                    eps[i] = mid;
                } else {
                    eps[i] = arg;
                }
            }
            if before - best < 1e-15 {
                break;
            }
        }
        (best, eps)
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Convenience wrapper around [`Classifier::reduce`].
pub fn reduce_to_representative(alg: &LieAlgebra, sys: &OptimalSystem, a: &[f64]) -> Result<Reduction, OptimalError> {
    Classifier::new(alg, sys)?.reduce(a)
}

/// Reduction of a vector with a prescribed zero pattern.
#[derive(Clone, Debug, Serialize)]
pub struct PatternCheck {
    /// `1` marks a nonzero coefficient, e.g. `0101`.
    pub pattern: String,
    pub coefficients: Vec<f64>,
    pub reached: Option<String>,
    pub error: Option<String>,
}

/// Invariant comparison of two catalog entries.
#[derive(Clone, Debug, Serialize)]
pub struct PairSeparation {
    pub first: String,
    pub second: String,
    pub separated: bool,
    pub by: String,
}

/// Whether different values of a family parameter give inequivalent
/// subalgebras according to the invariants.
#[derive(Clone, Debug, Serialize)]
pub struct ParameterSeparation {
    pub representative: String,
    pub parameter: String,
    pub separated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub catalog: String,
    pub trials: usize,
    pub reached: usize,
    pub max_error: f64,
    /// Up to ten failing vectors with the reason.
    pub failures: Vec<(Vec<f64>, String)>,
    pub patterns: Vec<PatternCheck>,
    pub pairs: Vec<PairSeparation>,
    pub parameters: Vec<ParameterSeparation>,
    /// Trials whose reduction carried an audit note.
    pub noted: usize,
}

impl VerifyReport {
    pub fn all_reachable(&self) -> bool {
        self.reached == self.trials
    }

    pub fn all_separated(&self) -> bool {
        self.pairs.iter().all(|p| p.separated)
    }
}

/// Adjoint-orbit invariants of `X = sum a_i V_i` up to scaling.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Signature {
    /// Image in `g / [g, g]`, scaled so the first nonzero entry is 1.
    quotient: Vec<Rational>,
    ad_rank: usize,
    /// Zero pattern of the characteristic polynomial of `ad X`.
    char_zeros: Vec<bool>,
}

impl Signature {
    fn differs(&self, o: &Signature) -> Option<&'static str> {
        if self.quotient != o.quotient {
            Some("image modulo the derived algebra")
        } else if self.ad_rank != o.ad_rank {
            Some("rank of ad")
        } else if self.char_zeros != o.char_zeros {
            Some("eigenvalue pattern of ad")
        } else {
            None
        }
    }
}

struct Invariants {
    constants: Vec<Vec<Vec<Rational>>>,
    derived: Vec<Vec<Rational>>,
    derived_pivots: Vec<usize>,
}

impl Invariants {
    fn new(alg: &LieAlgebra) -> Result<Self, LieError> {
        let c = alg.rational_constants()?;
        let r = alg.dim();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for i in 0..r {
            for j in 0..r {
                rows.push(c[i][j].clone());
            }
        }
        let pivots = linalg::rref(&mut rows, r);
        Ok(Invariants {
            constants: c,
            derived: rows,
            derived_pivots: pivots,
        })
    }

    fn signature(&self, a: &[Rational]) -> Signature {
        let r = a.len();
        let mut q = a.to_vec();
        for (row, &p) in self.derived.iter().zip(&self.derived_pivots) {
            let f = q[p].clone();
            if !f.is_zero() {
                for (x, y) in q.iter_mut().zip(row) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(first) = q.iter().find(|x| !x.is_zero()).cloned() {
            q.iter_mut().for_each(|x| *x /= &first);
        }
        let mut ad = vec![vec![Rational::zero(); r]; r];
        for (i, ai) in a.iter().enumerate() {
            for j in 0..r {
                for k in 0..r {
                    ad[k][j] += ai * &self.constants[i][j][k];
                }
            }
        }
        let ad_rank = linalg::rank(&ad, r);
        let cp = super::adjoint::char_poly_of(&ad);
        Signature {
            quotient: q,
            ad_rank,
            char_zeros: cp.iter().map(Zero::is_zero).collect(),
        }
    }
}

fn sample_params(names: &[String], rng: &mut ChaCha8Rng) -> BTreeMap<String, Rational> {
    names
        .iter()
        .map(|n| {
            let k: i64 = rng.gen_range(1..=24) * if rng.gen_bool(0.5) { 1 } else { -1 };
            (n.clone(), Rational::new(k.into(), 4.into()))
        })
        .collect()
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reachability over random vectors, zero-pattern sweep and invariant
/// separation of the catalog entries.
pub fn verify_optimal(
    alg: &LieAlgebra,
    sys: &OptimalSystem,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<VerifyReport, OptimalError> {
    let cl = Classifier::new(alg, sys)?;
    let r = alg.dim();
    let outcomes = exec.map_range(trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let a: Vec<f64> = (0..r).map(|_| rng.gen_range(-4.0..4.0)).collect();
        (a.clone(), cl.reduce(&a))
    });
    let mut reached = 0;
    let mut noted = 0;
    let mut max_error: f64 = 0.0;
    let mut failures = Vec::new();
    for (a, o) in outcomes {
        match o {
            Ok(red) => {
                reached += 1;
                max_error = max_error.max(red.error);
                if !red.notes.is_empty() {
                    noted += 1;
                }
            }
            Err(e) if failures.len() < 10 => failures.push((a, e.to_string())),
            Err(_) => {}
        }
    }

    let patterns = exec.map_range((1usize << r) - 1, |m| {
        let mask = m + 1;
        let mut rng = trial_rng(seed, 1 << 40 | mask as u64);
        let a: Vec<f64> = (0..r)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    let x: f64 = rng.gen_range(0.25..4.0);
                    if rng.gen_bool(0.5) {
                        x
                    } else {
                        -x
                    }
                } else {
                    0.0
                }
            })
            .collect();
        let pattern: String = (0..r).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect();
        match cl.reduce(&a) {
            Ok(red) => PatternCheck {
                pattern,
                coefficients: a,
                reached: Some(red.label),
                error: None,
            },
            Err(e) => PatternCheck {
                pattern,
                coefficients: a,
                reached: None,
                error: Some(e.to_string()),
            },
        }
    });

    let inv = Invariants::new(alg)?;
    let mut rng = trial_rng(seed, 1 << 41);
    let n = sys.representatives.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut separated = true;
            let mut by = String::new();
            for _ in 0..4 {
                let pi = sample_params(&sys.params_of(i), &mut rng);
                let pj = sample_params(&sys.params_of(j), &mut rng);
                let (Some(ai), Some(aj)) = (sys.exact_at(i, &pi), sys.exact_at(j, &pj)) else {
                    separated = false;
                    by = "representative not exactly evaluable".into();
                    break;
                };
                match inv.signature(&ai).differs(&inv.signature(&aj)) {
                    Some(reason) => {
                        if by.is_empty() {
                            by = reason.into();
                        }
                    }
                    None => {
                        separated = false;
                        by = format!("no invariant distinguishes them at {pi:?} / {pj:?}");
                        break;
                    }
                }
            }
            pairs.push(PairSeparation {
                first: sys.label(i),
                second: sys.label(j),
                separated,
                by,
            });
        }
    }

    let mut parameters = Vec::new();
    for k in 0..n {
        for p in sys.params_of(k) {
            let base = sample_params(&sys.params_of(k), &mut rng);
            let mut other = base.clone();
            let v = other.get_mut(&p).unwrap();
            *v = &*v + Rational::new(7.into(), 8.into());
            let separated = match (sys.exact_at(k, &base), sys.exact_at(k, &other)) {
                (Some(a), Some(b)) => inv.signature(&a).differs(&inv.signature(&b)).is_some(),
                _ => false,
            };
            parameters.push(ParameterSeparation {
                representative: sys.label(k),
                parameter: p,
                separated,
            });
        }
    }

    Ok(VerifyReport {
        catalog: sys.name.clone(),
        trials,
        reached,
        max_error,
        failures,
        patterns,
        pairs,
        parameters,
        noted,
    })
}

#[cfg(test)]
fn apply_all(maps: &[AdjointMap], a: &[f64]) -> Vec<f64> {
    maps.iter()
        .fold(a.to_vec(), |b, m| super::adjoint::mat_vec(&m.matrix, &b))
}
