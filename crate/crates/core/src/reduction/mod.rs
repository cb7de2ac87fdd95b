//! Similarity reductions: group invariants of a single generator, the
//! reduced equation in `(t, z)`, and residual checks for closed-form
//! solutions.

mod audit;
mod reduce;
mod solution;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{
    random_point, rational_sqrt, Assumptions, EvalError, Expr, Node, Point, Rational, Var, ZeroTest, ZeroTestConfig,
};
use crate::pde::{PdeError, VectorField};

pub use audit::{audit_reduced, audit_solution, AuditReport, Repair, TEXT_REPAIRS};
pub use reduce::{
    equivalent_up_to_factor, reduce, reduced_context, verify_reduced_solution, ReducedCheck, ReducedEquation, H_JETS,
};
pub use solution::{load_solutions, parse_solutions, verify_solution, SolutionCandidate, SolutionReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("unsupported generator: {0}")]
    Unsupported(String),
    #[error("invariant {index} is not annihilated by the generator ({detail})")]
    NotInvariant { index: usize, detail: String },
    #[error("third invariant must have the form u*w(t, x, y); got {0}")]
    Shape(String),
    #[error("cannot solve z = {0} for x or y")]
    NotSolvable(String),
    #[error("reduced equation still depends on x, y: {0}")]
    Residual(String),
    #[error("domain exhausted: only {found} of {wanted} sample points were admissible")]
    DomainExhausted { found: usize, wanted: usize },
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Input(String),
}

/// Three functionally independent invariants `(I1, I2, I3)` of a generator
/// with `I1 = t` in the frozen-time cases, `I2` the similarity variable and
/// `I3` linear in `u`.
#[derive(Clone, Debug, Serialize)]
pub struct InvariantSet {
    pub generator: VectorField,
    pub invariants: [Expr; 3],
    /// How the invariants were found ("supplied" for user input).
    pub method: String,
    /// Variables that must be positive for the invariants to be real.
    pub positive: Vec<String>,
    /// Generic nonvanishing conditions on parameters that were assumed.
    pub conditions: Vec<String>,
}

impl fmt::Display for InvariantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.invariants;
        write!(f, "I1 = {a}, I2 = {b}, I3 = {c}")
    }
}

impl InvariantSet {
    pub fn supplied(generator: &VectorField, invariants: [Expr; 3], positive: Vec<String>) -> Self {
        InvariantSet {
            generator: generator.clone(),
            invariants: invariants.map(|e| e.normalize()),
            method: "supplied".into(),
            positive,
            conditions: Vec::new(),
        }
    }

    pub fn assumptions(&self, base: &Assumptions) -> Assumptions {
        self.positive.iter().fold(base.clone(), |a, n| a.with(n))
    }

    pub fn similarity(&self) -> &Expr {
        &self.invariants[1]
    }

    /// `S` with `u = S * h` on level sets of `I3 = h`; needs `I3 = u*w`.
    pub fn prefactor(&self, asm: &Assumptions) -> Result<Expr, ReductionError> {
        let i3 = &self.invariants[2];
        let u = Var::u();
        let w = i3.diff_with(&u, asm);
        if w.contains_var(&u) || w.is_zero_const() || !(i3 - &(Expr::u() * &w)).normalize_with(asm).is_zero_const() {
            return Err(ReductionError::Shape(i3.to_string()));
        }
        Ok(w.recip().normalize_with(asm))
    }
}

fn xyu_free(e: &Expr) -> bool {
    ["x", "y"].iter().all(|n| !e.contains_var(&Var::sym(n))) && !e.contains_var(&Var::u())
}

fn coeff_of(e: &Expr, v: &Var) -> Expr {
    e.diff(v).normalize()
}

fn nonzero(e: &Expr, conditions: &mut Vec<String>) -> bool {
    if e.is_zero_const() {
        return false;
    }
    if e.as_const().is_none() {
        let c = format!("{e} != 0");
        if !conditions.contains(&c) {
            conditions.push(c);
        }
    }
    true
}

/// Square root with perfect squares taken exactly: rationals and products
/// of even powers.
fn sqrt_simplified(e: &Expr) -> Expr {
    fn exact(e: &Expr) -> Option<Expr> {
        match e.node() {
            Node::Const(c) if c >= &Rational::from_integer(0.into()) => rational_sqrt(c).map(Expr::constant),
            Node::Pow(b, k) => {
                let k = k.as_integer()?;
                (k % 2 == 0).then(|| b.powi(k / 2))
            }
            Node::Mul(fs) => fs.iter().map(exact).collect::<Option<Vec<_>>>().map(Expr::mul_all),
            _ => None,
        }
    }
    let e = e.normalize();
    exact(&e).map(|r| r.normalize()).unwrap_or_else(|| e.sqrt())
}

/// Flow clock along one axis for `dw/ds = a*w + b`: returns `exp(-k s)` as
/// an expression in `w`, dropping constant factors.
fn clock_exp(w: &Expr, a: &Expr, b: &Expr, k: &Expr, conds: &mut Vec<String>) -> Expr {
    if k.is_zero_const() {
        return Expr::one();
    }
    if nonzero(a, conds) {
        (w + &(b / a)).pow(-(k / a))
    } else {
        (-(k * w) / b.clone()).exp()
    }
}

/// Sign of `e` over sampled parameter values: `Some(1)`, `Some(-1)`, or
/// `None` when it changes sign or cannot be evaluated.
fn sampled_sign(e: &Expr, asm: &Assumptions, seed: u64) -> Option<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sign = 0i8;
    for _ in 0..32 {
        let v = e.eval(&random_point(e, asm, &mut rng)).ok()?;
        let s = if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            return None;
        };
        if sign != 0 && s != sign {
            return None;
        }
        sign = s;
    }
    Some(sign)
}

/// Invariants of a generator with `tau = 0`, `phi = lambda*u`, and either
/// axis-decoupled affine `xi(x)`, `eta(y)` or a planar linear drift in
/// `(x, y)` (coefficients may depend on `t`, which the flow leaves fixed).
pub fn invariants_of(v: &VectorField, asm: &Assumptions) -> Result<InvariantSet, ReductionError> {
    if !v.tau.is_zero_const() {
        return Err(ReductionError::Unsupported("tau != 0".into()));
    }
    let (x, y, u) = (Var::sym("x"), Var::sym("y"), Var::u());
    let lam = coeff_of(&v.phi, &u);
    if !xyu_free(&lam) || !(&v.phi - &(&lam * &Expr::u())).normalize().is_zero_const() {
        return Err(ReductionError::Unsupported(format!("phi = {} is not lambda*u", v.phi)));
    }
    let m = [
        [coeff_of(&v.xi, &x), coeff_of(&v.xi, &y)],
        [coeff_of(&v.eta, &x), coeff_of(&v.eta, &y)],
    ];
    let b = [
        (&v.xi - &(&m[0][0] * &Expr::sym("x") + &m[0][1] * &Expr::sym("y"))).normalize(),
        (&v.eta - &(&m[1][0] * &Expr::sym("x") + &m[1][1] * &Expr::sym("y"))).normalize(),
    ];
    if !m.iter().flatten().chain(&b).all(xyu_free) {
        return Err(ReductionError::Unsupported("xi, eta are not affine in (x, y)".into()));
    }
    let set = if m[0][1].is_zero_const() && m[1][0].is_zero_const() {
        decoupled(v, &m, &b, &lam)?
    } else {
        planar(v, &m, &b, &lam, asm)?
    };
    let check = verify_invariants(v, &set.invariants, &set.assumptions(asm), 0);
    if let Some((i, t)) = check.iter().enumerate().find(|(_, t)| !t.is_zero()) {
        return Err(ReductionError::NotInvariant {
            index: i + 1,
            detail: t.label().into(),
        });
    }
    Ok(set)
}

fn decoupled(v: &VectorField, m: &[[Expr; 2]; 2], b: &[Expr; 2], lam: &Expr) -> Result<InvariantSet, ReductionError> {
    let (x, y) = (Expr::sym("x"), Expr::sym("y"));
    let (a1, b1, a2, b2) = (&m[0][0], &b[0], &m[1][1], &b[1]);
    let mut conds = Vec::new();
    let mut positive = Vec::new();
    let moves_x = !(a1.is_zero_const() && b1.is_zero_const());
    let moves_y = !(a2.is_zero_const() && b2.is_zero_const());
    let i2 = match (moves_x, moves_y) {
        (false, false) => return Err(ReductionError::Unsupported("generator does not move x or y".into())),
        (false, true) => x.clone(),
        (true, false) => y.clone(),
        (true, true) => {
            if nonzero(a2, &mut conds) {
                (&y + &(b2 / a2)) * clock_exp(&x, a1, b1, a2, &mut conds)
            } else {
                &y - &(b2 * &clock_exp_log(&x, a1, b1, &mut conds))
            }
        }
    };
    let i3 = if moves_y {
        Expr::u() * clock_exp(&y, a2, b2, lam, &mut conds)
    } else {
        Expr::u() * clock_exp(&x, a1, b1, lam, &mut conds)
    };
    for (name, a, bb) in [("x", a1, b1), ("y", a2, b2)] {
        if !a.is_zero_const() && bb.is_zero_const() {
            positive.push(name.to_string());
        }
    }
    let asm = Assumptions::positive(positive.clone());
    Ok(InvariantSet {
        generator: v.clone(),
        invariants: [Expr::sym("t"), i2.normalize_with(&asm), i3.normalize_with(&asm)],
        method: "decoupled affine".into(),
        positive,
        conditions: conds,
    })
}

/// Flow time `s(w)` for `dw/ds = a*w + b`.
fn clock_exp_log(w: &Expr, a: &Expr, b: &Expr, conds: &mut Vec<String>) -> Expr {
    if nonzero(a, conds) {
        (w + &(b / a)).ln() / a.clone()
    } else {
        w / b
    }
}

fn planar(
    v: &VectorField,
    m: &[[Expr; 2]; 2],
    b: &[Expr; 2],
    lam: &Expr,
    asm: &Assumptions,
) -> Result<InvariantSet, ReductionError> {
    let mut conds = Vec::new();
    let det = (&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]).normalize();
    if !nonzero(&det, &mut conds) {
        return Err(ReductionError::Unsupported("singular linear part".into()));
    }
    // shift to the equilibrium
    let x0 = (-(&m[1][1] * &b[0] - &m[0][1] * &b[1]) / det.clone()).normalize();
    let y0 = (-(&m[0][0] * &b[1] - &m[1][0] * &b[0]) / det.clone()).normalize();
    let y1 = (Expr::sym("x") - x0).normalize();
    let y2 = (Expr::sym("y") - y0).normalize();
    let mu = ((&m[0][0] + &m[1][1]) / Expr::int(2)).normalize();
    let p = ((&m[0][0] - &m[1][1]) / Expr::int(2)).normalize();
    let s = (&p * &p + &m[0][1] * &m[1][0]).normalize();
    let u = Expr::u();
    let (i2, i3, method) = if s.is_zero_const() {
        // defective: w1 = l.Y grows like exp(mu s), m.Y / w1 is a clock
        let l = left_eigen(m, &mu, &mut conds);
        let w1 = (&l[0] * &y1 + &l[1] * &y2).normalize();
        let (mv, k) = if l[1].is_zero_const() {
            ([Expr::zero(), Expr::one()], 0)
        } else {
            ([Expr::one(), Expr::zero()], 1)
        };
        let n = [[p.clone(), m[0][1].clone()], [m[1][0].clone(), -&p]];
        let mn = [
            (&mv[0] * &n[0][0] + &mv[1] * &n[1][0]).normalize(),
            (&mv[0] * &n[0][1] + &mv[1] * &n[1][1]).normalize(),
        ];
        let kappa = (&mn[k] / &l[k]).normalize();
        nonzero(&kappa, &mut conds);
        let my = &mv[0] * &y1 + &mv[1] * &y2;
        let clock = my / (kappa * w1.clone());
        (
            &w1 * &(-(&mu * &clock)).exp(),
            &u * &(-(lam * &clock)).exp(),
            "planar linear, defective",
        )
    } else {
        match sampled_sign(&s, asm, 1) {
            Some(-1) => {
                let omega = sqrt_simplified(&-&s);
                // J N is definite here, so q has the sign of m21
                let q = ((&m[1][0] * &y1.powi(2) - Expr::int(2) * &p * &y1 * &y2 - &m[0][1] * &y2.powi(2))
                    / m[1][0].clone())
                .normalize();
                let w2 = (&p * &y1 + &m[0][1] * &y2) / omega.clone();
                let angle = Expr::apply(crate::expr::FuncKind::Arctan, w2 / y1.clone());
                if mu.is_zero_const() {
                    (q, &u * &(lam * &angle / omega).exp(), "planar linear, rotation")
                } else {
                    nonzero(&mu, &mut conds);
                    (
                        q.ln() + Expr::int(2) * &mu * &angle / omega,
                        &u * &q.pow(-(lam / &(Expr::int(2) * &mu))),
                        "planar linear, spiral",
                    )
                }
            }
            Some(1) => {
                let r = sqrt_simplified(&s);
                let l1 = (&mu + &r).normalize();
                let l2 = (&mu - &r).normalize();
                let e1 = left_eigen(m, &l1, &mut conds);
                let e2 = left_eigen(m, &l2, &mut conds);
                let w1 = &e1[0] * &y1 + &e1[1] * &y2;
                let w2 = &e2[0] * &y1 + &e2[1] * &y2;
                (
                    &w2 * &w1.pow(-(&l2 / &l1)),
                    &u * &w1.pow(-(lam / &l1)),
                    "planar linear, real eigenvalues",
                )
            }
            _ => {
                return Err(ReductionError::Unsupported(format!(
                    "sign of discriminant {s} depends on the parameters"
                )))
            }
        }
    };
    Ok(InvariantSet {
        generator: v.clone(),
        invariants: [Expr::sym("t"), i2.normalize(), i3.normalize()],
        method: method.into(),
        positive: Vec::new(),
        conditions: conds,
    })
}

/// Row vector `l` with `l M = ev l`.
fn left_eigen(m: &[[Expr; 2]; 2], ev: &Expr, conds: &mut Vec<String>) -> [Expr; 2] {
    if nonzero(&m[1][0], conds) {
        [m[1][0].clone(), (ev - &m[0][0]).normalize()]
    } else {
        [(ev - &m[1][1]).normalize(), m[0][1].clone()]
    }
}

/// `v(I)` for each candidate, tested for zero.
pub fn verify_invariants(v: &VectorField, cands: &[Expr], asm: &Assumptions, seed: u64) -> Vec<ZeroTest> {
    let cfg = ZeroTestConfig::default().with_positive(asm).with_seed(seed);
    cands
        .iter()
        .map(|c| v.apply_with(c, asm).normalize_with(asm).is_zero_with(&cfg))
        .collect()
}

/// Outcome of the numeric rank test of `d(I1, I2, I3)/d(t, x, y, u)`.
#[derive(Clone, Debug, Serialize)]
pub struct RankCheck {
    pub points: usize,
    pub full_rank: usize,
    /// Smallest normalized largest 3x3 minor seen.
    pub min_minor: f64,
}

impl RankCheck {
    pub fn independent(&self) -> bool {
        self.points > 0 && self.full_rank == self.points
    }
}

/// Functional independence by rank of the Jacobian at sampled points.
pub fn jacobian_rank(invariants: &[Expr; 3], asm: &Assumptions, points: usize, seed: u64) -> RankCheck {
    let vars = [Var::sym("t"), Var::sym("x"), Var::sym("y"), Var::u()];
    let jac: Vec<Vec<Expr>> = invariants
        .iter()
        .map(|i| vars.iter().map(|v| i.diff_with(v, asm)).collect())
        .collect();
    let all = Expr::add_all(
        jac.iter()
            .flatten()
            .cloned()
            .chain(invariants.iter().cloned())
            .collect(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RankCheck {
        points: 0,
        full_rank: 0,
        min_minor: f64::INFINITY,
    };
    let mut tries = 0;
    while out.points < points && tries < points * 20 {
        tries += 1;
        let mut pt = random_point(&all, asm, &mut rng);
        for v in &vars {
            if pt.get(v).is_none() {
                pt.set(v.clone(), 1.0);
            }
        }
        let Ok(j) = eval_matrix(&jac, &pt) else { continue };
        out.points += 1;
        let norms: Vec<f64> = j.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let scale = norms.iter().product::<f64>();
        let best = (0..4)
            .map(|skip| {
                let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
                det3(&j, &cols).abs()
            })
            .fold(0.0, f64::max);
        let rel = if scale > 0.0 { best / scale } else { 0.0 };
        out.min_minor = out.min_minor.min(rel);
        if rel > 1e-8 {
            out.full_rank += 1;
        }
    }
    out
}

fn eval_matrix(m: &[Vec<Expr>], p: &Point) -> Result<Vec<Vec<f64>>, EvalError> {
    let mut out = Vec::new();
    for row in m {
        let mut r = Vec::new();
        for e in row {
            let v = e.eval(p)?;
            if !v.is_finite() {
                return Err(EvalError::Domain("non-finite".into()));
            }
            r.push(v);
        }
        out.push(r);
    }
    Ok(out)
}

fn det3(j: &[Vec<f64>], c: &[usize]) -> f64 {
    let a = |r: usize, k: usize| j[r][c[k]];
    a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::PdeModel;

    fn gen(model: &str, coeffs: &[i64]) -> (PdeModel, VectorField) {
        let m = PdeModel::builtin(model).unwrap();
        let basis = m.reference_basis().unwrap();
        let c: Vec<Expr> = coeffs.iter().map(|&k| Expr::int(k)).collect();
        let v = VectorField::combination(&basis, &c);
        (m, v)
    }

    #[test]
    fn translation_plus_scaling() {
        let m = PdeModel::builtin("ricci").unwrap();
        let b = m.reference_basis().unwrap();
        let a = Expr::sym("alpha");
        let v = VectorField::combination(&b, &[Expr::zero(), Expr::one(), a, Expr::zero()]);
        let set = invariants_of(&v, &m.positive).unwrap();
        let want = (Expr::sym("y") * (-(Expr::sym("alpha") * Expr::sym("x"))).exp()).normalize();
        assert_eq!(set.invariants[1], want);
        assert_eq!(set.invariants[2], (Expr::sym("y") * Expr::u()).normalize());
        assert!(jacobian_rank(&set.invariants, &set.assumptions(&m.positive), 20, 0).independent());
    }

    #[test]
    fn scaling_pair() {
        let m = PdeModel::builtin("ricci").unwrap();
        let b = m.reference_basis().unwrap();
        let beta = Expr::sym("beta");
        let v = VectorField::combination(&b, &[Expr::one(), Expr::zero(), beta.clone(), Expr::zero()]);
        let set = invariants_of(&v, &m.positive).unwrap();
        let asm = set.assumptions(&m.positive);
        let z = (Expr::sym("y") * Expr::sym("x").pow(-beta.clone())).normalize_with(&asm);
        assert_eq!(set.invariants[1], z);
        assert_eq!(set.positive, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn swapping_x_and_y_mirrors_invariants() {
        let (m, v1) = gen("ricci", &[1, 0, 0, 0]);
        let (_, v3) = gen("ricci", &[0, 0, 1, 0]);
        let a = invariants_of(&v1, &m.positive).unwrap();
        let b = invariants_of(&v3, &m.positive).unwrap();
        let mut swap = std::collections::BTreeMap::new();
        swap.insert(Var::sym("x"), Expr::sym("y"));
        swap.insert(Var::sym("y"), Expr::sym("x"));
        for k in 0..3 {
            assert_eq!(a.invariants[k].subs(&swap).normalize(), b.invariants[k]);
        }
    }

    #[test]
    fn convdiff_translation_and_rotation() {
        let (m, v3) = gen("convdiff", &[0, 0, 1, 0]);
        let set = invariants_of(&v3, &m.positive).unwrap();
        assert_eq!(set.invariants[1], Expr::sym("y"));
        assert_eq!(set.invariants[2], Expr::u());
        let (_, v2) = gen("convdiff", &[0, 1, 0, 0]);
        let set = invariants_of(&v2, &m.positive).unwrap();
        assert_eq!(set.method, "planar linear, rotation");
        assert!(jacobian_rank(&set.invariants, &m.positive, 20, 0).independent());
    }

    #[test]
    fn spiral_family() {
        let m = PdeModel::builtin("convdiff").unwrap();
        let b = m.reference_basis().unwrap();
        let v = VectorField::combination(&b, &[Expr::one(), Expr::sym("alpha"), Expr::zero(), Expr::sym("beta")]);
        let set = invariants_of(&v, &m.positive).unwrap();
        assert_eq!(set.method, "planar linear, spiral");
        assert!(jacobian_rank(&set.invariants, &m.positive, 20, 3).independent());
    }

    #[test]
    fn rejects_nonlinear_phi_and_time_flow() {
        let v = VectorField::new(Expr::zero(), Expr::one(), Expr::zero(), Expr::u().powi(2));
        assert!(matches!(
            invariants_of(&v, &Assumptions::default()),
            Err(ReductionError::Unsupported(_))
        ));
        let v = VectorField::coordinate(0);
        assert!(invariants_of(&v, &Assumptions::default()).is_err());
    }

    #[test]
    fn printed_spiral_invariant_is_checked() {
        // a tempting but wrong invariant for the spiral family
        let m = PdeModel::builtin("convdiff").unwrap();
        let b = m.reference_basis().unwrap();
        let v = VectorField::combination(&b, &[Expr::one(), Expr::sym("alpha"), Expr::zero(), Expr::zero()]);
        let bad = (Expr::sym("x") - Expr::sym("v") * Expr::sym("t")) / Expr::sym("y");
        let r = verify_invariants(&v, &[Expr::sym("t"), bad], &m.positive, 0);
        assert!(r[0].is_zero() && !r[1].is_zero());
    }
}
