use std::collections::BTreeMap;

use serde::Serialize;

use super::solution::{grid_residual, GridStats};
use super::{InvariantSet, ReductionError};
use crate::expr::{Assumptions, Expr, Jet, Node, Var, ZeroTest, ZeroTestConfig};
use crate::io::ParseContext;
use crate::parallel::Execution;
use crate::pde::PdeModel;

/// Symbols standing for `h(t, z)` and the derivatives that can appear in a
/// reduced second-order equation.
pub const H_JETS: [&str; 5] = ["h", "h_t", "h_z", "h_2z", "h_tz"];

/// Parse context for reduced equations and their solutions: `t`, `z`, the
/// `h` jets, and the model parameters.
pub fn reduced_context(m: &PdeModel, extra: &[String]) -> ParseContext {
    let mut names: Vec<String> = vec!["z".into()];
    names.extend(H_JETS.iter().map(|s| s.to_string()));
    names.extend(m.parameters.iter().cloned());
    names.extend(extra.iter().cloned());
    ParseContext::default()
        .with_params(names)
        .with_positive(m.positive.names().map(String::from).collect::<Vec<_>>())
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedEquation {
    /// Expression in `t`, `z` and the `h` jets that vanishes on solutions.
    pub equation: Expr,
    pub similarity: Expr,
    /// `S` in `u = S * h(t, z)`.
    pub prefactor: Expr,
    /// Variable solved for in `z = I2`.
    pub eliminated: String,
    #[serde(skip)]
    pub positive: Assumptions,
}

fn h(name: &str) -> Expr {
    Expr::sym(name)
}

/// Split `e = P * w^k + Q` with `P`, `Q` free of `w`.
fn solve_power(e: &Expr, w: &str) -> Option<(Expr, Expr, Expr)> {
    let wv = Var::sym(w);
    let terms: Vec<Expr> = match e.node() {
        Node::Add(v) => v.clone(),
        _ => vec![e.clone()],
    };
    let mut k: Option<Expr> = None;
    let mut p = Vec::new();
    let mut q = Vec::new();
    for t in terms {
        if !t.contains_var(&wv) {
            q.push(t);
            continue;
        }
        let factors: Vec<Expr> = match t.node() {
            Node::Mul(v) => v.clone(),
            _ => vec![t.clone()],
        };
        let mut exp = None;
        let mut rest = Vec::new();
        for f in factors {
            match f.node() {
                Node::Sym(s) if s.name() == w => exp = Some(Expr::one()),
                Node::Pow(b, x) if matches!(b.node(), Node::Sym(s) if s.name() == w) && !x.contains_var(&wv) => {
                    exp = Some(x.clone())
                }
                _ if f.contains_var(&wv) => return None,
                _ => rest.push(f),
            }
        }
        let exp = exp?;
        match &k {
            Some(k0) if *k0 != exp => return None,
            _ => k = Some(exp),
        }
        p.push(Expr::mul_all(rest));
    }
    Some((Expr::add_all(p), Expr::add_all(q), k?))
}

/// Prolonged `u` jets for `u = S * h(t, z(t, x, y))`.
fn chain_rule_jets(s: &Expr, z: &Expr, asm: &Assumptions) -> BTreeMap<Var, Expr> {
    let d = |e: &Expr, n: &str| e.diff_with(&Var::sym(n), asm);
    let (zt, zx, zy) = (d(z, "t"), d(z, "x"), d(z, "y"));
    let (zxx, zyy, zxy) = (d(&zx, "x"), d(&zy, "y"), d(&zx, "y"));
    let (hh, ht, hz, hzz) = (h("h"), h("h_t"), h("h_z"), h("h_2z"));
    let hx = &hz * &zx;
    let hy = &hz * &zy;
    let h_t = &ht + &(&hz * &zt);
    let hxx = &hzz * &zx.powi(2) + &hz * &zxx;
    let hyy = &hzz * &zy.powi(2) + &hz * &zyy;
    let hxy = &hzz * &(&zx * &zy) + &hz * &zxy;
    let (st, sx, sy) = (d(s, "t"), d(s, "x"), d(s, "y"));
    let (sxx, syy, sxy) = (d(&sx, "x"), d(&sy, "y"), d(&sx, "y"));
    let two = Expr::int(2);
    let jets = [
        (Jet::new(0, 0, 0), s * &hh),
        (Jet::new(1, 0, 0), &st * &hh + s * &h_t),
        (Jet::new(0, 1, 0), &sx * &hh + s * &hx),
        (Jet::new(0, 0, 1), &sy * &hh + s * &hy),
        (Jet::new(0, 2, 0), &sxx * &hh + &two * &sx * &hx + s * &hxx),
        (Jet::new(0, 0, 2), &syy * &hh + &two * &sy * &hy + s * &hyy),
        (Jet::new(0, 1, 1), &sxy * &hh + &sx * &hy + &sy * &hx + s * &hxy),
    ];
    jets.into_iter().map(|(j, e)| (Var::Jet(j), e)).collect()
}

/// Reduce the model under `u = S(t, x, y) * h(t, z)` with `z = I2`.
/// Eliminates `y` (or `x`) through `z`, then checks that what is left
/// depends on the remaining variable only through an overall factor.
pub fn reduce(m: &PdeModel, inv: &InvariantSet) -> Result<ReducedEquation, ReductionError> {
    let asm = inv.assumptions(&m.positive);
    let check = super::verify_invariants(&inv.generator, &inv.invariants, &asm, 0);
    if let Some((i, t)) = check.iter().enumerate().find(|(_, t)| !t.is_zero()) {
        return Err(ReductionError::NotInvariant {
            index: i + 1,
            detail: t.label().into(),
        });
    }
    let s = inv.prefactor(&asm)?;
    reduce_shape(m, &s, inv.similarity(), &asm)
}

/// Reduction under the shape `u = s * h(t, z)` without invariance checks.
fn reduce_shape(m: &PdeModel, s: &Expr, z: &Expr, asm: &Assumptions) -> Result<ReducedEquation, ReductionError> {
    let s = s.clone();
    let z = z.normalize_with(asm);
    let jets = chain_rule_jets(&s, &z, asm);
    let residual = m.residual_expr().subs(&jets);

    let mut zasm = asm.clone();
    if asm.is_known_positive(&z) {
        zasm = zasm.with("z");
    }
    let mut last = ReductionError::NotSolvable(z.to_string());
    for (w, other) in [("y", "x"), ("x", "y")] {
        let Some((p, q, k)) = solve_power(&z, w) else { continue };
        let wexpr = ((h("z") - q) / p).pow(k.recip()).normalize_with(&zasm);
        let r = residual.subs1(&Var::sym(w), &wexpr).normalize_with(&zasm);
        for val in [Expr::one(), Expr::int(2), Expr::rational(3, 2)] {
            let e = r.subs1(&Var::sym(other), &val).normalize_with(&zasm);
            if e.is_zero_const() {
                continue;
            }
            match equivalent_up_to_factor(&r, &e, &zasm, 0) {
                ZeroTest::Zero(_) => {
                    return Ok(ReducedEquation {
                        equation: tidy(&e, &zasm),
                        similarity: z,
                        prefactor: s,
                        eliminated: w.to_string(),
                        positive: zasm,
                    })
                }
                ZeroTest::NonZero { witness, .. } => {
                    last = ReductionError::Residual(format!("{other}-dependence at {}", witness.describe()));
                }
                ZeroTest::Indeterminate => last = ReductionError::Residual("indeterminate".into()),
            }
        }
    }
    Err(last)
}

fn factors(t: &Expr) -> Vec<Expr> {
    match t.node() {
        Node::Mul(v) => v.clone(),
        _ => vec![t.clone()],
    }
}

/// Drop non-constant factors common to every term that involve only the
/// parameters.
fn strip_parameter_factors(e: &Expr, asm: &Assumptions) -> Expr {
    let terms = match e.node() {
        Node::Add(v) => v.clone(),
        _ => return e.clone(),
    };
    let frozen = |f: &Expr| {
        f.as_const().is_none()
            && f.jets().is_empty()
            && !f.contains_var(&Var::u())
            && ["t", "z", "x", "y"]
                .iter()
                .chain(H_JETS.iter())
                .all(|n| !f.contains_var(&Var::sym(n)))
    };
    let common: Vec<Expr> = factors(&terms[0])
        .into_iter()
        .filter(|f| frozen(f) && terms[1..].iter().all(|t| factors(t).contains(f)))
        .collect();
    if common.is_empty() {
        return e.clone();
    }
    (e / &Expr::mul_all(common)).normalize_with(asm)
}

/// Clear denominators, drop common parameter factors and make the leading
/// coefficient positive.
fn tidy(e: &Expr, asm: &Assumptions) -> Expr {
    let n = strip_parameter_factors(&crate::expr::cleared_numerator_expr(e, asm), asm);
    match n.node() {
        Node::Add(v) if v.first().is_some_and(leading_negative) => (-n).normalize_with(asm),
        _ if leading_negative(&n) => (-n).normalize_with(asm),
        _ => n,
    }
}

fn leading_negative(t: &Expr) -> bool {
    match t.node() {
        Node::Const(c) => c < &crate::expr::Rational::from_integer(0.into()),
        Node::Mul(v) => v.first().is_some_and(leading_negative),
        _ => false,
    }
}

/// Whether `a / b` is free of the `h` jets: `a db/ds - b da/ds = 0` for
/// each jet symbol `s`. Factors depending on `t` and `z` are allowed.
pub fn equivalent_up_to_factor(a: &Expr, b: &Expr, asm: &Assumptions, seed: u64) -> ZeroTest {
    let cfg = ZeroTestConfig::default().with_positive(asm).with_seed(seed);
    let mut last = ZeroTest::Zero(crate::expr::ZeroCertificate::Exact);
    for s in H_JETS {
        let v = Var::sym(s);
        let cross = (a * &b.diff_with(&v, asm) - b * &a.diff_with(&v, asm)).normalize_with(asm);
        match cross.is_zero_with(&cfg) {
            ZeroTest::Zero(c) => {
                if c == crate::expr::ZeroCertificate::Sampled {
                    last = ZeroTest::Zero(c);
                }
            }
            other => return other,
        }
    }
    last
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedCheck {
    /// "exact", "sampled", "nonzero" or "indeterminate".
    pub symbolic: String,
    pub grid: GridStats,
    pub passed: bool,
}

/// Substitute `h(t, z)` and its derivatives into a reduced equation.
pub fn verify_reduced_solution(
    equation: &Expr,
    hsol: &Expr,
    asm: &Assumptions,
    grid: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<ReducedCheck, ReductionError> {
    let d = |e: &Expr, n: &str| e.diff_with(&Var::sym(n), asm);
    let hz = d(hsol, "z");
    let mut map = BTreeMap::new();
    map.insert(Var::sym("h"), hsol.clone());
    map.insert(Var::sym("h_t"), d(hsol, "t"));
    map.insert(Var::sym("h_2z"), d(&hz, "z"));
    map.insert(Var::sym("h_tz"), d(&hz, "t"));
    map.insert(Var::sym("h_z"), hz);
    let terms: Vec<Expr> = match equation.node() {
        Node::Add(v) => v.iter().map(|t| t.subs(&map)).collect(),
        _ => vec![equation.subs(&map)],
    };
    let whole = Expr::add_all(terms.clone()).normalize_with(asm);
    let cfg = ZeroTestConfig::default().with_positive(asm).with_seed(seed);
    let sym = whole.is_zero_with(&cfg);
    let stats = grid_residual(&terms, asm, grid, seed, exec)?;
    Ok(ReducedCheck {
        symbolic: sym.label().into(),
        passed: !matches!(sym, ZeroTest::NonZero { .. }) && stats.max_scaled <= tol,
        grid: stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse;
    use crate::pde::VectorField;

    fn ricci_v2_alpha() -> (PdeModel, InvariantSet) {
        let m = PdeModel::builtin("ricci").unwrap();
        let b = m.reference_basis().unwrap();
        let v = VectorField::combination(&b, &[Expr::zero(), Expr::one(), Expr::sym("alpha"), Expr::zero()]);
        let inv = super::super::invariants_of(&v, &m.positive).unwrap();
        (m, inv)
    }

    #[test]
    fn solve_power_forms() {
        let ctx = ParseContext::default().with_params(["v"]);
        let z = parse("v*t*x - x^2/2 - y^2/2", &ctx).unwrap();
        let (p, _, k) = solve_power(&z, "y").unwrap();
        assert_eq!(k, Expr::int(2));
        assert_eq!(p, Expr::rational(-1, 2));
        assert!(solve_power(&parse("ln(y) + y", &ctx).unwrap(), "y").is_none());
    }

    #[test]
    fn ricci_translation_scaling_reduction() {
        let (m, inv) = ricci_v2_alpha();
        let r = reduce(&m, &inv).unwrap();
        let ctx = reduced_context(&m, &["alpha".into()]);
        let want = parse("h_t*h^2 + alpha*z^2*h*h_2z - alpha*z^2*h_z^2 + alpha*z*h*h_z", &ctx).unwrap();
        assert!(
            equivalent_up_to_factor(&r.equation, &want, &r.positive, 0).is_zero(),
            "{}",
            r.equation
        );
    }

    #[test]
    fn convdiff_rotation_reduction() {
        let m = PdeModel::builtin("convdiff").unwrap();
        let ctx = m.parse_context();
        let v = m.reference_basis().unwrap()[1].clone();
        let z = parse("v*t*x - x^2/2 - y^2/2", &ctx).unwrap();
        let inv = InvariantSet::supplied(&v, [Expr::sym("t"), z, Expr::u()], vec![]);
        let r = reduce(&m, &inv).unwrap();
        let rctx = reduced_context(&m, &[]);
        let want = parse("h_t + (2*z - v^2*t^2)*h*h_2z + 2*h*h_z + v^2*t*h_z", &rctx).unwrap();
        assert!(
            equivalent_up_to_factor(&r.equation, &want, &r.positive, 0).is_zero(),
            "{}",
            r.equation
        );
        let hsol = parse(
            "(2*z - v^2*t^2 + 2*q)/(4*t + 2*p)",
            &reduced_context(&m, &["p".into(), "q".into()]),
        )
        .unwrap();
        let c = verify_reduced_solution(&r.equation, &hsol, &r.positive, 50, 1e-10, 0, Execution::Sequential).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn non_invariant_shapes_are_rejected() {
        let m = PdeModel::builtin("convdiff").unwrap();
        let v = m.reference_basis().unwrap()[1].clone();
        let xy = Expr::sym("x") * Expr::sym("y");
        let inv = InvariantSet::supplied(&v, [Expr::sym("t"), xy.clone(), Expr::u()], vec![]);
        assert!(matches!(
            reduce(&m, &inv),
            Err(ReductionError::NotInvariant { index: 2, .. })
        ));
        let r = reduce_shape(&m, &Expr::one(), &xy, &m.positive);
        assert!(matches!(r, Err(ReductionError::Residual(_))), "{r:?}");
    }
}
