//! Strategies and property checks shared by the property suites and the
//! acceptance run.

#![allow(dead_code)]

use std::collections::BTreeMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use jetsym::expr::{Expr, FuncKind, Indep, Jet, Point, Var};
use jetsym::io::{parse, ParseContext};
use jetsym::lie::LieAlgebra;
use jetsym::parallel::Execution;
use jetsym::pde::PdeModel;
use jetsym::reduction::{reduce, verify_reduced_solution, verify_solution, InvariantSet, SolutionCandidate};

pub fn context() -> ParseContext {
    ParseContext::default().with_params(["a", "b"])
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-9i64..10).prop_map(Expr::int),
        (-9i64..10, 2i64..7).prop_map(|(p, q)| Expr::rational(p, q)),
        prop::sample::select(vec!["t", "x", "y", "a", "b"]).prop_map(Expr::sym),
        Just(Expr::u()),
        prop::sample::select(vec![
            Jet::new(0, 1, 0),
            Jet::new(0, 0, 1),
            Jet::new(1, 0, 0),
            Jet::new(0, 1, 1),
            Jet::new(0, 2, 0)
        ])
        .prop_map(Expr::jet),
    ]
}

/// Expressions over every grammar construct.
pub fn any_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_all),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::mul_all),
            (inner.clone(), -3i64..5).prop_map(|(b, k)| b.powi(k)),
            (
                inner.clone(),
                prop_oneof![
                    Just(Expr::rational(1, 2)),
                    Just(Expr::rational(-1, 3)),
                    Just(Expr::sym("a"))
                ]
            )
                .prop_map(|(b, e)| b.pow(e)),
            (prop::sample::select(FuncKind::ALL.to_vec()), inner.clone()).prop_map(|(k, a)| Expr::apply(k, a)),
            inner.prop_map(|e| -e),
        ]
    })
}

/// Smooth expressions in `x` (and `t`, `y`, `u`, jets) without poles, for
/// derivative checks.
pub fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-5i64..6).prop_map(Expr::int),
        (-5i64..6, 2i64..5).prop_map(|(p, q)| Expr::rational(p, q)),
        prop::sample::select(vec!["t", "x", "y"]).prop_map(Expr::sym),
        Just(Expr::u()),
        prop::sample::select(vec![
            Jet::new(0, 1, 0),
            Jet::new(0, 0, 1),
            Jet::new(0, 2, 0),
            Jet::new(0, 1, 1)
        ])
        .prop_map(Expr::jet),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::add_all),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Expr::mul_all),
            (inner.clone(), 2i64..4).prop_map(|(b, k)| b.powi(k)),
            (
                prop::sample::select(vec![FuncKind::Sin, FuncKind::Cos, FuncKind::Tanh, FuncKind::Arctan]),
                inner.clone()
            )
                .prop_map(|(k, a)| Expr::apply(k, a)),
            inner.clone().prop_map(|a| (Expr::one() + a.powi(2)).sqrt()),
            inner.prop_map(|a| (Expr::one() + a.powi(2)).ln()),
        ]
    })
}

pub fn sample_point() -> impl Strategy<Value = Point> {
    prop::collection::vec(-2.0f64..2.0, 10).prop_map(|v| {
        let mut p = Point::new()
            .with("t", v[0])
            .with("x", v[1])
            .with("y", v[2])
            .with("a", v[3])
            .with("b", v[4])
            .with("u", v[5]);
        for (j, x) in [
            Jet::new(0, 1, 0),
            Jet::new(0, 0, 1),
            Jet::new(1, 0, 0),
            Jet::new(0, 1, 1),
            Jet::new(0, 2, 0),
        ]
        .into_iter()
        .zip(&v[5..])
        {
            p = p.with_jet(j, *x);
        }
        p
    })
}

pub fn check_round_trip(e: &Expr) -> Result<(), TestCaseError> {
    let n = e.normalize();
    let text = n.to_string();
    let back = parse(&text, &context()).map_err(|err| TestCaseError::fail(format!("`{text}`: {err}")))?;
    prop_assert_eq!(&back, &n, "printed as `{}`", text);
    Ok(())
}

pub fn check_idempotent(e: &Expr) -> Result<(), TestCaseError> {
    let n = e.normalize();
    prop_assert_eq!(n.normalize(), n);
    Ok(())
}

/// `eval(normalize(e)) = eval(e)` relative to the rounding magnitude of
/// both evaluations.
pub fn check_homomorphism(e: &Expr, p: &Point) -> Result<(), TestCaseError> {
    let (Ok((a, ma)), Ok((b, mb))) = (e.eval_with_magnitude(p), e.normalize().eval_with_magnitude(p)) else {
        return Ok(());
    };
    let scale = ma.max(mb).max(1.0);
    if !scale.is_finite() || scale > 1e8 {
        return Ok(());
    }
    prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {} (scale {})", a, b, scale);
    Ok(())
}

/// A concrete `u(t, x, y)` whose jets feed the total derivative.
fn path() -> Expr {
    let x = Expr::sym("x");
    let y = Expr::sym("y");
    let t = Expr::sym("t");
    Expr::apply(FuncKind::Sin, x.clone()) + x * y.clone() / Expr::int(3) + t * Expr::rational(1, 2) + y.powi(2)
}

fn along_path(e: &Expr) -> Expr {
    let p = path();
    let mut map = BTreeMap::new();
    map.insert(Var::u(), p.clone());
    for j in e.jets() {
        let mut d = p.clone();
        for (v, n) in [
            (Indep::T, j.count(Indep::T)),
            (Indep::X, j.count(Indep::X)),
            (Indep::Y, j.count(Indep::Y)),
        ] {
            for _ in 0..n {
                d = d.diff(&Var::indep(v));
            }
        }
        map.insert(Var::Jet(j), d);
    }
    e.subs(&map)
}

/// Total x-derivative against a fourth-order central difference along
/// `u = path(t, x, y)`.
pub fn check_total_derivative(e: &Expr, x0: f64, y0: f64, t0: f64) -> Result<(), TestCaseError> {
    let d = e
        .total_derivative(Indep::X)
        .map_err(|err| TestCaseError::reject(err.to_string()))?;
    let exact_fn = along_path(&d);
    let f = along_path(e);
    let at = |x: f64| Point::new().with("t", t0).with("x", x).with("y", y0);
    let h = 1e-3;
    let vals: Result<Vec<f64>, _> = [-2.0, -1.0, 1.0, 2.0].iter().map(|k| f.eval(&at(x0 + k * h))).collect();
    let (Ok(v), Ok(exact), Ok(f0)) = (vals, exact_fn.eval(&at(x0)), f.eval(&at(x0))) else {
        return Err(TestCaseError::reject("outside domain"));
    };
    if f0.abs() > 1e4 || exact.abs() > 1e4 {
        return Err(TestCaseError::reject("too large for a difference quotient"));
    }
    let fd = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
    prop_assert!(
        (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
        "D_x = {} vs difference {} at x = {}",
        exact,
        fd,
        x0
    );
    Ok(())
}

pub fn algebra(name: &str) -> LieAlgebra {
    let m = PdeModel::builtin(name).unwrap();
    LieAlgebra::structure_table(&m.reference_basis().unwrap(), &m.parameters, &m.positive).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// Jacobi identity for numeric elements.
pub fn check_jacobi(alg: &LieAlgebra, a: &[f64], b: &[f64], c: &[f64]) -> Result<(), TestCaseError> {
    let br = |x: &[f64], y: &[f64]| alg.bracket(x, y).unwrap();
    let s1 = br(a, &br(b, c));
    let s2 = br(b, &br(c, a));
    let s3 = br(c, &br(a, b));
    let sum: Vec<f64> = (0..a.len()).map(|i| s1[i] + s2[i] + s3[i]).collect();
    prop_assert!(close(&sum, &vec![0.0; a.len()], 1e-12), "{:?}", sum);
    Ok(())
}

/// `Ad(g)[X, Y] = [Ad(g) X, Ad(g) Y]` for `g = exp(eps V_i)`.
pub fn check_adjoint_bracket(alg: &LieAlgebra, i: usize, eps: f64, x: &[f64], y: &[f64]) -> Result<(), TestCaseError> {
    let ad = alg.adjoint(i, eps).unwrap();
    let lhs = ad.apply(&alg.bracket(x, y).unwrap());
    let rhs = alg.bracket(&ad.apply(x), &ad.apply(y)).unwrap();
    prop_assert!(close(&lhs, &rhs, 1e-10), "{:?} vs {:?}", lhs, rhs);
    Ok(())
}

/// One reduction case: model, generator coefficients, supplied invariants
/// and a solution of the reduced equation with free constants.
pub struct RoundTrip {
    pub model: &'static str,
    pub coeffs: [&'static str; 4],
    pub invariants: [&'static str; 3],
    pub positive: &'static [&'static str],
    pub constants: &'static [&'static str],
    pub h: &'static str,
}

pub const ROUND_TRIPS: [RoundTrip; 3] = [
    RoundTrip {
        model: "convdiff",
        coeffs: ["0", "1", "0", "0"],
        invariants: ["t", "v*t*x - x^2/2 - y^2/2", "u"],
        positive: &[],
        constants: &["q1", "q2"],
        h: "(2*z - v^2*t^2 + 2*q1)/(4*t + 2*q2)",
    },
    RoundTrip {
        model: "convdiff",
        coeffs: ["0", "0", "1", "0"],
        invariants: ["t", "y", "u"],
        positive: &[],
        constants: &["q1", "q2", "q3", "q4"],
        h: "((q1/2)*z^2 + q3*z + q4)/(q2 - q1*t)",
    },
    RoundTrip {
        model: "ricci",
        coeffs: ["0", "1", "a", "0"],
        invariants: ["t", "y*exp(-a*x)", "y*u"],
        positive: &["y", "a", "q3"],
        constants: &["q1", "q2", "q3", "q4"],
        h: "-(1/2)*(q3*t + q2*q3/(2*q1))*(-1 + tanh(sqrt(a*q3)*(q4 - ln(z))/(2*a))^2)",
    },
];

/// Reduce, check `h` against the reduced equation, rebuild
/// `u = S * h(t, I2)` and check it against the model.
pub fn check_reduction_round_trip(case: &RoundTrip, values: &[i64]) -> Result<(), TestCaseError> {
    let m = PdeModel::builtin(case.model).unwrap();
    let mut params: Vec<String> = vec!["a".into()];
    params.extend(case.constants.iter().map(|s| s.to_string()));
    let ctx = m
        .parse_context()
        .with_params(params.clone())
        .with_positive(case.positive.to_vec());
    let basis = m.reference_basis().unwrap();
    let coeffs: Vec<Expr> = case.coeffs.iter().map(|c| parse(c, &ctx).unwrap()).collect();
    let v = jetsym::pde::VectorField::combination(&basis, &coeffs);
    let inv = InvariantSet::supplied(
        &v,
        case.invariants.map(|s| parse(s, &ctx).unwrap()),
        case.positive.iter().map(|s| s.to_string()).collect(),
    );
    let mut m2 = m.clone();
    m2.parameters.extend(params.iter().cloned());
    let red = reduce(&m2, &inv).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let rctx = jetsym::reduction::reduced_context(&m2, &[]).with_positive(case.positive.to_vec());
    let bind: BTreeMap<Var, Expr> = params
        .iter()
        .zip(values)
        .map(|(p, k)| {
            let k = if case.positive.contains(&p.as_str()) {
                k.abs()
            } else {
                *k
            };
            (Var::sym(p), Expr::rational(k, 4))
        })
        .collect();
    let h = parse(case.h, &rctx).unwrap().subs(&bind).normalize_with(&red.positive);
    let eq = red.equation.subs(&bind);
    let r = verify_reduced_solution(&eq, &h, &red.positive, 60, 1e-8, 0, Execution::Sequential)
        .map_err(|e| TestCaseError::reject(e.to_string()))?;
    prop_assert!(r.passed, "h fails the reduced equation: {:?}", r);
    let mut z = BTreeMap::new();
    z.insert(Var::sym("z"), red.similarity.clone());
    let u = (&red.prefactor * &h.subs(&z)).subs(&bind).normalize_with(&red.positive);
    let mut s = SolutionCandidate::new("rebuilt", u, "");
    s.positive = case.positive.iter().map(|p| p.to_string()).collect();
    let r = verify_solution(&m, &s, 60, 1e-8, 0, Execution::Sequential)
        .map_err(|e| TestCaseError::reject(e.to_string()))?;
    prop_assert!(r.passed, "rebuilt u fails the model: {:?}", r);
    Ok(())
}

/// Parameter values for a round-trip case: nonzero quarters, positive
/// where the case needs it.
pub fn round_trip_values() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(prop_oneof![1i64..12, -12i64..-1], 5)
}

/// Run a property with a fixed seed; returns the number of passing cases
/// or the first failure.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    match runner.run(&strategy, test) {
        Ok(()) => Ok(cases),
        Err(TestError::Fail(why, v)) => Err(format!("{why} for {v:?}")),
        Err(TestError::Abort(why)) => Err(why.to_string()),
    }
}
