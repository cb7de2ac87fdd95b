//! Zero testing: exact rational-function cancellation, then randomized
//! evaluation at rational points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::normalize::{build_term, from_poly, mono_expr, to_poly, Poly};
use super::{Assumptions, Expr, Jet, Point, Rational, Var};

#[derive(Clone, Debug)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub positive: Assumptions,
    /// Attempts per sample point before giving up on domain errors.
    pub retries: usize,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig {
            samples: 12,
            tol: 1e-9,
            seed: 0,
            positive: Assumptions::default(),
            retries: 20,
        }
    }
}

impl ZeroTestConfig {
    pub fn with_positive(mut self, asm: &Assumptions) -> Self {
        self.positive = asm.clone();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroCertificate {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroTest {
    Zero(ZeroCertificate),
    NonZero { witness: Point, value: f64 },
    Indeterminate,
}

impl ZeroTest {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroTest::Zero(_))
    }

    pub fn certificate(&self) -> Option<&ZeroCertificate> {
        match self {
            ZeroTest::Zero(c) => Some(c),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroTest::Zero(ZeroCertificate::Exact) => "exact",
            ZeroTest::Zero(ZeroCertificate::Sampled) => "sampled",
            ZeroTest::NonZero { .. } => "nonzero",
            ZeroTest::Indeterminate => "indeterminate",
        }
    }
}

/// Multiply through by the common denominator built from bases carrying
/// negative rational exponents.
fn cleared_numerator(p: &Poly, asm: &Assumptions) -> Poly {
    let mut worst: BTreeMap<Expr, Rational> = BTreeMap::new();
    for mono in p.terms.keys() {
        for (b, e) in mono {
            if let Some(c) = e.as_const() {
                if c < &Rational::from_integer(0.into()) {
                    let entry = worst.entry(b.clone()).or_insert_with(|| c.clone());
                    if c < entry {
                        *entry = c.clone();
                    }
                }
            }
        }
    }
    if worst.is_empty() {
        return p.clone();
    }
    let mut out = Poly::zero();
    for (mono, c) in &p.terms {
        let mut factors = mono.clone();
        for (b, e) in &worst {
            factors.push((b.clone(), Expr::constant(-e.clone())));
        }
        out.add_owned(build_term(c.clone(), factors, asm));
    }
    out
}

/// `e` multiplied through by its common denominator, normalized.
pub(crate) fn cleared_numerator_expr(e: &Expr, asm: &Assumptions) -> Expr {
    from_poly(&cleared_numerator(&to_poly(e, asm), asm))
}

/// Exact test only: does rational-function normalization cancel `e`?
pub fn is_exactly_zero(e: &Expr, asm: &Assumptions) -> bool {
    let p = to_poly(e, asm);
    if p.is_zero() {
        return true;
    }
    let n = cleared_numerator(&p, asm);
    n.is_zero()
}

/// Draw a rational sample `k/64` with magnitude in `[1/4, 4]`.
pub(crate) fn sample_value(rng: &mut impl Rng, positive: bool) -> f64 {
    let k: i32 = rng.gen_range(16..=256);
    let v = k as f64 / 64.0;
    if positive || rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// Random assignment for every free variable and opaque function atom of `e`.
pub fn random_point(e: &Expr, asm: &Assumptions, rng: &mut impl Rng) -> Point {
    let mut p = Point::new();
    for v in e.free_vars() {
        let pos = match &v {
            Var::Sym(s) => asm.is_positive_name(s.name()),
            Var::Jet(j) => *j == Jet::U && asm.is_positive_name("u"),
        };
        p.set(v, sample_value(rng, pos));
    }
    for f in e.fn_atoms() {
        p.set_fn(f, sample_value(rng, false));
    }
    p
}

/// Evaluate `e` and the sum of absolute values of its top-level terms.
pub(crate) fn eval_scaled(terms: &[Expr], p: &Point) -> Result<(f64, f64), super::EvalError> {
    let mut value = 0.0;
    let mut scale = 0.0;
    for t in terms {
        let v = t.eval(p)?;
        value += v;
        scale += v.abs();
    }
    Ok((value, scale))
}

pub fn is_zero(e: &Expr, cfg: &ZeroTestConfig) -> ZeroTest {
    let p = to_poly(e, &cfg.positive);
    if p.is_zero() || cleared_numerator(&p, &cfg.positive).is_zero() {
        return ZeroTest::Zero(ZeroCertificate::Exact);
    }
    let terms: Vec<Expr> = p.terms.iter().map(|(m, c)| mono_expr(m, c)).collect();
    let whole = Expr::add_all(terms.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut good = 0;
    let mut failures = 0;
    let budget = cfg.samples * cfg.retries.max(1);
    while good < cfg.samples && failures < budget {
        let pt = random_point(&whole, &cfg.positive, &mut rng);
        match eval_scaled(&terms, &pt) {
            Ok((v, scale)) => {
                if v.abs() > cfg.tol * scale.max(f64::MIN_POSITIVE) && v != 0.0 {
                    return ZeroTest::NonZero { witness: pt, value: v };
                }
                good += 1;
            }
            Err(_) => failures += 1,
        }
    }
    if good == 0 {
        ZeroTest::Indeterminate
    } else if good < cfg.samples {
        // too few admissible points to claim a certificate
        ZeroTest::Indeterminate
    } else {
        ZeroTest::Zero(ZeroCertificate::Sampled)
    }
}

impl Expr {
    pub fn is_zero_with(&self, cfg: &ZeroTestConfig) -> ZeroTest {
        is_zero(self, cfg)
    }
}
