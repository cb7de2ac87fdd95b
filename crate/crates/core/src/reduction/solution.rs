use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ReductionError;
use crate::expr::{random_point, Assumptions, Expr, Jet, Point, Rational, Var, ZeroTest, ZeroTestConfig};
use crate::io::{parse, read_entries, split_list, FileError, ParseContext};
use crate::parallel::Execution;
use crate::pde::{coeff_jet_monomial, PdeModel, VectorField};

/// Residual statistics over sampled admissible points.
#[derive(Clone, Debug, Serialize)]
pub struct GridStats {
    pub points: usize,
    /// Largest `|sum|` relative to the rounding magnitude of the terms.
    pub max_scaled: f64,
    pub max_abs: f64,
    /// Point of the largest scaled residual.
    pub worst: Option<String>,
}

fn magnitude_sum(terms: &[Expr], p: &Point) -> Option<(f64, f64)> {
    let mut value = 0.0;
    let mut scale = 0.0;
    for t in terms {
        let (v, m) = t.eval_with_magnitude(p).ok()?;
        value += v;
        scale += m;
    }
    Some((value, scale))
}

/// Evaluate `sum(terms)` at `n` random admissible points. Points where
/// some term is undefined or infinite are redrawn, up to `20 n` draws.
pub(crate) fn grid_residual(
    terms: &[Expr],
    asm: &Assumptions,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<GridStats, ReductionError> {
    let whole = Expr::add_all(terms.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<(Point, f64, f64)> = Vec::with_capacity(n);
    let mut drawn = 0;
    while values.len() < n && drawn < 20 * n {
        let batch: Vec<Point> = (0..n).map(|_| random_point(&whole, asm, &mut rng)).collect();
        drawn += batch.len();
        let evals = exec.map(&batch, |p| {
            magnitude_sum(terms, p).filter(|(v, s)| v.is_finite() && s.is_finite())
        });
        for (p, e) in batch.into_iter().zip(evals) {
            if let Some((v, s)) = e {
                if values.len() < n {
                    values.push((p, v, s));
                }
            }
        }
    }
    if values.len() < n {
        return Err(ReductionError::DomainExhausted {
            found: values.len(),
            wanted: n,
        });
    }
    let mut out = GridStats {
        points: n,
        max_scaled: 0.0,
        max_abs: 0.0,
        worst: None,
    };
    for (p, v, s) in &values {
        let scaled = if *v == 0.0 {
            0.0
        } else {
            v.abs() / s.max(f64::MIN_POSITIVE)
        };
        out.max_abs = out.max_abs.max(v.abs());
        if scaled > out.max_scaled || out.worst.is_none() {
            out.max_scaled = out.max_scaled.max(scaled);
            out.worst = Some(p.describe());
        }
    }
    Ok(out)
}

/// A closed-form candidate `u(t, x, y)` with its free constants.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionCandidate {
    pub name: String,
    pub u: Expr,
    /// Free constants beyond the model parameters.
    pub parameters: Vec<String>,
    /// Fixed values for some constants; the rest are sampled.
    #[serde(serialize_with = "values_as_text")]
    pub values: BTreeMap<String, Rational>,
    pub positive: Vec<String>,
    /// Generator whose invariant surface the solution should lie on.
    pub generator: Option<VectorField>,
    /// Source text of `u`, kept for audits.
    pub text: String,
}

fn values_as_text<S: serde::Serializer>(v: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_map(v.iter().map(|(k, r)| (k, r.to_string())))
}

impl SolutionCandidate {
    pub fn new(name: &str, u: Expr, text: &str) -> Self {
        SolutionCandidate {
            name: name.to_string(),
            u,
            parameters: Vec::new(),
            values: BTreeMap::new(),
            positive: Vec::new(),
            generator: None,
            text: text.to_string(),
        }
    }

    pub fn assumptions(&self, base: &Assumptions) -> Assumptions {
        self.positive.iter().fold(base.clone(), |a, n| a.with(n))
    }

    /// Parse context for expressions belonging to this candidate.
    pub fn context(&self, m: &PdeModel) -> ParseContext {
        m.parse_context()
            .with_params(m.parameters.iter().chain(&self.parameters).cloned().collect::<Vec<_>>())
            .with_positive(
                m.positive
                    .names()
                    .map(String::from)
                    .chain(self.positive.iter().cloned())
                    .collect::<Vec<_>>(),
            )
    }

    fn bound_u(&self) -> Expr {
        let map: BTreeMap<Var, Expr> = self
            .values
            .iter()
            .map(|(k, v)| (Var::sym(k), Expr::constant(v.clone())))
            .collect();
        self.u.subs(&map)
    }
}

/// Parse a solution catalog. Keys before the first `name` (`parameters`,
/// `positive`) are shared; each `name` starts a new candidate that takes
/// `u`, `parameters`, `values`, `positive` and `generator`.
pub fn parse_solutions(text: &str, m: &PdeModel) -> Result<Vec<SolutionCandidate>, FileError> {
    let entries = read_entries(text)?;
    let mut shared_params: Vec<String> = Vec::new();
    let mut shared_pos: Vec<String> = Vec::new();
    let mut out: Vec<(SolutionCandidate, usize, Vec<(String, String, usize)>)> = Vec::new();
    for e in entries {
        match (e.key.as_str(), out.last_mut()) {
            ("model", _) => {}
            ("name", _) => {
                let mut c = SolutionCandidate::new(&e.value, Expr::zero(), "");
                c.parameters = shared_params.clone();
                c.positive = shared_pos.clone();
                out.push((c, e.line, Vec::new()));
            }
            ("parameters", None) => shared_params = split_list(&e.value),
            ("positive", None) => shared_pos = split_list(&e.value),
            (_, None) => return Err(e.invalid(format!("`{}` before the first `name`", e.key))),
            (_, Some((_, _, keys))) => keys.push((e.key.clone(), e.value.clone(), e.line)),
        }
    }
    let mut cands = Vec::new();
    for (mut c, line, keys) in out {
        for (k, v, l) in &keys {
            match k.as_str() {
                "parameters" => c.parameters.extend(split_list(v)),
                "positive" => c.positive.extend(split_list(v)),
                "u" | "values" | "generator" => {}
                _ => {
                    return Err(FileError::Invalid {
                        line: *l,
                        message: format!("unknown key `{k}`"),
                    })
                }
            }
        }
        let ctx = c.context(m);
        let expr_at = |v: &str, l: usize| parse(v, &ctx).map_err(|source| FileError::Expr { line: l, source });
        let mut have_u = false;
        for (k, v, l) in &keys {
            match k.as_str() {
                "u" => {
                    c.u = expr_at(v, *l)?;
                    c.text = v.clone();
                    have_u = true;
                }
                "values" => {
                    for item in split_list(v) {
                        let (n, val) = item.split_once('=').ok_or(FileError::Invalid {
                            line: *l,
                            message: format!("expected `name = value`, got `{item}`"),
                        })?;
                        let e = expr_at(val.trim(), *l)?;
                        let r = e.as_const().cloned().ok_or(FileError::Invalid {
                            line: *l,
                            message: format!("value of `{}` is not a rational constant", n.trim()),
                        })?;
                        c.values.insert(n.trim().to_string(), r);
                    }
                }
                "generator" => {
                    let parts = split_list(v);
                    if parts.len() != 4 {
                        return Err(FileError::Invalid {
                            line: *l,
                            message: "generator needs tau, xi, eta, phi".into(),
                        });
                    }
                    let c4: Vec<Expr> = parts.iter().map(|p| expr_at(p, *l)).collect::<Result<_, _>>()?;
                    c.generator = Some(VectorField::new(
                        c4[0].clone(),
                        c4[1].clone(),
                        c4[2].clone(),
                        c4[3].clone(),
                    ));
                }
                _ => {}
            }
        }
        if !have_u {
            return Err(FileError::Invalid {
                line,
                message: format!("solution `{}` has no `u`", c.name),
            });
        }
        cands.push(c);
    }
    Ok(cands)
}

pub fn load_solutions(path: &str, m: &PdeModel) -> Result<Vec<SolutionCandidate>, ReductionError> {
    let text = std::fs::read_to_string(path).map_err(|e| ReductionError::Input(format!("{path}: {e}")))?;
    parse_solutions(&text, m).map_err(|e| ReductionError::Input(format!("{path}: {e}")))
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionReport {
    pub name: String,
    /// Symbolic zero test of the residual.
    pub symbolic: String,
    pub grid: GridStats,
    /// Residual of `phi - tau u_t - xi u_x - eta u_y` when a generator is given.
    pub surface: Option<GridStats>,
    pub passed: bool,
    pub witness: Option<String>,
}

/// Jets of `u(t, x, y)` up to second order in space.
fn jets_of(u: &Expr, asm: &Assumptions) -> BTreeMap<Var, Expr> {
    let d = |e: &Expr, n: &str| e.diff_with(&Var::sym(n), asm);
    let ux = d(u, "x");
    let uy = d(u, "y");
    [
        (Jet::new(0, 0, 0), u.clone()),
        (Jet::new(1, 0, 0), d(u, "t")),
        (Jet::new(0, 2, 0), d(&ux, "x")),
        (Jet::new(0, 1, 1), d(&ux, "y")),
        (Jet::new(0, 0, 2), d(&uy, "y")),
        (Jet::new(0, 1, 0), ux),
        (Jet::new(0, 0, 1), uy),
    ]
    .into_iter()
    .map(|(j, e)| (Var::Jet(j), e))
    .collect()
}

/// Substitute a candidate into `u_t = rhs` and sample the scaled residual
/// `|u_t - rhs|` relative to the rounding magnitude of its terms on `grid` points.
pub fn verify_solution(
    m: &PdeModel,
    s: &SolutionCandidate,
    grid: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<SolutionReport, ReductionError> {
    let asm = s.assumptions(&m.positive);
    let u = s.bound_u().normalize_with(&asm);
    let jets = jets_of(&u, &asm);
    let mut terms = vec![jets[&Var::Jet(Jet::new(1, 0, 0))].clone()];
    for (i, c) in m.coeffs.iter().enumerate() {
        if !c.is_zero_const() {
            terms.push(-(c * &coeff_jet_monomial(i)).subs(&jets));
        }
    }
    let whole = Expr::add_all(terms.clone()).normalize_with(&asm);
    let cfg = ZeroTestConfig::default().with_positive(&asm).with_seed(seed);
    let sym = whole.is_zero_with(&cfg);
    let stats = grid_residual(&terms, &asm, grid, seed, exec)?;
    let surface = match &s.generator {
        Some(v) => {
            let q = [
                v.phi.subs(&jets),
                -(&v.tau * &jets[&Var::Jet(Jet::new(1, 0, 0))]).subs(&jets),
                -(&v.xi * &jets[&Var::Jet(Jet::new(0, 1, 0))]).subs(&jets),
                -(&v.eta * &jets[&Var::Jet(Jet::new(0, 0, 1))]).subs(&jets),
            ];
            Some(grid_residual(&q, &asm, grid, seed ^ 1, exec)?)
        }
        None => None,
    };
    let witness = match &sym {
        ZeroTest::NonZero { witness, value } => Some(format!("{} (residual {value:e})", witness.describe())),
        _ => None,
    };
    Ok(SolutionReport {
        name: s.name.clone(),
        symbolic: sym.label().into(),
        passed: witness.is_none() && stats.max_scaled <= tol,
        grid: stats,
        surface,
        witness,
    })
}
