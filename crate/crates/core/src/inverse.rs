//! Inverse symmetry problem: which coefficient families of the evolution
//! equation admit a given family of generators.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assumptions, Expr, Rational, Var, ZeroTest, ZeroTestConfig};
use crate::io::{parse, read_entries, split_list, FileError, ParseContext};
use crate::parallel::Execution;
use crate::pde::{DeterminingSystem, PdeError, PdeModel, VectorField, COEFF_NAMES, COMPONENT_NAMES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InverseError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("constraint `{0}` is not linear in any free parameter")]
    Constraint(String),
    #[error("parameter `{0}` is left free")]
    Unbound(String),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error("{0}")]
    Model(String),
    #[error("unknown builtin `{0}`")]
    UnknownBuiltin(String),
}

/// A family of generators, linear in its parameters.
#[derive(Clone, Debug, Serialize)]
pub struct ImposedSymmetry {
    pub name: String,
    pub components: [String; 4],
    pub parameters: Vec<String>,
    /// Constants of the equation that appear in the field but do not
    /// index generators.
    pub model_parameters: Vec<String>,
    pub constraints: Vec<String>,
}

/// Candidate coefficients `A..G` with free constants. `parameters` must
/// be bound by [`specialize`]; `model_parameters` stay symbolic.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientFamily {
    pub name: String,
    pub coeffs: [String; 7],
    pub parameters: Vec<String>,
    pub model_parameters: Vec<String>,
    pub positive: Vec<String>,
    pub constraints: Vec<String>,
}

pub const BUILTIN_SYMMETRIES: [&str; 2] = ["linear", "drift"];
pub const BUILTIN_FAMILIES: [&str; 3] = ["power", "exp", "drift"];

impl ImposedSymmetry {
    pub fn builtin(name: &str) -> Result<Self, InverseError> {
        let text = match name {
            "linear" => {
                "name = linear\nparameters = m, v, k, c1, c2, c3\ntau = 1\nxi = m*x + c1\neta = v*y + c2\nphi = k*u + c3\n"
            }
            "drift" => {
                "name = drift\nparameters = c1, c2, s3, s4\nmodel_parameters = v\ntau = 1\nxi = c1/2*(x - v*t) + c2*y + s3\n\
                 eta = c1/2*y - c2*(x - v*t) + s4\nphi = c1*u\n"
            }
            other => return Err(InverseError::UnknownBuiltin(other.into())),
        };
        Self::from_text(text)
    }

    /// Builtin name or file path.
    pub fn load(spec: &str) -> Result<Self, InverseError> {
        if BUILTIN_SYMMETRIES.contains(&spec) {
            return Self::builtin(spec);
        }
        Self::from_text(&read(spec)?)
    }

    /// Keys: `name`, `parameters`, `model_parameters`, `tau`, `xi`, `eta`, `phi` (missing
    /// components are 0) and repeated `constraint = lhs = rhs`.
    pub fn from_text(text: &str) -> Result<Self, InverseError> {
        let mut s = ImposedSymmetry {
            name: "symmetry".into(),
            components: std::array::from_fn(|_| "0".to_string()),
            parameters: Vec::new(),
            model_parameters: Vec::new(),
            constraints: Vec::new(),
        };
        for e in read_entries(text)? {
            match e.key.as_str() {
                "name" => s.name = e.value,
                "parameters" => s.parameters = split_list(&e.value),
                "model_parameters" => s.model_parameters = split_list(&e.value),
                "constraint" => s.constraints.push(e.value),
                k => match COMPONENT_NAMES.iter().position(|n| *n == k) {
                    Some(i) => s.components[i] = e.value,
                    None => return Err(e.invalid(format!("unknown key `{k}`")).into()),
                },
            }
        }
        Ok(s)
    }
}

impl CoefficientFamily {
    pub fn builtin(name: &str) -> Result<Self, InverseError> {
        let text = match name {
            "power" => "name = power\nparameters = n\npositive = u\nconstraint = m + v = k*n\nconstraint = c3 = 0\nA = u^n\nB = n*u^(n - 1)\n",
            "exp" => "name = exp\nconstraint = k = 0\nconstraint = c3 = m + v\nA = exp(u)\nB = exp(u)\n",
            "drift" => {
                "name = drift\nparameters = c1, c2, c3, c4, c5, c6\nmodel_parameters = v\npositive = u\nC = c3*u\nD = c3*u\n\
                 E = sqrt(u)*(c4*cos(c2/c1*ln(u)) - c5*sin(c2/c1*ln(u)))\n\
                 F = sqrt(u)*(c4*sin(c2/c1*ln(u)) + c5*cos(c2/c1*ln(u))) - v\nG = c6*u\n"
            }
            other => return Err(InverseError::UnknownBuiltin(other.into())),
        };
        Self::from_text(text)
    }

    pub fn load(spec: &str) -> Result<Self, InverseError> {
        if BUILTIN_FAMILIES.contains(&spec) {
            return Self::builtin(spec);
        }
        Self::from_text(&read(spec)?)
    }

    /// Keys: `name`, `parameters`, `model_parameters`, `positive`,
    /// `constraint` (repeatable) and `A` to `G` (missing are 0).
    pub fn from_text(text: &str) -> Result<Self, InverseError> {
        let mut f = CoefficientFamily {
            name: "family".into(),
            coeffs: std::array::from_fn(|_| "0".to_string()),
            parameters: Vec::new(),
            model_parameters: Vec::new(),
            positive: Vec::new(),
            constraints: Vec::new(),
        };
        for e in read_entries(text)? {
            match e.key.as_str() {
                "name" => f.name = e.value,
                "parameters" => f.parameters = split_list(&e.value),
                "model_parameters" => f.model_parameters = split_list(&e.value),
                "positive" => f.positive = split_list(&e.value),
                "constraint" => f.constraints.push(e.value),
                k => match COEFF_NAMES.iter().position(|n| *n == k) {
                    Some(i) => f.coeffs[i] = e.value,
                    None => return Err(e.invalid(format!("unknown key `{k}`")).into()),
                },
            }
        }
        Ok(f)
    }
}

fn read(path: &str) -> Result<String, InverseError> {
    std::fs::read_to_string(path).map_err(|e| {
        InverseError::File(FileError::Invalid {
            line: 0,
            message: format!("cannot read `{path}`: {e}"),
        })
    })
}

fn invalid(message: String) -> InverseError {
    InverseError::File(FileError::Invalid { line: 0, message })
}

/// Solve each `lhs = rhs` for the first parameter (in order of appearance)
/// that enters linearly, substituting into later constraints.
fn resolve_constraints(
    constraints: &[String],
    params: &[String],
    ctx: &ParseContext,
) -> Result<BTreeMap<Var, Expr>, InverseError> {
    let mut map: BTreeMap<Var, Expr> = BTreeMap::new();
    for c in constraints {
        let (l, r) = c.split_once('=').ok_or_else(|| InverseError::Constraint(c.clone()))?;
        let lhs = parse(l.trim(), ctx).map_err(|e| invalid(format!("constraint `{c}`: {e}")))?;
        let rhs = parse(r.trim(), ctx).map_err(|e| invalid(format!("constraint `{c}`: {e}")))?;
        let e = (lhs - rhs).subs(&map).normalize();
        let mut order: Vec<&String> = params.iter().filter(|p| c.contains(p.as_str())).collect();
        order.sort_by_key(|p| c.find(p.as_str()));
        let solved = order.into_iter().find_map(|p| {
            let v = Var::sym(p);
            let a = e.diff(&v).normalize();
            if a.is_zero_const() || a.contains_var(&v) || map.contains_key(&v) {
                return None;
            }
            let rest = (&e - &(&a * &Expr::sym(p))).normalize();
            Some((v, (-rest / a).normalize()))
        });
        let (v, value) = solved.ok_or_else(|| InverseError::Constraint(c.clone()))?;
        for x in map.values_mut() {
            *x = x.subs1(&v, &value).normalize();
        }
        map.insert(v, value);
    }
    Ok(map)
}

/// Family and symmetry after parsing against a shared context and applying
/// the constraints.
struct Resolved {
    field: VectorField,
    model: PdeModel,
    eliminated: Vec<String>,
}

fn resolve(sym: &ImposedSymmetry, fam: &CoefficientFamily) -> Result<Resolved, InverseError> {
    let mut params: Vec<String> = Vec::new();
    for p in sym
        .parameters
        .iter()
        .chain(&sym.model_parameters)
        .chain(&fam.parameters)
        .chain(&fam.model_parameters)
    {
        if !params.contains(p) {
            params.push(p.clone());
        }
    }
    let ctx = ParseContext::default()
        .with_params(params.clone())
        .with_positive(fam.positive.clone());
    let constraints: Vec<String> = sym.constraints.iter().chain(&fam.constraints).cloned().collect();
    let map = resolve_constraints(&constraints, &params, &ctx)?;
    let p = |s: &str, what: &str| -> Result<Expr, InverseError> {
        parse(s, &ctx)
            .map(|e| e.subs(&map).normalize_with(&ctx.assumptions()))
            .map_err(|e| invalid(format!("{what}: {e}")))
    };
    let comps: Vec<Expr> = sym
        .components
        .iter()
        .zip(COMPONENT_NAMES)
        .map(|(c, n)| p(c, n))
        .collect::<Result<_, _>>()?;
    let coeffs: Vec<Expr> = fam
        .coeffs
        .iter()
        .zip(COEFF_NAMES)
        .map(|(c, n)| p(c, n))
        .collect::<Result<_, _>>()?;
    let eliminated: Vec<String> = map.keys().map(|v| v.name()).collect();
    let remaining: Vec<String> = params.into_iter().filter(|q| !eliminated.contains(q)).collect();
    let model = PdeModel::new(
        &fam.name,
        coeffs.try_into().expect("seven coefficients"),
        remaining,
        Assumptions::positive(fam.positive.clone()),
    )
    .map_err(|e| InverseError::Model(e.to_string()))?;
    Ok(Resolved {
        field: VectorField::from_components(comps.try_into().expect("four components")),
        model,
        eliminated,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationVerdict {
    /// Jet monomial whose coefficient this equation is.
    pub monomial: String,
    /// Symbolic verdict with all remaining parameters free.
    pub symbolic: String,
    /// Number of sampled parameter tuples where the equation failed.
    pub sample_failures: usize,
    /// Sampled tuples where evaluation hit a domain violation.
    pub sample_domain: usize,
    pub witness: Option<String>,
}

impl EquationVerdict {
    pub fn vanishes(&self) -> bool {
        (self.symbolic == "exact" || self.symbolic == "sampled") && self.sample_failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InverseReport {
    pub symmetry: String,
    pub family: String,
    /// Parameters fixed by the constraints, with their values.
    pub constraints: Vec<String>,
    pub field: VectorField,
    pub samples: usize,
    pub equations: Vec<EquationVerdict>,
}

impl InverseReport {
    pub fn admitted(&self) -> bool {
        self.equations.iter().all(EquationVerdict::vanishes)
    }
}

/// Substitute the imposed field into the determining system of the family.
/// Each equation is tested with all parameters symbolic, then with exact
/// rational values at `samples` random parameter tuples.
pub fn inverse_check(
    sym: &ImposedSymmetry,
    fam: &CoefficientFamily,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<InverseReport, InverseError> {
    let r = resolve(sym, fam)?;
    let asm = &r.model.positive;
    let ds = DeterminingSystem::symbolic(&r.model, false)?;
    let eqs: Vec<Expr> = ds.substitute(&r.field, asm);
    let cfg = ZeroTestConfig::default().with_positive(asm).with_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tuples: Vec<BTreeMap<Var, Expr>> = (0..samples)
        .map(|_| {
            r.model
                .parameters
                .iter()
                .map(|p| {
                    let k: i64 = rng.gen_range(1..=32);
                    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                    (Var::sym(p), Expr::rational(sign * k, 8))
                })
                .collect()
        })
        .collect();
    let verdicts = exec.map(&eqs, |e| {
        let sym = e.normalize_with(asm).is_zero_with(&cfg);
        let mut failures = 0;
        let mut domain = 0;
        let mut witness = match &sym {
            ZeroTest::NonZero { witness, value } => Some(format!("{} -> {value:e}", witness.describe())),
            _ => None,
        };
        for t in &tuples {
            match e.subs(t).normalize_with(asm).is_zero_with(&cfg) {
                ZeroTest::Zero(_) => {}
                ZeroTest::Indeterminate => domain += 1,
                ZeroTest::NonZero { witness: w, value } => {
                    failures += 1;
                    if witness.is_none() {
                        let vals: Vec<String> = t.iter().map(|(k, v)| format!("{}={v}", k.name())).collect();
                        witness = Some(format!("{}; {} -> {value:e}", vals.join(", "), w.describe()));
                    }
                }
            }
        }
        (sym.label().to_string(), failures, domain, witness)
    });
    let equations = ds
        .equations
        .iter()
        .zip(verdicts)
        .map(
            |(d, (symbolic, sample_failures, sample_domain, witness))| EquationVerdict {
                monomial: d.monomial.to_string(),
                symbolic,
                sample_failures,
                sample_domain,
                witness,
            },
        )
        .collect();
    Ok(InverseReport {
        symmetry: sym.name.clone(),
        family: fam.name.clone(),
        constraints: r.eliminated.iter().map(|p| p.to_string()).collect(),
        field: r.field,
        samples,
        equations,
    })
}

/// Bind family parameters and return the concrete model. Fails if a
/// declared family parameter still appears in the coefficients.
pub fn specialize(fam: &CoefficientFamily, bindings: &[(String, Rational)]) -> Result<PdeModel, InverseError> {
    let mut params = fam.parameters.clone();
    params.extend(fam.model_parameters.iter().cloned());
    let ctx = ParseContext::default()
        .with_params(params)
        .with_positive(fam.positive.clone());
    let map: BTreeMap<Var, Expr> = bindings
        .iter()
        .map(|(k, v)| (Var::sym(k), Expr::constant(v.clone())))
        .collect();
    let asm = Assumptions::positive(fam.positive.clone());
    let mut coeffs: [Expr; 7] = std::array::from_fn(|_| Expr::zero());
    for (i, c) in fam.coeffs.iter().enumerate() {
        let e = parse(c, &ctx).map_err(|e| invalid(format!("{}: {e}", COEFF_NAMES[i])))?;
        coeffs[i] = e.subs(&map).normalize_with(&asm);
    }
    for p in &fam.parameters {
        if coeffs.iter().any(|c| c.contains_var(&Var::sym(p))) {
            return Err(InverseError::Unbound(p.clone()));
        }
    }
    PdeModel::new(&fam.name, coeffs, fam.model_parameters.clone(), asm).map_err(|e| InverseError::Model(e.to_string()))
}

/// Generators spanned by the imposed family after constraints: the value
/// at all-zero parameters and the derivative along each parameter.
pub fn family_generators(sym: &ImposedSymmetry, fam: &CoefficientFamily) -> Result<Vec<VectorField>, InverseError> {
    let r = resolve(sym, fam)?;
    let free: Vec<String> = sym
        .parameters
        .iter()
        .filter(|p| !r.eliminated.contains(p))
        .cloned()
        .collect();
    let zero: BTreeMap<Var, Expr> = free.iter().map(|p| (Var::sym(p), Expr::zero())).collect();
    let mut out = vec![r.field.map(|c| c.subs(&zero).normalize())];
    for p in &free {
        out.push(r.field.map(|c| c.diff(&Var::sym(p)).subs(&zero).normalize()));
    }
    out.retain(|v| !v.is_zero());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    #[test]
    fn constraints_solve_linearly() {
        let ctx = ParseContext::default().with_params(["m", "v", "k", "n"]);
        let params: Vec<String> = ["m", "v", "k", "n"].map(String::from).to_vec();
        let map = resolve_constraints(&["m + v = k*n".into()], &params, &ctx).unwrap();
        let want = (Expr::sym("k") * Expr::sym("n") - Expr::sym("v")).normalize();
        assert_eq!(map[&Var::sym("m")], want);
        assert!(resolve_constraints(&["m*m = 1".into()], &params, &ctx).is_err());
    }

    #[test]
    fn power_family_admits_linear_sector() {
        let s = ImposedSymmetry::builtin("linear").unwrap();
        let f = CoefficientFamily::builtin("power").unwrap();
        let r = inverse_check(&s, &f, 3, 0, Execution::Sequential).unwrap();
        assert!(r.admitted(), "{r:#?}");
    }

    #[test]
    fn exp_family_needs_its_constraints() {
        let s = ImposedSymmetry::builtin("linear").unwrap();
        let f = CoefficientFamily::builtin("exp").unwrap();
        assert!(inverse_check(&s, &f, 3, 0, Execution::Sequential).unwrap().admitted());
        let mut loose = f.clone();
        loose.constraints.clear();
        assert!(!inverse_check(&s, &loose, 3, 0, Execution::Sequential)
            .unwrap()
            .admitted());
    }

    #[test]
    fn specialize_power_to_ricci() {
        let f = CoefficientFamily::builtin("power").unwrap();
        let m = specialize(&f, &[("n".into(), rat(-1, 1))]).unwrap();
        assert_eq!(m.coeffs, PdeModel::builtin("ricci").unwrap().coeffs);
        assert!(matches!(specialize(&f, &[]), Err(InverseError::Unbound(_))));
    }

    #[test]
    fn specialize_drift_to_convdiff() {
        let f = CoefficientFamily::builtin("drift").unwrap();
        let b: Vec<(String, Rational)> = [("c3", 1), ("c4", 0), ("c5", 0), ("c6", 0)]
            .iter()
            .map(|(k, v)| (k.to_string(), rat(*v, 1)))
            .collect();
        let m = specialize(&f, &b).unwrap();
        assert_eq!(m.coeffs, PdeModel::builtin("convdiff").unwrap().coeffs);
    }

    #[test]
    fn drift_family_readings() {
        let s = ImposedSymmetry::builtin("drift").unwrap();
        let f = CoefficientFamily::builtin("drift").unwrap();
        let r = inverse_check(&s, &f, 25, 0, Execution::Parallel).unwrap();
        assert!(r.admitted(), "{r:#?}");
        let mut printed = f.clone();
        printed.coeffs[5] = "sqrt(u)*(c4*sin(c2/c1*ln(u)) + c5*cos(c2/c1*ln(u)) - v)".into();
        let r = inverse_check(&s, &printed, 25, 0, Execution::Parallel).unwrap();
        assert!(!r.admitted());
    }

    #[test]
    fn power_family_needs_zero_shift() {
        let s = ImposedSymmetry::builtin("linear").unwrap();
        let mut f = CoefficientFamily::builtin("power").unwrap();
        f.constraints.retain(|c| !c.starts_with("c3"));
        let r = inverse_check(&s, &f, 5, 0, Execution::Sequential).unwrap();
        assert!(!r.admitted());
    }

    #[test]
    fn imposed_generators_lie_in_solver_span() {
        use crate::ansatz::{solve_symmetries, span_contains, Ansatz};
        let s = ImposedSymmetry::builtin("linear").unwrap();
        for (fam, n) in [("power", 2), ("power", -1), ("exp", 0)] {
            let mut f = CoefficientFamily::builtin(fam).unwrap();
            if fam == "power" {
                f.parameters.clear();
                f.coeffs[0] = format!("u^({n})");
                f.coeffs[1] = format!("({n})*u^({n} - 1)");
                f.constraints[0] = format!("m + v = k*({n})");
            }
            let gens = family_generators(&s, &f).unwrap();
            let m = specialize(&f, &[]).unwrap();
            let b = solve_symmetries(&m, &Ansatz::default()).unwrap();
            let mut span = b.generators.clone();
            span.extend(b.time_generator.clone());
            assert!(span_contains(&span, &gens, &b.parameters), "{fam} {n}");
        }
    }

    #[test]
    fn file_errors() {
        assert!(ImposedSymmetry::from_text("colour = 1").is_err());
        assert!(CoefficientFamily::from_text("A = ").is_ok());
        let s = ImposedSymmetry::builtin("linear").unwrap();
        let mut f = CoefficientFamily::builtin("power").unwrap();
        f.coeffs[0] = "u^".into();
        assert!(inverse_check(&s, &f, 0, 0, Execution::Sequential).is_err());
    }
}
