use std::collections::BTreeMap;
use std::fmt::Write;

use clap::Args;
use serde_json::{json, Value};

use jetsym::ansatz::{solve_symmetries, span_contains, span_equal, verify_basis, Ansatz, TauMode};
use jetsym::expr::{Assumptions, Expr, Var};
use jetsym::inverse::{inverse_check as check_family, CoefficientFamily, ImposedSymmetry};
use jetsym::io::{parse as parse_expr, split_list, ParseContext};
use jetsym::lie::{verify_optimal, LieAlgebra, OptimalSystem};
use jetsym::pde::{PdeModel, VectorField};
use jetsym::reduction::{
    audit_reduced, audit_solution, invariants_of, jacobian_rank, load_solutions, reduce as reduce_model,
    verify_invariants, verify_reduced_solution, verify_solution as check_solution, InvariantSet, H_JETS,
};

use crate::report::{Config, Failure, Outcome};

#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Builtin model name or model file.
    #[arg(long)]
    pub model: String,
}

#[derive(Args, Debug)]
pub struct SymmetriesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Joint degree of the ansatz in (x, y, t).
    #[arg(long, default_value_t = 1)]
    pub degree: i32,
    /// Degree of the ansatz in u.
    #[arg(long, default_value_t = 1)]
    pub u_degree: u32,
    /// Give tau the same polynomial ansatz instead of a constant.
    #[arg(long)]
    pub free_tau: bool,
}

#[derive(Args, Debug)]
pub struct OptimalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Builtin catalog name or catalog file; defaults to the model name.
    #[arg(long)]
    pub catalog: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Combination of basis generators, e.g. `V2 + alpha*V3`.
    #[arg(long, allow_hyphen_values = true)]
    pub operator: String,
    /// Extra constants used in the operator or invariants.
    #[arg(long, default_value = "")]
    pub params: String,
    /// Variables assumed positive.
    #[arg(long, default_value = "")]
    pub positive: String,
    /// Supplied invariants `I1; I2; I3` instead of computed ones.
    #[arg(long, allow_hyphen_values = true)]
    pub invariants: Option<String>,
    /// Reduced equation to compare against, up to a factor.
    #[arg(long, allow_hyphen_values = true)]
    pub compare: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifySolutionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Solution file.
    #[arg(long)]
    pub solution: String,
}

#[derive(Args, Debug)]
pub struct VerifyReducedArgs {
    /// Reduced equation in t, z and h, h_t, h_z, h_2z, h_tz.
    #[arg(long, allow_hyphen_values = true)]
    pub equation: String,
    /// Candidate h(t, z).
    #[arg(long, allow_hyphen_values = true)]
    pub h: String,
    #[arg(long, default_value = "")]
    pub params: String,
    #[arg(long, default_value = "")]
    pub positive: String,
}

#[derive(Args, Debug)]
pub struct InverseArgs {
    /// Builtin symmetry name or symmetry file.
    #[arg(long)]
    pub symmetry: String,
    /// Builtin family name or family file.
    #[arg(long)]
    pub family: String,
    /// Random parameter tuples checked in addition to the symbolic test.
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    #[arg(allow_hyphen_values = true)]
    pub expr: String,
    #[arg(long, default_value = "")]
    pub params: String,
    #[arg(long, default_value = "")]
    pub positive: String,
    #[arg(long)]
    pub normalize: bool,
}

fn load_model(spec: &str) -> Result<PdeModel, Failure> {
    PdeModel::load(spec).map_err(|e| Failure(format!("model `{spec}`: {e}")))
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// The literature basis when the model has one, otherwise the degree-one
/// solver basis with the `tau = 1` generator appended.
fn model_basis(m: &PdeModel) -> Result<Vec<VectorField>, Failure> {
    if let Some(b) = m.reference_basis() {
        return Ok(b);
    }
    let b = solve_symmetries(m, &Ansatz::default())?;
    let mut out = b.generators;
    out.extend(b.time_generator);
    Ok(out)
}

pub fn symmetries(cfg: &Config, a: SymmetriesArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model.model)?;
    let ansatz = Ansatz {
        degree: a.degree,
        u_degree: a.u_degree,
        tau: if a.free_tau {
            TauMode::Polynomial
        } else {
            TauMode::Fixed
        },
    };
    let b = solve_symmetries(&m, &ansatz)?;
    let checks = verify_basis(&m, &b, cfg.seed);
    let admitted: Vec<String> = checks
        .iter()
        .map(|(_, r)| match r {
            Ok(z) => z.label().to_string(),
            Err(e) => format!("error: {e}"),
        })
        .collect();
    let passed = checks.iter().all(|(_, r)| matches!(r, Ok(z) if z.is_zero()));
    let reference = m.reference_basis().map(|r| {
        json!({
            "contained": span_contains(&b.generators, &r, &b.parameters),
            "span_equal": span_equal(&b.generators, &r, &b.parameters),
        })
    });
    let mut text = format!("model {}: dimension {}\n", m.name, b.dimension());
    for (i, v) in b.generators.iter().enumerate() {
        let _ = writeln!(text, "  V{} = {v}    [{}]", i + 1, admitted[i]);
    }
    if let Some(t) = &b.time_generator {
        let _ = writeln!(text, "  time generator: {t}    [{}]", admitted[b.dimension()]);
    }
    for c in &b.conditions {
        let _ = writeln!(text, "  assuming {c}");
    }
    if let Some(r) = &reference {
        let _ = writeln!(
            text,
            "  reference basis: contained {}, span equal {}",
            r["contained"], r["span_equal"]
        );
    }
    Ok(Outcome {
        command: "symmetries",
        config: cfg.clone(),
        inputs: json!({"model": m.name, "ansatz": ansatz}),
        report: json!({
            "dimension": b.dimension(),
            "generators": strings(&b.generators),
            "time_generator": b.time_generator.as_ref().map(ToString::to_string),
            "parameters": b.parameters,
            "conditions": b.conditions,
            "admitted": admitted,
            "reference": reference,
        }),
        text,
        passed,
    })
}

fn algebra(m: &PdeModel) -> Result<LieAlgebra, Failure> {
    Ok(LieAlgebra::structure_table(
        &model_basis(m)?,
        &m.parameters,
        &m.positive,
    )?)
}

pub fn commutators(cfg: &Config, a: ModelArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model)?;
    let alg = algebra(&m)?;
    let n = alg.dim();
    let table: Vec<Vec<String>> = (0..n).map(|i| (0..n).map(|j| alg.cell_text(i, j)).collect()).collect();
    let width = table.iter().flatten().map(String::len).max().unwrap_or(1).max(3);
    let mut text = String::new();
    for (i, v) in alg.basis.iter().enumerate() {
        let _ = writeln!(text, "V{} = {v}", i + 1);
    }
    let _ = write!(text, "\n{:>4} |", "");
    for j in 0..n {
        let _ = write!(text, " {:>width$}", format!("V{}", j + 1));
    }
    text.push('\n');
    for (i, row) in table.iter().enumerate() {
        let _ = write!(text, "{:>4} |", format!("V{}", i + 1));
        for c in row {
            let _ = write!(text, " {c:>width$}");
        }
        text.push('\n');
    }
    let jacobi = alg.jacobi_holds();
    let antisymmetric = alg.antisymmetric();
    let _ = writeln!(text, "antisymmetric {antisymmetric}, Jacobi {jacobi}");
    Ok(Outcome {
        command: "commutators",
        config: cfg.clone(),
        inputs: json!({"model": m.name}),
        report: json!({
            "basis": strings(&alg.basis),
            "table": table,
            "antisymmetric": antisymmetric,
            "jacobi": jacobi,
        }),
        text,
        passed: jacobi && antisymmetric,
    })
}

pub fn optimal(cfg: &Config, a: OptimalArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model.model)?;
    let alg = algebra(&m)?;
    let spec = a.catalog.unwrap_or_else(|| m.name.clone());
    let sys = OptimalSystem::load(&spec)?;
    let r = verify_optimal(&alg, &sys, a.trials, cfg.seed, cfg.execution)?;
    let mut text = format!(
        "catalog {}: reached {}/{} (max reconstruction error {:e})\n",
        r.catalog, r.reached, r.trials, r.max_error
    );
    for (k, rep) in sys.representatives.iter().enumerate() {
        let _ = writeln!(text, "  {}: ({})", sys.label(k), strings(rep).join(", "));
    }
    for (v, why) in &r.failures {
        let _ = writeln!(text, "  unreached {v:?}: {why}");
    }
    for p in &r.patterns {
        let _ = writeln!(
            text,
            "  pattern {}: {}",
            p.pattern,
            p.reached.as_deref().unwrap_or("unreached")
        );
    }
    for p in &r.pairs {
        let _ = writeln!(
            text,
            "  {} vs {}: separated {} ({})",
            p.first, p.second, p.separated, p.by
        );
    }
    for p in &r.parameters {
        let _ = writeln!(
            text,
            "  {} parameter {}: separated {}",
            p.representative, p.parameter, p.separated
        );
    }
    let passed = r.all_reachable() && r.all_separated() && r.patterns.iter().all(|p| p.reached.is_some());
    Ok(Outcome {
        command: "optimal",
        config: cfg.clone(),
        inputs: json!({"model": m.name, "catalog": spec, "trials": a.trials}),
        report: serde_json::to_value(&r)?,
        text,
        passed,
    })
}

/// `sum c_i V_i` parsed with `V1..Vn` as formal symbols.
fn operator_field(text: &str, basis: &[VectorField], ctx: &ParseContext) -> Result<(Vec<Expr>, VectorField), Failure> {
    let names: Vec<String> = (1..=basis.len()).map(|i| format!("V{i}")).collect();
    let ctx = ctx.clone().with_params(names.clone());
    let e = parse_expr(text, &ctx)
        .map_err(|e| Failure(format!("operator: {e}")))?
        .normalize();
    let zero: BTreeMap<Var, Expr> = names.iter().map(|n| (Var::sym(n), Expr::zero())).collect();
    if !e.subs(&zero).normalize().is_zero_const() {
        return Err(Failure("operator must be a linear combination of V1..Vn".into()));
    }
    let mut coeffs = Vec::new();
    for n in &names {
        let c = e.diff(&Var::sym(n)).normalize();
        if names.iter().any(|m| c.contains_var(&Var::sym(m))) {
            return Err(Failure("operator must be linear in V1..Vn".into()));
        }
        coeffs.push(c);
    }
    Ok((coeffs.clone(), VectorField::combination(basis, &coeffs)))
}

pub fn reduce(cfg: &Config, a: ReduceArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model.model)?;
    let basis = model_basis(&m)?;
    let extra = split_list(&a.params);
    let positive = split_list(&a.positive);
    let mut params = m.parameters.clone();
    params.extend(extra.iter().cloned());
    let mut pos: Vec<String> = m.positive.names().map(String::from).collect();
    pos.extend(positive.iter().cloned());
    let ctx = ParseContext::default().with_params(params).with_positive(pos.clone());
    let asm = Assumptions::positive(pos);
    let (coeffs, v) = operator_field(&a.operator, &basis, &ctx)?;
    let v = v.normalize_with(&asm);
    let mut text = format!("generator: {v}\n");
    let (inv, checks) = match &a.invariants {
        Some(s) => {
            let parts: Vec<&str> = s.split(';').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(Failure("--invariants needs three expressions separated by `;`".into()));
            }
            let mut ex = Vec::new();
            for p in parts {
                ex.push(parse_expr(p, &ctx).map_err(|e| Failure(format!("invariant `{p}`: {e}")))?);
            }
            let checks = verify_invariants(&v, &ex, &asm, cfg.seed);
            let inv = InvariantSet::supplied(&v, ex.try_into().expect("three invariants"), positive.clone());
            (inv, checks)
        }
        None => {
            let inv = invariants_of(&v, &asm)?;
            let checks = verify_invariants(&v, &inv.invariants, &inv.assumptions(&asm), cfg.seed);
            (inv, checks)
        }
    };
    let labels: Vec<&str> = checks.iter().map(|z| z.label()).collect();
    let invariant_ok = checks.iter().all(|z| z.is_zero());
    let rank = jacobian_rank(&inv.invariants, &inv.assumptions(&asm), 8, cfg.seed);
    for (k, (i, l)) in inv.invariants.iter().zip(&labels).enumerate() {
        let _ = writeln!(text, "  I{} = {i}    [{l}]", k + 1);
    }
    let _ = writeln!(text, "  method: {}; independent: {}", inv.method, rank.independent());
    for c in &inv.conditions {
        let _ = writeln!(text, "  assuming {c}");
    }
    let mut report = json!({
        "generator": v.to_string(),
        "coefficients": strings(&coeffs),
        "invariants": inv,
        "invariant_checks": labels,
        "rank": rank,
    });
    let mut passed = invariant_ok && rank.independent();
    if invariant_ok {
        let mut m2 = m.clone();
        m2.positive = asm.clone();
        m2.parameters.extend(extra.iter().cloned());
        match reduce_model(&m2, &inv) {
            Ok(red) => {
                let _ = writeln!(
                    text,
                    "reduced equation (u = {} h(t, z), z = {}):\n  {} = 0",
                    red.prefactor, red.similarity, red.equation
                );
                report["reduced"] = serde_json::to_value(&red)?;
                if let Some(printed) = &a.compare {
                    let rctx = jetsym::reduction::reduced_context(&m2, &extra);
                    let audit = audit_reduced("reduced equation", &red, printed, &rctx)?;
                    let _ = writeln!(text, "compare: equivalent {}", audit.printed_passes);
                    for r in audit.passing_repairs() {
                        let _ = writeln!(text, "  repair: {} -> {}", r.description, r.text);
                    }
                    passed &= audit.printed_passes;
                    report["compare"] = serde_json::to_value(&audit)?;
                }
            }
            Err(e) => {
                let _ = writeln!(text, "reduction not completed: {e}");
                report["reduction_error"] = Value::String(e.to_string());
                passed = false;
            }
        }
    }
    Ok(Outcome {
        command: "reduce",
        config: cfg.clone(),
        inputs: json!({
            "model": m.name,
            "operator": a.operator,
            "params": extra,
            "positive": positive,
            "invariants": a.invariants,
            "compare": a.compare,
        }),
        report,
        text,
        passed,
    })
}

pub fn verify_solution(cfg: &Config, a: VerifySolutionArgs) -> Result<Outcome, Failure> {
    let m = load_model(&a.model.model)?;
    let cands = load_solutions(&a.solution, &m)?;
    let mut text = String::new();
    let mut entries = Vec::new();
    let mut passed = true;
    for c in &cands {
        let r = check_solution(&m, c, cfg.grid, cfg.tol, cfg.seed, cfg.execution);
        let mut entry = json!({"name": c.name, "u": c.u.to_string()});
        match r {
            Ok(r) => {
                let _ = writeln!(
                    text,
                    "{}: {} (symbolic {}, max scaled residual {:e} over {} points)",
                    c.name,
                    if r.passed { "pass" } else { "FAIL" },
                    r.symbolic,
                    r.grid.max_scaled,
                    r.grid.points
                );
                if let Some(w) = &r.witness {
                    let _ = writeln!(text, "  witness: {w}");
                }
                passed &= r.passed;
                if !r.passed {
                    let audit = audit_solution(&m, c, cfg.grid, cfg.tol, cfg.seed, cfg.execution)?;
                    for rep in audit.passing_repairs() {
                        let _ = writeln!(text, "  repair passes: {} -> {}", rep.description, rep.text);
                    }
                    entry["audit"] = serde_json::to_value(&audit)?;
                }
                entry["report"] = serde_json::to_value(&r)?;
            }
            Err(e) => {
                let _ = writeln!(text, "{}: FAIL ({e})", c.name);
                passed = false;
                entry["error"] = Value::String(e.to_string());
            }
        }
        entries.push(entry);
    }
    Ok(Outcome {
        command: "verify-solution",
        config: cfg.clone(),
        inputs: json!({"model": m.name, "solution": a.solution}),
        report: json!({"candidates": entries}),
        text,
        passed,
    })
}

pub fn verify_reduced(cfg: &Config, a: VerifyReducedArgs) -> Result<Outcome, Failure> {
    let extra = split_list(&a.params);
    let positive = split_list(&a.positive);
    let mut names: Vec<String> = vec!["z".into()];
    names.extend(H_JETS.iter().map(|s| s.to_string()));
    names.extend(extra.iter().cloned());
    let ctx = ParseContext::default()
        .with_params(names)
        .with_positive(positive.clone());
    let eq = parse_expr(&a.equation, &ctx).map_err(|e| Failure(format!("equation: {e}")))?;
    let h = parse_expr(&a.h, &ctx).map_err(|e| Failure(format!("h: {e}")))?;
    if H_JETS.iter().any(|n| h.contains_var(&Var::sym(n))) {
        return Err(Failure("h must not contain the h jets".into()));
    }
    let asm = Assumptions::positive(positive.clone());
    let r = verify_reduced_solution(&eq, &h, &asm, cfg.grid, cfg.tol, cfg.seed, cfg.execution)?;
    let text = format!(
        "symbolic {}, max scaled residual {:e} over {} points\n",
        r.symbolic, r.grid.max_scaled, r.grid.points
    );
    Ok(Outcome {
        command: "verify-reduced",
        config: cfg.clone(),
        inputs: json!({"equation": a.equation, "h": a.h, "params": extra, "positive": positive}),
        passed: r.passed,
        report: serde_json::to_value(&r)?,
        text,
    })
}

pub fn inverse(cfg: &Config, a: InverseArgs) -> Result<Outcome, Failure> {
    let s = ImposedSymmetry::load(&a.symmetry)?;
    let f = CoefficientFamily::load(&a.family)?;
    let r = check_family(&s, &f, a.samples, cfg.seed, cfg.execution)?;
    let mut text = format!("symmetry {} on family {}\n  field: {}\n", r.symmetry, r.family, r.field);
    if !r.constraints.is_empty() {
        let _ = writeln!(text, "  eliminated by constraints: {}", r.constraints.join(", "));
    }
    for e in &r.equations {
        let _ = writeln!(
            text,
            "  [{}] {}: {} ({}/{} tuples fail{})",
            if e.vanishes() { "ok" } else { "FAIL" },
            e.monomial,
            e.symbolic,
            e.sample_failures,
            r.samples,
            if e.sample_domain > 0 {
                format!(", {} outside domain", e.sample_domain)
            } else {
                String::new()
            }
        );
        if let Some(w) = &e.witness {
            let _ = writeln!(text, "      witness: {w}");
        }
    }
    Ok(Outcome {
        command: "inverse",
        config: cfg.clone(),
        inputs: json!({"symmetry": s, "family": f, "samples": a.samples}),
        passed: r.admitted(),
        report: serde_json::to_value(&r)?,
        text,
    })
}

pub fn parse(cfg: &Config, a: ParseArgs) -> Result<Outcome, Failure> {
    let params = split_list(&a.params);
    let positive = split_list(&a.positive);
    let ctx = ParseContext::default()
        .with_params(params.clone())
        .with_positive(positive.clone());
    let e = parse_expr(&a.expr, &ctx)?;
    let out = if a.normalize {
        e.normalize_with(&ctx.assumptions())
    } else {
        e
    };
    let jets: Vec<String> = out.jets().into_iter().map(|j| j.name()).collect();
    let symbols: Vec<String> = out.symbols().into_iter().map(|s| s.to_string()).collect();
    Ok(Outcome {
        command: "parse",
        config: cfg.clone(),
        inputs: json!({"expr": a.expr, "params": params, "positive": positive, "normalize": a.normalize}),
        report: json!({"printed": out.to_string(), "symbols": symbols, "jets": jets}),
        text: format!("{out}\n"),
        passed: true,
    })
}
