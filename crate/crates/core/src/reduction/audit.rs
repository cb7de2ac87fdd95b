//! Checks of printed formulas that fail verification against a small
//! catalog of single-token repairs.

use serde::Serialize;

use super::reduce::{equivalent_up_to_factor, ReducedEquation};
use super::solution::{verify_solution, SolutionCandidate};
use super::ReductionError;
use crate::expr::{Expr, Node};
use crate::io::{parse, ParseContext};
use crate::parallel::Execution;
use crate::pde::PdeModel;

/// Textual repairs tried on failing formulas: `(from, to)`.
pub const TEXT_REPAIRS: [(&str, &str); 2] = [("y^2/2", "y/2"), ("x^2/2", "x/2")];

#[derive(Clone, Debug, Serialize)]
pub struct Repair {
    pub description: String,
    pub text: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub subject: String,
    pub printed: String,
    pub printed_passes: bool,
    pub detail: String,
    pub repairs: Vec<Repair>,
}

impl AuditReport {
    pub fn passing_repairs(&self) -> impl Iterator<Item = &Repair> {
        self.repairs.iter().filter(|r| r.passed)
    }
}

fn top_terms(e: &Expr) -> Vec<Expr> {
    match e.node() {
        Node::Add(v) => v.clone(),
        _ => vec![e.clone()],
    }
}

/// Each variant of `e` with one top-level term negated.
fn sign_flips(e: &Expr) -> Vec<(String, Expr)> {
    let terms = top_terms(e);
    if terms.len() < 2 {
        return Vec::new();
    }
    (0..terms.len())
        .map(|i| {
            let v: Vec<Expr> = terms
                .iter()
                .enumerate()
                .map(|(j, t)| if i == j { -t } else { t.clone() })
                .collect();
            (format!("negate term `{}`", terms[i]), Expr::add_all(v).normalize())
        })
        .collect()
}

/// `(description, repaired text, parsed)` for each applicable repair.
fn text_variants(text: &str, ctx: &ParseContext) -> Vec<(String, String, Expr)> {
    TEXT_REPAIRS
        .iter()
        .filter(|(from, _)| text.contains(from))
        .filter_map(|(from, to)| {
            let t = text.replace(from, to);
            parse(&t, ctx)
                .ok()
                .map(|e| (format!("replace `{from}` by `{to}`"), t, e))
        })
        .collect()
}

/// Verify a printed solution; when it fails, try the textual repairs.
pub fn audit_solution(
    m: &PdeModel,
    cand: &SolutionCandidate,
    grid: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<AuditReport, ReductionError> {
    let r = verify_solution(m, cand, grid, tol, seed, exec)?;
    let mut report = AuditReport {
        subject: cand.name.clone(),
        printed: if cand.text.is_empty() {
            cand.u.to_string()
        } else {
            cand.text.clone()
        },
        printed_passes: r.passed,
        detail: format!("{} (max scaled residual {:e})", r.symbolic, r.grid.max_scaled),
        repairs: Vec::new(),
    };
    if r.passed {
        return Ok(report);
    }
    for (description, text, u) in text_variants(&cand.text, &cand.context(m)) {
        let mut c = cand.clone();
        c.text = text;
        c.u = u;
        let passed = verify_solution(m, &c, grid, tol, seed, exec)
            .map(|r| r.passed)
            .unwrap_or(false);
        report.repairs.push(Repair {
            description,
            text: c.text,
            passed,
        });
    }
    Ok(report)
}

/// Compare a printed reduced equation with the computed one (up to an
/// overall factor free of the `h` jets) and try the catalogued repairs.
pub fn audit_reduced(
    subject: &str,
    computed: &ReducedEquation,
    printed: &str,
    ctx: &ParseContext,
) -> Result<AuditReport, ReductionError> {
    let p = parse(printed, ctx).map_err(|e| ReductionError::Input(e.to_string()))?;
    let asm = &computed.positive;
    let t = equivalent_up_to_factor(&computed.equation, &p, asm, 0);
    let mut report = AuditReport {
        subject: subject.to_string(),
        printed: printed.to_string(),
        printed_passes: t.is_zero(),
        detail: format!("computed: {} = 0", computed.equation),
        repairs: Vec::new(),
    };
    if report.printed_passes {
        return Ok(report);
    }
    let mut variants = text_variants(printed, ctx);
    variants.extend(
        sign_flips(&p.normalize())
            .into_iter()
            .map(|(d, e)| (d, e.to_string(), e)),
    );
    for (description, text, e) in variants {
        let passed = equivalent_up_to_factor(&computed.equation, &e, asm, 0).is_zero();
        report.repairs.push(Repair {
            description,
            text,
            passed,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_flip_variants() {
        let e = Expr::sym("a") + Expr::sym("b") - Expr::sym("c");
        let v = sign_flips(&e.normalize());
        assert_eq!(v.len(), 3);
        assert!(v
            .iter()
            .any(|(_, x)| *x == (Expr::sym("a") + Expr::sym("b") + Expr::sym("c")).normalize()));
    }

    #[test]
    fn repaired_square_passes() {
        let m = PdeModel::builtin("convdiff").unwrap();
        let text = "-(y^2/2 - v*t + x)^2/(5*t/2 + 1)";
        let mut c = SolutionCandidate::new("s", parse(text, &m.parse_context()).unwrap(), text);
        c.positive.push("t".into());
        let r = audit_solution(&m, &c, 50, 1e-10, 0, Execution::Sequential).unwrap();
        assert!(!r.printed_passes);
        assert!(r.passing_repairs().any(|x| x.description.contains("y/2")), "{r:?}");
    }
}
