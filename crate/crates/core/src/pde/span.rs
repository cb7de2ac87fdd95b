//! Comparing linear systems over the field of functions of their
//! coefficients.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::{from_poly, to_poly, Assumptions, ExactPoint, Expr, FnAtom, Node, Poly, Rational, Var};
use crate::linalg;

/// Coefficients of an expression that is affine in the unknown function
/// atoms. The key `None` holds the unknown-free part.
pub fn linear_form(e: &Expr, unknown: &dyn Fn(&FnAtom) -> bool) -> Option<BTreeMap<Option<FnAtom>, Expr>> {
    let p = to_poly(e, &Assumptions::default());
    let mut out: BTreeMap<Option<FnAtom>, Poly> = BTreeMap::new();
    for (mono, c) in &p.terms {
        let mut key = None;
        let mut rest = Vec::new();
        for (b, x) in mono {
            match b.node() {
                Node::Fn(f) if unknown(f) => {
                    if key.is_some() || !x.is_one_const() {
                        return None;
                    }
                    key = Some(f.clone());
                }
                _ => {
                    let mut bad = false;
                    b.walk(&mut |n| {
                        if let Node::Fn(f) = n.node() {
                            bad |= unknown(f);
                        }
                    });
                    if bad {
                        return None;
                    }
                    rest.push((b.clone(), x.clone()));
                }
            }
        }
        out.entry(key).or_default().add_term(rest, c.clone());
    }
    Some(out.into_iter().map(|(k, v)| (k, from_poly(&v))).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanComparison {
    pub rank_first: usize,
    pub rank_second: usize,
    pub rank_union: usize,
    /// Every equation of the second system is a combination of the first.
    pub first_implies_second: bool,
    pub second_implies_first: bool,
}

impl SpanComparison {
    pub fn equivalent(&self) -> bool {
        self.first_implies_second && self.second_implies_first
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let v = crate::expr::zero::sample_value(rng, false);
    Rational::new(((v * 64.0).round() as i64).into(), 64.into())
}

/// Ranks of two affine systems and of their union over the function field
/// of their coefficients, evaluated exactly at random rational points
/// (the generic rank is the maximum over points).
pub fn compare_spans(
    first: &[Expr],
    second: &[Expr],
    unknown: &dyn Fn(&FnAtom) -> bool,
    seed: u64,
) -> Option<SpanComparison> {
    let fa: Vec<_> = first.iter().map(|e| linear_form(e, unknown)).collect::<Option<_>>()?;
    let fb: Vec<_> = second.iter().map(|e| linear_form(e, unknown)).collect::<Option<_>>()?;
    let columns: BTreeSet<Option<FnAtom>> = fa.iter().chain(&fb).flat_map(|m| m.keys().cloned()).collect();
    let columns: Vec<Option<FnAtom>> = columns.into_iter().collect();
    let mut vars: BTreeSet<Var> = BTreeSet::new();
    let mut fns: BTreeSet<FnAtom> = BTreeSet::new();
    for form in fa.iter().chain(&fb) {
        for c in form.values() {
            vars.extend(c.free_vars());
            fns.extend(c.fn_atoms());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ra, mut rb, mut ru) = (0, 0, 0);
    let mut good = 0;
    let mut attempts = 0;
    while good < 4 && attempts < 40 {
        attempts += 1;
        let mut p = ExactPoint::default();
        for v in &vars {
            p.vars.insert(v.clone(), random_rational(&mut rng));
        }
        for f in &fns {
            p.fns.insert(f.clone(), random_rational(&mut rng));
        }
        let rows = |forms: &[BTreeMap<Option<FnAtom>, Expr>]| -> Option<Vec<Vec<Rational>>> {
            forms
                .iter()
                .map(|form| {
                    columns
                        .iter()
                        .map(|c| match form.get(c) {
                            Some(e) => e.eval_exact(&p),
                            None => Some(Rational::from_integer(0.into())),
                        })
                        .collect::<Option<Vec<_>>>()
                })
                .collect()
        };
        let (Some(a), Some(b)) = (rows(&fa), rows(&fb)) else {
            continue;
        };
        let mut u = a.clone();
        u.extend(b.iter().cloned());
        ra = ra.max(linalg::rank(&a, columns.len()));
        rb = rb.max(linalg::rank(&b, columns.len()));
        ru = ru.max(linalg::rank(&u, columns.len()));
        good += 1;
    }
    if good == 0 {
        return None;
    }
    Some(SpanComparison {
        rank_first: ra,
        rank_second: rb,
        rank_union: ru,
        first_implies_second: ra == ru,
        second_implies_first: rb == ru,
    })
}
