use num_traits::{One, Signed};

use crate::expr::{Expr, Node, Rational};

/// Render an expression in the input grammar. For normalized input the
/// output parses back to the same expression.
pub fn print(e: &Expr) -> String {
    let mut s = String::new();
    write_sum(e, &mut s);
    s
}

fn write_sum(e: &Expr, out: &mut String) {
    match e.node() {
        Node::Add(terms) => {
            for (i, t) in terms.iter().enumerate() {
                let (neg, body) = signed_term(t);
                match (i, neg) {
                    (0, true) => out.push('-'),
                    (0, false) => {}
                    (_, true) => out.push_str(" - "),
                    (_, false) => out.push_str(" + "),
                }
                out.push_str(&body);
            }
        }
        _ => {
            let (neg, body) = signed_term(e);
            if neg {
                out.push('-');
            }
            out.push_str(&body);
        }
    }
}

/// Split a term into sign and magnitude text.
fn signed_term(e: &Expr) -> (bool, String) {
    let (coeff, factors): (Rational, Vec<&Expr>) = match e.node() {
        Node::Const(c) => (c.clone(), vec![]),
        Node::Mul(v) => match v.first().and_then(|f| f.as_const()) {
            Some(c) => (c.clone(), v[1..].iter().collect()),
            None => (Rational::one(), v.iter().collect()),
        },
        _ => (Rational::one(), vec![e]),
    };
    let neg = coeff.is_negative();
    (neg, product_text(&coeff.abs(), &factors))
}

fn product_text(coeff: &Rational, factors: &[&Expr]) -> String {
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    for f in factors {
        if let Node::Pow(b, x) = f.node() {
            if let Some(c) = x.as_const() {
                // a sum written as a quotient would be re-expanded before
                // inversion, so it keeps its negative exponent
                if c.is_negative() && !matches!(b.node(), Node::Add(_)) {
                    let m = -c;
                    if m.is_one() {
                        den.push(base_text(b));
                    } else {
                        den.push(format!("{}^{}", base_text(b), exponent_text(&Expr::constant(m))));
                    }
                    continue;
                }
            }
        }
        num.push(factor_text(f));
    }
    let p = Rational::from_integer(coeff.numer().clone());
    let q = coeff.denom().clone();
    if !p.is_one() || num.is_empty() {
        num.insert(0, p.numer().to_string());
    }
    if !q.is_one() {
        den.insert(0, q.to_string());
    }
    let mut s = num.join("*");
    match den.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den.join("*"));
            s.push(')');
        }
    }
    s
}

fn is_atomic(e: &Expr) -> bool {
    match e.node() {
        Node::Const(c) => c.is_integer() && !c.is_negative(),
        Node::Sym(_) | Node::Jet(_) | Node::Fn(_) | Node::Func(_, _) => true,
        _ => false,
    }
}

fn base_text(b: &Expr) -> String {
    if is_atomic(b) {
        atom_text(b)
    } else {
        format!("({})", print(b))
    }
}

fn exponent_text(x: &Expr) -> String {
    base_text(x)
}

fn factor_text(f: &Expr) -> String {
    match f.node() {
        Node::Pow(b, x) => format!("{}^{}", base_text(b), exponent_text(x)),
        Node::Add(_) => format!("({})", print(f)),
        _ if is_atomic(f) => atom_text(f),
        _ => format!("({})", print(f)),
    }
}

fn atom_text(e: &Expr) -> String {
    match e.node() {
        Node::Const(c) => c.to_string(),
        Node::Sym(s) => s.to_string(),
        Node::Jet(j) => j.name(),
        Node::Fn(f) => f.display_name(),
        Node::Func(k, a) => format!("{}({})", k.name(), print(a)),
        _ => format!("({})", print(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_lowest_terms_and_powers() {
        assert_eq!(print(&Expr::rational(-3, 6).normalize()), "-1/2");
        assert_eq!(print(&Expr::u().pow(Expr::sym("n"))), "u^n");
    }

    #[test]
    fn prints_quotients() {
        let e = (Expr::u_of("xy") / Expr::u() - Expr::u_of("x") * Expr::u_of("y") / Expr::u().powi(2)).normalize();
        let s = print(&e);
        assert!(s.contains("u_xy/u"), "{s}");
        assert!(s.contains("u_x*u_y/u^2"), "{s}");
    }
}
