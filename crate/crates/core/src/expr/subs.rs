use std::collections::BTreeMap;

use super::{Expr, FnAtom, Node, Var};

impl Expr {
    /// Bottom-up rewrite. `f` sees each node after its children were
    /// rewritten and may return a replacement. Unchanged subtrees are shared.
    pub fn rewrite(&self, f: &mut dyn FnMut(&Expr) -> Option<Expr>) -> Expr {
        let rebuilt = match self.node() {
            Node::Const(_) | Node::Sym(_) | Node::Jet(_) | Node::Fn(_) => self.clone(),
            Node::Add(v) | Node::Mul(v) => {
                let new: Vec<Expr> = v.iter().map(|c| c.rewrite(f)).collect();
                if new.iter().zip(v).all(|(a, b)| a == b) {
                    self.clone()
                } else if matches!(self.node(), Node::Add(_)) {
                    Expr::new(Node::Add(new))
                } else {
                    Expr::new(Node::Mul(new))
                }
            }
            Node::Pow(b, e) => {
                let (nb, ne) = (b.rewrite(f), e.rewrite(f));
                if nb == *b && ne == *e {
                    self.clone()
                } else {
                    nb.pow(ne)
                }
            }
            Node::Func(k, a) => {
                let na = a.rewrite(f);
                if na == *a {
                    self.clone()
                } else {
                    Expr::apply(*k, na)
                }
            }
        };
        f(&rebuilt).unwrap_or(rebuilt)
    }

    /// Simultaneous substitution of symbols and jet coordinates. The result
    /// is not normalized.
    pub fn subs(&self, map: &BTreeMap<Var, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.rewrite(&mut |e| match e.node() {
            Node::Sym(s) => map.get(&Var::Sym(s.clone())).cloned(),
            Node::Jet(j) => map.get(&Var::Jet(*j)).cloned(),
            _ => None,
        })
    }

    pub fn subs1(&self, v: &Var, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(v.clone(), value.clone());
        self.subs(&m)
    }

    /// Replace opaque function atoms. The result is not normalized.
    pub fn subs_fn(&self, f: &dyn Fn(&FnAtom) -> Option<Expr>) -> Expr {
        self.rewrite(&mut |e| match e.node() {
            Node::Fn(a) => f(a),
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_symbols_and_jets() {
        let e = Expr::sym("x") * Expr::u_of("x") + Expr::u();
        let mut m = BTreeMap::new();
        m.insert(Var::sym("x"), Expr::int(2));
        m.insert(Var::u(), Expr::sym("y"));
        let r = e.subs(&m).normalize();
        let expected = (Expr::int(2) * Expr::u_of("x") + Expr::sym("y")).normalize();
        assert_eq!(r, expected);
    }

    #[test]
    fn untouched_tree_is_shared() {
        let e = Expr::sym("a") + Expr::sym("b");
        let r = e.subs1(&Var::sym("z"), &Expr::one());
        assert!(std::ptr::eq(e.node(), r.node()));
    }
}
