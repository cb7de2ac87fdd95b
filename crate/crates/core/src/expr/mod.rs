//! Immutable symbolic expressions over exact rationals, symbols, jet
//! coordinates of `u`, opaque functions of `(t, x, y, u)` and a handful of
//! elementary functions.
//!
//! Values are cheap to clone (`Arc` backed) and safe to share between
//! threads. Constructors build raw trees; call [`Expr::normalize`] to get the
//! canonical form that all comparisons in this crate rely on.

mod diff;
mod eval;
mod normalize;
mod subs;
pub(crate) mod zero;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use diff::JetOrderError;
pub use eval::{EvalError, ExactPoint, Point};
pub use normalize::Assumptions;
pub use zero::{is_exactly_zero, is_zero, random_point, ZeroCertificate, ZeroTest, ZeroTestConfig};

pub use normalize::normalize_with;
pub(crate) use normalize::{from_poly, to_poly, Poly};
pub(crate) use zero::cleared_numerator_expr;

/// Exact rational constant.
pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub(crate) fn rational_sqrt(q: &Rational) -> Option<Rational> {
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

/// A named scalar: independent variable, free parameter, or plain symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Independent variables of the jet space, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Indep {
    T,
    X,
    Y,
}

impl Indep {
    pub const ALL: [Indep; 3] = [Indep::T, Indep::X, Indep::Y];

    pub fn letter(self) -> char {
        match self {
            Indep::T => 't',
            Indep::X => 'x',
            Indep::Y => 'y',
        }
    }

    pub fn symbol(self) -> Symbol {
        Symbol::new(match self {
            Indep::T => "t",
            Indep::X => "x",
            Indep::Y => "y",
        })
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            't' => Some(Indep::T),
            'x' => Some(Indep::X),
            'y' => Some(Indep::Y),
            _ => None,
        }
    }
}

/// Jet coordinate: a partial derivative of `u`, `u_t^a u_x^b u_y^c`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Jet {
    pub t: u8,
    pub x: u8,
    pub y: u8,
}

/// Highest jet order the calculus supports.
pub const MAX_JET_ORDER: u8 = 3;

impl Jet {
    pub const U: Jet = Jet { t: 0, x: 0, y: 0 };

    pub fn new(t: u8, x: u8, y: u8) -> Self {
        Jet { t, x, y }
    }

    pub fn order(&self) -> u8 {
        self.t + self.x + self.y
    }

    pub fn count(&self, v: Indep) -> u8 {
        match v {
            Indep::T => self.t,
            Indep::X => self.x,
            Indep::Y => self.y,
        }
    }

    pub fn bump(&self, v: Indep) -> Jet {
        let mut j = *self;
        match v {
            Indep::T => j.t += 1,
            Indep::X => j.x += 1,
            Indep::Y => j.y += 1,
        }
        j
    }

    /// Suffix after `u_`, e.g. `xy`, `2x`, `t2x`. Empty for `u` itself.
    pub fn suffix(&self) -> String {
        let mut s = String::new();
        for v in Indep::ALL {
            match self.count(v) {
                0 => {}
                1 => s.push(v.letter()),
                n => {
                    s.push_str(&n.to_string());
                    s.push(v.letter());
                }
            }
        }
        s
    }

    pub fn name(&self) -> String {
        if self.order() == 0 {
            "u".to_string()
        } else {
            format!("u_{}", self.suffix())
        }
    }
}

impl Ord for Jet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.name().cmp(&other.name()))
    }
}

impl PartialOrd for Jet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Arguments of an opaque function atom, in derivative-index order.
pub const FN_ARGS: [char; 4] = ['t', 'x', 'y', 'u'];

/// Opaque function of `(t, x, y, u)` together with a partial-derivative
/// multi-index, e.g. `xi_x` or `phi_2u`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnAtom {
    pub name: Symbol,
    /// derivative counts in `t, x, y, u` order
    pub d: [u8; 4],
}

impl FnAtom {
    pub fn new(name: &str) -> Self {
        FnAtom {
            name: Symbol::new(name),
            d: [0; 4],
        }
    }

    pub fn derivative(&self, arg: usize) -> FnAtom {
        let mut out = self.clone();
        out.d[arg] += 1;
        out
    }

    pub fn display_name(&self) -> String {
        let mut s = String::new();
        for (i, c) in FN_ARGS.iter().enumerate() {
            match self.d[i] {
                0 => {}
                1 => s.push(*c),
                n => {
                    s.push_str(&n.to_string());
                    s.push(*c);
                }
            }
        }
        if s.is_empty() {
            self.name.to_string()
        } else {
            format!("{}_{}", self.name, s)
        }
    }
}

impl fmt::Debug for FnAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FuncKind {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Tanh,
    Arctan,
}

impl FuncKind {
    pub const ALL: [FuncKind; 7] = [
        FuncKind::Exp,
        FuncKind::Ln,
        FuncKind::Sqrt,
        FuncKind::Sin,
        FuncKind::Cos,
        FuncKind::Tanh,
        FuncKind::Arctan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Ln => "ln",
            FuncKind::Sqrt => "sqrt",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Tanh => "tanh",
            FuncKind::Arctan => "arctan",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        FuncKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// Tree node. Variant order is the canonical ordering: constants, symbols,
/// jets, opaque functions, then composites by kind.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Sym(Symbol),
    Jet(Jet),
    Fn(FnAtom),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Expr),
    Func(FuncKind, Expr),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Differentiation target: an independent symbol or a jet coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Sym(Symbol),
    Jet(Jet),
}

impl Var {
    pub fn sym(name: &str) -> Self {
        Var::Sym(Symbol::new(name))
    }

    pub fn u() -> Self {
        Var::Jet(Jet::U)
    }

    pub fn indep(v: Indep) -> Self {
        Var::Sym(v.symbol())
    }

    pub fn to_expr(&self) -> Expr {
        match self {
            Var::Sym(s) => Expr::new(Node::Sym(s.clone())),
            Var::Jet(j) => Expr::jet(*j),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Var::Sym(s) => s.to_string(),
            Var::Jet(j) => j.name(),
        }
    }
}

impl Expr {
    pub fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(r: Rational) -> Self {
        Expr::new(Node::Const(r))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(Rational::from_integer(BigInt::from(n)))
    }

    pub fn rational(p: i64, q: i64) -> Self {
        Expr::constant(rat(p, q))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Self {
        Expr::new(Node::Sym(Symbol::new(name)))
    }

    pub fn symbol(s: &Symbol) -> Self {
        Expr::new(Node::Sym(s.clone()))
    }

    pub fn jet(j: Jet) -> Self {
        Expr::new(Node::Jet(j))
    }

    pub fn u() -> Self {
        Expr::jet(Jet::U)
    }

    /// Jet coordinate from its suffix letters, e.g. `Expr::u_of("xy")`.
    pub fn u_of(suffix: &str) -> Self {
        let mut j = Jet::U;
        for c in suffix.chars() {
            j = j.bump(Indep::from_letter(c).expect("jet letter must be t, x or y"));
        }
        Expr::jet(j)
    }

    pub fn indep(v: Indep) -> Self {
        Expr::symbol(&v.symbol())
    }

    pub fn func_atom(f: FnAtom) -> Self {
        Expr::new(Node::Fn(f))
    }

    pub fn add_all(terms: Vec<Expr>) -> Self {
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => Expr::new(Node::Add(terms)),
        }
    }

    pub fn mul_all(factors: Vec<Expr>) -> Self {
        match factors.len() {
            0 => Expr::one(),
            1 => factors.into_iter().next().unwrap(),
            _ => Expr::new(Node::Mul(factors)),
        }
    }

    pub fn pow(&self, exponent: Expr) -> Self {
        Expr::new(Node::Pow(self.clone(), exponent))
    }

    pub fn powi(&self, n: i64) -> Self {
        self.pow(Expr::int(n))
    }

    pub fn apply(kind: FuncKind, arg: Expr) -> Self {
        Expr::new(Node::Func(kind, arg))
    }

    pub fn exp(&self) -> Self {
        Expr::apply(FuncKind::Exp, self.clone())
    }

    pub fn ln(&self) -> Self {
        Expr::apply(FuncKind::Ln, self.clone())
    }

    pub fn sqrt(&self) -> Self {
        Expr::apply(FuncKind::Sqrt, self.clone())
    }

    pub fn recip(&self) -> Self {
        self.powi(-1)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        let r = self.as_const()?;
        if r.is_integer() {
            i64::try_from(r.to_integer()).ok()
        } else {
            None
        }
    }

    /// Structural zero test; meaningful on normalized expressions.
    pub fn is_zero_const(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_zero())
    }

    pub fn is_one_const(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_one())
    }

    pub fn is_negative_const(&self) -> bool {
        matches!(self.node(), Node::Const(r) if r.is_negative())
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Sym(_) | Node::Jet(_) | Node::Fn(_) => vec![],
            Node::Add(v) | Node::Mul(v) => v.iter().collect(),
            Node::Pow(b, e) => vec![b, e],
            Node::Func(_, a) => vec![a],
        }
    }

    /// Visit every node, parents before children.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Sym(s) = e.node() {
                out.insert(s.clone());
            }
        });
        out
    }

    pub fn jets(&self) -> BTreeSet<Jet> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Jet(j) = e.node() {
                out.insert(*j);
            }
        });
        out
    }

    pub fn fn_atoms(&self) -> BTreeSet<FnAtom> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Node::Fn(a) = e.node() {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Free variables that a numeric evaluation needs values for.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e.node() {
            Node::Sym(s) => {
                out.insert(Var::Sym(s.clone()));
            }
            Node::Jet(j) => {
                out.insert(Var::Jet(*j));
            }
            _ => {}
        });
        out
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        let mut found = false;
        self.walk(&mut |e| match (e.node(), v) {
            (Node::Sym(s), Var::Sym(w)) if s == w => found = true,
            (Node::Jet(j), Var::Jet(k)) if j == k => found = true,
            // opaque functions depend on t, x, y and u
            (Node::Fn(_), Var::Sym(w)) if matches!(w.name(), "t" | "x" | "y") => found = true,
            (Node::Fn(_), Var::Jet(k)) if *k == Jet::U => found = true,
            _ => {}
        });
        found
    }

    pub fn max_jet_order(&self) -> u8 {
        self.jets().iter().map(|j| j.order()).max().unwrap_or(0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $build:expr) => {
        impl std::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $build;
                f(self, rhs)
            }
        }
        impl std::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $build;
                f(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $build;
                f(self, rhs.clone())
            }
        }
        impl std::ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $build;
                f(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add_all(vec![a, b]));
binop!(Sub, sub, |a, b| Expr::add_all(vec![
    a,
    Expr::mul_all(vec![Expr::int(-1), b])
]));
binop!(Mul, mul, |a, b| Expr::mul_all(vec![a, b]));
binop!(Div, div, |a, b| Expr::mul_all(vec![a, b.powi(-1)]));

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all(vec![Expr::int(-1), self])
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::print(self))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::io::print(self))
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::io::print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_names_and_order() {
        assert_eq!(Jet::new(0, 2, 0).name(), "u_2x");
        assert_eq!(Jet::new(1, 2, 0).name(), "u_t2x");
        assert_eq!(Jet::new(0, 1, 1).name(), "u_xy");
        assert!(Jet::new(1, 0, 0) < Jet::new(0, 1, 1));
        assert!(Jet::U < Jet::new(1, 0, 0));
    }

    #[test]
    fn canonical_variant_order() {
        let c = Expr::int(5);
        let s = Expr::sym("a");
        let j = Expr::u_of("x");
        let comp = Expr::sym("a").exp();
        assert!(c < s && s < j && j < comp);
    }

    #[test]
    fn fn_atom_names() {
        let a = FnAtom::new("xi").derivative(1).derivative(3).derivative(3);
        assert_eq!(a.display_name(), "xi_x2u");
    }
}
