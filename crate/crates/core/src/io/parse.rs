//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('-')? power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
//! ```
//!
//! Integer literals are single tokens; `p/q` is an ordinary quotient and
//! folds to an exact rational during normalization. Decimal literals are
//! read exactly (`0.25` is `1/4`).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::expr::{Assumptions, Expr, FnAtom, FuncKind, Indep, Jet, Rational, FN_ARGS, MAX_JET_ORDER};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UnknownIdentifier,
    JetSuffix,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Names the parser accepts, with their roles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseContext {
    pub independent: Vec<String>,
    pub dependent: String,
    pub parameters: BTreeSet<String>,
    pub positive: BTreeSet<String>,
    /// Opaque functions of `(t, x, y, u)`, written `f` or `f_xu`.
    pub functions: BTreeSet<String>,
}

impl Default for ParseContext {
    fn default() -> Self {
        ParseContext {
            independent: vec!["t".into(), "x".into(), "y".into()],
            dependent: "u".into(),
            parameters: BTreeSet::new(),
            positive: BTreeSet::new(),
            functions: BTreeSet::new(),
        }
    }
}

impl ParseContext {
    pub fn with_params<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.parameters.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn with_positive<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.positive.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn with_functions<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.functions.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn assumptions(&self) -> Assumptions {
        Assumptions::positive(self.positive.iter().cloned())
    }

    /// Checks that the name sets are pairwise disjoint.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        let all = self
            .independent
            .iter()
            .chain(std::iter::once(&self.dependent))
            .chain(self.parameters.iter())
            .chain(self.functions.iter());
        for n in all {
            if !seen.insert(n.as_str()) {
                return Err(format!("name `{n}` declared twice"));
            }
            if FuncKind::from_name(n).is_some() {
                return Err(format!("`{n}` is a reserved function name"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Dec(Rational),
    Name(String),
    Op(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).map_or(false, |d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                let digits = format!("{int_part}{frac}");
                let num: BigInt = if digits.is_empty() {
                    BigInt::from(0)
                } else {
                    digits.parse().unwrap()
                };
                let den = num_traits::pow::Pow::pow(BigInt::from(10), frac.len() as u32);
                out.push(Token {
                    tok: Tok::Dec(Rational::new(num, den)),
                    line: l0,
                    col: c0,
                });
            } else {
                out.push(Token {
                    tok: Tok::Int(int_part.parse().unwrap()),
                    line: l0,
                    col: c0,
                });
            }
            col += i - start;
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Name(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
            col += i - start;
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Token {
                tok: Tok::Op(c),
                line: l0,
                col: c0,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            kind: ParseErrorKind::Syntax,
            line: l0,
            col: c0,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

/// Parse the part after `<name>_` as a derivative multi-index over `letters`.
fn parse_suffix(suffix: &str, letters: &[char]) -> Option<Vec<usize>> {
    let mut counts = vec![0usize; letters.len()];
    let mut rep = String::new();
    for c in suffix.chars() {
        if c.is_ascii_digit() {
            rep.push(c);
            continue;
        }
        let idx = letters.iter().position(|l| *l == c)?;
        let n: usize = if rep.is_empty() { 1 } else { rep.parse().ok()? };
        if n == 0 {
            return None;
        }
        rep.clear();
        counts[idx] += n;
    }
    if !rep.is_empty() || suffix.is_empty() {
        return None;
    }
    Some(counts)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
    depth: usize,
}

const MAX_DEPTH: usize = 200;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, t: &Token, kind: ParseErrorKind, message: String) -> ParseError {
        ParseError {
            kind,
            line: t.line,
            col: t.col,
            message,
        }
    }

    fn expect_op(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.bump();
        if t.tok == Tok::Op(c) {
            Ok(())
        } else {
            Err(self.err(
                &t,
                ParseErrorKind::Syntax,
                format!("expected `{c}`, found {}", describe(&t.tok)),
            ))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let t = self.peek().clone();
            return Err(self.err(&t, ParseErrorKind::Syntax, "expression nested too deeply".into()));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(Expr::add_all(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek().tok {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.factor()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    factors.push(self.factor()?.recip());
                }
                _ => break,
            }
        }
        Ok(Expr::mul_all(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let r = if self.peek().tok == Tok::Op('-') {
            self.bump();
            Ok(-self.power()?)
        } else {
            self.power()
        };
        self.depth -= 1;
        r
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let e = self.factor()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match &t.tok {
            Tok::Int(n) => Ok(Expr::constant(Rational::from_integer(n.clone()))),
            Tok::Dec(r) => Ok(Expr::constant(r.clone())),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::Name(name) => {
                if let Some(kind) = FuncKind::from_name(name) {
                    if self.peek().tok != Tok::Op('(') {
                        return Err(self.err(
                            &t,
                            ParseErrorKind::Syntax,
                            format!("function `{name}` needs an argument in parentheses"),
                        ));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Expr::apply(kind, arg));
                }
                let e = self.name(name, &t)?;
                if self.peek().tok == Tok::Op('(') {
                    let p = self.peek().clone();
                    return Err(self.err(&p, ParseErrorKind::Syntax, format!("`{name}` is not a function")));
                }
                Ok(e)
            }
            other => Err(self.err(&t, ParseErrorKind::Syntax, format!("unexpected {}", describe(other)))),
        }
    }

    fn name(&self, name: &str, t: &Token) -> Result<Expr, ParseError> {
        let ctx = self.ctx;
        if ctx.independent.iter().any(|n| n == name) || ctx.parameters.contains(name) {
            return Ok(Expr::sym(name));
        }
        if name == ctx.dependent {
            return Ok(Expr::u());
        }
        if ctx.functions.contains(name) {
            return Ok(Expr::func_atom(FnAtom::new(name)));
        }
        if let Some((head, suffix)) = name.split_once('_') {
            if head == ctx.dependent {
                let letters: Vec<char> = ctx
                    .independent
                    .iter()
                    .filter_map(|n| n.chars().next().filter(|_| n.len() == 1))
                    .collect();
                let counts = parse_suffix(suffix, &letters).ok_or_else(|| {
                    self.err(
                        t,
                        ParseErrorKind::JetSuffix,
                        format!("malformed jet suffix in `{name}`"),
                    )
                })?;
                let mut j = Jet::U;
                for (letter, n) in letters.iter().zip(counts) {
                    let v = Indep::from_letter(*letter).ok_or_else(|| {
                        self.err(
                            t,
                            ParseErrorKind::JetSuffix,
                            format!("unsupported jet variable `{letter}`"),
                        )
                    })?;
                    for _ in 0..n {
                        j = j.bump(v);
                    }
                }
                if j.order() > MAX_JET_ORDER {
                    return Err(self.err(
                        t,
                        ParseErrorKind::JetSuffix,
                        format!("`{name}` exceeds jet order {MAX_JET_ORDER}"),
                    ));
                }
                return Ok(Expr::jet(j));
            }
            if ctx.functions.contains(head) {
                let counts = parse_suffix(suffix, &FN_ARGS).ok_or_else(|| {
                    self.err(
                        t,
                        ParseErrorKind::JetSuffix,
                        format!("malformed derivative suffix in `{name}`"),
                    )
                })?;
                let mut f = FnAtom::new(head);
                for (i, n) in counts.into_iter().enumerate() {
                    f.d[i] = n.min(u8::MAX as usize) as u8;
                }
                return Ok(Expr::func_atom(f));
            }
            let declared = ctx.independent.iter().any(|n| n == head) || ctx.parameters.contains(head);
            if declared {
                return Err(self.err(
                    t,
                    ParseErrorKind::JetSuffix,
                    format!("jet suffix on `{head}`, which is not the dependent variable"),
                ));
            }
        }
        Err(self.err(
            t,
            ParseErrorKind::UnknownIdentifier,
            format!("unknown identifier `{name}`"),
        ))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("number `{n}`"),
        Tok::Dec(r) => format!("number `{r}`"),
        Tok::Name(n) => format!("name `{n}`"),
        Tok::Op(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

/// Parse without normalizing.
pub fn parse_raw(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        ctx,
        depth: 0,
    };
    if p.peek().tok == Tok::End {
        let t = p.peek().clone();
        return Err(p.err(&t, ParseErrorKind::Syntax, "empty expression".into()));
    }
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err(&t, ParseErrorKind::Syntax, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

/// Parse and normalize under the context's positivity declarations.
pub fn parse(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    Ok(parse_raw(text, ctx)?.normalize_with(&ctx.assumptions()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::print;

    #[test]
    fn ricci_right_hand_side() {
        let ctx = ParseContext::default();
        let e = parse("u_xy/u - u_x*u_y/u^2", &ctx).unwrap();
        let expected =
            (Expr::u_of("xy") / Expr::u() - Expr::u_of("x") * Expr::u_of("y") / Expr::u().powi(2)).normalize();
        assert_eq!(e, expected);
    }

    #[test]
    fn parameters_and_jets() {
        let ctx = ParseContext::default().with_params(["m", "c1"]);
        let e = parse("(m*x+c1)", &ctx).unwrap();
        assert_eq!(e, (Expr::sym("m") * Expr::sym("x") + Expr::sym("c1")).normalize());
        assert_eq!(parse("u_txx", &ctx).unwrap(), Expr::jet(Jet::new(1, 2, 0)));
        assert_eq!(parse("u_t2x", &ctx).unwrap(), Expr::jet(Jet::new(1, 2, 0)));
    }

    #[test]
    fn errors_carry_positions() {
        let ctx = ParseContext::default();
        let e = parse("2*(1+", &ctx).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Syntax);
        assert_eq!((e.line, e.col), (1, 6));
        let e = parse("x +\n  zeta", &ctx).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier);
        assert_eq!((e.line, e.col), (2, 3));
        let e = parse("x_t", &ctx).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::JetSuffix);
        assert!(parse("x y", &ctx).is_err());
        assert!(parse("u_4x", &ctx).is_err());
    }

    #[test]
    fn print_round_trip_examples() {
        let ctx = ParseContext::default().with_params(["a"]);
        for s in [
            "y*exp(-a*x)",
            "-1/2",
            "u^a",
            "(x + y)^(-2)/3 - tanh(x)^2",
            "u^(1/2)*x/(y*u_x)",
        ] {
            let e = parse(s, &ctx).unwrap();
            assert_eq!(parse(&print(&e), &ctx).unwrap(), e, "{s} -> {}", print(&e));
        }
    }

    #[test]
    fn precedence() {
        let ctx = ParseContext::default();
        let a = parse("-x^2", &ctx).unwrap();
        assert_eq!(a, (-(Expr::sym("x").powi(2))).normalize());
        let b = parse("x^2/3", &ctx).unwrap();
        assert_eq!(b, (Expr::sym("x").powi(2) / Expr::int(3)).normalize());
        let c = parse("2^3^2", &ctx).unwrap();
        assert_eq!(c, Expr::int(512));
        let d = parse("0.25*x", &ctx).unwrap();
        assert_eq!(d, (Expr::rational(1, 4) * Expr::sym("x")).normalize());
    }
}
