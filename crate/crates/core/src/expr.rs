//! A tiny expression language for user-supplied denominator functions.
//!
//! Grammar (infix, left-associative, `^` binds tightest):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' number)?
//! base   := number | 'x' | ident | '(' expr ')'
//!         | ('exp' | 'log') '(' expr ')' | '-' factor
//! ```
//!
//! `x` is the evaluation variable; any other identifier is a free parameter
//! bound at evaluation time. Only `exp` and `log` may be applied as functions.
//! Exponents are numeric literals and may carry a sign so that printed
//! derivatives (`x^-0.5` and friends) re-parse. Printing inserts the minimal
//! parentheses needed for `parse(print(t)) == t`.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    X,
    Param(String),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Base raised to a fixed numeric exponent.
    Pow(Box<Node>, f64),
    Exp(Box<Node>),
    Log(Box<Node>),
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    pub root: Node,
}

impl ExprAst {
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, src_len: src.len() };
        let root = p.expr()?;
        if p.pos < p.tokens.len() {
            return Err(Error::Parse {
                offset: p.tokens[p.pos].offset,
                msg: "trailing input".into(),
            });
        }
        Ok(ExprAst { root })
    }

    /// Evaluate at `x` with the given parameter bindings.
    pub fn eval(&self, x: f64, params: &BTreeMap<String, f64>) -> Result<f64> {
        eval_node(&self.root, x, params)
    }

    /// Symbolic derivative in `x`, simplified by constant folding.
    pub fn diff_x(&self) -> ExprAst {
        ExprAst { root: simplify(diff(&self.root)) }
    }

    /// Names of free parameters, sorted and deduplicated.
    pub fn free_params(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_params(&self.root, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

fn collect_params(n: &Node, out: &mut Vec<String>) {
    match n {
        Node::Param(name) => out.push(name.clone()),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            collect_params(a, out);
            collect_params(b, out);
        }
        Node::Pow(a, _) | Node::Exp(a) | Node::Log(a) => collect_params(a, out),
        Node::Const(_) | Node::X => {}
    }
}

fn eval_node(n: &Node, x: f64, params: &BTreeMap<String, f64>) -> Result<f64> {
    let v = match n {
        Node::Const(c) => *c,
        Node::X => x,
        Node::Param(name) => *params
            .get(name)
            .ok_or_else(|| Error::UnboundParam(name.clone()))?,
        Node::Add(a, b) => eval_node(a, x, params)? + eval_node(b, x, params)?,
        Node::Sub(a, b) => eval_node(a, x, params)? - eval_node(b, x, params)?,
        Node::Mul(a, b) => eval_node(a, x, params)? * eval_node(b, x, params)?,
        Node::Div(a, b) => {
            let den = eval_node(b, x, params)?;
            if den == 0.0 {
                return Err(Error::Domain("division by zero".into()));
            }
            eval_node(a, x, params)? / den
        }
        Node::Pow(a, e) => eval_node(a, x, params)?.powf(*e),
        Node::Exp(a) => eval_node(a, x, params)?.exp(),
        Node::Log(a) => {
            let arg = eval_node(a, x, params)?;
            if arg <= 0.0 {
                return Err(Error::Domain(format!("log of nonpositive value {arg}")));
            }
            arg.ln()
        }
    };
    if v.is_nan() {
        return Err(Error::Domain("expression evaluated to NaN".into()));
    }
    Ok(v)
}

fn diff(n: &Node) -> Node {
    match n {
        Node::Const(_) | Node::Param(_) => Node::Const(0.0),
        Node::X => Node::Const(1.0),
        Node::Add(a, b) => Node::Add(Box::new(diff(a)), Box::new(diff(b))),
        Node::Sub(a, b) => Node::Sub(Box::new(diff(a)), Box::new(diff(b))),
        Node::Mul(a, b) => Node::Add(
            Box::new(Node::Mul(Box::new(diff(a)), b.clone())),
            Box::new(Node::Mul(a.clone(), Box::new(diff(b)))),
        ),
        Node::Div(a, b) => Node::Div(
            Box::new(Node::Sub(
                Box::new(Node::Mul(Box::new(diff(a)), b.clone())),
                Box::new(Node::Mul(a.clone(), Box::new(diff(b)))),
            )),
            Box::new(Node::Pow(b.clone(), 2.0)),
        ),
        Node::Pow(a, e) => Node::Mul(
            Box::new(Node::Mul(
                Box::new(Node::Const(*e)),
                Box::new(Node::Pow(a.clone(), e - 1.0)),
            )),
            Box::new(diff(a)),
        ),
        Node::Exp(a) => Node::Mul(Box::new(Node::Exp(a.clone())), Box::new(diff(a))),
        Node::Log(a) => Node::Div(Box::new(diff(a)), a.clone()),
    }
}

/// Bottom-up constant folding and unit/zero elimination.
fn simplify(n: Node) -> Node {
    let n = match n {
        Node::Add(a, b) => Node::Add(Box::new(simplify(*a)), Box::new(simplify(*b))),
        Node::Sub(a, b) => Node::Sub(Box::new(simplify(*a)), Box::new(simplify(*b))),
        Node::Mul(a, b) => Node::Mul(Box::new(simplify(*a)), Box::new(simplify(*b))),
        Node::Div(a, b) => Node::Div(Box::new(simplify(*a)), Box::new(simplify(*b))),
        Node::Pow(a, e) => Node::Pow(Box::new(simplify(*a)), e),
        Node::Exp(a) => Node::Exp(Box::new(simplify(*a))),
        Node::Log(a) => Node::Log(Box::new(simplify(*a))),
        other => other,
    };
    match n {
        Node::Add(a, b) => match (*a, *b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
            (Node::Const(c), e) if c == 0.0 => e,
            (e, Node::Const(c)) if c == 0.0 => e,
            (a, b) => Node::Add(Box::new(a), Box::new(b)),
        },
        Node::Sub(a, b) => match (*a, *b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
            (e, Node::Const(c)) if c == 0.0 => e,
            (a, b) => Node::Sub(Box::new(a), Box::new(b)),
        },
        Node::Mul(a, b) => match (*a, *b) {
            (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
            (Node::Const(c), _) | (_, Node::Const(c)) if c == 0.0 => Node::Const(0.0),
            (Node::Const(c), e) if c == 1.0 => e,
            (e, Node::Const(c)) if c == 1.0 => e,
            (a, b) => Node::Mul(Box::new(a), Box::new(b)),
        },
        Node::Div(a, b) => match (*a, *b) {
            (Node::Const(x), Node::Const(y)) if y != 0.0 => Node::Const(x / y),
            (e, Node::Const(c)) if c == 1.0 => e,
            (Node::Const(c), b) if c == 0.0 => {
                // Keep 0/b only if b might vanish; constants fold above.
                let _ = &b;
                Node::Const(0.0)
            }
            (a, b) => Node::Div(Box::new(a), Box::new(b)),
        },
        Node::Pow(a, e) => {
            if e == 0.0 {
                Node::Const(1.0)
            } else if e == 1.0 {
                *a
            } else if let Node::Const(c) = *a {
                Node::Const(c.powf(e))
            } else {
                Node::Pow(a, e)
            }
        }
        other => other,
    }
}

// ---------------------------------------------------------------- printing

fn precedence(n: &Node) -> u8 {
    match n {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Pow(..) => 3,
        _ => 4,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, n: &Node, min_prec: u8) -> fmt::Result {
    let prec = precedence(n);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match n {
        Node::Const(c) => write!(f, "{c}")?,
        Node::X => write!(f, "x")?,
        Node::Param(p) => write!(f, "{p}")?,
        Node::Add(a, b) => {
            write_node(f, a, 1)?;
            write!(f, "+")?;
            write_node(f, b, 2)?;
        }
        Node::Sub(a, b) => {
            write_node(f, a, 1)?;
            write!(f, "-")?;
            write_node(f, b, 2)?;
        }
        Node::Mul(a, b) => {
            write_node(f, a, 2)?;
            write!(f, "*")?;
            write_node(f, b, 3)?;
        }
        Node::Div(a, b) => {
            write_node(f, a, 2)?;
            write!(f, "/")?;
            write_node(f, b, 3)?;
        }
        Node::Pow(a, e) => {
            // The grammar only admits atomic bases before '^'.
            write_node(f, a, 4)?;
            write!(f, "^{e}")?;
        }
        Node::Exp(a) => {
            write!(f, "exp(")?;
            write_node(f, a, 0)?;
            write!(f, ")")?;
        }
        Node::Log(a) => {
            write!(f, "log(")?;
            write_node(f, a, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

// ------------------------------------------------------------------ lexing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    X,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let offset = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => { out.push(Token { tok: Tok::Plus, offset }); i += 1; }
            '-' => { out.push(Token { tok: Tok::Minus, offset }); i += 1; }
            '*' => { out.push(Token { tok: Tok::Star, offset }); i += 1; }
            '/' => { out.push(Token { tok: Tok::Slash, offset }); i += 1; }
            '^' => { out.push(Token { tok: Tok::Caret, offset }); i += 1; }
            '(' => { out.push(Token { tok: Tok::LParen, offset }); i += 1; }
            ')' => { out.push(Token { tok: Tok::RParen, offset }); i += 1; }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // Scientific suffix only when unambiguously numeric.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    msg: format!("bad number `{text}`"),
                })?;
                out.push(Token { tok: Tok::Num(v), offset: start });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let name = &src[start..i];
                let tok = if name == "x" { Tok::X } else { Tok::Ident(name.to_string()) };
                out.push(Token { tok, offset: start });
            }
            _ => {
                return Err(Error::Parse {
                    offset,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

// ----------------------------------------------------------------- parsing

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    src_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|t| t.offset)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let offset = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::Parse { offset, msg: format!("expected {what}") }),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Node::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let base = self.base()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            // Allow a sign on the literal exponent so derivatives round-trip.
            let mut sign = 1.0;
            if let Some(Tok::Minus) = self.peek() {
                self.bump();
                sign = -1.0;
            } else if let Some(Tok::Plus) = self.peek() {
                self.bump();
            }
            let offset = self.offset();
            match self.bump() {
                Some(Tok::Num(e)) => Ok(Node::Pow(Box::new(base), sign * e)),
                _ => Err(Error::Parse { offset, msg: "expected numeric exponent".into() }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Node> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Node::Const(v)),
            Some(Tok::X) => Ok(Node::X),
            Some(Tok::Ident(name)) => {
                if let Some(Tok::LParen) = self.peek() {
                    // Only exp/log are callable.
                    if name != "exp" && name != "log" {
                        return Err(Error::UnknownFunction(name));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "closing `)`")?;
                    Ok(if name == "exp" {
                        Node::Exp(Box::new(arg))
                    } else {
                        Node::Log(Box::new(arg))
                    })
                } else if name == "exp" || name == "log" {
                    Err(Error::Parse {
                        offset: self.offset(),
                        msg: format!("`{name}` requires an argument list"),
                    })
                } else {
                    Ok(Node::Param(name))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Tok::Minus) => {
                // Unary minus; binds tighter than '*' but absorbs a whole
                // factor so `-x^2` negates the square.
                let inner = self.factor()?;
                Ok(match inner {
                    Node::Const(c) => Node::Const(-c),
                    other => Node::Sub(Box::new(Node::Const(0.0)), Box::new(other)),
                })
            }
            _ => Err(Error::Parse { offset, msg: "expected a value".into() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn parses_square() {
        let e = ExprAst::parse("x^2").unwrap();
        assert_eq!(e.root, Node::Pow(Box::new(Node::X), 2.0));
    }

    #[test]
    fn parses_with_free_param() {
        let e = ExprAst::parse("(1/s)*exp(s*(x-1))").unwrap();
        assert_eq!(e.free_params(), vec!["s".to_string()]);
        let v = e.eval(1.0, &params(&[("s", 0.5)])).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn incomplete_call_reports_offset() {
        let err = ExprAst::parse("log(").unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_function() {
        let err = ExprAst::parse("sin(x)").unwrap_err();
        assert!(matches!(err, Error::UnknownFunction(ref n) if n == "sin"));
    }

    #[test]
    fn eval_square_and_domain_errors() {
        let e = ExprAst::parse("x^2").unwrap();
        assert_eq!(e.eval(3.0, &BTreeMap::new()).unwrap(), 9.0);
        let l = ExprAst::parse("log(x-2)").unwrap();
        assert!(matches!(l.eval(1.0, &BTreeMap::new()), Err(Error::Domain(_))));
        let d = ExprAst::parse("1/(x-1)").unwrap();
        assert!(matches!(d.eval(1.0, &BTreeMap::new()), Err(Error::Domain(_))));
    }

    #[test]
    fn unbound_parameter_is_an_error() {
        let e = ExprAst::parse("s*x").unwrap();
        assert!(matches!(
            e.eval(1.0, &BTreeMap::new()),
            Err(Error::UnboundParam(_))
        ));
    }

    #[test]
    fn overflow_saturates_to_infinity() {
        let e = ExprAst::parse("exp(x)").unwrap();
        assert!(e.eval(1e4, &BTreeMap::new()).unwrap().is_infinite());
    }

    #[test]
    fn derivative_of_square_is_two_x() {
        let e = ExprAst::parse("x^2").unwrap();
        assert_eq!(e.diff_x(), ExprAst::parse("2*x").unwrap());
    }

    #[test]
    fn derivative_of_exponential_matches_value() {
        let e = ExprAst::parse("exp(s*(x-1))").unwrap();
        let d = e.diff_x();
        let p = params(&[("s", 1.0)]);
        let at2 = d.eval(2.0, &p).unwrap();
        assert!((at2 - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_parameter_is_zero() {
        let e = ExprAst::parse("s").unwrap();
        assert_eq!(e.diff_x().root, Node::Const(0.0));
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        for src in [
            "x^2",
            "(1/s)*exp(s*(x-1))",
            "x*log(2.718281828459045*x)",
            "(x+1)*(x-2)/(x^2+1)",
            "x^-0.5",
            "1+2*x-3/x^2",
        ] {
            let t = ExprAst::parse(src).unwrap();
            let printed = t.to_string();
            let back = ExprAst::parse(&printed).unwrap();
            assert_eq!(back, t, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn derivatives_round_trip_through_printer() {
        for src in ["x^2", "x^3+2*x", "x*log(x+1)", "exp(x)/x", "(x+1)^-2"] {
            let d = ExprAst::parse(src).unwrap().diff_x();
            let back = ExprAst::parse(&d.to_string()).unwrap();
            assert_eq!(back, d, "derivative of `{src}` did not round trip");
        }
    }

    #[test]
    fn finite_difference_agrees_with_symbolic() {
        let cases = ["x^3", "x*log(x)", "exp(x/2)", "(x^2+1)/(x+2)", "log(x+3)^2"];
        for src in cases {
            let e = ExprAst::parse(src).unwrap();
            let d = e.diff_x();
            let p = BTreeMap::new();
            for &x in &[1.5, 2.0, 4.0] {
                let h = 1e-6 * x;
                let fd = (e.eval(x + h, &p).unwrap() - e.eval(x - h, &p).unwrap()) / (2.0 * h);
                let sym = d.eval(x, &p).unwrap();
                assert!(
                    (fd - sym).abs() <= 1e-6 * (1.0 + sym.abs()),
                    "{src} at {x}: fd {fd} vs sym {sym}"
                );
            }
        }
    }
}
