//! Real-valued window expressions: `x^0.5`, `(1-x)^-0.25`, `exp(-x^2/2)`,
//! `indicator(0,0.5)`, `2*indicator`, `x1*x2`, ...
//!
//! `x` is an alias of `x1`. `indicator(a,b)` is `χ_[a,b)` in the first
//! coordinate, `indicator(a1,b1,...,ad,bd)` the indicator of a box, and a bare
//! `indicator` is the indicator of the domain the window lives on (the
//! constant 1 there).

use std::fmt;

use crate::domain_sets::AxisBox;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    /// Coordinate, zero based.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Func(Func, Box<Expr>),
    /// Half-open box indicator over the leading coordinates.
    Indicator(Vec<(f64, f64)>),
    /// Indicator of the ambient domain.
    DomainIndicator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sqrt,
    Abs,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
        }
    }
}

/// Closed interval with possibly infinite ends; `lo > hi` never occurs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    const ALL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    fn hull(values: &[f64]) -> Self {
        if values.iter().any(|v| v.is_nan()) {
            return Self::ALL;
        }
        Self {
            lo: values.iter().copied().fold(f64::INFINITY, f64::min),
            hi: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }
}

fn mul_ends(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr> {
        let tokens = tokenize(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "unexpected `{}` in window expression `{text}`",
                p.tokens[p.pos]
            )));
        }
        Ok(e)
    }

    /// Highest coordinate referenced, plus one (0 for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::DomainIndicator => 0,
            Expr::Var(i) => i + 1,
            Expr::Indicator(b) => b.len(),
            Expr::Neg(a) | Expr::Func(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => {
                let u = a.eval(x);
                // indicators zero out singular factors
                if u == 0.0 {
                    0.0
                } else {
                    u * b.eval(x)
                }
            }
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Func(f, a) => f.apply(a.eval(x)),
            Expr::Indicator(b) => {
                let inside = b
                    .iter()
                    .enumerate()
                    .all(|(i, (lo, hi))| x.get(i).is_some_and(|v| *v >= *lo && *v < *hi));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::DomainIndicator => 1.0,
        }
    }

    /// Enclosure of the values on the closed box by interval arithmetic.
    /// Infinite ends mean the expression may be unbounded there.
    pub fn range_over(&self, b: &AxisBox) -> Interval {
        match self {
            Expr::Const(c) => Interval::point(*c),
            Expr::Var(i) => {
                if *i < b.dim() {
                    Interval {
                        lo: b.lo()[*i],
                        hi: b.hi()[*i],
                    }
                } else {
                    Interval::ALL
                }
            }
            Expr::Neg(a) => {
                let r = a.range_over(b);
                Interval { lo: -r.hi, hi: -r.lo }
            }
            Expr::Add(a, c) => {
                let (p, q) = (a.range_over(b), c.range_over(b));
                Interval::hull(&[p.lo + q.lo, p.hi + q.hi])
            }
            Expr::Sub(a, c) => {
                let (p, q) = (a.range_over(b), c.range_over(b));
                Interval::hull(&[p.lo - q.hi, p.hi - q.lo])
            }
            Expr::Mul(a, c) => {
                let (p, q) = (a.range_over(b), c.range_over(b));
                // a factor that vanishes on the whole box kills the product
                if p == Interval::point(0.0) || q == Interval::point(0.0) {
                    return Interval::point(0.0);
                }
                Interval::hull(&[
                    mul_ends(p.lo, q.lo),
                    mul_ends(p.lo, q.hi),
                    mul_ends(p.hi, q.lo),
                    mul_ends(p.hi, q.hi),
                ])
            }
            Expr::Div(a, c) => {
                let (p, q) = (a.range_over(b), c.range_over(b));
                if q.contains_zero() {
                    if p == Interval::point(0.0) {
                        return Interval::point(0.0);
                    }
                    return Interval::ALL;
                }
                Interval::hull(&[p.lo / q.lo, p.lo / q.hi, p.hi / q.lo, p.hi / q.hi])
            }
            Expr::Pow(a, e) => match **e {
                Expr::Const(k) => pow_range(a.range_over(b), k),
                _ => {
                    let base = a.range_over(b);
                    let ex = e.range_over(b);
                    if base.lo > 0.0 && base.is_bounded() && ex.is_bounded() {
                        Interval::hull(&[
                            base.lo.powf(ex.lo),
                            base.lo.powf(ex.hi),
                            base.hi.powf(ex.lo),
                            base.hi.powf(ex.hi),
                        ])
                    } else {
                        Interval::ALL
                    }
                }
            },
            Expr::Func(f, a) => {
                let r = a.range_over(b);
                match f {
                    Func::Exp => Interval {
                        lo: r.lo.exp(),
                        hi: r.hi.exp(),
                    },
                    Func::Sqrt => {
                        if r.hi < 0.0 {
                            Interval::ALL
                        } else {
                            Interval {
                                lo: r.lo.max(0.0).sqrt(),
                                hi: r.hi.sqrt(),
                            }
                        }
                    }
                    Func::Abs => {
                        let lo = if r.contains_zero() {
                            0.0
                        } else {
                            r.lo.abs().min(r.hi.abs())
                        };
                        Interval {
                            lo,
                            hi: r.lo.abs().max(r.hi.abs()),
                        }
                    }
                    Func::Sin | Func::Cos => {
                        if r.is_bounded() {
                            Interval { lo: -1.0, hi: 1.0 }
                        } else {
                            Interval::ALL
                        }
                    }
                }
            }
            Expr::Indicator(ib) => {
                let mut all_in = true;
                let mut any = true;
                for (i, (lo, hi)) in ib.iter().enumerate() {
                    if i >= b.dim() {
                        return Interval { lo: 0.0, hi: 1.0 };
                    }
                    let (a, c) = (b.lo()[i], b.hi()[i]);
                    if c <= *lo || a >= *hi {
                        any = false;
                    }
                    if a < *lo || c > *hi {
                        all_in = false;
                    }
                }
                match (any, all_in) {
                    (false, _) => Interval::point(0.0),
                    (true, true) => Interval::point(1.0),
                    _ => Interval { lo: 0.0, hi: 1.0 },
                }
            }
            Expr::DomainIndicator => Interval::point(1.0),
        }
    }

    /// A box outside of which the expression vanishes, when one can be read
    /// off the indicator factors.
    pub fn support_box(&self, dim: usize) -> Option<AxisBox> {
        match self {
            Expr::Indicator(b) if b.len() == dim => {
                AxisBox::new(b.iter().map(|p| p.0).collect(), b.iter().map(|p| p.1).collect()).ok()
            }
            Expr::Const(c) if *c == 0.0 => None,
            Expr::Neg(a) => a.support_box(dim),
            Expr::Mul(a, c) => match (a.support_box(dim), c.support_box(dim)) {
                (Some(p), Some(q)) => p.intersect(&q).or(Some(p)),
                (Some(p), None) | (None, Some(p)) => Some(p),
                (None, None) => None,
            },
            Expr::Div(a, _) => a.support_box(dim),
            Expr::Add(a, c) | Expr::Sub(a, c) => {
                let (p, q) = (a.support_box(dim)?, c.support_box(dim)?);
                AxisBox::new(
                    p.lo().iter().zip(q.lo()).map(|(u, v)| u.min(*v)).collect(),
                    p.hi().iter().zip(q.hi()).map(|(u, v)| u.max(*v)).collect(),
                )
                .ok()
            }
            _ => None,
        }
    }

    /// Product `self · other`.
    pub fn times(self, other: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(other))
    }
}

fn pow_range(base: Interval, k: f64) -> Interval {
    if k == 0.0 {
        return Interval::point(1.0);
    }
    let is_int = k.fract() == 0.0;
    if base.lo >= 0.0 {
        if k > 0.0 {
            Interval {
                lo: base.lo.powf(k),
                hi: base.hi.powf(k),
            }
        } else {
            let hi = if base.lo == 0.0 { f64::INFINITY } else { base.lo.powf(k) };
            Interval {
                lo: base.hi.powf(k),
                hi,
            }
        }
    } else if is_int {
        if k < 0.0 && base.contains_zero() {
            return Interval::ALL;
        }
        let ends = [base.lo.powf(k), base.hi.powf(k)];
        let mut r = Interval::hull(&ends);
        if base.contains_zero() && k > 0.0 {
            r.lo = r.lo.min(0.0);
            r.hi = r.hi.max(0.0);
        }
        r
    } else {
        Interval::ALL
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Func(g, a) => write!(f, "{}({a})", g.name()),
            Expr::Indicator(b) => {
                let parts: Vec<String> = b.iter().map(|(l, h)| format!("{l},{h}")).collect();
                write!(f, "indicator({})", parts.join(","))
            }
            Expr::DomainIndicator => write!(f, "indicator"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}` in window expression")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self, c: char) -> bool {
        self.tokens.get(self.pos) == Some(&Token::Op(c))
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_op(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{c}` in window expression")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.peek_op('+') {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.peek_op('-') {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.peek_op('*') {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek_op('/') {
                self.pos += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        if self.peek_op('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_op('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn number_arg(&mut self) -> Result<f64> {
        match self.expr()? {
            e if e.arity() == 0 && !matches!(e, Expr::DomainIndicator) => Ok(e.eval(&[])),
            _ => Err(Error::Parse("indicator bounds must be constants".into())),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("window expression ended early".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Const(v)),
            Token::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Token::Op(c) => Err(Error::Parse(format!("unexpected `{c}` in window expression"))),
            Token::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var(0)),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "indicator" => {
                    if !self.peek_op('(') {
                        return Ok(Expr::DomainIndicator);
                    }
                    self.pos += 1;
                    let mut vals = vec![self.number_arg()?];
                    while self.peek_op(',') {
                        self.pos += 1;
                        vals.push(self.number_arg()?);
                    }
                    self.expect(')')?;
                    if vals.len() % 2 != 0 {
                        return Err(Error::Parse("indicator needs pairs of bounds".into()));
                    }
                    let pairs: Vec<(f64, f64)> = vals.chunks(2).map(|c| (c[0], c[1])).collect();
                    if pairs.iter().any(|(a, b)| !(a < b)) {
                        return Err(Error::Parse("indicator bounds must satisfy a < b".into()));
                    }
                    Ok(Expr::Indicator(pairs))
                }
                "exp" | "sqrt" | "abs" | "sin" | "cos" => {
                    let f = match name.as_str() {
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        "sin" => Func::Sin,
                        _ => Func::Cos,
                    };
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::Func(f, Box::new(e)))
                }
                other => {
                    if let Some(idx) = other.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                        if idx >= 1 {
                            return Ok(Expr::Var(idx - 1));
                        }
                    }
                    Err(Error::Parse(format!("unknown name `{other}` in window expression")))
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: &[f64]) -> f64 {
        Expr::parse(s).unwrap().eval(x)
    }

    #[test]
    fn parses_and_evaluates() {
        assert_eq!(ev("x^1.0", &[0.3]), 0.3);
        assert!((ev("(1-x)^0.5", &[0.75]) - 0.5).abs() < 1e-15);
        assert!((ev("exp(-x^2/2)", &[1.0]) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(ev("2*indicator", &[7.0]), 2.0);
        assert_eq!(ev("indicator(0,0.5)", &[0.5]), 0.0);
        assert_eq!(ev("indicator(0,0.5)", &[0.0]), 1.0);
        assert_eq!(ev("x1*x2 + 1e-1", &[2.0, 3.0]), 6.1);
        assert_eq!(ev("-x^2", &[3.0]), -9.0);
        assert_eq!(ev("2^3^2", &[]), 512.0);
        assert_eq!(ev("x^-0.5", &[4.0]), 0.5);
        assert!((ev("sin(pi/2) + cos(0) + abs(-1) + sqrt(4)", &[]) - 5.0).abs() < 1e-15);
        assert_eq!(ev("indicator(0,1,0,2)", &[0.5, 1.5]), 1.0);
        assert_eq!(ev("indicator(0,1,0,2)", &[0.5, 2.5]), 0.0);
    }

    #[test]
    fn parse_errors() {
        for bad in ["x +", "foo(x)", "indicator(1,0)", "indicator(0)", "(x", "x $ 2", "x0", "indicator(x,1)"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn boundedness_by_interval_arithmetic() {
        let unit = AxisBox::interval(0.0, 1.0).unwrap();
        assert!(Expr::parse("x").unwrap().range_over(&unit).is_bounded());
        assert!(Expr::parse("1-x").unwrap().range_over(&unit).is_bounded());
        assert!(!Expr::parse("x^(-1/4)").unwrap().range_over(&unit).is_bounded());
        assert!(!Expr::parse("(1-x)^-0.25").unwrap().range_over(&unit).is_bounded());
        assert!(!Expr::parse("1/x").unwrap().range_over(&unit).is_bounded());
        assert!(Expr::parse("x^(-1/4)*indicator(0.5,1)").unwrap().range_over(&AxisBox::interval(0.5, 1.0).unwrap()).is_bounded());
        let r = Expr::parse("x*(1-x)").unwrap().range_over(&unit);
        assert!(r.lo <= 0.0 && r.hi >= 0.25);
        assert!(Expr::parse("sqrt(x)").unwrap().range_over(&unit).is_bounded());
    }

    #[test]
    fn support_boxes() {
        let s = Expr::parse("x*indicator(0,2)").unwrap().support_box(1).unwrap();
        assert_eq!((s.lo()[0], s.hi()[0]), (0.0, 2.0));
        assert!(Expr::parse("exp(-x^2)").unwrap().support_box(1).is_none());
        assert!(Expr::parse("indicator").unwrap().support_box(1).is_none());
        let s = Expr::parse("indicator(0,1)+indicator(2,3)").unwrap().support_box(1).unwrap();
        assert_eq!((s.lo()[0], s.hi()[0]), (0.0, 3.0));
    }

    #[test]
    fn display_round_trips() {
        for s in ["x^0.5", "(1-x)^-0.25", "exp(-x^2/2)", "indicator(0,0.5)", "2*indicator", "x1*x2"] {
            let e = Expr::parse(s).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            for x in [0.1, 0.4, 0.9] {
                let a = e.eval(&[x, 0.3]);
                let b = again.eval(&[x, 0.3]);
                assert!(a == b || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
