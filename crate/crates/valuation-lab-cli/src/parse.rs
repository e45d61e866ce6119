//! Polynomial text grammar shared by every verb: integers and rationals,
//! identifiers, +, -, *, ^ with nonnegative integer exponents, and
//! parentheses. Whitespace is insignificant. There is no division operator;
//! a slash is only read as part of a rational literal. Parse errors carry
//! the byte offset of the first offending character.

use num_bigint::BigInt;
use valuation_lab::error::{Error, Result};
use valuation_lab::exact::field::{Field, Rationals};
use valuation_lab::exact::poly::Poly;
use valuation_lab::exact::rat::{fmt_rat, Rat};
use valuation_lab::tower::{KElem, TowerField};

enum Node {
    Num(Rat),
    Var { name: String, offset: usize },
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Pow(Box<Node>, usize),
}

const EXPONENT_CAP: usize = 4096;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::ParseError {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            node = Node::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Node> {
        let mut node = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            node = Node::Pow(Box::new(node), self.exponent()?);
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(parse_err(self.pos, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let node = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(parse_err(self.pos, "expected ')'"));
                }
                self.pos += 1;
                Ok(node)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.factor()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(parse_err(
                self.pos,
                "expected a number, a variable, or '('",
            )),
        }
    }

    fn digits(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(parse_err(start, "expected digits"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("digits are ascii");
        Ok(text.parse().expect("digit run parses"))
    }

    fn number(&mut self) -> Result<Node> {
        let numer = self.digits()?;
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den_at = self.pos;
            let denom = self.digits()?;
            if denom == BigInt::from(0) {
                return Err(parse_err(den_at, "zero denominator"));
            }
            return Ok(Node::Num(Rat::new(numer, denom)));
        }
        Ok(Node::Num(Rat::from_integer(numer)))
    }

    fn ident(&mut self) -> Result<Node> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .expect("identifiers are ascii")
            .to_string();
        Ok(Node::Var {
            name,
            offset: start,
        })
    }

    fn exponent(&mut self) -> Result<usize> {
        self.skip_ws();
        let at = self.pos;
        if self.peek().map_or(true, |c| !c.is_ascii_digit()) {
            return Err(parse_err(self.pos, "expected an integer exponent"));
        }
        let e = self.digits()?;
        let e: usize = e
            .try_into()
            .map_err(|_| parse_err(at, "exponent too large"))?;
        if e > EXPONENT_CAP {
            return Err(parse_err(at, "exponent too large"));
        }
        Ok(e)
    }
}

fn parse_tree(src: &str) -> Result<Node> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let node = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(parse_err(p.pos, "unexpected trailing input"));
    }
    Ok(node)
}

/// A field whose elements can absorb a rational literal.
trait LiteralField: Field {
    fn elem_from_rat(&self, r: &Rat) -> Self::Elem;
}

impl LiteralField for Rationals {
    fn elem_from_rat(&self, r: &Rat) -> Rat {
        r.clone()
    }
}

impl LiteralField for TowerField {
    fn elem_from_rat(&self, r: &Rat) -> KElem {
        self.from_rat(r.clone())
    }
}

fn eval<F: LiteralField>(
    f: &F,
    node: &Node,
    resolve: &dyn Fn(&str) -> Option<Poly<F>>,
) -> Result<Poly<F>> {
    match node {
        Node::Num(r) => Ok(Poly::constant(f, f.elem_from_rat(r))),
        Node::Var { name, offset } => resolve(name)
            .ok_or_else(|| parse_err(*offset, format!("unknown variable {name:?}"))),
        Node::Neg(a) => Ok(eval(f, a, resolve)?.neg(f)),
        Node::Add(a, b) => Ok(Poly::add(f, &eval(f, a, resolve)?, &eval(f, b, resolve)?)),
        Node::Sub(a, b) => Ok(Poly::sub(f, &eval(f, a, resolve)?, &eval(f, b, resolve)?)),
        Node::Mul(a, b) => Ok(Poly::mul(f, &eval(f, a, resolve)?, &eval(f, b, resolve)?)),
        Node::Pow(a, e) => {
            let base = eval(f, a, resolve)?;
            if base.degree().saturating_mul(*e) > EXPONENT_CAP {
                return Err(Error::DegreeBound(format!(
                    "expanded degree exceeds {EXPONENT_CAP}"
                )));
            }
            Ok(Poly::pow(f, &base, *e))
        }
    }
}

fn x_poly<F: LiteralField>(f: &F) -> Poly<F> {
    Poly::from_coeffs(vec![f.zero(), f.one()])
}

/// Parse a univariate polynomial over Q in the variable x.
pub fn parse_qpoly(src: &str) -> Result<Poly<Rationals>> {
    let node = parse_tree(src)?;
    let f = Rationals;
    eval(&f, &node, &|name| {
        (name == "x").then(|| x_poly(&f))
    })
}

/// Parse a polynomial over the tower in the variable x; coefficients may
/// use the tower's generator names.
pub fn parse_tower_poly(k: &TowerField, src: &str) -> Result<Poly<TowerField>> {
    let node = parse_tree(src)?;
    eval(k, &node, &|name| {
        if name == "x" {
            return Some(x_poly(k));
        }
        gen_poly(k, name)
    })
}

/// Parse an element of the tower: an expression in the generator names.
pub fn parse_elem(k: &TowerField, src: &str) -> Result<KElem> {
    let node = parse_tree(src)?;
    let p = eval(k, &node, &|name| gen_poly(k, name))?;
    Ok(p.coeff(k, 0))
}

fn gen_poly(k: &TowerField, name: &str) -> Option<Poly<TowerField>> {
    k.tower()
        .levels
        .iter()
        .position(|l| l.name == name)
        // gen_at levels count from 1.
        .map(|i| Poly::constant(k, k.gen_at(i + 1)))
}

/// Canonical printer over Q: highest degree first, and the output parses
/// back to the same polynomial.
pub fn print_qpoly(fp: &Poly<Rationals>) -> String {
    if fp.is_zero() {
        return "0".to_string();
    }
    let f = Rationals;
    let mut out = String::new();
    for i in (0..=fp.degree()).rev() {
        let c = fp.coeff(&f, i);
        if c == Rat::from_integer(0.into()) {
            continue;
        }
        let neg = c < Rat::from_integer(0.into());
        let abs = fmt_rat(&if neg { -c } else { c });
        push_term(&mut out, neg, &term_body(&abs, i));
    }
    if out.is_empty() {
        // Unnormalized input: trailing zero coefficients hid a zero poly.
        out.push('0');
    }
    out
}

/// Canonical printer over a tower. Composite coefficients are wrapped in
/// parentheses; the result re-parses over the same tower.
pub fn print_tower_poly(k: &TowerField, fp: &Poly<TowerField>) -> String {
    if fp.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for i in (0..=fp.degree()).rev() {
        let c = fp.coeff(k, i);
        if k.is_zero(&c) {
            continue;
        }
        let s = k.format_elem(&c);
        let (neg, abs) = if simple_coeff(&s) && s.starts_with('-') {
            (true, s[1..].to_string())
        } else if simple_coeff(&s) {
            (false, s)
        } else {
            (false, format!("({s})"))
        };
        push_term(&mut out, neg, &term_body(&abs, i));
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// A coefficient string that can stand alone next to '*': no interior sums
/// and no spaces (a leading '-' is allowed).
fn simple_coeff(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.contains(['+', '-', ' ', '(', ')'])
}

fn term_body(abs: &str, degree: usize) -> String {
    match degree {
        0 => abs.to_string(),
        _ => {
            let x = if degree == 1 {
                "x".to_string()
            } else {
                format!("x^{degree}")
            };
            if abs == "1" {
                x
            } else {
                format!("{abs}*{x}")
            }
        }
    }
}

fn push_term(out: &mut String, neg: bool, body: &str) {
    if out.is_empty() {
        if neg {
            out.push('-');
        }
        out.push_str(body);
    } else {
        out.push_str(if neg { " - " } else { " + " });
        out.push_str(body);
    }
}
