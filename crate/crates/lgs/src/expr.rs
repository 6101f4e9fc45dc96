//! Expressions over the generators, e.g. `S(a)^* S(b) + 1/2 * E(1,1)`.
//!
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := ['-'] rational ['*' factor+] | rational factor+ | factor+
//! factor := 'S(' word ')' ['^*' | '*'] | 'E(' level ',' index ')' | '1'
//! ```
//!
//! A `*` written directly after `S(..)` is the adjoint; a `*` with whitespace
//! before it is multiplication. Vertex indices in `E(l,i)` are 1-based.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{Algebra, Element, Gen};
use crate::error::{Error, Result};
use crate::fine::Coef;
use crate::system::Lgs;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    S(String),
    SStar(String),
    /// Level and 1-based index.
    E(usize, usize),
    One,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coef: Coef,
    pub factors: Vec<(Factor, usize, usize)>,
}

struct Cursor<'a> {
    source: &'a str,
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { source_name: self.source.into(), line: self.line, col: self.col, msg: msg.into() }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Skips whitespace; reports whether any was skipped.
    fn ws(&mut self) -> bool {
        let start = self.pos;
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
        self.pos > start
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn digits(&mut self) -> Result<String> {
        let mut s = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        if s.is_empty() {
            Err(self.err("expected a number"))
        } else {
            Ok(s)
        }
    }

    fn number(&mut self) -> Result<usize> {
        let (line, col) = (self.line, self.col);
        let d = self.digits()?;
        d.parse()
            .map_err(|_| Error::Parse { source_name: self.source.into(), line, col, msg: format!("number {d} too large") })
    }

    fn rational(&mut self) -> Result<Coef> {
        let n: BigInt = self.digits()?.parse().unwrap();
        if self.peek() == Some('/') {
            self.bump();
            let (line, col) = (self.line, self.col);
            let d: BigInt = self.digits()?.parse().unwrap();
            if d.is_zero() {
                return Err(Error::Parse { source_name: self.source.into(), line, col, msg: "zero denominator".into() });
            }
            return Ok(Coef::new(n, d));
        }
        Ok(Coef::from_integer(n))
    }

    fn at_factor(&self) -> bool {
        matches!(self.peek(), Some('S' | 'E' | '1'))
    }

    fn factor(&mut self) -> Result<(Factor, usize, usize)> {
        let (line, col) = (self.line, self.col);
        match self.peek() {
            Some('S') => {
                self.bump();
                self.expect('(')?;
                let mut w = String::new();
                while let Some(c) = self.peek().filter(|&c| c != ')' && c != '\n') {
                    w.push(c);
                    self.bump();
                }
                self.expect(')')?;
                let f = if self.peek() == Some('^') {
                    self.bump();
                    self.expect('*')?;
                    Factor::SStar(w)
                } else if self.peek() == Some('*') {
                    self.bump();
                    Factor::SStar(w)
                } else {
                    Factor::S(w)
                };
                Ok((f, line, col))
            }
            Some('E') => {
                self.bump();
                self.expect('(')?;
                self.ws();
                let l = self.number()?;
                self.ws();
                self.expect(',')?;
                self.ws();
                let i = self.number()?;
                self.ws();
                self.expect(')')?;
                Ok((Factor::E(l, i), line, col))
            }
            Some('1') => {
                self.bump();
                Ok((Factor::One, line, col))
            }
            _ => Err(self.err("expected S(..), E(l,i) or 1")),
        }
    }

    fn factors(&mut self, out: &mut Vec<(Factor, usize, usize)>) -> Result<()> {
        loop {
            out.push(self.factor()?);
            let spaced = self.ws();
            if spaced && self.peek() == Some('*') {
                self.bump();
                self.ws();
                if !self.at_factor() {
                    return Err(self.err("expected a factor after `*`"));
                }
                continue;
            }
            if !self.at_factor() {
                return Ok(());
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut t = Term { coef: Coef::one(), factors: Vec::new() };
        self.ws();
        if self.peek() == Some('-') {
            self.bump();
            self.ws();
            t.coef = -t.coef;
        }
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            t.coef *= self.rational()?;
            self.ws();
            if self.peek() == Some('*') {
                self.bump();
                self.ws();
                self.factors(&mut t.factors)?;
            } else if self.at_factor() {
                self.factors(&mut t.factors)?;
            }
        } else {
            self.factors(&mut t.factors)?;
        }
        Ok(t)
    }
}

/// Parses an expression into signed terms without evaluating it.
pub fn parse_terms(source: &str, text: &str) -> Result<Vec<Term>> {
    let mut c = Cursor { source, chars: text.chars().collect(), pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    c.ws();
    let mut sign = Coef::one();
    if c.peek() == Some('-') {
        c.bump();
        sign = -sign;
    }
    loop {
        let mut t = c.term()?;
        t.coef *= &sign;
        out.push(t);
        c.ws();
        match c.peek() {
            None => return Ok(out),
            Some('+') => sign = Coef::one(),
            Some('-') => sign = -Coef::one(),
            Some(ch) => return Err(c.err(format!("unexpected `{ch}`"))),
        }
        c.bump();
    }
}

/// Parses and evaluates an expression in the algebra of `s`.
pub fn parse_expression(s: &Lgs, text: &str) -> Result<Element> {
    evaluate(s, "<expr>", text)
}

pub fn evaluate(s: &Lgs, source: &str, text: &str) -> Result<Element> {
    let alg = Algebra::new(s)?;
    let terms = parse_terms(source, text)?;
    let at = |line: usize, col: usize, msg: String| Error::Parse { source_name: source.into(), line, col, msg };
    let mut total = Element::zero();
    for t in terms {
        let mut gens = Vec::new();
        for (f, line, col) in &t.factors {
            match f {
                Factor::S(w) | Factor::SStar(w) => {
                    let word = s.alphabet().parse_word(w).map_err(|e| at(*line, *col, e.to_string()))?;
                    if matches!(f, Factor::S(_)) {
                        gens.extend(word.iter().map(|&a| Gen::S(a)));
                    } else {
                        gens.extend(word.iter().rev().map(|&a| Gen::SStar(a)));
                    }
                }
                Factor::E(l, i) => {
                    if *l > s.depth() {
                        return Err(at(*line, *col, format!("level {l} exceeds depth {}", s.depth())));
                    }
                    if *i == 0 || *i > s.size(*l) {
                        return Err(at(*line, *col, format!("E({l},{i}): index out of range 1..={}", s.size(*l))));
                    }
                    gens.push(Gen::E(*l, i - 1));
                }
                Factor::One => {}
            }
        }
        let x = alg.word(&gens)?;
        total = alg.add(&total, &alg.scale(&x, &t.coef))?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn adjoint_spellings_agree() {
        let s = examples::full2(3);
        let alg = Algebra::new(&s).unwrap();
        let a = parse_expression(&s, "S(a)^* S(a)").unwrap();
        let b = parse_expression(&s, "S(a)* S(a)").unwrap();
        let c = parse_expression(&s, "S(a)*S(a)").unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(alg.equal(&a, &alg.one().unwrap()).unwrap());
    }

    #[test]
    fn spaced_star_multiplies() {
        let s = examples::full2(3);
        let x = parse_expression(&s, "S(a) * S(b)").unwrap();
        let y = parse_expression(&s, "S(ab)").unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn cuntz_expression_vanishes() {
        let s = examples::full2(3);
        let x = parse_expression(&s, "S(a) E(1,1) S(a)^* S(b) E(1,1) S(b)^*").unwrap();
        assert!(x.is_zero());
        let alg = Algebra::new(&s).unwrap();
        assert_eq!(alg.display(&x), "0");
    }

    #[test]
    fn coefficients_and_signs() {
        let s = examples::full2(3);
        let x = parse_expression(&s, "1/2 * S(a) S(a)^* + 1/2 S(a)S(a)^* - E(2,1) + 1").unwrap();
        let alg = Algebra::new(&s).unwrap();
        let y = parse_expression(&s, "S(a)S(a)^*").unwrap();
        assert!(alg.equal(&x, &y).unwrap());
        assert!(parse_expression(&s, "-1 + 1").unwrap().is_zero());
        assert!(parse_expression(&s, "3").unwrap() == alg.scale(&alg.one().unwrap(), &Coef::from_integer(3.into())));
    }

    #[test]
    fn errors_have_positions() {
        let s = examples::full2(3);
        let e = parse_expression(&s, "S(a) + E(1,3)").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, col: 8, .. }), "{e}");
        let e = parse_expression(&s, "S(a) + E(1,0)").unwrap_err();
        assert!(matches!(e, Error::Parse { col: 8, .. }));
        let e = parse_expression(&s, "S(c)").unwrap_err();
        assert!(matches!(e, Error::Parse { col: 1, .. }));
        let e = parse_expression(&s, "S(a) ?").unwrap_err();
        assert!(matches!(e, Error::Parse { col: 6, .. }));
        let e = parse_expression(&s, "1/0").unwrap_err();
        assert!(matches!(e, Error::Parse { col: 3, .. }));
        let e = parse_expression(&s, "E(9,1)").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }));
    }

    #[test]
    fn display_reparses() {
        for s in examples::reference_systems(4) {
            let alg = Algebra::new(&s).unwrap();
            for b in crate::groupoid::universe(&s, 2).unwrap().iter().take(40) {
                let x = alg.scale(&alg.monomial(b).unwrap(), &Coef::new(3.into(), 2.into()));
                let x = alg.add(&x, &alg.one().unwrap()).unwrap();
                let text = alg.display(&x).replace('\n', " + ");
                let y = parse_expression(&s, &text).unwrap();
                assert!(alg.equal(&x, &y).unwrap(), "{}: {text}", s.name());
            }
        }
    }
}
