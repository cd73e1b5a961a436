//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | identifier | '(' expr ')'
//! ```
//! Decimal literals are read exactly (`0.25` is `1/4`). Division is only
//! allowed by nonzero constants.

use num_bigint::BigInt;
use num_traits::One;

use super::poly::{Poly, Rational};
use super::{SymbolicError, DEFAULT_DEGREE_CAP};

/// Parse `input` as a polynomial in the variables `names` (variable `i` is
/// `names[i]`).
pub fn parse_poly<S: AsRef<str>>(input: &str, names: &[S]) -> Result<Poly, SymbolicError> {
    let names: Vec<&str> = names.iter().map(AsRef::as_ref).collect();
    let mut p = Parser { input, bytes: input.as_bytes(), pos: 0, names: &names };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

/// Parse a constant rational expression such as `1/2`, `-3`, `0.125` or `(1+1)/3`.
pub fn parse_rational(input: &str) -> Result<Rational, SymbolicError> {
    let p = parse_poly::<&str>(input, &[])?;
    Ok(p.constant_term())
}

struct Parser<'a> {
    input: &'a str,
    bytes: &'a [u8],
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn error(&self, message: &str) -> SymbolicError {
        SymbolicError::Parse { input: self.input.to_string(), pos: self.pos, message: message.to_string() }
    }

    fn arity(&self) -> usize {
        self.names.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Poly, SymbolicError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Poly, SymbolicError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.checked_mul(&rhs, DEFAULT_DEGREE_CAP)?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    if !rhs.is_constant() || rhs.is_zero() {
                        self.pos = at;
                        return Err(self.error("division is only allowed by a nonzero constant"));
                    }
                    acc = acc.scale(&(Rational::one() / rhs.constant_term()));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Poly, SymbolicError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly, SymbolicError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected a nonnegative integer exponent"));
            }
            let k: u32 = self.input[start..self.pos]
                .parse()
                .map_err(|_| self.error("exponent out of range"))?;
            let d = base.degree().unwrap_or(0);
            if d.saturating_mul(k) > DEFAULT_DEGREE_CAP {
                return Err(SymbolicError::DegreeOverflow { degree: d.saturating_mul(k), cap: DEFAULT_DEGREE_CAP });
            }
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly, SymbolicError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Poly, SymbolicError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.input[start..self.pos];
        let mut frac_part = "";
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            let fs = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            frac_part = &self.input[fs..self.pos];
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(self.error("malformed number"));
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| self.error("malformed number"))?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        Ok(Poly::constant(self.arity(), Rational::new(numer, denom)))
    }

    fn identifier(&mut self) -> Result<Poly, SymbolicError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.input[start..self.pos];
        match self.names.iter().position(|n| *n == name) {
            Some(i) => Ok(Poly::var(self.arity(), i)),
            None => Err(SymbolicError::UnknownVariable(name.to_string())),
        }
    }
}

impl Poly {
    /// Parses with [`parse_poly`].
    pub fn parse<S: AsRef<str>>(input: &str, names: &[S]) -> Result<Poly, SymbolicError> {
        parse_poly(input, names)
    }
}
