//! Exact multivariate polynomials with rational coefficients.
//!
//! Terms are stored in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so the canonical form is unique and iteration order
//! (and therefore printing) is stable.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SymbolicError;

pub type Rational = BigRational;

/// Build a rational from a small numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest `f64` of an exact rational.
pub fn rat_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge numerator or denominator: scale down both by the same power of two.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift as usize).to_f64().unwrap_or(0.0);
            let d = (r.denom() >> shift as usize).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// An exponent vector. Ordered by total degree, then lexicographically with
/// earlier variables dominating.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity].into_boxed_slice())
    }

    pub fn var(arity: usize, index: usize) -> Self {
        let mut e = vec![0; arity];
        e[index] = 1;
        Monomial(e.into_boxed_slice())
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents.into_boxed_slice())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A polynomial in `arity` variables, always kept in canonical form: no zero
/// coefficients and unique monomial keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    arity: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(arity: usize) -> Self {
        Poly { arity, terms: BTreeMap::new() }
    }

    pub fn constant(arity: usize, c: Rational) -> Self {
        let mut p = Poly::zero(arity);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(arity), c);
        }
        p
    }

    pub fn one(arity: usize) -> Self {
        Poly::constant(arity, Rational::one())
    }

    pub fn var(arity: usize, index: usize) -> Self {
        assert!(index < arity, "variable index {index} out of range for arity {arity}");
        let mut p = Poly::zero(arity);
        p.terms.insert(Monomial::var(arity, index), Rational::one());
        p
    }

    /// Collects terms, summing duplicates and dropping zeros.
    pub fn from_terms<I>(arity: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Poly::zero(arity);
        for (m, c) in terms {
            assert_eq!(m.arity(), arity, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.arity))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.arity);
        }
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Product with an explicit cap on the total degree of the result.
    pub fn checked_mul(&self, other: &Poly, cap: u32) -> Result<Poly, SymbolicError> {
        self.check_arity(other)?;
        if let (Some(a), Some(b)) = (self.degree(), other.degree()) {
            if a + b > cap {
                return Err(SymbolicError::DegreeOverflow { degree: a + b, cap });
            }
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let mut acc: std::collections::HashMap<Monomial, Rational> =
            std::collections::HashMap::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.times(mb);
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Vacant(v) => {
                        v.insert(c);
                    }
                    std::collections::hash_map::Entry::Occupied(mut o) => *o.get_mut() += c,
                }
            }
        }
        Poly {
            arity: self.arity,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(self.arity);
        for _ in 0..k {
            out = out.mul_unchecked(self);
        }
        out
    }

    /// Partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Poly {
        assert!(index < self.arity);
        let mut out = Poly::zero(self.arity);
        for (m, c) in &self.terms {
            let e = m.exponents()[index];
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[index] -= 1;
            out.terms
                .insert(Monomial::from_exponents(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.arity);
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            total += t;
        }
        total
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.arity);
        self.terms
            .iter()
            .map(|(m, c)| {
                let mono: f64 = point
                    .iter()
                    .zip(m.exponents())
                    .map(|(x, &e)| x.powi(e as i32))
                    .product();
                rat_to_f64(c) * mono
            })
            .sum()
    }

    /// Coefficients converted to `f64` once, for repeated numeric evaluation.
    pub fn to_numeric(&self) -> NumericPoly {
        NumericPoly {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.exponents().to_vec(), rat_to_f64(c)))
                .collect(),
        }
    }

    /// Embed into a ring with `new_arity >= arity` variables; the new ones
    /// are appended and do not occur.
    pub fn extend_arity(&self, new_arity: usize) -> Poly {
        assert!(new_arity >= self.arity);
        Poly {
            arity: new_arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.exponents().to_vec();
                    e.resize(new_arity, 0);
                    (Monomial::from_exponents(e), c.clone())
                })
                .collect(),
        }
    }

    /// Shift the variables of `self` up by `offset` inside a ring of arity
    /// `new_arity` (variable `i` becomes variable `i + offset`).
    pub fn shift_variables(&self, offset: usize, new_arity: usize) -> Poly {
        assert!(offset + self.arity <= new_arity);
        Poly {
            arity: new_arity,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = vec![0; new_arity];
                    e[offset..offset + self.arity].copy_from_slice(m.exponents());
                    (Monomial::from_exponents(e), c.clone())
                })
                .collect(),
        }
    }

    /// For a polynomial of arity `2n`, substitute variable `n + a` by variable
    /// `a` for every `a < n`, returning a polynomial of arity `n`.
    pub fn fold_halves(&self) -> Poly {
        assert!(self.arity % 2 == 0);
        let n = self.arity / 2;
        Poly::from_terms(
            n,
            self.terms.iter().map(|(m, c)| {
                let e = m.exponents();
                let folded = (0..n).map(|a| e[a] + e[n + a]).collect();
                (Monomial::from_exponents(folded), c.clone())
            }),
        )
    }

    fn check_arity(&self, other: &Poly) -> Result<(), SymbolicError> {
        if self.arity != other.arity {
            return Err(SymbolicError::ArityMismatch { expected: self.arity, found: other.arity });
        }
        Ok(())
    }

    /// Printable view with the given variable names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        assert_eq!(names.len(), self.arity);
        PolyDisplay { poly: self, names: Some(names) }
    }
}

/// Printing adapter; terms appear in descending graded lexicographic order.
pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: Option<&'a [String]>,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(abs.to_string());
            }
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = match self.names {
                    Some(n) => n[i].clone(),
                    None => format!("x{i}"),
                };
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        PolyDisplay { poly: self, names: None }.fmt(f)
    }
}

/// Floating-point copy of a polynomial used on hot numeric paths.
#[derive(Clone, Debug)]
pub struct NumericPoly {
    arity: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl NumericPoly {
    pub fn eval(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.arity);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = *c;
                for (x, &k) in point.iter().zip(e) {
                    for _ in 0..k {
                        t *= x;
                    }
                }
                t
            })
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial sum");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial difference");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.arity, rhs.arity, "arity mismatch in polynomial product");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
