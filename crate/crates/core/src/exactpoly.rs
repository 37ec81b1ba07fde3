//! Exact bivariate polynomials over the rationals in `λ` (switching rate) and
//! `v = (c‖α‖)²`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::specfun::{rational_to_f64, Rational};

/// Exponent pair `(deg_λ, deg_v)` of a monomial.
pub type Monomial = (u32, u32);

/// Sparse polynomial in `λ` and `v`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BivariatePoly {
    terms: BTreeMap<Monomial, Rational>,
}

/// Univariate polynomial in `λ`, keyed by degree.
pub type LambdaPoly = BTreeMap<u32, Rational>;

impl BivariatePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    /// `coeff * λ^dl * v^dv`.
    pub fn monomial(coeff: Rational, dl: u32, dv: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert((dl, dv), coeff);
        }
        Self { terms }
    }

    /// The polynomial `λ`.
    pub fn lambda() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    /// The polynomial `v`.
    pub fn v() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    /// Builds a polynomial from `(deg_λ, deg_v, coefficient)` triples, merging
    /// repeated monomials.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, Rational)>,
    {
        let mut p = Self::zero();
        for (dl, dv, c) in terms {
            p.add_term((dl, dv), c);
        }
        p
    }

    fn add_term(&mut self, key: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, dl: u32, dv: u32) -> Rational {
        self.terms.get(&(dl, dv)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero monomials in ascending `(deg_λ, deg_v)` order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &Rational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `λ`, `None` for the zero polynomial.
    pub fn deg_lambda(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Highest power of `v`, `None` for the zero polynomial.
    pub fn deg_v(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.1).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(k, x)| (*k, x * c)).collect() }
    }

    /// Multiplies by `λ^dl v^dv`.
    pub fn shift(&self, dl: u32, dv: u32) -> Self {
        Self { terms: self.terms.iter().map(|((a, b), x)| ((a + dl, b + dv), x.clone())).collect() }
    }

    /// Numeric value at `λ = lambda`, `v = v`, Horner in `v` then in `λ`.
    pub fn eval(&self, lambda: f64, v: f64) -> f64 {
        let Some(max_dv) = self.deg_v() else {
            return 0.0;
        };
        let mut by_v: Vec<Vec<(u32, f64)>> = vec![Vec::new(); max_dv as usize + 1];
        for (&(dl, dv), c) in &self.terms {
            by_v[dv as usize].push((dl, rational_to_f64(c)));
        }
        let horner_lambda = |coeffs: &[(u32, f64)]| -> f64 {
            let Some(top) = coeffs.iter().map(|c| c.0).max() else {
                return 0.0;
            };
            let mut dense = vec![0.0; top as usize + 1];
            for &(d, c) in coeffs {
                dense[d as usize] += c;
            }
            dense.iter().rev().fold(0.0, |acc, &c| acc * lambda + c)
        };
        by_v.iter().rev().fold(0.0, |acc, row| acc * v + horner_lambda(row))
    }

    /// All monomials with `deg_v = k`, as a polynomial in `λ`.
    pub fn coeff_of_v(&self, k: u32) -> LambdaPoly {
        self.terms.iter().filter(|((_, dv), _)| *dv == k).map(|((dl, _), c)| (*dl, c.clone())).collect()
    }

    /// Serializable monomial list, ascending `(deg_λ, deg_v)`.
    pub fn to_records(&self) -> Vec<MonomialRecord> {
        self.terms
            .iter()
            .map(|(&(dl, dv), c)| MonomialRecord { dl, dv, num: c.numer().to_string(), den: c.denom().to_string() })
            .collect()
    }

    pub fn from_records(records: &[MonomialRecord]) -> Option<Self> {
        let mut p = Self::zero();
        for r in records {
            let num = r.num.parse().ok()?;
            let den: num_bigint::BigInt = r.den.parse().ok()?;
            if den.is_zero() {
                return None;
            }
            p.add_term((r.dl, r.dv), Rational::new(num, den));
        }
        Some(p)
    }
}

/// One monomial of a polynomial in wire form. Numerator and denominator are
/// decimal strings so arbitrarily large values survive JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialRecord {
    pub dl: u32,
    pub dv: u32,
    pub num: String,
    pub den: String,
}

impl Add for &BivariatePoly {
    type Output = BivariatePoly;

    fn add(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, c.clone());
        }
        out
    }
}

impl Add for BivariatePoly {
    type Output = BivariatePoly;

    fn add(self, rhs: BivariatePoly) -> BivariatePoly {
        &self + &rhs
    }
}

impl Neg for &BivariatePoly {
    type Output = BivariatePoly;

    fn neg(self) -> BivariatePoly {
        BivariatePoly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }
}

impl Neg for BivariatePoly {
    type Output = BivariatePoly;

    fn neg(self) -> BivariatePoly {
        -&self
    }
}

impl Sub for &BivariatePoly {
    type Output = BivariatePoly;

    fn sub(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(*k, -c);
        }
        out
    }
}

impl Sub for BivariatePoly {
    type Output = BivariatePoly;

    fn sub(self, rhs: BivariatePoly) -> BivariatePoly {
        &self - &rhs
    }
}

impl Mul for &BivariatePoly {
    type Output = BivariatePoly;

    fn mul(self, rhs: &BivariatePoly) -> BivariatePoly {
        let mut out = BivariatePoly::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for BivariatePoly {
    type Output = BivariatePoly;

    fn mul(self, rhs: BivariatePoly) -> BivariatePoly {
        &self * &rhs
    }
}

/// Canonical rendering: monomials ordered by `deg_λ` descending then `deg_v`
/// ascending, `l` for `λ`, e.g. `l^7 - 2*l^5*v + 22/15*l^3*v^2 - 44/105*l*v^3`.
impl fmt::Display for BivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (i, key) in keys.into_iter().enumerate() {
            let c = &self.terms[key];
            let negative = c.is_negative();
            let mag = c.abs();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (key.0 == 0 && key.1 == 0) {
                factors.push(mag.to_string());
            }
            match key.0 {
                0 => {}
                1 => factors.push("l".into()),
                d => factors.push(format!("l^{d}")),
            }
            match key.1 {
                0 => {}
                1 => factors.push("v".into()),
                d => factors.push(format!("v^{d}")),
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}
