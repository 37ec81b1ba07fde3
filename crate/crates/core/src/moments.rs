//! Mixed moments `μ_q(t) = E Π_j X_j(t)^{q_j}` from the time-power series.
//!
//! `μ_q = (-i)^{|q|} ∂^q H |_{α=0}` and `H = e^{-λt} Σ γ_{n+1} tⁿ/n!`. Every
//! `γ_n` is a polynomial in `v = c²‖α‖²`, and the operator
//! `𝒟 = ∂^{2m}/∂α_1²…∂α_m² |_{α=0}` kills every power of `‖α‖²` except the
//! `m`-th, on which it gives `(2m)!!`. Hence
//! `𝒟 γ_{n+1} = (2m)!! c^{2m} [vᵐ] γ_{n+1}` and the all-twos moment is
//! `(-1)ᵐ e^{-λt} Σ 𝒟γ_{n+1} tⁿ/n!`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::charfn::EXACT_ORDER;
use crate::coeffs::{shared_table, Dimension, SeriesKind};
use crate::error::{Error, Result};
use crate::exactpoly::LambdaPoly;
use crate::specfun::{double_factorial, rational_to_f64, Rational};

/// `∂^{2m}/∂α_1²…∂α_m² (‖α‖²)ⁿ` at `α = 0`: `(2m)!!` when `n = m`, else 0.
pub fn d_operator_monomial(m: u32, n: u32) -> Result<BigUint> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("operator needs m >= 2, got {m}")));
    }
    if n == m {
        double_factorial(2 * i64::from(m))
    } else {
        Ok(BigUint::zero())
    }
}

/// One term of a moment series: the coefficient of `tⁿ/n!` inside the
/// bracket is `Σ_k lambda_poly[k] λᵏ · c^{deg_c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTerm {
    pub n: u32,
    pub lambda_poly: LambdaPoly,
    pub deg_c: u32,
}

/// Truncated mixed-moment series `e^{-λt} Σ_{n<=N} coeff_n(λ, c) tⁿ/n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSeries {
    pub m: Dimension,
    pub q: Vec<u32>,
    /// Nonzero terms in increasing `n`.
    pub terms: Vec<MomentTerm>,
    pub truncation_order: usize,
    /// Set when the dimension lies outside the derived `m = 3` case.
    pub extension: bool,
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

impl MomentSeries {
    /// Coefficient of `tⁿ` (not `tⁿ/n!`) inside the bracket, as a polynomial
    /// in `λ`; the factor `c^{deg_c}` is implied.
    pub fn power_coefficient(&self, n: u32) -> LambdaPoly {
        let Some(term) = self.terms.iter().find(|t| t.n == n) else {
            return LambdaPoly::new();
        };
        let f = Rational::from_integer(factorial(n));
        term.lambda_poly.iter().map(|(k, c)| (*k, c / &f)).collect()
    }

    /// `deg_c` shared by all terms of this series (`2m` for all-twos).
    pub fn deg_c(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.deg_c)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `μ_{(1,…,1)} ≡ 0`: each `γ_n` is even in every `α_j`, so every first-order
/// mixed partial vanishes at the origin.
pub fn mixed_moment_all_ones(m: Dimension) -> MomentSeries {
    MomentSeries {
        m,
        q: vec![1; m.get() as usize],
        terms: Vec::new(),
        truncation_order: usize::MAX,
        extension: m.get() != 3,
    }
}

/// Series of `μ_{(2,…,2)}(t)` through order `tᴺ`, `N <= 60`.
pub fn mixed_moment_all_twos_series(m: Dimension, order: usize) -> Result<MomentSeries> {
    if order > EXACT_ORDER {
        return Err(Error::OutOfRange(format!("moment series order must be <= {EXACT_ORDER}, got {order}")));
    }
    let mm = m.get();
    let table = shared_table(SeriesKind::TimeSeries, m, order + 1);
    let d_value = Rational::from_integer(BigInt::from(d_operator_monomial(mm, mm)?));
    // (-i)^{2m} = (-1)^m
    let sign = if mm.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    let factor = sign * d_value;

    let mut terms = Vec::new();
    for n in 0..=order {
        let slice = table.derived[n + 1].coeff_of_v(mm);
        if slice.is_empty() {
            continue;
        }
        let lambda_poly: LambdaPoly = slice.into_iter().map(|(k, c)| (k, c * &factor)).collect();
        terms.push(MomentTerm { n: n as u32, lambda_poly, deg_c: 2 * mm });
    }
    Ok(MomentSeries { m, q: vec![2; mm as usize], terms, truncation_order: order, extension: mm != 3 })
}

/// `e^{-λt} Σ coeff_n(λ, c) tⁿ/n!`.
pub fn eval_moment_series(series: &MomentSeries, lambda: f64, c: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time t must be > 0, got {t}")));
    }
    let mut sum = 0.0;
    for term in &series.terms {
        let n = term.n as i32;
        // tⁿ/n! accumulated as a product to stay finite
        let power: f64 = (1..=n).map(|k| t / f64::from(k)).product();
        let poly: f64 = term.lambda_poly.iter().map(|(k, coeff)| rational_to_f64(coeff) * lambda.powi(*k as i32)).sum();
        sum += poly * c.powi(term.deg_c as i32) * power;
    }
    Ok((-lambda * t).exp() * sum)
}
