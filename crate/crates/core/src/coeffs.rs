//! Exact coefficient sequences of the two series representations.
//!
//! Both representations are power-series quotients `Σ base_n zⁿ / Σ dual_n zⁿ`
//! with `dual_0 = 1` and `dual_n = -λ base_n` for `n >= 1`. The quotient
//! coefficients (`derived`) are produced either by the convolution recurrence
//! or as a Hessenberg determinant; the two routes share no code beyond the
//! polynomial arithmetic.
//!
//! * Bessel series: `base = ξ`, `dual = η`, `derived = ζ`, all polynomials in
//!   `λ` and `v = (c‖α‖)²`.
//! * Time series: `base = θ`, `dual = σ`, `derived = γ`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactpoly::BivariatePoly;
use crate::specfun::{double_factorial, pochhammer, rational, Rational};

/// Largest order accepted by [`derived_by_determinant`].
pub const DETERMINANT_MAX_ORDER: usize = 40;

/// Space dimension `m >= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(m: u32) -> Result<Self> {
        if m >= 3 {
            Ok(Dimension(m))
        } else {
            Err(Error::InvalidArgument(format!(
                "dimension must be at least 3 (the planar case is not covered), got {m}"
            )))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Model parameters: dimension, switching rate and speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightParams {
    pub m: Dimension,
    pub lambda: f64,
    pub c: f64,
}

impl FlightParams {
    pub fn new(m: u32, lambda: f64, c: f64) -> Result<Self> {
        let m = Dimension::new(m)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("speed c must be > 0, got {c}")));
        }
        Ok(FlightParams { m, lambda, c })
    }

    pub fn dim(&self) -> usize {
        self.m.get() as usize
    }
}

/// Which series representation a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    /// Bessel-function series: `ξ`, `η`, `ζ`.
    #[serde(rename = "bessel")]
    BesselSeries,
    /// Time-power series: `θ`, `σ`, `γ`.
    #[serde(rename = "time")]
    TimeSeries,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeriesKind::BesselSeries => "bessel",
            SeriesKind::TimeSeries => "time",
        })
    }
}

fn check_lower_parameter(gp: &Rational) -> Result<()> {
    if gp.is_integer() && *gp <= Rational::zero() {
        return Err(Error::InvalidArgument(format!("hypergeometric parameter {gp} is a nonpositive integer")));
    }
    Ok(())
}

/// Coefficient of `zⁿ` in `z F(α, β; γ; b z²)`.
pub fn zf_coefficient(alpha: &Rational, beta: &Rational, gp: &Rational, b: &Rational, n: u32) -> Result<Rational> {
    check_lower_parameter(gp)?;
    if n.is_multiple_of(2) {
        return Ok(Rational::zero());
    }
    let r = n / 2;
    let fact = pochhammer(&Rational::one(), r);
    let num = pochhammer(alpha, r) * pochhammer(beta, r);
    let den = pochhammer(gp, r) * fact;
    Ok(num / den * num_traits::pow(b.clone(), r as usize))
}

/// Coefficient of `zⁿ` in `1 - λ z F(α, β; γ; b z²)`.
pub fn one_minus_lambda_zf_coefficient(
    alpha: &Rational,
    beta: &Rational,
    gp: &Rational,
    b: &Rational,
    lambda: &Rational,
    n: u32,
) -> Result<Rational> {
    if n == 0 {
        check_lower_parameter(gp)?;
        return Ok(Rational::one());
    }
    Ok(-lambda * zf_coefficient(alpha, beta, gp, b, n)?)
}

/// `ξ_n` of the Bessel series: zero for even `n`, and
/// `(2r-1)!!/(2r)!! · (m-2)/(2r+m-2) · vʳ` for `n = 2r+1`.
pub fn xi_bessel(n: u32, m: Dimension) -> BivariatePoly {
    if n.is_multiple_of(2) {
        return BivariatePoly::zero();
    }
    let r = i64::from(n / 2);
    let m = i64::from(m.get());
    let odd = BigInt::from(double_factorial(2 * r - 1).expect("2r-1 >= -1"));
    let even = BigInt::from(double_factorial(2 * r).expect("2r >= 0"));
    let c = Rational::new(odd, even) * rational(m - 2, 2 * r + m - 2);
    BivariatePoly::monomial(c, 0, r as u32)
}

/// `θ_n` of the time series: zero for even `n`, and
/// `(-1)ʳ (1/2)_r / (m/2)_r · vʳ` for `n = 2r+1`.
pub fn theta_time(n: u32, m: Dimension) -> BivariatePoly {
    if n.is_multiple_of(2) {
        return BivariatePoly::zero();
    }
    let r = n / 2;
    let mut c = pochhammer(&rational(1, 2), r) / pochhammer(&rational(i64::from(m.get()), 2), r);
    if r % 2 == 1 {
        c = -c;
    }
    BivariatePoly::monomial(c, 0, r)
}

/// Numerator coefficient `ξ_n` or `θ_n`.
pub fn base(kind: SeriesKind, n: u32, m: Dimension) -> BivariatePoly {
    match kind {
        SeriesKind::BesselSeries => xi_bessel(n, m),
        SeriesKind::TimeSeries => theta_time(n, m),
    }
}

/// Denominator coefficient `η_n` or `σ_n`: 1 at `n = 0`, `-λ · base_n` after.
pub fn dual(kind: SeriesKind, n: u32, m: Dimension) -> BivariatePoly {
    if n == 0 {
        return BivariatePoly::one();
    }
    -(&BivariatePoly::lambda() * &base(kind, n, m))
}

/// Exact coefficient sequences of one representation up to `max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    pub kind: SeriesKind,
    pub m: Dimension,
    pub base: Vec<BivariatePoly>,
    pub dual: Vec<BivariatePoly>,
    pub derived: Vec<BivariatePoly>,
    pub max_order: usize,
}

impl CoefficientTable {
    fn with_derived(kind: SeriesKind, m: Dimension, derived: Vec<BivariatePoly>) -> Self {
        let max_order = derived.len() - 1;
        let base = (0..=max_order as u32).map(|n| base(kind, n, m)).collect();
        let dual = (0..=max_order as u32).map(|n| dual(kind, n, m)).collect();
        CoefficientTable { kind, m, base, dual, derived, max_order }
    }

    /// Numeric values of `derived[0..=max_order]` at the given `λ` and `v`.
    pub fn eval_derived(&self, lambda: f64, v: f64) -> Vec<f64> {
        self.derived.iter().map(|p| p.eval(lambda, v)).collect()
    }
}

/// `derived_n = base_n + λ Σ_{k=1}^{n-1} derived_{n-k} base_k` with
/// `derived_0 = 0`, `derived_1 = 1`.
pub fn derived_by_recurrence(kind: SeriesKind, m: Dimension, order: usize) -> CoefficientTable {
    let order = order.max(1);
    let bases: Vec<BivariatePoly> = (0..=order as u32).map(|n| base(kind, n, m)).collect();
    let mut derived = vec![BivariatePoly::zero(), BivariatePoly::one()];
    for n in 2..=order {
        let mut conv = BivariatePoly::zero();
        for k in (1..n).filter(|k| !bases[*k].is_zero()) {
            conv = &conv + &(&derived[n - k] * &bases[k]);
        }
        derived.push(&bases[n] + &conv.shift(1, 0));
    }
    CoefficientTable::with_derived(kind, m, derived)
}

/// Time-series coefficients from the split recurrences
/// `γ_{2n} = λ Σ_{k<n} γ_{2n-2k-1} θ_{2k+1}` and
/// `γ_{2n+1} = θ_{2n+1} + λ Σ_{k<n} γ_{2n-2k} θ_{2k+1}`.
pub fn gamma_even_odd_split(m: Dimension, order: usize) -> CoefficientTable {
    let order = order.max(1);
    let theta: Vec<BivariatePoly> = (0..=order as u32).map(|n| theta_time(n, m)).collect();
    let mut gamma = vec![BivariatePoly::zero(); order + 1];
    gamma[1] = BivariatePoly::one();
    for idx in 2..=order {
        let n = idx / 2;
        let mut acc = BivariatePoly::zero();
        for k in 0..n {
            let prev = if idx % 2 == 0 { 2 * n - 2 * k - 1 } else { 2 * n - 2 * k };
            acc = &acc + &(&gamma[prev] * &theta[2 * k + 1]);
        }
        let mut g = acc.shift(1, 0);
        if idx % 2 == 1 {
            g = &theta[idx] + &g;
        }
        gamma[idx] = g;
    }
    CoefficientTable::with_derived(SeriesKind::TimeSeries, m, gamma)
}

/// The `n×n` matrix whose signed determinant is `derived_n`:
/// `M[i][1] = base_i` and `M[i][j] = dual_{i-j+1}` for `j >= 2` (1-based),
/// with `dual_k = 0` for `k < 0`.
pub fn quotient_matrix(kind: SeriesKind, m: Dimension, n: usize) -> Vec<Vec<BivariatePoly>> {
    (1..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    if j == 1 {
                        base(kind, i as u32, m)
                    } else if i + 1 >= j {
                        dual(kind, (i + 1 - j) as u32, m)
                    } else {
                        BivariatePoly::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// Determinant of a lower Hessenberg matrix whose superdiagonal is the
/// constant 1, by column elimination on the unit pivots.
///
/// Each step clears the first entry of the top row with the column holding
/// that row's unit pivot, then expands along the top row. No division is
/// needed, so the computation stays inside the polynomial ring.
pub fn unit_hessenberg_determinant(matrix: &[Vec<BivariatePoly>]) -> Result<BivariatePoly> {
    let n = matrix.len();
    if n == 0 {
        return Ok(BivariatePoly::one());
    }
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        for (j, entry) in row.iter().enumerate() {
            if j == i + 1 && *entry != BivariatePoly::one() {
                return Err(Error::InvalidArgument(format!("superdiagonal entry ({i}, {j}) is not 1")));
            }
            if j > i + 1 && !entry.is_zero() {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) above the superdiagonal is nonzero")));
            }
        }
    }

    // first[r] is the working first column; columns s+1.. are untouched.
    let mut first: Vec<BivariatePoly> = matrix.iter().map(|row| row[0].clone()).collect();
    for s in 0..n - 1 {
        let pivot_row_first = first[s].clone();
        if pivot_row_first.is_zero() {
            continue;
        }
        for r in s + 1..n {
            let coupling = &matrix[r][s + 1];
            if !coupling.is_zero() {
                first[r] = &first[r] - &(&pivot_row_first * coupling);
            }
        }
    }
    let last = first.pop().expect("n >= 1");
    // n-1 expansions, each along a unit pivot in position (0, 1).
    Ok(if (n - 1).is_multiple_of(2) { last } else { -last })
}

/// `derived_n` as `(-1)^{n+1} det M` for `2 <= n <= 40`.
pub fn derived_by_determinant(kind: SeriesKind, m: Dimension, n: usize) -> Result<BivariatePoly> {
    if !(2..=DETERMINANT_MAX_ORDER).contains(&n) {
        return Err(Error::OutOfRange(format!(
            "determinant route supports 2 <= n <= {DETERMINANT_MAX_ORDER}, got {n}"
        )));
    }
    let det = unit_hessenberg_determinant(&quotient_matrix(kind, m, n))?;
    Ok(if n % 2 == 1 { det } else { -det })
}

type TableCache = Mutex<HashMap<(SeriesKind, Dimension), Arc<CoefficientTable>>>;

/// Shared recurrence table of at least `order`, built once per
/// `(kind, m)` and grown on demand.
pub fn shared_table(kind: SeriesKind, m: Dimension, order: usize) -> Arc<CoefficientTable> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("coefficient cache poisoned");
    if let Some(t) = guard.get(&(kind, m)) {
        if t.max_order >= order {
            return Arc::clone(t);
        }
    }
    let table = Arc::new(derived_by_recurrence(kind, m, order));
    guard.insert((kind, m), Arc::clone(&table));
    table
}
