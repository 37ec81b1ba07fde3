//! Special-function kernel: Pochhammer symbols, double factorials, Gamma at
//! half-integers, the Gauss hypergeometric series and Bessel functions of the
//! first kind of nonnegative real order.
//!
//! Everything here is a pure function of its arguments.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// Default absolute tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Term cap for the Gauss hypergeometric series.
pub const HYP2F1_MAX_TERMS: usize = 10_000;

/// Term cap for the ascending Bessel series.
pub const BESSEL_MAX_TERMS: usize = 500;

/// Largest argument accepted by [`bessel_j`].
pub const BESSEL_MAX_ARG: f64 = 50.0;

/// Largest order accepted by [`bessel_j`].
pub const BESSEL_MAX_ORDER: f64 = 120.0;

/// Exact rational number with arbitrary-precision parts, always in lowest
/// terms with a positive denominator.
pub type Rational = BigRational;

/// Builds the rational `num/den`.
pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rising factorial `a (a+1) ... (a+n-1)`, exact.
pub fn pochhammer(a: &Rational, n: u32) -> Rational {
    let mut acc = Rational::one();
    let mut factor = a.clone();
    for _ in 0..n {
        acc *= &factor;
        factor += Rational::one();
    }
    acc
}

/// `n!!`, the product of the integers of the same parity as `n` down to 1
/// or 2, with `0!! = (-1)!! = 1`.
pub fn double_factorial(n: i64) -> Result<BigUint> {
    if n < -1 {
        return Err(Error::InvalidArgument(format!("double factorial needs n >= -1, got {n}")));
    }
    let mut acc = BigUint::one();
    let mut k = n;
    while k > 1 {
        acc *= BigUint::from(k as u64);
        k -= 2;
    }
    Ok(acc)
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// Exact form of `Γ(k2/2)` as `rational * sqrt(pi)^e` with `e` either 0 or 1.
///
/// Returns the rational part and whether the `sqrt(pi)` factor is present.
pub fn gamma_half_integer_exact(k2: u32) -> (Rational, bool) {
    assert!(k2 >= 1, "gamma_half_integer needs k2 >= 1");
    if k2.is_multiple_of(2) {
        let n = u64::from(k2 / 2 - 1);
        (Rational::from_integer(BigInt::from(factorial(n))), false)
    } else {
        // Γ(k + 1/2) = (2k-1)!! sqrt(pi) / 2^k
        let k = i64::from(k2 / 2);
        let num = double_factorial(2 * k - 1).expect("2k-1 >= -1");
        let den = BigUint::one() << (k as usize);
        (Rational::new(BigInt::from(num), BigInt::from(den)), true)
    }
}

/// `Γ(k2/2)` for a positive integer `k2`, computed exactly and converted to
/// floating point once.
pub fn gamma_half_integer(k2: u32) -> f64 {
    let (r, has_sqrt_pi) = gamma_half_integer_exact(k2);
    let value = rational_to_f64(&r);
    if has_sqrt_pi {
        value * std::f64::consts::PI.sqrt()
    } else {
        value
    }
}

/// Nearest-float conversion for rationals whose parts may exceed `f64` range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() {
            return n / d;
        }
    }
    // Scale both parts down to keep the quotient representable.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    if d == 0.0 {
        let e = r.numer().bits() as f64 - r.denom().bits() as f64;
        return n.signum() * f64::INFINITY.min(2f64.powf(e));
    }
    n / d
}

/// Partial sum of a Gauss hypergeometric series together with its stopping
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeometricSum {
    pub value: f64,
    pub terms: usize,
    pub tail_estimate: f64,
}

/// `₂F₁(a, b; c; z)` by direct summation for `|z| < 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<f64> {
    gauss_2f1_sum(a, b, c, z, tol).map(|s| s.value)
}

/// Same as [`gauss_2f1`] but returns the term count and tail estimate.
///
/// Summation stops once three consecutive terms fall below `tol * |sum|` and
/// the geometric tail bound built from the current term ratio is below `tol`.
pub fn gauss_2f1_sum(a: f64, b: f64, c: f64, z: f64, tol: f64) -> Result<HypergeometricSum> {
    if !(z.abs() < 1.0) {
        return Err(Error::OutOfRange(format!("hypergeometric series needs |z| < 1, got z = {z}")));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(Error::InvalidArgument(format!("hypergeometric parameter c = {c} is a nonpositive integer")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }

    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small_run = 0;
    for n in 0..HYP2F1_MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            // terminating series
            return Ok(HypergeometricSum { value: sum, terms: n + 1, tail_estimate: 0.0 });
        }
        sum += term;
        if term.abs() < tol * sum.abs() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            let next = ((a + nf + 1.0) * (b + nf + 1.0) / ((c + nf + 1.0) * (nf + 2.0)) * z).abs();
            let rho = next.max(z.abs());
            if rho < 1.0 {
                let tail = term.abs() * rho / (1.0 - rho);
                if tail <= tol {
                    return Ok(HypergeometricSum { value: sum, terms: n + 2, tail_estimate: tail });
                }
            }
        }
    }
    Err(Error::NonConvergence { terms: HYP2F1_MAX_TERMS, last_term: term.abs() })
}

/// Order of a Bessel function of the first kind.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu >= 0.0 {
            Ok(BesselOrder(nu))
        } else {
            Err(Error::InvalidArgument(format!("Bessel order must be >= 0, got {nu}")))
        }
    }

    /// The half-integer order `(n-1)/2`.
    pub fn half(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("half-integer order needs n >= 1".into()));
        }
        Ok(BesselOrder(f64::from(n - 1) / 2.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_bessel_range(nu: BesselOrder, z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::InvalidArgument(format!("Bessel argument must be >= 0, got {z}")));
    }
    if z > BESSEL_MAX_ARG || nu.0 > BESSEL_MAX_ORDER {
        return Err(Error::OutOfRange(format!(
            "Bessel J_nu(z) supported for z <= {BESSEL_MAX_ARG}, nu <= {BESSEL_MAX_ORDER}; got nu = {}, z = {z}",
            nu.0
        )));
    }
    Ok(())
}

/// `Γ(ν+1) (2/z)^ν J_ν(z)`, the entire function
/// `Σ_k (-z²/4)^k / (k! (ν+1)_k)`, which equals 1 at `z = 0`.
///
/// The ascending series is accumulated in double-double arithmetic so that
/// cancellation between the large alternating terms stays below `1e-12`
/// absolute over the supported range.
pub fn bessel_j_normalized(nu: BesselOrder, z: f64, tol: f64) -> Result<f64> {
    check_bessel_range(nu, z)?;
    let _ = tol;
    if z == 0.0 {
        return Ok(1.0);
    }
    let x = -(z * z) / 4.0;
    let mut sum = TwoFloat::from(1.0);
    let mut term = TwoFloat::from(1.0);
    for k in 1..BESSEL_MAX_TERMS {
        let kf = k as f64;
        let denom = kf * (nu.0 + kf);
        term = term * x / denom;
        sum += term;
        let ratio = x.abs() / ((kf + 1.0) * (nu.0 + kf + 1.0));
        let t = term.hi().abs();
        if ratio < 0.5 && t <= 1e-32 * sum.hi().abs().max(f64::MIN_POSITIVE) {
            return Ok(sum.hi() + sum.lo());
        }
        if t == 0.0 {
            return Ok(sum.hi() + sum.lo());
        }
    }
    Err(Error::NonConvergence { terms: BESSEL_MAX_TERMS, last_term: term.hi().abs() })
}

/// `(z/2)^ν / Γ(ν+1)`, built as a product so neither factor overflows.
fn bessel_prefactor(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let k = nu.floor();
    let f = nu - k;
    let half = z / 2.0;
    let gamma_f1 = if f == 0.0 {
        1.0
    } else if f == 0.5 {
        std::f64::consts::PI.sqrt() / 2.0
    } else {
        statrs::function::gamma::gamma(1.0 + f)
    };
    let mut p = half.powf(f) / gamma_f1;
    for j in 1..=(k as u64) {
        p *= half / (f + j as f64);
        if p == 0.0 {
            break;
        }
    }
    p
}

/// Bessel function of the first kind `J_ν(z)` for `ν >= 0`, `0 <= z <= 50`,
/// `ν <= 120`.
pub fn bessel_j(nu: BesselOrder, z: f64, tol: f64) -> Result<f64> {
    let scaled = bessel_j_normalized(nu, z, tol)?;
    Ok(bessel_prefactor(nu.0, z) * scaled)
}
