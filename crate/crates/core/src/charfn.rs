//! Numerical evaluation of the characteristic function `H(α, t)`.
//!
//! Both series share the shape `e^{-λt} Σ_{n>=1} d_n(λ, v) t^{n-1}/(n-1)! · w_n`
//! with `v = (c a)²`, `a = ‖α‖`:
//!
//! * time-power series: `d_n = γ_n`, `w_n = 1`;
//! * Bessel series: `d_n = ζ_n`, `w_n = Γ(ν+1) (2/z)^ν J_ν(z)` with
//!   `ν = (n-1)/2`, `z = c t a`. This is the term
//!   `√π ζ_n / Γ(n/2) · (t/(2ca))^ν J_ν(z)` after the duplication formula
//!   `Γ(n/2) Γ((n+1)/2) = 2^{1-n} √π (n-1)!`, and it stays finite as `a → 0`.

use serde::{Deserialize, Serialize};

use crate::coeffs::{shared_table, FlightParams, SeriesKind};
use crate::error::{Error, Result};
use crate::specfun::{bessel_j, bessel_j_normalized, gauss_2f1, BesselOrder, BESSEL_MAX_ORDER};

/// Term cap for both series.
pub const MAX_TERMS: usize = 400;

/// Coefficients up to this order come from the exact tables; beyond it a
/// floating-point recurrence takes over.
pub const EXACT_ORDER: usize = 60;

/// Below this value of `c t a` the Bessel factor is replaced by its limit 1.
pub const SMALL_ARGUMENT: f64 = 1e-6;

/// Consecutive small terms required before a series is truncated.
const SMALL_RUN: usize = 4;

/// Guard on the denominator of the closed-form Laplace transform.
const SINGULAR_EPS: f64 = 1e-10;

/// Point `(‖α‖, t)` at which the characteristic function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub a: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(a: f64, t: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("norm a must be >= 0, got {a}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time t must be > 0, got {t}")));
        }
        Ok(EvalPoint { a, t })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Bessel,
    TimePower,
}

impl Representation {
    pub fn kind(self) -> SeriesKind {
        match self {
            Representation::Bessel => SeriesKind::BesselSeries,
            Representation::TimePower => SeriesKind::TimeSeries,
        }
    }
}

/// Truncated series value with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CfEvaluation {
    pub value: f64,
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub representation: Representation,
}

/// Numeric `base_n(λ, v)` for `0 <= n <= count`, from term ratios.
fn numeric_base(kind: SeriesKind, m: f64, v: f64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count + 1];
    let mut cur = 1.0;
    let mut n = 1;
    let mut r = 0.0;
    while n <= count {
        out[n] = cur;
        cur *= match kind {
            // (1/2+r)((m-2)/2+r) / ((m/2+r)(r+1)) · v
            SeriesKind::BesselSeries => (0.5 + r) * ((m - 2.0) / 2.0 + r) / ((m / 2.0 + r) * (r + 1.0)) * v,
            // -(1/2+r) / (m/2+r) · v
            SeriesKind::TimeSeries => -(0.5 + r) / (m / 2.0 + r) * v,
        };
        r += 1.0;
        n += 2;
    }
    out
}

/// Numeric `derived_n(λ, v)` for `0 <= n <= count`: exact tables evaluated in
/// floating point up to [`EXACT_ORDER`], then the convolution recurrence in
/// floating point. The vector is cut at the first non-finite value.
pub fn numeric_coefficients(kind: SeriesKind, params: &FlightParams, a: f64, count: usize) -> Vec<f64> {
    let v = (params.c * a).powi(2);
    let lambda = params.lambda;
    let exact = count.min(EXACT_ORDER);
    let table = shared_table(kind, params.m, exact);
    let mut out: Vec<f64> = table.derived[..=exact].iter().map(|p| p.eval(lambda, v)).collect();
    if count > exact {
        let base = numeric_base(kind, f64::from(params.m.get()), v, count);
        for n in exact + 1..=count {
            let conv: f64 = (1..n).step_by(2).map(|k| out[n - k] * base[k]).sum();
            let d = base[n] + lambda * conv;
            if !d.is_finite() {
                break;
            }
            out.push(d);
        }
    }
    if let Some(bad) = out.iter().position(|x| !x.is_finite()) {
        out.truncate(bad);
    }
    out
}

/// Series evaluator for a fixed model and norm `a`; reusable across times.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator {
    representation: Representation,
    params: FlightParams,
    a: f64,
    coeffs: Vec<f64>,
}

impl SeriesEvaluator {
    pub fn new(representation: Representation, params: &FlightParams, a: f64) -> Result<Self> {
        Self::with_max_terms(representation, params, a, MAX_TERMS)
    }

    /// As [`SeriesEvaluator::new`] with at most `max_terms` series terms.
    pub fn with_max_terms(
        representation: Representation,
        params: &FlightParams,
        a: f64,
        max_terms: usize,
    ) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("norm a must be >= 0, got {a}")));
        }
        if max_terms == 0 {
            return Err(Error::InvalidArgument("max_terms must be >= 1".into()));
        }
        let coeffs = numeric_coefficients(representation.kind(), params, a, max_terms);
        Ok(SeriesEvaluator { representation, params: *params, a, coeffs })
    }

    /// Scales the numeric coefficient of index `n` by `factor`. Used by the
    /// cross-validation driver to check that a corrupted table is detected.
    pub fn perturb_coefficient(&mut self, n: usize, factor: f64) {
        if let Some(c) = self.coeffs.get_mut(n) {
            *c *= factor;
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn weight(&self, n: usize, t: f64) -> Result<f64> {
        match self.representation {
            Representation::TimePower => Ok(1.0),
            Representation::Bessel => {
                let z = self.params.c * t * self.a;
                if z < SMALL_ARGUMENT {
                    return Ok(1.0);
                }
                let nu = BesselOrder::half(n as u32)?;
                bessel_j_normalized(nu, z, 0.0)
            }
        }
    }

    /// The `n`-th term (without `e^{-λt}`), `n >= 1`.
    fn term(&self, n: usize, t: f64, power: f64) -> Result<f64> {
        let d = self.coeffs[n];
        if d == 0.0 || power == 0.0 {
            return Ok(0.0);
        }
        Ok(d * power * self.weight(n, t)?)
    }

    /// Sum of the first `count` terms `n = 1..=count`, including `e^{-λt}`.
    pub fn partial_sum(&self, t: f64, count: usize) -> Result<f64> {
        if count >= self.coeffs.len() {
            return Err(Error::OutOfRange(format!("only {} coefficients available", self.coeffs.len() - 1)));
        }
        let mut power = 1.0;
        let mut sum = 0.0;
        for n in 1..=count {
            if n > 1 {
                power *= t / (n - 1) as f64;
            }
            sum += self.term(n, t, power)?;
        }
        Ok((-self.params.lambda * t).exp() * sum)
    }

    /// Evaluates the series at time `t >= 0`.
    ///
    /// Truncation: stop after [`SMALL_RUN`] consecutive terms with
    /// `|term| < tol · max(1, |partial|)`, once the term-ratio bound
    /// `(λ + c a) t / n` has dropped below 1/2.
    pub fn eval(&self, t: f64, tol: f64) -> Result<CfEvaluation> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("time t must be >= 0, got {t}")));
        }
        let damp = (-self.params.lambda * t).exp();
        let growth = self.params.lambda + self.params.c * self.a;
        let max_n = match self.representation {
            Representation::TimePower => self.coeffs.len() - 1,
            Representation::Bessel => (self.coeffs.len() - 1).min((2.0 * BESSEL_MAX_ORDER) as usize + 1),
        };

        let mut sum = 0.0;
        let mut power = 1.0;
        let mut recent = [0.0f64; SMALL_RUN];
        let mut small_run = 0;
        let mut last = 0.0;
        for n in 1..=max_n {
            if n >= self.coeffs.len() {
                break;
            }
            if n > 1 {
                power *= t / (n - 1) as f64;
            }
            let term = damp * self.term(n, t, power)?;
            if !term.is_finite() {
                break;
            }
            sum += term;
            last = term.abs();
            recent[n % SMALL_RUN] = last;
            if last < tol * sum.abs().max(1.0) {
                small_run += 1;
            } else {
                small_run = 0;
            }
            let rho = growth * t / n as f64;
            if small_run >= SMALL_RUN && rho <= 0.5 {
                let biggest = recent.iter().cloned().fold(0.0, f64::max);
                return Ok(CfEvaluation {
                    value: sum,
                    terms_used: n,
                    tail_estimate: biggest * rho / (1.0 - rho),
                    representation: self.representation,
                });
            }
        }
        Err(Error::NonConvergence { terms: self.coeffs.len().min(max_n + 1) - 1, last_term: last })
    }
}

/// `H(α, t)` from the Bessel-function series.
pub fn cf_bessel_series(params: &FlightParams, pt: EvalPoint, tol: f64) -> Result<CfEvaluation> {
    SeriesEvaluator::new(Representation::Bessel, params, pt.a)?.eval(pt.t, tol)
}

/// `H(α, t)` from the time-power series.
pub fn cf_time_series(params: &FlightParams, pt: EvalPoint, tol: f64) -> Result<CfEvaluation> {
    SeriesEvaluator::new(Representation::TimePower, params, pt.a)?.eval(pt.t, tol)
}

/// The first five terms of the Bessel series written out with `J_0`, `sin`,
/// `J_1`, the trigonometric form of `J_{3/2}`, and `J_2`. Needs `a > 0`.
pub fn cf_bessel_partial_5(params: &FlightParams, pt: EvalPoint) -> Result<f64> {
    if !(pt.a > 0.0) {
        return Err(Error::InvalidArgument("five-term Bessel form needs a > 0".into()));
    }
    let m = f64::from(params.m.get());
    let lam = params.lambda;
    let ca = params.c * pt.a;
    let v = ca * ca;
    let t = pt.t;
    let z = ca * t;
    let j = |nu: f64| bessel_j(BesselOrder::new(nu)?, z, 1e-14);
    let zeta3 = lam * lam + (m - 2.0) / (2.0 * m) * v;
    let zeta4 = lam.powi(3) + lam * (m - 2.0) / m * v;
    let zeta5 = lam.powi(4) + 1.5 * lam * lam * (m - 2.0) / m * v + 0.375 * (m - 2.0) / (m + 2.0) * v * v;
    let bracket = j(0.0)?
        + lam * z.sin() / ca
        + zeta3 * t / ca * j(1.0)?
        + zeta4 * t / (2.0 * v) * (z.sin() / z - z.cos())
        + zeta5 * t * t / (3.0 * v) * j(2.0)?;
    Ok((-lam * t).exp() * bracket)
}

/// The first five terms of the time-power series written out explicitly.
pub fn cf_time_partial_5(params: &FlightParams, pt: EvalPoint) -> f64 {
    let m = f64::from(params.m.get());
    let lam = params.lambda;
    let v = (params.c * pt.a).powi(2);
    let t = pt.t;
    let bracket = 1.0
        + lam * t
        + (lam * lam - v / m) * t * t / 2.0
        + (lam.powi(3) - lam * 2.0 / m * v) * t.powi(3) / 6.0
        + (lam.powi(4) - lam * lam * 3.0 / m * v + 3.0 / (m * (m + 2.0)) * v * v) * t.powi(4) / 24.0;
    (-lam * t).exp() * bracket
}

/// Closed-form Laplace transform of `H` in `t` at real `s > 0`:
/// `F(x) / (√((s+λ)² + v) - λ F(x))` with
/// `F = ₂F₁(1/2, (m-2)/2; m/2; x)` and `x = v / ((s+λ)² + v)`.
pub fn laplace_cf_closed(params: &FlightParams, a: f64, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Laplace variable s must be > 0, got {s}")));
    }
    let m = f64::from(params.m.get());
    let v = (params.c * a).powi(2);
    let shifted = (s + params.lambda).powi(2) + v;
    let x = v / shifted;
    let f = gauss_2f1(0.5, (m - 2.0) / 2.0, m / 2.0, x, 1e-15)?;
    let den = shifted.sqrt() - params.lambda * f;
    if den.abs() < SINGULAR_EPS {
        return Err(Error::Singular(format!("denominator {den:e} at s = {s}")));
    }
    Ok(f / den)
}

/// `Σ_{n=1}^{N} ζ_n / (s² + v)^{n/2}`, the Laplace transform of `e^{λt} H`.
/// It equals `laplace_cf_closed(params, a, s - λ)`.
pub fn laplace_series_a(params: &FlightParams, a: f64, s: f64, order: usize) -> Result<f64> {
    let ca = params.c * a;
    if !(s > params.lambda + ca) {
        return Err(Error::OutOfRange(format!("series needs s > lambda + c a = {}, got s = {s}", params.lambda + ca)));
    }
    let zeta = numeric_coefficients(SeriesKind::BesselSeries, params, a, order);
    if zeta.len() <= order {
        return Err(Error::OutOfRange(format!("coefficients overflow before order {order}")));
    }
    let q = 1.0 / (s * s + ca * ca).sqrt();
    let mut qn = 1.0;
    let mut sum = 0.0;
    let mut growing = 0;
    let mut prev = f64::INFINITY;
    for (n, z) in zeta.iter().enumerate().take(order + 1).skip(1) {
        qn *= q;
        let term = z * qn;
        sum += term;
        // even-index terms of pure powers can vanish; compare magnitudes of
        // nonzero terms only
        if term != 0.0 {
            if term.abs() > prev {
                growing += 1;
                if growing >= 5 {
                    return Err(Error::NonConvergence { terms: n, last_term: term.abs() });
                }
            } else {
                growing = 0;
            }
            prev = term.abs();
        }
    }
    Ok(sum)
}

/// `∫_0^{T} e^{-st} H(a, t) dt` by adaptive Simpson, with `T` chosen so the
/// dropped tail is below `tol/10`. `H` comes from the time-power series.
pub fn laplace_numeric_roundtrip(params: &FlightParams, a: f64, s: f64, tol: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::InvalidArgument(format!("Laplace variable s must be > 0, got {s}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    // |H| <= 1, so the neglected tail is at most e^{-sT}/s
    let t_max = (10.0 / (s * tol)).ln().max(1.0) / s;
    let evaluator = SeriesEvaluator::new(Representation::TimePower, params, a)?;
    let series_tol = (tol * 1e-4).max(1e-15);
    let f = |t: f64| -> Result<f64> { Ok((-s * t).exp() * evaluator.eval(t, series_tol)?.value) };
    adaptive_simpson(f, 0.0, t_max, tol / 10.0)
}

/// Maximum bisection depth for [`adaptive_simpson`].
const SIMPSON_MAX_DEPTH: u32 = 50;

/// Adaptive Simpson quadrature with the usual `|S2 - S1| <= 15 eps`
/// acceptance and Richardson correction.
pub fn adaptive_simpson<F>(f: F, lo: f64, hi: f64, eps: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Err(Error::Quadrature(format!("empty interval [{lo}, {hi}]")));
    }
    let flo = f(lo)?;
    let fhi = f(hi)?;
    let mid = 0.5 * (lo + hi);
    let fmid = f(mid)?;
    let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    simpson_step(&f, lo, hi, flo, fmid, fhi, whole, eps, SIMPSON_MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    lo: f64,
    hi: f64,
    flo: f64,
    fmid: f64,
    fhi: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    let right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "no convergence on [{lo}, {hi}] (error estimate {:e})",
            delta.abs() / 15.0
        )));
    }
    Ok(simpson_step(f, lo, mid, flo, flm, fmid, left, eps / 2.0, depth - 1)?
        + simpson_step(f, mid, hi, fmid, frm, fhi, right, eps / 2.0, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_half_integer;

    fn params(m: u32, lambda: f64, c: f64) -> FlightParams {
        FlightParams::new(m, lambda, c).unwrap()
    }

    fn pt(a: f64, t: f64) -> EvalPoint {
        EvalPoint::new(a, t).unwrap()
    }

    #[test]
    fn origin_of_inversion_space_gives_one() {
        for m in [3, 4, 7] {
            for (lambda, t) in [(0.0, 1.0), (1.0, 0.5), (2.5, 3.0)] {
                let p = params(m, lambda, 1.7);
                let b = cf_bessel_series(&p, pt(0.0, t), 1e-13).unwrap();
                let s = cf_time_series(&p, pt(0.0, t), 1e-13).unwrap();
                assert!((b.value - 1.0).abs() < 1e-12, "{b:?}");
                assert!((s.value - 1.0).abs() < 1e-12, "{s:?}");
            }
        }
    }

    #[test]
    fn no_switching_is_uniform_sphere_law() {
        let p = params(3, 0.0, 1.0);
        let b = cf_bessel_series(&p, pt(1.0, 1.0), 1e-13).unwrap();
        assert!((b.value - 1f64.sin()).abs() < 1e-12);
        assert!((b.value - 0.8414709848).abs() < 1e-10);
    }

    #[test]
    fn representations_agree() {
        let p = params(3, 1.0, 1.0);
        let b = cf_bessel_series(&p, pt(1.0, 1.0), 1e-13).unwrap();
        let s = cf_time_series(&p, pt(1.0, 1.0), 1e-13).unwrap();
        assert!((b.value - s.value).abs() < 1e-8);
        let p = params(4, 2.0, 1.0);
        let b = cf_bessel_series(&p, pt(2.0, 0.5), 1e-13).unwrap();
        let s = cf_time_series(&p, pt(2.0, 0.5), 1e-13).unwrap();
        assert!((b.value - s.value).abs() < 1e-8);
    }

    #[test]
    fn bessel_terms_match_literal_form() {
        // √π ζ_n/Γ(n/2) (t/(2ca))^ν J_ν(cta) against the normalized weights
        let p = params(5, 1.3, 0.8);
        let (a, t) = (1.7, 0.9);
        let ev = SeriesEvaluator::new(Representation::Bessel, &p, a).unwrap();
        let ca = p.c * a;
        let mut power = 1.0;
        for n in 1..30usize {
            if n > 1 {
                power *= t / (n - 1) as f64;
            }
            let nu = (n as f64 - 1.0) / 2.0;
            let literal = std::f64::consts::PI.sqrt() * ev.coeffs[n] / gamma_half_integer(n as u32)
                * (t / (2.0 * ca)).powf(nu)
                * bessel_j(BesselOrder::new(nu).unwrap(), ca * t, 1e-14).unwrap();
            let ours = ev.term(n, t, power).unwrap();
            assert!((literal - ours).abs() <= 1e-13 * literal.abs().max(1e-300) + 1e-300, "n = {n}");
        }
    }

    #[test]
    fn five_term_forms_equal_partial_sums() {
        let p = params(3, 1.0, 1.0);
        let q = pt(1.0, 0.1);
        let ev = SeriesEvaluator::new(Representation::Bessel, &p, q.a).unwrap();
        let five = cf_bessel_partial_5(&p, q).unwrap();
        assert!((five - ev.partial_sum(q.t, 5).unwrap()).abs() < 1e-12);

        let damp = (-p.lambda * q.t).exp();
        let z = p.c * q.t * q.a;
        let j0 = bessel_j(BesselOrder::new(0.0).unwrap(), z, 1e-14).unwrap();
        assert!((ev.partial_sum(q.t, 1).unwrap() - damp * j0).abs() < 1e-14);
        let second = ev.partial_sum(q.t, 2).unwrap() - ev.partial_sum(q.t, 1).unwrap();
        assert!((second - damp * p.lambda * z.sin() / (p.c * q.a)).abs() < 1e-14);

        for m in [3, 4, 6] {
            let p = params(m, 5.0, 3.0);
            let q = pt(0.2, 0.3);
            let ev = SeriesEvaluator::new(Representation::TimePower, &p, q.a).unwrap();
            assert!((cf_time_partial_5(&p, q) - ev.partial_sum(q.t, 5).unwrap()).abs() < 1e-12);
            let full = cf_time_series(&p, q, 1e-14).unwrap().value;
            // remaining terms start at t^5/5! with |γ_6| <= (λ + ca)^5
            let tail_bound = 2.0 * (-p.lambda * q.t).exp() * ((p.lambda + p.c * q.a) * q.t).powi(5) / 120.0;
            assert!((full - cf_time_partial_5(&p, q)).abs() <= tail_bound);
        }
    }

    #[test]
    fn tail_estimate_respects_tolerance() {
        let p = params(4, 1.0, 1.0);
        for tol in [1e-6, 1e-9, 1e-12] {
            let e = cf_time_series(&p, pt(2.0, 1.5), tol).unwrap();
            assert!(e.tail_estimate <= tol);
            assert!(e.value.abs() <= 1.0 + e.tail_estimate);
        }
    }

    #[test]
    fn small_time_limit() {
        let p = params(3, 2.0, 1.0);
        let v = cf_time_series(&p, pt(5.0, 1e-6), 1e-13).unwrap().value;
        assert!((v - 1.0).abs() < 1e-4);
    }

    #[test]
    fn closed_laplace_examples() {
        for m in [3, 5] {
            let p = params(m, 1.4, 2.0);
            for s in [0.3, 1.0, 4.0] {
                assert!((laplace_cf_closed(&p, 0.0, s).unwrap() - 1.0 / s).abs() < 1e-14);
            }
        }
        let p = params(3, 0.0, 1.0);
        assert!((laplace_cf_closed(&p, 1.0, 1.0).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(laplace_cf_closed(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn series_a_leading_term_and_shift() {
        let p = params(3, 1.0, 1.0);
        let s = 5.0;
        let one = laplace_series_a(&p, 1.0, s, 1).unwrap();
        assert!((one - 1.0 / (s * s + 1.0f64).sqrt()).abs() < 1e-15);
        let full = laplace_series_a(&p, 1.0, s, 200).unwrap();
        let closed = laplace_cf_closed(&p, 1.0, s - p.lambda).unwrap();
        assert!((full - closed).abs() < 1e-9);
        assert!(laplace_series_a(&p, 1.0, 1.5, 10).is_err());
    }

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(|t| Ok((-t).exp()), 0.0, 40.0, 1e-10).unwrap();
        assert!((v - (1.0 - (-40f64).exp())).abs() < 1e-9);
        let p = params(3, 1.0, 1.0);
        let r = laplace_numeric_roundtrip(&p, 0.0, 1.0, 1e-8).unwrap();
        assert!((r - 1.0).abs() < 1e-8);
    }

    #[test]
    fn numeric_recurrence_continues_exact_table() {
        // float recurrence started at order 10 reproduces exact values to 60
        for kind in [SeriesKind::BesselSeries, SeriesKind::TimeSeries] {
            let p = params(4, 0.7, 1.0);
            let a = 0.9;
            let exact = numeric_coefficients(kind, &p, a, EXACT_ORDER);
            let v = a * a;
            let base = numeric_base(kind, 4.0, v, EXACT_ORDER);
            let mut float = exact[..=10].to_vec();
            for n in 11..=EXACT_ORDER {
                let conv: f64 = (1..n).map(|k| float[n - k] * base[k]).sum();
                float.push(base[n] + p.lambda * conv);
            }
            for n in 0..=EXACT_ORDER {
                assert!((float[n] - exact[n]).abs() <= 1e-10 * exact[n].abs().max(1.0), "{kind:?} n = {n}");
            }
        }
    }

    #[test]
    fn term_budget_is_respected() {
        let p = FlightParams::new(3, 1.0, 1.0).unwrap();
        let short = SeriesEvaluator::with_max_terms(Representation::TimePower, &p, 2.0, 10).unwrap();
        assert_eq!(short.coefficients().len(), 11);
        assert!(matches!(short.eval(5.0, 1e-10), Err(Error::NonConvergence { .. })));
        assert!(SeriesEvaluator::with_max_terms(Representation::Bessel, &p, 2.0, 0).is_err());
        let full = SeriesEvaluator::with_max_terms(Representation::TimePower, &p, 2.0, 200).unwrap();
        assert!(full.eval(5.0, 1e-10).is_ok());
    }
}
