//! Heat and Poisson kernel evaluators for the Jacobi setting and its two trigonometric
//! normalizations, the reduction-formula path, and closed-form oracles.
//!
//! Normalizations, with S = α + β + 1 and x = cos θ, y = cos φ:
//! - G_t(x, y) = Σ e^{−t n(n+S)} P_n(x) P_n(y) / h_n (pure Jacobi setting);
//! - 𝒢_t(θ, φ) = 2^S e^{−tS²/4} G_t(cos θ, cos φ);
//! - 𝔾_t(θ, φ) = F(θ) F(φ) 𝒢_t(θ, φ), F(θ) = (sin θ/2)^{α+1/2} (cos θ/2)^{β+1/2}.

mod laguerre;
mod oracle;
mod poisson;
mod reduction;
mod table;

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{log_jacobi_norm, log_sup_bound_unchecked, JacobiParams, Recurrence};

pub use laguerre::{laguerre_kernel, log_laguerre_kernel};
pub use oracle::{
    dirichlet_neumann_oracle, dirichlet_neumann_oracle_trig, has_oracle, oracle_trig_with,
    sphere_s1_kernel, sphere_s1_kernel_with, ThetaRepr,
};
pub use poisson::{
    poisson_func, poisson_func_direct, poisson_integral, poisson_integral_with, poisson_series,
    poisson_truncation,
};
pub(crate) use reduction::EndpointSeries;
pub use reduction::{reduction_constant, reduction_heat, reduction_heat_value};
pub use table::{SeriesWeights, SpectralTable};

/// Smallest t accepted by the series paths.
pub const T_FLOOR: f64 = 1e-6;

/// Multiplier of eps·Σ|terms| used as the floating-point rounding estimate of a partial sum.
/// Calibrated against the closed-form ±1/2 kernels, where the observed error stays
/// below ~40 eps Σ|terms| at N ≈ 200.
pub(crate) fn rounding_factor(n_terms: usize) -> f64 {
    f64::EPSILON * (16.0 + 4.0 * (n_terms as f64).sqrt())
}

/// Truncation control for spectral series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTruncation {
    pub max_terms: usize,
    pub tail_tol: f64,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        Self {
            max_terms: 20_000,
            tail_tol: 1e-16,
        }
    }
}

impl SeriesTruncation {
    pub fn new(max_terms: usize, tail_tol: f64) -> Result<Self> {
        if max_terms < 1 || !(tail_tol > 0.0) {
            return Err(Error::InvalidParams(format!(
                "truncation needs max_terms >= 1 and tail_tol > 0 (got {max_terms}, {tail_tol})"
            )));
        }
        Ok(Self {
            max_terms,
            tail_tol,
        })
    }

    /// Defaults for the Poisson series, whose terms decay only geometrically.
    pub fn poisson_default() -> Self {
        Self {
            max_terms: 400_000,
            tail_tol: 1e-16,
        }
    }
}

/// A kernel value with its certified truncation tail and a floating-point rounding estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub tail_bound: f64,
    /// Estimated rounding error of the partial sum (eps-scaled sum of |terms|).
    pub round_bound: f64,
    pub terms_used: usize,
    pub certified: bool,
}

impl KernelValue {
    /// tail_bound + round_bound.
    pub fn error_bound(&self) -> f64 {
        self.tail_bound + self.round_bound
    }

    /// True when the value is positive and known to relative accuracy `rel`.
    /// Subnormal values never count: their spacing is absolute, not relative.
    pub fn is_resolved(&self, rel: f64) -> bool {
        self.value >= f64::MIN_POSITIVE && self.error_bound() <= rel * self.value
    }

    pub(crate) fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            tail_bound: self.tail_bound * factor,
            round_bound: self.round_bound * factor,
            ..self
        }
    }

    /// An exactly known value (closed forms), with a rounding estimate of a few ulps.
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            tail_bound: 0.0,
            round_bound: 16.0 * f64::EPSILON * value.abs(),
            terms_used: 0,
            certified: true,
        }
    }
}

/// A point (θ, φ, t) of [0, π]² × (0, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct HeatPoint {
    theta: f64,
    phi: f64,
    t: f64,
}

#[derive(Deserialize)]
struct RawPoint {
    theta: f64,
    phi: f64,
    t: f64,
}

impl TryFrom<RawPoint> for HeatPoint {
    type Error = Error;
    fn try_from(r: RawPoint) -> Result<Self> {
        HeatPoint::new(r.theta, r.phi, r.t)
    }
}

impl HeatPoint {
    pub fn new(theta: f64, phi: f64, t: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        if !(0.0..=pi).contains(&theta) || !(0.0..=pi).contains(&phi) {
            return Err(domain(
                "HeatPoint",
                format!("angles must lie in [0, π], got θ = {theta}, φ = {phi}"),
            ));
        }
        if !(t > 0.0) || t.is_nan() {
            return Err(domain("HeatPoint", format!("t must be positive, got {t}")));
        }
        Ok(Self { theta, phi, t })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn phi(&self) -> f64 {
        self.phi
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    /// cos θ
    pub fn x(&self) -> f64 {
        self.theta.cos()
    }
    /// cos φ
    pub fn y(&self) -> f64 {
        self.phi.cos()
    }

    pub fn swapped(&self) -> Self {
        Self {
            theta: self.phi,
            phi: self.theta,
            t: self.t,
        }
    }

    pub fn with_t(&self, t: f64) -> Result<Self> {
        Self::new(self.theta, self.phi, t)
    }
}

pub(crate) fn check_arg(func: &'static str, x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(domain(
            func,
            format!("argument must lie in [-1, 1], got {x}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || t.is_nan() {
        return Err(domain(
            "heat kernel",
            format!("t must be positive, got {t}"),
        ));
    }
    if t < T_FLOOR {
        return Err(Error::PrecisionFloor { t, floor: T_FLOOR });
    }
    Ok(())
}

/// Truncation order N and certified tail bound for the heat series at time t.
///
/// a_n = e^{−t n(n+S)} sup_n² / h_n bounds the n-th term; for n ≥ m the ratio a_{n+1}/a_n
/// is at most ρ_m, the product of four factors each decreasing in n evaluated at n = m.
/// Hence Σ_{n>N} a_n ≤ a_{N+1} / (1 − ρ_{N+1}) whenever ρ_{N+1} < 1; this is 2 a_{N+1}
/// when the ratio is 1/2 and stays rigorous at small t, where the ratio is near 1.
pub fn heat_truncation(
    params: JacobiParams,
    t: f64,
    trunc: SeriesTruncation,
) -> Result<(usize, f64)> {
    check_t(t)?;
    let n0 = ((8.0 / t.sqrt()).ceil() as usize).saturating_add(32);
    let mut n = n0.min(trunc.max_terms);
    loop {
        let m = n + 1;
        let ratio = heat_ratio_bound(params, t, m);
        let tail = if ratio < 1.0 {
            log_heat_term_bound(params, t, m).exp() / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        if tail <= trunc.tail_tol {
            return Ok((n, tail));
        }
        if n >= trunc.max_terms {
            return Err(Error::TruncationExhausted {
                max_terms: trunc.max_terms,
                tail_bound: tail,
            });
        }
        n = (n + n / 8 + 1).min(trunc.max_terms);
    }
}

/// ln a_n for the heat series.
fn log_heat_term_bound(params: JacobiParams, t: f64, n: usize) -> f64 {
    -t * params.eigenvalue(n) + 2.0 * log_sup_bound_unchecked(params, n)
        - log_jacobi_norm(params, n)
}

/// Ratio bound for consecutive term bounds, with the sup bound exponent q clamped at −1/2.
pub(crate) fn poly_ratio_factor(params: JacobiParams, m: usize) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    let s = params.s();
    let q = a.max(b).max(-0.5);
    let mf = m as f64;
    let sup = ((mf + 1.0 + q) / (mf + 1.0)).powi(2).max(1.0);
    let norm = (2.0 * mf + s + 2.0) / (2.0 * mf + s);
    let mix = 1.0 + (a * b).abs() / ((mf + a + 1.0) * (mf + b + 1.0));
    sup * norm * mix
}

fn heat_ratio_bound(params: JacobiParams, t: f64, m: usize) -> f64 {
    let mf = m as f64;
    (-t * (2.0 * mf + 1.0 + params.s())).exp() * poly_ratio_factor(params, m)
}

/// Partial sum Σ_{n≤N} w_n P_n(x) P_n(y) / h_n with |terms| accumulated alongside.
pub(crate) fn spectral_sum(
    rec: &Recurrence,
    x: f64,
    y: f64,
    n: usize,
    weight: impl Fn(usize) -> f64,
) -> (f64, f64) {
    let params = rec.params();
    let (a, b) = (params.alpha(), params.beta());
    let mut px0 = 1.0;
    let mut py0 = 1.0;
    let w0 = weight(0) * rec.inv_norm(0);
    let mut sum = w0;
    let mut abs = w0.abs();
    if n == 0 {
        return (sum, abs);
    }
    let mut px1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) * 0.5;
    let mut py1 = (a + 1.0) + (a + b + 2.0) * (y - 1.0) * 0.5;
    let term = weight(1) * rec.inv_norm(1) * px1 * py1;
    sum += term;
    abs += term.abs();
    for k in 2..=n {
        let (ka, kb, kc) = rec.coefficients(k);
        let px2 = (ka * x + kb) * px1 - kc * px0;
        let py2 = (ka * y + kb) * py1 - kc * py0;
        px0 = px1;
        px1 = px2;
        py0 = py1;
        py1 = py2;
        let term = weight(k) * rec.inv_norm(k) * px1 * py1;
        sum += term;
        abs += term.abs();
    }
    (sum, abs)
}

/// G_t^{α,β}(x, y) by the spectral series with a certified tail.
pub fn heat_series(
    params: JacobiParams,
    x: f64,
    y: f64,
    t: f64,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    check_arg("heat_series", x)?;
    check_arg("heat_series", y)?;
    let (n, tail) = heat_truncation(params, t, trunc)?;
    let rec = Recurrence::new(params, n);
    // the series is symmetric term by term; order the arguments so the float result is too
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let (sum, abs) = spectral_sum(&rec, x, y, n, |k| (-t * params.eigenvalue(k)).exp());
    Ok(KernelValue {
        value: sum,
        tail_bound: tail,
        round_bound: rounding_factor(n) * abs,
        terms_used: n + 1,
        certified: params.in_theorem_range(),
    })
}

/// ln of 2^S e^{−tS²/4}, the factor turning G into 𝒢.
pub fn log_trig_factor(params: JacobiParams, t: f64) -> f64 {
    let s = params.s();
    s * LN_2 - 0.25 * t * s * s
}

/// 𝒢_t^{α,β}(θ, φ).
pub fn trig_heat(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let g = heat_series(params, point.x(), point.y(), point.t(), trunc)?;
    Ok(g.scaled(log_trig_factor(params, point.t()).exp()))
}

/// F(θ) = (sin θ/2)^{α+1/2} (cos θ/2)^{β+1/2}, with 0^0 = 1.
pub fn func_factor(params: JacobiParams, theta: f64) -> f64 {
    let s = (0.5 * theta).sin();
    let c = (0.5 * theta).cos();
    s.powf(params.alpha() + 0.5) * c.powf(params.beta() + 0.5)
}

/// 𝔾_t^{α,β}(θ, φ); infinite at an endpoint where the prefactor exponent is negative.
pub fn func_heat(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let g = trig_heat(params, point, trunc)?;
    let f = func_factor(params, point.theta()) * func_factor(params, point.phi());
    if f.is_infinite() {
        return Ok(KernelValue {
            value: f64::INFINITY,
            certified: false,
            ..g
        });
    }
    Ok(g.scaled(f))
}

/// 𝔾_t^{α,β}(θ, φ) summed directly as Σ e^{−t(n+S/2)²} φ_n(θ) φ_n(φ) with
/// φ_n(θ) = F(θ) 2^{S/2} h_n^{−1/2} P_n(cos θ).
pub fn func_heat_direct(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let t = point.t();
    let (n, tail) = heat_truncation(params, t, trunc)?;
    let rec = Recurrence::new(params, n);
    let half_s = 0.5 * params.s();
    let fx = func_factor(params, point.theta());
    let fy = func_factor(params, point.phi());
    let mut px = rec.eval(point.x(), n);
    let mut py = rec.eval(point.y(), n);
    let scale = (half_s * LN_2).exp();
    for k in 0..=n {
        let r = rec.inv_norm(k).sqrt() * scale;
        px[k] *= r * fx;
        py[k] *= r * fy;
    }
    let mut sum = 0.0;
    let mut abs = 0.0;
    for k in 0..=n {
        let e = k as f64 + half_s;
        let term = (-t * e * e).exp() * px[k] * py[k];
        sum += term;
        abs += term.abs();
    }
    let outer = log_trig_factor(params, t).exp() * fx * fy;
    Ok(KernelValue {
        value: sum,
        tail_bound: tail * outer,
        round_bound: rounding_factor(n) * abs,
        terms_used: n + 1,
        certified: params.in_theorem_range() && sum.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn large_t_limit() {
        let v = heat_series(p(0.0, 0.0), 1.0, 1.0, 1e6, SeriesTruncation::default()).unwrap();
        assert!((v.value - 0.5).abs() < 1e-12);
        assert!(v.certified);
    }

    #[test]
    fn symmetry_is_exact() {
        for q in [p(2.3, 0.7), p(-0.5, -0.5), p(0.5, 1.5)] {
            for &(x, y, t) in &[(0.3, -0.8, 0.01), (0.99, 0.2, 0.3), (-1.0, 1.0, 0.05)] {
                let a = heat_series(q, x, y, t, SeriesTruncation::default()).unwrap();
                let b = heat_series(q, y, x, t, SeriesTruncation::default()).unwrap();
                assert_eq!(a.value, b.value);
            }
        }
    }

    #[test]
    fn floor_and_domain_errors() {
        let q = p(0.0, 0.0);
        assert!(matches!(
            heat_series(q, 0.0, 0.0, 1e-9, SeriesTruncation::default()),
            Err(Error::PrecisionFloor { .. })
        ));
        assert!(heat_series(q, 1.2, 0.0, 1.0, SeriesTruncation::default()).is_err());
        assert!(heat_series(q, 0.0, 0.0, -1.0, SeriesTruncation::default()).is_err());
        assert!(HeatPoint::new(4.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn truncation_is_certified_and_small() {
        for q in [p(2.3, 0.7), p(-0.5, -0.5), p(3.3, 1.7)] {
            for &t in &[1e-6, 1e-3, 0.1, 10.0] {
                let (n, tail) = heat_truncation(q, t, SeriesTruncation::default()).unwrap();
                assert!(tail <= 1e-16);
                assert!(n <= 20_000);
            }
        }
    }

    #[test]
    fn out_of_range_is_flagged_not_rejected() {
        let v = heat_series(p(-0.9, 0.3), 0.2, 0.4, 0.1, SeriesTruncation::default()).unwrap();
        assert!(!v.certified);
        assert!(v.value > 0.0);
    }

    #[test]
    fn trig_relation_at_midpoint() {
        let q = p(0.0, 0.0);
        let pt = HeatPoint::new(PI / 2.0, PI / 2.0, 1.0).unwrap();
        let g = heat_series(q, 0.0, 0.0, 1.0, SeriesTruncation::default()).unwrap();
        let tg = trig_heat(q, pt, SeriesTruncation::default()).unwrap();
        assert_relative_eq!(
            tg.value,
            2.0 * (-0.25f64).exp() * g.value,
            max_relative = 1e-14
        );
    }

    #[test]
    fn trig_matches_direct_normalized_sum() {
        // (−1/2, −1/2): 𝒫_0 = 1/√π, 𝒫_n = √(2/π) cos nθ
        let q = p(-0.5, -0.5);
        let pt = HeatPoint::new(1.0, 1.0, 0.1).unwrap();
        let v = trig_heat(q, pt, SeriesTruncation::default()).unwrap();
        let mut direct = 1.0 / PI;
        for n in 1..200 {
            let nf = n as f64;
            direct += 2.0 / PI * (-0.1 * nf * nf).exp() * (nf * 1.0).cos().powi(2);
        }
        assert_relative_eq!(v.value, direct, max_relative = 1e-12);
    }

    #[test]
    fn func_endpoints_and_direct_sum() {
        let q = p(0.7, 0.2);
        let v = func_heat(
            q,
            HeatPoint::new(0.0, 1.0, 0.2).unwrap(),
            SeriesTruncation::default(),
        )
        .unwrap();
        assert_eq!(v.value, 0.0);
        let m = p(-0.5, -0.5);
        let pt = HeatPoint::new(0.4, 2.0, 0.2).unwrap();
        let a = func_heat(m, pt, SeriesTruncation::default()).unwrap();
        let b = trig_heat(m, pt, SeriesTruncation::default()).unwrap();
        assert_eq!(a.value, b.value);
        for q in [p(0.7, 0.2), p(2.3, 0.7), p(0.5, 1.5)] {
            let pt = HeatPoint::new(1.1, 1.7, 0.05).unwrap();
            let a = func_heat(q, pt, SeriesTruncation::default()).unwrap();
            let b = func_heat_direct(q, pt, SeriesTruncation::default()).unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-12);
        }
        let v = func_heat(
            p(-0.8, 0.0),
            HeatPoint::new(0.0, 1.0, 0.2).unwrap(),
            SeriesTruncation::default(),
        )
        .unwrap();
        assert!(v.value.is_infinite() && !v.certified);
    }
}
