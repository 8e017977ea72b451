//! G_t^{α,β}(cos θ, cos φ) = 𝒞 ∬ G_{t/4}^{λ,λ}(u sin(θ/2)sin(φ/2) + v cos(θ/2)cos(φ/2), 1) dΠ_α(u) dΠ_β(v)
//! with λ = α + β + 1/2.

use std::f64::consts::{LN_2, PI};

use crate::error::Result;
use crate::kernels::{heat_truncation, rounding_factor, HeatPoint, KernelValue, SeriesTruncation};
use crate::quadrature::{pi_measure_rule, Integrator};
use crate::specfun::{log_binomial, log_gamma_pos, log_jacobi_norm, JacobiParams, Recurrence};

/// 𝒞_{α,β} = √π Γ(α+β+3/2) / (2^{α+β+1} Γ(α+1) Γ(β+1)).
pub fn reduction_constant(params: JacobiParams) -> f64 {
    let (a, b) = (params.alpha(), params.beta());
    (0.5 * PI.ln() + log_gamma_pos(a + b + 1.5)
        - params.s() * LN_2
        - log_gamma_pos(a + 1.0)
        - log_gamma_pos(b + 1.0))
    .exp()
}

/// z ↦ G_s^{λ,λ}(z, 1) as a truncated series Σ c_k P_k(z), c_k = e^{−sλ_k} P_k(1)/h_k.
pub(crate) struct EndpointSeries {
    lam: f64,
    rec: Recurrence,
    coef: Vec<f64>,
    tail: f64,
}

impl EndpointSeries {
    pub(crate) fn new(lam: f64, s: f64, trunc: SeriesTruncation) -> Result<Self> {
        let inner = JacobiParams::new(lam, lam)?;
        let (n, tail) = heat_truncation(inner, s, trunc)?;
        let rec = Recurrence::new(inner, n);
        let coef = (0..=n)
            .map(|k| {
                (-s * inner.eigenvalue(k) + log_binomial(k, lam) - log_jacobi_norm(inner, k)).exp()
            })
            .collect();
        Ok(Self {
            lam,
            rec,
            coef,
            tail,
        })
    }

    pub(crate) fn order(&self) -> usize {
        self.coef.len() - 1
    }

    /// Tail bound of the truncation, uniform in z.
    pub(crate) fn tail_bound(&self) -> f64 {
        self.tail
    }

    /// (value, Σ|terms|) at z.
    pub(crate) fn eval(&self, z: f64) -> (f64, f64) {
        let coef = &self.coef;
        let n = coef.len() - 1;
        let mut p0 = 1.0;
        let mut sum = coef[0];
        let mut abs = coef[0].abs();
        if n == 0 {
            return (sum, abs);
        }
        let mut p1 = (self.lam + 1.0) * z;
        sum += coef[1] * p1;
        abs += (coef[1] * p1).abs();
        for (k, &c) in coef.iter().enumerate().take(n + 1).skip(2) {
            let (ka, kb, kc) = self.rec.coefficients(k);
            let p2 = (ka * z + kb) * p1 - kc * p0;
            p0 = p1;
            p1 = p2;
            let term = c * p1;
            sum += term;
            abs += term.abs();
        }
        (sum, abs)
    }
}

/// The reduction-formula path with its error estimate.
///
/// The inner kernel is a polynomial of degree N in z (the truncation order at t/4), hence of
/// total degree N in (u, v); product Gauss rules with 2m − 1 ≥ N integrate it exactly.
pub fn reduction_heat_value(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    params.require_theorem_range("reduction_heat")?;
    let lam = params.alpha() + params.beta() + 0.5;
    let inner = EndpointSeries::new(lam, 0.25 * point.t(), trunc)?;
    let (n, tail) = (inner.order(), inner.tail_bound());
    let eval = |z: f64| inner.eval(z);

    let m = ((n + 2) / 2).next_multiple_of(32);
    let ra = pi_measure_rule(params.alpha(), m)?;
    let rb = pi_measure_rule(params.beta(), m)?;
    let (th, ph) = (point.theta(), point.phi());
    let ss = (0.5 * th).sin() * (0.5 * ph).sin();
    let cc = (0.5 * th).cos() * (0.5 * ph).cos();
    let mut total = 0.0;
    let mut total_abs = 0.0;
    for i in 0..ra.len() {
        let (u, _, _, wu) = ra.node(i);
        for j in 0..rb.len() {
            let (v, _, _, wv) = rb.node(j);
            let z = (u * ss + v * cc).clamp(-1.0, 1.0);
            let (g, ga) = eval(z);
            total += wu * wv * g;
            total_abs += wu * wv * ga;
        }
    }
    let c = reduction_constant(params);
    Ok(KernelValue {
        value: c * total,
        tail_bound: c * tail,
        round_bound: c * rounding_factor(n) * total_abs,
        terms_used: n + 1,
        certified: true,
    })
}

/// G_t^{α,β}(cos θ, cos φ) by the reduction formula.
pub fn reduction_heat(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<f64> {
    reduction_heat_value(params, point, trunc).map(|v| v.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::heat_series;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn constant_at_point_masses_is_one() {
        assert_relative_eq!(reduction_constant(p(-0.5, -0.5)), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn agrees_with_series() {
        for q in [
            p(0.0, 0.0),
            p(0.5, 1.5),
            p(-0.5, 0.3),
            p(-0.5, -0.5),
            p(2.3, 0.7),
        ] {
            for &(th, ph, t) in &[
                (0.3, 1.2, 0.01),
                (2.0, 2.9, 0.1),
                (0.0, 0.0, 0.05),
                (3.0, 0.2, 0.7),
            ] {
                let pt = HeatPoint::new(th, ph, t).unwrap();
                let r = reduction_heat_value(q, pt, SeriesTruncation::default()).unwrap();
                let s = heat_series(q, pt.x(), pt.y(), t, SeriesTruncation::default()).unwrap();
                let err = (r.value - s.value).abs();
                assert!(
                    err <= 1e-6 * s.value + r.error_bound() + s.error_bound(),
                    "{q} {pt:?}: {} vs {}",
                    r.value,
                    s.value
                );
            }
        }
    }

    #[test]
    fn rejects_out_of_range() {
        let pt = HeatPoint::new(0.3, 1.2, 0.1).unwrap();
        assert!(reduction_heat(p(-0.7, 0.0), pt, SeriesTruncation::default()).is_err());
    }
}
