//! Closed forms for the four cases α, β ∈ {−1/2, +1/2}.
//!
//! In the function setting the eigenfunctions are cos/sin of n + S/2 on [0, π], so
//!
//! 𝔾_t(θ, φ) = (1/2π) [W(θ − φ) + σ W(θ + φ)],
//!
//! with σ = −1 exactly when α = +1/2 (Dirichlet at θ = 0), and W the wrapped Gaussian over
//! integer frequencies Θ(u) = Σ_k e^{−tk²} cos(ku) when α = β, or over half-integer
//! frequencies Θ½(u) = Σ_k e^{−t(k+½)²} cos((k+½)u) when α ≠ β. By Poisson summation
//!
//! Θ(u) = √(π/t) Σ_m e^{−(u−2πm)²/4t},  Θ½(u) = √(π/t) Σ_m (−1)^m e^{−(u−2πm)²/4t}.
//!
//! Dividing by F(θ)F(φ) gives 𝒢; at the Dirichlet endpoint the quotient is replaced by its
//! limit through W′ and W″.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{check_arg, check_t, log_trig_factor, HeatPoint};
use crate::specfun::JacobiParams;

/// Which representation of the wrapped Gaussian to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaRepr {
    /// Poisson-summed for t < 1, direct for t ≥ 1.
    Auto,
    /// Gaussian images √(π/t) Σ_m ε^m e^{−(u−2πm)²/4t}.
    Poisson,
    /// Frequency sum, at least 50 terms.
    Direct,
}

impl ThetaRepr {
    fn poisson(self, t: f64) -> bool {
        match self {
            ThetaRepr::Auto => t < 1.0,
            ThetaRepr::Poisson => true,
            ThetaRepr::Direct => false,
        }
    }
}

// image range for the Poisson form; |u| ≤ 2π so |u − 2πm| ≥ 8π outside it
const IMAGES: i32 = 5;

fn direct_terms(t: f64) -> usize {
    ((45.0 / t).sqrt().ceil() as usize + 2).max(50)
}

/// W(u), W′(u), W″(u).
fn wrapped(u: f64, t: f64, half: bool, repr: ThetaRepr) -> [f64; 3] {
    if repr.poisson(t) {
        let pre = (PI / t).sqrt();
        let mut out = [0.0; 3];
        for m in -IMAGES..=IMAGES {
            let sign = if half && m % 2 != 0 { -1.0 } else { 1.0 };
            let d = u - 2.0 * PI * m as f64;
            let g = sign * (-d * d / (4.0 * t)).exp();
            out[0] += g;
            out[1] += -d / (2.0 * t) * g;
            out[2] += (d * d / (4.0 * t * t) - 0.5 / t) * g;
        }
        out.map(|v| v * pre)
    } else {
        let mut out = if half { [0.0; 3] } else { [1.0, 0.0, 0.0] };
        let k0 = if half { 0 } else { 1 };
        for k in k0..k0 + direct_terms(t) {
            let nu = if half { k as f64 + 0.5 } else { k as f64 };
            let e = 2.0 * (-t * nu * nu).exp();
            let (s, c) = (nu * u).sin_cos();
            out[0] += e * c;
            out[1] -= e * nu * s;
            out[2] -= e * nu * nu * c;
        }
        out
    }
}

/// W(L − s) − W(L + s) for 0 ≤ s ≤ L, without cancellation for small s.
fn wrapped_difference(l: f64, s: f64, t: f64, half: bool, repr: ThetaRepr) -> f64 {
    if repr.poisson(t) {
        // each image contributes e^{−(A−s)²/4t} − e^{−(A+s)²/4t}, A = L − 2πm, an odd function of A
        let mut sum = 0.0;
        for m in -IMAGES..=IMAGES {
            let sign = if half && m % 2 != 0 { -1.0 } else { 1.0 };
            let a = l - 2.0 * PI * m as f64;
            let aa = a.abs();
            let g = (-(aa - s) * (aa - s) / (4.0 * t)).exp() * -(-aa * s / t).exp_m1();
            sum += sign * a.signum() * g;
        }
        sum * (PI / t).sqrt()
    } else {
        let mut sum = 0.0;
        let k0 = if half { 0 } else { 1 };
        for k in k0..k0 + direct_terms(t) {
            let nu = if half { k as f64 + 0.5 } else { k as f64 };
            sum += 4.0 * (-t * nu * nu).exp() * (nu * l).sin() * (nu * s).sin();
        }
        sum
    }
}

/// True when α, β ∈ {−1/2, 1/2}, the cases with a closed form.
pub fn has_oracle(params: JacobiParams) -> bool {
    half_cases(params).is_ok()
}

fn half_cases(params: JacobiParams) -> Result<(bool, bool)> {
    let side = |v: f64| {
        if v == 0.5 {
            Some(true)
        } else if v == -0.5 {
            Some(false)
        } else {
            None
        }
    };
    match (side(params.alpha()), side(params.beta())) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidParams(format!(
            "the closed-form oracle needs α, β ∈ {{−1/2, 1/2}}, got {params}"
        ))),
    }
}

// Beyond this the plain forms lose at most a few ulps to the cancellation at θ, φ → π.
const NEAR_PI: f64 = 0.5;

/// W(L − s) − W(L + s) for integer frequencies with L = π − δ, 0 ≤ s ≤ δ.
///
/// The image pairs (m, 1 − m) cancel to first order in δ; each pair is summed in closed
/// form, leaving two terms of size O(δs) instead of two of size O(1).
fn difference_near_pi(delta: f64, s: f64, t: f64, repr: ThetaRepr) -> f64 {
    if repr.poisson(t) {
        let mut sum = 0.0;
        for j in 0..=IMAGES {
            let p = (2 * j + 1) as f64 * PI;
            let (a, b) = (delta + s, delta - s);
            let x = p * delta / (2.0 * t);
            let y = p * s / (2.0 * t);
            let z = p * b / (2.0 * t);
            let pos =
                (-(p - a) * (p - a) / (4.0 * t)).exp() * (-2.0 * x).exp_m1() * (-2.0 * y).exp_m1();
            let neg = (-(p - b) * (p - b) / (4.0 * t)).exp()
                * (1.0 + (-2.0 * z).exp())
                * (-delta * s / t).exp_m1();
            sum += pos + neg;
        }
        sum * (PI / t).sqrt()
    } else {
        // sin(k(π − δ)) = (−1)^{k+1} sin(kδ)
        let mut sum = 0.0;
        for k in 1..=direct_terms(t) {
            let kf = k as f64;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum += 4.0 * sign * (-t * kf * kf).exp() * (kf * delta).sin() * (kf * s).sin();
        }
        sum
    }
}

/// W′(π − δ) for integer frequencies, without cancellation as δ → 0.
fn derivative_near_pi(delta: f64, t: f64, repr: ThetaRepr) -> f64 {
    if repr.poisson(t) {
        let mut sum = 0.0;
        for j in 0..=IMAGES {
            let p = (2 * j + 1) as f64 * PI;
            let x = p * delta / (2.0 * t);
            let e = (-(p - delta) * (p - delta) / (4.0 * t)).exp();
            sum += -0.5 / t * e * (-p * (-2.0 * x).exp_m1() - delta * (2.0 + (-2.0 * x).exp_m1()));
        }
        sum * (PI / t).sqrt()
    } else {
        let mut sum = 0.0;
        for k in 1..=direct_terms(t) {
            let kf = k as f64;
            let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
            sum -= 2.0 * sign * kf * (-t * kf * kf).exp() * (kf * delta).sin();
        }
        sum
    }
}

/// 𝒢_t(θ, φ) for α = β = 1/2, with θ + φ ≤ π.
fn trig_plus_plus(theta: f64, phi: f64, t: f64, repr: ThetaRepr) -> f64 {
    let (s, l) = if theta <= phi {
        (theta, phi)
    } else {
        (phi, theta)
    };
    // s ≤ π − l follows from θ + φ ≤ π
    let delta = PI - l;
    if s == 0.0 {
        let w = |u| wrapped(u, t, false, repr);
        let lim = if l == 0.0 {
            -2.0 * w(0.0)[2]
        } else if delta == 0.0 {
            2.0 * w(PI)[2]
        } else if delta < NEAR_PI {
            -2.0 * derivative_near_pi(delta, t, repr) / delta.sin()
        } else {
            -2.0 * w(l)[1] / l.sin()
        };
        return 2.0 / PI * lim;
    }
    let d = if delta < NEAR_PI {
        difference_near_pi(delta, s, t, repr) / delta.sin()
    } else {
        wrapped_difference(l, s, t, false, repr) / l.sin()
    };
    2.0 / PI * d / s.sin()
}

/// 𝒢_t(θ, φ) for α = 1/2, β = −1/2.
fn trig_plus_minus(theta: f64, phi: f64, t: f64, repr: ThetaRepr) -> f64 {
    let (s, l) = if theta <= phi {
        (theta, phi)
    } else {
        (phi, theta)
    };
    if s == 0.0 {
        let w = |u| wrapped(u, t, true, repr);
        if l == 0.0 {
            return -4.0 / PI * w(0.0)[2];
        }
        return -2.0 / PI * w(l)[1] / (0.5 * l).sin();
    }
    wrapped_difference(l, s, t, true, repr) / (2.0 * PI * (0.5 * theta).sin() * (0.5 * phi).sin())
}

/// 𝒢_t^{α,β}(θ, φ) in a chosen representation.
pub fn oracle_trig_with(params: JacobiParams, point: HeatPoint, repr: ThetaRepr) -> Result<f64> {
    let (a_plus, b_plus) = half_cases(params)?;
    let (theta, phi, t) = (point.theta(), point.phi(), point.t());
    // G^{a,b}(−x, −y) = G^{b,a}(x, y)
    let reflect = |v: f64| PI - v;
    Ok(match (a_plus, b_plus) {
        (false, false) => {
            let w = |u| wrapped(u, t, false, repr)[0];
            (w(theta - phi) + w(theta + phi)) / (2.0 * PI)
        }
        (true, true) => {
            if theta + phi > PI {
                trig_plus_plus(reflect(theta), reflect(phi), t, repr)
            } else {
                trig_plus_plus(theta, phi, t, repr)
            }
        }
        (true, false) => trig_plus_minus(theta, phi, t, repr),
        (false, true) => trig_plus_minus(reflect(theta), reflect(phi), t, repr),
    })
}

/// 𝒢_t^{α,β}(θ, φ) for α, β ∈ {±1/2}.
pub fn dirichlet_neumann_oracle_trig(params: JacobiParams, point: HeatPoint) -> Result<f64> {
    oracle_trig_with(params, point, ThetaRepr::Auto)
}

/// G_t^{α,β}(x, y) for α, β ∈ {±1/2}.
pub fn dirichlet_neumann_oracle(params: JacobiParams, x: f64, y: f64, t: f64) -> Result<f64> {
    check_arg("dirichlet_neumann_oracle", x)?;
    check_arg("dirichlet_neumann_oracle", y)?;
    check_t(t)?;
    let point = HeatPoint::new(x.acos(), y.acos(), t)?;
    Ok(dirichlet_neumann_oracle_trig(params, point)? / log_trig_factor(params, t).exp())
}

/// 2 K_t^1 at geodesic distance arccos x on the unit circle: (1/π) Σ_k e^{−tk²} cos(k arccos x).
pub fn sphere_s1_kernel(x: f64, t: f64) -> Result<f64> {
    sphere_s1_kernel_with(x, t, ThetaRepr::Auto)
}

pub fn sphere_s1_kernel_with(x: f64, t: f64, repr: ThetaRepr) -> Result<f64> {
    check_arg("sphere_s1_kernel", x)?;
    if !(t > 0.0) {
        return Err(crate::error::domain(
            "sphere_s1_kernel",
            format!("t must be positive, got {t}"),
        ));
    }
    Ok(wrapped(x.acos(), t, false, repr)[0] / PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{heat_series, trig_heat, SeriesTruncation};
    use approx::assert_relative_eq;

    const CASES: [(f64, f64); 4] = [(-0.5, -0.5), (0.5, 0.5), (0.5, -0.5), (-0.5, 0.5)];

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    fn angles() -> Vec<f64> {
        let mut v: Vec<f64> = (0..=12).map(|k| k as f64 * PI / 12.0).collect();
        v.extend([1e-7, 0.03, PI - 1e-7, PI - 0.03]);
        v
    }

    #[test]
    fn representations_agree_at_half() {
        for (a, b) in CASES {
            for &th in &angles() {
                for &ph in &angles() {
                    let pt = HeatPoint::new(th, ph, 0.5).unwrap();
                    let u = oracle_trig_with(p(a, b), pt, ThetaRepr::Poisson).unwrap();
                    let v = oracle_trig_with(p(a, b), pt, ThetaRepr::Direct).unwrap();
                    assert!(
                        (u - v).abs() <= 1e-12 * v.abs().max(1e-3),
                        "({a},{b}) θ={th} φ={ph}: {u} vs {v}"
                    );
                }
            }
        }
    }

    #[test]
    fn representations_agree_at_one() {
        for (a, b) in CASES {
            let pt = HeatPoint::new(0.4, 2.2, 1.0).unwrap();
            let u = oracle_trig_with(p(a, b), pt, ThetaRepr::Poisson).unwrap();
            let v = oracle_trig_with(p(a, b), pt, ThetaRepr::Direct).unwrap();
            assert_relative_eq!(u, v, max_relative = 1e-12);
        }
    }

    #[test]
    fn neumann_diagonal_at_one() {
        let pt = HeatPoint::new(0.0, 0.0, 1.0).unwrap();
        let mut s = 1.0;
        for n in 1..40 {
            s += 2.0 * (-(n as f64).powi(2)).exp();
        }
        let v = dirichlet_neumann_oracle_trig(p(-0.5, -0.5), pt).unwrap();
        assert_relative_eq!(v, s / PI, max_relative = 1e-14);
    }

    #[test]
    fn matches_series() {
        for (a, b) in CASES {
            for &t in &[0.01, 0.05, 0.2, 1.0] {
                for &th in &angles() {
                    for &ph in &angles() {
                        let pt = HeatPoint::new(th, ph, t).unwrap();
                        let o = dirichlet_neumann_oracle_trig(p(a, b), pt).unwrap();
                        let s = trig_heat(p(a, b), pt, SeriesTruncation::default()).unwrap();
                        let err = (o - s.value).abs();
                        assert!(
                            err <= 1e-10 * o.abs() + 2.0 * s.error_bound(),
                            "({a},{b}) θ={th} φ={ph} t={t}: oracle {o}, series {} ± {}",
                            s.value,
                            s.error_bound()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn pure_setting_example() {
        let (x, y) = (0.7f64.cos(), 1.3f64.cos());
        let o = dirichlet_neumann_oracle(p(-0.5, -0.5), x, y, 0.05).unwrap();
        let s = heat_series(p(-0.5, -0.5), x, y, 0.05, SeriesTruncation::default()).unwrap();
        assert_relative_eq!(o, s.value, max_relative = 1e-10);
        assert!(dirichlet_neumann_oracle(p(0.0, 0.5), 0.1, 0.2, 1.0).is_err());
    }

    #[test]
    fn circle_kernel() {
        let big = sphere_s1_kernel(1.0, 200.0).unwrap();
        assert_relative_eq!(big, 1.0 / PI, max_relative = 1e-14);
        for &x in &[-1.0, -0.3, 0.2, 0.95, 1.0] {
            for &t in &[0.01, 0.1, 1.0] {
                let g = heat_series(p(-0.5, -0.5), x, 1.0, t, SeriesTruncation::default()).unwrap();
                let k = sphere_s1_kernel(x, t).unwrap();
                assert!((g.value - k).abs() <= 1e-10, "x={x} t={t}");
            }
        }
    }
}
