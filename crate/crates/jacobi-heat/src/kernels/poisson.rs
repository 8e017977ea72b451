//! Jacobi–Poisson kernel ℋ_t(θ, φ) = Σ e^{−t|n+S/2|} 𝒫_n(θ) 𝒫_n(φ), by its series and by its
//! integral representation against dΠ_α ⊗ dΠ_β.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::kernels::{
    func_factor, poly_ratio_factor, rounding_factor, spectral_sum, HeatPoint, KernelValue,
    SeriesTruncation,
};
use crate::quadrature::{doubling_driver, Integrator, PiRule, RuleFamily};
use crate::specfun::{log_jacobi_norm, log_sup_bound_unchecked, JacobiParams, Recurrence};

/// Default relative tolerance of the integral representation.
pub const POISSON_INTEGRAL_TOL: f64 = 1e-8;

fn check_t_positive(t: f64) -> Result<()> {
    if !(t > 0.0) || t.is_nan() {
        return Err(crate::error::domain(
            "poisson kernel",
            format!("t must be positive, got {t}"),
        ));
    }
    Ok(())
}

fn log_term_bound(params: JacobiParams, t: f64, n: usize) -> f64 {
    let e = (n as f64 + 0.5 * params.s()).abs();
    params.s() * LN_2 - t * e + 2.0 * log_sup_bound_unchecked(params, n)
        - log_jacobi_norm(params, n)
}

/// Truncation order N and certified tail bound for the Poisson series at time t.
///
/// Term bounds for n ≥ m ≥ 1 have ratio at most ρ_m = e^{−t} times a factor decreasing to 1,
/// so the tail past N is at most a_{N+1} / (1 − ρ_{N+1}) once ρ_{N+1} < 1.
pub fn poisson_truncation(
    params: JacobiParams,
    t: f64,
    trunc: SeriesTruncation,
) -> Result<(usize, f64)> {
    check_t_positive(t)?;
    let n0 = ((36.0 / t).ceil().min(1e9) as usize).saturating_add(32);
    let mut n = n0.min(trunc.max_terms);
    loop {
        let m = n + 1;
        let rho = (-t).exp() * poly_ratio_factor(params, m);
        let tail = if rho < 1.0 {
            log_term_bound(params, t, m).exp() / (1.0 - rho)
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

/// ℋ_t^{α,β}(θ, φ) by its spectral series.
pub fn poisson_series(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let t = point.t();
    let (n, tail) = poisson_truncation(params, t, trunc)?;
    let rec = Recurrence::new(params, n);
    let half_s = 0.5 * params.s();
    let scale = (params.s() * LN_2).exp();
    let (x, y) = if point.x() <= point.y() {
        (point.x(), point.y())
    } else {
        (point.y(), point.x())
    };
    let (sum, abs) = spectral_sum(&rec, x, y, n, |k| {
        scale * (-t * (k as f64 + half_s).abs()).exp()
    });
    Ok(KernelValue {
        value: sum,
        tail_bound: tail,
        round_bound: rounding_factor(n) * abs,
        terms_used: n + 1,
        certified: params.in_theorem_range(),
    })
}

/// ℍ_t = F(θ)F(φ) ℋ_t, the function-setting Poisson kernel.
pub fn poisson_func(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let h = poisson_series(params, point, trunc)?;
    let f = func_factor(params, point.theta()) * func_factor(params, point.phi());
    if f.is_infinite() {
        return Ok(KernelValue {
            value: f64::INFINITY,
            certified: false,
            ..h
        });
    }
    Ok(h.scaled(f))
}

/// ℍ_t summed directly as Σ e^{−t|n+S/2|} φ_n(θ) φ_n(φ).
pub fn poisson_func_direct(
    params: JacobiParams,
    point: HeatPoint,
    trunc: SeriesTruncation,
) -> Result<KernelValue> {
    let t = point.t();
    let (n, tail) = poisson_truncation(params, t, trunc)?;
    let rec = Recurrence::new(params, n);
    let half_s = 0.5 * params.s();
    let fx = func_factor(params, point.theta());
    let fy = func_factor(params, point.phi());
    let px = rec.eval(point.x(), n);
    let py = rec.eval(point.y(), n);
    let scale = (half_s * LN_2).exp();
    let mut sum = 0.0;
    let mut abs = 0.0;
    for k in 0..=n {
        let r = rec.inv_norm(k).sqrt() * scale;
        let term = (-t * (k as f64 + half_s).abs()).exp() * (r * fx * px[k]) * (r * fy * py[k]);
        sum += term;
        abs += term.abs();
    }
    Ok(KernelValue {
        value: sum,
        tail_bound: tail * fx * fy,
        round_bound: rounding_factor(n) * abs,
        terms_used: n + 1,
        certified: params.in_theorem_range() && sum.is_finite(),
    })
}

/// ℋ_t^{α,β}(θ, φ) from the integral representation, to relative tolerance 1e-8.
pub fn poisson_integral(params: JacobiParams, point: HeatPoint) -> Result<f64> {
    poisson_integral_with(params, point, POISSON_INTEGRAL_TOL).map(|(v, _)| v)
}

/// ℋ_t = c sinh(t/2) ∬ (cosh(t/2) − 1 + q)^{−α−β−2} dΠ_α(u) dΠ_β(v), with
/// q = 1 − u sin(θ/2)sin(φ/2) − v cos(θ/2)cos(φ/2) and c = 2^{−S}/𝔪(0, π) = 1/h_0.
///
/// Returns the value and the degree at which the doubling converged. Plain Gauss rules are
/// tried first; integrands peaked at the corner u = v = 1 fall back to graded rules.
pub fn poisson_integral_with(
    params: JacobiParams,
    point: HeatPoint,
    rel_tol: f64,
) -> Result<(f64, usize)> {
    params.require_theorem_range("poisson_integral")?;
    let t = point.t();
    check_t_positive(t)?;
    let (th, ph) = (point.theta(), point.phi());
    let a = (0.5 * th).sin() * (0.5 * ph).sin();
    let b = (0.5 * th).cos() * (0.5 * ph).cos();
    let d = (0.25 * (th - ph)).sin();
    let sh = (0.25 * t).sinh();
    // cosh(t/2) − 1 + q with q rewritten in the gaps 1 − u, 1 − v
    let base = 2.0 * sh * sh + 2.0 * d * d;
    let expo = -(params.s() + 1.0);
    let prefactor = (0.5 * t).sinh() * (-log_jacobi_norm(params, 0)).exp();

    let eval_with = |ra: &PiRule, rb: &PiRule| -> Result<f64> {
        let gv: Vec<(f64, f64)> = (0..rb.len())
            .map(|j| {
                let (_, om, _, w) = rb.node(j);
                (b * om, w)
            })
            .collect();
        let mut total = 0.0;
        for i in 0..ra.len() {
            let (_, om, _, wu) = ra.node(i);
            let row_base = base + a * om;
            let mut row = 0.0;
            for &(bv, wv) in &gv {
                row += wv * (row_base + bv).powf(expo);
            }
            total += wu * row;
        }
        if !total.is_finite() {
            return Err(Error::NonFinite {
                node: f64::NAN,
                value: total,
            });
        }
        Ok(total)
    };

    let gauss = |m: usize| -> Result<f64> {
        let ra = RuleFamily::Pi { nu: params.alpha() }.rule(m)?;
        let rb = RuleFamily::Pi { nu: params.beta() }.rule(m)?;
        eval_with(&ra, &rb)
    };
    let first = doubling_driver(64, 512, rel_tol, gauss);
    let (val, deg) = match first {
        Ok(r) => r,
        Err(Error::Quadrature { .. }) => {
            let graded = |m: usize| -> Result<f64> {
                let ra = RuleFamily::GradedPi { nu: params.alpha() }.rule(m)?;
                let rb = RuleFamily::GradedPi { nu: params.beta() }.rule(m)?;
                eval_with(&ra, &rb)
            };
            doubling_driver(8, 128, rel_tol, graded)?
        }
        Err(e) => return Err(e),
    };
    Ok((prefactor * val, deg))
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
    fn four_atom_case_is_closed_form() {
        // (−1/2, −1/2): ℋ = (1/2π)[P(θ−φ) + P(θ+φ)] with the circle Poisson kernel
        // P(u) = sinh t / (cosh t − cos u)
        let pt = HeatPoint::new(0.8, 2.1, 0.3).unwrap();
        let pk = |u: f64| (0.3f64).sinh() / ((0.3f64).cosh() - u.cos());
        let expect = (pk(0.8 - 2.1) + pk(0.8 + 2.1)) / (2.0 * PI);
        let v = poisson_integral(p(-0.5, -0.5), pt).unwrap();
        assert_relative_eq!(v, expect, max_relative = 1e-13);
        let s = poisson_series(p(-0.5, -0.5), pt, SeriesTruncation::poisson_default()).unwrap();
        assert_relative_eq!(s.value, expect, max_relative = 1e-12);
    }

    #[test]
    fn series_matches_integral() {
        for q in [p(0.0, 0.0), p(0.5, 1.5), p(2.3, 0.7), p(-0.5, 0.3)] {
            for &(th, ph, t) in &[
                (0.3, 0.5, 0.05),
                (1.0, 2.5, 0.5),
                (0.0, 0.0, 0.2),
                (PI, 1.0, 2.0),
                (1.5, 1.5, 0.02),
            ] {
                let pt = HeatPoint::new(th, ph, t).unwrap();
                let s = poisson_series(q, pt, SeriesTruncation::poisson_default()).unwrap();
                let i = poisson_integral(q, pt).unwrap();
                assert!(
                    (s.value - i).abs() <= 1e-6 * i + s.error_bound(),
                    "{q} θ={th} φ={ph} t={t}: {} vs {i}",
                    s.value
                );
            }
        }
    }

    #[test]
    fn large_t_dominant_term() {
        let q = p(0.5, 1.5);
        let pt = HeatPoint::new(0.4, 1.9, 30.0).unwrap();
        let s = poisson_series(q, pt, SeriesTruncation::poisson_default()).unwrap();
        let lead = (q.s() * LN_2 - 30.0 * 0.5 * q.s() - log_jacobi_norm(q, 0)).exp();
        assert_relative_eq!(s.value, lead, max_relative = 1e-10);
    }

    #[test]
    fn func_two_ways() {
        for q in [p(0.0, 0.0), p(2.3, 0.7)] {
            let pt = HeatPoint::new(0.7, 2.0, 0.1).unwrap();
            let a = poisson_func(q, pt, SeriesTruncation::poisson_default()).unwrap();
            let b = poisson_func_direct(q, pt, SeriesTruncation::poisson_default()).unwrap();
            assert_relative_eq!(a.value, b.value, max_relative = 1e-10);
        }
    }

    #[test]
    fn symmetric_and_positive() {
        let q = p(2.3, 0.7);
        let pt = HeatPoint::new(0.2, 2.9, 0.01).unwrap();
        let a = poisson_series(q, pt, SeriesTruncation::poisson_default()).unwrap();
        let b = poisson_series(q, pt.swapped(), SeriesTruncation::poisson_default()).unwrap();
        assert_eq!(a.value, b.value);
        assert!(poisson_integral(q, pt).unwrap() > 0.0);
        assert!(poisson_integral(p(-0.7, 0.0), pt).is_err());
    }
}
