//! Laguerre heat kernel of Hermite type:
//! K_t^α(x, y) = (2 sinh t)^{−1} exp(−¼ coth t (x² + y²)) (xy)^{−α} I_α(xy / (2 sinh t)).

use crate::error::{domain, Result};
use crate::specfun::log_bessel_i;

/// ln K_t^α(x, y), computed entirely in log space.
pub fn log_laguerre_kernel(alpha: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(domain(
            "laguerre_kernel",
            format!("alpha must exceed -1, got {alpha}"),
        ));
    }
    if !(x > 0.0 && y > 0.0 && t > 0.0) || !(x.is_finite() && y.is_finite() && t.is_finite()) {
        return Err(domain(
            "laguerre_kernel",
            format!("x, y, t must be positive, got {x}, {y}, {t}"),
        ));
    }
    // ln(2 sinh t) = t + ln(1 − e^{−2t})
    let log_2sinh = t + (-(-2.0 * t).exp_m1()).ln();
    let coth = 1.0 / t.tanh();
    let xy = x * y;
    let z = (xy.ln() - log_2sinh).exp();
    Ok(-log_2sinh - 0.25 * coth * (x * x + y * y) - alpha * xy.ln() + log_bessel_i(alpha, z)?)
}

/// K_t^α(x, y); underflows to 0 rather than failing.
pub fn laguerre_kernel(alpha: f64, x: f64, y: f64, t: f64) -> Result<f64> {
    log_laguerre_kernel(alpha, x, y, t).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::log_gamma;
    use approx::assert_relative_eq;

    #[test]
    fn symmetric() {
        let a = laguerre_kernel(0.7, 0.3, 1.9, 0.2).unwrap();
        let b = laguerre_kernel(0.7, 1.9, 0.3, 0.2).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-15);
    }

    #[test]
    fn small_argument_leading_term() {
        let (alpha, x, y, t) = (1.3f64, 0.01f64, 0.02f64, 0.5f64);
        let s2 = 2.0 * t.sinh();
        let z = x * y / s2;
        assert!(z <= 1e-3);
        let lead = (-0.25 / t.tanh() * (x * x + y * y)).exp() / s2 * s2.powf(-alpha)
            / (2f64.powf(alpha) * log_gamma(alpha + 1.0).unwrap().exp());
        let k = laguerre_kernel(alpha, x, y, t).unwrap();
        assert_relative_eq!(k, lead, max_relative = 1e-5);
    }

    #[test]
    fn large_arguments_stay_finite() {
        let v = log_laguerre_kernel(0.5, 40.0, 40.0, 1e-3).unwrap();
        assert!(v.is_finite());
        assert!(laguerre_kernel(0.0, -1.0, 1.0, 1.0).is_err());
    }
}
