//! Closed-form bound functions and the fitting of their constants over grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;
use crate::kernels::{
    dirichlet_neumann_oracle_trig, log_trig_factor, HeatPoint, KernelValue, SeriesTruncation,
    SpectralTable,
};
use crate::quadrature::{adaptive_doubling, integrate_gaps, PointMassRule, RuleFamily};
use crate::specfun::{log_bessel_i, log_gamma_pos, JacobiParams};

/// Relative accuracy a kernel value needs before it takes part in a fit.
pub const RESOLVED_REL: f64 = 1e-6;
/// Largest admissible fitted C.
pub const MAX_SCALE: f64 = 1e6;
/// Range searched for the Gaussian rates.
pub const RATE_FLOOR: f64 = 1e-3;
pub const RATE_CEIL: f64 = 1e2;

fn gauss(c: f64, d2: f64, t: f64) -> f64 {
    (-c * d2 / t).exp()
}

/// [t + θφ]^{−α−1/2} [t + (π−θ)(π−φ)]^{−β−1/2} t^{−1/2} exp(−c(θ−φ)²/t).
pub fn main_envelope(params: JacobiParams, point: HeatPoint, c: f64) -> f64 {
    log_main_envelope0(params, point).exp()
        * gauss(c, (point.theta() - point.phi()).powi(2), point.t())
}

/// ln of [`main_envelope`] at c = 0.
pub fn log_main_envelope0(params: JacobiParams, point: HeatPoint) -> f64 {
    let (th, ph, t) = (point.theta(), point.phi(), point.t());
    -(params.alpha() + 0.5) * (t + th * ph).ln()
        - (params.beta() + 0.5) * (t + (PI - th) * (PI - ph)).ln()
        - 0.5 * t.ln()
}

/// (t + sin(θ/2)sin(φ/2))^{−α−1/2} (t + cos(θ/2)cos(φ/2))^{−β−1/2} t^{−1/2} exp(−c(θ−φ)²/t).
pub fn trig_envelope(params: JacobiParams, point: HeatPoint, c: f64) -> f64 {
    let (th, ph, t) = (point.theta(), point.phi(), point.t());
    let s = (0.5 * th).sin() * (0.5 * ph).sin();
    let co = (0.5 * th).cos() * (0.5 * ph).cos();
    (t + s).powf(-params.alpha() - 0.5) * (t + co).powf(-params.beta() - 0.5) / t.sqrt()
        * gauss(c, (th - ph).powi(2), t)
}

/// (t² + θ² + φ²)^{−α−1/2} (t² + (π−θ)² + (π−φ)²)^{−β−1/2} t / (t² + (θ−φ)²).
pub fn poisson_envelope(params: JacobiParams, point: HeatPoint) -> f64 {
    let (th, ph, t) = (point.theta(), point.phi(), point.t());
    let t2 = t * t;
    (t2 + th * th + ph * ph).powf(-params.alpha() - 0.5)
        * (t2 + (PI - th).powi(2) + (PI - ph).powi(2)).powf(-params.beta() - 0.5)
        * t
        / (t2 + (th - ph).powi(2))
}

/// t^{−(2γ+2)} with γ = max(α, β, −1/2).
pub fn rough_bound(params: JacobiParams, t: f64) -> f64 {
    t.powf(-(2.0 * params.gamma() + 2.0))
}

/// Φ_{ε,δ}(x) = (1−x)^{ε/2} (1+x)^{δ/2}, with 0⁰ = 1.
pub fn comparison_factor(eps: f64, delta: f64, x: f64) -> Result<f64> {
    if !(eps >= 0.0 && delta >= 0.0) || !(-1.0..=1.0).contains(&x) {
        return Err(domain(
            "comparison_factor",
            format!("need ε, δ ≥ 0 and x in [-1, 1], got {eps}, {delta}, {x}"),
        ));
    }
    Ok((1.0 - x).powf(0.5 * eps) * (1.0 + x).powf(0.5 * delta))
}

/// The auxiliary F_t and its surrogate 1 + t / cos((θ−φ)/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FtDiagnostic {
    pub value: f64,
    pub surrogate: f64,
}

/// F_t(θ, φ) = min(1 + t/(sin(θ/2)sin(φ/2)), 1 + t/(cos(θ/2)cos(φ/2))).
pub fn ft_diagnostic(point: HeatPoint) -> FtDiagnostic {
    let (th, ph, t) = (point.theta(), point.phi(), point.t());
    let s = (0.5 * th).sin() * (0.5 * ph).sin();
    let c = (0.5 * th).cos() * (0.5 * ph).cos();
    let value = (1.0 + t / s).min(1.0 + t / c);
    FtDiagnostic {
        value,
        surrogate: 1.0 + t / (0.5 * (th - ph)).cos(),
    }
}

/// Fitted constants of a two-sided bound C^{−1} env·e^{−c₁D} ≤ K ≤ C env·e^{−c₂D}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstants {
    #[serde(rename = "C")]
    pub scale: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "horizon_T")]
    pub horizon: f64,
}

impl EnvelopeConstants {
    pub fn new(scale: f64, c1: f64, c2: f64, horizon: f64) -> Result<Self> {
        if !(scale >= 1.0 && c2 > 0.0 && c1 >= c2 && horizon > 0.0)
            || !scale.is_finite()
            || !c1.is_finite()
        {
            return Err(Error::InvalidParams(format!(
                "envelope constants need C >= 1, c1 >= c2 > 0, T > 0 (got {scale}, {c1}, {c2}, {horizon})"
            )));
        }
        Ok(Self {
            scale,
            c1,
            c2,
            horizon,
        })
    }
}

/// One observation for a fit: ln(K / env₀) and the Gaussian exponent argument D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSample {
    pub point: HeatPoint,
    pub log_ratio: f64,
    pub gauss_arg: f64,
}

/// Which inequality of a two-sided bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundSide {
    Upper,
    Lower,
}

/// A grid point singled out by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstPoint {
    pub point: HeatPoint,
    pub side: BoundSide,
    pub log_ratio: f64,
}

/// Diagnostics of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub resolved: usize,
    pub skipped: usize,
    /// True for parameters outside α, β ≥ −1/2, where the bounds are only conjectured.
    pub conjectural: bool,
    pub min_log_ratio: f64,
    pub max_log_ratio: f64,
    /// Upper and lower bound violations that would occur with C slightly smaller.
    pub worst_points: Vec<WorstPoint>,
}

/// Fit C, c₁, c₂ to samples r_i = ln(K_i/env₀_i), D_i.
///
/// C is the smallest value for which both rates can stay inside [RATE_FLOOR, RATE_CEIL]:
/// ln C = max(0, max_i (r_i + RATE_FLOOR·D_i), max_i (−r_i − RATE_CEIL·D_i)).
/// At that C the upper bound holds for every c ≤ c₂max = min_{D>0} (ln C − r)/D, and the
/// lower bound for every c ≥ c₁min = max_{D>0} (−ln C − r)/D. The reported pair brackets
/// the two: c₂ = min(c₂max, c₁min), c₁ = max(c₂max, c₁min), so c₂ ≤ c₁ and both bounds hold.
pub fn fit_samples(
    samples: &[FitSample],
    horizon: f64,
    conjectural: bool,
) -> Result<(EnvelopeConstants, FitReport)> {
    if samples.is_empty() {
        return Err(Error::Infeasible("no resolved samples to fit".into()));
    }
    let mut ln_c: f64 = 0.0;
    for s in samples {
        ln_c = ln_c
            .max(s.log_ratio + RATE_FLOOR * s.gauss_arg)
            .max(-s.log_ratio - RATE_CEIL * s.gauss_arg);
    }
    if ln_c > MAX_SCALE.ln() {
        return Err(Error::Infeasible(format!(
            "required C = {:e} exceeds {MAX_SCALE:e}",
            ln_c.exp()
        )));
    }
    let mut c2max = f64::INFINITY;
    let mut c1min = f64::NEG_INFINITY;
    let mut up: Option<(f64, &FitSample)> = None;
    let mut lo: Option<(f64, &FitSample)> = None;
    for s in samples {
        if s.gauss_arg > 0.0 {
            c2max = c2max.min((ln_c - s.log_ratio) / s.gauss_arg);
            c1min = c1min.max((-ln_c - s.log_ratio) / s.gauss_arg);
        }
    }
    let c2max = c2max.min(RATE_CEIL);
    let c1min = c1min.max(RATE_FLOOR);
    let c2 = c2max.min(c1min);
    let c1 = c2max.max(c1min);
    // slack of each side at the fitted constants; the smallest slack marks the tight point
    for s in samples {
        let su = ln_c - c2 * s.gauss_arg - s.log_ratio;
        let sl = s.log_ratio + ln_c + c1 * s.gauss_arg;
        if up.map_or(true, |(v, _)| su < v) {
            up = Some((su, s));
        }
        if lo.map_or(true, |(v, _)| sl < v) {
            lo = Some((sl, s));
        }
    }
    let tol = 1e-9 * (1.0 + ln_c);
    if up.is_some_and(|(v, _)| v < -tol) || lo.is_some_and(|(v, _)| v < -tol) {
        return Err(Error::Infeasible(
            "fitted constants fail their own samples".into(),
        ));
    }
    let mut worst_points = Vec::new();
    if let Some((_, s)) = up {
        worst_points.push(WorstPoint {
            point: s.point,
            side: BoundSide::Upper,
            log_ratio: s.log_ratio,
        });
    }
    if let Some((_, s)) = lo {
        worst_points.push(WorstPoint {
            point: s.point,
            side: BoundSide::Lower,
            log_ratio: s.log_ratio,
        });
    }
    let (min_r, max_r) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| {
            (a.min(s.log_ratio), b.max(s.log_ratio))
        });
    let constants = EnvelopeConstants::new(ln_c.exp(), c1, c2, horizon)?;
    let report = FitReport {
        resolved: samples.len(),
        skipped: 0,
        conjectural,
        min_log_ratio: min_r,
        max_log_ratio: max_r,
        worst_points,
    };
    Ok((constants, report))
}

/// Two-sided fit of G against [`main_envelope`] over a grid.
///
/// Points whose value is not known to relative [`RESOLVED_REL`] (deep Gaussian tails,
/// where the value is below the series' absolute tail tolerance) are skipped and counted.
pub fn fit_constants<F>(
    params: JacobiParams,
    grid: &GridSpec,
    kernel_fn: F,
) -> Result<(EnvelopeConstants, FitReport)>
where
    F: Fn(HeatPoint) -> Result<KernelValue> + Sync,
{
    let values: Vec<KernelValue> = grid
        .points()
        .into_par_iter()
        .map(&kernel_fn)
        .collect::<Result<_>>()?;
    fit_grid_values(params, grid, &values)
}

/// G_t(cos θ, cos φ) by the spectral series at every grid point, in [`GridSpec::points`] order.
pub fn heat_grid_values(params: JacobiParams, grid: &GridSpec) -> Result<Vec<KernelValue>> {
    let (th, ph) = (grid.thetas(), grid.phis());
    let angles: Vec<f64> = th.iter().chain(&ph).copied().collect();
    let trunc = SeriesTruncation::default();
    let table = SpectralTable::for_heat(params, &angles, grid.t_values(), trunc)?;
    let off = th.len();
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid.t_values() {
        let w = table.heat_weights(t, trunc)?;
        let block: Vec<KernelValue> = (0..th.len() * ph.len())
            .into_par_iter()
            .map(|k| table.value(k / ph.len(), off + k % ph.len(), &w))
            .collect();
        out.extend(block);
    }
    Ok(out)
}

/// [`heat_grid_values`] from the closed forms; only for α, β ∈ {−1/2, 1/2}.
pub fn oracle_grid_values(params: JacobiParams, grid: &GridSpec) -> Result<Vec<KernelValue>> {
    grid.points()
        .into_par_iter()
        .map(|p| {
            let v =
                dirichlet_neumann_oracle_trig(params, p)? / log_trig_factor(params, p.t()).exp();
            Ok(KernelValue::exact(v))
        })
        .collect()
}

/// [`fit_constants`] for values already computed in [`GridSpec::points`] order.
pub fn fit_grid_values(
    params: JacobiParams,
    grid: &GridSpec,
    values: &[KernelValue],
) -> Result<(EnvelopeConstants, FitReport)> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a grid of {} points",
            values.len(),
            grid.len()
        )));
    }
    let mut samples = Vec::with_capacity(values.len());
    let mut skipped = 0;
    for (p, v) in grid.points().into_iter().zip(values) {
        if !v.is_resolved(RESOLVED_REL) {
            skipped += 1;
            continue;
        }
        samples.push(FitSample {
            point: p,
            log_ratio: v.value.ln() - log_main_envelope0(params, p),
            gauss_arg: (p.theta() - p.phi()).powi(2) / p.t(),
        });
    }
    let (c, mut report) = fit_samples(&samples, grid.horizon(), !params.in_theorem_range())?;
    report.skipped = skipped;
    Ok((c, report))
}

/// ∫ e^{zs} dΠ_ν(s) by quadrature and in closed form Γ(ν+1)(2/z)^ν I_ν(z), both scaled by e^{−z}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceIntegral {
    pub quadrature: f64,
    pub closed_form: f64,
    /// quadrature / ((1+z)^{−ν−1/2}), i.e. the integral over (1+z)^{−ν−1/2} e^z.
    pub ratio: f64,
}

pub fn laplace_pi_integral(nu: f64, z: f64) -> Result<LaplaceIntegral> {
    if !(z >= 0.0) || !(nu >= -0.5) {
        return Err(domain(
            "laplace_pi_integral",
            format!("need ν ≥ −1/2 and z ≥ 0, got {nu}, {z}"),
        ));
    }
    // e^{z(s−1)} = e^{−z(1−s)}
    let quadrature = if nu == -0.5 {
        integrate_gaps(&PointMassRule, |_, om, _| (-z * om).exp())?
    } else {
        let family = RuleFamily::GradedPi { nu };
        adaptive_doubling_gaps(family, |om| (-z * om).exp())?
    };
    let closed_form = if z == 0.0 {
        1.0
    } else {
        (log_gamma_pos(nu + 1.0) + nu * (2.0 / z).ln() + log_bessel_i(nu, z)? - z).exp()
    };
    let ratio = quadrature * (1.0 + z).powf(nu + 0.5);
    Ok(LaplaceIntegral {
        quadrature,
        closed_form,
        ratio,
    })
}

fn adaptive_doubling_gaps(family: RuleFamily, f: impl Fn(f64) -> f64) -> Result<f64> {
    crate::quadrature::doubling_driver(family.initial_degree(), family.cap(), 1e-10, |m| {
        integrate_gaps(&family.rule(m)?, |_, om, _| f(om))
    })
    .map(|(v, _)| v)
}

/// Arguments of the two-parameter integral bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntEstArgs {
    pub kappa: f64,
    pub gamma: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub d: f64,
}

/// [∫ dΠ_ν(s) / ((D − Bs)^κ (A − Bs)^γ)] / [(D−B)^{−κ} A^{−ν−1/2} (A−B)^{−γ+ν+1/2}].
pub fn int_est_ratio(args: IntEstArgs) -> Result<f64> {
    let IntEstArgs {
        kappa,
        gamma,
        nu,
        a,
        b,
        d,
    } = args;
    if !(kappa >= 0.0 && nu >= -0.5 && gamma > nu + 0.5 && 0.0 < b && b < a && a < d) {
        return Err(domain(
            "int_est_ratio",
            format!("inadmissible arguments {args:?}"),
        ));
    }
    // D − Bs = (D − B) + B(1 − s), A − Bs = (A − B) + B(1 − s)
    let (dm, am) = (d - b, a - b);
    let f = |om: f64| (dm + b * om).powf(-kappa) * (am + b * om).powf(-gamma);
    let integral = if nu == -0.5 {
        integrate_gaps(&PointMassRule, |_, om, _| f(om))?
    } else {
        let family = RuleFamily::GradedPi { nu };
        crate::quadrature::doubling_driver(family.initial_degree(), family.cap(), 1e-8, |m| {
            integrate_gaps(&family.rule(m)?, |_, om, _| f(om))
        })?
        .0
    };
    let rhs = dm.powf(-kappa) * a.powf(-nu - 0.5) * am.powf(-gamma + nu + 0.5);
    Ok(integral / rhs)
}

/// ∫ e^{zs} dΠ_ν via the Gauss family, for callers that want the plain doubling path.
pub fn laplace_pi_gauss(nu: f64, z: f64) -> Result<f64> {
    adaptive_doubling(RuleFamily::Pi { nu }, |s| (z * (s - 1.0)).exp(), 1e-10).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{heat_series, SeriesTruncation};
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    fn pt(a: f64, b: f64, t: f64) -> HeatPoint {
        HeatPoint::new(a, b, t).unwrap()
    }

    #[test]
    fn envelope_arithmetic() {
        let v = main_envelope(p(0.0, 0.0), pt(PI / 2.0, PI / 2.0, 0.01), 1.0);
        assert_relative_eq!(v, 10.0 / (0.01 + PI * PI / 4.0), max_relative = 1e-14);
        let v = main_envelope(p(-0.5, -0.5), pt(0.3, 1.0, 0.1), 2.0);
        assert_relative_eq!(
            v,
            (0.1f64).powf(-0.5) * (-2.0 * 0.49 / 0.1f64).exp(),
            max_relative = 1e-14
        );
        let v = trig_envelope(p(-0.5, -0.5), pt(1.0, 1.0, 0.25), 3.0);
        assert_relative_eq!(v, 2.0, max_relative = 1e-14);
        let v = poisson_envelope(p(-0.5, -0.5), pt(0.3, 1.0, 0.1));
        assert_relative_eq!(v, 0.1 / (0.01 + 0.49), max_relative = 1e-14);
        let h = PI / 2.0;
        let v = poisson_envelope(p(0.0, 0.0), pt(h, h, 1.0));
        assert_relative_eq!(v, (1.0 + 2.0 * h * h).powi(-1), max_relative = 1e-14);
    }

    #[test]
    fn rough_and_comparison() {
        assert_relative_eq!(rough_bound(p(0.0, 0.0), 0.5), 4.0, max_relative = 1e-15);
        assert_relative_eq!(rough_bound(p(-0.5, -0.5), 0.5), 2.0, max_relative = 1e-15);
        assert_eq!(comparison_factor(0.0, 0.0, 0.3).unwrap(), 1.0);
        assert_eq!(comparison_factor(1.0, 2.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(comparison_factor(2.0, 0.0, 0.5).unwrap(), 0.5);
        assert_eq!(comparison_factor(0.0, 1.0, 1.0).unwrap(), 2f64.sqrt());
        assert_eq!(comparison_factor(0.0, 2.0, -1.0).unwrap(), 0.0);
        assert!(comparison_factor(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ft_values() {
        let d = ft_diagnostic(pt(PI / 2.0, PI / 2.0, 1.0));
        assert_relative_eq!(d.value, 3.0, max_relative = 1e-14);
        assert_relative_eq!(d.surrogate, 2.0, max_relative = 1e-14);
        let d = ft_diagnostic(pt(1.0, 2.0, 1e-12));
        assert!((d.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn envelopes_are_comparable() {
        let g = GridSpec::new(24, 24, vec![1e-3, 0.1, 1.0]).unwrap();
        let q = p(2.3, 0.7);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for x in g.points() {
            let r = main_envelope(q, x, 0.0) / trig_envelope(q, x, 0.0);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        // x/π ≤ sin(x/2) ≤ x/2 on [0, π] gives main/trig ∈ [π^{−2S}, 1]
        assert!(
            lo >= PI.powf(-2.0 * q.s()) * (1.0 - 1e-12) && hi <= 1.0 + 1e-12,
            "{lo} {hi}"
        );
    }

    #[test]
    fn single_diagonal_point() {
        let s = FitSample {
            point: pt(1.0, 1.0, 0.1),
            log_ratio: 0.7,
            gauss_arg: 0.0,
        };
        let (c, _) = fit_samples(&[s], 0.1, false).unwrap();
        assert_relative_eq!(c.scale, 0.7f64.exp(), max_relative = 1e-14);
        assert_eq!(c.c2, RATE_FLOOR);
        assert_eq!(c.c1, RATE_CEIL);
    }

    #[test]
    fn infeasible_is_reported() {
        let s = FitSample {
            point: pt(1.0, 1.0, 0.1),
            log_ratio: 20.0,
            gauss_arg: 0.0,
        };
        assert!(matches!(
            fit_samples(&[s], 0.1, false),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn legendre_fit_on_small_grid() {
        let q = p(0.0, 0.0);
        let g = GridSpec::new(12, 12, vec![0.01, 0.1, 1.0]).unwrap();
        let (c, rep) = fit_constants(q, &g, |x| {
            heat_series(q, x.x(), x.y(), x.t(), SeriesTruncation::default())
        })
        .unwrap();
        assert!(c.scale <= 1e3, "{c:?}");
        assert!(c.c1 >= c.c2);
        assert!(!rep.conjectural);
        assert!(rep.resolved > 0);
    }

    #[test]
    fn laplace_routes_agree() {
        for &nu in &[0.0, 0.7, 2.3] {
            for &z in &[0.0, 1.0, 10.0, 1e3, 1e4] {
                let l = laplace_pi_integral(nu, z).unwrap();
                assert_relative_eq!(l.quadrature, l.closed_form, max_relative = 1e-8);
            }
        }
        let l = laplace_pi_integral(-0.5, 3.0).unwrap();
        assert_relative_eq!(
            l.quadrature,
            (3.0f64).cosh() * (-3.0f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            laplace_pi_gauss(0.7, 5.0).unwrap(),
            laplace_pi_integral(0.7, 5.0).unwrap().closed_form,
            max_relative = 1e-9
        );
    }

    #[test]
    fn int_est_in_easy_case() {
        let r = int_est_ratio(IntEstArgs {
            kappa: 1.0,
            gamma: 2.0,
            nu: 0.0,
            a: 3.0,
            b: 1.0,
            d: 5.0,
        })
        .unwrap();
        assert!(r > 0.1 && r < 10.0);
        assert!(int_est_ratio(IntEstArgs {
            kappa: 1.0,
            gamma: 0.2,
            nu: 0.0,
            a: 3.0,
            b: 1.0,
            d: 5.0
        })
        .is_err());
    }
}
