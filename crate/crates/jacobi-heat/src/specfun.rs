//! Scalar special functions and Jacobi polynomial primitives.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Type parameters (α, β) of the Jacobi weight (1−x)^α(1+x)^β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct RawParams {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawParams> for JacobiParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        JacobiParams::new(raw.alpha, raw.beta)
    }
}

impl JacobiParams {
    /// Validates α, β > −1.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParams(format!(
                "type parameters must satisfy alpha, beta > -1 (got alpha = {alpha}, beta = {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True iff α, β ≥ −1/2, the range where the two-sided bounds are proved.
    pub fn in_theorem_range(&self) -> bool {
        self.alpha >= -0.5 && self.beta >= -0.5
    }

    /// α + β + 1.
    pub fn s(&self) -> f64 {
        self.alpha + self.beta + 1.0
    }

    /// Eigenvalue n(n + α + β + 1) of the Jacobi operator.
    pub fn eigenvalue(&self, n: usize) -> f64 {
        let n = n as f64;
        n * (n + self.s())
    }

    /// γ = max{α, β, −1/2}.
    pub fn gamma(&self) -> f64 {
        self.alpha.max(self.beta).max(-0.5)
    }

    /// Parameters with α and β swapped; G^{α,β}(−x,−y) = G^{β,α}(x,y).
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    pub(crate) fn require_theorem_range(&self, what: &str) -> Result<()> {
        if self.in_theorem_range() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "{what} requires alpha, beta >= -1/2 (got alpha = {}, beta = {})",
                self.alpha, self.beta
            )))
        }
    }
}

impl std::fmt::Display for JacobiParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.alpha, self.beta)
    }
}

const LANCZOS_G: f64 = 10.900511;
const LANCZOS_D: [f64; 11] = [
    2.485_740_891_387_535_655_46e-5,
    1.051_423_785_817_219_742_10,
    -3.456_870_972_220_162_354_69,
    4.512_277_094_668_948_237_00,
    -2.982_852_253_235_766_557_21,
    1.056_397_115_771_267_130_77,
    -1.954_287_731_916_458_695_83e-1,
    1.709_705_434_044_412_243_07e-2,
    -5.719_261_174_043_057_812_83e-4,
    4.633_994_733_599_056_367_08e-6,
    -2.719_949_084_886_077_039_10e-9,
];
/// ln(2·sqrt(e/π))
const LN_2_SQRT_E_OVER_PI: f64 =
    0.620_782_237_635_245_222_345_518_445_781_647_212_251_852_727_902_597_8;
const LN_PI: f64 = 1.144_729_885_849_400_174_143_427_351_353_058_711_647_294_812_915_311_6;

/// ln Γ(x) for x > 0 (Lanczos approximation, reflection below 1/2).
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(
            "log_gamma",
            format!("argument must be positive and finite, got {x}"),
        ));
    }
    Ok(log_gamma_pos(x))
}

pub(crate) fn log_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        let s = LANCZOS_D
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_D[0], |s, (k, d)| s + d / (k as f64 - x));
        LN_PI
            - (PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_G) / std::f64::consts::E).ln()
    } else {
        let s = LANCZOS_D
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_D[0], |s, (k, d)| s + d / (x + k as f64 - 1.0));
        s.ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / std::f64::consts::E).ln()
    }
}

// B_{2k} / (2k(2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_series(y: f64) -> f64 {
    let r = 1.0 / (y * y);
    let mut p = 1.0 / y;
    let mut s = 0.0;
    for c in STIRLING {
        s += c * p;
        p *= r;
    }
    s
}

/// ln Γ(x + d) − ln Γ(x), accurate even when both terms are large.
pub fn log_gamma_ratio(x: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let lo = x.min(x + d);
    if lo < 20.0 {
        // shift up with Γ(z+1) = zΓ(z), then use the Stirling difference
        let k = (20.0 - lo).ceil();
        let mut shift = 0.0;
        let mut j = 0.0;
        while j < k {
            shift += (d / (x + j)).ln_1p();
            j += 1.0;
        }
        return log_gamma_ratio(x + k, d) - shift;
    }
    let y = x + d;
    (x - 0.5) * (d / x).ln_1p() + d * y.ln() - d + stirling_series(y) - stirling_series(x)
}

/// ln binom(n + q, n) = ln Γ(n+q+1) − ln Γ(n+1) − ln Γ(q+1).
pub fn log_binomial(n: usize, q: f64) -> f64 {
    log_gamma_ratio(n as f64 + 1.0, q) - log_gamma_pos(q + 1.0)
}

const BESSEL_SWITCH: f64 = 20.0;

/// ln I_ν(z) for ν > −1, z ≥ 0. Returns −∞ for z = 0 and ν > 0.
pub fn log_bessel_i(nu: f64, z: f64) -> Result<f64> {
    if !(nu > -1.0) || !nu.is_finite() {
        return Err(domain(
            "bessel_i",
            format!("order must exceed -1, got {nu}"),
        ));
    }
    if !(z >= 0.0) || !z.is_finite() {
        return Err(domain(
            "bessel_i",
            format!("argument must be finite and non-negative, got {z}"),
        ));
    }
    if z == 0.0 {
        return if nu == 0.0 {
            Ok(0.0)
        } else if nu > 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Err(Error::Overflow {
                func: "bessel_i",
                arg: z,
            })
        };
    }
    if z <= BESSEL_SWITCH {
        // sum_k (z²/4)^k / (k! (ν+1)_k), all terms positive
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= q / (k * (k + nu));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        Ok(nu * (0.5 * z).ln() - log_gamma_pos(nu + 1.0) + sum.ln())
    } else {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0;
        loop {
            k += 1.0;
            let odd = 2.0 * k - 1.0;
            let next = -term * (mu - odd * odd) / (8.0 * k * z);
            if next.abs() >= term.abs() || next == 0.0 {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        Ok(z - 0.5 * (2.0 * PI * z).ln() + sum.ln())
    }
}

/// Modified Bessel function of the first kind I_ν(z).
pub fn bessel_i(nu: f64, z: f64) -> Result<f64> {
    let l = log_bessel_i(nu, z)?;
    if l > f64::MAX.ln() {
        return Err(Error::Overflow {
            func: "bessel_i",
            arg: z,
        });
    }
    Ok(l.exp())
}

/// Values P_0..P_N of the Jacobi polynomials at a fixed argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolySequence {
    pub params: JacobiParams,
    pub argument: f64,
    pub values: Vec<f64>,
}

/// Three-term recurrence coefficients P_n = (A_n x + B_n) P_{n−1} − C_n P_{n−2}, n ≥ 2,
/// together with reciprocal norms 1/h_n.
#[derive(Debug, Clone)]
pub struct Recurrence {
    params: JacobiParams,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    inv_norm: Vec<f64>,
}

impl Recurrence {
    pub fn new(params: JacobiParams, n_max: usize) -> Self {
        let mut r = Self {
            params,
            a: vec![0.0; 2],
            b: vec![0.0; 2],
            c: vec![0.0; 2],
            inv_norm: Vec::new(),
        };
        r.extend(n_max);
        r
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    /// Largest degree covered.
    pub fn n_max(&self) -> usize {
        self.inv_norm.len() - 1
    }

    pub fn extend(&mut self, n_max: usize) {
        let (al, be) = (self.params.alpha, self.params.beta);
        for n in self.a.len()..=n_max.max(1) {
            let nf = n as f64;
            let s = 2.0 * nf + al + be;
            let den = 2.0 * nf * (nf + al + be) * (s - 2.0);
            self.a.push((s - 1.0) * s * (s - 2.0) / den);
            self.b.push((s - 1.0) * (al * al - be * be) / den);
            self.c
                .push(2.0 * (nf + al - 1.0) * (nf + be - 1.0) * s / den);
        }
        for n in self.inv_norm.len()..=n_max {
            // re-anchor the product recurrence periodically to keep drift at the ulp level
            let v = if n % 64 == 0 || n < 2 {
                (-log_jacobi_norm(self.params, n)).exp()
            } else {
                let nf = n as f64;
                let s = self.params.s();
                let ratio = (nf + al) * (nf + be) * (2.0 * nf + s - 2.0)
                    / ((2.0 * nf + s) * (nf + s - 1.0) * nf);
                self.inv_norm[n - 1] / ratio
            };
            self.inv_norm.push(v);
        }
    }

    /// (A_n, B_n, C_n) for n ≥ 2.
    #[inline]
    pub fn coefficients(&self, n: usize) -> (f64, f64, f64) {
        (self.a[n], self.b[n], self.c[n])
    }

    /// 1/h_n.
    pub fn inv_norm(&self, n: usize) -> f64 {
        self.inv_norm[n]
    }

    pub fn inv_norms(&self) -> &[f64] {
        &self.inv_norm
    }

    /// P_0..P_N at x into `out` (length N+1).
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let n_max = out.len().saturating_sub(1);
        assert!(
            n_max <= self.n_max().max(1),
            "recurrence not extended far enough"
        );
        if out.is_empty() {
            return;
        }
        out[0] = 1.0;
        if n_max == 0 {
            return;
        }
        let (al, be) = (self.params.alpha, self.params.beta);
        out[1] = (al + 1.0) + (al + be + 2.0) * (x - 1.0) * 0.5;
        for n in 2..=n_max {
            out[n] = (self.a[n] * x + self.b[n]) * out[n - 1] - self.c[n] * out[n - 2];
        }
    }

    pub fn eval(&self, x: f64, n_max: usize) -> Vec<f64> {
        let mut v = vec![0.0; n_max + 1];
        self.eval_into(x, &mut v);
        v
    }
}

fn check_unit_interval(func: &'static str, x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(domain(
            func,
            format!("argument must lie in [-1, 1], got {x}"),
        ));
    }
    Ok(())
}

/// P_0(x)..P_{n_max}(x) by the three-term recurrence.
pub fn jacobi_poly_seq(params: JacobiParams, x: f64, n_max: usize) -> Result<PolySequence> {
    check_unit_interval("jacobi_poly_seq", x)?;
    let rec = Recurrence::new(params, n_max);
    Ok(PolySequence {
        params,
        argument: x,
        values: rec.eval(x, n_max),
    })
}

/// ln h_n^{α,β}.
pub fn log_jacobi_norm(params: JacobiParams, n: usize) -> f64 {
    let (a, b, s) = (params.alpha, params.beta, params.s());
    if n == 0 {
        // (2n+S)Γ(n+S) collapses to Γ(S+1), which also covers α+β = −1
        return s * LN_2 + log_gamma_pos(a + 1.0) + log_gamma_pos(b + 1.0) - log_gamma_pos(s + 1.0);
    }
    let nf = n as f64;
    s * LN_2 + log_gamma_ratio(nf + 1.0, a) - log_gamma_ratio(nf + b + 1.0, a) - (2.0 * nf + s).ln()
}

/// h_n^{α,β} = ∫ P_n² dρ_{α,β}.
pub fn jacobi_norm(params: JacobiParams, n: usize) -> f64 {
    log_jacobi_norm(params, n).exp()
}

/// Exact max of |P_n^{α,β}| on [−1, 1]: binom(n+q, n), q = max(α, β).
pub fn jacobi_sup_bound(params: JacobiParams, n: usize) -> Result<f64> {
    params.require_theorem_range("jacobi_sup_bound")?;
    Ok(log_binomial(n, params.alpha.max(params.beta)).exp())
}

/// ln of the sup bound, with q clamped at −1/2 (heuristic for alpha or beta below −1/2).
pub(crate) fn log_sup_bound_unchecked(params: JacobiParams, n: usize) -> f64 {
    log_binomial(n, params.alpha.max(params.beta).max(-0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn log_gamma_golden_values() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(
            log_gamma(0.5).unwrap(),
            0.572_364_942_924_700_087_1,
            max_relative = 1e-13
        );
        // mpmath, 40 digits
        assert_relative_eq!(
            log_gamma(7.3).unwrap(),
            7.147_892_523_022_248_692_1,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            log_gamma(10000.25).unwrap(),
            82_102.020_072_160_293_196,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            log_gamma(0.001).unwrap(),
            6.907_178_885_383_853_682_5,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            log_gamma(3.7e-8).unwrap(),
            17.112_347_902_945_208_236,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            log_gamma(170.5).unwrap(),
            704.004_427_734_204_670_79,
            max_relative = 1e-13
        );
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
    }

    #[test]
    fn log_gamma_ratio_matches_difference() {
        for &(x, d) in &[
            (3.0, 0.5),
            (25.0, 2.3),
            (1e4, 0.7),
            (1e4, -0.5),
            (50.0, -0.9),
            (200.0, 3.5),
        ] {
            let direct = log_gamma_pos(x + d) - log_gamma_pos(x);
            assert_relative_eq!(
                log_gamma_ratio(x, d),
                direct,
                max_relative = 1e-11,
                epsilon = 1e-12
            );
        }
        // Γ(n+1/2)/Γ(n) ~ sqrt(n) (1 - 1/(8n))
        let n = 1e6;
        let r = log_gamma_ratio(n, 0.5);
        assert_relative_eq!(r, 0.5 * n.ln() + (-1.0 / (8.0 * n)), max_relative = 1e-12);
    }

    #[test]
    fn bessel_golden_values() {
        let cases = [
            (0.5, 2.0, 2.046_236_863_089_055_036_6),
            (0.0, 1.0, 1.266_065_877_752_008_335_6),
            (1.5, 0.3, 0.044_096_521_002_522_976_637),
            (2.3, 7.5, 184.074_034_545_280_930_55),
            (0.0, 20.0, 43_558_282.559_553_533_272),
            (0.0, 20.5, 70_922_869.834_317_006_649),
            (2.3, 35.0, 99_418_078_548_779.629_308),
            (0.7, 100.0, 1.071_110_980_779_095_439_7e42),
            (-0.3, 3.0, 4.796_375_145_361_403_435_1),
            (-0.3, 50.0, 292_988_872_145_114_784_763.16),
            (5.0, 0.01, 2.604_177_517_380_487_642_4e-14),
            (0.0, 700.0, 1.529_593_347_671_873_736_3e302),
        ];
        for (nu, z, want) in cases {
            assert_relative_eq!(bessel_i(nu, z).unwrap(), want, max_relative = 1e-10);
        }
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
        assert!(matches!(bessel_i(0.0, 800.0), Err(Error::Overflow { .. })));
        assert!(bessel_i(-1.0, 1.0).is_err());
    }

    #[test]
    fn bessel_half_integer_closed_forms() {
        for &z in &[0.1, 1.0, 5.0, 19.9, 20.1, 40.0, 300.0] {
            let pref = (2.0 / (PI * z)).sqrt();
            assert_relative_eq!(
                bessel_i(0.5, z).unwrap(),
                pref * z.sinh(),
                max_relative = 1e-10
            );
            assert_relative_eq!(
                bessel_i(-0.5, z).unwrap(),
                pref * z.cosh(),
                max_relative = 1e-10
            );
            let i32 = pref * (z.cosh() - z.sinh() / z);
            assert_relative_eq!(bessel_i(1.5, z).unwrap(), i32, max_relative = 1e-10);
        }
    }

    #[test]
    fn bessel_asymptotics() {
        // I_ν(z) ~ (z/2)^ν / Γ(ν+1) as z → 0 and ~ e^z / sqrt(2πz) as z → ∞
        for &nu in &[0.0, 0.7, 2.3] {
            let z: f64 = 1e-6;
            let lead = (nu * (0.5 * z).ln() - log_gamma_pos(nu + 1.0)).exp();
            assert_relative_eq!(bessel_i(nu, z).unwrap() / lead, 1.0, max_relative = 1e-9);
            let z = 5e5;
            let l = log_bessel_i(nu, z).unwrap() - (z - 0.5 * (2.0 * PI * z).ln());
            assert!(l.abs() < 1e-5);
        }
    }

    #[test]
    fn poly_seq_examples() {
        let s = jacobi_poly_seq(p(0.0, 0.0), 0.5, 1).unwrap();
        assert_eq!(s.values, vec![1.0, 0.5]);
        assert_eq!(
            jacobi_poly_seq(p(1.3, -0.2), 0.1, 0).unwrap().values,
            vec![1.0]
        );
        let s = jacobi_poly_seq(p(2.0, 3.0), 1.0, 4).unwrap();
        for n in 0..=4 {
            let want = ((n + 1) * (n + 2)) as f64 / 2.0;
            assert_relative_eq!(s.values[n], want, max_relative = 1e-14);
        }
        assert!(jacobi_poly_seq(p(0.0, 0.0), 1.5, 3).is_err());
    }

    #[test]
    fn norm_examples() {
        assert_relative_eq!(jacobi_norm(p(0.0, 0.0), 0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(jacobi_norm(p(-0.5, -0.5), 0), PI, max_relative = 1e-14);
        assert_relative_eq!(jacobi_norm(p(0.0, 0.0), 1), 2.0 / 3.0, max_relative = 1e-14);
        // Chebyshev: h_n = π/2 · P_n(1)² with P_n(1) = Γ(n+1/2)/(Γ(n+1)Γ(1/2))
        let q = p(-0.5, -0.5);
        for n in 1..40 {
            let pn1 =
                (log_gamma_pos(n as f64 + 0.5) - log_gamma_pos(n as f64 + 1.0) - 0.5 * PI.ln())
                    .exp();
            assert_relative_eq!(
                jacobi_norm(q, n),
                PI / 2.0 * pn1 * pn1,
                max_relative = 1e-12
            );
        }
        // α+β = −1 at n = 0
        let q = p(-0.3, -0.7);
        let want = (log_gamma_pos(0.7) + log_gamma_pos(0.3)).exp();
        assert_relative_eq!(jacobi_norm(q, 0), want, max_relative = 1e-13);
    }

    #[test]
    fn recurrence_norms_match_direct() {
        for q in [p(2.3, 0.7), p(-0.9, 0.4), p(0.5, 1.5)] {
            let rec = Recurrence::new(q, 3000);
            for n in [0usize, 1, 2, 63, 64, 65, 127, 1000, 2999] {
                assert_relative_eq!(
                    rec.inv_norm(n),
                    1.0 / jacobi_norm(q, n),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn sup_bound_examples() {
        assert_relative_eq!(
            jacobi_sup_bound(p(0.0, 0.0), 5).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            jacobi_sup_bound(p(2.0, 0.0), 3).unwrap(),
            10.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            jacobi_sup_bound(p(0.3, 1.7), 0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert!(jacobi_sup_bound(p(-0.7, 0.0), 3).is_err());
        // dense grid check of the (2,0), n=3 example
        let rec = Recurrence::new(p(2.0, 0.0), 3);
        let mut v = [0.0; 4];
        let mut m: f64 = 0.0;
        for i in 0..=1_000_000 {
            rec.eval_into(-1.0 + 2.0 * i as f64 / 1e6, &mut v);
            m = m.max(v[3].abs());
        }
        assert_relative_eq!(m, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, f64::NAN).is_err());
        assert!(p(-0.5, 3.0).in_theorem_range());
        assert!(!p(-0.6, 3.0).in_theorem_range());
        let back: JacobiParams = serde_json::from_str(r#"{"alpha":0.5,"beta":1.5}"#).unwrap();
        assert_eq!(back, p(0.5, 1.5));
        assert!(serde_json::from_str::<JacobiParams>(r#"{"alpha":-2,"beta":0}"#).is_err());
    }
}
