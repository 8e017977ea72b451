//! Gauss-type rules for the measures dΠ_ν, dρ_{α,β} and d𝔪_{α,β}.
//!
//! Π_ν (ν > −1/2) is the probability measure on [−1, 1] with density proportional to
//! (1 − u²)^{ν−1/2}; Π_{−1/2} = (δ_{−1} + δ_{1})/2. dρ_{α,β} = (1−x)^α(1+x)^β dx and
//! d𝔪_{α,β}(θ) = (sin θ/2)^{2α+1}(cos θ/2)^{2β+1} dθ = 2^{−α−β−1} dρ_{α,β}(cos θ).

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{log_gamma_pos, log_gamma_ratio, JacobiParams};

/// Default cap for [`adaptive_doubling`].
pub const DEFAULT_DEGREE_CAP: usize = 4096;
/// Default starting degree for Π_ν integrals.
pub const DEFAULT_PI_DEGREE: usize = 64;

/// The measure a rule integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeasureKind {
    Pi { nu: f64 },
    Rho { alpha: f64, beta: f64 },
    TrigM { alpha: f64, beta: f64 },
}

/// Nodes and positive weights. `dist_left[i]` and `dist_right[i]` hold the distances from
/// `nodes[i]` to the ends of the support, computed without cancellation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub measure_kind: MeasureKind,
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub dist_left: Vec<f64>,
    #[serde(skip)]
    pub dist_right: Vec<f64>,
}

/// Π_{−1/2} = (δ_{−1} + δ_{1}) / 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PointMassRule;

impl PointMassRule {
    pub const LOCATIONS: [f64; 2] = [-1.0, 1.0];
    pub const WEIGHTS: [f64; 2] = [0.5, 0.5];
}

/// Either a Gauss rule or the two-atom limit.
#[derive(Debug, Clone, PartialEq)]
pub enum PiRule {
    Gauss(Arc<QuadratureRule>),
    PointMass(PointMassRule),
}

/// Common access to (node, 1 − node, 1 + node, weight) for rules on [−1, 1].
pub trait Integrator {
    fn len(&self) -> usize;
    /// (u, 1 − u, 1 + u, w) of the i-th node.
    fn node(&self, i: usize) -> (f64, f64, f64, f64);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Integrator for QuadratureRule {
    fn len(&self) -> usize {
        self.nodes.len()
    }
    fn node(&self, i: usize) -> (f64, f64, f64, f64) {
        (
            self.nodes[i],
            self.dist_right[i],
            self.dist_left[i],
            self.weights[i],
        )
    }
}

impl Integrator for PointMassRule {
    fn len(&self) -> usize {
        2
    }
    fn node(&self, i: usize) -> (f64, f64, f64, f64) {
        if i == 0 {
            (-1.0, 2.0, 0.0, 0.5)
        } else {
            (1.0, 0.0, 2.0, 0.5)
        }
    }
}

impl Integrator for PiRule {
    fn len(&self) -> usize {
        match self {
            PiRule::Gauss(r) => r.len(),
            PiRule::PointMass(r) => r.len(),
        }
    }
    fn node(&self, i: usize) -> (f64, f64, f64, f64) {
        match self {
            PiRule::Gauss(r) => r.node(i),
            PiRule::PointMass(r) => r.node(i),
        }
    }
}

/// Σ w_i f(u_i); non-finite integrand values are reported as errors.
pub fn integrate<R: Integrator + ?Sized>(rule: &R, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..rule.len() {
        let (u, _, _, w) = rule.node(i);
        let v = f(u);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: u, value: v });
        }
        s += w * v;
    }
    Ok(s)
}

/// Like [`integrate`] but the integrand also receives 1 − u and 1 + u.
pub fn integrate_gaps<R: Integrator + ?Sized>(
    rule: &R,
    mut f: impl FnMut(f64, f64, f64) -> f64,
) -> Result<f64> {
    let mut s = 0.0;
    for i in 0..rule.len() {
        let (u, om, op, w) = rule.node(i);
        let v = f(u, om, op);
        if !v.is_finite() {
            return Err(Error::NonFinite { node: u, value: v });
        }
        s += w * v;
    }
    Ok(s)
}

/// Raw Gauss–Jacobi rule for (1−x)^a(1+x)^b on (−1, 1), nodes ascending.
#[derive(Debug)]
struct RawRule {
    x: Vec<f64>,
    one_minus: Vec<f64>,
    one_plus: Vec<f64>,
    w: Vec<f64>,
}

type CacheKey = (u64, u64, usize);

fn raw_cache() -> &'static Mutex<HashMap<CacheKey, Arc<RawRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<RawRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn raw_gauss_jacobi(a: f64, b: f64, m: usize) -> Result<Arc<RawRule>> {
    let key = (a.to_bits(), b.to_bits(), m);
    if let Some(r) = raw_cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(build_gauss_jacobi(a, b, m)?);
    raw_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&rule));
    Ok(rule)
}

/// Argument of the recurrence held as its distance to the nearer endpoint, so that
/// nodes close to ±1 are resolved to relative precision in θ.
#[derive(Clone, Copy)]
enum Arg {
    /// x = 1 − d
    NearPlus(f64),
    /// x = −1 + d
    NearMinus(f64),
}

impl Arg {
    fn from_theta(th: f64) -> Self {
        if th <= 0.5 * PI {
            let h = (0.5 * th).sin();
            Arg::NearPlus(2.0 * h * h)
        } else {
            let h = (0.5 * th).cos();
            Arg::NearMinus(2.0 * h * h)
        }
    }

    /// k·x + c without forming x.
    fn affine(self, k: f64, c: f64) -> f64 {
        match self {
            Arg::NearPlus(d) => (c + k) - k * d,
            Arg::NearMinus(d) => (c - k) + k * d,
        }
    }
}

/// P_n^{a,b}(1 − d) from the terminating hypergeometric series in d/2. Used where
/// n²d is small: there the recurrence cancels badly when a is close to −1.
fn near_end_series(a: f64, b: f64, n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let mut term = (log_gamma_ratio(nf + 1.0, a) - log_gamma_pos(a + 1.0)).exp();
    let mut sum = term;
    for k in 0..n {
        let kf = k as f64;
        term *= -(nf - kf) * (nf + a + b + kf + 1.0) / ((kf + 1.0) * (a + kf + 1.0)) * (0.5 * d);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

const NEAR_END: f64 = 8.0;

/// Division-free recurrence coefficients for a fixed (a, b, m):
/// P_n = (k_plus[n] − k_lin[n]·d) P_{n−1} − k_c[n] P_{n−2} for x = 1 − d, and with
/// k_minus in place of k_plus (and +d) for x = −1 + d.
struct PairEval {
    a: f64,
    b: f64,
    m: usize,
    k_lin: Vec<f64>,
    k_plus: Vec<f64>,
    k_minus: Vec<f64>,
    k_c: Vec<f64>,
}

impl PairEval {
    fn new(a: f64, b: f64, m: usize) -> Self {
        let mut e = Self {
            a,
            b,
            m,
            k_lin: vec![0.0; m + 1],
            k_plus: vec![0.0; m + 1],
            k_minus: vec![0.0; m + 1],
            k_c: vec![0.0; m + 1],
        };
        for n in 2..=m {
            let nf = n as f64;
            let s = 2.0 * nf + a + b;
            let den = 2.0 * nf * (nf + a + b) * (s - 2.0);
            let lin = (s - 1.0) * s * (s - 2.0) / den;
            let cst = (s - 1.0) * (a * a - b * b) / den;
            e.k_lin[n] = lin;
            e.k_plus[n] = cst + lin;
            e.k_minus[n] = cst - lin;
            e.k_c[n] = 2.0 * (nf + a - 1.0) * (nf + b - 1.0) * s / den;
        }
        e
    }

    /// (P_m(x), P_{m−1}(x)), switching to the endpoint series close to ±1.
    fn eval(&self, x: Arg) -> (f64, f64) {
        let (a, b, m) = (self.a, self.b, self.m);
        let mf = m as f64;
        match x {
            Arg::NearPlus(d) if d * mf * mf <= NEAR_END && m >= 1 => {
                return (near_end_series(a, b, m, d), near_end_series(a, b, m - 1, d));
            }
            Arg::NearMinus(d) if d * mf * mf <= NEAR_END && m >= 1 => {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                return (
                    sign * near_end_series(b, a, m, d),
                    -sign * near_end_series(b, a, m - 1, d),
                );
            }
            _ => {}
        }
        let mut p0 = 1.0;
        if m == 0 {
            return (p0, 0.0);
        }
        let mut p1 = x.affine(0.5 * (a + b + 2.0), (a + 1.0) - 0.5 * (a + b + 2.0));
        match x {
            Arg::NearPlus(d) => {
                for n in 2..=m {
                    let p2 = (self.k_plus[n] - self.k_lin[n] * d) * p1 - self.k_c[n] * p0;
                    p0 = p1;
                    p1 = p2;
                }
            }
            Arg::NearMinus(d) => {
                for n in 2..=m {
                    let p2 = (self.k_minus[n] + self.k_lin[n] * d) * p1 - self.k_c[n] * p0;
                    p0 = p1;
                    p1 = p2;
                }
            }
        }
        (p1, p0)
    }
}

fn build_gauss_jacobi(a: f64, b: f64, m: usize) -> Result<RawRule> {
    if m == 0 {
        return Err(Error::RootFinding {
            degree: m,
            a,
            b,
            msg: "degree must be at least 1".into(),
        });
    }
    let mf = m as f64;
    let c = 2.0 * mf + a + b;
    let pe = PairEval::new(a, b, m);
    let f = |th: f64| pe.eval(Arg::from_theta(th)).0;
    // Zeros are spaced roughly π/m apart in θ; scan a grid finer than that for sign
    // changes, refining towards the ends, then polish each bracket.
    let mut brackets = Vec::with_capacity(m);
    for factor in [2usize, 8, 32] {
        brackets.clear();
        let g = factor * m + 2;
        let h = PI / g as f64;
        let mut pts: Vec<f64> = Vec::with_capacity(g + 80);
        for k in (1..40).rev() {
            pts.push(h * 0.5f64.powi(k));
        }
        for j in 1..g {
            pts.push(j as f64 * h);
        }
        for k in 1..40 {
            pts.push(PI - h * 0.5f64.powi(k));
        }
        let mut prev_t = pts[0];
        let mut prev_v = f(prev_t);
        for &t in &pts[1..] {
            let v = f(t);
            if (v < 0.0) != (prev_v < 0.0) || v == 0.0 {
                brackets.push((prev_t, t, prev_v));
            }
            prev_t = t;
            prev_v = v;
        }
        if brackets.len() == m {
            break;
        }
    }
    if brackets.len() != m {
        return Err(Error::RootFinding {
            degree: m,
            a,
            b,
            msg: format!("found {} sign changes, expected {m}", brackets.len()),
        });
    }
    let mut thetas = Vec::with_capacity(m);
    for (k, &(mut lo, mut hi, flo)) in brackets.iter().enumerate() {
        let lo_neg = flo < 0.0;
        let mut th = 0.5 * (lo + hi);
        let mut converged = false;
        for _ in 0..200 {
            let x = Arg::from_theta(th);
            let (pm, pm1) = pe.eval(x);
            if pm == 0.0 {
                converged = true;
                break;
            }
            if (pm < 0.0) == lo_neg {
                lo = th;
            } else {
                hi = th;
            }
            let num = mf * x.affine(-c, a - b) * pm + 2.0 * (mf + a) * (mf + b) * pm1;
            let dth = -num / (c * th.sin());
            let newton = th - pm / dth;
            let next = if newton > lo && newton < hi && dth != 0.0 {
                newton
            } else {
                0.5 * (lo + hi)
            };
            let step = (next - th).abs();
            th = next;
            if step <= 4.0 * f64::EPSILON * th || hi - lo <= 4.0 * f64::EPSILON * th {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootFinding {
                degree: m,
                a,
                b,
                msg: format!("no convergence for root {}", k + 1),
            });
        }
        thetas.push(th);
    }
    for k in 1..m {
        if !(thetas[k] > thetas[k - 1]) {
            return Err(Error::RootFinding {
                degree: m,
                a,
                b,
                msg: format!("roots {k} and {} coincide or are out of order", k + 1),
            });
        }
    }
    let log_k =
        (a + b + 1.0) * LN_2 + log_gamma_ratio(mf + 1.0, a) - log_gamma_ratio(mf + b + 1.0, a);
    let mut rule = RawRule {
        x: Vec::with_capacity(m),
        one_minus: Vec::with_capacity(m),
        one_plus: Vec::with_capacity(m),
        w: Vec::with_capacity(m),
    };
    // ascending x means descending θ
    for &th in thetas.iter().rev() {
        let x = th.cos();
        let arg = Arg::from_theta(th);
        let (pm, pm1) = pe.eval(arg);
        // (1 − x²) P'_m(x); keeping the P_m term makes this insensitive to the root's rounding
        let d = (mf * arg.affine(-c, a - b) * pm + 2.0 * (mf + a) * (mf + b) * pm1) / c;
        let sin = th.sin();
        let w = (log_k + 2.0 * (sin / d).abs().ln()).exp();
        let hs = (0.5 * th).sin();
        let hc = (0.5 * th).cos();
        rule.x.push(x);
        rule.one_minus.push(2.0 * hs * hs);
        rule.one_plus.push(2.0 * hc * hc);
        rule.w.push(w);
    }
    if a == b {
        // enforce the exact reflection symmetry of the symmetric weight
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let w = 0.5 * (rule.w[i] + rule.w[j]);
            rule.w[i] = w;
            rule.w[j] = w;
            rule.x[j] = -rule.x[i];
            rule.one_minus[j] = rule.one_plus[i];
            rule.one_plus[j] = rule.one_minus[i];
        }
        if m % 2 == 1 {
            let k = m / 2;
            rule.x[k] = 0.0;
            rule.one_minus[k] = 1.0;
            rule.one_plus[k] = 1.0;
        }
    }
    Ok(rule)
}

fn check_degree(degree: usize) -> Result<()> {
    if degree == 0 {
        return Err(Error::RootFinding {
            degree,
            a: f64::NAN,
            b: f64::NAN,
            msg: "degree must be at least 1".into(),
        });
    }
    Ok(())
}

/// ln of the Π_ν normalization Γ(ν+1)/(√π Γ(ν+1/2)).
fn log_pi_normalization(nu: f64) -> f64 {
    log_gamma_pos(nu + 1.0) - 0.5 * PI.ln() - log_gamma_pos(nu + 0.5)
}

/// Gauss rule for dΠ_ν, ν > −1/2; weights sum to 1.
pub fn gauss_jacobi_rule(nu: f64, degree: usize) -> Result<QuadratureRule> {
    if !(nu > -0.5) || !nu.is_finite() {
        return Err(Error::InvalidParams(format!(
            "gauss_jacobi_rule needs nu > -1/2, got {nu}"
        )));
    }
    check_degree(degree)?;
    let e = nu - 0.5;
    let raw = raw_gauss_jacobi(e, e, degree)?;
    let norm = log_pi_normalization(nu).exp();
    Ok(QuadratureRule {
        measure_kind: MeasureKind::Pi { nu },
        degree,
        nodes: raw.x.clone(),
        weights: raw.w.iter().map(|w| w * norm).collect(),
        dist_left: raw.one_plus.clone(),
        dist_right: raw.one_minus.clone(),
    })
}

type RuleCache = Mutex<HashMap<(u64, usize), Arc<QuadratureRule>>>;

fn pi_rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// dΠ_ν rule: Gauss for ν > −1/2, two atoms at ν = −1/2.
pub fn pi_measure_rule(nu: f64, degree: usize) -> Result<PiRule> {
    if nu == -0.5 {
        return Ok(PiRule::PointMass(PointMassRule));
    }
    if !(nu > -0.5) {
        return Err(Error::InvalidParams(format!(
            "Pi measure requires nu >= -1/2, got {nu}"
        )));
    }
    let key = (nu.to_bits(), degree);
    if let Some(r) = pi_rule_cache()
        .lock()
        .expect("rule cache poisoned")
        .get(&key)
    {
        return Ok(PiRule::Gauss(Arc::clone(r)));
    }
    let r = Arc::new(gauss_jacobi_rule(nu, degree)?);
    pi_rule_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&r));
    Ok(PiRule::Gauss(r))
}

/// Gauss rule for dρ_{α,β} on (−1, 1); weights sum to h_0^{α,β}.
pub fn rho_rule(params: JacobiParams, degree: usize) -> Result<QuadratureRule> {
    check_degree(degree)?;
    let raw = raw_gauss_jacobi(params.alpha(), params.beta(), degree)?;
    Ok(QuadratureRule {
        measure_kind: MeasureKind::Rho {
            alpha: params.alpha(),
            beta: params.beta(),
        },
        degree,
        nodes: raw.x.clone(),
        weights: raw.w.clone(),
        dist_left: raw.one_plus.clone(),
        dist_right: raw.one_minus.clone(),
    })
}

/// Rule for d𝔪_{α,β} on (0, π), obtained from the dρ rule through x = cos θ.
pub fn trig_m_rule(params: JacobiParams, degree: usize) -> Result<QuadratureRule> {
    check_degree(degree)?;
    let raw = raw_gauss_jacobi(params.alpha(), params.beta(), degree)?;
    let scale = (-params.s() * LN_2).exp();
    let n = raw.x.len();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut dist_left = Vec::with_capacity(n);
    let mut dist_right = Vec::with_capacity(n);
    for i in (0..n).rev() {
        // θ = 2 asin(sqrt((1−x)/2)) keeps small angles exact
        let th = 2.0 * (0.5 * raw.one_minus[i]).sqrt().asin();
        let th_c = 2.0 * (0.5 * raw.one_plus[i]).sqrt().asin();
        nodes.push(th);
        weights.push(raw.w[i] * scale);
        dist_left.push(th);
        dist_right.push(th_c);
    }
    Ok(QuadratureRule {
        measure_kind: MeasureKind::TrigM {
            alpha: params.alpha(),
            beta: params.beta(),
        },
        degree,
        nodes,
        weights,
        dist_left,
        dist_right,
    })
}

const GRADED_FIRST_PANEL: f64 = 1e-14;
const GRADED_RATIO: f64 = 4.0;

/// Composite rule for dΠ_ν with panels shrinking geometrically towards ±1; each panel
/// carries `panel_degree` nodes. Resolves integrands peaked at distance down to ~1e-14
/// from an endpoint.
pub fn graded_pi_rule(nu: f64, panel_degree: usize) -> Result<QuadratureRule> {
    if !(nu > -0.5) || !nu.is_finite() {
        return Err(Error::InvalidParams(format!(
            "graded_pi_rule needs nu > -1/2, got {nu}"
        )));
    }
    check_degree(panel_degree)?;
    let e = nu - 0.5;
    let log_norm = log_pi_normalization(nu);
    let first = raw_gauss_jacobi(0.0, e, panel_degree)?;
    let legendre = raw_gauss_jacobi(0.0, 0.0, panel_degree)?;
    // one side, in w = 1 − |u|, ascending w
    let mut ws: Vec<f64> = Vec::new();
    let mut wts: Vec<f64> = Vec::new();
    let d0 = GRADED_FIRST_PANEL;
    let scale = (log_norm + (e + 1.0) * (0.5 * d0).ln()).exp();
    for i in 0..first.x.len() {
        let w = 0.5 * d0 * first.one_plus[i];
        ws.push(w);
        wts.push(scale * first.w[i] * (2.0 - w).powf(e));
    }
    let norm = log_norm.exp();
    let mut lo = d0;
    while lo < 1.0 {
        let hi = (lo * GRADED_RATIO).min(1.0);
        let half = 0.5 * (hi - lo);
        for i in 0..legendre.x.len() {
            let w = lo + half * legendre.one_plus[i];
            ws.push(w);
            wts.push(norm * half * legendre.w[i] * (w * (2.0 - w)).powf(e));
        }
        lo = hi;
    }
    let n = ws.len();
    let mut rule = QuadratureRule {
        measure_kind: MeasureKind::Pi { nu },
        degree: panel_degree,
        nodes: Vec::with_capacity(2 * n),
        weights: Vec::with_capacity(2 * n),
        dist_left: Vec::with_capacity(2 * n),
        dist_right: Vec::with_capacity(2 * n),
    };
    for i in 0..n {
        rule.nodes.push(-1.0 + ws[i]);
        rule.weights.push(wts[i]);
        rule.dist_left.push(ws[i]);
        rule.dist_right.push(2.0 - ws[i]);
    }
    for i in (0..n).rev() {
        rule.nodes.push(1.0 - ws[i]);
        rule.weights.push(wts[i]);
        rule.dist_left.push(2.0 - ws[i]);
        rule.dist_right.push(ws[i]);
    }
    Ok(rule)
}

fn cached_graded_rule(nu: f64, panel_degree: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (nu.to_bits(), panel_degree);
    if let Some(r) = cache.lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(r));
    }
    let r = Arc::new(graded_pi_rule(nu, panel_degree)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&r));
    Ok(r)
}

/// Families of rules indexed by a degree that [`adaptive_doubling`] keeps doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleFamily {
    /// Gauss rules for dΠ_ν (two atoms at ν = −1/2, where doubling is a no-op).
    Pi { nu: f64 },
    /// Graded composite rules for dΠ_ν; the degree is the per-panel node count.
    GradedPi { nu: f64 },
    /// Gauss rules for dρ_{α,β}.
    Rho(JacobiParams),
}

impl RuleFamily {
    pub fn initial_degree(&self) -> usize {
        match self {
            RuleFamily::Pi { .. } => DEFAULT_PI_DEGREE,
            RuleFamily::GradedPi { .. } => 8,
            RuleFamily::Rho(_) => DEFAULT_PI_DEGREE,
        }
    }

    pub fn cap(&self) -> usize {
        match self {
            RuleFamily::GradedPi { .. } => 128,
            _ => DEFAULT_DEGREE_CAP,
        }
    }

    pub fn rule(&self, degree: usize) -> Result<PiRule> {
        match *self {
            RuleFamily::Pi { nu } => pi_measure_rule(nu, degree),
            RuleFamily::GradedPi { nu: -0.5 } => Ok(PiRule::PointMass(PointMassRule)),
            RuleFamily::GradedPi { nu } => Ok(PiRule::Gauss(cached_graded_rule(nu, degree)?)),
            RuleFamily::Rho(p) => Ok(PiRule::Gauss(Arc::new(rho_rule(p, degree)?))),
        }
    }

    fn is_exact_atoms(&self) -> bool {
        matches!(self, RuleFamily::Pi { nu } | RuleFamily::GradedPi { nu } if *nu == -0.5)
    }
}

/// Doubling driver shared by the 1-D and 2-D integrators: calls `eval(degree)` for
/// m, 2m, 4m, … until successive values agree to `rel_tol`.
pub fn doubling_driver(
    start: usize,
    cap: usize,
    rel_tol: f64,
    mut eval: impl FnMut(usize) -> Result<f64>,
) -> Result<(f64, usize)> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    let mut m = start.max(1);
    let mut prev = eval(m)?;
    let mut achieved = f64::INFINITY;
    while 2 * m <= cap {
        m *= 2;
        let cur = eval(m)?;
        achieved = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
        if achieved < rel_tol || cur == prev {
            return Ok((cur, m));
        }
        prev = cur;
    }
    Err(Error::Quadrature {
        degree: m,
        estimate: prev,
        achieved,
    })
}

/// ∫ f dμ over the family's measure, doubling the degree until converged.
pub fn adaptive_doubling(
    family: RuleFamily,
    f: impl Fn(f64) -> f64,
    rel_tol: f64,
) -> Result<(f64, usize)> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    if family.is_exact_atoms() {
        return Ok((integrate(&PointMassRule, f)?, 1));
    }
    doubling_driver(family.initial_degree(), family.cap(), rel_tol, |m| {
        integrate(&family.rule(m)?, &f)
    })
}
