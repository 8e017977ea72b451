//! Tensor-product heat kernels on [0, π]^d and an empirical weak-type (1,1) harness for the
//! heat maximal operator T_* f = sup_t |T_t f|.
//!
//! Functions are piecewise constant on cells uniform in θ on each axis. The semigroup is
//! applied spectrally: c_n = ∫ f P_n dρ uses exact cell integrals of P_n, and the output is
//! the cell average of the truncated series. Cell averaging makes mass conservation exact
//! (only n = 0 survives ∫ · dρ) and keeps the discretized maximal function a lower bound.
//! Cost per time step is O(d · M^d · N) for M cells and N terms per axis.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::log_spaced;
use crate::kernels::{heat_series, heat_truncation, SeriesTruncation};
use crate::quadrature::rho_rule;
use crate::specfun::{log_jacobi_norm, JacobiParams, Recurrence};

/// Largest supported dimension.
pub const MAX_DIMS: usize = 3;

/// Gauss nodes per cell for the cell masses.
const CELL_RULE: usize = 24;

/// Per-axis type parameters of a tensor-product Jacobi setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<JacobiParams>", into = "Vec<JacobiParams>")]
pub struct MultiParams {
    per_axis: Vec<JacobiParams>,
}

impl TryFrom<Vec<JacobiParams>> for MultiParams {
    type Error = Error;
    fn try_from(v: Vec<JacobiParams>) -> Result<Self> {
        MultiParams::new(v)
    }
}

impl From<MultiParams> for Vec<JacobiParams> {
    fn from(m: MultiParams) -> Self {
        m.per_axis
    }
}

impl MultiParams {
    pub fn new(per_axis: Vec<JacobiParams>) -> Result<Self> {
        if per_axis.is_empty() || per_axis.len() > MAX_DIMS {
            return Err(Error::InvalidParams(format!(
                "need 1 to {MAX_DIMS} axes, got {}",
                per_axis.len()
            )));
        }
        Ok(Self { per_axis })
    }

    pub fn dims(&self) -> usize {
        self.per_axis.len()
    }

    pub fn per_axis(&self) -> &[JacobiParams] {
        &self.per_axis
    }

    pub fn in_theorem_range(&self) -> bool {
        self.per_axis.iter().all(|p| p.in_theorem_range())
    }
}

/// Product of the one-dimensional kernels G_t^{α_k,β_k}(x_k, y_k).
pub fn tensor_heat(mp: &MultiParams, x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    if x.len() != mp.dims() || y.len() != mp.dims() {
        return Err(Error::GridMismatch(format!(
            "points must have {} coordinates",
            mp.dims()
        )));
    }
    let mut v = 1.0;
    for (k, p) in mp.per_axis.iter().enumerate() {
        v *= heat_series(*p, x[k], y[k], t, SeriesTruncation::default())?.value;
    }
    Ok(v)
}

#[derive(Debug)]
struct Axis {
    cells: usize,
    /// n_max + 1
    stride: usize,
    mu: Vec<f64>,
    /// integ_t[n][j] = ∫_{cell j} P_n dρ
    integ_t: Vec<f64>,
    /// avg[j][n] = ∫_{cell j} P_n dρ / (μ_j h_n)
    avg: Vec<f64>,
}

impl Axis {
    fn new(params: JacobiParams, cells: usize, n_max: usize) -> Result<Self> {
        let edges: Vec<f64> = (0..=cells)
            .map(|k| match k {
                0 => 1.0,
                k if k == cells => -1.0,
                k => (k as f64 * PI / cells as f64).cos(),
            })
            .collect();
        let mu = cell_masses(params, &edges)?;
        let stride = n_max + 1;
        // E_k(n) = (1−x_k)^{α+1}(1+x_k)^{β+1} P_{n−1}^{α+1,β+1}(x_k); ∫_{cell j} P_n dρ = (E_{j+1} − E_j)/(2n)
        let shifted = JacobiParams::new(params.alpha() + 1.0, params.beta() + 1.0)?;
        let rec = Recurrence::new(shifted, n_max.max(1));
        let mut e = vec![0.0; edges.len() * stride];
        let mut q = vec![0.0; stride];
        for (k, &x) in edges.iter().enumerate() {
            let w = (1.0 - x).powf(shifted.alpha()) * (1.0 + x).powf(shifted.beta());
            if w == 0.0 {
                continue;
            }
            rec.eval_into(x, &mut q[..n_max.max(1)]);
            for n in 1..=n_max {
                e[k * stride + n] = w * q[n - 1];
            }
        }
        let inv_h: Vec<f64> = (0..=n_max)
            .map(|n| (-log_jacobi_norm(params, n)).exp())
            .collect();
        let mut integ_t = vec![0.0; stride * cells];
        let mut avg = vec![0.0; cells * stride];
        for j in 0..cells {
            for n in 0..=n_max {
                let v = if n == 0 {
                    mu[j]
                } else {
                    (e[(j + 1) * stride + n] - e[j * stride + n]) / (2.0 * n as f64)
                };
                integ_t[n * cells + j] = v;
                avg[j * stride + n] = v * inv_h[n] / mu[j];
            }
        }
        Ok(Self {
            cells,
            stride,
            mu,
            integ_t,
            avg,
        })
    }
}

/// ρ([a, b]) for consecutive edges 1 = x_0 > x_1 > … > x_M = −1.
fn cell_masses(params: JacobiParams, edges: &[f64]) -> Result<Vec<f64>> {
    let (a, b) = (params.alpha(), params.beta());
    let cells = edges.len() - 1;
    if cells == 1 {
        return Ok(vec![log_jacobi_norm(params, 0).exp()]);
    }
    let legendre = rho_rule(JacobiParams::new(0.0, 0.0)?, CELL_RULE)?;
    let right = rho_rule(JacobiParams::new(a, 0.0)?, CELL_RULE)?;
    let left = rho_rule(JacobiParams::new(0.0, b)?, CELL_RULE)?;
    let mut mu = Vec::with_capacity(cells);
    for j in 0..cells {
        let (hi, lo) = (edges[j], edges[j + 1]);
        let m = if j == 0 {
            // 1 − x = (L/2)(1 − u), L = 1 − lo
            let half = 0.5 * (1.0 - lo);
            let s: f64 = right
                .nodes
                .iter()
                .zip(&right.weights)
                .map(|(&u, &w)| w * (2.0 - half * (1.0 - u)).powf(b))
                .sum();
            half.powf(a + 1.0) * s
        } else if j == cells - 1 {
            let half = 0.5 * (1.0 + hi);
            let s: f64 = left
                .nodes
                .iter()
                .zip(&left.weights)
                .map(|(&u, &w)| w * (2.0 - half * (1.0 + u)).powf(a))
                .sum();
            half.powf(b + 1.0) * s
        } else {
            let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
            let s: f64 = legendre
                .nodes
                .iter()
                .zip(&legendre.weights)
                .map(|(&u, &w)| {
                    let x = mid + half * u;
                    w * (1.0 - x).powf(a) * (1.0 + x).powf(b)
                })
                .sum();
            half * s
        };
        mu.push(m);
    }
    Ok(mu)
}

/// Tensor grid of cells uniform in θ on each axis, with the spectral data needed to apply
/// T_t for every t ≥ `t_min`.
#[derive(Debug)]
pub struct TensorGrid {
    mp: MultiParams,
    t_min: f64,
    axes: Vec<Axis>,
}

impl TensorGrid {
    pub fn new(mp: &MultiParams, cells_per_axis: usize, t_min: f64) -> Result<Arc<Self>> {
        if cells_per_axis < 1 {
            return Err(Error::GridMismatch(
                "need at least one cell per axis".into(),
            ));
        }
        let axes = mp
            .per_axis
            .iter()
            .map(|&p| {
                let (n, _) = heat_truncation(p, t_min, SeriesTruncation::default())?;
                Axis::new(p, cells_per_axis, n)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Self {
            mp: mp.clone(),
            t_min,
            axes,
        }))
    }

    pub fn params(&self) -> &MultiParams {
        &self.mp
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.cells).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.cells).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// θ at the cell midpoints of one axis.
    pub fn cell_centers(&self, axis: usize) -> Vec<f64> {
        let m = self.axes[axis].cells;
        (0..m).map(|j| (j as f64 + 0.5) * PI / m as f64).collect()
    }

    /// ρ-measure of one axis' cells.
    pub fn axis_weights(&self, axis: usize) -> &[f64] {
        &self.axes[axis].mu
    }

    /// Product measure of every cell, row-major.
    pub fn measure_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for a in &self.axes {
            w = w
                .iter()
                .flat_map(|&x| a.mu.iter().map(move |&m| x * m))
                .collect();
        }
        w
    }

    pub fn density(self: &Arc<Self>, values: Vec<f64>) -> Result<DensityOnGrid> {
        if values.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} cell values, got {}",
                self.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::GridMismatch(format!(
                "density values must be finite and nonnegative, got {v}"
            )));
        }
        let l1_norm = values
            .iter()
            .zip(self.measure_weights())
            .map(|(v, w)| v * w)
            .sum();
        Ok(DensityOnGrid {
            grid: Arc::clone(self),
            values,
            l1_norm,
        })
    }

    pub fn constant(self: &Arc<Self>, c: f64) -> Result<DensityOnGrid> {
        self.density(vec![c; self.len()])
    }

    /// L¹-normalized indicator of the cells whose midpoints lie within width/2 of `center`
    /// on every axis; `None` when some axis has fewer than two such cells.
    pub fn bump(self: &Arc<Self>, center: &[f64], width: f64) -> Result<Option<DensityOnGrid>> {
        if center.len() != self.axes.len() || !(width > 0.0) {
            return Err(Error::GridMismatch(format!(
                "bump needs {} center coordinates and width > 0",
                self.axes.len()
            )));
        }
        let mut masks = Vec::with_capacity(self.axes.len());
        for (k, &c) in center.iter().enumerate() {
            let mask: Vec<bool> = self
                .cell_centers(k)
                .iter()
                .map(|&th| (th - c).abs() <= 0.5 * width)
                .collect();
            if mask.iter().filter(|&&b| b).count() < 2 {
                return Ok(None);
            }
            masks.push(mask);
        }
        let mut ind = vec![1.0];
        for mask in &masks {
            ind = ind
                .iter()
                .flat_map(|&x| mask.iter().map(move |&b| if b { x } else { 0.0 }))
                .collect();
        }
        let mass: f64 = ind
            .iter()
            .zip(self.measure_weights())
            .map(|(v, w)| v * w)
            .sum();
        self.density(ind.into_iter().map(|v| v / mass).collect())
            .map(Some)
    }
}

/// A nonnegative function, piecewise constant on the cells of a [`TensorGrid`].
#[derive(Debug, Clone)]
pub struct DensityOnGrid {
    grid: Arc<TensorGrid>,
    values: Vec<f64>,
    l1_norm: f64,
}

impl DensityOnGrid {
    pub fn grid(&self) -> &Arc<TensorGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Σ value · cell measure.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    pub fn measure_weights(&self) -> Vec<f64> {
        self.grid.measure_weights()
    }
}

/// out[…, r, …] = Σ_c mat[r·stride + c] · data[…, c, …] along `axis`.
fn contract(
    data: &[f64],
    shape: &[usize],
    axis: usize,
    mat: &[f64],
    stride: usize,
    rows: usize,
) -> Vec<f64> {
    let cols = shape[axis];
    let prefix: usize = shape[..axis].iter().product();
    let suffix: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; prefix * rows * suffix];
    for p in 0..prefix {
        for r in 0..rows {
            let row = &mat[r * stride..r * stride + cols];
            if suffix == 1 {
                let d = &data[p * cols..(p + 1) * cols];
                out[p * rows + r] = row.iter().zip(d).map(|(a, b)| a * b).sum();
            } else {
                let o = &mut out[(p * rows + r) * suffix..(p * rows + r + 1) * suffix];
                for (c, &m) in row.iter().enumerate() {
                    let d = &data[(p * cols + c) * suffix..(p * cols + c + 1) * suffix];
                    for (x, y) in o.iter_mut().zip(d) {
                        *x += m * y;
                    }
                }
            }
        }
    }
    out
}

/// Spectral coefficients c_{n_1…n_d} = ∫ f P_{n_1} ⊗ … ⊗ P_{n_d} dρ.
struct Coefficients {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn coefficients(f: &DensityOnGrid) -> Coefficients {
    let g = &f.grid;
    let mut shape = g.shape();
    let mut data = f.values.clone();
    for (k, a) in g.axes.iter().enumerate() {
        data = contract(&data, &shape, k, &a.integ_t, a.cells, a.stride);
        shape[k] = a.stride;
    }
    Coefficients { shape, data }
}

fn evaluate(g: &TensorGrid, c: &Coefficients, t: f64) -> Result<Vec<f64>> {
    // truncate each axis to its order at t and fold in e^{−tλ_n}
    let mut keep = Vec::with_capacity(g.axes.len());
    let mut decay = Vec::with_capacity(g.axes.len());
    for (a, &p) in g.axes.iter().zip(&g.mp.per_axis) {
        let (n, _) = heat_truncation(p, t, SeriesTruncation::default())?;
        if n + 1 > a.stride {
            return Err(Error::GridMismatch(format!(
                "grid was built for t >= {}, got t = {t}",
                g.t_min
            )));
        }
        keep.push(n + 1);
        decay.push(
            (0..=n)
                .map(|k| (-t * p.eigenvalue(k)).exp())
                .collect::<Vec<_>>(),
        );
    }
    let total: usize = keep.iter().product();
    let mut data = vec![0.0; total];
    let d = keep.len();
    let mut idx = vec![0usize; d];
    for v in data.iter_mut() {
        let mut src = 0;
        let mut w = 1.0;
        for k in 0..d {
            src = src * c.shape[k] + idx[k];
            w *= decay[k][idx[k]];
        }
        *v = w * c.data[src];
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < keep[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    let mut shape = keep;
    for (k, a) in g.axes.iter().enumerate() {
        data = contract(&data, &shape, k, &a.avg, a.stride, a.cells);
        shape[k] = a.cells;
    }
    Ok(data)
}

fn check_grid(mp: &MultiParams, f: &DensityOnGrid) -> Result<()> {
    if f.grid.mp != *mp {
        return Err(Error::GridMismatch(
            "density lives on a grid built for other parameters".into(),
        ));
    }
    Ok(())
}

/// Cell averages of T_t f.
pub fn apply_semigroup(mp: &MultiParams, f: &DensityOnGrid, t: f64) -> Result<DensityOnGrid> {
    check_grid(mp, f)?;
    let c = coefficients(f);
    let values = evaluate(&f.grid, &c, t)?;
    let l1_norm = values
        .iter()
        .zip(f.measure_weights())
        .map(|(v, w)| v * w)
        .sum();
    Ok(DensityOnGrid {
        grid: Arc::clone(&f.grid),
        values,
        l1_norm,
    })
}

/// max over the ladder of |T_t f|, cellwise.
pub fn maximal_function(
    mp: &MultiParams,
    f: &DensityOnGrid,
    t_ladder: &[f64],
) -> Result<DensityOnGrid> {
    check_grid(mp, f)?;
    if t_ladder.is_empty() {
        return Err(Error::GridMismatch("empty time ladder".into()));
    }
    let c = coefficients(f);
    let runs: Vec<Vec<f64>> = t_ladder
        .par_iter()
        .map(|&t| evaluate(&f.grid, &c, t))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0f64; f.values.len()];
    for r in &runs {
        for (m, v) in values.iter_mut().zip(r) {
            *m = m.max(v.abs());
        }
    }
    f.grid.density(values)
}

/// sup_λ λ μ{T_* f > λ} / ‖f‖₁ over the discretization.
///
/// As λ increases to a value v of the maximal function, μ{T_* f > λ} tends to μ{T_* f ≥ v},
/// so the supremum is max_v v · μ{T_* f ≥ v}, with equal values grouped.
pub fn weak_type_ratio(mp: &MultiParams, f: &DensityOnGrid, t_ladder: &[f64]) -> Result<f64> {
    let m = maximal_function(mp, f, t_ladder)?;
    Ok(level_set_ratio(m.values(), &m.measure_weights()) / f.l1_norm)
}

fn level_set_ratio(values: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = 0.0f64;
    let mut mass = 0.0;
    let mut k = 0;
    while k < order.len() {
        let v = values[order[k]];
        while k < order.len() && values[order[k]] == v {
            mass += weights[order[k]];
            k += 1;
        }
        best = best.max(v * mass);
    }
    best
}

/// One observed ratio of the weak-type experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeRow {
    pub width: f64,
    pub center: Vec<f64>,
    pub ratio: f64,
}

/// Largest observed ratio at one bump width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthSummary {
    pub width: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeReport {
    pub rows: Vec<WeakTypeRow>,
    pub by_width: Vec<WidthSummary>,
    /// Largest over smallest of the per-width maxima (1 when fewer than two widths ran).
    pub spread: f64,
    pub warnings: Vec<String>,
}

/// Settings of one weak-type run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakTypeConfig {
    pub params: MultiParams,
    pub cells_per_axis: usize,
    pub centers: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub t_ladder: Vec<f64>,
}

pub const DEFAULT_WIDTHS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// 40 log-spaced times in [1e-3, 10].
pub fn default_ladder() -> Vec<f64> {
    log_spaced(1e-3, 10.0, 40)
}

/// Ten centers with coordinates drawn from the midpoints (k + 1/2)π/10, permuted per axis.
pub fn default_centers(dims: usize) -> Vec<Vec<f64>> {
    let mid = |k: usize| (k as f64 + 0.5) * PI / 10.0;
    (0..10)
        .map(|k| {
            (0..dims)
                .map(|a| mid((k * (2 * a + 1) + 3 * a) % 10))
                .collect()
        })
        .collect()
}

impl WeakTypeConfig {
    /// Legendre on [0, π] with 1024 cells.
    pub fn default_d1() -> Self {
        let p = JacobiParams::new(0.0, 0.0).expect("static params");
        Self::with_defaults(MultiParams::new(vec![p]).expect("one axis"), 1024)
    }

    /// (0,0) × (1/2,1/2) with 256 cells per axis.
    pub fn default_d2() -> Self {
        let a = JacobiParams::new(0.0, 0.0).expect("static params");
        let b = JacobiParams::new(0.5, 0.5).expect("static params");
        Self::with_defaults(MultiParams::new(vec![a, b]).expect("two axes"), 256)
    }

    pub fn with_defaults(params: MultiParams, cells_per_axis: usize) -> Self {
        let d = params.dims();
        Self {
            params,
            cells_per_axis,
            centers: default_centers(d),
            widths: DEFAULT_WIDTHS.to_vec(),
            t_ladder: default_ladder(),
        }
    }
}

/// Sweep bumps over centers and widths; bumps too narrow for the grid are skipped with a warning.
pub fn run_weak_type_experiment(cfg: &WeakTypeConfig) -> Result<WeakTypeReport> {
    let mut report = WeakTypeReport {
        rows: Vec::new(),
        by_width: Vec::new(),
        spread: 1.0,
        warnings: Vec::new(),
    };
    if cfg.centers.is_empty() || cfg.widths.is_empty() {
        return Ok(report);
    }
    let t_min = cfg.t_ladder.iter().copied().fold(f64::INFINITY, f64::min);
    let grid = TensorGrid::new(&cfg.params, cfg.cells_per_axis, t_min)?;
    for &w in &cfg.widths {
        let mut best: Option<f64> = None;
        for c in &cfg.centers {
            let Some(f) = grid.bump(c, w)? else {
                report.warnings.push(format!(
                    "width {w} at center {c:?} spans fewer than two cells; skipped"
                ));
                continue;
            };
            let ratio = weak_type_ratio(&cfg.params, &f, &cfg.t_ladder)?;
            best = Some(best.map_or(ratio, |b: f64| b.max(ratio)));
            report.rows.push(WeakTypeRow {
                width: w,
                center: c.clone(),
                ratio,
            });
        }
        if let Some(b) = best {
            report.by_width.push(WidthSummary {
                width: w,
                max_ratio: b,
            });
        }
    }
    let (lo, hi) = report
        .by_width
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
            (lo.min(s.max_ratio), hi.max(s.max_ratio))
        });
    if report.by_width.len() >= 2 {
        report.spread = hi / lo;
    }
    Ok(report)
}
