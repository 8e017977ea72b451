//! Precomputed normalized polynomial values for evaluating many kernels on a fixed angle set.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::kernels::{
    heat_truncation, poisson_truncation, rounding_factor, KernelValue, SeriesTruncation,
};
use crate::specfun::{JacobiParams, Recurrence};

/// Values q_n(θ_i) = P_n(cos θ_i) / √h_n for a set of angles and n ≤ n_max.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    params: JacobiParams,
    angles: Vec<f64>,
    n_max: usize,
    q: Vec<f64>,
}

/// Spectral multipliers w_0..w_N of one series, with the certified tail of its truncation.
#[derive(Debug, Clone)]
pub struct SeriesWeights {
    pub weights: Vec<f64>,
    pub tail_bound: f64,
}

impl SpectralTable {
    pub fn new(params: JacobiParams, angles: &[f64], n_max: usize) -> Self {
        let rec = Recurrence::new(params, n_max);
        let stride = n_max + 1;
        let mut q = vec![0.0; angles.len() * stride];
        let roots: Vec<f64> = rec.inv_norms()[..stride].iter().map(|v| v.sqrt()).collect();
        for (i, &th) in angles.iter().enumerate() {
            let row = &mut q[i * stride..(i + 1) * stride];
            rec.eval_into(th.cos(), row);
            for (v, r) in row.iter_mut().zip(&roots) {
                *v *= r;
            }
        }
        Self {
            params,
            angles: angles.to_vec(),
            n_max,
            q,
        }
    }

    /// A table deep enough for the heat series at every t in `ts`.
    pub fn for_heat(
        params: JacobiParams,
        angles: &[f64],
        ts: &[f64],
        trunc: SeriesTruncation,
    ) -> Result<Self> {
        let mut n = 0;
        for &t in ts {
            n = n.max(heat_truncation(params, t, trunc)?.0);
        }
        Ok(Self::new(params, angles, n))
    }

    /// A table deep enough for the Poisson series at every t in `ts`.
    pub fn for_poisson(
        params: JacobiParams,
        angles: &[f64],
        ts: &[f64],
        trunc: SeriesTruncation,
    ) -> Result<Self> {
        let mut n = 0;
        for &t in ts {
            n = n.max(poisson_truncation(params, t, trunc)?.0);
        }
        Ok(Self::new(params, angles, n))
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn check_depth(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::GridMismatch(format!(
                "series needs {n} terms, table holds {}",
                self.n_max
            )));
        }
        Ok(())
    }

    /// Multipliers of G_t: e^{−t n(n+S)}.
    pub fn heat_weights(&self, t: f64, trunc: SeriesTruncation) -> Result<SeriesWeights> {
        let (n, tail) = heat_truncation(self.params, t, trunc)?;
        self.check_depth(n)?;
        let weights = (0..=n)
            .map(|k| (-t * self.params.eigenvalue(k)).exp())
            .collect();
        Ok(SeriesWeights {
            weights,
            tail_bound: tail,
        })
    }

    /// Multipliers of ℋ_t: 2^S e^{−t|n+S/2|}.
    pub fn poisson_weights(&self, t: f64, trunc: SeriesTruncation) -> Result<SeriesWeights> {
        let (n, tail) = poisson_truncation(self.params, t, trunc)?;
        self.check_depth(n)?;
        let scale = (self.params.s() * LN_2).exp();
        let hs = 0.5 * self.params.s();
        let weights = (0..=n)
            .map(|k| scale * (-t * (k as f64 + hs).abs()).exp())
            .collect();
        Ok(SeriesWeights {
            weights,
            tail_bound: tail,
        })
    }

    /// Σ_n w_n q_n(θ_i) q_n(θ_j).
    pub fn value(&self, i: usize, j: usize, w: &SeriesWeights) -> KernelValue {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let stride = self.n_max + 1;
        let n = w.weights.len();
        let qi = &self.q[i * stride..i * stride + n];
        let qj = &self.q[j * stride..j * stride + n];
        let mut sum = 0.0;
        let mut abs = 0.0;
        for k in 0..n {
            let term = w.weights[k] * qi[k] * qj[k];
            sum += term;
            abs += term.abs();
        }
        KernelValue {
            value: sum,
            tail_bound: w.tail_bound,
            round_bound: rounding_factor(n - 1) * abs,
            terms_used: n,
            certified: self.params.in_theorem_range(),
        }
    }
}
