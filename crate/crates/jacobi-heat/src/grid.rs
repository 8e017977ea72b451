//! Evaluation grids over [0, π]² × t.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{HeatPoint, T_FLOOR};

/// θ_i = iπ/theta_steps (0 ≤ i ≤ theta_steps), likewise φ, crossed with `t_values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct GridSpec {
    theta_steps: usize,
    phi_steps: usize,
    t_values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawGrid {
    theta_steps: usize,
    phi_steps: usize,
    t_values: Vec<f64>,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.theta_steps, r.phi_steps, r.t_values)
    }
}

/// n values log-spaced over [lo, hi], endpoints included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// k π / steps for k = 0..=steps, with the last node exactly π.
pub fn angle_nodes(steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| {
            if k == steps {
                PI
            } else {
                k as f64 * PI / steps as f64
            }
        })
        .collect()
}

impl GridSpec {
    pub fn new(theta_steps: usize, phi_steps: usize, t_values: Vec<f64>) -> Result<Self> {
        if theta_steps < 1 || phi_steps < 1 {
            return Err(Error::GridMismatch(format!(
                "angle steps must be at least 1, got {theta_steps} x {phi_steps}"
            )));
        }
        if t_values.is_empty() {
            return Err(Error::GridMismatch(
                "grid needs at least one t value".into(),
            ));
        }
        if let Some(&t) = t_values
            .iter()
            .find(|&&t| !(t >= T_FLOOR) || !t.is_finite())
        {
            if t > 0.0 && t < T_FLOOR {
                return Err(Error::PrecisionFloor { t, floor: T_FLOOR });
            }
            return Err(Error::GridMismatch(format!(
                "t values must be finite and positive, got {t}"
            )));
        }
        Ok(Self {
            theta_steps,
            phi_steps,
            t_values,
        })
    }

    /// 49 × 49 angles (multiples of π/48) and 25 log-spaced t in [1e-3, 1].
    pub fn default_envelope() -> Self {
        Self::new(48, 48, log_spaced(1e-3, 1.0, 25)).expect("static grid")
    }

    pub fn theta_steps(&self) -> usize {
        self.theta_steps
    }
    pub fn phi_steps(&self) -> usize {
        self.phi_steps
    }
    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }
    pub fn thetas(&self) -> Vec<f64> {
        angle_nodes(self.theta_steps)
    }
    pub fn phis(&self) -> Vec<f64> {
        angle_nodes(self.phi_steps)
    }

    pub fn len(&self) -> usize {
        (self.theta_steps + 1) * (self.phi_steps + 1) * self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points, t outermost, then θ, then φ.
    pub fn points(&self) -> Vec<HeatPoint> {
        let (th, ph) = (self.thetas(), self.phis());
        let mut out = Vec::with_capacity(self.len());
        for &t in &self.t_values {
            for &a in &th {
                for &b in &ph {
                    out.push(HeatPoint::new(a, b, t).expect("grid nodes are in range"));
                }
            }
        }
        out
    }

    /// Largest t on the grid (the horizon of a fit).
    pub fn horizon(&self) -> f64 {
        self.t_values.iter().copied().fold(f64::MIN, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = GridSpec::default_envelope();
        assert_eq!(g.len(), 49 * 49 * 25);
        assert_eq!(g.t_values()[0], 1e-3);
        assert_eq!(g.t_values()[24], 1.0);
        assert_eq!(g.thetas()[48], PI);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0, 3, vec![1.0]).is_err());
        assert!(matches!(
            GridSpec::new(3, 3, vec![1e-9]),
            Err(Error::PrecisionFloor { .. })
        ));
        assert!(GridSpec::new(3, 3, vec![]).is_err());
        assert!(GridSpec::new(3, 3, vec![-1.0]).is_err());
    }

    #[test]
    fn serde_validates() {
        let g: GridSpec =
            serde_json::from_str(r#"{"theta_steps":2,"phi_steps":3,"t_values":[0.1]}"#).unwrap();
        assert_eq!(g.len(), 12);
        assert!(serde_json::from_str::<GridSpec>(
            r#"{"theta_steps":0,"phi_steps":3,"t_values":[0.1]}"#
        )
        .is_err());
    }
}
