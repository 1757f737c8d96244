//! Wigner function W(α) = (2/π) tr[ϱ D(α) Π D†(α)] of a cavity state.
//!
//! Evaluated with the Laguerre recursion over Fock matrix elements, seeded
//! with the vacuum value, so each point costs O(N²) and the truncated state is
//! represented exactly. Under this convention the vacuum peaks at 2/π and
//! W ≥ −2/π everywhere.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::hilbert::DensityMatrix;
use crate::C64;

/// Uniform grid over Re α and Im α.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WignerGrid {
    /// `points × points` grid over [−extent, extent]².
    pub fn square(extent: f64, points: usize) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::param("extent", format!("must be finite and > 0, got {extent}")));
        }
        if points < 2 {
            return Err(Error::param("points", "need at least 2 points per axis"));
        }
        let axis: Vec<f64> = (0..points)
            .map(|k| -extent + 2.0 * extent * k as f64 / (points - 1) as f64)
            .collect();
        Ok(WignerGrid { re: axis.clone(), im: axis })
    }

    /// Largest |Re α| or |Im α| covered.
    pub fn extent(&self) -> f64 {
        self.re
            .iter()
            .chain(&self.im)
            .fold(0.0, |m: f64, v| m.max(v.abs()))
    }
}

impl Default for WignerGrid {
    /// 101 × 101 points with |Re α|, |Im α| ≤ 4.
    fn default() -> Self {
        WignerGrid::square(4.0, 101).expect("valid default grid")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub grid: WignerGrid,
    /// `values[(i, j)]` is W at Re α = `grid.re[j]`, Im α = `grid.im[i]`.
    pub values: DMatrix<f64>,
    /// Set when the grid misses more than 2% of the normalization.
    pub undersized: bool,
}

/// Normalization slack tolerated before a grid is flagged as undersized.
pub const NORMALIZATION_SLACK: f64 = 0.02;

impl WignerField {
    /// ∫∫ W d²α by the trapezoidal rule.
    pub fn integrate(&self) -> f64 {
        let (re, im) = (&self.grid.re, &self.grid.im);
        let mut total = 0.0;
        for i in 0..im.len() {
            let wi = trapezoid_weight(im, i);
            for j in 0..re.len() {
                total += wi * trapezoid_weight(re, j) * self.values[(i, j)];
            }
        }
        total
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// (Re α, Im α, W) triples in row-major grid order.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.grid.im.len())
            .flat_map(move |i| (0..self.grid.re.len()).map(move |j| (self.grid.re[j], self.grid.im[i], self.values[(i, j)])))
    }
}

fn trapezoid_weight(axis: &[f64], k: usize) -> f64 {
    let left = if k > 0 { axis[k] - axis[k - 1] } else { 0.0 };
    let right = if k + 1 < axis.len() { axis[k + 1] - axis[k] } else { 0.0 };
    0.5 * (left + right)
}

/// W at a single phase-space point.
pub fn wigner_at(cavity: &DensityMatrix, alpha: C64) -> f64 {
    let mut scratch = vec![C64::new(0.0, 0.0); cavity.dim()];
    point(cavity.matrix(), alpha, &mut scratch)
}

fn point(rho: &DMatrix<C64>, alpha: C64, w: &mut [C64]) -> f64 {
    let m = rho.nrows();
    let two_a = 2.0 * alpha;
    let two_ac = two_a.conj();
    w[0] = C64::new((-2.0 * alpha.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
    let mut acc = rho[(0, 0)].re * w[0].re;
    for n in 1..m {
        w[n] = two_a * w[n - 1] / (n as f64).sqrt();
        acc += 2.0 * (rho[(0, n)] * w[n]).re;
    }
    for r in 1..m {
        let sr = (r as f64).sqrt();
        let mut temp = w[r];
        w[r] = (two_ac * temp - sr * w[r - 1]) / sr;
        acc += (rho[(r, r)] * w[r]).re;
        for n in r + 1..m {
            let next = (two_a * w[n - 1] - sr * temp) / (n as f64).sqrt();
            temp = w[n];
            w[n] = next;
            acc += 2.0 * (rho[(r, n)] * w[n]).re;
        }
    }
    2.0 * acc
}

/// W on `grid`, one grid row per task under `exec`.
pub fn wigner(cavity: &DensityMatrix, grid: &WignerGrid, exec: Execution) -> WignerField {
    let rho = cavity.matrix();
    let rows = exec.map(&grid.im, |&y| {
        let mut scratch = vec![C64::new(0.0, 0.0); rho.nrows()];
        grid.re.iter().map(|&x| point(rho, C64::new(x, y), &mut scratch)).collect::<Vec<f64>>()
    });
    let values = DMatrix::from_fn(grid.im.len(), grid.re.len(), |i, j| rows[i][j]);
    let mut field = WignerField { grid: grid.clone(), values, undersized: false };
    let norm = field.integrate();
    if (norm - 1.0).abs() > NORMALIZATION_SLACK {
        log::warn!("Wigner grid with extent {} captures normalization {norm:.4}", grid.extent());
        field.undersized = true;
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fock(n: usize, dim: usize) -> DensityMatrix {
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = C64::new(1.0, 0.0);
        DensityMatrix::from_matrix_unchecked(m)
    }

    fn coherent(beta: C64, dim: usize) -> DensityMatrix {
        let mut amp = vec![C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0)];
        for n in 1..dim {
            let prev = amp[n - 1];
            amp.push(prev * beta / (n as f64).sqrt());
        }
        DensityMatrix::from_matrix_unchecked(DMatrix::from_fn(dim, dim, |i, j| amp[i] * amp[j].conj()))
    }

    #[test]
    fn fock_origin_values() {
        assert!((wigner_at(&fock(0, 10), C64::new(0.0, 0.0)) - 2.0 / PI).abs() < 1e-14);
        assert!((wigner_at(&fock(1, 10), C64::new(0.0, 0.0)) + 2.0 / PI).abs() < 1e-14);
        assert!((wigner_at(&fock(2, 10), C64::new(0.0, 0.0)) - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn fock_one_closed_form() {
        // W₁(α) = (2/π)(4|α|² − 1)e^{−2|α|²}
        for &(x, y) in &[(0.3, -0.2), (1.1, 0.7), (-0.5, 1.5)] {
            let a = C64::new(x, y);
            let r2 = a.norm_sqr();
            let expected = 2.0 / PI * (4.0 * r2 - 1.0) * (-2.0 * r2).exp();
            assert!((wigner_at(&fock(1, 6), a) - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn coherent_state_is_displaced_gaussian() {
        let beta = C64::new(1.0, 0.5);
        let rho = coherent(beta, 40);
        for &(x, y) in &[(1.0, 0.5), (0.2, -0.3), (1.6, 1.2), (-0.4, 0.9)] {
            let a = C64::new(x, y);
            let expected = 2.0 / PI * (-2.0 * (a - beta).norm_sqr()).exp();
            assert!((wigner_at(&rho, a) - expected).abs() < 1e-12, "{a}");
        }
    }

    #[test]
    fn grid_normalization_and_bound() {
        let grid = WignerGrid::default();
        for n in 0..4 {
            let f = wigner(&fock(n, 8), &grid, Execution::Parallel);
            assert!((f.integrate() - 1.0).abs() < 0.02);
            assert!(!f.undersized);
            assert!(f.min() >= -2.0 / PI - 1e-9);
        }
        let small = WignerGrid::square(0.5, 11).unwrap();
        assert!(wigner(&fock(3, 8), &small, Execution::Sequential).undersized);
    }

    #[test]
    fn parallel_and_sequential_grids_match() {
        let grid = WignerGrid::square(3.0, 31).unwrap();
        let rho = coherent(C64::new(0.4, -0.8), 20);
        let a = wigner(&rho, &grid, Execution::Parallel);
        let b = wigner(&rho, &grid, Execution::Sequential);
        assert_eq!(a, b);
        assert_eq!(a.triples().count(), 31 * 31);
    }
}
