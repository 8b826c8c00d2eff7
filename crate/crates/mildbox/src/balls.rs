//! Discrete ball families for the `sup over (x, R)` scans of the critical
//! norms: dyadic radii, subsampled centers, and circular-convolution ball
//! sums so a whole lattice of centers is scanned per FFT.

use crate::fft;
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::{Error, Result};
use num_complex::Complex;

type C64 = Complex<f64>;

/// One ball radius with its indicator data.
#[derive(Clone, Debug)]
pub struct BallKernel {
    pub radius: f64,
    /// Number of lattice points inside the ball (independent of center).
    pub count: usize,
    /// Fourier coefficients of the indicator centered at the origin.
    spectral: Vec<C64>,
}

/// Family of balls `B(x, r)`: dyadic radii `L/4, L/8, ...` down to
/// `4 * spacing`, centers on a sublattice of the given stride.
#[derive(Clone, Debug)]
pub struct BallFamily {
    grid: Grid,
    center_stride: usize,
    kernels: Vec<BallKernel>,
}

impl BallFamily {
    /// Dyadic family; `center_stride` is in grid cells and must keep the
    /// centers covering the torus with overlap at least one radius.
    pub fn dyadic(grid: &Grid, center_stride: usize) -> Result<Self> {
        let m = grid.points_per_axis();
        if center_stride == 0 || center_stride > m / 2 {
            return Err(Error::InvalidParam(format!(
                "center stride {center_stride} out of range for M = {m}"
            )));
        }
        let h = grid.spacing();
        let mut radii = Vec::new();
        let mut r = grid.box_length() / 4.0;
        while r >= 4.0 * h - 1e-12 * h {
            radii.push(r);
            r /= 2.0;
        }
        if radii.is_empty() {
            return Err(Error::EmptyFamily(
                "no radius resolves 4 grid cells below L/4".into(),
            ));
        }
        let min_radius = *radii.last().unwrap();
        if center_stride as f64 * h > min_radius + 1e-12 {
            return Err(Error::InvalidParam(format!(
                "center stride {center_stride} cells exceeds the smallest radius"
            )));
        }
        let kernels = radii
            .into_iter()
            .map(|radius| Self::kernel(grid, radius))
            .collect();
        Ok(Self {
            grid: grid.clone(),
            center_stride,
            kernels,
        })
    }

    /// Family with explicit radii (used by rescaling studies).
    pub fn with_radii(grid: &Grid, center_stride: usize, radii: &[f64]) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::EmptyFamily("explicit radius list is empty".into()));
        }
        let h = grid.spacing();
        for &r in radii {
            if !(r.is_finite() && r >= 4.0 * h - 1e-12 * h) {
                return Err(Error::InvalidParam(format!(
                    "radius {r} does not resolve 4 grid cells (h = {h})"
                )));
            }
        }
        let kernels = radii.iter().map(|&r| Self::kernel(grid, r)).collect();
        Ok(Self {
            grid: grid.clone(),
            center_stride,
            kernels,
        })
    }

    fn kernel(grid: &Grid, radius: f64) -> BallKernel {
        let n = grid.total_points();
        let mut indicator = vec![0.0f64; n];
        let mut count = 0;
        for (flat, v) in indicator.iter_mut().enumerate() {
            if grid.torus_distance(0, flat) <= radius {
                *v = 1.0;
                count += 1;
            }
        }
        BallKernel {
            radius,
            count,
            spectral: fft::to_spectral(grid, &indicator),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kernels(&self) -> &[BallKernel] {
        &self.kernels
    }

    pub fn radii(&self) -> Vec<f64> {
        self.kernels.iter().map(|k| k.radius).collect()
    }

    pub fn center_stride(&self) -> usize {
        self.center_stride
    }

    /// Flat indices of the scan centers.
    pub fn centers(&self) -> Vec<usize> {
        let m = self.grid.points_per_axis();
        let s = self.center_stride;
        let mut out = Vec::new();
        match self.grid.dim() {
            2 => {
                for i in (0..m).step_by(s) {
                    for j in (0..m).step_by(s) {
                        out.push(self.grid.flatten(&[i, j]));
                    }
                }
            }
            _ => {
                for i in (0..m).step_by(s) {
                    for j in (0..m).step_by(s) {
                        for l in (0..m).step_by(s) {
                            out.push(self.grid.flatten(&[i, j, l]));
                        }
                    }
                }
            }
        }
        out
    }

    /// Discrete volume of one ball, `count * h^N`.
    pub fn ball_volume(&self, kernel_index: usize) -> f64 {
        self.kernels[kernel_index].count as f64 * self.grid.cell_volume()
    }

    /// Ball sums of a density given by plain values:
    /// `S_r(x) = h^N sum_{|y-x| <= r} dens(y)` for every lattice center `x`,
    /// one array per radius, via circular convolution.
    pub fn ball_sums(&self, density: &[f64]) -> Vec<Vec<f64>> {
        let spec = fft::to_spectral(&self.grid, density);
        self.ball_sums_from_spectral(&spec)
    }

    /// Same as [`BallFamily::ball_sums`] for a field that already carries
    /// its spectrum.
    pub fn ball_sums_field(&self, density: &ScalarField) -> Vec<Vec<f64>> {
        self.ball_sums_from_spectral(density.spectral())
    }

    fn ball_sums_from_spectral(&self, spec: &[C64]) -> Vec<Vec<f64>> {
        let vol = self.grid.volume();
        self.kernels
            .iter()
            .map(|kern| {
                let prod: Vec<C64> = spec
                    .iter()
                    .zip(&kern.spectral)
                    .map(|(a, b)| a * b)
                    .collect();
                let mut vals = fft::to_values(&self.grid, &prod);
                for v in &mut vals {
                    *v *= vol;
                }
                vals
            })
            .collect()
    }

    /// Offsets (as flat-index contributions) of every lattice point inside
    /// the ball of one kernel, for direct scans.
    pub fn ball_member_indices(&self, kernel_index: usize, center: usize) -> Vec<usize> {
        let r = self.kernels[kernel_index].radius;
        (0..self.grid.total_points())
            .filter(|&y| self.grid.torus_distance(center, y) <= r)
            .collect()
    }
}
