//! Periodic grid descriptor and the discrete wavenumber lattice.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Uniform periodic grid on the torus `[0, L)^N`, `N` in {2, 3}.
///
/// The wavenumber lattice is `{2*pi*m/L : m in [-M/2, M/2)}` per axis, with
/// `M` points per axis. Flat indices are row-major with the last axis
/// fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    box_length: f64,
    points_per_axis: usize,
}

impl Grid {
    /// Build a grid; rejects `dim` outside {2,3} and odd or tiny `M`.
    pub fn new(dim: usize, box_length: f64, points_per_axis: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if !box_length.is_finite() || box_length <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        if points_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "odd resolution {points_per_axis}"
            )));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidGrid(format!(
                "resolution {points_per_axis} too small, need at least 8"
            )));
        }
        Ok(Self {
            dim,
            box_length,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Grid spacing `L/M`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.points_per_axis as f64
    }

    /// Total number of grid points `M^N`.
    pub fn total_points(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Cell volume `(L/M)^N`, the weight of the grid quadrature.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Torus volume `L^N`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Signed mode number for an axis index: maps `m` to `[-M/2, M/2)`.
    pub fn signed_mode(&self, m: usize) -> i64 {
        let half = (self.points_per_axis / 2) as i64;
        let m = m as i64;
        if m < half {
            m
        } else {
            m - self.points_per_axis as i64
        }
    }

    /// Wavenumber for an axis index, `2*pi*signed_mode/L`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_mode(m) as f64 / self.box_length
    }

    /// All wavenumbers along one axis, in storage order.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|m| self.wavenumber(m)).collect()
    }

    /// Largest wavenumber magnitude present on the lattice (per axis it is
    /// `pi*M/L`, the Nyquist mode).
    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI * self.points_per_axis as f64 / self.box_length
    }

    /// Dealiasing cutoff of the 2/3 rule, in signed mode numbers:
    /// modes with `|signed_mode| > M/3` are truncated after products.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.points_per_axis / 3) as i64
    }

    /// Physical coordinate of an axis index.
    pub fn coordinate(&self, m: usize) -> f64 {
        m as f64 * self.spacing()
    }

    /// Decompose a flat row-major index into per-axis indices.
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        match self.dim {
            2 => [flat / m, flat % m, 0],
            _ => [flat / (m * m), (flat / m) % m, flat % m],
        }
    }

    /// Flat row-major index of per-axis indices (last axis fastest).
    pub fn flatten(&self, idx: &[usize]) -> usize {
        let m = self.points_per_axis;
        match self.dim {
            2 => idx[0] * m + idx[1],
            _ => (idx[0] * m + idx[1]) * m + idx[2],
        }
    }

    /// Minimal-image torus distance between two grid points given by flat
    /// indices.
    pub fn torus_distance(&self, a: usize, b: usize) -> f64 {
        let ia = self.unflatten(a);
        let ib = self.unflatten(b);
        let mut d2 = 0.0;
        for ax in 0..self.dim {
            let d = self.axis_distance(ia[ax], ib[ax]);
            d2 += d * d;
        }
        d2.sqrt()
    }

    /// Minimal-image distance along one axis between two axis indices.
    pub fn axis_distance(&self, a: usize, b: usize) -> f64 {
        let m = self.points_per_axis;
        let d = (a as i64 - b as i64).unsigned_abs() as usize % m;
        let d = d.min(m - d);
        d as f64 * self.spacing()
    }

    /// Visit every spectral mode: `f(flat, k, k_squared)` with `k` the
    /// wavevector (unused components zero).
    pub fn for_each_mode<F: FnMut(usize, [f64; 3], f64)>(&self, mut f: F) {
        let ks = self.axis_wavenumbers();
        let m = self.points_per_axis;
        match self.dim {
            2 => {
                let mut flat = 0;
                for &kx in &ks {
                    for &ky in ks.iter().take(m) {
                        f(flat, [kx, ky, 0.0], kx * kx + ky * ky);
                        flat += 1;
                    }
                }
            }
            _ => {
                let mut flat = 0;
                for &kx in &ks {
                    for &ky in &ks {
                        for &kz in ks.iter().take(m) {
                            f(flat, [kx, ky, kz], kx * kx + ky * ky + kz * kz);
                            flat += 1;
                        }
                    }
                }
            }
        }
    }

    /// Squared wavenumber magnitude for every flat spectral index.
    pub fn ksq_table(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.total_points()];
        self.for_each_mode(|flat, _, ksq| out[flat] = ksq);
        out
    }
}
