//! Littlewood-Paley projections on the discrete wavenumber lattice.
//!
//! The profile is the classical telescoping bump: a smooth radial cutoff
//! `eta` built from `exp(-1/t)`, with `psi(rho) = eta(rho) - eta(2 rho)`
//! supported in the annulus `1/2 <= rho <= 2` and summing to one over
//! dyadic dilations.

use crate::field::ScalarField;
use crate::grid::Grid;
use crate::{Error, Result};

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`.
fn smooth_step(t: f64) -> f64 {
    let a = bump(t);
    let b = bump(1.0 - t);
    a / (a + b)
}

/// Radial cutoff: 1 on `rho <= 1`, 0 on `rho >= 2`.
fn eta(rho: f64) -> f64 {
    smooth_step(2.0 - rho)
}

/// Annulus profile `psi(rho) = eta(rho) - eta(2 rho)`.
pub fn psi_profile(rho: f64) -> f64 {
    eta(rho) - eta(2.0 * rho)
}

/// Dyadic level bank admissible on a grid's wavenumber lattice.
#[derive(Clone, Debug)]
pub struct LpBank {
    grid: Grid,
    levels: Vec<i32>,
}

impl LpBank {
    /// Levels covering every nonzero lattice magnitude: all `j` whose
    /// annulus `(2^{j-1}, 2^{j+1})` meets `[k_min, k_max_lattice]`.
    pub fn new(grid: &Grid) -> Result<Self> {
        let k_min = 2.0 * std::f64::consts::PI / grid.box_length();
        let k_max = grid.max_wavenumber() * (grid.dim() as f64).sqrt();
        let j_lo = (k_min.log2() - 1.0).floor() as i32;
        let j_hi = (k_max.log2() + 1.0).ceil() as i32;
        if j_hi < j_lo {
            return Err(Error::EmptyFamily("no admissible Littlewood-Paley level".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            levels: (j_lo..=j_hi).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn levels(&self) -> &[i32] {
        &self.levels
    }

    /// Dyadic block `Delta_j f`: multiplier `psi(2^{-j} |k|)`.
    pub fn block(&self, f: &ScalarField, j: i32) -> ScalarField {
        let scale = 2.0f64.powi(-j);
        f.map_spectral(|_, _, ksq, c| {
            if ksq == 0.0 {
                Default::default()
            } else {
                c * psi_profile(scale * ksq.sqrt())
            }
        })
    }

    /// Spectral energy of a block without synthesizing it: zero exactly
    /// when the annulus misses the field's support.
    pub fn block_energy(&self, f: &ScalarField, j: i32) -> f64 {
        let scale = 2.0f64.powi(-j);
        let mut acc = 0.0;
        self.grid.for_each_mode(|flat, _, ksq| {
            if ksq > 0.0 {
                let w = psi_profile(scale * ksq.sqrt());
                if w != 0.0 {
                    acc += w * w * f.spectral()[flat].norm_sqr();
                }
            }
        });
        acc
    }

    /// Worst deviation of `sum_j psi(2^{-j}|k|)` from 1 over the nonzero
    /// lattice modes; the telescoping construction keeps this at roundoff.
    pub fn partition_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        self.grid.for_each_mode(|_, _, ksq| {
            if ksq > 0.0 {
                let rho = ksq.sqrt();
                let total: f64 = self
                    .levels
                    .iter()
                    .map(|&j| psi_profile(2.0f64.powi(-j) * rho))
                    .sum();
                worst = worst.max((total - 1.0).abs());
            }
        });
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_support_and_range() {
        assert_eq!(psi_profile(0.4), 0.0);
        assert_eq!(psi_profile(2.5), 0.0);
        assert!((psi_profile(1.0) - 1.0).abs() < 1e-15);
        for rho in [0.6, 0.8, 1.3, 1.9] {
            let v = psi_profile(rho);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn partition_of_unity_on_lattice() {
        let g = Grid::new(2, 2.0 * std::f64::consts::PI, 32).unwrap();
        let bank = LpBank::new(&g).unwrap();
        assert!(bank.partition_defect() < 1e-10);
    }

    #[test]
    fn block_sum_reconstructs_zero_mean_field() {
        let g = Grid::new(2, 2.0 * std::f64::consts::PI, 32).unwrap();
        let bank = LpBank::new(&g).unwrap();
        let f = ScalarField::from_fn(g.clone(), |x| x[0].sin() + (5.0 * x[1]).cos());
        let mut acc = ScalarField::zeros(g);
        for &j in bank.levels() {
            acc = acc.add(&bank.block(&f, j));
        }
        assert!(acc.sub(&f).sup_norm() < 1e-10);
    }

    #[test]
    fn single_dyadic_mode_hits_one_level() {
        let g = Grid::new(2, 2.0 * std::f64::consts::PI, 32).unwrap();
        let bank = LpBank::new(&g).unwrap();
        // |k| = 2 = 2^1.
        let f = ScalarField::from_fn(g, |x| (2.0 * x[0]).sin());
        for &j in bank.levels() {
            let norm = bank.block(&f, j).sup_norm();
            if j == 1 {
                assert!((norm - 1.0).abs() < 1e-10);
            } else {
                assert!(norm < 1e-12, "level {j} leaked {norm}");
            }
        }
    }
}
