//! N-dimensional complex FFT over flat row-major arrays.
//!
//! Thin wrapper around `rustfft` with per-thread plan caching. The transform
//! normalization is fixed so that `to_spectral` followed by `to_values` is
//! the identity: coefficients satisfy `f(x) = sum_k fhat(k) exp(i k.x)`.

use crate::grid::Grid;
use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::default());
}

#[derive(Default)]
struct PlanCache {
    planner: Option<FftPlanner<f64>>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

fn with_plan<R>(len: usize, forward: bool, f: impl FnOnce(&Arc<dyn Fft<f64>>) -> R) -> R {
    PLANS.with(|cache| {
        let mut cache = cache.borrow_mut();
        let planner = cache.planner.get_or_insert_with(FftPlanner::new);
        let plan = if forward {
            planner.plan_fft_forward(len)
        } else {
            planner.plan_fft_inverse(len)
        };
        let map = if forward {
            &mut cache.forward
        } else {
            &mut cache.inverse
        };
        let plan = map.entry(len).or_insert(plan).clone();
        drop(cache);
        f(&plan)
    })
}

/// In-place N-D DFT along every axis. `forward = true` computes the
/// unnormalized forward transform, `false` the unnormalized inverse.
fn transform_nd(grid: &Grid, data: &mut [Complex<f64>], forward: bool) {
    let m = grid.points_per_axis();
    let n = grid.total_points();
    debug_assert_eq!(data.len(), n);
    with_plan(m, forward, |plan| {
        let mut scratch = vec![Complex::default(); m];
        for axis in 0..grid.dim() {
            let stride = m.pow((grid.dim() - 1 - axis) as u32);
            if stride == 1 {
                for line in data.chunks_exact_mut(m) {
                    plan.process(line);
                }
            } else {
                let block = stride * m;
                for outer in 0..n / block {
                    let base = outer * block;
                    for inner in 0..stride {
                        for t in 0..m {
                            scratch[t] = data[base + inner + t * stride];
                        }
                        plan.process(&mut scratch);
                        for t in 0..m {
                            data[base + inner + t * stride] = scratch[t];
                        }
                    }
                }
            }
        }
    });
}

/// Fourier coefficients of real grid values: forward DFT scaled by `1/M^N`.
pub fn to_spectral(grid: &Grid, values: &[f64]) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    transform_nd(grid, &mut data, true);
    let scale = 1.0 / grid.total_points() as f64;
    for c in &mut data {
        *c *= scale;
    }
    data
}

/// Grid values of a coefficient array (unnormalized inverse DFT), keeping
/// the real part. Callers are expected to hand in Hermitian-symmetric
/// spectra; the imaginary residue is at roundoff level for those.
pub fn to_values(grid: &Grid, spectral: &[Complex<f64>]) -> Vec<f64> {
    let mut data = spectral.to_vec();
    transform_nd(grid, &mut data, false);
    data.iter().map(|c| c.re).collect()
}

/// Full complex inverse transform, for callers that need the imaginary part.
pub fn to_values_complex(grid: &Grid, spectral: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut data = spectral.to_vec();
    transform_nd(grid, &mut data, false);
    data
}
