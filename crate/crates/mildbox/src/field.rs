//! Scalar and vector fields on the periodic grid, with their spectral
//! representation kept consistent, plus the Fourier-space differential
//! operators: gradient, divergence, Riesz transforms and the Leray
//! projection.

use crate::fft;
use crate::grid::Grid;
use crate::{Error, Result};
use num_complex::Complex;

type C64 = Complex<f64>;

/// Real scalar field with a cached Fourier coefficient array.
///
/// Both representations are always present and consistent; operations
/// produce new fields rather than mutating in place.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    spectral: Vec<C64>,
}

impl ScalarField {
    /// Field from grid values. Rejects NaN/Inf and wrong lengths.
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.total_points() {
            return Err(Error::GridMismatch(format!(
                "value array has {} entries, grid has {}",
                values.len(),
                grid.total_points()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("field values".into()));
        }
        let spectral = fft::to_spectral(&grid, &values);
        Ok(Self {
            grid,
            values,
            spectral,
        })
    }

    /// Field from Fourier coefficients. The caller is responsible for
    /// Hermitian symmetry; the imaginary residue of the inverse transform
    /// is discarded.
    pub fn from_spectral(grid: Grid, spectral: Vec<C64>) -> Self {
        debug_assert_eq!(spectral.len(), grid.total_points());
        let values = fft::to_values(&grid, &spectral);
        Self {
            grid,
            values,
            spectral,
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.total_points();
        Self {
            grid,
            values: vec![0.0; n],
            spectral: vec![C64::default(); n],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let n = grid.total_points();
        let mut spectral = vec![C64::default(); n];
        spectral[0] = C64::new(c, 0.0);
        Self {
            grid,
            values: vec![c; n],
            spectral,
        }
    }

    /// Sample a function of the physical coordinates.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut values = vec![0.0; grid.total_points()];
        for (flat, v) in values.iter_mut().enumerate() {
            let idx = grid.unflatten(flat);
            let mut x = [0.0; 3];
            for ax in 0..grid.dim() {
                x[ax] = grid.coordinate(idx[ax]);
            }
            *v = f(x);
        }
        Self::from_values(grid, values).expect("sampled function produced non-finite values")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spectral(&self) -> &[C64] {
        &self.spectral
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Map the coefficient array through a spectral multiplier.
    pub fn map_spectral(&self, f: impl Fn(usize, [f64; 3], f64, C64) -> C64) -> Self {
        let mut out = vec![C64::default(); self.spectral.len()];
        self.grid.for_each_mode(|flat, k, ksq| {
            out[flat] = f(flat, k, ksq, self.spectral[flat]);
        });
        Self::from_spectral(self.grid.clone(), out)
    }

    /// Pointwise product with 2/3-rule dealiasing of the result.
    pub fn product_dealiased(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let vals: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        let mut spec = fft::to_spectral(&self.grid, &vals);
        dealias_spectral(&self.grid, &mut spec);
        Self::from_spectral(self.grid.clone(), spec)
    }

    /// Truncate this field to the 2/3 dealiasing band.
    pub fn dealiased(&self) -> Self {
        let mut spec = self.spectral.clone();
        dealias_spectral(&self.grid, &mut spec);
        Self::from_spectral(self.grid.clone(), spec)
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
            spectral: self.spectral.iter().map(|c| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            spectral: self
                .spectral
                .iter()
                .zip(&other.spectral)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Cyclic shift by whole grid cells; exact permutation of values.
    pub fn shifted(&self, offset: &[usize]) -> Self {
        let m = self.grid.points_per_axis();
        let mut values = vec![0.0; self.values.len()];
        for (flat, out) in values.iter_mut().enumerate() {
            let idx = self.grid.unflatten(flat);
            let mut src = [0usize; 3];
            for ax in 0..self.grid.dim() {
                src[ax] = (idx[ax] + m - offset[ax] % m) % m;
            }
            *out = self.values[self.grid.flatten(&src[..self.grid.dim()])];
        }
        Self::from_values(self.grid.clone(), values).expect("shift of finite field")
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |a, &v| a.min(v))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v))
    }

    /// Grid-quadrature L2 norm.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Grid-quadrature L1 norm.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.grid.cell_volume()
    }

    /// Mean value, i.e. the `k = 0` coefficient.
    pub fn mean(&self) -> f64 {
        self.spectral[0].re
    }

    /// Total integral over the torus.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// L2 inner product by grid quadrature.
    pub fn inner(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    /// Partial derivative along one axis (multiplier `i k_ax`).
    pub fn derivative(&self, ax: usize) -> Self {
        self.map_spectral(|_, k, _, c| C64::new(0.0, k[ax]) * c)
    }

    /// Spectral gradient; component `j` has coefficients `i k_j fhat(k)`.
    pub fn gradient(&self) -> VectorField {
        let comps = (0..self.grid.dim()).map(|ax| self.derivative(ax)).collect();
        VectorField { components: comps }
    }

    /// Laplacian (multiplier `-|k|^2`).
    pub fn laplacian(&self) -> Self {
        self.map_spectral(|_, _, ksq, c| -ksq * c)
    }

    /// Riesz transform `R_j = d_j (-Delta)^{-1/2}`; the zero mode is mapped
    /// to zero.
    pub fn riesz(&self, ax: usize) -> Self {
        self.map_spectral(|_, k, ksq, c| {
            if ksq == 0.0 {
                C64::default()
            } else {
                C64::new(0.0, k[ax] / ksq.sqrt()) * c
            }
        })
    }
}

/// Zero out all modes with any `|signed_mode| > M/3` (Orszag 2/3 rule).
pub fn dealias_spectral(grid: &Grid, spec: &mut [C64]) {
    let cutoff = grid.dealias_cutoff();
    let m = grid.points_per_axis();
    for (flat, c) in spec.iter_mut().enumerate() {
        let mut idx = flat;
        let mut kill = false;
        for _ in 0..grid.dim() {
            let mi = idx % m;
            idx /= m;
            let half = (m / 2) as i64;
            let s = if (mi as i64) < half {
                mi as i64
            } else {
                mi as i64 - m as i64
            };
            if s.abs() > cutoff {
                kill = true;
                break;
            }
        }
        if kill {
            *c = C64::default();
        }
    }
}

/// Vector field with `N` scalar components.
#[derive(Clone, Debug)]
pub struct VectorField {
    components: Vec<ScalarField>,
}

impl VectorField {
    pub fn from_components(components: Vec<ScalarField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::GridMismatch("vector field with no components".into()));
        }
        let grid = components[0].grid().clone();
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "vector field needs {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| *c.grid() != grid) {
            return Err(Error::GridMismatch("vector components on different grids".into()));
        }
        Ok(Self { components })
    }

    pub fn zeros(grid: Grid) -> Self {
        let comps = (0..grid.dim()).map(|_| ScalarField::zeros(grid.clone())).collect();
        Self { components: comps }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn component(&self, ax: usize) -> &ScalarField {
        &self.components[ax]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|c| c.scale(a))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Spectral divergence `sum_j i k_j vhat_j(k)`.
    pub fn divergence(&self) -> ScalarField {
        let grid = self.grid().clone();
        let mut out = vec![C64::default(); grid.total_points()];
        grid.for_each_mode(|flat, k, _| {
            let mut acc = C64::default();
            for (ax, comp) in self.components.iter().enumerate() {
                acc += C64::new(0.0, k[ax]) * comp.spectral()[flat];
            }
            out[flat] = acc;
        });
        ScalarField::from_spectral(grid, out)
    }

    /// Leray projection onto divergence-free fields:
    /// `vhat - k (k . vhat) / |k|^2`, zero mode passed through.
    pub fn leray_project(&self) -> Self {
        let grid = self.grid().clone();
        let dim = grid.dim();
        let n = grid.total_points();
        let mut out: Vec<Vec<C64>> = (0..dim).map(|_| vec![C64::default(); n]) .collect();
        grid.for_each_mode(|flat, k, ksq| {
            if ksq == 0.0 {
                for (ax, comp) in out.iter_mut().enumerate() {
                    comp[flat] = self.components[ax].spectral()[flat];
                }
            } else {
                let mut kdotv = C64::default();
                for ax in 0..dim {
                    kdotv += k[ax] * self.components[ax].spectral()[flat];
                }
                let factor = kdotv / ksq;
                for (ax, comp) in out.iter_mut().enumerate() {
                    comp[flat] = self.components[ax].spectral()[flat] - k[ax] * factor;
                }
            }
        });
        Self {
            components: out
                .into_iter()
                .map(|spec| ScalarField::from_spectral(grid.clone(), spec))
                .collect(),
        }
    }

    /// Pointwise dot product with another vector field, dealiased.
    pub fn dot_dealiased(&self, other: &Self) -> ScalarField {
        let grid = self.grid().clone();
        let mut vals = vec![0.0; grid.total_points()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for (v, (x, y)) in vals.iter_mut().zip(a.values().iter().zip(b.values())) {
                *v += x * y;
            }
        }
        let mut spec = fft::to_spectral(&grid, &vals);
        dealias_spectral(&grid, &mut spec);
        ScalarField::from_spectral(grid, spec)
    }

    /// Pointwise Euclidean magnitude squared, as plain values (no dealias).
    pub fn magnitude_squared_values(&self) -> Vec<f64> {
        let n = self.grid().total_points();
        let mut vals = vec![0.0; n];
        for comp in &self.components {
            for (v, x) in vals.iter_mut().zip(comp.values()) {
                *v += x * x;
            }
        }
        vals
    }

    /// Sup of the pointwise Euclidean magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.magnitude_squared_values()
            .iter()
            .fold(0.0f64, |a, &v| a.max(v))
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        (self
            .magnitude_squared_values()
            .iter()
            .sum::<f64>()
            * self.grid().cell_volume())
        .sqrt()
    }

    /// Sup norm of the divergence, the solenoidality defect.
    pub fn divergence_sup(&self) -> f64 {
        self.divergence().sup_norm()
    }

    pub fn dealiased(&self) -> Self {
        self.map(|c| c.dealiased())
    }

    pub fn shifted(&self, offset: &[usize]) -> Self {
        self.map(|c| c.shifted(offset))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(m: usize) -> Grid {
        Grid::new(2, 2.0 * std::f64::consts::PI, m).unwrap()
    }

    #[test]
    fn roundtrip_consistency() {
        let g = grid2(32);
        let f = ScalarField::from_fn(g, |x| (x[0].sin() + (2.0 * x[1]).cos()) * 0.7);
        let back = ScalarField::from_spectral(f.grid().clone(), f.spectral().to_vec());
        let mut err: f64 = 0.0;
        for (a, b) in f.values().iter().zip(back.values()) {
            err = err.max((a - b).abs());
        }
        assert!(err < 1e-12 * f.sup_norm());
    }

    #[test]
    fn gradient_of_single_mode() {
        let g = grid2(32);
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        let grad = f.gradient();
        let expect = ScalarField::from_fn(grad.grid().clone(), |x| x[0].cos());
        let err = grad.component(0).sub(&expect).sup_norm();
        assert!(err < 1e-12, "gradient error {err}");
        assert!(grad.component(1).sup_norm() < 1e-12);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = grid2(16);
        let f = ScalarField::constant(g, 3.5);
        assert!(f.gradient().sup_norm() < 1e-14);
    }

    #[test]
    fn div_grad_is_laplacian() {
        let g = grid2(32);
        let f = ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() + (3.0 * x[0]).cos());
        let lhs = f.gradient().divergence();
        let rhs = f.laplacian();
        assert!(lhs.sub(&rhs).sup_norm() < 1e-10);
    }

    #[test]
    fn stream_function_field_is_divergence_free() {
        let g = grid2(32);
        let psi = ScalarField::from_fn(g, |x| (x[0].sin()) * (2.0 * x[1]).cos());
        let v = VectorField::from_components(vec![
            psi.derivative(1).scale(-1.0),
            psi.derivative(0),
        ])
        .unwrap();
        assert!(v.divergence_sup() < 1e-12);
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_solenoidal() {
        let g = grid2(32);
        // Zero-mean pressure-like scalar.
        let p = ScalarField::from_fn(g.clone(), |x| (x[0].sin()) * (x[1].sin()) + (2.0 * x[0]).cos());
        let gradp = p.gradient();
        let projected = gradp.leray_project();
        assert!(projected.sup_norm() < 1e-12 * gradp.sup_norm().max(1.0));

        // (sin x2, 0) is already solenoidal and must pass through unchanged.
        let v = VectorField::from_components(vec![
            ScalarField::from_fn(g.clone(), |x| x[1].sin()),
            ScalarField::zeros(g),
        ])
        .unwrap();
        let pv = v.leray_project();
        assert!(pv.sub(&v).sup_norm() < 1e-12);
        assert!(pv.divergence_sup() < 1e-12);
    }

    #[test]
    fn leray_idempotent() {
        let g = grid2(16);
        let v = VectorField::from_components(vec![
            ScalarField::from_fn(g.clone(), |x| (x[0] + x[1]).sin() + (2.0 * x[1]).cos()),
            ScalarField::from_fn(g, |x| (x[0] - 2.0 * x[1]).cos()),
        ])
        .unwrap();
        let p1 = v.leray_project();
        let p2 = p1.leray_project();
        assert!(p2.sub(&p1).sup_norm() < 1e-12);
        assert!(p1.divergence_sup() < 1e-12);
    }

    #[test]
    fn riesz_single_mode_and_identity() {
        let g = grid2(32);
        let f = ScalarField::from_fn(g.clone(), |x| x[0].cos());
        let r1 = f.riesz(0);
        let expect = ScalarField::from_fn(g.clone(), |x| -x[0].sin());
        assert!(r1.sub(&expect).sup_norm() < 1e-12);

        // Sum of squared Riesz transforms is minus the identity on zero-mean
        // fields.
        let f = ScalarField::from_fn(g, |x| (x[0] + x[1]).sin() + (2.0 * x[0] - x[1]).cos());
        let rr = f.riesz(0).riesz(0).add(&f.riesz(1).riesz(1));
        assert!(rr.add(&f).sup_norm() < 1e-11);

        // Parseval bound on random-ish zero-mean data.
        assert!(f.riesz(0).l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn adjointness_of_gradient_and_divergence() {
        let g = grid2(32);
        let f = ScalarField::from_fn(g.clone(), |x| (2.0 * x[0]).sin() * x[1].cos());
        let v = VectorField::from_components(vec![
            ScalarField::from_fn(g.clone(), |x| (x[1] - x[0]).sin()),
            ScalarField::from_fn(g, |x| (x[0] + 2.0 * x[1]).cos()),
        ])
        .unwrap();
        let lhs: f64 = (0..2)
            .map(|ax| f.gradient().component(ax).inner(v.component(ax)))
            .sum();
        let rhs = -f.inner(&v.divergence());
        assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = grid2(16);
        let mut vals = vec![0.0; g.total_points()];
        vals[3] = f64::NAN;
        assert!(ScalarField::from_values(g, vals).is_err());
    }

    #[test]
    fn product_dealiased_drops_high_modes() {
        let g = grid2(8); // cutoff |m| <= 2
        let f = ScalarField::from_fn(g.clone(), |x| (2.0 * x[0]).cos());
        let p = f.product_dealiased(&f); // 1/2 + cos(4 x0)/2, mode 4 dealiased
        let expect = ScalarField::constant(g, 0.5);
        assert!(p.sub(&expect).sup_norm() < 1e-13);
    }

    #[test]
    fn shift_is_exact_permutation() {
        let g = grid2(16);
        let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() + x[1].cos());
        let s = f.shifted(&[5, 11]);
        assert_eq!(f.sup_norm(), s.sup_norm());
        assert!((f.l2_norm() - s.l2_norm()).abs() < 1e-12);
    }
}
