//! Deterministic initial-data generators: blobs, single modes, Taylor-Green
//! vortices, seeded random band-limited fields (scalar and solenoidal), and
//! smoothly windowed periodic surrogates of homogeneous profiles.
//!
//! All randomness comes from `ChaCha8` keyed by a caller seed, so equal
//! seeds reproduce equal fields byte for byte.

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::{Error, Result};
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

type C64 = Complex<f64>;

/// Initial-data preset kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataPreset {
    /// Periodized Gaussian bump, sup-normalized to `amplitude`.
    GaussianBlob { amplitude: f64, width: f64 },
    /// `amplitude * cos(k . x)` with integer mode numbers.
    SingleMode { amplitude: f64, mode: [i64; 3] },
    /// Taylor-Green vortex (vector) or its stream function (scalar).
    TaylorGreen { amplitude: f64 },
    /// Random solenoidal band-limited field, sup-normalized.
    RandomDivfree { amplitude: f64, max_mode: i64 },
    /// Random band-limited field, sup-normalized.
    RandomBandlimited { amplitude: f64, max_mode: i64 },
    /// Smoothly windowed surrogate of a homogeneous-degree profile:
    /// `amplitude * window(rho) * (rho^2 + core^2)^{degree/2}` with
    /// `rho` the torus distance to the box center; the window vanishes
    /// beyond `L/4` so the profile extends periodically as a smooth field.
    WindowedHomogeneous { amplitude: f64, degree: f64 },
}

impl DataPreset {
    pub fn amplitude(&self) -> f64 {
        match self {
            DataPreset::GaussianBlob { amplitude, .. }
            | DataPreset::SingleMode { amplitude, .. }
            | DataPreset::TaylorGreen { amplitude }
            | DataPreset::RandomDivfree { amplitude, .. }
            | DataPreset::RandomBandlimited { amplitude, .. }
            | DataPreset::WindowedHomogeneous { amplitude, .. } => *amplitude,
        }
    }

    /// Scalar realization of the preset.
    pub fn scalar_field(&self, grid: &Grid, seed: u64) -> Result<ScalarField> {
        match *self {
            DataPreset::GaussianBlob { amplitude, width } => gaussian_blob(grid, amplitude, width),
            DataPreset::SingleMode { amplitude, mode } => single_mode_scalar(grid, amplitude, mode),
            DataPreset::TaylorGreen { amplitude } => {
                // Stream function of the vortex.
                let k0 = 2.0 * std::f64::consts::PI / grid.box_length();
                Ok(ScalarField::from_fn(grid.clone(), move |x| {
                    amplitude * (k0 * x[0]).sin() * (k0 * x[1]).sin()
                }))
            }
            DataPreset::RandomBandlimited { amplitude, max_mode } => {
                Ok(random_bandlimited(grid, amplitude, max_mode, seed))
            }
            DataPreset::RandomDivfree { .. } => Err(Error::InvalidParam(
                "divergence-free preset generates vector fields".into(),
            )),
            DataPreset::WindowedHomogeneous { amplitude, degree } => {
                Ok(windowed_homogeneous(grid, amplitude, degree))
            }
        }
    }

    /// Vector realization of the preset; solenoidal kinds come out
    /// divergence-free to roundoff.
    pub fn vector_field(&self, grid: &Grid, seed: u64) -> Result<VectorField> {
        match *self {
            DataPreset::TaylorGreen { amplitude } => taylor_green(grid, amplitude),
            DataPreset::RandomDivfree { amplitude, max_mode } => {
                let raw = (0..grid.dim())
                    .map(|ax| random_bandlimited(grid, 1.0, max_mode, seed ^ (ax as u64 + 1) << 32))
                    .collect::<Vec<_>>();
                let v = VectorField::from_components(raw)?.leray_project();
                let sup = v.sup_norm();
                if sup == 0.0 {
                    return Ok(v);
                }
                Ok(v.scale(amplitude / sup))
            }
            DataPreset::SingleMode { amplitude, mode } => single_mode_solenoidal(grid, amplitude, mode),
            DataPreset::WindowedHomogeneous { amplitude, degree } => {
                // Gradient of the (degree + 1) scalar surrogate: keeps the
                // stated homogeneity away from the core and is curl-free,
                // as a gravitational forcing should be.
                let potential = windowed_homogeneous(grid, amplitude, degree + 1.0);
                let g = potential.gradient();
                let sup = g.sup_norm();
                if sup == 0.0 {
                    return Ok(g);
                }
                Ok(g.scale(amplitude / sup))
            }
            DataPreset::GaussianBlob { .. } | DataPreset::RandomBandlimited { .. } => {
                Err(Error::InvalidParam(
                    "preset generates scalar fields; wrap it per component".into(),
                ))
            }
        }
    }
}

fn gaussian_blob(grid: &Grid, amplitude: f64, width: f64) -> Result<ScalarField> {
    if !(width > 0.0) {
        return Err(Error::InvalidParam(format!("blob width {width}")));
    }
    let center = grid.box_length() / 2.0;
    let a = width * width / 2.0;
    let n = grid.total_points();
    let mut spec = vec![C64::default(); n];
    grid.for_each_mode(|flat, k, ksq| {
        // Fourier coefficients of the periodized Gaussian centered at x0:
        // e^{-a |k|^2} e^{-i k . x0} / L^N (times the continuum mass 1).
        let phase = -(k[0] + k[1] + k[2]) * center;
        let mag = (-a * ksq).exp() / grid.volume();
        spec[flat] = C64::new(phase.cos(), phase.sin()) * mag;
    });
    let f = ScalarField::from_spectral(grid.clone(), spec);
    let sup = f.sup_norm();
    if amplitude == 0.0 || sup == 0.0 {
        return Ok(ScalarField::zeros(grid.clone()));
    }
    Ok(f.scale(amplitude / sup))
}

fn single_mode_scalar(grid: &Grid, amplitude: f64, mode: [i64; 3]) -> Result<ScalarField> {
    check_mode(grid, mode)?;
    let base = 2.0 * std::f64::consts::PI / grid.box_length();
    Ok(ScalarField::from_fn(grid.clone(), move |x| {
        let phase = base * (mode[0] as f64 * x[0] + mode[1] as f64 * x[1] + mode[2] as f64 * x[2]);
        amplitude * phase.cos()
    }))
}

fn single_mode_solenoidal(grid: &Grid, amplitude: f64, mode: [i64; 3]) -> Result<VectorField> {
    check_mode(grid, mode)?;
    let base = 2.0 * std::f64::consts::PI / grid.box_length();
    let k = [
        base * mode[0] as f64,
        base * mode[1] as f64,
        base * mode[2] as f64,
    ];
    let norm = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidParam("zero mode has no solenoidal direction".into()));
    }
    // Unit vector orthogonal to k.
    let e = if grid.dim() == 2 {
        [-k[1] / norm, k[0] / norm, 0.0]
    } else if k[0].abs() > 1e-14 || k[1].abs() > 1e-14 {
        let m = (k[0] * k[0] + k[1] * k[1]).sqrt();
        [-k[1] / m, k[0] / m, 0.0]
    } else {
        [1.0, 0.0, 0.0]
    };
    let comps = (0..grid.dim())
        .map(|ax| {
            ScalarField::from_fn(grid.clone(), move |x| {
                let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
                amplitude * e[ax] * phase.cos()
            })
        })
        .collect();
    VectorField::from_components(comps)
}

fn check_mode(grid: &Grid, mode: [i64; 3]) -> Result<()> {
    let half = (grid.points_per_axis() / 2) as i64;
    for ax in 0..grid.dim() {
        if mode[ax].abs() >= half {
            return Err(Error::InvalidParam(format!(
                "mode {mode:?} outside the resolvable band"
            )));
        }
    }
    if grid.dim() == 2 && mode[2] != 0 {
        return Err(Error::InvalidParam("2-d grid has no third mode index".into()));
    }
    Ok(())
}

fn taylor_green(grid: &Grid, amplitude: f64) -> Result<VectorField> {
    let k0 = 2.0 * std::f64::consts::PI / grid.box_length();
    let comps: Vec<ScalarField> = match grid.dim() {
        2 => vec![
            ScalarField::from_fn(grid.clone(), move |x| {
                amplitude * (k0 * x[0]).sin() * (k0 * x[1]).cos()
            }),
            ScalarField::from_fn(grid.clone(), move |x| {
                -amplitude * (k0 * x[0]).cos() * (k0 * x[1]).sin()
            }),
        ],
        _ => vec![
            ScalarField::from_fn(grid.clone(), move |x| {
                amplitude * (k0 * x[0]).sin() * (k0 * x[1]).cos() * (k0 * x[2]).cos()
            }),
            ScalarField::from_fn(grid.clone(), move |x| {
                -amplitude * (k0 * x[0]).cos() * (k0 * x[1]).sin() * (k0 * x[2]).cos()
            }),
            ScalarField::zeros(grid.clone()),
        ],
    };
    VectorField::from_components(comps)
}

/// Random real field with independent Gaussian coefficients on the modes
/// `0 < |m|_inf <= max_mode`, sup-normalized to `amplitude`.
pub fn random_bandlimited(grid: &Grid, amplitude: f64, max_mode: i64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = grid.points_per_axis() as i64;
    let n = grid.total_points();
    let mut spec = vec![C64::default(); n];
    let idx_of = |modes: [i64; 3]| -> usize {
        let mut idx = [0usize; 3];
        for ax in 0..grid.dim() {
            idx[ax] = modes[ax].rem_euclid(m) as usize;
        }
        grid.flatten(&idx[..grid.dim()])
    };
    let mut add_pair = |modes: [i64; 3], rng: &mut ChaCha8Rng| {
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        let neg = [-modes[0], -modes[1], -modes[2]];
        spec[idx_of(modes)] += C64::new(re, im) * 0.5;
        spec[idx_of(neg)] += C64::new(re, -im) * 0.5;
    };
    match grid.dim() {
        2 => {
            for mx in -max_mode..=max_mode {
                for my in -max_mode..=max_mode {
                    if mx == 0 && my == 0 {
                        continue;
                    }
                    add_pair([mx, my, 0], &mut rng);
                }
            }
        }
        _ => {
            for mx in -max_mode..=max_mode {
                for my in -max_mode..=max_mode {
                    for mz in -max_mode..=max_mode {
                        if mx == 0 && my == 0 && mz == 0 {
                            continue;
                        }
                        add_pair([mx, my, mz], &mut rng);
                    }
                }
            }
        }
    }
    let f = ScalarField::from_spectral(grid.clone(), spec);
    let sup = f.sup_norm();
    if sup == 0.0 || amplitude == 0.0 {
        return ScalarField::zeros(grid.clone());
    }
    f.scale(amplitude / sup)
}

/// Spatially localized random band-limited field: a random field under a
/// smooth bump envelope, then truncated to the band. Used where a norm
/// comparison wants the energy concentrated in one ball.
pub fn random_wave_packet(grid: &Grid, amplitude: f64, max_mode: i64, seed: u64) -> ScalarField {
    let raw = random_bandlimited(grid, 1.0, max_mode, seed);
    let dim = grid.dim();
    let l = grid.box_length();
    let center = l / 2.0;
    let radius = l / 5.0;
    let envelope = ScalarField::from_fn(grid.clone(), move |x| {
        let mut d2 = 0.0;
        for &xi in x.iter().take(dim) {
            let d = torus_delta(xi, center, l);
            d2 += d * d;
        }
        let rho2 = d2 / (radius * radius);
        if rho2 >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - rho2)).exp()
        }
    });
    let f = raw.product_dealiased(&envelope);
    let sup = f.sup_norm();
    if sup == 0.0 {
        return ScalarField::zeros(grid.clone());
    }
    f.scale(amplitude / sup)
}

fn torus_delta(a: f64, b: f64, period: f64) -> f64 {
    let mut d = (a - b).abs() % period;
    if d > period / 2.0 {
        d = period - d;
    }
    d
}

fn windowed_homogeneous(grid: &Grid, amplitude: f64, degree: f64) -> ScalarField {
    let l = grid.box_length();
    let center = l / 2.0;
    // Regularized core wide enough for the grid to resolve.
    let core = (l / 16.0).max(4.0 * grid.spacing());
    let cutoff = l / 4.0;
    ScalarField::from_fn(grid.clone(), move |x| {
        let mut d2 = 0.0;
        for ax in 0..grid.dim() {
            let d = torus_delta(x[ax], center, l);
            d2 += d * d;
        }
        let rho = (d2 + core * core).sqrt();
        let t = d2.sqrt() / cutoff;
        let window = if t >= 1.0 {
            0.0
        } else {
            ((-t * t / (1.0 - t * t)).exp()).powi(2)
        };
        amplitude * window * rho.powf(degree)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(m: usize) -> Grid {
        Grid::new(2, 2.0 * std::f64::consts::PI, m).unwrap()
    }

    #[test]
    fn zero_amplitude_blob_is_zero() {
        let g = grid2(32);
        let f = DataPreset::GaussianBlob { amplitude: 0.0, width: 0.8 }
            .scalar_field(&g, 0)
            .unwrap();
        assert_eq!(f.sup_norm(), 0.0);
    }

    #[test]
    fn blob_is_positive_and_normalized() {
        let g = grid2(64);
        let amp = 0.01;
        let f = DataPreset::GaussianBlob { amplitude: amp, width: 0.8 }
            .scalar_field(&g, 0)
            .unwrap();
        assert!((f.sup_norm() - amp).abs() < 1e-14);
        assert!(f.min_value() > -1e-12 * amp, "blob min {}", f.min_value());
    }

    #[test]
    fn taylor_green_divergence_free() {
        for dim in [2usize, 3] {
            let g = Grid::new(dim, 2.0 * std::f64::consts::PI, 16).unwrap();
            let v = DataPreset::TaylorGreen { amplitude: 1.0 }.vector_field(&g, 0).unwrap();
            assert!(v.divergence_sup() < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn random_divfree_is_divergence_free_and_seed_deterministic() {
        let g = grid2(32);
        let preset = DataPreset::RandomDivfree { amplitude: 0.5, max_mode: 5 };
        let a = preset.vector_field(&g, 42).unwrap();
        let b = preset.vector_field(&g, 42).unwrap();
        assert!(a.divergence_sup() < 1e-12);
        for ax in 0..2 {
            assert_eq!(a.component(ax).values(), b.component(ax).values());
        }
        let c = preset.vector_field(&g, 43).unwrap();
        assert!(a.sub(&c).sup_norm() > 1e-6);
    }

    #[test]
    fn random_bandlimited_band_respected() {
        let g = grid2(32);
        let f = random_bandlimited(&g, 1.0, 3, 7);
        g.for_each_mode(|flat, _, _| {
            let idx = g.unflatten(flat);
            let s0 = g.signed_mode(idx[0]).abs();
            let s1 = g.signed_mode(idx[1]).abs();
            if s0 > 3 || s1 > 3 {
                assert!(f.spectral()[flat].norm() < 1e-15);
            }
        });
        assert!((f.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_mode_rejects_unresolvable() {
        let g = grid2(16);
        assert!(DataPreset::SingleMode { amplitude: 1.0, mode: [8, 0, 0] }
            .scalar_field(&g, 0)
            .is_err());
        assert!(DataPreset::SingleMode { amplitude: 1.0, mode: [1, 0, 0] }
            .scalar_field(&g, 0)
            .is_ok());
    }

    #[test]
    fn windowed_homogeneous_smooth_and_periodic() {
        let g = grid2(64);
        let f = DataPreset::WindowedHomogeneous { amplitude: 1.0, degree: -2.0 }
            .scalar_field(&g, 0)
            .unwrap();
        assert!(f.is_finite());
        // The window kills the field near the seam, so the periodic
        // extension is smooth: high modes must be tiny.
        let tail: f64 = {
            let mut acc = 0.0f64;
            g.for_each_mode(|flat, _, ksq| {
                if ksq.sqrt() > 0.8 * g.max_wavenumber() {
                    acc = acc.max(f.spectral()[flat].norm());
                }
            });
            acc
        };
        assert!(tail < 1e-4 * f.sup_norm(), "spectral tail {tail}");
    }
}
