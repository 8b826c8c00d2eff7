//! Deliberately naive reference implementations used as independent oracles
//! by the verification suite: separable direct-summation DFTs (no FFT
//! library), dense propagator matrices applied sample by sample, trapezoid
//! time quadrature on refined meshes, finite differences, image-sum heat
//! kernels and exhaustive ball scans.
//!
//! Nothing here is used by the production paths; keep it simple and slow.

use crate::duhamel::{ScalarTrajectory, VectorTrajectory};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use num_complex::Complex;

type C64 = Complex<f64>;

/// Separable direct-summation DFT (sign = -1 forward, +1 inverse), no
/// normalization.
fn dense_transform(grid: &Grid, data: &mut [C64], sign: f64) {
    let m = grid.points_per_axis();
    let n = grid.total_points();
    // Twiddle matrix W[j][l] = exp(sign i 2 pi j l / M).
    let mut w = vec![vec![C64::default(); m]; m];
    for (j, row) in w.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            let ang = sign * 2.0 * std::f64::consts::PI * (j * l % m) as f64 / m as f64;
            *entry = C64::new(ang.cos(), ang.sin());
        }
    }
    let mut line = vec![C64::default(); m];
    let mut out = vec![C64::default(); m];
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        let block = stride * m;
        for outer in 0..n / block {
            let base = outer * block;
            for inner in 0..stride {
                for t in 0..m {
                    line[t] = data[base + inner + t * stride];
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = C64::default();
                    for (l, v) in line.iter().enumerate() {
                        acc += w[j][l] * v;
                    }
                    *o = acc;
                }
                for t in 0..m {
                    data[base + inner + t * stride] = out[t];
                }
            }
        }
    }
}

/// Direct-summation Fourier coefficients of real values.
pub fn dense_spectral(grid: &Grid, values: &[f64]) -> Vec<C64> {
    let mut data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    dense_transform(grid, &mut data, -1.0);
    let s = 1.0 / grid.total_points() as f64;
    data.iter_mut().for_each(|c| *c *= s);
    data
}

/// Direct-summation synthesis of real values from coefficients.
pub fn dense_values(grid: &Grid, spectral: &[C64]) -> Vec<f64> {
    let mut data = spectral.to_vec();
    dense_transform(grid, &mut data, 1.0);
    data.iter().map(|c| c.re).collect()
}

/// Dense damped heat propagator `e^{-kappa t} e^{t Delta}` applied to values.
pub fn dense_damped_heat(grid: &Grid, values: &[f64], kappa: f64, t: f64) -> Vec<f64> {
    let mut spec = dense_spectral(grid, values);
    grid.for_each_mode(|flat, _, ksq| {
        spec[flat] *= (-(kappa + ksq) * t).exp();
    });
    dense_values(grid, &spec)
}

/// Dense spectral divergence of component value arrays.
pub fn dense_divergence(grid: &Grid, comps: &[Vec<f64>]) -> Vec<f64> {
    let specs: Vec<Vec<C64>> = comps.iter().map(|c| dense_spectral(grid, c)).collect();
    let mut out = vec![C64::default(); grid.total_points()];
    grid.for_each_mode(|flat, k, _| {
        let mut acc = C64::default();
        for (ax, spec) in specs.iter().enumerate() {
            acc += C64::new(0.0, k[ax]) * spec[flat];
        }
        out[flat] = acc;
    });
    dense_values(grid, &out)
}

/// Dense Leray projection of component value arrays.
pub fn dense_leray(grid: &Grid, comps: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let specs: Vec<Vec<C64>> = comps.iter().map(|c| dense_spectral(grid, c)).collect();
    let dim = grid.dim();
    let mut out: Vec<Vec<C64>> = (0..dim).map(|_| vec![C64::default(); grid.total_points()]).collect();
    grid.for_each_mode(|flat, k, ksq| {
        if ksq == 0.0 {
            for (ax, o) in out.iter_mut().enumerate() {
                o[flat] = specs[ax][flat];
            }
        } else {
            let mut kdotv = C64::default();
            for (ax, spec) in specs.iter().enumerate() {
                kdotv += k[ax] * spec[flat];
            }
            for (ax, o) in out.iter_mut().enumerate() {
                o[flat] = specs[ax][flat] - k[ax] * kdotv / ksq;
            }
        }
    });
    out.into_iter().map(|s| dense_values(grid, &s)).collect()
}

/// Centered second-order finite-difference derivative along an axis.
pub fn fd_derivative(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let mut out = vec![0.0; values.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let idx = grid.unflatten(flat);
        let mut up = idx;
        let mut dn = idx;
        up[axis] = (idx[axis] + 1) % m;
        dn[axis] = (idx[axis] + m - 1) % m;
        *o = (values[grid.flatten(&up[..grid.dim()])] - values[grid.flatten(&dn[..grid.dim()])])
            / (2.0 * h);
    }
    out
}

/// Periodized Gaussian `sum_m g_a(x - x0 + m L)` with the heat kernel
/// `g_a(x) = (4 pi a)^{-N/2} exp(-|x|^2/(4a))`, truncated at `images`
/// lattice shells.
pub fn periodized_gaussian(grid: &Grid, center: [f64; 3], a: f64, images: i64) -> Vec<f64> {
    let l = grid.box_length();
    let dim = grid.dim();
    let norm = (4.0 * std::f64::consts::PI * a).powf(-(dim as f64) / 2.0);
    let mut out = vec![0.0; grid.total_points()];
    for (flat, o) in out.iter_mut().enumerate() {
        let idx = grid.unflatten(flat);
        let mut acc = 0.0;
        let mut image = |d2: f64| acc += norm * (-d2 / (4.0 * a)).exp();
        match dim {
            2 => {
                for mx in -images..=images {
                    for my in -images..=images {
                        let dx = grid.coordinate(idx[0]) - center[0] + mx as f64 * l;
                        let dy = grid.coordinate(idx[1]) - center[1] + my as f64 * l;
                        image(dx * dx + dy * dy);
                    }
                }
            }
            _ => {
                for mx in -images..=images {
                    for my in -images..=images {
                        for mz in -images..=images {
                            let dx = grid.coordinate(idx[0]) - center[0] + mx as f64 * l;
                            let dy = grid.coordinate(idx[1]) - center[1] + my as f64 * l;
                            let dz = grid.coordinate(idx[2]) - center[2] + mz as f64 * l;
                            image(dx * dx + dy * dy + dz * dz);
                        }
                    }
                }
            }
        }
        *o = acc;
    }
    out
}

/// Linear interpolation of a trajectory's value arrays at time `s`.
fn interp_values(times: &[f64], fields: &[Vec<f64>], s: f64) -> Vec<f64> {
    if s <= times[0] {
        return fields[0].clone();
    }
    let last = times.len() - 1;
    if s >= times[last] {
        return fields[last].clone();
    }
    let j = times.partition_point(|&t| t <= s) - 1;
    let theta = (s - times[j]) / (times[j + 1] - times[j]);
    fields[j]
        .iter()
        .zip(&fields[j + 1])
        .map(|(a, b)| a * (1.0 - theta) + b * theta)
        .collect()
}

/// Trapezoid Duhamel quadrature of a nodal integrand trajectory
/// (piecewise linear between nodes, matching the source-trajectory
/// interpolation contract), with `refine` sub-panels per panel and the
/// dense propagator applied sample by sample: the brute-force counterpart
/// of `duhamel::damped_heat_quadrature`.
pub fn trapezoid_duhamel_nodes(
    grid: &Grid,
    nodes: &[f64],
    integrand: &[Vec<f64>],
    kappa: f64,
    refine: usize,
) -> Vec<Vec<f64>> {
    let n = grid.total_points();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(vec![0.0; n]);
    for (k, &t_k) in nodes.iter().enumerate().skip(1) {
        let mut acc = vec![0.0; n];
        for j in 0..k {
            let (a, b) = (nodes[j], nodes[j + 1]);
            let dt = (b - a) / refine as f64;
            for r in 0..=refine {
                let s = a + dt * r as f64;
                let weight = if r == 0 || r == refine { 0.5 * dt } else { dt };
                let q = interp_values(nodes, integrand, s);
                let prop = dense_damped_heat(grid, &q, kappa, t_k - s);
                for (o, p) in acc.iter_mut().zip(&prop) {
                    *o += weight * p;
                }
            }
        }
        out.push(acc);
    }
    out
}

fn pointwise_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn dense_axis_gradient(grid: &Grid, values: &[f64], axis: usize) -> Vec<f64> {
    let mut spec = dense_spectral(grid, values);
    grid.for_each_mode(|flat, k, _| spec[flat] *= C64::new(0.0, k[axis]));
    dense_values(grid, &spec)
}

/// Brute-force `B_1(w, n)`: nodal products under refined trapezoid
/// quadrature with the dense propagator.
pub fn oracle_b1(w: &ScalarTrajectory, n: &ScalarTrajectory, refine: usize) -> Vec<Vec<f64>> {
    let integrand: Vec<Vec<f64>> = w
        .fields
        .iter()
        .zip(&n.fields)
        .map(|(a, b)| pointwise_product(a.values(), b.values()))
        .collect();
    trapezoid_duhamel_nodes(w.grid(), w.times.nodes(), &integrand, 0.0, refine)
}

/// Brute-force `B_2(n, w)`: dense divergence of the nodal products.
pub fn oracle_b2(n: &ScalarTrajectory, w: &VectorTrajectory, refine: usize) -> Vec<Vec<f64>> {
    let grid = n.grid().clone();
    let integrand: Vec<Vec<f64>> = n
        .fields
        .iter()
        .zip(&w.fields)
        .map(|(nf, wf)| {
            let comps: Vec<Vec<f64>> = wf
                .components()
                .iter()
                .map(|c| pointwise_product(nf.values(), c.values()))
                .collect();
            dense_divergence(&grid, &comps)
        })
        .collect();
    trapezoid_duhamel_nodes(&grid, n.times.nodes(), &integrand, 0.0, refine)
}

/// Brute-force `B_3(u, w)`: per node the dense row divergences of the
/// tensor product followed by the dense Leray projection; returned per
/// node, per component.
pub fn oracle_b3(u: &VectorTrajectory, w: &VectorTrajectory, refine: usize) -> Vec<Vec<Vec<f64>>> {
    let grid = u.grid().clone();
    let dim = grid.dim();
    let projected: Vec<Vec<Vec<f64>>> = u
        .fields
        .iter()
        .zip(&w.fields)
        .map(|(uf, wf)| {
            let rows: Vec<Vec<f64>> = (0..dim)
                .map(|i| {
                    let comps: Vec<Vec<f64>> = (0..dim)
                        .map(|j| {
                            pointwise_product(uf.component(i).values(), wf.component(j).values())
                        })
                        .collect();
                    dense_divergence(&grid, &comps)
                })
                .collect();
            dense_leray(&grid, &rows)
        })
        .collect();
    let per_component: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|i| {
            let integrand: Vec<Vec<f64>> = projected.iter().map(|node| node[i].clone()).collect();
            trapezoid_duhamel_nodes(&grid, u.times.nodes(), &integrand, 0.0, refine)
        })
        .collect();
    (0..u.times.len())
        .map(|k| (0..dim).map(|i| per_component[i][k].clone()).collect())
        .collect()
}

/// Brute-force `B_4(u, v)` with damping: nodal advection via dense spectral
/// gradients.
pub fn oracle_b4(
    u: &VectorTrajectory,
    v: &ScalarTrajectory,
    kappa: f64,
    refine: usize,
) -> Vec<Vec<f64>> {
    let grid = v.grid().clone();
    let dim = grid.dim();
    let integrand: Vec<Vec<f64>> = u
        .fields
        .iter()
        .zip(&v.fields)
        .map(|(uf, vf)| {
            let mut out = vec![0.0; grid.total_points()];
            for ax in 0..dim {
                let g = dense_axis_gradient(&grid, vf.values(), ax);
                for ((o, gi), ui) in out.iter_mut().zip(&g).zip(uf.component(ax).values()) {
                    *o += gi * ui;
                }
            }
            out
        })
        .collect();
    trapezoid_duhamel_nodes(&grid, v.times.nodes(), &integrand, kappa, refine)
}

/// Brute-force `L_Phi(n)`: dense Leray projection of the nodal forcing
/// products; returned per node, per component.
pub fn oracle_l_phi(
    n: &ScalarTrajectory,
    grad_phi: &VectorField,
    refine: usize,
) -> Vec<Vec<Vec<f64>>> {
    let grid = n.grid().clone();
    let dim = grid.dim();
    let projected: Vec<Vec<Vec<f64>>> = n
        .fields
        .iter()
        .map(|nf| {
            let comps: Vec<Vec<f64>> = grad_phi
                .components()
                .iter()
                .map(|p| pointwise_product(nf.values(), p.values()))
                .collect();
            dense_leray(&grid, &comps)
        })
        .collect();
    let per_component: Vec<Vec<Vec<f64>>> = (0..dim)
        .map(|i| {
            let integrand: Vec<Vec<f64>> = projected.iter().map(|node| node[i].clone()).collect();
            trapezoid_duhamel_nodes(&grid, n.times.nodes(), &integrand, 0.0, refine)
        })
        .collect();
    (0..n.times.len())
        .map(|k| (0..dim).map(|i| per_component[i][k].clone()).collect())
        .collect()
}

/// Brute-force `L_kappa(n)`.
pub fn oracle_l_kappa(n: &ScalarTrajectory, kappa: f64, refine: usize) -> Vec<Vec<f64>> {
    let integrand: Vec<Vec<f64>> = n.fields.iter().map(|f| f.values().to_vec()).collect();
    trapezoid_duhamel_nodes(n.grid(), n.times.nodes(), &integrand, kappa, refine)
}

/// Exhaustive Morrey scan over explicit centers and radii with direct
/// distance checks.
pub fn scan_morrey(f: &ScalarField, p: f64, mu: f64, centers: &[usize], radii: &[f64]) -> f64 {
    let grid = f.grid();
    let hn = grid.cell_volume();
    let mut best: f64 = 0.0;
    for &c in centers {
        for &r in radii {
            let mut acc = 0.0;
            for (y, v) in f.values().iter().enumerate() {
                if grid.torus_distance(c, y) <= r {
                    acc += v.abs().powf(p) * hn;
                }
            }
            best = best.max(r.powf(-mu / p) * acc.powf(1.0 / p));
        }
    }
    best
}

/// Exhaustive caloric Carleson scan: dense `(x, R, t)` loops with
/// trapezoid in time on the provided mesh (which must start at 0).
pub fn scan_carleson_caloric(
    f: &ScalarField,
    lambda: f64,
    centers: &[usize],
    radii: &[f64],
    time_mesh: &[f64],
) -> f64 {
    let grid = f.grid();
    let dim = grid.dim() as f64;
    let hn = grid.cell_volume();
    // Caloric extension sampled on the dense mesh via the dense propagator.
    let snapshots: Vec<Vec<f64>> = time_mesh
        .iter()
        .map(|&t| dense_damped_heat(grid, f.values(), 0.0, t))
        .collect();
    let mut best: f64 = 0.0;
    for &r in radii {
        let r2 = r * r;
        for &c in centers {
            let inside: Vec<usize> = (0..grid.total_points())
                .filter(|&y| grid.torus_distance(c, y) <= r)
                .collect();
            let ball_volume = inside.len() as f64 * hn;
            // Space integral at each time node, then trapezoid up to r^2.
            let space: Vec<f64> = snapshots
                .iter()
                .map(|snap| inside.iter().map(|&y| snap[y] * snap[y]).sum::<f64>() * hn)
                .collect();
            let mut acc = 0.0;
            for j in 0..time_mesh.len() - 1 {
                let (a, b) = (time_mesh[j], time_mesh[j + 1]);
                if a >= r2 {
                    break;
                }
                if b <= r2 {
                    acc += 0.5 * (b - a) * (space[j] + space[j + 1]);
                } else {
                    // Partial panel ending exactly at r^2.
                    let theta = (r2 - a) / (b - a);
                    let end = space[j] * (1.0 - theta) + space[j + 1] * theta;
                    acc += 0.5 * (r2 - a) * (space[j] + end);
                    break;
                }
            }
            let weighted = ball_volume.powf(lambda / dim - 1.0) * acc;
            best = best.max(weighted);
        }
    }
    best.sqrt()
}
