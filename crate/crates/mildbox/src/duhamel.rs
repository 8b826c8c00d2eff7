//! The integral operators of the mild formulation: bilinear maps over
//! source trajectories and damped linear maps, realised as exact per-mode
//! integration of the semigroup multiplier against piecewise-linear sources.

use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::propagator;
use crate::timegrid::{panel_weights, TimeGrid};
use crate::{Error, Result};
use num_complex::Complex;

type C64 = Complex<f64>;

/// Time-indexed scalar fields on a shared [`TimeGrid`], interpreted as
/// piecewise linear in time between nodes.
#[derive(Clone, Debug)]
pub struct ScalarTrajectory {
    pub times: TimeGrid,
    pub fields: Vec<ScalarField>,
}

/// Time-indexed vector fields on a shared [`TimeGrid`].
#[derive(Clone, Debug)]
pub struct VectorTrajectory {
    pub times: TimeGrid,
    pub fields: Vec<VectorField>,
}

impl ScalarTrajectory {
    pub fn new(times: TimeGrid, fields: Vec<ScalarField>) -> Result<Self> {
        if fields.len() != times.len() {
            return Err(Error::GridMismatch(format!(
                "{} snapshots on {} time nodes",
                fields.len(),
                times.len()
            )));
        }
        let grid = fields[0].grid().clone();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(Error::GridMismatch("trajectory snapshots on different grids".into()));
        }
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite("trajectory snapshot".into()));
        }
        Ok(Self { times, fields })
    }

    pub fn zeros(grid: Grid, times: TimeGrid) -> Self {
        let fields = (0..times.len()).map(|_| ScalarField::zeros(grid.clone())).collect();
        Self { times, fields }
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    /// Caloric extension of initial data: `e^{-kappa t} e^{t Delta} f0`
    /// sampled at the nodes.
    pub fn caloric(f0: &ScalarField, times: &TimeGrid, kappa: f64) -> Result<Self> {
        let fields = times
            .nodes()
            .iter()
            .map(|&t| propagator::damped_heat(f0, kappa, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.clone(),
            fields,
        })
    }

    pub fn map(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            times: self.times.clone(),
            fields: self.fields.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        debug_assert_eq!(self.times, other.times);
        Self {
            times: self.times.clone(),
            fields: self
                .fields
                .iter()
                .zip(&other.fields)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|f| f.scale(a))
    }

    /// Dealiased pointwise product trajectory `self * other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_times(&self.times, &other.times)?;
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch("product of trajectories on different grids".into()));
        }
        Ok(self.zip(other, |a, b| a.product_dealiased(b)))
    }

    /// Largest sup norm over the nodes.
    pub fn sup_over_nodes(&self) -> f64 {
        self.fields.iter().fold(0.0, |a, f| a.max(f.sup_norm()))
    }
}

impl VectorTrajectory {
    pub fn new(times: TimeGrid, fields: Vec<VectorField>) -> Result<Self> {
        if fields.len() != times.len() {
            return Err(Error::GridMismatch(format!(
                "{} snapshots on {} time nodes",
                fields.len(),
                times.len()
            )));
        }
        if fields.iter().any(|f| !f.is_finite()) {
            return Err(Error::NonFinite("trajectory snapshot".into()));
        }
        Ok(Self { times, fields })
    }

    pub fn zeros(grid: Grid, times: TimeGrid) -> Self {
        let fields = (0..times.len()).map(|_| VectorField::zeros(grid.clone())).collect();
        Self { times, fields }
    }

    pub fn grid(&self) -> &Grid {
        self.fields[0].grid()
    }

    pub fn caloric(v0: &VectorField, times: &TimeGrid, kappa: f64) -> Result<Self> {
        let fields = times
            .nodes()
            .iter()
            .map(|&t| {
                propagator::propagate_vector(
                    v0,
                    crate::propagator::PropagatorKind::DampedHeat { kappa },
                    t,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.clone(),
            fields,
        })
    }

    pub fn map(&self, f: impl Fn(&VectorField) -> VectorField) -> Self {
        Self {
            times: self.times.clone(),
            fields: self.fields.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.times, other.times);
        Self {
            times: self.times.clone(),
            fields: self
                .fields
                .iter()
                .zip(&other.fields)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.times, other.times);
        Self {
            times: self.times.clone(),
            fields: self
                .fields
                .iter()
                .zip(&other.fields)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|f| f.scale(a))
    }

    /// Per-node gradient trajectory of a scalar trajectory.
    pub fn gradient_of(c: &ScalarTrajectory) -> Self {
        Self {
            times: c.times.clone(),
            fields: c.fields.iter().map(|f| f.gradient()).collect(),
        }
    }

    /// Advection trajectory `(u . grad c)(t_k)`, dealiased.
    pub fn advection(u: &VectorTrajectory, c: &ScalarTrajectory) -> Result<ScalarTrajectory> {
        check_times(&u.times, &c.times)?;
        if u.grid() != c.grid() {
            return Err(Error::GridMismatch("advection of trajectories on different grids".into()));
        }
        let fields = u
            .fields
            .iter()
            .zip(&c.fields)
            .map(|(uv, cf)| uv.dot_dealiased(&cf.gradient()))
            .collect();
        ScalarTrajectory::new(c.times.clone(), fields)
    }

    /// Per-node product `n(t) w(t)` of a scalar and a vector trajectory.
    pub fn scalar_times_vector(n: &ScalarTrajectory, w: &VectorTrajectory) -> Result<Self> {
        check_times(&n.times, &w.times)?;
        if n.grid() != w.grid() {
            return Err(Error::GridMismatch("product of trajectories on different grids".into()));
        }
        let fields = n
            .fields
            .iter()
            .zip(&w.fields)
            .map(|(nf, wf)| wf.map(|comp| nf.product_dealiased(comp)))
            .collect();
        Self::new(w.times.clone(), fields)
    }
}

fn check_times(a: &TimeGrid, b: &TimeGrid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch("trajectories on different time grids".into()));
    }
    Ok(())
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::InvalidParam(format!(
            "damping rate must be nonnegative, got {kappa}"
        )));
    }
    Ok(())
}

/// Core engine: `I(t_k) = int_0^{t_k} e^{-kappa(t_k-s)} e^{(t_k-s)Delta} q(s) ds`
/// for a piecewise-linear source trajectory, by exact per-mode integration
/// of the multiplier on each panel and the semigroup recursion
/// `I(t_{k+1}) = e^{dt (Delta - kappa)} I(t_k) + panel`.
pub fn damped_heat_quadrature(q: &ScalarTrajectory, kappa: f64) -> Result<ScalarTrajectory> {
    check_kappa(kappa)?;
    let grid = q.grid().clone();
    let n = grid.total_points();
    let ksq = grid.ksq_table();
    let nodes = q.times.nodes();
    let mut acc = vec![C64::default(); n];
    let mut out = Vec::with_capacity(nodes.len());
    out.push(ScalarField::zeros(grid.clone()));
    for k in 0..nodes.len() - 1 {
        let dt = nodes[k + 1] - nodes[k];
        let left = q.fields[k].spectral();
        let right = q.fields[k + 1].spectral();
        for (i, a) in acc.iter_mut().enumerate() {
            let rate = -(kappa + ksq[i]);
            let (w0, w1) = panel_weights(rate, dt);
            *a = (rate * dt).exp() * *a + w0 * left[i] + w1 * right[i];
        }
        out.push(ScalarField::from_spectral(grid.clone(), acc.clone()));
    }
    ScalarTrajectory::new(q.times.clone(), out)
}

/// Vector version of [`damped_heat_quadrature`], applied componentwise.
pub fn damped_heat_quadrature_vec(q: &VectorTrajectory, kappa: f64) -> Result<VectorTrajectory> {
    let dim = q.grid().dim();
    let mut comps: Vec<ScalarTrajectory> = Vec::with_capacity(dim);
    for ax in 0..dim {
        let traj = ScalarTrajectory {
            times: q.times.clone(),
            fields: q.fields.iter().map(|f| f.component(ax).clone()).collect(),
        };
        comps.push(damped_heat_quadrature(&traj, kappa)?);
    }
    let fields = (0..q.times.len())
        .map(|k| {
            VectorField::from_components(
                comps.iter().map(|c| c.fields[k].clone()).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    VectorTrajectory::new(q.times.clone(), fields)
}

/// `B_1(w, n)(t) = int_0^t e^{(t-s)Delta} (w n)(s) ds`.
pub fn duhamel_b1(w: &ScalarTrajectory, n: &ScalarTrajectory) -> Result<ScalarTrajectory> {
    damped_heat_quadrature(&w.product(n)?, 0.0)
}

/// `B_2(n, w)(t) = int_0^t e^{(t-s)Delta} div(n w)(s) ds`; the divergence
/// is applied to the interpolated product, node by node, which kills the
/// spatial mean exactly.
pub fn duhamel_b2(n: &ScalarTrajectory, w: &VectorTrajectory) -> Result<ScalarTrajectory> {
    let nw = VectorTrajectory::scalar_times_vector(n, w)?;
    let div = ScalarTrajectory::new(
        nw.times.clone(),
        nw.fields.iter().map(|f| f.divergence()).collect(),
    )?;
    damped_heat_quadrature(&div, 0.0)
}

/// `B_3(u, w)(t) = int_0^t e^{(t-s)Delta} P div(u (x) w)(s) ds`:
/// tensor product pointwise, divergence row-wise, Leray projection, heat
/// quadrature. The output is divergence-free at every node.
pub fn duhamel_b3(u: &VectorTrajectory, w: &VectorTrajectory) -> Result<VectorTrajectory> {
    check_times(&u.times, &w.times)?;
    let grid = u.grid().clone();
    let dim = grid.dim();
    let fields = u
        .fields
        .iter()
        .zip(&w.fields)
        .map(|(uf, wf)| {
            let rows = (0..dim)
                .map(|i| {
                    let row = (0..dim)
                        .map(|j| uf.component(i).product_dealiased(wf.component(j)))
                        .collect::<Vec<_>>();
                    VectorField::from_components(row).map(|r| r.divergence())
                })
                .collect::<Result<Vec<_>>>()?;
            VectorField::from_components(rows).map(|d| d.leray_project())
        })
        .collect::<Result<Vec<_>>>()?;
    let src = VectorTrajectory::new(u.times.clone(), fields)?;
    damped_heat_quadrature_vec(&src, 0.0)
}

/// `B_4(u, v)(t) = int_0^t e^{-kappa(t-s)} e^{(t-s)Delta} (u . grad v)(s) ds`.
pub fn duhamel_b4(
    u: &VectorTrajectory,
    v: &ScalarTrajectory,
    kappa: f64,
) -> Result<ScalarTrajectory> {
    check_kappa(kappa)?;
    damped_heat_quadrature(&VectorTrajectory::advection(u, v)?, kappa)
}

/// `L_Phi(n)(t) = int_0^t e^{(t-s)Delta} P(n grad Phi)(s) ds` for a static
/// forcing field `grad Phi`.
pub fn linear_l_phi(n: &ScalarTrajectory, grad_phi: &VectorField) -> Result<VectorTrajectory> {
    if n.grid() != grad_phi.grid() {
        return Err(Error::GridMismatch("forcing field on a different grid".into()));
    }
    let fields = n
        .fields
        .iter()
        .map(|nf| {
            grad_phi
                .map(|comp| nf.product_dealiased(comp))
                .leray_project()
        })
        .collect();
    let src = VectorTrajectory::new(n.times.clone(), fields)?;
    damped_heat_quadrature_vec(&src, 0.0)
}

/// `L_kappa(n)(t) = int_0^t e^{-kappa(t-s)} e^{(t-s)Delta} n(s) ds`.
pub fn linear_l_kappa(n: &ScalarTrajectory, kappa: f64) -> Result<ScalarTrajectory> {
    damped_heat_quadrature(n, kappa)
}
