//! Picard fixed-point iteration for the coupled chemotaxis-fluid systems in
//! their mild (Duhamel) form, the uniformly-continuous-data perturbation
//! ansatz, smallness reports and uniqueness probes.

use crate::balls::BallFamily;
use crate::duhamel::{
    damped_heat_quadrature, duhamel_b1, duhamel_b2, duhamel_b3, duhamel_b4, linear_l_kappa,
    linear_l_phi, ScalarTrajectory, VectorTrajectory,
};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::norms::{self, CaloricMesh};
use crate::propagator;
use crate::timegrid::TimeGrid;
use crate::{Error, Result};

/// One snapshot of the coupled system: oxygen concentration `c`, cell
/// density `n`, fluid velocity `u`, and (for the double-chemotaxis system)
/// attractant concentration `v`.
#[derive(Clone, Debug)]
pub struct SolutionState {
    pub c: ScalarField,
    pub n: ScalarField,
    pub u: VectorField,
    pub v: Option<ScalarField>,
}

impl SolutionState {
    pub fn new(c: ScalarField, n: ScalarField, u: VectorField) -> Self {
        Self { c, n, u, v: None }
    }

    pub fn with_attractant(mut self, v: ScalarField) -> Self {
        self.v = Some(v);
        self
    }

    pub fn grid(&self) -> &Grid {
        self.c.grid()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            c: self.c.scale(a),
            n: self.n.scale(a),
            u: self.u.scale(a),
            v: self.v.as_ref().map(|v| v.scale(a)),
        }
    }

    fn validate(&self) -> Result<()> {
        let grid = self.c.grid();
        if self.n.grid() != grid || self.u.grid() != grid {
            return Err(Error::GridMismatch("state components on different grids".into()));
        }
        if let Some(v) = &self.v {
            if v.grid() != grid {
                return Err(Error::GridMismatch("attractant on a different grid".into()));
            }
        }
        let div = self.u.divergence_sup();
        let scale = self.u.sup_norm().max(1.0);
        if div > 1e-10 * scale {
            return Err(Error::InvalidParam(format!(
                "initial velocity is not divergence-free (sup div = {div:.3e})"
            )));
        }
        Ok(())
    }

    /// Truncate all components to the 2/3 band, the invariant subspace of
    /// the dealiased product algebra.
    fn dealiased(&self) -> Self {
        Self {
            c: self.c.dealiased(),
            n: self.n.dealiased(),
            u: self.u.dealiased(),
            v: self.v.as_ref().map(|v| v.dealiased()),
        }
    }
}

/// Solver configuration: physics, discretization and iteration control.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Attractant decay rate (D-CNS only).
    pub kappa: f64,
    /// Gravitational forcing `grad Phi` of the CNS momentum equation.
    pub grad_phi: Option<VectorField>,
    /// External force `Psi` of the D-CNS momentum equation.
    pub psi: Option<VectorField>,
    pub horizon: f64,
    pub time_panels: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Reference smallness threshold for reports.
    pub smallness_eps: f64,
    /// Center stride of the ball family used by the path norms.
    pub ball_stride: usize,
    /// Diagnostic mode: drop the `div(n grad v)` coupling so the D-CNS
    /// system reduces to CNS plus a passive attractant.
    pub decouple_attractant: bool,
    /// Explicit time mesh override; set by studies that need node-exact
    /// correspondence between runs (e.g. parabolic rescaling).
    pub time_nodes: Option<TimeGrid>,
}

impl SolverConfig {
    pub fn new(horizon: f64, time_panels: usize) -> Self {
        Self {
            kappa: 0.0,
            grad_phi: None,
            psi: None,
            horizon,
            time_panels,
            picard_tol: 1e-9,
            picard_max_iter: 25,
            smallness_eps: 0.1,
            ball_stride: 4,
            decouple_attractant: false,
            time_nodes: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParam("horizon must be positive".into()));
        }
        if !(self.picard_tol >= 0.0) || self.picard_max_iter == 0 {
            return Err(Error::InvalidParam("picard controls must be positive".into()));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "kappa must be nonnegative, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        match &self.time_nodes {
            Some(tg) => {
                if (tg.horizon() - self.horizon).abs() > 1e-12 * self.horizon {
                    return Err(Error::InvalidParam(
                        "explicit time mesh does not end at the horizon".into(),
                    ));
                }
                Ok(tg.clone())
            }
            None => TimeGrid::geometric_uniform(self.horizon, self.time_panels),
        }
    }
}

/// Per-iteration record of the fixed-point iteration.
#[derive(Clone, Debug, Default)]
pub struct PicardTrace {
    /// `||U^(m+1) - U^(m)||` in the solution-space norm, per iteration.
    pub diffs: Vec<f64>,
    /// Successive ratios `diffs[m] / diffs[m-1]`.
    pub ratios: Vec<f64>,
    pub converged: bool,
    /// Set when an iterate left the finite range; the returned trajectory
    /// is the last finite one.
    pub diverged: bool,
}

impl PicardTrace {
    fn push(&mut self, diff: f64) {
        if let Some(&prev) = self.diffs.last() {
            self.ratios.push(if prev > 0.0 { diff / prev } else { 0.0 });
        }
        self.diffs.push(diff);
    }
}

/// Trajectory of solution states on a shared time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub c: ScalarTrajectory,
    pub n: ScalarTrajectory,
    pub u: VectorTrajectory,
    pub v: Option<ScalarTrajectory>,
}

impl Trajectory {
    pub fn times(&self) -> &TimeGrid {
        &self.c.times
    }

    pub fn grid(&self) -> &Grid {
        self.c.grid()
    }

    pub fn state(&self, k: usize) -> SolutionState {
        SolutionState {
            c: self.c.fields[k].clone(),
            n: self.n.fields[k].clone(),
            u: self.u.fields[k].clone(),
            v: self.v.as_ref().map(|v| v.fields[k].clone()),
        }
    }

    /// Largest sup-norm distance over nodes and components.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for k in 0..self.c.fields.len() {
            d = d.max(self.c.fields[k].sub(&other.c.fields[k]).sup_norm());
            d = d.max(self.n.fields[k].sub(&other.n.fields[k]).sup_norm());
            d = d.max(self.u.fields[k].sub(&other.u.fields[k]).sup_norm());
            if let (Some(a), Some(b)) = (&self.v, &other.v) {
                d = d.max(a.fields[k].sub(&b.fields[k]).sup_norm());
            }
        }
        d
    }
}

/// Initial guess for the Picard iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PicardGuess {
    /// Caloric extension of the data (the linear part of the Duhamel map).
    Caloric,
    /// All-zero trajectory.
    Zero,
}

struct CnsIterate {
    c: ScalarTrajectory,
    n: ScalarTrajectory,
    u: VectorTrajectory,
}

fn is_finite_scalar(t: &ScalarTrajectory) -> bool {
    t.fields.iter().all(|f| f.is_finite())
}

fn is_finite_vector(t: &VectorTrajectory) -> bool {
    t.fields.iter().all(|f| f.is_finite())
}

/// Solution-space norm of a CNS difference.
fn x_norm_cns(
    dc: &ScalarTrajectory,
    dn: &ScalarTrajectory,
    du: &VectorTrajectory,
    horizon: f64,
    balls: &BallFamily,
) -> Result<f64> {
    Ok(norms::path_norm_x1(dc, horizon, balls)?
        + norms::path_norm_x2(dn, horizon, balls)?
        + norms::path_norm_x3(du, horizon, balls)?)
}

/// One application of the CNS Duhamel right-hand side.
fn cns_rhs(
    iter: &CnsIterate,
    lin_c: &ScalarTrajectory,
    lin_n: &ScalarTrajectory,
    lin_u: &VectorTrajectory,
    grad_phi: Option<&VectorField>,
) -> Result<CnsIterate> {
    let grad_c = VectorTrajectory::gradient_of(&iter.c);
    // c: e^{tD} c0 - B1(c, n) - int e^{(t-s)D} (u . grad c).
    let advect_c = damped_heat_quadrature(&VectorTrajectory::advection(&iter.u, &iter.c)?, 0.0)?;
    let c_next = lin_c.sub(&duhamel_b1(&iter.c, &iter.n)?).sub(&advect_c);
    // n: e^{tD} n0 - B2(n, grad c + u).
    let w = grad_c.add(&iter.u);
    let n_next = lin_n.sub(&duhamel_b2(&iter.n, &w)?);
    // u: e^{tD} u0 - B3(u, u) - L_Phi(n).
    let mut u_next = lin_u.sub(&duhamel_b3(&iter.u, &iter.u)?);
    if let Some(phi) = grad_phi {
        u_next = u_next.sub(&linear_l_phi(&iter.n, phi)?);
    }
    Ok(CnsIterate {
        c: c_next,
        n: n_next,
        u: u_next,
    })
}

/// Picard iteration for the chemotaxis-Navier-Stokes system.
pub fn solve_cns_picard(
    init: &SolutionState,
    cfg: &SolverConfig,
) -> Result<(Trajectory, PicardTrace)> {
    solve_cns_picard_from(init, cfg, PicardGuess::Caloric)
}

/// Same as [`solve_cns_picard`] with an explicit initial guess (used by the
/// uniqueness probe).
pub fn solve_cns_picard_from(
    init: &SolutionState,
    cfg: &SolverConfig,
    guess: PicardGuess,
) -> Result<(Trajectory, PicardTrace)> {
    cfg.validate()?;
    init.validate()?;
    let init = init.dealiased();
    let grid = init.grid().clone();
    let tg = cfg.time_grid()?;
    let balls = BallFamily::dyadic(&grid, cfg.ball_stride)?;

    let lin_c = ScalarTrajectory::caloric(&init.c, &tg, 0.0)?;
    let lin_n = ScalarTrajectory::caloric(&init.n, &tg, 0.0)?;
    let lin_u = VectorTrajectory::caloric(&init.u, &tg, 0.0)?;

    let mut cur = match guess {
        PicardGuess::Caloric => CnsIterate {
            c: lin_c.clone(),
            n: lin_n.clone(),
            u: lin_u.clone(),
        },
        PicardGuess::Zero => CnsIterate {
            c: ScalarTrajectory::zeros(grid.clone(), tg.clone()),
            n: ScalarTrajectory::zeros(grid.clone(), tg.clone()),
            u: VectorTrajectory::zeros(grid.clone(), tg.clone()),
        },
    };

    let mut trace = PicardTrace::default();
    for _ in 0..cfg.picard_max_iter {
        let next = cns_rhs(&cur, &lin_c, &lin_n, &lin_u, cfg.grad_phi.as_ref())?;
        if !(is_finite_scalar(&next.c) && is_finite_scalar(&next.n) && is_finite_vector(&next.u)) {
            trace.diverged = true;
            break;
        }
        let diff = x_norm_cns(
            &next.c.sub(&cur.c),
            &next.n.sub(&cur.n),
            &next.u.sub(&cur.u),
            cfg.horizon,
            &balls,
        )?;
        trace.push(diff);
        cur = next;
        if diff <= cfg.picard_tol {
            trace.converged = true;
            break;
        }
    }
    let traj = Trajectory {
        c: cur.c,
        n: cur.n,
        u: cur.u,
        v: None,
    };
    Ok((traj, trace))
}

/// Fixed-point residual: one more application of the Duhamel right-hand
/// side, measured in the solution-space norm. Small for a converged run.
pub fn cns_residual(traj: &Trajectory, init: &SolutionState, cfg: &SolverConfig) -> Result<f64> {
    let init = init.dealiased();
    let tg = traj.times().clone();
    let grid = traj.grid().clone();
    let balls = BallFamily::dyadic(&grid, cfg.ball_stride)?;
    let lin_c = ScalarTrajectory::caloric(&init.c, &tg, 0.0)?;
    let lin_n = ScalarTrajectory::caloric(&init.n, &tg, 0.0)?;
    let lin_u = VectorTrajectory::caloric(&init.u, &tg, 0.0)?;
    let iter = CnsIterate {
        c: traj.c.clone(),
        n: traj.n.clone(),
        u: traj.u.clone(),
    };
    let next = cns_rhs(&iter, &lin_c, &lin_n, &lin_u, cfg.grad_phi.as_ref())?;
    x_norm_cns(
        &next.c.sub(&traj.c),
        &next.n.sub(&traj.n),
        &next.u.sub(&traj.u),
        cfg.horizon,
        &balls,
    )
}

struct DcnsIterate {
    c: ScalarTrajectory,
    n: ScalarTrajectory,
    /// Deviation `w = v - vtilde_kappa` from the damped caloric extension.
    w: ScalarTrajectory,
    u: VectorTrajectory,
}

fn dcns_rhs(
    iter: &DcnsIterate,
    lin_c: &ScalarTrajectory,
    lin_n: &ScalarTrajectory,
    lin_u: &VectorTrajectory,
    v_tilde: &ScalarTrajectory,
    cfg: &SolverConfig,
) -> Result<DcnsIterate> {
    let grad_c = VectorTrajectory::gradient_of(&iter.c);
    let v_full = iter.w.add(v_tilde);

    let advect_c = damped_heat_quadrature(&VectorTrajectory::advection(&iter.u, &iter.c)?, 0.0)?;
    let c_next = lin_c.sub(&duhamel_b1(&iter.c, &iter.n)?).sub(&advect_c);

    // n: e^{tD} n0 - B2(n, u + grad c + grad v); the attractant coupling is
    // dropped in the decoupled diagnostic mode.
    let mut w_field = grad_c.add(&iter.u);
    if !cfg.decouple_attractant {
        w_field = w_field.add(&VectorTrajectory::gradient_of(&v_full));
    }
    let n_next = lin_n.sub(&duhamel_b2(&iter.n, &w_field)?);

    // w: -B4(u, w + vtilde) + L_kappa(n), from the attractant equation
    // d_t v - Delta v + u.grad v + kappa v - n = 0.
    let w_next = linear_l_kappa(&iter.n, cfg.kappa)?
        .sub(&duhamel_b4(&iter.u, &v_full, cfg.kappa)?);

    let mut u_next = lin_u.sub(&duhamel_b3(&iter.u, &iter.u)?);
    if let Some(psi) = cfg.psi.as_ref() {
        u_next = u_next.sub(&linear_l_phi(&iter.n, psi)?);
    }
    Ok(DcnsIterate {
        c: c_next,
        n: n_next,
        w: w_next,
        u: u_next,
    })
}

/// Picard iteration for the double-chemotaxis (Keller-Segel-Navier-Stokes)
/// system; iterates in the deviation variable `w = v - vtilde_kappa` and
/// reassembles `v` on return.
pub fn solve_dcns_picard(
    init: &SolutionState,
    cfg: &SolverConfig,
) -> Result<(Trajectory, PicardTrace)> {
    cfg.validate()?;
    init.validate()?;
    let v0 = init
        .v
        .clone()
        .ok_or_else(|| Error::InvalidParam("D-CNS needs attractant data v0".into()))?;
    let init = init.dealiased();
    let v0 = v0.dealiased();
    let grid = init.grid().clone();
    let tg = cfg.time_grid()?;
    let balls = BallFamily::dyadic(&grid, cfg.ball_stride)?;

    let lin_c = ScalarTrajectory::caloric(&init.c, &tg, 0.0)?;
    let lin_n = ScalarTrajectory::caloric(&init.n, &tg, 0.0)?;
    let lin_u = VectorTrajectory::caloric(&init.u, &tg, 0.0)?;
    let v_tilde = ScalarTrajectory::caloric(&v0, &tg, cfg.kappa)?;

    let mut cur = DcnsIterate {
        c: lin_c.clone(),
        n: lin_n.clone(),
        w: ScalarTrajectory::zeros(grid.clone(), tg.clone()),
        u: lin_u.clone(),
    };
    let mut trace = PicardTrace::default();
    for _ in 0..cfg.picard_max_iter {
        let next = dcns_rhs(&cur, &lin_c, &lin_n, &lin_u, &v_tilde, cfg)?;
        if !(is_finite_scalar(&next.c)
            && is_finite_scalar(&next.n)
            && is_finite_scalar(&next.w)
            && is_finite_vector(&next.u))
        {
            trace.diverged = true;
            break;
        }
        let diff = x_norm_cns(
            &next.c.sub(&cur.c),
            &next.n.sub(&cur.n),
            &next.u.sub(&cur.u),
            cfg.horizon,
            &balls,
        )? + norms::path_norm_x1(&next.w.sub(&cur.w), cfg.horizon, &balls)?;
        trace.push(diff);
        cur = next;
        if diff <= cfg.picard_tol {
            trace.converged = true;
            break;
        }
    }
    let v = cur.w.add(&v_tilde);
    let traj = Trajectory {
        c: cur.c,
        n: cur.n,
        u: cur.u,
        v: Some(v),
    };
    Ok((traj, trace))
}

/// The uniformly-continuous-data perturbation: `Gamma = e^{delta0^2 Delta}
/// d0` and the shifted concentration data `cbar0 = c0 - Gamma`, with the
/// modulus-of-continuity quantities the perturbation lemma controls.
#[derive(Clone, Debug)]
pub struct UcAnsatz {
    pub gamma: ScalarField,
    pub cbar0: ScalarField,
    /// `||Gamma - d0||_inf`
    pub sup_distance: f64,
    /// `delta0 ||grad Gamma||_inf`
    pub grad_weighted: f64,
    /// `delta0^2 ||grad^2 Gamma||_inf` (Frobenius norm of the Hessian)
    pub hessian_weighted: f64,
}

/// Prepare the perturbation ansatz for uniformly continuous data.
pub fn uc_ansatz_prepare(c0: &ScalarField, d0: &ScalarField, delta0: f64) -> Result<UcAnsatz> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "delta0 must be positive, got {delta0}"
        )));
    }
    if c0.grid() != d0.grid() {
        return Err(Error::GridMismatch("c0 and d0 on different grids".into()));
    }
    let gamma = propagator::heat(d0, delta0 * delta0)?;
    let cbar0 = c0.sub(&gamma);
    let sup_distance = gamma.sub(d0).sup_norm();
    let grad = gamma.gradient();
    let grad_weighted = delta0 * grad.sup_norm();
    let dim = c0.grid().dim();
    let mut hess_sq = vec![0.0; c0.grid().total_points()];
    for i in 0..dim {
        for j in 0..dim {
            let dd = gamma.derivative(i).derivative(j);
            for (acc, v) in hess_sq.iter_mut().zip(dd.values()) {
                *acc += v * v;
            }
        }
    }
    let hessian_weighted =
        delta0 * delta0 * hess_sq.iter().fold(0.0f64, |a, &v| a.max(v)).sqrt();
    Ok(UcAnsatz {
        gamma,
        cbar0,
        sup_distance,
        grad_weighted,
        hessian_weighted,
    })
}

/// Evaluated data norms against the smallness threshold of the global
/// theory: `||c0||_inf + ||n0||_(critical) + ||u0||_(BMO^-1-type) +
/// ||grad Phi||_(Morrey)` compared with a reference epsilon.
#[derive(Clone, Debug)]
pub struct SmallnessReport {
    pub c_sup: f64,
    pub n_critical: f64,
    pub u_critical: f64,
    pub forcing_morrey: f64,
    pub total: f64,
    pub epsilon: f64,
    pub within: bool,
}

/// Caloric space-time `L^2` form of the 2-d critical data norm, computed
/// exactly in Fourier space over the box-capped horizon:
/// `(int_0^T ||e^{t Delta} f||_2^2 dt)^{1/2}`.
pub fn besov_neg1_22_caloric(f: &ScalarField, horizon: f64) -> f64 {
    let grid = f.grid();
    let vol = grid.volume();
    let mut acc = 0.0;
    grid.for_each_mode(|flat, _, ksq| {
        let c2 = f.spectral()[flat].norm_sqr();
        acc += if ksq == 0.0 {
            c2 * horizon
        } else {
            c2 * (1.0 - (-2.0 * ksq * horizon).exp()) / (2.0 * ksq)
        };
    });
    (vol * acc).sqrt()
}

/// Evaluate the smallness condition of the global existence theory.
pub fn smallness_report(
    init: &SolutionState,
    cfg: &SolverConfig,
    balls: &BallFamily,
) -> Result<SmallnessReport> {
    let grid = init.grid();
    let dim = grid.dim();
    let mesh = CaloricMesh::standard(balls);
    let c_sup = init.c.sup_norm();
    let n_critical = if dim == 2 {
        let cap = (grid.box_length() / 4.0).powi(2);
        besov_neg1_22_caloric(&init.n, cap)
    } else {
        norms::carleson_caloric_norm(&init.n, 2.0, balls, &mesh)?.value
    };
    let u_critical = norms::carleson_caloric_norm_vector(&init.u, 0.0, balls, &mesh)?.value;
    let forcing = match (&cfg.grad_phi, &cfg.psi) {
        (Some(phi), _) => Some(phi),
        (None, Some(psi)) => Some(psi),
        _ => None,
    };
    let forcing_morrey = match forcing {
        Some(f) => norms::morrey_norm_vector(f, 2.0, (dim - 2) as f64, balls)?.value,
        None => 0.0,
    };
    let total = c_sup + n_critical + u_critical + forcing_morrey;
    Ok(SmallnessReport {
        c_sup,
        n_critical,
        u_critical,
        forcing_morrey,
        total,
        epsilon: cfg.smallness_eps,
        within: total < cfg.smallness_eps,
    })
}

/// Outcome of running the fixed point from two different initial guesses.
#[derive(Clone, Debug)]
pub struct UniquenessReport {
    pub trace_a: PicardTrace,
    pub trace_b: PicardTrace,
    /// Sup distance of the two limits; `None` when either run failed to
    /// converge.
    pub limit_distance: Option<f64>,
    /// `(T', ||U_a||_{X_T'})` for the shrinking-horizon sequence of the
    /// vanishing-norm uniqueness condition.
    pub shrinking_norms: Vec<(f64, f64)>,
}

/// Run the CNS Picard map from two initial guesses and compare the limits;
/// also evaluates the solution norm on a shrinking horizon sequence.
pub fn uniqueness_probe(
    init: &SolutionState,
    cfg: &SolverConfig,
    guess_a: PicardGuess,
    guess_b: PicardGuess,
) -> Result<UniquenessReport> {
    let (traj_a, trace_a) = solve_cns_picard_from(init, cfg, guess_a)?;
    let (traj_b, trace_b) = solve_cns_picard_from(init, cfg, guess_b)?;
    let limit_distance = if trace_a.converged && trace_b.converged {
        Some(traj_a.sup_distance(&traj_b))
    } else {
        None
    };
    let grid = traj_a.grid().clone();
    let balls = BallFamily::dyadic(&grid, cfg.ball_stride)?;
    let mut shrinking_norms = Vec::new();
    let mut horizon = cfg.horizon;
    for _ in 0..4 {
        let value = norms::path_norm_x1(&traj_a.c, horizon, &balls)?
            + norms::path_norm_x2(&traj_a.n, horizon, &balls)?
            + norms::path_norm_x3(&traj_a.u, horizon, &balls)?;
        shrinking_norms.push((horizon, value));
        horizon /= 2.0;
    }
    Ok(UniquenessReport {
        trace_a,
        trace_b,
        limit_distance,
        shrinking_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(m: usize) -> Grid {
        Grid::new(2, 2.0 * std::f64::consts::PI, m).unwrap()
    }

    fn zero_state(grid: &Grid) -> SolutionState {
        SolutionState::new(
            ScalarField::zeros(grid.clone()),
            ScalarField::zeros(grid.clone()),
            VectorField::zeros(grid.clone()),
        )
    }

    #[test]
    fn zero_data_fixed_point_is_zero() {
        let g = grid2(16);
        let mut cfg = SolverConfig::new(0.25, 8);
        cfg.grad_phi = Some(VectorField::from_components(vec![
            ScalarField::from_fn(g.clone(), |x| x[0].cos()),
            ScalarField::from_fn(g.clone(), |x| x[1].sin()),
        ]).unwrap());
        let (traj, trace) = solve_cns_picard(&zero_state(&g), &cfg).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.diffs.len(), 1);
        for k in 0..traj.times().len() {
            assert_eq!(traj.c.fields[k].sup_norm(), 0.0);
            assert_eq!(traj.n.fields[k].sup_norm(), 0.0);
            assert_eq!(traj.u.fields[k].sup_norm(), 0.0);
        }
    }

    #[test]
    fn constant_concentration_is_invariant() {
        let g = grid2(16);
        let gamma = 0.35;
        let mut state = zero_state(&g);
        state.c = ScalarField::constant(g.clone(), gamma);
        let cfg = SolverConfig::new(0.25, 8);
        let (traj, trace) = solve_cns_picard(&state, &cfg).unwrap();
        assert!(trace.converged);
        for k in 0..traj.times().len() {
            assert!(traj.c.fields[k].sub(&ScalarField::constant(g.clone(), gamma)).sup_norm() < 1e-12);
            assert!(traj.n.fields[k].sup_norm() < 1e-12);
            assert!(traj.u.fields[k].sup_norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_divergence_free_velocity() {
        let g = grid2(16);
        let mut state = zero_state(&g);
        state.u = VectorField::from_components(vec![
            ScalarField::from_fn(g.clone(), |x| x[0].sin()),
            ScalarField::zeros(g),
        ])
        .unwrap();
        let cfg = SolverConfig::new(0.25, 8);
        assert!(solve_cns_picard(&state, &cfg).is_err());
    }

    #[test]
    fn uc_ansatz_constant_data() {
        let g = grid2(16);
        let d0 = ScalarField::constant(g.clone(), 2.0);
        let c0 = ScalarField::constant(g, 5.0);
        let ua = uc_ansatz_prepare(&c0, &d0, 0.3).unwrap();
        assert!(ua.sup_distance < 1e-13);
        assert!(ua.grad_weighted < 1e-13);
        assert!(ua.hessian_weighted < 1e-13);
        assert!(ua.cbar0.sub(&ScalarField::constant(ua.cbar0.grid().clone(), 3.0)).sup_norm() < 1e-13);
    }

    #[test]
    fn uc_ansatz_quantities_shrink_with_delta0() {
        let g = grid2(32);
        let d0 = ScalarField::from_fn(g.clone(), |x| x[0].sin());
        let c0 = ScalarField::zeros(g.clone());
        let mut prev = f64::INFINITY;
        for delta0 in [0.1, 0.05, 0.025] {
            let ua = uc_ansatz_prepare(&c0, &d0, delta0).unwrap();
            let bundle = ua.sup_distance + ua.grad_weighted + ua.hessian_weighted;
            assert!(bundle < prev, "not monotone at delta0 = {delta0}");
            prev = bundle;
            // Heat contraction: ||Gamma||_inf <= ||d0||_inf.
            assert!(ua.gamma.sup_norm() <= d0.sup_norm() + 1e-12);
        }
        assert!(uc_ansatz_prepare(&c0, &d0, 0.0).is_err());
    }

    #[test]
    fn smallness_report_zero_data_and_homogeneity() {
        let g = grid2(16);
        let cfg = SolverConfig::new(0.25, 8);
        let balls = BallFamily::dyadic(&g, 4).unwrap();
        let zero = zero_state(&g);
        let rep = smallness_report(&zero, &cfg, &balls).unwrap();
        assert_eq!(rep.total, 0.0);
        assert!(rep.within);

        let mut state = zero_state(&g);
        state.n = ScalarField::from_fn(g, |x| x[0].sin() * x[1].cos());
        let r1 = smallness_report(&state, &cfg, &balls).unwrap();
        let r2 = smallness_report(&state.scale(2.0), &cfg, &balls).unwrap();
        assert!((r2.n_critical - 2.0 * r1.n_critical).abs() < 1e-12 * r1.n_critical.max(1e-300));
        assert!((r2.total - 2.0 * r1.total).abs() < 1e-10 * r1.total.max(1e-300));
    }
}
