//! Executable qualitative checks on solver output: mass conservation,
//! nonnegativity, L1 contraction, sharp decay weights, parabolic scaling
//! covariance, the embedding verifiers, and the mollified-data convergence
//! study.

use crate::balls::BallFamily;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::norms::{self, CaloricMesh};
use crate::presets;
use crate::solver::{solve_cns_picard, SolutionState, SolverConfig, Trajectory};
use crate::{Error, Result};
use num_complex::Complex;
use serde::Serialize;

type C64 = Complex<f64>;

/// Per-node bookkeeping of conserved and signed quantities.
#[derive(Clone, Debug, Serialize)]
pub struct ConservationSeries {
    pub times: Vec<f64>,
    /// Total mass `int n dx` per node.
    pub mass: Vec<f64>,
    pub l1_n: Vec<f64>,
    pub min_n: Vec<f64>,
    pub max_n: Vec<f64>,
    pub min_c: Vec<f64>,
    pub max_c: Vec<f64>,
}

impl ConservationSeries {
    pub fn from_trajectory(traj: &Trajectory) -> Result<Self> {
        let times = traj.times().nodes().to_vec();
        if times.is_empty() {
            return Err(Error::EmptyFamily("empty trajectory".into()));
        }
        Ok(Self {
            times,
            mass: traj.n.fields.iter().map(|f| f.mass()).collect(),
            l1_n: traj.n.fields.iter().map(|f| f.l1_norm()).collect(),
            min_n: traj.n.fields.iter().map(|f| f.min_value()).collect(),
            max_n: traj.n.fields.iter().map(|f| f.max_value()).collect(),
            min_c: traj.c.fields.iter().map(|f| f.min_value()).collect(),
            max_c: traj.c.fields.iter().map(|f| f.max_value()).collect(),
        })
    }
}

/// Mass-conservation verdict: the divergence structure of the density
/// equation keeps `int n dx` at its initial value to roundoff.
#[derive(Clone, Debug, Serialize)]
pub struct MassReport {
    pub series_mass: Vec<f64>,
    pub initial_mass: f64,
    pub max_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn check_mass_conservation(traj: &Trajectory) -> Result<(ConservationSeries, MassReport)> {
    let series = ConservationSeries::from_trajectory(traj)?;
    let initial = series.mass[0];
    let max_drift = series
        .mass
        .iter()
        .map(|m| (m - initial).abs())
        .fold(0.0, f64::max);
    let tolerance = 1e-10 * initial.abs().max(1.0);
    let report = MassReport {
        series_mass: series.mass.clone(),
        initial_mass: initial,
        max_drift,
        tolerance,
        pass: max_drift <= tolerance,
    };
    Ok((series, report))
}

/// Nonnegativity check gated on the hypothesis `c0, n0 >= 0`; spectral
/// representations cannot hold signs pointwise, so violations are measured
/// against an amplitude-relative allowance instead of clipped away.
#[derive(Clone, Debug, Serialize)]
pub struct NonnegativityReport {
    pub hypothesis_met: bool,
    pub min_c: f64,
    pub min_n: f64,
    pub tolerance: f64,
    /// None when the data was signed, so the proposition does not apply.
    pub pass: Option<bool>,
}

pub fn check_nonnegativity(traj: &Trajectory) -> Result<NonnegativityReport> {
    let series = ConservationSeries::from_trajectory(traj)?;
    let amp = traj.c.fields[0].sup_norm() + traj.n.fields[0].sup_norm();
    let tolerance = 1e-6 * amp.max(1e-300);
    let hypothesis_met =
        series.min_c[0] >= -1e-9 * amp.max(1e-300) && series.min_n[0] >= -1e-9 * amp.max(1e-300);
    let min_c = series.min_c.iter().copied().fold(f64::INFINITY, f64::min);
    let min_n = series.min_n.iter().copied().fold(f64::INFINITY, f64::min);
    let pass = if hypothesis_met {
        Some(min_c >= -tolerance && min_n >= -tolerance)
    } else {
        None
    };
    Ok(NonnegativityReport {
        hypothesis_met,
        min_c,
        min_n,
        tolerance,
        pass,
    })
}

/// L1 monotonicity check: `||n(t)||_1` must not increase beyond relative
/// slack.
#[derive(Clone, Debug, Serialize)]
pub struct L1Report {
    pub series: Vec<f64>,
    pub slack: f64,
    pub pass: bool,
}

pub fn check_l1_contraction(traj: &Trajectory) -> Result<L1Report> {
    let series: Vec<f64> = traj.n.fields.iter().map(|f| f.l1_norm()).collect();
    if series.is_empty() {
        return Err(Error::EmptyFamily("empty trajectory".into()));
    }
    let slack = 1e-8 * series[0].max(1.0);
    let pass = series.windows(2).all(|w| w[1] <= w[0] + slack);
    Ok(L1Report { series, slack, pass })
}

/// Weighted sup-norm series testing the sharp heat-decay rates: `t ||n||`,
/// `t^{1/2} ||u||`, `t^{1/2} ||grad c||`. Passing means no late growth:
/// each series stays within twice its value at the first node past `T/10`.
#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub n_weighted: Vec<f64>,
    pub u_weighted: Vec<f64>,
    pub grad_c_weighted: Vec<f64>,
    pub pass: bool,
}

pub fn decay_weight_series(traj: &Trajectory) -> Result<DecayReport> {
    let times = traj.times().nodes().to_vec();
    let horizon = *times.last().ok_or_else(|| Error::EmptyFamily("empty trajectory".into()))?;
    let n_weighted: Vec<f64> = times
        .iter()
        .zip(&traj.n.fields)
        .map(|(&t, f)| t * f.sup_norm())
        .collect();
    let u_weighted: Vec<f64> = times
        .iter()
        .zip(&traj.u.fields)
        .map(|(&t, f)| t.sqrt() * f.sup_norm())
        .collect();
    let grad_c_weighted: Vec<f64> = times
        .iter()
        .zip(&traj.c.fields)
        .map(|(&t, f)| t.sqrt() * f.gradient().sup_norm())
        .collect();
    let refi = times
        .iter()
        .position(|&t| t >= horizon / 10.0)
        .unwrap_or(0);
    let ok = |series: &[f64]| -> bool {
        let cap = 2.0 * series[refi] + 1e-14 * series.iter().fold(0.0f64, |a, &v| a.max(v));
        series.iter().skip(refi).all(|&v| v <= cap)
    };
    let pass = ok(&n_weighted) && ok(&u_weighted) && ok(&grad_c_weighted);
    Ok(DecayReport {
        times,
        n_weighted,
        u_weighted,
        grad_c_weighted,
        pass,
    })
}

/// Outcome of the parabolic rescaling comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub delta: f64,
    /// Max relative sup-norm discrepancy per component (c, n, u).
    pub discrepancy_c: f64,
    pub discrepancy_n: f64,
    pub discrepancy_u: f64,
    pub max_discrepancy: f64,
}

/// Refine a field's sampling from grid `(L, M)` to `(L, 2M)` by spectral
/// zero padding (exact for band-limited fields).
fn refine_samples(f: &ScalarField, fine: &Grid) -> ScalarField {
    let coarse = f.grid();
    let mc = coarse.points_per_axis() as i64;
    let mut spec = vec![C64::default(); fine.total_points()];
    coarse.for_each_mode(|flat, _, _| {
        let idx = coarse.unflatten(flat);
        let mut fine_idx = [0usize; 3];
        for ax in 0..coarse.dim() {
            let signed = coarse.signed_mode(idx[ax]);
            fine_idx[ax] = signed.rem_euclid(fine.points_per_axis() as i64) as usize;
        }
        let _ = mc;
        spec[fine.flatten(&fine_idx[..coarse.dim()])] = f.spectral()[flat];
    });
    ScalarField::from_spectral(fine.clone(), spec)
}

/// Transport a field to the `delta`-rescaled box: `g(x) = scale * f(delta x)`
/// lives on the box `L/delta` with the same mode indices.
fn rescale_field(f: &ScalarField, small: &Grid, scale: f64) -> ScalarField {
    let coarse = f.grid();
    let mut spec = vec![C64::default(); small.total_points()];
    coarse.for_each_mode(|flat, _, _| {
        let idx = coarse.unflatten(flat);
        let mut small_idx = [0usize; 3];
        for ax in 0..coarse.dim() {
            let signed = coarse.signed_mode(idx[ax]);
            small_idx[ax] = signed.rem_euclid(small.points_per_axis() as i64) as usize;
        }
        spec[small.flatten(&small_idx[..coarse.dim()])] = scale * f.spectral()[flat];
    });
    ScalarField::from_spectral(small.clone(), spec)
}

fn rescale_vector(v: &VectorField, small: &Grid, scale: f64) -> Result<VectorField> {
    VectorField::from_components(
        v.components()
            .iter()
            .map(|c| rescale_field(c, small, scale))
            .collect(),
    )
}

/// Solve the base problem and its parabolic rescaling
/// `c_d(x,t) = c(dx, d^2 t)`, `n_d = d^2 n(dx, d^2 t)`,
/// `u_d = d u(dx, d^2 t)` with `d = 2`, and compare under the scaling map.
/// The rescaled run lives on the box `L/2` with `2M` points and horizon
/// `T/4`; the base trajectory is spectrally refined to the comparison
/// points.
pub fn scaling_covariance_test(
    init: &SolutionState,
    cfg: &SolverConfig,
) -> Result<ScalingReport> {
    let delta = 2.0;
    let grid = init.grid().clone();
    let (base, base_trace) = solve_cns_picard(init, cfg)?;
    if !base_trace.converged {
        return Err(Error::InvalidParam(
            "scaling test needs a converged base run".into(),
        ));
    }

    let small = Grid::new(
        grid.dim(),
        grid.box_length() / delta,
        2 * grid.points_per_axis(),
    )?;
    let init_small = SolutionState {
        c: rescale_field(&init.c, &small, 1.0),
        n: rescale_field(&init.n, &small, delta * delta),
        u: rescale_vector(&init.u, &small, delta)?,
        v: None,
    };
    let mut cfg_small = cfg.clone();
    cfg_small.horizon = cfg.horizon / (delta * delta);
    // Node-exact correspondence t' = t / delta^2 between the two runs.
    cfg_small.time_nodes = Some(cfg.time_grid()?.scaled(1.0 / (delta * delta)));
    cfg_small.grad_phi = match &cfg.grad_phi {
        Some(phi) => Some(rescale_vector(phi, &small, delta)?),
        None => None,
    };
    // Same stride in cells: the dyadic family bottoms out at 4 cells, so
    // the coverage invariant caps the stride regardless of the box.
    cfg_small.ball_stride = cfg.ball_stride;
    let (scaled, scaled_trace) = solve_cns_picard(&init_small, &cfg_small)?;
    if !scaled_trace.converged {
        return Err(Error::InvalidParam(
            "scaling test needs a converged rescaled run".into(),
        ));
    }

    // Comparison grid: (L, 2M); base values at the points 2x' are the
    // refined base fields, index-aligned with the rescaled run.
    let fine = Grid::new(grid.dim(), grid.box_length(), 2 * grid.points_per_axis())?;
    let mut num = [0.0f64; 3];
    let mut den = [0.0f64; 3];
    for (k, _) in scaled.times().nodes().iter().enumerate() {
        let pairs: [(&ScalarField, &ScalarField, f64, usize); 2] = [
            (&scaled.c.fields[k], &base.c.fields[k], 1.0, 0),
            (&scaled.n.fields[k], &base.n.fields[k], delta * delta, 1),
        ];
        for (scaled_f, base_f, factor, slot) in pairs {
            let refined = refine_samples(base_f, &fine).scale(factor);
            num[slot] = num[slot].max(
                ScalarField::from_values(small.clone(), refined.values().to_vec())?
                    .sub(scaled_f)
                    .sup_norm(),
            );
            den[slot] = den[slot].max(refined.sup_norm());
        }
        for ax in 0..grid.dim() {
            let refined = refine_samples(base.u.fields[k].component(ax), &fine).scale(delta);
            num[2] = num[2].max(
                ScalarField::from_values(small.clone(), refined.values().to_vec())?
                    .sub(scaled.u.fields[k].component(ax))
                    .sup_norm(),
            );
            den[2] = den[2].max(refined.sup_norm());
        }
    }
    let rel = |i: usize| if den[i] == 0.0 { 0.0 } else { num[i] / den[i] };
    let report = ScalingReport {
        delta,
        discrepancy_c: rel(0),
        discrepancy_n: rel(1),
        discrepancy_u: rel(2),
        max_discrepancy: rel(0).max(rel(1)).max(rel(2)),
    };
    Ok(report)
}

/// One embedding inequality instance: `small_space_norm` controls
/// `large_space_norm` up to a constant.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingSample {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Max ratios of the three embedding chains over random band-limited
/// fields.
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub samples: usize,
    pub excluded: usize,
    /// `L^{-1}-type norm <= C ||.||_(Besov-Morrey)`
    pub max_ratio_bm_to_critical: f64,
    /// `B^{-2}_(inf,inf) <= C L^{-1}-type norm`
    pub max_ratio_critical_to_besov: f64,
    /// `BMO^{-1} <= C ||.||_(Besov-Morrey)`
    pub max_ratio_bm_to_bmo: f64,
}

/// Evaluate both sides of the embedding chain on `sample_count` random
/// band-limited fields (3-d parameters: `p = 2, lambda = 0, s = 1/4` for
/// the critical chain and `p = 4` for the velocity class).
pub fn embedding_suite(
    sample_count: usize,
    seed: u64,
    grid: &Grid,
    stride: usize,
) -> Result<EmbeddingReport> {
    if sample_count < 30 {
        return Err(Error::InvalidParam(
            "embedding suite needs at least 30 samples".into(),
        ));
    }
    let balls = BallFamily::dyadic(grid, stride)?;
    let mesh = CaloricMesh::standard(&balls);
    let bank = crate::lp::LpBank::new(grid)?;
    let mut report = EmbeddingReport {
        samples: sample_count,
        excluded: 0,
        max_ratio_bm_to_critical: 0.0,
        max_ratio_critical_to_besov: 0.0,
        max_ratio_bm_to_bmo: 0.0,
    };
    for i in 0..sample_count {
        let f = presets::random_bandlimited(grid, 1.0, 4, seed.wrapping_add(i as u64));
        if f.sup_norm() == 0.0 {
            report.excluded += 1;
            continue;
        }
        // One heat-flow pass feeds both Carleson scales and the caloric
        // Besov sup.
        let bundle = norms::caloric_bundle(&f, &[2.0, 0.0], &balls, &mesh)?;
        let critical = bundle.carleson[0].1.value;
        let bmo_neg1 = bundle.carleson[1].1.value;
        let besov = bundle.besov_inf_m2;
        // N = 3, Morrey lambda = 0: s = 1 + (0 - 3)/(2 p), p = 2 -> -2s = -1/2.
        let bm_critical =
            norms::besov_morrey_norm(&f, -0.5, 2.0, 0.0, f64::INFINITY, &bank, &balls)?;
        // p = 4 > N - lambda: s = 1 - 3/4 -> index -1/4.
        let bm_bmo = norms::besov_morrey_norm(&f, -0.25, 4.0, 0.0, f64::INFINITY, &bank, &balls)?;
        if bm_critical > 0.0 {
            report.max_ratio_bm_to_critical =
                report.max_ratio_bm_to_critical.max(critical / bm_critical);
        }
        if critical > 0.0 {
            report.max_ratio_critical_to_besov =
                report.max_ratio_critical_to_besov.max(besov / critical);
        }
        if bm_bmo > 0.0 {
            report.max_ratio_bm_to_bmo = report.max_ratio_bm_to_bmo.max(bmo_neg1 / bm_bmo);
        }
    }
    Ok(report)
}

/// Drift of the solution under heat mollification of the concentration
/// data, mirroring the regularized-data argument of the nonnegativity
/// proof: smaller mollification must stay closer to the base run.
#[derive(Clone, Debug, Serialize)]
pub struct MollificationReport {
    /// `(epsilon, sup-norm drift of the full trajectory)`
    pub drifts: Vec<(f64, f64)>,
    pub monotone: bool,
}

pub fn mollification_study(
    init: &SolutionState,
    cfg: &SolverConfig,
    epsilons: &[f64],
) -> Result<MollificationReport> {
    let (base, _) = solve_cns_picard(init, cfg)?;
    let mut drifts = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let mut mollified = init.clone();
        mollified.c = crate::propagator::heat(&init.c, eps)?;
        mollified.n = crate::propagator::heat(&init.n, eps)?;
        let (run, _) = solve_cns_picard(&mollified, cfg)?;
        drifts.push((eps, base.sup_distance(&run)));
    }
    let monotone = drifts.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    Ok(MollificationReport { drifts, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duhamel::{ScalarTrajectory, VectorTrajectory};
    use crate::timegrid::TimeGrid;

    fn grid2(m: usize) -> Grid {
        Grid::new(2, 2.0 * std::f64::consts::PI, m).unwrap()
    }

    fn heat_trajectory(grid: &Grid, n0: &ScalarField, horizon: f64) -> Trajectory {
        let tg = TimeGrid::geometric_uniform(horizon, 12).unwrap();
        Trajectory {
            c: ScalarTrajectory::caloric(&ScalarField::zeros(grid.clone()), &tg, 0.0).unwrap(),
            n: ScalarTrajectory::caloric(n0, &tg, 0.0).unwrap(),
            u: VectorTrajectory::caloric(&VectorField::zeros(grid.clone()), &tg, 0.0).unwrap(),
            v: None,
        }
    }

    #[test]
    fn heat_flow_preserves_mass_exactly() {
        let g = grid2(32);
        let n0 = presets::DataPreset::GaussianBlob { amplitude: 1.0, width: 0.8 }
            .scalar_field(&g, 0)
            .unwrap();
        let traj = heat_trajectory(&g, &n0, 0.5);
        let (_, report) = check_mass_conservation(&traj).unwrap();
        assert!(report.pass, "drift {}", report.max_drift);
    }

    #[test]
    fn zero_solution_is_conserved_and_nonnegative() {
        let g = grid2(16);
        let traj = heat_trajectory(&g, &ScalarField::zeros(g.clone()), 0.5);
        let (_, mass) = check_mass_conservation(&traj).unwrap();
        assert!(mass.pass);
        let nn = check_nonnegativity(&traj).unwrap();
        assert!(nn.hypothesis_met);
        assert_eq!(nn.pass, Some(true));
        let l1 = check_l1_contraction(&traj).unwrap();
        assert!(l1.pass);
        assert!(l1.series.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn signed_data_flags_hypothesis() {
        let g = grid2(16);
        let n0 = ScalarField::from_fn(g.clone(), |x| x[0].sin());
        let traj = heat_trajectory(&g, &n0, 0.5);
        let nn = check_nonnegativity(&traj).unwrap();
        assert!(!nn.hypothesis_met);
        assert_eq!(nn.pass, None);
    }

    #[test]
    fn l1_contraction_for_signed_heat_flow() {
        let g = grid2(32);
        let n0 = ScalarField::from_fn(g.clone(), |x| x[0].sin() + 0.3 * (2.0 * x[1]).cos());
        let traj = heat_trajectory(&g, &n0, 0.5);
        let l1 = check_l1_contraction(&traj).unwrap();
        assert!(l1.pass, "series {:?}", l1.series);
        assert!(l1.series.last().unwrap() < &l1.series[0]);
    }

    #[test]
    fn scaling_covariance_exact_for_pure_heat_flow() {
        // With every coupling zero the solve is the caloric extension and
        // the parabolic rescaling is an exact multiplier identity.
        let g = grid2(32);
        let init = SolutionState::new(
            ScalarField::from_fn(g.clone(), |x| 0.3 * x[0].sin() + 0.1 * (2.0 * x[1]).cos()),
            ScalarField::zeros(g.clone()),
            VectorField::zeros(g.clone()),
        );
        let mut cfg = SolverConfig::new(0.25, 16);
        cfg.picard_tol = 1e-8;
        let report = scaling_covariance_test(&init, &cfg).unwrap();
        assert!(
            report.max_discrepancy <= 1e-10,
            "pure heat flow scaling discrepancy {:.3e}",
            report.max_discrepancy
        );
    }

    #[test]
    fn decay_weights_for_single_mode_heat_flow() {
        let g = grid2(32);
        let n0 = ScalarField::from_fn(g.clone(), |x| (3.0 * x[0]).sin());
        let traj = heat_trajectory(&g, &n0, 1.0);
        let report = decay_weight_series(&traj).unwrap();
        assert!(report.pass, "weights {:?}", report.n_weighted);
        // t e^{-9t} peaks at t = 1/9 and decays beyond.
        let last = *report.n_weighted.last().unwrap();
        let peak = report.n_weighted.iter().fold(0.0f64, |a, &v| a.max(v));
        assert!(last < peak);
    }
}
