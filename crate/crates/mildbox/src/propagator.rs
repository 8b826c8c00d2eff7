//! Exact semigroup propagators as Fourier multipliers: the heat semigroup,
//! its damped variant, their spatial gradients, and the Oseen propagator
//! `e^{t Delta} P`.

use crate::field::{ScalarField, VectorField};
use crate::{Error, Result};
use num_complex::Complex;

type C64 = Complex<f64>;

/// Multiplier family of a propagation kernel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PropagatorKind {
    /// `e^{-|k|^2 t}`
    Heat,
    /// `e^{-kappa t} e^{-|k|^2 t}`
    DampedHeat { kappa: f64 },
    /// `i k_axis e^{-|k|^2 t}`, the kernel `k1 = grad g`
    HeatGradient { axis: usize },
    /// `e^{-|k|^2 t} P(k)`, the Oseen kernel; acts on vector fields
    Oseen,
    /// `i k_axis e^{-|k|^2 t} P(k)`
    OseenGradient { axis: usize },
}

impl PropagatorKind {
    /// Scalar multiplier value; only meaningful for the scalar-acting kinds.
    pub fn scalar_multiplier(&self, k: [f64; 3], ksq: f64, t: f64) -> C64 {
        match self {
            PropagatorKind::Heat => C64::new((-ksq * t).exp(), 0.0),
            PropagatorKind::DampedHeat { kappa } => {
                C64::new((-(kappa + ksq) * t).exp(), 0.0)
            }
            PropagatorKind::HeatGradient { axis } => {
                C64::new(0.0, k[*axis]) * (-ksq * t).exp()
            }
            _ => panic!("vector-only propagator used as a scalar multiplier"),
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "propagation time must be nonnegative, got {t}"
            )));
        }
        if let PropagatorKind::DampedHeat { kappa } = self {
            if !(kappa.is_finite() && *kappa >= 0.0) {
                return Err(Error::InvalidParam(format!(
                    "damping rate must be nonnegative, got {kappa}"
                )));
            }
        }
        Ok(())
    }
}

/// Apply a scalar-acting propagator for time `t >= 0`.
pub fn propagate_scalar(f: &ScalarField, kind: PropagatorKind, t: f64) -> Result<ScalarField> {
    kind.check_time(t)?;
    match kind {
        PropagatorKind::Heat | PropagatorKind::DampedHeat { .. } | PropagatorKind::HeatGradient { .. } => {
            Ok(f.map_spectral(|_, k, ksq, c| kind.scalar_multiplier(k, ksq, t) * c))
        }
        _ => Err(Error::InvalidParam(
            "Oseen propagators act on vector fields".into(),
        )),
    }
}

/// Apply a propagator to a vector field for time `t >= 0`.
pub fn propagate_vector(v: &VectorField, kind: PropagatorKind, t: f64) -> Result<VectorField> {
    kind.check_time(t)?;
    match kind {
        PropagatorKind::Heat | PropagatorKind::DampedHeat { .. } | PropagatorKind::HeatGradient { .. } => {
            let comps = v
                .components()
                .iter()
                .map(|c| propagate_scalar(c, kind, t))
                .collect::<Result<Vec<_>>>()?;
            VectorField::from_components(comps)
        }
        PropagatorKind::Oseen => {
            let projected = v.leray_project();
            propagate_vector(&projected, PropagatorKind::Heat, t)
        }
        PropagatorKind::OseenGradient { axis } => {
            let oseen = propagate_vector(v, PropagatorKind::Oseen, t)?;
            Ok(oseen.map(|c| c.derivative(axis)))
        }
    }
}

/// Heat flow `e^{t Delta} f`, the caloric extension at time `t`.
pub fn heat(f: &ScalarField, t: f64) -> Result<ScalarField> {
    propagate_scalar(f, PropagatorKind::Heat, t)
}

/// Damped heat flow `e^{-kappa t} e^{t Delta} f`.
pub fn damped_heat(f: &ScalarField, kappa: f64, t: f64) -> Result<ScalarField> {
    propagate_scalar(f, PropagatorKind::DampedHeat { kappa }, t)
}

/// Oseen flow `e^{t Delta} P v`.
pub fn oseen(v: &VectorField, t: f64) -> Result<VectorField> {
    propagate_vector(v, PropagatorKind::Oseen, t)
}
