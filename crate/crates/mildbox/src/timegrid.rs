//! Time meshes for the Duhamel quadrature and the stable `phi` functions of
//! exponential integration.

use crate::{Error, Result};

/// Strictly increasing nodes `0 = t_0 < t_1 < ... < t_K = T`.
///
/// The default construction is geometric-then-uniform: the top half of the
/// interval is covered uniformly and the bottom half by a geometric cascade
/// whose first node is at most `min((T/K)^2, T/K^2)`, refining where the
/// high-mode transients of the semigroup live.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// Geometric-then-uniform mesh with `panels >= 4` panels.
    pub fn geometric_uniform(horizon: f64, panels: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParam(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if panels < 4 {
            return Err(Error::InvalidParam(format!(
                "need at least 4 time panels, got {panels}"
            )));
        }
        let k = panels as f64;
        let n_uni = panels / 2;
        let n_geo = panels - n_uni;
        let t_switch = horizon / 2.0;
        let first = ((horizon / k).powi(2)).min(horizon / (k * k));
        let ratio = (t_switch / first).powf(1.0 / (n_geo as f64 - 1.0));
        let mut nodes = Vec::with_capacity(panels + 1);
        nodes.push(0.0);
        for i in 0..n_geo {
            nodes.push(first * ratio.powi(i as i32));
        }
        let du = (horizon - t_switch) / n_uni as f64;
        for i in 1..=n_uni {
            nodes.push(t_switch + du * i as f64);
        }
        nodes[panels] = horizon;
        let tg = Self { nodes };
        tg.validate()?;
        Ok(tg)
    }

    /// Uniform mesh; used by refinement studies where nodes must nest.
    pub fn uniform(horizon: f64, panels: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) || panels < 2 {
            return Err(Error::InvalidParam("bad uniform time grid".into()));
        }
        let nodes = (0..=panels)
            .map(|i| horizon * i as f64 / panels as f64)
            .collect();
        Ok(Self { nodes })
    }

    /// Mesh from explicit nodes (must start at 0 and increase strictly).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        let tg = Self { nodes };
        tg.validate()?;
        Ok(tg)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() < 2 || self.nodes[0] != 0.0 {
            return Err(Error::InvalidParam("time grid must start at 0".into()));
        }
        for w in self.nodes.windows(2) {
            if !(w[1] > w[0] && w[1].is_finite()) {
                return Err(Error::InvalidParam("time nodes must increase strictly".into()));
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Scale every node by a positive factor (parabolic rescaling of runs).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|t| t * factor).collect(),
        }
    }
}

/// `phi_1(z) = (e^z - 1)/z`, continuous at 0.
pub fn phi1(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.exp_m1() / z
    }
}

/// `phi_2(z) = (e^z - 1 - z)/z^2`, with a series branch near 0.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // sum z^n / (n+2)!
        let mut term = 0.5;
        let mut acc = term;
        for n in 1..24 {
            term *= z / (n as f64 + 2.0);
            acc += term;
        }
        acc
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// `phi_3(z) = (e^z - 1 - z - z^2/2)/z^3`.
pub fn phi3(z: f64) -> f64 {
    if z.abs() < 0.5 {
        // sum z^n / (n+3)!
        let mut term = 1.0 / 6.0;
        let mut acc = term;
        for n in 1..24 {
            term *= z / (n as f64 + 3.0);
            acc += term;
        }
        acc
    } else {
        (z.exp_m1() - z - 0.5 * z * z) / (z * z * z)
    }
}

/// `psi(z) = ((z-1) e^z + 1)/z^2 = phi1(z) - phi2(z)`: weight of the
/// panel endpoint nearer the evaluation time in exact linear-source
/// integration.
pub fn psi(z: f64) -> f64 {
    phi1(z) - phi2(z)
}

/// Exact integration of `e^{a (t_right - s)}` against the linear
/// interpolant of `(q_left, q_right)` over a panel of width `dt`:
/// returns the pair of endpoint weights `(w_left, w_right)`.
pub fn panel_weights(a: f64, dt: f64) -> (f64, f64) {
    let z = a * dt;
    (dt * psi(z), dt * phi2(z))
}
