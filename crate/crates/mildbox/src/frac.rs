//! The fractional integral `E(h)(s) = int_0^s (s-sigma)^{alpha-1}
//! sigma^{-beta} h(sigma) d sigma` on sampled functions, and the uncentered
//! Hardy-Littlewood maximal function in one dimension.
//!
//! `E` is evaluated by product integration: on each sub-panel the singular
//! weight (`sigma^{-beta}` on the lower half, `(s-sigma)^{alpha-1}` on the
//! upper half) is integrated exactly against the linear interpolant of the
//! remaining smooth factor, with dyadic grading toward both endpoints.

use crate::{Error, Result};

/// Function sampled at increasing nodes in `(0, S]`, piecewise linear
/// between nodes and extended by its first value on `(0, nodes[0])`.
#[derive(Clone, Debug)]
pub struct SampledFn {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl SampledFn {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::InvalidParam("sample arrays empty or mismatched".into()));
        }
        if nodes[0] <= 0.0 {
            return Err(Error::InvalidParam("sample nodes must be positive".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParam("sample nodes must increase".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled function".into()));
        }
        Ok(Self { nodes, values })
    }

    /// Uniform sampling of a closure on `(0, s_max]`.
    pub fn from_fn(s_max: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes: Vec<f64> = (1..=count).map(|i| s_max * i as f64 / count as f64).collect();
        let values = nodes.iter().map(|&s| f(s)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Piecewise-linear evaluation with constant extension on both sides.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.nodes[0] {
            return self.values[0];
        }
        let last = self.nodes.len() - 1;
        if s >= self.nodes[last] {
            return self.values[last];
        }
        let j = self.nodes.partition_point(|&t| t <= s) - 1;
        let theta = (s - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j]);
        self.values[j] * (1.0 - theta) + self.values[j + 1] * theta
    }

    /// Exact integral of `|h|` over `[a, b]` for the piecewise-linear
    /// interpolant, splitting panels at sign changes.
    fn abs_integral(&self, a: f64, b: f64) -> f64 {
        debug_assert!(b >= a);
        let mut cuts = vec![a];
        for &t in &self.nodes {
            if t > a && t < b {
                cuts.push(t);
            }
        }
        cuts.push(b);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let (va, vb) = (self.eval(p), self.eval(q));
            let dt = q - p;
            if va * vb >= 0.0 {
                acc += 0.5 * dt * (va.abs() + vb.abs());
            } else {
                // Sign change: |linear| integrates to a pair of triangles.
                acc += 0.5 * dt * (va * va + vb * vb) / (va.abs() + vb.abs());
            }
        }
        acc
    }
}

/// `int_p^q sigma^{-beta} (c0 + c1 sigma) d sigma`, exact.
fn moment_lower(p: f64, q: f64, beta: f64, c0: f64, c1: f64) -> f64 {
    let m0 = (q.powf(1.0 - beta) - p.powf(1.0 - beta)) / (1.0 - beta);
    let m1 = (q.powf(2.0 - beta) - p.powf(2.0 - beta)) / (2.0 - beta);
    c0 * m0 + c1 * m1
}

/// `int_p^q (s-sigma)^{alpha-1} (c0 + c1 sigma) d sigma`, exact.
fn moment_upper(p: f64, q: f64, s: f64, alpha: f64, c0: f64, c1: f64) -> f64 {
    // Substitute tau = s - sigma.
    let (ta, tb) = (s - q, s - p); // ta < tb
    let m0 = (tb.powf(alpha) - ta.powf(alpha)) / alpha;
    let m1 = (tb.powf(alpha + 1.0) - ta.powf(alpha + 1.0)) / (alpha + 1.0);
    // sigma = s - tau: c0 + c1 sigma = (c0 + c1 s) - c1 tau.
    (c0 + c1 * s) * m0 - c1 * m1
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidParam(format!(
            "{name} = {v} outside (0, 1)"
        )));
    }
    Ok(())
}

/// Quadrature sub-nodes for one evaluation point `s`: a uniform backbone
/// (controls the curvature of the non-weight factor away from the ends),
/// dyadic grading toward both `0` and `s`, the weight-switch point `s/2`,
/// and the sample nodes inside `(0, s)`.
fn quadrature_cuts(h: &SampledFn, s: f64, uniform: usize, levels: i32) -> Vec<f64> {
    let mut cuts = Vec::with_capacity(uniform + 2 * levels as usize + h.nodes.len() + 3);
    cuts.push(0.0);
    cuts.push(s);
    for j in 1..uniform {
        cuts.push(s * j as f64 / uniform as f64);
    }
    for i in 1..=levels {
        let d = s * 0.5f64.powi(i);
        cuts.push(d);
        cuts.push(s - d);
    }
    for &t in &h.nodes {
        if t > 0.0 && t < s {
            cuts.push(t);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * s);
    cuts
}

/// Evaluate `E(h)` at every sample node of `h`.
pub fn fractional_integral(h: &SampledFn, alpha: f64, beta: f64) -> Result<SampledFn> {
    check_exponent("alpha", alpha)?;
    check_exponent("beta", beta)?;
    let uniform = 1024;
    let levels = 42; // dyadic grading down to ~2^-42 of each end
    let values: Vec<f64> = h
        .nodes
        .iter()
        .map(|&s| {
            let cuts = quadrature_cuts(h, s, uniform, levels);
            let mut acc = 0.0;
            for w in cuts.windows(2) {
                let (p, q) = (w[0], w[1]);
                if q - p <= 0.0 {
                    continue;
                }
                let mid = 0.5 * (p + q);
                if mid <= 0.5 * s {
                    // Exact sigma^{-beta}; the rest is linearized between
                    // the panel ends (value at sigma = 0 taken by limit).
                    let ga = (s - p).powf(alpha - 1.0) * h.eval(p);
                    let gb = (s - q).powf(alpha - 1.0) * h.eval(q);
                    let c1 = (gb - ga) / (q - p);
                    let c0 = ga - c1 * p;
                    acc += moment_lower(p, q, beta, c0, c1);
                } else {
                    // Exact (s-sigma)^{alpha-1}; linearize sigma^{-beta} h.
                    let ga = p.powf(-beta) * h.eval(p);
                    let gb = q.powf(-beta) * h.eval(q);
                    let c1 = (gb - ga) / (q - p);
                    let c0 = ga - c1 * p;
                    acc += moment_upper(p, q, s, alpha, c0, c1);
                }
            }
            acc
        })
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fractional integral quadrature".into()));
    }
    SampledFn::new(h.nodes.clone(), values)
}

/// Uncentered maximal function over all sample windows containing each
/// node, including the degenerate window (so `M h >= |h|` pointwise).
/// Windows may begin at 0, where `h` extends by its first value.
pub fn maximal_function(h: &SampledFn) -> Result<SampledFn> {
    let q = h.nodes.len();
    // Window endpoints: 0 and every node.
    let mut ends = Vec::with_capacity(q + 1);
    ends.push(0.0);
    ends.extend_from_slice(&h.nodes);
    // Prefix integrals of |h| at the endpoints.
    let mut prefix = vec![0.0; ends.len()];
    for i in 1..ends.len() {
        prefix[i] = prefix[i - 1] + h.abs_integral(ends[i - 1], ends[i]);
    }
    let values: Vec<f64> = (0..q)
        .map(|m| {
            let x = h.nodes[m];
            let mut best = h.values[m].abs(); // singleton-limit window
            for i in 0..ends.len() {
                if ends[i] > x {
                    break;
                }
                for j in (i + 1)..ends.len() {
                    if ends[j] < x {
                        continue;
                    }
                    let len = ends[j] - ends[i];
                    if len > 0.0 {
                        best = best.max((prefix[j] - prefix[i]) / len);
                    }
                }
            }
            best
        })
        .collect();
    SampledFn::new(h.nodes.clone(), values)
}
