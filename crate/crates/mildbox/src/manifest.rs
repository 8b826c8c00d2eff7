//! Run manifests: flat TOML with typed keys describing a complete,
//! reproducible run. Validation happens before any field storage is
//! allocated.

use crate::presets::DataPreset;
use crate::solver::SolverConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Cns,
    Dcns,
}

/// Where a field comes from: a named preset or an on-disk snapshot.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Snapshot { snapshot: PathBuf },
    Preset(DataPreset),
}

fn default_time_panels() -> usize {
    32
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    25
}
fn default_eps() -> f64 {
    0.1
}
fn default_stride() -> usize {
    4
}
fn default_box() -> f64 {
    2.0 * std::f64::consts::PI
}

/// Complete description of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub system: SystemKind,
    pub dim: usize,
    #[serde(default = "default_box")]
    pub box_length: f64,
    pub grid: usize,
    pub horizon: f64,
    #[serde(default = "default_time_panels")]
    pub time_panels: usize,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_eps")]
    pub smallness_eps: f64,
    #[serde(default = "default_stride")]
    pub ball_stride: usize,
    #[serde(default)]
    pub decouple_attractant: bool,
    pub initial: InitialSpec,
    #[serde(default)]
    pub forcing: Option<FieldSource>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialSpec {
    pub c: FieldSource,
    pub n: FieldSource,
    pub u: FieldSource,
    #[serde(default)]
    pub v: Option<FieldSource>,
}

impl RunManifest {
    pub fn from_toml(text: &str) -> Result<Self> {
        let manifest: RunManifest =
            toml::from_str(text).map_err(|e| Error::Config(format!("manifest parse: {e}")))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("manifest encode: {e}")))
    }

    /// Structural validation with no field allocation: grid parameters,
    /// ranges, referenced snapshot paths.
    pub fn validate(&self) -> Result<()> {
        crate::grid::Grid::new(self.dim, self.box_length, self.grid)?;
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon {} not positive", self.horizon)));
        }
        if self.time_panels < 4 {
            return Err(Error::Config("need at least 4 time panels".into()));
        }
        if self.kappa < 0.0 {
            return Err(Error::Config(format!("kappa {} negative", self.kappa)));
        }
        if self.picard_max_iter == 0 || !(self.picard_tol >= 0.0) {
            return Err(Error::Config("bad picard controls".into()));
        }
        if self.system == SystemKind::Dcns && self.initial.v.is_none() {
            return Err(Error::Config("dcns needs initial.v".into()));
        }
        let mut sources = vec![&self.initial.c, &self.initial.n, &self.initial.u];
        if let Some(v) = &self.initial.v {
            sources.push(v);
        }
        if let Some(f) = &self.forcing {
            sources.push(f);
        }
        for src in sources {
            if let FieldSource::Snapshot { snapshot } = src {
                if !snapshot.exists() {
                    return Err(Error::Config(format!(
                        "snapshot {} does not exist",
                        snapshot.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut cfg = SolverConfig::new(self.horizon, self.time_panels);
        cfg.kappa = self.kappa;
        cfg.picard_tol = self.picard_tol;
        cfg.picard_max_iter = self.picard_max_iter;
        cfg.smallness_eps = self.smallness_eps;
        cfg.ball_stride = self.ball_stride;
        cfg.decouple_attractant = self.decouple_attractant;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
system = "cns"
dim = 2
grid = 32
horizon = 0.25
seed = 7

[initial.c]
kind = "gaussian_blob"
amplitude = 0.1
width = 0.8

[initial.n]
kind = "gaussian_blob"
amplitude = 0.01
width = 0.8

[initial.u]
kind = "taylor_green"
amplitude = 0.01

[forcing]
kind = "windowed_homogeneous"
amplitude = 0.01
degree = -1.0
"#;

    #[test]
    fn parses_and_validates() {
        let m = RunManifest::from_toml(SAMPLE).unwrap();
        assert_eq!(m.system, SystemKind::Cns);
        assert_eq!(m.grid, 32);
        assert_eq!(m.time_panels, 32);
        assert!(matches!(m.initial.u, FieldSource::Preset(DataPreset::TaylorGreen { .. })));
        let round = m.to_toml().unwrap();
        let again = RunManifest::from_toml(&round).unwrap();
        assert_eq!(again.grid, m.grid);
    }

    #[test]
    fn rejects_bad_grid_before_compute() {
        let bad = SAMPLE.replace("grid = 32", "grid = 33");
        assert!(RunManifest::from_toml(&bad).is_err());
    }

    #[test]
    fn rejects_missing_attractant_for_dcns() {
        let bad = SAMPLE.replace("system = \"cns\"", "system = \"dcns\"");
        assert!(RunManifest::from_toml(&bad).is_err());
    }

    #[test]
    fn rejects_missing_snapshot_path() {
        let bad = SAMPLE.replace(
            "[initial.c]\nkind = \"gaussian_blob\"\namplitude = 0.1\nwidth = 0.8",
            "[initial.c]\nsnapshot = \"/nonexistent/field.mfld\"",
        );
        assert!(RunManifest::from_toml(&bad).is_err());
    }
}
