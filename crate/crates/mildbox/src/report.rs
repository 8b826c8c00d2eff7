//! Evaluated-norm reports: a flat map of `norm_id -> value` with ball-family
//! provenance, serialized both as `id = value` text and as JSON.

use crate::balls::BallFamily;
use crate::norms::ScanValue;
use crate::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug, Default, Serialize)]
pub struct NormReport {
    pub values: BTreeMap<String, f64>,
    /// Argmax and family provenance, one line per string key.
    pub metadata: BTreeMap<String, String>,
}

impl NormReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn family_info(&mut self, balls: &BallFamily) {
        self.metadata.insert(
            "ball_radii".into(),
            balls
                .radii()
                .iter()
                .map(|r| format!("{r}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        self.metadata
            .insert("center_stride".into(), balls.center_stride().to_string());
    }

    pub fn insert(&mut self, id: &str, value: f64) {
        self.values.insert(id.to_string(), value);
    }

    /// Insert a ball-scanned value along with its argmax provenance; flags
    /// suprema truncated by the torus radius cap.
    pub fn insert_scan(&mut self, id: &str, scan: &ScanValue) {
        self.values.insert(id.to_string(), scan.value);
        self.metadata.insert(
            format!("{id}.argmax"),
            format!(
                "center={} radius={}{}",
                scan.argmax_center,
                scan.argmax_radius,
                if scan.radius_capped { " (radius capped)" } else { "" }
            ),
        );
    }

    /// Flat `id = value` text form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| crate::Error::Config(format!("report encode: {e}")))?;
        std::fs::write(path, json)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_form_is_sorted_and_parseable() {
        let mut r = NormReport::new();
        r.insert("x2", 1.5);
        r.insert("x1", 0.25);
        let text = r.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1 = 0.25");
        assert_eq!(lines[1], "x2 = 1.5");
    }
}
