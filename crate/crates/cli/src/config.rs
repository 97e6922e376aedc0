//! Run configuration, read from a TOML file.
//!
//! ```toml
//! [[grid]]
//! omega = 1.0
//! gamma = 0.5
//!
//! [codes]
//! a = [1.0]
//! b = [1.001]
//!
//! [times]
//! t_start = 0.0
//! t_end = 20.0
//! samples = 201
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use dqb_core::{MemoryCode, ModeGrid, ModeSpec};
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub grid: Vec<GridEntry>,
    #[serde(default)]
    pub codes: BTreeMap<String, CodeEntry>,
    pub times: Option<TimeGrid>,
    #[serde(default)]
    pub oracle: OracleSettings,
    pub evolve: Option<EvolveOptions>,
    pub chaos: Option<ChaosOptions>,
    pub overlap: Option<CodeSelection>,
    pub entropy: Option<CodeSelection>,
    pub associate: Option<AssociateOptions>,
    pub oscillator: Option<OscillatorOptions>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridEntry {
    pub omega: f64,
    pub gamma: f64,
    pub energy: Option<f64>,
}

/// A code is either a bare θ list on the shared `[[grid]]`, or a table
/// carrying its own grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CodeEntry {
    Thetas(Vec<f64>),
    WithGrid {
        thetas: Vec<f64>,
        grid: Vec<GridEntry>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    pub tolerance: f64,
    pub n_max_cap: usize,
    pub r_samples: Vec<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            tolerance: 1e-12,
            n_max_cap: 5000,
            r_samples: vec![-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    pub code: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaosOptions {
    pub codes: Vec<String>,
    pub window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSelection {
    pub codes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssociateOptions {
    pub threshold: f64,
    pub codes: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorOptions {
    pub m: f64,
    pub gamma: f64,
    pub k: f64,
    pub x0: f64,
    pub v0: f64,
    #[serde(default)]
    pub y0: f64,
    #[serde(default)]
    pub vy0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| CliError::config("config", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not depend on the subcommand.
    fn validate(&self) -> CliResult<()> {
        if let Some(t) = &self.times {
            t.validate()?;
        }
        let o = &self.oracle;
        if !(o.tolerance > 0.0 && o.tolerance <= 1e-3) {
            return Err(CliError::config(
                "oracle.tolerance",
                "must lie in (0, 1e-3]",
            ));
        }
        if o.r_samples.iter().any(|r| !r.is_finite()) {
            return Err(CliError::config(
                "oracle.r_samples",
                "values must be finite",
            ));
        }
        if !self.grid.is_empty() {
            self.shared_grid()?;
        }
        Ok(())
    }

    pub fn shared_grid(&self) -> CliResult<Arc<ModeGrid>> {
        build_grid(&self.grid, "grid")
    }

    pub fn time_grid(&self) -> CliResult<TimeGrid> {
        self.times
            .ok_or_else(|| CliError::config("times", "missing [times] section"))
    }

    /// Resolve a named code. Codes given as bare θ lists live on the shared
    /// grid and so share one `Arc`.
    pub fn code(&self, name: &str, shared: &mut Option<Arc<ModeGrid>>) -> CliResult<MemoryCode> {
        let entry = self
            .codes
            .get(name)
            .ok_or_else(|| CliError::UnknownCode(name.to_string()))?;
        match entry {
            CodeEntry::Thetas(thetas) => {
                if shared.is_none() {
                    *shared = Some(self.shared_grid()?);
                }
                let grid = shared.as_ref().expect("grid set above");
                Ok(MemoryCode::new(grid, thetas.clone())?)
            }
            CodeEntry::WithGrid { thetas, grid } => {
                let grid = build_grid(grid, &format!("codes.{name}.grid"))?;
                Ok(MemoryCode::new(&grid, thetas.clone())?)
            }
        }
    }

    /// Resolve a list of names, or every code in name order when `names` is
    /// `None`.
    pub fn codes(&self, names: Option<&[String]>) -> CliResult<Vec<(String, MemoryCode)>> {
        let names: Vec<String> = match names {
            Some(n) => n.to_vec(),
            None => self.codes.keys().cloned().collect(),
        };
        let mut shared = None;
        names
            .into_iter()
            .map(|n| {
                let c = self.code(&n, &mut shared)?;
                Ok((n, c))
            })
            .collect()
    }
}

impl TimeGrid {
    fn validate(&self) -> CliResult<()> {
        if self.samples < 2 {
            return Err(CliError::config("times.samples", "need at least 2 samples"));
        }
        if !(self.t_start.is_finite() && self.t_start >= 0.0) {
            return Err(CliError::config("times.t_start", "must be finite and >= 0"));
        }
        if !(self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(CliError::config(
                "times.t_end",
                "must be finite and > t_start",
            ));
        }
        Ok(())
    }

    /// `samples` equally spaced points, endpoints included. Each point is
    /// computed from its index so no rounding error accumulates.
    pub fn points(&self) -> Vec<f64> {
        let n = self.samples - 1;
        let span = self.t_end - self.t_start;
        (0..=n)
            .map(|i| {
                if i == n {
                    self.t_end
                } else {
                    self.t_start + span * (i as f64 / n as f64)
                }
            })
            .collect()
    }
}

fn build_grid(entries: &[GridEntry], field: &str) -> CliResult<Arc<ModeGrid>> {
    if entries.is_empty() {
        return Err(CliError::config(field, "grid needs at least one mode"));
    }
    let specs: Vec<ModeSpec> = entries
        .iter()
        .map(|e| ModeSpec {
            omega: e.omega,
            gamma: e.gamma,
            energy: e.energy,
        })
        .collect();
    ModeGrid::build(&specs)
        .map(Arc::new)
        .map_err(|e| CliError::config(field, e.to_string()))
}
