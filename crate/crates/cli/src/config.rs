//! Run configuration: a strict JSON document plus command-line overrides.

use std::path::{Path, PathBuf};

use qrtebd::tebd::{Scheme, TruncationPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d: usize,
    pub g: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Uniform,
    Finite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub kind: SystemKind,
    /// Unit cell length (uniform) or number of sites (finite).
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_order")]
    pub trotter_order: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(with = "scheme_name")]
    pub scheme: Scheme,
    pub chi_max: usize,
    #[serde(default = "default_cutoff")]
    pub sv_cutoff: f64,
    #[serde(default = "default_delta_abs")]
    pub delta_chi_abs: usize,
    #[serde(default = "default_delta_rel")]
    pub delta_chi_rel: f64,
    /// Let the plain QR scheme grow the bond (see [`TruncationPolicy::qr_growth`]).
    #[serde(default = "default_true")]
    pub qr_growth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    /// Write a checkpoint every this many steps; 0 keeps only the final one.
    #[serde(default)]
    pub checkpoint_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub system: SystemConfig,
    pub evolution: EvolutionConfig,
    pub truncation: TruncationConfig,
    pub output: OutputConfig,
}

mod scheme_name {
    use qrtebd::tebd::Scheme;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &Scheme, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Scheme, D::Error> {
        String::deserialize(de)?.parse().map_err(D::Error::custom)
    }
}

fn default_order() -> u32 {
    2
}
fn default_cutoff() -> f64 {
    1e-14
}
fn default_delta_abs() -> usize {
    100
}
fn default_delta_rel() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}

impl Default for RunConfig {
    /// The d = 5 clock-model quench from g = 0 to g = 2.
    fn default() -> Self {
        Self {
            model: ModelConfig { d: 5, g: 2.0 },
            system: SystemConfig {
                kind: SystemKind::Uniform,
                size: 2,
            },
            evolution: EvolutionConfig {
                dt: 0.05,
                t_max: 2.0,
                trotter_order: default_order(),
            },
            truncation: TruncationConfig {
                scheme: Scheme::QrCbe,
                chi_max: 256,
                sv_cutoff: default_cutoff(),
                delta_chi_abs: default_delta_abs(),
                delta_chi_rel: default_delta_rel(),
                qr_growth: true,
            },
            output: OutputConfig {
                path: PathBuf::from("runs/quench"),
                checkpoint_every: 0,
            },
        }
    }
}

/// Values given on the command line; each replaces the file value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub scheme: Option<Scheme>,
    pub chi_max: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub d: Option<usize>,
    pub g: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.scheme {
            self.truncation.scheme = s;
        }
        if let Some(x) = o.chi_max {
            self.truncation.chi_max = x;
        }
        if let Some(x) = o.dt {
            self.evolution.dt = x;
        }
        if let Some(x) = o.t_max {
            self.evolution.t_max = x;
        }
        if let Some(x) = o.d {
            self.model.d = x;
        }
        if let Some(x) = o.g {
            self.model.g = x;
        }
        if let Some(p) = &o.out {
            self.output.path = p.clone();
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Validation(msg));
        let (dt, t_max) = (self.evolution.dt, self.evolution.t_max);
        if self.model.d < 2 {
            return bad(format!("model.d = {} must be at least 2", self.model.d));
        }
        if !self.model.g.is_finite() {
            return bad("model.g must be finite".into());
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return bad(format!("evolution.dt = {dt} must be positive"));
        }
        if !(t_max >= dt && t_max.is_finite()) {
            return bad(format!("evolution.t_max = {t_max} must be at least dt = {dt}"));
        }
        if !matches!(self.evolution.trotter_order, 1 | 2) {
            return bad(format!("evolution.trotter_order = {} must be 1 or 2", self.evolution.trotter_order));
        }
        match self.system.kind {
            SystemKind::Uniform if self.system.size < 2 || !self.system.size.is_multiple_of(2) => {
                return bad(format!("uniform unit cell size {} must be even and positive", self.system.size));
            }
            SystemKind::Finite if self.system.size < 2 => {
                return bad(format!("finite chain size {} must be at least 2", self.system.size));
            }
            _ => {}
        }
        self.policy().validate().map_err(|e| CliError::Validation(e.to_string()))
    }

    /// Number of Trotter steps, `t_max / dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.evolution.t_max / self.evolution.dt).round().max(1.0) as usize
    }

    pub fn policy(&self) -> TruncationPolicy {
        let t = &self.truncation;
        TruncationPolicy {
            sv_cutoff: t.sv_cutoff,
            delta_chi_abs: t.delta_chi_abs,
            delta_chi_rel: t.delta_chi_rel,
            qr_growth: t.qr_growth,
            ..TruncationPolicy::new(t.chi_max)
        }
    }
}
