//! Run configuration: a TOML file with flat dotted keys, overridden by flags.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::eigensolver::Frame;
use crate::error::{GapError, Result};
use crate::potential::{PiecewiseConstant, Potential, Segment};

pub const DEFAULT_RESOLUTION: f64 = 40.0;
pub const DEFAULT_K: usize = 2;
pub const DEFAULT_L_MIN: f64 = 100.0;
pub const DEFAULT_L_MAX: f64 = 3200.0;
pub const DEFAULT_L_RATIO: f64 = 2.0;
pub const DEFAULT_T_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

/// Keys accepted in the configuration file. Every key is optional; the same
/// settings can be given as flags, which take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub potential: PotentialKeys,
    #[serde(default)]
    pub run: RunKeys,
    #[serde(default)]
    pub sweep: SweepKeys,
    #[serde(default)]
    pub hf: HfKeys,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialKeys {
    pub family: Option<String>,
    pub v0: Option<f64>,
    pub b: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub s: Option<f64>,
    /// `[[left, right, value], ...]` for the piecewise family.
    pub segments: Option<Vec<[f64; 3]>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunKeys {
    pub frame: Option<String>,
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub resolution: Option<f64>,
    pub k: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepKeys {
    pub l_min: Option<f64>,
    pub l_max: Option<f64>,
    pub l_ratio: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HfKeys {
    pub t_grid: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GapError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| GapError::Invalid(format!("config: {}", e.message())))
    }

    /// Overlays `other` on `self`: every key set in `other` wins.
    pub fn overlay(self, other: FileConfig) -> FileConfig {
        FileConfig {
            potential: PotentialKeys {
                family: other.potential.family.or(self.potential.family),
                v0: other.potential.v0.or(self.potential.v0),
                b: other.potential.b.or(self.potential.b),
                c: other.potential.c.or(self.potential.c),
                alpha: other.potential.alpha.or(self.potential.alpha),
                s: other.potential.s.or(self.potential.s),
                segments: other.potential.segments.or(self.potential.segments),
            },
            run: RunKeys {
                frame: other.run.frame.or(self.run.frame),
                length: other.run.length.or(self.run.length),
                resolution: other.run.resolution.or(self.run.resolution),
                k: other.run.k.or(self.run.k),
                workers: other.run.workers.or(self.run.workers),
                out: other.run.out.or(self.run.out),
            },
            sweep: SweepKeys {
                l_min: other.sweep.l_min.or(self.sweep.l_min),
                l_max: other.sweep.l_max.or(self.sweep.l_max),
                l_ratio: other.sweep.l_ratio.or(self.sweep.l_ratio),
            },
            hf: HfKeys {
                t_grid: other.hf.t_grid.or(self.hf.t_grid),
            },
        }
    }
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: Potential,
    pub frame: Frame,
    pub length: Option<f64>,
    pub l_min: f64,
    pub l_max: f64,
    pub l_ratio: f64,
    pub resolution: f64,
    pub k: usize,
    pub t_grid: Vec<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_keys(keys: FileConfig) -> Result<Self> {
        let potential = build_potential(&keys.potential)?;
        potential.validate()?;
        let frame = match keys.run.frame.as_deref() {
            Some(f) => f.parse()?,
            None => Frame::Physical,
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(GapError::Invalid(format!("{name} must be positive, got {v}")))
            }
        };
        let length = keys.run.length.map(|l| positive("L", l)).transpose()?;
        let resolution = positive("resolution", keys.run.resolution.unwrap_or(DEFAULT_RESOLUTION))?;
        let k = keys.run.k.unwrap_or(DEFAULT_K);
        if k == 0 {
            return Err(GapError::Invalid("k must be at least 1".into()));
        }
        if keys.run.workers == Some(0) {
            return Err(GapError::Invalid("workers must be at least 1".into()));
        }
        let t_grid = keys.hf.t_grid.unwrap_or_else(|| DEFAULT_T_GRID.to_vec());
        if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(GapError::Invalid("t-grid entries must be non-negative".into()));
        }
        Ok(Self {
            potential,
            frame,
            length,
            l_min: positive("l-min", keys.sweep.l_min.unwrap_or(DEFAULT_L_MIN))?,
            l_max: positive("l-max", keys.sweep.l_max.unwrap_or(DEFAULT_L_MAX))?,
            l_ratio: positive("l-ratio", keys.sweep.l_ratio.unwrap_or(DEFAULT_L_RATIO))?,
            resolution,
            k,
            t_grid,
            workers: keys.run.workers,
            out: keys.run.out,
        })
    }

    pub fn require_length(&self) -> Result<f64> {
        self.length
            .ok_or_else(|| GapError::Invalid("this command needs --L (or run.L in the config)".into()))
    }
}

impl fmt::Display for RunConfig {
    /// The effective configuration as `# key = value` lines.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# potential = {}", self.potential)?;
        writeln!(f, "# frame = {}", self.frame)?;
        match self.length {
            Some(l) => writeln!(f, "# L = {l}")?,
            None => writeln!(f, "# L = (unset)")?,
        }
        writeln!(f, "# sweep = {} .. {} ratio {}", self.l_min, self.l_max, self.l_ratio)?;
        writeln!(f, "# resolution = {}", self.resolution)?;
        writeln!(f, "# k = {}", self.k)?;
        let ts: Vec<String> = self.t_grid.iter().map(|t| t.to_string()).collect();
        writeln!(f, "# t_grid = {}", ts.join(","))?;
        match self.workers {
            Some(w) => writeln!(f, "# workers = {w}")?,
            None => writeln!(f, "# workers = all cores")?,
        }
        if let Some(out) = &self.out {
            writeln!(f, "# out = {}", out.display())?;
        }
        Ok(())
    }
}

fn build_potential(keys: &PotentialKeys) -> Result<Potential> {
    let need = |v: Option<f64>, name: &str, family: &str| {
        v.ok_or_else(|| GapError::Invalid(format!("potential family '{family}' needs --{name}")))
    };
    let family = keys.family.as_deref().unwrap_or("zero");
    Ok(match family {
        "zero" => Potential::Zero,
        "step" => Potential::step(need(keys.v0, "v0", family)?, need(keys.b, "b", family)?),
        "inverse-square-tail" | "tail" => Potential::InverseSquareTail,
        "power-law" => Potential::power_law(need(keys.c, "C", family)?, need(keys.alpha, "alpha", family)?),
        "bump" => Potential::bump(need(keys.v0, "v0", family)?, need(keys.s, "s", family)?),
        "piecewise" => {
            let segments = keys
                .segments
                .as_ref()
                .ok_or_else(|| GapError::Invalid("potential family 'piecewise' needs segments".into()))?;
            Potential::PiecewiseConstant(PiecewiseConstant::new(
                segments
                    .iter()
                    .map(|&[left, right, value]| Segment { left, right, value })
                    .collect(),
            )?)
        }
        other => {
            return Err(GapError::Invalid(format!(
                "unknown potential family '{other}' (zero, step, inverse-square-tail, power-law, bump, piecewise)"
            )))
        }
    })
}

/// Parses `left:right:value` triples separated by commas.
pub fn parse_segments(text: &str) -> Result<Vec<[f64; 3]>> {
    text.split(',')
        .map(|triple| {
            let parts: Vec<&str> = triple.split(':').map(str::trim).collect();
            let nums: std::result::Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
            match nums {
                Ok(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
                _ => Err(GapError::Invalid(format!("segment '{triple}' is not left:right:value"))),
            }
        })
        .collect()
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| GapError::Invalid(format!("'{t}' is not a number")))
        })
        .collect()
}
