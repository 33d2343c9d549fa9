//! Run configuration shared by the three subcommands.
//!
//! A [`RunConfig`] is written next to every run's outputs as `config.json`;
//! reading that file back gives the same configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use poisprox_core::linops::FrameKind;

use crate::error::{Error, Result};
use crate::sim::PhantomSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Simulate,
    Deconv,
    Compare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Primal,
    PrimalDual,
    Both,
}

impl Algorithm {
    pub fn runs_primal(self) -> bool {
        matches!(self, Algorithm::Primal | Algorithm::Both)
    }

    pub fn runs_primal_dual(self) -> bool {
        matches!(self, Algorithm::PrimalDual | Algorithm::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Dictionary {
    /// Full-depth orthonormal Haar basis.
    Haar,
    /// Single-level undecimated Haar frame (four bands, `c = 4`).
    UndecimatedHaar,
}

impl Dictionary {
    pub fn frame_kind(self) -> FrameKind {
        match self {
            Dictionary::Haar => FrameKind::OrthonormalHaar,
            Dictionary::UndecimatedHaar => FrameKind::UndecimatedHaar,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dictionary::Haar => "haar",
            Dictionary::UndecimatedHaar => "undecimated-haar",
        }
    }
}

impl fmt::Display for Dictionary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Point-source phantoms are rescaled so that the blurred image peaks at
/// this many expected counts.
pub const DEFAULT_PEAK: f64 = 30.0;
/// `γ = GAMMA_FRACTION · max(y)` when no `γ` is given.
pub const GAMMA_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Subcommand,
    pub phantom: String,
    pub psf: String,
    pub peak: f64,
    pub gamma: Option<f64>,
    pub alg: Algorithm,
    pub dict: Dictionary,
    pub n_iter: usize,
    pub mu: f64,
    pub theta: f64,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    pub early_stop: bool,
    pub seed: u64,
    /// Directory holding `counts.txt`, `psf.txt` and optionally `truth.txt`;
    /// `deconv` simulates in memory when absent.
    pub input: Option<PathBuf>,
    /// The two trace files for `compare`.
    pub traces: Vec<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Subcommand::Deconv,
            phantom: "point-sources".into(),
            psf: "gaussian:sigma=1.5,size=7".into(),
            peak: DEFAULT_PEAK,
            gamma: None,
            alg: Algorithm::Both,
            dict: Dictionary::Haar,
            n_iter: 500,
            mu: 1.0,
            theta: 1.8,
            sigma: None,
            tau: None,
            early_stop: false,
            seed: 42,
            input: None,
            traces: Vec::new(),
            out: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Checks everything that can be checked before any data is loaded.
    pub fn validate(&self) -> Result<()> {
        self.phantom_spec()?;
        if self.input.is_none() || self.command == Subcommand::Simulate {
            crate::psf::parse_psf(&self.psf)?;
        }
        if !(self.peak > 0.0) || !self.peak.is_finite() {
            return Err(Error::Config(format!(
                "peak {} must be positive",
                self.peak
            )));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::Config(format!(
                    "gamma = {g} must be positive and finite"
                )));
            }
        }
        if self.n_iter == 0 {
            return Err(Error::Config("iteration count must be positive".into()));
        }
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return Err(Error::Config(format!("mu = {} must be positive", self.mu)));
        }
        if !(self.theta > 0.0 && self.theta < 2.0) {
            return Err(Error::Config(format!(
                "theta = {} must lie in ]0, 2[",
                self.theta
            )));
        }
        for (name, v) in [("sigma", self.sigma), ("tau", self.tau)] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} = {v} must be positive")));
                }
            }
        }
        if self.command == Subcommand::Compare && self.traces.len() != 2 {
            return Err(Error::Config(format!(
                "compare needs exactly two trace files, got {}",
                self.traces.len()
            )));
        }
        Ok(())
    }

    pub fn phantom_spec(&self) -> Result<PhantomSpec> {
        PhantomSpec::from_str(&self.phantom)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunConfig serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}
