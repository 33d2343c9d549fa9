//! Command-line arguments, mapped onto a [`RunConfig`].
//!
//! Every flag is optional: unset flags come from `--config <file>` when
//! given, otherwise from [`RunConfig::default`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use crate::config::{Algorithm, Dictionary, RunConfig, Subcommand};
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "poisprox",
    version,
    about = "Poisson deconvolution by proximal splitting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, ClapSubcommand)]
pub enum Command {
    /// Write truth.txt, psf.txt and counts.txt for a synthetic scene.
    Simulate(RunArgs),
    /// Reconstruct from counts with one or both solvers.
    Deconv(RunArgs),
    /// Align two trace files on iteration and on elapsed time.
    Compare {
        trace_a: PathBuf,
        trace_b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Start from a saved config.json; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// e.g. `point-sources:count=12,seed=7`, `constant:scale=10,size=8`
    #[arg(long)]
    pub phantom: Option<String>,
    /// `gaussian:sigma=1.5,size=7`, `box:size=3`, `delta`, or a matrix file
    #[arg(long)]
    pub psf: Option<String>,
    /// Peak expected count of the blurred point-source scene
    #[arg(long)]
    pub peak: Option<f64>,
    /// Regularization weight; defaults to 0.01·max(counts)
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub alg: Option<Algorithm>,
    #[arg(long, value_enum)]
    pub dict: Option<Dictionary>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Stop once the objective settles (relative change below 1e-10 over
    /// 50 iterations)
    #[arg(long)]
    pub early_stop: bool,
    /// Seed of the Poisson noise
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory with counts.txt and psf.txt (and optionally truth.txt)
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, command: Subcommand) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.command = command;
        macro_rules! take {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        take!(phantom => phantom, psf => psf, peak => peak, alg => alg, dict => dict,
              iters => n_iter, mu => mu, theta => theta, seed => seed, out => out);
        if self.gamma.is_some() {
            cfg.gamma = self.gamma;
        }
        if self.sigma.is_some() {
            cfg.sigma = self.sigma;
        }
        if self.tau.is_some() {
            cfg.tau = self.tau;
        }
        if self.input.is_some() {
            cfg.input = self.input;
        }
        cfg.early_stop |= self.early_stop;
        Ok(cfg)
    }
}

impl Cli {
    pub fn into_config(self) -> Result<RunConfig> {
        match self.command {
            Command::Simulate(args) => args.into_config(Subcommand::Simulate),
            Command::Deconv(args) => args.into_config(Subcommand::Deconv),
            Command::Compare {
                trace_a,
                trace_b,
                out,
            } => {
                let mut cfg = RunConfig {
                    command: Subcommand::Compare,
                    traces: vec![trace_a, trace_b],
                    ..Default::default()
                };
                if let Some(out) = out {
                    cfg.out = out;
                }
                Ok(cfg)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        Cli::try_parse_from(std::iter::once("poisprox").chain(args.iter().copied()))
            .unwrap()
            .into_config()
            .unwrap()
    }

    #[test]
    fn bare_deconv_is_the_default_config() {
        assert_eq!(parse(&["deconv"]), RunConfig::default());
    }

    #[test]
    fn flags_land_in_config() {
        let cfg = parse(&[
            "deconv",
            "--gamma",
            "0.5",
            "--alg",
            "primal-dual",
            "--iters",
            "20",
            "--seed",
            "3",
            "--sigma",
            "0.2",
            "--dict",
            "undecimated-haar",
            "--out",
            "o",
        ]);
        assert_eq!(cfg.gamma, Some(0.5));
        assert_eq!(cfg.alg, Algorithm::PrimalDual);
        assert_eq!(cfg.dict, Dictionary::UndecimatedHaar);
        assert_eq!(
            (cfg.n_iter, cfg.seed, cfg.sigma, cfg.tau),
            (20, 3, Some(0.2), None)
        );
        assert_eq!(cfg.out, PathBuf::from("o"));
    }

    #[test]
    fn saved_config_echoes_and_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let cfg = parse(&[
            "simulate",
            "--phantom",
            "constant:scale=10,size=8",
            "--psf",
            "delta",
        ]);
        cfg.save(&path).unwrap();
        let p = path.to_str().unwrap();
        assert_eq!(parse(&["simulate", "--config", p]), cfg);
        let changed = parse(&["deconv", "--config", p, "--iters", "7"]);
        assert_eq!(changed.n_iter, 7);
        assert_eq!(changed.phantom, cfg.phantom);
        assert_eq!(changed.command, Subcommand::Deconv);
    }

    #[test]
    fn compare_takes_two_traces() {
        let cfg = parse(&["compare", "a.csv", "b.csv", "--out", "cmp"]);
        assert_eq!(
            cfg.traces,
            vec![PathBuf::from("a.csv"), PathBuf::from("b.csv")]
        );
        assert_eq!(cfg.out, PathBuf::from("cmp"));
        assert!(Cli::try_parse_from(["poisprox", "compare", "a.csv"]).is_err());
    }
}
