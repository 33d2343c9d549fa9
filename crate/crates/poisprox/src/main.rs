use std::process::ExitCode;

use clap::Parser;

use poisprox::cli::Cli;
use poisprox::config::{RunConfig, Subcommand};
use poisprox::{pipeline, Result};

fn run(cfg: &RunConfig) -> Result<()> {
    match cfg.command {
        Subcommand::Simulate => {
            let obs = pipeline::cmd_simulate(cfg)?;
            println!(
                "wrote {}: total counts {}, max count {}",
                cfg.out.display(),
                obs.counts.total(),
                obs.counts.max()
            );
        }
        Subcommand::Deconv => {
            let report = pipeline::cmd_deconv(cfg)?;
            print!("{}", pipeline::summary_text(cfg, &report));
            for r in &report.runs {
                println!("{} wall-clock {:.3} s", r.name, r.wall_s);
            }
        }
        Subcommand::Compare => {
            let report = pipeline::cmd_compare(cfg)?;
            for (path, c) in report.traces.iter().zip(&report.crossings) {
                match c {
                    Some(c) => println!(
                        "{}: within 1% of final objective at iteration {} ({:.6} s)",
                        path.display(),
                        c.iter,
                        c.elapsed_s
                    ),
                    None => println!("{}: final objective is not finite", path.display()),
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POISPROX_LOG", "warn")).init();
    let outcome = Cli::parse().into_config().and_then(|cfg| run(&cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
