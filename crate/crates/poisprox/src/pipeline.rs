//! simulate → deconvolve → compare, as run by the command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use poisprox_core::linops::{make_convolution, make_dictionary, LinearOperator};
use poisprox_core::solvers::{
    solve_primal, solve_primal_dual, suggest_steps, PrimalConfig, PrimalDualConfig, Relaxation,
    Solution, SolverTrace,
};
use poisprox_core::{CountMap, ImageGrid, PenaltySpec, ProblemInstance};

use crate::config::{Algorithm, RunConfig, GAMMA_FRACTION};
use crate::error::{Error, Result};
use crate::sim::{make_phantom, sample_poisson, PhantomKind};
use crate::trace::{read_trace, write_trace, WallClock};
use crate::{io, psf};

/// Observed data plus, for simulations, the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub truth: Option<ImageGrid>,
    pub psf: ImageGrid,
    pub counts: CountMap,
}

/// Builds the ground truth, PSF and Poisson counts described by `cfg`.
///
/// Point-source spikes are rescaled so that the blurred image peaks at
/// `cfg.peak` expected counts; the background level is kept.
pub fn simulate(cfg: &RunConfig) -> Result<Observation> {
    let spec = cfg.phantom_spec()?;
    let kernel = psf::parse_psf(&cfg.psf)?;
    let mut truth = make_phantom(&spec)?;
    let h = make_convolution(&kernel, truth.width(), truth.height())?;
    if spec.kind == PhantomKind::PointSources && spec.count > 0 {
        let bg = spec.background;
        if cfg.peak <= bg {
            return Err(Error::Config(format!(
                "peak {} must exceed the background {bg}",
                cfg.peak
            )));
        }
        let spikes: Vec<f64> = truth.pixels().iter().map(|p| p - bg).collect();
        let top = h.apply(&spikes)?.into_iter().fold(0.0, f64::max);
        let s = (cfg.peak - bg) / top;
        truth = ImageGrid::new(
            truth.width(),
            truth.height(),
            spikes.iter().map(|p| bg + s * p).collect(),
        )?;
    }
    let mean = ImageGrid::new(truth.width(), truth.height(), h.apply(truth.pixels())?)?;
    let counts = sample_poisson(&mean, cfg.seed)?;
    Ok(Observation {
        truth: Some(truth),
        psf: kernel,
        counts,
    })
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `truth.txt`, `psf.txt`, `counts.txt` and `config.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Observation> {
    cfg.validate()?;
    let obs = simulate(cfg)?;
    create_out(&cfg.out)?;
    if let Some(t) = &obs.truth {
        io::save_image(t, &cfg.out.join("truth.txt"))?;
    }
    io::save_image(&obs.psf, &cfg.out.join("psf.txt"))?;
    io::save_counts(&obs.counts, &cfg.out.join("counts.txt"))?;
    cfg.save(&cfg.out.join("config.json"))?;
    log::info!(
        "simulated {}x{} counts: total {}, max {}",
        obs.counts.width(),
        obs.counts.height(),
        obs.counts.total(),
        obs.counts.max()
    );
    Ok(obs)
}

/// Reads `counts.txt` and `psf.txt`, and `truth.txt` when present.
pub fn load_observation(dir: &Path) -> Result<Observation> {
    let truth_path = dir.join("truth.txt");
    let truth = if truth_path.exists() {
        Some(io::load_image(&truth_path)?)
    } else {
        None
    };
    let obs = Observation {
        truth,
        psf: io::load_matrix(&dir.join("psf.txt"))?,
        counts: io::load_counts(&dir.join("counts.txt"))?,
    };
    if let Some(t) = &obs.truth {
        if t.shape() != (obs.counts.width(), obs.counts.height()) {
            return Err(Error::Config(format!(
                "truth.txt is {:?} but counts.txt is {:?}",
                t.shape(),
                (obs.counts.width(), obs.counts.height())
            )));
        }
    }
    Ok(obs)
}

/// `γ` from the config, or `0.01·max(y)` (at least 1e-3 for empty data).
pub fn resolve_gamma(cfg: &RunConfig, counts: &CountMap) -> f64 {
    cfg.gamma
        .unwrap_or_else(|| (GAMMA_FRACTION * counts.max() as f64).max(1e-3))
}

pub fn build_instance(cfg: &RunConfig, obs: &Observation) -> Result<ProblemInstance> {
    let (w, h) = (obs.counts.width(), obs.counts.height());
    let blur = make_convolution(&obs.psf, w, h)?;
    let dict = make_dictionary(cfg.dict.frame_kind(), w, h)?;
    Ok(ProblemInstance::new(
        obs.counts.clone(),
        Box::new(blur),
        dict,
        resolve_gamma(cfg, &obs.counts),
        PenaltySpec::L1,
    )?)
}

pub fn primal_config(cfg: &RunConfig) -> PrimalConfig {
    PrimalConfig {
        mu: cfg.mu,
        relaxation: Relaxation::Constant(cfg.theta),
        n_iter: cfg.n_iter,
        early_stop: cfg.early_stop,
        ..Default::default()
    }
}

/// Suggested steps unless overridden; a single override keeps the other
/// step at its suggested value.
pub fn primal_dual_config(cfg: &RunConfig, inst: &ProblemInstance) -> PrimalDualConfig {
    let zeta = inst.norms().zeta;
    let (s, t) = suggest_steps(zeta);
    PrimalDualConfig {
        sigma: cfg.sigma.unwrap_or(s),
        tau: cfg.tau.unwrap_or(t),
        zeta,
        n_iter: cfg.n_iter,
        early_stop: cfg.early_stop,
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub name: &'static str,
    pub solution: Solution,
    pub trace: SolverTrace,
    pub final_mae: Option<f64>,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct DeconvReport {
    pub gamma: f64,
    pub runs: Vec<RunOutcome>,
    /// `|J₁ − J₂| / max(|J₁|, |J₂|)` in `both` mode.
    pub discrepancy: Option<f64>,
}

fn run_primal(
    inst: &ProblemInstance,
    cfg: &PrimalConfig,
    truth: Option<&ImageGrid>,
) -> Result<RunOutcome> {
    let clock = WallClock::start();
    let (solution, trace) = solve_primal(inst, cfg, truth, &clock)?;
    Ok(outcome("primal", solution, trace, truth, &clock))
}

fn run_primal_dual(
    inst: &ProblemInstance,
    cfg: &PrimalDualConfig,
    truth: Option<&ImageGrid>,
) -> Result<RunOutcome> {
    let clock = WallClock::start();
    let (solution, trace) = solve_primal_dual(inst, cfg, truth, &clock)?;
    Ok(outcome("primal-dual", solution, trace, truth, &clock))
}

fn outcome(
    name: &'static str,
    solution: Solution,
    trace: SolverTrace,
    truth: Option<&ImageGrid>,
    clock: &WallClock,
) -> RunOutcome {
    use poisprox_core::solvers::Clock;
    RunOutcome {
        name,
        // The solver already checked the truth's shape and traced the MAE.
        final_mae: truth.and_then(|_| trace.last()?.mae),
        solution,
        trace,
        wall_s: clock.elapsed_s(),
    }
}

/// Solves `obs` with the configured algorithm(s); `both` runs the two
/// solvers on separate threads.
pub fn deconvolve(cfg: &RunConfig, obs: &Observation) -> Result<DeconvReport> {
    let inst = build_instance(cfg, obs)?;
    let truth = obs.truth.as_ref();
    let pcfg = primal_config(cfg);
    let dcfg = primal_dual_config(cfg, &inst);
    // Reject bad steps or relaxation before either solver starts.
    if cfg.alg.runs_primal() {
        pcfg.validate()?;
    }
    if cfg.alg.runs_primal_dual() {
        dcfg.validate(&inst)?;
    }
    let runs = match cfg.alg {
        Algorithm::Primal => vec![run_primal(&inst, &pcfg, truth)?],
        Algorithm::PrimalDual => vec![run_primal_dual(&inst, &dcfg, truth)?],
        Algorithm::Both => {
            let (a, b) = std::thread::scope(|s| {
                let a = s.spawn(|| run_primal(&inst, &pcfg, truth));
                let b = run_primal_dual(&inst, &dcfg, truth);
                (a.join().expect("primal solver thread panicked"), b)
            });
            vec![a?, b?]
        }
    };
    let discrepancy = match &runs[..] {
        [a, b] => match (
            a.solution.final_objective.finite(),
            b.solution.final_objective.finite(),
        ) {
            (Some(j1), Some(j2)) => {
                Some((j1 - j2).abs() / j1.abs().max(j2.abs()).max(f64::MIN_POSITIVE))
            }
            _ => None,
        },
        _ => None,
    };
    Ok(DeconvReport {
        gamma: inst.gamma(),
        runs,
        discrepancy,
    })
}

/// Deterministic run summary; wall-clock times go to `timing.txt` instead.
pub fn summary_text(cfg: &RunConfig, report: &DeconvReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "gamma = {}", report.gamma);
    let _ = writeln!(s, "dictionary = {}", cfg.dict);
    for run in &report.runs {
        let sol = &run.solution;
        let _ = writeln!(s, "[{}]", run.name);
        let _ = writeln!(s, "iterations = {}", sol.iterations);
        let _ = writeln!(s, "final_objective = {}", sol.final_objective.value());
        match run.final_mae {
            Some(m) => {
                let _ = writeln!(s, "mae = {m}");
            }
            None => {
                let _ = writeln!(s, "mae = n/a");
            }
        }
        let _ = writeln!(s, "converged = {} ({})", sol.converged, sol.criterion);
    }
    if let Some(d) = report.discrepancy {
        let _ = writeln!(s, "relative_objective_discrepancy = {d:e}");
    }
    s
}

/// Output file names for one solver: `recon.txt`/`trace.csv` for a single
/// run, suffixed by the algorithm in `both` mode.
pub fn output_names(cfg: &RunConfig, name: &str) -> (String, String) {
    if cfg.alg == Algorithm::Both {
        let tag = name.replace('-', "_");
        (format!("recon_{tag}.txt"), format!("trace_{tag}.csv"))
    } else {
        ("recon.txt".into(), "trace.csv".into())
    }
}

/// Runs the solver(s) and writes reconstructions, traces, `summary.txt`,
/// `timing.txt` and `config.json`.
pub fn cmd_deconv(cfg: &RunConfig) -> Result<DeconvReport> {
    cfg.validate()?;
    let obs = match &cfg.input {
        Some(dir) => load_observation(dir)?,
        None => simulate(cfg)?,
    };
    let report = deconvolve(cfg, &obs)?;
    create_out(&cfg.out)?;
    let mut timing = String::new();
    for run in &report.runs {
        let (recon, trace) = output_names(cfg, run.name);
        io::save_image(&run.solution.x_hat, &cfg.out.join(recon))?;
        write_trace(&run.trace, &cfg.out.join(trace))?;
        let _ = writeln!(timing, "{} = {:.6}", run.name, run.wall_s);
    }
    let summary = cfg.out.join("summary.txt");
    fs::write(&summary, summary_text(cfg, &report)).map_err(|e| Error::io(&summary, e))?;
    let timing_path = cfg.out.join("timing.txt");
    fs::write(&timing_path, timing).map_err(|e| Error::io(&timing_path, e))?;
    cfg.save(&cfg.out.join("config.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crossing {
    pub iter: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub traces: [PathBuf; 2],
    /// First record within 1% of each trace's final objective.
    pub crossings: [Option<Crossing>; 2],
}

fn crossing(trace: &SolverTrace) -> Option<Crossing> {
    trace.first_within(0.01).map(|r| Crossing {
        iter: r.iter,
        elapsed_s: r.elapsed_s,
    })
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Objective of the last record at or before `t` seconds.
fn objective_at_time(trace: &SolverTrace, t: f64) -> Option<f64> {
    let idx = trace.records.partition_point(|r| r.elapsed_s <= t);
    idx.checked_sub(1)
        .map(|i| trace.records[i].objective.value())
}

/// Writes `compare_iter.csv` (aligned on iteration) and `compare_time.csv`
/// (aligned on the union of elapsed times, each trace holding its last
/// value), and reports the 1% crossings.
pub fn compare_traces(
    a: &SolverTrace,
    b: &SolverTrace,
    out: &Path,
) -> Result<[Option<Crossing>; 2]> {
    create_out(out)?;
    let path = out.join("compare_iter.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| trace_err(&path, e))?;
    w.write_record([
        "iter",
        "objective_a",
        "objective_b",
        "elapsed_s_a",
        "elapsed_s_b",
    ])
    .map_err(|e| trace_err(&path, e))?;
    let n = a.len().max(b.len());
    for i in 0..n {
        let (ra, rb) = (a.records.get(i), b.records.get(i));
        let iter = ra.or(rb).map(|r| r.iter).unwrap_or(i);
        w.write_record([
            iter.to_string(),
            cell(ra.map(|r| r.objective.value())),
            cell(rb.map(|r| r.objective.value())),
            cell(ra.map(|r| r.elapsed_s)),
            cell(rb.map(|r| r.elapsed_s)),
        ])
        .map_err(|e| trace_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = out.join("compare_time.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| trace_err(&path, e))?;
    w.write_record(["elapsed_s", "objective_a", "objective_b"])
        .map_err(|e| trace_err(&path, e))?;
    let mut times: Vec<f64> = a
        .records
        .iter()
        .chain(&b.records)
        .map(|r| r.elapsed_s)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    for t in times {
        w.write_record([
            t.to_string(),
            cell(objective_at_time(a, t)),
            cell(objective_at_time(b, t)),
        ])
        .map_err(|e| trace_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok([crossing(a), crossing(b)])
}

fn trace_err(path: &Path, e: csv::Error) -> Error {
    Error::Trace {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareReport> {
    cfg.validate()?;
    let [pa, pb] = [cfg.traces[0].clone(), cfg.traces[1].clone()];
    let (a, b) = (read_trace(&pa)?, read_trace(&pb)?);
    let crossings = compare_traces(&a, &b, &cfg.out)?;
    Ok(CompareReport {
        traces: [pa, pb],
        crossings,
    })
}
