//! Drivers for the four experiment modes.
//!
//! Every file goes into `output_dir` under a fixed name; inputs are read
//! and checked before the directory is created.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_xoshiro::SplitMix64;
use splitkit_core::imaging::{deblur_run_threaded, degrade, synthetic_phantom};
use splitkit_core::modeling::{validate_config, SolverConfig};
use splitkit_core::operators::ScaledIdentity;
use splitkit_core::splitting::{check_averaged_inequality, malitsky_tam_step, run, step};
use splitkit_core::testbed::{random_nonlinear_problem, random_resolvents, random_state, toy_inclusion};
use splitkit_core::{ProblemSpec, SolverState};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Result};
use crate::netpbm::{extension, read_image, write_image};
use crate::trace::{write_trace_csv, TraceRow};

pub const THREADS_ENV: &str = "SPLITKIT_THREADS";

/// Largest per-iteration deviation accepted by the Malitsky–Tam check.
pub const MT_TOLERANCE: f64 = 1e-12;
/// Smallest averagedness slack accepted by the audit.
pub const AUDIT_TOLERANCE: f64 = -1e-10;

/// Worker cap from `SPLITKIT_THREADS`, else the available parallelism.
pub fn thread_limit() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, usize::from)),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

struct Outputs {
    dir: PathBuf,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn text(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
    }
}

/// Runs the configured experiment and returns its one-line summary, which
/// is also written to `summary.txt`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Deblur => deblur(cfg),
        Mode::ToyInclusion => toy(cfg),
        Mode::MtEquivalence => mt_equivalence(cfg),
        Mode::AveragednessAudit => audit(cfg),
    }
}

fn deblur(cfg: &ExperimentConfig) -> Result<String> {
    let params = cfg.deblur_params();
    let threads = thread_limit()?;
    let (observed, truth, synthesized) = match (&cfg.input_image, cfg.phantom) {
        (Some(path), _) => {
            let input = read_image(path)?;
            if cfg.degrade {
                let b = degrade(&input, params.blur_size, params.blur_sigma, params.noise_sigma, params.seed)?;
                (b, Some(input), true)
            } else {
                let truth = cfg.truth_image.as_deref().map(read_image).transpose()?;
                (input, truth, false)
            }
        }
        (None, Some((h, w))) => {
            let truth = synthetic_phantom(h, w)?;
            let b = degrade(&truth, params.blur_size, params.blur_sigma, params.noise_sigma, params.seed)?;
            (b, Some(truth), true)
        }
        (None, None) => unreachable!("validated"),
    };
    let out = deblur_run_threaded(&observed, &params, truth.as_ref(), threads)?;

    let outputs = Outputs::create(&cfg.output_dir)?;
    let ext = extension(&observed);
    write_image(&out.restored, &outputs.path(&format!("restored.{ext}")), cfg.output_maxval)?;
    if synthesized {
        write_image(&observed, &outputs.path(&format!("observed.{ext}")), cfg.output_maxval)?;
    }
    let rows: Vec<TraceRow> = out.trace.iter().map(TraceRow::from).collect();
    write_trace_csv(&rows, &outputs.path("trace.csv"))?;
    let last = out.trace.last().expect("at least one iteration");
    let mut summary = format!(
        "mode=deblur size={}x{}x{} mu={} gamma={} iterations={} objective={} residual_gamma={}",
        observed.height(),
        observed.width(),
        observed.channels(),
        params.mu,
        params.gamma,
        last.iteration,
        last.objective,
        last.residual_gamma
    );
    if let Some(isnr) = last.isnr {
        summary.push_str(&format!(" isnr={isnr}"));
    }
    outputs.text("summary.txt", &format!("{summary}\n"))?;
    Ok(summary)
}

fn toy(cfg: &ExperimentConfig) -> Result<String> {
    let spec = toy_inclusion()?;
    let config = validate_config(&spec, &cfg.solver_config())?;
    let report = run(&spec, &config, SolverState::zeros(&spec))?;
    let outputs = Outputs::create(&cfg.output_dir)?;
    let rows: Vec<TraceRow> = report.trace.iter().map(TraceRow::from).collect();
    write_trace_csv(&rows, &outputs.path("trace.csv"))?;
    let summary = format!(
        "mode=toy-inclusion x_bar={} u_bar={} iterations={} residual_gamma={} converged={}",
        fmt_vec(&report.solution.x_bar),
        report.solution.u_bar.iter().map(|u| fmt_vec(u)).collect::<Vec<_>>().join(";"),
        report.trace.len(),
        report.trace.last().map_or(0.0, |r| r.residual_gamma),
        report.converged
    );
    outputs.text("summary.txt", &format!("{summary}\n"))?;
    Ok(summary)
}

/// Largest deviation between the engine with `L = Id`, `γ = 1` and the
/// reference Malitsky–Tam iteration over `iterations` steps from a random
/// start, plus the engine's residual trace.
pub fn mt_deviation(count: usize, dim: usize, lambda: f64, iterations: usize, seed: u64) -> Result<(f64, Vec<TraceRow>)> {
    let ops = random_resolvents(count, dim, seed)?;
    let spec = ProblemSpec::new(
        dim,
        ops[..count - 1].to_vec(),
        vec![ops[count - 1].clone()],
        vec![std::sync::Arc::new(ScaledIdentity::identity(dim)?)],
    )?;
    let config = validate_config(
        &spec,
        &SolverConfig {
            lambda,
            gamma: 1.0,
            max_iterations: iterations,
            residual_tolerance: 0.0,
        },
    )?;
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut state = random_state(&spec, &mut rng, 2.0);
    let mut w: Vec<Vec<f64>> = state.z.iter().chain(&state.v).cloned().collect();
    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (next, diag) = step(&state, &spec, &config)?;
        w = malitsky_tam_step(&w, &ops, lambda)?;
        for (a, b) in next.z.iter().chain(&next.v).zip(&w) {
            let d = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst = worst.max(d);
        }
        rows.push(TraceRow {
            iteration: next.iteration,
            residual_gamma: diag.residual_gamma,
            residual_primal: diag.residual_primal,
            residual_dual: diag.residual_dual,
            objective: None,
            isnr: None,
        });
        state = next;
    }
    Ok((worst, rows))
}

fn mt_equivalence(cfg: &ExperimentConfig) -> Result<String> {
    let lambda = cfg.lambda.unwrap_or(0.5);
    let iterations = cfg.max_iterations.unwrap_or(50);
    let mut worst: f64 = 0.0;
    let mut first_trace = None;
    let mut runs = 0;
    for count in [3usize, 4, 6] {
        for trial in 0..5u64 {
            let seed = cfg.seed.wrapping_mul(1000).wrapping_add(10 * count as u64 + trial);
            let (dev, rows) = mt_deviation(count, 3, lambda, iterations, seed)?;
            worst = worst.max(dev);
            first_trace.get_or_insert(rows);
            runs += 1;
        }
    }
    let outputs = Outputs::create(&cfg.output_dir)?;
    write_trace_csv(&first_trace.unwrap_or_default(), &outputs.path("trace.csv"))?;
    let pass = worst <= MT_TOLERANCE;
    let summary = format!(
        "mode=mt-equivalence runs={runs} iterations={iterations} max_deviation={worst} pass={pass}"
    );
    outputs.text("summary.txt", &format!("{summary}\n"))?;
    if pass {
        Ok(summary)
    } else {
        Err(CliError::Numerical(format!(
            "iterates deviate by {worst} > {MT_TOLERANCE}"
        )))
    }
}

fn audit(cfg: &ExperimentConfig) -> Result<String> {
    let mut csv = String::from("n,m,lambda,gamma,pairs,min_slack\n");
    let mut overall = f64::INFINITY;
    let mut violations = 0usize;
    let mut instances = 0usize;
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    for n in 1..=4 {
        for m in 0..=2 {
            let spec = random_nonlinear_problem(n, m, 3, cfg.seed ^ (16 * n + m) as u64)?;
            let bound = 1.0 / spec.stacked_norm_bound_sq();
            for lambda in [0.25, 0.5, 0.99] {
                for shrink in [1.0, 0.5] {
                    let gamma = if m == 0 { 1.0 } else { shrink * bound };
                    let config = validate_config(
                        &spec,
                        &SolverConfig {
                            lambda,
                            gamma,
                            max_iterations: 1,
                            residual_tolerance: 0.0,
                        },
                    )?;
                    let mut min_slack = f64::INFINITY;
                    for _ in 0..cfg.pairs {
                        let a = random_state(&spec, &mut rng, 3.0);
                        let b = random_state(&spec, &mut rng, 3.0);
                        let slack = check_averaged_inequality(&spec, &config, &a, &b)?;
                        min_slack = min_slack.min(slack);
                        if slack < AUDIT_TOLERANCE {
                            violations += 1;
                        }
                    }
                    overall = overall.min(min_slack);
                    instances += 1;
                    csv.push_str(&format!(
                        "{n},{m},{lambda},{gamma},{},{min_slack}\n",
                        cfg.pairs
                    ));
                }
            }
        }
    }
    let outputs = Outputs::create(&cfg.output_dir)?;
    outputs.text("audit.csv", &csv)?;
    let summary = format!(
        "mode=averagedness-audit instances={instances} pairs={} min_slack={overall} violations={violations}",
        cfg.pairs
    );
    outputs.text("summary.txt", &format!("{summary}\n"))?;
    if violations == 0 {
        Ok(summary)
    } else {
        Err(CliError::Numerical(format!(
            "{violations} pairs violate the averagedness inequality"
        )))
    }
}
