//! Experiment configuration: a flat `key = value` file plus `--key value`
//! overrides.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use splitkit_core::imaging::DeblurParams;
use splitkit_core::SolverConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Deblur,
    ToyInclusion,
    MtEquivalence,
    AveragednessAudit,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Deblur,
        Mode::ToyInclusion,
        Mode::MtEquivalence,
        Mode::AveragednessAudit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Deblur => "deblur",
            Mode::ToyInclusion => "toy-inclusion",
            Mode::MtEquivalence => "mt-equivalence",
            Mode::AveragednessAudit => "averagedness-audit",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                CliError::Config(format!(
                    "unknown mode '{s}' (expected one of deblur, toy-inclusion, mt-equivalence, averagedness-audit)"
                ))
            })
    }
}

/// Recognized keys with their help text.
pub const KEYS: &[(&str, &str)] = &[
    ("mode", "experiment to run"),
    ("input_image", "observed (or clean, with degrade) PGM/PPM image"),
    ("truth_image", "ground truth for ISNR"),
    ("output_dir", "directory receiving every output file"),
    ("phantom", "synthesize a HxW test scene instead of reading an image"),
    ("degrade", "blur and add noise to the input before restoring it"),
    ("alpha1", "wavelet weight"),
    ("alpha2", "total variation weight"),
    ("mu", "intensity rescaling"),
    ("lambda", "relaxation parameter in (0, 1)"),
    ("gamma", "dual step; defaults to its upper bound"),
    ("iterations", "deblurring iterations"),
    ("max_iterations", "iteration budget of residual-driven runs"),
    ("residual_tolerance", "stop once the weighted residual reaches this"),
    ("blur_size", "odd side of the Gaussian kernel"),
    ("blur_sigma", "standard deviation of the Gaussian kernel"),
    ("noise_sigma", "standard deviation of synthetic noise"),
    ("seed", "seed for noise and random instances"),
    ("pairs", "random state pairs per audited instance"),
    ("output_maxval", "255 or 65535 for written images"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub input_image: Option<PathBuf>,
    pub truth_image: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub phantom: Option<(usize, usize)>,
    pub degrade: bool,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mu: f64,
    pub lambda: Option<f64>,
    pub gamma: Option<f64>,
    pub iterations: usize,
    pub max_iterations: Option<usize>,
    pub residual_tolerance: Option<f64>,
    pub blur_size: usize,
    pub blur_sigma: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub pairs: usize,
    pub output_maxval: u16,
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Config(format!(
            "invalid value '{value}' for {key} (expected true or false)"
        ))),
    }
}

fn parse_shape(key: &str, value: &str) -> Result<(usize, usize)> {
    value
        .split_once(['x', 'X'])
        .and_then(|(h, w)| Some((h.trim().parse().ok()?, w.trim().parse().ok()?)))
        .filter(|&(h, w)| h > 0 && w > 0)
        .ok_or_else(|| CliError::Config(format!("invalid value '{value}' for {key} (expected HxW)")))
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        let d = DeblurParams::default();
        ExperimentConfig {
            mode,
            input_image: None,
            truth_image: None,
            output_dir: PathBuf::from("splitkit-out"),
            phantom: None,
            degrade: false,
            alpha1: d.alpha1,
            alpha2: d.alpha2,
            mu: d.mu,
            lambda: None,
            gamma: None,
            iterations: d.iterations,
            max_iterations: None,
            residual_tolerance: None,
            blur_size: d.blur_size,
            blur_sigma: d.blur_sigma,
            noise_sigma: d.noise_sigma,
            seed: d.seed,
            pairs: 1000,
            output_maxval: 255,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "mode" => self.mode = value.parse()?,
            "input_image" => self.input_image = Some(PathBuf::from(value)),
            "truth_image" => self.truth_image = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "phantom" => self.phantom = Some(parse_shape(key, value)?),
            "degrade" => self.degrade = parse_bool(key, value)?,
            "alpha1" => self.alpha1 = parse(key, value)?,
            "alpha2" => self.alpha2 = parse(key, value)?,
            "mu" => self.mu = parse(key, value)?,
            "lambda" => self.lambda = Some(parse(key, value)?),
            "gamma" => self.gamma = Some(parse(key, value)?),
            "iterations" => self.iterations = parse(key, value)?,
            "max_iterations" => self.max_iterations = Some(parse(key, value)?),
            "residual_tolerance" => self.residual_tolerance = Some(parse(key, value)?),
            "blur_size" => self.blur_size = parse(key, value)?,
            "blur_sigma" => self.blur_sigma = parse(key, value)?,
            "noise_sigma" => self.noise_sigma = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "pairs" => self.pairs = parse(key, value)?,
            "output_maxval" => self.output_maxval = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies every line of a config file. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (number, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", number + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Config(format!("line {}: {e}", number + 1)))?;
        }
        Ok(())
    }

    /// Benchmark parameters; `gamma` defaults to `1/(1 + 8μ²)`.
    pub fn deblur_params(&self) -> DeblurParams {
        let mut p = DeblurParams {
            alpha1: self.alpha1,
            alpha2: self.alpha2,
            mu: self.mu,
            lambda: self.lambda.unwrap_or(0.99),
            gamma: 0.0,
            iterations: self.iterations,
            blur_size: self.blur_size,
            blur_sigma: self.blur_sigma,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
        };
        p.gamma = self.gamma.unwrap_or_else(|| p.gamma_bound());
        p
    }

    /// Solver parameters for the residual-driven modes.
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda: self.lambda.unwrap_or(0.9),
            gamma: self.gamma.unwrap_or(1.0),
            max_iterations: self.max_iterations.unwrap_or(2000),
            residual_tolerance: self.residual_tolerance.unwrap_or(1e-12),
        }
    }

    /// Checks that do not need the problem instance.
    pub fn validate(&self) -> Result<()> {
        if self.output_maxval != 255 && self.output_maxval != 65535 {
            return Err(CliError::Config(format!(
                "output_maxval must be 255 or 65535, got {}",
                self.output_maxval
            )));
        }
        match self.mode {
            Mode::Deblur => {
                self.deblur_params().validate()?;
                if self.input_image.is_none() && self.phantom.is_none() {
                    return Err(CliError::Config(
                        "deblur needs input_image or phantom".into(),
                    ));
                }
                if self.input_image.is_some() && self.phantom.is_some() {
                    return Err(CliError::Config(
                        "input_image and phantom are mutually exclusive".into(),
                    ));
                }
            }
            Mode::AveragednessAudit if self.pairs == 0 => {
                return Err(CliError::Config("pairs must be positive".into()));
            }
            _ => {}
        }
        Ok(())
    }
}
