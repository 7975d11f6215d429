//! Reproducible experiment campaigns.
//!
//! Three bound-validation scenarios (uniform opinions with state-dependent
//! gains, uniform opinions with uniformly random gains, beta-distributed
//! opinions) plus the small- and large-scale control studies. Every trial
//! draws its own RNG stream from `(master_seed, trial_index)`, so a rerun
//! with the same seed produces byte-identical trial files regardless of
//! thread scheduling.

use crate::control::{
    allocate_baseline_with_nu, allocate_bruteforce, allocate_corollary1_with_nu, ControlProblem,
    Cor1Options, Target,
};
use crate::dynamics::{simulate, GammaModel, GammaSpec, Monitors, SimOptions};
use crate::netgraph::{directify_with, generate_ba_with};
use crate::rng::stream_rng;
use crate::spectral::left_null_eigenvector;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("csv parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("aggregate `{key}` mismatch: summary has {summary}, rows give {recomputed}")]
    AggregateMismatch {
        key: String,
        summary: f64,
        recomputed: f64,
    },
    #[error("missing file: {0}")]
    MissingFile(String),
}

/// Initial-opinion sampler.
#[derive(Debug, Clone, PartialEq)]
pub enum X0Sampler {
    Uniform { lo: f64, hi: f64 },
    /// Beta(a, b) mapped affinely onto `[lo, hi]`.
    Beta { a: f64, b: f64, lo: f64, hi: f64 },
}

impl X0Sampler {
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            X0Sampler::Uniform { lo, hi } => sample_x0_uniform(n, lo, hi, rng).expect("validated"),
            X0Sampler::Beta { a, b, lo, hi } => {
                sample_x0_beta(n, a, b, lo, hi, rng).expect("validated")
            }
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let (lo, hi) = match *self {
            X0Sampler::Uniform { lo, hi } => (lo, hi),
            X0Sampler::Beta { a, b, lo, hi } => {
                if !(a > 0.0 && b > 0.0) {
                    return Err(HarnessError::Invalid(format!(
                        "beta parameters must be positive (got {a}, {b})"
                    )));
                }
                (lo, hi)
            }
        };
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(HarnessError::Invalid(format!(
                "opinion range must satisfy 0 <= lo < hi <= 1 (got {lo}, {hi})"
            )));
        }
        Ok(())
    }
}

/// I.i.d. uniform opinions on `[lo, hi)`.
pub fn sample_x0_uniform<R: Rng>(
    n: usize,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<Vec<f64>, HarnessError> {
    if lo >= hi {
        return Err(HarnessError::Invalid(format!(
            "uniform sampler needs lo < hi (got {lo}, {hi})"
        )));
    }
    Ok((0..n).map(|_| rng.gen_range(lo..hi)).collect())
}

/// Beta(a, b) opinions mapped onto `[lo, hi]`.
pub fn sample_x0_beta<R: Rng>(
    n: usize,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<Vec<f64>, HarnessError> {
    if a <= 0.0 || b <= 0.0 {
        return Err(HarnessError::Invalid(format!(
            "beta parameters must be positive (got {a}, {b})"
        )));
    }
    if lo >= hi {
        return Err(HarnessError::Invalid(format!(
            "beta sampler needs lo < hi (got {lo}, {hi})"
        )));
    }
    let dist = Beta::new(a, b)
        .map_err(|e| HarnessError::Invalid(format!("beta distribution: {e}")))?;
    Ok((0..n)
        .map(|_| lo + (hi - lo) * dist.sample(rng))
        .collect())
}

/// Which gain model a scenario simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaKind {
    Stubborn,
    Uniform,
}

impl GammaKind {
    fn to_model(self) -> GammaModel {
        match self {
            GammaKind::Stubborn => GammaModel::Stubbornness,
            GammaKind::Uniform => GammaModel::UniformRandom,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GammaKind::Stubborn => "stubborn",
            GammaKind::Uniform => "uniform",
        }
    }
}

/// Configuration of one bound-validation campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Scenario label (1, 2, 3 for the standard presets).
    pub scenario: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    /// Attachment parameter of the scale-free generator.
    pub m: usize,
    pub removal_fraction: f64,
    pub x0: X0Sampler,
    pub gamma: GammaKind,
    pub omega_low: f64,
    pub omega_high: f64,
    pub tol: f64,
    pub max_steps: usize,
}

impl ScenarioConfig {
    /// Uniform opinions, stubbornness gains. With opinions on
    /// `[0.1, 0.9]` the stubbornness map stays inside `ω ∈ [0.09, 0.25]`,
    /// which is the gain box the bounds are computed against.
    pub fn scenario1(trials: usize, master_seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            scenario: 1,
            trials,
            master_seed,
            n_min: 10,
            n_max: 100,
            m: 2,
            removal_fraction: 0.2,
            x0: X0Sampler::Uniform { lo: 0.1, hi: 0.9 },
            gamma: GammaKind::Stubborn,
            omega_low: 0.09,
            omega_high: 0.25,
            tol: 1e-9,
            max_steps: 1_000_000,
        }
    }

    /// Uniform opinions, uniformly random gains on the same box.
    pub fn scenario2(trials: usize, master_seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            scenario: 2,
            gamma: GammaKind::Uniform,
            ..ScenarioConfig::scenario1(trials, master_seed)
        }
    }

    /// Beta(2, 5) opinions biased toward 0, stubbornness gains.
    pub fn scenario3(trials: usize, master_seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            scenario: 3,
            x0: X0Sampler::Beta {
                a: 2.0,
                b: 5.0,
                lo: 0.1,
                hi: 0.9,
            },
            ..ScenarioConfig::scenario1(trials, master_seed)
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be >= 1".into()));
        }
        if self.n_min < self.m + 1 || self.n_min > self.n_max {
            return Err(HarnessError::Invalid(format!(
                "need m+1 <= n_min <= n_max (got m={}, n_min={}, n_max={})",
                self.m, self.n_min, self.n_max
            )));
        }
        if !(0.0..1.0).contains(&self.removal_fraction) {
            return Err(HarnessError::Invalid(format!(
                "removal_fraction {} outside [0, 1)",
                self.removal_fraction
            )));
        }
        if !(self.omega_low > 0.0 && self.omega_low <= self.omega_high && self.omega_high <= 1.0) {
            return Err(HarnessError::Invalid(format!(
                "omega bounds must satisfy 0 < low <= high <= 1 (got {}, {})",
                self.omega_low, self.omega_high
            )));
        }
        self.x0.validate()
    }

    /// Flat `key = value` serialization, the same format [`parse`] reads.
    ///
    /// [`parse`]: ScenarioConfig::parse
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "trials = {}", self.trials);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "n_min = {}", self.n_min);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "removal_fraction = {}", self.removal_fraction);
        match &self.x0 {
            X0Sampler::Uniform { lo, hi } => {
                let _ = writeln!(s, "x0 = uniform");
                let _ = writeln!(s, "x0_lo = {lo}");
                let _ = writeln!(s, "x0_hi = {hi}");
            }
            X0Sampler::Beta { a, b, lo, hi } => {
                let _ = writeln!(s, "x0 = beta");
                let _ = writeln!(s, "beta_a = {a}");
                let _ = writeln!(s, "beta_b = {b}");
                let _ = writeln!(s, "x0_lo = {lo}");
                let _ = writeln!(s, "x0_hi = {hi}");
            }
        }
        let _ = writeln!(s, "gamma = {}", self.gamma.name());
        let _ = writeln!(s, "omega_low = {}", self.omega_low);
        let _ = writeln!(s, "omega_high = {}", self.omega_high);
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "max_steps = {}", self.max_steps);
        s
    }

    /// Parse the flat `key = value` config format. Unknown keys are
    /// rejected; omitted keys keep the scenario-1 defaults.
    pub fn parse(text: &str) -> Result<ScenarioConfig, HarnessError> {
        let mut cfg = ScenarioConfig::scenario1(1000, 0);
        let mut beta = (2.0, 5.0);
        let mut x0_range = (0.1, 0.9);
        let mut x0_kind = "uniform".to_string();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(HarnessError::Parse {
                line: lineno + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |msg: String| HarnessError::Parse {
                line: lineno + 1,
                msg,
            };
            macro_rules! num {
                ($ty:ty) => {
                    value
                        .parse::<$ty>()
                        .map_err(|_| bad(format!("invalid value `{value}` for `{key}`")))?
                };
            }
            match key {
                "scenario" => cfg.scenario = num!(u32),
                "trials" => cfg.trials = num!(usize),
                "seed" => cfg.master_seed = num!(u64),
                "n_min" => cfg.n_min = num!(usize),
                "n_max" => cfg.n_max = num!(usize),
                "m" => cfg.m = num!(usize),
                "removal_fraction" => cfg.removal_fraction = num!(f64),
                "x0" => x0_kind = value.to_string(),
                "x0_lo" => x0_range.0 = num!(f64),
                "x0_hi" => x0_range.1 = num!(f64),
                "beta_a" => beta.0 = num!(f64),
                "beta_b" => beta.1 = num!(f64),
                "gamma" => {
                    cfg.gamma = match value {
                        "stubborn" => GammaKind::Stubborn,
                        "uniform" => GammaKind::Uniform,
                        _ => return Err(bad(format!("unknown gamma model `{value}`"))),
                    }
                }
                "omega_low" => cfg.omega_low = num!(f64),
                "omega_high" => cfg.omega_high = num!(f64),
                "tol" => cfg.tol = num!(f64),
                "max_steps" => cfg.max_steps = num!(usize),
                _ => return Err(bad(format!("unknown key `{key}`"))),
            }
        }
        cfg.x0 = match x0_kind.as_str() {
            "uniform" => X0Sampler::Uniform {
                lo: x0_range.0,
                hi: x0_range.1,
            },
            "beta" => X0Sampler::Beta {
                a: beta.0,
                b: beta.1,
                lo: x0_range.0,
                hi: x0_range.1,
            },
            other => {
                return Err(HarnessError::Invalid(format!(
                    "unknown x0 sampler `{other}`"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One row of campaign output. Implementations define the CSV schema and
/// the aggregate statistics recomputable from the rows.
pub trait CampaignRow: Sized + Send {
    fn header() -> &'static str;
    fn to_csv(&self) -> String;
    fn from_csv(line: &str) -> Result<Self, String>;
    fn aggregates(rows: &[Self]) -> Vec<(&'static str, f64)>;
}

/// Rows plus per-trial failures of a finished campaign.
#[derive(Debug, Clone)]
pub struct Campaign<R> {
    pub rows: Vec<R>,
    pub failures: Vec<(usize, String)>,
    /// The `key = value` description of the configuration that ran.
    pub config: String,
}

impl<R: CampaignRow> Campaign<R> {
    pub fn aggregates(&self) -> Vec<(&'static str, f64)> {
        R::aggregates(&self.rows)
    }

    pub fn trials_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(R::header());
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        let _ = writeln!(s, "failures,{}", self.failures.len());
        for (k, v) in self.aggregates() {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }

    /// Write `trials.csv`, `summary.csv`, `config.txt` (and
    /// `failures.txt` when any trial failed) into `dir`.
    pub fn write_dir<P: AsRef<Path>>(&self, dir: P) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv())?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("config.txt"), &self.config)?;
        if !self.failures.is_empty() {
            let mut s = String::new();
            for (t, msg) in &self.failures {
                let _ = writeln!(s, "{t}: {msg}");
            }
            std::fs::write(dir.join("failures.txt"), s)?;
        }
        Ok(())
    }

    /// Reload a campaign directory, recomputing every aggregate from the
    /// rows and verifying it against `summary.csv`.
    pub fn load_dir<P: AsRef<Path>>(dir: P) -> Result<Campaign<R>, HarnessError> {
        let dir = dir.as_ref();
        let trials = std::fs::read_to_string(dir.join("trials.csv"))
            .map_err(|_| HarnessError::MissingFile("trials.csv".into()))?;
        let summary = std::fs::read_to_string(dir.join("summary.csv"))
            .map_err(|_| HarnessError::MissingFile("summary.csv".into()))?;
        let config = std::fs::read_to_string(dir.join("config.txt")).unwrap_or_default();

        let mut lines = trials.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == R::header() => {}
            Some((_, h)) => {
                return Err(HarnessError::Csv {
                    line: 1,
                    msg: format!("unexpected header `{h}`"),
                })
            }
            None => {
                return Err(HarnessError::Csv {
                    line: 1,
                    msg: "empty trials.csv".into(),
                })
            }
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            rows.push(R::from_csv(line).map_err(|msg| HarnessError::Csv {
                line: lineno + 1,
                msg,
            })?);
        }
        let campaign = Campaign {
            rows,
            failures: Vec::new(),
            config,
        };
        let recomputed = campaign.aggregates();
        for (lineno, line) in summary.lines().enumerate().skip(1) {
            let Some((key, value)) = line.split_once(',') else {
                continue;
            };
            if key == "failures" {
                continue;
            }
            let summary_v: f64 = value.parse().map_err(|_| HarnessError::Csv {
                line: lineno + 1,
                msg: format!("bad summary value `{value}`"),
            })?;
            if let Some(&(_, actual)) = recomputed.iter().find(|(k, _)| *k == key) {
                let diff = (summary_v - actual).abs();
                if diff > 1e-12 * summary_v.abs().max(1.0) {
                    return Err(HarnessError::AggregateMismatch {
                        key: key.to_string(),
                        summary: summary_v,
                        recomputed: actual,
                    });
                }
            }
        }
        Ok(campaign)
    }
}

fn mean<I: Iterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in it {
        sum += v;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn rate<R, F: Fn(&R) -> bool>(rows: &[R], f: F) -> f64 {
    if rows.is_empty() {
        return f64::NAN;
    }
    rows.iter().filter(|r| f(r)).count() as f64 / rows.len() as f64
}

/// Per-trial record of a bound-validation scenario.
#[derive(Debug, Clone)]
pub struct BoundsTrialRow {
    pub trial: usize,
    pub n: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha: f64,
    pub gap: f64,
    pub cons_low: f64,
    pub cons_high: f64,
    pub cons_gap: f64,
    pub steps: usize,
    pub converged: bool,
    /// Sign conditions held at every simulated step (slack 1e−12).
    pub under_ok_run: bool,
    pub over_ok_run: bool,
    /// Transient per-step satisfaction counters (spread > 1e−2).
    pub transient_steps: usize,
    pub transient_under_ok: usize,
    pub transient_over_ok: usize,
    pub transient_both_ok: usize,
    /// α ∈ [α_min − 1e−9, α_max + 1e−9].
    pub contained: bool,
    /// θ traces monotone (within 1e−10) over the whole run.
    pub theta_monotone: bool,
}

impl BoundsTrialRow {
    pub fn both_ok_run(&self) -> bool {
        self.under_ok_run && self.over_ok_run
    }
}

impl CampaignRow for BoundsTrialRow {
    fn header() -> &'static str {
        "trial,n,alpha_min,alpha_max,alpha,gap,cons_low,cons_high,cons_gap,steps,converged,under_ok_run,over_ok_run,transient_steps,transient_under_ok,transient_over_ok,transient_both_ok,contained,theta_monotone"
    }

    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.n,
            self.alpha_min,
            self.alpha_max,
            self.alpha,
            self.gap,
            self.cons_low,
            self.cons_high,
            self.cons_gap,
            self.steps,
            self.converged as u8,
            self.under_ok_run as u8,
            self.over_ok_run as u8,
            self.transient_steps,
            self.transient_under_ok,
            self.transient_over_ok,
            self.transient_both_ok,
            self.contained as u8,
            self.theta_monotone as u8,
        )
    }

    fn from_csv(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 19 {
            return Err(format!("expected 19 fields, got {}", f.len()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
        let int = |s: &str| s.parse::<usize>().map_err(|_| format!("bad integer `{s}`"));
        let b = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(format!("bad flag `{s}`")),
        };
        Ok(BoundsTrialRow {
            trial: int(f[0])?,
            n: int(f[1])?,
            alpha_min: num(f[2])?,
            alpha_max: num(f[3])?,
            alpha: num(f[4])?,
            gap: num(f[5])?,
            cons_low: num(f[6])?,
            cons_high: num(f[7])?,
            cons_gap: num(f[8])?,
            steps: int(f[9])?,
            converged: b(f[10])?,
            under_ok_run: b(f[11])?,
            over_ok_run: b(f[12])?,
            transient_steps: int(f[13])?,
            transient_under_ok: int(f[14])?,
            transient_over_ok: int(f[15])?,
            transient_both_ok: int(f[16])?,
            contained: b(f[17])?,
            theta_monotone: b(f[18])?,
        })
    }

    fn aggregates(rows: &[Self]) -> Vec<(&'static str, f64)> {
        let t_steps: usize = rows.iter().map(|r| r.transient_steps).sum();
        let t_under: usize = rows.iter().map(|r| r.transient_under_ok).sum();
        let t_over: usize = rows.iter().map(|r| r.transient_over_ok).sum();
        let t_both: usize = rows.iter().map(|r| r.transient_both_ok).sum();
        let strict: Vec<&Self> = rows.iter().filter(|r| r.both_ok_run()).collect();
        vec![
            ("trials_ok", rows.len() as f64),
            ("mean_gap", mean(rows.iter().map(|r| r.gap))),
            ("mean_cons_gap", mean(rows.iter().map(|r| r.cons_gap))),
            ("mean_alpha", mean(rows.iter().map(|r| r.alpha))),
            ("mean_steps", mean(rows.iter().map(|r| r.steps as f64))),
            ("rate_lower_transient", t_under as f64 / t_steps.max(1) as f64),
            ("rate_upper_transient", t_over as f64 / t_steps.max(1) as f64),
            ("rate_both_transient", t_both as f64 / t_steps.max(1) as f64),
            ("rate_both_strict_runs", rate(rows, |r| r.both_ok_run())),
            ("containment_all", rate(rows, |r| r.contained)),
            (
                "containment_strict_runs",
                if strict.is_empty() {
                    f64::NAN
                } else {
                    strict.iter().filter(|r| r.contained).count() as f64 / strict.len() as f64
                },
            ),
            (
                "theta_monotone_strict_runs",
                if strict.is_empty() {
                    f64::NAN
                } else {
                    strict.iter().filter(|r| r.theta_monotone).count() as f64
                        / strict.len() as f64
                },
            ),
            ("convergence_rate", rate(rows, |r| r.converged)),
        ]
    }
}

/// Check θ_under nondecreasing / θ_over nonincreasing within `slack`.
fn theta_monotone(theta_under: &[f64], theta_over: &[f64], slack: f64) -> bool {
    theta_under.windows(2).all(|w| w[1] >= w[0] - slack)
        && theta_over.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Run one bound-validation campaign. Per-trial failures are recorded and
/// skipped; they never abort the run.
pub fn run_bounds_scenario(cfg: &ScenarioConfig) -> Result<Campaign<BoundsTrialRow>, HarnessError> {
    cfg.validate()?;
    let results: Vec<Result<BoundsTrialRow, String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_bounds_trial(cfg, trial).map_err(|e| e.to_string()))
        .collect();

    let mut rows = Vec::with_capacity(cfg.trials);
    let mut failures = Vec::new();
    for (trial, res) in results.into_iter().enumerate() {
        match res {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((trial, msg)),
        }
    }
    Ok(Campaign {
        rows,
        failures,
        config: cfg.to_kv(),
    })
}

fn run_bounds_trial(cfg: &ScenarioConfig, trial: usize) -> Result<BoundsTrialRow, Box<dyn std::error::Error + Send + Sync>> {
    let mut rng = stream_rng(cfg.master_seed, 1 + trial as u64);
    let n = rng.gen_range(cfg.n_min..=cfg.n_max);
    let edges = generate_ba_with(n, cfg.m, &mut rng)?;
    let net = directify_with(&edges, cfg.removal_fraction, &mut rng)?.network;
    let x0 = cfg.x0.sample(n, &mut rng);
    let spec = GammaSpec::new(cfg.omega_low, cfg.omega_high, cfg.gamma.to_model())?;

    let bounds = crate::bounds::solve_bounds(&net, &x0, &spec)?;
    let opts = SimOptions {
        tol: cfg.tol,
        max_steps: cfg.max_steps,
        record_states: false,
        ..SimOptions::default()
    };
    let rec = simulate(
        &net,
        &x0,
        &spec,
        Monitors {
            nu_under: Some(&bounds.nu_under),
            nu_over: Some(&bounds.nu_over),
        },
        &opts,
        &mut rng,
    )?;

    let contained =
        rec.alpha >= bounds.alpha_min - 1e-9 && rec.alpha <= bounds.alpha_max + 1e-9;
    Ok(BoundsTrialRow {
        trial,
        n,
        alpha_min: bounds.alpha_min,
        alpha_max: bounds.alpha_max,
        alpha: rec.alpha,
        gap: bounds.alpha_max - bounds.alpha_min,
        cons_low: bounds.conservative_low,
        cons_high: bounds.conservative_high,
        cons_gap: bounds.conservative_high - bounds.conservative_low,
        steps: rec.steps,
        converged: rec.converged,
        under_ok_run: rec.flags_under.iter().all(|&b| b),
        over_ok_run: rec.flags_over.iter().all(|&b| b),
        transient_steps: rec.transient_steps,
        transient_under_ok: rec.transient_under_ok,
        transient_over_ok: rec.transient_over_ok,
        transient_both_ok: rec.transient_both_ok,
        contained,
        theta_monotone: theta_monotone(&rec.theta_under, &rec.theta_over, 1e-10),
    })
}

/// Configuration of the small-scale control study (fixed graph, many
/// sampled initial conditions, all three strategies).
#[derive(Debug, Clone)]
pub struct ControlSmallConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub n: usize,
    pub m: usize,
    pub removal_fraction: f64,
    pub u_max: f64,
    pub n_b: usize,
    pub omega_low: f64,
    pub omega_high: f64,
    pub x0_lo: f64,
    pub x0_hi: f64,
}

impl ControlSmallConfig {
    pub fn paper(trials: usize, master_seed: u64) -> ControlSmallConfig {
        ControlSmallConfig {
            trials,
            master_seed,
            n: 12,
            m: 2,
            removal_fraction: 0.2,
            u_max: 0.2,
            n_b: 3,
            omega_low: 0.03,
            omega_high: 0.25,
            x0_lo: 0.1,
            x0_hi: 0.9,
        }
    }

    fn to_kv(&self) -> String {
        format!(
            "experiment = control-small\ntrials = {}\nseed = {}\nn = {}\nm = {}\nremoval_fraction = {}\nu_max = {}\nn_b = {}\nomega_low = {}\nomega_high = {}\nx0_lo = {}\nx0_hi = {}\n",
            self.trials,
            self.master_seed,
            self.n,
            self.m,
            self.removal_fraction,
            self.u_max,
            self.n_b,
            self.omega_low,
            self.omega_high,
            self.x0_lo,
            self.x0_hi
        )
    }
}

#[derive(Debug, Clone)]
pub struct ControlSmallRow {
    pub trial: usize,
    pub amin_brute: f64,
    pub amin_cor1: f64,
    pub amin_base: f64,
    pub ratio_cor1: f64,
    pub ratio_base: f64,
}

impl CampaignRow for ControlSmallRow {
    fn header() -> &'static str {
        "trial,amin_brute,amin_cor1,amin_base,ratio_cor1,ratio_base"
    }

    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.trial, self.amin_brute, self.amin_cor1, self.amin_base, self.ratio_cor1, self.ratio_base
        )
    }

    fn from_csv(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(format!("expected 6 fields, got {}", f.len()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
        Ok(ControlSmallRow {
            trial: f[0].parse().map_err(|_| format!("bad trial `{}`", f[0]))?,
            amin_brute: num(f[1])?,
            amin_cor1: num(f[2])?,
            amin_base: num(f[3])?,
            ratio_cor1: num(f[4])?,
            ratio_base: num(f[5])?,
        })
    }

    fn aggregates(rows: &[Self]) -> Vec<(&'static str, f64)> {
        vec![
            ("trials_ok", rows.len() as f64),
            ("mean_amin_brute", mean(rows.iter().map(|r| r.amin_brute))),
            ("mean_amin_cor1", mean(rows.iter().map(|r| r.amin_cor1))),
            ("mean_amin_base", mean(rows.iter().map(|r| r.amin_base))),
            ("mean_ratio_cor1", mean(rows.iter().map(|r| r.ratio_cor1))),
            ("mean_ratio_base", mean(rows.iter().map(|r| r.ratio_base))),
            (
                "brute_dominates_rate",
                rate(rows, |r| {
                    r.amin_brute >= r.amin_cor1 - 1e-9 && r.amin_brute >= r.amin_base - 1e-9
                }),
            ),
        ]
    }
}

/// Fixed-graph comparison of the three allocation strategies over many
/// sampled initial conditions.
pub fn run_control_small(
    cfg: &ControlSmallConfig,
) -> Result<Campaign<ControlSmallRow>, HarnessError> {
    if cfg.trials == 0 {
        return Err(HarnessError::Invalid("trials must be >= 1".into()));
    }
    // Stream 0 builds the shared graph; trials use streams 1...
    let mut grng = stream_rng(cfg.master_seed, 0);
    let edges = generate_ba_with(cfg.n, cfg.m, &mut grng)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let net = directify_with(&edges, cfg.removal_fraction, &mut grng)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?
        .network;
    let spec = GammaSpec::new(cfg.omega_low, cfg.omega_high, GammaModel::UniformRandom)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let nu = left_null_eigenvector(&net)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?
        .nu;

    let results: Vec<Result<ControlSmallRow, String>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(cfg.master_seed, 1 + trial as u64);
            let x0 = match sample_x0_uniform(cfg.n, cfg.x0_lo, cfg.x0_hi, &mut rng) {
                Ok(v) => v,
                Err(e) => return Err(e.to_string()),
            };
            let run = || -> Result<ControlSmallRow, Box<dyn std::error::Error + Send + Sync>> {
                let p = ControlProblem::cardinality(
                    &net,
                    &x0,
                    Target::One,
                    cfg.u_max,
                    cfg.n_b,
                    &spec,
                )?;
                let brute = allocate_bruteforce(&p)?;
                let cor1 = allocate_corollary1_with_nu(&p, &Cor1Options::default(), &nu)?;
                let base = allocate_baseline_with_nu(&p, &nu)?;
                Ok(ControlSmallRow {
                    trial,
                    amin_brute: brute.predicted_bound,
                    amin_cor1: cor1.predicted_bound,
                    amin_base: base.predicted_bound,
                    ratio_cor1: cor1.predicted_bound / brute.predicted_bound,
                    ratio_base: base.predicted_bound / brute.predicted_bound,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.trials);
    let mut failures = Vec::new();
    for (trial, res) in results.into_iter().enumerate() {
        match res {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((trial, msg)),
        }
    }
    Ok(Campaign {
        rows,
        failures,
        config: cfg.to_kv(),
    })
}

/// Configuration of the large-scale control study (one big graph, a grid
/// of beta-distributed initial conditions, baseline vs the LP allocator).
#[derive(Debug, Clone)]
pub struct ControlLargeConfig {
    pub master_seed: u64,
    pub n: usize,
    pub m: usize,
    pub removal_fraction: f64,
    pub u_max: f64,
    pub n_b: usize,
    pub omega_low: f64,
    pub omega_high: f64,
    pub x0_lo: f64,
    pub x0_hi: f64,
    /// Grid values for both beta parameters.
    pub beta_grid: Vec<f64>,
    pub tol: f64,
    pub max_steps: usize,
}

impl ControlLargeConfig {
    pub fn paper(master_seed: u64) -> ControlLargeConfig {
        ControlLargeConfig {
            master_seed,
            n: 510,
            m: 2,
            removal_fraction: 0.2,
            u_max: 0.2,
            n_b: 50,
            omega_low: 0.03,
            omega_high: 0.25,
            x0_lo: 0.1,
            x0_hi: 0.9,
            beta_grid: (0..13).map(|k| 0.5 + 0.25 * k as f64).collect(),
            tol: 1e-9,
            max_steps: 1_000_000,
        }
    }

    fn to_kv(&self) -> String {
        format!(
            "experiment = control-large\nseed = {}\nn = {}\nm = {}\nremoval_fraction = {}\nu_max = {}\nn_b = {}\nomega_low = {}\nomega_high = {}\nx0_lo = {}\nx0_hi = {}\nbeta_grid = {}\ntol = {}\nmax_steps = {}\ngamma = stubborn\n",
            self.master_seed,
            self.n,
            self.m,
            self.removal_fraction,
            self.u_max,
            self.n_b,
            self.omega_low,
            self.omega_high,
            self.x0_lo,
            self.x0_hi,
            self.beta_grid
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            self.tol,
            self.max_steps
        )
    }
}

#[derive(Debug, Clone)]
pub struct ControlLargeRow {
    pub cell: usize,
    pub beta_a: f64,
    pub beta_b: f64,
    pub amin_cor1: f64,
    pub amin_base: f64,
    pub alpha_cor1: f64,
    pub alpha_base: f64,
}

impl CampaignRow for ControlLargeRow {
    fn header() -> &'static str {
        "cell,beta_a,beta_b,amin_cor1,amin_base,alpha_cor1,alpha_base,diff_amin,diff_alpha"
    }

    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.cell,
            self.beta_a,
            self.beta_b,
            self.amin_cor1,
            self.amin_base,
            self.alpha_cor1,
            self.alpha_base,
            self.amin_cor1 - self.amin_base,
            self.alpha_cor1 - self.alpha_base,
        )
    }

    fn from_csv(line: &str) -> Result<Self, String> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(format!("expected 9 fields, got {}", f.len()));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
        Ok(ControlLargeRow {
            cell: f[0].parse().map_err(|_| format!("bad cell `{}`", f[0]))?,
            beta_a: num(f[1])?,
            beta_b: num(f[2])?,
            amin_cor1: num(f[3])?,
            amin_base: num(f[4])?,
            alpha_cor1: num(f[5])?,
            alpha_base: num(f[6])?,
        })
    }

    fn aggregates(rows: &[Self]) -> Vec<(&'static str, f64)> {
        vec![
            ("cells", rows.len() as f64),
            (
                "amin_cor1_ge_base_rate",
                rate(rows, |r| r.amin_cor1 >= r.amin_base - 1e-9),
            ),
            (
                "alpha_cor1_ge_base_rate",
                rate(rows, |r| r.alpha_cor1 >= r.alpha_base - 1e-9),
            ),
            (
                "mean_diff_amin",
                mean(rows.iter().map(|r| r.amin_cor1 - r.amin_base)),
            ),
            (
                "mean_diff_alpha",
                mean(rows.iter().map(|r| r.alpha_cor1 - r.alpha_base)),
            ),
        ]
    }
}

/// Grid study on one large directed scale-free network: for every
/// `(β_a, β_b)` pair, allocate with the baseline and the LP strategy,
/// record the post-control lower bounds and the realized consensus under
/// the stubbornness dynamics.
pub fn run_control_large(
    cfg: &ControlLargeConfig,
) -> Result<Campaign<ControlLargeRow>, HarnessError> {
    let mut grng = stream_rng(cfg.master_seed, 0);
    let edges = generate_ba_with(cfg.n, cfg.m, &mut grng)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let net = directify_with(&edges, cfg.removal_fraction, &mut grng)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?
        .network;
    let spec = GammaSpec::new(cfg.omega_low, cfg.omega_high, GammaModel::Stubbornness)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?;
    let nu = left_null_eigenvector(&net)
        .map_err(|e| HarnessError::Invalid(e.to_string()))?
        .nu;

    let cells: Vec<(usize, f64, f64)> = cfg
        .beta_grid
        .iter()
        .flat_map(|&a| cfg.beta_grid.iter().map(move |&b| (a, b)))
        .enumerate()
        .map(|(i, (a, b))| (i, a, b))
        .collect();

    let results: Vec<Result<ControlLargeRow, String>> = cells
        .par_iter()
        .map(|&(cell, beta_a, beta_b)| {
            let mut rng = stream_rng(cfg.master_seed, 1 + cell as u64);
            let mut run = || -> Result<ControlLargeRow, Box<dyn std::error::Error + Send + Sync>> {
                let x0 = sample_x0_beta(cfg.n, beta_a, beta_b, cfg.x0_lo, cfg.x0_hi, &mut rng)?;
                let p = ControlProblem::cardinality(
                    &net,
                    &x0,
                    Target::One,
                    cfg.u_max,
                    cfg.n_b,
                    &spec,
                )?;
                let cor1 = allocate_corollary1_with_nu(&p, &Cor1Options::default(), &nu)?;
                let base = allocate_baseline_with_nu(&p, &nu)?;
                let opts = SimOptions {
                    tol: cfg.tol,
                    max_steps: cfg.max_steps,
                    record_states: false,
                    ..SimOptions::default()
                };
                let post_cor1 =
                    crate::control::apply_control(&x0, &cor1.u, Target::One);
                let post_base =
                    crate::control::apply_control(&x0, &base.u, Target::One);
                let alpha_cor1 =
                    simulate(&net, &post_cor1, &spec, Monitors::default(), &opts, &mut rng)?.alpha;
                let alpha_base =
                    simulate(&net, &post_base, &spec, Monitors::default(), &opts, &mut rng)?.alpha;
                Ok(ControlLargeRow {
                    cell,
                    beta_a,
                    beta_b,
                    amin_cor1: cor1.predicted_bound,
                    amin_base: base.predicted_bound,
                    alpha_cor1,
                    alpha_base,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();

    let mut rows = Vec::with_capacity(cells.len());
    let mut failures = Vec::new();
    for (cell, res) in results.into_iter().enumerate() {
        match res {
            Ok(row) => rows.push(row),
            Err(msg) => failures.push((cell, msg)),
        }
    }
    Ok(Campaign {
        rows,
        failures,
        config: cfg.to_kv(),
    })
}
