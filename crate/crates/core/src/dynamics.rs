//! Uncertain opinion dynamics.
//!
//! The update is `x(k+1) = (I − diag(γ(k)) L) x(k)`, componentwise
//! `x_i(k+1) = x_i(k) + γ_i(k) Σ_j a_ij (x_j(k) − x_i(k))`, with the gain
//! vector bounded per agent by `γ_i ∈ [ω_low/n_i, ω_high/n_i]`. With a
//! strongly connected network the states converge to a consensus value α.

use crate::netgraph::Network;
use rand::Rng;
use thiserror::Error;

/// Default spread tolerance declaring consensus.
pub const CONSENSUS_TOL: f64 = 1e-9;
/// Default iteration cap.
pub const MAX_STEPS: usize = 1_000_000;
/// Slack absorbing roundoff in the sign conditions of the projection test.
pub const ASSUMPTION_SLACK: f64 = 1e-12;
/// Spread above which a step counts as part of the pre-consensus
/// transient; the projection-condition rates reported by campaigns are
/// computed over this regime, where the signs are numerically meaningful.
pub const TRANSIENT_SPREAD: f64 = 1e-2;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("omega bounds must satisfy 0 < low <= high <= 1 (got {low}, {high})")]
    InvalidOmega { low: f64, high: f64 },
    #[error("opinion x[{index}] = {value} outside [0, 1]")]
    OpinionOutOfRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("constant gamma model has {got} entries, expected {expected}")]
    ConstantGammaLength { expected: usize, got: usize },
}

/// How the gain vector `γ(k)` is produced at each step.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaModel {
    /// `γ_i = x_i (1 − x_i) / n_i` — the opinion-dependent stubbornness map.
    Stubbornness,
    /// Each `γ_i` drawn independently uniform on `[γ_i_low, γ_i_high]`.
    UniformRandom,
    /// A fixed gain vector.
    Constant(Vec<f64>),
}

/// Per-agent gain uncertainty `γ_i ∈ [ω_low/n_i, ω_high/n_i]` plus the
/// generative model used in simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSpec {
    omega_low: f64,
    omega_high: f64,
    pub model: GammaModel,
}

impl GammaSpec {
    pub fn new(omega_low: f64, omega_high: f64, model: GammaModel) -> Result<Self, DynError> {
        if !(omega_low > 0.0 && omega_low <= omega_high && omega_high <= 1.0) {
            return Err(DynError::InvalidOmega {
                low: omega_low,
                high: omega_high,
            });
        }
        Ok(GammaSpec {
            omega_low,
            omega_high,
            model,
        })
    }

    pub fn omega_low(&self) -> f64 {
        self.omega_low
    }

    pub fn omega_high(&self) -> f64 {
        self.omega_high
    }

    /// Per-agent lower bounds `ω_low / n_i`.
    pub fn gamma_low(&self, net: &Network) -> Vec<f64> {
        (0..net.n())
            .map(|i| self.omega_low / net.neighbor_count(i) as f64)
            .collect()
    }

    /// Per-agent upper bounds `ω_high / n_i`.
    pub fn gamma_high(&self, net: &Network) -> Vec<f64> {
        (0..net.n())
            .map(|i| self.omega_high / net.neighbor_count(i) as f64)
            .collect()
    }
}

/// Stubbornness gains `γ_i = x_i (1 − x_i) / n_i` (unclamped; the
/// simulator clamps realizations into the admissible interval).
pub fn gamma_stubbornness(x: &[f64], net: &Network) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(i, &xi)| xi * (1.0 - xi) / net.neighbor_count(i) as f64)
        .collect()
}

/// Independent uniform draws on each `[γ_i_low, γ_i_high]`.
pub fn gamma_uniform_random<R: Rng>(spec: &GammaSpec, net: &Network, rng: &mut R) -> Vec<f64> {
    let lo = spec.gamma_low(net);
    let hi = spec.gamma_high(net);
    lo.iter()
        .zip(&hi)
        .map(|(&l, &h)| if h > l { rng.gen_range(l..=h) } else { l })
        .collect()
}

/// One update of the opinion dynamics.
pub fn step(x: &[f64], gamma: &[f64], net: &Network) -> Vec<f64> {
    let mut lx = vec![0.0; net.n()];
    net.laplacian_mul(x, &mut lx);
    x.iter()
        .zip(gamma)
        .zip(&lx)
        .map(|((&xi, &g), &l)| xi - g * l)
        .collect()
}

/// The two sign conditions of the projection test, evaluated with the
/// default slack: `ν_underᵀ diag(γ) L x ≤ ε` and `ν_overᵀ diag(γ) L x ≥ −ε`.
pub fn check_assumption2(
    nu_under: &[f64],
    nu_over: &[f64],
    gamma: &[f64],
    net: &Network,
    x: &[f64],
) -> (bool, bool) {
    let mut lx = vec![0.0; net.n()];
    net.laplacian_mul(x, &mut lx);
    let mut under = 0.0;
    let mut over = 0.0;
    for i in 0..net.n() {
        let gl = gamma[i] * lx[i];
        under += nu_under[i] * gl;
        over += nu_over[i] * gl;
    }
    (under <= ASSUMPTION_SLACK, over >= -ASSUMPTION_SLACK)
}

/// Optional extremal eigenvectors to monitor during simulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Monitors<'a> {
    pub nu_under: Option<&'a [f64]>,
    pub nu_over: Option<&'a [f64]>,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    /// Consensus tolerance on `max(x) − min(x)`.
    pub tol: f64,
    pub max_steps: usize,
    /// Keep the full state history. Off for large campaigns.
    pub record_states: bool,
    pub slack: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tol: CONSENSUS_TOL,
            max_steps: MAX_STEPS,
            record_states: true,
            slack: ASSUMPTION_SLACK,
        }
    }
}

/// Full record of one simulation run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// `x(0) … x(K)` when recording is on; empty otherwise.
    pub states: Vec<Vec<f64>>,
    /// `ν_underᵀ x(k)` per recorded step (empty without a monitor).
    pub theta_under: Vec<f64>,
    /// `ν_overᵀ x(k)` per recorded step.
    pub theta_over: Vec<f64>,
    /// Per-transition sign-condition flags (length = steps taken).
    pub flags_under: Vec<bool>,
    pub flags_over: Vec<bool>,
    /// Count of transitions in the pre-consensus transient
    /// (spread > [`TRANSIENT_SPREAD`]) and how many of them satisfied
    /// each condition; used for the campaign-level satisfaction rates.
    pub transient_steps: usize,
    pub transient_under_ok: usize,
    pub transient_over_ok: usize,
    pub transient_both_ok: usize,
    /// Midpoint of the final spread.
    pub alpha: f64,
    pub steps: usize,
    pub converged: bool,
}

impl TrajectoryRecord {
    /// True when every recorded transition satisfied both sign conditions.
    pub fn all_flags_hold(&self) -> bool {
        self.flags_under.iter().all(|&b| b) && self.flags_over.iter().all(|&b| b)
    }
}

fn spread(x: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Iterate the dynamics until consensus or `max_steps`.
///
/// Gains are produced by `spec.model` and clamped into
/// `[γ_i_low, γ_i_high]` (the stubbornness map would otherwise produce
/// zero gains at extreme opinions, violating `ω_low > 0`).
pub fn simulate<R: Rng>(
    net: &Network,
    x0: &[f64],
    spec: &GammaSpec,
    monitors: Monitors<'_>,
    opts: &SimOptions,
    rng: &mut R,
) -> Result<TrajectoryRecord, DynError> {
    let n = net.n();
    if x0.len() != n {
        return Err(DynError::Dimension {
            expected: n,
            got: x0.len(),
        });
    }
    for (i, &v) in x0.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) || !v.is_finite() {
            return Err(DynError::OpinionOutOfRange { index: i, value: v });
        }
    }
    if let GammaModel::Constant(g) = &spec.model {
        if g.len() != n {
            return Err(DynError::ConstantGammaLength {
                expected: n,
                got: g.len(),
            });
        }
    }

    let glo = spec.gamma_low(net);
    let ghi = spec.gamma_high(net);
    let mut x = x0.to_vec();
    let mut lx = vec![0.0; n];
    let mut rec = TrajectoryRecord {
        states: Vec::new(),
        theta_under: Vec::new(),
        theta_over: Vec::new(),
        flags_under: Vec::new(),
        flags_over: Vec::new(),
        transient_steps: 0,
        transient_under_ok: 0,
        transient_over_ok: 0,
        transient_both_ok: 0,
        alpha: 0.0,
        steps: 0,
        converged: false,
    };

    let dot = |v: &[f64], x: &[f64]| v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let record_point = |x: &[f64], rec: &mut TrajectoryRecord| {
        if opts.record_states {
            rec.states.push(x.to_vec());
        }
        if let Some(nu) = monitors.nu_under {
            rec.theta_under.push(dot(nu, x));
        }
        if let Some(nu) = monitors.nu_over {
            rec.theta_over.push(dot(nu, x));
        }
    };
    record_point(&x, &mut rec);

    for _ in 0..opts.max_steps {
        let (lo, hi) = spread(&x);
        if hi - lo <= opts.tol {
            rec.converged = true;
            rec.alpha = (hi + lo) / 2.0;
            return Ok(rec);
        }
        let mut gamma = match &spec.model {
            GammaModel::Stubbornness => gamma_stubbornness(&x, net),
            GammaModel::UniformRandom => gamma_uniform_random(spec, net, rng),
            GammaModel::Constant(g) => g.clone(),
        };
        for i in 0..n {
            gamma[i] = gamma[i].clamp(glo[i], ghi[i]);
        }

        net.laplacian_mul(&x, &mut lx);
        if monitors.nu_under.is_some() || monitors.nu_over.is_some() {
            let transient = hi - lo > TRANSIENT_SPREAD;
            let mut under = 0.0;
            let mut over = 0.0;
            for i in 0..n {
                let gl = gamma[i] * lx[i];
                under += monitors.nu_under.map_or(0.0, |nu| nu[i]) * gl;
                over += monitors.nu_over.map_or(0.0, |nu| nu[i]) * gl;
            }
            let under_ok = under <= opts.slack;
            let over_ok = over >= -opts.slack;
            if monitors.nu_under.is_some() {
                rec.flags_under.push(under_ok);
            }
            if monitors.nu_over.is_some() {
                rec.flags_over.push(over_ok);
            }
            if transient {
                rec.transient_steps += 1;
                rec.transient_under_ok += usize::from(under_ok);
                rec.transient_over_ok += usize::from(over_ok);
                rec.transient_both_ok += usize::from(under_ok && over_ok);
            }
        }
        for i in 0..n {
            x[i] -= gamma[i] * lx[i];
        }
        rec.steps += 1;
        record_point(&x, &mut rec);
    }

    let (lo, hi) = spread(&x);
    rec.converged = hi - lo <= opts.tol;
    rec.alpha = (hi + lo) / 2.0;
    Ok(rec)
}
