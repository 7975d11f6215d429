//! Impulsive marketing-budget allocation.
//!
//! A campaign happens once, at step 0: agent `i` receiving input `u_i`
//! moves to `x_i(0) ← d·u_i + x_i(0)(1 − u_i)` for a target opinion
//! `d ∈ {0, 1}`. Inputs are capped per agent (`u_i ≤ ū`) and in total
//! (`Σ u_i ≤ B`). Three strategies are provided:
//!
//! - the relaxed LP of the bound-aware formulation, with iterative
//!   redistribution until the budget is exhausted,
//! - the linear-dynamics baseline ranking agents by influence power
//!   `ρ_i = ν_i |d − x_i(0)|`, and
//! - brute-force enumeration of all funded subsets (small networks).

use crate::bounds::{
    solve_bound_side, solve_bounds_with_nu, BoundsError, BoundsResult, Direction, PhiBox, TAU_MIN,
};
use crate::dynamics::{gamma_stubbornness, simulate, GammaSpec, Monitors, SimOptions};
use crate::linprog::{solve_lp, LinearProgram, LpStatus, Sense};
use crate::netgraph::Network;
use crate::spectral::{left_null_eigenvector, scaled_eigenvector, SpectralError};
use rand::Rng;
use thiserror::Error;

/// Enumeration cap for brute force.
pub const BRUTE_FORCE_MAX: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum CtrlError {
    #[error("bounds failure: {0}")]
    Bounds(#[from] BoundsError),
    #[error("spectral failure: {0}")]
    Spectral(#[from] SpectralError),
    #[error("control LP reported {0:?}")]
    BadLpStatus(LpStatus),
    #[error("control LP scale variable {0:.3e} stuck at the floor")]
    DegenerateScale(f64),
    #[error("brute force needs C(n, n_b) <= {max}, got {count}")]
    TooLarge { count: u64, max: u64 },
    #[error("u_max {0} outside [0, 1]")]
    BadUMax(f64),
    #[error("budget {0} is negative")]
    BadBudget(f64),
    #[error("n_b {n_b} exceeds agent count {n}")]
    BadCardinality { n_b: usize, n: usize },
    #[error("opinion x0[{index}] = {value} outside [0, 1]")]
    OpinionOutOfRange { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dynamics failure: {0}")]
    Dynamics(#[from] crate::dynamics::DynError),
}

/// Desired consensus value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Zero,
    One,
}

impl Target {
    pub fn value(self) -> f64 {
        match self {
            Target::Zero => 0.0,
            Target::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Corollary1,
    Baseline,
    BruteForce,
}

impl Strategy {
    pub fn tag(self) -> &'static str {
        match self {
            Strategy::Corollary1 => "cor1",
            Strategy::Baseline => "baseline",
            Strategy::BruteForce => "brute",
        }
    }
}

/// One allocation instance.
#[derive(Debug, Clone)]
pub struct ControlProblem<'a> {
    pub net: &'a Network,
    pub x0: &'a [f64],
    pub d: Target,
    /// Per-agent cap `ū`.
    pub u_max: f64,
    /// Total budget `B`.
    pub budget: f64,
    /// Funded-agent count for cardinality strategies (`B = n_b ū`).
    pub n_b: usize,
    pub spec: &'a GammaSpec,
}

impl<'a> ControlProblem<'a> {
    /// Cardinality-style problem with `B = n_b · ū`.
    pub fn cardinality(
        net: &'a Network,
        x0: &'a [f64],
        d: Target,
        u_max: f64,
        n_b: usize,
        spec: &'a GammaSpec,
    ) -> Result<Self, CtrlError> {
        Self::new(net, x0, d, u_max, n_b as f64 * u_max, n_b, spec)
    }

    pub fn new(
        net: &'a Network,
        x0: &'a [f64],
        d: Target,
        u_max: f64,
        budget: f64,
        n_b: usize,
        spec: &'a GammaSpec,
    ) -> Result<Self, CtrlError> {
        if !(0.0..=1.0).contains(&u_max) {
            return Err(CtrlError::BadUMax(u_max));
        }
        if budget < 0.0 {
            return Err(CtrlError::BadBudget(budget));
        }
        if n_b > net.n() {
            return Err(CtrlError::BadCardinality { n_b, n: net.n() });
        }
        if x0.len() != net.n() {
            return Err(CtrlError::Dimension {
                expected: net.n(),
                got: x0.len(),
            });
        }
        for (i, &v) in x0.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(CtrlError::OpinionOutOfRange { index: i, value: v });
            }
        }
        Ok(ControlProblem {
            net,
            x0,
            d,
            u_max,
            budget,
            n_b,
            spec,
        })
    }
}

/// A computed allocation.
#[derive(Debug, Clone)]
pub struct AllocationPlan {
    pub strategy: Strategy,
    /// Control inputs, `u_i ∈ {0, ū}` for the strategies implemented here.
    pub u: Vec<f64>,
    /// Indices with `u_i = ū`, ascending.
    pub funded: Vec<usize>,
    pub budget_used: f64,
    /// Post-control `α_min` (d = 1) or `α_max` (d = 0).
    pub predicted_bound: f64,
}

/// Post-campaign opinions `x_u(0) = d·u + diag(x0)(1 − u)`.
pub fn apply_control(x0: &[f64], u: &[f64], d: Target) -> Vec<f64> {
    debug_assert_eq!(x0.len(), u.len());
    let dv = d.value();
    x0.iter()
        .zip(u)
        .map(|(&x, &ui)| (dv * ui + x * (1.0 - ui)).clamp(0.0, 1.0))
        .collect()
}

fn bound_for(d: Target, b: &BoundsResult) -> f64 {
    match d {
        Target::One => b.alpha_min,
        Target::Zero => b.alpha_max,
    }
}

fn direction_for(d: Target) -> Direction {
    match d {
        Target::One => Direction::Min,
        Target::Zero => Direction::Max,
    }
}

/// The plan's figure of merit: post-control `α_min` (d = 1) or `α_max` (d = 0).
fn plan_bound(
    p: &ControlProblem<'_>,
    nu: &[f64],
    post: &[f64],
) -> Result<f64, CtrlError> {
    let (value, _, _) = solve_bound_side(p.net, nu, post, p.spec, direction_for(p.d))?;
    Ok(value)
}

fn plan_from_funded(
    p: &ControlProblem<'_>,
    nu: &[f64],
    strategy: Strategy,
    mut funded: Vec<usize>,
) -> Result<AllocationPlan, CtrlError> {
    funded.sort_unstable();
    let mut u = vec![0.0; p.net.n()];
    for &i in &funded {
        u[i] = p.u_max;
    }
    let post = apply_control(p.x0, &u, p.d);
    Ok(AllocationPlan {
        strategy,
        budget_used: p.u_max * funded.len() as f64,
        predicted_bound: plan_bound(p, nu, &post)?,
        u,
        funded,
    })
}

/// Options for the LP-based allocator.
#[derive(Debug, Clone)]
pub struct Cor1Options {
    /// Express the per-agent cap as `ũ_i ≤ ū·φ̃_i`, which recovers exactly
    /// `u_i ≤ ū`. Off, the cap is the more conservative `ũ_i ≤ ū·χ`
    /// (equivalent to `u_i ≤ ū/φ_i`), under which no recovered input can
    /// reach `ū` and the recovered ranking is skewed by `1/φ_i`; it is
    /// kept for comparison.
    pub exact_ucap: bool,
}

impl Default for Cor1Options {
    fn default() -> Self {
        Cor1Options { exact_ucap: true }
    }
}

/// Build and solve the relaxed allocation LP over the unfrozen agents.
///
/// Variables are ordered `[φ̃_0 … φ̃_{n-1}, ũ_(unfrozen…), χ]` with
/// objective `Σ ν_i φ̃_i x_i + Σ ν_i ũ_i (d − x_i)` and constraints
/// `νᵀφ̃ = 1`, `φ_low χ ≤ φ̃ ≤ φ_high χ`, `0 ≤ ũ_i ≤ ū·χ`,
/// `Σ ũ_i/φ_i_low ≤ B·χ`, `χ ≥ τ_min`.
fn solve_relaxed_lp(
    p: &ControlProblem<'_>,
    nu: &[f64],
    x_work: &[f64],
    unfrozen: &[usize],
    b_rem: f64,
    opts: &Cor1Options,
) -> Result<Vec<f64>, CtrlError> {
    let n = p.net.n();
    let boxc = PhiBox::from_spec(p.spec, p.net);
    let m_u = unfrozen.len();
    let nvars = n + m_u + 1;
    let chi = n + m_u;
    let dv = p.d.value();

    let mut c = vec![0.0; nvars];
    for i in 0..n {
        c[i] = nu[i] * x_work[i];
    }
    for (k, &i) in unfrozen.iter().enumerate() {
        c[n + k] = nu[i] * (dv - x_work[i]);
    }

    let mut a_ineq: Vec<Vec<f64>> = Vec::with_capacity(2 * n + m_u + 1);
    for i in 0..n {
        let mut hi = vec![0.0; nvars];
        hi[i] = 1.0;
        hi[chi] = -boxc.phi_high[i];
        a_ineq.push(hi);
        let mut lo = vec![0.0; nvars];
        lo[i] = -1.0;
        lo[chi] = boxc.phi_low[i];
        a_ineq.push(lo);
    }
    for (k, &i) in unfrozen.iter().enumerate() {
        let mut cap = vec![0.0; nvars];
        cap[n + k] = 1.0;
        if opts.exact_ucap {
            cap[i] = -p.u_max;
        } else {
            cap[chi] = -p.u_max;
        }
        a_ineq.push(cap);
    }
    let mut budget_row = vec![0.0; nvars];
    for (k, &i) in unfrozen.iter().enumerate() {
        budget_row[n + k] = 1.0 / boxc.phi_low[i];
    }
    budget_row[chi] = -b_rem;
    a_ineq.push(budget_row);
    let b_ineq = vec![0.0; a_ineq.len()];

    let mut eq = vec![0.0; nvars];
    eq[..n].copy_from_slice(&nu[..n]);

    let mut var_bounds = vec![(0.0, f64::INFINITY); nvars];
    var_bounds[chi] = (TAU_MIN, f64::INFINITY);

    let lp = LinearProgram::new(
        match p.d {
            Target::One => Sense::Maximize,
            Target::Zero => Sense::Minimize,
        },
        c,
        a_ineq,
        b_ineq,
        vec![eq],
        vec![1.0],
        var_bounds,
    )
    .map_err(BoundsError::Lp)?;
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(CtrlError::BadLpStatus(sol.status));
    }
    let chi_v = sol.z[chi];
    if chi_v <= TAU_MIN * (1.0 + 1e-6) {
        return Err(CtrlError::DegenerateScale(chi_v));
    }

    let mut u = vec![0.0; n];
    let mut spent = 0.0;
    for (k, &i) in unfrozen.iter().enumerate() {
        let ui = sol.z[n + k] / sol.z[i];
        u[i] = ui.clamp(0.0, p.u_max);
        spent += u[i];
    }
    // The relaxed budget row implies the true budget constraint.
    debug_assert!(
        spent <= b_rem + 1e-6,
        "relaxed row violated the true budget: {spent} > {b_rem}"
    );
    Ok(u)
}

/// Relaxed-LP allocation with iterative redistribution.
///
/// Each round solves the relaxed LP over the unfrozen agents and freezes
/// at `ū` every agent whose recovered input reaches the cap — or, when
/// the tightened budget row keeps all recovered inputs fractional, the
/// single agent with the largest recovered input (ties to the lower
/// index). Frozen controls are applied to the working initial state and
/// the LP re-solved with the remaining budget, until the budget is
/// exhausted. The final plan is binary.
pub fn allocate_corollary1(p: &ControlProblem<'_>) -> Result<AllocationPlan, CtrlError> {
    allocate_corollary1_opts(p, &Cor1Options::default())
}

pub fn allocate_corollary1_opts(
    p: &ControlProblem<'_>,
    opts: &Cor1Options,
) -> Result<AllocationPlan, CtrlError> {
    let nu = left_null_eigenvector(p.net)?.nu;
    allocate_corollary1_with_nu(p, opts, &nu)
}

/// [`allocate_corollary1`] with a precomputed eigenvector, for callers
/// running many allocations on one network.
pub fn allocate_corollary1_with_nu(
    p: &ControlProblem<'_>,
    opts: &Cor1Options,
    nu: &[f64],
) -> Result<AllocationPlan, CtrlError> {
    let n = p.net.n();
    let eps_bin = 1e-6 * p.u_max;

    if p.budget <= 0.0 || p.u_max == 0.0 {
        return plan_from_funded(p, nu, Strategy::Corollary1, Vec::new());
    }

    let mut frozen = vec![false; n];
    let mut x_work = p.x0.to_vec();
    let mut b_rem = p.budget;

    while b_rem >= p.u_max - eps_bin {
        let unfrozen: Vec<usize> = (0..n).filter(|&i| !frozen[i]).collect();
        if unfrozen.is_empty() {
            break;
        }
        let u = solve_relaxed_lp(p, nu, &x_work, &unfrozen, b_rem, opts)?;
        let mut newly: Vec<usize> = unfrozen
            .iter()
            .copied()
            .filter(|&i| u[i] >= p.u_max - eps_bin)
            .collect();
        // Budget still allows another full agent but the tightened budget
        // row kept every input fractional: fund the largest one.
        if newly.is_empty() {
            let best = unfrozen
                .iter()
                .copied()
                .max_by(|&a, &b| u[a].partial_cmp(&u[b]).unwrap().then(b.cmp(&a)))
                .expect("non-empty unfrozen set");
            newly.push(best);
        }
        // Never freeze more agents than the remaining budget pays for.
        let affordable = ((b_rem + eps_bin) / p.u_max).floor() as usize;
        if newly.len() > affordable {
            newly.sort_by(|&a, &b| u[b].partial_cmp(&u[a]).unwrap().then(a.cmp(&b)));
            newly.truncate(affordable);
        }
        for &i in &newly {
            frozen[i] = true;
            x_work[i] = p.d.value() * p.u_max + x_work[i] * (1.0 - p.u_max);
        }
        b_rem -= p.u_max * newly.len() as f64;
    }

    let funded: Vec<usize> = (0..n).filter(|&i| frozen[i]).collect();
    plan_from_funded(p, nu, Strategy::Corollary1, funded)
}

/// Influence-power baseline: rank agents by `ρ_i = (ν_{γ(0)})_i |d − x_i(0)|`
/// with `γ(0)` the stubbornness gains at `x(0)`, and fund the top `n_b`
/// (ties to the lower index).
pub fn allocate_baseline(p: &ControlProblem<'_>) -> Result<AllocationPlan, CtrlError> {
    let nu = left_null_eigenvector(p.net)?.nu;
    allocate_baseline_with_nu(p, &nu)
}

/// [`allocate_baseline`] with a precomputed eigenvector.
pub fn allocate_baseline_with_nu(
    p: &ControlProblem<'_>,
    nu: &[f64],
) -> Result<AllocationPlan, CtrlError> {
    let glo = p.spec.gamma_low(p.net);
    let ghi = p.spec.gamma_high(p.net);
    let gamma0: Vec<f64> = gamma_stubbornness(p.x0, p.net)
        .into_iter()
        .enumerate()
        .map(|(i, g)| g.clamp(glo[i], ghi[i]))
        .collect();
    let nu_gamma0 = scaled_eigenvector(nu, &gamma0)?;
    let dv = p.d.value();
    let rho: Vec<f64> = nu_gamma0
        .iter()
        .zip(p.x0)
        .map(|(&v, &x)| v * (dv - x).abs())
        .collect();
    let mut order: Vec<usize> = (0..p.net.n()).collect();
    order.sort_by(|&a, &b| rho[b].partial_cmp(&rho[a]).unwrap().then(a.cmp(&b)));
    let funded: Vec<usize> = order.into_iter().take(p.n_b).collect();
    plan_from_funded(p, nu, Strategy::Baseline, funded)
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Iterate `k`-combinations of `0..n` in lexicographic order.
fn next_combination(subset: &mut Vec<usize>, n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] != i + n - k {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exhaustive search over all `n_b`-subsets, keeping the subset with the
/// best post-control bound (ties resolved lexicographically).
pub fn allocate_bruteforce(p: &ControlProblem<'_>) -> Result<AllocationPlan, CtrlError> {
    let n = p.net.n();
    let count = binomial(n as u64, p.n_b as u64);
    if count > BRUTE_FORCE_MAX {
        return Err(CtrlError::TooLarge {
            count,
            max: BRUTE_FORCE_MAX,
        });
    }
    let nu = left_null_eigenvector(p.net)?.nu;
    if p.n_b == 0 {
        return plan_from_funded(p, &nu, Strategy::BruteForce, Vec::new());
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..p.n_b).collect();
    loop {
        let mut u = vec![0.0; n];
        for &i in &subset {
            u[i] = p.u_max;
        }
        let post = apply_control(p.x0, &u, p.d);
        let value = plan_bound(p, &nu, &post)?;
        let better = match &best {
            None => true,
            Some((cur, _)) => match p.d {
                Target::One => value > *cur,
                Target::Zero => value < *cur,
            },
        };
        if better {
            best = Some((value, subset.clone()));
        }
        if !next_combination(&mut subset, n) {
            break;
        }
    }

    let (value, funded) = best.expect("at least one subset evaluated");
    let mut plan = plan_from_funded(p, &nu, Strategy::BruteForce, funded)?;
    plan.predicted_bound = value;
    Ok(plan)
}

/// Monte-Carlo evaluation of a plan.
#[derive(Debug, Clone)]
pub struct EvaluationRecord {
    pub predicted_bound: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Realized consensus per trial.
    pub alphas: Vec<f64>,
    pub alpha_mean: f64,
    /// Fraction of trials with `α ∈ [α_min − 1e−9, α_max + 1e−9]`.
    pub containment_rate: f64,
}

/// Simulate `trials` gain realizations from the post-control state and
/// report containment of the realized consensus in the computed bounds.
pub fn evaluate_allocation<R: Rng>(
    p: &ControlProblem<'_>,
    plan: &AllocationPlan,
    trials: usize,
    rng: &mut R,
) -> Result<EvaluationRecord, CtrlError> {
    let post = apply_control(p.x0, &plan.u, p.d);
    let nu = left_null_eigenvector(p.net)?.nu;
    let bounds = solve_bounds_with_nu(p.net, &nu, &post, p.spec)?;
    let opts = SimOptions {
        record_states: false,
        ..SimOptions::default()
    };
    let mut alphas = Vec::with_capacity(trials);
    let mut contained = 0usize;
    for _ in 0..trials {
        let rec = simulate(p.net, &post, p.spec, Monitors::default(), &opts, rng)?;
        if rec.alpha >= bounds.alpha_min - 1e-9 && rec.alpha <= bounds.alpha_max + 1e-9 {
            contained += 1;
        }
        alphas.push(rec.alpha);
    }
    let alpha_mean = alphas.iter().sum::<f64>() / trials.max(1) as f64;
    Ok(EvaluationRecord {
        predicted_bound: bound_for(p.d, &bounds),
        alpha_min: bounds.alpha_min,
        alpha_max: bounds.alpha_max,
        alphas,
        alpha_mean,
        containment_rate: contained as f64 / trials.max(1) as f64,
    })
}
