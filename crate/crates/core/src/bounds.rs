//! Consensus-value bounds via linear fractional programming.
//!
//! The extremal weighted averages
//!
//! ```text
//!   min/max over γ in the box of   (νᵀ diag(1/γ) x(0)) / (νᵀ diag(1/γ) 1)
//! ```
//!
//! become, after the substitution `φ = 1/γ`, linear fractional programs
//! over the box `φ_i ∈ [n_i/ω_high, n_i/ω_low]`, which the Charnes-Cooper
//! transformation (`τ = 1/νᵀφ`, `χ = φτ`) turns into LPs. The optima give
//! the bounds `α_min = ν_underᵀ x(0)`, `α_max = ν_overᵀ x(0)` together
//! with the extremal gain vectors, which always sit at box vertices.

use crate::dynamics::GammaSpec;
use crate::linprog::{solve_lp, LinearProgram, LpError, LpStatus, Sense};
use crate::netgraph::Network;
use crate::spectral::{left_null_eigenvector, scaled_eigenvector, SpectralError};
use thiserror::Error;

/// Floor standing in for the strict inequality `τ > 0`.
pub const TAU_MIN: f64 = 1e-12;
/// Recovered gains within this distance of an interval endpoint snap to it.
pub const SNAP_TOL: f64 = 1e-9;
/// Enumeration guard for the vertex oracle.
pub const VERTEX_ORACLE_MAX_N: usize = 20;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("spectral failure: {0}")]
    Spectral(#[from] SpectralError),
    #[error("lp construction failure: {0}")]
    Lp(#[from] LpError),
    #[error("bounds LP reported {0:?}; the box program should always be solvable")]
    BadLpStatus(LpStatus),
    #[error("degenerate tau {0:.3e} at the floor; fractional program is ill-posed")]
    DegenerateTau(f64),
    #[error("vertex oracle limited to n <= {max} agents (got {n})")]
    OracleTooLarge { n: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Bounds on the inverse gains: `φ_i ∈ [1/γ_i_high, 1/γ_i_low]`.
#[derive(Debug, Clone)]
pub struct PhiBox {
    pub phi_low: Vec<f64>,
    pub phi_high: Vec<f64>,
}

impl PhiBox {
    pub fn from_spec(spec: &GammaSpec, net: &Network) -> PhiBox {
        let lo = spec.gamma_low(net);
        let hi = spec.gamma_high(net);
        PhiBox {
            phi_low: hi.iter().map(|g| 1.0 / g).collect(),
            phi_high: lo.iter().map(|g| 1.0 / g).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.phi_low.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Min,
    Max,
}

/// The linear fractional program `(Σ ν_i φ_i x_i) / (νᵀφ)` over a box.
#[derive(Debug, Clone)]
pub struct FractionalProgram {
    pub nu: Vec<f64>,
    pub x0: Vec<f64>,
    pub boxc: PhiBox,
    pub direction: Direction,
}

/// Shared assembly of the fractional objective.
pub fn build_lfp(nu: &[f64], x0: &[f64], boxc: &PhiBox, direction: Direction) -> FractionalProgram {
    FractionalProgram {
        nu: nu.to_vec(),
        x0: x0.to_vec(),
        boxc: boxc.clone(),
        direction,
    }
}

impl FractionalProgram {
    /// Evaluate the fractional objective at a concrete `φ`.
    pub fn eval(&self, phi: &[f64]) -> f64 {
        let num: f64 = self
            .nu
            .iter()
            .zip(phi)
            .zip(&self.x0)
            .map(|((&v, &p), &x)| v * p * x)
            .sum();
        let den: f64 = self.nu.iter().zip(phi).map(|(&v, &p)| v * p).sum();
        num / den
    }
}

/// Charnes-Cooper reduction of the fractional program to an LP in
/// `(χ, τ)`: objective `Σ ν_i x_i χ_i`, constraints `χ_i − φ_i_high τ ≤ 0`,
/// `−χ_i + φ_i_low τ ≤ 0`, `νᵀχ = 1`, `τ ≥ TAU_MIN`.
pub fn charnes_cooper(lfp: &FractionalProgram) -> Result<LinearProgram, LpError> {
    let n = lfp.nu.len();
    let mut c: Vec<f64> = lfp.nu.iter().zip(&lfp.x0).map(|(&v, &x)| v * x).collect();
    c.push(0.0); // τ has no objective weight
    let mut a_ineq = Vec::with_capacity(2 * n);
    let b_ineq = vec![0.0; 2 * n];
    for i in 0..n {
        let mut hi = vec![0.0; n + 1];
        hi[i] = 1.0;
        hi[n] = -lfp.boxc.phi_high[i];
        a_ineq.push(hi);
        let mut lo = vec![0.0; n + 1];
        lo[i] = -1.0;
        lo[n] = lfp.boxc.phi_low[i];
        a_ineq.push(lo);
    }
    let mut eq = lfp.nu.clone();
    eq.push(0.0);
    let mut bounds = vec![(0.0, f64::INFINITY); n];
    bounds.push((TAU_MIN, f64::INFINITY));
    LinearProgram::new(
        match lfp.direction {
            Direction::Min => Sense::Minimize,
            Direction::Max => Sense::Maximize,
        },
        c,
        a_ineq,
        b_ineq,
        vec![eq],
        vec![1.0],
        bounds,
    )
}

/// Everything the bound computation produces.
#[derive(Debug, Clone)]
pub struct BoundsResult {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Minimizing gain vector `γ_*` (vertex of the gain box).
    pub gamma_star_low: Vec<f64>,
    /// Maximizing gain vector `γ^*`.
    pub gamma_star_high: Vec<f64>,
    /// Extremal normalized eigenvectors with `α_min = ν_under · x0`,
    /// `α_max = ν_over · x0`.
    pub nu_under: Vec<f64>,
    pub nu_over: Vec<f64>,
    /// `min(x0)` / `max(x0)`.
    pub conservative_low: f64,
    pub conservative_high: f64,
    /// Largest pre-snap distance of any recovered gain from its interval
    /// endpoint (solver diagnostic; vertex optimality keeps it tiny).
    pub gamma_snap_error: f64,
}

/// Componentwise min and max of the initial opinions.
pub fn conservative_bounds(x0: &[f64]) -> (f64, f64) {
    let lo = x0.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Solve both extremal programs for a network, recovering gains and
/// eigenvectors. `net` must be strongly connected.
pub fn solve_bounds(net: &Network, x0: &[f64], spec: &GammaSpec) -> Result<BoundsResult, BoundsError> {
    let nu = left_null_eigenvector(net)?.nu;
    solve_bounds_with_nu(net, &nu, x0, spec)
}

/// [`solve_bounds`] with a precomputed eigenvector (shared across many
/// initial conditions on a fixed network).
pub fn solve_bounds_with_nu(
    net: &Network,
    nu: &[f64],
    x0: &[f64],
    spec: &GammaSpec,
) -> Result<BoundsResult, BoundsError> {
    if x0.len() != net.n() {
        return Err(BoundsError::Dimension {
            expected: net.n(),
            got: x0.len(),
        });
    }
    let (alpha_min, gamma_star_low, snap_lo) = solve_bound_side(net, nu, x0, spec, Direction::Min)?;
    let (alpha_max, gamma_star_high, snap_hi) = solve_bound_side(net, nu, x0, spec, Direction::Max)?;
    let snap_err = snap_lo.max(snap_hi);
    let nu_under = scaled_eigenvector(nu, &gamma_star_low)?;
    let nu_over = scaled_eigenvector(nu, &gamma_star_high)?;
    let (conservative_low, conservative_high) = conservative_bounds(x0);

    let dot = |v: &[f64]| v.iter().zip(x0).map(|(a, b)| a * b).sum::<f64>();
    debug_assert!((dot(&nu_under) - alpha_min).abs() <= 1e-9);
    debug_assert!((dot(&nu_over) - alpha_max).abs() <= 1e-9);

    Ok(BoundsResult {
        alpha_min: dot(&nu_under),
        alpha_max: dot(&nu_over),
        gamma_star_low,
        gamma_star_high,
        nu_under,
        nu_over,
        conservative_low,
        conservative_high,
        gamma_snap_error: snap_err,
    })
}

/// Solve one extremal program, returning `(bound, γ, snap error)` with
/// the recovered gain vector snapped onto its interval endpoints.
pub fn solve_bound_side(
    net: &Network,
    nu: &[f64],
    x0: &[f64],
    spec: &GammaSpec,
    direction: Direction,
) -> Result<(f64, Vec<f64>, f64), BoundsError> {
    let boxc = PhiBox::from_spec(spec, net);
    let glo = spec.gamma_low(net);
    let ghi = spec.gamma_high(net);
    let lfp = build_lfp(nu, x0, &boxc, direction);
    let lp = charnes_cooper(&lfp)?;
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(BoundsError::BadLpStatus(sol.status));
    }
    let n = nu.len();
    let tau = sol.z[n];
    if tau <= TAU_MIN * (1.0 + 1e-6) {
        return Err(BoundsError::DegenerateTau(tau));
    }
    // φ = χ/τ, γ = 1/φ, snapped onto the interval endpoints
    let mut snap_err: f64 = 0.0;
    let mut gamma = Vec::with_capacity(n);
    for i in 0..n {
        let phi = sol.z[i] / tau;
        let g = 1.0 / phi;
        let (dlo, dhi) = ((g - glo[i]).abs(), (g - ghi[i]).abs());
        let snapped = if dlo <= dhi { glo[i] } else { ghi[i] };
        snap_err = snap_err.max(dlo.min(dhi));
        gamma.push(if dlo.min(dhi) <= SNAP_TOL { snapped } else { g });
    }
    Ok((sol.objective, gamma, snap_err))
}

/// Exhaustive corner enumeration of the fractional objective; the
/// independent check for the LP route. Rejects `n > VERTEX_ORACLE_MAX_N`.
pub fn vertex_oracle(net: &Network, x0: &[f64], spec: &GammaSpec) -> Result<(f64, f64), BoundsError> {
    let nu = left_null_eigenvector(net)?.nu;
    let boxc = PhiBox::from_spec(spec, net);
    vertex_oracle_box(&nu, x0, &boxc)
}

/// Corner enumeration over an explicit φ box.
pub fn vertex_oracle_box(nu: &[f64], x0: &[f64], boxc: &PhiBox) -> Result<(f64, f64), BoundsError> {
    let n = nu.len();
    if n > VERTEX_ORACLE_MAX_N {
        return Err(BoundsError::OracleTooLarge {
            n,
            max: VERTEX_ORACLE_MAX_N,
        });
    }
    if x0.len() != n || boxc.n() != n {
        return Err(BoundsError::Dimension {
            expected: n,
            got: x0.len().min(boxc.n()),
        });
    }
    let lfp = build_lfp(nu, x0, boxc, Direction::Min);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut phi = vec![0.0; n];
    for mask in 0u32..(1u32 << n) {
        for i in 0..n {
            phi[i] = if mask >> i & 1 == 1 {
                boxc.phi_high[i]
            } else {
                boxc.phi_low[i]
            };
        }
        let v = lfp.eval(&phi);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}
