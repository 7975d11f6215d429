//! Left null eigenvector of the Laplacian and its gain-scaled variants.
//!
//! For a strongly connected network the Laplacian has a unique normalized
//! left eigenvector `ν` at eigenvalue 0 with all entries positive; it is
//! the vector of asymptotic influence weights in the linear case. For any
//! positive gain vector `γ`, the matrix `diag(γ)L` has the closed-form
//! left null eigenvector `ν_γ ∝ ν_i / γ_i`.

use crate::netgraph::Network;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Max-norm residual allowed on `νᵀL` before the solve is considered failed.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Tolerance on `Σ ν_i = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("eigenvector solve left residual {residual:.3e} above tolerance {tol:.3e}")]
    SingularSystem { residual: f64, tol: f64 },
    #[error("eigenvector component {index} is non-positive ({value:.3e}); network is not strongly connected")]
    NonPositive { index: usize, value: f64 },
    #[error("gain component {index} is non-positive ({value:.3e})")]
    NonPositiveGamma { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Normalized left null eigenvector together with its verified residual.
#[derive(Debug, Clone)]
pub struct EigenCentrality {
    /// `ν` with `ν · 1 = 1` and `ν_i > 0`.
    pub nu: Vec<f64>,
    /// `‖νᵀL‖_∞` as measured after the solve.
    pub residual: f64,
}

/// Solve `νᵀL = 0`, `ν · 1 = 1` for a strongly connected network.
///
/// Solves the augmented system `[Lᵀ; 1ᵀ] ν = [0 … 0, 1]ᵀ` in the
/// least-squares sense, then checks positivity and the left residual.
pub fn left_null_eigenvector(net: &Network) -> Result<EigenCentrality, SpectralError> {
    left_null_eigenvector_with_tol(net, RESIDUAL_TOL)
}

/// [`left_null_eigenvector`] with a caller-chosen residual tolerance.
pub fn left_null_eigenvector_with_tol(
    net: &Network,
    residual_tol: f64,
) -> Result<EigenCentrality, SpectralError> {
    let n = net.n();
    let l = net.laplacian_dense();
    // Rows 0..n hold Lᵀ, the last row is all ones.
    let mut m = DMatrix::<f64>::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            m[(j, i)] = l[i * n + j];
        }
    }
    for j in 0..n {
        m[(n, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n + 1);
    b[n] = 1.0;

    let svd = m.svd(true, true);
    let nu = svd
        .solve(&b, 1e-14)
        .map_err(|_| SpectralError::SingularSystem {
            residual: f64::INFINITY,
            tol: residual_tol,
        })?;

    let sum: f64 = nu.iter().sum();
    let nu: Vec<f64> = nu.iter().map(|v| v / sum).collect();
    for (i, &v) in nu.iter().enumerate() {
        if !(v > 0.0) {
            return Err(SpectralError::NonPositive { index: i, value: v });
        }
    }
    let residual = left_residual(&nu, net, None);
    if residual > residual_tol {
        return Err(SpectralError::SingularSystem {
            residual,
            tol: residual_tol,
        });
    }
    Ok(EigenCentrality { nu, residual })
}

/// `‖vᵀ diag(γ) L‖_∞`, with `γ = 1` when absent.
pub fn left_residual(v: &[f64], net: &Network, gamma: Option<&[f64]>) -> f64 {
    let n = net.n();
    let mut row = vec![0.0; n];
    // (vᵀ diag(γ) L)_j = Σ_i v_i γ_i l_ij
    for (i, j, w) in net.arcs() {
        let g = gamma.map_or(1.0, |g| g[i]);
        row[j] -= v[i] * g * w;
        row[i] += v[i] * g * w;
    }
    row.iter().fold(0.0, |acc, r| acc.max(r.abs()))
}

/// Closed-form left null eigenvector of `diag(γ)L`:
/// `(ν_γ)_i = (ν_i / γ_i) / Σ_j (ν_j / γ_j)`.
///
/// Invariant under positive rescaling of `γ`.
pub fn scaled_eigenvector(nu: &[f64], gamma: &[f64]) -> Result<Vec<f64>, SpectralError> {
    if nu.len() != gamma.len() {
        return Err(SpectralError::Dimension {
            expected: nu.len(),
            got: gamma.len(),
        });
    }
    for (i, &g) in gamma.iter().enumerate() {
        if !(g > 0.0) || !g.is_finite() {
            return Err(SpectralError::NonPositiveGamma { index: i, value: g });
        }
    }
    let weights: Vec<f64> = nu.iter().zip(gamma).map(|(&v, &g)| v / g).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{directify, generate_ba, Network};
    use crate::rng::stream_rng;
    use rand::Rng;

    fn two_node() -> Network {
        Network::from_arcs(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    fn directed_ring(n: usize) -> Network {
        let arcs: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Network::from_arcs(n, &arcs).unwrap()
    }

    /// Independent oracle: null space of `Lᵀ` from a full SVD of the dense
    /// Laplacian, i.e. the eigenvector at the eigenvalue nearest zero.
    fn nullspace_oracle(net: &Network) -> Vec<f64> {
        let n = net.n();
        let l = net.laplacian_dense();
        let mut lt = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                lt[(j, i)] = l[i * n + j];
            }
        }
        let svd = lt.clone().svd(true, true);
        let v_t = svd.v_t.unwrap();
        // right-singular vector for the smallest singular value
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let v = v_t.row(k);
        let sum: f64 = v.iter().sum();
        v.iter().map(|x| x / sum).collect()
    }

    #[test]
    fn symmetric_two_node_is_uniform() {
        let e = left_null_eigenvector(&two_node()).unwrap();
        assert!((e.nu[0] - 0.5).abs() <= 1e-12);
        assert!((e.nu[1] - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn directed_ring_is_uniform() {
        let e = left_null_eigenvector(&directed_ring(3)).unwrap();
        for &v in &e.nu {
            assert!((v - 1.0 / 3.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_networks_match_nullspace_oracle() {
        let mut rng = stream_rng(7, 0);
        for t in 0..30 {
            let n = rng.gen_range(6..=12);
            let edges = crate::netgraph::generate_ba_with(n, 2, &mut rng).unwrap();
            let net = crate::netgraph::directify_with(&edges, 0.2, &mut rng).unwrap().network;
            let e = left_null_eigenvector(&net).unwrap();
            let oracle = nullspace_oracle(&net);
            for i in 0..n {
                assert!(
                    (e.nu[i] - oracle[i]).abs() <= 1e-8,
                    "trial {t}: component {i}: {} vs oracle {}",
                    e.nu[i],
                    oracle[i]
                );
            }
        }
    }

    #[test]
    fn eigenvector_invariants_hold() {
        let net = directify(&generate_ba(40, 2, 3).unwrap(), 0.2, 9).unwrap().network;
        let e = left_null_eigenvector(&net).unwrap();
        let sum: f64 = e.nu.iter().sum();
        assert!((sum - 1.0).abs() <= NORMALIZATION_TOL);
        assert!(e.residual <= RESIDUAL_TOL);
        assert!(e.nu.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn non_strongly_connected_is_rejected() {
        // two components joined one-way
        let net = Network::from_arcs(
            4,
            &[(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.0), (3, 2, 1.0), (0, 2, 1.0)],
        )
        .unwrap();
        assert!(left_null_eigenvector(&net).is_err());
    }

    #[test]
    fn scaled_uniform_gamma_is_identity() {
        let net = directify(&generate_ba(12, 2, 1).unwrap(), 0.2, 2).unwrap().network;
        let e = left_null_eigenvector(&net).unwrap();
        for c in [0.05, 1.0, 10.0] {
            let gamma = vec![c; net.n()];
            let s = scaled_eigenvector(&e.nu, &gamma).unwrap();
            for i in 0..net.n() {
                assert!((s[i] - e.nu[i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn scaled_eigenvector_small_example() {
        let s = scaled_eigenvector(&[0.5, 0.5], &[0.25, 0.5]).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() <= 1e-15);
        assert!((s[1] - 1.0 / 3.0).abs() <= 1e-15);
    }

    #[test]
    fn scaled_eigenvector_rejects_nonpositive_gamma() {
        assert!(scaled_eigenvector(&[0.5, 0.5], &[0.25, 0.0]).is_err());
        assert!(scaled_eigenvector(&[0.5, 0.5], &[0.25, -1.0]).is_err());
    }

    #[test]
    fn scaled_eigenvector_left_null_property() {
        let mut rng = stream_rng(8, 1);
        for _ in 0..20 {
            let n = rng.gen_range(5..=9);
            let edges = crate::netgraph::generate_ba_with(n, 2, &mut rng).unwrap();
            let net = crate::netgraph::directify_with(&edges, 0.2, &mut rng).unwrap().network;
            let e = left_null_eigenvector(&net).unwrap();
            let gamma: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.3)).collect();
            let s = scaled_eigenvector(&e.nu, &gamma).unwrap();
            assert!(left_residual(&s, &net, Some(&gamma)) <= 1e-10);
        }
    }

    #[test]
    fn scale_invariance_under_gamma_rescaling() {
        let net = directify(&generate_ba(15, 2, 4).unwrap(), 0.2, 5).unwrap().network;
        let e = left_null_eigenvector(&net).unwrap();
        let mut rng = stream_rng(8, 2);
        let gamma: Vec<f64> = (0..net.n()).map(|_| rng.gen_range(0.02..0.25)).collect();
        let base = scaled_eigenvector(&e.nu, &gamma).unwrap();
        for c in [0.1, 1.0, 10.0] {
            let scaled: Vec<f64> = gamma.iter().map(|g| g * c).collect();
            let s = scaled_eigenvector(&e.nu, &scaled).unwrap();
            for i in 0..net.n() {
                assert!((s[i] - base[i]).abs() <= 1e-12);
            }
        }
    }
}
