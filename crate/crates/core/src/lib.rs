//! Bounds and impulsive control for consensus under uncertain gains.
//!
//! A library for multi-agent opinion dynamics whose interaction strengths
//! carry a bounded time-varying uncertainty. It computes practical lower
//! and upper bounds on the consensus value by linear programming, and
//! allocates a one-shot marketing budget that steers the bounded consensus
//! toward a target. Includes generators for directed scale-free test
//! networks and a reproducible experiment harness.
//!
//! Modules:
//! - [`netgraph`] — network construction, generation, serialization
//! - [`spectral`] — left null eigenvectors of the Laplacian
//! - [`dynamics`] — the uncertain opinion dynamics and gain models
//! - [`linprog`] — dense simplex solver
//! - [`bounds`] — consensus bounds via Charnes-Cooper LPs
//! - [`control`] — budget allocation strategies
//! - [`harness`] — seeded experiment campaigns with CSV output

pub mod bounds;
pub mod control;
pub mod dynamics;
pub mod files;
pub mod harness;
pub mod linprog;
pub mod netgraph;
pub mod rng;
pub mod spectral;
