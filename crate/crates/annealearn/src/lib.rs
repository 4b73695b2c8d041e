//! Learn time-dependent Hamiltonian parameter schedules that drive an
//! N-qubit register from the uniform "flat" state into a chosen entangled
//! target state (Bell, GHZ, W), simulated by density-matrix evolution with
//! an imaginary-time annealing transform.
//!
//! The pieces, bottom up:
//!
//! - [`qops`]: dense complex linear algebra and N-qubit operator
//!   construction (Pauli embeddings, Hermitian matrix exponentials).
//! - [`states`]: flat/GHZ/W constructors and the parametrized broken-path
//!   state families with their spin observables.
//! - [`schedule`]: piecewise-constant parameter schedules, the tunneling and
//!   inverse-temperature ramps, and the constrained monotone parametrization.
//! - [`propagate`]: exact stepwise forward simulation and the
//!   interaction-picture (temperature) transform.
//! - [`adjoint`]: loss, exact discrete-adjoint gradients with a
//!   finite-difference oracle, gradient descent, and the size/path
//!   bootstrapping loops.
//! - [`harness`]: experiment configs, CSV/JSON persistence, the noise
//!   Monte Carlo, and everything the CLI exposes.
//!
//! The runnable `examples/` directory demonstrates each capability:
//! `cargo run --release --example train_flat_to_bell`, `bootstrap_sizes`,
//! `broken_path_y`, `w_state_paths`, `noise_robustness`, `monotone_anneal`,
//! and `gradient_check`.

pub mod adjoint;
pub mod error;
pub mod harness;
pub mod propagate;
pub mod qops;
pub mod schedule;
pub mod states;

pub use error::{Error, Result};
pub use qops::{C64, CMat, QubitCount};
