//! Large-time energy statistics of stochastic harmonic networks and RC circuits.
//!
//! The energy increment `Q_t = X_t·L X_t − X_0·L X_0` of a stationary Gaussian
//! process converges in law to a variance-gamma distribution fixed by the
//! eigenvalues of `N = 2 L^{1/2} M L^{1/2}`, and satisfies a large deviation
//! principle with rate `|θ| / λ_max`. This crate computes those laws exactly
//! and checks them against Monte Carlo sampling of the underlying processes.

pub mod linalg;
pub mod networks;
pub mod ou;
pub mod quadrature;
pub mod specfun;
pub mod statlab;
pub mod vargamma;
