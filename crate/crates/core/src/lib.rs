//! Event-triggered control with an enforced minimum inter-transmission time.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core:
//!
//! - [`linalg`]: symmetric eigenvalues, spectral norm, Lyapunov solve, Hurwitz test.
//! - [`trigger`]: the dwell-time bound [`trigger::masp`], the ζ transit time and
//!   the flow/jump set predicates.
//! - [`hybrid_sim`]: RK4 flow with event localization and jump resets.
//! - [`lti_design`]: closed-loop assembly and a constructive LMI certificate.
//! - [`systems`]: closed loops, certificates and a sampled certificate checker.
//! - [`montecarlo`]: seeded batches and inter-transmission statistics.
//!
//! File formats, configuration and the command-line front end live in the
//! `etc-lab` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` is deliberate throughout: NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod hybrid_sim;
pub mod linalg;
pub mod lti_design;
pub mod montecarlo;
pub mod sampling;
pub mod systems;
pub mod trigger;

pub use hybrid_sim::{simulate, HybridSolution, HybridState, SimError, SimSettings};
pub use linalg::Matrix;
pub use systems::{Certificate, ClosedLoop};
pub use trigger::{masp, TriggerConfig, TriggerMode};
