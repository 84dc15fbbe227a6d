//! Shooting solver for radial solutions of `Δu + f(|x|) u^p = 0` in `R^n` and tools to
//! map how the behaviour of the solution depends on its central value `u(0) = alpha`.
//!
//! Every positive shot either crosses zero, decays like `r^{-(l+2)/(p-1)}` (slow decay) or
//! like `r^{2-n}` (rapid decay). [`scan::sweep`] classifies a grid of `alpha` values and
//! bisects each change of label.

// NaN must fail range guards, so `!(x >= 0.0)` is deliberate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod model;
pub mod ode;
pub mod pohozaev;
pub mod quad;
pub mod scan;
pub mod shoot;
pub mod stats;
pub mod weights;

pub use classify::{classify, classify_alpha, shoot_and_classify, Classification, Label};
pub use error::{Error, Result};
pub use model::{critical_exponent, gamma_star, Exponents, ProblemSpec, Tolerances};
pub use pohozaev::{identity_3_3, identity_4_1, PohozaevReport};
pub use scan::{sweep, StructureReport, SweepOptions};
pub use shoot::{integrate, Sample, Termination, Trajectory};
pub use weights::{BumpFunction, HypothesisReport, WeightFunction};
