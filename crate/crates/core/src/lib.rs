//! Slow-time code-division multiplexing (ST-CDM) MIMO radar processing.
//!
//! The crate covers the full chain at one range bin of a colocated MIMO
//! radar whose transmitters are separated by per-pulse phase codes:
//!
//! * [`model`]: array geometry, targets, slow-time codes, steering vectors
//!   and snapshot synthesis.
//! * [`sequences`]: random, Zadoff-Chu and P4 slow-time code generators.
//! * [`fim`]: exact Fisher information, the Cramér-Rao bound and trace metrics.
//! * [`codeopt`]: CRB-driven code design through a semidefinite relaxation
//!   over the per-pulse code Gram matrices.
//! * [`relax`]: FFT-accelerated RELAX maximum-likelihood angle-Doppler
//!   estimation with BIC model-order selection.
//! * [`imaging`]: matched-filter angle-Doppler images.
//! * [`experiments`]: scenarios, Monte-Carlo RMSE/RCRB sweeps and the
//!   end-to-end reproduction workflow.
//! * [`cli`]: the `stcdm` command-line front end.

pub mod cli;
pub mod codeopt;
pub mod error;
pub mod experiments;
pub mod fim;
pub mod imaging;
pub mod io;
pub mod model;
pub mod relax;
pub mod sequences;

pub use error::{Error, Result};
pub use model::{ArrayConfig, CodeMatrix, Snapshot, Target, TargetScene, C64};
