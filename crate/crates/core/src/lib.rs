//! Optimal margin distribution machines.
//!
//! Two margin-distribution classifiers and their soft-margin SVM baseline:
//!
//! * **ODMᴸ** adds a margin-variance penalty and a margin-mean reward to the
//!   SVM objective.
//! * **ODM** fixes the margin mean at 1 and penalises squared deviations
//!   outside a `D`-wide band, with separate weights below and above it.
//!
//! Kernel models are trained by dual coordinate descent on a box-constrained
//! QP ([`boxqp`]); linear models can also be trained in the primal with
//! SVRG ([`odm_linear`]). [`analysis`] provides margin statistics and
//! leave-one-out bounds derived from the dual solution, and [`selection`]
//! the grid-search and repeated-split evaluation protocol.

pub mod analysis;
pub mod boxqp;
pub mod data;
pub mod error;
pub mod kernel;
pub mod model;
pub mod odm_dual;
pub mod odm_linear;
pub mod selection;

pub use analysis::{loo_bound_odm, loo_bound_odml, loo_exact, margin_report, LooBoundReport, MarginReport};
pub use boxqp::{dcd_solve, BoxQpProblem, QpSolution, SolverOptions};
pub use data::{parse_libsvm, read_libsvm, Dataset, Normalizer, SparseVector};
pub use error::{OdmError, Result};
pub use kernel::{gram, GramMatrix, KernelSpec};
pub use model::{Classifier, Model};
pub use odm_dual::{train_kernel, OdmParams, OdmlParams, Params, TrainOptions, TrainedModel, Variant};
pub use odm_linear::{svrg_train, train_linear, LinearModel, SnapshotRule, SvrgOptions};
