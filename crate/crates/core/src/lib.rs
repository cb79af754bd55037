//! Energy valley optimization and wrapper feature selection for flow-based
//! intrusion detection.
//!
//! The crate is organised bottom-up:
//!
//! - [`evo`] is a box-bounded, population-based minimiser driven by the
//!   alpha/gamma/beta decay updates of the energy valley optimizer.
//! - [`select`] encodes binary feature masks as optimizer particles and
//!   scores them with a weighted accuracy/FPR/FNR cost.
//! - [`classifiers`] holds the four reference learners (KNN, CART, random
//!   forest, RBF-kernel SVM) behind one train/predict contract.
//! - [`data`] ingests CICFlowMeter CSV exports, cleans and scales them,
//!   balances classes by downsampling and produces stratified splits.
//! - [`metrics`] builds confusion matrices and the derived scores.
//! - [`experiment`] wires everything into the before/after feature
//!   selection grid and the optimizer benchmark harness.
//!
//! Runnable walkthroughs for each capability live in the crate's
//! `examples/` directory (`cargo run --release --example <name>`).

pub mod classifiers;
pub mod data;
pub mod error;
pub mod evo;
pub mod experiment;
pub mod functions;
pub mod metrics;
pub mod rng;
pub mod select;
pub mod synth;

pub use classifiers::{ClassifierSpec, Model};
pub use data::{Dataset, DatasetKind};
pub use error::{Error, Result};
pub use evo::{optimize, Bounds, EvoConfig, OptResult};
pub use metrics::{ConfusionMatrix, Metrics};
pub use select::{select_features, CostWeights, FeatureMask, FsResult};
