//! Discriminative adversarial domain generalization with meta-learning based
//! cross-domain validation.
//!
//! The crate trains a feature extractor `θ`, classifier `φ` and domain
//! discriminator `ψ` on several source domains so that the classifier
//! generalises to an unseen target domain. Two mechanisms work together:
//!
//! * adversarial learning through a gradient reversal layer ([`grl`]), which
//!   pushes `θ` towards features the discriminator cannot tell apart;
//! * meta-learning cross-domain validation ([`meta`]), which optimises the
//!   classifier for loss on a held-out source domain after a simulated
//!   training step.
//!
//! [`trainer`] runs the full method and its ablations, [`data`] provides
//! synthetic and CSV datasets with leave-one-domain-out splits, and
//! [`eval`] and [`report`] run experiment grids and write result tables.

// `!(x >= 0.0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod grl;
pub mod loss;
pub mod meta;
pub mod model;
pub mod report;
pub mod scalar;
pub mod tensor;
pub mod trainer;

pub use config::{ConfigError, RunConfig};
pub use error::{Error, Result};
pub use meta::OuterMode;
pub use model::{ArchSpec, Batch, ModelParams};
pub use scalar::{Dual, Scalar};
pub use trainer::{HyperParams, Variant};
