//! Interestingness classification of images from hand-crafted cues.
//!
//! Feature sets of the same type are fused with discriminant correlation
//! analysis, each cue group gets its own kernel, and SimpleMKL learns the
//! kernel weights jointly with an SVM. The [`pipeline`] module wires these
//! pieces into the stages exposed by the `dcamkl` binary.

pub mod dataset;
pub mod error;
pub mod features;
pub mod fusion;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod mkl;
pub mod pipeline;
pub mod svm;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/fusion.md")]
    mod fusion {}
    #[doc = include_str!("../../../book/src/svm.md")]
    mod svm {}
    #[doc = include_str!("../../../book/src/mkl.md")]
    mod mkl {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/pipeline.md")]
    mod pipeline {}
}
