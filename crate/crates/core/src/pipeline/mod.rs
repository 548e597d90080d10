//! End-to-end workflow: extraction, fusion, training, prediction, evaluation.

pub mod compare;
pub mod config;
pub mod corpus;
pub mod extract;
pub mod fuse;
pub mod manifest;
pub mod model;
pub mod run;
pub mod synthetic;

pub use compare::*;
pub use config::*;
pub use corpus::*;
pub use extract::*;
pub use fuse::*;
pub use manifest::*;
pub use model::*;
pub use run::*;
pub use synthetic::*;
