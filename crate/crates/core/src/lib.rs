//! Closed-form population gradients, Hessians and gradient flows for Sobolev-trained
//! ReLU units, with Monte-Carlo and numeric-eigensolver oracles.

pub mod error;
pub mod num;

pub use error::{Error, Result};
pub mod relu1;
pub mod relusq;
pub mod multinode;
pub mod mc;
pub mod linear;
pub mod spectral;

use serde::{Deserialize, Serialize};

/// Training objective: plain value matching or value plus first-derivative matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L2,
    H1,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::L2 => "l2",
            LossKind::H1 => "h1",
        }
    }
}
