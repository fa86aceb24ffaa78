//! Multilevel channel polarization over finite Abelian groups.
//!
//! Build channels whose input alphabet is a group `Z_{d1} x ... x Z_{dk}`,
//! apply the group-based minus/plus transforms, and classify synthetic
//! channels by the subgroup whose cosets they resolve.

// Negated comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod group;
pub mod lab;
pub mod reduce;
pub mod symmetry;
pub mod transform;
pub mod zoo;

pub use channel::{classify, determination_check, Channel, Classification, Classifier, DeterminationReport};
pub use error::{Error, Result};
pub use group::{Automorphism, CosetPartition, GroupSpec, Subgroup, DEFAULT_MAX_ORDER};
pub use symmetry::{is_automorphic_symmetric, SymmetryVerdict};
pub use transform::{apply_sequence, erasure_step, minus, plus, ErasureState, Sign, SignSequence, TransformOptions};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/groups.md")]
    mod groups {}
    #[doc = include_str!("../../../book/src/channels.md")]
    mod channels {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/zoo.md")]
    mod zoo {}
    #[doc = include_str!("../../../book/src/polarization.md")]
    mod polarization {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
