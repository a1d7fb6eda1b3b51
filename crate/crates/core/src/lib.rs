pub mod bias;
pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod ranking;
pub mod recommenders;
pub mod rerank;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/bias.md")]
    mod bias {}
    #[doc = include_str!("../../../book/src/recommenders.md")]
    mod recommenders {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/rerankers.md")]
    mod rerankers {}
    #[doc = include_str!("../../../book/src/harness.md")]
    mod harness {}
    #[doc = include_str!("../../../book/src/plotting.md")]
    mod plotting {}
}
