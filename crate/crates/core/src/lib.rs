//! Source-to-source aspect weaving for a C99 subset.

pub mod autotune;
pub mod dsl;
pub mod explore;
pub mod fsutil;
pub mod frontend;
pub mod strategies;
pub mod weave;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/frontend.md")]
    mod frontend {}
    #[doc = include_str!("../../../book/src/aspects.md")]
    mod aspects {}
    #[doc = include_str!("../../../book/src/versions.md")]
    mod versions {}
    #[doc = include_str!("../../../book/src/memoization.md")]
    mod memoization {}
    #[doc = include_str!("../../../book/src/parallelization.md")]
    mod parallelization {}
    #[doc = include_str!("../../../book/src/autotuning.md")]
    mod autotuning {}
    #[doc = include_str!("../../../book/src/exploration.md")]
    mod exploration {}
}
