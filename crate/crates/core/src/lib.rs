pub mod cli;
pub mod error;
pub mod kernel;
pub mod numerics;
pub mod product_identities;
pub mod series;
pub mod transform;
pub mod zeros;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/precision.md")]
    pub struct Precision;
    #[doc = include_str!("../../../book/src/kernel.md")]
    pub struct Kernel;
    #[doc = include_str!("../../../book/src/evaluation.md")]
    pub struct Evaluation;
    #[doc = include_str!("../../../book/src/series.md")]
    pub struct Series;
    #[doc = include_str!("../../../book/src/zeros.md")]
    pub struct Zeros;
    #[doc = include_str!("../../../book/src/products.md")]
    pub struct Products;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
