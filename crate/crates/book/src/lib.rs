//! The guide in `book/`, compiled so that every snippet runs under
//! `cargo test --doc`. One module per chapter keeps failures traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/log-weights.md")]
pub mod log_weights {}
#[doc = include_str!("../../../book/src/hat-functions.md")]
pub mod hat_functions {}
#[doc = include_str!("../../../book/src/lines.md")]
pub mod lines {}
#[doc = include_str!("../../../book/src/extension-cost.md")]
pub mod extension_cost {}
#[doc = include_str!("../../../book/src/bv-lines.md")]
pub mod bv_lines {}
#[doc = include_str!("../../../book/src/indicators.md")]
pub mod indicators {}
#[doc = include_str!("../../../book/src/product.md")]
pub mod product {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
