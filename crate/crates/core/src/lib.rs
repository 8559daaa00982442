//! Curvature engine and residual verifier for gradient ρ-Einstein solitons.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: scalar expressions, parser, exact symbolic differentiation
//! * [`chart`], [`geometry`]: generic pointwise curvature of any chart metric
//! * [`product`]: doubly warped, warped, GRW and standard static builders with
//!   closed-form curvature evaluators
//! * [`soliton`]: soliton residuals, classification and factor decompositions
//! * [`walker`]: three-dimensional Lorentzian Walker metrics
//! * [`manifest`], [`sampling`], [`checks`], [`report`]: the verification CLI

pub mod chart;
pub mod checks;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod manifest;
pub mod product;
pub mod report;
pub mod sampling;
pub mod soliton;
pub mod exec;
pub mod tensor;
pub mod walker;

pub use chart::ChartMetric;
pub use error::{Error, Result};
pub use expr::{parse_expr, Expr, ParamBinding, Scope};
pub use geometry::{FieldJet, Geometry, ScalarField};
pub use tensor::{TensorValue, Variance};
