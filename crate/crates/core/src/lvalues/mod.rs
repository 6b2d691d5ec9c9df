//! Complex-analytic backend: periods, twisted L-values at s = 1, and the
//! lambda tables built from them.

pub mod afe;
pub mod build;
pub mod periods;
pub mod table;

pub use table::LambdaTable;
