#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cone;
pub mod curvature_lab;
pub mod config;
pub mod error;
pub mod gallery;
pub mod jet;
pub mod linalg;
pub mod random;
pub mod reduction;
pub mod report;
pub mod sasakian;
pub mod tensor;
pub mod tolerances;
pub mod torus;

pub use error::{GeometryError, Result};
