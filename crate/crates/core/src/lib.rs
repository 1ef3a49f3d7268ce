//! Exact computer algebra over F_p for graded p-polar algebras and the
//! group-scheme invariants attached to them: p-typical Witt and co-Witt
//! vectors, unipotent Dieudonne modules, F-module barcodes, truncated
//! bicommutative Hopf algebras, and a Dyer-Lashof Adem rewriting engine.
//!
//! Everything is truncated at an explicit maximum degree `D` and computed
//! degreewise; products only raise degree, so results in degrees `<= D` are
//! exact.

pub mod error;
pub mod fp;
pub mod intpoly;
pub mod matrix;

pub mod graded;
pub mod polar;
pub mod witt;
pub mod fmodule;
pub mod dieudonne;
pub mod hopf;
pub mod dl;
pub mod json;

pub use error::{Error, Result};
pub use intpoly::IntPoly;
pub use matrix::FpMatrix;
