//! Semi-inner products, operator classes, normal forms, left reflections,
//! John and Löwner ellipsoids, and isometry groups of finite-dimensional
//! real normed spaces.
//!
//! Start from a [`NormModel`], wrap it in a [`SipContext`], and pass that
//! context to the functions in the other modules.

// NaN-rejecting checks are written as `!(x < bound)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod normspace;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use normspace::{NormModel, SpaceClassification};
pub mod sip;
pub use sip::{Side, SipContext};
pub mod operators;
pub use operators::{LinearOperator, PredicateReport, Sampling};
pub mod ortho;
pub mod spectral;
pub mod reflect;
pub mod ellipsoid;
pub mod symmetry;
pub mod cli;
