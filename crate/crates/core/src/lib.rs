//! Values of finite zero-sum stochastic games under general discounting
//! densities, and numerical diagnostics for the equivalence of Cesàro, Abel,
//! shifted and scaled value families.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod games;
pub mod minimax;
pub mod tauberian;
pub mod valuation;
