//! Numerical construction, analysis and classification of time-like surfaces with
//! light-like `(∂/∂z)ᵀ` in static space-times `L³₁(c) ×_f I`.

// Tensor code indexes several arrays by the same loop variable; negated float comparisons
// make NaN fail checks.
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::redundant_guards,
    clippy::should_implement_trait,
    clippy::type_complexity
)]

pub mod cartan;
pub mod classify;
pub mod error;
pub mod exprlang;
pub mod families;
pub mod immersion;
pub mod numkit;
pub mod spaceforms;
pub mod spacetime;
pub mod verify;

pub use error::{Error, Result};
