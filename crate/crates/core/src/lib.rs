//! Numerical toolkit for weighted exponential frames on sets of finite measure:
//! Beurling densities of combs, comb convolution inequalities, frame-bound
//! estimation, explicit frame constructions and Zak-transform Gabor checks.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity, clippy::too_many_arguments)]

pub mod domain_sets;
pub mod error;
pub mod convolution_lab;
pub mod point_measures;
pub mod frame_analysis;
pub mod frame_construction;
pub mod gabor_zak;
pub mod io;
pub mod cli_reports;

pub use error::{Error, Result};
