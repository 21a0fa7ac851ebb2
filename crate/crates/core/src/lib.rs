//! Iteration of transcendental entire functions at double-exponential
//! magnitudes, with maximum-modulus ladders, covering checks and
//! classification of fast escaping points.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cover;
pub mod efun;
pub mod escape;
pub mod hardy;
pub mod maxmod;
pub mod xnum;

pub use efun::{EvalResult, FnKind, FunctionSpec};
pub use xnum::{LogComplex, SignedTower, TowerReal, XnumError};
