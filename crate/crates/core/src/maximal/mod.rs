//! Discretized maximal operators over rectangle families, segments and squares.

mod family;
mod grid;
pub mod gridio;
mod ops;

pub use family::{build_rect_family, enumerate_eccentric, CandidatePool, Enumeration, RectFamily};
pub use grid::{GridLayout, MaxField, ScalarField};
pub use ops::{
    eval_M_K_eps, eval_M_kappa, eval_M_v, eval_M_v_delta, kappa_directions, paint, rect_average, segment_average,
    square_average,
};
