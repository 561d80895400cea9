//! Special functions and seeded samplers.
//!
//! Everything here is a pure function of its arguments and, for the
//! samplers, of the generator state. Generators come from [`RngStream`].

mod beta;
mod normal;
mod rng;
mod sample;

pub use beta::{inv_reg_inc_beta, log_gamma, reg_inc_beta, IncBeta};
pub use normal::{std_normal_cdf, std_normal_quantile};
pub use rng::{RngStream, StreamRng};
pub use sample::{
    sample_beta, sample_exponential, sample_gamma, sample_ordered_uniforms, sample_uniform_simplex,
    OrderedUniforms,
};

pub(crate) use normal::{phi, phi_inv};
pub(crate) use sample::{fill_ordered_uniforms, fill_uniform_simplex, open01};
