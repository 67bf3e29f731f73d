//! Picard iterates on finitely supported data and the ill-posedness witnesses.
//!
//! Fourier transforms follow `f̂(ξ) = ∫ e^{−ixξ} f(x) dx` with the inverse
//! measure `(1/2πσ)Σ`, and `∂x` acts as `iξ`.

pub mod exp_sum;
pub mod spectrum;
pub mod witness;

pub use exp_sum::{duhamel, ExponentialSum};
pub use spectrum::{gamma3_g, picard_iterates, taylor, PicardIterates, SparseSpectrum, TimeSpectrum};
pub use witness::{
    biased_pair, build_witness, evaluate_witness, growth_exponent, growth_exponent_with, nearint, GrowthReport,
    GrowthRow, Iterate, WitnessCase, WitnessEvaluation, WitnessFamily, WitnessReport,
};
