//! Smooth cutoffs and the functional calculus of Hermitian matrices.

mod calculus;
mod cutoff;

pub use calculus::{
    apply_eig, apply_fn, apply_hs, apply_hs_with, check_decreasing_left_class, factorize_cutoff, gershgorin, spectral_projection,
    AlmostAnalyticExtension, Factorization, HsOptions, SpectralProjection,
};
pub use cutoff::{make_cutoff, poly_ramp_jet, ramp, ramp_jet, OrderScan, SmoothCutoff, Support};
