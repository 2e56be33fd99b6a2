//! Time evolution and the dynamical experiments.

mod fit;
mod run;

pub use fit::{fit_decay, fit_loglog, trend_slope, DecayFit, DEFAULT_FLOOR, MAX_RMS};
pub use run::{evolve, prepare_state, GaussianSeed, PreparedState, PropagationRun, Propagator, MIN_PREPARED_NORM, TRUST_MASS};
mod experiments;
pub use experiments::{
    free_particle_baseline, lemma21_residual_experiment, momentum_filtered_seed, spread, thm11_decay_experiment, thm12_position_experiment,
    x2_ts, BaselineReport, Lemma21Report, SpectralSandwich, Thm11Params, Thm11Report, Thm12Params, Thm12Report,
};
mod probes;
pub use probes::{
    dt_norm_scan, heisenberg_derivative_check, local_decay_probe, pole_divergence, ruelle_time_average, spacing_floor, x2_growth_check,
    DtNormScan, HeisenbergReport, LocalDecayReport, PoleDivergence, ResolventProbe, RuelleReport, TrackedObservable, X2Growth,
    HEISENBERG_TOL,
};
