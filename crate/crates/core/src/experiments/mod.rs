//! Experiment layer: mixing profiles, cutoff sweeps, scenario files, and
//! the artifact-writing runner behind the command line.

pub mod profile;

pub use profile::{
    default_horizon_ld, default_horizon_prox, geometric_time_grid, measure_tmix, mixing_window,
    profile_closed_form_meanshift, profile_closed_form_ou, profile_prox_recursion,
    ClosedFormFamily, MixingProfile, ProfileSource, WindowMeasurement,
};
