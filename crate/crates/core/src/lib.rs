//! Frequency diverse array (FDA) transmit beampattern simulation.
//!
//! An FDA offsets the carrier of element `m` by `Δf_m`. Observed in
//! retarded time `t′ = t − r/c`, the transmitted field is a function of
//! `(t′, θ)` only, and a uniform offset makes the mainlobe sweep the
//! azimuth sector during the pulse. This crate provides
//!
//! * [`array`]: array geometry, offset plans, weights and steering vectors,
//! * [`waveform`]: unit-energy envelopes, chirp banks and offset codings,
//! * [`instant`]: exact element-sum field, closed-form instantaneous
//!   pattern and the legacy range-dependent array factor,
//! * [`scan`]: scan-speed/volume/beamwidth predictions, peak-trajectory
//!   extraction and phase-schedule design,
//! * [`integral`]: pulse-integrated pattern via waveform covariance and
//!   its comparison with a co-located MIMO beampattern.

// negated float comparisons reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod error;
pub mod grid;
pub mod instant;
pub mod integral;
pub mod quadrature;
pub mod scan;
pub mod waveform;

pub use array::{
    reference_wavelength, steered_weights, steering_angle, steering_fo_angle, steering_time,
    ArrayConfig, EvalPoint, FrequencyPlan, ModulationForm, TimeModulation, WeightOrigin,
    WeightVector,
};
pub use error::{Error, Result};
pub use grid::{BeampatternGrid, Normalization};
pub use instant::{
    field_exact, fitb_closed_form, legacy_array_factor, sweep_grid, zero_time_cut, Engine,
};
pub use integral::{
    compare_fgtb_mimo, covariance, equivalence_fo_bounds, fgtb, mimo_beampattern,
    CovarianceFlavor, CovarianceMatrix, QuadratureSettings,
};
pub use scan::{
    beamwidth, design_phase_schedule, measure_peak_trajectory, predict_peak_direction,
    scan_speed, scan_volume, PhaseSchedule, ScanReport, ScheduleSegment,
};
pub use waveform::{generate_offsets, make_chirp_bank, sample_waveform, BasebandWaveform, FoCoding};
