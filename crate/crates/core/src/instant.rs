//! Instantaneous transmit beampatterns.
//!
//! Three evaluators are provided:
//!
//! * [`field_exact`] sums the element contributions with their exact phases
//!   (no quadratic-term approximation). It is the reference for everything else.
//! * [`fitb_closed_form`] is the Dirichlet-kernel approximation in retarded
//!   time `t′`, valid while `Δf·M²·d/c` is small.
//! * [`legacy_array_factor`] is the range-dependent array factor written in
//!   absolute time. It ignores the pulse window on purpose and exists only to
//!   contrast with the retarded-time model.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{phasor, ArrayConfig, EvalPoint, FrequencyPlan, WeightOrigin, WeightVector};
use crate::error::{Error, Result};
use crate::grid::{angle_axis, time_axis, BeampatternGrid, Normalization};
use crate::waveform::BasebandWaveform;

/// Threshold on `|sin Υ|` below which the kernel is replaced by its limit `M`.
pub const KERNEL_SINGULARITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Exact,
    ClosedForm,
}

/// `|sin(M·x) / sin(x)|`, with the removable singularity at `x = kπ` set to `M`.
pub fn dirichlet(num_elements: usize, x: f64) -> f64 {
    let den = x.sin();
    if den.abs() < KERNEL_SINGULARITY {
        return num_elements as f64;
    }
    ((num_elements as f64 * x).sin() / den).abs()
}

/// Array factor `Σ_m w_m · exp(j·2π·[χ_m(τ_m)·τ_m + f_c·m·d·sinθ/c])` with
/// `τ_m = t′ + m·d·sinθ/c`; for static plans `χ_m ≡ Δf_m`.
pub fn array_factor(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &[Complex64],
    retarded_time: f64,
    theta: f64,
) -> Complex64 {
    let f_c = config.carrier_freq();
    let tp = config.pulse_duration();
    weights
        .iter()
        .enumerate()
        .map(|(m, w)| {
            let delay = config.element_delay(m, theta);
            let tau = retarded_time + delay;
            w * phasor(plan.offset_cycles(m, tau, tp) + f_c * delay)
        })
        .sum()
}

/// Element field with per-element envelopes: `Σ_m w_m·s_m(t′)·a_m(t′, θ)`.
fn weighted_field(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &[Complex64],
    waveforms: &[BasebandWaveform],
    retarded_time: f64,
    theta: f64,
) -> Complex64 {
    if let [shared] = waveforms {
        return shared.sample(retarded_time)
            * array_factor(config, plan, weights, retarded_time, theta)
            * config.element_gain();
    }
    let f_c = config.carrier_freq();
    let tp = config.pulse_duration();
    let sum: Complex64 = weights
        .iter()
        .zip(waveforms)
        .enumerate()
        .map(|(m, (w, s))| {
            let delay = config.element_delay(m, theta);
            let tau = retarded_time + delay;
            w * s.sample(retarded_time) * phasor(plan.offset_cycles(m, tau, tp) + f_c * delay)
        })
        .sum();
    sum * config.element_gain()
}

fn check_inputs(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    waveforms: &[BasebandWaveform],
) -> Result<()> {
    plan.validate(config)?;
    weights.check_len(config)?;
    if waveforms.len() != 1 && waveforms.len() != config.num_elements() {
        return Err(Error::InvalidConfig(format!(
            "expected 1 or {} waveforms, got {}",
            config.num_elements(),
            waveforms.len()
        )));
    }
    Ok(())
}

/// Exact transmitted field (array factor times baseband envelope) at a point,
/// with the `1/r` and carrier factors removed. Zero outside the pulse.
pub fn field_exact(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    waveforms: &[BasebandWaveform],
    point: &EvalPoint,
) -> Result<Complex64> {
    check_inputs(config, plan, weights, waveforms)?;
    if !point.in_pulse(config.pulse_duration()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(weighted_field(
        config,
        plan,
        weights.as_slice(),
        waveforms,
        point.retarded_time,
        point.theta,
    ))
}

/// `Υ(t′, θ) = π·[Δf·t′ + (f_c + Δf)·d·sinθ/c]`.
pub fn upsilon(config: &ArrayConfig, offset: f64, retarded_time: f64, theta: f64) -> f64 {
    PI * (offset * retarded_time
        + (config.carrier_freq() + offset) * config.spacing() * theta.sin() / config.wave_speed())
}

/// Closed-form instantaneous beampattern `|sin(M·Υ) / sin Υ|` for uniform weights.
pub fn fitb_closed_form(config: &ArrayConfig, offset: f64, retarded_time: f64, theta: f64) -> f64 {
    dirichlet(config.num_elements(), upsilon(config, offset, retarded_time, theta))
}

/// Closed form for weights steered to `θ₀`: `sinθ` is replaced by `sinθ − sinθ₀`.
pub fn fitb_closed_form_steered(
    config: &ArrayConfig,
    offset: f64,
    retarded_time: f64,
    theta: f64,
    theta0: f64,
) -> f64 {
    let x = PI
        * (offset * retarded_time
            + (config.carrier_freq() + offset) * config.spacing() * (theta.sin() - theta0.sin())
                / config.wave_speed());
    dirichlet(config.num_elements(), x)
}

/// Range-dependent array factor in absolute time `t` and range `r`.
/// No check that `t` falls inside `[r/c, r/c + T_p]`.
pub fn legacy_array_factor(config: &ArrayConfig, offset: f64, time: f64, range: f64, theta: f64) -> f64 {
    let c = config.wave_speed();
    let spatial = config.spacing() * theta.sin() / c;
    let xi = offset * time - offset * range / c
        + config.carrier_freq() * spatial
        + offset * spatial;
    dirichlet(config.num_elements(), PI * xi)
}

/// Closed-form pattern at `t′ = 0`.
pub fn zero_time_cut(config: &ArrayConfig, offset: f64, theta: f64) -> f64 {
    fitb_closed_form(config, offset, 0.0, theta)
}

/// Zero-time cut sampled over `n_theta` angles, as a single-row grid.
pub fn zero_time_cut_grid(config: &ArrayConfig, offset: f64, n_theta: usize) -> Result<BeampatternGrid> {
    let theta = angle_axis(n_theta);
    let values = theta.iter().map(|&th| zero_time_cut(config, offset, th)).collect();
    BeampatternGrid::new(
        vec![0.0],
        theta,
        values,
        Normalization::LinearMagnitude,
        config.num_elements() as f64,
    )
}

fn coherent_scale(config: &ArrayConfig, weights: &[Complex64], waveforms: &[BasebandWaveform]) -> f64 {
    let peak_env = waveforms.iter().map(|w| w.amplitude()).fold(0.0, f64::max);
    let sum: f64 = weights.iter().map(|w| w.norm()).sum();
    sum * peak_env * config.element_gain().abs()
}

fn check_grid(n_t: usize, n_theta: usize) -> Result<()> {
    if n_t < 2 || n_theta < 2 {
        return Err(Error::InvalidConfig(format!(
            "grid needs at least 2x2 samples, got {n_t}x{n_theta}"
        )));
    }
    Ok(())
}

/// Dense `|pattern|` over `n_t` retarded times in `[0, T_p]` and `n_theta`
/// angles. Exact-engine cells hold `|field_exact|`; closed-form cells hold the
/// Dirichlet magnitude.
pub fn sweep_grid(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    waveforms: &[BasebandWaveform],
    n_t: usize,
    n_theta: usize,
    engine: Engine,
) -> Result<BeampatternGrid> {
    check_grid(n_t, n_theta)?;
    check_inputs(config, plan, weights, waveforms)?;
    let t_axis = time_axis(n_t, config.pulse_duration());
    let theta_axis = angle_axis(n_theta);
    let (values, full_scale): (Vec<f64>, f64) = match engine {
        Engine::Exact => {
            let w = weights.as_slice();
            let values = t_axis
                .par_iter()
                .flat_map_iter(|&t| {
                    theta_axis
                        .iter()
                        .map(move |&th| weighted_field(config, plan, w, waveforms, t, th).norm())
                })
                .collect();
            (values, coherent_scale(config, w, waveforms))
        }
        Engine::ClosedForm => {
            let FrequencyPlan::Uniform(offset) = *plan else {
                return Err(Error::UnsupportedPlan("closed form needs a uniform plan"));
            };
            let theta0 = match weights.origin() {
                WeightOrigin::Uniform => 0.0,
                WeightOrigin::Steered(theta0) => theta0,
                WeightOrigin::Custom => {
                    return Err(Error::InvalidConfig(
                        "closed form supports uniform or steered weights only".into(),
                    ))
                }
            };
            let values = t_axis
                .par_iter()
                .flat_map_iter(|&t| {
                    theta_axis
                        .iter()
                        .map(move |&th| fitb_closed_form_steered(config, offset, t, th, theta0))
                })
                .collect();
            (values, config.num_elements() as f64)
        }
    };
    BeampatternGrid::new(t_axis, theta_axis, values, Normalization::LinearMagnitude, full_scale)
}

/// Exact-engine grid for an observer at slant range `range`. Each cell is
/// evaluated through an [`EvalPoint`] at absolute time `t′ + r/c`, carrying
/// the retarded time through unchanged.
pub fn sweep_grid_at_range(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    waveforms: &[BasebandWaveform],
    n_t: usize,
    n_theta: usize,
    range: f64,
) -> Result<BeampatternGrid> {
    check_grid(n_t, n_theta)?;
    check_inputs(config, plan, weights, waveforms)?;
    let t_axis = time_axis(n_t, config.pulse_duration());
    let theta_axis = angle_axis(n_theta);
    let delay = range / config.wave_speed();
    let mut values = Vec::with_capacity(n_t * n_theta);
    for &t in &t_axis {
        for &th in &theta_axis {
            let point = EvalPoint { retarded_time: t, theta: th, absolute: Some((t + delay, range)) };
            values.push(field_exact(config, plan, weights, waveforms, &point)?.norm());
        }
    }
    let full_scale = coherent_scale(config, weights.as_slice(), waveforms);
    BeampatternGrid::new(t_axis, theta_axis, values, Normalization::LinearMagnitude, full_scale)
}

/// Exact-engine grid with weights that change over the pulse; `weights_at(t′)`
/// must return `M` coefficients.
pub fn sweep_grid_time_variant<F>(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights_at: F,
    waveforms: &[BasebandWaveform],
    n_t: usize,
    n_theta: usize,
) -> Result<BeampatternGrid>
where
    F: Fn(f64) -> Vec<Complex64> + Sync,
{
    check_grid(n_t, n_theta)?;
    check_inputs(config, plan, &WeightVector::uniform(config.num_elements()), waveforms)?;
    let t_axis = time_axis(n_t, config.pulse_duration());
    let theta_axis = angle_axis(n_theta);
    let rows: Vec<Vec<Complex64>> = t_axis.iter().map(|&t| weights_at(t)).collect();
    if let Some(bad) = rows.iter().find(|w| w.len() != config.num_elements()) {
        return Err(Error::InvalidConfig(format!(
            "time-variant weights have {} entries for {} elements",
            bad.len(),
            config.num_elements()
        )));
    }
    let values = t_axis
        .par_iter()
        .zip(rows.par_iter())
        .flat_map_iter(|(&t, w)| {
            theta_axis
                .iter()
                .map(move |&th| weighted_field(config, plan, w, waveforms, t, th).norm())
        })
        .collect();
    let full_scale = rows
        .iter()
        .map(|w| coherent_scale(config, w, waveforms))
        .fold(0.0, f64::max);
    BeampatternGrid::new(t_axis, theta_axis, values, Normalization::LinearMagnitude, full_scale)
}

/// Legacy array factor over absolute times `times` at range `range`.
/// The grid's time axis holds the absolute times.
pub fn legacy_grid(
    config: &ArrayConfig,
    offset: f64,
    times: &[f64],
    range: f64,
    n_theta: usize,
) -> Result<BeampatternGrid> {
    check_grid(times.len(), n_theta)?;
    let theta_axis = angle_axis(n_theta);
    let values = times
        .par_iter()
        .flat_map_iter(|&t| {
            theta_axis
                .iter()
                .map(move |&th| legacy_array_factor(config, offset, t, range, th))
        })
        .collect();
    BeampatternGrid::new(
        times.to_vec(),
        theta_axis,
        values,
        Normalization::LinearMagnitude,
        config.num_elements() as f64,
    )
}
