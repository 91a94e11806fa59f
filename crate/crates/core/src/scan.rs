//! Auto-scan analytics for uniform offsets: predicted peak direction, scan
//! speed, beamwidth, scan volume and initial direction, plus the measured
//! counterparts extracted from sampled grids and a designer for phase
//! schedules that steer the beam along an arbitrary itinerary.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{phasor, ArrayConfig};
use crate::error::{Error, Result};
use crate::grid::{time_axis, BeampatternGrid, Normalization};

/// Angles closer than this to ±π/2 are rejected by the `1/cos θ` formulas.
pub const ENDFIRE_GUARD: f64 = 1e-6;

/// Rows whose peak falls below this fraction of the grid's full scale are
/// flagged ambiguous.
pub const AMBIGUITY_FRACTION: f64 = 0.5;

/// 4-dB level as an amplitude ratio.
pub fn four_db_ratio() -> f64 {
    10f64.powf(-4.0 / 20.0)
}

fn spatial_factor(config: &ArrayConfig, offset: f64) -> f64 {
    (config.carrier_freq() + offset) * config.spacing() / config.wave_speed()
}

/// Period of the pattern in `sinθ`: `c / ((f_c + Δf)·d)`.
pub fn sine_period(config: &ArrayConfig, offset: f64) -> f64 {
    1.0 / spatial_factor(config, offset)
}

/// `θ_t = asin((c·k − c·Δf·t′) / ((f_c + Δf)·d))`, or `None` when the
/// argument leaves `[-1, 1]`.
pub fn predict_peak_direction(
    config: &ArrayConfig,
    offset: f64,
    retarded_time: f64,
    k: i64,
) -> Option<f64> {
    let arg = (k as f64 - offset * retarded_time) / spatial_factor(config, offset);
    (-1.0..=1.0).contains(&arg).then(|| arg.asin())
}

/// Branch index with the smallest `|asin argument|` at `t′`.
pub fn visible_branch(offset: f64, retarded_time: f64) -> i64 {
    (offset * retarded_time).round() as i64
}

/// Predicted peak on the visible-sector branch.
pub fn predict_visible_peak(config: &ArrayConfig, offset: f64, retarded_time: f64) -> Option<f64> {
    predict_peak_direction(config, offset, retarded_time, visible_branch(offset, retarded_time))
}

fn guard(theta: f64) -> Result<f64> {
    let cos = theta.cos();
    if !(theta.abs() < FRAC_PI_2 - ENDFIRE_GUARD) {
        return Err(Error::Singularity { theta });
    }
    Ok(cos)
}

/// `dθ/dt′ = −c·Δf / ((f_c + Δf)·d·cosθ)` in rad/s.
pub fn scan_speed(config: &ArrayConfig, offset: f64, theta: f64) -> Result<f64> {
    let cos = guard(theta)?;
    Ok(-offset / (spatial_factor(config, offset) * cos))
}

/// Returns `(Θ, θ̄)`: the time-invariant width in `sinθ` units,
/// `c / (M·(f_c + Δf)·d)`, and the azimuth resolution `Θ / cos θ_peak` (rad).
pub fn beamwidth(config: &ArrayConfig, offset: f64, theta_peak: f64) -> Result<(f64, f64)> {
    let cos = guard(theta_peak)?;
    let width = 1.0 / (config.num_elements() as f64 * spatial_factor(config, offset));
    Ok((width, width / cos))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanVolume {
    /// `c·Δf·T_p / ((f_c + Δf)·d)` in `sinθ` units.
    pub exact: f64,
    /// `2·Δf·T_p`.
    pub approx: f64,
}

pub fn scan_volume(config: &ArrayConfig, offset: f64) -> ScanVolume {
    let tp = config.pulse_duration();
    ScanVolume {
        exact: (offset * tp / spatial_factor(config, offset)).abs(),
        approx: (2.0 * offset * tp).abs(),
    }
}

/// First null of the zero-time cut, `asin(c / (M·d·(f_c + Δf)))`, if visible.
pub fn first_null(config: &ArrayConfig, offset: f64) -> Option<f64> {
    let s = 1.0 / (config.num_elements() as f64 * spatial_factor(config, offset));
    (s <= 1.0).then(|| s.asin())
}

/// Zero-time peaks `asin(k·c / ((f_c + Δf)·d))` for every visible `k`, ascending.
pub fn zero_time_peaks(config: &ArrayConfig, offset: f64) -> Vec<f64> {
    let period = sine_period(config, offset);
    let kmax = (1.0 / period).floor() as i64;
    (-kmax..=kmax)
        .map(|k| k as f64 * period)
        .filter(|s| s.abs() <= 1.0)
        .map(f64::asin)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub offset: f64,
    /// `(t′, predicted peak)` at `t′ = 0, T_p/4, T_p/2, 3T_p/4, T_p`.
    pub peak_direction_pred: Vec<(f64, Option<f64>)>,
    /// Scan speed at broadside (rad/s).
    pub scan_speed: f64,
    pub beamwidth: f64,
    pub azimuth_resolution: f64,
    pub scan_volume: ScanVolume,
    pub first_null: Option<f64>,
    pub zero_time_peaks: Vec<f64>,
    /// Largest `|k|` with a visible zero-time peak.
    pub grating_index: i64,
}

pub fn scan_report(config: &ArrayConfig, offset: f64) -> Result<ScanReport> {
    let tp = config.pulse_duration();
    let peak_direction_pred = (0..=4)
        .map(|i| {
            let t = tp * i as f64 / 4.0;
            (t, predict_visible_peak(config, offset, t))
        })
        .collect();
    let (beamwidth, azimuth_resolution) = beamwidth(config, offset, 0.0)?;
    let zero_time_peaks = zero_time_peaks(config, offset);
    Ok(ScanReport {
        offset,
        peak_direction_pred,
        scan_speed: scan_speed(config, offset, 0.0)?,
        beamwidth,
        azimuth_resolution,
        scan_volume: scan_volume(config, offset),
        first_null: first_null(config, offset),
        grating_index: (zero_time_peaks.len() as i64 - 1) / 2,
        zero_time_peaks,
    })
}

impl ScanReport {
    /// Flat `key = value` table; angles in degrees, times in microseconds.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let fmt_angle = |v: Option<f64>| v.map_or("none".to_string(), |a| a.to_degrees().to_string());
        let _ = writeln!(out, "offset_hz = {}", self.offset);
        for (t, th) in &self.peak_direction_pred {
            let _ = writeln!(out, "peak_direction_deg@{}us = {}", t * 1e6, fmt_angle(*th));
        }
        let _ = writeln!(out, "scan_speed_rad_per_s = {}", self.scan_speed);
        let _ = writeln!(out, "beamwidth_sine = {}", self.beamwidth);
        let _ = writeln!(out, "azimuth_resolution_deg = {}", self.azimuth_resolution.to_degrees());
        let _ = writeln!(out, "scan_volume_sine = {}", self.scan_volume.exact);
        let _ = writeln!(out, "scan_volume_approx_sine = {}", self.scan_volume.approx);
        let _ = writeln!(out, "first_null_deg = {}", fmt_angle(self.first_null));
        let peaks: Vec<String> =
            self.zero_time_peaks.iter().map(|p| p.to_degrees().to_string()).collect();
        let _ = writeln!(out, "zero_time_peaks_deg = {}", peaks.join(" "));
        let _ = writeln!(out, "grating_index = {}", self.grating_index);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub theta: f64,
    pub peak: f64,
    pub ambiguous: bool,
}

/// Vertex of the parabola through three `(x, y)` points.
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let curvature = (d2 - d1) / (x[2] - x[0]);
    if !(curvature < 0.0) {
        return None;
    }
    // y = y0 + d1 (x - x0) + curvature (x - x0)(x - x1)
    Some(0.5 * (x[0] + x[1]) - 0.5 * d1 / curvature)
}

/// Row peak with 3-point parabolic refinement in `sinθ`.
fn refine_peak(theta: &[f64], row: &[f64], j: usize) -> f64 {
    if j == 0 || j + 1 >= row.len() {
        return theta[j];
    }
    let x = [theta[j - 1].sin(), theta[j].sin(), theta[j + 1].sin()];
    let y = [row[j - 1], row[j], row[j + 1]];
    match parabola_vertex(x, y) {
        Some(s) if s >= x[0] && s <= x[2] => s.clamp(-1.0, 1.0).asin(),
        _ => theta[j],
    }
}

/// Per-row peak location. Rows whose maximum is below half the grid's full
/// scale (or zero) are flagged ambiguous.
pub fn measure_peak_trajectory(grid: &BeampatternGrid) -> Result<Vec<TrajectoryPoint>> {
    if grid.normalization() != Normalization::LinearMagnitude {
        return Err(Error::InvalidConfig("peak trajectory needs a linear-magnitude grid".into()));
    }
    let theta = grid.theta_axis();
    let threshold = AMBIGUITY_FRACTION * grid.full_scale();
    Ok((0..grid.n_t())
        .into_par_iter()
        .map(|i| {
            let row = grid.row(i);
            let (j, peak) = row
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
            TrajectoryPoint {
                time: grid.t_axis()[i],
                theta: refine_peak(theta, row, j),
                peak,
                ambiguous: !(peak > 0.0) || peak < threshold,
            }
        })
        .collect())
}

/// Net distance travelled in `sinθ` by the unambiguous points, unwrapping
/// jumps larger than half the grating period.
pub fn trajectory_coverage(trajectory: &[TrajectoryPoint], period: f64) -> f64 {
    let sines: Vec<f64> = trajectory
        .iter()
        .filter(|p| !p.ambiguous)
        .map(|p| p.theta.sin())
        .collect();
    let net: f64 = sines
        .windows(2)
        .map(|w| {
            let mut d = w[1] - w[0];
            if d > 0.5 * period {
                d -= period;
            } else if d < -0.5 * period {
                d += period;
            }
            d
        })
        .sum();
    net.abs()
}

/// Width in `sinθ` between the −4 dB crossings around the row maximum,
/// linearly interpolated. `None` if either crossing is outside the row.
pub fn measure_beamwidth(theta: &[f64], row: &[f64]) -> Option<f64> {
    let (j, peak) = row
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
    let level = peak * four_db_ratio();
    let crossing = |a: usize, b: usize| -> f64 {
        let (sa, sb) = (theta[a].sin(), theta[b].sin());
        let frac = (row[a] - level) / (row[a] - row[b]);
        sa + frac * (sb - sa)
    };
    let left = (1..=j).rev().find(|&i| row[i - 1] < level).map(|i| crossing(i, i - 1))?;
    let right = (j..row.len() - 1).find(|&i| row[i + 1] < level).map(|i| crossing(i, i + 1))?;
    Some(right - left)
}

/// One leg of a steering itinerary: the beam moves linearly in angle from
/// `theta_start` to `theta_end` over `[t_start, t_end]`. Equal angles hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSegment {
    pub t_start: f64,
    pub t_end: f64,
    pub theta_start: f64,
    pub theta_end: f64,
}

impl ScheduleSegment {
    pub fn sweep(t_start: f64, t_end: f64, theta_start: f64, theta_end: f64) -> Self {
        Self { t_start, t_end, theta_start, theta_end }
    }

    pub fn hold(t_start: f64, t_end: f64, theta: f64) -> Self {
        Self::sweep(t_start, t_end, theta, theta)
    }

    fn angle_at(&self, t: f64) -> f64 {
        let span = self.t_end - self.t_start;
        if span <= 0.0 {
            return self.theta_end;
        }
        self.theta_start + (self.theta_end - self.theta_start) * (t - self.t_start) / span
    }
}

/// Phase schedule `φ(t′)` (cycles) that steers a uniform-offset array
/// along the segments' itinerary.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    segments: Vec<ScheduleSegment>,
    offset: f64,
    /// `f_c·d / c`.
    spatial: f64,
    t_axis: Vec<f64>,
    phase: Vec<f64>,
}

impl PhaseSchedule {
    pub fn segments(&self) -> &[ScheduleSegment] {
        &self.segments
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.t_axis
    }

    /// Sampled `φ(t′)` in cycles on [`t_axis`](Self::t_axis).
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    /// Steering target at `t′`. Before the first segment the beam holds at
    /// its start angle; in gaps and after the last segment it holds at the
    /// end angle of the preceding segment.
    pub fn target_angle(&self, t: f64) -> f64 {
        let mut current = self.segments[0].theta_start;
        for seg in &self.segments {
            if t < seg.t_start {
                break;
            }
            if t <= seg.t_end {
                return seg.angle_at(t);
            }
            current = seg.theta_end;
        }
        current
    }

    /// `φ(t′) = −Δf·t′ − (f_c/c)·d·sin(target(t′))`.
    pub fn phase_at(&self, t: f64) -> f64 {
        -self.offset * t - self.spatial * self.target_angle(t).sin()
    }

    /// Weights `exp(j·2π·m·φ_i)` for row `i`, for playback on the
    /// uniform-offset array (the offset supplies the `Δf·t′` ramp).
    pub fn fda_weights(&self, row: usize, num_elements: usize) -> Vec<Complex64> {
        let phi = self.phase[row];
        (0..num_elements).map(|m| phasor(m as f64 * phi)).collect()
    }

    /// Weights `exp(j·2π·m·(Δf·t′_i + φ_i))` for playback on a phased array
    /// (zero offset).
    pub fn phased_array_weights(&self, row: usize, num_elements: usize) -> Vec<Complex64> {
        let cycles = self.offset * self.t_axis[row] + self.phase[row];
        (0..num_elements).map(|m| phasor(m as f64 * cycles)).collect()
    }

    /// Row index of the sample nearest `t` (no interpolation between samples).
    pub fn row_at(&self, t: f64) -> usize {
        let n = self.t_axis.len();
        let last = *self.t_axis.last().unwrap();
        if last <= 0.0 {
            return 0;
        }
        (((t / last) * (n - 1) as f64).round().max(0.0) as usize).min(n - 1)
    }
}

/// Designs `φ(t′)` on an `n_t`-sample time grid over the pulse.
pub fn design_phase_schedule(
    config: &ArrayConfig,
    offset: f64,
    segments: &[ScheduleSegment],
    n_t: usize,
) -> Result<PhaseSchedule> {
    let tp = config.pulse_duration();
    if segments.is_empty() {
        return Err(Error::Schedule("at least one segment is required".into()));
    }
    if n_t < 2 {
        return Err(Error::Schedule("time grid needs at least two samples".into()));
    }
    for (i, seg) in segments.iter().enumerate() {
        if !(seg.t_start >= 0.0 && seg.t_end <= tp && seg.t_start <= seg.t_end) {
            return Err(Error::Schedule(format!(
                "segment {i} interval [{}, {}] is not inside the pulse",
                seg.t_start, seg.t_end
            )));
        }
        if !(seg.theta_start.abs() < FRAC_PI_2 && seg.theta_end.abs() < FRAC_PI_2) {
            return Err(Error::Schedule(format!("segment {i} leaves the visible sector")));
        }
    }
    for (i, pair) in segments.windows(2).enumerate() {
        if pair[1].t_start < pair[0].t_end {
            return Err(Error::Schedule(format!(
                "segments {i} and {} overlap or are out of order",
                i + 1
            )));
        }
    }
    let mut schedule = PhaseSchedule {
        segments: segments.to_vec(),
        offset,
        spatial: config.carrier_freq() * config.spacing() / config.wave_speed(),
        t_axis: time_axis(n_t, tp),
        phase: Vec::new(),
    };
    schedule.phase = schedule.t_axis.iter().map(|&t| schedule.phase_at(t)).collect();
    Ok(schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(offset: f64) -> ArrayConfig {
        ArrayConfig::half_wavelength(16, 10e9, 5e-6, offset).unwrap()
    }

    #[test]
    fn peak_direction_examples() {
        let c = cfg(200e3);
        assert_eq!(predict_peak_direction(&c, 200e3, 0.0, 0), Some(0.0));
        let th = predict_peak_direction(&c, 200e3, 1.25e-6, 0).unwrap();
        // asin(-0.5 · (f_c + 15Δf)/(f_c + Δf))
        let expected = (-0.5f64 * (10e9 + 3e6) / (10e9 + 200e3)).asin();
        assert!((th - expected).abs() < 1e-12);
        assert!((th.to_degrees() + 30.0093).abs() < 1e-4, "{}", th.to_degrees());
        let c0 = cfg(0.0);
        assert_eq!(predict_peak_direction(&c0, 0.0, 3e-6, 0), Some(0.0));
        assert_eq!(predict_peak_direction(&c, 200e3, 1.25e-6, 3), None);
    }

    #[test]
    fn scan_speed_examples() {
        assert_eq!(scan_speed(&cfg(0.0), 0.0, 0.3).unwrap(), 0.0);
        let v = scan_speed(&cfg(80e3), 80e3, 0.0).unwrap();
        assert!((v + 1.6e5).abs() < 1e2, "{v}");
        assert!(v < 0.0);
        // ≈ 13.7° over 1.5 µs at broadside
        assert!(((v * 1.5e-6).abs().to_degrees() - 13.75).abs() < 0.1);
        assert!(matches!(
            scan_speed(&cfg(80e3), 80e3, FRAC_PI_2 - 1e-7),
            Err(Error::Singularity { .. })
        ));
    }

    #[test]
    fn scan_speed_matches_central_difference() {
        let c = cfg(80e3);
        let dt = 1e-9;
        for deg in [-60.0, -20.0, 20.0, 60.0f64] {
            let th = deg.to_radians();
            // time at which the k=0 branch passes θ
            let t0 = -th.sin() * spatial_factor(&c, 80e3) / 80e3;
            let t0 = if t0 < 0.0 { t0 + 1.0 / 80e3 } else { t0 };
            let k = visible_branch(80e3, t0);
            let a = predict_peak_direction(&c, 80e3, t0 - dt, k).unwrap();
            let b = predict_peak_direction(&c, 80e3, t0 + dt, k).unwrap();
            let fd = (b - a) / (2.0 * dt);
            let v = scan_speed(&c, 80e3, th).unwrap();
            assert!(((fd - v) / v).abs() < 5e-3, "{deg}: {fd} vs {v}");
        }
    }

    #[test]
    fn beamwidth_examples() {
        let c = cfg(100.0);
        let (w, res) = beamwidth(&c, 100.0, 0.0).unwrap();
        assert!((w - 0.125).abs() < 1e-6);
        assert_eq!(w, res);
        let (_, res60) = beamwidth(&c, 100.0, 60f64.to_radians()).unwrap();
        assert!((res60 - 2.0 * res).abs() < 1e-12);
        let big = ArrayConfig::half_wavelength(4096, 10e9, 5e-6, 100.0).unwrap();
        assert!(beamwidth(&big, 100.0, 0.0).unwrap().0 < 1e-3);
    }

    #[test]
    fn scan_volume_examples() {
        let v = scan_volume(&cfg(200e3), 200e3);
        assert!((v.exact - 2.0).abs() < 1e-3);
        assert!((v.approx - 2.0).abs() < 1e-12);
        assert_eq!(scan_volume(&cfg(0.0), 0.0).exact, 0.0);
        assert!((scan_volume(&cfg(400e3), 400e3).exact - 4.0).abs() < 1e-2);
    }

    #[test]
    fn zero_time_peaks_with_wide_spacing() {
        let c = ArrayConfig::new(16, 10e9, 0.06, 5e-6).unwrap();
        let peaks = zero_time_peaks(&c, 0.0);
        // period 0.5 in sine: k = -2..=2
        assert_eq!(peaks.len(), 5);
        assert!((peaks[3] - 0.5f64.asin()).abs() < 1e-12);
        let report = scan_report(&c, 0.0).unwrap();
        assert_eq!(report.grating_index, 2);
    }

    #[test]
    fn report_text_has_all_keys() {
        let text = scan_report(&cfg(80e3), 80e3).unwrap().to_text();
        for key in [
            "scan_speed_rad_per_s",
            "beamwidth_sine",
            "azimuth_resolution_deg",
            "scan_volume_sine",
            "first_null_deg",
            "zero_time_peaks_deg",
            "grating_index",
        ] {
            assert!(text.contains(key), "{key}");
        }
    }

    #[test]
    fn parabola_vertex_recovers_exact_peak() {
        let f = |x: f64| 3.0 - 2.0 * (x - 0.13).powi(2);
        let x = [0.0, 0.1, 0.35];
        let v = parabola_vertex(x, [f(x[0]), f(x[1]), f(x[2])]).unwrap();
        assert!((v - 0.13).abs() < 1e-12);
        assert!(parabola_vertex([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]).is_none());
    }

    #[test]
    fn degenerate_rows_are_flagged() {
        let grid = BeampatternGrid::new(
            vec![0.0, 1.0],
            vec![-0.1, 0.0, 0.1],
            vec![0.0, 0.0, 0.0, 1.0, 4.0, 1.0],
            Normalization::LinearMagnitude,
            4.0,
        )
        .unwrap();
        let traj = measure_peak_trajectory(&grid).unwrap();
        assert!(traj[0].ambiguous);
        assert!(!traj[1].ambiguous);
        assert!(traj[1].theta.abs() < 1e-12);
        assert!(measure_peak_trajectory(&grid.to_db()).is_err());
    }

    #[test]
    fn schedule_validation() {
        let c = cfg(100e3);
        let a = ScheduleSegment::sweep(0.0, 2e-6, 0.0, 0.3);
        let b = ScheduleSegment::hold(1.5e-6, 3e-6, 0.3);
        assert!(matches!(
            design_phase_schedule(&c, 100e3, &[a, b], 64),
            Err(Error::Schedule(_))
        ));
        assert!(design_phase_schedule(&c, 100e3, &[], 64).is_err());
        let late = ScheduleSegment::hold(0.0, 6e-6, 0.3);
        assert!(design_phase_schedule(&c, 100e3, &[late], 64).is_err());
        let endfire = ScheduleSegment::hold(0.0, 1e-6, FRAC_PI_2);
        assert!(design_phase_schedule(&c, 100e3, &[endfire], 64).is_err());
    }

    #[test]
    fn schedule_gaps_hold_previous_end_angle() {
        let c = cfg(100e3);
        let segs = [
            ScheduleSegment::sweep(1e-6, 2e-6, 0.1, 0.4),
            ScheduleSegment::sweep(3e-6, 5e-6, -0.2, 0.2),
        ];
        let s = design_phase_schedule(&c, 100e3, &segs, 101).unwrap();
        assert_eq!(s.target_angle(0.5e-6), 0.1);
        assert!((s.target_angle(1.5e-6) - 0.25).abs() < 1e-12);
        assert_eq!(s.target_angle(2.5e-6), 0.4);
        assert!((s.target_angle(4e-6) - 0.0).abs() < 1e-12);
        let phi = s.phase_at(2.5e-6);
        let expected = -100e3 * 2.5e-6 - 10e9 * c.spacing() / 3e8 * 0.4f64.sin();
        assert!((phi - expected).abs() < 1e-12);
        assert_eq!(s.row_at(2.5e-6), 50);
    }
}
