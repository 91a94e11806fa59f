use std::f64::consts::PI;

use fdabeam::instant::sweep_grid_time_variant;
use fdabeam::scan::{
    first_null, measure_beamwidth, predict_visible_peak, scan_report, trajectory_coverage,
    sine_period,
};
use fdabeam::{
    beamwidth, design_phase_schedule, measure_peak_trajectory, predict_peak_direction, scan_speed,
    scan_volume, steered_weights, sweep_grid, ArrayConfig, BasebandWaveform, Engine,
    FrequencyPlan, ModulationForm, ScheduleSegment, TimeModulation, WeightVector,
};
use proptest::prelude::*;

const M: usize = 16;
const T_P: f64 = 5e-6;

fn half(offset: f64) -> ArrayConfig {
    ArrayConfig::half_wavelength(M, 10e9, T_P, offset).unwrap()
}

fn rect() -> [BasebandWaveform; 1] {
    [BasebandWaveform::rect(T_P)]
}

fn closed_grid(offset: f64, n_t: usize, n_theta: usize) -> fdabeam::BeampatternGrid {
    sweep_grid(
        &half(offset),
        &FrequencyPlan::Uniform(offset),
        &WeightVector::uniform(M),
        &rect(),
        n_t,
        n_theta,
        Engine::ClosedForm,
    )
    .unwrap()
}

#[test]
fn measured_trajectory_follows_prediction() {
    let n_theta = 1024;
    let step = PI / n_theta as f64;
    for offset in [10e3, 30e3, 80e3, 200e3] {
        let config = half(offset);
        let grid = closed_grid(offset, 512, n_theta);
        let traj = measure_peak_trajectory(&grid).unwrap();
        let rows: Vec<_> = traj.iter().filter(|p| !p.ambiguous).collect();
        let close = rows
            .iter()
            .filter(|p| {
                predict_visible_peak(&config, offset, p.time)
                    .is_some_and(|pred| (pred - p.theta).abs() < step)
            })
            .count();
        assert!(close as f64 >= 0.95 * rows.len() as f64, "{offset}: {close}/{}", rows.len());
    }
}

#[test]
fn scan_speed_matches_finite_difference_of_prediction() {
    let offset = 80e3;
    let config = half(offset);
    let dt = 1e-9;
    for i in 0..=60 {
        let t = T_P * i as f64 / 60.0;
        let Some(theta) = predict_peak_direction(&config, offset, t, 0) else { continue };
        if theta.abs() > 60f64.to_radians() {
            continue;
        }
        let a = predict_peak_direction(&config, offset, t - dt, 0).unwrap();
        let b = predict_peak_direction(&config, offset, t + dt, 0).unwrap();
        let fd = (b - a) / (2.0 * dt);
        let speed = scan_speed(&config, offset, theta).unwrap();
        assert!((fd - speed).abs() < 0.005 * speed.abs(), "t {t}: {fd} vs {speed}");
    }
}

#[test]
fn scan_speed_examples() {
    assert_eq!(scan_speed(&half(0.0), 0.0, 0.3).unwrap(), 0.0);
    let v = scan_speed(&half(80e3), 80e3, 0.0).unwrap();
    assert!((v + 1.6e5).abs() < 0.01e5, "{v}");
    assert!((v * 1.5e-6).abs().to_degrees() > 13.0);
    assert!(matches!(scan_speed(&half(80e3), 80e3, PI / 2.0), Err(fdabeam::Error::Singularity { .. })));
}

#[test]
fn beamwidth_examples() {
    let (width, res) = beamwidth(&half(0.0), 0.0, 0.0).unwrap();
    assert!((width - 0.125).abs() < 1e-12);
    assert!((res.to_degrees() - 7.162).abs() < 0.01);
    let (w60, r60) = beamwidth(&half(0.0), 0.0, 60f64.to_radians()).unwrap();
    assert_eq!(w60, width);
    assert!((r60 / res - 2.0).abs() < 1e-12);
}

#[test]
fn beamwidth_is_time_invariant() {
    let offset = 30e3;
    let config = half(offset);
    let grid = closed_grid(offset, 5, 4096);
    let (expected, _) = beamwidth(&config, offset, 0.0).unwrap();
    let widths: Vec<f64> = [0usize, 1, 2]
        .iter()
        .map(|&i| measure_beamwidth(grid.theta_axis(), grid.row(i)).unwrap())
        .collect();
    let lo = widths.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = widths.iter().copied().fold(0.0, f64::max);
    assert!(hi / lo < 1.1, "{widths:?}");
    assert!((widths[0] / expected - 1.0).abs() < 0.1, "{widths:?} vs {expected}");
}

#[test]
fn scan_volume_examples() {
    let v = scan_volume(&half(200e3), 200e3);
    assert!((v.exact - 2.0).abs() < 1e-3 && (v.approx - 2.0).abs() < 1e-12);
    let v = scan_volume(&half(400e3), 400e3);
    assert!((v.exact - 4.0).abs() < 1e-2);
    assert_eq!(scan_volume(&half(0.0), 0.0).exact, 0.0);
}

#[test]
fn coverage_counts_full_sweeps() {
    for (offset, expected) in [(200e3, 2.0), (400e3, 4.0)] {
        let config = half(offset);
        let traj = measure_peak_trajectory(&closed_grid(offset, 512, 1024)).unwrap();
        let coverage = trajectory_coverage(&traj, sine_period(&config, offset));
        assert!((coverage - expected).abs() < 0.05 * expected, "{offset}: {coverage}");
    }
}

#[test]
fn report_is_consistent() {
    let config = half(200e3);
    let report = scan_report(&config, 200e3).unwrap();
    assert!(report.scan_volume.exact >= 0.0);
    assert!(report.azimuth_resolution >= report.beamwidth);
    assert_eq!(report.first_null, first_null(&config, 200e3));
    let text = report.to_text();
    assert!(text.contains("offset_hz = 200000"));
}

#[test]
fn steered_trajectory_starts_at_target() {
    let offset = 40e3;
    let config = half(offset);
    let plan = FrequencyPlan::Uniform(offset);
    let n = 1800;
    for deg in [0.0f64, 60.0] {
        let w = steered_weights(&config, &plan, deg.to_radians()).unwrap();
        let grid = sweep_grid(&config, &plan, &w, &rect(), 16, n, Engine::Exact).unwrap();
        let start = measure_peak_trajectory(&grid).unwrap()[0].theta;
        assert!((start - deg.to_radians()).abs() < PI / n as f64, "{deg}: {}", start.to_degrees());
    }
}

fn play(offset: f64, segments: &[ScheduleSegment], phased: bool) -> (Vec<f64>, Vec<f64>) {
    let config = half(offset);
    let n_t = 101;
    let schedule = design_phase_schedule(&config, offset, segments, n_t).unwrap();
    let plan = FrequencyPlan::Uniform(if phased { 0.0 } else { offset });
    let grid = sweep_grid_time_variant(
        &config,
        &plan,
        |t| {
            let row = schedule.row_at(t);
            if phased {
                schedule.phased_array_weights(row, M)
            } else {
                schedule.fda_weights(row, M)
            }
        },
        &rect(),
        n_t,
        3600,
    )
    .unwrap();
    let traj = measure_peak_trajectory(&grid).unwrap();
    let measured = traj.iter().map(|p| p.theta).collect();
    let target = grid.t_axis().iter().map(|&t| schedule.target_angle(t)).collect();
    (measured, target)
}

#[test]
fn schedule_sweep_follows_itinerary() {
    let seg = [ScheduleSegment::sweep(0.0, T_P, -45f64.to_radians(), 45f64.to_radians())];
    for phased in [false, true] {
        let (measured, target) = play(200e3, &seg, phased);
        for (m, t) in measured.iter().zip(&target) {
            assert!((m - t).abs().to_degrees() < 1.0, "{} vs {}", m.to_degrees(), t.to_degrees());
        }
    }
}

#[test]
fn schedule_hold_and_gap() {
    let hold = [ScheduleSegment::hold(0.0, T_P, 20f64.to_radians())];
    let (measured, _) = play(80e3, &hold, false);
    assert!(measured.iter().all(|m| (m.to_degrees() - 20.0).abs() < 0.1));

    let two = [
        ScheduleSegment::sweep(0.0, 1e-6, 0.0, 30f64.to_radians()),
        ScheduleSegment::sweep(3e-6, T_P, -30f64.to_radians(), 0.0),
    ];
    let (measured, target) = play(80e3, &two, false);
    for (m, t) in measured.iter().zip(&target) {
        assert!((m - t).abs().to_degrees() < 1.0);
    }
    assert!((target[30].to_degrees() - 30.0).abs() < 1e-9);
}

#[test]
fn phased_array_schedule_is_static() {
    let seg = [ScheduleSegment::hold(0.0, T_P, -35f64.to_radians())];
    let (measured, _) = play(0.0, &seg, false);
    assert!(measured.iter().all(|m| (m - measured[0]).abs() < 1e-12));
    assert!((measured[0].to_degrees() + 35.0).abs() < 0.1);
}

#[test]
fn schedule_validation() {
    let config = half(80e3);
    let overlap = [
        ScheduleSegment::hold(0.0, 3e-6, 0.0),
        ScheduleSegment::hold(2e-6, T_P, 0.1),
    ];
    assert!(matches!(design_phase_schedule(&config, 80e3, &overlap, 10), Err(fdabeam::Error::Schedule(_))));
    let outside = [ScheduleSegment::hold(0.0, 2.0 * T_P, 0.0)];
    assert!(design_phase_schedule(&config, 80e3, &outside, 10).is_err());
    assert!(design_phase_schedule(&config, 80e3, &[], 10).is_err());
}

#[test]
fn time_modulated_plans_run_on_exact_engine() {
    let config = half(0.0);
    for form in [
        ModulationForm::SquareRoot,
        ModulationForm::CubeRoot,
        ModulationForm::Arctangent,
        ModulationForm::HyperbolicSine,
        ModulationForm::Sampled(vec![0.0, 0.5, 1.0]),
    ] {
        let plan = FrequencyPlan::TimeModulated(TimeModulation { form, rate: 50e3 });
        let grid = sweep_grid(&config, &plan, &WeightVector::uniform(M), &rect(), 33, 361, Engine::Exact).unwrap();
        assert!(grid.values().iter().all(|v| v.is_finite() && *v >= 0.0));
        let (i, j) = grid.argmax();
        assert_eq!(i, 0);
        assert!(grid.theta_axis()[j].abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn prediction_is_a_kernel_peak(offset in 1e3f64..400e3, t in 0.0f64..T_P) {
        let config = half(offset);
        if let Some(th) = predict_visible_peak(&config, offset, t) {
            let v = fdabeam::fitb_closed_form(&config, offset, t, th);
            prop_assert!((v - M as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn scan_speed_is_negative_for_positive_offsets(offset in 1.0f64..1e6, th in -1.5f64..1.5) {
        prop_assert!(scan_speed(&half(offset), offset, th).unwrap() < 0.0);
    }
}
