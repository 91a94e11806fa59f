//! Executes a validated scenario and writes its artifacts plus a manifest.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fdabeam::grid::{angle_axis, time_axis, DB_FLOOR};
use fdabeam::instant::{
    legacy_grid, sweep_grid_at_range, sweep_grid_time_variant, zero_time_cut_grid,
};
use fdabeam::integral::{fgtb_curve, flatness_db, peak_to_mean, write_curve_csv};
use fdabeam::scan::{scan_report, sine_period, trajectory_coverage};
use fdabeam::{
    compare_fgtb_mimo, covariance, design_phase_schedule, measure_peak_trajectory, sweep_grid,
    BeampatternGrid, CovarianceFlavor, FrequencyPlan, Normalization, ScheduleSegment,
};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::scenario::{Evaluation, GridOutput, GridScale, Playback, Scenario, Spacing};

/// Name of the hash list written next to the artifacts.
pub const MANIFEST: &str = "manifest.txt";

/// Artifact directory that remembers every file written into it.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write<F>(&mut self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut out).and_then(|_| out.flush()).map_err(io_err)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write(name, |out| out.write_all(text.as_bytes()))
    }

    /// `<sha256>  <file>` per artifact, sorted by file name.
    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.files.sort();
        self.files.dedup();
        let mut manifest = String::new();
        for name in &self.files {
            let path = self.dir.join(name);
            let bytes =
                fs::read(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let _ = writeln!(manifest, "{}  {name}", hex::encode(Sha256::digest(&bytes)));
        }
        let path = self.dir.join(MANIFEST);
        fs::write(&path, manifest).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(self.dir)
    }
}

/// Short label for an offset in file names, e.g. `df10000hz`.
fn offset_label(df: f64) -> String {
    format!("df{df}hz")
}

fn write_grid(
    out: &mut Outputs,
    stem: &str,
    grid: &BeampatternGrid,
    output: &GridOutput,
    period: Option<f64>,
    log: &mut String,
) -> Result<(), CliError> {
    let _ = write!(log, "{stem}: {}x{} grid", grid.n_t(), grid.n_theta());
    if output.trajectory {
        let trajectory = measure_peak_trajectory(grid)?;
        out.write(&format!("{stem}_trajectory.csv"), |w| {
            writeln!(w, "t_us,theta_deg")?;
            for p in trajectory.iter().filter(|p| !p.ambiguous) {
                writeln!(w, "{},{}", p.time * 1e6, p.theta.to_degrees())?;
            }
            Ok(())
        })?;
        let clear = trajectory.iter().filter(|p| !p.ambiguous).count();
        let _ = write!(log, ", {clear}/{} unambiguous rows", trajectory.len());
        if let Some(first) = trajectory.iter().find(|p| !p.ambiguous) {
            let _ = write!(log, ", start {:.4} deg", first.theta.to_degrees());
        }
        if let Some(period) = period {
            let _ = write!(
                log,
                ", coverage {:.4} sine",
                trajectory_coverage(&trajectory, period)
            );
        }
    }
    let _ = writeln!(log);
    let grid = match output.scale {
        GridScale::Db => grid.to_db(),
        GridScale::Linear => grid.clone(),
    };
    if output.csv {
        out.write(&format!("{stem}.csv"), |w| grid.write_csv(w))?;
    }
    if output.binary {
        out.write(&format!("{stem}.bin"), |w| grid.write_binary(w))?;
    }
    Ok(())
}

/// Rows of `grid` with retarded time inside `[start, end]`.
fn crop(grid: &BeampatternGrid, start: f64, end: f64) -> Result<BeampatternGrid, CliError> {
    let rows: Vec<usize> = (0..grid.n_t())
        .filter(|&i| (start..=end).contains(&grid.t_axis()[i]))
        .collect();
    if rows.len() < 2 {
        return Err(CliError::Validation(format!(
            "window [{start}, {end}] s keeps {} time samples; increase n_t",
            rows.len()
        )));
    }
    let t: Vec<f64> = rows.iter().map(|&i| grid.t_axis()[i]).collect();
    let values: Vec<f64> = rows
        .iter()
        .flat_map(|&i| grid.row(i).iter().copied())
        .collect();
    Ok(BeampatternGrid::new(
        t,
        grid.theta_axis().to_vec(),
        values,
        Normalization::LinearMagnitude,
        grid.full_scale(),
    )?)
}

fn to_db(values: &[f64], reference: f64) -> Vec<f64> {
    values
        .iter()
        .map(|v| (10.0 * (v / reference).log10()).max(DB_FLOOR))
        .collect()
}

fn run_evaluation(
    scenario: &Scenario,
    id: &str,
    eval: &Evaluation,
    out: &mut Outputs,
) -> Result<String, CliError> {
    let mut log = String::new();
    let config = scenario.config()?;
    let plan = &scenario.plan;
    let offset = scenario.uniform_offset();
    let uniform_period = match plan {
        FrequencyPlan::Uniform(_) => Some(sine_period(&config, offset)),
        _ => None,
    };
    match eval {
        Evaluation::FitbGrid {
            n_t,
            n_theta,
            engine,
            range,
            window,
            output,
        } => {
            let weights = scenario.weight_vector(&config, plan)?;
            let bank = scenario.waveforms.bank(&config);
            let grid = match range {
                Some(r) => sweep_grid_at_range(&config, plan, &weights, &bank, *n_t, *n_theta, *r)?,
                None => sweep_grid(&config, plan, &weights, &bank, *n_t, *n_theta, *engine)?,
            };
            let grid = match window {
                Some((a, b)) => crop(&grid, *a, *b)?,
                None => grid,
            };
            write_grid(out, id, &grid, output, uniform_period, &mut log)?;
            let average = grid.time_average();
            let (j, _) = average
                .iter()
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |b, (j, &v)| if v > b.1 { (j, v) } else { b },
                );
            let _ = writeln!(
                log,
                "{id}: time-averaged peak at {:.4} deg",
                grid.theta_axis()[j].to_degrees()
            );
        }
        Evaluation::LegacyGrid {
            ranges,
            absolute_time,
            t_start,
            n_t,
            n_theta,
            output,
        } => {
            let local = time_axis(*n_t, config.pulse_duration());
            for &r in ranges {
                let start = match (absolute_time, t_start) {
                    (true, Some(t0)) => *t0,
                    (true, None) => ranges[0] / config.wave_speed(),
                    (false, Some(t0)) => r / config.wave_speed() + t0,
                    (false, None) => r / config.wave_speed(),
                };
                let times: Vec<f64> = local.iter().map(|t| start + t).collect();
                let grid = legacy_grid(&config, offset, &times, r, *n_theta)?;
                let stem = format!("{id}_r{}km", r / 1e3);
                write_grid(out, &stem, &grid, output, None, &mut log)?;
            }
        }
        Evaluation::ZeroTimeCut { n_theta, spacing } => {
            let config = match spacing {
                Some(sp) => scenario.array.config_with(*sp, offset)?,
                None => config.clone(),
            };
            let grid = zero_time_cut_grid(&config, offset, *n_theta)?;
            let m = config.num_elements() as f64;
            let db: Vec<f64> = grid
                .row(0)
                .iter()
                .map(|v| (20.0 * (v / m).log10()).max(DB_FLOOR))
                .collect();
            out.write(&format!("{id}.csv"), |w| {
                write_curve_csv(w, grid.theta_axis(), &db)
            })?;
            let label = match spacing {
                Some(Spacing::Meters(d)) => format!("{d} m"),
                Some(Spacing::Wavelengths(f)) => format!("{f} wavelength"),
                None => format!("{} m", config.spacing()),
            };
            let _ = writeln!(
                log,
                "{id}: zero-time cut, spacing {label}, peak {:.6}",
                grid.row(0).iter().copied().fold(0.0, f64::max)
            );
        }
        Evaluation::FgtbCurve {
            offsets,
            n_theta,
            covariance: dump,
            settings,
        } => {
            let theta = angle_axis(*n_theta);
            let cases: Vec<(String, FrequencyPlan, f64)> = match offsets {
                Some(list) => list
                    .iter()
                    .map(|&df| (offset_label(df), FrequencyPlan::Uniform(df), df))
                    .collect(),
                None => vec![(String::from("plan"), plan.clone(), offset)],
            };
            let mut curves = Vec::with_capacity(cases.len());
            for (label, case_plan, df) in &cases {
                let config = scenario.array.config(*df)?;
                let bank = scenario.waveforms.bank(&config);
                let weights = scenario.weight_vector(&config, case_plan)?;
                let r = covariance(&config, &bank, case_plan, CovarianceFlavor::Fda, *settings)?;
                if *dump {
                    out.write(&format!("{id}_{label}_covariance.csv"), |w| r.write_csv(w))?;
                }
                let curve = fgtb_curve(&r, &config, case_plan, &weights, &theta)?;
                let _ = writeln!(
                    log,
                    "{id} {label}: peak {:.6e} 1/s, peak/mean {:.4} dB, flatness {:.4} dB, {} nodes",
                    curve.iter().copied().fold(0.0, f64::max),
                    10.0 * peak_to_mean(&curve).log10(),
                    flatness_db(&curve),
                    r.nodes()
                );
                curves.push((label, curve));
            }
            let global = curves
                .iter()
                .flat_map(|(_, c)| c.iter().copied())
                .fold(0.0, f64::max);
            for (label, curve) in &curves {
                out.write(&format!("{id}_{label}.csv"), |w| {
                    write_curve_csv(w, &theta, &to_db(curve, global))
                })?;
            }
        }
        Evaluation::MimoCompare {
            offsets,
            n_theta,
            tolerance,
        } => {
            let theta = angle_axis(*n_theta);
            let mut summary = String::new();
            for &df in offsets {
                let config = scenario.array.config(df)?;
                let bank = scenario.waveforms.bank(&config);
                let weights = scenario.weight_vector(&config, &FrequencyPlan::Uniform(df))?;
                let cmp =
                    compare_fgtb_mimo(&config, df, &bank, &weights, &theta, Default::default())?;
                let label = offset_label(df);
                let peak_f = cmp.fgtb.iter().copied().fold(0.0, f64::max);
                let peak_m = cmp.mimo.iter().copied().fold(0.0, f64::max);
                out.write(&format!("{id}_{label}.csv"), |w| {
                    writeln!(w, "theta_deg,fgtb_norm,mimo_norm")?;
                    for ((th, f), m) in theta.iter().zip(&cmp.fgtb).zip(&cmp.mimo) {
                        writeln!(w, "{},{},{}", th.to_degrees(), f / peak_f, m / peak_m)?;
                    }
                    Ok(())
                })?;
                let status = if cmp.max_deviation < *tolerance {
                    "within-tolerance"
                } else {
                    "documented-discrepancy"
                };
                let line = format!(
                    "offset_hz = {df}, max_deviation = {}, tolerance = {tolerance}, status = {status}",
                    cmp.max_deviation
                );
                let _ = writeln!(summary, "{line}");
                let _ = writeln!(
                    log,
                    "{id} {label}: max deviation {:.6} ({status})",
                    cmp.max_deviation
                );
            }
            out.write_text(&format!("{id}_summary.txt"), &summary)?;
        }
        Evaluation::ScanReport => {
            let report = scan_report(&config, offset)?;
            out.write_text(&format!("{id}.txt"), &report.to_text())?;
            let _ = writeln!(
                log,
                "{id}: scan volume {:.4} sine, speed {:.4e} rad/s, first null {}",
                report.scan_volume.exact,
                report.scan_speed,
                report
                    .first_null
                    .map_or("none".to_string(), |a| format!("{:.4} deg", a.to_degrees()))
            );
        }
        Evaluation::Schedule {
            segments,
            n_t,
            n_theta,
            playback,
        } => {
            let schedule = design_phase_schedule(&config, offset, segments, *n_t)?;
            out.write(&format!("{id}_phase.csv"), |w| {
                writeln!(w, "t_us,phase_cycles,target_deg")?;
                for (t, phi) in schedule.t_axis().iter().zip(schedule.phase()) {
                    writeln!(
                        w,
                        "{},{},{}",
                        t * 1e6,
                        phi,
                        schedule.target_angle(*t).to_degrees()
                    )?;
                }
                Ok(())
            })?;
            let m = config.num_elements();
            let bank = scenario.waveforms.bank(&config);
            let grid = match playback {
                Playback::Fda => sweep_grid_time_variant(
                    &config,
                    plan,
                    |t| schedule.fda_weights(schedule.row_at(t), m),
                    &bank,
                    *n_t,
                    *n_theta,
                )?,
                Playback::PhasedArray => sweep_grid_time_variant(
                    &config,
                    &FrequencyPlan::Uniform(0.0),
                    |t| schedule.phased_array_weights(schedule.row_at(t), m),
                    &bank,
                    *n_t,
                    *n_theta,
                )?,
            };
            let output = GridOutput {
                scale: GridScale::Db,
                csv: true,
                binary: false,
                trajectory: true,
            };
            write_grid(out, id, &grid, &output, None, &mut log)?;
            let _ = writeln!(
                log,
                "{id}: {} segment(s), {}",
                segments.len(),
                describe(segments)
            );
        }
    }
    Ok(log)
}

fn describe(segments: &[ScheduleSegment]) -> String {
    segments
        .iter()
        .map(|s| {
            format!(
                "[{}..{} us: {:.2}..{:.2} deg]",
                s.t_start * 1e6,
                s.t_end * 1e6,
                s.theta_start.to_degrees(),
                s.theta_end.to_degrees()
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Runs every evaluation into `dir`, copying `source` alongside the
/// artifacts. Returns the human-readable log.
pub fn run(scenario: &Scenario, source: &str, dir: &Path) -> Result<String, CliError> {
    let mut out = Outputs::create(dir)?;
    out.write_text("scenario.toml", source)?;
    let mut log = format!("scenario {}\n", scenario.name);
    for (id, eval) in &scenario.evaluations {
        log.push_str(&run_evaluation(scenario, id, eval, &mut out)?);
    }
    let dir = out.finish()?;
    let _ = writeln!(log, "wrote {}", dir.join(MANIFEST).display());
    Ok(log)
}
