//! Scenario files: TOML text, deserialized into raw sections and then
//! converted to engine types with every quantity in base units.

use std::path::PathBuf;

use fdabeam::waveform::{make_chirp_bank, rect_bank};
use fdabeam::{
    steered_weights, ArrayConfig, BasebandWaveform, Engine, FoCoding, FrequencyPlan,
    ModulationForm, ScheduleSegment, TimeModulation, WeightVector,
};
use serde::Deserialize;

use crate::error::CliError;
use crate::units::{Dimension, Quantity};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    description: Option<String>,
    array: RawArray,
    plan: Option<RawPlan>,
    weights: Option<RawWeights>,
    waveforms: Option<RawWaveforms>,
    #[serde(default)]
    evaluation: Vec<RawEvaluation>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    elements: usize,
    carrier: Quantity,
    pulse: Quantity,
    spacing: Option<Quantity>,
    wave_speed: Option<f64>,
    element_gain: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawPlan {
    Uniform {
        offset: Quantity,
    },
    Tabulated {
        offsets: Vec<Quantity>,
    },
    Coded {
        coding: String,
        scale: Quantity,
        seed: Option<u64>,
        code: Option<Vec<u32>>,
    },
    TimeModulated {
        form: String,
        rate: Quantity,
        table: Option<Vec<f64>>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawWeights {
    Uniform,
    Steered { angle: Quantity },
    Random { seed: Option<u64> },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum RawWaveforms {
    Rect,
    Chirp {
        bandwidth: Quantity,
    },
    ChirpBank {
        base: Option<f64>,
        step: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    t_start: Quantity,
    t_end: Quantity,
    theta_start: Quantity,
    theta_end: Option<Quantity>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawEvaluation {
    FitbGrid {
        id: Option<String>,
        n_t: Option<usize>,
        n_theta: Option<usize>,
        engine: Option<String>,
        range: Option<Quantity>,
        window: Option<Vec<Quantity>>,
        trajectory: Option<bool>,
        normalization: Option<String>,
        formats: Option<Vec<String>>,
    },
    LegacyGrid {
        id: Option<String>,
        ranges: Vec<Quantity>,
        absolute_time: Option<bool>,
        t_start: Option<Quantity>,
        n_t: Option<usize>,
        n_theta: Option<usize>,
        trajectory: Option<bool>,
        normalization: Option<String>,
        formats: Option<Vec<String>>,
    },
    ZeroTimeCut {
        id: Option<String>,
        n_theta: Option<usize>,
        spacing: Option<Quantity>,
    },
    FgtbCurve {
        id: Option<String>,
        offsets: Option<Vec<Quantity>>,
        n_theta: Option<usize>,
        covariance: Option<bool>,
        quadrature: Option<String>,
        nodes: Option<usize>,
    },
    MimoCompare {
        id: Option<String>,
        offsets: Vec<Quantity>,
        n_theta: Option<usize>,
        tolerance: Option<f64>,
    },
    ScanReport {
        id: Option<String>,
    },
    Schedule {
        id: Option<String>,
        segments: Vec<RawSegment>,
        n_t: Option<usize>,
        n_theta: Option<usize>,
        playback: Option<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

/// Element spacing rule, resolved per offset for the wavelength forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    /// Fraction of `c / (f_c + (M−1)·Δf)`.
    Wavelengths(f64),
    Meters(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArraySpec {
    pub elements: usize,
    pub carrier: f64,
    pub pulse: f64,
    pub spacing: Spacing,
    pub wave_speed: Option<f64>,
    pub element_gain: Option<f64>,
}

impl ArraySpec {
    /// Array for a uniform offset `offset` (0 for non-uniform plans).
    pub fn config(&self, offset: f64) -> fdabeam::Result<ArrayConfig> {
        self.config_with(self.spacing, offset)
    }

    pub fn config_with(&self, spacing: Spacing, offset: f64) -> fdabeam::Result<ArrayConfig> {
        let mut config = match spacing {
            Spacing::Wavelengths(fraction) => ArrayConfig::with_wavelength_fraction(
                self.elements,
                self.carrier,
                self.pulse,
                offset,
                fraction,
            )?,
            Spacing::Meters(d) => ArrayConfig::new(self.elements, self.carrier, d, self.pulse)?,
        };
        if let Some(c) = self.wave_speed {
            // wavelength-relative spacing follows the propagation speed
            let scale = c / config.wave_speed();
            let d = match spacing {
                Spacing::Wavelengths(_) => config.spacing() * scale,
                Spacing::Meters(d) => d,
            };
            config = config.with_wave_speed(c)?.with_spacing(d)?;
        }
        if let Some(g) = self.element_gain {
            config = config.with_element_gain(g)?;
        }
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Uniform,
    Steered(f64),
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WaveformSpec {
    Rect,
    /// Identical chirps sweeping `bandwidth` over the pulse.
    Chirp(f64),
    ChirpBank {
        base: f64,
        step: f64,
    },
}

impl WaveformSpec {
    /// One waveform per element.
    pub fn bank(&self, config: &ArrayConfig) -> Vec<BasebandWaveform> {
        let tp = config.pulse_duration();
        match self {
            WaveformSpec::Rect => rect_bank(config),
            WaveformSpec::Chirp(bw) => make_chirp_bank(config, bw * tp, 0.0),
            WaveformSpec::ChirpBank { base, step } => make_chirp_bank(config, *base, *step),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Db,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub scale: GridScale,
    pub csv: bool,
    pub binary: bool,
    pub trajectory: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Playback {
    Fda,
    PhasedArray,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    FitbGrid {
        n_t: usize,
        n_theta: usize,
        engine: Engine,
        range: Option<f64>,
        /// Retarded-time interval kept from the full-pulse grid.
        window: Option<(f64, f64)>,
        output: GridOutput,
    },
    LegacyGrid {
        ranges: Vec<f64>,
        absolute_time: bool,
        t_start: Option<f64>,
        n_t: usize,
        n_theta: usize,
        output: GridOutput,
    },
    ZeroTimeCut {
        n_theta: usize,
        spacing: Option<Spacing>,
    },
    FgtbCurve {
        offsets: Option<Vec<f64>>,
        n_theta: usize,
        covariance: bool,
        settings: fdabeam::QuadratureSettings,
    },
    MimoCompare {
        offsets: Vec<f64>,
        n_theta: usize,
        tolerance: f64,
    },
    ScanReport,
    Schedule {
        segments: Vec<ScheduleSegment>,
        n_t: usize,
        n_theta: usize,
        playback: Playback,
    },
}

impl Evaluation {
    pub fn kind(&self) -> &'static str {
        match self {
            Evaluation::FitbGrid { .. } => "fitb_grid",
            Evaluation::LegacyGrid { .. } => "legacy_grid",
            Evaluation::ZeroTimeCut { .. } => "zero_time_cut",
            Evaluation::FgtbCurve { .. } => "fgtb_curve",
            Evaluation::MimoCompare { .. } => "mimo_compare",
            Evaluation::ScanReport => "scan_report",
            Evaluation::Schedule { .. } => "schedule",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub array: ArraySpec,
    pub plan: FrequencyPlan,
    pub weights: WeightSpec,
    pub waveforms: WaveformSpec,
    pub evaluations: Vec<(String, Evaluation)>,
    pub output_dir: Option<PathBuf>,
}

impl Scenario {
    /// Uniform offset of the plan, or 0 for other plans.
    pub fn uniform_offset(&self) -> f64 {
        match self.plan {
            FrequencyPlan::Uniform(df) => df,
            _ => 0.0,
        }
    }

    pub fn config(&self) -> fdabeam::Result<ArrayConfig> {
        self.array.config(self.uniform_offset())
    }

    pub fn weight_vector(
        &self,
        config: &ArrayConfig,
        plan: &FrequencyPlan,
    ) -> fdabeam::Result<WeightVector> {
        let m = config.num_elements();
        match self.weights {
            WeightSpec::Uniform => Ok(WeightVector::uniform(m)),
            WeightSpec::Steered(theta) => steered_weights(config, plan, theta),
            WeightSpec::Random(seed) => Ok(WeightVector::random_phase(m, seed)),
        }
    }
}

fn quantity(q: &Quantity, dim: Dimension, field: &str) -> Result<f64, CliError> {
    q.to_base(dim)
        .map_err(|e| CliError::Parse(format!("{field}: {e}")))
}

fn spacing(q: &Quantity, field: &str) -> Result<Spacing, CliError> {
    match q {
        Quantity::Text(t) if t.trim() == "half-wavelength" => Ok(Spacing::Wavelengths(0.5)),
        Quantity::Text(t) if t.trim() == "wavelength" => Ok(Spacing::Wavelengths(1.0)),
        _ => quantity(q, Dimension::Length, field).map(Spacing::Meters),
    }
}

fn positive(value: usize, field: &str, min: usize) -> Result<usize, CliError> {
    if value < min {
        return Err(CliError::field(
            field,
            format!("must be at least {min}, got {value}"),
        ));
    }
    Ok(value)
}

fn grid_output(
    field: &str,
    trajectory: Option<bool>,
    normalization: Option<String>,
    formats: Option<Vec<String>>,
) -> Result<GridOutput, CliError> {
    let scale = match normalization.as_deref() {
        None | Some("db") => GridScale::Db,
        Some("linear") => GridScale::Linear,
        Some(other) => {
            return Err(CliError::field(
                &format!("{field}.normalization"),
                format!("unknown '{other}' (db, linear)"),
            ))
        }
    };
    let formats = formats.unwrap_or_else(|| vec!["csv".into()]);
    let mut out = GridOutput {
        scale,
        csv: false,
        binary: false,
        trajectory: trajectory.unwrap_or(true),
    };
    for f in &formats {
        match f.as_str() {
            "csv" => out.csv = true,
            "bin" => out.binary = true,
            other => {
                return Err(CliError::field(
                    &format!("{field}.formats"),
                    format!("unknown '{other}' (csv, bin)"),
                ))
            }
        }
    }
    Ok(out)
}

fn parse_plan(raw: Option<RawPlan>, elements: usize) -> Result<FrequencyPlan, CliError> {
    let Some(raw) = raw else {
        return Ok(FrequencyPlan::Uniform(0.0));
    };
    match raw {
        RawPlan::Uniform { offset } => Ok(FrequencyPlan::Uniform(quantity(
            &offset,
            Dimension::Frequency,
            "plan.offset",
        )?)),
        RawPlan::Tabulated { offsets } => {
            let values = offsets
                .iter()
                .enumerate()
                .map(|(i, q)| quantity(q, Dimension::Frequency, &format!("plan.offsets[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FrequencyPlan::Tabulated(values))
        }
        RawPlan::Coded {
            coding,
            scale,
            seed,
            code,
        } => {
            let scale = quantity(&scale, Dimension::Frequency, "plan.scale")?;
            let coding = match coding.as_str() {
                "random" => FoCoding::Random {
                    seed: seed.ok_or_else(|| {
                        CliError::field("plan.seed", "required for random offsets")
                    })?,
                    scale,
                },
                "costas" => match code {
                    Some(code) => FoCoding::Costas { code, scale },
                    None => FoCoding::costas(scale),
                },
                "logarithmic" | "log" => FoCoding::Logarithmic { scale },
                "square" => FoCoding::Square { scale },
                other => {
                    return Err(CliError::field(
                        "plan.coding",
                        format!("unknown '{other}' (random, costas, logarithmic, square)"),
                    ))
                }
            };
            coding
                .plan(elements)
                .map_err(|e| CliError::field("plan", e))
        }
        RawPlan::TimeModulated { form, rate, table } => {
            let form = match (form.as_str(), table) {
                ("sqrt", _) => ModulationForm::SquareRoot,
                ("cbrt", _) => ModulationForm::CubeRoot,
                ("atan", _) => ModulationForm::Arctangent,
                ("sinh", _) => ModulationForm::HyperbolicSine,
                ("sampled", Some(table)) => ModulationForm::Sampled(table),
                ("sampled", None) => {
                    return Err(CliError::field("plan.table", "required for sampled form"))
                }
                (other, _) => {
                    return Err(CliError::field(
                        "plan.form",
                        format!("unknown '{other}' (sqrt, cbrt, atan, sinh, sampled)"),
                    ))
                }
            };
            let rate = quantity(&rate, Dimension::Frequency, "plan.rate")?;
            Ok(FrequencyPlan::TimeModulated(TimeModulation { form, rate }))
        }
    }
}

fn parse_evaluation(raw: RawEvaluation, index: usize) -> Result<(String, Evaluation), CliError> {
    let field = format!("evaluation[{index}]");
    let freq_list = |qs: &[Quantity], name: &str| {
        qs.iter()
            .enumerate()
            .map(|(i, q)| quantity(q, Dimension::Frequency, &format!("{field}.{name}[{i}]")))
            .collect::<Result<Vec<_>, _>>()
    };
    let (id, eval) = match raw {
        RawEvaluation::FitbGrid {
            id,
            n_t,
            n_theta,
            engine,
            range,
            window,
            trajectory,
            normalization,
            formats,
        } => {
            let engine = match engine.as_deref() {
                None | Some("closed_form") => Engine::ClosedForm,
                Some("exact") => Engine::Exact,
                Some(other) => {
                    return Err(CliError::field(
                        &format!("{field}.engine"),
                        format!("unknown '{other}' (closed_form, exact)"),
                    ))
                }
            };
            let range = range
                .map(|r| quantity(&r, Dimension::Length, &format!("{field}.range")))
                .transpose()?;
            let window = match window.as_deref() {
                None => None,
                Some([a, b]) => {
                    let a = quantity(a, Dimension::Time, &format!("{field}.window[0]"))?;
                    let b = quantity(b, Dimension::Time, &format!("{field}.window[1]"))?;
                    if !(a < b) {
                        return Err(CliError::field(
                            &format!("{field}.window"),
                            "start must precede end",
                        ));
                    }
                    Some((a, b))
                }
                Some(_) => {
                    return Err(CliError::field(
                        &format!("{field}.window"),
                        "expects [start, end]",
                    ))
                }
            };
            (
                id,
                Evaluation::FitbGrid {
                    n_t: positive(n_t.unwrap_or(512), &format!("{field}.n_t"), 2)?,
                    n_theta: positive(n_theta.unwrap_or(1024), &format!("{field}.n_theta"), 2)?,
                    engine,
                    range,
                    window,
                    output: grid_output(&field, trajectory, normalization, formats)?,
                },
            )
        }
        RawEvaluation::LegacyGrid {
            id,
            ranges,
            absolute_time,
            t_start,
            n_t,
            n_theta,
            trajectory,
            normalization,
            formats,
        } => {
            let ranges = ranges
                .iter()
                .enumerate()
                .map(|(i, q)| quantity(q, Dimension::Length, &format!("{field}.ranges[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            if ranges.is_empty() {
                return Err(CliError::field(
                    &format!("{field}.ranges"),
                    "needs at least one range",
                ));
            }
            let t_start = t_start
                .map(|t| quantity(&t, Dimension::Time, &format!("{field}.t_start")))
                .transpose()?;
            (
                id,
                Evaluation::LegacyGrid {
                    ranges,
                    absolute_time: absolute_time.unwrap_or(true),
                    t_start,
                    n_t: positive(n_t.unwrap_or(512), &format!("{field}.n_t"), 2)?,
                    n_theta: positive(n_theta.unwrap_or(1024), &format!("{field}.n_theta"), 2)?,
                    output: grid_output(&field, trajectory, normalization, formats)?,
                },
            )
        }
        RawEvaluation::ZeroTimeCut {
            id,
            n_theta,
            spacing: sp,
        } => (
            id,
            Evaluation::ZeroTimeCut {
                n_theta: positive(n_theta.unwrap_or(2048), &format!("{field}.n_theta"), 2)?,
                spacing: sp
                    .map(|s| spacing(&s, &format!("{field}.spacing")))
                    .transpose()?,
            },
        ),
        RawEvaluation::FgtbCurve {
            id,
            offsets,
            n_theta,
            covariance,
            quadrature,
            nodes,
        } => {
            let rule = match quadrature.as_deref() {
                None | Some("gauss-legendre") => {
                    fdabeam::quadrature::QuadratureRule::GaussLegendre { order: 8 }
                }
                Some("trapezoid") => fdabeam::quadrature::QuadratureRule::Trapezoid,
                Some(other) => {
                    return Err(CliError::field(
                        &format!("{field}.quadrature"),
                        format!("unknown '{other}' (gauss-legendre, trapezoid)"),
                    ))
                }
            };
            (
                id,
                Evaluation::FgtbCurve {
                    offsets: offsets.map(|o| freq_list(&o, "offsets")).transpose()?,
                    n_theta: positive(n_theta.unwrap_or(721), &format!("{field}.n_theta"), 2)?,
                    covariance: covariance.unwrap_or(false),
                    settings: fdabeam::QuadratureSettings { rule, nodes },
                },
            )
        }
        RawEvaluation::MimoCompare {
            id,
            offsets,
            n_theta,
            tolerance,
        } => {
            let offsets = freq_list(&offsets, "offsets")?;
            if offsets.is_empty() {
                return Err(CliError::field(
                    &format!("{field}.offsets"),
                    "needs at least one offset",
                ));
            }
            (
                id,
                Evaluation::MimoCompare {
                    offsets,
                    n_theta: positive(n_theta.unwrap_or(721), &format!("{field}.n_theta"), 2)?,
                    tolerance: tolerance.unwrap_or(0.05),
                },
            )
        }
        RawEvaluation::ScanReport { id } => (id, Evaluation::ScanReport),
        RawEvaluation::Schedule {
            id,
            segments,
            n_t,
            n_theta,
            playback,
        } => {
            let segments = segments
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let f = format!("{field}.segments[{i}]");
                    let start = quantity(
                        &s.theta_start,
                        Dimension::Angle,
                        &format!("{f}.theta_start"),
                    )?;
                    let end = match &s.theta_end {
                        Some(q) => quantity(q, Dimension::Angle, &format!("{f}.theta_end"))?,
                        None => start,
                    };
                    Ok(ScheduleSegment::sweep(
                        quantity(&s.t_start, Dimension::Time, &format!("{f}.t_start"))?,
                        quantity(&s.t_end, Dimension::Time, &format!("{f}.t_end"))?,
                        start,
                        end,
                    ))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let playback = match playback.as_deref() {
                None | Some("fda") => Playback::Fda,
                Some("phased") => Playback::PhasedArray,
                Some(other) => {
                    return Err(CliError::field(
                        &format!("{field}.playback"),
                        format!("unknown '{other}' (fda, phased)"),
                    ))
                }
            };
            (
                id,
                Evaluation::Schedule {
                    segments,
                    n_t: positive(n_t.unwrap_or(512), &format!("{field}.n_t"), 2)?,
                    n_theta: positive(n_theta.unwrap_or(1024), &format!("{field}.n_theta"), 2)?,
                    playback,
                },
            )
        }
    };
    let id = id.unwrap_or_else(|| format!("{:02}_{}", index, eval.kind()));
    if id.is_empty()
        || !id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(CliError::field(
            &format!("{field}.id"),
            format!("'{id}' must be non-empty [A-Za-z0-9_-]"),
        ));
    }
    Ok((id, eval))
}

/// Parses scenario text. Syntax and unit errors are `Parse`; content that
/// reads fine but cannot be simulated is `Validation`.
pub fn parse(text: &str) -> Result<Scenario, CliError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string().trim_end().to_string()))?;
    let spacing = match &raw.array.spacing {
        Some(q) => spacing(q, "array.spacing")?,
        None => Spacing::Wavelengths(0.5),
    };
    let array = ArraySpec {
        elements: raw.array.elements,
        carrier: quantity(&raw.array.carrier, Dimension::Frequency, "array.carrier")?,
        pulse: quantity(&raw.array.pulse, Dimension::Time, "array.pulse")?,
        spacing,
        wave_speed: raw.array.wave_speed,
        element_gain: raw.array.element_gain,
    };
    let plan = parse_plan(raw.plan, array.elements)?;
    let weights = match raw.weights {
        None | Some(RawWeights::Uniform) => WeightSpec::Uniform,
        Some(RawWeights::Steered { angle }) => {
            WeightSpec::Steered(quantity(&angle, Dimension::Angle, "weights.angle")?)
        }
        Some(RawWeights::Random { seed }) => WeightSpec::Random(
            seed.ok_or_else(|| CliError::field("weights.seed", "required for random weights"))?,
        ),
    };
    let waveforms = match raw.waveforms {
        None | Some(RawWaveforms::Rect) => WaveformSpec::Rect,
        Some(RawWaveforms::Chirp { bandwidth }) => WaveformSpec::Chirp(quantity(
            &bandwidth,
            Dimension::Frequency,
            "waveforms.bandwidth",
        )?),
        Some(RawWaveforms::ChirpBank { base, step }) => WaveformSpec::ChirpBank {
            base: base.unwrap_or(100.0),
            step: step.unwrap_or(10.0),
        },
    };
    let evaluations = raw
        .evaluation
        .into_iter()
        .enumerate()
        .map(|(i, e)| parse_evaluation(e, i))
        .collect::<Result<Vec<_>, _>>()?;
    let scenario = Scenario {
        name: raw.name,
        description: raw.description,
        array,
        plan,
        weights,
        waveforms,
        evaluations,
        output_dir: raw.output.and_then(|o| o.dir).map(PathBuf::from),
    };
    validate(&scenario)?;
    Ok(scenario)
}

/// Semantic checks that need the engine types.
fn validate(s: &Scenario) -> Result<(), CliError> {
    if s.evaluations.is_empty() {
        return Err(CliError::field(
            "evaluation",
            "scenario has no [[evaluation]] entries",
        ));
    }
    let mut ids: Vec<&str> = s.evaluations.iter().map(|(id, _)| id.as_str()).collect();
    ids.sort_unstable();
    if let Some(pair) = ids.windows(2).find(|p| p[0] == p[1]) {
        return Err(CliError::field(
            "evaluation",
            format!("duplicate id '{}'", pair[0]),
        ));
    }
    let config = s.config().map_err(|e| CliError::field("array", e))?;
    s.plan
        .validate(&config)
        .map_err(|e| CliError::field("plan", e))?;
    s.weight_vector(&config, &s.plan)
        .map_err(|e| CliError::field("weights", e))?;
    let uniform = matches!(s.plan, FrequencyPlan::Uniform(_));
    let static_plan = !matches!(s.plan, FrequencyPlan::TimeModulated(_));
    for (i, (_, eval)) in s.evaluations.iter().enumerate() {
        let field = format!("evaluation[{i}]");
        match eval {
            Evaluation::FitbGrid {
                range: Some(_),
                engine: Engine::ClosedForm,
                ..
            } => {
                return Err(CliError::field(&field, "range needs engine = \"exact\""));
            }
            Evaluation::FitbGrid {
                engine: Engine::ClosedForm,
                ..
            } => {
                if !uniform {
                    return Err(CliError::field(
                        &field,
                        "closed_form engine needs a uniform plan; use engine = \"exact\"",
                    ));
                }
                if matches!(s.weights, WeightSpec::Random(_)) {
                    return Err(CliError::field(
                        &field,
                        "closed_form engine supports uniform or steered weights only",
                    ));
                }
                if !matches!(s.waveforms, WaveformSpec::Rect) {
                    return Err(CliError::field(
                        &field,
                        "closed_form engine assumes rect waveforms",
                    ));
                }
            }
            Evaluation::LegacyGrid { .. }
            | Evaluation::ZeroTimeCut { .. }
            | Evaluation::ScanReport
            | Evaluation::Schedule { .. } => {
                if !uniform {
                    return Err(CliError::field(
                        &field,
                        format!("{} needs a uniform plan", eval.kind()),
                    ));
                }
            }
            Evaluation::FgtbCurve { offsets, .. } => {
                if offsets.is_none() && !static_plan {
                    return Err(CliError::field(
                        &field,
                        "fgtb_curve needs a static plan or an offsets list",
                    ));
                }
            }
            Evaluation::MimoCompare { .. } | Evaluation::FitbGrid { .. } => {}
        }
        if let Evaluation::Schedule { segments, n_t, .. } = eval {
            fdabeam::design_phase_schedule(&config, s.uniform_offset(), segments, *n_t)
                .map_err(|e| CliError::field(&field, e))?;
        }
        if let Evaluation::ScanReport = eval {
            fdabeam::scan::scan_report(&config, s.uniform_offset())
                .map_err(|e| CliError::field(&field, e))?;
        }
        if let Evaluation::ZeroTimeCut {
            spacing: Some(sp), ..
        } = eval
        {
            s.array
                .config_with(*sp, s.uniform_offset())
                .map_err(|e| CliError::field(&format!("{field}.spacing"), e))?;
        }
        if let Evaluation::MimoCompare { offsets, .. }
        | Evaluation::FgtbCurve {
            offsets: Some(offsets),
            ..
        } = eval
        {
            for &df in offsets {
                s.array
                    .config(df)
                    .map_err(|e| CliError::field(&format!("{field}.offsets"), e))?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
[array]
elements = 16
carrier = "10 GHz"
pulse = "5 us"
[plan]
kind = "uniform"
offset = "200 kHz"
[[evaluation]]
kind = "scan_report"
"#;

    #[test]
    fn minimal_scenario() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.plan, FrequencyPlan::Uniform(200e3));
        assert_eq!(s.array.spacing, Spacing::Wavelengths(0.5));
        assert_eq!(s.evaluations[0].0, "00_scan_report");
        let config = s.config().unwrap();
        assert!((config.spacing() - 0.5 * 3e8 / (10e9 + 15.0 * 200e3)).abs() < 1e-15);
    }

    #[test]
    fn empty_text_is_a_parse_error() {
        assert!(matches!(parse(""), Err(CliError::Parse(_))));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let text = MINIMAL.replace("elements = 16", "elements = 16\ncolour = 3");
        let err = parse(&text).unwrap_err();
        assert!(
            matches!(err, CliError::Parse(ref m) if m.contains("colour")),
            "{err}"
        );
    }

    #[test]
    fn bad_units_name_the_field() {
        let text = MINIMAL.replace("\"10 GHz\"", "\"10 km\"");
        let err = parse(&text).unwrap_err();
        assert!(
            matches!(err, CliError::Parse(ref m) if m.starts_with("array.carrier")),
            "{err}"
        );
    }

    #[test]
    fn random_weights_need_a_seed() {
        let text = MINIMAL.replace(
            "[[evaluation]]",
            "[weights]\nkind = \"random\"\n[[evaluation]]",
        );
        let err = parse(&text).unwrap_err();
        assert!(
            matches!(err, CliError::Validation(ref m) if m.starts_with("weights.seed")),
            "{err}"
        );
    }

    #[test]
    fn closed_form_with_coded_plan_is_rejected() {
        let text = r#"
name = "t"
[array]
elements = 16
carrier = "10 GHz"
pulse = "5 us"
[plan]
kind = "coded"
coding = "square"
scale = "1 kHz"
[[evaluation]]
kind = "fitb_grid"
"#;
        assert!(matches!(parse(text), Err(CliError::Validation(_))));
    }

    #[test]
    fn negative_carrier_is_a_validation_error() {
        let text = MINIMAL.replace("\"10 GHz\"", "\"-10 GHz\"");
        let err = parse(&text).unwrap_err();
        assert!(
            matches!(err, CliError::Validation(ref m) if m.starts_with("array")),
            "{err}"
        );
    }
}
