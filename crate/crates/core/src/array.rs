//! Physical array configuration, frequency-offset plans, weights and the
//! steering vectors shared by every beampattern engine.
//!
//! Element `m` (0-based) sits at `m·d` along the array axis and radiates at
//! `f_c + Δf_m`. Angles are radians, measured from broadside.
//!
//! Weights are applied as element coefficients: the array factor is
//! `Σ_m w_m · a_m(t′, θ)`. Under this convention the steering weight
//! `conj(a_T(θ₀) ⊙ a_T(Δf, θ₀))` yields an array factor of exactly `M` at
//! `(t′ = 0, θ = θ₀)`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Propagation speed used by every bundled scenario (m/s).
pub const DEFAULT_WAVE_SPEED: f64 = 3.0e8;

const TWO_PI: f64 = 2.0 * PI;

/// Unit phasor `exp(j·2π·cycles)`.
#[inline]
pub(crate) fn phasor(cycles: f64) -> Complex64 {
    Complex64::cis(TWO_PI * cycles)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrayConfig {
    num_elements: usize,
    carrier_freq: f64,
    spacing: f64,
    pulse_duration: f64,
    wave_speed: f64,
    element_gain: f64,
}

impl ArrayConfig {
    /// Builds a uniform linear array with the default propagation speed.
    pub fn new(
        num_elements: usize,
        carrier_freq: f64,
        spacing: f64,
        pulse_duration: f64,
    ) -> Result<Self> {
        let config = Self {
            num_elements,
            carrier_freq,
            spacing,
            pulse_duration,
            wave_speed: DEFAULT_WAVE_SPEED,
            element_gain: 1.0,
        };
        config.validate()?;
        Ok(config)
    }

    /// Array whose spacing is half of `c / (f_c + (M−1)·Δf)`, the highest
    /// element frequency under a uniform offset `Δf`.
    pub fn half_wavelength(
        num_elements: usize,
        carrier_freq: f64,
        pulse_duration: f64,
        offset: f64,
    ) -> Result<Self> {
        Self::with_wavelength_fraction(num_elements, carrier_freq, pulse_duration, offset, 0.5)
    }

    /// Array whose spacing is `fraction · c / (f_c + (M−1)·Δf)`.
    pub fn with_wavelength_fraction(
        num_elements: usize,
        carrier_freq: f64,
        pulse_duration: f64,
        offset: f64,
        fraction: f64,
    ) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidConfig("array needs at least one element".into()));
        }
        let top = carrier_freq + (num_elements as f64 - 1.0) * offset;
        if !(top > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "highest element frequency {top} Hz is not positive"
            )));
        }
        Self::new(
            num_elements,
            carrier_freq,
            fraction * DEFAULT_WAVE_SPEED / top,
            pulse_duration,
        )
    }

    pub fn with_wave_speed(mut self, wave_speed: f64) -> Result<Self> {
        self.wave_speed = wave_speed;
        self.validate()?;
        Ok(self)
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        self.spacing = spacing;
        self.validate()?;
        Ok(self)
    }

    pub fn with_element_gain(mut self, gain: f64) -> Result<Self> {
        self.element_gain = gain;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.num_elements == 0 {
            return Err(Error::InvalidConfig("array needs at least one element".into()));
        }
        let positive = [
            ("carrier frequency", self.carrier_freq),
            ("element spacing", self.spacing),
            ("pulse duration", self.pulse_duration),
            ("propagation speed", self.wave_speed),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !self.element_gain.is_finite() {
            return Err(Error::InvalidConfig("element gain must be finite".into()));
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn pulse_duration(&self) -> f64 {
        self.pulse_duration
    }

    pub fn wave_speed(&self) -> f64 {
        self.wave_speed
    }

    pub fn element_gain(&self) -> f64 {
        self.element_gain
    }

    /// Narrowband figure of merit `M·d·B / c`; the model assumes it is ≪ 1.
    pub fn narrowband_ratio(&self, bandwidth: f64) -> f64 {
        self.num_elements as f64 * self.spacing * bandwidth / self.wave_speed
    }

    /// One-way delay (s) from element 0 to element `m` projected on `θ`.
    #[inline]
    pub(crate) fn element_delay(&self, m: usize, theta: f64) -> f64 {
        m as f64 * self.spacing * theta.sin() / self.wave_speed
    }
}

/// Analytic shape `g` of a time-modulated offset `χ_m(τ) = m · rate · g(τ / T_p)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulationForm {
    SquareRoot,
    CubeRoot,
    Arctangent,
    HyperbolicSine,
    /// User table sampled uniformly on `[0, 1]`, linearly interpolated and
    /// clamped to the end values outside that interval.
    Sampled(Vec<f64>),
}

impl ModulationForm {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            // odd extension keeps the form defined for the small negative
            // arguments that occur at t′ = 0 on the negative-θ side
            ModulationForm::SquareRoot => u.signum() * u.abs().sqrt(),
            ModulationForm::CubeRoot => u.cbrt(),
            ModulationForm::Arctangent => u.atan(),
            ModulationForm::HyperbolicSine => u.sinh(),
            ModulationForm::Sampled(table) => sample_table(table, u),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModulationForm::SquareRoot => "sqrt",
            ModulationForm::CubeRoot => "cbrt",
            ModulationForm::Arctangent => "atan",
            ModulationForm::HyperbolicSine => "sinh",
            ModulationForm::Sampled(_) => "sampled",
        }
    }
}

fn sample_table(table: &[f64], u: f64) -> f64 {
    match table.len() {
        0 => 0.0,
        1 => table[0],
        n => {
            let pos = u.clamp(0.0, 1.0) * (n - 1) as f64;
            let i = (pos.floor() as usize).min(n - 2);
            let frac = pos - i as f64;
            table[i] + frac * (table[i + 1] - table[i])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeModulation {
    pub form: ModulationForm,
    /// Scale of the per-element offset (Hz).
    pub rate: f64,
}

impl TimeModulation {
    /// `χ_m(τ)` in Hz for a pulse of duration `pulse_duration`.
    pub fn offset_at(&self, m: usize, tau: f64, pulse_duration: f64) -> f64 {
        m as f64 * self.rate * self.form.eval(tau / pulse_duration)
    }
}

/// Per-element frequency offsets.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyPlan {
    /// `Δf_m = m·Δf`.
    Uniform(f64),
    /// Explicit offsets `Δf_m` (Hz), one per element.
    Tabulated(Vec<f64>),
    /// Offsets that vary within the pulse.
    TimeModulated(TimeModulation),
}

impl FrequencyPlan {
    pub fn validate(&self, config: &ArrayConfig) -> Result<()> {
        match self {
            FrequencyPlan::Uniform(df) if !df.is_finite() => {
                Err(Error::InvalidConfig("frequency offset must be finite".into()))
            }
            FrequencyPlan::Tabulated(offsets) if offsets.len() != config.num_elements() => {
                Err(Error::InvalidConfig(format!(
                    "tabulated plan has {} offsets for {} elements",
                    offsets.len(),
                    config.num_elements()
                )))
            }
            FrequencyPlan::Tabulated(offsets) if offsets.iter().any(|f| !f.is_finite()) => {
                Err(Error::InvalidConfig("tabulated offsets must be finite".into()))
            }
            FrequencyPlan::TimeModulated(tm) if !tm.rate.is_finite() => {
                Err(Error::InvalidConfig("modulation rate must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Static offset of element `m`, or `None` for time-modulated plans.
    pub fn offset(&self, m: usize) -> Option<f64> {
        match self {
            FrequencyPlan::Uniform(df) => Some(m as f64 * df),
            FrequencyPlan::Tabulated(offsets) => offsets.get(m).copied(),
            FrequencyPlan::TimeModulated(_) => None,
        }
    }

    /// Largest |Δf_m| over the array; for time-modulated plans the bound
    /// over the pulse evaluated on a coarse grid.
    pub fn max_offset(&self, config: &ArrayConfig) -> f64 {
        let m_count = config.num_elements();
        match self {
            FrequencyPlan::Uniform(df) => (m_count as f64 - 1.0) * df.abs(),
            FrequencyPlan::Tabulated(offsets) => {
                offsets.iter().fold(0.0, |acc: f64, f| acc.max(f.abs()))
            }
            FrequencyPlan::TimeModulated(tm) => {
                let tp = config.pulse_duration();
                (0..=64)
                    .map(|i| tm.offset_at(m_count - 1, tp * i as f64 / 64.0, tp).abs())
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Phase (cycles) accumulated by the offset of element `m` at local time `tau`.
    #[inline]
    pub(crate) fn offset_cycles(&self, m: usize, tau: f64, pulse_duration: f64) -> f64 {
        match self {
            FrequencyPlan::Uniform(df) => m as f64 * df * tau,
            FrequencyPlan::Tabulated(offsets) => offsets[m] * tau,
            FrequencyPlan::TimeModulated(tm) => tm.offset_at(m, tau, pulse_duration) * tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightOrigin {
    Uniform,
    Steered(f64),
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<Complex64>,
    origin: WeightOrigin,
}

impl WeightVector {
    pub fn uniform(num_elements: usize) -> Self {
        Self {
            weights: vec![Complex64::new(1.0, 0.0); num_elements],
            origin: WeightOrigin::Uniform,
        }
    }

    pub fn custom(weights: Vec<Complex64>) -> Self {
        Self { weights, origin: WeightOrigin::Custom }
    }

    /// Unimodular weights `exp(j·2π·ε_m)` with `ε_m` uniform on `[0, 1)`.
    pub fn random_phase(num_elements: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..num_elements).map(|_| phasor(rng.gen::<f64>())).collect();
        Self::custom(weights)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn origin(&self) -> WeightOrigin {
        self.origin
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    pub(crate) fn check_len(&self, config: &ArrayConfig) -> Result<()> {
        if self.weights.len() != config.num_elements() {
            return Err(Error::InvalidConfig(format!(
                "weight vector has {} entries for {} elements",
                self.weights.len(),
                config.num_elements()
            )));
        }
        Ok(())
    }
}

/// A far-field observation point in retarded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub retarded_time: f64,
    pub theta: f64,
    /// Absolute `(t, r)` the retarded time was derived from, if any.
    pub absolute: Option<(f64, f64)>,
}

impl EvalPoint {
    pub fn new(retarded_time: f64, theta: f64) -> Self {
        Self { retarded_time, theta, absolute: None }
    }

    /// Point at absolute time `t` and slant range `r`; `t′ = t − r/c`.
    pub fn from_absolute(time: f64, range: f64, theta: f64, wave_speed: f64) -> Self {
        Self {
            retarded_time: time - range / wave_speed,
            theta,
            absolute: Some((time, range)),
        }
    }

    pub fn in_pulse(&self, pulse_duration: f64) -> bool {
        (0.0..=pulse_duration).contains(&self.retarded_time)
    }

    pub fn in_visible_sector(&self) -> bool {
        self.theta.abs() < FRAC_PI_2
    }
}

/// `c / (f_c + (M−1)·Δf)` for a uniform plan.
pub fn reference_wavelength(config: &ArrayConfig, plan: &FrequencyPlan) -> Result<f64> {
    match plan {
        FrequencyPlan::Uniform(df) => Ok(config.wave_speed()
            / (config.carrier_freq() + (config.num_elements() as f64 - 1.0) * df)),
        _ => Err(Error::UnsupportedPlan("reference wavelength needs a uniform plan")),
    }
}

/// `a_T(θ)`: entry `m` is `exp(j·2π·(f_c/c)·m·d·sinθ)`.
pub fn steering_angle(config: &ArrayConfig, theta: f64) -> Vec<Complex64> {
    let f_c = config.carrier_freq();
    (0..config.num_elements())
        .map(|m| phasor(f_c * config.element_delay(m, theta)))
        .collect()
}

/// `a_T(Δf, θ)`: the offset-dependent spatial term `exp(j·2π·Δf_m·m·d·sinθ/c)`.
pub fn steering_fo_angle(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    theta: f64,
) -> Result<Vec<Complex64>> {
    static_offsets(config, plan)?;
    Ok((0..config.num_elements())
        .map(|m| {
            let offset = plan.offset(m).unwrap_or(0.0);
            phasor(offset * config.element_delay(m, theta))
        })
        .collect())
}

/// `a_T(Δf, t′)`: entry `m` is `exp(j·2π·Δf_m·t′)`.
pub fn steering_time(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    retarded_time: f64,
) -> Result<Vec<Complex64>> {
    static_offsets(config, plan)?;
    Ok((0..config.num_elements())
        .map(|m| phasor(plan.offset(m).unwrap_or(0.0) * retarded_time))
        .collect())
}

fn static_offsets(config: &ArrayConfig, plan: &FrequencyPlan) -> Result<()> {
    if matches!(plan, FrequencyPlan::TimeModulated(_)) {
        return Err(Error::UnsupportedPlan(
            "time-modulated offsets have no static steering vector",
        ));
    }
    plan.validate(config)
}

/// Weights `conj(a_T(θ₀) ⊙ a_T(Δf, θ₀))` that place the mainlobe at `θ₀`
/// at the start of the pulse.
pub fn steered_weights(
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    theta0: f64,
) -> Result<WeightVector> {
    if !(theta0.abs() < FRAC_PI_2) {
        return Err(Error::OutOfSector { theta: theta0 });
    }
    let spatial = steering_angle(config, theta0);
    let fo = steering_fo_angle(config, plan, theta0)?;
    let weights = spatial.iter().zip(&fo).map(|(a, b)| (a * b).conj()).collect();
    Ok(WeightVector { weights, origin: WeightOrigin::Steered(theta0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig_config() -> ArrayConfig {
        ArrayConfig::new(16, 10e9, 0.015, 5e-6).unwrap()
    }

    #[test]
    fn reference_wavelength_examples() {
        let config = fig_config();
        let lam = reference_wavelength(&config, &FrequencyPlan::Uniform(0.0)).unwrap();
        assert!((lam - 0.03).abs() < 1e-15);

        let lam = reference_wavelength(&config, &FrequencyPlan::Uniform(200e3)).unwrap();
        assert!((lam - 3e8 / 1.0003e10).abs() < 1e-15 * lam);
        assert!((lam - 0.029_991).abs() < 1e-6);

        let single = ArrayConfig::new(1, 10e9, 0.015, 5e-6).unwrap();
        let lam = reference_wavelength(&single, &FrequencyPlan::Uniform(1e6)).unwrap();
        assert!((lam - 0.03).abs() < 1e-15);

        let err = reference_wavelength(&config, &FrequencyPlan::Tabulated(vec![0.0; 16]));
        assert!(matches!(err, Err(Error::UnsupportedPlan(_))));
    }

    #[test]
    fn steering_angle_examples() {
        let config = fig_config();
        assert!(steering_angle(&config, 0.0).iter().all(|a| (a - 1.0).norm() < 1e-15));

        let pair = ArrayConfig::new(2, 10e9, 0.015, 5e-6).unwrap();
        let a = steering_angle(&pair, FRAC_PI_2);
        assert!((a[0] - 1.0).norm() < 1e-15);
        assert!((a[1] + 1.0).norm() < 1e-12);

        let a = steering_angle(&config, 30f64.to_radians());
        let expected = phasor(0.25);
        assert!((a[1] - expected).norm() < 1e-12);
    }

    #[test]
    fn steering_fo_angle_examples() {
        let config = fig_config();
        let plan = FrequencyPlan::Uniform(10e6);
        assert!(steering_fo_angle(&config, &plan, 0.0)
            .unwrap()
            .iter()
            .all(|a| (a - 1.0).norm() < 1e-15));
        let zero = FrequencyPlan::Uniform(0.0);
        assert!(steering_fo_angle(&config, &zero, 0.7)
            .unwrap()
            .iter()
            .all(|a| *a == Complex64::new(1.0, 0.0)));

        let a = steering_fo_angle(&config, &plan, FRAC_PI_2).unwrap();
        assert!((a[15] - phasor(0.1125)).norm() < 1e-12);

        let tm = FrequencyPlan::TimeModulated(TimeModulation {
            form: ModulationForm::SquareRoot,
            rate: 1e3,
        });
        assert!(matches!(
            steering_fo_angle(&config, &tm, 0.1),
            Err(Error::UnsupportedPlan(_))
        ));
    }

    #[test]
    fn steering_time_examples() {
        let config = fig_config();
        let plan = FrequencyPlan::Uniform(200e3);
        assert!(steering_time(&config, &plan, 0.0).unwrap().iter().all(|a| *a == 1.0.into()));
        let a = steering_time(&config, &plan, 2.5e-6).unwrap();
        assert!((a[1] - phasor(0.5)).norm() < 1e-12);

        let full = FrequencyPlan::Uniform(1.0 / config.pulse_duration());
        let a = steering_time(&config, &full, config.pulse_duration()).unwrap();
        assert!(a.iter().all(|v| (v - 1.0).norm() < 1e-12));
    }

    #[test]
    fn steered_weights_examples() {
        let config = fig_config();
        let plan = FrequencyPlan::Uniform(40e3);
        let w = steered_weights(&config, &plan, 0.0).unwrap();
        assert!(w.as_slice().iter().all(|v| (v - 1.0).norm() < 1e-15));
        assert_eq!(w.origin(), WeightOrigin::Steered(0.0));

        let single = ArrayConfig::new(1, 10e9, 0.015, 5e-6).unwrap();
        let w = steered_weights(&single, &plan, 0.4).unwrap();
        assert_eq!(w.as_slice(), &[Complex64::new(1.0, 0.0)]);

        assert!(matches!(
            steered_weights(&config, &plan, FRAC_PI_2),
            Err(Error::OutOfSector { .. })
        ));
    }

    #[test]
    fn conjugation_identity_gives_m() {
        let config = ArrayConfig::half_wavelength(16, 10e9, 5e-6, 40e3).unwrap();
        let plan = FrequencyPlan::Uniform(40e3);
        for deg in [-60.0, -30.0, 0.0, 30.0, 60.0f64] {
            let theta0 = deg.to_radians();
            let w = steered_weights(&config, &plan, theta0).unwrap();
            let a = steering_angle(&config, theta0);
            let b = steering_fo_angle(&config, &plan, theta0).unwrap();
            let sum: Complex64 = w
                .as_slice()
                .iter()
                .zip(a.iter().zip(&b))
                .map(|(w, (a, b))| w * a * b)
                .sum();
            assert!((sum.re - 16.0).abs() < 1e-12 && sum.im.abs() < 1e-12, "{deg}: {sum}");
        }
    }

    #[test]
    fn config_validation() {
        assert!(ArrayConfig::new(0, 1e9, 0.1, 1e-6).is_err());
        assert!(ArrayConfig::new(4, -1e9, 0.1, 1e-6).is_err());
        assert!(ArrayConfig::new(4, 1e9, 0.0, 1e-6).is_err());
        assert!(ArrayConfig::new(4, 1e9, 0.1, 0.0).is_err());
        assert!(fig_config().with_wave_speed(0.0).is_err());
        let c = fig_config().with_wave_speed(299_792_458.0).unwrap();
        assert_eq!(c.wave_speed(), 299_792_458.0);
        assert!((fig_config().narrowband_ratio(10e6) - 16.0 * 0.015 * 10e6 / 3e8).abs() < 1e-15);
    }

    #[test]
    fn tabulated_plan_length_checked() {
        let config = fig_config();
        let plan = FrequencyPlan::Tabulated(vec![0.0; 3]);
        assert!(plan.validate(&config).is_err());
        assert!(steering_time(&config, &plan, 1e-6).is_err());
    }

    #[test]
    fn random_phase_weights_are_reproducible() {
        let a = WeightVector::random_phase(40, 7);
        let b = WeightVector::random_phase(40, 7);
        let c = WeightVector::random_phase(40, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.as_slice().iter().all(|w| (w.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn sampled_form_interpolates() {
        let form = ModulationForm::Sampled(vec![0.0, 1.0, 4.0]);
        assert_eq!(form.eval(0.25), 0.5);
        assert_eq!(form.eval(0.75), 2.5);
        assert_eq!(form.eval(2.0), 4.0);
        assert_eq!(form.eval(-1.0), 0.0);
        assert_eq!(ModulationForm::SquareRoot.eval(-0.25), -0.5);
    }
}
