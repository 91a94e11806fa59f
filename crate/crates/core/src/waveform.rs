//! Unit-energy baseband envelopes and frequency-offset coding schemes.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::{phasor, ArrayConfig, FrequencyPlan};
use crate::error::{Error, Result};
use crate::quadrature::{QuadratureGrid, QuadratureRule};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveformKind {
    RectPulse,
    /// Linear FM with chirp rate `γ` (Hz/s): phase `π·γ·t²`.
    RectChirp { rate: f64 },
}

/// A rect-supported envelope on `[0, T_p]`, optionally shifted in frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasebandWaveform {
    kind: WaveformKind,
    pulse_duration: f64,
    bandwidth: f64,
    amplitude: f64,
    freq_shift: f64,
}

impl BasebandWaveform {
    pub fn rect(pulse_duration: f64) -> Self {
        Self {
            kind: WaveformKind::RectPulse,
            pulse_duration,
            bandwidth: 1.0 / pulse_duration,
            amplitude: 1.0 / pulse_duration.sqrt(),
            freq_shift: 0.0,
        }
    }

    /// Declared bandwidth is the swept band `|γ|·T_p`.
    pub fn chirp(pulse_duration: f64, rate: f64) -> Self {
        Self {
            kind: WaveformKind::RectChirp { rate },
            pulse_duration,
            bandwidth: rate.abs() * pulse_duration,
            amplitude: 1.0 / pulse_duration.sqrt(),
            freq_shift: 0.0,
        }
    }

    /// Same envelope multiplied by `exp(j·2π·shift·t)`.
    pub fn with_frequency_shift(mut self, shift: f64) -> Self {
        self.freq_shift = shift;
        self
    }

    pub fn kind(&self) -> WaveformKind {
        self.kind
    }

    pub fn pulse_duration(&self) -> f64 {
        self.pulse_duration
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn frequency_shift(&self) -> f64 {
        self.freq_shift
    }

    /// Highest instantaneous frequency magnitude on the support.
    pub fn max_frequency(&self) -> f64 {
        self.bandwidth + self.freq_shift.abs()
    }

    /// `s(t)`; exactly zero outside `[0, T_p]`.
    pub fn sample(&self, t: f64) -> Complex64 {
        if !(0.0..=self.pulse_duration).contains(&t) {
            return Complex64::new(0.0, 0.0);
        }
        let cycles = match self.kind {
            WaveformKind::RectPulse => 0.0,
            WaveformKind::RectChirp { rate } => 0.5 * rate * t * t,
        } + self.freq_shift * t;
        if cycles == 0.0 {
            Complex64::new(self.amplitude, 0.0)
        } else {
            self.amplitude * phasor(cycles)
        }
    }

    /// `∫|s(t)|² dt` on the given quadrature grid.
    pub fn energy(&self, grid: &QuadratureGrid) -> f64 {
        grid.integrate(|t| self.sample(t).norm_sqr())
    }
}

/// Free function form of [`BasebandWaveform::sample`].
pub fn sample_waveform(waveform: &BasebandWaveform, t: f64) -> Complex64 {
    waveform.sample(t)
}

/// `M` identical unit-energy rect pulses.
pub fn rect_bank(config: &ArrayConfig) -> Vec<BasebandWaveform> {
    vec![BasebandWaveform::rect(config.pulse_duration()); config.num_elements()]
}

/// Chirp `m` has rate `(base + step·m) / T_p²`, i.e. `base + step·m`
/// quadratic-phase cycles over the pulse.
pub fn make_chirp_bank(config: &ArrayConfig, base: f64, step: f64) -> Vec<BasebandWaveform> {
    let tp = config.pulse_duration();
    (0..config.num_elements())
        .map(|m| BasebandWaveform::chirp(tp, (base + step * m as f64) / (tp * tp)))
        .collect()
}

/// Chirp bank with the default `base = 100`, `step = 10`.
pub fn default_chirp_bank(config: &ArrayConfig) -> Vec<BasebandWaveform> {
    make_chirp_bank(config, 100.0, 10.0)
}

/// Folds a uniform offset into the waveforms: element `m` becomes `s_m(t)·exp(j·2π·m·Δf·t)`.
pub fn fold_offsets(waveforms: &[BasebandWaveform], offset: f64) -> Vec<BasebandWaveform> {
    waveforms
        .iter()
        .enumerate()
        .map(|(m, w)| w.with_frequency_shift(w.frequency_shift() + m as f64 * offset))
        .collect()
}

/// Unit-energy check with a Gauss–Legendre grid fine enough for the chirp.
pub fn energy_error(waveform: &BasebandWaveform) -> f64 {
    let cycles = waveform.max_frequency() * waveform.pulse_duration();
    let count = ((16.0 * cycles).ceil() as usize).max(256);
    let grid = QuadratureGrid::new(
        QuadratureRule::GaussLegendre { order: 8 },
        0.0,
        waveform.pulse_duration(),
        count,
    );
    (waveform.energy(&grid) - 1.0).abs()
}

/// Order-16 Costas sequence from the Welch construction with `p = 17`, `g = 3`.
pub const DEFAULT_COSTAS_16: [u32; 16] = [1, 3, 9, 10, 13, 5, 15, 11, 16, 14, 8, 7, 4, 12, 2, 6];

/// Welch Costas sequence `g^i mod p`, `i = 0..p−2`, for prime `p` and primitive root `g`.
pub fn welch_costas(prime: u32, root: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(prime as usize - 1);
    let mut v = 1u64;
    for _ in 0..prime - 1 {
        out.push(v as u32);
        v = v * root as u64 % prime as u64;
    }
    out
}

/// True when every displacement vector between two marks is distinct.
pub fn is_costas(seq: &[u32]) -> bool {
    let n = seq.len();
    let mut sorted = seq.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    for shift in 1..n {
        let mut diffs: Vec<i64> = (0..n - shift)
            .map(|i| seq[i + shift] as i64 - seq[i] as i64)
            .collect();
        diffs.sort_unstable();
        if diffs.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

/// Nonlinear offset coding schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum FoCoding {
    /// `Δf_m = ε_m·Δf`, `ε_m` uniform on (0, 1) from a seeded generator.
    Random { seed: u64, scale: f64 },
    /// `Δf_m = c_m·Δf` with `c_m` the Costas code.
    Costas { code: Vec<u32>, scale: f64 },
    /// `Δf_m = ln(m+1)·Δf`.
    Logarithmic { scale: f64 },
    /// `Δf_m = m²·Δf`.
    Square { scale: f64 },
}

impl FoCoding {
    pub fn costas(scale: f64) -> Self {
        FoCoding::Costas { code: DEFAULT_COSTAS_16.to_vec(), scale }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FoCoding::Random { .. } => "random",
            FoCoding::Costas { .. } => "costas",
            FoCoding::Logarithmic { .. } => "logarithmic",
            FoCoding::Square { .. } => "square",
        }
    }

    pub fn plan(&self, num_elements: usize) -> Result<FrequencyPlan> {
        generate_offsets(self, num_elements).map(FrequencyPlan::Tabulated)
    }
}

pub fn generate_offsets(coding: &FoCoding, num_elements: usize) -> Result<Vec<f64>> {
    let offsets = match coding {
        FoCoding::Random { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..num_elements)
                .map(|_| {
                    // open interval: resample the (measure-zero) exact zero
                    let mut eps = rng.gen::<f64>();
                    while eps == 0.0 {
                        eps = rng.gen::<f64>();
                    }
                    eps * scale
                })
                .collect()
        }
        FoCoding::Costas { code, scale } => {
            if code.len() < num_elements {
                return Err(Error::InvalidConfig(format!(
                    "Costas code has {} entries, {} elements need coding",
                    code.len(),
                    num_elements
                )));
            }
            code[..num_elements].iter().map(|&c| c as f64 * scale).collect()
        }
        FoCoding::Logarithmic { scale } => {
            (0..num_elements).map(|m| ((m + 1) as f64).ln() * scale).collect()
        }
        FoCoding::Square { scale } => {
            (0..num_elements).map(|m| (m * m) as f64 * scale).collect()
        }
    };
    Ok(offsets)
}
