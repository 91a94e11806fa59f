//! Pulse-integrated transmit beampattern (FGTB) through the waveform
//! covariance matrix, the co-located MIMO beampattern, and the diagnostics
//! that compare the two.
//!
//! With the weight convention of [`crate::array`], the energy radiated toward
//! `θ` over one pulse is
//!
//! ```text
//! (1/T_p) ∫ |Σ_m w_m s_m(t) e^{j2πΔf_m t} ā_m(θ)|² dt = (1/T_p) vᴴ R v,   v = conj(w ⊙ ā(θ))
//! ```
//!
//! where `R_mn = ∫ s_m(t) s_n*(t) e^{j2π(Δf_m − Δf_n)t} dt`.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array::{phasor, steering_angle, steering_fo_angle, ArrayConfig, FrequencyPlan, WeightVector};
use crate::error::{Error, Result};
use crate::quadrature::{QuadratureGrid, QuadratureRule};
use crate::waveform::{fold_offsets, BasebandWaveform};

/// Minimum node count for the covariance quadrature.
pub const MIN_QUADRATURE_NODES: usize = 4096;

/// Nodes per fastest integrand cycle used by the default node count.
pub const NODES_PER_CYCLE: f64 = 8.0;

/// Eigenvalues down to `−PSD_TOLERANCE · trace` count as non-negative.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceFlavor {
    /// Offset phases inside the integral.
    Fda,
    /// Baseband waveforms only.
    Mimo,
}

impl CovarianceFlavor {
    pub fn name(&self) -> &'static str {
        match self {
            CovarianceFlavor::Fda => "FDA",
            CovarianceFlavor::Mimo => "MIMO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub rule: QuadratureRule,
    /// Explicit node count; `None` picks `max(4096, ⌈8·T_p·(B + M·Δf)⌉)`.
    pub nodes: Option<usize>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { rule: QuadratureRule::GaussLegendre { order: 8 }, nodes: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<Complex64>,
    flavor: CovarianceFlavor,
    nodes: usize,
    rule: QuadratureRule,
}

impl CovarianceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, m: usize, n: usize) -> Complex64 {
        self.entries[(m, n)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn flavor(&self) -> CovarianceFlavor {
        self.flavor
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// `max |R_mn − conj(R_nm)|`.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in 0..n {
                worst = worst.max((self.entries[(m, k)] - self.entries[(k, m)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOLERANCE * self.trace().abs()
    }

    /// `max |R_mm − 1|`.
    pub fn diagonal_error(&self) -> f64 {
        self.entries
            .diagonal()
            .iter()
            .map(|z| (z - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for k in 0..n {
                if m != k {
                    worst = worst.max(self.entries[(m, k)].norm());
                }
            }
        }
        worst
    }

    /// One row per matrix row, columns `re(R_m0), im(R_m0), re(R_m1), ...`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for m in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .flat_map(|n| {
                    let z = self.entries[(m, n)];
                    [z.re.to_string(), z.im.to_string()]
                })
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// `vᴴ R v`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..n {
            let row: Complex64 = (0..n).map(|k| self.entries[(m, k)] * v[k]).sum();
            acc += v[m].conj() * row;
        }
        acc.re
    }

    /// `Tr{R v vᴴ}`, algebraically equal to [`quadratic_form`](Self::quadratic_form).
    pub fn trace_form(&self, v: &[Complex64]) -> f64 {
        let n = self.dim();
        let vv = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
        (&self.entries * vv).trace().re
    }
}

/// Node count `max(4096, ⌈8·T_p·(B + M·Δf)⌉)` and the Nyquist floor `⌈2·T_p·(B + M·Δf)⌉`.
fn node_counts(
    config: &ArrayConfig,
    waveforms: &[BasebandWaveform],
    plan: &FrequencyPlan,
    flavor: CovarianceFlavor,
) -> (usize, usize) {
    let band = waveforms.iter().map(|w| w.max_frequency()).fold(0.0, f64::max);
    let spread = match flavor {
        CovarianceFlavor::Fda => plan.max_offset(config),
        CovarianceFlavor::Mimo => 0.0,
    };
    let cycles = config.pulse_duration() * (band + spread);
    let default = ((NODES_PER_CYCLE * cycles).ceil() as usize).max(MIN_QUADRATURE_NODES);
    (default, (2.0 * cycles).ceil() as usize)
}

/// Waveform covariance over `[0, T_p]`. The FDA flavor includes the offset
/// phases `e^{j2π(Δf_m − Δf_n)t}` from `plan`; the MIMO flavor ignores the plan.
pub fn covariance(
    config: &ArrayConfig,
    waveforms: &[BasebandWaveform],
    plan: &FrequencyPlan,
    flavor: CovarianceFlavor,
    settings: QuadratureSettings,
) -> Result<CovarianceMatrix> {
    let m_count = config.num_elements();
    if waveforms.len() != m_count {
        return Err(Error::InvalidConfig(format!(
            "covariance needs {m_count} waveforms, got {}",
            waveforms.len()
        )));
    }
    plan.validate(config)?;
    let (default, required) = node_counts(config, waveforms, plan, flavor);
    let requested = settings.nodes.unwrap_or(default);
    let grid = QuadratureGrid::new(settings.rule, 0.0, config.pulse_duration(), requested);
    if grid.len() < required {
        return Err(Error::Sampling { required, provided: grid.len() });
    }

    let tp = config.pulse_duration();
    // columns of X: element signals at every node
    let signals: Vec<Vec<Complex64>> = (0..m_count)
        .into_par_iter()
        .map(|m| {
            grid.nodes
                .iter()
                .map(|&t| {
                    let s = waveforms[m].sample(t);
                    match flavor {
                        CovarianceFlavor::Fda => s * phasor(plan.offset_cycles(m, t, tp)),
                        CovarianceFlavor::Mimo => s,
                    }
                })
                .collect()
        })
        .collect();

    let upper: Vec<(usize, usize, Complex64)> = (0..m_count)
        .into_par_iter()
        .flat_map_iter(|m| {
            let signals = &signals;
            let weights = &grid.weights;
            (m..m_count).map(move |n| {
                let sum: Complex64 = signals[m]
                    .iter()
                    .zip(&signals[n])
                    .zip(weights)
                    .map(|((a, b), w)| a * b.conj() * *w)
                    .sum();
                (m, n, sum)
            })
        })
        .collect();

    let mut entries = DMatrix::from_element(m_count, m_count, Complex64::new(0.0, 0.0));
    for (m, n, z) in upper {
        if m == n {
            entries[(m, m)] = Complex64::new(z.re, 0.0);
        } else {
            entries[(m, n)] = z;
            entries[(n, m)] = z.conj();
        }
    }
    Ok(CovarianceMatrix { entries, flavor, nodes: grid.len(), rule: settings.rule })
}

fn applied_vector(weights: &WeightVector, steering: &[Complex64]) -> Vec<Complex64> {
    weights
        .as_slice()
        .iter()
        .zip(steering)
        .map(|(w, a)| (w * a).conj())
        .collect()
}

fn check_flavor(r: &CovarianceMatrix, expected: CovarianceFlavor) -> Result<()> {
    if r.flavor != expected {
        return Err(Error::FlavorMismatch { expected: expected.name(), found: r.flavor.name() });
    }
    Ok(())
}

fn check_dims(r: &CovarianceMatrix, config: &ArrayConfig, weights: &WeightVector) -> Result<()> {
    weights.check_len(config)?;
    if r.dim() != config.num_elements() {
        return Err(Error::InvalidConfig(format!(
            "covariance is {}x{} for {} elements",
            r.dim(),
            r.dim(),
            config.num_elements()
        )));
    }
    Ok(())
}

/// `ā(θ) = a_T(θ) ⊙ a_T(Δf, θ)`.
pub fn fda_steering(config: &ArrayConfig, plan: &FrequencyPlan, theta: f64) -> Result<Vec<Complex64>> {
    let spatial = steering_angle(config, theta);
    let fo = steering_fo_angle(config, plan, theta)?;
    Ok(spatial.iter().zip(&fo).map(|(a, b)| a * b).collect())
}

/// `(1/T_p)·vᴴ R_FDA v` with `v = conj(w ⊙ ā(θ))`.
pub fn fgtb(
    r: &CovarianceMatrix,
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    theta: f64,
) -> Result<f64> {
    check_flavor(r, CovarianceFlavor::Fda)?;
    check_dims(r, config, weights)?;
    let v = applied_vector(weights, &fda_steering(config, plan, theta)?);
    Ok(r.quadratic_form(&v) / config.pulse_duration())
}

/// Trace form `(1/T_p)·Tr{R_FDA v vᴴ}` of [`fgtb`].
pub fn fgtb_trace(
    r: &CovarianceMatrix,
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    theta: f64,
) -> Result<f64> {
    check_flavor(r, CovarianceFlavor::Fda)?;
    check_dims(r, config, weights)?;
    let v = applied_vector(weights, &fda_steering(config, plan, theta)?);
    Ok(r.trace_form(&v) / config.pulse_duration())
}

/// `vᴴ R_MIMO v` with `v = conj(w ⊙ a_T(θ))`; no `1/T_p` factor.
pub fn mimo_beampattern(
    r: &CovarianceMatrix,
    config: &ArrayConfig,
    weights: &WeightVector,
    theta: f64,
) -> Result<f64> {
    check_flavor(r, CovarianceFlavor::Mimo)?;
    check_dims(r, config, weights)?;
    let v = applied_vector(weights, &steering_angle(config, theta));
    Ok(r.quadratic_form(&v))
}

/// Offset range over which the `a_T(Δf, θ)` term can be neglected:
/// `max(0, (M·B − f_c)/(2M)) ≤ Δf ≤ f_c/(4M² − M)`.
pub fn equivalence_fo_bounds(config: &ArrayConfig, bandwidth: f64) -> (f64, f64) {
    let m = config.num_elements() as f64;
    let f_c = config.carrier_freq();
    let lower = ((m * bandwidth - f_c) / (2.0 * m)).max(0.0);
    let upper = f_c / (4.0 * m * m - m);
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceComparison {
    pub theta: Vec<f64>,
    /// FGTB in absolute units (1/s).
    pub fgtb: Vec<f64>,
    /// MIMO beampattern (dimensionless).
    pub mimo: Vec<f64>,
    /// `max_θ |fgtb/max(fgtb) − mimo/max(mimo)|`.
    pub max_deviation: f64,
}

/// Compares the FGTB of bare waveforms `s_m` under a uniform offset against
/// the MIMO beampattern of `s_m·e^{j2π·m·Δf·t}`, each peak-normalized.
pub fn compare_fgtb_mimo(
    config: &ArrayConfig,
    offset: f64,
    waveforms: &[BasebandWaveform],
    weights: &WeightVector,
    theta: &[f64],
    settings: QuadratureSettings,
) -> Result<EquivalenceComparison> {
    let plan = FrequencyPlan::Uniform(offset);
    let r_fda = covariance(config, waveforms, &plan, CovarianceFlavor::Fda, settings)?;
    let mimo_waveforms = fold_offsets(waveforms, offset);
    // same node count on both sides so Δf = 0 reproduces identical matrices
    let settings = QuadratureSettings { nodes: Some(r_fda.nodes()), ..settings };
    let r_mimo = covariance(
        config,
        &mimo_waveforms,
        &FrequencyPlan::Uniform(0.0),
        CovarianceFlavor::Mimo,
        settings,
    )?;
    let fda_forms: Vec<f64> = theta
        .par_iter()
        .map(|&th| {
            let v = applied_vector(weights, &fda_steering(config, &plan, th)?);
            Ok(r_fda.quadratic_form(&v))
        })
        .collect::<Result<_>>()?;
    let mimo_curve: Vec<f64> = theta
        .par_iter()
        .map(|&th| mimo_beampattern(&r_mimo, config, weights, th))
        .collect::<Result<_>>()?;
    // shapes are compared on the raw quadratic forms; 1/T_p only rescales the FGTB
    let peak_f = fda_forms.iter().copied().fold(0.0, f64::max);
    let peak_m = mimo_curve.iter().copied().fold(0.0, f64::max);
    let max_deviation = if peak_f > 0.0 && peak_m > 0.0 {
        fda_forms
            .iter()
            .zip(&mimo_curve)
            .map(|(f, m)| (f / peak_f - m / peak_m).abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let fgtb_curve = fda_forms.iter().map(|q| q / config.pulse_duration()).collect();
    Ok(EquivalenceComparison {
        theta: theta.to_vec(),
        fgtb: fgtb_curve,
        mimo: mimo_curve,
        max_deviation,
    })
}

/// FGTB over a set of angles.
pub fn fgtb_curve(
    r: &CovarianceMatrix,
    config: &ArrayConfig,
    plan: &FrequencyPlan,
    weights: &WeightVector,
    theta: &[f64],
) -> Result<Vec<f64>> {
    theta.par_iter().map(|&th| fgtb(r, config, plan, weights, th)).collect()
}

/// Ratio of peak to mean over the sampled angles.
pub fn peak_to_mean(curve: &[f64]) -> f64 {
    let peak = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = curve.iter().sum::<f64>() / curve.len() as f64;
    peak / mean
}

/// `max/min` of a curve in dB.
pub fn flatness_db(curve: &[f64]) -> f64 {
    let peak = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = curve.iter().copied().fold(f64::INFINITY, f64::min);
    10.0 * (peak / floor).log10()
}

/// Two-column CSV `theta_deg,value_dB`.
pub fn write_curve_csv<W: Write>(mut out: W, theta: &[f64], values_db: &[f64]) -> io::Result<()> {
    writeln!(out, "theta_deg,value_dB")?;
    for (th, v) in theta.iter().zip(values_db) {
        writeln!(out, "{},{}", th.to_degrees(), v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{default_chirp_bank, rect_bank};

    fn cfg(m: usize, offset: f64) -> ArrayConfig {
        ArrayConfig::half_wavelength(m, 10e9, 5e-6, offset).unwrap()
    }

    #[test]
    fn identical_pulses_are_fully_coherent() {
        let c = cfg(8, 0.0);
        let r = covariance(&c, &rect_bank(&c), &FrequencyPlan::Uniform(0.0), CovarianceFlavor::Fda, Default::default())
            .unwrap();
        for m in 0..8 {
            for n in 0..8 {
                assert!((r.get(m, n) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn harmonic_offsets_are_orthogonal() {
        for rule in [QuadratureRule::Trapezoid, QuadratureRule::GaussLegendre { order: 8 }] {
            let df = 3.0 / 5e-6;
            let c = cfg(6, df);
            let settings = QuadratureSettings { rule, nodes: None };
            let r = covariance(&c, &rect_bank(&c), &FrequencyPlan::Uniform(df), CovarianceFlavor::Fda, settings)
                .unwrap();
            assert!(r.max_off_diagonal() < 1e-10, "{rule:?}");
            assert!(r.diagonal_error() < 1e-12);
        }
    }

    #[test]
    fn undersampling_is_rejected() {
        let c = cfg(16, 10e6);
        let settings = QuadratureSettings { rule: QuadratureRule::Trapezoid, nodes: Some(100) };
        let err = covariance(&c, &default_chirp_bank(&c), &FrequencyPlan::Uniform(10e6), CovarianceFlavor::Fda, settings);
        assert!(matches!(err, Err(Error::Sampling { .. })));
    }

    #[test]
    fn fgtb_examples() {
        let c = cfg(16, 0.0);
        let plan = FrequencyPlan::Uniform(0.0);
        let r = covariance(&c, &rect_bank(&c), &plan, CovarianceFlavor::Fda, Default::default()).unwrap();
        let zero = WeightVector::custom(vec![Complex64::new(0.0, 0.0); 16]);
        assert_eq!(fgtb(&r, &c, &plan, &zero, 0.3).unwrap(), 0.0);
        let v = fgtb(&r, &c, &plan, &WeightVector::uniform(16), 0.0).unwrap();
        assert!((v * 5e-6 - 256.0).abs() < 1e-8);

        let df = 1.0 / 5e-6;
        let c = cfg(16, df);
        let plan = FrequencyPlan::Uniform(df);
        let r = covariance(&c, &rect_bank(&c), &plan, CovarianceFlavor::Fda, Default::default()).unwrap();
        for th in [-1.0, 0.0, 0.4] {
            let v = fgtb(&r, &c, &plan, &WeightVector::uniform(16), th).unwrap();
            assert!((v * 5e-6 - 16.0).abs() < 1e-8);
        }
    }

    #[test]
    fn flavor_is_enforced() {
        let c = cfg(4, 0.0);
        let plan = FrequencyPlan::Uniform(0.0);
        let r = covariance(&c, &rect_bank(&c), &plan, CovarianceFlavor::Mimo, Default::default()).unwrap();
        let w = WeightVector::uniform(4);
        assert!(matches!(fgtb(&r, &c, &plan, &w, 0.0), Err(Error::FlavorMismatch { .. })));
        let r = covariance(&c, &rect_bank(&c), &plan, CovarianceFlavor::Fda, Default::default()).unwrap();
        assert!(matches!(mimo_beampattern(&r, &c, &w, 0.0), Err(Error::FlavorMismatch { .. })));
    }

    #[test]
    fn mimo_examples() {
        let c = cfg(8, 0.0);
        let plan = FrequencyPlan::Uniform(0.0);
        let r = covariance(&c, &rect_bank(&c), &plan, CovarianceFlavor::Mimo, Default::default()).unwrap();
        let v = mimo_beampattern(&r, &c, &WeightVector::uniform(8), 0.0).unwrap();
        assert!((v - 64.0).abs() < 1e-9);

        let df = 2.0 / 5e-6;
        let folded = fold_offsets(&rect_bank(&c), df);
        let r = covariance(&c, &folded, &plan, CovarianceFlavor::Mimo, Default::default()).unwrap();
        for th in [-0.8, 0.0, 0.5] {
            let v = mimo_beampattern(&r, &c, &WeightVector::uniform(8), th).unwrap();
            assert!((v - 8.0).abs() < 1e-8);
        }
    }

    #[test]
    fn bounds_examples() {
        let (lo, hi) = equivalence_fo_bounds(&cfg(16, 0.0), 10e6);
        assert_eq!(lo, 0.0);
        assert_eq!(hi, 10e9 / 1008.0);
        let (_, hi) = equivalence_fo_bounds(&cfg(1, 0.0), 0.0);
        assert_eq!(hi, 10e9 / 3.0);
        let (lo, _) = equivalence_fo_bounds(&cfg(16, 0.0), 1e9);
        assert_eq!(lo, (16.0 * 1e9 - 10e9) / 32.0);
    }

    #[test]
    fn zero_offset_comparison_is_exact() {
        let c = cfg(8, 0.0);
        let theta: Vec<f64> = (0..33).map(|i| -1.5 + 3.0 * i as f64 / 32.0).collect();
        let cmp = compare_fgtb_mimo(&c, 0.0, &default_chirp_bank(&c), &WeightVector::random_phase(8, 1), &theta, Default::default())
            .unwrap();
        assert_eq!(cmp.max_deviation, 0.0);
    }

    #[test]
    fn csv_interleaves_parts() {
        let c = cfg(2, 0.0);
        let r = covariance(&c, &rect_bank(&c), &FrequencyPlan::Uniform(0.0), CovarianceFlavor::Mimo, Default::default())
            .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().all(|l| l.split(',').count() == 4));
    }
}
