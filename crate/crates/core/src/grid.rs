//! Sampled beampattern magnitudes over (t′, θ) with CSV and binary export.

use std::f64::consts::FRAC_PI_2;
use std::io::{self, Read, Write};

use crate::error::{Error, Result};

/// Lower clamp applied when converting to dB.
pub const DB_FLOOR: f64 = -60.0;

/// Magic bytes at the start of a binary grid dump.
pub const GRID_MAGIC: [u8; 8] = *b"FDAGRID1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    LinearMagnitude,
    DbRelPeak,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeampatternGrid {
    t_axis: Vec<f64>,
    theta_axis: Vec<f64>,
    values: Vec<f64>,
    normalization: Normalization,
    full_scale: f64,
}

/// `n` samples evenly spaced over `[0, duration]`, endpoints included.
pub fn time_axis(n: usize, duration: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| duration * i as f64 / (n - 1) as f64).collect()
}

/// `n` cell-centred angles over the open sector (−π/2, π/2).
pub fn angle_axis(n: usize) -> Vec<f64> {
    let step = 2.0 * FRAC_PI_2 / n as f64;
    (0..n).map(|i| -FRAC_PI_2 + step * (i as f64 + 0.5)).collect()
}

fn strictly_increasing(axis: &[f64]) -> bool {
    axis.windows(2).all(|w| w[0] < w[1])
}

impl BeampatternGrid {
    /// `values` is row-major: `values[i * theta_axis.len() + j]` is time `i`, angle `j`.
    /// `full_scale` is the largest magnitude the configuration can reach
    /// (coherent sum of all elements).
    pub fn new(
        t_axis: Vec<f64>,
        theta_axis: Vec<f64>,
        values: Vec<f64>,
        normalization: Normalization,
        full_scale: f64,
    ) -> Result<Self> {
        if t_axis.is_empty() || theta_axis.is_empty() {
            return Err(Error::InvalidConfig("grid axes must be non-empty".into()));
        }
        if !strictly_increasing(&t_axis) || !strictly_increasing(&theta_axis) {
            return Err(Error::InvalidConfig("grid axes must be strictly increasing".into()));
        }
        if values.len() != t_axis.len() * theta_axis.len() {
            return Err(Error::InvalidConfig(format!(
                "grid has {} values for a {}x{} layout",
                values.len(),
                t_axis.len(),
                theta_axis.len()
            )));
        }
        if normalization == Normalization::LinearMagnitude && values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidConfig("linear magnitudes must be non-negative".into()));
        }
        Ok(Self { t_axis, theta_axis, values, normalization, full_scale })
    }

    pub fn t_axis(&self) -> &[f64] {
        &self.t_axis
    }

    pub fn theta_axis(&self) -> &[f64] {
        &self.theta_axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn full_scale(&self) -> f64 {
        self.full_scale
    }

    pub fn n_t(&self) -> usize {
        self.t_axis.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta_axis.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_theta();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta() + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(row, column)` of the global maximum (first occurrence).
    pub fn argmax(&self) -> (usize, usize) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        (idx / self.n_theta(), idx % self.n_theta())
    }

    /// Mean over time rows, one value per angle.
    pub fn time_average(&self) -> Vec<f64> {
        let n = self.n_theta();
        let mut acc = vec![0.0; n];
        for i in 0..self.n_t() {
            for (a, v) in acc.iter_mut().zip(self.row(i)) {
                *a += v;
            }
        }
        acc.iter().map(|a| a / self.n_t() as f64).collect()
    }

    /// `20·log10(v / peak)` clamped at [`DB_FLOOR`]; already-dB grids are returned unchanged.
    pub fn to_db(&self) -> Self {
        if self.normalization == Normalization::DbRelPeak {
            return self.clone();
        }
        let peak = self.max();
        let values = self
            .values
            .iter()
            .map(|&v| {
                if peak > 0.0 && v > 0.0 {
                    (20.0 * (v / peak).log10()).max(DB_FLOOR)
                } else {
                    DB_FLOOR
                }
            })
            .collect();
        Self { values, normalization: Normalization::DbRelPeak, ..self.clone() }
    }

    /// Header `t_us,<θ in degrees>...`, then one row per time sample.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t_us")?;
        for th in &self.theta_axis {
            write!(out, ",{}", th.to_degrees())?;
        }
        writeln!(out)?;
        for (i, t) in self.t_axis.iter().enumerate() {
            write!(out, "{}", t * 1e6)?;
            for v in self.row(i) {
                write!(out, ",{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Little-endian dump: magic, `N_t`, `N_θ` (u64), normalization tag (u64),
    /// `t_first`, `t_last`, `θ_first`, `θ_last` (f64, seconds / radians),
    /// then the row-major f64 values.
    pub fn write_binary<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(&GRID_MAGIC)?;
        out.write_all(&(self.n_t() as u64).to_le_bytes())?;
        out.write_all(&(self.n_theta() as u64).to_le_bytes())?;
        let tag: u64 = match self.normalization {
            Normalization::LinearMagnitude => 0,
            Normalization::DbRelPeak => 1,
        };
        out.write_all(&tag.to_le_bytes())?;
        for v in [
            self.t_axis[0],
            *self.t_axis.last().unwrap(),
            self.theta_axis[0],
            *self.theta_axis.last().unwrap(),
        ] {
            out.write_all(&v.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Inverse of [`write_binary`](Self::write_binary). Axes are rebuilt as
    /// uniform samples between the stored endpoints; `full_scale` is not stored
    /// and comes back as the grid maximum.
    pub fn read_binary<R: Read>(mut input: R) -> io::Result<Self> {
        let mut magic = [0u8; 8];
        input.read_exact(&mut magic)?;
        if magic != GRID_MAGIC {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad grid magic"));
        }
        let mut word = [0u8; 8];
        let mut next_u64 = |input: &mut R| -> io::Result<u64> {
            input.read_exact(&mut word)?;
            Ok(u64::from_le_bytes(word))
        };
        let n_t = next_u64(&mut input)? as usize;
        let n_theta = next_u64(&mut input)? as usize;
        let normalization = match next_u64(&mut input)? {
            0 => Normalization::LinearMagnitude,
            1 => Normalization::DbRelPeak,
            _ => return Err(io::Error::new(io::ErrorKind::InvalidData, "bad normalization tag")),
        };
        let next_f64 = |input: &mut R| -> io::Result<f64> {
            let mut b = [0u8; 8];
            input.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        };
        let (t0, t1) = (next_f64(&mut input)?, next_f64(&mut input)?);
        let (th0, th1) = (next_f64(&mut input)?, next_f64(&mut input)?);
        let mut values = Vec::with_capacity(n_t * n_theta);
        for _ in 0..n_t * n_theta {
            values.push(next_f64(&mut input)?);
        }
        let uniform = |n: usize, a: f64, b: f64| -> Vec<f64> {
            if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        };
        let full_scale = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::new(uniform(n_t, t0, t1), uniform(n_theta, th0, th1), values, normalization, full_scale)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> BeampatternGrid {
        BeampatternGrid::new(
            vec![0.0, 1e-6],
            vec![-0.5, 0.0, 0.5],
            vec![1.0, 4.0, 2.0, 0.0, 0.04, 0.5],
            Normalization::LinearMagnitude,
            4.0,
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_layouts() {
        let bad_axis = BeampatternGrid::new(
            vec![1.0, 0.0],
            vec![0.0],
            vec![1.0, 1.0],
            Normalization::LinearMagnitude,
            1.0,
        );
        assert!(bad_axis.is_err());
        let negative =
            BeampatternGrid::new(vec![0.0], vec![0.0], vec![-1.0], Normalization::LinearMagnitude, 1.0);
        assert!(negative.is_err());
        let short =
            BeampatternGrid::new(vec![0.0], vec![0.0, 1.0], vec![1.0], Normalization::LinearMagnitude, 1.0);
        assert!(short.is_err());
    }

    #[test]
    fn db_conversion_peaks_at_zero_and_floors() {
        let db = small().to_db();
        assert_eq!(db.max(), 0.0);
        assert_eq!(db.value(1, 0), DB_FLOOR);
        assert!((db.value(1, 1) - 20.0 * 0.01f64.log10()).abs() < 1e-12);
        assert_eq!(db.normalization(), Normalization::DbRelPeak);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        small().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("t_us,"));
        assert_eq!(lines[0].split(',').count(), 4);
        assert_eq!(lines[1], "0,1,4,2");
        assert!(lines[2].starts_with("1,"));
    }

    #[test]
    fn axes_helpers() {
        let t = time_axis(5, 4.0);
        assert_eq!(t, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let th = angle_axis(4);
        assert!(th[0] > -FRAC_PI_2 && th[3] < FRAC_PI_2);
        assert!((th[0] + th[3]).abs() < 1e-15);
    }

    #[test]
    fn argmax_and_average() {
        let g = small();
        assert_eq!(g.argmax(), (0, 1));
        let avg = g.time_average();
        assert!((avg[1] - 2.02).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn binary_round_trip(n_t in 1usize..6, n_theta in 1usize..7, seed in 0u64..1000) {
            let t_axis = time_axis(n_t, 5e-6);
            let theta_axis = angle_axis(n_theta);
            let values: Vec<f64> = (0..n_t * n_theta)
                .map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 7.0)
                .collect();
            let grid = BeampatternGrid::new(
                t_axis, theta_axis, values, Normalization::LinearMagnitude, 0.0,
            ).unwrap();
            let mut buf = Vec::new();
            grid.write_binary(&mut buf).unwrap();
            prop_assert_eq!(buf.len(), 8 + 3 * 8 + 4 * 8 + 8 * n_t * n_theta);
            let back = BeampatternGrid::read_binary(&buf[..]).unwrap();
            prop_assert_eq!(back.values(), grid.values());
            prop_assert_eq!(back.n_t(), n_t);
            for (a, b) in back.theta_axis().iter().zip(grid.theta_axis()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
