//! Engineering-unit quantities accepted in scenario files.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Time,
    Length,
    Angle,
}

impl Dimension {
    /// Accepted suffixes and their scale to the base unit (Hz, s, m, rad).
    fn units(self) -> &'static [(&'static str, Scale)] {
        use Scale::{Degrees, Pow10};
        match self {
            Dimension::Frequency => &[
                ("GHz", Pow10(9)),
                ("MHz", Pow10(6)),
                ("kHz", Pow10(3)),
                ("Hz", Pow10(0)),
            ],
            Dimension::Time => &[
                ("ms", Pow10(-3)),
                ("us", Pow10(-6)),
                ("µs", Pow10(-6)),
                ("ns", Pow10(-9)),
                ("s", Pow10(0)),
            ],
            Dimension::Length => &[
                ("km", Pow10(3)),
                ("mm", Pow10(-3)),
                ("cm", Pow10(-2)),
                ("m", Pow10(0)),
            ],
            Dimension::Angle => &[("deg", Degrees), ("°", Degrees), ("rad", Pow10(0))],
        }
    }

    /// Unit assumed for bare numbers.
    fn bare_scale(self) -> Scale {
        match self {
            Dimension::Angle => Scale::Degrees,
            _ => Scale::Pow10(0),
        }
    }

    fn accepted(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| *u)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, Copy)]
enum Scale {
    Pow10(i32),
    Degrees,
}

impl Scale {
    /// Dividing by an exact power of ten keeps `"5 us"` equal to `5e-6`.
    fn apply(self, v: f64) -> f64 {
        match self {
            Scale::Pow10(k) if k >= 0 => v * 10f64.powi(k),
            Scale::Pow10(k) => v / 10f64.powi(-k),
            Scale::Degrees => v.to_radians(),
        }
    }
}

/// A number or a `"<number> <unit>"` string as written in the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl Quantity {
    /// Value in base units. Bare numbers are Hz, s, m, or degrees.
    pub fn to_base(&self, dim: Dimension) -> Result<f64, String> {
        match self {
            Quantity::Number(v) => Ok(dim.bare_scale().apply(*v)),
            Quantity::Text(text) => parse_quantity(text, dim),
        }
    }
}

pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let mut units: Vec<_> = dim.units().to_vec();
    units.sort_by_key(|(u, _)| std::cmp::Reverse(u.len()));
    for (unit, scale) in units {
        if let Some(number) = text.strip_suffix(unit) {
            let number = number.trim();
            return number
                .parse::<f64>()
                .map(|v| scale.apply(v))
                .map_err(|_| format!("cannot read number '{number}' in '{text}'"));
        }
    }
    match text.parse::<f64>() {
        Ok(v) => Ok(dim.bare_scale().apply(v)),
        Err(_) => Err(format!(
            "cannot read '{text}'; expected a number with one of: {}",
            dim.accepted()
        )),
    }
}
