//! Unit-suffixed quantities and time grids.
//!
//! Internal units are μm, μs and rad/μs. Quantities are written as
//! `"<number> <unit>"`, e.g. `"2π"` is not accepted but `"1 MHz"` is
//! (2π·1 rad/μs). A bare number is rejected for every physical quantity.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    /// rad/μs; also accepts rates in 1/μs.
    AngularFrequency,
    /// rad/μs·μm⁶.
    C6,
    Length,
    Density,
    Time,
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dimension::AngularFrequency => "angular frequency (e.g. rad/us, MHz, 1/us)",
            Dimension::C6 => "C6 coefficient (e.g. rad/us*um^6, GHz*um^6)",
            Dimension::Length => "length (e.g. um, nm)",
            Dimension::Density => "density (e.g. um^-3, cm^-3)",
            Dimension::Time => "time (e.g. us, ns, ps)",
            Dimension::Angle => "angle (rad, deg, pi)",
        };
        f.write_str(s)
    }
}

const TWO_PI: f64 = 2.0 * PI;

/// Factor converting one `unit` to internal units, if `unit` measures `dim`.
fn unit_factor(dim: Dimension, unit: &str) -> Option<f64> {
    let u = unit.trim().replace('μ', "u").replace('µ', "u").replace(' ', "");
    let f = match dim {
        Dimension::AngularFrequency => match u.as_str() {
            "rad/us" => 1.0,
            "rad/ms" => 1e-3,
            "rad/s" => 1e-6,
            "1/us" | "us^-1" => 1.0,
            "1/ms" | "ms^-1" => 1e-3,
            "1/s" | "s^-1" => 1e-6,
            "Hz" => TWO_PI * 1e-6,
            "kHz" => TWO_PI * 1e-3,
            "MHz" => TWO_PI,
            "GHz" => TWO_PI * 1e3,
            _ => return None,
        },
        Dimension::C6 => match u.as_str() {
            "rad/us*um^6" => 1.0,
            "Hz*um^6" => TWO_PI * 1e-6,
            "kHz*um^6" => TWO_PI * 1e-3,
            "MHz*um^6" => TWO_PI,
            "GHz*um^6" => TWO_PI * 1e3,
            _ => return None,
        },
        Dimension::Length => match u.as_str() {
            "um" => 1.0,
            "nm" => 1e-3,
            "mm" => 1e3,
            "m" => 1e6,
            _ => return None,
        },
        Dimension::Density => match u.as_str() {
            "um^-3" | "1/um^3" => 1.0,
            "cm^-3" | "1/cm^3" => 1e-12,
            "m^-3" | "1/m^3" => 1e-18,
            _ => return None,
        },
        Dimension::Time => match u.as_str() {
            "us" => 1.0,
            "ns" => 1e-3,
            "ps" => 1e-6,
            "ms" => 1e3,
            "s" => 1e6,
            _ => return None,
        },
        Dimension::Angle => match u.as_str() {
            "rad" => 1.0,
            "deg" => PI / 180.0,
            "pi" | "π" => PI,
            _ => return None,
        },
    };
    Some(f)
}

/// Splits a leading floating-point literal from the rest of `s`.
fn split_number(s: &str) -> Option<(f64, &str)> {
    let s = s.trim();
    let bytes = s.as_bytes();
    let mut end = 0;
    let mut seen_digit = false;
    while end < bytes.len() {
        let c = bytes[end] as char;
        let ok = match c {
            '0'..='9' => {
                seen_digit = true;
                true
            }
            '+' | '-' => end == 0 || matches!(bytes[end - 1] as char, 'e' | 'E'),
            '.' => true,
            'e' | 'E' => seen_digit && bytes.get(end + 1).is_some_and(|n| n.is_ascii_digit() || *n == b'-' || *n == b'+'),
            _ => false,
        };
        if !ok {
            break;
        }
        end += 1;
    }
    let value = s[..end].parse::<f64>().ok()?;
    Some((value, &s[end..]))
}

/// Parses `"<number> <unit>"` into internal units of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let (value, unit) =
        split_number(text).ok_or_else(|| Error::Config(format!("'{text}' does not start with a number")))?;
    if unit.trim().is_empty() {
        return Err(Error::Config(format!("'{text}' has no unit; expected a {dim}")));
    }
    let factor = unit_factor(dim, unit)
        .ok_or_else(|| Error::Config(format!("unknown unit '{}' in '{text}'; expected a {dim}", unit.trim())))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("'{text}' is not finite")));
    }
    Ok(value * factor)
}

/// Converts an internal value back to `unit`.
pub fn to_unit(value: f64, dim: Dimension, unit: &str) -> Result<f64> {
    let factor = unit_factor(dim, unit).ok_or_else(|| Error::Config(format!("unknown unit '{unit}' for a {dim}")))?;
    Ok(value / factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Lin,
    Log,
}

/// Grid endpoints are either in units of 1/|V₀| (no suffix) or physical
/// times (time suffix).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridUnits {
    V0t,
    Microseconds,
}

/// `lin:start:stop:n` or `log:start:stop:n`. Log grids start at `start > 0`
/// and get t = 0 prepended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub spacing: Spacing,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub units: GridUnits,
}

impl std::str::FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!("grid '{s}' must look like lin|log:start:stop:n")));
        }
        let spacing = match parts[0] {
            "lin" => Spacing::Lin,
            "log" => Spacing::Log,
            other => return Err(Error::Config(format!("grid spacing must be lin or log, got '{other}'"))),
        };
        let endpoint = |p: &str| -> Result<(f64, GridUnits)> {
            let (v, unit) =
                split_number(p).ok_or_else(|| Error::Config(format!("grid endpoint '{p}' is not a number")))?;
            if unit.trim().is_empty() {
                Ok((v, GridUnits::V0t))
            } else {
                Ok((parse_quantity(p, Dimension::Time)?, GridUnits::Microseconds))
            }
        };
        let (start, u1) = endpoint(parts[1])?;
        let (stop, u2) = endpoint(parts[2])?;
        if u1 != u2 {
            return Err(Error::Config(format!("grid '{s}' mixes dimensionless and physical endpoints")));
        }
        let points: usize =
            parts[3].parse().map_err(|_| Error::Config(format!("grid point count '{}' is not an integer", parts[3])))?;
        let grid = GridSpec { spacing, start, stop, points, units: u1 };
        grid.validate()?;
        Ok(grid)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.spacing {
            Spacing::Lin => "lin",
            Spacing::Log => "log",
        };
        let suffix = match self.units {
            GridUnits::V0t => "",
            GridUnits::Microseconds => "us",
        };
        write!(f, "{kind}:{}{suffix}:{}{suffix}:{}", self.start, self.stop, self.points)
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config("a grid needs at least two points".into()));
        }
        if !(self.stop > self.start) || self.start < 0.0 {
            return Err(Error::Config(format!("grid needs 0 ≤ start < stop, got {} to {}", self.start, self.stop)));
        }
        if self.spacing == Spacing::Log && !(self.start > 0.0) {
            return Err(Error::Config("log grids need a positive start".into()));
        }
        Ok(())
    }

    /// Grid values in the grid's own units.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let step = |k: usize| k as f64 / (n - 1) as f64;
        match self.spacing {
            Spacing::Lin => (0..n).map(|k| self.start + (self.stop - self.start) * step(k)).collect(),
            Spacing::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                std::iter::once(0.0).chain((0..n).map(|k| (a + (b - a) * step(k)).exp())).collect()
            }
        }
    }

    /// Times in μs. Dimensionless grids need the core height V₀.
    pub fn times(&self, v0: Option<f64>) -> Result<Vec<f64>> {
        let values = self.values();
        let times: Vec<f64> = match self.units {
            GridUnits::Microseconds => values,
            GridUnits::V0t => {
                let v0 = v0.filter(|v| *v != 0.0).ok_or_else(|| {
                    Error::Config("a dimensionless grid needs a potential with a finite core; give times with units".into())
                })?;
                values.iter().map(|x| x / v0.abs()).collect()
            }
        };
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("time grid must be strictly increasing".into()));
        }
        Ok(times)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        assert_eq!(parse_quantity("3 rad/us", Dimension::AngularFrequency).unwrap(), 3.0);
        assert!((parse_quantity("1 MHz", Dimension::AngularFrequency).unwrap() - TWO_PI).abs() < 1e-15);
        assert_eq!(parse_quantity("0.5 1/us", Dimension::AngularFrequency).unwrap(), 0.5);
        assert!((parse_quantity("1e12 cm^-3", Dimension::Density).unwrap() - 1.0).abs() < 1e-15);
        assert!((parse_quantity("500 nm", Dimension::Length).unwrap() - 0.5).abs() < 1e-15);
        assert!((parse_quantity("0.5 pi", Dimension::Angle).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((parse_quantity("-2.5e3 GHz*um^6", Dimension::C6).unwrap() + 2.5e6 * TWO_PI).abs() < 1e-6);
        assert!((parse_quantity("200ps", Dimension::Time).unwrap() - 2e-4).abs() < 1e-18);
    }

    #[test]
    fn rejects_unitless_and_mismatched() {
        assert!(matches!(parse_quantity("3", Dimension::Length), Err(Error::Config(_))));
        assert!(parse_quantity("3 us", Dimension::Length).is_err());
        assert!(parse_quantity("um", Dimension::Length).is_err());
    }

    #[test]
    fn picosecond_round_trip() {
        for &ps in &[0.1, 1.0, 37.5, 200.0, 12345.678] {
            let us = parse_quantity(&format!("{ps} ps"), Dimension::Time).unwrap();
            let back = to_unit(us, Dimension::Time, "ps").unwrap();
            assert!((back - ps).abs() <= 1e-12 * ps);
        }
    }

    #[test]
    fn grids() {
        let g: GridSpec = "lin:0:4:5".parse().unwrap();
        assert_eq!(g.values(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(g.times(Some(-2.0)).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(g.times(None).is_err());
        let g: GridSpec = "log:1e-2:1:3".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.0);
        assert!((v[2] - 0.1).abs() < 1e-15);
        let g: GridSpec = "lin:0ps:200ps:3".parse().unwrap();
        assert_eq!(g.units, GridUnits::Microseconds);
        assert!((g.times(None).unwrap()[2] - 2e-4).abs() < 1e-18);
        assert!("lin:0:1ps:3".parse::<GridSpec>().is_err());
        assert!("log:0:1:3".parse::<GridSpec>().is_err());
        assert!("lin:1:0:3".parse::<GridSpec>().is_err());
        assert!("cubic:0:1:3".parse::<GridSpec>().is_err());
    }
}
