//! Measurement sites: three flow-rates and three pressures, each bilateral.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Right, Side::Left];

    pub fn letter(self) -> char {
        match self {
            Side::Right => 'R',
            Side::Left => 'L',
        }
    }
}

/// The six bilateral measurements, in canonical feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Measurement {
    /// Carotid flow-rate.
    Q1,
    /// Brachial flow-rate.
    Q2,
    /// Femoral flow-rate.
    Q3,
    /// Carotid pressure.
    P1,
    /// Brachial pressure.
    P2,
    /// Radial pressure.
    P3,
}

impl Measurement {
    pub const ALL: [Measurement; 6] = [
        Measurement::Q1,
        Measurement::Q2,
        Measurement::Q3,
        Measurement::P1,
        Measurement::P2,
        Measurement::P3,
    ];

    /// Position in canonical order; also the bit index in combination masks.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_pressure(self) -> bool {
        matches!(self, Measurement::P1 | Measurement::P2 | Measurement::P3)
    }

    pub fn name(self) -> &'static str {
        match self {
            Measurement::Q1 => "Q1",
            Measurement::Q2 => "Q2",
            Measurement::Q3 => "Q3",
            Measurement::P1 => "P1",
            Measurement::P2 => "P2",
            Measurement::P3 => "P3",
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measurement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q1" => Ok(Measurement::Q1),
            "Q2" => Ok(Measurement::Q2),
            "Q3" => Ok(Measurement::Q3),
            "P1" => Ok(Measurement::P1),
            "P2" => Ok(Measurement::P2),
            "P3" => Ok(Measurement::P3),
            other => Err(Error::InvalidConfig(format!(
                "unknown measurement '{other}'"
            ))),
        }
    }
}

/// One physical measurement location, e.g. `Q1R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub measurement: Measurement,
    pub side: Side,
}

impl Site {
    pub const fn new(measurement: Measurement, side: Side) -> Self {
        Site { measurement, side }
    }

    /// All twelve sites in canonical order: measurement-major, right before left.
    pub fn all() -> impl Iterator<Item = Site> {
        Measurement::ALL
            .into_iter()
            .flat_map(|m| Side::BOTH.into_iter().map(move |s| Site::new(m, s)))
    }

    pub fn key(self) -> String {
        format!("{}{}", self.measurement.name(), self.side.letter())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.measurement, self.side.letter())
    }
}

impl FromStr for Site {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('_', "");
        if s.len() != 3 {
            return Err(Error::InvalidConfig(format!("unknown site '{s}'")));
        }
        let measurement: Measurement = s[..2].parse()?;
        let side = match &s[2..].to_ascii_uppercase()[..] {
            "R" => Side::Right,
            "L" => Side::Left,
            _ => return Err(Error::InvalidConfig(format!("unknown site '{s}'"))),
        };
        Ok(Site::new(measurement, side))
    }
}

impl Serialize for Site {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
