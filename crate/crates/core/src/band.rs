//! Spectral band labels and their default wavelength windows.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Band {
    O,
    E,
    S,
    C,
    L,
    U,
}

impl Band {
    pub const ALL: [Band; 6] = [Band::O, Band::E, Band::S, Band::C, Band::L, Band::U];

    /// Default window [nm], lower edge inclusive.
    pub fn default_range_nm(self) -> (f64, f64) {
        match self {
            Band::O => (1260.0, 1360.0),
            Band::E => (1360.0, 1460.0),
            Band::S => (1460.0, 1530.0),
            Band::C => (1530.0, 1565.0),
            Band::L => (1565.0, 1625.0),
            Band::U => (1625.0, 1675.0),
        }
    }

    pub fn default_noise_figure_db(self) -> f64 {
        match self {
            Band::C => 5.0,
            Band::L => 6.0,
            Band::U => 8.0,
            _ => 7.0,
        }
    }

    /// Default optimisation segment bandwidth [Hz].
    pub fn default_segment_bandwidth(self) -> f64 {
        match self {
            Band::O => 750e9,
            _ => 1.5e12,
        }
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Band::O => "O",
            Band::E => "E",
            Band::S => "S",
            Band::C => "C",
            Band::L => "L",
            Band::U => "U",
        };
        f.write_str(s)
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_uppercase().as_str() {
            "O" => Ok(Band::O),
            "E" => Ok(Band::E),
            "S" => Ok(Band::S),
            "C" => Ok(Band::C),
            "L" => Ok(Band::L),
            "U" => Ok(Band::U),
            other => Err(invalid(format!("unknown band {other:?}"))),
        }
    }
}

/// Wavelength windows for a set of bands, ordered by wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct BandWindows {
    pub windows: Vec<(Band, f64, f64)>,
    /// Channels whose centre lies within half this gap [nm] of an internal
    /// boundary are guards.
    pub guard_gap_nm: f64,
}

impl Default for BandWindows {
    fn default() -> Self {
        BandWindows {
            windows: Band::ALL.iter().map(|&b| (b, b.default_range_nm().0, b.default_range_nm().1)).collect(),
            guard_gap_nm: 5.0,
        }
    }
}

impl BandWindows {
    pub fn validate(&self) -> Result<(), Error> {
        for w in &self.windows {
            if !(w.2 > w.1) {
                return Err(invalid(format!("band {} has an empty window", w.0)));
            }
        }
        for pair in self.windows.windows(2) {
            if pair[1].1 < pair[0].2 {
                return Err(invalid("band windows overlap or are out of order"));
            }
        }
        if !(self.guard_gap_nm >= 0.0) {
            return Err(invalid("guard gap must be non-negative"));
        }
        Ok(())
    }

    pub fn band_of_nm(&self, lambda_nm: f64) -> Option<Band> {
        let last = self.windows.len().checked_sub(1)?;
        self.windows
            .iter()
            .enumerate()
            .find(|(i, w)| lambda_nm >= w.1 && (lambda_nm < w.2 || (*i == last && lambda_nm <= w.2)))
            .map(|(_, w)| w.0)
    }

    /// True when `lambda_nm` falls within half the guard gap of a boundary shared by two bands.
    pub fn is_guard_nm(&self, lambda_nm: f64) -> bool {
        let half = 0.5 * self.guard_gap_nm;
        self.windows.windows(2).any(|p| {
            let lo = p[0].2.min(p[1].1);
            let hi = p[0].2.max(p[1].1);
            lambda_nm > lo - half && lambda_nm < hi + half
        })
    }
}
