//! WDM channel grid: centre frequencies in ascending order, band membership and guards.

use crate::band::{Band, BandWindows};
use crate::error::{invalid, Result};
use crate::units::{freq_to_wavelength, wavelength_to_freq};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelGrid {
    freqs: Vec<f64>,
    symbol_rate: f64,
    spacing: f64,
    channel_bandwidth: f64,
    centre: f64,
    guard: Vec<bool>,
    band: Vec<Option<Band>>,
}

impl ChannelGrid {
    /// `n` channels at `spacing`, symmetric about `centre` (odd `n` puts a channel on it).
    pub fn uniform(n: usize, spacing: f64, symbol_rate: f64, centre: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("channel grid needs at least one channel"));
        }
        let half = (n as f64 - 1.0) / 2.0;
        let freqs = (0..n).map(|i| centre + (i as f64 - half) * spacing).collect();
        Self::from_freqs(freqs, symbol_rate, spacing, centre)
    }

    /// The reference UWB grid: 589 channels at 100 GHz and 96 GBaud about 1438 nm,
    /// with bands and guards from the default windows.
    pub fn reference_uwb() -> Self {
        Self::uniform(589, 100e9, 96e9, wavelength_to_freq(1438e-9))
            .and_then(|g| g.with_band_windows(&BandWindows::default()))
            .expect("reference grid")
    }

    pub fn from_freqs(freqs: Vec<f64>, symbol_rate: f64, spacing: f64, centre: f64) -> Result<Self> {
        if freqs.is_empty() {
            return Err(invalid("channel grid needs at least one channel"));
        }
        if freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(invalid("channel frequencies must be positive"));
        }
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("channel frequencies must be strictly ascending"));
        }
        if !(symbol_rate > 0.0) || !(spacing >= symbol_rate) {
            return Err(invalid("spacing must be at least the symbol rate"));
        }
        let min_gap = freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if min_gap < symbol_rate * (1.0 - 1e-9) {
            return Err(invalid("channels overlap"));
        }
        let n = freqs.len();
        Ok(ChannelGrid {
            freqs,
            symbol_rate,
            spacing,
            channel_bandwidth: symbol_rate,
            centre,
            guard: vec![false; n],
            band: vec![None; n],
        })
    }

    /// Assigns bands by centre wavelength and marks guard channels near internal boundaries.
    /// Channels outside every window become guards.
    pub fn with_band_windows(mut self, windows: &BandWindows) -> Result<Self> {
        windows.validate()?;
        for (i, &f) in self.freqs.iter().enumerate() {
            let nm = freq_to_wavelength(f) * 1e9;
            self.band[i] = windows.band_of_nm(nm);
            self.guard[i] = self.band[i].is_none() || windows.is_guard_nm(nm);
        }
        Ok(self)
    }

    pub fn with_band(mut self, band: Band) -> Self {
        self.band = vec![Some(band); self.freqs.len()];
        self
    }

    pub fn with_guards(mut self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            *self.guard.get_mut(i).ok_or_else(|| invalid(format!("guard index {i} out of range")))? = true;
        }
        Ok(self)
    }

    /// Keeps the channels at `indices` (ascending), preserving labels and the centre.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() || indices.windows(2).any(|w| w[1] <= w[0]) || *indices.last().unwrap() >= self.len() {
            return Err(invalid("subset indices must be ascending and in range"));
        }
        Ok(ChannelGrid {
            freqs: indices.iter().map(|&i| self.freqs[i]).collect(),
            symbol_rate: self.symbol_rate,
            spacing: self.spacing,
            channel_bandwidth: self.channel_bandwidth,
            centre: self.centre,
            guard: indices.iter().map(|&i| self.guard[i]).collect(),
            band: indices.iter().map(|&i| self.band[i]).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.freqs[i]
    }

    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Width of the rectangular per-channel PSD [Hz].
    pub fn channel_bandwidth(&self) -> f64 {
        self.channel_bandwidth
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn is_guard(&self, i: usize) -> bool {
        self.guard[i]
    }

    pub fn guards(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.guard[i]).collect()
    }

    pub fn active(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.guard[i]).collect()
    }

    pub fn band_of(&self, i: usize) -> Option<Band> {
        self.band[i]
    }

    pub fn channels_in(&self, band: Band) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.band[i] == Some(band) && !self.guard[i]).collect()
    }

    /// Half of the occupied bandwidth about the grid centre: covers every channel
    /// plus half a spacing on each side.
    pub fn half_band(&self) -> f64 {
        let lo = self.centre - self.freqs[0];
        let hi = self.freqs[self.len() - 1] - self.centre;
        lo.max(hi) + 0.5 * self.spacing.max(self.channel_bandwidth)
    }

    /// Index of the channel whose rectangular PSD contains `f`.
    pub fn channel_at(&self, f: f64) -> Option<usize> {
        let half = 0.5 * self.channel_bandwidth;
        let j = self.freqs.partition_point(|&c| c + half < f);
        (j < self.len() && (self.freqs[j] - f).abs() <= half).then_some(j)
    }

    /// Zeroes guard entries of a per-channel power vector.
    pub fn mask_guards(&self, powers: &mut [f64]) {
        for (p, &g) in powers.iter_mut().zip(&self.guard) {
            if g {
                *p = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_grid_band_counts() {
        let g = ChannelGrid::reference_uwb();
        assert_eq!(g.len(), 589);
        assert_eq!(g.guards().len(), 32);
        let counts: Vec<usize> = Band::ALL.iter().map(|&b| g.channels_in(b).len()).collect();
        assert_eq!(counts, vec![171, 143, 88, 38, 65, 52]);
    }

    #[test]
    fn half_band_covers_channels() {
        let g = ChannelGrid::uniform(5, 100e9, 96e9, 200e12).unwrap();
        assert!((g.half_band() - 250e9).abs() < 1e-3);
        for &f in g.freqs() {
            assert!((f - g.centre()).abs() + g.channel_bandwidth() / 2.0 <= g.half_band());
        }
    }

    #[test]
    fn channel_lookup() {
        let g = ChannelGrid::uniform(3, 100e9, 96e9, 200e12).unwrap();
        assert_eq!(g.channel_at(200e12 + 47e9), Some(1));
        assert_eq!(g.channel_at(200e12 + 49e9), None);
        assert_eq!(g.channel_at(200e12 + 60e9), Some(2));
        assert_eq!(g.channel_at(200e12 + 200e9), None);
    }

    #[test]
    fn rejects_overlap() {
        assert!(ChannelGrid::uniform(3, 90e9, 96e9, 200e12).is_err());
        assert!(ChannelGrid::from_freqs(vec![2.0e14, 1.9e14], 1e9, 1e9, 2e14).is_err());
    }

    #[test]
    fn subset_keeps_labels() {
        let g = ChannelGrid::reference_uwb();
        let guard = g.guards()[0];
        let s = g.subset(&[guard - 1, guard, guard + 1]).unwrap();
        let expected: Vec<usize> = (0..3).filter(|&k| g.is_guard(guard - 1 + k)).collect();
        assert_eq!(s.guards(), expected);
        assert!(!s.is_guard(0) && s.is_guard(1));
        assert_eq!(s.centre(), g.centre());
    }
}
