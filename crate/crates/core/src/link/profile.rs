use crate::band::Band;
use crate::error::{invalid, Result};
use crate::grid::ChannelGrid;
use crate::units::{dbm_to_watt, freq_to_wavelength};

#[derive(Debug, Clone, PartialEq)]
pub struct PlanBand {
    pub band: Band,
    /// Wavelength window [nm].
    pub range_nm: (f64, f64),
    pub noise_figure_db: f64,
    /// Lit (non-guard) channels, ascending in frequency.
    pub channels: Vec<usize>,
    /// Approximate segment bandwidth B_p [Hz].
    pub segment_bandwidth: f64,
}

/// Bands present on a grid with their amplifier noise figures.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPlan {
    pub bands: Vec<PlanBand>,
    pub guard_gap_nm: f64,
}

impl BandPlan {
    /// One entry per band label found on the grid, in frequency order, with default
    /// windows, noise figures and segment bandwidths.
    pub fn from_grid(grid: &ChannelGrid, guard_gap_nm: f64) -> Result<Self> {
        let mut bands: Vec<PlanBand> = Vec::new();
        for i in grid.active() {
            let band = grid.band_of(i).ok_or_else(|| {
                invalid(format!(
                    "channel {i} at {:.2} nm has no band label",
                    freq_to_wavelength(grid.freq(i)) * 1e9
                ))
            })?;
            match bands.iter_mut().find(|b| b.band == band) {
                Some(b) => b.channels.push(i),
                None => bands.push(PlanBand {
                    band,
                    range_nm: band.default_range_nm(),
                    noise_figure_db: band.default_noise_figure_db(),
                    channels: vec![i],
                    segment_bandwidth: band.default_segment_bandwidth(),
                }),
            }
        }
        if bands.is_empty() {
            return Err(invalid("band plan needs at least one lit channel"));
        }
        Ok(BandPlan { bands, guard_gap_nm })
    }

    pub fn with_noise_figure(mut self, band: Band, nf_db: f64) -> Self {
        for b in self.bands.iter_mut().filter(|b| b.band == band) {
            b.noise_figure_db = nf_db;
        }
        self
    }

    pub fn with_segment_bandwidth(mut self, band: Band, bp: f64) -> Self {
        for b in self.bands.iter_mut().filter(|b| b.band == band) {
            b.segment_bandwidth = bp;
        }
        self
    }

    pub fn get(&self, band: Band) -> Option<&PlanBand> {
        self.bands.iter().find(|b| b.band == band)
    }

    /// Noise figure by channel; `None` for guards.
    pub fn noise_figures(&self, n: usize) -> Vec<Option<f64>> {
        let mut nf = vec![None; n];
        for b in &self.bands {
            for &i in &b.channels {
                nf[i] = Some(b.noise_figure_db);
            }
        }
        nf
    }

    /// N_B = round(B_band/B_p) with at least two edges, B_band = channel count × spacing.
    pub fn segment_count(&self, band: &PlanBand, spacing: f64) -> usize {
        let n = (band.channels.len() as f64 * spacing / band.segment_bandwidth).round() as usize;
        n.max(2)
    }
}

/// Edge points of one band's piecewise-linear (in dBm) launch profile.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSegments {
    pub band: Band,
    /// Ascending edge frequencies [Hz]; the first and last sit on the band's outer channels.
    pub edge_freqs: Vec<f64>,
    pub edge_dbm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentProfile {
    pub bands: Vec<BandSegments>,
}

impl SegmentProfile {
    /// Equally spaced edges per band, all at `dbm`.
    pub fn uniform(plan: &BandPlan, grid: &ChannelGrid, dbm: f64) -> Self {
        let bands = plan
            .bands
            .iter()
            .map(|b| {
                let n = plan.segment_count(b, grid.spacing());
                let lo = grid.freq(b.channels[0]);
                let hi = grid.freq(*b.channels.last().unwrap());
                let edge_freqs = (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect();
                BandSegments { band: b.band, edge_freqs, edge_dbm: vec![dbm; n] }
            })
            .collect();
        SegmentProfile { bands }
    }

    pub fn edge_count(&self) -> usize {
        self.bands.iter().map(|b| b.edge_dbm.len()).sum()
    }

    /// Edge powers flattened in band order.
    pub fn values(&self) -> Vec<f64> {
        self.bands.iter().flat_map(|b| b.edge_dbm.iter().copied()).collect()
    }

    pub fn set_values(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.edge_count() {
            return Err(invalid(format!("expected {} edge powers, got {}", self.edge_count(), v.len())));
        }
        let mut k = 0;
        for b in self.bands.iter_mut() {
            for e in b.edge_dbm.iter_mut() {
                *e = v[k];
                k += 1;
            }
        }
        Ok(())
    }

    pub fn within(&self, lower: f64, upper: f64) -> bool {
        self.values().iter().all(|&p| p >= lower && p <= upper)
    }

    /// Launch power per channel [dBm]; guards get −∞.
    pub fn channel_dbm(&self, plan: &BandPlan, grid: &ChannelGrid) -> Result<Vec<f64>> {
        let mut out = vec![f64::NEG_INFINITY; grid.len()];
        for b in &plan.bands {
            let seg = self
                .bands
                .iter()
                .find(|s| s.band == b.band)
                .ok_or_else(|| invalid(format!("profile has no segments for band {}", b.band)))?;
            for &i in &b.channels {
                out[i] = interpolate(&seg.edge_freqs, &seg.edge_dbm, grid.freq(i));
            }
        }
        Ok(out)
    }

    /// Launch power per channel [W]; guards carry zero.
    pub fn channel_watts(&self, plan: &BandPlan, grid: &ChannelGrid) -> Result<Vec<f64>> {
        Ok(self.channel_dbm(plan, grid)?.into_iter().map(|d| if d.is_finite() { dbm_to_watt(d) } else { 0.0 }).collect())
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if xs.len() == 1 || x <= xs[0] {
        return ys[0];
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&e| e <= x) - 1;
    if xs[j + 1] == xs[j] {
        return ys[j];
    }
    let t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + t * (ys[j + 1] - ys[j])
}
