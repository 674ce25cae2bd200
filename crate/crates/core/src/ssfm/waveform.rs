use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::{wrap_bin, FieldState, SsfmConfig};
use crate::error::{invalid, Result};
use crate::grid::ChannelGrid;

/// Root-raised-cosine amplitude response at baseband offset `f`, unity in the passband.
pub fn rrc_response(f: f64, symbol_rate: f64, rolloff: f64) -> f64 {
    let a = f.abs();
    let lo = 0.5 * (1.0 - rolloff) * symbol_rate;
    let hi = 0.5 * (1.0 + rolloff) * symbol_rate;
    if a <= lo {
        1.0
    } else if a >= hi {
        0.0
    } else {
        (0.5 * (1.0 + (PI / (rolloff * symbol_rate) * (a - lo)).cos())).sqrt()
    }
}

/// Transmitted symbols kept for the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TxReference {
    /// Per channel, the x and y symbol sequences.
    pub symbols: Vec<[Vec<Complex64>; 2]>,
    /// Launch power per channel [W]; zero for dark channels.
    pub launch: Vec<f64>,
    pub symbol_rate: f64,
    pub rolloff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub field: FieldState,
    pub reference: TxReference,
}

/// Oversampling of the simulated band relative to one symbol rate.
fn oversampling(grid: &ChannelGrid, cfg: &SsfmConfig) -> usize {
    let f = grid.freqs();
    let slots = ((f[f.len() - 1] - f[0]) / grid.spacing()).round() as usize + 1;
    cfg.samples_per_symbol * slots.next_power_of_two()
}

/// Gaussian-symbol, RRC-shaped WDM field. Channel `i` carries `launch[i]` W over both
/// polarisations; guard channels stay dark. Channel centres are rounded to the nearest bin.
pub fn generate_waveform(grid: &ChannelGrid, launch: &[f64], cfg: &SsfmConfig) -> Result<Waveform> {
    cfg.validate()?;
    let n_ch = grid.len();
    if launch.len() != n_ch {
        return Err(invalid(format!("expected {n_ch} launch powers, got {}", launch.len())));
    }
    if launch.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("launch powers must be finite and non-negative"));
    }
    let rs = grid.symbol_rate();
    let n_sym = cfg.symbols_per_channel;
    let os = oversampling(grid, cfg);
    let n = n_sym * os;
    let sample_rate = rs * os as f64;
    let f = grid.freqs();
    let centre = 0.5 * (f[0] + f[n_ch - 1]);
    let occupied = f[n_ch - 1] - f[0] + rs * (1.0 + cfg.rolloff);
    if sample_rate < 1.05 * occupied {
        return Err(invalid(format!(
            "sample rate {sample_rate:.4e} Hz does not cover the occupied band {occupied:.4e} Hz with margin"
        )));
    }
    let df = sample_rate / n as f64;
    let bins: Vec<i64> = f.iter().map(|&fc| ((fc - centre) / df).round() as i64).collect();
    let mut power = launch.to_vec();
    grid.mask_guards(&mut power);

    let mut planner = FftPlanner::<f64>::new();
    let sym_fft = planner.plan_fft_forward(n_sym);
    let ifft = planner.plan_fft_inverse(n);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.rng_seed);
    let half_support = (0.5 * (1.0 + cfg.rolloff) * rs / df).ceil() as i64;

    let mut spectra = [vec![Complex64::new(0.0, 0.0); n], vec![Complex64::new(0.0, 0.0); n]];
    let mut symbols = Vec::with_capacity(n_ch);
    let mut channel = vec![Complex64::new(0.0, 0.0); 2 * (2 * half_support as usize + 1)];
    for c in 0..n_ch {
        let mut pair: [Vec<Complex64>; 2] = [Vec::new(), Vec::new()];
        for seq in pair.iter_mut() {
            *seq = (0..n_sym)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
                })
                .collect();
        }
        if power[c] > 0.0 {
            // Zero-stuffed upsampling repeats the symbol spectrum every n_sym bins.
            let mut energy = 0.0;
            let width = 2 * half_support as usize + 1;
            for (p, seq) in pair.iter().enumerate() {
                let mut s = seq.clone();
                sym_fft.process(&mut s);
                for j in 0..width {
                    let kk = j as i64 - half_support;
                    let h = rrc_response(kk as f64 * df, rs, cfg.rolloff);
                    let v = s[wrap_bin(kk, n_sym)] * h;
                    channel[p * width + j] = v;
                    energy += v.norm_sqr();
                }
            }
            // Mean time-domain power of (1/n)·IFFT is Σ|X|²/n².
            let scale = (power[c] * (n as f64).powi(2) / energy).sqrt();
            for p in 0..2 {
                for j in 0..width {
                    let kk = j as i64 - half_support;
                    spectra[p][wrap_bin(kk + bins[c], n)] += channel[p * width + j] * scale;
                }
            }
        }
        symbols.push(pair);
    }
    let inv_n = 1.0 / n as f64;
    let [mut x, mut y] = spectra;
    for s in [&mut x, &mut y] {
        ifft.process(s);
        s.iter_mut().for_each(|v| *v *= inv_n);
    }
    let mut field = FieldState::new(x, y, sample_rate, centre)?;
    field.channel_freqs = f.to_vec();
    field.channel_bins = bins;
    Ok(Waveform { field, reference: TxReference { symbols, launch: power, symbol_rate: rs, rolloff: cfg.rolloff } })
}

/// Power spectrum |Ã_k|² summed over polarisations, in bin order [W per bin].
pub fn power_spectrum(state: &FieldState) -> Vec<f64> {
    let n = state.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut out = vec![0.0; n];
    for pol in [&state.x, &state.y] {
        let mut s = pol.clone();
        fft.process(&mut s);
        for (o, v) in out.iter_mut().zip(&s) {
            *o += v.norm_sqr() / (n as f64 * n as f64);
        }
    }
    out
}

/// Power inside ±half-width of each channel centre [W].
pub fn channel_powers(state: &FieldState, half_width: f64) -> Vec<f64> {
    let ps = power_spectrum(state);
    let n = state.len();
    let hw = (half_width / state.bin_width()).floor() as i64;
    state.channel_bins.iter().map(|&b| (-hw..=hw).map(|k| ps[wrap_bin(b + k, n)]).sum()).collect()
}

#[cfg(test)]
fn bin_freq(state: &FieldState, k: usize) -> f64 {
    state.centre_freq + super::signed_bin(k, state.len()) as f64 * state.bin_width()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(symbols: usize) -> SsfmConfig {
        SsfmConfig { symbols_per_channel: symbols, ..Default::default() }
    }

    #[test]
    fn single_channel_power_and_shape() {
        let grid = ChannelGrid::uniform(1, 100e9, 96e9, 230e12).unwrap();
        let w = generate_waveform(&grid, &[1.585e-3], &cfg(1 << 14)).unwrap();
        let p = w.field.power();
        assert!((10.0 * (p / 1.585e-3).log10()).abs() < 0.01, "{p}");
        // Nothing outside the RRC support.
        let ps = power_spectrum(&w.field);
        let edge = 0.5 * 96e9 * 1.01;
        let outside: f64 = (0..ps.len()).filter(|&k| (bin_freq(&w.field, k) - 230e12).abs() > edge).map(|k| ps[k]).sum();
        assert!(outside < 1e-20 * p);
        // Flat passband on average.
        let inner: Vec<f64> = (0..ps.len()).filter(|&k| (bin_freq(&w.field, k) - 230e12).abs() < 20e9).map(|k| ps[k]).collect();
        let mean = inner.iter().sum::<f64>() / inner.len() as f64;
        let band: Vec<f64> =
            (0..ps.len()).filter(|&k| ((bin_freq(&w.field, k) - 230e12).abs() - 40e9).abs() < 5e9).map(|k| ps[k]).collect();
        let mean_band = band.iter().sum::<f64>() / band.len() as f64;
        assert!((mean_band / mean - 1.0).abs() < 0.1);
    }

    #[test]
    fn seeded_waveforms_repeat() {
        let grid = ChannelGrid::uniform(3, 100e9, 96e9, 230e12).unwrap();
        let a = generate_waveform(&grid, &[1e-3; 3], &cfg(1 << 10)).unwrap();
        let b = generate_waveform(&grid, &[1e-3; 3], &cfg(1 << 10)).unwrap();
        assert_eq!(a, b);
        let c = generate_waveform(&grid, &[1e-3; 3], &SsfmConfig { rng_seed: 2, ..cfg(1 << 10) }).unwrap();
        assert_ne!(a.field.x, c.field.x);
    }

    #[test]
    fn channels_sit_at_grid_offsets() {
        let grid = ChannelGrid::uniform(3, 100e9, 96e9, 230e12).unwrap();
        let w = generate_waveform(&grid, &[1e-3, 2e-3, 1e-3], &cfg(1 << 12)).unwrap();
        let df = w.field.bin_width();
        for (i, b) in w.field.channel_bins.iter().enumerate() {
            assert!((*b as f64 * df - (i as f64 - 1.0) * 100e9).abs() <= 0.5 * df);
        }
        let p = channel_powers(&w.field, 50e9);
        for (got, want) in p.iter().zip([1e-3, 2e-3, 1e-3]) {
            assert!((10.0 * (got / want).log10()).abs() < 0.01);
        }
    }

    #[test]
    fn guards_are_dark_and_bandwidth_checked() {
        let grid = ChannelGrid::uniform(3, 100e9, 96e9, 230e12).unwrap().with_guards(&[1]).unwrap();
        let w = generate_waveform(&grid, &[1e-3; 3], &cfg(1 << 10)).unwrap();
        let p = channel_powers(&w.field, 50e9);
        assert!(p[1] < 1e-25);
        assert!(generate_waveform(&grid, &[1e-3; 2], &cfg(1 << 10)).is_err());
        let bad = SsfmConfig { samples_per_symbol: 3, ..cfg(1 << 10) };
        assert!(generate_waveform(&grid, &[1e-3; 3], &bad).is_err());
    }

    #[test]
    fn rrc_is_nyquist() {
        let (rs, b) = (96e9, 0.2);
        for f in [0.0, 0.3e9, 44e9, 47e9, 50e9] {
            let s = rrc_response(f, rs, b).powi(2) + rrc_response(f - rs, rs, b).powi(2);
            assert!((s - 1.0).abs() < 1e-12, "{f}: {s}");
        }
    }
}
