use num_complex::Complex64;
use rustfft::FftPlanner;

use super::waveform::{rrc_response, TxReference};
use super::{wrap_bin, FieldState, LinearOperator, SsfmConfig};
use crate::error::{invalid, Result};
use crate::fibre::FibreSpec;

/// Minimum symbols for a usable residual-variance estimate.
pub const MIN_SYMBOLS: usize = 4096;

/// η per requested channel: ideal loss and dispersion compensation over the propagated
/// distance, matched RRC filter, symbol-rate sampling, least-squares complex gain per
/// polarisation and the residual variance over both polarisations, η = σ²/P³.
pub fn extract_eta(
    rx: &FieldState,
    tx: &TxReference,
    fibre: &FibreSpec,
    cfg: &SsfmConfig,
    channels: &[usize],
) -> Result<Vec<f64>> {
    rx.validate()?;
    let n_sym = tx.symbols.first().map(|s| s[0].len()).unwrap_or(0);
    if n_sym < MIN_SYMBOLS {
        return Err(invalid(format!("{n_sym} symbols per channel is below the {MIN_SYMBOLS} needed for η")));
    }
    if rx.channel_bins.len() != tx.symbols.len() {
        return Err(invalid("received field and transmitter reference describe different grids"));
    }
    let betas = match cfg.betas {
        Some(b) => b,
        None => fibre.reference_betas()?,
    };
    let n = rx.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let sym_ifft = planner.plan_fft_inverse(n_sym);
    let lin = LinearOperator::new(rx, fibre, &betas);
    let mut spectra = [rx.x.clone(), rx.y.clone()];
    for s in spectra.iter_mut() {
        fft.process(s);
        lin.apply(s, -rx.z);
    }
    let df = rx.bin_width();
    let half_support = (0.5 * (1.0 + tx.rolloff) * tx.symbol_rate / df).ceil() as i64;

    let mut out = Vec::with_capacity(channels.len());
    for &c in channels {
        if c >= tx.symbols.len() {
            return Err(invalid(format!("channel {c} not in the transmitted grid")));
        }
        let p = tx.launch[c];
        if p <= 0.0 {
            out.push(0.0);
            continue;
        }
        let mut noise = 0.0;
        let mut signal = 0.0;
        for (pol, spec) in spectra.iter().enumerate() {
            // Folding the filtered band onto n_sym bins samples once per symbol.
            let mut folded = vec![Complex64::new(0.0, 0.0); n_sym];
            for kk in -half_support..=half_support {
                let h = rrc_response(kk as f64 * df, tx.symbol_rate, tx.rolloff);
                if h > 0.0 {
                    folded[wrap_bin(kk, n_sym)] += spec[wrap_bin(kk + rx.channel_bins[c], n)] * h;
                }
            }
            sym_ifft.process(&mut folded);
            let sent = &tx.symbols[c][pol];
            let mut cross = Complex64::new(0.0, 0.0);
            let mut energy = 0.0;
            for (r, s) in folded.iter().zip(sent) {
                cross += r * s.conj();
                energy += s.norm_sqr();
            }
            let a = cross / energy;
            let resid: f64 = folded.iter().zip(sent).map(|(r, s)| (r - a * s).norm_sqr()).sum();
            noise += resid / n_sym as f64;
            signal += a.norm_sqr() * energy / n_sym as f64;
        }
        let nli = p * noise / signal;
        out.push(nli / p.powi(3));
    }
    Ok(out)
}
