//! Closed-form NLI estimate with an ISRS linear-tilt power profile.
//!
//! Each channel's power is modelled as ρ(z) = e^{−αz}·[1 − c·(1 − e^{−αz})], where the
//! tilt c is fitted to the end-of-span value of the supplied power evolution. In the
//! long-span limit
//!
//! |∫ρ e^{jφz} dz|² = W₁/(α² + φ²) + W₂/(4α² + φ²),  W₁ = (1−c)(1−c/3),  W₂ = c(4−c)/3.
//!
//! SPM uses φ ≈ φ_i·f₁f₂ over the channel's own square and
//! ∬ df₁df₂/(a² + φ²f₁²f₂²) ≈ (2π/(|φ|a))·asinh(|φ|B_i²/(2πa));
//! XPM from channel k uses φ ≈ φ_{i,k}·f₂ and contributes
//! 2·B_k·(2/(a|φ_{i,k}|))·atan(|φ_{i,k}|B_i/(2a)) with the tilt of channel k.
//! Then G_i = 16/27·γ_i²·[(P_i/B_i)³·I_SPM + Σ_k (P_k/B_k)²(P_i/B_i)·I_XPM,k],
//! η_i = G_i·B_i/P_i³, and spans add incoherently.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::fibre::{BetaCoefficients, FibreSpec};
use crate::gn::{GnSolverConfig, NliResult};
use crate::grid::ChannelGrid;
use crate::raman::PowerEvolution;

/// Linearised phase-mismatch coefficients of one channel pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfmPhaseTerms {
    /// φ_{i,k} [rad/(m·Hz)].
    pub phi_ik: f64,
    /// φ_i [rad/(m·Hz²)].
    pub phi_i: f64,
}

impl CfmPhaseTerms {
    /// Offsets `f_i`, `f_k` are taken from the β expansion frequency.
    pub fn new(f_i: f64, f_k: f64, betas: &BetaCoefficients) -> Self {
        CfmPhaseTerms { phi_ik: phi_xpm(f_i, f_k, betas), phi_i: phi_spm(f_i, betas) }
    }
}

/// XPM mismatch φ_{i,k} = −4π²[β₂ + πβ₃(f_i+f_k) + (2π²β₄/3)(f_i² + f_i f_k + f_k²)]·(f_k − f_i).
pub fn phi_xpm(f_i: f64, f_k: f64, b: &BetaCoefficients) -> f64 {
    let bracket = b.beta2
        + PI * b.beta3 * (f_i + f_k)
        + (2.0 * PI * PI * b.beta4 / 3.0) * (f_i * f_i + f_i * f_k + f_k * f_k);
    -4.0 * PI * PI * bracket * (f_k - f_i)
}

/// SPM mismatch φ_i = −4π²[β₂ + 2πβ₃f_i + 2π²β₄f_i²].
pub fn phi_spm(f_i: f64, b: &BetaCoefficients) -> f64 {
    -4.0 * PI * PI * (b.beta2 + 2.0 * PI * b.beta3 * f_i + 2.0 * PI * PI * b.beta4 * f_i * f_i)
}

/// (W, decay) pairs of the tilted profile.
fn tilt_weights(c: f64, alpha: f64) -> [(f64, f64); 2] {
    [((1.0 - c) * (1.0 - c / 3.0), alpha), (c * (4.0 - c) / 3.0, 2.0 * alpha)]
}

fn spm_integral(a: f64, phi: f64, b_i: f64) -> f64 {
    let p = phi.abs();
    if p * b_i * b_i < 1e-12 * a {
        // φ → 0: the square's area over a².
        return b_i * b_i / (a * a);
    }
    2.0 * PI / (p * a) * (p * b_i * b_i / (2.0 * PI * a)).asinh()
}

fn xpm_integral(a: f64, phi: f64, b_i: f64, b_k: f64) -> f64 {
    let p = phi.abs();
    if p * b_i < 1e-12 * a {
        return 2.0 * b_k * b_i / (a * a);
    }
    2.0 * b_k * 2.0 / (a * p) * (p * b_i / (2.0 * a)).atan()
}

/// Fits the tilt c to ρ(L) of each channel.
fn fit_tilt(evo: &PowerEvolution, alpha: &[f64]) -> Vec<f64> {
    let length = evo.grid.length();
    (0..evo.channel_count())
        .map(|i| {
            let decay = (-alpha[i] * length).exp();
            (1.0 - evo.rho_end(i) / decay) / (1.0 - decay)
        })
        .collect()
}

/// Closed-form η for every lit channel; one evolution per span.
pub fn cfm_nli(
    grid: &ChannelGrid,
    evos: &[PowerEvolution],
    fibre: &FibreSpec,
    cfg: &GnSolverConfig,
    launch_psd: &[f64],
) -> Result<NliResult> {
    let n = grid.len();
    if launch_psd.len() != n {
        return Err(invalid(format!("expected {n} launch PSD values, got {}", launch_psd.len())));
    }
    if launch_psd.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(invalid("launch PSD must be finite and non-negative"));
    }
    if evos.is_empty() {
        return Err(invalid("at least one span power evolution is required"));
    }
    let mut psd = launch_psd.to_vec();
    grid.mask_guards(&mut psd);
    let bw = grid.channel_bandwidth();
    let betas = &cfg.reference_betas;
    let offsets: Vec<f64> = grid.freqs().iter().map(|f| f - cfg.reference_freq).collect();
    let alpha: Vec<f64> = grid.freqs().iter().map(|&f| fibre.alpha_at_freq(f)).collect::<Result<_>>()?;
    if alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(invalid("the closed-form model needs positive attenuation"));
    }
    let gamma: Vec<f64> = grid.freqs().iter().map(|&f| fibre.gamma_at_freq(f)).collect::<Result<_>>()?;
    let tilts: Vec<Vec<f64>> = evos
        .iter()
        .map(|evo| {
            if evo.freqs() != grid.freqs() {
                return Err(invalid("power evolution was computed on a different channel grid"));
            }
            Ok(fit_tilt(evo, &alpha))
        })
        .collect::<Result<_>>()?;

    let mut out = NliResult {
        eta: vec![0.0; n],
        nli_power: vec![0.0; n],
        psd: vec![0.0; n],
        quadrants: vec![[0.0; 4]; n],
        defined: vec![false; n],
    };
    for i in 0..n {
        if psd[i] <= 0.0 {
            continue;
        }
        let phi_i = phi_spm(offsets[i], betas);
        let mut g = 0.0;
        for c in &tilts {
            let spm: f64 = tilt_weights(c[i], alpha[i]).iter().map(|&(w, a)| w * spm_integral(a, phi_i, bw)).sum();
            let mut acc = psd[i].powi(3) * spm;
            for k in (0..n).filter(|&k| k != i && psd[k] > 0.0) {
                let phi = phi_xpm(offsets[i], offsets[k], betas);
                let xpm: f64 =
                    tilt_weights(c[k], alpha[k]).iter().map(|&(w, a)| w * xpm_integral(a, phi, bw, bw)).sum();
                acc += psd[k] * psd[k] * psd[i] * xpm;
            }
            g += acc;
        }
        g *= 16.0 / 27.0 * gamma[i] * gamma[i];
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("closed-form PSD of channel {i}")));
        }
        let p = psd[i] * bw;
        out.psd[i] = g;
        out.nli_power[i] = g * bw;
        out.eta[i] = g * bw / p.powi(3);
        out.defined[i] = true;
    }
    Ok(out)
}
