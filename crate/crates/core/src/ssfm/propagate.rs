use std::f64::consts::PI;
use std::sync::Arc;

use log::debug;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{signed_bin, wrap_bin, FieldState, SsfmConfig};
use crate::error::{invalid, Error, Result};
use crate::fibre::{BetaCoefficients, FibreSpec};
use crate::raman::coupling_matrix;
use crate::units::{db_per_km_to_per_m, freq_to_wavelength, wavelength_to_freq};

/// Per-bin spectral exponent d_k with dÃ_k/dz = d_k·Ã_k.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    pub exponent: Vec<Complex64>,
}

impl LinearOperator {
    /// Loss α(f) plus dispersion re-expanded around the simulation centre, with the
    /// constant and group-delay terms removed (retarded frame).
    pub fn new(state: &FieldState, fibre: &FibreSpec, betas: &BetaCoefficients) -> Self {
        let n = state.len();
        let w0 = 2.0 * PI * (state.centre_freq - wavelength_to_freq(betas.at_wavelength));
        let b2 = betas.beta2 + betas.beta3 * w0 + 0.5 * betas.beta4 * w0 * w0;
        let b3 = betas.beta3 + betas.beta4 * w0;
        let df = state.bin_width();
        let exponent = (0..n)
            .map(|k| {
                let f = signed_bin(k, n) as f64 * df;
                let w = 2.0 * PI * f;
                let beta = w * w * (0.5 * b2 + w * (b3 / 6.0 + w * betas.beta4 / 24.0));
                let lambda = freq_to_wavelength(state.centre_freq + f);
                let alpha = db_per_km_to_per_m(fibre.attenuation.db_km_clamped(lambda));
                Complex64::new(-0.5 * alpha, -beta)
            })
            .collect();
        LinearOperator { exponent }
    }

    /// Multiplies a spectrum by e^{d_k·h}.
    pub fn apply(&self, spec: &mut [Complex64], h: f64) {
        for (s, d) in spec.iter_mut().zip(&self.exponent) {
            *s *= (d * h).exp();
        }
    }

    pub fn factors(&self, h: f64) -> Vec<Complex64> {
        self.exponent.iter().map(|d| (d * h).exp()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
}

/// Channel-level Raman tilt applied inside the linear half steps.
struct Isrs {
    /// Channel owning each bin.
    owner: Vec<Option<usize>>,
    coupling: Vec<f64>,
    n_ch: usize,
}

impl Isrs {
    fn new(state: &FieldState, fibre: &FibreSpec) -> Result<Self> {
        let n_ch = state.channel_freqs.len();
        if n_ch == 0 {
            return Err(invalid("ISRS needs channel metadata on the field"));
        }
        let coupling = coupling_matrix(fibre, &state.channel_freqs)?;
        let n = state.len();
        let mut owner = vec![None; n];
        let spacing = state.channel_freqs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let hw = if spacing.is_finite() { (0.5 * spacing / state.bin_width()).floor() as i64 - 1 } else { n as i64 / 2 - 1 };
        for (c, &b) in state.channel_bins.iter().enumerate() {
            for k in -hw..=hw {
                owner[wrap_bin(b + k, n)] = Some(c);
            }
        }
        Ok(Isrs { owner, coupling, n_ch })
    }

    fn apply(&self, sx: &mut [Complex64], sy: &mut [Complex64], h: f64) {
        let n = sx.len() as f64;
        let mut p = vec![0.0; self.n_ch];
        for (k, o) in self.owner.iter().enumerate() {
            if let Some(c) = o {
                p[*c] += (sx[k].norm_sqr() + sy[k].norm_sqr()) / (n * n);
            }
        }
        let gain: Vec<f64> = (0..self.n_ch)
            .map(|i| {
                let g: f64 = (0..self.n_ch).map(|j| self.coupling[i * self.n_ch + j] * p[j]).sum();
                (0.5 * g * h).exp()
            })
            .collect();
        for (k, o) in self.owner.iter().enumerate() {
            if let Some(c) = o {
                sx[k] *= gain[*c];
                sy[k] *= gain[*c];
            }
        }
    }
}

struct Stepper {
    lin: LinearOperator,
    isrs: Option<Isrs>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    /// (8/9)·γ.
    kerr: f64,
    scratch: Vec<Complex64>,
    /// e^{d·h} for the few step sizes in use.
    cache: Vec<(u64, Vec<Complex64>)>,
}

impl Stepper {
    fn linear(&mut self, x: &mut [Complex64], y: &mut [Complex64], h: f64) {
        let key = h.to_bits();
        let pos = match self.cache.iter().position(|c| c.0 == key) {
            Some(p) => p,
            None => {
                if self.cache.len() >= 6 {
                    self.cache.remove(0);
                }
                self.cache.push((key, self.lin.factors(h)));
                self.cache.len() - 1
            }
        };
        let e = &self.cache[pos].1;
        for ((a, b), f) in x.iter_mut().zip(y.iter_mut()).zip(e) {
            *a *= f;
            *b *= f;
        }
        if let Some(r) = &self.isrs {
            r.apply(x, y, h);
        }
    }

    fn nonlinear(&self, x: &mut [Complex64], y: &mut [Complex64], h: f64) {
        if self.kerr == 0.0 {
            return;
        }
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let rot = Complex64::from_polar(1.0, -self.kerr * (a.norm_sqr() + b.norm_sqr()) * h);
            *a *= rot;
            *b *= rot;
        }
    }

    fn to_freq(&mut self, v: &mut [Complex64]) {
        self.fft.process_with_scratch(v, &mut self.scratch);
    }

    fn to_time(&mut self, v: &mut [Complex64]) {
        self.ifft.process_with_scratch(v, &mut self.scratch);
        let inv = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|s| *s *= inv);
    }

    /// `count` symmetric steps L(h/2)·N(h)·L(h/2) of size `h`, with adjacent half steps merged.
    fn strang(&mut self, x: &mut [Complex64], y: &mut [Complex64], h: f64, count: usize) {
        self.to_freq(x);
        self.to_freq(y);
        for s in 0..count {
            self.linear(x, y, if s == 0 { 0.5 * h } else { h });
            self.to_time(x);
            self.to_time(y);
            self.nonlinear(x, y, h);
            self.to_freq(x);
            self.to_freq(y);
        }
        self.linear(x, y, 0.5 * h);
        self.to_time(x);
        self.to_time(y);
    }
}

fn relative_distance(a: (&[Complex64], &[Complex64]), b: (&[Complex64], &[Complex64])) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (u, v) in a.0.iter().zip(b.0).chain(a.1.iter().zip(b.1)) {
        num += (u - v).norm_sqr();
        den += u.norm_sqr();
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Propagates over a single-span fibre with the constant γ of the simulation centre.
pub fn propagate(state: FieldState, fibre: &FibreSpec, cfg: &SsfmConfig) -> Result<(FieldState, PropagationStats)> {
    cfg.validate()?;
    state.validate()?;
    if fibre.span_count() != 1 {
        return Err(invalid("the split-step simulator handles a single span"));
    }
    let betas = match cfg.betas {
        Some(b) => b,
        None => fibre.reference_betas()?,
    };
    let mut planner = FftPlanner::<f64>::new();
    let n = state.len();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let scratch_len = fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len());
    let gamma = fibre.gamma_at_freq(state.centre_freq)?;
    let mut st = Stepper {
        lin: LinearOperator::new(&state, fibre, &betas),
        isrs: if cfg.include_isrs && !fibre.raman.is_disabled() { Some(Isrs::new(&state, fibre)?) } else { None },
        fft,
        ifft,
        kerr: 8.0 / 9.0 * gamma,
        scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        cache: Vec::new(),
    };
    let length = fibre.length - state.z;
    if !(length > 0.0) {
        return Err(invalid("field has already propagated the full fibre length"));
    }
    let mut out = state;
    let mut stats = PropagationStats { min_step: f64::INFINITY, ..Default::default() };

    if let Some(steps) = cfg.fixed_steps {
        let h = length / steps as f64;
        let (mut x, mut y) = (std::mem::take(&mut out.x), std::mem::take(&mut out.y));
        st.strang(&mut x, &mut y, h, steps);
        out.x = x;
        out.y = y;
        out.z = fibre.length;
        stats.accepted = steps;
        stats.min_step = h;
        stats.max_step = h;
        out.validate()?;
        return Ok((out, stats));
    }

    let peak = out.x.iter().zip(&out.y).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).fold(0.0, f64::max);
    let mut h = if st.kerr * peak > 0.0 { (1e-3 / (st.kerr * peak)).min(length) } else { length };
    let goal = cfg.goal_local_error;
    let mut z = 0.0;
    while z < length {
        let last = h >= length - z;
        let step = if last { length - z } else { h };
        let (mut cx, mut cy) = (out.x.clone(), out.y.clone());
        st.strang(&mut cx, &mut cy, step, 1);
        let (mut fx, mut fy) = (out.x.clone(), out.y.clone());
        st.strang(&mut fx, &mut fy, 0.5 * step, 2);
        let delta = relative_distance((&fx, &fy), (&cx, &cy));
        if !delta.is_finite() {
            return Err(Error::NonFinite(format!("field at z = {:.3} m", out.z + z)));
        }
        let factor = if delta > 0.0 { 0.9 * (goal / delta).cbrt() } else { 2.0 };
        if delta > 2.0 * goal {
            stats.rejected += 1;
            h = step * factor.max(0.2);
            if h < cfg.min_step {
                return Err(Error::StepUnderflow { z_m: out.z + z, step_m: h });
            }
            continue;
        }
        out.x = fx;
        out.y = fy;
        z = if last { length } else { z + step };
        stats.accepted += 1;
        stats.min_step = stats.min_step.min(step);
        stats.max_step = stats.max_step.max(step);
        h = step * factor.min(2.0);
    }
    out.z = fibre.length;
    out.validate()?;
    debug!("ssfm: {} accepted / {} rejected steps, h ∈ [{:.3e}, {:.3e}] m", stats.accepted, stats.rejected, stats.min_step, stats.max_step);
    Ok((out, stats))
}
