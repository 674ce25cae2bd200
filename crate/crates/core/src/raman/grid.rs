use crate::error::{invalid, Result};

/// How the logarithmic distance grid chooses its scale z₀ in z = z₀·(e^{n·u} − 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogScale {
    /// First step equals a tenth of the mean step.
    Auto,
    /// Fixed z₀ [m]; the grid tends to uniform when the span is much shorter than z₀.
    Fixed(f64),
}

/// Sampling of one span into steps that widen with distance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceGrid {
    pub span_index: usize,
    pub edges: Vec<f64>,
    pub midpoints: Vec<f64>,
    pub widths: Vec<f64>,
    /// Where the power profile is sampled within each step (the arithmetic midpoint).
    pub eval_points: Vec<f64>,
    /// (N_M − 1)/L in steps per km.
    pub mean_density: f64,
    pub scale: f64,
}

impl DistanceGrid {
    pub fn length(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn step_count(&self) -> usize {
        self.widths.len()
    }

    pub fn max_width(&self) -> f64 {
        self.widths.iter().copied().fold(0.0, f64::max)
    }
}

/// N_M = round(mean_density·L/10³) + 1 edges with an automatically chosen log scale.
pub fn build_distance_grid(length: f64, mean_density: f64) -> Result<DistanceGrid> {
    build_distance_grid_with(length, mean_density, LogScale::Auto, 0)
}

pub fn build_distance_grid_with(length: f64, mean_density: f64, scale: LogScale, span_index: usize) -> Result<DistanceGrid> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(invalid("span length must be positive"));
    }
    if !(mean_density > 0.0 && mean_density.is_finite()) {
        return Err(invalid("mean step density must be positive"));
    }
    let n_edges = (mean_density * length / 1e3).round() as usize + 1;
    if n_edges < 2 {
        return Err(invalid(format!("distance grid needs at least two edges, got {n_edges}")));
    }
    let steps = n_edges - 1;
    let s = match scale {
        LogScale::Fixed(s) if s > 0.0 => s,
        LogScale::Fixed(_) => return Err(invalid("log scale must be positive")),
        LogScale::Auto => auto_scale(length, steps),
    };
    let u = (length / s).ln_1p() / steps as f64;
    let mut edges: Vec<f64> = (0..n_edges).map(|n| s * (n as f64 * u).exp_m1()).collect();
    edges[0] = 0.0;
    edges[steps] = length;
    let widths: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let midpoints: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(DistanceGrid {
        span_index,
        eval_points: midpoints.clone(),
        edges,
        midpoints,
        widths,
        mean_density: steps as f64 / length * 1e3,
        scale: s,
    })
}

fn first_step(length: f64, steps: usize, s: f64) -> f64 {
    s * ((length / s).ln_1p() / steps as f64).exp_m1()
}

/// z₀ giving a first step of one tenth of the mean step; a single step stays uniform.
fn auto_scale(length: f64, steps: usize) -> f64 {
    if steps < 2 {
        return length * 1e12;
    }
    let target = length / steps as f64 / 10.0;
    // first_step rises monotonically from 0 (z₀ → 0) to L/steps (z₀ → ∞).
    let (mut lo, mut hi) = ((length * 1e-12).ln(), (length * 1e12).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if first_step(length, steps, mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_counts() {
        assert_eq!(build_distance_grid(80e3, 0.95).unwrap().edge_count(), 77);
        assert_eq!(build_distance_grid(80e3, 1.4).unwrap().edge_count(), 113);
        assert!(build_distance_grid(80e3, 0.001).is_err());
    }

    #[test]
    fn structure() {
        let g = build_distance_grid(80e3, 1.4).unwrap();
        assert_eq!(g.edges[0], 0.0);
        assert_eq!(g.length(), 80e3);
        assert!((g.mean_density - 112.0 / 80.0).abs() < 1e-12);
        for m in 0..g.step_count() {
            assert_eq!(g.widths[m], g.edges[m + 1] - g.edges[m]);
            assert_eq!(g.midpoints[m], 0.5 * (g.edges[m] + g.edges[m + 1]));
        }
        assert!(g.widths.windows(2).all(|w| w[1] >= w[0]));
        let mean = 80e3 / 112.0;
        assert!((g.widths[0] / mean - 0.1).abs() < 1e-3);
    }

    #[test]
    fn uniform_limit_for_short_span() {
        let g = build_distance_grid_with(1e3, 500.0, LogScale::Fixed(21.7e3), 0).unwrap();
        let (w0, w1) = (g.widths[0], *g.widths.last().unwrap());
        assert!(w1 / w0 - 1.0 < 0.05, "{}", w1 / w0);
        let g = build_distance_grid_with(10.0, 500.0, LogScale::Fixed(21.7e3), 0).unwrap();
        let ratio = g.max_width() / g.widths[0];
        assert!(g.step_count() == 5 && ratio - 1.0 < 1e-3, "{ratio}");
    }
}
