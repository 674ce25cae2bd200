//! Piecewise-linear lookup tables and small numeric helpers shared by the models.

use std::path::Path;

use crate::error::{invalid, Result};

/// Strictly increasing abscissae with linear interpolation between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(invalid("table needs at least two points"));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("table contains non-finite values"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("table abscissae must be strictly increasing"));
        }
        Ok(Table { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn min_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_x(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min_x() && x <= self.max_x()
    }

    /// Linear interpolation; `None` outside the hull.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        Some(self.eval_clamped(x))
    }

    /// Linear interpolation, holding the end values outside the hull.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let j = self.xs.partition_point(|&v| v <= x).min(n - 1);
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let t = (x - x0) / (x1 - x0);
        self.ys[j - 1] + t * (self.ys[j] - self.ys[j - 1])
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] > w[0])
    }

    pub fn map_y(&self, f: impl Fn(f64) -> f64) -> Table {
        Table { xs: self.xs.clone(), ys: self.ys.iter().map(|&y| f(y)).collect() }
    }

    /// Reads a two-column CSV (`x,y`), skipping `#` comments and a non-numeric header.
    pub fn from_csv(path: &Path, x_scale: f64, y_scale: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                continue;
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => points.push((x * x_scale, y * y_scale)),
                _ if points.is_empty() => continue,
                _ => return Err(invalid(format!("bad row in {}", path.display()))),
            }
        }
        Table::new(points)
    }
}

/// Compensated (Kahan–Babuska/Neumaier) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// sin(x)/x with the removable singularity handled.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Bracketing index and weight for linear interpolation on sorted `xs`.
/// Returns `(j, t)` with value = (1-t)*y[j] + t*y[j+1].
#[inline]
pub fn bracket(xs: &[f64], x: f64) -> (usize, f64) {
    let n = xs.len();
    if n == 1 {
        return (0, 0.0);
    }
    let j = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    let t = ((x - xs[j]) / (xs[j + 1] - xs[j])).clamp(0.0, 1.0);
    (j, t)
}
