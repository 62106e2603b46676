//! Sampled functions on uniform grids, with optional closed forms.

use alloc::vec::Vec;

use libm::{cos, exp, fabs, pow, sin};

use crate::{Error, Result};

/// Closed-form test functions. Each knows its value, left derivative and
/// second derivative.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Analytic {
    Constant { c: f64 },
    Affine { slope: f64, intercept: f64 },
    /// cos(freq·x + phase)
    Cos { freq: f64, phase: f64 },
    /// e^{rate·x}
    Exp { rate: f64 },
    /// e^{−x²}
    Gaussian,
    /// |x|
    Abs,
    /// |x|^gamma
    AbsPower { gamma: f64 },
    /// c₀ + c₁x + c₂x² + …
    Poly { coeffs: Vec<f64> },
    /// Linear interpolation through the knots, extended linearly past the ends.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
}

impl Analytic {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Analytic::Constant { c } => *c,
            Analytic::Affine { slope, intercept } => slope * x + intercept,
            Analytic::Cos { freq, phase } => cos(freq * x + phase),
            Analytic::Exp { rate } => exp(rate * x),
            Analytic::Gaussian => exp(-x * x),
            Analytic::Abs => fabs(x),
            Analytic::AbsPower { gamma } => pow(fabs(x), *gamma),
            Analytic::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
            Analytic::PiecewiseLinear { knots, values } => pl_eval(knots, values, x),
        }
    }

    /// Left derivative. At kinks this is the slope of the piece to the left;
    /// |x|^γ with γ < 1 returns 0 at the origin.
    pub fn d1(&self, x: f64) -> f64 {
        match self {
            Analytic::Constant { .. } => 0.0,
            Analytic::Affine { slope, .. } => *slope,
            Analytic::Cos { freq, phase } => -freq * sin(freq * x + phase),
            Analytic::Exp { rate } => rate * exp(rate * x),
            Analytic::Gaussian => -2.0 * x * exp(-x * x),
            Analytic::Abs => {
                if x > 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Analytic::AbsPower { gamma } => {
                if x == 0.0 {
                    0.0
                } else {
                    gamma * x.signum() * pow(fabs(x), gamma - 1.0)
                }
            }
            Analytic::Poly { coeffs } => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
                    acc = acc * x + k as f64 * c;
                }
                acc
            }
            Analytic::PiecewiseLinear { knots, values } => pl_slope_left(knots, values, x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            Analytic::Constant { .. } | Analytic::Affine { .. } => 0.0,
            Analytic::Cos { freq, phase } => -freq * freq * cos(freq * x + phase),
            Analytic::Exp { rate } => rate * rate * exp(rate * x),
            Analytic::Gaussian => (4.0 * x * x - 2.0) * exp(-x * x),
            Analytic::Abs | Analytic::PiecewiseLinear { .. } => 0.0,
            Analytic::AbsPower { gamma } => {
                if x == 0.0 {
                    0.0
                } else {
                    gamma * (gamma - 1.0) * pow(fabs(x), gamma - 2.0)
                }
            }
            Analytic::Poly { coeffs } => {
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate().skip(2).rev() {
                    acc = acc * x + (k * (k - 1)) as f64 * c;
                }
                acc
            }
        }
    }

    /// Global bound on |f| where one is known.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Analytic::Constant { c } => Some(fabs(*c)),
            Analytic::Cos { .. } => Some(1.0),
            Analytic::Gaussian => Some(1.0),
            _ => None,
        }
    }

    /// Interval outside which |f| < 1e-18.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Analytic::Gaussian => Some((-6.5, 6.5)),
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(
            self,
            Analytic::Abs | Analytic::AbsPower { .. } | Analytic::PiecewiseLinear { .. }
        )
    }
}

fn pl_eval(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let n = knots.len();
    if n == 1 {
        return values[0];
    }
    let i = match knots.iter().position(|&k| k > x) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => n - 2,
    };
    let s = (values[i + 1] - values[i]) / (knots[i + 1] - knots[i]);
    values[i] + s * (x - knots[i])
}

fn pl_slope_left(knots: &[f64], values: &[f64], x: f64) -> f64 {
    let n = knots.len();
    if n == 1 {
        return 0.0;
    }
    let i = match knots.iter().position(|&k| k >= x) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => n - 2,
    };
    (values[i + 1] - values[i]) / (knots[i + 1] - knots[i])
}

/// A jump of a sampled function at a grid point: the sample there is the
/// right value, `left` the left limit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpTag {
    pub index: usize,
    pub left: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub tag: Option<Analytic>,
    pub jumps: Vec<JumpTag>,
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * h }).collect()
}

/// Grid of multiples of `h` covering [lo, hi].
pub fn aligned_grid(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let i0 = libm::floor(lo / h) as i64;
    let i1 = libm::ceil(hi / h) as i64;
    (i0..=i1).map(|i| i as f64 * h).collect()
}

fn check_uniform(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Shape("grid needs at least two points"));
    }
    let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::Shape("grid must be increasing"));
    }
    let scale = fabs(grid[0]).max(fabs(grid[grid.len() - 1])).max(h);
    for w in grid.windows(2) {
        if fabs((w[1] - w[0]) - h) > 1e-12 * scale.max(1.0) * 8.0 {
            return Err(Error::Shape("grid must be uniform"));
        }
    }
    Ok(())
}

impl GridFunction {
    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Shape("grid and values differ in length"));
        }
        check_uniform(&grid)?;
        Ok(GridFunction { grid, values, tag: None, jumps: Vec::new() })
    }

    pub fn from_analytic(tag: Analytic, grid: Vec<f64>) -> Result<Self> {
        check_uniform(&grid)?;
        let values = grid.iter().map(|&x| tag.eval(x)).collect();
        Ok(GridFunction { grid, values, tag: Some(tag), jumps: Vec::new() })
    }

    pub fn with_jumps(mut self, jumps: Vec<JumpTag>) -> Self {
        self.jumps = jumps;
        self
    }

    /// Same grid, new values; the closed form is dropped.
    pub fn map_values(&self, values: Vec<f64>) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values, tag: None, jumps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.grid[self.len() - 1] - self.grid[0]) / (self.len() - 1) as f64
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        self.grid[self.len() - 1]
    }

    /// Value at any x: the closed form if present, otherwise cubic
    /// interpolation inside the grid and zero outside it.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.tag {
            Some(t) => t.eval(x),
            None => self.interp(x),
        }
    }

    /// Interpolated samples (ignores any closed form). Zero off the grid.
    pub fn interp(&self, x: f64) -> f64 {
        let n = self.len();
        let (lo, hi) = (self.lo(), self.hi());
        if x < lo || x > hi {
            return 0.0;
        }
        let h = self.spacing();
        let u = (x - lo) / h;
        let i = (libm::floor(u) as usize).min(n - 2);
        let t = u - i as f64;
        let y = &self.values;
        if !self.jumps.is_empty() || n < 4 {
            return self.lerp_cell(i, t);
        }
        let y0 = if i == 0 { 2.0 * y[0] - y[1] } else { y[i - 1] };
        let y3 = if i + 2 >= n { 2.0 * y[n - 1] - y[n - 2] } else { y[i + 2] };
        let (y1, y2) = (y[i], y[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        0.5 * ((2.0 * y1)
            + (-y0 + y2) * t
            + (2.0 * y0 - 5.0 * y1 + 4.0 * y2 - y3) * t2
            + (-y0 + 3.0 * y1 - 3.0 * y2 + y3) * t3)
    }
}

impl GridFunction {
    /// Linear interpolation of the samples, honouring jump tags: the cell
    /// ending at a jump uses the left limit. Zero off the grid.
    pub fn interp_linear(&self, x: f64) -> f64 {
        let n = self.len();
        if x < self.lo() || x > self.hi() {
            return 0.0;
        }
        let u = (x - self.lo()) / self.spacing();
        let i = (libm::floor(u) as usize).min(n - 2);
        self.lerp_cell(i, u - i as f64)
    }

    fn lerp_cell(&self, i: usize, t: f64) -> f64 {
        let a = self.values[i];
        let b = match self.jumps.iter().find(|j| j.index == i + 1) {
            Some(j) if t < 1.0 => j.left,
            _ => self.values[i + 1],
        };
        a + t * (b - a)
    }
}

/// Piecewise-linear interpolation on an increasing (not necessarily uniform)
/// grid, clamped at the ends.
pub fn lerp_at(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let j = xs.partition_point(|&v| v <= x);
    let i = j - 1;
    let t = (x - xs[i]) / (xs[j] - xs[i]);
    ys[i] + t * (ys[j] - ys[i])
}

/// Trapezoid rule for samples on an increasing grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}
