//! Box-kernel occupation densities and the checks built on them.

use alloc::vec::Vec;

use libm::{log, pow, sqrt};

use crate::grid::{lerp_at, trapezoid};
use crate::stable_process::SamplePath;
use crate::{Error, Result};

/// x ↦ L_t^x sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocalTimeField {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub t: f64,
    pub bandwidth: f64,
    pub source_seed: u64,
}

impl LocalTimeField {
    /// L at any x by linear interpolation; zero off the grid.
    pub fn at(&self, x: f64) -> f64 {
        if x < self.grid[0] || x > self.grid[self.grid.len() - 1] {
            return 0.0;
        }
        lerp_at(&self.grid, &self.values, x)
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Twice the typical step size, (t/n)^{1/α}·2.
pub fn default_bandwidth(alpha: f64, t: f64, n_steps: usize) -> f64 {
    2.0 * pow(t / n_steps as f64, 1.0 / alpha)
}

/// A grid of multiples of `spacing` covering the path range widened by
/// `margin` on both sides.
pub fn covering_grid(path: &SamplePath, margin: f64, spacing: f64) -> Vec<f64> {
    let (lo, hi) = path.range();
    crate::grid::aligned_grid(lo - margin, hi + margin, spacing)
}

pub fn estimate_local_time(
    path: &SamplePath,
    grid: &[f64],
    bandwidth: f64,
) -> Result<LocalTimeField> {
    if !(bandwidth > 0.0) {
        return Err(Error::Domain("bandwidth must be positive"));
    }
    if grid.len() < 2 {
        return Err(Error::Shape("grid needs at least two points"));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Shape("grid must be increasing"));
        }
        if w[1] - w[0] > bandwidth * (1.0 + 1e-9) {
            return Err(Error::Shape("grid spacing exceeds the bandwidth"));
        }
    }
    let (lo, hi) = path.range();
    let slack = 1e-9 * bandwidth;
    if grid[0] > lo - bandwidth + slack || grid[grid.len() - 1] < hi + bandwidth - slack {
        return Err(Error::Shape("grid does not cover the path range plus one bandwidth"));
    }
    let n = path.n_steps();
    let dt = path.dt();
    let half = 0.5 * bandwidth;
    let mut counts = alloc::vec![0u32; grid.len()];
    for &x in &path.values[..n] {
        let a = grid.partition_point(|&g| g <= x - half);
        let b = grid.partition_point(|&g| g < x + half);
        for c in &mut counts[a..b] {
            *c += 1;
        }
    }
    let w = dt / bandwidth;
    let values = counts.iter().map(|&c| c as f64 * w).collect();
    Ok(LocalTimeField {
        grid: grid.to_vec(),
        values,
        t: path.t_end(),
        bandwidth,
        source_seed: path.seed,
    })
}

/// (∫₀ᵗ φ(X_s) ds as a left Riemann sum, ∫ φ(x) L_t^x dx by trapezoid).
pub fn occupation_check<F: Fn(f64) -> f64>(
    path: &SamplePath,
    field: &LocalTimeField,
    phi: F,
) -> (f64, f64) {
    let n = path.n_steps();
    let dt = path.dt();
    let lhs = path.values[..n].iter().map(|&x| phi(x)).sum::<f64>() * dt;
    let ys: Vec<f64> = field.grid.iter().zip(&field.values).map(|(&x, &l)| phi(x) * l).collect();
    (lhs, trapezoid(&field.grid, &ys))
}

/// Ensemble mean of (L^{x+h} − L^x)².
pub fn sigma_sq(ensemble: &[LocalTimeField], x: f64, h: f64) -> Result<f64> {
    if ensemble.len() < 2 {
        return Err(Error::Shape("sigma_sq needs at least two fields"));
    }
    let mut s = 0.0;
    for f in ensemble {
        let (lo, hi) = (f.grid[0], f.grid[f.grid.len() - 1]);
        if x < lo || x > hi || x + h < lo || x + h > hi {
            return Err(Error::Shape("x and x+h must lie inside every grid"));
        }
        let d = f.at(x + h) - f.at(x);
        s += d * d;
    }
    Ok(s / ensemble.len() as f64)
}

/// sup over grid pairs with 0 < |a−b| < δ (and |a−b| < 1) of
/// |L^a − L^b| / (|b−a|^{(α−1)/2} √log(1/|b−a|)).
pub fn barlow_modulus_ratio(field: &LocalTimeField, alpha: f64, delta: f64) -> f64 {
    let g = &field.grid;
    let v = &field.values;
    let e = 0.5 * (alpha - 1.0);
    let mut best = 0.0f64;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let d = g[j] - g[i];
            if d >= delta || d >= 1.0 {
                break;
            }
            let r = (v[j] - v[i]).abs() / (pow(d, e) * sqrt(log(1.0 / d)));
            best = best.max(r);
        }
    }
    best
}

/// The limiting value 2 c_α^{1/2} (sup L)^{1/2} for the symmetric case.
pub fn barlow_limit(field: &LocalTimeField, alpha: f64) -> f64 {
    2.0 * sqrt(crate::frac_calc::c_alpha(alpha)) * sqrt(field.max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::aligned_grid;
    use crate::stable_process::{simulate_path, Alpha};

    fn still_path(n: usize) -> SamplePath {
        SamplePath {
            times: (0..=n).map(|k| k as f64 / n as f64).collect(),
            values: alloc::vec![0.0; n + 1],
            jumps: Vec::new(),
            alpha: Alpha::new(1.5).unwrap(),
            seed: 0,
            jump_threshold: 1.0,
        }
    }

    #[test]
    fn constant_path_single_bin() {
        let p = still_path(100);
        let grid = aligned_grid(-1.0, 1.0, 0.1);
        let f = estimate_local_time(&p, &grid, 0.1).unwrap();
        for (x, v) in f.grid.iter().zip(&f.values) {
            if x.abs() < 1e-12 {
                assert!((v - 10.0).abs() < 1e-12);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
        assert!((f.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mass_and_support() {
        let p = simulate_path(Alpha::new(1.5).unwrap(), 1.0, 1 << 14, 1.0, 4).unwrap();
        let bw = default_bandwidth(1.5, 1.0, 1 << 14);
        let grid = covering_grid(&p, 2.0 * bw, bw / 4.0);
        let f = estimate_local_time(&p, &grid, bw).unwrap();
        assert!((f.mass() - 1.0).abs() < 1e-2);
        assert_eq!(f.values[0], 0.0);
        assert_eq!(*f.values.last().unwrap(), 0.0);
        let (lo, hi) = p.range();
        for (x, v) in f.grid.iter().zip(&f.values) {
            if *x < lo - bw || *x > hi + bw {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn monotone_in_time() {
        let p = simulate_path(Alpha::new(1.6).unwrap(), 1.0, 4096, 1.0, 9).unwrap();
        let bw = 0.05;
        let grid = covering_grid(&p, 2.0 * bw, bw / 2.0);
        let full = estimate_local_time(&p, &grid, bw).unwrap();
        let half = estimate_local_time(&p.prefix(2048), &grid, bw).unwrap();
        for (a, b) in half.values.iter().zip(&full.values) {
            assert!(a <= b);
        }
    }

    #[test]
    fn rejects_short_grid() {
        let p = simulate_path(Alpha::new(1.5).unwrap(), 1.0, 1000, 1.0, 2).unwrap();
        let (lo, hi) = p.range();
        let grid = aligned_grid(lo, hi, 0.01);
        assert!(estimate_local_time(&p, &grid, 0.05).is_err());
    }

    #[test]
    fn occupation_trivial_cases() {
        let p = simulate_path(Alpha::new(1.5).unwrap(), 1.0, 1 << 12, 1.0, 3).unwrap();
        let grid = covering_grid(&p, 0.1, 0.01);
        let f = estimate_local_time(&p, &grid, 0.02).unwrap();
        let (l, r) = occupation_check(&p, &f, |_| 1.0);
        assert!((l - 1.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-2);
        let (lo, hi) = p.range();
        let far = hi + 1.0;
        let (l, r) = occupation_check(&p, &f, |x| if x > far || x < lo - 1.0 { 1.0 } else { 0.0 });
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn sigma_sq_basics() {
        let a = Alpha::new(1.5).unwrap();
        let fields: Vec<_> = (0..4)
            .map(|s| {
                let p = simulate_path(a, 1.0, 2048, 1.0, s).unwrap();
                let grid = aligned_grid(-30.0, 30.0, 0.02);
                estimate_local_time(&p, &grid, 0.04).unwrap()
            })
            .collect();
        assert_eq!(sigma_sq(&fields, 0.0, 0.0).unwrap(), 0.0);
        assert!(sigma_sq(&fields[..1], 0.0, 0.1).is_err());
    }

    #[test]
    fn barlow_trivial() {
        let f = LocalTimeField {
            grid: aligned_grid(0.0, 1.0, 0.1),
            values: alloc::vec![2.0; 11],
            t: 1.0,
            bandwidth: 0.1,
            source_seed: 0,
        };
        assert_eq!(barlow_modulus_ratio(&f, 1.5, 0.5), 0.0);
        let mut g = f.clone();
        g.values[3] = 5.0;
        assert_eq!(barlow_modulus_ratio(&g, 1.5, 0.05), 0.0);
        assert!(barlow_modulus_ratio(&g, 1.5, 0.15) > 0.0);
    }
}
