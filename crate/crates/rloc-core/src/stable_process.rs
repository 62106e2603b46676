//! Symmetric α-stable sample paths, transition density and Lévy density.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, exp, log, pow, sin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quad::{self, Tol};
use crate::{Error, Result};

/// Stability index, restricted to the open interval (1, 2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 1.0 && value < 2.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::Domain("alpha must lie in (1, 2)"))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// One recorded large increment.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Jump {
    /// Midpoint of the step that carried the jump.
    pub time: f64,
    pub size: f64,
    /// Index k of the step from `times[k]` to `times[k+1]`.
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub jumps: Vec<Jump>,
    pub alpha: Alpha,
    pub seed: u64,
    pub jump_threshold: f64,
}

impl SamplePath {
    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self) -> f64 {
        self.t_end() / self.n_steps() as f64
    }

    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// The path stopped after `k` steps.
    pub fn prefix(&self, k: usize) -> SamplePath {
        let k = k.clamp(1, self.n_steps());
        SamplePath {
            times: self.times[..=k].to_vec(),
            values: self.values[..=k].to_vec(),
            jumps: self.jumps.iter().copied().filter(|j| j.step < k).collect(),
            alpha: self.alpha,
            seed: self.seed,
            jump_threshold: self.jump_threshold,
        }
    }
}

/// Seed of the i-th member of an ensemble.
#[inline]
pub fn ensemble_seed(base: u64, i: u64) -> u64 {
    base ^ i
}

/// One standard symmetric stable variate (characteristic function
/// e^{−|θ|^α}) by the Chambers–Mallows–Stuck transform.
#[inline]
pub fn standard_symmetric<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break PI * (u - 0.5);
        }
    };
    let w = loop {
        let u: f64 = rng.gen();
        let w = -log(1.0 - u);
        if w > 0.0 {
            break w;
        }
    };
    sin(alpha * v) / pow(cos(v), 1.0 / alpha)
        * pow(cos(v - alpha * v) / w, (1.0 - alpha) / alpha)
}

pub fn simulate_path(
    alpha: Alpha,
    t_end: f64,
    n_steps: usize,
    jump_threshold: f64,
    seed: u64,
) -> Result<SamplePath> {
    if !(t_end > 0.0) {
        return Err(Error::Domain("t_end must be positive"));
    }
    if n_steps == 0 {
        return Err(Error::Domain("n_steps must be at least 1"));
    }
    if !(jump_threshold > 0.0) {
        return Err(Error::Domain("jump_threshold must be positive"));
    }
    let a = alpha.value();
    let dt = t_end / n_steps as f64;
    let scale = pow(dt, 1.0 / a);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut jumps = Vec::new();
    times.push(0.0);
    values.push(0.0);
    let mut x = 0.0;
    for k in 0..n_steps {
        let dx = scale * standard_symmetric(a, &mut rng);
        if dx.abs() >= jump_threshold {
            jumps.push(Jump { time: (k as f64 + 0.5) * dt, size: dx, step: k });
        }
        x += dx;
        times.push((k + 1) as f64 * dt);
        values.push(x);
    }
    Ok(SamplePath { times, values, jumps, alpha, seed, jump_threshold })
}

/// p_t(x) for the symmetric stable law with exponent `alpha` in (0, 2],
/// by Fourier inversion. Accepts α = 1 (Cauchy) for diagnostics.
pub fn transition_density_raw(alpha: f64, t: f64, x: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain("t must be positive"));
    }
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::Domain("alpha must lie in (0, 2]"));
    }
    let xi_max = pow(log(1e12) / t, 1.0 / alpha);
    let x = x.abs();
    let pieces = if x > 0.0 { libm::ceil(xi_max * x / PI).max(1.0) } else { 1.0 };
    if pieces > 1e6 {
        return Err(Error::Convergence { what: "transition density", gap: f64::INFINITY });
    }
    let n = pieces as usize;
    let h = xi_max / pieces;
    let tol = Tol { rel: 1e-8, abs: 1e-15 * xi_max / pieces, max_depth: 30 };
    let mut s = 0.0;
    for i in 0..n {
        let a = i as f64 * h;
        s += quad::integrate(|xi| exp(-t * pow(xi, alpha)) * cos(xi * x), a, a + h, tol)?;
    }
    Ok(s / PI)
}

pub fn transition_density(alpha: Alpha, t: f64, x: f64) -> Result<f64> {
    transition_density_raw(alpha.value(), t, x)
}

/// ν(x) = C|x|^{−α−1}.
pub fn levy_density(alpha: Alpha, x: f64, c: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("Lévy density is singular at 0"));
    }
    if !(c > 0.0) {
        return Err(Error::Domain("Lévy constant must be positive"));
    }
    Ok(c * pow(x.abs(), -alpha.value() - 1.0))
}
