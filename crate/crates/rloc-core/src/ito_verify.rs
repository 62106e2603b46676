//! Monte-Carlo check of the extended Itô formula
//! f(X_t) − f(X_0) = ∫ f′(X_{s−}) dX_s + (compensated jump sum) − ∫ ∇^{α−1}f d_xL_t^x
//! in the smooth, Young and rough-path regimes.
//!
//! The jump measure is ν(dy) = C|y|^{−1−α}dy with C = 𝒜(1,−α), the constant
//! that makes the simulated process (exponent |θ|^α) have generator Δ^{α/2};
//! with that choice the local-time term carries the factor 1. Residuals under
//! the alternative constant C_α are reported next to it.

use alloc::vec::Vec;

use libm::{fabs, floor, pow, round, sqrt};

use crate::frac_calc::{self, fractional_gradient_at};
use crate::grid::{aligned_grid, trapezoid, Analytic, GridFunction, JumpTag};
use crate::local_time::{covering_grid, default_bandwidth, estimate_local_time};
use crate::quad::{self, Tol};
use crate::rough_path::{classify, default_p, rough_integral_gdl_path, TwoPath};
use crate::special::{fl_constant, gamma};
use crate::stable_process::{ensemble_seed, simulate_path, Alpha, SamplePath};
use crate::variation::p_variation_exact;
use crate::young::young_integral_vs_local_time;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ItoRegime {
    Smooth,
    Young,
    Rough,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ItoConfig {
    pub alpha: f64,
    pub t: f64,
    pub n_steps: usize,
    pub jump_threshold: f64,
    /// Box-kernel width of the local-time estimate; default 2(t/n)^{1/α}.
    pub bandwidth: Option<f64>,
    /// Local-time grid spacing; default half the bandwidth.
    pub spacing: Option<f64>,
    /// Variation exponent of ∇^{α−1}f.
    pub q: f64,
    /// Variation exponent of L; default 2/(α−1) + 0.05.
    pub p: Option<f64>,
    /// τ_δ segment scale for jumping integrands.
    pub delta: f64,
}

impl ItoConfig {
    pub fn new(alpha: f64, t: f64, n_steps: usize) -> Self {
        ItoConfig {
            alpha,
            t,
            n_steps,
            jump_threshold: 0.1,
            bandwidth: None,
            spacing: None,
            q: 1.0,
            p: None,
            delta: 1.0,
        }
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth.unwrap_or_else(|| default_bandwidth(self.alpha, self.t, self.n_steps))
    }

    pub fn spacing(&self) -> f64 {
        self.spacing.unwrap_or_else(|| 0.5 * self.bandwidth())
    }

    pub fn p(&self) -> f64 {
        self.p.unwrap_or_else(|| default_p(self.alpha))
    }
}

/// One path. `residual = lhs − (drift_free_integral + jump_term + local_time_term)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ItoReport {
    pub seed: u64,
    pub lhs: f64,
    pub drift_free_integral: f64,
    pub jump_term: f64,
    pub local_time_term: f64,
    pub residual: f64,
    /// Residual with the local-time term scaled by C_α instead.
    pub residual_printed: f64,
    /// ∫₀ᵗ∫_{|y|≥threshold}[f(X_s+y) − f(X_s)]ν(dy)ds, included in jump_term.
    pub compensator: f64,
    pub big_jumps: usize,
    /// Smooth regime: ∫₀ᵗ Δ^{α/2}f(X_s)ds along the path (the local-time
    /// term is the same quantity through the occupation density).
    pub time_route: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnsembleReport {
    pub regime: ItoRegime,
    pub config: ItoConfig,
    pub function: Analytic,
    pub n_paths: usize,
    pub mean_residual: f64,
    pub se_residual: f64,
    pub mean_residual_printed: f64,
    pub se_residual_printed: f64,
    pub mean_lhs: f64,
    pub mean_drift_free_integral: f64,
    pub mean_jump_term: f64,
    pub mean_local_time_term: f64,
    /// Σ|time route − local-time route| / Σ|time route| (smooth regime).
    pub route_discrepancy: Option<f64>,
    pub levy_constant: f64,
    pub calibrated_levy_constant: f64,
    pub c_alpha_printed: f64,
    /// q-variation of ∇^{α−1}f on the working grid.
    pub integrand_q_variation: Option<f64>,
    pub per_path: Vec<ItoReport>,
}

/// A function tabulated on the points i·h, i = i0, i0+1, …
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub h: f64,
    pub i0: i64,
    pub values: Vec<f64>,
    /// Index (in the table) and left limit of a jump, if any.
    pub jump: Option<(usize, f64)>,
}

impl Table {
    fn build<F: FnMut(f64) -> Result<f64>>(lo: f64, hi: f64, h: f64, mut f: F) -> Result<Table> {
        let grid = aligned_grid(lo, hi, h);
        let i0 = round(grid[0] / h) as i64;
        let values = grid.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        Ok(Table { h, i0, values, jump: None })
    }

    /// Linear interpolation, clamped to the table ends.
    pub fn interp(&self, x: f64) -> f64 {
        let u = x / self.h - self.i0 as f64;
        let n = self.values.len();
        if u <= 0.0 {
            return self.values[0];
        }
        if u >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let k = floor(u) as usize;
        let s = u - k as f64;
        self.values[k] + s * (self.values[k + 1] - self.values[k])
    }

    fn slice(&self, grid: &[f64]) -> Result<(Vec<f64>, Vec<JumpTag>)> {
        let a = round(grid[0] / self.h) as i64 - self.i0;
        if a < 0 || a as usize + grid.len() > self.values.len() {
            return Err(Error::Shape("local-time grid leaves the tabulated range"));
        }
        let a = a as usize;
        let vals = self.values[a..a + grid.len()].to_vec();
        let jumps = match self.jump {
            Some((j, left)) if j > a && j < a + grid.len() => alloc::vec![JumpTag { index: j - a, left }],
            _ => Vec::new(),
        };
        Ok((vals, jumps))
    }
}

const COMPENSATOR_SPACING: f64 = 1.0 / 1024.0;
const LAPLACIAN_SPACING: f64 = 1.0 / 512.0;

/// J(x) = ∫_{|y|≥thr}[f(x+y) − f(x)] C|y|^{−1−α} dy.
pub fn compensator_density(f: &Analytic, alpha: f64, threshold: f64, c: f64, x: f64) -> Result<f64> {
    if let Analytic::Constant { .. } | Analytic::Affine { .. } = f {
        return Ok(0.0);
    }
    let fx = f.eval(x);
    let e = |y: f64| f.eval(x + y) + f.eval(x - y) - 2.0 * fx;
    let tol = Tol { rel: 1e-10, abs: 1e-14, max_depth: 30 };
    let reach = match f.support() {
        Some((lo, hi)) => (x - lo).max(hi - x).max(0.0),
        None => 2.0 * fabs(x) + 8.0,
    };
    let r = (reach + 1.0).max(2.0 * threshold);
    let mut breaks = alloc::vec![threshold];
    let mut b = threshold;
    while b < 1.0 && b < r {
        b = (2.0 * b).min(1.0).min(r);
        breaks.push(b);
    }
    let step = match f {
        Analytic::Cos { freq, .. } => (1.0 / fabs(*freq)).min(1.0),
        _ => 1.0,
    };
    while b < r {
        b = (b + step).min(r);
        breaks.push(b);
    }
    let kinks = [fabs(x)];
    for k in kinks {
        if k > threshold && k < r {
            breaks.push(k);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let head = quad::integrate_pieces(|y| e(y) * pow(y, -1.0 - alpha), &breaks, tol)?;
    let tail = if f.support().is_some() {
        -2.0 * fx * pow(r, -alpha) / alpha
    } else {
        // y = v^{1/(1−α)} maps [r, ∞) onto (0, r^{1−α}].
        let top = pow(r, 1.0 - alpha);
        let inv = 1.0 / (1.0 - alpha);
        let t = Tol { rel: 1e-9, abs: 1e-13, max_depth: 30 };
        quad::integrate_lenient(
            |v| {
                let y = pow(v, inv);
                if y.is_finite() {
                    e(y) / y
                } else {
                    0.0
                }
            },
            0.0,
            top,
            t,
        ) / (alpha - 1.0)
    };
    Ok(c * (head + tail))
}

/// Everything shared by the paths of one ensemble.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub regime: ItoRegime,
    pub config: ItoConfig,
    pub function: Analytic,
    pub levy_constant: f64,
    pub c_alpha_printed: f64,
    pub compensator: Table,
    pub laplacian: Option<Table>,
    pub gradient: Option<Table>,
    pub integrand_q_variation: Option<f64>,
}

fn validate(cfg: &ItoConfig) -> Result<Alpha> {
    let a = Alpha::new(cfg.alpha)?;
    if !(cfg.t > 0.0) || cfg.n_steps == 0 {
        return Err(Error::Domain("t and n_steps must be positive"));
    }
    if !(cfg.jump_threshold > 0.0) {
        return Err(Error::Domain("jump threshold must be positive"));
    }
    if !(cfg.bandwidth() > 0.0) || !(cfg.spacing() > 0.0) || cfg.spacing() > cfg.bandwidth() {
        return Err(Error::Domain("need 0 < spacing <= bandwidth"));
    }
    Ok(a)
}

/// Range of one path, for sizing the shared tables.
pub fn path_range(cfg: &ItoConfig, seed: u64) -> Result<(f64, f64)> {
    let a = validate(cfg)?;
    Ok(simulate_path(a, cfg.t, cfg.n_steps, cfg.jump_threshold, seed)?.range())
}

/// Builds the tables over [lo, hi], the union of the path ranges.
pub fn prepare(f: &GridFunction, regime: ItoRegime, cfg: &ItoConfig, lo: f64, hi: f64) -> Result<Prepared> {
    validate(cfg)?;
    let tag = f.tag.clone().ok_or(Error::Domain("the test function needs a closed form"))?;
    let alpha = cfg.alpha;
    let p = cfg.p();
    match regime {
        ItoRegime::Smooth if !tag.is_smooth() => return Err(Error::Domain("smooth regime needs a C² function")),
        ItoRegime::Young if !(cfg.q < 2.0 / (3.0 - alpha)) => {
            return Err(Error::YoungCondition { p, q: cfg.q });
        }
        ItoRegime::Rough => {
            classify(alpha, cfg.q, p)?;
        }
        _ => {}
    }
    let c = fl_constant(alpha);
    let bw = cfg.bandwidth();
    let pad = bw + 4.0 * cfg.spacing();
    let (lo, hi) = (lo - pad, hi + pad);
    let compensator = Table::build(lo, hi, COMPENSATOR_SPACING, |x| {
        compensator_density(&tag, alpha, cfg.jump_threshold, c, x)
    })?;
    let mut laplacian = None;
    let mut gradient = None;
    let mut qvar = None;
    match regime {
        ItoRegime::Smooth => {
            let probe = GridFunction::from_analytic(tag.clone(), alloc::vec![0.0, 1.0])?;
            laplacian = Some(Table::build(lo, hi, LAPLACIAN_SPACING, |x| {
                frac_calc::frac_laplacian_at(&probe, alpha, x, 1e-3)
            })?);
        }
        ItoRegime::Young | ItoRegime::Rough => {
            let h = cfg.spacing();
            let mut t = Table::build(lo, hi, h, |x| {
                fractional_gradient_at(&tag, alpha, x).unwrap_or(Err(Error::Domain("no fractional gradient for this function")))
            })?;
            t.jump = gradient_jump(&tag, alpha, &t);
            let v = &t.values;
            let stride = (v.len() / 1500).max(1);
            let sub: Vec<f64> = v.iter().step_by(stride).copied().collect();
            qvar = Some(if cfg.q == 1.0 {
                v.windows(2).map(|w| fabs(w[1] - w[0])).sum()
            } else {
                p_variation_exact(&sub, cfg.q)
            });
            gradient = Some(t);
        }
    }
    Ok(Prepared {
        regime,
        config: cfg.clone(),
        function: tag,
        levy_constant: c,
        c_alpha_printed: frac_calc::C_alpha(alpha),
        compensator,
        laplacian,
        gradient,
        integrand_q_variation: qvar,
    })
}

// |x|^{α−1} has the gradient κ·sgn(x): a jump at 0, recorded with its left
// limit so it can be tagged on the local-time grid.
fn gradient_jump(tag: &Analytic, alpha: f64, t: &Table) -> Option<(usize, f64)> {
    if let Analytic::AbsPower { gamma: gm } = tag {
        let mu = gm - (alpha - 1.0);
        if fabs(mu) < 1e-12 {
            let kappa = gamma(1.0 + gm) * libm::sin(core::f64::consts::PI * gm / 2.0);
            let i = -t.i0;
            if i > 0 && (i as usize) < t.values.len() {
                return Some((i as usize, -kappa));
            }
        }
    }
    None
}

/// One path of the ensemble.
pub fn run_path(prep: &Prepared, seed: u64) -> Result<ItoReport> {
    let cfg = &prep.config;
    let a = validate(cfg)?;
    let path = simulate_path(a, cfg.t, cfg.n_steps, cfg.jump_threshold, seed)?;
    let f = &prep.function;
    let n = path.n_steps();
    let dt = path.dt();
    let xs = &path.values;
    let lhs = f.eval(xs[n]) - f.eval(xs[0]);
    let mut drift = 0.0;
    let mut comp = 0.0;
    let mut time_route = 0.0;
    for k in 0..n {
        drift += f.d1(xs[k]) * (xs[k + 1] - xs[k]);
        comp += prep.compensator.interp(xs[k]);
        if let Some(lap) = &prep.laplacian {
            time_route += lap.interp(xs[k]);
        }
    }
    comp *= dt;
    time_route *= dt;
    let mut big = 0.0;
    for j in &path.jumps {
        let (x0, x1) = (xs[j.step], xs[j.step + 1]);
        big += f.eval(x1) - f.eval(x0) - f.d1(x0) * (x1 - x0);
    }
    let jump_term = big - comp;
    let lt_integral = local_time_integral(prep, &path)?;
    // lt_integral is −∫∇^{α−1}f dL (equivalently ∫ L Δ^{α/2}f dx).
    let local_time_term = lt_integral;
    let residual = lhs - (drift + jump_term + local_time_term);
    let residual_printed = lhs - (drift + jump_term + prep.c_alpha_printed * lt_integral);
    Ok(ItoReport {
        seed,
        lhs,
        drift_free_integral: drift,
        jump_term,
        local_time_term,
        residual,
        residual_printed,
        compensator: comp,
        big_jumps: path.jumps.len(),
        time_route: prep.laplacian.as_ref().map(|_| time_route),
    })
}

fn local_time_integral(prep: &Prepared, path: &SamplePath) -> Result<f64> {
    let cfg = &prep.config;
    let bw = cfg.bandwidth();
    let h = cfg.spacing();
    let grid = covering_grid(path, bw, h);
    let field = estimate_local_time(path, &grid, bw)?;
    match prep.regime {
        ItoRegime::Smooth => {
            let lap = prep.laplacian.as_ref().unwrap();
            let prod: Vec<f64> = grid.iter().zip(&field.values).map(|(&x, l)| l * lap.interp(x)).collect();
            Ok(trapezoid(&grid, &prod))
        }
        ItoRegime::Young => {
            let (vals, jumps) = prep.gradient.as_ref().unwrap().slice(&grid)?;
            let g = GridFunction::sampled(grid, vals)?.with_jumps(jumps);
            Ok(-young_integral_vs_local_time(&g, &field, cfg.p(), cfg.q)?.value)
        }
        ItoRegime::Rough => {
            let (vals, jumps) = prep.gradient.as_ref().unwrap().slice(&grid)?;
            let z = TwoPath::new(grid, field.values.clone(), vals, jumps)?;
            Ok(-rough_integral_gdl_path(&z, cfg.delta, cfg.q)?.value)
        }
    }
}

/// Streaming mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn se(&self) -> f64 {
        if self.n < 2 {
            return f64::INFINITY;
        }
        sqrt(self.m2 / (self.n - 1) as f64 / self.n as f64)
    }
}

/// Ensemble statistics over per-path reports, in the order given.
pub fn summarize(prep: &Prepared, per_path: Vec<ItoReport>) -> Result<EnsembleReport> {
    let mut r = Welford::default();
    let mut rp = Welford::default();
    let (mut lhs, mut drift, mut jump, mut lt) = (Welford::default(), Welford::default(), Welford::default(), Welford::default());
    let (mut dsum, mut tsum) = (0.0, 0.0);
    for rep in &per_path {
        r.push(rep.residual);
        rp.push(rep.residual_printed);
        lhs.push(rep.lhs);
        drift.push(rep.drift_free_integral);
        jump.push(rep.jump_term);
        lt.push(rep.local_time_term);
        if let Some(tr) = rep.time_route {
            dsum += fabs(tr - rep.local_time_term);
            tsum += fabs(tr);
        }
    }
    let route_discrepancy = match prep.regime {
        ItoRegime::Smooth if tsum > 0.0 => Some(dsum / tsum),
        ItoRegime::Smooth => Some(0.0),
        _ => None,
    };
    Ok(EnsembleReport {
        regime: prep.regime,
        config: prep.config.clone(),
        function: prep.function.clone(),
        n_paths: per_path.len(),
        mean_residual: r.mean,
        se_residual: r.se(),
        mean_residual_printed: rp.mean,
        se_residual_printed: rp.se(),
        mean_lhs: lhs.mean,
        mean_drift_free_integral: drift.mean,
        mean_jump_term: jump.mean,
        mean_local_time_term: lt.mean,
        route_discrepancy,
        levy_constant: prep.levy_constant,
        calibrated_levy_constant: frac_calc::calibrated_levy_constant(prep.config.alpha)?,
        c_alpha_printed: prep.c_alpha_printed,
        integrand_q_variation: prep.integrand_q_variation,
        per_path,
    })
}

/// Runs the whole ensemble on the current thread: one pass for the range,
/// one for the terms.
pub fn verify(f: &GridFunction, regime: ItoRegime, cfg: &ItoConfig, seeds: &[u64]) -> Result<EnsembleReport> {
    if seeds.is_empty() {
        return Err(Error::Domain("no seeds"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &s in seeds {
        let (a, b) = path_range(cfg, s)?;
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let prep = prepare(f, regime, cfg, lo, hi)?;
    let reports = seeds.iter().map(|&s| run_path(&prep, s)).collect::<Result<Vec<_>>>()?;
    summarize(&prep, reports)
}

pub fn verify_smooth(f: &GridFunction, cfg: &ItoConfig, seeds: &[u64]) -> Result<EnsembleReport> {
    verify(f, ItoRegime::Smooth, cfg, seeds)
}

pub fn verify_young(f: &GridFunction, cfg: &ItoConfig, seeds: &[u64]) -> Result<EnsembleReport> {
    verify(f, ItoRegime::Young, cfg, seeds)
}

pub fn verify_rough(f: &GridFunction, cfg: &ItoConfig, seeds: &[u64]) -> Result<EnsembleReport> {
    verify(f, ItoRegime::Rough, cfg, seeds)
}

/// seeds base ^ 0, base ^ 1, …
pub fn seeds(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| ensemble_seed(base, i)).collect()
}
