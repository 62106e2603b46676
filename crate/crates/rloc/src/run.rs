//! The pipelines behind each experiment kind.

use std::path::{Path, PathBuf};

use rloc_core::frac_calc;
use rloc_core::grid::uniform_grid;
use rloc_core::ito_verify::{EnsembleReport, ItoConfig, ItoRegime};
use rloc_core::local_time::{
    barlow_limit, barlow_modulus_ratio, covering_grid, default_bandwidth, estimate_local_time,
};
use rloc_core::rough_path::{
    build_geometric_rough_path, classify, default_p, rough_integral_gdl, rough_integral_ldl,
    rough_integral_on_field, suggested_theta, BuildWarning, Regime,
};
use rloc_core::stable_process::simulate_path;
use rloc_core::variation::{dyadic_variation_bound, p_variation_exact, total_variation_control, DyadicBound};
use rloc_core::young::{young_integral, YoungResult};
use rloc_core::{
    Alpha, Analytic, ControlFunction, GridFunction, LiftMap, LocalTimeField, SamplePath, TensorLevels, TwoPath,
};
use serde::Serialize;

use crate::config::*;
use crate::ensemble::verify_parallel;
use crate::error::CliError;
use crate::io;

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// One line for the terminal.
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
    /// The configuration with every default filled in, as embedded in the
    /// artifacts.
    pub resolved: Config,
}

/// Fills every default the pipeline would otherwise pick silently.
pub fn resolve(config: &Config) -> Result<Config, CliError> {
    config.validate()?;
    let mut r = config.clone();
    match &mut r.experiment {
        Experiment::Simulate(c) => {
            c.out.get_or_insert_with(|| "path.csv".into());
        }
        Experiment::Localtime(c) => {
            c.bandwidth.get_or_insert_with(|| default_bandwidth(c.alpha, c.t, c.steps));
            c.barlow_delta.get_or_insert(0.05);
            c.out.get_or_insert_with(|| "localtime.csv".into());
        }
        Experiment::Pvar(c) => {
            let p = c.p;
            c.gamma.get_or_insert(p - 1.0 + 1e-6);
            c.out.get_or_insert_with(|| "pvar.json".into());
        }
        Experiment::Fraccalc(c) => {
            if c.op == FracOp::Constants {
                c.grid_lo.get_or_insert(1.1);
                c.grid_hi.get_or_insert(1.9);
                c.grid_n.get_or_insert(9);
            } else if c.input.is_some() {
                c.function = None;
                c.grid_lo = None;
                c.grid_hi = None;
                c.grid_n = None;
            } else {
                c.grid_lo.get_or_insert(-5.0);
                c.grid_hi.get_or_insert(5.0);
                c.grid_n.get_or_insert(201);
            }
            c.out.get_or_insert_with(|| "fraccalc.csv".into());
        }
        Experiment::Young(c) => {
            c.out.get_or_insert_with(|| "young.json".into());
        }
        Experiment::Roughlift(c) => {
            if c.field.is_none() {
                let a = c.alpha.expect("validated");
                c.bandwidth.get_or_insert_with(|| default_bandwidth(a, c.t, c.steps));
            }
            c.function.get_or_insert(Analytic::Gaussian);
            if c.theta.is_none() {
                c.theta = Some(match c.alpha {
                    Some(a) => suggested_theta(a, default_p(a), c.q)?,
                    None => 2.5,
                });
            }
            let theta = c.theta.unwrap();
            c.levels.get_or_insert((theta as usize).clamp(2, 3));
            c.out.get_or_insert_with(|| "roughlift.json".into());
        }
        Experiment::Ito(c) => {
            c.function.get_or_insert(match c.regime {
                ItoRegime::Smooth => Analytic::Gaussian,
                _ => Analytic::Abs,
            });
            c.bandwidth.get_or_insert_with(|| default_bandwidth(c.alpha, c.t, c.steps));
            let bw = c.bandwidth.unwrap();
            c.spacing.get_or_insert(0.5 * bw);
            c.p.get_or_insert_with(|| default_p(c.alpha));
            c.out.get_or_insert_with(|| "report.json".into());
        }
    }
    Ok(r)
}

/// Runs the experiment, writing artifacts relative to `dir` unless their
/// paths are absolute.
pub fn run(config: &Config, dir: &Path) -> Result<Outcome, CliError> {
    let resolved = resolve(config)?;
    let out = |p: &Option<String>| dir.join(p.as_deref().expect("resolved"));
    let cfg = &resolved;
    let (summary, artifacts) = match &resolved.experiment {
        Experiment::Simulate(c) => simulate(c, cfg, out(&c.out), c.binary.as_ref().map(|b| dir.join(b))),
        Experiment::Localtime(c) => localtime(c, cfg, out(&c.out)),
        Experiment::Pvar(c) => pvar(c, cfg, dir, out(&c.out)),
        Experiment::Fraccalc(c) => fraccalc(c, cfg, dir, out(&c.out)),
        Experiment::Young(c) => young(c, cfg, dir, out(&c.out)),
        Experiment::Roughlift(c) => roughlift(c, cfg, dir, out(&c.out)),
        Experiment::Ito(c) => ito(c, cfg, out(&c.out)),
    }?;
    Ok(Outcome { summary, artifacts, resolved })
}

type Ran = Result<(String, Vec<PathBuf>), CliError>;

fn simulate(c: &SimulateConfig, cfg: &Config, out: PathBuf, bin: Option<PathBuf>) -> Ran {
    let p = simulate_path(Alpha::new(c.alpha)?, c.t, c.steps, c.threshold, c.seed)?;
    let rows: Vec<Vec<f64>> = p.times.iter().zip(&p.values).map(|(t, v)| vec![*t, *v]).collect();
    io::write_csv(&out, cfg, &["time", "value"], &rows)?;
    let mut arts = vec![out.clone()];
    if let Some(b) = bin {
        io::write_path_binary(&b, &p)?;
        arts.push(b);
    }
    let (lo, hi) = p.range();
    Ok((
        format!(
            "simulate: {} points, {} jumps >= {}, range [{lo:.4}, {hi:.4}] -> {}",
            p.values.len(),
            p.jumps.len(),
            c.threshold,
            out.display()
        ),
        arts,
    ))
}

fn field_from(c: &LocalTimeConfig, path: &SamplePath) -> Result<LocalTimeField, CliError> {
    let bw = c.bandwidth.expect("resolved");
    let grid = match (c.grid_lo, c.grid_hi, c.grid_n) {
        (Some(lo), Some(hi), Some(n)) => {
            if !(hi > lo) {
                return Err(CliError::Schema("grid_hi must exceed grid_lo".into()));
            }
            uniform_grid(lo, hi, n)
        }
        _ => covering_grid(path, bw, 0.5 * bw),
    };
    Ok(estimate_local_time(path, &grid, bw)?)
}

fn localtime(c: &LocalTimeConfig, cfg: &Config, out: PathBuf) -> Ran {
    let path = simulate_path(Alpha::new(c.alpha)?, c.t, c.steps, 1.0, c.seed)?;
    let f = field_from(c, &path)?;
    let rows: Vec<Vec<f64>> = f.grid.iter().zip(&f.values).map(|(x, l)| vec![*x, *l]).collect();
    io::write_csv(&out, cfg, &["x", "L"], &rows)?;
    let delta = c.barlow_delta.unwrap();
    Ok((
        format!(
            "localtime: {} grid points, mass {:.6} (t = {}), max {:.4}, modulus ratio {:.4} vs limit {:.4} -> {}",
            f.grid.len(),
            f.mass(),
            c.t,
            f.max(),
            barlow_modulus_ratio(&f, c.alpha, delta),
            barlow_limit(&f, c.alpha),
            out.display()
        ),
        vec![out],
    ))
}

#[derive(Serialize)]
struct PvarResult {
    p: f64,
    gamma: f64,
    points: usize,
    p_variation: f64,
    /// Absent when fewer than 5 points are available.
    dyadic: Option<DyadicReport>,
}

#[derive(Serialize)]
struct DyadicReport {
    #[serde(flatten)]
    bound: DyadicBound,
    /// True when the samples were linearly resampled onto 2^N + 1 points.
    resampled: bool,
}

fn pvar(c: &PvarConfig, cfg: &Config, dir: &Path, out: PathBuf) -> Ran {
    let (xs, ys) = io::read_xy_csv(&dir.join(&c.input))?;
    if !(c.p >= 1.0) {
        return Err(CliError::Schema("p must be at least 1".into()));
    }
    let gamma = c.gamma.expect("resolved");
    let exact = p_variation_exact(&ys, c.p);
    let segs = ys.len() - 1;
    let dyadic = if segs >= 4 {
        let (vals, resampled) = if segs.is_power_of_two() {
            (ys.clone(), false)
        } else {
            let n = 1usize << (usize::BITS - 1 - segs.leading_zeros());
            let (lo, hi) = (xs[0], xs[segs]);
            let v = (0..=n)
                .map(|k| rloc_core::grid::lerp_at(&xs, &ys, lo + (hi - lo) * k as f64 / n as f64))
                .collect();
            (v, true)
        };
        Some(DyadicReport { bound: dyadic_variation_bound(&vals, c.p, gamma)?, resampled })
    } else {
        None
    };
    let r = PvarResult { p: c.p, gamma, points: ys.len(), p_variation: exact, dyadic };
    io::write_json(&out, cfg, &r)?;
    let bound = r.dyadic.as_ref().map(|d| format!("{:.6e}", d.bound.bound)).unwrap_or_else(|| "n/a".into());
    Ok((format!("pvar: {}-variation {exact:.6e}, dyadic bound {bound} -> {}", c.p, out.display()), vec![out]))
}

fn input_function(c: &FracCalcConfig, dir: &Path) -> Result<GridFunction, CliError> {
    if let Some(inp) = &c.input {
        let (xs, ys) = io::read_xy_csv(&dir.join(inp))?;
        return Ok(GridFunction::sampled(xs, ys)?);
    }
    let (lo, hi, n) = (c.grid_lo.unwrap(), c.grid_hi.unwrap(), c.grid_n.unwrap());
    if !(hi > lo) {
        return Err(CliError::Schema("grid_hi must exceed grid_lo".into()));
    }
    Ok(GridFunction::from_analytic(c.function.clone().expect("validated"), uniform_grid(lo, hi, n))?)
}

fn fraccalc(c: &FracCalcConfig, cfg: &Config, dir: &Path, out: PathBuf) -> Ran {
    if c.op == FracOp::Constants {
        let (lo, hi, n) = (c.grid_lo.unwrap(), c.grid_hi.unwrap(), c.grid_n.unwrap());
        let mut rows = Vec::with_capacity(n);
        for a in uniform_grid(lo, hi, n) {
            Alpha::new(a)?;
            let r = frac_calc::constant_report(a)?;
            rows.push(vec![
                a,
                r.c_alpha,
                frac_calc::c_alpha_integral(a)?,
                r.c_alpha_printed,
                r.fl_constant,
                r.calibrated_levy_constant,
            ]);
        }
        let cols = ["alpha", "c_alpha", "c_alpha_integral", "C_alpha", "levy_constant", "calibrated_levy_constant"];
        io::write_csv(&out, cfg, &cols, &rows)?;
        return Ok((format!("fraccalc constants: {n} values of alpha -> {}", out.display()), vec![out]));
    }
    let g = input_function(c, dir)?;
    let r = match c.op {
        FracOp::Rl => frac_calc::rl_integral_grid(&g, c.order, c.base)?,
        FracOp::Derivative => frac_calc::frac_derivative(&g, c.order, c.side)?,
        FracOp::Riesz => frac_calc::riesz_derivative(&g, c.order)?,
        FracOp::Laplacian => frac_calc::frac_laplacian(&g, c.order, c.epsilon)?,
        FracOp::Gradient => frac_calc::fractional_gradient(&g, c.order)?,
        FracOp::Mollify => frac_calc::mollify(&g, c.n)?,
        FracOp::Constants => unreachable!(),
    };
    let rows: Vec<Vec<f64>> = r.grid.iter().zip(&r.values).map(|(x, v)| vec![*x, g.eval(*x), *v]).collect();
    io::write_csv(&out, cfg, &["x", "input", "value"], &rows)?;
    let op = format!("{:?}", c.op).to_lowercase();
    Ok((format!("fraccalc {op}: {} points -> {}", rows.len(), out.display()), vec![out]))
}

fn young(c: &YoungConfig, cfg: &Config, dir: &Path, out: PathBuf) -> Ran {
    let (fx, fy) = io::read_xy_csv(&dir.join(&c.f))?;
    let (gx, gy) = io::read_xy_csv(&dir.join(&c.g))?;
    if fx != gx {
        return Err(CliError::Schema("f and g must be sampled on the same grid".into()));
    }
    let f = GridFunction::sampled(fx, fy)?;
    let g = GridFunction::sampled(gx, gy)?;
    let r: YoungResult = young_integral(&f, &g, c.p, c.q)?;
    io::write_json(&out, cfg, &r)?;
    Ok((format!("young: integral {:.10e} (gap {:.2e}) -> {}", r.value, r.gap, out.display()), vec![out]))
}

#[derive(Serialize)]
struct PairJson {
    i: usize,
    j: usize,
    a: f64,
    b: f64,
    level1: [f64; 2],
    level2: [[f64; 2]; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    level3: Option<[[[f64; 2]; 2]; 2]>,
}

#[derive(Serialize)]
struct TensorMapJson {
    levels: usize,
    points: Vec<f64>,
    /// Consecutive pairs (i, i+1); any other pair is their Chen product.
    pairs: Vec<PairJson>,
    total: PairJson,
}

fn pair_json(t: &TensorLevels, i: usize, j: usize, levels: usize) -> PairJson {
    PairJson { i, j, a: t.a, b: t.b, level1: t.l1, level2: t.l2, level3: (levels >= 3).then_some(t.l3) }
}

pub fn tensor_map_json(m: &LiftMap) -> impl Serialize {
    let pairs = m.elems.iter().enumerate().map(|(k, e)| pair_json(e, k, k + 1, m.levels)).collect();
    TensorMapJson {
        levels: m.levels,
        points: m.points.clone(),
        pairs,
        total: pair_json(&m.total(), 0, m.points.len() - 1, m.levels),
    }
}

#[derive(Serialize)]
struct RoughLiftResult<T: Serialize> {
    regime: Option<Regime>,
    theta: f64,
    levels: usize,
    m_star: u32,
    cauchy_gaps: Vec<f64>,
    warnings: Vec<BuildWarning>,
    /// ∫ g dL from the dyadic lift at m*.
    g_dl: f64,
    /// ∫ g dL from the lift through every grid point.
    g_dl_fine: f64,
    l_dl: f64,
    lift: T,
}

fn roughlift(c: &RoughLiftConfig, cfg: &Config, dir: &Path, out: PathBuf) -> Ran {
    let field = match &c.field {
        Some(f) => {
            let (xs, ls) = io::read_xy_csv(&dir.join(f))?;
            if xs.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Schema("field grid must increase".into()));
            }
            LocalTimeField { grid: xs, values: ls, t: c.t, bandwidth: 0.0, source_seed: c.seed }
        }
        None => {
            let a = c.alpha.unwrap();
            let path = simulate_path(Alpha::new(a)?, c.t, c.steps, 1.0, c.seed)?;
            let bw = c.bandwidth.unwrap();
            estimate_local_time(&path, &covering_grid(&path, bw, 0.5 * bw), bw)?
        }
    };
    let g = GridFunction::from_analytic(c.function.clone().unwrap(), vec![0.0, 1.0])?;
    let z = TwoPath::from_field(&field, &g)?;
    let w1 = match c.control {
        ControlKind::Length => ControlFunction::zero().augment(),
        ControlKind::Variation => {
            let wl = total_variation_control(&GridFunction::sampled(z.x.clone(), z.l.clone())?, 1.0)?;
            let wg = total_variation_control(&GridFunction::sampled(z.x.clone(), z.g.clone())?, c.q)?;
            ControlFunction::custom(move |a, b| wl.eval(a, b) + wg.eval(a, b)).augment()
        }
    };
    let theta = c.theta.unwrap();
    let levels = c.levels.unwrap();
    if !(theta >= 2.0 && theta < (levels + 1) as f64) {
        return Err(CliError::Regime(format!("theta {theta} needs levels >= {}", theta as usize)));
    }
    let regime = c.alpha.map(|a| classify(a, c.q, default_p(a))).transpose()?;
    let rp = build_geometric_rough_path(&z, &w1, theta, c.mmax, c.tol)?;
    let mut vals = Vec::with_capacity(rp.lift.points.len());
    let mut cur = z.at(rp.lift.points[0]);
    vals.push(cur);
    for e in &rp.lift.elems {
        cur = [cur[0] + e.l1[0], cur[1] + e.l1[1]];
        vals.push(cur);
    }
    let lift = LiftMap::from_values(rp.lift.points.clone(), &vals, levels)?;
    let g_dl = rough_integral_gdl(&g, &field, &lift)?.value;
    let g_dl_fine = rough_integral_on_field(&g, &field)?.value;
    let l_dl = rough_integral_ldl(&field, &lift)?.value;
    let r = RoughLiftResult {
        regime,
        theta,
        levels,
        m_star: rp.m_star,
        cauchy_gaps: rp.cauchy_gaps.clone(),
        warnings: rp.warnings.clone(),
        g_dl,
        g_dl_fine,
        l_dl,
        lift: tensor_map_json(&lift),
    };
    io::write_json(&out, cfg, &r)?;
    let warn = if rp.warnings.is_empty() { String::new() } else { format!(", warnings {:?}", rp.warnings) };
    Ok((
        format!(
            "roughlift: m* = {}, {} gaps, int g dL = {g_dl:.8e} (fine grid {g_dl_fine:.8e}){warn} -> {}",
            rp.m_star,
            rp.cauchy_gaps.len(),
            out.display()
        ),
        vec![out],
    ))
}

fn ito(c: &ItoRunConfig, cfg: &Config, out: PathBuf) -> Ran {
    let f = GridFunction::from_analytic(c.function.clone().unwrap(), vec![0.0, 1.0])?;
    let ic = ItoConfig {
        alpha: c.alpha,
        t: c.t,
        n_steps: c.steps,
        jump_threshold: c.threshold,
        bandwidth: c.bandwidth,
        spacing: c.spacing,
        q: c.q,
        p: c.p,
        delta: c.delta,
    };
    let seeds = rloc_core::ito_verify::seeds(c.base_seed, c.seeds);
    let mut r: EnsembleReport = verify_parallel(&f, c.regime, &ic, &seeds)?;
    if !c.per_path {
        r.per_path.clear();
    }
    io::write_json(&out, cfg, &r)?;
    let z = r.mean_residual / r.se_residual;
    let route = r.route_discrepancy.map(|d| format!(", route discrepancy {d:.3e}")).unwrap_or_default();
    Ok((
        format!(
            "ito {}: {} paths, mean residual {:.4e} +- {:.2e} ({z:.2} SE){route} -> {}",
            format!("{:?}", c.regime).to_lowercase(),
            r.n_paths,
            r.mean_residual,
            r.se_residual,
            out.display()
        ),
        vec![out],
    ))
}
