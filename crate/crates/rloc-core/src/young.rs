//! Young integrals ∫ f dg as limits of left-point Riemann–Stieltjes sums.
//!
//! Both functions are taken as the linear interpolants of their samples,
//! with a zero-length segment at each tagged jump. Refining every cell into
//! N equal parts gives the left-point sum in closed form,
//! Σ_i Δg_i (f_i + Δf_i (N−1)/(2N)), so each dyadic refinement costs one
//! pass over the grid.

use alloc::vec::Vec;

use libm::fabs;

use crate::grid::{GridFunction, JumpTag};
use crate::local_time::LocalTimeField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct YoungResult {
    pub value: f64,
    /// |S_r − S_{r−1}| at the last refinement.
    pub gap: f64,
    /// 2 S_r − S_{r−1}.
    pub richardson: f64,
    pub levels: u32,
}

const REL_TOL: f64 = 1e-8;
const MAX_LEVELS: u32 = 60;
const CONSECUTIVE: u32 = 3;

pub fn young_condition(p: f64, q: f64) -> Result<()> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::Domain("p and q must be at least 1"));
    }
    if 1.0 / p + 1.0 / q <= 1.0 {
        return Err(Error::YoungCondition { p, q });
    }
    Ok(())
}

fn left_of(jumps: &[JumpTag], n: usize) -> Vec<Option<f64>> {
    let mut out = alloc::vec![None; n];
    for j in jumps {
        if j.index < n {
            out[j.index] = Some(j.left);
        }
    }
    out
}

/// Young integral of sampled values: `xs` only serves to report the
/// location of a shared jump. Values at a tagged index are right values.
pub fn young_integral_slice(
    xs: &[f64],
    f: &[f64],
    g: &[f64],
    f_jumps: &[JumpTag],
    g_jumps: &[JumpTag],
    p: f64,
    q: f64,
) -> Result<YoungResult> {
    young_condition(p, q)?;
    let n = f.len();
    if g.len() != n || xs.len() != n {
        return Err(Error::Shape("f and g must share a grid"));
    }
    if n < 2 {
        return Err(Error::Shape("need at least two samples"));
    }
    let fl = left_of(f_jumps, n);
    let gl = left_of(g_jumps, n);
    // Per cell: Σ Δg f_{i−1} (a), Σ Δg Δf (b), and the jump segments (c).
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 1..n {
        if fl[i].is_some() && gl[i].is_some() {
            return Err(Error::CommonJump { x: xs[i] });
        }
        let fe = fl[i].unwrap_or(f[i]);
        let ge = gl[i].unwrap_or(g[i]);
        let dg = ge - g[i - 1];
        a += dg * f[i - 1];
        b += dg * (fe - f[i - 1]);
        if let Some(left) = gl[i] {
            c += f[i] * (g[i] - left);
        }
    }
    let sum = |r: u32| {
        let nn = libm::ldexp(1.0, r as i32);
        a + c + b * (nn - 1.0) / (2.0 * nn)
    };
    let mut prev = sum(0);
    let mut small = 0;
    let mut gap = f64::INFINITY;
    let mut cur;
    let mut r = 0;
    while r < MAX_LEVELS {
        r += 1;
        cur = sum(r);
        gap = fabs(cur - prev);
        if gap < REL_TOL * (1.0 + fabs(cur)) {
            small += 1;
            if small >= CONSECUTIVE {
                return Ok(YoungResult { value: cur, gap, richardson: 2.0 * cur - prev, levels: r });
            }
        } else {
            small = 0;
        }
        prev = cur;
    }
    Err(Error::Convergence { what: "Young refinement", gap })
}

/// ∫ f dg for two functions on the same grid.
pub fn young_integral(f: &GridFunction, g: &GridFunction, p: f64, q: f64) -> Result<YoungResult> {
    if f.grid != g.grid {
        return Err(Error::Shape("f and g must share a grid"));
    }
    young_integral_slice(&f.grid, &f.values, &g.values, &f.jumps, &g.jumps, p, q)
}

/// ∫ g d_x L over the field's grid, with L padded by a zero at either end.
/// Off the field's grid g is evaluated pointwise (jump tags then need the
/// shared grid).
pub fn young_integral_vs_local_time(g: &GridFunction, field: &LocalTimeField, p: f64, q: f64) -> Result<YoungResult> {
    let n = field.grid.len();
    if n < 2 {
        return Err(Error::Shape("field needs at least two points"));
    }
    let same = g.grid.len() == n
        && g.grid.iter().zip(&field.grid).all(|(a, b)| fabs(a - b) <= 1e-12 * fabs(*b).max(1.0));
    if !same && !g.jumps.is_empty() {
        return Err(Error::Shape("a jumping integrand must share the field grid"));
    }
    let h = field.grid[1] - field.grid[0];
    let mut xs = Vec::with_capacity(n + 2);
    xs.push(field.grid[0] - h);
    xs.extend_from_slice(&field.grid);
    xs.push(field.grid[n - 1] + h);
    let mut lv = Vec::with_capacity(n + 2);
    lv.push(0.0);
    lv.extend_from_slice(&field.values);
    lv.push(0.0);
    let mut gv = Vec::with_capacity(n + 2);
    gv.push(g.eval(xs[0]));
    if same {
        gv.extend_from_slice(&g.values);
    } else {
        gv.extend(field.grid.iter().map(|&x| g.eval(x)));
    }
    gv.push(g.eval(xs[n + 1]));
    let jumps: Vec<JumpTag> = if same {
        g.jumps.iter().map(|j| JumpTag { index: j.index + 1, left: j.left }).collect()
    } else {
        Vec::new()
    };
    young_integral_slice(&xs, &gv, &lv, &jumps, &[], p, q)
}

/// |∫ f_n dg_n − ∫ f dg| for each n; the reference is evaluated on the
/// grid of each (f_n, g_n) pair.
pub fn term_by_term_check(
    f_seq: &[GridFunction],
    g_seq: &[GridFunction],
    f: &GridFunction,
    g: &GridFunction,
    p: f64,
    q: f64,
) -> Result<Vec<f64>> {
    if f_seq.len() != g_seq.len() {
        return Err(Error::Shape("sequences differ in length"));
    }
    f_seq
        .iter()
        .zip(g_seq)
        .map(|(fn_, gn)| {
            let v = young_integral(fn_, gn, p, q)?.value;
            let r = if fn_.grid == f.grid && gn.grid == g.grid {
                young_integral(f, g, p, q)?.value
            } else {
                let fv: Vec<f64> = fn_.grid.iter().map(|&x| f.eval(x)).collect();
                let gv: Vec<f64> = fn_.grid.iter().map(|&x| g.eval(x)).collect();
                young_integral_slice(&fn_.grid, &fv, &gv, &[], &[], p, q)?.value
            };
            Ok(fabs(v - r))
        })
        .collect()
}
