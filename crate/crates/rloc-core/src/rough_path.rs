//! Truncated signatures of two-dimensional piecewise-linear paths, the
//! dyadic construction of the geometric rough path over Z = (L, g), rough
//! integrals against local time, one-form integration and the τ_δ transform.
//!
//! Component 0 is the local time L, component 1 the integrand g. Level-2
//! entry `l2[i][j]` is ∫_{a<u<v<b} dZ^i_u dZ^j_v, so `l2[1][0]` is the area
//! correction for ∫g dL and `l2[0][1]` the one for ∫L dg.

use alloc::vec::Vec;

use libm::{fabs, floor, log2, pow, sqrt};

use crate::grid::{lerp_at, GridFunction, JumpTag};
use crate::local_time::LocalTimeField;
use crate::variation::{control_equalized_partition, theta_distance, ControlFunction, Partition};
use crate::{Error, Result};

type L2 = [[f64; 2]; 2];
type L3 = [[[f64; 2]; 2]; 2];

/// (1, Z¹, Z², Z³) over the interval [a, b].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TensorLevels {
    pub a: f64,
    pub b: f64,
    pub l1: [f64; 2],
    pub l2: L2,
    pub l3: L3,
}

impl TensorLevels {
    /// The neutral element at x.
    pub fn identity(x: f64) -> Self {
        TensorLevels { a: x, b: x, l1: [0.0; 2], l2: [[0.0; 2]; 2], l3: [[[0.0; 2]; 2]; 2] }
    }

    /// Signature of a straight segment with increment dz: (dz)^{⊗j}/j!.
    pub fn segment(a: f64, b: f64, dz: [f64; 2]) -> Self {
        let mut t = TensorLevels::identity(a);
        t.b = b;
        t.l1 = dz;
        for i in 0..2 {
            for j in 0..2 {
                t.l2[i][j] = 0.5 * dz[i] * dz[j];
                for k in 0..2 {
                    t.l3[i][j][k] = dz[i] * dz[j] * dz[k] / 6.0;
                }
            }
        }
        t
    }

    /// Chen product without the endpoint check, computing `levels` levels.
    pub fn chen(x: &TensorLevels, y: &TensorLevels, levels: usize) -> TensorLevels {
        let mut t = TensorLevels::identity(x.a);
        t.b = y.b;
        for i in 0..2 {
            t.l1[i] = x.l1[i] + y.l1[i];
        }
        if levels >= 2 {
            for i in 0..2 {
                for j in 0..2 {
                    t.l2[i][j] = x.l2[i][j] + y.l2[i][j] + x.l1[i] * y.l1[j];
                }
            }
        }
        if levels >= 3 {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        t.l3[i][j][k] = x.l3[i][j][k]
                            + y.l3[i][j][k]
                            + x.l1[i] * y.l2[j][k]
                            + x.l2[i][j] * y.l1[k];
                    }
                }
            }
        }
        t
    }

    /// Frobenius norm of the difference at one level.
    pub fn level_distance(&self, other: &TensorLevels, level: usize) -> f64 {
        let mut s = 0.0;
        match level {
            1 => {
                for i in 0..2 {
                    s += sq(self.l1[i] - other.l1[i]);
                }
            }
            2 => {
                for i in 0..2 {
                    for j in 0..2 {
                        s += sq(self.l2[i][j] - other.l2[i][j]);
                    }
                }
            }
            _ => {
                for i in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            s += sq(self.l3[i][j][k] - other.l3[i][j][k]);
                        }
                    }
                }
            }
        }
        sqrt(s)
    }

    /// Largest entrywise deviation over all three levels.
    pub fn max_abs_diff(&self, other: &TensorLevels) -> f64 {
        let mut m = 0.0f64;
        for i in 0..2 {
            m = m.max(fabs(self.l1[i] - other.l1[i]));
            for j in 0..2 {
                m = m.max(fabs(self.l2[i][j] - other.l2[i][j]));
                for k in 0..2 {
                    m = m.max(fabs(self.l3[i][j][k] - other.l3[i][j][k]));
                }
            }
        }
        m
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Chen's identity: levels of (a, b) and (b, c) give the levels of (a, c).
pub fn chen_multiply(x: &TensorLevels, y: &TensorLevels) -> Result<TensorLevels> {
    let scale = fabs(x.b).max(fabs(y.a)).max(1.0);
    if fabs(x.b - y.a) > 1e-12 * scale {
        return Err(Error::IndexMismatch);
    }
    Ok(TensorLevels::chen(x, y, 3))
}

/// Z_x = (L(x), g(x)) on a common grid, with jumps of g tagged.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoPath {
    pub x: Vec<f64>,
    pub l: Vec<f64>,
    pub g: Vec<f64>,
    pub jumps: Vec<JumpTag>,
}

impl TwoPath {
    pub fn new(x: Vec<f64>, l: Vec<f64>, g: Vec<f64>, jumps: Vec<JumpTag>) -> Result<Self> {
        if x.len() != l.len() || x.len() != g.len() {
            return Err(Error::Shape("x, L and g differ in length"));
        }
        if x.len() < 2 {
            return Err(Error::Shape("a path needs at least two points"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Shape("x must be strictly increasing"));
        }
        if jumps.iter().any(|j| j.index == 0 || j.index >= x.len()) {
            return Err(Error::Shape("jump index out of range"));
        }
        Ok(TwoPath { x, l, g, jumps })
    }

    /// Pairs a field with an integrand. On the field's own grid the samples
    /// and jump tags of g are used as they are; otherwise g is evaluated at
    /// the field's grid points.
    pub fn from_field(field: &LocalTimeField, g: &GridFunction) -> Result<Self> {
        let same = g.grid.len() == field.grid.len()
            && g.grid.iter().zip(&field.grid).all(|(a, b)| fabs(a - b) <= 1e-12 * fabs(*b).max(1.0));
        if same {
            return TwoPath::new(field.grid.clone(), field.values.clone(), g.values.clone(), g.jumps.clone());
        }
        if !g.jumps.is_empty() {
            return Err(Error::Shape("a jumping integrand must share the field grid"));
        }
        let gv = field.grid.iter().map(|&x| g.eval(x)).collect();
        TwoPath::new(field.grid.clone(), field.values.clone(), gv, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Z at x by linear interpolation between samples.
    pub fn at(&self, x: f64) -> [f64; 2] {
        [lerp_at(&self.x, &self.l, x), lerp_at(&self.x, &self.g, x)]
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }
}

/// Levels of a piecewise-linear path between consecutive points; any pair
/// (i, j) is the Chen product of the segments in between.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LiftMap {
    pub points: Vec<f64>,
    pub elems: Vec<TensorLevels>,
    pub levels: usize,
}

impl LiftMap {
    pub fn new(points: Vec<f64>, elems: Vec<TensorLevels>, levels: usize) -> Result<Self> {
        if points.len() < 2 || elems.len() + 1 != points.len() {
            return Err(Error::Shape("need one tensor per consecutive pair of points"));
        }
        if !(1..=3).contains(&levels) {
            return Err(Error::Domain("levels must be 1, 2 or 3"));
        }
        Ok(LiftMap { points, elems, levels })
    }

    /// Lift of the straight-line interpolation through `values` at `points`.
    pub fn from_values(points: Vec<f64>, values: &[[f64; 2]], levels: usize) -> Result<Self> {
        if values.len() != points.len() {
            return Err(Error::Shape("points and values differ in length"));
        }
        let elems = (1..points.len())
            .map(|k| {
                let dz = [values[k][0] - values[k - 1][0], values[k][1] - values[k - 1][1]];
                TensorLevels::segment(points[k - 1], points[k], dz)
            })
            .collect();
        LiftMap::new(points, elems, levels)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Levels over [points[i], points[j]].
    pub fn pair(&self, i: usize, j: usize) -> TensorLevels {
        let mut t = TensorLevels::identity(self.points[i]);
        for e in &self.elems[i..j] {
            t = TensorLevels::chen(&t, e, self.levels);
        }
        t
    }

    pub fn total(&self) -> TensorLevels {
        self.pair(0, self.points.len() - 1)
    }

    /// N when the map has 2^N + 1 points.
    pub fn dyadic_depth(&self) -> Option<u32> {
        let s = self.points.len() - 1;
        s.is_power_of_two().then(|| s.trailing_zeros())
    }

    /// The k-th interval (0-based) of dyadic level n.
    pub fn dyadic(&self, n: u32, k: usize) -> Result<TensorLevels> {
        let depth = self.dyadic_depth().ok_or(Error::Shape("map is not dyadic"))?;
        if n > depth || k >= (1usize << n) {
            return Err(Error::IndexMismatch);
        }
        let s = 1usize << (depth - n);
        Ok(self.pair(k * s, (k + 1) * s))
    }

    /// The map seen on every `stride`-th point.
    pub fn coarsen(&self, stride: usize) -> Result<LiftMap> {
        if stride == 0 || (self.points.len() - 1) % stride != 0 {
            return Err(Error::Shape("stride does not divide the map"));
        }
        let n = (self.points.len() - 1) / stride;
        let points = (0..=n).map(|k| self.points[k * stride]).collect();
        let elems = (0..n).map(|k| self.pair(k * stride, (k + 1) * stride)).collect();
        LiftMap::new(points, elems, self.levels)
    }
}

/// Lift of the path through its own samples.
pub fn lift_piecewise_linear(z: &TwoPath, levels: usize) -> Result<LiftMap> {
    let v: Vec<[f64; 2]> = z.l.iter().zip(&z.g).map(|(a, b)| [*a, *b]).collect();
    LiftMap::from_values(z.x.clone(), &v, levels)
}

/// Z(m): anchored at the control-equalised partition of level m and linear
/// in the w₁ parameter between anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolated {
    /// Z(m) on the grid of the input path.
    pub path: TwoPath,
    pub anchors: Partition,
    pub anchor_values: Vec<[f64; 2]>,
}

pub fn interpolate_zm(z: &TwoPath, w1: &ControlFunction, m: u32) -> Result<Interpolated> {
    let anchors = control_equalized_partition(w1, z.lo(), z.hi(), m)?;
    let anchor_values: Vec<[f64; 2]> = anchors.points.iter().map(|&x| z.at(x)).collect();
    let w = w1.from_left(z.lo());
    let wa: Vec<f64> = anchors.points.iter().map(|&x| w(x)).collect();
    let mut l = Vec::with_capacity(z.len());
    let mut g = Vec::with_capacity(z.len());
    for &x in &z.x {
        let k = anchors.points.partition_point(|&p| p <= x).clamp(1, anchors.len() - 1);
        let (w0, w1v) = (wa[k - 1], wa[k]);
        let s = if w1v > w0 { ((w(x) - w0) / (w1v - w0)).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (anchor_values[k - 1], anchor_values[k]);
        l.push(a[0] + s * (b[0] - a[0]));
        g.push(a[1] + s * (b[1] - a[1]));
    }
    // Anchors coincide with samples: keep them exact.
    for (p, v) in anchors.points.iter().zip(&anchor_values) {
        let i = z.x.partition_point(|&x| x < *p);
        if i < z.len() && z.x[i] == *p {
            l[i] = v[0];
            g[i] = v[1];
        }
    }
    Ok(Interpolated { path: TwoPath::new(z.x.clone(), l, g, Vec::new())?, anchors, anchor_values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BuildWarning {
    /// The gaps failed to decrease over three consecutive m.
    NonCauchy,
    /// No gap fell below the tolerance before m_max.
    ReachedMax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoughPath {
    pub lift: LiftMap,
    /// d_θ(Z(m+1), Z(m)) for m = 0, 1, …
    pub cauchy_gaps: Vec<f64>,
    pub m_star: u32,
    pub warnings: Vec<BuildWarning>,
}

/// Lifts Z(m) for m = 0, 1, … and stops at the first m with
/// d_θ(Z(m+1), Z(m)) < tol, or at m_max. Levels used: ⌊θ⌋ (at most 3).
pub fn build_geometric_rough_path(
    z: &TwoPath,
    w1: &ControlFunction,
    theta: f64,
    m_max: u32,
    tol: f64,
) -> Result<RoughPath> {
    if !(2.0..4.0).contains(&theta) {
        return Err(Error::Domain("theta must lie in [2, 4)"));
    }
    let levels = (floor(theta) as usize).min(3);
    if w1.eval(z.lo(), z.hi()) == 0.0 {
        let v = [[z.l[0], z.g[0]]; 2];
        let lift = LiftMap::from_values(alloc::vec![z.lo(), z.hi()], &v, levels)?;
        return Ok(RoughPath { lift, cauchy_gaps: Vec::new(), m_star: 0, warnings: Vec::new() });
    }
    let top = m_max + 1;
    let finest = control_equalized_partition(w1, z.lo(), z.hi(), top)?;
    let values_at = |m: u32| -> Result<(Vec<f64>, Vec<[f64; 2]>)> {
        let p = finest.coarsen(1usize << (top - m))?;
        let v = p.points.iter().map(|&x| z.at(x)).collect();
        Ok((p.points, v))
    };
    let mut gaps = Vec::new();
    let mut warnings = Vec::new();
    let (mut pts, mut vals) = values_at(0)?;
    let mut m_star = None;
    for m in 0..=m_max {
        let (fine_pts, fine_vals) = values_at(m + 1)?;
        // Z(m) is linear in w₁ between its anchors, and each new anchor sits
        // at the w₁-midpoint, so Z(m) there is the average of its neighbours.
        let mut coarse = Vec::with_capacity(fine_vals.len());
        for k in 0..vals.len() {
            coarse.push(vals[k]);
            if k + 1 < vals.len() {
                coarse.push([0.5 * (vals[k][0] + vals[k + 1][0]), 0.5 * (vals[k][1] + vals[k + 1][1])]);
            }
        }
        let x = LiftMap::from_values(fine_pts.clone(), &fine_vals, levels)?;
        let y = LiftMap::from_values(fine_pts.clone(), &coarse, levels)?;
        let gap = theta_distance(&x, &y, theta, levels)?;
        gaps.push(gap);
        let n = gaps.len();
        if n >= 4 && gaps[n - 1] >= gaps[n - 2] && gaps[n - 2] >= gaps[n - 3] && gaps[n - 3] >= gaps[n - 4] {
            if !warnings.contains(&BuildWarning::NonCauchy) {
                warnings.push(BuildWarning::NonCauchy);
            }
        }
        if gap < tol {
            m_star = Some(m);
            break;
        }
        pts = fine_pts;
        vals = fine_vals;
    }
    let m_star = match m_star {
        Some(m) => m,
        None => {
            warnings.push(BuildWarning::ReachedMax);
            m_max
        }
    };
    if pts.len() != (1usize << m_star) + 1 {
        let (p, v) = values_at(m_star)?;
        pts = p;
        vals = v;
    }
    let lift = LiftMap::from_values(pts, &vals, levels)?;
    Ok(RoughPath { lift, cauchy_gaps: gaps, m_star, warnings })
}

/// Which method an integrand of finite q-variation needs against L.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Regime {
    Young,
    RoughLevel2,
    RoughLevel3,
}

/// p just above the critical exponent 2/(α−1).
pub fn default_p(alpha: f64) -> f64 {
    2.0 / (alpha - 1.0) + 0.05
}

/// Open window (4/(2h+α−1), upper) for θ with h = 1/max(p, q); the upper
/// end is 3 with two levels and 4 with three.
pub fn theta_window(alpha: f64, p: f64, q: f64, levels: usize) -> (f64, f64) {
    let h = 1.0 / p.max(q);
    let lo = 4.0 / (2.0 * h + alpha - 1.0);
    (lo, if levels >= 3 { 4.0 } else { 3.0 })
}

pub fn classify(alpha: f64, q: f64, p: f64) -> Result<Regime> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain("alpha must lie in (1, 2)"));
    }
    if !(q >= 1.0) {
        return Err(Error::Domain("q must be at least 1"));
    }
    if q < 2.0 / (3.0 - alpha) {
        return Ok(Regime::Young);
    }
    if !(alpha > 1.5) || !(q < 4.0) {
        return Err(Error::Regime("needs alpha > 3/2 and q < 4"));
    }
    let (lo2, _) = theta_window(alpha, p, q, 2);
    if lo2 < 3.0 {
        return Ok(Regime::RoughLevel2);
    }
    if lo2 < 4.0 {
        return Ok(Regime::RoughLevel3);
    }
    Err(Error::Regime("no admissible theta"))
}

/// Midpoint of the admissible θ window, clipped to at least 2.
pub fn suggested_theta(alpha: f64, p: f64, q: f64) -> Result<f64> {
    let levels = match classify(alpha, q, p)? {
        Regime::Young | Regime::RoughLevel2 => 2,
        Regime::RoughLevel3 => 3,
    };
    let (lo, hi) = theta_window(alpha, p, q, levels);
    Ok((0.5 * (lo + hi)).max(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoughIntegral {
    pub value: f64,
    /// Difference between the two finest dyadic partitions.
    pub gap: f64,
    pub refinements: u32,
}

const REFINE_REL: f64 = 1e-8;
const REFINE_MAX: u32 = 20;

// Compensated sums over the dyadic sub-partitions of the map.
fn compensated(rp: &LiftMap, start: [f64; 2], integrand: usize, integrator: usize) -> Result<RoughIntegral> {
    if rp.levels < 2 {
        return Err(Error::Domain("the area correction needs level 2"));
    }
    let sum = |m: &LiftMap| -> f64 {
        let mut y = start[integrand];
        let mut s = 0.0;
        for e in &m.elems {
            s += y * e.l1[integrator] + e.l2[integrand][integrator];
            y += e.l1[integrand];
        }
        s
    };
    let Some(depth) = rp.dyadic_depth() else {
        return Ok(RoughIntegral { value: sum(rp), gap: 0.0, refinements: 0 });
    };
    let lo = depth.saturating_sub(REFINE_MAX);
    let mut prev = sum(&rp.coarsen(1usize << (depth - lo))?);
    let mut gap = 0.0;
    for n in lo + 1..=depth {
        let cur = sum(&rp.coarsen(1usize << (depth - n))?);
        gap = fabs(cur - prev);
        prev = cur;
    }
    if gap > REFINE_REL * (1.0 + fabs(prev)) {
        return Err(Error::Convergence { what: "compensated Riemann sums", gap });
    }
    Ok(RoughIntegral { value: prev, gap, refinements: depth - lo })
}

/// ∫ g dL = lim Σ [g(x_{i−1})(L(x_i) − L(x_{i−1})) + (Z²_{x_{i−1},x_i})_{g,L}].
/// The map must be a lift over (L, g) of this field; g enters only through
/// its value at the first point, the rest comes from the lift.
pub fn rough_integral_gdl(g: &GridFunction, field: &LocalTimeField, rp: &LiftMap) -> Result<RoughIntegral> {
    check_field(field, rp)?;
    let x0 = rp.points[0];
    compensated(rp, [field.at(x0), g.eval(x0)], 1, 0)
}

/// ∫ L dL through (Z²)_{L,L}.
pub fn rough_integral_ldl(field: &LocalTimeField, rp: &LiftMap) -> Result<RoughIntegral> {
    check_field(field, rp)?;
    compensated(rp, [field.at(rp.points[0]), 0.0], 0, 0)
}

/// ∫ L dg through (Z²)_{L,g}; `g0` is g at the first point.
pub fn rough_integral_ldg(rp: &LiftMap, l0: f64, g0: f64) -> Result<RoughIntegral> {
    compensated(rp, [l0, g0], 0, 1)
}

fn check_field(field: &LocalTimeField, rp: &LiftMap) -> Result<()> {
    let n = rp.points.len() - 1;
    let dl: f64 = rp.elems.iter().map(|e| e.l1[0]).sum();
    let want = field.at(rp.points[n]) - field.at(rp.points[0]);
    let scale = field.max().max(1e-300);
    if fabs(dl - want) > 1e-9 * scale {
        return Err(Error::Shape("lift does not match the local-time field"));
    }
    Ok(())
}

/// ∫ g dL along a two-path, lifting through every sample; a jumping g is
/// first made continuous by τ_δ.
pub fn rough_integral_gdl_path(z: &TwoPath, delta: f64, q: f64) -> Result<RoughIntegral> {
    if z.jumps.is_empty() {
        let rp = lift_piecewise_linear(z, 2)?;
        return compensated(&rp, [z.l[0], z.g[0]], 1, 0);
    }
    let t = tau_delta_transform(z, delta, q)?;
    let rp = lift_piecewise_linear(&t.path, 2)?;
    compensated(&rp, [t.path.l[0], t.path.g[0]], 1, 0)
}

/// ∫ g dL with g sampled on the field's grid (or evaluated there).
pub fn rough_integral_on_field(g: &GridFunction, field: &LocalTimeField) -> Result<RoughIntegral> {
    rough_integral_gdl_path(&TwoPath::from_field(field, g)?, 1.0, 2.0)
}

/// The almost rough path of the one-form f̂(z)ξ = (ξ_L, z_g ξ_L) on each
/// segment of the lift, and its sewn value over the whole interval.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm {
    pub segments: LiftMap,
    pub total: TensorLevels,
}

/// `start` is Z at the first point of the map.
pub fn one_form_integral(rp: &LiftMap, start: [f64; 2]) -> Result<OneForm> {
    if rp.levels < 3 {
        return Err(Error::Domain("one-form integration needs three levels"));
    }
    let mut y = start[1];
    let mut out = Vec::with_capacity(rp.elems.len());
    for e in &rp.elems {
        // M = [[1, 0], [y, 0]], B(η, ξ) = (0, η_g ξ_L).
        let m = [[1.0, 0.0], [y, 0.0]];
        let mut t = TensorLevels::identity(e.a);
        t.b = e.b;
        for p in 0..2 {
            t.l1[p] = m[p][0] * e.l1[0] + m[p][1] * e.l1[1];
        }
        t.l1[1] += e.l2[1][0];
        for p in 0..2 {
            for q in 0..2 {
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        s += m[p][i] * m[q][j] * e.l2[i][j];
                    }
                }
                t.l2[p][q] = s;
            }
        }
        // Second-order corrections: B(Z_{a,u}, dZ_u) in either slot.
        // (M ⊗ B): Σ M e_i ⊗ B(e_j, e_k) (Z³_{ijk} + Z³_{jik});
        // (B ⊗ M): Σ B(e_i, e_j) ⊗ M e_k Z³_{ijk}. B(e_j, e_k) = e_g iff j = g, k = L.
        for p in 0..2 {
            for i in 0..2 {
                t.l2[p][1] += m[p][i] * (e.l3[i][1][0] + e.l3[1][i][0]);
            }
        }
        for q in 0..2 {
            for k in 0..2 {
                t.l2[1][q] += e.l3[1][0][k] * m[q][k];
            }
        }
        for p in 0..2 {
            for q in 0..2 {
                for r in 0..2 {
                    let mut s = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                s += m[p][i] * m[q][j] * m[r][k] * e.l3[i][j][k];
                            }
                        }
                    }
                    t.l3[p][q][r] = s;
                }
            }
        }
        out.push(t);
        y += e.l1[1];
    }
    let segments = LiftMap::new(rp.points.clone(), out, 3)?;
    let total = segments.total();
    Ok(OneForm { segments, total })
}

/// Result of inserting a segment of length δ|J|^q at each jump of g.
#[derive(Debug, Clone, PartialEq)]
pub struct TauDelta {
    pub path: TwoPath,
    /// Original grid index behind each point of the extended path.
    pub origin: Vec<usize>,
    /// τ_δ(x) at each original grid point.
    pub tau: Vec<f64>,
}

/// g_δ runs linearly from the left limit to the right value across each
/// inserted segment while L_δ stays put; elsewhere both follow the samples.
pub fn tau_delta_transform(z: &TwoPath, delta: f64, q: f64) -> Result<TauDelta> {
    if !(delta > 0.0) {
        return Err(Error::Domain("delta must be positive"));
    }
    if !(q >= 1.0) {
        return Err(Error::Domain("q must be at least 1"));
    }
    let mut jumps = z.jumps.clone();
    jumps.sort_by_key(|j| j.index);
    if jumps.windows(2).any(|w| w[0].index == w[1].index) {
        return Err(Error::Shape("duplicate jump tag"));
    }
    let n = z.len();
    let mut x = Vec::with_capacity(n + jumps.len());
    let mut l = Vec::with_capacity(n + jumps.len());
    let mut g = Vec::with_capacity(n + jumps.len());
    let mut origin = Vec::with_capacity(n + jumps.len());
    let mut tau = Vec::with_capacity(n);
    let mut shift = 0.0;
    let mut next = 0;
    for i in 0..n {
        if next < jumps.len() && jumps[next].index == i {
            let j = jumps[next];
            x.push(z.x[i] + shift);
            l.push(z.l[i]);
            g.push(j.left);
            origin.push(i);
            shift += delta * pow(fabs(z.g[i] - j.left), q);
            next += 1;
        }
        x.push(z.x[i] + shift);
        l.push(z.l[i]);
        g.push(z.g[i]);
        origin.push(i);
        tau.push(z.x[i] + shift);
    }
    // A zero-size tag adds a repeated point; merge it.
    let mut k = 1;
    while k < x.len() {
        if x[k] <= x[k - 1] {
            x.remove(k);
            l.remove(k);
            g.remove(k - 1);
            origin.remove(k);
        } else {
            k += 1;
        }
    }
    Ok(TauDelta { path: TwoPath::new(x, l, g, Vec::new())?, origin, tau })
}

/// ∫ L dg split into the continuous part (trapezoid against g up to each
/// left limit) and Σ L(x_r)(g(x_r) − g(x_r−)).
pub fn ldg_by_decomposition(z: &TwoPath) -> f64 {
    let mut s = 0.0;
    for i in 1..z.len() {
        let left = z.jumps.iter().find(|j| j.index == i).map(|j| j.left);
        let gi = left.unwrap_or(z.g[i]);
        s += 0.5 * (z.l[i - 1] + z.l[i]) * (gi - z.g[i - 1]);
        if let Some(gl) = left {
            s += z.l[i] * (z.g[i] - gl);
        }
    }
    s
}

/// ∫ L dg on the τ_δ-extended path.
pub fn ldg_extended(z: &TwoPath, delta: f64, q: f64) -> Result<f64> {
    let t = tau_delta_transform(z, delta, q)?;
    let rp = lift_piecewise_linear(&t.path, 2)?;
    Ok(rough_integral_ldg(&rp, t.path.l[0], t.path.g[0])?.value)
}

/// |∫g_j dL − ∫g dL| for each member of the sequence, all on the field grid.
pub fn integrand_continuity_check(
    g_seq: &[GridFunction],
    g: &GridFunction,
    field: &LocalTimeField,
    theta: f64,
) -> Result<Vec<f64>> {
    if !(2.0..4.0).contains(&theta) {
        return Err(Error::Domain("theta must lie in [2, 4)"));
    }
    let base = rough_integral_on_field(g, field)?.value;
    g_seq
        .iter()
        .map(|gj| Ok(fabs(rough_integral_on_field(gj, field)?.value - base)))
        .collect()
}

/// Least-squares slope of log₂ gaps against m over the given range.
pub fn log2_slope(gaps: &[f64], from: usize, to: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (from..=to.min(gaps.len().saturating_sub(1)))
        .filter(|&m| gaps[m] > 0.0)
        .map(|m| (m as f64, log2(gaps[m])))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}
