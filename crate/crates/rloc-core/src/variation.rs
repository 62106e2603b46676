//! p-variation on grids, control functions, control-equalised partitions
//! and the θ-variation distance between lifted paths.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use libm::{fabs, pow};

use crate::grid::{lerp_at, GridFunction};
use crate::rough_path::{LiftMap, TensorLevels};
use crate::{Error, Result};

/// x′ = x₀ < x₁ < … < x_m = x″.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    pub points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Shape("a partition needs at least two points"));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Shape("partition points must be strictly increasing"));
        }
        Ok(Partition { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.points[0]
    }

    pub fn hi(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Every `stride`-th point, e.g. the level-m subset of a level-M
    /// hierarchical partition with stride 2^{M−m}.
    pub fn coarsen(&self, stride: usize) -> Result<Partition> {
        if stride == 0 || (self.points.len() - 1) % stride != 0 {
            return Err(Error::Shape("stride does not divide the partition"));
        }
        Partition::new(self.points.iter().step_by(stride).copied().collect())
    }
}

/// The endpoints and the strict turning points of the sequence. For p ≥ 1 a
/// point inside a monotone run never increases a partition sum, so the
/// p-variation of the result equals that of the input.
pub fn turning_points(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if out.last() == Some(&v) {
            continue;
        }
        let k = out.len();
        if k >= 2 && (out[k - 1] - out[k - 2]) * (v - out[k - 1]) > 0.0 {
            out[k - 1] = v;
        } else {
            out.push(v);
        }
    }
    if out.len() == 1 {
        out.push(out[0]);
    }
    out
}

/// sup over sub-partitions of Σ|v_j − v_i|^p, by dynamic programming over
/// the turning points.
pub fn p_variation_exact(values: &[f64], p: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    if p >= 1.0 {
        return p_variation_dp(&turning_points(values), p);
    }
    p_variation_dp(values, p)
}

/// The O(G²) dynamic programme on the full sequence.
pub fn p_variation_dp(values: &[f64], p: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut cum = alloc::vec![0.0f64; n];
    for j in 1..n {
        let vj = values[j];
        let mut best = 0.0f64;
        for i in 0..j {
            let c = cum[i] + pow(fabs(vj - values[i]), p);
            if c > best {
                best = c;
            }
        }
        cum[j] = best;
    }
    cum[n - 1]
}

/// The dyadic sum behind the variation bound, with its constant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicBound {
    /// Σ_{n=1}^N n^γ Σ_k |Δ_{n,k}|^p.
    pub raw: f64,
    /// C(p, γ) = (2 Σ_{n≤N} n^{−γ/(p−1)})^{p−1}.
    pub constant: f64,
    /// constant · raw; dominates the exact p-variation on the level-N grid.
    pub bound: f64,
    /// Geometric extrapolation of the omitted levels n > N (times the constant).
    pub tail: f64,
    pub levels: usize,
}

/// `values` are samples at the 2^N + 1 dyadic points of an interval.
pub fn dyadic_variation_bound(values: &[f64], p: f64, gamma: f64) -> Result<DyadicBound> {
    if !(p > 1.0) {
        return Err(Error::Domain("p must exceed 1"));
    }
    if !(gamma > p - 1.0) {
        return Err(Error::Domain("gamma must exceed p - 1"));
    }
    let segs = values.len().saturating_sub(1);
    if segs == 0 || !segs.is_power_of_two() {
        return Err(Error::Shape("dyadic samples need 2^N + 1 values"));
    }
    let levels = segs.trailing_zeros() as usize;
    if levels < 2 {
        return Err(Error::Shape("at least two dyadic levels are required"));
    }
    let mut terms = Vec::with_capacity(levels);
    for n in 1..=levels {
        let stride = segs >> n;
        let s: f64 = values
            .iter()
            .step_by(stride)
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| pow(fabs(w[1] - w[0]), p))
            .sum();
        terms.push(pow(n as f64, gamma) * s);
    }
    let raw: f64 = terms.iter().sum();
    let s_n: f64 = (1..=levels).map(|n| pow(n as f64, -gamma / (p - 1.0))).sum();
    let constant = pow(2.0 * s_n, p - 1.0);
    let (a, b) = (terms[levels - 2], terms[levels - 1]);
    let tail = if b == 0.0 {
        0.0
    } else if a > 0.0 && b < a {
        let r = b / a;
        b * r / (1.0 - r)
    } else {
        f64::INFINITY
    };
    Ok(DyadicBound { raw, constant, bound: constant * raw, tail: constant * tail, levels })
}

type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Zero,
    Variation { xs: Vec<f64>, ys: Vec<f64>, q: f64, tv: Vec<f64> },
    Custom(Evaluator),
}

/// A control w(a, b): zero on the diagonal and super-additive.
#[derive(Clone)]
pub struct ControlFunction {
    kind: Kind,
    /// Evaluate w₁(a, b) = w(a, b) + (b − a) instead of w.
    pub augmented: bool,
}

impl core::fmt::Debug for ControlFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let k = match &self.kind {
            Kind::Zero => "zero",
            Kind::Variation { .. } => "variation",
            Kind::Custom(_) => "custom",
        };
        f.debug_struct("ControlFunction").field("kind", &k).field("augmented", &self.augmented).finish()
    }
}

impl ControlFunction {
    /// w ≡ 0; augmented, this is the length control b − a.
    pub fn zero() -> Self {
        ControlFunction { kind: Kind::Zero, augmented: false }
    }

    pub fn custom<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        ControlFunction { kind: Kind::Custom(Arc::new(f)), augmented: false }
    }

    pub fn augment(mut self) -> Self {
        self.augmented = true;
        self
    }

    pub fn eval(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let w = match &self.kind {
            Kind::Zero => 0.0,
            Kind::Custom(f) => f(a, b),
            Kind::Variation { xs, ys, q, tv } => {
                if *q == 1.0 {
                    tv_at(xs, ys, tv, b) - tv_at(xs, ys, tv, a)
                } else {
                    let mut v = Vec::new();
                    v.push(lerp_at(xs, ys, a));
                    let i0 = xs.partition_point(|&x| x <= a);
                    let i1 = xs.partition_point(|&x| x < b);
                    v.extend_from_slice(&ys[i0..i1.max(i0)]);
                    v.push(lerp_at(xs, ys, b));
                    p_variation_exact(&v, *q)
                }
            }
        };
        if self.augmented {
            w + (b - a)
        } else {
            w
        }
    }

    /// b ↦ w(a, b) for a fixed left end. For q-variation controls the
    /// dynamic-programming table from `a` is built once, so each call is
    /// linear in the grid size instead of quadratic.
    pub fn from_left(&self, a: f64) -> Box<dyn Fn(f64) -> f64 + '_> {
        let aug = self.augmented;
        let add = move |b: f64, w: f64| if aug { w + (b - a) } else { w };
        match &self.kind {
            Kind::Variation { xs, ys, q, .. } if *q != 1.0 => {
                let q = *q;
                let i0 = xs.partition_point(|&x| x <= a);
                let mut px = alloc::vec![a];
                let mut pv = alloc::vec![lerp_at(xs, ys, a)];
                px.extend_from_slice(&xs[i0..]);
                pv.extend_from_slice(&ys[i0..]);
                let mut cum = alloc::vec![0.0f64; pv.len()];
                for j in 1..pv.len() {
                    let mut best = 0.0f64;
                    for i in 0..j {
                        best = best.max(cum[i] + pow(fabs(pv[j] - pv[i]), q));
                    }
                    cum[j] = best;
                }
                Box::new(move |b: f64| {
                    if !(b > a) {
                        return 0.0;
                    }
                    let vb = lerp_at(xs, ys, b);
                    let k = px.partition_point(|&x| x < b);
                    let mut best = 0.0f64;
                    for i in 0..k {
                        best = best.max(cum[i] + pow(fabs(vb - pv[i]), q));
                    }
                    add(b, best)
                })
            }
            _ => Box::new(move |b: f64| self.eval(a, b)),
        }
    }
}

fn tv_at(xs: &[f64], ys: &[f64], tv: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return 0.0;
    }
    let n = xs.len();
    if x >= xs[n - 1] {
        return tv[n - 1];
    }
    let i = xs.partition_point(|&g| g <= x) - 1;
    tv[i] + fabs(lerp_at(xs, ys, x) - ys[i])
}

/// w(a, b) = q-variation of the linear interpolant of g on [a, b].
pub fn total_variation_control(g: &GridFunction, q: f64) -> Result<ControlFunction> {
    if !(q >= 1.0) {
        return Err(Error::Domain("q must be at least 1"));
    }
    if g.len() < 2 {
        return Err(Error::Shape("need at least two samples"));
    }
    let xs = g.grid.clone();
    let ys = g.values.clone();
    let mut tv = alloc::vec![0.0; ys.len()];
    for i in 1..ys.len() {
        tv[i] = tv[i - 1] + fabs(ys[i] - ys[i - 1]);
    }
    Ok(ControlFunction { kind: Kind::Variation { xs, ys, q, tv }, augmented: false })
}

const BISECT_REL: f64 = 1e-10;
const BISECT_ITERS: usize = 200;

/// 2^m + 1 points with w₁(x_lo, x_l) = (l/2^m) w₁(x_lo, x_hi). Levels are
/// built one inside the other, so the level-m output is exactly every
/// 2^{M−m}-th point of the level-M output.
pub fn control_equalized_partition(w1: &ControlFunction, x_lo: f64, x_hi: f64, m: u32) -> Result<Partition> {
    if !(x_hi > x_lo) {
        return Err(Error::Domain("empty interval"));
    }
    if m > 24 {
        return Err(Error::Domain("m is too large"));
    }
    let w = w1.from_left(x_lo);
    let total = w(x_hi);
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Domain("control is not strictly increasing"));
    }
    let n = 1usize << m;
    let mut pts = alloc::vec![f64::NAN; n + 1];
    pts[0] = x_lo;
    pts[n] = x_hi;
    let tol = BISECT_REL * total;
    for level in 1..=m {
        let step = n >> level;
        for l in (step..n).step_by(2 * step) {
            let target = total * l as f64 / n as f64;
            let (mut lo, mut hi) = (pts[l - step], pts[l + step]);
            let mut found = None;
            for _ in 0..BISECT_ITERS {
                let mid = 0.5 * (lo + hi);
                let v = w(mid);
                if fabs(v - target) <= tol {
                    found = Some(mid);
                    break;
                }
                if v < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * fabs(mid).max(1.0) {
                    break;
                }
            }
            match found {
                Some(x) => pts[l] = x,
                None => {
                    let x = 0.5 * (lo + hi);
                    return Err(Error::Convergence { what: "control inversion", gap: fabs(w(x) - target) / total });
                }
            }
        }
    }
    Partition::new(pts).map_err(|_| Error::Domain("control is not strictly increasing"))
}

/// d_θ(X, Y) = max over levels i ≤ ⌊θ⌋ of (sup Σ|X^i − Y^i|^{θ/i})^{i/θ},
/// the sup taken over sub-partitions of the points shared by both maps.
pub fn theta_distance(x: &LiftMap, y: &LiftMap, theta: f64, levels: usize) -> Result<f64> {
    if !(2.0..4.0).contains(&theta) {
        return Err(Error::Domain("theta must lie in [2, 4)"));
    }
    if !(1..=3).contains(&levels) {
        return Err(Error::Domain("levels must be 1, 2 or 3"));
    }
    if x.points != y.points {
        return Err(Error::IndexMismatch);
    }
    let k = levels.min(theta as usize).min(x.levels).min(y.levels);
    let g = x.points.len();
    let mut cum = [alloc::vec![0.0f64; g], alloc::vec![0.0f64; g], alloc::vec![0.0f64; g]];
    for j in 1..g {
        let mut xa = TensorLevels::identity(x.points[j]);
        let mut ya = xa;
        let mut best = [0.0f64; 3];
        for i in (0..j).rev() {
            xa = TensorLevels::chen(&x.elems[i], &xa, k);
            ya = TensorLevels::chen(&y.elems[i], &ya, k);
            for lv in 1..=k {
                let d = xa.level_distance(&ya, lv);
                let c = cum[lv - 1][i] + pow(d, theta / lv as f64);
                if c > best[lv - 1] {
                    best[lv - 1] = c;
                }
            }
        }
        for lv in 0..k {
            cum[lv][j] = best[lv];
        }
    }
    let mut d = 0.0f64;
    for lv in 1..=k {
        d = d.max(pow(cum[lv - 1][g - 1], lv as f64 / theta));
    }
    Ok(d)
}
