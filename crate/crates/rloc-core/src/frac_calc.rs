//! Fractional integrals and derivatives, the fractional Laplacian, the
//! mollifier, and the constants c_α, C_α and 𝒜(1,−α).

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::sync::atomic::{AtomicU64, Ordering};

use libm::{cos, exp, fabs, pow, sin};

use crate::grid::{Analytic, GridFunction};
use crate::quad::{self, Tol};
use crate::special::gamma;
use crate::{Error, Result};

pub use crate::special::fl_constant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Base {
    Zero,
    MinusInfinity,
}

// ---------------------------------------------------------------- constants

/// c_α = Γ(2−α) sin((2−α)π/2) / (π(α−1)).
pub fn c_alpha(alpha: f64) -> f64 {
    gamma(2.0 - alpha) / (alpha - 1.0) * sin((2.0 - alpha) * PI / 2.0) / PI
}

/// ∫₀^∞ (1 − cos y) y^{−s} dy for 1 < s < 3: periods integrated adaptively
/// up to Y = 2πK, the tail from the asymptotic series of ∫_Y^∞ cos(y) y^{−s}.
pub fn one_minus_cos_moment(s: f64) -> Result<f64> {
    if !(s > 1.0 && s < 3.0) {
        return Err(Error::Domain("moment exponent must lie in (1, 3)"));
    }
    const PERIODS: usize = 64;
    let tp = 2.0 * PI;
    let tol = Tol { rel: 1e-13, abs: 1e-16, max_depth: 50 };
    // On [0, 1] integrate the cosine series term by term: the integrand
    // behaves like y^{2−s}/2 at the origin.
    let mut head = 0.0;
    let mut fact = 1.0;
    for k in 1..12 {
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        head += sign / (fact * (2 * k) as f64 - fact * (s - 1.0));
    }
    head += quad::integrate(|y| (1.0 - cos(y)) * pow(y, -s), 1.0, tp, tol)?;
    for k in 1..PERIODS {
        let a = k as f64 * tp;
        head += quad::integrate(|y| (1.0 - cos(y)) * pow(y, -s), a, a + tp, tol)?;
    }
    let y = PERIODS as f64 * tp;
    let flat = pow(y, 1.0 - s) / (s - 1.0);
    Ok(head + flat - cos_tail(s, y, 4))
}

// ∫_Y^∞ cos(y) y^{−a} dy for Y a multiple of 2π.
fn cos_tail(a: f64, y: f64, depth: u32) -> f64 {
    if depth == 0 {
        return 0.0;
    }
    a * (pow(y, -a - 1.0) - (a + 1.0) * cos_tail(a + 2.0, y, depth - 1))
}

/// c_α from its integral form (2/π)∫₀^∞(1 − cos y) y^{−α} dy.
pub fn c_alpha_integral(alpha: f64) -> Result<f64> {
    Ok(2.0 / PI * one_minus_cos_moment(alpha)?)
}

/// C_α = π^{1/2} Γ(1 − 2/α) / (α 2^{α−1} Γ((1+α)/2)), evaluated as written.
/// Negative on (1, 2) because 1 − 2/α ∈ (−1, 0).
#[allow(non_snake_case)]
pub fn C_alpha(alpha: f64) -> f64 {
    libm::sqrt(PI) * gamma(1.0 - 2.0 / alpha)
        / (alpha * pow(2.0, alpha - 1.0) * gamma((1.0 + alpha) / 2.0))
}

/// The Lévy-measure constant C that makes ν(dy) = C|y|^{−1−α}dy produce
/// the characteristic exponent |θ|^α: C = 1 / (2∫₀^∞(1 − cos u)u^{−1−α}du),
/// computed by quadrature.
pub fn calibrated_levy_constant(alpha: f64) -> Result<f64> {
    Ok(0.5 / one_minus_cos_moment(1.0 + alpha)?)
}

/// Side-by-side values of the competing normalisations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConstantReport {
    pub alpha: f64,
    pub c_alpha: f64,
    pub c_alpha_printed: f64,
    pub fl_constant: f64,
    pub calibrated_levy_constant: f64,
}

pub fn constant_report(alpha: f64) -> Result<ConstantReport> {
    Ok(ConstantReport {
        alpha,
        c_alpha: c_alpha(alpha),
        c_alpha_printed: C_alpha(alpha),
        fl_constant: fl_constant(alpha),
        calibrated_levy_constant: calibrated_levy_constant(alpha)?,
    })
}

// ------------------------------------------------- Riemann–Liouville integral

fn lower_limit(g: &GridFunction) -> Result<f64> {
    match &g.tag {
        None => Ok(g.lo()),
        Some(t) => match (t, t.support()) {
            (_, Some((lo, _))) => Ok(lo),
            (Analytic::Exp { rate }, _) if *rate > 0.0 => Ok(-40.0 / rate),
            _ => Err(Error::Convergence { what: "Liouville integral of a non-decaying function", gap: f64::INFINITY }),
        },
    }
}

/// (1/Γ(β)) ∫_a^x (x−u)^{β−1} g(u) du with a = 0 or a = −∞.
pub fn rl_integral(g: &GridFunction, order: f64, x: f64, base: Base) -> Result<f64> {
    if !(order > 0.0) {
        return Err(Error::Domain("order must be positive"));
    }
    let a = match base {
        Base::Zero => {
            if x < 0.0 {
                return Err(Error::Domain("x must be nonnegative for base 0"));
            }
            0.0
        }
        Base::MinusInfinity => lower_limit(g)?,
    };
    if x <= a {
        return Ok(0.0);
    }
    // u = x − s^{1/β} turns the kernel into a constant.
    let smax = pow(x - a, order);
    let inv = 1.0 / order;
    let tol = Tol { rel: 1e-12, abs: 1e-15, max_depth: 40 };
    let panels = 16;
    let h = smax / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        s += quad::integrate(|v| g.eval(x - pow(v, inv)), k as f64 * h, (k + 1) as f64 * h, tol)?;
    }
    Ok(s / gamma(order + 1.0))
}

/// [`rl_integral`] at every grid point (points below 0 are skipped for
/// base 0, so the result may live on a suffix of the grid).
pub fn rl_integral_grid(g: &GridFunction, order: f64, base: Base) -> Result<GridFunction> {
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for &x in &g.grid {
        if base == Base::Zero && x < 0.0 {
            continue;
        }
        xs.push(x);
        vs.push(rl_integral(g, order, x, base)?);
    }
    GridFunction::sampled(xs, vs)
}

// ------------------------------------------------------ fractional derivatives

/// Grünwald–Letnikov weights (−1)^k binom(β, k).
pub fn gl_weights(order: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 0..n {
        w.push(c);
        c *= 1.0 - (order + 1.0) / (k + 1) as f64;
    }
    w
}

fn gl_sampled(g: &GridFunction, order: f64, side: Side) -> Result<GridFunction> {
    let n = g.len();
    let h = g.spacing();
    let vmax = g.values.iter().fold(0.0f64, |m, v| m.max(fabs(*v)));
    if order != 1.0 {
        let lim = 1e-6 * vmax.max(1.0);
        let (e0, e1) = match side {
            Side::Left => (g.values[0], g.values[1]),
            Side::Right => (g.values[n - 1], g.values[n - 2]),
        };
        if fabs(e0) > lim || (order > 1.0 && fabs(e1) > lim) {
            return Err(Error::Shape("grid margin too small for the fractional derivative"));
        }
    }
    let w = gl_weights(order, n + 1);
    let shift = usize::from(order > 1.0);
    let scale = pow(h, -order);
    let y = &g.values;
    let mut out = alloc::vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        match side {
            Side::Left => {
                let top = (i + shift).min(n - 1);
                for k in 0..=top {
                    s += w[k] * y[top - k];
                }
            }
            Side::Right => {
                let bot = i.saturating_sub(shift);
                for k in 0..n - bot {
                    s += w[k] * y[bot + k];
                }
            }
        }
        *o = s * scale;
    }
    Ok(g.map_values(out))
}

// Closed forms and singular quadrature for tagged inputs; None means
// "fall back to the samples".
fn frac_derivative_tagged(t: &Analytic, order: f64, side: Side, x: f64) -> Option<Result<f64>> {
    let sgn = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    match t {
        Analytic::Constant { .. } => Some(Ok(0.0)),
        Analytic::Cos { freq, phase } => {
            // cos(−ωx + φ) = cos(ωx − φ)
            let w = fabs(*freq);
            let ph = if *freq < 0.0 { -phase } else { *phase };
            Some(Ok(pow(w, order) * cos(w * x + ph + sgn * order * PI / 2.0)))
        }
        Analytic::Exp { rate } if sgn * rate > 0.0 => Some(Ok(pow(fabs(*rate), order) * exp(rate * x))),
        _ if t.support().is_some() => Some(caputo_quad(t, order, side, x)),
        _ => None,
    }
}

// D^β g(x) = ±(1/Γ(n−β)) ∫₀^∞ g^{(n)}(x ∓ t) t^{n−1−β} dt, n = ⌈β⌉.
fn caputo_quad(t: &Analytic, order: f64, side: Side, x: f64) -> Result<f64> {
    let (lo, hi) = t.support().unwrap();
    let n = if order < 1.0 { 1 } else { 2 };
    let nu = n as f64 - order;
    let tmax = match side {
        Side::Left => x - lo,
        Side::Right => hi - x,
    };
    if tmax <= 0.0 {
        return Ok(0.0);
    }
    let dir = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    // t = v^{1/ν} removes the endpoint singularity: t^{ν−1}dt = dv/ν.
    let inv = 1.0 / nu;
    let f = |v: f64| {
        let u = x + dir * pow(v, inv);
        if n == 1 {
            t.d1(u)
        } else {
            t.d2(u)
        }
    };
    let vmax = pow(tmax, nu);
    let breaks: Vec<f64> = (0..=32).map(|k| vmax * k as f64 / 32.0).collect();
    let s = quad::integrate_pieces(f, &breaks, Tol { rel: 1e-11, abs: 1e-15, max_depth: 40 })?;
    let sign = if n == 1 && side == Side::Right { -1.0 } else { 1.0 };
    Ok(sign * s / (nu * gamma(nu)))
}

/// Left (base −∞ / grid start) or right (base +∞ / grid end) fractional
/// derivative of order in (0, 2). Tagged inputs use closed forms or direct
/// quadrature; sampled inputs use Grünwald–Letnikov differences.
pub fn frac_derivative(g: &GridFunction, order: f64, side: Side) -> Result<GridFunction> {
    if !(order > 0.0 && order < 2.0) {
        return Err(Error::Domain("order must lie in (0, 2)"));
    }
    if let Some(t) = &g.tag {
        if frac_derivative_tagged(t, order, side, g.grid[0]).is_some() {
            let vals = g
                .grid
                .iter()
                .map(|&x| frac_derivative_tagged(t, order, side, x).unwrap())
                .collect::<Result<Vec<_>>>()?;
            return Ok(g.map_values(vals));
        }
    }
    gl_sampled(g, order, side)
}

/// ∇^α g = −(1/(2cos(πα/2))) (left + right).
pub fn riesz_derivative(g: &GridFunction, order: f64) -> Result<GridFunction> {
    if order == 1.0 {
        return Err(Error::Domain("Riesz derivative is undefined at order 1"));
    }
    let l = frac_derivative(g, order, Side::Left)?;
    let r = frac_derivative(g, order, Side::Right)?;
    let c = -0.5 / cos(PI * order / 2.0);
    Ok(g.map_values(l.values.iter().zip(&r.values).map(|(a, b)| c * (a + b)).collect()))
}

/// The order-(α−1) derivative whose x-derivative is Δ^{α/2}:
/// (left − right)/(2 sin(π(α−1)/2)). Equivalently
/// (1/(2 sin(πβ/2) Γ(1−β))) ∫ g'(u)|x−u|^{−β} du with β = α−1, which is how
/// tagged inputs are evaluated. Only increments matter downstream, so
/// functions with linear growth are normalised to vanish at 0.
pub fn fractional_gradient(g: &GridFunction, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::Domain("alpha must lie in (1, 2)"));
    }
    if let Some(t) = &g.tag {
        if let Some(v) = fractional_gradient_at(t, alpha, g.grid[0]) {
            v?;
            let vals = g
                .grid
                .iter()
                .map(|&x| fractional_gradient_at(t, alpha, x).unwrap())
                .collect::<Result<Vec<_>>>()?;
            return Ok(g.map_values(vals));
        }
    }
    let beta = alpha - 1.0;
    let l = gl_sampled(g, beta, Side::Left)?;
    let r = gl_sampled(g, beta, Side::Right)?;
    let c = 0.5 / sin(PI * beta / 2.0);
    Ok(g.map_values(l.values.iter().zip(&r.values).map(|(a, b)| c * (a - b)).collect()))
}

/// Pointwise [`fractional_gradient`] for a closed form, if supported.
pub fn fractional_gradient_at(t: &Analytic, alpha: f64, x: f64) -> Option<Result<f64>> {
    let beta = alpha - 1.0;
    let k = 0.5 / (sin(PI * beta / 2.0) * gamma(1.0 - beta));
    match t {
        Analytic::Constant { .. } | Analytic::Affine { .. } => Some(Ok(0.0)),
        Analytic::Cos { freq, phase } => {
            Some(Ok(-freq.signum() * pow(fabs(*freq), beta) * sin(freq * x + phase)))
        }
        Analytic::Abs => Some(Ok(pl_gradient(&[0.0], &[-1.0, 1.0], beta, k, x))),
        Analytic::PiecewiseLinear { knots, values } => {
            if knots.len() < 2 {
                return Some(Ok(0.0));
            }
            let slopes: Vec<f64> = knots
                .windows(2)
                .zip(values.windows(2))
                .map(|(kk, vv)| (vv[1] - vv[0]) / (kk[1] - kk[0]))
                .collect();
            let mut s = Vec::with_capacity(slopes.len() + 2);
            s.push(slopes[0]);
            s.extend_from_slice(&slopes);
            s.push(*slopes.last().unwrap());
            Some(Ok(pl_gradient(knots, &s, beta, k, x)))
        }
        Analytic::AbsPower { gamma: gm } => {
            let mu = gm - beta;
            if !(*gm > 0.0 && mu > -1.0 && mu < 1.0) {
                return Some(Err(Error::Domain("|x|^γ needs 0 < γ and |γ − (α−1)| < 1")));
            }
            let kappa = gamma(1.0 + gm) * sin(PI * gm / 2.0) / (gamma(1.0 + mu) * cos(PI * mu / 2.0));
            let v = if x == 0.0 {
                if mu > 0.0 { 0.0 } else { -kappa }
            } else {
                kappa * x.signum() * pow(fabs(x), mu)
            };
            Some(Ok(v))
        }
        _ if t.support().is_some() => Some(symmetric_kernel_quad(t, beta, k, x)),
        _ => None,
    }
}

// F(v) = sgn(v)|v|^{1−β}/(1−β), an antiderivative of |v|^{−β}.
fn anti(v: f64, beta: f64) -> f64 {
    v.signum() * pow(fabs(v), 1.0 - beta) / (1.0 - beta)
}

// slopes[0] applies on (−∞, knots[0]), slopes[j] on [knots[j−1], knots[j]],
// the last on (knots[end], ∞).
fn pl_gradient(knots: &[f64], slopes: &[f64], beta: f64, k: f64, x: f64) -> f64 {
    let f = |v: f64| anti(v, beta);
    let mut s = slopes[0] * (f(knots[0] - x) - f(knots[0]));
    for j in 1..knots.len() {
        let (a, b) = (knots[j - 1], knots[j]);
        s += slopes[j] * (f(b - x) - f(a - x) - f(b) + f(a));
    }
    let last = knots[knots.len() - 1];
    s += slopes[knots.len()] * (f(last) - f(last - x));
    k * s
}

fn symmetric_kernel_quad(t: &Analytic, beta: f64, k: f64, x: f64) -> Result<f64> {
    let (lo, hi) = t.support().unwrap();
    let inv = 1.0 / (1.0 - beta);
    let tol = Tol { rel: 1e-11, abs: 1e-15, max_depth: 40 };
    // u = x ∓ v^{1/(1−β)}, |x−u|^{−β}du = dv/(1−β).
    let side = |dir: f64, len: f64| -> Result<f64> {
        if len <= 0.0 {
            return Ok(0.0);
        }
        let vmax = pow(len, 1.0 - beta);
        let breaks: Vec<f64> = (0..=32).map(|j| vmax * j as f64 / 32.0).collect();
        quad::integrate_pieces(|v| t.d1(x + dir * pow(v, inv)), &breaks, tol)
    };
    let s = side(-1.0, x - lo)? + side(1.0, hi - x)?;
    Ok(k * s / (1.0 - beta))
}

// ----------------------------------------------------- fractional Laplacian

fn tail_scale(t: &Option<Analytic>) -> f64 {
    match t {
        Some(Analytic::Cos { freq, .. }) => 1.0 / fabs(*freq).max(1e-12),
        Some(Analytic::Exp { rate }) => 1.0 / fabs(*rate).max(1e-12),
        _ => 1.0,
    }
}

/// Δ^{α/2}g at one point: 𝒜(1,−α) times the principal value, with the
/// gradient-compensated (symmetrised) integrand inside |y| < 1 and the raw
/// difference outside. ε is halved until successive values agree to 1e-6.
pub fn frac_laplacian_at(g: &GridFunction, order: f64, x: f64, epsilon: f64) -> Result<f64> {
    if !(order > 0.0 && order < 2.0) {
        return Err(Error::Domain("order must lie in (0, 2)"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Domain("epsilon must be positive"));
    }
    if let Some(Analytic::Constant { .. } | Analytic::Affine { .. }) = &g.tag {
        return Ok(0.0);
    }
    let a = order;
    let gx = g.eval(x);
    let e = |y: f64| g.eval(x + y) + g.eval(x - y) - 2.0 * gx;
    // Reach of the tail: past it the integrand is below 1e-12 or identically 0.
    let reach = match &g.tag {
        Some(t) => match (t.support(), t.bound()) {
            (Some((lo, hi)), _) => (x - lo).max(hi - x),
            (None, Some(m)) => pow(2.0 * m / 1e-12, 1.0 / (1.0 + a)),
            _ => return Err(Error::Domain("integrand is not admissible for the fractional Laplacian")),
        },
        None => (x - g.lo()).max(g.hi() - x),
    };
    let tol = Tol { rel: 1e-11, abs: 1e-15, max_depth: 40 };
    let mut tail = -2.0 * gx / a;
    if reach > 1.0 {
        let w = 4.0 * tail_scale(&g.tag);
        let n = libm::ceil((reach - 1.0) / w) as usize;
        let mut f = |y: f64| (g.eval(x + y) + g.eval(x - y)) * pow(y, -1.0 - a);
        if g.tag.is_some() {
            tail += quad::gl_panels(&mut f, 1.0, 1.0 + n as f64 * w, n);
        } else {
            let h = g.spacing();
            let m = libm::ceil((reach - 1.0) / h) as usize;
            tail += quad::gl_panels(&mut f, 1.0, 1.0 + m as f64 * h, m);
        }
    }
    let d2 = match &g.tag {
        Some(t) if t.is_smooth() => t.d2(x),
        _ => {
            let d = 1e-3 * g.spacing();
            e(d) / (d * d)
        }
    };
    let inner = |eps: f64| d2 * pow(eps, 2.0 - a) / (2.0 - a);
    let mut eps = epsilon.min(1.0);
    let mut mid = 0.0;
    let mut lo = eps;
    while lo < 1.0 {
        let hi = (2.0 * lo).min(1.0);
        mid += quad::integrate(|y| e(y) * pow(y, -1.0 - a), lo, hi, tol)?;
        lo = hi;
    }
    let mut prev = mid + inner(eps);
    let floor = match g.tag {
        None => g.spacing(),
        Some(_) => 0.0,
    };
    for _ in 0..40 {
        let next_eps = eps / 2.0;
        if next_eps < floor {
            return Ok(fl_constant(a) * (prev + tail));
        }
        mid += quad::integrate(|y| e(y) * pow(y, -1.0 - a), next_eps, eps, tol)?;
        let cur = mid + inner(next_eps);
        eps = next_eps;
        let gap = fabs(cur - prev);
        prev = cur;
        if gap < 1e-6 * (1.0 + fabs(cur)) {
            return Ok(fl_constant(a) * (prev + tail));
        }
    }
    Err(Error::Convergence { what: "principal value", gap: f64::NAN })
}

pub fn frac_laplacian(g: &GridFunction, order: f64, epsilon: f64) -> Result<GridFunction> {
    let vals = g
        .grid
        .iter()
        .map(|&x| frac_laplacian_at(g, order, x, epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(g.map_values(vals))
}

// --------------------------------------------------------------- mollifier

static RHO_C: AtomicU64 = AtomicU64::new(0);

fn rho_raw(x: f64) -> f64 {
    if x <= 0.0 || x >= 2.0 {
        0.0
    } else {
        let d = x - 1.0;
        exp(1.0 / (d * d - 1.0))
    }
}

/// Normalising constant c with ∫₀² ρ = 1, computed once.
pub fn rho_constant() -> f64 {
    let bits = RHO_C.load(Ordering::Relaxed);
    if bits != 0 {
        return f64::from_bits(bits);
    }
    let tol = Tol { rel: 1e-14, abs: 1e-16, max_depth: 50 };
    let z = quad::integrate(rho_raw, 0.0, 2.0, tol).expect("mollifier mass");
    let c = 1.0 / z;
    RHO_C.store(c.to_bits(), Ordering::Relaxed);
    c
}

/// ρ(x) = c e^{1/((x−1)²−1)} on (0, 2).
pub fn rho(x: f64) -> f64 {
    rho_constant() * rho_raw(x)
}

/// f_n(x) = ∫₀² ρ(z) f(x − z/n) dz. Sampled inputs are read by linear
/// interpolation and the result keeps only points with 2/n of left margin.
pub fn mollify(f: &GridFunction, n: u32) -> Result<GridFunction> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1"));
    }
    let nf = n as f64;
    let c = rho_constant();
    // ∫ρ = 1 and ∫zρ = 1 keep these two families closed under smoothing.
    match &f.tag {
        Some(Analytic::Constant { .. }) => return Ok(f.clone()),
        Some(Analytic::Affine { slope, intercept }) => {
            let t = Analytic::Affine { slope: *slope, intercept: intercept - slope / nf };
            return GridFunction::from_analytic(t, f.grid.clone());
        }
        _ => {}
    }
    let tol = Tol { rel: 1e-12, abs: 1e-15, max_depth: 30 };
    let breaks: Vec<f64> = (0..=8).map(|k| 0.25 * k as f64).collect();
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for &x in &f.grid {
        let v = match &f.tag {
            Some(t) => quad::integrate_pieces(|z| c * rho_raw(z) * t.eval(x - z / nf), &breaks, tol)?,
            None => {
                if x - 2.0 / nf < f.lo() - 1e-12 * f.spacing() {
                    continue;
                }
                // Split at grid nodes so each piece sees a single linear cell.
                let mut pts: Vec<f64> = Vec::new();
                let h = f.spacing();
                let k0 = libm::ceil((x - 2.0 / nf - f.lo()) / h) as i64;
                let k1 = libm::floor((x - f.lo()) / h) as i64;
                for k in k0..=k1 {
                    let z = nf * (x - (f.lo() + k as f64 * h));
                    if z > 0.0 && z < 2.0 {
                        pts.push(z);
                    }
                }
                pts.push(0.0);
                pts.push(2.0);
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                quad::integrate_pieces(|z| c * rho_raw(z) * f.interp_linear(x - z / nf), &pts, tol)?
            }
        };
        xs.push(x);
        vs.push(v);
    }
    if xs.len() < 2 {
        return Err(Error::Shape("grid has no room for the mollifier margin"));
    }
    GridFunction::sampled(xs, vs)
}

/// (frac_derivative(mollify(f, n)), mollify(frac_derivative(f))) on the
/// points where both are defined.
pub fn frac_derivative_commutes_with_mollifier(
    f: &GridFunction,
    n: u32,
    order: f64,
) -> Result<(GridFunction, GridFunction)> {
    let lhs = frac_derivative(&mollify(f, n)?, order, Side::Left)?;
    let rhs = mollify(&frac_derivative(f, order, Side::Left)?, n)?;
    let k = lhs.len().min(rhs.len());
    let trim = |g: GridFunction| {
        let s = g.len() - k;
        GridFunction::sampled(g.grid[s..].to_vec(), g.values[s..].to_vec())
    };
    Ok((trim(lhs)?, trim(rhs)?))
}
