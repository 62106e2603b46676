//! Adaptive Gauss–Legendre quadrature.

use crate::{Error, Result};

const GL_X: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_W: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982_0,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    pub rel: f64,
    pub abs: f64,
    pub max_depth: u32,
}

impl Default for Tol {
    fn default() -> Self {
        Tol { rel: 1e-10, abs: 1e-14, max_depth: 40 }
    }
}

impl Tol {
    pub fn rel(rel: f64) -> Self {
        Tol { rel, ..Tol::default() }
    }
}

/// Ten-point Gauss–Legendre rule on one panel.
#[inline]
pub fn gl10<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for i in 0..5 {
        let d = h * GL_X[i];
        s += GL_W[i] * (f(c - d) + f(c + d));
    }
    s * h
}

/// Fixed composite rule with `panels` equal panels.
pub fn gl_panels<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gl10(f, a + i as f64 * h, a + (i + 1) as f64 * h))
        .sum()
}

/// Adaptive bisection: a panel is accepted once its ten-point value agrees
/// with the sum over its two halves.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tol) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gl10(&mut f, a, b);
    let mut worst = 0.0f64;
    let v = recurse(&mut f, a, b, whole, tol, 0, whole.abs(), &mut worst);
    if worst > 0.0 {
        return Err(Error::Convergence { what: "quadrature", gap: worst });
    }
    Ok(v)
}

/// Like [`integrate`] but returns the best estimate even when some panel hit
/// the depth limit. Used inside loops that do their own convergence checks.
pub fn integrate_lenient<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tol) -> f64 {
    if a == b {
        return 0.0;
    }
    let whole = gl10(&mut f, a, b);
    let mut worst = 0.0;
    recurse(&mut f, a, b, whole, tol, 0, whole.abs(), &mut worst)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: Tol,
    depth: u32,
    scale: f64,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let l = gl10(f, a, m);
    let r = gl10(f, m, b);
    let err = (l + r - whole).abs();
    let scale = scale.max((l + r).abs());
    if err <= tol.abs.max(tol.rel * scale) {
        return l + r;
    }
    if depth >= tol.max_depth || m <= a || m >= b {
        *worst = worst.max(err);
        return l + r;
    }
    recurse(f, a, m, l, tol, depth + 1, scale, worst)
        + recurse(f, m, b, r, tol, depth + 1, scale, worst)
}

/// Integrate over consecutive breakpoints, adapting each piece separately.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], tol: Tol) -> Result<f64> {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        s += integrate(&mut f, w[0], w[1], tol)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tol::default()).unwrap();
        assert!((v - 0.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, Tol { max_depth: 60, ..Tol::default() })
            .unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }
}
