//! Gamma function and the constants built from it.

use core::f64::consts::PI;
use libm::{pow, sin};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) by the Lanczos approximation, with reflection below 1/2.
/// Poles return infinity.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == libm::floor(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / (sin(PI * x) * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    libm::sqrt(2.0 * PI) * pow(t, x + 0.5) * libm::exp(-t) * a
}

/// 𝒜(1,−α), the normalisation that gives the fractional Laplacian the
/// Fourier symbol −|ξ|^α.
pub fn fl_constant(alpha: f64) -> f64 {
    alpha * pow(2.0, alpha - 1.0) * gamma((alpha + 1.0) / 2.0)
        / (libm::sqrt(PI) * gamma(1.0 - alpha / 2.0))
}
