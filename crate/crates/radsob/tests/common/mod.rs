//! Shared cross-check oracles for the integration tests. Everything here is
//! deliberately primitive and independent of the library's own quadrature
//! and interpolation paths.

#![allow(dead_code)]

/// Composite Simpson on a uniform grid; panels must be even.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels >= 2 && panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// `Gamma(m/2)` by the recurrence from `Gamma(1/2) = sqrt(pi)` and
/// `Gamma(1) = 1`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m >= 1);
    let mut value = if m % 2 == 1 { std::f64::consts::PI.sqrt() } else { 1.0 };
    let mut arg = if m % 2 == 1 { 1 } else { 2 };
    while arg < m {
        value *= arg as f64 / 2.0;
        arg += 2;
    }
    value
}

/// Area of the unit sphere in `R^n`: `2 pi^{n/2} / Gamma(n/2)`.
pub fn sphere_area_oracle(n: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Reciprocal of the sharp flat-space embedding constant,
/// `1/C = sqrt(pi n (n-2)) (Gamma(n/2) / Gamma(n))^{1/n}`.
pub fn inverse_best_constant_oracle(n: u32) -> f64 {
    let nf = n as f64;
    let gamma_n = gamma_half(2 * n);
    (std::f64::consts::PI * nf * (nf - 2.0)).sqrt() * (gamma_half(n) / gamma_n).powf(1.0 / nf)
}

/// Relative difference with a guard for zero expectations.
pub fn rel_err(got: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        got.abs()
    } else {
        (got - expected).abs() / expected.abs()
    }
}
