//! Decreasing rearrangement onto flat space at equal volume, and the
//! level-set (co-area) form of the gradient energy.
//!
//! For a strictly decreasing radial `f` on the model, the rearranged
//! profile is the composition `ftilde(varrho(r)) = f(r)` with the
//! equal-volume radius `varrho`. It shares every `L^p` norm with `f`
//! and never has more gradient energy; the energy drop is exactly the
//! isoperimetric gap `Sigma >= Sigma_E` integrated over levels.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::{unit_sphere_area, ModelManifold};
use crate::numerics::quad::{integrate, Domain, QuadratureConfig};
use crate::numerics::{find_root, CubicHermite};
use crate::profiles::{FnProfile, Profile};

const NODES_PER_DECADE: f64 = 96.0;

/// Verify `f' < 0` on the interior of the support; flat spots and
/// increases are rejected.
fn check_strictly_decreasing(f: &dyn Profile, upper: f64) -> Result<()> {
    let samples = 400;
    for i in 0..samples {
        // interior points only: the profile is 0 beyond its support and
        // the derivative vanishes there by construction
        let t = (i as f64 + 0.5) / samples as f64;
        let r = upper * t;
        if f.derivative(r) >= 0.0 {
            return Err(Error::NotMonotone { r });
        }
    }
    Ok(())
}

/// Table of `varrho(r)` over `[r_lo, upper]`, log-spaced, with exact
/// slopes `d ln varrho / d ln r = r psi^{n-1} / varrho^n`.
struct VarrhoTable {
    r_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
    ln_x_of_ln_r: CubicHermite,
    ln_r_of_ln_x: CubicHermite,
}

fn build_varrho(m: &ModelManifold, upper: f64, cfg: &QuadratureConfig) -> Result<VarrhoTable> {
    let n = m.dimension();
    let nm1 = n as i32 - 1;
    let nf = n as f64;
    let warp = m.warp().clone();
    let r_lo = upper * 1e-6;
    let decades = (upper / r_lo).log10();
    let count = ((decades * NODES_PER_DECADE).ceil() as usize).max(16) + 1;

    let mut r_nodes = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        r_nodes.push(r_lo * (upper / r_lo).powf(t));
    }
    r_nodes[0] = r_lo;
    *r_nodes.last_mut().unwrap() = upper;

    // cumulative n * int_0^r psi^{n-1}
    let mut cumulative = vec![0.0; count];
    let first = integrate(
        |t| warp.value(t).powi(nm1),
        Domain::Finite(0.0, r_nodes[0]),
        cfg,
    )?;
    cumulative[0] = nf * first.value;
    for i in 1..count {
        let panel = integrate(
            |t| warp.value(t).powi(nm1),
            Domain::Finite(r_nodes[i - 1], r_nodes[i]),
            cfg,
        )?;
        cumulative[i] = cumulative[i - 1] + nf * panel.value;
    }
    let x_nodes: Vec<f64> = cumulative.iter().map(|&c| c.powf(1.0 / nf)).collect();

    let ln_r: Vec<f64> = r_nodes.iter().map(|&r| r.ln()).collect();
    let ln_x: Vec<f64> = x_nodes.iter().map(|&x| x.ln()).collect();
    let slopes: Vec<f64> = r_nodes
        .iter()
        .zip(&x_nodes)
        .map(|(&r, &x)| r * warp.value(r).powi(nm1) / x.powi(n as i32))
        .collect();
    let ln_x_of_ln_r = CubicHermite::with_slopes(ln_r.clone(), ln_x.clone(), slopes.clone())?;
    let inv: Vec<f64> = slopes.iter().map(|&d| 1.0 / d).collect();
    let ln_r_of_ln_x = CubicHermite::with_slopes(ln_x, ln_r, inv)?;
    Ok(VarrhoTable {
        r_nodes,
        x_nodes,
        ln_x_of_ln_r,
        ln_r_of_ln_x,
    })
}

impl VarrhoTable {
    fn x_max(&self) -> f64 {
        *self.x_nodes.last().unwrap()
    }

    fn r_of_x(&self, x: f64) -> Result<f64> {
        let x_lo = self.x_nodes[0];
        if x < x_lo || x > self.x_max() {
            return Err(Error::RangeError {
                support: x,
                lo: x_lo,
                hi: self.x_max(),
            });
        }
        let guess = self.ln_r_of_ln_x.value(x.ln()).exp();
        let target = x.ln();
        let g = |r: f64| self.ln_x_of_ln_r.value(r.ln()) - target;
        let r_min = self.r_nodes[0];
        let r_max = *self.r_nodes.last().unwrap();
        let mut lo = (guess * (1.0 - 1e-6)).max(r_min);
        let mut hi = (guess * (1.0 + 1e-6)).min(r_max);
        let mut tries = 0;
        while g(lo) > 0.0 && lo > r_min && tries < 10_000 {
            lo = (lo * 0.99).max(r_min);
            tries += 1;
        }
        tries = 0;
        while g(hi) < 0.0 && hi < r_max && tries < 10_000 {
            hi = (hi * 1.01).min(r_max);
            tries += 1;
        }
        find_root(g, lo, hi, 1e-14 * guess)
    }
}

/// Rearrange a strictly decreasing profile onto flat space.
///
/// Unbounded supports are truncated at `r = 40` model units, where every
/// admissible profile carries negligible mass; compactly supported input
/// is rearranged exactly.
pub fn schwarz_symmetrize(
    m: &ModelManifold,
    f: Arc<dyn Profile>,
    cfg: &QuadratureConfig,
) -> Result<FnProfile> {
    const DEFAULT_UPPER: f64 = 40.0;
    let upper = f.support_radius().unwrap_or(DEFAULT_UPPER);
    if !(upper > 0.0) {
        return Err(Error::Domain("profile support must be positive".into()));
    }
    check_strictly_decreasing(f.as_ref(), upper)?;

    let table = Arc::new(build_varrho(m, upper, cfg)?);
    let nm1 = m.dimension() as i32 - 1;
    let warp = m.warp().clone();
    let x_support = table.x_max();
    let x_lo = table.x_nodes[0];
    let r_lo = table.r_nodes[0];
    let origin_scale = r_lo / x_lo;

    let x_kinks: Vec<f64> = f
        .kinks()
        .iter()
        .filter(|&&k| k > r_lo && k < upper)
        .map(|&k| table.ln_x_of_ln_r.value(k.ln()).exp())
        .collect();

    let t_val = Arc::clone(&table);
    let t_der = Arc::clone(&table);
    let f_val = Arc::clone(&f);
    let f_der = Arc::clone(&f);

    let value = move |x: f64| -> f64 {
        if x >= x_support {
            0.0
        } else if x <= x_lo {
            // varrho is the identity to O(x^2) near the origin
            f_val.value(x * origin_scale)
        } else {
            match t_val.r_of_x(x) {
                Ok(r) => f_val.value(r),
                Err(_) => 0.0,
            }
        }
    };
    let derivative = move |x: f64| -> f64 {
        if x >= x_support {
            0.0
        } else if x <= x_lo {
            f_der.derivative(x * origin_scale) * origin_scale
        } else {
            match t_der.r_of_x(x) {
                Ok(r) => f_der.derivative(r) * x.powi(nm1) / warp.value(r).powi(nm1),
                Err(_) => 0.0,
            }
        }
    };
    Ok(FnProfile::new(value, derivative, Some(x_support)).with_kinks(x_kinks))
}

/// Gradient energy through the level-set decomposition:
/// `-int_0^c Sigma(V(l))^2 / V'(l) dl`.
///
/// With `r(l) = f^{-1}(l)` the integrand collapses analytically to
/// `|S^{n-1}| psi(r(l))^{n-1} |f'(r(l))|`, so no quadrature runs inside
/// the level integral; each evaluation costs one root solve.
pub fn coarea_gradient_energy(
    m: &ModelManifold,
    f: &dyn Profile,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (c, invert) = level_inverter(f)?;
    let area = unit_sphere_area(m.dimension())?;
    let nm1 = m.dimension() as i32 - 1;
    let q = integrate(
        |level| match invert(level) {
            Ok(r) => area * m.psi(r).powi(nm1) * f.derivative(r).abs(),
            Err(_) => f64::NAN,
        },
        Domain::Finite(0.0, c),
        cfg,
    )?;
    Ok(q.value)
}

/// The same level integral with the flat-space isoperimetric profile
/// `Sigma_E(V(l))` in place of `Sigma`; equals the gradient energy of
/// the rearranged profile.
pub fn coarea_euclidean_energy(
    m: &ModelManifold,
    f: &dyn Profile,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let (c, invert) = level_inverter(f)?;
    let n = m.dimension();
    let nf = n as f64;
    let area = unit_sphere_area(n)?;
    let nm1 = n as i32 - 1;
    let q = integrate(
        |level| match invert(level) {
            Ok(r) => match m.volume(r, cfg) {
                Ok(v) => {
                    let sigma_e = area.powf(1.0 / nf) * (nf * v).powf((nf - 1.0) / nf);
                    sigma_e * sigma_e * f.derivative(r).abs()
                        / (area * m.psi(r).powi(nm1))
                }
                Err(_) => f64::NAN,
            },
            Err(_) => f64::NAN,
        },
        Domain::Finite(0.0, c),
        cfg,
    )?;
    Ok(q.value)
}

/// Shared setup for the level integrals: the top level `c = f(0+)` and a
/// root-finding inverter `l -> f^{-1}(l)`.
fn level_inverter(
    f: &dyn Profile,
) -> Result<(f64, impl Fn(f64) -> Result<f64> + '_)> {
    let c = f.value(0.0);
    if !(c > 0.0) {
        return Err(Error::ZeroProfile);
    }
    let upper = f.support_radius();
    if let Some(bound) = upper {
        check_strictly_decreasing(f, bound)?;
    }
    let invert = move |level: f64| -> Result<f64> {
        let hi = match upper {
            Some(bound) => bound,
            None => {
                let mut h = 1.0;
                while f.value(h) >= level {
                    h *= 2.0;
                    if h > 1e8 {
                        return Err(Error::Divergent(format!(
                            "level set for l = {level} extends past r = 1e8"
                        )));
                    }
                }
                h
            }
        };
        find_root(|r| f.value(r) - level, 1e-13, hi, 1e-13 * hi.max(1.0))
    };
    Ok((c, invert))
}
