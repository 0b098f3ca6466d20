//! The weighted change of variables `r -> s` and its consequences.
//!
//! `s(r)` is defined through the tail integral
//! `1/((n-2) s^{n-2}) = int_r^infty psi(t)^{1-n} dt`; it is strictly
//! increasing, equals `r` exactly on flat space, and satisfies
//! `s'(r) = (s/psi)^{n-1}`. The density deficit `rho(s) = psi(r(s))/s`
//! lies in `(0, 1]` on every convex model and measures how far the model
//! is from flat space.

pub mod symmetrize;

pub use symmetrize::{coarea_euclidean_energy, coarea_gradient_energy, schwarz_symmetrize};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::ModelManifold;
use crate::numerics::quad::{integrate, integrate_with_breaks, Domain, QuadratureConfig};
use crate::numerics::{find_root, CubicHermite};
use crate::profiles::{FnProfile, FunctionalValue, Profile};
use crate::report::csv_table;

/// Interpolation nodes per decade of radius; chosen so the log-log cubic
/// reproduces the map well below the certified inversion error.
const NODES_PER_DECADE: f64 = 96.0;

/// Tabulated change of variables for one manifold.
#[derive(Clone)]
pub struct TransformTable {
    manifold: ModelManifold,
    r_nodes: Vec<f64>,
    s_nodes: Vec<f64>,
    /// Ball volumes `|S^{n-1}| int_0^{r_i} psi^{n-1}`.
    v_nodes: Vec<f64>,
    ln_s_of_ln_r: CubicHermite,
    ln_r_of_ln_s: CubicHermite,
    inversion_error: f64,
}

/// Surface measures at equal enclosed volume on the model and in flat
/// space; `sigma >= sigma_e` is the radial isoperimetric inequality.
#[derive(Debug, Clone)]
pub struct IsoperimetricPair {
    pub v: Vec<f64>,
    pub sigma: Vec<f64>,
    pub sigma_e: Vec<f64>,
}

impl IsoperimetricPair {
    /// Pointwise slack `sigma - sigma_e`.
    pub fn margins(&self) -> Vec<f64> {
        self.sigma
            .iter()
            .zip(&self.sigma_e)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Build the table on `r_range`, log-spaced.
///
/// The caller is expected to have validated the manifold: on a model
/// whose warp grows too slowly the defining tail integral diverges and
/// this returns `TailDivergent`.
pub fn build_transform(
    m: &ModelManifold,
    r_range: (f64, f64),
    cfg: &QuadratureConfig,
) -> Result<TransformTable> {
    let (r_lo, r_hi) = r_range;
    if !(r_lo > 0.0) || !(r_hi > r_lo) {
        return Err(Error::Domain(format!(
            "transform range must satisfy 0 < lo < hi, got [{r_lo}, {r_hi}]"
        )));
    }
    let n = m.dimension();
    let nm1 = n as i32 - 1;
    let warp = m.warp().clone();

    let decades = (r_hi / r_lo).log10();
    let count = ((decades * NODES_PER_DECADE).ceil() as usize).max(16) + 1;
    let mut r_nodes = Vec::with_capacity(count);
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        r_nodes.push(r_lo * (r_hi / r_lo).powf(t));
    }
    // exact endpoints, no powf rounding
    r_nodes[0] = r_lo;
    *r_nodes.last_mut().unwrap() = r_hi;

    // tail values T_i = int_{r_i}^infty psi^{1-n}
    let mut tails = vec![0.0; count];
    if warp.closed_tail(n, r_lo).is_some() {
        for (i, &r) in r_nodes.iter().enumerate() {
            tails[i] = warp
                .closed_tail(n, r)
                .ok_or_else(|| Error::Domain(format!("closed tail vanished at r = {r}")))?;
        }
    } else {
        let top = integrate(
            |t| warp.value(t).powi(1 - n as i32),
            Domain::HalfLine(r_hi),
            cfg,
        )?;
        tails[count - 1] = top.value;
        for i in (0..count - 1).rev() {
            let panel = integrate(
                |t| warp.value(t).powi(1 - n as i32),
                Domain::Finite(r_nodes[i], r_nodes[i + 1]),
                cfg,
            )?;
            tails[i] = tails[i + 1] + panel.value;
        }
    }

    // s_i = ((n-2) T_i)^{-1/(n-2)}
    let nm2 = n as f64 - 2.0;
    let s_nodes: Vec<f64> = tails.iter().map(|&t| (nm2 * t).powf(-1.0 / nm2)).collect();
    for w in s_nodes.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::NotMonotone { r: w[1] });
        }
    }

    // cumulative volumes
    let area = crate::manifold::unit_sphere_area(n)?;
    let mut v_nodes = vec![0.0; count];
    let first = integrate(
        |t| warp.value(t).powi(nm1),
        Domain::Finite(0.0, r_nodes[0]),
        cfg,
    )?;
    v_nodes[0] = area * first.value;
    for i in 1..count {
        let panel = integrate(
            |t| warp.value(t).powi(nm1),
            Domain::Finite(r_nodes[i - 1], r_nodes[i]),
            cfg,
        )?;
        v_nodes[i] = v_nodes[i - 1] + area * panel.value;
    }

    // log-log interpolants with exact slopes:
    // d ln s / d ln r = r / ((n-2) T psi^{n-1})
    let ln_r: Vec<f64> = r_nodes.iter().map(|&r| r.ln()).collect();
    let ln_s: Vec<f64> = s_nodes.iter().map(|&s| s.ln()).collect();
    let slopes: Vec<f64> = r_nodes
        .iter()
        .zip(&tails)
        .map(|(&r, &t)| r / (nm2 * t * warp.value(r).powi(nm1)))
        .collect();
    let ln_s_of_ln_r = CubicHermite::with_slopes(ln_r.clone(), ln_s.clone(), slopes.clone())?;
    let inv_slopes: Vec<f64> = slopes.iter().map(|&d| 1.0 / d).collect();
    let ln_r_of_ln_s = CubicHermite::with_slopes(ln_s, ln_r, inv_slopes)?;

    let mut table = TransformTable {
        manifold: m.clone(),
        r_nodes,
        s_nodes,
        v_nodes,
        ln_s_of_ln_r,
        ln_r_of_ln_s,
        inversion_error: 0.0,
    };

    // certify the round trip at segment midpoints
    let mut worst: f64 = 0.0;
    let stride = (count / 64).max(1);
    for i in (0..count - 1).step_by(stride) {
        let s_mid = (table.s_nodes[i] * table.s_nodes[i + 1]).sqrt();
        let r = table.r_of_s(s_mid)?;
        let s_back = table.s_of_r(r)?;
        worst = worst.max((s_back - s_mid).abs() / s_mid);
    }
    table.inversion_error = worst;
    Ok(table)
}

impl TransformTable {
    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    pub fn volume_nodes(&self) -> &[f64] {
        &self.v_nodes
    }

    pub fn r_min(&self) -> f64 {
        self.r_nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.r_nodes.last().unwrap()
    }

    pub fn s_min(&self) -> f64 {
        self.s_nodes[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s_nodes.last().unwrap()
    }

    /// Certified relative round-trip error of the inversion.
    pub fn inversion_error(&self) -> f64 {
        self.inversion_error
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if r < self.r_min() || r > self.r_max() {
            return Err(Error::RangeError {
                support: r,
                lo: self.r_min(),
                hi: self.r_max(),
            });
        }
        Ok(())
    }

    /// `s(r)`; no extrapolation outside the table.
    pub fn s_of_r(&self, r: f64) -> Result<f64> {
        self.check_r(r)?;
        Ok(self.ln_s_of_ln_r.value(r.ln()).exp())
    }

    /// `r(s)` by inverse interpolation polished against the forward map.
    pub fn r_of_s(&self, s: f64) -> Result<f64> {
        if s < self.s_min() || s > self.s_max() {
            return Err(Error::RangeError {
                support: s,
                lo: self.s_min(),
                hi: self.s_max(),
            });
        }
        let guess = self.ln_r_of_ln_s.value(s.ln()).exp();
        let target = s.ln();
        let g = |r: f64| self.ln_s_of_ln_r.value(r.ln()) - target;
        // widen a bracket around the interpolated guess
        let mut lo = (guess * (1.0 - 1e-6)).max(self.r_min());
        let mut hi = (guess * (1.0 + 1e-6)).min(self.r_max());
        let mut tries = 0;
        while g(lo) > 0.0 && lo > self.r_min() {
            lo = (lo * 0.99).max(self.r_min());
            tries += 1;
            if tries > 10_000 {
                break;
            }
        }
        tries = 0;
        while g(hi) < 0.0 && hi < self.r_max() {
            hi = (hi * 1.01).min(self.r_max());
            tries += 1;
            if tries > 10_000 {
                break;
            }
        }
        find_root(g, lo, hi, 1e-14 * guess).map_err(|e| match e {
            // flat numeric noise near the guess still identifies the root
            Error::NoSignChange { .. } => Error::InversionFailure {
                v: s,
                max: self.s_max(),
            },
            other => other,
        })
    }

    /// Density deficit `rho(s) = psi(r(s))/s`.
    pub fn rho_of_s(&self, s: f64) -> Result<f64> {
        let r = self.r_of_s(s)?;
        Ok(self.manifold.psi(r) / s)
    }

    /// `rho` at a table node, quadrature-exact.
    pub fn rho_at_node(&self, i: usize) -> f64 {
        self.manifold.psi(self.r_nodes[i]) / self.s_nodes[i]
    }

    /// CSV export: one row per node with the quantities every proof uses.
    pub fn to_csv(&self) -> Result<String> {
        let n = self.manifold.dimension();
        let area = crate::manifold::unit_sphere_area(n)?;
        let nf = n as f64;
        let mut rows = Vec::with_capacity(self.r_nodes.len());
        for i in 0..self.r_nodes.len() {
            let r = self.r_nodes[i];
            let s = self.s_nodes[i];
            let v = self.v_nodes[i];
            let rho = self.rho_at_node(i);
            let varrho = (nf * v / area).powf(1.0 / nf);
            let sigma = area * self.manifold.psi(r).powi(n as i32 - 1);
            let sigma_e = area.powf(1.0 / nf) * (nf * v).powf((nf - 1.0) / nf);
            rows.push(vec![r, s, rho, varrho, v, sigma, sigma_e]);
        }
        Ok(csv_table(
            &format!(
                "transform label={} n={} r_range=[{:e},{:e}] inversion_error={:e}",
                self.manifold.label(),
                n,
                self.r_min(),
                self.r_max(),
                self.inversion_error
            ),
            &["r", "s", "rho", "varrho", "v", "Sigma", "Sigma_E"],
            &rows,
        ))
    }
}

/// Push a compactly supported profile through the table: `fhat(s) = f(r(s))`.
///
/// The gradient norm is preserved exactly by the change of variables:
/// `||grad f||_{L2(M)} = ||grad fhat||_{L2(R^n)}`, and `L^p` norms match
/// the weighted norms with weight `rho^{2(n-1)}`. Below the table's first
/// node the map is the identity to within `O(s)` and carries negligible
/// mass, so `fhat(s) = f(s)` is used there.
pub fn pushforward(table: &TransformTable, f: Arc<dyn Profile>) -> Result<FnProfile> {
    let support = f.support_radius().unwrap_or(f64::INFINITY);
    if support > table.r_max() {
        return Err(Error::RangeError {
            support,
            lo: table.r_min(),
            hi: table.r_max(),
        });
    }
    if support <= table.r_min() {
        return Err(Error::RangeError {
            support,
            lo: table.r_min(),
            hi: table.r_max(),
        });
    }
    let s_support = table.s_of_r(support)?;
    let s_lo = table.s_min();
    let nm1 = table.manifold.dimension() as i32 - 1;

    let t_val = Arc::new(table.clone());
    let t_der = Arc::clone(&t_val);
    let f_val = Arc::clone(&f);
    let f_der = Arc::clone(&f);

    let s_kinks: Vec<f64> = f
        .kinks()
        .iter()
        .filter(|&&k| k > table.r_min() && k < support)
        .map(|&k| t_val.s_of_r(k))
        .collect::<Result<_>>()?;

    let value = move |s: f64| -> f64 {
        if s >= s_support {
            0.0
        } else if s <= s_lo {
            f_val.value(s)
        } else {
            match t_val.r_of_s(s) {
                Ok(r) => f_val.value(r),
                Err(_) => 0.0,
            }
        }
    };
    let derivative = move |s: f64| -> f64 {
        if s >= s_support {
            0.0
        } else if s <= s_lo {
            f_der.derivative(s)
        } else {
            match t_der.r_of_s(s) {
                Ok(r) => {
                    let rho = t_der.manifold.psi(r) / s;
                    f_der.derivative(r) * rho.powi(nm1)
                }
                Err(_) => 0.0,
            }
        }
    };
    Ok(FnProfile::new(value, derivative, Some(s_support)).with_kinks(s_kinks))
}

/// Weighted norm `(|S^{n-1}| int |fhat|^p rho(s)^{2(n-1)} s^{n-1} ds)^{1/p}`.
///
/// The weight is extended by `rho = 1` below the table's first node,
/// where the true density tends to 1 and the mass is negligible.
pub fn weighted_lp_norm(
    fhat: &dyn Profile,
    table: &TransformTable,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<FunctionalValue> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("weighted norm needs p >= 1, got {p}")));
    }
    let n = table.manifold.dimension();
    let area = crate::manifold::unit_sphere_area(n)?;
    let nm1 = n as i32 - 1;
    let s_lo = table.s_min();

    let upper = match fhat.support_radius() {
        Some(b) => b.min(table.s_max()),
        None => table.s_max(),
    };
    let mut breaks = fhat.kinks();
    breaks.push(s_lo);

    let q = integrate_with_breaks(
        |s| {
            let w = if s <= s_lo {
                1.0
            } else {
                match table.rho_of_s(s) {
                    Ok(rho) => rho.powi(2 * nm1),
                    Err(_) => return f64::NAN,
                }
            };
            fhat.value(s).abs().powf(p) * w * s.powi(nm1)
        },
        Domain::Finite(0.0, upper),
        &breaks,
        cfg,
    )?;
    let value = (area * q.value).powf(1.0 / p);
    let err = if q.value > 0.0 {
        value * q.error / (p * q.value)
    } else {
        q.error.powf(1.0 / p)
    };
    Ok(FunctionalValue {
        value,
        quadrature_error: err,
        config_used: cfg.clone(),
    })
}

/// Equal-volume radius `varrho(r) = (n int_0^r psi^{n-1} dt)^{1/n}`,
/// by direct quadrature (no table error).
pub fn equal_volume_radius(m: &ModelManifold, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("equal-volume radius needs r > 0, got {r}")));
    }
    let nm1 = m.dimension() as i32 - 1;
    let warp = m.warp().clone();
    let q = integrate(
        |t| warp.value(t).powi(nm1),
        Domain::Finite(0.0, r),
        cfg,
    )?;
    Ok((m.dimension() as f64 * q.value).powf(1.0 / m.dimension() as f64))
}

/// Radius of the geodesic ball with volume `v`, by bracketing + root
/// polish on the direct volume quadrature.
pub fn radius_of_volume(m: &ModelManifold, v: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("ball volume must be positive, got {v}")));
    }
    const R_CAP: f64 = 1e4;
    let vol = |r: f64| m.volume(r, cfg);
    let mut hi = 1.0;
    while vol(hi)? < v {
        hi *= 2.0;
        if hi > R_CAP {
            return Err(Error::InversionFailure {
                v,
                max: vol(R_CAP)?,
            });
        }
    }
    let g = |r: f64| match m.volume(r, cfg) {
        Ok(w) => w / v - 1.0,
        Err(_) => f64::NAN,
    };
    find_root(g, 1e-12, hi, 1e-13 * hi)
}

/// Surface measures at the volumes of `v_grid`, on the model and in flat
/// space.
pub fn isoperimetric_profiles(
    m: &ModelManifold,
    v_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IsoperimetricPair> {
    if v_grid.is_empty() {
        return Err(Error::Domain("volume grid is empty".into()));
    }
    for w in v_grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("volume grid must be strictly increasing".into()));
        }
    }
    let n = m.dimension();
    let nf = n as f64;
    let area = crate::manifold::unit_sphere_area(n)?;
    let mut sigma = Vec::with_capacity(v_grid.len());
    let mut sigma_e = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let r = radius_of_volume(m, v, cfg)?;
        sigma.push(area * m.psi(r).powi(n as i32 - 1));
        sigma_e.push(area.powf(1.0 / nf) * (nf * v).powf((nf - 1.0) / nf));
    }
    Ok(IsoperimetricPair {
        v: v_grid.to_vec(),
        sigma,
        sigma_e,
    })
}
