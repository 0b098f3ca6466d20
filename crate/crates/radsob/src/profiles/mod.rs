//! Radial test functions and their Sobolev functionals.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::manifold::{unit_sphere_area, ModelManifold};
use crate::numerics::quad::{integrate_with_breaks, Domain, QuadratureConfig};
use crate::numerics::CubicHermite;

/// A radial function `f(r)`, `r >= 0`.
pub trait Profile: std::fmt::Debug + Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;

    /// Analytic second derivative where available; residual checks
    /// require it.
    fn second_derivative(&self, _r: f64) -> Option<f64> {
        None
    }

    /// `None` means the support is all of `[0, infinity)`.
    fn support_radius(&self) -> Option<f64>;

    /// Power `a` such that `f(r) ~ r^{-a}` at infinity, when known.
    fn decay_exponent_hint(&self) -> Option<f64> {
        None
    }

    fn kind_name(&self) -> &str;

    /// Radii where the profile is continuous but not C^2; quadratures
    /// split panels there.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The flat-space optimizer family `(1 + b r^2)^{-(n-2)/2}`, normalized
/// to `f(0) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct AubinTalenti {
    n: u32,
    b: f64,
}

impl AubinTalenti {
    pub fn new(n: u32, b: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("optimizer family needs n >= 3, got {n}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Domain(format!("scale parameter must satisfy b > 0, got {b}")));
        }
        Ok(AubinTalenti { n, b })
    }

    pub fn scale(&self) -> f64 {
        self.b
    }
}

impl Profile for AubinTalenti {
    fn value(&self, r: f64) -> f64 {
        let q = 1.0 + self.b * r * r;
        q.powf(-(self.n as f64 - 2.0) / 2.0)
    }

    fn derivative(&self, r: f64) -> f64 {
        let nm2 = self.n as f64 - 2.0;
        let q = 1.0 + self.b * r * r;
        -nm2 * self.b * r * q.powf(-(self.n as f64) / 2.0)
    }

    fn second_derivative(&self, r: f64) -> Option<f64> {
        let n = self.n as f64;
        let q = 1.0 + self.b * r * r;
        Some((n - 2.0) * self.b * q.powf(-(n + 2.0) / 2.0) * ((n - 1.0) * self.b * r * r - 1.0))
    }

    fn support_radius(&self) -> Option<f64> {
        None
    }

    fn decay_exponent_hint(&self) -> Option<f64> {
        Some(self.n as f64 - 2.0)
    }

    fn kind_name(&self) -> &str {
        "aubin_talenti"
    }
}

/// Truncation `(f_b(r) - f_b(eps))_+`: supported in `[0, eps]`, continuous,
/// with a derivative kink at `r = eps`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedAT {
    inner: AubinTalenti,
    eps: f64,
    shift: f64,
}

impl TruncatedAT {
    pub fn new(n: u32, b: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!(
                "truncation radius must satisfy eps > 0, got {eps}"
            )));
        }
        let inner = AubinTalenti::new(n, b)?;
        let shift = inner.value(eps);
        Ok(TruncatedAT { inner, eps, shift })
    }

    pub fn truncation_radius(&self) -> f64 {
        self.eps
    }
}

impl Profile for TruncatedAT {
    fn value(&self, r: f64) -> f64 {
        if r >= self.eps {
            0.0
        } else {
            self.inner.value(r) - self.shift
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        if r >= self.eps {
            0.0
        } else {
            self.inner.derivative(r)
        }
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.eps)
    }

    fn kind_name(&self) -> &str {
        "truncated_at"
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.eps]
    }
}

/// Profile from samples `(r_i, f_i)`, interpolated with a monotone cubic.
/// The samples must start at `r = 0` and end at `f = 0`; the profile
/// vanishes beyond the last node.
#[derive(Debug, Clone)]
pub struct GridProfile {
    spline: CubicHermite,
    support: f64,
}

impl GridProfile {
    pub fn from_samples(rs: &[f64], fs: &[f64]) -> Result<Self> {
        if rs.len() < 4 {
            return Err(Error::Domain(format!(
                "grid profile needs at least 4 samples, got {}",
                rs.len()
            )));
        }
        if rs[0] != 0.0 {
            return Err(Error::Domain("grid profile samples must start at r = 0".into()));
        }
        let last = *fs.last().unwrap();
        if last != 0.0 {
            return Err(Error::Domain(format!(
                "grid profile samples must end at f = 0 (compact support), got {last}"
            )));
        }
        let spline = CubicHermite::pchip(rs.to_vec(), fs.to_vec())?;
        let support = *rs.last().unwrap();
        Ok(GridProfile { spline, support })
    }
}

impl Profile for GridProfile {
    fn value(&self, r: f64) -> f64 {
        if r >= self.support {
            0.0
        } else {
            self.spline.value(r)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        if r >= self.support {
            0.0
        } else {
            self.spline.derivative(r)
        }
    }

    fn support_radius(&self) -> Option<f64> {
        Some(self.support)
    }

    fn kind_name(&self) -> &str {
        "grid"
    }

    fn kinks(&self) -> Vec<f64> {
        // C^1 across nodes but only piecewise C^2; panel breaks help
        self.spline.nodes().to_vec()
    }
}

/// Profile built from closures; the result type of pushforwards and
/// symmetrizations.
pub struct FnProfile {
    value: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Option<f64>,
    decay_hint: Option<f64>,
    kinks: Vec<f64>,
}

impl std::fmt::Debug for FnProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnProfile")
            .field("support", &self.support)
            .field("decay_hint", &self.decay_hint)
            .field("kinks", &self.kinks)
            .finish_non_exhaustive()
    }
}

impl FnProfile {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Option<f64>,
    ) -> Self {
        FnProfile {
            value: Box::new(value),
            derivative: Box::new(derivative),
            support,
            decay_hint: None,
            kinks: Vec::new(),
        }
    }

    pub fn with_kinks(mut self, kinks: Vec<f64>) -> Self {
        self.kinks = kinks;
        self
    }

    pub fn with_decay_hint(mut self, a: f64) -> Self {
        self.decay_hint = Some(a);
        self
    }
}

impl Profile for FnProfile {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        (self.derivative)(r)
    }
    fn support_radius(&self) -> Option<f64> {
        self.support
    }
    fn decay_exponent_hint(&self) -> Option<f64> {
        self.decay_hint
    }
    fn kind_name(&self) -> &str {
        "composed"
    }
    fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// Constructor matching the truncation used throughout: `f_{b,eps}`.
pub fn truncated_at_profile(n: u32, b: f64, eps: f64) -> Result<TruncatedAT> {
    TruncatedAT::new(n, b, eps)
}

/// A quadrature result together with its error estimate.
#[derive(Debug, Clone)]
pub struct FunctionalValue {
    pub value: f64,
    pub quadrature_error: f64,
    pub config_used: QuadratureConfig,
}

fn norm_domain(f: &dyn Profile) -> Domain {
    match f.support_radius() {
        Some(bound) => Domain::Finite(0.0, bound),
        None => Domain::HalfLine(0.0),
    }
}

fn map_tail_error(e: Error, what: &str) -> Error {
    match e {
        Error::TailDivergent => Error::Divergent(format!("{what} has a non-decaying tail")),
        other => other,
    }
}

/// `L^p` norm of `f` on `M`: `(|S^{n-1}| int_0^inf |f|^p psi^{n-1} dr)^{1/p}`.
pub fn lp_norm(m: &ModelManifold, f: &dyn Profile, p: f64, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norm needs p >= 1, got {p}")));
    }
    let nm1 = m.dimension() as i32 - 1;
    let warp = m.warp().clone();
    let q = integrate_with_breaks(
        |r| {
            // underflowed profile values must short-circuit before the warp
            // factor can overflow into 0 * inf
            let v = f.value(r).abs();
            if v == 0.0 {
                return 0.0;
            }
            v.powf(p) * warp.value(r).powi(nm1)
        },
        norm_domain(f),
        &f.kinks(),
        cfg,
    )
    .map_err(|e| map_tail_error(e, "L^p integrand"))?;
    let area = unit_sphere_area(m.dimension())?;
    let value = (area * q.value).powf(1.0 / p);
    // d(x^{1/p}) = x^{1/p} dx / (p x)
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

/// Gradient norm `(|S^{n-1}| int_0^inf |f'|^2 psi^{n-1} dr)^{1/2}`.
pub fn grad_l2_norm(m: &ModelManifold, f: &dyn Profile, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    let nm1 = m.dimension() as i32 - 1;
    let warp = m.warp().clone();
    let q = integrate_with_breaks(
        |r| {
            let d = f.derivative(r);
            if d == 0.0 {
                return 0.0;
            }
            d * d * warp.value(r).powi(nm1)
        },
        norm_domain(f),
        &f.kinks(),
        cfg,
    )
    .map_err(|e| map_tail_error(e, "gradient integrand"))?;
    let area = unit_sphere_area(m.dimension())?;
    let value = (area * q.value).sqrt();
    let err = if q.value > 0.0 {
        value * q.error / (2.0 * q.value)
    } else {
        q.error.sqrt()
    };
    Ok(FunctionalValue {
        value,
        quadrature_error: err,
        config_used: cfg.clone(),
    })
}

/// Rayleigh quotient `||grad f||_2 / ||f||_{2*}` at the critical exponent.
pub fn sobolev_quotient(m: &ModelManifold, f: &dyn Profile, cfg: &QuadratureConfig) -> Result<FunctionalValue> {
    let p = m.critical_exponent();
    let num = grad_l2_norm(m, f, cfg)?;
    let den = lp_norm(m, f, p, cfg)?;
    if den.value == 0.0 {
        return Err(Error::ZeroProfile);
    }
    let value = num.value / den.value;
    let err = value * (num.quadrature_error / num.value.max(f64::MIN_POSITIVE) + den.quadrature_error / den.value);
    Ok(FunctionalValue {
        value,
        quadrature_error: err,
        config_used: cfg.clone(),
    })
}

/// Closed form for the sharp flat-space constant:
/// `pi^{-1/2} (n(n-2))^{-1/2} (Gamma(n)/Gamma(n/2))^{1/n}`.
pub fn talenti_constant(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::Domain(format!("sharp constant needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    // Gamma(n) = (n-1)!
    let mut gamma_n = 1.0;
    for k in 2..n {
        gamma_n *= k as f64;
    }
    // Gamma(n/2) by the half-integer recurrence
    let mut gamma_half = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x + 0.5 < nf / 2.0 {
        gamma_half *= x;
        x += 1.0;
    }
    Ok(std::f64::consts::PI.powf(-0.5)
        * (nf * (nf - 2.0)).powf(-0.5)
        * (gamma_n / gamma_half).powf(1.0 / nf))
}

/// Best constant of the flat-space Sobolev inequality, from quadrature of
/// the optimizer quotient. Falls back to the closed form if quadrature
/// fails; cached per dimension.
pub fn euclidean_best_constant(n: u32) -> Result<f64> {
    static CACHE: OnceLock<Mutex<BTreeMap<u32, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(&v) = cache.lock().unwrap().get(&n) {
        return Ok(v);
    }
    let value = match (|| -> Result<f64> {
        let m = ModelManifold::euclidean(n)?;
        let f = AubinTalenti::new(n, 1.0)?;
        let q = sobolev_quotient(&m, &f, &QuadratureConfig::default())?;
        Ok(1.0 / q.value)
    })() {
        Ok(v) => v,
        Err(_) => talenti_constant(n)?,
    };
    cache.lock().unwrap().insert(n, value);
    Ok(value)
}

/// Slack in the lower eigenvalue bound on pinched-curvature models:
/// `2 / (sqrt(k) (n-1)) - ||f||_2 / ||grad f||_2`.
///
/// Checks the curvature hypothesis `-psi''/psi <= -k` on an internal
/// log grid before evaluating.
pub fn mckean_poincare_margin(
    m: &ModelManifold,
    f: &dyn Profile,
    k: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("curvature bound must satisfy k > 0, got {k}")));
    }
    let lo: f64 = 1e-2;
    let hi: f64 = 30.0;
    let pts = 60;
    for i in 0..pts {
        let t = i as f64 / (pts - 1) as f64;
        let r = lo * (hi / lo).powf(t);
        let curv = m.radial_sectional_curvature(r)?;
        // relative rounding slack; equality holds for constant curvature
        if curv > -k + 1e-10 * k {
            return Err(Error::CurvatureHypothesisFailed { k, r, actual: curv });
        }
    }
    let num = lp_norm(m, f, 2.0, cfg)?;
    let den = grad_l2_norm(m, f, cfg)?;
    if den.value == 0.0 {
        return Err(Error::ZeroProfile);
    }
    let nm1 = m.dimension() as f64 - 1.0;
    Ok(2.0 / (k.sqrt() * nm1) - num.value / den.value)
}
