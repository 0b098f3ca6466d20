//! Rotationally symmetric model geometries `dr^2 + psi(r)^2 dtheta^2`.

pub mod expr;

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, Domain, QuadratureConfig};
use crate::numerics::CubicHermite;
use crate::report::ValidationReport;

/// Warping function of a model metric.
///
/// Implementations must satisfy `value(0) = 0`, `value(r) > 0` for `r > 0`,
/// and `first_derivative(0) = 1`; convexity is what makes the model
/// Cartan-Hadamard, and [`ModelManifold::validate`] checks all of it.
pub trait Warp: std::fmt::Debug + Send + Sync {
    fn value(&self, r: f64) -> f64;
    fn first_derivative(&self, r: f64) -> f64;
    fn second_derivative(&self, r: f64) -> f64;

    /// Registry name of the concrete kind.
    fn kind_name(&self) -> &str;

    /// Closed form for the tail integral `int_r^infty psi(t)^{1-n} dt`,
    /// when the warp has one. `None` falls back to quadrature.
    fn closed_tail(&self, _n: u32, _r: f64) -> Option<f64> {
        None
    }

    /// True when `second_derivative` comes from differentiating an
    /// interpolant rather than an analytic formula. Consumers relax
    /// curvature-based tolerances accordingly.
    fn second_derivative_low_accuracy(&self) -> bool {
        false
    }
}

/// Flat space: `psi(r) = r`.
#[derive(Debug, Clone, Copy)]
pub struct EuclideanWarp;

impl Warp for EuclideanWarp {
    fn value(&self, r: f64) -> f64 {
        r
    }
    fn first_derivative(&self, _r: f64) -> f64 {
        1.0
    }
    fn second_derivative(&self, _r: f64) -> f64 {
        0.0
    }
    fn kind_name(&self) -> &str {
        "euclidean"
    }
    fn closed_tail(&self, n: u32, r: f64) -> Option<f64> {
        // int_r^infty t^{1-n} dt = r^{2-n} / (n-2)
        if n < 3 || r <= 0.0 {
            return None;
        }
        Some(r.powi(2 - n as i32) / (n as f64 - 2.0))
    }
}

/// Constant curvature `-k`: `psi(r) = sinh(sqrt(k) r) / sqrt(k)`.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicWarp {
    k: f64,
}

impl HyperbolicWarp {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain(format!(
                "hyperbolic warp needs curvature magnitude k > 0, got {k}"
            )));
        }
        Ok(HyperbolicWarp { k })
    }

    pub fn curvature_magnitude(&self) -> f64 {
        self.k
    }
}

impl Warp for HyperbolicWarp {
    fn value(&self, r: f64) -> f64 {
        let sk = self.k.sqrt();
        (sk * r).sinh() / sk
    }
    fn first_derivative(&self, r: f64) -> f64 {
        (self.k.sqrt() * r).cosh()
    }
    fn second_derivative(&self, r: f64) -> f64 {
        let sk = self.k.sqrt();
        sk * (sk * r).sinh()
    }
    fn kind_name(&self) -> &str {
        "hyperbolic"
    }
    fn closed_tail(&self, n: u32, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return None;
        }
        let sk = self.k.sqrt();
        let x = sk * r;
        match n {
            3 => {
                // psi^{-2} = k csch^2(sqrt(k) t); integral = sqrt(k)(coth x - 1),
                // written as 2 e^{-2x} / (1 - e^{-2x}) so it survives large x
                Some(sk * 2.0 * (-2.0 * x).exp() / -(-2.0 * x).exp_m1())
            }
            4 => {
                // psi^{-3} = k^{3/2} csch^3(sqrt(k) t)
                if x < 1.0 {
                    // -(1/2)(csch coth + ln tanh(x/2)); no cancellation here
                    let csch = 1.0 / x.sinh();
                    let coth = 1.0 / x.tanh();
                    Some(self.k * 0.5 * (csch * coth + (0.5 * x).tanh().ln()))
                } else {
                    // the closed form cancels to O(e^{-3x}) between O(e^{-x})
                    // terms; expand csch^3 = 8 e^{-3u} (1-e^{-2u})^{-3} and
                    // integrate termwise instead
                    let q = (-2.0 * x).exp();
                    let mut sum = 0.0;
                    let mut pow = (-3.0 * x).exp();
                    let mut j = 0u32;
                    loop {
                        let jf = j as f64;
                        let term = 4.0 * (jf + 1.0) * (jf + 2.0) * pow / (3.0 + 2.0 * jf);
                        sum += term;
                        if term <= 1e-18 * sum || j > 400 {
                            break;
                        }
                        pow *= q;
                        j += 1;
                    }
                    Some(self.k * sum)
                }
            }
            _ => None,
        }
    }
}

/// Warp defined by samples `(r_i, psi_i)` on a strictly increasing grid,
/// interpolated with a monotone cubic and extended linearly past the last
/// node. The grid must start at `r = 0` with `psi = 0`.
#[derive(Debug, Clone)]
pub struct GridWarp {
    spline: CubicHermite,
}

impl GridWarp {
    pub fn from_samples(rs: &[f64], psis: &[f64]) -> Result<Self> {
        if rs.len() < 4 {
            return Err(Error::Domain(format!(
                "grid warp needs at least 4 samples, got {}",
                rs.len()
            )));
        }
        if rs[0] != 0.0 || psis[0] != 0.0 {
            return Err(Error::Domain(
                "grid warp samples must start at (0, 0)".into(),
            ));
        }
        for (i, &p) in psis.iter().enumerate().skip(1) {
            if !(p > 0.0) {
                return Err(Error::Domain(format!(
                    "grid warp needs psi > 0 away from the origin, got {} at r = {}",
                    p, rs[i]
                )));
            }
        }
        let spline = CubicHermite::pchip(rs.to_vec(), psis.to_vec())?;
        Ok(GridWarp { spline })
    }

    /// Sample abscissae, exposed so validation grids can reuse them.
    pub fn sample_nodes(&self) -> &[f64] {
        self.spline.nodes()
    }
}

impl Warp for GridWarp {
    fn value(&self, r: f64) -> f64 {
        self.spline.value(r)
    }
    fn first_derivative(&self, r: f64) -> f64 {
        self.spline.derivative(r)
    }
    fn second_derivative(&self, r: f64) -> f64 {
        self.spline.second_derivative(r)
    }
    fn kind_name(&self) -> &str {
        "grid"
    }
    fn second_derivative_low_accuracy(&self) -> bool {
        true
    }
}

/// Area of the unit sphere `S^{n-1}`: `2 pi^{n/2} / Gamma(n/2)`.
///
/// `Gamma` at integer and half-integer arguments comes from the recurrence
/// seeded with `Gamma(1) = 1`, `Gamma(1/2) = sqrt(pi)`, so the result is
/// exact to rounding without a general gamma implementation.
pub fn unit_sphere_area(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {n}")));
    }
    // Gamma(n/2) by recurrence Gamma(x+1) = x Gamma(x).
    let mut gamma = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x + 0.5 < n as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    Ok(2.0 * PI.powf(n as f64 / 2.0) / gamma)
}

/// An `n`-dimensional model geometry with a named warp.
#[derive(Debug, Clone)]
pub struct ModelManifold {
    n: u32,
    psi: Arc<dyn Warp>,
    label: String,
}

impl ModelManifold {
    pub fn new(n: u32, psi: Arc<dyn Warp>, label: impl Into<String>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!(
                "Sobolev exponent 2n/(n-2) needs dimension n >= 3, got {n}"
            )));
        }
        Ok(ModelManifold {
            n,
            psi,
            label: label.into(),
        })
    }

    pub fn euclidean(n: u32) -> Result<Self> {
        Self::new(n, Arc::new(EuclideanWarp), format!("euclidean-{n}"))
    }

    pub fn hyperbolic(n: u32, k: f64) -> Result<Self> {
        Self::new(
            n,
            Arc::new(HyperbolicWarp::new(k)?),
            format!("hyperbolic-{n}-k{k}"),
        )
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn warp(&self) -> &Arc<dyn Warp> {
        &self.psi
    }

    /// Critical Sobolev exponent `2n / (n - 2)`.
    pub fn critical_exponent(&self) -> f64 {
        2.0 * self.n as f64 / (self.n as f64 - 2.0)
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.psi.value(r)
    }

    pub fn psi_prime(&self, r: f64) -> f64 {
        self.psi.first_derivative(r)
    }

    /// Radial area density `psi(r)^{n-1}`.
    pub fn area_density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "area density is defined for r > 0, got {r}"
            )));
        }
        Ok(self.psi.value(r).powi(self.n as i32 - 1))
    }

    /// Laplacian of the distance function: `(n-1) psi'(r) / psi(r)`.
    pub fn distance_laplacian(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "distance Laplacian is defined for r > 0, got {r}"
            )));
        }
        Ok((self.n as f64 - 1.0) * self.psi.first_derivative(r) / self.psi.value(r))
    }

    /// Sectional curvature of planes containing the radial direction:
    /// `-psi''(r) / psi(r)`.
    pub fn radial_sectional_curvature(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!(
                "radial curvature is defined for r > 0, got {r}"
            )));
        }
        Ok(-self.psi.second_derivative(r) / self.psi.value(r))
    }

    /// Measure of the geodesic sphere of radius `r`:
    /// `|S^{n-1}| psi(r)^{n-1}`.
    pub fn sphere_measure(&self, r: f64) -> Result<f64> {
        Ok(unit_sphere_area(self.n)? * self.area_density(r)?)
    }

    /// Volume of the geodesic ball of radius `r`:
    /// `|S^{n-1}| int_0^r psi^{n-1}`.
    pub fn volume(&self, r: f64, cfg: &QuadratureConfig) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("ball volume needs r > 0, got {r}")));
        }
        let nm1 = self.n as i32 - 1;
        let psi = Arc::clone(&self.psi);
        let q = integrate(
            |t| psi.value(t).powi(nm1),
            Domain::Finite(0.0, r),
            cfg,
        )?;
        Ok(unit_sphere_area(self.n)? * q.value)
    }

    /// Check the model-class conditions and flat-space comparisons on a
    /// grid of radii.
    ///
    /// Class conditions: `psi > 0`, unit slope at the origin (via
    /// `psi(r)/r` at the smallest grid point), convexity up to `ch_tol`.
    /// Comparisons: `psi >= r`, `psi' >= 1`, `m >= (n-1)/r`,
    /// `A >= r^{n-1}`, each up to a fixed rounding allowance. Failures
    /// are recorded in the report, never thrown. Grid-sampled warps get
    /// a relaxed convexity tolerance because their second derivative is
    /// interpolated.
    pub fn validate(&self, grid: &[f64], ch_tol: f64) -> Result<ValidationReport> {
        if grid.is_empty() {
            return Err(Error::Domain("validation grid is empty".into()));
        }
        let mut sorted = grid.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if !(sorted[0] > 0.0) {
            return Err(Error::Domain(format!(
                "validation grid must be strictly positive, got {}",
                sorted[0]
            )));
        }

        let eff_tol = if self.psi.second_derivative_low_accuracy() {
            ch_tol.max(1e-6)
        } else {
            ch_tol
        };
        // rounding slack for the comparison inequalities, relative scale
        const CMP_TOL: f64 = 1e-12;

        let mut report = ValidationReport {
            label: self.label.clone(),
            dimension: self.n,
            warp_kind: self.psi.kind_name().to_string(),
            grid_points: sorted.len(),
            positive: true,
            unit_slope_at_origin: true,
            origin_slope_defect: 0.0,
            convex: true,
            min_second_derivative: f64::INFINITY,
            psi_dominates_radius: true,
            min_psi_margin: f64::INFINITY,
            slope_dominates_one: true,
            min_slope_margin: f64::INFINITY,
            laplacian_dominates: true,
            min_laplacian_margin: f64::INFINITY,
            area_dominates: true,
            min_area_margin: f64::INFINITY,
            first_violation_radius: None,
            failed_checks: Vec::new(),
            is_cartan_hadamard: true,
            all_checks_pass: true,
            ch_tol: eff_tol,
        };

        let r0 = sorted[0];
        let slope_defect = (self.psi.value(r0) / r0 - 1.0).abs();
        report.origin_slope_defect = slope_defect;
        if slope_defect > 1e-6 {
            report.unit_slope_at_origin = false;
        }

        let nm1 = self.n as f64 - 1.0;
        let mark = |report: &mut ValidationReport, r: f64| {
            if report.first_violation_radius.is_none() {
                report.first_violation_radius = Some(r);
            }
        };

        for &r in &sorted {
            let v = self.psi.value(r);
            if !(v > 0.0) || !v.is_finite() {
                report.positive = false;
                mark(&mut report, r);
                continue;
            }
            let d = self.psi.first_derivative(r);
            let dd = self.psi.second_derivative(r);

            report.min_second_derivative = report.min_second_derivative.min(dd);
            if dd < -eff_tol {
                report.convex = false;
                mark(&mut report, r);
            }

            let psi_margin = v - r;
            report.min_psi_margin = report.min_psi_margin.min(psi_margin);
            if psi_margin < -CMP_TOL * r.max(1.0) {
                report.psi_dominates_radius = false;
                mark(&mut report, r);
            }

            let slope_margin = d - 1.0;
            report.min_slope_margin = report.min_slope_margin.min(slope_margin);
            if slope_margin < -CMP_TOL {
                report.slope_dominates_one = false;
                mark(&mut report, r);
            }

            let m_margin = nm1 * d / v - nm1 / r;
            report.min_laplacian_margin = report.min_laplacian_margin.min(m_margin);
            if m_margin < -CMP_TOL * (nm1 / r).max(1.0) {
                report.laplacian_dominates = false;
                mark(&mut report, r);
            }

            let area_margin = v.powi(self.n as i32 - 1) - r.powi(self.n as i32 - 1);
            report.min_area_margin = report.min_area_margin.min(area_margin);
            if area_margin < -CMP_TOL * r.powi(self.n as i32 - 1).max(1.0) {
                report.area_dominates = false;
                mark(&mut report, r);
            }
        }

        let checks: [(&str, bool); 7] = [
            ("positivity", report.positive),
            ("unit-slope", report.unit_slope_at_origin),
            ("convexity", report.convex),
            ("psi>=r", report.psi_dominates_radius),
            ("psi'>=1", report.slope_dominates_one),
            ("m>=(n-1)/r", report.laplacian_dominates),
            ("A>=r^(n-1)", report.area_dominates),
        ];
        report.failed_checks = checks
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| name.to_string())
            .collect();
        report.is_cartan_hadamard =
            report.positive && report.unit_slope_at_origin && report.convex;
        report.all_checks_pass = report.failed_checks.is_empty();
        Ok(report)
    }
}
