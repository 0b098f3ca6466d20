//! The radial Euler-Lagrange problem at the critical exponent, energy
//! bookkeeping, the heat-kernel supersolution check, and the combined
//! flatness experiment.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::manifold::ModelManifold;
use crate::numerics::ode::{solve_ivp, DenseSolution, HaltReason, OdeConfig};
use crate::numerics::quad::{integrate, Domain, QuadratureConfig};
use crate::profiles::{
    euclidean_best_constant, sobolev_quotient, AubinTalenti, FnProfile, Profile, TruncatedAT,
};
use crate::report::{FlatteningSample, IsoperimetricSample, QuotientSample, RigidityReport};
use crate::transform::{build_transform, isoperimetric_profiles};

/// How a shot trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotStatus {
    /// Positive and decreasing up to the requested radius.
    Decayed,
    /// `u` hit zero at the recorded radius.
    CrossedZero(f64),
    /// `|u|` exceeded the blow-up guard at the recorded radius.
    Diverged(f64),
    /// Step budget ran out before any of the above.
    MaxedOut,
}

/// A shot of `u'' = -m(r) u' - |u|^{2*-2} u` from the regularized origin.
pub struct ShootingResult {
    pub c: f64,
    pub status: ShotStatus,
    pub solution: Arc<DenseSolution>,
    pub r_start: f64,
    /// Where integration actually stopped.
    pub r_end: f64,
    /// `E_grad - E_pot - flux` over `[r_start, r_end]`; the flux term
    /// `|S^{n-1}| [A u u']` makes the identity exact at finite range.
    pub energy_balance: f64,
    pub e_grad: f64,
    pub e_pot: f64,
}

impl ShootingResult {
    /// The trajectory as a profile; derivatives come from the dense
    /// interpolant, so the second derivative is an independent check of
    /// the equation, not a restatement of it.
    pub fn profile(&self) -> FnProfile {
        let sol = Arc::clone(&self.solution);
        let sol2 = Arc::clone(&self.solution);
        FnProfile::new(
            move |r| sol.component(r, 0),
            move |r| sol2.component(r, 1),
            None,
        )
    }

    /// Second derivative of the trajectory from the interpolant of `u'`.
    pub fn second_derivative(&self, r: f64) -> f64 {
        self.solution.derivative_component(r, 1)
    }
}

/// Signed residual `-u'' - m(r) u' - |u|^{2*-2} u` of a profile at `r`.
///
/// Zero for exact solutions; the profile must expose an analytic second
/// derivative.
pub fn el_residual(m: &ModelManifold, u: &dyn Profile, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("residual is defined for r > 0, got {r}")));
    }
    let upp = u.second_derivative(r).ok_or_else(|| {
        Error::Domain("residual check needs a profile with a second derivative".into())
    })?;
    let q = (m.dimension() as f64 + 2.0) / (m.dimension() as f64 - 2.0);
    let val = u.value(r);
    Ok(-upp - m.distance_laplacian(r)? * u.derivative(r) - val.abs().powf(q - 1.0) * val)
}

/// Residual of a dense trajectory at `r`, with `u''` taken from the
/// interpolant derivative.
pub fn el_residual_of_shot(m: &ModelManifold, shot: &ShootingResult, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!("residual is defined for r > 0, got {r}")));
    }
    let q = (m.dimension() as f64 + 2.0) / (m.dimension() as f64 - 2.0);
    let u = shot.solution.component(r, 0);
    let up = shot.solution.component(r, 1);
    let upp = shot.second_derivative(r);
    Ok(-upp - m.distance_laplacian(r)? * up - u.abs().powf(q - 1.0) * u)
}

/// The closed-form decaying solution on flat space with height `c`:
/// `c (1 + c^{4/(n-2)} r^2 / (n(n-2)))^{-(n-2)/2}`.
pub fn euclidean_closed_solution(n: u32, c: f64) -> Result<AnalyticSolution> {
    if n < 3 {
        return Err(Error::Domain(format!("closed solution needs n >= 3, got {n}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("height must be positive, got {c}")));
    }
    Ok(AnalyticSolution { n, c })
}

/// `u_c(r) = c u_1(c^{2/(n-2)} r)` with `u_1 = (1 + r^2/(n(n-2)))^{-(n-2)/2}`.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticSolution {
    n: u32,
    c: f64,
}

impl AnalyticSolution {
    /// Dilation factor: the solution is `c u_1(lambda r)` with
    /// `lambda = c^{2/(n-2)}`.
    pub fn lambda(&self) -> f64 {
        self.c.powf(2.0 / (self.n as f64 - 2.0))
    }
}

impl Profile for AnalyticSolution {
    fn value(&self, r: f64) -> f64 {
        let n = self.n as f64;
        let x = self.lambda() * r;
        self.c * (1.0 + x * x / (n * (n - 2.0))).powf(-(n - 2.0) / 2.0)
    }

    fn derivative(&self, r: f64) -> f64 {
        let n = self.n as f64;
        let lam = self.lambda();
        let x = lam * r;
        let base = 1.0 + x * x / (n * (n - 2.0));
        self.c * lam * (-(n - 2.0)) * (x / (n * (n - 2.0))) * base.powf(-n / 2.0)
    }

    fn second_derivative(&self, r: f64) -> Option<f64> {
        let n = self.n as f64;
        let lam = self.lambda();
        let x = lam * r;
        let nn = n * (n - 2.0);
        let base = 1.0 + x * x / nn;
        let d2_unit = -((n - 2.0) / nn)
            * base.powf(-n / 2.0 - 1.0)
            * (base - n * x * x / nn);
        Some(self.c * lam * lam * d2_unit)
    }

    fn support_radius(&self) -> Option<f64> {
        None
    }

    fn decay_exponent_hint(&self) -> Option<f64> {
        Some(self.n as f64 - 2.0)
    }

    fn kind_name(&self) -> &str {
        "composed"
    }
}

/// Integrate the radial Euler-Lagrange equation from the origin.
///
/// The origin is singular (`m ~ (n-1)/r`), so integration starts at
/// `cfg.r_start` with the second-order series
/// `u = c - c^q r^2/(2n)`, `u' = -c^q r/n`, `q = 2* - 1`.
pub fn shoot(
    m: &ModelManifold,
    c: f64,
    r_max: f64,
    ode_cfg: &OdeConfig,
    quad_cfg: &QuadratureConfig,
) -> Result<ShootingResult> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("initial height must be positive, got {c}")));
    }
    let r_start = ode_cfg.r_start;
    if !(r_start > 0.0) || !(r_max > r_start) {
        return Err(Error::Domain(format!(
            "need 0 < r_start < r_max, got {r_start}, {r_max}"
        )));
    }
    let n = m.dimension() as f64;
    let q = (n + 2.0) / (n - 2.0);
    let u0 = c - c.powf(q) * r_start * r_start / (2.0 * n);
    let w0 = -c.powf(q) * r_start / n;

    let model = m.clone();
    let rhs = move |r: f64, y: &[f64], dy: &mut [f64]| {
        let drift = (n - 1.0) * model.psi_prime(r) / model.psi(r);
        dy[0] = y[1];
        dy[1] = -drift * y[1] - y[0].abs().powf(q - 1.0) * y[0];
    };
    let guard = 1e6 * c.max(1.0);
    let zero_event = |_r: f64, y: &[f64]| y[0];
    let blow_event = move |_r: f64, y: &[f64]| guard - y[0].abs();
    let events: [&dyn Fn(f64, &[f64]) -> f64; 2] = [&zero_event, &blow_event];

    let (solution, halt) = solve_ivp(&rhs, r_start, &[u0, w0], r_max, ode_cfg, &events)?;
    let solution = Arc::new(solution);
    let r_end = solution.t_end();
    let status = match halt {
        HaltReason::Completed => ShotStatus::Decayed,
        HaltReason::Event(0, te) => ShotStatus::CrossedZero(te),
        HaltReason::Event(_, te) => ShotStatus::Diverged(te),
        HaltReason::StepBudget => ShotStatus::MaxedOut,
    };

    // finite-range energy identity with the boundary flux made explicit
    let nm1 = m.dimension() as i32 - 1;
    let area = crate::manifold::unit_sphere_area(m.dimension())?;
    let sol = Arc::clone(&solution);
    let warp = m.warp().clone();
    let e_grad = area
        * integrate(
            |r| {
                let w = sol.component(r, 1);
                w * w * warp.value(r).powi(nm1)
            },
            Domain::Finite(r_start, r_end),
            quad_cfg,
        )?
        .value;
    let sol2 = Arc::clone(&solution);
    let warp2 = m.warp().clone();
    let p_crit = 2.0 * n / (n - 2.0);
    let e_pot = area
        * integrate(
            |r| {
                let u = sol2.component(r, 0);
                u.abs().powf(p_crit) * warp2.value(r).powi(nm1)
            },
            Domain::Finite(r_start, r_end),
            quad_cfg,
        )?
        .value;
    let flux_at = |r: f64| {
        area * m.psi(r).powi(nm1) * solution.component(r, 0) * solution.component(r, 1)
    };
    let flux = flux_at(r_end) - flux_at(r_start);
    let energy_balance = e_grad - e_pot - flux;

    Ok(ShootingResult {
        c,
        status,
        solution,
        r_start,
        r_end,
        energy_balance,
        e_grad,
        e_pot,
    })
}

/// Relative size of the energy defect of a shot: `|balance| / E_grad`.
/// Returns 0 for the degenerate zero-energy case.
pub fn energy_identity_check(shot: &ShootingResult) -> f64 {
    if shot.e_grad == 0.0 {
        return 0.0;
    }
    shot.energy_balance.abs() / shot.e_grad
}

/// The same flux-corrected defect for an arbitrary C^1 profile over
/// `[r_lo, r_hi]`; order one for profiles that do not solve the
/// equation, which is what makes the check discriminating.
pub fn profile_energy_discrepancy(
    m: &ModelManifold,
    f: &dyn Profile,
    r_lo: f64,
    r_hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(r_lo > 0.0) || !(r_hi > r_lo) {
        return Err(Error::Domain(format!(
            "need 0 < r_lo < r_hi, got {r_lo}, {r_hi}"
        )));
    }
    let n = m.dimension() as f64;
    let nm1 = m.dimension() as i32 - 1;
    let area = crate::manifold::unit_sphere_area(m.dimension())?;
    let warp = m.warp().clone();
    let p_crit = 2.0 * n / (n - 2.0);
    let breaks: Vec<f64> = f.kinks();
    let e_grad = area
        * crate::numerics::quad::integrate_with_breaks(
            |r| {
                let d = f.derivative(r);
                d * d * warp.value(r).powi(nm1)
            },
            Domain::Finite(r_lo, r_hi),
            &breaks,
            cfg,
        )?
        .value;
    let e_pot = area
        * crate::numerics::quad::integrate_with_breaks(
            |r| f.value(r).abs().powf(p_crit) * warp.value(r).powi(nm1),
            Domain::Finite(r_lo, r_hi),
            &breaks,
            cfg,
        )?
        .value;
    let flux_at = |r: f64| area * m.psi(r).powi(nm1) * f.value(r) * f.derivative(r);
    let balance = e_grad - e_pot - (flux_at(r_hi) - flux_at(r_lo));
    if e_grad == 0.0 {
        return Ok(0.0);
    }
    Ok(balance.abs() / e_grad)
}

/// The flat-space heat kernel `K_E(r, t) = (4 pi t)^{-n/2} e^{-r^2/4t}`.
pub fn euclidean_heat_kernel(n: u32, r: f64, t: f64) -> f64 {
    (4.0 * PI * t).powf(-(n as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}

/// Minimum over the grid of the supersolution residual
/// `dK/dt - d2K/dr2 - m(r) dK/dr`, each term from its closed form.
///
/// Nonnegative on every convex model because `m(r) >= (n-1)/r`; zero on
/// flat space, where the kernel solves the heat equation exactly.
pub fn heat_supersolution_residual(m: &ModelManifold, grid: &[(f64, f64)]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Domain("heat residual grid is empty".into()));
    }
    let n = m.dimension() as f64;
    let mut min_res = f64::INFINITY;
    for &(r, t) in grid {
        if !(r > 0.0) || !(t > 0.0) {
            return Err(Error::Domain(format!(
                "heat residual needs r > 0 and t > 0, got ({r}, {t})"
            )));
        }
        let kernel = euclidean_heat_kernel(m.dimension(), r, t);
        let a = r * r / (4.0 * t * t);
        let dt = kernel * (a - n / (2.0 * t));
        let drr = kernel * (a - 1.0 / (2.0 * t));
        let dr = -kernel * r / (2.0 * t);
        let res = dt - drr - m.distance_laplacian(r)? * dr;
        min_res = min_res.min(res);
    }
    Ok(min_res)
}

/// Settings for [`rigidity_experiment`].
#[derive(Debug, Clone)]
pub struct RigidityConfig {
    /// Truncation radius for the compactly supported quotient curve.
    pub eps: f64,
    /// Radial range of the transform table.
    pub r_range: (f64, f64),
    /// Volume grid for the isoperimetric curve (log-spaced).
    pub v_range: (f64, f64),
    pub v_points: usize,
    /// Number of flattening samples kept in the report.
    pub flattening_points: usize,
    /// Deficit tolerance for the flat verdict.
    pub tolerance: f64,
    pub quad: QuadratureConfig,
}

impl Default for RigidityConfig {
    fn default() -> Self {
        RigidityConfig {
            eps: 0.5,
            r_range: (1e-6, 40.0),
            v_range: (1e-6, 1e3),
            v_points: 40,
            flattening_points: 48,
            tolerance: 1e-8,
            quad: QuadratureConfig::default(),
        }
    }
}

/// Assemble the three computable flatness deficits and a verdict.
///
/// The verdict is `euclidean_within_tol` only when the optimizer
/// quotients all exist and sit at the sharp constant, the flattening
/// deficit `1 - rho` vanishes, and the isoperimetric gap vanishes, each
/// within the configured tolerance. Scales whose transplanted optimizer
/// has divergent energy are recorded rather than treated as errors; on
/// curved models that divergence is the expected signal.
pub fn rigidity_experiment(
    m: &ModelManifold,
    b_sweep: &[f64],
    cfg: &RigidityConfig,
) -> Result<RigidityReport> {
    if b_sweep.is_empty() {
        return Err(Error::Domain("scale sweep must be nonempty".into()));
    }
    let n = m.dimension();
    let c_e = euclidean_best_constant(n)?;
    let reference = 1.0 / c_e;

    let mut optimizer_quotients = Vec::new();
    let mut divergent_scales = Vec::new();
    let mut truncated_quotients = Vec::new();
    for &b in b_sweep {
        let at = AubinTalenti::new(n, b)?;
        match sobolev_quotient(m, &at, &cfg.quad) {
            Ok(fv) => optimizer_quotients.push(QuotientSample { b, quotient: fv.value }),
            Err(e) if e.is_numerical() => divergent_scales.push(b),
            Err(e) => return Err(e),
        }
        let tr = TruncatedAT::new(n, b, cfg.eps)?;
        match sobolev_quotient(m, &tr, &cfg.quad) {
            Ok(fv) => truncated_quotients.push(QuotientSample { b, quotient: fv.value }),
            Err(e) if e.is_numerical() => {}
            Err(e) => return Err(e),
        }
    }

    let table = build_transform(m, cfg.r_range, &cfg.quad)?;
    let count = table.r_nodes().len();
    let stride = (count / cfg.flattening_points.max(1)).max(1);
    let mut flattening = Vec::new();
    for i in (0..count).step_by(stride) {
        flattening.push(FlatteningSample {
            s: table.s_nodes()[i],
            rho: table.rho_at_node(i),
        });
    }

    let mut v_grid = Vec::with_capacity(cfg.v_points);
    for i in 0..cfg.v_points {
        let t = i as f64 / (cfg.v_points - 1).max(1) as f64;
        v_grid.push(cfg.v_range.0 * (cfg.v_range.1 / cfg.v_range.0).powf(t));
    }
    let iso = isoperimetric_profiles(m, &v_grid, &cfg.quad)?;
    let isoperimetric: Vec<IsoperimetricSample> = iso
        .v
        .iter()
        .zip(iso.sigma.iter().zip(&iso.sigma_e))
        .map(|(&v, (&sigma, &sigma_e))| IsoperimetricSample { v, sigma, sigma_e })
        .collect();

    let sup_quotient_deficit = optimizer_quotients
        .iter()
        .map(|qs| (qs.quotient - reference).abs() / reference)
        .fold(0.0f64, f64::max);
    let sup_flattening_deficit = flattening
        .iter()
        .map(|fs| 1.0 - fs.rho)
        .fold(0.0f64, f64::max);
    let sup_isoperimetric_deficit = isoperimetric
        .iter()
        .map(|is| (is.sigma - is.sigma_e) / is.sigma_e)
        .fold(0.0f64, f64::max);

    let flat = divergent_scales.is_empty()
        && sup_quotient_deficit <= cfg.tolerance
        && sup_flattening_deficit <= cfg.tolerance
        && sup_isoperimetric_deficit <= cfg.tolerance;

    Ok(RigidityReport {
        label: m.label().to_string(),
        dimension: n,
        optimizer_quotients,
        divergent_scales,
        truncated_quotients,
        flattening,
        isoperimetric,
        c_e_reference: reference,
        sup_quotient_deficit,
        sup_flattening_deficit,
        sup_isoperimetric_deficit,
        verdict: if flat {
            "euclidean_within_tol".to_string()
        } else {
            "strictly_non_euclidean".to_string()
        },
        tolerance: cfg.tolerance,
    })
}
