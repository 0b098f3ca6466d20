//! Serializable result types and deterministic file output.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Outcome of the model-class and comparison checks on a warp.
///
/// `min_*_margin` fields record the worst (smallest) slack seen on the
/// grid; the paired booleans apply the check's tolerance. On flat space
/// every margin is zero to rounding; on hyperbolic models all are
/// strictly positive away from the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub dimension: u32,
    pub warp_kind: String,
    pub grid_points: usize,
    /// psi > 0 away from the origin.
    pub positive: bool,
    /// |psi(r0)/r0 - 1| <= 1e-6 at the smallest grid radius.
    pub unit_slope_at_origin: bool,
    pub origin_slope_defect: f64,
    /// psi'' >= -ch_tol everywhere on the grid.
    pub convex: bool,
    pub min_second_derivative: f64,
    /// psi(r) >= r.
    pub psi_dominates_radius: bool,
    pub min_psi_margin: f64,
    /// psi'(r) >= 1.
    pub slope_dominates_one: bool,
    pub min_slope_margin: f64,
    /// m(r) = (n-1) psi'/psi >= (n-1)/r.
    pub laplacian_dominates: bool,
    pub min_laplacian_margin: f64,
    /// A(r) = psi^{n-1} >= r^{n-1}.
    pub area_dominates: bool,
    pub min_area_margin: f64,
    pub first_violation_radius: Option<f64>,
    /// Names of the checks that failed, empty when everything passed.
    pub failed_checks: Vec<String>,
    /// Class-F conditions plus convexity.
    pub is_cartan_hadamard: bool,
    /// Every check in this report, comparisons included.
    pub all_checks_pass: bool,
    pub ch_tol: f64,
}

/// One point of a quotient-versus-parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientSample {
    pub b: f64,
    pub quotient: f64,
}

/// One point of the flattening profile `rho(s) = psi(r(s)) / s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlatteningSample {
    pub s: f64,
    pub rho: f64,
}

/// One point of the isoperimetric comparison at fixed enclosed volume.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoperimetricSample {
    pub v: f64,
    pub sigma: f64,
    pub sigma_e: f64,
}

/// Combined evidence that a model is, or is not, isometric to flat space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RigidityReport {
    pub label: String,
    pub dimension: u32,
    /// Sobolev quotients of the scale family of flat-space optimizers.
    /// Scales with no finite quotient are listed in `divergent_scales`.
    pub optimizer_quotients: Vec<QuotientSample>,
    /// Scale parameters whose transplanted optimizer has divergent energy
    /// or norm. On curved models this is the expected outcome.
    pub divergent_scales: Vec<f64>,
    /// Quotients of compactly supported truncations, which stay finite on
    /// every model; diagnostic only, not used for the verdict.
    pub truncated_quotients: Vec<QuotientSample>,
    pub flattening: Vec<FlatteningSample>,
    pub isoperimetric: Vec<IsoperimetricSample>,
    /// Reciprocal of the sharp flat-space constant; the infimum the
    /// quotients approach on flat space.
    pub c_e_reference: f64,
    /// Largest relative optimizer-quotient excess over `c_e_reference`.
    pub sup_quotient_deficit: f64,
    /// Largest `1 - rho(s)` over the flattening curve.
    pub sup_flattening_deficit: f64,
    /// Largest `(Sigma - Sigma_E) / Sigma_E` over the volume grid.
    pub sup_isoperimetric_deficit: f64,
    /// `strictly_non_euclidean` or `euclidean_within_tol`.
    pub verdict: String,
    pub tolerance: f64,
}

/// Format a float with enough digits to round-trip exactly.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `content` to `path` atomically (temp file + rename), creating
/// parent directories as needed.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Render rows as CSV: a `#`-prefixed metadata line, a header, then data
/// at full precision. Deterministic for identical inputs.
pub fn csv_table(metadata: &str, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(metadata);
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| full_precision(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
