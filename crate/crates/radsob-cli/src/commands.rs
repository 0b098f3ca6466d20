//! Subcommand implementations. Each returns the process exit code or a
//! classified failure; all spec construction maps to exit 2 and genuine
//! numerical breakdown to exit 3.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde_json::{json, Value};

use radsob::error::Error;
use radsob::manifold::ModelManifold;
use radsob::numerics::{OdeConfig, QuadratureConfig};
use radsob::profiles::{
    grad_l2_norm, lp_norm, sobolev_quotient, AubinTalenti, Profile, TruncatedAT,
};
use radsob::registry::Registry;
use radsob::report::{csv_table, full_precision, RigidityReport, ValidationReport};
use radsob::transform::{build_transform, schwarz_symmetrize};
use radsob::variational::{rigidity_experiment, RigidityConfig, ShotStatus};

use crate::output::{parse_grid, parse_sweep, Format, Sink};

/// Exit code plus the stderr message.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 64,
            message: message.into(),
        }
    }
}

pub type CmdResult = Result<u8, Failure>;

fn spec_failure(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

/// Computation-phase errors: exit 3 when numerical, 2 otherwise.
fn run_failure(e: Error) -> Failure {
    Failure {
        code: if e.is_numerical() { 3 } else { 2 },
        message: e.to_string(),
    }
}

#[derive(Args)]
pub struct CommonArgs {
    /// Manifold spec file (JSON)
    #[arg(long, value_name = "PATH")]
    manifold: PathBuf,
    /// Output file; stdout when absent
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format; each command has its natural default
    #[arg(long, value_enum, value_name = "FMT")]
    format: Option<Format>,
    /// Relative quadrature tolerance
    #[arg(long, value_name = "X", default_value_t = 1e-10)]
    rel_tol: f64,
}

impl CommonArgs {
    fn quad(&self) -> Result<QuadratureConfig, Failure> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Failure::usage(format!(
                "rel-tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        Ok(QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.rel_tol * 1e-2,
            ..QuadratureConfig::default()
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn sink(&self) -> Sink {
        Sink::new(self.out.clone())
    }
}

fn read_spec(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| spec_failure(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| spec_failure(format!("{}: invalid JSON: {e}", path.display())))
}

fn load_manifold(path: &Path) -> Result<ModelManifold, Failure> {
    let spec = read_spec(path)?;
    Registry::builtin()
        .manifold_from_json(&spec)
        .map_err(|e| spec_failure(format!("{}: {e}", path.display())))
}

fn load_profile(path: &Path, n: u32) -> Result<Arc<dyn Profile>, Failure> {
    let spec = read_spec(path)?;
    Registry::builtin()
        .build_profile(n, &spec)
        .map_err(|e| spec_failure(format!("{}: {e}", path.display())))
}

fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialization");
    text.push('\n');
    text
}

// ---------------------------------------------------------------- validate

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Validation grid "a:b:n" or "a:b:nlog"
    #[arg(long, value_name = "GRID", default_value = "1e-6:50:240log")]
    grid: String,
    /// Convexity slack for spline-reconstructed warps
    #[arg(long, value_name = "X", default_value_t = 1e-10)]
    ch_tol: f64,
}

fn bool_cell(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn validation_csv(r: &ValidationReport) -> String {
    let mut out = format!(
        "# validation label={} n={} warp={} grid_points={} ch_tol={}\n",
        r.label,
        r.dimension,
        r.warp_kind,
        r.grid_points,
        full_precision(r.ch_tol)
    );
    out.push_str("field,value\n");
    let mut push = |k: &str, v: String| {
        out.push_str(k);
        out.push(',');
        out.push_str(&v);
        out.push('\n');
    };
    push("positive", bool_cell(r.positive).into());
    push("unit_slope_at_origin", bool_cell(r.unit_slope_at_origin).into());
    push("origin_slope_defect", full_precision(r.origin_slope_defect));
    push("convex", bool_cell(r.convex).into());
    push("min_second_derivative", full_precision(r.min_second_derivative));
    push("psi_dominates_radius", bool_cell(r.psi_dominates_radius).into());
    push("min_psi_margin", full_precision(r.min_psi_margin));
    push("slope_dominates_one", bool_cell(r.slope_dominates_one).into());
    push("min_slope_margin", full_precision(r.min_slope_margin));
    push("laplacian_dominates", bool_cell(r.laplacian_dominates).into());
    push("min_laplacian_margin", full_precision(r.min_laplacian_margin));
    push("area_dominates", bool_cell(r.area_dominates).into());
    push("min_area_margin", full_precision(r.min_area_margin));
    push(
        "first_violation_radius",
        r.first_violation_radius.map(full_precision).unwrap_or_default(),
    );
    push("failed_checks", r.failed_checks.join(";"));
    push("is_cartan_hadamard", bool_cell(r.is_cartan_hadamard).into());
    push("all_checks_pass", bool_cell(r.all_checks_pass).into());
    out
}

pub fn validate(a: ValidateArgs) -> CmdResult {
    let m = load_manifold(&a.common.manifold)?;
    let grid = parse_grid(&a.grid)?;
    if !(a.ch_tol >= 0.0) {
        return Err(Failure::usage("ch-tol must be nonnegative"));
    }
    let report = m.validate(&grid, a.ch_tol).map_err(run_failure)?;
    let text = match a.common.format_or(Format::Json) {
        Format::Json => json_text(&serde_json::to_value(&report).expect("report to JSON")),
        Format::Csv => validation_csv(&report),
    };
    a.common.sink().write(&text)?;
    Ok(if report.all_checks_pass { 0 } else { 1 })
}

// --------------------------------------------------------------- transform

#[derive(Args)]
pub struct TransformArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Lower edge of the table
    #[arg(long, value_name = "R", default_value_t = 1e-4)]
    r_min: f64,
    /// Upper edge of the table
    #[arg(long, value_name = "R", default_value_t = 40.0)]
    r_max: f64,
}

pub fn transform(a: TransformArgs) -> CmdResult {
    if !(a.r_min > 0.0 && a.r_max > a.r_min) {
        return Err(Failure::usage(format!(
            "need 0 < r-min < r-max, got {} and {}",
            a.r_min, a.r_max
        )));
    }
    let m = load_manifold(&a.common.manifold)?;
    let cfg = a.common.quad()?;
    let table = build_transform(&m, (a.r_min, a.r_max), &cfg).map_err(run_failure)?;
    let text = match a.common.format_or(Format::Csv) {
        Format::Csv => table.to_csv().map_err(run_failure)?,
        Format::Json => {
            let rho: Vec<f64> = (0..table.r_nodes().len()).map(|i| table.rho_at_node(i)).collect();
            json_text(&json!({
                "label": m.label(),
                "n": m.dimension(),
                "r": table.r_nodes(),
                "s": table.s_nodes(),
                "rho": rho,
                "v": table.volume_nodes(),
                "inversion_error": table.inversion_error(),
            }))
        }
    };
    a.common.sink().write(&text)?;
    Ok(0)
}

// ------------------------------------------------------------------- shoot

#[derive(Args)]
pub struct ShootArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Height of the trajectory at the origin
    #[arg(long, value_name = "C", default_value_t = 1.0)]
    height: f64,
    /// Integration range
    #[arg(long, value_name = "R", default_value_t = 10.0)]
    r_max: f64,
    /// Output sampling grid; defaults to 200 linear points over the run
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,
}

fn status_text(s: &ShotStatus) -> String {
    match s {
        ShotStatus::Decayed => "decayed".into(),
        ShotStatus::CrossedZero(r) => format!("crossed_zero r={}", full_precision(*r)),
        ShotStatus::Diverged(r) => format!("diverged r={}", full_precision(*r)),
        ShotStatus::MaxedOut => "maxed_out".into(),
    }
}

fn status_json(s: &ShotStatus) -> Value {
    match s {
        ShotStatus::Decayed => json!({"kind": "decayed"}),
        ShotStatus::CrossedZero(r) => json!({"kind": "crossed_zero", "r": r}),
        ShotStatus::Diverged(r) => json!({"kind": "diverged", "r": r}),
        ShotStatus::MaxedOut => json!({"kind": "maxed_out"}),
    }
}

pub fn shoot(a: ShootArgs) -> CmdResult {
    if !(a.height > 0.0) {
        return Err(Failure::usage("height must be positive"));
    }
    let m = load_manifold(&a.common.manifold)?;
    let quad = a.common.quad()?;
    let ode = OdeConfig {
        rel_tol: a.common.rel_tol,
        ..OdeConfig::default()
    };
    if !(a.r_max > ode.r_start) {
        return Err(Failure::usage(format!(
            "r-max must exceed the origin offset {}",
            ode.r_start
        )));
    }
    let shot =
        radsob::variational::shoot(&m, a.height, a.r_max, &ode, &quad).map_err(run_failure)?;

    let samples: Vec<f64> = match &a.grid {
        Some(text) => parse_grid(text)?
            .into_iter()
            .filter(|&r| r >= shot.r_start && r <= shot.r_end)
            .collect(),
        None => {
            let n = 200;
            (0..n)
                .map(|i| {
                    shot.r_start + (shot.r_end - shot.r_start) * i as f64 / (n - 1) as f64
                })
                .collect()
        }
    };
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&r| vec![r, shot.solution.component(r, 0), shot.solution.component(r, 1)])
        .collect();

    let text = match a.common.format_or(Format::Csv) {
        Format::Csv => csv_table(
            &format!(
                "shoot label={} n={} c={} status={} r_end={} e_grad={} e_pot={} energy_balance={}",
                m.label(),
                m.dimension(),
                full_precision(shot.c),
                status_text(&shot.status),
                full_precision(shot.r_end),
                full_precision(shot.e_grad),
                full_precision(shot.e_pot),
                full_precision(shot.energy_balance)
            ),
            &["r", "u", "du"],
            &rows,
        ),
        Format::Json => {
            let r: Vec<f64> = rows.iter().map(|row| row[0]).collect();
            let u: Vec<f64> = rows.iter().map(|row| row[1]).collect();
            let du: Vec<f64> = rows.iter().map(|row| row[2]).collect();
            json_text(&json!({
                "label": m.label(),
                "n": m.dimension(),
                "c": shot.c,
                "status": status_json(&shot.status),
                "r_end": shot.r_end,
                "e_grad": shot.e_grad,
                "e_pot": shot.e_pot,
                "energy_balance": shot.energy_balance,
                "samples": {"r": r, "u": u, "du": du},
            }))
        }
    };
    a.common.sink().write(&text)?;
    Ok(0)
}

// ---------------------------------------------------------------- quotient

#[derive(Args)]
pub struct QuotientArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Profile spec file (JSON); alternative to a scale sweep
    #[arg(long, value_name = "PATH", conflicts_with_all = ["b_sweep", "eps"])]
    profile: Option<PathBuf>,
    /// Comma-separated bubble scales to sweep
    #[arg(long, value_name = "LIST")]
    b_sweep: Option<String>,
    /// Truncation radius applied to every sweep member
    #[arg(long, value_name = "R")]
    eps: Option<f64>,
}

pub fn quotient(a: QuotientArgs) -> CmdResult {
    let m = load_manifold(&a.common.manifold)?;
    let cfg = a.common.quad()?;
    let n = m.dimension();

    let (rows, kind) = match (&a.profile, &a.b_sweep) {
        (Some(path), None) => {
            let f = load_profile(path, n)?;
            let q = sobolev_quotient(&m, f.as_ref(), &cfg).map_err(run_failure)?;
            (
                vec![vec![q.value, q.quadrature_error]],
                f.kind_name().to_string(),
            )
        }
        (None, Some(list)) => {
            let sweep = parse_sweep(list)?;
            if let Some(eps) = a.eps {
                if !(eps > 0.0) {
                    return Err(Failure::usage("eps must be positive"));
                }
            }
            let mut rows = Vec::with_capacity(sweep.len());
            for &b in &sweep {
                let f: Arc<dyn Profile> = match a.eps {
                    Some(eps) => Arc::new(
                        TruncatedAT::new(n, b, eps)
                            .map_err(|e| spec_failure(e.to_string()))?,
                    ),
                    None => Arc::new(
                        AubinTalenti::new(n, b).map_err(|e| spec_failure(e.to_string()))?,
                    ),
                };
                let q = sobolev_quotient(&m, f.as_ref(), &cfg).map_err(run_failure)?;
                rows.push(vec![b, q.value, q.quadrature_error]);
            }
            let kind = if a.eps.is_some() { "truncated" } else { "aubin_talenti" };
            (rows, kind.to_string())
        }
        _ => {
            return Err(Failure::usage(
                "pass exactly one of --profile or --b-sweep",
            ))
        }
    };

    let sweep_mode = a.b_sweep.is_some();
    let text = match a.common.format_or(Format::Csv) {
        Format::Csv => {
            let meta = format!("quotient label={} n={} profile={kind}", m.label(), n);
            let header: &[&str] = if sweep_mode {
                &["b", "quotient", "quadrature_error"]
            } else {
                &["quotient", "quadrature_error"]
            };
            csv_table(&meta, header, &rows)
        }
        Format::Json => {
            let body = if sweep_mode {
                let entries: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        json!({"b": row[0], "quotient": row[1], "quadrature_error": row[2]})
                    })
                    .collect();
                json!({"label": m.label(), "n": n, "profile": kind, "sweep": entries})
            } else {
                json!({
                    "label": m.label(),
                    "n": n,
                    "profile": kind,
                    "quotient": rows[0][0],
                    "quadrature_error": rows[0][1],
                })
            };
            json_text(&body)
        }
    };
    a.common.sink().write(&text)?;
    Ok(0)
}

// -------------------------------------------------------------- symmetrize

#[derive(Args)]
pub struct SymmetrizeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Profile spec file (JSON); must be strictly decreasing
    #[arg(long, value_name = "PATH")]
    profile: PathBuf,
    /// Output sampling grid; defaults to 200 linear points on the support
    #[arg(long, value_name = "GRID")]
    grid: Option<String>,
}

pub fn symmetrize(a: SymmetrizeArgs) -> CmdResult {
    let m = load_manifold(&a.common.manifold)?;
    let cfg = a.common.quad()?;
    let f = load_profile(&a.profile, m.dimension())?;
    let flat = ModelManifold::euclidean(m.dimension()).map_err(run_failure)?;
    let sym = schwarz_symmetrize(&m, f.clone(), &cfg).map_err(run_failure)?;

    let l2_native = lp_norm(&m, f.as_ref(), 2.0, &cfg).map_err(run_failure)?.value;
    let l2_flat = lp_norm(&flat, &sym, 2.0, &cfg).map_err(run_failure)?.value;
    let grad_native = grad_l2_norm(&m, f.as_ref(), &cfg).map_err(run_failure)?.value;
    let grad_flat = grad_l2_norm(&flat, &sym, &cfg).map_err(run_failure)?.value;

    let upper = f.support_radius().unwrap_or(40.0);
    let samples = match &a.grid {
        Some(text) => parse_grid(text)?,
        None => {
            let n = 200;
            (0..n)
                .map(|i| upper * (i + 1) as f64 / n as f64)
                .collect()
        }
    };
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&r| vec![r, f.value(r), sym.value(r)])
        .collect();

    let text = match a.common.format_or(Format::Csv) {
        Format::Csv => csv_table(
            &format!(
                "symmetrize label={} n={} profile={} l2_native={} l2_flat={} grad_native={} grad_flat={}",
                m.label(),
                m.dimension(),
                f.kind_name(),
                full_precision(l2_native),
                full_precision(l2_flat),
                full_precision(grad_native),
                full_precision(grad_flat)
            ),
            &["r", "f", "f_sym"],
            &rows,
        ),
        Format::Json => {
            let r: Vec<f64> = rows.iter().map(|row| row[0]).collect();
            let fv: Vec<f64> = rows.iter().map(|row| row[1]).collect();
            let sv: Vec<f64> = rows.iter().map(|row| row[2]).collect();
            json_text(&json!({
                "label": m.label(),
                "n": m.dimension(),
                "profile": f.kind_name(),
                "l2_native": l2_native,
                "l2_flat": l2_flat,
                "grad_native": grad_native,
                "grad_flat": grad_flat,
                "samples": {"r": r, "f": fv, "f_sym": sv},
            }))
        }
    };
    a.common.sink().write(&text)?;
    Ok(0)
}

// ---------------------------------------------------------------- rigidity

#[derive(Args)]
pub struct RigidityArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated bubble scales
    #[arg(long, value_name = "LIST", default_value = "1,10,100,1000,10000")]
    b_sweep: String,
    /// Truncation radius for the compact quotient curve
    #[arg(long, value_name = "R", default_value_t = 0.5)]
    eps: f64,
    /// Deficit tolerance for the flat verdict
    #[arg(long, value_name = "X", default_value_t = 1e-8)]
    tolerance: f64,
}

fn rigidity_csv(r: &RigidityReport) -> String {
    let mut out = format!(
        "# rigidity label={} n={} verdict={} c_e_reference={} sup_quotient_deficit={} sup_flattening_deficit={} sup_isoperimetric_deficit={} divergent_scales={} tolerance={}\n",
        r.label,
        r.dimension,
        r.verdict,
        full_precision(r.c_e_reference),
        full_precision(r.sup_quotient_deficit),
        full_precision(r.sup_flattening_deficit),
        full_precision(r.sup_isoperimetric_deficit),
        r.divergent_scales
            .iter()
            .map(|&b| full_precision(b))
            .collect::<Vec<_>>()
            .join(";"),
        full_precision(r.tolerance)
    );
    out.push_str("# curve=optimizer_quotient\nb,quotient\n");
    for q in &r.optimizer_quotients {
        out.push_str(&format!("{},{}\n", full_precision(q.b), full_precision(q.quotient)));
    }
    out.push_str("# curve=truncated_quotient\nb,quotient\n");
    for q in &r.truncated_quotients {
        out.push_str(&format!("{},{}\n", full_precision(q.b), full_precision(q.quotient)));
    }
    out.push_str("# curve=flattening\ns,rho\n");
    for p in &r.flattening {
        out.push_str(&format!("{},{}\n", full_precision(p.s), full_precision(p.rho)));
    }
    out.push_str("# curve=isoperimetric\nv,Sigma,Sigma_E\n");
    for p in &r.isoperimetric {
        out.push_str(&format!(
            "{},{},{}\n",
            full_precision(p.v),
            full_precision(p.sigma),
            full_precision(p.sigma_e)
        ));
    }
    out
}

pub fn rigidity(a: RigidityArgs) -> CmdResult {
    let m = load_manifold(&a.common.manifold)?;
    let sweep = parse_sweep(&a.b_sweep)?;
    if !(a.eps > 0.0) {
        return Err(Failure::usage("eps must be positive"));
    }
    if !(a.tolerance > 0.0) {
        return Err(Failure::usage("tolerance must be positive"));
    }
    let cfg = RigidityConfig {
        eps: a.eps,
        tolerance: a.tolerance,
        quad: a.common.quad()?,
        ..RigidityConfig::default()
    };
    let report = rigidity_experiment(&m, &sweep, &cfg).map_err(|e| {
        let mut f = run_failure(e);
        f.message = format!("rigidity experiment on '{}': {}", m.label(), f.message);
        f
    })?;
    let text = match a.common.format_or(Format::Json) {
        Format::Json => json_text(&serde_json::to_value(&report).expect("report to JSON")),
        Format::Csv => rigidity_csv(&report),
    };
    a.common.sink().write(&text)?;
    Ok(0)
}
