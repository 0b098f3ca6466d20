//! Adaptive Gauss-Kronrod quadrature on finite and half-infinite intervals.
//!
//! The kernel is the 7/15 Gauss-Kronrod pair with the QUADPACK error
//! rescaling; panels are refined worst-first. Half-infinite domains are
//! compactified with `r = a + t/(1-t)` after a sampling scan confirms the
//! integrand eventually decays; tails that stay large get `TailDivergent`.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// 15-point Kronrod abscissae on [-1, 1], nonnegative half.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_82,
];

/// 7-point Gauss weights; the Gauss nodes are the odd-index entries of `XGK`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and truncation controls for every integral in the crate.
#[derive(Debug, Clone)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Starting radius for the tail-decay scan on half-infinite domains;
    /// `None` picks one from the lower endpoint.
    pub truncation_radius: Option<f64>,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            truncation_radius: None,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureConfig {
            rel_tol,
            ..QuadratureConfig::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        if let Some(r) = self.truncation_radius {
            if !(r > 0.0) {
                return Err(Error::Domain("truncation_radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Integration domain: an interval, possibly unbounded above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// [a, infinity)
    HalfLine(f64),
}

/// Value with a certified error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

/// QUADPACK error rescaling for one panel.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One G7K15 application on [a, b].
fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();

    for j in 0..7 {
        let abscissa = half * XGK[j];
        let fa = f(center - abscissa);
        let fb = f(center + abscissa);
        fv1[j] = fa;
        fv2[j] = fb;
        let fsum = fa + fb;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (fa.abs() + fb.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_kronrod * half;
    let err = rescale_error((res_kronrod - res_gauss) * half, res_abs * half.abs(), res_asc * half.abs());
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive_finite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    let (v, e) = qk15(f, a, b);
    if !v.is_finite() {
        return Err(Error::Domain(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total_value = v;
    let mut total_error = e;
    let mut subdivisions = 0usize;

    while total_error > cfg.abs_tol.max(cfg.rel_tol * total_value.abs()) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::NonConvergent {
                value: total_value,
                error: total_error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap never empty while error > 0");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at floating point resolution, cannot split further
            return Err(Error::NonConvergent {
                value: total_value,
                error: total_error,
                subdivisions,
            });
        }
        let (vl, el) = qk15(f, worst.a, mid);
        let (vr, er) = qk15(f, mid, worst.b);
        if !(vl.is_finite() && vr.is_finite()) {
            return Err(Error::Domain(format!(
                "integrand not finite inside [{}, {}]",
                worst.a, worst.b
            )));
        }
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: vl,
            error: el,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: vr,
            error: er,
        });
        subdivisions += 1;
    }

    Ok(QuadResult {
        value: total_value,
        error: total_error,
    })
}

/// Find a truncation radius past which the integrand is small and
/// non-increasing on doubling samples. Errors with `TailDivergent` when no
/// such radius exists below the scan cap.
fn truncation_radius<F: Fn(f64) -> f64>(f: &F, a: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let decayed = |r: f64| -> Result<bool> {
        let samples = [f(r), f(2.0 * r), f(4.0 * r)];
        for s in samples {
            if !s.is_finite() {
                return Err(Error::TailDivergent);
            }
        }
        let small = cfg.abs_tol * 1e-2;
        Ok(samples[0].abs() < small
            && samples[1].abs() <= samples[0].abs()
            && samples[2].abs() <= samples[1].abs())
    };

    let mut radius = cfg
        .truncation_radius
        .unwrap_or_else(|| if a > 1.0 { 2.0 * a } else { 1.0 });
    while !decayed(radius)? {
        radius *= 2.0;
        if radius > 1e12 {
            return Err(Error::TailDivergent);
        }
    }
    Ok(radius)
}

/// Integrate `f` over `domain` to the tolerances in `cfg`.
///
/// Half-infinite domains require the integrand to be eventually small and
/// non-increasing on doubling samples; see [`Error::TailDivergent`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, domain: Domain, cfg: &QuadratureConfig) -> Result<QuadResult> {
    cfg.validate()?;
    match domain {
        Domain::Finite(a, b) => {
            if !(a.is_finite() && b.is_finite()) || a >= b {
                return Err(Error::Domain(format!("empty or inverted interval [{a}, {b}]")));
            }
            adaptive_finite(&f, a, b, cfg)
        }
        Domain::HalfLine(a) => {
            if !a.is_finite() {
                return Err(Error::Domain("lower endpoint must be finite".into()));
            }
            // sampling scan: rejects tails that are not eventually small and
            // non-increasing before the compactification integral can stall
            truncation_radius(&f, a.max(f64::MIN_POSITIVE), cfg)?;
            // r = a + t/(1-t) maps (0, 1) onto (a, infinity); the Kronrod
            // nodes are interior, so neither endpoint is ever evaluated
            let g = |t: f64| {
                let omt = 1.0 - t;
                let fr = f(a + t / omt);
                if fr == 0.0 {
                    0.0
                } else {
                    fr / (omt * omt)
                }
            };
            adaptive_finite(&g, 0.0, 1.0, cfg)
        }
    }
}

/// Integrate with forced panel breaks at the interior points in `breaks`
/// (derivative kinks, truncation edges). Breaks outside the domain are
/// ignored.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    domain: Domain,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<QuadResult> {
    cfg.validate()?;
    let (a, b_opt) = match domain {
        Domain::Finite(a, b) => (a, Some(b)),
        Domain::HalfLine(a) => (a, None),
    };
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && b_opt.map_or(true, |b| x < b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = a;
    for cut in cuts {
        let piece = integrate(&f, Domain::Finite(lo, cut), cfg)?;
        value += piece.value;
        error += piece.error;
        lo = cut;
    }
    let last = match b_opt {
        Some(b) => integrate(&f, Domain::Finite(lo, b), cfg)?,
        None => integrate(&f, Domain::HalfLine(lo), cfg)?,
    };
    Ok(QuadResult {
        value: value + last.value,
        error: error + last.error,
    })
}
