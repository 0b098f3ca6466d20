//! Explicit adaptive Runge-Kutta (Dormand-Prince 5(4)) with a continuous
//! dense-output interpolant and event halting.

use crate::error::{Error, Result};

/// Step-size and accuracy controls for the initial value solver.
#[derive(Debug, Clone)]
pub struct OdeConfig {
    pub rel_tol: f64,
    /// Starting step; `None` selects one from the initial derivative scale.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
    /// Offset from the singular origin where radial integrations start.
    pub r_start: f64,
}

impl Default for OdeConfig {
    fn default() -> Self {
        OdeConfig {
            rel_tol: 1e-10,
            initial_step: None,
            max_steps: 100_000,
            r_start: 1e-6,
        }
    }
}

impl OdeConfig {
    /// Absolute floor of the error scale. The config carries a single
    /// tolerance; decaying components keep stepping thanks to this floor.
    fn abs_floor(&self) -> f64 {
        self.rel_tol * 1e-3
    }
}

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HaltReason {
    /// Reached the requested endpoint.
    Completed,
    /// An event function crossed zero; holds (event index, location).
    Event(usize, f64),
    /// Step budget exhausted; the solution covers what was integrated.
    StepBudget,
}

struct Segment {
    t0: f64,
    h: f64,
    // five interpolation coefficient vectors, laid out per component
    rcont: [Vec<f64>; 5],
}

/// Continuous solution, queryable anywhere on the covered interval.
pub struct DenseSolution {
    dim: usize,
    t_start: f64,
    t_end: f64,
    segments: Vec<Segment>,
}

impl DenseSolution {
    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    fn segment_at(&self, t: f64) -> &Segment {
        let idx = self
            .segments
            .partition_point(|s| s.t0 + s.h < t)
            .min(self.segments.len() - 1);
        &self.segments[idx]
    }

    /// Component `i` of the solution at `t`.
    pub fn component(&self, t: f64, i: usize) -> f64 {
        let seg = self.segment_at(t);
        let theta = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        seg.rcont[0][i]
            + theta
                * (seg.rcont[1][i]
                    + th1 * (seg.rcont[2][i] + theta * (seg.rcont[3][i] + th1 * seg.rcont[4][i])))
    }

    /// Time derivative of component `i`, from the interpolant.
    pub fn derivative_component(&self, t: f64, i: usize) -> f64 {
        let seg = self.segment_at(t);
        let theta = ((t - seg.t0) / seg.h).clamp(0.0, 1.0);
        let c2 = seg.rcont[1][i];
        let c3 = seg.rcont[2][i];
        let c4 = seg.rcont[3][i];
        let c5 = seg.rcont[4][i];
        let dtheta = c2 + (1.0 - 2.0 * theta) * c3 + (2.0 * theta - 3.0 * theta * theta) * c4
            + (2.0 * theta - 6.0 * theta * theta + 4.0 * theta * theta * theta) * c5;
        dtheta / seg.h
    }

    pub fn state(&self, t: f64) -> Vec<f64> {
        (0..self.dim).map(|i| self.component(t, i)).collect()
    }
}

/// Integrate `rhs` from `(t0, y0)` to `t_end`.
///
/// `events` are continuous functions of `(t, y)`; integration halts at the
/// first root of any of them (located on the dense interpolant) and reports
/// which one fired. The solution covers `[t0, halt]`.
pub fn solve_ivp<F>(
    rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    cfg: &OdeConfig,
    events: &[&dyn Fn(f64, &[f64]) -> f64],
) -> Result<(DenseSolution, HaltReason)>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if !(t_end > t0) {
        return Err(Error::Domain(format!("need t_end > t0, got [{t0}, {t_end}]")));
    }
    if !(cfg.rel_tol > 0.0) {
        return Err(Error::Domain("rel_tol must be positive".into()));
    }
    let dim = y0.len();
    let scale = |y: &[f64], out: &mut [f64]| {
        for i in 0..dim {
            out[i] = cfg.abs_floor() + cfg.rel_tol * y[i].abs();
        }
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    rhs(t, &y, &mut k1);
    if k1.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("right-hand side not finite at the initial state".into()));
    }

    let mut h = match cfg.initial_step {
        Some(h0) => h0,
        None => initial_step(&rhs, t, &y, &k1, t_end, cfg),
    };
    h = h.min(t_end - t);

    let mut ev_prev: Vec<f64> = events.iter().map(|e| e(t, &y)).collect();

    let mut segments = Vec::new();
    let mut k = vec![vec![0.0; dim]; 7];
    k[0].copy_from_slice(&k1);
    let mut sc = vec![0.0; dim];
    let mut fac_old: f64 = 1e-4;

    for _step in 0..cfg.max_steps {
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepFailure { r: t });
        }
        let mut yt = vec![0.0; dim];

        // stages
        for i in 0..dim {
            yt[i] = y[i] + h * A21 * k[0][i];
        }
        rhs(t + C2 * h, &yt, &mut k1);
        k[1].copy_from_slice(&k1);
        for i in 0..dim {
            yt[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
        }
        rhs(t + C3 * h, &yt, &mut k1);
        k[2].copy_from_slice(&k1);
        for i in 0..dim {
            yt[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        rhs(t + C4 * h, &yt, &mut k1);
        k[3].copy_from_slice(&k1);
        for i in 0..dim {
            yt[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        rhs(t + C5 * h, &yt, &mut k1);
        k[4].copy_from_slice(&k1);
        for i in 0..dim {
            yt[i] = y[i]
                + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
        }
        rhs(t + h, &yt, &mut k1);
        k[5].copy_from_slice(&k1);
        let mut y_new = vec![0.0; dim];
        for i in 0..dim {
            y_new[i] = y[i]
                + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
        }
        rhs(t + h, &y_new, &mut k1);
        k[6].copy_from_slice(&k1);

        if y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.5;
            continue;
        }

        // embedded error estimate
        scale(&y, &mut sc);
        for i in 0..dim {
            sc[i] = sc[i].max(cfg.abs_floor() + cfg.rel_tol * y_new[i].abs());
        }
        let mut err = 0.0;
        for i in 0..dim {
            let e = h
                * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i]
                    + E7 * k[6][i]);
            err += (e / sc[i]) * (e / sc[i]);
        }
        err = (err / dim as f64).sqrt();

        if err <= 1.0 {
            // accept; build the interpolant for this step
            let mut rcont: [Vec<f64>; 5] = [
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
                vec![0.0; dim],
            ];
            for i in 0..dim {
                let ydiff = y_new[i] - y[i];
                let bspl = h * k[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * k[6][i] - bspl;
                rcont[4][i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                        + D7 * k[6][i]);
            }
            segments.push(Segment { t0: t, h, rcont });

            let t_new = t + h;
            // events: sign change against the previous accepted point
            let ev_now: Vec<f64> = events.iter().map(|e| e(t_new, &y_new)).collect();
            let mut hit: Option<(usize, f64)> = None;
            for (idx, (&g0, &g1)) in ev_prev.iter().zip(&ev_now).enumerate() {
                if g0 == 0.0 {
                    continue;
                }
                if g0.signum() != g1.signum() || g1 == 0.0 {
                    let sol_tmp = DenseSolution {
                        dim,
                        t_start: t0,
                        t_end: t_new,
                        segments,
                    };
                    let te = locate_event(&sol_tmp, events[idx], t, t_new);
                    segments = sol_tmp.segments;
                    if hit.map_or(true, |(_, tb)| te < tb) {
                        hit = Some((idx, te));
                    }
                }
            }
            if let Some((idx, te)) = hit {
                let sol = DenseSolution {
                    dim,
                    t_start: t0,
                    t_end: te,
                    segments,
                };
                return Ok((sol, HaltReason::Event(idx, te)));
            }

            t = t_new;
            y = y_new;
            k.swap(0, 6); // FSAL
            ev_prev = ev_now;

            if t >= t_end - 1e-14 * t_end.abs().max(1.0) {
                let sol = DenseSolution {
                    dim,
                    t_start: t0,
                    t_end: t,
                    segments,
                };
                return Ok((sol, HaltReason::Completed));
            }

            let fac11 = err.powf(0.2 - BETA * 0.75);
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            h = (h / fac).min(t_end - t);
        } else {
            let fac11 = err.powf(0.2 - BETA * 0.75);
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
    if segments.is_empty() {
        return Err(Error::MaxSteps(cfg.max_steps));
    }
    let sol = DenseSolution {
        dim,
        t_start: t0,
        t_end: t,
        segments,
    };
    Ok((sol, HaltReason::StepBudget))
}

/// Bisect an event's root on the dense interpolant.
fn locate_event(sol: &DenseSolution, event: &dyn Fn(f64, &[f64]) -> f64, a: f64, b: f64) -> f64 {
    let ga = event(a, &sol.state(a));
    let mut lo = a;
    let mut hi = b;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = event(mid, &sol.state(mid));
        if gm == 0.0 {
            return mid;
        }
        if gm.signum() == ga.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Step-size guess from the derivative scale (Hairer's HINIT, simplified).
fn initial_step<F>(rhs: &F, t0: f64, y0: &[f64], f0: &[f64], t_end: f64, cfg: &OdeConfig) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let sc: Vec<f64> = y0
        .iter()
        .map(|&yi| cfg.abs_floor() + cfg.rel_tol * yi.abs())
        .collect();
    let d0: f64 = (y0.iter().zip(&sc).map(|(y, s)| (y / s) * (y / s)).sum::<f64>() / dim as f64).sqrt();
    let d1: f64 = (f0.iter().zip(&sc).map(|(f, s)| (f / s) * (f / s)).sum::<f64>() / dim as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(t_end - t0);

    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; dim];
    rhs(t0 + h0, &y1, &mut f1);
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s) * ((a - b) / s))
        .sum::<f64>()
        / dim as f64)
        .sqrt()
        / h0;

    let d_max = d1.max(d2);
    let h1 = if d_max <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d_max).powf(0.2)
    };
    h1.min(100.0 * h0).min(t_end - t0)
}
