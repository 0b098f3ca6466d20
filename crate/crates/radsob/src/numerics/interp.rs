//! Piecewise cubic Hermite interpolation.
//!
//! Two slope sources: caller-supplied exact slopes (used by the transform
//! tables, where derivatives are known analytically at the nodes) and
//! shape-preserving PCHIP slopes for grid-backed data.

use crate::error::{Error, Result};

/// Monotone piecewise cubic on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct CubicHermite {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl CubicHermite {
    /// Build from nodes and exact slopes.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, ds: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ys.len() || xs.len() != ds.len() {
            return Err(Error::Domain("need matching xs/ys/ds with at least 2 nodes".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("interpolation nodes must be strictly increasing".into()));
        }
        if xs.iter().chain(ys.iter()).chain(ds.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("interpolation data must be finite".into()));
        }
        Ok(CubicHermite { xs, ys, ds })
    }

    /// Build with shape-preserving slopes (Fritsch-Carlson weighted harmonic
    /// means, three-point one-sided endpoints).
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let ds = pchip_slopes(&xs, &ys)?;
        CubicHermite::with_slopes(xs, ys, ds)
    }

    pub fn min_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn max_x(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    /// Evaluate at `x`; clamps to linear extension outside the grid using the
    /// end slopes.
    pub fn value(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return self.ys[0] + self.ds[0] * (x - self.xs[0]);
        }
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] + self.ds[n - 1] * (x - self.xs[n - 1]);
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ds[0];
        }
        if x >= self.xs[n - 1] {
            return self.ds[n - 1];
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let d00 = (6.0 * t * t - 6.0 * t) / h;
        let d10 = 3.0 * t * t - 4.0 * t + 1.0;
        let d01 = (6.0 * t - 6.0 * t * t) / h;
        let d11 = 3.0 * t * t - 2.0 * t;
        d00 * self.ys[i] + d10 * self.ds[i] + d01 * self.ys[i + 1] + d11 * self.ds[i + 1]
    }

    /// Second derivative of the cubic piece. Discontinuous at the nodes and
    /// only as accurate as the slope data; callers treat it as low-accuracy.
    pub fn second_derivative(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] || x >= self.xs[n - 1] {
            return 0.0;
        }
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let dd00 = (12.0 * t - 6.0) / (h * h);
        let dd10 = (6.0 * t - 4.0) / h;
        let dd01 = (6.0 - 12.0 * t) / (h * h);
        let dd11 = (6.0 * t - 2.0) / h;
        dd00 * self.ys[i] + dd10 * self.ds[i] + dd01 * self.ys[i + 1] + dd11 * self.ds[i + 1]
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// Fritsch-Carlson slopes: monotone data produces a monotone interpolant.
pub fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("sample abscissae must be strictly increasing".into()));
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = ys
        .windows(2)
        .zip(&h)
        .map(|(w, hi)| (w[1] - w[0]) / hi)
        .collect();

    if n == 2 {
        return Ok(vec![delta[0], delta[0]]);
    }

    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    Ok(d)
}

/// Three-point endpoint slope with the standard monotonicity clamps.
fn edge_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() || del0 == 0.0 {
        d = 0.0;
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        d = 3.0 * del0;
    }
    d
}
