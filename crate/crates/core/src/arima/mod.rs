//! Univariate ARIMA(p,d,q) models: conditional-sum-of-squares estimation,
//! BIC order selection over a grid, and recursive point forecasts.
//!
//! Model for the d-times differenced series `z`, with `w = z - mu` when an
//! intercept is included (mean for d = 0, drift for d = 1):
//!
//! ```text
//! w_t = phi_1 w_{t-1} + ... + phi_p w_{t-p} + e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}
//! ```

mod optim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use optim::{minimize, BfgsOptions};

/// Order grid searched by [`auto_arima`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArimaGrid {
    pub p_max: usize,
    pub d_max: usize,
    pub q_max: usize,
    /// Also try an intercept (mean or drift) for d <= 1.
    pub allow_drift: bool,
}

impl Default for ArimaGrid {
    fn default() -> Self {
        Self {
            p_max: 3,
            d_max: 2,
            q_max: 3,
            allow_drift: true,
        }
    }
}

impl ArimaGrid {
    /// Grid cells `(p, d, q, drift)` in tie-break order: smaller p+q first,
    /// then smaller d, then smaller p, then without intercept.
    pub fn cells(&self) -> Vec<(usize, usize, usize, bool)> {
        let mut cells = Vec::new();
        for p in 0..=self.p_max {
            for d in 0..=self.d_max {
                for q in 0..=self.q_max {
                    cells.push((p, d, q, false));
                    if self.allow_drift && d <= 1 {
                        cells.push((p, d, q, true));
                    }
                }
            }
        }
        cells.sort_by_key(|&(p, d, q, drift)| (p + q, d, p, drift));
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: Order,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    /// Mean of the differenced series when an intercept term is fitted.
    pub intercept: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub bic: f64,
    /// Length of the undifferenced input series.
    pub n_obs: usize,
}

impl ArimaModel {
    pub fn n_params(&self) -> usize {
        self.order.p + self.order.q + usize::from(self.intercept.is_some()) + 1
    }

    /// Random walk with drift equal to the average increment; used as a
    /// fallback forecaster and for classical Lee-Carter index forecasts.
    pub fn random_walk_drift(series: &[f64]) -> Result<Self> {
        if series.len() < 2 {
            return Err(Error::InsufficientLength {
                needed: 2,
                got: series.len(),
            });
        }
        let z = difference(series, 1);
        let mu = z.iter().sum::<f64>() / z.len() as f64;
        let sse: f64 = z.iter().map(|v| (v - mu).powi(2)).sum();
        let n = z.len();
        let sigma2 = variance_floor(series).max(sse / n as f64);
        let loglik = gaussian_loglik(n, sigma2);
        Ok(ArimaModel {
            order: Order { p: 0, d: 1, q: 0 },
            ar: vec![],
            ma: vec![],
            intercept: Some(mu),
            sigma2,
            loglik,
            bic: -2.0 * loglik + 2.0 * (n as f64).ln(),
            n_obs: series.len(),
        })
    }
}

/// `d`-th order differences.
pub fn difference(x: &[f64], d: usize) -> Vec<f64> {
    let mut out = x.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Inverse of [`difference`]: `heads[j]` is the first value of the series
/// differenced `j` times.
pub fn integrate(z: &[f64], heads: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    for &h in heads.iter().rev() {
        let mut level = Vec::with_capacity(out.len() + 1);
        level.push(h);
        for v in &out {
            let last = *level.last().unwrap();
            level.push(last + v);
        }
        out = level;
    }
    out
}

/// Maps unconstrained values to partial autocorrelations in (-1, 1) and
/// runs the Durbin-Levinson recursion, giving a stationary AR polynomial.
fn pacf_to_coeffs(u: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(u.len());
    for (k, &uk) in u.iter().enumerate() {
        let r = uk.clamp(-6.0, 6.0).tanh();
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Inverse of [`pacf_to_coeffs`]; `None` if the polynomial is not stationary.
fn coeffs_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut u = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let r = cur[k];
        if !(r.abs() < 0.999) {
            return None;
        }
        u[k] = r.atanh();
        let denom = 1.0 - r * r;
        let prev: Vec<f64> = (0..k).map(|j| (cur[j] + r * cur[k - 1 - j]) / denom).collect();
        cur = prev;
    }
    Some(u)
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Lower bound on the innovation variance so that exact fits keep a finite
/// likelihood; relative to the scale of the raw series.
fn variance_floor(series: &[f64]) -> f64 {
    let ms = series.iter().map(|v| v * v).sum::<f64>() / series.len() as f64;
    (1e-30 * ms).max(f64::MIN_POSITIVE)
}

fn gaussian_loglik(n: usize, sigma2: f64) -> f64 {
    -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0)
}

/// Conditional residuals; `e_t = 0` for the first `p` observations.
fn css_residuals(w: &[f64], ar: &[f64], ma: &[f64], e: &mut Vec<f64>) {
    let p = ar.len();
    e.clear();
    e.resize(w.len(), 0.0);
    for t in p..w.len() {
        let mut v = w[t];
        for (i, phi) in ar.iter().enumerate() {
            v -= phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                v -= theta * e[t - 1 - j];
            }
        }
        e[t] = v;
    }
}

struct Params {
    ar: Vec<f64>,
    ma: Vec<f64>,
    mu: f64,
}

fn unpack(x: &[f64], p: usize, q: usize, mean: Option<(f64, f64)>) -> Params {
    let ar = pacf_to_coeffs(&x[..p]);
    let ma = pacf_to_coeffs(&x[p..p + q]).into_iter().map(|v| -v).collect();
    let mu = match mean {
        Some((m, s)) => m + s * x[p + q],
        None => 0.0,
    };
    Params { ar, ma, mu }
}

fn ols_ar(w: &[f64], p: usize) -> Option<Vec<f64>> {
    use nalgebra::{DMatrix, DVector};
    let rows = w.len().checked_sub(p)?;
    if rows <= p {
        return None;
    }
    let x = DMatrix::from_fn(rows, p, |r, c| w[r + p - 1 - c]);
    let y = DVector::from_iterator(rows, w[p..].iter().copied());
    let xtx = x.transpose() * &x;
    let beta = xtx.cholesky()?.solve(&(x.transpose() * y));
    Some(beta.iter().copied().collect())
}

/// Fits ARIMA(p,d,q) by conditional sum of squares. The likelihood is that
/// of the observations after the first `d + p`, given those.
pub fn fit_arima(series: &[f64], p: usize, d: usize, q: usize, drift: bool) -> Result<ArimaModel> {
    fit_conditional(series, p, d, q, drift, d + p)
}

/// As [`fit_arima`], but the likelihood covers only the observations from
/// index `start` on (`start >= d + p`), so models of different orders can be
/// compared on a common sample.
fn fit_conditional(series: &[f64], p: usize, d: usize, q: usize, drift: bool, start: usize) -> Result<ArimaModel> {
    if drift && d > 1 {
        return Err(Error::InvalidOrder {
            p,
            d,
            q,
            reason: "an intercept is only allowed for d <= 1",
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ARIMA input series"));
    }
    let k = p + q + usize::from(drift) + 1;
    let needed = (d + p + q + 3).max(start + k);
    if series.len() < needed {
        return Err(Error::InsufficientLength {
            needed,
            got: series.len(),
        });
    }
    debug_assert!(start >= d + p);
    let z = difference(series, d);
    let n = z.len();
    let first = start - d;
    let n_cond = (n - first) as f64;
    let floor = variance_floor(series);
    let mean = drift.then(|| mean_sd(&z));

    let mut x0 = vec![0.0; p + q + usize::from(drift)];
    if p > 0 {
        let w: Vec<f64> = match mean {
            Some((m, _)) => z.iter().map(|v| v - m).collect(),
            None => z.clone(),
        };
        if let Some(u) = ols_ar(&w, p).and_then(|phi| coeffs_to_pacf(&phi)) {
            x0[..p].copy_from_slice(&u);
        }
    }

    let mut w = vec![0.0; n];
    let mut e = Vec::with_capacity(n);
    let mut sse_at = |x: &[f64]| -> f64 {
        let par = unpack(x, p, q, mean);
        for (wi, zi) in w.iter_mut().zip(&z) {
            *wi = zi - par.mu;
        }
        css_residuals(&w, &par.ar, &par.ma, &mut e);
        e[first..].iter().map(|v| v * v).sum()
    };

    let x_opt = if x0.is_empty() {
        x0
    } else {
        let objective = |x: &[f64]| 0.5 * (sse_at(x) / n_cond).max(floor).ln();
        let opts = BfgsOptions::default();
        let m = minimize(objective, &x0, &opts);
        if !m.converged {
            return Err(Error::Convergence {
                what: "ARIMA likelihood optimization",
                iterations: m.iterations,
            });
        }
        m.x
    };
    let sse = sse_at(&x_opt);
    let par = unpack(&x_opt, p, q, mean);
    let sigma2 = (sse / n_cond).max(floor);
    if !sigma2.is_finite() {
        return Err(Error::NonFinite("ARIMA innovation variance"));
    }
    let loglik = gaussian_loglik(n - first, sigma2);
    Ok(ArimaModel {
        order: Order { p, d, q },
        ar: par.ar,
        ma: par.ma,
        intercept: drift.then_some(par.mu),
        sigma2,
        loglik,
        bic: -2.0 * loglik + k as f64 * (n as f64).ln(),
        n_obs: series.len(),
    })
}

/// Minimum-BIC model over the grid. Every cell is scored on the same
/// observations (all but the first `d_max + p_max`), so differencing does
/// not buy likelihood by shortening the sample. Cells that need more data
/// than the series has or fail to converge are skipped.
pub fn auto_arima(series: &[f64], grid: &ArimaGrid) -> Result<ArimaModel> {
    let start = grid.d_max + grid.p_max;
    // A constant series is fitted exactly by every cell with a mean or a
    // difference, so the likelihoods all sit on the variance floor and only
    // the penalty would separate them. Take the undifferenced mean model.
    if grid.allow_drift && series.len() > 1 && series.iter().all(|v| *v == series[0]) {
        return fit_conditional(series, 0, 0, 0, true, start);
    }
    let mut best: Option<ArimaModel> = None;
    for (p, d, q, drift) in grid.cells() {
        let Ok(model) = fit_conditional(series, p, d, q, drift, start) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some(b) => model.bic < b.bic - 1e-9 * b.bic.abs().max(1.0),
        };
        if better {
            best = Some(model);
        }
    }
    best.ok_or(Error::Selection)
}

/// Point forecasts for steps 1..=h after the end of `series`, which must be
/// the series the model was fitted to (or an extension of it).
pub fn forecast_arima(model: &ArimaModel, series: &[f64], h: usize) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::InvalidHorizon(h));
    }
    let Order { p, d, .. } = model.order;
    if series.len() <= d + p {
        return Err(Error::InsufficientLength {
            needed: d + p + 1,
            got: series.len(),
        });
    }
    let mu = model.intercept.unwrap_or(0.0);
    let z = difference(series, d);
    let mut w: Vec<f64> = z.iter().map(|v| v - mu).collect();
    let mut e = Vec::new();
    css_residuals(&w, &model.ar, &model.ma, &mut e);
    let n = w.len();
    for step in 0..h {
        let t = n + step;
        let mut v = 0.0;
        for (i, phi) in model.ar.iter().enumerate() {
            v += phi * w[t - 1 - i];
        }
        for (j, theta) in model.ma.iter().enumerate() {
            if t > j {
                v += theta * e[t - 1 - j];
            }
        }
        w.push(v);
        e.push(0.0);
    }
    let mut fc: Vec<f64> = w[n..].iter().map(|v| v + mu).collect();

    // Undo the differencing, anchoring each level at its last observed value.
    for level in (0..d).rev() {
        let x = difference(series, level);
        let mut last = *x.last().unwrap();
        for v in fc.iter_mut() {
            last += *v;
            *v = last;
        }
    }
    Ok(fc)
}
