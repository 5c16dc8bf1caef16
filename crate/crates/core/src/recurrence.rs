//! Forward solution of the three-term recurrence in two equivalent forms.
//!
//! Form `Eq1` is the expanded self-adjoint equation
//! `-a_n y_{n+1} - a_{n-1} y_{n-1} + (b_n + a_n + a_{n-1}) y_n = λ y_n`;
//! form `Eq2` flips the off-diagonal signs (the Jacobi-matrix convention)
//! and is related to `Eq1` by the gauge `y_n -> (-1)^n y_n`, which leaves
//! `|y_n|` and all spectra unchanged.
//!
//! Solutions may grow like `e^{c n}`, far beyond `f64` range, so values are
//! stored as a mantissa/log-scale pair `y_n = m_n * exp(s_n)`. Rescaling
//! divides the running pair by a power of two (exact in binary floating
//! point), so the reconstructed `log|y_n|` is independent of the rescale
//! period to near machine precision.

use crate::coeffs::{CoefficientError, CoefficientModel};
use thiserror::Error;

/// Mantissas are renormalized whenever they exceed this cap, in addition to
/// the periodic renormalization every `rescale_period` steps.
pub const RESCALE_CAP: f64 = 1e100;

/// Default renormalization period for the convenience entry points.
pub const DEFAULT_RESCALE_PERIOD: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RecurrenceError {
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error("recurrence breakdown at site {site}: {reason}")]
    Breakdown { site: i64, reason: String },
    #[error("window [{lo}, {hi}] is degenerate: {reason}")]
    DegenerateWindow { lo: i64, hi: i64, reason: String },
    #[error("invalid range: {0}")]
    BadRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Eq1,
    Eq2,
}

/// A solution sampled on `start_index-1 ..= last_site`, with the Dirichlet
/// value at `start_index-1` stored explicitly as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceSolution {
    lambda: f64,
    form: Form,
    start_index: i64,
    mantissas: Vec<f64>,
    log_scales: Vec<f64>,
}

impl RecurrenceSolution {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    pub fn first_site(&self) -> i64 {
        self.start_index - 1
    }

    pub fn last_site(&self) -> i64 {
        self.start_index - 1 + self.mantissas.len() as i64 - 1
    }

    fn idx(&self, n: i64) -> usize {
        debug_assert!(n >= self.first_site() && n <= self.last_site());
        (n - self.first_site()) as usize
    }

    pub fn mantissa(&self, n: i64) -> f64 {
        self.mantissas[self.idx(n)]
    }

    pub fn log_scale(&self, n: i64) -> f64 {
        self.log_scales[self.idx(n)]
    }

    /// `log|y_n|`; negative infinity where the value is exactly zero.
    pub fn log_abs(&self, n: i64) -> f64 {
        let m = self.mantissa(n);
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.abs().ln() + self.log_scale(n)
        }
    }

    pub fn signum(&self, n: i64) -> f64 {
        let m = self.mantissa(n);
        if m == 0.0 {
            0.0
        } else {
            m.signum()
        }
    }

    /// `y_n` in plain `f64`; overflows to infinity when the scale is extreme.
    pub fn value(&self, n: i64) -> f64 {
        self.mantissa(n) * self.log_scale(n).exp()
    }

    /// Builds a solution record from plain values (test and import helper).
    pub fn from_values(lambda: f64, form: Form, start_index: i64, values: &[f64]) -> Self {
        let mantissas = values.to_vec();
        let log_scales = vec![0.0; values.len()];
        Self { lambda, form, start_index, mantissas, log_scales }
    }

    /// Builds a solution record from `log|y_n|` and signs; entries with
    /// `-inf` become exact zeros.
    pub fn from_log_values(
        lambda: f64,
        form: Form,
        start_index: i64,
        log_abs: &[f64],
        signs: &[f64],
    ) -> Self {
        assert_eq!(log_abs.len(), signs.len());
        let mantissas = signs
            .iter()
            .zip(log_abs)
            .map(|(&s, &la)| if la == f64::NEG_INFINITY { 0.0 } else { s.signum() })
            .collect();
        let log_scales =
            log_abs.iter().map(|&la| if la == f64::NEG_INFINITY { 0.0 } else { la }).collect();
        Self { lambda, form, start_index, mantissas, log_scales }
    }

    /// Returns the same solution multiplied by `exp(log_factor)`.
    pub fn rescaled(&self, log_factor: f64) -> Self {
        let mut out = self.clone();
        for (m, s) in out.mantissas.iter_mut().zip(out.log_scales.iter_mut()) {
            if *m != 0.0 {
                *s += log_factor;
            }
        }
        out
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        self.first_site()..=self.last_site()
    }
}

/// Integrates the recurrence forward from `y_{start-1} = 0`, `y_start = 1`
/// up to `y_{n_max}` inclusive.
pub fn solve(
    model: &CoefficientModel,
    lambda: f64,
    form: Form,
    n_max: i64,
    rescale_period: usize,
) -> Result<RecurrenceSolution, RecurrenceError> {
    let start = model.start_index();
    if n_max < start + 1 {
        return Err(RecurrenceError::BadRange(format!(
            "n_max = {n_max} must be at least start_index + 1 = {}",
            start + 1
        )));
    }
    if rescale_period == 0 {
        return Err(RecurrenceError::BadRange("rescale_period must be >= 1".into()));
    }
    if !lambda.is_finite() {
        return Err(RecurrenceError::BadRange(format!("lambda = {lambda} must be finite")));
    }

    let len = (n_max - start + 2) as usize;
    let mut mantissas = Vec::with_capacity(len);
    let mut log_scales = Vec::with_capacity(len);
    mantissas.push(0.0);
    log_scales.push(0.0);
    mantissas.push(1.0);
    log_scales.push(0.0);

    let mut y_prev = 0.0f64;
    let mut y_cur = 1.0f64;
    let mut scale = 0.0f64;
    let mut a_left = model.edge_weight();
    let mut steps = 0usize;

    for n in start..n_max {
        let a_n = model.eval_a(n)?;
        let d = model.eval_b(n)? + a_n + a_left;
        let y_next = match form {
            Form::Eq1 => ((d - lambda) * y_cur - a_left * y_prev) / a_n,
            Form::Eq2 => ((lambda - d) * y_cur - a_left * y_prev) / a_n,
        };
        if !y_next.is_finite() {
            return Err(RecurrenceError::Breakdown {
                site: n + 1,
                reason: "value not finite (increase rescale frequency or check coefficients)"
                    .into(),
            });
        }
        y_prev = y_cur;
        y_cur = y_next;
        a_left = a_n;
        steps += 1;

        let mag = y_cur.abs().max(y_prev.abs());
        if mag > 0.0 && (steps % rescale_period == 0 || mag > RESCALE_CAP) {
            // Power-of-two factors keep mantissa bits intact across rescales.
            let e = mag.log2().round().clamp(-1000.0, 1000.0);
            if e != 0.0 {
                let f = (2f64).powi(e as i32);
                y_cur /= f;
                y_prev /= f;
                scale += e * std::f64::consts::LN_2;
            }
        }
        mantissas.push(y_cur);
        log_scales.push(scale);
    }

    Ok(RecurrenceSolution { lambda, form, start_index: start, mantissas, log_scales })
}

/// The orthonormal-polynomial solution `p(n; λ)`: the `Eq2` forward solution
/// with `p(start-1) = 0`, `p(start) = 1`. Zeros of `p(start+N; ·)` are the
/// eigenvalues of the N-by-N finite section.
pub fn orthonormal_polynomials(
    model: &CoefficientModel,
    lambda: f64,
    n_max: i64,
) -> Result<RecurrenceSolution, RecurrenceError> {
    solve(model, lambda, Form::Eq2, n_max, DEFAULT_RESCALE_PERIOD)
}

/// Applies the `(-1)^n` gauge, mapping an `Eq1` solution at λ to an `Eq2`
/// solution at the same λ and vice versa. Involutive bit-for-bit.
pub fn gauge_map(sol: &RecurrenceSolution) -> RecurrenceSolution {
    let mut out = sol.clone();
    out.form = match sol.form {
        Form::Eq1 => Form::Eq2,
        Form::Eq2 => Form::Eq1,
    };
    for (i, m) in out.mantissas.iter_mut().enumerate() {
        let site = sol.first_site() + i as i64;
        if site.rem_euclid(2) == 1 {
            *m = -*m;
        }
    }
    out
}

/// Largest relative interior residual of the defining recurrence,
/// `|three-term expression| / (sum of term magnitudes)`, over all interior
/// sites. Values are compared at a common local scale.
pub fn verify_residual(
    model: &CoefficientModel,
    sol: &RecurrenceSolution,
) -> Result<f64, RecurrenceError> {
    let start = sol.start_index();
    let mut worst = 0.0f64;
    for n in start..sol.last_site() {
        let a_n = model.eval_a(n)?;
        let a_left = if n == start { model.edge_weight() } else { model.eval_a(n - 1)? };
        let d = model.eval_b(n)? + a_n + a_left;
        let s_ref = sol.log_scale(n);
        let rel = |k: i64| (sol.log_scale(k) - s_ref).exp() * sol.mantissa(k);
        let (y_prev, y_cur, y_next) = (rel(n - 1), rel(n), rel(n + 1));
        let (t_next, t_prev) = match sol.form() {
            Form::Eq1 => (-a_n * y_next, -a_left * y_prev),
            Form::Eq2 => (a_n * y_next, a_left * y_prev),
        };
        let t_diag = (d - sol.lambda()) * y_cur;
        let res = (t_next + t_prev + t_diag).abs();
        let scale = t_next.abs() + t_prev.abs() + t_diag.abs();
        if scale > 0.0 {
            worst = worst.max(res / scale);
        }
    }
    Ok(worst)
}

/// Growth summary of a solution window: exponential and polynomial
/// least-squares fits through the window's block maxima, with prefactors
/// lifted so each fitted bound majorizes every sample in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    /// Fitted exponential rate, clamped at zero: `|y_n| <~ C2 e^{beta n}`.
    pub beta_hat: f64,
    /// Fitted polynomial degree: `|y_n| <~ C4 n^theta`. Not clamped;
    /// decaying envelopes report negative degrees.
    pub theta_hat: f64,
    /// `ln C2`, lifted so the exponential bound holds on the whole window.
    pub log_c2_hat: f64,
    /// `ln C3`: prefactor of the any-rate bound at the fitted `beta_hat`.
    pub log_c3_hat: f64,
    /// `ln C4`, lifted so the polynomial bound holds on the whole window.
    pub log_c4_hat: f64,
    pub fit_window: (i64, i64),
    /// RMS residual of the better of the two envelope fits.
    pub residual_rms: f64,
    pub beta_residual_rms: f64,
    pub theta_residual_rms: f64,
}

/// Fits growth envelopes on `window = (lo, hi)` (inclusive sites).
///
/// The window is split into blocks; each block contributes its maximum of
/// `log|y_n|` at the site attaining it. Block maxima track the envelope of
/// oscillatory solutions, whose raw log-values dip arbitrarily low near
/// zeros and would otherwise swamp the fit. Zero values are skipped; more
/// than half zeros is a degenerate window.
pub fn estimate_growth(
    sol: &RecurrenceSolution,
    window: (i64, i64),
) -> Result<GrowthEstimate, RecurrenceError> {
    let (lo, hi) = window;
    if lo < sol.start_index() || hi > sol.last_site() || hi < lo {
        return Err(RecurrenceError::BadRange(format!(
            "window [{lo}, {hi}] outside solution range [{}, {}]",
            sol.start_index(),
            sol.last_site()
        )));
    }
    let len = (hi - lo + 1) as usize;
    if len < 16 {
        return Err(RecurrenceError::DegenerateWindow {
            lo,
            hi,
            reason: format!("window of {len} sites is too short (need >= 16)"),
        });
    }

    let zeros = (lo..=hi).filter(|&n| sol.mantissa(n) == 0.0).count();
    if 2 * zeros > len {
        return Err(RecurrenceError::DegenerateWindow {
            lo,
            hi,
            reason: format!("{zeros} of {len} window values are zero"),
        });
    }

    let blocks = if len >= 1024 { 32 } else { (len / 32).max(4) };
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let b_lo = lo + (b * len / blocks) as i64;
        let b_hi = lo + ((b + 1) * len / blocks) as i64 - 1;
        let mut best: Option<(i64, f64)> = None;
        for n in b_lo..=b_hi.min(hi) {
            if sol.mantissa(n) == 0.0 {
                continue;
            }
            let la = sol.log_abs(n);
            if best.map_or(true, |(_, v)| la > v) {
                best = Some((n, la));
            }
        }
        if let Some((n, v)) = best {
            pts.push((n as f64, v));
        }
    }
    if pts.len() < 2 {
        return Err(RecurrenceError::DegenerateWindow {
            lo,
            hi,
            reason: "fewer than two nonzero block maxima".into(),
        });
    }

    let (slope_b, icept_b, rms_b) = least_squares(pts.iter().copied());
    let beta_hat = slope_b.max(0.0);
    // When the clamp binds, residuals are measured against the clamped line.
    let beta_rms = if beta_hat == slope_b {
        rms_b
    } else {
        rms_about(pts.iter().copied(), beta_hat)
    };

    let log_pts: Vec<(f64, f64)> =
        pts.iter().filter(|(x, _)| *x >= 1.0).map(|&(x, z)| (x.ln(), z)).collect();
    let (theta_hat, _icept_t, theta_rms) = if log_pts.len() >= 2 {
        least_squares(log_pts.iter().copied())
    } else {
        (0.0, icept_b, f64::INFINITY)
    };

    // Lift prefactors so the bounds majorize every nonzero sample.
    let mut log_c2 = f64::NEG_INFINITY;
    let mut log_c4 = f64::NEG_INFINITY;
    for n in lo..=hi {
        if sol.mantissa(n) == 0.0 {
            continue;
        }
        let la = sol.log_abs(n);
        log_c2 = log_c2.max(la - beta_hat * n as f64);
        if n >= 1 {
            log_c4 = log_c4.max(la - theta_hat * (n as f64).ln());
        }
    }

    Ok(GrowthEstimate {
        beta_hat,
        theta_hat,
        log_c2_hat: log_c2,
        log_c3_hat: log_c2,
        log_c4_hat: log_c4,
        fit_window: window,
        residual_rms: beta_rms.min(theta_rms),
        beta_residual_rms: beta_rms,
        theta_residual_rms: theta_rms,
    })
}

fn least_squares(pts: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64, f64) {
    let n = pts.clone().count() as f64;
    let mean_x = pts.clone().map(|(x, _)| x).sum::<f64>() / n;
    let mean_z = pts.clone().map(|(_, z)| z).sum::<f64>() / n;
    let sxx: f64 = pts.clone().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxz: f64 = pts.clone().map(|(x, z)| (x - mean_x) * (z - mean_z)).sum();
    let slope = if sxx > 0.0 { sxz / sxx } else { 0.0 };
    let icept = mean_z - slope * mean_x;
    let ss: f64 = pts.map(|(x, z)| (z - icept - slope * x).powi(2)).sum();
    (slope, icept, (ss / n).sqrt())
}

fn rms_about(pts: impl Iterator<Item = (f64, f64)> + Clone, slope: f64) -> f64 {
    let n = pts.clone().count() as f64;
    let icept = pts.clone().map(|(x, z)| z - slope * x).sum::<f64>() / n;
    let ss: f64 = pts.map(|(x, z)| (z - icept - slope * x).powi(2)).sum();
    (ss / n).sqrt()
}
