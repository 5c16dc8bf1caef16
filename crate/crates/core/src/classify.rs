//! Hypothesis verification for the theorems' standing assumptions: the
//! coefficient-ratio bound |Δa_{n-1}| ≤ C₁a_{n-1}, the exponential bound
//! on weighted prefix sums, and a sufficient limit-point criterion.
//!
//! Finite data cannot certify asymptotic hypotheses; each check reports
//! the fitted constant together with a trend verdict, and the limit-point
//! test never claims limit-circle.

use crate::coeffs::{CoefficientError, CoefficientModel};
use thiserror::Error;

/// Relative slack when comparing dyadic block maxima: floating-point
/// jitter must not flag an exactly constant ratio as increasing.
const TREND_SLACK: f64 = 1e-9;

/// Log-domain slack for the split-half growth extrapolation; fit noise on
/// an honest family stays orders of magnitude below this.
const GROWTH_SLACK: f64 = 0.01;

/// Divergence heuristic defaults for the limit-point criterion.
pub const CARLEMAN_SUM_THRESHOLD: f64 = 10.0;
pub const CARLEMAN_DECADE_INCREMENT: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifyError {
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error("invalid range: {0}")]
    BadRange(String),
}

/// Sweep of the ratios |Δa_{n-1}| / a_{n-1} over (n0, N].
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRatioReport {
    /// Maximum ratio over the range: the minimal admissible C₁.
    pub c1_hat: f64,
    /// Site attaining the maximum.
    pub argmax: i64,
    /// True when the dyadic block maxima of the ratio increase along the
    /// range, i.e. no fixed C₁ looks sustainable.
    pub increasing: bool,
    /// Site attaining the first offending block maximum, if any.
    pub first_violation: Option<i64>,
}

/// Measures the minimal C₁ and its trend. Blocks are dyadic in the offset
/// from `n0`, so the trend verdict is scale-free in `N`.
pub fn check_delta_a(
    model: &CoefficientModel,
    n0: i64,
    n: i64,
) -> Result<DeltaRatioReport, ClassifyError> {
    if n <= n0 + 1 {
        return Err(ClassifyError::BadRange(format!("need N > n0 + 1, got N = {n}, n0 = {n0}")));
    }
    // block_max[j] covers offsets [2^j, 2^{j+1}) from n0 (offset 1 included
    // in block 0), each with the site attaining it.
    let mut block_max: Vec<(f64, i64)> = Vec::new();
    let mut c1_hat = f64::NEG_INFINITY;
    let mut argmax = n0 + 1;
    let mut a_prev = model.eval_a(n0)?;
    for k in n0 + 1..=n {
        let a_k = model.eval_a(k)?;
        let ratio = (a_k - a_prev).abs() / a_prev;
        a_prev = a_k;
        if ratio > c1_hat {
            c1_hat = ratio;
            argmax = k;
        }
        let j = 63 - ((k - n0) as u64).leading_zeros() as usize;
        if j >= block_max.len() {
            block_max.push((ratio, k));
        } else if ratio > block_max[j].0 {
            block_max[j] = (ratio, k);
        }
    }

    let mut increasing = false;
    let mut first_violation = None;
    for w in block_max.windows(2) {
        if w[1].0 > w[0].0 * (1.0 + TREND_SLACK) {
            increasing = true;
            first_violation = Some(w[1].1);
            break;
        }
    }
    Ok(DeltaRatioReport { c1_hat, argmax, increasing, first_violation })
}

/// Exponential envelope of the weighted prefix sums
/// S_n = Σ_{k=n0+1}^{n} a_{k-1}², fitted in the log domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    /// Least-squares slope of log S_n against n, clamped at zero.
    pub gamma_hat: f64,
    /// ln L, lifted so L·e^{γn} majorizes every tested prefix sum. Kept in
    /// logs: S_N itself overflows f64 for exponential families.
    pub log_l_hat: f64,
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

fn log_prefix_sums(
    model: &CoefficientModel,
    n0: i64,
    n: i64,
) -> Result<Vec<f64>, ClassifyError> {
    let mut out = Vec::with_capacity((n - n0) as usize);
    let mut acc = f64::NEG_INFINITY;
    for k in n0 + 1..=n {
        let a = model.eval_a(k - 1)?;
        acc = log_add_exp(acc, 2.0 * a.ln());
        out.push(acc);
    }
    Ok(out)
}

fn fit_on(log_s: &[f64], n0: i64) -> GammaFit {
    let m = log_s.len() as f64;
    let mean_x = log_s
        .iter()
        .enumerate()
        .map(|(i, _)| (n0 + 1 + i as i64) as f64)
        .sum::<f64>()
        / m;
    let mean_z = log_s.iter().sum::<f64>() / m;
    let mut sxx = 0.0;
    let mut sxz = 0.0;
    for (i, &z) in log_s.iter().enumerate() {
        let x = (n0 + 1 + i as i64) as f64 - mean_x;
        sxx += x * x;
        sxz += x * (z - mean_z);
    }
    let gamma_hat = if sxx > 0.0 { (sxz / sxx).max(0.0) } else { 0.0 };
    let mut log_l_hat = f64::NEG_INFINITY;
    for (i, &z) in log_s.iter().enumerate() {
        log_l_hat = log_l_hat.max(z - gamma_hat * (n0 + 1 + i as i64) as f64);
    }
    GammaFit { gamma_hat, log_l_hat }
}

/// Fits (γ, ln L) on the full range `(n0, N]` with the prefactor lifted to
/// majorize every tested prefix sum.
pub fn fit_gamma(model: &CoefficientModel, n0: i64, n: i64) -> Result<GammaFit, ClassifyError> {
    if n <= n0 + 1 {
        return Err(ClassifyError::BadRange(format!("need N > n0 + 1, got N = {n}, n0 = {n0}")));
    }
    Ok(fit_on(&log_prefix_sums(model, n0, n)?, n0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitPointVerdict {
    YesByCarleman,
    Inconclusive,
}

impl LimitPointVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            LimitPointVerdict::YesByCarleman => "yes_by_carleman",
            LimitPointVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// Limit-point test via divergence of Σ 1/a_n: returns yes only when the
/// partial sum exceeds `sum_threshold` and still grew by more than
/// `decade_increment` over the last decade of indices. Sufficient only;
/// an inconclusive verdict makes no limit-circle claim.
pub fn carleman_with(
    model: &CoefficientModel,
    n: i64,
    sum_threshold: f64,
    decade_increment: f64,
) -> Result<(LimitPointVerdict, f64), ClassifyError> {
    let start = model.start_index();
    if n < start + 1 {
        return Err(ClassifyError::BadRange(format!("need N >= start + 1 = {}", start + 1)));
    }
    let decade_mark = start + (n - start) / 10;
    let mut sum = 0.0f64;
    let mut sum_at_mark = 0.0f64;
    for k in start..=n {
        sum += 1.0 / model.eval_a(k)?;
        if k == decade_mark {
            sum_at_mark = sum;
        }
    }
    let verdict = if sum > sum_threshold && sum - sum_at_mark > decade_increment {
        LimitPointVerdict::YesByCarleman
    } else {
        LimitPointVerdict::Inconclusive
    };
    Ok((verdict, sum))
}

pub fn carleman(model: &CoefficientModel, n: i64) -> Result<LimitPointVerdict, ClassifyError> {
    Ok(carleman_with(model, n, CARLEMAN_SUM_THRESHOLD, CARLEMAN_DECADE_INCREMENT)?.0)
}

/// Aggregated hypothesis verdicts for one model over `(n0, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub n0: i64,
    pub tested_n: i64,
    pub c1_hat: f64,
    pub c1_argmax: i64,
    pub c1_ok: bool,
    pub first_violation: Option<i64>,
    pub gamma_hat: f64,
    pub log_l_hat: f64,
    pub growth_ok: bool,
    pub limit_point: LimitPointVerdict,
    pub carleman_sum: f64,
}

impl HypothesisReport {
    /// All three standing assumptions look sustainable on the tested range.
    pub fn eligible(&self) -> bool {
        self.c1_ok && self.growth_ok && self.limit_point == LimitPointVerdict::YesByCarleman
    }

    /// Flat key=value rows for text and CSV export.
    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("n0", self.n0.to_string()),
            ("tested_n", self.tested_n.to_string()),
            ("c1_hat", format!("{:.6e}", self.c1_hat)),
            ("c1_argmax", self.c1_argmax.to_string()),
            ("c1_ok", self.c1_ok.to_string()),
            (
                "first_violation",
                self.first_violation.map_or("none".into(), |k| k.to_string()),
            ),
            ("gamma_hat", format!("{:.6e}", self.gamma_hat)),
            ("log_L_hat", format!("{:.6e}", self.log_l_hat)),
            ("growth_ok", self.growth_ok.to_string()),
            ("limit_point", self.limit_point.label().into()),
            ("carleman_sum", format!("{:.6e}", self.carleman_sum)),
            ("eligible", self.eligible().to_string()),
        ]
    }
}

/// Runs all hypothesis checks. `n0` defaults to `start_index + 1` (the
/// hypotheses only constrain "n sufficiently large", so the left edge is
/// free).
///
/// `growth_ok` is a split-half extrapolation: the envelope fitted on the
/// first half of the range must majorize the second half. A lift over the
/// full range would be vacuously true; extrapolation is what fails for
/// super-exponential families.
pub fn hypothesis_report(
    model: &CoefficientModel,
    n0: Option<i64>,
    n: i64,
) -> Result<HypothesisReport, ClassifyError> {
    let n0 = n0.unwrap_or(model.start_index() + 1);
    if n <= n0 + 3 {
        return Err(ClassifyError::BadRange(format!("need N > n0 + 3, got N = {n}, n0 = {n0}")));
    }

    let delta = check_delta_a(model, n0, n)?;
    let full = fit_gamma(model, n0, n)?;

    let log_s = log_prefix_sums(model, n0, n)?;
    let half = log_s.len() / 2;
    let head_fit = fit_on(&log_s[..half], n0);
    let mut growth_ok = true;
    for (i, &z) in log_s.iter().enumerate().skip(half) {
        let x = (n0 + 1 + i as i64) as f64;
        if z > head_fit.log_l_hat + head_fit.gamma_hat * x + GROWTH_SLACK {
            growth_ok = false;
            break;
        }
    }

    let (limit_point, carleman_sum) =
        carleman_with(model, n, CARLEMAN_SUM_THRESHOLD, CARLEMAN_DECADE_INCREMENT)?;

    Ok(HypothesisReport {
        n0,
        tested_n: n,
        c1_hat: delta.c1_hat,
        c1_argmax: delta.argmax,
        c1_ok: !delta.increasing,
        first_violation: delta.first_violation,
        gamma_hat: full.gamma_hat,
        log_l_hat: full.log_l_hat,
        growth_ok,
        limit_point,
        carleman_sum,
    })
}
