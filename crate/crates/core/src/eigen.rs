//! Symmetric tridiagonal eigensolver by Sturm-sequence bisection, plus
//! spectral-distance utilities for finite sections.
//!
//! Bisection is used instead of shift-QL because the Sturm count is exact
//! for the stored matrix and the bisection schedule is fixed, so results
//! are deterministic regardless of how callers parallelize.

use crate::operator::FiniteSection;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("spectrum approximation is empty")]
    EmptySpectrum,
}

/// All eigenvalues of one finite section, each bracketed to width `tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumApproximation {
    eigenvalues: Vec<f64>,
    tol: f64,
}

impl SpectrumApproximation {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn from_sorted(eigenvalues: Vec<f64>, tol: f64) -> Self {
        debug_assert!(eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        Self { eigenvalues, tol }
    }
}

/// Number of eigenvalues strictly below `x`, by the sign count of the
/// LDLᵀ pivots of `sec - x`.
///
/// The pivot update subtracts `(e/q)·e` rather than `e²/q`: never squaring
/// the off-diagonal keeps the recursion in range even when `a_n` grows
/// exponentially. Zero and infinite pivots flow through IEEE arithmetic
/// (`e/0 = inf`, `e/inf = 0`) without producing NaN, and a zero pivot
/// counts as positive, which makes the count strict.
pub fn count_below(sec: &FiniteSection, x: f64) -> usize {
    assert!(x.is_finite(), "count_below requires finite x");
    let diag = sec.diag();
    let off = sec.offdiag();
    let mut count = 0usize;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = off[i - 1];
        q = (diag[i] - x) - (e / q) * e;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Interval certain to contain the whole spectrum (row-sum discs).
pub fn gershgorin_bounds(sec: &FiniteSection) -> (f64, f64) {
    let diag = sec.diag();
    let off = sec.offdiag();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i < off.len() {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// Bracket width at which bisection stops by default: absolute `1e-10`
/// scaled by the spectral radius estimate.
pub fn default_tol(sec: &FiniteSection) -> f64 {
    let (lo, hi) = gershgorin_bounds(sec);
    1e-10 * lo.abs().max(hi.abs()).max(1.0)
}

/// All `N` eigenvalues by per-index bisection on `count_below`.
pub fn eigenvalues(sec: &FiniteSection, tol: f64) -> SpectrumApproximation {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = sec.size();
    let (g_lo, g_hi) = gershgorin_bounds(sec);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        // lambda_k = inf { x : count_below(x) >= k }.
        let mut lo = g_lo;
        let mut hi = g_hi;
        let mut iters = 0;
        while hi - lo > tol && iters < 200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(sec, mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
            iters += 1;
        }
        out.push(0.5 * (lo + hi));
    }
    SpectrumApproximation { eigenvalues: out, tol }
}

/// `min_k |lambda - lambda_k|`.
pub fn spectral_distance(
    spec: &SpectrumApproximation,
    lambda: f64,
) -> Result<f64, EigenError> {
    let evs = &spec.eigenvalues;
    if evs.is_empty() {
        return Err(EigenError::EmptySpectrum);
    }
    let i = evs.partition_point(|&v| v < lambda);
    let mut best = f64::INFINITY;
    if i < evs.len() {
        best = best.min((evs[i] - lambda).abs());
    }
    if i > 0 {
        best = best.min((lambda - evs[i - 1]).abs());
    }
    Ok(best)
}

/// Largest gap left uncovered by eigenvalues inside `[lo, hi]`, counting
/// the window edges as gap endpoints. An empty intersection scores the
/// full window width.
pub fn spectrum_gaps(spec: &SpectrumApproximation, window: (f64, f64)) -> f64 {
    let (lo, hi) = window;
    assert!(lo < hi, "window must satisfy lo < hi");
    let mut prev = lo;
    let mut max_gap = 0.0f64;
    for &ev in &spec.eigenvalues {
        if ev < lo {
            continue;
        }
        if ev > hi {
            break;
        }
        max_gap = max_gap.max(ev - prev);
        prev = ev;
    }
    max_gap.max(hi - prev)
}
