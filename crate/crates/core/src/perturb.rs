//! Perturbed operators a_{n-1} + η_{n-1}, b_n + ψ_n: hypothesis checks
//! for the relative-vanishing conditions and finite-section experiments
//! probing invariance of the essential spectrum.
//!
//! The essential spectrum is not computable from finite data. The
//! comparison here reports convergence trends of window-clipped section
//! spectra as evidence, never a verdict.

use crate::coeffs::{CoefficientError, CoefficientModel};
use crate::eigen::{eigenvalues, SpectrumApproximation};
use crate::operator::{finite_section, OperatorError};
use crate::recurrence::Form;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbError {
    #[error("perturbed weight a + η at site {index} is {value}, must be positive")]
    PositivityViolated { index: i64, value: f64 },
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("invalid input: {0}")]
    BadRange(String),
}

/// A perturbation sequence evaluated by site index. Out-of-range sites
/// (including the `start - 1` edge slot) evaluate to zero.
#[derive(Debug, Clone, PartialEq)]
pub enum PerturbSeq {
    Zero,
    Constant(f64),
    /// `scale / (n + 1)` for n ≥ 0, zero for negative n.
    InverseLinear { scale: f64 },
    Tabulated { first_index: i64, values: Vec<f64> },
}

impl PerturbSeq {
    pub fn eval(&self, n: i64) -> f64 {
        match self {
            PerturbSeq::Zero => 0.0,
            PerturbSeq::Constant(c) => {
                if n >= 0 {
                    *c
                } else {
                    0.0
                }
            }
            PerturbSeq::InverseLinear { scale } => {
                if n >= 0 {
                    scale / (n as f64 + 1.0)
                } else {
                    0.0
                }
            }
            PerturbSeq::Tabulated { first_index, values } => {
                if n < *first_index || n >= first_index + values.len() as i64 {
                    0.0
                } else {
                    values[(n - first_index) as usize]
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PerturbSeq::Zero => true,
            PerturbSeq::Constant(c) => *c == 0.0,
            PerturbSeq::InverseLinear { scale } => *scale == 0.0,
            PerturbSeq::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }
}

/// A base model with perturbations η (on a) and ψ (on b), plus the
/// threshold α of the tail condition b_n ≥ α > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPair {
    pub base: CoefficientModel,
    pub eta: PerturbSeq,
    pub psi: PerturbSeq,
    pub alpha: f64,
}

impl PerturbationPair {
    pub fn new(
        base: CoefficientModel,
        eta: PerturbSeq,
        psi: PerturbSeq,
        alpha: f64,
    ) -> Result<Self, PerturbError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(PerturbError::BadRange(format!("alpha = {alpha} must be positive")));
        }
        Ok(Self { base, eta, psi, alpha })
    }
}

/// Materializes the perturbed model on the first `n` sites as tables,
/// checking `a + η > 0` site by site.
pub fn perturbed_tables(
    pair: &PerturbationPair,
    n: usize,
) -> Result<CoefficientModel, PerturbError> {
    if n == 0 {
        return Err(PerturbError::BadRange("need at least one site".into()));
    }
    let start = pair.base.start_index();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for k in 0..n as i64 {
        let site = start + k;
        let ap = pair.base.eval_a(site)? + pair.eta.eval(site);
        if !(ap > 0.0) {
            return Err(PerturbError::PositivityViolated { index: site, value: ap });
        }
        a.push(ap);
        b.push(pair.base.eval_b(site)? + pair.psi.eval(site));
    }
    let edge = pair.base.edge_weight() + pair.eta.eval(start - 1);
    Ok(CoefficientModel::tabulated(a, b, start, edge)?)
}

/// Verdicts for the perturbation-theorem hypotheses on the first `n`
/// sites.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem5Report {
    /// Smallest site from which `b ≥ α` holds through the end of the
    /// tested range; `None` when even the final site fails.
    pub b_alpha_from: Option<i64>,
    /// The tail condition counts as satisfied when it holds from the
    /// first half of the range onward.
    pub b_alpha_ok: bool,
    /// Dyadic block maxima of |η_n / a_n| and |ψ_n / b_n|.
    pub eta_block_max: Vec<f64>,
    pub psi_block_max: Vec<f64>,
    /// Relative perturbations vanish: final block ≤ 1e-14, or the block
    /// maxima strictly decrease.
    pub eta_vanishing: bool,
    pub psi_vanishing: bool,
    /// Always true on the Ok path; positivity failures are errors.
    pub positivity_ok: bool,
    pub satisfied: bool,
}

fn vanishing_trend(blocks: &[f64]) -> bool {
    match blocks.last() {
        None => true,
        Some(&last) => {
            last <= 1e-14 || blocks.windows(2).all(|w| w[1] < w[0])
        }
    }
}

/// Checks the hypotheses: `b_n ≥ α` for all n sufficiently large, both
/// relative perturbations η/a and ψ/b vanishing, and `a + η > 0`.
pub fn check_theorem5_hypotheses(
    pair: &PerturbationPair,
    n: usize,
) -> Result<Theorem5Report, PerturbError> {
    if n < 16 {
        return Err(PerturbError::BadRange(format!("need N >= 16, got {n}")));
    }
    let start = pair.base.start_index();
    let last = start + n as i64 - 1;

    let mut b_alpha_from = None;
    let mut eta_block_max: Vec<f64> = Vec::new();
    let mut psi_block_max: Vec<f64> = Vec::new();
    for k in 0..n as i64 {
        let site = start + k;
        let a = pair.base.eval_a(site)?;
        let b = pair.base.eval_b(site)?;
        let eta = pair.eta.eval(site);
        let psi = pair.psi.eval(site);
        if a + eta <= 0.0 {
            return Err(PerturbError::PositivityViolated { index: site, value: a + eta });
        }

        // Tail index for b >= alpha: reset on every failure.
        if b >= pair.alpha {
            if b_alpha_from.is_none() {
                b_alpha_from = Some(site);
            }
        } else {
            b_alpha_from = None;
        }

        let eta_ratio = (eta / a).abs();
        let psi_ratio = if psi == 0.0 { 0.0 } else { (psi / b).abs() };
        let j = if k == 0 { 0 } else { 63 - (k as u64).leading_zeros() as usize };
        if j >= eta_block_max.len() {
            eta_block_max.push(eta_ratio);
            psi_block_max.push(psi_ratio);
        } else {
            eta_block_max[j] = eta_block_max[j].max(eta_ratio);
            psi_block_max[j] = psi_block_max[j].max(psi_ratio);
        }
    }

    let b_alpha_ok = b_alpha_from.map_or(false, |i| i - start <= (last - start) / 2);
    let eta_vanishing = vanishing_trend(&eta_block_max);
    let psi_vanishing = vanishing_trend(&psi_block_max);
    Ok(Theorem5Report {
        b_alpha_from,
        b_alpha_ok,
        eta_block_max,
        psi_block_max,
        eta_vanishing,
        psi_vanishing,
        positivity_ok: true,
        satisfied: b_alpha_ok && eta_vanishing && psi_vanishing,
    })
}

/// Hausdorff distance between two sorted finite sets; 0 when both are
/// empty, infinite when exactly one is.
pub fn hausdorff_distance(xs: &[f64], ys: &[f64]) -> f64 {
    match (xs.is_empty(), ys.is_empty()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => f64::INFINITY,
        _ => {
            let directed = |from: &[f64], to: &[f64]| {
                from.iter()
                    .map(|&x| {
                        let i = to.partition_point(|&v| v < x);
                        let mut d = f64::INFINITY;
                        if i < to.len() {
                            d = d.min((to[i] - x).abs());
                        }
                        if i > 0 {
                            d = d.min((x - to[i - 1]).abs());
                        }
                        d
                    })
                    .fold(0.0f64, f64::max)
            };
            directed(xs, ys).max(directed(ys, xs))
        }
    }
}

/// One row of the section-spectrum comparison at dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    /// Hausdorff distance of the window-clipped spectra; a window with
    /// eigenvalues on one side only scores the full window width.
    pub hausdorff: f64,
    /// Max discrepancy of the two counting functions over the window.
    pub counting_discrepancy: usize,
}

fn clip_sorted(spec: &SpectrumApproximation, lo: f64, hi: f64) -> Vec<f64> {
    spec.eigenvalues().iter().copied().filter(|&v| v >= lo && v <= hi).collect()
}

fn counting_discrepancy(xs: &[f64], ys: &[f64]) -> usize {
    // Sweep merged breakpoints; ties on both sides belong to the same
    // breakpoint, so identical lists score zero.
    let mut i = 0usize;
    let mut j = 0usize;
    let mut diff = 0i64;
    let mut worst = 0i64;
    while i < xs.len() || j < ys.len() {
        let vx = xs.get(i).copied().unwrap_or(f64::INFINITY);
        let vy = ys.get(j).copied().unwrap_or(f64::INFINITY);
        let v = vx.min(vy);
        while i < xs.len() && xs[i] == v {
            diff += 1;
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            diff -= 1;
            j += 1;
        }
        worst = worst.max(diff.abs());
    }
    worst as usize
}

/// Compares base and perturbed section spectra inside `window` for each
/// dimension in `n_list`.
pub fn essential_spectrum_compare(
    pair: &PerturbationPair,
    n_list: &[usize],
    window: (f64, f64),
    tol: f64,
) -> Result<Vec<ConvergenceRow>, PerturbError> {
    let (lo, hi) = window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(PerturbError::BadRange(format!("bad window [{lo}, {hi}]")));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) || n_list.is_empty() {
        return Err(PerturbError::BadRange("N list must be nonempty and increasing".into()));
    }
    if !(tol > 0.0) {
        return Err(PerturbError::BadRange(format!("tol = {tol} must be positive")));
    }

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let base_sec = finite_section(&pair.base, n, Form::Eq2)?;
        let pert_model = perturbed_tables(pair, n)?;
        let pert_sec = finite_section(&pert_model, n, Form::Eq2)?;
        let base_spec = eigenvalues(&base_sec, tol);
        let pert_spec = eigenvalues(&pert_sec, tol);
        let xs = clip_sorted(&base_spec, lo, hi);
        let ys = clip_sorted(&pert_spec, lo, hi);
        let h = hausdorff_distance(&xs, &ys);
        rows.push(ConvergenceRow {
            n,
            hausdorff: if h.is_finite() { h } else { hi - lo },
            counting_discrepancy: counting_discrepancy(&xs, &ys),
        });
    }
    Ok(rows)
}
