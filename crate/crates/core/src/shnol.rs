//! Cutoff windows, commutator residuals, Weyl certificates, the weighted
//! tail F(r) with its pigeonhole subsequence, and the a-priori difference
//! bound as a testable inequality.
//!
//! The certificate logic rests on one fact: for a self-adjoint operator,
//! `‖(B - λ)w‖ / ‖w‖` upper-bounds the distance from λ to the spectrum for
//! every finite-support `w ≠ 0`. Windows cut a computed solution down to
//! finite support; because the solution satisfies the recurrence, the
//! residual lives only where the window varies, and its size is what the
//! certificate reports.

use crate::coeffs::{CoefficientError, CoefficientModel};
use crate::operator::{apply_form, OperatorError, SparseVector};
use crate::recurrence::RecurrenceSolution;
use thiserror::Error;

/// Interior residual entries below `threshold * local_scale` are zeroed
/// before norm-taking; this is pure floating-point cancellation noise
/// (machine epsilon per term), three orders of magnitude below this cap.
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShnolError {
    #[error("bad window geometry: {0}")]
    BadGeometry(String),
    #[error("window selects an identically zero vector")]
    ZeroVector,
    #[error("margin too small: {0}")]
    MarginTooSmall(String),
    #[error("hypothesis violated at k = {k}: {detail}")]
    HypothesisViolated { k: i64, detail: String },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WindowKind {
    Sharp,
    LinearTaper,
    CosineTaper,
}

impl WindowKind {
    pub fn label(&self) -> &'static str {
        match self {
            WindowKind::Sharp => "sharp",
            WindowKind::LinearTaper => "linear",
            WindowKind::CosineTaper => "cosine",
        }
    }
}

/// The cutoff sequence v: 1 on `[n0, r - W]`, 0 outside `[n0, r]`,
/// monotone on the taper. Sharp windows (`W = 0`) are the indicator of
/// `[n0, r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffWindow {
    kind: WindowKind,
    n0: i64,
    r: i64,
    w: i64,
}

impl CutoffWindow {
    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn n0(&self) -> i64 {
        self.n0
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn width(&self) -> i64 {
        self.w
    }

    pub fn value(&self, n: i64) -> f64 {
        if n < self.n0 || n > self.r {
            return 0.0;
        }
        let plateau_end = self.r - self.w;
        if n <= plateau_end {
            return 1.0;
        }
        match self.kind {
            WindowKind::Sharp => 1.0,
            WindowKind::LinearTaper => (self.r - n) as f64 / self.w as f64,
            WindowKind::CosineTaper => {
                let t = (n - plateau_end) as f64 / self.w as f64;
                0.5 * (1.0 + (std::f64::consts::PI * t).cos())
            }
        }
    }

    /// Last site where the window is nonzero.
    pub fn support_end(&self) -> i64 {
        match self.kind {
            WindowKind::Sharp => self.r,
            _ => self.r - 1,
        }
    }
}

pub fn make_window(
    kind: WindowKind,
    n0: i64,
    r: i64,
    w: i64,
) -> Result<CutoffWindow, ShnolError> {
    if r - 1 <= n0 {
        return Err(ShnolError::BadGeometry(format!("need r - 1 > n0, got r = {r}, n0 = {n0}")));
    }
    match kind {
        WindowKind::Sharp => {
            if w != 0 {
                return Err(ShnolError::BadGeometry(format!(
                    "sharp window must have W = 0, got {w}"
                )));
            }
        }
        _ => {
            if w <= 0 {
                return Err(ShnolError::BadGeometry(format!(
                    "taper width must be positive, got {w}"
                )));
            }
            if r - w <= n0 {
                return Err(ShnolError::BadGeometry(format!(
                    "taper leaves no plateau: r - W = {} must exceed n0 = {n0}",
                    r - w
                )));
            }
        }
    }
    Ok(CutoffWindow { kind, n0, r, w })
}

/// A finite-support vector `w = v·y`, its exact residual `(B - λ)w`, and
/// the certified upper bound `‖(B-λ)w‖ / ‖w‖ ≥ d(λ, σ(B))`.
///
/// The vector is max-normalized before the residual is computed, so the
/// bound is invariant under rescaling of the input solution; `w_norm` and
/// `residual_norm` refer to the normalized vector.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylCertificate {
    pub lambda: f64,
    pub window: CutoffWindow,
    pub w_norm: f64,
    pub residual_norm: f64,
    pub bound: f64,
    pub threshold: f64,
    pub residual: SparseVector,
}

/// Builds the Weyl certificate for `sol` at its own λ over `window`.
///
/// Requires a 4-site margin past `r` inside the solution range. Residual
/// entries smaller than `threshold_rel` times their row's term magnitude
/// are zeroed; genuine boundary entries are of order the local scale
/// itself and always survive.
pub fn weyl_certificate(
    model: &CoefficientModel,
    sol: &RecurrenceSolution,
    window: &CutoffWindow,
    threshold_rel: f64,
) -> Result<WeylCertificate, ShnolError> {
    let start = sol.start_index();
    if window.n0() < start {
        return Err(ShnolError::MarginTooSmall(format!(
            "window n0 = {} precedes the lattice start {start}",
            window.n0()
        )));
    }
    if window.r() + 4 > sol.last_site() {
        return Err(ShnolError::MarginTooSmall(format!(
            "window r = {} needs solution data through r + 4 = {}, have {}",
            window.r(),
            window.r() + 4,
            sol.last_site()
        )));
    }

    let n0 = window.n0();
    let sup_end = window.support_end();
    // Reference scale: the window's largest |y|. Entries more than ~700
    // e-folds below it underflow to exact zero, which only removes mass
    // that is negligible at f64 resolution anyway.
    let mut s_ref = f64::NEG_INFINITY;
    for n in n0..=sup_end {
        if window.value(n) > 0.0 {
            s_ref = s_ref.max(sol.log_abs(n));
        }
    }
    if s_ref == f64::NEG_INFINITY {
        return Err(ShnolError::ZeroVector);
    }
    let values: Vec<f64> = (n0..=sup_end)
        .map(|n| window.value(n) * sol.signum(n) * (sol.log_abs(n) - s_ref).exp())
        .collect();
    let w = SparseVector::new(n0, values)?;
    if w.max_abs() == 0.0 {
        return Err(ShnolError::ZeroVector);
    }

    let lambda = sol.lambda();
    let mut residual = apply_form(model, sol.form(), &w, lambda)?;
    let res_lo = residual.start();
    let mut vals = residual.values().to_vec();
    for (i, v) in vals.iter_mut().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let n = res_lo + i as i64;
        let a_n = model.eval_a(n)?;
        let a_left = if n == start { model.edge_weight() } else { model.eval_a(n - 1)? };
        let d_n = model.diagonal(n)?;
        let scale = (a_n * w.value(n + 1)).abs()
            + (a_left * w.value(n - 1)).abs()
            + ((d_n - lambda) * w.value(n)).abs();
        if v.abs() <= threshold_rel * scale {
            *v = 0.0;
        }
    }
    residual = SparseVector::new(res_lo, vals)?;

    let w_norm = w.norm();
    let residual_norm = residual.norm();
    Ok(WeylCertificate {
        lambda,
        window: *window,
        w_norm,
        residual_norm,
        bound: residual_norm / w_norm,
        threshold: threshold_rel,
        residual,
    })
}

/// Searches `r_grid × kinds × W ∈ {r/4, r/2}` (sharp windows have no
/// width) for the smallest bound. Ties break to the smallest `r`, then
/// sharp before linear before cosine, then the smaller width. The left
/// edge is pinned at the lattice start, where the Dirichlet condition
/// kills the left residual cluster.
pub fn optimize_certificate(
    model: &CoefficientModel,
    sol: &RecurrenceSolution,
    r_grid: &[i64],
    kinds: &[WindowKind],
    threshold_rel: f64,
) -> Result<WeylCertificate, ShnolError> {
    if r_grid.is_empty() || kinds.is_empty() {
        return Err(ShnolError::BadGeometry("empty search grid".into()));
    }
    let n0 = sol.start_index();
    let mut rs = r_grid.to_vec();
    rs.sort_unstable();
    rs.dedup();
    let mut ordered_kinds =
        [WindowKind::Sharp, WindowKind::LinearTaper, WindowKind::CosineTaper]
            .into_iter()
            .filter(|k| kinds.contains(k))
            .collect::<Vec<_>>();
    ordered_kinds.dedup();

    let mut best: Option<WeylCertificate> = None;
    for &r in &rs {
        for &kind in &ordered_kinds {
            let widths: &[i64] = match kind {
                WindowKind::Sharp => &[0],
                _ => &[r / 4, r / 2],
            };
            let mut tried = Vec::new();
            for &w0 in widths {
                let w = match kind {
                    WindowKind::Sharp => 0,
                    _ => w0.max(1),
                };
                if tried.contains(&w) {
                    continue;
                }
                tried.push(w);
                let window = make_window(kind, n0, r, w)?;
                let cert = weyl_certificate(model, sol, &window, threshold_rel)?;
                if best.as_ref().map_or(true, |b| cert.bound < b.bound) {
                    best = Some(cert);
                }
            }
        }
    }
    Ok(best.expect("nonempty grids produce at least one certificate"))
}

/// Prefix sums `F(r) = Σ_{n=n0+1}^{r} a_{n-1}² y_n²`, held as `log F` so
/// solutions far beyond f64 range stay usable. `F(n0) = 0` by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct TailWeight {
    n0: i64,
    log_f: Vec<f64>,
}

impl TailWeight {
    pub fn n0(&self) -> i64 {
        self.n0
    }

    pub fn r_max(&self) -> i64 {
        self.n0 + self.log_f.len() as i64 - 1
    }

    /// `log F(r)`; negative infinity at `r = n0`.
    pub fn log_f(&self, r: i64) -> f64 {
        assert!(r >= self.n0 && r <= self.r_max(), "r = {r} outside [{}, {}]", self.n0, self.r_max());
        self.log_f[(r - self.n0) as usize]
    }

    /// `F(r)` in plain f64; saturates to infinity for extreme tails.
    pub fn f(&self, r: i64) -> f64 {
        self.log_f(r).exp()
    }

    /// Assembles a tail record directly from `log F` values (index k holds
    /// `log F(n0 + k)`; the first entry is conventionally `-inf`).
    pub fn from_log_values(n0: i64, log_f: Vec<f64>) -> Self {
        assert!(!log_f.is_empty());
        assert!(
            log_f.windows(2).all(|p| p[0] <= p[1]),
            "F must be nondecreasing"
        );
        Self { n0, log_f }
    }
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

/// Accumulates the weighted tail of `sol` from `n0` through `r_max`.
pub fn tail_weight(
    model: &CoefficientModel,
    sol: &RecurrenceSolution,
    n0: i64,
    r_max: i64,
) -> Result<TailWeight, ShnolError> {
    if n0 < sol.start_index() || r_max > sol.last_site() || r_max < n0 {
        return Err(ShnolError::MarginTooSmall(format!(
            "tail range [{n0}, {r_max}] outside solution range [{}, {}]",
            sol.start_index(),
            sol.last_site()
        )));
    }
    let mut log_f = Vec::with_capacity((r_max - n0 + 1) as usize);
    log_f.push(f64::NEG_INFINITY);
    let mut acc = f64::NEG_INFINITY;
    for n in n0 + 1..=r_max {
        let a = model.eval_a(n - 1)?;
        let term = 2.0 * (a.ln() + sol.log_abs(n));
        acc = log_add_exp(acc, term);
        log_f.push(acc);
    }
    Ok(TailWeight { n0, log_f })
}

/// All `r ≥ r_min` (within the tail's range, 4-site margin) satisfying the
/// strict pigeonhole inequality `F(r+4) < e^{2β+δ₁} F(r-2)`.
pub fn pigeonhole_sequence(f: &TailWeight, beta: f64, delta1: f64, r_min: i64) -> Vec<i64> {
    assert!(delta1 > 0.0, "delta1 must be positive");
    let lo = r_min.max(f.n0() + 2);
    let hi = f.r_max() - 4;
    let gap = 2.0 * beta + delta1;
    let mut out = Vec::new();
    for r in lo..=hi {
        if f.log_f(r + 4) < gap + f.log_f(r - 2) {
            out.push(r);
        }
    }
    out
}

/// Outcome of the a-priori difference bound: `lhs ≤ rhs` with
/// `rhs = 2(1 + (C1+1)²) Σ a² y²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem4Outcome {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `Σ_{k=r}^{s} a_{k-1}²(Δy_{k-1})² ≤ 2(1+(C1+1)²) Σ_{k=m-1}^{n} a_{k-1}² y_k²`.
///
/// Slices are shifted by one so the left edge weight is addressable:
/// `a[k] = a_{k-1}` and `y[k] = y_k`; needs `a` through index `n+1` and
/// `y` through `n`. The coefficient hypothesis `|Δa_{k-1}| ≤ C1·a_{k-1}`
/// is verified for every `k` in `[m-1, n]` before the sums are formed.
pub fn theorem4_check(
    a: &[f64],
    y: &[f64],
    c1: f64,
    m: i64,
    r: i64,
    s: i64,
    n: i64,
) -> Result<Theorem4Outcome, ShnolError> {
    if !(1 <= m && m <= r && r <= s && s <= n) {
        return Err(ShnolError::BadGeometry(format!(
            "need 1 <= m <= r <= s <= n, got m = {m}, r = {r}, s = {s}, n = {n}"
        )));
    }
    if c1 < 0.0 {
        return Err(ShnolError::BadGeometry(format!("C1 = {c1} must be nonnegative")));
    }
    if (a.len() as i64) < n + 2 || (y.len() as i64) < n + 1 {
        return Err(ShnolError::BadGeometry(format!(
            "need a through index n+1 = {} and y through n = {n}, got lengths {} and {}",
            n + 1,
            a.len(),
            y.len()
        )));
    }
    let a_at = |k: i64| a[(k + 1) as usize];
    for k in m - 1..=n {
        let ak = a_at(k - 1);
        if !(ak > 0.0) {
            return Err(ShnolError::HypothesisViolated {
                k,
                detail: format!("a at offset {} is {ak}, must be positive", k - 1),
            });
        }
        let ratio = (a_at(k) - ak).abs() / ak;
        if ratio > c1 {
            return Err(ShnolError::HypothesisViolated {
                k,
                detail: format!("|Δa| / a = {ratio} exceeds C1 = {c1}"),
            });
        }
    }

    let mut lhs = 0.0f64;
    for k in r..=s {
        let d = y[k as usize] - y[(k - 1) as usize];
        lhs += (a_at(k - 1) * d).powi(2);
    }
    let mut tail = 0.0f64;
    for k in m - 1..=n {
        tail += (a_at(k - 1) * y[k as usize]).powi(2);
    }
    let rhs = 2.0 * (1.0 + (c1 + 1.0).powi(2)) * tail;
    Ok(Theorem4Outcome { lhs, rhs, holds: lhs <= rhs })
}

/// The C-free shape `(e^{2β} - 1)^{1/2}` of the distance bound, per grid
/// point. The theorem's constant is existential; only the shape is
/// testable.
pub fn shnol_bound_curve(beta_grid: &[f64]) -> Vec<f64> {
    beta_grid
        .iter()
        .map(|&beta| {
            assert!(beta >= 0.0, "beta must be nonnegative");
            (2.0 * beta).exp_m1().sqrt()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientModel;
    use crate::recurrence::{solve, Form, DEFAULT_RESCALE_PERIOD};

    fn free() -> CoefficientModel {
        CoefficientModel::constant(1.0, 0.0).unwrap()
    }

    fn free_sol(lambda: f64, n_max: i64) -> RecurrenceSolution {
        solve(&free(), lambda, Form::Eq2, n_max, DEFAULT_RESCALE_PERIOD).unwrap()
    }

    #[test]
    fn sharp_window_is_an_indicator() {
        let v = make_window(WindowKind::Sharp, 0, 10, 0).unwrap();
        for n in -3..15 {
            let expect = if (0..=10).contains(&n) { 1.0 } else { 0.0 };
            assert_eq!(v.value(n), expect, "v({n})");
        }
        assert_eq!(v.support_end(), 10);
    }

    #[test]
    fn linear_taper_descends_affinely() {
        let v = make_window(WindowKind::LinearTaper, 0, 20, 10).unwrap();
        assert_eq!(v.value(10), 1.0);
        assert_eq!(v.value(15), 0.5);
        assert_eq!(v.value(20), 0.0);
        assert_eq!(v.value(17), 0.3);
        assert_eq!(v.support_end(), 19);
    }

    #[test]
    fn cosine_taper_is_monotone_with_half_at_midpoint() {
        let v = make_window(WindowKind::CosineTaper, 0, 40, 20).unwrap();
        assert_eq!(v.value(20), 1.0);
        assert!((v.value(30) - 0.5).abs() <= 1e-15);
        assert!(v.value(40).abs() <= 1e-15);
        for n in 20..40 {
            assert!(v.value(n + 1) <= v.value(n));
        }
    }

    #[test]
    fn window_geometry_is_validated() {
        assert!(matches!(
            make_window(WindowKind::Sharp, 5, 5, 0),
            Err(ShnolError::BadGeometry(_))
        ));
        // r = n0 + 1 violates the margin r - 1 > n0.
        assert!(matches!(
            make_window(WindowKind::Sharp, 6, 7, 0),
            Err(ShnolError::BadGeometry(_))
        ));
        assert!(matches!(
            make_window(WindowKind::LinearTaper, 0, 20, 0),
            Err(ShnolError::BadGeometry(_))
        ));
        assert!(matches!(
            make_window(WindowKind::Sharp, 0, 10, 3),
            Err(ShnolError::BadGeometry(_))
        ));
        assert!(matches!(
            make_window(WindowKind::LinearTaper, 0, 10, 10),
            Err(ShnolError::BadGeometry(_))
        ));
    }

    #[test]
    fn free_certificate_inside_the_band() {
        let sol = free_sol(2.0, 10_004);
        let window = make_window(WindowKind::Sharp, 0, 10_000, 0).unwrap();
        let cert =
            weyl_certificate(&free(), &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
        assert!(cert.bound <= 0.03, "bound = {}", cert.bound);
        assert!(cert.w_norm > 0.0);
    }

    #[test]
    fn certificate_never_undercuts_the_true_distance() {
        // d(-1, [0, 4]) = 1 for the free operator.
        let sol = free_sol(-1.0, 300);
        for r in [50, 100, 250] {
            let window = make_window(WindowKind::Sharp, 0, r, 0).unwrap();
            let cert =
                weyl_certificate(&free(), &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
            assert!(cert.bound >= 1.0 - 1e-6, "r = {r}: bound = {}", cert.bound);
        }
    }

    #[test]
    fn sharp_residual_support_is_two_clusters() {
        let model = CoefficientModel::wimp();
        let sol = solve(&model, 1.3, Form::Eq2, 600, DEFAULT_RESCALE_PERIOD).unwrap();
        // Interior left edge: the n0 - 1 and n0 rows see the mismatch
        // between the cut and the true solution.
        let window = make_window(WindowKind::Sharp, 40, 500, 0).unwrap();
        let cert = weyl_certificate(&model, &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
        for (n, v) in cert.residual.iter() {
            if v != 0.0 {
                assert!(
                    [39, 40, 500, 501].contains(&n),
                    "unexpected residual at site {n}: {v}"
                );
            }
        }
        // Pinning n0 at the lattice start kills the left cluster.
        let window = make_window(WindowKind::Sharp, 1, 500, 0).unwrap();
        let cert = weyl_certificate(&model, &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
        for (n, v) in cert.residual.iter() {
            if v != 0.0 {
                assert!([500, 501].contains(&n), "unexpected residual at site {n}: {v}");
            }
        }
    }

    #[test]
    fn certificate_is_invariant_under_solution_rescaling() {
        let model = CoefficientModel::wimp();
        let sol = solve(&model, 0.7, Form::Eq2, 2000, DEFAULT_RESCALE_PERIOD).unwrap();
        let window = make_window(WindowKind::CosineTaper, 1, 1500, 700).unwrap();
        let a = weyl_certificate(&model, &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
        let b = weyl_certificate(
            &model,
            &sol.rescaled(321.0),
            &window,
            DEFAULT_RESIDUAL_THRESHOLD,
        )
        .unwrap();
        assert!((a.bound - b.bound).abs() <= 1e-12 * a.bound.max(1e-300));
    }

    #[test]
    fn margin_and_zero_vector_errors() {
        let sol = free_sol(2.0, 100);
        let window = make_window(WindowKind::Sharp, 0, 97, 0).unwrap();
        assert!(matches!(
            weyl_certificate(&free(), &sol, &window, 1e-9),
            Err(ShnolError::MarginTooSmall(_))
        ));
        let zero = RecurrenceSolution::from_values(0.0, Form::Eq2, 0, &[0.0; 50]);
        let window = make_window(WindowKind::Sharp, 0, 40, 0).unwrap();
        assert!(matches!(
            weyl_certificate(&free(), &zero, &window, 1e-9),
            Err(ShnolError::ZeroVector)
        ));
    }

    #[test]
    fn optimizer_prefers_large_r_for_the_free_band() {
        let sol = free_sol(2.0, 20_010);
        let cert = optimize_certificate(
            &free(),
            &sol,
            &[1000, 10_000, 20_000],
            &[WindowKind::Sharp],
            DEFAULT_RESIDUAL_THRESHOLD,
        )
        .unwrap();
        assert_eq!(cert.window.r(), 20_000);
    }

    #[test]
    fn sharp_free_bound_decays_like_inverse_sqrt_r() {
        let sol = free_sol(2.0, 101_000);
        let mut pts = Vec::new();
        for r in [100i64, 1000, 10_000, 100_000] {
            let window = make_window(WindowKind::Sharp, 0, r, 0).unwrap();
            let cert =
                weyl_certificate(&free(), &sol, &window, DEFAULT_RESIDUAL_THRESHOLD).unwrap();
            pts.push(((r as f64).ln(), cert.bound.ln()));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mz = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - mz)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() <= 0.1, "decay exponent {slope}");
    }

    #[test]
    fn tail_weight_of_ones_counts_sites() {
        let ones = vec![1.0; 201];
        let sol = RecurrenceSolution::from_values(0.0, Form::Eq2, 0, &ones);
        let f = tail_weight(&free(), &sol, 0, 199).unwrap();
        assert_eq!(f.log_f(0), f64::NEG_INFINITY);
        for r in [1i64, 7, 100, 199] {
            assert!((f.f(r) - r as f64).abs() <= 1e-10 * r as f64, "F({r}) = {}", f.f(r));
        }
    }

    #[test]
    fn tail_weight_is_nondecreasing_for_arbitrary_solutions() {
        let model = CoefficientModel::wimp();
        let sol = solve(&model, -2.2, Form::Eq2, 3000, DEFAULT_RESCALE_PERIOD).unwrap();
        let f = tail_weight(&model, &sol, 1, 3000).unwrap();
        for r in 2..=3000 {
            assert!(f.log_f(r) >= f.log_f(r - 1));
        }
    }

    #[test]
    fn wimp_tail_exponent_is_five_halves() {
        // Summand a² y² ~ n²·n^{-1/2}; the prefix sum grows like r^{5/2}.
        let model = CoefficientModel::wimp();
        let sol = solve(&model, 1.0, Form::Eq2, 20_000, DEFAULT_RESCALE_PERIOD).unwrap();
        let f = tail_weight(&model, &sol, 1, 20_000).unwrap();
        let pts: Vec<(f64, f64)> =
            [1000i64, 2000, 4000, 8000, 16_000].iter().map(|&r| ((r as f64).ln(), f.log_f(r))).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let mz = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - mz)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((2.4..=2.6).contains(&slope), "tail exponent {slope}");
    }

    #[test]
    fn pigeonhole_accepts_polynomial_tails() {
        let log_f: Vec<f64> =
            (0..=500).map(|k| if k == 0 { f64::NEG_INFINITY } else { (k as f64).ln() }).collect();
        let f = TailWeight::from_log_values(0, log_f);
        let hits = pigeonhole_sequence(&f, 0.0, 0.1, 64);
        let expect: Vec<i64> = (64..=496).collect();
        assert_eq!(hits, expect);
    }

    #[test]
    fn pigeonhole_rejects_fast_exponential_tails() {
        let log_f: Vec<f64> = (0..=200).map(|k| 2.0 * k as f64).collect();
        let f = TailWeight::from_log_values(0, log_f);
        assert!(pigeonhole_sequence(&f, 0.0, 0.1, 2).is_empty());
    }

    #[test]
    fn pigeonhole_is_dense_for_the_wimp_tail() {
        let model = CoefficientModel::wimp();
        let sol = solve(&model, 1.0, Form::Eq2, 20_000, DEFAULT_RESCALE_PERIOD).unwrap();
        let f = tail_weight(&model, &sol, 1, 20_000).unwrap();
        let est = crate::recurrence::estimate_growth(&sol, (1000, 20_000)).unwrap();
        let hits = pigeonhole_sequence(&f, est.beta_hat, 0.5, 1000);
        let tested = (20_000 - 4) - 1000 + 1;
        assert!(
            hits.len() as f64 >= 0.9 * tested as f64,
            "only {} of {tested} qualified",
            hits.len()
        );
        // Spot-check the strict inequality on reported r's.
        for &r in hits.iter().step_by(997) {
            assert!(f.log_f(r + 4) < 2.0 * est.beta_hat + 0.5 + f.log_f(r - 2));
        }
    }

    #[test]
    fn difference_bound_trivial_and_hand_cases() {
        let a = vec![1.0; 103];
        let zeros = vec![0.0; 101];
        let out = theorem4_check(&a, &zeros, 0.0, 1, 1, 100, 100).unwrap();
        assert_eq!((out.lhs, out.rhs), (0.0, 0.0));
        assert!(out.holds);

        let y: Vec<f64> = (0..=100).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let out = theorem4_check(&a, &y, 0.0, 1, 1, 100, 100).unwrap();
        assert_eq!(out.lhs, 400.0);
        assert_eq!(out.rhs, 404.0);
        assert!(out.holds);
    }

    #[test]
    fn difference_bound_reports_hypothesis_violations() {
        // a doubles every step; C1 = 0.5 cannot absorb |Δa|/a = 1.
        let a: Vec<f64> = (0..20).map(|k| (2.0f64).powi(k)).collect();
        let y = vec![1.0; 19];
        let err = theorem4_check(&a, &y, 0.5, 1, 2, 10, 17).unwrap_err();
        match err {
            ShnolError::HypothesisViolated { k, .. } => assert_eq!(k, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn bound_curve_closed_forms() {
        let out = shnol_bound_curve(&[0.0, 0.5]);
        assert_eq!(out[0], 0.0);
        assert!((out[1] - 1.3108324944320862).abs() <= 1e-15);
    }

    #[test]
    fn free_operator_ratio_to_bound_curve_stays_below_half_and_a_bit() {
        // d(λ, [0,4]) = -λ and β = arccosh(1 - λ/2) in closed form.
        let mut lambda = -1.0f64;
        let mut max_ratio = 0.0f64;
        while lambda <= -0.01 + 1e-12 {
            let beta = (1.0 - lambda / 2.0).acosh();
            let shape = shnol_bound_curve(&[beta])[0];
            max_ratio = max_ratio.max(-lambda / shape);
            lambda += 0.01;
        }
        assert!(max_ratio <= 0.51, "max ratio {max_ratio}");
        assert!(max_ratio >= 0.40, "max ratio {max_ratio}");
    }
}
