//! The half-line operator as exact actions on finitely supported vectors,
//! plus symmetric tridiagonal finite sections with Dirichlet edges.
//!
//! `apply` never truncates: the output support grows by one site at each
//! end (clipped at the lattice edge), so residuals of compactly supported
//! vectors are the honest infinite-operator residuals. That exactness is
//! what makes the spectral certificates in the `shnol` module rigorous.

use crate::coeffs::{CoefficientError, CoefficientModel};
use crate::recurrence::Form;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error("support [{lo}, {hi}] out of range: {reason}")]
    SupportOutOfRange { lo: i64, hi: i64, reason: String },
    #[error("weight c at index {index} is {value}, must be positive")]
    NonPositiveWeight { index: i64, value: f64 },
    #[error("transform coefficient p at index {index} is zero")]
    ZeroOffdiagonal { index: i64 },
    #[error("invalid shape: {0}")]
    BadShape(String),
}

/// A finitely supported vector on the operator lattice, stored densely on
/// `start ..= start + values.len() - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    start: i64,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(start: i64, values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.is_empty() {
            return Err(OperatorError::BadShape("support must be non-empty".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(OperatorError::BadShape(format!(
                "value at site {} is not finite",
                start + k as i64
            )));
        }
        Ok(Self { start, values })
    }

    pub fn indicator(site: i64) -> Self {
        Self { start: site, values: vec![1.0] }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at site `n`; zero outside the stored support.
    pub fn value(&self, n: i64) -> f64 {
        if n < self.start || n > self.end() {
            0.0
        } else {
            self.values[(n - self.start) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(k, &v)| (self.start + k as i64, v))
    }

    /// Euclidean norm, scaled to avoid overflow for extreme entries.
    pub fn norm(&self) -> f64 {
        let m = self.max_abs();
        if m == 0.0 {
            return 0.0;
        }
        let s: f64 = self.values.iter().map(|v| (v / m) * (v / m)).sum();
        m * s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { start: self.start, values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// N-by-N Dirichlet truncation over sites `start ..= start + N - 1`.
/// `diag[k]` is the full diagonal `b_n + a_n + a_{n-1}` at `n = start + k`;
/// `offdiag[k]` is the signed entry coupling sites `start+k` and
/// `start+k+1`: `-a_n` in form `Eq1`, `+a_n` in form `Eq2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSection {
    start: i64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    form: Form,
}

impl FiniteSection {
    pub fn new(
        start: i64,
        diag: Vec<f64>,
        offdiag: Vec<f64>,
        form: Form,
    ) -> Result<Self, OperatorError> {
        if diag.is_empty() {
            return Err(OperatorError::BadShape("section must have dimension >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(OperatorError::BadShape(format!(
                "offdiag length {} must be diag length {} minus one",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(OperatorError::BadShape("entries must be finite".into()));
        }
        if offdiag.iter().any(|&e| e == 0.0) {
            return Err(OperatorError::BadShape("offdiag entries must be nonzero".into()));
        }
        Ok(Self { start, diag, offdiag, form })
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

/// Dirichlet truncation of the operator to its first `n` sites.
pub fn finite_section(
    model: &CoefficientModel,
    n: usize,
    form: Form,
) -> Result<FiniteSection, OperatorError> {
    if n == 0 {
        return Err(OperatorError::BadShape("section must have dimension >= 1".into()));
    }
    let start = model.start_index();
    let sign = match form {
        Form::Eq1 => -1.0,
        Form::Eq2 => 1.0,
    };
    let mut diag = Vec::with_capacity(n);
    let mut offdiag = Vec::with_capacity(n - 1);
    for k in 0..n as i64 {
        diag.push(model.diagonal(start + k)?);
        if k + 1 < n as i64 {
            offdiag.push(sign * model.eval_a(start + k)?);
        }
    }
    FiniteSection::new(start, diag, offdiag, form)
}

/// The `(-1)^n` similarity: flips offdiagonal signs and the form tag.
/// Involutive bit-for-bit; the spectrum is unchanged.
pub fn gauge_conjugate(sec: &FiniteSection) -> FiniteSection {
    FiniteSection {
        start: sec.start,
        diag: sec.diag.clone(),
        offdiag: sec.offdiag.iter().map(|e| -e).collect(),
        form: match sec.form {
            Form::Eq1 => Form::Eq2,
            Form::Eq2 => Form::Eq1,
        },
    }
}

/// `(B - λ)w` for the self-adjoint form of the operator (`Eq1` signs).
pub fn apply(
    model: &CoefficientModel,
    w: &SparseVector,
    lambda: f64,
) -> Result<SparseVector, OperatorError> {
    apply_form(model, Form::Eq1, w, lambda)
}

/// `(B - λ)w` with the off-diagonal sign convention of `form`.
///
/// The result is exact up to one rounding per term: each output entry is a
/// sum of at most three products. The output support is the input support
/// widened by one site at each end, clipped to the lattice (the row at
/// `start - 1` does not exist for the half-line operator).
pub fn apply_form(
    model: &CoefficientModel,
    form: Form,
    w: &SparseVector,
    lambda: f64,
) -> Result<SparseVector, OperatorError> {
    let start = model.start_index();
    if w.start() < start {
        return Err(OperatorError::SupportOutOfRange {
            lo: w.start(),
            hi: w.end(),
            reason: format!("support begins before the lattice start {start}"),
        });
    }
    if let Some(max) = model.max_site() {
        if w.end() + 1 > max {
            return Err(OperatorError::SupportOutOfRange {
                lo: w.start(),
                hi: w.end(),
                reason: format!("need one-site margin: support end + 1 exceeds max site {max}"),
            });
        }
    }
    let sign = match form {
        Form::Eq1 => -1.0,
        Form::Eq2 => 1.0,
    };

    let res_lo = (w.start() - 1).max(start);
    let res_hi = w.end() + 1;
    let mut out = vec![0.0f64; (res_hi - res_lo + 1) as usize];
    for (k, wk) in w.iter() {
        if wk == 0.0 {
            continue;
        }
        let a_k = model.eval_a(k)?;
        let d_k = model.diagonal(k)?;
        out[(k - res_lo) as usize] += (d_k - lambda) * wk;
        out[(k + 1 - res_lo) as usize] += sign * a_k * wk;
        if k - 1 >= start {
            let a_left = model.eval_a(k - 1)?;
            out[(k - 1 - res_lo) as usize] += sign * a_left * wk;
        }
    }
    Ok(SparseVector { start: res_lo, values: out })
}

/// Weighted change of variables reducing the pencil
/// `-p_n y_{n+1} + q_n y_n - p_{n-1} y_{n-1} = λ c_n y_n` to Jacobi form:
/// `ã_n = |p_n| (c_n c_{n+1})^{-1/2}`, full diagonal `q_n / c_n`.
///
/// Slices are indexed from `start`: `p[k] = p_{start+k}`, `q[k] =
/// q_{start+k}`, and `c` carries one extra trailing weight `c_{start+k}`
/// for `k = 0 ..= p.len()`. Signs of `p` are gauged away; a diagonal `±1`
/// conjugation makes every off-diagonal positive without moving
/// eigenvalues.
pub fn hinton_lewis(
    p: &[f64],
    q: &[f64],
    c: &[f64],
    start: i64,
) -> Result<CoefficientModel, OperatorError> {
    let n = p.len();
    if n == 0 {
        return Err(OperatorError::BadShape("need at least one site".into()));
    }
    if q.len() != n || c.len() != n + 1 {
        return Err(OperatorError::BadShape(format!(
            "expected q of length {n} and c of length {}, got {} and {}",
            n + 1,
            q.len(),
            c.len()
        )));
    }
    for (k, &ck) in c.iter().enumerate() {
        if !(ck > 0.0) || !ck.is_finite() {
            return Err(OperatorError::NonPositiveWeight { index: start + k as i64, value: ck });
        }
    }
    if let Some(k) = p.iter().position(|&pk| pk == 0.0) {
        return Err(OperatorError::ZeroOffdiagonal { index: start + k as i64 });
    }

    let a: Vec<f64> = (0..n).map(|k| p[k].abs() / (c[k] * c[k + 1]).sqrt()).collect();
    // The model stores the potential b; the Jacobi diagonal q_n / c_n is
    // recovered as b + a_n + a_{n-1} with the edge weight a_{start-1} = 0.
    let b: Vec<f64> = (0..n)
        .map(|k| {
            let a_left = if k == 0 { 0.0 } else { a[k - 1] };
            q[k] / c[k] - a[k] - a_left
        })
        .collect();
    Ok(CoefficientModel::tabulated(a, b, start, 0.0)?)
}
