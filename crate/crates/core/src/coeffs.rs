//! Coefficient models for the difference equation
//! `-Δ(a_{n-1} Δy_{n-1}) + b_n y_n = λ y_n` on the half-line lattice
//! `n = start_index, start_index+1, ...` with the Dirichlet convention
//! `y_{start_index-1} = 0`.
//!
//! A model supplies the weights `a_n > 0` and potentials `b_n`. The slot
//! `a_{start_index-1}` only enters the boundary diagonal and is allowed to
//! vanish (it does for the Wimp family, whose natural lattice starts at 1).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("unknown coefficient family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for family `{family}`: {reason}")]
    InvalidParams { family: &'static str, reason: String },
    #[error("index {index} outside valid range [{lo}, {hi}]")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("coefficient a_{index} = {value} is not positive")]
    NonPositiveCoefficient { index: i64, value: f64 },
    #[error("coefficient at index {index} is not finite")]
    NonFinite { index: i64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    /// a_n = a, b_n = b.
    Constant { a: f64, b: f64 },
    /// a_n = (n+1)^p, b_n = 0.  Requires p >= 0 so that a_{-1} = 0^p is finite.
    Power { p: f64 },
    /// a_n = e^{c n}, b_n = b.
    Exponential { c: f64, b: f64 },
    /// a_n = sqrt(n(n+1)), full diagonal b_n + a_n + a_{n-1} = 2n, lattice from n = 1.
    Wimp,
    /// Explicit tables; `a[i]` is a_{start+i}, `b[i]` is b_{start+i}.
    Tabulated { a: Vec<f64>, b: Vec<f64> },
}

/// Immutable description of one operator's coefficients. Cheap to clone,
/// safe to share across threads; closed forms are evaluated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientModel {
    family: Family,
    start_index: i64,
    /// a_{start_index - 1}; enters only the boundary diagonal, may be zero.
    edge_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Constant,
    Power,
    Exponential,
    Wimp,
    Tabulated,
}

impl CoefficientModel {
    /// Looks up a named closed-form family. Parameter layout:
    /// `constant [a, b]`, `power [p]`, `exponential [c]` or `[c, b]`, `wimp []`.
    pub fn builtin(name: &str, params: &[f64]) -> Result<Self, CoefficientError> {
        match name {
            "constant" => {
                let (a, b) = match params {
                    [a] => (*a, 0.0),
                    [a, b] => (*a, *b),
                    _ => {
                        return Err(CoefficientError::InvalidParams {
                            family: "constant",
                            reason: format!("expected [a] or [a, b], got {} params", params.len()),
                        })
                    }
                };
                Self::constant(a, b)
            }
            "power" => match params {
                [p] => Self::power(*p),
                _ => Err(CoefficientError::InvalidParams {
                    family: "power",
                    reason: format!("expected [p], got {} params", params.len()),
                }),
            },
            "exponential" => {
                let (c, b) = match params {
                    [c] => (*c, 0.0),
                    [c, b] => (*c, *b),
                    _ => {
                        return Err(CoefficientError::InvalidParams {
                            family: "exponential",
                            reason: format!("expected [c] or [c, b], got {} params", params.len()),
                        })
                    }
                };
                Self::exponential(c, b)
            }
            "wimp" => {
                if params.is_empty() {
                    Ok(Self::wimp())
                } else {
                    Err(CoefficientError::InvalidParams {
                        family: "wimp",
                        reason: "takes no parameters".into(),
                    })
                }
            }
            other => Err(CoefficientError::UnknownFamily(other.to_string())),
        }
    }

    pub fn constant(a: f64, b: f64) -> Result<Self, CoefficientError> {
        if !(a.is_finite() && a > 0.0) {
            return Err(CoefficientError::InvalidParams {
                family: "constant",
                reason: format!("a = {a} must be finite and positive"),
            });
        }
        if !b.is_finite() {
            return Err(CoefficientError::InvalidParams {
                family: "constant",
                reason: format!("b = {b} must be finite"),
            });
        }
        Ok(Self { family: Family::Constant { a, b }, start_index: 0, edge_weight: a })
    }

    pub fn power(p: f64) -> Result<Self, CoefficientError> {
        // a_{-1} = 0^p: zero for p > 0 (degenerate edge, allowed), one for p = 0,
        // infinite for p < 0, which has no usable boundary diagonal.
        if !p.is_finite() || p < 0.0 {
            return Err(CoefficientError::InvalidParams {
                family: "power",
                reason: format!("p = {p} must be finite and >= 0 (a_-1 = 0^p must be finite)"),
            });
        }
        let edge = if p == 0.0 { 1.0 } else { 0.0 };
        Ok(Self { family: Family::Power { p }, start_index: 0, edge_weight: edge })
    }

    pub fn exponential(c: f64, b: f64) -> Result<Self, CoefficientError> {
        if !c.is_finite() || !b.is_finite() {
            return Err(CoefficientError::InvalidParams {
                family: "exponential",
                reason: format!("c = {c}, b = {b} must be finite"),
            });
        }
        Ok(Self { family: Family::Exponential { c, b }, start_index: 0, edge_weight: (-c).exp() })
    }

    pub fn wimp() -> Self {
        // a_0 = sqrt(0*1) = 0, so the lattice starts at n = 1 with a vanishing
        // edge weight; the Dirichlet convention shifts along with it.
        Self { family: Family::Wimp, start_index: 1, edge_weight: 0.0 }
    }

    /// Builds a model from explicit tables. `a[i]` is `a_{start_index+i}`,
    /// `b[i]` is `b_{start_index+i}`; `edge_a` supplies `a_{start_index-1}`.
    pub fn tabulated(
        a: Vec<f64>,
        b: Vec<f64>,
        start_index: i64,
        edge_a: f64,
    ) -> Result<Self, CoefficientError> {
        if start_index < 0 {
            return Err(CoefficientError::InvalidParams {
                family: "tabulated",
                reason: format!("start_index = {start_index} must be >= 0"),
            });
        }
        if a.is_empty() || b.is_empty() {
            return Err(CoefficientError::InvalidParams {
                family: "tabulated",
                reason: "a and b tables must be nonempty".into(),
            });
        }
        if !(edge_a.is_finite() && edge_a >= 0.0) {
            return Err(CoefficientError::InvalidParams {
                family: "tabulated",
                reason: format!("edge_a = {edge_a} must be finite and >= 0"),
            });
        }
        for (i, &v) in a.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoefficientError::NonFinite { index: start_index + i as i64 });
            }
            if v <= 0.0 {
                return Err(CoefficientError::NonPositiveCoefficient {
                    index: start_index + i as i64,
                    value: v,
                });
            }
        }
        for (i, &v) in b.iter().enumerate() {
            if !v.is_finite() {
                return Err(CoefficientError::NonFinite { index: start_index + i as i64 });
            }
        }
        Ok(Self { family: Family::Tabulated { a, b }, start_index, edge_weight: edge_a })
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Constant { .. } => FamilyKind::Constant,
            Family::Power { .. } => FamilyKind::Power,
            Family::Exponential { .. } => FamilyKind::Exponential,
            Family::Wimp => FamilyKind::Wimp,
            Family::Tabulated { .. } => FamilyKind::Tabulated,
        }
    }

    /// First lattice site of the operator.
    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    /// The boundary slot `a_{start_index-1}`; zero for degenerate edges.
    pub fn edge_weight(&self) -> f64 {
        self.edge_weight
    }

    /// Largest site for which both `eval_a(n)` and `eval_b(n)` are defined,
    /// or `None` when the model is a closed form valid for all n.
    pub fn max_site(&self) -> Option<i64> {
        match &self.family {
            Family::Tabulated { a, b } => {
                Some(self.start_index + a.len().min(b.len()) as i64 - 1)
            }
            _ => None,
        }
    }

    /// Weight `a_n`, defined for `n >= start_index`. Positivity is enforced:
    /// a vanishing or negative weight is an error (the degenerate boundary
    /// slot is only reachable through [`edge_weight`](Self::edge_weight)).
    pub fn eval_a(&self, n: i64) -> Result<f64, CoefficientError> {
        let v = match &self.family {
            Family::Constant { a, .. } => {
                self.check_range(n, self.start_index - 1)?;
                *a
            }
            Family::Power { p } => {
                self.check_range(n, self.start_index - 1)?;
                ((n + 1) as f64).powf(*p)
            }
            Family::Exponential { c, .. } => {
                self.check_range(n, self.start_index - 1)?;
                (*c * n as f64).exp()
            }
            Family::Wimp => {
                self.check_range(n, self.start_index - 1)?;
                ((n * (n + 1)) as f64).sqrt()
            }
            Family::Tabulated { a, .. } => {
                let lo = self.start_index - 1;
                let hi = self.start_index + a.len() as i64 - 1;
                if n < lo || n > hi {
                    return Err(CoefficientError::IndexOutOfRange { index: n, lo, hi });
                }
                if n == lo {
                    self.edge_weight
                } else {
                    a[(n - self.start_index) as usize]
                }
            }
        };
        if !v.is_finite() {
            return Err(CoefficientError::NonFinite { index: n });
        }
        if v <= 0.0 {
            return Err(CoefficientError::NonPositiveCoefficient { index: n, value: v });
        }
        Ok(v)
    }

    /// Potential `b_n`, defined for `n >= start_index`.
    pub fn eval_b(&self, n: i64) -> Result<f64, CoefficientError> {
        let v = match &self.family {
            Family::Constant { b, .. } => {
                self.check_range(n, self.start_index)?;
                *b
            }
            Family::Power { .. } => {
                self.check_range(n, self.start_index)?;
                0.0
            }
            Family::Exponential { b, .. } => {
                self.check_range(n, self.start_index)?;
                *b
            }
            Family::Wimp => {
                self.check_range(n, self.start_index)?;
                // Full diagonal 2n, so b_n = 2n - a_n - a_{n-1}.
                let a_n = ((n * (n + 1)) as f64).sqrt();
                let a_prev = ((n * (n - 1)) as f64).sqrt();
                2.0 * n as f64 - a_n - a_prev
            }
            Family::Tabulated { b, .. } => {
                let lo = self.start_index;
                let hi = self.start_index + b.len() as i64 - 1;
                if n < lo || n > hi {
                    return Err(CoefficientError::IndexOutOfRange { index: n, lo, hi });
                }
                b[(n - lo) as usize]
            }
        };
        if !v.is_finite() {
            return Err(CoefficientError::NonFinite { index: n });
        }
        Ok(v)
    }

    /// Full diagonal `b_n + a_n + a_{n-1}`; the boundary site uses the edge slot.
    pub fn diagonal(&self, n: i64) -> Result<f64, CoefficientError> {
        let a_n = self.eval_a(n)?;
        let a_prev =
            if n == self.start_index { self.edge_weight } else { self.eval_a(n - 1)? };
        Ok(self.eval_b(n)? + a_n + a_prev)
    }

    fn check_range(&self, n: i64, lo: i64) -> Result<(), CoefficientError> {
        if n < lo {
            return Err(CoefficientError::IndexOutOfRange { index: n, lo, hi: i64::MAX });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wimp_weight_matches_closed_form() {
        let m = CoefficientModel::wimp();
        assert_eq!(m.eval_a(3).unwrap(), 12f64.sqrt());
        assert!((m.eval_a(3).unwrap() - 3.4641016151377544).abs() < 1e-13);
    }

    #[test]
    fn wimp_potential_keeps_full_diagonal_two_n() {
        let m = CoefficientModel::wimp();
        // b_4 = 8 - sqrt(20) - sqrt(12) = 0.06376242986266...
        let b4 = m.eval_b(4).unwrap();
        assert_eq!(b4, 8.0 - 20f64.sqrt() - 12f64.sqrt());
        assert!((b4 - 0.063762429862666).abs() < 1e-13);
        for n in 1..200 {
            let d = m.diagonal(n).unwrap();
            assert!((d - 2.0 * n as f64).abs() < 1e-10, "diagonal at {n} was {d}");
        }
    }

    #[test]
    fn wimp_edge_slot_vanishes_and_eval_rejects_it() {
        let m = CoefficientModel::wimp();
        assert_eq!(m.edge_weight(), 0.0);
        assert!(matches!(
            m.eval_a(0),
            Err(CoefficientError::NonPositiveCoefficient { index: 0, .. })
        ));
    }

    #[test]
    fn builtin_free_jacobi() {
        let m = CoefficientModel::builtin("constant", &[1.0, 0.0]).unwrap();
        assert_eq!(m.eval_a(17).unwrap(), 1.0);
        assert_eq!(m.eval_b(17).unwrap(), 0.0);
        assert_eq!(m.diagonal(0).unwrap(), 2.0);
    }

    #[test]
    fn negative_power_is_rejected() {
        // a_{-1} = 0^{-1} has no finite value, so the family refuses p < 0.
        assert!(matches!(
            CoefficientModel::builtin("power", &[-1.0]),
            Err(CoefficientError::InvalidParams { family: "power", .. })
        ));
    }

    #[test]
    fn unknown_family_is_reported_by_name() {
        match CoefficientModel::builtin("cauchy", &[]) {
            Err(CoefficientError::UnknownFamily(name)) => assert_eq!(name, "cauchy"),
            other => panic!("expected UnknownFamily, got {other:?}"),
        }
    }

    #[test]
    fn tabulated_reproduces_entries_bit_exactly() {
        let a = vec![1.5, 2.5, 3.5];
        let b = vec![1.0, 2.0, 3.0];
        let m = CoefficientModel::tabulated(a.clone(), b.clone(), 0, 0.25).unwrap();
        assert_eq!(m.eval_b(1).unwrap(), 2.0);
        for i in 0..3 {
            assert_eq!(m.eval_a(i as i64).unwrap().to_bits(), a[i].to_bits());
            assert_eq!(m.eval_b(i as i64).unwrap().to_bits(), b[i].to_bits());
        }
        assert_eq!(m.eval_a(-1).unwrap(), 0.25);
        assert!(matches!(m.eval_a(3), Err(CoefficientError::IndexOutOfRange { .. })));
    }

    #[test]
    fn tabulated_rejects_nonpositive_weights() {
        let err = CoefficientModel::tabulated(vec![1.0, 0.0], vec![0.0, 0.0], 0, 1.0);
        assert!(matches!(err, Err(CoefficientError::NonPositiveCoefficient { index: 1, .. })));
    }

    #[test]
    fn builtin_positivity_sweep() {
        for (name, params) in [
            ("constant", &[2.0, -1.0][..]),
            ("power", &[0.5][..]),
            ("exponential", &[0.01][..]),
            ("wimp", &[][..]),
        ] {
            let m = CoefficientModel::builtin(name, params).unwrap();
            let start = m.start_index();
            let mut n = start;
            // Exponential growth overflows past c*n ~ 709; stay within range.
            let cap = if name == "exponential" { 70_000 } else { 1_000_000 };
            while n <= cap {
                assert!(m.eval_a(n).unwrap() > 0.0);
                assert!(m.eval_b(n).unwrap().is_finite());
                n = if n < 64 { n + 1 } else { n * 7 / 4 };
            }
        }
    }
}
