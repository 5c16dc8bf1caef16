//! Shared oracle for the integration tests: a dense cyclic-Jacobi
//! eigensolver, fully independent of the bisection code under test.

#![allow(dead_code)]

use weylcert::FiniteSection;

pub fn section_to_dense(sec: &FiniteSection) -> Vec<Vec<f64>> {
    let n = sec.size();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = sec.diag()[i];
        if i + 1 < n {
            m[i][i + 1] = sec.offdiag()[i];
            m[i + 1][i] = sec.offdiag()[i];
        }
    }
    m
}

/// Cyclic Jacobi rotations on a dense symmetric matrix, sorted ascending.
/// Quadratic convergence makes 100 sweeps far more than any test size
/// needs; the loop normally exits after a handful.
pub fn symmetric_eigenvalues(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    let frob: f64 = m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob.max(1e-300) {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq.abs() <= 1e-300 * frob.max(1.0) {
                    m[p][q] = 0.0;
                    m[q][p] = 0.0;
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                // Guard theta^2 against overflow; the small-angle limit of
                // the stable rotation formula is 1/(2 theta).
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k][p];
                    let akq = m[k][q];
                    m[k][p] = c * akp - s * akq;
                    m[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p][k];
                    let aqk = m[q][k];
                    m[p][k] = c * apk - s * aqk;
                    m[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    evs
}
