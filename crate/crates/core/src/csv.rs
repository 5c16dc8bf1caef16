//! CSV export with a pinned float format: every value is written as
//! `{:.16e}` (17 significant digits), which round-trips f64 exactly, and
//! rows end in a bare LF. Output is a pure function of the data, so runs
//! are byte-comparable.

use crate::eigen::SpectrumApproximation;
use crate::operator::FiniteSection;
use crate::recurrence::RecurrenceSolution;
use crate::shnol::WeylCertificate;
use std::io::{self, Write};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_solution_csv(
    out: &mut impl Write,
    sol: &RecurrenceSolution,
) -> io::Result<()> {
    out.write_all(b"n,mantissa,log_scale,log_abs_y\n")?;
    for n in sol.sites() {
        writeln!(
            out,
            "{n},{},{},{}",
            fmt_float(sol.mantissa(n)),
            fmt_float(sol.log_scale(n)),
            fmt_float(sol.log_abs(n)),
        )?;
    }
    Ok(())
}

pub fn write_section_csv(out: &mut impl Write, sec: &FiniteSection) -> io::Result<()> {
    out.write_all(b"n,diag,offdiag\n")?;
    let start = sec.start();
    for (k, &d) in sec.diag().iter().enumerate() {
        let off = sec.offdiag().get(k).map(|&e| fmt_float(e)).unwrap_or_default();
        writeln!(out, "{},{},{off}", start + k as i64, fmt_float(d))?;
    }
    Ok(())
}

pub fn write_spectrum_csv(
    out: &mut impl Write,
    spec: &SpectrumApproximation,
) -> io::Result<()> {
    out.write_all(b"k,lambda_k\n")?;
    for (k, &ev) in spec.eigenvalues().iter().enumerate() {
        writeln!(out, "{},{}", k + 1, fmt_float(ev))?;
    }
    Ok(())
}

pub fn write_certificates_csv(
    out: &mut impl Write,
    certs: &[WeylCertificate],
) -> io::Result<()> {
    out.write_all(b"lambda,kind,n0,r,W,w_norm,residual_norm,bound,threshold\n")?;
    for c in certs {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_float(c.lambda),
            c.window.kind().label(),
            c.window.n0(),
            c.window.r(),
            c.window.width(),
            fmt_float(c.w_norm),
            fmt_float(c.residual_norm),
            fmt_float(c.bound),
            fmt_float(c.threshold),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientModel;
    use crate::eigen::SpectrumApproximation;
    use crate::operator::finite_section;
    use crate::recurrence::Form;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(-0.5), "-5.0000000000000000e-1");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn float_format_round_trips() {
        for &x in &[0.1, 2.0f64.sqrt(), 1e300, 5e-324, -3.5e-90, f64::MAX] {
            let parsed: f64 = fmt_float(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x}");
        }
    }

    #[test]
    fn solution_csv_shape() {
        let sol = RecurrenceSolution::from_values(0.0, Form::Eq2, 0, &[0.0, 1.0, 2.0]);
        let mut buf = Vec::new();
        write_solution_csv(&mut buf, &sol).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,mantissa,log_scale,log_abs_y");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0,1.0000000000000000e0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn section_csv_last_row_has_no_offdiag() {
        let model = CoefficientModel::constant(1.0, 0.0).unwrap();
        let sec = finite_section(&model, 3, Form::Eq2).unwrap();
        let mut buf = Vec::new();
        write_section_csv(&mut buf, &sec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "0,2.0000000000000000e0,1.0000000000000000e0");
        assert_eq!(lines[3], "2,2.0000000000000000e0,");
    }

    #[test]
    fn spectrum_csv_is_one_indexed() {
        let spec = SpectrumApproximation::from_sorted(vec![0.25, 0.5], 1e-10);
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "k,lambda_k\n1,2.5000000000000000e-1\n2,5.0000000000000000e-1\n");
    }
}
