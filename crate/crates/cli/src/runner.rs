//! Command dispatch. Every command reads one config, writes
//! `<out>/<command>.csv` (presets write several prefixed files) plus a
//! `.meta` echo, and returns the process exit code: 0 for success, 2 when
//! a hypothesis check came back negative.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;
use weylcert::{
    check_theorem5_hypotheses, default_tol, eigenvalues, estimate_growth, finite_section,
    fmt_float, hypothesis_report, optimize_certificate, solve, spectral_distance,
    write_certificates_csv, write_solution_csv, write_spectrum_csv, CoefficientModel, Form,
    PerturbSeq, PerturbationPair, WindowKind, DEFAULT_RESCALE_PERIOD,
    DEFAULT_RESIDUAL_THRESHOLD,
};

use crate::config::{CommandKind, ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
/// A hypothesis check (classify, perturb, wimp report) came back negative.
pub const EXIT_HYPOTHESIS_FAILED: i32 = 2;

/// Scan thresholds: a λ joins the candidate set when the polynomial
/// envelope fit is this good and the exponential rate is below the cut.
pub const DEFAULT_BETA_CUT: f64 = 1e-3;
pub const DEFAULT_RESIDUAL_RMS: f64 = 0.1;

/// Preset used by the `wimp` command.
const WIMP_SPECTRUM_SIZE: usize = 2000;
const WIMP_REPORT_HORIZON: i64 = 100_000;
const WIMP_R_GRID: [i64; 5] = [1024, 4096, 16384, 65536, 100_000];
const WIMP_LAMBDA: (f64, f64, f64) = (-3.0, 3.0, 0.25);

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

fn fail(e: impl std::fmt::Display) -> RunError {
    RunError::Failed(e.to_string())
}

pub struct Runner {
    config: ExperimentConfig,
    out_dir: PathBuf,
    threads: usize,
}

impl Runner {
    pub fn new(config: ExperimentConfig, out_dir: PathBuf, threads: usize) -> Self {
        Runner { config, out_dir, threads }
    }

    pub fn run(&self) -> Result<i32, RunError> {
        if self.threads == 0 {
            return Err(RunError::Failed("--threads must be >= 1".into()));
        }
        fs::create_dir_all(&self.out_dir)
            .map_err(|source| RunError::Io { path: self.out_dir.clone(), source })?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(fail)?;
        let mut meta: Vec<(String, String)> = Vec::new();
        let code = pool.install(|| match self.config.command {
            CommandKind::Solve => self.cmd_solve(&mut meta),
            CommandKind::Spectrum => self.cmd_spectrum(&mut meta),
            CommandKind::Classify => self.cmd_classify(&mut meta),
            CommandKind::Shnol => self.cmd_shnol(&mut meta),
            CommandKind::Scan => self.cmd_scan(&mut meta),
            CommandKind::Perturb => self.cmd_perturb(&mut meta),
            CommandKind::Wimp => self.cmd_wimp(&mut meta),
        })?;
        self.write_meta(&meta, code)?;
        Ok(code)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, RunError> {
        let path = self.out_dir.join(name);
        let file =
            File::create(&path).map_err(|source| RunError::Io { path: path.clone(), source })?;
        Ok(BufWriter::new(file))
    }

    fn io(&self, name: &str, e: std::io::Error) -> RunError {
        RunError::Io { path: self.out_dir.join(name), source: e }
    }

    fn write_meta(&self, extra: &[(String, String)], code: i32) -> Result<(), RunError> {
        let name = format!("{}.meta", self.config.command.name());
        let mut out = self.create(&name)?;
        let echo = serde_json::to_string(&self.config).map_err(fail)?;
        let mut text = format!(
            "tool=weylcert {}\ncommand={}\nthreads={}\nexit={code}\n",
            env!("CARGO_PKG_VERSION"),
            self.config.command.name(),
            self.threads,
        );
        for (k, v) in extra {
            text.push_str(&format!("{k}={v}\n"));
        }
        text.push_str(&format!("config={echo}\n"));
        out.write_all(text.as_bytes()).map_err(|e| self.io(&name, e))?;
        out.flush().map_err(|e| self.io(&name, e))
    }

    fn rescale_period(&self) -> usize {
        self.config.rescale_period.unwrap_or(DEFAULT_RESCALE_PERIOD)
    }

    fn window_kinds(&self) -> Vec<WindowKind> {
        match &self.config.kinds {
            Some(ks) => ks.iter().map(|k| k.build()).collect(),
            None => vec![WindowKind::Sharp, WindowKind::LinearTaper, WindowKind::CosineTaper],
        }
    }

    fn cmd_solve(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = self.config.require_model()?;
        let lambda = match self.config.lambda {
            Some(l) if l.is_finite() => l,
            _ => return Err(ConfigError::Invalid("solve needs a finite `lambda`".into()).into()),
        };
        let n = self.config.require_n()?;
        let horizon = model.start_index() + n as i64;
        let sol =
            solve(&model, lambda, Form::Eq2, horizon, self.rescale_period()).map_err(fail)?;
        let mut out = self.create("solve.csv")?;
        write_solution_csv(&mut out, &sol).map_err(|e| self.io("solve.csv", e))?;
        out.flush().map_err(|e| self.io("solve.csv", e))?;
        meta.push(("lambda".into(), fmt_float(lambda)));
        meta.push(("last_site".into(), horizon.to_string()));
        Ok(EXIT_OK)
    }

    fn cmd_spectrum(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = self.config.require_model()?;
        let n = self.config.require_n()?;
        let sec = finite_section(&model, n, Form::Eq2).map_err(fail)?;
        let tol = self.config.tol.unwrap_or_else(|| default_tol(&sec));
        let spec = eigenvalues(&sec, tol);
        let mut out = self.create("spectrum.csv")?;
        write_spectrum_csv(&mut out, &spec).map_err(|e| self.io("spectrum.csv", e))?;
        out.flush().map_err(|e| self.io("spectrum.csv", e))?;
        meta.push(("n".into(), n.to_string()));
        meta.push(("tol".into(), fmt_float(tol)));
        Ok(EXIT_OK)
    }

    fn cmd_classify(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = self.config.require_model()?;
        let n = self.config.require_n()?;
        let horizon = model.start_index() + n as i64;
        let report = hypothesis_report(&model, self.config.n0, horizon).map_err(fail)?;
        let mut out = self.create("classify.csv")?;
        let mut text = String::from("key,value\n");
        for (k, v) in report.key_values() {
            text.push_str(&format!("{k},{v}\n"));
        }
        out.write_all(text.as_bytes()).map_err(|e| self.io("classify.csv", e))?;
        out.flush().map_err(|e| self.io("classify.csv", e))?;
        meta.push(("eligible".into(), report.eligible().to_string()));
        if report.eligible() {
            Ok(EXIT_OK)
        } else {
            Ok(EXIT_HYPOTHESIS_FAILED)
        }
    }

    fn cmd_shnol(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = self.config.require_model()?;
        let lambdas = self.config.require_lambda_grid()?;
        let r_grid = match &self.config.r_grid {
            Some(g) if !g.is_empty() => g.clone(),
            _ => return Err(ConfigError::Invalid("shnol needs a nonempty `r_grid`".into()).into()),
        };
        let max_r = *r_grid.iter().max().unwrap();
        let mut horizon = max_r + 4;
        if let Some(n) = self.config.n {
            let h = model.start_index() + n as i64;
            if h < horizon {
                return Err(ConfigError::Invalid(format!(
                    "`n` = {n} leaves no margin past the largest r = {max_r}"
                ))
                .into());
            }
            horizon = h;
        }
        let kinds = self.window_kinds();
        let threshold = self.config.threshold.unwrap_or(DEFAULT_RESIDUAL_THRESHOLD);
        let period = self.rescale_period();
        let certs = lambdas
            .par_iter()
            .map(|&lam| {
                let sol = solve(&model, lam, Form::Eq2, horizon, period).map_err(fail)?;
                optimize_certificate(&model, &sol, &r_grid, &kinds, threshold).map_err(fail)
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let mut out = self.create("shnol.csv")?;
        write_certificates_csv(&mut out, &certs).map_err(|e| self.io("shnol.csv", e))?;
        out.flush().map_err(|e| self.io("shnol.csv", e))?;
        let worst = certs.iter().map(|c| c.bound).fold(0.0f64, f64::max);
        meta.push(("max_bound".into(), fmt_float(worst)));
        meta.push(("threshold".into(), fmt_float(threshold)));
        Ok(EXIT_OK)
    }

    fn cmd_scan(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = self.config.require_model()?;
        let lambdas = self.config.require_lambda_grid()?;
        let n = self.config.require_n()?;
        if n < 32 {
            return Err(ConfigError::Invalid("scan needs `n` >= 32 for the growth fit".into())
                .into());
        }
        let beta_cut = self.config.beta_cut.unwrap_or(DEFAULT_BETA_CUT);
        let rms_cut = self.config.residual_rms.unwrap_or(DEFAULT_RESIDUAL_RMS);
        let sec = finite_section(&model, n, Form::Eq2).map_err(fail)?;
        let tol = self.config.tol.unwrap_or_else(|| default_tol(&sec));
        let spec = eigenvalues(&sec, tol);
        let start = model.start_index();
        let horizon = start + n as i64;
        let period = self.rescale_period();
        let rows = lambdas
            .par_iter()
            .map(|&lam| {
                let sol = solve(&model, lam, Form::Eq2, horizon, period).map_err(fail)?;
                let g = estimate_growth(&sol, (start + n as i64 / 2, horizon)).map_err(fail)?;
                let in_e = g.beta_hat <= beta_cut && g.theta_residual_rms <= rms_cut;
                let dist = spectral_distance(&spec, lam).map_err(fail)?;
                Ok((lam, g.beta_hat, g.theta_hat, in_e, dist))
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let mut text = String::from("lambda,beta_hat,theta_hat,in_E,dist\n");
        let mut max_dist = f64::NAN;
        for (lam, beta, theta, in_e, dist) in &rows {
            text.push_str(&format!(
                "{},{},{},{in_e},{}\n",
                fmt_float(*lam),
                fmt_float(*beta),
                fmt_float(*theta),
                fmt_float(*dist)
            ));
            if *in_e && !(*dist <= max_dist) {
                max_dist = *dist;
            }
        }
        let mut out = self.create("scan.csv")?;
        out.write_all(text.as_bytes()).map_err(|e| self.io("scan.csv", e))?;
        out.flush().map_err(|e| self.io("scan.csv", e))?;
        meta.push(("beta_cut".into(), fmt_float(beta_cut)));
        meta.push(("residual_rms".into(), fmt_float(rms_cut)));
        meta.push(("max_dist_in_E".into(), fmt_float(max_dist)));
        Ok(EXIT_OK)
    }

    fn cmd_perturb(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let base = self.config.require_model()?;
        let eta = match &self.config.eta {
            Some(e) => e.build(),
            None => PerturbSeq::Zero,
        };
        let psi = match &self.config.psi {
            Some(p) => p.build(),
            None => PerturbSeq::Zero,
        };
        let alpha = self.config.alpha.unwrap_or(1.0);
        let n_list: Vec<usize> = match &self.config.n_list {
            Some(l) if !l.is_empty() => l.clone(),
            _ => {
                return Err(
                    ConfigError::Invalid("perturb needs a nonempty `n_list`".into()).into()
                )
            }
        };
        let window = match self.config.window {
            Some(w) => w,
            None => {
                return Err(ConfigError::Invalid(
                    "perturb needs a `window` = [lo, hi]".into(),
                )
                .into())
            }
        };
        let tol = self.config.tol.unwrap_or(1e-10);
        let pair = PerturbationPair::new(base, eta, psi, alpha).map_err(fail)?;
        let report =
            check_theorem5_hypotheses(&pair, *n_list.last().unwrap()).map_err(fail)?;
        let rows =
            weylcert::essential_spectrum_compare(&pair, &n_list, window, tol).map_err(fail)?;

        let mut text = String::from("n,hausdorff,counting_discrepancy\n");
        for row in &rows {
            text.push_str(&format!(
                "{},{},{}\n",
                row.n,
                fmt_float(row.hausdorff),
                row.counting_discrepancy
            ));
        }
        let mut out = self.create("perturb.csv")?;
        out.write_all(text.as_bytes()).map_err(|e| self.io("perturb.csv", e))?;
        out.flush().map_err(|e| self.io("perturb.csv", e))?;

        let mut rep = String::from("key,value\n");
        rep.push_str(&format!(
            "b_alpha_from,{}\n",
            report.b_alpha_from.map_or("none".into(), |s| s.to_string())
        ));
        for (k, v) in [
            ("b_alpha_ok", report.b_alpha_ok),
            ("eta_vanishing", report.eta_vanishing),
            ("psi_vanishing", report.psi_vanishing),
            ("positivity_ok", report.positivity_ok),
            ("satisfied", report.satisfied),
        ] {
            rep.push_str(&format!("{k},{v}\n"));
        }
        let mut rout = self.create("perturb_report.csv")?;
        rout.write_all(rep.as_bytes()).map_err(|e| self.io("perturb_report.csv", e))?;
        rout.flush().map_err(|e| self.io("perturb_report.csv", e))?;

        meta.push(("satisfied".into(), report.satisfied.to_string()));
        if report.satisfied {
            Ok(EXIT_OK)
        } else {
            Ok(EXIT_HYPOTHESIS_FAILED)
        }
    }

    fn cmd_wimp(&self, meta: &mut Vec<(String, String)>) -> Result<i32, RunError> {
        let model = CoefficientModel::wimp();

        let report = hypothesis_report(&model, None, WIMP_REPORT_HORIZON).map_err(fail)?;
        let mut rep = String::from("key,value\n");
        for (k, v) in report.key_values() {
            rep.push_str(&format!("{k},{v}\n"));
        }
        let mut rout = self.create("wimp_report.csv")?;
        rout.write_all(rep.as_bytes()).map_err(|e| self.io("wimp_report.csv", e))?;
        rout.flush().map_err(|e| self.io("wimp_report.csv", e))?;

        let sec = finite_section(&model, WIMP_SPECTRUM_SIZE, Form::Eq2).map_err(fail)?;
        let spec = eigenvalues(&sec, default_tol(&sec));
        let mut sout = self.create("wimp_spectrum.csv")?;
        write_spectrum_csv(&mut sout, &spec).map_err(|e| self.io("wimp_spectrum.csv", e))?;
        sout.flush().map_err(|e| self.io("wimp_spectrum.csv", e))?;

        let (lo, hi, step) = WIMP_LAMBDA;
        let count = ((hi - lo) / step).round() as usize + 1;
        let lambdas: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
        let horizon = WIMP_R_GRID[WIMP_R_GRID.len() - 1] + 4;
        let kinds = [WindowKind::LinearTaper, WindowKind::CosineTaper];
        let certs = lambdas
            .par_iter()
            .map(|&lam| {
                let sol = solve(&model, lam, Form::Eq2, horizon, DEFAULT_RESCALE_PERIOD)
                    .map_err(fail)?;
                optimize_certificate(
                    &model,
                    &sol,
                    &WIMP_R_GRID,
                    &kinds,
                    DEFAULT_RESIDUAL_THRESHOLD,
                )
                .map_err(fail)
            })
            .collect::<Result<Vec<_>, RunError>>()?;
        let mut cout = self.create("wimp_certificates.csv")?;
        write_certificates_csv(&mut cout, &certs)
            .map_err(|e| self.io("wimp_certificates.csv", e))?;
        cout.flush().map_err(|e| self.io("wimp_certificates.csv", e))?;

        let worst = certs.iter().map(|c| c.bound).fold(0.0f64, f64::max);
        meta.push(("eligible".into(), report.eligible().to_string()));
        meta.push(("max_bound".into(), fmt_float(worst)));
        if report.eligible() {
            Ok(EXIT_OK)
        } else {
            Ok(EXIT_HYPOTHESIS_FAILED)
        }
    }
}
