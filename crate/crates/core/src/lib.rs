//! Numerical toolkit for self-adjoint second-order difference equations
//! on the half line: overflow-safe solution of the three-term recurrence,
//! finite sections with a Sturm-bisection eigensolver, Weyl-vector
//! certificates bounding the distance from λ to the spectrum, growth and
//! limit-point hypothesis checks, and perturbation experiments.
//!
//! The pieces compose into one pipeline: solve the recurrence at λ, cut
//! the solution down to finite support with a window, and convert the
//! exact residual into a certified upper bound on d(λ, σ(B)). Everything
//! else (eigensolver, tail weights, classifiers) exists to validate or
//! steer that pipeline.

pub mod classify;
pub mod coeffs;
pub mod csv;
pub mod eigen;
pub mod operator;
pub mod perturb;
pub mod recurrence;
pub mod shnol;

pub use classify::{
    carleman, carleman_with, check_delta_a, fit_gamma, hypothesis_report, ClassifyError,
    DeltaRatioReport, GammaFit, HypothesisReport, LimitPointVerdict,
};
pub use coeffs::{CoefficientError, CoefficientModel, FamilyKind};
pub use csv::{
    fmt_float, write_certificates_csv, write_section_csv, write_solution_csv, write_spectrum_csv,
};
pub use eigen::{
    count_below, default_tol, eigenvalues, gershgorin_bounds, spectral_distance, spectrum_gaps,
    EigenError, SpectrumApproximation,
};
pub use operator::{
    apply, apply_form, finite_section, gauge_conjugate, hinton_lewis, FiniteSection,
    OperatorError, SparseVector,
};
pub use perturb::{
    check_theorem5_hypotheses, essential_spectrum_compare, hausdorff_distance, perturbed_tables,
    ConvergenceRow, PerturbError, PerturbSeq, PerturbationPair, Theorem5Report,
};
pub use recurrence::{
    estimate_growth, gauge_map, orthonormal_polynomials, solve, verify_residual, Form,
    GrowthEstimate, RecurrenceError, RecurrenceSolution, DEFAULT_RESCALE_PERIOD, RESCALE_CAP,
};
pub use shnol::{
    make_window, optimize_certificate, pigeonhole_sequence, shnol_bound_curve, tail_weight,
    theorem4_check, weyl_certificate, CutoffWindow, ShnolError, TailWeight, Theorem4Outcome,
    WeylCertificate, WindowKind, DEFAULT_RESIDUAL_THRESHOLD,
};
