//! End-to-end verification runs: build the operator, solve, run every
//! enabled check, and assemble a [`VerificationReport`].

pub mod checks;
pub mod config;
pub mod fuzz;
pub mod report;

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{ExponentPair, Tolerance};
use crate::bounds::BoundOptions;
use crate::domain::Grid;
use crate::eigensolve::{smallest_eigenpairs, EigenError, SolverOptions, Spectrum};
use crate::oracle;

use checks::{BoundContext, Source};
pub use config::{CheckName, RunConfig, Sweeps};
pub use report::{CheckGroup, Verdict, VerificationReport};
use report::{GridSummary, OracleValues, SpectrumSummary, SCHEMA};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(#[from] EigenError),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("malformed report: {0}")]
    Report(String),
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Solver(_) => 3,
            _ => 2,
        }
    }
}

const SYMMETRY_PROBES: usize = 100;
const COMMUTATOR_TRIALS: usize = 20;

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tolerance("solver"),
        seed: cfg.seed,
        ..SolverOptions::default()
    }
}

fn build_grid(cfg: &RunConfig) -> Result<Arc<Grid>, HarnessError> {
    cfg.validate()?;
    let grid = cfg.domain.build_grid().map_err(|e| HarnessError::Config(e.to_string()))?;
    if cfg.k > grid.len() {
        return Err(HarnessError::Config(format!(
            "k = {} exceeds the {} interior grid points",
            cfg.k,
            grid.len()
        )));
    }
    Ok(grid)
}

/// Solves for the configured eigenpairs without running any checks.
pub fn solve(cfg: &RunConfig) -> Result<(Arc<Grid>, Spectrum), HarnessError> {
    let grid = build_grid(cfg)?;
    let op = checks::clamped_operator(&grid);
    let spectrum = smallest_eigenpairs(&op, cfg.k, &solver_options(cfg))?;
    Ok((grid, spectrum))
}

pub fn summarize_spectrum(s: &Spectrum) -> SpectrumSummary {
    SpectrumSummary {
        eigenvalues: s.eigenvalues.clone(),
        residuals: s.residuals.clone(),
        method: s.method,
        orthonormality_error: s.eigenvectors.as_deref().map_or(0.0, checks::orthonormality_error),
    }
}

/// Runs every enabled check in scheduling order. Configuration problems are
/// errors; a solver failure is recorded in the returned report, whose
/// verdict is then [`Verdict::Aborted`].
pub fn run(cfg: &RunConfig) -> Result<VerificationReport, HarnessError> {
    let grid = build_grid(cfg)?;
    let spec = &cfg.domain;
    let oracle = oracle::analytic_spectrum(spec, cfg.k).map(|values| OracleValues {
        name: oracle::oracle_name(spec).unwrap_or_default().to_string(),
        eigenvalues: values,
    });
    let mut report = VerificationReport {
        schema: SCHEMA.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        config: cfg.clone(),
        grid: GridSummary {
            points_per_axis: grid.dims()[..grid.n()].to_vec(),
            interior_points: grid.len(),
            h: spec.h.clone(),
        },
        spectrum: None,
        oracle,
        checks: Vec::new(),
        verdict: Verdict::Pass,
        failure: None,
    };

    let mut enabled: Vec<CheckName> = cfg.checks.clone();
    enabled.sort();
    enabled.dedup();
    let identity_tol = cfg.tolerance("identity");
    let solver = solver_options(cfg);
    let mut spectrum: Option<Spectrum> = None;

    for check in enabled {
        let needs_spectrum = !matches!(check, CheckName::Symmetry | CheckName::Commutator);
        if needs_spectrum && spectrum.is_none() {
            match smallest_eigenpairs(&checks::clamped_operator(&grid), cfg.k, &solver) {
                Ok(s) => {
                    report.spectrum = Some(summarize_spectrum(&s));
                    spectrum = Some(s);
                }
                Err(e) => {
                    report.failure = Some(HarnessError::from(e).to_string());
                    report.verdict = Verdict::Aborted;
                    return Ok(report);
                }
            }
        }
        let group = match (check, spectrum.as_ref()) {
            (CheckName::Symmetry, _) => CheckGroup::from_rows(
                check,
                checks::symmetry_check(&grid, spec.l, cfg.seed, SYMMETRY_PROBES, identity_tol),
            ),
            (CheckName::Commutator, _) => CheckGroup::from_rows(
                check,
                checks::commutator_check(&grid, cfg.seed, COMMUTATOR_TRIALS, cfg.tolerance("commutator")),
            ),
            (_, Some(s)) => spectrum_group(cfg, check, &grid, s, &report, &solver),
            (_, None) => unreachable!("spectrum solved above"),
        };
        report.checks.push(group);
    }
    report.verdict = if report.checks.iter().all(|g| g.passed) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(report)
}

fn bound_context<'a>(l: u32, n: usize, pairs: &'a [ExponentPair], tolerances: &BTreeMap<String, f64>) -> BoundContext<'a> {
    BoundContext {
        l,
        n,
        pairs,
        opts: BoundOptions {
            tolerance: Tolerance {
                relative: config::tolerance(tolerances, "bounds"),
                absolute: 1e-15,
            },
            gap_tol: config::tolerance(tolerances, "gap"),
        },
        coherence_tol: config::tolerance(tolerances, "coherence"),
    }
}

/// The inequality checks (bounds, special cases, coherence, chain,
/// comparison) on an externally supplied ascending eigenvalue list.
pub fn check_eigenvalues(
    eigenvalues: &[f64],
    l: u32,
    n: usize,
    sweeps: &Sweeps,
    tolerances: &BTreeMap<String, f64>,
    label: &str,
) -> Result<Vec<CheckGroup>, HarnessError> {
    if l == 0 || n == 0 {
        return Err(HarnessError::Config("l and n must be positive".into()));
    }
    if eigenvalues.len() < 2 {
        return Err(HarnessError::Config("need at least 2 eigenvalues".into()));
    }
    if let Some(i) = eigenvalues.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(HarnessError::Config(format!("eigenvalue {} is not a positive number", i + 1)));
    }
    if let Some(i) = eigenvalues.windows(2).position(|w| w[1] < w[0]) {
        return Err(HarnessError::Config(format!("eigenvalues are not ascending at position {}", i + 2)));
    }
    config::validate_tolerances(tolerances)?;
    sweeps.validate()?;
    let pairs = sweeps.pairs();
    let ctx = bound_context(l, n, &pairs, tolerances);
    let sources = [Source {
        label: label.to_string(),
        eigenvalues: eigenvalues.to_vec(),
    }];
    Ok(vec![
        CheckGroup::from_rows(CheckName::Bounds, ctx.bounds(&sources)),
        CheckGroup::from_rows(CheckName::SpecialCases, ctx.special_cases(&sources)),
        CheckGroup::from_rows(CheckName::Coherence, ctx.coherence(&sources)),
        CheckGroup::from_rows(CheckName::Chain, ctx.chain(&sources)),
        CheckGroup::from_rows(CheckName::Comparison, ctx.comparison(&sources)),
    ])
}

fn spectrum_group(
    cfg: &RunConfig,
    check: CheckName,
    grid: &Arc<Grid>,
    s: &Spectrum,
    report: &VerificationReport,
    solver: &SolverOptions,
) -> CheckGroup {
    let spec = &cfg.domain;
    let identity_tol = cfg.tolerance("identity");
    let vectors = s.eigenvectors.as_deref().unwrap_or(&[]);
    let sources = {
        let mut v = Vec::new();
        if let Some(o) = &report.oracle {
            v.push(Source::analytic(&o.name, o.eigenvalues.clone()));
        }
        v.push(Source::computed(spec, s.eigenvalues.clone()));
        v
    };
    let pairs = cfg.sweeps.pairs();
    let ctx = bound_context(spec.l, spec.n, &pairs, &cfg.tolerances);
    let rows = match check {
        CheckName::Spectrum => checks::spectrum_check(s, cfg.tolerance("solver"), cfg.tolerance("orthonormality")),
        CheckName::Trace => {
            checks::trace_identity_check(grid, vectors, solver, identity_tol, cfg.tolerance("trace-order"))
        }
        CheckName::Gradient => {
            checks::gradient_sum_check(grid, spec.l, &s.eigenvalues, vectors, cfg.tolerance("interpolation"), identity_tol)
        }
        CheckName::Interpolation => {
            if spec.l == 1 {
                return CheckGroup::inapplicable(check, "l = 1: no intermediate powers");
            }
            checks::interpolation_check(grid, spec.l, &s.eigenvalues, vectors, cfg.tolerance("interpolation"))
        }
        CheckName::Oracle => match &report.oracle {
            Some(o) => checks::oracle_check(&s.eigenvalues, &o.eigenvalues, cfg.tolerance("oracle")),
            None => return CheckGroup::inapplicable(check, "no analytic spectrum for this domain"),
        },
        _ if s.k() < 2 => return CheckGroup::inapplicable(check, "inequalities need at least 2 eigenvalues"),
        CheckName::Bounds => ctx.bounds(&sources),
        CheckName::SpecialCases => ctx.special_cases(&sources),
        CheckName::Coherence => ctx.coherence(&sources),
        CheckName::Chain => ctx.chain(&sources),
        CheckName::Comparison => ctx.comparison(&sources),
        CheckName::Symmetry | CheckName::Commutator => unreachable!("handled by the caller"),
    };
    CheckGroup::from_rows(check, rows)
}
