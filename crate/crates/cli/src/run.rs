//! Mode dispatch.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use chrono::Utc;
use spgs::grid::{read_dump, write_dump, GridSpec, ScalarField};
use spgs::minimize::{
    self, compare_with_vinf, find_ground_state, format_real, write_trace_csv, GroundStateResult,
    Init, Status,
};
use spgs::potential::{Perturbation, Potential};
use spgs::radial_oracle::{radial_ground_state, write_profile_csv};

use crate::config::{ConfigError, InitKind, Mode, PotentialKind, RunConfig};
use crate::error::CliError;
use crate::output::{write_table, RunDir};
use crate::validate;

/// What a finished run reports back: its directory and a few summary lines.
#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub lines: Vec<String>,
}

fn read_field(path: &str, key: &str) -> Result<ScalarField, CliError> {
    let file = File::open(path).map_err(|e| ConfigError {
        key: Some(key.to_string()),
        line: None,
        message: format!("cannot open `{path}`: {e}"),
    })?;
    Ok(read_dump(BufReader::new(file))?)
}

pub fn build_potential(cfg: &RunConfig) -> Result<Potential, CliError> {
    let v = &cfg.potential;
    Ok(match v.kind {
        PotentialKind::Constant => Potential::constant(v.v1)?,
        PotentialKind::Coulomb => Potential::coulomb(v.v1, v.lambda, v.alpha)?,
        PotentialKind::GaussianWell => Potential::composite(
            Potential::constant(v.v1)?,
            v.lambda,
            Perturbation::Gaussian {
                amplitude: v.amplitude,
                width: v.width,
            },
        )?,
        PotentialKind::Tabulated => Potential::tabulated(read_field(&v.file, "potential.file")?),
    })
}

fn build_init(cfg: &RunConfig) -> Result<Init, CliError> {
    let s = &cfg.solver;
    Ok(match s.init {
        InitKind::Default => Init::Default,
        InitKind::Blob => Init::GaussianBlob {
            center: s.init_center,
            width: s.init_width,
            amplitude: s.init_amplitude,
        },
        InitKind::File => Init::Field(read_field(&s.init_file, "solver.init_file")?),
    })
}

fn status_name(status: Status) -> &'static str {
    match status {
        Status::Converged => "converged",
        Status::MaxIters => "max_iters",
    }
}

const SUMMARY_HEADER: &[&str] = &[
    "L",
    "n",
    "staggered",
    "kind",
    "V1",
    "lambda",
    "alpha",
    "p",
    "seed",
    "c_estimate",
    "residual_norm",
    "iterations",
    "status",
];

fn summary_row(cfg: &RunConfig, kind: &str, v1: f64, run: &GroundStateResult) -> Vec<String> {
    vec![
        format_real(cfg.grid.half_width),
        cfg.grid.points.to_string(),
        cfg.grid.staggered.to_string(),
        kind.to_string(),
        format_real(v1),
        format_real(cfg.potential.lambda),
        format_real(cfg.potential.alpha),
        format_real(cfg.solver.p),
        cfg.solver.seed.to_string(),
        format_real(run.c_estimate),
        format_real(run.residual_norm),
        run.iterations.to_string(),
        status_name(run.status).to_string(),
    ]
}

fn write_trace(dir: &RunDir, name: &str, run: &GroundStateResult) -> Result<(), CliError> {
    let mut out = dir.csv(name)?;
    write_trace_csv(&run.trace, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_field(dir: &RunDir, name: &str, field: &ScalarField) -> Result<(), CliError> {
    let mut out = dir.file(name)?;
    write_dump(field, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Runs the configured mode and writes its run directory.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let grid = cfg.grid.spec();
    let potential = build_potential(cfg)?;
    let solver = cfg.solver.to_solver_config(build_init(cfg)?);
    if cfg.mode == Mode::RadialCrosscheck && !potential.is_radial() {
        return Err(ConfigError {
            key: Some("potential.kind".into()),
            line: None,
            message: "radial-crosscheck needs a radially symmetric analytic potential".into(),
        }
        .into());
    }

    let dir = RunDir::create(&cfg.output_dir, cfg.mode.name(), Utc::now())?;
    let mut echo = dir.file("config.txt")?;
    echo.write_all(cfg.to_canonical().as_bytes())?;
    echo.flush()?;

    let mut lines = Vec::new();
    match cfg.mode {
        Mode::Solve => {
            let run = find_ground_state(&potential, &solver, &grid)?;
            write_trace(&dir, "trace.csv", &run)?;
            let kind = cfg.potential.kind.name();
            write_table(
                &dir,
                "summary.csv",
                SUMMARY_HEADER,
                &[summary_row(cfg, kind, cfg.potential.v1, &run)],
            )?;
            let annulus: Vec<Vec<String>> = run
                .annulus_profile
                .iter()
                .map(|(r, m)| vec![r.to_string(), format_real(*m)])
                .collect();
            write_table(&dir, "annulus.csv", &["r", "rho"], &annulus)?;
            write_field(&dir, "u.dump", &run.u)?;
            write_field(&dir, "phi.dump", &run.phi)?;
            lines.push(format!(
                "c_estimate={} residual_norm={} iterations={} status={}",
                run.c_estimate,
                run.residual_norm,
                run.iterations,
                status_name(run.status)
            ));
        }
        Mode::SweepLambda => {
            let mut lambdas = cfg.lambdas.clone();
            lambdas.sort_by(f64::total_cmp);
            let runs = sweep(&lambdas, &solver, &grid, cfg.jobs)?;
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            for (k, (lambda, run)) in lambdas.iter().zip(&runs).enumerate() {
                write_trace(&dir, &format!("trace-{k:03}.csv"), run)?;
                rows.push(vec![
                    format_real(*lambda),
                    format_real(run.c_estimate),
                    format_real(run.residual_norm),
                    run.iterations.to_string(),
                    status_name(run.status).to_string(),
                ]);
                summary.push(summary_row(cfg, "constant", *lambda, run));
            }
            write_table(
                &dir,
                "lambda_c.csv",
                &["lambda", "c", "residual_norm", "iterations", "status"],
                &rows,
            )?;
            write_table(&dir, "summary.csv", SUMMARY_HEADER, &summary)?;
            for row in &rows {
                lines.push(format!("lambda={} c={}", row[0], row[1]));
            }
            let increasing = runs.windows(2).all(|w| w[0].c_estimate < w[1].c_estimate);
            if !increasing {
                return Err(CliError::Validation(format!(
                    "c(lambda) is not strictly increasing; see {}",
                    dir.path().join("lambda_c.csv").display()
                )));
            }
        }
        Mode::CompareVinf => {
            let cmp = compare_with_vinf(&potential, &solver, &grid)?;
            write_table(
                &dir,
                "compare.csv",
                &["c", "c_inf", "strict", "refinement_delta", "margin"],
                &[vec![
                    format_real(cmp.c),
                    format_real(cmp.c_inf),
                    cmp.strict.to_string(),
                    format_real(cmp.refinement_delta),
                    format_real(cmp.margin),
                ]],
            )?;
            lines.push(format!(
                "c={} c_inf={} margin={} strict={}",
                cmp.c, cmp.c_inf, cmp.margin, cmp.strict
            ));
        }
        Mode::Validate => {
            let checks =
                validate::run_suite(&grid, &potential, cfg.solver.seed, cfg.validate_trials)?;
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| {
                    vec![
                        c.name.to_string(),
                        c.passed.to_string(),
                        format_real(c.detail),
                    ]
                })
                .collect();
            write_table(&dir, "report.csv", &["check", "passed", "detail"], &rows)?;
            let failures: Vec<&str> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name)
                .collect();
            lines.push(format!(
                "checks={} failures={}",
                checks.len(),
                failures.len()
            ));
            if !failures.is_empty() {
                return Err(CliError::Validation(format!(
                    "failed checks: {}",
                    failures.join(", ")
                )));
            }
        }
        Mode::RadialCrosscheck => {
            let run = find_ground_state(&potential, &solver, &grid)?;
            let radial = radial_ground_state(
                &potential,
                cfg.solver.p,
                cfg.radial_r_max,
                cfg.radial_n_r,
                &solver,
            )?;
            let gap = (run.c_estimate - radial.c_radial).abs() / radial.c_radial;
            write_trace(&dir, "trace.csv", &run)?;
            let mut profile = dir.csv("radial_profile.csv")?;
            write_profile_csv(&radial.u, &radial.phi, &mut profile)?;
            profile.flush()?;
            write_table(
                &dir,
                "crosscheck.csv",
                &["c_3d", "c_radial", "relative_gap"],
                &[vec![
                    format_real(run.c_estimate),
                    format_real(radial.c_radial),
                    format_real(gap),
                ]],
            )?;
            lines.push(format!(
                "c_3d={} c_radial={} relative_gap={gap}",
                run.c_estimate, radial.c_radial
            ));
        }
    }
    Ok(RunReport {
        dir: dir.path().to_path_buf(),
        lines,
    })
}

/// `c(λ)` runs for every level, at most `jobs` at a time, in input order.
fn sweep(
    lambdas: &[f64],
    solver: &minimize::SolverConfig,
    grid: &GridSpec,
    jobs: usize,
) -> spgs::Result<Vec<GroundStateResult>> {
    let slots: Vec<Mutex<Option<spgs::Result<GroundStateResult>>>> =
        lambdas.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..jobs.min(lambdas.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&lambda) = lambdas.get(k) else { break };
                let result =
                    Potential::constant(lambda).and_then(|v| find_ground_state(&v, solver, grid));
                *slots[k].lock().unwrap_or_else(|e| e.into_inner()) = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .unwrap_or_else(|e| e.into_inner())
                .expect("every level is run")
        })
        .collect()
}
