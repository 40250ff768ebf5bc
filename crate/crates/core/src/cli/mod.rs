mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use slosh::admissible::{self, AdmissibleError};
use slosh::eigensolver::{self, EigenError};
use slosh::shapes::{CanalCase, Case, OptimalSolution, RadialCase, ShapeError};
use slosh::verify::{self, VerifyError};

pub use args::Cli;
use args::{CaseArgs, Command, GeometryArg, Spacing, VerifyCommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
            Self::Solver(_) => 4,
            Self::Failed(_) => 5,
        })
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Self::Io(e.to_string())
        } else {
            Self::Usage(e.to_string())
        }
    }
}

impl From<ShapeError> for CliError {
    fn from(e: ShapeError) -> Self {
        match e {
            ShapeError::InvalidCase(_) => Self::Usage(e.to_string()),
            _ => Self::Solver(e.to_string()),
        }
    }
}

impl From<EigenError> for CliError {
    fn from(e: EigenError) -> Self {
        match e {
            EigenError::GridMismatch(_) | EigenError::InvalidInput(_) => Self::Usage(e.to_string()),
            EigenError::Indefinite(_) | EigenError::NonConvergence { .. } => Self::Solver(e.to_string()),
        }
    }
}

impl From<AdmissibleError> for CliError {
    fn from(e: AdmissibleError) -> Self {
        match e {
            AdmissibleError::Io(e) => Self::Io(e.to_string()),
            AdmissibleError::Csv(e) => e.into(),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::Shape(e) => e.into(),
            VerifyError::Eigen(e) => e.into(),
            VerifyError::Admissible(e) => e.into(),
            VerifyError::Csv(e) => e.into(),
            VerifyError::InsufficientData(_) | VerifyError::InvalidInput(_) => Self::Usage(e.to_string()),
        }
    }
}

fn build_case(a: &CaseArgs) -> Result<Case, CliError> {
    Ok(match a.geometry {
        GeometryArg::Canal => CanalCase::new(a.alpha, a.bond, a.area)?.into(),
        GeometryArg::Radial => RadialCase::new(a.m, a.bond, a.volume)?.into(),
    })
}

struct Outputs {
    dir: Option<PathBuf>,
}

impl Outputs {
    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn create(&self, path: &Path) -> Result<(PathBuf, BufWriter<File>), CliError> {
        let path = self.resolve(path);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok((path, BufWriter::new(file)))
    }

    /// Writes CSV to `path`, or to standard output when absent.
    fn csv<F>(&self, path: Option<&Path>, write: F) -> Result<Option<PathBuf>, CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        match path {
            Some(p) => {
                let (path, mut w) = self.create(p)?;
                write(&mut w)?;
                w.flush()?;
                log::info!("wrote {}", path.display());
                Ok(Some(path))
            }
            None => {
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                write(&mut lock)?;
                lock.flush()?;
                Ok(None)
            }
        }
    }

    /// Writes the per-row CSV and a JSON summary beside it.
    fn report<T, F>(&self, path: Option<&Path>, summary: &T, write: F) -> Result<(), CliError>
    where
        T: Serialize,
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let Some(p) = path else {
            return Ok(());
        };
        let (csv_path, mut w) = self.create(p)?;
        write(&mut w)?;
        w.flush()?;
        let json_path = csv_path.with_extension("json");
        let mut j = BufWriter::new(
            File::create(&json_path).map_err(|e| CliError::Io(format!("{}: {e}", json_path.display())))?,
        );
        serde_json::to_writer_pretty(&mut j, summary)?;
        j.write_all(b"\n")?;
        j.flush()?;
        log::info!("wrote {} and {}", csv_path.display(), json_path.display());
        Ok(())
    }
}

fn verdict(pass: bool, what: &str) -> Result<(), CliError> {
    println!("{}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{what} check failed")))
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let out = Outputs { dir: cli.output_dir };
    match cli.command {
        Command::LambdaStar { case } => {
            let case = build_case(&case)?;
            let sol = OptimalSolution::new(case)?;
            let baseline = case.with_bond(slosh::BondNumber::Infinite)?.lambda_star()?;
            let summary = json!({
                "case": case.label(),
                "lambda_star": sol.lambda_star,
                "omega_star": sol.lambda_star.sqrt(),
                "kappa": sol.kappa,
                "d0": sol.d0,
                "ratio": sol.lambda_star / baseline,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }

        Command::Shape { case, n, out: o } => {
            let case = build_case(&case)?;
            let sol = OptimalSolution::new(case)?;
            let shape = sol.samples(n)?;
            out.csv(o.output.as_deref(), |w| Ok(admissible::write_csv(&shape, w)?))?;
        }

        Command::Solve {
            shape,
            alpha,
            m,
            bond,
            tol,
            max_iter,
            out: o,
        } => {
            let file = File::open(&shape).map_err(|e| CliError::Io(format!("{}: {e}", shape.display())))?;
            let samples = admissible::read_csv(io::BufReader::new(file))?;
            let parameter = match samples.geometry() {
                slosh::Geometry::Canal => alpha,
                slosh::Geometry::Radial => m as f64,
            };
            let res = eigensolver::solve_shape(&samples, parameter, bond, tol, max_iter)?;
            eprintln!(
                "omega1 = {:.12e}  lambda1 = {:.12e}  residual = {:.3e}  iterations = {}",
                res.omega1, res.lambda1, res.residual, res.iterations
            );
            let geometry = samples.geometry();
            match o.output {
                Some(p) => {
                    out.csv(Some(&p), |w| Ok(eigensolver::write_result_csv(&res, geometry, w)?))?;
                }
                None => {
                    let summary = json!({
                        "geometry": geometry.to_string(),
                        "n": samples.n(),
                        "omega1": res.omega1,
                        "lambda1": res.lambda1,
                        "residual": res.residual,
                        "iterations": res.iterations,
                    });
                    println!("{}", serde_json::to_string_pretty(&summary)?);
                }
            }
        }

        Command::Sweep {
            case,
            bo_min,
            bo_max,
            points,
            spacing,
            out: o,
        } => {
            let case = build_case(&case)?;
            if !(bo_min > 0.0 && bo_max > bo_min && bo_max.is_finite()) || points < 2 {
                return Err(CliError::Usage(format!(
                    "need 0 < bo-min < bo-max and at least 2 points, got [{bo_min}, {bo_max}] with {points}"
                )));
            }
            let grid = match spacing {
                Spacing::Log => verify::log_grid(bo_min, bo_max, points),
                Spacing::Uniform => verify::uniform_grid(bo_min, bo_max, points),
            };
            let table = verify::bo_sweep(&case, &grid)?;
            out.csv(o.output.as_deref(), |w| Ok(table.write_csv(w)?))?;
            let pass = table.is_strictly_decreasing() && table.ratios_exceed_one();
            eprintln!("{}", if pass { "PASS" } else { "FAIL" });
            if !pass {
                return Err(CliError::Failed(
                    "lambda* is not strictly decreasing above its limit".into(),
                ));
            }
        }

        Command::Fit {
            case,
            window,
            expect,
            expect_tol,
        } => {
            let case = build_case(&case)?;
            let (lo, hi) = (window[0], window[1]);
            let (_, slope) = verify::slope_for_case(&case, lo, hi)?;
            let summary = json!({
                "case": case.label(),
                "window": [lo, hi],
                "points": verify::SLOPE_GRID_POINTS,
                "slope": slope,
                "expected": expect,
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            if let Some(e) = expect {
                if (slope - e).abs() > expect_tol {
                    return Err(CliError::Failed(format!(
                        "slope {slope} differs from {e} by more than {expect_tol}"
                    )));
                }
            }
        }

        Command::Verify(v) => run_verify(&out, v)?,
    }
    Ok(())
}

fn run_verify(out: &Outputs, v: VerifyCommand) -> Result<(), CliError> {
    match v {
        VerifyCommand::Isoperimetric {
            case,
            trials,
            trial,
            report,
        } => {
            let case = build_case(&case)?;
            let r = verify::verify_isoperimetric(&case, trials, trial.seed, trial.n)?;
            println!(
                "{}: {} trials, lambda* = {:.10e}, max lambda_1 = {:.10e} (ratio {:.6}), max energy gap {:.2e}, skipped {}",
                case.label(),
                r.n_trials,
                r.lambda_star,
                r.max_observed_lambda,
                r.max_observed_lambda / r.lambda_star,
                r.max_energy_gap,
                r.skipped.len()
            );
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "isoperimetric")
        }
        VerifyCommand::Perturbation {
            case,
            trials,
            epsilon,
            trial,
            report,
        } => {
            let case = build_case(&case)?;
            let r = verify::verify_perturbations(&case, trials, trial.seed, trial.n, epsilon)?;
            println!(
                "{}: {} perturbations (eps {epsilon}), lambda* = {:.10e}, max lambda_1 = {:.10e} (ratio {:.6})",
                case.label(),
                r.n_trials,
                r.lambda_star,
                r.max_observed_lambda,
                r.max_observed_lambda / r.lambda_star
            );
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "perturbation")
        }
        VerifyCommand::Attainment { case, grids, report } => {
            let case = build_case(&case)?;
            let r = verify::verify_attainment(&case, &grids)?;
            for row in &r.rows {
                println!("n = {:>6}  relative error = {:.3e}", row.n, row.rel_error);
            }
            println!("order = {:.3}, finest error = {:.3e}", r.order, r.finest_error);
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "attainment")
        }
        VerifyCommand::Concavity {
            case,
            pairs,
            trial,
            report,
        } => {
            let case = build_case(&case)?;
            let r = verify::verify_concavity(&case, pairs, trial.seed, trial.n)?;
            println!(
                "{}: {} pairs, min excess / Omega* = {:.3e}, self-pair gap {:.2e}, symmetry gap {}",
                case.label(),
                r.n_pairs,
                r.min_excess,
                r.self_pair_gap,
                r.symmetry_gap.map_or("n/a".to_string(), |g| format!("{g:.2e}"))
            );
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "concavity")
        }
        VerifyCommand::Limits { case, bonds, report } => {
            let case = build_case(&case)?;
            let r = verify::verify_limits(&case, &bonds)?;
            for row in &r.rows {
                println!(
                    "Bo = {:>10.3e}  lambda* = {:.10e}  ratio = {:.6}  shape gap = {:.3e}",
                    row.bond, row.lambda_star, row.ratio, row.shape_gap
                );
            }
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "limit")
        }
        VerifyCommand::Optimality { case, n, report } => {
            let case = build_case(&case)?;
            let r = verify::verify_optimality_condition(&case, n)?;
            println!(
                "{}: median = {:.10e}, max relative deviation = {:.3e}",
                case.label(),
                r.median,
                r.max_deviation
            );
            out.report(report.output.as_deref(), &r, |w| Ok(r.write_csv(w)?))?;
            verdict(r.pass, "optimality")
        }
    }
}
