//! Experiment drivers: Bond sweeps and slope fits of the closed forms, and
//! eigensolver checks of the isoperimetric inequality, attainment, concavity,
//! the zero-surface-tension limits and the optimality condition.
//!
//! Trials run in parallel; results are collected in trial order, so every
//! report is a deterministic function of its inputs.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::admissible::{format_float, perturb, random_admissible, AdmissibleError, Geometry, ShapeSamples};
use crate::bond::BondNumber;
use crate::eigensolver::{
    assemble, energies, fundamental_mode, surface_mass, EigenError, EigenResult, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::shapes::{Case, OptimalSolution, ShapeError};

/// Relative slack of the isoperimetric inequality on a finite grid.
pub const ISOPERIMETRIC_TOL: f64 = 5e-3;
/// Minimum empirical convergence order of the attainment study.
pub const MIN_ORDER: f64 = 1.8;
/// Largest relative error allowed on the finest attainment grid.
pub const MAX_FINEST_ERROR: f64 = 1e-3;
/// Concavity slack as a fraction of the optimal frequency.
pub const CONCAVITY_SLACK: f64 = 5e-4;
/// Relative tolerance of the reflection symmetry check.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Largest relative deviation of the optimality quantity from its median.
pub const OPTIMALITY_TOL: f64 = 1e-2;
/// Largest shape gap at the last Bond number, as a fraction of the limit depth.
pub const SHAPE_GAP_TOL: f64 = 1e-2;
/// Limit-ratio tolerance for canal families.
pub const CANAL_LIMIT_TOL: f64 = 5e-3;
/// Limit-ratio tolerance for radial families.
pub const RADIAL_LIMIT_TOL: f64 = 1e-2;
/// Relative tolerance of the energy identity.
pub const ENERGY_TOL: f64 = 1e-8;
/// Tolerance on `sum W zeta` relative to `sum |W zeta|`.
pub const MASS_TOL: f64 = 1e-8;
/// Points of the uniform Bond grid used by slope fits.
pub const SLOPE_GRID_POINTS: usize = 1000;
/// Minimum rows inside a slope-fit window.
pub const MIN_FIT_ROWS: usize = 10;
/// Interior fraction of the free surface used for shape gaps.
pub const INTERIOR_FRACTION: f64 = 0.9;
/// Points of the interior grid used for shape gaps.
pub const GAP_POINTS: usize = 181;
/// Default Bond numbers of the limit study.
pub const DEFAULT_LIMIT_BONDS: [f64; 4] = [1e2, 1e3, 1e4, 1e6];
/// Default grids of the attainment study.
pub const DEFAULT_GRIDS: [usize; 4] = [250, 500, 1000, 2000];
/// Amplitude of the perturbations applied to optimal shapes.
pub const DEFAULT_EPSILON: f64 = 0.2;
/// Largest number of cosine modes in a random shape.
pub const MAX_RANDOM_MODES: usize = 8;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Admissible(#[from] AdmissibleError),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::Writer::from_writer(w)
}

// ---------------------------------------------------------------------------
// Sweeps and slope fits.

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub bond: f64,
    pub lambda_star: f64,
    /// `lambda*(Bo) / lambda*(inf)`
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub case: Case,
    pub baseline: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].lambda_star < w[0].lambda_star)
    }

    pub fn ratios_exceed_one(&self) -> bool {
        self.rows.iter().all(|r| r.ratio > 1.0)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record(["bond", "lambda_star", "ratio"])?;
        for r in &self.rows {
            w.write_record([format_float(r.bond), format_float(r.lambda_star), format_float(r.ratio)])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `n` log-spaced values from `a` to `b`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                (la + (lb - la) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` uniformly spaced values from `a` to `b`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if n == 1 {
                a
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Evaluates `lambda*` at every Bond number of `bo_grid` (positive, ascending)
/// and its ratio to the no-surface-tension value.
pub fn bo_sweep(case: &Case, bo_grid: &[f64]) -> Result<SweepTable, VerifyError> {
    if bo_grid.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
        return Err(VerifyError::InvalidInput(
            "Bond numbers must be positive and finite".into(),
        ));
    }
    if bo_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VerifyError::InvalidInput(
            "Bond numbers must be strictly ascending".into(),
        ));
    }
    let baseline = case.with_bond(BondNumber::Infinite)?.lambda_star()?;
    let rows = bo_grid
        .par_iter()
        .map(|&bond| {
            let lambda_star = case.with_bond(BondNumber::Finite(bond))?.lambda_star()?;
            Ok(SweepRow {
                bond,
                lambda_star,
                ratio: lambda_star / baseline,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    Ok(SweepTable {
        case: *case,
        baseline,
        rows,
    })
}

/// Least-squares slope of `ln lambda*` against `ln Bo` over the rows with
/// `bo_min <= Bo <= bo_max`.
pub fn fit_loglog_slope(table: &SweepTable, bo_min: f64, bo_max: f64) -> Result<f64, VerifyError> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.bond >= bo_min && r.bond <= bo_max)
        .map(|r| (r.bond.ln(), r.lambda_star.ln()))
        .collect();
    if pts.len() < MIN_FIT_ROWS {
        return Err(VerifyError::InsufficientData(format!(
            "{} rows in [{bo_min}, {bo_max}], need at least {MIN_FIT_ROWS}",
            pts.len()
        )));
    }
    Ok(least_squares_slope(&pts))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Sweeps [`SLOPE_GRID_POINTS`] uniformly spaced Bond numbers over the window
/// and fits the log-log slope.
pub fn slope_for_case(case: &Case, bo_min: f64, bo_max: f64) -> Result<(SweepTable, f64), VerifyError> {
    if !(bo_min > 0.0) || !(bo_max > bo_min) {
        return Err(VerifyError::InvalidInput(format!("bad window [{bo_min}, {bo_max}]")));
    }
    let table = bo_sweep(case, &uniform_grid(bo_min, bo_max, SLOPE_GRID_POINTS))?;
    let slope = fit_loglog_slope(&table, bo_min, bo_max)?;
    Ok((table, slope))
}

// ---------------------------------------------------------------------------
// Isoperimetric inequality.

#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub lambda1: f64,
    /// `lambda1 / lambda*`
    pub ratio: f64,
    pub residual: f64,
    /// `|Omega G - (D + S)| / (D + S)`; zero without surface tension
    pub energy_gap: f64,
    /// `|sum W zeta| / sum |W zeta|`
    pub surface_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub case: Case,
    pub kind: &'static str,
    pub n_trials: usize,
    pub grid_n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub lambda_star: f64,
    pub max_observed_lambda: f64,
    /// `1 - max_observed_lambda / lambda*`
    pub margin: f64,
    pub max_energy_gap: f64,
    pub max_surface_mass: f64,
    pub skipped: Vec<usize>,
    pub pass: bool,
    pub trials: Vec<TrialRow>,
}

impl VerificationReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record([
            "trial",
            "seed",
            "lambda1",
            "ratio",
            "residual",
            "energy_gap",
            "surface_mass",
        ])?;
        for t in &self.trials {
            w.write_record([
                t.trial.to_string(),
                t.seed.to_string(),
                format_float(t.lambda1),
                format_float(t.ratio),
                format_float(t.residual),
                format_float(t.energy_gap),
                format_float(t.surface_mass),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Seed of trial `i` derived from a base seed.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Solve of one shape together with its structural diagnostics.
#[derive(Debug, Clone)]
pub struct Diagnosed {
    pub result: EigenResult,
    pub energy_gap: f64,
    pub surface_mass: f64,
}

/// Solves `shape` for the family of `case` and evaluates the energy identity
/// and the surface mass.
pub fn solve_diagnosed(case: &Case, shape: &ShapeSamples) -> Result<Diagnosed, VerifyError> {
    let op = assemble(shape, case.mode_parameter(), case.bond())?;
    let result = fundamental_mode(&op, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let (energy_gap, surface_mass_rel) = if op.surface.is_some() {
        let e = energies(&op, &result)?;
        let mass = surface_mass(&op, &result)?;
        let w = &op.weights;
        let scale: f64 = match op.geometry {
            Geometry::Canal => w[1..w.len() - 1]
                .iter()
                .zip(&result.zeta[1..result.zeta.len() - 1])
                .map(|(a, z)| (a * z).abs())
                .sum(),
            Geometry::Radial => w.iter().zip(&result.zeta).map(|(a, z)| (a * z).abs()).sum(),
        };
        let mass_rel = if op.singular { mass.abs() / scale } else { 0.0 };
        (e.identity_gap(result.omega1), mass_rel)
    } else {
        (0.0, 0.0)
    };
    Ok(Diagnosed {
        result,
        energy_gap,
        surface_mass: surface_mass_rel,
    })
}

fn run_trials(
    case: &Case,
    kind: &'static str,
    n_trials: usize,
    seed: u64,
    grid_n: usize,
    make: impl Fn(usize, u64) -> Result<ShapeSamples, VerifyError> + Sync,
) -> Result<VerificationReport, VerifyError> {
    if n_trials == 0 {
        return Err(VerifyError::InvalidInput("need at least one trial".into()));
    }
    let lambda_star = case.lambda_star()?;
    let outcomes: Vec<(usize, u64, Result<Diagnosed, VerifyError>)> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let s = trial_seed(seed, i);
            let out = make(i, s).and_then(|shape| solve_diagnosed(case, &shape));
            (i, s, out)
        })
        .collect();
    let mut trials = Vec::with_capacity(n_trials);
    let mut skipped = Vec::new();
    for (i, s, out) in outcomes {
        match out {
            Ok(d) => trials.push(TrialRow {
                trial: i,
                seed: s,
                lambda1: d.result.lambda1,
                ratio: d.result.lambda1 / lambda_star,
                residual: d.result.residual,
                energy_gap: d.energy_gap,
                surface_mass: d.surface_mass,
            }),
            Err(VerifyError::Eigen(e)) => {
                log::warn!("{kind} trial {i} (seed {s}) skipped: {e}");
                skipped.push(i);
            }
            Err(e) => return Err(e),
        }
    }
    let max_observed_lambda = trials.iter().map(|t| t.lambda1).fold(f64::NEG_INFINITY, f64::max);
    let max_energy_gap = trials.iter().map(|t| t.energy_gap).fold(0.0, f64::max);
    let max_surface_mass = trials.iter().map(|t| t.surface_mass).fold(0.0, f64::max);
    let pass = !trials.is_empty() && max_observed_lambda <= lambda_star * (1.0 + ISOPERIMETRIC_TOL);
    Ok(VerificationReport {
        case: *case,
        kind,
        n_trials,
        grid_n,
        seed,
        tolerance: ISOPERIMETRIC_TOL,
        lambda_star,
        max_observed_lambda,
        margin: 1.0 - max_observed_lambda / lambda_star,
        max_energy_gap,
        max_surface_mass,
        skipped,
        pass,
        trials,
    })
}

/// Draws `n_trials` random admissible shapes (with `1..=8` cosine modes) and
/// checks `lambda1(h) <= lambda* (1 + 5e-3)` for each.
pub fn verify_isoperimetric(
    case: &Case,
    n_trials: usize,
    seed: u64,
    grid_n: usize,
) -> Result<VerificationReport, VerifyError> {
    let geometry = case.geometry();
    let target = case.constraint();
    run_trials(case, "isoperimetric", n_trials, seed, grid_n, |i, s| {
        let modes = 1 + i % MAX_RANDOM_MODES;
        Ok(random_admissible(s, geometry, grid_n, modes, target)?)
    })
}

/// Perturbs the optimal shape `n_trials` times with amplitude `epsilon` and
/// checks the same inequality.
pub fn verify_perturbations(
    case: &Case,
    n_trials: usize,
    seed: u64,
    grid_n: usize,
    epsilon: f64,
) -> Result<VerificationReport, VerifyError> {
    let optimum = OptimalSolution::new(*case)?.samples(grid_n)?;
    run_trials(case, "perturbation", n_trials, seed, grid_n, |_, s| {
        Ok(perturb(&optimum, s, epsilon)?)
    })
}

// ---------------------------------------------------------------------------
// Attainment.

#[derive(Debug, Clone, Serialize)]
pub struct AttainmentRow {
    pub n: usize,
    pub lambda1: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttainmentReport {
    pub case: Case,
    pub lambda_star: f64,
    pub rows: Vec<AttainmentRow>,
    /// Negated least-squares slope of `ln |error|` against `ln n`.
    pub order: f64,
    pub finest_error: f64,
    pub min_order: f64,
    pub max_finest_error: f64,
    pub pass: bool,
}

impl AttainmentReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record(["n", "lambda1", "rel_error"])?;
        for r in &self.rows {
            w.write_record([r.n.to_string(), format_float(r.lambda1), format_float(r.rel_error)])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Solves the optimal shape on each grid and measures `|lambda1(n) - lambda*| / lambda*`.
pub fn verify_attainment(case: &Case, grid_sizes: &[usize]) -> Result<AttainmentReport, VerifyError> {
    if grid_sizes.len() < 2 || grid_sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VerifyError::InvalidInput(
            "need at least two ascending grid sizes".into(),
        ));
    }
    let sol = OptimalSolution::new(*case)?;
    let lambda_star = sol.lambda_star;
    let rows = grid_sizes
        .par_iter()
        .map(|&n| {
            let shape = sol.samples(n)?;
            let d = solve_diagnosed(case, &shape)?;
            Ok(AttainmentRow {
                n,
                lambda1: d.result.lambda1,
                rel_error: (d.result.lambda1 - lambda_star).abs() / lambda_star,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.rel_error.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let order = -least_squares_slope(&pts);
    let finest_error = rows.last().unwrap().rel_error;
    Ok(AttainmentReport {
        case: *case,
        lambda_star,
        rows,
        order,
        finest_error,
        min_order: MIN_ORDER,
        max_finest_error: MAX_FINEST_ERROR,
        pass: order >= MIN_ORDER && finest_error < MAX_FINEST_ERROR,
    })
}

// ---------------------------------------------------------------------------
// Concavity.

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityRow {
    pub pair: usize,
    pub omega_a: f64,
    pub omega_b: f64,
    pub omega_mid: f64,
    /// `Omega((h_a + h_b)/2) - (Omega(h_a) + Omega(h_b))/2`
    pub excess: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub case: Case,
    pub n_pairs: usize,
    pub grid_n: usize,
    pub seed: u64,
    pub omega_star: f64,
    pub slack: f64,
    pub min_excess: f64,
    /// Relative gap between `Omega(h)` and `Omega(h(-x))` (canal only).
    pub symmetry_gap: Option<f64>,
    /// `|Omega((h + h)/2) - Omega(h)| / Omega(h)`
    pub self_pair_gap: f64,
    /// Excess of the pair `(h, h(-x))` (canal only).
    pub reflected_excess: Option<f64>,
    pub pass: bool,
    pub rows: Vec<ConcavityRow>,
}

impl ConcavityReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record(["pair", "omega_a", "omega_b", "omega_mid", "excess", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.pair.to_string(),
                format_float(r.omega_a),
                format_float(r.omega_b),
                format_float(r.omega_mid),
                format_float(r.excess),
                r.pass.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn omega_of(case: &Case, shape: &ShapeSamples) -> Result<f64, VerifyError> {
    Ok(solve_diagnosed(case, shape)?.result.omega1)
}

/// Midpoint concavity of `h -> Omega1(h)` on random admissible pairs, plus
/// the reflection symmetry of canal frequencies.
pub fn verify_concavity(case: &Case, n_pairs: usize, seed: u64, grid_n: usize) -> Result<ConcavityReport, VerifyError> {
    if n_pairs == 0 {
        return Err(VerifyError::InvalidInput("need at least one pair".into()));
    }
    let geometry = case.geometry();
    let target = case.constraint();
    let omega_star = case.lambda_star()?.sqrt();
    let slack = CONCAVITY_SLACK * omega_star;
    let draw = |i: usize, k: u64| -> Result<ShapeSamples, VerifyError> {
        let modes = 1 + (i + k as usize) % MAX_RANDOM_MODES;
        Ok(random_admissible(
            trial_seed(seed, 2 * i + k as usize),
            geometry,
            grid_n,
            modes,
            target,
        )?)
    };
    let rows = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let a = draw(i, 0)?;
            let b = draw(i, 1)?;
            let mid = a.blend(&b, 0.5)?;
            let (oa, ob, om) = (omega_of(case, &a)?, omega_of(case, &b)?, omega_of(case, &mid)?);
            let excess = om - 0.5 * (oa + ob);
            Ok(ConcavityRow {
                pair: i,
                omega_a: oa,
                omega_b: ob,
                omega_mid: om,
                excess,
                pass: excess >= -slack,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;

    let probe = draw(n_pairs, 0)?;
    let o = omega_of(case, &probe)?;
    let self_pair_gap = (omega_of(case, &probe.blend(&probe, 0.5)?)? - o).abs() / o;
    let (symmetry_gap, reflected_excess) = if geometry == Geometry::Canal {
        let reflected = probe.reflected();
        let or = omega_of(case, &reflected)?;
        let om = omega_of(case, &probe.blend(&reflected, 0.5)?)?;
        (Some((or - o).abs() / o), Some(om - 0.5 * (o + or)))
    } else {
        (None, None)
    };
    let min_excess = rows.iter().map(|r| r.excess).fold(f64::INFINITY, f64::min);
    let pass = rows.iter().all(|r| r.pass)
        && self_pair_gap < 1e-10
        && symmetry_gap.is_none_or(|g| g < SYMMETRY_TOL)
        && reflected_excess.is_none_or(|e| e >= -slack);
    Ok(ConcavityReport {
        case: *case,
        n_pairs,
        grid_n,
        seed,
        omega_star,
        slack,
        min_excess,
        symmetry_gap,
        self_pair_gap,
        reflected_excess,
        pass,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Zero-surface-tension limits.

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub bond: f64,
    pub lambda_star: f64,
    pub ratio: f64,
    /// Sup-norm gap to the limit shape on the interior grid.
    pub shape_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport {
    pub case: Case,
    pub baseline: f64,
    pub limit_max_depth: f64,
    pub rows: Vec<LimitRow>,
    pub lambda_decreasing: bool,
    pub gaps_decreasing: bool,
    pub final_ratio_gap: f64,
    pub ratio_tolerance: f64,
    pub final_shape_gap: f64,
    pub shape_tolerance: f64,
    pub pass: bool,
}

impl LimitsReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record(["bond", "lambda_star", "ratio", "shape_gap"])?;
        for r in &self.rows {
            w.write_record([
                format_float(r.bond),
                format_float(r.lambda_star),
                format_float(r.ratio),
                format_float(r.shape_gap),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Interior points `|x| <= 0.9` (canal) or `0 <= r <= 0.9` (radial).
pub fn interior_grid(geometry: Geometry) -> Vec<f64> {
    match geometry {
        Geometry::Canal => uniform_grid(-INTERIOR_FRACTION, INTERIOR_FRACTION, GAP_POINTS),
        Geometry::Radial => uniform_grid(0.0, INTERIOR_FRACTION, GAP_POINTS),
    }
}

/// Ratio tolerance at the largest Bond number for the family of `case`.
pub fn limit_tolerance(case: &Case) -> f64 {
    match case.geometry() {
        Geometry::Canal => CANAL_LIMIT_TOL,
        Geometry::Radial => RADIAL_LIMIT_TOL,
    }
}

/// Follows `lambda*` and `h*` along increasing Bond numbers towards the
/// no-surface-tension optimum.
pub fn verify_limits(case: &Case, bo_values: &[f64]) -> Result<LimitsReport, VerifyError> {
    if bo_values.len() < 2 || bo_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(VerifyError::InvalidInput(
            "need at least two ascending Bond numbers".into(),
        ));
    }
    let limit = OptimalSolution::new(case.with_bond(BondNumber::Infinite)?)?;
    let grid = interior_grid(case.geometry());
    let limit_vals: Vec<f64> = grid.iter().map(|&x| limit.h(x)).collect::<Result<_, _>>()?;
    let limit_max_depth = limit_vals.iter().copied().fold(0.0, f64::max);
    let rows = bo_values
        .par_iter()
        .map(|&bond| {
            let sol = OptimalSolution::new(case.with_bond(BondNumber::Finite(bond))?)?;
            let mut gap = 0.0f64;
            for (&x, &h0) in grid.iter().zip(&limit_vals) {
                gap = gap.max((sol.h(x)? - h0).abs());
            }
            Ok(LimitRow {
                bond,
                lambda_star: sol.lambda_star,
                ratio: sol.lambda_star / limit.lambda_star,
                shape_gap: gap,
            })
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    let lambda_decreasing = rows.windows(2).all(|w| w[1].lambda_star < w[0].lambda_star);
    let gaps_decreasing = rows.windows(2).all(|w| w[1].shape_gap < w[0].shape_gap);
    let last = rows.last().unwrap();
    let final_ratio_gap = (last.ratio - 1.0).abs();
    let ratio_tolerance = limit_tolerance(case);
    let final_shape_gap = last.shape_gap / limit_max_depth;
    let pass =
        lambda_decreasing && gaps_decreasing && final_ratio_gap < ratio_tolerance && final_shape_gap < SHAPE_GAP_TOL;
    Ok(LimitsReport {
        case: *case,
        baseline: limit.lambda_star,
        limit_max_depth,
        rows,
        lambda_decreasing,
        gaps_decreasing,
        final_ratio_gap,
        ratio_tolerance,
        final_shape_gap,
        shape_tolerance: SHAPE_GAP_TOL,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Optimality condition.

#[derive(Debug, Clone, Serialize)]
pub struct OptimalityReport {
    pub case: Case,
    pub grid_n: usize,
    pub lambda1: f64,
    pub lambda_star: f64,
    pub median: f64,
    /// `max |q - median| / median` over interior nodes.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub energy_gap: f64,
    pub surface_mass: f64,
    pub pass: bool,
    pub coords: Vec<f64>,
    pub quantity: Vec<f64>,
}

impl OptimalityReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), VerifyError> {
        let mut w = csv_writer(w);
        w.write_record(["coordinate", "q"])?;
        for (x, q) in self.coords.iter().zip(&self.quantity) {
            w.write_record([format_float(*x), format_float(*q)])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Solves at `h*` and forms `q = (psi')^2 + alpha^2 psi^2` (canal) or
/// `(psi')^2 + m^2 psi^2 / r^2` (radial) from central differences of the
/// discrete potential at unknowns with `|x| <= 0.9` or `r <= 0.9`. Closer to
/// the contact line the depth vanishes and the discrete potential there
/// carries an O(grid) boundary layer.
pub fn verify_optimality_condition(case: &Case, grid_n: usize) -> Result<OptimalityReport, VerifyError> {
    if case.bond().is_infinite() {
        return Err(VerifyError::InvalidInput(
            "optimality check needs a finite Bond number".into(),
        ));
    }
    let sol = OptimalSolution::new(*case)?;
    let shape = sol.samples(grid_n)?;
    let d = solve_diagnosed(case, &shape)?;
    let res = &d.result;
    let p = case.mode_parameter();
    // radial results carry an extrapolated value at r = 1; use cell centres only
    let len = match case.geometry() {
        Geometry::Canal => res.psi.len(),
        Geometry::Radial => res.psi.len() - 1,
    };
    let (x, psi) = (&res.coords[..len], &res.psi[..len]);
    let mut coords = Vec::with_capacity(len);
    let mut quantity = Vec::with_capacity(len);
    for i in 1..len - 1 {
        if x[i].abs() > INTERIOR_FRACTION {
            continue;
        }
        let dpsi = (psi[i + 1] - psi[i - 1]) / (x[i + 1] - x[i - 1]);
        let q = match case.geometry() {
            Geometry::Canal => dpsi * dpsi + p * p * psi[i] * psi[i],
            Geometry::Radial => dpsi * dpsi + p * p * psi[i] * psi[i] / (x[i] * x[i]),
        };
        coords.push(x[i]);
        quantity.push(q);
    }
    let mut sorted = quantity.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max_deviation = quantity.iter().map(|q| (q - median).abs()).fold(0.0, f64::max) / median;
    Ok(OptimalityReport {
        case: *case,
        grid_n,
        lambda1: res.lambda1,
        lambda_star: sol.lambda_star,
        median,
        max_deviation,
        tolerance: OPTIMALITY_TOL,
        energy_gap: d.energy_gap,
        surface_mass: d.surface_mass,
        pass: max_deviation < OPTIMALITY_TOL,
        coords,
        quantity,
    })
}
