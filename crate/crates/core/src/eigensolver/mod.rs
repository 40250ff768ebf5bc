//! Finite-difference solver for the fundamental pinned-edge sloshing mode.
//!
//! Eliminating `zeta = Omega K_zeta^{-1} W psi` leaves the symmetric-definite
//! problem `K_psi psi = lambda B psi` with `B = W^T K_zeta^{-1} W` (or `B = W`
//! without surface tension). Its smallest positive eigenvalue is found by
//! block inverse iteration with Rayleigh-Ritz projection. When constants lie in
//! the kernel of `K_psi`, the iteration runs in the `B`-orthogonal complement of
//! constants and solves with the first unknown pinned.

mod assemble;
mod tridiagonal;

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::admissible::{format_float, Geometry, ShapeSamples};
use crate::bond::BondNumber;

pub use assemble::{assemble_canal, assemble_radial, SloshOperator, SurfaceOperator};
pub use tridiagonal::{LdlFactor, Tridiagonal};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const DEFAULT_GRID: usize = 2000;

/// Block size of the inverse iteration.
const BLOCK: usize = 4;

/// Backward error at which the iteration is at roundoff level; near-zero
/// eigenvalues then cannot settle to a relative tolerance.
const ROUNDOFF_RESIDUAL: f64 = 1e-14;

/// Relative size of `sum W zeta` above which a mass-conservation warning is logged.
const MASS_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("operator not positive definite: {0}")]
    Indefinite(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Fundamental eigenpair. `coords`, `psi` and `zeta` span the whole free
/// surface; `zeta` is zero at pinned ends and empty without surface tension.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub omega1: f64,
    pub lambda1: f64,
    pub coords: Vec<f64>,
    pub psi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Quadratic forms of the energy identity `Omega G = D + S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energies {
    /// `psi^T K_psi psi / 2`
    pub kinetic: f64,
    /// `zeta^T K_zeta zeta / 2`
    pub surface: f64,
    /// `psi^T W zeta`
    pub coupling: f64,
}

impl Energies {
    /// `|Omega G - (D + S)| / |D + S|`.
    pub fn identity_gap(&self, omega: f64) -> f64 {
        let e = self.kinetic + self.surface;
        (omega * self.coupling - e).abs() / e.abs()
    }
}

struct Reduced<'a> {
    op: &'a SloshOperator,
    pinned: Option<LdlFactor>,
    full: Option<LdlFactor>,
}

impl<'a> Reduced<'a> {
    fn new(op: &'a SloshOperator) -> Result<Self, EigenError> {
        let indefinite = |i: usize| EigenError::Indefinite(format!("potential operator pivot {i} is not positive"));
        if op.singular {
            let f = op.k_psi.without_first().factor().map_err(|i| indefinite(i + 1))?;
            Ok(Self {
                op,
                pinned: Some(f),
                full: None,
            })
        } else {
            let f = op.k_psi.factor().map_err(indefinite)?;
            Ok(Self {
                op,
                pinned: None,
                full: Some(f),
            })
        }
    }

    fn apply_b(&self, x: &[f64]) -> Vec<f64> {
        let w = &self.op.weights;
        match &self.op.surface {
            None => x.iter().zip(w).map(|(a, b)| a * b).collect(),
            Some(s) => {
                let m = s.k_zeta.len();
                let rhs: Vec<f64> = (0..m).map(|j| w[s.offset + j] * x[s.offset + j]).collect();
                let z = s.factor.solve(&rhs);
                let mut out = vec![0.0; x.len()];
                for j in 0..m {
                    out[s.offset + j] = w[s.offset + j] * z[j];
                }
                out
            }
        }
    }

    /// Solves `K_psi y = f`; for the singular operator `f` must sum to zero
    /// and the returned `y` has `y[0] = 0`.
    fn solve_k(&self, f: &[f64]) -> Vec<f64> {
        match (&self.pinned, &self.full) {
            (Some(p), _) => {
                let mut y = vec![0.0];
                y.extend(p.solve(&f[1..]));
                y
            }
            (None, Some(k)) => k.solve(f),
            _ => unreachable!(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn combine(cols: &[Vec<f64>], coeffs: &DMatrix<f64>, j: usize) -> Vec<f64> {
    let n = cols[0].len();
    let mut out = vec![0.0; n];
    for (k, c) in cols.iter().enumerate() {
        let s = coeffs[(k, j)];
        for (o, v) in out.iter_mut().zip(c) {
            *o += s * v;
        }
    }
    out
}

/// Ritz values (ascending) and `M`-orthonormal Ritz vectors of `(A, M)`.
fn rayleigh_ritz(a: DMatrix<f64>, m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), EigenError> {
    let chol = m
        .cholesky()
        .ok_or_else(|| EigenError::Indefinite("projected mass matrix lost definiteness".into()))?;
    let l = chol.l();
    let t = l
        .solve_lower_triangular(&a)
        .ok_or_else(|| EigenError::Indefinite("singular projected mass matrix".into()))?;
    let c = l
        .solve_lower_triangular(&t.transpose())
        .ok_or_else(|| EigenError::Indefinite("singular projected mass matrix".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let q = DMatrix::from_fn(order.len(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let v = l
        .transpose()
        .solve_upper_triangular(&q)
        .ok_or_else(|| EigenError::Indefinite("singular projected mass matrix".into()))?;
    Ok((values, v))
}

fn starting_block(op: &SloshOperator, p: usize) -> Vec<Vec<f64>> {
    let (lo, hi) = (op.coords[0], *op.coords.last().unwrap());
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let shift = usize::from(op.singular);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5105_4a11);
    (0..p)
        .map(|k| {
            op.coords
                .iter()
                .map(|&x| {
                    let t = (x - lo) / span;
                    ((k + shift) as f64 * std::f64::consts::PI * t).cos() + 1e-3 * rng.random_range(-1.0..1.0)
                })
                .collect()
        })
        .collect()
}

fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += c * b);
}

/// Gram-Schmidt in the `B` inner product, applied twice; columns whose norm
/// collapses are dropped. `by` and `ky` are updated alongside `y`.
fn b_orthonormalize(y: &mut Vec<Vec<f64>>, by: &mut Vec<Vec<f64>>, ky: &mut Vec<Vec<f64>>) {
    let mut j = 0;
    while j < y.len() {
        let initial = dot(&y[j], &by[j]).max(0.0).sqrt();
        for _ in 0..2 {
            for k in 0..j {
                let c = dot(&y[k], &by[j]);
                let (yk, yj) = (y[k].clone(), &mut y[j]);
                axpy(yj, -c, &yk);
                let byk = by[k].clone();
                axpy(&mut by[j], -c, &byk);
                let kyk = ky[k].clone();
                axpy(&mut ky[j], -c, &kyk);
            }
        }
        let s = dot(&y[j], &by[j]).max(0.0).sqrt();
        if !(s > 1e-10 * initial) || !s.is_finite() {
            y.remove(j);
            by.remove(j);
            ky.remove(j);
            continue;
        }
        for v in [&mut y[j], &mut by[j], &mut ky[j]] {
            v.iter_mut().for_each(|a| *a /= s);
        }
        j += 1;
    }
}

/// Smallest positive eigenpair of `K_psi psi = lambda B psi` as `(lambda, psi, iterations)`.
/// Stops once `|K x - lambda B x| < tol |K| |x|` and the Ritz value has settled
/// to `tol` or the residual has reached roundoff.
fn inverse_iteration(op: &SloshOperator, tol: f64, max_iter: usize) -> Result<(f64, Vec<f64>, usize), EigenError> {
    let red = Reduced::new(op)?;
    let n = op.len();
    let b_rank = op.surface.as_ref().map_or(n, |s| s.k_zeta.len());
    let p = BLOCK.min(b_rank.saturating_sub(usize::from(op.singular))).max(1);

    let ones = vec![1.0; n];
    let b_ones = red.apply_b(&ones);
    let ones_b_ones = dot(&ones, &b_ones);

    let deflate = |y: &mut Vec<f64>| {
        if op.singular {
            let c = dot(&b_ones, y) / ones_b_ones;
            y.iter_mut().for_each(|v| *v -= c);
        }
    };

    let mut x = starting_block(op, p);
    x.iter_mut().for_each(&deflate);
    let mut bx: Vec<Vec<f64>> = x.iter().map(|v| red.apply_b(v)).collect();
    let k_norm = op.k_psi.norm_inf();
    let mut previous = f64::INFINITY;
    let mut last_residual = f64::INFINITY;

    for it in 1..=max_iter {
        let mut y: Vec<Vec<f64>> = bx.iter().map(|f| red.solve_k(f)).collect();
        y.iter_mut().for_each(&deflate);
        let mut by: Vec<Vec<f64>> = y.iter().map(|v| red.apply_b(v)).collect();
        let mut ky: Vec<Vec<f64>> = y.iter().map(|v| op.k_psi.mul(v)).collect();
        b_orthonormalize(&mut y, &mut by, &mut ky);
        if y.is_empty() {
            return Err(EigenError::Indefinite(
                "iteration collapsed onto the kernel of B".into(),
            ));
        }
        let p = y.len();
        let a = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
        let m = DMatrix::from_fn(p, p, |i, j| 0.5 * (dot(&y[i], &by[j]) + dot(&y[j], &by[i])));
        let (theta, v) = rayleigh_ritz(a, m)?;

        x = (0..p).map(|j| combine(&y, &v, j)).collect();
        bx = (0..p).map(|j| combine(&by, &v, j)).collect();
        let kx0 = combine(&ky, &v, 0);
        let lam = theta[0];
        let r: Vec<f64> = kx0.iter().zip(&bx[0]).map(|(k, b)| k - lam * b).collect();
        last_residual = norm(&r) / (k_norm * norm(&x[0]));

        let settled = (lam - previous).abs() <= tol * lam.abs() || last_residual < ROUNDOFF_RESIDUAL;
        if settled && last_residual < tol {
            if !(lam > 0.0) {
                return Err(EigenError::Indefinite(format!(
                    "fundamental eigenvalue {lam} is not positive"
                )));
            }
            // flux-form Rayleigh quotient of the returned vector
            let x0 = x.swap_remove(0);
            let lam = op.psi_energy(&x0) / dot(&x0, &bx[0]);
            return Ok((lam, x0, it));
        }
        previous = lam;
    }
    Err(EigenError::NonConvergence {
        iterations: max_iter,
        residual: last_residual,
    })
}

/// Surface unknowns `zeta = Omega K_zeta^{-1} W psi`.
fn surface_profile(op: &SloshOperator, psi: &[f64], omega: f64) -> Vec<f64> {
    let s = op.surface.as_ref().expect("surface operator");
    let w = op.surface_weights().unwrap();
    let rhs: Vec<f64> = w.iter().zip(&psi[s.offset..]).map(|(a, b)| omega * a * b).collect();
    s.factor.solve(&rhs)
}

/// Maps internal unknowns to values over the whole free surface.
fn to_output(op: &SloshOperator, psi: &[f64], zeta: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    match op.geometry {
        Geometry::Canal => {
            let zeta = zeta.map_or_else(Vec::new, |z| {
                let mut full = vec![0.0];
                full.extend_from_slice(z);
                full.push(0.0);
                full
            });
            (op.coords.clone(), psi.to_vec(), zeta)
        }
        Geometry::Radial => {
            let mut coords = op.coords.clone();
            coords.push(1.0);
            let k = psi.len();
            let mut psi_out = psi.to_vec();
            let edge = if k >= 2 {
                psi[k - 1] + 0.5 * (psi[k - 1] - psi[k - 2])
            } else {
                psi[0]
            };
            psi_out.push(edge);
            let zeta = zeta.map_or_else(Vec::new, |z| {
                let mut full = z.to_vec();
                full.push(0.0);
                full
            });
            (coords, psi_out, zeta)
        }
    }
}

/// Internal unknowns `(psi, zeta)` recovered from a result.
fn from_output<'r>(op: &SloshOperator, res: &'r EigenResult) -> Result<(&'r [f64], &'r [f64]), EigenError> {
    let n = op.len();
    let expected = match op.geometry {
        Geometry::Canal => n,
        Geometry::Radial => n + 1,
    };
    if res.psi.len() != expected {
        return Err(EigenError::GridMismatch(format!(
            "result has {} potential values, operator expects {expected}",
            res.psi.len()
        )));
    }
    let psi = &res.psi[..n];
    let zeta: &[f64] = match (&op.surface, op.geometry) {
        (None, _) => &[],
        (Some(s), Geometry::Canal) if res.zeta.len() == expected => &res.zeta[1..1 + s.k_zeta.len()],
        (Some(s), Geometry::Radial) if res.zeta.len() == expected => &res.zeta[..s.k_zeta.len()],
        _ => return Err(EigenError::GridMismatch("surface profile has the wrong length".into())),
    };
    Ok((psi, zeta))
}

/// Normwise backward error of a result. With surface tension:
/// `max(|K_psi psi - Omega W zeta|, |K_zeta zeta - Omega W psi|)
///  / ((|K_psi| + |K_zeta| + Omega |W|) |(psi, zeta)|)`;
/// without: `|K_psi psi - lambda W psi| / ((|K_psi| + lambda |W|) |psi|)`.
pub fn residual(op: &SloshOperator, res: &EigenResult) -> Result<f64, EigenError> {
    residual_at(op, res, res.omega1)
}

/// As [`residual`] with the frequency replaced by `omega`.
pub fn residual_at(op: &SloshOperator, res: &EigenResult, omega: f64) -> Result<f64, EigenError> {
    let (psi, zeta) = from_output(op, res)?;
    let state = (dot(psi, psi) + dot(zeta, zeta)).sqrt();
    if !(state > 0.0) {
        return Err(EigenError::InvalidInput("residual of the zero vector".into()));
    }
    let kpsi = op.k_psi.mul(psi);
    let w_inf = op.mass_norm_inf();
    match &op.surface {
        None => {
            let lam = omega * omega;
            let r: Vec<f64> = kpsi
                .iter()
                .zip(psi.iter().zip(&op.weights))
                .map(|(k, (p, w))| k - lam * w * p)
                .collect();
            Ok(norm(&r) / ((op.k_psi.norm_inf() + lam * w_inf) * state))
        }
        Some(s) => {
            let w = op.surface_weights().unwrap();
            let mut r1 = kpsi;
            for (j, z) in zeta.iter().enumerate() {
                r1[s.offset + j] -= omega * w[j] * z;
            }
            let kz = s.k_zeta.mul(zeta);
            let r2: Vec<f64> = kz
                .iter()
                .enumerate()
                .map(|(j, k)| k - omega * w[j] * psi[s.offset + j])
                .collect();
            let scale = op.k_psi.norm_inf() + s.k_zeta.norm_inf() + omega.abs() * w_inf;
            Ok(norm(&r1).max(norm(&r2)) / (scale * state))
        }
    }
}

/// Kinetic, surface and coupling forms of a result.
pub fn energies(op: &SloshOperator, res: &EigenResult) -> Result<Energies, EigenError> {
    let (psi, zeta) = from_output(op, res)?;
    let kinetic = 0.5 * op.psi_energy(psi);
    let (surface, coupling) = match &op.surface {
        None => (0.0, 0.0),
        Some(s) => {
            let w = op.surface_weights().unwrap();
            let g = zeta
                .iter()
                .zip(w)
                .zip(&psi[s.offset..])
                .map(|((z, w), p)| z * w * p)
                .sum();
            (0.5 * dot(zeta, &s.k_zeta.mul(zeta)), g)
        }
    };
    Ok(Energies {
        kinetic,
        surface,
        coupling,
    })
}

/// `sum_i W_i zeta_i`, zero for a non-trivial mode of the `alpha = 0` / `m = 0` problem.
pub fn surface_mass(op: &SloshOperator, res: &EigenResult) -> Result<f64, EigenError> {
    let (_, zeta) = from_output(op, res)?;
    Ok(op.surface_weights().map_or(0.0, |w| dot(w, zeta)))
}

/// Fundamental frequency of an assembled operator. An infinite Bond number
/// selects the no-surface-tension problem. The result is normalized to
/// `psi^T W zeta = 1` (or `psi^T W psi = 1` without surface tension).
pub fn fundamental_mode(op: &SloshOperator, tol: f64, max_iter: usize) -> Result<EigenResult, EigenError> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(EigenError::InvalidInput(
            "tol must be positive and max_iter nonzero".into(),
        ));
    }
    let (lam, mut psi, iterations) = inverse_iteration(op, tol, max_iter)?;
    let omega = lam.sqrt();
    if psi.last().copied().unwrap_or(0.0) < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
    let zeta = match op.surface {
        None => {
            let s = psi.iter().zip(&op.weights).map(|(p, w)| p * p * w).sum::<f64>().sqrt();
            psi.iter_mut().for_each(|v| *v /= s);
            None
        }
        Some(_) => {
            let mut zeta = surface_profile(op, &psi, omega);
            let g: f64 = op
                .surface_weights()
                .unwrap()
                .iter()
                .zip(&zeta)
                .zip(&psi[op.surface.as_ref().unwrap().offset..])
                .map(|((w, z), p)| w * z * p)
                .sum();
            let s = g.sqrt();
            psi.iter_mut().for_each(|v| *v /= s);
            zeta.iter_mut().for_each(|v| *v /= s);
            Some(zeta)
        }
    };
    let (coords, psi_out, zeta_out) = to_output(op, &psi, zeta.as_deref());
    let mut res = EigenResult {
        omega1: omega,
        lambda1: lam,
        coords,
        psi: psi_out,
        zeta: zeta_out,
        residual: 0.0,
        iterations,
    };
    res.residual = residual(op, &res)?;
    if op.singular && op.surface.is_some() {
        let mass = surface_mass(op, &res)?;
        let scale: f64 = op
            .surface_weights()
            .unwrap()
            .iter()
            .zip(zeta.as_deref().unwrap())
            .map(|(w, z)| (w * z).abs())
            .sum();
        if mass.abs() > MASS_WARN * scale {
            log::warn!("surface mass {mass:e} not conserved (scale {scale:e})");
        }
    }
    Ok(res)
}

/// Assembles the operator for `shape` and solves it.
pub fn solve_shape(
    shape: &ShapeSamples,
    parameter: f64,
    bond: BondNumber,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult, EigenError> {
    let op = assemble(shape, parameter, bond)?;
    fundamental_mode(&op, tol, max_iter)
}

/// Dispatches on the shape geometry; `parameter` is `alpha` or `m`.
pub fn assemble(shape: &ShapeSamples, parameter: f64, bond: BondNumber) -> Result<SloshOperator, EigenError> {
    match shape.geometry() {
        Geometry::Canal => assemble_canal(shape, parameter, bond),
        Geometry::Radial => {
            if !(parameter >= 0.0) || parameter.fract() != 0.0 || parameter > u32::MAX as f64 {
                return Err(EigenError::InvalidInput(format!(
                    "m must be a nonnegative integer, got {parameter}"
                )));
            }
            assemble_radial(shape, parameter as u32, bond)
        }
    }
}

/// Fundamental mode of the problem without surface tension.
pub fn fundamental_mode_no_st(
    shape: &ShapeSamples,
    parameter: f64,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult, EigenError> {
    solve_shape(shape, parameter, BondNumber::Infinite, tol, max_iter)
}

/// Writes the metadata row `omega1,lambda1,residual,n`, then `x,psi,zeta`
/// (or `r,psi,zeta`) rows; `zeta` is left empty without surface tension.
pub fn write_result_csv<W: Write>(res: &EigenResult, geometry: Geometry, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    w.write_record(["omega1", "lambda1", "residual", "n"])?;
    w.write_record([
        format_float(res.omega1),
        format_float(res.lambda1),
        format_float(res.residual),
        res.coords.len().to_string(),
    ])?;
    w.write_record([geometry.coordinate_name(), "psi", "zeta"])?;
    for (i, (x, p)) in res.coords.iter().zip(&res.psi).enumerate() {
        let z = res.zeta.get(i).map(|v| format_float(*v)).unwrap_or_default();
        w.write_record([format_float(*x), format_float(*p), z])?;
    }
    w.flush()?;
    Ok(())
}
