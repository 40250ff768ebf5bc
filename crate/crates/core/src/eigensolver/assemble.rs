use crate::admissible::{Geometry, ShapeSamples};
use crate::bond::BondNumber;

use super::tridiagonal::{LdlFactor, Tridiagonal};
use super::EigenError;

/// Surface-side operator and the range of potential unknowns it couples to.
#[derive(Debug, Clone)]
pub struct SurfaceOperator {
    pub k_zeta: Tridiagonal,
    pub(crate) factor: LdlFactor,
    /// `zeta[j]` lives at potential unknown `offset + j`.
    pub offset: usize,
}

/// Discrete pinned-edge sloshing operator.
///
/// The coupled problem reads `K_psi psi = Omega W^T zeta`, `K_zeta zeta = Omega W psi`
/// with `W` the diagonal quadrature weights restricted to the surface unknowns.
/// `surface` is `None` for the no-surface-tension problem `K_psi psi = lambda W psi`.
#[derive(Debug, Clone)]
pub struct SloshOperator {
    pub geometry: Geometry,
    /// `alpha` for canals, `m` for radial containers.
    pub parameter: f64,
    pub bond: BondNumber,
    /// Coordinates of the potential unknowns.
    pub coords: Vec<f64>,
    pub k_psi: Tridiagonal,
    /// Flux coefficient between potential unknowns `i` and `i + 1`.
    pub psi_flux: Vec<f64>,
    /// Zeroth-order (`alpha^2` or `m^2 / r^2`) diagonal part of `K_psi`.
    pub psi_mass: Vec<f64>,
    /// Quadrature weights of the potential unknowns.
    pub weights: Vec<f64>,
    pub surface: Option<SurfaceOperator>,
    /// Constants lie in the kernel of `K_psi` (`alpha = 0` or `m = 0`).
    pub singular: bool,
    /// Number of samples of the shape the operator was built from.
    pub shape_n: usize,
}

impl SloshOperator {
    pub fn len(&self) -> usize {
        self.k_psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_psi.is_empty()
    }

    pub fn mass_norm_inf(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// `x^T K_psi x` summed as `sum c (x_i - x_{i+1})^2 + sum m x_i^2`.
    pub fn psi_energy(&self, x: &[f64]) -> f64 {
        let flux: f64 = self
            .psi_flux
            .iter()
            .enumerate()
            .map(|(i, c)| c * (x[i] - x[i + 1]).powi(2))
            .sum();
        let mass: f64 = self.psi_mass.iter().zip(x).map(|(m, v)| m * v * v).sum();
        flux + mass
    }

    /// Surface weights `W` (the coupling block) as a slice of `weights`.
    pub(crate) fn surface_weights(&self) -> Option<&[f64]> {
        self.surface
            .as_ref()
            .map(|s| &self.weights[s.offset..s.offset + s.k_zeta.len()])
    }
}

fn check_bond(bond: BondNumber) -> Result<(), EigenError> {
    bond.validate()
        .map(|_| ())
        .map_err(|e| EigenError::InvalidInput(e.to_string()))
}

fn potential_operator(psi_flux: &[f64], psi_mass: &[f64]) -> Tridiagonal {
    let mut k = Tridiagonal::zeros(psi_mass.len());
    for (i, c) in psi_flux.iter().enumerate() {
        k.add_flux(i, *c);
    }
    for (d, m) in k.diag.iter_mut().zip(psi_mass) {
        *d += m;
    }
    k
}

fn surface(k_zeta: Tridiagonal, offset: usize) -> Result<SurfaceOperator, EigenError> {
    let factor = k_zeta
        .factor()
        .map_err(|i| EigenError::Indefinite(format!("surface operator pivot {i} is not positive")))?;
    Ok(SurfaceOperator { k_zeta, factor, offset })
}

/// Vertex-centred flux-form discretization of the canal problem.
///
/// Potential unknowns sit at every node; stiffness uses midpoint depths
/// `(h_i + h_{i+1})/2`, so the natural end condition is a zero boundary flux.
/// Surface unknowns sit at interior nodes, pinned to zero at `x = +-1`.
pub fn assemble_canal(shape: &ShapeSamples, alpha: f64, bond: BondNumber) -> Result<SloshOperator, EigenError> {
    if shape.geometry() != Geometry::Canal {
        return Err(EigenError::GridMismatch("assemble_canal needs a canal shape".into()));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(EigenError::InvalidInput(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    check_bond(bond)?;
    let h = shape.values();
    let n = h.len();
    let dx = shape.spacing();
    let a2 = alpha * alpha;
    let mut weights = vec![dx; n];
    weights[0] = 0.5 * dx;
    weights[n - 1] = 0.5 * dx;

    let psi_flux: Vec<f64> = (0..n - 1).map(|i| 0.5 * (h[i] + h[i + 1]) / dx).collect();
    let psi_mass: Vec<f64> = (0..n).map(|i| a2 * weights[i] * h[i]).collect();
    let k_psi = potential_operator(&psi_flux, &psi_mass);

    let surface = match bond {
        BondNumber::Infinite => None,
        BondNumber::Finite(bo) => {
            let m = n - 2;
            let mut k = Tridiagonal::zeros(m);
            for i in 0..m {
                k.diag[i] = (1.0 + a2 / bo) * dx + 2.0 / (bo * dx);
            }
            for v in &mut k.off {
                *v = -1.0 / (bo * dx);
            }
            Some(surface(k, 1)?)
        }
    };

    Ok(SloshOperator {
        geometry: Geometry::Canal,
        parameter: alpha,
        bond,
        coords: shape.nodes(),
        k_psi,
        psi_flux,
        psi_mass,
        weights,
        surface,
        singular: alpha == 0.0,
        shape_n: n,
    })
}

/// Cell-centred flux-form discretization of the radial problem.
///
/// The `n` samples are the faces of `n - 1` cells with centres `r_i = (i + 1/2) dr`.
/// Face fluxes carry `r h / dr`; the face at `r = 0` has zero flux, which is the
/// symmetry condition for `m = 0`, while for `m >= 1` the `m^2 / r^2` term drives
/// the solution to zero at the origin. The surface unknown is pinned at `r = 1`
/// through a ghost value half a cell outside.
pub fn assemble_radial(shape: &ShapeSamples, m: u32, bond: BondNumber) -> Result<SloshOperator, EigenError> {
    if shape.geometry() != Geometry::Radial {
        return Err(EigenError::GridMismatch("assemble_radial needs a radial shape".into()));
    }
    check_bond(bond)?;
    let h = shape.values();
    let cells = h.len() - 1;
    let dr = shape.spacing();
    let m2 = (m as f64).powi(2);
    let centres: Vec<f64> = (0..cells).map(|i| (i as f64 + 0.5) * dr).collect();
    let weights: Vec<f64> = centres.iter().map(|r| r * dr).collect();
    let face = |j: usize| if j == cells { 1.0 } else { j as f64 * dr };

    let psi_flux: Vec<f64> = (1..cells).map(|j| face(j) * h[j] / dr).collect();
    let psi_mass: Vec<f64> = (0..cells)
        .map(|i| m2 * 0.5 * (h[i] + h[i + 1]) * dr / centres[i])
        .collect();
    let k_psi = potential_operator(&psi_flux, &psi_mass);

    let surface = match bond {
        BondNumber::Infinite => None,
        BondNumber::Finite(bo) => {
            let mut k = Tridiagonal::zeros(cells);
            for j in 1..cells {
                k.add_flux(j - 1, face(j) / (bo * dr));
            }
            k.diag[cells - 1] += face(cells) / (bo * 0.5 * dr);
            for i in 0..cells {
                k.diag[i] += weights[i] + m2 * dr / (centres[i] * bo);
            }
            Some(surface(k, 0)?)
        }
    };

    Ok(SloshOperator {
        geometry: Geometry::Radial,
        parameter: m as f64,
        bond,
        coords: centres,
        k_psi,
        psi_flux,
        psi_mass,
        weights,
        surface,
        singular: m == 0,
        shape_n: h.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_in_kernel() {
        let s = ShapeSamples::new(Geometry::Canal, vec![0.5; 21], 1.0).unwrap();
        let op = assemble_canal(&s, 0.0, BondNumber::Finite(1.0)).unwrap();
        assert!(op.k_psi.mul(&[1.0; 21]).iter().all(|v| v.abs() < 1e-12));
        let r = ShapeSamples::new(Geometry::Radial, vec![0.3; 21], 1.0).unwrap();
        let op = assemble_radial(&r, 0, BondNumber::Finite(1.0)).unwrap();
        assert!(op.k_psi.mul(&[1.0; 20]).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn geometry_mismatch() {
        let s = ShapeSamples::new(Geometry::Canal, vec![0.5; 21], 1.0).unwrap();
        assert!(matches!(
            assemble_radial(&s, 1, BondNumber::Infinite),
            Err(EigenError::GridMismatch(_))
        ));
    }

    #[test]
    fn radial_weights_integrate_r() {
        let r = ShapeSamples::new(Geometry::Radial, vec![1.0; 11], 1.0).unwrap();
        let op = assemble_radial(&r, 1, BondNumber::Infinite).unwrap();
        let s: f64 = op.weights.iter().sum();
        assert!((s - 0.5).abs() < 1e-15);
    }
}
