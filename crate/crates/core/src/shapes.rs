//! Closed-form optimal container shapes `h*`, squared maximal frequencies
//! `lambda*`, and the optimal potential / free-surface profiles `(psi*, zeta*)`.
//!
//! Canals are parametrised by the wavenumber `alpha >= 0` and the
//! cross-sectional area `A`; radially symmetric containers by the azimuthal
//! index `m in {0, 1}` and the volume `V`. Every family has a finite-Bond
//! branch and a no-surface-tension branch.
//!
//! Large Bond numbers are evaluated through exponentially scaled ratios
//! (`cosh(k x)/cosh k`, `I_a(k r)/I_b(k)`) and, for `m = 0`, through the
//! second-kind Struve functions.
//!
//! Conventions of the `m = 0` solution:
//! - the middle term of `zeta*` uses `zeta_2(r) = 1 - I_0(k r)/I_0(k)`;
//! - the no-surface-tension limit shape is `6 V (r - r^2) / pi`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::admissible::{Geometry, ShapeSamples};
use crate::bond::BondNumber;
use crate::specfun::{
    bessel_i0_integral_ratio, bessel_i_ratio, d_zero, hyp2f3_special, struve_l, struve_m, struve_m0_integral,
    upsilon_over_i0, SpecFunError,
};

/// Above this `kappa = sqrt(Bo)` the `m = 0` formulas switch from the printed
/// `L_nu` / `2F3` form to the cancellation-free `M_nu` form.
pub const RADIAL0_STABLE_KAPPA: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("coordinate {0} outside the free surface")]
    Domain(f64),
    #[error("eigenfunction profiles need a finite Bond number")]
    InfiniteBond,
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
}

/// Canal family: wavenumber `alpha`, Bond number and cross-sectional area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanalCase {
    alpha: f64,
    bond: BondNumber,
    area: f64,
}

impl CanalCase {
    pub fn new(alpha: f64, bond: BondNumber, area: f64) -> Result<Self, ShapeError> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(ShapeError::InvalidCase(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(area > 0.0) || !area.is_finite() {
            return Err(ShapeError::InvalidCase(format!("area must be positive, got {area}")));
        }
        let bond = bond.validate().map_err(|e| ShapeError::InvalidCase(e.to_string()))?;
        Ok(Self { alpha, bond, area })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn bond(&self) -> BondNumber {
        self.bond
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// `kappa_alpha = sqrt(alpha^2 + Bo)` (`sqrt(Bo)` when `alpha = 0`).
    pub fn kappa(&self) -> Option<f64> {
        self.bond.value().map(|b| (self.alpha * self.alpha + b).sqrt())
    }
}

/// Radially symmetric family: azimuthal index `m`, Bond number and volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialCase {
    m: u32,
    bond: BondNumber,
    volume: f64,
}

impl RadialCase {
    pub fn new(m: u32, bond: BondNumber, volume: f64) -> Result<Self, ShapeError> {
        if m > 1 {
            return Err(ShapeError::InvalidCase(format!(
                "closed-form radial solutions exist only for m = 0 and m = 1, got {m}"
            )));
        }
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(ShapeError::InvalidCase(format!(
                "volume must be positive, got {volume}"
            )));
        }
        let bond = bond.validate().map_err(|e| ShapeError::InvalidCase(e.to_string()))?;
        Ok(Self { m, bond, volume })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn bond(&self) -> BondNumber {
        self.bond
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn kappa(&self) -> Option<f64> {
        self.bond.value().map(f64::sqrt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "geometry", rename_all = "lowercase")]
pub enum Case {
    Canal(CanalCase),
    Radial(RadialCase),
}

impl Case {
    pub fn geometry(&self) -> Geometry {
        match self {
            Self::Canal(_) => Geometry::Canal,
            Self::Radial(_) => Geometry::Radial,
        }
    }

    pub fn bond(&self) -> BondNumber {
        match self {
            Self::Canal(c) => c.bond,
            Self::Radial(c) => c.bond,
        }
    }

    /// Area `A` for canals, volume `V` for radial containers.
    pub fn constraint(&self) -> f64 {
        match self {
            Self::Canal(c) => c.area,
            Self::Radial(c) => c.volume,
        }
    }

    /// The same family at a different Bond number.
    pub fn with_bond(&self, bond: BondNumber) -> Result<Self, ShapeError> {
        Ok(match self {
            Self::Canal(c) => Self::Canal(CanalCase::new(c.alpha, bond, c.area)?),
            Self::Radial(c) => Self::Radial(RadialCase::new(c.m, bond, c.volume)?),
        })
    }

    /// Wavenumber `alpha` (canal) or azimuthal index `m` (radial) as a float.
    pub fn mode_parameter(&self) -> f64 {
        match self {
            Self::Canal(c) => c.alpha,
            Self::Radial(c) => c.m as f64,
        }
    }

    pub fn lambda_star(&self) -> Result<f64, ShapeError> {
        match self {
            Self::Canal(c) => Ok(lambda_star_canal(c)),
            Self::Radial(c) => lambda_star_radial(c),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Canal(c) => format!("canal(alpha={}, Bo={}, A={})", c.alpha, c.bond, c.area),
            Self::Radial(c) => format!("radial(m={}, Bo={}, V={})", c.m, c.bond, c.volume),
        }
    }
}

impl From<CanalCase> for Case {
    fn from(c: CanalCase) -> Self {
        Self::Canal(c)
    }
}

impl From<RadialCase> for Case {
    fn from(c: RadialCase) -> Self {
        Self::Radial(c)
    }
}

// ---------------------------------------------------------------------------
// Numerically stable hyperbolic ratios.

/// `cosh(k x) / cosh(k)` for `|x| <= 1`.
fn cosh_ratio(k: f64, x: f64) -> f64 {
    let ax = x.abs();
    (-k * (1.0 - ax)).exp() * (1.0 + (-2.0 * k * ax).exp()) / (1.0 + (-2.0 * k).exp())
}

/// `sinh(k x) / sinh(k)` for `|x| <= 1`, `k > 0`.
fn sinh_ratio(k: f64, x: f64) -> f64 {
    let ax = x.abs();
    let v = (-k * (1.0 - ax)).exp() * (-2.0 * k * ax).exp_m1() / (-2.0 * k).exp_m1();
    v.copysign(x)
}

/// `(cosh k - cosh(k x)) / sinh k`.
fn cosh_gap_over_sinh(k: f64, x: f64) -> f64 {
    if k < 20.0 {
        2.0 * (0.5 * k * (1.0 + x)).sinh() * (0.5 * k * (1.0 - x)).sinh() / k.sinh()
    } else {
        (1.0 - cosh_ratio(k, x)) / k.tanh()
    }
}

/// `(k - tanh k) / (k^2 tanh k)`, accurate for small `k`.
fn canal0_y(k: f64) -> f64 {
    let t = k.tanh();
    let gap = if k < 0.1 {
        let k2 = k * k;
        // k - tanh k = k^3/3 - 2k^5/15 + 17k^7/315 - 62k^9/2835 + 1382k^11/155925
        k * k2 * (1.0 / 3.0 - k2 * (2.0 / 15.0 - k2 * (17.0 / 315.0 - k2 * (62.0 / 2835.0 - k2 * 1382.0 / 155_925.0))))
    } else {
        k - t
    };
    gap / (k * k * t)
}

// ---------------------------------------------------------------------------
// Squared maximal frequencies.

/// `lambda*` for the canal family.
///
/// - `Bo = inf, alpha = 0`: `3A/2`
/// - `Bo = inf, alpha > 0`: `alpha^2 A / 2`
/// - `alpha = 0`: `(3A/2) [1 - 3 (sqrt(Bo) - tanh sqrt(Bo)) / (Bo tanh sqrt(Bo))]^-1`
/// - `alpha > 0`: `(alpha^2 A / 2) (k^2 / Bo) [1 - tanh(k)/k]^-1`, `k = sqrt(alpha^2 + Bo)`
pub fn lambda_star_canal(case: &CanalCase) -> f64 {
    let a = case.area;
    let alpha = case.alpha;
    match case.bond {
        BondNumber::Infinite if alpha == 0.0 => 1.5 * a,
        BondNumber::Infinite => 0.5 * alpha * alpha * a,
        BondNumber::Finite(bo) => {
            if alpha == 0.0 {
                1.5 * a / (1.0 - 3.0 * canal0_y(bo.sqrt()))
            } else {
                let k = (alpha * alpha + bo).sqrt();
                0.5 * alpha * alpha * a * (k * k / bo) / (1.0 - k.tanh() / k)
            }
        }
    }
}

/// `lambda*` for the radial family.
///
/// - `Bo = inf`: `4V/pi` (`m = 1`), `18V/pi` (`m = 0`)
/// - `m = 1`: `(4V/pi) [1 - 4 I_2(k) / (k I_1(k))]^-1`, `k = sqrt(Bo)`
/// - `m = 0`: `(18V/pi) [6 d_0 - 3 + 18 (1 - d_0) pi upsilon / (Bo I_0)
///   + 3 2F3(1, 2; 3/2, 5/2, 3; Bo/4) - 9 pi^2 L_0 upsilon / (Bo^{3/2} I_0)]^-1`
pub fn lambda_star_radial(case: &RadialCase) -> Result<f64, ShapeError> {
    let v = case.volume;
    match (case.m, case.bond) {
        (1, BondNumber::Infinite) => Ok(4.0 * v / PI),
        (_, BondNumber::Infinite) => Ok(18.0 * v / PI),
        (1, BondNumber::Finite(bo)) => {
            let k = bo.sqrt();
            let y = bessel_i_ratio(2, k, 1, k)? / k;
            Ok(4.0 * v / PI / (1.0 - 4.0 * y))
        }
        (_, BondNumber::Finite(bo)) => {
            let k = bo.sqrt();
            let d0 = d_zero(k)?;
            Ok(18.0 * v / PI / radial0_bracket(k, d0)?)
        }
    }
}

/// The bracket of the `m = 0` formula, `18 V / (pi lambda*)`.
pub fn radial0_bracket(k: f64, d0: f64) -> Result<f64, ShapeError> {
    if k <= RADIAL0_STABLE_KAPPA {
        radial0_bracket_printed(k, d0)
    } else {
        radial0_bracket_stable(k, d0)
    }
}

/// Bracket exactly as printed, with `upsilon` and `2F3`.
pub fn radial0_bracket_printed(k: f64, d0: f64) -> Result<f64, ShapeError> {
    let bo = k * k;
    let ups = upsilon_over_i0(k)?;
    let f = hyp2f3_special(0.25 * bo)?;
    let l0 = struve_l(0, k)?;
    Ok(6.0 * d0 - 3.0 + 18.0 * (1.0 - d0) * PI * ups / bo + 3.0 * f - 9.0 * PI * PI * l0 * ups / (bo * k))
}

/// Bracket with the last two terms rewritten as
/// `(18 pi / k^4) [M_0(k) int_0^k I_0 / I_0(k) - int_0^k M_0 - k^2/pi]`.
pub fn radial0_bracket_stable(k: f64, d0: f64) -> Result<f64, ShapeError> {
    let bo = k * k;
    let ups = upsilon_over_i0(k)?;
    let m0 = struve_m(0, k)?;
    let j = bessel_i0_integral_ratio(k)?;
    let im0 = struve_m0_integral(k)?;
    let tail = 18.0 * PI / (bo * bo) * (m0 * j - im0 - bo / PI);
    Ok(6.0 * d0 - 3.0 + 18.0 * (1.0 - d0) * PI * ups / bo + tail)
}

// ---------------------------------------------------------------------------
// Shapes and profiles.

fn check_canal_x(x: f64) -> Result<(), ShapeError> {
    if (-1.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(ShapeError::Domain(x))
    }
}

fn check_radial_r(r: f64) -> Result<(), ShapeError> {
    if (0.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(ShapeError::Domain(r))
    }
}

/// Optimal container depth for a canal case.
pub fn h_star_canal(x: f64, case: &CanalCase) -> Result<f64, ShapeError> {
    OptimalSolution::new(Case::Canal(*case))?.h(x)
}

/// `(psi*(x), zeta*(x))` for a finite-Bond canal case, with unit frequency
/// factor and the additive constant of `psi*` set to zero.
pub fn psi_zeta_star_canal(x: f64, case: &CanalCase) -> Result<(f64, f64), ShapeError> {
    OptimalSolution::new(Case::Canal(*case))?.psi_zeta(x)
}

pub fn h_star_radial(r: f64, case: &RadialCase) -> Result<f64, ShapeError> {
    OptimalSolution::new(Case::Radial(*case))?.h(r)
}

pub fn psi_zeta_star_radial(r: f64, case: &RadialCase) -> Result<(f64, f64), ShapeError> {
    OptimalSolution::new(Case::Radial(*case))?.psi_zeta(r)
}

/// Closed-form optimum of one case with its constants precomputed.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalSolution {
    pub lambda_star: f64,
    pub case: Case,
    /// `d_0` of the `m = 0` solution; absent otherwise.
    pub d0: Option<f64>,
    /// `sqrt(Bo)` or, for canals with `alpha > 0`, `sqrt(alpha^2 + Bo)`.
    pub kappa: Option<f64>,
}

impl OptimalSolution {
    pub fn new(case: Case) -> Result<Self, ShapeError> {
        let lambda_star = case.lambda_star()?;
        let (kappa, d0) = match case {
            Case::Canal(c) => (c.kappa(), None),
            Case::Radial(c) => {
                let k = c.kappa();
                let d0 = match (c.m, k) {
                    (0, Some(k)) => Some(d_zero(k)?),
                    _ => None,
                };
                (k, d0)
            }
        };
        Ok(Self {
            lambda_star,
            case,
            d0,
            kappa,
        })
    }

    /// Optimal depth `h*` at `x in [-1, 1]` (canal) or `r in [0, 1]` (radial).
    pub fn h(&self, x: f64) -> Result<f64, ShapeError> {
        let lam = self.lambda_star;
        match self.case {
            Case::Canal(c) => {
                check_canal_x(x)?;
                match (c.bond, self.kappa) {
                    (BondNumber::Infinite, _) if c.alpha == 0.0 => Ok(0.75 * c.area * (1.0 - x * x)),
                    (BondNumber::Infinite, _) => Ok(0.5 * c.area),
                    (BondNumber::Finite(_), Some(k)) if c.alpha == 0.0 => {
                        Ok(0.5 * lam * (1.0 - x * x) - lam / k * cosh_gap_over_sinh(k, x))
                    }
                    (BondNumber::Finite(bo), Some(k)) => {
                        Ok(lam * bo / (c.alpha * c.alpha * k * k) * (1.0 - cosh_ratio(k, x)))
                    }
                    _ => unreachable!("finite Bond number always has kappa"),
                }
            }
            Case::Radial(c) => {
                check_radial_r(x)?;
                let r = x;
                let Some(k) = self.kappa else {
                    return Ok(if c.m == 1 {
                        2.0 * c.volume * (1.0 - r * r) / PI
                    } else {
                        6.0 * c.volume * (r - r * r) / PI
                    });
                };
                if c.m == 1 {
                    // lam/2 (1 - r^2) - lam/(k I_1(k)) [I_0(k) - I_0(k r)]
                    let gap = bessel_i_ratio(0, k, 1, k)? - bessel_i_ratio(0, k * r, 1, k)?;
                    return Ok(0.5 * lam * (1.0 - r * r) - lam / k * gap);
                }
                let d0 = self.d0.expect("m = 0 solution carries d0");
                let i1r = bessel_i_ratio(1, k * r, 0, k)?;
                let struve_part = if k <= RADIAL0_STABLE_KAPPA {
                    struve_l(1, k * r)? - struve_l(0, k)? * i1r
                } else {
                    // L_1(kr) - L_0(k) I_1(kr)/I_0(k) = M_1(kr) - M_0(k) I_1(kr)/I_0(k)
                    struve_m(1, k * r)? - struve_m(0, k)? * i1r
                };
                Ok(lam / 3.0 * (1.5 * d0 * r - r * r)
                    + lam * (1.0 - d0) * i1r / k
                    + lam * PI / (2.0 * k * k) * struve_part)
            }
        }
    }

    /// Optimal `(psi*, zeta*)` with the frequency factor set to one.
    ///
    /// Canal `alpha = 0`: `(x, x - sinh(k x)/sinh k)`; canal `alpha > 0`:
    /// `(1, Bo/k^2 [1 - cosh(k x)/cosh k])`; radial `m = 1`:
    /// `(r, r - I_1(k r)/I_1(k))`; radial `m = 0`:
    /// `(r - d_0, zeta_1 - d_0 zeta_2 - pi/(2k) zeta_3)`.
    pub fn psi_zeta(&self, x: f64) -> Result<(f64, f64), ShapeError> {
        let k = self.kappa.ok_or(ShapeError::InfiniteBond)?;
        match self.case {
            Case::Canal(c) => {
                check_canal_x(x)?;
                if c.alpha == 0.0 {
                    Ok((x, x - sinh_ratio(k, x)))
                } else {
                    let bo = c.bond.value().expect("finite");
                    Ok((1.0, bo / (k * k) * (1.0 - cosh_ratio(k, x))))
                }
            }
            Case::Radial(c) => {
                check_radial_r(x)?;
                let r = x;
                if c.m == 1 {
                    return Ok((r, r - bessel_i_ratio(1, k * r, 1, k)?));
                }
                let d0 = self.d0.expect("m = 0 solution carries d0");
                let i0r = bessel_i_ratio(0, k * r, 0, k)?;
                let zeta1 = r - i0r;
                let zeta2 = 1.0 - i0r;
                let zeta3 = if k <= RADIAL0_STABLE_KAPPA {
                    struve_l(0, k * r)? - struve_l(0, k)? * i0r
                } else {
                    struve_m(0, k * r)? - struve_m(0, k)? * i0r
                };
                Ok((r - d0, zeta1 - d0 * zeta2 - PI / (2.0 * k) * zeta3))
            }
        }
    }

    /// `h*` sampled on `n` uniform nodes of the free surface. Values below
    /// zero by rounding only (`> -1e-12 lambda*`) are clipped to zero.
    pub fn samples(&self, n: usize) -> Result<ShapeSamples, ShapeError> {
        let geometry = self.case.geometry();
        let nodes = geometry.nodes(n);
        let floor = -1e-12 * self.lambda_star.max(1.0);
        let mut values = Vec::with_capacity(n);
        for &x in &nodes {
            let h = self.h(x)?;
            if h < floor {
                return Err(ShapeError::InvalidCase(format!(
                    "optimal shape negative ({h}) at {x}; constraint too large for this Bond number?"
                )));
            }
            values.push(h.max(0.0));
        }
        ShapeSamples::new(geometry, values, self.case.constraint()).map_err(|e| ShapeError::InvalidCase(e.to_string()))
    }
}
