//! Admissible depth profiles: nonnegative samples on a uniform grid with a
//! fixed area (canal) or volume (radial).

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Smallest grid accepted by [`ShapeSamples`].
pub const MIN_GRID: usize = 3;

/// Smallest grid accepted by [`random_admissible`].
pub const MIN_RANDOM_GRID: usize = 33;

/// Relative tolerance on node spacing when reading a shape file.
pub const SPACING_TOL: f64 = 1e-9;

/// Number of reseeding attempts before a degenerate draw is reported.
const MAX_RESEEDS: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Canal,
    Radial,
}

impl Geometry {
    /// Left end of the free surface: `-1` for canals, `0` for radial containers.
    pub fn start(self) -> f64 {
        match self {
            Self::Canal => -1.0,
            Self::Radial => 0.0,
        }
    }

    pub fn length(self) -> f64 {
        match self {
            Self::Canal => 2.0,
            Self::Radial => 1.0,
        }
    }

    /// Uniform nodes spanning the free surface, endpoints included.
    pub fn nodes(self, n: usize) -> Vec<f64> {
        let (a, len) = (self.start(), self.length());
        let last = n.saturating_sub(1).max(1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { a + len } else { a + len * i as f64 / last })
            .collect()
    }

    pub fn coordinate_name(self) -> &'static str {
        match self {
            Self::Canal => "x",
            Self::Radial => "r",
        }
    }
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Canal => "canal",
            Self::Radial => "radial",
        })
    }
}

impl std::str::FromStr for Geometry {
    type Err = AdmissibleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "canal" => Ok(Self::Canal),
            "radial" => Ok(Self::Radial),
            other => Err(AdmissibleError::Invalid(format!(
                "unknown geometry {other:?} (expected canal or radial)"
            ))),
        }
    }
}

#[derive(Debug, Error)]
pub enum AdmissibleError {
    #[error("invalid shape: {0}")]
    Invalid(String),
    #[error("degenerate shape: integral {0} is not positive")]
    Degenerate(f64),
    #[error("shape file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Depth `h >= 0` at uniform nodes of `[-1, 1]` (canal) or `[0, 1]` (radial).
/// Radial samples hold plain `h(r)`; the weight `r` is applied by the consumers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeSamples {
    geometry: Geometry,
    values: Vec<f64>,
    constraint_target: f64,
}

impl ShapeSamples {
    pub fn new(geometry: Geometry, values: Vec<f64>, constraint_target: f64) -> Result<Self, AdmissibleError> {
        if values.len() < MIN_GRID {
            return Err(AdmissibleError::Invalid(format!(
                "need at least {MIN_GRID} samples, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
            return Err(AdmissibleError::Invalid(format!(
                "sample {i} is {v}; depths must be finite and >= 0"
            )));
        }
        if !(constraint_target > 0.0) || !constraint_target.is_finite() {
            return Err(AdmissibleError::Invalid(format!(
                "constraint target must be positive, got {constraint_target}"
            )));
        }
        Ok(Self {
            geometry,
            values,
            constraint_target,
        })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn constraint_target(&self) -> f64 {
        self.constraint_target
    }

    pub fn spacing(&self) -> f64 {
        self.geometry.length() / (self.n() - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.geometry.nodes(self.n())
    }

    pub fn max_depth(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Mirror image `h(-x)`; radial shapes are returned unchanged.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        if self.geometry == Geometry::Canal {
            out.values.reverse();
        }
        out
    }

    /// Pointwise convex combination `(1 - t) self + t other`.
    pub fn blend(&self, other: &Self, t: f64) -> Result<Self, AdmissibleError> {
        if self.geometry != other.geometry || self.n() != other.n() {
            return Err(AdmissibleError::Invalid(
                "blended shapes must share geometry and grid".into(),
            ));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| ((1.0 - t) * a + t * b).max(0.0))
            .collect();
        Self::new(
            self.geometry,
            values,
            (1.0 - t) * self.constraint_target + t * other.constraint_target,
        )
    }

    /// Every sample multiplied by `c > 0`, target included.
    pub fn scaled(&self, c: f64) -> Result<Self, AdmissibleError> {
        Self::new(
            self.geometry,
            self.values.iter().map(|v| v * c).collect(),
            self.constraint_target * c,
        )
    }
}

fn trapezoid(values: impl Iterator<Item = f64>, n: usize, dx: f64) -> f64 {
    let mut s = 0.0;
    for (i, v) in values.enumerate() {
        s += if i == 0 || i + 1 == n { 0.5 * v } else { v };
    }
    s * dx
}

/// Canal: trapezoidal `int h dx`. Radial: `2 pi` times trapezoidal `int h r dr`,
/// directly comparable with the volume `V`.
pub fn quadrature(shape: &ShapeSamples) -> f64 {
    let n = shape.n();
    let dx = shape.spacing();
    match shape.geometry {
        Geometry::Canal => trapezoid(shape.values.iter().copied(), n, dx),
        Geometry::Radial => {
            let nodes = shape.nodes();
            2.0 * PI * trapezoid(shape.values.iter().zip(&nodes).map(|(h, r)| h * r), n, dx)
        }
    }
}

/// Rescales so that [`quadrature`] equals `target`.
pub fn normalize(shape: &ShapeSamples, target: f64) -> Result<ShapeSamples, AdmissibleError> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(AdmissibleError::Invalid(format!(
            "target must be positive, got {target}"
        )));
    }
    let q = quadrature(shape);
    if !(q > 0.0) {
        return Err(AdmissibleError::Degenerate(q));
    }
    let c = target / q;
    ShapeSamples::new(shape.geometry, shape.values.iter().map(|v| v * c).collect(), target)
}

fn cosine_basis(geometry: Geometry, k: usize, x: f64) -> f64 {
    let k = k as f64;
    match geometry {
        Geometry::Canal => (k * PI * (x + 1.0) / 2.0).cos(),
        Geometry::Radial => (k * PI * x).cos(),
    }
}

/// Square of a random cosine polynomial with `n_modes + 1` terms, normalized to
/// `target`. Deterministic in `seed`; a numerically vanishing draw is replaced
/// by the draw for `seed + 1`.
pub fn random_admissible(
    seed: u64,
    geometry: Geometry,
    n: usize,
    n_modes: usize,
    target: f64,
) -> Result<ShapeSamples, AdmissibleError> {
    if n < MIN_RANDOM_GRID {
        return Err(AdmissibleError::Invalid(format!(
            "need n >= {MIN_RANDOM_GRID}, got {n}"
        )));
    }
    let nodes = geometry.nodes(n);
    for attempt in 0..MAX_RESEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let coeffs: Vec<f64> = (0..=n_modes).map(|_| rng.random_range(-1.0..1.0)).collect();
        let values: Vec<f64> = nodes
            .iter()
            .map(|&x| {
                let g: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * cosine_basis(geometry, k, x))
                    .sum();
                g * g
            })
            .collect();
        let shape = ShapeSamples::new(geometry, values, target)?;
        if quadrature(&shape) > 1e-12 {
            return normalize(&shape, target);
        }
        log::debug!(
            "random_admissible: seed {} degenerate, reseeding",
            seed.wrapping_add(attempt)
        );
    }
    Err(AdmissibleError::Degenerate(0.0))
}

/// Number of cosine modes in a perturbation direction.
const PERTURB_MODES: usize = 6;

/// Adds `epsilon * h * v` with `v` a random cosine combination scaled to
/// `max |v| = 1` and shifted so that `int h v = 0` (weighted by `r` for radial
/// shapes), clips at zero and renormalizes to the shape's target. Dry points stay dry.
pub fn perturb(shape: &ShapeSamples, seed: u64, epsilon: f64) -> Result<ShapeSamples, AdmissibleError> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(AdmissibleError::Invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(shape.clone());
    }
    let geometry = shape.geometry;
    let nodes = shape.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<f64> = (0..PERTURB_MODES).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * cosine_basis(geometry, j + 1, x))
                .sum()
        })
        .collect();
    let weighted = |v: &[f64]| -> f64 {
        let probe = ShapeSamples {
            geometry,
            values: v.iter().zip(&shape.values).map(|(a, h)| a * h).collect(),
            constraint_target: 1.0,
        };
        quadrature(&probe)
    };
    let total = quadrature(shape);
    if !(total > 0.0) {
        return Err(AdmissibleError::Degenerate(total));
    }
    let mean = weighted(&raw) / total;
    let v: Vec<f64> = raw.iter().map(|a| a - mean).collect();
    let vmax = v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let scale = if vmax > 0.0 { epsilon / vmax } else { 0.0 };
    let values = shape
        .values
        .iter()
        .zip(&v)
        .map(|(h, d)| (h * (1.0 + scale * d)).max(0.0))
        .collect();
    normalize(
        &ShapeSamples::new(geometry, values, shape.constraint_target)?,
        shape.constraint_target,
    )
}

/// Writes `x,h` (canal) or `r,h` (radial) rows.
pub fn write_csv<W: Write>(shape: &ShapeSamples, writer: W) -> Result<(), AdmissibleError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([shape.geometry.coordinate_name(), "h"])?;
    for (x, h) in shape.nodes().iter().zip(&shape.values) {
        w.write_record([format_float(*x), format_float(*h)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a shape file; the header selects the geometry and the grid must be
/// uniform over the whole free surface. The constraint target is taken from
/// the samples themselves.
pub fn read_csv<R: Read>(reader: R) -> Result<ShapeSamples, AdmissibleError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = r.headers()?.clone();
    let geometry = match (headers.get(0), headers.get(1), headers.len()) {
        (Some("x"), Some("h"), 2) => Geometry::Canal,
        (Some("r"), Some("h"), 2) => Geometry::Radial,
        _ => {
            return Err(AdmissibleError::Format(format!(
                "expected header x,h or r,h, found {:?}",
                headers.iter().collect::<Vec<_>>()
            )))
        }
    };
    let mut xs = Vec::new();
    let mut hs = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, AdmissibleError> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| AdmissibleError::Format(format!("row {}: unreadable number", line + 2)))
        };
        xs.push(parse(0)?);
        hs.push(parse(1)?);
    }
    if xs.len() < MIN_GRID {
        return Err(AdmissibleError::Format(format!(
            "need at least {MIN_GRID} rows, got {}",
            xs.len()
        )));
    }
    let expected = geometry.nodes(xs.len());
    let step = geometry.length() / (xs.len() - 1) as f64;
    for (i, (x, e)) in xs.iter().zip(&expected).enumerate() {
        if (x - e).abs() > SPACING_TOL * step {
            return Err(AdmissibleError::Format(format!(
                "row {}: coordinate {x} breaks the uniform grid (expected {e})",
                i + 2
            )));
        }
    }
    let probe = ShapeSamples::new(geometry, hs, 1.0).map_err(|e| AdmissibleError::Format(e.to_string()))?;
    let target = quadrature(&probe);
    if !(target > 0.0) {
        return Err(AdmissibleError::Degenerate(target));
    }
    ShapeSamples::new(geometry, probe.values, target)
}

/// Seventeen significant digits, as used by every CSV writer in the crate.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_canal_area() {
        let s = ShapeSamples::new(Geometry::Canal, vec![0.5; 101], 1.0).unwrap();
        assert!((quadrature(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zeros_integrate_to_zero_and_do_not_normalize() {
        let s = ShapeSamples::new(Geometry::Radial, vec![0.0; 11], 1.0).unwrap();
        assert_eq!(quadrature(&s), 0.0);
        assert!(matches!(normalize(&s, 1.0), Err(AdmissibleError::Degenerate(_))));
    }

    #[test]
    fn rejects_negative_samples() {
        assert!(ShapeSamples::new(Geometry::Canal, vec![1.0, -0.1, 1.0], 1.0).is_err());
        assert!(ShapeSamples::new(Geometry::Canal, vec![1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn normalize_unit_depth() {
        let s = ShapeSamples::new(Geometry::Canal, vec![1.0; 21], 1.0).unwrap();
        let t = normalize(&s, 1.0).unwrap();
        assert!(t.values().iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn random_zero_modes_is_uniform() {
        let s = random_admissible(3, Geometry::Canal, 65, 0, 1.0).unwrap();
        assert!(s.values().iter().all(|v| (v - 0.5).abs() < 1e-14));
        assert!(random_admissible(3, Geometry::Canal, 20, 2, 1.0).is_err());
    }

    #[test]
    fn perturb_zero_is_identity() {
        let s = random_admissible(9, Geometry::Radial, 65, 3, 1.0).unwrap();
        assert_eq!(perturb(&s, 1, 0.0).unwrap(), s);
    }

    #[test]
    fn nodes_hit_endpoints_exactly() {
        let x = Geometry::Canal.nodes(7);
        assert_eq!((x[0], x[3], x[6]), (-1.0, 0.0, 1.0));
        let r = Geometry::Radial.nodes(5);
        assert_eq!((r[0], r[4]), (0.0, 1.0));
    }

    #[test]
    fn csv_round_trip() {
        let s = random_admissible(11, Geometry::Radial, 40, 4, 2.0).unwrap();
        let mut buf = Vec::new();
        write_csv(&s, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.geometry(), Geometry::Radial);
        for (a, b) in back.values().iter().zip(s.values()) {
            assert_eq!(a, b);
        }
        assert!((back.constraint_target() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(read_csv("x,y\n-1,0\n0,1\n1,0\n".as_bytes()).is_err());
        assert!(read_csv("x,h\n-1,0\n0.1,1\n1,0\n".as_bytes()).is_err());
        assert!(read_csv("x,h\n-1,0\n0,abc\n1,0\n".as_bytes()).is_err());
        assert!(read_csv("x,h\n-1,0\n0,-1\n1,0\n".as_bytes()).is_err());
    }
}
