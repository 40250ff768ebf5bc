use super::SpecFunError;

/// Upper limit on the argument; beyond it the sum approaches `f64::MAX`.
pub const HYP2F3_MAX_Z: f64 = 1e5;

/// Default cap on the number of summed terms.
pub const DEFAULT_TERM_CAP: usize = 20_000;

/// `2F3(1, 2; 3/2, 5/2, 3; z)` for `0 <= z <= 1e5`.
pub fn hyp2f3_special(z: f64) -> Result<f64, SpecFunError> {
    hyp2f3_special_capped(z, DEFAULT_TERM_CAP)
}

/// As [`hyp2f3_special`] with an explicit cap on the number of terms.
pub fn hyp2f3_special_capped(z: f64, max_terms: usize) -> Result<f64, SpecFunError> {
    if !(z >= 0.0) || z > HYP2F3_MAX_Z {
        return Err(SpecFunError::domain("hyp2f3_special", z, "requires 0 <= z <= 1e5"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (1.0 + kf) * (2.0 + kf) * z / ((1.5 + kf) * (2.5 + kf) * (3.0 + kf) * (kf + 1.0));
        sum += term;
        if term < 1e-16 * sum {
            return Ok(sum);
        }
    }
    Err(SpecFunError::Convergence {
        function: "hyp2f3_special",
        terms: max_terms,
    })
}
