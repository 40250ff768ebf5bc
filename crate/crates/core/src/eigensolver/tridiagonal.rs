/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal, `off[i]` at
/// `(i, i+1)` and `(i+1, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

/// `L D L^T` factor of a positive-definite [`Tridiagonal`].
#[derive(Debug, Clone)]
pub struct LdlFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            diag: vec![0.0; n],
            off: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Adds `c (e_i - e_{i+1})(e_i - e_{i+1})^T`, the stencil of one flux.
    pub fn add_flux(&mut self, i: usize, c: f64) {
        self.diag[i] += c;
        self.diag[i + 1] += c;
        self.off[i] -= c;
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n.saturating_sub(1) {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// The matrix with its first row and column removed.
    pub fn without_first(&self) -> Self {
        Self {
            diag: self.diag[1..].to_vec(),
            off: self.off.get(1..).map(<[f64]>::to_vec).unwrap_or_default(),
        }
    }

    /// Factors the matrix, returning the index of the first non-positive
    /// pivot if it is not numerically positive definite.
    pub fn factor(&self) -> Result<LdlFactor, usize> {
        let n = self.len();
        let scale = self.norm_inf();
        let floor = f64::EPSILON * scale;
        let mut d = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n.saturating_sub(1));
        for i in 0..n {
            let pivot = if i == 0 {
                self.diag[0]
            } else {
                let li = self.off[i - 1] / d[i - 1];
                l.push(li);
                self.diag[i] - li * self.off[i - 1]
            };
            if !(pivot > floor) || !pivot.is_finite() {
                return Err(i);
            }
            d.push(pivot);
        }
        Ok(LdlFactor { d, l })
    }
}

impl LdlFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_vector() {
        let t = Tridiagonal {
            diag: vec![4.0, 5.0, 6.0, 7.0],
            off: vec![1.0, -2.0, 0.5],
        };
        let x = vec![1.0, -2.0, 3.0, 0.25];
        let b = t.mul(&x);
        let y = t.factor().unwrap().solve(&b);
        for (a, e) in y.iter().zip(&x) {
            assert!((a - e).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut t = Tridiagonal::zeros(3);
        t.add_flux(0, 1.0);
        t.add_flux(1, 1.0);
        assert_eq!(t.factor().unwrap_err(), 2);
        assert!(t.without_first().factor().is_ok());
    }

    #[test]
    fn norm_is_row_sum() {
        let t = Tridiagonal {
            diag: vec![1.0, -3.0],
            off: vec![2.0],
        };
        assert_eq!(t.norm_inf(), 5.0);
    }
}
