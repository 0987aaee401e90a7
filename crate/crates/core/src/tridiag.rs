//! Thomas algorithm for the tridiagonal systems produced by implicit
//! diffusion and by the Newton linearization of the HJB step.

/// Tridiagonal matrix stored by diagonals. `lower[0]` and `upper[n-1]`
/// are ignored.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    /// Solves `A x = rhs` in place. Assumes no pivoting is needed, which
    /// holds for the diagonally dominant M-matrices built by the solvers.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = self.diag.len();
        debug_assert_eq!(rhs.len(), n);
        if n == 0 {
            return;
        }
        let mut c = vec![0.0; n];
        let mut beta = self.diag[0];
        c[0] = self.upper[0] / beta;
        rhs[0] /= beta;
        for i in 1..n {
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            c[i] = self.upper[i] / beta;
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= c[i] * rhs[i + 1];
        }
    }

    #[cfg(test)]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}
