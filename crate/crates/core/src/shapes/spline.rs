//! Natural cubic spline through equispaced or arbitrary knots.

/// Natural cubic interpolant (zero second derivative at both ends).
#[derive(Clone, Debug)]
pub struct NaturalSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalSpline {
    /// `knots` must be strictly increasing and at least two long.
    pub fn new(knots: &[f64], values: &[f64]) -> Self {
        assert!(knots.len() >= 2 && knots.len() == values.len());
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut upper = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for k in 0..m {
                let i = k + 1;
                let h0 = knots[i] - knots[i - 1];
                let h1 = knots[i + 1] - knots[i];
                diag[k] = 2.0 * (h0 + h1);
                upper[k] = h1;
                rhs[k] = 6.0 * ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0);
            }
            for k in 1..m {
                let lower = knots[k + 1] - knots[k];
                let w = lower / diag[k - 1];
                diag[k] -= w * upper[k - 1];
                rhs[k] -= w * rhs[k - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for k in (0..m - 1).rev() {
                second[k + 1] = (rhs[k] - upper[k] * second[k + 2]) / diag[k];
            }
        }
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.knots.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
}
