use super::NumericsError;

/// Natural cubic spline on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    start: f64,
    step: f64,
    values: Vec<f64>,
    curvature: Vec<f64>,
}

impl CubicSpline {
    /// Interpolates `values` sampled at `start + k * step`.
    pub fn uniform(start: f64, step: f64, values: Vec<f64>) -> Result<Self, NumericsError> {
        let n = values.len();
        if n < 2 {
            return Err(NumericsError::InvalidOutputGrid { points: n });
        }
        if !(step > 0.0) || !start.is_finite() || !step.is_finite() {
            return Err(NumericsError::InvalidInterval {
                t_start: start,
                t_end: start + step * (n - 1) as f64,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite { context: "spline samples".into() });
        }
        let curvature = natural_curvature(&values, step);
        Ok(Self { start, step, values, curvature })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    /// Value at `t`; queries outside the grid are clamped to its ends.
    pub fn eval(&self, t: f64) -> f64 {
        let last = self.values.len() - 1;
        let x = ((t - self.start) / self.step).clamp(0.0, last as f64);
        let k = (x.floor() as usize).min(last - 1);
        let b = x - k as f64;
        let a = 1.0 - b;
        let h2 = self.step * self.step / 6.0;
        a * self.values[k]
            + b * self.values[k + 1]
            + h2 * ((a * a * a - a) * self.curvature[k] + (b * b * b - b) * self.curvature[k + 1])
    }
}

// Second derivatives with zero end curvature (Thomas algorithm).
fn natural_curvature(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    let inner = n - 2;
    let mut diag = vec![4.0; inner];
    let mut rhs: Vec<f64> = (1..n - 1)
        .map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h))
        .collect();
    for i in 1..inner {
        let w = 1.0 / diag[i - 1];
        diag[i] -= w;
        rhs[i] -= w * rhs[i - 1];
    }
    m[inner] = rhs[inner - 1] / diag[inner - 1];
    for i in (0..inner - 1).rev() {
        m[i + 1] = (rhs[i] - m[i + 2]) / diag[i];
    }
    m
}
