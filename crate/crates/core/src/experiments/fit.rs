//! Deterministic least-squares power-law fits on log-log data.

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("power-law fit needs at least 4 points in the window (got {0})")]
    TooFewPoints(usize),
    #[error("power-law fit requires positive data (offending value {0})")]
    FitDomainError(f64),
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    /// Intercept in log space; `amplitude = exp(intercept)`.
    pub intercept: f64,
    pub r2: f64,
    pub n_points: usize,
    pub window: (f64, f64),
}

impl PowerFit {
    pub fn amplitude(&self) -> f64 {
        self.intercept.exp()
    }
}

/// Least squares on `(ln x, ln y)` restricted to `window` in `x`.
pub fn fit_powerlaw(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<PowerFit, FitError> {
    assert_eq!(xs.len(), ys.len());
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if x < window.0 || x > window.1 {
            continue;
        }
        if x <= 0.0 {
            return Err(FitError::FitDomainError(x));
        }
        if y <= 0.0 {
            return Err(FitError::FitDomainError(y));
        }
        lx.push(x.ln());
        ly.push(y.ln());
    }
    let n = lx.len();
    if n < 4 {
        return Err(FitError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(PowerFit { exponent, intercept, r2, n_points: n, window })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_square_law() {
        let xs: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let fit = fit_powerlaw(&xs, &ys, (0.5, 10.0)).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.amplitude(), 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perturbed_inverse_square_root() {
        let xs: Vec<f64> = (0..30).map(|i| 1.5f64.powi(i)).collect();
        let ys: Vec<f64> =
            xs.iter().map(|x| x.powf(-0.5) * (1.0 + 0.01 * x.ln().sin())).collect();
        let fit = fit_powerlaw(&xs, &ys, (xs[0], *xs.last().unwrap())).unwrap();
        assert!((fit.exponent + 0.5).abs() < 0.02, "exponent {}", fit.exponent);
    }

    #[test]
    fn constant_series_has_zero_exponent() {
        let xs: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let ys = vec![4.2; 10];
        let fit = fit_powerlaw(&xs, &ys, (0.0, 11.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_input() {
        let xs = vec![1.0, 2.0, 3.0, 4.0];
        assert!(matches!(
            fit_powerlaw(&xs, &[1.0, 2.0, -1.0, 3.0], (0.0, 5.0)),
            Err(FitError::FitDomainError(_))
        ));
        assert!(matches!(
            fit_powerlaw(&xs[..3], &[1.0, 2.0, 3.0], (0.0, 5.0)),
            Err(FitError::TooFewPoints(3))
        ));
        // window filtering can also starve the fit
        assert!(matches!(
            fit_powerlaw(&xs, &[1.0; 4], (3.5, 5.0)),
            Err(FitError::TooFewPoints(_))
        ));
    }
}
