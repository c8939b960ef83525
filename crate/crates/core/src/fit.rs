//! Least-squares line fits for the exponent sweeps.

use serde::Serialize;

/// Result of fitting y = slope * x + intercept.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n: usize,
}

/// Ordinary least squares on (x, y) pairs. Points with non-finite y are
/// dropped (log of an exact zero shows up as -inf in the sweeps).
pub fn fit_line(points: &[(f64, f64)]) -> LineFit {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let n = pts.len();
    if n < 2 {
        return LineFit { slope: f64::NAN, intercept: f64::NAN, r_squared: f64::NAN, n };
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit { slope, intercept, r_squared, n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        let f = fit_line(&pts);
        assert_relative_eq!(f.slope, -2.0, max_relative = 1e-12);
        assert_relative_eq!(f.intercept, 3.0, max_relative = 1e-12);
        assert_relative_eq!(f.r_squared, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn drops_non_finite() {
        let pts = vec![(1.0, 1.0), (2.0, 2.0), (3.0, f64::NEG_INFINITY), (4.0, 4.0)];
        let f = fit_line(&pts);
        assert_eq!(f.n, 3);
        assert_relative_eq!(f.slope, 1.0, max_relative = 1e-12);
    }
}
