//! Least-squares utilities for extracting convergence orders and expansion
//! coefficients from parameter sweeps.

/// Ordinary least squares y ≈ a + b·x; returns (a, b, residuals).
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, Vec<f64>) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| u * v).sum();
    let b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let a = (sy - b * sx) / n;
    let res = x.iter().zip(y).map(|(u, v)| v - (a + b * u)).collect();
    (a, b, res)
}

/// Coefficient of determination of a fit given residuals.
pub fn r_squared(y: &[f64], residuals: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    }
}

#[derive(Debug, Clone)]
pub struct ExponentFit {
    pub exponent: f64,
    pub log_prefactor: f64,
    /// true if the largest-h point was discarded as an outlier
    pub dropped_point: bool,
    pub residual_rms: f64,
}

/// Fits |r(h)| ≈ C·h^p on log-log axes. Requires ≥ 4 points; the largest-h
/// point is dropped if its residual exceeds 3σ of the others (asymptotic
/// laws hold only for small h).
pub fn fit_exponent(h: &[f64], remainder: &[f64]) -> Option<ExponentFit> {
    if h.len() < 4 {
        return None;
    }
    let mut pairs: Vec<(f64, f64)> = h
        .iter()
        .zip(remainder)
        .filter(|(_, r)| r.abs() > 0.0)
        .map(|(&h, &r)| (h.ln(), r.abs().ln()))
        .collect();
    if pairs.len() < 4 {
        return None;
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let lx: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (a, b, res) = ols(&lx, &ly);
    // outlier test for the largest-h point (last after ascending sort):
    // fit the small-h points alone and compare its prediction error to 3σ
    let drop = if pairs.len() > 4 {
        let (ar, br, resr) = ols(&lx[..lx.len() - 1], &ly[..ly.len() - 1]);
        let sigma = (resr.iter().map(|r| r * r).sum::<f64>() / resr.len() as f64)
            .sqrt()
            .max(1e-12);
        let pred_err = ly[ly.len() - 1] - (ar + br * lx[lx.len() - 1]);
        pred_err.abs() > 3.0 * sigma
    } else {
        false
    };
    let (a, b, res) = if drop {
        ols(&lx[..lx.len() - 1], &ly[..ly.len() - 1])
    } else {
        (a, b, res)
    };
    let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
    Some(ExponentFit {
        exponent: b,
        log_prefactor: a,
        dropped_point: drop,
        residual_rms: rms,
    })
}

/// Extracts the h^{7/4} coefficient from remainders r(h) = c·h^{7/4}(1 + O(h^{1/8})):
/// fits r/h^{7/4} = c + d·h^{1/4} and returns c. More robust at desk scale
/// than reading off the smallest-h ratio.
pub fn fit_coefficient_7_4(h: &[f64], remainder: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|&v| v.powf(0.25)).collect();
    let y: Vec<f64> = h
        .iter()
        .zip(remainder)
        .map(|(&h, &r)| r / h.powf(1.75))
        .collect();
    ols(&x, &y).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn synthetic_ladder_recovery() {
        // μ(h) = −h − 2h^{3/2} + 3h^{7/4}: peeling terms recovers exponents
        let hs: Vec<f64> = (0..6).map(|i| 0.01 / 2f64.powi(i)).collect();
        let mu: Vec<f64> = hs
            .iter()
            .map(|&h| -h - 2.0 * h.powf(1.5) + 3.0 * h.powf(1.75))
            .collect();
        // peeling with the other terms subtracted exactly recovers each
        // exponent to machine precision
        let r0: Vec<f64> = hs
            .iter()
            .zip(&mu)
            .map(|(&h, &m)| m + 2.0 * h.powf(1.5) - 3.0 * h.powf(1.75))
            .collect();
        let fit0 = fit_exponent(&hs, &r0).unwrap();
        assert_abs_diff_eq!(fit0.exponent, 1.0, epsilon = 1e-6);
        let r1: Vec<f64> = hs
            .iter()
            .zip(&mu)
            .map(|(&h, &m)| m + h - 3.0 * h.powf(1.75))
            .collect();
        let fit1 = fit_exponent(&hs, &r1).unwrap();
        assert_abs_diff_eq!(fit1.exponent, 1.5, epsilon = 1e-6);
        // with contamination left in, the fit is only asymptotically clean
        let fit_raw = fit_exponent(&hs, &mu).unwrap();
        assert_abs_diff_eq!(fit_raw.exponent, 1.0, epsilon = 5e-2);
        let r2: Vec<f64> = hs
            .iter()
            .zip(&mu)
            .map(|(&h, &m)| m + h + 2.0 * h.powf(1.5))
            .collect();
        let fit2 = fit_exponent(&hs, &r2).unwrap();
        assert_abs_diff_eq!(fit2.exponent, 1.75, epsilon = 1e-6);
        assert_abs_diff_eq!(fit2.log_prefactor.exp(), 3.0, epsilon = 1e-6);
        assert_abs_diff_eq!(fit_coefficient_7_4(&hs, &r2), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn outlier_drop() {
        let hs = [0.1, 0.05, 0.025, 0.0125, 0.00625];
        let mut r: Vec<f64> = hs.iter().map(|&h| 2.0 * h * h).collect();
        r[0] *= 40.0; // corrupt the largest-h point
        let fit = fit_exponent(&hs, &r).unwrap();
        assert!(fit.dropped_point);
        assert_abs_diff_eq!(fit.exponent, 2.0, epsilon = 1e-8);
    }

    #[test]
    fn r_squared_perfect_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        let (_, _, res) = ols(&x, &y);
        assert_abs_diff_eq!(r_squared(&y, &res), 1.0, epsilon = 1e-12);
    }
}
