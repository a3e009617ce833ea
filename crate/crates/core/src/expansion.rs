//! Closed-form asymptotic expansions of the low-lying Robin eigenvalues and
//! the dictionary between the boundary-parameter form λₙ(γ) and the
//! semiclassical form μₙ(h), h = γ⁻².

#[derive(Debug, thiserror::Error)]
pub enum ExpansionError {
    #[error("gamma must be negative, got {0}")]
    NonNegativeGamma(f64),
    #[error("requested order {requested} but only {available} correction coefficients available")]
    MissingCoefficients { requested: usize, available: usize },
}

/// Coefficient bundle for one level n: local geometry data plus the ζ_{j,n}
/// sequence from the correction recursion. The half-power coefficients
/// β_{j,n} are never stored; they are read off via β_{j,n} = ζ_{2j+1,n}.
#[derive(Debug, Clone)]
pub struct ExpansionCoefficients {
    pub kappa_max: f64,
    pub k2: f64,
    pub n: usize,
    /// ζ_{0,n}, ζ_{1,n}, … (may be empty for three-term evaluation)
    pub zeta: Vec<f64>,
}

impl ExpansionCoefficients {
    pub fn three_term(kappa_max: f64, k2: f64, n: usize) -> Self {
        ExpansionCoefficients {
            kappa_max,
            k2,
            n,
            zeta: Vec::new(),
        }
    }

    /// coefficient of the h^{7/4} term, (2n−1)√(k2/2)
    pub fn third_term(&self) -> f64 {
        (2.0 * self.n as f64 - 1.0) * (self.k2 / 2.0).sqrt()
    }

    /// β_{j,n} = ζ_{2j+1,n}
    pub fn beta(&self, j: usize) -> Option<f64> {
        self.zeta.get(2 * j + 1).copied()
    }
}

pub fn gamma_to_h(gamma: f64) -> Result<f64, ExpansionError> {
    if gamma >= 0.0 {
        return Err(ExpansionError::NonNegativeGamma(gamma));
    }
    Ok(gamma.powi(-2))
}

pub fn h_to_gamma(h: f64) -> f64 {
    assert!(h > 0.0);
    -1.0 / h.sqrt()
}

/// λₙ(γ) = −γ² + γκ_max + (2n−1)√(k2/2)|γ|^{1/2} + Σ_{j=0}^{M} β_{j,n}|γ|^{−j/2}.
/// Pass M < 0 (as `order: None`) for the plain three-term form.
pub fn lambda_expansion(
    gamma: f64,
    coeffs: &ExpansionCoefficients,
    order: Option<usize>,
) -> Result<f64, ExpansionError> {
    if gamma >= 0.0 {
        return Err(ExpansionError::NonNegativeGamma(gamma));
    }
    let g = gamma.abs();
    let mut v = -gamma * gamma + gamma * coeffs.kappa_max + coeffs.third_term() * g.sqrt();
    if let Some(m) = order {
        for j in 0..=m {
            let beta = coeffs.beta(j).ok_or(ExpansionError::MissingCoefficients {
                requested: m,
                available: coeffs.zeta.len().saturating_sub(1) / 2,
            })?;
            v += beta * g.powf(-(j as f64) / 2.0);
        }
    }
    Ok(v)
}

/// μₙ(h) = −h − κ_max h^{3/2} + (2n−1)√(k2/2) h^{7/4}
///         + h^{15/8} Σ_{j=0}^{M} ζ_{j,n} h^{j/8}.
pub fn mu_expansion(
    h: f64,
    coeffs: &ExpansionCoefficients,
    order: Option<usize>,
) -> Result<f64, ExpansionError> {
    assert!(h > 0.0);
    let mut v = -h - coeffs.kappa_max * h.powf(1.5) + coeffs.third_term() * h.powf(1.75);
    if let Some(m) = order {
        if m >= coeffs.zeta.len() {
            return Err(ExpansionError::MissingCoefficients {
                requested: m,
                available: coeffs.zeta.len(),
            });
        }
        for (j, &z) in coeffs.zeta.iter().take(m + 1).enumerate() {
            v += z * h.powf(15.0 / 8.0 + j as f64 / 8.0);
        }
    }
    Ok(v)
}

/// The individual terms of μₙ(h), for reporting.
pub fn mu_terms(h: f64, coeffs: &ExpansionCoefficients, order: Option<usize>) -> Vec<f64> {
    let mut t = vec![
        -h,
        -coeffs.kappa_max * h.powf(1.5),
        coeffs.third_term() * h.powf(1.75),
    ];
    if let Some(m) = order {
        for (j, &z) in coeffs.zeta.iter().take(m + 1).enumerate() {
            t.push(z * h.powf(15.0 / 8.0 + j as f64 / 8.0));
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ellipse_coeffs(n: usize) -> ExpansionCoefficients {
        ExpansionCoefficients::three_term(2.0, 18.0, n)
    }

    #[test]
    fn dictionary() {
        assert_abs_diff_eq!(gamma_to_h(-10.0).unwrap(), 0.01, epsilon = 1e-16);
        assert!(gamma_to_h(1.0).is_err());
        assert_abs_diff_eq!(h_to_gamma(0.01), -10.0, epsilon = 1e-12);
        // μ = −h maps to λ = −γ²
        assert_abs_diff_eq!(0.01f64.powi(-2) * 0.01, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn three_term_ellipse_value() {
        // −γ² + γκ_max + 3√(k2/2)·... at γ = −10: −100 − 20 + 3√10
        let v = lambda_expansion(-10.0, &ellipse_coeffs(1), None).unwrap();
        assert_abs_diff_eq!(v, -120.0 + 3.0 * 10.0f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, -110.51316701949486, epsilon = 1e-10);
    }

    #[test]
    fn gap_at_third_order() {
        let l1 = lambda_expansion(-10.0, &ellipse_coeffs(1), None).unwrap();
        let l2 = lambda_expansion(-10.0, &ellipse_coeffs(2), None).unwrap();
        assert_abs_diff_eq!(l2 - l1, 6.0 * 10.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn scaling_consistency() {
        // h⁻²·μ(γ⁻²) = λ(γ) term by term
        let mut c = ellipse_coeffs(1);
        c.zeta = vec![0.0, 2.71, 0.0, -1.3];
        for &gamma in &[-5.0, -20.0, -400.0] {
            let h = gamma_to_h(gamma).unwrap();
            let lam = lambda_expansion(gamma, &c, Some(1)).unwrap();
            let mu = mu_expansion(h, &c, Some(3)).unwrap();
            assert_abs_diff_eq!(mu / (h * h), lam, epsilon = 1e-9 * lam.abs());
        }
    }

    #[test]
    fn beta_index_map() {
        let mut c = ellipse_coeffs(1);
        c.zeta = vec![0.0, 2.71, 0.0, -1.3, 0.0, 0.9];
        assert_eq!(c.beta(0), Some(2.71));
        assert_eq!(c.beta(1), Some(-1.3));
        assert_eq!(c.beta(2), Some(0.9));
        assert_eq!(c.beta(3), None);
    }

    #[test]
    fn missing_coefficients_error() {
        let c = ellipse_coeffs(1);
        assert!(matches!(
            lambda_expansion(-10.0, &c, Some(0)),
            Err(ExpansionError::MissingCoefficients { .. })
        ));
    }

    #[test]
    fn level_monotonicity_and_gap() {
        let h = 1e-3;
        let m1 = mu_expansion(h, &ellipse_coeffs(1), None).unwrap();
        let m2 = mu_expansion(h, &ellipse_coeffs(2), None).unwrap();
        assert!(m2 > m1);
        assert_abs_diff_eq!(m2 - m1, 6.0 * h.powf(1.75), epsilon = 1e-15);
    }
}
