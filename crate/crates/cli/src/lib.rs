pub mod report;
pub mod sweep;

use std::path::Path;

use robinspec_core::corrections::{build_operator_series, run_iteration, CorrectionError};
use robinspec_core::geometry::{
    arc_length_reparam, localize_max, CurvatureProfile, GeometryError, ParametricCurve,
};
use robinspec_core::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("curve spec: {0}")]
    CurveSpec(#[from] serde_json::Error),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("corrections: {0}")]
    Corrections(#[from] CorrectionError),
    #[error("solver: {0}")]
    Solver(#[from] robinspec_core::solvers::SolverError),
    #[error("wkb: {0}")]
    Wkb(#[from] robinspec_core::wkb::WkbError),
    #[error("model: {0}")]
    Model(#[from] robinspec_core::model1d::Model1DError),
    #[error("expansion: {0}")]
    Expansion(#[from] robinspec_core::expansion::ExpansionError),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("exponent fit needs at least 4 grid points, got {0}")]
    InsufficientPoints(usize),
    #[error("exact arithmetic needs a rational curvature jet; entry {index} = {value} does not snap")]
    JetNotRational { index: usize, value: f64 },
    #[error("exact arithmetic needs a rational oscillator frequency, k2/2 = {0} is not a perfect square of rationals")]
    FrequencyNotRational(f64),
}

/// Reads a curve spec file, e.g. {"shape":"ellipse","a":2.0,"b":1.0}.
pub fn load_curve(path: &Path) -> Result<ParametricCurve, CliError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Arc-length table with the origin moved to the curvature maximum.
pub fn prepare_profile(
    curve: &ParametricCurve,
    n_samples: usize,
) -> Result<CurvatureProfile, CliError> {
    let mut profile = arc_length_reparam(curve, n_samples)?;
    match localize_max(&mut profile, 1e-9) {
        Ok(_) => {}
        // constant-curvature well: any origin serves
        Err(GeometryError::DegenerateMaximum(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(profile)
}

/// ζ_{0,n} … ζ_{max_zeta,n} from the correction recursion, float path.
pub fn zetas_float(
    profile: &CurvatureProfile,
    n: usize,
    max_zeta: usize,
) -> Result<Vec<f64>, CliError> {
    let jet = profile.kappa_jet_at_max(max_zeta + 8);
    let ops = build_operator_series(&jet, max_zeta + 7)?;
    let omega = (profile.k2 / 2.0).sqrt();
    let state = run_iteration(&ops, n, max_zeta, omega)?;
    Ok(state.zetas().iter().map(Scalar::to_f64).collect())
}

/// Same recursion in exact rational arithmetic. The curvature jet is snapped
/// to rationals (denominators up to 2^20); curves whose jets are not rational
/// to 1e-6 relative are rejected rather than silently rounded.
pub fn zetas_exact(
    profile: &CurvatureProfile,
    n: usize,
    max_zeta: usize,
) -> Result<Vec<num::BigRational>, CliError> {
    type Q = num::BigRational;
    let jet_f = profile.kappa_jet_at_max(max_zeta + 8);
    let mut jet = Vec::with_capacity(jet_f.len());
    for (index, &value) in jet_f.iter().enumerate() {
        let q = snap_rational(value, 1 << 20)
            .ok_or(CliError::JetNotRational { index, value })?;
        jet.push(q);
    }
    let half_k2 = Scalar::neg(&jet[2]).mul(&<Q as Scalar>::ratio(1, 2));
    let omega = rational_sqrt(&half_k2)
        .ok_or_else(|| CliError::FrequencyNotRational(profile.k2 / 2.0))?;
    let ops = build_operator_series(&jet, max_zeta + 7)?;
    let state = run_iteration(&ops, n, max_zeta, omega)?;
    Ok(state.zetas())
}

/// Nearest rational with denominator ≤ max_den by continued fractions,
/// accepted only when it reproduces v to 1e-6 relative.
fn snap_rational(v: f64, max_den: i64) -> Option<num::BigRational> {
    if !v.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1i128, 0i128, v.floor() as i128, 1i128);
    let mut frac = v - v.floor();
    for _ in 0..64 {
        let approx = p1 as f64 / q1 as f64;
        if (approx - v).abs() <= 1e-6 * v.abs().max(1.0) {
            return Some(num::BigRational::new(p1.into(), q1.into()));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let a = (1.0 / frac).floor();
        frac = 1.0 / frac - a;
        let (p2, q2) = (a as i128 * p1 + p0, a as i128 * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    None
}

/// √q when numerator and denominator are both perfect squares.
fn rational_sqrt(q: &num::BigRational) -> Option<num::BigRational> {
    use num::BigInt;
    if q < &num::BigRational::from_integer(0.into()) {
        return None;
    }
    let root = |x: &BigInt| -> Option<BigInt> {
        let r = x.sqrt();
        (&r * &r == *x).then_some(r)
    };
    Some(num::BigRational::new(root(q.numer())?, root(q.denom())?))
}
