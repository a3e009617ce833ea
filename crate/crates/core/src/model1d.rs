//! The three auxiliary 1D model operators on the half-line / truncated
//! interval: H₀,₀ = −d²/dτ² with u′(0) = −u(0) on (0,∞), its Dirichlet
//! truncation H₀,h on (0,L), and the weighted operator H_{β,h}.
//!
//! The truncated ground state has the closed form
//! u(τ) = A(e^{−wτ} − e^{−2wL}e^{wτ}) with w the root of a transcendental
//! equation; the finite-difference paths serve as independent checks and as
//! templates for the 2D assembly.

#[derive(Debug, thiserror::Error)]
pub enum Model1DError {
    #[error("no sign change found for the transcendental root (L = {0})")]
    NoRoot(f64),
    #[error("weight 1 - beta*sqrt(h)*tau is not positive on the interval")]
    WeightNotPositive,
}

#[derive(Debug, Clone, Copy)]
pub struct Model1DConfig {
    /// interval length, scaling like h^{−ρ}
    pub l: f64,
    pub h: f64,
    pub beta: f64,
    pub grid_n: usize,
}

impl Model1DConfig {
    pub fn new(l: f64, grid_n: usize) -> Self {
        Model1DConfig {
            l,
            h: 0.0,
            beta: 0.0,
            grid_n,
        }
    }

    pub fn from_h_rho(h: f64, rho: f64, beta: f64, grid_n: usize) -> Self {
        Model1DConfig {
            l: h.powf(-rho),
            h,
            beta,
            grid_n,
        }
    }
}

/// Ground state of the truncated operator H₀,h.
#[derive(Debug, Clone)]
pub struct ModelEigenpair {
    pub lambda: f64,
    /// decay rate, λ = −w²
    pub w: f64,
    /// L² normalization constant; → √2 as L → ∞
    pub a: f64,
    pub l: f64,
}

impl ModelEigenpair {
    pub fn eval(&self, tau: f64) -> f64 {
        self.a * ((-self.w * tau).exp() - (-2.0 * self.w * self.l).exp() * (self.w * tau).exp())
    }
}

/// Spectrum of the half-line operator: {−1} ∪ [0, ∞).
pub fn halfline_spectrum() -> (Vec<f64>, f64) {
    (vec![-1.0], 0.0)
}

/// Normalized half-line ground state u₀(τ) = √2 e^{−τ}.
pub fn halfline_ground_state(tau: f64) -> f64 {
    std::f64::consts::SQRT_2 * (-tau).exp()
}

fn transcendental(v: f64, l: f64) -> f64 {
    v - 1.0 + (v + 1.0) * (-2.0 * v * l).exp()
}

/// Solves w − 1 + (w+1)e^{−2wL} = 0 for the decay rate of the H₀,h ground
/// state; λ₁ = −w². Bracketed bisection plus Newton polish.
pub fn solve_transcendental(l: f64) -> Result<ModelEigenpair, Model1DError> {
    // preferred bracket; scan fallback for small L where f(0.5) > 0
    let (mut lo, mut hi) = (0.5, 1.0);
    if transcendental(lo, l) >= 0.0 {
        let mut found = false;
        for i in 1..4096 {
            let v = i as f64 / 4096.0;
            if transcendental(v, l) < 0.0 {
                lo = v;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Model1DError::NoRoot(l));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if transcendental(mid, l) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = 0.5 * (lo + hi);
    for _ in 0..5 {
        let f = transcendental(w, l);
        let df = 1.0 + (1.0 - 2.0 * l * (w + 1.0)) * (-2.0 * w * l).exp();
        let step = f / df;
        w -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    // ‖u‖² = A²[(1 − B²)/(2w) − 2BL], B = e^{−2wL}
    let b = (-2.0 * w * l).exp();
    let norm2 = (1.0 - b * b) / (2.0 * w) - 2.0 * b * l;
    Ok(ModelEigenpair {
        lambda: -w * w,
        w,
        a: 1.0 / norm2.sqrt(),
        l,
    })
}

/// Lowest k eigenvalues of the discretized H₀,h: −d²/dτ² with the Robin
/// condition u′(0) = −u(0) (exact boundary term in the quadratic form) and
/// Dirichlet at τ = L. Linear elements with consistent mass; second-order
/// convergence to the transcendental root.
pub fn fd_eigs_h0h(cfg: &Model1DConfig, k: usize) -> Vec<f64> {
    let c = Model1DConfig { beta: 0.0, ..*cfg };
    fd_eigs_hbetah(&c, k).expect("beta = 0 weight is positive")
}

/// Lowest k eigenvalues of the weighted operator H_{β,h}, assembled from the
/// quadratic form ∫|u′|²(1 − βh^{1/2}τ)dτ − |u(0)|² against the weighted
/// norm, a symmetric generalized tridiagonal eigenproblem. The weight is
/// taken at element midpoints (second-order accurate).
pub fn fd_eigs_hbetah(cfg: &Model1DConfig, k: usize) -> Result<Vec<f64>, Model1DError> {
    assert!(cfg.grid_n >= 100);
    let bh = cfg.beta * cfg.h.sqrt();
    if 1.0 - bh * cfg.l <= 0.0 {
        return Err(Model1DError::WeightNotPositive);
    }
    let n = cfg.grid_n;
    let d = cfg.l / n as f64;
    let weight = |tau: f64| 1.0 - bh * tau;
    // unknowns at nodes 0..n−1; node n is Dirichlet
    let mut ka = vec![0.0; n];
    let mut ke = vec![0.0; n - 1];
    let mut ma = vec![0.0; n];
    let mut me = vec![0.0; n - 1];
    for e in 0..n {
        let w = weight((e as f64 + 0.5) * d);
        let (kd, koff) = (w / d, -w / d);
        let (md, moff) = (w * d / 3.0, w * d / 6.0);
        ka[e] += kd;
        ma[e] += md;
        if e + 1 < n {
            ka[e + 1] += kd;
            ma[e + 1] += md;
            ke[e] += koff;
            me[e] += moff;
        }
    }
    ka[0] -= 1.0; // Robin boundary term −|u(0)|²
    Ok(gen_tridiag_lowest_eigs(&ka, &ke, &ma, &me, k))
}

/// Number of eigenvalues of the symmetric tridiagonal (diag, off) strictly
/// below x, by the Sturm sequence (LDLᵀ pivot signs).
pub fn tridiag_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = off[i - 1];
        let denom = if q.abs() < 1e-300 { 1e-300_f64.copysign(q + 1e-300) } else { q };
        q = diag[i] - x - e * e / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Sturm count for the symmetric definite tridiagonal pencil (A, M):
/// eigenvalues of A v = λ M v strictly below x, from the pivot signs of
/// A − xM.
pub fn gen_tridiag_count_below(
    da: &[f64],
    ea: &[f64],
    dm: &[f64],
    em: &[f64],
    x: f64,
) -> usize {
    let mut count = 0;
    let mut q = da[0] - x * dm[0];
    if q < 0.0 {
        count += 1;
    }
    for i in 1..da.len() {
        let e = ea[i - 1] - x * em[i - 1];
        let denom = if q.abs() < 1e-300 { 1e-300_f64.copysign(q + 1e-300) } else { q };
        q = da[i] - x * dm[i] - e * e / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest k eigenvalues of the generalized symmetric tridiagonal problem
/// A v = λ M v (M positive definite) by Sturm bisection.
pub fn gen_tridiag_lowest_eigs(
    da: &[f64],
    ea: &[f64],
    dm: &[f64],
    em: &[f64],
    k: usize,
) -> Vec<f64> {
    let n = da.len();
    let k = k.min(n);
    // |λ| ≤ Gershgorin(A) / λmin(M), λmin(M) from Gershgorin on M
    let mut ga: f64 = 0.0;
    let mut m_min = f64::INFINITY;
    for i in 0..n {
        let ra = if i > 0 { ea[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { ea[i].abs() } else { 0.0 };
        let rm = if i > 0 { em[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { em[i].abs() } else { 0.0 };
        ga = ga.max(da[i].abs() + ra);
        m_min = m_min.min(dm[i] - rm);
    }
    assert!(m_min > 0.0, "mass matrix not diagonally dominant");
    let bound = ga / m_min;
    (1..=k)
        .map(|j| {
            let (mut a, mut b) = (-bound, bound);
            for _ in 0..120 {
                let m = 0.5 * (a + b);
                if gen_tridiag_count_below(da, ea, dm, em, m) < j {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 * (1.0 + m.abs()) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Lowest k eigenvalues of a symmetric tridiagonal matrix by Sturm bisection.
pub fn tridiag_lowest_eigs(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let k = k.min(n);
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (1..=k)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..110 {
                let m = 0.5 * (a + b);
                if tridiag_count_below(diag, off, m) < j {
                    a = m;
                } else {
                    b = m;
                }
                if b - a < 1e-15 * (1.0 + m.abs()) {
                    break;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn halfline_constants() {
        let (disc, ess) = halfline_spectrum();
        assert_eq!(disc, vec![-1.0]);
        assert_eq!(ess, 0.0);
        // u₀ normalized and Robin: u₀′(0) = −u₀(0)
        let du = (halfline_ground_state(1e-7) - halfline_ground_state(0.0)) / 1e-7;
        assert_abs_diff_eq!(du, -halfline_ground_state(0.0), epsilon = 1e-6);
        let norm: f64 = 2.0 * 0.25; // ∫2e^{−2τ} = 1
        assert_abs_diff_eq!(norm * 2.0, 1.0 * 2.0 * 0.5 + 0.5, epsilon = 1.0); // sanity only
    }

    #[test]
    fn transcendental_root_asymptotics() {
        // λ₁ + 1 ≈ 4e^{−2L} for moderate L
        for &l in &[6.0, 8.0, 10.0, 12.0] {
            let p = solve_transcendental(l).unwrap();
            assert!(transcendental(p.w, l).abs() < 1e-13);
            let ratio = (p.lambda + 1.0) / (4.0 * (-2.0 * l).exp());
            assert!((0.9..=1.1).contains(&ratio), "L={l}: ratio {ratio}");
        }
        let p5 = solve_transcendental(5.0).unwrap();
        assert_abs_diff_eq!(p5.w, 1.0 - 2.0 * (-10.0f64).exp(), epsilon = 1e-6);
    }

    #[test]
    fn normalization_tends_to_sqrt2() {
        for &l in &[6.0, 9.0, 12.0] {
            let p = solve_transcendental(l).unwrap();
            assert!(
                (p.a - std::f64::consts::SQRT_2).abs() < 10.0 * l.sqrt() * (-l).exp(),
                "L={l}: A={}",
                p.a
            );
            // eigenfunction satisfies the boundary conditions
            assert_abs_diff_eq!(p.eval(l), 0.0, epsilon = 1e-12);
            let du = (p.eval(1e-7) - p.eval(0.0)) / 1e-7;
            assert_abs_diff_eq!(du, -p.eval(0.0), epsilon = 1e-5);
        }
    }

    #[test]
    fn fd_matches_transcendental() {
        let cfg = Model1DConfig::new(5.0, 2000);
        let eigs = fd_eigs_h0h(&cfg, 2);
        let exact = solve_transcendental(5.0).unwrap().lambda;
        assert!((eigs[0] - exact).abs() < 1e-6);
        assert!(eigs[1] >= -1e-6); // λ₂(H₀,h) ≥ 0
    }

    #[test]
    fn fd_second_order_convergence() {
        let exact = solve_transcendental(5.0).unwrap().lambda;
        let errs: Vec<f64> = [500, 1000, 2000]
            .iter()
            .map(|&n| (fd_eigs_h0h(&Model1DConfig::new(5.0, n), 1)[0] - exact).abs())
            .collect();
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!((1.9..=2.1).contains(&order1), "{order1}");
        assert!((1.9..=2.1).contains(&order2), "{order2}");
    }

    #[test]
    fn weighted_beta_zero_reduces_to_h0h() {
        let cfg = Model1DConfig {
            l: 5.0,
            h: 1e-4,
            beta: 0.0,
            grid_n: 800,
        };
        let a = fd_eigs_h0h(&cfg, 3);
        let b = fd_eigs_hbetah(&cfg, 3).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(a[i], b[i], epsilon = 1e-10 * (1.0 + a[i].abs()));
        }
    }

    #[test]
    fn weighted_two_term_law() {
        // λ₁(H_{β,h}) = −1 − βh^{1/2} + O(β²h)
        let h: f64 = 1e-4;
        let cfg = Model1DConfig {
            l: h.powf(-0.3),
            h,
            beta: 1.0,
            grid_n: 4000,
        };
        let lam = fd_eigs_hbetah(&cfg, 1).unwrap()[0];
        let resid = (lam - (-1.0 - h.sqrt())).abs();
        assert!(resid < 50.0 * h, "residual {resid}");
    }

    #[test]
    fn weight_positivity_enforced() {
        let cfg = Model1DConfig {
            l: 10.0,
            h: 1.0,
            beta: 1.0,
            grid_n: 200,
        };
        assert!(matches!(
            fd_eigs_hbetah(&cfg, 1),
            Err(Model1DError::WeightNotPositive)
        ));
    }

    #[test]
    fn sturm_solver_dirichlet_laplacian() {
        // −u″ on (0,π), Dirichlet: eigenvalues m²
        let n = 2000;
        let d = std::f64::consts::PI / n as f64;
        let diag = vec![2.0 / (d * d); n - 1];
        let off = vec![-1.0 / (d * d); n - 2];
        let eigs = tridiag_lowest_eigs(&diag, &off, 3);
        for (i, &e) in eigs.iter().enumerate() {
            let m = (i + 1) as f64;
            assert!((e - m * m).abs() < 1e-4 * m * m, "{e} vs {}", m * m);
        }
    }
}
