//! WKB construction along the boundary: eikonal phase, transport hierarchy,
//! and the quarter-power energy coefficients μ₀, μ₁, ….
//!
//! In the half-scaled coordinates (s, τ) = (s, h^{−1/2}t) the collar operator
//! is h·L̂_h with
//!
//!   L̂_h = −∂_τ² − h â⁻²∂_s² + h^{1/2}κ(s)â⁻¹∂_τ − h^{3/2}κ′(s)â⁻³∂_s,
//!   â = 1 − h^{1/2}τκ(s).
//!
//! Conjugating by exp(θ(s)/h^{1/4}) and expanding in h^{1/4} gives the
//! operator family
//!
//!   Q₀ = −∂_τ²,   Q₁ = 0,   Q₂ = κ∂_τ − θ′²,   Q₃ = 2θ′∂_s + θ″,
//!   Q₄ = −∂_s² + τκ²∂_τ − 2τκθ′²,
//!
//! obtained here directly from the â⁻¹, â⁻², â⁻³ geometric series. Matching
//! powers yields μ₀ = −1, μ₁ = 0, the eikonal equation θ′² = κ(0) − κ(s)
//! with μ₂ = −κ(0), the first transport equation with μ₃ = θ″(0), and the
//! solvability condition F₁(0) − μ₄ξ₀(0) = 0 at the next order, where
//! F₁(s) = ⟨u₀, Q₄(ξ₀u₀)⟩_τ.

use crate::geometry::CurvatureProfile;
use crate::series::Jet;
use crate::spectral_basis::TauProfile;

#[derive(Debug, thiserror::Error)]
pub enum WkbError {
    #[error("kappa(0) - kappa(s) changes sign in the window (min {0:.3e}); the phase well is not simple")]
    EikonalNotSolvable(f64),
    #[error("WKB order {0} is not implemented (available through 4)")]
    OrderUnavailable(usize),
}

/// Eikonal phase on a grid clustered near the curvature maximum.
#[derive(Debug, Clone)]
pub struct Theta {
    /// grid in (−W, W), symmetric, s[i] = 0 at the midpoint
    pub s: Vec<f64>,
    /// θ(s_i), the Agmon distance to the maximum
    pub theta: Vec<f64>,
    /// θ′(s_i) = sign(s)·√(κ(0) − κ(s))
    pub theta_p: Vec<f64>,
    /// constant-curvature well: θ ≡ 0 and the expansion is degenerate
    pub degenerate_well: bool,
}

#[derive(Debug, Clone)]
pub struct WkbSolution {
    pub theta: Theta,
    /// μ₀..μ_L
    pub mu: Vec<f64>,
    pub xi0: Vec<f64>,
    pub xi1: Vec<f64>,
    pub order: usize,
}

/// Number of grid points per half-window.
const HALF_GRID: usize = 400;
/// Jet order carried through the series patches.
const JET_ORDER: usize = 8;

/// 5-point Gauss–Legendre nodes and weights on [−1, 1].
const GL_X: [f64; 5] = [
    -0.906179845938664,
    -0.5384693101056831,
    0.0,
    0.5384693101056831,
    0.906179845938664,
];
const GL_W: [f64; 5] = [
    0.23692688505618908,
    0.47862867049936647,
    0.5688888888888889,
    0.47862867049936647,
    0.23692688505618908,
];

fn gauss5(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mut q = 0.0;
    for (x, w) in GL_X.iter().zip(&GL_W) {
        q += w * f(0.5 * (a + b) + 0.5 * (b - a) * x);
    }
    q * 0.5 * (b - a)
}

/// Composite 5-point Gauss with two panels; plenty for the smooth integrands
/// on the short clustered-grid intervals.
fn gauss5x2(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    gauss5(f, a, m) + gauss5(f, m, b)
}

/// Pointwise machinery for the phase and the transport kernel. All curvature
/// evaluations are taken relative to the maximum at s_max, so the profile
/// does not need to be re-origined.
struct Well<'a> {
    profile: &'a CurvatureProfile,
    kappa0: f64,
    omega: f64,
    s0: f64,
    /// Taylor jets about s = 0 (coefficients, not derivative values)
    theta_p_jet: Jet,
    g_jet: Jet,
    xi0_jet: Jet,
    /// series patch radius
    delta: f64,
}

impl<'a> Well<'a> {
    fn new(profile: &'a CurvatureProfile) -> Self {
        let s0 = profile.s_max;
        let kj = profile.kappa_jet_at_max(JET_ORDER);
        let kappa0 = kj[0];
        if kj[2] >= -1e-9 {
            // flat well (constant curvature): no phase, no transport
            return Well {
                profile,
                kappa0,
                omega: 0.0,
                s0,
                theta_p_jet: Jet::zero(2),
                g_jet: Jet::zero(2),
                xi0_jet: Jet::constant(1.0, 2),
                delta: 1e-3 * profile.period,
            };
        }
        let omega = (-kj[2] / 2.0).sqrt();
        // κ(s) as Taylor coefficients
        let mut fact = 1.0;
        let kc: Vec<f64> = kj
            .iter()
            .enumerate()
            .map(|(m, v)| {
                if m > 0 {
                    fact *= m as f64;
                }
                v / fact
            })
            .collect();
        // q(s) = (κ(0) − κ(s))/s², positive at 0 by Assumption (A)
        let q = Jet {
            c: (2..kc.len()).map(|m| -kc[m]).collect(),
        };
        let r = q.sqrt(); // θ′(s)/s
        let theta_p_jet = Jet {
            c: std::iter::once(0.0).chain(r.c.iter().cloned()).collect(),
        };
        // g = (θ″ − θ″(0))/(2θ′): numerator and denominator share a zero at 0
        let theta_pp = theta_p_jet.derivative();
        let num = Jet {
            c: theta_pp.c[1..].to_vec(),
        };
        let den = r.scale(2.0);
        let g_jet = num.div(&den);
        // ξ₀ = exp(−∫₀ˢ g)
        let big_g = g_jet.integral();
        let expj = Jet {
            c: (0..big_g.len())
                .map(|m| {
                    let mut f = 1.0;
                    for j in 1..=m {
                        f /= j as f64;
                    }
                    f
                })
                .collect(),
        };
        let xi0_jet = expj.compose(&big_g.scale(-1.0));
        // patch radius: keep the truncated Taylor tail below 1e-12
        let top = theta_p_jet
            .c
            .last()
            .copied()
            .unwrap_or(0.0)
            .abs()
            .max(1e-3);
        let deg = theta_p_jet.len() as f64;
        let delta = (1e-12 / top)
            .powf(1.0 / deg)
            .clamp(1e-3, 0.05 * profile.period);
        Well {
            profile,
            kappa0,
            omega,
            s0,
            theta_p_jet,
            g_jet,
            xi0_jet,
            delta,
        }
    }

    fn kappa(&self, s: f64) -> f64 {
        self.profile.kappa_jet_at(s + self.s0, 0)[0]
    }

    fn kappa_d(&self, s: f64, m: usize) -> f64 {
        self.profile.kappa_jet_at(s + self.s0, m)[m]
    }

    /// from the analytic curvature, so that the eikonal relation
    /// θ′² = κ(0) − κ(s) holds to rounding on the whole window
    fn theta_p(&self, s: f64) -> f64 {
        s.signum() * (self.kappa0 - self.kappa(s)).max(0.0).sqrt()
    }

    fn theta_pp(&self, s: f64) -> f64 {
        if s.abs() < self.delta {
            return self.theta_p_jet.derivative().eval(s);
        }
        // differentiate θ′² = κ(0) − κ(s)
        -self.kappa_d(s, 1) / (2.0 * self.theta_p(s))
    }

    fn theta_ppp(&self, s: f64) -> f64 {
        if s.abs() < self.delta {
            return self.theta_p_jet.derivative().derivative().eval(s);
        }
        let tp = self.theta_p(s);
        let tpp = self.theta_pp(s);
        (-self.kappa_d(s, 2) - 2.0 * tpp * tpp) / (2.0 * tp)
    }

    /// transport kernel g = (θ″ − μ₃)/(2θ′), removable singularity at 0
    fn g(&self, s: f64) -> f64 {
        if s.abs() < self.delta {
            return self.g_jet.eval(s);
        }
        (self.theta_pp(s) - self.omega) / (2.0 * self.theta_p(s))
    }

    fn g_p(&self, s: f64) -> f64 {
        if s.abs() < self.delta {
            return self.g_jet.derivative().eval(s);
        }
        let tp = self.theta_p(s);
        let tpp = self.theta_pp(s);
        self.theta_ppp(s) / (2.0 * tp) - (tpp - self.omega) * tpp / (2.0 * tp * tp)
    }
}

/// ξ₀ and its derived quantities, backed by a cumulative integral of g over
/// the clustered grid so that off-grid evaluations only integrate the local
/// remainder.
struct Transport<'a> {
    well: Well<'a>,
    s: Vec<f64>,
    /// ∫₀^{s_i} g du
    ig: Vec<f64>,
    m_tau: f64,
    m_tau_dtau: f64,
}

impl<'a> Transport<'a> {
    fn new(profile: &'a CurvatureProfile, grid: &[f64]) -> Self {
        let well = Well::new(profile);
        let mid = grid.len() / 2;
        let mut ig = vec![0.0; grid.len()];
        for i in mid..grid.len() - 1 {
            ig[i + 1] = ig[i] + gauss5x2(&|u| well.g(u), grid[i], grid[i + 1]);
        }
        for i in (0..mid).rev() {
            ig[i] = ig[i + 1] - gauss5x2(&|u| well.g(u), grid[i], grid[i + 1]);
        }
        // exact τ moments: ⟨u₀, τu₀⟩ and ⟨u₀, τ∂_τu₀⟩
        let u0 = TauProfile::<f64>::u0();
        let m_tau = u0.mul_tau_pow(1).inner(&u0);
        let m_tau_dtau = u0.dtau().mul_tau_pow(1).inner(&u0);
        Transport {
            well,
            s: grid.to_vec(),
            ig,
            m_tau,
            m_tau_dtau,
        }
    }

    fn ig_at(&self, u: f64) -> f64 {
        let i = match self
            .s
            .binary_search_by(|v| v.partial_cmp(&u).unwrap())
        {
            Ok(i) => return self.ig[i],
            Err(i) => i.clamp(1, self.s.len() - 1) - 1,
        };
        self.ig[i] + gauss5(&|v| self.well.g(v), self.s[i], u)
    }

    fn xi0(&self, u: f64) -> f64 {
        if u.abs() < self.well.delta {
            return self.well.xi0_jet.eval(u);
        }
        (-self.ig_at(u)).exp()
    }

    fn xi0_pp(&self, u: f64) -> f64 {
        if u.abs() < self.well.delta {
            return self.well.xi0_jet.derivative().derivative().eval(u);
        }
        let g = self.well.g(u);
        (g * g - self.well.g_p(u)) * self.xi0(u)
    }

    /// F₁(s) = ⟨u₀, Q₄(ξ₀u₀)⟩_τ
    fn f1(&self, u: f64) -> f64 {
        let k = self.well.kappa(u);
        let tp = self.well.theta_p(u);
        -self.xi0_pp(u) + (k * k * self.m_tau_dtau - 2.0 * k * tp * tp * self.m_tau) * self.xi0(u)
    }
}

/// Grid clustered at 0: s_i = W·x_i³ with x uniform in [−1, 1].
fn clustered_grid(half_width: f64) -> Vec<f64> {
    let n = 2 * HALF_GRID + 1;
    (0..n)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            half_width * x * x * x
        })
        .collect()
}

/// Solves θ′(s) = sign(s)·√(κ(0) − κ(s)), θ(0) = 0 on a clustered grid over
/// (−W, W) with W just inside half the perimeter. A constant-curvature well
/// (circle) degenerates to θ ≡ 0 and is flagged, not rejected.
pub fn solve_eikonal(profile: &CurvatureProfile) -> Result<Theta, WkbError> {
    let well = Well::new(profile);
    let w = 0.49 * profile.period;
    let s = clustered_grid(w);
    let mut vmin = f64::INFINITY;
    let mut vmax = f64::NEG_INFINITY;
    for &si in &s {
        let v = well.kappa0 - well.kappa(si);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    if vmax < 1e-9 {
        // constant curvature: the well is flat and the phase trivial
        return Ok(Theta {
            theta: vec![0.0; s.len()],
            theta_p: vec![0.0; s.len()],
            s,
            degenerate_well: true,
        });
    }
    if vmin < -1e-9 {
        return Err(WkbError::EikonalNotSolvable(vmin));
    }
    let theta_p: Vec<f64> = s.iter().map(|&si| well.theta_p(si)).collect();
    // cumulative quadrature outward from the center node
    let mid = s.len() / 2;
    let mut theta = vec![0.0; s.len()];
    for i in mid..s.len() - 1 {
        theta[i + 1] = theta[i] + gauss5x2(&|u| well.theta_p(u), s[i], s[i + 1]);
    }
    for i in (0..mid).rev() {
        theta[i] = theta[i + 1] - gauss5x2(&|u| well.theta_p(u), s[i], s[i + 1]);
    }
    Ok(Theta {
        s,
        theta,
        theta_p,
        degenerate_well: false,
    })
}

/// First transport amplitude ξ₀(s) = exp(−∫₀ˢ(θ″−θ″(0))/(2θ′) du) on the
/// grid of `theta`; the integrand's singularity at 0 is removable and handled
/// by a series patch.
pub fn solve_transport_0(profile: &CurvatureProfile, theta: &Theta) -> Vec<f64> {
    if theta.degenerate_well {
        return vec![1.0; theta.s.len()];
    }
    let tr = Transport::new(profile, &theta.s);
    theta.s.iter().map(|&si| tr.xi0(si)).collect()
}

/// Full construction through order L (≤ 4): phase, μ₀..μ_L, ξ₀ and ξ₁.
pub fn wkb_iterate(profile: &CurvatureProfile, order: usize) -> Result<WkbSolution, WkbError> {
    if order > 4 {
        return Err(WkbError::OrderUnavailable(order));
    }
    let theta = solve_eikonal(profile)?;
    let well = Well::new(profile);
    let mut mu = vec![-1.0, 0.0, -well.kappa0, well.omega];
    let xi0 = solve_transport_0(profile, &theta);
    let mut xi1 = vec![0.0; theta.s.len()];
    if order >= 4 && !theta.degenerate_well {
        let tr = Transport::new(profile, &theta.s);
        // μ₄ from F₁(0) − μ₄ξ₀(0) = 0; θ′(0) = 0 kills the θ′² term
        let mu4 = -2.0 * well.xi0_jet.c.get(2).copied().unwrap_or(0.0)
            + well.kappa0 * well.kappa0 * tr.m_tau_dtau;
        mu.push(mu4);
        // ξ₁ = ξ₀·∫₀ˢ w, w = −(F₁ − μ₄ξ₀)/(2θ′ξ₀); series patch at 0
        let w_jet = {
            // F₁ jet = −ξ₀″ − (κ²/2 + κθ′²)ξ₀ as Taylor series about 0
            let kj = profile.kappa_jet_at_max(JET_ORDER);
            let mut fact = 1.0;
            let kjet = Jet {
                c: kj
                    .iter()
                    .enumerate()
                    .map(|(m, v)| {
                        if m > 0 {
                            fact *= m as f64;
                        }
                        v / fact
                    })
                    .collect(),
            };
            let tp = &well.theta_p_jet;
            let xi0pp = well.xi0_jet.derivative().derivative();
            let f1 = xi0pp.scale(-1.0).add(
                &kjet
                    .mul(&kjet)
                    .scale(tr.m_tau_dtau)
                    .sub(&kjet.mul(&tp.mul(tp)).scale(2.0 * tr.m_tau))
                    .mul(&well.xi0_jet),
            );
            // numerator and denominator both vanish linearly at 0
            let num = f1.sub(&well.xi0_jet.scale(mu4)).scale(-1.0);
            let den = tp.mul(&well.xi0_jet).scale(2.0);
            let num1 = Jet {
                c: num.c[1..].to_vec(),
            };
            let den1 = Jet {
                c: den.c[1..].to_vec(),
            };
            num1.div(&den1)
        };
        let w_fn = |u: f64| -> f64 {
            if u.abs() < well.delta {
                w_jet.eval(u)
            } else {
                -(tr.f1(u) - mu4 * tr.xi0(u)) / (2.0 * well.theta_p(u) * tr.xi0(u))
            }
        };
        // cumulative ∫₀^{s_i} w over the grid panels
        let mid = theta.s.len() / 2;
        let mut iw = vec![0.0; theta.s.len()];
        for i in mid..theta.s.len() - 1 {
            iw[i + 1] = iw[i] + gauss5x2(&w_fn, theta.s[i], theta.s[i + 1]);
        }
        for i in (0..mid).rev() {
            iw[i] = iw[i + 1] - gauss5x2(&w_fn, theta.s[i], theta.s[i + 1]);
        }
        for i in 0..theta.s.len() {
            xi1[i] = xi0[i] * iw[i];
        }
    } else if order >= 4 {
        mu.push(0.0);
    }
    mu.truncate(order + 1);
    Ok(WkbSolution {
        theta,
        mu,
        xi0,
        xi1,
        order,
    })
}

/// Largest pointwise eikonal defect |θ′(s_i)² − (κ(0) − κ(s_i))| plus the
/// disagreement between the stored phase increments and an independent
/// re-integration of θ′ with adaptive Simpson panels.
pub fn eikonal_residual(profile: &CurvatureProfile, theta: &Theta) -> f64 {
    let well = Well::new(profile);
    let mut res: f64 = 0.0;
    for (i, &si) in theta.s.iter().enumerate() {
        let v = well.kappa0 - well.kappa(si);
        res = res.max((theta.theta_p[i] * theta.theta_p[i] - v).abs());
    }
    if theta.degenerate_well {
        return res;
    }
    for i in 0..theta.s.len() - 1 {
        let (a, b) = (theta.s[i], theta.s[i + 1]);
        // independent rule: composite Simpson with 8 panels
        let n = 8;
        let h = (b - a) / n as f64;
        let mut q = 0.0;
        for k in 0..n {
            let (x0, x1) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            q += (x1 - x0) / 6.0
                * (well.theta_p(x0) + 4.0 * well.theta_p(0.5 * (x0 + x1)) + well.theta_p(x1));
        }
        res = res.max(((theta.theta[i + 1] - theta.theta[i]) - q).abs());
    }
    res
}

/// Independent check of ξ₀: integrates the transport ODE
/// 2θ′ξ₀′ + (θ″ − μ₃)ξ₀ = 0 with RK4 from series data near 0 and returns the
/// largest relative deviation from the quadrature construction on the grid.
/// ξ₀ grows by orders of magnitude toward the window edge, so the deviation
/// is scaled by max(1, |ξ₀|) at each node.
pub fn transport0_residual(profile: &CurvatureProfile, sol: &WkbSolution) -> f64 {
    let well = Well::new(profile);
    if sol.theta.degenerate_well {
        return 0.0;
    }
    let mut res: f64 = 0.0;
    for dir in [1.0f64, -1.0] {
        let start = dir * well.delta;
        let stop = dir * sol.theta.s.last().unwrap().abs();
        let deriv = |u: f64, y: f64| -well.g(u) * y;
        let mut y = well.xi0_jet.eval(start);
        let n_steps = 4000usize;
        let dt = (stop - start) / n_steps as f64;
        let mut u = start;
        // grid nodes in this half, ordered outward
        let mut nodes: Vec<(usize, f64)> = sol
            .theta
            .s
            .iter()
            .enumerate()
            .filter(|(_, &s)| (s - start) * dir >= 0.0)
            .map(|(i, &s)| (i, s))
            .collect();
        nodes.sort_by(|a, b| {
            ((a.1 - start) * dir)
                .partial_cmp(&((b.1 - start) * dir))
                .unwrap()
        });
        let mut gi = 0;
        for _ in 0..n_steps {
            while gi < nodes.len() && (nodes[gi].1 - u) * dir < dt.abs() {
                let (idx, sg) = nodes[gi];
                let hh = sg - u;
                let k1 = deriv(u, y);
                let k2 = deriv(u + 0.5 * hh, y + 0.5 * hh * k1);
                let k3 = deriv(u + 0.5 * hh, y + 0.5 * hh * k2);
                let k4 = deriv(u + hh, y + hh * k3);
                let yg = y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                res = res.max((yg - sol.xi0[idx]).abs() / sol.xi0[idx].abs().max(1.0));
                gi += 1;
            }
            let k1 = deriv(u, y);
            let k2 = deriv(u + 0.5 * dt, y + 0.5 * dt * k1);
            let k3 = deriv(u + 0.5 * dt, y + 0.5 * dt * k2);
            let k4 = deriv(u + dt, y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            u += dt;
        }
    }
    res
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{arc_length_reparam, localize_max, ParametricCurve};
    use approx::assert_abs_diff_eq;

    fn profile(curve: &ParametricCurve, n: usize) -> CurvatureProfile {
        let mut p = arc_length_reparam(curve, n).unwrap();
        localize_max(&mut p, 1e-9).unwrap();
        p
    }

    #[test]
    fn circle_is_degenerate_well() {
        let c = ParametricCurve::Circle { r: 1.0 };
        let p = arc_length_reparam(&c, 256).unwrap();
        let th = solve_eikonal(&p).unwrap();
        assert!(th.degenerate_well);
        assert!(th.theta.iter().all(|&t| t == 0.0));
        let sol = wkb_iterate(&p, 4).unwrap();
        assert!(sol.xi0.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn ellipse_phase_heads() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let th = solve_eikonal(&p).unwrap();
        // θ(s) ≈ (√(k₂/2)/2)s² = 1.5s² near 0
        let well = Well::new(&p);
        for s in [1e-3, 5e-3, 0.02] {
            let t = gauss5x2(&|u| well.theta_p(u), 0.0, s);
            assert_abs_diff_eq!(t, 1.5 * s * s, epsilon = 3.0 * s * s * s);
        }
        // even, positive away from 0
        let mid = th.s.len() / 2;
        for i in 0..th.s.len() {
            if i != mid {
                assert!(th.theta[i] > 0.0, "Agmon phase must be positive");
            }
            let j = th.s.len() - 1 - i;
            assert_abs_diff_eq!(th.theta[i], th.theta[j], epsilon = 1e-9);
        }
    }

    #[test]
    fn ellipse_mu_heads() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let sol = wkb_iterate(&p, 4).unwrap();
        assert_abs_diff_eq!(sol.mu[0], -1.0, epsilon = 0.0);
        assert_abs_diff_eq!(sol.mu[1], 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(sol.mu[2], -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.mu[3], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn quarter_power_heads_match_expansion_dictionary() {
        // h·(μ₀ + μ₂h^{1/2} + μ₃h^{3/4}) must carry the same coefficients as
        // the three-term expansion for n = 1
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let sol = wkb_iterate(&p, 4).unwrap();
        let coeffs = crate::expansion::ExpansionCoefficients {
            kappa_max: 2.0,
            k2: 18.0,
            n: 1,
            zeta: Vec::new(),
        };
        assert_abs_diff_eq!(sol.mu[0], -1.0, epsilon = 0.0);
        assert_abs_diff_eq!(sol.mu[2], -coeffs.kappa_max, epsilon = 1e-10);
        assert_abs_diff_eq!(sol.mu[3], coeffs.third_term(), epsilon = 1e-10);
    }

    #[test]
    fn eikonal_residual_small() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let th = solve_eikonal(&p).unwrap();
        assert!(eikonal_residual(&p, &th) < 1e-8);
    }

    #[test]
    fn xi0_normalization_and_symmetry() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let th = solve_eikonal(&p).unwrap();
        let xi0 = solve_transport_0(&p, &th);
        let mid = th.s.len() / 2;
        assert_abs_diff_eq!(xi0[mid], 1.0, epsilon = 1e-12);
        for i in 0..th.s.len() {
            let j = th.s.len() - 1 - i;
            assert_abs_diff_eq!(xi0[i], xi0[j], epsilon = 1e-8);
        }
    }

    #[test]
    fn transport_plugback_residual_small() {
        for curve in [
            ParametricCurve::Ellipse { a: 2.0, b: 1.0 },
            ParametricCurve::Egg {
                a: 2.0,
                b: 1.0,
                eps: 0.1,
            },
        ] {
            let p = profile(&curve, 1024);
            let sol = wkb_iterate(&p, 4).unwrap();
            let r = transport0_residual(&p, &sol);
            assert!(r < 1e-8, "residual {r}");
        }
    }

    #[test]
    fn xi1_vanishes_at_the_maximum_and_solves_its_transport_equation() {
        let curve = ParametricCurve::Egg {
            a: 2.0,
            b: 1.0,
            eps: 0.1,
        };
        let p = profile(&curve, 1024);
        let sol = wkb_iterate(&p, 4).unwrap();
        let mid = sol.theta.s.len() / 2;
        assert_abs_diff_eq!(sol.xi1[mid], 0.0, epsilon = 1e-12);
        // RK4 the inhomogeneous transport equation
        // 2θ′ξ₁′ + (θ″ − μ₃)ξ₁ = −(F₁ − μ₄ξ₀) outward from the patch edge,
        // seeded from the constructed solution, and compare at grid nodes
        let well = Well::new(&p);
        let tr = Transport::new(&p, &sol.theta.s);
        let mu4 = sol.mu[4];
        let rhs = |u: f64, y: f64| {
            (-(tr.f1(u) - mu4 * tr.xi0(u)) - (well.theta_pp(u) - well.omega) * y)
                / (2.0 * well.theta_p(u))
        };
        let start = well.delta;
        let stop = sol.theta.s.last().unwrap().abs();
        let (i0, s0v) = sol
            .theta
            .s
            .iter()
            .enumerate()
            .find(|(_, &s)| s >= start)
            .map(|(i, &s)| (i, s))
            .unwrap();
        let mut u = s0v;
        let mut y = sol.xi1[i0];
        let n_steps = 8000usize;
        let dt = (stop - u) / n_steps as f64;
        let mut res: f64 = 0.0;
        let mut gi = i0 + 1;
        for _ in 0..n_steps {
            while gi < sol.theta.s.len() && sol.theta.s[gi] > u && sol.theta.s[gi] - u < dt {
                let hh = sol.theta.s[gi] - u;
                let k1 = rhs(u, y);
                let k2 = rhs(u + 0.5 * hh, y + 0.5 * hh * k1);
                let k3 = rhs(u + 0.5 * hh, y + 0.5 * hh * k2);
                let k4 = rhs(u + hh, y + hh * k3);
                let yg = y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                res = res.max((yg - sol.xi1[gi]).abs());
                gi += 1;
            }
            let k1 = rhs(u, y);
            let k2 = rhs(u + 0.5 * dt, y + 0.5 * dt * k1);
            let k3 = rhs(u + 0.5 * dt, y + 0.5 * dt * k2);
            let k4 = rhs(u + dt, y + dt * k3);
            y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            u += dt;
        }
        assert!(res < 1e-7, "xi1 plug-back residual {res}");
    }

    #[test]
    fn mu4_matches_corrections_zeta_on_ellipse() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        let sol = wkb_iterate(&p, 4).unwrap();
        // ζ_{1,1} = −93/16 from the independent correction recursion
        assert_abs_diff_eq!(sol.mu[4], -93.0 / 16.0, epsilon = 1e-8);
        let jet = p.kappa_jet_at_max(8);
        let ops = crate::corrections::build_operator_series(&jet, 12).unwrap();
        let st = crate::corrections::run_iteration(&ops, 1, 1, 3.0).unwrap();
        assert_abs_diff_eq!(sol.mu[4], st.zeta(1), epsilon = 1e-8);
    }

    #[test]
    fn mu4_matches_corrections_zeta_on_egg() {
        let curve = ParametricCurve::Egg {
            a: 2.0,
            b: 1.0,
            eps: 0.1,
        };
        let p = profile(&curve, 1024);
        let sol = wkb_iterate(&p, 4).unwrap();
        let jet = p.kappa_jet_at_max(8);
        let omega = (-jet[2] / 2.0).sqrt();
        let ops = crate::corrections::build_operator_series(&jet, 12).unwrap();
        let st = crate::corrections::run_iteration(&ops, 1, 1, omega).unwrap();
        assert_abs_diff_eq!(sol.mu[4], st.zeta(1), epsilon = 1e-6);
    }

    #[test]
    fn order_above_four_unavailable() {
        let p = profile(&ParametricCurve::Ellipse { a: 2.0, b: 1.0 }, 512);
        assert!(matches!(
            wkb_iterate(&p, 5),
            Err(WkbError::OrderUnavailable(5))
        ));
    }
}
