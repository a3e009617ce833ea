//! Closed planar boundary curves: arc-length reparameterization, curvature
//! tables, and localization of the curvature maximum.
//!
//! The curvature profile is the geometric input to everything else: the
//! effective boundary operator needs κ(s), the collar discretization needs
//! κ(s) and 1 − tκ(s), and the correction/WKB recursions need the Taylor
//! jet of κ at its maximum in arc length.

use crate::series::Jet;
use serde::Deserialize;
use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("curve endpoint mismatch: |p(0) - p(T)| = {0:.3e}")]
    NotClosed(f64),
    #[error("curve speed vanishes (min speed² = {0:.3e})")]
    NonRegularCurve(f64),
    #[error("curvature maximum is degenerate (fitted k2 = {0:.3e})")]
    DegenerateMaximum(f64),
    #[error("total turning is {0:.6}, expected ±2π (not a simple closed curve)")]
    BadTurning(f64),
}

/// A smooth closed curve given by periodic coordinate functions of
/// t ∈ [0, 2π).
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ParametricCurve {
    Circle {
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    /// Ellipse with a radial cubic perturbation ρ(t) = 1 + ε(cos³t + ½sin³t),
    /// which breaks both reflection symmetries so the curvature maximum is a
    /// single non-degenerate point.
    Egg {
        a: f64,
        b: f64,
        eps: f64,
    },
    Fourier {
        #[serde(default)]
        x_cos: Vec<f64>,
        #[serde(default)]
        x_sin: Vec<f64>,
        #[serde(default)]
        y_cos: Vec<f64>,
        #[serde(default)]
        y_sin: Vec<f64>,
    },
}

/// Jet of Σ c_k cos(kt) + s_k sin(kt) about t0.
fn trig_series_jet(cos_c: &[f64], sin_c: &[f64], t0: f64, len: usize) -> Jet {
    let mut acc = Jet::zero(len);
    let kmax = cos_c.len().max(sin_c.len());
    for k in 0..kmax {
        let kf = k as f64;
        let (ck, sk) = (
            cos_c.get(k).copied().unwrap_or(0.0),
            sin_c.get(k).copied().unwrap_or(0.0),
        );
        if ck == 0.0 && sk == 0.0 {
            continue;
        }
        // cos(k(t0+u)) has jet cos_about(k t0) in the variable ku
        let mut cj = Jet::cos_about(kf * t0, len);
        let mut sj = Jet::sin_about(kf * t0, len);
        let mut pw = 1.0;
        for j in 0..len {
            cj.c[j] *= pw;
            sj.c[j] *= pw;
            pw *= kf;
        }
        acc = acc.add(&cj.scale(ck)).add(&sj.scale(sk));
    }
    acc
}

impl ParametricCurve {
    /// Taylor jets of (x, y) about parameter value t0.
    pub fn position_jets(&self, t0: f64, len: usize) -> (Jet, Jet) {
        match self {
            ParametricCurve::Circle { r } => (
                Jet::cos_about(t0, len).scale(*r),
                Jet::sin_about(t0, len).scale(*r),
            ),
            ParametricCurve::Ellipse { a, b } => (
                Jet::cos_about(t0, len).scale(*a),
                Jet::sin_about(t0, len).scale(*b),
            ),
            ParametricCurve::Egg { a, b, eps } => {
                let c = Jet::cos_about(t0, len);
                let s = Jet::sin_about(t0, len);
                let c3 = c.mul(&c).mul(&c);
                let s3 = s.mul(&s).mul(&s);
                let rho = Jet::constant(1.0, len).add(&c3.add(&s3.scale(0.5)).scale(*eps));
                (rho.mul(&c).scale(*a), rho.mul(&s).scale(*b))
            }
            ParametricCurve::Fourier {
                x_cos,
                x_sin,
                y_cos,
                y_sin,
            } => (
                trig_series_jet(x_cos, x_sin, t0, len),
                trig_series_jet(y_cos, y_sin, t0, len),
            ),
        }
    }

    pub fn point(&self, t: f64) -> (f64, f64) {
        let (x, y) = self.position_jets(t, 1);
        (x.c[0], y.c[0])
    }

    /// Speed |p′(t)|.
    pub fn speed(&self, t: f64) -> f64 {
        let (x, y) = self.position_jets(t, 2);
        (x.c[1] * x.c[1] + y.c[1] * y.c[1]).sqrt()
    }

    /// Signed curvature at parameter t (counterclockwise positive).
    pub fn curvature(&self, t: f64) -> f64 {
        let (x, y) = self.position_jets(t, 3);
        let (xp, yp) = (x.c[1], y.c[1]);
        let (xpp, ypp) = (2.0 * x.c[2], 2.0 * y.c[2]);
        (xp * ypp - yp * xpp) / (xp * xp + yp * yp).powf(1.5)
    }

    /// Taylor jet of κ as a function of arc length, about the point at
    /// parameter t0: coefficients of κ(s(t0) + u).
    pub fn curvature_arclength_jet(&self, t0: f64, order: usize, flip: bool) -> Vec<f64> {
        let len = order + 4;
        let (mut x, mut y) = if flip {
            self.position_jets(-t0, len)
        } else {
            self.position_jets(t0, len)
        };
        if flip {
            // p(-(t0+u)): negate odd coefficients, and flip orientation sign
            for j in (1..len).step_by(2) {
                x.c[j] = -x.c[j];
                y.c[j] = -y.c[j];
            }
        }
        let xp = x.derivative();
        let yp = y.derivative();
        let xpp = xp.derivative();
        let ypp = yp.derivative();
        let n = xpp.len();
        let trunc = |j: &Jet| Jet {
            c: j.c[..n].to_vec(),
        };
        let (xp, yp) = (trunc(&xp), trunc(&yp));
        let sp2 = xp.mul(&xp).add(&yp.mul(&yp));
        let v = sp2.sqrt();
        let kappa_t = xp.mul(&ypp).sub(&yp.mul(&xpp)).div(&sp2).div(&v);
        // arc length s(u) with s(0) = 0, then compose κ with u(s)
        let mut s_of_u = v.integral();
        s_of_u.c.truncate(n);
        let u_of_s = s_of_u.invert();
        let kj = kappa_t.compose(&u_of_s);
        (0..=order)
            .map(|m| {
                let mut fact = 1.0;
                for j in 2..=m {
                    fact *= j as f64;
                }
                kj.c.get(m).copied().unwrap_or(0.0) * fact
            })
            .collect()
    }
}

/// Arc-length curvature profile of a closed curve, tabulated on a uniform
/// s-grid with an analytic fallback through the stored parameterization.
#[derive(Debug, Clone)]
pub struct CurvatureProfile {
    pub period: f64,
    /// uniform arc-length grid nodes s_i = i·period/n, i = 0..n
    pub s_grid: Vec<f64>,
    /// parameter values t(s_i) in the (possibly orientation-flipped) curve
    pub t_grid: Vec<f64>,
    /// κ(s_i)
    pub kappa_samples: Vec<f64>,
    pub s_max: f64,
    pub kappa_max: f64,
    /// k₂ = −κ″(0) at the maximum
    pub k2: f64,
    curve: ParametricCurve,
    flip: bool,
    /// parameter value of the curvature maximum
    t_max: f64,
    /// arc-length origin offset: stored table coordinate of the profile's s=0
    origin: f64,
}

#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub unique_max: bool,
    pub k2: f64,
    /// arc-length locations of distinct near-maximal sites
    pub sites: Vec<f64>,
    pub degenerate: bool,
}

/// Computes the arc-length parameterization and curvature table of a closed
/// curve. Orientation is normalized to counterclockwise (total turning +2π).
pub fn arc_length_reparam(
    curve: &ParametricCurve,
    n_samples: usize,
) -> Result<CurvatureProfile, GeometryError> {
    assert!(n_samples >= 64, "n_samples must be at least 64");
    let (x0, y0) = curve.point(0.0);
    let (x1, y1) = curve.point(TWO_PI);
    let gap = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
    if gap > 1e-12 {
        return Err(GeometryError::NotClosed(gap));
    }

    // orientation and regularity from a fine parameter grid
    let fine = (8 * n_samples).max(4096);
    let dt = TWO_PI / fine as f64;
    let mut min_sp2 = f64::INFINITY;
    let mut turning = 0.0;
    for i in 0..fine {
        let t = i as f64 * dt;
        let (x, y) = curve.position_jets(t, 3);
        let (xp, yp) = (x.c[1], y.c[1]);
        let sp2 = xp * xp + yp * yp;
        min_sp2 = min_sp2.min(sp2);
        let (xpp, ypp) = (2.0 * x.c[2], 2.0 * y.c[2]);
        // κ·|p′| dt integrates to the total turning angle
        turning += (xp * ypp - yp * xpp) / sp2 * dt;
    }
    if min_sp2 <= 1e-20 {
        return Err(GeometryError::NonRegularCurve(min_sp2));
    }
    let flip = if (turning - TWO_PI).abs() < 1e-6 {
        false
    } else if (turning + TWO_PI).abs() < 1e-6 {
        true
    } else {
        return Err(GeometryError::BadTurning(turning));
    };
    let eval_t = |t: f64| if flip { -t } else { t };

    // cumulative arc length on the fine grid (composite Simpson per cell)
    let mut cum = vec![0.0; fine + 1];
    for i in 0..fine {
        let t = i as f64 * dt;
        let (v0, vm, v1) = (
            curve.speed(eval_t(t)),
            curve.speed(eval_t(t + 0.5 * dt)),
            curve.speed(eval_t(t + dt)),
        );
        cum[i + 1] = cum[i] + dt / 6.0 * (v0 + 4.0 * vm + v1);
    }
    let period = cum[fine];

    // invert s(t) on a uniform s-grid: bracket from the table, polish by Newton
    let n = n_samples;
    let ds = period / n as f64;
    let mut t_grid = Vec::with_capacity(n + 1);
    let mut kappa_samples = Vec::with_capacity(n + 1);
    let mut j = 0usize;
    for i in 0..=n {
        let s = i as f64 * ds;
        let t = if i == 0 {
            0.0
        } else if i == n {
            TWO_PI
        } else {
            while j + 1 < fine && cum[j + 1] < s {
                j += 1;
            }
            let mut t = (j as f64 + (s - cum[j]) / (cum[j + 1] - cum[j])) * dt;
            let mut srem = cum[j] + simpson_arc(curve, eval_t, j as f64 * dt, t) - s;
            for _ in 0..4 {
                let step = srem / curve.speed(eval_t(t));
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
                srem = cum[j] + simpson_arc(curve, eval_t, j as f64 * dt, t) - s;
            }
            t
        };
        t_grid.push(t);
        let sign = if flip { -1.0 } else { 1.0 };
        kappa_samples.push(sign * curve.curvature(eval_t(t)));
    }

    let mut profile = CurvatureProfile {
        period,
        s_grid: (0..=n).map(|i| i as f64 * ds).collect(),
        t_grid,
        kappa_samples,
        s_max: 0.0,
        kappa_max: 0.0,
        k2: 0.0,
        curve: curve.clone(),
        flip,
        t_max: 0.0,
        origin: 0.0,
    };
    profile.refresh_max()?;
    Ok(profile)
}

fn simpson_arc(
    curve: &ParametricCurve,
    eval_t: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0
        * (curve.speed(eval_t(a)) + 4.0 * curve.speed(eval_t(m)) + curve.speed(eval_t(b)))
}

impl CurvatureProfile {
    fn n(&self) -> usize {
        self.s_grid.len() - 1
    }

    fn ds(&self) -> f64 {
        self.period / self.n() as f64
    }

    /// Locates the grid argmax of κ and polishes it by Newton on κ′(s) = 0
    /// using the analytic arc-length jet.
    fn refresh_max(&mut self) -> Result<(), GeometryError> {
        let n = self.n();
        let imax = (0..n)
            .max_by(|&i, &j| self.kappa_samples[i].total_cmp(&self.kappa_samples[j]))
            .unwrap();
        let mut t = self.t_grid[imax];
        let mut shift_s = 0.0;
        for _ in 0..60 {
            let jet = self.curve.curvature_arclength_jet(t, 3, self.flip);
            let (k1, k2) = (jet[1], jet[2]);
            if k2.abs() < 1e-12 {
                break; // flat profile (circle); handled below
            }
            let step_s = -k1 / k2;
            // clamp to a grid cell to stay near the scanned maximum
            let step_s = step_s.clamp(-self.ds(), self.ds());
            let v = self.curve.speed(if self.flip { -t } else { t });
            t += step_s / v;
            shift_s += step_s;
            if step_s.abs() < 1e-14 * self.period {
                break;
            }
        }
        let jet = self.curve.curvature_arclength_jet(t, 2, self.flip);
        self.t_max = t;
        self.kappa_max = jet[0];
        self.k2 = -jet[2];
        self.s_max = wrap(self.s_grid[imax] + shift_s - self.origin, self.period);
        Ok(())
    }

    /// Taylor coefficients κ(0), κ′(0), …, κ^{(order)}(0) in arc length at
    /// the curvature maximum (machine precision via series arithmetic).
    pub fn kappa_jet_at_max(&self, order: usize) -> Vec<f64> {
        self.curve
            .curvature_arclength_jet(self.t_max, order, self.flip)
    }

    /// κ at arc length s (relative to the profile origin), by degree-6 local
    /// least-squares fit over a 9-node centered window.
    pub fn kappa(&self, s: f64) -> f64 {
        self.fit_at(s, 0)
    }

    /// m-th derivative of κ at s, m ≤ 4.
    pub fn kappa_deriv(&self, s: f64, m: usize) -> f64 {
        assert!(m <= 4);
        self.fit_at(s, m)
    }

    fn fit_at(&self, s: f64, m: usize) -> f64 {
        let n = self.n();
        let ds = self.ds();
        let table_s = wrap(s + self.origin, self.period);
        let ic = (table_s / ds).round() as isize;
        const W: isize = 4; // 9-point window
        const DEG: usize = 6;
        let mut ata = [[0.0f64; DEG + 1]; DEG + 1];
        let mut atb = [0.0f64; DEG + 1];
        for di in -W..=W {
            let i = (ic + di).rem_euclid(n as isize) as usize;
            let mut si = (ic + di) as f64 * ds - table_s;
            // keep the abscissa local, not wrapped around the period
            if si > 0.5 * self.period {
                si -= self.period;
            }
            if si < -0.5 * self.period {
                si += self.period;
            }
            let x = si / ds; // scaled abscissa for conditioning
            let mut pw = [0.0f64; DEG + 1];
            let mut p = 1.0;
            for pk in pw.iter_mut() {
                *pk = p;
                p *= x;
            }
            for a in 0..=DEG {
                for b in 0..=DEG {
                    ata[a][b] += pw[a] * pw[b];
                }
                atb[a] += pw[a] * self.kappa_samples[i];
            }
        }
        let coef = solve_small(&mut ata, &mut atb);
        let mut fact = 1.0;
        for j in 2..=m {
            fact *= j as f64;
        }
        coef[m] * fact / ds.powi(m as i32)
    }

    /// Taylor coefficients κ(s), κ′(s), …, κ^{(order)}(s) in arc length at an
    /// arbitrary s (relative to the profile origin). Newton-inverts the
    /// arc-length table to the curve parameter, then takes the analytic jet;
    /// unlike the local fit this is accurate to rounding.
    pub fn kappa_jet_at(&self, s: f64, order: usize) -> Vec<f64> {
        let t = self.t_of_s(s);
        self.curve.curvature_arclength_jet(t, order, self.flip)
    }

    fn t_of_s(&self, s: f64) -> f64 {
        let n = self.n();
        let ds = self.ds();
        let table_s = wrap(s + self.origin, self.period);
        let i = ((table_s / ds) as usize).min(n - 1);
        let frac = (table_s - self.s_grid[i]) / ds;
        let mut t = self.t_grid[i] + frac * (self.t_grid[i + 1] - self.t_grid[i]);
        let flip = self.flip;
        let eval_t = move |t: f64| if flip { -t } else { t };
        let arc = |a: f64, b: f64| {
            let m = 0.5 * (a + b);
            simpson_arc(&self.curve, eval_t, a, m) + simpson_arc(&self.curve, eval_t, m, b)
        };
        for _ in 0..8 {
            let srem = self.s_grid[i] + arc(self.t_grid[i], t) - table_s;
            let step = srem / self.curve.speed(eval_t(t));
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        t
    }

    /// Re-originates the profile so the curvature maximum sits at s = 0.
    pub fn reorigin_at_max(&mut self) {
        self.origin = wrap(self.origin + self.s_max, self.period);
        self.s_max = 0.0;
    }
}

fn wrap(s: f64, period: f64) -> f64 {
    let mut r = s % period;
    if r < 0.0 {
        r += period;
    }
    r
}

/// Gaussian elimination with partial pivoting for the tiny fit systems.
fn solve_small<const N: usize>(a: &mut [[f64; N]; N], b: &mut [f64; N]) -> [f64; N] {
    for col in 0..N {
        let piv = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let mut acc = b[row];
        for k in row + 1..N {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    x
}

/// Scans the profile for global curvature maxima and tests non-degeneracy.
pub fn check_assumption_a(profile: &CurvatureProfile, tol: f64) -> AssumptionReport {
    let n = profile.n();
    let kmax = profile
        .kappa_samples
        .iter()
        .take(n)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    // cluster contiguous runs of near-maximal nodes (cyclically)
    let near: Vec<bool> = (0..n).map(|i| profile.kappa_samples[i] > kmax - tol).collect();
    let mut sites = Vec::new();
    let mut i = 0;
    // start at a non-near node if one exists to avoid splitting a wrap-around run
    let start = (0..n).find(|&i| !near[i]).unwrap_or(0);
    let all_near = near.iter().all(|&b| b);
    while i < n && !all_near {
        let idx = (start + i) % n;
        if near[idx] {
            let mut best = idx;
            while i < n && near[(start + i) % n] {
                let cur = (start + i) % n;
                if profile.kappa_samples[cur] > profile.kappa_samples[best] {
                    best = cur;
                }
                i += 1;
            }
            sites.push(wrap(
                profile.s_grid[best] - profile.origin,
                profile.period,
            ));
        } else {
            i += 1;
        }
    }
    let degenerate = all_near || profile.k2 <= tol;
    AssumptionReport {
        unique_max: !degenerate && sites.len() == 1,
        k2: profile.k2,
        sites,
        degenerate,
    }
}

/// Polishes the maximum location and re-originates the profile at it.
/// For multi-site profiles (e.g. the ellipse) the site nearest the current
/// table maximum is used; the expansion only sees local data.
pub fn localize_max(
    profile: &mut CurvatureProfile,
    tol: f64,
) -> Result<(f64, f64, f64), GeometryError> {
    if profile.k2 <= tol {
        return Err(GeometryError::DegenerateMaximum(profile.k2));
    }
    let s_max = profile.s_max;
    profile.reorigin_at_max();
    Ok((s_max, profile.kappa_max, profile.k2))
}
