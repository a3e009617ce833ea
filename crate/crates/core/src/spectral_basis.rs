//! The explicit model eigenfunctions and their exact algebra.
//!
//! τ-factor: functions (polynomial)·e^{−τ} on (0,∞), with the half-line
//! ground state u₀(τ) = √2·e^{−τ}. σ-factor: the orthonormal eigenfunctions
//! f₁, f₂, … of H_harm = −∂_σ² + ω²σ², ω = √(k₂/2), with eigenvalues
//! (2n−1)ω. Product states Σ vᵢ(σ)wᵢ(τ) are closed under ∂_σ, ∂_τ,
//! polynomial multiplication, and the two resolvent inverses the formal
//! recursions need.
//!
//! Both factors are stored in a gauged normalization that keeps every
//! operation rational in ω:
//! * τ-profiles store p with the function √2·(Σ p_k τ^k)e^{−τ}, so u₀ = [1]
//!   and inner products are Σ (pq)_m·m!/2^m;
//! * Hermite coefficients are stored relative to a base index n (the level
//!   under study): the true coefficient of f_m is the stored one times the
//!   product of ladder weights s_j = √(j/2ω) along the chain from n to m.
//!   Ladder moves then multiply by either 1 or s_j² = j/(2ω), and inner
//!   products weight index m by the rational gauge square g²_m.

use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum BasisError {
    #[error("input not orthogonal to the model ground state (coefficient {0:.3e})")]
    NotOrthogonal(f64),
    #[error("Robin condition violated after inversion (q1 = {0:.3e})")]
    RobinViolated(f64),
}

/// Oscillator context: frequency ω and the gauge base index.
#[derive(Debug, Clone)]
pub struct OscCtx<S: Scalar> {
    pub omega: S,
    pub base: usize,
}

impl<S: Scalar> OscCtx<S> {
    pub fn new(omega: S, base: usize) -> Self {
        assert!(base >= 1);
        OscCtx { omega, base }
    }

    /// s_m² = m/(2ω), the squared ladder weight of the edge (f_m, f_{m+1}).
    fn s_sq(&self, m: usize) -> S {
        S::from_int(m as i64).div(&S::from_int(2).mul(&self.omega))
    }

    /// g²_m: squared product of ladder weights along the chain base → m.
    pub fn gauge_sq(&self, m: usize) -> S {
        let mut g = S::one();
        if m >= self.base {
            for j in self.base..m {
                g = g.mul(&self.s_sq(j));
            }
        } else {
            for j in m..self.base {
                g = g.mul(&self.s_sq(j));
            }
        }
        g
    }

    /// Eigenvalue (2m−1)ω of f_m.
    pub fn eigenvalue(&self, m: usize) -> S {
        S::from_int(2 * m as i64 - 1).mul(&self.omega)
    }
}

/// (Σ p_k τ^k)·√2·e^{−τ} on the half-line, coefficients in the gauge above.
#[derive(Debug, Clone, PartialEq)]
pub struct TauProfile<S: Scalar> {
    pub p: Vec<S>,
}

/// m!/2^m in the scalar field.
fn moment<S: Scalar>(m: usize) -> S {
    let mut v = S::one();
    for j in 1..=m {
        v = v.mul(&S::ratio(j as i64, 2));
    }
    v
}

impl<S: Scalar> TauProfile<S> {
    pub fn zero() -> Self {
        TauProfile { p: Vec::new() }
    }

    /// u₀ = √2·e^{−τ}
    pub fn u0() -> Self {
        TauProfile { p: vec![S::one()] }
    }

    pub fn from_coeffs(p: Vec<S>) -> Self {
        let mut t = TauProfile { p };
        t.trim();
        t
    }

    fn trim(&mut self) {
        while self.p.last().map_or(false, |c| c.is_zero()) {
            self.p.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.p.len().max(o.p.len());
        let mut p = Vec::with_capacity(n);
        for k in 0..n {
            let a = self.p.get(k).cloned().unwrap_or_else(S::zero);
            let b = o.p.get(k).cloned().unwrap_or_else(S::zero);
            p.push(a.add(&b));
        }
        TauProfile::from_coeffs(p)
    }

    pub fn scale(&self, c: &S) -> Self {
        TauProfile::from_coeffs(self.p.iter().map(|v| v.mul(c)).collect())
    }

    /// ∂_τ: (Pe^{−τ})′ = (P′ − P)e^{−τ}
    pub fn dtau(&self) -> Self {
        let mut p = vec![S::zero(); self.p.len()];
        for k in 0..self.p.len() {
            p[k] = p[k].sub(&self.p[k]);
            if k + 1 < self.p.len() {
                p[k] = p[k].add(&S::from_int(k as i64 + 1).mul(&self.p[k + 1]));
            }
        }
        TauProfile::from_coeffs(p)
    }

    pub fn mul_tau_pow(&self, j: usize) -> Self {
        if self.is_zero() {
            return TauProfile::zero();
        }
        let mut p = vec![S::zero(); j];
        p.extend(self.p.iter().cloned());
        TauProfile { p }
    }

    /// L²(ℝ₊) inner product, exact: ⟨P, Q⟩ = Σ_m (pq)_m · m!/2^m.
    pub fn inner(&self, o: &Self) -> S {
        let mut acc = S::zero();
        for (i, a) in self.p.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.p.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b).mul(&moment::<S>(i + j)));
            }
        }
        acc
    }

    /// ⟨·, u₀⟩
    pub fn proj_u0(&self) -> S {
        self.inner(&TauProfile::u0())
    }

    /// Pointwise value (numeric).
    pub fn eval(&self, tau: f64) -> f64 {
        let mut poly = 0.0;
        for c in self.p.iter().rev() {
            poly = poly * tau + c.to_f64();
        }
        std::f64::consts::SQRT_2 * poly * (-tau).exp()
    }
}

/// Solves (P₀ + 1)g = (−∂_τ² + 1)g = w on the orthogonal complement of u₀,
/// with the Robin condition g′(0) = −g(0) holding automatically (asserted).
pub fn invert_p0_plus_1<S: Scalar>(w: &TauProfile<S>) -> Result<TauProfile<S>, BasisError> {
    let ortho = w.proj_u0();
    let wn = w.inner(w).to_f64().sqrt().max(1.0);
    if !ortho.is_negligible(1e-12 * wn) {
        return Err(BasisError::NotOrthogonal(ortho.to_f64()));
    }
    if w.is_zero() {
        return Ok(TauProfile::zero());
    }
    // g = √2·q(τ)e^{−τ} with 2q′ − q″ = p, solved top-down:
    // p_k = 2(k+1)q_{k+1} − (k+2)(k+1)q_{k+2}
    let d = w.p.len() - 1;
    let mut q = vec![S::zero(); d + 2];
    q[d + 1] = w.p[d].div(&S::from_int(2 * (d as i64 + 1)));
    for k in (0..d).rev() {
        let kk = k as i64;
        let carry = S::from_int((kk + 2) * (kk + 1)).mul(&q[k + 2]);
        q[k + 1] = w.p[k].add(&carry).div(&S::from_int(2 * (kk + 1)));
    }
    // Robin: q′(0) = 0, i.e. q₁ = 0, a consequence of ⟨w, u₀⟩ = 0
    if !q[1].is_negligible(1e-11 * wn) {
        return Err(BasisError::RobinViolated(q[1].to_f64()));
    }
    q[1] = S::zero();
    // fix the free e^{−τ} multiple by ⟨g, u₀⟩ = 0: q₀ = −Σ_{m≥1} q_m m!/2^m
    let mut q0 = S::zero();
    for (m, qm) in q.iter().enumerate().skip(1) {
        q0 = q0.sub(&qm.mul(&moment::<S>(m)));
    }
    q[0] = q0;
    Ok(TauProfile::from_coeffs(q))
}

/// Coefficients over f₁, f₂, … in the base-n gauge; c[i] belongs to f_{i+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteVector<S: Scalar> {
    pub c: Vec<S>,
}

impl<S: Scalar> HermiteVector<S> {
    pub fn zero() -> Self {
        HermiteVector { c: Vec::new() }
    }

    pub fn unit(m: usize) -> Self {
        assert!(m >= 1);
        let mut c = vec![S::zero(); m];
        c[m - 1] = S::one();
        HermiteVector { c }
    }

    pub fn get(&self, m: usize) -> S {
        self.c.get(m - 1).cloned().unwrap_or_else(S::zero)
    }

    fn set_add(&mut self, m: usize, v: &S) {
        if m < 1 || v.is_zero() {
            return;
        }
        if self.c.len() < m {
            self.c.resize(m, S::zero());
        }
        self.c[m - 1] = self.c[m - 1].add(v);
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| v.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (i, v) in o.c.iter().enumerate() {
            r.set_add(i + 1, v);
        }
        r
    }

    pub fn scale(&self, s: &S) -> Self {
        HermiteVector {
            c: self.c.iter().map(|v| v.mul(s)).collect(),
        }
    }

    /// Gauge-aware multiplication by σ: σf_m = s_{m−1}f_{m−1} + s_m f_{m+1}.
    pub fn mul_sigma(&self, ctx: &OscCtx<S>) -> Self {
        let mut r = HermiteVector::zero();
        for (i, v) in self.c.iter().enumerate() {
            let m = i + 1;
            if v.is_zero() {
                continue;
            }
            // raising m → m+1
            let t_up = if m >= ctx.base { S::one() } else { ctx.s_sq(m) };
            r.set_add(m + 1, &v.mul(&t_up));
            // lowering m → m−1 (absent for m = 1: s₀ = 0)
            if m >= 2 {
                let t_dn = if m - 1 >= ctx.base {
                    ctx.s_sq(m - 1)
                } else {
                    S::one()
                };
                r.set_add(m - 1, &v.mul(&t_dn));
            }
        }
        r
    }

    /// ∂_σ f_m = ω(s_{m−1}f_{m−1} − s_m f_{m+1}).
    pub fn dsigma(&self, ctx: &OscCtx<S>) -> Self {
        let mut r = HermiteVector::zero();
        for (i, v) in self.c.iter().enumerate() {
            let m = i + 1;
            if v.is_zero() {
                continue;
            }
            let t_up = if m >= ctx.base { S::one() } else { ctx.s_sq(m) };
            r.set_add(m + 1, &v.mul(&t_up).mul(&ctx.omega).neg());
            if m >= 2 {
                let t_dn = if m - 1 >= ctx.base {
                    ctx.s_sq(m - 1)
                } else {
                    S::one()
                };
                r.set_add(m - 1, &v.mul(&t_dn).mul(&ctx.omega));
            }
        }
        r
    }

    /// ⟨u, v⟩ with the gauge weights.
    pub fn inner(&self, o: &Self, ctx: &OscCtx<S>) -> S {
        let mut acc = S::zero();
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if let Some(b) = o.c.get(i) {
                if !b.is_zero() {
                    acc = acc.add(&a.mul(b).mul(&ctx.gauge_sq(i + 1)));
                }
            }
        }
        acc
    }

    /// Support parity: Some(p) if every nonzero index m has (m−1) ≡ p mod 2.
    pub fn parity(&self) -> Option<usize> {
        let mut par = None;
        for (i, v) in self.c.iter().enumerate() {
            if !v.is_zero() {
                match par {
                    None => par = Some(i % 2),
                    Some(p) if p != i % 2 => return None,
                    _ => {}
                }
            }
        }
        par
    }
}

/// (H_harm − λₙ)⁻¹ on the orthogonal complement of fₙ: divide the f_m
/// coefficient by 2(m−n)ω.
pub fn invert_hharm_minus_lambda<S: Scalar>(
    v: &HermiteVector<S>,
    n: usize,
    ctx: &OscCtx<S>,
) -> Result<HermiteVector<S>, BasisError> {
    let vn = v.get(n);
    let norm = v.inner(v, ctx).to_f64().sqrt().max(1.0);
    if !vn.is_negligible(1e-12 * norm) {
        return Err(BasisError::NotOrthogonal(vn.to_f64()));
    }
    let mut c = v.c.clone();
    for (i, ci) in c.iter_mut().enumerate() {
        let m = i + 1;
        if m == n {
            *ci = S::zero();
        } else {
            let gap = S::from_int(2 * (m as i64 - n as i64)).mul(&ctx.omega);
            *ci = ci.div(&gap);
        }
    }
    let mut r = HermiteVector { c };
    while r.c.last().map_or(false, |v| v.is_zero()) {
        r.c.pop();
    }
    Ok(r)
}

/// Canonical product state: rows[i] is the τ-profile multiplying f_{i+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState<S: Scalar> {
    pub rows: Vec<TauProfile<S>>,
}

/// Differential part of an operator term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOp {
    Id,
    DTau,
    DTau2,
    DSigma,
    DSigma2,
}

/// Polynomial in (σ, τ): coeff[i][j] multiplies σ^i τ^j.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyST<S: Scalar> {
    pub coeff: Vec<Vec<S>>,
}

impl<S: Scalar> PolyST<S> {
    pub fn zero() -> Self {
        PolyST { coeff: Vec::new() }
    }

    pub fn constant(v: S) -> Self {
        PolyST {
            coeff: vec![vec![v]],
        }
    }

    pub fn monomial(i: usize, j: usize, v: S) -> Self {
        let mut coeff = vec![Vec::new(); i + 1];
        coeff[i] = vec![S::zero(); j + 1];
        coeff[i][j] = v;
        PolyST { coeff }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.iter().all(|r| r.iter().all(|c| c.is_zero()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let ni = self.coeff.len().max(o.coeff.len());
        let mut coeff = Vec::with_capacity(ni);
        for i in 0..ni {
            let a = self.coeff.get(i);
            let b = o.coeff.get(i);
            let nj = a.map_or(0, |r| r.len()).max(b.map_or(0, |r| r.len()));
            let mut row = Vec::with_capacity(nj);
            for j in 0..nj {
                let x = a.and_then(|r| r.get(j)).cloned().unwrap_or_else(S::zero);
                let y = b.and_then(|r| r.get(j)).cloned().unwrap_or_else(S::zero);
                row.push(x.add(&y));
            }
            coeff.push(row);
        }
        PolyST { coeff }
    }

    pub fn scale(&self, s: &S) -> Self {
        PolyST {
            coeff: self
                .coeff
                .iter()
                .map(|r| r.iter().map(|c| c.mul(s)).collect())
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut acc = PolyST::zero();
        for (i, row) in self.coeff.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (k, orow) in o.coeff.iter().enumerate() {
                    for (l, d) in orow.iter().enumerate() {
                        if d.is_zero() {
                            continue;
                        }
                        acc = acc.add(&PolyST::monomial(i + k, j + l, c.mul(d)));
                    }
                }
            }
        }
        acc
    }

    /// Parity of the σ-dependence: Some(0) even, Some(1) odd, None mixed.
    pub fn sigma_parity(&self) -> Option<usize> {
        let mut par = None;
        for (i, row) in self.coeff.iter().enumerate() {
            if row.iter().any(|c| !c.is_zero()) {
                match par {
                    None => par = Some(i % 2),
                    Some(p) if p != i % 2 => return None,
                    _ => {}
                }
            }
        }
        par
    }
}

/// One term of a formal operator: polynomial coefficient times a derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct OpTerm<S: Scalar> {
    pub poly: PolyST<S>,
    pub op: DiffOp,
}

impl<S: Scalar> ProductState<S> {
    pub fn zero() -> Self {
        ProductState { rows: Vec::new() }
    }

    /// u₀ ⊗ fₙ
    pub fn pure(n: usize) -> Self {
        let mut rows = vec![TauProfile::zero(); n];
        rows[n - 1] = TauProfile::u0();
        ProductState { rows }
    }

    pub fn from_parts(v: &HermiteVector<S>, w: &TauProfile<S>) -> Self {
        ProductState {
            rows: v.c.iter().map(|c| w.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.rows.len().max(o.rows.len());
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.rows.get(i).cloned().unwrap_or_else(TauProfile::zero);
            let b = o.rows.get(i).cloned().unwrap_or_else(TauProfile::zero);
            rows.push(a.add(&b));
        }
        ProductState { rows }
    }

    pub fn scale(&self, s: &S) -> Self {
        ProductState {
            rows: self.rows.iter().map(|r| r.scale(s)).collect(),
        }
    }

    pub fn dtau(&self) -> Self {
        ProductState {
            rows: self.rows.iter().map(|r| r.dtau()).collect(),
        }
    }

    pub fn mul_tau_pow(&self, j: usize) -> Self {
        ProductState {
            rows: self.rows.iter().map(|r| r.mul_tau_pow(j)).collect(),
        }
    }

    fn ladder(&self, ctx: &OscCtx<S>, deriv: bool) -> Self {
        let mut rows = vec![TauProfile::zero(); self.rows.len() + 1];
        for (i, w) in self.rows.iter().enumerate() {
            let m = i + 1;
            if w.is_zero() {
                continue;
            }
            let t_up = if m >= ctx.base { S::one() } else { ctx.s_sq(m) };
            let up = if deriv {
                w.scale(&t_up.mul(&ctx.omega).neg())
            } else {
                w.scale(&t_up)
            };
            rows[m] = rows[m].add(&up);
            if m >= 2 {
                let t_dn = if m - 1 >= ctx.base {
                    ctx.s_sq(m - 1)
                } else {
                    S::one()
                };
                let dn = if deriv {
                    w.scale(&t_dn.mul(&ctx.omega))
                } else {
                    w.scale(&t_dn)
                };
                rows[m - 2] = rows[m - 2].add(&dn);
            }
        }
        let mut s = ProductState { rows };
        s.trim();
        s
    }

    pub fn mul_sigma(&self, ctx: &OscCtx<S>) -> Self {
        self.ladder(ctx, false)
    }

    pub fn dsigma(&self, ctx: &OscCtx<S>) -> Self {
        self.ladder(ctx, true)
    }

    fn trim(&mut self) {
        while self.rows.last().map_or(false, |r| r.is_zero()) {
            self.rows.pop();
        }
    }

    pub fn apply(&self, term: &OpTerm<S>, ctx: &OscCtx<S>) -> Self {
        let base = match term.op {
            DiffOp::Id => self.clone(),
            DiffOp::DTau => self.dtau(),
            DiffOp::DTau2 => self.dtau().dtau(),
            DiffOp::DSigma => self.dsigma(ctx),
            DiffOp::DSigma2 => self.dsigma(ctx).dsigma(ctx),
        };
        let mut acc = ProductState::zero();
        let mut sig_pow = base;
        for (i, row) in term.poly.coeff.iter().enumerate() {
            if i > 0 {
                sig_pow = sig_pow.mul_sigma(ctx);
            }
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                acc = acc.add(&sig_pow.mul_tau_pow(j).scale(c));
            }
        }
        acc
    }

    pub fn inner(&self, o: &Self, ctx: &OscCtx<S>) -> S {
        let mut acc = S::zero();
        for (i, a) in self.rows.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            if let Some(b) = o.rows.get(i) {
                if !b.is_zero() {
                    acc = acc.add(&a.inner(b).mul(&ctx.gauge_sq(i + 1)));
                }
            }
        }
        acc
    }

    pub fn norm(&self, ctx: &OscCtx<S>) -> f64 {
        self.inner(self, ctx).to_f64().sqrt()
    }

    /// Splits into the u₀-component and its orthogonal complement in τ:
    /// state = Σ_m v_m·(u₀ ⊗ f_m) + rest, ⟨rest row, u₀⟩ = 0 per row.
    pub fn split_u0(&self) -> (HermiteVector<S>, ProductState<S>) {
        let mut v = HermiteVector::zero();
        let mut rows = Vec::with_capacity(self.rows.len());
        for (i, w) in self.rows.iter().enumerate() {
            // ‖u₀‖ = 1 in the gauged inner product, so the projection
            // coefficient is just ⟨w, u₀⟩
            let c = w.proj_u0();
            v.set_add(i + 1, &c);
            rows.push(w.add(&TauProfile::u0().scale(&c.neg())));
        }
        let mut rest = ProductState { rows };
        rest.trim();
        (v, rest)
    }

    pub fn map_f64(&self) -> ProductState<f64> {
        ProductState {
            rows: self
                .rows
                .iter()
                .map(|r| TauProfile {
                    p: r.p.iter().map(|c| c.to_f64()).collect(),
                })
                .collect(),
        }
    }
}

/// Numeric evaluation of the normalized oscillator eigenfunction f_n(σ) for
/// H = −∂² + ω²σ².
pub fn hermite_fn(n: usize, omega: f64, sigma: f64) -> f64 {
    let x = omega.sqrt() * sigma;
    let mut psi_prev = 0.0;
    let mut psi = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * psi - ((kf - 1.0) / kf).sqrt() * psi_prev;
        psi_prev = psi;
        psi = next;
    }
    omega.powf(0.25) * psi
}
