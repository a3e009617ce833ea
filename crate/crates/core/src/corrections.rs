//! Formal eigenvalue corrections beyond the three-term asymptotics.
//!
//! After scaling the boundary-collar operator with (s, t) =
//! (h^{1/8}σ, h^{1/2}τ), the operator h⁻¹ℒ_h expands in powers of h^{1/8}:
//!
//!   h⁻¹ℒ_h = −∂_τ² + h^{1/2}κ(h^{1/8}σ)·ã⁻¹∂_τ − h^{3/4}ã⁻²∂_σ²
//!            − h^{11/8}τκ′(h^{1/8}σ)·ã⁻³∂_σ,   ã = 1 − h^{1/2}τκ(h^{1/8}σ).
//!
//! This module builds that expansion order by order from the curvature jet
//! at the maximum, then runs the solvability recursion: at each order the
//! u₀⊗fₙ component of the accumulated right-hand side fixes the next energy
//! coefficient, the σ-resolvent (H_harm − λₙ)⁻¹ fixes the Hermite correction
//! of six orders earlier, and the τ-resolvent (P₀+1)⁻¹ fixes the
//! perpendicular profile. The coefficients e_m produced are
//! e₀ = −1, e₄ = −κ_max, e₆ = (2n−1)ω, and e_{j+7} = ζ_{j,n}.

use crate::scalar::Scalar;
use crate::spectral_basis::{
    invert_hharm_minus_lambda, invert_p0_plus_1, BasisError, DiffOp, HermiteVector, OpTerm,
    OscCtx, PolyST, ProductState, TauProfile,
};

#[derive(Debug, thiserror::Error)]
pub enum CorrectionError {
    #[error("curvature jet has {got} derivatives, need {need} for order {order}")]
    JetTooShort {
        got: usize,
        need: usize,
        order: usize,
    },
    #[error("kappa'(0) must vanish at the maximum")]
    NotAtMaximum,
    #[error("kappa''(0) must be negative at a non-degenerate maximum")]
    DegenerateMaximum,
    #[error("oscillator frequency inconsistent with the jet: omega² != -kappa''(0)/2")]
    FrequencyMismatch,
    #[error("solvability failed at order {order}: {source}")]
    InternalSolvabilityFailure {
        order: usize,
        source: BasisError,
    },
}

/// Truncated series in h^{1/8} of differential operators with polynomial
/// coefficients in (σ, τ); `orders[m]` collects the terms at h^{m/8}.
#[derive(Debug, Clone)]
pub struct FormalOperator<S: Scalar> {
    pub orders: Vec<Vec<OpTerm<S>>>,
}

/// Power series in h^{1/8} with PolyST coefficients.
type Series<S> = Vec<PolyST<S>>;

fn series_mul<S: Scalar>(a: &Series<S>, b: &Series<S>, len: usize) -> Series<S> {
    let mut r: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
    for (i, pa) in a.iter().enumerate().take(len) {
        if pa.is_zero() {
            continue;
        }
        for (j, pb) in b.iter().enumerate().take(len - i) {
            if pb.is_zero() {
                continue;
            }
            r[i + j] = r[i + j].add(&pa.mul(pb));
        }
    }
    r
}

/// Reciprocal of a series with constant term 1.
fn series_recip<S: Scalar>(a: &Series<S>, len: usize) -> Series<S> {
    let mut r: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
    r[0] = PolyST::constant(S::one());
    for m in 1..len {
        let mut acc = PolyST::zero();
        for j in 1..=m {
            if let Some(aj) = a.get(j) {
                if !aj.is_zero() && !r[m - j].is_zero() {
                    acc = acc.add(&aj.mul(&r[m - j]));
                }
            }
        }
        r[m] = acc.scale(&S::one().neg());
    }
    r
}

/// Expands the collar operator through order `max_order` in h^{1/8} from the
/// curvature derivatives κ(0), κ′(0), κ″(0), … at the maximum.
pub fn build_operator_series<S: Scalar>(
    kappa_jet: &[S],
    max_order: usize,
) -> Result<FormalOperator<S>, CorrectionError> {
    let need = if max_order >= 4 { max_order - 3 } else { 1 };
    if kappa_jet.len() < need {
        return Err(CorrectionError::JetTooShort {
            got: kappa_jet.len(),
            need,
            order: max_order,
        });
    }
    if kappa_jet.len() > 1 && !kappa_jet[1].is_negligible(1e-9) {
        return Err(CorrectionError::NotAtMaximum);
    }
    if kappa_jet.len() > 2 && kappa_jet[2].to_f64() >= 0.0 {
        return Err(CorrectionError::DegenerateMaximum);
    }
    let mut kappa_jet = kappa_jet.to_vec();
    if kappa_jet.len() > 1 {
        // numerically negligible by the check above; exact zero keeps the
        // order-5 slot structurally empty
        kappa_jet[1] = S::zero();
    }
    let len = max_order + 1;

    // κ(h^{1/8}σ) = Σ_j h^{j/8}·(κ^{(j)}(0)/j!)·σ^j
    let mut kappa: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
    let mut kappa_p: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
    let mut inv_fact = S::one();
    for j in 0..len {
        if j > 0 {
            inv_fact = inv_fact.div(&S::from_int(j as i64));
        }
        if let Some(kj) = kappa_jet.get(j) {
            kappa[j] = PolyST::monomial(j, 0, kj.mul(&inv_fact));
        }
        // κ′(h^{1/8}σ) = Σ_j h^{j/8}·(κ^{(j+1)}(0)/j!)·σ^j
        if let Some(kj1) = kappa_jet.get(j + 1) {
            kappa_p[j] = PolyST::monomial(j, 0, kj1.mul(&inv_fact));
        }
    }

    // ã = 1 − h^{4/8}·τ·κ(h^{1/8}σ)
    let mut a_tilde: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
    a_tilde[0] = PolyST::constant(S::one());
    for m in 4..len {
        a_tilde[m] = kappa[m - 4].mul(&PolyST::monomial(0, 1, S::one().neg()));
    }
    let a_inv = series_recip(&a_tilde, len);
    let a_inv2 = series_mul(&a_inv, &a_inv, len);
    let a_inv3 = series_mul(&a_inv2, &a_inv, len);

    let dtau_coeff = {
        // h^{1/2}·κ·ã⁻¹: shift by 4 orders
        let prod = series_mul(&kappa, &a_inv, len);
        let mut s: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
        for m in 4..len {
            s[m] = prod[m - 4].clone();
        }
        s
    };
    let dsigma_coeff = {
        // −h^{11/8}·τ·κ′·ã⁻³: shift by 11 orders
        let prod = series_mul(&kappa_p, &a_inv3, len);
        let mut s: Series<S> = (0..len).map(|_| PolyST::zero()).collect();
        for m in 11..len {
            s[m] = prod[m - 11].mul(&PolyST::monomial(0, 1, S::one().neg()));
        }
        s
    };

    let mut orders: Vec<Vec<OpTerm<S>>> = Vec::with_capacity(len);
    for m in 0..len {
        let mut terms = Vec::new();
        if m == 0 {
            // P₀ = −∂_τ²
            terms.push(OpTerm {
                poly: PolyST::constant(S::one().neg()),
                op: DiffOp::DTau2,
            });
        }
        if !dtau_coeff[m].is_zero() {
            terms.push(OpTerm {
                poly: dtau_coeff[m].clone(),
                op: DiffOp::DTau,
            });
        }
        if m >= 6 {
            // −h^{3/4}ã⁻²∂_σ²
            let c = a_inv2[m - 6].scale(&S::one().neg());
            if !c.is_zero() {
                terms.push(OpTerm {
                    poly: c,
                    op: DiffOp::DSigma2,
                });
            }
        }
        if !dsigma_coeff[m].is_zero() {
            terms.push(OpTerm {
                poly: dsigma_coeff[m].clone(),
                op: DiffOp::DSigma,
            });
        }
        orders.push(terms);
    }
    Ok(FormalOperator { orders })
}

/// Result of the solvability recursion for level n.
#[derive(Debug, Clone)]
pub struct CorrectionState<S: Scalar> {
    pub n: usize,
    /// highest completed order in h^{1/8}
    pub order: usize,
    /// energy coefficients e₀..e_order (e_{j+7} = ζ_j)
    pub e: Vec<S>,
    /// perpendicular profiles g_m (rows ⟂ u₀)
    pub g: Vec<ProductState<S>>,
    /// Hermite corrections v_m to the u₀-component of ψ_m
    pub v: Vec<HermiteVector<S>>,
    pub ctx: OscCtx<S>,
    ops: FormalOperator<S>,
}

impl<S: Scalar> CorrectionState<S> {
    /// ζ_{j,n} = e_{j+7}
    pub fn zeta(&self, j: usize) -> S {
        self.e[j + 7].clone()
    }

    pub fn zetas(&self) -> Vec<S> {
        (0..=self.order - 7).map(|j| self.zeta(j)).collect()
    }

    /// ψ_m = u₀⊗v_m + g_m (ψ₀ = u₀⊗fₙ).
    pub fn psi(&self, m: usize) -> ProductState<S> {
        if m == 0 {
            return ProductState::pure(self.n);
        }
        ProductState::from_parts(&self.v[m], &TauProfile::u0()).add(&self.g[m])
    }
}

/// Runs the recursion through ζ_{M,n}, i.e. through order M+7 in h^{1/8}.
/// The oscillator frequency ω = √(−κ″(0)/2) is supplied by the caller so the
/// exact-arithmetic path can use a rational value.
pub fn run_iteration<S: Scalar>(
    ops: &FormalOperator<S>,
    n: usize,
    max_zeta: usize,
    omega: S,
) -> Result<CorrectionState<S>, CorrectionError> {
    let top = max_zeta + 7;
    if ops.orders.len() <= top {
        return Err(CorrectionError::JetTooShort {
            got: ops.orders.len(),
            need: top + 1,
            order: top,
        });
    }
    // ω² must equal −κ″(0)/2, which is minus the σ²∂_τ coefficient of A₆
    let k2_half = ops.orders[6]
        .iter()
        .find(|t| t.op == DiffOp::DTau)
        .and_then(|t| t.poly.coeff.get(2))
        .and_then(|row| row.first())
        .map(|c| c.clone().neg())
        .unwrap_or_else(S::zero);
    if !omega.mul(&omega).sub(&k2_half).is_negligible(1e-9) {
        return Err(CorrectionError::FrequencyMismatch);
    }

    let ctx = OscCtx::new(omega, n);
    let mut e: Vec<S> = vec![S::from_int(-1)];
    let mut g: Vec<ProductState<S>> = vec![ProductState::zero()]; // g₀ unused
    let mut v: Vec<HermiteVector<S>> = vec![HermiteVector::zero()];
    let psi0 = ProductState::<S>::pure(n);

    for m in 1..=top {
        // accumulated known right-hand side at order m
        let mut rhs = ProductState::zero();
        for j in 1..=m {
            let k = m - j;
            // unknown u₀⊗v_k parts (k ≥ m−6, k ≥ 1) are either annihilated
            // by A_j − e_j (j ≤ 5) or enter through the σ-resolvent (j = 6)
            let state = if k == 0 {
                psi0.clone()
            } else if j <= 6 {
                g[k].clone()
            } else {
                g[k].clone()
                    .add(&ProductState::from_parts(&v[k], &TauProfile::u0()))
            };
            if state.is_zero() {
                continue;
            }
            for term in &ops.orders[j] {
                rhs = rhs.add(&state.apply(term, &ctx));
            }
            if j < m && !e[j].is_zero() {
                rhs = rhs.add(&state.scale(&e[j].neg()));
            }
        }
        let (rho, perp) = rhs.split_u0();
        // solvability: the fₙ component fixes e_m
        let em = rho.get(n);
        e.push(em.clone());
        let mut rho_perp = rho;
        if rho_perp.c.len() >= n {
            rho_perp.c[n - 1] = S::zero();
        }
        // σ-correction six orders back: (H_harm − λₙ)v_{m−6} = −(ρ − e_m fₙ)
        if m >= 7 {
            let vk = invert_hharm_minus_lambda(&rho_perp.scale(&S::one().neg()), n, &ctx)
                .map_err(|source| CorrectionError::InternalSolvabilityFailure {
                    order: m,
                    source,
                })?;
            v[m - 6] = vk;
        } else if !rho_perp.is_zero() {
            // below order 7 there is no σ-unknown; solvability must be exact
            let norm = rho_perp.inner(&rho_perp, &ctx).to_f64().sqrt();
            if norm > 1e-11 {
                return Err(CorrectionError::InternalSolvabilityFailure {
                    order: m,
                    source: BasisError::NotOrthogonal(norm),
                });
            }
        }
        // τ-correction at this order: (P₀+1)g_m = −rhs^⟂
        let mut g_rows = Vec::with_capacity(perp.rows.len());
        for row in &perp.rows {
            let w = row.scale(&S::one().neg());
            let sol = invert_p0_plus_1(&w).map_err(|source| {
                CorrectionError::InternalSolvabilityFailure { order: m, source }
            })?;
            g_rows.push(sol);
        }
        g.push(ProductState { rows: g_rows });
        v.push(HermiteVector::zero()); // placeholder for v_m, filled at m+6
    }

    Ok(CorrectionState {
        n,
        order: top,
        e,
        g,
        v,
        ctx,
        ops: ops.clone(),
    })
}

/// Evaluates the residual of the truncated quasimode at a concrete h:
/// ‖(Σ_m h^{m/8}A_m − Σ_m h^{m/8}e_m)·Σ_k h^{k/8}ψ_k‖ consists exactly of
/// the overflow orders m+k > N; the returned value is the residual norm
/// divided by h^{(N+1)/8} (with N = M+7), which stays bounded as h → 0.
pub fn quasimode_residual<S: Scalar>(state: &CorrectionState<S>, h: f64) -> f64 {
    let top = state.order;
    let ctx_f = OscCtx::new(state.ctx.omega.to_f64(), state.n);
    // collect ψ_k and pre-apply each operator order
    let psis: Vec<ProductState<f64>> = (0..=top).map(|k| state.psi(k).map_f64()).collect();
    let ops_f: Vec<Vec<OpTerm<f64>>> = state
        .ops
        .orders
        .iter()
        .take(top + 1)
        .map(|terms| {
            terms
                .iter()
                .map(|t| OpTerm {
                    poly: PolyST {
                        coeff: t
                            .poly
                            .coeff
                            .iter()
                            .map(|r| r.iter().map(|c| c.to_f64()).collect())
                            .collect(),
                    },
                    op: t.op,
                })
                .collect()
        })
        .collect();
    let e_f: Vec<f64> = state.e.iter().map(|c| c.to_f64()).collect();

    let h8 = h.powf(0.125);
    let mut residual = ProductState::<f64>::zero();
    for j in 0..=top {
        for k in 0..=top {
            if j + k <= top {
                continue;
            }
            let mut contrib = ProductState::zero();
            for term in &ops_f[j] {
                contrib = contrib.add(&psis[k].apply(term, &ctx_f));
            }
            contrib = contrib.add(&psis[k].scale(&(-e_f[j])));
            if contrib.is_zero() {
                continue;
            }
            residual = residual.add(&contrib.scale(&h8.powi((j + k) as i32)));
        }
    }
    residual.norm(&ctx_f) / h8.powi(top as i32 + 1)
}

/// μ_{n,M}(h) assembled from the computed coefficients:
/// h·Σ_m h^{m/8}e_m = −h − κ_max h^{3/2} + (2n−1)ω h^{7/4} + Σ_j ζ_j h^{(15+j)/8}.
pub fn mu_from_state<S: Scalar>(state: &CorrectionState<S>, h: f64) -> f64 {
    let h8 = h.powf(0.125);
    let mut acc = 0.0;
    for (m, em) in state.e.iter().enumerate() {
        acc += em.to_f64() * h8.powi(m as i32);
    }
    h * acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num::BigRational;

    /// ellipse(2,1) curvature jet in arc length at the maximum
    fn ellipse_jet_f64(order: usize) -> Vec<f64> {
        let c = crate::geometry::ParametricCurve::Ellipse { a: 2.0, b: 1.0 };
        let p = crate::geometry::arc_length_reparam(&c, 512).unwrap();
        p.kappa_jet_at_max(order)
    }

    #[test]
    fn operator_heads() {
        let ops = build_operator_series(&ellipse_jet_f64(8), 12).unwrap();
        // order 0: −∂_τ²
        assert_eq!(ops.orders[0].len(), 1);
        assert_eq!(ops.orders[0][0].op, DiffOp::DTau2);
        // orders 1..3 vanish
        for m in 1..4 {
            assert!(ops.orders[m].is_empty(), "order {m}");
        }
        // order 4: κ(0)∂_τ = 2∂_τ
        assert_eq!(ops.orders[4].len(), 1);
        assert_eq!(ops.orders[4][0].op, DiffOp::DTau);
        assert_abs_diff_eq!(ops.orders[4][0].poly.coeff[0][0], 2.0, epsilon = 1e-10);
        // order 5: κ′(0)σ∂_τ = 0 at the maximum
        assert!(ops.orders[5].is_empty());
        // order 6: −∂_σ² + (κ″(0)/2)σ²∂_τ, κ″(0) = −18
        let dt = ops.orders[6].iter().find(|t| t.op == DiffOp::DTau).unwrap();
        assert_abs_diff_eq!(dt.poly.coeff[2][0], -9.0, epsilon = 1e-8);
        let ds2 = ops.orders[6].iter().find(|t| t.op == DiffOp::DSigma2).unwrap();
        assert_abs_diff_eq!(ds2.poly.coeff[0][0], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_parity_alternates() {
        let ops = build_operator_series(&ellipse_jet_f64(8), 12).unwrap();
        for (m, terms) in ops.orders.iter().enumerate() {
            for t in terms {
                let op_parity = match t.op {
                    DiffOp::DSigma => 1,
                    _ => 0,
                };
                if let Some(p) = t.poly.sigma_parity() {
                    assert_eq!((p + op_parity) % 2, m % 2, "order {m}");
                } else {
                    panic!("mixed-parity coefficient at order {m}");
                }
            }
        }
    }

    #[test]
    fn operator_series_sums_to_closed_form() {
        // independent oracle: evaluate the truncated coefficient series at a
        // concrete (h, σ, τ) and compare with κ(h^{1/8}σ)·ã⁻¹ etc.
        let jet = ellipse_jet_f64(10);
        let ops = build_operator_series(&jet, 14).unwrap();
        let h: f64 = 1e-4;
        let h8 = h.powf(0.125);
        let (sigma, tau) = (0.4, 0.7);
        let kappa_at = |s: f64| {
            let mut acc = 0.0;
            let mut fact = 1.0;
            for (j, kj) in jet.iter().enumerate() {
                if j > 0 {
                    fact *= j as f64;
                }
                acc += kj / fact * s.powi(j as i32);
            }
            acc
        };
        let kap = kappa_at(h8 * sigma);
        let a = 1.0 - h.sqrt() * tau * kap;
        // ∂_τ coefficient: h^{1/2}κã⁻¹
        let want_dtau = h.sqrt() * kap / a;
        let mut got = 0.0;
        for (m, terms) in ops.orders.iter().enumerate() {
            for t in terms {
                if t.op == DiffOp::DTau {
                    let mut val = 0.0;
                    for (i, row) in t.poly.coeff.iter().enumerate() {
                        for (j, c) in row.iter().enumerate() {
                            val += c * sigma.powi(i as i32) * tau.powi(j as i32);
                        }
                    }
                    got += val * h8.powi(m as i32);
                }
            }
        }
        // truncation error is O(h^{15/8}) here
        assert_abs_diff_eq!(got, want_dtau, epsilon = 1e-5);
        // ∂_σ² coefficient: −h^{3/4}ã⁻²
        let want_ds2 = -h.powf(0.75) / (a * a);
        let mut got2 = 0.0;
        for (m, terms) in ops.orders.iter().enumerate() {
            for t in terms {
                if t.op == DiffOp::DSigma2 {
                    let mut val = 0.0;
                    for (i, row) in t.poly.coeff.iter().enumerate() {
                        for (j, c) in row.iter().enumerate() {
                            val += c * sigma.powi(i as i32) * tau.powi(j as i32);
                        }
                    }
                    got2 += val * h8.powi(m as i32);
                }
            }
        }
        assert_abs_diff_eq!(got2, want_ds2, epsilon = 1e-5);
    }

    #[test]
    fn recursion_heads_reproduce_known_coefficients() {
        let ops = build_operator_series(&ellipse_jet_f64(8), 12).unwrap();
        let st = run_iteration(&ops, 1, 5, 3.0).unwrap();
        assert_abs_diff_eq!(st.e[0], -1.0, epsilon = 0.0);
        for m in [1usize, 2, 3, 5] {
            assert_abs_diff_eq!(st.e[m], 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(st.e[4], -2.0, epsilon = 1e-10); // −κ_max
        assert_abs_diff_eq!(st.e[6], 3.0, epsilon = 1e-9); // (2n−1)ω
        let st2 = run_iteration(&ops, 2, 5, 3.0).unwrap();
        assert_abs_diff_eq!(st2.e[6], 9.0, epsilon = 1e-9);
    }

    #[test]
    fn even_zeta_vanish_float() {
        for n in [1usize, 2] {
            let ops = build_operator_series(&ellipse_jet_f64(8), 12).unwrap();
            let st = run_iteration(&ops, n, 5, 3.0).unwrap();
            let z1 = st.zeta(1).abs().max(1.0);
            for j in [0usize, 2, 4] {
                assert!(
                    st.zeta(j).abs() < 1e-8 * z1,
                    "n={n} zeta_{j} = {}",
                    st.zeta(j)
                );
            }
        }
    }

    #[test]
    fn even_zeta_vanish_exactly_in_rational_arithmetic() {
        // synthetic rational jet with the same structure (κ′=0, κ″=−18 so
        // ω = 3 is rational); parity vanishing is structural
        type Q = BigRational;
        let jet: Vec<Q> = [2, 0, -18, 5, 7, -3, 1, 2, 4]
            .iter()
            .map(|&v| Q::from_int(v))
            .collect();
        let ops = build_operator_series(&jet, 12).unwrap();
        for n in [1usize, 2] {
            let st = run_iteration(&ops, n, 5, Q::from_int(3)).unwrap();
            for j in [0usize, 2, 4] {
                assert!(
                    Scalar::is_zero(&st.zeta(j)),
                    "n={n} zeta_{j} = {:?} not exactly zero",
                    st.zeta(j)
                );
            }
            assert!(!Scalar::is_zero(&st.zeta(1)));
        }
    }

    #[test]
    fn rational_and_float_paths_agree() {
        type Q = BigRational;
        let jet_f = [2.0, 0.0, -18.0, 5.0, 7.0, -3.0, 1.0, 2.0, 4.0];
        let jet_q: Vec<Q> = [2, 0, -18, 5, 7, -3, 1, 2, 4]
            .iter()
            .map(|&v| Q::from_int(v))
            .collect();
        let sf = run_iteration(&build_operator_series(&jet_f, 12).unwrap(), 1, 5, 3.0).unwrap();
        let sq = run_iteration(
            &build_operator_series(&jet_q, 12).unwrap(),
            1,
            5,
            Q::from_int(3),
        )
        .unwrap();
        for j in 0..=5 {
            assert_abs_diff_eq!(sf.zeta(j), sq.zeta(j).to_f64(), epsilon = 1e-9);
        }
    }

    #[test]
    fn ellipse_zeta1_pinned() {
        // the arc-length curvature jet of the 2:1 ellipse at the vertex is
        // integer-valued; the exact recursion then gives ζ_{1,1} = −93/16
        type Q = BigRational;
        let jet_q: Vec<Q> = [2, 0, -18, 0, 1098, 0, -170010, 0, 49445010]
            .iter()
            .map(|&v| Q::from_int(v))
            .collect();
        let jet_f = ellipse_jet_f64(8);
        for (a, b) in jet_q.iter().zip(&jet_f) {
            assert_abs_diff_eq!(a.to_f64(), *b, epsilon = 1e-6 * b.abs().max(1.0));
        }
        let sq = run_iteration(
            &build_operator_series(&jet_q, 12).unwrap(),
            1,
            5,
            Q::from_int(3),
        )
        .unwrap();
        assert_eq!(sq.zeta(1), Q::ratio(-93, 16));
        let sf = run_iteration(&build_operator_series(&jet_f, 12).unwrap(), 1, 5, 3.0).unwrap();
        assert_abs_diff_eq!(sf.zeta(1), -93.0 / 16.0, epsilon = 1e-9);
    }

    #[test]
    fn quasimode_residual_ratio_bounded() {
        let ops = build_operator_series(&ellipse_jet_f64(8), 12).unwrap();
        for n in [1usize, 2] {
            let st = run_iteration(&ops, n, 0, 3.0).unwrap();
            let ratios: Vec<f64> = [1e-2, 1e-3, 1e-4]
                .iter()
                .map(|&h| quasimode_residual(&st, h))
                .collect();
            let maxr = ratios.iter().cloned().fold(0.0, f64::max);
            let minr = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(
                maxr / minr < 3.0,
                "n={n}: ratios vary too much: {ratios:?}"
            );
        }
    }

    #[test]
    fn jet_too_short_is_reported() {
        let jet = [2.0, 0.0, -18.0];
        assert!(matches!(
            build_operator_series(&jet, 12),
            Err(CorrectionError::JetTooShort { .. })
        ));
    }

    #[test]
    fn not_at_maximum_rejected() {
        let jet = [2.0, 0.5, -18.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            build_operator_series(&jet, 12),
            Err(CorrectionError::NotAtMaximum)
        ));
    }
}
