//! Truncated Taylor series (jets) in one variable, used to carry exact
//! derivative data of curve parameterizations through arc-length
//! reparameterization.
//!
//! A `Jet` holds coefficients `c[k]` of `sum_k c[k] u^k` about a base point.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn zero(len: usize) -> Self {
        Jet { c: vec![0.0; len] }
    }

    pub fn constant(v: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = v;
        Jet { c }
    }

    /// The identity jet `u` (value 0, unit first derivative).
    pub fn variable(len: usize) -> Self {
        let mut c = vec![0.0; len];
        if len > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Taylor jet of cos(t) about t0, in the offset variable u = t - t0.
    pub fn cos_about(t0: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        let mut inv_fact = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                inv_fact /= k as f64;
            }
            *ck = match k % 4 {
                0 => t0.cos(),
                1 => -t0.sin(),
                2 => -t0.cos(),
                _ => t0.sin(),
            } * inv_fact;
        }
        Jet { c }
    }

    /// Taylor jet of sin(t) about t0.
    pub fn sin_about(t0: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        let mut inv_fact = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                inv_fact /= k as f64;
            }
            *ck = match k % 4 {
                0 => t0.sin(),
                1 => t0.cos(),
                2 => -t0.sin(),
                _ => -t0.cos(),
            } * inv_fact;
        }
        Jet { c }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let n = self.len().min(other.len());
        Jet {
            c: (0..n).map(|k| self.c[k] + other.c[k]).collect(),
        }
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        let n = self.len().min(other.len());
        Jet {
            c: (0..n).map(|k| self.c[k] - other.c[k]).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|x| a * x).collect(),
        }
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        let n = self.len().min(other.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * other.c[j];
            }
        }
        Jet { c }
    }

    /// Series reciprocal; requires a nonzero constant term.
    pub fn recip(&self) -> Jet {
        let n = self.len();
        assert!(self.c[0] != 0.0, "recip of series with zero constant term");
        let mut r = vec![0.0; n];
        r[0] = 1.0 / self.c[0];
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * r[k - j];
            }
            r[k] = -acc / self.c[0];
        }
        Jet { c: r }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self.mul(&other.recip())
    }

    /// Series square root; requires a positive constant term.
    pub fn sqrt(&self) -> Jet {
        let n = self.len();
        assert!(self.c[0] > 0.0, "sqrt of series with non-positive constant term");
        let mut r = vec![0.0; n];
        r[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..k {
                acc += r[j] * r[k - j];
            }
            r[k] = (self.c[k] - acc) / (2.0 * r[0]);
        }
        Jet { c: r }
    }

    /// Termwise derivative (shortens by one coefficient).
    pub fn derivative(&self) -> Jet {
        let n = self.len();
        let mut c = vec![0.0; n.saturating_sub(1)];
        for (k, ck) in c.iter_mut().enumerate() {
            *ck = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    /// Termwise antiderivative with zero constant term (lengthens by one).
    pub fn integral(&self) -> Jet {
        let mut c = vec![0.0; self.len() + 1];
        for k in 0..self.len() {
            c[k + 1] = self.c[k] / (k + 1) as f64;
        }
        Jet { c }
    }

    /// Composition self(g(u)); requires g(0) = 0.
    pub fn compose(&self, g: &Jet) -> Jet {
        assert!(g.c[0] == 0.0, "composition requires inner constant term 0");
        let n = self.len().min(g.len());
        let mut acc = Jet::constant(0.0, n);
        // Horner on the outer series
        for k in (0..n).rev() {
            acc = acc.mul(g);
            acc.c[0] += self.c[k];
        }
        acc
    }

    /// Compositional inverse: given s(u) with s(0)=0, s'(0) != 0, returns
    /// u(s) with u(s(v)) = v to the jet order.
    pub fn invert(&self) -> Jet {
        let n = self.len();
        assert!(self.c[0] == 0.0 && self.c[1] != 0.0);
        let mut inv = Jet::zero(n);
        inv.c[1] = 1.0 / self.c[1];
        // fixed-point refinement, one order at a time
        for _ in 2..n {
            // inv <- inv - (self(inv) - id) / self'(inv)
            let comp = self.compose(&inv);
            let mut err = comp;
            if n > 1 {
                err.c[1] -= 1.0;
            }
            let dself = self.derivative();
            let mut dcomp = dself.compose(&Jet {
                c: inv.c[..n - 1].to_vec(),
            });
            dcomp.c.resize(n, 0.0);
            let corr = err.div(&dcomp);
            inv = inv.sub(&corr);
        }
        inv
    }

    /// Horner evaluation of the truncated Taylor polynomial at offset x.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// k-th derivative value at the base point.
    pub fn deriv_at_base(&self, k: usize) -> f64 {
        let mut fact = 1.0;
        for j in 2..=k {
            fact *= j as f64;
        }
        self.c.get(k).copied().unwrap_or(0.0) * fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recip_and_sqrt_roundtrip() {
        let mut f = Jet::constant(2.0, 8);
        f.c[1] = -0.3;
        f.c[2] = 0.07;
        f.c[3] = 1.1;
        let r = f.recip();
        let one = f.mul(&r);
        assert_abs_diff_eq!(one.c[0], 1.0, epsilon = 1e-14);
        for k in 1..8 {
            assert_abs_diff_eq!(one.c[k], 0.0, epsilon = 1e-13);
        }
        let s = f.sqrt();
        let back = s.mul(&s);
        for k in 0..8 {
            assert_abs_diff_eq!(back.c[k], f.c[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn invert_recovers_parameter() {
        // s(u) = u + 0.2 u^2 + 0.05 u^3
        let mut s = Jet::zero(9);
        s.c[1] = 1.0;
        s.c[2] = 0.2;
        s.c[3] = 0.05;
        let u = s.invert();
        let id = s.compose(&u);
        assert_abs_diff_eq!(id.c[1], 1.0, epsilon = 1e-12);
        for k in (0..9).filter(|&k| k != 1) {
            assert_abs_diff_eq!(id.c[k], 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn trig_jets_match_derivatives() {
        let j = Jet::cos_about(0.7, 6);
        assert_abs_diff_eq!(j.deriv_at_base(0), 0.7f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(j.deriv_at_base(1), -0.7f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(j.deriv_at_base(2), -0.7f64.cos(), epsilon = 1e-15);
    }
}
