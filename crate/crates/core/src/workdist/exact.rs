//! Exact evaluation of the transition weights in integer arithmetic.
//!
//! For fixed `n` and `s`, `e^z q_s(n, z)` is a polynomial in `z` with
//! rational coefficients; scaled by `n!(s+2n)!` the coefficients are
//! integers. The `f64` rapidity is taken as the exact dyadic rational it
//! represents and the polynomial is evaluated by integer Horner, so the only
//! rounding is the final conversion and the factor `e^{−z}`.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Float, One, ToPrimitive, Zero};

/// Cached factorials for repeated exact weight evaluation at one `n`.
#[derive(Debug, Clone)]
pub struct ExactWeights {
    n: u32,
    fact: Vec<BigUint>,
}

impl ExactWeights {
    pub fn new(n: u32) -> Self {
        let mut w = Self {
            n,
            fact: vec![BigUint::one()],
        };
        w.extend(2 * n as usize);
        w
    }

    fn extend(&mut self, max: usize) {
        while self.fact.len() <= max {
            let k = self.fact.len();
            let next = &self.fact[k - 1] * BigUint::from(k);
            self.fact.push(next);
        }
    }

    fn binomial(&self, n: usize, k: usize) -> BigUint {
        &self.fact[n] / (&self.fact[k] * &self.fact[n - k])
    }

    /// Integer coefficients `A_k` (index `k = 0..=s+2n`) and the common
    /// denominator `n!(s+2n)!` of `e^z q_s(n, z) = Σ A_k z^k / den`.
    pub fn polynomial(&mut self, s: i64) -> (Vec<BigInt>, BigUint) {
        let n = self.n as i64;
        assert!(s >= -n, "s must be ≥ −n");
        let top = (s + 2 * n) as usize;
        self.extend(top.max(2 * self.n as usize));
        let mut coeffs = vec![BigInt::zero(); top + 1];
        let n_fact = self.fact[self.n as usize].clone();
        for l in 0..=self.n as usize {
            let c_nl = self.binomial(self.n as usize, l);
            let n_over_l = &n_fact / &self.fact[l];
            let p_lo = (l as i64 - s).max(0) as usize;
            for p in p_lo..=2 * l {
                let k = (s + p as i64) as usize;
                let mag = &c_nl * self.binomial(2 * l, p) * &n_over_l * (&self.fact[top] / &self.fact[k - l]);
                let sign = if p % 2 == 0 { Sign::Plus } else { Sign::Minus };
                coeffs[k] += BigInt::from_biguint(sign, mag);
            }
        }
        (coeffs, n_fact * &self.fact[top])
    }

    /// `q_s(n, z)` to within a few ulps.
    pub fn weight(&mut self, s: i64, z: f64) -> f64 {
        assert!(z >= 0.0 && z.is_finite());
        if z == 0.0 {
            return if s == 0 { 1.0 } else { 0.0 };
        }
        let (coeffs, den) = self.polynomial(s);
        let (m, d) = dyadic(z);
        let top = coeffs.len() - 1;
        // d^K P(m/d) = Σ A_k m^k d^{K−k}, by Horner from the top.
        let m = BigInt::from(m);
        let mut acc = coeffs[top].clone();
        let mut dpow = BigInt::one();
        let d_int = BigInt::from(d.clone());
        for k in (0..top).rev() {
            dpow *= &d_int;
            acc = acc * &m + &coeffs[k] * &dpow;
        }
        let den = den * d.pow(top as u32);
        ratio_to_f64(&acc, &den) * (-z).exp()
    }
}

/// Splits a positive finite `f64` into `m / d` with `d` a power of two.
fn dyadic(z: f64) -> (BigUint, BigUint) {
    let (mantissa, exponent, _) = z.integer_decode();
    if exponent >= 0 {
        (BigUint::from(mantissa) << exponent as usize, BigUint::one())
    } else {
        (BigUint::from(mantissa), BigUint::one() << (-exponent) as usize)
    }
}

/// Rounds `num / den` to the nearest-ish `f64` (relative error < 2⁻⁶⁰).
pub fn ratio_to_f64(num: &BigInt, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let mag = num.magnitude();
    let shift = 64 - (mag.bits() as i64 - den.bits() as i64);
    let q = if shift >= 0 {
        (mag << shift as usize) / den
    } else {
        mag / (den << (-shift) as usize)
    };
    let v = libm::ldexp(q.to_f64().unwrap_or(f64::INFINITY), -shift as i32);
    if num.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}
