//! Transition weights `q_s(n, z)`: probability that a mode starting in
//! `|n⟩` ends `s` quanta higher after a displacement of rapidity `z`.
//!
//! `q_s(n, z) = Σ_{l=0}^{n} Σ_{p=max(l−s,0)}^{2l} C(n,l) C(2l,p) (−1)^p
//! e^{−z} z^{s+p} / (l! (s+p−l)!)`.

use serde::{Deserialize, Serialize};

use super::exact::ExactWeights;
use crate::error::{Error, Result};
use crate::scalar::{Compensated, Real};
use crate::special::{poisson_pmf, LnFactorials};

/// Negative raw weights above this are treated as round-off and clipped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;

/// Auto mode accepts the floating sum when its error bound is below this.
pub const AUTO_ERROR_BOUND: f64 = 1e-13;

/// How the alternating double sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMethod {
    /// Compensated floating sum, falling back to exact arithmetic when its
    /// a-priori error bound is too large.
    #[default]
    Auto,
    /// Compensated floating sum of log-Γ scaled terms.
    Compensated,
    /// Integer polynomial evaluation at the exact value of `z`.
    Exact,
}

/// Reusable evaluator for weights at fixed `n`.
pub struct WeightEvaluator<T> {
    n: u32,
    method: WeightMethod,
    ln_fact: LnFactorials<T>,
    exact: Option<ExactWeights>,
}

impl<T: Real> WeightEvaluator<T> {
    pub fn new(n: u32, method: WeightMethod) -> Self {
        Self {
            n,
            method,
            ln_fact: LnFactorials::new(2 * n as usize + 16),
            exact: None,
        }
    }

    fn exact(&mut self, s: i64, z: T) -> T {
        let n = self.n;
        let e = self.exact.get_or_insert_with(|| ExactWeights::new(n));
        T::lit(e.weight(s, z.to_f64().unwrap()))
    }

    /// Compensated sum and the bound `Σ|term|` used to judge it.
    fn compensated(&mut self, s: i64, z: T) -> (T, T) {
        let n = self.n as usize;
        let top = (s + 2 * n as i64) as usize;
        self.ln_fact.ensure(top.max(2 * n));
        let lf = &self.ln_fact;
        let ln_z = z.ln();
        let mut acc = Compensated::new();
        let mut abs = T::zero();
        for l in 0..=n {
            let p_lo = (l as i64 - s).max(0) as usize;
            for p in p_lo..=2 * l {
                let k = (s + p as i64) as usize;
                let ln_mag = lf.ln_binomial(n, l) + lf.ln_binomial(2 * l, p) - z + T::lit(k as f64) * ln_z
                    - lf.get(l)
                    - lf.get(k - l);
                let mag = ln_mag.exp();
                abs += mag;
                acc.add(if p % 2 == 0 { mag } else { -mag });
            }
        }
        (acc.value(), abs)
    }

    /// Raw (unclipped) `q_s(n, z)`.
    pub fn raw(&mut self, s: i64, z: T) -> Result<T> {
        let n = self.n as i64;
        if s < -n {
            return Err(Error::domain(format!("s = {s} below −n = {}", -n)));
        }
        if !(z >= T::zero()) || !z.is_finite() {
            return Err(Error::domain(format!("rapidity z = {z} must be finite and ≥ 0")));
        }
        if z == T::zero() {
            return Ok(if s == 0 { T::one() } else { T::zero() });
        }
        if n == 0 {
            return Ok(poisson_pmf(s as usize, z));
        }
        Ok(match self.method {
            WeightMethod::Exact => self.exact(s, z),
            WeightMethod::Compensated => self.compensated(s, z).0,
            WeightMethod::Auto => {
                let (v, abs) = self.compensated(s, z);
                if abs * T::lit(64.0) * T::epsilon() < T::lit(AUTO_ERROR_BOUND) {
                    v
                } else {
                    self.exact(s, z)
                }
            }
        })
    }

    /// `q_s(n, z)` with negative round-off clipped to zero.
    pub fn weight(&mut self, s: i64, z: T) -> Result<T> {
        let v = self.raw(s, z)?;
        if v < -T::lit(NEGATIVE_TOLERANCE) {
            return Err(Error::precision(
                format!(
                    "weight q_{s}({}, {z}) evaluated to {v}: cancellation exceeds working precision",
                    self.n
                ),
                "use a smaller n or the exact weight method",
            ));
        }
        Ok(v.max(T::zero()))
    }
}

/// `q_s(n, z)` for every `s` in `s_range`, clipped and paired with `s`.
pub fn weights_number<T: Real>(
    n: u32,
    z: T,
    s_range: std::ops::RangeInclusive<i64>,
    method: WeightMethod,
) -> Result<Vec<(i64, T)>> {
    let mut ev = WeightEvaluator::new(n, method);
    s_range.map(|s| Ok((s, ev.weight(s, z)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::assoc_laguerre;

    /// Independent closed form through the associated Laguerre polynomial.
    fn closed_form(n: u32, s: i64, z: f64) -> f64 {
        let m = n as i64 + s;
        let (lo, hi) = (n.min(m as u32), n.max(m as u32));
        let a = hi - lo;
        let lf = LnFactorials::<f64>::new(hi as usize);
        let lag = assoc_laguerre(lo, a, z);
        ((lf.get(lo as usize) - lf.get(hi as usize)) + a as f64 * z.ln() - z).exp() * lag * lag
    }

    #[test]
    fn all_methods_agree_with_closed_form() {
        for &n in &[1u32, 2, 3, 5] {
            for &z in &[0.1, 1.0, 3.7] {
                for s in -(n as i64)..=8 {
                    let want = closed_form(n, s, z);
                    for (method, tol) in [
                        (WeightMethod::Compensated, 1e-11),
                        (WeightMethod::Exact, 1e-14),
                        (WeightMethod::Auto, 1e-13),
                    ] {
                        let got = WeightEvaluator::<f64>::new(n, method).weight(s, z).unwrap();
                        assert!((got - want).abs() < tol, "n={n} s={s} z={z} {method:?}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_path_survives_heavy_cancellation() {
        let (n, z) = (10u32, 20.0);
        let mut exact = WeightEvaluator::<f64>::new(n, WeightMethod::Exact);
        for s in [-10i64, -3, 0, 7, 25] {
            let want = closed_form(n, s, z);
            let got = exact.weight(s, z).unwrap();
            assert!((got - want).abs() < 1e-13 * want.max(1e-3), "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn trivial_limits() {
        assert_eq!(weights_number::<f64>(4, 0.0, -4..=4, WeightMethod::Auto).unwrap()[4], (0, 1.0));
        let row = weights_number::<f64>(0, 1.5, 0..=5, WeightMethod::Auto).unwrap();
        for (s, q) in row {
            assert!((q - poisson_pmf(s as usize, 1.5)).abs() < 1e-16);
        }
        assert!(matches!(
            weights_number::<f64>(2, 1.0, -3..=0, WeightMethod::Auto),
            Err(Error::Domain(_))
        ));
    }
}
