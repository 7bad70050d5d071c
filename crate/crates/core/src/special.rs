//! Special functions: log-factorials, Laguerre polynomials, polylogarithms.

use num_complex::Complex;

use crate::scalar::Real;

/// Table of `ln k!` for `k = 0..=max`, built from `ln Γ`.
#[derive(Debug, Clone)]
pub struct LnFactorials<T> {
    table: Vec<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new(max: usize) -> Self {
        let table = (0..=max)
            .map(|k| T::lit(k as f64 + 1.0).lgamma())
            .collect();
        Self { table }
    }

    /// Grows the table in place so that `ln k!` is available for `k <= max`.
    pub fn ensure(&mut self, max: usize) {
        for k in self.table.len()..=max {
            self.table.push(T::lit(k as f64 + 1.0).lgamma());
        }
    }

    #[inline]
    pub fn get(&self, k: usize) -> T {
        self.table[k]
    }

    /// `ln C(n, k)` for `0 <= k <= n`.
    #[inline]
    pub fn ln_binomial(&self, n: usize, k: usize) -> T {
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// Laguerre polynomial `L_n(x)` by the upward three-term recurrence.
pub fn laguerre<T: Real>(n: u32, x: Complex<T>) -> Complex<T> {
    let one = Complex::new(T::one(), T::zero());
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one - x;
    for k in 1..n {
        let kf = T::lit(k as f64);
        let next = (cur * (T::lit(2.0) * kf + T::one()) - cur * x - prev * kf) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` for real `x`.
pub fn assoc_laguerre<T: Real>(n: u32, a: u32, x: T) -> T {
    let af = T::lit(a as f64);
    if n == 0 {
        return T::one();
    }
    let mut prev = T::one();
    let mut cur = T::one() + af - x;
    for k in 1..n {
        let kf = T::lit(k as f64);
        let next = ((T::lit(2.0) * kf + T::one() + af - x) * cur - (kf + af) * prev) / (kf + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Poisson probability `e^{-m} m^k / k!`.
pub fn poisson_pmf<T: Real>(k: usize, mean: T) -> T {
    if mean == T::zero() {
        return if k == 0 { T::one() } else { T::zero() };
    }
    let kf = T::lit(k as f64);
    (kf * mean.ln() - mean - (kf + T::one()).lgamma()).exp()
}

/// Riemann zeta at negative odd integers `-1, -3, ..., -19`, indexed by
/// `(m - 1) / 2`.
const ZETA_NEG_ODD: [f64; 10] = [
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
    3617.0 / 8160.0,
    -43867.0 / 14364.0,
    174611.0 / 6600.0,
];

const ZETA_2: f64 = 1.644_934_066_848_226_4;
const ZETA_3: f64 = 1.202_056_903_159_594_3;

fn zeta_nonpositive(m: usize) -> f64 {
    match m {
        0 => -0.5,
        m if m % 2 == 0 => 0.0,
        m => ZETA_NEG_ODD.get((m - 1) / 2).copied().unwrap_or(0.0),
    }
}

/// Polylogarithm `Li_s(e^{-x})` for `s ∈ {2, 3}` and `x >= 0`.
pub fn polylog_exp<T: Real>(s: u32, x: T) -> T {
    assert!(s == 2 || s == 3, "polylog_exp supports s = 2, 3");
    assert!(x >= T::zero(), "polylog_exp requires x >= 0");
    if x == T::zero() {
        return T::lit(if s == 2 { ZETA_2 } else { ZETA_3 });
    }
    let xf = x.to_f64().unwrap();
    let value = if xf > std::f64::consts::LN_2 {
        let u = (-xf).exp();
        let mut sum = 0.0;
        let mut power = 1.0;
        for k in 1..2000 {
            power *= u;
            let term = power / (k as f64).powi(s as i32);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum
    } else {
        // Expansion around u = 1 in mu = ln u = -x.
        let mu = -xf;
        let (log_part, head) = if s == 2 {
            (mu * (1.0 - xf.ln()), ZETA_2)
        } else {
            (0.5 * mu * mu * (1.5 - xf.ln()), ZETA_3 + ZETA_2 * mu)
        };
        let mut sum = log_part + head;
        let mut power = if s == 2 { mu } else { mu * mu };
        let mut fact = if s == 2 { 1.0 } else { 2.0 };
        for k in (s as usize)..(s as usize + 20) {
            power *= mu;
            fact *= k as f64;
            sum += zeta_nonpositive(k - s as usize) * power / fact;
        }
        sum
    };
    T::lit(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit_laguerre(n: u32, x: f64) -> f64 {
        // L_n(x) = sum_l C(n, l) (-x)^l / l!
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut fact = 1.0;
        for l in 0..=n {
            if l > 0 {
                binom *= (n - l + 1) as f64 / l as f64;
                fact *= l as f64;
            }
            sum += binom * (-x).powi(l as i32) / fact;
        }
        sum
    }

    #[test]
    fn laguerre_matches_explicit_sum() {
        for n in 0..8 {
            for &x in &[0.0, 0.3, 1.7, 4.0] {
                let got = laguerre::<f64>(n, Complex::new(x, 0.0));
                assert!((got.re - explicit_laguerre(n, x)).abs() < 1e-12, "n={n} x={x}");
                assert_eq!(got.im, 0.0);
            }
        }
    }

    #[test]
    fn assoc_laguerre_low_orders() {
        // L_1^{(a)}(x) = 1 + a - x ; L_2^{(1)}(x) = 3 - 3x + x^2/2
        assert!((assoc_laguerre::<f64>(1, 2, 0.5) - 2.5).abs() < 1e-15);
        let x = 0.7;
        assert!((assoc_laguerre::<f64>(2, 1, x) - (3.0 - 3.0 * x + 0.5 * x * x)).abs() < 1e-14);
        assert_eq!(assoc_laguerre::<f64>(0, 5, 3.0), 1.0);
    }

    #[test]
    fn ln_factorials_and_binomials() {
        let t = LnFactorials::<f64>::new(20);
        assert!((t.get(10) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((t.ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn poisson_pmf_sums_to_one() {
        let s: f64 = (0..100).map(|k| poisson_pmf(k, 7.5)).sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert_eq!(poisson_pmf::<f64>(0, 0.0), 1.0);
    }

    #[test]
    fn polylog_branches_agree_with_direct_series() {
        for &s in &[2u32, 3] {
            for &x in &[0.05f64, 0.3, 0.69, 0.7, 2.0] {
                let u = (-x).exp();
                let direct: f64 = (1..200_000).map(|k| u.powi(k) / (k as f64).powi(s as i32)).sum();
                let got = polylog_exp::<f64>(s, x);
                assert!((got - direct).abs() < 1e-9, "s={s} x={x}: {got} vs {direct}");
            }
        }
    }
}
