//! Monotone piecewise-cubic (Fritsch–Carlson / PCHIP) interpolation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct TableRepr<T> {
    times: Vec<T>,
    values: Vec<T>,
}

/// Samples `(t_k, y_k)` interpolated by a shape-preserving cubic Hermite spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "TableRepr<T>", into = "TableRepr<T>")]
pub struct Table<T> {
    times: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> TryFrom<TableRepr<T>> for Table<T> {
    type Error = Error;
    fn try_from(r: TableRepr<T>) -> Result<Self> {
        Table::new(r.times, r.values)
    }
}

impl<T: Real> From<Table<T>> for TableRepr<T> {
    fn from(t: Table<T>) -> Self {
        TableRepr {
            times: t.times,
            values: t.values,
        }
    }
}

impl<T: Real> Table<T> {
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Interpolation(format!(
                "{} sample times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Interpolation("need at least two samples".into()));
        }
        if times.iter().chain(values.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Interpolation("non-finite sample".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Interpolation("sample times must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&times, &values);
        Ok(Self {
            times,
            values,
            slopes,
        })
    }

    pub fn first_time(&self) -> T {
        self.times[0]
    }

    pub fn last_time(&self) -> T {
        *self.times.last().unwrap()
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Evaluates the interpolant; queries outside the sampled interval fail.
    pub fn eval(&self, t: T) -> Result<T> {
        let n = self.times.len();
        if t < self.times[0] || t > self.times[n - 1] {
            return Err(Error::Interpolation(format!(
                "query {t} outside tabulated range [{}, {}]",
                self.times[0],
                self.times[n - 1]
            )));
        }
        // Index of the interval containing t.
        let k = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i - 1,
        };
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = (T::one() + two * s) * (T::one() - s) * (T::one() - s);
        let h10 = s * (T::one() - s) * (T::one() - s);
        let h01 = s * s * (three - two * s);
        let h11 = s * s * (s - T::one());
        Ok(h00 * self.values[k]
            + h10 * h * self.slopes[k]
            + h01 * self.values[k + 1]
            + h11 * h * self.slopes[k + 1])
    }
}

fn pchip_slopes<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    let n = x.len();
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<T> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![T::zero(); n];
    let two = T::lit(2.0);
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= T::zero() {
            d[k] = T::zero();
        } else {
            let w1 = two * h[k] + h[k - 1];
            let w2 = h[k] + two * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// One-sided three-point end derivative with the usual shape-preserving limits.
fn end_slope<T: Real>(h0: T, h1: T, del0: T, del1: T) -> T {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let d = ((two * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        T::zero()
    } else if del0.signum() != del1.signum() && d.abs() > (three * del0).abs() {
        three * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_and_linear_data() {
        let t: Table<f64> = Table::new(vec![0.0, 1.0, 2.5, 4.0], vec![1.0, 2.0, 3.5, 5.0]).unwrap();
        for (&x, &y) in t.times().iter().zip(t.values()) {
            assert_eq!(t.eval(x).unwrap(), y);
        }
        assert!((t.eval(3.2).unwrap() - 4.2).abs() < 1e-14);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let t = Table::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 0.1, 5.0, 5.1, 5.2]).unwrap();
        let mut prev = -1.0;
        for i in 0..=400 {
            let v = t.eval(i as f64 * 0.01).unwrap();
            assert!(v >= prev - 1e-15);
            assert!((0.0..=5.2).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_tables_and_out_of_range_queries() {
        assert!(Table::new(vec![0.0], vec![1.0]).is_err());
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(Table::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let t = Table::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(t.eval(-0.1), Err(Error::Interpolation(_))));
        assert!(matches!(t.eval(1.1), Err(Error::Interpolation(_))));
    }
}
