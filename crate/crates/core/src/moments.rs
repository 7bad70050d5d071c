//! Work moments and cumulants, analytic and by finite differences of the
//! cumulant function `ln G(ν)`, and the Jarzynski free-energy check.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::charfunc::ln_char_thermal;
use crate::error::{Error, Result};
use crate::protocol::DriveFunctionals;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Analytic,
    FiniteDifference,
}

/// Mean, variance, third central moment and cumulants `C₁…C_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MomentReport<T> {
    pub mean: T,
    pub variance: T,
    /// Third central moment (equal to `C₃`).
    pub skewness: T,
    pub cumulants: Vec<T>,
    /// Error estimates for each cumulant (zero for analytic results).
    pub errors: Vec<T>,
    pub method: MomentMethod,
}

impl<T: Real> MomentReport<T> {
    fn from_cumulants(cumulants: Vec<T>, errors: Vec<T>, method: MomentMethod) -> Self {
        let get = |k: usize| cumulants.get(k).copied().unwrap_or_else(T::nan);
        Self {
            mean: get(0),
            variance: get(1),
            skewness: get(2),
            cumulants: cumulants.clone(),
            errors,
            method,
        }
    }
}

/// Ground-state work cumulants of a set of modes: per mode `C₁ = zω_t +
/// Δ/2 − ω_t|α|²` and `C_k = z ω_t^k` for `k ≥ 2`.
pub fn moments_zero_t<T: Real>(funs: &[DriveFunctionals<T>]) -> MomentReport<T> {
    let mut c = vec![T::zero(); 4];
    for f in funs {
        let (z, w) = (f.rapidity, f.omega_final);
        c[0] += z * w + f.delta / T::lit(2.0) - w * f.alpha.norm_sqr();
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            *ck += z * w.powi(k as i32 + 1);
        }
    }
    MomentReport::from_cumulants(c, vec![T::zero(); 4], MomentMethod::Analytic)
}

/// Acceptance thresholds for the finite-difference extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FdTolerance<T> {
    pub rel_tol: T,
    pub abs_tol: T,
}

impl<T: Real> Default for FdTolerance<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-7),
            abs_tol: T::lit(1e-10),
        }
    }
}

/// Cumulants extracted numerically, with Richardson error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FdCumulants<T> {
    pub values: Vec<T>,
    pub errors: Vec<T>,
    pub step: T,
}

impl<T: Real> FdCumulants<T> {
    pub fn report(&self) -> MomentReport<T> {
        MomentReport::from_cumulants(self.values.clone(), self.errors.clone(), MomentMethod::FiniteDifference)
    }
}

/// Default base step for derivatives of order `order`.
pub fn default_fd_step<T: Real>(order: usize, omega_max: T) -> T {
    T::lit(0.05) * T::lit(order.max(1) as f64).sqrt() / omega_max
}

/// Second-order central difference of order `k` from samples at
/// `−2h, −h, 0, h, 2h`.
fn central<T: Real>(k: usize, f: &[Complex<T>; 5], h: T) -> Complex<T> {
    let [m2, m1, z, p1, p2] = *f;
    match k {
        1 => (p1 - m1) / (T::lit(2.0) * h),
        2 => (p1 - z * T::lit(2.0) + m1) / (h * h),
        3 => (p2 - p1 * T::lit(2.0) + m1 * T::lit(2.0) - m2) / (T::lit(2.0) * h.powi(3)),
        4 => (p2 - p1 * T::lit(4.0) + z * T::lit(6.0) - m1 * T::lit(4.0) + m2) / h.powi(4),
        _ => unreachable!(),
    }
}

/// `(−i)^k`.
fn minus_i_pow<T: Real>(k: usize) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    }
}

/// Cumulants `C₁…C_order` from a handle returning `ln G(ν)`.
///
/// Each derivative uses central differences at steps `h, h/2, h/4`, two
/// Richardson estimates, and accepts when they agree to the tolerance.
pub fn cumulants_fd<T, F>(ln_cf: F, order: usize, step: T, tol: FdTolerance<T>) -> Result<FdCumulants<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    if !(1..=4).contains(&order) {
        return Err(Error::domain(format!("cumulant order {order} outside 1..=4")));
    }
    if !(step > T::zero()) {
        return Err(Error::domain("finite-difference step must be > 0"));
    }
    let f0 = ln_cf(Complex::zero())?;
    let sample = |h: T| -> Result<[Complex<T>; 5]> {
        let at = |x: T| ln_cf(Complex::new(x, T::zero()));
        Ok([at(-T::lit(2.0) * h)?, at(-h)?, f0, at(h)?, at(T::lit(2.0) * h)?])
    };
    let levels = [step, step / T::lit(2.0), step / T::lit(4.0)];
    let samples = levels.iter().map(|&h| sample(h)).collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(order);
    let mut errors = Vec::with_capacity(order);
    for k in 1..=order {
        let d: Vec<Complex<T>> = samples.iter().zip(&levels).map(|(s, &h)| central(k, s, h)).collect();
        let r1 = (d[1] * T::lit(4.0) - d[0]) / T::lit(3.0);
        let r2 = (d[2] * T::lit(4.0) - d[1]) / T::lit(3.0);
        let best = r2 + (r2 - r1) / T::lit(15.0);
        let err = (r2 - r1).norm() / T::lit(15.0);
        let value = (minus_i_pow::<T>(k) * best).re;
        if err > tol.rel_tol * value.abs() + tol.abs_tol {
            return Err(Error::precision(
                format!("cumulant C{k}: Richardson estimates disagree by {err} (value {value}, step {step})"),
                format!("retry with step ≈ {}", step / T::lit(2.0)),
            ));
        }
        values.push(value);
        errors.push(err);
    }
    Ok(FdCumulants { values, errors, step })
}

/// Wraps a handle returning `G(ν)` into one returning the principal
/// `ln G`, rejecting stencils on which `G` winds around the origin.
pub fn principal_log<T, F>(cf: F, step: T) -> Result<impl Fn(Complex<T>) -> Result<Complex<T>>>
where
    T: Real,
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    let mut prev: Option<T> = None;
    for j in -8i32..=8 {
        let nu = Complex::new(step * T::lit(j as f64) / T::lit(4.0), T::zero());
        let arg = cf(nu)?.arg();
        if let Some(p) = prev {
            if (arg - p).abs() > T::FRAC_PI_2() {
                return Err(Error::precision(
                    "characteristic function winds within the difference stencil",
                    "use a smaller step",
                ));
            }
        }
        prev = Some(arg);
    }
    Ok(move |nu: Complex<T>| cf(nu).map(|g| g.ln()))
}

/// Both sides of `⟨e^{−βW}⟩ = Z(t)/Z(0)` for thermal initial states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct JarzynskiCheck<T> {
    /// `⟨e^{−βW}⟩ = G(iβ)`.
    pub lhs: T,
    /// `Z(t)/Z(0)`.
    pub partition_ratio: T,
    /// `−ln(lhs)/β`.
    pub delta_f: T,
    /// `−ln(Z(t)/Z(0))/β`.
    pub delta_f_partition: T,
    pub difference: T,
    /// Per-mode free-energy differences from the partition functions.
    pub per_mode_delta_f: Vec<T>,
}

/// `ln sinh x` for `x > 0` without overflow.
fn ln_sinh<T: Real>(x: T) -> T {
    x + (-(-T::lit(2.0) * x).exp()).ln_1p() - T::LN_2()
}

/// Free energy change `−ln(Z(ω_t)/Z(ω₀))/β` of one oscillator.
pub fn oscillator_delta_f<T: Real>(omega_0: T, omega_t: T, beta: T) -> T {
    let half = beta / T::lit(2.0);
    (ln_sinh(half * omega_t) - ln_sinh(half * omega_0)) / beta
}

/// Evaluates both sides of the Jarzynski equality after the drive has
/// switched off (`α = 0` for every mode).
pub fn jarzynski<T: Real>(funs: &[DriveFunctionals<T>], beta: T) -> Result<JarzynskiCheck<T>> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::domain(format!("β = {beta} must be finite and > 0")));
    }
    let nu = Complex::new(T::zero(), beta);
    let mut ln_lhs = T::zero();
    let mut ln_ratio = T::zero();
    let mut per_mode = Vec::with_capacity(funs.len());
    for f in funs {
        if f.alpha != Complex::zero() {
            return Err(Error::domain(format!(
                "Jarzynski check needs the source switched off (α = {} at t = {})",
                f.alpha, f.t
            )));
        }
        ln_lhs += ln_char_thermal(f, beta, nu)?.re;
        let df = oscillator_delta_f(f.omega_initial, f.omega_final, beta);
        ln_ratio += -beta * df;
        per_mode.push(df);
    }
    let lhs = ln_lhs.exp();
    let ratio = ln_ratio.exp();
    Ok(JarzynskiCheck {
        lhs,
        partition_ratio: ratio,
        delta_f: -ln_lhs / beta,
        delta_f_partition: -ln_ratio / beta,
        difference: lhs - ratio,
        per_mode_delta_f: per_mode,
    })
}
