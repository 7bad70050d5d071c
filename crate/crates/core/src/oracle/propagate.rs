//! Numerical propagation of the Schrödinger equation on the truncated
//! Fock space.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::matrix::{hamiltonian_parts, Matrix, Tridiagonal};
use crate::error::{Error, Result};
use crate::protocol::{DriveProtocol, ModeSpec};
use crate::scalar::{cis, Real};

/// Per-step exponential integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// `exp(−i H(t + dt/2) dt)`: second order.
    Midpoint,
    /// Two-point Gauss–Legendre Magnus expansion: fourth order. The
    /// commutator of two Hamiltonians of this family is again tridiagonal.
    #[default]
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OracleConfig<T> {
    /// Fock truncation dimension.
    pub dim: usize,
    /// Time step; chosen from the fastest scale of the problem when absent.
    #[serde(default)]
    pub dt: Option<T>,
    /// Largest tolerated population in the top tenth of the levels.
    pub leak_tol: T,
    /// Largest tolerated initial-state mass left out of the basis.
    pub tail_tol: T,
    #[serde(default)]
    pub stepper: Stepper,
}

impl<T: Real> Default for OracleConfig<T> {
    fn default() -> Self {
        Self {
            dim: 128,
            dt: None,
            leak_tol: T::lit(1e-10),
            tail_tol: T::lit(1e-8),
            stepper: Stepper::Magnus4,
        }
    }
}

impl<T: Real> OracleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 8 {
            return Err(Error::domain(format!("Fock dimension {} must be ≥ 8", self.dim)));
        }
        if let Some(dt) = self.dt {
            if !(dt > T::zero()) {
                return Err(Error::domain("oracle time step must be > 0"));
            }
        }
        Ok(())
    }

    /// First level of the top tenth, whose population counts as leak.
    pub fn leak_start(&self) -> usize {
        self.dim - (self.dim / 10).max(1)
    }
}

/// Propagated columns of `U(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult<T> {
    pub dim: usize,
    /// Initial Fock levels, one per column of `u`.
    pub columns: Vec<usize>,
    /// `u[:, c] = U(t)|columns[c]⟩`.
    pub u: Matrix<T>,
    /// `‖U†U − I‖_F` over the propagated columns.
    pub unitarity_defect: T,
    /// Top-tenth population of each propagated column.
    pub leak: Vec<T>,
    pub steps: usize,
}

impl<T: Real> PropagationResult<T> {
    pub fn max_leak(&self) -> T {
        self.leak.iter().fold(T::zero(), |m, &x| m.max(x))
    }

    /// Position of the column holding `U|level⟩`.
    pub fn column_of(&self, level: usize) -> Option<usize> {
        self.columns.iter().position(|&c| c == level)
    }
}

/// Default step: 160 samples per period of the fastest rate, and at least
/// 40 steps across each drive feature.
pub fn default_dt<T: Real>(mode: &ModeSpec<T>, protocol: &DriveProtocol<T>) -> T {
    let rate = mode
        .frequency
        .max_omega()
        .max(mode.coupling.norm() * protocol.max_amplitude());
    let mut dt = T::TAU() / (T::lit(160.0) * rate);
    for s in [protocol.time_scale(), mode.frequency.time_scale()].into_iter().flatten() {
        if s > T::zero() {
            dt = dt.min(s / T::lit(4.0));
        }
    }
    if protocol.tau > T::zero() {
        dt = dt.min(protocol.tau / T::lit(40.0));
    }
    dt
}

/// Segment edges of the time grid: 0, τ, kinks of ω and g, and `t`.
fn time_edges<T: Real>(mode: &ModeSpec<T>, protocol: &DriveProtocol<T>, t: T) -> Vec<T> {
    let mut e = vec![T::zero(), t];
    if protocol.tau > T::zero() && protocol.tau < t {
        e.push(protocol.tau);
    }
    e.extend(mode.frequency.breakpoints());
    e.extend(protocol.breakpoints());
    e.retain(|&x| x >= T::zero() && x <= t);
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e.dedup_by(|b, a| (*b - *a).abs() <= t * T::epsilon() * T::lit(16.0));
    if let Some(last) = e.last_mut() {
        *last = t;
    }
    e
}

/// Coefficients `c_k` of `e^{−irx} = Σ c_k T_k(x)`.
fn chebyshev_coefficients<T: Real>(r: T) -> Vec<Complex<T>> {
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let j = if k == 0 { r.bessel_j0() } else { T::bessel_jn(k, r) };
        let weight = if k == 0 { T::one() } else { T::lit(2.0) };
        let rot = match k % 4 {
            0 => Complex::new(T::one(), T::zero()),
            1 => Complex::new(T::zero(), -T::one()),
            2 => Complex::new(-T::one(), T::zero()),
            _ => Complex::new(T::zero(), T::one()),
        };
        out.push(rot * (weight * j));
        if T::lit(k as f64) > r + T::one() && j.abs() < T::lit(1e-18) {
            break;
        }
        k += 1;
    }
    out
}

/// `exp(−iK) x` for each column of `block`, via a Chebyshev expansion
/// on the Gershgorin interval of `K`.
pub fn expm_action<T: Real>(k: &Tridiagonal<T>, block: &mut Matrix<T>) {
    let (lo, hi) = k.spectral_bounds();
    let center = (lo + hi) / T::lit(2.0);
    let radius = (hi - lo) / T::lit(2.0);
    let global = cis(-center);
    if radius <= T::min_positive_value() {
        for c in 0..block.cols() {
            for v in block.col_mut(c) {
                *v *= global;
            }
        }
        return;
    }
    let coeffs = chebyshev_coefficients(radius);
    let n = k.dim();
    let mut prev = vec![Complex::zero(); n];
    let mut cur = vec![Complex::zero(); n];
    let mut next = vec![Complex::zero(); n];
    let mut acc = vec![Complex::zero(); n];
    for c in 0..block.cols() {
        let x = block.col_mut(c);
        prev.copy_from_slice(x);
        k.apply_scaled(&prev, center, radius, &mut cur);
        for i in 0..n {
            acc[i] = prev[i] * coeffs[0] + cur[i] * coeffs[1];
        }
        for ck in &coeffs[2..] {
            k.apply_scaled(&cur, center, radius, &mut next);
            for i in 0..n {
                next[i] = next[i] * T::lit(2.0) - prev[i];
                acc[i] += next[i] * *ck;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        for i in 0..n {
            x[i] = acc[i] * global;
        }
    }
}

/// Exponent `K` (with `U_step = e^{−iK}`) for one step `[t0, t0 + dt]`.
fn step_generator<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    stepper: Stepper,
    t0: T,
    dt: T,
    dim: usize,
) -> Result<Tridiagonal<T>> {
    let sample = |t: T| -> Result<(T, T)> { Ok((mode.omega(t)?, protocol.evaluate_switching(t)?)) };
    match stepper {
        Stepper::Midpoint => {
            let (w, g) = sample(t0 + dt / T::lit(2.0))?;
            Ok(hamiltonian_parts(w * dt, g * dt, mode.coupling, dim))
        }
        Stepper::Magnus4 => {
            let off = T::lit(3f64.sqrt() / 6.0) * dt;
            let mid = t0 + dt / T::lit(2.0);
            let (w1, g1) = sample(mid - off)?;
            let (w2, g2) = sample(mid + off)?;
            let half = dt / T::lit(2.0);
            let mut k = hamiltonian_parts((w1 + w2) * half, (g1 + g2) * half, mode.coupling, dim);
            // −i(√3/12)dt²[H₂, H₁], with [N, B] having lower entries +B.
            let c = T::lit(3f64.sqrt() / 12.0) * dt * dt * (w2 * g1 - g2 * w1);
            for (n, l) in k.lower.iter_mut().enumerate() {
                let b = mode.coupling * T::lit((n + 1) as f64).sqrt();
                *l += Complex::new(T::zero(), -c) * b;
            }
            Ok(k)
        }
    }
}

/// Propagates the listed initial Fock levels to time `t`.
pub fn propagate_columns<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    t: T,
    cfg: &OracleConfig<T>,
    columns: &[usize],
) -> Result<PropagationResult<T>> {
    cfg.validate()?;
    if t < T::zero() {
        return Err(Error::domain(format!("propagation to t = {t} < 0")));
    }
    if let Some(&bad) = columns.iter().find(|&&c| c >= cfg.dim) {
        return Err(Error::domain(format!("level {bad} outside Fock dimension {}", cfg.dim)));
    }
    let dt_max = cfg.dt.unwrap_or_else(|| default_dt(mode, protocol));
    let mut u = Matrix::unit_columns(cfg.dim, columns);
    let mut steps = 0;
    let edges = time_edges(mode, protocol, t);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = ((b - a) / dt_max).ceil().to_usize().unwrap_or(1).max(1);
        let h = (b - a) / T::lit(m as f64);
        for j in 0..m {
            let t0 = a + h * T::lit(j as f64);
            let k = step_generator(mode, protocol, cfg.stepper, t0, h, cfg.dim)?;
            expm_action(&k, &mut u);
            steps += 1;
        }
    }
    let start = cfg.leak_start();
    let leak = (0..u.cols())
        .map(|c| u.col(c)[start..].iter().map(|z| z.norm_sqr()).sum::<T>())
        .collect();
    Ok(PropagationResult {
        dim: cfg.dim,
        columns: columns.to_vec(),
        unitarity_defect: u.unitarity_defect(),
        u,
        leak,
        steps,
    })
}

/// Full propagator `U(t)`; the leak check covers the lower half of the
/// basis, the block on which truncation effects are negligible.
pub fn propagate<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    t: T,
    cfg: &OracleConfig<T>,
) -> Result<PropagationResult<T>> {
    let cols: Vec<usize> = (0..cfg.dim).collect();
    let res = propagate_columns(mode, protocol, t, cfg, &cols)?;
    let worst = res.leak[..cfg.dim / 2].iter().fold(T::zero(), |m, &x| m.max(x));
    if worst > cfg.leak_tol {
        return Err(Error::Truncation(format!(
            "population {worst} reaches the top levels of a {}-level basis; increase dim",
            cfg.dim
        )));
    }
    Ok(res)
}
