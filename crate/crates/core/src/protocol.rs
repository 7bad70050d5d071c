//! Drive protocols, mode specifications and the per-mode drive functionals
//! `ζ, ξ, α, η, Δ, θ` and the rapidity `z = |η|²`.
//!
//! Units: `ħ = 1`; frequencies are angular, couplings carry units of
//! frequency, and every functional other than `Δ` is dimensionless.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::Table;
use crate::scalar::{cis, imag, Real};

/// Ramped frequencies are clipped from below at this fraction of `ω(0)`.
pub const OMEGA_MIN_FRACTION: f64 = 1e-6;

/// Shape of the switching function `g(t)` on `[0, τ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum Switching<T> {
    Constant {
        amplitude: T,
    },
    /// Gaussian of standard deviation `width`; centred at `τ/2` unless given.
    Gaussian {
        amplitude: T,
        #[serde(default)]
        center: Option<T>,
        width: T,
    },
    /// `A (1 − cos 2πt/τ) / 2`, vanishing with zero slope at both ends.
    RaisedCosine {
        amplitude: T,
    },
    /// `A sin(Ω t + φ)` with angular frequency `Ω`.
    Sinusoid {
        amplitude: T,
        frequency: T,
        #[serde(default)]
        phase: T,
    },
    Tabulated {
        samples: Table<T>,
    },
}

/// Switching function together with its horizon: `G(t) = g(t)` on
/// `[0, τ]` and `0` afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DriveProtocol<T> {
    pub switching: Switching<T>,
    pub tau: T,
}

impl<T: Real> DriveProtocol<T> {
    pub fn new(switching: Switching<T>, tau: T) -> Result<Self> {
        let p = Self { switching, tau };
        p.validate()?;
        Ok(p)
    }

    /// A protocol that never couples the source (`G ≡ 0`).
    pub fn off() -> Self {
        Self {
            switching: Switching::Constant {
                amplitude: T::zero(),
            },
            tau: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= T::zero()) || !self.tau.is_finite() {
            return Err(Error::domain(format!("drive duration τ = {} must be finite and ≥ 0", self.tau)));
        }
        match &self.switching {
            Switching::Gaussian { width, .. } if !(*width > T::zero()) => {
                Err(Error::domain("gaussian switching width must be > 0"))
            }
            Switching::Tabulated { samples } => {
                if samples.first_time() > T::zero() || samples.last_time() < self.tau {
                    Err(Error::Interpolation(format!(
                        "tabulated switching covers [{}, {}] but must cover [0, {}]",
                        samples.first_time(),
                        samples.last_time(),
                        self.tau
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// `G(t)`.
    pub fn evaluate_switching(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::domain(format!("switching queried at t = {t} < 0")));
        }
        if t > self.tau {
            return Ok(T::zero());
        }
        Ok(match &self.switching {
            Switching::Constant { amplitude } => *amplitude,
            Switching::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let c = center.unwrap_or(self.tau / T::lit(2.0));
                let u = (t - c) / *width;
                *amplitude * (-u * u / T::lit(2.0)).exp()
            }
            Switching::RaisedCosine { amplitude } => {
                if self.tau == T::zero() {
                    T::zero()
                } else {
                    *amplitude * (T::one() - (T::TAU() * t / self.tau).cos()) / T::lit(2.0)
                }
            }
            Switching::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => *amplitude * (*frequency * t + *phase).sin(),
            Switching::Tabulated { samples } => samples.eval(t)?,
        })
    }

    /// Shortest time scale of `g`, used to size quadrature and time steps.
    pub fn time_scale(&self) -> Option<T> {
        match &self.switching {
            Switching::Constant { .. } => None,
            Switching::Gaussian { width, .. } => Some(*width),
            Switching::RaisedCosine { .. } => Some(self.tau / T::TAU()),
            Switching::Sinusoid { frequency, .. } => {
                if *frequency == T::zero() {
                    None
                } else {
                    Some(T::one() / frequency.abs())
                }
            }
            Switching::Tabulated { samples } => min_spacing(samples.times()),
        }
    }

    /// Upper bound on `|g|` over `[0, τ]`.
    pub fn max_amplitude(&self) -> T {
        match &self.switching {
            Switching::Constant { amplitude }
            | Switching::Gaussian { amplitude, .. }
            | Switching::RaisedCosine { amplitude }
            | Switching::Sinusoid { amplitude, .. } => amplitude.abs(),
            Switching::Tabulated { samples } => samples
                .values()
                .iter()
                .fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }

    /// Interior points in `(0, τ)` where `g` is only piecewise smooth.
    pub fn breakpoints(&self) -> Vec<T> {
        match &self.switching {
            Switching::Tabulated { samples } => samples
                .times()
                .iter()
                .copied()
                .filter(|&x| x > T::zero() && x < self.tau)
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Time dependence of a mode frequency `ω_k(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum FrequencyProfile<T> {
    Constant {
        omega: T,
    },
    /// Linear interpolation from `start` to `end` over `[0, duration]`, then
    /// held at `end`.
    LinearRamp {
        start: T,
        end: T,
        duration: T,
    },
    /// Smooth step from `start` (at `t = 0`) towards `end` (as `t → ∞`),
    /// centred at `center` with width `width`.
    TanhRamp {
        start: T,
        end: T,
        center: T,
        width: T,
    },
    Tabulated {
        samples: Table<T>,
    },
}

impl<T: Real> FrequencyProfile<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            FrequencyProfile::Constant { omega } if !(*omega > T::zero()) => {
                Err(Error::model(format!("frequency {omega} must be > 0")))
            }
            FrequencyProfile::LinearRamp { start, duration, .. } => {
                if !(*start > T::zero()) {
                    Err(Error::model(format!("ramp start frequency {start} must be > 0")))
                } else if !(*duration > T::zero()) {
                    Err(Error::domain("ramp duration must be > 0"))
                } else {
                    Ok(())
                }
            }
            FrequencyProfile::TanhRamp { start, width, .. } => {
                if !(*start > T::zero()) {
                    Err(Error::model(format!("ramp start frequency {start} must be > 0")))
                } else if !(*width > T::zero()) {
                    Err(Error::domain("tanh ramp width must be > 0"))
                } else {
                    Ok(())
                }
            }
            FrequencyProfile::Tabulated { samples } => {
                if samples.first_time() > T::zero() {
                    return Err(Error::Interpolation("tabulated frequency must start at t = 0".into()));
                }
                if let Some(v) = samples.values().iter().find(|v| !(**v > T::zero())) {
                    return Err(Error::model(format!("tabulated frequency sample {v} is not > 0")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn initial(&self) -> T {
        match self {
            FrequencyProfile::Constant { omega } => *omega,
            FrequencyProfile::LinearRamp { start, .. } | FrequencyProfile::TanhRamp { start, .. } => *start,
            FrequencyProfile::Tabulated { samples } => samples.values()[0],
        }
    }

    fn omega_min(&self) -> T {
        T::lit(OMEGA_MIN_FRACTION) * self.initial()
    }

    fn tanh_unclipped(start: T, end: T, center: T, width: T, t: T) -> T {
        let s0 = (-center / width).tanh();
        let s = ((t - center) / width).tanh();
        start + (end - start) * (s - s0) / (T::one() - s0)
    }

    /// `ω(t)`; fails for `t < 0`, outside a tabulated range, or when the
    /// frequency is not strictly positive.
    pub fn eval(&self, t: T) -> Result<T> {
        if t < T::zero() || t.is_nan() {
            return Err(Error::domain(format!("frequency queried at t = {t} < 0")));
        }
        let w = match self {
            FrequencyProfile::Constant { omega } => *omega,
            FrequencyProfile::LinearRamp { start, end, duration } => {
                let s = (t / *duration).min(T::one());
                (*start + (*end - *start) * s).max(self.omega_min())
            }
            FrequencyProfile::TanhRamp {
                start,
                end,
                center,
                width,
            } => Self::tanh_unclipped(*start, *end, *center, *width, t).max(self.omega_min()),
            FrequencyProfile::Tabulated { samples } => samples.eval(t)?,
        };
        if !(w > T::zero()) || !w.is_finite() {
            return Err(Error::model(format!("non-positive frequency ω({t}) = {w}")));
        }
        Ok(w)
    }

    /// Upper bound of `ω` over all times.
    pub fn max_omega(&self) -> T {
        match self {
            FrequencyProfile::Constant { omega } => *omega,
            FrequencyProfile::LinearRamp { start, end, .. } | FrequencyProfile::TanhRamp { start, end, .. } => {
                start.max(*end)
            }
            FrequencyProfile::Tabulated { samples } => samples
                .values()
                .iter()
                .fold(T::zero(), |m, v| m.max(*v)),
        }
    }

    pub fn time_scale(&self) -> Option<T> {
        match self {
            FrequencyProfile::Constant { .. } => None,
            FrequencyProfile::LinearRamp { duration, .. } => Some(*duration),
            FrequencyProfile::TanhRamp { width, .. } => Some(*width),
            FrequencyProfile::Tabulated { samples } => min_spacing(samples.times()),
        }
    }

    /// Interior kinks of `ω(t)`: the end of a linear ramp, the time a ramp
    /// hits the clip, and the knots of a table.
    pub fn breakpoints(&self) -> Vec<T> {
        match self {
            FrequencyProfile::Constant { .. } => Vec::new(),
            FrequencyProfile::LinearRamp { start, end, duration } => {
                let mut v = vec![*duration];
                let wmin = self.omega_min();
                if *end < wmin {
                    v.push(*duration * (wmin - *start) / (*end - *start));
                }
                v
            }
            FrequencyProfile::TanhRamp {
                start,
                end,
                center,
                width,
            } => {
                let wmin = self.omega_min();
                if *end >= wmin {
                    return Vec::new();
                }
                // Bisect for the clip crossing; the unclipped ramp is monotone.
                let f = |t: T| Self::tanh_unclipped(*start, *end, *center, *width, t) - wmin;
                let mut lo = T::zero();
                let mut hi = center.max(T::zero()) + *width;
                while f(hi) > T::zero() {
                    hi = hi * T::lit(2.0) + *width;
                }
                for _ in 0..200 {
                    let mid = (lo + hi) / T::lit(2.0);
                    if f(mid) > T::zero() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                vec![(lo + hi) / T::lit(2.0)]
            }
            FrequencyProfile::Tabulated { samples } => samples.times()[1..].to_vec(),
        }
    }

    /// Closed-form `∫₀ᵗ ω`, available for constant frequencies.
    fn exact_phase(&self, t: T) -> Option<T> {
        match self {
            FrequencyProfile::Constant { omega } => Some(*omega * t),
            _ => None,
        }
    }
}

fn min_spacing<T: Real>(times: &[T]) -> Option<T> {
    times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(None, |m: Option<T>, h| Some(m.map_or(h, |m| m.min(h))))
}

/// One bosonic mode: an opaque label, its frequency profile and its source
/// coupling `F(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModeSpec<T> {
    pub label: String,
    pub frequency: FrequencyProfile<T>,
    pub coupling: Complex<T>,
}

impl<T: Real> ModeSpec<T> {
    pub fn new(label: impl Into<String>, frequency: FrequencyProfile<T>, coupling: Complex<T>) -> Result<Self> {
        frequency.validate()?;
        if !coupling.re.is_finite() || !coupling.im.is_finite() {
            return Err(Error::domain("coupling must be finite"));
        }
        Ok(Self {
            label: label.into(),
            frequency,
            coupling,
        })
    }

    /// A mode with constant frequency.
    pub fn fixed(label: impl Into<String>, omega: T, coupling: Complex<T>) -> Result<Self> {
        Self::new(label, FrequencyProfile::Constant { omega }, coupling)
    }

    pub fn omega(&self, t: T) -> Result<T> {
        self.frequency.eval(t)
    }
}

/// Controls the adaptive quadrature behind [`compute_functionals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QuadratureConfig<T> {
    /// Successive refinements must agree to this relative tolerance.
    pub rel_tol: T,
    /// Absolute floor under the relative tolerance (for values near zero).
    pub abs_tol: T,
    /// Overrides the automatic initial step.
    #[serde(default)]
    pub initial_step: Option<T>,
    pub max_refinements: u32,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::default_tolerance(),
            abs_tol: T::default_tolerance() * T::lit(1e-4),
            initial_step: None,
            max_refinements: 14,
        }
    }
}

/// Per-mode drive functionals evaluated at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DriveFunctionals<T> {
    pub t: T,
    /// `ω(0)`.
    pub omega_initial: T,
    /// `ω(t)`.
    pub omega_final: T,
    /// `G(t)`.
    pub switching: T,
    /// `ζ(t) = ∫₀ᵗ ω`.
    pub zeta: T,
    /// `ξ(t) = iF ∫₀ᵗ e^{iζ} G`.
    pub xi: Complex<T>,
    /// `α(t) = −G(t) F / ω(t)`.
    pub alpha: Complex<T>,
    /// `η(t) = ξ(t) + α(t) e^{iζ(t)}`.
    pub eta: Complex<T>,
    /// `Δ(t) = ω(t) − ω(0)`.
    pub delta: T,
    /// Global phase `θ(t)` of the propagator.
    pub theta: T,
    /// `z = |η|²`.
    pub rapidity: T,
    /// Number of quadrature intervals used at the accepted refinement level.
    pub intervals: usize,
}

impl<T: Real> DriveFunctionals<T> {
    /// Assembles the derived quantities from the primitive integrals.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        t: T,
        omega_initial: T,
        omega_final: T,
        switching: T,
        coupling: Complex<T>,
        zeta: T,
        xi: Complex<T>,
        theta: T,
    ) -> Self {
        let alpha = coupling * (-switching / omega_final);
        let eta = xi + alpha * cis(zeta);
        Self {
            t,
            omega_initial,
            omega_final,
            switching,
            zeta,
            xi,
            alpha,
            eta,
            delta: omega_final - omega_initial,
            theta,
            rapidity: eta.norm_sqr(),
            intervals: 0,
        }
    }

    /// Functionals of an undriven mode whose frequency moves from
    /// `omega_initial` to `omega_final`.
    pub fn undriven(omega_initial: T, omega_final: T) -> Self {
        Self::from_parts(
            T::zero(),
            omega_initial,
            omega_final,
            T::zero(),
            Complex::zero(),
            T::zero(),
            Complex::zero(),
            T::zero(),
        )
    }
}

/// A piecewise-uniform grid on `[0, t]` refined per segment.
struct Grid<T> {
    nodes: Vec<T>,
    /// Node-index ranges `[start, end]` (inclusive) of each uniform segment.
    segments: Vec<(usize, usize)>,
}

impl<T: Real> Grid<T> {
    fn build(edges: &[T], step: T) -> Self {
        let mut nodes = vec![edges[0]];
        let mut segments = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut m = ((b - a) / step).ceil().to_usize().unwrap_or(4).max(4);
            if m % 2 == 1 {
                m += 1;
            }
            let start = nodes.len() - 1;
            let h = (b - a) / T::lit(m as f64);
            for j in 1..m {
                nodes.push(a + h * T::lit(j as f64));
            }
            nodes.push(b);
            segments.push((start, start + m));
        }
        Self { nodes, segments }
    }

    fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Cumulative integral on a uniform segment using a four-point (cubic)
/// rule; `out[j] = out[0] + ∫ from node 0 to node j`.
fn cumulate<T, V>(y: &[V], h: T, offset: V, out: &mut Vec<V>)
where
    T: Real,
    V: Copy + Add<Output = V> + Sub<Output = V> + Mul<T, Output = V>,
{
    let m = y.len() - 1;
    let c = h / T::lit(24.0);
    let mut acc = offset;
    for k in 0..m {
        let piece = if k == 0 {
            y[0] * T::lit(9.0) + y[1] * T::lit(19.0) - y[2] * T::lit(5.0) + y[3]
        } else if k == m - 1 {
            y[m - 3] - y[m - 2] * T::lit(5.0) + y[m - 1] * T::lit(19.0) + y[m] * T::lit(9.0)
        } else {
            (y[k] + y[k + 1]) * T::lit(13.0) - y[k - 1] - y[k + 2]
        };
        acc = acc + piece * c;
        out.push(acc);
    }
}

/// Composite Simpson over a uniform segment with an even interval count.
fn simpson<T: Real>(y: &[T], h: T) -> T {
    let m = y.len() - 1;
    let mut s = y[0] + y[m];
    for (j, v) in y.iter().enumerate().take(m).skip(1) {
        s += *v * if j % 2 == 1 { T::lit(4.0) } else { T::lit(2.0) };
    }
    s * h / T::lit(3.0)
}

struct Primitives<T> {
    zeta: T,
    xi_integral: Complex<T>,
    theta_integral: T,
}

fn integrate_on<T: Real>(
    grid: &Grid<T>,
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    t_drive: T,
) -> Result<Primitives<T>> {
    let n = grid.nodes.len();
    let mut omega = Vec::with_capacity(n);
    for &x in &grid.nodes {
        omega.push(mode.omega(x)?);
    }
    // ζ at every node.
    let mut zeta = Vec::with_capacity(n);
    zeta.push(T::zero());
    for &(a, b) in &grid.segments {
        match mode.frequency.exact_phase(grid.nodes[b]) {
            Some(_) => {
                for j in a + 1..=b {
                    zeta.push(mode.frequency.exact_phase(grid.nodes[j]).unwrap());
                }
            }
            None => {
                let h = (grid.nodes[b] - grid.nodes[a]) / T::lit((b - a) as f64);
                let offset = zeta[a];
                cumulate(&omega[a..=b], h, offset, &mut zeta);
            }
        }
    }

    // Source integrals only run over [0, min(t, τ)], which is a segment edge.
    let mut xi_integral = Complex::zero();
    let mut theta_integral = T::zero();
    let mut running: Vec<Complex<T>> = vec![Complex::zero()];
    for &(a, b) in &grid.segments {
        if grid.nodes[b] > t_drive {
            break;
        }
        let h = (grid.nodes[b] - grid.nodes[a]) / T::lit((b - a) as f64);
        let mut g = Vec::with_capacity(b - a + 1);
        for j in a..=b {
            g.push(protocol.evaluate_switching(grid.nodes[j])?);
        }
        let f: Vec<Complex<T>> = (a..=b).map(|j| cis(zeta[j]) * g[j - a]).collect();
        let offset = running[a];
        cumulate(&f, h, offset, &mut running);
        xi_integral = running[b];
        // θ integrand: G(t') Im[e^{iζ(t')} conj(∫₀^{t'} G e^{iζ})].
        let phi: Vec<T> = (a..=b)
            .map(|j| g[j - a] * (cis(zeta[j]) * running[j].conj()).im)
            .collect();
        theta_integral += simpson(&phi, h);
    }

    Ok(Primitives {
        zeta: zeta[n - 1],
        xi_integral,
        theta_integral,
    })
}

fn segment_edges<T: Real>(mode: &ModeSpec<T>, protocol: &DriveProtocol<T>, t: T, t_drive: T) -> Vec<T> {
    let mut edges = vec![T::zero(), t];
    if t_drive > T::zero() {
        edges.push(t_drive);
    }
    edges.extend(mode.frequency.breakpoints());
    edges.extend(protocol.breakpoints());
    edges.retain(|&x| x >= T::zero() && x <= t);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let tiny = t * T::epsilon() * T::lit(16.0);
    edges.dedup_by(|b, a| (*b - *a).abs() <= tiny);
    // Merging may have displaced t or t_drive by a few ulps; pin them back.
    if let Some(last) = edges.last_mut() {
        *last = t;
    }
    for e in edges.iter_mut() {
        if (*e - t_drive).abs() <= tiny {
            *e = t_drive;
        }
    }
    edges
}

/// Default initial quadrature step: resolves the fastest oscillation and
/// the shortest feature of the drive.
pub fn default_step<T: Real>(mode: &ModeSpec<T>, protocol: &DriveProtocol<T>, t: T) -> T {
    let mut h = T::one() / (T::lit(10.0) * mode.frequency.max_omega());
    if protocol.tau > T::zero() {
        h = h.min(protocol.tau / T::lit(200.0));
    }
    for s in [protocol.time_scale(), mode.frequency.time_scale()].into_iter().flatten() {
        if s > T::zero() {
            h = h.min(s / T::lit(10.0));
        }
    }
    if t > T::zero() {
        h = h.min(t / T::lit(8.0));
    }
    h
}

/// Computes the drive functionals of `mode` under `protocol` at time `t`.
///
/// `ζ`, `ξ` and `θ` are integrated on a piecewise-uniform grid (uniform
/// between kinks of `ω` and `g`) with a fourth-order cumulative rule for the
/// running integrals and Simpson's rule for `θ`; the grid is halved until
/// successive levels agree to `quad.rel_tol`.
pub fn compute_functionals<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    t: T,
    quad: &QuadratureConfig<T>,
) -> Result<DriveFunctionals<T>> {
    if t < T::zero() || !t.is_finite() {
        return Err(Error::domain(format!("functionals requested at t = {t} < 0")));
    }
    mode.frequency.validate()?;
    protocol.validate()?;
    let omega_initial = mode.omega(T::zero())?;
    let omega_final = mode.omega(t)?;
    let g_now = protocol.evaluate_switching(t)?;
    let f = mode.coupling;
    if t == T::zero() {
        let mut out =
            DriveFunctionals::from_parts(t, omega_initial, omega_final, g_now, f, T::zero(), Complex::zero(), T::zero());
        out.intervals = 0;
        return Ok(out);
    }

    let t_drive = t.min(protocol.tau);
    let edges = segment_edges(mode, protocol, t, t_drive);
    let mut step = quad.initial_step.unwrap_or_else(|| default_step(mode, protocol, t));
    let close = |a: T, b: T| (a - b).abs() <= quad.rel_tol * a.abs().max(b.abs()) + quad.abs_tol;

    let mut grid = Grid::build(&edges, step);
    let mut prev = integrate_on(&grid, mode, protocol, t_drive)?;
    for _ in 0..quad.max_refinements {
        step /= T::lit(2.0);
        grid = Grid::build(&edges, step);
        let cur = integrate_on(&grid, mode, protocol, t_drive)?;
        let converged = close(cur.zeta, prev.zeta)
            && close(cur.xi_integral.re, prev.xi_integral.re)
            && close(cur.xi_integral.im, prev.xi_integral.im)
            && close(
                cur.theta_integral * f.norm_sqr(),
                prev.theta_integral * f.norm_sqr(),
            )
            // Compare ξ on its own scale as well, so a tiny ξ converges too.
            && (cur.xi_integral - prev.xi_integral).norm()
                <= quad.rel_tol * cur.xi_integral.norm().max(T::one()) + quad.abs_tol;
        prev = cur;
        if converged {
            let xi = imag(T::one()) * f * prev.xi_integral;
            let theta = f.norm_sqr() * prev.theta_integral;
            let mut out =
                DriveFunctionals::from_parts(t, omega_initial, omega_final, g_now, f, prev.zeta, xi, theta);
            out.intervals = grid.intervals();
            return Ok(out);
        }
    }
    Err(Error::precision(
        format!(
            "drive functionals did not reach relative tolerance {} after {} refinements",
            quad.rel_tol, quad.max_refinements
        ),
        "raise max_refinements or loosen rel_tol",
    ))
}

/// Functionals for every mode at a common time.
pub fn compute_all<T: Real>(
    modes: &[ModeSpec<T>],
    protocol: &DriveProtocol<T>,
    t: T,
    quad: &QuadratureConfig<T>,
) -> Result<Vec<DriveFunctionals<T>>> {
    modes.iter().map(|m| compute_functionals(m, protocol, t, quad)).collect()
}
