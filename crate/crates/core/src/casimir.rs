//! Regularised zero-point energies of a cavity between perfect mirrors and
//! the free-energy change when the mirror separation changes.
//!
//! Units: `ħ = c = 1`. Mode sums are damped by `e^{−λω}`, the divergent
//! powers of `1/λ` are removed in closed form, and the remainder is
//! extrapolated to `λ → 0` in powers of `λ²`.

use serde::{Deserialize, Serialize};

use crate::charfunc::ln_char_boundary;
use crate::error::{Error, Result};
use crate::scalar::{Compensated, Real};
use crate::special::polylog_exp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Scalar field on `[0, d]` with Dirichlet ends: `ω_n = nπ/d`.
    Interval1d,
    /// Electromagnetic field between parallel plates, per unit area.
    Plates3d,
}

/// Damped mode sums must reach `λ ω_N ≥` this before truncation.
pub const CUTOFF_DECAY: f64 = 50.0;

/// Relative disagreement of the last two extrapolants that is accepted.
pub const EXTRAPOLATION_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CavitySpec<T> {
    pub geometry: Geometry,
    pub separation: T,
    /// Largest regulator of the extrapolation sequence `λ, λ/2, λ/4, …`.
    pub regulator: T,
    /// Largest number of modes a damped sum may use.
    pub mode_cutoff: usize,
    /// Number of regulator values in the extrapolation.
    pub levels: usize,
}

impl<T: Real> CavitySpec<T> {
    /// Defaults: `λ = d/5`, five regulator levels, at most 10⁶ modes.
    pub fn new(geometry: Geometry, separation: T) -> Result<Self> {
        let c = Self {
            geometry,
            separation,
            regulator: separation / T::lit(5.0),
            mode_cutoff: 1_000_000,
            levels: 5,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.separation > T::zero()) || !self.separation.is_finite() {
            return Err(Error::domain(format!("separation {} must be > 0", self.separation)));
        }
        if !(self.regulator > T::zero()) {
            return Err(Error::domain(format!("regulator {} must be > 0", self.regulator)));
        }
        if self.mode_cutoff < 100 {
            return Err(Error::domain(format!("mode cutoff {} must be ≥ 100", self.mode_cutoff)));
        }
        if self.levels < 2 {
            return Err(Error::domain("need at least two regulator levels"));
        }
        Ok(())
    }

    pub fn with_separation(&self, separation: T) -> Result<Self> {
        let c = Self {
            separation,
            regulator: self.regulator * separation / self.separation,
            ..*self
        };
        c.validate()?;
        Ok(c)
    }

    /// `ω_n = nπ/d`.
    pub fn mode_frequency(&self, n: usize) -> T {
        T::lit(n as f64) * T::PI() / self.separation
    }

    fn modes_needed(&self, lambda: T) -> Result<usize> {
        let n = (T::lit(CUTOFF_DECAY) * self.separation / (T::PI() * lambda)).ceil();
        let n = n.to_usize().unwrap_or(usize::MAX);
        if n > self.mode_cutoff {
            return Err(Error::precision(
                format!("regulator {lambda} needs {n} modes, above the cutoff {}", self.mode_cutoff),
                "raise mode_cutoff or use fewer regulator levels",
            ));
        }
        Ok(n)
    }
}

/// Exact regularised energies: `−π/(24d)` and `−π²/(720d³)` per area.
pub fn exact_energy<T: Real>(geometry: Geometry, d: T) -> T {
    match geometry {
        Geometry::Interval1d => -T::PI() / (T::lit(24.0) * d),
        Geometry::Plates3d => -T::PI() * T::PI() / (T::lit(720.0) * d.powi(3)),
    }
}

/// Damped energy minus its divergent part at one regulator value.
pub fn regulated_residual<T: Real>(cavity: &CavitySpec<T>, lambda: T) -> Result<T> {
    let d = cavity.separation;
    let n_max = cavity.modes_needed(lambda)?;
    let mut acc = Compensated::new();
    match cavity.geometry {
        Geometry::Interval1d => {
            for n in 1..=n_max {
                let w = cavity.mode_frequency(n);
                acc.add(w / T::lit(2.0) * (-lambda * w).exp());
            }
            Ok(acc.value() - d / (T::TAU() * lambda * lambda))
        }
        Geometry::Plates3d => {
            // Transverse integral per mode: e^{−λκ}(κ²/λ + 2κ/λ² + 2/λ³) / 4π.
            let g = |k: T| (-lambda * k).exp() * (k * k / lambda + T::lit(2.0) * k / (lambda * lambda) + T::lit(2.0) / lambda.powi(3));
            acc.add(g(T::zero()));
            for n in 1..=n_max {
                acc.add(T::lit(2.0) * g(cavity.mode_frequency(n)));
            }
            let volume = T::lit(3.0) * d / (T::PI() * T::PI() * lambda.powi(4));
            Ok(acc.value() / (T::lit(4.0) * T::PI()) - volume)
        }
    }
}

/// Regularised zero-point energy with its extrapolation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CasimirResult<T> {
    pub geometry: Geometry,
    pub separation: T,
    pub energy: T,
    pub error_estimate: T,
    pub regulators: Vec<T>,
    pub residuals: Vec<T>,
}

impl<T: Real> CasimirResult<T> {
    /// `E·d` (interval) or `E·d³/A` (plates).
    pub fn coefficient(&self) -> T {
        match self.geometry {
            Geometry::Interval1d => self.energy * self.separation,
            Geometry::Plates3d => self.energy * self.separation.powi(3),
        }
    }
}

/// Zero-point energy `Σ ω/2` of the cavity, regularised and extrapolated.
pub fn regularized_energy<T: Real>(cavity: &CavitySpec<T>) -> Result<CasimirResult<T>> {
    cavity.validate()?;
    let mut regulators = Vec::with_capacity(cavity.levels);
    let mut residuals = Vec::with_capacity(cavity.levels);
    let mut lambda = cavity.regulator;
    for _ in 0..cavity.levels {
        regulators.push(lambda);
        residuals.push(regulated_residual(cavity, lambda)?);
        lambda /= T::lit(2.0);
    }
    // Neville table in λ² with ratio 4 between successive regulators.
    let mut table = residuals.clone();
    let mut diagonal = vec![table[0]];
    for k in 1..table.len() {
        let f = T::lit(4f64.powi(k as i32));
        for j in (k..table.len()).rev() {
            table[j] = (f * table[j] - table[j - 1]) / (f - T::one());
        }
        diagonal.push(table[k]);
    }
    let n = diagonal.len();
    let energy = diagonal[n - 1];
    let error_estimate = (diagonal[n - 1] - diagonal[n - 2]).abs();
    if error_estimate > T::lit(EXTRAPOLATION_TOL) * energy.abs() {
        return Err(Error::precision(
            format!(
                "regulator extrapolation did not settle: estimates {:?} over λ = {:?}",
                diagonal, regulators
            ),
            "start from a smaller regulator or add levels",
        ));
    }
    Ok(CasimirResult {
        geometry: cavity.geometry,
        separation: cavity.separation,
        energy,
        error_estimate,
        regulators,
        residuals,
    })
}

fn check_pair<T: Real>(initial: &CavitySpec<T>, final_: &CavitySpec<T>) -> Result<()> {
    if initial.geometry != final_.geometry {
        return Err(Error::domain("initial and final cavities have different geometries"));
    }
    Ok(())
}

/// Work `E(d_final) − E(d_initial)` done on the zero-point field.
pub fn zero_point_work<T: Real>(initial: &CavitySpec<T>, final_: &CavitySpec<T>) -> Result<T> {
    check_pair(initial, final_)?;
    if initial.separation == final_.separation {
        return Ok(T::zero());
    }
    Ok(regularized_energy(final_)?.energy - regularized_energy(initial)?.energy)
}

/// Thermal part of the free energy, `(1/β) Σ ln(1 − e^{−βω})`, per area for
/// plates.
pub fn thermal_free_energy<T: Real>(cavity: &CavitySpec<T>, beta: T) -> Result<T> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::domain(format!("β = {beta} must be finite and > 0")));
    }
    let tiny = T::epsilon() * T::lit(1e-3);
    let mut acc = Compensated::new();
    match cavity.geometry {
        Geometry::Interval1d => {
            for n in 1.. {
                let x = beta * cavity.mode_frequency(n);
                let term = (-(-x).exp()).ln_1p();
                acc.add(term);
                if term.abs() <= tiny * acc.value().abs() {
                    break;
                }
            }
            Ok(acc.value() / beta)
        }
        Geometry::Plates3d => {
            // (1/2π)∫_κ^∞ ω ln(1 − e^{−βω}) dω = −[κ Li₂(e^{−βκ})/β + Li₃(e^{−βκ})/β²] / 2π.
            let i = |k: T| -> T {
                let x = beta * k;
                -(k * polylog_exp(2, x) / beta + polylog_exp(3, x) / (beta * beta)) / T::TAU()
            };
            acc.add(i(T::zero()));
            for n in 1.. {
                let term = T::lit(2.0) * i(cavity.mode_frequency(n));
                acc.add(term);
                if term.abs() <= tiny * acc.value().abs() {
                    break;
                }
            }
            Ok(acc.value() / beta)
        }
    }
}

/// `ΔF = −(1/β) Σ_k ln G_k(iβ)` for a change of separation, with the
/// zero-point part regularised as in [`zero_point_work`].
pub fn free_energy_difference<T: Real>(initial: &CavitySpec<T>, final_: &CavitySpec<T>, beta: T) -> Result<T> {
    check_pair(initial, final_)?;
    if initial.separation == final_.separation {
        return Ok(T::zero());
    }
    let zero_point = zero_point_work(initial, final_)?;
    let thermal = match initial.geometry {
        Geometry::Interval1d => {
            // Per mode, −ln G(iβ)/β − Δ/2 is the convergent thermal remainder.
            let tiny = T::epsilon() * T::lit(1e-3);
            let mut acc = Compensated::new();
            for n in 1.. {
                let (w0, wt) = (initial.mode_frequency(n), final_.mode_frequency(n));
                let ln_g = ln_char_boundary(w0, wt, beta, num_complex::Complex::new(T::zero(), beta))?.re;
                let term = -ln_g / beta - (wt - w0) / T::lit(2.0);
                acc.add(term);
                if term.abs() <= tiny * acc.value().abs().max(T::min_positive_value()) || n > 10_000_000 {
                    break;
                }
            }
            acc.value()
        }
        Geometry::Plates3d => thermal_free_energy(final_, beta)? - thermal_free_energy(initial, beta)?,
    };
    Ok(zero_point + thermal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_coefficient() {
        for &d in &[0.5, 1.0, 3.0] {
            let cav = CavitySpec::new(Geometry::Interval1d, d).unwrap();
            let r = regularized_energy(&cav).unwrap();
            let rel = (r.coefficient() + std::f64::consts::PI / 24.0).abs() / (std::f64::consts::PI / 24.0);
            assert!(rel < 1e-8, "d={d}: {}", r.coefficient());
        }
    }

    #[test]
    fn plate_coefficient_and_sign() {
        let exact = -std::f64::consts::PI.powi(2) / 720.0;
        let mut prev = f64::NEG_INFINITY;
        for &d in &[0.5, 1.0, 2.0] {
            let cav = CavitySpec::new(Geometry::Plates3d, d).unwrap();
            let r = regularized_energy(&cav).unwrap();
            assert!((r.coefficient() - exact).abs() < 1e-6 * exact.abs(), "d={d}: {}", r.coefficient());
            assert!(r.energy < 0.0 && r.energy > prev);
            prev = r.energy;
        }
    }

    #[test]
    fn regulator_independence() {
        let a = CavitySpec::<f64>::new(Geometry::Plates3d, 1.0).unwrap();
        let b = CavitySpec {
            regulator: a.regulator / 2.0,
            ..a
        };
        let (ea, eb) = (regularized_energy(&a).unwrap().energy, regularized_energy(&b).unwrap().energy);
        assert!((ea - eb).abs() < 1e-3 * ea.abs());
    }

    #[test]
    fn zero_point_work_of_interval() {
        let i = CavitySpec::new(Geometry::Interval1d, 1.0).unwrap();
        let f = i.with_separation(2.0).unwrap();
        let w = zero_point_work(&i, &f).unwrap();
        let expected = -std::f64::consts::PI / 24.0 * (1.0 / 2.0 - 1.0);
        assert!((w - expected).abs() < 1e-9);
        assert_eq!(zero_point_work(&i, &i).unwrap(), 0.0);
        assert_eq!(free_energy_difference(&i, &i, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn interval_free_energy_matches_partition_product() {
        let i = CavitySpec::new(Geometry::Interval1d, 1.0).unwrap();
        let f = i.with_separation(1.5).unwrap();
        let beta = 0.8;
        let df = free_energy_difference(&i, &f, beta).unwrap();
        // (1/β) Σ ln[sinh(βω_f/2)/sinh(βω_i/2)] with the zero-point half of
        // each logarithm regularised separately.
        let mut thermal = 0.0;
        for n in 1..2000 {
            let (wi, wf) = (i.mode_frequency(n), f.mode_frequency(n));
            // ln sinh(x/2) − x/2 = ln(1 − e^{−x}) − ln 2, stable for large x.
            let ln_sinh = |w: f64| (-(-beta * w).exp()).ln_1p() - std::f64::consts::LN_2;
            thermal += (ln_sinh(wf) - ln_sinh(wi)) / beta;
        }
        let expected = zero_point_work(&i, &f).unwrap() + thermal;
        assert!((df - expected).abs() < 1e-8, "{df} vs {expected}");
    }

    #[test]
    fn cold_limit_approaches_zero_point_work() {
        for geometry in [Geometry::Interval1d, Geometry::Plates3d] {
            let i = CavitySpec::<f64>::new(geometry, 1.0).unwrap();
            let f = i.with_separation(1.3).unwrap();
            let beta = 60.0 / i.mode_frequency(1);
            let w = zero_point_work(&i, &f).unwrap();
            let df = free_energy_difference(&i, &f, beta).unwrap();
            assert!((df - w).abs() < 1e-3 * w.abs(), "{geometry:?}: {df} vs {w}");
        }
    }

    #[test]
    fn invalid_cavities_are_rejected() {
        assert!(CavitySpec::new(Geometry::Plates3d, -1.0).is_err());
        let c = CavitySpec {
            mode_cutoff: 120,
            ..CavitySpec::new(Geometry::Interval1d, 1.0).unwrap()
        };
        assert!(matches!(regularized_energy(&c), Err(Error::Precision { .. })));
    }
}
