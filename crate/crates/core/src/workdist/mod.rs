//! Discrete work distributions: weighted atoms `P(W) = Σ q δ(W − W_s)`.

mod exact;
mod weights;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

pub use exact::{ratio_to_f64, ExactWeights};
pub use weights::{weights_number, WeightEvaluator, WeightMethod, AUTO_ERROR_BOUND, NEGATIVE_TOLERANCE};

use crate::charfunc::{phase_factor, InitialState};
use crate::error::{Error, Result};
use crate::protocol::{DriveFunctionals, ModeSpec};
use crate::scalar::{Compensated, CompensatedComplex, Real};
use crate::special::poisson_pmf;

/// Atoms closer than this in work are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Default bound on the probability mass left out by truncation.
pub const DEFAULT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WorkAtom<T> {
    pub work: T,
    pub weight: T,
}

/// Atoms sorted by work, plus the probability mass not represented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct WorkDistribution<T> {
    pub atoms: Vec<WorkAtom<T>>,
    pub mass_deficit: T,
    pub state_tag: String,
}

impl<T: Real> WorkDistribution<T> {
    /// Sorts, drops zero weights, merges coincident atoms and records the
    /// deficit as `1 − Σ weights` (floored at zero).
    pub fn from_atoms(mut atoms: Vec<WorkAtom<T>>, state_tag: impl Into<String>) -> Self {
        atoms.retain(|a| a.weight > T::zero());
        atoms.sort_by(|a, b| a.work.partial_cmp(&b.work).unwrap());
        let tol = T::lit(MERGE_TOLERANCE);
        let mut merged: Vec<WorkAtom<T>> = Vec::with_capacity(atoms.len());
        let mut anchor = T::zero();
        let mut acc = Compensated::new();
        for a in atoms {
            match merged.last_mut() {
                Some(last) if (a.work - anchor).abs() <= tol => {
                    acc.add(a.weight);
                    last.weight = acc.value();
                }
                _ => {
                    anchor = a.work;
                    acc = Compensated::new();
                    acc.add(a.weight);
                    merged.push(a);
                }
            }
        }
        let total = merged.iter().map(|a| a.weight).collect::<Compensated<T>>().value();
        Self {
            atoms: merged,
            mass_deficit: (T::one() - total).max(T::zero()),
            state_tag: state_tag.into(),
        }
    }

    pub fn total_weight(&self) -> T {
        self.atoms.iter().map(|a| a.weight).collect::<Compensated<T>>().value()
    }

    /// `Σ q e^{iνW}`.
    pub fn char_value(&self, nu: Complex<T>) -> Complex<T> {
        let mut acc = CompensatedComplex::new();
        for a in &self.atoms {
            acc.add(phase_factor(nu, a.work) * a.weight);
        }
        acc.value()
    }

    /// Raw moment `Σ q W^k`, normalised by the represented mass.
    pub fn moment(&self, k: i32) -> T {
        let s: Compensated<T> = self.atoms.iter().map(|a| a.weight * a.work.powi(k)).collect();
        s.value() / self.total_weight()
    }

    pub fn mean(&self) -> T {
        self.moment(1)
    }

    pub fn central_moment(&self, k: i32) -> T {
        let m = self.mean();
        let s: Compensated<T> = self.atoms.iter().map(|a| a.weight * (a.work - m).powi(k)).collect();
        s.value() / self.total_weight()
    }

    pub fn variance(&self) -> T {
        self.central_moment(2)
    }

    /// Distribution of the sum of two independent works.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut atoms = Vec::with_capacity(self.atoms.len() * other.atoms.len());
        for a in &self.atoms {
            for b in &other.atoms {
                atoms.push(WorkAtom {
                    work: a.work + b.work,
                    weight: a.weight * b.weight,
                });
            }
        }
        let mut out = Self::from_atoms(atoms, format!("{}*{}", self.state_tag, other.state_tag));
        let kept = (T::one() - self.mass_deficit) * (T::one() - other.mass_deficit);
        out.mass_deficit = out.mass_deficit.max(T::one() - kept);
        out
    }
}

/// Work of the transition that adds `s` quanta to `|n⟩`:
/// `W_s = (s + n + ½)Δ + s ω(0) − ω(t)|α|²`.
pub fn atom_work<T: Real>(fun: &DriveFunctionals<T>, n: u32, s: i64) -> T {
    let sf = T::lit(s as f64);
    (sf + T::lit(n as f64) + T::lit(0.5)) * fun.delta + sf * fun.omega_initial
        - fun.omega_final * fun.alpha.norm_sqr()
}

/// Initial upper limit of the quantum-number change.
fn initial_s_max<T: Real>(n: u32, z: T) -> i64 {
    let guess = T::lit(n as f64) + T::lit(10.0) * z;
    guess.ceil().to_i64().unwrap_or(i64::MAX / 4).max(n as i64 + 8)
}

const MAX_S: i64 = 1 << 22;

/// Weights `q_s` for `s = −n, …` until the retained mass reaches `1 − eps`.
fn number_weights<T: Real>(n: u32, z: T, eps: T, method: WeightMethod) -> Result<Vec<(i64, T)>> {
    let mut ev = WeightEvaluator::new(n, method);
    let mut out = Vec::new();
    let mut mass = Compensated::new();
    let mut next = -(n as i64);
    let mut s_max = initial_s_max(n, z);
    loop {
        for s in next..=s_max {
            let q = ev.weight(s, z)?;
            mass.add(q);
            out.push((s, q));
        }
        next = s_max + 1;
        if T::one() - mass.value() < eps {
            return Ok(out);
        }
        if s_max >= MAX_S {
            return Err(Error::Convergence {
                what: format!("weight tail for n = {n}, z = {z}"),
                terms: out.len(),
                partial: format!("{}", mass.value()),
                last_term: out.last().map_or(f64::NAN, |x| x.1.to_f64().unwrap_or(f64::NAN)),
            });
        }
        s_max *= 2;
    }
}

/// Work distribution of a mode initially in `|n⟩`.
pub fn dist_number<T: Real>(fun: &DriveFunctionals<T>, n: u32, eps: T) -> Result<WorkDistribution<T>> {
    dist_number_with(fun, n, eps, WeightMethod::Auto)
}

pub fn dist_number_with<T: Real>(
    fun: &DriveFunctionals<T>,
    n: u32,
    eps: T,
    method: WeightMethod,
) -> Result<WorkDistribution<T>> {
    let weights = number_weights(n, fun.rapidity, eps, method)?;
    let atoms = weights
        .into_iter()
        .map(|(s, q)| WorkAtom {
            work: atom_work(fun, n, s),
            weight: q,
        })
        .collect();
    Ok(WorkDistribution::from_atoms(atoms, format!("number:{n}")))
}

/// Work distribution of an undriven thermal mode whose frequency changes
/// from `omega_0` to `omega_t`: atoms at `(r + ½)Δ` with geometric weights.
pub fn boundary_thermal_atoms<T: Real>(omega_0: T, omega_t: T, beta: T, eps: T) -> Result<WorkDistribution<T>> {
    if !(beta > T::zero()) {
        return Err(Error::domain(format!("inverse temperature β = {beta} must be > 0")));
    }
    let delta = omega_t - omega_0;
    let tag = format!("thermal:{beta}");
    if beta.is_infinite() {
        let atom = WorkAtom {
            work: delta / T::lit(2.0),
            weight: T::one(),
        };
        return Ok(WorkDistribution {
            atoms: vec![atom],
            mass_deficit: T::zero(),
            state_tag: tag,
        });
    }
    let w = (-beta * omega_0).exp();
    let norm = -(-beta * omega_0).exp_m1();
    let mut atoms = Vec::new();
    let mut power = T::one();
    let mut r = 0u64;
    // Stop once the geometric tail w^{R+1} drops below eps.
    while power >= eps && power > T::zero() {
        atoms.push(WorkAtom {
            work: (T::lit(r as f64) + T::lit(0.5)) * delta,
            weight: norm * power,
        });
        power *= w;
        r += 1;
    }
    let mut out = WorkDistribution::from_atoms(atoms, tag);
    out.mass_deficit = power;
    Ok(out)
}

/// As [`boundary_thermal_atoms`], reading the frequencies of `mode` at `t`.
pub fn dist_boundary_thermal<T: Real>(mode: &ModeSpec<T>, beta: T, t: T, eps: T) -> Result<WorkDistribution<T>> {
    boundary_thermal_atoms(mode.omega(T::zero())?, mode.omega(t)?, beta, eps)
}

/// Work distribution of a mode initially in the coherent state `|a⟩`: the
/// Poisson mixture of number-state distributions.
pub fn dist_coherent<T: Real>(fun: &DriveFunctionals<T>, amplitude: Complex<T>, eps: T) -> Result<WorkDistribution<T>> {
    let mean = amplitude.norm_sqr();
    let half = eps / T::lit(2.0);
    let mut atoms = Vec::new();
    let mut covered = Compensated::new();
    let mut n = 0u32;
    loop {
        let p = poisson_pmf(n as usize, mean);
        if p > T::zero() {
            let d = dist_number(fun, n, half)?;
            atoms.extend(d.atoms.into_iter().map(|a| WorkAtom {
                work: a.work,
                weight: a.weight * p,
            }));
        }
        covered.add(p);
        if T::one() - covered.value() < half && T::lit(n as f64) >= mean {
            break;
        }
        n += 1;
        if n as usize > crate::charfunc::COHERENT_MAX_TERMS {
            return Err(Error::Convergence {
                what: "coherent-state Poisson mixture".into(),
                terms: n as usize,
                partial: format!("{}", covered.value()),
                last_term: p.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(WorkDistribution::from_atoms(atoms, format!("coherent:{amplitude}")))
}

/// Work distribution of a driven thermal mode: the geometric mixture of
/// number-state distributions, truncated once the occupation tail is below
/// `eps/2`.
pub fn dist_thermal<T: Real>(fun: &DriveFunctionals<T>, beta: T, eps: T) -> Result<WorkDistribution<T>> {
    if !(beta > T::zero()) {
        return Err(Error::domain(format!("inverse temperature β = {beta} must be > 0")));
    }
    if beta.is_infinite() {
        return dist_number(fun, 0, eps);
    }
    let half = eps / T::lit(2.0);
    let w = (-beta * fun.omega_initial).exp();
    let norm = -(-beta * fun.omega_initial).exp_m1();
    let mut atoms = Vec::new();
    let mut tail = T::one();
    let mut n = 0u32;
    while tail >= half {
        let p = norm * tail;
        let d = dist_number(fun, n, half)?;
        atoms.extend(d.atoms.into_iter().map(|a| WorkAtom {
            work: a.work,
            weight: a.weight * p,
        }));
        tail *= w;
        n += 1;
        if n > 100_000 {
            return Err(Error::Convergence {
                what: "thermal mixture of number states".into(),
                terms: n as usize,
                partial: format!("{}", T::one() - tail),
                last_term: p.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(WorkDistribution::from_atoms(atoms, format!("thermal:{beta}")))
}

/// Work distribution of one mode for any initial state.
pub fn dist_mode<T: Real>(fun: &DriveFunctionals<T>, state: &InitialState<T>, eps: T) -> Result<WorkDistribution<T>> {
    match *state {
        InitialState::Number { n } => dist_number(fun, n, eps),
        InitialState::Thermal { beta } => dist_thermal(fun, beta, eps),
        InitialState::Coherent { amplitude } => dist_coherent(fun, amplitude, eps),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfunc::{char_boundary, char_coherent, char_number};
    use num_complex::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn fun(xi: Complex<f64>, w0: f64, wt: f64, g: f64) -> DriveFunctionals<f64> {
        DriveFunctionals::from_parts(2.0, w0, wt, g, c(0.3, 0.1), 1.9, xi, 0.1)
    }

    #[test]
    fn undriven_number_state_is_single_atom() {
        let f = DriveFunctionals::undriven(1.0, 1.5);
        let d = dist_number(&f, 3, DEFAULT_EPS).unwrap();
        assert_eq!(d.atoms, vec![WorkAtom { work: 3.5 * 0.5, weight: 1.0 }]);
        assert_eq!(d.mass_deficit, 0.0);
        assert_eq!(d.variance(), 0.0);
    }

    #[test]
    fn ground_state_comb_is_poisson() {
        let f = fun(c(0.9, 0.4), 1.2, 1.2, 0.0);
        let d = dist_number(&f, 0, DEFAULT_EPS).unwrap();
        let z = f.rapidity;
        for (s, a) in d.atoms.iter().enumerate() {
            assert!((a.work - s as f64 * 1.2).abs() < 1e-14);
            assert!((a.weight - poisson_pmf(s, z)).abs() < 1e-15);
        }
        assert!(d.mass_deficit < DEFAULT_EPS);
    }

    #[test]
    fn number_distribution_reproduces_char_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = fun(c(0.7, -0.5), 1.0, 1.3, 0.2);
        for n in [0u32, 2, 4] {
            let d = dist_number(&f, n, DEFAULT_EPS).unwrap();
            assert!((d.total_weight() + d.mass_deficit - 1.0).abs() < 1e-12);
            for _ in 0..32 {
                let nu = c(rng.gen_range(-6.0..6.0), 0.0);
                let diff = (d.char_value(nu) - char_number(&f, n, nu).unwrap()).norm();
                assert!(diff < 1e-9, "n={n} ν={nu}: {diff}");
            }
        }
    }

    #[test]
    fn coherent_distribution_reproduces_char_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = fun(c(0.4, 0.3), 1.0, 0.8, 0.1);
        let a = c(1.1, -0.6);
        let d = dist_coherent(&f, a, DEFAULT_EPS).unwrap();
        for _ in 0..32 {
            let nu = c(rng.gen_range(-5.0..5.0), 0.0);
            let diff = (d.char_value(nu) - char_coherent(&f, a, nu).unwrap()).norm();
            assert!(diff < 1e-8, "ν={nu}: {diff}");
        }
    }

    #[test]
    fn coherent_without_source_has_poisson_weights() {
        let f = DriveFunctionals::undriven(1.0, 1.4);
        let a = c(0.9, 0.0);
        let d = dist_coherent(&f, a, DEFAULT_EPS).unwrap();
        for (n, atom) in d.atoms.iter().enumerate() {
            assert!((atom.work - (n as f64 + 0.5) * 0.4).abs() < 1e-14);
            assert!((atom.weight - poisson_pmf(n, 0.81)).abs() < 1e-15);
        }
        let zero = dist_coherent(&fun(c(0.3, 0.3), 1.0, 1.0, 0.0), c(0.0, 0.0), DEFAULT_EPS).unwrap();
        let ground = dist_number(&fun(c(0.3, 0.3), 1.0, 1.0, 0.0), 0, DEFAULT_EPS).unwrap();
        assert_eq!(zero.atoms, ground.atoms);
    }

    #[test]
    fn boundary_thermal_is_geometric() {
        let d = boundary_thermal_atoms(1.0, 1.6, 0.7, DEFAULT_EPS).unwrap();
        assert!(d.atoms.iter().all(|a| a.work > 0.0));
        assert!((d.total_weight() + d.mass_deficit - 1.0).abs() <= 4.0 * f64::EPSILON);
        let nu = c(1.3, 0.0);
        assert!((d.char_value(nu) - char_boundary(1.0, 1.6, 0.7, nu).unwrap()).norm() < 1e-9);
        let down = boundary_thermal_atoms(1.0, 0.7, 0.7, DEFAULT_EPS).unwrap();
        assert!(down.atoms.iter().all(|a| a.work < 0.0));
        let cold = boundary_thermal_atoms(1.0, 1.6, f64::INFINITY, DEFAULT_EPS).unwrap();
        assert_eq!(cold.atoms.len(), 1);
        assert!((cold.atoms[0].work - 0.3).abs() < 1e-15);
    }

    #[test]
    fn convolution_multiplies_char_functions() {
        let f1 = fun(c(0.5, 0.1), 1.0, 1.0, 0.0);
        let f2 = fun(c(0.2, -0.3), 2.0, 2.5, 0.0);
        let d1 = dist_number(&f1, 1, DEFAULT_EPS).unwrap();
        let d2 = dist_number(&f2, 0, DEFAULT_EPS).unwrap();
        let d = d1.convolve(&d2);
        let nu = c(0.77, 0.0);
        assert!((d.char_value(nu) - d1.char_value(nu) * d2.char_value(nu)).norm() < 1e-12);
        assert!((d.total_weight() + d.mass_deficit - 1.0).abs() < 1e-12);
    }

    #[test]
    fn merging_collapses_commensurate_atoms() {
        let atoms = vec![
            WorkAtom { work: 1.0, weight: 0.25 },
            WorkAtom { work: 1.0 + 1e-13, weight: 0.25 },
            WorkAtom { work: 0.0, weight: 0.5 },
            WorkAtom { work: 3.0, weight: 0.0 },
        ];
        let d = WorkDistribution::from_atoms(atoms, "test");
        assert_eq!(d.atoms.len(), 2);
        assert_eq!(d.atoms[1].weight, 0.5);
        assert_eq!(d.mass_deficit, 0.0);
    }

    #[test]
    fn thermal_mixture_matches_characteristic_function() {
        use crate::charfunc::char_thermal;
        let fun = DriveFunctionals::from_parts(
            3.0,
            1.0,
            1.2,
            0.0,
            Complex::new(0.2, 0.1),
            3.3,
            Complex::new(0.4, -0.3),
            0.0,
        );
        let d = dist_thermal(&fun, 0.9, 1e-12).unwrap();
        for &nu in &[0.4, -1.3, 2.2] {
            let nu = Complex::new(nu, 0.0);
            assert!((d.char_value(nu) - char_thermal(&fun, 0.9, nu).unwrap()).norm() < 1e-10);
        }
        let cold = dist_thermal(&fun, f64::INFINITY, 1e-12).unwrap();
        assert_eq!(cold, dist_number(&fun, 0, 1e-12).unwrap());
    }
}
