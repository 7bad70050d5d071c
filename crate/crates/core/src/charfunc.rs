//! Characteristic function `G(ν) = ⟨e^{iνW}⟩` of the two-point-measurement
//! work, per mode and for the whole field.
//!
//! `ν` is complex throughout: real `ν` gives the Fourier transform of the
//! work distribution, `ν = iβ` gives `⟨e^{−βW}⟩`.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::DriveFunctionals;
use crate::scalar::{cis, imag, Real};
use crate::special::laguerre;

/// Initial preparation of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum InitialState<T> {
    /// Fock state `|n⟩`.
    Number { n: u32 },
    /// Gibbs state of the initial Hamiltonian; `beta = ∞` is the ground state.
    Thermal { beta: T },
    /// Coherent state `|a⟩`.
    Coherent { amplitude: Complex<T> },
}

/// Series limits for the coherent-state sum.
pub const COHERENT_TOL: f64 = 1e-14;
pub const COHERENT_MAX_TERMS: usize = 512;

/// `e^u − 1` without cancellation for small `|u|`.
pub fn expm1_c<T: Real>(u: Complex<T>) -> Complex<T> {
    let (a, b) = (u.re, u.im);
    let half = (b / T::lit(2.0)).sin();
    let cos_m1 = -T::lit(2.0) * half * half;
    let ea_m1 = a.exp_m1();
    Complex::new(ea_m1 * b.cos() + cos_m1, a.exp() * b.sin())
}

/// `4 z sin²(νω/2)`, the Laguerre argument.
fn laguerre_arg<T: Real>(z: T, nu_omega: Complex<T>) -> Complex<T> {
    let s = (nu_omega / T::lit(2.0)).sin();
    s * s * (T::lit(4.0) * z)
}

/// Terms common to every initial state:
/// `−iνω_t|α|² + z(e^{iνω_t} − 1)`.
fn displacement_log<T: Real>(omega_t: T, z: T, alpha_sq: T, nu: Complex<T>) -> Complex<T> {
    let i_nu_w = imag(T::one()) * nu * omega_t;
    -(i_nu_w * alpha_sq) + expm1_c(i_nu_w) * z
}

/// `ln G` for a mode initially in `|n⟩`.
pub fn ln_char_number<T: Real>(fun: &DriveFunctionals<T>, n: u32, nu: Complex<T>) -> Result<Complex<T>> {
    let z = fun.rapidity;
    let x = laguerre_arg(z, nu * fun.omega_final);
    let l = laguerre(n, x);
    if !l.re.is_finite() || !l.im.is_finite() {
        return Err(Error::Range(format!("Laguerre polynomial L_{n} overflowed at ν = {nu}")));
    }
    let shift = imag(T::one()) * nu * fun.delta * (T::lit(n as f64) + T::lit(0.5));
    Ok(displacement_log(fun.omega_final, z, fun.alpha.norm_sqr(), nu) + shift + l.ln())
}

pub fn char_number<T: Real>(fun: &DriveFunctionals<T>, n: u32, nu: Complex<T>) -> Result<Complex<T>> {
    Ok(ln_char_number(fun, n, nu)?.exp())
}

fn ln_thermal_parts<T: Real>(
    omega_0: T,
    omega_t: T,
    z: T,
    alpha_sq: T,
    beta: T,
    nu: Complex<T>,
) -> Result<Complex<T>> {
    if !(beta > T::zero()) {
        return Err(Error::domain(format!("inverse temperature β = {beta} must be > 0")));
    }
    let delta = omega_t - omega_0;
    let i_nu_d = imag(T::one()) * nu * delta;
    let base = displacement_log(omega_t, z, alpha_sq, nu) + i_nu_d / T::lit(2.0);
    if beta.is_infinite() {
        // Ground state: the n = 0 number-state expression.
        return Ok(base);
    }
    let u = i_nu_d - Complex::new(beta * omega_0, T::zero());
    let q = u.exp();
    if !(q.norm() < T::one()) {
        return Err(Error::domain(format!(
            "thermal characteristic function diverges at ν = {nu}: |e^(iνΔ − βω₀)| = {} ≥ 1",
            q.norm()
        )));
    }
    let one_minus_q = -expm1_c(u);
    let x = laguerre_arg(z, nu * omega_t);
    let norm = (-(-beta * omega_0).exp_m1()).ln();
    Ok(base + Complex::new(norm, T::zero()) - x * q / one_minus_q - one_minus_q.ln())
}

/// `ln G` for a mode initially thermal at inverse temperature `beta`.
pub fn ln_char_thermal<T: Real>(fun: &DriveFunctionals<T>, beta: T, nu: Complex<T>) -> Result<Complex<T>> {
    ln_thermal_parts(
        fun.omega_initial,
        fun.omega_final,
        fun.rapidity,
        fun.alpha.norm_sqr(),
        beta,
        nu,
    )
}

pub fn char_thermal<T: Real>(fun: &DriveFunctionals<T>, beta: T, nu: Complex<T>) -> Result<Complex<T>> {
    Ok(ln_char_thermal(fun, beta, nu)?.exp())
}

/// Characteristic function of an undriven thermal mode whose frequency
/// changes from `omega_0` to `omega_t`.
pub fn char_boundary<T: Real>(omega_0: T, omega_t: T, beta: T, nu: Complex<T>) -> Result<Complex<T>> {
    Ok(ln_char_boundary(omega_0, omega_t, beta, nu)?.exp())
}

pub fn ln_char_boundary<T: Real>(omega_0: T, omega_t: T, beta: T, nu: Complex<T>) -> Result<Complex<T>> {
    ln_thermal_parts(omega_0, omega_t, T::zero(), T::zero(), beta, nu)
}

/// `G` for a mode initially in the coherent state `|a⟩`: the Poisson
/// average of the number-state result, summed with a running Laguerre
/// recurrence until a bound on the tail drops below [`COHERENT_TOL`].
pub fn char_coherent<T: Real>(fun: &DriveFunctionals<T>, amplitude: Complex<T>, nu: Complex<T>) -> Result<Complex<T>> {
    char_coherent_with(fun, amplitude, nu, T::lit(COHERENT_TOL), COHERENT_MAX_TERMS)
}

pub fn char_coherent_with<T: Real>(
    fun: &DriveFunctionals<T>,
    amplitude: Complex<T>,
    nu: Complex<T>,
    tol: T,
    max_terms: usize,
) -> Result<Complex<T>> {
    let mean = amplitude.norm_sqr();
    let z = fun.rapidity;
    let x = laguerre_arg(z, nu * fun.omega_final);
    let prefactor = (displacement_log(fun.omega_final, z, fun.alpha.norm_sqr(), nu)
        + imag(T::one()) * nu * fun.delta / T::lit(2.0))
    .exp();
    let step = (imag(T::one()) * nu * fun.delta).exp();
    let step_abs = step.norm();
    let real_arg = x.im == T::zero() && x.re >= T::zero();
    let xabs = x.norm();
    let ln_mean = mean.ln();

    let one = Complex::new(T::one(), T::zero());
    let (mut l_prev, mut l_cur) = (Complex::zero(), one);
    // Bounds b_n on |L_n(x)|: e^{x/2} for real x ≥ 0, else L_n(−|x|).
    let (mut b_prev, mut b_cur) = (T::zero(), T::one());
    let mut phase = one;
    let mut sum = Complex::zero();
    let mut abs_sum = T::zero();
    let mut last = T::zero();
    for n in 0..max_terms {
        let nf = T::lit(n as f64);
        let ln_p = if mean == T::zero() {
            if n == 0 {
                T::zero()
            } else {
                T::neg_infinity()
            }
        } else {
            nf * ln_mean - mean - (nf + T::one()).lgamma()
        };
        let p = ln_p.exp();
        let term = phase * l_cur * p;
        sum += term;
        abs_sum += term.norm();
        let bound_n = if real_arg { (x.re / T::lit(2.0)).exp() } else { b_cur };
        last = p * bound_n * step_abs.powi(n as i32);
        // Next Laguerre value and bound.
        let next_l = if n == 0 {
            one - x
        } else {
            ((l_cur * (T::lit(2.0) * nf + T::one())) - l_cur * x - l_prev * nf) / (nf + T::one())
        };
        let next_b = if n == 0 {
            T::one() + xabs
        } else {
            ((T::lit(2.0) * nf + T::one() + xabs) * b_cur - nf * b_prev) / (nf + T::one())
        };
        let ratio_b = if real_arg { T::one() } else { next_b / b_cur };
        let r = mean / (nf + T::one()) * step_abs * ratio_b;
        if nf >= mean && r < T::one() {
            let tail = last * r / (T::one() - r);
            if tail <= tol * abs_sum.max(T::min_positive_value()) {
                return Ok(prefactor * sum);
            }
        }
        l_prev = l_cur;
        l_cur = next_l;
        b_prev = b_cur;
        b_cur = next_b;
        phase *= step;
    }
    Err(Error::Convergence {
        what: "coherent-state characteristic series".into(),
        terms: max_terms,
        partial: format!("{}", prefactor * sum),
        last_term: last.to_f64().unwrap_or(f64::NAN),
    })
}

/// `ln G` for one mode in any supported initial state.
pub fn ln_char_mode<T: Real>(fun: &DriveFunctionals<T>, state: &InitialState<T>, nu: Complex<T>) -> Result<Complex<T>> {
    match *state {
        InitialState::Number { n } => ln_char_number(fun, n, nu),
        InitialState::Thermal { beta } => ln_char_thermal(fun, beta, nu),
        InitialState::Coherent { amplitude } => Ok(char_coherent(fun, amplitude, nu)?.ln()),
    }
}

pub fn char_mode<T: Real>(fun: &DriveFunctionals<T>, state: &InitialState<T>, nu: Complex<T>) -> Result<Complex<T>> {
    match *state {
        InitialState::Coherent { amplitude } => char_coherent(fun, amplitude, nu),
        _ => Ok(ln_char_mode(fun, state, nu)?.exp()),
    }
}

fn check_lengths<T>(funs: &[DriveFunctionals<T>], states: &[InitialState<T>]) -> Result<()> {
    if funs.len() != states.len() {
        return Err(Error::domain(format!(
            "{} modes but {} initial states",
            funs.len(),
            states.len()
        )));
    }
    Ok(())
}

/// `ln G` of the whole field: the sum of per-mode logarithms.
pub fn ln_char_total<T: Real>(
    funs: &[DriveFunctionals<T>],
    states: &[InitialState<T>],
    nu: Complex<T>,
) -> Result<Complex<T>> {
    check_lengths(funs, states)?;
    let mut acc = Complex::zero();
    for (f, s) in funs.iter().zip(states) {
        acc += ln_char_mode(f, s, nu)?;
    }
    Ok(acc)
}

pub fn char_total<T: Real>(funs: &[DriveFunctionals<T>], states: &[InitialState<T>], nu: Complex<T>) -> Result<Complex<T>> {
    let ln = ln_char_total(funs, states, nu)?;
    if ln.re > T::max_value().ln() {
        return Err(Error::Range(format!("characteristic function overflows at ν = {nu}")));
    }
    Ok(ln.exp())
}

/// `ln G(ν)` on an ordered grid of real `ν`, with the imaginary part
/// unwrapped so that it is continuous along the grid.
pub fn cumulant_curve<T: Real>(
    funs: &[DriveFunctionals<T>],
    states: &[InitialState<T>],
    nus: &[T],
) -> Result<Vec<Complex<T>>> {
    let mut out: Vec<Complex<T>> = Vec::with_capacity(nus.len());
    for &nu in nus {
        let mut v = ln_char_total(funs, states, Complex::new(nu, T::zero()))?;
        if let Some(prev) = out.last() {
            let turns = ((v.im - prev.im) / T::TAU()).round();
            v.im -= turns * T::TAU();
        }
        out.push(v);
    }
    Ok(out)
}

/// One value `G(ν)` of a characteristic function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CharacteristicSample<T> {
    pub nu: T,
    pub value: Complex<T>,
}

/// `G(ν)` of the joint state on a grid of real `ν`.
pub fn sample_total<T: Real>(
    funs: &[DriveFunctionals<T>],
    states: &[InitialState<T>],
    nus: &[T],
) -> Result<Vec<CharacteristicSample<T>>> {
    nus.iter()
        .map(|&nu| {
            Ok(CharacteristicSample {
                nu,
                value: char_total(funs, states, Complex::new(nu, T::zero()))?,
            })
        })
        .collect()
}

/// `G` evaluated for unit-modulus checks: `e^{iν·shift}` times a value.
#[inline]
pub(crate) fn phase_factor<T: Real>(nu: Complex<T>, energy: T) -> Complex<T> {
    let arg = nu * energy;
    cis(arg.re) * (-arg.im).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::LnFactorials;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn driven(omega0: f64, omega_t: f64, xi: Complex<f64>, g: f64, f: Complex<f64>) -> DriveFunctionals<f64> {
        DriveFunctionals::from_parts(3.0, omega0, omega_t, g, f, 2.1, xi, 0.4)
    }

    /// `Σ_s q_s e^{iνW_s}` with `q_s` from the associated-Laguerre closed form.
    fn brute_number(fun: &DriveFunctionals<f64>, n: u32, nu: Complex<f64>) -> Complex<f64> {
        let z = fun.rapidity;
        let lf = LnFactorials::<f64>::new(400);
        let mut acc = c(0.0, 0.0);
        for m in 0..300u32 {
            let (lo, hi) = (n.min(m), n.max(m));
            let a = hi - lo;
            let lag = crate::special::assoc_laguerre(lo, a, z);
            let ln_mag = 0.5 * (lf.get(lo as usize) - lf.get(hi as usize)) + a as f64 * 0.5 * z.ln() - z / 2.0;
            let q = (2.0 * ln_mag).exp() * lag * lag;
            let s = m as f64 - n as f64;
            let w = (n as f64 + 0.5) * fun.delta + s * fun.omega_final - fun.omega_final * fun.alpha.norm_sqr();
            acc += phase_factor(nu, w) * q;
        }
        acc
    }

    #[test]
    fn number_state_matches_weighted_sum() {
        let fun = driven(1.0, 1.3, c(0.4, -0.3), 0.2, c(0.5, 0.1));
        for n in [0u32, 1, 4] {
            for nu in [c(0.7, 0.0), c(-1.9, 0.0), c(0.3, 0.4)] {
                let a = char_number(&fun, n, nu).unwrap();
                let b = brute_number(&fun, n, nu);
                assert!((a - b).norm() < 1e-12, "n={n} ν={nu}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn thermal_is_geometric_average_of_number_states() {
        let fun = driven(1.0, 0.8, c(0.3, 0.2), 0.1, c(0.2, 0.0));
        let beta = 1.7;
        let w = (-beta * 1.0f64).exp();
        for nu in [c(0.9, 0.0), c(0.0, 0.6), c(2.2, -0.1)] {
            let direct: Complex<f64> = (0..200u32)
                .map(|n| char_number(&fun, n, nu).unwrap() * ((1.0 - w) * w.powi(n as i32)))
                .sum();
            let got = char_thermal(&fun, beta, nu).unwrap();
            assert!((got - direct).norm() < 1e-12, "{got} vs {direct}");
        }
    }

    #[test]
    fn zero_temperature_limit_is_ground_state() {
        let fun = driven(1.2, 1.0, c(0.5, 0.5), 0.0, c(0.0, 0.0));
        let nu = c(0.8, 0.1);
        let a = char_thermal(&fun, f64::INFINITY, nu).unwrap();
        let b = char_number(&fun, 0, nu).unwrap();
        assert!((a - b).norm() < 1e-15);
        let huge = char_thermal(&fun, 800.0, nu).unwrap();
        assert!((huge - b).norm() < 1e-14);
    }

    #[test]
    fn boundary_part_equals_thermal_without_source() {
        let fun = DriveFunctionals::undriven(1.0, 1.4);
        for nu in [c(0.2, 0.0), c(3.1, 0.0), c(0.0, 0.9)] {
            assert_eq!(
                char_boundary(1.0, 1.4, 2.0, nu).unwrap(),
                char_thermal(&fun, 2.0, nu).unwrap()
            );
        }
    }

    #[test]
    fn jarzynski_ratio_for_undriven_ramp() {
        let (w0, wt, beta) = (1.0, 1.6, 0.9);
        let got = char_boundary(w0, wt, beta, c(0.0, beta)).unwrap();
        let expected = (-beta * (wt - w0) / 2.0).exp() * (1.0 - (-beta * w0).exp()) / (1.0 - (-beta * wt).exp());
        assert!((got - c(expected, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn thermal_rejects_divergent_arguments() {
        // Frequency drops, so ν = 5i makes |q| ≥ 1 for small β.
        assert!(matches!(
            char_boundary(1.0, 0.5, 0.1, c(0.0, 5.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(char_boundary(1.0, 0.5, 0.0, c(1.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn coherent_matches_bessel_form_without_frequency_change() {
        let f = c(0.4, 0.0);
        let fun = driven(1.1, 1.1, c(0.9, -0.4), 0.0, f);
        let a = c(1.3, 0.7);
        for &nu in &[0.3, 1.7, 4.0] {
            let got = char_coherent(&fun, a, c(nu, 0.0)).unwrap();
            let arg = 4.0 * a.norm() * fun.eta.norm() * (nu * fun.omega_final / 2.0).sin().abs();
            let pre = ln_char_number(&fun, 0, c(nu, 0.0)).unwrap().exp();
            let expected = pre * arg.bessel_j0();
            assert!((got - expected).norm() < 1e-12, "ν={nu}: {got} vs {expected}");
        }
    }

    /// Complex `J0` by its power series (adequate for small arguments).
    fn j0_series(w: Complex<f64>) -> Complex<f64> {
        let q = -(w * w) / 4.0;
        let mut term = c(1.0, 0.0);
        let mut sum = term;
        for k in 1..80 {
            term = term * q / ((k * k) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn coherent_matches_generating_function_with_frequency_change() {
        let fun = driven(1.0, 1.25, c(0.3, 0.2), 0.05, c(0.3, -0.1));
        let a = c(0.8, -0.4);
        let m = a.norm_sqr();
        for nu in [c(0.6, 0.0), c(2.3, 0.0), c(0.4, 0.3)] {
            let got = char_coherent(&fun, a, nu).unwrap();
            let t = (imag(1.0) * nu * fun.delta).exp() * m;
            let x = laguerre_arg(fun.rapidity, nu * fun.omega_final);
            let pre = ln_char_number(&fun, 0, nu).unwrap().exp();
            let expected = pre * (t - m).exp() * j0_series((x * t).sqrt() * 2.0);
            assert!((got - expected).norm() < 1e-12, "ν={nu}: {got} vs {expected}");
        }
    }

    #[test]
    fn coherent_series_reports_non_convergence() {
        let fun = driven(1.0, 1.0, c(0.5, 0.0), 0.0, c(0.1, 0.0));
        let err = char_coherent_with(&fun, c(6.0, 0.0), c(1.0, 0.0), 1e-14, 10);
        assert!(matches!(err, Err(Error::Convergence { terms: 10, .. })));
    }

    #[test]
    fn total_is_product_and_curve_is_continuous() {
        let funs = vec![
            driven(1.0, 1.0, c(0.8, 0.1), 0.0, c(0.2, 0.0)),
            driven(2.0, 2.3, c(0.5, -0.6), 0.0, c(0.2, 0.0)),
        ];
        let states = vec![InitialState::Number { n: 2 }, InitialState::Thermal { beta: 1.0 }];
        let nu = c(0.9, 0.0);
        let prod = char_mode(&funs[0], &states[0], nu).unwrap() * char_mode(&funs[1], &states[1], nu).unwrap();
        assert!((char_total(&funs, &states, nu).unwrap() - prod).norm() < 1e-14);
        // A number state with n > 0 has real zeros; use the ground state here.
        let smooth = vec![InitialState::Number { n: 0 }, states[1]];
        let grid: Vec<f64> = (0..400).map(|k| k as f64 * 0.02).collect();
        let curve = cumulant_curve(&funs, &smooth, &grid).unwrap();
        for w in curve.windows(2) {
            assert!((w[1].im - w[0].im).abs() < 1.0);
        }
        assert!(char_total(&funs, &states[..1], nu).is_err());
    }

    #[test]
    fn expm1_c_is_accurate_near_zero() {
        let u = c(1e-12, -3e-13);
        let e = expm1_c(u);
        assert!((e - u).norm() < 1e-24);
    }
}
