//! Two-point-measurement statistics from a propagated Fock-space unitary.

use num_complex::Complex;
use num_traits::Zero;

use super::matrix::displacement_matrix;
use super::propagate::{propagate_columns, OracleConfig, PropagationResult};
use crate::charfunc::InitialState;
use crate::error::{Error, Result};
use crate::protocol::{DriveProtocol, ModeSpec};
use crate::scalar::{Compensated, Real};
use crate::special::poisson_pmf;
use crate::workdist::{WorkAtom, WorkDistribution};

/// Cumulative initial weight after which further levels are dropped.
pub const INITIAL_MASS_CUTOFF: f64 = 1e-12;

/// Diagonal initial populations `p_i` on levels below the leak region,
/// with the omitted mass.
pub fn initial_populations<T: Real>(state: &InitialState<T>, omega_0: T, cfg: &OracleConfig<T>) -> Result<(Vec<(usize, T)>, T)> {
    let limit = cfg.leak_start();
    let cutoff = T::lit(INITIAL_MASS_CUTOFF);
    let mut pops = Vec::new();
    let mut mass = Compensated::new();
    match *state {
        InitialState::Number { n } => {
            let n = n as usize;
            if n >= limit {
                return Err(Error::Truncation(format!(
                    "initial level {n} lies in the top tenth of a {}-level basis; increase dim",
                    cfg.dim
                )));
            }
            pops.push((n, T::one()));
            mass.add(T::one());
        }
        InitialState::Thermal { beta } => {
            if !(beta > T::zero()) {
                return Err(Error::domain(format!("inverse temperature β = {beta} must be > 0")));
            }
            if beta.is_infinite() {
                pops.push((0, T::one()));
                mass.add(T::one());
            } else {
                let w = (-beta * omega_0).exp();
                let norm = -(-beta * omega_0).exp_m1();
                let mut p = norm;
                for i in 0..limit {
                    pops.push((i, p));
                    mass.add(p);
                    if T::one() - mass.value() < cutoff {
                        break;
                    }
                    p *= w;
                }
            }
        }
        InitialState::Coherent { amplitude } => {
            let m = amplitude.norm_sqr();
            for i in 0..limit {
                let p = poisson_pmf(i, m);
                pops.push((i, p));
                mass.add(p);
                if T::one() - mass.value() < cutoff && T::lit(i as f64) >= m {
                    break;
                }
            }
        }
    }
    let omitted = (T::one() - mass.value()).max(T::zero());
    if omitted > cfg.tail_tol {
        return Err(Error::Truncation(format!(
            "initial state leaves mass {omitted} above the usable {limit} levels; increase dim"
        )));
    }
    Ok((pops, omitted))
}

/// Work atoms `E′_j − E_i` with weights `p_i |⟨E′_j|U|i⟩|²`.
///
/// The final eigenbasis is the Fock basis when the source is off at `t`,
/// otherwise the displaced basis `D(α)|j⟩` with `α = −G(t)F/ω(t)` and
/// energies `ω(t)(j + ½) − G(t)²|F|²/ω(t)`.
pub fn tpm_distribution<T: Real>(
    prop: &PropagationResult<T>,
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    state: &InitialState<T>,
    t: T,
    cfg: &OracleConfig<T>,
) -> Result<WorkDistribution<T>> {
    let omega_0 = mode.omega(T::zero())?;
    let omega_t = mode.omega(t)?;
    let g = protocol.evaluate_switching(t)?;
    let (pops, _) = initial_populations(state, omega_0, cfg)?;

    let weighted_leak: T = pops
        .iter()
        .map(|&(i, p)| {
            prop.column_of(i)
                .map(|c| p * prop.leak[c])
                .ok_or_else(|| Error::domain(format!("level {i} was not propagated")))
        })
        .collect::<Result<Vec<T>>>()?
        .into_iter()
        .sum();
    if weighted_leak > cfg.leak_tol {
        return Err(Error::Truncation(format!(
            "state-weighted population {weighted_leak} reaches the top levels; increase dim"
        )));
    }

    let dim = prop.dim;
    let alpha = mode.coupling * (-g / omega_t);
    let shift = omega_t * alpha.norm_sqr();
    let basis = if g == T::zero() { None } else { Some(displacement_matrix(alpha, dim)) };

    let mut atoms = Vec::with_capacity(pops.len() * dim);
    for &(i, p) in &pops {
        let col = prop.u.col(prop.column_of(i).unwrap());
        let e_i = omega_0 * (T::lit(i as f64) + T::lit(0.5));
        for j in 0..dim {
            let amp = match &basis {
                None => col[j],
                Some(d) => {
                    let dj = d.col(j);
                    let mut acc = Complex::zero();
                    for m in 0..dim {
                        acc += dj[m].conj() * col[m];
                    }
                    acc
                }
            };
            let e_j = omega_t * (T::lit(j as f64) + T::lit(0.5)) - shift;
            atoms.push(WorkAtom {
                work: e_j - e_i,
                weight: p * amp.norm_sqr(),
            });
        }
    }
    Ok(WorkDistribution::from_atoms(atoms, format!("oracle:{state:?}")))
}

/// Propagates exactly the levels `state` needs and returns its work
/// distribution.
pub fn oracle_distribution<T: Real>(
    mode: &ModeSpec<T>,
    protocol: &DriveProtocol<T>,
    state: &InitialState<T>,
    t: T,
    cfg: &OracleConfig<T>,
) -> Result<WorkDistribution<T>> {
    let (pops, _) = initial_populations(state, mode.omega(T::zero())?, cfg)?;
    let levels: Vec<usize> = pops.iter().map(|p| p.0).collect();
    let prop = propagate_columns(mode, protocol, t, cfg, &levels)?;
    tpm_distribution(&prop, mode, protocol, state, t, cfg)
}

/// `Σ q e^{iνW}` of an oracle distribution.
pub fn tpm_charfunc<T: Real>(dist: &WorkDistribution<T>, nu: Complex<T>) -> Complex<T> {
    dist.char_value(nu)
}
