//! One function per subcommand, each producing a [`Table`].

use rayon::prelude::*;

use quantum_work::casimir::{free_energy_difference, regularized_energy, zero_point_work};
use quantum_work::charfunc::{char_mode, ln_char_total, InitialState};
use quantum_work::moments::{cumulants_fd, default_fd_step, jarzynski, moments_zero_t, FdTolerance};
use quantum_work::oracle::oracle_distribution;
use quantum_work::protocol::{compute_functionals, DriveFunctionals};
use quantum_work::workdist::{dist_mode, weights_number, WeightMethod, WorkDistribution};
use quantum_work::{Error, Result, C64};

use crate::config::ScenarioConfig;
use crate::output::{Cell, Table};

/// A table plus, for `verify`, the reason the check failed.
#[derive(Debug)]
pub struct Report {
    pub table: Table,
    pub failure: Option<String>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

fn functionals_at(cfg: &ScenarioConfig, t: f64) -> Result<Vec<DriveFunctionals<f64>>> {
    cfg.modes
        .par_iter()
        .map(|m| compute_functionals(m, &cfg.protocol, t, &cfg.evaluation.quadrature))
        .collect()
}

fn state_label(s: &InitialState<f64>) -> String {
    match *s {
        InitialState::Number { n } => format!("number(n={n})"),
        InitialState::Thermal { beta } => format!("thermal(beta={beta})"),
        InitialState::Coherent { amplitude } => format!("coherent(a={}{:+}i)", amplitude.re, amplitude.im),
    }
}

/// Drive functionals of every mode over the time grid.
pub fn drive(cfg: &ScenarioConfig) -> Result<Report> {
    let ts = cfg.evaluation.t_grid.values();
    let per_mode: Vec<Vec<Vec<Cell>>> = cfg
        .modes
        .par_iter()
        .map(|m| {
            ts.iter()
                .map(|&t| {
                    let f = compute_functionals(m, &cfg.protocol, t, &cfg.evaluation.quadrature)?;
                    let omega = m.omega(t)?;
                    Ok(vec![
                        m.label.clone().into(),
                        t.into(),
                        omega.into(),
                        f.switching.into(),
                        f.zeta.into(),
                        f.xi.re.into(),
                        f.xi.im.into(),
                        f.alpha.re.into(),
                        f.alpha.im.into(),
                        f.eta.re.into(),
                        f.eta.im.into(),
                        f.rapidity.into(),
                        f.theta.into(),
                    ])
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(vec![
        "mode", "t", "omega", "switching", "zeta", "xi_re", "xi_im", "alpha_re", "alpha_im", "eta_re", "eta_im",
        "rapidity", "theta",
    ]);
    per_mode.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table.into())
}

/// Characteristic functions per mode and of the joint state on the ν grid.
pub fn cf(cfg: &ScenarioConfig) -> Result<Report> {
    let funs = functionals_at(cfg, cfg.evaluation.t)?;
    let states = cfg.states();
    let nus = cfg.evaluation.nu_grid.values();
    let mut table = Table::new(vec!["target", "nu", "re", "im"]);
    let mut total = vec![C64::new(1.0, 0.0); nus.len()];
    for ((m, f), s) in cfg.modes.iter().zip(&funs).zip(&states) {
        for (k, &nu) in nus.iter().enumerate() {
            let g = char_mode(f, s, C64::new(nu, 0.0))?;
            total[k] *= g;
            table.push(vec![m.label.clone().into(), nu.into(), g.re.into(), g.im.into()]);
        }
    }
    for (&nu, g) in nus.iter().zip(total) {
        table.push(vec!["total".into(), nu.into(), g.re.into(), g.im.into()]);
    }
    Ok(table.into())
}

fn distributions(cfg: &ScenarioConfig, funs: &[DriveFunctionals<f64>]) -> Result<Vec<WorkDistribution<f64>>> {
    let states = cfg.states();
    funs.par_iter()
        .zip(states.par_iter())
        .map(|(f, s)| dist_mode(f, s, cfg.evaluation.eps))
        .collect()
}

/// Largest joint distribution `dist` will assemble.
const MAX_JOINT_ATOMS: usize = 5_000_000;

fn joint(dists: &[WorkDistribution<f64>]) -> Result<WorkDistribution<f64>> {
    let mut acc = dists[0].clone();
    for d in &dists[1..] {
        if acc.atoms.len().saturating_mul(d.atoms.len()) > MAX_JOINT_ATOMS {
            return Err(Error::Range(format!(
                "joint distribution would need {} × {} atoms; raise eps or use fewer modes",
                acc.atoms.len(),
                d.atoms.len()
            )));
        }
        acc = acc.convolve(d);
    }
    Ok(acc)
}

/// Work atoms per mode and of the joint state.
pub fn dist(cfg: &ScenarioConfig) -> Result<Report> {
    let funs = functionals_at(cfg, cfg.evaluation.t)?;
    let dists = distributions(cfg, &funs)?;
    let total = joint(&dists)?;
    let mut table = Table::new(vec!["target", "work", "weight", "mass_deficit"]);
    let labelled = cfg.modes.iter().map(|m| m.label.as_str()).zip(&dists).chain([("total", &total)]);
    for (label, d) in labelled {
        for a in &d.atoms {
            table.push(vec![label.into(), a.work.into(), a.weight.into(), d.mass_deficit.into()]);
        }
    }
    Ok(table.into())
}

/// `q_s(n, z)` curves over the z grid.
pub fn weights(cfg: &ScenarioConfig) -> Result<Report> {
    let w = &cfg.evaluation.weights;
    let zs: Vec<f64> = if w.z_points == 1 {
        vec![w.z_max]
    } else {
        (0..w.z_points).map(|k| w.z_max * k as f64 / (w.z_points - 1) as f64).collect()
    };
    let s_range = w.s_range();
    let columns: Vec<Vec<(i64, f64)>> = zs
        .par_iter()
        .map(|&z| weights_number(w.n, z, s_range.clone(), WeightMethod::Auto))
        .collect::<Result<_>>()?;
    let mut table = Table::new(vec!["n", "s", "z", "q"]);
    for (k, s) in s_range.enumerate() {
        for (z, col) in zs.iter().zip(&columns) {
            table.push(vec![w.n.into(), s.into(), (*z).into(), col[k].1.into()]);
        }
    }
    Ok(table.into())
}

/// Cumulants from the zero-temperature closed form, from finite
/// differences of `ln G` for the configured states, and from the atoms.
pub fn moments(cfg: &ScenarioConfig) -> Result<Report> {
    let ev = &cfg.evaluation;
    let funs = functionals_at(cfg, ev.t)?;
    let states = cfg.states();
    let order = ev.cumulant_order;
    let omega_max = funs.iter().fold(0.0f64, |m, f| m.max(f.omega_initial).max(f.omega_final));
    let step = ev.fd_step.unwrap_or_else(|| default_fd_step(order, omega_max));
    let fd = cumulants_fd(|nu| ln_char_total(&funs, &states, nu), order, step, FdTolerance::default())?;
    let total = joint(&distributions(cfg, &funs)?)?;
    let atom_cumulants = {
        let mu2 = total.variance();
        [total.mean(), mu2, total.central_moment(3), total.central_moment(4) - 3.0 * mu2 * mu2]
    };
    let analytic = moments_zero_t(&funs);
    let mut table = Table::new(vec!["method", "order", "cumulant", "error"]);
    for k in 0..order {
        table.push(vec!["ground_state_closed_form".into(), (k + 1).into(), analytic.cumulants[k].into(), 0.0.into()]);
    }
    for k in 0..order {
        table.push(vec!["finite_difference".into(), (k + 1).into(), fd.values[k].into(), fd.errors[k].into()]);
    }
    for (k, c) in atom_cumulants.iter().enumerate().take(order) {
        table.push(vec!["atoms".into(), (k + 1).into(), (*c).into(), total.mass_deficit.into()]);
    }
    Ok(table.into())
}

/// Both sides of the Jarzynski equality, per mode and jointly, for thermal
/// initial states at the evaluation β.
pub fn jarzynski_cmd(cfg: &ScenarioConfig) -> Result<Report> {
    let ev = &cfg.evaluation;
    let funs = functionals_at(cfg, ev.t)?;
    let beta = ev.beta.value();
    let mut table = Table::new(vec![
        "target",
        "beta",
        "lhs",
        "partition_ratio",
        "delta_f",
        "delta_f_partition",
        "difference",
    ]);
    let targets = cfg
        .modes
        .iter()
        .zip(&funs)
        .map(|(m, f)| (m.label.as_str(), std::slice::from_ref(f)))
        .chain([("total", &funs[..])]);
    for (label, fs) in targets {
        let j = jarzynski(fs, beta)?;
        table.push(vec![
            label.into(),
            beta.into(),
            j.lhs.into(),
            j.partition_ratio.into(),
            j.delta_f.into(),
            j.delta_f_partition.into(),
            j.difference.into(),
        ]);
    }
    Ok(table.into())
}

/// Regularised zero-point energies, work and free-energy change from the
/// initial separation to each listed one.
pub fn casimir(cfg: &ScenarioConfig) -> Result<Report> {
    let c = &cfg.evaluation.casimir;
    let beta = c.beta.value();
    let initial = c.cavity(c.initial_separation)?;
    let rows: Vec<Vec<Cell>> = c
        .separations
        .par_iter()
        .map(|&d| {
            let cav = c.cavity(d)?;
            let r = regularized_energy(&cav)?;
            let work = zero_point_work(&initial, &cav)?;
            let delta_f = if beta.is_finite() {
                free_energy_difference(&initial, &cav, beta)?
            } else {
                work
            };
            Ok(vec![
                d.into(),
                r.energy.into(),
                r.coefficient().into(),
                r.error_estimate.into(),
                work.into(),
                delta_f.into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(vec!["d", "energy", "coefficient", "error_estimate", "work", "delta_f"]);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table.into())
}

/// Compares the closed-form characteristic functions with the brute-force
/// two-point-measurement oracle.
pub fn verify(cfg: &ScenarioConfig) -> Result<Report> {
    let ev = &cfg.evaluation;
    let funs = functionals_at(cfg, ev.t)?;
    let states = cfg.states();
    let oracle_cfg = ev.oracle.to_config();
    let nus = ev.nu_grid.values();
    let oracles: Vec<WorkDistribution<f64>> = cfg
        .modes
        .par_iter()
        .zip(states.par_iter())
        .map(|(m, s)| oracle_distribution(m, &cfg.protocol, s, ev.t, &oracle_cfg))
        .collect::<Result<_>>()?;
    let mut table = Table::new(vec!["target", "state", "max_abs_error", "tolerance", "oracle_atoms", "pass"]);
    let tol = ev.oracle.tolerance;
    let mut worst = 0.0f64;
    let mut worst_total = 0.0f64;
    let mut closed_total = vec![C64::new(1.0, 0.0); nus.len()];
    let mut oracle_total = closed_total.clone();
    for (((m, f), s), o) in cfg.modes.iter().zip(&funs).zip(&states).zip(&oracles) {
        let mut err = 0.0f64;
        for (k, &nu) in nus.iter().enumerate() {
            let nu = C64::new(nu, 0.0);
            let (g, h) = (char_mode(f, s, nu)?, o.char_value(nu));
            closed_total[k] *= g;
            oracle_total[k] *= h;
            err = err.max((g - h).norm());
        }
        worst = worst.max(err);
        table.push(vec![
            m.label.clone().into(),
            state_label(s).into(),
            err.into(),
            tol.into(),
            o.atoms.len().into(),
            (err <= tol).into(),
        ]);
    }
    for (g, h) in closed_total.iter().zip(&oracle_total) {
        worst_total = worst_total.max((g - h).norm());
    }
    let atoms: usize = oracles.iter().map(|o| o.atoms.len()).sum();
    table.push(vec![
        "total".into(),
        "product".into(),
        worst_total.into(),
        tol.into(),
        atoms.into(),
        (worst_total <= tol).into(),
    ]);
    let worst = worst.max(worst_total);
    let failure = (worst > tol).then(|| format!("oracle and closed form differ by {worst:e} (tolerance {tol:e})"));
    Ok(Report { table, failure })
}
