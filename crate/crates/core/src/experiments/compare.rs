//! Approximation-error experiments: the nonlinear evolution against the
//! free wave propagator and against the dispersive propagator, with fitted
//! exponents in time and in the scaling parameter.

use super::family::{generate_family, DataFamily};
use super::fit::fit_powerlaw;
use super::report::{ExperimentReport, Series};
use super::{sized_box, ExperimentError};
use crate::dynamics::{default_dt, evolve_gp, SolverConfig, StopReason, Trajectory};
use crate::field::{SpectralField, VectorField};
use crate::grid::make_grid;
use crate::linear::{leps_propagate, wave_propagate, LinearPair};
use crate::lp::{hs_norm, hs_norm_pair, split_low_high};
use crate::madelung::{from_hydro, to_hydro, HydroState};
use rayon::prelude::*;

#[derive(Clone, Copy, Debug)]
pub struct CompareConfig {
    pub dim: usize,
    pub n: usize,
    pub family: DataFamily,
    pub t_min: f64,
    pub t_max: f64,
    /// Sobolev index of the data class; errors are measured in `H^{s-2}`
    /// (and in the split norms for the dispersive comparison).
    pub s: f64,
    /// Explicit box override; `None` applies the sizing rule.
    pub box_length: Option<f64>,
}

struct EpsRow {
    eps: f64,
    t: f64,
    err_wave: f64,
    err_leps: f64,
    err_leps_split: f64,
}

/// Evolve one parameter point and measure both linear-model errors at the
/// snapshot times closest to the requested grid.
fn run_point(
    cfg: &CompareConfig,
    eps: f64,
    t_grid: &[f64],
) -> Result<Vec<EpsRow>, ExperimentError> {
    let l = cfg
        .box_length
        .unwrap_or_else(|| sized_box(cfg.family.support_diameter(), cfg.t_max));
    let grid = make_grid(cfg.dim, cfg.n, l)?;
    let data = generate_family(&cfg.family, &grid);
    let mut state0 = HydroState {
        a: data.a0.clone(),
        u: data.u0.clone(),
        eps,
        potential: true,
    };
    let psi0 = from_hydro(&mut state0)?;
    let dt = default_dt(&grid, eps);
    let log_every = ((cfg.t_min / 20.0) / dt).round().max(1.0) as usize;
    let cfg_solver = SolverConfig::new(dt, cfg.t_max).with_log_every(log_every);
    let traj: Trajectory<SpectralField> = evolve_gp(&psi0, eps, &cfg_solver)?;
    if traj.stop != StopReason::Completed {
        return Err(ExperimentError::HorizonViolation { eps, t: traj.times[traj.times.len() - 1] });
    }
    // the density band is the horizon guard
    for log in &traj.logs {
        let lo = log.min_modulus * log.min_modulus;
        let hi = log.max_modulus * log.max_modulus;
        if lo < crate::madelung::DENSITY_BAND.0 || hi > crate::madelung::DENSITY_BAND.1 {
            return Err(ExperimentError::HorizonViolation { eps, t: log.t });
        }
    }

    let mut rows = Vec::new();
    for &t_req in t_grid {
        let (t_snap, snap) = traj.nearest(t_req);
        let mut psi_t = snap.clone();
        let nl = to_hydro(&mut psi_t, eps)?;
        let mut pair0 = LinearPair { a: data.a0.clone(), u: data.u0.clone() };
        let mut wave = wave_propagate(&mut pair0, t_snap);
        let mut leps = leps_propagate(&mut pair0, t_snap, eps);

        let mut nl_a = nl.a;
        let mut nl_u = nl.u;
        let mut da_w = nl_a.sub(&mut wave.a);
        let mut du_w = diff_vec(&mut nl_u, &mut wave.u);
        let err_wave = hs_norm_pair(&mut da_w, &mut du_w, cfg.s - 2.0);

        let mut da_l = nl_a.sub(&mut leps.a);
        let mut du_l = diff_vec(&mut nl_u, &mut leps.u);
        let err_leps = hs_norm_pair(&mut da_l, &mut du_l, cfg.s - 2.0);

        // split norm: ||(a~, u~_low)||_{H^{s-1}} + (1/eps) ||u~_high||_{H^{s-2}}
        let mut low_sq = hs_norm(&mut da_l, cfg.s - 1.0).powi(2);
        let mut high_sq = 0.0;
        for comp in &mut du_l.comps {
            let (mut lo, mut hi) = split_low_high(comp, eps);
            low_sq += hs_norm(&mut lo, cfg.s - 1.0).powi(2);
            high_sq += hs_norm(&mut hi, cfg.s - 2.0).powi(2);
        }
        let err_leps_split = low_sq.sqrt() + high_sq.sqrt() / eps;

        rows.push(EpsRow { eps, t: t_snap, err_wave, err_leps, err_leps_split });
    }
    Ok(rows)
}

fn diff_vec(a: &mut VectorField, b: &mut VectorField) -> VectorField {
    VectorField::from_comps(
        a.comps
            .iter_mut()
            .zip(b.comps.iter_mut())
            .map(|(x, y)| x.sub(y))
            .collect(),
    )
    .expect("matching dims")
}

fn collect_rows(
    cfg: &CompareConfig,
    eps_list: &[f64],
    t_grid: &[f64],
) -> Result<Vec<EpsRow>, ExperimentError> {
    let results: Vec<Result<Vec<EpsRow>, ExperimentError>> = eps_list
        .par_iter()
        .map(|&eps| run_point(cfg, eps, t_grid))
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn nearest_value(values: &[f64], target: f64) -> f64 {
    let mut best = values[0];
    for &v in values {
        if (v - target).abs() < (best - target).abs() {
            best = v;
        }
    }
    best
}

/// Nonlinear-vs-wave error sweep with exponent fits in `t` (at the eps
/// closest to 0.1) and in `eps` (at the time closest to 1).
pub fn error_vs_wave(
    cfg: &CompareConfig,
    eps_list: &[f64],
    t_grid: &[f64],
) -> Result<ExperimentReport, ExperimentError> {
    let rows = collect_rows(cfg, eps_list, t_grid)?;
    let mut report = ExperimentReport::new("error-vs-wave");
    report.param("dim", cfg.dim);
    report.param("n", cfg.n);
    report.param("s", cfg.s);
    report.param("eps_list", eps_list);
    report.param("family", cfg.family);
    report.series = Series::new(&["eps", "t", "err_wave", "err_leps", "err_leps_split"]);
    for r in &rows {
        report.series.push(vec![r.eps, r.t, r.err_wave, r.err_leps, r.err_leps_split]);
    }

    let eps_fix = nearest_value(eps_list, 0.1);
    let (ts, es): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.eps == eps_fix)
        .map(|r| (r.t, r.err_wave))
        .unzip();
    let fit_t = fit_powerlaw(&ts, &es, (ts[0] * 0.99, ts[ts.len() - 1] * 1.01))?;
    report.fits.insert("t_exponent".into(), fit_t);

    let t_fix = nearest_value(&rows.iter().map(|r| r.t).collect::<Vec<_>>(), 1.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| (r.t - t_fix).abs() < 0.05 * t_fix.max(1.0))
        .map(|r| (r.eps, r.err_wave))
        .unzip();
    let fit_eps = fit_powerlaw(&xs, &ys, (0.0, f64::INFINITY))?;
    report.fits.insert("eps_exponent".into(), fit_eps);

    report.verdict(
        "wave-error t-exponent in [0.8, 1.2]",
        (0.8..=1.2).contains(&fit_t.exponent),
        fit_t.exponent,
        format!("fit over t in [{:.3}, {:.3}] at eps = {eps_fix}", ts[0], ts[ts.len() - 1]),
    );
    report.verdict(
        "wave-error eps-exponent in [0.8, 1.2]",
        (0.8..=1.2).contains(&fit_eps.exponent),
        fit_eps.exponent,
        format!("fit over eps at t = {t_fix:.3}"),
    );
    Ok(report)
}

/// Same protocol against the dispersive propagator, with the low/high split
/// norm and the wave/dispersive crossover ratio as a function of time.
pub fn error_vs_leps(
    cfg: &CompareConfig,
    eps_list: &[f64],
    t_grid: &[f64],
) -> Result<ExperimentReport, ExperimentError> {
    assert!(cfg.dim <= 2, "dispersive comparison runs in dimension 1 or 2");
    let rows = collect_rows(cfg, eps_list, t_grid)?;
    let mut report = ExperimentReport::new("error-vs-leps");
    report.param("dim", cfg.dim);
    report.param("n", cfg.n);
    report.param("s", cfg.s);
    report.param("eps_list", eps_list);
    report.param("family", cfg.family);
    report.series = Series::new(&[
        "eps",
        "t",
        "err_wave",
        "err_leps",
        "err_leps_split",
        "ratio_wave_over_leps",
    ]);
    for r in &rows {
        let ratio = if r.err_leps > 0.0 { r.err_wave / r.err_leps } else { f64::INFINITY };
        report
            .series
            .push(vec![r.eps, r.t, r.err_wave, r.err_leps, r.err_leps_split, ratio]);
    }

    // crossover at the largest measured time of the smallest eps
    let eps_fix = nearest_value(eps_list, 0.1);
    let last = rows
        .iter()
        .filter(|r| r.eps == eps_fix)
        .max_by(|a, b| a.t.total_cmp(&b.t))
        .expect("at least one row");
    let ratio = if last.err_leps > 0.0 { last.err_wave / last.err_leps } else { f64::INFINITY };
    report.constants.insert("crossover_ratio".into(), ratio);
    report.constants.insert("crossover_t".into(), last.t);
    report.verdict(
        "dispersive model beats wave model 5x at the final time",
        ratio >= 5.0,
        ratio,
        format!("err_wave / err_leps at eps = {eps_fix}, t = {:.3}", last.t),
    );

    // fitted t-exponent of the low-frequency dispersive error
    let (ts, es): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.eps == eps_fix)
        .map(|r| (r.t, r.err_leps_split))
        .unzip();
    if let Ok(fit) = fit_powerlaw(&ts, &es, (ts[0] * 0.99, ts[ts.len() - 1] * 1.01)) {
        report.fits.insert("split_t_exponent".into(), fit);
    }
    Ok(report)
}
