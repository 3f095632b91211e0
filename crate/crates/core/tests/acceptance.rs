//! Acceptance suite: one test per numbered criterion, each printing a
//! PASS/FAIL line. Criterion 10 (byte-identical reruns of CSV and SVG
//! artifacts) lives in the command-line crate, next to the code that writes
//! those files.
//!
//! Tolerances are pinned here, with their origin:
//!
//! | constant | basis |
//! |----------|-------|
//! | order ratio [3.5, 4.5]   | second-order stepping against a dt/8 reference (63/15 = 4.2 ideal) |
//! | conservation 1e-8        | split-step drift measured ~4e-11 at dt = 1e-4; 1e-8 leaves margin |
//! | engine agreement 1e-3    | both engines are O(dt^2); measured discrepancy ~1e-6 |
//! | exponent bands           | asymptotic laws measured at desk scale with finite-window bias |

use gpwave::dynamics::*;
use gpwave::experiments::*;
use gpwave::grid::make_grid;
use gpwave::lp::{
    build_partition, gamma_weighted, sobolev_norm, split_low_high, besov_norm, LrIndex,
    SobolevMethod,
};
use gpwave::madelung::{from_hydro, to_augmented, to_hydro, BNormalization, HydroState};
use std::time::Instant;

/// Strang global error ratio under dt halving, measured against a dt/8
/// reference on the same data.
const ORDER_BAND: (f64, f64) = (3.5, 4.5);
/// Relative drift budget for conserved quantities over 1e4 steps.
const CONSERVATION_TOL: f64 = 1e-8;
/// Engine H1 agreement through the hydrodynamic transform.
const ENGINE_TOL: f64 = 1e-3;
/// Fitted-exponent band for the wave-model error in t and eps.
const THM2_BAND: (f64, f64) = (0.8, 1.2);
/// Crossover requirement: wave error at least this multiple of the
/// dispersive-model error.
const CROSSOVER_FACTOR: f64 = 5.0;
/// Quadratic amplitude scaling: amplitude x1/10 sends errors x1/100,
/// within 30 percent.
const QUADRATIC_BAND: (f64, f64) = (70.0, 130.0);
/// Travelling-wave residual budget (closed form is exact; roundoff only).
const SOLITON_RESIDUAL_TOL: f64 = 1e-8;
const SOLITON_SPEED_TOL: f64 = 1e-3;
const SOLITON_CROSSOVER_BAND: (f64, f64) = (-2.3, -1.7);

fn acceptance_family(amplitude: f64) -> DataFamily {
    DataFamily { kind: FamilyKind::Gaussian, amplitude, width: 2.0, seed: 3, norm_s: 4.0 }
}

fn report_line(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "{} criterion {:02}: {} ({})",
        if pass { "PASS" } else { "FAIL" },
        id,
        name,
        detail
    );
}

fn gp_run_psi0() -> gpwave::field::SpectralField {
    let grid = make_grid(1, 1024, 40.0).unwrap();
    let data = generate_family(&acceptance_family(0.6), &grid);
    let mut st = HydroState { a: data.a0, u: data.u0, eps: 0.3, potential: true };
    from_hydro(&mut st).unwrap()
}

#[test]
fn criterion_01_integrator_order() {
    let started = Instant::now();
    let eps = 0.3;
    let psi0 = gp_run_psi0();
    let run = |dt: f64| {
        let cfg = SolverConfig::new(dt, 1.0).with_log_every(usize::MAX);
        evolve_gp(&psi0, eps, &cfg).unwrap().snapshots.pop().unwrap()
    };
    let mut reference = run(1e-3 / 8.0);
    let err = |dt: f64, reference: &mut gpwave::field::SpectralField| {
        let mut s = run(dt);
        let mut d = s.sub(reference);
        d.l2_norm()
    };
    let ratio = err(1e-3, &mut reference) / err(5e-4, &mut reference);
    let elapsed = started.elapsed().as_secs_f64();
    let pass = (ORDER_BAND.0..=ORDER_BAND.1).contains(&ratio) && elapsed < 30.0;
    report_line(
        1,
        "Strang order ratio under dt halving",
        pass,
        &format!("ratio {ratio:.3}, runtime {elapsed:.1} s"),
    );
    assert!(pass, "order ratio {ratio} or runtime {elapsed} s out of budget");
}

#[test]
fn criterion_02_conservation() {
    let eps = 0.3;
    let psi0 = gp_run_psi0();
    // 1e4 steps of the criterion-1 run (dt = 1e-4 over T = 1)
    let cfg = SolverConfig::new(1e-4, 1.0).with_log_every(500);
    let traj = evolve_gp(&psi0, eps, &cfg).unwrap();
    assert_eq!(traj.logs.last().unwrap().step, 10_000);
    let e0 = traj.logs[0].energy;
    let e_drift =
        traj.logs.iter().map(|l| (l.energy - e0).abs() / e0).fold(0.0f64, f64::max);
    let mut g_drift = 0.0f64;
    let mut g0 = None;
    for snap in &traj.snapshots {
        let mut psi = snap.clone();
        let mut aug = to_augmented(&mut psi, eps, BNormalization::DynaSlow).unwrap();
        let g = gamma_weighted(&mut aug, 0).unwrap();
        let g0 = *g0.get_or_insert(g);
        g_drift = g_drift.max((g - g0).abs() / g0);
    }
    let pass = e_drift < CONSERVATION_TOL && g_drift < CONSERVATION_TOL;
    report_line(
        2,
        "energy and weighted-functional conservation",
        pass,
        &format!("energy drift {e_drift:.2e}, Gamma0 drift {g_drift:.2e} over 1e4 steps"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_engine_equivalence() {
    let started = Instant::now();
    let eps = 0.3;
    let mut worst = 0.0f64;
    for (dim, n) in [(1usize, 1024usize), (2usize, 256usize)] {
        let fam = acceptance_family(0.4);
        let l = sized_box(fam.support_diameter(), 1.0);
        let grid = make_grid(dim, n, l).unwrap();
        let data = generate_family(&fam, &grid);
        let mut st = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
        let psi0 = from_hydro(&mut st).unwrap();
        let dt = default_dt(&grid, eps);
        let solver = SolverConfig::new(dt, 1.0).with_log_every(usize::MAX);
        let gp = evolve_gp(&psi0, eps, &solver).unwrap();
        let hydro0 = HydroState { a: data.a0, u: data.u0, eps, potential: true };
        let hy = evolve_hydro(&hydro0, &solver).unwrap();
        let mut psi_t = gp.snapshots.last().unwrap().clone();
        let mut via_gp = to_hydro(&mut psi_t, eps).unwrap();
        let hy_t = hy.snapshots.last().unwrap();
        let mut da = via_gp.a.sub(&mut hy_t.a.clone());
        let mut dsq = gpwave::lp::hs_norm(&mut da, 1.0).powi(2);
        for (x, y) in via_gp.u.comps.iter_mut().zip(hy_t.u.comps.iter()) {
            let mut d = x.sub(&mut y.clone());
            dsq += gpwave::lp::hs_norm(&mut d, 1.0).powi(2);
        }
        let mut ha = hy_t.a.clone();
        let mut hu = hy_t.u.clone();
        let scale = pair_norm_hsp1_hs(&mut ha, &mut hu, 0.0);
        worst = worst.max(dsq.sqrt() / scale);
    }
    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst < ENGINE_TOL && elapsed < 300.0;
    report_line(
        3,
        "split-step and pseudo-spectral engines agree",
        pass,
        &format!("worst H1 discrepancy {worst:.2e}, runtime {elapsed:.0} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_wave_error_scaling() {
    let started = Instant::now();
    let cfg = CompareConfig {
        dim: 1,
        n: 1024,
        family: acceptance_family(0.8),
        t_min: 0.25,
        t_max: 2.0,
        s: 4.0,
        box_length: None,
    };
    let eps_list = [0.05, 0.1, 0.2, 0.4];
    let t_grid = geometric_times(0.25, 2.0);
    let rep = error_vs_wave(&cfg, &eps_list, &t_grid).unwrap();
    let ft = rep.fits["t_exponent"].exponent;
    let fe = rep.fits["eps_exponent"].exponent;
    let elapsed = started.elapsed().as_secs_f64();
    let pass = (THM2_BAND.0..=THM2_BAND.1).contains(&ft)
        && (THM2_BAND.0..=THM2_BAND.1).contains(&fe)
        && elapsed < 600.0;
    report_line(
        4,
        "wave-model error scales linearly in t and eps",
        pass,
        &format!("t exponent {ft:.3}, eps exponent {fe:.3}, runtime {elapsed:.0} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_05_dispersive_model_crossover() {
    // Measured at the stated parameters (eps = 0.1, dim 2, t = 8) with a
    // spectrally narrow pulse so that both errors are quadratic-dominated.
    // The ratio clause is asserted exactly as stated; see the verdict
    // detail for the measured value.
    let mk = |amplitude: f64| CompareConfig {
        dim: 2,
        n: 256,
        family: DataFamily {
            kind: FamilyKind::Gaussian,
            amplitude,
            width: 6.0,
            seed: 11,
            norm_s: 4.0,
        },
        t_min: 1.0,
        t_max: 8.0,
        s: 4.0,
        box_length: None,
    };
    let t_grid = geometric_times(1.0, 8.0);
    let rep_a = error_vs_leps(&mk(0.5), &[0.1], &t_grid).unwrap();
    let rep_b = error_vs_leps(&mk(0.05), &[0.1], &t_grid).unwrap();
    let ratio = rep_a.constants["crossover_ratio"];
    let last = |rep: &ExperimentReport, col: &str| {
        let c = rep.series.column(col);
        *c.last().unwrap()
    };
    let wave_scale = last(&rep_a, "err_wave") / last(&rep_b, "err_wave");
    let leps_scale = last(&rep_a, "err_leps") / last(&rep_b, "err_leps");

    let quad_pass = (QUADRATIC_BAND.0..=QUADRATIC_BAND.1).contains(&wave_scale)
        && (QUADRATIC_BAND.0..=QUADRATIC_BAND.1).contains(&leps_scale);
    let ratio_pass = ratio >= CROSSOVER_FACTOR;
    report_line(
        5,
        "dispersive model beats the wave model 5x at t = 8",
        ratio_pass && quad_pass,
        &format!(
            "wave/dispersive error ratio {ratio:.2} (needs >= {CROSSOVER_FACTOR}); \
             amplitude scaling wave x{wave_scale:.1}, dispersive x{leps_scale:.1}"
        ),
    );
    assert!(
        quad_pass,
        "quadratic amplitude dependence violated: wave x{wave_scale:.1}, dispersive x{leps_scale:.1}"
    );
    // The spec pins the dispersive rate sqrt2 |xi| sqrt(1 + eps^2 |xi|^2),
    // whose low-frequency phase error against the nonlinear dynamics equals
    // the free wave equation's at leading order; the measured ratio
    // therefore sits near 1 at every admissible amplitude and this clause
    // cannot be met. It is asserted as stated rather than weakened.
    assert!(
        ratio_pass,
        "wave/dispersive error ratio {ratio:.3} below the required {CROSSOVER_FACTOR}"
    );
}

#[test]
fn criterion_06_dispersive_decay_exponents() {
    let started = Instant::now();
    let cases: [(&str, DecayConfig, (f64, f64)); 5] = [
        (
            "slowed group, dim 2",
            DecayConfig { dim: 2, n: 256, box_length: 110.0, eps: 0.01, mode: DecayMode::Ueps, r1: 0.5, r2: 3.5, t_window: (11.0, 48.0) },
            (-0.65, -0.35),
        ),
        (
            "slowed group, dim 3",
            DecayConfig { dim: 3, n: 64, box_length: 100.0, eps: 0.01, mode: DecayMode::Ueps, r1: 0.2, r2: 1.9, t_window: (19.0, 39.0) },
            (-1.2, -0.8),
        ),
        (
            "unslowed group, dim 2",
            DecayConfig { dim: 2, n: 256, box_length: 160.0, eps: 100.0, mode: DecayMode::Veps, r1: 0.1, r2: 2.2, t_window: (4.0, 11.5) },
            (-1.2, -0.8),
        ),
        (
            "unslowed group, dim 3",
            DecayConfig { dim: 3, n: 64, box_length: 130.0, eps: 100.0, mode: DecayMode::Veps, r1: 0.05, r2: 1.45, t_window: (8.0, 12.4) },
            (-1.7, -1.3),
        ),
        (
            "slowed group, dim 1",
            DecayConfig { dim: 1, n: 1024, box_length: 110.0, eps: 0.01, mode: DecayMode::Ueps, r1: 0.5, r2: 3.5, t_window: (11.0, 48.0) },
            (-0.1, 0.1),
        ),
    ];
    let mut all = true;
    let mut details = Vec::new();
    for (name, cfg, band) in cases {
        let rep = decay_exponent(&cfg).unwrap();
        let ex = rep.fits["decay_exponent"].exponent;
        let ok = (band.0..=band.1).contains(&ex);
        all &= ok;
        details.push(format!("{name}: {ex:+.3} in [{}, {}] {}", band.0, band.1, ok));
    }
    let elapsed = started.elapsed().as_secs_f64();
    all &= elapsed < 600.0;
    report_line(6, "sup-norm decay exponents", all, &format!("{}; runtime {elapsed:.0} s", details.join("; ")));
    assert!(all, "{details:?}");
}

#[test]
fn criterion_07_soliton_physics() {
    // residuals of the closed-form profiles at the swept speeds
    let grid = make_grid(1, 4096, 400.0).unwrap();
    let mut worst_residual = 0.0f64;
    for &eps in &[0.2, 0.4] {
        let c = (2.0f64 - eps * eps).sqrt();
        let sol = dark_soliton(&grid, c, eps).unwrap();
        worst_residual = worst_residual.max(sol.residual);
    }
    let cfg = SolitonConfig::default();
    let rep = soliton_shift(&cfg, &[0.4, 0.2828427124746190, 0.2, 0.1414213562373095]).unwrap();
    let speed_err = rep.constants["max_speed_rel_error"];
    let exponent = rep.fits["crossover_exponent"].exponent;
    let pass = worst_residual < SOLITON_RESIDUAL_TOL
        && speed_err < SOLITON_SPEED_TOL
        && (SOLITON_CROSSOVER_BAND.0..=SOLITON_CROSSOVER_BAND.1).contains(&exponent);
    report_line(
        7,
        "travelling-wave residual, speed and crossover",
        pass,
        &format!(
            "residual {worst_residual:.2e}, speed error {speed_err:.2e}, crossover exponent {exponent:+.3}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_08_littlewood_paley_suite() {
    let grid = make_grid(1, 1024, 25.0).unwrap();
    let part = build_partition(&grid).unwrap();

    // partition of unity over every lattice frequency under the cutoff
    let cutoff = grid.dealias_cutoff();
    let mut worst_pou = 0.0f64;
    for i in 0..grid.len() {
        let mut xi = [0.0f64; 3];
        grid.wavevector(i, &mut xi);
        let r = xi[0].abs();
        if r <= cutoff {
            worst_pou = worst_pou.max((part.partition_sum(r) - 1.0).abs());
        }
    }

    // quasi-orthogonality
    let mut u = random_bandlimited(&grid, 9, 0.8 * part.coverage_radius(), 1.0);
    let scale = u.l2_norm();
    let mut worst_qo = 0.0f64;
    for q in 0..=part.q_max {
        for p in 0..=part.q_max {
            if (p - q).abs() <= 1 {
                continue;
            }
            let mut dq = part.dyadic_block(&mut u, q, gpwave::lp::BlockKind::Delta).unwrap();
            let mut dpq = part.dyadic_block(&mut dq, p, gpwave::lp::BlockKind::Delta).unwrap();
            worst_qo = worst_qo.max(dpq.l2_norm() / scale);
        }
    }

    // direct-vs-blocks inside the calibrated band, 20 test functions
    let s = 2.0;
    let band = part.sobolev_equivalence_constant(s) * (1.0 + 1e-9);
    let mut worst_ratio = 1.0f64;
    for k in 0..20 {
        let mut f = random_bandlimited(&grid, 100 + k, 0.8 * part.coverage_radius(), 1.0);
        let d = sobolev_norm(&part, &mut f, s, SobolevMethod::Direct).value;
        let b = sobolev_norm(&part, &mut f, s, SobolevMethod::Blocks).value;
        worst_ratio = worst_ratio.max(d / b).max(b / d);
    }

    // high-frequency exchange constant bounded by the support constant
    let alpha = 0.75;
    let eps0 = gpwave::lp::CHI_FLAT * 3.0 / 8.0;
    let hf_bound = eps0.powf(-alpha) * (1.0 + 1e-9);
    let mut worst_hf = 0.0f64;
    for (i, &eps) in [0.05f64, 0.1, 0.2].iter().enumerate() {
        let mut f = random_bandlimited(&grid, 200 + i as u64, 0.8 * part.coverage_radius(), 1.0);
        let (_, mut fh) = split_low_high(&mut f, eps);
        if fh.l2_norm() < 1e-12 {
            continue;
        }
        let lhs = besov_norm(&part, &mut fh, 1.0, LrIndex::Finite(1.0)).value;
        let rhs = besov_norm(&part, &mut fh, 1.0 + alpha, LrIndex::Finite(1.0)).value;
        worst_hf = worst_hf.max(lhs / (eps.powf(alpha) * rhs));
    }

    let pass = worst_pou < 1e-10 && worst_qo < 1e-12 && worst_ratio <= band && worst_hf <= hf_bound;
    report_line(
        8,
        "dyadic partition, norm equivalence, exchange bound",
        pass,
        &format!(
            "partition {worst_pou:.1e}, orthogonality {worst_qo:.1e}, \
             equivalence {worst_ratio:.3} <= {band:.3}, exchange {worst_hf:.3} <= {hf_bound:.3}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_estimate_monitors() {
    // (a) energy-inequality ratio bounded and dt-stable
    let grid = make_grid(1, 1024, 40.0).unwrap();
    let fam = acceptance_family(0.7);
    let data = generate_family(&fam, &grid);
    let eps = 0.3;
    let mut st = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
    let psi0 = from_hydro(&mut st).unwrap();
    let dt = default_dt(&grid, eps);
    let ratio_at = |halving: f64| {
        let cfg = SolverConfig::new(dt / halving, 1.0).with_log_every((40.0 * halving) as usize);
        let traj = evolve_gp(&psi0, eps, &cfg).unwrap();
        let rep = monitor_prop1(&traj, &MonitorConfig { s_prime: 2, eps }).unwrap();
        rep.constants["max_ratio"]
    };
    let r1 = ratio_at(1.0);
    let r2 = ratio_at(2.0);
    let dt_stable = (r1 - r2).abs() / r1.abs().max(1e-300) < 0.10;
    let bounded = r1.is_finite() && r1.abs() < 100.0;

    // (b) commutator constant bounded over the blocks
    let part = build_partition(&grid).unwrap();
    let mut a = gpwave::field::SpectralField::from_real_fn(&grid, |x| {
        (1.0 + x[0] * x[0] / 8.0).recip()
    });
    let mut f = random_bandlimited(&grid, 21, 0.5 * part.coverage_radius(), 1.0);
    let comm = gpwave::lp::commutator_ratio_max(&part, &mut a, &mut f, 2.0).unwrap();
    let comm_ok = comm.is_finite() && comm < 50.0;

    // (c) space-time ratios bounded across the eps sweep
    let scfg = StrichartzConfig::two_d(128, 40.0);
    let srep = strichartz_ratio(&scfg, &[0.05, 0.1, 0.2]).unwrap();
    let spread = srep.constants["ratio_spread"];
    let strichartz_ok = spread.is_finite() && spread < 3.0;

    let pass = dt_stable && bounded && comm_ok && strichartz_ok;
    report_line(
        9,
        "estimate monitors stay bounded",
        pass,
        &format!(
            "energy-inequality ratio {r1:.3} (dt-halved {r2:.3}), commutator {comm:.3}, \
             space-time spread {spread:.3}"
        ),
    );
    assert!(pass);
}
