// Scratch: acceptance criteria 1-3 at their pinned scales.
use gpwave::dynamics::*;
use gpwave::experiments::*;
use gpwave::grid::make_grid;
use gpwave::madelung::{from_hydro, to_hydro, HydroState};
use std::time::Instant;

fn main() {
    // criterion 1: Strang order on 1-D n=1024 gaussian run, eps 0.3, T=1
    let t0 = Instant::now();
    let grid = make_grid(1, 1024, 40.0).unwrap();
    let fam = DataFamily { kind: FamilyKind::Gaussian, amplitude: 0.6, width: 2.0, seed: 3, norm_s: 4.0 };
    let data = generate_family(&fam, &grid);
    let eps = 0.3;
    let mut st = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
    let psi0 = from_hydro(&mut st).unwrap();
    let run = |dt: f64| {
        let cfg = SolverConfig::new(dt, 1.0).with_log_every(usize::MAX);
        evolve_gp(&psi0, eps, &cfg).unwrap().snapshots.pop().unwrap()
    };
    let mut reference = run(1e-3 / 8.0);
    let e1 = { let mut s = run(1e-3); let mut d = s.sub(&mut reference); d.l2_norm() };
    let e2 = { let mut s = run(5e-4); let mut d = s.sub(&mut reference); d.l2_norm() };
    println!("c1: order ratio {:.3} (want [3.5,4.5]), elapsed {:?}", e1 / e2, t0.elapsed());

    // criterion 2: conservation over 1e4 steps at dt 1e-4 + Gamma0
    let t1 = Instant::now();
    let cfg = SolverConfig::new(1e-4, 1.0).with_log_every(500);
    let traj = evolve_gp(&psi0, eps, &cfg).unwrap();
    let e0 = traj.logs[0].energy;
    let edrift = traj.logs.iter().map(|l| (l.energy - e0).abs() / e0).fold(0.0f64, f64::max);
    let mut g0s = Vec::new();
    for snap in traj.snapshots.iter() {
        let mut psi = snap.clone();
        let mut aug = gpwave::madelung::to_augmented(&mut psi, eps, gpwave::madelung::BNormalization::DynaSlow).unwrap();
        g0s.push(gpwave::lp::gamma_weighted(&mut aug, 0).unwrap());
    }
    let gdrift = g0s.iter().map(|g| (g - g0s[0]).abs() / g0s[0]).fold(0.0f64, f64::max);
    println!("c2: energy drift {:.3e}, Gamma0 drift {:.3e} over {} steps, elapsed {:?}",
        edrift, gdrift, traj.logs.last().unwrap().step, t1.elapsed());

    // criterion 3: engine equivalence 1-D and 2-D
    for (dim, n) in [(1usize, 1024usize), (2, 256)] {
        let t2 = Instant::now();
        let l = sized_box(fam.support_diameter(), 1.0);
        let grid = make_grid(dim, n, l).unwrap();
        let fam2 = DataFamily { amplitude: 0.4, ..fam };
        let data = generate_family(&fam2, &grid);
        let mut st = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
        let psi0 = from_hydro(&mut st).unwrap();
        let dt = default_dt(&grid, eps);
        let solver = SolverConfig::new(dt, 1.0).with_log_every(usize::MAX);
        let gp = evolve_gp(&psi0, eps, &solver).unwrap();
        let hydro0 = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
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
        println!("c3 dim {dim}: H1 discrepancy {:.3e} (want < 1e-3), elapsed {:?}",
            dsq.sqrt() / scale, t2.elapsed());
    }
}
