// Scratch: norm-ratio growth trajectories for the horizon sweep.
use gpwave::dynamics::{default_dt, evolve_gp, SolverConfig};
use gpwave::experiments::*;
use gpwave::grid::make_grid;
use gpwave::madelung::{from_hydro, to_hydro, HydroState};

fn main() {
    let family = DataFamily { kind: FamilyKind::Gaussian, amplitude: 0.8, width: 2.0, seed: 11, norm_s: 4.0 };
    let l = sized_box(family.support_diameter(), 16.0);
    let grid = make_grid(1, 2048, l).unwrap();
    let data = generate_family(&family, &grid);
    for eps in [0.15f64, 0.3] {
        let mut st = HydroState { a: data.a0.clone(), u: data.u0.clone(), eps, potential: true };
        let psi0 = from_hydro(&mut st).unwrap();
        let dt = default_dt(&grid, eps);
        let le = ((16.0 / 100.0) / dt).round().max(1.0) as usize;
        let traj = evolve_gp(&psi0, eps, &SolverConfig::new(dt, 16.0).with_log_every(le)).unwrap();
        print!("eps={eps}: ");
        for (i, (snap, t)) in traj.snapshots.iter().zip(&traj.times).enumerate() {
            if i % 8 != 0 { continue; }
            let mut psi = snap.clone();
            if let Ok(mut h) = to_hydro(&mut psi, eps) {
                let mut a = h.a.clone();
                let mut u = h.u.clone();
                let r = pair_norm_hsp1_hs(&mut a, &mut u, 4.0) / data.norm;
                print!("t{t:.1}:{r:.2} ");
            }
        }
        println!();
    }
}
