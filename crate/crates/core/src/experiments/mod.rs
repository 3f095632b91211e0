//! Scenario harness: reproducible measurements of horizons, approximation
//! errors, decay exponents and estimate constants, with verdicts against
//! declared tolerances.

mod compare;
mod decay;
mod family;
mod fit;
mod horizon;
mod monitor;
mod report;
mod soliton;
mod strichartz;

pub use compare::{error_vs_leps, error_vs_wave, CompareConfig};
pub use decay::{decay_exponent, DecayConfig, DecayMode};
pub use family::{generate_family, pair_norm_hsp1_hs, random_bandlimited, DataFamily, FamilyKind};
pub use fit::{fit_powerlaw, FitError, PowerFit};
pub use horizon::{sweep_theorem1, HorizonConfig};
pub use monitor::{monitor_prop1, MonitorConfig};
pub use report::{ExperimentReport, Manifest, Series, Verdict};
pub use soliton::{soliton_shift, SolitonConfig};
pub use strichartz::{strichartz_ratio, StrichartzConfig};

use crate::SOUND_SPEED;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Fit(#[from] fit::FitError),
    #[error("io failure: {0}")]
    Io(String),
    #[error("requested time {t} exceeds the vortex-free horizon at eps = {eps}")]
    HorizonViolation { eps: f64, t: f64 },
    #[error("time window reaches torus wraparound: group velocity {vg:.3} * t = {dist:.1} vs box {l:.1}")]
    Wraparound { vg: f64, dist: f64, l: f64 },
    #[error("({p}, {r}) is not an admissible pair in dimension {dim}")]
    NotAdmissiblePair { p: f64, r: f64, dim: usize },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error(transparent)]
    Madelung(#[from] crate::madelung::MadelungError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Linear(#[from] crate::linear::LinearError),
    #[error(transparent)]
    Lp(#[from] crate::lp::LpError),
}

/// Which nonlinear engine runs a scenario.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Gp,
    Hydro,
    Both,
}

/// Box side large enough that no signal reaches the boundary within the
/// simulated window: data diameter plus two acoustic crossings plus 20%.
pub fn sized_box(support_diameter: f64, t_max: f64) -> f64 {
    1.2 * (support_diameter + 2.0 * SOUND_SPEED * t_max)
}

/// Geometric time grid with ratio sqrt(2), well conditioned for log-log fits.
pub fn geometric_times(t_min: f64, t_max: f64) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max >= t_min);
    let mut out = vec![t_min];
    let ratio = SOUND_SPEED;
    while out.last().unwrap() * ratio <= t_max * (1.0 + 1e-12) {
        let next = out.last().unwrap() * ratio;
        out.push(next);
    }
    if (out.last().unwrap() - t_max).abs() > 1e-9 * t_max {
        out.push(t_max);
    }
    out
}

/// Geometric grid with a fixed point count (for thin fit windows).
pub fn geometric_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && points >= 2);
    let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
    (0..points).map(|i| t_min * ratio.powi(i as i32)).collect()
}
