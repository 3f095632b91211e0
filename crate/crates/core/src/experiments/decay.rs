//! Sup-norm decay of the unitary groups on annulus-supported data.

use super::fit::fit_powerlaw;
use super::report::{ExperimentReport, Series};
use super::{geometric_grid, ExperimentError};
use crate::field::SpectralField;
use crate::grid::make_grid;
use crate::linear::group_apply;
use num_complex::Complex64;

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayMode {
    /// Unslowed group (Schroedinger-like for large eps).
    Veps,
    /// Slowed group (wave-like for small eps).
    Ueps,
}

#[derive(Clone, Copy, Debug)]
pub struct DecayConfig {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
    pub eps: f64,
    pub mode: DecayMode,
    /// Annulus holding the data spectrum.
    pub r1: f64,
    pub r2: f64,
    pub t_window: (f64, f64),
}

/// Largest group velocity on the annulus, from the derivative of the
/// dispersion phase in the radial frequency.
fn max_group_velocity(cfg: &DecayConfig) -> f64 {
    let eps = cfg.eps;
    let r = cfg.r2;
    let m = (1.0 + eps * eps * r * r).sqrt();
    let d_phase = m + eps * eps * r * r / m;
    match cfg.mode {
        DecayMode::Ueps => d_phase,
        DecayMode::Veps => std::f64::consts::SQRT_2 * d_phase / eps,
    }
}

/// Fit of `sup_x |group(t) a|` over the requested window. Rejects windows
/// that let the wave packet wrap around the torus.
pub fn decay_exponent(cfg: &DecayConfig) -> Result<ExperimentReport, ExperimentError> {
    let grid = make_grid(cfg.dim, cfg.n, cfg.box_length)?;
    assert!(
        cfg.r2 < grid.nyquist(),
        "annulus must sit under the Nyquist frequency"
    );
    let vg = max_group_velocity(cfg);
    let packet_halfwidth = 15.0 / (cfg.r2 - cfg.r1);
    let dist = vg * cfg.t_window.1 + packet_halfwidth;
    if dist >= 0.5 * cfg.box_length {
        return Err(ExperimentError::Wraparound { vg, dist, l: cfg.box_length });
    }

    // radial wave packet: real Gaussian band in Fourier with constant
    // phase, truncated inside [r1, r2]. Constant phase makes the profile a
    // localized (rapidly decaying) packet; decay measurements need
    // integrable data, not box-filling noise. The source transient at the
    // packet center empties like exp(-(sigma_r t)^2 / 4), so fit windows
    // must start after it clears.
    let (r1, r2) = (cfg.r1, cfg.r2);
    let c_r = 0.5 * (r1 + r2);
    let sigma_r = (r2 - r1) / 5.0;
    let mut data = SpectralField::zeros(&grid);
    {
        let g = grid.clone();
        let n = g.n();
        let coef = data.coeffs_mut();
        for (i, c) in coef.iter_mut().enumerate() {
            let idx = g.decode(i);
            let mut k2 = 0.0;
            for a in 0..g.dim() {
                let f = g.freq(idx[a] % n);
                k2 += f * f;
            }
            let r = k2.sqrt();
            if r < r1 || r > r2 {
                continue;
            }
            let z = (r - c_r) / sigma_r;
            *c = Complex64::new((-z * z).exp(), 0.0);
        }
    }
    let sup0 = data.sup_norm();
    assert!(sup0 > 0.0, "annulus carries no lattice modes");
    data.map_values(|v| v / sup0);

    let times = geometric_grid(cfg.t_window.0, cfg.t_window.1, 10);
    let mut report = ExperimentReport::new("decay-exponent");
    report.param("dim", cfg.dim);
    report.param("n", cfg.n);
    report.param("box_length", cfg.box_length);
    report.param("eps", cfg.eps);
    report.param("mode", cfg.mode);
    report.param("annulus", (cfg.r1, cfg.r2));
    report.param("t_window", cfg.t_window);
    report.series = Series::new(&["t", "sup_norm"]);
    let slowed = cfg.mode == DecayMode::Ueps;
    let mut sups = Vec::new();
    // refine the sup measurement so shell oscillations that land between
    // coarse nodes are not missed
    let sup0_fine = data.sup_norm_refined(2);
    data.map_values(|v| v / sup0_fine);
    for &t in &times {
        let mut at_t = group_apply(&mut data, t, cfg.eps, slowed);
        let s = at_t.sup_norm_refined(2);
        report.series.push(vec![t, s]);
        sups.push(s);
    }
    let fit = fit_powerlaw(&times, &sups, (cfg.t_window.0 * 0.99, cfg.t_window.1 * 1.01))?;
    report.fits.insert("decay_exponent".into(), fit);
    report.constants.insert("max_group_velocity".into(), vg);
    Ok(report)
}
