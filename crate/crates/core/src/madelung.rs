//! Transforms between the wavefunction, the scaled hydrodynamic pair
//! `(a, u)` and the augmented pair `(b, z = v + i w)`, plus vortex
//! detection.
//!
//! With `psi = rho e^{i phi}` and a scaling parameter `eps`:
//!
//! * `a = sqrt(2) (|psi|^2 - 1) / eps`, `u = 2 grad(arg psi)`;
//! * `z = -2i grad(psi)/psi = grad(2 phi - i log rho^2)`;
//! * the density weight `1 + (eps/sqrt 2) a` equals `rho^2`.
//!
//! The phase gradient is always computed as `Im(grad psi / psi)`, never by
//! angle unwrapping, so it stays single-valued on the torus.

use crate::field::{SpectralField, VectorField, CZERO};
use crate::grid::TorusGrid;
use num_complex::Complex64;
use std::sync::Arc;

/// Below this modulus a zero (vortex) is declared.
pub const VORTEX_THRESHOLD: f64 = 0.1;

/// Density band `rho^2 in [1/2, 2]` used for admissibility checks.
pub const DENSITY_BAND: (f64, f64) = (0.5, 2.0);

/// Tolerance on the relative curl below which a velocity counts as potential.
pub const POTENTIAL_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum MadelungError {
    #[error("vortex encountered: |psi| = {value:.3e} at node {node}")]
    VortexEncountered { value: f64, node: usize },
    #[error("velocity field is not potential (relative curl {curl:.3e})")]
    NotPotential { curl: f64 },
    #[error("state not admissible: density weight reaches {weight_min:.3e}")]
    NotAdmissible { weight_min: f64 },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Which density perturbation `b` the augmented pair carries.
///
/// The slow-time unknown `b = sqrt(2)(|psi|^2-1)/eps` (the default) and the
/// parabolic one `b = 2(|psi|^2-1)/eps^2` coexist; an explicit flag prevents
/// silent eps-power mistakes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BNormalization {
    DynaSlow,
    Parabolic,
}

/// Scaled hydrodynamic pair `(a, u)`.
pub struct HydroState {
    pub a: SpectralField,
    pub u: VectorField,
    pub eps: f64,
    /// Set when `u` was produced as (or verified to be) a gradient.
    pub potential: bool,
}

/// Augmented pair `(b, z)` with its density weight.
pub struct AugmentedState {
    pub b: SpectralField,
    pub z: VectorField,
    pub eps: f64,
    pub normalization: BNormalization,
}

impl AugmentedState {
    /// Density weight `rho^2` at the nodes (`1 + (eps/sqrt 2) b` in the
    /// slow normalization, `1 + (eps^2/2) b` in the parabolic one).
    pub fn weight(&mut self) -> Vec<f64> {
        let s = match self.normalization {
            BNormalization::DynaSlow => self.eps / std::f64::consts::SQRT_2,
            BNormalization::Parabolic => self.eps * self.eps / 2.0,
        };
        self.b.values().iter().map(|b| 1.0 + s * b.re).collect()
    }

    pub fn weight_min(&mut self) -> f64 {
        self.weight().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// True when the weight stays in the admissible density band.
    pub fn is_admissible(&mut self) -> bool {
        let (lo, hi) = DENSITY_BAND;
        self.weight().into_iter().all(|w| w >= lo && w <= hi)
    }
}

impl HydroState {
    /// Density weight `rho^2 = 1 + (eps/sqrt 2) a` at the nodes.
    pub fn weight(&mut self) -> Vec<f64> {
        let s = self.eps / std::f64::consts::SQRT_2;
        self.a.values().iter().map(|a| 1.0 + s * a.re).collect()
    }

    pub fn is_admissible(&mut self) -> bool {
        let (lo, hi) = DENSITY_BAND;
        self.weight().into_iter().all(|w| w >= lo && w <= hi)
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.a.grid()
    }
}

/// Global minimum of `|psi|` over the nodes and its first location in
/// lattice order (ties resolved to the smallest index).
pub fn min_modulus(psi: &mut SpectralField) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut at = 0usize;
    for (i, v) in psi.values().iter().enumerate() {
        let m = v.norm();
        if m < best {
            best = m;
            at = i;
        }
    }
    (best, at)
}

fn reject_vortex(psi: &mut SpectralField) -> Result<(), MadelungError> {
    let (value, node) = min_modulus(psi);
    if value < VORTEX_THRESHOLD {
        Err(MadelungError::VortexEncountered { value, node })
    } else {
        Ok(())
    }
}

/// Logarithmic derivative `grad(psi)/psi` at the nodes.
fn log_derivative(psi: &mut SpectralField) -> VectorField {
    let mut grad = psi.gradient();
    let vals = psi.values().to_vec();
    for comp in &mut grad.comps {
        for (g, p) in comp.values_mut().iter_mut().zip(&vals) {
            *g /= p;
        }
    }
    grad
}

/// Hydrodynamic variables of a nonvanishing wavefunction:
/// `a = sqrt2 (|psi|^2 - 1)/eps`, `u = 2 Im(grad psi / psi)`.
pub fn to_hydro(psi: &mut SpectralField, eps: f64) -> Result<HydroState, MadelungError> {
    reject_vortex(psi)?;
    let grid = psi.grid().clone();
    let s = std::f64::consts::SQRT_2 / eps;
    let a_vals: Vec<Complex64> = psi
        .values()
        .iter()
        .map(|p| Complex64::new(s * (p.norm_sqr() - 1.0), 0.0))
        .collect();
    let a = SpectralField::from_values(&grid, a_vals);
    let ld = log_derivative(psi);
    let mut comps = Vec::with_capacity(ld.comps.len());
    for mut c in ld.comps {
        c.map_values(|v| Complex64::new(2.0 * v.im, 0.0));
        comps.push(c);
    }
    let u = VectorField::from_comps(comps)?;
    Ok(HydroState { a, u, eps, potential: true })
}

/// Augmented variables of a nonvanishing wavefunction:
/// `z = -2i grad(psi)/psi` and `b` in the requested normalization.
pub fn to_augmented(
    psi: &mut SpectralField,
    eps: f64,
    normalization: BNormalization,
) -> Result<AugmentedState, MadelungError> {
    reject_vortex(psi)?;
    let grid = psi.grid().clone();
    let s = match normalization {
        BNormalization::DynaSlow => std::f64::consts::SQRT_2 / eps,
        BNormalization::Parabolic => 2.0 / (eps * eps),
    };
    let b_vals: Vec<Complex64> = psi
        .values()
        .iter()
        .map(|p| Complex64::new(s * (p.norm_sqr() - 1.0), 0.0))
        .collect();
    let b = SpectralField::from_values(&grid, b_vals);
    let ld = log_derivative(psi);
    let mut comps = Vec::with_capacity(ld.comps.len());
    for mut c in ld.comps {
        c.map_values(|v| Complex64::new(0.0, -2.0) * v);
        comps.push(c);
    }
    let z = VectorField::from_comps(comps)?;
    Ok(AugmentedState { b, z, eps, normalization })
}

/// Rebuild the wavefunction from an admissible potential hydrodynamic state.
///
/// The phase solves `grad phi = u/2` spectrally (coefficient division by
/// `i xi`, zero mode set to 0: the global phase is gauge freedom), then
/// `psi = sqrt(1 + (eps/sqrt 2) a) e^{i phi}`.
pub fn from_hydro(state: &mut HydroState) -> Result<SpectralField, MadelungError> {
    let grid = state.a.grid().clone();
    let curl = state.u.curl_l2();
    let scale: f64 = state
        .u
        .comps
        .iter_mut()
        .map(|c| {
            let mut g = c.gradient();
            g.l2_norm().powi(2)
        })
        .sum::<f64>()
        .sqrt();
    let rel = if scale > 0.0 { curl / scale } else { 0.0 };
    if rel > POTENTIAL_TOL {
        return Err(MadelungError::NotPotential { curl: rel });
    }

    // phi_hat = -i xi . u_hat / (2 |xi|^2)
    let n = grid.n();
    let mut phi_coef = vec![CZERO; grid.len()];
    for (axis, comp) in state.u.comps.iter_mut().enumerate() {
        let coef = comp.coeffs();
        for (i, out) in phi_coef.iter_mut().enumerate() {
            let idx = grid.decode(i);
            let mut k2 = 0.0;
            for a in 0..grid.dim() {
                let f = grid.freq(idx[a] % n);
                k2 += f * f;
            }
            if k2 == 0.0 {
                continue;
            }
            let xi = grid.freq(idx[axis] % n);
            *out += Complex64::new(0.0, -xi / (2.0 * k2)) * coef[i];
        }
    }
    let mut phi = SpectralField::from_coeffs(&grid, phi_coef);

    let s = state.eps / std::f64::consts::SQRT_2;
    let a_vals = state.a.values().to_vec();
    let wmin = a_vals.iter().map(|a| 1.0 + s * a.re).fold(f64::INFINITY, f64::min);
    if wmin <= 0.0 {
        return Err(MadelungError::NotAdmissible { weight_min: wmin });
    }
    let psi_vals: Vec<Complex64> = a_vals
        .iter()
        .zip(phi.values())
        .map(|(a, p)| {
            let rho = (1.0 + s * a.re).sqrt();
            rho * Complex64::new(0.0, p.re).exp()
        })
        .collect();
    Ok(SpectralField::from_values(&grid, psi_vals))
}

/// Relative residual of the identity `-grad(1 + eps b / sqrt 2) =
/// (1 + eps b / sqrt 2) Im z`, normalized so that a violation of order
/// `|grad b|` reads as 1: the measured quantity is
/// `|| grad b + (sqrt2/eps) w Im z ||_2 / || grad b ||_2`.
pub fn pota_residual(state: &mut AugmentedState) -> f64 {
    let eps = state.eps;
    let w = state.weight();
    let mut grad_b = state.b.gradient();
    let denom = grad_b.l2_norm();
    let s = std::f64::consts::SQRT_2 / eps;
    let mut num2 = 0.0;
    for (axis, gb) in grad_b.comps.iter_mut().enumerate() {
        let imz: Vec<f64> = state.z.comps[axis].values().iter().map(|z| z.im).collect();
        let cell = gb.grid().cell_volume();
        for ((g, wi), zi) in gb.values().iter().zip(&w).zip(&imz) {
            let r = g.re + s * wi * zi;
            num2 += r * r * cell;
        }
    }
    let num = num2.sqrt();
    if denom == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / denom
    }
}

/// Ginzburg-Landau energy expressed in the augmented variables:
/// `(1/8)(||b||_2^2 + ||z||^2_{L^2(w dx)})` with the density weight `w`.
pub fn augmented_energy(state: &mut AugmentedState) -> f64 {
    let w = state.weight();
    let cell = state.b.grid().cell_volume();
    let mut b2 = 0.0;
    for b in state.b.values() {
        b2 += b.norm_sqr();
    }
    let mut z2 = 0.0;
    for comp in &mut state.z.comps {
        for (z, wi) in comp.values().iter().zip(&w) {
            z2 += wi * z.norm_sqr();
        }
    }
    0.125 * (b2 + z2) * cell
}
