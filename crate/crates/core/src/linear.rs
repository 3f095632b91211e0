//! Exact Fourier solvers for the acoustic models.
//!
//! Per Fourier mode, with `m(xi) = sqrt(1 + eps^2 |xi|^2)` and the
//! symmetrized variables `c_hat = m a_hat`, `d_hat = i unit(xi).u_hat`,
//! both the free wave system (`m = 1`) and the dispersive system rotate
//! `(c_hat, d_hat)` at angular rate `omega = sqrt2 |xi| m(xi)`. Solenoidal
//! velocity content and the zero mode are carried along unchanged; only the
//! potential part is acoustic.
//!
//! The unitary groups act by the phase `exp(i t sqrt2 |xi| m(xi) / eps)`
//! (and the slowed variant substitutes `t -> eps t / sqrt2`).

use crate::field::{SpectralField, VectorField, CZERO};
use crate::grid::TorusGrid;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum LinearError {
    #[error("forcing samples too coarse: spacing {got:.3e} exceeds {limit:.3e}")]
    QuadratureTooCoarse { got: f64, limit: f64 },
    #[error("Simpson quadrature needs an even number of intervals (got {0} samples)")]
    OddSampleCount(usize),
    #[error("forcing samples must live on the state's grid")]
    GridMismatch,
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Acoustic pair `(a, u)`; `u` decomposes into potential + solenoidal parts
/// and only the former is rotated by the propagators.
pub struct LinearPair {
    pub a: SpectralField,
    pub u: VectorField,
}

impl LinearPair {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        LinearPair { a: SpectralField::zeros(grid), u: VectorField::zeros(grid) }
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.a.grid()
    }

    pub fn clone_fields(&self) -> Self {
        LinearPair { a: self.a.clone(), u: self.u.clone() }
    }
}

/// Symmetrized unknowns `c = (1 - eps^2 lap)^(1/2) b`,
/// `d = (-lap)^(-1/2) div v` (zero mode of `d` set to 0).
pub struct SymmetrizedPair {
    pub c: SpectralField,
    pub d: SpectralField,
    pub eps: f64,
}

fn dispersion_factor(eps: f64, k2: f64) -> f64 {
    (1.0 + eps * eps * k2).sqrt()
}

/// Angular rate `sqrt2 |xi| sqrt(1 + eps^2 |xi|^2)` of the symmetrized
/// rotation (`eps = 0` gives the free wave rate `sqrt2 |xi|`).
pub fn omega_eps(eps: f64, xi_norm: f64) -> f64 {
    SQRT_2 * xi_norm * dispersion_factor(eps, xi_norm * xi_norm)
}

pub fn symmetrize(b: &mut SpectralField, v: &mut VectorField, eps: f64) -> SymmetrizedPair {
    let grid = b.grid().clone();
    let n = grid.n();
    let mut c = b.clone();
    c.apply_multiplier(|xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        Complex64::new(dispersion_factor(eps, k2), 0.0)
    })
    .expect("dispersion factor is finite");

    let mut d_coef = vec![CZERO; grid.len()];
    for (axis, comp) in v.comps.iter_mut().enumerate() {
        let coef = comp.coeffs();
        for (i, out) in d_coef.iter_mut().enumerate() {
            let idx = grid.decode(i);
            let mut k2 = 0.0;
            for a in 0..grid.dim() {
                let f = grid.freq(idx[a] % n);
                k2 += f * f;
            }
            if k2 == 0.0 {
                continue; // d zero mode stays 0 by convention
            }
            let xi = grid.freq(idx[axis] % n);
            *out += Complex64::new(0.0, xi / k2.sqrt()) * coef[i];
        }
    }
    let d = SpectralField::from_coeffs(&grid, d_coef);
    SymmetrizedPair { c, d, eps }
}

/// Inverse transformation; recovers `b` and the potential part of `v`.
pub fn desymmetrize(pair: &mut SymmetrizedPair) -> (SpectralField, VectorField) {
    let eps = pair.eps;
    let grid = pair.c.grid().clone();
    let n = grid.n();
    let mut b = pair.c.clone();
    b.apply_multiplier(|xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        Complex64::new(1.0 / dispersion_factor(eps, k2), 0.0)
    })
    .expect("inverse dispersion factor is finite");

    let d_coef = pair.d.coeffs().to_vec();
    let mut comps = Vec::with_capacity(grid.dim());
    for axis in 0..grid.dim() {
        let mut coef = vec![CZERO; grid.len()];
        for (i, out) in coef.iter_mut().enumerate() {
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
            // v = -grad (-lap)^{-1/2} d  =>  v_hat = -i xi / |xi| d_hat
            *out = Complex64::new(0.0, -xi / k2.sqrt()) * d_coef[i];
        }
        comps.push(SpectralField::from_coeffs(&grid, coef));
    }
    (b, VectorField::from_comps(comps).expect("component count matches dim"))
}

/// Shared per-mode propagation: rotate `(m a_hat, i unit(xi).u_hat)` by
/// `omega t`, keep the solenoidal part and the zero mode fixed.
fn rotate_pair(pair: &mut LinearPair, t: f64, eps: f64) -> LinearPair {
    let grid = pair.grid().clone();
    let n = grid.n();
    let dim = grid.dim();
    let a_coef = pair.a.coeffs().to_vec();
    let u_coef: Vec<Vec<Complex64>> =
        pair.u.comps.iter_mut().map(|c| c.coeffs().to_vec()).collect();

    let mut a_out = vec![CZERO; grid.len()];
    let mut u_out = vec![vec![CZERO; grid.len()]; dim];
    let mut xi = [0.0f64; 3];
    for i in 0..grid.len() {
        let idx = grid.decode(i);
        let mut k2 = 0.0;
        for a in 0..dim {
            xi[a] = grid.freq(idx[a] % n);
            k2 += xi[a] * xi[a];
        }
        if k2 == 0.0 {
            a_out[i] = a_coef[i];
            for a in 0..dim {
                u_out[a][i] = u_coef[a][i];
            }
            continue;
        }
        let knorm = k2.sqrt();
        let m = dispersion_factor(eps, k2);
        let omega = SQRT_2 * knorm * m;
        let (s, c) = (omega * t).sin_cos();

        // longitudinal scalar and transverse remainder
        let mut long = CZERO;
        for a in 0..dim {
            long += xi[a] / knorm * u_coef[a][i];
        }
        let c0 = m * a_coef[i];
        let d0 = Complex64::new(0.0, 1.0) * long;
        let c1 = c * c0 - s * d0;
        let d1 = s * c0 + c * d0;
        a_out[i] = c1 / m;
        let long1 = Complex64::new(0.0, -1.0) * d1;
        for a in 0..dim {
            let trans = u_coef[a][i] - xi[a] / knorm * long;
            u_out[a][i] = trans + xi[a] / knorm * long1;
        }
    }
    LinearPair {
        a: SpectralField::from_coeffs(&grid, a_out),
        u: VectorField::from_comps(
            u_out.into_iter().map(|c| SpectralField::from_coeffs(&grid, c)).collect(),
        )
        .expect("component count matches dim"),
    }
}

/// Free wave system `a_t + sqrt2 div u = 0`, `u_t + sqrt2 grad a = 0`.
pub fn wave_propagate(pair: &mut LinearPair, t: f64) -> LinearPair {
    rotate_pair(pair, t, 0.0)
}

/// Dispersive system with per-mode rate `sqrt2 |xi| sqrt(1 + eps^2 |xi|^2)`
/// acting on the symmetrized variables.
pub fn leps_propagate(pair: &mut LinearPair, t: f64, eps: f64) -> LinearPair {
    rotate_pair(pair, t, eps)
}

/// Variation-of-constants solution with forcing `(f, g)` sampled uniformly
/// on `[0, t]` (`samples.len() - 1` intervals, even count required);
/// composite Simpson quadrature per mode.
pub fn leps_duhamel(
    pair0: &mut LinearPair,
    forcing: &mut [LinearPair],
    t: f64,
    eps: f64,
    dt_quad: f64,
) -> Result<LinearPair, LinearError> {
    let grid = pair0.grid().clone();
    let m_samples = forcing.len();
    if m_samples < 3 || (m_samples - 1) % 2 != 0 {
        return Err(LinearError::OddSampleCount(m_samples));
    }
    for s in forcing.iter() {
        if !std::sync::Arc::ptr_eq(s.grid(), &grid) {
            return Err(LinearError::GridMismatch);
        }
    }
    let h = t / (m_samples - 1) as f64;
    if h > dt_quad {
        return Err(LinearError::QuadratureTooCoarse { got: h, limit: dt_quad });
    }

    let mut out = rotate_pair(pair0, t, eps);
    let n = grid.n();
    let dim = grid.dim();

    // Simpson weights
    let w = |j: usize| -> f64 {
        if j == 0 || j == m_samples - 1 {
            h / 3.0
        } else if j % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        }
    };

    // accumulate per mode: integral of R(omega (t - tau)) S(tau)
    let mut acc_a = vec![CZERO; grid.len()];
    let mut acc_u = vec![vec![CZERO; grid.len()]; dim];
    let mut xi = [0.0f64; 3];
    for (j, sample) in forcing.iter_mut().enumerate() {
        let tau = j as f64 * h;
        let wj = w(j);
        let f_coef = sample.a.coeffs().to_vec();
        let g_coef: Vec<Vec<Complex64>> =
            sample.u.comps.iter_mut().map(|c| c.coeffs().to_vec()).collect();
        for i in 0..grid.len() {
            let idx = grid.decode(i);
            let mut k2 = 0.0;
            for a in 0..dim {
                xi[a] = grid.freq(idx[a] % n);
                k2 += xi[a] * xi[a];
            }
            if k2 == 0.0 {
                acc_a[i] += wj * f_coef[i];
                for a in 0..dim {
                    acc_u[a][i] += wj * g_coef[a][i];
                }
                continue;
            }
            let knorm = k2.sqrt();
            let m = dispersion_factor(eps, k2);
            let omega = SQRT_2 * knorm * m;
            let (s, c) = (omega * (t - tau)).sin_cos();

            let mut long_g = CZERO;
            for a in 0..dim {
                long_g += xi[a] / knorm * g_coef[a][i];
            }
            let cf = m * f_coef[i];
            let df = Complex64::new(0.0, 1.0) * long_g;
            let c1 = c * cf - s * df;
            let d1 = s * cf + c * df;
            acc_a[i] += wj * c1 / m;
            let long1 = Complex64::new(0.0, -1.0) * d1;
            for a in 0..dim {
                let trans = g_coef[a][i] - xi[a] / knorm * long_g;
                acc_u[a][i] += wj * (trans + xi[a] / knorm * long1);
            }
        }
    }
    {
        let coef = out.a.coeffs_mut();
        for (c, acc) in coef.iter_mut().zip(&acc_a) {
            *c += acc;
        }
    }
    for (comp, acc) in out.u.comps.iter_mut().zip(&acc_u) {
        let coef = comp.coeffs_mut();
        for (c, a) in coef.iter_mut().zip(acc) {
            *c += a;
        }
    }
    Ok(out)
}

/// Unitary group with phase `t sqrt2 |xi| sqrt(1 + eps^2 |xi|^2) / eps`;
/// the slowed variant substitutes `t -> eps t / sqrt2`, leaving the phase
/// `t |xi| sqrt(1 + eps^2 |xi|^2)`.
pub fn group_apply(field: &mut SpectralField, t: f64, eps: f64, slowed: bool) -> SpectralField {
    let mut out = field.clone();
    let rate = if slowed { 1.0 / SQRT_2 * eps } else { 1.0 };
    out.apply_multiplier(|xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        let theta = t * rate * SQRT_2 * k2.sqrt() * dispersion_factor(eps, k2) / eps;
        Complex64::from_polar(1.0, theta)
    })
    .expect("group phase is finite");
    out
}
