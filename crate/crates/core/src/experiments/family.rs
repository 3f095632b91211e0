//! Reproducible initial-data families `(a0, u0 = 2 grad phi0)`.

use crate::field::{SpectralField, VectorField, CZERO};
use crate::grid::TorusGrid;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Gaussian,
    Ring,
    RandomBandlimited,
    SolitonPerturbation,
}

/// Named reproducible profile: the pair is a deterministic function of
/// `(kind, amplitude, width, seed)` and `u0` is potential by construction.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct DataFamily {
    pub kind: FamilyKind,
    pub amplitude: f64,
    pub width: f64,
    pub seed: u64,
    /// Target Sobolev index used when reporting data norms.
    pub norm_s: f64,
}

impl DataFamily {
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        DataFamily { kind: FamilyKind::Gaussian, amplitude, width, seed: 0, norm_s: 4.0 }
    }

    /// Footprint of the profile, used by the box-sizing rule.
    pub fn support_diameter(&self) -> f64 {
        match self.kind {
            FamilyKind::Gaussian | FamilyKind::Ring => 8.0 * self.width,
            FamilyKind::RandomBandlimited => 12.0 * self.width,
            FamilyKind::SolitonPerturbation => 20.0 * self.width,
        }
    }
}

/// Generated pair plus its `H^{s+1} x H^s` norm (computed once per grid).
pub struct FamilyData {
    pub a0: SpectralField,
    pub u0: VectorField,
    pub norm: f64,
}

pub fn generate_family(family: &DataFamily, grid: &Arc<TorusGrid>) -> FamilyData {
    let (a0, mut phi0) = match family.kind {
        FamilyKind::Gaussian => {
            let w2 = family.width * family.width;
            if grid.dim() == 1 {
                // co-moving acoustic pulse: a0 = u0 = 2 phi0' puts all the
                // content on one Riemann invariant, the clean probe for the
                // linear-model comparisons
                let amp = family.amplitude;
                let w = family.width;
                let a = SpectralField::from_real_fn(grid, |x| {
                    2.0 * amp * (x[0] / w) * (-x[0] * x[0] / w2).exp()
                });
                let phi = SpectralField::from_real_fn(grid, |x| {
                    -0.5 * amp * w * (-x[0] * x[0] / w2).exp()
                });
                (a, phi)
            } else {
                let a = SpectralField::from_real_fn(grid, |x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    family.amplitude * (-r2 / w2).exp()
                });
                let phi = SpectralField::from_real_fn(grid, |x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    0.5 * family.amplitude * family.width * (-r2 / (1.5 * w2)).exp()
                });
                (a, phi)
            }
        }
        FamilyKind::Ring => {
            let r0 = 2.0 * family.width;
            let w2 = family.width * family.width;
            let a = SpectralField::from_real_fn(grid, |x| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                family.amplitude * (-(r - r0) * (r - r0) / w2).exp()
            });
            let phi = SpectralField::from_real_fn(grid, |x| {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                0.75 * family.amplitude * family.width * (-(r - r0) * (r - r0) / (1.5 * w2)).exp()
            });
            (a, phi)
        }
        FamilyKind::RandomBandlimited => {
            let kmax = 2.0 / family.width;
            let a = random_bandlimited(grid, family.seed, kmax, family.amplitude);
            let phi =
                random_bandlimited(grid, family.seed.wrapping_add(1), kmax, 0.5 * family.amplitude);
            (a, phi)
        }
        FamilyKind::SolitonPerturbation => {
            // a gentle random long-wave ripple on top of a soliton-shaped dip
            let w2 = family.width * family.width;
            let base = SpectralField::from_real_fn(grid, |x| {
                let s = (x[0] / family.width).cosh().recip();
                -family.amplitude * s * s
            });
            let ripple =
                random_bandlimited(grid, family.seed, 1.0 / family.width, 0.05 * family.amplitude);
            let mut a = base;
            a.add_scaled(&mut ripple.clone(), 1.0);
            let phi = SpectralField::from_real_fn(grid, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                0.2 * family.amplitude * family.width * (-r2 / (4.0 * w2)).exp()
            });
            (a, phi)
        }
    };
    let mut grad = phi0.gradient();
    for c in &mut grad.comps {
        c.map_values(|v| 2.0 * v);
    }
    let mut a_norm = a0.clone();
    let mut u_norm = grad.clone();
    let norm = pair_norm_hsp1_hs(&mut a_norm, &mut u_norm, family.norm_s);
    FamilyData { a0, u0: grad, norm }
}

/// `||(a, u)||_{H^{s+1} x H^s}`.
pub fn pair_norm_hsp1_hs(a: &mut SpectralField, u: &mut VectorField, s: f64) -> f64 {
    let ha = crate::lp::hs_norm(a, s + 1.0);
    let mut hu2 = 0.0;
    for c in &mut u.comps {
        hu2 += crate::lp::hs_norm(c, s).powi(2);
    }
    (ha * ha + hu2).sqrt()
}

/// Real random field with smooth spectrum capped at `|xi| <= kmax`,
/// normalized to the requested sup amplitude.
pub fn random_bandlimited(
    grid: &Arc<TorusGrid>,
    seed: u64,
    kmax: f64,
    amplitude: f64,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::from_values(
        grid,
        (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect(),
    );
    f.apply_multiplier(|xi| {
        let k2: f64 = xi.iter().map(|x| x * x).sum();
        if k2.sqrt() <= kmax {
            Complex64::new((-2.0 * k2 / (kmax * kmax)).exp(), 0.0)
        } else {
            CZERO
        }
    })
    .expect("spectral envelope is finite");
    let sup = f.sup_norm();
    if sup > 0.0 {
        let s = amplitude / sup;
        f.map_values(|v| Complex64::new(v.re * s, 0.0));
    }
    f
}
