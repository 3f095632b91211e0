//! Dyadic frequency decomposition and the norms built on it.
//!
//! The radial cutoff `chi` equals 1 on `|xi| <= 1.1`, vanishes for
//! `|xi| >= 4/3` and interpolates with a smooth `exp(-1/x)` transition;
//! `phi(xi) = chi(xi/2) - chi(xi)` is supported in the annulus
//! `{1.1 <= |xi| <= 8/3}` and the family telescopes to a partition of
//! unity. Block norms are read off the Fourier coefficients directly
//! (Parseval), so no extra transforms are needed.

use crate::field::{SpectralField, VectorField};
use crate::grid::TorusGrid;
use crate::madelung::AugmentedState;
use num_complex::Complex64;
use std::sync::Arc;

/// `chi = 1` inside this radius.
pub const CHI_FLAT: f64 = 1.1;
/// `chi = 0` outside this radius.
pub const CHI_SUPPORT: f64 = 4.0 / 3.0;

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("grid too coarse for a dyadic partition (q_max = {q_max})")]
    GridTooCoarse { q_max: i32 },
    #[error("block index {q} outside [-1, {q_max}]")]
    QOutOfRange { q: i32, q_max: i32 },
    #[error("bound denominator is degenerate")]
    DegenerateBound,
    #[error("state not admissible: density weight reaches {weight_min:.3e}")]
    NotAdmissible { weight_min: f64 },
}

pub(crate) fn smooth_ramp(t: f64) -> f64 {
    // C-infinity transition from 0 (t <= 0) to 1 (t >= 1)
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let f = (-1.0 / t).exp();
    let g = (-1.0 / (1.0 - t)).exp();
    f / (f + g)
}

/// Radial lowpass profile: 1 on `|xi| <= 1.1`, 0 on `|xi| >= 4/3`.
pub fn chi(r: f64) -> f64 {
    1.0 - smooth_ramp((r.abs() - CHI_FLAT) / (CHI_SUPPORT - CHI_FLAT))
}

/// Annulus profile `phi(xi) = chi(xi/2) - chi(xi)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockKind {
    /// `Delta_q` (with `Delta_{-1} = chi(D)`).
    Delta,
    /// Lowpass `S_q = chi(2^{-q} D)`.
    Lowpass,
}

/// Dyadic partition attached to a grid. `q_max` is the largest block whose
/// annulus fits under the dealias cutoff; Besov sums truncate there and the
/// truncation level is recorded in every report.
pub struct DyadicPartition {
    grid: Arc<TorusGrid>,
    pub q_max: i32,
}

pub fn build_partition(grid: &Arc<TorusGrid>) -> Result<DyadicPartition, LpError> {
    let q_max = (grid.nyquist() * 3.0 / 8.0).log2().floor() as i32;
    if q_max < 1 {
        return Err(LpError::GridTooCoarse { q_max });
    }
    Ok(DyadicPartition { grid: grid.clone(), q_max })
}

impl DyadicPartition {
    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    fn check_q(&self, q: i32) -> Result<(), LpError> {
        if q < -1 || q > self.q_max {
            Err(LpError::QOutOfRange { q, q_max: self.q_max })
        } else {
            Ok(())
        }
    }

    /// Symbol of the requested block at radius `r`.
    pub fn block_symbol(&self, q: i32, kind: BlockKind, r: f64) -> f64 {
        match (kind, q) {
            (BlockKind::Delta, -1) => chi(r),
            (BlockKind::Delta, q) => phi(r / (q as f64).exp2()),
            (BlockKind::Lowpass, q) => chi(r / (q as f64).exp2()),
        }
    }

    /// Value of the telescoped partition `chi + sum_q phi(2^{-q} .)` at
    /// radius `r`, summed far enough that the telescope has closed.
    pub fn partition_sum(&self, r: f64) -> f64 {
        let q_stop = ((r.max(1e-12) / CHI_FLAT).log2().ceil() as i32).max(0) + 1;
        let mut s = chi(r);
        for q in 0..=q_stop {
            s += phi(r / (q as f64).exp2());
        }
        s
    }

    /// Apply `Delta_q` or `S_q` as a Fourier multiplier.
    pub fn dyadic_block(
        &self,
        u: &mut SpectralField,
        q: i32,
        kind: BlockKind,
    ) -> Result<SpectralField, LpError> {
        self.check_q(q)?;
        let mut out = u.clone();
        out.apply_multiplier(|xi| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            Complex64::new(self.block_symbol(q, kind, r), 0.0)
        })
        .expect("block symbol is finite");
        Ok(out)
    }

    /// Per-block weighted L2 norms `2^{qs} ||Delta_q u||_2` for
    /// `q = -1 .. q_max`, read from the coefficients.
    pub fn block_l2(&self, u: &mut SpectralField, s: f64) -> Vec<(i32, f64)> {
        let grid = self.grid.clone();
        let n = grid.n();
        let cell = grid.cell_volume();
        let coef = u.coeffs();
        let nq = (self.q_max + 2) as usize;
        let mut acc = vec![0.0f64; nq];
        for (i, c) in coef.iter().enumerate() {
            let idx = grid.decode(i);
            let mut k2 = 0.0;
            for a in 0..grid.dim() {
                let f = grid.freq(idx[a] % n);
                k2 += f * f;
            }
            let r = k2.sqrt();
            let p = c.norm_sqr();
            for q in -1..=self.q_max {
                let sym = self.block_symbol(q, BlockKind::Delta, r);
                if sym != 0.0 {
                    acc[(q + 1) as usize] += sym * sym * p;
                }
            }
        }
        (0..nq)
            .map(|j| {
                let q = j as i32 - 1;
                let w = (q as f64 * s).exp2();
                (q, w * (acc[j] * cell).sqrt())
            })
            .collect()
    }
}

impl DyadicPartition {
    /// Radius up to which the truncated family resolves every frequency
    /// (the telescoped partition equals 1 below it).
    pub fn coverage_radius(&self) -> f64 {
        CHI_FLAT * ((self.q_max + 1) as f64).exp2()
    }

    /// Grid-calibrated two-sided equivalence constant between the direct
    /// `H^s` weight and the blockwise `r = 2` Besov weight: any field with
    /// spectrum inside the coverage radius satisfies
    /// `1/C <= direct/blocks <= C`. Scanning the lattice makes the bound
    /// rigorous per grid rather than universal.
    pub fn sobolev_equivalence_constant(&self, s: f64) -> f64 {
        let grid = &self.grid;
        let n = grid.n();
        let cover = self.coverage_radius();
        let mut worst = 1.0f64;
        for i in 0..grid.len() {
            let idx = grid.decode(i);
            let mut k2 = 0.0;
            for a in 0..grid.dim() {
                let f = grid.freq(idx[a] % n);
                k2 += f * f;
            }
            let r = k2.sqrt();
            if r > cover {
                continue;
            }
            let w_direct = (1.0 + k2).powf(s);
            let mut w_blocks = 0.0;
            for q in -1..=self.q_max {
                let sym = self.block_symbol(q, BlockKind::Delta, r);
                if sym != 0.0 {
                    let wq = (q as f64 * s).exp2();
                    w_blocks += (wq * sym) * (wq * sym);
                }
            }
            if w_blocks > 0.0 {
                worst = worst.max(w_direct / w_blocks).max(w_blocks / w_direct);
            }
        }
        worst.sqrt()
    }
}

/// Besov/Sobolev/Lipschitz summability index.
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum LrIndex {
    Finite(f64),
    Infinity,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct NormReport {
    pub kind: String,
    pub s: f64,
    pub r: Option<f64>, // None encodes r = infinity or not applicable
    pub value: f64,
    pub per_block: Option<Vec<(i32, f64)>>,
    pub truncation_q: i32,
}

/// Besov norm `|| 2^{qs} ||Delta_q u||_2 ||_{l^r}` with the block table.
pub fn besov_norm(
    part: &DyadicPartition,
    u: &mut SpectralField,
    s: f64,
    r: LrIndex,
) -> NormReport {
    let blocks = part.block_l2(u, s);
    let value = match r {
        LrIndex::Infinity => blocks.iter().map(|(_, v)| *v).fold(0.0, f64::max),
        LrIndex::Finite(p) => {
            assert!(p >= 1.0, "l^r index must be >= 1");
            blocks.iter().map(|(_, v)| v.powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    NormReport {
        kind: "besov".into(),
        s,
        r: match r {
            LrIndex::Finite(p) => Some(p),
            LrIndex::Infinity => None,
        },
        value,
        per_block: Some(blocks),
        truncation_q: part.q_max,
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SobolevMethod {
    Direct,
    Blocks,
}

/// Sobolev norm, either `(sum (1+|xi|^2)^s |u_hat|^2)^(1/2)` directly or as
/// the `r = 2` Besov aggregation.
pub fn sobolev_norm(
    part: &DyadicPartition,
    u: &mut SpectralField,
    s: f64,
    method: SobolevMethod,
) -> NormReport {
    match method {
        SobolevMethod::Blocks => {
            let mut rep = besov_norm(part, u, s, LrIndex::Finite(2.0));
            rep.kind = "sobolev-blocks".into();
            rep
        }
        SobolevMethod::Direct => {
            let grid = part.grid().clone();
            let n = grid.n();
            let cell = grid.cell_volume();
            let coef = u.coeffs();
            let mut acc = 0.0;
            for (i, c) in coef.iter().enumerate() {
                let idx = grid.decode(i);
                let mut k2 = 0.0;
                for a in 0..grid.dim() {
                    let f = grid.freq(idx[a] % n);
                    k2 += f * f;
                }
                acc += (1.0 + k2).powf(s) * c.norm_sqr();
            }
            NormReport {
                kind: "sobolev-direct".into(),
                s,
                r: Some(2.0),
                value: (acc * cell).sqrt(),
                per_block: None,
                truncation_q: part.q_max,
            }
        }
    }
}

/// Direct H^s norm without a partition in hand.
pub fn hs_norm(u: &mut SpectralField, s: f64) -> f64 {
    let grid = u.grid().clone();
    let n = grid.n();
    let cell = grid.cell_volume();
    let coef = u.coeffs();
    let mut acc = 0.0;
    for (i, c) in coef.iter().enumerate() {
        let idx = grid.decode(i);
        let mut k2 = 0.0;
        for a in 0..grid.dim() {
            let f = grid.freq(idx[a] % n);
            k2 += f * f;
        }
        acc += (1.0 + k2).powf(s) * c.norm_sqr();
    }
    (acc * cell).sqrt()
}

/// H^s norm of a pair `(a, u)` as the root of summed squares.
pub fn hs_norm_pair(a: &mut SpectralField, u: &mut VectorField, s: f64) -> f64 {
    let mut acc = hs_norm(a, s).powi(2);
    for c in &mut u.comps {
        acc += hs_norm(c, s).powi(2);
    }
    acc.sqrt()
}

/// Low/high frequency split at threshold `1/eps`:
/// `u_low = chi(eps D) u`, `u_high = (1 - chi(eps D)) u`; the parts sum back
/// to `u` exactly.
pub fn split_low_high(u: &mut SpectralField, eps: f64) -> (SpectralField, SpectralField) {
    assert!(eps > 0.0);
    let mut low = u.clone();
    low.apply_multiplier(|xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        Complex64::new(chi(eps * r), 0.0)
    })
    .expect("chi is finite");
    let mut high = u.clone();
    high.apply_multiplier(|xi| {
        let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        Complex64::new(1.0 - chi(eps * r), 0.0)
    })
    .expect("chi is finite");
    (low, high)
}

/// All coordinate multi-indices of total order `s` in `dim` variables.
fn multi_indices(dim: usize, s: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    match dim {
        1 => out.push([s, 0, 0]),
        2 => {
            for i in 0..=s {
                out.push([i, s - i, 0]);
            }
        }
        _ => {
            for i in 0..=s {
                for j in 0..=(s - i) {
                    out.push([i, j, s - i - j]);
                }
            }
        }
    }
    out
}

fn apply_partial(f: &SpectralField, alpha: &[usize; 3]) -> SpectralField {
    let mut out = f.clone();
    let grid = out.grid().clone();
    let n = grid.n();
    let coef = out.coeffs_mut();
    for (i, c) in coef.iter_mut().enumerate() {
        let idx = grid.decode(i);
        let mut m = Complex64::new(1.0, 0.0);
        for a in 0..grid.dim() {
            let xi = grid.freq(idx[a] % n);
            for _ in 0..alpha[a] {
                m *= Complex64::new(0.0, xi);
            }
        }
        *c *= m;
    }
    out
}

/// Weighted energy functional
/// `Gamma^s = sum_{|alpha| = s} ( ||d^alpha b||_2^2 + int w |d^alpha z|^2 )`
/// with the density weight `w` applied nodally to the `z` part. `D^s` is
/// the plain sum over coordinate derivatives of order `s`, no multinomial
/// weights, so measured constants are reproducible.
pub fn gamma_weighted(state: &mut AugmentedState, s: usize) -> Result<f64, LpError> {
    let w = state.weight();
    let wmin = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if wmin <= 0.0 {
        return Err(LpError::NotAdmissible { weight_min: wmin });
    }
    let grid = state.b.grid().clone();
    let cell = grid.cell_volume();
    let mut total = 0.0;
    for alpha in multi_indices(grid.dim(), s) {
        let mut db = apply_partial(&state.b, &alpha);
        for v in db.values() {
            total += v.norm_sqr() * cell;
        }
        for comp in &state.z.comps {
            let mut dz = apply_partial(comp, &alpha);
            for (v, wi) in dz.values().iter().zip(&w) {
                total += wi * v.norm_sqr() * cell;
            }
        }
    }
    Ok(total)
}

/// `sup |u| + sup |grad u|` with spectral gradient.
pub fn lipschitz_norm(u: &mut SpectralField) -> f64 {
    let sup = u.sup_norm();
    let mut grad = u.gradient();
    let grid = u.grid().clone();
    let mut gsup = 0.0f64;
    for i in 0..grid.len() {
        let mut s = 0.0;
        for c in &mut grad.comps {
            s += c.values()[i].norm_sqr();
        }
        gsup = gsup.max(s);
    }
    sup + gsup.sqrt()
}

/// Largest Lipschitz norm among a set of fields (used for pair norms like
/// `||(b, v)||_{C^{0,1}}`).
pub fn lipschitz_norm_many(fields: &mut [&mut SpectralField]) -> f64 {
    fields.iter_mut().map(|f| lipschitz_norm(f)).fold(0.0, f64::max)
}

/// `sup` of the full gradient magnitude over a set of fields, the
/// `||(Db, Dz)||_inf` ingredient of the energy estimates.
pub fn grad_sup_many(fields: &mut [&mut SpectralField]) -> f64 {
    let mut worst = 0.0f64;
    for f in fields.iter_mut() {
        let grid = f.grid().clone();
        let mut grad = f.gradient();
        for i in 0..grid.len() {
            let mut s = 0.0;
            for c in &mut grad.comps {
                s += c.values()[i].norm_sqr();
            }
            worst = worst.max(s);
        }
    }
    worst.sqrt()
}

/// Besov norm of the gradient of `a` (blockwise root of summed squares over
/// components).
fn besov_grad(part: &DyadicPartition, a: &mut SpectralField, s: f64, r: LrIndex) -> f64 {
    let mut grad = a.gradient();
    let mut per_block = vec![0.0f64; (part.q_max + 2) as usize];
    for comp in &mut grad.comps {
        for (q, v) in part.block_l2(comp, s) {
            per_block[(q + 1) as usize] += v * v;
        }
    }
    match r {
        LrIndex::Infinity => per_block.iter().map(|v| v.sqrt()).fold(0.0, f64::max),
        LrIndex::Finite(p) => per_block.iter().map(|v| v.sqrt().powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Measured constant of the commutator bound
/// `||[a, Delta_q] f||_2 <= C 2^{-qs} (||Da||_inf ||f||_{B^{s-1}} +
/// ||Da||_{B^{s-1}} ||f||_inf)` at one block `q` (the `l^2` case).
pub fn commutator_ratio(
    part: &DyadicPartition,
    a: &mut SpectralField,
    f: &mut SpectralField,
    q: i32,
    s: f64,
) -> Result<f64, LpError> {
    part.check_q(q)?;
    let grid = part.grid().clone();
    // [a, Delta_q] f = a (Delta_q f) - Delta_q (a f)
    let mut dq_f = part.dyadic_block(f, q, BlockKind::Delta)?;
    let a_vals = a.values().to_vec();
    let prod1: Vec<Complex64> =
        a_vals.iter().zip(dq_f.values()).map(|(x, y)| x * y).collect();
    let af: Vec<Complex64> = a_vals.iter().zip(f.values()).map(|(x, y)| x * y).collect();
    let mut af = SpectralField::from_values(&grid, af);
    let mut dq_af = part.dyadic_block(&mut af, q, BlockKind::Delta)?;
    let mut comm = SpectralField::from_values(&grid, prod1);
    let mut lhs_field = comm.sub(&mut dq_af);
    let lhs = lhs_field.l2_norm();

    let da_sup = grad_sup_many(&mut [a]);
    let f_sup = f.sup_norm();
    let f_besov = besov_norm(part, f, s - 1.0, LrIndex::Finite(2.0)).value;
    let da_besov = besov_grad(part, a, s - 1.0, LrIndex::Finite(2.0));
    let rhs = (-(q as f64) * s).exp2() * (da_sup * f_besov + da_besov * f_sup);
    if rhs <= 0.0 {
        // commutators with constants vanish up to roundoff
        let scale = a.sup_norm() * f.l2_norm();
        if lhs <= 1e-12 * scale.max(1e-300) {
            return Ok(0.0);
        }
        return Err(LpError::DegenerateBound);
    }
    Ok(lhs / rhs)
}

/// Max of [`commutator_ratio`] over the usable blocks.
pub fn commutator_ratio_max(
    part: &DyadicPartition,
    a: &mut SpectralField,
    f: &mut SpectralField,
    s: f64,
) -> Result<f64, LpError> {
    let mut worst = 0.0f64;
    for q in 0..=part.q_max {
        worst = worst.max(commutator_ratio(part, a, f, q, s)?);
    }
    Ok(worst)
}

/// Measured constant of the tame product bound
/// `||uv||_{H^k} <= C (||u||_inf ||v||_{H^k} + ||v||_inf ||u||_{H^k})`.
pub fn tame_product_ratio(
    u: &mut SpectralField,
    v: &mut SpectralField,
    k: f64,
) -> Result<f64, LpError> {
    let grid = u.grid().clone();
    let prod: Vec<Complex64> =
        u.values().iter().zip(v.values()).map(|(x, y)| x * y).collect();
    let mut uv = SpectralField::from_values(&grid, prod);
    let lhs = hs_norm(&mut uv, k);
    let rhs = u.sup_norm() * hs_norm(v, k) + v.sup_norm() * hs_norm(u, k);
    if rhs <= 0.0 {
        if lhs == 0.0 {
            return Ok(0.0);
        }
        return Err(LpError::DegenerateBound);
    }
    Ok(lhs / rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::field::CZERO;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring_field(grid: &Arc<TorusGrid>, r_lo: f64, r_hi: f64, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::from_values(
            grid,
            (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect(),
        );
        f.apply_multiplier(|xi| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r >= r_lo && r <= r_hi {
                Complex64::new(1.0, 0.0)
            } else {
                CZERO
            }
        })
        .unwrap();
        f
    }

    fn bandlimited(grid: &Arc<TorusGrid>, seed: u64) -> SpectralField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = SpectralField::from_values(
            grid,
            (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect(),
        );
        let cutoff = grid.dealias_cutoff();
        f.apply_multiplier(|xi| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r <= 0.8 * cutoff {
                Complex64::new((-0.05 * r * r).exp(), 0.0)
            } else {
                CZERO
            }
        })
        .unwrap();
        f
    }

    #[test]
    fn profiles_take_required_values() {
        assert_eq!(chi(0.5), 1.0); // inside the flat region
        assert_eq!(chi(1.0), 1.0);
        assert_eq!(chi(1.4), 0.0); // outside the support
        assert_eq!(phi(0.5), 0.0); // below the annulus
        assert_eq!(phi(2.0), 1.0); // in the flat part of the annulus
        assert_eq!(phi(3.0), 0.0); // above the annulus
        // support of phi inside {3/4 <= |xi| <= 8/3}
        assert_eq!(phi(0.74), 0.0);
        assert_eq!(phi(8.0 / 3.0 + 1e-9), 0.0);
    }

    #[test]
    fn partition_of_unity_on_random_lattice_points() {
        let grid = make_grid(2, 128, 17.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cutoff = grid.dealias_cutoff();
        let mut checked = 0;
        while checked < 200 {
            let i = rng.gen_range(0..grid.len());
            let mut xi = [0.0; 3];
            grid.wavevector(i, &mut xi);
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > cutoff {
                continue;
            }
            let s = part.partition_sum(r);
            assert!((s - 1.0).abs() < 1e-10, "partition sum {s} at radius {r}");
            checked += 1;
        }
    }

    #[test]
    fn quasi_orthogonality_of_separated_blocks() {
        let grid = make_grid(1, 512, 2.0 * std::f64::consts::PI).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut u = bandlimited(&grid, 1);
        for q in 0..=part.q_max {
            for p in 0..=part.q_max {
                if (p - q).abs() <= 1 {
                    continue;
                }
                let mut dq = part.dyadic_block(&mut u, q, BlockKind::Delta).unwrap();
                let mut dpq = part.dyadic_block(&mut dq, p, BlockKind::Delta).unwrap();
                assert!(dpq.l2_norm() < 1e-12, "Delta_{p} Delta_{q} != 0");
            }
        }
    }

    #[test]
    fn blocks_telescope_back_to_the_field() {
        let grid = make_grid(1, 512, 2.0 * std::f64::consts::PI).unwrap();
        let part = build_partition(&grid).unwrap();
        // keep the spectrum under the last full annulus so the finite
        // telescope closes
        let mut u = ring_field(&grid, 0.0, (part.q_max as f64).exp2() * 1.0, 2);
        let mut sum = SpectralField::zeros(&grid);
        for q in -1..=part.q_max {
            let mut dq = part.dyadic_block(&mut u, q, BlockKind::Delta).unwrap();
            sum.add_scaled(&mut dq, 1.0);
        }
        let mut diff = sum.sub(&mut u);
        let rel = diff.l2_norm() / u.l2_norm();
        assert!(rel < 1e-10, "telescoping defect {rel}");
        // and partial sums agree with the lowpass operator
        let q_mid = part.q_max / 2;
        let mut partial = SpectralField::zeros(&grid);
        for q in -1..=(q_mid - 1) {
            let mut dq = part.dyadic_block(&mut u, q, BlockKind::Delta).unwrap();
            partial.add_scaled(&mut dq, 1.0);
        }
        let mut low = part.dyadic_block(&mut u, q_mid, BlockKind::Lowpass).unwrap();
        let mut d2 = partial.sub(&mut low);
        assert!(d2.l2_norm() / u.l2_norm() < 1e-10);
    }

    #[test]
    fn annulus_field_is_reproduced_by_matching_block() {
        let grid = make_grid(1, 512, 2.0 * std::f64::consts::PI).unwrap();
        let part = build_partition(&grid).unwrap();
        let q0 = 3i32;
        // spectrum strictly inside the flat part of the q0 annulus:
        // phi(2^{-q0} xi) = 1 for 4/3 <= 2^{-q0}|xi| <= 2.2
        let scale = (q0 as f64).exp2();
        let mut u = ring_field(&grid, 1.5 * scale, 2.0 * scale, 3);
        let mut dq = part.dyadic_block(&mut u, q0, BlockKind::Delta).unwrap();
        let mut diff = dq.sub(&mut u);
        assert!(diff.l2_norm() / u.l2_norm() < 1e-12);
        for p in -1..=part.q_max {
            if (p - q0).abs() > 1 {
                let mut dp = part.dyadic_block(&mut u, p, BlockKind::Delta).unwrap();
                assert!(dp.l2_norm() < 1e-12, "leak into block {p}");
            }
        }
    }

    #[test]
    fn constant_field_lives_in_the_lowpass_block() {
        let grid = make_grid(2, 64, 9.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut u = SpectralField::constant(&grid, Complex64::new(0.7, 0.0));
        let mut d_1 = part.dyadic_block(&mut u, -1, BlockKind::Delta).unwrap();
        let mut diff = d_1.sub(&mut u);
        assert!(diff.l2_norm() < 1e-13);
        for q in 0..=part.q_max {
            let mut dq = part.dyadic_block(&mut u, q, BlockKind::Delta).unwrap();
            assert!(dq.l2_norm() < 1e-13);
        }
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let grid = make_grid(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut u = bandlimited(&grid, 4);
        assert!(matches!(
            part.dyadic_block(&mut u, part.q_max + 1, BlockKind::Delta),
            Err(LpError::QOutOfRange { .. })
        ));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = make_grid(1, 8, 100.0).unwrap(); // nyquist tiny
        assert!(matches!(build_partition(&grid), Err(LpError::GridTooCoarse { .. })));
    }

    #[test]
    fn single_annulus_besov_value() {
        let grid = make_grid(1, 512, 2.0 * std::f64::consts::PI).unwrap();
        let part = build_partition(&grid).unwrap();
        let q0 = 4i32;
        let scale = (q0 as f64).exp2();
        let mut u = ring_field(&grid, 1.5 * scale, 2.0 * scale, 5);
        // normalize ||u||_2 = 1
        let nrm = u.l2_norm();
        u.map_values(|v| v / nrm);
        // value ~ 2^{q0 s} since only block q0 is populated
        let s = 1.5f64;
        let rep = besov_norm(&part, &mut u, s, LrIndex::Finite(2.0));
        assert_relative_eq!(rep.value, (q0 as f64 * s).exp2(), max_relative = 1e-10);
        let rep_inf = besov_norm(&part, &mut u, s, LrIndex::Infinity);
        assert_relative_eq!(rep_inf.value, (q0 as f64 * s).exp2(), max_relative = 1e-10);
    }

    #[test]
    fn zero_field_has_zero_norms() {
        let grid = make_grid(2, 32, 6.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut z = SpectralField::zeros(&grid);
        assert_eq!(besov_norm(&part, &mut z, 1.0, LrIndex::Finite(1.0)).value, 0.0);
        assert_eq!(sobolev_norm(&part, &mut z, 2.0, SobolevMethod::Direct).value, 0.0);
        assert_eq!(lipschitz_norm(&mut z), 0.0);
    }

    #[test]
    fn sobolev_s0_is_l2() {
        let grid = make_grid(1, 256, 21.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut u = bandlimited(&grid, 6);
        let rep = sobolev_norm(&part, &mut u, 0.0, SobolevMethod::Direct);
        assert_relative_eq!(rep.value, u.l2_norm(), max_relative = 1e-13);
    }

    #[test]
    fn gaussian_h1_matches_analytic_value() {
        // u = exp(-x^2 / (2 sigma^2)): int (1+xi^2) |u_hat|^2 dxi
        // = sqrt(pi) sigma + sqrt(pi) / (2 sigma)  (continuum values; the
        // long box makes boundary and lattice errors negligible)
        let grid = make_grid(1, 2048, 80.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let sigma = 1.3f64;
        let mut u =
            SpectralField::from_real_fn(&grid, |x| (-x[0] * x[0] / (2.0 * sigma * sigma)).exp());
        let rep = sobolev_norm(&part, &mut u, 1.0, SobolevMethod::Direct);
        let pi = std::f64::consts::PI;
        let want = (pi.sqrt() * sigma + pi.sqrt() / (2.0 * sigma)).sqrt();
        assert_relative_eq!(rep.value, want, max_relative = 1e-6);
    }

    #[test]
    fn direct_and_block_sobolev_are_equivalent() {
        // the calibrated lattice constant bounds the ratio for any field
        // with covered spectrum
        let grid = make_grid(1, 512, 15.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let s = 2.0;
        let band = part.sobolev_equivalence_constant(s) * (1.0 + 1e-9);
        assert!(band.is_finite() && band >= 1.0);
        for seed in 0..20 {
            let mut u = bandlimited(&grid, 100 + seed);
            let d = sobolev_norm(&part, &mut u, s, SobolevMethod::Direct).value;
            let b = sobolev_norm(&part, &mut u, s, SobolevMethod::Blocks).value;
            let r = (d / b).max(b / d);
            assert!(r <= band, "ratio {r} outside calibrated band {band}");
        }
    }

    #[test]
    fn split_low_high_is_exact_partition() {
        let grid = make_grid(1, 512, 20.0).unwrap();
        let eps = 0.15;
        let mut u = bandlimited(&grid, 7);
        let (low, mut high) = split_low_high(&mut u, eps);
        let mut sum = low.clone();
        sum.add_scaled(&mut high, 1.0);
        let mut d = sum.sub(&mut u);
        assert!(d.l2_norm() < 1e-13);
        // spectrum inside the flat region: u_high = 0
        let mut inner = ring_field(&grid, 0.0, CHI_FLAT / eps * 0.99, 8);
        let (_, mut h) = split_low_high(&mut inner, eps);
        assert!(h.l2_norm() < 1e-13);
        // spectrum outside the support: u_low = 0
        let hi_lo = CHI_SUPPORT / eps * 1.01;
        let mut outer = ring_field(&grid, hi_lo, hi_lo * 1.5, 9);
        if outer.l2_norm() > 0.0 {
            let (mut l, _) = split_low_high(&mut outer, eps);
            assert!(l.l2_norm() < 1e-13);
        }
    }

    #[test]
    fn high_frequency_exchange_constant_from_support() {
        // ||u_h||_{B^s_{2,1}} <= (eps/eps0)^alpha ||u_h||_{B^{s+alpha}_{2,1}}
        // with eps0 = 1.1 * 3/8 from the support of 1 - chi
        let grid = make_grid(1, 1024, 20.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let s = 1.0;
        let alpha = 0.75;
        let eps0 = CHI_FLAT * 3.0 / 8.0;
        for (i, &eps) in [0.05f64, 0.1, 0.2].iter().enumerate() {
            let mut u = bandlimited(&grid, 10 + i as u64);
            let (_, mut uh) = split_low_high(&mut u, eps);
            if uh.l2_norm() < 1e-12 {
                continue;
            }
            let lhs = besov_norm(&part, &mut uh, s, LrIndex::Finite(1.0)).value;
            let rhs = besov_norm(&part, &mut uh, s + alpha, LrIndex::Finite(1.0)).value;
            let ratio = lhs / (eps.powf(alpha) * rhs);
            assert!(
                ratio <= eps0.powf(-alpha) * (1.0 + 1e-9),
                "exchange ratio {ratio} exceeds support bound {}",
                eps0.powf(-alpha)
            );
        }
    }

    #[test]
    fn gamma_zero_of_unweighted_state_is_z_norm() {
        let grid = make_grid(1, 256, 12.0).unwrap();
        let z1 = bandlimited(&grid, 11);
        let mut state = crate::madelung::AugmentedState {
            b: SpectralField::zeros(&grid),
            z: VectorField::from_comps(vec![z1.clone()]).unwrap(),
            eps: 0.3,
            normalization: crate::madelung::BNormalization::DynaSlow,
        };
        let g0 = gamma_weighted(&mut state, 0).unwrap();
        let mut z = z1;
        assert_relative_eq!(g0, z.l2_norm().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn gamma_two_matches_finite_differences() {
        // analytic Gaussian state; dense 4th-order finite differences as the
        // independent oracle for D^2
        let grid = make_grid(1, 1024, 40.0).unwrap();
        let eps = 0.3;
        let b = SpectralField::from_real_fn(&grid, |x| 0.5 * (-x[0] * x[0] / 6.0).exp());
        let zre = SpectralField::from_real_fn(&grid, |x| 0.3 * (-x[0] * x[0] / 5.0).exp());
        let zim = SpectralField::from_real_fn(&grid, |x| 0.2 * (-x[0] * x[0] / 7.0).exp());
        let z = {
            let vals: Vec<Complex64> = zre
                .clone()
                .values()
                .iter()
                .zip(zim.clone().values())
                .map(|(r, i)| Complex64::new(r.re, i.re))
                .collect();
            SpectralField::from_values(&grid, vals)
        };
        let mut state = crate::madelung::AugmentedState {
            b: b.clone(),
            z: VectorField::from_comps(vec![z.clone()]).unwrap(),
            eps,
            normalization: crate::madelung::BNormalization::DynaSlow,
        };
        let got = gamma_weighted(&mut state, 2).unwrap();

        // oracle: 4th-order centered second derivative on the nodes
        let dx = grid.dx();
        let n = grid.len();
        let d2 = |vals: &[Complex64]| -> Vec<Complex64> {
            (0..n)
                .map(|i| {
                    let at = |o: i64| vals[((i as i64 + o).rem_euclid(n as i64)) as usize];
                    (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2))
                        / (12.0 * dx * dx)
                })
                .collect()
        };
        let cell = grid.cell_volume();
        let w: Vec<f64> = b
            .clone()
            .values()
            .iter()
            .map(|bv| 1.0 + eps / std::f64::consts::SQRT_2 * bv.re)
            .collect();
        let b2 = d2(b.clone().values());
        let z2 = d2(z.clone().values());
        let mut want = 0.0;
        for i in 0..n {
            want += b2[i].norm_sqr() * cell + w[i] * z2[i].norm_sqr() * cell;
        }
        assert_relative_eq!(got, want, max_relative = 1e-6);
    }

    #[test]
    fn lipschitz_of_simple_fields() {
        let grid = make_grid(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let mut c = SpectralField::constant(&grid, Complex64::new(-2.5, 0.0));
        assert_relative_eq!(lipschitz_norm(&mut c), 2.5, max_relative = 1e-12);
        let xi0 = 3.0;
        let mut s = SpectralField::from_real_fn(&grid, |x| (xi0 * x[0]).sin());
        assert_relative_eq!(lipschitz_norm(&mut s), 1.0 + xi0, max_relative = 1e-6);
    }

    #[test]
    fn lipschitz_is_stable_under_refinement() {
        let coarse = make_grid(1, 256, 18.0).unwrap();
        let fine = make_grid(1, 1024, 18.0).unwrap();
        let f = |x: &[f64]| {
            let k = 2.0 * std::f64::consts::PI / 18.0;
            0.8 * (3.0 * k * x[0]).sin() + 0.4 * (7.0 * k * x[0]).cos()
        };
        let mut uc = SpectralField::from_real_fn(&coarse, f);
        let mut uf = SpectralField::from_real_fn(&fine, f);
        let (lc, lf) = (lipschitz_norm(&mut uc), lipschitz_norm(&mut uf));
        assert!((lc - lf).abs() / lf < 0.01, "refinement drift {lc} vs {lf}");
    }

    #[test]
    fn commutator_vanishes_for_constant_multiplier_field() {
        let grid = make_grid(1, 512, 16.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut a = SpectralField::constant(&grid, Complex64::new(2.0, 0.0));
        let mut f = bandlimited(&grid, 12);
        let r = commutator_ratio(&part, &mut a, &mut f, 2, 2.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn commutator_ratio_is_bounded_over_blocks() {
        let grid = make_grid(1, 1024, 25.0).unwrap();
        let part = build_partition(&grid).unwrap();
        let mut a = SpectralField::from_real_fn(&grid, |x| (1.0 + x[0] * x[0] / 8.0).recip());
        let mut f = bandlimited(&grid, 13);
        let s = 2.0;
        let mut ratios = Vec::new();
        for q in 0..=part.q_max {
            ratios.push(commutator_ratio(&part, &mut a, &mut f, q, s).unwrap());
        }
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(worst.is_finite() && worst > 0.0);
        assert!(worst < 50.0, "commutator constant blew up: {ratios:?}");
        let via_max = commutator_ratio_max(&part, &mut a, &mut f, s).unwrap();
        assert_relative_eq!(via_max, worst, max_relative = 1e-12);
    }

    #[test]
    fn tame_product_ratio_is_bounded() {
        let grid = make_grid(1, 512, 14.0).unwrap();
        let mut worst = 0.0f64;
        for seed in 0..10 {
            let mut u = bandlimited(&grid, 200 + seed);
            let mut v = bandlimited(&grid, 300 + seed);
            let r = tame_product_ratio(&mut u, &mut v, 2.0).unwrap();
            worst = worst.max(r);
        }
        assert!(worst < 3.0, "tame product constant {worst}");
    }

    #[test]
    fn degenerate_bound_is_reported() {
        let grid = make_grid(1, 256, 10.0).unwrap();
        let mut z = SpectralField::zeros(&grid);
        let mut u = bandlimited(&grid, 14);
        let mut z2 = z.clone();
        assert_eq!(tame_product_ratio(&mut z, &mut z2, 1.0).unwrap(), 0.0);
        // nonzero lhs with zero rhs cannot happen for the product, so
        // exercise the commutator path instead
        let part = build_partition(&grid).unwrap();
        let r = commutator_ratio(&part, &mut z, &mut u, 1, 1.0).unwrap();
        assert_eq!(r, 0.0);
    }
}
