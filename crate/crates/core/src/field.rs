//! Complex scalar and vector fields with synchronized physical and Fourier
//! representations.
//!
//! A field keeps both node values and Fourier coefficients and re-syncs
//! lazily: reading one representation transforms on demand, mutating one
//! invalidates the other. Fields are owned by a single task at a time; the
//! grid behind them is shared.

use crate::grid::{GridError, TorusGrid};
use num_complex::Complex64;
use std::sync::Arc;

pub const CZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<TorusGrid>,
    vals: Vec<Complex64>,
    coef: Vec<Complex64>,
    has_vals: bool,
    has_coef: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        let len = grid.len();
        SpectralField {
            grid: grid.clone(),
            vals: vec![CZERO; len],
            coef: vec![CZERO; len],
            has_vals: true,
            has_coef: true,
        }
    }

    pub fn from_values(grid: &Arc<TorusGrid>, vals: Vec<Complex64>) -> Self {
        assert_eq!(vals.len(), grid.len());
        let coef = vec![CZERO; vals.len()];
        SpectralField { grid: grid.clone(), vals, coef, has_vals: true, has_coef: false }
    }

    pub fn from_coeffs(grid: &Arc<TorusGrid>, coef: Vec<Complex64>) -> Self {
        assert_eq!(coef.len(), grid.len());
        let vals = vec![CZERO; coef.len()];
        SpectralField { grid: grid.clone(), vals, coef, has_vals: false, has_coef: true }
    }

    /// Sample a function of the node position.
    pub fn from_fn(grid: &Arc<TorusGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut vals = vec![CZERO; grid.len()];
        let mut x = [0.0; 3];
        for (i, v) in vals.iter_mut().enumerate() {
            grid.position(i, &mut x);
            *v = f(&x[..grid.dim()]);
        }
        Self::from_values(grid, vals)
    }

    /// Sample a real-valued function of the node position.
    pub fn from_real_fn(grid: &Arc<TorusGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(grid: &Arc<TorusGrid>, c: Complex64) -> Self {
        Self::from_values(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        &self.grid
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid)
    }

    fn ensure_vals(&mut self) {
        if !self.has_vals {
            self.vals.copy_from_slice(&self.coef);
            self.grid.fft_all_axes(&mut self.vals, true);
            self.has_vals = true;
        }
    }

    fn ensure_coef(&mut self) {
        if !self.has_coef {
            self.coef.copy_from_slice(&self.vals);
            self.grid.fft_all_axes(&mut self.coef, false);
            self.has_coef = true;
        }
    }

    /// Force a transform into one representation; the representations stay
    /// consistent either way, this just controls which one is materialized.
    pub fn transform(&mut self, dir: Direction) {
        match dir {
            Direction::Forward => self.ensure_coef(),
            Direction::Inverse => self.ensure_vals(),
        }
    }

    pub fn values(&mut self) -> &[Complex64] {
        self.ensure_vals();
        &self.vals
    }

    pub fn coeffs(&mut self) -> &[Complex64] {
        self.ensure_coef();
        &self.coef
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        self.ensure_vals();
        self.has_coef = false;
        &mut self.vals
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        self.ensure_coef();
        self.has_vals = false;
        &mut self.coef
    }

    /// Pointwise map over node values.
    pub fn map_values(&mut self, f: impl Fn(Complex64) -> Complex64) {
        for v in self.values_mut() {
            *v = f(*v);
        }
    }

    /// Multiply the coefficients pointwise by a symbol `m(xi)`.
    ///
    /// The caller supplies the value at `xi = 0` explicitly; any non-finite
    /// symbol value is an error naming the offending frequency.
    pub fn apply_multiplier(
        &mut self,
        m: impl Fn(&[f64]) -> Complex64,
    ) -> Result<(), GridError> {
        let dim = self.grid.dim();
        let grid = self.grid.clone();
        let mut xi = [0.0; 3];
        let coef = self.coeffs_mut();
        for (i, c) in coef.iter_mut().enumerate() {
            grid.wavevector(i, &mut xi);
            let mv = m(&xi[..dim]);
            if !mv.re.is_finite() || !mv.im.is_finite() {
                return Err(GridError::NonFiniteSymbol { xi: xi[..dim].to_vec() });
            }
            *c *= mv;
        }
        Ok(())
    }

    /// Zero every coefficient with any `|k_j| > n/3` (two-thirds rule);
    /// in particular the Nyquist mode is always removed.
    pub fn dealias(&mut self) {
        let grid = self.grid.clone();
        let n = grid.n() as i64;
        let coef = self.coeffs_mut();
        for (i, c) in coef.iter_mut().enumerate() {
            let idx = grid.decode(i);
            for a in 0..grid.dim() {
                if 3 * grid.k_int(idx[a]).abs() > n {
                    *c = CZERO;
                    break;
                }
            }
        }
    }

    /// Spectral gradient: dim fields with coefficients `i xi_j u_hat`.
    pub fn gradient(&mut self) -> VectorField {
        self.ensure_coef();
        let dim = self.grid.dim();
        let mut comps = Vec::with_capacity(dim);
        for axis in 0..dim {
            let mut c = self.coef.clone();
            let grid = &self.grid;
            let n = grid.n();
            for (i, v) in c.iter_mut().enumerate() {
                let idx = grid.decode(i);
                let xi = grid.freq(idx[axis] % n);
                *v *= Complex64::new(0.0, xi);
            }
            comps.push(SpectralField::from_coeffs(grid, c));
        }
        VectorField { comps }
    }

    /// Spectral Laplacian: coefficients scaled by `-|xi|^2`.
    pub fn laplacian(&mut self) -> SpectralField {
        let mut out = self.clone();
        out.apply_multiplier(|xi| {
            let k2: f64 = xi.iter().map(|x| x * x).sum();
            Complex64::new(-k2, 0.0)
        })
        .expect("polynomial symbol is finite");
        out
    }

    /// Physical L2 norm over the box (exact nodal quadrature; equals the
    /// coefficient L2 norm by Parseval).
    pub fn l2_norm(&mut self) -> f64 {
        let w = self.grid.cell_volume();
        let s: f64 = if self.has_vals {
            self.vals.iter().map(|v| v.norm_sqr()).sum()
        } else {
            self.coeffs().iter().map(|v| v.norm_sqr()).sum()
        };
        (s * w).sqrt()
    }

    pub fn sup_norm(&mut self) -> f64 {
        self.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sup over a Fourier-interpolated refinement of the node lattice
    /// (zero-padded coefficients on a grid `factor` times finer). Catches
    /// peaks of oscillatory fields that land between coarse nodes.
    pub fn sup_norm_refined(&mut self, factor: usize) -> f64 {
        assert!(factor.is_power_of_two());
        if factor == 1 {
            return self.sup_norm();
        }
        let grid = self.grid.clone();
        let (dim, n) = (grid.dim(), grid.n());
        let fine = crate::grid::make_grid(dim, factor * n, grid.box_length())
            .expect("refined grid parameters are valid");
        let scale = (factor as f64).powi(dim as i32).sqrt();
        let coef = self.coeffs();
        let mut fc = vec![CZERO; fine.len()];
        let nf = fine.n();
        for (i, c) in coef.iter().enumerate() {
            let idx = grid.decode(i);
            let mut fidx = [0usize; 3];
            for a in 0..dim {
                let k = grid.k_int(idx[a]);
                fidx[a] = if k >= 0 { k as usize } else { (nf as i64 + k) as usize };
            }
            let flat = match dim {
                1 => fidx[0],
                2 => fidx[0] * nf + fidx[1],
                _ => (fidx[0] * nf + fidx[1]) * nf + fidx[2],
            };
            fc[flat] = scale * c;
        }
        let mut fine_field = SpectralField::from_coeffs(&fine, fc);
        fine_field.sup_norm()
    }

    /// Integral of the values over the box.
    pub fn integral(&mut self) -> Complex64 {
        let w = self.grid.cell_volume();
        self.values().iter().sum::<Complex64>() * w
    }

    pub fn is_finite(&mut self) -> bool {
        self.values().iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `self += s * other` on node values.
    pub fn add_scaled(&mut self, other: &mut SpectralField, s: f64) {
        assert!(self.same_grid(other));
        other.ensure_vals();
        let o = &other.vals;
        for (a, b) in self.values_mut().iter_mut().zip(o) {
            *a += s * b;
        }
    }

    /// Pointwise difference as a new field.
    pub fn sub(&mut self, other: &mut SpectralField) -> SpectralField {
        assert!(self.same_grid(other));
        let vals = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| a - b)
            .collect();
        SpectralField::from_values(&self.grid, vals)
    }

    /// Circular node shift by whole lattice steps (exact translation).
    pub fn shift_nodes(&mut self, by: &[i64]) -> SpectralField {
        let grid = self.grid.clone();
        let n = grid.n() as i64;
        let vals = self.values();
        let mut out = vec![CZERO; vals.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let idx = grid.decode(i);
            let mut src = [0usize; 3];
            for a in 0..grid.dim() {
                let s = (idx[a] as i64 - by[a]).rem_euclid(n);
                src[a] = s as usize;
            }
            let flat = match grid.dim() {
                1 => src[0],
                2 => src[0] * grid.n() + src[1],
                _ => (src[0] * grid.n() + src[1]) * grid.n() + src[2],
            };
            *o = vals[flat];
        }
        SpectralField::from_values(&grid, out)
    }

    /// Largest deviation from Hermitian symmetry of the coefficients,
    /// relative to the coefficient sup; zero for a real-valued field.
    pub fn hermitian_defect(&mut self) -> f64 {
        let grid = self.grid.clone();
        let n = grid.n();
        let coef = self.coeffs();
        let scale = coef.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst = 0.0f64;
        for (i, c) in coef.iter().enumerate() {
            let idx = grid.decode(i);
            let mut neg = [0usize; 3];
            for a in 0..grid.dim() {
                neg[a] = (n - idx[a]) % n;
            }
            let flat = match grid.dim() {
                1 => neg[0],
                2 => neg[0] * n + neg[1],
                _ => (neg[0] * n + neg[1]) * n + neg[2],
            };
            let d = (c - coef[flat].conj()).norm();
            worst = worst.max(d / scale);
        }
        worst
    }
}

/// `dim` scalar fields sharing one grid.
#[derive(Clone)]
pub struct VectorField {
    pub comps: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<TorusGrid>) -> Self {
        VectorField { comps: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect() }
    }

    pub fn from_comps(comps: Vec<SpectralField>) -> Result<Self, GridError> {
        let dim = comps[0].grid().dim();
        if comps.len() != dim {
            return Err(GridError::ArityMismatch { expected: dim, got: comps.len() });
        }
        if !comps.iter().all(|c| c.same_grid(&comps[0])) {
            return Err(GridError::GridMismatch);
        }
        Ok(VectorField { comps })
    }

    pub fn grid(&self) -> &Arc<TorusGrid> {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// Spectral divergence `sum_j i xi_j u_j`.
    pub fn divergence(&mut self) -> SpectralField {
        let grid = self.grid().clone();
        let n = grid.n();
        let mut out = vec![CZERO; grid.len()];
        for (axis, comp) in self.comps.iter_mut().enumerate() {
            let coef = comp.coeffs();
            for (i, o) in out.iter_mut().enumerate() {
                let idx = grid.decode(i);
                let xi = grid.freq(idx[axis] % n);
                *o += Complex64::new(0.0, xi) * coef[i];
            }
        }
        SpectralField::from_coeffs(&grid, out)
    }

    /// L2 norm of the curl (all antisymmetrized derivative pairs);
    /// identically zero in one dimension.
    pub fn curl_l2(&mut self) -> f64 {
        let dim = self.dim();
        if dim == 1 {
            return 0.0;
        }
        let mut total = 0.0;
        for a in 0..dim {
            for b in (a + 1)..dim {
                let mut da = self.comps[b].clone();
                da.apply_axis_derivative(a);
                let mut db = self.comps[a].clone();
                db.apply_axis_derivative(b);
                let mut diff = da.sub(&mut db);
                let nrm = diff.l2_norm();
                total += nrm * nrm;
            }
        }
        total.sqrt()
    }

    /// Square root of the summed squared L2 norms of all components.
    pub fn l2_norm(&mut self) -> f64 {
        self.comps.iter_mut().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&mut self) -> f64 {
        let grid = self.grid().clone();
        let mut worst = 0.0f64;
        for i in 0..grid.len() {
            let mut s = 0.0;
            for c in &mut self.comps {
                s += c.values()[i].norm_sqr();
            }
            worst = worst.max(s);
        }
        worst.sqrt()
    }

    pub fn dealias(&mut self) {
        for c in &mut self.comps {
            c.dealias();
        }
    }

    pub fn add_scaled(&mut self, other: &mut VectorField, s: f64) {
        for (a, b) in self.comps.iter_mut().zip(other.comps.iter_mut()) {
            a.add_scaled(b, s);
        }
    }
}

impl SpectralField {
    /// Derivative along one axis, `i xi_axis` in Fourier.
    pub fn apply_axis_derivative(&mut self, axis: usize) {
        let grid = self.grid.clone();
        let n = grid.n();
        let coef = self.coeffs_mut();
        for (i, c) in coef.iter_mut().enumerate() {
            let idx = grid.decode(i);
            let xi = grid.freq(idx[axis] % n);
            *c *= Complex64::new(0.0, xi);
        }
    }
}

/// Spectral differentiation entry points matching the artifact interface.
pub mod differentiate {
    use super::*;

    pub fn gradient(f: &mut SpectralField) -> VectorField {
        f.gradient()
    }

    pub fn divergence(v: &mut VectorField) -> SpectralField {
        v.divergence()
    }

    pub fn laplacian(f: &mut SpectralField) -> SpectralField {
        f.laplacian()
    }
}
