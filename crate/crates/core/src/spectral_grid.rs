//! Periodic uniform grids and FFT-based differential operators.

use std::sync::Arc;

use num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Uniform periodic grid on `[0, L_x) x [0, L_y) (x [0, L_z))`.
///
/// Two-dimensional grids store a trailing unit axis so loops can be written
/// once for both dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    counts: [usize; 3],
    lengths: [T; 3],
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(counts: &[usize], lengths: &[T]) -> Result<Self> {
        let dim = counts.len();
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} point counts but {} lengths",
                dim,
                lengths.len()
            )));
        }
        let mut c = [1usize; 3];
        let mut l = [T::one(); 3];
        for a in 0..dim {
            if counts[a] < 4 || !counts[a].is_multiple_of(2) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: point count {} must be even and at least 4",
                    counts[a]
                )));
            }
            if !(lengths[a] > T::zero()) || !lengths[a].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a}: length must be positive")));
            }
            c[a] = counts[a];
            l[a] = lengths[a];
        }
        Ok(Self {
            dim,
            counts: c,
            lengths: l,
        })
    }

    /// Square (2-D) or cubic (3-D) grid with equal counts and lengths.
    pub fn uniform(dim: usize, n: usize, length: T) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts[..self.dim]
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths[..self.dim]
    }

    /// Counts padded with 1 for a 2-D grid.
    pub fn counts3(&self) -> [usize; 3] {
        self.counts
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.lengths[axis] / from_usize(self.counts[axis])
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim).fold(T::one(), |acc, a| acc * self.spacing(a))
    }

    pub fn volume(&self) -> T {
        (0..self.dim).fold(T::one(), |acc, a| acc * self.lengths[a])
    }

    pub fn num_points(&self) -> usize {
        self.counts.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.counts[0] * (j + self.counts[1] * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.counts[0];
        let r = idx / self.counts[0];
        [i, r % self.counts[1], r / self.counts[1]]
    }

    /// Physical coordinates of a node; unused axes are zero.
    #[inline]
    pub fn node(&self, idx: usize) -> [T; 3] {
        let ijk = self.unindex(idx);
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = from_usize::<T>(ijk[a]) * self.spacing(a);
        }
        x
    }

    /// Angular wavenumber of FFT index `m` on `axis` (symmetric range).
    #[inline]
    pub fn wavenumber(&self, axis: usize, m: usize) -> T {
        let n = self.counts[axis];
        let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
        lit::<T>(signed) * T::TAU() / self.lengths[axis]
    }
}

/// Real samples on a [`GridSpec`], row-major with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.num_points(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self::constant(grid, T::zero())
    }

    pub fn constant(grid: GridSpec<T>, c: T) -> Self {
        Self {
            grid,
            values: vec![c; grid.num_points()],
        }
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: GridSpec<T>, mut f: impl FnMut([T; 3]) -> T) -> Self {
        let values = (0..grid.num_points()).map(|i| f(grid.node(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(i) => Err(Error::InvalidField(format!("non-finite sample at index {i}"))),
        }
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn mean(&self) -> T {
        let s = self.values.iter().fold(T::zero(), |acc, &x| acc + x);
        s / from_usize(self.values.len())
    }

    /// Circular shift by whole cells: `out[i + s] = self[i]`.
    pub fn roll(&self, shift: &[isize]) -> Self {
        let c = self.grid.counts3();
        let mut s = [0usize; 3];
        for (a, &sh) in shift.iter().enumerate().take(self.grid.dim()) {
            s[a] = sh.rem_euclid(c[a] as isize) as usize;
        }
        let mut out = vec![T::zero(); self.values.len()];
        for (idx, &x) in self.values.iter().enumerate() {
            let [i, j, k] = self.grid.unindex(idx);
            let t = self.grid.index((i + s[0]) % c[0], (j + s[1]) % c[1], (k + s[2]) % c[2]);
            out[t] = x;
        }
        Self {
            grid: self.grid,
            values: out,
        }
    }
}

/// Cell-volume weighted sum of the samples.
pub fn integrate<T: Scalar>(f: &Field<T>) -> T {
    let s = f.values().iter().fold(T::zero(), |acc, &x| acc + x);
    s * f.grid().cell_volume()
}

/// Cached FFT plans and wavenumber tables for one grid.
///
/// Spectra use the half-complex layout: index `kx + (nx/2+1) * (ky + ny * kz)`.
pub struct Spectral<T: Scalar> {
    grid: GridSpec<T>,
    nh: usize,
    r2c: Arc<dyn RealToComplex<T>>,
    c2r: Arc<dyn ComplexToReal<T>>,
    fwd: [Arc<dyn Fft<T>>; 2],
    inv: [Arc<dyn Fft<T>>; 2],
    k2: Vec<T>,
    weight: Vec<T>,
}

impl<T: Scalar> Spectral<T> {
    pub fn new(grid: GridSpec<T>) -> Self {
        let c = grid.counts3();
        let nh = c[0] / 2 + 1;
        let mut rp = RealFftPlanner::<T>::new();
        let mut cp = FftPlanner::<T>::new();
        let r2c = rp.plan_fft_forward(c[0]);
        let c2r = rp.plan_fft_inverse(c[0]);
        let fwd = [cp.plan_fft_forward(c[1]), cp.plan_fft_forward(c[2])];
        let inv = [cp.plan_fft_inverse(c[1]), cp.plan_fft_inverse(c[2])];
        let len = nh * c[1] * c[2];
        let mut k2 = vec![T::zero(); len];
        let mut weight = vec![T::zero(); len];
        for kz in 0..c[2] {
            let wz = if grid.dim() == 3 {
                grid.wavenumber(2, kz)
            } else {
                T::zero()
            };
            for ky in 0..c[1] {
                let wy = grid.wavenumber(1, ky);
                for kx in 0..nh {
                    let wx = grid.wavenumber(0, kx);
                    let s = kx + nh * (ky + c[1] * kz);
                    k2[s] = wx * wx + wy * wy + wz * wz;
                    weight[s] = if kx == 0 || 2 * kx == c[0] { T::one() } else { lit(2.0) };
                }
            }
        }
        Self {
            grid,
            nh,
            r2c,
            c2r,
            fwd,
            inv,
            k2,
            weight,
        }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// |k|^2 on the half-complex layout.
    pub fn k_squared(&self) -> &[T] {
        &self.k2
    }

    pub fn spectrum_len(&self) -> usize {
        self.k2.len()
    }

    /// Half-spectrum column count along x.
    pub fn half_x(&self) -> usize {
        self.nh
    }

    fn check(&self, f: &Field<T>) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Unnormalized forward transform of a real field.
    pub fn forward(&self, data: &[T]) -> Vec<Complex<T>> {
        let c = self.grid.counts3();
        let nh = self.nh;
        let mut spec = vec![Complex::new(T::zero(), T::zero()); nh * c[1] * c[2]];
        let mut row = self.r2c.make_input_vec();
        let mut out = self.r2c.make_output_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for line in 0..c[1] * c[2] {
            row.copy_from_slice(&data[line * c[0]..(line + 1) * c[0]]);
            self.r2c
                .process_with_scratch(&mut row, &mut out, &mut scratch)
                .expect("buffer sizes fixed at plan time");
            spec[line * nh..(line + 1) * nh].copy_from_slice(&out);
        }
        self.axis_pass(&mut spec, 1, &self.fwd[0]);
        if self.grid.dim() == 3 {
            self.axis_pass(&mut spec, 2, &self.fwd[1]);
        }
        spec
    }

    /// Normalized inverse transform back to real samples.
    pub fn inverse(&self, mut spec: Vec<Complex<T>>) -> Vec<T> {
        let c = self.grid.counts3();
        let nh = self.nh;
        if self.grid.dim() == 3 {
            self.axis_pass(&mut spec, 2, &self.inv[1]);
        }
        self.axis_pass(&mut spec, 1, &self.inv[0]);
        let scale = T::one() / from_usize(self.grid.num_points());
        let mut data = vec![T::zero(); self.grid.num_points()];
        let mut inp = self.c2r.make_input_vec();
        let mut row = self.c2r.make_output_vec();
        let mut scratch = self.c2r.make_scratch_vec();
        for line in 0..c[1] * c[2] {
            inp.copy_from_slice(&spec[line * nh..(line + 1) * nh]);
            inp[0].im = T::zero();
            inp[nh - 1].im = T::zero();
            self.c2r
                .process_with_scratch(&mut inp, &mut row, &mut scratch)
                .expect("buffer sizes fixed at plan time");
            for (d, &r) in data[line * c[0]..(line + 1) * c[0]].iter_mut().zip(row.iter()) {
                *d = r * scale;
            }
        }
        data
    }

    fn axis_pass(&self, spec: &mut [Complex<T>], axis: usize, plan: &Arc<dyn Fft<T>>) {
        let c = self.grid.counts3();
        let nh = self.nh;
        let n = c[axis];
        let (stride, outer, inner) = if axis == 1 {
            (nh, c[2], nh)
        } else {
            (nh * c[1], 1, nh * c[1])
        };
        let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * nh * c[1];
            for i in 0..inner {
                for (t, b) in buf.iter_mut().enumerate() {
                    *b = spec[base + i + t * stride];
                }
                plan.process_with_scratch(&mut buf, &mut scratch);
                for (t, b) in buf.iter().enumerate() {
                    spec[base + i + t * stride] = *b;
                }
            }
        }
    }

    /// Apply a real Fourier multiplier indexed on the half-complex layout.
    pub fn apply_multiplier(&self, f: &[T], mult: impl Fn(usize) -> T) -> Vec<T> {
        let mut spec = self.forward(f);
        for (s, z) in spec.iter_mut().enumerate() {
            *z = *z * mult(s);
        }
        self.inverse(spec)
    }

    /// Solve `-Δφ = w - mean(w)` with `mean(φ) = 0`.
    pub fn poisson_solve(&self, w: &Field<T>) -> Result<Field<T>> {
        self.check(w)?;
        w.check_finite()?;
        let k2 = &self.k2;
        let vals = self.apply_multiplier(w.values(), |s| if s == 0 { T::zero() } else { T::one() / k2[s] });
        Field::new(self.grid, vals)
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        f.check_finite()?;
        let k2 = &self.k2;
        let vals = self.apply_multiplier(f.values(), |s| -k2[s]);
        Field::new(self.grid, vals)
    }

    /// `Σ mult(k) |f̂(k)|^2` over the full spectrum, scaled to the integral convention.
    pub fn quadratic_form(&self, spec: &[Complex<T>], mult: impl Fn(usize) -> T) -> T {
        let n: T = from_usize(self.grid.num_points());
        let mut acc = T::zero();
        for (s, z) in spec.iter().enumerate() {
            acc = acc + self.weight[s] * mult(s) * z.norm_sqr();
        }
        acc * self.grid.cell_volume() / n
    }

    /// `∫|∇f|^2` via Parseval.
    pub fn dirichlet_energy(&self, f: &Field<T>) -> Result<T> {
        self.check(f)?;
        f.check_finite()?;
        let spec = self.forward(f.values());
        Ok(self.quadratic_form(&spec, |s| self.k2[s]))
    }

    /// Dirichlet energy of `φ = (-Δ)^{-1} w` from the spectrum of `w`.
    pub fn inverse_dirichlet(&self, w_spec: &[Complex<T>]) -> T {
        self.quadratic_form(w_spec, |s| if s == 0 { T::zero() } else { T::one() / self.k2[s] })
    }
}

/// One-shot Poisson solve; plans are built for the call.
pub fn poisson_solve<T: Scalar>(w: &Field<T>) -> Result<Field<T>> {
    Spectral::new(*w.grid()).poisson_solve(w)
}

/// One-shot spectral Laplacian.
pub fn laplacian<T: Scalar>(f: &Field<T>) -> Result<Field<T>> {
    Spectral::new(*f.grid()).laplacian(f)
}

/// One-shot Parseval Dirichlet energy.
pub fn dirichlet_energy<T: Scalar>(f: &Field<T>) -> Result<T> {
    Spectral::new(*f.grid()).dirichlet_energy(f)
}
