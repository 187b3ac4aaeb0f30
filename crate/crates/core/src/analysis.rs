//! Post-processing: energy-to-mass fits, dipole removal, layer thicknesses.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::{golden_section, solve_dense};
use crate::scalar::{from_usize, lit, Scalar};
use crate::spectral_grid::{Field, Spectral};

/// Least-squares fit of `ratio = a + b m^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitResult<T> {
    pub a: T,
    pub b: T,
    pub p: T,
    pub rms_residual: T,
}

const P_RANGE: (f64, f64) = (0.25, 3.0);

fn linear_fit<T: Scalar>(points: &[(T, T)], p: T) -> Option<(T, T, T)> {
    let n = from_usize::<T>(points.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &(m, y) in points {
        let x = m.powf(-p);
        sx = sx + x;
        sy = sy + y;
        sxx = sxx + x * x;
        sxy = sxy + x * y;
    }
    let det = n * sxx - sx * sx;
    if !(det.abs() > T::epsilon() * n * sxx) {
        return None;
    }
    let b = (n * sxy - sx * sy) / det;
    let a = (sy - b * sx) / n;
    Some((a, b, rss(points, a, b, p)))
}

fn rss<T: Scalar>(points: &[(T, T)], a: T, b: T, p: T) -> T {
    points.iter().fold(T::zero(), |s, &(m, y)| {
        let r = y - a - b * m.powf(-p);
        s + r * r
    })
}

/// Fit `ratio = a + b m^{-p}` to `(m, ratio)` points.
///
/// With `fix_p` the problem is linear in `(a, b)`. Otherwise `p` is located on
/// `[0.25, 3]` by a coarse scan and golden-section search on the profiled
/// residual, then all three parameters are refined by Gauss-Newton.
pub fn fit_energy_mass<T: Scalar>(points: &[(T, T)], fix_p: Option<T>) -> Result<FitResult<T>> {
    if points.len() < 3 {
        return Err(Error::Degenerate("need at least three points".into()));
    }
    if points
        .iter()
        .any(|&(m, y)| !(m > T::zero()) || !m.is_finite() || !y.is_finite())
    {
        return Err(Error::Degenerate("masses must be positive and ratios finite".into()));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| b.0 == a.0) {
            return Err(Error::Degenerate("masses must be distinct".into()));
        }
    }
    let count = from_usize::<T>(points.len());
    let finish = |a: T, b: T, p: T| FitResult {
        a,
        b,
        p,
        rms_residual: (rss(points, a, b, p) / count).sqrt(),
    };
    if let Some(p) = fix_p {
        let (a, b, _) = linear_fit(points, p).ok_or_else(|| Error::Degenerate("singular design matrix".into()))?;
        return Ok(finish(a, b, p));
    }

    let profiled = |p: T| linear_fit(points, p).map_or(T::infinity(), |r| r.2);
    let (lo, hi) = (lit::<T>(P_RANGE.0), lit::<T>(P_RANGE.1));
    let scan = 111;
    let step = (hi - lo) / from_usize(scan - 1);
    let mut best = 0;
    let mut best_v = T::infinity();
    for i in 0..scan {
        let v = profiled(lo + step * from_usize(i));
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let a0 = (lo + step * from_usize(best.saturating_sub(1))).max(lo);
    let b0 = (lo + step * from_usize(best + 1)).min(hi);
    let mut p = golden_section(profiled, a0, b0, lit(1e-12));
    let (mut a, mut b, mut r) =
        linear_fit(points, p).ok_or_else(|| Error::Degenerate("singular design matrix".into()))?;

    for _ in 0..50 {
        let mut jtj = vec![vec![T::zero(); 3]; 3];
        let mut jtr = vec![T::zero(); 3];
        for &(m, y) in points {
            let x = m.powf(-p);
            let row = [T::one(), x, -b * m.ln() * x];
            let res = y - a - b * x;
            for i in 0..3 {
                jtr[i] = jtr[i] + row[i] * res;
                for j in 0..3 {
                    jtj[i][j] = jtj[i][j] + row[i] * row[j];
                }
            }
        }
        let Some(d) = solve_dense(jtj, jtr) else { break };
        let (na, nb, np) = (a + d[0], b + d[1], p + d[2]);
        let nr = rss(points, na, nb, np);
        if !(nr < r) || !(np >= lo && np <= hi) {
            break;
        }
        (a, b, p, r) = (na, nb, np, nr);
    }
    Ok(finish(a, b, p))
}

/// Result of [`zero_dipole_shift`].
#[derive(Clone, Debug, PartialEq)]
pub struct DipoleShift<T> {
    /// Per-axis translation `t` in `[-L/2, L/2)`; unused axes are zero.
    pub shift: [T; 3],
    /// `w(x + t)`.
    pub shifted: Field<T>,
}

/// Coefficients `ĝ_m`, `0 ≤ m ≤ n/2`, of the trigonometric interpolant of the
/// marginal `∫ w dx_other` along `axis`.
fn marginal_coefficients<T: Scalar>(spec: &[Complex<T>], sp: &Spectral<T>, axis: usize) -> Vec<Complex<T>> {
    let grid = sp.grid();
    let ny = grid.counts3()[1];
    let nh = sp.half_x();
    let scale = grid.cell_volume() / grid.lengths()[axis];
    let stride = match axis {
        0 => 1,
        1 => nh,
        _ => nh * ny,
    };
    (0..=grid.counts3()[axis] / 2)
        .map(|m| spec[stride * m] * scale)
        .collect()
}

/// `D(t) = ∫ (x - L/2) g(x + t) dx` for the interpolant with coefficients `c`.
/// The constant and Nyquist modes do not contribute.
fn marginal_dipole<T: Scalar>(c: &[Complex<T>], len: T, t: T) -> T {
    let n = (c.len() - 1) * 2;
    let mut d = T::zero();
    for (m, &cm) in c.iter().enumerate().take(n / 2).skip(1) {
        let k = T::TAU() * from_usize::<T>(m) / len;
        let (s, co) = (k * t).sin_cos();
        // 2 Re(c e^{ikt} L / (ik))
        let z = cm * Complex::new(co, s);
        d = d + lit::<T>(2.0) * len * z.im / k;
    }
    d
}

/// Dipole moments `∫ (x_a - L_a/2) w dx` of the trigonometric interpolant of `w`.
pub fn dipole_moments<T: Scalar>(w: &Field<T>) -> [T; 3] {
    let sp = Spectral::new(*w.grid());
    let spec = sp.forward(w.values());
    let mut out = [T::zero(); 3];
    for (a, o) in out.iter_mut().enumerate().take(w.grid().dim()) {
        *o = marginal_dipole(&marginal_coefficients(&spec, &sp, a), w.grid().lengths()[a], T::zero());
    }
    out
}

/// `‖w‖ = ∫|w|`
pub fn l1_norm<T: Scalar>(w: &Field<T>) -> T {
    w.values().iter().fold(T::zero(), |s, &x| s + x.abs()) * w.grid().cell_volume()
}

/// Translate a zero-mass field so every dipole moment vanishes.
///
/// Each axis is handled on its own: `D_a(t)` depends only on the marginal along
/// axis `a`. A sign change of `D_a` is bracketed on the grid nodes (the one
/// nearest zero shift is taken) and refined by bisection; the field is then
/// translated by a spectral phase factor. A marginal whose dipole vanishes
/// identically is left unshifted.
pub fn zero_dipole_shift<T: Scalar>(w: &Field<T>) -> Result<DipoleShift<T>> {
    w.check_finite()?;
    let grid = *w.grid();
    let norm = l1_norm(w);
    let total = w.values().iter().fold(T::zero(), |s, &x| s + x) * grid.cell_volume();
    if total.abs() > lit::<T>(1e-10) * norm {
        return Err(Error::Degenerate(format!("field has nonzero total mass {total:?}")));
    }
    let sp = Spectral::new(grid);
    let mut spec = sp.forward(w.values());
    let mut shift = [T::zero(); 3];
    for a in 0..grid.dim() {
        let len = grid.lengths()[a];
        let n = grid.counts3()[a];
        let c = marginal_coefficients(&spec, &sp, a);
        let d = |t: T| marginal_dipole(&c, len, t);
        let h = grid.spacing(a);
        let samples: Vec<T> = (0..n).map(|j| d(h * from_usize::<T>(j))).collect();
        let scale = samples.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        if !(scale > lit::<T>(1e-14) * norm * len) {
            continue;
        }
        // candidate brackets [j h, (j+1) h] ordered by distance of the node from zero shift
        let mut best: Option<(usize, usize)> = None;
        for j in 0..n {
            let (f0, f1) = (samples[j], samples[(j + 1) % n]);
            if f0 == T::zero() || f0 * f1 < T::zero() {
                let dist = j.min(n - 1 - j);
                if best.is_none_or(|(_, bd)| dist < bd) {
                    best = Some((j, dist));
                }
            }
        }
        let Some((j, _)) = best else {
            return Err(Error::NoConvergence(format!("no sign change of the axis-{a} dipole")));
        };
        let lo = h * from_usize::<T>(j);
        let t = if samples[j] == T::zero() {
            lo
        } else {
            let (mut x0, mut x1) = (lo, lo + h);
            let mut f0 = samples[j];
            for _ in 0..200 {
                let mid = (x0 + x1) / lit(2.0);
                let fm = d(mid);
                if fm == T::zero() {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if (fm < T::zero()) == (f0 < T::zero()) {
                    x0 = mid;
                    f0 = fm;
                } else {
                    x1 = mid;
                }
                if x1 - x0 <= T::epsilon() * len {
                    break;
                }
            }
            (x0 + x1) / lit(2.0)
        };
        shift[a] = t - len * (t / len).round();
        if shift[a] >= len / lit(2.0) {
            shift[a] = shift[a] - len;
        }
        apply_shift(&mut spec, &sp, a, shift[a]);
    }
    let shifted = Field::new(grid, sp.inverse(spec))?;
    Ok(DipoleShift { shift, shifted })
}

/// `f(x + t)` for an arbitrary translation, by spectral phase factors.
pub fn translate<T: Scalar>(f: &Field<T>, shift: [T; 3]) -> Result<Field<T>> {
    let grid = *f.grid();
    let sp = Spectral::new(grid);
    let mut spec = sp.forward(f.values());
    for (a, &t) in shift.iter().enumerate().take(grid.dim()) {
        if t != T::zero() {
            apply_shift(&mut spec, &sp, a, t);
        }
    }
    Field::new(grid, sp.inverse(spec))
}

/// Multiply a spectrum by the phase of a translation `x -> x + t` along `axis`;
/// Nyquist modes take the real factor `cos(k t)`.
fn apply_shift<T: Scalar>(spec: &mut [Complex<T>], sp: &Spectral<T>, axis: usize, t: T) {
    let grid = *sp.grid();
    let [_, ny, nz] = grid.counts3();
    let nh = sp.half_x();
    let n = grid.counts3()[axis];
    let factors: Vec<Complex<T>> = (0..n)
        .map(|m| {
            let k = grid.wavenumber(axis, m);
            let (s, c) = (k * t).sin_cos();
            if m == n / 2 {
                Complex::new(c, T::zero())
            } else {
                Complex::new(c, s)
            }
        })
        .collect();
    for kz in 0..nz {
        for ky in 0..ny {
            for kx in 0..nh {
                let m = [kx, ky, kz][axis];
                let i = kx + nh * (ky + ny * kz);
                spec[i] = spec[i] * factors[m];
            }
        }
    }
}

/// Straight sampling path `origin + s · direction`, `0 ≤ s ≤ length`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray<T> {
    pub origin: [T; 3],
    pub direction: [T; 3],
    pub length: T,
}

/// Level crossings along a ray, as distances from the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct ThicknessProfile<T> {
    pub u_crossings: Vec<T>,
    pub total_crossings: Vec<T>,
}

impl<T: Scalar> ThicknessProfile<T> {
    /// Gaps between consecutive crossings of either field; for a ray leaving
    /// the center of a radial state this is `(R1-R0, R2-R1, R3-R2)`.
    pub fn intervals(&self) -> Vec<T> {
        let mut all: Vec<T> = self.u_crossings.iter().chain(&self.total_crossings).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        all.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Periodic multilinear interpolation of `f` at physical point `x`.
pub fn sample<T: Scalar>(f: &Field<T>, x: [T; 3]) -> T {
    let grid = f.grid();
    let c = grid.counts3();
    let mut base = [0usize; 3];
    let mut frac = [T::zero(); 3];
    for a in 0..grid.dim() {
        let s = x[a] / grid.spacing(a);
        let fl = s.floor();
        frac[a] = s - fl;
        let i = fl.to_i64().unwrap_or(0).rem_euclid(c[a] as i64);
        base[a] = i as usize;
    }
    let mut acc = T::zero();
    let corners = 1usize << grid.dim();
    for corner in 0..corners {
        let mut wgt = T::one();
        let mut idx = [0usize; 3];
        for a in 0..3 {
            if a < grid.dim() {
                let bit = (corner >> a) & 1;
                idx[a] = (base[a] + bit) % c[a];
                wgt = wgt * if bit == 1 { frac[a] } else { T::one() - frac[a] };
            }
        }
        acc = acc + wgt * f.values()[grid.index(idx[0], idx[1], idx[2])];
    }
    acc
}

fn crossings<T: Scalar>(vals: &[T], ds: T, level: T) -> Vec<T> {
    let mut out = Vec::new();
    for i in 0..vals.len().saturating_sub(1) {
        let (a, b) = (vals[i] - level, vals[i + 1] - level);
        if (a < T::zero()) != (b < T::zero()) {
            out.push(ds * (from_usize::<T>(i) + a / (a - b)));
        }
    }
    out
}

/// Level crossings of `u` and `u + v` along `ray`, sampled every quarter cell.
pub fn measure_thickness<T: Scalar>(u: &Field<T>, v: &Field<T>, ray: &Ray<T>, level: T) -> Result<ThicknessProfile<T>> {
    u.check_same_grid(v)?;
    let grid = u.grid();
    let dn = ray.direction.iter().fold(T::zero(), |s, &d| s + d * d).sqrt();
    if !(dn > T::zero()) || !(ray.length > T::zero()) {
        return Err(Error::Geometry(
            "ray needs a nonzero direction and positive length".into(),
        ));
    }
    let h = (0..grid.dim()).fold(T::infinity(), |m, a| m.min(grid.spacing(a))) / lit(4.0);
    let steps = (ray.length / h).ceil().to_usize().unwrap_or(1).max(1);
    let ds = ray.length / from_usize(steps);
    let mut su = Vec::with_capacity(steps + 1);
    let mut st = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let s = ds * from_usize::<T>(i);
        let mut p = ray.origin;
        for a in 0..3 {
            p[a] = p[a] + s * ray.direction[a] / dn;
        }
        let (a, b) = (sample(u, p), sample(v, p));
        su.push(a);
        st.push(a + b);
    }
    let out = ThicknessProfile {
        u_crossings: crossings(&su, ds, level),
        total_crossings: crossings(&st, ds, level),
    };
    if out.u_crossings.is_empty() && out.total_crossings.is_empty() {
        return Err(Error::Geometry("no level crossings along the ray".into()));
    }
    Ok(out)
}
