//! Small scalar numerics: quadrature, bracketing, and derivative-free minimizers.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf: T = from_usize(n);
    for i in 0..n.div_ceil(2) {
        let mut z = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (mut p0, mut p1) = (T::one(), z);
            for k in 2..=n {
                let kf: T = from_usize(k);
                let p2 = ((lit::<T>(2.0) * kf - T::one()) * z * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pm) = if n == 1 { (z, T::one()) } else { (p1, p0) };
            dp = nf * (z * pn - pm) / (z * z - T::one());
            let dz = pn / dp;
            z = z - dz;
            if dz.abs() <= T::epsilon() {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = lit::<T>(2.0) / ((T::one() - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub struct Quadrature<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Quadrature<T> {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        let half = (b - a) / lit(2.0);
        let mid = (a + b) / lit(2.0);
        let mut s = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s = s + *w * f(mid + half * *x);
        }
        s * half
    }

    /// Composite rule with cells graded geometrically away from `a` when the
    /// interval is long compared with its distance to the origin.
    pub fn integrate_graded(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        if !(b > a) {
            return T::zero();
        }
        if a <= T::zero() || a >= b - a {
            return self.integrate(a, b, &f);
        }
        let mut s = T::zero();
        let mut lo = a;
        while lo < b {
            let hi = (lo + lo).min(b);
            s = s + self.integrate(lo, hi, &f);
            lo = hi;
        }
        s
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> Result<T> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::Degenerate("no sign change in bracket".into()));
    }
    for _ in 0..400 {
        let mid = (a + b) / lit(2.0);
        if (b - a).abs() <= tol || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok((a + b) / lit(2.0))
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
pub fn golden_section<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let r = (lit::<T>(5.0).sqrt() - T::one()) / lit(2.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / lit(2.0)
}

/// Nelder-Mead simplex minimization. Non-finite objective values act as walls.
pub fn nelder_mead<T: Scalar>(f: impl Fn(&[T]) -> T, x0: &[T], step: &[T], ftol: T, max_iter: usize) -> (Vec<T>, T) {
    let n = x0.len();
    let eval = |x: &[T]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            T::infinity()
        }
    };
    let mut pts: Vec<Vec<T>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] = p[i] + step[i];
        pts.push(p);
    }
    let mut vals: Vec<T> = pts.iter().map(|p| eval(p)).collect();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let (best, worst) = (vals[0], vals[n]);
        if worst.is_finite() && (worst - best).abs() <= ftol * (best.abs() + ftol) {
            break;
        }
        let mut cen = vec![T::zero(); n];
        for p in &pts[..n] {
            for k in 0..n {
                cen[k] = cen[k] + p[k] / from_usize(n);
            }
        }
        let along = |t: T| -> Vec<T> { (0..n).map(|k| cen[k] + t * (pts[n][k] - cen[k])).collect() };
        let xr = along(-T::one());
        let fr = eval(&xr);
        if fr < vals[0] {
            let xe = along(-two);
            let fe = eval(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            let (xc, fc) = if fr < vals[n] {
                let x = along(-half);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(half);
                let v = eval(&x);
                (x, v)
            };
            if fc < vals[n].min(fr) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for i in 1..=n {
                    for k in 0..n {
                        pts[i][k] = pts[0][k] + half * (pts[i][k] - pts[0][k]);
                    }
                    vals[i] = eval(&pts[i]);
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or(0);
    (pts[best].clone(), vals[best])
}

/// Solve a small dense linear system by Gaussian elimination with partial pivoting.
pub fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| {
            a[i][c]
                .abs()
                .partial_cmp(&a[j][c].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[p][c] == T::zero() || !a[p][c].is_finite() {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] = a[r][k] - f * a[c][k];
            }
            b[r] = b[r] - f * b[c];
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s = s - a[r][k] * x[k];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}
