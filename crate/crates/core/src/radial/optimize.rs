use super::{liposome_energy, unit_ball, RadialCandidate};
use crate::error::{Error, Result};
use crate::numeric::{nelder_mead, solve_dense};
use crate::scalar::{lit, Scalar};

/// Radii from the U-layer width `w = R2-R1` and inner V width `a = R1-R0`
/// (or, with `equal_mass`, from `w` alone).
fn radii_from<T: Scalar>(n: usize, zeta: T, big_m: T, w: T, a: Option<T>) -> Option<[T; 4]> {
    if !(w > T::zero()) {
        return None;
    }
    let r1 = if n == 2 {
        (big_m - w * w) / (lit::<T>(2.0) * w)
    } else {
        let disc = lit::<T>(12.0) * w * big_m - lit::<T>(3.0) * w.powi(4);
        if !(disc > T::zero()) {
            return None;
        }
        (disc.sqrt() - lit::<T>(3.0) * w * w) / (lit::<T>(6.0) * w)
    };
    if !(r1 > T::zero()) {
        return None;
    }
    let r2 = r1 + w;
    let inv = T::one() / lit::<T>(n as f64);
    let (r0, r3) = match a {
        Some(a) => {
            if !(a > T::zero() && a < r1) {
                return None;
            }
            let r0 = r1 - a;
            (r0, (r0.powi(n as i32) + (zeta + T::one()) * big_m).powf(inv))
        }
        None => {
            let half = zeta * big_m / lit(2.0);
            let inner = r1.powi(n as i32) - half;
            if !(inner > T::zero()) {
                return None;
            }
            (inner.powf(inv), (r2.powi(n as i32) + half).powf(inv))
        }
    };
    if r0 > T::zero() && r0 < r1 && r2 < r3 {
        Some([r0, r1, r2, r3])
    } else {
        None
    }
}

/// `∂R_i/∂w` (and `∂R_i/∂a` for free candidates) along the constraint surface.
fn radii_jacobian<T: Scalar>(n: usize, r: [T; 4], equal_mass: bool) -> Vec<[T; 4]> {
    let [r0, r1, r2, r3] = r;
    let w = r2 - r1;
    let k = (n - 1) as i32;
    // d/dw of R1 keeping R2^n - R1^n fixed; R2^{n-1} - R1^{n-1} is w or w (R1 + R2)
    let spread = if n == 2 { w } else { w * (r1 + r2) };
    let d1 = -r2.powi(k) / spread;
    let d2 = d1 + T::one();
    if equal_mass {
        let d0 = (r1 / r0).powi(k) * d1;
        let d3 = (r2 / r3).powi(k) * d2;
        vec![[d0, d1, d2, d3]]
    } else {
        let ratio = (r0 / r3).powi(k);
        vec![[d1, d1, d2, ratio * d1], [-T::one(), T::zero(), T::zero(), -ratio]]
    }
}

/// Minimize the sharp liposome energy at fixed U mass `m`.
///
/// Free candidates have two degrees of freedom, `(R2-R1, R1-R0)`; with
/// `equal_mass` the inner and outer V layers carry equal mass and only `R2-R1`
/// is free. A simplex search is followed by a damped Newton polish on the
/// analytic gradient of `E/m` with a finite-difference Hessian.
pub fn optimize_liposome<T: Scalar>(m: T, zeta: T, gamma: T, n: usize, equal_mass: bool) -> Result<RadialCandidate<T>> {
    super::check_dim(n)?;
    for (name, x) in [("m", m), ("zeta", zeta), ("gamma", gamma)] {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(Error::OutOfRange(format!("{name} must be positive")));
        }
    }
    let big_m = m / unit_ball::<T>(n);
    let tau = (lit::<T>(3.0) / (gamma * (zeta + T::one()))).cbrt();
    let radii = |y: &[T]| -> Option<[T; 4]> {
        let w = y[0] * tau;
        let a = if equal_mass { None } else { Some(y[1] * tau) };
        radii_from(n, zeta, big_m, w, a)
    };
    let objective = |y: &[T]| -> T {
        match radii(y) {
            Some(r) => match RadialCandidate::new(n, zeta, r) {
                Ok(c) => match liposome_energy(&c, gamma) {
                    Ok(e) => e.total / m,
                    Err(_) => T::infinity(),
                },
                Err(_) => T::infinity(),
            },
            None => T::infinity(),
        }
    };

    let mut y0: Vec<T> = if equal_mass {
        vec![lit(2.0)]
    } else {
        vec![lit(2.0), zeta]
    };
    let mut tries = 0;
    while !objective(&y0).is_finite() {
        for y in y0.iter_mut() {
            *y = *y * lit(0.5);
        }
        tries += 1;
        if tries > 60 {
            return Err(Error::NoConvergence(
                "no feasible starting point; mass too small for a liposome".into(),
            ));
        }
    }
    let step: Vec<T> = y0.iter().map(|&y| y * lit(0.1)).collect();
    let (mut y, mut fy) = nelder_mead(objective, &y0, &step, lit(1e-15), 20_000);
    let (y2, f2) = nelder_mead(
        objective,
        &y,
        &step.iter().map(|&s| s * lit(0.01)).collect::<Vec<_>>(),
        lit(1e-16),
        20_000,
    );
    if f2 <= fy {
        y = y2;
        fy = f2;
    }
    if !fy.is_finite() {
        return Err(Error::NoConvergence("simplex search found no feasible minimum".into()));
    }

    // Newton polish on the analytic gradient of E/m in the scaled parameters.
    let gradient = |p: &[T]| -> Option<Vec<T>> {
        let r = radii(p)?;
        let c = RadialCandidate::new(n, zeta, r).ok()?;
        let g = c.energy_gradient(gamma);
        let jac = radii_jacobian(n, r, equal_mass);
        Some(
            jac.iter()
                .map(|d| (0..4).fold(T::zero(), |s, i| s + g[i] * d[i]) * tau / m)
                .collect(),
        )
    };
    let gnorm = |g: &[T]| g.iter().fold(T::zero(), |s, &x| s.max(x.abs()));
    let dim = y.len();
    let Some(mut g) = gradient(&y) else {
        return Err(Error::NoConvergence(
            "simplex search ended outside the feasible set".into(),
        ));
    };
    for _ in 0..40 {
        let mut hess = vec![vec![T::zero(); dim]; dim];
        let mut ok = true;
        for j in 0..dim {
            let h = lit::<T>(1e-6) * y[j].abs().max(T::one());
            let mut a = y.clone();
            let mut b = y.clone();
            a[j] = a[j] + h;
            b[j] = b[j] - h;
            match (gradient(&a), gradient(&b)) {
                (Some(ga), Some(gb)) => {
                    for i in 0..dim {
                        hess[i][j] = (ga[i] - gb[i]) / (h + h);
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            break;
        }
        for i in 0..dim {
            for j in 0..i {
                let s = (hess[i][j] + hess[j][i]) / lit(2.0);
                hess[i][j] = s;
                hess[j][i] = s;
            }
        }
        let Some(dx) = solve_dense(hess, g.iter().map(|&x| -x).collect()) else {
            break;
        };
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let cand: Vec<T> = y.iter().zip(&dx).map(|(&a, &d)| a + t * d).collect();
            if let Some(gc) = gradient(&cand) {
                let fc = objective(&cand);
                let slack = lit::<T>(16.0) * T::epsilon() * fy.abs();
                if gnorm(&gc) < gnorm(&g) && (fc <= fy + slack || gnorm(&g) < lit(1e-6)) {
                    y = cand;
                    fy = fc.min(fy);
                    g = gc;
                    accepted = true;
                    break;
                }
            }
            t = t * lit(0.5);
        }
        let size = dx
            .iter()
            .zip(&y)
            .fold(T::zero(), |m, (&d, &yy)| m.max((d * t).abs() / yy.abs().max(T::one())));
        if !accepted || size < lit(1e-15) {
            break;
        }
    }
    let r = radii(&y).ok_or_else(|| Error::NoConvergence("optimizer left the feasible set".into()))?;
    RadialCandidate::new(n, zeta, r)
}

#[cfg(test)]
mod tests {
    use super::super::stationarity_residual;
    use super::*;

    #[test]
    fn radii_reconstruction_satisfies_constraints() {
        let r = radii_from(3, 1.0f64, 10.0, 0.8, Some(0.4)).unwrap();
        let c = RadialCandidate::new(3, 1.0, r).unwrap();
        assert!((c.mass() - 10.0 * unit_ball::<f64>(3)).abs() < 1e-12);
        let r = radii_from(2, 0.5f64, 10.0, 0.8, None).unwrap();
        let c = RadialCandidate::new(2, 0.5, r).unwrap();
        assert!(c.shell_mass_imbalance().abs() < 1e-12);
    }

    #[test]
    fn optimum_is_stationary() {
        for (n, m) in [(2, 50.0f64), (3, 2.0e4)] {
            let c = optimize_liposome(m, 1.0, 1.0, n, false).unwrap();
            let r = stationarity_residual(&c, 1.0);
            assert!(r[0].abs() < 1e-8 && r[1].abs() < 1e-8, "{n}: {r:?}");
        }
    }
}
