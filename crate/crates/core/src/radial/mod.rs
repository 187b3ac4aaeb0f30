//! Sharp-interface theory of concentric V-U-V shells (liposomes) and balls (micelles).

mod asymptotics;
mod morphology;
mod optimize;
mod wasserstein;

pub use asymptotics::{asymptotic_liposome, asymptotic_rescaled, rescaled_energy, AsymptoticPrediction, RescaleParams};
pub use morphology::{
    c_bilayer, c_cylinder, c_sphere, cylinder_coefficient_from_lambda1, helfrich_moduli, morphology,
    sphere_coefficient, thresholds, Branch, HelfrichModuli, MorphologyBranches, MorphologyValue,
};
pub use optimize::optimize_liposome;
pub use wasserstein::{wasserstein_thickness, wasserstein_thickness_closed_form, wasserstein_thickness_series};

use crate::error::{Error, Result};
use crate::numeric::Quadrature;
use crate::scalar::{lit, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CandidateKind {
    Liposome,
    Micelle,
}

/// Concentric configuration `V = B(R3)\B(R2) ∪ B(R1)\B(R0)`, `U = B(R2)\B(R1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialCandidate<T> {
    n: usize,
    zeta: T,
    radii: [T; 4],
    kind: CandidateKind,
}

/// Sharp energy of a radial candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialEnergy<T> {
    pub perimeter: T,
    pub nonlocal: T,
    pub total: T,
}

/// `r^n - a^n` without cancellation when `r ≈ a`.
#[inline]
fn pow_diff<T: Scalar>(n: usize, r: T, a: T) -> T {
    if n == 2 {
        (r - a) * (r + a)
    } else {
        (r - a) * (r * r + r * a + a * a)
    }
}

#[inline]
fn powi<T: Scalar>(x: T, n: usize) -> T {
    x.powi(n as i32)
}

/// Ball volume factor: `|B(R)| = unit_ball(n) R^n`.
#[inline]
pub fn unit_ball<T: Scalar>(n: usize) -> T {
    if n == 2 {
        T::PI()
    } else {
        lit::<T>(4.0) / lit(3.0) * T::PI()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("dimension {n} not in {{2, 3}}")))
    }
}

impl<T: Scalar> RadialCandidate<T> {
    /// Validated candidate; the V mass must equal `ζ` times the U mass to 1e-10 relative.
    pub fn new(n: usize, zeta: T, radii: [T; 4]) -> Result<Self> {
        check_dim(n)?;
        if !(zeta > T::zero()) {
            return Err(Error::InvalidCandidate("zeta must be positive".into()));
        }
        let [r0, r1, r2, r3] = radii;
        if radii.iter().any(|r| !r.is_finite()) || !(r0 >= T::zero() && r0 <= r1 && r1 < r2 && r2 < r3) {
            return Err(Error::InvalidCandidate(format!("radii out of order: {radii:?}")));
        }
        let kind = if r1 == T::zero() {
            CandidateKind::Micelle
        } else if r0 > T::zero() {
            CandidateKind::Liposome
        } else {
            return Err(Error::InvalidCandidate(
                "R0 = 0 < R1 is not a liposome or micelle".into(),
            ));
        };
        let c = Self { n, zeta, radii, kind };
        let defect = c.constraint_defect();
        if !(defect.abs() <= lit::<T>(1e-10)) {
            return Err(Error::InvalidCandidate(format!(
                "mass constraint violated, relative defect {defect:?}"
            )));
        }
        Ok(c)
    }

    /// Micelle of U mass `m`: `R0 = R1 = 0`.
    pub fn micelle(n: usize, zeta: T, m: T) -> Result<Self> {
        check_dim(n)?;
        let big_m = m / unit_ball::<T>(n);
        let inv = T::one() / lit::<T>(n as f64);
        let r2 = big_m.powf(inv);
        let r3 = ((zeta + T::one()) * big_m).powf(inv);
        Self::new(n, zeta, [T::zero(), T::zero(), r2, r3])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zeta(&self) -> T {
        self.zeta
    }

    pub fn radii(&self) -> [T; 4] {
        self.radii
    }

    pub fn kind(&self) -> CandidateKind {
        self.kind
    }

    /// `(R3^n - R0^n - (ζ+1)(R2^n - R1^n)) / R3^n`
    pub fn constraint_defect(&self) -> T {
        let [r0, r1, r2, r3] = self.radii;
        let n = self.n;
        (pow_diff(n, r3, r0) - (self.zeta + T::one()) * pow_diff(n, r2, r1)) / powi(r3, n)
    }

    /// U mass.
    pub fn mass(&self) -> T {
        unit_ball::<T>(self.n) * pow_diff(self.n, self.radii[2], self.radii[1])
    }

    /// Layer thicknesses `(R1-R0, R2-R1, R3-R2)`.
    pub fn thicknesses(&self) -> [T; 3] {
        let [r0, r1, r2, r3] = self.radii;
        [r1 - r0, r2 - r1, r3 - r2]
    }

    /// `(R3^n - R2^n) - (R1^n - R0^n)`
    pub fn shell_mass_imbalance(&self) -> T {
        let [r0, r1, r2, r3] = self.radii;
        pow_diff(self.n, r3, r2) - pow_diff(self.n, r1, r0)
    }

    /// Same shape dilated by `s`.
    pub fn dilate(&self, s: T) -> Self {
        let mut c = *self;
        for r in c.radii.iter_mut() {
            *r = *r * s;
        }
        c
    }

    /// Enclosed charge of `1_U - 1_V/ζ` in units of `|B(r)|/r^n`.
    fn enclosed(&self, r: T) -> T {
        let [r0, r1, r2, r3] = self.radii;
        let n = self.n;
        let z = self.zeta;
        if r <= r0 {
            T::zero()
        } else if r <= r1 {
            -pow_diff(n, r, r0) / z
        } else if r <= r2 {
            -pow_diff(n, r1, r0) / z + pow_diff(n, r, r1)
        } else if r <= r3 {
            pow_diff(n, r3, r) / z
        } else {
            T::zero()
        }
    }

    /// Perimeter of U.
    pub fn perimeter(&self) -> T {
        let [_, r1, r2, _] = self.radii;
        if self.n == 2 {
            T::TAU() * (r1 + r2)
        } else {
            lit::<T>(4.0) * T::PI() * (r1 * r1 + r2 * r2)
        }
    }

    /// Nonlocal term from the radial Gauss law, integrated layer by layer.
    pub fn nonlocal(&self) -> T {
        let q = Quadrature::<T>::new(24);
        let [r0, r1, r2, r3] = self.radii;
        let n = self.n;
        let integrand = |r: T| {
            let e = self.enclosed(r);
            if n == 2 {
                e * e / r
            } else {
                e * e / (r * r)
            }
        };
        let mut s = T::zero();
        for (a, b) in [(r0, r1), (r1, r2), (r2, r3)] {
            if b > a {
                s = s + q.integrate_graded(a, b, integrand);
            }
        }
        if n == 2 {
            s * T::PI() / lit(4.0)
        } else {
            s * lit::<T>(2.0) * T::PI() / lit(9.0)
        }
    }

    /// Electrostatic potential `φ(r)` with `φ(∞) = 0`.
    pub fn potential(&self, r: T) -> T {
        let [r0, r1, r2, r3] = self.radii;
        let z = self.zeta;
        let zp = z + T::one();
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        if r >= r3 {
            return T::zero();
        }
        if self.n == 3 {
            let val = if r >= r2 {
                -three * r3 * r3 + two * r3.powi(3) / r + r * r
            } else if r >= r1 {
                -three * (r3 * r3 - zp * r2 * r2) + two * (r3.powi(3) - zp * r2.powi(3)) / r - z * r * r
            } else if r >= r0 {
                -three * (r3 * r3 - zp * r2 * r2 + zp * r1 * r1) + two * r0.powi(3) / r + r * r
            } else {
                -three * (r3 * r3 - zp * r2 * r2 + zp * r1 * r1 - r0 * r0)
            };
            val / (lit::<T>(6.0) * z)
        } else {
            let l = |x: T| if x > T::zero() { x * x * x.ln() } else { T::zero() };
            let val = if r >= r2 {
                two * l(r3) - r3 * r3 + r * r - two * r3 * r3 * r.ln()
            } else if r >= r1 {
                two * (l(r3) - zp * l(r2)) - r3 * r3 + zp * r2 * r2
                    - z * r * r
                    - two * (r3 * r3 - zp * r2 * r2) * r.ln()
            } else if r >= r0 {
                two * (l(r3) - zp * l(r2) + zp * l(r1)) - r0 * r0 + r * r - two * r0 * r0 * r.ln()
            } else {
                two * (l(r3) - zp * l(r2) + zp * l(r1) - l(r0))
            };
            val / (lit::<T>(4.0) * z)
        }
    }

    /// `φ(r)` as `∫_r^{R3} Q(s) / |∂B(s)| ds`, integrated layer by layer; free of
    /// the cancellation in the closed forms at large radii.
    pub fn potential_quadrature(&self, r: T) -> T {
        let q = Quadrature::<T>::new(24);
        let [r0, r1, r2, r3] = self.radii;
        let n = self.n;
        let nf = lit::<T>(n as f64);
        let field = |s: T| self.enclosed(s) / (nf * powi(s, n - 1));
        let mut acc = T::zero();
        for (a, b) in [(r0, r1), (r1, r2), (r2, r3)] {
            let lo = a.max(r);
            if b > lo {
                acc = acc + q.integrate(lo, b, field);
            }
        }
        acc
    }

    /// `∂E/∂R_i` for `E = Per U + γ N`, each radius moved independently.
    pub fn energy_gradient(&self, gamma: T) -> [T; 4] {
        let n = self.n;
        let z = self.zeta;
        let sphere = lit::<T>(n as f64) * unit_ball::<T>(n);
        let jumps = [T::one() / z, -(z + T::one()) / z, (z + T::one()) / z, -T::one() / z];
        let mut g = [T::zero(); 4];
        for i in 0..4 {
            let r = self.radii[i];
            if r > T::zero() {
                g[i] = gamma * sphere * powi(r, n - 1) * self.potential_quadrature(r) * jumps[i];
            }
        }
        let dper = |r: T| sphere * lit::<T>((n - 1) as f64) * powi(r, n - 2);
        g[1] = g[1] + dper(self.radii[1]);
        g[2] = g[2] + dper(self.radii[2]);
        g
    }

    /// Nonlocal term from the printed polynomial/logarithmic closed forms.
    ///
    /// Radii are normalized by `(R1+R2)/2` first; the `ln s` contribution cancels
    /// under the mass constraint and is dropped.
    pub fn closed_form_nonlocal(&self) -> T {
        let [r0, r1, r2, r3] = self.radii;
        let z = self.zeta;
        let zp = z + T::one();
        let s = (r1 + r2) / lit(2.0);
        let [x0, x1, x2, x3] = [r0 / s, r1 / s, r2 / s, r3 / s];
        if self.n == 2 {
            let lg = |x: T| if x > T::zero() { x.ln() } else { T::zero() };
            let p4 = |x: T| x.powi(4);
            let val = (T::one() - z * z) * (p4(x2) - p4(x1)) + p4(x0) - p4(x3)
                + lit::<T>(4.0)
                    * (p4(x3) * lg(x3) - p4(x0) * lg(x0)
                        + zp * (lit::<T>(2.0) * x0 * x0 * x1 * x1 - zp * p4(x1)) * lg(x1)
                        - zp * (lit::<T>(2.0) * x3 * x3 * x2 * x2 - zp * p4(x2)) * lg(x2));
            val * T::PI() / (lit::<T>(16.0) * z * z) * s.powi(4)
        } else {
            let p5 = |x: T| x.powi(5);
            let val = lit::<T>(6.0) * (p5(x0) - p5(x3))
                + zp * (lit::<T>(10.0) * x2 * x2 * x3.powi(3) - (lit::<T>(6.0) * z + lit(4.0)) * p5(x2)
                    + (lit::<T>(6.0) * z + lit(4.0)) * p5(x1)
                    - lit::<T>(10.0) * x0.powi(3) * x1 * x1);
            val * T::PI() / (lit::<T>(15.0) * z * z) * s.powi(5)
        }
    }

    /// `∫ φ (1_U - 1_V/ζ) dx` by radial quadrature of the potential.
    pub fn potential_charge_integral(&self) -> T {
        let q = Quadrature::<T>::new(24);
        let [r0, r1, r2, r3] = self.radii;
        let n = self.n;
        let shell = |r: T| {
            if n == 2 {
                T::TAU() * r
            } else {
                lit::<T>(4.0) * T::PI() * r * r
            }
        };
        let part = |a: T, b: T| {
            if b > a {
                q.integrate(a, b, |r| self.potential(r) * shell(r))
            } else {
                T::zero()
            }
        };
        let vpart = part(r0, r1) + part(r2, r3);
        let upart = part(r1, r2);
        upart - vpart / self.zeta
    }
}

/// Perimeter, nonlocal term, and `total = perimeter + γ N`.
pub fn liposome_energy<T: Scalar>(c: &RadialCandidate<T>, gamma: T) -> Result<RadialEnergy<T>> {
    let d = c.constraint_defect();
    if !(d.abs() <= lit::<T>(1e-10)) {
        return Err(Error::InvalidCandidate(format!(
            "mass constraint violated, relative defect {d:?}"
        )));
    }
    let perimeter = c.perimeter();
    let nonlocal = c.nonlocal();
    Ok(RadialEnergy {
        perimeter,
        nonlocal,
        total: perimeter + gamma * nonlocal,
    })
}

pub fn radial_potential<T: Scalar>(c: &RadialCandidate<T>, r: T) -> T {
    c.potential(r)
}

/// `(ζ+1) ln(ζ+1) - ζ`, accurate for small `ζ`.
pub(crate) fn log_excess<T: Scalar>(z: T) -> T {
    if z.abs() < lit(1e-2) {
        let mut s = T::zero();
        let mut p = z * z;
        for k in 2..30 {
            let kf = lit::<T>(k as f64);
            let term = p / (kf * (kf - T::one()));
            s = if k % 2 == 0 { s + term } else { s - term };
            p = p * z;
        }
        s
    } else {
        (z + T::one()) * z.ln_1p() - z
    }
}

/// `2ζ + 3 - 3(ζ+1)^{2/3}`, accurate for small `ζ`.
pub(crate) fn cubic_excess<T: Scalar>(z: T) -> T {
    if z.abs() < lit(1e-2) {
        let a = lit::<T>(2.0 / 3.0);
        let mut coef = a * (a - T::one()) / lit(2.0);
        let mut p = z * z;
        let mut s = T::zero();
        for k in 2..30 {
            s = s + coef * p;
            let kf = lit::<T>(k as f64);
            coef = coef * (a - kf) / (kf + T::one());
            p = p * z;
        }
        -lit::<T>(3.0) * s
    } else {
        lit::<T>(2.0) * z + lit(3.0) - lit::<T>(3.0) * (z + T::one()).powf(lit(2.0 / 3.0))
    }
}

/// Sharp energy of the micelle of U mass `m`.
pub fn micelle_energy<T: Scalar>(m: T, zeta: T, gamma: T, n: usize) -> Result<RadialEnergy<T>> {
    check_dim(n)?;
    let zp = zeta + T::one();
    let (perimeter, nonlocal) = if n == 2 {
        let b = m / T::PI();
        (
            T::TAU() * b.sqrt(),
            T::PI() / (zeta * zeta) * zp * log_excess(zeta) * b * b / lit(8.0),
        )
    } else {
        let b = lit::<T>(3.0) * m / (lit::<T>(4.0) * T::PI());
        (
            lit::<T>(4.0) * T::PI() * b.powf(lit(2.0 / 3.0)),
            T::PI() / (zeta * zeta) * zp * lit::<T>(2.0) * cubic_excess(zeta) * b.powf(lit(5.0 / 3.0)) / lit(15.0),
        )
    };
    Ok(RadialEnergy {
        perimeter,
        nonlocal,
        total: perimeter + gamma * nonlocal,
    })
}

/// `(m*, min E/m)` over micelles.
pub fn micelle_optimal<T: Scalar>(zeta: T, gamma: T, n: usize) -> Result<(T, T)> {
    check_dim(n)?;
    let zp = zeta + T::one();
    let third = lit::<T>(1.0 / 3.0);
    if n == 2 {
        let g = gamma * zp * log_excess(zeta) / (zeta * zeta);
        Ok((
            lit::<T>(4.0) * T::PI() * g.powf(lit(-2.0 / 3.0)),
            lit::<T>(1.5) * g.powf(third),
        ))
    } else {
        let ce = cubic_excess(zeta);
        let m_star = lit::<T>(20.0) * T::PI() * zeta * zeta / (gamma * zp) / ce;
        let ratio = lit::<T>(4.5) * (gamma * zp * ce / (zeta * zeta * lit(15.0))).powf(third);
        Ok((m_star, ratio))
    }
}

/// Residuals of the two stationarity conditions, each divided by the magnitude
/// of its largest term.
pub fn stationarity_residual<T: Scalar>(c: &RadialCandidate<T>, gamma: T) -> [T; 2] {
    let [r0, r1, r2, r3] = c.radii;
    let z = c.zeta;
    let zp = z + T::one();
    let two = lit::<T>(2.0);
    let s = (r1 + r2) / two;
    let rel = |val: T, terms: &[T]| {
        let scale = terms.iter().fold(T::zero(), |m, t| m.max(t.abs()));
        if scale > T::zero() {
            val / scale
        } else {
            val
        }
    };
    if c.n == 2 {
        // x^2 ln x^2 on radii normalized by s, plus the ln s^2 multiple of the mass constraint.
        let xl = |r: T| {
            let x = r / s;
            x * x * (x * x).ln()
        };
        let a = xl(r3) - xl(r0);
        let b = zp * (xl(r2) - xl(r1));
        let cons = (pow_diff(2, r3, r0) - zp * pow_diff(2, r2, r1)) / (s * s);
        let lns = (s * s).ln();
        let res1 = rel(a - b + lns * cons, &[a, b]);
        let lhs = lit::<T>(4.0) * z * z / (zp * gamma) * (T::one() / r1 + T::one() / r2);
        let l = two * ((r2 - r1) / r1).ln_1p();
        let t1 = z * (r2 - r1) * (r2 + r1);
        let t2 = ((r0 - r1) * (r0 + r1) - z * r1 * r1) * l;
        let res2 = rel(lhs - t1 - t2, &[lhs, t1, t2]);
        [res1, res2]
    } else {
        let a = (r3 - r0) * (r3 + r0);
        let b = zp * (r2 - r1) * (r2 + r1);
        let res1 = rel(a - b, &[a, b]);
        let lhs = lit::<T>(12.0) * z * z / gamma * (T::one() / r1 + T::one() / r2);
        let t1 = (lit::<T>(3.0) * z + two) * a;
        let [d0, d1, d2, d3] = [r0 - s, r1 - s, r2 - s, r3 - s];
        let three = lit::<T>(3.0);
        // (s+d0)^3 (s+d2) - (s+d3)^3 (s+d1), expanded so the s^4 terms cancel exactly.
        let diff = s * s * s * (three * (d0 - d3) + (d2 - d1))
            + s * s * (three * (d0 * d0 - d3 * d3) + three * (d0 * d2 - d3 * d1))
            + s * (d0.powi(3) - d3.powi(3) + three * (d0 * d0 * d2 - d3 * d3 * d1))
            + (d0.powi(3) * d2 - d3.powi(3) * d1);
        let t2 = two * zp * diff / (r1 * r2);
        let res2 = rel(lhs - t1 - t2, &[lhs, t1, t2]);
        [res1, res2]
    }
}
