use super::{cubic_excess, log_excess};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::scalar::{lit, Scalar};

/// Leading `E/m` coefficient of a flat bilayer.
pub fn c_bilayer<T: Scalar>(zeta: T) -> T {
    (lit::<T>(9.0) * (zeta + T::one()) / lit(8.0)).cbrt()
}

/// Optimal `E/m` of a cylindrical micelle.
pub fn c_cylinder<T: Scalar>(zeta: T) -> T {
    lit::<T>(1.5) * ((zeta + T::one()) * log_excess(zeta) / (zeta * zeta)).cbrt()
}

/// Optimal `E/m` of a spherical micelle.
pub fn c_sphere<T: Scalar>(zeta: T) -> T {
    lit::<T>(4.5) * ((zeta + T::one()) * cubic_excess(zeta) / (zeta * zeta * lit(15.0))).cbrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Bilayer,
    Cylinder,
    Sphere,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Bilayer => "bilayer",
            Branch::Cylinder => "cylinder",
            Branch::Sphere => "sphere",
        }
    }
}

/// Thresholds separating the branches of `c(ζ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorphologyBranches<T> {
    pub zeta0: T,
    pub zeta1: T,
    pub zeta2: T,
}

impl<T: Scalar> MorphologyBranches<T> {
    pub fn bilayer(&self, zeta: T) -> T {
        c_bilayer(zeta)
    }
    pub fn cylinder(&self, zeta: T) -> T {
        c_cylinder(zeta)
    }
    pub fn sphere(&self, zeta: T) -> T {
        c_sphere(zeta)
    }
}

/// Value of `c(ζ)` with its branch; `below_zeta0` flags `ζ ≤ ζ0`, where the
/// three-branch description is not asserted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MorphologyValue<T> {
    pub value: T,
    pub branch: Branch,
    pub below_zeta0: bool,
}

/// `ζ0 = 2(√2 - 1)` and the roots `ζ1`, `ζ2` of their defining equations.
pub fn thresholds<T: Scalar>() -> MorphologyBranches<T> {
    let zeta0 = lit::<T>(2.0) * (lit::<T>(2.0).sqrt() - T::one());
    let tol = lit::<T>(1e-15);
    let g1 = |z: T| z + z * z / lit(3.0) - (z + T::one()) * z.ln_1p();
    let g2 = |z: T| lit::<T>(5.0) * log_excess(z) - lit::<T>(9.0) * cubic_excess(z);
    let zeta1 = bisect(g1, lit(1.0), lit(3.0), tol).expect("bracket [1, 3] contains the first threshold");
    let zeta2 = bisect(g2, lit(2.0), lit(6.0), tol).expect("bracket [2, 6] contains the second threshold");
    MorphologyBranches { zeta0, zeta1, zeta2 }
}

pub fn morphology<T: Scalar>(zeta: T) -> Result<MorphologyValue<T>> {
    if !(zeta > T::zero()) {
        return Err(Error::OutOfRange("zeta must be positive".into()));
    }
    let t = thresholds::<T>();
    let (value, branch) = if zeta < t.zeta1 {
        (c_bilayer(zeta), Branch::Bilayer)
    } else if zeta < t.zeta2 {
        (c_cylinder(zeta), Branch::Cylinder)
    } else {
        (c_sphere(zeta), Branch::Sphere)
    };
    Ok(MorphologyValue {
        value,
        branch,
        below_zeta0: zeta <= t.zeta0,
    })
}

/// Coefficients of the curvature quadratic `λ1 H^2 + λ2 K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelfrichModuli<T> {
    pub lambda1: T,
    pub lambda2: T,
}

pub fn helfrich_moduli<T: Scalar>(zeta: T) -> Result<HelfrichModuli<T>> {
    if !(zeta > T::zero()) {
        return Err(Error::OutOfRange("zeta must be positive".into()));
    }
    let k = ((zeta + T::one()) / lit(3.0)).powf(lit(2.0 / 3.0));
    Ok(HelfrichModuli {
        lambda1: lit::<T>(4.0) / lit(15.0) * (T::one() + lit::<T>(4.0) * zeta + zeta * zeta) / k,
        lambda2: (lit::<T>(4.0) - lit::<T>(4.0) * zeta - zeta * zeta) / (lit::<T>(5.0) * k),
    })
}

/// Second-order `E/m` coefficient of the spherical liposome (`γ = 1`), multiplied by `m`.
pub fn sphere_coefficient<T: Scalar>(zeta: T) -> T {
    let k = ((zeta + T::one()) / lit(3.0)).powf(lit(2.0 / 3.0));
    lit::<T>(4.0) * T::PI() * (zeta * zeta + lit::<T>(4.0) * zeta + lit(16.0)) / (lit::<T>(15.0) * k)
}

/// Second-order `E/m` coefficient of the circular liposome (`γ = 1`), multiplied
/// by `m^2`, recovered from `λ1`: a circle of radius `R` costs `(λ1/4) 2π/R` and
/// `R = m ((ζ+1)/3)^{1/3} / (4π)`.
pub fn cylinder_coefficient_from_lambda1<T: Scalar>(zeta: T) -> Result<T> {
    let h = helfrich_moduli(zeta)?;
    let r_per_m = ((zeta + T::one()) / lit(3.0)).cbrt() / (lit::<T>(4.0) * T::PI());
    Ok(h.lambda1 / lit(4.0) * T::TAU() / r_per_m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        let t = thresholds::<f64>();
        assert!((t.zeta1 - 1.816960535536510783586).abs() < 1e-12);
        assert!((t.zeta2 - 3.645721618720106389693).abs() < 1e-12);
        assert_eq!(t.zeta0, 2.0 * (2f64.sqrt() - 1.0));
    }

    #[test]
    fn branch_values_at_one() {
        assert!((c_bilayer(1.0f64) - 1.310370697104448303571).abs() < 1e-14);
        assert!((c_cylinder(1.0f64) - 1.376387481006914962859).abs() < 1e-14);
        assert!((c_sphere(1.0f64) - 1.424275886255422915547).abs() < 1e-14);
        assert_eq!(morphology(1.0).unwrap().branch, Branch::Bilayer);
        assert!(morphology(0.5).unwrap().below_zeta0);
    }

    #[test]
    fn helfrich_values() {
        let h = helfrich_moduli(1.0f64).unwrap();
        assert!((h.lambda1 - 2.096593115367117285713).abs() < 1e-14);
        assert!((h.lambda2 + 0.2620741394208896607142).abs() < 1e-14);
    }
}
