use super::{check_dim, RadialCandidate};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Large-mass expansion of the optimal liposome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticPrediction<T> {
    /// Leading term of `E/m`.
    pub energy_leading: T,
    /// Second-order term of `E/m`.
    pub energy_correction: T,
    /// `(R1-R0, R2-R1, R3-R2)`.
    pub thicknesses: [T; 3],
    pub mid_radius: T,
    /// `(R3^n - R2^n) - (R1^n - R0^n)`.
    pub shell_mass_imbalance: T,
    /// Exponent `p` of the neglected `O(m^-p)` remainder in `E/m`.
    pub energy_remainder_order: T,
    /// Exponent of the neglected remainder in the V thicknesses.
    pub thickness_remainder_order: T,
}

impl<T: Scalar> AsymptoticPrediction<T> {
    pub fn energy_per_mass(&self) -> T {
        self.energy_leading + self.energy_correction
    }

    /// `(R1-R0) - (R3-R2)`
    pub fn thickness_difference(&self) -> T {
        self.thicknesses[0] - self.thicknesses[2]
    }
}

/// Series for the optimal liposome of U mass `m` as `m → ∞`.
pub fn asymptotic_liposome<T: Scalar>(
    m: T,
    zeta: T,
    gamma: T,
    n: usize,
    equal_mass: bool,
) -> Result<AsymptoticPrediction<T>> {
    check_dim(n)?;
    for (name, x) in [("m", m), ("zeta", zeta), ("gamma", gamma)] {
        if !(x > T::zero()) {
            return Err(Error::OutOfRange(format!("{name} must be positive")));
        }
    }
    let pi = T::PI();
    let z = zeta;
    let zp = z + T::one();
    let gz = gamma * zp;
    let c = |x: f64| lit::<T>(x);
    let leading = (c(9.0) * gz / c(8.0)).cbrt();
    let v_lead = (c(3.0) * z * z * z / gz).cbrt();
    let w = (c(24.0) / gz).cbrt();
    if n == 2 {
        let (corr, shift) = if equal_mass {
            (
                c(24.0) * pi * pi * (c(2.0) * z * z + c(8.0) * z + c(7.0)) / (c(5.0) * gz * m * m),
                c(6.0) * pi * z * (z + c(2.0)) / (gz * m),
            )
        } else {
            (
                c(8.0) * pi * pi / c(5.0) * (z * z + c(4.0) * z + T::one()) / (gz * m * m),
                c(2.0) * pi * z * (z + c(2.0)) / (gz * m),
            )
        };
        let imbalance = if equal_mass {
            T::zero()
        } else {
            c(4.0) * z * (z + c(2.0)) / (c(3.0) * gz * gz).cbrt()
        };
        Ok(AsymptoticPrediction {
            energy_leading: leading,
            energy_correction: corr,
            thicknesses: [v_lead + shift, w, v_lead - shift],
            mid_radius: m / (c(4.0) * pi) * (gz / c(3.0)).cbrt(),
            shell_mass_imbalance: imbalance,
            energy_remainder_order: c(3.0),
            thickness_remainder_order: c(2.0),
        })
    } else {
        let k = (gz / c(3.0)).powf(c(2.0 / 3.0));
        let root = (c(8.0) * pi / m).sqrt();
        let (corr, shift) = if equal_mass {
            (
                c(4.0) * pi / (c(5.0) * m) * (c(7.0) * z * z + c(28.0) * z + c(32.0)) / k,
                z * (z + c(2.0)) * root / (gz / c(3.0)).powf(c(5.0 / 6.0)),
            )
        } else {
            (
                c(4.0) * pi / (c(15.0) * m) * (z * z + c(4.0) * z + c(16.0)) / k,
                (z + c(2.0)) * root * z / (c(3.0) * gz.powi(5)).powf(c(1.0 / 6.0)),
            )
        };
        let imbalance = if equal_mass {
            T::zero()
        } else {
            (c(6.0) * m).sqrt() * z * (z + c(2.0)) / (pi * gz).sqrt()
        };
        Ok(AsymptoticPrediction {
            energy_leading: leading,
            energy_correction: corr,
            thicknesses: [v_lead + shift, w, v_lead - shift],
            mid_radius: (gz / c(3.0)).powf(c(1.0 / 6.0)) / (c(2.0) * (c(2.0) * pi / m).sqrt()),
            shell_mass_imbalance: imbalance,
            energy_remainder_order: c(1.5),
            thickness_remainder_order: T::one(),
        })
    }
}

/// Scale parameters of the rescaled functional `F_ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RescaleParams<T> {
    pub rho: T,
    pub d: usize,
}

impl<T: Scalar> RescaleParams<T> {
    pub fn new(rho: T, d: usize) -> Result<Self> {
        if !(rho > T::zero()) || !(1..=3).contains(&d) {
            return Err(Error::OutOfRange("rho must be positive and d in {1, 2, 3}".into()));
        }
        Ok(Self { rho, d })
    }
}

/// `F_ρ = ρ^{1-d} Per U + γ ρ^{-2-d} N(U, V)`, evaluated through the dilation
/// identity `ρ^{d-n} F_ρ = Per U_ρ + γ N(U_ρ, V_ρ)` with `U_ρ = U/ρ`.
pub fn rescaled_energy<T: Scalar>(c: &RadialCandidate<T>, rp: RescaleParams<T>, gamma: T) -> Result<T> {
    let dil = c.dilate(T::one() / rp.rho);
    let e = super::liposome_energy(&dil, gamma)?;
    let expo = c.n() as i32 - rp.d as i32;
    Ok(rp.rho.powi(expo) * e.total)
}

/// Expansion of the rescaled problem (`d = 1`) for the minimizer at U mass `m`
/// (mass of `u = 1_U/ρ`); the energy fields hold `F_ρ/m`.
pub fn asymptotic_rescaled<T: Scalar>(
    m: T,
    zeta: T,
    rho: T,
    n: usize,
    equal_mass: bool,
) -> Result<AsymptoticPrediction<T>> {
    if !(rho > T::zero()) {
        return Err(Error::OutOfRange("rho must be positive".into()));
    }
    let mut p = asymptotic_liposome(m * rho, zeta, rho.powi(-3), n, equal_mass)?;
    p.energy_leading = p.energy_leading * rho;
    p.energy_correction = p.energy_correction * rho;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leading_values() {
        let p = asymptotic_liposome(1e9f64, 1.0, 500.0, 3, false).unwrap();
        assert!((p.energy_leading - 10.40041911525952057265).abs() < 1e-12);
        let p = asymptotic_liposome(1e9f64, 0.6, 500.0, 3, false).unwrap();
        assert!((p.energy_leading - 9.654893846056297578599).abs() < 1e-12);
    }

    #[test]
    fn rescaled_series_match_printed_coefficients() {
        let (m, z, rho) = (3.0, 0.7, 0.05);
        let zp = z + 1.0;
        let pi = std::f64::consts::PI;
        let p = asymptotic_rescaled(m, z, rho, 2, false).unwrap();
        let want = 8.0 * pi * pi * rho * rho * (z * z + 4.0 * z + 1.0) / (5.0 * zp * m * m);
        assert!((p.energy_correction - want).abs() < 1e-14);
        assert!((p.energy_leading - (9.0 * zp / 8.0f64).cbrt()).abs() < 1e-14);
        let want_shift = 2.0 * pi * rho * rho / (m / z) * (z + 2.0) / zp;
        assert!((p.thickness_difference() - 2.0 * want_shift).abs() < 1e-14);
        let p = asymptotic_rescaled(m, z, rho, 3, true).unwrap();
        let want = rho * rho * 4.0 * pi / (5.0 * m) * (7.0 * z * z + 28.0 * z + 32.0) / (zp / 3.0).powf(2.0 / 3.0);
        assert!((p.energy_correction - want).abs() < 1e-13);
        let want_shift =
            (8.0 * pi).sqrt() * (z + 2.0) * z * rho * rho / (m.sqrt() * (zp.powi(5) / 3f64.powi(5)).powf(1.0 / 6.0));
        assert!((p.thickness_difference() - 2.0 * want_shift).abs() < 1e-13);
    }

    #[test]
    fn equal_mass_shift_is_three_times_free() {
        for n in [2, 3] {
            for z in [0.25f64, 1.0, 4.0] {
                let f = asymptotic_liposome(1e4, z, 2.0, n, false).unwrap();
                let e = asymptotic_liposome(1e4, z, 2.0, n, true).unwrap();
                assert!((e.thickness_difference() / f.thickness_difference() - 3.0).abs() < 1e-12);
            }
        }
    }
}
