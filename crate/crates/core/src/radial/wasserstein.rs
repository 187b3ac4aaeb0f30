use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

fn check<T: Scalar>(eps: T, kappa: T) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::OutOfRange("epsilon must be positive".into()));
    }
    let x = eps * kappa.abs();
    if !(x < lit(1.0 / 3.0)) {
        return Err(Error::OutOfRange(format!("eps*|kappa| = {x:?} outside [0, 1/3)")));
    }
    Ok(x)
}

/// Inner and outer V-layer thickness of the transport variant at curvature `κ`.
///
/// The free case is exact, written as `2ε / (1 + sqrt((1 ∓ 3x)/(1 ∓ x)))` with
/// `x = ε|κ|`, which equals the product form and stays accurate as `κ → 0`. The
/// equal-mass case is the second-order series `ε ± (3/2)|κ|ε^2`.
pub fn wasserstein_thickness<T: Scalar>(eps: T, kappa: T, equal_mass: bool) -> Result<(T, T)> {
    let x = check(eps, kappa)?;
    if equal_mass {
        return wasserstein_thickness_series(eps, kappa, true);
    }
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let inner = two * eps / (T::one() + ((T::one() - three * x) / (T::one() - x)).sqrt());
    let outer = two * eps / (T::one() + ((T::one() + three * x) / (T::one() + x)).sqrt());
    Ok((inner, outer))
}

/// Second-order series `ε ± c|κ|ε^2`, with `c = 1/2` for the free candidate and
/// `c = 3/2` under equal mass.
pub fn wasserstein_thickness_series<T: Scalar>(eps: T, kappa: T, equal_mass: bool) -> Result<(T, T)> {
    check(eps, kappa)?;
    let c = if equal_mass { lit::<T>(1.5) } else { lit::<T>(0.5) };
    let d = c * kappa.abs() * eps * eps;
    Ok((eps + d, eps - d))
}

/// Product form `(1/|κ| ∓ ε)(±(1 - sqrt(3 - 2/(1 ∓ ε|κ|))))`; requires `κ ≠ 0`.
pub fn wasserstein_thickness_closed_form<T: Scalar>(eps: T, kappa: T) -> Result<(T, T)> {
    let x = check(eps, kappa)?;
    if kappa == T::zero() {
        return Err(Error::OutOfRange("closed form needs nonzero curvature".into()));
    }
    let k = kappa.abs();
    let two = lit::<T>(2.0);
    let three = lit::<T>(3.0);
    let inner = (T::one() / k - eps) * (T::one() - (three - two / (T::one() - x)).sqrt());
    let outer = (T::one() / k + eps) * ((three - two / (T::one() + x)).sqrt() - T::one());
    Ok((inner, outer))
}
