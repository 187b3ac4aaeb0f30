//! Phase-field energy and its variational derivatives.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::spectral_grid::{integrate, Field, GridSpec, Spectral};

/// Interpolating function applied to the phases inside the nonlocal and mass terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolant {
    /// `3z^2 - 2z^3`
    #[default]
    Cubic,
    /// `z`
    Identity,
}

impl Interpolant {
    #[inline]
    pub fn value<T: Scalar>(self, z: T) -> T {
        match self {
            Interpolant::Cubic => interpolant(z),
            Interpolant::Identity => z,
        }
    }

    #[inline]
    pub fn deriv<T: Scalar>(self, z: T) -> T {
        match self {
            Interpolant::Cubic => interpolant_deriv(z),
            Interpolant::Identity => T::one(),
        }
    }
}

#[inline]
pub fn interpolant<T: Scalar>(z: T) -> T {
    z * z * (lit::<T>(3.0) - lit::<T>(2.0) * z)
}

#[inline]
pub fn interpolant_deriv<T: Scalar>(z: T) -> T {
    lit::<T>(6.0) * z * (T::one() - z)
}

#[inline]
fn neg_sq<T: Scalar>(x: T) -> T {
    let m = x.min(T::zero());
    m * m
}

/// Double-well potential of the three-phase model.
#[inline]
pub fn potential_w<T: Scalar>(u: T, v: T) -> T {
    let a = u - u * u;
    lit::<T>(18.0) * a * a + lit::<T>(13.5) * (neg_sq(v) + neg_sq(T::one() - v) + neg_sq(T::one() - u - v))
}

/// `(∂W/∂u, ∂W/∂v)`; the one-sided quadratics have zero derivative at the kink.
#[inline]
pub fn potential_w_grad<T: Scalar>(u: T, v: T) -> (T, T) {
    let a = u - u * u;
    let s = (T::one() - u - v).min(T::zero());
    let du = lit::<T>(36.0) * a * (T::one() - lit::<T>(2.0) * u) - lit::<T>(27.0) * s;
    let dv = lit::<T>(27.0) * (v.min(T::zero()) - (T::one() - v).min(T::zero()) - s);
    (du, dv)
}

/// Model parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams<T> {
    pub zeta: T,
    pub gamma: T,
    pub mass: T,
    pub epsilon: T,
    pub k1: T,
    pub k2: T,
    pub v_reg: T,
    pub interpolant: Interpolant,
}

impl<T: Scalar> PhysParams<T> {
    /// Parameters with the default v-regularization `(ε/2)/1250000`.
    pub fn new(zeta: T, gamma: T, mass: T, epsilon: T, k1: T, k2: T) -> Result<Self> {
        let p = Self {
            zeta,
            gamma,
            mass,
            epsilon,
            k1,
            k2,
            v_reg: Self::default_v_reg(epsilon),
            interpolant: Interpolant::Cubic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn default_v_reg(epsilon: T) -> T {
        epsilon / lit(2.0) / lit(1_250_000.0)
    }

    /// Two-dimensional experiment defaults at the given mass.
    pub fn planar_defaults(mass: T) -> Self {
        Self::new(T::one(), lit(1500.0), mass, lit(0.05), lit(3e4), lit(4800.0)).expect("defaults are valid")
    }

    pub fn with_v_reg(mut self, v_reg: T) -> Self {
        self.v_reg = v_reg;
        self
    }

    pub fn with_interpolant(mut self, f: Interpolant) -> Self {
        self.interpolant = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("zeta", self.zeta),
            ("gamma", self.gamma),
            ("mass", self.mass),
            ("epsilon", self.epsilon),
            ("K1", self.k1),
            ("K2", self.k2),
        ];
        for (name, x) in pos {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite")));
            }
        }
        if !(self.v_reg >= T::zero()) || !self.v_reg.is_finite() {
            return Err(Error::InvalidParams("v_reg must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Energy contributions; `total = perimeter + gamma * nonlocal + constraint + v_regularization`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnergyBreakdown<T> {
    pub perimeter: T,
    pub nonlocal: T,
    pub constraint: T,
    pub v_regularization: T,
    pub total: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    pub fn assemble(perimeter: T, nonlocal: T, constraint: T, v_regularization: T, gamma: T) -> Self {
        Self {
            perimeter,
            nonlocal,
            constraint,
            v_regularization,
            total: perimeter + gamma * nonlocal + constraint + v_regularization,
        }
    }
}

/// Energy functional bound to a grid, with cached FFT plans.
pub struct EnergyModel<T: Scalar> {
    params: PhysParams<T>,
    spectral: Spectral<T>,
}

impl<T: Scalar> EnergyModel<T> {
    pub fn new(params: PhysParams<T>, grid: GridSpec<T>) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            spectral: Spectral::new(grid),
        })
    }

    pub fn params(&self) -> &PhysParams<T> {
        &self.params
    }

    pub fn spectral(&self) -> &Spectral<T> {
        &self.spectral
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.spectral.grid()
    }

    fn check_pair(&self, u: &Field<T>, v: &Field<T>) -> Result<()> {
        u.check_same_grid(v)?;
        if u.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        u.check_finite()?;
        v.check_finite()
    }

    /// `(∫f(u), ∫f(v))`
    pub fn masses(&self, u: &Field<T>, v: &Field<T>) -> (T, T) {
        let f = self.params.interpolant;
        (integrate(&u.map(|x| f.value(x))), integrate(&v.map(|x| f.value(x))))
    }

    /// Charge density `f(u) - f(v)/ζ`.
    pub fn charge(&self, u: &Field<T>, v: &Field<T>) -> Result<Field<T>> {
        let f = self.params.interpolant;
        let z = self.params.zeta;
        u.zip_map(v, |a, b| f.value(a) - f.value(b) / z)
    }

    pub fn perimeter_term(&self, u: &Field<T>, v: &Field<T>) -> Result<T> {
        self.check_pair(u, v)?;
        let eps = self.params.epsilon;
        let grad = self.spectral.dirichlet_energy(u)?;
        let w = integrate(&u.zip_map(v, potential_w)?);
        Ok(eps / lit(2.0) * grad + w / eps)
    }

    /// `(N, φ)` with `N = ½∫|∇φ|^2` and `-Δφ = f(u) - f(v)/ζ - mean`.
    pub fn nonlocal_term(&self, u: &Field<T>, v: &Field<T>) -> Result<(T, Field<T>)> {
        self.check_pair(u, v)?;
        let w = self.charge(u, v)?;
        let spec = self.spectral.forward(w.values());
        let n = self.spectral.inverse_dirichlet(&spec) / lit(2.0);
        let k2 = self.spectral.k_squared();
        let mut phi_spec = spec;
        for (s, z) in phi_spec.iter_mut().enumerate() {
            *z = if s == 0 { *z * T::zero() } else { *z / k2[s] };
        }
        let phi = Field::new(*self.grid(), self.spectral.inverse(phi_spec))?;
        Ok((n, phi))
    }

    pub fn constraint_from_masses(&self, mu: T, mv: T) -> T {
        let p = &self.params;
        let du = p.mass - mu;
        let dv = p.zeta * p.mass - mv;
        lit::<T>(0.5) * (p.k1 * du * du + p.k2 * dv * dv)
    }

    pub fn constraint_term(&self, u: &Field<T>, v: &Field<T>) -> Result<T> {
        self.check_pair(u, v)?;
        let (mu, mv) = self.masses(u, v);
        Ok(self.constraint_from_masses(mu, mv))
    }

    pub fn total_energy(&self, u: &Field<T>, v: &Field<T>) -> Result<EnergyBreakdown<T>> {
        let per = self.perimeter_term(u, v)?;
        let (n, _) = self.nonlocal_term(u, v)?;
        let c = self.constraint_term(u, v)?;
        let reg = if self.params.v_reg > T::zero() {
            self.params.v_reg * self.spectral.dirichlet_energy(v)?
        } else {
            T::zero()
        };
        Ok(EnergyBreakdown::assemble(per, n, c, reg, self.params.gamma))
    }

    /// `(δE/δu, δE/δv)`.
    pub fn variational_derivatives(&self, u: &Field<T>, v: &Field<T>) -> Result<(Field<T>, Field<T>)> {
        let (_, phi) = self.nonlocal_term(u, v)?;
        let p = &self.params;
        let f = p.interpolant;
        let (mu, mv) = self.masses(u, v);
        let fu = p.k1 * (p.mass - mu);
        let fv = p.k2 * (p.zeta * p.mass - mv);
        let lap_u = self.spectral.laplacian(u)?;
        let lap_v = self.spectral.laplacian(v)?;
        let eps = p.epsilon;
        let two_reg = lit::<T>(2.0) * p.v_reg;
        let n = u.values().len();
        let mut du = Vec::with_capacity(n);
        let mut dv = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (u.values()[i], v.values()[i]);
            let (wu, wv) = potential_w_grad(a, b);
            let ph = phi.values()[i];
            du.push(-eps * lap_u.values()[i] + wu / eps + p.gamma * ph * f.deriv(a) - fu * f.deriv(a));
            dv.push(wv / eps - p.gamma / p.zeta * ph * f.deriv(b) - fv * f.deriv(b) - two_reg * lap_v.values()[i]);
        }
        Ok((Field::new(*u.grid(), du)?, Field::new(*u.grid(), dv)?))
    }
}

pub fn perimeter_term<T: Scalar>(u: &Field<T>, v: &Field<T>, params: &PhysParams<T>) -> Result<T> {
    EnergyModel::new(*params, *u.grid())?.perimeter_term(u, v)
}

pub fn nonlocal_term<T: Scalar>(u: &Field<T>, v: &Field<T>, params: &PhysParams<T>) -> Result<(T, Field<T>)> {
    EnergyModel::new(*params, *u.grid())?.nonlocal_term(u, v)
}

pub fn constraint_term<T: Scalar>(u: &Field<T>, v: &Field<T>, params: &PhysParams<T>) -> Result<T> {
    EnergyModel::new(*params, *u.grid())?.constraint_term(u, v)
}

pub fn total_energy<T: Scalar>(u: &Field<T>, v: &Field<T>, params: &PhysParams<T>) -> Result<EnergyBreakdown<T>> {
    EnergyModel::new(*params, *u.grid())?.total_energy(u, v)
}

pub fn variational_derivatives<T: Scalar>(
    u: &Field<T>,
    v: &Field<T>,
    params: &PhysParams<T>,
) -> Result<(Field<T>, Field<T>)> {
    EnergyModel::new(*params, *u.grid())?.variational_derivatives(u, v)
}
