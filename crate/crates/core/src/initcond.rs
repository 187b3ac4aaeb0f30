//! Initial phase fields for bilayer, micelle and liposome geometries.
//!
//! Every shape reduces to a depth function `s(x)`, positive inside the U
//! region. With the profile `g_ε(d) = (1 + tanh(3d/ε))/2` the fields are
//! `u = g_ε(s)` and `v = max(g_ε(s + t_V) - u, 0)`, so V flanks U on both sides.
//!
//! Displacements are taken with the minimal-image convention, so shapes larger
//! than half the box wrap around and may overlap their periodic copies; see
//! [`ShapeSpec::fits_in_box`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::RadialCandidate;
use crate::scalar::{from_usize, lit, Scalar};
use crate::spectral_grid::{integrate, Field, GridSpec};

/// Geometry of the U region (or of its midsurface for thin shapes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec<T> {
    /// Solid U ball (a micelle).
    Ball { center: [T; 3], radius: T },
    /// U occupies `inner_radius < |x - c| < outer_radius`.
    Shell {
        center: [T; 3],
        inner_radius: T,
        outer_radius: T,
    },
    /// Flat bilayer through `center` with unit-normalized `normal`. `radius`
    /// bounds the midsurface to a disk (a segment in 2-D); `None` is an
    /// infinite slab.
    Disk {
        center: [T; 3],
        normal: [T; 3],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<T>,
    },
    /// Tubular bilayer around a circle in the xy-plane, 3-D only. The circle
    /// is stretched along x by `deform_factor`.
    Torus {
        center: [T; 3],
        major_radius: T,
        minor_radius: T,
        deform_factor: T,
    },
    /// Bilayer along the level set `g = level` of
    /// `g = sin X cos Y + sin Y cos Z + sin Z cos X`, with `scale` periods per box edge.
    Gyroid { level: T, scale: u32 },
    /// Bilayer along a closed polyline in the xy-plane.
    CurveBilayer { points: Vec<[T; 2]> },
}

/// A shape plus layer widths and interface width.
#[derive(Clone, Debug, PartialEq)]
pub struct BilayerSpec<T> {
    pub shape: ShapeSpec<T>,
    pub u_half_thickness: T,
    /// V width on each side of U.
    pub v_thickness: T,
    pub epsilon: T,
}

impl<T: Scalar> BilayerSpec<T> {
    /// V width defaults to `ζ · u_half_thickness`.
    pub fn new(shape: ShapeSpec<T>, u_half_thickness: T, zeta: T, epsilon: T) -> Self {
        Self {
            shape,
            u_half_thickness,
            v_thickness: zeta * u_half_thickness,
            epsilon,
        }
    }

    pub fn with_v_thickness(mut self, t: T) -> Self {
        self.v_thickness = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !pos(self.u_half_thickness) || !pos(self.v_thickness) || !pos(self.epsilon) {
            return Err(Error::Geometry("thicknesses and epsilon must be positive".into()));
        }
        self.shape.validate()
    }
}

/// `(1 + tanh(3d/ε)) / 2`
#[inline]
pub fn tanh_profile<T: Scalar>(signed_distance: T, epsilon: T) -> T {
    (T::one() + (lit::<T>(3.0) * signed_distance / epsilon).tanh()) / lit(2.0)
}

#[inline]
fn wrap<T: Scalar>(d: T, len: T) -> T {
    d - len * (d / len).round()
}

fn displacement<T: Scalar>(grid: &GridSpec<T>, x: [T; 3], c: [T; 3]) -> [T; 3] {
    let mut d = [T::zero(); 3];
    for a in 0..grid.dim() {
        d[a] = wrap(x[a] - c[a], grid.lengths()[a]);
    }
    d
}

fn norm<T: Scalar>(d: [T; 3]) -> T {
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

fn dot<T: Scalar>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Distance from `p` to the ellipse `(a cos t, b sin t)`, `a ≥ b > 0`.
fn ellipse_distance<T: Scalar>(px: T, py: T, a: T, b: T) -> T {
    let (x, y) = (px.abs(), py.abs());
    let mut t = y.atan2(x * b / a);
    for _ in 0..30 {
        let (s, c) = t.sin_cos();
        let ex = a * c - x;
        let ey = b * s - y;
        let g = -a * s * ex + b * c * ey;
        let h = a * a * s * s + b * b * c * c - a * c * ex - b * s * ey;
        if !(h > T::zero()) {
            break;
        }
        let dt = g / h;
        t = (t - dt).max(T::zero()).min(T::FRAC_PI_2());
        if dt.abs() < lit(1e-14) {
            break;
        }
    }
    let (s, c) = t.sin_cos();
    ((a * c - x).powi(2) + (b * s - y).powi(2)).sqrt()
}

impl<T: Scalar> ShapeSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        let ok = match self {
            ShapeSpec::Ball { radius, .. } => pos(*radius),
            ShapeSpec::Shell {
                inner_radius,
                outer_radius,
                ..
            } => pos(*inner_radius) && outer_radius > inner_radius,
            ShapeSpec::Disk { normal, radius, .. } => norm(*normal) > T::zero() && radius.is_none_or(pos),
            ShapeSpec::Torus {
                major_radius,
                minor_radius,
                deform_factor,
                ..
            } => pos(*major_radius) && pos(*minor_radius) && *deform_factor >= T::one(),
            ShapeSpec::Gyroid { scale, level } => *scale > 0 && level.is_finite(),
            ShapeSpec::CurveBilayer { points } => points.len() >= 3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("invalid shape {self:?}")))
        }
    }

    /// Whether the shape plus `margin` fits inside half the shortest box edge
    /// around its center. Periodic and unbounded shapes always fit.
    pub fn fits_in_box(&self, grid: &GridSpec<T>, margin: T) -> bool {
        let half = grid.lengths().iter().fold(T::infinity(), |m, &l| m.min(l)) / lit(2.0);
        let extent = match self {
            ShapeSpec::Ball { radius, .. } => *radius,
            ShapeSpec::Shell { outer_radius, .. } => *outer_radius,
            ShapeSpec::Disk { radius, .. } => radius.unwrap_or(T::zero()),
            ShapeSpec::Torus {
                major_radius,
                minor_radius,
                deform_factor,
                ..
            } => *major_radius * *deform_factor + *minor_radius,
            ShapeSpec::Gyroid { .. } => T::zero(),
            ShapeSpec::CurveBilayer { points } => {
                let mut e = T::zero();
                for a in 0..2 {
                    let lo = points.iter().fold(T::infinity(), |m, p| m.min(p[a]));
                    let hi = points.iter().fold(T::neg_infinity(), |m, p| m.max(p[a]));
                    e = e.max((hi - lo) / lit(2.0));
                }
                e
            }
        };
        extent + margin <= half
    }

    /// Distance to the midsurface, or for `Ball`/`Shell` the signed depth into U.
    /// Returns `(value, is_depth)`.
    fn measure(&self, grid: &GridSpec<T>, x: [T; 3]) -> (T, bool) {
        match self {
            ShapeSpec::Ball { center, radius } => (*radius - norm(displacement(grid, x, *center)), true),
            ShapeSpec::Shell {
                center,
                inner_radius,
                outer_radius,
            } => {
                let r = norm(displacement(grid, x, *center));
                ((r - *inner_radius).min(*outer_radius - r), true)
            }
            ShapeSpec::Disk { center, normal, radius } => {
                let d = displacement(grid, x, *center);
                let nn = norm(*normal);
                let n = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
                let z = dot(d, n);
                let dist = match radius {
                    None => z.abs(),
                    Some(r) => {
                        let p = [d[0] - z * n[0], d[1] - z * n[1], d[2] - z * n[2]];
                        let rho = norm(p);
                        if rho <= *r {
                            z.abs()
                        } else {
                            ((rho - *r).powi(2) + z * z).sqrt()
                        }
                    }
                };
                (dist, false)
            }
            ShapeSpec::Torus {
                center,
                major_radius,
                minor_radius,
                deform_factor,
            } => {
                let d = displacement(grid, x, *center);
                let a = *major_radius * *deform_factor;
                let b = *major_radius;
                let planar = ellipse_distance(d[0], d[1], a, b);
                let tube = (planar * planar + d[2] * d[2]).sqrt();
                ((tube - *minor_radius).abs(), false)
            }
            ShapeSpec::Gyroid { level, scale } => {
                let mut q = [T::zero(); 3];
                let mut k = [T::zero(); 3];
                for a in 0..3 {
                    let len = if a < grid.dim() { grid.lengths()[a] } else { T::one() };
                    k[a] = T::TAU() * from_usize::<T>(*scale as usize) / len;
                    q[a] = k[a] * x[a];
                }
                let (s, c): (Vec<T>, Vec<T>) = q.iter().map(|t| t.sin_cos()).unzip();
                let g = s[0] * c[1] + s[1] * c[2] + s[2] * c[0];
                let grad = [
                    k[0] * (c[0] * c[1] - s[2] * s[0]),
                    k[1] * (c[1] * c[2] - s[0] * s[1]),
                    k[2] * (c[2] * c[0] - s[1] * s[2]),
                ];
                let gn = norm(grad).max(lit::<T>(1e-3) * k[0]);
                (((g - *level) / gn).abs(), false)
            }
            ShapeSpec::CurveBilayer { points } => {
                let mut best = T::infinity();
                for i in 0..points.len() {
                    let a = points[i];
                    let b = points[(i + 1) % points.len()];
                    let d = displacement(grid, x, [a[0], a[1], T::zero()]);
                    let e = [b[0] - a[0], b[1] - a[1]];
                    let ee = e[0] * e[0] + e[1] * e[1];
                    let t = if ee > T::zero() {
                        ((d[0] * e[0] + d[1] * e[1]) / ee).max(T::zero()).min(T::one())
                    } else {
                        T::zero()
                    };
                    let dx = d[0] - t * e[0];
                    let dy = d[1] - t * e[1];
                    best = best.min((dx * dx + dy * dy).sqrt());
                }
                (best, false)
            }
        }
    }
}

/// Smoothed U band and flanking V bands for `spec` on `grid`.
pub fn build_bilayer<T: Scalar>(spec: &BilayerSpec<T>, grid: &GridSpec<T>) -> Result<(Field<T>, Field<T>)> {
    spec.validate()?;
    if matches!(spec.shape, ShapeSpec::Torus { .. } | ShapeSpec::Gyroid { .. }) && grid.dim() != 3 {
        return Err(Error::Geometry("torus and gyroid seeds need a 3-D grid".into()));
    }
    let eps = spec.epsilon;
    let n = grid.num_points();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for idx in 0..n {
        let (m, is_depth) = spec.shape.measure(grid, grid.node(idx));
        let s = if is_depth { m } else { spec.u_half_thickness - m };
        let uu = tanh_profile(s, eps);
        let outer = tanh_profile(s + spec.v_thickness, eps);
        u.push(uu);
        v.push((outer - uu).max(T::zero()));
    }
    Ok((Field::new(*grid, u)?, Field::new(*grid, v)?))
}

/// Smoothed fields of a sharp radial candidate centered at `center`; the grid
/// dimension must equal the candidate's.
pub fn from_radial<T: Scalar>(
    c: &RadialCandidate<T>,
    center: [T; 3],
    epsilon: T,
    grid: &GridSpec<T>,
) -> Result<(Field<T>, Field<T>)> {
    if c.n() != grid.dim() {
        return Err(Error::Geometry(format!(
            "candidate is {}-D but grid is {}-D",
            c.n(),
            grid.dim()
        )));
    }
    if !(epsilon > T::zero()) {
        return Err(Error::Geometry("epsilon must be positive".into()));
    }
    let [r0, r1, r2, r3] = c.radii();
    let micelle = r1 == T::zero();
    let n = grid.num_points();
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for idx in 0..n {
        let r = norm(displacement(grid, grid.node(idx), center));
        let (su, sv) = if micelle {
            (r2 - r, r3 - r)
        } else {
            ((r - r1).min(r2 - r), (r - r0).min(r3 - r))
        };
        let uu = tanh_profile(su, epsilon);
        u.push(uu);
        v.push((tanh_profile(sv, epsilon) - uu).max(T::zero()));
    }
    Ok((Field::new(*grid, u)?, Field::new(*grid, v)?))
}

/// Multiply both fields by the smoothed exterior of the ball `B(center, radius)`.
/// A non-positive radius leaves the fields untouched.
pub fn perforate<T: Scalar>(
    u: &Field<T>,
    v: &Field<T>,
    center: [T; 3],
    radius: T,
    epsilon: T,
) -> Result<(Field<T>, Field<T>)> {
    u.check_same_grid(v)?;
    if !(radius > T::zero()) {
        return Ok((u.clone(), v.clone()));
    }
    let grid = *u.grid();
    let mask: Vec<T> = (0..grid.num_points())
        .map(|i| tanh_profile(norm(displacement(&grid, grid.node(i), center)) - radius, epsilon))
        .collect();
    let apply = |f: &Field<T>| {
        let vals = f.values().iter().zip(&mask).map(|(&a, &m)| a * m).collect();
        Field::new(grid, vals)
    };
    Ok((apply(u)?, apply(v)?))
}

/// Scale `f` so `∫f = target_mass`, then clamp samples to `[0, 1.1]`.
pub fn mass_rescale<T: Scalar>(f: &Field<T>, target_mass: T) -> Result<Field<T>> {
    let m = integrate(f);
    if !(m > T::zero()) {
        return Err(Error::InvalidField(
            "cannot rescale a field with non-positive mass".into(),
        ));
    }
    let s = target_mass / m;
    let hi = lit::<T>(1.1);
    Ok(f.map(|x| (x * s).max(T::zero()).min(hi)))
}

/// Add independent uniform noise in `[-amplitude, amplitude]`.
pub fn add_noise<T: Scalar>(f: &Field<T>, amplitude: T, seed: u64) -> Field<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = amplitude.to_f64().unwrap_or(0.0);
    let mut out = f.clone();
    for x in out.values_mut() {
        *x = *x + lit::<T>(rng.gen_range(-1.0..=1.0) * a);
    }
    out
}

/// Closed curve `r(θ) = R (1 + Σ a_k cos(kθ + φ_k))` sampled at `samples` points.
/// Coefficients are drawn uniformly with `|a_k| ≤ amplitude / k`; the radius is
/// kept positive by capping the total relative amplitude below 1/2.
pub fn random_curve<T: Scalar>(
    center: [T; 2],
    mean_radius: T,
    harmonics: usize,
    amplitude: T,
    samples: usize,
    seed: u64,
) -> Vec<[T; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = amplitude.to_f64().unwrap_or(0.0);
    let mut coeffs: Vec<(f64, f64)> = (2..harmonics + 2)
        .map(|k| {
            (
                rng.gen_range(-1.0..=1.0) * amp / k as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let total: f64 = coeffs.iter().map(|c| c.0.abs()).sum();
    if total > 0.45 {
        for c in coeffs.iter_mut() {
            c.0 *= 0.45 / total;
        }
    }
    (0..samples.max(3))
        .map(|i| {
            let th = std::f64::consts::TAU * i as f64 / samples.max(3) as f64;
            let rel: f64 = 1.0
                + coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, &(a, p))| a * ((j + 2) as f64 * th + p).cos())
                    .sum::<f64>();
            let r = mean_radius * lit(rel);
            [center[0] + r * lit(th.cos()), center[1] + r * lit(th.sin())]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(n: usize) -> GridSpec<f64> {
        GridSpec::uniform(2, n, 2.6).unwrap()
    }

    #[test]
    fn profile_symmetry() {
        assert_eq!(tanh_profile(0.0f64, 0.1), 0.5);
        assert_eq!(tanh_profile(f64::INFINITY, 0.1), 1.0);
        assert_eq!(tanh_profile(f64::NEG_INFINITY, 0.1), 0.0);
        for d in [0.01f64, 0.07, 0.3] {
            assert!((tanh_profile(d, 0.05) + tanh_profile(-d, 0.05) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn overlap_small_for_thin_interfaces() {
        let g = grid2(128);
        let shape = ShapeSpec::Shell {
            center: [1.3, 1.3, 0.0],
            inner_radius: 0.5,
            outer_radius: 0.7,
        };
        let (u, v) = build_bilayer(&BilayerSpec::new(shape, 0.1, 1.0, 0.01), &g).unwrap();
        let worst = u
            .values()
            .iter()
            .zip(v.values())
            .map(|(a, b)| a * b)
            .fold(0.0, f64::max);
        assert!(worst <= 0.26, "{worst}");
        assert!(u.values().iter().zip(v.values()).all(|(a, b)| a + b <= 1.0 + 1e-12));
    }

    #[test]
    fn whole_cell_shift_commutes() {
        let g = grid2(64);
        let h = g.spacing(0);
        let mk = |cx: f64| {
            let shape = ShapeSpec::Disk {
                center: [cx, 1.0, 0.0],
                normal: [1.0, 1.0, 0.0],
                radius: Some(0.6),
            };
            build_bilayer(&BilayerSpec::new(shape, 0.1, 1.0, 0.05), &g).unwrap()
        };
        let (u0, _) = mk(1.0);
        let (u1, _) = mk(1.0 + 3.0 * h);
        let rolled = u0.roll(&[3, 0]);
        let err = rolled
            .values()
            .iter()
            .zip(u1.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn gyroid_is_periodic() {
        let g = GridSpec::uniform(3, 16, 2.0f64).unwrap();
        let spec = BilayerSpec::new(ShapeSpec::Gyroid { level: 0.0, scale: 1 }, 0.15, 1.0, 0.1);
        let (u, _) = build_bilayer(&spec, &g).unwrap();
        let err = u
            .roll(&[16, 0, 0])
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert_eq!(err, 0.0);
        assert!(u.values().iter().any(|&x| x > 0.9) && u.values().iter().any(|&x| x < 0.1));
    }

    #[test]
    fn perforation_and_rescale() {
        let g = grid2(64);
        let shape = ShapeSpec::Shell {
            center: [1.3, 1.3, 0.0],
            inner_radius: 0.5,
            outer_radius: 0.7,
        };
        let (u, v) = build_bilayer(&BilayerSpec::new(shape, 0.1, 1.0, 0.05), &g).unwrap();
        let (pu, pv) = perforate(&u, &v, [1.3, 1.3, 0.0], 0.0, 0.05).unwrap();
        assert_eq!((&pu, &pv), (&u, &v));
        let (pu, _) = perforate(&u, &v, [0.1, 0.1, 0.0], 0.05, 0.02).unwrap();
        let err = pu
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        let (pu, _) = perforate(&u, &v, [1.9, 1.3, 0.0], 0.15, 0.02).unwrap();
        let m = integrate(&u);
        assert!(integrate(&pu) < 0.97 * m);
        let r = mass_rescale(&pu, m).unwrap();
        assert!((integrate(&r) - m).abs() < 1e-12 * m);
        assert!(mass_rescale(&Field::zeros(g), 1.0).is_err());
    }

    #[test]
    fn radial_seed_masses() {
        let g = grid2(256);
        let c = RadialCandidate::new(2, 1.0, [0.195f64.sqrt(), 0.5, 0.6, 0.415f64.sqrt()]).unwrap();
        let (u, v) = from_radial(&c, [1.3, 1.3, 0.0], 0.01, &g).unwrap();
        let m = c.mass();
        assert!((integrate(&u) - m).abs() < 0.02 * m);
        assert!((integrate(&v) - m).abs() < 0.02 * m);
    }

    #[test]
    fn noise_and_curves_are_seeded() {
        let g = grid2(16);
        let f = Field::constant(g, 0.5);
        assert_eq!(add_noise(&f, 0.01, 7), add_noise(&f, 0.01, 7));
        assert!(add_noise(&f, 0.01, 7).values().iter().all(|x| (x - 0.5).abs() <= 0.01));
        let c = random_curve([1.3f64, 1.3], 0.6, 4, 0.3, 200, 3);
        assert_eq!(c, random_curve([1.3, 1.3], 0.6, 4, 0.3, 200, 3));
        assert!(c.iter().all(|p| ((p[0] - 1.3).hypot(p[1] - 1.3) - 0.6).abs() < 0.3));
    }
}
