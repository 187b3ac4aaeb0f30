#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;

use okpf::analysis::{dipole_moments, fit_energy_mass, l1_norm, translate, zero_dipole_shift};
use okpf::energy::{potential_w, EnergyModel, PhysParams};
use okpf::initcond::{mass_rescale, tanh_profile};
use okpf::radial::RadialCandidate;
use okpf::spectral_grid::{integrate, Field, GridSpec, Spectral};

fn field(grid: GridSpec<f64>, vals: &[f64]) -> Field<f64> {
    Field::new(grid, vals[..grid.num_points()].to_vec()).unwrap()
}

fn grid8() -> GridSpec<f64> {
    GridSpec::new(&[8, 8], &[1.3, 1.1]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn w_nonnegative_and_zero_on_phases(u in -0.5f64..1.5, v in -0.5f64..1.5) {
        prop_assert!(potential_w(u, v) >= 0.0);
        prop_assert_eq!(potential_w(0.0, v.clamp(0.0, 1.0)), 0.0);
        prop_assert_eq!(potential_w(1.0, 0.0), 0.0);
    }

    #[test]
    fn directional_derivative_matches_differences(
        u in prop::collection::vec(-0.1f64..1.1, 64),
        v in prop::collection::vec(-0.1f64..1.1, 64),
        du in prop::collection::vec(-1.0f64..1.0, 64),
        dv in prop::collection::vec(-1.0f64..1.0, 64),
    ) {
        let g = grid8();
        let model = EnergyModel::new(PhysParams::planar_defaults(0.5), g).unwrap();
        let (u, v, du, dv) = (field(g, &u), field(g, &v), field(g, &du), field(g, &dv));
        let (gu, gv) = model.variational_derivatives(&u, &v).unwrap();
        let an = integrate(&gu.zip_map(&du, |a, b| a * b).unwrap()) + integrate(&gv.zip_map(&dv, |a, b| a * b).unwrap());
        let e = |s: f64| {
            let a = u.zip_map(&du, |x, d| x + s * d).unwrap();
            let b = v.zip_map(&dv, |x, d| x + s * d).unwrap();
            model.total_energy(&a, &b).unwrap().total
        };
        let h = 1e-4;
        let fd = (e(h) - e(-h)) / (2.0 * h);
        prop_assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "{} {}", fd, an);
    }

    #[test]
    fn poisson_inverts_laplacian(w in prop::collection::vec(-1.0f64..1.0, 6 * 4 * 8)) {
        let g = GridSpec::new(&[6, 4, 8], &[0.6, 0.5, 1.0]).unwrap();
        let sp = Spectral::new(g);
        let w = field(g, &w);
        let mean = w.mean();
        let back = sp.laplacian(&sp.poisson_solve(&w).unwrap()).unwrap();
        for (b, x) in back.values().iter().zip(w.values()) {
            prop_assert!((-b - (x - mean)).abs() < 1e-12);
        }
        let phi = sp.poisson_solve(&w).unwrap();
        prop_assert!(phi.mean().abs() < 1e-14);
    }

    #[test]
    fn translation_composes(c in prop::collection::vec(-1.0f64..1.0, 64), t in -0.6f64..0.6, s in -0.6f64..0.6) {
        let g = grid8();
        let f = field(g, &c);
        let h = g.spacing(0);
        let rolled = translate(&f, [2.0 * h, 0.0, 0.0]).unwrap();
        for (x, y) in rolled.values().iter().zip(f.roll(&[-2, 0]).values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // the Nyquist mode is not invertible, so compose on a band-limited field
        let tau = std::f64::consts::TAU;
        let smooth = Field::from_fn(g, |x| {
            (0..8).map(|j| c[j] * (tau * ((j % 3) as f64 * x[0] / 1.3 + (j / 3) as f64 * x[1] / 1.1) + c[8 + j]).sin()).sum()
        });
        let a = translate(&translate(&smooth, [t, s, 0.0]).unwrap(), [-t, -s, 0.0]).unwrap();
        for (x, y) in a.values().iter().zip(smooth.values()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_dipole_on_random_fields(vals in prop::collection::vec(-1.0f64..1.0, 64)) {
        let g = grid8();
        let f = field(g, &vals);
        let mean = f.mean();
        let w = f.map(|x| x - mean);
        let r = zero_dipole_shift(&w).unwrap();
        let d = dipole_moments(&r.shifted);
        let norm = l1_norm(&w);
        for a in 0..2 {
            prop_assert!(d[a].abs() < 1e-10 * norm);
            prop_assert!(r.shift[a].abs() <= g.lengths()[a] / 2.0);
        }
    }

    #[test]
    fn fit_recovers_exact_curves(a in 5.0f64..20.0, b in 0.1f64..5.0, p in 0.4f64..2.5) {
        let pts: Vec<(f64, f64)> = [0.5f64, 1.0, 1.7, 3.0, 6.0].iter().map(|&m| (m, a + b * m.powf(-p))).collect();
        let f = fit_energy_mass(&pts, None).unwrap();
        prop_assert!((f.a - a).abs() < 1e-6 * a && (f.p - p).abs() < 1e-5, "{:?}", f);
    }

    #[test]
    fn profile_is_antisymmetric(d in -1.0f64..1.0, eps in 0.01f64..0.2) {
        prop_assert!((tanh_profile(d, eps) + tanh_profile(-d, eps) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rescale_hits_target(vals in prop::collection::vec(0.0f64..0.5, 64), target in 0.05f64..0.3) {
        let g = grid8();
        let f = mass_rescale(&field(g, &vals), target).unwrap();
        prop_assert!((integrate(&f) - target).abs() < 1e-12);
    }

    #[test]
    fn radial_energy_is_dilation_covariant(s in 0.5f64..2.0, n in 2usize..4) {
        let c = RadialCandidate::new(n, 1.0, [0.9, 1.0, 1.2, (0.9f64.powi(n as i32) + 2.0 * (1.2f64.powi(n as i32) - 1.0)).powf(1.0 / n as f64)]).unwrap();
        let e = c.perimeter();
        let d = c.dilate(s);
        let k = (n - 1) as i32;
        prop_assert!((d.perimeter() - s.powi(k) * e).abs() < 1e-12 * e);
        prop_assert!((d.nonlocal() - s.powi(n as i32 + 2) * c.nonlocal()).abs() < 1e-10 * c.nonlocal());
    }
}

#[test]
fn single_precision_solver() {
    let g = GridSpec::<f32>::new(&[16, 8], &[1.0, 0.5]).unwrap();
    let sp = Spectral::new(g);
    let f = Field::from_fn(g, |x| (std::f32::consts::TAU * x[0]).sin());
    let lap = sp.laplacian(&f).unwrap();
    let k2 = std::f32::consts::TAU.powi(2);
    for (a, b) in lap.values().iter().zip(f.values()) {
        assert!((a + k2 * b).abs() < 1e-3);
    }
}
