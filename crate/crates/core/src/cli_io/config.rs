//! TOML run configuration.
//!
//! ```toml
//! output_dir = "out"
//!
//! [grid]
//! counts = [256, 256]
//! lengths = [2.6, 2.6]
//!
//! [physics]
//! zeta = 1.0
//! gamma = 1500.0
//! mass = 1.0
//! epsilon = 0.05
//! k1 = 30000.0
//! k2 = 4800.0
//! # v_reg = 2e-8          optional, defaults to (epsilon/2)/1250000
//! # interpolant = "cubic" or "identity"
//!
//! [stepper]
//! l1 = 1.0
//! l2 = 5.0
//! dt = 1.25e-4
//! max_steps = 100000
//! stop_tol = 1e-3          # inf disables the stationarity stop
//! checkpoint_every = 10000
//! trace_every = 100
//!
//! [init]
//! kind = "optimal_liposome"    # or "bilayer", "radial", "checkpoint"
//!
//! [perturb]                    # optional
//! kind = "noise"               # or "hole" with center and radius
//! amplitude = 0.01
//! seed = 1
//! ```
//!
//! `bilayer` takes `u_half_thickness`, optional `v_thickness` and `epsilon`,
//! and an `[init.shape]` table whose `type` is one of `ball`, `shell`, `disk`,
//! `torus`, `gyroid`, `curve_bilayer`. `radial` takes `radii = [R0, R1, R2, R3]`
//! and an optional `center`; `optimal_liposome` optimizes the radii for the
//! configured mass (optional `equal_mass`, `center`); `checkpoint` takes `path`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{RunState, StepperConfig};
use crate::energy::{Interpolant, PhysParams};
use crate::error::{Error, Result};
use crate::initcond::{add_noise, build_bilayer, from_radial, mass_rescale, perforate, BilayerSpec, ShapeSpec};
use crate::radial::{optimize_liposome, RadialCandidate};
use crate::spectral_grid::{integrate, GridSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub counts: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    pub zeta: f64,
    pub gamma: f64,
    pub mass: f64,
    pub epsilon: f64,
    pub k1: f64,
    pub k2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_reg: Option<f64>,
    #[serde(default)]
    pub interpolant: Interpolant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    pub l1: f64,
    pub l2: f64,
    pub dt: f64,
    pub max_steps: u64,
    pub stop_tol: f64,
    pub checkpoint_every: u64,
    pub trace_every: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSpec {
    Bilayer {
        shape: ShapeSpec<f64>,
        u_half_thickness: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v_thickness: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
    },
    Radial {
        radii: [f64; 4],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 3]>,
    },
    OptimalLiposome {
        #[serde(default)]
        equal_mass: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<[f64; 3]>,
    },
    Checkpoint {
        path: PathBuf,
    },
}

fn default_noise() -> f64 {
    0.01
}

/// Perturbation applied after construction; both phases are then rescaled back
/// to their previous integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbSpec {
    Hole {
        center: [f64; 3],
        radius: f64,
    },
    Noise {
        #[serde(default = "default_noise")]
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub stepper: StepperSection,
    pub init: InitSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<PerturbSpec>,
}

impl RunConfig {
    /// Two-dimensional experiment defaults: box 2.6², 256² nodes, liposome seed.
    pub fn planar_default(mass: f64) -> Self {
        let p = PhysParams::<f64>::planar_defaults(mass);
        let s = StepperConfig::<f64>::planar_defaults();
        Self {
            output_dir: PathBuf::from("out"),
            grid: GridConfig {
                counts: vec![256, 256],
                lengths: vec![2.6, 2.6],
            },
            physics: PhysicsConfig {
                zeta: p.zeta,
                gamma: p.gamma,
                mass: p.mass,
                epsilon: p.epsilon,
                k1: p.k1,
                k2: p.k2,
                v_reg: None,
                interpolant: Interpolant::Cubic,
            },
            stepper: StepperSection {
                l1: s.l1,
                l2: s.l2,
                dt: s.dt,
                max_steps: s.max_steps,
                stop_tol: s.stop_tol,
                checkpoint_every: s.checkpoint_every,
                trace_every: s.trace_every,
            },
            init: InitSpec::OptimalLiposome {
                equal_mass: false,
                center: None,
            },
            perturb: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(&self.grid.counts, &self.grid.lengths)
    }

    pub fn params(&self) -> Result<PhysParams<f64>> {
        let c = &self.physics;
        let mut p = PhysParams::new(c.zeta, c.gamma, c.mass, c.epsilon, c.k1, c.k2)?.with_interpolant(c.interpolant);
        if let Some(r) = c.v_reg {
            p = p.with_v_reg(r);
        }
        p.validate()?;
        Ok(p)
    }

    pub fn stepper(&self) -> Result<StepperConfig<f64>> {
        let s = &self.stepper;
        let cfg = StepperConfig {
            l1: s.l1,
            l2: s.l2,
            dt: s.dt,
            max_steps: s.max_steps,
            stop_tol: s.stop_tol,
            checkpoint_every: s.checkpoint_every,
            trace_every: s.trace_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Initial state from `init` and `perturb`. Relative checkpoint paths are
    /// taken relative to `base`.
    pub fn initial_state(&self, base: &Path) -> Result<RunState<f64>> {
        let grid = self.grid()?;
        let p = self.params()?;
        let center = |c: Option<[f64; 3]>| {
            c.unwrap_or_else(|| {
                let mut x = [0.0; 3];
                for (a, &l) in grid.lengths().iter().enumerate() {
                    x[a] = l / 2.0;
                }
                x
            })
        };
        let mut state = match &self.init {
            InitSpec::Bilayer {
                shape,
                u_half_thickness,
                v_thickness,
                epsilon,
            } => {
                let mut spec = BilayerSpec::new(shape.clone(), *u_half_thickness, p.zeta, epsilon.unwrap_or(p.epsilon));
                if let Some(t) = v_thickness {
                    spec = spec.with_v_thickness(*t);
                }
                let (u, v) = build_bilayer(&spec, &grid)?;
                RunState::new(u, v)?
            }
            InitSpec::Radial { radii, center: c } => {
                let cand = RadialCandidate::new(grid.dim(), p.zeta, *radii)?;
                let (u, v) = from_radial(&cand, center(*c), p.epsilon, &grid)?;
                RunState::new(u, v)?
            }
            InitSpec::OptimalLiposome { equal_mass, center: c } => {
                let cand = optimize_liposome(p.mass, p.zeta, p.gamma, grid.dim(), *equal_mass)?;
                let (u, v) = from_radial(&cand, center(*c), p.epsilon, &grid)?;
                RunState::new(u, v)?
            }
            InitSpec::Checkpoint { path } => {
                let path = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let s: RunState<f64> = super::checkpoint::read_checkpoint(path)?;
                if *s.u.grid() != grid {
                    return Err(Error::Config("checkpoint grid differs from the configured grid".into()));
                }
                s
            }
        };
        if let Some(pert) = &self.perturb {
            let (mu, mv) = (integrate(&state.u), integrate(&state.v));
            let (u, v) = match pert {
                PerturbSpec::Hole { center, radius } => perforate(&state.u, &state.v, *center, *radius, p.epsilon)?,
                PerturbSpec::Noise { amplitude, seed } => (
                    add_noise(&state.u, *amplitude, *seed),
                    add_noise(&state.v, *amplitude, seed.wrapping_add(1)),
                ),
            };
            state.u = mass_rescale(&u, mu)?;
            state.v = mass_rescale(&v, mv)?;
        }
        Ok(state)
    }
}
