//! Semi-implicit convex-splitting integrator for the penalized gradient flow.

use crate::energy::{potential_w, potential_w_grad, EnergyBreakdown, EnergyModel, PhysParams};
use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Scalar};
use crate::spectral_grid::Field;

/// Coefficients of the convex quadratic `W1 = A_UU u²/2 + A_UV uv + A_VV v²/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitConstants;

impl SplitConstants {
    pub const A_UU: f64 = 87.0;
    pub const A_UV: f64 = 27.0;
    pub const A_VV: f64 = 54.0;
}

/// `(W1, W2)` with `W1 + W2 = W`.
pub fn split_w<T: Scalar>(u: T, v: T) -> (T, T) {
    let w1 = lit::<T>(SplitConstants::A_UU / 2.0) * u * u
        + lit::<T>(SplitConstants::A_UV) * u * v
        + lit::<T>(SplitConstants::A_VV / 2.0) * v * v;
    (w1, potential_w(u, v) - w1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig<T> {
    pub l1: T,
    pub l2: T,
    pub dt: T,
    pub max_steps: u64,
    /// Stationarity tolerance on `max|(u⁺-u)/dt|`; a non-finite value disables the test.
    pub stop_tol: T,
    pub checkpoint_every: u64,
    pub trace_every: u64,
}

impl<T: Scalar> StepperConfig<T> {
    pub fn planar_defaults() -> Self {
        Self {
            l1: T::one(),
            l2: lit(5.0),
            dt: lit(1.25e-4),
            max_steps: 100_000,
            stop_tol: lit(1e-3),
            checkpoint_every: 10_000,
            trace_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("L1", self.l1), ("L2", self.l2), ("dt", self.dt)] {
            if !(x > T::zero()) || !x.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be positive and finite")));
            }
        }
        if !(self.stop_tol > T::zero()) {
            return Err(Error::InvalidParams("stop_tol must be positive".into()));
        }
        if self.checkpoint_every == 0 || self.trace_every == 0 {
            return Err(Error::InvalidParams("cadences must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunState<T> {
    pub u: Field<T>,
    pub v: Field<T>,
    pub time: T,
    pub step: u64,
    pub last_energy: EnergyBreakdown<T>,
}

impl<T: Scalar> RunState<T> {
    pub fn new(u: Field<T>, v: Field<T>) -> Result<Self> {
        u.check_same_grid(&v)?;
        Ok(Self {
            u,
            v,
            time: T::zero(),
            step: 0,
            last_energy: EnergyBreakdown::default(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    pub state: RunState<T>,
    pub reason: Termination,
    pub residual: T,
}

/// One trace record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub step: u64,
    pub time: T,
    pub energy: EnergyBreakdown<T>,
    pub mass_u: T,
    pub mass_v: T,
    pub residual: T,
}

/// Callbacks invoked by [`Stepper::run`].
pub trait Observer<T> {
    fn on_trace(&mut self, _row: &TraceRow<T>) -> Result<()> {
        Ok(())
    }
    fn on_checkpoint(&mut self, _state: &RunState<T>) -> Result<()> {
        Ok(())
    }
}

impl<T> Observer<T> for () {}

/// Collects every trace row in memory.
#[derive(Clone, Debug, Default)]
pub struct TraceRecorder<T> {
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Copy> Observer<T> for TraceRecorder<T> {
    fn on_trace(&mut self, row: &TraceRow<T>) -> Result<()> {
        self.rows.push(*row);
        Ok(())
    }
}

/// Time stepper with precomputed implicit denominators.
pub struct Stepper<T: Scalar> {
    model: EnergyModel<T>,
    cfg: StepperConfig<T>,
    den_u: Vec<T>,
    den_v: Vec<T>,
}

impl<T: Scalar> Stepper<T> {
    pub fn new(model: EnergyModel<T>, cfg: StepperConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let p = *model.params();
        let auu = lit::<T>(SplitConstants::A_UU);
        let avv = lit::<T>(SplitConstants::A_VV);
        let two = lit::<T>(2.0);
        let k2 = model.spectral().k_squared();
        let den_u = k2
            .iter()
            .map(|&k| T::one() + cfg.dt * cfg.l1 * (p.epsilon * k + auu / p.epsilon))
            .collect();
        let den_v = k2
            .iter()
            .map(|&k| T::one() + cfg.dt * cfg.l2 * (two * p.v_reg * k + avv / p.epsilon))
            .collect();
        Ok(Self {
            model,
            cfg,
            den_u,
            den_v,
        })
    }

    pub fn model(&self) -> &EnergyModel<T> {
        &self.model
    }

    pub fn config(&self) -> &StepperConfig<T> {
        &self.cfg
    }

    /// Advance one step; returns the new state and `max|Δ|/dt`.
    pub fn step(&self, state: &RunState<T>) -> Result<(RunState<T>, T)> {
        let p = *self.model.params();
        let sp = self.model.spectral();
        let (u, v) = (&state.u, &state.v);
        let (_, phi) = self.model.nonlocal_term(u, v)?;
        let (mu, mv) = self.model.masses(u, v);
        let fu = p.k1 * (p.mass - mu);
        let fv = p.k2 * (p.zeta * p.mass - mv);
        let f = p.interpolant;
        let auu = lit::<T>(SplitConstants::A_UU);
        let avv = lit::<T>(SplitConstants::A_VV);
        let (ku, kv) = (self.cfg.dt * self.cfg.l1, self.cfg.dt * self.cfg.l2);
        let n = u.values().len();
        let mut ru = Vec::with_capacity(n);
        let mut rv = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = (u.values()[i], v.values()[i]);
            let (wu, wv) = potential_w_grad(a, b);
            let ph = phi.values()[i];
            let eu = (wu - auu * a) / p.epsilon + (p.gamma * ph - fu) * f.deriv(a);
            let ev = (wv - avv * b) / p.epsilon - (p.gamma / p.zeta * ph + fv) * f.deriv(b);
            ru.push(a - ku * eu);
            rv.push(b - kv * ev);
        }
        let un = sp.apply_multiplier(&ru, |s| T::one() / self.den_u[s]);
        let vn = sp.apply_multiplier(&rv, |s| T::one() / self.den_v[s]);
        let next_step = state.step + 1;
        let mut res = T::zero();
        for i in 0..n {
            let (a, b) = (un[i], vn[i]);
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Divergence {
                    step: next_step,
                    detail: format!("non-finite sample at index {i}"),
                });
            }
            res = res.max((a - u.values()[i]).abs()).max((b - v.values()[i]).abs());
        }
        let next = RunState {
            u: Field::new(*u.grid(), un)?,
            v: Field::new(*u.grid(), vn)?,
            time: lit::<T>(next_step as f64) * self.cfg.dt,
            step: next_step,
            last_energy: state.last_energy,
        };
        Ok((next, res / self.cfg.dt))
    }

    pub fn trace_row(&self, state: &RunState<T>, residual: T) -> Result<TraceRow<T>> {
        let energy = self.model.total_energy(&state.u, &state.v)?;
        let (mass_u, mass_v) = self.model.masses(&state.u, &state.v);
        Ok(TraceRow {
            step: state.step,
            time: state.time,
            energy,
            mass_u,
            mass_v,
            residual,
        })
    }

    /// Iterate until stationary or `max_steps` steps have been taken.
    pub fn run(&self, mut state: RunState<T>, observer: &mut dyn Observer<T>) -> Result<RunOutcome<T>> {
        let residual0 = T::nan();
        let row = self.trace_row(&state, residual0)?;
        state.last_energy = row.energy;
        observer.on_trace(&row)?;
        let mut residual = residual0;
        let mut taken = 0u64;
        let mut reason = Termination::MaxSteps;
        let mut traced_last = true;
        while taken < self.cfg.max_steps {
            let (next, res) = self.step(&state)?;
            state = next;
            residual = res;
            taken += 1;
            let converged = self.cfg.stop_tol.is_finite() && res < self.cfg.stop_tol;
            traced_last = false;
            if taken.is_multiple_of(self.cfg.trace_every) || converged || taken == self.cfg.max_steps {
                let row = self.trace_row(&state, res)?;
                state.last_energy = row.energy;
                observer.on_trace(&row)?;
                traced_last = true;
            }
            if taken.is_multiple_of(self.cfg.checkpoint_every) {
                observer.on_checkpoint(&state)?;
            }
            if converged {
                reason = Termination::Converged;
                break;
            }
        }
        if !traced_last {
            state.last_energy = self.model.total_energy(&state.u, &state.v)?;
        }
        Ok(RunOutcome {
            state,
            reason,
            residual,
        })
    }
}

pub fn step<T: Scalar>(state: &RunState<T>, params: &PhysParams<T>, cfg: &StepperConfig<T>) -> Result<RunState<T>> {
    let s = Stepper::new(EnergyModel::new(*params, *state.u.grid())?, *cfg)?;
    Ok(s.step(state)?.0)
}

pub fn run<T: Scalar>(
    state: RunState<T>,
    params: &PhysParams<T>,
    cfg: &StepperConfig<T>,
    observer: &mut dyn Observer<T>,
) -> Result<RunOutcome<T>> {
    let s = Stepper::new(EnergyModel::new(*params, *state.u.grid())?, *cfg)?;
    s.run(state, observer)
}

/// Exterior-to-global ratio of `max|φ - c|`, where `c` is the mean of `φ` over
/// `{u + v < threshold}`.
///
/// The periodic potential has zero mean, so the exterior plateau is offset from 0;
/// the exterior mean is removed before comparing. `None` when the exterior is
/// empty or the potential vanishes.
pub fn screening_check<T: Scalar>(state: &RunState<T>, params: &PhysParams<T>, threshold: T) -> Result<Option<T>> {
    let model = EnergyModel::new(*params, *state.u.grid())?;
    let (_, phi) = model.nonlocal_term(&state.u, &state.v)?;
    let ext: Vec<usize> = (0..phi.values().len())
        .filter(|&i| state.u.values()[i] + state.v.values()[i] < threshold)
        .collect();
    if ext.is_empty() {
        return Ok(None);
    }
    let c = ext.iter().fold(T::zero(), |a, &i| a + phi.values()[i]) / from_usize(ext.len());
    let global = phi.values().iter().fold(T::zero(), |m, &x| m.max((x - c).abs()));
    let tiny = lit::<T>(1e3) * T::min_positive_value();
    if global <= tiny {
        return Ok(None);
    }
    let outside = ext.iter().fold(T::zero(), |m, &i| m.max((phi.values()[i] - c).abs()));
    Ok(Some(outside / global))
}
