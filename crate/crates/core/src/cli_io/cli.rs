//! Command-line surface.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::checkpoint::{read_checkpoint, write_checkpoint};
use super::config::RunConfig;
use super::render::{render_cross_section, PlaneSpec};
use super::trace::{fmt17, read_trace, RunWriter, TRACE_HEADER};
use crate::analysis::{fit_energy_mass, translate, zero_dipole_shift};
use crate::dynamics::{RunState, Stepper, Termination};
use crate::energy::{EnergyModel, Interpolant, PhysParams};
use crate::error::{Error, Result};
use crate::radial::{
    asymptotic_liposome, c_bilayer, c_cylinder, c_sphere, liposome_energy, micelle_energy, micelle_optimal, morphology,
    optimize_liposome, stationarity_residual, thresholds, RadialCandidate,
};
use crate::spectral_grid::Field;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DIVERGENCE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "okpf",
    version,
    about = "Degenerate Ohta-Kawasaki phase-field simulator and sharp-interface radial toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the gradient flow described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Energy breakdown of a checkpoint.
    Energy {
        checkpoint: PathBuf,
        /// Physical parameters; two-dimensional defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the target mass.
        #[arg(long)]
        mass: Option<f64>,
    },
    /// Optimal sharp-interface liposome or micelle.
    Radial(RadialArgs),
    /// Morphology thresholds and a table of c(zeta).
    Roots {
        #[arg(long, default_value_t = 0.25)]
        from: f64,
        #[arg(long, default_value_t = 6.0)]
        to: f64,
        #[arg(long, default_value_t = 24)]
        count: usize,
    },
    /// Fit ratio = a + b m^-p to point files (`m ratio` per line) or traces.
    Fit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Fix the exponent instead of searching for it.
        #[arg(long)]
        p: Option<f64>,
    },
    /// Cross-section PNG of a checkpoint.
    Render {
        checkpoint: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Normal axis of the plane (3-D only).
        #[arg(long, default_value_t = 2)]
        axis: usize,
        /// Plane index along the normal axis; middle of the box by default.
        #[arg(long)]
        index: Option<usize>,
        /// Write every plane along the axis into the directory `out`.
        #[arg(long)]
        stack: bool,
    },
    /// Translate a checkpoint so the charge `f(u) - f(v)/zeta` has zero dipole.
    Dipole {
        checkpoint: PathBuf,
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "cubic")]
        interpolant: InterpolantArg,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum InterpolantArg {
    Cubic,
    Identity,
}

#[derive(Args, Debug)]
pub struct RadialArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub zeta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub m: f64,
    #[arg(long)]
    pub equal_mass: bool,
    /// Print the large-mass series instead of optimizing.
    #[arg(long)]
    pub asymptotic: bool,
    /// Evaluate the micelle of mass m and the optimal micelle.
    #[arg(long)]
    pub micelle: bool,
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Divergence { .. } => EXIT_DIVERGENCE,
        Error::Io(_) | Error::Corrupt { .. } | Error::UnsupportedVersion(_) | Error::Image(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parse `args` (including the program name), execute, and return the exit code.
pub fn execute<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn line(out: &mut dyn Write, key: &str, x: f64) -> Result<()> {
    writeln!(out, "{key} = {}", fmt17(x))?;
    Ok(())
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run { config, output } => cmd_run(&config, output, out),
        Command::Energy {
            checkpoint,
            config,
            mass,
        } => cmd_energy(&checkpoint, config.as_deref(), mass, out),
        Command::Radial(a) => cmd_radial(&a, out),
        Command::Roots { from, to, count } => cmd_roots(from, to, count, out),
        Command::Fit { files, p } => cmd_fit(&files, p, out),
        Command::Render {
            checkpoint,
            out: path,
            axis,
            index,
            stack,
        } => cmd_render(&checkpoint, &path, axis, index, stack, out),
        Command::Dipole {
            checkpoint,
            zeta,
            out: path,
            interpolant,
        } => cmd_dipole(&checkpoint, zeta, interpolant, &path, out),
    }
}

fn cmd_run(config: &Path, output: Option<PathBuf>, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
    let dir = output.unwrap_or_else(|| {
        if cfg.output_dir.is_absolute() {
            cfg.output_dir.clone()
        } else {
            base.join(&cfg.output_dir)
        }
    });
    let params = cfg.params()?;
    let stepper = Stepper::new(EnergyModel::new(params, cfg.grid()?)?, cfg.stepper()?)?;
    let state = cfg.initial_state(&base)?;
    let mut writer = RunWriter::new(&dir)?;
    write_checkpoint(writer.checkpoint_path(state.step), &state)?;
    let outcome = stepper.run(state, &mut writer)?;
    write_checkpoint(dir.join("final.okpf"), &outcome.state)?;
    let e = outcome.state.last_energy;
    writeln!(
        out,
        "termination = {}",
        match outcome.reason {
            Termination::Converged => "converged",
            Termination::MaxSteps => "max_steps",
        }
    )?;
    writeln!(out, "steps = {}", outcome.state.step)?;
    line(out, "time", outcome.state.time)?;
    line(out, "energy", e.total)?;
    line(out, "energy_per_mass", e.total / params.mass)?;
    line(out, "residual", outcome.residual)?;
    writeln!(out, "output = {}", dir.display())?;
    Ok(())
}

fn cmd_energy(checkpoint: &Path, config: Option<&Path>, mass: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let state: RunState<f64> = read_checkpoint(checkpoint)?;
    let mut params = match config {
        Some(c) => RunConfig::load(c)?.params()?,
        None => PhysParams::planar_defaults(1.0),
    };
    if let Some(m) = mass {
        params.mass = m;
        params.validate()?;
    }
    let model = EnergyModel::new(params, *state.u.grid())?;
    let e = model.total_energy(&state.u, &state.v)?;
    let (mu, mv) = model.masses(&state.u, &state.v);
    line(out, "E", e.total)?;
    line(out, "P", e.perimeter)?;
    line(out, "N", e.nonlocal)?;
    line(out, "C", e.constraint)?;
    line(out, "Reg", e.v_regularization)?;
    line(out, "mass_u", mu)?;
    line(out, "mass_v", mv)?;
    line(out, "E_per_m", e.total / params.mass)?;
    Ok(())
}

fn cmd_radial(a: &RadialArgs, out: &mut dyn Write) -> Result<()> {
    if a.asymptotic {
        let p = asymptotic_liposome(a.m, a.zeta, a.gamma, a.n, a.equal_mass)?;
        line(out, "leading_E_per_m", p.energy_leading)?;
        line(out, "correction_E_per_m", p.energy_correction)?;
        line(out, "E_per_m", p.energy_per_mass())?;
        for (i, t) in p.thicknesses.iter().enumerate() {
            line(out, &format!("thickness_{i}"), *t)?;
        }
        line(out, "mid_radius", p.mid_radius)?;
        line(out, "shell_mass_imbalance", p.shell_mass_imbalance)?;
        line(out, "energy_remainder_order", p.energy_remainder_order)?;
        return Ok(());
    }
    if a.micelle {
        let c = RadialCandidate::micelle(a.n, a.zeta, a.m)?;
        let e = micelle_energy(a.m, a.zeta, a.gamma, a.n)?;
        let (m_star, best) = micelle_optimal(a.zeta, a.gamma, a.n)?;
        for (i, r) in c.radii().iter().enumerate() {
            line(out, &format!("R{i}"), *r)?;
        }
        line(out, "perimeter", e.perimeter)?;
        line(out, "nonlocal", e.nonlocal)?;
        line(out, "E", e.total)?;
        line(out, "E_per_m", e.total / a.m)?;
        line(out, "optimal_m", m_star)?;
        line(out, "optimal_E_per_m", best)?;
        return Ok(());
    }
    let c = optimize_liposome(a.m, a.zeta, a.gamma, a.n, a.equal_mass)?;
    let e = liposome_energy(&c, a.gamma)?;
    for (i, r) in c.radii().iter().enumerate() {
        line(out, &format!("R{i}"), *r)?;
    }
    for (i, t) in c.thicknesses().iter().enumerate() {
        line(out, &format!("thickness_{i}"), *t)?;
    }
    line(out, "perimeter", e.perimeter)?;
    line(out, "nonlocal", e.nonlocal)?;
    line(out, "E", e.total)?;
    line(out, "E_per_m", e.total / a.m)?;
    let r = stationarity_residual(&c, a.gamma);
    line(out, "stationarity_0", r[0])?;
    line(out, "stationarity_1", r[1])?;
    Ok(())
}

fn cmd_roots(from: f64, to: f64, count: usize, out: &mut dyn Write) -> Result<()> {
    let t = thresholds::<f64>();
    line(out, "zeta0", t.zeta0)?;
    line(out, "zeta1", t.zeta1)?;
    line(out, "zeta2", t.zeta2)?;
    if !(from > 0.0 && to >= from) || count == 0 {
        return Err(Error::OutOfRange("table needs 0 < from <= to and count > 0".into()));
    }
    writeln!(out, "zeta,bilayer,cylinder,sphere,c,branch,below_zeta0")?;
    for i in 0..count {
        let z = if count == 1 {
            from
        } else {
            from + (to - from) * i as f64 / (count - 1) as f64
        };
        let m = morphology(z)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(z),
            fmt17(c_bilayer(z)),
            fmt17(c_cylinder(z)),
            fmt17(c_sphere(z)),
            fmt17(m.value),
            m.branch.label(),
            m.below_zeta0
        )?;
    }
    Ok(())
}

/// Points from a file: a trace contributes its final `(mass_u, E/mass_u)`,
/// any other file is read as `m ratio` pairs separated by whitespace or commas.
pub fn read_points(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(path)?;
    if text.lines().next().map(str::trim) == Some(TRACE_HEADER) {
        let rows = read_trace(path)?;
        let last = rows
            .last()
            .ok_or_else(|| Error::Config(format!("{} has no rows", path.display())))?;
        return Ok(vec![(last.mass_u, last.energy.total / last.mass_u)]);
    }
    let mut pts = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let cols: Vec<f64> = l
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Config(format!("{}:{}: expected two numbers", path.display(), i + 1)))?;
        if cols.len() != 2 {
            return Err(Error::Config(format!(
                "{}:{}: expected two numbers",
                path.display(),
                i + 1
            )));
        }
        pts.push((cols[0], cols[1]));
    }
    Ok(pts)
}

fn cmd_fit(files: &[PathBuf], p: Option<f64>, out: &mut dyn Write) -> Result<()> {
    let mut pts = Vec::new();
    for f in files {
        pts.extend(read_points(f)?);
    }
    let r = fit_energy_mass(&pts, p)?;
    line(out, "a", r.a)?;
    line(out, "b", r.b)?;
    line(out, "p", r.p)?;
    line(out, "rms_residual", r.rms_residual)?;
    Ok(())
}

fn cmd_render(
    checkpoint: &Path,
    path: &Path,
    axis: usize,
    index: Option<usize>,
    stack: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let s: RunState<f64> = read_checkpoint(checkpoint)?;
    let grid = *s.u.grid();
    if grid.dim() == 2 || !stack {
        if axis > 2 {
            return Err(Error::Geometry(format!("axis {axis} out of range")));
        }
        let index = index.unwrap_or(grid.counts3()[axis] / 2);
        render_cross_section(
            &s.u,
            &s.v,
            PlaneSpec {
                normal_axis: axis,
                index,
            },
            path,
        )?;
        writeln!(out, "wrote {}", path.display())?;
        return Ok(());
    }
    if axis > 2 {
        return Err(Error::Geometry(format!("axis {axis} out of range")));
    }
    fs::create_dir_all(path)?;
    for k in 0..grid.counts3()[axis] {
        let file = path.join(format!("slice_{k:04}.png"));
        render_cross_section(
            &s.u,
            &s.v,
            PlaneSpec {
                normal_axis: axis,
                index: k,
            },
            &file,
        )?;
    }
    writeln!(out, "wrote {} slices to {}", grid.counts3()[axis], path.display())?;
    Ok(())
}

fn cmd_dipole(checkpoint: &Path, zeta: f64, interp: InterpolantArg, path: &Path, out: &mut dyn Write) -> Result<()> {
    if !(zeta > 0.0) {
        return Err(Error::OutOfRange("zeta must be positive".into()));
    }
    let s: RunState<f64> = read_checkpoint(checkpoint)?;
    let f = match interp {
        InterpolantArg::Cubic => Interpolant::Cubic,
        InterpolantArg::Identity => Interpolant::Identity,
    };
    let w = s.u.zip_map(&s.v, |a, b| f.value(a) - f.value(b) / zeta)?;
    let mean = w.mean();
    let w: Field<f64> = w.map(|x| x - mean);
    let r = zero_dipole_shift(&w)?;
    let shifted = RunState {
        u: translate(&s.u, r.shift)?,
        v: translate(&s.v, r.shift)?,
        ..s
    };
    write_checkpoint(path, &shifted)?;
    line(out, "charge_mean_removed", mean)?;
    for a in 0..shifted.u.grid().dim() {
        line(out, &format!("shift_{a}"), r.shift[a])?;
    }
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}
