use std::fs;
use std::path::Path;

use okpf::cli_io::checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint};
use okpf::cli_io::cli::{execute, read_points, EXIT_IO, EXIT_OK, EXIT_USAGE};
use okpf::cli_io::render::{color, cross_section, PlaneSpec, U_COLOR, V_COLOR};
use okpf::cli_io::trace::{append_trace, fmt17, read_trace, TRACE_HEADER};
use okpf::cli_io::{InitSpec, PerturbSpec, RunConfig};
use okpf::dynamics::RunState;
use okpf::energy::EnergyBreakdown;
use okpf::spectral_grid::{Field, GridSpec};
use okpf::Error;

fn sample_state(dim: usize) -> RunState<f64> {
    let grid = if dim == 2 {
        GridSpec::<f64>::new(&[6, 4], &[1.5, 1.0]).unwrap()
    } else {
        GridSpec::<f64>::new(&[4, 6, 4], &[1.0, 0.75, 0.5]).unwrap()
    };
    let u = Field::from_fn(grid, |x: [f64; 3]| (x[0] * 3.0).sin() + x[1]);
    let v = Field::from_fn(grid, |x| 0.1 * x[0] - x[2]);
    let mut s = RunState::new(u, v).unwrap();
    s.time = 0.125;
    s.step = 17;
    s
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["okpf"];
    full.extend_from_slice(args);
    let code = execute(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn value(text: &str, key: &str) -> f64 {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    for dim in [2, 3] {
        let s = sample_state(dim);
        let back: RunState<f64> = decode_checkpoint(&encode_checkpoint(&s)).unwrap();
        assert_eq!(back.u, s.u);
        assert_eq!(back.v, s.v);
        assert_eq!((back.time, back.step), (s.time, s.step));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.okpf");
    let s = sample_state(2);
    write_checkpoint(&path, &s).unwrap();
    let back: RunState<f64> = read_checkpoint(&path).unwrap();
    assert_eq!(back.u, s.u);
}

#[test]
fn checkpoint_layout() {
    let bytes = encode_checkpoint(&sample_state(2));
    assert_eq!(&bytes[..4], b"OKPF");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
    assert_eq!(bytes.len(), 12 + 8 + 16 + 8 + 8 + 2 * 24 * 8);
}

#[test]
fn damaged_checkpoints_rejected() {
    let bytes = encode_checkpoint(&sample_state(3));
    for cut in [0, 3, 10, 40, bytes.len() - 1] {
        match decode_checkpoint::<f64>(&bytes[..cut]) {
            Err(Error::Corrupt { .. }) => {}
            other => panic!("cut {cut}: {other:?}"),
        }
    }
    let mut v2 = bytes.clone();
    v2[4] = 2;
    assert!(matches!(
        decode_checkpoint::<f64>(&v2),
        Err(Error::UnsupportedVersion(2))
    ));
    let mut magic = bytes.clone();
    magic[0] = b'X';
    assert!(matches!(
        decode_checkpoint::<f64>(&magic),
        Err(Error::Corrupt { offset: 0, .. })
    ));
    let mut long = bytes;
    long.push(0);
    assert!(matches!(decode_checkpoint::<f64>(&long), Err(Error::Corrupt { .. })));
}

#[test]
fn trace_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    let e = EnergyBreakdown::assemble(1.0, 0.01, 0.5, 1e-9, 100.0);
    append_trace(&path, 0, 0.0, &e, (1.0, 0.9), f64::NAN).unwrap();
    append_trace(&path, 100, 0.0125, &e, (1.0, 0.9), 0.25).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], TRACE_HEADER);
    assert!(lines[2].starts_with("100,1.2500000000000001e-2,"), "{}", lines[2]);
    let rows = read_trace(&path).unwrap();
    assert_eq!(rows[1].step, 100);
    assert_eq!(rows[1].energy, e);
    assert!((rows[1].energy.total - 2.500000001).abs() < 1e-12);
    assert!(rows[0].residual.is_nan());
    assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
}

#[test]
fn color_map_endpoints() {
    assert_eq!(color(0.0, 0.0), [255, 255, 255]);
    assert_eq!(color(1.0, 0.0), U_COLOR.map(|c| c as u8));
    assert_eq!(color(0.0, 1.0), V_COLOR.map(|c| c as u8));
    assert_eq!(color(5.0, 5.0), [0, 0, 0]);
    assert_eq!(color(-1.0, 0.0), [255, 255, 255]);
}

#[test]
fn cross_section_orientation() {
    let g = GridSpec::new(&[4, 6], &[1.0, 1.0]).unwrap();
    let u = Field::from_fn(g, |x| if x[0] == 0.0 && x[1] == 0.0 { 1.0 } else { 0.0 });
    let v = Field::zeros(g);
    let img = cross_section(&u, &v, PlaneSpec::default()).unwrap();
    assert_eq!(img.dimensions(), (4, 6));
    assert_eq!(img.get_pixel(0, 5).0, color(1.0, 0.0));
    assert_eq!(img.get_pixel(0, 0).0, [255, 255, 255]);
    let s = sample_state(3);
    assert!(cross_section(
        &s.u,
        &s.v,
        PlaneSpec {
            normal_axis: 1,
            index: 6
        }
    )
    .is_err());
    assert_eq!(
        cross_section(
            &s.u,
            &s.v,
            PlaneSpec {
                normal_axis: 1,
                index: 2
            }
        )
        .unwrap()
        .dimensions(),
        (4, 4)
    );
}

#[test]
fn config_round_trip_and_defaults() {
    let mut c = RunConfig::planar_default(1.0);
    c.perturb = Some(PerturbSpec::Noise {
        amplitude: 0.01,
        seed: 3,
    });
    let back = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
    assert_eq!(back, c);
    let p = c.params().unwrap();
    assert_eq!((p.gamma, p.epsilon, p.k1, p.k2), (1500.0, 0.05, 3e4, 4800.0));
    assert!(RunConfig::from_toml("output_dir = 1").is_err());
    let text = c.to_toml().unwrap().replace("[grid]", "[grid]\nbogus = 1");
    assert!(RunConfig::from_toml(&text).is_err());
}

#[test]
fn perturbed_seed_keeps_integrals() {
    let mut c = RunConfig::planar_default(1.0);
    c.grid.counts = vec![64, 64];
    c.init = InitSpec::Radial {
        radii: [0.195f64.sqrt(), 0.5, 0.6, 0.415f64.sqrt()],
        center: None,
    };
    let plain = c.initial_state(Path::new(".")).unwrap();
    c.perturb = Some(PerturbSpec::Hole {
        center: [1.3, 1.85, 0.0],
        radius: 0.1,
    });
    let holed = c.initial_state(Path::new(".")).unwrap();
    assert_ne!(plain.u, holed.u);
    let m = |f: &Field<f64>| okpf::spectral_grid::integrate(f);
    assert!((m(&plain.u) - m(&holed.u)).abs() < 1e-12);
    assert!((m(&plain.v) - m(&holed.v)).abs() < 1e-12);
}

#[test]
fn cli_roots_and_radial() {
    let (code, text) = run_cli(&["roots", "--count", "3"]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&text, "zeta1") - 1.816_960_535_536_511).abs() < 1e-12);
    assert!(text.contains("zeta,bilayer,cylinder,sphere,c,branch,below_zeta0"));
    let (code, text) = run_cli(&["radial", "--n", "3", "--m", "1e4"]);
    assert_eq!(code, EXIT_OK);
    let e = value(&text, "E_per_m");
    let (_, series) = run_cli(&["radial", "--n", "3", "--m", "1e4", "--asymptotic"]);
    assert!((e - value(&series, "E_per_m") - 1.5777e-6).abs() < 1e-9);
    let (code, text) = run_cli(&["radial", "--n", "3", "--m", "1", "--micelle", "--gamma", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&text, "optimal_m") - 132.1124620278568).abs() < 1e-8);
    assert_eq!(run_cli(&["radial", "--n", "4", "--m", "1"]).0, EXIT_USAGE);
    assert_eq!(run_cli(&["nonsense"]).0, EXIT_USAGE);
}

#[test]
fn cli_fit_reads_point_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pts.txt");
    fs::write(&path, "# m ratio\n1 10.694\n1.6, 10.554\n2.4 10.477\n7 10.378\n").unwrap();
    assert_eq!(read_points(&path).unwrap().len(), 4);
    let (code, text) = run_cli(&["fit", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&text, "p") - 1.03).abs() < 0.05);
    fs::write(&path, "1 2 3\n").unwrap();
    assert_eq!(run_cli(&["fit", path.to_str().unwrap()]).0, EXIT_USAGE);
}

#[test]
fn cli_run_energy_render_dipole() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::planar_default(1.0);
    c.grid.counts = vec![32, 32];
    c.stepper.max_steps = 20;
    c.stepper.trace_every = 10;
    c.stepper.checkpoint_every = 10;
    c.output_dir = "out".into();
    let cfg = dir.path().join("run.toml");
    c.save(&cfg).unwrap();
    let (code, text) = run_cli(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{text}");
    let out = dir.path().join("out");
    let rows = read_trace(out.join("trace.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.step).collect::<Vec<_>>(), vec![0, 10, 20]);
    for name in [
        "checkpoint_0000000000.okpf",
        "checkpoint_0000000010.okpf",
        "checkpoint_0000000020.okpf",
        "final.okpf",
    ] {
        assert!(out.join(name).exists(), "{name}");
    }
    let fin = out.join("final.okpf");
    let (code, text) = run_cli(&["energy", fin.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&text, "E") - rows[2].energy.total).abs() < 1e-9 * rows[2].energy.total);
    let png = dir.path().join("x.png");
    assert_eq!(
        run_cli(&["render", fin.to_str().unwrap(), "--out", png.to_str().unwrap()]).0,
        EXIT_OK
    );
    assert_eq!(image::open(&png).unwrap().to_rgb8().dimensions(), (32, 32));
    let moved = dir.path().join("moved.okpf");
    assert_eq!(
        run_cli(&[
            "dipole",
            fin.to_str().unwrap(),
            "--zeta",
            "1",
            "--out",
            moved.to_str().unwrap()
        ])
        .0,
        EXIT_OK
    );
    assert!(moved.exists());
    assert_eq!(
        run_cli(&["energy", dir.path().join("missing.okpf").to_str().unwrap()]).0,
        EXIT_IO
    );
}

#[test]
fn cli_zero_steps_writes_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::planar_default(1.0);
    c.grid.counts = vec![16, 16];
    c.stepper.max_steps = 0;
    let cfg = dir.path().join("run.toml");
    c.save(&cfg).unwrap();
    let out = dir.path().join("elsewhere");
    let (code, _) = run_cli(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(read_trace(out.join("trace.csv")).unwrap().len(), 1);
    let a: RunState<f64> = read_checkpoint(out.join("final.okpf")).unwrap();
    let b: RunState<f64> = read_checkpoint(out.join("checkpoint_0000000000.okpf")).unwrap();
    assert_eq!(a.u, b.u);
}
