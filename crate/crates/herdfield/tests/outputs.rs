use std::fs;
use std::path::Path;
use std::process::Command as Process;

use herdfield::io::{self, FigureBundle, StoredEquilibrium, FIGURE_FILES};
use herdfield::{parallel, run, Command, RunConfig};
use herdfield_core::sweep::{alpha_sweep, classify_alpha, Classification, SweepSetup};
use herdfield_core::trajectory::simulate;
use herdfield_core::{solve_mfe, Grid, ModelParams, SolveOptions, TypeMeanField};

fn config(dir: &Path, pairs: &[(&str, &str)]) -> RunConfig {
    let mut c = RunConfig::default();
    c.apply_flags(pairs.iter().copied()).unwrap();
    c.out_dir = dir.to_owned();
    c
}

fn small_setup() -> SweepSetup {
    let mut s = SweepSetup::new(Default::default(), Grid::new(101).unwrap());
    s.horizon = 300;
    s
}

#[test]
fn equilibrium_json_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = ModelParams::new(0.1, 0.3, 0.37, 0.9).unwrap();
    let sol = solve_mfe(&p, Grid::new(201).unwrap(), &SolveOptions::default()).unwrap();
    let stored = StoredEquilibrium::from(&sol);
    let text = io::equilibrium_json(&stored);
    let path = dir.path().join("eq.json");
    io::write_text(&path, &text).unwrap();
    let back = io::read_equilibrium(&path).unwrap();
    assert_eq!(back, stored);
    assert_eq!(io::equilibrium_json(&back), text);
}

#[test]
fn every_csv_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        dir.path(),
        &[
            ("alpha", "0.6"),
            ("grid", "101"),
            ("population", "200"),
            ("seeds", "3,4"),
            ("horizon", "40"),
        ],
    );
    run(Command::Solve, &c).unwrap();
    let mut sim = c.clone();
    sim.equilibrium = Some(dir.path().join(io::EQUILIBRIUM_FILE));
    run(Command::Simulate, &sim).unwrap();

    let eq = io::read_equilibrium(&dir.path().join(io::EQUILIBRIUM_FILE)).unwrap();
    let traj = simulate(TypeMeanField::new(0.5).unwrap(), &eq.theta, &eq.params, 40);
    assert_eq!(
        io::read_trajectory(&dir.path().join(io::TRAJECTORY_FILE)).unwrap(),
        io::trajectory_rows(&traj)
    );

    let emp = io::read_empirical(&dir.path().join(io::EMPIRICAL_FILE)).unwrap();
    assert_eq!(emp.len(), 2 * 41);
    assert_eq!((emp[0].seed, emp[41].seed, emp[0].population), (3, 4, 200));
    assert_eq!(emp[0].z1_hat, 0.5);

    let report = io::read_solve_report(&dir.path().join(io::SOLVE_REPORT_FILE)).unwrap();
    let again = solve_mfe(
        &eq.params,
        Grid::new(101).unwrap(),
        &SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(report, again.report);

    let herding = io::read_herding(&dir.path().join(io::HERDING_FILE)).unwrap();
    assert!(!herding.herded);

    let mut fig = c.clone();
    fig.equilibrium = sim.equilibrium.clone();
    run(Command::Figures, &fig).unwrap();
    let bundle = FigureBundle::read(dir.path()).unwrap();
    assert_eq!(bundle, FigureBundle::new(&eq.theta, &eq.values, &eq.params));

    let mut sweep = config(
        dir.path(),
        &[
            ("grid", "51"),
            ("alpha_start", "0.1"),
            ("alpha_stop", "0.9"),
            ("alpha_step", "0.4"),
        ],
    );
    sweep.probes = vec![0.05, 0.5];
    run(Command::Sweep, &sweep).unwrap();
    let rows = io::read_phase(&dir.path().join(io::PHASE_FILE)).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].probes.len(), 2);
    assert_eq!(rows[0].probes[0].0, 0.05);
    assert_eq!(rows[2].classification, Classification::HerdNever);
    assert!(rows[2].probes.iter().all(|(_, a)| a.is_none()));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn run_everything(dir: &Path) {
    let c = config(
        dir,
        &[
            ("alpha", "0.3"),
            ("grid", "101"),
            ("population", "500"),
            ("seeds", "1,2,3"),
            ("horizon", "60"),
        ],
    );
    run(Command::Solve, &c).unwrap();
    run(Command::Simulate, &c).unwrap();
    let mut f = c.clone();
    f.equilibrium = Some(dir.join(io::EQUILIBRIUM_FILE));
    run(Command::Figures, &f).unwrap();
    let s = config(
        dir,
        &[("grid", "51"), ("alpha_step", "0.25"), ("horizon", "200")],
    );
    run(Command::Sweep, &s).unwrap();
    let t = config(
        dir,
        &[
            ("grid", "51"),
            ("predicate", "herd-never"),
            ("lo", "0.3"),
            ("hi", "1"),
            ("threshold_tol", "0.05"),
        ],
    );
    run(Command::Threshold, &t).unwrap();
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_everything(a.path());
    run_everything(b.path());
    let fa = read_all(a.path());
    let fb = read_all(b.path());
    assert_eq!(fa.len(), 7 + FIGURE_FILES.len());
    assert_eq!(fa, fb);
}

#[test]
fn thread_count_does_not_change_results() {
    let setup = small_setup();
    let alphas = [0.0, 0.3, 0.6, 0.9];
    let one = parallel::alpha_sweep(&parallel::pool(1), &alphas, &setup);
    let four = parallel::alpha_sweep(&parallel::pool(4), &alphas, &setup);
    assert_eq!(one, four);
    assert_eq!(one, alpha_sweep(&alphas, &setup));
}

#[test]
fn sweep_edge_cases() {
    let setup = small_setup();
    assert!(alpha_sweep(&[], &setup).is_empty());
    assert_eq!(
        alpha_sweep(&[0.3], &setup),
        vec![classify_alpha(0.3, &setup)]
    );
    let forward = alpha_sweep(&[0.1, 0.5, 0.9], &setup);
    let mut backward = alpha_sweep(&[0.9, 0.5, 0.1], &setup);
    backward.reverse();
    assert_eq!(forward, backward);
}

#[test]
fn figures_follow_the_prescription() {
    let grid = Grid::new(101).unwrap();
    let p = ModelParams::new(0.1, 0.3, 0.9, 0.9).unwrap();
    let sol = solve_mfe(&p, grid, &SolveOptions::default()).unwrap();
    let b = FigureBundle::new(&sol.theta, &sol.values, &p);
    for (z, g) in b.z1.iter().zip(&b.action_share) {
        assert!((z - g).abs() < 1e-15);
    }
    assert!(b.theta_minus.iter().all(|&g| g == 0.0));
    assert!(b.theta_plus.iter().all(|&g| g == 1.0));

    let p = ModelParams::new(0.1, 0.3, 0.1, 0.9).unwrap();
    let sol = solve_mfe(&p, grid, &SolveOptions::default()).unwrap();
    let b = FigureBundle::new(&sol.theta, &sol.values, &p);
    for i in 0..=50 {
        assert_eq!(
            (b.theta_minus[i], b.theta_plus[i], b.action_share[i]),
            (0.0, 0.0, 0.0)
        );
        // herding on -1: phi(z) = 0.1 + 0.6 z
        assert!((b.phi[i] - (0.1 + 0.6 * b.z1[i])).abs() < 1e-15);
    }
    for curve in [&b.theta_minus, &b.theta_plus, &b.action_share, &b.phi] {
        assert!(curve.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}

fn binary() -> Process {
    Process::new(env!("CARGO_BIN_EXE_herdfield"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let st = binary().args(["solve", "--out_dir", out]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("alpha"));

    let st = binary()
        .args(["solve", "--alpha", "0.1", "--p2", "0.7", "--out_dir", out])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("p2"));

    let st = binary()
        .args([
            "solve",
            "--alpha",
            "0.1",
            "--grid",
            "21",
            "--max_iter",
            "2",
            "--out_dir",
            out,
        ])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(3));
    // the unfinished tables are still written for inspection
    assert!(dir.path().join(io::SOLVE_REPORT_FILE).exists());

    let missing = dir.path().join("missing.json");
    let st = binary()
        .args([
            "figures",
            "--equilibrium",
            missing.to_str().unwrap(),
            "--out_dir",
            out,
        ])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&st.stderr).contains("missing.json"));

    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"alpha": 0.2, "grid": 41}"#).unwrap();
    let st = binary()
        .args([
            "solve",
            "--config",
            cfg.to_str().unwrap(),
            "--alpha",
            "0.9",
            "--out_dir",
            out,
        ])
        .output()
        .unwrap();
    assert_eq!(
        st.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let eq = io::read_equilibrium(&dir.path().join(io::EQUILIBRIUM_FILE)).unwrap();
    assert_eq!(eq.params.alpha(), 0.9);
    assert_eq!(eq.theta.grid().n_points(), 41);

    let st = binary()
        .env(parallel::THREADS_ENV, "lots")
        .args(["sweep", "--grid", "11", "--out_dir", out])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
}
