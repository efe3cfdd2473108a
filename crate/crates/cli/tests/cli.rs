//! Black-box tests of the `gathersim` binary: exit codes, output files, and
//! end-to-end determinism.

use std::path::Path;
use std::process::{Command, Output};

use gathersim_core::geometry::Vec2;
use gathersim_core::scenario::{save_scenario, Scenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gathersim"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn gathersim");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn gathersim").status.code().expect("exit code")
}

fn two_agent_scenario(dir: &Path, d: f64) -> std::path::PathBuf {
    let path = dir.join("two.json");
    let sc = Scenario::from_positions(vec![Vec2::new(0.0, 0.0), Vec2::new(d, 0.0)]);
    save_scenario(&sc, &path).unwrap();
    path
}

#[test]
fn gen_random_is_deterministic_and_loadable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        run_ok(bin().args(["gen", "--kind", "random", "--n", "12", "--seed", "42"])
            .arg("-o")
            .arg(p));
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert_eq!(bytes_a, std::fs::read(&b).unwrap());
    let sc = gathersim_core::scenario::load_scenario(&a).unwrap();
    assert_eq!(sc.n, 12);
    assert!(sc.initially_connected);
}

#[test]
fn gen_cone_requires_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = exit_code(
        bin().args(["gen", "--kind", "cone", "--n", "4"]).arg("-o").arg(&out),
    );
    assert_eq!(code, 2);
}

#[test]
fn run_two_agents_gathers_at_quarter_distance() {
    let dir = tempfile::tempdir().unwrap();
    let sc = two_agent_scenario(dir.path(), 40.0);
    let run_dir = dir.path().join("run");
    let out = run_ok(bin().arg("run").arg(&sc).arg("--out-dir").arg(&run_dir).arg("--verify"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("gathered t_gathered=10.0"), "{stdout}");
    assert!(stdout.contains("verification passed"), "{stdout}");

    for f in ["trajectory.csv", "metrics.csv", "events.csv", "scenario.json", "manifest.json"] {
        assert!(run_dir.join(f).exists(), "missing {f}");
    }
    let metrics = std::fs::read_to_string(run_dir.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with(
        "t,k_hull,perimeter,dLdt_est,bound_rate,cos_sum,surrounded_count,toggles_cum,connectivity_ok\n"
    ));
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let sc = two_agent_scenario(dir.path(), 25.0);
    let d1 = dir.path().join("r1");
    let d2 = dir.path().join("r2");
    for d in [&d1, &d2] {
        run_ok(bin().arg("run").arg(&sc).arg("--out-dir").arg(d));
    }
    for f in ["trajectory.csv", "metrics.csv", "events.csv"] {
        assert_eq!(
            std::fs::read(d1.join(f)).unwrap(),
            std::fs::read(d2.join(f)).unwrap(),
            "{f} differs between identical runs"
        );
    }
}

#[test]
fn run_disconnected_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let sc = two_agent_scenario(dir.path(), 500.0);
    let run_dir = dir.path().join("run");
    let code = exit_code(bin().arg("run").arg(&sc).arg("--out-dir").arg(&run_dir));
    assert_eq!(code, 1);
    let out = run_ok(
        bin().arg("run").arg(&sc).arg("--out-dir").arg(&run_dir).arg("--allow-disconnected"),
    );
    assert!(String::from_utf8(out.stdout).unwrap().contains("timed_out"));
}

#[test]
fn out_dir_env_var_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let sc = two_agent_scenario(dir.path(), 10.0);
    let env_dir = dir.path().join("from-env");
    run_ok(bin().arg("run").arg(&sc).env("GATHERSIM_OUT", &env_dir));
    assert!(env_dir.join("manifest.json").exists());
}

#[test]
fn bounds_table_shows_branch_switch() {
    let out = run_ok(bin().args(["bounds", "--k-max", "8"]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("k,c_k,mu,branch\n"));
    assert!(stdout.contains("\n2,2,8,cone\n"), "{stdout}");
    let lines: Vec<&str> = stdout.lines().collect();
    let row = |k: usize| lines.iter().find(|l| l.starts_with(&format!("{k},"))).unwrap();
    assert!(row(4).contains(",cone"));
    assert!(row(4).contains("6.999999999999999")); // mu(4) = 7 v0
    assert!(row(6).ends_with(",cone"));
    assert!(row(7).ends_with(",regular"));
    assert_eq!(exit_code(bin().args(["bounds", "--k-max", "1"])), 2);
}

#[test]
fn verify_lemma_ok_and_range_checked() {
    let out = run_ok(bin().args([
        "verify-lemma", "--n-min", "3", "--n-max", "4", "--resolution", "0.02",
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("n=3") && stdout.contains("n=4"));
    assert!(stdout.contains("ok"));
    assert!(!stdout.contains("MISMATCH"));

    assert_eq!(exit_code(bin().args(["verify-lemma", "--n-max", "9"])), 2);
}

#[test]
fn verify_lemma_warns_on_coarse_resolution() {
    let out = run_ok(bin().args([
        "verify-lemma", "--n-min", "3", "--n-max", "3", "--resolution", "0.5",
    ]));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("warning"), "{stdout}");
}

#[test]
fn plot_writes_svg_and_reports_missing_dir() {
    let dir = tempfile::tempdir().unwrap();
    let sc = two_agent_scenario(dir.path(), 30.0);
    let run_dir = dir.path().join("run");
    run_ok(bin().arg("run").arg(&sc).arg("--out-dir").arg(&run_dir));
    for series in ["perimeter", "k", "rate"] {
        run_ok(bin().arg("plot").arg(&run_dir).args(["--series", series]));
        let svg = std::fs::read_to_string(run_dir.join(format!("{series}.svg"))).unwrap();
        assert!(svg.starts_with("<svg "), "{series} is not an svg");
        assert!(svg.contains("<polyline"));
    }
    let code = exit_code(
        bin().arg("plot").arg(dir.path().join("nope")).args(["--series", "perimeter"]),
    );
    assert_eq!(code, 3);
}

#[test]
fn sweep_writes_per_seed_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.json");
    run_ok(bin().args(["gen", "--kind", "random", "--n", "6", "--seed", "1"])
        .arg("-o")
        .arg(&out));
    let sweep_dir = dir.path().join("sweep");
    run_ok(bin()
        .arg("run")
        .arg(&out)
        .args(["--sweep", "3"])
        .arg("--out-dir")
        .arg(&sweep_dir));
    for seed in 0..3 {
        assert!(sweep_dir.join(format!("seed-{seed}")).join("manifest.json").exists());
    }
}
