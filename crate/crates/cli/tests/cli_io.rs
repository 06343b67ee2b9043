//! End-to-end checks of the command surface: CSV schemas, byte-identical
//! reruns, manifest integrity, config round-trips and process exit codes.

use std::path::Path;
use std::process::Command;

use spdc_sim::dynamics::SweepAxis;
use spdc_sim::fock::SubsystemId;
use spdc_sim_cli::commands::{
    cmd_entropy, cmd_oracle_audit, cmd_plateau, cmd_self_verify, cmd_simulate, cmd_sweep,
    RangeSpec, SimulateOptions,
};
use spdc_sim_cli::config::RunConfig;
use spdc_sim_cli::output::Manifest;

fn short_config() -> RunConfig {
    RunConfig {
        t_max: 50.0,
        ..RunConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_writes_schema_and_ground_start() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config();
    let bundle = cmd_simulate(
        &cfg,
        dir.path(),
        &SimulateOptions {
            svg: true,
            probabilities: true,
        },
    )
    .unwrap();
    assert!(bundle
        .manifest
        .files
        .iter()
        .any(|f| f.name == "timeline.csv"));
    assert!(bundle
        .manifest
        .files
        .iter()
        .any(|f| f.name == "inversion.svg"));

    let csv = read(dir.path(), "timeline.csv");
    let mut lines = csv.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# manifest: tool_version="));
    assert!(comment.contains("config_sha256="));
    let header = lines.next().unwrap();
    assert!(header.starts_with("t_ns,sz_q1,sz_q2,norm_drift,p_00002,"));
    // both qubits start in the ground state for |00100⟩
    let first = lines.next().unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[1], "-1");
    assert_eq!(fields[2], "-1");
}

#[test]
fn simulate_constant_coupling_stays_in_band() {
    // constant k: inversions oscillate within [−1, ≈0]
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        omega_mod: 0.0,
        t_max: 500.0,
        ..RunConfig::default()
    };
    cmd_simulate(&cfg, dir.path(), &SimulateOptions::default()).unwrap();
    let csv = read(dir.path(), "timeline.csv");
    for line in csv.lines().skip(2) {
        let fields: Vec<&str> = line.split(',').collect();
        let sz1: f64 = fields[1].parse().unwrap();
        let sz2: f64 = fields[2].parse().unwrap();
        for sz in [sz1, sz2] {
            assert!(
                (-1.0 - 1e-9..=0.2).contains(&sz),
                "inversion {sz} out of band"
            );
        }
    }
}

#[test]
fn simulate_entangled_start_changes_the_dynamics() {
    // constant coupling, the two published initial states: the temporal
    // shape depends strongly on the start, and the entangled start splits
    // the two qubit traces by the (small) nonlinear-coupling asymmetry
    let run = |initial: &str| -> (Vec<f64>, Vec<f64>) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            initial_state: initial.to_string(),
            omega_mod: 0.0,
            ..RunConfig::default()
        };
        cmd_simulate(&cfg, dir.path(), &SimulateOptions::default()).unwrap();
        let csv = read(dir.path(), "timeline.csv");
        let mut sz1 = Vec::new();
        let mut sz2 = Vec::new();
        for line in csv.lines().skip(2) {
            let fields: Vec<&str> = line.split(',').collect();
            sz1.push(fields[1].parse().unwrap());
            sz2.push(fields[2].parse().unwrap());
        }
        (sz1, sz2)
    };
    let (pump_q1, _) = run("|00100>");
    let (ent_q1, ent_q2) = run("(|00100>+|01001>)/sqrt(2)");

    let state_gap = pump_q1
        .iter()
        .zip(&ent_q1)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(state_gap > 0.1, "initial state barely matters: {state_gap}");

    let qubit_gap = ent_q1
        .iter()
        .zip(&ent_q2)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    assert!(qubit_gap > 1e-3, "qubit traces identical: {qubit_gap}");
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = short_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_simulate(&cfg, a.path(), &SimulateOptions::default()).unwrap();
    cmd_simulate(&cfg, b.path(), &SimulateOptions::default()).unwrap();
    assert_eq!(
        std::fs::read(a.path().join("timeline.csv")).unwrap(),
        std::fs::read(b.path().join("timeline.csv")).unwrap()
    );

    let range = RangeSpec::parse("0:0.01:4").unwrap();
    cmd_sweep(&cfg, SweepAxis::Omega, &range, a.path(), false).unwrap();
    cmd_sweep(&cfg, SweepAxis::Omega, &range, b.path(), false).unwrap();
    assert_eq!(
        std::fs::read(a.path().join("sweep.csv")).unwrap(),
        std::fs::read(b.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn manifest_lists_every_file_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config();
    let bundle = cmd_simulate(
        &cfg,
        dir.path(),
        &SimulateOptions {
            svg: true,
            probabilities: false,
        },
    )
    .unwrap();
    // every emitted file is listed
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = bundle
        .manifest
        .files
        .iter()
        .map(|f| f.name.clone())
        .collect();
    listed.sort();
    assert_eq!(on_disk, listed);

    let report = cmd_self_verify(dir.path()).unwrap();
    assert_eq!(report.len(), bundle.manifest.files.len());

    // config echo parses back to an equal RunConfig
    let manifest: Manifest = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    let echoed = RunConfig::parse(&manifest.config).unwrap();
    assert_eq!(echoed, cfg);

    // tampering breaks verification
    std::fs::write(dir.path().join("timeline.csv"), b"tampered").unwrap();
    assert!(cmd_self_verify(dir.path()).is_err());
}

#[test]
fn sweep_schema_and_singleton_equivalence() {
    let cfg = short_config();
    let dir = tempfile::tempdir().unwrap();
    let range = RangeSpec::parse("0.62831853:0.62831853:1").unwrap();
    cmd_sweep(&cfg, SweepAxis::K0, &range, dir.path(), false).unwrap();
    let sweep_csv = read(dir.path(), "sweep.csv");
    let header = sweep_csv.lines().nth(1).unwrap();
    assert_eq!(header, "axis_value,t_ns,sz_q1,sz_q2");

    let sim_dir = tempfile::tempdir().unwrap();
    cmd_simulate(&cfg, sim_dir.path(), &SimulateOptions::default()).unwrap();
    let sim_csv = read(sim_dir.path(), "timeline.csv");

    // the singleton k0 sweep row-set equals the direct simulation traces
    let sweep_rows: Vec<(&str, &str, &str)> = sweep_csv
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1], f[2], f[3])
        })
        .collect();
    let sim_rows: Vec<(&str, &str, &str)> = sim_csv
        .lines()
        .skip(2)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0], f[1], f[2])
        })
        .collect();
    assert_eq!(sweep_rows, sim_rows);
}

#[test]
fn entropy_schema_and_initial_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        initial_state: "(|00100>+|01001>)/sqrt(2)".to_string(),
        t_max: 20.0,
        ..RunConfig::default()
    };
    let subsystems = [
        SubsystemId::Qubit1,
        SubsystemId::Field1,
        SubsystemId::FieldB,
        SubsystemId::Qubit2,
        SubsystemId::Field2,
    ];
    let pairs = [(SubsystemId::Qubit1, SubsystemId::Qubit2)];
    cmd_entropy(&cfg, &subsystems, &pairs, dir.path(), true).unwrap();
    let csv = read(dir.path(), "entropy.csv");
    let header = csv.lines().nth(1).unwrap();
    assert_eq!(header, "t_ns,S_q1,S_f1,S_fb,S_q2,S_f2,I_q1_q2");
    let first: Vec<f64> = csv
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    let expected = [0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0];
    for (got, want) in first.iter().zip(expected) {
        assert!((got - want).abs() <= 1e-9, "{got} vs {want}");
    }
}

#[test]
fn oracle_audit_passes_on_defaults_and_handles_j_zero() {
    let report = cmd_oracle_audit(&RunConfig::default()).unwrap();
    assert!(report.passed, "audit report:\n{}", report.render());
    assert!(report.lines.len() >= 4);

    // J = 0 refuses the closed forms and audits via the eigensolver
    let cfg = RunConfig {
        j_ratio: 0.0,
        ..RunConfig::default()
    };
    let report = cmd_oracle_audit(&cfg).unwrap();
    assert!(report.passed, "audit report:\n{}", report.render());
    assert!(report.render().contains("eigen_solve only"));
}

#[test]
fn tightened_tolerances_shrink_rk_audit_deviations() {
    // tolerances coarser than ~1e-9 would hit the RK norm-drift guard over
    // the 500 ns audit horizon
    let base = RunConfig {
        rel_tol: 1e-9,
        abs_tol: 1e-11,
        ..RunConfig::default()
    };
    let tight = RunConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        ..RunConfig::default()
    };
    let dev_of = |cfg: &RunConfig| -> f64 {
        let report = cmd_oracle_audit(cfg).unwrap();
        // second line is the adaptive-rk comparison
        let line = &report.lines[1];
        assert!(line.contains("adaptive-rk"), "unexpected line {line}");
        let start = line.find("= ").unwrap() + 2;
        let end = line[start..].find(' ').unwrap() + start;
        line[start..end].parse().unwrap()
    };
    let coarse = dev_of(&base);
    let fine = dev_of(&tight);
    assert!(
        fine < coarse,
        "tightening tolerances did not help: {fine:.3e} vs {coarse:.3e}"
    );
}

#[test]
fn plateau_table_is_csv_compatible() {
    let (table, rows) = cmd_plateau(0.0044444, 0.1, 3).unwrap();
    assert_eq!(rows.len(), 3);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "Omega,cycle,t_enter_ns,t_zero_ns,t_exit_ns");
    assert_eq!(lines.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.cycle as usize, i);
        let fields: Vec<&str> = lines[i + 1].split(',').collect();
        assert_eq!(fields.len(), 5);
        let t_zero: f64 = fields[3].parse().unwrap();
        assert_eq!(t_zero, row.t_zero);
    }
}

// process-level exit codes

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spdc-sim"))
}

#[test]
fn exit_codes_follow_the_contract() {
    // validation failure: unknown sweep axis
    let out = binary()
        .args([
            "sweep",
            "--axis",
            "nope",
            "--range",
            "0:1:2",
            "--out",
            "/tmp/unused",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // validation failure: plateau with zero modulation
    let out = binary().args(["plateau", "--omega", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("constant"));

    // success path: plateau prints the table
    let out = binary()
        .args([
            "plateau",
            "--omega",
            "0.0044444",
            "--fraction",
            "0.1",
            "--cycles",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("Omega,cycle,t_enter_ns"));
    assert!(stdout.lines().count() == 2);
}

#[test]
fn binary_simulate_and_self_verify() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, "t_max = 20\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = binary()
        .args([
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = binary()
        .args(["self-verify", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    std::fs::remove_file(out_dir.join("timeline.csv")).unwrap();
    let out = binary()
        .args(["self-verify", "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
