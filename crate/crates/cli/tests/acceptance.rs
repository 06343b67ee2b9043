//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria carry runtime budgets, so the suite serializes itself through a
//! global lock: every criterion gets the whole machine.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use num_complex::Complex64 as C64;

use spdc_sim::dynamics::{evolve, sigma_z_expect, Method, SweepAxis};
use spdc_sim::fock::{SectorSpace, StateVector, SubsystemId};
use spdc_sim::hamiltonian::{assemble_h, excitation_operator, CouplingSchedule, SystemParams};
use spdc_sim::oracle::{closed_form_probs, quadrature_laplace_check, FourAmplitudes};
use spdc_sim::quantify::{density, mutual_information, reduced_density, renyi_entropy, vn_entropy};
use spdc_sim_cli::commands::{cmd_plateau, cmd_sweep, RangeSpec};
use spdc_sim_cli::config::RunConfig;

static GATE: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn report(criterion: u32, name: &str, pass: bool, detail: &str, started: Instant) {
    let elapsed = started.elapsed();
    println!(
        "criterion {criterion:2} [{name}]: {} ({detail}; {elapsed:.2?})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// The published Ω column rounds its first two entries (0.0022222 → 0.002222,
/// 0.0044444 → 0.004444); the twelve published times reproduce within ±0.1 ns
/// only under the unrounded settings, so those are what the reproduction runs.
const TABLE_OMEGAS: [f64; 4] = [0.0022222, 0.0044444, 0.006667, 0.008889];
const TABLE_TIMES: [[f64; 3]; 4] = [
    [1917.7, 2120.6, 2323.5],
    [958.8, 1060.3, 1161.8],
    [639.1, 706.8, 774.5],
    [479.3, 530.1, 580.9],
];

#[test]
fn criterion_01_table_reproduction() {
    let _guard = serial();
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for (omega, published) in TABLE_OMEGAS.iter().zip(TABLE_TIMES) {
        let (_, rows) = cmd_plateau(*omega, 0.1, 1).unwrap();
        let w = rows[0];
        for (got, want) in [w.t_enter, w.t_zero, w.t_exit].iter().zip(published) {
            worst = worst.max((got - want).abs());
        }
    }
    let pass = worst <= 0.1 && started.elapsed().as_secs_f64() < 1.0;
    report(
        1,
        "Table 1 reproduction",
        pass,
        &format!("max |Δt| = {worst:.4} ns ≤ 0.1 ns over 12 published times"),
        started,
    );
}

#[test]
fn criterion_02_closed_form_agreement() {
    let _guard = serial();
    let started = Instant::now();
    let lambda = 0.1 * 62.831853;
    let hop_j = 0.31415927;
    let space = std::sync::Arc::new(SectorSpace::build_sector(1, 0, 1).unwrap());
    let psi0 = StateVector::basis_state(
        std::sync::Arc::clone(&space),
        &spdc_sim::fock::OccupationLabel::new(1, 0, 0, 0, 0),
    )
    .unwrap();
    let params = SystemParams::resonant(62.831853, lambda, hop_j);
    let sched = CouplingSchedule::Constant { k0: 0.0 };

    let mut detail = String::new();
    let mut pass = true;
    for method in [Method::UnitaryMidpoint, Method::AdaptiveRk] {
        let mut cfg = spdc_sim::dynamics::IntegratorConfig::uniform(500.0, 1.0);
        cfg.method = method;
        let timeline = evolve(&space, &params, &sched, &psi0, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for (state, &t) in timeline.states.iter().zip(&timeline.times) {
            let p = state.probabilities();
            let probs = [p[3], p[2], p[1], p[0]]; // lexicographic → (q1, f1, q2, f2)
            let reference = closed_form_probs(t, hop_j, lambda).unwrap();
            for (a, b) in probs.iter().zip(reference) {
                worst = worst.max((a - b).abs());
            }
        }
        pass &= worst <= 1e-6;
        detail.push_str(&format!("{method:?}: max |Δp| = {worst:.3e}; "));
    }
    pass &= started.elapsed().as_secs_f64() < 5.0;
    report(
        2,
        "closed-form agreement",
        pass,
        &format!("{}tol 1e-6", detail),
        started,
    );
}

#[test]
fn criterion_03_oracle_triangle() {
    let _guard = serial();
    let started = Instant::now();
    let lambda = 0.1 * 62.831853;
    let hop_j = 0.31415927;

    let oracle = spdc_sim::oracle::SingleExcitationPropagator::new(
        hop_j,
        lambda,
        &FourAmplitudes::qubit_one(),
    )
    .unwrap();
    let mut closed_vs_eigen: f64 = 0.0;
    for i in 0..=500 {
        let t = i as f64;
        let reference = closed_form_probs(t, hop_j, lambda).unwrap();
        for (a, b) in oracle.at(t).probabilities().iter().zip(reference) {
            closed_vs_eigen = closed_vs_eigen.max((a - b).abs());
        }
    }

    let s_list = [C64::new(1.0, 0.0), C64::new(0.5, 2.0), C64::new(2.0, -1.0)];
    let laplace_dev =
        quadrature_laplace_check(hop_j, lambda, &FourAmplitudes::qubit_one(), &s_list, 60.0)
            .unwrap();

    let pass =
        closed_vs_eigen <= 1e-9 && laplace_dev <= 1e-4 && started.elapsed().as_secs_f64() < 10.0;
    report(
        3,
        "oracle triangle",
        pass,
        &format!(
            "closed vs eigen {closed_vs_eigen:.3e} ≤ 1e-9; quadrature vs images \
             {laplace_dev:.3e} ≤ 1e-4 (sign convention: printed images are the \
             negated transform)"
        ),
        started,
    );
}

#[test]
fn criterion_04_conservation_suite() {
    let _guard = serial();
    let started = Instant::now();
    let cfg = RunConfig::default();
    let (space, psi0) = cfg.space_and_state().unwrap();

    // harmonic default run
    let timeline = evolve(
        &space,
        &cfg.params(),
        &cfg.schedule(),
        &psi0,
        &cfg.integrator(),
    )
    .unwrap();
    let norm_drift = timeline.max_norm_drift();
    let n_op = excitation_operator(&space);
    let mut n_drift: f64 = 0.0;
    for state in &timeline.states {
        let n = n_op.expectation(state.amplitudes());
        n_drift = n_drift.max((n.re - 2.0).abs()).max(n.im.abs());
    }

    // constant-k run: ⟨H⟩ conservation
    let constant = CouplingSchedule::Constant { k0: cfg.k0() };
    let timeline_const =
        evolve(&space, &cfg.params(), &constant, &psi0, &cfg.integrator()).unwrap();
    let h = assemble_h(&space, &cfg.params(), cfg.k0()).unwrap();
    let e0 = h.expectation(timeline_const.states[0].amplitudes()).re;
    let mut h_drift: f64 = 0.0;
    for state in &timeline_const.states {
        let e = h.expectation(state.amplitudes()).re;
        h_drift = h_drift.max((e - e0).abs() / e0.abs());
    }

    let pass = norm_drift <= 1e-9
        && n_drift <= 1e-10
        && h_drift <= 1e-8
        && started.elapsed().as_secs_f64() < 10.0;
    report(
        4,
        "conservation suite",
        pass,
        &format!(
            "norm drift {norm_drift:.3e} ≤ 1e-9; ⟨N⟩ drift {n_drift:.3e} ≤ 1e-10; \
             constant-k ⟨H⟩ rel drift {h_drift:.3e} ≤ 1e-8"
        ),
        started,
    );
}

#[test]
fn criterion_05_hamiltonian_certificates() {
    let _guard = serial();
    let started = Instant::now();
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    let full = SectorSpace::full_space(2, 1);
    let n_op = excitation_operator(&full);
    let mut worst_herm: f64 = 0.0;
    let mut worst_comm: f64 = 0.0;
    for _ in 0..100 {
        let omega: f64 = rng.random_range(10.0..100.0);
        let lambda: f64 = rng.random_range(0.0..0.2) * omega;
        let hop: f64 = rng.random_range(0.0..1.0) * lambda;
        let delta: f64 = rng.random_range(-0.2..0.2) * lambda.max(1.0);
        let k: f64 = rng.random_range(0.0..0.05) * omega;
        let params = SystemParams::resonant(omega, lambda, hop).with_detuning(delta);
        let h = assemble_h(&full, &params, k).unwrap();
        worst_herm = worst_herm.max(h.hermiticity_defect());
        worst_comm = worst_comm.max(h.commutator_max(&n_op));
    }
    let pass = worst_herm <= 1e-13 && worst_comm <= 1e-12 && started.elapsed().as_secs_f64() < 5.0;
    report(
        5,
        "Hamiltonian certificates",
        pass,
        &format!(
            "100 draws on the full 72-state space: max |H−H†| = {worst_herm:.1e} ≤ 1e-13, \
             max ‖[H,N]‖ = {worst_comm:.1e} ≤ 1e-12"
        ),
        started,
    );
}

#[test]
fn criterion_06_entropy_identities() {
    let _guard = serial();
    let started = Instant::now();
    let mut worst_total: f64 = 0.0;
    let mut worst_complement: f64 = 0.0;
    let mut worst_bipartition: f64 = 0.0;
    let mut worst_renyi: f64 = 0.0;
    let mut min_mi: f64 = f64::INFINITY;

    for initial in ["|00100>", "(|00100>+|01001>)/sqrt(2)"] {
        let cfg = RunConfig {
            initial_state: initial.to_string(),
            ..RunConfig::default()
        };
        let (space, psi0) = cfg.space_and_state().unwrap();
        let timeline = evolve(
            &space,
            &cfg.params(),
            &cfg.schedule(),
            &psi0,
            &cfg.integrator(),
        )
        .unwrap();

        // every 10th sample
        for state in timeline.states.iter().step_by(10) {
            let s_total = vn_entropy(&density(state)).unwrap();
            worst_total = worst_total.max(s_total);

            for m in SubsystemId::ALL {
                let complement: Vec<SubsystemId> =
                    SubsystemId::ALL.into_iter().filter(|s| *s != m).collect();
                let rho_m = reduced_density(state, &[m]).unwrap();
                let s_m = vn_entropy(&rho_m).unwrap();
                let s_c = vn_entropy(&reduced_density(state, &complement).unwrap()).unwrap();
                worst_complement = worst_complement.max((s_m - s_c).abs());
                // I(m : complement) = S_m + S_c − S_total = 2·S_m for pure ψ
                let info = s_m + s_c - s_total;
                worst_bipartition = worst_bipartition.max((info - 2.0 * s_m).abs());
                // Rényi α → 1 convergence on the marginal
                for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
                    let r = renyi_entropy(&rho_m, alpha).unwrap();
                    worst_renyi = worst_renyi.max((r - s_m).abs());
                }
            }
            for (i, &m) in SubsystemId::ALL.iter().enumerate() {
                for &n in &SubsystemId::ALL[i + 1..] {
                    // errors below −1e-9 would surface as NegativeMutualInformation
                    let info = mutual_information(state, m, n).unwrap();
                    min_mi = min_mi.min(info);
                }
            }
        }
    }
    let pass = worst_total <= 1e-10
        && worst_complement <= 1e-9
        && min_mi >= -1e-9
        && worst_bipartition <= 1e-8
        && worst_renyi <= 1e-3
        && started.elapsed().as_secs_f64() < 30.0;
    report(
        6,
        "entropy identities",
        pass,
        &format!(
            "S(total) ≤ {worst_total:.1e}; complementarity ≤ {worst_complement:.1e}; \
             min I = {min_mi:.1e}; |I(m:rest) − 2S| ≤ {worst_bipartition:.1e}; \
             Rényi α→1 ≤ {worst_renyi:.1e}"
        ),
        started,
    );
}

#[test]
fn criterion_07_initial_entanglement_structure() {
    let _guard = serial();
    let started = Instant::now();
    let cfg = RunConfig {
        initial_state: "(|00100>+|01001>)/sqrt(2)".to_string(),
        ..RunConfig::default()
    };
    let (_, state) = cfg.space_and_state().unwrap();

    let mut worst: f64 = 0.0;
    let expected = [
        (SubsystemId::Qubit1, 0.0),
        (SubsystemId::Qubit2, 0.0),
        (SubsystemId::Field1, 1.0),
        (SubsystemId::FieldB, 1.0),
        (SubsystemId::Field2, 1.0),
    ];
    let mut detail = String::new();
    for (sub, want) in expected {
        let s = vn_entropy(&reduced_density(&state, &[sub]).unwrap()).unwrap();
        worst = worst.max((s - want).abs());
        detail.push_str(&format!("S({sub})={s:.3} "));
    }
    let i_fields = mutual_information(&state, SubsystemId::Field1, SubsystemId::Field2).unwrap();
    let i_qubits = mutual_information(&state, SubsystemId::Qubit1, SubsystemId::Qubit2).unwrap();
    worst = worst.max((i_fields - 1.0).abs()).max(i_qubits.abs());

    let pass = worst <= 1e-9 && started.elapsed().as_secs_f64() < 1.0;
    report(
        7,
        "t=0 entanglement structure",
        pass,
        &format!(
            "{detail}I(f1:f2)={i_fields:.3} I(q1:q2)={i_qubits:.1e}; max dev {worst:.2e} ≤ 1e-9"
        ),
        started,
    );
}

#[test]
fn criterion_08_detuning_symmetry() {
    let _guard = serial();
    let started = Instant::now();
    let cfg = RunConfig {
        omega_mod: 0.0,
        ..RunConfig::default()
    };
    let (space, psi0) = cfg.space_and_state().unwrap();
    let delta = 0.1 * cfg.lambda();
    let sched = CouplingSchedule::Constant { k0: cfg.k0() };

    let result = spdc_sim::dynamics::sweep(
        &space,
        &cfg.params(),
        &sched,
        &psi0,
        &cfg.integrator(),
        SweepAxis::Delta,
        &[delta, -delta],
    );
    let plus = result.points[0].trace.as_ref().unwrap();
    let minus = result.points[1].trace.as_ref().unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..result.sample_times.len() {
        worst = worst.max((plus.sz_q1[i] - minus.sz_q1[i]).abs());
        worst = worst.max((plus.sz_q2[i] - minus.sz_q2[i]).abs());
    }
    // measured at 2.0e-12 on the first verified run: the symmetry holds to
    // integrator precision for this initial state, so the plot-resolution
    // gate (1e-3) is kept alongside a tightened regression bound
    let pass = worst <= 1e-9 && started.elapsed().as_secs_f64() < 10.0;
    report(
        8,
        "detuning symmetry",
        pass,
        &format!(
            "max |⟨σz⟩(+Δ) − ⟨σz⟩(−Δ)| = {worst:.3e} over 2000 ns \
             (gate 1e-3, tightened to 1e-9 after first verified run)"
        ),
        started,
    );
}

#[test]
fn criterion_09_preservation_plateau() {
    let _guard = serial();
    let started = Instant::now();
    let cfg = RunConfig::default();
    let (space, psi0) = cfg.space_and_state().unwrap();
    let timeline = evolve(
        &space,
        &cfg.params(),
        &cfg.schedule(),
        &psi0,
        &cfg.integrator(),
    )
    .unwrap();
    let sz1: Vec<f64> = timeline
        .states
        .iter()
        .map(|s| sigma_z_expect(s, SubsystemId::Qubit1))
        .collect();

    let sample_std = |xs: &[f64]| -> f64 {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    // 1 ns grid: indices are times
    let plateau = sample_std(&sz1[980..=1140]);
    let active = sample_std(&sz1[300..=460]);
    let ratio = active / plateau;

    // regression golden frozen from the first verified run
    const FROZEN_RATIO: f64 = 56.191373516;
    let pass = ratio >= 3.0
        && (ratio - FROZEN_RATIO).abs() / FROZEN_RATIO <= 1e-3
        && started.elapsed().as_secs_f64() < 10.0;
    report(
        9,
        "preservation plateau",
        pass,
        &format!(
            "std[300,460] / std[980,1140] = {ratio:.6} (≥ 3 required, \
             golden {FROZEN_RATIO} ± 0.1%)"
        ),
        started,
    );
}

#[test]
fn criterion_10_sweep_determinism() {
    let _guard = serial();
    let started = Instant::now();
    let cfg = RunConfig::default();
    let range = RangeSpec::parse("0:0.01:46").unwrap();

    let run = |dir: &std::path::Path| -> (Vec<u8>, f64) {
        let t0 = Instant::now();
        cmd_sweep(&cfg, SweepAxis::Omega, &range, dir, false).unwrap();
        let bytes = std::fs::read(dir.join("sweep.csv")).unwrap();
        (bytes, t0.elapsed().as_secs_f64())
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let (bytes_a, secs_a) = run(dir_a.path());
    let (bytes_b, secs_b) = run(dir_b.path());

    let identical = bytes_a == bytes_b;
    let pass = identical && secs_a < 60.0 && secs_b < 60.0;
    report(
        10,
        "sweep determinism",
        pass,
        &format!(
            "two 46-point Ω sweeps byte-identical: {identical} \
             ({} bytes; {secs_a:.1}/{secs_b:.1} s per run, budget 60 s)",
            bytes_a.len()
        ),
        started,
    );
}
