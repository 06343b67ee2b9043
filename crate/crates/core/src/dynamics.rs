//! Trajectory integration, qubit observables and parameter sweeps.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::fock::{FockError, SectorSpace, StateVector, SubsystemId};
use crate::hamiltonian::{split_h, CouplingSchedule, HamiltonianError, SystemParams};
use crate::integrate::{propagate_dopri5, propagate_unitary, IntegrateError, LinearGenerator};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("sample grid must start at 0 and increase strictly")]
    BadSampleGrid,
    #[error("tolerances and max_step must be positive and finite")]
    BadTolerances,
    #[error("initial state lives on a different space than the requested evolution")]
    SpaceMismatch,
}

/// Propagation engine selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Unitary adaptive exponential-midpoint stepping; conserves the norm and
    /// every sector-constant observable to rounding. Default.
    #[default]
    UnitaryMidpoint,
    /// Embedded adaptive Dormand–Prince 5(4) with dense output.
    AdaptiveRk,
}

/// Integration controls and output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the internal step, ns.
    pub max_step: f64,
    /// Strictly increasing, starting at 0.
    pub sample_times: Vec<f64>,
    pub method: Method,
}

impl IntegratorConfig {
    /// Uniform grid 0, dt, 2dt, … covering [0, t_max].
    pub fn uniform(t_max: f64, dt_out: f64) -> Self {
        let n = (t_max / dt_out).round() as usize;
        Self {
            sample_times: (0..=n).map(|i| i as f64 * dt_out).collect(),
            ..Self::default()
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let tol_ok = |v: f64| v.is_finite() && v > 0.0;
        if !tol_ok(self.rel_tol)
            || !tol_ok(self.abs_tol)
            || self.max_step <= 0.0
            || self.max_step.is_nan()
        {
            return Err(DynamicsError::BadTolerances);
        }
        if self.sample_times.is_empty()
            || self.sample_times[0] != 0.0
            || self.sample_times.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(DynamicsError::BadSampleGrid);
        }
        Ok(())
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 10.0,
            sample_times: vec![0.0],
            method: Method::default(),
        }
    }
}

/// Sampled trajectory: one state per requested time plus the per-sample norm
/// deviation |‖ψ‖ − 1| (reported, never corrected).
#[derive(Debug, Clone)]
pub struct Timeline {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub norm_drift: Vec<f64>,
}

impl Timeline {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().cloned().fold(0.0, f64::max)
    }
}

/// Integrate i∂ψ/∂t = H(t)ψ from `psi0` over the configured sample grid.
///
/// Deterministic given identical inputs; the t = 0 sample is `psi0` itself.
pub fn evolve(
    space: &Arc<SectorSpace>,
    params: &SystemParams,
    sched: &CouplingSchedule,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
) -> Result<Timeline, DynamicsError> {
    cfg.validate()?;
    sched.validate()?;
    if !Arc::ptr_eq(psi0.space(), space) && psi0.space().as_ref() != space.as_ref() {
        return Err(DynamicsError::SpaceMismatch);
    }
    let parts = split_h(space, params)?;
    let generator = LinearGenerator::new(
        space.dim(),
        parts.base.to_flat(),
        parts.nonlinear.to_flat(),
        sched,
    );

    let n = cfg.sample_times.len();
    let mut states: Vec<Vec<C64>> = vec![Vec::new(); n];
    match cfg.method {
        Method::UnitaryMidpoint => propagate_unitary(
            &generator,
            psi0.amplitudes(),
            &cfg.sample_times,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_step,
            |i, psi| states[i] = psi.to_vec(),
        )?,
        Method::AdaptiveRk => propagate_dopri5(
            &generator,
            psi0.amplitudes(),
            &cfg.sample_times,
            cfg.rel_tol,
            cfg.abs_tol,
            cfg.max_step,
            |i, psi| states[i] = psi.to_vec(),
        )?,
    };

    let mut timeline = Timeline {
        times: cfg.sample_times.clone(),
        states: Vec::with_capacity(n),
        norm_drift: Vec::with_capacity(n),
    };
    for amps in states {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        timeline.norm_drift.push((norm - 1.0).abs());
        timeline.states.push(StateVector::from_trajectory_sample(
            Arc::clone(space),
            amps,
        )?);
    }
    Ok(timeline)
}

/// ⟨ψ|σz⁽ⁱ⁾|ψ⟩ ∈ [−1, 1]. σz is diagonal in the occupation basis, so the
/// expectation is a real sum over probabilities; the imaginary residue is
/// identically zero by construction.
///
/// Panics if `which` does not name a qubit.
pub fn sigma_z_expect(state: &StateVector, which: SubsystemId) -> f64 {
    assert!(which.is_qubit(), "σz expectation requested for {which}");
    let space = state.space();
    state
        .amplitudes()
        .iter()
        .zip(space.labels())
        .map(|(amp, label)| {
            let sz = if label.occupation(which) == 1 {
                1.0
            } else {
                -1.0
            };
            amp.norm_sqr() * sz
        })
        .sum()
}

/// Sweep axis: which parameter the values replace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Base nonlinear coupling k₀, rad/ns.
    K0,
    /// Detuning Δ = ω_a − ω_c, rad/ns.
    Delta,
    /// Modulation frequency Ω, 1/ns.
    Omega,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::K0 => "k0",
            SweepAxis::Delta => "delta",
            SweepAxis::Omega => "Omega",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "k0" => Some(SweepAxis::K0),
            "delta" => Some(SweepAxis::Delta),
            "Omega" | "omega" => Some(SweepAxis::Omega),
            _ => None,
        }
    }
}

/// Qubit inversion traces of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionTrace {
    pub sz_q1: Vec<f64>,
    pub sz_q2: Vec<f64>,
}

/// One grid point of a sweep; failures carry the axis value and leave the
/// rest of the grid intact.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub trace: Result<InversionTrace, DynamicsError>,
}

/// Rectangular sweep output: every point shares `sample_times`.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub sample_times: Vec<f64>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn first_failure(&self) -> Option<(f64, &DynamicsError)> {
        self.points
            .iter()
            .find_map(|p| p.trace.as_ref().err().map(|e| (p.value, e)))
    }
}

/// Evolve one trajectory per axis value, in parallel, preserving input order.
pub fn sweep(
    space: &Arc<SectorSpace>,
    base_params: &SystemParams,
    sched: &CouplingSchedule,
    psi0: &StateVector,
    cfg: &IntegratorConfig,
    axis: SweepAxis,
    values: &[f64],
) -> SweepResult {
    let points: Vec<SweepPoint> = values
        .par_iter()
        .map(|&value| {
            let (params, schedule) = apply_axis(base_params, sched, axis, value);
            let trace =
                evolve(space, &params, &schedule, psi0, cfg).map(|timeline| InversionTrace {
                    sz_q1: timeline
                        .states
                        .iter()
                        .map(|s| sigma_z_expect(s, SubsystemId::Qubit1))
                        .collect(),
                    sz_q2: timeline
                        .states
                        .iter()
                        .map(|s| sigma_z_expect(s, SubsystemId::Qubit2))
                        .collect(),
                });
            SweepPoint { value, trace }
        })
        .collect();
    SweepResult {
        axis,
        sample_times: cfg.sample_times.clone(),
        points,
    }
}

fn apply_axis(
    params: &SystemParams,
    sched: &CouplingSchedule,
    axis: SweepAxis,
    value: f64,
) -> (SystemParams, CouplingSchedule) {
    match axis {
        SweepAxis::K0 => {
            let schedule = match *sched {
                CouplingSchedule::Constant { .. } => CouplingSchedule::Constant { k0: value },
                CouplingSchedule::Harmonic { omega_mod, .. } => CouplingSchedule::Harmonic {
                    k0: value,
                    omega_mod,
                },
            };
            (*params, schedule)
        }
        SweepAxis::Delta => (params.with_detuning(value), *sched),
        SweepAxis::Omega => (
            *params,
            CouplingSchedule::Harmonic {
                k0: sched.k0(),
                omega_mod: value,
            },
        ),
    }
}
