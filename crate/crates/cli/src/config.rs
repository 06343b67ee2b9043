//! Run configuration: a flat key = value text format with typed fields,
//! unknown keys rejected, and a canonical rendering that round-trips.
//!
//! Couplings are given as ratios of the base frequency so a configuration
//! reads the way the physics is usually quoted (λ/ω, J/λ, k₀/ω, Δ/λ).

use std::fmt::Write as _;
use std::sync::Arc;

use spdc_sim::dynamics::{IntegratorConfig, Method};
use spdc_sim::fock::{SectorSpace, StateVector};
use spdc_sim::hamiltonian::{CouplingSchedule, SystemParams};
use spdc_sim::ket::parse_state_expr;

use crate::error::CliError;

/// Fully deterministic run description; no seeds anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Base angular frequency ω = ω_c = ω_a (resonant), rad/ns.
    pub omega: f64,
    /// λ/ω.
    pub lambda_ratio: f64,
    /// J/λ.
    pub j_ratio: f64,
    /// k₀/ω.
    pub k0_ratio: f64,
    /// Modulation frequency Ω of k(t) = k₀[1 + sin(Ωt)], 1/ns. 0 = constant.
    pub omega_mod: f64,
    /// Δ/λ with Δ = ω_a − ω_c.
    pub delta_ratio: f64,
    /// Ket expression for ψ(0).
    pub initial_state: String,
    /// Simulated horizon, ns.
    pub t_max: f64,
    /// Output sampling interval, ns.
    pub dt_out: f64,
    /// Cavity photon cutoff per mode.
    pub cutoff_c: u8,
    /// Pump-mode photon cutoff.
    pub cutoff_b: u8,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method: Method,
}

impl Default for RunConfig {
    /// The published reference point: ω = 10·2π GHz, λ = 0.1ω, J = 0.05λ,
    /// k₀ = 0.01ω, Ω = 0.004444 1/ns, resonant, pump-mode start.
    fn default() -> Self {
        Self {
            omega: 62.831853,
            lambda_ratio: 0.1,
            j_ratio: 0.05,
            k0_ratio: 0.01,
            omega_mod: 0.004444,
            delta_ratio: 0.0,
            initial_state: "|00100>".to_string(),
            t_max: 2000.0,
            dt_out: 1.0,
            cutoff_c: 2,
            cutoff_b: 1,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 10.0,
            method: Method::UnitaryMidpoint,
        }
    }
}

impl RunConfig {
    /// Parse the flat key = value format. Unknown keys are rejected; `#`
    /// starts a comment; omitted keys take their defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    line_no + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad_number = |field: &str| {
                CliError::validation(format!(
                    "config line {}: field {field} expects a number, got {value:?}",
                    line_no + 1
                ))
            };
            let parse_f64 = |field: &str| -> Result<f64, CliError> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad_number(field))
            };
            let parse_u8 = |field: &str| -> Result<u8, CliError> {
                value.parse::<u8>().map_err(|_| bad_number(field))
            };
            match key {
                "omega" => cfg.omega = parse_f64(key)?,
                "lambda_ratio" => cfg.lambda_ratio = parse_f64(key)?,
                "j_ratio" => cfg.j_ratio = parse_f64(key)?,
                "k0_ratio" => cfg.k0_ratio = parse_f64(key)?,
                "Omega" => cfg.omega_mod = parse_f64(key)?,
                "delta_ratio" => cfg.delta_ratio = parse_f64(key)?,
                "initial_state" => cfg.initial_state = value.to_string(),
                "t_max" => cfg.t_max = parse_f64(key)?,
                "dt_out" => cfg.dt_out = parse_f64(key)?,
                "cutoff_c" => cfg.cutoff_c = parse_u8(key)?,
                "cutoff_b" => cfg.cutoff_b = parse_u8(key)?,
                "rel_tol" => cfg.rel_tol = parse_f64(key)?,
                "abs_tol" => cfg.abs_tol = parse_f64(key)?,
                "max_step" => cfg.max_step = parse_f64(key)?,
                "method" => {
                    cfg.method = match value {
                        "unitary-midpoint" => Method::UnitaryMidpoint,
                        "adaptive-rk" => Method::AdaptiveRk,
                        other => {
                            return Err(CliError::validation(format!(
                                "config line {}: unknown method {other:?} \
                                 (expected unitary-midpoint or adaptive-rk)",
                                line_no + 1
                            )))
                        }
                    }
                }
                unknown => {
                    return Err(CliError::validation(format!(
                        "config line {}: unknown key {unknown:?}",
                        line_no + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let checks = [
            ("omega", self.omega, self.omega > 0.0),
            ("lambda_ratio", self.lambda_ratio, self.lambda_ratio >= 0.0),
            ("j_ratio", self.j_ratio, self.j_ratio >= 0.0),
            ("k0_ratio", self.k0_ratio, self.k0_ratio >= 0.0),
            ("Omega", self.omega_mod, self.omega_mod >= 0.0),
            ("t_max", self.t_max, self.t_max > 0.0),
            ("dt_out", self.dt_out, self.dt_out > 0.0),
            ("rel_tol", self.rel_tol, self.rel_tol > 0.0),
            ("abs_tol", self.abs_tol, self.abs_tol > 0.0),
            ("max_step", self.max_step, self.max_step > 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(CliError::validation(format!(
                    "field {name} = {value} out of range"
                )));
            }
        }
        if self.dt_out > self.t_max {
            return Err(CliError::validation(format!(
                "dt_out = {} exceeds t_max = {}",
                self.dt_out, self.t_max
            )));
        }
        Ok(())
    }

    /// Canonical text form; `parse(render())` reproduces the config exactly.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "omega = {}", self.omega);
        let _ = writeln!(out, "lambda_ratio = {}", self.lambda_ratio);
        let _ = writeln!(out, "j_ratio = {}", self.j_ratio);
        let _ = writeln!(out, "k0_ratio = {}", self.k0_ratio);
        let _ = writeln!(out, "Omega = {}", self.omega_mod);
        let _ = writeln!(out, "delta_ratio = {}", self.delta_ratio);
        let _ = writeln!(out, "initial_state = {}", self.initial_state);
        let _ = writeln!(out, "t_max = {}", self.t_max);
        let _ = writeln!(out, "dt_out = {}", self.dt_out);
        let _ = writeln!(out, "cutoff_c = {}", self.cutoff_c);
        let _ = writeln!(out, "cutoff_b = {}", self.cutoff_b);
        let _ = writeln!(out, "rel_tol = {}", self.rel_tol);
        let _ = writeln!(out, "abs_tol = {}", self.abs_tol);
        let _ = writeln!(out, "max_step = {}", self.max_step);
        let _ = writeln!(
            out,
            "method = {}",
            match self.method {
                Method::UnitaryMidpoint => "unitary-midpoint",
                Method::AdaptiveRk => "adaptive-rk",
            }
        );
        out
    }

    // derived physical quantities

    pub fn lambda(&self) -> f64 {
        self.lambda_ratio * self.omega
    }

    pub fn hop_j(&self) -> f64 {
        self.j_ratio * self.lambda()
    }

    pub fn k0(&self) -> f64 {
        self.k0_ratio * self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta_ratio * self.lambda()
    }

    pub fn params(&self) -> SystemParams {
        SystemParams::resonant(self.omega, self.lambda(), self.hop_j()).with_detuning(self.delta())
    }

    pub fn schedule(&self) -> CouplingSchedule {
        CouplingSchedule::Harmonic {
            k0: self.k0(),
            omega_mod: self.omega_mod,
        }
    }

    pub fn integrator(&self) -> IntegratorConfig {
        let mut cfg = IntegratorConfig::uniform(self.t_max, self.dt_out);
        cfg.rel_tol = self.rel_tol;
        cfg.abs_tol = self.abs_tol;
        cfg.max_step = self.max_step;
        cfg.method = self.method;
        cfg
    }

    /// Build the sector space implied by the initial state: the expression is
    /// parsed against the full truncated space first to learn its conserved
    /// excitation number.
    pub fn space_and_state(&self) -> Result<(Arc<SectorSpace>, StateVector), CliError> {
        let full = Arc::new(SectorSpace::full_space(self.cutoff_c, self.cutoff_b));
        let probe = parse_state_expr(&self.initial_state, &full, true)?;
        let mut excitation: Option<u32> = None;
        for (idx, amp) in probe.amplitudes().iter().enumerate() {
            if amp.norm_sqr() > 0.0 {
                let n = full.label(idx).weighted_excitation();
                match excitation {
                    None => excitation = Some(n),
                    Some(prev) if prev != n => {
                        return Err(CliError::validation(format!(
                            "initial state mixes excitation sectors {prev} and {n}; \
                             dynamics are restricted to a single sector"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let excitation = excitation.expect("parse rejects the zero vector");
        let space = Arc::new(
            SectorSpace::build_sector(self.cutoff_c, self.cutoff_b, excitation)
                .map_err(|e| CliError::validation(e.to_string()))?,
        );
        let state = parse_state_expr(&self.initial_state, &space, true)?;
        Ok((space, state))
    }
}
