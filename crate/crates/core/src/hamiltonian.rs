//! Hamiltonian assembly on a sector basis, the harmonic coupling schedule and
//! analytic preservation-window prediction.
//!
//! The full Hamiltonian is
//!
//! ```text
//! H(t) = Σᵢ [ ½ ω_aᵢ σz⁽ⁱ⁾ + ω_cᵢ nᵢ ] + ω_b b†b
//!      + J (a₁†a₂ + a₁a₂†)
//!      + Σᵢ λᵢ (aᵢ† σ₋⁽ⁱ⁾ + aᵢ σ₊⁽ⁱ⁾)
//!      + i k(t)/2 [ (a₁†)² b − a₁² b† ]
//! ```
//!
//! with k(t) = k₀[1 + sin(Ω t)]. Since k enters linearly, H(t) splits into a
//! cached time-independent part plus k(t) times a fixed nonlinear part.

use std::f64::consts::PI;

use thiserror::Error;

use crate::fock::{EmbeddedOperator, OperatorKind, SectorSpace, SubsystemId};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error("parameter {name} = {value} is not finite")]
    NonFinite { name: &'static str, value: f64 },
    #[error("coupling {name} = {value} must be ≥ 0")]
    NegativeCoupling { name: &'static str, value: f64 },
    #[error("constant coupling never vanishes: no preservation window exists")]
    NoPlateauWindow,
    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
}

/// All Hamiltonian symbols. Frequencies and couplings are angular, rad/ns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Qubit level splittings.
    pub omega_a1: f64,
    pub omega_a2: f64,
    /// Cavity mode frequencies.
    pub omega_c1: f64,
    pub omega_c2: f64,
    /// Pump-mode frequency of the χ⁽²⁾ process.
    pub omega_b: f64,
    /// Qubit–photon couplings.
    pub lambda1: f64,
    pub lambda2: f64,
    /// Photon hopping between the two cavities.
    pub hop_j: f64,
}

impl SystemParams {
    /// Resonant configuration: ω_a = ω_c = ω, ω_b = 2ω, equal couplings.
    pub fn resonant(omega: f64, lambda: f64, hop_j: f64) -> Self {
        Self {
            omega_a1: omega,
            omega_a2: omega,
            omega_c1: omega,
            omega_c2: omega,
            omega_b: 2.0 * omega,
            lambda1: lambda,
            lambda2: lambda,
            hop_j,
        }
    }

    /// Shift both qubit splittings to ω_c + Δ, leaving ω_c and ω_b fixed.
    pub fn with_detuning(mut self, delta: f64) -> Self {
        self.omega_a1 = self.omega_c1 + delta;
        self.omega_a2 = self.omega_c2 + delta;
        self
    }

    /// Detuning Δ = ω_a − ω_c of the first qubit.
    pub fn delta(&self) -> f64 {
        self.omega_a1 - self.omega_c1
    }

    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let fields = [
            ("omega_a1", self.omega_a1),
            ("omega_a2", self.omega_a2),
            ("omega_c1", self.omega_c1),
            ("omega_c2", self.omega_c2),
            ("omega_b", self.omega_b),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("hop_j", self.hop_j),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(HamiltonianError::NonFinite { name, value });
            }
        }
        for (name, value) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("hop_j", self.hop_j),
        ] {
            if value < 0.0 {
                return Err(HamiltonianError::NegativeCoupling { name, value });
            }
        }
        Ok(())
    }
}

/// Time dependence of the nonlinear coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSchedule {
    Constant {
        k0: f64,
    },
    /// k(t) = k0·[1 + sin(Ω t)], Ω in 1/ns (angular). Ω = 0 reduces to the
    /// constant schedule.
    Harmonic {
        k0: f64,
        omega_mod: f64,
    },
}

impl CouplingSchedule {
    pub fn k0(&self) -> f64 {
        match *self {
            CouplingSchedule::Constant { k0 } | CouplingSchedule::Harmonic { k0, .. } => k0,
        }
    }

    /// k0 must be finite and ≥ 0 (k(t) never goes negative), Ω finite and ≥ 0.
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let k0 = self.k0();
        if !k0.is_finite() {
            return Err(HamiltonianError::NonFinite {
                name: "k0",
                value: k0,
            });
        }
        if k0 < 0.0 {
            return Err(HamiltonianError::NegativeCoupling {
                name: "k0",
                value: k0,
            });
        }
        if let CouplingSchedule::Harmonic { omega_mod, .. } = *self {
            if !omega_mod.is_finite() {
                return Err(HamiltonianError::NonFinite {
                    name: "Omega",
                    value: omega_mod,
                });
            }
            if omega_mod < 0.0 {
                return Err(HamiltonianError::NegativeCoupling {
                    name: "Omega",
                    value: omega_mod,
                });
            }
        }
        Ok(())
    }

    /// True when k(t) does not actually vary.
    pub fn is_constant(&self) -> bool {
        match *self {
            CouplingSchedule::Constant { .. } => true,
            CouplingSchedule::Harmonic { omega_mod, k0 } => omega_mod == 0.0 || k0 == 0.0,
        }
    }

    /// k(t); total function of t ≥ 0.
    pub fn k_at(&self, t: f64) -> f64 {
        match *self {
            CouplingSchedule::Constant { k0 } => k0,
            CouplingSchedule::Harmonic { k0, omega_mod } => k0 * (1.0 + (omega_mod * t).sin()),
        }
    }

    /// Exact average of k over [t0, t1], used by the midpoint propagator.
    pub fn mean_over(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            CouplingSchedule::Constant { k0 } => k0,
            CouplingSchedule::Harmonic { k0, omega_mod } => {
                let h = t1 - t0;
                if omega_mod == 0.0 || h == 0.0 {
                    return self.k_at(0.5 * (t0 + t1));
                }
                // ∫ sin = (cos Ωt0 − cos Ωt1)/Ω = 2 sin(Ω t_mid) sin(Ω h/2)/Ω
                let half = 0.5 * omega_mod * h;
                let mid = 0.5 * omega_mod * (t0 + t1);
                k0 * (1.0 + mid.sin() * sinc(half))
            }
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Times bracketing one near-zero window of the harmonic coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauWindow {
    /// k descends through fraction·k0.
    pub t_enter: f64,
    /// k reaches zero.
    pub t_zero: f64,
    /// k climbs back through fraction·k0.
    pub t_exit: f64,
}

/// Analytic roots of k(t) = fraction·k0 around the `cycle`-th zero of k.
///
/// sin(Ωt) = fraction − 1 gives t_enter = (π + arcsin(1 − fraction))/Ω,
/// t_zero = 3π/(2Ω), t_exit = (2π − arcsin(1 − fraction))/Ω, each shifted by
/// full periods 2π·cycle/Ω.
pub fn plateau_window(
    sched: &CouplingSchedule,
    fraction: f64,
    cycle: u32,
) -> Result<PlateauWindow, HamiltonianError> {
    let omega_mod = match *sched {
        CouplingSchedule::Harmonic { omega_mod, .. } if omega_mod > 0.0 => omega_mod,
        _ => return Err(HamiltonianError::NoPlateauWindow),
    };
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(HamiltonianError::InvalidFraction(fraction));
    }
    let a = (1.0 - fraction).asin();
    let shift = 2.0 * PI * f64::from(cycle);
    Ok(PlateauWindow {
        t_enter: (PI + a + shift) / omega_mod,
        t_zero: (1.5 * PI + shift) / omega_mod,
        t_exit: (2.0 * PI - a + shift) / omega_mod,
    })
}

/// The k-linear split H(t) = base + k(t)·nonlinear.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    /// Free energies, hopping and qubit–photon couplings.
    pub base: EmbeddedOperator,
    /// i/2 [(a₁†)²b − a₁²b†]; multiply by k(t).
    pub nonlinear: EmbeddedOperator,
}

impl HamiltonianParts {
    pub fn at_coupling(&self, k_now: f64) -> EmbeddedOperator {
        let m = self.base.matrix() + self.nonlinear.matrix().scale(k_now);
        EmbeddedOperator::new(m, true)
    }
}

/// Assemble the k-independent and k-linear parts once.
pub fn split_h(
    space: &SectorSpace,
    params: &SystemParams,
) -> Result<HamiltonianParts, HamiltonianError> {
    params.validate()?;
    let dim = space.dim();
    let mut base = EmbeddedOperator::zeros(dim, true);

    // free energies on the diagonal
    for (idx, label) in space.labels().iter().enumerate() {
        let sz1 = if label.q1 == 1 { 1.0 } else { -1.0 };
        let sz2 = if label.q2 == 1 { 1.0 } else { -1.0 };
        let energy = 0.5 * params.omega_a1 * sz1
            + 0.5 * params.omega_a2 * sz2
            + params.omega_c1 * f64::from(label.n1)
            + params.omega_c2 * f64::from(label.n2)
            + params.omega_b * f64::from(label.nb);
        base.matrix_mut()[(idx, idx)] = C64::new(energy, 0.0);
    }

    use OperatorKind::{Annihilate, Create, SigmaMinus};
    use SubsystemId::{Field1, Field2, FieldB, Qubit1, Qubit2};

    // photon hopping J (a1† a2 + h.c.)
    add_pair(
        &mut base,
        space,
        C64::new(params.hop_j, 0.0),
        &[(Field1, Create), (Field2, Annihilate)],
    );
    // qubit–photon exchange λi (ai† σ−(i) + h.c.)
    add_pair(
        &mut base,
        space,
        C64::new(params.lambda1, 0.0),
        &[(Field1, Create), (Qubit1, SigmaMinus)],
    );
    add_pair(
        &mut base,
        space,
        C64::new(params.lambda2, 0.0),
        &[(Field2, Create), (Qubit2, SigmaMinus)],
    );

    // χ⁽²⁾ conversion, unit coupling: i/2 [(a1†)² b − a1² b†]
    let mut nonlinear = EmbeddedOperator::zeros(dim, true);
    add_pair(
        &mut nonlinear,
        space,
        C64::new(0.0, 0.5),
        &[(Field1, Create), (Field1, Create), (FieldB, Annihilate)],
    );

    Ok(HamiltonianParts { base, nonlinear })
}

/// Assemble H at a fixed instantaneous coupling value.
pub fn assemble_h(
    space: &SectorSpace,
    params: &SystemParams,
    k_now: f64,
) -> Result<EmbeddedOperator, HamiltonianError> {
    if !k_now.is_finite() {
        return Err(HamiltonianError::NonFinite {
            name: "k_now",
            value: k_now,
        });
    }
    Ok(split_h(space, params)?.at_coupling(k_now))
}

/// Diagonal weighted excitation operator N = n₁ + n₂ + 2·n_b + (σz⁽¹⁾+1)/2 +
/// (σz⁽²⁾+1)/2. On a single sector this is N·I.
pub fn excitation_operator(space: &SectorSpace) -> EmbeddedOperator {
    let mut op = EmbeddedOperator::zeros(space.dim(), true);
    for (idx, label) in space.labels().iter().enumerate() {
        op.matrix_mut()[(idx, idx)] = C64::new(f64::from(label.weighted_excitation()), 0.0);
    }
    op
}

/// Add coeff·T + conj(coeff)·T† where T is a product of elementary operators.
///
/// Mirrored entries are written together from the same √-factor product, so
/// hermiticity holds exactly, not just to rounding.
fn add_pair(
    op: &mut EmbeddedOperator,
    space: &SectorSpace,
    coeff: C64,
    chain: &[(SubsystemId, OperatorKind)],
) {
    for (col, label) in space.labels().iter().enumerate() {
        if let Some((factor, image)) = space.apply_product(label, chain) {
            if let Some(row) = space.index_of(&image) {
                op.matrix_mut()[(row, col)] += coeff * factor;
                op.matrix_mut()[(col, row)] += coeff.conj() * factor;
            }
        }
    }
}
