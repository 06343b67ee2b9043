//! Simulation of two coupled single-mode cavities, each holding a qubit, with a
//! degenerate second-order nonlinear process in the first cavity that converts
//! one pump photon into two cavity photons.
//!
//! The crate is organized around a truncated tensor-product Fock space
//! restricted to a conserved-excitation sector ([`fock`]), Hamiltonian assembly
//! with an optionally time-dependent nonlinear coupling ([`hamiltonian`]),
//! Schrödinger-equation propagation and parameter sweeps ([`dynamics`]),
//! closed-form single-excitation solutions used as correctness oracles
//! ([`oracle`]), and entanglement diagnostics built on partial traces
//! ([`quantify`]).
//!
//! All frequencies and couplings are angular, in rad/ns; times are in ns;
//! entropies are in bits.

pub mod dynamics;
pub mod fock;
pub mod hamiltonian;
pub mod integrate;
pub mod ket;
pub mod oracle;
pub mod quantify;

pub use dynamics::{evolve, sigma_z_expect, sweep, IntegratorConfig, Method, SweepAxis, Timeline};
pub use fock::{
    subsystem_operator, EmbeddedOperator, FockError, OccupationLabel, OperatorKind, SectorSpace,
    StateVector, SubsystemId,
};
pub use hamiltonian::{
    assemble_h, excitation_operator, plateau_window, split_h, CouplingSchedule, PlateauWindow,
    SystemParams,
};
pub use ket::{format_state, parse_state_expr};
pub use quantify::{
    density, entropy_timeline, mutual_information, partial_trace, reduced_density, renyi_entropy,
    vn_entropy, DensityMatrix, EntropyRecord, EntropyTimeline,
};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
