//! Truncated tensor-product Fock bases, conserved-excitation sectors and
//! subsystem operators embedded in them.
//!
//! The five subsystems are ordered |qubit1, field1, field_b, qubit2, field2⟩.
//! The pump mode (`field_b`) carries excitation weight 2: one of its photons
//! converts into two cavity photons, so the weighted excitation
//! q1 + n1 + 2·nb + q2 + n2 is what the Hamiltonian conserves.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::C64;

/// Errors from basis construction, operator embedding and state input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("no basis label satisfies excitation N={excitation} for cutoffs (cavity {cutoff_c}, pump {cutoff_b})")]
    EmptySector {
        cutoff_c: u8,
        cutoff_b: u8,
        excitation: u32,
    },
    #[error("operator kind {kind:?} does not act on subsystem {subsystem}")]
    KindMismatch {
        subsystem: SubsystemId,
        kind: OperatorKind,
    },
    #[error("label |{label}⟩ is not part of the state space")]
    LabelOutsideSpace { label: OccupationLabel },
    #[error("ket expression error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("state vector has zero norm")]
    ZeroNorm,
    #[error("state vector norm {norm} is not unit within 1e-9")]
    NotNormalized { norm: f64 },
    #[error("amplitude list has length {got}, space dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// One of the five subsystems, in tensor-product order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubsystemId {
    Qubit1,
    Field1,
    FieldB,
    Qubit2,
    Field2,
}

impl SubsystemId {
    /// All subsystems in tensor-product order.
    pub const ALL: [SubsystemId; 5] = [
        SubsystemId::Qubit1,
        SubsystemId::Field1,
        SubsystemId::FieldB,
        SubsystemId::Qubit2,
        SubsystemId::Field2,
    ];

    /// Position of this subsystem in the label tuple.
    pub fn axis(self) -> usize {
        match self {
            SubsystemId::Qubit1 => 0,
            SubsystemId::Field1 => 1,
            SubsystemId::FieldB => 2,
            SubsystemId::Qubit2 => 3,
            SubsystemId::Field2 => 4,
        }
    }

    pub fn is_qubit(self) -> bool {
        matches!(self, SubsystemId::Qubit1 | SubsystemId::Qubit2)
    }

    /// Short name used in CLI flags and CSV headers.
    pub fn short_name(self) -> &'static str {
        match self {
            SubsystemId::Qubit1 => "q1",
            SubsystemId::Field1 => "f1",
            SubsystemId::FieldB => "fb",
            SubsystemId::Qubit2 => "q2",
            SubsystemId::Field2 => "f2",
        }
    }

    pub fn parse(name: &str) -> Option<SubsystemId> {
        SubsystemId::ALL
            .into_iter()
            .find(|s| s.short_name() == name)
    }
}

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Operator kinds embeddable on a single subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilate,
    Create,
    Number,
    SigmaZ,
    SigmaPlus,
    SigmaMinus,
}

impl OperatorKind {
    fn is_bosonic(self) -> bool {
        matches!(
            self,
            OperatorKind::Annihilate | OperatorKind::Create | OperatorKind::Number
        )
    }
}

/// One basis ket |q1, n1, nb, q2, n2⟩.
///
/// Derived ordering is lexicographic on the tuple, which fixes the basis order
/// of every [`SectorSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationLabel {
    pub q1: u8,
    pub n1: u8,
    pub nb: u8,
    pub q2: u8,
    pub n2: u8,
}

impl OccupationLabel {
    pub fn new(q1: u8, n1: u8, nb: u8, q2: u8, n2: u8) -> Self {
        Self { q1, n1, nb, q2, n2 }
    }

    pub fn digits(&self) -> [u8; 5] {
        [self.q1, self.n1, self.nb, self.q2, self.n2]
    }

    pub fn from_digits(d: [u8; 5]) -> Self {
        Self::new(d[0], d[1], d[2], d[3], d[4])
    }

    pub fn occupation(&self, which: SubsystemId) -> u8 {
        self.digits()[which.axis()]
    }

    pub fn with_occupation(&self, which: SubsystemId, value: u8) -> Self {
        let mut d = self.digits();
        d[which.axis()] = value;
        Self::from_digits(d)
    }

    /// Weighted excitation q1 + n1 + 2·nb + q2 + n2.
    pub fn weighted_excitation(&self) -> u32 {
        self.q1 as u32 + self.n1 as u32 + 2 * self.nb as u32 + self.q2 as u32 + self.n2 as u32
    }
}

impl fmt::Display for OccupationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Ordered basis of a state space: either one conserved-excitation sector or
/// the full (unprojected) truncated tensor product.
///
/// Labels are sorted lexicographically and immutable after construction, so a
/// space can be shared read-only across worker threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorSpace {
    labels: Vec<OccupationLabel>,
    cutoff_c: u8,
    cutoff_b: u8,
    excitation: Option<u32>,
}

impl SectorSpace {
    /// Enumerate all labels with weighted excitation exactly `excitation`.
    ///
    /// Deterministic: labels come out sorted lexicographically on
    /// (q1, n1, nb, q2, n2).
    pub fn build_sector(cutoff_c: u8, cutoff_b: u8, excitation: u32) -> Result<Self, FockError> {
        let labels = enumerate(cutoff_c, cutoff_b, Some(excitation));
        if labels.is_empty() {
            return Err(FockError::EmptySector {
                cutoff_c,
                cutoff_b,
                excitation,
            });
        }
        Ok(Self {
            labels,
            cutoff_c,
            cutoff_b,
            excitation: Some(excitation),
        })
    }

    /// The full truncated tensor product, all excitation numbers mixed.
    ///
    /// Used by leakage and conservation tests; production dynamics stay on a
    /// single sector.
    pub fn full_space(cutoff_c: u8, cutoff_b: u8) -> Self {
        Self {
            labels: enumerate(cutoff_c, cutoff_b, None),
            cutoff_c,
            cutoff_b,
            excitation: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[OccupationLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> OccupationLabel {
        self.labels[index]
    }

    /// Inverse of `labels`: position of a label, `None` if outside the space.
    pub fn index_of(&self, label: &OccupationLabel) -> Option<usize> {
        self.labels.binary_search(label).ok()
    }

    pub fn contains(&self, label: &OccupationLabel) -> bool {
        self.index_of(label).is_some()
    }

    /// Local dimensions (2, cutoff_c+1, cutoff_b+1, 2, cutoff_c+1).
    pub fn subsystem_dims(&self) -> [usize; 5] {
        [
            2,
            self.cutoff_c as usize + 1,
            self.cutoff_b as usize + 1,
            2,
            self.cutoff_c as usize + 1,
        ]
    }

    pub fn subsystem_dim(&self, which: SubsystemId) -> usize {
        self.subsystem_dims()[which.axis()]
    }

    /// Conserved excitation number, `None` for the full space.
    pub fn excitation(&self) -> Option<u32> {
        self.excitation
    }

    pub fn cutoff_c(&self) -> u8 {
        self.cutoff_c
    }

    pub fn cutoff_b(&self) -> u8 {
        self.cutoff_b
    }

    /// Row-major position of a label in the full tensor product.
    pub fn tensor_index(&self, label: &OccupationLabel) -> usize {
        let dims = self.subsystem_dims();
        let d = label.digits();
        let mut idx = 0usize;
        for axis in 0..5 {
            idx = idx * dims[axis] + d[axis] as usize;
        }
        idx
    }

    /// Apply a single elementary operator to a label.
    ///
    /// Returns the image label and its matrix-element factor, or `None` when
    /// the operator annihilates the label or pushes an occupation past its
    /// cutoff (truncation).
    pub fn apply(
        &self,
        label: &OccupationLabel,
        which: SubsystemId,
        kind: OperatorKind,
    ) -> Option<(f64, OccupationLabel)> {
        let occ = label.occupation(which);
        let local_dim = self.subsystem_dim(which) as u8;
        match kind {
            OperatorKind::Annihilate => {
                if occ == 0 {
                    None
                } else {
                    Some((f64::from(occ).sqrt(), label.with_occupation(which, occ - 1)))
                }
            }
            OperatorKind::Create => {
                // occupation may not exceed the cutoff (local_dim - 1)
                if occ + 1 >= local_dim {
                    None
                } else {
                    Some((
                        f64::from(occ + 1).sqrt(),
                        label.with_occupation(which, occ + 1),
                    ))
                }
            }
            OperatorKind::Number => Some((f64::from(occ), *label)),
            OperatorKind::SigmaZ => Some((if occ == 1 { 1.0 } else { -1.0 }, *label)),
            OperatorKind::SigmaPlus => {
                if occ == 0 {
                    Some((1.0, label.with_occupation(which, 1)))
                } else {
                    None
                }
            }
            OperatorKind::SigmaMinus => {
                if occ == 1 {
                    Some((1.0, label.with_occupation(which, 0)))
                } else {
                    None
                }
            }
        }
    }

    /// Apply a product of elementary operators, rightmost first.
    ///
    /// Intermediate labels may leave the conserved sector; only the final
    /// label is looked up by callers. `None` propagates annihilation.
    pub fn apply_product(
        &self,
        label: &OccupationLabel,
        ops: &[(SubsystemId, OperatorKind)],
    ) -> Option<(f64, OccupationLabel)> {
        let mut factor = 1.0;
        let mut current = *label;
        for &(which, kind) in ops.iter().rev() {
            let (f, next) = self.apply(&current, which, kind)?;
            factor *= f;
            current = next;
        }
        Some((factor, current))
    }
}

/// Dense operator on a [`SectorSpace`] basis.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedOperator {
    matrix: DMatrix<C64>,
    hermitian: bool,
}

impl EmbeddedOperator {
    /// Wrap a matrix; a set `hermitian` flag is checked against 1e-14.
    pub fn new(matrix: DMatrix<C64>, hermitian: bool) -> Self {
        let op = Self { matrix, hermitian };
        if hermitian {
            debug_assert!(op.hermiticity_defect() <= 1e-14);
        }
        op
    }

    pub fn zeros(dim: usize, hermitian: bool) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            hermitian,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// max |M − M†| over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// ⟨ψ|M|ψ⟩ for a complex amplitude vector.
    pub fn expectation(&self, amps: &[C64]) -> C64 {
        let n = self.dim();
        assert_eq!(amps.len(), n);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += self.matrix[(i, j)] * amps[j];
            }
            acc += amps[i].conj() * row;
        }
        acc
    }

    /// Flat row-major copy for propagation hot loops.
    pub fn to_flat(&self) -> Vec<C64> {
        let n = self.dim();
        let mut flat = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                flat.push(self.matrix[(i, j)]);
            }
        }
        flat
    }

    /// max |[A, B]| entry; both operators must share a basis.
    pub fn commutator_max(&self, other: &EmbeddedOperator) -> f64 {
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        (ab - ba).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Materialize a single subsystem operator inside the space.
///
/// Matrix elements are ⟨row|op|col⟩ for row and col both in the space; images
/// that leave the space (sector or cutoff) contribute zero. Bosonic elements
/// carry the usual √n factors.
pub fn subsystem_operator(
    space: &SectorSpace,
    which: SubsystemId,
    kind: OperatorKind,
) -> Result<EmbeddedOperator, FockError> {
    if which.is_qubit() == kind.is_bosonic() {
        return Err(FockError::KindMismatch {
            subsystem: which,
            kind,
        });
    }
    let n = space.dim();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for (col, label) in space.labels().iter().enumerate() {
        if let Some((factor, image)) = space.apply(label, which, kind) {
            if let Some(row) = space.index_of(&image) {
                m[(row, col)] += C64::new(factor, 0.0);
            }
        }
    }
    let hermitian = matches!(kind, OperatorKind::Number | OperatorKind::SigmaZ);
    Ok(EmbeddedOperator::new(m, hermitian))
}

/// Complex amplitudes over a [`SectorSpace`] basis, unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: Arc<SectorSpace>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Build from raw amplitudes. With `normalize` the vector is rescaled to
    /// unit norm; otherwise the norm must already be 1 within 1e-9.
    pub fn from_amplitudes(
        space: Arc<SectorSpace>,
        mut amps: Vec<C64>,
        normalize: bool,
    ) -> Result<Self, FockError> {
        if amps.len() != space.dim() {
            return Err(FockError::DimensionMismatch {
                expected: space.dim(),
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        if !norm.is_finite() {
            return Err(FockError::NotNormalized { norm });
        }
        if normalize {
            for a in &mut amps {
                *a /= norm;
            }
        } else if (norm - 1.0).abs() > 1e-9 {
            return Err(FockError::NotNormalized { norm });
        }
        Ok(Self { space, amps })
    }

    /// Trajectory samples: integrator output owns its norm bookkeeping (drift
    /// is reported by the dynamics layer, with a hard 1e-6 guard), so only
    /// finiteness and non-degeneracy are enforced here.
    pub(crate) fn from_trajectory_sample(
        space: Arc<SectorSpace>,
        amps: Vec<C64>,
    ) -> Result<Self, FockError> {
        if amps.len() != space.dim() {
            return Err(FockError::DimensionMismatch {
                expected: space.dim(),
                got: amps.len(),
            });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        if !norm.is_finite() {
            return Err(FockError::NotNormalized { norm });
        }
        Ok(Self { space, amps })
    }

    /// The basis state |label⟩.
    pub fn basis_state(
        space: Arc<SectorSpace>,
        label: &OccupationLabel,
    ) -> Result<Self, FockError> {
        let idx = space
            .index_of(label)
            .ok_or(FockError::LabelOutsideSpace { label: *label })?;
        let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> &Arc<SectorSpace> {
        &self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn enumerate(cutoff_c: u8, cutoff_b: u8, excitation: Option<u32>) -> Vec<OccupationLabel> {
    let mut labels = Vec::new();
    for q1 in 0..=1u8 {
        for n1 in 0..=cutoff_c {
            for nb in 0..=cutoff_b {
                for q2 in 0..=1u8 {
                    for n2 in 0..=cutoff_c {
                        let label = OccupationLabel::new(q1, n1, nb, q2, n2);
                        if excitation.is_none_or(|n| label.weighted_excitation() == n) {
                            labels.push(label);
                        }
                    }
                }
            }
        }
    }
    labels.sort_unstable();
    labels
}
