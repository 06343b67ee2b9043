//! Density matrices, partial traces over arbitrary subsystem subsets, von
//! Neumann and Rényi entropies, and pairwise mutual information.
//!
//! Sector states are embedded into the full tensor product (2, c+1, b+1, 2,
//! c+1) before tracing, so reduced matrices always live on the kept
//! subsystems' full local dimensions. Entropies are base-2 throughout (bits):
//! the α → 1 limit of the Rényi entropy can only match the von Neumann
//! entropy if both use the same base.

use rayon::prelude::*;
use thiserror::Error;

use nalgebra::DMatrix;

use crate::dynamics::Timeline;
use crate::fock::{StateVector, SubsystemId};
use crate::C64;

/// Eigenvalues in [−1e-10, EIGENVALUE_CLAMP] are treated as zero (0·log 0 = 0);
/// anything more negative is a hard error.
const EIGENVALUE_CLAMP: f64 = 1e-12;
const NEGATIVITY_LIMIT: f64 = -1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantifyError {
    #[error("matrix is not Hermitian: max |ρ − ρ†| = {defect:.3e}")]
    NonHermitian { defect: f64 },
    #[error("density matrix has eigenvalue {value:.3e} below {NEGATIVITY_LIMIT:.0e}")]
    NegativeEigenvalue { value: f64 },
    #[error("trace {trace} deviates from 1 beyond 1e-10")]
    TraceNotOne { trace: f64 },
    #[error("keep set is empty")]
    EmptyKeepSet,
    #[error("subsystem {0} is not part of this density matrix")]
    UnknownTag(SubsystemId),
    #[error("mutual information needs two distinct subsystems, got {0} twice")]
    SamePair(SubsystemId),
    #[error("Rényi order alpha = {0} must be positive")]
    InvalidAlpha(f64),
    #[error("Rényi order alpha = {0} is within 1e-9 of 1; use the von Neumann entropy")]
    AlphaNearOne(f64),
    #[error("mutual information {value:.3e} below −1e-9 signals a partial-trace defect")]
    NegativeMutualInformation { value: f64 },
    #[error("failure at sample t = {time_ns} ns: {source}")]
    AtSample {
        time_ns: f64,
        #[source]
        source: Box<QuantifyError>,
    },
}

/// Dense density matrix over an explicit subset of the five subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<C64>,
    subsystems: Vec<SubsystemId>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Assemble from an explicit matrix with its subsystem tags and local
    /// dimensions. Physical validity is the caller's business; see
    /// [`DensityMatrix::validate`].
    pub fn from_parts(
        matrix: DMatrix<C64>,
        subsystems: Vec<SubsystemId>,
        dims: Vec<usize>,
    ) -> Self {
        assert_eq!(subsystems.len(), dims.len());
        assert_eq!(matrix.nrows(), dims.iter().product::<usize>());
        assert_eq!(matrix.nrows(), matrix.ncols());
        Self {
            matrix,
            subsystems,
            dims,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Which subsystems remain, in tensor order.
    pub fn subsystems(&self) -> &[SubsystemId] {
        &self.subsystems
    }

    /// Local dimensions aligned with `subsystems`.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    /// Tr(ρ²), real for Hermitian input.
    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        acc
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Full validity check: Hermitian within 1e-12, unit trace within 1e-10,
    /// eigenvalues ≥ −1e-10.
    pub fn validate(&self) -> Result<(), QuantifyError> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(QuantifyError::NonHermitian { defect });
        }
        let trace = self.trace();
        if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
            return Err(QuantifyError::TraceNotOne { trace: trace.re });
        }
        self.eigenvalues().map(|_| ())
    }

    fn eigenvalues(&self) -> Result<Vec<f64>, QuantifyError> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(QuantifyError::NonHermitian { defect });
        }
        let mut values = hermitian_eigenvalues(&self.matrix);
        for v in &mut values {
            if *v < NEGATIVITY_LIMIT {
                return Err(QuantifyError::NegativeEigenvalue { value: *v });
            }
            *v = v.max(0.0);
        }
        Ok(values)
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Density matrices routinely have maximally degenerate spectra (a rank-1
/// projector has dim−1 identical zeros), which trips shift-based
/// tridiagonal solvers into non-finite output; Jacobi is unconditionally
/// convergent there. Eigenvalues only, no vectors.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let n = m.nrows();
    if n == 1 {
        return vec![m[(0, 0)].re];
    }
    let mut a = m.clone();
    let scale = a
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = a[(p, q)];
                let abs = beta.norm();
                if abs <= 1e-300 {
                    continue;
                }
                // unitary 2×2 that zeroes the (p,q) element:
                // U = [[c, −s·e^{iφ}], [s·e^{−iφ}, c]], β = |β|·e^{iφ}
                let phase = beta / abs;
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (2.0 * abs);
                // smaller root of |β|t² + (α−γ)t − |β| = 0
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // column update: A ← A·U
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * (s * phase.conj());
                    a[(k, q)] = akq * c - akp * (s * phase);
                }
                // row update: A ← U†·A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * (s * phase);
                    a[(q, k)] = aqk * c - apk * (s * phase.conj());
                }
                // pin the rotated pair to exact Hermitian form
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
    }
    (0..n).map(|i| a[(i, i)].re).collect()
}

/// ρ = |ψ⟩⟨ψ| on the full five-subsystem tensor product.
pub fn density(state: &StateVector) -> DensityMatrix {
    reduced_density(state, &SubsystemId::ALL).expect("full keep set is never empty")
}

/// Reduced density matrix of a pure sector state over `keep`, computed by
/// embedding the sector amplitudes in the full tensor product and contracting
/// the complement directly.
///
/// `keep` may come in any order; the result follows tensor order.
pub fn reduced_density(
    state: &StateVector,
    keep: &[SubsystemId],
) -> Result<DensityMatrix, QuantifyError> {
    let keep = normalize_keep(keep, &SubsystemId::ALL)?;
    let space = state.space();
    let full_dims = space.subsystem_dims();
    let keep_dims: Vec<usize> = keep.iter().map(|s| full_dims[s.axis()]).collect();
    let keep_dim: usize = keep_dims.iter().product();

    // mixed-radix split of each occupied sector label into (keep, rest) parts
    let split = |label_idx: usize| -> (usize, usize) {
        let digits = space.label(label_idx).digits();
        let mut k = 0usize;
        let mut r = 0usize;
        for id in SubsystemId::ALL {
            let axis = id.axis();
            if keep.contains(&id) {
                k = k * full_dims[axis] + digits[axis] as usize;
            } else {
                r = r * full_dims[axis] + digits[axis] as usize;
            }
        }
        (k, r)
    };

    let amps = state.amplitudes();
    let mut rho = DMatrix::<C64>::zeros(keep_dim, keep_dim);
    for (i, &ai) in amps.iter().enumerate() {
        if ai.norm_sqr() == 0.0 {
            continue;
        }
        let (ki, ri) = split(i);
        for (j, &aj) in amps.iter().enumerate() {
            if aj.norm_sqr() == 0.0 {
                continue;
            }
            let (kj, rj) = split(j);
            if ri == rj {
                rho[(ki, kj)] += ai * aj.conj();
            }
        }
    }
    Ok(DensityMatrix {
        matrix: rho,
        subsystems: keep,
        dims: keep_dims,
    })
}

/// Trace out every subsystem of `rho` not named in `keep`.
pub fn partial_trace(
    rho: &DensityMatrix,
    keep: &[SubsystemId],
) -> Result<DensityMatrix, QuantifyError> {
    let keep = normalize_keep(keep, &rho.subsystems)?;
    let keep_axes: Vec<usize> = rho
        .subsystems
        .iter()
        .enumerate()
        .filter(|(_, s)| keep.contains(s))
        .map(|(i, _)| i)
        .collect();
    let keep_dims: Vec<usize> = keep_axes.iter().map(|&i| rho.dims[i]).collect();
    let keep_dim: usize = keep_dims.iter().product();

    // index decomposition tables for the input matrix
    let total = rho.dim();
    let mut keep_of = vec![0usize; total];
    let mut rest_of = vec![0usize; total];
    for idx in 0..total {
        let mut remainder = idx;
        let mut digits = vec![0usize; rho.dims.len()];
        for axis in (0..rho.dims.len()).rev() {
            digits[axis] = remainder % rho.dims[axis];
            remainder /= rho.dims[axis];
        }
        let mut k = 0usize;
        let mut r = 0usize;
        for axis in 0..rho.dims.len() {
            if keep_axes.contains(&axis) {
                k = k * rho.dims[axis] + digits[axis];
            } else {
                r = r * rho.dims[axis] + digits[axis];
            }
        }
        keep_of[idx] = k;
        rest_of[idx] = r;
    }

    // group input indices by their traced-out part
    let rest_dim = total / keep_dim;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); rest_dim];
    for idx in 0..total {
        groups[rest_of[idx]].push(idx);
    }

    let mut out = DMatrix::<C64>::zeros(keep_dim, keep_dim);
    for group in &groups {
        for &i in group {
            for &j in group {
                out[(keep_of[i], keep_of[j])] += rho.matrix[(i, j)];
            }
        }
    }
    Ok(DensityMatrix {
        matrix: out,
        subsystems: keep,
        dims: keep_dims,
    })
}

fn normalize_keep(
    keep: &[SubsystemId],
    available: &[SubsystemId],
) -> Result<Vec<SubsystemId>, QuantifyError> {
    if keep.is_empty() {
        return Err(QuantifyError::EmptyKeepSet);
    }
    for tag in keep {
        if !available.contains(tag) {
            return Err(QuantifyError::UnknownTag(*tag));
        }
    }
    let mut sorted: Vec<SubsystemId> = available
        .iter()
        .copied()
        .filter(|s| keep.contains(s))
        .collect();
    sorted.dedup();
    Ok(sorted)
}

/// Von Neumann entropy S(ρ) = −Tr(ρ log₂ ρ) in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64, QuantifyError> {
    let values = rho.eigenvalues()?;
    let mut s = 0.0;
    for v in values {
        if v > EIGENVALUE_CLAMP {
            s -= v * v.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Rényi α-entropy S_α(ρ) = log₂ Tr(ρ^α) / (1 − α) in bits.
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64, QuantifyError> {
    if alpha <= 0.0 || alpha.is_nan() {
        return Err(QuantifyError::InvalidAlpha(alpha));
    }
    if (alpha - 1.0).abs() <= 1e-9 {
        return Err(QuantifyError::AlphaNearOne(alpha));
    }
    let values = rho.eigenvalues()?;
    let trace_pow: f64 = values
        .iter()
        .filter(|&&v| v > EIGENVALUE_CLAMP)
        .map(|v| v.powf(alpha))
        .sum();
    Ok((trace_pow.log2() / (1.0 - alpha)).max(0.0))
}

/// Quantum mutual information I(m:n) = S(ρ_m) + S(ρ_n) − S(ρ_mn) in bits.
///
/// All three reduced matrices come from the same pure state; negatives beyond
/// −1e-9 are reported as errors, smaller numerical negatives clip to 0.
pub fn mutual_information(
    state: &StateVector,
    m: SubsystemId,
    n: SubsystemId,
) -> Result<f64, QuantifyError> {
    if m == n {
        return Err(QuantifyError::SamePair(m));
    }
    let rho_mn = reduced_density(state, &[m, n])?;
    let s_m = vn_entropy(&partial_trace(&rho_mn, &[m])?)?;
    let s_n = vn_entropy(&partial_trace(&rho_mn, &[n])?)?;
    let s_mn = vn_entropy(&rho_mn)?;
    let info = s_m + s_n - s_mn;
    if info < -1e-9 {
        return Err(QuantifyError::NegativeMutualInformation { value: info });
    }
    Ok(info.max(0.0))
}

/// Entropy and mutual-information values at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyRecord {
    pub time_ns: f64,
    /// Aligned with the requested subsystem list.
    pub s_bits: Vec<f64>,
    /// Aligned with the requested pair list.
    pub mi_bits: Vec<f64>,
}

/// Per-sample entropy diagnostics along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTimeline {
    pub subsystems: Vec<SubsystemId>,
    pub pairs: Vec<(SubsystemId, SubsystemId)>,
    pub records: Vec<EntropyRecord>,
}

/// Evaluate the requested single-subsystem entropies and pairwise mutual
/// informations at every sample of a timeline.
///
/// Samples are processed in parallel; output order follows the timeline, and
/// per-sample failures carry their timestamp.
pub fn entropy_timeline(
    timeline: &Timeline,
    subsystems: &[SubsystemId],
    pairs: &[(SubsystemId, SubsystemId)],
) -> Result<EntropyTimeline, QuantifyError> {
    let records: Result<Vec<EntropyRecord>, QuantifyError> = timeline
        .times
        .par_iter()
        .zip(&timeline.states)
        .map(|(&time_ns, state)| {
            let tag = |source: QuantifyError| QuantifyError::AtSample {
                time_ns,
                source: Box::new(source),
            };
            let mut s_bits = Vec::with_capacity(subsystems.len());
            for &sub in subsystems {
                let rho = reduced_density(state, &[sub]).map_err(tag)?;
                s_bits.push(vn_entropy(&rho).map_err(tag)?);
            }
            let mut mi_bits = Vec::with_capacity(pairs.len());
            for &(m, n) in pairs {
                mi_bits.push(mutual_information(state, m, n).map_err(tag)?);
            }
            Ok(EntropyRecord {
                time_ns,
                s_bits,
                mi_bits,
            })
        })
        .collect();
    Ok(EntropyTimeline {
        subsystems: subsystems.to_vec(),
        pairs: pairs.to_vec(),
        records: records?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{OccupationLabel, SectorSpace};
    use crate::ket::parse_state_expr;
    use std::sync::Arc;

    fn chi2_space() -> Arc<SectorSpace> {
        Arc::new(SectorSpace::build_sector(2, 1, 2).unwrap())
    }

    fn entangled_pair_state(space: &Arc<SectorSpace>) -> StateVector {
        parse_state_expr("(|00100>+|01001>)/sqrt(2)", space, false).unwrap()
    }

    #[test]
    fn pure_density_has_unit_trace_and_purity() {
        let space = chi2_space();
        let state = entangled_pair_state(&space);
        let rho = density(&state);
        assert_eq!(rho.dim(), 72);
        assert!((rho.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn basis_state_density_is_single_diagonal() {
        let space = chi2_space();
        let state =
            StateVector::basis_state(Arc::clone(&space), &OccupationLabel::new(0, 0, 1, 0, 0))
                .unwrap();
        let rho = density(&state);
        let full_idx = space.tensor_index(&OccupationLabel::new(0, 0, 1, 0, 0));
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                let expected = if i == full_idx && j == full_idx {
                    1.0
                } else {
                    0.0
                };
                assert!((rho.matrix()[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn entangled_state_fields_marginal() {
        // keeping (field1, field2) of (|00100⟩+|01001⟩)/√2 gives the
        // diagonal mixture ½(|00⟩⟨00| + |11⟩⟨11|): the pump occupations
        // differ between the branches, killing the off-diagonal coherence.
        let space = chi2_space();
        let state = entangled_pair_state(&space);
        let rho = reduced_density(&state, &[SubsystemId::Field1, SubsystemId::Field2]).unwrap();
        assert_eq!(rho.dims(), &[3, 3]);
        let idx = |n1: usize, n2: usize| n1 * 3 + n2;
        for i in 0..9 {
            for j in 0..9 {
                let expected =
                    if (i, j) == (idx(0, 0), idx(0, 0)) || (i, j) == (idx(1, 1), idx(1, 1)) {
                        0.5
                    } else {
                        0.0
                    };
                assert!(
                    (rho.matrix()[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12,
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn reduced_density_agrees_with_full_contraction() {
        // the pure-state fast path and the generic index contraction are two
        // independent routes to the same reduced matrix
        let space = chi2_space();
        let state = parse_state_expr(
            "0.5|00100> + 0.5i|11000> - 0.5|01010> + 0.5|00002>",
            &space,
            false,
        )
        .unwrap();
        let full = density(&state);
        for keep in [
            vec![SubsystemId::Qubit1],
            vec![SubsystemId::FieldB],
            vec![SubsystemId::Qubit1, SubsystemId::Qubit2],
            vec![
                SubsystemId::Field1,
                SubsystemId::FieldB,
                SubsystemId::Field2,
            ],
        ] {
            let direct = reduced_density(&state, &keep).unwrap();
            let contracted = partial_trace(&full, &keep).unwrap();
            assert_eq!(direct.subsystems(), contracted.subsystems());
            for i in 0..direct.dim() {
                for j in 0..direct.dim() {
                    assert!((direct.matrix()[(i, j)] - contracted.matrix()[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn partial_trace_preserves_trace_and_positivity() {
        let space = chi2_space();
        let state = entangled_pair_state(&space);
        let rho = density(&state);
        for sub in SubsystemId::ALL {
            let reduced = partial_trace(&rho, &[sub]).unwrap();
            assert!((reduced.trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
            reduced.validate().unwrap();
            if sub.is_qubit() {
                assert_eq!(reduced.dim(), 2);
            }
        }
    }

    #[test]
    fn keep_set_errors() {
        let space = chi2_space();
        let state = entangled_pair_state(&space);
        let rho = reduced_density(&state, &[SubsystemId::Qubit1, SubsystemId::Qubit2]).unwrap();
        assert!(matches!(
            partial_trace(&rho, &[]),
            Err(QuantifyError::EmptyKeepSet)
        ));
        assert!(matches!(
            partial_trace(&rho, &[SubsystemId::Field1]),
            Err(QuantifyError::UnknownTag(SubsystemId::Field1))
        ));
    }

    #[test]
    fn vn_entropy_reference_values() {
        // pure projector
        let space = chi2_space();
        let state =
            StateVector::basis_state(Arc::clone(&space), &OccupationLabel::new(0, 0, 1, 0, 0))
                .unwrap();
        let rho = reduced_density(&state, &[SubsystemId::Qubit1]).unwrap();
        assert!(vn_entropy(&rho).unwrap().abs() < 1e-12);

        // maximally mixed qubit: 1 bit
        let mixed = DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
            ])),
            subsystems: vec![SubsystemId::Qubit1],
            dims: vec![2],
        };
        assert!((vn_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);

        // diag(0.9, 0.1): −0.9·log2(0.9) − 0.1·log2(0.1)
        let skewed = DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.9, 0.0),
                C64::new(0.1, 0.0),
            ])),
            subsystems: vec![SubsystemId::Qubit1],
            dims: vec![2],
        };
        let expected = -0.9f64 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert!((expected - 0.468996).abs() < 1e-6);
        assert!((vn_entropy(&skewed).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn renyi_reference_values() {
        let mixed = DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.5, 0.0),
                C64::new(0.5, 0.0),
            ])),
            subsystems: vec![SubsystemId::Qubit1],
            dims: vec![2],
        };
        // collision entropy of the uniform pair is 1 bit
        assert!((renyi_entropy(&mixed, 2.0).unwrap() - 1.0).abs() < 1e-12);

        let skewed = DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(0.7, 0.0),
                C64::new(0.3, 0.0),
            ])),
            subsystems: vec![SubsystemId::Qubit1],
            dims: vec![2],
        };
        // α → 1 approaches the von Neumann entropy
        let s = vn_entropy(&skewed).unwrap();
        for alpha in [1.0 - 1e-4, 1.0 + 1e-4] {
            assert!((renyi_entropy(&skewed, alpha).unwrap() - s).abs() <= 1e-3);
        }
        // pure state: 0 for any α
        let pure = DensityMatrix {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
            ])),
            subsystems: vec![SubsystemId::Qubit1],
            dims: vec![2],
        };
        for alpha in [0.5, 2.0, 3.0] {
            assert!(renyi_entropy(&pure, alpha).unwrap().abs() < 1e-12);
        }

        assert!(matches!(
            renyi_entropy(&skewed, 0.0),
            Err(QuantifyError::InvalidAlpha(_))
        ));
        assert!(matches!(
            renyi_entropy(&skewed, 1.0 + 1e-12),
            Err(QuantifyError::AlphaNearOne(_))
        ));
    }

    #[test]
    fn entangled_initial_state_structure() {
        let space = chi2_space();
        let state = entangled_pair_state(&space);

        // qubit marginals pure, field marginals maximally mixed
        for (sub, expected) in [
            (SubsystemId::Qubit1, 0.0),
            (SubsystemId::Qubit2, 0.0),
            (SubsystemId::Field1, 1.0),
            (SubsystemId::FieldB, 1.0),
            (SubsystemId::Field2, 1.0),
        ] {
            let s = vn_entropy(&reduced_density(&state, &[sub]).unwrap()).unwrap();
            assert!((s - expected).abs() < 1e-9, "{sub}: S = {s}");
        }

        assert!(
            (mutual_information(&state, SubsystemId::Field1, SubsystemId::Field2).unwrap() - 1.0)
                .abs()
                < 1e-9
        );
        assert!(
            mutual_information(&state, SubsystemId::Qubit1, SubsystemId::Qubit2)
                .unwrap()
                .abs()
                < 1e-9
        );
    }

    #[test]
    fn product_state_has_no_correlations() {
        let space = chi2_space();
        let state =
            StateVector::basis_state(Arc::clone(&space), &OccupationLabel::new(0, 0, 1, 0, 0))
                .unwrap();
        for (m, n) in [
            (SubsystemId::Qubit1, SubsystemId::Qubit2),
            (SubsystemId::Field1, SubsystemId::FieldB),
            (SubsystemId::FieldB, SubsystemId::Field2),
        ] {
            assert!(mutual_information(&state, m, n).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_information_is_symmetric() {
        let space = chi2_space();
        let state = parse_state_expr(
            "0.5|00100> + 0.5i|11000> - 0.5|01010> + 0.5|00002>",
            &space,
            false,
        )
        .unwrap();
        for (m, n) in [
            (SubsystemId::Qubit1, SubsystemId::Field1),
            (SubsystemId::Field1, SubsystemId::Field2),
        ] {
            let a = mutual_information(&state, m, n).unwrap();
            let b = mutual_information(&state, n, m).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(
            mutual_information(&state, SubsystemId::Qubit1, SubsystemId::Qubit1),
            Err(QuantifyError::SamePair(SubsystemId::Qubit1))
        ));
    }

    #[test]
    fn bipartition_mutual_information_doubles_entropy() {
        // I(m : complement) = 2·S(ρ_m) for a pure global state
        let space = chi2_space();
        let state = entangled_pair_state(&space);
        let m = SubsystemId::Field1;
        let complement: Vec<SubsystemId> =
            SubsystemId::ALL.into_iter().filter(|s| *s != m).collect();
        let s_m = vn_entropy(&reduced_density(&state, &[m]).unwrap()).unwrap();
        let s_rest = vn_entropy(&reduced_density(&state, &complement).unwrap()).unwrap();
        let s_total = vn_entropy(&density(&state)).unwrap();
        let info = s_m + s_rest - s_total;
        assert!((info - 2.0 * s_m).abs() < 1e-9);
    }
}
