//! Local coherence, correlation and accessible-coherence measures of a
//! two-photon state, and the CHSH witness built from the correlation tensor.
//!
//! With the Pauli expansion
//!
//! ```text
//! ρ = ¼ (I⊗I + a·σ⊗I + I⊗b·σ + Σ t_ij σ_i⊗σ_j)
//! ```
//!
//! the local coherences are D_A² = |a|²/2, D_B² = |b|²/2, the correlation is
//! T² = (1 + Σ t_ij²)/4, and S² = (D_A² + D_B²)/2 + T² equals Tr ρ² for every
//! two-qubit state. Index convention: σ_1 = X, σ_2 = Y, σ_3 = Z.
//!
//! T² is bounded below by 1/4 (maximally mixed state); the value 1/2 is the
//! minimum over pure product states only.

use nalgebra::Matrix3;

use crate::linalg::{c, eigenvalues_sym3, kron, pauli, Mat4};
use crate::state::{DensityMatrix, SingleQubitState, Subsystem, TwoQubitState};

/// CHSH local-realist bound.
pub const CLASSICAL_CHSH_BOUND: f64 = 2.0;
/// T² above which the CHSH witness certifies nonlocality.
pub const WITNESS_T2_THRESHOLD: f64 = 0.625;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationDecomposition {
    /// ⟨σ_i ⊗ I⟩
    pub bloch_a: [f64; 3],
    /// ⟨I ⊗ σ_j⟩
    pub bloch_b: [f64; 3],
    /// t_ij = ⟨σ_i ⊗ σ_j⟩
    pub tensor_t: Matrix3<f64>,
}

impl CorrelationDecomposition {
    /// Rebuilds the density matrix from the 15 Pauli expectations.
    pub fn reconstruct(&self) -> Mat4 {
        let id = pauli(0);
        let mut m = Mat4::identity();
        for i in 0..3 {
            m += kron(&pauli(i + 1), &id) * c(self.bloch_a[i], 0.0);
            m += kron(&id, &pauli(i + 1)) * c(self.bloch_b[i], 0.0);
            for j in 0..3 {
                m += kron(&pauli(i + 1), &pauli(j + 1)) * c(self.tensor_t[(i, j)], 0.0);
            }
        }
        m * c(0.25, 0.0)
    }

    /// Σ t_ij².
    pub fn correlation_norm_sq(&self) -> f64 {
        self.tensor_t.norm_squared()
    }
}

/// All 15 Pauli expectation values of `rho`.
pub fn decompose(rho: &TwoQubitState) -> CorrelationDecomposition {
    let id = pauli(0);
    let mut bloch_a = [0.0; 3];
    let mut bloch_b = [0.0; 3];
    let mut tensor_t = Matrix3::zeros();
    for i in 0..3 {
        bloch_a[i] = rho.expectation(&kron(&pauli(i + 1), &id));
        bloch_b[i] = rho.expectation(&kron(&id, &pauli(i + 1)));
        for j in 0..3 {
            tensor_t[(i, j)] = rho.expectation(&kron(&pauli(i + 1), &pauli(j + 1)));
        }
    }
    CorrelationDecomposition {
        bloch_a,
        bloch_b,
        tensor_t,
    }
}

/// D_i² = Tr ρ_i² − 1/2, the squared Poincaré-sphere radius over two.
pub fn local_coherence_sq(rho_i: &SingleQubitState) -> f64 {
    rho_i.purity() - 0.5
}

/// D² = (D_A² + D_B²)/2.
pub fn mean_coherence_sq(rho: &TwoQubitState) -> f64 {
    let da = local_coherence_sq(&rho.partial_trace(Subsystem::A));
    let db = local_coherence_sq(&rho.partial_trace(Subsystem::B));
    (da + db) / 2.0
}

/// T² = (1 + Σ t_ij²)/4.
pub fn correlation_t2(rho: &TwoQubitState) -> f64 {
    (1.0 + decompose(rho).correlation_norm_sq()) / 4.0
}

/// S² = D² + T².
pub fn accessible_coherence_s2(rho: &TwoQubitState) -> f64 {
    mean_coherence_sq(rho) + correlation_t2(rho)
}

/// Coherence quantities of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceSummary {
    pub d_a_sq: f64,
    pub d_b_sq: f64,
    pub t2: f64,
    pub purity: f64,
}

impl CoherenceSummary {
    pub fn of(rho: &TwoQubitState) -> Self {
        Self {
            d_a_sq: local_coherence_sq(&rho.partial_trace(Subsystem::A)),
            d_b_sq: local_coherence_sq(&rho.partial_trace(Subsystem::B)),
            t2: correlation_t2(rho),
            purity: rho.purity(),
        }
    }

    /// Degree of polarization D_A = √(D_A²).
    pub fn d_a(&self) -> f64 {
        self.d_a_sq.max(0.0).sqrt()
    }

    pub fn d_b(&self) -> f64 {
        self.d_b_sq.max(0.0).sqrt()
    }

    pub fn d2(&self) -> f64 {
        (self.d_a_sq + self.d_b_sq) / 2.0
    }

    pub fn s2(&self) -> f64 {
        self.d2() + self.t2
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessReport {
    pub t2: f64,
    /// Tr R = 4T² − 1
    pub trace_r: f64,
    pub min_eig_r: f64,
    /// Maximal CHSH value 2√(Tr R − min eig R).
    pub b: f64,
    /// 2√((8T² − 2)/3), valid since min eig R ≤ Tr R / 3.
    pub b_lower_bound: f64,
    pub nonlocal_witnessed: bool,
    /// A radicand came out negative from rounding and was set to zero.
    pub radicand_clamped: bool,
}

/// Horodecki matrix R = tᵀt. Its trace is Σ t_ij² and it is diagonal with
/// entries t_ii² whenever t is diagonal.
pub fn horodecki_matrix(d: &CorrelationDecomposition) -> Matrix3<f64> {
    d.tensor_t.transpose() * d.tensor_t
}

pub fn witness(rho: &TwoQubitState) -> WitnessReport {
    let d = decompose(rho);
    let r = horodecki_matrix(&d);
    let trace_r = r.trace();
    let t2 = (1.0 + trace_r) / 4.0;
    let min_eig_r = eigenvalues_sym3(&r)[0];

    let mut clamped = false;
    let mut root = |x: f64| {
        if x < 0.0 {
            clamped = true;
            0.0
        } else {
            x.sqrt()
        }
    };
    let b = 2.0 * root(trace_r - min_eig_r);
    let b_lower_bound = 2.0 * root((8.0 * t2 - 2.0) / 3.0);
    WitnessReport {
        t2,
        trace_r,
        min_eig_r,
        b,
        b_lower_bound,
        nonlocal_witnessed: t2 > WITNESS_T2_THRESHOLD,
        radicand_clamped: clamped,
    }
}

/// CHSH lower bound 2√((8T² − 2)/3) as a function of T² alone.
pub fn chsh_lower_bound(t2: f64) -> f64 {
    2.0 * ((8.0 * t2 - 2.0) / 3.0).max(0.0).sqrt()
}
