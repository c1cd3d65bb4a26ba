//! Pure and mixed states of one and two polarization qubits.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eigenvalues2, eigenvalues4, kron, kron_vec, max_abs_diff, project_to_density,
    trace_product2, trace_product4, Mat2, Mat4, Vec2, Vec4, C64, HERMITIAN_TOL, I, ONE, ZERO,
};

/// Tolerance on unit norm for pure states and unit trace for density matrices.
pub const NORM_TOL: f64 = 1e-12;

/// Selects one of the two photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subsystem {
    A,
    B,
}

/// Single-photon polarization kets used throughout: rectilinear (H/V),
/// diagonal (D/A) and circular (R/L).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl Polarization {
    pub const ALL: [Polarization; 6] = [
        Polarization::H,
        Polarization::V,
        Polarization::D,
        Polarization::A,
        Polarization::R,
        Polarization::L,
    ];

    /// Normalized ket. D = (H+V)/√2, R = (H+iV)/√2, so D and R are the +1
    /// eigenvectors of σ_x and σ_y.
    pub fn ket(self) -> Vec2 {
        let s = c(FRAC_1_SQRT_2, 0.0);
        match self {
            Polarization::H => Vec2::new(ONE, ZERO),
            Polarization::V => Vec2::new(ZERO, ONE),
            Polarization::D => Vec2::new(s, s),
            Polarization::A => Vec2::new(s, -s),
            Polarization::R => Vec2::new(s, s * I),
            Polarization::L => Vec2::new(s, -s * I),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
            Polarization::D => 'D',
            Polarization::A => 'A',
            Polarization::R => 'R',
            Polarization::L => 'L',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.symbol() == ch.to_ascii_uppercase())
    }
}

/// Normalized two-photon ket in the basis (|HH⟩, |HV⟩, |VH⟩, |VV⟩).
#[derive(Debug, Clone, PartialEq)]
pub struct PureState2Q {
    amplitudes: Vec4,
}

impl PureState2Q {
    pub fn new(amplitudes: Vec4) -> Result<Self> {
        let n2 = amplitudes.norm_squared();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec4) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n * n));
        }
        Ok(Self {
            amplitudes: amplitudes / c(n, 0.0),
        })
    }

    pub fn product(a: &Vec2, b: &Vec2) -> Result<Self> {
        Self::normalized(kron_vec(a, b))
    }

    pub fn from_polarizations(a: Polarization, b: Polarization) -> Self {
        Self {
            amplitudes: kron_vec(&a.ket(), &b.ket()),
        }
    }

    /// |++⟩ with |+⟩ = (|H⟩ + |V⟩)/√2.
    pub fn plus_plus() -> Self {
        Self::from_polarizations(Polarization::D, Polarization::D)
    }

    pub fn phi_plus() -> Self {
        Self::bell(0, 3, 1.0)
    }

    pub fn phi_minus() -> Self {
        Self::bell(0, 3, -1.0)
    }

    pub fn psi_plus() -> Self {
        Self::bell(1, 2, 1.0)
    }

    pub fn psi_minus() -> Self {
        Self::bell(1, 2, -1.0)
    }

    fn bell(first: usize, second: usize, sign: f64) -> Self {
        let mut amplitudes = Vec4::zeros();
        amplitudes[first] = c(FRAC_1_SQRT_2, 0.0);
        amplitudes[second] = c(sign * FRAC_1_SQRT_2, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &Vec4 {
        &self.amplitudes
    }

    pub fn evolve(&self, u: &Mat4) -> Result<Self> {
        Self::new(u * self.amplitudes)
    }

    pub fn density(&self) -> TwoQubitState {
        TwoQubitState::from_pure(self)
    }
}

/// Common read-only view over one- and two-qubit density matrices.
pub trait DensityMatrix {
    fn dimension(&self) -> usize;
    /// Tr[ρ²].
    fn purity(&self) -> f64;
    /// Ascending eigenvalues.
    fn spectrum(&self) -> Vec<f64>;
}

/// Tr[ρ²] of a one- or two-qubit state.
pub fn purity<S: DensityMatrix + ?Sized>(rho: &S) -> f64 {
    rho.purity()
}

/// Two-photon density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Mat4,
}

impl TwoQubitState {
    /// Validates and stores `matrix`. The stored copy is exactly Hermitian.
    pub fn new(matrix: Mat4) -> Result<Self> {
        let defect = max_abs_diff(&matrix, &matrix.adjoint());
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let matrix = (matrix + matrix.adjoint()) * c(0.5, 0.0);
        let min = eigenvalues4(&matrix)[0];
        if min < -HERMITIAN_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix })
    }

    /// Nearest density matrix in the eigenvalue-clipping sense: Hermitian
    /// part, negative eigenvalues set to zero, trace renormalized.
    pub fn projected(matrix: &Mat4) -> Self {
        Self {
            matrix: project_to_density(matrix),
        }
    }

    pub fn from_pure(psi: &PureState2Q) -> Self {
        let v = psi.amplitudes();
        let m = v * v.adjoint();
        Self {
            matrix: (m + m.adjoint()) * c(0.5, 0.0),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat4::identity() * c(0.25, 0.0),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    /// U ρ U†.
    pub fn evolve(&self, u: &Mat4) -> Self {
        let m = u * self.matrix * u.adjoint();
        Self {
            matrix: (m + m.adjoint()) * c(0.5, 0.0),
        }
    }

    /// (1 − w) ρ + w σ.
    pub fn mix(&self, other: &TwoQubitState, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::OutOfRange {
                field: "weight",
                value: weight,
                reason: "mixing weight must lie in [0, 1]",
            });
        }
        Ok(Self {
            matrix: self.matrix * c(1.0 - weight, 0.0) + other.matrix * c(weight, 0.0),
        })
    }

    /// (1 − w) ρ + w I/4.
    pub fn with_white_noise(&self, weight: f64) -> Result<Self> {
        self.mix(&Self::maximally_mixed(), weight)
    }

    /// Tr[ρ O] for Hermitian O.
    pub fn expectation(&self, observable: &Mat4) -> f64 {
        trace_product4(&self.matrix, observable)
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn fidelity_with_pure(&self, psi: &PureState2Q) -> f64 {
        let v = psi.amplitudes();
        (v.adjoint() * self.matrix * v)[(0, 0)].re
    }

    /// Uhlmann fidelity (Tr √(√ρ σ √ρ))².
    pub fn fidelity(&self, other: &TwoQubitState) -> f64 {
        let sqrt_rho = psd_sqrt(&self.matrix);
        let inner = sqrt_rho * other.matrix * sqrt_rho;
        let inner = (inner + inner.adjoint()) * c(0.5, 0.0);
        let root_trace: f64 = inner
            .symmetric_eigenvalues()
            .iter()
            .map(|v| v.max(0.0).sqrt())
            .sum();
        root_trace * root_trace
    }

    pub fn partial_trace(&self, keep: Subsystem) -> SingleQubitState {
        partial_trace(self, keep)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        eigenvalues4(&self.matrix)
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |r, col| self.matrix[(r, col)])
    }
}

impl DensityMatrix for TwoQubitState {
    fn dimension(&self) -> usize {
        4
    }

    fn purity(&self) -> f64 {
        trace_product4(&self.matrix, &self.matrix)
    }

    fn spectrum(&self) -> Vec<f64> {
        self.eigenvalues().to_vec()
    }
}

/// Single-photon polarization density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleQubitState {
    matrix: Mat2,
}

impl SingleQubitState {
    pub fn new(matrix: Mat2) -> Result<Self> {
        let defect = max_abs_diff(&matrix, &matrix.adjoint());
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidTrace(trace.re));
        }
        let matrix = (matrix + matrix.adjoint()) * c(0.5, 0.0);
        let [low, high] = eigenvalues2(&matrix);
        if low < -HERMITIAN_TOL || high > 1.0 + HERMITIAN_TOL {
            return Err(Error::NotPositive(low));
        }
        Ok(Self { matrix })
    }

    /// (I + r·σ)/2 for a Bloch vector with |r| ≤ 1.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1.0 + HERMITIAN_TOL {
            return Err(Error::OutOfRange {
                field: "bloch",
                value: len,
                reason: "Bloch vector length must not exceed 1",
            });
        }
        let m = Mat2::new(
            c((1.0 + r[2]) / 2.0, 0.0),
            c(r[0] / 2.0, -r[1] / 2.0),
            c(r[0] / 2.0, r[1] / 2.0),
            c((1.0 - r[2]) / 2.0, 0.0),
        );
        Ok(Self { matrix: m })
    }

    pub fn from_ket(ket: &Vec2) -> Result<Self> {
        let n = ket.norm();
        if n == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        let v = ket / c(n, 0.0);
        Ok(Self {
            matrix: v * v.adjoint(),
        })
    }

    pub fn pure(p: Polarization) -> Self {
        let v = p.ket();
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat2::identity() * c(0.5, 0.0),
        }
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// (⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩).
    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.matrix;
        [
            2.0 * m[(1, 0)].re,
            2.0 * m[(1, 0)].im,
            (m[(0, 0)] - m[(1, 1)]).re,
        ]
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        eigenvalues2(&self.matrix)
    }
}

impl DensityMatrix for SingleQubitState {
    fn dimension(&self) -> usize {
        2
    }

    fn purity(&self) -> f64 {
        trace_product2(&self.matrix, &self.matrix)
    }

    fn spectrum(&self) -> Vec<f64> {
        self.eigenvalues().to_vec()
    }
}

/// ρ_A ⊗ ρ_B with qubit A as the slow index.
pub fn tensor_product(a: &SingleQubitState, b: &SingleQubitState) -> TwoQubitState {
    TwoQubitState {
        matrix: kron(&a.matrix, &b.matrix),
    }
}

/// Reduced state of the kept photon.
pub fn partial_trace(rho: &TwoQubitState, keep: Subsystem) -> SingleQubitState {
    let m = &rho.matrix;
    let mut out = Mat2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = match keep {
                // ρ_A[i,j] = Σ_k ρ[(i,k),(j,k)]
                Subsystem::A => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
                // ρ_B[i,j] = Σ_k ρ[(k,i),(k,j)]
                Subsystem::B => m[(i, j)] + m[(2 + i, 2 + j)],
            };
        }
    }
    SingleQubitState {
        matrix: (out + out.adjoint()) * c(0.5, 0.0),
    }
}

fn psd_sqrt(m: &Mat4) -> Mat4 {
    let sym = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut out = Mat4::zeros();
    for k in 0..4 {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        out += v * v.adjoint() * c(lam, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_mat4_close(a: &Mat4, b: &Mat4, tol: f64) {
        let d = max_abs_diff(a, b);
        assert!(d < tol, "matrices differ by {d:e}\n{a}\n{b}");
    }

    fn assert_mat2_close(a: &Mat2, b: &Mat2, tol: f64) {
        let d = max_abs_diff(a, b);
        assert!(d < tol, "matrices differ by {d:e}\n{a}\n{b}");
    }

    #[test]
    fn tensor_product_examples() {
        let hh = tensor_product(
            &SingleQubitState::pure(Polarization::H),
            &SingleQubitState::pure(Polarization::H),
        );
        let mut expected = Mat4::zeros();
        expected[(0, 0)] = ONE;
        assert_mat4_close(hh.matrix(), &expected, 1e-15);

        let mixed = tensor_product(
            &SingleQubitState::maximally_mixed(),
            &SingleQubitState::maximally_mixed(),
        );
        assert_mat4_close(
            mixed.matrix(),
            TwoQubitState::maximally_mixed().matrix(),
            1e-15,
        );

        let pp = tensor_product(
            &SingleQubitState::pure(Polarization::D),
            &SingleQubitState::pure(Polarization::D),
        );
        assert_mat4_close(pp.matrix(), &Mat4::from_element(c(0.25, 0.0)), 1e-15);
    }

    #[test]
    fn tensor_product_is_slow_a() {
        // |H><H| ⊗ |V><V| is |HV><HV|, index 1.
        let hv = tensor_product(
            &SingleQubitState::pure(Polarization::H),
            &SingleQubitState::pure(Polarization::V),
        );
        assert_eq!(hv.matrix()[(1, 1)], ONE);
        assert_eq!(
            hv,
            PureState2Q::from_polarizations(Polarization::H, Polarization::V).density()
        );
    }

    #[test]
    fn partial_trace_examples() {
        let bell = PureState2Q::phi_plus().density();
        assert_mat2_close(
            bell.partial_trace(Subsystem::A).matrix(),
            SingleQubitState::maximally_mixed().matrix(),
            1e-15,
        );
        let hh = PureState2Q::from_polarizations(Polarization::H, Polarization::H).density();
        assert_mat2_close(
            hh.partial_trace(Subsystem::B).matrix(),
            SingleQubitState::pure(Polarization::H).matrix(),
            1e-15,
        );
        let pp = PureState2Q::plus_plus().density();
        assert_mat2_close(
            pp.partial_trace(Subsystem::A).matrix(),
            SingleQubitState::pure(Polarization::D).matrix(),
            1e-15,
        );
    }

    #[test]
    fn partial_trace_distinguishes_subsystems() {
        let hv = PureState2Q::from_polarizations(Polarization::H, Polarization::V).density();
        assert_eq!(hv.partial_trace(Subsystem::A).bloch(), [0.0, 0.0, 1.0]);
        assert_eq!(hv.partial_trace(Subsystem::B).bloch(), [0.0, 0.0, -1.0]);
    }

    #[test]
    fn purity_examples() {
        assert!((purity(&TwoQubitState::maximally_mixed()) - 0.25).abs() < 1e-15);
        assert!((purity(&PureState2Q::psi_minus().density()) - 1.0).abs() < 1e-12);
        let werner = PureState2Q::phi_plus()
            .density()
            .with_white_noise(0.1)
            .unwrap();
        // p² + p(1−p)/2 + (1−p)²/4 at p = 0.9
        assert!((purity(&werner) - 0.8575).abs() < 1e-12);
        assert!((purity(&SingleQubitState::maximally_mixed()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spectrum_of_singlet_projector() {
        let vals = PureState2Q::psi_minus().density().eigenvalues();
        for (v, e) in vals.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn polarization_kets_are_pauli_eigenvectors() {
        use crate::linalg::pauli;
        let cases = [
            (Polarization::H, 3, 1.0),
            (Polarization::V, 3, -1.0),
            (Polarization::D, 1, 1.0),
            (Polarization::A, 1, -1.0),
            (Polarization::R, 2, 1.0),
            (Polarization::L, 2, -1.0),
        ];
        for (p, k, sign) in cases {
            let v = p.ket();
            let sv = pauli(k) * v;
            assert!((sv - v * c(sign, 0.0)).norm() < 1e-15, "{p:?}");
            assert_eq!(Polarization::from_symbol(p.symbol()), Some(p));
        }
    }

    #[test]
    fn construction_rejects_invalid_matrices() {
        let mut m = Mat4::identity() * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(TwoQubitState::new(m), Err(Error::NotHermitian(_))));

        let m = Mat4::identity() * c(0.3, 0.0);
        assert!(matches!(TwoQubitState::new(m), Err(Error::InvalidTrace(_))));

        let m = Mat4::from_diagonal(&Vec4::new(c(0.7, 0.0), c(0.5, 0.0), c(-0.2, 0.0), ZERO));
        assert!(matches!(TwoQubitState::new(m), Err(Error::NotPositive(_))));

        assert!(matches!(
            PureState2Q::new(Vec4::new(ONE, ONE, ZERO, ZERO)),
            Err(Error::NotNormalized(_))
        ));
        assert!(SingleQubitState::from_bloch([0.8, 0.8, 0.0]).is_err());
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.3, -0.4, 0.5];
        let s = SingleQubitState::from_bloch(r).unwrap();
        let back = s.bloch();
        for k in 0..3 {
            assert!((back[k] - r[k]).abs() < 1e-15);
        }
        // D = |r|²/2 + 1/2
        assert!((s.purity() - (0.5 + 0.5 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn fidelity_agrees_with_pure_overlap() {
        let psi = PureState2Q::phi_plus();
        let rho = psi.density().with_white_noise(0.2).unwrap();
        let f1 = rho.fidelity_with_pure(&psi);
        let f2 = rho.fidelity(&psi.density());
        assert!((f1 - 0.85).abs() < 1e-12);
        assert!((f1 - f2).abs() < 1e-10);
    }
}
