//! Seeded Haar sampling of states and unitaries.
//!
//! Every sampler takes an explicit generator; the `seed`-taking wrappers build
//! a fresh ChaCha stream so results are reproducible across threads.

use nalgebra::{DMatrix, SMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, Mat2, Mat4, Vec4, C64};
use crate::state::{PureState2Q, TwoQubitState};

/// Generator for stream `stream` of root seed `seed`. Distinct streams of the
/// same seed are independent.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for task `index` of a run seeded with `root` (SplitMix64 mix).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-uniform pure state on C⁴.
pub fn haar_pure_state<R: Rng + ?Sized>(rng: &mut R) -> PureState2Q {
    loop {
        let v = Vec4::from_fn(|_, _| complex_normal(rng));
        if let Ok(psi) = PureState2Q::normalized(v) {
            return psi;
        }
    }
}

/// Haar-random N×N unitary: QR of a complex Ginibre matrix with the phases of
/// R's diagonal absorbed into Q.
pub fn haar_unitary<const N: usize, R: Rng + ?Sized>(rng: &mut R) -> SMatrix<C64, N, N> {
    let g = DMatrix::<C64>::from_fn(N, N, |_, _| complex_normal(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    SMatrix::<C64, N, N>::from_fn(|row, col| {
        let d = r[(col, col)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        q[(row, col)] * phase
    })
}

pub fn haar_unitary4<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    haar_unitary::<4, R>(rng)
}

pub fn haar_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    haar_unitary::<2, R>(rng)
}

/// Mixed state from the induced measure: reduced state of a Haar-random pure
/// state on C⁴ ⊗ C^k. Rank is min(4, k); k = 1 gives a pure state.
pub fn induced_mixed_state<R: Rng + ?Sized>(rng: &mut R, ancilla_dim: usize) -> TwoQubitState {
    let k = ancilla_dim.max(1);
    let g = DMatrix::<C64>::from_fn(4, k, |_, _| complex_normal(rng));
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    let m = Mat4::from_fn(|r, col| gg[(r, col)] / tr);
    TwoQubitState::projected(&m)
}

/// Mixed state from the doubled-space induced measure (ancilla dimension 4).
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    induced_mixed_state(rng, 4)
}

/// State of random rank 1..=4, so pure and rank-deficient states are covered.
pub fn random_state_any_rank<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let k = rng.random_range(1..=4);
    induced_mixed_state(rng, k)
}

pub fn random_pure_state_2q(seed: u64) -> PureState2Q {
    haar_pure_state(&mut rng_for(seed, 0))
}

pub fn random_global_unitary(seed: u64) -> Mat4 {
    haar_unitary4(&mut rng_for(seed, 0))
}
