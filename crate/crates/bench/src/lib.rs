//! Fixtures shared by the benchmarks.

use hsstab::linalg::haar_unitary;
use hsstab::presentation::{GroupPresentation, UnitaryTuple};
use hsstab::stabilize::{perturb, sample_exact_rep};
use hsstab::ComplexMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const DIMS: [usize; 3] = [16, 64, 128];

pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// An exact representation of `preset` moved by `eps`.
pub fn noisy_tuple(
    preset: &str,
    dim: usize,
    eps: f64,
    seed: u64,
) -> (GroupPresentation, UnitaryTuple) {
    let p = GroupPresentation::parse_preset(preset).expect("preset");
    let exact = sample_exact_rep(&p, dim, seed).expect("sample");
    let noisy = perturb(&exact, eps, seed.wrapping_add(1)).expect("perturb");
    (p, noisy)
}
