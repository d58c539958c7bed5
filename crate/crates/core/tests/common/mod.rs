//! Seeded corpus of valid systems shared by the integration suites.
#![allow(dead_code)]

use num_complex::Complex64;
use qrealize::linalg::{vstack, ComplexMatrix, RealMatrix};
use qrealize::synthesis::oscillator_matrices;
use qrealize::{fixtures, LtiSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x5eed_2024;
pub const CORPUS_SIZE: usize = 100;
pub const STATE_SIZES: [usize; 5] = [2, 4, 6, 8, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Dense random `(A, B, C)`.
    Generic,
    /// Built from an oscillator with no extra noise rows, so `S̃ = 0`.
    Realizable,
    /// Built from an oscillator with `noise_rows` extra coupling rows, so
    /// `rank S̃ ≤ 2·noise_rows`.
    LowRank { noise_rows: usize },
}

#[derive(Debug, Clone)]
pub struct Case {
    pub label: String,
    pub kind: Kind,
    pub sys: LtiSystem,
}

fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RealMatrix {
    RealMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

fn complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

pub fn oscillator_system(
    rng: &mut ChaCha8Rng,
    n: usize,
    n_u: usize,
    noise_rows: usize,
) -> LtiSystem {
    let half = uniform(rng, n, n);
    let r = (&half + half.transpose()) * 0.5;
    let out = complex(rng, n_u / 2, n);
    let noise = complex(rng, noise_rows, n);
    let inp = complex(rng, n_u / 2, n);
    let coupling = vstack(&[&out, &noise, &inp]).unwrap();
    oscillator_matrices(&r, &coupling, n_u, n_u)
        .unwrap()
        .system()
        .unwrap()
}

pub fn random_case(index: usize, seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let n = STATE_SIZES[index % STATE_SIZES.len()];
    let n_u = 2 * rng.gen_range(1..=3);
    let kind = match (index / STATE_SIZES.len()) % 4 {
        0 | 1 => Kind::Generic,
        2 => Kind::Realizable,
        _ => Kind::LowRank {
            noise_rows: rng.gen_range(1..=(n / 2).max(1)),
        },
    };
    let sys = match kind {
        Kind::Generic => LtiSystem::new(
            uniform(&mut rng, n, n),
            uniform(&mut rng, n, n_u),
            uniform(&mut rng, n_u, n),
        )
        .unwrap(),
        Kind::Realizable => oscillator_system(&mut rng, n, n_u, 0),
        Kind::LowRank { noise_rows } => oscillator_system(&mut rng, n, n_u, noise_rows),
    };
    Case {
        label: format!("random#{index} n={n} n_u={n_u} {kind:?}"),
        kind,
        sys,
    }
}

pub fn random_corpus() -> Vec<Case> {
    (0..CORPUS_SIZE)
        .map(|i| random_case(i, CORPUS_SEED))
        .collect()
}

pub fn fixture_cases() -> Vec<Case> {
    vec![
        Case {
            label: "reference".into(),
            kind: Kind::Generic,
            sys: fixtures::reference_system(),
        },
        Case {
            label: "trivial".into(),
            kind: Kind::Realizable,
            sys: fixtures::trivial_system(),
        },
        Case {
            label: "small".into(),
            kind: Kind::Generic,
            sys: fixtures::small_system(),
        },
    ]
}

/// Fixtures followed by the seeded random corpus.
pub fn full_corpus() -> Vec<Case> {
    let mut all = fixture_cases();
    all.extend(random_corpus());
    all
}
