//! Benchmark fixtures.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ramsey_core::families::{linear_order, random_graph};
use ramsey_core::indiscernibles::IndexedSequence;
use ramsey_core::Structure;

/// Seeded random graphs on `n` vertices.
pub fn graphs(n: usize, count: usize, seed: u64) -> Vec<Structure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_graph(n, 0.5, &mut rng)).collect()
}

/// A width-1 sequence indexed by `LO_len` over a random graph on `n` vertices.
pub fn vertex_sequence(len: usize, n: usize, seed: u64) -> IndexedSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_graph(n, 0.5, &mut rng);
    let tuples = (0..len).map(|_| vec![rng.gen_range(0..n)]).collect();
    IndexedSequence::new(linear_order(len), Arc::new(g), 1, tuples).expect("well-formed sequence")
}
