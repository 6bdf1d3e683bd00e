//! Small reference models: cycles, complete graphs, Schreier graphs of
//! random permutations, and a few triangulated surfaces.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::garland::{build_complex, Complex2, GarlandError};
use crate::relation::{FiniteRelation, Graphing};
use crate::walks::{cayley_action_walk, regular_walk, RandomWalk, WalkError};

/// Edges of the cycle `C_n`.
pub fn cycle_graphing(n: usize) -> Graphing {
    Graphing::new((0..n).map(|i| (i, (i + 1) % n))).with_degree_bound(2)
}

/// Regular walk on `C_n` (`n ≥ 3`) with uniform masses: the simple random walk.
pub fn cycle_walk(n: usize) -> Result<RandomWalk, WalkError> {
    let rel = Arc::new(FiniteRelation::uniform(&vec![0; n])?);
    regular_walk(rel, &cycle_graphing(n))
}

/// Regular walk on `K_n` with uniform masses.
pub fn complete_walk(n: usize) -> Result<RandomWalk, WalkError> {
    let rel = Arc::new(FiniteRelation::uniform(&vec![0; n])?);
    let k = Graphing::new((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).with_degree_bound(n - 1);
    regular_walk(rel, &k)
}

/// `count` uniformly random permutations of `0..n`, seeded.
pub fn random_permutations(n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            p
        })
        .collect()
}

pub fn inverse_permutation(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &j) in p.iter().enumerate() {
        inv[j] = i;
    }
    inv
}

/// Schreier walk of `k` seeded random permutations and their inverses, each
/// with probability `1/2k`.
pub fn schreier_walk(n: usize, k: usize, seed: u64) -> Result<(Arc<FiniteRelation>, RandomWalk), WalkError> {
    let perms = random_permutations(n, k, seed);
    let mut gens = perms.clone();
    gens.extend(perms.iter().map(|p| inverse_permutation(p)));
    let probs = vec![1.0 / (2 * k) as f64; 2 * k];
    cayley_action_walk(n, &gens, &probs)
}

fn normalized(masses: Option<&[f64]>, n: usize) -> Vec<f64> {
    masses.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; n])
}

/// Boundary of the 3-simplex; every link is a triangle.
pub fn tetrahedron(masses: &[f64]) -> Result<Complex2, GarlandError> {
    build_complex(masses, &[[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
}

/// Boundary of the octahedron on `0..6`, antipodes `(0,1)`, `(2,3)`, `(4,5)`;
/// every link is a 4-cycle.
pub fn octahedron(masses: &[f64]) -> Result<Complex2, GarlandError> {
    let mut tris = Vec::new();
    for a in [0, 1] {
        for b in [2, 3] {
            for c in [4, 5] {
                tris.push([a, b, c]);
            }
        }
    }
    build_complex(masses, &tris)
}

/// The 7-vertex triangulation of the torus; every link is a 6-cycle.
pub fn seven_vertex_torus(masses: Option<&[f64]>) -> Result<Complex2, GarlandError> {
    let tris: Vec<[usize; 3]> = (0..7)
        .flat_map(|i| [[i, (i + 1) % 7, (i + 3) % 7], [i, (i + 2) % 7, (i + 3) % 7]])
        .collect();
    build_complex(&normalized(masses, 7), &tris)
}

/// `rows × cols` grid on the torus, each square split along its diagonal
/// (`rows, cols ≥ 3`); every link is a 6-cycle.
pub fn torus(rows: usize, cols: usize, masses: Option<&[f64]>) -> Result<Complex2, GarlandError> {
    let v = |r: usize, c: usize| (r % rows) * cols + (c % cols);
    let mut tris = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            tris.push([v(r, c), v(r, c + 1), v(r + 1, c + 1)]);
            tris.push([v(r, c), v(r + 1, c), v(r + 1, c + 1)]);
        }
    }
    build_complex(&normalized(masses, rows * cols), &tris)
}
