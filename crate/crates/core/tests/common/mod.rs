#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use kazhdan::walks::{custom_walk, BaseMeasure, RandomWalk};
use kazhdan::FiniteRelation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn masses<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..2.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|m| m / s).collect()
}

/// Reversible walk from symmetric conductances: a ring through each class
/// plus random chords inside classes, holding on the diagonal.
pub fn reversible<R: Rng>(rng: &mut R, rel: Arc<FiniteRelation>, chords: f64) -> RandomWalk {
    let n = rel.len();
    let mut c = vec![vec![0.0; n]; n];
    for class in rel.classes() {
        let m = class.len();
        for i in 0..m {
            if m > 1 {
                let (x, y) = (class[i], class[(i + 1) % m]);
                let v = rng.random_range(0.1..2.0);
                c[x][y] += v;
                c[y][x] += v;
            }
            for j in i + 2..m {
                if rng.random_bool(chords) {
                    let (x, y) = (class[i], class[j]);
                    let v = rng.random_range(0.1..2.0);
                    c[x][y] += v;
                    c[y][x] += v;
                }
            }
            if m == 1 || rng.random_bool(0.3) {
                c[class[i]][class[i]] += rng.random_range(0.1..1.0);
            }
        }
    }
    let rowsum: Vec<f64> = c.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = rowsum.iter().sum();
    let base: Vec<f64> = rowsum.iter().map(|r| r / total).collect();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter(|&(x, y)| c[x][y] > 0.0)
        .map(|(x, y)| (x, y, c[x][y] / rowsum[x]))
        .collect();
    custom_walk(rel, &entries, BaseMeasure::Explicit(base)).expect("generated walk is valid")
}

/// A symmetric (hence `μ`-reversible for uniform `μ`) lazy walk.
pub fn symmetric<R: Rng>(rng: &mut R, rel: Arc<FiniteRelation>) -> RandomWalk {
    let n = rel.len();
    let mut c = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in x + 1..n {
            if rel.same_class(x, y) && rng.random_bool(0.5) {
                let v = rng.random_range(0.0..1.0);
                c[x][y] = v;
                c[y][x] = v;
            }
        }
    }
    let scale = c.iter().map(|r| r.iter().sum::<f64>()).fold(1.0, f64::max);
    let mut entries = Vec::new();
    for x in 0..n {
        let mut off = 0.0;
        for y in 0..n {
            if c[x][y] > 0.0 {
                entries.push((x, y, c[x][y] / scale));
                off += c[x][y] / scale;
            }
        }
        if 1.0 - off > 0.0 {
            entries.push((x, x, 1.0 - off));
        }
    }
    custom_walk(rel, &entries, BaseMeasure::Mu).expect("symmetric walk is valid")
}

/// Random relation on `n` points with at most `classes` classes.
pub fn relation<R: Rng>(rng: &mut R, n: usize, classes: usize) -> Arc<FiniteRelation> {
    let m = masses(rng, n);
    let ids: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();
    Arc::new(kazhdan::build_relation(&m, &ids).expect("random relation"))
}

pub fn uniform_relation(n: usize) -> Arc<FiniteRelation> {
    Arc::new(FiniteRelation::uniform(&vec![0; n]).unwrap())
}

/// Exterior vertex boundary of `set` along the walk's support.
pub fn exterior(walk: &RandomWalk, set: &[usize]) -> BTreeSet<usize> {
    let inside: BTreeSet<usize> = set.iter().copied().collect();
    set.iter()
        .flat_map(|&x| walk.row(x).iter().map(|&(y, _)| y))
        .filter(|y| !inside.contains(y))
        .collect()
}
