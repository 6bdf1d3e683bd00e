//! Independent reference computations for the acceptance suite. Nothing
//! here calls the library's numerical routines.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use kazhdan::walks::{custom_walk, BaseMeasure, RandomWalk};
use kazhdan::FiniteRelation;
use rand::Rng;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    let scale: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (kp, kq) = (row[p], row[q]);
                    row[p] = c * kp - s * kq;
                    row[q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p][k], a[q][k]);
                    a[p][k] = c * pk - s * qk;
                    a[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Dense `P` of a walk, read entry by entry.
pub fn dense(walk: &RandomWalk) -> Vec<Vec<f64>> {
    let n = walk.len();
    (0..n).map(|x| (0..n).map(|y| walk.prob(x, y)).collect()).collect()
}

/// `W^{1/2} P W^{-1/2}`, symmetric when `P` is reversible for `w`.
pub fn symmetrized(walk: &RandomWalk) -> Vec<Vec<f64>> {
    let w = walk.base();
    let p = dense(walk);
    let n = p.len();
    let mut s = vec![vec![0.0; n]; n];
    for x in 0..n {
        for y in 0..n {
            s[x][y] = 0.5 * ((w[x] / w[y]).sqrt() * p[x][y] + (w[y] / w[x]).sqrt() * p[y][x]);
        }
    }
    s
}

/// Largest eigenvalue at most `1 − tol`.
pub fn kappa(eigs: &[f64], tol: f64) -> Option<f64> {
    eigs.iter().rev().copied().find(|&t| t <= 1.0 - tol)
}

pub fn apply(p: &[Vec<f64>], f: &[f64]) -> Vec<f64> {
    p.iter().map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum()).collect()
}

pub fn inner(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    w.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
}

/// `⟨(I − P^n) f, f⟩_w` for a real scalar `f`.
pub fn energy_n(p: &[Vec<f64>], w: &[f64], f: &[f64], n: usize) -> f64 {
    let mut g = f.to_vec();
    for _ in 0..n {
        g = apply(p, &g);
    }
    inner(w, f, f) - inner(w, &g, f)
}

/// A connected reversible walk on `n` points: a weighted ring plus random
/// chords (probability `chords`) and random holding weights.
pub fn random_reversible<R: Rng>(rng: &mut R, n: usize, chords: f64) -> RandomWalk {
    let mut c = vec![vec![0.0; n]; n];
    let link = |c: &mut Vec<Vec<f64>>, x: usize, y: usize, v: f64| {
        c[x][y] += v;
        if x != y {
            c[y][x] += v;
        }
    };
    for x in 0..n {
        let v = rng.random_range(0.1..2.0);
        link(&mut c, x, (x + 1) % n, v);
    }
    for x in 0..n {
        for y in x + 2..n {
            if rng.random_bool(chords) {
                let v = rng.random_range(0.1..2.0);
                link(&mut c, x, y, v);
            }
        }
        if rng.random_bool(0.3) {
            let v = rng.random_range(0.1..1.0);
            link(&mut c, x, x, v);
        }
    }
    let rowsum: Vec<f64> = c.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = rowsum.iter().sum();
    let base: Vec<f64> = rowsum.iter().map(|r| r / total).collect();
    let mut entries = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if c[x][y] > 0.0 {
                entries.push((x, y, c[x][y] / rowsum[x]));
            }
        }
    }
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let s: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|m| m / s).collect();
    let rel = Arc::new(FiniteRelation::from_dense(&masses, &vec![0; n], 1).unwrap_or_else(|_| {
        // rounding can push the sum just outside tolerance
        FiniteRelation::uniform(&vec![0; n]).unwrap()
    }));
    custom_walk(rel, &entries, BaseMeasure::Explicit(base)).expect("generated walk is valid")
}

/// Best boundary ratio over arcs of the cycle `C_n` with mass at most `cap`
/// (uniform masses, exterior vertex boundary).
pub fn best_cycle_arc(n: usize, cap: f64) -> f64 {
    let mut best = f64::INFINITY;
    for start in 0..n {
        for len in 1..n {
            let mass = len as f64 / n as f64;
            if mass > cap + 1e-12 {
                break;
            }
            let inside: BTreeSet<usize> = (0..len).map(|i| (start + i) % n).collect();
            let boundary: BTreeSet<usize> = inside
                .iter()
                .flat_map(|&x| [(x + 1) % n, (x + n - 1) % n])
                .filter(|y| !inside.contains(y))
                .collect();
            best = best.min(boundary.len() as f64 / len as f64);
        }
    }
    best
}

/// Triangle walks of a complex from first principles:
/// `(ν, ν̲)` as dense matrices, together with `δ_μ`.
pub struct TriangleOracle {
    pub nu: Vec<Vec<f64>>,
    pub nu_under: Vec<Vec<f64>>,
    pub delta_mu: f64,
}

pub fn triangle_oracle(masses: &[f64], triangles: &[[usize; 3]]) -> TriangleOracle {
    let n = masses.len();
    let mut tau_e: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut tau_v = vec![0.0; n];
    for t in triangles {
        for i in 0..3 {
            tau_v[t[i]] += 1.0;
            for j in 0..3 {
                if i != j {
                    *tau_e.entry((t[i], t[j])).or_insert(0.0) += 1.0;
                }
            }
        }
    }
    let te = |a: usize, b: usize| tau_e.get(&(a, b)).copied().unwrap_or(0.0);
    let delta = |a: usize, b: usize| masses[a] / masses[b];
    let mut tau_delta_edge = vec![vec![0.0; n]; n];
    for t in triangles {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let k = 3 - i - j;
                    tau_delta_edge[t[i]][t[j]] += delta(t[k], t[i]);
                }
            }
        }
    }
    let tau_delta_v: Vec<f64> = (0..n)
        .map(|y| 0.5 * (0..n).filter(|&x| x != y).map(|x| delta(x, y) * te(x, y)).sum::<f64>())
        .collect();
    let mut nu = vec![vec![0.0; n]; n];
    let mut nu_under = vec![vec![0.0; n]; n];
    for y in 0..n {
        for z in 0..n {
            nu[y][z] = tau_delta_edge[y][z] / (2.0 * tau_delta_v[y]);
            let mut s = 0.0;
            for x in 0..n {
                if te(x, y) > 0.0 && te(x, z) > 0.0 {
                    s += te(x, y) * te(x, z) * delta(x, y) / (2.0 * tau_v[x]);
                }
            }
            nu_under[y][z] = s / (2.0 * tau_delta_v[y]);
        }
    }
    let mut delta_mu: f64 = 1.0;
    for &(a, b) in tau_e.keys() {
        delta_mu = delta_mu.max(delta(a, b));
    }
    TriangleOracle { nu, nu_under, delta_mu }
}

pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

/// Smallest nonzero eigenvalue of `I − D_L` for a link given by its edges,
/// with `D_L(y→z) = 1/deg(y)`.
pub fn link_gap(edges: &[(usize, usize)]) -> f64 {
    let verts: Vec<usize> = edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let idx = |v: usize| verts.binary_search(&v).unwrap();
    let m = verts.len();
    let mut deg = vec![0.0; m];
    for &(a, b) in edges {
        deg[idx(a)] += 1.0;
        deg[idx(b)] += 1.0;
    }
    let mut s = vec![vec![0.0; m]; m];
    for &(a, b) in edges {
        let (i, j) = (idx(a), idx(b));
        let v = 1.0 / (deg[i] * deg[j] as f64).sqrt();
        s[i][j] += v;
        s[j][i] += v;
    }
    let e = jacobi_eigenvalues(s);
    1.0 - e[m - 2]
}
