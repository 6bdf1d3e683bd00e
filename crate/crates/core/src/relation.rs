//! Finite models of measured equivalence relations.
//!
//! A [`FiniteRelation`] is a probability vector on `0..N` together with a
//! partition of the points into classes. The Radon–Nikodym cocycle is not
//! stored: on a finite space it is forced to be the mass ratio
//! `δ(x, y) = μ(x) / μ(y)`, which makes the cocycle law hold by construction.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

/// Tolerance on `Σ μ(x) = 1`.
pub const MASS_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RelationError {
    #[error("relation has no points")]
    Empty,
    #[error("mass of point {point} is not positive ({mass})")]
    NonPositiveMass { point: usize, mass: f64 },
    #[error("masses sum to {sum}, expected 1 within {MASS_SUM_TOL:e}")]
    MassSumMismatch { sum: f64 },
    #[error("class {0} has no points")]
    EmptyClass(usize),
    #[error("{masses} masses but {classes} class assignments")]
    LengthMismatch { masses: usize, classes: usize },
    #[error("points {x} and {y} are not in the same class")]
    NotEquivalent { x: usize, y: usize },
    #[error("point {0} is out of range")]
    OutOfRange(usize),
}

/// A probability space on `0..N` partitioned into finite classes.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRelation {
    mass: Vec<f64>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

/// Builds a relation from masses and arbitrary class labels.
///
/// Labels are renumbered densely in ascending label order.
pub fn build_relation(masses: &[f64], class_of: &[usize]) -> Result<FiniteRelation, RelationError> {
    if masses.len() != class_of.len() {
        return Err(RelationError::LengthMismatch {
            masses: masses.len(),
            classes: class_of.len(),
        });
    }
    let labels: BTreeSet<usize> = class_of.iter().copied().collect();
    let dense: BTreeMap<usize, usize> = labels.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
    let ids: Vec<usize> = class_of.iter().map(|l| dense[l]).collect();
    FiniteRelation::from_dense(masses, &ids, dense.len())
}

impl FiniteRelation {
    /// Builds a relation whose class ids are already `0..n_classes`.
    pub fn from_dense(masses: &[f64], class_of: &[usize], n_classes: usize) -> Result<Self, RelationError> {
        if masses.is_empty() {
            return Err(RelationError::Empty);
        }
        if masses.len() != class_of.len() {
            return Err(RelationError::LengthMismatch {
                masses: masses.len(),
                classes: class_of.len(),
            });
        }
        for (point, &mass) in masses.iter().enumerate() {
            if !(mass > 0.0) || !mass.is_finite() {
                return Err(RelationError::NonPositiveMass { point, mass });
            }
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > MASS_SUM_TOL {
            return Err(RelationError::MassSumMismatch { sum });
        }
        let mut classes = vec![Vec::new(); n_classes];
        for (x, &c) in class_of.iter().enumerate() {
            match classes.get_mut(c) {
                Some(members) => members.push(x),
                None => return Err(RelationError::EmptyClass(n_classes)),
            }
        }
        if let Some(c) = classes.iter().position(Vec::is_empty) {
            return Err(RelationError::EmptyClass(c));
        }
        Ok(Self {
            mass: masses.to_vec(),
            class_of: class_of.to_vec(),
            classes,
        })
    }

    /// Uniform masses `1/N` with the given class assignment.
    pub fn uniform(class_of: &[usize]) -> Result<Self, RelationError> {
        let n = class_of.len().max(1);
        build_relation(&vec![1.0 / n as f64; class_of.len()], class_of)
    }

    /// A single class holding every point, with the given masses.
    pub fn single_class(masses: &[f64]) -> Result<Self, RelationError> {
        build_relation(masses, &vec![0; masses.len()])
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_of
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn same_class(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    /// Mass of a set of points.
    pub fn measure<I: IntoIterator<Item = usize>>(&self, points: I) -> f64 {
        points.into_iter().map(|x| self.mass[x]).sum()
    }

    /// The Radon–Nikodym cocycle `δ(x, y) = μ(x) / μ(y)` for `x ~ y`.
    pub fn cocycle(&self, x: usize, y: usize) -> Result<f64, RelationError> {
        for p in [x, y] {
            if p >= self.len() {
                return Err(RelationError::OutOfRange(p));
            }
        }
        if !self.same_class(x, y) {
            return Err(RelationError::NotEquivalent { x, y });
        }
        Ok(self.mass[x] / self.mass[y])
    }
}

/// Free-function form of [`FiniteRelation::cocycle`].
pub fn cocycle(rel: &FiniteRelation, x: usize, y: usize) -> Result<f64, RelationError> {
    rel.cocycle(x, y)
}

/// A symmetric set of pairs `{x, y}` stored as ordered `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graphing {
    edges: BTreeSet<(usize, usize)>,
    degree_bound: Option<usize>,
    duplicates: usize,
}

impl Graphing {
    pub fn new<I: IntoIterator<Item = (usize, usize)>>(edges: I) -> Self {
        let mut set = BTreeSet::new();
        let mut duplicates = 0;
        for (x, y) in edges {
            if !set.insert((x.min(y), x.max(y))) {
                duplicates += 1;
            }
        }
        Self {
            edges: set,
            degree_bound: None,
            duplicates,
        }
    }

    /// Declares the uniform local finiteness bound on vertex degrees.
    pub fn with_degree_bound(mut self, bound: usize) -> Self {
        self.degree_bound = Some(bound);
        self
    }

    pub fn degree_bound(&self) -> Option<usize> {
        self.degree_bound
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.edges.contains(&(x.min(y), x.max(y)))
    }

    /// Neighbor lists over `0..n`, sorted; self-loops and out-of-range
    /// endpoints are skipped.
    pub fn adjacency(&self, n: usize) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(x, y) in &self.edges {
            if x != y && y < n {
                adj[x].push(y);
                adj[y].push(x);
            }
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        adj
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphingReport {
    /// Indexed by class id.
    pub class_connected: Vec<bool>,
    pub all_connected: bool,
    pub max_degree: usize,
    pub degree_bound: Option<usize>,
    pub degree_violations: Vec<usize>,
    pub cross_class: Vec<(usize, usize)>,
    pub self_loops: Vec<usize>,
    pub out_of_range: Vec<(usize, usize)>,
    pub duplicates_merged: usize,
    pub valid: bool,
}

/// Checks a graphing against a relation. Never fails; problems are listed.
pub fn validate_graphing(rel: &FiniteRelation, k: &Graphing) -> GraphingReport {
    let n = rel.len();
    let mut cross_class = Vec::new();
    let mut self_loops = Vec::new();
    let mut out_of_range = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut degree = vec![0usize; n];
    for (x, y) in k.edges() {
        if y >= n {
            out_of_range.push((x, y));
            continue;
        }
        if x == y {
            self_loops.push(x);
            continue;
        }
        degree[x] += 1;
        degree[y] += 1;
        if !rel.same_class(x, y) {
            cross_class.push((x, y));
            continue;
        }
        uf.union(x, y);
    }
    let class_connected: Vec<bool> = rel
        .classes()
        .iter()
        .map(|members| {
            let root = uf.find(members[0]);
            members.iter().all(|&x| uf.find(x) == root)
        })
        .collect();
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let degree_violations = match k.degree_bound() {
        Some(b) => (0..n).filter(|&x| degree[x] > b).collect(),
        None => Vec::new(),
    };
    let all_connected = class_connected.iter().all(|&c| c);
    let valid = cross_class.is_empty() && self_loops.is_empty() && out_of_range.is_empty() && degree_violations.is_empty();
    GraphingReport {
        class_connected,
        all_connected,
        max_degree,
        degree_bound: k.degree_bound(),
        degree_violations,
        cross_class,
        self_loops,
        out_of_range,
        duplicates_merged: k.duplicates,
        valid,
    }
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // smaller root wins so labels are deterministic
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

/// Connected-component label per point (labels are the smallest point of
/// each component) for the pairs yielded by `edges`.
pub fn component_labels<I: IntoIterator<Item = (usize, usize)>>(n: usize, edges: I) -> Vec<usize> {
    let mut uf = UnionFind::new(n);
    for (x, y) in edges {
        uf.union(x, y);
    }
    (0..n).map(|x| uf.find(x)).collect()
}
