//! Symmetric random walks on the classes of a [`FiniteRelation`].
//!
//! A walk stores its kernel as sorted sparse rows together with the base
//! measure it is reversible for. Downstream spectral code reads the weights
//! from here and never from the relation directly.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::relation::{component_labels, validate_graphing, FiniteRelation, Graphing, RelationError};

/// Row sums must equal 1 within this.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Relative tolerance for `b(x)ν(x→y) = b(y)ν(y→x)`.
pub const BALANCE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error("point {0} has no incident edge")]
    IsolatedPoint(usize),
    #[error("entry ({x}, {y}) joins different classes")]
    CrossClass { x: usize, y: usize },
    #[error("graphing has a self-loop at {0}")]
    SelfLoop(usize),
    #[error("entry ({x}, {y}) is out of range")]
    OutOfRange { x: usize, y: usize },
    #[error("entry ({x}, {y}) has invalid probability {p}")]
    InvalidProbability { x: usize, y: usize, p: f64 },
    #[error("row {row} sums to {sum}")]
    RowSumError { row: usize, sum: f64 },
    #[error("ν({x}→{y}) > 0 but ν({y}→{x}) = 0")]
    AsymmetricSupport { x: usize, y: usize },
    #[error("detailed balance fails at ({x}, {y}); max residual {max_residual:e}")]
    DetailedBalanceViolation { max_residual: f64, x: usize, y: usize },
    #[error("walks are defined on different relations")]
    RelationMismatch,
    #[error("walks use different base measures")]
    BaseMeasureMismatch,
    #[error("base measure has {got} entries, expected {expected}")]
    BaseLength { got: usize, expected: usize },
    #[error("generator probabilities sum to {sum}")]
    ProbSumError { sum: f64 },
    #[error("generator {0} is not a permutation of 0..n")]
    InvalidPermutation(usize),
    #[error("generator {0} has no inverse of equal probability")]
    AsymmetricGeneratorSet(usize),
    #[error("{generators} generators but {probs} probabilities")]
    LengthMismatch { generators: usize, probs: usize },
}

/// Which measure a walk is declared symmetric for.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseMeasure {
    /// The relation's masses μ.
    Mu,
    /// `μ̃(x) = Σ_y √δ(y,x) · μ(x)` over the off-diagonal support,
    /// normalized to a probability vector.
    Tilde,
    /// Any positive vector; normalized to a probability vector.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalk {
    rel: Arc<FiniteRelation>,
    rows: Vec<Vec<(usize, f64)>>,
    base: Vec<f64>,
    base_kind: BaseMeasure,
    normalizer: f64,
    eta: f64,
    eta_threshold: f64,
}

impl RandomWalk {
    /// Assembles a walk from sorted sparse rows after checking only row sums
    /// and probabilities. Neither support symmetry nor detailed balance are
    /// checked; use [`custom_walk`] for a validated walk.
    pub fn from_rows_unchecked(
        rel: Arc<FiniteRelation>,
        rows: Vec<Vec<(usize, f64)>>,
        base: Vec<f64>,
        base_kind: BaseMeasure,
        normalizer: f64,
    ) -> Self {
        let eta = rows
            .iter()
            .flatten()
            .map(|&(_, p)| p)
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min);
        Self {
            rel,
            rows,
            base,
            base_kind,
            normalizer,
            eta: if eta.is_finite() { eta } else { 0.0 },
            eta_threshold: 0.0,
        }
    }

    /// The walk staying put: `ν(x→x) = 1`, symmetric for μ.
    pub fn identity(rel: Arc<FiniteRelation>) -> Self {
        let rows = (0..rel.len()).map(|x| vec![(x, 1.0)]).collect();
        let base = rel.masses().to_vec();
        Self::from_rows_unchecked(rel, rows, base, BaseMeasure::Mu, 1.0)
    }

    /// Declares the boundedness threshold: the walk counts as bounded when
    /// its smallest positive entry is at least `eta`.
    pub fn with_eta_threshold(mut self, eta: f64) -> Self {
        self.eta_threshold = eta;
        self
    }

    pub fn relation(&self) -> &FiniteRelation {
        &self.rel
    }

    pub fn relation_arc(&self) -> &Arc<FiniteRelation> {
        &self.rel
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        let row = &self.rows[x];
        row.binary_search_by_key(&y, |&(z, _)| z).map(|i| row[i].1).unwrap_or(0.0)
    }

    /// Probability vector the walk is symmetric for.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn base_kind(&self) -> &BaseMeasure {
        &self.base_kind
    }

    /// Total mass of the base measure before normalization.
    pub fn base_normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Smallest positive kernel entry.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn eta_threshold(&self) -> f64 {
        self.eta_threshold
    }

    pub fn is_bounded(&self) -> bool {
        self.eta > 0.0 && self.eta >= self.eta_threshold
    }

    /// Kernel entries as `(x, y, p)` in row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(y, p)| (x, y, p)))
    }

    /// Off-diagonal support as a graphing.
    pub fn support_graphing(&self) -> Graphing {
        Graphing::new(self.entries().filter(|&(x, y, p)| x != y && p > 0.0).map(|(x, y, _)| (x, y)))
    }

    /// Component label per point for the off-diagonal support.
    pub fn support_components(&self) -> Vec<usize> {
        component_labels(
            self.len(),
            self.entries().filter(|&(x, y, p)| x != y && p > 0.0).map(|(x, y, _)| (x, y)),
        )
    }

    /// Row-major dense kernel.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for (x, y, p) in self.entries() {
            m[x][y] = p;
        }
        m
    }

    pub fn max_row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Max over ordered pairs of `|b(x)ν(x→y) − b(y)ν(y→x)|`.
    pub fn detailed_balance_violation(&self) -> f64 {
        self.balance_residual().0
    }

    /// `(absolute max, relative max, worst pair)` of the detailed-balance residual.
    fn balance_residual(&self) -> (f64, f64, (usize, usize)) {
        let mut abs_max = 0.0f64;
        let mut rel_max = 0.0f64;
        let mut worst = (0, 0);
        for (x, y, p) in self.entries() {
            if x == y {
                continue;
            }
            let fwd = self.base[x] * p;
            let bwd = self.base[y] * self.prob(y, x);
            let r = (fwd - bwd).abs();
            let rel = r / fwd.max(bwd);
            if r > abs_max {
                abs_max = r;
            }
            if rel > rel_max {
                rel_max = rel;
                worst = (x, y);
            }
        }
        (abs_max, rel_max, worst)
    }

    /// Checks row sums, support symmetry and detailed balance.
    pub fn validate(&self) -> Result<(), WalkError> {
        for (row, entries) in self.rows.iter().enumerate() {
            let sum: f64 = entries.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(WalkError::RowSumError { row, sum });
            }
        }
        for (x, y, p) in self.entries() {
            if p > 0.0 && self.prob(y, x) <= 0.0 {
                return Err(WalkError::AsymmetricSupport { x, y });
            }
        }
        self.check_balance()
    }

    pub(crate) fn check_balance(&self) -> Result<(), WalkError> {
        let (abs_max, rel_max, (x, y)) = self.balance_residual();
        if rel_max > BALANCE_REL_TOL {
            return Err(WalkError::DetailedBalanceViolation {
                max_residual: abs_max,
                x,
                y,
            });
        }
        Ok(())
    }

    /// `ν^n`, computed as `ν^{n−1} ∗ ν`; `n = 0` gives the identity walk.
    pub fn power(&self, n: usize) -> RandomWalk {
        let mut acc = RandomWalk {
            rows: (0..self.len()).map(|x| vec![(x, 1.0)]).collect(),
            eta: 1.0,
            ..self.clone()
        };
        for _ in 0..n {
            acc = convolve_unchecked(&acc, self);
        }
        acc
    }
}

/// Free-function form of [`RandomWalk::detailed_balance_violation`].
pub fn detailed_balance_violation(w: &RandomWalk) -> f64 {
    w.detailed_balance_violation()
}

/// Measure from a selector, normalized; returns `(probability, raw total)`.
fn resolve_base(
    rel: &FiniteRelation,
    rows: &[Vec<(usize, f64)>],
    selector: &BaseMeasure,
) -> Result<(Vec<f64>, f64), WalkError> {
    let raw: Vec<f64> = match selector {
        BaseMeasure::Mu => rel.masses().to_vec(),
        BaseMeasure::Tilde => {
            let mut raw = Vec::with_capacity(rel.len());
            for (x, row) in rows.iter().enumerate() {
                // δ(x)μ(x) with δ(x) = Σ_y √δ(y,x)
                let s: f64 = row
                    .iter()
                    .filter(|&&(y, p)| y != x && p > 0.0)
                    .map(|&(y, _)| (rel.mass(y) / rel.mass(x)).sqrt())
                    .sum();
                if s == 0.0 {
                    return Err(WalkError::IsolatedPoint(x));
                }
                raw.push(s * rel.mass(x));
            }
            raw
        }
        BaseMeasure::Explicit(v) => {
            if v.len() != rel.len() {
                return Err(WalkError::BaseLength {
                    got: v.len(),
                    expected: rel.len(),
                });
            }
            if let Some((point, &mass)) = v.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
                return Err(RelationError::NonPositiveMass { point, mass }.into());
            }
            v.clone()
        }
    };
    let total: f64 = raw.iter().sum();
    Ok((raw.iter().map(|m| m / total).collect(), total))
}

/// The regular walk `ν_K(x→y) = √δ(y,x) / Σ_{y'} √δ(y',x)` on a graphing,
/// symmetric for the normalized `μ̃`.
pub fn regular_walk(rel: Arc<FiniteRelation>, k: &Graphing) -> Result<RandomWalk, WalkError> {
    let report = validate_graphing(&rel, k);
    if let Some(&(x, y)) = report.out_of_range.first() {
        return Err(WalkError::OutOfRange { x, y });
    }
    if let Some(&x) = report.self_loops.first() {
        return Err(WalkError::SelfLoop(x));
    }
    if let Some(&(x, y)) = report.cross_class.first() {
        return Err(WalkError::CrossClass { x, y });
    }
    let adj = k.adjacency(rel.len());
    let mut rows = Vec::with_capacity(rel.len());
    for (x, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            return Err(WalkError::IsolatedPoint(x));
        }
        let weights: Vec<f64> = nbrs.iter().map(|&y| (rel.mass(y) / rel.mass(x)).sqrt()).collect();
        let total: f64 = weights.iter().sum();
        rows.push(nbrs.iter().zip(&weights).map(|(&y, w)| (y, w / total)).collect());
    }
    let (base, normalizer) = resolve_base(&rel, &rows, &BaseMeasure::Tilde)?;
    Ok(RandomWalk::from_rows_unchecked(rel, rows, base, BaseMeasure::Tilde, normalizer))
}

/// A validated walk from explicit `(x, y, p)` entries. Repeated pairs add up.
pub fn custom_walk(
    rel: Arc<FiniteRelation>,
    entries: &[(usize, usize, f64)],
    base: BaseMeasure,
) -> Result<RandomWalk, WalkError> {
    let n = rel.len();
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for &(x, y, p) in entries {
        if x >= n || y >= n {
            return Err(WalkError::OutOfRange { x, y });
        }
        if !(p >= 0.0) || !p.is_finite() {
            return Err(WalkError::InvalidProbability { x, y, p });
        }
        if !rel.same_class(x, y) {
            return Err(WalkError::CrossClass { x, y });
        }
        if p > 0.0 {
            *rows[x].entry(y).or_insert(0.0) += p;
        }
    }
    let rows: Vec<Vec<(usize, f64)>> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    for (row, entries) in rows.iter().enumerate() {
        let sum: f64 = entries.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(WalkError::RowSumError { row, sum });
        }
    }
    let (base_vec, normalizer) = resolve_base(&rel, &rows, &base)?;
    let walk = RandomWalk::from_rows_unchecked(rel, rows, base_vec, base, normalizer);
    walk.validate()?;
    Ok(walk)
}

fn same_base(a: &RandomWalk, b: &RandomWalk) -> bool {
    a.base.iter().zip(&b.base).all(|(x, y)| (x - y).abs() <= 1e-12 * x.max(*y))
}

/// Kernel of the two-step chain: first `w1`, then `w2`.
///
/// The product of two different reversible walks is not reversible in
/// general, so detailed balance is not checked here.
pub fn convolve(w1: &RandomWalk, w2: &RandomWalk) -> Result<RandomWalk, WalkError> {
    if w1.rel.as_ref() != w2.rel.as_ref() {
        return Err(WalkError::RelationMismatch);
    }
    if !same_base(w1, w2) {
        return Err(WalkError::BaseMeasureMismatch);
    }
    Ok(convolve_unchecked(w1, w2))
}

fn convolve_unchecked(w1: &RandomWalk, w2: &RandomWalk) -> RandomWalk {
    let n = w1.len();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; n], Vec::<usize>::new()),
            |(acc, touched), x| {
                for &(y, p) in &w1.rows[x] {
                    for &(z, q) in &w2.rows[y] {
                        if acc[z] == 0.0 {
                            touched.push(z);
                        }
                        acc[z] += p * q;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let row = touched.iter().map(|&z| (z, acc[z])).filter(|&(_, p)| p > 0.0).collect();
                for &z in touched.iter() {
                    acc[z] = 0.0;
                }
                touched.clear();
                row
            },
        )
        .collect();
    RandomWalk::from_rows_unchecked(w1.rel.clone(), rows, w1.base.clone(), w1.base_kind.clone(), w1.normalizer)
        .with_eta_threshold(w1.eta_threshold)
}

/// The walk of a finite permutation action: `ν(x→y) = Σ_{s(x)=y} p(s)`.
///
/// The relation is the orbit partition with uniform masses.
pub fn cayley_action_walk(
    n: usize,
    generators: &[Vec<usize>],
    probs: &[f64],
) -> Result<(Arc<FiniteRelation>, RandomWalk), WalkError> {
    if generators.len() != probs.len() {
        return Err(WalkError::LengthMismatch {
            generators: generators.len(),
            probs: probs.len(),
        });
    }
    for (i, s) in generators.iter().enumerate() {
        let mut seen = vec![false; n];
        if s.len() != n || s.iter().any(|&y| y >= n || std::mem::replace(&mut seen[y], true)) {
            return Err(WalkError::InvalidPermutation(i));
        }
    }
    for (i, &p) in probs.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            return Err(WalkError::InvalidProbability { x: i, y: i, p });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOL {
        return Err(WalkError::ProbSumError { sum });
    }
    let mut weight: BTreeMap<&[usize], f64> = BTreeMap::new();
    for (s, &p) in generators.iter().zip(probs) {
        *weight.entry(s.as_slice()).or_insert(0.0) += p;
    }
    for (i, s) in generators.iter().enumerate() {
        let mut inv = vec![0; n];
        for (x, &y) in s.iter().enumerate() {
            inv[y] = x;
        }
        let p = weight[s.as_slice()];
        let q = weight.get(inv.as_slice()).copied().unwrap_or(0.0);
        if (p - q).abs() > ROW_SUM_TOL {
            return Err(WalkError::AsymmetricGeneratorSet(i));
        }
    }
    let labels = component_labels(n, generators.iter().flat_map(|s| s.iter().enumerate().map(|(x, &y)| (x, y))));
    let rel = Arc::new(crate::relation::build_relation(&vec![1.0 / n as f64; n], &labels)?);
    let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (s, &p) in generators.iter().zip(probs) {
        for (x, &y) in s.iter().enumerate() {
            *rows[x].entry(y).or_insert(0.0) += p;
        }
    }
    let rows = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    let base = rel.masses().to_vec();
    let walk = RandomWalk::from_rows_unchecked(rel.clone(), rows, base, BaseMeasure::Mu, 1.0);
    Ok((rel, walk))
}
