//! Isoperimetry and concentration on finite walks: vertex boundaries,
//! almost-fixed functions built from sets, Følner sets by level-set sweeps,
//! and Levy-type concentration diagnostics for fields.
//!
//! Masses here are the walk's base measure (the measure it is reversible
//! for), so boundary ratios and Rayleigh quotients share one measure.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::relation::{FiniteRelation, Graphing};
use crate::spectral::{diffusion, trivial_representation, Field, SpectralError, SpectralOptions};
use crate::walks::{RandomWalk, WalkError};

/// Slack on the almost-fixed lower bound `⟨Df,f⟩ ≥ μ(A) − μ(Ā)²`.
pub const SCHMIDT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("empty set")]
    EmptySet,
    #[error("point {0} out of range")]
    OutOfRange(usize),
    #[error("closure of the set has mass {mass}, need 0 < μ(Ā) < 1")]
    DegenerateSet { mass: f64 },
    #[error("field vanishes identically")]
    ZeroField,
    #[error("field is negative or not finite at point {0}")]
    NegativeValue(usize),
    #[error("field has {got} values for {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("⟨Df,f⟩ = {lhs} below μ(A) − μ(Ā)² = {rhs}")]
    BoundViolated { lhs: f64, rhs: f64 },
    #[error("L1 energy {l1_energy} < η·ε·‖f‖₁ = {premise} but no level set has ratio < ε")]
    GuaranteeViolated { l1_energy: f64, premise: f64 },
    #[error("ε must be positive and finite, got {0}")]
    InvalidEps(f64),
}

fn check_points(n: usize, set: &[usize]) -> Result<Vec<bool>, ErgodicError> {
    if set.is_empty() {
        return Err(ErgodicError::EmptySet);
    }
    let mut mark = vec![false; n];
    for &x in set {
        if x >= n {
            return Err(ErgodicError::OutOfRange(x));
        }
        mark[x] = true;
    }
    Ok(mark)
}

/// Exterior vertex boundary `{y ∉ A : {x, y} ∈ K for some x ∈ A}`, ascending.
pub fn boundary(rel: &FiniteRelation, k: &Graphing, set: &[usize]) -> Result<Vec<usize>, ErgodicError> {
    let inside = check_points(rel.len(), set)?;
    let mut out = BTreeSet::new();
    for (a, b) in k.edges() {
        if a >= rel.len() || b >= rel.len() {
            continue;
        }
        if inside[a] && !inside[b] {
            out.insert(b);
        }
        if inside[b] && !inside[a] {
            out.insert(a);
        }
    }
    Ok(out.into_iter().collect())
}

/// Exterior boundary along the off-diagonal support of a walk.
pub fn walk_boundary(walk: &RandomWalk, set: &[usize]) -> Result<Vec<usize>, ErgodicError> {
    boundary(walk.relation(), &walk.support_graphing(), set)
}

fn mass_of(w: &[f64], pts: &[usize]) -> f64 {
    // fold from +0.0: an empty f64 sum is -0.0
    pts.iter().fold(0.0, |s, &x| s + w[x])
}

/// `⟨Df, f⟩` for a real scalar field, in the base measure.
fn quadratic(walk: &RandomWalk, f: &[f64]) -> f64 {
    let w = walk.base();
    (0..walk.len())
        .map(|x| w[x] * f[x] * walk.row(x).iter().map(|&(y, p)| p * f[y]).sum::<f64>())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlmostFixed {
    /// `f = χ_Ā − μ(Ā)` with `Ā = A ⊔ ∂A`.
    pub field: Vec<f64>,
    pub closure: Vec<usize>,
    pub mass_set: f64,
    pub mass_closure: f64,
    /// `⟨Df, f⟩`.
    pub diffusion_form: f64,
    /// `μ(A) − μ(Ā)²`.
    pub lower_bound: f64,
    /// `‖f‖²`, equal to `μ(Ā) − μ(Ā)²`.
    pub norm_sq: f64,
    /// `⟨Df,f⟩ / ‖f‖²`.
    pub rayleigh: f64,
    /// `⟨(I − D)f, f⟩`.
    pub energy: f64,
}

pub fn almost_fixed_from_set(walk: &RandomWalk, set: &[usize]) -> Result<AlmostFixed, ErgodicError> {
    let n = walk.len();
    let inside = check_points(n, set)?;
    let w = walk.base();
    let a: Vec<usize> = (0..n).filter(|&x| inside[x]).collect();
    let mut closure: BTreeSet<usize> = a.iter().copied().collect();
    closure.extend(walk_boundary(walk, &a)?);
    let closure: Vec<usize> = closure.into_iter().collect();
    let mass_set = mass_of(w, &a);
    let mass_closure = mass_of(w, &closure);
    if !(mass_closure > 0.0 && mass_closure < 1.0 - 1e-15) {
        return Err(ErgodicError::DegenerateSet { mass: mass_closure });
    }
    let mut field = vec![-mass_closure; n];
    for &x in &closure {
        field[x] += 1.0;
    }
    let diffusion_form = quadratic(walk, &field);
    let norm_sq: f64 = field.iter().zip(w).map(|(f, w)| w * f * f).sum();
    let lower_bound = mass_set - mass_closure * mass_closure;
    if diffusion_form < lower_bound - SCHMIDT_TOL {
        return Err(ErgodicError::BoundViolated {
            lhs: diffusion_form,
            rhs: lower_bound,
        });
    }
    Ok(AlmostFixed {
        field,
        closure,
        mass_set,
        mass_closure,
        diffusion_form,
        lower_bound,
        norm_sq,
        rayleigh: diffusion_form / norm_sq,
        energy: (norm_sq - diffusion_form).max(0.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweptSet {
    pub threshold: f64,
    pub size: usize,
    pub mass: f64,
    pub boundary_mass: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FolnerReport {
    pub set: Vec<usize>,
    pub mass: f64,
    pub boundary: Vec<usize>,
    pub boundary_mass: f64,
    /// `μ(∂A) / μ(A)`; infinite when nothing fits under the cap.
    pub ratio: f64,
    pub eps: f64,
    pub mass_cap: f64,
    pub found: bool,
    /// Which test function produced the set.
    pub candidate: String,
    /// `Σ μ(x) ν(x→y) |f(y) − f(x)|`.
    pub l1_energy: f64,
    /// `η · ε · ‖f‖₁`; when `l1_energy` is below it a set with ratio `< ε`
    /// is guaranteed among the swept sets.
    pub guarantee_threshold: f64,
    pub guarantee_applies: bool,
    pub swept: Vec<SweptSet>,
}

impl FolnerReport {
    fn empty(eps: f64, mass_cap: f64, candidate: &str) -> Self {
        Self {
            set: Vec::new(),
            mass: 0.0,
            boundary: Vec::new(),
            boundary_mass: 0.0,
            ratio: f64::INFINITY,
            eps,
            mass_cap,
            found: false,
            candidate: candidate.to_string(),
            l1_energy: 0.0,
            guarantee_threshold: 0.0,
            guarantee_applies: false,
            swept: Vec::new(),
        }
    }
}

/// `{x : f(x) ≥ a}`, ascending.
pub fn level_set(f: &[f64], a: f64) -> Vec<usize> {
    (0..f.len()).filter(|&x| f[x] >= a).collect()
}

/// Layer-cake sweep: scans `Ω_a = {f ≥ a}` over the distinct positive values
/// of `f` and keeps the smallest boundary ratio among sets of mass at most
/// `mass_cap` (ties toward smaller mass).
pub fn sweep_folner(walk: &RandomWalk, f: &[f64], eps: f64, mass_cap: f64) -> Result<FolnerReport, ErgodicError> {
    sweep_labeled(walk, f, eps, mass_cap, "input")
}

fn sweep_labeled(
    walk: &RandomWalk,
    f: &[f64],
    eps: f64,
    mass_cap: f64,
    label: &str,
) -> Result<FolnerReport, ErgodicError> {
    let n = walk.len();
    if f.len() != n {
        return Err(ErgodicError::LengthMismatch { expected: n, got: f.len() });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ErgodicError::InvalidEps(eps));
    }
    if let Some(x) = (0..n).find(|&x| !(f[x] >= 0.0 && f[x].is_finite())) {
        return Err(ErgodicError::NegativeValue(x));
    }
    let w = walk.base();
    let mut order: Vec<usize> = (0..n).filter(|&x| f[x] > 0.0).collect();
    if order.is_empty() {
        return Err(ErgodicError::ZeroField);
    }
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));

    let adj = walk.support_graphing().adjacency(n);
    let mut inside = vec![false; n];
    let mut on_boundary = vec![false; n];
    let (mut mass, mut bmass) = (0.0, 0.0);
    let mut swept = Vec::new();
    let mut best: Option<(usize, f64, f64)> = None; // (size, ratio, mass)
    let mut i = 0;
    while i < order.len() {
        let a = f[order[i]];
        while i < order.len() && f[order[i]] == a {
            let x = order[i];
            inside[x] = true;
            mass += w[x];
            if on_boundary[x] {
                on_boundary[x] = false;
                bmass -= w[x];
            }
            for &y in &adj[x] {
                if !inside[y] && !on_boundary[y] {
                    on_boundary[y] = true;
                    bmass += w[y];
                }
            }
            i += 1;
        }
        // the running sum drifts; clamp tiny negatives
        let bm = bmass.max(0.0);
        let ratio = bm / mass;
        swept.push(SweptSet {
            threshold: a,
            size: i,
            mass,
            boundary_mass: bm,
            ratio,
        });
        if mass <= mass_cap && best.is_none_or(|(_, r, m)| ratio < r || (ratio == r && mass < m)) {
            best = Some((i, ratio, mass));
        }
    }

    let l1_energy: f64 = (0..n)
        .map(|x| w[x] * walk.row(x).iter().map(|&(y, p)| p * (f[y] - f[x]).abs()).sum::<f64>())
        .sum();
    let l1_norm: f64 = (0..n).map(|x| w[x] * f[x]).sum();
    let guarantee_threshold = walk.eta() * eps * l1_norm;
    let guarantee_applies = l1_energy < guarantee_threshold;
    if guarantee_applies && !swept.iter().any(|s| s.ratio < eps) {
        return Err(ErgodicError::GuaranteeViolated {
            l1_energy,
            premise: guarantee_threshold,
        });
    }

    let mut report = FolnerReport::empty(eps, mass_cap, label);
    report.l1_energy = l1_energy;
    report.guarantee_threshold = guarantee_threshold;
    report.guarantee_applies = guarantee_applies;
    if let Some((size, ratio, m)) = best {
        let mut set = order[..size].to_vec();
        set.sort_unstable();
        let boundary = walk_boundary(walk, &set)?;
        report.boundary_mass = mass_of(w, &boundary);
        report.boundary = boundary;
        report.set = set;
        report.mass = m;
        report.ratio = ratio;
        report.found = ratio <= eps;
    }
    report.swept = swept;
    Ok(report)
}

/// The nonnegative test functions `folner_search` sweeps, with labels.
///
/// Component indicators when the support is disconnected, then for each
/// eigenvector at `κ`: `|v|`, `v²`, `v₊`, `v₋`, `v₊²`, `v₋²`.
pub fn folner_candidates(walk: &RandomWalk, opts: &SpectralOptions) -> Result<Vec<(String, Vec<f64>)>, ErgodicError> {
    let n = walk.len();
    let mut out = Vec::new();
    let labels = walk.support_components();
    let comps: BTreeSet<usize> = labels.iter().copied().collect();
    if comps.len() > 1 {
        for &c in &comps {
            out.push((
                format!("component {c}"),
                labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect(),
            ));
        }
    }
    let op = diffusion(walk, &trivial_representation(walk.relation()))?;
    let eig = op.eigen(opts, true)?;
    let values = eig.values();
    let Some(kappa) = values.iter().rev().copied().find(|&t| t <= 1.0 - opts.tol) else {
        return Ok(out);
    };
    let vecs = eig.fields_where(op.weights(), |t| (t - kappa).abs() <= 1e-8);
    for (k, (_, v)) in vecs.iter().enumerate().take(4) {
        // undo any global phase before reading off a real vector
        let pivot = v.values().iter().copied().fold(Complex64::new(0.0, 0.0), |m, z| {
            if z.norm() > m.norm() {
                z
            } else {
                m
            }
        });
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
        let re: Vec<f64> = v.values().iter().map(|z| (z * phase).re).collect();
        let pos: Vec<f64> = re.iter().map(|t| t.max(0.0)).collect();
        let neg: Vec<f64> = re.iter().map(|t| (-t).max(0.0)).collect();
        let sq = |u: &[f64]| u.iter().map(|t| t * t).collect::<Vec<f64>>();
        out.push((format!("|v{k}|"), re.iter().map(|t| t.abs()).collect()));
        out.push((format!("v{k}^2"), sq(&re)));
        out.push((format!("v{k}+"), pos.clone()));
        out.push((format!("v{k}-"), neg.clone()));
        out.push((format!("(v{k}+)^2"), sq(&pos)));
        out.push((format!("(v{k}-)^2"), sq(&neg)));
    }
    debug_assert!(out.iter().all(|(_, f)| f.len() == n));
    Ok(out)
}

/// Sweeps every candidate from [`folner_candidates`] and returns the best
/// set; `found = false` when nothing reaches `ε` under the mass cap.
pub fn folner_search(walk: &RandomWalk, eps: f64, mass_cap: f64) -> Result<FolnerReport, ErgodicError> {
    folner_search_with(walk, eps, mass_cap, &SpectralOptions::default())
}

pub fn folner_search_with(
    walk: &RandomWalk,
    eps: f64,
    mass_cap: f64,
    opts: &SpectralOptions,
) -> Result<FolnerReport, ErgodicError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ErgodicError::InvalidEps(eps));
    }
    let cands = folner_candidates(walk, opts)?;
    let reports: Vec<FolnerReport> = cands
        .par_iter()
        .filter(|(_, f)| f.iter().any(|&t| t > 0.0))
        .map(|(label, f)| sweep_labeled(walk, f, eps, mass_cap, label))
        .collect::<Result<_, _>>()?;
    let best = reports.into_iter().reduce(|a, b| {
        if b.ratio < a.ratio || (b.ratio == a.ratio && b.mass < a.mass && !b.set.is_empty()) {
            b
        } else {
            a
        }
    });
    Ok(best.unwrap_or_else(|| FolnerReport::empty(eps, mass_cap, "none")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observable {
    /// `coordinate`, `linear` or `norm`.
    pub kind: &'static str,
    pub index: usize,
    pub mean: f64,
    /// `μ{x : |f(x) − mean| ≤ ε}`.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldConcentration {
    pub observables: Vec<Observable>,
    pub minimum: f64,
    /// `m₁ = Σ μ(x) ‖ξ_x‖`.
    pub first_moment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub fields: Vec<FieldConcentration>,
    /// Minimum over all fields and observables.
    pub minimum: f64,
    pub eps: f64,
    pub samples: usize,
    pub seed: u64,
    pub note: String,
}

/// Concentration of 1-Lipschitz observables of each field around their
/// means: the real coordinates, `Re⟨ξ_x, η⟩` for `samples` random unit `η`,
/// and `‖ξ_x − c‖` for `samples` centers `c` drawn from the field's values.
///
/// This is an upper bound for the infimum over all 1-Lipschitz observables.
pub fn concentration_report(
    fields: &[Field],
    rel: &FiniteRelation,
    eps: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationReport, ErgodicError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(ErgodicError::InvalidEps(eps));
    }
    let mu = rel.masses();
    for f in fields {
        if f.n_points() != mu.len() {
            return Err(ErgodicError::LengthMismatch {
                expected: mu.len(),
                got: f.n_points(),
            });
        }
    }
    let per_field: Vec<FieldConcentration> = fields
        .par_iter()
        .enumerate()
        .map(|(i, f)| field_concentration(f, mu, eps, samples, seed, i as u64))
        .collect();
    let minimum = per_field.iter().map(|f| f.minimum).fold(1.0, f64::min);
    Ok(ConcentrationReport {
        fields: per_field,
        minimum,
        eps,
        samples,
        seed,
        note: "linear and norm observables only: an upper bound on the infimum over all 1-Lipschitz observables"
            .to_string(),
    })
}

fn concentration_of(values: &[f64], mu: &[f64], eps: f64) -> (f64, f64) {
    let mean: f64 = values.iter().zip(mu).map(|(v, m)| v * m).sum();
    let mass: f64 = values
        .iter()
        .zip(mu)
        .filter(|(v, _)| (*v - mean).abs() <= eps)
        .fold(0.0, |s, (_, m)| s + m);
    (mean, mass.clamp(0.0, 1.0))
}

fn field_concentration(f: &Field, mu: &[f64], eps: f64, samples: usize, seed: u64, index: u64) -> FieldConcentration {
    let n = f.n_points();
    let d = f.dim();
    // separate streams keep each sample independent of the sample count
    let mut dir_rng = ChaCha8Rng::seed_from_u64(seed);
    dir_rng.set_stream(2 * index);
    let mut center_rng = ChaCha8Rng::seed_from_u64(seed);
    center_rng.set_stream(2 * index + 1);

    let mut obs: Vec<(&'static str, usize, Vec<f64>)> = Vec::new();
    for a in 0..d {
        obs.push(("coordinate", 2 * a, (0..n).map(|x| f.at(x)[a].re).collect()));
        if (0..n).any(|x| f.at(x)[a].im != 0.0) {
            obs.push(("coordinate", 2 * a + 1, (0..n).map(|x| f.at(x)[a].im).collect()));
        }
    }
    for k in 0..samples {
        let eta: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(dir_rng.sample(StandardNormal), dir_rng.sample(StandardNormal)))
            .collect();
        let norm = eta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let vals = (0..n)
            .map(|x| f.at(x).iter().zip(&eta).map(|(p, q)| (p * q.conj()).re).sum::<f64>() / norm)
            .collect();
        obs.push(("linear", k, vals));
        let c = f.at(center_rng.random_range(0..n)).to_vec();
        let vals = (0..n)
            .map(|x| f.at(x).iter().zip(&c).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt())
            .collect();
        obs.push(("norm", k, vals));
    }
    let observables: Vec<Observable> = obs
        .par_iter()
        .map(|(kind, index, vals)| {
            let (mean, mass) = concentration_of(vals, mu, eps);
            Observable {
                kind,
                index: *index,
                mean,
                mass,
            }
        })
        .collect();
    let minimum = observables.iter().map(|o| o.mass).fold(1.0, f64::min);
    let first_moment = (0..n)
        .map(|x| mu[x] * f.at(x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .sum();
    FieldConcentration {
        observables,
        minimum,
        first_moment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use std::sync::Arc;

    #[test]
    fn boundaries() {
        let w = models::cycle_walk(10).unwrap();
        assert_eq!(walk_boundary(&w, &[3]).unwrap(), vec![2, 4]);
        assert_eq!(walk_boundary(&w, &[3, 4, 5]).unwrap(), vec![2, 6]);
        assert_eq!(walk_boundary(&w, &[0, 9]).unwrap(), vec![1, 8]);
        assert!(walk_boundary(&w, &(0..10).collect::<Vec<_>>()).unwrap().is_empty());
        assert_eq!(walk_boundary(&w, &[]).unwrap_err(), ErgodicError::EmptySet);
        let rel = FiniteRelation::uniform(&[0, 0, 1, 1]).unwrap();
        let k = Graphing::new([(0, 1), (2, 3)]);
        assert!(boundary(&rel, &k, &[0, 1]).unwrap().is_empty());
    }

    #[test]
    fn almost_fixed_on_cycle() {
        let w = models::cycle_walk(400).unwrap();
        let af = almost_fixed_from_set(&w, &(0..200).collect::<Vec<_>>()).unwrap();
        assert_eq!(af.closure.len(), 202);
        assert!((af.norm_sq - (af.mass_closure - af.mass_closure.powi(2))).abs() < 1e-12);
        assert!(af.rayleigh > 0.98);
        let mean: f64 = af.field.iter().zip(w.base()).map(|(f, m)| f * m).sum();
        assert!(mean.abs() < 1e-13);
        // only the two cut edges carry energy, once in each direction
        assert!((af.energy - 4.0 * 0.5 * 0.0025 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn almost_fixed_degenerate() {
        let w = models::cycle_walk(6).unwrap();
        assert!(matches!(
            almost_fixed_from_set(&w, &[0, 1, 2, 3, 4]),
            Err(ErgodicError::DegenerateSet { .. })
        ));
        // a whole class among several has zero energy
        let rel = Arc::new(FiniteRelation::uniform(&[0, 0, 0, 1, 1, 1]).unwrap());
        let k = Graphing::new([(0, 1), (1, 2), (3, 4), (4, 5)]);
        let w = crate::walks::regular_walk(rel, &k).unwrap();
        let af = almost_fixed_from_set(&w, &[0, 1, 2]).unwrap();
        assert!(af.energy.abs() < 1e-15);
    }

    #[test]
    fn sweep_indicator_of_class() {
        let rel = Arc::new(FiniteRelation::uniform(&[0, 0, 0, 1, 1, 1]).unwrap());
        let k = Graphing::new([(0, 1), (1, 2), (3, 4), (4, 5)]);
        let w = crate::walks::regular_walk(rel, &k).unwrap();
        let r = sweep_folner(&w, &[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], 0.1, 0.5).unwrap();
        assert_eq!(r.set, vec![0, 1, 2]);
        assert_eq!(r.ratio, 0.0);
        assert!(r.found);
    }

    #[test]
    fn sweep_constant_field_is_capped() {
        let w = models::cycle_walk(8).unwrap();
        let r = sweep_folner(&w, &[2.0; 8], 0.1, 0.25).unwrap();
        assert_eq!(r.swept.len(), 1);
        assert_eq!(r.swept[0].ratio, 0.0);
        assert!((r.swept[0].mass - 1.0).abs() < 1e-12);
        assert!(!r.found && r.set.is_empty());
    }

    #[test]
    fn sweep_errors() {
        let w = models::cycle_walk(4).unwrap();
        assert_eq!(sweep_folner(&w, &[0.0; 4], 0.1, 1.0).unwrap_err(), ErgodicError::ZeroField);
        assert_eq!(
            sweep_folner(&w, &[0.0, -1.0, 0.0, 0.0], 0.1, 1.0).unwrap_err(),
            ErgodicError::NegativeValue(1)
        );
    }

    #[test]
    fn sweep_ties_prefer_smaller_mass() {
        // two disjoint classes with equal ratio 0
        let rel = Arc::new(FiniteRelation::uniform(&[0, 0, 1, 1, 1, 1]).unwrap());
        let k = Graphing::new([(0, 1), (2, 3), (3, 4), (4, 5)]);
        let w = crate::walks::regular_walk(rel, &k).unwrap();
        let r = sweep_folner(&w, &[1.0, 1.0, 2.0, 2.0, 2.0, 2.0], 0.1, 1.0).unwrap();
        assert_eq!(r.set, vec![2, 3, 4, 5]);
        let r = sweep_folner(&w, &[2.0, 2.0, 1.0, 1.0, 1.0, 1.0], 0.1, 1.0).unwrap();
        assert_eq!(r.set, vec![0, 1]);
    }

    #[test]
    fn identity_walk_classes_are_folner() {
        let rel = Arc::new(FiniteRelation::uniform(&[0, 1, 2, 3]).unwrap());
        let w = RandomWalk::identity(rel);
        let r = folner_search(&w, 0.1, 0.5).unwrap();
        assert!(r.found);
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.set.len(), 1);
    }

    #[test]
    fn constant_field_concentrates() {
        let rel = FiniteRelation::uniform(&[0; 5]).unwrap();
        let f = Field::constant(5, &[Complex64::new(1.0, 2.0), Complex64::new(-3.0, 0.5)]);
        let r = concentration_report(&[f], &rel, 1e-6, 10, 3).unwrap();
        assert_eq!(r.minimum, 1.0);
        assert!((r.fields[0].first_moment - (5.0f64 + 9.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_valued_field_does_not_concentrate() {
        let rel = FiniteRelation::uniform(&[0; 8]).unwrap();
        let vals: Vec<f64> = (0..8).map(|x| if x < 4 { 0.5 } else { -0.5 }).collect();
        let r = concentration_report(&[Field::scalar(&vals)], &rel, 0.1, 5, 0).unwrap();
        assert_eq!(r.minimum, 0.0);
        assert_eq!(r.fields[0].observables[0].kind, "coordinate");
        assert_eq!(r.fields[0].observables[0].mass, 0.0);
    }

    #[test]
    fn more_samples_never_raise_minimum() {
        let rel = FiniteRelation::uniform(&[0; 30]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Field::random(30, 3, &mut rng);
        let mut last = f64::INFINITY;
        for s in [0, 1, 5, 20] {
            let r = concentration_report(std::slice::from_ref(&f), &rel, 0.5, s, 9).unwrap();
            assert!(r.minimum <= last);
            last = r.minimum;
        }
    }
}
