//! Two-dimensional simplicial complexes with vertex masses, their links,
//! and the weighted Garland/Żuk spectral criterion.
//!
//! With `δ(x, y) = μ(x)/μ(y)`, the triangles define
//!
//! * `τ_δ(y, z) = Σ_{xyz ∈ Σ} δ(x, y)`,
//! * `τ_δ(y) = ½ Σ_{x ~ y} δ(x, y) τ(x, y)`,
//! * `τ̲_δ(y, z) = Σ_{x : y, z ∈ L_x} τ(x, y) τ(x, z) δ(x, y) / 2τ(x)`,
//!
//! and the walks `ν(y→z) = τ_δ(y,z) / 2τ_δ(y)`, `ν̲(y→z) = τ̲_δ(y,z) / 2τ_δ(y)`,
//! both reversible for `μ̃(y) ∝ 2τ_δ(y) μ(y)`. The criterion compares the
//! smallest link gap `λ = min_x λ₁(L_x)` with `δ_μ³ / 2`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::relation::{build_relation, component_labels, FiniteRelation, RelationError};
use crate::spectral::{diffusion, trivial_representation, Field, SpectralError, SpectralOptions};
use crate::walks::{convolve, BaseMeasure, RandomWalk, WalkError};

/// Margin by which `min λ₁` must exceed `δ_μ³/2` to certify.
pub const STRICT_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GarlandError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("triangle {0} is listed twice")]
    DuplicateTriangle(usize),
    #[error("triangle {0} repeats a vertex")]
    DegenerateTriangle(usize),
    #[error("triangle {triangle} uses vertex {vertex}, out of range")]
    VertexOutOfRange { triangle: usize, vertex: usize },
    #[error("vertex {0} lies in no triangle")]
    EmptyLink(usize),
    #[error("link of vertex {0} is disconnected")]
    DisconnectedLink(usize),
    #[error("vertex {0} lies in no triangle")]
    IsolatedVertex(usize),
    #[error("ν² charges ({y}, {z}) where ν̲ vanishes")]
    SupportViolation { y: usize, z: usize },
    #[error("ν²/ν̲ reaches {ratio} above δ_μ³ = {bound}")]
    DominationViolated { ratio: f64, bound: f64 },
}

/// A 2-dimensional simplicial complex whose edges are those of its triangles.
#[derive(Debug, Clone)]
pub struct Complex2 {
    rel: Arc<FiniteRelation>,
    triangles: Vec<[usize; 3]>,
    /// `τ(y, z)` keyed by `(min, max)`.
    edge_tau: BTreeMap<(usize, usize), usize>,
    /// `τ(x)`.
    vertex_tau: Vec<usize>,
    adj: Vec<Vec<usize>>,
}

/// Builds a complex; masses are rescaled to a probability vector.
pub fn build_complex(masses: &[f64], triangles: &[[usize; 3]]) -> Result<Complex2, GarlandError> {
    let n = masses.len();
    if n == 0 {
        return Err(RelationError::Empty.into());
    }
    if let Some((point, &mass)) = masses.iter().enumerate().find(|(_, m)| !(**m > 0.0 && m.is_finite())) {
        return Err(RelationError::NonPositiveMass { point, mass }.into());
    }
    let mut seen = BTreeSet::new();
    let mut tris = Vec::with_capacity(triangles.len());
    for (i, t) in triangles.iter().enumerate() {
        if let Some(&vertex) = t.iter().find(|&&v| v >= n) {
            return Err(GarlandError::VertexOutOfRange { triangle: i, vertex });
        }
        let mut s = *t;
        s.sort_unstable();
        if s[0] == s[1] || s[1] == s[2] {
            return Err(GarlandError::DegenerateTriangle(i));
        }
        if !seen.insert(s) {
            return Err(GarlandError::DuplicateTriangle(i));
        }
        tris.push(s);
    }
    tris.sort_unstable();
    let mut edge_tau = BTreeMap::new();
    let mut vertex_tau = vec![0; n];
    for t in &tris {
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            *edge_tau.entry((a, b)).or_insert(0) += 1;
        }
        for &v in t {
            vertex_tau[v] += 1;
        }
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edge_tau.keys() {
        adj[a].push(b);
        adj[b].push(a);
    }
    for row in &mut adj {
        row.sort_unstable();
    }
    let total: f64 = masses.iter().sum();
    let probs: Vec<f64> = masses.iter().map(|m| m / total).collect();
    let labels = component_labels(n, edge_tau.keys().copied());
    let rel = Arc::new(build_relation(&probs, &labels).or_else(|e| match e {
        // rescaling can leave a rounding error just outside the tolerance
        RelationError::MassSumMismatch { sum } => {
            let fixed: Vec<f64> = probs.iter().map(|m| m / sum).collect();
            build_relation(&fixed, &labels)
        }
        e => Err(e),
    })?);
    Ok(Complex2 {
        rel,
        triangles: tris,
        edge_tau,
        vertex_tau,
        adj,
    })
}

impl Complex2 {
    pub fn relation(&self) -> &Arc<FiniteRelation> {
        &self.rel
    }

    pub fn n_vertices(&self) -> usize {
        self.rel.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edge_tau.keys().copied()
    }

    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.adj[x]
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of triangles containing the edge `{y, z}`.
    pub fn tau_edge(&self, y: usize, z: usize) -> usize {
        self.edge_tau.get(&(y.min(z), y.max(z))).copied().unwrap_or(0)
    }

    /// Number of triangles containing `x`.
    pub fn tau_vertex(&self, x: usize) -> usize {
        self.vertex_tau[x]
    }

    fn delta(&self, x: usize, y: usize) -> f64 {
        self.rel.mass(x) / self.rel.mass(y)
    }

    /// Third vertices `x` of the triangles on edge `{y, z}`.
    fn apexes(&self, y: usize, z: usize) -> impl Iterator<Item = usize> + '_ {
        // both neighbor lists are sorted
        let (a, b) = (&self.adj[y], &self.adj[z]);
        let mut i = 0;
        let mut j = 0;
        std::iter::from_fn(move || {
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let x = a[i];
                        i += 1;
                        j += 1;
                        return Some(x);
                    }
                }
            }
            None
        })
        .filter(move |&x| self.is_triangle(x, y, z))
    }

    fn is_triangle(&self, a: usize, b: usize, c: usize) -> bool {
        let mut t = [a, b, c];
        t.sort_unstable();
        self.triangles.binary_search(&t).is_ok()
    }

    /// `τ_δ(y, z) = Σ_{xyz} δ(x, y)`.
    pub fn tau_delta_edge(&self, y: usize, z: usize) -> f64 {
        self.apexes(y, z).map(|x| self.delta(x, y)).sum()
    }

    /// `τ_δ(y) = ½ Σ_{x ~ y} δ(x, y) τ(x, y)`.
    pub fn tau_delta_vertex(&self, y: usize) -> f64 {
        0.5 * self.adj[y]
            .iter()
            .map(|&x| self.delta(x, y) * self.tau_edge(x, y) as f64)
            .sum::<f64>()
    }

    /// `τ̲_δ(y, z)` summed over the common neighbors `x` of `y` and `z`
    /// (`z = y` allowed).
    pub fn tau_delta_under(&self, y: usize, z: usize) -> f64 {
        self.adj[y]
            .iter()
            .filter(|&&x| x != z && (z == y || self.tau_edge(x, z) > 0))
            .map(|&x| {
                self.tau_edge(x, y) as f64 * self.tau_edge(x, z) as f64 * self.delta(x, y)
                    / (2.0 * self.vertex_tau[x] as f64)
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkGraph {
    pub center: usize,
    /// Neighbors of the center, ascending.
    pub vertices: Vec<usize>,
    /// Pairs `{y, z}` with `{center, y, z}` a triangle.
    pub edges: Vec<(usize, usize)>,
    /// `τ(center, y)`, aligned with `vertices`.
    pub valence: Vec<usize>,
    /// `τ(center)`.
    pub total: usize,
}

impl LinkGraph {
    /// Stationary measure `μ_x(y) = τ(x, y) / 2τ(x)`.
    pub fn stationary(&self) -> Vec<f64> {
        self.valence.iter().map(|&v| v as f64 / (2.0 * self.total as f64)).collect()
    }

    pub fn is_connected(&self) -> bool {
        let index: BTreeMap<usize, usize> = self.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let labels = component_labels(self.vertices.len(), self.edges.iter().map(|(a, b)| (index[a], index[b])));
        labels.iter().all(|&l| l == labels[0])
    }
}

pub fn link(c: &Complex2, x: usize) -> Result<LinkGraph, GarlandError> {
    if c.vertex_tau[x] == 0 {
        return Err(GarlandError::EmptyLink(x));
    }
    let vertices = c.adj[x].clone();
    let edges: Vec<(usize, usize)> = c
        .triangles
        .iter()
        .filter(|t| t.contains(&x))
        .map(|t| {
            let mut o = t.iter().copied().filter(|&v| v != x);
            (o.next().unwrap(), o.next().unwrap())
        })
        .collect();
    let valence = vertices.iter().map(|&y| c.tau_edge(x, y)).collect();
    Ok(LinkGraph {
        center: x,
        vertices,
        edges,
        valence,
        total: c.vertex_tau[x],
    })
}

/// Smallest nonzero eigenvalue of `I − D_L` for the uniform walk on a
/// connected link.
pub fn link_lambda1(l: &LinkGraph) -> Result<f64, GarlandError> {
    if !l.is_connected() {
        return Err(GarlandError::DisconnectedLink(l.center));
    }
    let m = l.vertices.len();
    let index: BTreeMap<usize, usize> = l.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    // μ_x-symmetrization of D_L(y→z) = 1/τ(x,y): entries 1/√(τ(y)τ(z))
    let mut s = DMatrix::<f64>::zeros(m, m);
    for &(a, b) in &l.edges {
        let (i, j) = (index[&a], index[&b]);
        let w = 1.0 / ((l.valence[i] * l.valence[j]) as f64).sqrt();
        s[(i, j)] += w;
        s[(j, i)] += w;
    }
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10 * m.max(10))
        .ok_or_else(|| SpectralError::EigenFailure(format!("link of {}", l.center)))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    // connected: eigenvalue 1 is simple and the largest
    Ok(if m < 2 { 0.0 } else { 1.0 - v[m - 2] })
}

/// `δ_μ = max` over edges of `max(δ(y,z), δ(z,y))`; 1 without edges.
pub fn delta_mu_bound(c: &Complex2) -> f64 {
    c.edges()
        .map(|(y, z)| c.delta(y, z).max(c.delta(z, y)))
        .fold(1.0, f64::max)
}

/// The triangle walk `ν`, its companion `ν̲`, and the common base `μ̃`.
#[derive(Debug, Clone)]
pub struct TriangleWalks {
    pub nu: RandomWalk,
    pub nu_under: RandomWalk,
    pub tilde: Vec<f64>,
}

pub fn triangle_walks(c: &Complex2) -> Result<TriangleWalks, GarlandError> {
    let n = c.n_vertices();
    if let Some(x) = (0..n).find(|&x| c.vertex_tau[x] == 0) {
        return Err(GarlandError::IsolatedVertex(x));
    }
    let tau_y: Vec<f64> = (0..n).map(|y| c.tau_delta_vertex(y)).collect();
    let raw: Vec<f64> = (0..n).map(|y| 2.0 * tau_y[y] * c.rel.mass(y)).collect();
    let total: f64 = raw.iter().sum();
    let tilde: Vec<f64> = raw.iter().map(|m| m / total).collect();

    let nu_rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|y| {
            c.adj[y]
                .iter()
                .map(|&z| (z, c.tau_delta_edge(y, z) / (2.0 * tau_y[y])))
                .collect()
        })
        .collect();
    let under_rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|y| {
            // two-step targets through a common neighbor
            let targets: BTreeSet<usize> = c.adj[y].iter().flat_map(|&x| c.adj[x].iter().copied()).collect();
            targets
                .into_iter()
                .map(|z| (z, c.tau_delta_under(y, z) / (2.0 * tau_y[y])))
                .filter(|&(_, p)| p > 0.0)
                .collect()
        })
        .collect();
    let kind = BaseMeasure::Explicit(tilde.clone());
    let nu = RandomWalk::from_rows_unchecked(c.rel.clone(), nu_rows, tilde.clone(), kind.clone(), total);
    let nu_under = RandomWalk::from_rows_unchecked(c.rel.clone(), under_rows, tilde.clone(), kind, total);
    nu.validate()?;
    nu_under.validate()?;
    Ok(TriangleWalks { nu, nu_under, tilde })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Domination {
    /// `max ν²(y→z) / ν̲(y→z)` over pairs with `ν̲ > 0`.
    pub max_ratio: f64,
    /// `δ_μ³`.
    pub bound: f64,
}

/// Checks `ν² ≤ δ_μ³ ν̲` entrywise and that `ν̲` covers the support of `ν²`.
pub fn step2_domination(c: &Complex2) -> Result<Domination, GarlandError> {
    let w = triangle_walks(c)?;
    let sq = convolve(&w.nu, &w.nu)?;
    let bound = delta_mu_bound(c).powi(3);
    let mut max_ratio = 0.0f64;
    for (y, z, p) in sq.entries() {
        let q = w.nu_under.prob(y, z);
        if q <= 0.0 {
            return Err(GarlandError::SupportViolation { y, z });
        }
        max_ratio = max_ratio.max(p / q);
    }
    if max_ratio > bound + 1e-12 {
        return Err(GarlandError::DominationViolated { ratio: max_ratio, bound });
    }
    Ok(Domination { max_ratio, bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Every link is connected and `min λ₁ > δ_μ³/2`.
    Certified,
    /// Links are connected but the strict inequality fails.
    RefutedStrict,
    /// Some link is empty or disconnected.
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkEntry {
    pub vertex: usize,
    pub link_vertices: usize,
    pub link_edges: usize,
    pub connected: bool,
    pub lambda1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZukReport {
    pub links: Vec<LinkEntry>,
    pub min_lambda1: Option<f64>,
    /// Vertices whose link is empty or disconnected.
    pub link_failures: Vec<usize>,
    pub delta_mu: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub note: String,
    /// `1 + κ` for the simple diffusion of the triangle walk.
    pub c2_triangle_walk: Option<f64>,
    /// `δ_μ³ / λ`, the Poincaré constant the criterion guarantees.
    pub c2_criterion_bound: Option<f64>,
    pub domination: Option<Domination>,
    /// Smallest `(δ_μ³/λ)E_ν(ξ) − E_{ν²}(ξ)` over tested unit fields.
    pub poincare_worst_slack: Option<f64>,
    pub poincare_fields_tested: usize,
    pub seed: u64,
    pub max_degree: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZukOptions {
    pub random_fields: usize,
    pub seed: u64,
    pub spectral: SpectralOptions,
}

impl Default for ZukOptions {
    fn default() -> Self {
        Self {
            random_fields: 50,
            seed: 0,
            spectral: SpectralOptions::default(),
        }
    }
}

pub fn zuk_report(c: &Complex2) -> Result<ZukReport, GarlandError> {
    zuk_report_with(c, &ZukOptions::default())
}

pub fn zuk_report_with(c: &Complex2, opts: &ZukOptions) -> Result<ZukReport, GarlandError> {
    let n = c.n_vertices();
    let links: Vec<LinkEntry> = (0..n)
        .into_par_iter()
        .map(|x| match link(c, x) {
            Err(_) => Ok(LinkEntry {
                vertex: x,
                link_vertices: 0,
                link_edges: 0,
                connected: false,
                lambda1: None,
            }),
            Ok(l) => {
                let lambda1 = match link_lambda1(&l) {
                    Ok(v) => Some(v),
                    Err(GarlandError::DisconnectedLink(_)) => None,
                    Err(e) => return Err(e),
                };
                Ok(LinkEntry {
                    vertex: x,
                    link_vertices: l.vertices.len(),
                    link_edges: l.edges.len(),
                    connected: lambda1.is_some(),
                    lambda1,
                })
            }
        })
        .collect::<Result<_, GarlandError>>()?;
    let link_failures: Vec<usize> = links.iter().filter(|l| !l.connected).map(|l| l.vertex).collect();
    let min_lambda1 = links.iter().filter_map(|l| l.lambda1).reduce(f64::min);
    let delta_mu = delta_mu_bound(c);
    let threshold = delta_mu.powi(3) / 2.0;
    let verdict = match min_lambda1 {
        Some(l) if link_failures.is_empty() => {
            if l - threshold > STRICT_MARGIN {
                Verdict::Certified
            } else {
                Verdict::RefutedStrict
            }
        }
        _ => Verdict::Inapplicable,
    };
    let note = match verdict {
        Verdict::Certified => "criterion inequality holds on this finite model",
        Verdict::RefutedStrict => "criterion inequality fails: min lambda1 does not exceed delta_mu^3/2",
        Verdict::Inapplicable => "criterion hypotheses fail: some link is empty or disconnected",
    }
    .to_string();

    let mut report = ZukReport {
        links,
        min_lambda1,
        link_failures,
        delta_mu,
        threshold,
        verdict,
        note,
        c2_triangle_walk: None,
        c2_criterion_bound: None,
        domination: None,
        poincare_worst_slack: None,
        poincare_fields_tested: 0,
        seed: opts.seed,
        max_degree: c.max_degree(),
    };
    if verdict == Verdict::Inapplicable || (0..n).any(|x| c.vertex_tau[x] == 0) {
        return Ok(report);
    }
    let lambda = min_lambda1.unwrap_or(0.0);
    let walks = triangle_walks(c)?;
    report.domination = Some(step2_domination(c)?);
    let op = diffusion(&walks.nu, &trivial_representation(&c.rel))?;
    let eig = op.eigen(&opts.spectral, true)?;
    let spectrum = crate::spectral::SpectrumReport::from_eigen(&op, &eig, opts.spectral.tol);
    report.c2_triangle_walk = spectrum.kappa.map(|k| 1.0 + k);
    if lambda > 0.0 {
        let constant = delta_mu.powi(3) / lambda;
        report.c2_criterion_bound = Some(constant);
        let w = op.weights();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut fields: Vec<Field> = (0..opts.random_fields).map(|_| Field::random_real(n, &mut rng)).collect();
        fields.extend(
            eig.fields_where(w, |t| (t - 1.0).abs() > opts.spectral.tol)
                .into_iter()
                .map(|(_, f)| f),
        );
        let mut worst = f64::INFINITY;
        for xi in &fields {
            let norm = xi.norm_sq(w);
            if norm == 0.0 {
                continue;
            }
            let e1 = op.energy(xi)?;
            let e2 = op.energy_n(xi, 2)?;
            worst = worst.min((constant * e1 - e2) / norm);
        }
        report.poincare_worst_slack = Some(worst);
        report.poincare_fields_tested = fields.len();
    }
    Ok(report)
}
