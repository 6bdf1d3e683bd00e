use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::eigen::{Eigen, Solver};
use super::field::Field;
use super::operator::{diffusion, DiffusionOperator};
use super::representation::{random_gauge_representation, regular_representation, trivial_representation};
use super::{SpectralError, SpectralOptions};
use crate::relation::FiniteRelation;
use crate::walks::RandomWalk;

/// Largest `n` listed in the `c_n` table of a spectrum report.
pub const C_N_TABLE_MAX: usize = 8;
/// Slack allowed on `Sp(D) ⊂ [−1, 1]`.
const SPECTRUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareEntry {
    pub n: usize,
    /// `Σ_{k<n} κ^k`.
    pub formula: f64,
    /// `max Σ_{k<n} t^k` over non-fixed eigenvalues `t`.
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    /// Number of coordinates `N·d`.
    pub size: usize,
    pub eigenvalues: Vec<f64>,
    /// True when an iterative solve only produced part of the spectrum.
    pub partial: bool,
    pub solvers: Vec<Solver>,
    pub fixed_dim: usize,
    pub rank_deficiency: Option<usize>,
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    /// `Sp(D) \ {1}` is empty.
    pub degenerate: bool,
    pub c_inf: Option<f64>,
    pub c_n: Vec<PoincareEntry>,
    pub min_eigenvalue: f64,
    pub operator_norm: f64,
    pub self_adjoint_residual: f64,
    pub tol: f64,
    pub warnings: Vec<String>,
}

fn geometric_sum(t: f64, n: usize) -> f64 {
    let mut s = 0.0;
    let mut p = 1.0;
    for _ in 0..n {
        s += p;
        p *= t;
    }
    s
}

impl SpectrumReport {
    pub(crate) fn from_eigen(op: &DiffusionOperator, eig: &Eigen, tol: f64) -> Self {
        let eigenvalues = eig.values();
        let fixed_dim = eigenvalues.iter().filter(|&&t| (t - 1.0).abs() <= tol).count();
        let kappa = eigenvalues.iter().rev().copied().find(|&t| t <= 1.0 - tol);
        let lambda = kappa.map(|k| 1.0 - k);
        let measured = |n: usize| {
            eigenvalues
                .iter()
                .filter(|&&t| (t - 1.0).abs() > tol)
                .map(|&t| geometric_sum(t, n))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let c_n = match kappa {
            Some(k) => (2..=C_N_TABLE_MAX)
                .map(|n| PoincareEntry {
                    n,
                    formula: geometric_sum(k, n),
                    measured: measured(n),
                })
                .collect(),
            None => Vec::new(),
        };
        let min_eigenvalue = eigenvalues.first().copied().unwrap_or(1.0);
        let operator_norm = eigenvalues.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let self_adjoint_residual = op.self_adjoint_residual();
        let rank_deficiency = eig.rank_deficiency();
        let mut warnings = Vec::new();
        if let Some(r) = rank_deficiency {
            if r != fixed_dim {
                warnings.push(format!("fixed_dim {fixed_dim} differs from rank deficiency {r} of I - D"));
            }
        }
        if operator_norm > 1.0 + SPECTRUM_SLACK {
            warnings.push(format!("operator norm {operator_norm} exceeds 1"));
        }
        if self_adjoint_residual > 1e-10 {
            warnings.push(format!("self-adjointness residual {self_adjoint_residual:e}"));
        }
        Self {
            size: op.size(),
            eigenvalues,
            partial: eig.partial(),
            solvers: eig.solvers(),
            fixed_dim,
            rank_deficiency,
            kappa,
            lambda,
            degenerate: kappa.is_none(),
            c_inf: lambda.map(f64::recip),
            c_n,
            min_eigenvalue,
            operator_norm,
            self_adjoint_residual,
            tol,
            warnings,
        }
    }

    /// Poincaré constants at index `n` from this spectrum.
    pub fn poincare(&self, n: usize) -> Result<PoincareReport, SpectralError> {
        if n < 2 {
            return Err(SpectralError::BadIndex(n));
        }
        let kappa = self.kappa.ok_or(SpectralError::DegenerateSpectrum)?;
        let measured = self
            .eigenvalues
            .iter()
            .filter(|&&t| (t - 1.0).abs() > self.tol)
            .map(|&t| geometric_sum(t, n))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(PoincareReport {
            n,
            kappa,
            c_n_measured: measured,
            c_n_formula: geometric_sum(kappa, n),
            satisfied: measured < n as f64,
        })
    }
}

/// Spectrum of `D` with the default solver settings and clustering `tol`.
pub fn spectrum(d: &DiffusionOperator, tol: f64) -> Result<SpectrumReport, SpectralError> {
    spectrum_with(d, &SpectralOptions::with_tol(tol))
}

pub fn spectrum_with(d: &DiffusionOperator, opts: &SpectralOptions) -> Result<SpectrumReport, SpectralError> {
    let eig = d.eigen(opts, false)?;
    Ok(SpectrumReport::from_eigen(d, &eig, opts.tol))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareReport {
    pub n: usize,
    pub kappa: f64,
    pub c_n_measured: f64,
    pub c_n_formula: f64,
    /// `c_n_measured < n`.
    pub satisfied: bool,
}

pub fn poincare_report(d: &DiffusionOperator, n: usize, opts: &SpectralOptions) -> Result<PoincareReport, SpectralError> {
    spectrum_with(d, opts)?.poincare(n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletReport {
    pub kappa: f64,
    pub lambda: f64,
    pub c_inf: f64,
    /// `max ‖ξ − ξ̄‖² − c_∞ E(ξ)` over unit-norm sampled fields.
    pub max_violation: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

/// Checks `‖ξ − ξ̄‖² ≤ c_∞ E(ξ)` on seeded random unit fields, `ξ̄` being
/// the weighted projection on the eigenvalue-1 eigenspace.
pub fn dirichlet_report(
    d: &DiffusionOperator,
    samples: usize,
    seed: u64,
    opts: &SpectralOptions,
) -> Result<DirichletReport, SpectralError> {
    let eig = d.eigen(opts, true)?;
    let report = SpectrumReport::from_eigen(d, &eig, opts.tol);
    let kappa = report.kappa.ok_or(SpectralError::DegenerateSpectrum)?;
    if kappa >= 1.0 - opts.tol {
        return Err(SpectralError::NoGap { kappa });
    }
    if !eig.has_vectors() {
        return Err(SpectralError::EigenFailure(
            "fixed-space projection needs a dense solve".into(),
        ));
    }
    let lambda = 1.0 - kappa;
    let c_inf = 1.0 / lambda;
    let w = d.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_violation = f64::NEG_INFINITY;
    for _ in 0..samples {
        let mut xi = Field::random(d.n_points(), d.dim(), &mut rng);
        xi.scale(xi.norm_sq(w).sqrt().recip());
        let gap = eig.project_fixed(&xi, w, opts.tol);
        let lhs = xi.sub(&gap).norm_sq(w);
        let e = d.energy(&xi)?;
        max_violation = max_violation.max(lhs - c_inf * e);
    }
    Ok(DirichletReport {
        kappa,
        lambda,
        c_inf,
        max_violation,
        samples,
        seed,
        tol: opts.tol,
    })
}

/// The family of representations `c2_criterion` takes the sup over.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepFamily {
    pub trivial: bool,
    pub regular: bool,
    /// Number of random gauge representations.
    pub random: usize,
    /// Random dims cycle through `1..=max_dim`.
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for RepFamily {
    fn default() -> Self {
        Self {
            trivial: true,
            regular: true,
            random: 8,
            max_dim: 4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepOutcome {
    pub label: String,
    pub dim: usize,
    pub kappa: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C2Report {
    /// Sup of `c_2` over the non-degenerate members of the family.
    pub c2: Option<f64>,
    pub certified: bool,
    pub degenerate: bool,
    pub bounded: bool,
    pub eta: f64,
    /// Always set: a finite family can only provide evidence.
    pub finite_model_evidence: bool,
    pub reps: Vec<RepOutcome>,
    pub family: RepFamily,
}

pub fn c2_criterion(
    rel: &FiniteRelation,
    walk: &RandomWalk,
    family: &RepFamily,
    opts: &SpectralOptions,
) -> Result<C2Report, SpectralError> {
    if rel.len() != walk.len() {
        return Err(SpectralError::DimensionMismatch {
            expected: walk.len(),
            got: rel.len(),
        });
    }
    let mut members = Vec::new();
    if family.trivial {
        members.push(("trivial".to_string(), trivial_representation(rel)));
    }
    if family.regular {
        members.push(("regular".to_string(), regular_representation(rel)));
    }
    let max_dim = family.max_dim.max(1);
    for i in 0..family.random {
        let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
        rng.set_stream(i as u64);
        let d = 1 + i % max_dim;
        members.push((format!("gauge[{i}] d={d}"), random_gauge_representation(rel, d, &mut rng)));
    }
    let reps = members
        .into_par_iter()
        .map(|(label, rep)| {
            let op = diffusion(walk, &rep)?;
            let s = spectrum_with(&op, opts)?;
            let c2 = s.poincare(2).ok().map(|p| p.c_n_measured);
            Ok(RepOutcome {
                label,
                dim: rep.dim(),
                kappa: s.kappa,
                c2,
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    let c2 = reps.iter().filter_map(|r| r.c2).reduce(f64::max);
    let bounded = walk.is_bounded();
    Ok(C2Report {
        c2,
        certified: bounded && c2.is_some_and(|c| c < 2.0),
        degenerate: c2.is_none(),
        bounded,
        eta: walk.eta(),
        finite_model_evidence: true,
        reps,
        family: family.clone(),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;
    use std::sync::Arc;

    use super::*;
    use crate::relation::Graphing;
    use crate::walks::regular_walk;

    fn graph_op(n: usize, edges: Vec<(usize, usize)>) -> DiffusionOperator {
        let rel = Arc::new(FiniteRelation::uniform(&vec![0; n]).unwrap());
        let walk = regular_walk(rel.clone(), &Graphing::new(edges)).unwrap();
        diffusion(&walk, &trivial_representation(&rel)).unwrap()
    }

    fn cycle_op(n: usize) -> DiffusionOperator {
        graph_op(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    #[test]
    fn swap_has_spectrum_pm_one() {
        let s = spectrum(&cycle_op(2), 1e-9).unwrap();
        assert_eq!(s.eigenvalues.len(), 2);
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-14 && (s.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert_eq!(s.kappa, Some(-1.0));
    }

    #[test]
    fn complete_graph() {
        for m in 3..8 {
            let edges = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
            let s = spectrum(&graph_op(m, edges), 1e-9).unwrap();
            let k = -1.0 / (m as f64 - 1.0);
            assert_eq!(s.fixed_dim, 1);
            assert!((s.kappa.unwrap() - k).abs() < 1e-12);
            assert!(s.eigenvalues[..m - 1].iter().all(|t| (t - k).abs() < 1e-12));
        }
    }

    #[test]
    fn cycle_kappa() {
        for n in [3, 5, 8, 13] {
            let s = spectrum(&cycle_op(n), 1e-9).unwrap();
            assert!((s.kappa.unwrap() - (TAU / n as f64).cos()).abs() < 1e-12);
            assert!((s.c_inf.unwrap() - 1.0 / s.lambda.unwrap()).abs() < 1e-12);
            assert!(s.warnings.is_empty(), "{:?}", s.warnings);
        }
    }

    #[test]
    fn identity_walk_is_degenerate() {
        let rel = Arc::new(FiniteRelation::uniform(&[0, 1, 2]).unwrap());
        let walk = RandomWalk::identity(rel.clone());
        let op = diffusion(&walk, &trivial_representation(&rel)).unwrap();
        let s = spectrum(&op, 1e-9).unwrap();
        assert!(s.degenerate && s.kappa.is_none() && s.c_n.is_empty());
        assert_eq!(s.fixed_dim, 3);
        assert_eq!(s.poincare(2), Err(SpectralError::DegenerateSpectrum));
        let c2 = c2_criterion(&rel, &walk, &RepFamily::default(), &SpectralOptions::default()).unwrap();
        assert!(c2.degenerate && !c2.certified);
    }

    #[test]
    fn poincare_two_is_one_plus_kappa() {
        let s = spectrum(&cycle_op(7), 1e-9).unwrap();
        let p = s.poincare(2).unwrap();
        assert!((p.c_n_measured - (1.0 + s.kappa.unwrap())).abs() < 1e-10);
        assert_eq!(p.c_n_measured, p.c_n_formula);
        assert!(p.satisfied);
        assert_eq!(s.poincare(1), Err(SpectralError::BadIndex(1)));
    }

    #[test]
    fn poincare_with_zero_kappa() {
        // lazy walk on two points, ½(I + swap), has spectrum {0, 1}
        let rel = Arc::new(FiniteRelation::uniform(&[0, 0]).unwrap());
        let walk = crate::walks::custom_walk(
            rel.clone(),
            &[(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)],
            crate::walks::BaseMeasure::Mu,
        )
        .unwrap();
        let op = diffusion(&walk, &trivial_representation(&rel)).unwrap();
        let s = spectrum(&op, 1e-9).unwrap();
        assert!(s.kappa.unwrap().abs() < 1e-15);
        for n in 2..6 {
            let p = s.poincare(n).unwrap();
            assert!((p.c_n_measured - 1.0).abs() < 1e-15 && (p.c_n_formula - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn c6_third_poincare_constant() {
        let s = spectrum(&cycle_op(6), 1e-9).unwrap();
        let p = s.poincare(3).unwrap();
        // eigenvalues cos(πk/3) ∈ {1, ½, ½, −½, −½, −1}: 1 + t + t² is 1.75 at ½,
        // 0.75 at −½ and 1 at −1
        assert!((p.c_n_formula - 1.75).abs() < 1e-12);
        assert!((p.c_n_measured - 1.75).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_constant() {
        // κ = ½ on C6
        let op = cycle_op(6);
        let r = dirichlet_report(&op, 100, 3, &SpectralOptions::default()).unwrap();
        assert!((r.c_inf - 2.0).abs() < 1e-12);
        assert!(r.max_violation <= 1e-10);

        let r = dirichlet_report(&cycle_op(5), 100, 9, &SpectralOptions::default()).unwrap();
        assert!(r.max_violation <= 1e-10);
    }

    #[test]
    fn dirichlet_fixed_field_is_tight() {
        let op = cycle_op(5);
        let eig = op.eigen(&SpectralOptions::default(), true).unwrap();
        let xi = Field::scalar(&[3.0; 5]);
        let proj = eig.project_fixed(&xi, op.weights(), 1e-9);
        assert!(xi.sub(&proj).norm_sq(op.weights()) < 1e-24);
        assert!(op.energy(&xi).unwrap() < 1e-14);
    }

    #[test]
    fn no_gap_error() {
        let rel = Arc::new(FiniteRelation::uniform(&[0, 1]).unwrap());
        let walk = RandomWalk::identity(rel.clone());
        let op = diffusion(&walk, &trivial_representation(&rel)).unwrap();
        assert_eq!(
            dirichlet_report(&op, 1, 0, &SpectralOptions::default()),
            Err(SpectralError::DegenerateSpectrum)
        );
    }

    #[test]
    fn cycle_c2_is_close_to_two() {
        let n = 200;
        let rel = Arc::new(FiniteRelation::uniform(&vec![0; n]).unwrap());
        let walk = regular_walk(rel.clone(), &Graphing::new((0..n).map(|i| (i, (i + 1) % n)))).unwrap();
        let family = RepFamily {
            random: 2,
            ..Default::default()
        };
        let r = c2_criterion(&rel, &walk, &family, &SpectralOptions::default()).unwrap();
        assert!(r.c2.unwrap() >= 2.0 - 1e-3);
        // c2 < 2 strictly on any connected finite model, so the flag is set;
        // the vanishing margin is the signal
        assert!(r.c2.unwrap() < 2.0 && r.certified && r.finite_model_evidence);
        assert_eq!(r.reps.len(), 4);
    }
}
