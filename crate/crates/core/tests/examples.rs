//! Worked examples checked against exhaustive or closed-form references.

mod common;

use common::*;
use kazhdan::ergodic::{concentration_report, folner_search};
use kazhdan::models::{cycle_walk, schreier_walk};
use kazhdan::spectral::{diffusion, spectrum_with, trivial_representation, Field, SpectralOptions};
use num_complex::Complex64;
use rand::Rng;

/// Best `μ(∂A)/μ(A)` over every nonempty `A` with `μ(A) ≤ cap`.
fn exhaustive_folner(walk: &kazhdan::RandomWalk, cap: f64) -> f64 {
    let n = walk.len();
    assert!(n <= 20);
    let w = walk.base();
    let nbr: Vec<u32> = (0..n)
        .map(|x| walk.row(x).iter().fold(0u32, |m, &(y, _)| m | (1 << y)))
        .collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let mass: f64 = (0..n).filter(|&x| mask >> x & 1 == 1).map(|x| w[x]).sum();
        if mass > cap {
            continue;
        }
        let reach = (0..n).filter(|&x| mask >> x & 1 == 1).fold(0u32, |m, x| m | nbr[x]);
        let bd = reach & !mask;
        let bmass: f64 = (0..n).filter(|&x| bd >> x & 1 == 1).map(|x| w[x]).sum();
        best = best.min(bmass / mass);
    }
    best
}

#[test]
fn search_never_beats_exhaustive_optimum() {
    let mut r = rng(7);
    for trial in 0..40 {
        let n = r.random_range(4..=if trial < 5 { 20 } else { 14 });
        let walk = reversible(&mut r, uniform_relation(n), 0.15);
        let cap = r.random_range(0.2..0.6);
        let opt = exhaustive_folner(&walk, cap);
        let rep = folner_search(&walk, 10.0, cap).unwrap();
        assert!(rep.ratio >= opt - 1e-12, "trial {trial}: {} < optimum {opt}", rep.ratio);
        if rep.ratio.is_finite() {
            assert!(rep.mass <= cap + 1e-12);
            let b = exterior(&walk, &rep.set);
            assert_eq!(b.iter().copied().collect::<Vec<_>>(), rep.boundary);
        }
    }
}

#[test]
fn cycle_arcs_are_optimal() {
    // on C_n an arc of mass ≤ 1/2 has two boundary points, the best possible
    for n in [12, 17, 20] {
        let walk = cycle_walk(n).unwrap();
        let opt = exhaustive_folner(&walk, 0.5);
        let rep = folner_search(&walk, 1.0, 0.5).unwrap();
        assert!((opt - 2.0 / (n / 2) as f64).abs() < 1e-12);
        assert!((rep.ratio - opt).abs() < 1e-12, "C_{n}: {} vs {opt}", rep.ratio);
    }
}

#[test]
fn low_energy_fields_on_an_expander_concentrate() {
    let (rel, walk) = schreier_walk(200, 2, 11).unwrap();
    let op = diffusion(&walk, &trivial_representation(&rel)).unwrap();
    let opts = SpectralOptions::default();
    let lambda = spectrum_with(&op, &opts).unwrap().lambda.unwrap();
    let eig = op.eigen(&opts, true).unwrap();
    let low: Vec<Field> = eig
        .fields_where(op.weights(), |t| t < 1.0 - opts.tol)
        .into_iter()
        .rev()
        .take(3)
        .map(|(_, f)| f)
        .collect();
    let eps = 0.1;
    // ‖ξ − ξ̄‖² ≤ E/λ, and Chebyshev holds for every 1-Lipschitz observable:
    // keeping E ≤ 0.1·λ·ε² gives concentration ≥ 0.9
    let mut r = rng(3);
    let w = walk.base();
    let fields: Vec<Field> = (0..4)
        .map(|_| {
            let mut xi = Field::constant(200, &[Complex64::new(1.0, 0.0), Complex64::new(0.0, -0.5)]);
            for (k, v) in low.iter().enumerate() {
                let c = Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0));
                for x in 0..200 {
                    xi.at_mut(x)[k % 2] += c * v.at(x)[0];
                }
            }
            xi
        })
        .map(|xi| {
            let mean = Field::constant(200, &mean_of(&xi, w));
            let mut dev = xi.sub(&mean);
            let e: f64 = (0..2)
                .map(|a| {
                    let comp = Field::new(1, (0..200).map(|x| dev.at(x)[a]).collect()).unwrap();
                    op.energy(&comp).unwrap()
                })
                .sum();
            dev.scale((0.1 * lambda * eps * eps / e).sqrt());
            let mut out = mean;
            for x in 0..200 {
                for a in 0..2 {
                    out.at_mut(x)[a] += dev.at(x)[a];
                }
            }
            out
        })
        .collect();
    for xi in &fields {
        let var = xi.sub(&Field::constant(200, &mean_of(xi, w))).norm_sq(w);
        assert!(var <= 0.1 * eps * eps * (1.0 + 1e-9), "variance {var}");
    }
    let rep = concentration_report(&fields, &rel, eps, 32, 5).unwrap();
    assert!(rep.minimum >= 0.9, "minimum {}", rep.minimum);
}

fn mean_of(xi: &Field, w: &[f64]) -> Vec<Complex64> {
    (0..xi.dim())
        .map(|a| (0..xi.n_points()).map(|x| xi.at(x)[a] * w[x]).sum())
        .collect()
}

#[test]
fn expander_has_no_small_folner_sets() {
    let (_, walk) = schreier_walk(200, 2, 11).unwrap();
    let op = diffusion(&walk, &trivial_representation(walk.relation())).unwrap();
    let lambda = spectrum_with(&op, &SpectralOptions::default()).unwrap().lambda.unwrap();
    let rep = folner_search(&walk, lambda / 2.0 - 1e-6, 0.3).unwrap();
    assert!(!rep.found, "ratio {} below λ/2 = {}", rep.ratio, lambda / 2.0);
}
