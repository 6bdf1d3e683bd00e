//! Property tests for the invariants every module promises.

mod common;

use common::*;
use kazhdan::ergodic::{almost_fixed_from_set, concentration_report, folner_candidates, sweep_folner};
use kazhdan::garland::{build_complex, zuk_report_with, ZukOptions};
use kazhdan::spectral::{
    diffusion, gauge_representation, gradient_energy, random_gauge_representation, random_unitary, spectrum_with,
    trivial_representation, Field, SpectralOptions,
};
use kazhdan::walks::{convolve, regular_walk};
use kazhdan::{relation::component_labels, Graphing};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn cocycle_chain_rule(seed in any::<u64>(), n in 3usize..30) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 3);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if rel.same_class(x, y) && rel.same_class(y, z) {
                        let lhs = rel.cocycle(x, y).unwrap() * rel.cocycle(y, z).unwrap();
                        let rhs = rel.cocycle(x, z).unwrap();
                        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn convolve_is_associative(seed in any::<u64>(), n in 2usize..16) {
        let mut r = rng(seed);
        let rel = uniform_relation(n);
        let (a, b, c) = (symmetric(&mut r, rel.clone()), symmetric(&mut r, rel.clone()), symmetric(&mut r, rel));
        let left = convolve(&convolve(&a, &b).unwrap(), &c).unwrap();
        let right = convolve(&a, &convolve(&b, &c).unwrap()).unwrap();
        for x in 0..n {
            for y in 0..n {
                prop_assert!((left.prob(x, y) - right.prob(x, y)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn support_components_match_graphing(seed in any::<u64>(), n in 4usize..25) {
        let mut r = rng(seed);
        let classes = r.random_range(1..=n / 2);
        let ids: Vec<usize> = (0..n).map(|x| x % classes).collect();
        let rel = std::sync::Arc::new(kazhdan::build_relation(&masses(&mut r, n), &ids).unwrap());
        // every point gets one random partner; components vary
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for x in 0..n {
            let mates: Vec<usize> = (0..n).filter(|&y| y != x && ids[y] == ids[x]).collect();
            let y = mates[r.random_range(0..mates.len())];
            edges.push((x.min(y), x.max(y)));
        }
        edges.sort_unstable();
        edges.dedup();
        let k = Graphing::new(edges.clone());
        let walk = regular_walk(rel.clone(), &k).unwrap();
        let expected = component_labels(n, edges);
        let got = walk.support_components();
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(expected[x] == expected[y], got[x] == got[y]);
            }
        }
    }

    #[test]
    fn powers_stay_stochastic(seed in any::<u64>(), n in 2usize..20, k in 1usize..8) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 2);
        let walk = reversible(&mut r, rel, 0.3);
        prop_assert!(walk.detailed_balance_violation() <= 1e-12);
        let p = walk.power(k);
        prop_assert!(p.max_row_sum_error() <= k as f64 * 1e-12 + 1e-15);
    }

    #[test]
    fn energy_is_half_gradient(seed in any::<u64>(), n in 2usize..18, d in 1usize..4) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 3);
        let walk = reversible(&mut r, rel, 0.4);
        let rep = random_gauge_representation(walk.relation(), d, &mut r);
        let xi = Field::random(n, d, &mut r);
        let op = diffusion(&walk, &rep).unwrap();
        let e = op.energy(&xi).unwrap();
        let g = gradient_energy(&walk, &rep, &xi).unwrap();
        let norm = xi.norm_sq(walk.base());
        prop_assert!(e >= -1e-12 * norm);
        prop_assert!((e - g).abs() <= 1e-12 * norm, "energy {} gradient {}", e, g);
    }

    #[test]
    fn spectrum_in_unit_interval_and_c2_matches_kappa(seed in any::<u64>(), n in 2usize..25) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 2);
        let walk = reversible(&mut r, rel, 0.3);
        let op = diffusion(&walk, &trivial_representation(walk.relation())).unwrap();
        let s = spectrum_with(&op, &SpectralOptions::default()).unwrap();
        prop_assert!(s.eigenvalues.iter().all(|&t| (-1.0 - 1e-12..=1.0 + 1e-12).contains(&t)));
        if let Some(k) = s.kappa {
            let c2 = s.poincare(2).unwrap();
            prop_assert_eq!(k < 1.0, c2.c_n_measured < 2.0);
            prop_assert!((c2.c_n_measured - (1.0 + k)).abs() <= 1e-12);
        } else {
            prop_assert!(s.degenerate);
        }
    }

    #[test]
    fn gauge_spectrum_is_trivial_tensor_identity(seed in any::<u64>(), n in 2usize..14, d in 1usize..4) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 2);
        let walk = reversible(&mut r, rel, 0.3);
        let opts = SpectralOptions::default();
        let scalar = spectrum_with(&diffusion(&walk, &trivial_representation(walk.relation())).unwrap(), &opts).unwrap();
        let mut expected: Vec<f64> = scalar.eigenvalues.iter().flat_map(|&t| std::iter::repeat_n(t, d)).collect();
        expected.sort_by(f64::total_cmp);
        let u: Vec<_> = (0..n).map(|_| random_unitary(d, &mut r)).collect();
        let m = random_unitary(d, &mut r);
        for blocks in [u.clone(), u.iter().map(|ux| &m * ux).collect()] {
            let rep = gauge_representation(walk.relation(), d, blocks).unwrap();
            let mut got = spectrum_with(&diffusion(&walk, &rep).unwrap(), &opts).unwrap().eigenvalues;
            got.sort_by(f64::total_cmp);
            prop_assert_eq!(got.len(), expected.len());
            for (a, b) in got.iter().zip(&expected) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn fixed_fields_are_invariant(seed in any::<u64>(), n in 2usize..14, d in 1usize..4) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 3);
        let walk = reversible(&mut r, rel, 0.3);
        let rep = random_gauge_representation(walk.relation(), d, &mut r);
        let op = diffusion(&walk, &rep).unwrap();
        let opts = SpectralOptions::default();
        let eig = op.eigen(&opts, true).unwrap();
        let fixed = eig.fields_where(op.weights(), |t| t >= 1.0 - opts.tol);
        // one invariant field per unit vector per class
        prop_assert_eq!(fixed.len(), d * walk.relation().n_classes());
        for (_, xi) in fixed {
            let norm = xi.norm_sq(walk.base()).sqrt();
            for (x, y, _) in walk.entries() {
                let b = rep.block(x, y).unwrap();
                let dev: f64 = (0..d)
                    .map(|a| {
                        let s: Complex64 = (0..d).map(|c| b[(a, c)] * xi.at(y)[c]).sum();
                        (s - xi.at(x)[a]).norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt();
                prop_assert!(dev <= 1e-8 * norm);
            }
        }
    }

    #[test]
    fn spectrum_is_reproducible(seed in any::<u64>(), n in 2usize..20) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 2);
        let walk = reversible(&mut r, rel, 0.3);
        let op = diffusion(&walk, &trivial_representation(walk.relation())).unwrap();
        let a = spectrum_with(&op, &SpectralOptions::default()).unwrap();
        let b = spectrum_with(&op, &SpectralOptions::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Random pure 2-complex: a random subset of the triangles of `K_n`.
fn random_complex(seed: u64, n: usize, keep: f64) -> Option<(Vec<f64>, Vec<[usize; 3]>)> {
    let mut r = rng(seed);
    let m = masses(&mut r, n);
    let mut tris = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if r.random_bool(keep) {
                    tris.push([a, b, c]);
                }
            }
        }
    }
    // every vertex must lie on a triangle
    let covered = (0..n).all(|v| tris.iter().any(|t| t.contains(&v)));
    covered.then_some((m, tris))
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn tau_delta_identities(seed in any::<u64>(), n in 4usize..9) {
        let Some((m, tris)) = random_complex(seed, n, 0.5) else { return Ok(()) };
        let c = build_complex(&m, &tris).unwrap();
        let mu = c.relation().masses().to_vec();
        for y in 0..n {
            let s: f64 = c.neighbors(y).iter().map(|&z| c.tau_delta_edge(y, z)).sum();
            let t = 2.0 * c.tau_delta_vertex(y);
            prop_assert!((s - t).abs() <= 1e-12 * t.max(1.0));
            for &z in c.neighbors(y) {
                let (lhs, rhs) = (mu[y] * c.tau_delta_edge(y, z), mu[z] * c.tau_delta_edge(z, y));
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs));
            }
        }
    }

    #[test]
    fn integrated_poincare_and_rescaling(seed in any::<u64>(), n in 4usize..9, scale in 1e-3f64..1e3) {
        let Some((m, tris)) = random_complex(seed, n, 0.6) else { return Ok(()) };
        let opts = ZukOptions { random_fields: 20, seed, ..ZukOptions::default() };
        let c = build_complex(&m, &tris).unwrap();
        let rep = zuk_report_with(&c, &opts).unwrap();
        if rep.link_failures.is_empty() && rep.min_lambda1.is_some_and(|l| l > 0.0) {
            prop_assert!(rep.poincare_worst_slack.unwrap() >= -1e-10);
        }
        let scaled: Vec<f64> = m.iter().map(|v| v * scale).collect();
        let again = zuk_report_with(&build_complex(&scaled, &tris).unwrap(), &opts).unwrap();
        prop_assert_eq!(rep.verdict, again.verdict);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn rayleigh_lower_bound(seed in any::<u64>(), n in 3usize..30) {
        let mut r = rng(seed);
        let walk = reversible(&mut r, uniform_relation(n), 0.15);
        let size = r.random_range(1..n);
        let mut pts: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(&mut pts[..], &mut r);
        let set = &pts[..size];
        match almost_fixed_from_set(&walk, set) {
            Ok(a) => prop_assert!(a.diffusion_form >= a.lower_bound - 1e-12),
            // the closure can swallow the whole space
            Err(kazhdan::ergodic::ErgodicError::DegenerateSet { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn swept_sets_respect_the_gap(seed in any::<u64>(), n in 3usize..30) {
        let mut r = rng(seed);
        let walk = reversible(&mut r, uniform_relation(n), 0.2);
        let opts = SpectralOptions::default();
        let op = diffusion(&walk, &trivial_representation(walk.relation())).unwrap();
        let Some(lambda) = spectrum_with(&op, &opts).unwrap().lambda else { return Ok(()) };
        let w = walk.base();
        for (_, f) in folner_candidates(&walk, &opts).unwrap() {
            if !f.iter().any(|&t| t > 0.0) {
                continue;
            }
            let rep = sweep_folner(&walk, &f, 0.5, 0.5).unwrap();
            for s in &rep.swept {
                let set = kazhdan::ergodic::level_set(&f, s.threshold);
                let mass: f64 = set.iter().map(|&x| w[x]).sum();
                if mass >= 1.0 - 1e-12 {
                    continue;
                }
                let mut g = vec![-mass; n];
                for &x in &set {
                    g[x] += 1.0;
                }
                let xi = Field::scalar(&g);
                let e = op.energy(&xi).unwrap();
                let norm = xi.norm_sq(w);
                prop_assert!(e / norm >= lambda - 1e-10, "E/‖·‖² {} < λ {}", e / norm, lambda);
            }
            // determinism
            prop_assert_eq!(&rep, &sweep_folner(&walk, &f, 0.5, 0.5).unwrap());
        }
    }

    #[test]
    fn sweep_guarantee(seed in any::<u64>(), n in 3usize..30, eps in 0.05f64..2.0) {
        let mut r = rng(seed);
        let walk = reversible(&mut r, uniform_relation(n), 0.1);
        let f: Vec<f64> = (0..n).map(|_| if r.random_bool(0.3) { 0.0 } else { r.random_range(0.0..1.0) }).collect();
        let rep = sweep_folner(&walk, &f, eps, 1.0).unwrap();
        if rep.guarantee_applies {
            prop_assert!(rep.found && rep.ratio < eps);
        }
        if rep.found {
            let b = exterior(&walk, &rep.set);
            prop_assert_eq!(b.into_iter().collect::<Vec<_>>(), rep.boundary.clone());
        }
    }

    #[test]
    fn concentration_is_reproducible_and_monotone(seed in any::<u64>(), n in 2usize..30, d in 1usize..4, k in 1usize..20) {
        let mut r = rng(seed);
        let rel = relation(&mut r, n, 1);
        let fields: Vec<Field> = (0..2).map(|_| Field::random(n, d, &mut r)).collect();
        let a = concentration_report(&fields, &rel, 0.3, k, seed).unwrap();
        prop_assert_eq!(&a, &concentration_report(&fields, &rel, 0.3, k, seed).unwrap());
        let b = concentration_report(&fields, &rel, 0.3, k + 5, seed).unwrap();
        prop_assert!(b.minimum <= a.minimum);
    }
}
