//! wasm-bindgen exports for the static demo page. Every export returns a
//! JSON string; errors surface as JS exceptions.

use kazhdan::ergodic::folner_search;
use kazhdan::models::{cycle_walk, schreier_walk, tetrahedron};
use kazhdan::spectral::{diffusion, spectrum_with, trivial_representation, SpectralOptions, SpectrumReport};
use kazhdan::walks::RandomWalk;
use kazhdan::zuk_report;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest model the page will solve; dense solves grow as `n³`.
pub const MAX_POINTS: usize = 600;

fn check_points(n: usize) -> Result<(), String> {
    if (3..=MAX_POINTS).contains(&n) {
        Ok(())
    } else {
        Err(format!("number of points must be between 3 and {MAX_POINTS}"))
    }
}

fn gap(walk: &RandomWalk) -> Result<SpectrumReport, String> {
    let op = diffusion(walk, &trivial_representation(walk.relation())).map_err(|e| e.to_string())?;
    spectrum_with(&op, &SpectralOptions::default()).map_err(|e| e.to_string())
}

fn summary(s: &SpectrumReport) -> Value {
    json!({
        "kappa": s.kappa,
        "lambda": s.lambda,
        "c_inf": s.c_inf,
        "eigenvalues": s.eigenvalues,
    })
}

/// Spectral gap of the cycle `C_n` next to a seeded Schreier walk of
/// `perms` random permutations of `n` points.
pub fn kesten_json(n: usize, perms: usize, seed: u64) -> Result<String, String> {
    check_points(n)?;
    if !(1..=8).contains(&perms) {
        return Err("between 1 and 8 permutations".into());
    }
    let cycle = gap(&cycle_walk(n).map_err(|e| e.to_string())?)?;
    let (_, walk) = schreier_walk(n, perms, seed).map_err(|e| e.to_string())?;
    let schreier = gap(&walk)?;
    Ok(json!({
        "n": n,
        "perms": perms,
        "seed": seed,
        "cycle": summary(&cycle),
        "schreier": summary(&schreier),
        "components": walk.relation().n_classes(),
    })
    .to_string())
}

/// Żuk report of the boundary of the 3-simplex with the given masses.
pub fn zuk_json(masses: &[f64]) -> Result<String, String> {
    let c = tetrahedron(masses).map_err(|e| e.to_string())?;
    let r = zuk_report(&c).map_err(|e| e.to_string())?;
    serde_json::to_string(&r).map_err(|e| e.to_string())
}

/// Best Følner set found on `C_n` by eigenvector sweeps.
pub fn folner_json(n: usize, eps: f64, cap: f64) -> Result<String, String> {
    check_points(n)?;
    let walk = cycle_walk(n).map_err(|e| e.to_string())?;
    let r = folner_search(&walk, eps, cap).map_err(|e| e.to_string())?;
    let mut v = serde_json::to_value(&r).map_err(|e| e.to_string())?;
    v["n"] = json!(n);
    Ok(v.to_string())
}

#[wasm_bindgen]
pub fn kesten(n: usize, perms: usize, seed: u32) -> Result<String, JsError> {
    kesten_json(n, perms, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn zuk_tetrahedron(masses: Vec<f64>) -> Result<String, JsError> {
    zuk_json(&masses).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn folner_cycle(n: usize, eps: f64, cap: f64) -> Result<String, JsError> {
    folner_json(n, eps, cap).map_err(|e| JsError::new(&e))
}
