use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use kazhdan::ergodic::{concentration_report, folner_search_with, ErgodicError};
use kazhdan::garland::{delta_mu_bound, zuk_report_with, GarlandError, ZukOptions};
use kazhdan::models::schreier_walk;
use kazhdan::spectral::{
    c2_criterion, diffusion, dirichlet_report, gradient_energy, spectrum_with, trivial_representation, Field,
    RepFamily, Representation, SpectralError, SpectralOptions,
};
use kazhdan::walks::{RandomWalk, WalkError};
use kazhdan::{validate_graphing, RelationError};
use serde::Serialize;
use serde_json::{json, Value};

use crate::document::{parse_document, Document, DocumentError};
use crate::output::to_json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "KAZHDAN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kazhdan", version, about = "Spectral gaps, Poincaré constants and Følner sets of random walks on finite measured relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Eigenvalues within this distance of 1 count as fixed.
    #[arg(long, global = true, default_value_t = kazhdan::spectral::DEFAULT_TOL)]
    pub tol: f64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    /// Largest component (in coordinates) solved densely.
    #[arg(long, global = true, default_value_t = kazhdan::spectral::DENSE_LIMIT)]
    pub dense_limit: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a relation, graphing, walk, complex, representation or field document.
    Validate { input: PathBuf },
    /// Full spectrum of the diffusion operator.
    Spectrum {
        walk: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// κ, λ = 1 − κ and c_∞ = 1/λ.
    Gap {
        walk: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Poincaré constant c_n, measured and from κ.
    Poincare {
        walk: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rep: Option<PathBuf>,
    },
    /// Dirichlet inequality on seeded random unit fields.
    Dirichlet {
        walk: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Energy of a field, as ⟨(I − D^n)ξ, ξ⟩ and (n = 1) as a gradient sum.
    Energy {
        walk: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        rep: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Sup of c_2 over a seeded family of representations.
    C2 {
        walk: PathBuf,
        /// Number of random gauge representations.
        #[arg(long, default_value_t = 8)]
        reps: usize,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
    },
    /// Link spectra and the weighted Garland/Żuk criterion of a 2-complex.
    Zuk {
        complex: PathBuf,
        /// Random fields for the integrated Poincaré check.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Følner set search by eigenvector level-set sweeps.
    Folner {
        walk: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        cap: f64,
    },
    /// Gap of a seeded Schreier walk of random permutations.
    Kesten {
        /// Number of random permutations (each used with its inverse).
        #[arg(long, default_value_t = 2)]
        perms: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Random gauge representations in the c_2 family.
        #[arg(long, default_value_t = 0)]
        reps: usize,
    },
    /// Concentration of fields around their means.
    Concentrate {
        /// Relation or walk document supplying the masses.
        #[arg(long)]
        relation: PathBuf,
        #[arg(required = true)]
        fields: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Validate { .. } => "validate",
            Self::Spectrum { .. } => "spectrum",
            Self::Gap { .. } => "gap",
            Self::Poincare { .. } => "poincare",
            Self::Dirichlet { .. } => "dirichlet",
            Self::Energy { .. } => "energy",
            Self::C2 { .. } => "c2",
            Self::Zuk { .. } => "zuk",
            Self::Folner { .. } => "folner",
            Self::Kesten { .. } => "kesten",
            Self::Concentrate { .. } => "concentrate",
        }
    }
}

/// A failed run: exit code, error kind and message.
#[derive(Debug, Clone)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    fn validation(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            kind: kind.to_string(),
            message: message.into(),
        }
    }
}

/// Innermost variant name of a nested error, e.g. `AsymmetricSupport`.
fn variant_name(debug: &str) -> String {
    const WRAPPERS: [&str; 6] = ["Parse", "Relation", "Walk", "Spectral", "Garland", "Ergodic"];
    let mut s = debug;
    loop {
        let end = s.find(|c: char| !c.is_alphanumeric()).unwrap_or(s.len());
        let ident = &s[..end];
        if WRAPPERS.contains(&ident) && s[end..].starts_with('(') {
            s = &s[end + 1..];
        } else {
            return ident.to_string();
        }
    }
}

fn spectral_code(e: &SpectralError) -> i32 {
    match e {
        SpectralError::EigenFailure(_) | SpectralError::DegenerateSpectrum | SpectralError::NoGap { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_VALIDATION,
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        let code = match &e {
            DocumentError::Spectral(s) => spectral_code(s),
            _ => EXIT_VALIDATION,
        };
        let kind = match &e {
            DocumentError::Parse(_) => "ParseError".to_string(),
            other => variant_name(&format!("{other:?}")),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        Self {
            code: spectral_code(&e),
            kind: variant_name(&format!("{e:?}")),
            message: e.to_string(),
        }
    }
}

impl From<GarlandError> for Failure {
    fn from(e: GarlandError) -> Self {
        let code = match &e {
            GarlandError::Spectral(s) => spectral_code(s),
            GarlandError::DominationViolated { .. } => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            kind: variant_name(&format!("{e:?}")),
            message: e.to_string(),
        }
    }
}

impl From<ErgodicError> for Failure {
    fn from(e: ErgodicError) -> Self {
        let code = match &e {
            ErgodicError::Spectral(s) => spectral_code(s),
            ErgodicError::BoundViolated { .. } | ErgodicError::GuaranteeViolated { .. } => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            kind: variant_name(&format!("{e:?}")),
            message: e.to_string(),
        }
    }
}

impl From<WalkError> for Failure {
    fn from(e: WalkError) -> Self {
        Self::validation(&variant_name(&format!("{e:?}")), e.to_string())
    }
}

impl From<RelationError> for Failure {
    fn from(e: RelationError) -> Self {
        Self::validation(&variant_name(&format!("{e:?}")), e.to_string())
    }
}

fn load(path: &Path) -> Result<Document, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::validation("ReadError", format!("{}: {e}", path.display())))?;
    parse_document(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn expect_walk(path: &Path) -> Result<RandomWalk, Failure> {
    match load(path)? {
        Document::Walk(w) => Ok(w),
        other => Err(Failure::validation(
            "WrongDocumentKind",
            format!("{}: expected a walk, found a {}", path.display(), other.kind()),
        )),
    }
}

fn representation(walk: &RandomWalk, path: &Option<PathBuf>) -> Result<Representation, Failure> {
    let Some(path) = path else {
        return Ok(trivial_representation(walk.relation()));
    };
    match load(path)? {
        Document::Representation(r) => Ok(r.build(walk)?),
        other => Err(Failure::validation(
            "WrongDocumentKind",
            format!("{}: expected a representation, found a {}", path.display(), other.kind()),
        )),
    }
}

fn expect_field(path: &Path) -> Result<Field, Failure> {
    match load(path)? {
        Document::Field(f) => Ok(f),
        other => Err(Failure::validation(
            "WrongDocumentKind",
            format!("{}: expected a field, found a {}", path.display(), other.kind()),
        )),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    seed: u64,
    tolerances: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<Value>,
    exit_code: i32,
}

/// Runs a parsed command line; returns the exit code and the JSON report.
pub fn run(cli: &Cli) -> (i32, String) {
    let opts = SpectralOptions {
        tol: cli.tol,
        dense_limit: cli.dense_limit,
        seed: cli.seed,
        ..SpectralOptions::default()
    };
    let mut tolerances = json!({
        "tol": cli.tol,
        "dense_limit": cli.dense_limit,
        "iter_tol": opts.iter_tol,
        "row_sum": kazhdan::walks::ROW_SUM_TOL,
        "detailed_balance_rel": kazhdan::walks::BALANCE_REL_TOL,
        "unitary": kazhdan::spectral::UNITARY_TOL,
    });
    if matches!(cli.command, Command::Zuk { .. }) {
        tolerances["strict_margin"] = json!(kazhdan::garland::STRICT_MARGIN);
    }
    let outcome = if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        Err(Failure::validation("InvalidTolerance", format!("--tol must be positive, got {}", cli.tol)))
    } else {
        dispatch(&cli.command, cli.seed, &opts)
    };
    let (code, result, error) = match outcome {
        Ok((code, v)) => (code, Some(v), None),
        Err(f) => (f.code, None, Some(json!({"kind": f.kind, "message": f.message}))),
    };
    let env = Envelope {
        command: cli.command.name(),
        seed: cli.seed,
        tolerances,
        result,
        error,
        exit_code: code,
    };
    (code, to_json(&env))
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn dispatch(cmd: &Command, seed: u64, opts: &SpectralOptions) -> Result<(i32, Value), Failure> {
    match cmd {
        Command::Validate { input } => validate(input),
        Command::Spectrum { walk, rep } => {
            let w = expect_walk(walk)?;
            let op = diffusion(&w, &representation(&w, rep)?)?;
            Ok((EXIT_OK, value(&spectrum_with(&op, opts)?)))
        }
        Command::Gap { walk, rep } => {
            let w = expect_walk(walk)?;
            let op = diffusion(&w, &representation(&w, rep)?)?;
            let s = spectrum_with(&op, opts)?;
            Ok((
                EXIT_OK,
                json!({
                    "size": s.size,
                    "kappa": s.kappa,
                    "lambda": s.lambda,
                    "c_inf": s.c_inf,
                    "fixed_dim": s.fixed_dim,
                    "degenerate": s.degenerate,
                    "partial": s.partial,
                    "eta": w.eta(),
                    "warnings": s.warnings,
                }),
            ))
        }
        Command::Poincare { walk, n, rep } => {
            let w = expect_walk(walk)?;
            let op = diffusion(&w, &representation(&w, rep)?)?;
            Ok((EXIT_OK, value(&spectrum_with(&op, opts)?.poincare(*n)?)))
        }
        Command::Dirichlet { walk, rep, samples } => {
            let w = expect_walk(walk)?;
            let op = diffusion(&w, &representation(&w, rep)?)?;
            let r = dirichlet_report(&op, *samples, seed, opts)?;
            let code = if r.max_violation <= 1e-9 { EXIT_OK } else { EXIT_NUMERICAL };
            Ok((code, value(&r)))
        }
        Command::Energy { walk, field, rep, n } => {
            let w = expect_walk(walk)?;
            let r = representation(&w, rep)?;
            let op = diffusion(&w, &r)?;
            let xi = expect_field(field)?;
            let e = op.energy_n(&xi, *n)?;
            let grad = if *n == 1 { Some(gradient_energy(&w, &r, &xi)?) } else { None };
            Ok((
                EXIT_OK,
                json!({
                    "n": n,
                    "energy": e,
                    "gradient_energy": grad,
                    "norm_sq": xi.norm_sq(op.weights()),
                }),
            ))
        }
        Command::C2 { walk, reps, max_dim } => {
            let w = expect_walk(walk)?;
            let family = RepFamily {
                random: *reps,
                max_dim: *max_dim,
                seed,
                ..RepFamily::default()
            };
            Ok((EXIT_OK, value(&c2_criterion(w.relation(), &w, &family, opts)?)))
        }
        Command::Zuk { complex, samples } => {
            let c = match load(complex)? {
                Document::Complex(c) => c,
                other => {
                    return Err(Failure::validation(
                        "WrongDocumentKind",
                        format!("expected a complex, found a {}", other.kind()),
                    ))
                }
            };
            let zo = ZukOptions {
                random_fields: *samples,
                seed,
                spectral: *opts,
            };
            Ok((EXIT_OK, value(&zuk_report_with(&c, &zo)?)))
        }
        Command::Folner { walk, eps, cap } => {
            let w = expect_walk(walk)?;
            Ok((EXIT_OK, value(&folner_search_with(&w, *eps, *cap, opts)?)))
        }
        Command::Kesten { perms, points, reps } => {
            if *perms == 0 || *points == 0 {
                return Err(Failure::validation("InvalidArgument", "--perms and --points must be positive"));
            }
            let (rel, w) = schreier_walk(*points, *perms, seed)?;
            let op = diffusion(&w, &trivial_representation(&rel))?;
            let s = spectrum_with(&op, opts)?;
            let family = RepFamily {
                regular: false,
                random: *reps,
                seed,
                ..RepFamily::default()
            };
            let c2 = c2_criterion(&rel, &w, &family, opts)?;
            let k = *perms as f64;
            Ok((
                EXIT_OK,
                json!({
                    "points": points,
                    "perms": perms,
                    "orbits": rel.n_classes(),
                    "kappa": s.kappa,
                    "lambda": s.lambda,
                    "min_eigenvalue": s.min_eigenvalue,
                    // spectral radius of the simple walk on the free group
                    "free_group_rho": (2.0 * k - 1.0).sqrt() / k,
                    "c2": c2,
                }),
            ))
        }
        Command::Concentrate {
            relation,
            fields,
            eps,
            samples,
        } => {
            let rel = match load(relation)? {
                Document::Relation(r) => r.relation,
                Document::Walk(w) => w.relation_arc().clone(),
                other => {
                    return Err(Failure::validation(
                        "WrongDocumentKind",
                        format!("expected a relation or walk, found a {}", other.kind()),
                    ))
                }
            };
            let fs = fields.iter().map(|p| expect_field(p)).collect::<Result<Vec<_>, _>>()?;
            Ok((EXIT_OK, value(&concentration_report(&fs, &rel, *eps, *samples, seed)?)))
        }
    }
}

fn validate(path: &Path) -> Result<(i32, Value), Failure> {
    let doc = load(path)?;
    let (valid, details) = match &doc {
        Document::Relation(r) => match &r.graphing {
            Some(k) => {
                let report = validate_graphing(&r.relation, k);
                (report.valid, value(&report))
            }
            None => (
                true,
                json!({"points": r.relation.len(), "classes": r.relation.n_classes()}),
            ),
        },
        Document::Walk(w) => (
            true,
            json!({
                "points": w.len(),
                "classes": w.relation().n_classes(),
                "max_row_sum_error": w.max_row_sum_error(),
                "detailed_balance_violation": w.detailed_balance_violation(),
                "eta": w.eta(),
            }),
        ),
        Document::Complex(c) => {
            let failures: Vec<usize> = (0..c.n_vertices())
                .filter(|&x| {
                    kazhdan::garland::link(c, x).map(|l| !l.is_connected()).unwrap_or(true)
                })
                .collect();
            (
                true,
                json!({
                    "vertices": c.n_vertices(),
                    "edges": c.edges().count(),
                    "triangles": c.triangles().len(),
                    "max_degree": c.max_degree(),
                    "delta_mu": delta_mu_bound(c),
                    "link_failures": failures,
                }),
            )
        }
        Document::Representation(r) => (true, json!({"dim": r.dim})),
        Document::Field(f) => (true, json!({"dim": f.dim(), "points": f.n_points()})),
    };
    let code = if valid { EXIT_OK } else { EXIT_VALIDATION };
    Ok((code, json!({"kind": doc.kind(), "valid": valid, "details": details})))
}
