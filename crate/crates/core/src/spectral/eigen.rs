//! Eigensolvers for the symmetrized diffusion, one support component at a
//! time: dense Hermitian solves for small components, Lanczos with full
//! reorthogonalization and deflation of the fixed space for large ones.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::field::Field;
use super::operator::DiffusionOperator;
use super::representation::CMatrix;
use super::{SpectralError, SpectralOptions};

/// Components up to this size also get an SVD rank cross-check.
const RANK_CHECK_LIMIT: usize = 1024;
/// Krylov dimension cap per Lanczos run.
const LANCZOS_MAX_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Dense,
    /// Identity blocks: scalar solve, each eigenvalue repeated `d` times.
    Kronecker,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct ComponentEigen {
    /// Points of this component of the walk support, ascending.
    pub points: Vec<usize>,
    /// Ascending eigenvalues of the symmetrized block.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, coordinate `i·d + a` holding
    /// entry `a` at `points[i]`. Only when requested and solved densely.
    pub vectors: Option<CMatrix>,
    pub partial: bool,
    pub solver: Solver,
    /// Number of singular values of `I − S` at most `tol`, when computed.
    pub rank_deficiency: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Eigen {
    pub dim: usize,
    pub components: Vec<ComponentEigen>,
}

impl Eigen {
    /// All computed eigenvalues, ascending.
    pub fn values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.components.iter().flat_map(|c| c.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn partial(&self) -> bool {
        self.components.iter().any(|c| c.partial)
    }

    pub fn has_vectors(&self) -> bool {
        self.components.iter().all(|c| c.vectors.is_some())
    }

    pub fn rank_deficiency(&self) -> Option<usize> {
        self.components.iter().map(|c| c.rank_deficiency).sum()
    }

    pub fn solvers(&self) -> Vec<Solver> {
        let mut s: Vec<Solver> = self.components.iter().map(|c| c.solver).collect();
        s.sort_by_key(|s| *s as u8);
        s.dedup();
        s
    }

    /// Eigenvectors (in original, unweighted coordinates) whose eigenvalues
    /// satisfy `keep`, each normalized in the weighted inner product.
    pub fn fields_where<P: Fn(f64) -> bool>(&self, weights: &[f64], keep: P) -> Vec<(f64, Field)> {
        let n = weights.len();
        let d = self.dim;
        let mut out = Vec::new();
        for c in &self.components {
            let Some(vecs) = &c.vectors else { continue };
            for (k, &t) in c.values.iter().enumerate() {
                if !keep(t) {
                    continue;
                }
                let mut f = Field::zeros(n, d);
                for (i, &x) in c.points.iter().enumerate() {
                    let s = weights[x].sqrt().recip();
                    for a in 0..d {
                        f.at_mut(x)[a] = vecs[(i * d + a, k)] * s;
                    }
                }
                out.push((t, f));
            }
        }
        out
    }

    /// Weighted orthogonal projection of `xi` onto the span of eigenvectors
    /// with eigenvalue within `tol` of 1.
    pub fn project_fixed(&self, xi: &Field, weights: &[f64], tol: f64) -> Field {
        let d = self.dim;
        let mut out = Field::zeros(xi.n_points(), d);
        for c in &self.components {
            let Some(vecs) = &c.vectors else { continue };
            for (k, &t) in c.values.iter().enumerate() {
                if (t - 1.0).abs() > tol {
                    continue;
                }
                // coefficient in symmetrized coordinates u = W^{1/2} ξ
                let mut coef = Complex64::new(0.0, 0.0);
                for (i, &x) in c.points.iter().enumerate() {
                    let s = weights[x].sqrt();
                    for a in 0..d {
                        coef += vecs[(i * d + a, k)].conj() * xi.at(x)[a] * s;
                    }
                }
                for (i, &x) in c.points.iter().enumerate() {
                    let s = weights[x].sqrt().recip();
                    for a in 0..d {
                        out.at_mut(x)[a] += vecs[(i * d + a, k)] * coef * s;
                    }
                }
            }
        }
        out
    }
}

/// Points of each connected component of the walk's off-diagonal support,
/// ordered by smallest point.
pub(crate) fn support_components(op: &DiffusionOperator) -> Vec<Vec<usize>> {
    let labels = op.walk().support_components();
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (x, l) in labels.into_iter().enumerate() {
        groups.entry(l).or_default().push(x);
    }
    groups.into_values().collect()
}

impl DiffusionOperator {
    /// Eigen-decomposition of the symmetrized operator.
    pub fn eigen(&self, opts: &SpectralOptions, want_vectors: bool) -> Result<Eigen, SpectralError> {
        let comps = support_components(self);
        let components = comps
            .into_par_iter()
            .enumerate()
            .map(|(i, points)| {
                let seed = opts.seed.wrapping_add(i as u64);
                self.component_eigen(points, opts, want_vectors, seed)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Eigen {
            dim: self.dim(),
            components,
        })
    }

    fn component_eigen(
        &self,
        points: Vec<usize>,
        opts: &SpectralOptions,
        want_vectors: bool,
        seed: u64,
    ) -> Result<ComponentEigen, SpectralError> {
        let d = self.dim();
        let m = points.len();
        if self.representation().is_identity() {
            if m > opts.dense_limit {
                let sub = self.scalar_restricted(&points);
                let out = lanczos(&sub, m, opts, seed)?;
                return Ok(ComponentEigen {
                    points,
                    values: repeat_each(&out, d),
                    vectors: None,
                    partial: true,
                    solver: Solver::Lanczos,
                    rank_deficiency: None,
                });
            }
            let s = self.scalar_symmetrized_block(&points);
            let rank_deficiency = (m <= RANK_CHECK_LIMIT).then(|| rank_deficiency_real(&s, opts.tol) * d);
            let (values, vectors) = dense_real(s, want_vectors)?;
            let vectors = match vectors {
                Some(v) if m * d <= opts.dense_limit => Some(kron_identity(&v, d)),
                _ => None,
            };
            return Ok(ComponentEigen {
                points,
                values: repeat_each(&values, d),
                vectors,
                partial: false,
                solver: if d == 1 { Solver::Dense } else { Solver::Kronecker },
                rank_deficiency,
            });
        }
        let size = m * d;
        if size > opts.dense_limit {
            let sub = self.restricted(&points);
            let values = lanczos(&sub, size, opts, seed)?;
            return Ok(ComponentEigen {
                points,
                values,
                vectors: None,
                partial: true,
                solver: Solver::Lanczos,
                rank_deficiency: None,
            });
        }
        let s = self.symmetrized_block(&points);
        let (values, vectors, rank_deficiency) = if self.representation().is_real() {
            let re = s.map(|z| z.re);
            let rank = (size <= RANK_CHECK_LIMIT).then(|| rank_deficiency_real(&re, opts.tol));
            let (v, vecs) = dense_real(re, want_vectors)?;
            (v, vecs.map(|m| m.map(|x| Complex64::new(x, 0.0))), rank)
        } else {
            let rank = (size <= RANK_CHECK_LIMIT).then(|| rank_deficiency_complex(&s, opts.tol));
            let (v, vecs) = dense_complex(s, want_vectors)?;
            (v, vecs, rank)
        };
        Ok(ComponentEigen {
            points,
            values,
            vectors,
            partial: false,
            solver: Solver::Dense,
            rank_deficiency,
        })
    }

    fn restricted(&self, points: &[usize]) -> Restricted<'_> {
        Restricted {
            op: self,
            points: points.to_vec(),
            scalar: false,
        }
    }

    fn scalar_restricted(&self, points: &[usize]) -> Restricted<'_> {
        Restricted {
            op: self,
            points: points.to_vec(),
            scalar: true,
        }
    }
}

/// Matrix-free `S` restricted to one component.
struct Restricted<'a> {
    op: &'a DiffusionOperator,
    points: Vec<usize>,
    /// Apply the scalar kernel only (identity blocks).
    scalar: bool,
}

impl Restricted<'_> {
    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = if self.scalar { 1 } else { self.op.dim() };
        let n = self.op.n_points();
        if self.scalar {
            let w = self.op.weights();
            let mut full = vec![Complex64::new(0.0, 0.0); n];
            for (i, &x) in self.points.iter().enumerate() {
                full[x] = v[i];
            }
            let walk = self.op.walk();
            return self
                .points
                .iter()
                .map(|&x| {
                    walk.row(x)
                        .iter()
                        .map(|&(y, p)| full[y] * ((w[x] / w[y]).sqrt() * p))
                        .sum()
                })
                .collect();
        }
        let mut full = vec![Complex64::new(0.0, 0.0); n * d];
        for (i, &x) in self.points.iter().enumerate() {
            full[x * d..(x + 1) * d].copy_from_slice(&v[i * d..(i + 1) * d]);
        }
        let out = self.op.apply_symmetrized(&full);
        let mut res = Vec::with_capacity(v.len());
        for &x in &self.points {
            res.extend_from_slice(&out[x * d..(x + 1) * d]);
        }
        res
    }
}

fn repeat_each(values: &[f64], d: usize) -> Vec<f64> {
    values.iter().flat_map(|&v| std::iter::repeat_n(v, d)).collect()
}

fn kron_identity(v: &DMatrix<f64>, d: usize) -> CMatrix {
    let m = v.nrows();
    let mut out = CMatrix::zeros(m * d, m * d);
    for k in 0..m {
        for a in 0..d {
            for i in 0..m {
                out[(i * d + a, k * d + a)] = Complex64::new(v[(i, k)], 0.0);
            }
        }
    }
    out
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn dense_real(mut s: DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>), SpectralError> {
    let n = s.nrows();
    let st = s.transpose();
    s += st;
    s *= 0.5;
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10 * n.max(10))
        .ok_or_else(|| SpectralError::EigenFailure(format!("dense real solve of size {n}")))?;
    let order = sorted_order(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = want_vectors.then(|| DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok((values, vectors))
}

fn dense_complex(mut s: CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>), SpectralError> {
    let n = s.nrows();
    let sa = s.adjoint();
    s += sa;
    s *= Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, 10 * n.max(10))
        .ok_or_else(|| SpectralError::EigenFailure(format!("dense Hermitian solve of size {n}")))?;
    let order = sorted_order(eig.eigenvalues.as_slice());
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = want_vectors.then(|| CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]));
    Ok((values, vectors))
}

fn rank_deficiency_real(s: &DMatrix<f64>, tol: f64) -> usize {
    let n = s.nrows();
    let lap = DMatrix::<f64>::identity(n, n) - s;
    lap.singular_values().iter().filter(|&&v| v <= tol).count()
}

fn rank_deficiency_complex(s: &CMatrix, tol: f64) -> usize {
    let n = s.nrows();
    let lap = CMatrix::identity(n, n) - s;
    lap.singular_values().iter().filter(|&&v| v <= tol).count()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn orthogonalize(v: &mut [Complex64], against: &[Vec<Complex64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in against {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng, against: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    use rand::Rng;
    for _ in 0..8 {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        orthogonalize(&mut v, against);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|z| *z /= nv);
            return Some(v);
        }
    }
    None
}

/// Ascending computed eigenvalues of a Hermitian operator with spectrum in
/// `[−1, 1]`: every deflated eigenvalue-1 copy, then the converged extreme
/// Ritz values below `1 − tol`.
fn lanczos(op: &Restricted<'_>, n: usize, opts: &SpectralOptions, seed: u64) -> Result<Vec<f64>, SpectralError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 10 * n;
    let mut matvecs = 0usize;
    let mut deflated: Vec<Vec<Complex64>> = Vec::new();
    let mut fixed_values = Vec::new();
    'restart: loop {
        if deflated.len() >= n {
            fixed_values.sort_by(f64::total_cmp);
            return Ok(fixed_values);
        }
        let Some(q0) = random_unit(n, &mut rng, &deflated) else {
            fixed_values.sort_by(f64::total_cmp);
            return Ok(fixed_values);
        };
        let m_max = (n - deflated.len()).min(LANCZOS_MAX_STEPS);
        let mut basis = vec![q0];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        for j in 0..m_max {
            matvecs += 1;
            if matvecs > budget {
                return Err(SpectralError::EigenFailure(format!("lanczos exceeded {budget} products")));
            }
            let mut w = op.apply(&basis[j]);
            let alpha = dot(&basis[j], &w).re;
            orthogonalize(&mut w, &deflated);
            orthogonalize(&mut w, &basis);
            let beta = norm(&w);
            alphas.push(alpha);
            let exhausted = beta < 1e-12 || j + 1 == m_max;
            if j % 5 == 4 || exhausted {
                let k = alphas.len();
                let t = DMatrix::from_fn(k, k, |r, c| {
                    if r == c {
                        alphas[r]
                    } else if r + 1 == c {
                        betas[r]
                    } else if c + 1 == r {
                        betas[c]
                    } else {
                        0.0
                    }
                });
                let eig = SymmetricEigen::try_new(t, f64::EPSILON, 10 * k.max(10))
                    .ok_or_else(|| SpectralError::EigenFailure("tridiagonal solve".into()))?;
                let order = sorted_order(eig.eigenvalues.as_slice());
                let resid = |i: usize| if beta < 1e-12 { 0.0 } else { beta * eig.eigenvectors[(k - 1, i)].abs() };
                let top = *order.last().unwrap();
                let bottom = order[0];
                let theta = eig.eigenvalues[top];
                if resid(top) <= opts.iter_tol && theta >= 1.0 - opts.tol {
                    let mut y = vec![Complex64::new(0.0, 0.0); n];
                    for (i, q) in basis.iter().enumerate() {
                        let s = eig.eigenvectors[(i, top)];
                        for (yi, qi) in y.iter_mut().zip(q) {
                            *yi += qi * s;
                        }
                    }
                    orthogonalize(&mut y, &deflated);
                    let ny = norm(&y);
                    y.iter_mut().for_each(|z| *z /= ny);
                    deflated.push(y);
                    fixed_values.push(theta);
                    continue 'restart;
                }
                if resid(top) <= opts.iter_tol && resid(bottom) <= opts.iter_tol {
                    let mut values: Vec<f64> = order
                        .iter()
                        .filter(|&&i| resid(i) <= opts.iter_tol)
                        .map(|&i| eig.eigenvalues[i])
                        .collect();
                    values.extend_from_slice(&fixed_values);
                    values.sort_by(f64::total_cmp);
                    return Ok(values);
                }
                if exhausted {
                    return Err(SpectralError::EigenFailure(format!(
                        "lanczos stalled after {k} steps (top residual {:e})",
                        resid(top)
                    )));
                }
            }
            betas.push(beta);
            w.iter_mut().for_each(|z| *z /= beta);
            basis.push(w);
        }
        return Err(SpectralError::EigenFailure("lanczos did not converge".into()));
    }
}
