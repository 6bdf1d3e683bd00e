use nalgebra::DMatrix;
use num_complex::Complex64;

use super::field::Field;
use super::representation::{CMatrix, Representation};
use super::SpectralError;
use crate::walks::RandomWalk;

/// `D_{ν,π}` on sections weighted by the walk's base measure.
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    walk: RandomWalk,
    rep: Representation,
    /// `π(x, y)` aligned with the walk rows; `None` for identity blocks.
    blocks: Option<Vec<Vec<CMatrix>>>,
}

/// Builds `D_{ν,π}` after checking that `ν` is reversible and that `π` has
/// a block on every step of the walk.
pub fn diffusion(walk: &RandomWalk, rep: &Representation) -> Result<DiffusionOperator, SpectralError> {
    if rep.n_points() != walk.len() {
        return Err(SpectralError::DimensionMismatch {
            expected: walk.len(),
            got: rep.n_points(),
        });
    }
    walk.check_balance()?;
    let blocks = if rep.is_identity() {
        None
    } else {
        let mut all = Vec::with_capacity(walk.len());
        for x in 0..walk.len() {
            let mut row = Vec::with_capacity(walk.row(x).len());
            for &(y, _) in walk.row(x) {
                match rep.block(x, y) {
                    Some(b) => row.push(b.into_owned()),
                    None => return Err(SpectralError::MissingEdgeBlock { x, y }),
                }
            }
            all.push(row);
        }
        Some(all)
    };
    Ok(DiffusionOperator {
        walk: walk.clone(),
        rep: rep.clone(),
        blocks,
    })
}

impl DiffusionOperator {
    pub fn walk(&self) -> &RandomWalk {
        &self.walk
    }

    pub fn representation(&self) -> &Representation {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn n_points(&self) -> usize {
        self.walk.len()
    }

    /// Total number of coordinates, `N·d`.
    pub fn size(&self) -> usize {
        self.walk.len() * self.rep.dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.walk.base()
    }

    fn check(&self, xi: &Field) -> Result<(), SpectralError> {
        if xi.dim() != self.dim() || xi.n_points() != self.n_points() {
            return Err(SpectralError::DimensionMismatch {
                expected: self.size(),
                got: xi.values().len(),
            });
        }
        Ok(())
    }

    /// `π(x, y)` for the `k`-th entry of row `x`.
    fn block(&self, x: usize, k: usize) -> Option<&CMatrix> {
        self.blocks.as_ref().map(|b| &b[x][k])
    }

    /// `Dξ`.
    pub fn apply(&self, xi: &Field) -> Result<Field, SpectralError> {
        self.check(xi)?;
        Ok(self.apply_unchecked(xi))
    }

    pub(crate) fn apply_unchecked(&self, xi: &Field) -> Field {
        let d = self.dim();
        let mut out = Field::zeros(self.n_points(), d);
        for x in 0..self.n_points() {
            let acc = out.at_mut(x);
            for (k, &(y, p)) in self.walk.row(x).iter().enumerate() {
                let src = xi.at(y);
                match self.block(x, k) {
                    None => {
                        for (a, s) in acc.iter_mut().zip(src) {
                            *a += s * p;
                        }
                    }
                    Some(b) => {
                        for i in 0..d {
                            let mut s = Complex64::new(0.0, 0.0);
                            for j in 0..d {
                                s += b[(i, j)] * src[j];
                            }
                            acc[i] += s * p;
                        }
                    }
                }
            }
        }
        out
    }

    /// `Sv` for `S = W^{1/2} D W^{-1/2}` acting on raw coordinates.
    pub(crate) fn apply_symmetrized(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        let w = self.weights();
        let mut xi = Field::new(d, v.to_vec()).expect("length checked by caller");
        for x in 0..self.n_points() {
            let s = w[x].sqrt().recip();
            xi.at_mut(x).iter_mut().for_each(|z| *z *= s);
        }
        let mut out = self.apply_unchecked(&xi);
        for x in 0..self.n_points() {
            let s = w[x].sqrt();
            out.at_mut(x).iter_mut().for_each(|z| *z *= s);
        }
        out.values().to_vec()
    }

    /// Symmetrized matrix restricted to `points` (in that order), entries
    /// `√(w_x/w_y) ν(x→y) π(x,y)`.
    pub(crate) fn symmetrized_block(&self, points: &[usize]) -> CMatrix {
        let d = self.dim();
        let mut local = vec![usize::MAX; self.n_points()];
        for (i, &x) in points.iter().enumerate() {
            local[x] = i;
        }
        let w = self.weights();
        let mut m = CMatrix::zeros(points.len() * d, points.len() * d);
        for (i, &x) in points.iter().enumerate() {
            for (k, &(y, p)) in self.walk.row(x).iter().enumerate() {
                let j = local[y];
                if j == usize::MAX {
                    continue;
                }
                let c = (w[x] / w[y]).sqrt() * p;
                match self.block(x, k) {
                    None => {
                        for a in 0..d {
                            m[(i * d + a, j * d + a)] += Complex64::new(c, 0.0);
                        }
                    }
                    Some(b) => {
                        for a in 0..d {
                            for bb in 0..d {
                                m[(i * d + a, j * d + bb)] += b[(a, bb)] * c;
                            }
                        }
                    }
                }
            }
        }
        m
    }

    /// Scalar symmetrized kernel on `points`, used for identity blocks.
    pub(crate) fn scalar_symmetrized_block(&self, points: &[usize]) -> DMatrix<f64> {
        let mut local = vec![usize::MAX; self.n_points()];
        for (i, &x) in points.iter().enumerate() {
            local[x] = i;
        }
        let w = self.weights();
        let mut m = DMatrix::zeros(points.len(), points.len());
        for (i, &x) in points.iter().enumerate() {
            for &(y, p) in self.walk.row(x) {
                let j = local[y];
                if j != usize::MAX {
                    m[(i, j)] += (w[x] / w[y]).sqrt() * p;
                }
            }
        }
        m
    }

    /// `max |S_ij − conj(S_ji)|` over the symmetrized matrix.
    pub fn self_adjoint_residual(&self) -> f64 {
        let w = self.weights();
        let d = self.dim();
        let mut worst = 0.0f64;
        for x in 0..self.n_points() {
            for (k, &(y, p)) in self.walk.row(x).iter().enumerate() {
                let back = self.walk.row(y);
                let kb = back.binary_search_by_key(&x, |&(z, _)| z).ok();
                let fwd_c = (w[x] / w[y]).sqrt() * p;
                let bwd_c = kb.map(|kb| (w[y] / w[x]).sqrt() * back[kb].1).unwrap_or(0.0);
                for a in 0..d {
                    for b in 0..d {
                        let f = match self.block(x, k) {
                            None => identity_entry(a, b),
                            Some(m) => m[(a, b)],
                        } * fwd_c;
                        let g = match kb {
                            None => Complex64::new(0.0, 0.0),
                            Some(kb) => match self.block(y, kb) {
                                None => identity_entry(b, a),
                                Some(m) => m[(b, a)],
                            },
                        } * bwd_c;
                        worst = worst.max((f - g.conj()).norm());
                    }
                }
            }
        }
        worst
    }

    /// `⟨(I − D)ξ, ξ⟩` in the weighted inner product.
    pub fn energy(&self, xi: &Field) -> Result<f64, SpectralError> {
        self.check(xi)?;
        let dxi = self.apply_unchecked(xi);
        Ok((xi.norm_sq(self.weights()) - dxi.inner(xi, self.weights()).re).max(0.0))
    }

    /// `⟨(I − D^n)ξ, ξ⟩` in the weighted inner product.
    pub fn energy_n(&self, xi: &Field, n: usize) -> Result<f64, SpectralError> {
        self.check(xi)?;
        let mut cur = xi.clone();
        for _ in 0..n {
            cur = self.apply_unchecked(&cur);
        }
        Ok((xi.norm_sq(self.weights()) - cur.inner(xi, self.weights()).re).max(0.0))
    }
}

fn identity_entry(a: usize, b: usize) -> Complex64 {
    Complex64::new(if a == b { 1.0 } else { 0.0 }, 0.0)
}

/// Free-function form of [`DiffusionOperator::energy`].
pub fn energy(d: &DiffusionOperator, xi: &Field) -> Result<f64, SpectralError> {
    d.energy(xi)
}

/// Free-function form of [`DiffusionOperator::energy_n`].
pub fn energy_n(d: &DiffusionOperator, xi: &Field, n: usize) -> Result<f64, SpectralError> {
    d.energy_n(xi, n)
}

/// `½ Σ_x w(x) Σ_y ν(x→y) ‖π(x,y)ξ_y − ξ_x‖²`, computed edge by edge
/// without forming `D`.
pub fn gradient_energy(walk: &RandomWalk, rep: &Representation, xi: &Field) -> Result<f64, SpectralError> {
    let d = rep.dim();
    if xi.dim() != d || xi.n_points() != walk.len() || rep.n_points() != walk.len() {
        return Err(SpectralError::DimensionMismatch {
            expected: walk.len() * d,
            got: xi.values().len(),
        });
    }
    let w = walk.base();
    let mut total = 0.0;
    for x in 0..walk.len() {
        let mut row_sum = 0.0;
        for &(y, p) in walk.row(x) {
            let b = rep.block(x, y).ok_or(SpectralError::MissingEdgeBlock { x, y })?;
            let (src, dst) = (xi.at(y), xi.at(x));
            let mut sq = 0.0;
            for i in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    s += b[(i, j)] * src[j];
                }
                sq += (s - dst[i]).norm_sqr();
            }
            row_sum += p * sq;
        }
        total += w[x] * row_sum;
    }
    Ok(0.5 * total)
}
