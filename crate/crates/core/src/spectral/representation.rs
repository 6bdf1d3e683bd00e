//! Unitary representations of a finite relation as Hilbert bundles with
//! transport blocks `π(x, y) : H_y → H_x`.

use std::borrow::Cow;
use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::SpectralError;
use crate::relation::{FiniteRelation, Graphing};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance for `‖V*V − I‖`.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Blocks {
    /// `π(x, y) = I_d` for every `x ~ y`.
    Identity,
    /// `π(x, y) = U_x U_y*`.
    Gauge(Vec<CMatrix>),
    /// Blocks on both orientations of each graphing edge; `π(x, x) = I`.
    Raw(BTreeMap<(usize, usize), CMatrix>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    dim: usize,
    n_points: usize,
    blocks: Blocks,
    tolerance: f64,
}

pub(crate) fn unitary_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    if m.ncols() != d {
        return f64::INFINITY;
    }
    (m.adjoint() * m - CMatrix::identity(d, d)).norm()
}

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix the phases of R's diagonal so the distribution is Haar
    let phases = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let rii = r[(i, i)];
            if rii.norm() > 0.0 {
                rii / rii.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

impl Representation {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn blocks(&self) -> &Blocks {
        &self.blocks
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.blocks, Blocks::Identity)
    }

    pub fn mode(&self) -> &'static str {
        match self.blocks {
            Blocks::Raw(_) => "raw",
            _ => "gauge",
        }
    }

    /// `π(x, y)`, or `None` when a raw representation has no block there.
    pub fn block(&self, x: usize, y: usize) -> Option<Cow<'_, CMatrix>> {
        match &self.blocks {
            Blocks::Identity => Some(Cow::Owned(CMatrix::identity(self.dim, self.dim))),
            Blocks::Gauge(u) => Some(Cow::Owned(&u[x] * u[y].adjoint())),
            Blocks::Raw(map) => {
                if x == y {
                    Some(Cow::Owned(CMatrix::identity(self.dim, self.dim)))
                } else {
                    map.get(&(x, y)).map(Cow::Borrowed)
                }
            }
        }
    }

    pub fn has_block(&self, x: usize, y: usize) -> bool {
        match &self.blocks {
            Blocks::Raw(map) => x == y || map.contains_key(&(x, y)),
            _ => true,
        }
    }

    /// True when every block is real.
    pub fn is_real(&self) -> bool {
        let real = |m: &CMatrix| m.iter().all(|z| z.im == 0.0);
        match &self.blocks {
            Blocks::Identity => true,
            // U_x U_y* can be real even for complex U, but checking blocks
            // pairwise is quadratic; only the common all-real case is detected.
            Blocks::Gauge(u) => u.iter().all(real),
            Blocks::Raw(map) => map.values().all(real),
        }
    }

    /// A per-point gauge `U` with `π(x, y) = U_x U_y*` on every block that
    /// exists. Raw representations are integrated along a spanning forest.
    pub fn to_gauge(&self) -> Vec<CMatrix> {
        match &self.blocks {
            Blocks::Identity => vec![CMatrix::identity(self.dim, self.dim); self.n_points],
            Blocks::Gauge(u) => u.clone(),
            Blocks::Raw(map) => spanning_gauge(self.n_points, self.dim, map).0,
        }
    }
}

/// `d = 1`, every block the scalar 1.
pub fn trivial_representation(rel: &FiniteRelation) -> Representation {
    Representation {
        dim: 1,
        n_points: rel.len(),
        blocks: Blocks::Identity,
        tolerance: UNITARY_TOL,
    }
}

/// The regular representation on `ℓ²(class)`, padded to the largest class.
///
/// In the class basis `π(x, y)f(x, ·) = f(y, ·)` relabels the first index
/// only, so every block is the identity of size `max class size`.
pub fn regular_representation(rel: &FiniteRelation) -> Representation {
    Representation {
        dim: rel.max_class_size(),
        n_points: rel.len(),
        blocks: Blocks::Identity,
        tolerance: UNITARY_TOL,
    }
}

pub fn gauge_representation(rel: &FiniteRelation, d: usize, u: Vec<CMatrix>) -> Result<Representation, SpectralError> {
    if u.len() != rel.len() {
        return Err(SpectralError::DimensionMismatch {
            expected: rel.len(),
            got: u.len(),
        });
    }
    for (point, m) in u.iter().enumerate() {
        if m.nrows() != d || m.ncols() != d {
            return Err(SpectralError::DimensionMismatch {
                expected: d,
                got: m.nrows(),
            });
        }
        let residual = unitary_residual(m);
        if residual > UNITARY_TOL {
            return Err(SpectralError::NotUnitary {
                at: format!("point {point}"),
                residual,
            });
        }
    }
    Ok(Representation {
        dim: d,
        n_points: rel.len(),
        blocks: Blocks::Gauge(u),
        tolerance: UNITARY_TOL,
    })
}

/// Random gauge representation with Haar unitaries.
pub fn random_gauge_representation<R: Rng + ?Sized>(rel: &FiniteRelation, d: usize, rng: &mut R) -> Representation {
    let u = (0..rel.len()).map(|_| random_unitary(d, rng)).collect();
    Representation {
        dim: d,
        n_points: rel.len(),
        blocks: Blocks::Gauge(u),
        tolerance: UNITARY_TOL,
    }
}

/// Integrates raw blocks along a BFS spanning forest. Returns the gauge and
/// the worst residual `‖V(x,y) − U_x U_y*‖` over non-tree edges together with
/// that edge.
fn spanning_gauge(
    n: usize,
    d: usize,
    map: &BTreeMap<(usize, usize), CMatrix>,
) -> (Vec<CMatrix>, f64, Option<(usize, usize)>) {
    let mut adj = vec![Vec::new(); n];
    for &(x, y) in map.keys() {
        adj[x].push(y);
    }
    let mut gauge: Vec<Option<CMatrix>> = vec![None; n];
    let mut tree = std::collections::BTreeSet::new();
    for root in 0..n {
        if gauge[root].is_some() {
            continue;
        }
        gauge[root] = Some(CMatrix::identity(d, d));
        let mut queue = VecDeque::from([root]);
        while let Some(p) = queue.pop_front() {
            for &c in &adj[p] {
                if gauge[c].is_none() {
                    // π(p, c) = U_p U_c*  ⇒  U_c = π(c, p) U_p
                    let up = gauge[p].as_ref().unwrap();
                    gauge[c] = Some(&map[&(c, p)] * up);
                    tree.insert((p.min(c), p.max(c)));
                    queue.push_back(c);
                }
            }
        }
    }
    let gauge: Vec<CMatrix> = gauge.into_iter().map(Option::unwrap).collect();
    let mut worst = 0.0;
    let mut worst_edge = None;
    for (&(x, y), v) in map {
        if x > y || tree.contains(&(x, y)) {
            continue;
        }
        let r = (v - &gauge[x] * gauge[y].adjoint()).norm();
        if r > worst {
            worst = r;
            worst_edge = Some((x, y));
        }
    }
    (gauge, worst, worst_edge)
}

/// Raw representation from blocks on oriented edges of `k`.
///
/// Each edge needs a block in at least one orientation; the reverse is the
/// adjoint. Cycle consistency is checked over the fundamental cycles of a
/// spanning forest.
pub fn raw_representation(
    rel: &FiniteRelation,
    k: &Graphing,
    blocks: &BTreeMap<(usize, usize), CMatrix>,
    tol: f64,
) -> Result<Representation, SpectralError> {
    let n = rel.len();
    let d = blocks.values().next().map(|m| m.nrows()).unwrap_or(1);
    let mut map = BTreeMap::new();
    for (x, y) in k.edges() {
        if y >= n || x == y || !rel.same_class(x, y) {
            return Err(SpectralError::InvalidEdge { x, y });
        }
        let fwd = blocks.get(&(x, y));
        let bwd = blocks.get(&(y, x));
        let v = match (fwd, bwd) {
            (Some(v), Some(w)) => {
                let r = (v - w.adjoint()).norm();
                if r > tol {
                    return Err(SpectralError::AdjointMismatch { x, y, residual: r });
                }
                v.clone()
            }
            (Some(v), None) => v.clone(),
            (None, Some(w)) => w.adjoint(),
            (None, None) => return Err(SpectralError::MissingEdgeBlock { x, y }),
        };
        if v.nrows() != d || v.ncols() != d {
            return Err(SpectralError::DimensionMismatch {
                expected: d,
                got: v.nrows(),
            });
        }
        let residual = unitary_residual(&v);
        if residual > UNITARY_TOL {
            return Err(SpectralError::NotUnitary {
                at: format!("edge ({x}, {y})"),
                residual,
            });
        }
        map.insert((y, x), v.adjoint());
        map.insert((x, y), v);
    }
    if let Some(&(x, y)) = blocks.keys().find(|&&(x, y)| !k.contains(x, y)) {
        return Err(SpectralError::InvalidEdge { x, y });
    }
    let (_, residual, edge) = spanning_gauge(n, d, &map);
    if residual > tol {
        let (x, y) = edge.unwrap();
        return Err(SpectralError::CycleInconsistency { residual, x, y });
    }
    Ok(Representation {
        dim: d,
        n_points: n,
        blocks: Blocks::Raw(map),
        tolerance: tol,
    })
}

/// Worst fundamental-cycle residual of a raw block set, without building
/// a representation.
pub fn cycle_residual(n: usize, blocks: &BTreeMap<(usize, usize), CMatrix>) -> f64 {
    let d = blocks.values().next().map(|m| m.nrows()).unwrap_or(1);
    let mut map = blocks.clone();
    for (&(x, y), v) in blocks {
        map.entry((y, x)).or_insert_with(|| v.adjoint());
    }
    spanning_gauge(n, d, &map).1
}
