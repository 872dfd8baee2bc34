//! Finite-dimensional nilpotent quiver representations.
//!
//! One carrier serves four guises. A [`Side::Left`] representation is a left
//! `A`-module, i.e. a right `C`-comodule: arrow `a: s → t` acts by a matrix
//! from the fiber at `s` to the fiber at `t`. A [`Side::Right`] representation
//! is a right `A`-module (a left `C`-comodule): arrow `a` acts from the fiber at
//! `t` to the fiber at `s`. A right representation of `Q` is literally a left
//! representation of the opposite quiver with the same matrices, which is how
//! most right-side computations are carried out.
//!
//! Local nilpotency of the arrow action is the comodule (rationality)
//! condition; it is certified on construction by computing `nil_bound`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Matrix, Scalar};
use crate::pathcoalg::DualElement;
use crate::quiver::{enumerate_paths, Path, Quiver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => write!(f, "left"),
            Side::Right => write!(f, "right"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rep {
    quiver: Quiver,
    side: Side,
    field: FieldSpec,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
    nil_bound: usize,
}

/// `(from, to)` vertices of the action of arrow `a` on a representation of `side`.
pub fn arrow_ends(q: &Quiver, side: Side, a: usize) -> (usize, usize) {
    let ar = q.arrow(a);
    match side {
        Side::Left => (ar.source, ar.target),
        Side::Right => (ar.target, ar.source),
    }
}

/// Validates shapes and nilpotency, computing `nil_bound`.
pub fn rep_from_matrices(
    quiver: &Quiver,
    side: Side,
    field: FieldSpec,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
) -> Result<Rep> {
    if dims.len() != quiver.vertex_count() {
        return Err(Error::Shape(format!(
            "{} fiber dimensions for {} vertices",
            dims.len(),
            quiver.vertex_count()
        )));
    }
    if maps.len() != quiver.arrows().len() {
        return Err(Error::Shape(format!(
            "{} matrices for {} arrows",
            maps.len(),
            quiver.arrows().len()
        )));
    }
    for (a, m) in maps.iter().enumerate() {
        let (from, to) = arrow_ends(quiver, side, a);
        if m.rows() != dims[to] || m.cols() != dims[from] {
            return Err(Error::Shape(format!(
                "arrow {} needs a {}x{} matrix, got {}x{}",
                quiver.arrow(a).label,
                dims[to],
                dims[from],
                m.rows(),
                m.cols()
            )));
        }
        if m.field() != field {
            return Err(Error::Shape(format!(
                "arrow {} matrix is over {}, expected {field}",
                quiver.arrow(a).label,
                m.field()
            )));
        }
    }
    let mut rep = Rep {
        quiver: quiver.clone(),
        side,
        field,
        dims,
        maps,
        nil_bound: 0,
    };
    rep.nil_bound = rep.compute_nil_bound()?;
    Ok(rep)
}

impl Rep {
    pub fn zero(quiver: &Quiver, side: Side, field: FieldSpec) -> Rep {
        let dims = vec![0; quiver.vertex_count()];
        let maps = quiver.arrows().iter().map(|_| Matrix::zeros(field, 0, 0)).collect();
        Rep {
            quiver: quiver.clone(),
            side,
            field,
            dims,
            maps,
            nil_bound: 0,
        }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn map(&self, a: usize) -> &Matrix {
        &self.maps[a]
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    pub fn nil_bound(&self) -> usize {
        self.nil_bound
    }

    pub fn ends(&self, a: usize) -> (usize, usize) {
        arrow_ends(&self.quiver, self.side, a)
    }

    /// Vertices with a nonzero fiber.
    pub fn support(&self) -> Vec<usize> {
        (0..self.dims.len()).filter(|&v| self.dims[v] > 0).collect()
    }

    /// The same data read over the opposite quiver with the opposite side.
    pub fn reinterpret_opposite(&self) -> Rep {
        Rep {
            quiver: self.quiver.opposite(),
            side: self.side.flip(),
            field: self.field,
            dims: self.dims.clone(),
            maps: self.maps.clone(),
            nil_bound: self.nil_bound,
        }
    }

    /// A left representation of either `Q` or `Q^op` carrying the same data.
    pub fn to_left(&self) -> Rep {
        match self.side {
            Side::Left => self.clone(),
            Side::Right => self.reinterpret_opposite(),
        }
    }

    /// Smallest `k` with every length-`k` composite zero, via the radical layers
    /// `M ⊇ JM ⊇ J²M ⊇ ⋯`.
    fn compute_nil_bound(&self) -> Result<usize> {
        let mut layer: Vec<Matrix> = self.dims.iter().map(|&d| Matrix::identity(self.field, d)).collect();
        let total = self.dim();
        let mut k = 0;
        loop {
            let size: usize = layer.iter().map(Matrix::cols).sum();
            if size == 0 {
                return Ok(k);
            }
            if k > total {
                return Err(Error::NotNilpotent(format!(
                    "radical layers stabilize at dimension {size}"
                )));
            }
            let mut next: Vec<Option<Matrix>> = vec![None; self.dims.len()];
            for a in 0..self.maps.len() {
                let (from, to) = self.ends(a);
                let img = self.maps[a].mul(&layer[from]);
                next[to] = Some(match next[to].take() {
                    Some(m) => m.hstack(&img),
                    None => img,
                });
            }
            layer = next
                .into_iter()
                .enumerate()
                .map(|(v, m)| match m {
                    Some(m) => m.column_basis(),
                    None => Matrix::zeros(self.field, self.dims[v], 0),
                })
                .collect();
            k += 1;
        }
    }

    pub fn direct_sum(&self, other: &Rep) -> Result<Rep> {
        check_compatible(self, other)?;
        let dims: Vec<usize> = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let maps = (0..self.maps.len())
            .map(|a| {
                let (x, y) = (&self.maps[a], &other.maps[a]);
                let mut m = Matrix::zeros(self.field, x.rows() + y.rows(), x.cols() + y.cols());
                m.set_block(0, 0, x);
                m.set_block(x.rows(), x.cols(), y);
                m
            })
            .collect();
        Ok(Rep {
            quiver: self.quiver.clone(),
            side: self.side,
            field: self.field,
            dims,
            maps,
            nil_bound: self.nil_bound.max(other.nil_bound),
        })
    }

    /// Applies a change of basis `g_v` at every vertex: `M_a ↦ g_to M_a g_from⁻¹`.
    pub fn change_basis(&self, g: &[Matrix]) -> Result<Rep> {
        let inv: Vec<Matrix> = g
            .iter()
            .map(|m| m.inverse().ok_or_else(|| Error::Shape("singular basis change".into())))
            .collect::<Result<_>>()?;
        let maps = (0..self.maps.len())
            .map(|a| {
                let (from, to) = self.ends(a);
                g[to].mul(&self.maps[a]).mul(&inv[from])
            })
            .collect();
        Ok(Rep { maps, ..self.clone() })
    }

    /// Composite action of a path (left side: a path `p: s → t` maps fiber `s` to `t`).
    pub fn path_action(&self, p: &Path) -> Matrix {
        let start = match self.side {
            Side::Left => p.source(),
            Side::Right => p.target(),
        };
        let mut m = Matrix::identity(self.field, self.dims[start]);
        let order: Vec<usize> = match self.side {
            Side::Left => p.arrows().to_vec(),
            Side::Right => p.arrows().iter().rev().copied().collect(),
        };
        for a in order {
            m = self.maps[a].mul(&m);
        }
        m
    }
}

fn check_compatible(m: &Rep, n: &Rep) -> Result<()> {
    if m.quiver != n.quiver {
        return Err(Error::SideMismatch("representations of different quivers".into()));
    }
    if m.side != n.side {
        return Err(Error::SideMismatch(format!("{} vs {} modules", m.side, n.side)));
    }
    if m.field != n.field {
        return Err(Error::SideMismatch(format!("fields {} vs {}", m.field, n.field)));
    }
    Ok(())
}

/// The one-dimensional simple at `v`.
pub fn simple(q: &Quiver, v: usize, side: Side, field: FieldSpec) -> Rep {
    let mut dims = vec![0; q.vertex_count()];
    dims[v] = 1;
    let maps = (0..q.arrows().len())
        .map(|a| {
            let (from, to) = arrow_ends(q, side, a);
            Matrix::zeros(field, dims[to], dims[from])
        })
        .collect();
    Rep {
        quiver: q.clone(),
        side,
        field,
        dims,
        maps,
        nil_bound: 1,
    }
}

/// Builds a representation with one basis vector per path in `paths`, fibered
/// at `vertex(p)`, where arrow `a` sends `p` to `step(a, p)` when defined.
fn path_rep(
    q: &Quiver,
    side: Side,
    field: FieldSpec,
    paths: Vec<Path>,
    vertex: impl Fn(&Path) -> usize,
    step: impl Fn(usize, &Path) -> Option<Path>,
) -> Rep {
    let n = q.vertex_count();
    let mut fibers: Vec<Vec<Path>> = vec![Vec::new(); n];
    for p in paths {
        fibers[vertex(&p)].push(p);
    }
    let dims: Vec<usize> = fibers.iter().map(Vec::len).collect();
    let maps = (0..q.arrows().len())
        .map(|a| {
            let (from, to) = arrow_ends(q, side, a);
            let mut m = Matrix::zeros(field, dims[to], dims[from]);
            for (j, p) in fibers[from].iter().enumerate() {
                if let Some(img) = step(a, p) {
                    if let Some(i) = fibers[to].iter().position(|x| *x == img) {
                        m.set(i, j, field.one());
                    }
                }
            }
            m
        })
        .collect();
    rep_from_matrices(q, side, field, dims, maps).expect("path representations are nilpotent")
}

/// Degree `≤ n` piece of the injective envelope of the simple at `v`.
///
/// Left side: basis `p*` for paths `p` ending at `v`, fibered at `source(p)`;
/// arrow `a` removes a leading `a` from `p`. Right side: basis `p*` for paths
/// starting at `v`, fibered at `target(p)`; arrow `b` removes a trailing `b`.
pub fn truncated_injective(q: &Quiver, v: usize, n: usize, side: Side, field: FieldSpec) -> Rep {
    let t = enumerate_paths(q, n);
    match side {
        Side::Left => path_rep(
            q,
            side,
            field,
            t.all().iter().filter(|p| p.target() == v).cloned().collect(),
            Path::source,
            |a, p| (p.len() > 0 && p.arrows()[0] == a).then(|| p.terminal(q, 1)),
        ),
        Side::Right => path_rep(
            q,
            side,
            field,
            t.all().iter().filter(|p| p.source() == v).cloned().collect(),
            Path::target,
            |b, p| (p.len() > 0 && *p.arrows().last().unwrap() == b).then(|| p.initial(q, p.len() - 1)),
        ),
    }
}

/// `A e_v / J^{n+1} e_v` (left) or `e_v A / e_v J^{n+1}` (right).
pub fn truncated_projective(q: &Quiver, v: usize, n: usize, side: Side, field: FieldSpec) -> Rep {
    let t = enumerate_paths(q, n);
    match side {
        Side::Left => path_rep(
            q,
            side,
            field,
            t.all().iter().filter(|p| p.source() == v).cloned().collect(),
            Path::target,
            |a, p| Path::arrow(q, a).compose(p).filter(|r| r.len() <= n),
        ),
        Side::Right => path_rep(
            q,
            side,
            field,
            t.all().iter().filter(|p| p.target() == v).cloned().collect(),
            Path::source,
            |b, p| p.compose(&Path::arrow(q, b)).filter(|r| r.len() <= n),
        ),
    }
}

/// A basis of `Hom(M, N)`: each element is one matrix per vertex.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<Vec<Matrix>>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// The commutation map `φ ↦ (N_a φ_from − φ_to M_a)_a` and the offsets of each
/// vertex block `φ_v` (stored row-major) in its domain.
pub fn commutation_matrix(m: &Rep, n: &Rep) -> Result<(Matrix, Vec<usize>)> {
    check_compatible(m, n)?;
    let field = m.field;
    let q = &m.quiver;
    let mut offsets = Vec::with_capacity(q.vertex_count() + 1);
    let mut acc = 0;
    for v in 0..q.vertex_count() {
        offsets.push(acc);
        acc += n.dims[v] * m.dims[v];
    }
    offsets.push(acc);
    let mut row_offsets = Vec::new();
    let mut rows = 0;
    for a in 0..q.arrows().len() {
        let (from, to) = m.ends(a);
        row_offsets.push(rows);
        rows += n.dims[to] * m.dims[from];
    }
    let mut mat = Matrix::zeros(field, rows, acc);
    for a in 0..q.arrows().len() {
        let (from, to) = m.ends(a);
        let (ma, na) = (&m.maps[a], &n.maps[a]);
        let base = row_offsets[a];
        let cols_here = m.dims[from];
        for r in 0..n.dims[to] {
            for c in 0..cols_here {
                let row = base + r * cols_here + c;
                // (N_a φ_from)[r][c] = Σ_k N_a[r][k] φ_from[k][c]
                for k in 0..n.dims[from] {
                    let coef = na.get(r, k);
                    if !coef.is_zero() {
                        let col = offsets[from] + k * m.dims[from] + c;
                        mat.add_at(row, col, coef);
                    }
                }
                // −(φ_to M_a)[r][c] = −Σ_k φ_to[r][k] M_a[k][c]
                for k in 0..m.dims[to] {
                    let coef = ma.get(k, c);
                    if !coef.is_zero() {
                        let col = offsets[to] + r * m.dims[to] + k;
                        mat.add_at(row, col, &-coef);
                    }
                }
            }
        }
    }
    Ok((mat, offsets))
}

pub fn hom_space(m: &Rep, n: &Rep) -> Result<HomSpace> {
    let (mat, offsets) = commutation_matrix(m, n)?;
    let k = mat.kernel_basis();
    let basis = (0..k.cols())
        .map(|j| {
            (0..m.quiver.vertex_count())
                .map(|v| {
                    let mut b = Matrix::zeros(m.field, n.dims[v], m.dims[v]);
                    for r in 0..n.dims[v] {
                        for c in 0..m.dims[v] {
                            b.set(r, c, k.get(offsets[v] + r * m.dims[v] + c, j).clone());
                        }
                    }
                    b
                })
                .collect()
        })
        .collect();
    Ok(HomSpace { basis })
}

/// Linear dual: side flipped, matrices transposed.
pub fn linear_dual(m: &Rep) -> Rep {
    Rep {
        quiver: m.quiver.clone(),
        side: m.side.flip(),
        field: m.field,
        dims: m.dims.clone(),
        maps: m.maps.iter().map(Matrix::transpose).collect(),
        nil_bound: m.nil_bound,
    }
}

/// A quiver automorphism with arrow scalars: the data of a twisting automorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexTwist {
    pub vertex_perm: Vec<usize>,
    pub arrow_perm: Vec<usize>,
    pub scalars: Vec<Scalar>,
}

impl VertexTwist {
    pub fn identity(q: &Quiver, field: FieldSpec) -> Self {
        VertexTwist {
            vertex_perm: (0..q.vertex_count()).collect(),
            arrow_perm: (0..q.arrows().len()).collect(),
            scalars: vec![field.one(); q.arrows().len()],
        }
    }

    /// The twist determined by a vertex permutation when every arrow image is
    /// forced; scalars are 1.
    pub fn from_vertex_perm(q: &Quiver, perm: &[usize], field: FieldSpec) -> Result<Self> {
        let mut used = vec![false; q.arrows().len()];
        let mut arrow_perm = Vec::with_capacity(q.arrows().len());
        for a in q.arrows() {
            let (s, t) = (perm[a.source], perm[a.target]);
            let img = (0..q.arrows().len())
                .find(|&b| !used[b] && q.arrow(b).source == s && q.arrow(b).target == t)
                .ok_or_else(|| Error::InvalidTwist(format!("no arrow {} → {} to match {}", s + 1, t + 1, a.label)))?;
            used[img] = true;
            arrow_perm.push(img);
        }
        let t = VertexTwist {
            vertex_perm: perm.to_vec(),
            arrow_perm,
            scalars: vec![field.one(); q.arrows().len()],
        };
        t.validate(q)?;
        Ok(t)
    }

    pub fn validate(&self, q: &Quiver) -> Result<()> {
        let n = q.vertex_count();
        if self.vertex_perm.len() != n || !is_permutation(&self.vertex_perm) {
            return Err(Error::InvalidTwist("vertex map is not a permutation".into()));
        }
        if self.arrow_perm.len() != q.arrows().len() || !is_permutation(&self.arrow_perm) {
            return Err(Error::InvalidTwist("arrow map is not a permutation".into()));
        }
        if self.scalars.len() != q.arrows().len() || self.scalars.iter().any(Scalar::is_zero) {
            return Err(Error::InvalidTwist("arrow scalars must be nonzero".into()));
        }
        for (a, ar) in q.arrows().iter().enumerate() {
            let img = q.arrow(self.arrow_perm[a]);
            if img.source != self.vertex_perm[ar.source] || img.target != self.vertex_perm[ar.target] {
                return Err(Error::InvalidTwist(format!(
                    "image of {} does not run between the permuted endpoints",
                    ar.label
                )));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> VertexTwist {
        let mut vp = vec![0; self.vertex_perm.len()];
        for (i, &j) in self.vertex_perm.iter().enumerate() {
            vp[j] = i;
        }
        let mut ap = vec![0; self.arrow_perm.len()];
        for (i, &j) in self.arrow_perm.iter().enumerate() {
            ap[j] = i;
        }
        let scalars = (0..ap.len())
            .map(|a| self.scalars[ap[a]].inv().expect("nonzero scalar"))
            .collect();
        VertexTwist {
            vertex_perm: vp,
            arrow_perm: ap,
            scalars,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_perm.iter().enumerate().all(|(i, &j)| i == j)
            && self.arrow_perm.iter().enumerate().all(|(i, &j)| i == j)
            && self.scalars.iter().all(Scalar::is_one)
    }

    /// Order of the vertex permutation.
    pub fn vertex_order(&self) -> usize {
        let n = self.vertex_perm.len();
        let mut cur: Vec<usize> = (0..n).collect();
        for k in 1..=n.max(1) * n.max(1) + 1 {
            cur = cur.iter().map(|&i| self.vertex_perm[i]).collect();
            if cur.iter().enumerate().all(|(i, &j)| i == j) {
                return k;
            }
        }
        unreachable!("permutation order is finite")
    }
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&i| i < p.len() && !std::mem::replace(&mut seen[i], true))
}

/// `M'_v = M_{σ(v)}`, `M'_a = λ_a · M_{σ(a)}`.
pub fn twist(m: &Rep, t: &VertexTwist) -> Result<Rep> {
    t.validate(&m.quiver)?;
    let dims = t.vertex_perm.iter().map(|&v| m.dims[v]).collect();
    let maps = (0..m.maps.len())
        .map(|a| m.maps[t.arrow_perm[a]].scale(&t.scalars[a]))
        .collect();
    rep_from_matrices(&m.quiver, m.side, m.field, dims, maps)
}

/// Isomorphism test: equal dimension vectors and an invertible element of the
/// hom space. Random combinations are tried first; the seeded search is
/// followed by a deterministic sweep over small integer combinations.
pub fn isomorphic(m: &Rep, n: &Rep, seed: u64) -> Result<bool> {
    check_compatible(m, n)?;
    if m.dims != n.dims {
        return Ok(false);
    }
    let hom = hom_space(m, n)?;
    if hom.dim() == 0 {
        return Ok(m.dim() == 0);
    }
    let invertible = |coefs: &[Scalar]| -> bool {
        (0..m.dims.len()).all(|v| {
            let mut acc = Matrix::zeros(m.field, n.dims[v], m.dims[v]);
            for (b, c) in hom.basis.iter().zip(coefs) {
                acc = acc.add(&b[v].scale(c));
            }
            acc.is_invertible()
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..16 {
        let coefs: Vec<Scalar> = (0..hom.dim())
            .map(|_| m.field.from_i64(rng.random_range(-1000..=1000)))
            .collect();
        if invertible(&coefs) {
            return Ok(true);
        }
    }
    // exact fallback: an invertible morphism exists iff the generic element is
    // invertible; sweep coefficient vectors in {0..k}^d for small k.
    let d = hom.dim();
    if d <= 4 {
        let k = 2 * m.dim() as i64 + 2;
        let mut idx = vec![0i64; d];
        loop {
            let coefs: Vec<Scalar> = idx.iter().map(|&c| m.field.from_i64(c)).collect();
            if invertible(&coefs) {
                return Ok(true);
            }
            let mut i = 0;
            while i < d {
                idx[i] += 1;
                if idx[i] <= k {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }
    Ok(false)
}

/// A random nilpotent representation: maps strictly increase a random total
/// order on the basis, then each fiber is scrambled by a random basis change.
pub fn random_rep(q: &Quiver, side: Side, field: FieldSpec, dims: &[usize], density: f64, rng: &mut impl Rng) -> Rep {
    let total: usize = dims.iter().sum();
    let mut order: Vec<usize> = (0..total).collect();
    for i in (1..total).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut rank_of = vec![vec![0; 0]; dims.len()];
    let mut k = 0;
    for (v, &d) in dims.iter().enumerate() {
        rank_of[v] = order[k..k + d].to_vec();
        k += d;
    }
    let maps = (0..q.arrows().len())
        .map(|a| {
            let (from, to) = arrow_ends(q, side, a);
            let mut m = Matrix::zeros(field, dims[to], dims[from]);
            for i in 0..dims[to] {
                for j in 0..dims[from] {
                    if rank_of[to][i] > rank_of[from][j] && rng.random_bool(density) {
                        m.set(i, j, field.from_i64(rng.random_range(-3..=3)));
                    }
                }
            }
            m
        })
        .collect();
    let rep = rep_from_matrices(q, side, field, dims.to_vec(), maps).expect("strictly ordered maps are nilpotent");
    let g: Vec<Matrix> = dims
        .iter()
        .map(|&d| loop {
            let mut m = Matrix::identity(field, d);
            for i in 0..d {
                for j in 0..d {
                    if i != j && rng.random_bool(0.3) {
                        m.set(i, j, field.from_i64(rng.random_range(-2..=2)));
                    }
                }
            }
            if m.is_invertible() {
                break m;
            }
        })
        .collect();
    rep.change_basis(&g).expect("invertible basis change")
}

/// Parses the representation text format:
///
/// ```text
/// side: left
/// dims: 2 1
/// arrow x
/// 0 1
/// 0 0
/// ```
///
/// Each `arrow` block lists the rows of its matrix (target fiber × source
/// fiber of the action); arrows without a block act by zero.
pub fn parse_rep(q: &Quiver, field: FieldSpec, text: &str) -> Result<Rep> {
    let mut side = Side::Left;
    let mut dims: Option<Vec<usize>> = None;
    let mut blocks: Vec<Option<Vec<Vec<Scalar>>>> = vec![None; q.arrows().len()];
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("side:") {
            side = match rest.trim() {
                "left" => Side::Left,
                "right" => Side::Right,
                s => return Err(err(format!("unknown side `{s}`"))),
            };
        } else if let Some(rest) = line.strip_prefix("dims:") {
            let d: Vec<usize> = rest
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| err(format!("bad dimension `{s}`"))))
                .collect::<Result<_>>()?;
            if d.len() != q.vertex_count() {
                return Err(err(format!("{} dimensions for {} vertices", d.len(), q.vertex_count())));
            }
            dims = Some(d);
        } else if let Some(rest) = line.strip_prefix("arrow ") {
            let label = rest.trim();
            let a = q
                .arrow_index(label)
                .ok_or_else(|| err(format!("unknown arrow `{label}`")))?;
            if blocks[a].is_some() {
                return Err(err(format!("arrow `{label}` given twice")));
            }
            blocks[a] = Some(Vec::new());
            current = Some(a);
        } else {
            let a = current.ok_or_else(|| err("matrix row outside an arrow block".into()))?;
            let row: Vec<Scalar> = line
                .split_whitespace()
                .map(|s| field.parse_scalar(s).map_err(|e| err(e.to_string())))
                .collect::<Result<_>>()?;
            blocks[a].as_mut().unwrap().push(row);
        }
    }
    let dims = dims.ok_or(Error::Parse {
        line: 1,
        message: "missing `dims:` line".into(),
    })?;
    let maps = blocks
        .into_iter()
        .enumerate()
        .map(|(a, b)| {
            let (from, to) = arrow_ends(q, side, a);
            match b {
                None => Ok(Matrix::zeros(field, dims[to], dims[from])),
                Some(rows) => {
                    if rows.len() != dims[to] || rows.iter().any(|r| r.len() != dims[from]) {
                        return Err(Error::Shape(format!(
                            "arrow {} needs a {}x{} matrix",
                            q.arrow(a).label,
                            dims[to],
                            dims[from]
                        )));
                    }
                    Ok(Matrix::from_rows(field, rows, dims[from]))
                }
            }
        })
        .collect::<Result<_>>()?;
    rep_from_matrices(q, side, field, dims, maps)
}

pub fn render_rep(m: &Rep) -> String {
    let mut s = format!("side: {}\ndims:", m.side);
    for d in &m.dims {
        s.push_str(&format!(" {d}"));
    }
    s.push('\n');
    for (a, mat) in m.maps.iter().enumerate() {
        if mat.is_zero() {
            continue;
        }
        s.push_str(&format!("arrow {}\n", m.quiver.arrow(a).label));
        for r in 0..mat.rows() {
            let row: Vec<String> = mat.row(r).iter().map(ToString::to_string).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
    }
    s
}

/// A morphism of representations: one matrix per vertex.
pub type RepMorphism = Vec<Matrix>;

/// Checks that `f: m → n` commutes with every arrow.
pub fn is_morphism(m: &Rep, n: &Rep, f: &[Matrix]) -> bool {
    f.len() == m.dims.len()
        && (0..m.maps.len()).all(|a| {
            let (from, to) = m.ends(a);
            n.maps[a].mul(&f[from]) == f[to].mul(&m.maps[a])
        })
}

/// The subrepresentation spanned, at each vertex, by the columns of `basis[v]`
/// (assumed independent and arrow-stable), with the inclusion.
pub fn subrep(m: &Rep, basis: &[Matrix]) -> Result<(Rep, RepMorphism)> {
    let dims = basis.iter().map(Matrix::cols).collect();
    let maps = (0..m.maps.len())
        .map(|a| {
            let (from, to) = m.ends(a);
            let img = m.maps[a].mul(&basis[from]);
            basis[to]
                .solve(&img)
                .ok_or_else(|| Error::Shape("subspace is not stable under the arrow action".into()))
        })
        .collect::<Result<_>>()?;
    let sub = rep_from_matrices(&m.quiver, m.side, m.field, dims, maps)?;
    Ok((sub, basis.to_vec()))
}

/// `m / span(basis)` with the projection.
pub fn quotient_rep(m: &Rep, basis: &[Matrix]) -> Result<(Rep, RepMorphism)> {
    let sections: Vec<(Matrix, Matrix)> = basis.iter().map(Matrix::cokernel_section).collect();
    let dims = sections.iter().map(|(p, _)| p.rows()).collect();
    let maps = (0..m.maps.len())
        .map(|a| {
            let (from, to) = m.ends(a);
            sections[to].0.mul(&m.maps[a]).mul(&sections[from].1)
        })
        .collect();
    let q = rep_from_matrices(&m.quiver, m.side, m.field, dims, maps)?;
    Ok((q, sections.into_iter().map(|(p, _)| p).collect()))
}

pub fn kernel_rep(m: &Rep, f: &[Matrix]) -> Result<Rep> {
    let basis: Vec<Matrix> = f.iter().map(Matrix::kernel_basis).collect();
    Ok(subrep(m, &basis)?.0)
}

pub fn cokernel_rep(n: &Rep, f: &[Matrix]) -> Result<Rep> {
    Ok(quotient_rep(n, f)?.0)
}

/// One relation of a graded presentation: `Σ_g coeffs[g] · gen_g`, an element
/// at `vertex` in internal degree `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub vertex: usize,
    pub degree: usize,
    pub coeffs: Vec<DualElement>,
}

/// A finitely presented graded module over the completed path algebra.
///
/// For a left presentation generator `g` sits at vertex `i_g` in degree `d_g`
/// (a copy of `A e_{i_g}` shifted by `d_g`), and every coefficient of relation
/// `k` is a combination of paths `i_g → v_k` of length `deg_k − d_g`. Right
/// presentations are stored over the opposite quiver.
#[derive(Clone, Debug)]
pub struct GradedPresentation {
    quiver: Quiver,
    side: Side,
    field: FieldSpec,
    generators: Vec<(usize, usize)>,
    relations: Vec<Relation>,
}

impl GradedPresentation {
    pub fn new(
        quiver: &Quiver,
        side: Side,
        field: FieldSpec,
        generators: Vec<(usize, usize)>,
        relations: Vec<Relation>,
    ) -> Result<Self> {
        let n = quiver.vertex_count();
        if generators.iter().any(|&(v, _)| v >= n) {
            return Err(Error::Shape("generator at unknown vertex".into()));
        }
        let work = match side {
            Side::Left => quiver.clone(),
            Side::Right => quiver.opposite(),
        };
        let mut rels = Vec::with_capacity(relations.len());
        for (k, r) in relations.into_iter().enumerate() {
            if r.coeffs.len() != generators.len() || r.vertex >= n {
                return Err(Error::Shape(format!("relation {k} has the wrong shape")));
            }
            let mut coeffs = Vec::with_capacity(r.coeffs.len());
            for (g, c) in r.coeffs.iter().enumerate() {
                let (iv, d) = generators[g];
                let mut fixed = DualElement::zero();
                for (p, s) in c.terms() {
                    let p = match side {
                        Side::Left => p.clone(),
                        Side::Right => p.opposite(),
                    };
                    if p.source() != iv || p.target() != r.vertex || p.len() + d != r.degree {
                        return Err(Error::Shape(format!(
                            "relation {k}: coefficient of generator {g} is not homogeneous of the declared degree"
                        )));
                    }
                    fixed.add_term(p, s.clone());
                }
                coeffs.push(fixed);
            }
            rels.push(Relation {
                vertex: r.vertex,
                degree: r.degree,
                coeffs,
            });
        }
        Ok(GradedPresentation {
            quiver: work,
            side,
            field,
            generators,
            relations: rels,
        })
    }

    /// Quiver the presentation is stored over (the opposite one for right modules).
    pub fn working_quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn generators(&self) -> &[(usize, usize)] {
        &self.generators
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// The presentation of `self ⊕ other`.
    pub fn direct_sum(&self, other: &GradedPresentation) -> Result<Self> {
        if self.quiver != other.quiver || self.side != other.side || self.field != other.field {
            return Err(Error::SideMismatch("presentations over different data".into()));
        }
        let mut generators = self.generators.clone();
        generators.extend_from_slice(&other.generators);
        let pad = |r: &Relation, before: usize, after: usize| Relation {
            vertex: r.vertex,
            degree: r.degree,
            coeffs: std::iter::repeat_n(DualElement::zero(), before)
                .chain(r.coeffs.iter().cloned())
                .chain(std::iter::repeat_n(DualElement::zero(), after))
                .collect(),
        };
        let (a, b) = (self.generators.len(), other.generators.len());
        let relations = self
            .relations
            .iter()
            .map(|r| pad(r, 0, b))
            .chain(other.relations.iter().map(|r| pad(r, a, 0)))
            .collect();
        Ok(GradedPresentation {
            quiver: self.quiver.clone(),
            side: self.side,
            field: self.field,
            generators,
            relations,
        })
    }

    /// Degreewise materialization through degree `n`.
    pub fn materialize(&self, n: usize) -> GradedModule {
        let q = &self.quiver;
        let field = self.field;
        let nv = q.vertex_count();
        let table = enumerate_paths(q, n);
        let mut free_basis: Vec<Vec<Vec<(usize, Path)>>> = vec![vec![Vec::new(); nv]; n + 1];
        for (g, &(iv, d)) in self.generators.iter().enumerate() {
            for l in d..=n {
                for p in table.from_source(iv, l - d) {
                    free_basis[l][p.target()].push((g, p.clone()));
                }
            }
        }
        let index = |l: usize, v: usize, g: usize, p: &Path| -> usize {
            free_basis[l][v]
                .iter()
                .position(|(h, r)| *h == g && r == p)
                .expect("path in the free basis")
        };
        let mut rel_basis: Vec<Vec<Vec<(usize, Path)>>> = vec![vec![Vec::new(); nv]; n + 1];
        let mut rel_matrix: Vec<Vec<Matrix>> = Vec::with_capacity(n + 1);
        for l in 0..=n {
            let mut per_v = Vec::with_capacity(nv);
            for (k, r) in self.relations.iter().enumerate() {
                if r.degree <= l {
                    for qp in table.from_source(r.vertex, l - r.degree) {
                        rel_basis[l][qp.target()].push((k, qp.clone()));
                    }
                }
            }
            for v in 0..nv {
                let mut m = Matrix::zeros(field, free_basis[l][v].len(), rel_basis[l][v].len());
                for (c, (k, qp)) in rel_basis[l][v].iter().enumerate() {
                    for (g, coeff) in self.relations[*k].coeffs.iter().enumerate() {
                        for (y, s) in coeff.terms() {
                            let path = qp.compose(y).expect("relation paths compose");
                            m.add_at(index(l, v, g, &path), c, s);
                        }
                    }
                }
                per_v.push(m);
            }
            rel_matrix.push(per_v);
        }
        let sections: Vec<Vec<(Matrix, Matrix)>> = rel_matrix
            .iter()
            .map(|per| per.iter().map(Matrix::cokernel_section).collect())
            .collect();
        let dims = sections
            .iter()
            .map(|per| per.iter().map(|(p, _)| p.rows()).collect())
            .collect();
        let mut maps = Vec::with_capacity(n);
        for l in 0..n {
            let per_a = (0..q.arrows().len())
                .map(|a| {
                    let (s, t) = (q.arrow(a).source, q.arrow(a).target);
                    let mut act = Matrix::zeros(field, free_basis[l + 1][t].len(), free_basis[l][s].len());
                    for (j, (g, p)) in free_basis[l][s].iter().enumerate() {
                        let ap = Path::arrow(q, a).compose(p).expect("arrow extends path");
                        act.set(index(l + 1, t, *g, &ap), j, field.one());
                    }
                    sections[l + 1][t].0.mul(&act).mul(&sections[l][s].1)
                })
                .collect();
            maps.push(per_a);
        }
        GradedModule {
            quiver: q.clone(),
            side: self.side,
            field,
            truncation: n,
            dims,
            maps,
            free_basis,
            rel_basis,
            rel_matrix,
            projection: sections
                .into_iter()
                .map(|per| per.into_iter().map(|(p, _)| p).collect())
                .collect(),
        }
    }
}

/// `A e_v` as a presentation: one generator in degree 0, no relations.
pub fn truncated_free(q: &Quiver, v: usize, side: Side, field: FieldSpec) -> GradedPresentation {
    GradedPresentation::new(q, side, field, vec![(v, 0)], Vec::new()).expect("valid generator")
}

/// A presented module materialized in degrees `0..=truncation`.
///
/// `dims[l][v]` is the dimension of the degree-`l` piece at vertex `v`;
/// `maps[l][a]` is the action of arrow `a` from degree `l` to `l + 1`.
/// The free cover, relation images and quotient projections are kept for
/// the duality checks.
#[derive(Clone, Debug)]
pub struct GradedModule {
    pub quiver: Quiver,
    pub side: Side,
    pub field: FieldSpec,
    pub truncation: usize,
    pub dims: Vec<Vec<usize>>,
    pub maps: Vec<Vec<Matrix>>,
    pub free_basis: Vec<Vec<Vec<(usize, Path)>>>,
    pub rel_basis: Vec<Vec<Vec<(usize, Path)>>>,
    pub rel_matrix: Vec<Vec<Matrix>>,
    pub projection: Vec<Vec<Matrix>>,
}

impl GradedModule {
    pub fn degree_dim(&self, l: usize) -> usize {
        self.dims[l].iter().sum()
    }
}

/// Random homogeneous presentation: 1–3 generators in degrees 0–2 and up to
/// three relations with random path coefficients.
pub fn random_presentation(q: &Quiver, field: FieldSpec, rng: &mut impl Rng) -> GradedPresentation {
    let nv = q.vertex_count();
    let table = enumerate_paths(q, 4);
    let gens: Vec<(usize, usize)> = (0..rng.random_range(1..=3))
        .map(|_| (rng.random_range(0..nv), rng.random_range(0..=2)))
        .collect();
    let mut relations = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let vertex = rng.random_range(0..nv);
        let degree = rng.random_range(1..=4);
        let coeffs = gens
            .iter()
            .map(|&(iv, d)| {
                let mut c = DualElement::zero();
                if d <= degree {
                    for p in table.between(iv, vertex, degree - d) {
                        if rng.random_bool(0.6) {
                            c.add_term(p.clone(), field.from_i64(rng.random_range(-2..=2)));
                        }
                    }
                }
                c
            })
            .collect();
        relations.push(Relation { vertex, degree, coeffs });
    }
    GradedPresentation::new(q, Side::Left, field, gens, relations).expect("homogeneous by construction")
}
