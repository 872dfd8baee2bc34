//! Resolutions, Ext groups, the rational functor, `Hom(-, C)`, local
//! cohomology of `A`, and the dualities on finite-dimensional complexes.
//!
//! Everything is hereditary: a nilpotent representation `M` has the two-term
//! standard resolution
//!
//! ```text
//! 0 → ⊕_a A e_{t(a)} ⊗ M_{s(a)} → ⊕_v A e_v ⊗ M_v → M → 0,
//! e_{t(a)} ⊗ m ↦ a ⊗ m − e_{t(a)} ⊗ M_a m,
//! ```
//!
//! so only `Ext⁰` and `Ext¹` can be nonzero. Computations against `A` are
//! carried out on path-length truncations and certified by a zero window of
//! two growth periods.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Matrix, Scalar};
use crate::pathcoalg::{act_on_coalgebra, convolve, DualElement};
use crate::quiver::{enumerate_paths, growth_gate, Path, PathTable, Quiver};
use crate::repmod::{
    commutation_matrix, hom_space, isomorphic, kernel_rep, linear_dual, quotient_rep, rep_from_matrices,
    truncated_injective, GradedModule, GradedPresentation, Rep, Side,
};

/// A two-term complex of free left modules `P₁ → P₀`.
///
/// `gens1[i]` and `gens0[j]` are the vertices of the generators (a generator
/// at `v` spans a copy of `A e_v`); `diff[j][i]` is the coefficient of
/// generator `j` of `P₀` in the image of generator `i` of `P₁`, an element of
/// `e_{gens1[i]} A e_{gens0[j]}`. Products are exact up to path length
/// `truncation`.
#[derive(Clone, Debug)]
pub struct FreeComplex {
    pub quiver: Quiver,
    pub field: FieldSpec,
    pub truncation: usize,
    pub gens1: Vec<usize>,
    pub gens0: Vec<usize>,
    pub diff: Vec<Vec<DualElement>>,
}

impl FreeComplex {
    pub fn ranks(&self) -> (usize, usize) {
        (self.gens1.len(), self.gens0.len())
    }

    /// Generator counts per vertex: `(P₁, P₀)`.
    pub fn betti(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.quiver.vertex_count();
        let count = |g: &[usize]| {
            let mut out = vec![0; n];
            for &v in g {
                out[v] += 1;
            }
            out
        };
        (count(&self.gens1), count(&self.gens0))
    }

    /// Every coefficient lies in the radical (no trivial-path terms).
    pub fn is_minimal(&self) -> bool {
        self.diff
            .iter()
            .flatten()
            .all(|c| c.terms().all(|(p, _)| !p.is_trivial()))
    }

    /// The differential on the path bases, from `P₁` in lengths `≤ src_max`
    /// to `P₀` in lengths `≤ tgt_max` (longer image terms are dropped).
    pub fn truncated_matrix(&self, src_max: Option<usize>, tgt_max: usize) -> Matrix {
        let table = enumerate_paths(&self.quiver, tgt_max);
        let basis = |gens: &[usize], max: usize| -> Vec<(usize, Path)> {
            let mut out = Vec::new();
            for (g, &v) in gens.iter().enumerate() {
                for l in 0..=max {
                    for p in table.from_source(v, l) {
                        out.push((g, p.clone()));
                    }
                }
            }
            out
        };
        let src = src_max.map_or_else(Vec::new, |m| basis(&self.gens1, m));
        let tgt = basis(&self.gens0, tgt_max);
        let index: BTreeMap<(usize, Path), usize> = tgt.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let mut m = Matrix::zeros(self.field, tgt.len(), src.len());
        for (c, (i, y)) in src.iter().enumerate() {
            for (j, coef) in self.diff.iter().enumerate() {
                for (p, s) in coef[*i].terms() {
                    if let Some(z) = y.compose(p) {
                        if z.len() <= tgt_max {
                            m.add_at(index[&(j, z)], c, s);
                        }
                    }
                }
            }
        }
        m
    }

    /// Shortest and longest path in any coefficient.
    fn coefficient_orders(&self) -> (usize, usize) {
        let lens: Vec<usize> = self
            .diff
            .iter()
            .flatten()
            .flat_map(|c| c.terms().map(|(p, _)| p.len()))
            .collect();
        (
            lens.iter().copied().min().unwrap_or(0),
            lens.iter().copied().max().unwrap_or(0),
        )
    }

    /// Checks on the truncation that the complex resolves a module of
    /// dimension `dim`: the differential is injective wherever its images are
    /// complete, and `P₀` modulo the image has dimension `dim`.
    pub fn resolves_dimension(&self, dim: usize) -> bool {
        let n = self.truncation;
        let (lo, hi) = self.coefficient_orders();
        let injective = match n.checked_sub(hi) {
            Some(m) => {
                let d = self.truncated_matrix(Some(m), n);
                d.rank() == d.cols()
            }
            None => true,
        };
        let d = self.truncated_matrix(n.checked_sub(lo), n);
        injective && d.rows() - d.rank() == dim
    }
}

/// The standard resolution of a left representation.
pub fn standard_resolution(m: &Rep, truncation: usize) -> Result<FreeComplex> {
    if m.side() != Side::Left {
        return Err(Error::SideMismatch(
            "resolve right modules as left modules of the opposite quiver".into(),
        ));
    }
    let q = m.quiver();
    let field = m.field();
    let mut offset0 = vec![0; q.vertex_count()];
    let mut gens0 = Vec::new();
    for v in 0..q.vertex_count() {
        offset0[v] = gens0.len();
        gens0.extend(std::iter::repeat_n(v, m.dims()[v]));
    }
    let mut gens1 = Vec::new();
    let mut origin = Vec::new();
    for (a, ar) in q.arrows().iter().enumerate() {
        for k in 0..m.dims()[ar.source] {
            gens1.push(ar.target);
            origin.push((a, k));
        }
    }
    let mut diff = vec![vec![DualElement::zero(); gens1.len()]; gens0.len()];
    for (i, &(a, k)) in origin.iter().enumerate() {
        let ar = q.arrow(a);
        diff[offset0[ar.source] + k][i].add_term(Path::arrow(q, a), field.one());
        for r in 0..m.dims()[ar.target] {
            let c = m.map(a).get(r, k);
            diff[offset0[ar.target] + r][i].add_term(Path::trivial(ar.target), -c);
        }
    }
    Ok(FreeComplex {
        quiver: q.clone(),
        field,
        truncation,
        gens1,
        gens0,
        diff,
    })
}

/// Inverse of `λ e_v + r` with `r` in the radical, as a power series truncated at `n`.
fn unit_inverse(u: &DualElement, v: usize, field: FieldSpec, n: usize) -> DualElement {
    let lambda = u.value(&Path::trivial(v)).expect("unit has a constant term").clone();
    let li = lambda.inv().expect("nonzero constant term");
    let mut r = u.clone();
    r.add_term(Path::trivial(v), -&lambda);
    // x = λ⁻¹ e − λ⁻¹ r λ⁻¹ + …  =  λ⁻¹ Σ_k (−λ⁻¹ r)^k
    let step = r.scale(&-&li);
    let mut term = DualElement::idempotent(v, field);
    let mut sum = term.clone();
    for _ in 0..n {
        term = convolve(&step, &term, n);
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    sum.scale(&li)
}

/// Cancels every unit coefficient by Gaussian elimination over the completed
/// algebra; the result has the same homology and radical coefficients.
pub fn minimalize(c: &FreeComplex) -> FreeComplex {
    let mut c = c.clone();
    let n = c.truncation;
    loop {
        let pivot = c.diff.iter().enumerate().find_map(|(j, row)| {
            row.iter().enumerate().find_map(|(i, e)| {
                (c.gens1[i] == c.gens0[j] && e.value(&Path::trivial(c.gens0[j])).is_some()).then_some((j, i))
            })
        });
        let Some((j0, i0)) = pivot else { break };
        let v = c.gens0[j0];
        let uinv = unit_inverse(&c.diff[j0][i0], v, c.field, n);
        let mut diff = Vec::with_capacity(c.gens0.len() - 1);
        for j in 0..c.gens0.len() {
            if j == j0 {
                continue;
            }
            let mut row = Vec::with_capacity(c.gens1.len() - 1);
            for i in 0..c.gens1.len() {
                if i == i0 {
                    continue;
                }
                // c_ji − c_{j0 i} u⁻¹ c_{j i0}
                let corr = convolve(&convolve(&c.diff[j0][i], &uinv, n), &c.diff[j][i0], n);
                row.push(c.diff[j][i].add(&corr.scale(&c.field.from_i64(-1))).truncate(n));
            }
            diff.push(row);
        }
        c.gens0.remove(j0);
        c.gens1.remove(i0);
        c.diff = diff;
    }
    c
}

/// Dimension of `Ext^i(M, N)` between finite-dimensional representations.
#[derive(Clone, Debug, Serialize)]
pub struct ExtReport {
    pub label: String,
    pub degree: usize,
    pub dim: usize,
    /// Dimension per vertex of the result, when it carries a module structure.
    pub support: Option<Vec<usize>>,
    /// Side of the resulting module structure.
    pub side: Option<Side>,
    /// Increments of the truncated dimension, one per truncation level.
    pub graded: Vec<usize>,
    pub certificate: Option<Certificate>,
    #[serde(skip)]
    pub rep: Option<Rep>,
}

/// Evidence that a truncated dimension family has stopped growing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// First truncation level from which every increment vanishes.
    pub first_stable: usize,
    /// Required zero-window length.
    pub window: usize,
    /// Last truncation level inspected.
    pub verified_through: usize,
}

pub fn ext_fd(m: &Rep, n: &Rep, i: usize) -> Result<ExtReport> {
    let (mat, _) = commutation_matrix(m, n)?;
    let dim = match i {
        0 => mat.cols() - mat.rank(),
        1 => mat.rows() - mat.rank(),
        _ => 0,
    };
    Ok(ExtReport {
        label: format!("Ext^{i}(M, N)"),
        degree: i,
        dim,
        support: None,
        side: None,
        graded: Vec::new(),
        certificate: None,
        rep: None,
    })
}

/// `Σ_v d^M_v d^N_v − Σ_a d^M_{from(a)} d^N_{to(a)}`.
pub fn euler_form(m: &Rep, n: &Rep) -> i64 {
    let q = m.quiver();
    let mut s: i64 = (0..q.vertex_count()).map(|v| (m.dims()[v] * n.dims()[v]) as i64).sum();
    for a in 0..q.arrows().len() {
        let (from, to) = m.ends(a);
        s -= (m.dims()[from] * n.dims()[to]) as i64;
    }
    s
}

/// Finds the first level of `increments` after which a zero window of length
/// `window` holds through the end.
fn certify(increments: &[usize], window: usize) -> Option<Certificate> {
    let last = increments.len().checked_sub(1)?;
    let mut first = increments.len();
    while first > 0 && increments[first - 1] == 0 {
        first -= 1;
    }
    (increments.len() - first >= window).then_some(Certificate {
        first_stable: first,
        window,
        verified_through: last,
    })
}

fn stabilization_error(n: usize, window: usize, what: &str) -> Error {
    Error::Stabilization {
        truncation: n,
        suggested: n + 2 * window,
        detail: format!("{what} still growing inside the last {window} levels"),
    }
}

fn window_for(q: &Quiver) -> Result<usize> {
    let g = growth_gate(q);
    if !g.bounded {
        let w = g.witness.as_ref().map(|w| w.paths.join(" ≠ ")).unwrap_or_default();
        return Err(Error::Unbounded(format!("path counts grow without bound ({w})")));
    }
    Ok(g.window())
}

/// `Hom(P_•, A)` of the standard resolution of a left `M`, split by the right
/// idempotent `e_w`: columns are `(v, m, y)` with `y: w → v`, `|y| ≤ n`; rows
/// are `(a, m, z)` with `z: w → t(a)`, `|z| ≤ n + 1`. Both bases are sorted by
/// path length.
struct DualResolutionBlock {
    src: Vec<(usize, usize, Path)>,
    tgt: Vec<(usize, usize, Path)>,
    matrix: Matrix,
}

fn dual_resolution_blocks(m: &Rep, table: &PathTable, n: usize) -> Vec<DualResolutionBlock> {
    let q = m.quiver();
    let field = m.field();
    (0..q.vertex_count())
        .map(|w| {
            let mut src = Vec::new();
            let mut tgt = Vec::new();
            for l in 0..=n + 1 {
                for y in table.from_source(w, l) {
                    if l <= n {
                        for k in 0..m.dims()[y.target()] {
                            src.push((y.target(), k, y.clone()));
                        }
                    }
                    for a in q.arrows_into(y.target()) {
                        for k in 0..m.dims()[q.arrow(a).source] {
                            tgt.push((a, k, y.clone()));
                        }
                    }
                }
            }
            let index: BTreeMap<(usize, usize, Path), usize> =
                tgt.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
            let mut matrix = Matrix::zeros(field, tgt.len(), src.len());
            for (c, (v, k, y)) in src.iter().enumerate() {
                for a in q.arrows_from(*v) {
                    let ay = Path::arrow(q, a).compose(y).expect("arrow extends path");
                    matrix.add_at(index[&(a, *k, ay)], c, &field.one());
                }
                for a in q.arrows_into(*v) {
                    let s = q.arrow(a).source;
                    for k2 in 0..m.dims()[s] {
                        let e = m.map(a).get(*k, k2);
                        if !e.is_zero() {
                            matrix.add_at(index[&(a, k2, y.clone())], c, &-e);
                        }
                    }
                }
            }
            DualResolutionBlock { src, tgt, matrix }
        })
        .collect()
}

fn prefix_len(basis: &[(usize, usize, Path)], max: usize) -> usize {
    basis.iter().take_while(|(_, _, p)| p.len() <= max).count()
}

fn leading(m: &Matrix, rows: usize, cols: usize) -> Matrix {
    let r: Vec<usize> = (0..rows).collect();
    let c: Vec<usize> = (0..cols).collect();
    m.submatrix(&r, &c)
}

/// `Ext^i(M, A)` for a finite-dimensional `M`, computed through truncation
/// `n` with a zero-window certificate. The result carries the structure of a
/// module on the side opposite to `M`.
pub fn ext_vs_algebra(m: &Rep, i: usize, n: usize) -> Result<ExtReport> {
    if m.side() == Side::Right {
        let mut r = ext_vs_algebra(&m.to_left(), i, n)?;
        r.rep = r.rep.map(|x| x.reinterpret_opposite());
        r.side = r.side.map(Side::flip);
        return Ok(r);
    }
    let q = m.quiver();
    let field = m.field();
    let window = window_for(q)?;
    if i > 1 {
        return Ok(ExtReport {
            label: format!("Ext^{i}(M, A)"),
            degree: i,
            dim: 0,
            support: Some(vec![0; q.vertex_count()]),
            side: Some(Side::Right),
            graded: vec![0; n + 1],
            certificate: Some(Certificate {
                first_stable: 0,
                window,
                verified_through: n,
            }),
            rep: Some(Rep::zero(q, Side::Right, field)),
        });
    }
    let table = enumerate_paths(q, n + 2);
    let blocks = dual_resolution_blocks(m, &table, n);
    let mut totals = vec![0usize; n + 1];
    for b in &blocks {
        for (level, total) in totals.iter_mut().enumerate() {
            let cols = prefix_len(&b.src, level);
            *total += if i == 0 {
                let rows = prefix_len(&b.tgt, level + 1);
                cols - leading(&b.matrix, rows, cols).rank()
            } else {
                let rows = prefix_len(&b.tgt, level);
                rows - leading(&b.matrix, rows, cols).rank()
            };
        }
    }
    let graded: Vec<usize> = (0..=n)
        .map(|l| totals[l] - if l == 0 { 0 } else { totals[l - 1] })
        .collect();
    let certificate =
        certify(&graded, window).ok_or_else(|| stabilization_error(n, window, &format!("Ext^{i}(M, A)")))?;

    // module structure at full truncation: right multiplication y ↦ y·b
    let nv = q.vertex_count();
    let mut basis: Vec<Matrix> = Vec::with_capacity(nv);
    let mut lifts: Vec<Matrix> = Vec::with_capacity(nv);
    let mut spaces: Vec<Vec<(usize, usize, Path)>> = Vec::with_capacity(nv);
    for b in &blocks {
        let cols = prefix_len(&b.src, n);
        if i == 0 {
            let rows = prefix_len(&b.tgt, n + 1);
            basis.push(leading(&b.matrix, rows, cols).kernel_basis());
            lifts.push(Matrix::zeros(field, 0, 0));
            spaces.push(b.src[..cols].to_vec());
        } else {
            let rows = prefix_len(&b.tgt, n);
            let (p, l) = leading(&b.matrix, rows, cols).cokernel_section();
            basis.push(p);
            lifts.push(l);
            spaces.push(b.tgt[..rows].to_vec());
        }
    }
    let dims: Vec<usize> = (0..nv)
        .map(|w| if i == 0 { basis[w].cols() } else { basis[w].rows() })
        .collect();
    let maps = (0..q.arrows().len())
        .map(|bi| {
            let (s, t) = (q.arrow(bi).source, q.arrow(bi).target);
            let idx: BTreeMap<&(usize, usize, Path), usize> =
                spaces[s].iter().enumerate().map(|(k, e)| (e, k)).collect();
            let mut act = Matrix::zeros(field, spaces[s].len(), spaces[t].len());
            for (c, (x, k, y)) in spaces[t].iter().enumerate() {
                let yb = y.compose(&Path::arrow(q, bi)).expect("right multiplication");
                if let Some(&r) = idx.get(&(*x, *k, yb)) {
                    act.set(r, c, field.one());
                }
            }
            if i == 0 {
                basis[s]
                    .solve(&act.mul(&basis[t]))
                    .ok_or_else(|| stabilization_error(n, window, "Ext^0(M, A) right action"))
            } else {
                Ok(basis[s].mul(&act).mul(&lifts[t]))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = rep_from_matrices(q, Side::Right, field, dims.clone(), maps)?;
    Ok(ExtReport {
        label: format!("Ext^{i}(M, A)"),
        degree: i,
        dim: dims.iter().sum(),
        support: Some(dims),
        side: Some(Side::Right),
        graded,
        certificate: Some(certificate),
        rep: Some(rep),
    })
}

/// Left truncated injective bases: `out[u]` lists the paths `u → v` of length `≤ n`
/// in the order used by [`truncated_injective`].
fn injective_basis(q: &Quiver, v: usize, n: usize) -> Vec<Vec<Path>> {
    let mut out = vec![Vec::new(); q.vertex_count()];
    for p in enumerate_paths(q, n).all() {
        if p.target() == v {
            out[p.source()].push(p.clone());
        }
    }
    out
}

/// The complex `⊕_{a: s(a)=j} I_{t(a)} → I_j` (left truncated injectives,
/// `p = a·p' ↦ p'`) whose kernel and cokernel dualize to `Ext¹` and `Ext⁰`
/// of `C` against the simple at `j`.
fn comodule_complex(q: &Quiver, field: FieldSpec, j: usize, n: usize) -> Result<(Rep, Rep, Vec<Matrix>)> {
    let outs: Vec<usize> = q.arrows_from(j).collect();
    let target = truncated_injective(q, j, n, Side::Left, field);
    let tb = injective_basis(q, j, n);
    let mut source = Rep::zero(q, Side::Left, field);
    let mut comps: Vec<Vec<Vec<Path>>> = Vec::new();
    for &a in &outs {
        let t = q.arrow(a).target;
        source = source.direct_sum(&truncated_injective(q, t, n + 1, Side::Left, field))?;
        comps.push(injective_basis(q, t, n + 1));
    }
    let f = (0..q.vertex_count())
        .map(|u| {
            let mut m = Matrix::zeros(field, target.dims()[u], source.dims()[u]);
            let mut col = 0;
            for (ci, &a) in outs.iter().enumerate() {
                for p in &comps[ci][u] {
                    if p.len() > 0 && *p.arrows().last().unwrap() == a {
                        let pp = p.initial(q, p.len() - 1);
                        let r = tb[u].iter().position(|x| *x == pp).expect("shorter path in target");
                        m.set(r, col, field.one());
                    }
                    col += 1;
                }
            }
            m
        })
        .collect();
    Ok((source, target, f))
}

/// `Ext^i_C(C, S_j)` as a right module, via the injective resolution of the
/// simple comodule and the linear dual of the resulting two-term complex.
pub fn ext_comodule_c(q: &Quiver, field: FieldSpec, j: usize, i: usize, n: usize) -> Result<ExtReport> {
    let window = window_for(q)?;
    let compute = |level: usize| -> Result<Rep> {
        let (source, target, f) = comodule_complex(q, field, j, level)?;
        Ok(match i {
            0 => linear_dual(&quotient_rep(&target, &f.iter().map(Matrix::column_basis).collect::<Vec<_>>())?.0),
            1 => linear_dual(&kernel_rep(&source, &f)?),
            _ => Rep::zero(q, Side::Right, field),
        })
    };
    let mut totals = Vec::with_capacity(n + 1);
    let mut last = None;
    for level in 0..=n {
        let r = compute(level)?;
        totals.push(r.dim());
        last = Some(r);
    }
    let graded: Vec<usize> = (0..=n)
        .map(|l| totals[l].abs_diff(if l == 0 { 0 } else { totals[l - 1] }))
        .collect();
    let certificate =
        certify(&graded, window).ok_or_else(|| stabilization_error(n, window, &format!("Ext^{i}(C, S)")))?;
    let rep = last.expect("at least one level");
    Ok(ExtReport {
        label: format!("Ext^{i}_C(C, S_{})", j + 1),
        degree: i,
        dim: rep.dim(),
        support: Some(rep.dims().to_vec()),
        side: Some(Side::Right),
        graded,
        certificate: Some(certificate),
        rep: Some(rep),
    })
}

/// Torsion (rational) part of a presented graded module.
#[derive(Clone, Debug, Serialize)]
pub struct RationalReport {
    /// `dims[l][v]` of the torsion part in degree `l`, for certified degrees.
    pub dims: Vec<Vec<usize>>,
    /// Highest degree whose torsion subspace is certified stable.
    pub certified_through: Option<usize>,
    /// Whether the torsion part is certified finite-dimensional.
    pub finite: bool,
    pub total: usize,
    #[serde(skip)]
    pub rep: Option<Rep>,
}

/// Stacked actions of all paths of length `k` out of `(l, v)` in a graded module.
fn path_action_stack(m: &GradedModule, l: usize, v: usize, k: usize) -> Matrix {
    let q = &m.quiver;
    let mut layer: Vec<(usize, Matrix)> = vec![(v, Matrix::identity(m.field, m.dims[l][v]))];
    for step in 0..k {
        let mut next = Vec::new();
        for (u, x) in &layer {
            for a in q.arrows_from(*u) {
                next.push((q.arrow(a).target, m.maps[l + step][a].mul(x)));
            }
        }
        layer = next;
    }
    let mut out = Matrix::zeros(m.field, 0, m.dims[l][v]);
    for (_, x) in layer {
        out = out.vstack(&x);
    }
    out
}

/// Elements of each degree killed by a power of the radical, computed on a
/// truncation of `P` at `n`. A degree `l` is certified when the kernel of
/// `J^k` is constant for `k` over a window of two growth periods ending at
/// `n − l`; the torsion part is finite when it vanishes on a further window.
pub fn rational_part(p: &GradedPresentation, n: usize) -> Result<RationalReport> {
    let q = p.working_quiver();
    let window = window_for(q)?;
    let m = p.materialize(n);
    let nv = q.vertex_count();
    let mut dims = Vec::new();
    let mut bases: Vec<Vec<Matrix>> = Vec::new();
    let mut certified_through = None;
    'degrees: for l in 0..=n {
        if n - l < window {
            break;
        }
        let mut row = Vec::with_capacity(nv);
        let mut bl = Vec::with_capacity(nv);
        for v in 0..nv {
            let kernels: Vec<Matrix> = ((n - l - window)..=(n - l))
                .map(|k| path_action_stack(&m, l, v, k).kernel_basis())
                .collect();
            let d = kernels[0].cols();
            if kernels.iter().any(|k| k.cols() != d) {
                break 'degrees;
            }
            row.push(d);
            bl.push(kernels.into_iter().last().unwrap());
        }
        dims.push(row);
        bases.push(bl);
        certified_through = Some(l);
    }
    if certified_through.is_none() {
        return Err(stabilization_error(n, window, "torsion in degree 0"));
    }
    let totals: Vec<usize> = dims.iter().map(|r| r.iter().sum()).collect();
    let top = totals.iter().rposition(|&t| t > 0);
    let finite = match top {
        None => !totals.is_empty(),
        Some(t) => totals.len() - 1 - t >= window,
    };
    let rep = if finite {
        let last = top.map_or(0, |t| t + 1);
        let mut fdims = vec![0; nv];
        let mut offsets = vec![vec![0; nv]; last];
        for (l, row) in dims.iter().take(last).enumerate() {
            offsets[l].copy_from_slice(&fdims);
            for (f, d) in fdims.iter_mut().zip(row) {
                *f += d;
            }
        }
        let maps = (0..q.arrows().len())
            .map(|a| {
                let (s, t) = (q.arrow(a).source, q.arrow(a).target);
                let mut mat = Matrix::zeros(p.field(), fdims[t], fdims[s]);
                for l in 0..last.saturating_sub(1) {
                    let img = m.maps[l][a].mul(&bases[l][s]);
                    let coords = bases[l + 1][t].solve(&img).expect("torsion is a submodule");
                    mat.set_block(offsets[l + 1][t], offsets[l][s], &coords);
                }
                mat
            })
            .collect();
        let r = rep_from_matrices(q, Side::Left, p.field(), fdims, maps)?;
        Some(match p.side() {
            Side::Left => r,
            Side::Right => r.reinterpret_opposite(),
        })
    } else {
        None
    };
    Ok(RationalReport {
        total: totals.iter().sum(),
        dims,
        certified_through,
        finite,
        rep,
    })
}

/// Torsion part of a finite-dimensional representation: the union of the
/// kernels of `J^k`, grown until it stops changing.
pub fn rational_part_fd(m: &Rep) -> Rep {
    let left = m.to_left();
    let q = left.quiver();
    let nv = q.vertex_count();
    let mut prev: Option<Vec<usize>> = None;
    let mut k = 0;
    loop {
        let paths = enumerate_paths(q, k);
        let kernels: Vec<Matrix> = (0..nv)
            .map(|v| {
                let mut stack = Matrix::zeros(left.field(), 0, left.dims()[v]);
                for p in paths.from_source(v, k) {
                    stack = stack.vstack(&left.path_action(p));
                }
                stack.kernel_basis()
            })
            .collect();
        let d: Vec<usize> = kernels.iter().map(Matrix::cols).collect();
        if prev.as_ref() == Some(&d) && k > left.nil_bound() {
            let sub = crate::repmod::subrep(&left, &kernels)
                .expect("kernels of J^k are submodules")
                .0;
            return match m.side() {
                Side::Left => sub,
                Side::Right => sub.reinterpret_opposite(),
            };
        }
        prev = Some(d);
        k += 1;
    }
}

/// Degreewise `Hom(P, C)` and the comparison with the graded dual of `P`.
#[derive(Clone, Debug, Serialize)]
pub struct PhiCheck {
    /// `hom_dims[l][v]`: dimension of the degree-`l` part of `Hom(P, C)` at `v`.
    pub hom_dims: Vec<Vec<usize>>,
    /// Dimensions of the degree-`l` pieces of `P` (hence of its dual).
    pub module_dims: Vec<Vec<usize>>,
    /// Every homomorphism, read as a functional on the free cover, kills the relations.
    pub annihilates_relations: bool,
    pub isomorphic: bool,
}

/// `Hom(P, C)` degree by degree through `n`, computed from the action of `A` on
/// `C`: a homomorphism sends generator `g` to an element of `e_{i_g} C` and
/// must kill every relation.
pub fn hom_into_c(p: &GradedPresentation, n: usize) -> Result<PhiCheck> {
    if p.side() != Side::Left {
        return Err(Error::SideMismatch("hom_into_c expects a left presentation".into()));
    }
    let q = p.working_quiver();
    let field = p.field();
    window_for(q)?;
    let table = enumerate_paths(q, n);
    let nv = q.vertex_count();
    let m = p.materialize(n);
    let mut hom_dims = Vec::new();
    let mut annihilates = true;
    for l in 0..=n {
        let mut row = Vec::with_capacity(nv);
        for w in 0..nv {
            // unknowns: coefficient of p* in φ(g), s(p) = i_g, |p| = l − d_g, t(p) = w
            let mut unknowns: Vec<(usize, Path)> = Vec::new();
            for (g, &(iv, d)) in p.generators().iter().enumerate() {
                if d <= l {
                    for path in table.between(iv, w, l - d) {
                        unknowns.push((g, path.clone()));
                    }
                }
            }
            let mut eq_rows: Vec<Vec<Scalar>> = Vec::new();
            for r in p.relations() {
                if r.degree > l {
                    continue;
                }
                // Σ_g c_g · φ(g) evaluated on each z with s(z) = v_k, |z| = l − deg_k
                for z in table.between(r.vertex, w, l - r.degree) {
                    let mut row_eq = vec![field.zero(); unknowns.len()];
                    for (u, (g, path)) in unknowns.iter().enumerate() {
                        let image = act_on_coalgebra(q, &r.coeffs[*g], &DualElement::basis(path.clone(), field));
                        if let Some(c) = image.value(z) {
                            row_eq[u] = &row_eq[u] + c;
                        }
                    }
                    eq_rows.push(row_eq);
                }
            }
            let eqs = Matrix::from_rows(field, eq_rows, unknowns.len());
            let kernel = eqs.kernel_basis();
            row.push(kernel.cols());
            // φ: coordinates of each homomorphism on the free cover F_l at w
            let fb = &m.free_basis[l][w];
            let mut phi = Matrix::zeros(field, fb.len(), kernel.cols());
            for (u, key) in unknowns.iter().enumerate() {
                let pos = fb.iter().position(|e| e == key).expect("same free basis");
                for c in 0..kernel.cols() {
                    phi.set(pos, c, kernel.get(u, c).clone());
                }
            }
            if !phi.transpose().mul(&m.rel_matrix[l][w]).is_zero() {
                annihilates = false;
            }
        }
        hom_dims.push(row);
    }
    let module_dims = m.dims.clone();
    Ok(PhiCheck {
        isomorphic: annihilates && hom_dims == module_dims,
        hom_dims,
        module_dims,
        annihilates_relations: annihilates,
    })
}

/// Exactness of the dualized resolution `0 → N* → F* → R* → K* → 0`, degree by degree.
#[derive(Clone, Debug, Serialize)]
pub struct DualResolutionCheck {
    pub degrees: usize,
    /// Per degree: `(dim N, dim F, dim R, dim K)` summed over vertices.
    pub dims: Vec<[usize; 4]>,
    pub exact: bool,
}

/// Builds `0 → K → R → F → N → 0` from the presentation (free cover `F`,
/// free module `R` on the relations, `K` the kernel of `R → F`), takes the
/// degreewise linear dual, and checks exactness by ranks through `through`.
pub fn dual_resolution_check(p: &GradedPresentation, through: usize) -> DualResolutionCheck {
    let m = p.materialize(through);
    let nv = p.working_quiver().vertex_count();
    let mut exact = true;
    let mut dims = Vec::new();
    for l in 0..=through {
        let mut acc = [0usize; 4];
        for v in 0..nv {
            let d = &m.rel_matrix[l][v];
            let kb = d.kernel_basis();
            let pr = &m.projection[l][v];
            let (pt, dt, kt) = (pr.transpose(), d.transpose(), kb.transpose());
            let (nd, fd, rd, kd) = (pr.rows(), d.rows(), d.cols(), kb.cols());
            let ok = pt.rank() == nd
                && pt.rank() + dt.rank() == fd
                && dt.rank() + kt.rank() == rd
                && kt.rank() == kd
                && dt.mul(&pt).is_zero()
                && kt.mul(&dt).is_zero();
            exact &= ok;
            acc[0] += nd;
            acc[1] += fd;
            acc[2] += rd;
            acc[3] += kd;
        }
        dims.push(acc);
    }
    DualResolutionCheck {
        degrees: through,
        dims,
        exact,
    }
}

/// One internal degree of `H^iΓ(A)`: `dims[u][w]` is the dimension of
/// `e_u H e_w` at `m = m_max`, and `stable_from` the first `m` from which
/// every colimit map was verified to be an isomorphism.
#[derive(Clone, Debug, Serialize)]
pub struct LocalPiece {
    pub degree: i64,
    pub dims: Vec<Vec<usize>>,
    pub stable_from: Option<usize>,
}

/// Bigraded local cohomology of `A` together with the matched twist.
#[derive(Clone, Debug, Serialize)]
pub struct LocalCohReport {
    pub index: usize,
    pub m_max: usize,
    pub truncation: usize,
    pub pieces: Vec<LocalPiece>,
    /// Degree offset `s`: the piece in degree `−l − s` matches paths of length `l`.
    pub shift: Option<usize>,
    /// Vertex permutation `π` with `H_{−l−s}[u][w] = #(paths π(u) → w of length l)`.
    pub permutation: Option<Vec<usize>>,
    /// Largest path length covered by the match on certified pieces.
    pub matched_through: Option<usize>,
    /// Every piece in the requested range is certified.
    pub all_stable: bool,
}

impl LocalCohReport {
    pub fn piece(&self, degree: i64) -> Option<&LocalPiece> {
        self.pieces.iter().find(|p| p.degree == degree)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.dims.iter().flatten().all(|&d| d == 0))
    }
}

/// Bases and maps of `Hom(J^m, A) ← Hom(A, A)` in one bigraded block.
struct LcBlock {
    tgt: Vec<(Path, Path)>,
    matrix: Matrix,
}

fn lc_block(table: &PathTable, field: FieldSpec, u: usize, w: usize, m: usize, d: i64) -> LcBlock {
    let src: Vec<Path> = if d >= 0 {
        table.between(w, u, d as usize).into_iter().cloned().collect()
    } else {
        Vec::new()
    };
    let mut tgt = Vec::new();
    if m as i64 + d >= 0 {
        for p in table.from_source(u, m) {
            for y in table.between(w, p.target(), (m as i64 + d) as usize) {
                tgt.push((p.clone(), y.clone()));
            }
        }
    }
    let index: BTreeMap<(Path, Path), usize> = tgt.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let mut matrix = Matrix::zeros(field, tgt.len(), src.len());
    for (c, y) in src.iter().enumerate() {
        for p in table.from_source(u, m) {
            let py = p.compose(y).expect("paths meet at u");
            matrix.set(index[&(p.clone(), py)], c, field.one());
        }
    }
    LcBlock { tgt, matrix }
}

/// Colimit map `(p, y) ↦ Σ_a (a·p, a·y)` from level `m` to `m + 1`.
fn lc_colimit(q: &Quiver, field: FieldSpec, from: &LcBlock, to: &LcBlock) -> Matrix {
    let index: BTreeMap<&(Path, Path), usize> = to.tgt.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut t = Matrix::zeros(field, to.tgt.len(), from.tgt.len());
    for (c, (p, y)) in from.tgt.iter().enumerate() {
        for a in q.arrows_from(p.target()) {
            let ar = Path::arrow(q, a);
            let key = (ar.compose(p).unwrap(), ar.compose(y).unwrap());
            t.set(index[&key], c, field.one());
        }
    }
    t
}

/// `H^iΓ(A) = lim_m Ext^i(A/J^m, A)` for the left regular module, using
/// `0 → J^m → A → A/J^m → 0` with `J^m` free on the paths of length `m`.
/// Internal degrees run over `−m_max..=n`; each piece is tracked along the
/// colimit maps for `m = 1..=m_max`.
pub fn local_cohomology(q: &Quiver, field: FieldSpec, i: usize, m_max: usize, n: usize) -> Result<LocalCohReport> {
    window_for(q)?;
    if m_max == 0 {
        return Err(Error::Invalid("m_max must be at least 1".into()));
    }
    let nv = q.vertex_count();
    let table = enumerate_paths(q, 2 * m_max + n + 1);
    let mut pieces = Vec::new();
    for d in -(m_max as i64)..=(n as i64) {
        let mut dims = vec![vec![0; nv]; nv];
        let mut stable_from = Some(1usize);
        for u in 0..nv {
            for w in 0..nv {
                let blocks: Vec<LcBlock> = (1..=m_max).map(|m| lc_block(&table, field, u, w, m, d)).collect();
                // iso[k]: the colimit map from level k + 1 to k + 2
                let mut iso = Vec::with_capacity(m_max);
                for m in 1..m_max {
                    let (b, next) = (&blocks[m - 1], &blocks[m]);
                    iso.push(match i {
                        0 => b.matrix.kernel_basis().cols() == next.matrix.kernel_basis().cols(),
                        1 => {
                            let (_, l0) = b.matrix.cokernel_section();
                            let (p1, _) = next.matrix.cokernel_section();
                            p1.mul(&lc_colimit(q, field, b, next)).mul(&l0).is_invertible()
                        }
                        _ => true,
                    });
                }
                let top = &blocks[m_max - 1].matrix;
                dims[u][w] = match i {
                    0 => top.cols() - top.rank(),
                    1 => top.rows() - top.rank(),
                    _ => 0,
                };
                let from = iso.iter().rposition(|&ok| !ok).map_or(1, |k| k + 2);
                stable_from = match stable_from {
                    Some(s) if from < m_max => Some(s.max(from)),
                    _ => None,
                };
            }
        }
        pieces.push(LocalPiece {
            degree: d,
            dims,
            stable_from,
        });
    }
    let all_stable = pieces.iter().all(|p| p.stable_from.is_some());
    Ok(LocalCohReport {
        index: i,
        m_max,
        truncation: n,
        pieces,
        shift: None,
        permutation: None,
        matched_through: None,
        all_stable,
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut x = p.clone();
            x.insert(k, n - 1);
            out.push(x);
        }
    }
    out
}

/// Matches the certified pieces against the bigraded path counts of `C`:
/// tries the candidates first, then every permutation for at most 8 vertices.
pub fn match_twist(q: &Quiver, report: &mut LocalCohReport, candidates: &[Vec<usize>]) {
    let nv = q.vertex_count();
    let certified: Vec<&LocalPiece> = report.pieces.iter().filter(|p| p.stable_from.is_some()).collect();
    let max_l = certified.iter().map(|p| (-p.degree).max(0) as usize).max().unwrap_or(0);
    let counts = crate::pathcoalg::bigraded_dims(q, max_l + 1);
    let fits = |s: usize, pi: &[usize]| -> Option<usize> {
        let mut through = None;
        for p in &certified {
            let l = -p.degree - s as i64;
            if l < 0 {
                if p.dims.iter().flatten().any(|&d| d != 0) {
                    return None;
                }
                continue;
            }
            let l = l as usize;
            for u in 0..nv {
                for w in 0..nv {
                    if p.dims[u][w] != counts.at(l)[w][pi[u]] {
                        return None;
                    }
                }
            }
            through = Some(through.map_or(l, |t: usize| t.max(l)));
        }
        through
    };
    let brute = if nv <= 8 { permutations(nv) } else { Vec::new() };
    for s in 0..=2 {
        for pi in candidates.iter().chain(brute.iter()) {
            if let Some(t) = fits(s, pi) {
                report.shift = Some(s);
                report.permutation = Some(pi.clone());
                report.matched_through = Some(t);
                return;
            }
        }
    }
}

/// Ratio `R/L` of the right and left actions of a loop `x` on the stable
/// part of `H¹Γ(A)` from degree `d` to `d + 1`; `None` if either vanishes or
/// they are not proportional.
pub fn loop_action_ratio(q: &Quiver, field: FieldSpec, x: usize, m: usize, d: i64) -> Option<Scalar> {
    let v = q.arrow(x).source;
    if q.arrow(x).target != v {
        return None;
    }
    let table = enumerate_paths(q, 2 * m + d.unsigned_abs() as usize + 2);
    let b0 = lc_block(&table, field, v, v, m, d);
    let b1 = lc_block(&table, field, v, v, m, d + 1);
    let (_, l0) = b0.matrix.cokernel_section();
    let (p1, _) = b1.matrix.cokernel_section();
    let index: BTreeMap<&(Path, Path), usize> = b1.tgt.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let xp = Path::arrow(q, x);
    let mut left = Matrix::zeros(field, b1.tgt.len(), b0.tgt.len());
    let mut right = Matrix::zeros(field, b1.tgt.len(), b0.tgt.len());
    for (c, (p, y)) in b0.tgt.iter().enumerate() {
        if let Some(&r) = index.get(&(p.clone(), y.compose(&xp).unwrap())) {
            right.set(r, c, field.one());
        }
        if p.arrows().first() == Some(&x) {
            let rest = p.terminal(q, 1);
            for l in q.arrows_from(rest.target()) {
                let lp = Path::arrow(q, l);
                if let Some(&r) = index.get(&(lp.compose(&rest).unwrap(), lp.compose(y).unwrap())) {
                    left.add_at(r, c, &field.one());
                }
            }
        }
    }
    let lbar = p1.mul(&left).mul(&l0);
    let rbar = p1.mul(&right).mul(&l0);
    let (r, c) = (0..lbar.rows())
        .flat_map(|r| (0..lbar.cols()).map(move |c| (r, c)))
        .find(|&(r, c)| !lbar.get(r, c).is_zero())?;
    let ratio = rbar.get(r, c) * &lbar.get(r, c).inv()?;
    (lbar.scale(&ratio) == rbar).then_some(ratio)
}

/// A bounded complex of finite-dimensional representations: `terms[k]` sits
/// in cohomological degree `lowest + k`, and `diffs[k]: terms[k] → terms[k+1]`.
#[derive(Clone, Debug)]
pub struct RepComplex {
    pub lowest: i64,
    pub terms: Vec<Rep>,
    pub diffs: Vec<Vec<Matrix>>,
}

impl RepComplex {
    pub fn new(lowest: i64, terms: Vec<Rep>, diffs: Vec<Vec<Matrix>>) -> Result<Self> {
        if diffs.len() + 1 != terms.len().max(1) {
            return Err(Error::Shape("need one differential between consecutive terms".into()));
        }
        for (k, d) in diffs.iter().enumerate() {
            if !crate::repmod::is_morphism(&terms[k], &terms[k + 1], d) {
                return Err(Error::Shape(format!("differential {k} is not a morphism")));
            }
        }
        let c = RepComplex { lowest, terms, diffs };
        if !c.squares_to_zero() {
            return Err(Error::Shape("d∘d ≠ 0".into()));
        }
        Ok(c)
    }

    pub fn squares_to_zero(&self) -> bool {
        self.diffs
            .windows(2)
            .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b.mul(a).is_zero()))
    }

    /// `(degree, dimension)` of each cohomology group.
    pub fn cohomology_dims(&self) -> Vec<(i64, usize)> {
        (0..self.terms.len())
            .map(|k| {
                let nv = self.terms[k].dims().len();
                let dim: usize = (0..nv)
                    .map(|v| {
                        let kernel = match self.diffs.get(k) {
                            Some(d) => d[v].cols() - d[v].rank(),
                            None => self.terms[k].dims()[v],
                        };
                        let image = if k == 0 { 0 } else { self.diffs[k - 1][v].rank() };
                        kernel - image
                    })
                    .sum();
                (self.lowest + k as i64, dim)
            })
            .collect()
    }
}

/// Termwise linear dual with transposed differentials and negated degrees.
pub fn dualize_complex(c: &RepComplex) -> RepComplex {
    let len = c.terms.len() as i64;
    RepComplex {
        lowest: -(c.lowest + len - 1),
        terms: c.terms.iter().rev().map(linear_dual).collect(),
        diffs: c
            .diffs
            .iter()
            .rev()
            .map(|d| d.iter().map(Matrix::transpose).collect())
            .collect(),
    }
}

/// Termwise isomorphism and equal cohomology.
pub fn complexes_match(a: &RepComplex, b: &RepComplex, seed: u64) -> Result<bool> {
    if a.lowest != b.lowest || a.terms.len() != b.terms.len() {
        return Ok(false);
    }
    for (x, y) in a.terms.iter().zip(&b.terms) {
        if !isomorphic(x, y, seed)? {
            return Ok(false);
        }
    }
    Ok(a.cohomology_dims() == b.cohomology_dims())
}

/// Objects accepted by [`duality_roundtrip`].
#[derive(Clone, Debug)]
pub enum RoundtripObject {
    FiniteDimensional(Rep),
    Simple(usize),
    Injective(usize),
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripVerdict {
    pub object: String,
    pub passed: bool,
    pub detail: String,
}

/// `G(F(X)) ≅ X` for the derived dualities at truncation scale. Simples and
/// injectives are taken on the left; `F` is computed on the left and `G` on
/// the right (over the opposite quiver).
pub fn duality_roundtrip(
    q: &Quiver,
    field: FieldSpec,
    x: &RoundtripObject,
    n: usize,
    m_max: usize,
) -> Result<RoundtripVerdict> {
    match x {
        RoundtripObject::FiniteDimensional(m) => {
            let back = linear_dual(&linear_dual(m));
            let ok = isomorphic(m, &back, 7)? && hom_space(m, &back)?.dim() == hom_space(m, m)?.dim();
            Ok(RoundtripVerdict {
                object: "finite-dimensional".into(),
                passed: ok,
                detail: format!("dimension {}", m.dim()),
            })
        }
        RoundtripObject::Simple(v) => {
            let s = crate::repmod::simple(q, *v, Side::Left, field);
            let n_gl = usize::from(!q.arrows().is_empty());
            let f = ext_vs_algebra(&s, n_gl, n)?.rep.expect("module structure");
            let g = ext_vs_algebra(&f, n_gl, n)?.rep.expect("module structure");
            let ok = g.side() == Side::Left && isomorphic(&g, &s, 7)?;
            Ok(RoundtripVerdict {
                object: format!("S_{}", v + 1),
                passed: ok,
                detail: format!(
                    "F(S) supported at {:?}, G(F(S)) supported at {:?}",
                    f.support().iter().map(|u| u + 1).collect::<Vec<_>>(),
                    g.support().iter().map(|u| u + 1).collect::<Vec<_>>()
                ),
            })
        }
        RoundtripObject::Injective(i) => {
            let gl = usize::from(!q.arrows().is_empty());
            let mut left = local_cohomology(q, field, gl, m_max, n)?;
            match_twist(q, &mut left, &[]);
            let op = q.opposite();
            let mut right = local_cohomology(&op, field, gl, m_max, n)?;
            match_twist(&op, &mut right, &[]);
            let (Some(pl), Some(pr)) = (&left.permutation, &right.permutation) else {
                return Err(Error::Stabilization {
                    truncation: n,
                    suggested: n + 4,
                    detail: "local cohomology twist not matched".into(),
                });
            };
            let ok = pr[pl[*i]] == *i && left.shift == right.shift && left.matched_through.is_some();
            Ok(RoundtripVerdict {
                object: format!("e_{}C", i + 1),
                passed: ok,
                detail: format!("column {} ↦ {} ↦ {}", i + 1, pl[*i] + 1, pr[pl[*i]] + 1),
            })
        }
    }
}
