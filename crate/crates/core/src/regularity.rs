//! AS-regularity, the ♮-map and Nakayama twist, innerness, the χ-condition,
//! and Serre / Calabi-Yau checks.
//!
//! Conventions: a left simple `S_i` is the left representation supported at
//! vertex `i`; `Ext^n(S_i, A)` is a right module and ♮ sends `i` to the vertex
//! supporting it. Paths compose right to left (`q·p` traverses `p` first), so
//! on the `m`-cycle with arrows `i → i+1` the ♮-map is the forward rotation
//! `i ↦ i+1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Scalar};
use crate::homology::{
    ext_comodule_c, ext_fd, ext_vs_algebra, local_cohomology, loop_action_ratio, match_twist, minimalize,
    standard_resolution, LocalCohReport,
};
use crate::quiver::Quiver;
use crate::repmod::{simple, truncated_injective, twist, Rep, Side, VertexTwist};

pub const CONVENTION: &str =
    "paths compose right to left; left modules are left representations; Ext^n(S_i, A) is a right module supported at ♮(i)";

/// Global dimension of the completed path algebra: 0 without arrows, else 1.
pub fn global_dimension(q: &Quiver) -> usize {
    usize::from(!q.arrows().is_empty())
}

/// Length of the longest minimal resolution of a simple, as an independent
/// cross-check of [`global_dimension`].
pub fn resolution_length(q: &Quiver, field: FieldSpec, n: usize) -> Result<usize> {
    let mut len = 0;
    for v in 0..q.vertex_count() {
        let r = minimalize(&standard_resolution(&simple(q, v, Side::Left, field), n)?);
        if !r.gens1.is_empty() {
            len = 1;
        }
    }
    Ok(len)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtEntry {
    pub vertex: usize,
    pub degree: usize,
    pub dim: usize,
    pub support: Vec<usize>,
}

/// Ext of every simple against `A` on one side.
#[derive(Clone, Debug, Serialize)]
pub struct SideTable {
    pub side: Side,
    pub entries: Vec<ExtEntry>,
    pub as_regular: bool,
    /// `natural_map[i]` = vertex supporting `Ext^n(S_i, A)` when it is simple.
    pub natural_map: Option<Vec<usize>>,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegularityVerdict {
    pub as_regular: bool,
    pub gldim: usize,
    pub field: String,
    pub left: SideTable,
    pub right: SideTable,
    pub sides_agree: bool,
}

fn side_table(q: &Quiver, field: FieldSpec, side: Side, n: usize, gldim: usize) -> Result<SideTable> {
    let mut entries = Vec::new();
    let mut witnesses = Vec::new();
    let mut nat = Vec::with_capacity(q.vertex_count());
    for v in 0..q.vertex_count() {
        let s = simple(q, v, side, field);
        for i in 0..=gldim.max(1) {
            let e = ext_vs_algebra(&s, i, n)?;
            let support = e.support.clone().unwrap_or_default();
            if i != gldim && e.dim != 0 {
                witnesses.push(format!("Ext^{i}(S_{}, A) has dimension {} (expected 0)", v + 1, e.dim));
            }
            if i == gldim {
                if e.dim == 1 {
                    nat.push(support.iter().position(|&d| d == 1));
                } else {
                    witnesses.push(format!("Ext^{i}(S_{}, A) has dimension {} (expected 1)", v + 1, e.dim));
                    nat.push(None);
                }
            }
            entries.push(ExtEntry {
                vertex: v,
                degree: i,
                dim: e.dim,
                support,
            });
        }
    }
    let natural_map: Option<Vec<usize>> = nat.into_iter().collect();
    if let Some(m) = &natural_map {
        let mut seen = vec![false; m.len()];
        for &j in m {
            if std::mem::replace(&mut seen[j], true) {
                witnesses.push(format!("♮ is not injective: vertex {} hit twice", j + 1));
            }
        }
    }
    Ok(SideTable {
        side,
        entries,
        as_regular: witnesses.is_empty(),
        natural_map: if witnesses.is_empty() { natural_map } else { None },
        witnesses,
    })
}

/// Ext tables of all simples against `A` on both sides.
pub fn as_regular_check(q: &Quiver, field: FieldSpec, n: usize) -> Result<RegularityVerdict> {
    let gldim = global_dimension(q);
    let left = side_table(q, field, Side::Left, n, gldim)?;
    let right = side_table(q, field, Side::Right, n, gldim)?;
    Ok(RegularityVerdict {
        as_regular: left.as_regular && right.as_regular,
        gldim,
        field: field.to_string(),
        sides_agree: left.as_regular == right.as_regular,
        left,
        right,
    })
}

/// The vertex supporting `Ext^n(S_i, A)`.
pub fn natural_map(q: &Quiver, field: FieldSpec, i: usize, side: Side, n: usize) -> Result<usize> {
    let gldim = global_dimension(q);
    let e = ext_vs_algebra(&simple(q, i, side, field), gldim, n)?;
    let support = e.support.unwrap_or_default();
    if e.dim != 1 {
        return Err(Error::NotRegular(format!(
            "Ext^{gldim}(S_{}, A) has dimension {}",
            i + 1,
            e.dim
        )));
    }
    Ok(support.iter().position(|&d| d == 1).expect("one-dimensional support"))
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerWitness {
    /// Vertex scalars `c` with `λ_a = c_{t(a)} / c_{s(a)}`.
    Coboundary {
        scalars: Vec<Scalar>,
    },
    MovesVertex {
        vertex: usize,
        image: usize,
    },
    MovesArrow {
        arrow: String,
        image: String,
    },
    /// An arrow closing a cycle whose scalar product is not 1.
    Cycle {
        arrow: String,
        product: Scalar,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct InnerVerdict {
    pub inner: bool,
    pub witness: InnerWitness,
}

/// Inner iff the twist fixes every vertex and arrow and the arrow scalars are
/// a coboundary, i.e. the scalar product around every cycle is 1.
pub fn inner_test(q: &Quiver, t: &VertexTwist) -> Result<InnerVerdict> {
    t.validate(q)?;
    if let Some(v) = (0..t.vertex_perm.len()).find(|&v| t.vertex_perm[v] != v) {
        return Ok(InnerVerdict {
            inner: false,
            witness: InnerWitness::MovesVertex {
                vertex: v,
                image: t.vertex_perm[v],
            },
        });
    }
    if let Some(a) = (0..t.arrow_perm.len()).find(|&a| t.arrow_perm[a] != a) {
        return Ok(InnerVerdict {
            inner: false,
            witness: InnerWitness::MovesArrow {
                arrow: q.arrow(a).label.clone(),
                image: q.arrow(t.arrow_perm[a]).label.clone(),
            },
        });
    }
    // spanning forest of the underlying graph, c_root = 1
    let field = t.scalars.first().map_or(FieldSpec::Rationals, Scalar::field);
    let nv = q.vertex_count();
    let mut c: Vec<Option<Scalar>> = vec![None; nv];
    let mut tree = vec![false; q.arrows().len()];
    for root in 0..nv {
        if c[root].is_some() {
            continue;
        }
        c[root] = Some(field.one());
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for (a, ar) in q.arrows().iter().enumerate() {
                let lambda = &t.scalars[a];
                if ar.source == v && c[ar.target].is_none() {
                    c[ar.target] = Some(lambda * c[v].as_ref().unwrap());
                    tree[a] = true;
                    stack.push(ar.target);
                } else if ar.target == v && c[ar.source].is_none() {
                    c[ar.source] = Some(c[v].as_ref().unwrap() * &lambda.inv().expect("nonzero scalar"));
                    tree[a] = true;
                    stack.push(ar.source);
                }
            }
        }
    }
    let c: Vec<Scalar> = c.into_iter().map(Option::unwrap).collect();
    for (a, ar) in q.arrows().iter().enumerate() {
        if tree[a] {
            continue;
        }
        let product = &(&t.scalars[a] * &c[ar.source]) * &c[ar.target].inv().expect("nonzero");
        if !product.is_one() {
            return Ok(InnerVerdict {
                inner: false,
                witness: InnerWitness::Cycle {
                    arrow: ar.label.clone(),
                    product,
                },
            });
        }
    }
    Ok(InnerVerdict {
        inner: true,
        witness: InnerWitness::Coboundary { scalars: c },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NakayamaReport {
    pub gldim: usize,
    pub field: String,
    pub convention: &'static str,
    /// ♮ as computed from `Ext^n(S_i, A)`.
    pub vertex_map: Vec<usize>,
    pub twist: VertexTwist,
    pub order: usize,
    pub inner: InnerVerdict,
    /// The local-cohomology permutation agrees with ♮.
    pub consistent: bool,
    pub local: LocalCohReport,
    /// Orientation of ♮ on a single oriented cycle (`forward`, `backward`, `fixed`).
    pub orientation: String,
}

/// The Nakayama twist: ♮ from the Ext tables, its arrow-level lift and
/// scalars from `H^nΓ(A)`, checked against each other.
pub fn nakayama(q: &Quiver, field: FieldSpec, n: usize, m_max: usize) -> Result<NakayamaReport> {
    let verdict = as_regular_check(q, field, n)?;
    if !verdict.as_regular {
        return Err(Error::NotRegular(
            [&verdict.left, &verdict.right]
                .iter()
                .flat_map(|t| t.witnesses.iter().map(move |w| format!("{}: {w}", t.side)))
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let gldim = verdict.gldim;
    let nat = verdict.left.natural_map.clone().expect("regular instances have ♮");
    let mut local = local_cohomology(q, field, gldim, m_max, n)?;
    match_twist(q, &mut local, std::slice::from_ref(&nat));
    if local.permutation.is_none() {
        return Err(Error::Stabilization {
            truncation: n,
            suggested: n + 4,
            detail: "no twist matches the certified local cohomology".into(),
        });
    }
    let consistent = local.permutation.as_ref() == Some(&nat);
    let identity = nat.iter().enumerate().all(|(i, &j)| i == j);
    let twist = if identity {
        let mut t = VertexTwist::identity(q, field);
        for (a, ar) in q.arrows().iter().enumerate() {
            if ar.source == ar.target {
                let d = -(((m_max / 2).max(2)) as i64);
                t.scalars[a] = loop_action_ratio(q, field, a, m_max, d).ok_or_else(|| Error::Stabilization {
                    truncation: n,
                    suggested: n + 4,
                    detail: format!("left and right actions of {} are not proportional", ar.label),
                })?;
            }
        }
        t
    } else {
        VertexTwist::from_vertex_perm(q, &nat, field)?
    };
    let inner = inner_test(q, &twist)?;
    let orientation = if identity {
        "fixed".to_string()
    } else if q.arrows().iter().all(|a| nat[a.source] == a.target) {
        "forward".to_string()
    } else if q.arrows().iter().all(|a| nat[a.target] == a.source) {
        "backward".to_string()
    } else {
        "mixed".to_string()
    };
    Ok(NakayamaReport {
        gldim,
        field: field.to_string(),
        convention: CONVENTION,
        order: twist.vertex_order(),
        vertex_map: nat,
        twist,
        inner,
        consistent,
        local,
        orientation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiProbe {
    pub probe: String,
    pub simple: usize,
    /// `dims[i] = dim Ext^i(probe, S)` for `i ≤ n`.
    pub dims: Vec<usize>,
    pub finite: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiReport {
    pub gldim: usize,
    pub probes: Vec<ChiProbe>,
    pub all_finite: bool,
}

/// Ext of simples, injectives `e_iC` and `C` itself into each simple, for
/// degrees `≤ n`. Injectives and `C` are handled through `Ext_C(C, S_j)`,
/// whose fiber at `i` is `Ext_C(e_iC, S_j)`.
pub fn chi_probe(q: &Quiver, field: FieldSpec, n: usize) -> Result<ChiReport> {
    let gldim = global_dimension(q);
    let nv = q.vertex_count();
    let mut probes = Vec::new();
    for j in 0..nv {
        let sj = simple(q, j, Side::Left, field);
        for i in 0..nv {
            let si = simple(q, i, Side::Left, field);
            let dims = (0..=gldim)
                .map(|k| ext_fd(&si, &sj, k).map(|e| e.dim))
                .collect::<Result<_>>()?;
            probes.push(ChiProbe {
                probe: format!("S_{}", i + 1),
                simple: j,
                dims,
                finite: true,
            });
        }
        let mut fibers: Vec<Option<Vec<usize>>> = Vec::new();
        for k in 0..=gldim {
            fibers.push(ext_comodule_c(q, field, j, k, n).ok().and_then(|e| e.support));
        }
        for i in 0..nv {
            let dims: Vec<usize> = fibers.iter().map(|f| f.as_ref().map_or(0, |s| s[i])).collect();
            probes.push(ChiProbe {
                probe: format!("e_{}C", i + 1),
                simple: j,
                dims,
                finite: fibers.iter().all(Option::is_some),
            });
        }
        probes.push(ChiProbe {
            probe: "C".into(),
            simple: j,
            dims: fibers
                .iter()
                .map(|f| f.as_ref().map_or(0, |s| s.iter().sum()))
                .collect(),
            finite: fibers.iter().all(Option::is_some),
        });
    }
    Ok(ChiReport {
        gldim,
        all_finite: probes.iter().all(|p| p.finite),
        probes,
    })
}

/// The Serre image of `X`: the twist of `X` by the inverse Nakayama twist,
/// together with the shift `n`.
pub fn serre_twist(x: &Rep, nak: &NakayamaReport) -> Result<(Rep, usize)> {
    Ok((twist(x, &nak.twist.inverse())?, nak.gldim))
}

/// Simples and the truncated injectives `e_iC` of lengths `1..=max_t`.
pub fn default_family(q: &Quiver, field: FieldSpec, max_t: usize) -> Vec<(String, Rep)> {
    let mut out = Vec::new();
    for v in 0..q.vertex_count() {
        out.push((format!("S_{}", v + 1), simple(q, v, Side::Left, field)));
    }
    for t in 1..=max_t {
        for v in 0..q.vertex_count() {
            out.push((
                format!("e_{}C<={t}", v + 1),
                truncated_injective(q, v, t, Side::Left, field),
            ));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CyIdentity {
    pub x: String,
    pub y: String,
    pub degree: usize,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CyVerdict {
    pub n: usize,
    pub identities: Vec<CyIdentity>,
    pub all_hold: bool,
    pub inner: bool,
    pub verdict: String,
}

/// Checks `dim Ext^i(X, Y) = dim Ext^{n−i}(Y, 𝒮X)` for all pairs in the family.
pub fn cy_check(family: &[(String, Rep)], nak: &NakayamaReport) -> Result<CyVerdict> {
    let n = nak.gldim;
    let serre: Vec<Rep> = family
        .iter()
        .map(|(_, x)| serre_twist(x, nak).map(|r| r.0))
        .collect::<Result<_>>()?;
    let mut identities = Vec::new();
    for (xi, (xn, x)) in family.iter().enumerate() {
        for (yn, y) in family {
            for i in 0..=n {
                identities.push(CyIdentity {
                    x: xn.clone(),
                    y: yn.clone(),
                    degree: i,
                    lhs: ext_fd(x, y, i)?.dim,
                    rhs: ext_fd(y, &serre[xi], n - i)?.dim,
                });
            }
        }
    }
    let all_hold = identities.iter().all(|c| c.lhs == c.rhs);
    let inner = nak.inner.inner;
    let verdict = match (all_hold, inner) {
        (true, true) => format!("CY-{n}"),
        (true, false) => format!("twisted CY-{n}: Serre functor is the Nakayama twist shifted by {n}; twist not inner"),
        (false, _) => "Serre identities fail".to_string(),
    };
    Ok(CyVerdict {
        n,
        identities,
        all_hold,
        inner,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DualizingReport {
    pub shift: usize,
    pub vertex_map: Vec<usize>,
    pub inner: bool,
    pub summary: String,
}

pub fn dualizing_report(nak: &NakayamaReport) -> DualizingReport {
    let n = nak.gldim;
    let twist = if nak.twist.is_identity() {
        "identity".to_string()
    } else {
        let m: Vec<String> = nak
            .vertex_map
            .iter()
            .enumerate()
            .map(|(i, j)| format!("{}→{}", i + 1, j + 1))
            .collect();
        format!("vertex map {}", m.join(", "))
    };
    let summary = if nak.inner.inner {
        if n == 0 {
            "balanced dualizing complex: A, shift 0".to_string()
        } else {
            format!("balanced dualizing complex: A itself, shift {n}, twist {twist} (inner) ⇒ CY-{n}")
        }
    } else {
        format!("balanced dualizing complex: A twisted by σ, shift {n}, twist = {twist}, not inner")
    };
    DualizingReport {
        shift: n,
        vertex_map: nak.vertex_map.clone(),
        inner: nak.inner.inner,
        summary,
    }
}
