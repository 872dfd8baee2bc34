//! The path coalgebra `C = kQ` and its truncated dual algebra `A = C*`.
//!
//! A functional on `C` is stored sparsely by its values on the path basis.
//! Since `(p₂* · p₁*)(p) = 1` exactly when `p = p₂·p₁`, the dual basis
//! multiplies like paths, so the same [`DualElement`] type doubles as an
//! element of the completed path algebra. Every dual computation is carried
//! out in path-length degrees `≤ N` and is exact there.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{FieldSpec, Scalar};
use crate::quiver::{enumerate_paths, Path, PathTable, Quiver};

/// `C` with its graded path basis up to a truncation degree.
#[derive(Clone, Debug)]
pub struct PathCoalgebra {
    quiver: Quiver,
    truncation: usize,
    table: PathTable,
}

impl PathCoalgebra {
    pub fn new(quiver: &Quiver, truncation: usize) -> Self {
        PathCoalgebra {
            quiver: quiver.clone(),
            truncation,
            table: enumerate_paths(quiver, truncation),
        }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn basis(&self) -> &PathTable {
        &self.table
    }

    /// Counit: 1 on trivial paths, 0 elsewhere.
    pub fn counit(&self, p: &Path) -> i64 {
        i64::from(p.is_trivial())
    }
}

/// All splittings `p = p₂·p₁`, returned as `(p₂, p₁)` pairs.
pub fn comultiply(q: &Quiver, p: &Path) -> Vec<(Path, Path)> {
    (0..=p.len()).map(|k| (p.terminal(q, k), p.initial(q, k))).collect()
}

/// A finitely supported functional on the path basis.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DualElement {
    terms: BTreeMap<Path, Scalar>,
}

impl DualElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The dual basis vector `p*`.
    pub fn basis(p: Path, field: FieldSpec) -> Self {
        Self::term(p, field.one())
    }

    pub fn term(p: Path, c: Scalar) -> Self {
        let mut d = Self::zero();
        d.add_term(p, c);
        d
    }

    /// `e_v`, the idempotent dual to the trivial path at `v`.
    pub fn idempotent(v: usize, field: FieldSpec) -> Self {
        Self::basis(Path::trivial(v), field)
    }

    /// The counit `ε = Σ e_v`, the unit of `A`.
    pub fn unit(q: &Quiver, field: FieldSpec) -> Self {
        let mut d = Self::zero();
        for v in 0..q.vertex_count() {
            d.add_term(Path::trivial(v), field.one());
        }
        d
    }

    pub fn add_term(&mut self, p: Path, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&p) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&p);
                }
            }
            None => {
                self.terms.insert(p, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value(&self, p: &Path) -> Option<&Scalar> {
        self.terms.get(p)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Path, &Scalar)> {
        self.terms.iter()
    }

    /// Drops every term of length greater than `n`.
    pub fn truncate(&self, n: usize) -> Self {
        DualElement {
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| p.len() <= n)
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (p, c) in &rhs.terms {
            out.add_term(p.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero();
        for (p, c) in &self.terms {
            out.add_term(p.clone(), c * s);
        }
        out
    }

    /// Lowest path length in the support.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().map(Path::len).min()
    }

    /// Homogeneous of length `d` (the zero element is homogeneous of every degree).
    pub fn is_homogeneous(&self, d: usize) -> bool {
        self.terms.keys().all(|p| p.len() == d)
    }

    /// Multiplies every path on the left by `a`: `p ↦ a·p`.
    pub fn left_mul_path(&self, a: &Path) -> Self {
        let mut out = Self::zero();
        for (p, c) in &self.terms {
            if let Some(ap) = a.compose(p) {
                out.add_term(ap, c.clone());
            }
        }
        out
    }

    /// Multiplies every path on the right by `a`: `p ↦ p·a`.
    pub fn right_mul_path(&self, a: &Path) -> Self {
        let mut out = Self::zero();
        for (p, c) in &self.terms {
            if let Some(pa) = p.compose(a) {
                out.add_term(pa, c.clone());
            }
        }
        out
    }
}

/// Convolution product `(f·g)(p) = Σ f(p₂) g(p₁)` over splittings `p = p₂·p₁`,
/// exact for all `|p| ≤ n`.
pub fn convolve(f: &DualElement, g: &DualElement, n: usize) -> DualElement {
    let mut out = DualElement::zero();
    for (p2, a) in &f.terms {
        for (p1, b) in &g.terms {
            if p2.len() + p1.len() > n {
                continue;
            }
            if let Some(p) = p2.compose(p1) {
                out.add_term(p, a * b);
            }
        }
    }
    out
}

/// Left action of `A` on `C`: `(x·f)(y) = f(y·x)`, so `q*·p* = z*` when `p = z·q`.
pub fn act_on_coalgebra(q: &Quiver, x: &DualElement, f: &DualElement) -> DualElement {
    let mut out = DualElement::zero();
    for (a, c) in &x.terms {
        for (p, d) in &f.terms {
            if p.len() < a.len() || p.source() != a.source() {
                continue;
            }
            if p.initial(q, a.len()) == *a {
                out.add_term(p.terminal(q, a.len()), c * d);
            }
        }
    }
    out
}

/// Dual basis of `J^m` in degrees `m..=n`.
pub fn radical_power_basis(q: &Quiver, m: usize, n: usize) -> Result<Vec<Path>> {
    if m > n + 1 {
        return Err(Error::Invalid(format!("radical power {m} exceeds truncation {n} + 1")));
    }
    let t = enumerate_paths(q, n);
    Ok((m..=n).flat_map(|l| t.by_len(l).iter().cloned()).collect())
}

/// `matrices[l][i][j]` = dimension of `e_i C e_j` in path length `l`, i.e. the
/// number of paths of length `l` from `j` to `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BigradedDims {
    pub matrices: Vec<Vec<Vec<usize>>>,
}

impl BigradedDims {
    pub fn at(&self, l: usize) -> &Vec<Vec<usize>> {
        &self.matrices[l]
    }
}

pub fn bigraded_dims(q: &Quiver, up_to: usize) -> BigradedDims {
    BigradedDims {
        matrices: q
            .path_counts(up_to)
            .into_iter()
            .map(|m| {
                m.into_iter()
                    .map(|r| r.into_iter().map(|c| c as usize).collect())
                    .collect()
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rationals;

    #[test]
    fn comultiply_examples() {
        let q = Quiver::cycle(2);
        let e = Path::trivial(0);
        assert_eq!(comultiply(&q, &e), vec![(e.clone(), e.clone())]);
        let x = Path::arrow(&q, 0);
        assert_eq!(
            comultiply(&q, &x),
            vec![(x.clone(), Path::trivial(0)), (Path::trivial(1), x.clone())]
        );
        let yx = Path::from_arrows(&q, 0, &[0, 1]).unwrap();
        assert_eq!(comultiply(&q, &yx).len(), 3);
    }

    #[test]
    fn convolve_examples() {
        let q = Quiver::cycle(2);
        let eps = DualElement::unit(&q, Q);
        let f = DualElement::basis(Path::arrow(&q, 0), Q).add(&DualElement::basis(Path::trivial(1), Q));
        assert_eq!(convolve(&eps, &f, 5), f);
        assert_eq!(convolve(&f, &eps, 5), f);
        let e0 = DualElement::idempotent(0, Q);
        let e1 = DualElement::idempotent(1, Q);
        assert_eq!(convolve(&e0, &e0, 3), e0);
        assert!(convolve(&e0, &e1, 3).is_zero());

        let l = Quiver::loop_quiver();
        let x = DualElement::basis(Path::arrow(&l, 0), Q);
        let x2 = DualElement::basis(Path::from_arrows(&l, 0, &[0, 0]).unwrap(), Q);
        assert_eq!(convolve(&x, &x, 4), x2);
        assert!(convolve(&x, &x, 1).is_zero());
    }

    #[test]
    fn radical_power_examples() {
        let l = Quiver::loop_quiver();
        assert_eq!(radical_power_basis(&l, 0, 3).unwrap().len(), 4);
        let b = radical_power_basis(&l, 2, 4).unwrap();
        assert_eq!(b.iter().map(Path::len).collect::<Vec<_>>(), vec![2, 3, 4]);
        let bare = Quiver::new(1, vec![]).unwrap();
        assert!(radical_power_basis(&bare, 1, 3).unwrap().is_empty());
        assert!(radical_power_basis(&l, 5, 3).is_err());
    }

    #[test]
    fn bigraded_examples() {
        let d = bigraded_dims(&Quiver::cycle(2), 3);
        assert_eq!(d.at(1), &vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(d.at(0), &vec![vec![1, 0], vec![0, 1]]);
        let l = bigraded_dims(&Quiver::loop_quiver(), 6);
        assert!(l.matrices.iter().all(|m| m == &vec![vec![1]]));
    }

    #[test]
    fn action_on_coalgebra_removes_initial_segment() {
        let q = Quiver::cycle(2);
        let x = Path::arrow(&q, 0);
        let yx = Path::from_arrows(&q, 0, &[0, 1]).unwrap();
        let f = DualElement::basis(yx, Q);
        let got = act_on_coalgebra(&q, &DualElement::basis(x, Q), &f);
        assert_eq!(got, DualElement::basis(Path::arrow(&q, 1), Q));
    }
}
