//! Finite quivers, paths, and the bounded-growth gate.
//!
//! Paths compose right-to-left like functions: for `p = a_k ⋯ a_1` the arrow
//! `a_1` is traversed first, and `p·q` is defined when `source(p) == target(q)`.
//! Vertices are 0-based in memory and 1-based in the text format.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::FieldSpec;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrow {
    pub label: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Quiver {
    vertex_count: usize,
    arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(vertex_count: usize, arrows: Vec<Arrow>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidQuiver("a quiver needs at least one vertex".into()));
        }
        let mut seen = HashMap::new();
        for (i, a) in arrows.iter().enumerate() {
            if a.source >= vertex_count || a.target >= vertex_count {
                return Err(Error::InvalidQuiver(format!(
                    "arrow {} has an endpoint outside 1..={vertex_count}",
                    a.label
                )));
            }
            if seen.insert(a.label.clone(), i).is_some() {
                return Err(Error::InvalidQuiver(format!("duplicate label {}", a.label)));
            }
        }
        Ok(Quiver { vertex_count, arrows })
    }

    /// Builds a quiver from 0-based `(label, source, target)` triples.
    pub fn from_edges(vertex_count: usize, edges: &[(&str, usize, usize)]) -> Result<Self> {
        Self::new(
            vertex_count,
            edges
                .iter()
                .map(|&(l, s, t)| Arrow {
                    label: l.to_string(),
                    source: s,
                    target: t,
                })
                .collect(),
        )
    }

    /// One vertex, one loop `x`.
    pub fn loop_quiver() -> Self {
        Self::from_edges(1, &[("x", 0, 0)]).unwrap()
    }

    /// The oriented cycle on `n` vertices: arrow `x_i` runs `i → i+1 mod n`.
    pub fn cycle(n: usize) -> Self {
        assert!(n >= 1);
        if n == 2 {
            return Self::from_edges(2, &[("x", 0, 1), ("y", 1, 0)]).unwrap();
        }
        let arrows = (0..n)
            .map(|i| Arrow {
                label: format!("x{}", i + 1),
                source: i,
                target: (i + 1) % n,
            })
            .collect();
        Self::new(n, arrows).unwrap()
    }

    /// Two parallel arrows `a, b: 1 → 2`.
    pub fn kronecker() -> Self {
        Self::from_edges(2, &[("a", 0, 1), ("b", 0, 1)]).unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, i: usize) -> &Arrow {
        &self.arrows[i]
    }

    pub fn arrow_index(&self, label: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.label == label)
    }

    pub fn arrows_from(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].source == v)
    }

    pub fn arrows_into(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.arrows.len()).filter(move |&a| self.arrows[a].target == v)
    }

    /// Same vertices, every arrow reversed, labels kept.
    pub fn opposite(&self) -> Quiver {
        Quiver {
            vertex_count: self.vertex_count,
            arrows: self
                .arrows
                .iter()
                .map(|a| Arrow {
                    label: a.label.clone(),
                    source: a.target,
                    target: a.source,
                })
                .collect(),
        }
    }

    /// `count[i][j]` = number of arrows `j → i`.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count;
        let mut m = vec![vec![0; n]; n];
        for a in &self.arrows {
            m[a.target][a.source] += 1;
        }
        m
    }

    /// Path counts per length: `out[l][i][j]` = paths of length `l` from `j` to `i`.
    pub fn path_counts(&self, max_len: usize) -> Vec<Vec<Vec<u128>>> {
        let n = self.vertex_count;
        let mut out = Vec::with_capacity(max_len + 1);
        let mut cur = vec![vec![0u128; n]; n];
        for (i, row) in cur.iter_mut().enumerate() {
            row[i] = 1;
        }
        out.push(cur.clone());
        for _ in 0..max_len {
            let mut next = vec![vec![0u128; n]; n];
            for a in &self.arrows {
                for j in 0..n {
                    next[a.target][j] = next[a.target][j].saturating_add(cur[a.source][j]);
                }
            }
            cur = next;
            out.push(cur.clone());
        }
        out
    }

    pub fn render(&self, field: Option<FieldSpec>) -> String {
        let mut s = format!("vertices: {}\n", self.vertex_count);
        for a in &self.arrows {
            s.push_str(&format!("arrow {} {} {}\n", a.label, a.source + 1, a.target + 1));
        }
        if let Some(f) = field {
            s.push_str(&format!("field: {f}\n"));
        }
        s
    }
}

/// A parsed quiver file: the quiver plus an optional field declaration.
#[derive(Clone, Debug)]
pub struct QuiverFile {
    pub quiver: Quiver,
    pub field: Option<FieldSpec>,
}

/// Parses the line-oriented quiver format.
///
/// ```text
/// vertices: 2
/// arrow x 1 2
/// arrow y 2 1
/// field: Q
/// ```
pub fn parse_quiver(text: &str) -> Result<QuiverFile> {
    let mut vertex_count: Option<usize> = None;
    let mut arrows = Vec::new();
    let mut labels: HashMap<String, usize> = HashMap::new();
    let mut field = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            if vertex_count.is_some() {
                return Err(err("vertex count declared twice".into()));
            }
            let n: usize = rest
                .trim()
                .parse()
                .map_err(|_| err(format!("bad vertex count `{}`", rest.trim())))?;
            if n == 0 {
                return Err(err("a quiver needs at least one vertex".into()));
            }
            vertex_count = Some(n);
        } else if let Some(rest) = line.strip_prefix("field:") {
            field = Some(rest.trim().parse::<FieldSpec>().map_err(|e| err(e.to_string()))?);
        } else if let Some(rest) = line.strip_prefix("arrow") {
            let n = vertex_count.ok_or_else(|| err("arrow before `vertices:` line".into()))?;
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 3 || !rest.starts_with(char::is_whitespace) {
                return Err(err("expected `arrow <label> <source> <target>`".into()));
            }
            let endpoint = |s: &str| -> Result<usize> {
                let v: usize = s.parse().map_err(|_| err(format!("bad vertex `{s}`")))?;
                if v == 0 || v > n {
                    return Err(err(format!("vertex {v} out of range 1..={n}")));
                }
                Ok(v - 1)
            };
            let label = parts[0].to_string();
            if let Some(prev) = labels.get(&label) {
                return Err(err(format!("duplicate label `{label}` (first used on line {prev})")));
            }
            let source = endpoint(parts[1])?;
            let target = endpoint(parts[2])?;
            labels.insert(label.clone(), line_no);
            arrows.push(Arrow { label, source, target });
        } else {
            return Err(err(format!("unrecognized line `{line}`")));
        }
    }
    let n = vertex_count.ok_or(Error::Parse {
        line: 1,
        message: "missing `vertices:` line".into(),
    })?;
    Ok(QuiverFile {
        quiver: Quiver::new(n, arrows)?,
        field,
    })
}

/// A path, stored as arrow indices in traversal order (first arrow first).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    source: usize,
    target: usize,
    arrows: Vec<usize>,
}

impl Path {
    pub fn trivial(v: usize) -> Path {
        Path {
            source: v,
            target: v,
            arrows: Vec::new(),
        }
    }

    pub fn arrow(q: &Quiver, a: usize) -> Path {
        let ar = q.arrow(a);
        Path {
            source: ar.source,
            target: ar.target,
            arrows: vec![a],
        }
    }

    /// Builds a path from arrows in traversal order, checking composability.
    pub fn from_arrows(q: &Quiver, source: usize, arrows: &[usize]) -> Option<Path> {
        let mut at = source;
        for &a in arrows {
            if q.arrow(a).source != at {
                return None;
            }
            at = q.arrow(a).target;
        }
        Some(Path {
            source,
            target: at,
            arrows: arrows.to_vec(),
        })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.arrows.is_empty()
    }

    /// Arrow indices in traversal order.
    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    /// `self · rhs`: traverse `rhs` first, then `self`.
    pub fn compose(&self, rhs: &Path) -> Option<Path> {
        if self.source != rhs.target {
            return None;
        }
        let mut arrows = rhs.arrows.clone();
        arrows.extend_from_slice(&self.arrows);
        Some(Path {
            source: rhs.source,
            target: self.target,
            arrows,
        })
    }

    /// The first `k` traversed arrows as a path.
    pub fn initial(&self, q: &Quiver, k: usize) -> Path {
        let arrows = self.arrows[..k].to_vec();
        let target = arrows.last().map_or(self.source, |&a| q.arrow(a).target);
        Path {
            source: self.source,
            target,
            arrows,
        }
    }

    /// Everything after the first `k` traversed arrows.
    pub fn terminal(&self, q: &Quiver, k: usize) -> Path {
        let arrows = self.arrows[k..].to_vec();
        let source = arrows.first().map_or(self.target, |&a| q.arrow(a).source);
        Path {
            source,
            target: self.target,
            arrows,
        }
    }

    /// Reads the path in the opposite quiver (same arrows, reversed order).
    pub fn opposite(&self) -> Path {
        let mut arrows = self.arrows.clone();
        arrows.reverse();
        Path {
            source: self.target,
            target: self.source,
            arrows,
        }
    }

    pub fn display(&self, q: &Quiver) -> String {
        if self.arrows.is_empty() {
            return format!("e{}", self.source + 1);
        }
        self.arrows
            .iter()
            .rev()
            .map(|&a| q.arrow(a).label.as_str())
            .collect::<Vec<_>>()
            .join("")
    }
}

/// All paths of length ≤ `max_len`, grouped by length and indexed.
#[derive(Clone, Debug)]
pub struct PathTable {
    by_len: Vec<Vec<Path>>,
    index: HashMap<Path, usize>,
    all: Vec<Path>,
}

impl PathTable {
    pub fn by_len(&self, len: usize) -> &[Path] {
        self.by_len.get(len).map_or(&[], |v| v.as_slice())
    }

    pub fn max_len(&self) -> usize {
        self.by_len.len() - 1
    }

    pub fn all(&self) -> &[Path] {
        &self.all
    }

    pub fn index_of(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn between(&self, source: usize, target: usize, len: usize) -> Vec<&Path> {
        self.by_len(len)
            .iter()
            .filter(|p| p.source == source && p.target == target)
            .collect()
    }

    pub fn from_source(&self, source: usize, len: usize) -> Vec<&Path> {
        self.by_len(len).iter().filter(|p| p.source == source).collect()
    }

    pub fn into_target(&self, target: usize, len: usize) -> Vec<&Path> {
        self.by_len(len).iter().filter(|p| p.target == target).collect()
    }
}

/// Complete, duplicate-free enumeration of paths of length ≤ `max_len`.
pub fn enumerate_paths(q: &Quiver, max_len: usize) -> PathTable {
    let mut by_len: Vec<Vec<Path>> = vec![(0..q.vertex_count()).map(Path::trivial).collect()];
    for _ in 0..max_len {
        let prev = by_len.last().unwrap();
        let mut next = Vec::new();
        for p in prev {
            for a in q.arrows_from(p.target) {
                let mut arrows = p.arrows.clone();
                arrows.push(a);
                next.push(Path {
                    source: p.source,
                    target: q.arrow(a).target,
                    arrows,
                });
            }
        }
        by_len.push(next);
    }
    let all: Vec<Path> = by_len.iter().flatten().cloned().collect();
    let index = all.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    PathTable { by_len, index, all }
}

/// Two distinct paths of equal length between the same endpoints.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthWitness {
    pub source: usize,
    pub target: usize,
    pub length: usize,
    pub paths: [String; 2],
    #[serde(skip)]
    pub raw: [Path; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthVerdict {
    pub bounded: bool,
    /// Eventual period of per-degree path counts (bounded case).
    pub period: usize,
    /// Degree from which the counts are periodic (bounded case).
    pub preperiod: usize,
    /// Maximum per-degree total path count (bounded case).
    pub max_count: u128,
    pub cycle_lengths: Vec<usize>,
    pub witness: Option<GrowthWitness>,
}

impl GrowthVerdict {
    /// Length of the zero window used by stabilization certificates.
    pub fn window(&self) -> usize {
        2 * self.period.max(1)
    }
}

/// Strongly connected components, each as a sorted vertex list.
fn strong_components(q: &Quiver) -> Vec<Vec<usize>> {
    let n = q.vertex_count();
    let mut order = Vec::new();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        seen[s] = true;
        while let Some((v, i)) = stack.pop() {
            let outs: Vec<usize> = q.arrows_from(v).map(|a| q.arrow(a).target).collect();
            if i < outs.len() {
                stack.push((v, i + 1));
                let w = outs[i];
                if !seen[w] {
                    seen[w] = true;
                    stack.push((w, 0));
                }
            } else {
                order.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; n];
    let mut comps = Vec::new();
    for &s in order.iter().rev() {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            for a in q.arrows_into(v) {
                let w = q.arrow(a).source;
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    members.push(w);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        comps.push(members);
    }
    comps
}

/// Shortest path from any vertex of `from` to any vertex of `to` (BFS over arrows).
fn shortest_path(q: &Quiver, from: &[usize], to: &[usize]) -> Option<Path> {
    let n = q.vertex_count();
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = from.iter().copied().collect();
    for &v in from {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        for a in q.arrows_from(v) {
            let w = q.arrow(a).target;
            if seen[w] {
                continue;
            }
            seen[w] = true;
            prev[w] = Some((v, a));
            if to.contains(&w) {
                let mut arrows = Vec::new();
                let mut at = w;
                while let Some((u, b)) = prev[at] {
                    arrows.push(b);
                    at = u;
                }
                arrows.reverse();
                return Path::from_arrows(q, at, &arrows);
            }
            queue.push_back(w);
        }
    }
    None
}

/// A closed walk at `v` that starts with arrow `a` and stays in the component.
fn cycle_through(q: &Quiver, a: usize, v: usize) -> Option<Path> {
    let ar = q.arrow(a);
    if ar.target == v {
        return Some(Path::arrow(q, a));
    }
    let rest = shortest_path(q, &[ar.target], &[v])?;
    rest.compose(&Path::arrow(q, a))
}

fn repeat(p: &Path, k: usize) -> Path {
    let mut out = Path::trivial(p.source);
    for _ in 0..k {
        out = p.compose(&out).expect("closed walk");
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Decides whether per-degree path counts stay bounded.
///
/// Bounded iff every cyclic strongly connected component is a single
/// oriented cycle and no path joins two distinct cyclic components.
pub fn growth_gate(q: &Quiver) -> GrowthVerdict {
    let comps = strong_components(q);
    let n = q.vertex_count();
    let mut comp_of = vec![0; n];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let internal = |c: usize| -> Vec<usize> {
        (0..q.arrows().len())
            .filter(|&a| comp_of[q.arrow(a).source] == c && comp_of[q.arrow(a).target] == c)
            .collect()
    };
    let mut cyclic = Vec::new();
    let mut witness = None;
    for (ci, c) in comps.iter().enumerate() {
        let edges = internal(ci);
        if edges.is_empty() {
            continue;
        }
        if edges.len() > c.len() && witness.is_none() {
            // some vertex has two internal out-arrows: two cycles through it
            let v = *c
                .iter()
                .find(|&&v| edges.iter().filter(|&&a| q.arrow(a).source == v).count() >= 2)
                .expect("strongly connected component with surplus arrows");
            let outs: Vec<usize> = edges
                .iter()
                .copied()
                .filter(|&a| q.arrow(a).source == v)
                .take(2)
                .collect();
            let c1 = cycle_through(q, outs[0], v).expect("cycle");
            let c2 = cycle_through(q, outs[1], v).expect("cycle");
            let p1 = repeat(&c1, c2.len());
            let p2 = repeat(&c2, c1.len());
            witness = Some(make_witness(q, p1, p2));
        }
        cyclic.push(ci);
    }
    if witness.is_none() {
        'outer: for &c1 in &cyclic {
            for &c2 in &cyclic {
                if c1 == c2 {
                    continue;
                }
                if let Some(bridge) = shortest_path(q, &comps[c1], &comps[c2]) {
                    let start = bridge.source();
                    let end = bridge.target();
                    let a1 = internal(c1).into_iter().find(|&a| q.arrow(a).source == start).unwrap();
                    let a2 = internal(c2).into_iter().find(|&a| q.arrow(a).source == end).unwrap();
                    let cyc1 = cycle_through(q, a1, start).unwrap();
                    let cyc2 = cycle_through(q, a2, end).unwrap();
                    let p1 = repeat(&cyc2, cyc1.len()).compose(&bridge).unwrap();
                    let p2 = bridge.compose(&repeat(&cyc1, cyc2.len())).unwrap();
                    witness = Some(make_witness(q, p1, p2));
                    break 'outer;
                }
            }
        }
    }
    let cycle_lengths: Vec<usize> = cyclic.iter().map(|&c| comps[c].len()).collect();
    if let Some(w) = witness {
        return GrowthVerdict {
            bounded: false,
            period: 0,
            preperiod: 0,
            max_count: 0,
            cycle_lengths,
            witness: Some(w),
        };
    }
    let period = cycle_lengths.iter().fold(1, |acc, &l| acc / gcd(acc, l) * l);
    let horizon = n + 3 * period;
    let counts = q.path_counts(horizon);
    let totals: Vec<u128> = counts.iter().map(|m| m.iter().flatten().copied().sum()).collect();
    let preperiod = (0..=n)
        .find(|&s| (s..=horizon - period).all(|l| totals[l] == totals[l + period]))
        .unwrap_or(n);
    GrowthVerdict {
        bounded: true,
        period,
        preperiod,
        max_count: totals.iter().copied().max().unwrap_or(0),
        cycle_lengths,
        witness: None,
    }
}

fn make_witness(q: &Quiver, p1: Path, p2: Path) -> GrowthWitness {
    debug_assert_eq!(p1.len(), p2.len());
    debug_assert_ne!(p1, p2);
    GrowthWitness {
        source: p1.source(),
        target: p1.target(),
        length: p1.len(),
        paths: [p1.display(q), p2.display(q)],
        raw: [p1, p2],
    }
}

impl fmt::Display for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(None))
    }
}
