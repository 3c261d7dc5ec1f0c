//! Which same-level cells of the attractor intersect, and the Hata graphs
//! built from that relation.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{admissible_deltas, check_cap, level_cells, Lattice};
use crate::intersections::Intersections;
use crate::metrics::Graph;
use crate::model::{apply_word, DeltaVector, DigitSet, ExactPoint, PiVector, Word};

/// The families `E_0 .. E_{d-1}` of admissible deltas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ESets {
    sets: Vec<BTreeSet<DeltaVector>>,
}

impl ESets {
    pub fn get(&self, t: usize) -> &BTreeSet<DeltaVector> {
        &self.sets[t]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

pub fn compute_esets(ds: &DigitSet) -> ESets {
    let d = ds.dim();
    let dims = ds.spec().dims();
    let diff = ds.differences();
    let candidates = admissible_deltas(d);
    let mut sets: Vec<BTreeSet<DeltaVector>> = Vec::with_capacity(d);
    sets.push(
        candidates
            .iter()
            .filter(|a| {
                let v: Vec<i64> = (0..d).map(|i| (dims[i] as i64 - 1) * a[i]).collect();
                diff.contains(&v)
            })
            .map(|a| DeltaVector(a.clone()))
            .collect(),
    );
    for _ in 1..d {
        let union: HashSet<&Vec<i64>> = sets.iter().flatten().map(|v| &v.0).collect();
        let next = candidates
            .iter()
            .filter(|a| {
                union.iter().any(|b| {
                    let e: Vec<i64> = (0..d).map(|i| b[i] - dims[i] as i64 * a[i]).collect();
                    diff.contains(&e)
                })
            })
            .map(|a| DeltaVector(a.clone()))
            .collect();
        sets.push(next);
    }
    ESets { sets }
}

/// Whether two same-level cells whose pi-vectors differ by `delta` intersect.
pub fn intersects(delta: &DeltaVector, esets: &ESets) -> Result<bool> {
    check_delta(delta, esets.len())?;
    Ok(esets.get(esets.len() - delta.norm()).contains(delta))
}

fn check_delta(delta: &DeltaVector, d: usize) -> Result<()> {
    if delta.0.len() != d {
        return Err(Error::domain(format!(
            "delta {delta} has {} components, expected {d}",
            delta.0.len()
        )));
    }
    if delta.is_zero() {
        return Err(Error::domain("zero delta: the cells coincide"));
    }
    if !delta.is_admissible() {
        return Err(Error::domain(format!(
            "delta {delta} is not a 0-1 vector: the boxes are disjoint"
        )));
    }
    Ok(())
}

/// Base-3 code of an admissible delta, axis 0 most significant.
pub(crate) fn delta_code(delta: &[i64]) -> usize {
    delta.iter().fold(0, |acc, &c| acc * 3 + (c + 1) as usize)
}

/// The E-sets together with a lookup table over all `3^d` delta codes.
#[derive(Clone, Debug)]
pub struct Adjacency {
    esets: ESets,
    table: Vec<bool>,
    positive: Vec<Vec<i64>>,
}

impl Adjacency {
    pub fn new(ds: &DigitSet) -> Self {
        let esets = compute_esets(ds);
        let d = ds.dim();
        let mut table = vec![false; 3usize.pow(d as u32)];
        let mut positive = Vec::new();
        for a in admissible_deltas(d) {
            let hit = esets.get(d - DeltaVector(a.clone()).norm()).contains(&DeltaVector(a.clone()));
            table[delta_code(&a)] = hit;
            let first = a.iter().find(|&&c| c != 0).copied();
            if hit && first == Some(1) {
                positive.push(a);
            }
        }
        Adjacency {
            esets,
            table,
            positive,
        }
    }

    pub fn esets(&self) -> &ESets {
        &self.esets
    }

    pub fn intersects(&self, delta: &DeltaVector) -> Result<bool> {
        check_delta(delta, self.esets.len())?;
        Ok(self.table[delta_code(&delta.0)])
    }

    /// Table lookup for a delta already known to be nonzero and admissible.
    pub(crate) fn hits(&self, delta: &[i64]) -> bool {
        self.table[delta_code(delta)]
    }

    /// Intersecting deltas whose first nonzero entry is `+1`.
    pub(crate) fn positive_deltas(&self) -> &[Vec<i64>] {
        &self.positive
    }
}

/// A child pair `(u, u2)` of two touching cells and the child delta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChildPair {
    pub u: usize,
    pub u2: usize,
    pub delta: DeltaVector,
}

/// All digit pairs `(u, u2)` such that the children `w u` and `w2 u2` still
/// intersect, where `pi(w) - pi(w2) = delta`.
pub fn touching_child_pairs(ds: &DigitSet, adj: &Adjacency, delta: &DeltaVector) -> Result<Vec<ChildPair>> {
    if !adj.intersects(delta)? {
        return Err(Error::domain(format!("cells with delta {delta} do not intersect")));
    }
    let dims = ds.spec().dims();
    let d = ds.dim();
    let mut out = Vec::new();
    for (u, a) in ds.digits().iter().enumerate() {
        for (u2, b) in ds.digits().iter().enumerate() {
            let child: Vec<i64> = (0..d)
                .map(|i| dims[i] as i64 * delta.0[i] + a.0[i] as i64 - b.0[i] as i64)
                .collect();
            if child.iter().all(|c| c.abs() <= 1) && child.iter().any(|&c| c != 0) && adj.hits(&child) {
                out.push(ChildPair {
                    u,
                    u2,
                    delta: DeltaVector(child),
                });
            }
        }
    }
    Ok(out)
}

/// The explicit level-1 contact rules for a square uniform planar grid.
pub fn level1_edge_rule_gsc(ds: &DigitSet, i: &[u32], i2: &[u32]) -> Result<bool> {
    if !ds.spec().is_gsc() {
        return Err(Error::domain("the level-1 rule table needs a square uniform planar grid"));
    }
    if i == i2 {
        return Err(Error::domain("the two digits must differ"));
    }
    let n = ds.spec().dims()[0] as i64;
    let m = n - 1;
    let diff = ds.differences();
    let has = |v: (i64, i64)| diff.contains(&vec![v.0, v.1]);
    let delta = (i[0] as i64 - i2[0] as i64, i[1] as i64 - i2[1] as i64);
    Ok(match (delta.0.abs(), delta.1.abs(), delta.0 * delta.1) {
        (1, 1, 1) => has((m, m)),
        (1, 1, -1) => has((m, -m)),
        (1, 0, _) => has((m, 0)) || (has((m, -1)) && has((m, m))) || (has((m, 1)) && has((m, -m))),
        (0, 1, _) => has((0, m)) || (has((-1, m)) && has((m, m))) || (has((1, m)) && has((m, -m))),
        _ => false,
    })
}

/// Edge label of a Hata graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    Unlabeled,
    Singleton(ExactPoint),
}

/// The level-k Hata graph: vertices are words of length k, edges join words
/// whose cells intersect. Vertices are ordered lexicographically by
/// pi-vector; edges `(a, b)` have `a < b` and are sorted.
#[derive(Clone, Debug)]
pub struct HataGraph {
    level: usize,
    digit_count: usize,
    lattice: Lattice,
    keys: Vec<u64>,
    codes: Vec<u64>,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    labels: Option<Vec<EdgeLabel>>,
}

impl HataGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn labels(&self) -> Option<&[EdgeLabel]> {
        self.labels.as_deref()
    }

    pub fn pi(&self, v: usize) -> PiVector {
        PiVector(self.lattice.unpack(self.keys[v]))
    }

    pub fn word(&self, v: usize) -> Word {
        let mut code = self.codes[v];
        let mut digits = vec![0usize; self.level];
        for slot in digits.iter_mut().rev() {
            *slot = (code % self.digit_count as u64) as usize;
            code /= self.digit_count as u64;
        }
        Word(digits)
    }

    pub fn vertex_of_pi(&self, p: &PiVector) -> Option<usize> {
        if p.0.len() != self.lattice.dim() || p.0.iter().zip(self.lattice.extents()).any(|(c, e)| c >= e) {
            return None;
        }
        self.keys.binary_search(&self.lattice.pack(&p.0)).ok()
    }

    /// Index of the edge joining `a` and `b`, if any.
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a as u32, b as u32) } else { (b as u32, a as u32) };
        self.edges.binary_search(&key).ok()
    }
}

impl Graph for HataGraph {
    fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }
}

pub(crate) fn csr(n: usize, edges: &[(u32, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut degree = vec![0usize; n + 1];
    for &(a, b) in edges {
        degree[a as usize + 1] += 1;
        degree[b as usize + 1] += 1;
    }
    for i in 0..n {
        degree[i + 1] += degree[i];
    }
    let offsets = degree;
    let mut fill = offsets.clone();
    let mut adjacency = vec![0u32; offsets[n]];
    for &(a, b) in edges {
        adjacency[fill[a as usize]] = b;
        fill[a as usize] += 1;
        adjacency[fill[b as usize]] = a;
        fill[b as usize] += 1;
    }
    for v in 0..n {
        adjacency[offsets[v]..offsets[v + 1]].sort_unstable();
    }
    (offsets, adjacency)
}

/// Builds `Gamma_k`. With `label`, every edge whose intersection is a single
/// point carries that point (planar digit sets only).
pub fn build_hata(ds: &DigitSet, k: usize, label: bool, cap: u64) -> Result<HataGraph> {
    build_hata_with(ds, &Adjacency::new(ds), k, label, cap)
}

pub(crate) fn build_hata_with(
    ds: &DigitSet,
    adj: &Adjacency,
    k: usize,
    label: bool,
    cap: u64,
) -> Result<HataGraph> {
    if k == 0 {
        return Err(Error::domain("Hata graph level must be at least 1"));
    }
    if label && ds.dim() != 2 {
        return Err(Error::domain("edge labels need a planar digit set"));
    }
    check_cap(ds, k, cap)?;
    let lattice = Lattice::new(ds.spec().dims(), k)?;
    let d = ds.dim();
    let mut pairs: Vec<(u64, u64)> = level_cells(ds, k)
        .par_chunks(d)
        .enumerate()
        .map(|(code, p)| (lattice.pack(p), code as u64))
        .collect();
    pairs.par_sort_unstable();
    let (keys, codes): (Vec<u64>, Vec<u64>) = pairs.into_iter().unzip();

    let deltas = adj.positive_deltas();
    let mut edges: Vec<(u32, u32)> = (0..keys.len())
        .into_par_iter()
        .flat_map_iter(|v| {
            let key = keys[v];
            let keys = &keys;
            let lattice = &lattice;
            deltas.iter().filter_map(move |delta| {
                let nk = lattice.offset(key, delta)?;
                let j = keys.binary_search(&nk).ok()?;
                Some((v as u32, j as u32))
            })
        })
        .collect();
    edges.par_sort_unstable();
    let (offsets, adjacency) = csr(keys.len(), &edges);
    let mut graph = HataGraph {
        level: k,
        digit_count: ds.len(),
        lattice,
        keys,
        codes,
        edges,
        offsets,
        adjacency,
        labels: None,
    };
    if label {
        let inter = Intersections::with_adjacency(ds, adj.clone())?;
        let labels = graph
            .edges
            .par_iter()
            .map(|&(a, b)| {
                let delta = DeltaVector::between(&graph.pi(a as usize), &graph.pi(b as usize));
                match inter.local_point(&delta)? {
                    Some(local) => {
                        let w = graph.word(a as usize);
                        Ok(EdgeLabel::Singleton(apply_word(ds, w.indices(), local)))
                    }
                    None => Ok(EdgeLabel::Unlabeled),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        graph.labels = Some(labels);
    }
    Ok(graph)
}
