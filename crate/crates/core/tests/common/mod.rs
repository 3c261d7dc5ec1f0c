//! Brute-force oracles shared by the integration tests. None of them use
//! the E-set recursion, the child-pair table or the product automaton.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use carpetlab::model::{box_contains, cell_box, pi, Digit, DigitSet, ExactPoint, GridSpec, Word};
use rand::Rng;

pub fn gsc(n: u32, cells: &[(u32, u32)]) -> DigitSet {
    DigitSet::gsc(n, cells).unwrap()
}

pub fn carpet() -> DigitSet {
    let cells: Vec<(u32, u32)> = (0..3)
        .flat_map(|a| (0..3).map(move |b| (a, b)))
        .filter(|&c| c != (1, 1))
        .collect();
    gsc(3, &cells)
}

pub fn gasket() -> DigitSet {
    gsc(2, &[(0, 0), (1, 0), (1, 1)])
}

pub fn segment() -> DigitSet {
    gsc(3, &[(0, 0), (0, 1), (0, 2)])
}

/// A cross with its left arm bent down to the corner.
pub fn hooked_cross() -> DigitSet {
    gsc(3, &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 1)])
}

/// `{(0,0)}` plus the top two rows of the 3 x 3 grid.
pub fn seven_cell() -> DigitSet {
    let mut cells = vec![(0, 0)];
    cells.extend((0..3).flat_map(|i| (1..3).map(move |j| (i, j))));
    gsc(3, &cells)
}

pub fn pt(c: &[(i64, i64)]) -> ExactPoint {
    ExactPoint::from_fractions(c)
}

pub fn word(ds: &DigitSet, cells: &[&[u32]]) -> Word {
    Word::from_digits(ds, cells).unwrap()
}

/// Every planar digit set of the `n x n` grid, by bit mask.
pub fn all_sets(n: u32) -> Vec<DigitSet> {
    let cells = n * n;
    (0..1u64 << cells)
        .filter(|m| m.count_ones() > 1 && m.count_ones() < cells)
        .map(|m| from_mask(n, m))
        .collect()
}

pub fn from_mask(n: u32, mask: u64) -> DigitSet {
    let digits = (0..n * n)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| Digit(vec![b / n, b % n]))
        .collect();
    DigitSet::new(GridSpec::square(n).unwrap(), digits).unwrap()
}

/// A uniformly random valid digit set over the given grid.
pub fn random_set(rng: &mut impl Rng, dims: &[u32]) -> DigitSet {
    let total: u32 = dims.iter().product();
    loop {
        let mut digits = Vec::new();
        for idx in 0..total {
            if rng.random_bool(0.5) {
                let mut rest = idx;
                let mut c = vec![0u32; dims.len()];
                for axis in (0..dims.len()).rev() {
                    c[axis] = rest % dims[axis];
                    rest /= dims[axis];
                }
                digits.push(Digit(c));
            }
        }
        if digits.len() > 1 && (digits.len() as u32) < total {
            return DigitSet::new(GridSpec::uniform(dims).unwrap(), digits).unwrap();
        }
    }
}

fn child_deltas(ds: &DigitSet, delta: &[i64]) -> Vec<(usize, usize, Vec<i64>)> {
    let dims = ds.spec().dims();
    let mut out = Vec::new();
    for (u, a) in ds.digits().iter().enumerate() {
        for (v, b) in ds.digits().iter().enumerate() {
            let c: Vec<i64> = (0..delta.len())
                .map(|i| dims[i] as i64 * delta[i] + a.0[i] as i64 - b.0[i] as i64)
                .collect();
            if c.iter().all(|x| x.abs() <= 1) {
                out.push((u, v, c));
            }
        }
    }
    out
}

/// Deltas from which an infinite chain of touching descendant boxes
/// exists: exactly the deltas of intersecting attractor cells.
pub fn live_deltas(ds: &DigitSet) -> BTreeSet<Vec<i64>> {
    let d = ds.dim();
    let mut all: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..d {
        all = all
            .into_iter()
            .flat_map(|p| {
                (-1..=1).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    all.retain(|v| v.iter().any(|&c| c != 0));
    let mut alive: BTreeSet<Vec<i64>> = all.into_iter().collect();
    loop {
        let dead: Vec<Vec<i64>> = alive
            .iter()
            .filter(|dl| !child_deltas(ds, dl).iter().any(|(_, _, c)| alive.contains(c)))
            .cloned()
            .collect();
        if dead.is_empty() {
            return alive;
        }
        for x in dead {
            alive.remove(&x);
        }
    }
}

/// Level-k edges from boxes that still touch `depth` levels further down.
pub fn box_oracle_edges(ds: &DigitSet, k: usize, depth: usize) -> BTreeSet<(Vec<u64>, Vec<u64>)> {
    let words = all_words(ds, k);
    let mut out = BTreeSet::new();
    for (i, a) in words.iter().enumerate() {
        for b in &words[i + 1..] {
            if carpetlab::geometry::boxes_intersect_at_depth(ds, a, b, depth).unwrap() {
                let (pa, pb) = (pi(ds, a).unwrap().0, pi(ds, b).unwrap().0);
                out.insert(if pa < pb { (pa, pb) } else { (pb, pa) });
            }
        }
    }
    out
}

pub fn all_words(ds: &DigitSet, k: usize) -> Vec<Word> {
    let mut words = vec![Word::empty()];
    for _ in 0..k {
        words = words
            .into_iter()
            .flat_map(|w| (0..ds.len()).map(move |u| w.extended(u)))
            .collect();
    }
    words
}

/// Geometric singleton test: follows all descendant pairs with a live
/// delta for `depth` levels and reports whether the cells on the `w` side
/// stay inside a 2 x 2 block. Returns those cells when they do.
pub fn geometric_singleton(ds: &DigitSet, w: &Word, w2: &Word, depth: usize) -> Option<Vec<Word>> {
    let live = live_deltas(ds);
    let delta: Vec<i64> = pi(ds, w)
        .unwrap()
        .0
        .iter()
        .zip(&pi(ds, w2).unwrap().0)
        .map(|(&a, &b)| a as i64 - b as i64)
        .collect();
    if !live.contains(&delta) {
        return None;
    }
    let mut frontier: Vec<(Word, Vec<i64>)> = vec![(w.clone(), delta)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for (c, dl) in &frontier {
            for (u, _, child) in child_deltas(ds, dl) {
                if live.contains(&child) {
                    next.push((c.extended(u), child));
                }
            }
        }
        let cells: BTreeSet<Vec<u64>> = next.iter().map(|(c, _)| pi(ds, c).unwrap().0).collect();
        for axis in 0..ds.dim() {
            let lo = cells.iter().map(|c| c[axis]).min().unwrap();
            let hi = cells.iter().map(|c| c[axis]).max().unwrap();
            if hi - lo > 1 {
                return None;
            }
        }
        frontier = next;
    }
    let set: BTreeSet<Word> = frontier.into_iter().map(|(c, _)| c).collect();
    Some(set.into_iter().collect())
}

/// Whether `x` lies in `psi_c(K)`, by keeping every descendant of `c`
/// whose closed box contains `x` for `depth` levels.
pub fn contains_by_descent(ds: &DigitSet, c: &Word, x: &ExactPoint, depth: usize) -> bool {
    let mut frontier = vec![c.clone()];
    if !box_contains(&cell_box(ds, c), x) {
        return false;
    }
    for _ in 0..depth {
        frontier = frontier
            .iter()
            .flat_map(|w| (0..ds.len()).map(move |u| w.extended(u)))
            .filter(|w| box_contains(&cell_box(ds, w), x))
            .collect();
        if frontier.is_empty() {
            return false;
        }
    }
    true
}

/// `chi` by deleting each vertex and counting components.
pub fn naive_chi(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let adj = {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    };
    let sizes_without = |skip: Option<usize>| {
        let mut seen = vec![false; n];
        let mut sizes = Vec::new();
        for s in 0..n {
            if seen[s] || Some(s) == skip {
                continue;
            }
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            let mut count = 0;
            while let Some(v) = q.pop_front() {
                count += 1;
                for &u in &adj[v] {
                    if !seen[u] && Some(u) != skip {
                        seen[u] = true;
                        q.push_back(u);
                    }
                }
            }
            sizes.push(count);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    };
    if sizes_without(None).len() != 1 {
        return None;
    }
    Some(
        (0..n)
            .map(|v| sizes_without(Some(v)))
            .filter(|s| s.len() >= 2)
            .map(|s| s[1])
            .max()
            .unwrap_or(0),
    )
}

/// Components of the level-1 graph after deleting the given edges.
pub fn components_after(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    (0..n).filter(|&x| find(&mut parent, x) == x).count()
}
