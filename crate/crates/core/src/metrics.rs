//! Connectivity, articulation points and the cut-vertex statistic `chi`.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Read-only adjacency view shared by the graph algorithms.
pub trait Graph {
    fn vertex_count(&self) -> usize;
    fn neighbors(&self, v: usize) -> &[u32];
}

/// A plain adjacency-list graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdjList {
    adj: Vec<Vec<u32>>,
}

impl AdjList {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (a, b) in edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        AdjList { adj }
    }
}

impl Graph for AdjList {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }
}

/// Component index of every vertex, components numbered in order of their
/// smallest vertex.
pub fn components<G: Graph + ?Sized>(g: &G) -> Vec<usize> {
    let n = g.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for &u in g.neighbors(v) {
                if comp[u as usize] == usize::MAX {
                    comp[u as usize] = next;
                    queue.push_back(u as usize);
                }
            }
        }
        next += 1;
    }
    comp
}

pub fn connected<G: Graph + ?Sized>(g: &G) -> bool {
    components(g).iter().all(|&c| c == 0)
}

/// A cut vertex with the sizes of the components of `G - v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutVertexRecord {
    pub vertex: usize,
    /// Component sizes, descending.
    pub sizes: Vec<usize>,
    /// `sizes[1]`.
    pub second: usize,
}

/// All cut vertices with their component sizes, by one iterative depth-first
/// search with low-link values.
pub fn articulation<G: Graph + ?Sized>(g: &G) -> Result<Vec<CutVertexRecord>> {
    let n = g.vertex_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut size = vec![1usize; n];
    let mut parent = vec![UNSEEN; n];
    let mut split: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut time = 0;
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    disc[0] = 0;
    low[0] = 0;
    time += 1;
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        let nbrs = g.neighbors(v);
        if *next < nbrs.len() {
            let u = nbrs[*next] as usize;
            *next += 1;
            if disc[u] == UNSEEN {
                disc[u] = time;
                low[u] = time;
                time += 1;
                parent[u] = v;
                stack.push((u, 0));
            } else if u != parent[v] {
                low[v] = low[v].min(disc[u]);
            }
        } else {
            stack.pop();
            let p = parent[v];
            if p != UNSEEN {
                size[p] += size[v];
                low[p] = low[p].min(low[v]);
                if low[v] >= disc[p] {
                    split[p].push(size[v]);
                }
            }
        }
    }
    if time != n {
        return Err(Error::domain("graph is not connected"));
    }
    let mut out = Vec::new();
    for (v, slot) in split.iter_mut().enumerate() {
        let mut sizes = std::mem::take(slot);
        if v == 0 {
            if sizes.len() < 2 {
                continue;
            }
        } else {
            if sizes.is_empty() {
                continue;
            }
            let rest = n - 1 - sizes.iter().sum::<usize>();
            sizes.push(rest);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        out.push(CutVertexRecord {
            vertex: v,
            second: sizes[1],
            sizes,
        });
    }
    Ok(out)
}

/// Largest second-component size over all cut vertices; 0 without any.
pub fn chi<G: Graph + ?Sized>(g: &G) -> Result<usize> {
    Ok(articulation(g)?.iter().map(|r| r.second).max().unwrap_or(0))
}
