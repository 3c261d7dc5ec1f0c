//! Prefractal grids `Q_n` as integer index sets, box-level intersection
//! tests, and rasterization. Everything here is exact integer arithmetic.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{pi, DeltaVector, DigitSet, Word};

/// Default cap on the number of cells of any level-n structure.
pub const DEFAULT_CELL_CAP: u64 = 1 << 26;

/// Packs per-axis indices of a level-n grid into one `u64`, axis 0 most
/// significant, so that numeric key order is lexicographic pi-vector order.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    extents: Vec<u64>,
    strides: Vec<u64>,
}

impl Lattice {
    pub(crate) fn new(dims: &[u32], level: usize) -> Result<Self> {
        let mut extents = Vec::with_capacity(dims.len());
        let mut total: u128 = 1;
        for &n in dims {
            let e = (n as u128).checked_pow(level as u32).filter(|&e| e <= u64::MAX as u128);
            let e = e.ok_or_else(|| Error::domain(format!("level {level} grid is too large")))?;
            total = total
                .checked_mul(e)
                .filter(|&t| t <= u64::MAX as u128)
                .ok_or_else(|| Error::domain(format!("level {level} grid is too large")))?;
            extents.push(e as u64);
        }
        let mut strides = vec![1u64; dims.len()];
        for axis in (0..dims.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * extents[axis + 1];
        }
        Ok(Lattice { extents, strides })
    }

    pub(crate) fn dim(&self) -> usize {
        self.extents.len()
    }

    pub(crate) fn extents(&self) -> &[u64] {
        &self.extents
    }

    pub(crate) fn pack(&self, coords: &[u64]) -> u64 {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub(crate) fn component(&self, key: u64, axis: usize) -> u64 {
        (key / self.strides[axis]) % self.extents[axis]
    }

    pub(crate) fn unpack(&self, key: u64) -> Vec<u64> {
        (0..self.dim()).map(|axis| self.component(key, axis)).collect()
    }

    /// `key + delta`, or `None` when the result leaves the grid.
    pub(crate) fn offset(&self, key: u64, delta: &[i64]) -> Option<u64> {
        let mut out = key;
        for (axis, &dv) in delta.iter().enumerate() {
            if dv == 0 {
                continue;
            }
            let c = self.component(key, axis) as i64 + dv;
            if c < 0 || c as u64 >= self.extents[axis] {
                return None;
            }
            out = (out as i64 + dv * self.strides[axis] as i64) as u64;
        }
        Some(out)
    }
}

/// Checks `|D|^n` against the cap.
pub(crate) fn check_cap(ds: &DigitSet, n: usize, cap: u64) -> Result<u64> {
    let needed = (ds.len() as u128)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::ResourceExhausted { needed, cap });
    }
    Ok(needed as u64)
}

/// Flat pi-vectors of all level-n words, `d` entries per word, in word-code
/// order (first digit most significant).
pub(crate) fn level_cells(ds: &DigitSet, n: usize) -> Vec<u64> {
    let d = ds.dim();
    let dims: Vec<u64> = ds.spec().dims().iter().map(|&n| n as u64).collect();
    let digits: Vec<Vec<u64>> = ds
        .digits()
        .iter()
        .map(|g| g.0.iter().map(|&c| c as u64).collect())
        .collect();
    let mut cells: Vec<u64> = digits.iter().flatten().copied().collect();
    for _ in 1..n {
        cells = cells
            .par_chunks(d)
            .flat_map_iter(|p| {
                let dims = &dims;
                digits.iter().flat_map(move |u| {
                    (0..d).map(move |axis| p[axis] * dims[axis] + u[axis])
                })
            })
            .collect();
    }
    cells
}

/// The occupied cells of the prefractal `Q_n`.
#[derive(Clone, Debug)]
pub struct LevelGrid {
    level: usize,
    lattice: Lattice,
    keys: Vec<u64>,
}

impl LevelGrid {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Grid side lengths `N_i^n`.
    pub fn extents(&self) -> &[u64] {
        self.lattice.extents()
    }

    pub fn contains(&self, coords: &[u64]) -> bool {
        if coords.len() != self.lattice.dim()
            || coords.iter().zip(self.extents()).any(|(c, e)| c >= e)
        {
            return false;
        }
        self.keys.binary_search(&self.lattice.pack(coords)).is_ok()
    }

    /// Occupied cells in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        self.keys.iter().map(|&k| self.lattice.unpack(k))
    }
}

/// Builds `Q_n` by expanding `P_{t+1} = N P_t + pi(D)`.
pub fn build_level_grid(ds: &DigitSet, n: usize, cap: u64) -> Result<LevelGrid> {
    if n == 0 {
        return Err(Error::domain("level must be at least 1"));
    }
    check_cap(ds, n, cap)?;
    let lattice = Lattice::new(ds.spec().dims(), n)?;
    let d = ds.dim();
    let mut keys: Vec<u64> = level_cells(ds, n)
        .par_chunks(d)
        .map(|p| lattice.pack(p))
        .collect();
    keys.par_sort_unstable();
    Ok(LevelGrid {
        level: n,
        lattice,
        keys,
    })
}

/// All nonzero vectors with entries in `{-1, 0, 1}`, in lexicographic order.
pub(crate) fn admissible_deltas(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                [-1i64, 0, 1].into_iter().map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().any(|&c| c != 0));
    out
}

/// Connectedness of the union of closed cells: cells touching at a face,
/// edge or corner are adjacent.
pub fn grid_connected(g: &LevelGrid) -> bool {
    if g.keys.is_empty() {
        return true;
    }
    let deltas = admissible_deltas(g.lattice.dim());
    let mut seen = vec![false; g.keys.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        let key = g.keys[i];
        for delta in &deltas {
            if let Some(nk) = g.lattice.offset(key, delta) {
                if let Ok(j) = g.keys.binary_search(&nk) {
                    if !seen[j] {
                        seen[j] = true;
                        count += 1;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    count == g.keys.len()
}

/// Connectedness of the attractor, decided on the prefractal `Q_{d+1}`.
pub fn connected_via_q(ds: &DigitSet, cap: u64) -> Result<bool> {
    Ok(grid_connected(&build_level_grid(ds, ds.dim() + 1, cap)?))
}

/// Whether some level-`|w| + depth` descendants of `w` and `w2` have
/// touching boxes. Tracks only the set of reachable index differences.
pub fn boxes_intersect_at_depth(ds: &DigitSet, w: &Word, w2: &Word, depth: usize) -> Result<bool> {
    if w.len() != w2.len() {
        return Err(Error::domain("words must have the same length"));
    }
    let d = ds.dim();
    let start = if w.is_empty() {
        DeltaVector(vec![0; d])
    } else {
        DeltaVector::between(&pi(ds, w)?, &pi(ds, w2)?)
    };
    if !start.is_admissible() {
        return Ok(false);
    }
    let dims = ds.spec().dims();
    let mut states = BTreeSet::from([start.0]);
    for _ in 0..depth {
        let mut next = BTreeSet::new();
        for delta in &states {
            for a in ds.digits() {
                for b in ds.digits() {
                    let child: Vec<i64> = (0..d)
                        .map(|i| dims[i] as i64 * delta[i] + a.0[i] as i64 - b.0[i] as i64)
                        .collect();
                    if child.iter().all(|c| c.abs() <= 1) {
                        next.insert(child);
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        states = next;
    }
    Ok(true)
}

/// A binary image; row 0 is the top of the unit square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<bool>,
}

impl Raster {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.pixels[row * self.width + col]
    }

    pub fn filled(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }
}

/// Rasterizes `Q_n` with one pixel per level-n cell.
pub fn render_raster(ds: &DigitSet, n: usize, cap: u64) -> Result<Raster> {
    if ds.dim() != 2 {
        return Err(Error::domain("rendering needs a planar digit set"));
    }
    let grid = build_level_grid(ds, n, cap)?;
    let width = grid.extents()[0] as usize;
    let height = grid.extents()[1] as usize;
    if (width as u128) * (height as u128) > cap as u128 {
        return Err(Error::ResourceExhausted {
            needed: width as u128 * height as u128,
            cap,
        });
    }
    let mut pixels = vec![false; width * height];
    for c in grid.cells() {
        let row = height - 1 - c[1] as usize;
        pixels[row * width + c[0] as usize] = true;
    }
    Ok(Raster {
        width,
        height,
        pixels,
    })
}
