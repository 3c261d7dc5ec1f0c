//! Singleton intersections of planar cells, exact intersection points, point
//! membership in cells, and the sets `Omega_n(x)` of cells containing a point.

use std::collections::{BTreeSet, HashMap};

use crate::adjacency::{delta_code, touching_child_pairs, Adjacency, ChildPair, level1_edge_rule_gsc};
use crate::error::{Error, Result};
use crate::geometry::admissible_deltas;
use crate::model::{
    apply_word, box_contains, cell_box, evaluate, pi, rat, DeltaVector, DigitSet, ExactPoint,
    PointAddress, Rational, Word,
};

/// The deterministic child chain followed from a singleton delta.
#[derive(Clone, Debug)]
struct Chain {
    steps: Vec<ChildPair>,
    cycle_start: usize,
    /// The intersection point in the coordinates of the first cell's box.
    local: ExactPoint,
}

/// Proof that two same-level cells meet in exactly one point.
#[derive(Clone, Debug)]
pub struct SingletonWitness {
    pub w: Word,
    pub w2: Word,
    /// Child pairs `(u_t, u2_t, delta_{t+1})`, each the unique touching pair.
    pub chain: Vec<ChildPair>,
    /// Index in `chain` where the periodic part starts.
    pub cycle_start: usize,
    pub address: PointAddress,
    pub address2: PointAddress,
    pub point: ExactPoint,
}

/// Per-delta singleton data for a planar digit set.
#[derive(Clone, Debug)]
pub struct Intersections {
    ds: DigitSet,
    adj: Adjacency,
    children: Vec<Option<Vec<ChildPair>>>,
    chains: Vec<Option<Chain>>,
}

impl Intersections {
    pub fn new(ds: &DigitSet) -> Result<Self> {
        Self::with_adjacency(ds, Adjacency::new(ds))
    }

    pub(crate) fn with_adjacency(ds: &DigitSet, adj: Adjacency) -> Result<Self> {
        if ds.dim() != 2 {
            return Err(Error::domain("singleton analysis needs a planar digit set"));
        }
        let size = 3usize.pow(ds.dim() as u32);
        let mut children = vec![None; size];
        for delta in admissible_deltas(ds.dim()) {
            let dv = DeltaVector(delta);
            if adj.intersects(&dv)? {
                children[delta_code(&dv.0)] = Some(touching_child_pairs(ds, &adj, &dv)?);
            }
        }
        let mut this = Intersections {
            ds: ds.clone(),
            adj,
            children,
            chains: vec![None; size],
        };
        for delta in admissible_deltas(ds.dim()) {
            let code = delta_code(&delta);
            if this.children[code].as_ref().is_some_and(|c| c.len() == 1) {
                this.chains[code] = Some(this.follow(DeltaVector(delta))?);
            }
        }
        Ok(this)
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adj
    }

    fn follow(&self, start: DeltaVector) -> Result<Chain> {
        let mut seen: Vec<DeltaVector> = Vec::new();
        let mut steps = Vec::new();
        let mut delta = start;
        let cycle_start = loop {
            if let Some(pos) = seen.iter().position(|s| *s == delta) {
                break pos;
            }
            let pairs = self.children[delta_code(&delta.0)].as_deref().unwrap_or(&[]);
            if pairs.len() != 1 {
                return Err(Error::Invariant(format!(
                    "singleton chain reached delta {delta} with {} touching child pairs",
                    pairs.len()
                )));
            }
            seen.push(delta);
            steps.push(pairs[0].clone());
            delta = pairs[0].delta.clone();
        };
        let us: Vec<usize> = steps.iter().map(|s| s.u).collect();
        let addr = PointAddress::new(Word::empty(), us[..cycle_start].to_vec(), us[cycle_start..].to_vec())?;
        let local = evaluate(&self.ds, &addr);
        Ok(Chain {
            steps,
            cycle_start,
            local,
        })
    }

    fn pairs(&self, delta: &DeltaVector) -> Result<&[ChildPair]> {
        if !self.adj.intersects(delta)? {
            return Err(Error::domain(format!("cells with delta {delta} do not intersect")));
        }
        Ok(self.children[delta_code(&delta.0)].as_deref().unwrap_or(&[]))
    }

    /// Whether cells with pi-difference `delta` meet in exactly one point.
    pub fn is_singleton(&self, delta: &DeltaVector) -> Result<bool> {
        Ok(self.pairs(delta)?.len() == 1)
    }

    /// The singleton point in the unit-square coordinates of the first cell,
    /// `None` when the intersection is larger.
    pub fn local_point(&self, delta: &DeltaVector) -> Result<Option<&ExactPoint>> {
        self.pairs(delta)?;
        Ok(self.chains[delta_code(&delta.0)].as_ref().map(|c| &c.local))
    }

    /// The intersection point of `w` and `w2` if it is a single point.
    pub fn singleton_point(&self, w: &Word, w2: &Word) -> Result<Option<ExactPoint>> {
        let delta = self.pair_delta(w, w2)?;
        Ok(self
            .local_point(&delta)?
            .map(|p| apply_word(&self.ds, w.indices(), p)))
    }

    fn pair_delta(&self, w: &Word, w2: &Word) -> Result<DeltaVector> {
        if w.len() != w2.len() {
            return Err(Error::domain("words must have the same length"));
        }
        if w == w2 {
            return Err(Error::domain("a cell intersected with itself is the whole cell"));
        }
        Ok(DeltaVector::between(&pi(&self.ds, w)?, &pi(&self.ds, w2)?))
    }

    pub fn singleton_witness(&self, w: &Word, w2: &Word) -> Result<SingletonWitness> {
        let delta = self.pair_delta(w, w2)?;
        if !self.is_singleton(&delta)? {
            return Err(Error::domain(format!(
                "{} and {} do not meet in a single point",
                self.ds.spell(w),
                self.ds.spell(w2)
            )));
        }
        let chain = self.chains[delta_code(&delta.0)]
            .as_ref()
            .expect("singleton deltas have chains");
        let split = |pick: fn(&ChildPair) -> usize, base: &Word| {
            let us: Vec<usize> = chain.steps.iter().map(pick).collect();
            PointAddress::new(
                base.clone(),
                us[..chain.cycle_start].to_vec(),
                us[chain.cycle_start..].to_vec(),
            )
        };
        let address = split(|c| c.u, w)?;
        let address2 = split(|c| c.u2, w2)?;
        let point = evaluate(&self.ds, &address);
        let other = evaluate(&self.ds, &address2);
        if point != other {
            return Err(Error::Invariant(format!(
                "singleton addresses disagree: {point} vs {other}"
            )));
        }
        Ok(SingletonWitness {
            w: w.clone(),
            w2: w2.clone(),
            chain: chain.steps.clone(),
            cycle_start: chain.cycle_start,
            address,
            address2,
            point,
        })
    }

    /// Whether the point `x` lies in the cell `c`. Searches for an infinite
    /// digit stream in `c` whose cells stay box-adjacent to the cells of `x`,
    /// as a cycle search in the finite product of deltas and stream positions.
    pub fn contains_point(&self, c: &Word, x: &PointAddress) -> Result<bool> {
        contains_point(&self.ds, c, x)
    }

    /// `Omega_n(x)`: the level-n cells containing `x`, sorted.
    pub fn omega(&self, x: &PointAddress, n: usize) -> Result<Vec<Word>> {
        omega(&self.ds, x, n)
    }
}

pub fn contains_point(ds: &DigitSet, c: &Word, x: &PointAddress) -> Result<bool> {
    if c.len() != x.base().len() {
        return Err(Error::domain(format!(
            "cell level {} differs from the address level {}",
            c.len(),
            x.base().len()
        )));
    }
    let d = ds.dim();
    let start = if c.is_empty() {
        vec![0i64; d]
    } else {
        DeltaVector::between(&pi(ds, c)?, &pi(ds, x.base())?).0
    };
    if start.iter().any(|v| v.abs() > 1) {
        return Ok(false);
    }
    let dims = ds.spec().dims();
    let pre = x.preperiod().len();
    let len = pre + x.period().len();
    let next_pos = |p: usize| if p + 1 < len { p + 1 } else { pre };
    let state = |delta: &[i64], pos: usize| delta_code(delta) * len + pos;

    // reachable product states and their successors
    let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut stack = vec![(start.clone(), 0usize)];
    succ.insert(state(&start, 0), Vec::new());
    while let Some((delta, pos)) = stack.pop() {
        let v = x.tail_digit(pos);
        let here = state(&delta, pos);
        let mut out = BTreeSet::new();
        for a in ds.digits() {
            let child: Vec<i64> = (0..d)
                .map(|i| dims[i] as i64 * delta[i] + a.0[i] as i64 - ds.digit(v).0[i] as i64)
                .collect();
            if child.iter().all(|c| c.abs() <= 1) {
                let np = next_pos(pos);
                let s = state(&child, np);
                if out.insert(s) && !succ.contains_key(&s) {
                    succ.insert(s, Vec::new());
                    stack.push((child, np));
                }
            }
        }
        succ.insert(here, out.into_iter().collect());
    }
    // prune states without successors until stable; survivors lie on or
    // lead to a cycle
    let mut alive: BTreeSet<usize> = succ.keys().copied().collect();
    loop {
        let dead: Vec<usize> = alive
            .iter()
            .copied()
            .filter(|s| !succ[s].iter().any(|t| alive.contains(t)))
            .collect();
        if dead.is_empty() {
            break;
        }
        for s in dead {
            alive.remove(&s);
        }
    }
    Ok(alive.contains(&state(&start, 0)))
}

/// Decodes a level-n pi-vector into a word, if every digit is selected.
pub(crate) fn word_of_pi(ds: &DigitSet, p: &[u64], n: usize) -> Option<Word> {
    let dims = ds.spec().dims();
    let mut rest = p.to_vec();
    let mut digits = vec![0usize; n];
    for slot in digits.iter_mut().rev() {
        let coords: Vec<u32> = rest
            .iter()
            .zip(dims)
            .map(|(&r, &m)| (r % m as u64) as u32)
            .collect();
        *slot = ds.index_of(&coords)?;
        for (r, &m) in rest.iter_mut().zip(dims) {
            *r /= m as u64;
        }
    }
    if rest.iter().any(|&r| r != 0) {
        return None;
    }
    Some(Word(digits))
}

pub fn omega(ds: &DigitSet, x: &PointAddress, n: usize) -> Result<Vec<Word>> {
    if n == 0 {
        return Err(Error::domain("omega needs a level of at least 1"));
    }
    let x = x.reroot(n);
    let point = evaluate(ds, &x);
    let base = pi(ds, x.base())?;
    let dims = ds.spec().dims();
    let mut out = Vec::new();
    let mut deltas = admissible_deltas(ds.dim());
    deltas.push(vec![0; ds.dim()]);
    for delta in deltas {
        let cand: Option<Vec<u64>> = base
            .0
            .iter()
            .zip(&delta)
            .zip(dims)
            .map(|((&b, &dv), &m)| {
                let c = b as i64 + dv;
                let extent = (m as u64).pow(n as u32);
                (c >= 0 && (c as u64) < extent).then_some(c as u64)
            })
            .collect();
        let Some(cand) = cand else { continue };
        let Some(word) = word_of_pi(ds, &cand, n) else { continue };
        if box_contains(&cell_box(ds, &word), &point) && contains_point(ds, &word, &x)? {
            out.push(word);
        }
    }
    out.sort();
    Ok(out)
}

/// The explicit case conditions for a level-1 pair of a square uniform
/// planar grid: the intersection point when `phi_i(F) & phi_j(F)` is a
/// single point, `None` otherwise.
pub fn level1_singleton_cases_gsc(ds: &DigitSet, i: &[u32], j: &[u32]) -> Result<Option<ExactPoint>> {
    if !level1_edge_rule_gsc(ds, i, j)? {
        return Err(Error::domain("the two cells do not intersect"));
    }
    let n = ds.spec().dims()[0];
    let cells: BTreeSet<(u32, u32)> = ds.digits().iter().map(|g| (g.0[0], g.0[1])).collect();
    let (i, j) = ((i[0], i[1]), (j[0], j[1]));
    let dx = i.0 as i64 - j.0 as i64;
    let dy = i.1 as i64 - j.1 as i64;
    let m = n - 1;
    let contains = |set: &BTreeSet<(u32, u32)>, a: u32, b: u32| set.contains(&(a, b));
    let corner_a = contains(&cells, 0, 0) && contains(&cells, m, m);
    let corner_b = contains(&cells, 0, m) && contains(&cells, m, 0);
    let map = |cell: (u32, u32), p: (Rational, Rational)| {
        let nn = rat(n as i64, 1);
        ExactPoint(vec![
            (rat(cell.0 as i64, 1) + p.0) / &nn,
            (rat(cell.1 as i64, 1) + p.1) / nn,
        ])
    };
    let zero = || rat(0, 1);
    Ok(match (dx, dy) {
        (1, 1) => corner_a.then(|| map(i, (zero(), zero()))),
        (-1, -1) => corner_a.then(|| map(j, (zero(), zero()))),
        (1, -1) => corner_b.then(|| map(i, (zero(), rat(1, 1)))),
        (-1, 1) => corner_b.then(|| map(j, (zero(), rat(1, 1)))),
        (1, 0) => horizontal(&cells, n).map(|p| map(i, p)),
        (-1, 0) => horizontal(&cells, n).map(|p| map(j, p)),
        (0, 1) | (0, -1) => {
            let t: BTreeSet<(u32, u32)> = cells.iter().map(|&(a, b)| (b, a)).collect();
            let upper = if dy == 1 { i } else { j };
            horizontal(&t, n).map(|(x, y)| map(upper, (y, x)))
        }
        _ => None,
    })
}

/// Local point on the left edge of the right cell of a horizontally
/// adjacent pair, when the contact is a single point.
fn horizontal(cells: &BTreeSet<(u32, u32)>, n: u32) -> Option<(Rational, Rational)> {
    let m = n - 1;
    let has = |a: i64, b: i64| a >= 0 && b >= 0 && cells.contains(&(a as u32, b as u32));
    let rows = 0..n as i64;
    let big_i: Vec<i64> = rows.clone().filter(|&a| has(0, a) && has(m as i64, a)).collect();
    let big_j: Vec<i64> = rows.clone().filter(|&a| has(0, a) && has(m as i64, a - 1)).collect();
    let big_j2: Vec<i64> = rows.filter(|&a| has(0, a) && has(m as i64, a + 1)).collect();
    let corner_a = has(0, 0) && has(m as i64, m as i64);
    let corner_b = has(0, m as i64) && has(m as i64, 0);
    let j_ok = big_j.is_empty() || !corner_a;
    let j2_ok = big_j2.is_empty() || !corner_b;
    if big_i.len() == 1 && j_ok && j2_ok {
        return Some((rat(0, 1), rat(big_i[0], m as i64)));
    }
    if big_i.is_empty() && big_j.len() == 1 && corner_a && j2_ok {
        return Some((rat(0, 1), rat(big_j[0], n as i64)));
    }
    if big_i.is_empty() && j_ok && big_j2.len() == 1 && corner_b {
        return Some((rat(0, 1), rat(big_j2[0] + 1, n as i64)));
    }
    None
}
