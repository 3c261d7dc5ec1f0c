//! Grid specifications, digit sets, words and exact points.
//!
//! Orientation: axis 0 is horizontal (rightward), axis 1 vertical (upward),
//! and digit `(0,0)` is the bottom-left cell of the unit square.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub(crate) fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// One selected cell of the level-1 grid, as its per-axis indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digit(pub Vec<u32>);

impl Digit {
    pub fn new(coords: impl Into<Vec<u32>>) -> Self {
        Digit(coords.into())
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Digit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Dimension, per-axis subdivision counts and (optionally) per-axis
/// contraction ratios. Without explicit ratios every axis is uniform `1/N_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    dims: Vec<u32>,
    ratios: Option<Vec<Vec<Rational>>>,
}

impl GridSpec {
    pub fn uniform(dims: &[u32]) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid(format!(
                "dimension must be at least 2, got {}",
                dims.len()
            )));
        }
        if let Some(n) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!(
                "every subdivision count must be at least 2, got {n}"
            )));
        }
        Ok(GridSpec {
            dims: dims.to_vec(),
            ratios: None,
        })
    }

    /// The `N x N` planar grid of a generalized Sierpinski carpet.
    pub fn square(n: u32) -> Result<Self> {
        Self::uniform(&[n, n])
    }

    /// Grid with explicit rational contraction ratios, one row per axis.
    /// Rows equal to the uniform ratios are normalized away.
    pub fn with_ratios(dims: &[u32], ratios: Vec<Vec<Rational>>) -> Result<Self> {
        let mut spec = Self::uniform(dims)?;
        if ratios.len() != dims.len() {
            return Err(Error::invalid(format!(
                "expected {} ratio rows, got {}",
                dims.len(),
                ratios.len()
            )));
        }
        for (axis, (row, &n)) in ratios.iter().zip(dims).enumerate() {
            if row.len() != n as usize {
                return Err(Error::invalid(format!(
                    "ratio row {axis} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !p.is_positive()) {
                return Err(Error::invalid(format!(
                    "ratio row {axis} has non-positive entry {p}"
                )));
            }
            let sum: Rational = row.iter().cloned().sum();
            if !sum.is_one() {
                return Err(Error::invalid(format!(
                    "ratio row {axis} sums to {sum}, expected 1"
                )));
            }
        }
        let uniform = ratios
            .iter()
            .zip(dims)
            .all(|(row, &n)| row.iter().all(|p| *p == rat(1, n as i64)));
        if !uniform {
            spec.ratios = Some(ratios);
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn ratios(&self) -> Option<&[Vec<Rational>]> {
        self.ratios.as_deref()
    }

    pub fn is_uniform(&self) -> bool {
        self.ratios.is_none()
    }

    /// Planar, square and uniform: the classical fractal-square family.
    pub fn is_gsc(&self) -> bool {
        self.dims.len() == 2 && self.dims[0] == self.dims[1] && self.is_uniform()
    }

    pub fn cell_count(&self) -> u128 {
        self.dims.iter().map(|&n| n as u128).product()
    }

    /// The 1-d map `x -> p x + q` of digit value `j` on `axis`.
    pub fn axis_map(&self, axis: usize, j: u32) -> (Rational, Rational) {
        match &self.ratios {
            None => {
                let n = self.dims[axis] as i64;
                (rat(1, n), rat(j as i64, n))
            }
            Some(rows) => {
                let row = &rows[axis];
                let q: Rational = row[..j as usize].iter().cloned().sum();
                (row[j as usize].clone(), q)
            }
        }
    }
}

/// The selected digits of the grid; the whole input of a classification run.
///
/// Digits are kept sorted lexicographically, so a digit's position in
/// [`DigitSet::digits`] is a stable index used by [`Word`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitSet {
    spec: GridSpec,
    digits: Vec<Digit>,
    slots: Vec<u32>,
}

const NO_SLOT: u32 = u32::MAX;

impl DigitSet {
    pub fn new(spec: GridSpec, mut digits: Vec<Digit>) -> Result<Self> {
        let d = spec.dim();
        for digit in &digits {
            if digit.0.len() != d {
                return Err(Error::invalid(format!(
                    "digit {digit} has {} components, expected {d}",
                    digit.0.len()
                )));
            }
            for (axis, (&j, &n)) in digit.0.iter().zip(spec.dims()).enumerate() {
                if j >= n {
                    return Err(Error::invalid(format!(
                        "digit {digit}: component {axis} is {j}, must be below {n}"
                    )));
                }
            }
        }
        digits.sort();
        if let Some(w) = digits.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate digit {}", w[0])));
        }
        let total = spec.cell_count();
        if digits.len() < 2 || digits.len() as u128 >= total {
            return Err(Error::invalid(format!(
                "digit set must have more than 1 and fewer than {total} elements, got {}",
                digits.len()
            )));
        }
        let mut slots = vec![NO_SLOT; total as usize];
        for (i, digit) in digits.iter().enumerate() {
            slots[slot_of(spec.dims(), &digit.0)] = i as u32;
        }
        Ok(DigitSet {
            spec,
            digits,
            slots,
        })
    }

    /// Convenience constructor for a planar `N x N` digit set.
    pub fn gsc(n: u32, cells: &[(u32, u32)]) -> Result<Self> {
        let digits = cells.iter().map(|&(a, b)| Digit(vec![a, b])).collect();
        Self::new(GridSpec::square(n)?, digits)
    }

    pub(crate) fn gsc_digits(n: u32, digits: Vec<Digit>) -> Result<Self> {
        Self::new(GridSpec::square(n)?, digits)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    pub fn digit(&self, index: usize) -> &Digit {
        &self.digits[index]
    }

    pub fn index_of(&self, coords: &[u32]) -> Option<usize> {
        if coords.len() != self.dim() || coords.iter().zip(self.spec.dims()).any(|(&c, &n)| c >= n)
        {
            return None;
        }
        match self.slots[slot_of(self.spec.dims(), coords)] {
            NO_SLOT => None,
            i => Some(i as usize),
        }
    }

    pub fn contains(&self, coords: &[u32]) -> bool {
        self.index_of(coords).is_some()
    }

    /// `D - D`, all pairwise differences including zero.
    pub fn differences(&self) -> HashSet<Vec<i64>> {
        let mut out = HashSet::new();
        for a in &self.digits {
            for b in &self.digits {
                out.insert(a.0.iter().zip(&b.0).map(|(&x, &y)| x as i64 - y as i64).collect());
            }
        }
        out
    }

    /// Dash-joined digit tuples, e.g. `(2,1)-(0,2)`.
    pub fn spell(&self, word: &Word) -> String {
        word.0
            .iter()
            .map(|&i| self.digits[i].to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Index of a digit value in the per-axis coordinate lists (used for map lookups).
    pub(crate) fn coord(&self, index: usize, axis: usize) -> u32 {
        self.digits[index].0[axis]
    }
}

fn slot_of(dims: &[u32], coords: &[u32]) -> usize {
    coords
        .iter()
        .zip(dims)
        .fold(0usize, |acc, (&c, &n)| acc * n as usize + c as usize)
}

/// A finite word over a digit set, stored as digit indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from digit tuples, rejecting tuples outside the set.
    pub fn from_digits(ds: &DigitSet, digits: &[&[u32]]) -> Result<Self> {
        digits
            .iter()
            .map(|c| {
                ds.index_of(c)
                    .ok_or_else(|| Error::invalid(format!("{} is not a digit", Digit(c.to_vec()))))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n].to_vec())
    }

    pub fn extended(&self, digit: usize) -> Word {
        let mut v = self.0.clone();
        v.push(digit);
        Word(v)
    }
}

/// Per-axis integer index of a word's cell in the level-`|w|` grid.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PiVector(pub Vec<u64>);

/// Difference of two pi-vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeltaVector(pub Vec<i64>);

impl DeltaVector {
    pub fn between(a: &PiVector, b: &PiVector) -> Self {
        DeltaVector(a.0.iter().zip(&b.0).map(|(&x, &y)| x as i64 - y as i64).collect())
    }

    /// Every component in `{-1, 0, 1}`.
    pub fn is_admissible(&self) -> bool {
        self.0.iter().all(|c| c.abs() <= 1)
    }

    /// Sum of absolute components.
    pub fn norm(&self) -> usize {
        self.0.iter().map(|c| c.unsigned_abs() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> Self {
        DeltaVector(self.0.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for DeltaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Horner evaluation `pi_i(w u) = N_i pi_i(w) + pi_i(u)` on every axis.
pub fn pi(ds: &DigitSet, w: &Word) -> Result<PiVector> {
    if w.is_empty() {
        return Err(Error::domain("pi of the empty word is undefined"));
    }
    let dims = ds.spec().dims();
    let mut out = vec![0u64; dims.len()];
    for &u in w.indices() {
        for (axis, v) in out.iter_mut().enumerate() {
            *v = *v * dims[axis] as u64 + ds.coord(u, axis) as u64;
        }
    }
    Ok(PiVector(out))
}

/// A point of the unit cube with exact rational coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactPoint(pub Vec<Rational>);

impl ExactPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        ExactPoint(coords)
    }

    pub fn from_fractions(coords: &[(i64, i64)]) -> Self {
        ExactPoint(coords.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }
}

impl fmt::Display for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Serialize for ExactPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        parts.serialize(s)
    }
}

/// Eventually periodic symbolic address: the point reached by the maps of
/// `base`, then `preperiod`, then `period` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointAddress {
    base: Word,
    preperiod: Vec<usize>,
    period: Vec<usize>,
}

impl PointAddress {
    /// Builds and canonicalizes an address. The period must be non-empty.
    pub fn new(base: Word, preperiod: Vec<usize>, period: Vec<usize>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::domain("address period must be non-empty"));
        }
        Ok(PointAddress {
            base,
            preperiod,
            period,
        }
        .canonical())
    }

    pub fn base(&self) -> &Word {
        &self.base
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.preperiod
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Primitive period, then the shortest preperiod.
    pub fn canonical(mut self) -> Self {
        let len = self.period.len();
        if let Some(p) = (1..=len)
            .filter(|&p| len.is_multiple_of(p))
            .find(|&p| (p..len).all(|i| self.period[i] == self.period[i - p]))
        {
            self.period.truncate(p);
        }
        while let (Some(&a), Some(&b)) = (self.preperiod.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
        self
    }

    /// The `i`-th digit of the tail after the base word.
    pub fn tail_digit(&self, i: usize) -> usize {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    /// The same point addressed from a base word of length `level`.
    pub fn reroot(&self, level: usize) -> PointAddress {
        let n = self.base.len();
        if level <= n {
            let mut pre = self.base.0[level..].to_vec();
            pre.extend_from_slice(&self.preperiod);
            PointAddress {
                base: self.base.prefix(level),
                preperiod: pre,
                period: self.period.clone(),
            }
            .canonical()
        } else {
            let extra = level - n;
            let mut base = self.base.0.clone();
            base.extend((0..extra).map(|i| self.tail_digit(i)));
            let pre_len = self.preperiod.len();
            let (preperiod, period) = if extra <= pre_len {
                (self.preperiod[extra..].to_vec(), self.period.clone())
            } else {
                let mut p = self.period.clone();
                let len = p.len();
                p.rotate_left((extra - pre_len) % len);
                (Vec::new(), p)
            };
            PointAddress {
                base: Word(base),
                preperiod,
                period,
            }
            .canonical()
        }
    }
}

/// Applies `psi_w` to a point: the maps of the word, innermost last digit.
pub fn apply_word(ds: &DigitSet, word: &[usize], point: &ExactPoint) -> ExactPoint {
    let spec = ds.spec();
    let coords = point
        .0
        .iter()
        .enumerate()
        .map(|(axis, x)| {
            word.iter().rev().fold(x.clone(), |v, &u| {
                let (p, q) = spec.axis_map(axis, ds.coord(u, axis));
                p * v + q
            })
        })
        .collect();
    ExactPoint(coords)
}

/// Exact coordinates of the point an address denotes.
pub fn evaluate(ds: &DigitSet, addr: &PointAddress) -> ExactPoint {
    let spec = ds.spec();
    let fixed: Vec<Rational> = (0..ds.dim())
        .map(|axis| {
            // composite map of one period: x -> a x + b
            let (a, b) = addr.period.iter().rev().fold(
                (Rational::one(), Rational::zero()),
                |(a, b), &u| {
                    let (p, q) = spec.axis_map(axis, ds.coord(u, axis));
                    (&p * a, p * b + q)
                },
            );
            b / (Rational::one() - a)
        })
        .collect();
    let tail = apply_word(ds, &addr.preperiod, &ExactPoint(fixed));
    apply_word(ds, addr.base.indices(), &tail)
}

/// Closed box `psi_w([0,1]^d)` as per-axis `(lo, hi)` bounds.
pub fn cell_box(ds: &DigitSet, word: &Word) -> Vec<(Rational, Rational)> {
    let d = ds.dim();
    let lo = apply_word(ds, word.indices(), &ExactPoint(vec![Rational::zero(); d]));
    let hi = apply_word(ds, word.indices(), &ExactPoint(vec![Rational::one(); d]));
    lo.0.into_iter().zip(hi.0).collect()
}

pub fn box_contains(bounds: &[(Rational, Rational)], point: &ExactPoint) -> bool {
    bounds
        .iter()
        .zip(&point.0)
        .all(|((lo, hi), x)| lo <= x && x <= hi)
}

/// One of the eight symmetries of the square grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Identity,
    FlipX,
    FlipY,
    Rotate180,
    Transpose,
    Rotate90,
    Rotate270,
    AntiTranspose,
}

impl Symmetry {
    pub const ALL: [Symmetry; 8] = [
        Symmetry::Identity,
        Symmetry::FlipX,
        Symmetry::FlipY,
        Symmetry::Rotate180,
        Symmetry::Transpose,
        Symmetry::Rotate90,
        Symmetry::Rotate270,
        Symmetry::AntiTranspose,
    ];

    /// Image of the cell `(x, y)` in an `n x n` grid.
    pub fn apply_cell(self, n: u32, (x, y): (u32, u32)) -> (u32, u32) {
        let m = n - 1;
        match self {
            Symmetry::Identity => (x, y),
            Symmetry::FlipX => (m - x, y),
            Symmetry::FlipY => (x, m - y),
            Symmetry::Rotate180 => (m - x, m - y),
            Symmetry::Transpose => (y, x),
            Symmetry::Rotate90 => (m - y, x),
            Symmetry::Rotate270 => (y, m - x),
            Symmetry::AntiTranspose => (m - y, m - x),
        }
    }

    /// Image of a point of the unit square.
    pub fn apply_point(self, p: &ExactPoint) -> ExactPoint {
        let one = Rational::one();
        let (x, y) = (p.0[0].clone(), p.0[1].clone());
        let (a, b) = match self {
            Symmetry::Identity => (x, y),
            Symmetry::FlipX => (&one - x, y),
            Symmetry::FlipY => (x, &one - y),
            Symmetry::Rotate180 => (&one - x, &one - y),
            Symmetry::Transpose => (y, x),
            Symmetry::Rotate90 => (&one - y, x),
            Symmetry::Rotate270 => (y, &one - x),
            Symmetry::AntiTranspose => (&one - y, &one - x),
        };
        ExactPoint(vec![a, b])
    }

    pub fn apply_set(self, ds: &DigitSet) -> Result<DigitSet> {
        if !ds.spec().is_gsc() {
            return Err(Error::domain(
                "grid symmetries need a square uniform planar grid",
            ));
        }
        let n = ds.spec().dims()[0];
        let digits = ds
            .digits()
            .iter()
            .map(|dg| {
                let (a, b) = self.apply_cell(n, (dg.0[0], dg.0[1]));
                Digit(vec![a, b])
            })
            .collect();
        DigitSet::new(ds.spec().clone(), digits)
    }
}

/// Distinct images of `ds` under the dihedral group of the square, sorted.
pub fn symmetry_orbit(ds: &DigitSet) -> Result<Vec<DigitSet>> {
    let mut out = Symmetry::ALL
        .iter()
        .map(|s| s.apply_set(ds))
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| a.digits().cmp(b.digits()));
    out.dedup();
    Ok(out)
}
