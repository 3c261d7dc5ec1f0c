//! Exhaustive enumeration and classification of planar digit sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjacency::{build_hata_with, Adjacency};
use crate::classify::{CutVerdict, Options, Pipeline};
use crate::error::{Error, Result};
use crate::metrics::connected;
use crate::model::{symmetry_orbit, Digit, DigitSet};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest grid side enumerated exhaustively unless overridden.
pub const DEFAULT_MAX_N: u32 = 4;

fn digits_of_mask(n: u32, mask: u64) -> Vec<Digit> {
    (0..n * n)
        .filter(|b| mask >> b & 1 == 1)
        .map(|b| Digit(vec![b / n, b % n]))
        .collect()
}

/// All digit sets of the `n x n` grid with `1 < |D| < n^2`, optionally of
/// one size and one per symmetry orbit, sorted by digit list.
pub fn enumerate_digit_sets(n: u32, size: Option<usize>, symmetry_reduce: bool, max_n: u32) -> Result<Vec<DigitSet>> {
    if n < 2 {
        return Err(Error::invalid(format!("grid side must be at least 2, got {n}")));
    }
    if n > max_n {
        return Err(Error::invalid(format!(
            "exhaustive enumeration is limited to grids of side {max_n}, got {n}"
        )));
    }
    let cells = n * n;
    let mut out: Vec<DigitSet> = (0..1u64 << cells)
        .into_par_iter()
        .filter(|m| {
            let c = m.count_ones() as usize;
            c > 1 && c < cells as usize && size.is_none_or(|s| s == c)
        })
        .map(|m| DigitSet::gsc_digits(n, digits_of_mask(n, m)))
        .collect::<Result<Vec<_>>>()?;
    if symmetry_reduce {
        out = out
            .into_par_iter()
            .map(|ds| {
                let least = symmetry_orbit(&ds)?.into_iter().next().expect("orbit contains the set");
                Ok((least == ds).then_some(ds))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
    }
    out.par_sort_by(|a, b| a.digits().cmp(b.digits()));
    Ok(out)
}

/// One line of census output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub schema: u32,
    pub n: u32,
    pub digits: Vec<Vec<u32>>,
    pub size: usize,
    pub connected: bool,
    pub fragile: Option<bool>,
    pub cut: Option<String>,
    pub localcut: Option<String>,
    /// `chi(Gamma_k)` for `k = 2, 3, ...`.
    pub chi: Vec<usize>,
    pub ms: Option<u64>,
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub pipeline: Options,
    /// Highest level of the recorded chi ladder.
    pub chi_levels: usize,
    pub timings: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            pipeline: Options::default(),
            chi_levels: 3,
            timings: false,
        }
    }
}

/// Classifies one set and checks the cross-stage consistency properties.
pub fn census_record(ds: &DigitSet, opts: &CensusOptions) -> CensusRecord {
    let start = Instant::now();
    let mut rec = CensusRecord {
        schema: SCHEMA_VERSION,
        n: ds.spec().dims()[0],
        digits: ds.digits().iter().map(|d| d.0.clone()).collect(),
        size: ds.len(),
        connected: false,
        fragile: None,
        cut: None,
        localcut: None,
        chi: Vec::new(),
        ms: None,
        verdict: String::new(),
        violations: Vec::new(),
    };
    let mut pipe = Pipeline::new(ds, opts.pipeline.clone());
    if let Err(e) = fill_record(&mut pipe, opts, &mut rec) {
        rec.verdict = "error".into();
        rec.violations.push(e.to_string());
    }
    if opts.timings {
        rec.ms = Some(start.elapsed().as_millis() as u64);
    }
    rec
}

fn fill_record(pipe: &mut Pipeline, opts: &CensusOptions, rec: &mut CensusRecord) -> Result<()> {
    let report = pipe.classify()?;
    rec.connected = report.connected;
    rec.verdict = report.verdict.as_str().into();
    if !report.connected {
        return Ok(());
    }
    let frag = report.fragility.as_ref().map(|f| f.fragile);
    rec.fragile = frag;
    rec.cut = report.cut.as_ref().map(|c| c.tag().to_string());
    rec.localcut = report
        .local_cut
        .as_ref()
        .map(|l| if l.found() { "found" } else { "not_found" }.to_string());
    for k in 2..=opts.chi_levels.max(2) {
        match pipe.chi(k) {
            Ok(c) => rec.chi.push(c),
            Err(Error::ResourceExhausted { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let m = rec.size;
    let fragile = frag == Some(true);
    if fragile {
        for (i, &c) in rec.chi.iter().enumerate().take(2) {
            let k = i + 2;
            if c + 1 < m.pow(k as u32 - 1) {
                rec.violations.push(format!("fragile set with chi(Gamma_{k}) = {c} below |D|^{}-1", k - 1));
            }
        }
    } else if let Some(&c3) = rec.chi.get(1) {
        if c3 + 1 == m * m || c3 == m * m {
            rec.violations.push(format!("non-fragile set with chi(Gamma_3) = {c3}"));
        }
    }
    if !fragile && single_contact_cell(pipe)? {
        rec.violations.push("a level-1 cell meets the others through one level-3 cell, yet the set is not fragile".into());
    }
    if let Some(CutVerdict::HasCutPoints { .. }) = &report.cut {
        if !fragile && !opts.pipeline.assume_bounded {
            rec.violations.push("cut points reported without a fragility witness".into());
        }
    }
    Ok(())
}

/// Whether some level-1 cell has exactly one level-3 descendant touching
/// cells outside it.
fn single_contact_cell(pipe: &mut Pipeline) -> Result<bool> {
    let ds = pipe.digit_set().clone();
    let g3 = match pipe.graph(3) {
        Ok(g) => g,
        Err(Error::ResourceExhausted { .. }) => return Ok(false),
        Err(e) => return Err(e),
    };
    let mut touching: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); ds.len()];
    for &(a, b) in g3.edges() {
        let (wa, wb) = (g3.word(a as usize), g3.word(b as usize));
        if wa.0[0] != wb.0[0] {
            touching[wa.0[0]].insert(a as usize);
            touching[wb.0[0]].insert(b as usize);
        }
    }
    Ok(touching.iter().any(|t| t.len() == 1))
}

/// Classifies `sets` in parallel, returning records in input order.
pub fn census_records(sets: &[DigitSet], opts: &CensusOptions) -> Vec<CensusRecord> {
    sets.par_iter().map(|ds| census_record(ds, opts)).collect()
}

/// Classifies `sets` in chunks and writes one JSON line per record,
/// flushing after every chunk. Sets whose digit list is not greater than
/// `resume_after` are skipped.
pub fn census_run(
    sets: &[DigitSet],
    opts: &CensusOptions,
    resume_after: Option<&[Vec<u32>]>,
    out: &mut dyn Write,
) -> Result<usize> {
    let pending: Vec<&DigitSet> = sets
        .iter()
        .filter(|ds| match resume_after {
            None => true,
            Some(last) => {
                let key: Vec<Vec<u32>> = ds.digits().iter().map(|d| d.0.clone()).collect();
                key.as_slice() > last
            }
        })
        .collect();
    let mut written = 0;
    for chunk in pending.chunks(2048) {
        let recs: Vec<CensusRecord> = chunk.par_iter().map(|ds| census_record(ds, opts)).collect();
        for rec in &recs {
            serde_json::to_writer(&mut *out, rec)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        written += recs.len();
    }
    Ok(written)
}

/// Reads an existing census file, drops a trailing partial line, and
/// returns the digit list of the last complete record.
pub fn resume_point(path: &Path) -> Result<Option<Vec<Vec<u32>>>> {
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut good_len = 0u64;
    let mut last = None;
    {
        let mut reader = BufReader::new(&mut file);
        let mut line = String::new();
        loop {
            line.clear();
            let read = reader.read_line(&mut line)?;
            if read == 0 || !line.ends_with('\n') {
                break;
            }
            match serde_json::from_str::<CensusRecord>(line.trim_end()) {
                Ok(rec) => {
                    good_len += read as u64;
                    last = Some(rec.digits);
                }
                Err(_) => break,
            }
        }
    }
    file.set_len(good_len)?;
    file.seek(SeekFrom::End(0))?;
    Ok(last)
}

/// Outcome of the exhaustive connectedness scan behind the size-gap check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapReport {
    pub n: u32,
    pub sets: usize,
    /// Number of connected sets per size.
    pub connected_by_size: BTreeMap<usize, usize>,
    /// Connected sets with `n < |D| < 2n - 1`.
    pub gap_violations: Vec<Vec<Digit>>,
    /// Connected sets of size `n` that are not a row, column or diagonal.
    pub stray_lines: Vec<Vec<Digit>>,
    /// Rows, columns and diagonals that fail to be connected.
    pub disconnected_lines: Vec<Vec<Digit>>,
    /// Sizes in `{n} + [2n-1, n^2-1]` without a connected set.
    pub missing_sizes: Vec<usize>,
}

impl GapReport {
    pub fn holds(&self) -> bool {
        self.gap_violations.is_empty()
            && self.stray_lines.is_empty()
            && self.disconnected_lines.is_empty()
            && self.missing_sizes.is_empty()
    }
}

/// Rows, columns, the diagonal and the anti-diagonal of the `n x n` grid.
pub fn line_forms(n: u32) -> Vec<Vec<Digit>> {
    let mut out: Vec<Vec<Digit>> = Vec::new();
    for c in 0..n {
        out.push((0..n).map(|j| Digit(vec![c, j])).collect());
        out.push((0..n).map(|i| Digit(vec![i, c])).collect());
    }
    out.push((0..n).map(|i| Digit(vec![i, i])).collect());
    out.push((0..n).map(|i| Digit(vec![i, n - 1 - i])).collect());
    for l in &mut out {
        l.sort();
    }
    out.sort();
    out
}

pub fn verify_gap(n: u32, max_n: u32) -> Result<GapReport> {
    let sets = enumerate_digit_sets(n, None, false, max_n)?;
    let flags: Vec<bool> = sets
        .par_iter()
        .map(|ds| {
            let g = build_hata_with(ds, &Adjacency::new(ds), 1, false, u64::MAX)?;
            Ok(connected(&g))
        })
        .collect::<Result<Vec<_>>>()?;
    let lines: BTreeSet<Vec<Digit>> = line_forms(n).into_iter().collect();
    let nn = n as usize;
    let mut report = GapReport {
        n,
        sets: sets.len(),
        connected_by_size: BTreeMap::new(),
        gap_violations: Vec::new(),
        stray_lines: Vec::new(),
        disconnected_lines: Vec::new(),
        missing_sizes: Vec::new(),
    };
    for (ds, &c) in sets.iter().zip(&flags) {
        let size = ds.len();
        let digits = ds.digits().to_vec();
        if c {
            *report.connected_by_size.entry(size).or_default() += 1;
            if size > nn && size + 1 < 2 * nn {
                report.gap_violations.push(digits);
            } else if size == nn && !lines.contains(&digits) {
                report.stray_lines.push(digits);
            }
        } else if size == nn && lines.contains(&digits) {
            report.disconnected_lines.push(digits);
        }
    }
    let wanted = std::iter::once(nn).chain(2 * nn - 1..nn * nn);
    report.missing_sizes = wanted
        .filter(|s| !report.connected_by_size.contains_key(s))
        .collect();
    Ok(report)
}
