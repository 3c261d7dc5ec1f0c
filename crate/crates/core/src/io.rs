//! Text and JSON input, and DOT/JSON/PGM/PNG output.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::adjacency::{EdgeLabel, HataGraph};
use crate::classify::{ClassificationReport, CutEvidence, CutVerdict, FragilityReport, LocalCutReport};
use crate::error::{Error, Result};
use crate::geometry::Raster;
use crate::model::{Digit, DigitSet, ExactPoint, GridSpec, Rational, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Grid,
    Json,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(InputFormat::Grid),
            "json" => Ok(InputFormat::Json),
            _ => Err(Error::invalid(format!("unknown input format {s:?}"))),
        }
    }
}

/// Parses a digit set; without a hint, input starting with `{` is JSON.
pub fn parse(text: &str, format: Option<InputFormat>) -> Result<DigitSet> {
    let format = format.unwrap_or(if text.trim_start().starts_with('{') {
        InputFormat::Json
    } else {
        InputFormat::Grid
    });
    match format {
        InputFormat::Grid => parse_grid(text),
        InputFormat::Json => parse_json(text),
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Grid text: an optional `N <int>` header, then rows of `0`/`1` (or `.`/`#`),
/// top row first. Rows may also be separated by `/`.
pub fn parse_grid(text: &str) -> Result<DigitSet> {
    let mut header: Option<(usize, u32)> = None;
    // (line, column, row text)
    let mut rows: Vec<(usize, usize, &str)> = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let mut col = 0;
        for piece in line.split('/') {
            let lead = piece.len() - piece.trim_start().len();
            let trimmed = piece.trim();
            let start = col + lead + 1;
            col += piece.len() + 1;
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('N') {
                if header.is_some() || !rows.is_empty() {
                    return Err(parse_err(li + 1, start, "header must come before the rows"));
                }
                let n: u32 = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(li + 1, start, format!("bad header {trimmed:?}")))?;
                header = Some((li + 1, n));
                continue;
            }
            rows.push((li + 1, start, trimmed));
        }
    }
    let n = match header {
        Some((_, n)) => n as usize,
        None => rows.len(),
    };
    if n < 2 {
        let line = header.map_or(1, |h| h.0);
        return Err(parse_err(line, 1, format!("grid side must be at least 2, got {n}")));
    }
    if rows.len() != n {
        let (line, col) = rows.get(n).map_or((text.lines().count().max(1), 1), |r| (r.0, r.1));
        return Err(parse_err(line, col, format!("expected {n} rows, found {}", rows.len())));
    }
    let mut digits = Vec::new();
    for (r, &(line, col, row)) in rows.iter().enumerate() {
        let y = (n - 1 - r) as u32;
        let chars: Vec<char> = row.chars().collect();
        for (x, &ch) in chars.iter().enumerate() {
            match ch {
                '1' | '#' => digits.push(Digit(vec![x as u32, y])),
                '0' | '.' => {}
                _ => return Err(parse_err(line, col + x, format!("unexpected character {ch:?}"))),
            }
        }
        if chars.len() != n {
            return Err(parse_err(line, col, format!("row has {} cells, expected {n}", chars.len())));
        }
    }
    DigitSet::new(GridSpec::square(n as u32)?, digits)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpongeJson {
    dims: Vec<u32>,
    digits: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Vec<Vec<String>>>,
}

/// Parses `"num/den"` or an integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::invalid(format!("bad rational {s:?}"));
    let (num, den) = match s.trim().split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den == BigInt::from(0) {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

pub fn parse_json(text: &str) -> Result<DigitSet> {
    let doc: SpongeJson = serde_json::from_str(text)
        .map_err(|e| parse_err(e.line(), e.column(), e.to_string()))?;
    let spec = match doc.p {
        None => GridSpec::uniform(&doc.dims)?,
        Some(rows) => {
            let ratios = rows
                .iter()
                .map(|row| row.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            GridSpec::with_ratios(&doc.dims, ratios)?
        }
    };
    DigitSet::new(spec, doc.digits.into_iter().map(Digit).collect())
}

pub fn to_json(ds: &DigitSet) -> String {
    let doc = SpongeJson {
        dims: ds.spec().dims().to_vec(),
        digits: ds.digits().iter().map(|d| d.0.clone()).collect(),
        p: ds
            .spec()
            .ratios()
            .map(|rows| rows.iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect()),
    };
    serde_json::to_string(&doc).expect("plain data serializes")
}

/// Grid text with a header line, top row first.
pub fn to_grid_text(ds: &DigitSet) -> Result<String> {
    if !ds.spec().is_gsc() {
        return Err(Error::domain("grid text needs a square uniform planar grid"));
    }
    let n = ds.spec().dims()[0];
    let mut out = format!("N {n}\n");
    for y in (0..n).rev() {
        for x in 0..n {
            out.push(if ds.contains(&[x, y]) { '1' } else { '0' });
        }
        out.push('\n');
    }
    Ok(out)
}

fn point_label(p: &ExactPoint) -> String {
    format!("x={p}")
}

/// Graphviz DOT, vertices in pi order, singleton edges labelled `x=(..)`.
pub fn hata_dot(ds: &DigitSet, g: &HataGraph) -> String {
    let names: Vec<String> = (0..g.vertex_count()).map(|v| ds.spell(&g.word(v))).collect();
    let mut out = String::from("graph hata {\n");
    for name in &names {
        out.push_str(&format!("  \"{name}\";\n"));
    }
    for (i, &(a, b)) in g.edges().iter().enumerate() {
        let label = match g.labels().map(|l| &l[i]) {
            Some(EdgeLabel::Singleton(p)) => format!(" [label=\"{}\"]", point_label(p)),
            _ => String::new(),
        };
        out.push_str(&format!("  \"{}\" -- \"{}\"{label};\n", names[a as usize], names[b as usize]));
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct GraphEdgeJson {
    u: String,
    v: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<ExactPoint>,
}

#[derive(Serialize)]
struct GraphJson {
    level: usize,
    vertices: Vec<String>,
    edges: Vec<GraphEdgeJson>,
}

pub fn hata_json(ds: &DigitSet, g: &HataGraph) -> String {
    let vertices: Vec<String> = (0..g.vertex_count()).map(|v| ds.spell(&g.word(v))).collect();
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| GraphEdgeJson {
            u: vertices[a as usize].clone(),
            v: vertices[b as usize].clone(),
            point: match g.labels().map(|l| &l[i]) {
                Some(EdgeLabel::Singleton(p)) => Some(p.clone()),
                _ => None,
            },
        })
        .collect();
    let doc = GraphJson {
        level: g.level(),
        vertices,
        edges,
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

#[derive(Serialize)]
struct FragilityJson {
    fragile: bool,
    point: Option<ExactPoint>,
    first: Vec<Digit>,
    second: Vec<Digit>,
}

#[derive(Serialize)]
struct StepJson {
    k: usize,
    chi: usize,
    threshold: usize,
}

#[derive(Serialize)]
struct CutJson {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    evidence: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<ExactPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    ladder: Vec<StepJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truncated_at: Option<usize>,
}

#[derive(Serialize)]
struct LocalCutJson {
    found: bool,
    searched: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<ExactPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    first: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    second: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<Vec<String>>,
}

#[derive(Serialize)]
struct ReportJson {
    dims: Vec<u32>,
    digits: Vec<Digit>,
    connected: bool,
    fragility: Option<FragilityJson>,
    cut: Option<CutJson>,
    localcut: Option<LocalCutJson>,
    verdict: &'static str,
}

fn ladder_json(ladder: &[crate::classify::LadderStep]) -> Vec<StepJson> {
    ladder
        .iter()
        .map(|s| StepJson {
            k: s.k,
            chi: s.chi,
            threshold: s.threshold,
        })
        .collect()
}

fn cut_json(cut: &CutVerdict) -> CutJson {
    let mut out = CutJson {
        verdict: cut.tag(),
        evidence: None,
        point: None,
        level: None,
        chi: None,
        threshold: None,
        rule: None,
        ladder: Vec::new(),
        truncated_at: None,
    };
    match cut {
        CutVerdict::HasCutPoints { evidence: CutEvidence::Fragile { point } } => {
            out.evidence = Some("fragile");
            out.point = Some(point.clone());
        }
        CutVerdict::HasCutPoints { evidence: CutEvidence::AssumedBound { ladder } } => {
            out.evidence = Some("assumed_bound");
            out.ladder = ladder_json(ladder);
        }
        CutVerdict::NoCutPoints { level, chi, threshold, rule } => {
            out.level = Some(*level);
            out.chi = Some(*chi);
            out.threshold = Some(*threshold);
            out.rule = Some(rule.as_str());
        }
        CutVerdict::Inconclusive { ladder, truncated_at } => {
            out.ladder = ladder_json(ladder);
            out.truncated_at = *truncated_at;
        }
    }
    out
}

fn spell_all(ds: &DigitSet, words: &[Word]) -> Vec<String> {
    words.iter().map(|w| ds.spell(w)).collect()
}

fn fragility_json(f: &FragilityReport) -> FragilityJson {
    FragilityJson {
        fragile: f.fragile,
        point: f.point.clone(),
        first: f.first.clone(),
        second: f.second.clone(),
    }
}

fn local_cut_json(ds: &DigitSet, l: &LocalCutReport) -> LocalCutJson {
    let w = l.witness.as_ref();
    LocalCutJson {
        found: l.found(),
        searched: l.searched.clone(),
        level: w.map(|w| w.level),
        point: w.map(|w| w.point.clone()),
        first: w.map(|w| spell_all(ds, &w.first)),
        second: w.map(|w| spell_all(ds, &w.second)),
        omega: w.map(|w| spell_all(ds, &w.omega)),
    }
}

pub fn report_json(ds: &DigitSet, report: &ClassificationReport) -> String {
    let doc = ReportJson {
        dims: ds.spec().dims().to_vec(),
        digits: ds.digits().to_vec(),
        connected: report.connected,
        fragility: report.fragility.as_ref().map(fragility_json),
        cut: report.cut.as_ref().map(cut_json),
        localcut: report.local_cut.as_ref().map(|l| local_cut_json(ds, l)),
        verdict: report.verdict.as_str(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}

pub fn fragility_text(f: &FragilityReport) -> String {
    match &f.point {
        None => "fragile: no\n".to_string(),
        Some(p) => format!(
            "fragile: yes\npoint: {p}\nfirst: {}\nsecond: {}\n",
            join(&f.first),
            join(&f.second)
        ),
    }
}

fn join(digits: &[Digit]) -> String {
    digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn cut_text(cut: &CutVerdict) -> String {
    match cut {
        CutVerdict::HasCutPoints { evidence: CutEvidence::Fragile { point } } => {
            format!("cut points: yes (fragile at {point})\n")
        }
        CutVerdict::HasCutPoints { evidence: CutEvidence::AssumedBound { ladder } } => {
            format!("cut points: yes (assumed from bounds through k={})\n", ladder.last().map_or(0, |s| s.k))
        }
        CutVerdict::NoCutPoints { level, chi, threshold, .. } => {
            format!("cut points: no (chi(Gamma_{level}) = {chi} < {threshold})\n")
        }
        CutVerdict::Inconclusive { ladder, truncated_at } => {
            let steps: Vec<String> = ladder
                .iter()
                .map(|s| format!("chi(Gamma_{}) = {} >= {}", s.k, s.chi, s.threshold))
                .collect();
            let mut s = format!("cut points: inconclusive ({})\n", steps.join(", "));
            if let Some(k) = truncated_at {
                s.push_str(&format!("stopped at level {k}: cell cap reached\n"));
            }
            s
        }
    }
}

pub fn local_cut_text(ds: &DigitSet, l: &LocalCutReport) -> String {
    match &l.witness {
        None => {
            let levels: Vec<String> = l.searched.iter().map(|n| n.to_string()).collect();
            format!("local cut points: none at levels {}\n", levels.join(", "))
        }
        Some(w) => format!(
            "local cut point: {} at level {}\nfirst: {}\nsecond: {}\n",
            w.point,
            w.level,
            spell_all(ds, &w.first).join(" "),
            spell_all(ds, &w.second).join(" ")
        ),
    }
}

/// Human-readable summary of a classification.
pub fn report_text(ds: &DigitSet, report: &ClassificationReport) -> String {
    let mut out = format!("connected: {}\n", if report.connected { "yes" } else { "no" });
    if let Some(f) = &report.fragility {
        out.push_str(&fragility_text(f));
    }
    if let Some(c) = &report.cut {
        out.push_str(&cut_text(c));
    }
    if let Some(l) = &report.local_cut {
        out.push_str(&local_cut_text(ds, l));
    }
    out.push_str(&format!("verdict: {}\n", report.verdict));
    out
}

fn gray(r: &Raster) -> Vec<u8> {
    r.pixels.iter().map(|&p| if p { 0 } else { 255 }).collect()
}

/// Binary PGM (P5); filled cells are black.
pub fn write_pgm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.extend(gray(r));
    out
}

pub fn write_png(r: &Raster) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, r.width as u32, r.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        writer
            .write_image_data(&gray(r))
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    Ok(out)
}
