//! The decision pipeline: connectedness, fragility, cut points, local cut
//! points and the final verdict, each with replayable evidence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::adjacency::{build_hata_with, Adjacency, EdgeLabel, HataGraph};
use crate::error::{Error, Result};
use crate::geometry::{connected_via_q, DEFAULT_CELL_CAP};
use crate::intersections::Intersections;
use crate::metrics::{chi, components, connected, AdjList};
use crate::model::{Digit, DigitSet, ExactPoint, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    /// Highest Hata-graph level examined by the cut-point ladder.
    pub kmax: usize,
    /// Cap on `|D|^k` for any level-k structure.
    pub cell_cap: u64,
    /// Report cut points when every ladder threshold through `kmax` is met.
    pub assume_bounded: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            kmax: 4,
            cell_cap: DEFAULT_CELL_CAP,
            assume_bounded: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragilityReport {
    pub fragile: bool,
    /// When fragile: the point whose labelled edges disconnect `Gamma_1`.
    pub point: Option<ExactPoint>,
    /// When fragile: the component of the smallest digit after deletion.
    pub first: Vec<Digit>,
    pub second: Vec<Digit>,
}

/// `chi(Gamma_k)` against the threshold it was compared with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderStep {
    pub k: usize,
    pub chi: usize,
    pub threshold: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutEvidence {
    Fragile { point: ExactPoint },
    /// Heuristic: every threshold up to `kmax` was reached.
    AssumedBound { ladder: Vec<LadderStep> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoCutRule {
    /// `chi(Gamma_2) < |D| - 1`.
    SecondLevel,
    /// `chi(Gamma_k)` below the bound every non-fragile carpet with cut
    /// points must reach.
    NonFragileBound,
}

impl NoCutRule {
    pub fn as_str(self) -> &'static str {
        match self {
            NoCutRule::SecondLevel => "second_level",
            NoCutRule::NonFragileBound => "non_fragile_bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CutVerdict {
    HasCutPoints { evidence: CutEvidence },
    NoCutPoints { level: usize, chi: usize, threshold: usize, rule: NoCutRule },
    /// Every threshold met through the last examined level. `truncated_at`
    /// is the first level that exceeded the cell cap, if any.
    Inconclusive { ladder: Vec<LadderStep>, truncated_at: Option<usize> },
}

impl CutVerdict {
    pub fn tag(&self) -> &'static str {
        match self {
            CutVerdict::HasCutPoints { .. } => "has_cut_points",
            CutVerdict::NoCutPoints { .. } => "no_cut_points",
            CutVerdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCutWitness {
    pub level: usize,
    pub point: ExactPoint,
    pub first: Vec<Word>,
    pub second: Vec<Word>,
    /// All level-n cells containing the point; the union of the two sides.
    pub omega: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCutReport {
    pub witness: Option<LocalCutWitness>,
    pub searched: Vec<usize>,
}

impl LocalCutReport {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Disconnected,
    HasCutPoints,
    HasLocalCutPointsOnly,
    Homeomorphic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Disconnected => "disconnected",
            Verdict::HasCutPoints => "has_cut_points",
            Verdict::HasLocalCutPointsOnly => "has_local_cut_points_only",
            Verdict::Homeomorphic => "homeomorphic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub connected: bool,
    /// `None` for disconnected or non-planar sets.
    pub fragility: Option<FragilityReport>,
    pub cut: Option<CutVerdict>,
    /// `None` when the search was not run.
    pub local_cut: Option<LocalCutReport>,
    pub verdict: Verdict,
}

/// Runs the stages for one digit set, caching Hata graphs and `chi` values.
pub struct Pipeline {
    ds: DigitSet,
    opts: Options,
    adj: Adjacency,
    inter: Option<Intersections>,
    graphs: BTreeMap<usize, HataGraph>,
    chis: BTreeMap<usize, usize>,
    connected: Option<bool>,
    fragility: Option<FragilityReport>,
}

impl Pipeline {
    pub fn new(ds: &DigitSet, opts: Options) -> Self {
        Pipeline {
            ds: ds.clone(),
            adj: Adjacency::new(ds),
            opts,
            inter: None,
            graphs: BTreeMap::new(),
            chis: BTreeMap::new(),
            connected: None,
            fragility: None,
        }
    }

    pub fn digit_set(&self) -> &DigitSet {
        &self.ds
    }

    pub fn options(&self) -> &Options {
        &self.opts
    }

    fn planar(&self) -> Result<()> {
        if self.ds.dim() != 2 {
            return Err(Error::domain("this stage needs a planar digit set"));
        }
        Ok(())
    }

    fn intersections(&mut self) -> Result<&Intersections> {
        if self.inter.is_none() {
            self.inter = Some(Intersections::with_adjacency(&self.ds, self.adj.clone())?);
        }
        Ok(self.inter.as_ref().unwrap())
    }

    /// `Gamma_k`, labelled when planar and `k <= 2`.
    pub fn graph(&mut self, k: usize) -> Result<&HataGraph> {
        if !self.graphs.contains_key(&k) {
            let label = self.ds.dim() == 2 && k <= 2;
            let g = build_hata_with(&self.ds, &self.adj, k, label, self.opts.cell_cap)?;
            self.graphs.insert(k, g);
        }
        Ok(&self.graphs[&k])
    }

    pub fn chi(&mut self, k: usize) -> Result<usize> {
        if let Some(&c) = self.chis.get(&k) {
            return Ok(c);
        }
        let c = chi(self.graph(k)?)?;
        self.chis.insert(k, c);
        Ok(c)
    }

    pub fn is_connected(&mut self) -> Result<bool> {
        if let Some(c) = self.connected {
            return Ok(c);
        }
        let c = connected(self.graph(1)?);
        if cfg!(debug_assertions) {
            let cells = (self.ds.len() as f64).powi(self.ds.dim() as i32 + 1);
            if cells <= 1e6 {
                debug_assert_eq!(c, connected_via_q(&self.ds, self.opts.cell_cap)?);
            }
        }
        self.connected = Some(c);
        Ok(c)
    }

    fn require_connected(&mut self) -> Result<()> {
        if !self.is_connected()? {
            return Err(Error::domain("the digit set is not connected"));
        }
        Ok(())
    }

    /// Deletes each singleton label in turn from the labelled `Gamma_1`.
    pub fn fragility(&mut self) -> Result<FragilityReport> {
        if let Some(f) = &self.fragility {
            return Ok(f.clone());
        }
        self.planar()?;
        self.require_connected()?;
        let ds = self.ds.clone();
        let g = self.graph(1)?;
        let labels = g.labels().expect("level-1 planar graphs are labelled");
        let points: BTreeSet<&ExactPoint> = labels
            .iter()
            .filter_map(|l| match l {
                EdgeLabel::Singleton(p) => Some(p),
                EdgeLabel::Unlabeled => None,
            })
            .collect();
        let mut report = FragilityReport {
            fragile: false,
            point: None,
            first: Vec::new(),
            second: Vec::new(),
        };
        for x in points {
            let kept = g
                .edges()
                .iter()
                .zip(labels)
                .filter(|(_, l)| !matches!(l, EdgeLabel::Singleton(p) if p == x))
                .map(|(&e, _)| e);
            let rest = AdjList::from_edges(g.vertex_count(), kept);
            let comp = components(&rest);
            if comp.iter().any(|&c| c != 0) {
                // vertex order is pi order, which equals digit order at level 1
                let (first, second): (Vec<usize>, Vec<usize>) = (0..g.vertex_count()).partition(|&v| comp[v] == 0);
                let digit = |v: usize| ds.digit(g.word(v).0[0]).clone();
                report = FragilityReport {
                    fragile: true,
                    point: Some(x.clone()),
                    first: first.into_iter().map(digit).collect(),
                    second: second.into_iter().map(digit).collect(),
                };
                break;
            }
        }
        self.fragility = Some(report.clone());
        Ok(report)
    }

    fn threshold(&self, k: usize) -> usize {
        let m = self.ds.len();
        if k == 2 {
            m
        } else {
            m.pow(k as u32 - 1) + m.pow(k as u32 - 3)
        }
    }

    pub fn cut_verdict(&mut self) -> Result<CutVerdict> {
        let frag = self.fragility()?;
        if let Some(point) = frag.point {
            return Ok(CutVerdict::HasCutPoints {
                evidence: CutEvidence::Fragile { point },
            });
        }
        let m = self.ds.len();
        let chi2 = self.chi(2)?;
        if chi2 < m - 1 {
            return Ok(CutVerdict::NoCutPoints {
                level: 2,
                chi: chi2,
                threshold: m - 1,
                rule: NoCutRule::SecondLevel,
            });
        }
        let mut ladder = Vec::new();
        let mut truncated_at = None;
        for k in 2..=self.opts.kmax.max(2) {
            let threshold = self.threshold(k);
            let c = match self.chi(k) {
                Ok(c) => c,
                Err(Error::ResourceExhausted { .. }) => {
                    truncated_at = Some(k);
                    break;
                }
                Err(e) => return Err(e),
            };
            if c < threshold {
                return Ok(CutVerdict::NoCutPoints {
                    level: k,
                    chi: c,
                    threshold,
                    rule: NoCutRule::NonFragileBound,
                });
            }
            ladder.push(LadderStep { k, chi: c, threshold });
        }
        if self.opts.assume_bounded && truncated_at.is_none() {
            return Ok(CutVerdict::HasCutPoints {
                evidence: CutEvidence::AssumedBound { ladder },
            });
        }
        Ok(CutVerdict::Inconclusive { ladder, truncated_at })
    }

    /// Every accepted local-cut decomposition at level `n`, ordered by point
    /// and then by partition.
    pub fn local_cut_witnesses(&mut self, n: usize) -> Result<Vec<LocalCutWitness>> {
        self.planar()?;
        self.require_connected()?;
        let fragile = self.fragility()?.fragile;
        self.intersections()?;
        self.graph(n)?;
        let g = &self.graphs[&n];
        let inter = self.inter.as_ref().unwrap();
        let labels = g.labels().expect("planar graphs up to level 2 are labelled");
        let mut points: BTreeMap<&ExactPoint, (u32, u32)> = BTreeMap::new();
        for (&e, l) in g.edges().iter().zip(labels) {
            if let EdgeLabel::Singleton(p) = l {
                points.entry(p).or_insert(e);
            }
        }
        let total = g.vertex_count();
        let mut out = Vec::new();
        for (x, (a, b)) in points {
            let (wa, wb) = (g.word(a as usize), g.word(b as usize));
            let wit = inter.singleton_witness(&wa, &wb)?;
            let om = inter.omega(&wit.address, n)?;
            if om.len() < 2 || om.len() > 4 || !om.contains(&wa) || !om.contains(&wb) {
                return Err(Error::Invariant(format!(
                    "cells containing {x} at level {n} are {} and miss a generating cell or exceed 4",
                    om.len()
                )));
            }
            let m = om.len();
            for mask in 0..(1u32 << (m - 1)) {
                let in_first = |i: usize| i == 0 || mask & (1 << (i - 1)) != 0;
                let first: Vec<Word> = (0..m).filter(|&i| in_first(i)).map(|i| om[i].clone()).collect();
                let second: Vec<Word> = (0..m).filter(|&i| !in_first(i)).map(|i| om[i].clone()).collect();
                if second.is_empty() {
                    continue;
                }
                let mut ok = true;
                'cross: for i in &first {
                    for j in &second {
                        if inter.singleton_point(i, j)?.as_ref() != Some(x) {
                            ok = false;
                            break 'cross;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                if m == 4 {
                    return Err(Error::Invariant(format!(
                        "a local cut decomposition at {x} uses four cells"
                    )));
                }
                if m == total && !fragile {
                    return Err(Error::Invariant(format!(
                        "all level-{n} cells split at {x} but the set is not fragile"
                    )));
                }
                out.push(LocalCutWitness {
                    level: n,
                    point: x.clone(),
                    first,
                    second,
                    omega: om.clone(),
                });
            }
        }
        Ok(out)
    }

    /// Searches levels 1 then 2; the first accepted decomposition wins.
    pub fn local_cut(&mut self) -> Result<LocalCutReport> {
        let mut searched = Vec::new();
        for n in 1..=2 {
            searched.push(n);
            if let Some(w) = self.local_cut_witnesses(n)?.into_iter().next() {
                return Ok(LocalCutReport {
                    witness: Some(w),
                    searched,
                });
            }
        }
        Ok(LocalCutReport {
            witness: None,
            searched,
        })
    }

    pub fn classify(&mut self) -> Result<ClassificationReport> {
        let is_connected = self.is_connected()?;
        if !is_connected {
            return Ok(ClassificationReport {
                connected: false,
                fragility: None,
                cut: None,
                local_cut: None,
                verdict: Verdict::Disconnected,
            });
        }
        if self.ds.dim() != 2 {
            return Ok(ClassificationReport {
                connected: true,
                fragility: None,
                cut: None,
                local_cut: None,
                verdict: Verdict::Inconclusive,
            });
        }
        let fragility = self.fragility()?;
        let cut = self.cut_verdict()?;
        let (local_cut, verdict) = match &cut {
            CutVerdict::HasCutPoints { .. } => (None, Verdict::HasCutPoints),
            CutVerdict::Inconclusive { .. } => (None, Verdict::Inconclusive),
            CutVerdict::NoCutPoints { .. } => {
                let lc = self.local_cut()?;
                let v = if lc.found() {
                    Verdict::HasLocalCutPointsOnly
                } else {
                    Verdict::Homeomorphic
                };
                (Some(lc), v)
            }
        };
        Ok(ClassificationReport {
            connected: true,
            fragility: Some(fragility),
            cut: Some(cut),
            local_cut,
            verdict,
        })
    }
}

pub fn is_connected(ds: &DigitSet) -> Result<bool> {
    Pipeline::new(ds, Options::default()).is_connected()
}

pub fn fragility(ds: &DigitSet) -> Result<FragilityReport> {
    Pipeline::new(ds, Options::default()).fragility()
}

pub fn cut_point_verdict(ds: &DigitSet, opts: Options) -> Result<CutVerdict> {
    Pipeline::new(ds, opts).cut_verdict()
}

pub fn local_cut_verdict(ds: &DigitSet) -> Result<LocalCutReport> {
    Pipeline::new(ds, Options::default()).local_cut()
}

pub fn classify(ds: &DigitSet, opts: Options) -> Result<ClassificationReport> {
    Pipeline::new(ds, opts).classify()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn carpet() -> DigitSet {
        let cells: Vec<(u32, u32)> = (0..3)
            .flat_map(|a| (0..3).map(move |b| (a, b)))
            .filter(|&c| c != (1, 1))
            .collect();
        DigitSet::gsc(3, &cells).unwrap()
    }

    fn gasket() -> DigitSet {
        DigitSet::gsc(2, &[(0, 0), (1, 0), (1, 1)]).unwrap()
    }

    fn segment() -> DigitSet {
        DigitSet::gsc(3, &[(0, 0), (0, 1), (0, 2)]).unwrap()
    }

    fn pt(c: &[(i64, i64)]) -> ExactPoint {
        ExactPoint::from_fractions(c)
    }

    #[test]
    fn connectedness_examples() {
        let e = DigitSet::gsc(3, &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 1)]).unwrap();
        assert!(!is_connected(&e).unwrap());
        assert!(is_connected(&carpet()).unwrap());
        // column 0 full, columns 1..3 on rows 0..1, plus (1,2)
        let mut cells: Vec<(u32, u32)> = (0..4).map(|j| (0, j)).collect();
        cells.extend((1..4).flat_map(|i| (0..2).map(move |j| (i, j))));
        cells.push((1, 2));
        let ds = DigitSet::gsc(4, &cells).unwrap();
        assert_eq!(ds.len(), 11);
        assert!(is_connected(&ds).unwrap());
    }

    #[test]
    fn fragility_examples() {
        let f = fragility(&segment()).unwrap();
        assert!(f.fragile);
        assert_eq!(f.point, Some(pt(&[(0, 1), (1, 3)])));
        assert_eq!(f.first, vec![Digit(vec![0, 0])]);
        assert_eq!(f.second, vec![Digit(vec![0, 1]), Digit(vec![0, 2])]);
        assert!(!fragility(&gasket()).unwrap().fragile);
        assert!(!fragility(&carpet()).unwrap().fragile);
        let e = DigitSet::gsc(3, &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 1)]).unwrap();
        assert!(fragility(&e).is_err());
    }

    #[test]
    fn cut_verdict_examples() {
        assert!(matches!(
            cut_point_verdict(&segment(), Options::default()).unwrap(),
            CutVerdict::HasCutPoints { evidence: CutEvidence::Fragile { .. } }
        ));
        assert_eq!(
            cut_point_verdict(&carpet(), Options::default()).unwrap(),
            CutVerdict::NoCutPoints { level: 2, chi: 0, threshold: 7, rule: NoCutRule::SecondLevel }
        );
        assert_eq!(
            cut_point_verdict(&gasket(), Options::default()).unwrap(),
            CutVerdict::NoCutPoints { level: 2, chi: 0, threshold: 2, rule: NoCutRule::SecondLevel }
        );
    }

    #[test]
    fn local_cut_examples() {
        let r = local_cut_verdict(&gasket()).unwrap();
        let w = r.witness.unwrap();
        assert_eq!((w.level, w.point.clone()), (1, pt(&[(1, 2), (0, 1)])));
        assert_eq!(w.first.len(), 1);
        assert_eq!(w.second.len(), 1);
        assert!(!local_cut_verdict(&carpet()).unwrap().found());
    }

    #[test]
    fn verdicts() {
        let e = DigitSet::gsc(3, &[(0, 0), (1, 0), (1, 1), (1, 2), (2, 1)]).unwrap();
        assert_eq!(classify(&e, Options::default()).unwrap().verdict, Verdict::Disconnected);
        assert_eq!(classify(&carpet(), Options::default()).unwrap().verdict, Verdict::Homeomorphic);
        assert_eq!(
            classify(&gasket(), Options::default()).unwrap().verdict,
            Verdict::HasLocalCutPointsOnly
        );
        assert_eq!(classify(&segment(), Options::default()).unwrap().verdict, Verdict::HasCutPoints);
    }
}
