//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed even when an earlier criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use carpetlab::adjacency::level1_edge_rule_gsc;
use carpetlab::census::{self, CensusOptions};
use carpetlab::classify::{CutVerdict, NoCutRule};
use carpetlab::geometry::{build_level_grid, connected_via_q, grid_connected};
use carpetlab::metrics::connected;
use carpetlab::model::{pi, DeltaVector, Digit, DigitSet, Word};
use carpetlab::{build_hata, Adjacency, Options, Pipeline, Verdict, DEFAULT_CELL_CAP};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Wall-clock limit for the small examples.
const FAST: Duration = Duration::from_secs(1);
/// Wall-clock limit for the N = 4 size-gap scan.
const GAP_N4: Duration = Duration::from_secs(600);
/// Random sets drawn for the oracle comparison.
const RANDOM_SETS: usize = 10_000;
/// Random sponges drawn per grid shape.
const SPONGES: usize = 200;
const SEED: u64 = 0x5eed_ca27;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    check(t <= limit, format!("took {t:.2?}, limit {limit:?}"))
}

fn q_connected(ds: &DigitSet, n: usize) -> bool {
    grid_connected(&build_level_grid(ds, n, DEFAULT_CELL_CAP).unwrap())
}

fn hooked_cross_disconnected() -> Outcome {
    let start = Instant::now();
    let ds = hooked_cross();
    check(q_connected(&ds, 2), "Q_2 should be connected")?;
    check(!q_connected(&ds, 3), "Q_3 should be disconnected")?;
    let r = carpetlab::classify(&ds, Options::default()).map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Disconnected, format!("verdict {}", r.verdict))?;
    timed(FAST, start)?;
    Ok("Q_2 connected, Q_3 disconnected, verdict disconnected".into())
}

fn standard_carpet() -> Outcome {
    let ds = carpet();
    let mut p = Pipeline::new(&ds, Options::default());
    let r = p.classify().map_err(|e| e.to_string())?;
    check(r.verdict == Verdict::Homeomorphic, format!("verdict {}", r.verdict))?;
    match r.cut {
        Some(CutVerdict::NoCutPoints { level: 2, chi: 0, threshold: 7, rule: NoCutRule::SecondLevel }) => {}
        other => return Err(format!("cut verdict {other:?}")),
    }
    let g = build_hata(&ds, 2, false, DEFAULT_CELL_CAP).unwrap();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    check(naive_chi(g.vertex_count(), &edges) == Some(0), "deletion oracle disagrees on chi(Gamma_2)")?;
    let lc = r.local_cut.ok_or("local cut search skipped")?;
    check(!lc.found() && lc.searched == [1, 2], format!("local cut report {lc:?}"))?;
    Ok("homeomorphic; chi(Gamma_2) = 0 < 7; no local cut at n = 1, 2".into())
}

fn gasket_local_cut() -> Outcome {
    let ds = gasket();
    let mut p = Pipeline::new(&ds, Options::default());
    let r = p.classify().map_err(|e| e.to_string())?;
    let f = r.fragility.as_ref().ok_or("no fragility report")?;
    check(!f.fragile, "gasket reported fragile")?;
    check(p.chi(2).unwrap() == 0, "chi(Gamma_2) != 0")?;
    let g = build_hata(&ds, 2, false, DEFAULT_CELL_CAP).unwrap();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    check(naive_chi(g.vertex_count(), &edges) == Some(0), "deletion oracle disagrees on chi(Gamma_2)")?;
    let w = r.local_cut.and_then(|l| l.witness).ok_or("no local cut point")?;
    let x = pt(&[(1, 2), (0, 1)]);
    check(w.point == x, format!("witness point {}", w.point))?;
    // the two cells meeting at x, found by box descent rather than the automaton
    let holders: Vec<Word> = all_words(&ds, w.level)
        .into_iter()
        .filter(|c| contains_by_descent(&ds, c, &x, 12))
        .collect();
    check(holders == w.omega, format!("omega {:?} vs descent {:?}", w.omega, holders))?;
    check(r.verdict == Verdict::HasLocalCutPointsOnly, format!("verdict {}", r.verdict))?;
    Ok(format!("non-fragile, chi(Gamma_2) = 0, local cut at {x}, verdict {}", r.verdict))
}

fn gap_scan() -> Outcome {
    let start = Instant::now();
    let r3 = census::verify_gap(3, 4).map_err(|e| e.to_string())?;
    check(r3.sets == 501, format!("N=3 scanned {} sets", r3.sets))?;
    check(r3.holds(), format!("N=3 gap fails: {r3:?}"))?;
    // cross-check the N = 3 connectivity counts against the prefractal Q_3
    let mut by_size = std::collections::BTreeMap::new();
    for ds in all_sets(3) {
        if connected_via_q(&ds, DEFAULT_CELL_CAP).unwrap() {
            *by_size.entry(ds.len()).or_insert(0usize) += 1;
        }
    }
    check(by_size == r3.connected_by_size, "N=3 counts disagree with Q_3")?;
    let r4 = census::verify_gap(4, 4).map_err(|e| e.to_string())?;
    // subsets of the 16 cells minus the empty set, singletons and the full grid
    let expected4 = (1usize << 16) - 1 - 16 - 1;
    check(r4.sets == expected4, format!("N=4 scanned {} sets, expected {expected4}", r4.sets))?;
    check(r4.holds(), format!("N=4 gap fails: {:?}", r4.gap_violations))?;
    timed(GAP_N4, start)?;
    Ok(format!(
        "N=3: 501 sets, N=4: 65518 sets, no connected set with N < |D| < 2N-1 ({:.1?})",
        start.elapsed()
    ))
}

/// Compares the four level-1 contact tests on every pair of digits.
fn level1_agreement(ds: &DigitSet) -> Result<(), String> {
    let adj = Adjacency::new(ds);
    let live = live_deltas(ds);
    let g = build_hata(ds, 1, false, DEFAULT_CELL_CAP).unwrap();
    let n = ds.len();
    for a in 0..n {
        for b in a + 1..n {
            let (da, db) = (ds.digit(a), ds.digit(b));
            let (wa, wb) = (Word(vec![a]), Word(vec![b]));
            let delta = DeltaVector::between(&pi(ds, &wa).unwrap(), &pi(ds, &wb).unwrap());
            let by_e = delta.is_admissible() && adj.intersects(&delta).unwrap();
            let by_rule = level1_edge_rule_gsc(ds, &da.0, &db.0).unwrap();
            let by_box = carpetlab::geometry::boxes_intersect_at_depth(ds, &wa, &wb, 2).unwrap();
            let by_live = live.contains(&delta.0);
            let in_graph = g.edge_index(a, b).is_some();
            if !(by_e == by_rule && by_rule == by_box && by_box == by_live && by_live == in_graph) {
                return Err(format!(
                    "{:?}: {da}-{db}: E {by_e}, rule {by_rule}, box {by_box}, live {by_live}, graph {in_graph}",
                    ds.digits()
                ));
            }
        }
    }
    Ok(())
}

fn oracle_equivalence() -> Outcome {
    let mut count = 0;
    for ds in all_sets(3) {
        level1_agreement(&ds)?;
        count += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..RANDOM_SETS {
        let n = rng.random_range(4..=5);
        let ds = random_set(&mut rng, &[n, n]);
        level1_agreement(&ds)?;
        count += 1;
    }
    Ok(format!("{count} sets: E-sets, contact rules, depth-2 boxes and live deltas agree"))
}

fn sponge_connectedness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let mut summary = Vec::new();
    for dims in [[2u32, 3, 2], [3, 3, 3]] {
        let mut conn = 0;
        for _ in 0..SPONGES {
            let ds = random_set(&mut rng, &dims);
            let by_graph = connected(&build_hata(&ds, 1, false, DEFAULT_CELL_CAP).unwrap());
            let by_q = connected_via_q(&ds, DEFAULT_CELL_CAP).map_err(|e| e.to_string())?;
            check(by_graph == by_q, format!("{:?}: Gamma_1 {by_graph}, Q_4 {by_q}", ds.digits()))?;
            conn += by_graph as usize;
        }
        summary.push(format!("{dims:?}: {SPONGES} sets, {conn} connected"));
    }
    Ok(format!("Gamma_1 matches Q_4; {}", summary.join("; ")))
}

fn segment_fragile() -> Outcome {
    let start = Instant::now();
    let ds = segment();
    let mut p = Pipeline::new(&ds, Options::default());
    let f = p.fragility().map_err(|e| e.to_string())?;
    check(f.fragile, "segment not fragile")?;
    check(f.first == [Digit(vec![0, 0])], format!("first side {:?}", f.first))?;
    check(f.second == [Digit(vec![0, 1]), Digit(vec![0, 2])], format!("second side {:?}", f.second))?;
    let x = pt(&[(0, 1), (1, 3)]);
    check(f.point.as_ref() == Some(&x), format!("point {:?}", f.point))?;
    let chi2 = p.chi(2).unwrap();
    check(chi2 == 4 && chi2 >= ds.len() - 1, format!("chi(Gamma_2) = {chi2}"))?;
    let g = build_hata(&ds, 2, false, DEFAULT_CELL_CAP).unwrap();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect();
    check(naive_chi(g.vertex_count(), &edges) == Some(4), "deletion oracle disagrees on chi(Gamma_2)")?;
    let r = p.classify().unwrap();
    check(r.verdict == Verdict::HasCutPoints, format!("verdict {}", r.verdict))?;
    timed(FAST, start)?;
    Ok(format!("fragile at {x}, partition {{(0,0)}} | rest, chi(Gamma_2) = 4"))
}

fn seven_cell_local_cut() -> Outcome {
    let ds = seven_cell();
    let mut p = Pipeline::new(&ds, Options::default());
    let r = p.classify().map_err(|e| e.to_string())?;
    check(r.connected, "not connected")?;
    check(!r.fragility.as_ref().unwrap().fragile, "reported fragile")?;
    check(r.verdict == Verdict::HasLocalCutPointsOnly, format!("verdict {}", r.verdict))?;
    let x = pt(&[(1, 3), (1, 3)]);
    let expected = vec![word(&ds, &[&[0, 0]]), word(&ds, &[&[1, 1]])];
    let ws = p.local_cut_witnesses(1).unwrap();
    let hit = ws.iter().find(|w| w.point == x).ok_or("(1/3,1/3) is not an accepted witness")?;
    check(hit.omega == expected, format!("omega {:?}", hit.omega))?;
    let holders: Vec<Word> = all_words(&ds, 1)
        .into_iter()
        .filter(|c| contains_by_descent(&ds, c, &x, 12))
        .collect();
    check(holders == expected, format!("descent oracle finds {holders:?}"))?;
    let reported = r.local_cut.unwrap().witness.unwrap().point;
    Ok(format!("local cut at {x} with Omega_1 = {{(0,0),(1,1)}}; first reported witness {reported}"))
}

fn census_determinism() -> Outcome {
    let sets = census::enumerate_digit_sets(3, None, false, 4).map_err(|e| e.to_string())?;
    let opts = CensusOptions::default();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let mut buf = Vec::new();
            census::census_run(&sets, &opts, None, &mut buf).unwrap();
            buf
        })
    };
    let (one, four) = (run(1), run(4));
    check(one == four, "outputs differ between 1 and 4 threads")?;
    let lines = one.iter().filter(|&&b| b == b'\n').count();
    check(lines == 501, format!("{lines} records"))?;
    Ok(format!("{lines} records, byte-identical with 1 and 4 threads"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("hooked cross is disconnected", hooked_cross_disconnected),
        ("standard carpet", standard_carpet),
        ("gasket", gasket_local_cut),
        ("size gap", gap_scan),
        ("oracle equivalence", oracle_equivalence),
        ("sponge connectedness", sponge_connectedness),
        ("fragile segment", segment_fragile),
        ("seven-cell carpet", seven_cell_local_cut),
        ("census determinism", census_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("PASS {}. {name}: {msg} [{t:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}. {name}: {msg} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
