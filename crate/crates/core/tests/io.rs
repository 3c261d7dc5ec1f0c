mod common;

use carpetlab::geometry::render_raster;
use carpetlab::io::{
    hata_dot, hata_json, parse, parse_grid, parse_json, report_json, to_grid_text, to_json, write_pgm, write_png,
    InputFormat,
};
use carpetlab::{build_hata, classify, Error, Options, DEFAULT_CELL_CAP};
use common::*;
use proptest::prelude::*;

proptest! {
    #[test]
    fn grid_and_json_round_trip(n in 2u32..=5, mask in any::<u64>()) {
        let cells = n * n;
        let mask = mask & ((1u64 << cells) - 1);
        prop_assume!(mask.count_ones() > 1 && mask.count_ones() < cells);
        let ds = from_mask(n, mask);
        prop_assert_eq!(&parse_grid(&to_grid_text(&ds).unwrap()).unwrap(), &ds);
        prop_assert_eq!(&parse_json(&to_json(&ds)).unwrap(), &ds);
        prop_assert_eq!(&parse(&to_json(&ds), None).unwrap(), &ds);
        prop_assert_eq!(&parse(&to_grid_text(&ds).unwrap(), Some(InputFormat::Grid)).unwrap(), &ds);
    }
}

#[test]
fn grid_orientation_puts_the_first_row_on_top() {
    let ds = parse_grid("100\n000\n011\n").unwrap();
    assert!(ds.contains(&[0, 2]));
    assert!(ds.contains(&[1, 0]) && ds.contains(&[2, 0]));
    assert_eq!(parse_grid("#../.../.##").unwrap(), ds);
    assert_eq!(parse_grid("N 3\n100\n000\n011\n").unwrap(), ds);
}

#[test]
fn grid_errors_carry_positions() {
    match parse_grid("111\n1x1\n111\n") {
        Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 2)),
        other => panic!("{other:?}"),
    }
    match parse_grid("11\n1\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_grid("111\n111\n111\n"), Err(Error::InvalidInput(_))));
    assert!(matches!(parse_grid("100\n000\n000\n"), Err(Error::InvalidInput(_))));
}

#[test]
fn baranski_json_round_trips() {
    let text = r#"{"dims":[2,3],"digits":[[0,0],[1,1],[0,2]],"p":[["1/3","2/3"],["1/4","1/2","1/4"]]}"#;
    let ds = parse_json(text).unwrap();
    assert!(!ds.spec().is_uniform());
    assert_eq!(parse_json(&to_json(&ds)).unwrap(), ds);
    assert!(to_grid_text(&ds).is_err());
    assert!(parse_json(r#"{"dims":[2,2],"digits":[[0,0],[1,1]],"extra":1}"#).is_err());
    assert!(parse_json(r#"{"dims":[2,3],"digits":[[0,0],[1,1]],"p":[["1/2","1/3"],["1/3","1/3","1/3"]]}"#).is_err());
}

#[test]
fn segment_dot_export() {
    let ds = segment();
    let g = build_hata(&ds, 1, true, DEFAULT_CELL_CAP).unwrap();
    let dot = hata_dot(&ds, &g);
    assert!(dot.starts_with("graph hata {"));
    assert!(dot.contains("\"(0,0)\" -- \"(0,1)\" [label=\"x=(0,1/3)\"];"));
    assert!(dot.contains("\"(0,1)\" -- \"(0,2)\" [label=\"x=(0,2/3)\"];"));
    let json: serde_json::Value = serde_json::from_str(&hata_json(&ds, &g)).unwrap();
    assert_eq!(json["edges"].as_array().unwrap().len(), 2);
    assert_eq!(json["edges"][0]["point"], serde_json::json!(["0", "1/3"]));
}

#[test]
fn report_json_fields() {
    let ds = carpet();
    let r = classify(&ds, Options::default()).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report_json(&ds, &r)).unwrap();
    assert_eq!(v["verdict"], "homeomorphic");
    assert_eq!(v["connected"], true);
    assert_eq!(v["fragility"]["fragile"], false);
}

#[test]
fn carpet_renders_512_cells_at_level_3() {
    let r = render_raster(&carpet(), 3, DEFAULT_CELL_CAP).unwrap();
    assert_eq!((r.width, r.height), (27, 27));
    assert_eq!(r.filled(), 512);
    assert!(!r.get(13, 13));
    let pgm = write_pgm(&r);
    assert!(pgm.starts_with(b"P5\n27 27\n255\n"));
    assert_eq!(pgm.iter().rev().take(27 * 27).filter(|&&b| b == 0).count(), 512);
    assert!(write_png(&r).unwrap().starts_with(b"\x89PNG"));
}
