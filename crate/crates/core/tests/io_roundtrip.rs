//! Touchstone round-trip properties over randomized records, a
//! mutation-based robustness sweep of the parser, and CSV re-read checks.

mod common;

use mpfilter::io::{
    parse_touchstone, reencode, write_sweep_csv, write_touchstone, TouchstoneFormat,
    TouchstoneRecord,
};
use mpfilter::network::SParams;
use mpfilter::sweep::SweepResult;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_sparams() -> impl Strategy<Value = SParams> {
    let c = || (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| Complex64::new(re, im));
    (c(), c(), c(), c()).prop_map(|(s11, s12, s21, s22)| SParams { s11, s12, s21, s22 })
}

fn arb_record() -> impl Strategy<Value = TouchstoneRecord> {
    (
        1usize..40,
        1e6f64..1e9,
        1e5f64..1e8,
        10.0f64..200.0,
        proptest::collection::vec("[ -~]{0,40}", 0..4),
    )
        .prop_flat_map(|(n, f0, df, z0, comment_bodies)| {
            proptest::collection::vec(arb_sparams(), n).prop_map(move |s| {
                let freqs: Vec<f64> = (0..s.len())
                    .map(|i| f0 + df * i as f64)
                    .collect();
                let comments = comment_bodies
                    .iter()
                    .map(|b| format!("!{b}"))
                    .collect();
                TouchstoneRecord::new(freqs, s, z0, TouchstoneFormat::Ri, comments).unwrap()
            })
        })
}

proptest! {
    #[test]
    fn prop_parse_write_identity(rec in arb_record()) {
        let text = write_touchstone(&rec);
        let back = parse_touchstone(&text).unwrap();
        prop_assert_eq!(back.len(), rec.len());
        prop_assert_eq!(back.comments(), rec.comments());
        prop_assert_eq!(back.z0(), rec.z0());
        for i in 0..rec.len() {
            prop_assert!((back.freqs_hz()[i] / rec.freqs_hz()[i] - 1.0).abs() < 1e-12);
            let (a, b) = (rec.s()[i], back.s()[i]);
            for (x, y) in [(a.s11, b.s11), (a.s21, b.s21), (a.s12, b.s12), (a.s22, b.s22)] {
                prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
            }
        }
    }

    #[test]
    fn prop_db_and_ma_reencodings_agree_with_ri(rec in arb_record()) {
        for format in [TouchstoneFormat::Ma, TouchstoneFormat::Db] {
            let text = reencode(&rec, format);
            let back = parse_touchstone(&text).unwrap();
            for i in 0..rec.len() {
                let (a, b) = (rec.s()[i], back.s()[i]);
                for (x, y) in [(a.s11, b.s11), (a.s21, b.s21), (a.s12, b.s12), (a.s22, b.s22)] {
                    // DB re-encoding loses exactness near zero magnitude; the
                    // reconstruction is still value-identical at 1e-12 scale.
                    prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
                }
            }
        }
    }
}

/// Deterministic mutation fuzzing: seeds are valid files, mutations inject
/// random byte edits, truncations, duplications, and junk lines. The parser
/// must either parse or reject with an error; it must never panic.
#[test]
fn mutated_corpus_never_crashes_the_parser() {
    let seeds = [
        "# GHz S RI R 50\n3.0 0 0 1 0 1 0 0 0\n",
        "! comment line\n# MHz S MA R 75\n100 0.5 10 0.1 -20 0.1 -20 0.9 3\n200 0.4 12 0.2 -21 0.2 -21 0.8 4\n",
        "# Hz S DB R 50\n1e9 -3 45 -20 90 -20 90 -1 0\n2e9 -4 46 -21 91 -21 91 -2 1\n",
        "#\n1.0 0 0 0.5 0 0.5 0 0 0\n",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0xf0cc);
    let mut parsed = 0usize;
    let mut rejected = 0usize;
    for round in 0..2000 {
        let seed = seeds[round % seeds.len()];
        let mut bytes = seed.as_bytes().to_vec();
        for _ in 0..rng.gen_range(1..8) {
            match rng.gen_range(0..5) {
                0 if !bytes.is_empty() => {
                    let i = rng.gen_range(0..bytes.len());
                    bytes[i] = rng.gen();
                }
                1 if !bytes.is_empty() => {
                    let i = rng.gen_range(0..bytes.len());
                    bytes.truncate(i);
                }
                2 => {
                    let i = rng.gen_range(0..=bytes.len());
                    let junk: Vec<u8> = (0..rng.gen_range(1..12)).map(|_| rng.gen()).collect();
                    bytes.splice(i..i, junk);
                }
                3 if bytes.len() > 4 => {
                    let i = rng.gen_range(0..bytes.len() / 2);
                    let j = rng.gen_range(i..bytes.len());
                    let chunk: Vec<u8> = bytes[i..j].to_vec();
                    bytes.extend_from_slice(&chunk);
                }
                _ => {
                    bytes.extend_from_slice(b"\n9 9 9\n");
                }
            }
        }
        let text = String::from_utf8_lossy(&bytes);
        match parse_touchstone(&text) {
            Ok(_) => parsed += 1,
            Err(_) => rejected += 1,
        }
    }
    assert_eq!(parsed + rejected, 2000);
    assert!(rejected > 0, "mutations should produce at least some rejects");
}

#[test]
fn sweep_csv_reread_matches_module_values() {
    // Simulated ladder sweep written to CSV and parsed back: the columns
    // reproduce the in-memory values through the shortest-round-trip float
    // format.
    let spec = common::fig4b_ladder(mpfilter::bvd::Quality::Finite(800.0));
    let grid = mpfilter::network::linear_grid(2.8e9, 3.5e9, 51).unwrap();
    let net = spec.build(&grid).unwrap();
    let s = net.s_params();
    let mut sweep = SweepResult::new(grid.clone());
    for (i, p) in s.iter().enumerate() {
        let p = p.unwrap();
        sweep.set_s11(i, p.s11);
        sweep.set_s21(i, p.s21);
        sweep.set_re_zext(i, mpfilter::network::re_zext_from_s11(p.s11, 50.0).unwrap());
    }
    let csv = write_sweep_csv(&sweep);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), mpfilter::io::SWEEP_CSV_HEADER);
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 9);
        let parse = |s: &str| s.parse::<f64>().unwrap();
        assert_eq!(parse(cells[0]), grid[i]);
        let p = s[i].unwrap();
        assert_eq!(parse(cells[1]), p.s11.re);
        assert_eq!(parse(cells[2]), p.s11.im);
        assert_eq!(parse(cells[3]), p.s21.re);
        assert_eq!(parse(cells[4]), p.s21.im);
        assert_eq!(parse(cells[5]), sweep.re_zext_ohm()[i].unwrap());
        assert_eq!(cells[6], "");
        assert_eq!(cells[7], "");
        assert_eq!(cells[8], "");
    }
}
