//! Paths, the Vershik map and the text format.

mod common;

use cantor_core::bratteli::{parse_diagram, serialize_diagram, system_digest, Predecessor, Successor};
use num_bigint::BigInt;
use proptest::prelude::*;

#[test]
fn dyadic_successor_is_binary_increment() {
    let d = common::odometer(2);
    for len in 1..=10usize {
        for x in 0u64..(1 << len) - 1 {
            let bits: Vec<usize> = (0..len).map(|i| ((x >> i) & 1) as usize).collect();
            let next: Vec<usize> = (0..len).map(|i| (((x + 1) >> i) & 1) as usize).collect();
            let p = d.path(0, &bits).unwrap();
            match d.vershik_successor(&p) {
                Successor::Next(q) => assert_eq!(q.edges(), &next[..]),
                Successor::MaxPath => panic!("{x} has a successor"),
            }
        }
        let top = d.path(0, &vec![1; len]).unwrap();
        assert_eq!(d.vershik_successor(&top), Successor::MaxPath);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn walking_a_tower_visits_every_floor_once(d in common::primitive_stationary(), m in 1usize..=4) {
        let heights = d.small_heights(m).unwrap();
        for (v, &h) in heights.iter().enumerate() {
            let mut p = d.min_path(v, m).unwrap();
            for k in 1..=h {
                prop_assert_eq!(d.floor_of(&p).unwrap(), BigInt::from(k));
                prop_assert_eq!(&d.path_of_floor(m, v, &BigInt::from(k)).unwrap(), &p);
                match d.vershik_successor(&p) {
                    Successor::Next(q) => {
                        prop_assert_eq!(d.vershik_predecessor(&q), Predecessor::Prev(p.clone()));
                        p = q;
                    }
                    Successor::MaxPath => {
                        prop_assert_eq!(k, h);
                        prop_assert_eq!(&p, &d.max_path(v, m).unwrap());
                    }
                }
            }
        }
        let total: u64 = heights.iter().sum();
        prop_assert_eq!(d.all_paths(m).unwrap().len() as u64, total);
    }

    #[test]
    fn text_format_round_trips(d in common::primitive_stationary()) {
        let text = serialize_diagram(&d);
        let back = parse_diagram(&text).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(serialize_diagram(&back), text);
        prop_assert_eq!(system_digest(&back), system_digest(&d));
    }

    #[test]
    fn telescoping_keeps_heights(d in common::primitive_stationary(), step in 1usize..=3) {
        let levels: Vec<usize> = (0..=4).map(|i| i * step).collect();
        let t = d.telescope(&levels).unwrap();
        for (i, &l) in levels.iter().enumerate() {
            prop_assert_eq!(t.heights(i).unwrap(), d.heights(l).unwrap());
        }
    }
}

#[test]
fn malformed_text_is_rejected() {
    for bad in [
        "",
        "{}",
        r#"{"format":"obd-v2","kind":"stationary","vertices":1,"root":[[0]],"tables":[[[0]]]}"#,
        r#"{"format":"obd-v1","kind":"stationary","vertices":1,"root":[[0]],"tables":[[[1]]]}"#,
        r#"{"format":"obd-v1","kind":"stationary","vertices":2,"root":[[0],[]],"tables":[[[0,1],[0]]]}"#,
    ] {
        assert!(parse_diagram(bad).is_err(), "{bad}");
    }
}
