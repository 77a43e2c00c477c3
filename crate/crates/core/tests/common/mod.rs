#![allow(dead_code)]

use cantor_core::bratteli::OrderedBratteliDiagram;
use proptest::prelude::*;

pub fn odometer(k: usize) -> OrderedBratteliDiagram {
    OrderedBratteliDiagram::stationary_from_lists(vec![vec![0; k]], k).unwrap()
}

pub fn fibonacci() -> OrderedBratteliDiagram {
    OrderedBratteliDiagram::stationary_from_lists(vec![vec![0, 1], vec![0]], 1).unwrap()
}

pub fn examples() -> Vec<(&'static str, OrderedBratteliDiagram)> {
    vec![
        ("dyadic", odometer(2)),
        ("triadic", odometer(3)),
        ("quaternary", odometer(4)),
        ("fibonacci", fibonacci()),
    ]
}

/// Stationary diagrams on 2 or 3 vertices whose table is primitive.
pub fn primitive_stationary() -> impl Strategy<Value = OrderedBratteliDiagram> {
    (2usize..=3)
        .prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0..n, 1..=3), n))
        .prop_filter_map("not primitive", |lists| {
            let d = OrderedBratteliDiagram::stationary_from_lists(lists, 1).ok()?;
            let r = d.validate(20);
            (r.primitive.passed && r.primitive.exact).then_some(d)
        })
}
