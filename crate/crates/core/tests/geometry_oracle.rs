use proptest::prelude::*;
use rqbc::geometry::{
    causal_relation, earliest_joint_reception, earliest_joint_reception_between, interval_squared,
    validate_layout,
};
use rqbc::harness::{deliver, Worldline};
use rqbc::{CausalRelation, ProtocolLayout, SpacetimePoint};

/// Boost along x with velocity `v`.
fn boost(p: &SpacetimePoint, v: f64) -> SpacetimePoint {
    let g = 1.0 / (1.0 - v * v).sqrt();
    SpacetimePoint::new(g * (p.x - v * p.t), p.y, p.z, g * (p.t - v * p.x))
}

/// Grid minimisation of the later of the two light-speed arrivals over the segment.
fn grid_earliest(p: &SpacetimePoint, q: &SpacetimePoint, steps: usize) -> (f64, f64) {
    let len = p.spatial_distance(q);
    (0..=steps)
        .map(|k| {
            let u = len * k as f64 / steps as f64;
            ((p.t + u).max(q.t + len - u), u)
        })
        .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
}

fn point() -> impl Strategy<Value = SpacetimePoint> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(x, y, z, t)| SpacetimePoint::new(x, y, z, t))
}

proptest! {
    #[test]
    fn causal_class_is_boost_invariant(p in point(), q in point(), v in -0.95..0.95f64) {
        prop_assume!(interval_squared(&p, &q).abs() > 1e-3);
        let before = causal_relation(&p, &q);
        let after = causal_relation(&boost(&p, v), &boost(&q, v));
        prop_assert_eq!(before, after);
    }

    #[test]
    fn relation_reverses_with_arguments(p in point(), q in point()) {
        prop_assert_eq!(causal_relation(&p, &q).inverse(), causal_relation(&q, &p));
    }

    #[test]
    fn interval_is_boost_invariant(p in point(), q in point(), v in -0.9..0.9f64) {
        let a = interval_squared(&p, &q);
        let b = interval_squared(&boost(&p, v), &boost(&q, v));
        prop_assert!((a - b).abs() < 1e-8 * (1.0 + a.abs()));
    }

    #[test]
    fn joint_reception_minimises_the_later_arrival(p in point(), q in point()) {
        let got = earliest_joint_reception_between(&p, &q);
        let (t, _) = grid_earliest(&p, &q, 20_000);
        let len = p.spatial_distance(&q);
        prop_assert!(got.t <= t + 1e-12);
        prop_assert!(got.t >= t - len / 20_000.0 - 1e-12);
        // the point hears both emissions
        prop_assert!(causal_relation(&p, &got).is_reachable());
        prop_assert!(causal_relation(&q, &got).is_reachable());
    }
}

#[test]
fn interval_examples() {
    let o = SpacetimePoint::origin();
    assert_eq!(interval_squared(&o, &o), 0.0);
    assert_eq!(
        interval_squared(&o, &SpacetimePoint::on_line(1.0, 1.0)),
        0.0
    );
    assert_eq!(
        interval_squared(&o, &SpacetimePoint::on_line(2.0, 1.0)),
        -3.0
    );
    assert_eq!(
        causal_relation(&o, &SpacetimePoint::on_line(3.0, 1.0)),
        CausalRelation::Spacelike
    );
    assert_eq!(
        causal_relation(&o, &SpacetimePoint::new(0.0, 0.0, 0.0, 2.0)),
        CausalRelation::TimelikeFuture
    );
    assert_eq!(causal_relation(&o, &o), CausalRelation::Coincident);
}

#[test]
fn unit_segment_example() {
    let p = SpacetimePoint::origin();
    let q = SpacetimePoint::on_line(1.0, 0.5);
    let got = earliest_joint_reception_between(&p, &q);
    let (t, u) = grid_earliest(&p, &q, 1_000_000);
    assert!(
        (got.t - t).abs() < 1e-6 && (got.x - u).abs() < 1e-5,
        "{got:?} vs ({u}, {t})"
    );
    assert!((got.t - 0.75).abs() < 1e-12 && (got.x - 0.75).abs() < 1e-12);
}

#[test]
fn lightlike_future_degenerates_to_q() {
    let p = SpacetimePoint::origin();
    let q = SpacetimePoint::on_line(1.0, 2.0);
    let got = earliest_joint_reception_between(&p, &q);
    assert_eq!((got.x, got.t), (q.x, q.t));
}

#[test]
fn symmetric_layout_mirrors() {
    let layout = ProtocolLayout::symmetric(1.0, 0.5);
    let a = earliest_joint_reception(&layout, 0).unwrap();
    let b = earliest_joint_reception(&layout, 1).unwrap();
    assert_eq!((a.x, a.t), (-b.x, b.t));
}

#[test]
fn layout_violations() {
    assert!(validate_layout(&ProtocolLayout::symmetric(1.0, 0.5)).is_ok());
    let mut l = ProtocolLayout::symmetric(1.0, 0.5);
    l.unveil_points[0] = l.commit_point;
    assert!(validate_layout(&l).is_err());
    let mut l = ProtocolLayout::symmetric(1.0, 0.5);
    l.unveil_points[0].t = -0.1;
    assert!(validate_layout(&l).is_err());
}

#[test]
fn broadcast_from_q_reaches_the_verifier_when_geometry_says() {
    let layout = ProtocolLayout::symmetric(1.0, 0.5);
    for i in 0..2 {
        let v = earliest_joint_reception(&layout, i).unwrap();
        let spot = Worldline::Static(v.at_time(-10.0));
        let from_q = deliver(&layout.unveil_points[i], &spot);
        let from_p = deliver(&layout.commit_point, &spot);
        assert!((from_q.t.max(from_p.t) - v.t).abs() < 1e-12);
    }
}

#[test]
fn static_delivery_example() {
    let at = deliver(
        &SpacetimePoint::origin(),
        &Worldline::Static(SpacetimePoint::on_line(1.0, 0.0)),
    );
    assert_eq!(at.t, 1.0);
}
