use proptest::prelude::*;
use rqbc::bitmath::{
    binary_entropy, chsh_score_threshold, chsh_value_from_score, epsilon_bound, hamming_ball_bound,
    hamming_ball_volume, hamming_distance, max_accepted_mismatches, mismatch_threshold,
    rccbc_distance_accepts, xi_upper_limit,
};
use rqbc::harness::SeedNode;
use rqbc::protocols::{
    run_chsh_variant, AliceConduct, AliceDevices, ChshVariant, Decisions, ProtocolConfig,
    Transcript, Variant,
};
use rqbc::BitString;

fn bits(max: usize) -> impl Strategy<Value = BitString> {
    proptest::collection::vec(0u8..2, 0..max).prop_map(|v| BitString::from_bits(&v))
}

fn pair(max: usize) -> impl Strategy<Value = (BitString, BitString)> {
    (0..max).prop_flat_map(|n| {
        let v = proptest::collection::vec(0u8..2, n);
        (v.clone(), v).prop_map(|(a, b)| (BitString::from_bits(&a), BitString::from_bits(&b)))
    })
}

fn triple(max: usize) -> impl Strategy<Value = (BitString, BitString, BitString)> {
    (0..max).prop_flat_map(|n| {
        let v = proptest::collection::vec(0u8..2, n);
        (v.clone(), v.clone(), v).prop_map(|(a, b, c)| {
            (
                BitString::from_bits(&a),
                BitString::from_bits(&b),
                BitString::from_bits(&c),
            )
        })
    })
}

proptest! {
    #[test]
    fn xor_is_a_group((a, b, c) in triple(150)) {
        prop_assert_eq!(a.xor(&b).unwrap(), b.xor(&a).unwrap());
        prop_assert_eq!(a.xor(&b).unwrap().xor(&c).unwrap(), a.xor(&b.xor(&c).unwrap()).unwrap());
        prop_assert_eq!(a.xor(&a).unwrap(), BitString::zeros(a.len()));
    }

    #[test]
    fn distance_is_a_metric((a, b, c) in triple(150)) {
        let d = |x: &BitString, y: &BitString| hamming_distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), a.xor(&b).unwrap().weight());
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert_eq!(d(&a, &a.complement()), a.len());
    }

    #[test]
    fn and_distributes_over_xor((a, b, c) in triple(100)) {
        let lhs = a.and(&b.xor(&c).unwrap()).unwrap();
        let rhs = a.and(&b).unwrap().xor(&a.and(&c).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn text_and_mask_round_trip(a in bits(200)) {
        let text = a.to_string();
        prop_assert_eq!(text.parse::<BitString>().unwrap(), a.clone());
        prop_assert_eq!(text.len(), a.len());
        if a.len() <= 64 {
            prop_assert_eq!(BitString::from_mask(a.to_mask(), a.len()), a.clone());
        }
        prop_assert_eq!(a.complement().weight(), a.len() - a.weight());
    }

    #[test]
    fn mismatched_lengths_are_errors((a, _) in pair(40), extra in 1usize..5) {
        let b = BitString::zeros(a.len() + extra);
        prop_assert!(a.xor(&b).is_err());
        prop_assert!(hamming_distance(&a, &b).is_err());
    }

    #[test]
    fn entropy_is_symmetric_and_bounded(x in 0.0..=1.0f64) {
        let h: f64 = binary_entropy(x).unwrap();
        let g: f64 = binary_entropy(1.0 - x).unwrap();
        prop_assert!((h - g).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn ball_volume_grows_with_radius(n in 1usize..40, r in 0usize..20) {
        prop_assume!(r < n);
        prop_assert!(hamming_ball_volume(n, r + 1).unwrap() > hamming_ball_volume(n, r).unwrap());
    }

    #[test]
    fn bound_shrinks_with_n(n in 1usize..5000, xi in 0.001..0.1035f64) {
        let a = epsilon_bound(n, xi).unwrap().epsilon;
        let b = epsilon_bound(n + 1, xi).unwrap().epsilon;
        prop_assert!(b < a);
        prop_assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn thresholds_are_complementary(n in 1usize..100_000, xi in 0.0..0.1035f64) {
        let s: f64 = chsh_score_threshold(n, xi);
        let m: f64 = mismatch_threshold(n, xi);
        prop_assert!((s + m - n as f64).abs() < 1e-9 * n as f64);
        if let Some(r) = max_accepted_mismatches(n, xi) {
            prop_assert!((r as f64) < m && (r + 1) as f64 >= m);
        }
    }

    #[test]
    fn chsh_value_is_affine(n in 1usize..10_000, frac in 0.0..=1.0f64) {
        let score = frac * n as f64;
        let v: f64 = chsh_value_from_score(n, score).unwrap();
        prop_assert!((v - (8.0 * score / n as f64 - 4.0)).abs() < 1e-9);
    }

    #[test]
    fn distance_window_matches_its_definition(n in (1usize..200).prop_map(|k| 2 * k), d in 0usize..200, c in 0.05..2.0f64) {
        prop_assume!(d <= n / 2);
        let direct = (d as f64 - n as f64 / 4.0).abs() < c * (n as f64).powf(0.75);
        let margin = ((d as f64 - n as f64 / 4.0).abs() - c * (n as f64).powf(0.75)).abs();
        prop_assume!(margin > 1e-9);
        prop_assert_eq!(rccbc_distance_accepts(d, n, c), direct);
    }

    #[test]
    fn seed_tree_is_deterministic_and_label_sensitive(master: u64, a in "[a-z]{1,8}", b in "[a-z]{1,8}") {
        let x = SeedNode::scenario(master, &a);
        prop_assert_eq!(x, SeedNode::scenario(master, &a));
        if a != b {
            prop_assert_ne!(x.child(&a), x.child(&b));
            prop_assert_ne!(x, SeedNode::scenario(master, &b));
        }
        prop_assert_ne!(x.trial(0), x.trial(1));
    }

    #[test]
    fn transcripts_round_trip_through_text(seed: u64, variant in 0usize..3, b in 0u8..2) {
        let v = [ChshVariant::Chsh1, ChshVariant::Chsh2, ChshVariant::Chsh3][variant];
        let cfg = ProtocolConfig::new(Variant::Chsh(v), 12).with_seed(seed).with_delta(0.1);
        let mut devices = AliceDevices::default();
        let run = run_chsh_variant(&cfg, AliceConduct::Devices { decisions: Decisions::commit(b), devices: &mut devices }).unwrap();
        let text = run.transcript.render();
        let back = Transcript::parse(&text).unwrap();
        prop_assert_eq!(back.render(), text);
        prop_assert_eq!(back, run.transcript);
    }
}

#[test]
fn kernel_examples() {
    let h: f64 = binary_entropy(0.25).unwrap();
    assert!((h - 0.811_278_124_459_132_9).abs() < 1e-12);
    assert_eq!(binary_entropy(0.0f64).unwrap(), 0.0);
    assert_eq!(binary_entropy(0.5f64).unwrap(), 1.0);
    assert_eq!(hamming_ball_volume(4, 0).unwrap(), 1);
    assert_eq!(hamming_ball_volume(4, 1).unwrap(), 5);
    let b: f64 = hamming_ball_bound(4, 1).unwrap();
    assert!((b - 2f64.powf(4.0 * 0.811_278_124_459_132_9)).abs() < 1e-9 && b >= 5.0);
    let s: f64 = chsh_score_threshold(100, 0.05);
    assert!((s - 80.355_339_059_327_37).abs() < 1e-9);
    let limit: f64 = xi_upper_limit();
    assert!((limit - 0.103_553_390_593_273_7).abs() < 1e-12);
    let e = epsilon_bound(1000, 0.05f64).unwrap();
    assert!((e.radius_fraction - 0.392_893_218_813_452_4).abs() < 1e-9);
    assert!((e.entropy - 0.966_641_285_439_096_7).abs() < 1e-9);
    assert!((e.log2_epsilon() + 33.358_714_560_903_3).abs() < 1e-6);
    for (n, v) in [(8.0, 4.0), (4.0, 0.0)] {
        let got: f64 = chsh_value_from_score(8, n).unwrap();
        assert_eq!(got, v);
    }
}

#[test]
fn bitwise_examples() {
    let p = |s: &str| s.parse::<BitString>().unwrap();
    assert_eq!(hamming_distance(&p("1010"), &p("0101")).unwrap(), 4);
    assert_eq!(hamming_distance(&p("1100"), &p("1010")).unwrap(), 2);
    assert_eq!(p("1100").xor(&p("1010")).unwrap(), p("0110"));
    assert_eq!(p("1100").and(&p("1010")).unwrap(), p("1000"));
    assert_eq!(p("10").complement(), p("01"));
}

#[test]
fn distance_window_examples() {
    // N = 16, C = 1/4: |d − 4| < 2
    let accepted: Vec<usize> = (0..=8)
        .filter(|&d| rccbc_distance_accepts(d, 16, 0.25))
        .collect();
    assert_eq!(accepted, vec![3, 4, 5]);
}
