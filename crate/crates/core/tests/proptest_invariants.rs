use grassmimo::mimo::*;
use grassmimo::numfmt::sig12;
use grassmimo::special::*;
use grassmimo::volume::*;
use grassmimo::*;
use proptest::prelude::*;
use rand::RngCore;

fn metric() -> impl Strategy<Value = Metric> {
    prop_oneof![Just(Metric::ProjectiveF), Just(Metric::Projective2)]
}

/// `(k, n)` with `1 <= k < n <= 64`.
fn manifold() -> impl Strategy<Value = (u32, u32)> {
    (2u32..=64).prop_flat_map(|n| (1..n, Just(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn beta_symmetric(m in 1u32..80, n in 1u32..80) {
        prop_assert_eq!(beta(m, n).unwrap(), beta(n, m).unwrap());
    }

    #[test]
    fn reflection(m in 1u32..30, n in 1u32..30, a in 0.0f64..=1.0) {
        let lhs = beta_difference(a, m, n).unwrap();
        let rhs = incomplete_beta(1.0 - a, n, m).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * beta(m, n).unwrap());
    }

    #[test]
    fn regularized_monotone(m in 1u32..40, n in 1u32..40, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (
            regularized_incomplete_beta(lo, m, n).unwrap(),
            regularized_incomplete_beta(hi, m, n).unwrap(),
        );
        prop_assert!(x <= y && (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
    }

    #[test]
    fn volume_monotone((k, n) in manifold(), metric in metric(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (kd, _) = dualize(k, n).unwrap();
        let mut top = max_delta(k, n, metric).unwrap();
        if metric == Metric::ProjectiveF && kd >= 3 {
            top = 1.0;
        }
        let (lo, hi) = if a <= b { (a * top, b * top) } else { (b * top, a * top) };
        let x = volume(VolumeQuery::new(k, n, lo, metric)).unwrap();
        let y = volume(VolumeQuery::new(k, n, hi, metric)).unwrap();
        prop_assert!(x <= y, "k={} n={} {}: V({})={} > V({})={}", k, n, metric, lo, x, hi, y);
        prop_assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y));
    }

    #[test]
    fn volume_beyond_diameter_is_one((k, n) in manifold(), metric in metric(), extra in 0.0f64..10.0) {
        let top = max_delta(k, n, metric).unwrap();
        prop_assert_eq!(volume(VolumeQuery::new(k, n, top + extra, metric)).unwrap(), 1.0);
    }

    #[test]
    fn p2_never_exceeds_pf_ball((k, n) in manifold(), a in 0.0f64..=1.0) {
        // The p2 ball of radius δ contains the pF ball of radius δ.
        let (kd, _) = dualize(k, n).unwrap();
        let d = a * if kd >= 3 { 1.0 } else { 1.0f64.min((kd as f64).sqrt()) };
        let f = volume(VolumeQuery::new(k, n, d, Metric::ProjectiveF)).unwrap();
        let s = volume(VolumeQuery::new(k, n, d, Metric::Projective2)).unwrap();
        prop_assert!(f <= s * (1.0 + 1e-12), "k={} n={} δ={}: {} > {}", k, n, d, f, s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distances_invariant_under_unitaries(seed in any::<u64>(), n in 2usize..9, kfrac in 0.0f64..1.0) {
        let k = 1 + ((n - 1) as f64 * kfrac) as usize;
        let mut rng = SeededRng::new(seed, 0);
        let a = sample_uniform(n, k, &mut rng).unwrap();
        let b = sample_uniform(n, k, &mut rng).unwrap();
        let u = sample_uniform(n, n, &mut rng).unwrap().into_basis();
        let r = sample_uniform(k, k, &mut rng).unwrap().into_basis();
        let (ua, ub) = (a.transformed(&u).unwrap(), b.transformed(&u).unwrap().with_right_factor(&r).unwrap());
        let before = canonical_angles(&a, &b).unwrap();
        let after = canonical_angles(&ua, &ub).unwrap();
        for (x, y) in before.angles().iter().zip(after.angles()) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let (f, s) = (before.projective_f(), before.projective_2());
        prop_assert!(s <= f + 1e-15 && f <= (k as f64).sqrt() * s + 1e-15);
    }

    #[test]
    fn zf_at_zero_is_cb(n in 2usize..256, kf in 0.0f64..1.0, alpha in 0.01f64..=1.0, db_su in -20.0f64..40.0) {
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let s = MimoScenario::with_sinr_db(n, k, alpha, db_su).unwrap();
        prop_assert_eq!(estimate_zf(0.0, &s).unwrap(), estimate_cb(&vec![0.0; k - 1], &s));
    }

    #[test]
    fn zf_estimate_decreases_in_cross_power(alpha in 0.1f64..=1.0, db_su in -10.0f64..30.0, z1 in 0.0f64..0.9, dz in 0.0f64..0.09) {
        let s = MimoScenario::with_sinr_db(64, 8, alpha, db_su).unwrap();
        prop_assume!((1.0 - alpha * alpha - s.k_gamma()) * z1 + s.k_gamma() > 0.0);
        let a = estimate_zf(z1, &s).unwrap();
        let b = estimate_zf(z1 + dz, &s).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn reported_correlation_exact(seed in any::<u64>(), alpha in 0.05f64..=1.0) {
        let mut rng = SeededRng::new(seed, 1);
        let s = MimoScenario::new(16, 4, alpha, 10.0).unwrap();
        let cs = sample_channel_set(&s, &mut rng).unwrap();
        for i in 0..4 {
            let c = cs.true_directions().column(i).dotc(&cs.reported_directions().column(i)).norm();
            prop_assert!((c - alpha).abs() <= CORRELATION_TOL);
        }
    }

    #[test]
    fn same_seed_same_stream(seed in any::<u64>(), stream in any::<u64>()) {
        let (mut a, mut b) = (SeededRng::new(seed, stream), SeededRng::new(seed, stream));
        for _ in 0..8 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = SeededRng::new(seed, stream.wrapping_add(1));
        let mut d = SeededRng::new(seed, stream);
        prop_assert_ne!(c.next_u64(), d.next_u64());
    }

    #[test]
    fn sig12_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let y: f64 = sig12(x).parse().unwrap();
        prop_assert!(x == y || ((x - y) / x).abs() < 1e-11, "{} -> {}", x, sig12(x));
    }
}
