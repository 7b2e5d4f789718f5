use affunion::dimension::{box_count, neighborhood_volume, PointCloud};
use affunion::io::{read_cloud_csv, write_cloud_csv};
use affunion::mc::derive_seed;
use affunion::{intersection_volume_mc, separation_test, AffinePlane, Ambient, DomainBox, SlopeBound};
use proptest::prelude::*;

fn plane_strategy(n: usize, k: usize) -> impl Strategy<Value = AffinePlane> {
    let m = n - k;
    (
        prop::collection::vec(-0.5..0.5f64, m),
        prop::collection::vec(prop::collection::vec(-1.0..1.0f64, m), k),
    )
        .prop_map(move |(a, b)| AffinePlane::from_code(a, b, Ambient::new(n, k).unwrap()).unwrap())
}

fn cloud_strategy() -> impl Strategy<Value = PointCloud> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..60)
        .prop_map(|v| PointCloud::new(2, &v.into_iter().map(|(x, y)| vec![x, y]).collect::<Vec<_>>(), 1e-3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_points_lie_on_the_plane(p in plane_strategy(3, 1), t in -1.0..2.0f64) {
        let y = p.point_at(&[t]).unwrap();
        prop_assert!(p.distance(&y).unwrap() < 1e-12);
    }

    #[test]
    fn distance_is_at_most_vertical_gap(p in plane_strategy(3, 2), y in prop::collection::vec(-1.0..1.0f64, 3)) {
        let foot = p.point_at(&y[..2]).unwrap();
        prop_assert!(p.distance(&y).unwrap() <= (y[2] - foot[2]).abs() + 1e-12);
    }

    #[test]
    fn code_metric_is_a_metric(p in plane_strategy(3, 1), q in plane_strategy(3, 1), r in plane_strategy(3, 1)) {
        let d = |a: &AffinePlane, b: &AffinePlane| a.code_metric(b).unwrap();
        prop_assert_eq!(d(&p, &p), 0.0);
        prop_assert!((d(&p, &q) - d(&q, &p)).abs() < 1e-15);
        prop_assert!(d(&p, &r) <= d(&p, &q) + d(&q, &r) + 1e-12);
    }

    #[test]
    fn flat_code_round_trips(p in plane_strategy(4, 2)) {
        let back = AffinePlane::from_flat_code(&p.flat_code(), p.ambient()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn separated_pairs_sample_no_overlap(
        p in plane_strategy(2, 1),
        q in plane_strategy(2, 1),
        j in 3..8i32,
        seed in any::<u64>(),
    ) {
        let delta = 0.5f64.powi(j);
        let sb = SlopeBound::for_planes([&p, &q]).unwrap();
        prop_assume!(separation_test(&p, &q, delta, &sb).unwrap());
        let window = DomainBox::new(p.ambient(), 0.2).unwrap();
        let est = intersection_volume_mc(&p, &q, delta, &window, 4096, seed).unwrap();
        prop_assert_eq!(est.hits, 0);
    }

    #[test]
    fn volume_estimates_are_seed_deterministic(p in plane_strategy(2, 1), q in plane_strategy(2, 1), seed in any::<u64>()) {
        let window = DomainBox::new(p.ambient(), 0.2).unwrap();
        let a = intersection_volume_mc(&p, &q, 0.1, &window, 3000, seed).unwrap();
        let b = intersection_volume_mc(&p, &q, 0.1, &window, 3000, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn box_count_is_monotone(c in cloud_strategy()) {
        let mut prev = 0;
        for j in 0..8 {
            let n = box_count(&c, 0.5f64.powi(j)).unwrap();
            prop_assert!(n >= prev && n <= c.len());
            prev = n;
        }
    }

    #[test]
    fn neighborhood_volume_grows_with_delta(c in cloud_strategy()) {
        let g = 1.0 / 256.0;
        let small = neighborhood_volume(&c, 0.02, g).unwrap();
        let large = neighborhood_volume(&c, 0.04, g).unwrap();
        prop_assert!(small <= large);
        prop_assert!(large <= c.len() as f64 * std::f64::consts::PI * 0.045 * 0.045);
    }

    #[test]
    fn cloud_csv_round_trips(c in cloud_strategy()) {
        let mut buf = Vec::new();
        write_cloud_csv(&mut buf, &c).unwrap();
        prop_assert_eq!(read_cloud_csv(buf.as_slice(), Some(c.gen_scale())).unwrap(), c);
    }

    #[test]
    fn derived_seeds_differ_by_chunk(seed in any::<u64>(), stream in 0..16u64, chunk in 0..1000u64) {
        prop_assert_ne!(derive_seed(seed, stream, chunk), derive_seed(seed, stream, chunk + 1));
    }
}
