use std::f64::consts::PI;

use affunion::l2::{cauchy_schwarz_report, pairwise_mass, shell_index, tube_mass};
use affunion::{AffinePlane, Ambient, PointCloud, WeightedFamily};

fn two_parallel_segments() -> (WeightedFamily, Vec<PointCloud>) {
    let amb = Ambient::new(2, 1).unwrap();
    let heights = [-0.3, 0.3];
    let planes = heights
        .iter()
        .map(|&a| AffinePlane::from_code(vec![a], vec![vec![0.0]], amb).unwrap())
        .collect();
    let clouds = heights
        .iter()
        .map(|&a| {
            let pts: Vec<Vec<f64>> = (0..=1024).map(|i| vec![i as f64 / 1024.0, a]).collect();
            PointCloud::new(2, &pts, 1.0 / 1024.0).unwrap()
        })
        .collect();
    (WeightedFamily::uniform(planes, 1.0, 1, 0.5).unwrap(), clouds)
}

#[test]
fn tube_mass_of_disjoint_segments() {
    let (fam, clouds) = two_parallel_segments();
    let d = 0.05;
    let stadium = 2.0 * d + PI * d * d;
    let tm = tube_mass(&fam, &clouds, d, 1.0 / 1024.0).unwrap();
    assert!((tm - stadium).abs() < 0.01 * stadium);
}

#[test]
fn disjoint_tubes_attain_equality() {
    // Only diagonal terms survive: pair mass = 2 * (1/2)^2 * V, union volume
    // = 2 V, tube mass = V, so both sides equal V^2.
    let (fam, clouds) = two_parallel_segments();
    let d = 0.05;
    let grid = d / 8.0;
    let pm = pairwise_mass(&fam, &clouds, d, grid, 10_000, 1).unwrap();
    assert_eq!(pm.sampled_pairs, 0);
    let cs = cauchy_schwarz_report(&fam, &clouds, d, grid, 10_000, 1, 3.0).unwrap();
    assert!(cs.ok);
    assert!((cs.lhs - cs.f_vol * cs.pair_mass).abs() < 1e-9 * cs.lhs);
    assert!((pm.value - 0.5 * cs.tube_mass).abs() < 1e-12);
}

#[test]
fn overlapping_tubes_keep_the_inequality() {
    let amb = Ambient::new(2, 1).unwrap();
    let (a, b) = ([-0.1, 0.0, 0.05], [0.2, -0.1, 0.0]);
    let planes: Vec<AffinePlane> = a
        .iter()
        .zip(&b)
        .map(|(&a, &b)| AffinePlane::from_code(vec![a], vec![vec![b]], amb).unwrap())
        .collect();
    let clouds: Vec<PointCloud> = planes
        .iter()
        .map(|p| {
            let pts: Vec<Vec<f64>> = (0..=512).map(|i| p.point_at(&[i as f64 / 512.0]).unwrap()).collect();
            PointCloud::new(2, &pts, 1.0 / 512.0).unwrap()
        })
        .collect();
    let fam = WeightedFamily::uniform(planes, 1.0, 1, 0.05).unwrap();
    for d in [0.1, 0.05, 0.025] {
        let cs = cauchy_schwarz_report(&fam, &clouds, d, d / 4.0, 200_000, 9, 3.0).unwrap();
        assert!(cs.ok, "{cs:?}");
    }
}

#[test]
fn shell_indices_follow_dyadic_ranges() {
    let d = 0.01;
    assert_eq!(shell_index(0.0, d), 0);
    assert_eq!(shell_index(d, d), 0);
    assert_eq!(shell_index(1.5 * d, d), 1);
    assert_eq!(shell_index(2.0 * d, d), 1);
    assert_eq!(shell_index(2.0001 * d, d), 2);
    assert_eq!(shell_index(64.0 * d, d), 6);
}
