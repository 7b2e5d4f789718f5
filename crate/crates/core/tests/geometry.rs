use affunion::{
    derive_slope_bound, intersection_volume, intersection_volume_mc, separation_test, strip_bound, AffinePlane,
    Ambient, DomainBox, SamplingDomain, SlopeBound, TubeSpec, WeightedFamily,
};

fn line(a: f64, b: f64) -> AffinePlane {
    AffinePlane::from_code(vec![a], vec![vec![b]], Ambient::new(2, 1).unwrap()).unwrap()
}

/// Point-to-line distance in the plane from the implicit form `b t - y + a = 0`.
fn line_distance(a: f64, b: f64, p: [f64; 2]) -> f64 {
    (b * p[0] - p[1] + a).abs() / (1.0 + b * b).sqrt()
}

#[test]
fn distance_matches_implicit_form() {
    for &(a, b) in &[(0.0, 0.0), (0.3, -0.7), (-0.4, 1.0), (0.1, 0.25)] {
        let l = line(a, b);
        for &p in &[[0.2, 0.9], [-1.0, 0.0], [0.5, -0.3], [3.0, 2.0]] {
            let d = l.distance(&p).unwrap();
            assert!((d - line_distance(a, b, p)).abs() < 1e-12);
        }
    }
}

#[test]
fn plane_distance_in_three_dimensions() {
    // y3 = a + b1 t1 + b2 t2 has normal (b1, b2, -1).
    let amb = Ambient::new(3, 2).unwrap();
    let (a, b1, b2) = (0.2, 0.5, -0.3);
    let p = AffinePlane::from_code(vec![a], vec![vec![b1], vec![b2]], amb).unwrap();
    for y in [[0.1, 0.7, -0.2], [0.0, 0.0, 1.0], [-0.4, 0.3, 0.25]] {
        let expected = (b1 * y[0] + b2 * y[1] - y[2] + a).abs() / (b1 * b1 + b2 * b2 + 1.0).sqrt();
        assert!((p.distance(&y).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn tube_membership_is_strict() {
    let tube = TubeSpec::new(line(0.0, 0.0), 0.1).unwrap();
    assert!(tube.contains(&[0.5, 0.099]).unwrap());
    assert!(!tube.contains(&[0.5, 0.1]).unwrap());
    assert!(TubeSpec::new(line(0.0, 0.0), 0.0).is_err());
}

#[test]
fn parallel_lines_overlap_area() {
    // Horizontal strips of half-width d at heights 0 and g overlap in a band
    // of height 2d - g over t in [0, 1].
    let window = DomainBox::new(Ambient::new(2, 1).unwrap(), 0.2).unwrap();
    let d = 0.1;
    let g = 0.05;
    let exact = 2.0 * d - g;
    let est = intersection_volume(&line(0.0, 0.0), &line(g, 0.0), d, &window, SamplingDomain::Slab, 400_000, 3)
        .unwrap();
    assert!((est.estimate - exact).abs() < 4.0 * est.stderr + 1e-3, "{est:?} vs {exact}");
    let uniform = intersection_volume_mc(&line(0.0, 0.0), &line(g, 0.0), d, &window, 400_000, 4).unwrap();
    assert!((uniform.estimate - exact).abs() < 4.0 * uniform.stderr + 1e-3);
}

#[test]
fn separated_pairs_never_meet_on_a_grid() {
    let fam_planes = [line(-0.3, 0.1), line(0.3, -0.1), line(0.0, 0.4)];
    let fam = WeightedFamily::new(fam_planes.to_vec(), vec![1.0 / 3.0; 3], 1.0, 0, 1.0).unwrap();
    let sb = derive_slope_bound(&fam).unwrap();
    let delta = 0.05;
    for p in &fam_planes {
        for q in &fam_planes {
            if p == q || !separation_test(p, q, delta, &sb).unwrap() {
                continue;
            }
            for i in 0..=200 {
                for j in 0..=200 {
                    let y = [i as f64 / 200.0, -0.7 + 1.4 * j as f64 / 200.0];
                    assert!(!(p.distance(&y).unwrap() < delta && q.distance(&y).unwrap() < delta));
                }
            }
        }
    }
}

#[test]
fn strip_bound_dominates_crossing_area() {
    // Two crossing lines: the overlap of their strips is a rhombus of area
    // (2 delta)^2 / sin(theta) when it lies inside the window.
    let (p, q) = (line(-0.1, 0.2), line(0.1, -0.2));
    let delta = 0.02;
    let sb = SlopeBound::for_planes([&p, &q]).unwrap();
    let bound = strip_bound(&p, &q, delta, &sb).unwrap();
    let sin = 0.4 / (1.04f64.sqrt() * 1.04f64.sqrt());
    let rhombus = (2.0 * delta).powi(2) / sin;
    assert!(bound >= rhombus, "{bound} < {rhombus}");
    assert!(strip_bound(&p, &p, delta, &sb).is_err());
}
