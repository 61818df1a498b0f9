use bufcontour::contour::*;
use bufcontour::model::{joint_sample, BivariateNormal, JointMetoceanModel, SampleSet};
use proptest::prelude::*;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

fn normal_set(n: usize, seed: u64) -> SampleSet {
    joint_sample(&BivariateNormal::standard(), n, seed).unwrap()
}

fn z(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

fn normal_cvar(p: f64) -> f64 {
    let std = Normal::standard();
    std.pdf(std.inverse_cdf(1.0 - p)) / p
}

fn radial_error(poly: &ContourPolygon, radius: f64) -> f64 {
    poly.vertices.iter().map(|v| (v[0].hypot(v[1]) / radius - 1.0).abs()).fold(0.0, f64::max)
}

#[test]
fn normal_support_values_at_pe_one_tenth() {
    let s = normal_set(1_000_000, 11);
    let proj = project(&s, [1.0, 0.0]);
    let c = estimate_c(&proj, 0.1, 20).unwrap();
    let cbar = estimate_cbar(&proj, 0.1, 20).unwrap();
    assert!((c - 1.2816).abs() < 0.01, "{c}");
    assert!((cbar - 1.7550).abs() < 0.02, "{cbar}");
    assert!((z(0.9) - 1.2816).abs() < 1e-4);
    assert!((normal_cvar(0.1) - 1.7550).abs() < 1e-4);
}

fn quantile_std_error(pe: f64, n: usize) -> f64 {
    (pe * (1.0 - pe) / n as f64).sqrt() / Normal::standard().pdf(z(1.0 - pe))
}

#[test]
fn isotropic_spread_within_three_standard_errors() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = build_support(&normal_set(1_000_000, 12), &grid, 0.1, 20).unwrap();
    let c = sup.classical_offsets();
    let spread = c.iter().cloned().fold(f64::MIN, f64::max) - c.iter().cloned().fold(f64::MAX, f64::min);
    let se = quantile_std_error(0.1, 1_000_000);
    assert!(spread <= 3.0 * se, "spread {spread} vs 3 se {}", 3.0 * se);
}

#[test]
fn isotropic_spread_shrinks_with_sample_size() {
    let grid = DirectionGrid::new(360).unwrap();
    let spread = |n: usize| {
        let c = build_support(&normal_set(n, 13), &grid, 0.1, 20).unwrap().classical_offsets();
        c.iter().cloned().fold(f64::MIN, f64::max) - c.iter().cloned().fold(f64::MAX, f64::min)
    };
    let (small, large) = (spread(10_000), spread(1_000_000));
    // a hundredfold sample shrinks the spread by about ten
    assert!(large < small / 4.0, "{small} -> {large}");
    assert!(large < 8.0 * quantile_std_error(0.1, 1_000_000));
}

#[test]
fn buffered_support_dominates_classical() {
    let grid = DirectionGrid::new(360).unwrap();
    for (seed, samples) in [(1, normal_set(200_000, 1)), (2, joint_sample(&JointMetoceanModel::windsea(), 200_000, 2).unwrap())] {
        let sup = build_support(&samples, &grid, 0.01, 20).unwrap();
        assert!(sup.dominance_failures().is_empty(), "seed {seed}");
        assert!(sup.entries.iter().all(|e| e.tail_count >= 20));
    }
}

#[test]
fn circle_radii_within_one_percent() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = build_support(&normal_set(1_000_000, 14), &grid, 0.1, 20).unwrap();
    let classical = build_polygon(&sup, &grid, ContourKind::Classical).unwrap();
    let buffered = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
    assert!(radial_error(&classical, z(0.9)) < 0.01);
    assert!(radial_error(&buffered, normal_cvar(0.1)) < 0.01);
    assert!(buffered.is_valid(), "{:?}", buffered.failing_vertices());
    assert!(vertices_inside(&buffered, &classical));
}

#[test]
fn only_flagged_classical_vertices_can_leave_the_buffered_polygon() {
    let grid = DirectionGrid::new(360).unwrap();
    for (seed, pe) in [(40, 1e-3), (41, 1e-4)] {
        let s = joint_sample(&JointMetoceanModel::windsea(), 500_000, seed).unwrap();
        let sup = build_support(&s, &grid, pe, 20).unwrap();
        let classical = build_polygon(&sup, &grid, ContourKind::Classical).unwrap();
        let buffered = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
        let flagged = classical.failing_vertices();
        for j in vertices_outside(&buffered, &classical) {
            assert!(flagged.contains(&j), "vertex {j} satisfies every classical halfplane yet leaves the buffered polygon");
        }
    }
}

#[test]
fn support_is_independent_of_thread_count() {
    let grid = DirectionGrid::new(90).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let s = joint_sample(&JointMetoceanModel::swell(), 100_000, 21).unwrap();
            build_support(&s, &grid, 0.01, 20).unwrap()
        })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    for (a, b) in one.entries.iter().zip(&four.entries) {
        assert_eq!(a.c.to_bits(), b.c.to_bits());
        assert_eq!(a.cbar.to_bits(), b.cbar.to_bits());
    }
}

#[test]
fn refined_buffered_grid_lies_inside_coarse() {
    let s = joint_sample(&JointMetoceanModel::swell(), 200_000, 22).unwrap();
    for m in [45, 180] {
        let coarse = DirectionGrid::new(m).unwrap();
        let fine = DirectionGrid::new(2 * m).unwrap();
        let pc = build_polygon(&build_support(&s, &coarse, 0.01, 20).unwrap(), &coarse, ContourKind::Buffered).unwrap();
        let pf = build_polygon(&build_support(&s, &fine, 0.01, 20).unwrap(), &fine, ContourKind::Buffered).unwrap();
        assert!(polygon_contains(&pc, &pf).unwrap(), "m = {m}");
    }
}

#[test]
fn scaled_buffered_contains_unscaled_on_swell() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = build_support(&joint_sample(&JointMetoceanModel::swell(), 1_000_000, 23).unwrap(), &grid, 1e-3, 20).unwrap();
    let base = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
    let scaled = build_polygon(&sup.scaled(2.0).unwrap(), &grid, ContourKind::Buffered).unwrap();
    assert!(base.is_valid() && scaled.is_valid());
    let outside = vertices_outside(&scaled, &base);
    assert!(outside.is_empty(), "{} of {} vertices outside the scaled polygon", outside.len(), grid.len());
}

#[test]
fn scaling_a_contour_around_the_origin_contains_it() {
    // dilation about the origin encloses a convex set only if the set holds the origin
    let grid = DirectionGrid::new(360).unwrap();
    let sup = build_support(&normal_set(200_000, 24), &grid, 1e-2, 20).unwrap();
    let base = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
    let scaled = build_polygon(&sup.scaled(2.0).unwrap(), &grid, ContourKind::Buffered).unwrap();
    assert!(polygon_contains(&scaled, &base).unwrap());
    let swell = build_support(&joint_sample(&JointMetoceanModel::swell(), 200_000, 24).unwrap(), &grid, 1e-2, 20).unwrap();
    assert!(swell.buffered_offsets().iter().any(|c| *c < 0.0), "swell contour excludes the origin");
}

#[test]
fn polygon_contains_itself() {
    let grid = DirectionGrid::new(72).unwrap();
    let sup = build_support(&normal_set(50_000, 25), &grid, 0.05, 20).unwrap();
    let p = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
    assert!(polygon_contains(&p, &p).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constant_offsets_give_circumscribed_polygon(m in 3usize..400, r in 0.1f64..100.0) {
        let grid = DirectionGrid::new(m).unwrap();
        let p = polygon_from_offsets(&grid, &vec![r; m], ContourKind::Classical, DEFAULT_RELATIVE_TOLERANCE).unwrap();
        let expected = r / (std::f64::consts::PI / m as f64).cos();
        for v in &p.vertices {
            prop_assert!((v[0].hypot(v[1]) - expected).abs() <= 1e-9 * expected);
        }
        prop_assert!(p.is_valid());
    }

    #[test]
    fn support_of_any_point_cloud_gives_valid_buffered_polygon(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 50..400),
        m in 3usize..64,
    ) {
        let rows: Vec<[f64; 2]> = pts.iter().map(|(a, b)| [*a, *b]).collect();
        let s = SampleSet::from_rows(rows, 0, "cloud").unwrap();
        let grid = DirectionGrid::new(m).unwrap();
        let sup = build_support(&s, &grid, 0.2, 1).unwrap();
        let pb = build_polygon(&sup, &grid, ContourKind::Buffered).unwrap();
        prop_assert!(pb.is_valid(), "failing {:?}", pb.failing_vertices());
        for (e, u) in sup.entries.iter().zip(grid.units()) {
            let proj = project(&s, *u);
            prop_assert_eq!(e.c, estimate_c(&proj, 0.2, 1).unwrap());
            prop_assert_eq!(e.cbar, estimate_cbar(&proj, 0.2, 1).unwrap());
        }
    }
}
