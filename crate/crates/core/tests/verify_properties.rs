use bufcontour::contour::*;
use bufcontour::model::{joint_sample, BivariateNormal, JointMetoceanModel};
use bufcontour::risk::buffered_estimate;
use bufcontour::verify::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

fn swell_support(grid: &DirectionGrid, pe: f64) -> DirectionalSupport {
    let s = joint_sample(&JointMetoceanModel::swell(), 1_000_000, 31).unwrap();
    build_support(&s, grid, pe, DEFAULT_MIN_TAIL).unwrap()
}

fn eight() -> Vec<usize> {
    (0..8).map(|k| k * 45).collect()
}

#[test]
fn exact_support_gives_standard_z_scores() {
    let grid = DirectionGrid::new(8).unwrap();
    let c = Normal::standard().inverse_cdf(0.99);
    let exact = DirectionalSupport {
        pe: 0.01,
        sample_size: 0,
        construction_seed: 0,
        min_tail: 20,
        entries: grid.angles().iter().map(|t| SupportEntry { theta: *t, c, cbar: c, tail_count: 0 }).collect(),
    };
    let model = BivariateNormal::standard();
    let z: Vec<f64> = (0..30)
        .flat_map(|seed| check_exceedence(&model, &exact, &grid, 0.01, 100_000, 100 + seed).unwrap().directions)
        .map(|d| d.z_score)
        .collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (z.len() - 1) as f64).sqrt();
    assert!(mean.abs() < 0.25, "{mean}");
    assert!((sd - 1.0).abs() < 0.2, "{sd}");
}

#[test]
fn gamma_buffered_equals_pe_on_swell() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = swell_support(&grid, 0.01);
    let r = check_gamma_buffered_at(&JointMetoceanModel::swell(), &sup, &grid, 0.01, 1_000_000, 32, &eight()).unwrap();
    assert_eq!(r.directions.len(), 8);
    assert!(!r.seed_reused);
    assert!(r.pass, "{:?}", r.directions.iter().map(|d| d.z_score).collect::<Vec<_>>());
}

#[test]
fn dominated_and_inflated_gammas_stay_below_pe() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = swell_support(&grid, 0.01);
    let fresh = joint_sample(&JointMetoceanModel::swell(), 1_000_000, 33).unwrap();
    assert!(eight().iter().any(|j| sup.entries[*j].cbar < 0.0));
    for j in eight() {
        let u = grid.unit(j);
        let cbar = sup.entries[j].cbar;
        let gamma = buffered_estimate(gamma_sample(&fresh, u, cbar).into_values()).unwrap();
        let shifted: Vec<f64> = gamma_sample(&fresh, u, cbar).values().iter().map(|v| v - 0.5).collect();
        let lowered = buffered_estimate(shifted).unwrap();
        assert!(lowered.report.p_f_buffered <= gamma.report.p_f_buffered, "direction {j}");
        let inflated = buffered_estimate(gamma_sample(&fresh, u, scale_support(cbar, 2.0).unwrap()).into_values()).unwrap();
        // doubling raises the offset only where it is positive
        if cbar > 0.0 {
            assert!(inflated.report.p_f_buffered < 0.01, "direction {j}: {}", inflated.report.p_f_buffered);
        } else {
            assert!(inflated.report.p_f_buffered > gamma.report.p_f_buffered, "direction {j}");
        }
    }
}

type Performance<'a> = Box<dyn Fn(&[f64; 2]) -> f64 + 'a>;

#[test]
fn dominated_performance_functions_respect_pe() {
    let grid = DirectionGrid::new(360).unwrap();
    let sup = swell_support(&grid, 0.01);
    let fresh = joint_sample(&JointMetoceanModel::swell(), 1_000_000, 34).unwrap();
    for j in eight() {
        let u = grid.unit(j);
        let cbar = sup.entries[j].cbar;
        let gamma = |r: &[f64; 2]| u[0] * r[0] + u[1] * r[1] - cbar;
        let bound = buffered_estimate(fresh.rows().iter().map(gamma).collect()).unwrap();
        let dominated: [Performance; 3] = [
            Box::new(|r| gamma(r) - 0.3 * r[1]),
            Box::new(|r| gamma(r).min(0.1)),
            Box::new(|r| 0.5 * gamma(r) - 0.5 * gamma(r).abs()),
        ];
        for (i, g) in dominated.iter().enumerate() {
            let values: Vec<f64> = fresh.rows().iter().map(g).collect();
            assert!(fresh.rows().iter().all(|r| g(r) <= gamma(r)));
            let est = buffered_estimate(values).unwrap();
            let se = bound.std_error.unwrap();
            assert!(est.report.p_f_buffered <= bound.report.p_f_buffered + 3.0 * se, "direction {j}, g{i}");
            // failures of g lie in the buffered halfplane's complement
            assert!(fresh.rows().iter().filter(|r| g(r) > 0.0).all(|r| u[0] * r[0] + u[1] * r[1] > cbar));
        }
    }
}

#[test]
fn random_dominated_pairs_keep_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let model = JointMetoceanModel::windsea();
    for trial in 0..100 {
        let n = rng.random_range(200..5000);
        let s = joint_sample(&model, n, 1000 + trial).unwrap();
        let (a, b, c) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-5.0..5.0));
        let lower: Vec<f64> = s.rows().iter().map(|r| a * r[0] + b * r[1] + c).collect();
        let scale = rng.random_range(0.01..2.0);
        let upper: Vec<f64> = lower.iter().map(|v| v + scale * rng.random::<f64>()).collect();
        let viol = monotonicity_violations(&lower, &upper).unwrap();
        assert!(viol.is_empty(), "trial {trial}: {viol:?}");
    }
}

#[test]
fn oracle_agreement_grid() {
    for mu in [-3.0, -2.5, -1.0] {
        for sigma in [0.5, 1.5] {
            let m = BivariateNormal { mean: [mu, 0.0], sd: [sigma, 1.0] };
            let s = joint_sample(&m, 1_000_000, 36).unwrap();
            let values: Vec<f64> = s.rows().iter().map(|r| r[0]).collect();
            let est = buffered_estimate(values).unwrap();
            let oracle = normal_cvar_oracle(mu, sigma).unwrap();
            let se = oracle.std_error(sigma, s.len());
            let diff = est.report.p_f_buffered - oracle.p_f_buffered;
            assert!(diff.abs() <= 3.0 * se, "mu {mu} sigma {sigma}: diff {diff} se {se}");
        }
    }
}

#[test]
fn hazard_root_is_consistent() {
    for (mu, sigma) in [(-0.1, 2.0), (-2.5, 1.5), (-40.0, 1.0)] {
        let o = normal_cvar_oracle(mu, sigma).unwrap();
        assert!((normal_hazard(o.z) * sigma + mu).abs() < 1e-8 * mu.abs().max(1.0), "{mu} {sigma}");
        assert!((o.alpha + o.p_f_buffered - 1.0).abs() < 1e-12);
    }
    assert!(normal_cvar_oracle(0.0, 1.0).is_err());
    assert!(normal_cvar_oracle(-1.0, 0.0).is_err());
}
