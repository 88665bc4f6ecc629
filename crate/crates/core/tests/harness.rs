use std::f64::consts::PI;

use wgn_core::block::BlockLayout;
use wgn_core::feasible::{feasibility_residuals, project_to_feasible};
use wgn_core::optimizer::{regularized_ascent, unconstrained_ascent, OptimizerConfig};
use wgn_core::regularizers::{
    l_power_loss, RegularizerKind, RegularizerSpec, Weighting, BASELINE_COEFFICIENT,
};
use wgn_core::rng::{gaussian_latent, stream_rng};
use wgn_core::toy::{autocorrelation, run_comparison, ScenarioConfig, ScenarioMode, SpikeReward};
use wgn_core::LatentVector;

fn scenario(n: usize, modes: Vec<ScenarioMode>, iterations: usize) -> ScenarioConfig {
    ScenarioConfig {
        n,
        block_size: 16,
        target_bin: 0,
        modes,
        iterations,
        step_size: 0.02,
        clip: 0.03,
        lambda: BASELINE_COEFFICIENT,
        weighting: Weighting::Fixed,
        seed: 11,
        project_gradient: true,
    }
}

#[test]
fn projection_spreads_structured_autocorrelation() {
    let n = 1024;
    let layout = BlockLayout::for_len(n, 16).unwrap();
    let constant = LatentVector::new(vec![1.0; n]).unwrap();
    let sinusoid = LatentVector::new(
        (0..n)
            .map(|i| (2.0 * PI * 5.0 * i as f64 / n as f64).cos() * 2.0)
            .collect(),
    )
    .unwrap();
    for x in [constant, sinusoid] {
        let before = autocorrelation(&x).mean_off_origin();
        let projected = project_to_feasible(&x, &layout, 0).unwrap().output;
        let after = autocorrelation(&projected).mean_off_origin();
        assert!(after < before, "{after} >= {before}");
    }
}

#[test]
fn gaussian_residuals_match_chi_spread() {
    // For CN(0, 1) entries, a block's ℓ2² has variance B and its ℓ1 has
    // variance B(1 − π/4).
    let b = 16;
    let layout = BlockLayout::for_len(65536, b).unwrap();
    let (mut sum1, mut sum2, mut count) = (0.0, 0.0, 0usize);
    for seed in 0..49 {
        let x = gaussian_latent(65536, &mut stream_rng(seed, 0));
        let (l1, l2) = feasibility_residuals(&x, &layout).unwrap();
        sum1 += l1.iter().map(|r| r * r).sum::<f64>();
        sum2 += l2.iter().map(|r| r * r).sum::<f64>();
        count += l1.len();
    }
    assert!(count >= 100_000);
    let rms1 = (sum1 / count as f64).sqrt();
    let rms2 = (sum2 / count as f64).sqrt();
    let sd1 = (b as f64 * (1.0 - PI / 4.0)).sqrt();
    let sd2 = (b as f64).sqrt();
    assert!((rms1 / sd1 - 1.0).abs() < 0.02, "{rms1} vs {sd1}");
    assert!((rms2 / sd2 - 1.0).abs() < 0.02, "{rms2} vs {sd2}");
}

#[test]
fn zero_latent_residuals() {
    let layout = BlockLayout::for_len(64, 16).unwrap();
    let (l1, _) = feasibility_residuals(&LatentVector::zeros(64).unwrap(), &layout).unwrap();
    assert!(l1.iter().all(|r| (r - 14.1796).abs() < 1e-3));
}

#[test]
fn power_loss_is_positive_on_feasible_points() {
    let layout = BlockLayout::for_len(1024, 16).unwrap();
    for seed in 0..10 {
        let x = gaussian_latent(1024, &mut stream_rng(seed, 0));
        let feasible = project_to_feasible(&x, &layout, seed).unwrap().output;
        assert!(l_power_loss(&feasible, &layout).unwrap().0 > 0.0);
    }
}

#[test]
fn comparison_across_modes() {
    let cfg = scenario(
        1024,
        vec![
            ScenarioMode::Unconstrained,
            ScenarioMode::NormChi,
            ScenarioMode::PowerSpectral,
            ScenarioMode::Projected,
        ],
        1000,
    );
    let outcomes = run_comparison(&cfg).unwrap();
    let start = outcomes[0].initial_value;
    for o in &outcomes {
        assert!(
            (o.initial_value - start).abs() <= 1e-9 * start.max(1.0),
            "{:?}",
            o.mode
        );
        let cap = 7.185;
        match o.mode {
            ScenarioMode::Projected => {
                assert!((7.10..=cap).contains(&o.final_value), "{}", o.final_value);
                let worst = o
                    .trajectory
                    .records
                    .iter()
                    .map(|r| r.max_residual)
                    .fold(0.0, f64::max);
                assert!(worst < 1e-9 * 16.0);
                assert!(o.max_magnitude <= 2.6805 + 1e-9);
            }
            ScenarioMode::Unconstrained | ScenarioMode::NormChi => {
                assert!(o.final_value > 71.8, "{:?}: {}", o.mode, o.final_value);
            }
            ScenarioMode::PowerSpectral => {
                assert!(o.trajectory.records.iter().all(|r| r.max_residual > 0.0));
            }
        }
    }
}

#[test]
fn zero_coefficient_matches_unconstrained() {
    let layout = BlockLayout::for_len(64, 16).unwrap();
    let x0 = gaussian_latent(64, &mut stream_rng(2, 0));
    let cfg = OptimizerConfig {
        iterations: 50,
        ..OptimizerConfig::default()
    };
    let reward = SpikeReward { target_bin: 3 };
    let spec = RegularizerSpec::new(RegularizerKind::NormChi, 0.0, Weighting::Fixed).unwrap();
    let a = regularized_ascent(&reward, &spec, &x0, &layout, &cfg).unwrap();
    let b = unconstrained_ascent(&reward, &x0, &layout, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn comparison_is_reproducible() {
    let cfg = scenario(
        64,
        vec![ScenarioMode::Projected, ScenarioMode::PowerSpectral],
        40,
    );
    let a = run_comparison(&cfg).unwrap();
    let b = run_comparison(&cfg).unwrap();
    assert_eq!(
        wgn_core::toy::comparison_csv(&a),
        wgn_core::toy::comparison_csv(&b)
    );
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.trajectory.to_csv(), q.trajectory.to_csv());
    }
}
