//! Cross-module distributional properties: model reductions, sampler
//! self-consistency and predictive calibration.

mod common;

use common::*;
use epikit::*;
use rand::Rng;

/// With `lambda_H = 0` the household model collapses to the general
/// stochastic epidemic with contact rate `lambda_G`: compare final-size
/// histograms over 10^4 runs of each (chi-square at the 5% level).
#[test]
fn household_model_reduces_to_gse_without_household_route() {
    let sizes = vec![3u32; 10]; // n = 30
    let n = 30u32;
    let hh = HouseholdParams {
        lambda_h: 0.0,
        lambda_g: 1.8,
        gamma: 1.0,
        sizes,
    };
    let gse = GseParams::new(1.8, 1.0, n).unwrap();
    let runs = 10_000u64;
    let mut hh_sizes = vec![0u64; n as usize + 1];
    let mut gse_sizes = vec![0u64; n as usize + 1];
    for seed in 0..runs {
        let d = simulate_households(&hh, seed).unwrap();
        hh_sizes[d.final_size() as usize] += 1;
        let log = simulate_gse(&gse, seed + runs).unwrap();
        gse_sizes[final_size(&log).unwrap() as usize] += 1;
    }
    // pool adjacent cells until both samples expect >= 10
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for z in 0..=n as usize {
        acc.0 += hh_sizes[z];
        acc.1 += gse_sizes[z];
        if acc.0 + acc.1 >= 40 {
            bins.push(acc);
            acc = (0, 0);
        }
    }
    if acc.0 + acc.1 > 0 {
        bins.push(acc);
    }
    // two-sample chi-square with equal sample sizes
    let mut chi2 = 0.0;
    for &(a, b) in &bins {
        let (a, b) = (a as f64, b as f64);
        chi2 += (a - b) * (a - b) / (a + b);
    }
    let df = bins.len() - 1;
    assert!(
        chi2 < chi2_critical_5(df),
        "chi2 {chi2:.2} over {df} df (critical {:.2})",
        chi2_critical_5(df)
    );
}

/// High within-household transmission concentrates infections: the attack
/// rate inside households that were reached exceeds the population attack
/// rate (means over 10^3 runs).
#[test]
fn household_transmission_clusters_infections() {
    let params = HouseholdParams {
        lambda_h: 10.0,
        lambda_g: 0.9,
        gamma: 1.0,
        sizes: vec![4; 50],
    };
    let mut within = Vec::new();
    let mut overall = Vec::new();
    for seed in 0..1000u64 {
        let data = simulate_households(&params, seed).unwrap();
        let per_hh = data.infected_per_household();
        let touched: Vec<usize> = (0..per_hh.len()).filter(|&i| per_hh[i] > 0).collect();
        if touched.len() < 2 {
            continue;
        }
        let infected: u32 = per_hh.iter().sum();
        let touched_size: u32 = touched.iter().map(|&i| data.sizes[i]).sum();
        within.push(infected as f64 / touched_size as f64);
        overall.push(infected as f64 / params.n() as f64);
    }
    assert!(within.len() > 500);
    let z = welch_z(&within, &overall);
    assert!(
        z > 1.645,
        "within-household attack {:.3} vs population {:.3} (z = {z:.1})",
        mean(&within),
        mean(&overall)
    );
}

/// Simulation-based calibration of the DA-MCMC sampler: draw parameters
/// from the prior, simulate removals from the model, run a short chain, and
/// check that the rank of the true parameter among the posterior draws is
/// uniform (chi-square at the 5% level).
#[test]
fn da_mcmc_rank_uniformity() {
    let prior_l = PriorDist::Gamma {
        shape: 2.0,
        rate: 1.5,
    };
    let prior_g = PriorDist::Gamma {
        shape: 2.0,
        rate: 2.0,
    };
    let reps = 200usize;
    let bins = 8usize;
    let posterior_draws = 64usize; // thinned draws per chain
    let mut counts_l = vec![0u32; bins];
    let mut counts_g = vec![0u32; bins];
    let mut used = 0usize;
    let mut rep = 0u64;
    while used < reps {
        rep += 1;
        let mut rng = stream_rng(555, rep);
        let lambda0 = prior_l.sample(&mut rng);
        let gamma0 = prior_g.sample(&mut rng);
        let params = match GseParams::new(lambda0, gamma0, 25) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let log = simulate_gse(&params, rng.random::<u64>()).unwrap();
        let mut removals = Vec::new();
        for ev in &log.events {
            if ev.kind == EventKind::Recovery {
                removals.push(ev.time);
            }
        }
        let cfg = DaMcmcConfig {
            iterations: 20 * posterior_draws * 2,
            burn_in_fraction: 0.5,
            thin: 20,
            update_latent: true,
        };
        let out = match da_mcmc_gse(&removals, 25, &prior_l, &prior_g, &cfg, rng.random::<u64>()) {
            Ok(o) => o,
            Err(_) => continue,
        };
        if out.draws.len() < posterior_draws {
            continue;
        }
        used += 1;
        let rank_of = |idx: usize, truth: f64| -> usize {
            out.draws[..posterior_draws]
                .iter()
                .filter(|d| d[idx] < truth)
                .count()
        };
        counts_l[rank_of(0, lambda0) * bins / (posterior_draws + 1)] += 1;
        counts_g[rank_of(1, gamma0) * bins / (posterior_draws + 1)] += 1;
    }
    let expected = vec![reps as f64 / bins as f64; bins];
    for (name, counts) in [("lambda", &counts_l), ("gamma", &counts_g)] {
        let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let chi2 = chi2_statistic(&observed, &expected);
        assert!(
            chi2 < chi2_critical_5(bins - 1),
            "{name} rank chi2 {chi2:.2} (counts {counts:?})"
        );
    }
}

/// Flat in-control series of moderate counts: the alarm time is `none` in
/// a share of replications consistent with the per-week quantile level.
#[test]
fn detector_stays_quiet_on_flat_series() {
    let cfg = FarringtonConfig {
        years_back: 3,
        ..Default::default()
    };
    let baseline = NegBin::new(10.0, 0.05).unwrap();
    let monitored = 20usize;
    let mut quiet = 0;
    let reps = 100u64;
    for rep in 0..reps {
        let mut rng = stream_rng(808, rep);
        let series: Vec<u64> = (0..3 * 52 + 8 + monitored)
            .map(|_| baseline.sample(&mut rng))
            .collect();
        let run = run_detector(&series, &cfg).unwrap();
        if run.alarm_time.is_none() {
            quiet += 1;
        }
    }
    // roughly (1 - false alarm rate)^assessed with generous slack
    assert!(quiet >= 75, "no alarm in only {quiet}/{reps} replications");
}

/// Randomized PIT of one-step-ahead predictions under the true model is
/// uniform (chi-square at the 5% level).
#[test]
fn endemic_epidemic_pit_calibration() {
    let spec = EEModelSpec {
        shared_intercept: true,
        ..Default::default()
    };
    let truth = EEParams {
        ar: 0.35,
        neighbor: vec![],
        alpha: vec![6f64.ln()],
        sin_coef: vec![],
        cos_coef: vec![],
        phi: 0.15,
    };
    let panel = simulate_ee(&spec, &truth, 2, 1001, None, 2026).unwrap();
    let fit = EEFit {
        spec: spec.clone(),
        params: truth.clone(),
        se: truth.clone(),
        loglik: 0.0,
        converged: true,
        gradient_norm: 0.0,
        iterations: 0,
        boundary_ar: false,
    };
    let mut rng = stream_rng(2027, 0);
    let bins = 10usize;
    let mut counts = vec![0u32; bins];
    let mut total = 0u32;
    for t in 1..panel.horizon() {
        let preds = ee_predict_one_step(&fit, &panel, t).unwrap();
        for (i, p) in preds.iter().enumerate() {
            let y = panel.y[i][t];
            let f_lo = if y == 0 { 0.0 } else { p.cdf(y - 1) };
            let u = f_lo + rng.random::<f64>() * p.pmf(y);
            counts[((u * bins as f64) as usize).min(bins - 1)] += 1;
            total += 1;
        }
    }
    let expected = vec![total as f64 / bins as f64; bins];
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let chi2 = chi2_statistic(&observed, &expected);
    assert!(
        chi2 < chi2_critical_5(bins - 1),
        "PIT chi2 {chi2:.2} (counts {counts:?})"
    );
}

/// ABC with infinite epsilon and a gamma prior returns the prior
/// (KS at the 5% level against the gamma CDF).
#[test]
fn abc_with_infinite_epsilon_reproduces_gamma_prior() {
    use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
    let sim = |theta: &[f64], _rng: &mut rand_chacha::ChaCha12Rng| vec![theta[0]];
    let priors = [PriorDist::Gamma {
        shape: 2.5,
        rate: 1.2,
    }];
    let cfg = AbcConfig {
        epsilon: f64::INFINITY,
        draws: 10_000,
        pilot: 100,
    };
    let out = abc_rejection(sim, &[1.0], &priors, &cfg, 404).unwrap();
    let mut xs: Vec<f64> = out.draws.iter().map(|d| d[0]).collect();
    xs.sort_by(f64::total_cmp);
    let dist = GammaDist::new(2.5, 1.2).unwrap();
    let d = ks_statistic(&xs, |x| dist.cdf(x));
    assert!(d < ks_critical_5(xs.len()), "KS {d:.5}");
}

/// Infector attribution survives replay on every model variant.
#[test]
fn transmission_trees_replay_consistently() {
    for seed in 0..3u64 {
        let sir = GseParams::new(2.2, 1.0, 500).unwrap();
        simulate_gse(&sir, seed).unwrap().verify().unwrap();
        let fixed = GseParams::new(2.2, 1.0, 500).unwrap().with_fixed_period();
        simulate_gse(&fixed, seed).unwrap().verify().unwrap();
        let seir = GseParams::new(2.2, 1.0, 500)
            .unwrap()
            .with_latent_rate(1.5)
            .unwrap();
        simulate_gse(&seir, seed).unwrap().verify().unwrap();
    }
}
