//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them). Expected values are frozen from
//! independent oracles that live in this file or in `common`.

mod common;

use common::*;
use epikit::*;
use rand::Rng;

fn gse(lambda: f64, gamma: f64, n: u32) -> GseParams {
    GseParams::new(lambda, gamma, n).unwrap()
}

/// 1. Final-size law: mean Z/n over major outbreaks at R0 = 1.5, n = 10^4,
///    2000 replicates, within 0.02 of the final-size-equation root.
#[test]
fn criterion_01_final_size_law() {
    let tau = final_size_oracle(1.5);
    assert!((tau - 0.5828).abs() < 1e-4, "oracle sanity: {tau}");
    let summary = replicate(&gse(1.5, 1.0, 10_000), 2000, 20_260_101, 0.1).unwrap();
    let majors: Vec<f64> = summary
        .final_sizes
        .iter()
        .filter(|&&z| classify_major(z, 10_000, 0.1))
        .map(|&z| z as f64 / 10_000.0)
        .collect();
    assert!(majors.len() > 400, "only {} major outbreaks", majors.len());
    let m = mean(&majors);
    assert!(
        (m - tau).abs() < 0.02,
        "mean major fraction {m} vs tau {tau}"
    );
    println!(
        "ACCEPTANCE 1 PASS - mean Z/n over {} major outbreaks = {m:.4} (tau = {tau:.4}, tol 0.02)",
        majors.len()
    );
}

/// 2. CI calibration: R0_hat +/- 1.96 se covers 1.5 in 93..97% of major
///    outbreaks (c_v = 1, >= 1000 majors).
#[test]
fn criterion_02_ci_calibration() {
    let params = gse(1.5, 1.0, 10_000);
    let mut covered = 0usize;
    let mut majors = 0usize;
    for seed in 0..3600u64 {
        let log = simulate_gse(&params, seed).unwrap();
        let z = final_size(&log).unwrap();
        if !classify_major(z, 10_000, 0.1) {
            continue;
        }
        majors += 1;
        let est =
            estimate_r0_final_size(&FinalSizeObservation::new(10_000, z).unwrap(), 1.0).unwrap();
        if (est.point - 1.96 * est.se..=est.point + 1.96 * est.se).contains(&1.5) {
            covered += 1;
        }
    }
    assert!(majors >= 1000, "only {majors} major outbreaks");
    let coverage = covered as f64 / majors as f64;
    assert!(
        (0.93..=0.97).contains(&coverage),
        "coverage {coverage:.4} over {majors} majors"
    );
    println!("ACCEPTANCE 2 PASS - 95% CI coverage {coverage:.4} over {majors} major outbreaks");
}

/// 3. Sample-estimator consistency: m = n reduces exactly; with m = 100 in
///    n = 10^5 the sampling term carries > 90% of the variance.
#[test]
fn criterion_03_sample_estimator_consistency() {
    for &(n, z) in &[(1000u32, 500u32), (10_000, 2000), (777, 123)] {
        let whole = estimate_r0_final_size(&FinalSizeObservation::new(n, z).unwrap(), 1.0).unwrap();
        let sample = estimate_r0_sample(&SampleObservation::new(n, n, z).unwrap(), 1.0).unwrap();
        assert!((whole.point - sample.point).abs() < 1e-12);
        assert!((whole.se - sample.se).abs() < 1e-12);
        let wv = estimate_vc_final_size(&FinalSizeObservation::new(n, z).unwrap(), 1.0).unwrap();
        let sv = estimate_vc_sample(&SampleObservation::new(n, n, z).unwrap(), 1.0).unwrap();
        assert!((wv.point - sv.point).abs() < 1e-12);
        assert!((wv.se - sv.se).abs() < 1e-12);
    }
    // worked example at m = 100 << n = 10^5, Z_m = 50
    let n = 100_000u32;
    let sample = estimate_r0_sample(&SampleObservation::new(n, 100, 50).unwrap(), 1.0).unwrap();
    // the first variance term equals the whole-population variance at the
    // same infected fraction
    let pop = estimate_r0_final_size(&FinalSizeObservation::new(n, n / 2).unwrap(), 1.0).unwrap();
    let sampling_share = 1.0 - (pop.se * pop.se) / (sample.se * sample.se);
    assert!(
        sampling_share > 0.90,
        "sampling term carries only {sampling_share:.4} of the variance"
    );
    println!(
        "ACCEPTANCE 3 PASS - m=n reduction exact to 1e-12; sampling share {sampling_share:.4} > 0.90"
    );
}

/// 4. Euler-Lotka analytic identities and the r <-> R0 round trip.
#[test]
fn criterion_04_euler_lotka_identities() {
    for &(r0, gamma) in &[(1.2, 0.5), (1.5, 1.0), (2.0, 1.0), (3.0, 2.0), (0.8, 1.0)] {
        let g = GenerationTimeDist::Exponential { rate: gamma };
        let r = euler_lotka_r(r0, &g).unwrap();
        assert!(
            (r - gamma * (r0 - 1.0)).abs() < 1e-8,
            "exponential identity at R0={r0}"
        );
    }
    for &(r0, tg) in &[(1.5, 0.8), (2.0, 1.0), (4.0, 2.5)] {
        let g = GenerationTimeDist::Fixed { value: tg };
        let r = euler_lotka_r(r0, &g).unwrap();
        assert!((r - r0.ln() / tg).abs() < 1e-8, "fixed identity at R0={r0}");
    }
    for &(shape, rate, r0) in &[(2.0, 2.0, 1.7), (3.5, 1.2, 2.4), (1.5, 3.0, 0.7)] {
        let g = GenerationTimeDist::Gamma { shape, rate };
        let r = euler_lotka_r(r0, &g).unwrap();
        let back = r0_from_growth(r, &g).unwrap();
        assert!((back - r0).abs() < 1e-8, "round trip at R0={r0}");
    }
    println!("ACCEPTANCE 4 PASS - exponential/fixed identities and gamma round trips to 1e-8");
}

/// 5. Backward-interval bias: in growth-phase windows of supercritical
///    outbreaks, pooled backward intervals are shorter than pooled forward
///    generation intervals (one-sided test at the 5% level).
#[test]
fn criterion_05_backward_interval_bias() {
    let params = gse(2.0, 1.0, 100_000);
    let mut fw = Vec::new();
    let mut bw = Vec::new();
    let mut used = 0;
    for seed in 0..1000u64 {
        // stop at 20% cumulative incidence: the 1-5% window plus room for
        // the window cohort's offspring
        let log = simulate_gse_capped(&params, seed, 20_000).unwrap();
        if log.infection_count() < 20_000 {
            continue; // minor outbreak, growth phase never happened
        }
        let window = growth_phase_window(&log, 0.01, 0.05).unwrap();
        let iv = extract_intervals(&log, None, Some(window)).unwrap();
        fw.extend(iv.forward);
        bw.extend(iv.backward);
        used += 1;
    }
    assert!(used >= 300, "only {used} supercritical runs");
    let z = welch_z(&fw, &bw);
    assert!(
        z > 1.645,
        "one-sided z = {z:.2} (forward mean {:.4}, backward mean {:.4})",
        mean(&fw),
        mean(&bw)
    );
    println!(
        "ACCEPTANCE 5 PASS - backward mean {:.4} < forward mean {:.4} over {used} runs (z = {z:.1})",
        mean(&bw),
        mean(&fw)
    );
}

/// 6. ABC exactness: Reed-Frost n = 3, final-size summary, epsilon = 0,
///    uniform prior on p; accepted sample within total variation 0.05 of
///    the enumerated posterior at N = 10^5.
#[test]
fn criterion_06_abc_exactness() {
    // enumeration of the chain: P(Z=1) = (1-p)^2, P(Z=2) = 2p(1-p)^2,
    // P(Z=3) = p^2 (3 - 2p)
    let observed_z = 2.0;
    let chain_prob = |p: f64| 2.0 * p * (1.0 - p) * (1.0 - p);
    let rf = |p: f64, rng: &mut rand_chacha::ChaCha12Rng| -> f64 {
        let sub_seed = rng.random::<u64>();
        let gens = simulate_reed_frost(&ReedFrostParams { n: 3, p, i0: 1 }, sub_seed).unwrap();
        gens.iter().sum::<u32>() as f64
    };
    let cfg = AbcConfig {
        epsilon: 0.0,
        draws: 100_000,
        pilot: 200,
    };
    let priors = [PriorDist::Uniform { lo: 0.0, hi: 1.0 }];
    let out = abc_rejection(
        |theta, rng| vec![rf(theta[0], rng)],
        &[observed_z],
        &priors,
        &cfg,
        20_260_106,
    )
    .unwrap();
    assert!(out.draws.len() > 10_000, "accepted {}", out.draws.len());
    // binned total variation against the exact posterior
    let bins = 20;
    let norm = simpson(chain_prob, 0.0, 1.0, 2000);
    let mut tv = 0.0;
    for b in 0..bins {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        let exact = simpson(chain_prob, lo, hi, 200) / norm;
        let got = out.draws.iter().filter(|d| d[0] >= lo && d[0] < hi).count() as f64
            / out.draws.len() as f64;
        tv += 0.5 * (exact - got).abs();
    }
    assert!(tv < 0.05, "total variation {tv:.4}");
    println!(
        "ACCEPTANCE 6 PASS - ABC posterior TV {tv:.4} < 0.05 ({} accepted of 10^5)",
        out.draws.len()
    );
}

/// 7. DA-MCMC: the fixed-latent conditional of gamma is the exact
///    Gamma(a + #recoveries, b + int I) (KS at 5%), and on a tiny outbreak
///    the posterior means match a quadrature oracle within 2 MC errors.
#[test]
fn criterion_07_da_mcmc_exactness() {
    use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};
    // (a) conjugacy with the latent update disabled
    let removals = [0.9, 1.7, 2.2, 3.1];
    let (a_gamma, b_gamma) = (2.0, 1.5);
    let prior_l = PriorDist::Gamma {
        shape: 2.0,
        rate: 1.0,
    };
    let prior_g = PriorDist::Gamma {
        shape: a_gamma,
        rate: b_gamma,
    };
    let cfg = DaMcmcConfig {
        iterations: 10_000,
        burn_in_fraction: 0.0,
        thin: 1,
        update_latent: false,
    };
    let out = da_mcmc_gse(&removals, 30, &prior_l, &prior_g, &cfg, 77).unwrap();
    // int I = sum (removal - infection) for the documented initial latent
    // configuration t_j = min(r_0, r_j) / 2, index at 0
    let mut sorted = removals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut int_i = sorted[0];
    for j in 1..sorted.len() {
        int_i += sorted[j] - 0.5 * sorted[0].min(sorted[j]);
    }
    let shape = a_gamma + sorted.len() as f64;
    let rate = b_gamma + int_i;
    let dist = GammaDist::new(shape, rate).unwrap();
    let mut draws: Vec<f64> = out.draws.iter().map(|d| d[1]).collect();
    draws.sort_by(f64::total_cmp);
    let d = ks_statistic(&draws, |x| dist.cdf(x));
    assert!(
        d < ks_critical_5(draws.len()),
        "KS {d:.5} vs critical {:.5}",
        ks_critical_5(draws.len())
    );

    // (b) tiny outbreak: n = 3, removals (1.0, 1.5), index infected at 0,
    // one latent infection time u in (0, r1) with support u < r0.
    // Marginalizing lambda and gamma under Gamma(2,2) priors:
    //   p(u) prop (b_g + r0 + r1 - u)^-(a_g + 2)  on (0, r0)
    //   E[gamma] = E_u[(a_g + 2) / (b_g + r0 + r1 - u)]
    //   E[lambda] = (a_l + 1) / (b_l + (r0 + r1)/3)   (int SI/n is u-free)
    let (r0, r1) = (1.0, 1.5);
    let (al, bl, ag, bg) = (2.0, 2.0, 2.0, 2.0);
    let weight = |u: f64| (bg + r0 + r1 - u).powi(-4);
    let norm = simpson(weight, 0.0, r0, 4000);
    let e_gamma = simpson(
        |u| (ag + 2.0) / (bg + r0 + r1 - u) * weight(u),
        0.0,
        r0,
        4000,
    ) / norm;
    let e_u = simpson(|u| u * weight(u), 0.0, r0, 4000) / norm;
    let e_lambda = (al + 1.0) / (bl + (r0 + r1) / 3.0);

    let cfg = DaMcmcConfig {
        iterations: 200_000,
        burn_in_fraction: 0.2,
        thin: 1,
        update_latent: true,
    };
    let out = da_mcmc_gse(
        &[r0, r1],
        3,
        &PriorDist::Gamma {
            shape: al,
            rate: bl,
        },
        &PriorDist::Gamma {
            shape: ag,
            rate: bg,
        },
        &cfg,
        20_260_107,
    )
    .unwrap();
    let rows = posterior_summary(&out, 0.95).unwrap();
    let n_draws = out.draws.len() as f64;
    for (row, target, label) in [(&rows[0], e_lambda, "lambda"), (&rows[1], e_gamma, "gamma")] {
        let sd = {
            let xs: Vec<f64> = out
                .draws
                .iter()
                .map(|d| d[if label == "lambda" { 0 } else { 1 }])
                .collect();
            variance(&xs).sqrt()
        };
        let mc_se = sd / row.ess.min(n_draws).sqrt();
        assert!(
            (row.mean - target).abs() <= 2.0 * mc_se,
            "{label}: chain {:.5} vs oracle {target:.5} (2 mc se = {:.5})",
            row.mean,
            2.0 * mc_se
        );
    }
    // latent mean against the same oracle
    let latents: Vec<f64> = out.latent.as_ref().unwrap().iter().map(|l| l[0]).collect();
    let lat_mean = mean(&latents);
    let lat_se = variance(&latents).sqrt() / (latents.len() as f64 / 50.0).sqrt();
    assert!(
        (lat_mean - e_u).abs() <= 3.0 * lat_se,
        "latent mean {lat_mean:.5} vs oracle {e_u:.5}"
    );
    println!(
        "ACCEPTANCE 7 PASS - conjugacy KS {d:.4}; quadrature match: lambda {:.4}/{e_lambda:.4}, gamma {:.4}/{e_gamma:.4}",
        rows[0].mean, rows[1].mean
    );
}

/// 8. Two-patch integrator: global S + I + int(gamma I) conserved to 1e-9
///    over [0, 50] and empirical convergence order >= 3.5.
#[test]
fn criterion_08_two_patch_conservation_and_order() {
    let params = PatchParams {
        lambda: 1.5,
        gamma: 1.0,
        m_move: 0.1,
        n: 1000.0,
        init: [700.0, 5.0, 290.0, 5.0],
    };
    let traj = simulate_two_patch(&params, 50.0, 0.01).unwrap();
    let total0: f64 = traj.states[0].iter().sum();
    let mut worst = 0.0f64;
    for s in &traj.states {
        worst = worst.max((s.iter().sum::<f64>() - total0).abs());
    }
    assert!(worst < 1e-9, "conservation drift {worst:.3e}");

    let endpoint = |dt: f64| {
        *simulate_two_patch(&params, 8.0, dt)
            .unwrap()
            .states
            .last()
            .unwrap()
    };
    let reference = endpoint(0.0005);
    let dts = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            endpoint(dt)
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let xm = mean(&xs);
    let ym = mean(&ys);
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!(slope >= 3.5, "observed order {slope:.2}");
    println!(
        "ACCEPTANCE 8 PASS - conservation drift {worst:.2e} < 1e-9, observed order {slope:.2}"
    );
}

/// 9. Surveillance: in-control false-alarm rate <= 2(1-q) per monitored
///    week, and an injected x5 step is flagged within 3 weeks in >= 90% of
///    200 replications.
#[test]
fn criterion_09_surveillance_calibration_and_power() {
    let cfg = FarringtonConfig {
        years_back: 3,
        ..Default::default()
    };
    let baseline = NegBin::new(10.0, 0.1).unwrap();
    // (a) calibration on a stationary series with 1000 monitored weeks
    let mut rng = stream_rng(20_260_109, 0);
    let series: Vec<u64> = (0..3 * 52 + 8 + 1000)
        .map(|_| baseline.sample(&mut rng))
        .collect();
    let run = run_detector(&series, &cfg).unwrap();
    let mut assessed = 0u32;
    let mut alarms = 0u32;
    for a in &run.assessments {
        if let FarringtonStatus::Assessed { alarm, .. } = a.status {
            assessed += 1;
            if alarm {
                alarms += 1;
            }
        }
    }
    assert!(assessed >= 1000, "only {assessed} assessable weeks");
    let rate = alarms as f64 / assessed as f64;
    let bound = 2.0 * (1.0 - cfg.quantile);
    assert!(rate <= bound, "false alarm rate {rate:.4} > {bound:.4}");

    // (b) power against an injected x5 step
    let spike = NegBin::new(50.0, 0.1).unwrap();
    let mut hits = 0;
    for rep in 0..200u64 {
        let mut rng = stream_rng(20_260_110, rep);
        let history = 3 * 52 + 8;
        let mut series: Vec<u64> = (0..history).map(|_| baseline.sample(&mut rng)).collect();
        let s0 = series.len();
        for _ in 0..10 {
            series.push(spike.sample(&mut rng));
        }
        let run = run_detector(&series, &cfg).unwrap();
        let flagged = run.assessments[s0..=s0 + 3]
            .iter()
            .any(|a| matches!(a.status, FarringtonStatus::Assessed { alarm: true, .. }));
        if flagged {
            hits += 1;
        }
    }
    assert!(
        hits >= 180,
        "step detected within 3 weeks in {hits}/200 runs"
    );
    println!(
        "ACCEPTANCE 9 PASS - false-alarm rate {rate:.4} <= {bound:.4}; step detected in {hits}/200 runs"
    );
}

/// 10. Endemic-epidemic model: parameter recovery coverage >= 90%, the
///     Poisson limit of the NegBin likelihood, and log-score propriety.
#[test]
fn criterion_10_endemic_epidemic_recovery() {
    let spec = EEModelSpec {
        shared_intercept: true,
        ..Default::default()
    };
    let truth = EEParams {
        ar: 0.4,
        neighbor: vec![],
        alpha: vec![5f64.ln()],
        sin_coef: vec![],
        cos_coef: vec![],
        phi: 0.2,
    };
    let (mut cov_ar, mut cov_alpha, mut cov_phi) = (0, 0, 0);
    let reps = 100;
    for rep in 0..reps {
        let panel = simulate_ee(&spec, &truth, 4, 300, None, 40_000 + rep).unwrap();
        let fit = ee_fit(&panel, &spec).unwrap();
        let inside = |x: f64, se: f64, t: f64| se.is_finite() && (x - t).abs() <= 1.96 * se;
        if inside(fit.params.ar, fit.se.ar, 0.4) {
            cov_ar += 1;
        }
        if inside(fit.params.alpha[0], fit.se.alpha[0], 5f64.ln()) {
            cov_alpha += 1;
        }
        if inside(fit.params.phi, fit.se.phi, 0.2) {
            cov_phi += 1;
        }
    }
    assert!(cov_ar >= 90, "ar coverage {cov_ar}/{reps}");
    assert!(cov_alpha >= 90, "alpha coverage {cov_alpha}/{reps}");
    assert!(cov_phi >= 90, "phi coverage {cov_phi}/{reps}");

    // Poisson limit of the likelihood as phi -> 0
    let panel = simulate_ee(&spec, &truth, 1, 40, None, 99).unwrap();
    let p0 = EEParams {
        ar: 0.0,
        phi: 1e-12,
        alpha: vec![2f64.ln()],
        ..truth.clone()
    };
    let ll = ee_loglik(&panel, &spec, &p0).unwrap();
    let pois: f64 = panel.y[0][1..]
        .iter()
        .map(|&y| y as f64 * 2f64.ln() - 2.0 - statrs::function::factorial::ln_factorial(y))
        .sum();
    assert!(
        (ll - pois).abs() < 1e-6,
        "Poisson limit gap {}",
        (ll - pois).abs()
    );

    // propriety: the true model beats a mean-shifted competitor
    let shifted = EEParams {
        alpha: vec![5f64.ln() + 1.4f64.ln()],
        ..truth.clone()
    };
    let as_fit = |p: &EEParams| EEFit {
        spec: spec.clone(),
        params: p.clone(),
        se: p.clone(),
        loglik: 0.0,
        converged: true,
        gradient_norm: 0.0,
        iterations: 0,
        boundary_ar: false,
    };
    let mut wins = 0;
    for rep in 0..100 {
        let panel = simulate_ee(&spec, &truth, 2, 100, None, 60_000 + rep).unwrap();
        let good = mean_log_score(&as_fit(&truth), &panel, 1).unwrap();
        let bad = mean_log_score(&as_fit(&shifted), &panel, 1).unwrap();
        if good < bad {
            wins += 1;
        }
    }
    assert!(wins >= 95, "true model preferred in {wins}/100 runs");
    println!(
        "ACCEPTANCE 10 PASS - coverage ar/alpha/phi {cov_ar}/{cov_alpha}/{cov_phi} of {reps}; Poisson limit 1e-6; propriety {wins}/100"
    );
}

/// 11. Household likelihood: hand-computed micro-examples are exact and the
///     MLE recovers (lambda_H, lambda_G) within 3 se in >= 95% of 200
///     simulated datasets.
#[test]
fn criterion_11_household_likelihood_and_mle() {
    use epikit::households::{HouseholdEvent, HouseholdEventKind};
    // micro-example: household of 2, infection at t = 1, t_obs = 1
    let data = HouseholdOutbreakData {
        events: vec![
            HouseholdEvent {
                time: 0.0,
                kind: HouseholdEventKind::Index,
                household: 0,
            },
            HouseholdEvent {
                time: 1.0,
                kind: HouseholdEventKind::Infection,
                household: 0,
            },
        ],
        sizes: vec![2],
        t_obs: 1.0,
    };
    let a = household_loglik(&data, 1.0, 0.0, 2).unwrap();
    let b = household_loglik(&data, 0.0, 2.0, 2).unwrap();
    assert_eq!(a, -1.0, "hand value (lambda_H route): {a}");
    assert_eq!(b, -1.0, "hand value (lambda_G route): {b}");

    let truth = HouseholdParams {
        lambda_h: 2.0,
        lambda_g: 1.0,
        gamma: 1.0,
        sizes: vec![3; 500],
    };
    let n = truth.n();
    let (mut ok_h, mut ok_g, mut used) = (0, 0, 0);
    let mut rep = 0u64;
    while used < 200 {
        let data = simulate_households(&truth, 300_000 + rep).unwrap();
        rep += 1;
        if data.final_size() < 30 {
            continue; // too little information to fit
        }
        used += 1;
        let fit = household_mle(&data, n).unwrap();
        if fit.boundary.is_none() {
            if (fit.lambda_h.point - 2.0).abs() < 3.0 * fit.lambda_h.se {
                ok_h += 1;
            }
            if (fit.lambda_g.point - 1.0).abs() < 3.0 * fit.lambda_g.se {
                ok_g += 1;
            }
        }
    }
    assert!(ok_h >= 190, "lambda_H within 3 se in {ok_h}/200");
    assert!(ok_g >= 190, "lambda_G within 3 se in {ok_g}/200");
    println!(
        "ACCEPTANCE 11 PASS - hand values exact; 3-se recovery lambda_H {ok_h}/200, lambda_G {ok_g}/200"
    );
}
