//! Subcommand implementations: wire files and flags into the library and
//! render CSV payloads plus diagnostics.

use std::fs;
use std::fs::File;
use std::io::BufReader;

use rand::Rng;

use epikit::households::{household_final_size_enum, household_loglik, household_mle};
use epikit::io as eio;
use epikit::*;

use crate::args::*;
use crate::util::*;

fn open(path: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let emitter = Emitter::new("simulate", args, Some(args.seed));
    match args.model.as_str() {
        "gse" => {
            let lambda = args
                .lambda
                .ok_or_else(|| Error::invalid("--lambda is required for the gse model"))?;
            let gamma = args
                .gamma
                .ok_or_else(|| Error::invalid("--gamma is required for the gse model"))?;
            let mut params = GseParams::new(lambda, gamma, args.n)?;
            if args.fixed_period {
                params = params.with_fixed_period();
            }
            if let Some(rate) = args.latent_rate {
                params = params.with_latent_rate(rate)?;
            }
            match args.replicates {
                None => {
                    let log = simulate_gse(&params, args.seed)?;
                    let mut buf = Vec::new();
                    eio::write_event_log(&log, &mut buf)?;
                    emitter.emit(&args.output, &buf)
                }
                Some(r) => {
                    let summary = replicate(&params, r, args.seed, args.cutoff)?;
                    let mut buf = Vec::new();
                    {
                        use std::io::Write;
                        writeln!(buf, "replicate,final_size,major")?;
                        for (i, &z) in summary.final_sizes.iter().enumerate() {
                            writeln!(buf, "{i},{z},{}", classify_major(z, args.n, args.cutoff))?;
                        }
                    }
                    emitter.emit_with_extra(
                        &args.output,
                        &buf,
                        serde_json::json!({ "major_fraction": summary.major_fraction }),
                    )
                }
            }
        }
        "reed-frost" => {
            let p = args
                .p
                .ok_or_else(|| Error::invalid("--p is required for the reed-frost model"))?;
            let params = ReedFrostParams {
                n: args.n,
                p,
                i0: args.i0,
            };
            let gens = simulate_reed_frost(&params, args.seed)?;
            let mut buf = Vec::new();
            {
                use std::io::Write;
                writeln!(buf, "generation,infectives")?;
                for (g, i) in gens.iter().enumerate() {
                    writeln!(buf, "{g},{i}")?;
                }
            }
            let total: u32 = gens.iter().sum();
            emitter.emit_with_extra(
                &args.output,
                &buf,
                serde_json::json!({ "total_infected": total }),
            )
        }
        other => Err(Error::invalid(format!("unknown model `{other}`"))),
    }
}

pub fn estimate(args: &EstimateArgs) -> Result<()> {
    let emitter = Emitter::new("estimate", args, None);
    let mut rows: Vec<(String, f64, f64, String)> = Vec::new();
    let mut add = |name: &str, e: &Estimate| {
        rows.push((name.into(), e.point, e.se, e.formula_id.into()));
    };
    // resolve flag sets (possibly from a one-row CSV)
    let (mut n, mut z, mut n_immune, mut m, mut zm) =
        (args.n, args.z, args.n_immune, args.m, args.zm);
    if let Some(path) = &args.input {
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty input".into(),
        })?;
        let row = lines.next().ok_or(Error::Parse {
            line: 2,
            msg: "expected one data row".into(),
        })?;
        if lines.next().is_some() {
            return Err(Error::Parse {
                line: 3,
                msg: "estimate input must contain exactly one data row".into(),
            });
        }
        let vals: Vec<&str> = row.split(',').collect();
        let get = |i: usize| -> Result<u32> {
            vals.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or(Error::Parse {
                    line: 2,
                    msg: format!("bad field {i}"),
                })
        };
        match header.trim() {
            "n,z" => (n, z) = (Some(get(0)?), Some(get(1)?)),
            "n,z,n_immune" => {
                (n, z) = (Some(get(0)?), Some(get(1)?));
                n_immune = get(2)?;
            }
            "n,m,zm" => (n, m, zm) = (Some(get(0)?), Some(get(1)?), Some(get(2)?)),
            other => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unknown estimate schema `{other}`"),
                })
            }
        }
    }
    match (args.pairs, n, m) {
        (Some(k), _, _) => {
            let infected = args
                .infected
                .ok_or_else(|| Error::invalid("--infected is required with --pairs"))?;
            let exp = PairExperiment { pairs: k, infected };
            let p = estimate_pair_prob(&exp)?;
            add("p", &p);
            if let Some(m_local) = args.m_local {
                let r0 = r0_from_local_contacts(p.point, m_local)?;
                rows.push(("R0".into(), r0, m_local as f64 * p.se, "r0_local_mp".into()));
            }
        }
        (None, Some(n), Some(m)) => {
            let zm = zm.ok_or_else(|| Error::invalid("--zm is required with --m"))?;
            let obs = SampleObservation::new(n, m, zm)?;
            add("R0", &estimate_r0_sample(&obs, args.cv)?);
            add("vc", &estimate_vc_sample(&obs, args.cv)?);
        }
        (None, Some(n), None) => {
            let z = z.ok_or_else(|| Error::invalid("--z is required with --n"))?;
            let obs = FinalSizeObservation::with_immune(n, z, n_immune)?;
            add("R0", &estimate_r0_final_size(&obs, args.cv)?);
            add("vc", &estimate_vc_final_size(&obs, args.cv)?);
        }
        _ => {
            return Err(Error::invalid(
                "estimate needs --n/--z, --n/--m/--zm, --pairs/--infected, or --input",
            ))
        }
    }
    let mut buf = Vec::new();
    eio::write_estimates(&rows, &mut buf)?;
    emitter.emit(&args.output, &buf)
}

pub fn multitype(args: &MultitypeArgs) -> Result<()> {
    let emitter = Emitter::new("multitype", args, None);
    let pi = parse_f64_list(&args.pi, "pi")?;
    let lambda = parse_matrix(&args.lambda, "lambda")?;
    let gamma = parse_f64_list(&args.gamma, "gamma")?;
    let mut buf = Vec::new();
    use std::io::Write;
    match &args.observed {
        None => {
            let cfg = MultitypeConfig::new(pi, lambda, gamma)?;
            let tau = multitype_final_size_solve(&cfg)?;
            let r0 = ngm_r0(&cfg)?;
            writeln!(buf, "quantity,value")?;
            for (i, t) in tau.iter().enumerate() {
                writeln!(buf, "tau_{i},{}", eio::fmt_g9(*t))?;
            }
            writeln!(buf, "r0,{}", eio::fmt_g9(r0))?;
        }
        Some(observed) => {
            let observed = parse_f64_list(observed, "observed")?;
            let free_spec = args
                .free
                .as_ref()
                .ok_or_else(|| Error::invalid("--free is required with --observed"))?;
            let free: Vec<(usize, usize)> = free_spec
                .split(';')
                .map(|pair| -> Result<(usize, usize)> {
                    let idx = parse_f64_list(pair, "free index")?;
                    if idx.len() != 2 {
                        return Err(Error::invalid(format!("bad free entry `{pair}`")));
                    }
                    Ok((idx[0] as usize, idx[1] as usize))
                })
                .collect::<Result<_>>()?;
            let init = match &args.init {
                Some(s) => parse_f64_list(s, "init")?,
                None => vec![1.0; free.len()],
            };
            let base = MultitypeConfig::new(pi, lambda, gamma)?;
            let template = |theta: &[f64]| {
                let mut cfg = base.clone();
                for (slot, &(i, j)) in free.iter().enumerate() {
                    cfg.lambda[i][j] = theta[slot];
                }
                cfg
            };
            let fit = multitype_calibrate(&observed, template, &init)?;
            writeln!(buf, "quantity,value")?;
            for (slot, &(i, j)) in free.iter().enumerate() {
                writeln!(buf, "lambda_{i}_{j},{}", eio::fmt_g9(fit.params[slot]))?;
            }
            writeln!(buf, "r0,{}", eio::fmt_g9(fit.r0))?;
            writeln!(
                buf,
                "residual_inf_norm,{}",
                eio::fmt_g9(fit.residual_inf_norm)
            )?;
        }
    }
    emitter.emit(&args.output, &buf)
}

fn load_sizes(spec: &str) -> Result<Vec<u32>> {
    if let Some(path) = spec.strip_prefix('@') {
        eio::read_household_sizes(open(path)?)
    } else {
        parse_u32_list(spec, "household size")
    }
}

pub fn household(cmd: &HouseholdCmd) -> Result<()> {
    match cmd {
        HouseholdCmd::Simulate(args) => {
            let emitter = Emitter::new("household simulate", args, Some(args.seed));
            let params = HouseholdParams {
                lambda_h: args.lambda_h,
                lambda_g: args.lambda_g,
                gamma: args.gamma,
                sizes: load_sizes(&args.sizes)?,
            };
            let data = simulate_households(&params, args.seed)?;
            if let Some(path) = &args.sizes_out {
                let mut sbuf = Vec::new();
                eio::write_household_sizes(&data.sizes, &mut sbuf)?;
                write_atomic(std::path::Path::new(path), &sbuf)?;
            }
            let mut buf = Vec::new();
            eio::write_household_events(&data, &mut buf)?;
            emitter.emit_with_extra(
                &args.output,
                &buf,
                serde_json::json!({ "final_size": data.final_size(), "t_obs": data.t_obs }),
            )
        }
        HouseholdCmd::Loglik(args) => {
            let emitter = Emitter::new("household loglik", args, None);
            let sizes = eio::read_household_sizes(open(&args.sizes)?)?;
            let data = eio::read_household_events(open(&args.data)?, sizes, args.t_obs)?;
            let n = args.n.unwrap_or_else(|| data.n());
            let ll = household_loglik(&data, args.lambda_h, args.lambda_g, n)?;
            let mut buf = Vec::new();
            use std::io::Write;
            writeln!(buf, "quantity,value")?;
            writeln!(buf, "loglik,{}", eio::fmt_g9(ll))?;
            writeln!(buf, "impossible_data,{}", ll == f64::NEG_INFINITY)?;
            emitter.emit(&args.output, &buf)
        }
        HouseholdCmd::Mle(args) => {
            let emitter = Emitter::new("household mle", args, None);
            let sizes = eio::read_household_sizes(open(&args.sizes)?)?;
            let data = eio::read_household_events(open(&args.data)?, sizes, args.t_obs)?;
            let n = args.n.unwrap_or_else(|| data.n());
            let fit = household_mle(&data, n)?;
            let rows = vec![
                (
                    "lambda_h".to_string(),
                    fit.lambda_h.point,
                    fit.lambda_h.se,
                    fit.lambda_h.formula_id.to_string(),
                ),
                (
                    "lambda_g".to_string(),
                    fit.lambda_g.point,
                    fit.lambda_g.se,
                    fit.lambda_g.formula_id.to_string(),
                ),
            ];
            let mut buf = Vec::new();
            eio::write_estimates(&rows, &mut buf)?;
            emitter.emit_with_extra(
                &args.output,
                &buf,
                serde_json::json!({ "loglik": fit.loglik, "boundary": fit.boundary }),
            )
        }
        HouseholdCmd::Enum(args) => {
            let emitter = Emitter::new("household enum", args, None);
            let dist = household_final_size_enum(args.size, args.pair_prob)?;
            let mut buf = Vec::new();
            use std::io::Write;
            writeln!(buf, "z,probability")?;
            for (i, p) in dist.iter().enumerate() {
                writeln!(buf, "{},{}", i + 1, eio::fmt_g9(*p))?;
            }
            emitter.emit(&args.output, &buf)
        }
    }
}

pub fn patches(args: &PatchesArgs) -> Result<()> {
    let emitter = Emitter::new("patches", args, None);
    let init = parse_f64_list(&args.init, "initial state")?;
    if init.len() != 4 {
        return Err(Error::invalid("--init needs S1,I1,S2,I2"));
    }
    let params = PatchParams {
        lambda: args.lambda,
        gamma: args.gamma,
        m_move: args.m_move,
        n: args.n,
        init: [init[0], init[1], init[2], init[3]],
    };
    let traj = simulate_two_patch(&params, args.t_end, args.dt)?;
    let mut buf = Vec::new();
    eio::write_patch_trajectory(&traj, &mut buf)?;
    emitter.emit(&args.output, &buf)
}

pub fn growth_rate(args: &GrowthRateArgs) -> Result<()> {
    let emitter = Emitter::new("growth-rate", args, None);
    let counts = eio::read_incidence(open(&args.input)?)?;
    let series = IncidenceSeries::new(counts, args.period)?;
    let window = match &args.window {
        Some(w) => {
            let (a, b) = parse_window(w)?;
            a..b
        }
        None => 0..series.counts.len(),
    };
    let method = match args.method.as_str() {
        "count" => GrowthMethod::CountRegression,
        "log-ls" => GrowthMethod::LogLeastSquares,
        other => return Err(Error::invalid(format!("unknown method `{other}`"))),
    };
    let est = estimate_growth_rate(&series, window, method)?;
    let rows = vec![(
        "r".to_string(),
        est.r,
        est.se,
        match method {
            GrowthMethod::CountRegression => "growth_count_regression".to_string(),
            GrowthMethod::LogLeastSquares => "growth_log_least_squares".to_string(),
        },
    )];
    let mut buf = Vec::new();
    eio::write_estimates(&rows, &mut buf)?;
    emitter.emit(&args.output, &buf)
}

pub fn euler_lotka(args: &EulerLotkaArgs) -> Result<()> {
    let emitter = Emitter::new("euler-lotka", args, None);
    let g = parse_gen_dist(&args.gen_dist)?;
    let mut buf = Vec::new();
    use std::io::Write;
    writeln!(buf, "quantity,value")?;
    match (args.r0, args.r) {
        (Some(r0), None) => {
            let r = euler_lotka_r(r0, &g)?;
            writeln!(buf, "r,{}", eio::fmt_g9(r))?;
        }
        (None, Some(r)) => {
            let r0 = r0_from_growth(r, &g)?;
            writeln!(buf, "r0,{}", eio::fmt_g9(r0))?;
        }
        _ => return Err(Error::invalid("give exactly one of --r0 or --r")),
    }
    emitter.emit(&args.output, &buf)
}

pub fn intervals(args: &IntervalsArgs) -> Result<()> {
    let emitter = Emitter::new("intervals", args, Some(args.seed));
    let log = eio::read_event_log(open(&args.log)?, args.n)?;
    let window = if args.auto_window {
        match growth_phase_window(&log, 0.01, 0.05) {
            Some(w) => Some(w),
            None => {
                return Err(Error::domain(
                    "outbreak never reached 1% cumulative incidence; no growth-phase window",
                ))
            }
        }
    } else {
        match &args.window {
            Some(w) => Some(parse_time_window(w)?),
            None => None,
        }
    };
    let offset = match &args.offset_dist {
        Some(spec) => Some(parse_gen_dist(spec)?),
        None => None,
    };
    let iv = extract_intervals(&log, offset.as_ref().map(|d| (d, args.seed)), window)?;
    let mut buf = Vec::new();
    eio::write_intervals(
        &[
            ("forward", iv.forward.as_slice()),
            ("serial", iv.serial.as_slice()),
            ("backward", iv.backward.as_slice()),
        ],
        &mut buf,
    )?;
    emitter.emit(&args.output, &buf)
}

pub fn abc(args: &AbcArgs) -> Result<()> {
    let emitter = Emitter::new("abc", args, Some(args.seed));
    let kinds: Vec<SummaryKind> = args
        .summaries
        .split(',')
        .map(|s| SummaryKind::parse(s.trim()))
        .collect::<Result<_>>()?;
    let observed: Vec<f64> = match (&args.observed, &args.observed_log) {
        (Some(vals), None) => parse_f64_list(vals, "observed summary")?,
        (None, Some(path)) => {
            let log = eio::read_event_log(open(path)?, args.n)?;
            summarize_log(&log, &kinds)
        }
        _ => {
            return Err(Error::invalid(
                "give exactly one of --observed or --observed-log",
            ))
        }
    };
    let cfg = AbcConfig {
        epsilon: args.epsilon,
        draws: args.draws,
        pilot: args.pilot,
    };
    let (mut sample, names) = match args.model.as_str() {
        "gse" => {
            let prior_l = parse_prior(
                args.prior_lambda
                    .as_deref()
                    .ok_or_else(|| Error::invalid("--prior-lambda is required for gse"))?,
            )?;
            let n = args.n;
            match (&args.prior_gamma, args.gamma) {
                (Some(pg), None) => {
                    let prior_g = parse_prior(pg)?;
                    let kinds2 = kinds.clone();
                    let sample = abc_rejection(
                        move |theta, rng| {
                            let params = match GseParams::new(theta[0], theta[1], n) {
                                Ok(p) => p,
                                Err(_) => return vec![f64::INFINITY; kinds2.len()],
                            };
                            let sub = rng.random::<u64>();
                            let log = simulate_gse(&params, sub).expect("validated");
                            summarize_log(&log, &kinds2)
                        },
                        &observed,
                        &[prior_l, prior_g],
                        &cfg,
                        args.seed,
                    )?;
                    (sample, vec!["lambda".to_string(), "gamma".to_string()])
                }
                (None, Some(gamma)) => {
                    let kinds2 = kinds.clone();
                    let sample = abc_rejection(
                        move |theta, rng| {
                            let params = match GseParams::new(theta[0], gamma, n) {
                                Ok(p) => p,
                                Err(_) => return vec![f64::INFINITY; kinds2.len()],
                            };
                            let sub = rng.random::<u64>();
                            let log = simulate_gse(&params, sub).expect("validated");
                            summarize_log(&log, &kinds2)
                        },
                        &observed,
                        &[prior_l],
                        &cfg,
                        args.seed,
                    )?;
                    (sample, vec!["lambda".to_string()])
                }
                _ => {
                    return Err(Error::invalid(
                        "gse model needs either --prior-gamma or a fixed --gamma",
                    ))
                }
            }
        }
        "reed-frost" => {
            if kinds != vec![SummaryKind::FinalSize] {
                return Err(Error::invalid(
                    "the reed-frost model supports the final-size summary",
                ));
            }
            let prior_p = parse_prior(
                args.prior_p
                    .as_deref()
                    .ok_or_else(|| Error::invalid("--prior-p is required for reed-frost"))?,
            )?;
            let (n, i0) = (args.n, args.i0);
            let sample = abc_rejection(
                move |theta, rng| {
                    if !(0.0..=1.0).contains(&theta[0]) {
                        return vec![f64::INFINITY];
                    }
                    let sub = rng.random::<u64>();
                    let gens = simulate_reed_frost(&ReedFrostParams { n, p: theta[0], i0 }, sub)
                        .expect("validated");
                    vec![gens.iter().sum::<u32>() as f64]
                },
                &observed,
                &[prior_p],
                &cfg,
                args.seed,
            )?;
            (sample, vec!["p".to_string()])
        }
        other => return Err(Error::invalid(format!("unknown model `{other}`"))),
    };
    sample.param_names = names;
    let mut buf = Vec::new();
    eio::write_posterior(&sample, &mut buf)?;
    write_diagnostics(args.diagnostics.as_deref(), &sample)?;
    emitter.emit_with_extra(
        &args.output,
        &buf,
        serde_json::json!({ "acceptance_rate": sample.acceptance_rate,
                            "accepted": sample.draws.len() }),
    )
}

pub fn da_mcmc(args: &DaMcmcArgs) -> Result<()> {
    let emitter = Emitter::new("da-mcmc", args, Some(args.seed));
    let removals = eio::read_removals(open(&args.removals)?)?;
    let prior_l = parse_prior(&args.prior_lambda)?;
    let prior_g = parse_prior(&args.prior_gamma)?;
    let cfg = DaMcmcConfig {
        iterations: args.iterations,
        burn_in_fraction: args.burn_in,
        thin: args.thin,
        update_latent: true,
    };
    let sample = da_mcmc_gse(&removals, args.n, &prior_l, &prior_g, &cfg, args.seed)?;
    let mut buf = Vec::new();
    eio::write_posterior(&sample, &mut buf)?;
    write_diagnostics(args.diagnostics.as_deref(), &sample)?;
    emitter.emit_with_extra(
        &args.output,
        &buf,
        serde_json::json!({ "acceptance_rate": sample.acceptance_rate,
                            "auto_rejections": sample.auto_rejections }),
    )
}

fn write_diagnostics(path: Option<&str>, sample: &PosteriorSample) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let rows = posterior_summary(sample, 0.95)?;
    let summary: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "name": r.name,
                "mean": r.mean,
                "lower95": r.lower,
                "upper95": r.upper,
                "ess": if r.ess.is_nan() { None } else { Some(r.ess) },
                "degenerate": r.degenerate,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "acceptance_rate": if sample.acceptance_rate.is_nan() { None } else { Some(sample.acceptance_rate) },
        "auto_rejections": sample.auto_rejections,
        "draws": sample.draws.len(),
        "seed": sample.seed,
        "summary": summary,
    });
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| Error::invalid(format!("diagnostics serialization: {e}")))?;
    write_atomic(std::path::Path::new(path), text.as_bytes())
}

pub fn surveil(args: &SurveilArgs) -> Result<()> {
    let emitter = Emitter::new("surveil", args, None);
    let panel = eio::read_panel(open(&args.input)?)?;
    let unit_idx = match &args.unit {
        Some(name) => panel
            .units
            .iter()
            .position(|u| u == name)
            .ok_or_else(|| Error::invalid(format!("unit `{name}` not in panel")))?,
        None => {
            if panel.m() != 1 {
                return Err(Error::invalid(
                    "panel has several units; choose one with --unit",
                ));
            }
            0
        }
    };
    let cfg = FarringtonConfig {
        years_back: args.years_back,
        half_window: args.half_window,
        quantile: args.quantile,
        min_reference_total: args.min_reference_total,
        period: args.period,
    };
    let series = &panel.y[unit_idx];
    let run = run_detector(series, &cfg)?;
    let mut buf = Vec::new();
    eio::write_detector_run(series, &run, &mut buf)?;
    emitter.emit_with_extra(
        &args.output,
        &buf,
        serde_json::json!({ "alarm_time": run.alarm_time, "unit": panel.units[unit_idx] }),
    )
}

pub fn ee_fit_cmd(args: &EeFitArgs) -> Result<()> {
    let emitter = Emitter::new("ee-fit", args, None);
    let mut panel = eio::read_panel(open(&args.input)?)?;
    if let Some(wpath) = &args.weights {
        let mut w = eio::read_weights(open(wpath)?, &panel.units)?;
        if args.normalize_weights {
            w = normalize_incoming_weights(&w);
        }
        panel = panel.with_weights(w, args.lag)?;
    }
    let spec = EEModelSpec {
        harmonics: args.harmonics,
        include_ar: !args.no_ar,
        include_neighbor: args.weights.is_some(),
        per_unit_neighbor: args.per_unit_neighbor,
        shared_intercept: args.shared_intercept,
        period: args.period,
    };
    let fit = ee_fit(&panel, &spec)?;
    if let Some(path) = &args.estimates {
        let mut rows = Vec::new();
        if spec.include_ar {
            rows.push((
                "ar".to_string(),
                fit.params.ar,
                fit.se.ar,
                "ee_mle".to_string(),
            ));
        }
        for (i, (v, se)) in fit.params.neighbor.iter().zip(&fit.se.neighbor).enumerate() {
            rows.push((format!("neighbor_{i}"), *v, *se, "ee_mle".to_string()));
        }
        for (i, (v, se)) in fit.params.alpha.iter().zip(&fit.se.alpha).enumerate() {
            rows.push((format!("alpha_{i}"), *v, *se, "ee_mle".to_string()));
        }
        for (i, (v, se)) in fit.params.sin_coef.iter().zip(&fit.se.sin_coef).enumerate() {
            rows.push((format!("sin_{i}"), *v, *se, "ee_mle".to_string()));
        }
        for (i, (v, se)) in fit.params.cos_coef.iter().zip(&fit.se.cos_coef).enumerate() {
            rows.push((format!("cos_{i}"), *v, *se, "ee_mle".to_string()));
        }
        rows.push((
            "phi".to_string(),
            fit.params.phi,
            fit.se.phi,
            "ee_mle".to_string(),
        ));
        let mut ebuf = Vec::new();
        eio::write_estimates(&rows, &mut ebuf)?;
        write_atomic(std::path::Path::new(path), &ebuf)?;
    }
    let text = serde_json::to_string_pretty(&fit)
        .map_err(|e| Error::invalid(format!("fit serialization: {e}")))?;
    emitter.emit(&args.output, text.as_bytes())
}

pub fn score(args: &ScoreArgs) -> Result<()> {
    let emitter = Emitter::new("score", args, None);
    let mut panel = eio::read_panel(open(&args.input)?)?;
    if let Some(wpath) = &args.weights {
        let mut w = eio::read_weights(open(wpath)?, &panel.units)?;
        if args.normalize_weights {
            w = normalize_incoming_weights(&w);
        }
        panel = panel.with_weights(w, args.lag)?;
    }
    let text = fs::read_to_string(&args.fit)?;
    let fit: EEFit = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        msg: format!("fit report: {e}"),
    })?;
    let t_start = args.from.unwrap_or(1).max(1);
    let mut buf = Vec::new();
    {
        use std::io::Write;
        writeln!(buf, "unit,t,y,log_score")?;
        for t in t_start..panel.horizon() {
            let preds = ee_predict_one_step(&fit, &panel, t)?;
            for (i, p) in preds.iter().enumerate() {
                writeln!(
                    buf,
                    "{},{t},{},{}",
                    panel.units[i],
                    panel.y[i][t],
                    eio::fmt_g9(log_score(p, panel.y[i][t]))
                )?;
            }
        }
    }
    let mean = mean_log_score(&fit, &panel, t_start)?;
    emitter.emit_with_extra(
        &args.output,
        &buf,
        serde_json::json!({ "mean_log_score": mean }),
    )
}
