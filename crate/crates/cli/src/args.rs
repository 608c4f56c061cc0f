//! Command-line surface. Every stochastic subcommand takes an explicit
//! `--seed`; there is deliberately no environment-variable fallback.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Serialize)]
#[command(
    name = "epikit",
    version,
    about = "Stochastic epidemic models: simulation, inference and surveillance",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Serialize)]
pub enum Command {
    /// Simulate an outbreak (general stochastic epidemic, SEIR or Reed-Frost)
    Simulate(SimulateArgs),
    /// Final-size estimators of R0 and the critical vaccination coverage
    Estimate(EstimateArgs),
    /// Multitype final-size equations: solve or calibrate
    Multitype(MultitypeArgs),
    /// Household epidemics: simulate, likelihood, MLE, final-size enumeration
    #[command(subcommand)]
    Household(HouseholdCmd),
    /// Two-patch deterministic SIR trajectory
    Patches(PatchesArgs),
    /// Exponential growth rate from an incidence series
    GrowthRate(GrowthRateArgs),
    /// Euler-Lotka conversion between the growth rate r and R0
    EulerLotka(EulerLotkaArgs),
    /// Generation / serial / backward intervals from an event log
    Intervals(IntervalsArgs),
    /// ABC rejection sampling
    Abc(AbcArgs),
    /// Data-augmented MCMC from removal times
    DaMcmc(DaMcmcArgs),
    /// Farrington-style prospective outbreak detection
    Surveil(SurveilArgs),
    /// Fit the endemic-epidemic negative-binomial panel model
    EeFit(EeFitArgs),
    /// One-step-ahead log scores of a fitted endemic-epidemic model
    Score(ScoreArgs),
}

#[derive(Args, Serialize)]
pub struct OutputArgs {
    /// Payload destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<String>,
    /// Result envelope destination (defaults to `<out>.meta.json`)
    #[arg(long)]
    pub meta: Option<String>,
}

#[derive(Args, Serialize)]
pub struct SimulateArgs {
    /// Model family
    #[arg(long, default_value = "gse")]
    pub model: String,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub n: u32,
    /// Fixed (continuous-time Reed-Frost) infectious period of 1/gamma
    #[arg(long)]
    pub fixed_period: bool,
    /// Latency rate: presence switches the model to SEIR
    #[arg(long)]
    pub latent_rate: Option<f64>,
    /// Per-pair transmission probability (reed-frost model)
    #[arg(long)]
    pub p: Option<f64>,
    /// Initial infectives (reed-frost model)
    #[arg(long, default_value_t = 1)]
    pub i0: u32,
    #[arg(long)]
    pub seed: u64,
    /// Run this many replicates and emit per-replicate summaries
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Major-outbreak cutoff fraction
    #[arg(long, default_value_t = 0.1)]
    pub cutoff: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct EstimateArgs {
    /// Initially susceptible population size
    #[arg(long)]
    pub n: Option<u32>,
    /// Observed final size Z
    #[arg(long)]
    pub z: Option<u32>,
    /// Initially immune count
    #[arg(long, default_value_t = 0)]
    pub n_immune: u32,
    /// Sample size m (switches to the sample estimator)
    #[arg(long)]
    pub m: Option<u32>,
    /// Infected within the sample
    #[arg(long)]
    pub zm: Option<u32>,
    /// Coefficient of variation of the infectious period
    #[arg(long, default_value_t = 1.0)]
    pub cv: f64,
    /// Pair-experiment: number of isolated pairs
    #[arg(long)]
    pub pairs: Option<u32>,
    /// Pair-experiment: infected partners
    #[arg(long)]
    pub infected: Option<u32>,
    /// Local group size for R0 = m p after a pair experiment
    #[arg(long)]
    pub m_local: Option<u32>,
    /// Read `n,Z[,n_immune]` or `n,m,Z_m` rows from a CSV file instead of flags
    #[arg(long)]
    pub input: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct MultitypeArgs {
    /// Type fractions, e.g. "0.3,0.7"
    #[arg(long)]
    pub pi: String,
    /// Contact-rate matrix rows separated by ';', e.g. "2.5,0.8;0.8,1.4"
    #[arg(long)]
    pub lambda: String,
    /// Recovery rates, e.g. "1,1.2"
    #[arg(long)]
    pub gamma: String,
    /// Observed attack-rate vector: switches to calibration
    #[arg(long)]
    pub observed: Option<String>,
    /// Free lambda entries "i,j;i,j" (calibration; fixed entries come from --lambda)
    #[arg(long)]
    pub free: Option<String>,
    /// Starting values for the free parameters
    #[arg(long)]
    pub init: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Serialize)]
pub enum HouseholdCmd {
    /// Simulate the household CTMC
    Simulate(HouseholdSimulateArgs),
    /// Evaluate the temporal log-likelihood at given rates
    Loglik(HouseholdLoglikArgs),
    /// Maximize the likelihood over (lambda_H, lambda_G)
    Mle(HouseholdMleArgs),
    /// Exact single-household final-size distribution (size <= 5)
    Enum(HouseholdEnumArgs),
}

#[derive(Args, Serialize)]
pub struct HouseholdSimulateArgs {
    #[arg(long)]
    pub lambda_h: f64,
    #[arg(long)]
    pub lambda_g: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Household sizes, e.g. "3,3,4" (or @file of `household_id,size`)
    #[arg(long)]
    pub sizes: String,
    #[arg(long)]
    pub seed: u64,
    /// Also write the sizes sidecar CSV here
    #[arg(long)]
    pub sizes_out: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct HouseholdLoglikArgs {
    /// Event CSV `household_id,event,time`
    #[arg(long)]
    pub data: String,
    /// Sizes CSV `household_id,size`
    #[arg(long)]
    pub sizes: String,
    #[arg(long)]
    pub lambda_h: f64,
    #[arg(long)]
    pub lambda_g: f64,
    /// Population size for the global term (defaults to the sizes total)
    #[arg(long)]
    pub n: Option<u32>,
    /// Observation horizon (defaults to the last event time)
    #[arg(long)]
    pub t_obs: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct HouseholdMleArgs {
    #[arg(long)]
    pub data: String,
    #[arg(long)]
    pub sizes: String,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub t_obs: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct HouseholdEnumArgs {
    #[arg(long)]
    pub size: u32,
    /// Within-pair transmission probability lambda_H / (lambda_H + gamma)
    #[arg(long)]
    pub pair_prob: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct PatchesArgs {
    #[arg(long)]
    pub lambda: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub m_move: f64,
    #[arg(long)]
    pub n: f64,
    /// Initial state "S1,I1,S2,I2"
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct GrowthRateArgs {
    /// Incidence CSV `t,count`
    #[arg(long)]
    pub input: String,
    /// Reporting-period length in model time units
    #[arg(long, default_value_t = 1.0)]
    pub period: f64,
    /// Window of period indices "a:b" (half-open; whole series when omitted)
    #[arg(long)]
    pub window: Option<String>,
    /// Regression: `count` (default) or `log-ls`
    #[arg(long, default_value = "count")]
    pub method: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct EulerLotkaArgs {
    /// Generation-time distribution, e.g. "gamma:2,2", "exp:1",
    /// "fixed:1.5", "empirical:path.csv"
    #[arg(long)]
    pub gen_dist: String,
    /// Solve for r given R0
    #[arg(long)]
    pub r0: Option<f64>,
    /// Solve for R0 given r
    #[arg(long)]
    pub r: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct IntervalsArgs {
    /// Event-log CSV `time,kind,subject,infector`
    #[arg(long)]
    pub log: String,
    /// Population size of the log
    #[arg(long)]
    pub n: u32,
    /// Calendar window "lo:hi" restricting the indexing cohorts
    #[arg(long)]
    pub window: Option<String>,
    /// Use the growth-phase window (cumulative incidence 1%-5%)
    #[arg(long)]
    pub auto_window: bool,
    /// Onset-offset distribution for serial intervals (same syntax as
    /// --gen-dist)
    #[arg(long)]
    pub offset_dist: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct AbcArgs {
    /// Forward model: "gse" (priors on lambda, gamma) or "reed-frost"
    /// (prior on p)
    #[arg(long, default_value = "gse")]
    pub model: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub i0: u32,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Observed event log to summarize (gse model)
    #[arg(long)]
    pub observed_log: Option<String>,
    /// Observed summaries given directly, e.g. "5828,14.2"
    #[arg(long)]
    pub observed: Option<String>,
    /// Summary statistics, e.g. "final-size,duration"
    #[arg(long, default_value = "final-size")]
    pub summaries: String,
    #[arg(long)]
    pub prior_lambda: Option<String>,
    #[arg(long)]
    pub prior_gamma: Option<String>,
    #[arg(long)]
    pub prior_p: Option<String>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 200)]
    pub pilot: usize,
    #[arg(long)]
    pub seed: u64,
    /// Diagnostics JSON destination
    #[arg(long)]
    pub diagnostics: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct DaMcmcArgs {
    /// Removal-times CSV `removal_time`
    #[arg(long)]
    pub removals: String,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub prior_lambda: String,
    #[arg(long)]
    pub prior_gamma: String,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.2)]
    pub burn_in: f64,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub diagnostics: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct SurveilArgs {
    /// Panel CSV `unit,week,year,count`
    #[arg(long)]
    pub input: String,
    /// Unit to monitor (required when the panel has several)
    #[arg(long)]
    pub unit: Option<String>,
    #[arg(long, default_value_t = 5)]
    pub years_back: usize,
    #[arg(long, default_value_t = 3)]
    pub half_window: usize,
    #[arg(long, default_value_t = 0.995)]
    pub quantile: f64,
    #[arg(long, default_value_t = 5)]
    pub min_reference_total: u64,
    #[arg(long, default_value_t = 52)]
    pub period: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct EeFitArgs {
    #[arg(long)]
    pub input: String,
    /// Weights CSV `from,to,weight` (enables the neighbor term)
    #[arg(long)]
    pub weights: Option<String>,
    /// Normalize incoming weights to sum to one per unit
    #[arg(long)]
    pub normalize_weights: bool,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    #[arg(long, default_value_t = 0)]
    pub harmonics: usize,
    /// Drop the autoregressive term
    #[arg(long)]
    pub no_ar: bool,
    /// One neighbor coefficient per unit (needs a large panel)
    #[arg(long)]
    pub per_unit_neighbor: bool,
    #[arg(long)]
    pub shared_intercept: bool,
    #[arg(long, default_value_t = 52.0)]
    pub period: f64,
    /// Also write a `parameter,point,se,formula_id` table here
    #[arg(long)]
    pub estimates: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Serialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub input: String,
    /// Fit report JSON produced by `ee-fit`
    #[arg(long)]
    pub fit: String,
    #[arg(long)]
    pub weights: Option<String>,
    /// Normalize incoming weights to sum to one per unit
    #[arg(long)]
    pub normalize_weights: bool,
    #[arg(long, default_value_t = 1)]
    pub lag: usize,
    /// First period to score (defaults to the first modeled period)
    #[arg(long)]
    pub from: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}
