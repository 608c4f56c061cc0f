mod args;
mod commands;
mod util;

use clap::Parser;
use epikit::Error;

use args::{Cli, Command};

fn main() {
    // clap exits with code 2 on usage errors
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Multitype(a) => commands::multitype(a),
        Command::Household(c) => commands::household(c),
        Command::Patches(a) => commands::patches(a),
        Command::GrowthRate(a) => commands::growth_rate(a),
        Command::EulerLotka(a) => commands::euler_lotka(a),
        Command::Intervals(a) => commands::intervals(a),
        Command::Abc(a) => commands::abc(a),
        Command::DaMcmc(a) => commands::da_mcmc(a),
        Command::Surveil(a) => commands::surveil(a),
        Command::EeFit(a) => commands::ee_fit_cmd(a),
        Command::Score(a) => commands::score(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::InvalidParameter(_) => 2,
            Error::Domain(_) | Error::IncompleteLog(_) | Error::Parse { .. } => 3,
            Error::NonConvergence(_) => 4,
            Error::Io(_) => 1,
        });
    }
}
