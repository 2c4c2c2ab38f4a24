use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches};
use herdfield::config::KEYS;
use herdfield::{parse_config, run, Command, RunError};

fn cli() -> clap::Command {
    let mut cmd = clap::Command::new("herdfield")
        .about(
            "Mean field equilibria, herding dynamics and phase sweeps of the social herding game",
        )
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Flat JSON config; flags override its keys"),
        )
        .subcommand(clap::Command::new("solve").about("Solve the equilibrium at one alpha"))
        .subcommand(
            clap::Command::new("simulate")
                .about("Run the mean-field flow (and finite populations)"),
        )
        .subcommand(clap::Command::new("sweep").about("Classify herding over an alpha grid"))
        .subcommand(clap::Command::new("threshold").about("Bisect alpha for a phase boundary"))
        .subcommand(
            clap::Command::new("figures").about("Tabulate figure curves from an equilibrium file"),
        );
    for key in KEYS {
        cmd = cmd.arg(Arg::new(key).long(key).global(true).value_name("VALUE"));
    }
    cmd
}

fn command(name: &str) -> Command {
    match name {
        "solve" => Command::Solve,
        "simulate" => Command::Simulate,
        "sweep" => Command::Sweep,
        "threshold" => Command::Threshold,
        _ => Command::Figures,
    }
}

fn flags(m: &ArgMatches) -> Vec<(&'static str, &str)> {
    KEYS.iter()
        .filter_map(|&k| m.get_one::<String>(k).map(|v| (k, v.as_str())))
        .collect()
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = command(name);
    let result = parse_config(
        command,
        sub.get_one::<PathBuf>("config").map(PathBuf::as_path),
        flags(sub),
    )
    .map_err(RunError::from)
    .and_then(|config| run(command, &config));
    match result {
        Ok(out) => {
            for note in &out.notes {
                eprintln!("{note}");
            }
            for path in &out.written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("herdfield {}: {e}", command.as_str());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
