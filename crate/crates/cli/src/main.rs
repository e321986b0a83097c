use std::collections::BTreeMap;
use std::process::ExitCode;

use affsieve::config::{keys_for, parse_config_file, COMMANDS};
use affsieve::{run, write_outputs, CliError, RunConfig};
use clap::parser::ValueSource;
use clap::{Arg, ArgMatches, Command};

fn cli() -> Command {
    let mut cmd = Command::new("affsieve")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Affine sieve experiments on integer matrices of fixed determinant")
        .subcommand_required(true)
        .arg(
            Arg::new("config").long("config").global(true).value_name("PATH").help("key=value file; flags override it"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help("worker pool size [default: all cores]"),
        );
    for (name, about, keys) in COMMANDS {
        let mut sub = Command::new(*name).about(*about);
        for (key, help) in *keys {
            sub = sub.arg(Arg::new(*key).long(*key).value_name("VALUE").help(*help).allow_hyphen_values(true));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn flag_values(sub: &ArgMatches, command: &str) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for (key, _) in keys_for(command).unwrap_or(&[]) {
        if sub.value_source(key) == Some(ValueSource::CommandLine) {
            if let Some(v) = sub.get_one::<String>(key) {
                out.insert((*key).to_string(), v.clone());
            }
        }
    }
    out
}

fn execute(matches: &ArgMatches) -> Result<(), CliError> {
    let (command, sub) = matches.subcommand().expect("subcommand is required");
    if let Some(&threads) = sub.get_one::<usize>("threads") {
        if threads == 0 {
            return Err(CliError::Validation("threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    }
    let file = match sub.get_one::<String>("config") {
        Some(path) => parse_config_file(&std::fs::read_to_string(path)?)?,
        None => BTreeMap::new(),
    };
    let cfg = RunConfig::merge(command, file, flag_values(sub, command))?;
    let output = run(&cfg)?;
    write_outputs(&cfg, &output)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match execute(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
