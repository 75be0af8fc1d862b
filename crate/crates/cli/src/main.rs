mod args;
mod commands;
mod error;
mod output;

use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use args::{Cli, Format};
use error::{CliError, Failure};
use serde_json::Value;

fn execute(cli: &Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(n) => n as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    // only fails if a pool already exists, which cannot happen here
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let ctx = commands::Context { seed: cli.seed, threads };
    let table = commands::run(&cli.command, &ctx)?;

    let bytes = match cli.format {
        Format::Csv => table.to_csv()?,
        Format::Json => {
            let mut spec = serde_json::Map::new();
            spec.insert("command".into(), Value::from(cli.command.name()));
            if let Value::Object(fields) = command_fields(&cli.command)? {
                spec.extend(fields);
            }
            let timestamp = (!cli.no_timestamp)
                .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
            output::json_document(Value::Object(spec), cli.seed, timestamp, &table)?
        }
    };
    match &cli.output {
        Some(path) => fs::write(path, &bytes)
            .map_err(|source| CliError::Output { target: path.display().to_string(), source }),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|source| CliError::Output { target: "stdout".into(), source }),
    }
}

fn command_fields(cmd: &args::Command) -> Result<Value, CliError> {
    use args::Command as C;
    let v = match cmd {
        C::Portrait(a) => serde_json::to_value(a),
        C::FixedPoints(a) => serde_json::to_value(a),
        C::Classify(a) => serde_json::to_value(a),
        C::Lyapunov(a) => serde_json::to_value(a),
        C::Area(a) => serde_json::to_value(a),
        C::Similarity(a) => serde_json::to_value(a),
        C::Scan(a) => serde_json::to_value(a),
        C::Spectrum(a) => serde_json::to_value(a),
        C::IprDelta(a) => serde_json::to_value(a),
        C::Otoc(a) => serde_json::to_value(a),
    };
    v.map_err(|e| CliError::Encode(e.to_string()))
}

fn main() -> ExitCode {
    let result = args::parse(std::env::args_os().collect()).and_then(|cli| execute(&cli).map_err(Failure::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
        Err(Failure::Cli(e)) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
