mod commands;
mod config;
mod schema;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};
use serde_json::{json, Value};

use parashear::report::SCHEMA_VERSION;
use parashear::sum::{Precision, PRECISION_ENV};

use commands::{Outcome, RunError};
use config::{ConfigFile, Kind, Params};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn cli() -> Command {
    let mut cmd = Command::new("parashear")
        .about("Shearing and C(q) witness experiments for parabolic flows")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (name, about, keys) in schema::SUBCOMMANDS {
        let mut sub = Command::new(*name)
            .about(*about)
            .arg(Arg::new("config").long("config").value_name("PATH").help("key = value file with [section] headers"))
            .arg(Arg::new("out").long("out").value_name("DIR").default_value("out").help("output directory"));
        for k in *keys {
            let arg = Arg::new(k.name).long(k.name).help(k.help);
            sub = sub.arg(match k.kind {
                Kind::Bool => arg.action(ArgAction::SetTrue),
                _ => arg.value_name("VALUE"),
            });
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn flag_overrides(keys: &[config::Key], m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for k in keys {
        match k.kind {
            Kind::Bool => {
                if m.get_flag(k.name) {
                    out.push((k.name.to_string(), "true".to_string()));
                }
            }
            _ => {
                if let Some(v) = m.get_one::<String>(k.name) {
                    out.push((k.name.to_string(), v.clone()));
                }
            }
        }
    }
    out
}

fn config_error(name: &str, msg: &str) -> ExitCode {
    let mut c = cli();
    c.build();
    let usage = c.find_subcommand_mut(name).map(|s| s.render_usage().to_string()).unwrap_or_default();
    eprintln!("error: {msg}\n\n{usage}\n\nFor more information, try '--help'.");
    ExitCode::from(EXIT_CONFIG)
}

fn write_outputs(dir: &Path, report: &Value, outcome: &Outcome) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (file, s) in &outcome.series {
        std::fs::write(dir.join(file), s.to_csv())?;
    }
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(dir.join("report.json"), text)
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    let (name, m) = matches.subcommand().expect("subcommand required");
    let keys = schema::schema(name);

    let precision = match std::env::var(PRECISION_ENV) {
        Ok(v) => match Precision::parse(&v) {
            Some(p) => p,
            None => return config_error(name, &format!("{PRECISION_ENV}={v} is neither `64` nor `extended`")),
        },
        Err(_) => Precision::default(),
    };
    let file = match m.get_one::<String>("config").map(|p| ConfigFile::load(Path::new(p))).transpose() {
        Ok(f) => f,
        Err(e) => return config_error(name, &e.to_string()),
    };
    let params = match Params::merge(name, keys, file.as_ref(), &flag_overrides(keys, m)) {
        Ok(p) => p,
        Err(e) => return config_error(name, &e.to_string()),
    };
    let out_dir = PathBuf::from(m.get_one::<String>("out").expect("has default"));

    let outcome = match commands::dispatch(&params) {
        Ok(o) => o,
        Err(RunError::Config(msg)) => return config_error(name, &msg),
        Err(RunError::Experiment(msg)) => Outcome {
            pass: false,
            failure: Some(msg),
            result: Value::Null,
            series: Vec::new(),
        },
    };
    let series: Vec<Value> = outcome
        .series
        .iter()
        .map(|(file, s)| json!({ "file": file, "columns": s.columns, "rows": s.rows.len() }))
        .collect();
    let report = json!({
        "schema": SCHEMA_VERSION,
        "subcommand": name,
        "pass": outcome.pass,
        "failure": outcome.failure,
        "seed": params.int("seed"),
        "precision": precision,
        "config": {
            "file": file.as_ref().map(|f| f.text.clone()),
            "effective": params.to_json(),
        },
        "series": series,
        "result": outcome.result,
    });
    if let Err(e) = write_outputs(&out_dir, &report, &outcome) {
        eprintln!("error: writing {}: {e}", out_dir.display());
        return ExitCode::from(EXIT_FAIL);
    }
    match &outcome.failure {
        None => {
            println!("{name}: pass ({})", out_dir.join("report.json").display());
            ExitCode::SUCCESS
        }
        Some(why) => {
            eprintln!("{name}: FAIL: {why}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
