use std::process::ExitCode;

use graylaser::config::{preset, ExperimentConfig, PRESET_NAMES};
use graylaser::error::{Error, Result};
use graylaser::runner;

const USAGE: &str = "\
usage: graylaser <command> [args]

commands:
  run <config>                              execute one experiment
  sweep <config> --key K --values v1,v2,..  repeat a run over parameter values
  validate <config>                         static checks, no simulation
  preset <name>                             print a built-in configuration
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(path: &str) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{path}: {e}")))?;
    ExperimentConfig::parse(&text)
}

fn dispatch(args: &[String]) -> Result<()> {
    let cmd = args.first().map(String::as_str).unwrap_or("");
    match cmd {
        "run" => {
            let path = args
                .get(1)
                .ok_or_else(|| Error::InvalidArgument(format!("run needs a config path\n{USAGE}")))?;
            let man = runner::run(&load_config(path)?)?;
            for (name, pass) in man.checks() {
                println!("{}: {name}", if *pass { "pass" } else { "FAIL" });
            }
            if !man.all_checks_pass() {
                return Err(Error::Domain("one or more invariant checks failed".into()));
            }
            Ok(())
        }
        "sweep" => {
            let path = args
                .get(1)
                .ok_or_else(|| Error::InvalidArgument(format!("sweep needs a config path\n{USAGE}")))?;
            let mut key: Option<&str> = None;
            let mut values: Option<Vec<String>> = None;
            let mut i = 2;
            while i < args.len() {
                match args[i].as_str() {
                    "--key" => {
                        key = Some(args.get(i + 1).map(String::as_str).ok_or_else(|| {
                            Error::InvalidArgument("--key needs an argument".into())
                        })?);
                        i += 2;
                    }
                    "--values" => {
                        let raw = args.get(i + 1).ok_or_else(|| {
                            Error::InvalidArgument("--values needs an argument".into())
                        })?;
                        values = Some(raw.split(',').map(str::to_string).collect());
                        i += 2;
                    }
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "unknown sweep argument `{other}`\n{USAGE}"
                        )))
                    }
                }
            }
            let key =
                key.ok_or_else(|| Error::InvalidArgument(format!("sweep needs --key\n{USAGE}")))?;
            let values = values
                .ok_or_else(|| Error::InvalidArgument(format!("sweep needs --values\n{USAGE}")))?;
            runner::sweep(&load_config(path)?, key, &values)
        }
        "validate" => {
            let path = args.get(1).ok_or_else(|| {
                Error::InvalidArgument(format!("validate needs a config path\n{USAGE}"))
            })?;
            print!("{}", runner::validate(&load_config(path)?)?);
            println!("errors: none");
            Ok(())
        }
        "preset" => {
            let name = args.get(1).map(String::as_str).unwrap_or("");
            match preset(name) {
                Some(text) => {
                    print!("{text}");
                    Ok(())
                }
                None => Err(Error::InvalidArgument(format!(
                    "unknown preset `{name}`; available: {}",
                    PRESET_NAMES.join(", ")
                ))),
            }
        }
        "" => Err(Error::InvalidArgument(USAGE.into())),
        other => Err(Error::InvalidArgument(format!("unknown command `{other}`\n{USAGE}"))),
    }
}
