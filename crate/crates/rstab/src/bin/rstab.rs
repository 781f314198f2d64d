//! Thin command-line front end: analyze / verify / sweep.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or config error, 3 solver
//! failure.

use std::process::ExitCode;

use rstab::config::RunConfig;
use rstab::runner;

const USAGE: &str = "\
usage:
  rstab analyze --config <path>
  rstab verify  --config <path> [--suite <name>]
  rstab sweep   --config <path> --param <name> --from <a> --to <b> --steps <k>

config keys are documented in the repository README; suites: identities,
drift, linearization, spectra, second_variation, symmetrization, adjoint,
collatz, bound, nonselfadjoint, all.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn flag(args: &[String], name: &str) -> Option<String> {
    args.iter()
        .position(|a| a == name)
        .and_then(|i| args.get(i + 1).cloned())
}

fn run(args: &[String]) -> rstab::Result<ExitCode> {
    let Some(cmd) = args.first() else {
        eprint!("{USAGE}");
        return Ok(ExitCode::from(2));
    };
    let config_path = flag(args, "--config");
    let load = |path: Option<String>| -> rstab::Result<RunConfig> {
        let path = path.ok_or_else(|| rstab::Error::ConfigField("--config is required".into()))?;
        RunConfig::load(std::path::Path::new(&path))
    };
    match cmd.as_str() {
        "analyze" => {
            let cfg = load(config_path)?;
            let report = runner::cmd_analyze(&cfg)?;
            print!("{}", report.render());
            Ok(ExitCode::SUCCESS)
        }
        "verify" => {
            let cfg = load(config_path)?;
            let suite = flag(args, "--suite");
            let (outcomes, all_pass) = runner::cmd_verify(&cfg, suite.as_deref())?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            if all_pass {
                println!("verify: all {} checks passed", outcomes.len());
                Ok(ExitCode::SUCCESS)
            } else {
                let failed = outcomes.iter().filter(|o| !o.pass).count();
                println!("verify: {failed} of {} checks FAILED", outcomes.len());
                Ok(ExitCode::from(1))
            }
        }
        "sweep" => {
            let cfg = load(config_path)?;
            let param = flag(args, "--param")
                .or_else(|| cfg.sweep.param.clone())
                .ok_or_else(|| rstab::Error::ConfigField("--param is required".into()))?;
            let parse_f = |name: &str, default: f64| -> rstab::Result<f64> {
                match flag(args, name) {
                    Some(v) => v
                        .parse()
                        .map_err(|_| rstab::Error::ConfigField(format!("{name} must be a number"))),
                    None => Ok(default),
                }
            };
            let from = parse_f("--from", cfg.sweep.from)?;
            let to = parse_f("--to", cfg.sweep.to)?;
            let steps = match flag(args, "--steps") {
                Some(v) => v
                    .parse()
                    .map_err(|_| rstab::Error::ConfigField("--steps must be an integer".into()))?,
                None => cfg.sweep.steps,
            };
            let result = runner::cmd_sweep(&cfg, &param, from, to, steps)?;
            print!("{}", result.csv);
            for m in &result.marginal_params {
                println!("# marginal {param} = {m}");
            }
            Ok(ExitCode::SUCCESS)
        }
        _ => {
            eprint!("{USAGE}");
            Ok(ExitCode::from(2))
        }
    }
}
