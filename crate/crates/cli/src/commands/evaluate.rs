//! `evaluate` — score saved power configurations on a shared reference set.

use std::path::PathBuf;

use clap::Args;
use uatpc::sim::network_utility;
use uatpc::PowerConfig;

use crate::commands::{ensure_out, load_instance, load_rps};
use crate::comparison::{compare_configs, render_comparison, write_comparison_csv};
use crate::errors::{input_err, stage_err, CliError};
use crate::runconfig::RunConfig;
use crate::Cli;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Network topology JSON.
    #[arg(long)]
    pub topology: PathBuf,
    /// Reference-point path-loss matrix CSV.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Named configuration, as `name=path.json`; repeatable.
    #[arg(long = "power", value_name = "NAME=PATH", required = true)]
    pub powers: Vec<String>,
}

fn parse_power_spec(spec: &str) -> Result<(String, PathBuf), CliError> {
    let (name, path) = spec
        .split_once('=')
        .ok_or_else(|| input_err(format!("`{spec}`: expected NAME=PATH")))?;
    if name.is_empty() || path.is_empty() {
        return Err(input_err(format!("`{spec}`: expected NAME=PATH")));
    }
    Ok((name.to_string(), PathBuf::from(path)))
}

pub fn run(cli: &Cli, args: &EvaluateArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let instance = load_instance(&args.topology)?;
    let rps = load_rps(&args.matrix, &instance)?;

    let mut configs: Vec<(String, PowerConfig)> = Vec::with_capacity(args.powers.len());
    for spec in &args.powers {
        let (name, path) = parse_power_spec(spec)?;
        let config = uatpc::io::load_config(&path, &instance).map_err(input_err)?;
        configs.push((name, config));
    }

    let params = cfg.utility.params();
    for (name, config) in &configs {
        let breakdown = network_utility(&rps, config, &instance, &params);
        let path = cli.out.join(format!("breakdown_{name}.csv"));
        uatpc::io::write_breakdown_csv(&path, &breakdown, &instance)
            .map_err(stage_err("evaluate"))?;
    }

    let rows = compare_configs(&rps, &instance, &configs, &params);
    write_comparison_csv(&cli.out.join("comparison.csv"), &rows)?;
    print!("{}", render_comparison(&rows));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_specs_split_on_first_equals() {
        let (name, path) = parse_power_spec("ls=out/config_ls.json").unwrap();
        assert_eq!(name, "ls");
        assert_eq!(path, PathBuf::from("out/config_ls.json"));
        assert!(parse_power_spec("nameonly").is_err());
        assert!(parse_power_spec("=path").is_err());
    }
}
