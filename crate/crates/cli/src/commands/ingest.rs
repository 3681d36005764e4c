//! `uatpc ingest` — parse measurement files, validate every record, and
//! write the accepted set plus a reject report with reasons.

use std::path::PathBuf;

use clap::Args;

use crate::commands::{ensure_out, load_instance};
use crate::errors::{input_err, CliError};
use crate::Cli;

#[derive(Args)]
pub struct IngestArgs {
    /// Measurement file (.jsonl/.ndjson or long-format .csv).
    #[arg(long)]
    pub measurements: PathBuf,

    /// Topology file; when given, records naming unknown APs are rejected.
    #[arg(long)]
    pub topology: Option<PathBuf>,
}

pub fn run(cli: &Cli, args: &IngestArgs) -> Result<(), CliError> {
    ensure_out(&cli.out)?;
    let known = match &args.topology {
        Some(path) => Some(load_instance(path)?.ap_ids()),
        None => None,
    };
    if !args.measurements.exists() {
        return Err(input_err(format!(
            "measurement file {} does not exist",
            args.measurements.display()
        )));
    }
    let (records, report) =
        uatpc::io::load_measurements(&args.measurements, known.as_deref()).map_err(input_err)?;

    let accepted_path = cli.out.join("measurements_accepted.jsonl");
    uatpc::io::write_measurements_jsonl(&accepted_path, &records)
        .map_err(|e| CliError::stage("ingest", e))?;
    let report_path = cli.out.join("ingest_report.json");
    uatpc::io::write_json(&report_path, &report).map_err(|e| CliError::stage("ingest", e))?;

    log::info!(
        "accepted {} records, rejected {} ({} input units)",
        report.accepted,
        report.rejected,
        report.units_total
    );
    for (line, reason) in report.rejects.iter().take(10) {
        log::warn!("line {line}: {reason}");
    }
    if report.rejects.len() > 10 {
        log::warn!("... {} more rejects in {}", report.rejects.len() - 10, report_path.display());
    }
    Ok(())
}
