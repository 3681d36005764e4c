//! One module per subcommand, plus small shared loading helpers.

pub mod baseline;
pub mod evaluate;
pub mod impute;
pub mod ingest;
pub mod optimize;
pub mod pipeline;
pub mod select;
pub mod study;
pub mod synth;

use std::fs;
use std::path::Path;

use uatpc::model::{NetworkInstance, ReferencePointSet};

use crate::errors::{input_err, CliError};

/// Creates the output directory tree (validation-phase).
pub fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))
}

/// Loads a topology file, reporting the path on any failure.
pub fn load_instance(path: &Path) -> Result<NetworkInstance, CliError> {
    if !path.exists() {
        return Err(input_err(format!("topology file {} does not exist", path.display())));
    }
    uatpc::io::load_topology(path).map_err(input_err)
}

/// Loads a complete path-loss matrix CSV as a reference-point set matched
/// to the instance's AP order.
pub fn load_rps(path: &Path, instance: &NetworkInstance) -> Result<ReferencePointSet, CliError> {
    if !path.exists() {
        return Err(input_err(format!("matrix file {} does not exist", path.display())));
    }
    let (matrix, origins, ap_ids) = uatpc::io::read_matrix_csv(path).map_err(input_err)?;
    uatpc::io::rps_from_matrix(matrix, origins, &ap_ids, instance).map_err(input_err)
}
