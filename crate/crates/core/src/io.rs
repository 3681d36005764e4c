//! File formats: measurement ingestion (JSONL and long-form CSV) with
//! explicit reject accounting, topology JSON, power-configuration JSON, and
//! CSV/JSON writers for matrices, breakdowns, embeddings, and reports.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AccessPoint, DenseMatrix, MeasurementRecord, ModelError, NetworkInstance, PowerConfig,
    ReferencePointSet,
};
use crate::optimizer::SearchReport;
use crate::selection::{Embedding, SelectionResult};
use crate::sim::UtilityBreakdown;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        source: csv::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path} line {line}: {reason}")]
    BadLine {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{0}")]
    BadFormat(String),
}

/// Outcome of an ingestion pass. Rejection is total at the input-unit
/// level: a unit is one non-blank line (JSONL) or one data row (CSV), and
/// `units_accepted + units_rejected == units_total` always holds — nothing
/// is silently dropped. `accepted`/`rejected` count whole records, which
/// for CSV may span several rows.
#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: usize,
    pub units_total: usize,
    pub units_accepted: usize,
    pub units_rejected: usize,
    /// (line number, reason) per reject.
    pub rejects: Vec<(usize, String)>,
}

#[derive(Deserialize)]
struct JsonlRow {
    ts: i64,
    sta: String,
    serving: String,
    pl: BTreeMap<String, f64>,
}

fn validate_record(
    record: MeasurementRecord,
    known_aps: Option<&[String]>,
) -> Result<MeasurementRecord, String> {
    if let Some(reason) = record.violation() {
        return Err(reason);
    }
    if let Some(known) = known_aps {
        for ap in record.pl.keys() {
            if !known.contains(ap) {
                return Err(format!("unknown AP id `{ap}`"));
            }
        }
    }
    Ok(record)
}

/// Parses measurement records from JSON-lines text: one object per line,
/// `{"ts": .., "sta": "..", "serving": "..", "pl": {"ap": db, ..}}`.
/// Blank lines are skipped; malformed or invalid lines are rejected with a
/// reason, never silently dropped. When `known_aps` is given, records
/// naming other APs are rejected.
pub fn read_measurements_jsonl<R: Read>(
    reader: R,
    known_aps: Option<&[String]>,
) -> Result<(Vec<MeasurementRecord>, IngestReport), IoError> {
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut units = 0usize;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        units += 1;
        match serde_json::from_str::<JsonlRow>(&line) {
            Ok(row) => {
                let record = MeasurementRecord {
                    ts: row.ts,
                    sta_id: row.sta,
                    serving_ap: row.serving,
                    pl: row.pl,
                };
                match validate_record(record, known_aps) {
                    Ok(r) => records.push(r),
                    Err(reason) => rejects.push((lineno, reason)),
                }
            }
            Err(e) => rejects.push((lineno, format!("malformed JSON: {e}"))),
        }
    }
    let report = IngestReport {
        accepted: records.len(),
        rejected: rejects.len(),
        units_total: units,
        units_accepted: units - rejects.len(),
        units_rejected: rejects.len(),
        rejects,
    };
    Ok((records, report))
}

pub fn load_measurements_jsonl(
    path: &Path,
    known_aps: Option<&[String]>,
) -> Result<(Vec<MeasurementRecord>, IngestReport), IoError> {
    let file = fs::File::open(path)?;
    read_measurements_jsonl(file, known_aps)
}

/// Parses long-form measurement CSV with header
/// `ts,sta,serving,ap_id,pl_db`: consecutive rows sharing (ts, sta) are one
/// record, assembled in first-seen order. A row whose (ts, sta) pair was
/// already completed starts a fresh record rather than reopening the old
/// one. Rejects are counted per CSV row.
pub fn read_measurements_csv<R: Read>(
    reader: R,
    known_aps: Option<&[String]>,
) -> Result<(Vec<MeasurementRecord>, IngestReport), IoError> {
    let mut csv_reader = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let mut groups: Vec<((i64, String), String, BTreeMap<String, f64>, Vec<usize>)> = Vec::new();
    let mut rejects: Vec<(usize, String)> = Vec::new();
    let mut rejected_rows = 0usize;
    let mut row_count = 0usize;
    for (idx, result) in csv_reader.deserialize::<CsvRow>().enumerate() {
        let lineno = idx + 2; // header is line 1
        row_count += 1;
        let row = match result {
            Ok(r) => r,
            Err(e) => {
                rejects.push((lineno, format!("malformed row: {e}")));
                rejected_rows += 1;
                continue;
            }
        };
        let key = (row.ts, row.sta.clone());
        match groups.last_mut() {
            Some((k, serving, pl, lines)) if *k == key => {
                if *serving != row.serving {
                    rejects.push((
                        lineno,
                        format!(
                            "serving AP changed within one record (`{serving}` vs `{}`)",
                            row.serving
                        ),
                    ));
                    rejected_rows += 1;
                    continue;
                }
                pl.insert(row.ap_id, row.pl_db);
                lines.push(lineno);
            }
            _ => {
                let mut pl = BTreeMap::new();
                pl.insert(row.ap_id, row.pl_db);
                groups.push((key, row.serving, pl, vec![lineno]));
            }
        }
    }
    let mut records = Vec::new();
    for ((ts, sta), serving, pl, lines) in groups {
        let record = MeasurementRecord {
            ts,
            sta_id: sta,
            serving_ap: serving,
            pl,
        };
        match validate_record(record, known_aps) {
            Ok(r) => records.push(r),
            Err(reason) => {
                // the whole group fails; charge every row that formed it
                rejected_rows += lines.len();
                rejects.push((lines[0], reason));
            }
        }
    }
    let report = IngestReport {
        accepted: records.len(),
        rejected: rejects.len(),
        units_total: row_count,
        units_accepted: row_count - rejected_rows,
        units_rejected: rejected_rows,
        rejects,
    };
    Ok((records, report))
}

#[derive(Deserialize)]
struct CsvRow {
    ts: i64,
    sta: String,
    serving: String,
    ap_id: String,
    pl_db: f64,
}

pub fn load_measurements_csv(
    path: &Path,
    known_aps: Option<&[String]>,
) -> Result<(Vec<MeasurementRecord>, IngestReport), IoError> {
    let file = fs::File::open(path)?;
    read_measurements_csv(file, known_aps)
}

/// Loads measurements by extension: `.jsonl`/`.ndjson` as JSON lines,
/// `.csv` as long-form CSV.
pub fn load_measurements(
    path: &Path,
    known_aps: Option<&[String]>,
) -> Result<(Vec<MeasurementRecord>, IngestReport), IoError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => load_measurements_jsonl(path, known_aps),
        Some("csv") => load_measurements_csv(path, known_aps),
        other => Err(IoError::BadFormat(format!(
            "unsupported measurement extension {:?} (use .jsonl or .csv)",
            other.unwrap_or("")
        ))),
    }
}

pub fn write_measurements_jsonl(
    path: &Path,
    records: &[MeasurementRecord],
) -> Result<(), IoError> {
    let mut out = String::new();
    for r in records {
        let row = serde_json::json!({
            "ts": r.ts,
            "sta": r.sta_id,
            "serving": r.serving_ap,
            "pl": r.pl,
        });
        out.push_str(&row.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct TopologyFile {
    aps: Vec<TopologyAp>,
    /// Directed AP→AP path loss in dB; `null` marks unmeasured directions.
    ap_pl: Vec<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    channel_overlap: Option<Vec<Vec<bool>>>,
}

#[derive(Serialize, Deserialize)]
struct TopologyAp {
    id: String,
    allowed_levels_dbm: Vec<i32>,
    channel: u32,
}

/// Loads a network topology from JSON: AP list (id, allowed transmit
/// levels, channel), the possibly partial directed AP→AP path-loss matrix,
/// and an optional explicit channel-overlap matrix.
pub fn load_topology(path: &Path) -> Result<NetworkInstance, IoError> {
    let bytes = fs::read(path)?;
    let file: TopologyFile = serde_json::from_slice(&bytes).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    let aps: Vec<AccessPoint> = file
        .aps
        .into_iter()
        .map(|a| AccessPoint {
            id: a.id,
            allowed_levels: a.allowed_levels_dbm,
            channel: a.channel,
        })
        .collect();
    Ok(NetworkInstance::new(
        aps,
        &file.ap_pl,
        file.channel_overlap.as_deref(),
    )?)
}

pub fn save_topology(path: &Path, instance: &NetworkInstance) -> Result<(), IoError> {
    let n = instance.n_aps();
    let ap_pl: Vec<Vec<Option<f64>>> = (0..n)
        .map(|a| (0..n).map(|b| Some(instance.pl_between(a, b))).collect())
        .collect();
    let overlap: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| instance.overlaps(a, b)).collect())
        .collect();
    let file = TopologyFile {
        aps: instance
            .aps()
            .iter()
            .map(|a| TopologyAp {
                id: a.id.clone(),
                allowed_levels_dbm: a.allowed_levels.clone(),
                channel: a.channel,
            })
            .collect(),
        ap_pl,
        channel_overlap: Some(overlap),
    };
    write_json(path, &file)
}

#[derive(Serialize, Deserialize)]
struct ConfigFile {
    levels_dbm: BTreeMap<String, i32>,
}

/// Loads a power configuration keyed by AP id and orders it to match the
/// instance. Every AP must be present and every level allowed.
pub fn load_config(path: &Path, instance: &NetworkInstance) -> Result<PowerConfig, IoError> {
    let bytes = fs::read(path)?;
    let file: ConfigFile = serde_json::from_slice(&bytes).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut levels = Vec::with_capacity(instance.n_aps());
    for ap in instance.aps() {
        let level = file.levels_dbm.get(&ap.id).ok_or_else(|| {
            IoError::BadFormat(format!("configuration is missing AP `{}`", ap.id))
        })?;
        levels.push(*level);
    }
    let config = PowerConfig { levels };
    config.validate(instance)?;
    Ok(config)
}

pub fn save_config(
    path: &Path,
    config: &PowerConfig,
    instance: &NetworkInstance,
) -> Result<(), IoError> {
    let levels_dbm: BTreeMap<String, i32> = instance
        .aps()
        .iter()
        .zip(&config.levels)
        .map(|(ap, &level)| (ap.id.clone(), level))
        .collect();
    write_json(path, &ConfigFile { levels_dbm })
}

/// Writes a complete path-loss matrix as CSV: `origin_id` column followed
/// by one column per AP id.
pub fn write_matrix_csv(
    path: &Path,
    matrix: &DenseMatrix,
    origin_ids: &[String],
    ap_ids: &[String],
) -> Result<(), IoError> {
    assert_eq!(matrix.rows(), origin_ids.len());
    assert_eq!(matrix.cols(), ap_ids.len());
    let mut w = csv_writer(path)?;
    let mut header = vec!["origin_id".to_string()];
    header.extend_from_slice(ap_ids);
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (i, origin) in origin_ids.iter().enumerate() {
        let mut row = vec![origin.clone()];
        row.extend(matrix.row(i).iter().map(|v| format!("{v}")));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a matrix written by [`write_matrix_csv`]; returns the values, the
/// origin ids, and the AP ids from the header.
pub fn read_matrix_csv(path: &Path) -> Result<(DenseMatrix, Vec<String>, Vec<String>), IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.is_empty() || &header[0] != "origin_id" {
        return Err(IoError::BadFormat(format!(
            "{}: first column must be origin_id",
            path.display()
        )));
    }
    let ap_ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut origin_ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() != ap_ids.len() + 1 {
            return Err(IoError::BadLine {
                path: path.display().to_string(),
                line: idx + 2,
                reason: format!("expected {} fields, found {}", ap_ids.len() + 1, record.len()),
            });
        }
        origin_ids.push(record[0].to_string());
        let row: Result<Vec<f64>, _> = record.iter().skip(1).map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| IoError::BadLine {
            path: path.display().to_string(),
            line: idx + 2,
            reason: format!("bad number: {e}"),
        })?);
    }
    Ok((DenseMatrix::from_rows(rows), origin_ids, ap_ids))
}

/// Writes per-reference-point utility terms as CSV with the serving AP
/// spelled by id.
pub fn write_breakdown_csv(
    path: &Path,
    breakdown: &UtilityBreakdown,
    instance: &NetworkInstance,
) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(["rp_index", "serving_ap", "rssi_dbm", "load", "interference", "utility"])
        .map_err(|e| csv_err(path, e))?;
    for term in &breakdown.terms {
        w.write_record([
            term.rp_index.to_string(),
            instance.ap(term.serving).id.clone(),
            format!("{}", term.rssi_dbm),
            format!("{}", term.load),
            format!("{}", term.interference),
            format!("{}", term.utility),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a 3-D embedding as CSV: `index,x,y,z`.
pub fn write_embedding_csv(path: &Path, embedding: &Embedding) -> Result<(), IoError> {
    let mut w = csv_writer(path)?;
    w.write_record(["index", "x", "y", "z"]).map_err(|e| csv_err(path, e))?;
    for (i, p) in embedding.coords.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{}", p[0]),
            format!("{}", p[1]),
            format!("{}", p[2]),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_embedding_csv(path: &Path) -> Result<Vec<[f64; 3]>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut coords = Vec::new();
    for (idx, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        if record.len() != 4 {
            return Err(IoError::BadLine {
                path: path.display().to_string(),
                line: idx + 2,
                reason: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| IoError::BadLine {
                path: path.display().to_string(),
                line: idx + 2,
                reason: format!("bad number: {e}"),
            })
        };
        coords.push([parse(&record[1])?, parse(&record[2])?, parse(&record[3])?]);
    }
    Ok(coords)
}

/// Serializes any report type as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let bytes = fs::read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| IoError::Json {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn save_search_report(path: &Path, report: &SearchReport) -> Result<(), IoError> {
    write_json(path, report)
}

pub fn save_selection_result(path: &Path, result: &SelectionResult) -> Result<(), IoError> {
    write_json(path, result)
}

/// Builds a reference-point set from complete rows loaded via
/// [`read_matrix_csv`], validated against the instance width.
pub fn rps_from_matrix(
    matrix: DenseMatrix,
    origin_ids: Vec<String>,
    ap_ids: &[String],
    instance: &NetworkInstance,
) -> Result<ReferencePointSet, IoError> {
    if ap_ids != instance.ap_ids().as_slice() {
        return Err(IoError::BadFormat(
            "matrix columns do not match the topology's AP order".into(),
        ));
    }
    Ok(ReferencePointSet::new(matrix, origin_ids, instance.n_aps())?)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, IoError> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> IoError {
    IoError::Csv {
        path: path.display().to_string(),
        source: e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UtilityParams;
    use crate::sim::network_utility;
    use crate::synth::{gen_uniform_scenario, PlParams};

    const LEVELS: [i32; 4] = [4, 12, 20, 28];

    #[test]
    fn jsonl_accepts_and_rejects_with_accounting() {
        let text = concat!(
            r#"{"ts":1,"sta":"s1","serving":"ap0","pl":{"ap0":55.0,"ap1":60.0}}"#,
            "\n\n",
            r#"{"ts":2,"sta":"s2","serving":"ap9","pl":{"ap0":55.0}}"#,
            "\n",
            r#"{"ts":3,"sta":"s3","serving":"ap0","pl":{"ap0":-5.0}}"#,
            "\n",
            "not json at all\n",
            r#"{"ts":4,"sta":"s4","serving":"ap1","pl":{"ap1":70.0,"ap0":62.5}}"#,
            "\n",
        );
        let (records, report) = read_measurements_jsonl(text.as_bytes(), None).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected, 3);
        // rejection is total: every non-blank line is accounted for
        assert_eq!(report.units_total, 5);
        assert_eq!(report.units_accepted + report.units_rejected, report.units_total);
        let reasons: Vec<&str> = report.rejects.iter().map(|(_, r)| r.as_str()).collect();
        assert!(reasons[0].contains("serving"), "{reasons:?}");
        assert!(reasons[1].contains("negative") || reasons[1].contains("ap0"), "{reasons:?}");
        assert!(reasons[2].contains("malformed"), "{reasons:?}");
        assert_eq!(records[0].sta_id, "s1");
        assert_eq!(records[1].pl["ap0"], 62.5);
    }

    #[test]
    fn jsonl_empty_input_is_empty_output() {
        let (records, report) = read_measurements_jsonl("".as_bytes(), None).unwrap();
        assert!(records.is_empty());
        assert_eq!(report.rejected, 0);
        assert_eq!(report.units_total, 0);
    }

    #[test]
    fn jsonl_rejects_unknown_ap_when_topology_given() {
        let text = r#"{"ts":1,"sta":"s1","serving":"ap0","pl":{"ap0":55.0,"zz":60.0}}"#;
        let known = vec!["ap0".to_string(), "ap1".to_string()];
        let (records, report) =
            read_measurements_jsonl(text.as_bytes(), Some(&known)).unwrap();
        assert!(records.is_empty());
        assert_eq!(report.rejected, 1);
        assert!(report.rejects[0].1.contains("unknown AP id `zz`"));
    }

    #[test]
    fn csv_groups_rows_into_records() {
        let text = "\
ts,sta,serving,ap_id,pl_db
1,s1,ap0,ap0,55.0
1,s1,ap0,ap1,60.0
2,s2,ap1,ap1,58.0
2,s2,ap1,ap0,64.0
2,s2,ap1,ap2,72.0
";
        let (records, report) = read_measurements_csv(text.as_bytes(), None).unwrap();
        assert_eq!(report.accepted, 2);
        assert_eq!(report.rejected, 0);
        assert_eq!(report.units_total, 5);
        assert_eq!(report.units_accepted, 5);
        assert_eq!(records[0].pl.len(), 2);
        assert_eq!(records[1].pl.len(), 3);
        assert_eq!(records[1].pl["ap2"], 72.0);
        assert_eq!(records[1].serving_ap, "ap1");
    }

    #[test]
    fn csv_rejects_invalid_groups() {
        // second group's serving AP is never measured
        let text = "\
ts,sta,serving,ap_id,pl_db
1,s1,ap0,ap0,55.0
1,s1,ap0,ap1,60.0
5,s9,ap7,ap0,44.0
";
        let (records, report) = read_measurements_csv(text.as_bytes(), None).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(report.accepted, 1);
        assert_eq!(report.rejected, 1);
        assert_eq!(report.units_total, 3);
        assert_eq!(report.units_accepted, 2);
        assert_eq!(report.units_rejected, 1);
        assert!(report.rejects[0].1.contains("serving"));
    }

    #[test]
    fn measurements_roundtrip_via_jsonl() {
        let s = gen_uniform_scenario(5, 12, 60.0, &LEVELS, None, &PlParams::default(), 3);
        let records = crate::synth::obfuscate(&s.ground_truth, &s.instance, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        write_measurements_jsonl(&path, &records).unwrap();
        let (loaded, report) =
            load_measurements_jsonl(&path, Some(&s.instance.ap_ids())).unwrap();
        assert_eq!(report.rejected, 0);
        assert_eq!(loaded.len(), records.len());
        for (a, b) in loaded.iter().zip(&records) {
            assert_eq!(a.ts, b.ts);
            assert_eq!(a.sta_id, b.sta_id);
            assert_eq!(a.serving_ap, b.serving_ap);
            assert_eq!(a.pl, b.pl);
        }
    }

    #[test]
    fn topology_roundtrip() {
        let s = gen_uniform_scenario(6, 10, 70.0, &LEVELS, Some(&[36, 40, 36]), &PlParams::default(), 8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topology.json");
        save_topology(&path, &s.instance).unwrap();
        let loaded = load_topology(&path).unwrap();
        assert_eq!(loaded.n_aps(), 6);
        assert_eq!(loaded.ap_ids(), s.instance.ap_ids());
        for a in 0..6 {
            assert_eq!(loaded.ap(a).allowed_levels, s.instance.ap(a).allowed_levels);
            assert_eq!(loaded.ap(a).channel, s.instance.ap(a).channel);
            for b in 0..6 {
                assert_eq!(loaded.pl_between(a, b), s.instance.pl_between(a, b));
                assert_eq!(loaded.overlaps(a, b), s.instance.overlaps(a, b));
            }
        }
    }

    #[test]
    fn topology_accepts_partial_matrix() {
        let text = r#"{
            "aps": [
                {"id": "a", "allowed_levels_dbm": [4, 12], "channel": 36},
                {"id": "b", "allowed_levels_dbm": [4, 12], "channel": 36}
            ],
            "ap_pl": [[0.0, 62.0], [null, 0.0]]
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        fs::write(&path, text).unwrap();
        let instance = load_topology(&path).unwrap();
        // single measured direction is mirrored
        assert_eq!(instance.pl_between(0, 1), 62.0);
        assert_eq!(instance.pl_between(1, 0), 62.0);
    }

    #[test]
    fn config_roundtrip_and_validation() {
        let s = gen_uniform_scenario(4, 8, 50.0, &LEVELS, None, &PlParams::default(), 2);
        let config = PowerConfig {
            levels: vec![4, 28, 12, 20],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        save_config(&path, &config, &s.instance).unwrap();
        let loaded = load_config(&path, &s.instance).unwrap();
        assert_eq!(loaded.levels, config.levels);

        // a disallowed level is refused
        let bad = r#"{"levels_dbm":{"ap0":5,"ap1":4,"ap2":4,"ap3":4}}"#;
        fs::write(&path, bad).unwrap();
        assert!(load_config(&path, &s.instance).is_err());
        // a missing AP is refused
        let missing = r#"{"levels_dbm":{"ap0":4,"ap1":4,"ap2":4}}"#;
        fs::write(&path, missing).unwrap();
        assert!(load_config(&path, &s.instance).is_err());
    }

    #[test]
    fn matrix_roundtrip_preserves_bits() {
        let s = gen_uniform_scenario(5, 20, 90.0, &LEVELS, None, &PlParams::with_shadowing(4.0), 13);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("groundtruth_test.csv");
        let ids = s.instance.ap_ids();
        write_matrix_csv(&path, s.ground_truth.matrix(), s.ground_truth.origin_ids(), &ids)
            .unwrap();
        let (matrix, origins, cols) = read_matrix_csv(&path).unwrap();
        assert_eq!(cols, ids);
        assert_eq!(origins, s.ground_truth.origin_ids());
        assert_eq!(matrix.as_slice(), s.ground_truth.matrix().as_slice());
        let rps = rps_from_matrix(matrix, origins, &cols, &s.instance).unwrap();
        assert_eq!(rps.len(), 20);
    }

    #[test]
    fn breakdown_csv_has_one_row_per_rp() {
        let s = gen_uniform_scenario(3, 7, 40.0, &LEVELS, None, &PlParams::default(), 21);
        let config = crate::optimizer::full_power(&s.instance);
        let breakdown =
            network_utility(&s.ground_truth, &config, &s.instance, &UtilityParams::default());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("breakdown.csv");
        write_breakdown_csv(&path, &breakdown, &s.instance).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert!(lines[0].starts_with("rp_index,serving_ap"));
        assert!(lines[1].starts_with("0,ap"));
    }

    #[test]
    fn embedding_csv_roundtrip() {
        let embedding = Embedding {
            coords: vec![[0.5, -1.25, 3.0], [2.0, 0.0, -0.125]],
            method: crate::selection::ProjectionMethod::Pca { dims: 3 },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embedding.csv");
        write_embedding_csv(&path, &embedding).unwrap();
        let coords = read_embedding_csv(&path).unwrap();
        assert_eq!(coords, embedding.coords);
    }
}
