use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geoqugan::dataset::{
    build_dataset, ingest_airports, sha256_file, sha256_hex, synthetic_airports, weights_of,
    write_dataset_csv, DatasetConfig, Provenance, QuadrupleRecord, EARTH_RADIUS_KM,
};
use geoqugan::metrics::{pcm4, tvs, ToleranceConfig};
use log::info;

use crate::cli::DatasetArgs;
use crate::{write_json, CliError, Result};

pub const PROVENANCE_VERSION: u32 = 1;

pub fn provenance_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    csv.with_file_name(name)
}

#[derive(Debug, Clone)]
pub struct DatasetSummary {
    pub records: Vec<QuadrupleRecord>,
    pub provenance: Provenance,
    pub tvs: f64,
    pub pcm4: f64,
}

pub fn run(args: &DatasetArgs) -> Result<DatasetSummary> {
    if args.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let cfg = DatasetConfig {
        n_quadruples: args.n,
        min_edge_km: args.min_edge_km,
        seed: args.seed,
    };
    let mut skipped = BTreeMap::new();
    let (airports, source, source_sha256) = match &args.source {
        Some(path) => {
            let report = ingest_airports(path)?;
            info!(
                "{}: {} airports kept, {} malformed, {} filtered, {} duplicate",
                path.display(),
                report.airports.len(),
                report.malformed,
                report.filtered,
                report.duplicates
            );
            skipped.insert("malformed".to_string(), report.malformed);
            skipped.insert("filtered".to_string(), report.filtered);
            skipped.insert("duplicate".to_string(), report.duplicates);
            (report.airports, path.display().to_string(), sha256_file(path)?)
        }
        None => {
            let desc = format!("synthetic:airports={},seed={}", args.synthetic_airports, args.seed);
            let sha = sha256_hex(desc.as_bytes());
            (synthetic_airports(args.synthetic_airports, args.seed), desc, sha)
        }
    };
    let records = build_dataset(&airports, &cfg)?;
    write_dataset_csv(&records, &args.out)?;
    let provenance = Provenance {
        format_version: PROVENANCE_VERSION,
        source,
        source_sha256,
        airports_retained: airports.len(),
        config: cfg,
        earth_radius_km: EARTH_RADIUS_KM,
        records: records.len(),
        skipped,
    };
    write_json(&provenance_path(&args.out), &provenance)?;

    let tol = ToleranceConfig::default();
    let w = weights_of(&records);
    let summary = DatasetSummary {
        tvs: tvs(&w, tol.triangle)?,
        pcm4: pcm4(&w, tol.ptolemy)?,
        records,
        provenance,
    };
    println!(
        "{} records -> {}\nTVS  {:6.2}%\n4PCM {:6.2}%",
        summary.records.len(),
        args.out.display(),
        100.0 * summary.tvs,
        100.0 * summary.pcm4
    );
    Ok(summary)
}
