//! Training corpus construction: airports → unique quadruples → haversine
//! sextuples → unit-sum edge weights.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use log::warn;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::k4::{EdgeWeights, EDGE_LABELS, EDGE_VERTICES, NUM_EDGES};

pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// 100 nautical miles.
pub const MIN_EDGE_KM: f64 = 185.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Airport {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl Airport {
    pub fn new(id: impl Into<String>, lat: f64, lon: f64) -> Result<Self> {
        let id = id.into();
        if !lat.is_finite() || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::input(format!("airport {id}: latitude {lat} out of range")));
        }
        if !lon.is_finite() || !(-180.0..=180.0).contains(&lon) {
            return Err(Error::input(format!("airport {id}: longitude {lon} out of range")));
        }
        Ok(Self { id, lat, lon })
    }
}

/// Great-circle distance on a sphere of radius [`EARTH_RADIUS_KM`].
pub fn haversine_km(p: &Airport, q: &Airport) -> f64 {
    let (phi1, phi2) = (p.lat.to_radians(), q.lat.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (q.lon - p.lon).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// Haversine distance between raw coordinates, validating ranges.
pub fn haversine_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64> {
    Ok(haversine_km(&Airport::new("p", lat1, lon1)?, &Airport::new("q", lat2, lon2)?))
}

/// `e / Σe`.
pub fn normalize(raw: &[f64; NUM_EDGES]) -> EdgeWeights {
    let s: f64 = raw.iter().sum();
    raw.map(|x| x / s)
}

/// One sampled K4: vertices `A < B < C < D` by identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadrupleRecord {
    pub ids: [String; 4],
    pub km: [f64; NUM_EDGES],
    pub weights: EdgeWeights,
}

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    pub airports: Vec<Airport>,
    /// Rows that failed to parse or had out-of-range coordinates.
    pub malformed: usize,
    /// Rows whose type column is present and not `airport`.
    pub filtered: usize,
    pub duplicates: usize,
}

const LAT_COL: usize = 6;
const LON_COL: usize = 7;
const TYPE_COL: usize = 12;

/// Parses the public airport-database layout: comma-separated, no header,
/// latitude/longitude in columns 7/8 and, in the extended layout, the
/// facility type in column 13 (1-based).
pub fn parse_airports<R: Read>(reader: R, source: &str) -> IngestReport {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    for (line, row) in rdr.records().enumerate() {
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                warn!("{source}:{}: unreadable row: {e}", line + 1);
                report.malformed += 1;
                continue;
            }
        };
        if row.len() > TYPE_COL && row[TYPE_COL].trim() != "airport" {
            report.filtered += 1;
            continue;
        }
        let parsed = (row.len() > LON_COL)
            .then(|| {
                let lat = row[LAT_COL].trim().parse::<f64>().ok()?;
                let lon = row[LON_COL].trim().parse::<f64>().ok()?;
                Airport::new(row[0].trim(), lat, lon).ok()
            })
            .flatten()
            .filter(|a| !a.id.is_empty());
        let Some(airport) = parsed else {
            warn!("{source}:{}: malformed airport row", line + 1);
            report.malformed += 1;
            continue;
        };
        if seen.insert(airport.id.clone()) {
            report.airports.push(airport);
        } else {
            report.duplicates += 1;
        }
    }
    report
}

pub fn ingest_airports(path: &Path) -> Result<IngestReport> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_airports(BufReader::new(file), &path.display().to_string()))
}

/// Regions loosely following where commercial airports concentrate:
/// `(lat, lon, spread in degrees, weight)`.
const REGIONS: [(f64, f64, f64, f64); 10] = [
    (40.0, -95.0, 12.0, 0.28),
    (50.0, 10.0, 8.0, 0.20),
    (32.0, 112.0, 10.0, 0.10),
    (22.0, 78.0, 8.0, 0.05),
    (-15.0, -55.0, 12.0, 0.08),
    (5.0, 20.0, 15.0, 0.08),
    (-25.0, 135.0, 12.0, 0.05),
    (60.0, 90.0, 15.0, 0.06),
    (25.0, 45.0, 8.0, 0.05),
    (10.0, 110.0, 8.0, 0.05),
];

/// Offline stand-in for the airport table: points drawn from a mixture of
/// regional Gaussian clusters on the sphere.
pub fn synthetic_airports(n: usize, seed: u64) -> Vec<Airport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = WeightedIndex::new(REGIONS.iter().map(|r| r.3)).expect("positive weights");
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    (0..n)
        .map(|i| {
            let (lat0, lon0, spread, _) = REGIONS[pick.sample(&mut rng)];
            let lat = (lat0 + spread * unit.sample(&mut rng)).clamp(-89.0, 89.0);
            let lon = lon0 + 1.5 * spread * unit.sample(&mut rng);
            let lon = (lon + 180.0).rem_euclid(360.0) - 180.0;
            Airport::new(format!("SYN{i:05}"), lat, lon).expect("clamped into range")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub n_quadruples: usize,
    pub min_edge_km: f64,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            n_quadruples: 10_000,
            min_edge_km: MIN_EDGE_KM,
            seed: 0,
        }
    }
}

fn binomial4(n: usize) -> u128 {
    let n = n as u128;
    if n < 4 {
        0
    } else {
        n * (n - 1) * (n - 2) * (n - 3) / 24
    }
}

/// Rejection-samples unique unordered airport quadruples whose six
/// geodesic edges all reach `min_edge_km`.
pub fn build_dataset(airports: &[Airport], cfg: &DatasetConfig) -> Result<Vec<QuadrupleRecord>> {
    if airports.len() < 4 {
        return Err(Error::input(format!(
            "need at least 4 airports, got {}",
            airports.len()
        )));
    }
    if binomial4(airports.len()) < cfg.n_quadruples as u128 {
        return Err(Error::input(format!(
            "{} airports give only {} quadruples, {} requested",
            airports.len(),
            binomial4(airports.len()),
            cfg.n_quadruples
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen: HashSet<[usize; 4]> = HashSet::with_capacity(cfg.n_quadruples);
    let mut rejected: HashSet<[usize; 4]> = HashSet::new();
    let mut records = Vec::with_capacity(cfg.n_quadruples);
    let max_attempts = 1000 * cfg.n_quadruples.max(1) + 100_000;

    for _ in 0..max_attempts {
        if records.len() == cfg.n_quadruples {
            break;
        }
        let mut quad: [usize; 4] = index::sample(&mut rng, airports.len(), 4)
            .into_vec()
            .try_into()
            .expect("four indices");
        quad.sort_by(|&a, &b| airports[a].id.cmp(&airports[b].id).then(a.cmp(&b)));
        if seen.contains(&quad) || rejected.contains(&quad) {
            continue;
        }
        let km: [f64; NUM_EDGES] = std::array::from_fn(|e| {
            let (u, v) = EDGE_VERTICES[e];
            haversine_km(&airports[quad[u]], &airports[quad[v]])
        });
        if km.iter().any(|&d| d < cfg.min_edge_km) {
            rejected.insert(quad);
            continue;
        }
        seen.insert(quad);
        records.push(QuadrupleRecord {
            ids: quad.map(|i| airports[i].id.clone()),
            km,
            weights: normalize(&km),
        });
    }
    if records.len() < cfg.n_quadruples {
        return Err(Error::input(format!(
            "found only {} of {} valid unique quadruples",
            records.len(),
            cfg.n_quadruples
        )));
    }
    Ok(records)
}

pub fn weights_of(records: &[QuadrupleRecord]) -> Vec<EdgeWeights> {
    records.iter().map(|r| r.weights).collect()
}

fn csv_header() -> Vec<String> {
    let mut h: Vec<String> = ["id_a", "id_b", "id_c", "id_d"].map(String::from).to_vec();
    h.extend(EDGE_LABELS.iter().map(|e| format!("km_{}", e.to_lowercase())));
    h.extend(EDGE_LABELS.iter().map(|e| format!("w_{}", e.to_lowercase())));
    h
}

pub fn write_dataset_csv(records: &[QuadrupleRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(csv_header()).map_err(|e| Error::csv(path, e))?;
    for r in records {
        let row = r
            .ids
            .iter()
            .cloned()
            .chain(r.km.iter().map(f64::to_string))
            .chain(r.weights.iter().map(f64::to_string));
        w.write_record(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_dataset_csv(path: &Path) -> Result<Vec<QuadrupleRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(String::from)
        .collect();
    if header != csv_header() {
        return Err(Error::input(format!("{}: unexpected dataset header", path.display())));
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let num = |c: usize| -> Result<f64> {
            row[c].parse().map_err(|_| {
                Error::input(format!("{}: row {}: bad number '{}'", path.display(), i + 2, &row[c]))
            })
        };
        let mut km = [0.0; NUM_EDGES];
        let mut weights = [0.0; NUM_EDGES];
        for e in 0..NUM_EDGES {
            km[e] = num(4 + e)?;
            weights[e] = num(4 + NUM_EDGES + e)?;
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 || weights.iter().any(|&w| w < 0.0) {
            return Err(Error::input(format!(
                "{}: row {}: weights are not on the simplex",
                path.display(),
                i + 2
            )));
        }
        out.push(QuadrupleRecord {
            ids: std::array::from_fn(|k| row[k].to_string()),
            km,
            weights,
        });
    }
    if out.is_empty() {
        return Err(Error::input(format!("{}: dataset is empty", path.display())));
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// JSON sidecar written next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub format_version: u32,
    pub source: String,
    /// Checksum of the airport table, or of the generator settings for
    /// synthetic sources.
    pub source_sha256: String,
    pub airports_retained: usize,
    pub config: DatasetConfig,
    pub earth_radius_km: f64,
    pub records: usize,
    /// Counts of skipped input rows by reason.
    pub skipped: BTreeMap<String, usize>,
}
