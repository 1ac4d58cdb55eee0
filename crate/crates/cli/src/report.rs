//! Cross-run tables plus per-run curve and histogram CSVs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use geoqugan::metrics::MetricsReport;
use geoqugan::trainer::{TrainLog, MODEL_PRESETS};
use log::warn;

use crate::cli::ReportArgs;
use crate::run::{load_weights, missing_outputs, read_samples, RunManifest, MANIFEST_FILE,
    METRICS_FILE, SAMPLES_FILE, TRAIN_LOG_FILE};
use crate::{io_err, read_json, write_file, Result};

const GROUPS: [(&str, &[&str]); 3] = [
    (
        "Architectural Comparison",
        &["gan_classic", "qugan_ring", "qugan_all_to_all", "qugan_triangle", "qugan_opposite", "qugan_combined"],
    ),
    (
        "Triangle Topology Variants",
        &[
            "qugan_triangle_cyclic_cnot",
            "qugan_triangle_cyclic_crot",
            "qugan_triangle_noncyclic_cnot",
            "qugan_triangle_noncyclic_crot",
        ],
    ),
    ("Model Enhancements", &["qugan_triangle_loss", "qugan_triangle_loss_scale"]),
];

pub fn group_of(model: &str) -> &'static str {
    GROUPS
        .iter()
        .find(|(_, models)| models.contains(&model))
        .map_or("Other", |(g, _)| g)
}

/// `qugan_triangle_noncyclic_crot` -> `QuGAN Triangle Non-Cyclic CRot`.
pub fn display_name(model: &str) -> String {
    model
        .replace("all_to_all", "all-to-all")
        .split('_')
        .map(|w| match w {
            "gan" => "GAN".to_string(),
            "qugan" => "QuGAN".to_string(),
            "cnot" => "CNOT".to_string(),
            "crot" => "CRot".to_string(),
            "noncyclic" => "Non-Cyclic".to_string(),
            "all-to-all" => "All-to-All".to_string(),
            w => {
                let mut c = w.chars();
                c.next().map_or(String::new(), |f| f.to_uppercase().chain(c).collect())
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub run: PathBuf,
    pub model: String,
    pub seed: u64,
    pub metrics: MetricsReport,
}

impl ReportRow {
    fn order(&self) -> (usize, u64) {
        let idx = MODEL_PRESETS
            .iter()
            .position(|p| p.name == self.model)
            .unwrap_or(usize::MAX);
        (idx, self.seed)
    }
}

/// Run directories named directly, or one level below a named root.
fn discover(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.join(MANIFEST_FILE).is_file() || !p.is_dir() {
            out.push(p.clone());
            continue;
        }
        let mut children: Vec<PathBuf> = std::fs::read_dir(p)
            .map_err(io_err(p))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|c| c.join(MANIFEST_FILE).is_file())
            .collect();
        if children.is_empty() {
            out.push(p.clone());
        }
        children.sort();
        out.extend(children);
    }
    Ok(out)
}

fn run_label(row: &ReportRow) -> String {
    row.run
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| format!("{}_seed{}", row.model, row.seed))
}

pub const REPORT_HEADER: [&str; 18] = [
    "group", "model", "seed", "n_samples", "wass", "wass_low", "wass_high", "js", "js_low",
    "js_high", "tvs_pct", "tvs_low", "tvs_high", "pcm4_pct", "pcm4_low", "pcm4_high", "sigma",
    "run",
];

fn csv_table(rows: &[ReportRow]) -> String {
    let mut out = REPORT_HEADER.join(",");
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        let pct = |x: f64| 100.0 * x;
        let fields = [
            group_of(&r.model).to_string(),
            r.model.clone(),
            r.seed.to_string(),
            m.n_samples.to_string(),
            m.wass.point.to_string(),
            m.wass.ci_low.to_string(),
            m.wass.ci_high.to_string(),
            m.js.point.to_string(),
            m.js.ci_low.to_string(),
            m.js.ci_high.to_string(),
            pct(m.tvs.point).to_string(),
            pct(m.tvs.ci_low).to_string(),
            pct(m.tvs.ci_high).to_string(),
            pct(m.pcm4.point).to_string(),
            pct(m.pcm4.ci_low).to_string(),
            pct(m.pcm4.ci_high).to_string(),
            m.sigma.point.to_string(),
            run_label(r),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn text_table(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    let header = format!(
        "{:<34} {:>4}  {:<24} {:<24} {:>7} {:<17} {:>7} {:<17}",
        "Model", "Seed", "Wass.", "JS Div.", "TVS %", "TVS 95% CI", "4PCM %", "4PCM 95% CI"
    );
    let rule = "-".repeat(header.len());
    let _ = writeln!(out, "{header}\n{rule}");
    let mut group = "";
    for r in rows {
        let g = group_of(&r.model);
        if g != group {
            if !group.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "{g}");
            group = g;
        }
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{:<34} {:>4}  {:<24} {:<24} {:>7.2} {:<17} {:>7.2} {:<17}",
            display_name(&r.model),
            r.seed,
            format!("{:.3} [{:.3}, {:.3}]", m.wass.point, m.wass.ci_low, m.wass.ci_high),
            format!("{:.3} [{:.3}, {:.3}]", m.js.point, m.js.ci_low, m.js.ci_high),
            100.0 * m.tvs.point,
            format!("[{:.2}, {:.2}]", 100.0 * m.tvs.ci_low, 100.0 * m.tvs.ci_high),
            100.0 * m.pcm4.point,
            format!("[{:.2}, {:.2}]", 100.0 * m.pcm4.ci_low, 100.0 * m.pcm4.ci_high),
        );
    }
    out
}

fn curve_csv(log: &TrainLog) -> String {
    let mut out = String::from("epoch,sigma_batch,tvs,pcm4,wass,js\n");
    for r in log.records() {
        let _ = writeln!(out, "{},{},{},{},{},{}", r.epoch, r.sigma_batch, r.tvs, r.pcm4, r.wass, r.js);
    }
    out
}

/// Pooled edge-weight histogram; each sample contributes its six weights.
fn histogram_csv(run: &Path, manifest: &RunManifest) -> Result<String> {
    let samples = read_samples(&run.join(SAMPLES_FILE))?;
    let hist = manifest.config.metrics.histogram;
    let generated = hist.counts(samples.iter().flatten().copied());
    let real = match load_weights(&manifest.dataset.path) {
        Ok((data, _)) => Some(hist.counts(data.iter().flatten().copied())),
        Err(e) => {
            warn!("{}: real histogram skipped: {e}", run.display());
            None
        }
    };
    let edges = hist.edges();
    let mut out = String::from("bin_low,bin_high,generated,real\n");
    for (i, g) in generated.iter().enumerate() {
        let r = real.as_ref().map(|c| c[i].to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{g},{r}", edges[i], edges[i + 1]);
    }
    Ok(out)
}

#[derive(Debug)]
pub struct ReportOutcome {
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<(PathBuf, String)>,
}

pub fn run(args: &ReportArgs) -> Result<ReportOutcome> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for run in discover(&args.runs)? {
        let missing = missing_outputs(&run);
        if !missing.is_empty() {
            let why = format!("missing {}", missing.join(", "));
            eprintln!("skipping {}: {why}", run.display());
            skipped.push((run, why));
            continue;
        }
        let manifest = match RunManifest::load(&run) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("skipping {}: {e}", run.display());
                skipped.push((run, e.to_string()));
                continue;
            }
        };
        let metrics: MetricsReport = read_json(&run.join(METRICS_FILE))?;
        rows.push((
            ReportRow {
                run: run.clone(),
                model: manifest.model.clone(),
                seed: manifest.seed,
                metrics,
            },
            manifest,
        ));
    }
    if rows.is_empty() {
        return Err(geoqugan::Error::Input("no finished runs to report".into()).into());
    }
    rows.sort_by_key(|(r, _)| r.order());

    let curves = args.out.join("curves");
    let hists = args.out.join("histograms");
    for dir in [&args.out, &curves, &hists] {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    for (row, manifest) in &rows {
        let label = run_label(row);
        let log = TrainLog::read_csv(&row.run.join(TRAIN_LOG_FILE))?;
        write_file(&curves.join(format!("{label}.csv")), curve_csv(&log))?;
        write_file(&hists.join(format!("{label}.csv")), histogram_csv(&row.run, manifest)?)?;
    }
    let rows: Vec<ReportRow> = rows.into_iter().map(|(r, _)| r).collect();
    let text = text_table(&rows);
    write_file(&args.out.join("report.csv"), csv_table(&rows))?;
    write_file(&args.out.join("report.txt"), &text)?;
    print!("{text}");
    Ok(ReportOutcome { rows, skipped })
}
