//! Report rendering. Output is a pure function of the report, so equal
//! reports give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{Method, ReportFormat};
use super::experiment::ExperimentReport;
use crate::error::{MtsError, Result};

/// Column order of the decision log: `instance, truth, votes,
/// high_disagreement`, one answer column per method, then one
/// `<method>_followed_minority` column per non-majority method.
pub fn render_decision_log(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "instance".to_string(),
        "truth".into(),
        "votes".into(),
        "high_disagreement".into(),
    ];
    header.extend(report.methods.iter().map(|r| r.method.name().to_string()));
    let others: Vec<usize> = (0..report.methods.len())
        .filter(|&m| report.methods[m].method != Method::Majority)
        .collect();
    header.extend(
        others
            .iter()
            .map(|&m| format!("{}_followed_minority", report.methods[m].method.name())),
    );
    w.write_record(&header).map_err(csv_err)?;
    let majority = report.method_index(Method::Majority).unwrap_or(0);
    for d in &report.decisions {
        let mut row = vec![
            d.instance.to_string(),
            d.truth.to_string(),
            d.votes.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
            d.high_disagreement.to_string(),
        ];
        row.extend(d.answers.iter().map(|a| a.to_string()));
        row.extend(
            others
                .iter()
                .map(|&m| (d.answers[m] != d.answers[majority]).to_string()),
        );
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| MtsError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| MtsError::Serialization(e.to_string()))
}

fn csv_err(e: csv::Error) -> MtsError {
    MtsError::Serialization(e.to_string())
}

fn pct(v: f64) -> String {
    format!("{:.2}%", 100.0 * v)
}

fn x_of_y(net: i64, y: usize) -> String {
    format!("{net} out of {y}")
}

fn improvement(v: Option<f64>) -> String {
    v.map(|v| format!("{:+.2}%", 100.0 * v)).unwrap_or_else(|| "n/a".into())
}

pub fn render_markdown(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {}\n", report.name);
    let _ = writeln!(
        s,
        "seed {} | {} classes | {} members | train {} | test {} | high disagreement: majority count <= {} ({} instances)\n",
        report.seed,
        report.num_classes,
        report.member_names.len(),
        report.train_size,
        report.test_size,
        report.disagreement_threshold,
        report.subset_size
    );
    let titles: Vec<&str> = report.methods.iter().map(|r| r.method.title()).collect();
    let _ = writeln!(s, "| Dataset | {} |", titles.join(" | "));
    let _ = writeln!(s, "|---|{}", "---|".repeat(titles.len()));
    let accs: Vec<String> = report.methods.iter().map(|r| pct(r.accuracy)).collect();
    let _ = writeln!(s, "| {} | {} |\n", report.name, accs.join(" | "));
    let _ = writeln!(s, "| Method | x out of y | Improvement | Corrected | Broken |");
    let _ = writeln!(s, "|---|---|---|---|---|");
    for r in &report.methods {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            r.method.title(),
            x_of_y(r.net, report.subset_size),
            improvement(r.improvement),
            r.corrected,
            r.broken
        );
    }
    s
}

pub fn render_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "seed",
        "method",
        "accuracy",
        "subset_size",
        "corrected",
        "broken",
        "net",
        "improvement",
    ])
    .map_err(csv_err)?;
    for r in &report.methods {
        w.write_record([
            report.name.clone(),
            report.seed.to_string(),
            r.method.name().to_string(),
            format!("{:.6}", r.accuracy),
            report.subset_size.to_string(),
            r.corrected.to_string(),
            r.broken.to_string(),
            r.net.to_string(),
            r.improvement.map(|v| format!("{v:.6}")).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| MtsError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| MtsError::Serialization(e.to_string()))
}

pub fn render_plain(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} (seed {}, {} test instances, {} with high disagreement)",
        report.name, report.seed, report.test_size, report.subset_size
    );
    let _ = writeln!(
        s,
        "{:<18} {:>9} {:>14} {:>12}",
        "method", "accuracy", "x out of y", "improvement"
    );
    for r in &report.methods {
        let _ = writeln!(
            s,
            "{:<18} {:>9} {:>14} {:>12}",
            r.method.title(),
            pct(r.accuracy),
            x_of_y(r.net, report.subset_size),
            improvement(r.improvement)
        );
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| MtsError::io(path, e))
}

/// Writes `<name>_seed<seed>.<ext>` per format plus
/// `<name>_seed<seed>_decisions.csv`. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| MtsError::io(dir, e))?;
    let stem = format!("{}_seed{}", report.name, report.seed);
    let mut written = Vec::new();
    for &format in formats {
        let text = match format {
            ReportFormat::Markdown => render_markdown(report),
            ReportFormat::Csv => render_csv(report)?,
            ReportFormat::Plain => render_plain(report),
        };
        let path = dir.join(format!("{stem}.{}", format.extension()));
        write_file(&path, &text)?;
        written.push(path);
    }
    let path = dir.join(format!("{stem}_decisions.csv"));
    write_file(&path, &render_decision_log(report)?)?;
    written.push(path);
    Ok(written)
}

/// Means over seeds of one dataset's results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub seeds: Vec<u64>,
    pub mean_subset_size: f64,
    /// Per method: mean accuracy, mean corrected, mean broken, mean net.
    pub methods: BTreeMap<Method, MethodSummary>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub accuracy: f64,
    pub corrected: f64,
    pub broken: f64,
    pub net: f64,
}

/// Groups reports by name, preserving first-seen order.
pub fn summarize(reports: &[ExperimentReport]) -> Vec<DatasetSummary> {
    let mut order: Vec<String> = Vec::new();
    for r in reports {
        if !order.contains(&r.name) {
            order.push(r.name.clone());
        }
    }
    order
        .into_iter()
        .map(|name| {
            let group: Vec<&ExperimentReport> = reports.iter().filter(|r| r.name == name).collect();
            let n = group.len() as f64;
            let mut methods: BTreeMap<Method, MethodSummary> = BTreeMap::new();
            for r in &group {
                for m in &r.methods {
                    let e = methods.entry(m.method).or_insert(MethodSummary {
                        accuracy: 0.0,
                        corrected: 0.0,
                        broken: 0.0,
                        net: 0.0,
                    });
                    e.accuracy += m.accuracy / n;
                    e.corrected += m.corrected as f64 / n;
                    e.broken += m.broken as f64 / n;
                    e.net += m.net as f64 / n;
                }
            }
            DatasetSummary {
                name,
                seeds: group.iter().map(|r| r.seed).collect(),
                mean_subset_size: group.iter().map(|r| r.subset_size as f64).sum::<f64>() / n,
                methods,
            }
        })
        .collect()
}

/// Accuracy table (datasets x methods) and a mean x-out-of-y table.
pub fn render_bench_markdown(summaries: &[DatasetSummary]) -> String {
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| summaries.iter().any(|s| s.methods.contains_key(m)))
        .collect();
    let mut s = String::from("# Benchmark\n\n## Overall accuracy (mean over seeds)\n\n");
    let titles: Vec<&str> = methods.iter().map(|m| m.title()).collect();
    let _ = writeln!(s, "| Dataset | Seeds | {} |", titles.join(" | "));
    let _ = writeln!(s, "|---|---|{}", "---|".repeat(methods.len()));
    for d in summaries {
        let cells: Vec<String> = methods
            .iter()
            .map(|m| d.methods.get(m).map(|r| pct(r.accuracy)).unwrap_or_else(|| "-".into()))
            .collect();
        let _ = writeln!(s, "| {} | {} | {} |", d.name, d.seeds.len(), cells.join(" | "));
    }
    let _ = writeln!(s, "\n## High-disagreement subset: mean net x out of mean y\n");
    let mts: Vec<Method> = methods.iter().copied().filter(|&m| m != Method::Majority).collect();
    let titles: Vec<&str> = mts.iter().map(|m| m.title()).collect();
    let _ = writeln!(s, "| Dataset | {} |", titles.join(" | "));
    let _ = writeln!(s, "|---|{}", "---|".repeat(mts.len()));
    for d in summaries {
        let cells: Vec<String> = mts
            .iter()
            .map(|m| {
                d.methods
                    .get(m)
                    .map(|r| format!("{:.1} out of {:.1}", r.net, d.mean_subset_size))
                    .unwrap_or_else(|| "-".into())
            })
            .collect();
        let _ = writeln!(s, "| {} | {} |", d.name, cells.join(" | "));
    }
    s
}

pub fn render_bench_csv(summaries: &[DatasetSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "dataset",
        "seeds",
        "method",
        "accuracy",
        "mean_subset_size",
        "corrected",
        "broken",
        "net",
    ])
    .map_err(csv_err)?;
    for d in summaries {
        for (m, r) in &d.methods {
            w.write_record([
                d.name.clone(),
                d.seeds.len().to_string(),
                m.name().to_string(),
                format!("{:.6}", r.accuracy),
                format!("{:.3}", d.mean_subset_size),
                format!("{:.3}", r.corrected),
                format!("{:.3}", r.broken),
                format!("{:.3}", r.net),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| MtsError::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| MtsError::Serialization(e.to_string()))
}

/// Aligned text rendering of a decision log file.
pub fn inspect_decision_log(path: &Path, only_high: bool, limit: Option<usize>) -> Result<String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| MtsError::Ingestion {
        row: 0,
        column: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let high_col = header.iter().position(|h| h == "high_disagreement");
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut total = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        total += 1;
        if only_high && high_col.is_some_and(|c| &rec[c] != "true") {
            continue;
        }
        if limit.is_some_and(|l| rows.len() >= l) {
            continue;
        }
        rows.push(rec.iter().map(str::to_string).collect());
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut s = String::new();
    for row in std::iter::once(&header).chain(rows.iter()) {
        let cells: Vec<String> = row.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    let _ = writeln!(s, "{} of {} rows shown", rows.len(), total);
    Ok(s)
}
