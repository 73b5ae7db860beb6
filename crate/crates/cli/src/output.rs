//! Report documents, CSV tables and where they go.
//!
//! Every CSV file starts with `# bellman-verify <version> config=<sha256>`,
//! followed by a header row and the data.

use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use bellman_verify::bellman::{BellmanEval, BellmanPoint};
use bellman_verify::sim::{EnsembleReport, SweepRow};
use bellman_verify::verifier::VerificationReport;

use crate::{Failure, UsageError, TOOL, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

pub fn envelope<T: Serialize>(
    command: &str,
    hash: &str,
    config: &T,
    pass: bool,
    body: Value,
) -> Value {
    let mut doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config_hash": hash,
        "config": config,
        "pass": pass,
    });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, body) {
        d.extend(b);
    }
    doc
}

fn csv_text<F>(hash: &str, header: &[&str], fill: F) -> Result<String, Failure>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Internal(format!("csv: {e}"));
    wtr.write_record(header).map_err(err)?;
    fill(&mut wtr).map_err(err)?;
    let body = wtr
        .into_inner()
        .map_err(|e| Failure::Internal(format!("csv: {e}")))?;
    let mut out = format!("# {TOOL} {VERSION} config={hash}\n");
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    // `+ 0.0` turns −0 into 0.
    x.map(|v| (v + 0.0).to_string()).unwrap_or_default()
}

pub fn eval_csv(
    hash: &str,
    p: &BellmanPoint,
    e: &BellmanEval,
    eigenvalues: &[f64],
) -> Result<String, Failure> {
    let mut header = vec!["x", "y", "w", "v", "value", "region", "degenerate"];
    header.extend(["gx", "gy", "gw", "gv", "eig1", "eig2", "eig3", "eig4"]);
    csv_text(hash, &header, |w| {
        let mut row = vec![
            p.x.to_string(),
            p.y.to_string(),
            p.w.to_string(),
            p.v.to_string(),
            e.value.to_string(),
            e.region.name().to_string(),
            e.degenerate.to_string(),
        ];
        row.extend(e.gradient.iter().map(f64::to_string));
        row.extend(eigenvalues.iter().map(f64::to_string));
        w.write_record(&row)
    })
}

pub fn verify_csv(hash: &str, reports: &[VerificationReport]) -> Result<String, Failure> {
    let header = [
        "check",
        "pass",
        "total_points",
        "skipped_points",
        "worst_violation",
        "tolerance",
        "disagreements",
        "witness_c",
        "witness_x",
        "witness_y",
        "witness_w",
        "witness_v",
        "witness_value",
    ];
    csv_text(hash, &header, |w| {
        for top in reports {
            for r in top.flatten() {
                let wit = r.witness.as_ref();
                w.write_record([
                    r.check.clone(),
                    r.pass.to_string(),
                    r.total_points.to_string(),
                    r.skipped_points.to_string(),
                    opt(r.worst_violation),
                    r.tolerance.to_string(),
                    r.disagreements.to_string(),
                    opt(wit.map(|x| x.c)),
                    opt(wit.map(|x| x.point.x)),
                    opt(wit.map(|x| x.point.y)),
                    opt(wit.map(|x| x.point.w)),
                    opt(wit.map(|x| x.point.v)),
                    opt(wit.map(|x| x.value)),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn dump_csv(hash: &str, report: &VerificationReport) -> Result<String, Failure> {
    let header = ["check", "c", "x", "y", "w", "v", "region", "value", "violation"];
    csv_text(hash, &header, |w| {
        for r in report.flatten() {
            for d in &r.dump {
                w.write_record([
                    r.check.clone(),
                    d.c.to_string(),
                    d.point.x.to_string(),
                    d.point.y.to_string(),
                    d.point.w.to_string(),
                    d.point.v.to_string(),
                    d.region.clone(),
                    d.value.to_string(),
                    d.violation.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

pub fn trees_csv(hash: &str, rep: &EnsembleReport) -> Result<String, Failure> {
    let header = [
        "tree",
        "depth",
        "c_target",
        "characteristic",
        "h_law",
        "fallback",
        "l2_ratio",
        "raw_ratio",
        "one_sided_ratio",
        "two_sided_ratio",
        "eligible_nodes",
        "skipped_nodes",
        "worst_node_violation",
        "pass",
    ];
    csv_text(hash, &header, |w| {
        for t in &rep.trees {
            w.write_record([
                t.index.to_string(),
                t.depth.to_string(),
                t.c_target.to_string(),
                t.l2.characteristic.to_string(),
                t.h_law.name().to_string(),
                t.fallback.to_string(),
                t.l2.ratio.to_string(),
                t.l2.raw_ratio.to_string(),
                t.maximal.one_sided.to_string(),
                t.maximal.two_sided.to_string(),
                t.supermartingale.eligible.to_string(),
                t.supermartingale.skipped.to_string(),
                opt(t.supermartingale.worst_violation),
                (t.ratios_pass() && t.supermartingale.pass).to_string(),
            ])?;
        }
        Ok(())
    })
}

pub fn sweep_csv(hash: &str, rows: &[SweepRow]) -> Result<String, Failure> {
    let header = ["c_target", "trees", "mean_characteristic", "best_raw_ratio", "max_l2_ratio"];
    csv_text(hash, &header, |w| {
        for r in rows {
            w.write_record([
                r.c_target.to_string(),
                r.trees.to_string(),
                r.mean_characteristic.to_string(),
                r.best_raw_ratio.to_string(),
                r.max_l2_ratio.to_string(),
            ])?;
        }
        Ok(())
    })
}

/// One line of `report` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub source: String,
    pub check: String,
    pub pass: bool,
    pub points: usize,
    pub skipped: usize,
    pub worst: Option<f64>,
    pub tolerance: f64,
}

fn json_files(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        Ok(files)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        Err(UsageError(format!("no such report file or directory: {}", path.display())).into())
    }
}

fn rows_from_report(source: &str, r: &VerificationReport, out: &mut Vec<ReportRow>) {
    out.push(ReportRow {
        source: source.to_string(),
        check: r.check.clone(),
        pass: r.pass,
        points: r.total_points,
        skipped: r.skipped_points,
        worst: r.worst_violation,
        tolerance: r.tolerance,
    });
    for s in &r.subchecks {
        rows_from_report(source, s, out);
    }
}

pub fn collect_report_rows(inputs: &[PathBuf]) -> Result<Vec<ReportRow>, Failure> {
    let mut rows = Vec::new();
    for input in inputs {
        for path in json_files(input)? {
            let text = fs::read_to_string(&path)?;
            let doc: Value = serde_json::from_str(&text)
                .map_err(|e| UsageError(format!("{}: not JSON: {e}", path.display())))?;
            if doc.get("tool").and_then(Value::as_str) != Some(TOOL) {
                if input.is_dir() {
                    continue;
                }
                return Err(UsageError(format!("{}: not a {TOOL} report", path.display())).into());
            }
            let source = path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let bad = |what: &str, e: serde_json::Error| {
                Failure::Usage(format!("{}: malformed {what}: {e}", path.display()))
            };
            match doc.get("command").and_then(Value::as_str) {
                Some("verify") => {
                    let reports: Vec<VerificationReport> =
                        serde_json::from_value(doc["reports"].clone()).map_err(|e| bad("reports", e))?;
                    for r in &reports {
                        rows_from_report(&source, r, &mut rows);
                    }
                }
                Some("simulate") => {
                    let e: EnsembleReport =
                        serde_json::from_value(doc["ensemble"].clone()).map_err(|e| bad("ensemble", e))?;
                    let s = &e.summary;
                    let worst = s
                        .max_l2_ratio
                        .max(s.max_one_sided_ratio)
                        .max(s.max_two_sided_ratio);
                    rows.push(ReportRow {
                        source: source.clone(),
                        check: "ratios".to_string(),
                        pass: s.ratio_violations == 0,
                        points: s.trees,
                        skipped: 0,
                        worst: (s.trees > 0).then_some(worst),
                        tolerance: 1.0,
                    });
                    rows_from_report(&source, &e.supermartingale, &mut rows);
                }
                Some("eval") => {}
                _ => {
                    return Err(UsageError(format!("{}: unknown command", path.display())).into())
                }
            }
        }
    }
    Ok(rows)
}

/// Sends a document to stdout and, with `--out`, to files.
pub struct Emitter {
    out: Option<PathBuf>,
    format: Option<Format>,
    timings: bool,
}

impl Emitter {
    pub fn new(out: Option<PathBuf>, format: Option<Format>, timings: bool) -> Self {
        Self {
            out,
            format,
            timings,
        }
    }

    pub fn timings(&self) -> bool {
        self.timings
    }

    pub fn has_out(&self) -> bool {
        self.out.is_some()
    }

    pub fn out_dir(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    fn write(&self, name: &str, text: &str) -> Result<(), Failure> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    /// Writes `<command>.json` and `files` under `--out`, and prints either
    /// the JSON document or the first CSV table.
    pub fn emit(&self, command: &str, doc: &Value, files: &[(&str, String)]) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(doc)
            .map_err(|e| Failure::Internal(format!("json: {e}")))?;
        text.push('\n');
        self.write(&format!("{command}.json"), &text)?;
        for (name, body) in files {
            self.write(name, body)?;
        }
        match self.format {
            Some(Format::Csv) => print!("{}", files.first().map(|f| f.1.as_str()).unwrap_or("")),
            _ => print!("{text}"),
        }
        Ok(())
    }

    pub fn emit_report(&self, rows: &[ReportRow]) -> Result<(), Failure> {
        match self.format {
            Some(Format::Json) => {
                let pass = rows.iter().all(|r| r.pass);
                let doc = json!({ "tool": TOOL, "version": VERSION, "pass": pass, "rows": rows });
                let text = serde_json::to_string_pretty(&doc)
                    .map_err(|e| Failure::Internal(format!("json: {e}")))?;
                println!("{text}");
            }
            Some(Format::Csv) => {
                let mut wtr = csv::Writer::from_writer(std::io::stdout());
                for r in rows {
                    wtr.serialize(r)
                        .map_err(|e| Failure::Internal(format!("csv: {e}")))?;
                }
                wtr.flush()?;
            }
            None => {
                for r in rows {
                    println!(
                        "{:<4}  {:<22} {:>10} pts  worst {:>12}  tol {:<8}  [{}]",
                        if r.pass { "PASS" } else { "FAIL" },
                        r.check,
                        r.points,
                        r.worst.map(|w| format!("{w:.3e}")).unwrap_or_else(|| "-".to_string()),
                        r.tolerance,
                        r.source
                    );
                }
            }
        }
        Ok(())
    }
}
