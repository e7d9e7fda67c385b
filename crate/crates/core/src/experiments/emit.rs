//! Result persistence: slice/eval/history CSV emitters, key-value reports,
//! run manifests, and the per-iteration output layout of a run.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiments::eval::EvalReport;
use crate::experiments::seed_study::SeedStudy;
use crate::experiments::slice::{DiscontinuityMetrics, SliceResult};
use crate::nn;
use crate::q_iteration::{IterationHistory, save_targets};
use crate::textio;

pub const SLICE_HEADER: &str = "theta,value";
pub const EVAL_CSV_HEADER: &str = "seed,avg_return,success_rate,successful,n_episodes,max_steps";
pub const HISTORY_HEADER: &str = "iteration,avg_return,success_rate,successful";

/// Write a slice as CSV: policy and metrics in comments, then theta,value
/// rows with bit-exact floats.
pub fn emit_slice_csv(result: &SliceResult, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(result.thetas.len() * 40 + 128);
    textio::push_comment(&mut out, "policy", &result.policy);
    textio::push_comment(
        &mut out,
        "max_adjacent_jump",
        result.metrics.max_adjacent_jump,
    );
    if let Some(ratio) = result.metrics.refinement_ratio {
        textio::push_comment(&mut out, "refinement_ratio", ratio);
    }
    out.push_str(SLICE_HEADER);
    out.push('\n');
    for (theta, value) in result.thetas.iter().zip(&result.values) {
        let _ = writeln!(out, "{theta},{value}");
    }
    textio::write_file(path, &out)
}

pub fn read_slice_csv(path: &Path) -> Result<SliceResult> {
    let text = textio::read_file(path)?;
    let lines: Vec<&str> = text.lines().collect();
    let (comments, first_data) = textio::leading_comments(&lines);
    let mut policy = String::new();
    let mut max_adjacent_jump = 0.0;
    let mut refinement_ratio = None;
    for (key, value) in &comments {
        match key.as_str() {
            "policy" => policy = value.clone(),
            "max_adjacent_jump" => {
                max_adjacent_jump = textio::parse_field(value, "a number", path, 1, 1)?;
            }
            "refinement_ratio" => {
                refinement_ratio = Some(textio::parse_field(value, "a number", path, 1, 1)?);
            }
            _ => {}
        }
    }
    if lines.get(first_data).copied() != Some(SLICE_HEADER) {
        return Err(Error::parse(
            path,
            first_data + 1,
            1,
            format!("expected slice header {SLICE_HEADER:?}"),
        ));
    }
    let mut thetas = Vec::new();
    let mut values = Vec::new();
    for (off, line) in lines[first_data + 1..].iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let line_no = first_data + 2 + off;
        let fields = textio::fields_with_columns(line);
        if fields.len() != 2 {
            return Err(Error::parse(
                path,
                line_no,
                1,
                format!("expected 2 fields, got {}", fields.len()),
            ));
        }
        thetas.push(textio::parse_field(
            fields[0].1,
            "a number",
            path,
            line_no,
            fields[0].0,
        )?);
        values.push(textio::parse_field(
            fields[1].1,
            "a number",
            path,
            line_no,
            fields[1].0,
        )?);
    }
    Ok(SliceResult {
        thetas,
        values,
        policy,
        metrics: DiscontinuityMetrics {
            max_adjacent_jump,
            refinement_ratio,
        },
    })
}

/// Write a seed study as CSV, one row per seed, summary in trailing comments.
pub fn emit_eval_csv(study: &SeedStudy, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(EVAL_CSV_HEADER);
    out.push('\n');
    for (seed, r) in study.seeds.iter().zip(&study.reports) {
        let _ = writeln!(
            out,
            "{seed},{},{},{},{},{}",
            r.avg_return,
            r.success_rate,
            textio::flag(r.successful),
            r.n_episodes,
            r.max_steps
        );
    }
    let s = &study.summary;
    let _ = writeln!(
        out,
        "# summary min={} q1={} median={} q3={} max={}",
        s.min, s.q1, s.median, s.q3, s.max
    );
    textio::write_file(path, &out)
}

pub fn read_eval_csv(path: &Path) -> Result<Vec<(u64, EvalReport)>> {
    let text = textio::read_file(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == EVAL_CSV_HEADER {
            continue;
        }
        let fields = textio::fields_with_columns(line);
        if fields.len() != 6 {
            return Err(Error::parse(
                path,
                line_no,
                1,
                format!("expected 6 fields, got {}", fields.len()),
            ));
        }
        let seed = textio::parse_field(fields[0].1, "a seed", path, line_no, fields[0].0)?;
        rows.push((
            seed,
            EvalReport {
                avg_return: textio::parse_field(
                    fields[1].1,
                    "a number",
                    path,
                    line_no,
                    fields[1].0,
                )?,
                success_rate: textio::parse_field(
                    fields[2].1,
                    "a number",
                    path,
                    line_no,
                    fields[2].0,
                )?,
                successful: textio::parse_flag(
                    fields[3].1,
                    "successful",
                    path,
                    line_no,
                    fields[3].0,
                )?,
                n_episodes: textio::parse_field(
                    fields[4].1,
                    "a count",
                    path,
                    line_no,
                    fields[4].0,
                )?,
                max_steps: textio::parse_field(fields[5].1, "a count", path, line_no, fields[5].0)?,
            },
        ));
    }
    Ok(rows)
}

/// One line of a history CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    pub avg_return: f64,
    pub success_rate: f64,
    pub successful: bool,
}

pub fn emit_history_csv(history: &IterationHistory, path: &Path) -> Result<()> {
    let mut out = String::new();
    textio::push_comment(&mut out, "variant", history.variant);
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for record in &history.records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            record.iteration,
            record.eval.avg_return,
            record.eval.success_rate,
            textio::flag(record.eval.successful)
        );
    }
    textio::write_file(path, &out)
}

pub fn read_history_csv(path: &Path) -> Result<Vec<HistoryRow>> {
    let text = textio::read_file(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.is_empty() || line.starts_with('#') || line == HISTORY_HEADER {
            continue;
        }
        let fields = textio::fields_with_columns(line);
        if fields.len() != 4 {
            return Err(Error::parse(
                path,
                line_no,
                1,
                format!("expected 4 fields, got {}", fields.len()),
            ));
        }
        rows.push(HistoryRow {
            iteration: textio::parse_field(fields[0].1, "an index", path, line_no, fields[0].0)?,
            avg_return: textio::parse_field(fields[1].1, "a number", path, line_no, fields[1].0)?,
            success_rate: textio::parse_field(fields[2].1, "a number", path, line_no, fields[2].0)?,
            successful: textio::parse_flag(fields[3].1, "successful", path, line_no, fields[3].0)?,
        });
    }
    Ok(rows)
}

/// Key-value text form of one evaluation report.
pub fn write_eval_report(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "avg_return={}", report.avg_return);
    let _ = writeln!(out, "success_rate={}", report.success_rate);
    let _ = writeln!(out, "successful={}", report.successful);
    let _ = writeln!(out, "n_episodes={}", report.n_episodes);
    let _ = writeln!(out, "max_steps={}", report.max_steps);
    textio::write_file(path, &out)
}

pub fn read_eval_report(path: &Path) -> Result<EvalReport> {
    let text = textio::read_file(path)?;
    let mut report = EvalReport {
        avg_return: 0.0,
        success_rate: 0.0,
        successful: false,
        n_episodes: 0,
        max_steps: 0,
    };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        match key {
            "avg_return" => {
                report.avg_return = textio::parse_field(value, "a number", path, line_no, 1)?;
            }
            "success_rate" => {
                report.success_rate = textio::parse_field(value, "a number", path, line_no, 1)?;
            }
            "successful" => report.successful = value == "true",
            "n_episodes" => {
                report.n_episodes = textio::parse_field(value, "a count", path, line_no, 1)?;
            }
            "max_steps" => {
                report.max_steps = textio::parse_field(value, "a count", path, line_no, 1)?;
            }
            _ => {}
        }
    }
    Ok(report)
}

/// Persist a full run: `history.csv`, the trained transition model when one
/// exists, and one directory per iteration with its target set, fitted
/// parameters, and evaluation report.
pub fn save_history(history: &IterationHistory, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    emit_history_csv(history, &dir.join("history.csv"))?;
    if let Some(model) = &history.model {
        crate::dynamics_model::save_model(model, &dir.join("model.csv"))?;
    }
    for record in &history.records {
        let iter_dir = dir.join(format!("iter_{:03}", record.iteration));
        std::fs::create_dir_all(&iter_dir).map_err(|e| Error::io(&iter_dir, e))?;
        save_targets(&record.targets, &iter_dir.join("targets.csv"))?;
        nn::save_params(&record.q.params, &iter_dir.join("q_params.csv"))?;
        write_eval_report(&record.eval, &iter_dir.join("eval.txt"))?;
    }
    Ok(())
}

/// Write a run manifest: `key=value` lines sorted by key. No timestamps, so
/// identical configurations produce identical manifests.
pub fn write_manifest(entries: &[(String, String)], path: &Path) -> Result<()> {
    let mut sorted: Vec<_> = entries.to_vec();
    sorted.sort();
    let mut out = String::new();
    for (key, value) in sorted {
        let _ = writeln!(out, "{key}={value}");
    }
    textio::write_file(path, &out)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    Ok(hex)
}
