//! CSV and JSON writers for the command-line outputs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::coreid::{CorePartition, RankSelection};
use crate::error::{CorexError, Result};

fn bit(b: bool) -> u8 {
    u8::from(b)
}

/// `node_id,is_core`
pub fn write_truth_csv<W: Write>(truth: &[bool], mut out: W) -> Result<()> {
    writeln!(out, "node_id,is_core")?;
    for (i, &t) in truth.iter().enumerate() {
        writeln!(out, "{i},{}", bit(t))?;
    }
    Ok(())
}

/// `node_id,score`
pub fn write_scores_csv<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    writeln!(out, "node_id,score")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    Ok(())
}

/// `node_id,is_core,score`
pub fn write_partition_csv<W: Write>(partition: &CorePartition, values: &[f64], mut out: W) -> Result<()> {
    if partition.labels.len() != values.len() {
        return Err(CorexError::domain("partition and scores differ in length"));
    }
    writeln!(out, "node_id,is_core,score")?;
    for (i, (&c, v)) in partition.labels.iter().zip(values).enumerate() {
        writeln!(out, "{i},{},{v}", bit(c))?;
    }
    Ok(())
}

/// `method,fpr,tpr`
pub fn write_roc_csv<W: Write>(method: &str, points: &[(f64, f64)], mut out: W) -> Result<()> {
    writeln!(out, "method,fpr,tpr")?;
    for (fpr, tpr) in points {
        writeln!(out, "{method},{fpr},{tpr}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RankExport {
    chosen_r: usize,
    losses: Vec<(usize, f64)>,
    folds: usize,
    holdout_fraction: f64,
}

/// `{"chosen_r": .., "losses": [[r, loss], ..], ..}`
pub fn write_rank_json<W: Write>(sel: &RankSelection, out: W) -> Result<()> {
    let export = RankExport {
        chosen_r: sel.chosen_r,
        losses: sel.candidates.iter().copied().zip(sel.candidate_losses.iter().copied()).collect(),
        folds: sel.folds,
        holdout_fraction: sel.holdout_fraction,
    };
    write_json(&export, out)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Buffered file writer; the closure's output is flushed before returning.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
