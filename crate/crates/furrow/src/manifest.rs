//! Tab-separated dataset manifests.
//!
//! ```text
//! image_path<TAB>mask_path<TAB>split<TAB>has_edge<TAB>provenance
//! train/frame_0000_c0_rgb.png<TAB>train/frame_0000_c0_mask.png<TAB>train<TAB>true<TAB>field-a/frame_0000#0
//! ```
//!
//! Relative paths are relative to the manifest's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use furrow_core::datakit::{DatasetManifest, ManifestRecord, Split};

use crate::error::{Error, Result};

pub const MANIFEST_COLUMNS: [&str; 5] = ["image_path", "mask_path", "split", "has_edge", "provenance"];
pub const PAIR_COLUMNS: [&str; 2] = ["pred_path", "gt_path"];

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    image_path: String,
    mask_path: String,
    split: Split,
    #[serde(deserialize_with = "flag")]
    has_edge: bool,
    provenance: String,
}

fn flag<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.as_str() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(serde::de::Error::custom(format!(
            "has_edge must be true or false, got {other:?}"
        ))),
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn reader(path: &Path, expected: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_path(path)
        .map_err(csv_err(path))?;
    let headers = rdr.headers().map_err(csv_err(path))?;
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::format(path, format!("header must be {}", expected.join("\\t"))));
    }
    Ok(rdr)
}

/// Resolves `entry` against the directory holding `manifest`.
pub fn resolve(manifest: &Path, entry: &str) -> PathBuf {
    let p = Path::new(entry);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new("")).join(p)
    }
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let mut rdr = reader(path, &MANIFEST_COLUMNS)?;
    let mut records = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_err(path))?;
        records.push(ManifestRecord {
            image_path: row.image_path,
            mask_path: row.mask_path,
            split: row.split,
            has_edge: row.has_edge,
            provenance: row.provenance,
        });
    }
    Ok(DatasetManifest::new(records))
}

pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(MANIFEST_COLUMNS).map_err(csv_err(path))?;
    for r in &manifest.records {
        let has_edge = if r.has_edge { "true" } else { "false" };
        w.write_record([
            r.image_path.as_str(),
            r.mask_path.as_str(),
            r.split.as_str(),
            has_edge,
            r.provenance.as_str(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Checks that every referenced file exists.
pub fn check_paths(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    for r in &manifest.records {
        for entry in [&r.image_path, &r.mask_path] {
            let p = resolve(path, entry);
            if !p.is_file() {
                return Err(Error::format(path, format!("missing file {}", p.display())));
            }
        }
    }
    Ok(())
}

/// Reads a `pred_path<TAB>gt_path` list for scoring, paths resolved.
pub fn read_pairs(path: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut rdr = reader(path, &PAIR_COLUMNS)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        out.push((resolve(path, &rec[0]), resolve(path, &rec[1])));
    }
    Ok(out)
}

pub fn write_pairs(path: &Path, pairs: &[(String, String)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(PAIR_COLUMNS).map_err(csv_err(path))?;
    for (p, g) in pairs {
        w.write_record([p, g]).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
