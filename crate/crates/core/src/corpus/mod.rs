//! Corpus records, sharded JSONL persistence and deterministic merging.

pub mod stats;

pub use stats::{corpus_stats, StatsReport};

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scene::RelationType;
use crate::seed::hex_digest;

/// What a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    ObjectCaption,
    ObjectReferral,
    SceneCaption,
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RecordKind::ObjectCaption => "object_caption",
            RecordKind::ObjectReferral => "object_referral",
            RecordKind::SceneCaption => "scene_caption",
        };
        f.write_str(s)
    }
}

/// How the text was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordSource {
    Template,
    Rephrased,
    Summary,
}

impl fmt::Display for RecordSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RecordSource::Template => "template",
            RecordSource::Rephrased => "rephrased",
            RecordSource::Summary => "summary",
        };
        f.write_str(s)
    }
}

/// One scene-text pair with provenance and a deterministic id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageRecord {
    pub record_id: String,
    pub scene_id: String,
    pub kind: RecordKind,
    pub target_id: Option<u32>,
    pub anchor_ids: Vec<u32>,
    pub relation: Option<RelationType>,
    pub text: String,
    pub source: RecordSource,
    pub flags: Vec<String>,
    pub seed: u64,
}

impl LanguageRecord {
    /// Content-addressed id over everything that identifies the record slot
    /// (not the text, so template/rephrased pairs share all fields but source).
    pub fn compute_id(
        scene_id: &str,
        kind: RecordKind,
        source: RecordSource,
        target_id: Option<u32>,
        anchor_ids: &[u32],
        relation: Option<RelationType>,
        discriminator: &str,
        seed: u64,
    ) -> String {
        let anchors = anchor_ids.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(",");
        let target = target_id.map(|id| id.to_string()).unwrap_or_default();
        let relation = relation.map(|r| r.canonical()).unwrap_or("");
        hex_digest(
            &[
                "record",
                scene_id,
                &kind.to_string(),
                &source.to_string(),
                &target,
                &anchors,
                relation,
                discriminator,
                &seed.to_string(),
            ],
            16,
        )
    }

    /// json-referral invariant: referrals must carry a target and relation.
    pub fn check(&self) -> Result<(), CorpusError> {
        if self.kind == RecordKind::ObjectReferral && (self.target_id.is_none() || self.relation.is_none()) {
            return Err(CorpusError::InvalidRecord(format!(
                "object_referral record {} lacks target_id or relation",
                self.record_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path} line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("duplicate record_id {id}: \"{first}\" and \"{second}\"")]
    DuplicateId { id: String, first: String, second: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

/// Write records as JSONL sorted by record_id. Atomic: temp file + rename.
/// Duplicate record ids are an error naming both records.
pub fn write_records(records: &[LanguageRecord], shard_path: &Path) -> Result<usize, CorpusError> {
    for record in records {
        record.check()?;
    }
    let mut sorted: Vec<&LanguageRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    for pair in sorted.windows(2) {
        if pair[0].record_id == pair[1].record_id {
            return Err(CorpusError::DuplicateId {
                id: pair[0].record_id.clone(),
                first: pair[0].text.clone(),
                second: pair[1].text.clone(),
            });
        }
    }
    let dir = shard_path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|source| CorpusError::Io { path: dir.to_path_buf(), source })?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|source| CorpusError::Io { path: shard_path.to_path_buf(), source })?;
    for record in &sorted {
        let line = serde_json::to_string(record).expect("record serialization cannot fail");
        writeln!(tmp, "{line}").map_err(|source| CorpusError::Io {
            path: shard_path.to_path_buf(),
            source,
        })?;
    }
    tmp.persist(shard_path)
        .map_err(|e| CorpusError::Io { path: shard_path.to_path_buf(), source: e.error })?;
    Ok(sorted.len())
}

/// Read one JSONL shard.
pub fn read_records(path: &Path) -> Result<Vec<LanguageRecord>, CorpusError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: LanguageRecord = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Merge shards into one corpus file, globally sorted by record_id.
/// Byte-identical output for any shard order; overlapping ids are an error.
pub fn merge_shards(paths: &[PathBuf], out_path: &Path) -> Result<usize, CorpusError> {
    let mut all: Vec<LanguageRecord> = Vec::new();
    for path in paths {
        all.extend(read_records(path)?);
    }
    all.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    for pair in all.windows(2) {
        if pair[0].record_id == pair[1].record_id {
            return Err(CorpusError::DuplicateId {
                id: pair[0].record_id.clone(),
                first: pair[0].text.clone(),
                second: pair[1].text.clone(),
            });
        }
    }
    write_records(&all, out_path)
}

/// Run manifest: inputs, digests, seeds and outputs of one pipeline run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub root_seed: u64,
    pub inputs: Vec<String>,
    pub scene_files: BTreeMap<String, String>,
    pub graph_files: BTreeMap<String, String>,
    pub corpus_files: Vec<String>,
    pub stats_file: Option<String>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serialization cannot fail");
        std::fs::write(path, text).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CorpusError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id_seed: u64, scene: &str, text: &str) -> LanguageRecord {
        let record_id = LanguageRecord::compute_id(
            scene,
            RecordKind::ObjectReferral,
            RecordSource::Template,
            Some(1),
            &[2],
            Some(RelationType::NextTo),
            "",
            id_seed,
        );
        LanguageRecord {
            record_id,
            scene_id: scene.into(),
            kind: RecordKind::ObjectReferral,
            target_id: Some(1),
            anchor_ids: vec![2],
            relation: Some(RelationType::NextTo),
            text: text.into(),
            source: RecordSource::Template,
            flags: vec![],
            seed: id_seed,
        }
    }

    #[test]
    fn writes_sorted_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shard.jsonl");
        let records = vec![record(3, "s", "c"), record(1, "s", "a"), record(2, "s", "b")];
        let count = write_records(&records, &path).unwrap();
        assert_eq!(count, 3);
        let read_back = read_records(&path).unwrap();
        assert_eq!(read_back.len(), 3);
        let mut ids: Vec<String> = read_back.iter().map(|r| r.record_id.clone()).collect();
        let sorted = {
            let mut s = ids.clone();
            s.sort();
            s
        };
        assert_eq!(ids, sorted);
        ids.dedup();
        assert_eq!(ids.len(), 3);
    }

    #[test]
    fn empty_list_creates_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        assert_eq!(write_records(&[], &path).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");
    }

    #[test]
    fn duplicate_ids_error_names_both_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.jsonl");
        let a = record(1, "s", "first text");
        let mut b = record(1, "s", "second text");
        b.text = "second text".into();
        let err = write_records(&[a, b], &path).unwrap_err();
        match err {
            CorpusError::DuplicateId { first, second, .. } => {
                assert_eq!(first, "first text");
                assert_eq!(second, "second text");
            }
            other => panic!("expected duplicate error, got {other}"),
        }
    }

    #[test]
    fn merge_is_order_independent() {
        let dir = tempfile::tempdir().unwrap();
        let shard_a = dir.path().join("a.jsonl");
        let shard_b = dir.path().join("b.jsonl");
        write_records(&[record(1, "s1", "a"), record(2, "s1", "b")], &shard_a).unwrap();
        write_records(&[record(3, "s2", "c")], &shard_b).unwrap();
        let out_ab = dir.path().join("ab.jsonl");
        let out_ba = dir.path().join("ba.jsonl");
        merge_shards(&[shard_a.clone(), shard_b.clone()], &out_ab).unwrap();
        merge_shards(&[shard_b, shard_a], &out_ba).unwrap();
        assert_eq!(
            std::fs::read(&out_ab).unwrap(),
            std::fs::read(&out_ba).unwrap()
        );
    }

    #[test]
    fn merge_of_single_shard_is_a_copy() {
        let dir = tempfile::tempdir().unwrap();
        let shard = dir.path().join("only.jsonl");
        write_records(&[record(1, "s", "a")], &shard).unwrap();
        let out = dir.path().join("merged.jsonl");
        merge_shards(&[shard.clone()], &out).unwrap();
        assert_eq!(std::fs::read(&shard).unwrap(), std::fs::read(&out).unwrap());
    }

    #[test]
    fn merge_rejects_overlapping_ids() {
        let dir = tempfile::tempdir().unwrap();
        let shard_a = dir.path().join("a.jsonl");
        let shard_b = dir.path().join("b.jsonl");
        write_records(&[record(1, "s", "a")], &shard_a).unwrap();
        write_records(&[record(1, "s", "a")], &shard_b).unwrap();
        let out = dir.path().join("merged.jsonl");
        assert!(matches!(
            merge_shards(&[shard_a, shard_b], &out),
            Err(CorpusError::DuplicateId { .. })
        ));
    }

    #[test]
    fn referral_without_target_is_invalid() {
        let mut bad = record(1, "s", "a");
        bad.target_id = None;
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_records(&[bad], &dir.path().join("x.jsonl")),
            Err(CorpusError::InvalidRecord(_))
        ));
    }
}
