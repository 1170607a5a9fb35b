//! Dataset statistics: counts by kind and source, relation histogram,
//! sentence-length distributions.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::LanguageRecord;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    /// token count -> number of records (token = whitespace-separated unit)
    pub histogram: BTreeMap<usize, usize>,
    pub count: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub records_total: usize,
    pub distinct_scenes: usize,
    /// "kind/source" -> count
    pub by_kind_source: BTreeMap<String, usize>,
    /// canonical relation name -> count over records carrying a relation
    pub relation_histogram: BTreeMap<String, usize>,
    /// source -> sentence length stats
    pub sentence_length: BTreeMap<String, LengthStats>,
}

fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Compute the full statistics report for a set of records.
pub fn corpus_stats(records: &[LanguageRecord]) -> StatsReport {
    let mut report = StatsReport {
        records_total: records.len(),
        ..Default::default()
    };
    let mut scenes = std::collections::BTreeSet::new();
    let mut lengths: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for record in records {
        scenes.insert(record.scene_id.as_str());
        *report
            .by_kind_source
            .entry(format!("{}/{}", record.kind, record.source))
            .or_insert(0) += 1;
        if let Some(relation) = record.relation {
            *report
                .relation_histogram
                .entry(relation.canonical().to_string())
                .or_insert(0) += 1;
        }
        lengths
            .entry(record.source.to_string())
            .or_default()
            .push(token_count(&record.text));
    }
    report.distinct_scenes = scenes.len();
    for (source, mut values) in lengths {
        values.sort_unstable();
        let count = values.len();
        let mean = values.iter().sum::<usize>() as f64 / count as f64;
        let median = if count % 2 == 1 {
            values[count / 2] as f64
        } else {
            (values[count / 2 - 1] + values[count / 2]) as f64 / 2.0
        };
        let mut histogram = BTreeMap::new();
        for v in values {
            *histogram.entry(v).or_insert(0usize) += 1;
        }
        report
            .sentence_length
            .insert(source, LengthStats { histogram, count, mean, median });
    }
    report
}

impl StatsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialization cannot fail")
    }

    /// Plain-text table rendering.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records total      {}", self.records_total);
        let _ = writeln!(out, "distinct scenes    {}", self.distinct_scenes);
        let _ = writeln!(out, "\nby kind/source");
        for (key, count) in &self.by_kind_source {
            let _ = writeln!(out, "  {key:<34} {count:>8}");
        }
        let _ = writeln!(out, "\nrelation histogram ({} kinds)", self.relation_histogram.len());
        for (relation, count) in &self.relation_histogram {
            let _ = writeln!(out, "  {relation:<34} {count:>8}");
        }
        let _ = writeln!(out, "\nsentence length by source (tokens)");
        for (source, stats) in &self.sentence_length {
            let _ = writeln!(
                out,
                "  {source:<12} n={:<7} mean={:.2} median={:.1}",
                stats.count, stats.mean, stats.median
            );
        }
        out
    }
}
