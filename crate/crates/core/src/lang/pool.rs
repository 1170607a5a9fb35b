//! Template pool: sentence skeletons plus the relation lexicon.
//!
//! Pools are data files so the corpus vocabulary can grow without code
//! changes; [`TemplatePool::builtin`] ships the default set.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scene::RelationType;

use super::LangError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarTemplates {
    pub all_same: Vec<String>,
    pub two_same: Vec<String>,
    pub all_distinct: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplatePool {
    pub pairwise: Vec<String>,
    pub between: Vec<String>,
    pub aligned: Vec<String>,
    pub star: StarTemplates,
    /// lexical key -> surface phrases (no copula; templates supply "is")
    pub lexicon: BTreeMap<String, Vec<String>>,
}

/// Lexical key for a relation: left/right get distance-graded keys, a `None`
/// grade selects the grade-neutral key used when one phrase covers anchors
/// at different distances.
pub fn lexical_key(relation: RelationType, near: Option<bool>) -> &'static str {
    match (relation, near) {
        (RelationType::LeftOf, Some(true)) => "near-left-of",
        (RelationType::LeftOf, Some(false)) => "far-left-of",
        (RelationType::RightOf, Some(true)) => "near-right-of",
        (RelationType::RightOf, Some(false)) => "far-right-of",
        (rel, _) => rel.canonical(),
    }
}

fn slots_of(template: &str) -> Vec<String> {
    let mut slots = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else { break };
        slots.push(rest[open + 1..open + close].to_string());
        rest = &rest[open + close + 1..];
    }
    slots.sort();
    slots.dedup();
    slots
}

fn check_slots(family: &str, templates: &[String], expected: &[&str]) -> Result<(), LangError> {
    if templates.is_empty() {
        return Err(LangError::InvalidPool(format!("no {family} templates")));
    }
    let mut expected: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
    expected.sort();
    for template in templates {
        let slots = slots_of(template);
        if slots != expected {
            return Err(LangError::InvalidPool(format!(
                "{family} template \"{template}\" has slots {slots:?}, expected {expected:?}"
            )));
        }
    }
    Ok(())
}

impl TemplatePool {
    /// The default pool shipped with the crate.
    pub fn builtin() -> Self {
        let pool: TemplatePool = serde_json::from_str(include_str!("../../data/templates.json"))
            .expect("builtin template pool is valid JSON");
        pool.validate().expect("builtin template pool is well formed");
        pool
    }

    pub fn from_json_str(text: &str) -> Result<Self, LangError> {
        let pool: TemplatePool =
            serde_json::from_str(text).map_err(|e| LangError::InvalidPool(e.to_string()))?;
        pool.validate()?;
        Ok(pool)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, LangError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LangError::InvalidPool(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// Check slot arity per family and lexicon coverage of all 21 relations
    /// (left/right need their graded keys too).
    pub fn validate(&self) -> Result<(), LangError> {
        check_slots("pairwise", &self.pairwise, &["target", "relation", "anchor"])?;
        check_slots("between", &self.between, &["target", "relation", "anchor1", "anchor2"])?;
        check_slots("aligned", &self.aligned, &["members", "relation"])?;
        check_slots("star.all_same", &self.star.all_same, &["target", "relation1", "anchor1", "anchor2", "anchor3"])?;
        check_slots(
            "star.two_same",
            &self.star.two_same,
            &["target", "relation1", "relation2", "anchor1", "anchor2", "anchor3"],
        )?;
        check_slots(
            "star.all_distinct",
            &self.star.all_distinct,
            &["target", "relation1", "relation2", "relation3", "anchor1", "anchor2", "anchor3"],
        )?;
        let mut required: Vec<&str> = RelationType::ALL.iter().map(|r| r.canonical()).collect();
        required.extend(["near-left-of", "far-left-of", "near-right-of", "far-right-of"]);
        for key in required {
            match self.lexicon.get(key) {
                Some(phrases) if !phrases.is_empty() => {}
                _ => {
                    return Err(LangError::InvalidPool(format!(
                        "lexicon has no surface phrase for \"{key}\""
                    )))
                }
            }
        }
        Ok(())
    }

    /// Phrases for a lexical key; validated pools cover every key produced
    /// by [`lexical_key`].
    pub fn phrases(&self, key: &str) -> &[String] {
        self.lexicon.get(key).map(Vec::as_slice).unwrap_or(&[])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_pool_is_valid() {
        let pool = TemplatePool::builtin();
        assert_eq!(pool.pairwise.len(), 5);
        assert!(pool.lexicon.len() >= 25);
    }

    #[test]
    fn every_relation_has_a_phrase() {
        let pool = TemplatePool::builtin();
        for rel in RelationType::ALL {
            for near in [Some(true), Some(false), None] {
                let key = lexical_key(rel, near);
                assert!(!pool.phrases(key).is_empty(), "missing phrases for {key}");
            }
        }
    }

    #[test]
    fn bad_slots_are_rejected() {
        let mut pool = TemplatePool::builtin();
        pool.pairwise.push("The {target} is {relacion} the {anchor}.".into());
        assert!(matches!(pool.validate(), Err(LangError::InvalidPool(_))));
    }

    #[test]
    fn missing_lexicon_key_is_rejected() {
        let mut pool = TemplatePool::builtin();
        pool.lexicon.remove("between");
        assert!(matches!(pool.validate(), Err(LangError::InvalidPool(_))));
    }
}
