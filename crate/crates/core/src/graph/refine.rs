//! Class-conditioned relation renaming, the automatic verification pass.
//!
//! A refinement rule rewrites `(target label, relation, anchor label)` to a
//! different relation of the same category, e.g. a tv hanging on a wall is
//! conventionally said to be mounted on it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scene::{RelationEdge, RelationType};

use super::GraphError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementRule {
    pub target_label: String,
    pub relation: RelationType,
    pub anchor_label: String,
    pub replacement: RelationType,
}

/// Validated set of refinement rules, keyed by (target label, relation, anchor label).
#[derive(Debug, Clone, Default)]
pub struct RefinementMap {
    rules: BTreeMap<(String, RelationType, String), RelationType>,
}

impl RefinementMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Build from rules, rejecting any rule whose replacement crosses categories.
    pub fn from_rules(rules: Vec<RefinementRule>) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for rule in rules {
            if rule.relation.category() != rule.replacement.category() {
                return Err(GraphError::CrossCategoryRefinement {
                    from: rule.relation,
                    to: rule.replacement,
                });
            }
            map.insert(
                (rule.target_label, rule.relation, rule.anchor_label),
                rule.replacement,
            );
        }
        Ok(RefinementMap { rules: map })
    }

    pub fn from_json_str(text: &str) -> Result<Self, GraphError> {
        let rules: Vec<RefinementRule> =
            serde_json::from_str(text).map_err(|e| GraphError::InvalidConfig(e.to_string()))?;
        Self::from_rules(rules)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| GraphError::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    /// The default rule set shipped with the crate.
    pub fn builtin() -> Self {
        Self::from_json_str(include_str!("../../data/refinement.json"))
            .expect("builtin refinement rules are valid")
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Rewrite matching edges in place; non-matching edges are untouched.
    pub fn apply<'a>(&self, edges: &mut [RelationEdge], label_of: impl Fn(u32) -> &'a str) {
        if self.rules.is_empty() {
            return;
        }
        for edge in edges.iter_mut() {
            let key = (
                label_of(edge.source).to_string(),
                edge.relation,
                label_of(edge.target).to_string(),
            );
            if let Some(&replacement) = self.rules.get(&key) {
                edge.relation = replacement;
            }
        }
    }
}
