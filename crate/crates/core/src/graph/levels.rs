//! Hierarchy level assignment along support chains.
//!
//! The floor root sits at level -1; every node with an in-contact parent is
//! one level above its parent. Hangable nodes inherit the level of their
//! primary non-contact anchor, or 0 when they have none.

use std::collections::BTreeMap;

use super::GraphError;

/// Compute levels for every node id in `node_ids`.
///
/// `parents` maps a node to its single in-contact parent; `anchor_of_hangable`
/// maps a hangable node to its primary non-contact anchor. Cycles in the
/// parent map are corrupted input and produce an error listing the cycle.
pub fn assign_levels(
    node_ids: &[u32],
    floor_id: u32,
    parents: &BTreeMap<u32, u32>,
    anchor_of_hangable: &BTreeMap<u32, u32>,
) -> Result<BTreeMap<u32, i32>, GraphError> {
    let mut levels: BTreeMap<u32, i32> = BTreeMap::new();
    levels.insert(floor_id, -1);

    let hangable: Vec<u32> = node_ids
        .iter()
        .copied()
        .filter(|id| *id != floor_id && !parents.contains_key(id))
        .collect();

    loop {
        let mut changed = false;
        for &id in node_ids {
            if levels.contains_key(&id) {
                continue;
            }
            if let Some(parent) = parents.get(&id) {
                if let Some(&parent_level) = levels.get(parent) {
                    levels.insert(id, parent_level + 1);
                    changed = true;
                }
            } else if id != floor_id {
                match anchor_of_hangable.get(&id) {
                    Some(anchor) => {
                        if let Some(&anchor_level) = levels.get(anchor) {
                            levels.insert(id, anchor_level);
                            changed = true;
                        }
                    }
                    None => {
                        levels.insert(id, 0);
                        changed = true;
                    }
                }
            }
        }
        if changed {
            continue;
        }
        // Stuck: break anchor deadlocks among hangable nodes deterministically,
        // lowest id first; a genuine parent cycle is an error.
        if let Some(&id) = hangable.iter().find(|id| !levels.contains_key(id)) {
            levels.insert(id, 0);
            continue;
        }
        if let Some(&start) = node_ids.iter().find(|id| !levels.contains_key(id)) {
            return Err(GraphError::SupportCycle(extract_cycle(start, parents)));
        }
        break;
    }
    Ok(levels)
}

fn extract_cycle(start: u32, parents: &BTreeMap<u32, u32>) -> Vec<u32> {
    let mut chain = vec![start];
    let mut current = start;
    while let Some(&next) = parents.get(&current) {
        if let Some(pos) = chain.iter().position(|&id| id == next) {
            return chain[pos..].to_vec();
        }
        chain.push(next);
        current = next;
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_from_floor_counts_up() {
        // floor(0) <- table(1) <- cup(2)
        let parents = BTreeMap::from([(1, 0), (2, 1)]);
        let levels = assign_levels(&[0, 1, 2], 0, &parents, &BTreeMap::new()).unwrap();
        assert_eq!(levels[&0], -1);
        assert_eq!(levels[&1], 0);
        assert_eq!(levels[&2], 1);
    }

    #[test]
    fn floor_only_scene_is_valid() {
        let levels = assign_levels(&[0], 0, &BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[&0], -1);
    }

    #[test]
    fn stacked_boxes_differ_by_one() {
        let parents = BTreeMap::from([(1, 0), (2, 1)]);
        let levels = assign_levels(&[0, 1, 2], 0, &parents, &BTreeMap::new()).unwrap();
        assert_eq!(levels[&2] - levels[&1], 1);
    }

    #[test]
    fn hangable_inherits_anchor_level_or_zero() {
        // wall(1) on floor(0); painting(2) anchored to wall; drone(3) anchored to nothing
        let parents = BTreeMap::from([(1, 0)]);
        let anchors = BTreeMap::from([(2, 1)]);
        let levels = assign_levels(&[0, 1, 2, 3], 0, &parents, &anchors).unwrap();
        assert_eq!(levels[&2], 0);
        assert_eq!(levels[&3], 0);
    }

    #[test]
    fn anchor_deadlock_breaks_deterministically() {
        let anchors = BTreeMap::from([(1, 2), (2, 1)]);
        let levels = assign_levels(&[0, 1, 2], 0, &BTreeMap::new(), &anchors).unwrap();
        assert_eq!(levels[&1], 0);
        assert_eq!(levels[&2], 0);
    }

    #[test]
    fn parent_cycle_is_reported() {
        let parents = BTreeMap::from([(1, 2), (2, 3), (3, 1)]);
        let err = assign_levels(&[0, 1, 2, 3], 0, &parents, &BTreeMap::new()).unwrap_err();
        match err {
            GraphError::SupportCycle(cycle) => {
                let mut sorted = cycle.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, vec![1, 2, 3]);
            }
            other => panic!("expected cycle error, got {other}"),
        }
    }
}
