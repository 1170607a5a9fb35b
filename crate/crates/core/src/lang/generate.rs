//! Template rendering and the per-scene record generation layer.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample as index_sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{LanguageRecord, RecordKind, RecordSource};
use crate::scene::{MultiKind, MultiRelation, RelationEdge, RelationType, SceneGraph};
use crate::seed::{derive_seed, rng_for};

use super::pool::{lexical_key, TemplatePool};
use super::prompts::instruction_for;
use super::rephrase::{
    deterministic_scene_summary, rephrase, RephraseClient, RephraseKind, RephraseRequest,
};
use super::LangError;

/// Per-scene sampling counts for record generation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LangConfig {
    pub referrals_per_scene: usize,
    pub star_per_scene: usize,
    pub scene_captions_per_scene: usize,
    pub prompt_max_nodes: usize,
    pub prompt_max_edges: usize,
}

impl Default for LangConfig {
    fn default() -> Self {
        LangConfig {
            referrals_per_scene: 12,
            star_per_scene: 3,
            scene_captions_per_scene: 1,
            prompt_max_nodes: 20,
            prompt_max_edges: 10,
        }
    }
}

fn capitalize_first(mut s: String) -> String {
    if let Some(first) = s.chars().next() {
        if first.is_ascii_lowercase() {
            s.replace_range(0..1, &first.to_ascii_uppercase().to_string());
        }
    }
    s
}

fn render(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (slot, value) in slots {
        out = out.replace(&format!("{{{slot}}}"), value);
    }
    capitalize_first(out)
}

fn ordinal(k: usize) -> &'static str {
    match k {
        2 => "a second",
        3 => "a third",
        4 => "a fourth",
        5 => "a fifth",
        _ => "another",
    }
}

/// Duplicate labels get ordinal prefixes so every mention stays
/// distinguishable: "one lamp ... the other lamp".
fn disambiguate(labels: &[&str]) -> Vec<String> {
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for label in labels {
        *totals.entry(label).or_insert(0) += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|label| {
            let total = totals[label];
            let occurrence = {
                let entry = seen.entry(label).or_insert(0);
                *entry += 1;
                *entry
            };
            if total == 1 {
                label.to_string()
            } else if occurrence == 1 {
                format!("one {label}")
            } else if total == 2 {
                format!("the other {label}")
            } else {
                format!("{} {label}", ordinal(occurrence))
            }
        })
        .collect()
}

/// Member list with articles, e.g. "the chair, the stool and the bench" or
/// "one chair, a second chair and a third chair".
fn members_list(labels: &[&str]) -> String {
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for label in labels {
        *totals.entry(label).or_insert(0) += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let rendered: Vec<String> = labels
        .iter()
        .map(|label| {
            let total = totals[label];
            let occurrence = {
                let entry = seen.entry(label).or_insert(0);
                *entry += 1;
                *entry
            };
            if total == 1 {
                format!("the {label}")
            } else if occurrence == 1 {
                format!("one {label}")
            } else if total == 2 {
                format!("the other {label}")
            } else {
                format!("{} {label}", ordinal(occurrence))
            }
        })
        .collect();
    join_list(&rendered)
}

fn join_list(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].clone(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

/// Render one pairwise referral for the triplet (target, relation key, anchor).
///
/// `key` is a lexical key as produced by [`lexical_key`]; multi-object keys
/// are rejected. A same-label anchor is rendered as "other {label}".
pub fn gen_pairwise(
    target: &str,
    key: &str,
    anchor: &str,
    pool: &TemplatePool,
    seed: u64,
) -> Result<String, LangError> {
    if key == "between" || key == "aligned" {
        return Err(LangError::Precondition(format!(
            "gen_pairwise cannot render multi-object relation {key}"
        )));
    }
    let phrases = pool.phrases(key);
    if phrases.is_empty() {
        return Err(LangError::Precondition(format!("no surface phrases for \"{key}\"")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = &pool.pairwise[rng.random_range(0..pool.pairwise.len())];
    let phrase = &phrases[rng.random_range(0..phrases.len())];
    let anchor_text = if anchor == target { format!("other {anchor}") } else { anchor.to_string() };
    Ok(render(template, &[("target", target), ("relation", phrase), ("anchor", &anchor_text)]))
}

/// Render a `between` referral; identical anchor labels get ordinals.
pub fn gen_between(
    target: &str,
    anchors: [&str; 2],
    pool: &TemplatePool,
    seed: u64,
) -> Result<String, LangError> {
    let phrases = pool.phrases("between");
    if phrases.is_empty() {
        return Err(LangError::Precondition("no surface phrases for \"between\"".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = &pool.between[rng.random_range(0..pool.between.len())];
    let phrase = &phrases[rng.random_range(0..phrases.len())];
    let rendered = disambiguate(&anchors);
    Ok(render(
        template,
        &[
            ("target", target),
            ("relation", phrase),
            ("anchor1", &rendered[0]),
            ("anchor2", &rendered[1]),
        ],
    ))
}

/// Render an `aligned` referral naming every member.
pub fn gen_aligned(members: &[&str], pool: &TemplatePool, seed: u64) -> Result<String, LangError> {
    if members.len() < 3 {
        return Err(LangError::Precondition(format!(
            "aligned needs at least 3 members, got {}",
            members.len()
        )));
    }
    let phrases = pool.phrases("aligned");
    if phrases.is_empty() {
        return Err(LangError::Precondition("no surface phrases for \"aligned\"".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = &pool.aligned[rng.random_range(0..pool.aligned.len())];
    let phrase = &phrases[rng.random_range(0..phrases.len())];
    let list = members_list(members);
    Ok(render(template, &[("members", &list), ("relation", phrase)]))
}

/// Cluster shape of the three relations of a star reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterKind {
    AllSame,
    TwoSame,
    AllDistinct,
}

/// Classify a 3-relation multiset; total and permutation-invariant.
pub fn classify_star(relations: [RelationType; 3]) -> ClusterKind {
    let [a, b, c] = relations;
    if a == b && b == c {
        ClusterKind::AllSame
    } else if a == b || b == c || a == c {
        ClusterKind::TwoSame
    } else {
        ClusterKind::AllDistinct
    }
}

/// One arm of a star reference.
#[derive(Debug, Clone)]
pub struct StarEdge {
    pub relation: RelationType,
    /// graded lexical key for a single-anchor clause
    pub key: String,
    pub anchor_label: String,
}

/// Render a star reference: one target described through three anchors, with
/// the template family picked by cluster analysis of the three relations.
/// Merged clauses use the grade-neutral phrase of the shared relation.
pub fn gen_star(
    target: &str,
    edges: &[StarEdge; 3],
    pool: &TemplatePool,
    seed: u64,
) -> Result<String, LangError> {
    let kind = classify_star([edges[0].relation, edges[1].relation, edges[2].relation]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick_phrase = |rng: &mut ChaCha8Rng, key: &str| -> Result<String, LangError> {
        let phrases = pool.phrases(key);
        if phrases.is_empty() {
            return Err(LangError::Precondition(format!("no surface phrases for \"{key}\"")));
        }
        Ok(phrases[rng.random_range(0..phrases.len())].clone())
    };
    match kind {
        ClusterKind::AllSame => {
            let template = pool.star.all_same[rng.random_range(0..pool.star.all_same.len())].clone();
            let shared = pick_phrase(&mut rng, lexical_key(edges[0].relation, None))?;
            let labels: Vec<&str> = edges.iter().map(|e| e.anchor_label.as_str()).collect();
            let anchors = disambiguate(&labels);
            Ok(render(
                &template,
                &[
                    ("target", target),
                    ("relation1", &shared),
                    ("anchor1", &anchors[0]),
                    ("anchor2", &anchors[1]),
                    ("anchor3", &anchors[2]),
                ],
            ))
        }
        ClusterKind::TwoSame => {
            // the pair renders first, the odd relation last
            let (pair, odd) = if edges[0].relation == edges[1].relation {
                ([&edges[0], &edges[1]], &edges[2])
            } else if edges[0].relation == edges[2].relation {
                ([&edges[0], &edges[2]], &edges[1])
            } else {
                ([&edges[1], &edges[2]], &edges[0])
            };
            let template = pool.star.two_same[rng.random_range(0..pool.star.two_same.len())].clone();
            let shared = pick_phrase(&mut rng, lexical_key(pair[0].relation, None))?;
            let odd_phrase = pick_phrase(&mut rng, &odd.key)?;
            let labels = [
                pair[0].anchor_label.as_str(),
                pair[1].anchor_label.as_str(),
                odd.anchor_label.as_str(),
            ];
            let anchors = disambiguate(&labels);
            Ok(render(
                &template,
                &[
                    ("target", target),
                    ("relation1", &shared),
                    ("relation2", &odd_phrase),
                    ("anchor1", &anchors[0]),
                    ("anchor2", &anchors[1]),
                    ("anchor3", &anchors[2]),
                ],
            ))
        }
        ClusterKind::AllDistinct => {
            let template =
                pool.star.all_distinct[rng.random_range(0..pool.star.all_distinct.len())].clone();
            let phrases: Vec<String> = edges
                .iter()
                .map(|e| pick_phrase(&mut rng, &e.key))
                .collect::<Result<_, _>>()?;
            let labels: Vec<&str> = edges.iter().map(|e| e.anchor_label.as_str()).collect();
            let anchors = disambiguate(&labels);
            Ok(render(
                &template,
                &[
                    ("target", target),
                    ("relation1", &phrases[0]),
                    ("relation2", &phrases[1]),
                    ("relation3", &phrases[2]),
                    ("anchor1", &anchors[0]),
                    ("anchor2", &anchors[1]),
                    ("anchor3", &anchors[2]),
                ],
            ))
        }
    }
}

/// Prompt payload plus instruction for one scene caption request.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePrompt {
    pub instruction: String,
    pub payload_json: String,
}

#[derive(Serialize)]
struct PromptPayload {
    scene_type: String,
    object_count: BTreeMap<String, usize>,
    relation: Vec<[String; 3]>,
}

/// Build the scene-caption prompt payload: scene type, full object counts
/// (seeded label subset only above `max_nodes` distinct labels) and a seeded
/// sample of at most `max_edges` relation triplets.
pub fn build_scene_prompt(
    graph: &SceneGraph,
    max_nodes: usize,
    max_edges: usize,
    near_max_m: f64,
    pool: &TemplatePool,
    seed: u64,
) -> Result<ScenePrompt, LangError> {
    if graph.nodes.is_empty() {
        return Err(LangError::Precondition("cannot build a prompt for an empty graph".into()));
    }
    let mut rng = rng_for(seed, &["scene-prompt"]);
    let mut object_count: BTreeMap<String, usize> = BTreeMap::new();
    for node in graph.nodes.values() {
        *object_count.entry(node.label.clone()).or_insert(0) += 1;
    }
    if object_count.len() > max_nodes {
        let labels: Vec<String> = object_count.keys().cloned().collect();
        let keep: BTreeSet<usize> = index_sample(&mut rng, labels.len(), max_nodes).into_iter().collect();
        object_count = labels
            .iter()
            .enumerate()
            .filter(|(i, _)| keep.contains(i))
            .map(|(_, label)| (label.clone(), object_count[label]))
            .collect();
    }
    let sample_size = max_edges.min(graph.edges.len());
    let mut chosen: Vec<usize> = index_sample(&mut rng, graph.edges.len(), sample_size)
        .into_iter()
        .collect();
    chosen.sort_unstable();
    let relation = chosen
        .into_iter()
        .map(|i| {
            let edge = &graph.edges[i];
            let near = edge.geom.distance <= near_max_m;
            let key = lexical_key(edge.relation, Some(near));
            let phrase = pool
                .phrases(key)
                .first()
                .cloned()
                .unwrap_or_else(|| edge.relation.canonical().to_string());
            [
                graph.label(edge.source).to_string(),
                phrase,
                graph.label(edge.target).to_string(),
            ]
        })
        .collect();
    let payload = PromptPayload {
        scene_type: graph.room_type.clone().unwrap_or_else(|| "room".to_string()),
        object_count,
        relation,
    };
    Ok(ScenePrompt {
        instruction: instruction_for(RephraseKind::SceneSummary).to_string(),
        payload_json: serde_json::to_string(&payload).expect("payload serialization cannot fail"),
    })
}

/// Everything record generation needs besides the graph.
pub struct GenContext<'a> {
    pub pool: &'a TemplatePool,
    pub cfg: &'a LangConfig,
    /// near/far grade threshold, from the graph config
    pub near_max_m: f64,
    pub client: &'a dyn RephraseClient,
    /// emit a rephrased twin for every template referral
    pub rephrase_referrals: bool,
}

const REPHRASE_KINDS: [RephraseKind; 3] = [
    RephraseKind::ReferralSimple,
    RephraseKind::ReferralSubjectLocked,
    RephraseKind::ReferralEnriched,
];

/// Generate every language record for one scene graph: sampled pairwise and
/// multi-object referrals (plus rephrased twins), star references, and scene
/// captions. Output is sorted by record id and depends only on
/// (graph, pool, config, seed, client behavior).
pub fn generate_scene_records(
    graph: &SceneGraph,
    ctx: &GenContext,
    scene_seed: u64,
) -> Result<Vec<LanguageRecord>, LangError> {
    let mut records = Vec::new();

    // Pairwise and multi-object referrals share one sampling pool.
    let candidate_count = graph.edges.len() + graph.multi.len();
    let sample_size = ctx.cfg.referrals_per_scene.min(candidate_count);
    let mut sample_rng = rng_for(scene_seed, &["referral-sample"]);
    let mut chosen: Vec<usize> = index_sample(&mut sample_rng, candidate_count, sample_size)
        .into_iter()
        .collect();
    chosen.sort_unstable();
    for idx in chosen {
        if idx < graph.edges.len() {
            edge_records(graph, &graph.edges[idx], ctx, scene_seed, &mut records)?;
        } else {
            multi_records(graph, &graph.multi[idx - graph.edges.len()], ctx, scene_seed, &mut records)?;
        }
    }

    star_records(graph, ctx, scene_seed, &mut records)?;
    scene_caption_records(graph, ctx, scene_seed, &mut records)?;

    records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
    Ok(records)
}

fn edge_records(
    graph: &SceneGraph,
    edge: &RelationEdge,
    ctx: &GenContext,
    scene_seed: u64,
    out: &mut Vec<LanguageRecord>,
) -> Result<(), LangError> {
    let target_label = graph.label(edge.source).to_string();
    let anchor_label = graph.label(edge.target).to_string();
    let near = edge.geom.distance <= ctx.near_max_m;
    let graded = lexical_key(edge.relation, Some(near));

    // The proximity grades surface through the synonym set; the record keeps
    // the relation that was actually verbalized.
    let mut surfaces: Vec<(String, RelationType)> = vec![(graded.to_string(), edge.relation)];
    if edge.geom.close {
        surfaces.push(("close-to".into(), RelationType::CloseTo));
    }
    if edge.geom.adjacent {
        surfaces.push(("adjacent-to".into(), RelationType::AdjacentTo));
    }
    if edge.geom.close || edge.geom.adjacent {
        surfaces.push(("besides".into(), RelationType::Besides));
        surfaces.push(("next-to".into(), RelationType::NextTo));
    }

    let record_seed = derive_seed(
        scene_seed,
        &["referral", &edge.source.to_string(), &edge.target.to_string(), edge.relation.canonical()],
    );
    let pick = rng_for(record_seed, &["surface"]).random_range(0..surfaces.len());
    let (key, relation) = surfaces[pick].clone();
    let text = gen_pairwise(&target_label, &key, &anchor_label, ctx.pool, derive_seed(record_seed, &["text"]))?;

    out.push(LanguageRecord {
        record_id: LanguageRecord::compute_id(
            &graph.scene_id,
            RecordKind::ObjectReferral,
            RecordSource::Template,
            Some(edge.source),
            &[edge.target],
            Some(relation),
            &key,
            record_seed,
        ),
        scene_id: graph.scene_id.clone(),
        kind: RecordKind::ObjectReferral,
        target_id: Some(edge.source),
        anchor_ids: vec![edge.target],
        relation: Some(relation),
        text: text.clone(),
        source: RecordSource::Template,
        flags: Vec::new(),
        seed: record_seed,
    });

    if ctx.rephrase_referrals {
        out.push(rephrased_twin(
            graph,
            ctx,
            record_seed,
            &key,
            text,
            &target_label,
            vec![anchor_label],
            Some(edge.source),
            vec![edge.target],
            Some(relation),
        ));
    }
    Ok(())
}

fn multi_records(
    graph: &SceneGraph,
    rel: &MultiRelation,
    ctx: &GenContext,
    scene_seed: u64,
    out: &mut Vec<LanguageRecord>,
) -> Result<(), LangError> {
    match rel.kind {
        MultiKind::Between => {
            let target = rel.target.expect("between carries a target");
            let target_label = graph.label(target).to_string();
            let left = graph.label(rel.anchors[0]).to_string();
            let right = graph.label(rel.anchors[1]).to_string();
            let record_seed = derive_seed(
                scene_seed,
                &[
                    "between",
                    &target.to_string(),
                    &rel.anchors[0].to_string(),
                    &rel.anchors[1].to_string(),
                ],
            );
            let text = gen_between(
                &target_label,
                [left.as_str(), right.as_str()],
                ctx.pool,
                derive_seed(record_seed, &["text"]),
            )?;
            out.push(LanguageRecord {
                record_id: LanguageRecord::compute_id(
                    &graph.scene_id,
                    RecordKind::ObjectReferral,
                    RecordSource::Template,
                    Some(target),
                    &rel.anchors,
                    Some(RelationType::Between),
                    "between",
                    record_seed,
                ),
                scene_id: graph.scene_id.clone(),
                kind: RecordKind::ObjectReferral,
                target_id: Some(target),
                anchor_ids: rel.anchors.clone(),
                relation: Some(RelationType::Between),
                text: text.clone(),
                source: RecordSource::Template,
                flags: Vec::new(),
                seed: record_seed,
            });
            if ctx.rephrase_referrals {
                out.push(rephrased_twin(
                    graph,
                    ctx,
                    record_seed,
                    "between",
                    text,
                    &target_label,
                    vec![left, right],
                    Some(target),
                    rel.anchors.clone(),
                    Some(RelationType::Between),
                ));
            }
        }
        MultiKind::Aligned => {
            let labels: Vec<String> = rel.anchors.iter().map(|id| graph.label(*id).to_string()).collect();
            let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            let axis = rel.axis.map(|a| format!("{a:?}")).unwrap_or_default();
            let ids: Vec<String> = rel.anchors.iter().map(|id| id.to_string()).collect();
            let mut parts: Vec<&str> = vec!["aligned", &axis];
            parts.extend(ids.iter().map(String::as_str));
            let record_seed = derive_seed(scene_seed, &parts);
            let text = gen_aligned(&label_refs, ctx.pool, derive_seed(record_seed, &["text"]))?;
            out.push(LanguageRecord {
                record_id: LanguageRecord::compute_id(
                    &graph.scene_id,
                    RecordKind::ObjectReferral,
                    RecordSource::Template,
                    Some(rel.anchors[0]),
                    &rel.anchors,
                    Some(RelationType::Aligned),
                    &format!("aligned-{axis}"),
                    record_seed,
                ),
                scene_id: graph.scene_id.clone(),
                kind: RecordKind::ObjectReferral,
                target_id: Some(rel.anchors[0]),
                anchor_ids: rel.anchors.clone(),
                relation: Some(RelationType::Aligned),
                text: text.clone(),
                source: RecordSource::Template,
                flags: Vec::new(),
                seed: record_seed,
            });
            if ctx.rephrase_referrals {
                out.push(rephrased_twin(
                    graph,
                    ctx,
                    record_seed,
                    &format!("aligned-{axis}"),
                    text,
                    &labels[0].clone(),
                    labels,
                    Some(rel.anchors[0]),
                    rel.anchors.clone(),
                    Some(RelationType::Aligned),
                ));
            }
        }
    }
    Ok(())
}

fn star_records(
    graph: &SceneGraph,
    ctx: &GenContext,
    scene_seed: u64,
    out: &mut Vec<LanguageRecord>,
) -> Result<(), LangError> {
    // Targets need 3 edges to distinct anchors; others are skipped upstream.
    let eligible: Vec<u32> = graph
        .nodes
        .keys()
        .copied()
        .filter(|&id| {
            let anchors: BTreeSet<u32> = graph.edges_from(id).map(|e| e.target).collect();
            anchors.len() >= 3
        })
        .collect();
    let take = ctx.cfg.star_per_scene.min(eligible.len());
    let mut rng = rng_for(scene_seed, &["star-sample"]);
    let mut chosen: Vec<usize> = index_sample(&mut rng, eligible.len(), take).into_iter().collect();
    chosen.sort_unstable();
    for idx in chosen {
        let target = eligible[idx];
        let target_label = graph.label(target).to_string();
        let record_seed = derive_seed(scene_seed, &["star", &target.to_string()]);
        let out_edges: Vec<&RelationEdge> = graph.edges_from(target).collect();
        let mut order: Vec<usize> = (0..out_edges.len()).collect();
        order.shuffle(&mut rng_for(record_seed, &["edges"]));
        let mut picked: Vec<&RelationEdge> = Vec::new();
        let mut seen = BTreeSet::new();
        for i in order {
            let edge = out_edges[i];
            if seen.insert(edge.target) {
                picked.push(edge);
                if picked.len() == 3 {
                    break;
                }
            }
        }
        debug_assert_eq!(picked.len(), 3);
        let star_edges: Vec<StarEdge> = picked
            .iter()
            .map(|e| StarEdge {
                relation: e.relation,
                key: lexical_key(e.relation, Some(e.geom.distance <= ctx.near_max_m)).to_string(),
                anchor_label: graph.label(e.target).to_string(),
            })
            .collect();
        let star_edges: [StarEdge; 3] = star_edges.try_into().expect("picked exactly 3");
        let text = gen_star(&target_label, &star_edges, ctx.pool, derive_seed(record_seed, &["text"]))?;
        let anchor_ids: Vec<u32> = picked.iter().map(|e| e.target).collect();
        let anchor_labels: Vec<String> =
            picked.iter().map(|e| graph.label(e.target).to_string()).collect();
        let relation = picked[0].relation;
        out.push(LanguageRecord {
            record_id: LanguageRecord::compute_id(
                &graph.scene_id,
                RecordKind::ObjectReferral,
                RecordSource::Template,
                Some(target),
                &anchor_ids,
                Some(relation),
                "star",
                record_seed,
            ),
            scene_id: graph.scene_id.clone(),
            kind: RecordKind::ObjectReferral,
            target_id: Some(target),
            anchor_ids: anchor_ids.clone(),
            relation: Some(relation),
            text: text.clone(),
            source: RecordSource::Template,
            flags: Vec::new(),
            seed: record_seed,
        });
        if ctx.rephrase_referrals {
            out.push(rephrased_twin(
                graph,
                ctx,
                record_seed,
                "star",
                text,
                &target_label,
                anchor_labels,
                Some(target),
                anchor_ids,
                Some(relation),
            ));
        }
    }
    Ok(())
}

fn scene_caption_records(
    graph: &SceneGraph,
    ctx: &GenContext,
    scene_seed: u64,
    out: &mut Vec<LanguageRecord>,
) -> Result<(), LangError> {
    if graph.nodes.is_empty() {
        return Ok(());
    }
    for k in 0..ctx.cfg.scene_captions_per_scene {
        let cap_seed = derive_seed(scene_seed, &["scene-caption", &k.to_string()]);
        let prompt = build_scene_prompt(
            graph,
            ctx.cfg.prompt_max_nodes,
            ctx.cfg.prompt_max_edges,
            ctx.near_max_m,
            ctx.pool,
            derive_seed(cap_seed, &["prompt"]),
        )?;
        let req = RephraseRequest::scene_summary(prompt.payload_json.clone());
        let (text, flags) = match ctx.client.rephrase(&req) {
            Ok(t) if !t.trim().is_empty() => (t.trim().to_string(), Vec::new()),
            _ => (
                deterministic_scene_summary(&prompt.payload_json),
                vec!["summary-failed".to_string()],
            ),
        };
        out.push(LanguageRecord {
            record_id: LanguageRecord::compute_id(
                &graph.scene_id,
                RecordKind::SceneCaption,
                RecordSource::Summary,
                None,
                &[],
                None,
                &k.to_string(),
                cap_seed,
            ),
            scene_id: graph.scene_id.clone(),
            kind: RecordKind::SceneCaption,
            target_id: None,
            anchor_ids: Vec::new(),
            relation: None,
            text,
            source: RecordSource::Summary,
            flags,
            seed: cap_seed,
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rephrased_twin(
    graph: &SceneGraph,
    ctx: &GenContext,
    record_seed: u64,
    discriminator: &str,
    text: String,
    target_label: &str,
    anchor_labels: Vec<String>,
    target_id: Option<u32>,
    anchor_ids: Vec<u32>,
    relation: Option<RelationType>,
) -> LanguageRecord {
    let rp_seed = derive_seed(record_seed, &["rephrase"]);
    let kind = REPHRASE_KINDS[rng_for(rp_seed, &["kind"]).random_range(0..REPHRASE_KINDS.len())];
    let req = RephraseRequest::referral(kind, text, target_label, anchor_labels);
    let outcome = rephrase(&req, ctx.client);
    LanguageRecord {
        record_id: LanguageRecord::compute_id(
            &graph.scene_id,
            RecordKind::ObjectReferral,
            RecordSource::Rephrased,
            target_id,
            &anchor_ids,
            relation,
            discriminator,
            rp_seed,
        ),
        scene_id: graph.scene_id.clone(),
        kind: RecordKind::ObjectReferral,
        target_id,
        anchor_ids,
        relation,
        text: outcome.text,
        source: RecordSource::Rephrased,
        flags: outcome.flag.map(|f| vec![f.to_string()]).unwrap_or_default(),
        seed: rp_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::StubRephraser;

    fn pool() -> TemplatePool {
        TemplatePool::builtin()
    }

    /// Smallest seed whose first two draws select template index `t` and
    /// phrase index `p` for the given family/phrase list sizes.
    fn find_seed(n_templates: usize, n_phrases: usize, t: usize, p: usize) -> u64 {
        (0..10_000u64)
            .find(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.random_range(0..n_templates) == t && rng.random_range(0..n_phrases) == p
            })
            .expect("seed exists")
    }

    #[test]
    fn pairwise_reproduces_the_worked_example() {
        let pool = pool();
        let seed = find_seed(pool.pairwise.len(), pool.phrases("next-to").len(), 0, 0);
        let text = gen_pairwise("chair", "next-to", "armchair", &pool, seed).unwrap();
        assert_eq!(text, "The chair is next to the armchair.");
    }

    #[test]
    fn inversion_template_renders() {
        let pool = pool();
        let seed = find_seed(pool.pairwise.len(), pool.phrases("next-to").len(), 3, 0);
        let text = gen_pairwise("chair", "next-to", "armchair", &pool, seed).unwrap();
        assert_eq!(text, "Next to the armchair is the chair.");
    }

    #[test]
    fn far_right_phrase_appears() {
        let pool = pool();
        for seed in 0..50 {
            let text = gen_pairwise("suitcase", "far-right-of", "shoes", &pool, seed).unwrap();
            assert!(text.contains("far to the right of"), "{text}");
            assert!(text.contains("suitcase") && text.contains("shoes"));
        }
    }

    #[test]
    fn multi_object_keys_are_rejected_by_pairwise() {
        let pool = pool();
        assert!(gen_pairwise("a", "between", "b", &pool, 0).is_err());
    }

    #[test]
    fn between_reproduces_the_worked_example() {
        let pool = pool();
        let seed = find_seed(pool.between.len(), pool.phrases("between").len(), 0, 0);
        let text = gen_between("fridge", ["cabinet", "sofa"], &pool, seed).unwrap();
        assert_eq!(text, "The fridge is between cabinet and sofa.");
    }

    #[test]
    fn between_identical_anchors_get_ordinals() {
        let pool = pool();
        let seed = find_seed(pool.between.len(), pool.phrases("between").len(), 0, 0);
        let text = gen_between("bed", ["lamp", "lamp"], &pool, seed).unwrap();
        assert_eq!(text, "The bed is between one lamp and the other lamp.");
    }

    #[test]
    fn aligned_names_every_member() {
        let pool = pool();
        let text = gen_aligned(&["chair", "chair", "chair"], &pool, 0).unwrap();
        assert!(text.to_lowercase().contains("aligned"), "{text}");
        assert!(text.contains("one chair"));
        assert!(text.contains("a second chair"));
        assert!(text.contains("a third chair"));
        assert!(gen_aligned(&["chair", "chair"], &pool, 0).is_err());
    }

    #[test]
    fn classify_star_is_total_and_permutation_invariant() {
        use RelationType::*;
        assert_eq!(classify_star([LeftOf, LeftOf, LeftOf]), ClusterKind::AllSame);
        assert_eq!(classify_star([LeftOf, LeftOf, Above]), ClusterKind::TwoSame);
        assert_eq!(classify_star([LeftOf, Above, Behind]), ClusterKind::AllDistinct);
        let perms: [[RelationType; 3]; 6] = [
            [LeftOf, LeftOf, Above],
            [LeftOf, Above, LeftOf],
            [Above, LeftOf, LeftOf],
            [LeftOf, Above, LeftOf],
            [Above, LeftOf, LeftOf],
            [LeftOf, LeftOf, Above],
        ];
        for p in perms {
            assert_eq!(classify_star(p), ClusterKind::TwoSame);
        }
    }

    fn star_edge(relation: RelationType, key: &str, anchor: &str) -> StarEdge {
        StarEdge { relation, key: key.into(), anchor_label: anchor.into() }
    }

    #[test]
    fn star_all_same_merges_into_one_clause() {
        let pool = pool();
        use RelationType::LeftOf;
        let edges = [
            star_edge(LeftOf, "near-left-of", "chair"),
            star_edge(LeftOf, "near-left-of", "stool"),
            star_edge(LeftOf, "far-left-of", "bench"),
        ];
        let text = gen_star("table", &edges, &pool, 0).unwrap();
        assert!(text.contains("table"));
        for anchor in ["chair", "stool", "bench"] {
            assert!(text.contains(anchor), "{text}");
        }
        // merged clause uses the grade-neutral phrase
        assert!(text.contains("to the left of"), "{text}");
        assert!(!text.contains("far to the left of"), "{text}");
    }

    #[test]
    fn star_two_same_puts_the_pair_first() {
        let pool = pool();
        use RelationType::{Above, LeftOf};
        let edges = [
            star_edge(LeftOf, "near-left-of", "chair"),
            star_edge(LeftOf, "near-left-of", "stool"),
            star_edge(Above, "above", "rug"),
        ];
        let text = gen_star("table", &edges, &pool, 0).unwrap();
        let pair_pos = text.find("chair").unwrap();
        let odd_pos = text.find("rug").unwrap();
        assert!(pair_pos < odd_pos, "{text}");
    }

    #[test]
    fn star_all_distinct_renders_three_clauses() {
        let pool = pool();
        use RelationType::{Above, Behind, LeftOf};
        let edges = [
            star_edge(LeftOf, "near-left-of", "chair"),
            star_edge(Above, "above", "rug"),
            star_edge(Behind, "behind", "sofa"),
        ];
        let text = gen_star("table", &edges, &pool, 7).unwrap();
        for word in ["chair", "rug", "sofa", "table"] {
            assert!(text.contains(word), "{text}");
        }
    }

    #[test]
    fn template_audit_leaves_no_unresolved_slots() {
        let pool = pool();
        for seed in 0..40u64 {
            let samples = [
                gen_pairwise("target", "next-to", "anchor", &pool, seed).unwrap(),
                gen_between("target", ["anchor", "anchor"], &pool, seed).unwrap(),
                gen_aligned(&["m1", "m2", "m3"], &pool, seed).unwrap(),
                gen_star(
                    "target",
                    &[
                        star_edge(RelationType::LeftOf, "near-left-of", "a"),
                        star_edge(RelationType::Above, "above", "b"),
                        star_edge(RelationType::Behind, "behind", "c"),
                    ],
                    &pool,
                    seed,
                )
                .unwrap(),
            ];
            for text in samples {
                assert!(!text.contains('{') && !text.contains('}'), "unresolved slot in {text}");
            }
        }
    }

    #[test]
    fn scene_prompt_counts_every_node_and_respects_max_edges() {
        use crate::graph::{build_scene_graph, GraphConfig, RefinementMap};
        use crate::synth::{generate_scene, SynthParams};
        let scene = generate_scene(3, &SynthParams::default());
        let graph = build_scene_graph(&scene, &GraphConfig::default(), &RefinementMap::empty()).unwrap();
        let pool = pool();
        let prompt = build_scene_prompt(&graph, 20, 5, 1.5, &pool, 11).unwrap();
        let payload: serde_json::Value = serde_json::from_str(&prompt.payload_json).unwrap();
        let counts = payload["object_count"].as_object().unwrap();
        let total: u64 = counts.values().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(total as usize, graph.nodes.len());
        assert!(payload["relation"].as_array().unwrap().len() <= 5);
        assert!(prompt.instruction.contains("80 words"));

        // max_edges = 0 keeps counts full with an empty relation list
        let empty = build_scene_prompt(&graph, 20, 0, 1.5, &pool, 11).unwrap();
        let payload: serde_json::Value = serde_json::from_str(&empty.payload_json).unwrap();
        assert!(payload["relation"].as_array().unwrap().is_empty());
        let counts = payload["object_count"].as_object().unwrap();
        let total: u64 = counts.values().map(|v| v.as_u64().unwrap()).sum();
        assert_eq!(total as usize, graph.nodes.len());

        // byte-identical for a fixed seed
        let again = build_scene_prompt(&graph, 20, 5, 1.5, &pool, 11).unwrap();
        assert_eq!(again.payload_json, prompt.payload_json);
    }

    #[test]
    fn scene_records_are_deterministic_and_sorted() {
        use crate::graph::{build_scene_graph, GraphConfig, RefinementMap};
        use crate::synth::{generate_scene, SynthParams};
        let scene = generate_scene(5, &SynthParams::default());
        let graph = build_scene_graph(&scene, &GraphConfig::default(), &RefinementMap::builtin()).unwrap();
        let pool = pool();
        let cfg = LangConfig::default();
        let ctx = GenContext {
            pool: &pool,
            cfg: &cfg,
            near_max_m: 1.5,
            client: &StubRephraser,
            rephrase_referrals: true,
        };
        let a = generate_scene_records(&graph, &ctx, 99).unwrap();
        let b = generate_scene_records(&graph, &ctx, 99).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
        let mut ids: Vec<&String> = a.iter().map(|r| &r.record_id).collect();
        let sorted = {
            let mut s = ids.clone();
            s.sort();
            s
        };
        assert_eq!(ids, sorted);
        ids.dedup();
        assert_eq!(ids.len(), a.len(), "record ids are unique");
        // template referrals have rephrased twins with identical text (identity stub)
        let templates = a.iter().filter(|r| r.source == RecordSource::Template).count();
        let rephrased = a.iter().filter(|r| r.source == RecordSource::Rephrased).count();
        assert_eq!(templates, rephrased);
        let captions = a.iter().filter(|r| r.kind == RecordKind::SceneCaption).count();
        assert_eq!(captions, cfg.scene_captions_per_scene);
    }
}
