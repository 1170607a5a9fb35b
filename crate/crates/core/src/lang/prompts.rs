//! Instruction texts for the five client request kinds, shipped as data files.

use super::rephrase::RephraseKind;

const REFERRAL_SIMPLE: &str = include_str!("../../data/prompts/referral_simple.txt");
const REFERRAL_SUBJECT_LOCKED: &str = include_str!("../../data/prompts/referral_subject_locked.txt");
const REFERRAL_ENRICHED: &str = include_str!("../../data/prompts/referral_enriched.txt");
const SCENE_SUMMARY: &str = include_str!("../../data/prompts/scene_summary.txt");
const CAPTION_SUMMARY: &str = include_str!("../../data/prompts/caption_summary.txt");

/// Instruction text for a request kind (trailing newline trimmed).
pub fn instruction_for(kind: RephraseKind) -> &'static str {
    let raw = match kind {
        RephraseKind::ReferralSimple => REFERRAL_SIMPLE,
        RephraseKind::ReferralSubjectLocked => REFERRAL_SUBJECT_LOCKED,
        RephraseKind::ReferralEnriched => REFERRAL_ENRICHED,
        RephraseKind::SceneSummary => SCENE_SUMMARY,
        RephraseKind::CaptionSummary => CAPTION_SUMMARY,
    };
    raw.trim_end()
}
