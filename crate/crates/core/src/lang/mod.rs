//! Language generation: templates, star references, scene prompts and the
//! rephrase client interface.

mod generate;
mod pool;
mod prompts;
mod rephrase;

pub use generate::{
    build_scene_prompt, classify_star, gen_aligned, gen_between, gen_pairwise, gen_star,
    generate_scene_records, ClusterKind, GenContext, LangConfig, ScenePrompt, StarEdge,
};
pub use pool::{lexical_key, StarTemplates, TemplatePool};
pub use prompts::instruction_for;
pub use rephrase::{
    deterministic_scene_summary, rephrase, ClientError, HttpRephraser, RephraseClient,
    RephraseKind, RephraseOutcome, RephraseRequest, StubRephraser,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LangError {
    #[error("invalid template pool: {0}")]
    InvalidPool(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}
