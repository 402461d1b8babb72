//! The eight prompting strategies, rendered from template assets.
//!
//! Templates live under `assets/prompts/` and are compiled in verbatim.
//! Rendering is plain placeholder substitution; golden files in the test
//! suite pin every template byte-for-byte.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridWorld, TaskCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Vanilla,
    Cot,
    FewshotBase,
    AotDfs,
    AotAstar,
    AotDijkstra,
    AlgoDirect,
    AlgoReasoning,
}

impl PromptKind {
    pub const ALL: [PromptKind; 8] = [
        PromptKind::Vanilla,
        PromptKind::Cot,
        PromptKind::FewshotBase,
        PromptKind::AotDfs,
        PromptKind::AotAstar,
        PromptKind::AotDijkstra,
        PromptKind::AlgoDirect,
        PromptKind::AlgoReasoning,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PromptKind::Vanilla => "vanilla",
            PromptKind::Cot => "cot",
            PromptKind::FewshotBase => "fewshot_base",
            PromptKind::AotDfs => "aot_dfs",
            PromptKind::AotAstar => "aot_astar",
            PromptKind::AotDijkstra => "aot_dijkstra",
            PromptKind::AlgoDirect => "algo_direct",
            PromptKind::AlgoReasoning => "algo_reasoning",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            PromptKind::Vanilla => include_str!("../assets/prompts/vanilla.txt"),
            PromptKind::Cot => include_str!("../assets/prompts/cot.txt"),
            PromptKind::FewshotBase => include_str!("../assets/prompts/fewshot_base.txt"),
            PromptKind::AotDfs => include_str!("../assets/prompts/aot_dfs.txt"),
            PromptKind::AotAstar => include_str!("../assets/prompts/aot_astar.txt"),
            PromptKind::AotDijkstra => include_str!("../assets/prompts/aot_dijkstra.txt"),
            PromptKind::AlgoDirect => include_str!("../assets/prompts/algo_direct.txt"),
            PromptKind::AlgoReasoning => include_str!("../assets/prompts/algo_reasoning.txt"),
        }
    }
}

impl std::str::FromStr for PromptKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, UnknownKind> {
        PromptKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

impl std::fmt::Display for PromptKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown prompt kind '{0}' (expected one of: vanilla, cot, fewshot_base, aot_dfs, aot_astar, aot_dijkstra, algo_direct, algo_reasoning)")]
pub struct UnknownKind(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPrompt {
    pub kind: PromptKind,
    pub text: String,
    pub case_id: String,
}

/// "[((x1, y1), (x2, y2)), ...]" in generation order.
pub fn serialize_obstacles(world: &GridWorld) -> String {
    let parts: Vec<String> = world
        .obstacles
        .iter()
        .map(|o| format!("(({}, {}), ({}, {}))", o.top_left.x, o.top_left.y, o.bottom_right.x, o.bottom_right.y))
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Substitute all placeholders of `kind`'s template for the given task.
pub fn render(kind: PromptKind, world: &GridWorld, case: &TaskCase) -> RenderedPrompt {
    let text = kind
        .template()
        .replace("{obstacles}", &serialize_obstacles(world))
        .replace("{start_x}", &case.start.x.to_string())
        .replace("{start_y}", &case.start.y.to_string())
        .replace("{end_x}", &case.end.x.to_string())
        .replace("{end_y}", &case.end.y.to_string());
    debug_assert!(!text.contains('{'), "unresolved placeholder in {kind}");
    RenderedPrompt { kind, text, case_id: case.case_id.clone() }
}
