//! Grid path-planning benchmark harness.
//!
//! Generates grid environments with square obstacles, renders eight prompting
//! strategies for language models, obtains replies from chat-completion
//! endpoints or built-in scripted agents, and scores the returned routes
//! (compliance, feasibility, optimality, GM, MSE, runtime) with a five-class
//! failure taxonomy.
//!
//! Modules:
//! - [`grid`] — environment generation and endpoint sampling
//! - [`solvers`] — Dijkstra / A* / DFS / BFS reference solvers
//! - [`eval`] — reply parsing, validation, metrics
//! - [`prompts`] — the eight prompt templates
//! - [`gateway`] — chat-completion client and scripted agents
//! - [`runner`] — run orchestration, JSONL persistence, reports
//! - [`svg`] — grid renders

pub mod eval;
pub mod gateway;
pub mod grid;
pub mod par;
pub mod prompts;
pub mod rng;
pub mod runner;
pub mod solvers;
pub mod svg;
