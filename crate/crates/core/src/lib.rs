//! malscan-core: a language-agnostic code security pipeline.
//!
//! The pipeline decomposes source files into functional components, triages
//! them with static indicator rules mapped to CVSS v3.1 scores, routes
//! flagged components through a pluggable deep-analysis backend (remote chat
//! model or deterministic rules), and assembles component-wise reports with
//! exploit traces and remediation suggestions.
//!
//! Modules, in pipeline order:
//!
//! - [`lang`] — supported-language registry and extension detection
//! - [`componentizer`] — decomposition into functions/classes/methods with
//!   stable ids and byte spans; fallback fragmentation for everything else
//! - [`cvss`] — CVSS v3.1 base vectors and scoring
//! - [`prescore`] — indicator rules and the preliminary triage score
//! - [`backend`] — the summarize/analyze contract plus both implementations
//! - [`orchestrator`] — per-file and per-tree scan driving, routing,
//!   chunking, caching, bounded parallelism
//! - [`report`] — canonical JSON / Markdown reports and CI exit codes
//! - [`eval`] — corpus evaluation harness (recall/precision, remediation
//!   tallies) and the bundled labeled corpus

pub mod backend;
pub mod componentizer;
pub mod cvss;
pub mod eval;
pub mod lang;
pub mod orchestrator;
pub mod prescore;
pub mod report;

mod hash;

pub use hash::{sha256_hex, short_id};
