//! Task-level cost modeling for an embedded neural-network accelerator.
//!
//! The crate covers the full pipeline a compiler needs to cost its scheduling
//! decisions:
//!
//! * [`workload`] — descriptors for hardware tasks, validation, canonical keys.
//! * [`oracle`] — a deterministic reference hardware model that produces
//!   ground-truth cycle counts (the slow, accurate model).
//! * [`dataset`] — balanced workload generation and the profiling database.
//! * [`features`] — the 71-dimensional feature encoding and target transforms.
//! * [`mlp`] — the trained multilayer-perceptron cost model.
//! * [`embedding`] — the exact-match / nearest-neighbor cost model.
//! * [`api`] — one query interface over all backends, with caching and a
//!   latency benchmark.
//! * [`scheduler`] — tensor-split enumeration and schedule selection, with
//!   rule-based and brute-force baselines.

pub mod api;
pub mod config;
pub mod dataset;
pub mod embedding;
pub mod features;
pub mod mlp;
pub mod oracle;
pub mod scheduler;
pub mod suites;
pub mod workload;
