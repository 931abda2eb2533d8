//! Blank node matching for RDF graphs.
//!
//! The crate computes mappings between the blank nodes of two graphs and
//! builds on them to test equivalence and simple entailment, compute small
//! deltas, keep a delta-based version store, and integrate sources under a
//! URI equivalence policy.

pub mod decision;
pub mod delta;
pub mod equiv;
pub mod error;
pub mod generator;
pub mod integration;
pub mod matcher;
pub mod ntriples;
pub mod rdf;
pub mod store;

pub use decision::{test_entailment, test_equivalence, verify_entailment_mapping, EntailmentMapping};
pub use delta::{apply_delta, delta_mapped, delta_plain, reverse_delta, DeltaScript, Direction};
pub use equiv::{canonical_suffix, EquivalenceRelation, Policy};
pub use error::{Error, Result};
pub use generator::{generate_pair, GenSpec, GeneratedPair};
pub use integration::{integrate, IntegrationOptions, IntegrationResult};
pub use matcher::{brute_force_bm, solve_bm, BnodeMapping, MatcherConfig, Method};
pub use rdf::{Graph, Renaming, Term, Triple};
pub use store::{Repository, VersionLog};
