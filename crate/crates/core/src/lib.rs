//! Semantic IoT/cloud service composition.
//!
//! The pipeline: annotated device descriptions (JSON-LD) and cloud service
//! descriptors (WSDL subset with model references) are parsed into typed
//! descriptions, compiled into ground atoms forming a planning problem, fed
//! to a total-order hierarchical task planner, ranked by non-functional
//! properties, and the chosen plan is executed against REST endpoints.

pub mod atomize;
pub mod json;
pub mod planner;
pub mod sawsdl;
pub mod services;
pub mod shop;
pub mod thing;
pub mod vocab;

#[cfg(feature = "testkit")]
pub mod testkit;

/// The vocabulary shipped with the binary, covering every term used by the
/// bundled annotation files.
pub const BUNDLED_VOCABULARY: &str = include_str!("../fixtures/vocabulary.vocab");

pub use atomize::{atomize_cloud, atomize_thing, build_problem, normalize_symbol, AtomizationMode};
pub use json::{parse_json_preserving, JsonNode};
pub use planner::{
    apply_operator, find_plans, rank_plans, replay, satisfy, unify, RankWeights, RankedPlan,
    SearchLimits, SearchOutcome, State, Substitution,
};
pub use sawsdl::{parse_sawsdl, CloudServiceDescription};
pub use shop::{
    parse_domain_text, parse_problem_text, print_domain, print_plan, print_problem, read_sexprs,
    Atom, Domain, Plan, Problem, Term,
};
pub use thing::{expand_thing, validate_description, ThingDescription};
pub use vocab::{load_vocabulary, Vocabulary};
