//! Typed descriptions of annotated devices, expanded from JSON-LD documents.
//!
//! The accepted dialect deliberately mirrors the annotation files this
//! pipeline ingests rather than the JSON-LD 1.1 spec:
//!
//! - `{"value": x}` objects are literal wrappers (the files use this instead
//!   of `@value`),
//! - repeated member names accumulate into lists,
//! - keys and `@type` strings may use `.` as the prefix separator and may
//!   carry stray whitespace.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::json::JsonNode;
use crate::vocab::{local_name, Vocabulary};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThingError {
    #[error("document root must be a JSON object")]
    RootNotObject,
    #[error("missing @context object")]
    MissingContext,
    #[error("missing @type")]
    MissingType,
    #[error("@type '{term}' is not a known class")]
    TypeNotAClass { term: String },
    #[error("@type '{term}' does not describe a semantic web thing")]
    NotAThing { term: String },
    #[error("resource with unknown kind '{term}'")]
    UnknownResourceKind { term: String },
    #[error("malformed value wrapper for '{member}'")]
    MalformedValueWrapper { member: String },
    #[error("value direction '{term}' is not Input or Output")]
    BadValueDirection { term: String },
    #[error("resource '{name}': {kind} cannot carry {direction} values")]
    DirectionMismatch { name: String, kind: String, direction: String },
    #[error("expected an object for '{member}'")]
    ExpectedObject { member: String },
    #[error("vocabulary does not define the {local} class")]
    VocabularyGap { local: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Input,
    Output,
}

impl Direction {
    pub fn concept_local(self) -> &'static str {
        match self {
            Direction::Input => "Input",
            Direction::Output => "Output",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IoValueSpec {
    pub direction: Direction,
    pub name: String,
    pub description: String,
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResourceKind {
    Sensor,
    Actuator,
    PhysicalObject,
}

impl ResourceKind {
    pub fn as_symbol(self) -> &'static str {
        match self {
            ResourceKind::Sensor => "Sensor",
            ResourceKind::Actuator => "Actuator",
            ResourceKind::PhysicalObject => "PhysicalObject",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceSpec {
    pub kind: ResourceKind,
    pub name: String,
    pub description: String,
    pub io: Option<IoValueSpec>,
}

/// A named, described item (protocol or security problem).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Labeled {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThingDescription {
    pub thing_id: String,
    pub name: String,
    pub description: String,
    pub resources: Vec<ResourceSpec>,
    pub protocols: Vec<Labeled>,
    pub security_problems: Vec<Labeled>,
}

/// Expands a parsed annotation document into a [`ThingDescription`].
pub fn expand_thing(doc: &JsonNode, v: &Vocabulary) -> Result<ThingDescription, ThingError> {
    if !doc.is_object() {
        return Err(ThingError::RootNotObject);
    }
    let context = doc
        .member("@context")
        .filter(|c| c.is_object())
        .ok_or(ThingError::MissingContext)?;
    let mut prefixes = BTreeMap::new();
    for (name, value) in context.members().unwrap_or(&[]) {
        if let Some(base) = value.as_str() {
            prefixes.insert(name.clone(), base.to_string());
        }
    }

    let type_term = doc
        .member("@type")
        .and_then(JsonNode::as_str)
        .ok_or(ThingError::MissingType)?;
    require_thing_type(v, &prefixes, type_term)?;

    let mut thing = ThingDescription {
        thing_id: String::new(),
        name: String::new(),
        description: String::new(),
        resources: Vec::new(),
        protocols: Vec::new(),
        security_problems: Vec::new(),
    };

    for (key, value) in doc.members().unwrap_or(&[]) {
        if key.starts_with('@') {
            continue;
        }
        if key_matches(v, &prefixes, key, "thingId") {
            thing.thing_id = unwrap_literal(value, key)?;
        } else if key_matches(v, &prefixes, key, "thingName") {
            thing.name = unwrap_literal(value, key)?;
        } else if key_matches(v, &prefixes, key, "thingDescription") {
            thing.description = unwrap_literal(value, key)?;
        } else if key_matches(v, &prefixes, key, "hasResources") {
            for item in object_or_items(value, key)? {
                thing.resources.push(parse_resource(item, v, &prefixes, key)?);
            }
        } else if key_matches(v, &prefixes, key, "supportsProtocols") {
            for item in object_or_items(value, key)? {
                thing.protocols.push(parse_labeled(item, "proName", "proDescription", key)?);
            }
        } else if key_matches(v, &prefixes, key, "hasSecurityProblems") {
            for item in object_or_items(value, key)? {
                thing
                    .security_problems
                    .push(parse_labeled(item, "secName", "secDescription", key)?);
            }
        }
        // other members are open-world annotation data; ignored
    }
    Ok(thing)
}

fn require_thing_type(
    v: &Vocabulary,
    prefixes: &BTreeMap<String, String>,
    term: &str,
) -> Result<(), ThingError> {
    let iri = v
        .expand_with(prefixes, term)
        .filter(|iri| v.classes().contains(iri))
        .ok_or_else(|| ThingError::TypeNotAClass { term: term.trim().to_string() })?;
    let thing_class = v
        .class_by_local("SemanticWebThing")
        .ok_or_else(|| ThingError::VocabularyGap { local: "SemanticWebThing".into() })?;
    if v.is_subclass_of(&iri, thing_class) {
        Ok(())
    } else {
        Err(ThingError::NotAThing { term: term.trim().to_string() })
    }
}

fn key_matches(
    v: &Vocabulary,
    prefixes: &BTreeMap<String, String>,
    key: &str,
    target_local: &str,
) -> bool {
    let key = key.trim();
    if key == target_local {
        return true;
    }
    match v.expand_with(prefixes, key) {
        Some(iri) => local_name(&iri) == target_local,
        None => false,
    }
}

fn object_or_items<'a>(node: &'a JsonNode, member: &str) -> Result<Vec<&'a JsonNode>, ThingError> {
    if node.is_object() {
        Ok(vec![node])
    } else if let Some(items) = node.as_array() {
        items
            .iter()
            .map(|item| {
                item.is_object()
                    .then_some(item)
                    .ok_or_else(|| ThingError::ExpectedObject { member: member.to_string() })
            })
            .collect()
    } else {
        Err(ThingError::ExpectedObject { member: member.to_string() })
    }
}

/// Strings pass through; `{"value": x}` wrappers unwrap to the literal.
fn unwrap_literal(node: &JsonNode, member: &str) -> Result<String, ThingError> {
    let scalar = |n: &JsonNode| match n {
        JsonNode::String(s) => Some(s.clone()),
        JsonNode::Number(x) => Some(x.lexeme().to_string()),
        JsonNode::Bool(b) => Some(b.to_string()),
        _ => None,
    };
    if let Some(s) = scalar(node) {
        return Ok(s);
    }
    if let Some(members) = node.members() {
        if members.len() == 1 && members[0].0 == "value" {
            if let Some(s) = scalar(&members[0].1) {
                return Ok(s);
            }
        }
    }
    Err(ThingError::MalformedValueWrapper { member: member.to_string() })
}

fn parse_resource(
    node: &JsonNode,
    v: &Vocabulary,
    prefixes: &BTreeMap<String, String>,
    member: &str,
) -> Result<ResourceSpec, ThingError> {
    let type_term = node
        .member("@type")
        .and_then(JsonNode::as_str)
        .ok_or(ThingError::MissingType)?;
    let iri = v
        .expand_with(prefixes, type_term)
        .filter(|iri| v.classes().contains(iri))
        .ok_or_else(|| ThingError::UnknownResourceKind { term: type_term.trim().to_string() })?;

    let is_kind = |local: &str| {
        v.class_by_local(local)
            .map(|anchor| v.is_subclass_of(&iri, anchor))
            .unwrap_or(false)
    };
    let mut kind = if is_kind("Actuator") {
        ResourceKind::Actuator
    } else if is_kind("Sensor") {
        ResourceKind::Sensor
    } else if is_kind("PhysicalObject") {
        ResourceKind::PhysicalObject
    } else {
        return Err(ThingError::UnknownResourceKind { term: type_term.trim().to_string() });
    };

    let name = match node.member("poName") {
        Some(n) => unwrap_literal(n, "poName")?,
        None => String::new(),
    };
    let description = match node.member("poDescription") {
        Some(n) => unwrap_literal(n, "poDescription")?,
        None => String::new(),
    };

    let io = match node.member("hasValues") {
        Some(values) => Some(parse_values(values, v, prefixes, member)?),
        None => None,
    };

    // a physical object that emits output values acts as a sensor
    if kind == ResourceKind::PhysicalObject {
        if let Some(spec) = &io {
            if spec.direction == Direction::Output {
                kind = ResourceKind::Sensor;
            }
        }
    }
    if let Some(spec) = &io {
        let ok = match kind {
            ResourceKind::Sensor => spec.direction == Direction::Output,
            ResourceKind::Actuator => spec.direction == Direction::Input,
            ResourceKind::PhysicalObject => true,
        };
        if !ok {
            return Err(ThingError::DirectionMismatch {
                name,
                kind: kind.as_symbol().to_string(),
                direction: spec.direction.concept_local().to_string(),
            });
        }
    }
    Ok(ResourceSpec { kind, name, description, io })
}

fn parse_values(
    node: &JsonNode,
    v: &Vocabulary,
    prefixes: &BTreeMap<String, String>,
    member: &str,
) -> Result<IoValueSpec, ThingError> {
    if !node.is_object() {
        return Err(ThingError::ExpectedObject { member: format!("{member}.hasValues") });
    }
    let type_term = node
        .member("@type")
        .and_then(JsonNode::as_str)
        .ok_or(ThingError::MissingType)?;
    let direction = match v.expand_with(prefixes, type_term).as_deref().map(local_name) {
        Some("Output") => Direction::Output,
        Some("Input") => Direction::Input,
        _ => return Err(ThingError::BadValueDirection { term: type_term.trim().to_string() }),
    };
    let field = |suffix: &str| -> Result<String, ThingError> {
        let key = match direction {
            Direction::Output => format!("output{suffix}"),
            Direction::Input => format!("input{suffix}"),
        };
        match node.member(&key) {
            Some(n) => unwrap_literal(n, &key),
            None => Ok(String::new()),
        }
    };
    Ok(IoValueSpec {
        direction,
        name: field("Name")?,
        description: field("Description")?,
        unit: field("Unit")?,
    })
}

fn parse_labeled(
    node: &JsonNode,
    name_key: &str,
    desc_key: &str,
    member: &str,
) -> Result<Labeled, ThingError> {
    if !node.is_object() {
        return Err(ThingError::ExpectedObject { member: member.to_string() });
    }
    let name = match node.member(name_key) {
        Some(n) => unwrap_literal(n, name_key)?,
        None => String::new(),
    };
    let description = match node.member(desc_key) {
        Some(n) => unwrap_literal(n, desc_key)?,
        None => String::new(),
    };
    Ok(Labeled { name, description })
}

/// Checks a description against its invariants and the vocabulary.
/// Returns an empty list when everything holds.
pub fn validate_description(d: &ThingDescription, v: &Vocabulary) -> Vec<String> {
    let mut diags = Vec::new();
    if d.thing_id.trim().is_empty() {
        diags.push("thing id is empty".to_string());
    }
    check_distinct(&mut diags, &d.protocols, "protocol");
    check_distinct(&mut diags, &d.security_problems, "security problem");
    for r in &d.resources {
        if r.name.trim().is_empty() {
            diags.push("resource with empty name".to_string());
        }
        if v.class_by_local(r.kind.as_symbol()).is_none() {
            diags.push(format!("unknown class '{}'", r.kind.as_symbol()));
        }
        if let Some(io) = &r.io {
            if io.name.trim().is_empty() {
                diags.push(format!("resource '{}': value name is empty", r.name));
            }
            if io.unit.trim().is_empty() {
                diags.push(format!("resource '{}': value unit is empty", r.name));
            }
            if v.class_by_local(io.direction.concept_local()).is_none() {
                diags.push(format!("unknown class '{}'", io.direction.concept_local()));
            }
            let ok = match r.kind {
                ResourceKind::Sensor => io.direction == Direction::Output,
                ResourceKind::Actuator => io.direction == Direction::Input,
                ResourceKind::PhysicalObject => true,
            };
            if !ok {
                diags.push(format!(
                    "resource '{}': {} carries {} values",
                    r.name,
                    r.kind.as_symbol(),
                    io.direction.concept_local()
                ));
            }
        }
    }
    diags
}

fn check_distinct(diags: &mut Vec<String>, items: &[Labeled], what: &str) {
    let mut seen = std::collections::BTreeSet::new();
    for item in items {
        let key = crate::atomize::normalize_symbol(&item.name)
            .unwrap_or_else(|_| String::from(""));
        if key.is_empty() {
            diags.push(format!("{what} name '{}' normalizes to empty", item.name));
        } else if !seen.insert(key) {
            diags.push(format!("duplicate {what} '{}'", item.name));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::json::parse_json_preserving;
    use crate::vocab::load_vocabulary;

    fn vocab() -> Vocabulary {
        load_vocabulary(crate::BUNDLED_VOCABULARY).unwrap()
    }

    const MINIMAL: &str = r#"{
        "@context": {"myont": "http://iot.foi.hr/ontologies/ThingAsAServiceOntology.owl#"},
        "@type": "myont.SemanticWebThing",
        "thingId": {"value": "77"}
    }"#;

    #[test]
    fn minimal_document_expands_to_empty_lists() {
        let doc = parse_json_preserving(MINIMAL).unwrap();
        let thing = expand_thing(&doc, &vocab()).unwrap();
        assert_eq!(thing.thing_id, "77");
        assert!(thing.resources.is_empty());
        assert!(thing.protocols.is_empty());
        assert!(thing.security_problems.is_empty());
        assert!(validate_description(&thing, &vocab()).is_empty());
    }

    #[test]
    fn missing_type_is_an_error() {
        let doc = parse_json_preserving(
            r#"{"@context": {"myont": "http://x#"}, "thingId": "1"}"#,
        )
        .unwrap();
        assert_eq!(expand_thing(&doc, &vocab()), Err(ThingError::MissingType));
    }

    #[test]
    fn unknown_type_is_an_error() {
        let doc = parse_json_preserving(
            r#"{"@context": {"o": "http://other#"}, "@type": "o.Gadget", "thingId": "1"}"#,
        )
        .unwrap();
        assert!(matches!(expand_thing(&doc, &vocab()), Err(ThingError::TypeNotAClass { .. })));
    }

    #[test]
    fn malformed_wrapper_is_an_error() {
        let doc = parse_json_preserving(
            r#"{
                "@context": {"myont": "http://iot.foi.hr/ontologies/ThingAsAServiceOntology.owl#"},
                "@type": "myont.SemanticWebThing",
                "thingId": {"value": "1", "extra": 2}
            }"#,
        )
        .unwrap();
        assert!(matches!(
            expand_thing(&doc, &vocab()),
            Err(ThingError::MalformedValueWrapper { .. })
        ));
    }

    #[test]
    fn duplicate_protocols_yield_one_diagnostic() {
        let mut thing = expand_thing(&parse_json_preserving(MINIMAL).unwrap(), &vocab()).unwrap();
        thing.protocols.push(Labeled { name: "WiFi".into(), description: "".into() });
        thing.protocols.push(Labeled { name: "WiFi".into(), description: "".into() });
        let diags = validate_description(&thing, &vocab());
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert!(diags[0].contains("WiFi"));
    }

    #[test]
    fn unknown_kind_class_is_reported_by_name() {
        let thing = ThingDescription {
            thing_id: "1".into(),
            name: String::new(),
            description: String::new(),
            resources: vec![ResourceSpec {
                kind: ResourceKind::Sensor,
                name: "S".into(),
                description: String::new(),
                io: None,
            }],
            protocols: vec![],
            security_problems: vec![],
        };
        // a vocabulary that never declares Sensor
        let v = load_vocabulary("prefix m http://x#\nm:SemanticWebThing class\n").unwrap();
        let diags = validate_description(&thing, &v);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].contains("Sensor"));
    }
}
