//! Ontology vocabulary: the class/property/subclass model that JSON-LD
//! annotations reference.
//!
//! The vocabulary is loaded from a line-based triple file instead of OWL:
//!
//! ```text
//! prefix myont http://example.org/ont#
//! myont:Sensor class
//! myont:Sensor subClassOf myont:PhysicalObject
//! myont:hasResources property
//! ```
//!
//! Terms may be compact (`myont:Sensor` or the nonstandard `myont.Sensor`)
//! or full IRIs in angle brackets. `#` starts a comment.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VocabError {
    #[error("vocabulary syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate conflicting prefix '{prefix}' at line {line}")]
    ConflictingPrefix { prefix: String, line: usize },
    #[error("prefixes '{first}' and '{second}' both map to <{base}>")]
    NonInjectivePrefix { first: String, second: String, base: String },
    #[error("term <{term}> declared as both class and property")]
    ClassPropertyClash { term: String },
    #[error("subclass cycle through <{term}>")]
    SubclassCycle { term: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Class,
    Property,
    Unknown,
}

/// Immutable after load; safe to share across threads.
#[derive(Debug, Clone, Default)]
pub struct Vocabulary {
    prefix_map: BTreeMap<String, String>,
    classes: BTreeSet<String>,
    properties: BTreeSet<String>,
    subclass_edges: BTreeSet<(String, String)>,
}

impl Vocabulary {
    pub fn prefix_map(&self) -> &BTreeMap<String, String> {
        &self.prefix_map
    }

    pub fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    pub fn properties(&self) -> &BTreeSet<String> {
        &self.properties
    }

    pub fn subclass_edges(&self) -> &BTreeSet<(String, String)> {
        &self.subclass_edges
    }

    /// Expands a term to a full IRI using the loaded prefixes.
    ///
    /// Accepts `<full-iri>`, `prefix:local`, `prefix.local`, and — as a last
    /// resort — a bare local name when exactly one known class or property
    /// carries it. Whitespace is trimmed first; annotation files in the wild
    /// carry stray spaces inside type strings.
    pub fn expand(&self, term: &str) -> Option<String> {
        self.expand_with(&self.prefix_map, term)
    }

    /// Like [`Vocabulary::expand`], with extra prefixes (e.g. a document's
    /// `@context`) consulted before the vocabulary's own.
    pub fn expand_with(&self, prefixes: &BTreeMap<String, String>, term: &str) -> Option<String> {
        let term = term.trim();
        if term.is_empty() {
            return None;
        }
        if let Some(stripped) = term.strip_prefix('<') {
            return stripped.strip_suffix('>').map(str::to_string);
        }
        if self.classes.contains(term) || self.properties.contains(term) {
            return Some(term.to_string());
        }
        for sep in [':', '.'] {
            if let Some((prefix, local)) = term.split_once(sep) {
                let base = prefixes
                    .get(prefix)
                    .or_else(|| self.prefix_map.get(prefix));
                if let Some(base) = base {
                    return Some(format!("{}{}", base, local));
                }
            }
        }
        // bare local name: unique match across known terms
        let mut hit = None;
        for iri in self.classes.iter().chain(self.properties.iter()) {
            if local_name(iri) == term {
                if hit.is_some() {
                    return None;
                }
                hit = Some(iri.clone());
            }
        }
        hit
    }

    pub fn classify_term(&self, term: &str) -> Classification {
        self.classify_with(&self.prefix_map, term)
    }

    pub fn classify_with(&self, prefixes: &BTreeMap<String, String>, term: &str) -> Classification {
        match self.expand_with(prefixes, term) {
            Some(iri) if self.classes.contains(&iri) => Classification::Class,
            Some(iri) if self.properties.contains(&iri) => Classification::Property,
            _ => Classification::Unknown,
        }
    }

    /// True iff `child` reaches `parent` through zero or more subclass edges.
    pub fn is_subclass_of(&self, child: &str, parent: &str) -> bool {
        if child.trim() == parent.trim() {
            return true;
        }
        let (child, parent) = match (self.expand(child), self.expand(parent)) {
            (Some(c), Some(p)) => (c, p),
            _ => return false,
        };
        if child == parent {
            return true;
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![child];
        while let Some(node) = stack.pop() {
            if node == parent {
                return true;
            }
            if !seen.insert(node.clone()) {
                continue;
            }
            for (c, p) in &self.subclass_edges {
                if *c == node {
                    stack.push(p.clone());
                }
            }
        }
        false
    }

    /// The unique class IRI with the given local name, if any.
    pub fn class_by_local(&self, local: &str) -> Option<&str> {
        let mut hit = None;
        for iri in &self.classes {
            if local_name(iri) == local {
                if hit.is_some() {
                    return None;
                }
                hit = Some(iri.as_str());
            }
        }
        hit
    }
}

/// Local name of an IRI: the part after the last `#`, `/`, or `:`.
pub fn local_name(iri: &str) -> &str {
    let cut = iri.rfind(['#', '/', ':']).map(|i| i + 1).unwrap_or(0);
    &iri[cut..]
}

pub fn load_vocabulary(text: &str) -> Result<Vocabulary, VocabError> {
    let mut vocab = Vocabulary::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(i) => &raw_line[..i],
            None => raw_line,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let syntax = |message: String| VocabError::Syntax { line: line_no, message };
        match tokens.as_slice() {
            ["prefix", name, base] => {
                if let Some(existing) = vocab.prefix_map.get(*name) {
                    if existing != base {
                        return Err(VocabError::ConflictingPrefix {
                            prefix: name.to_string(),
                            line: line_no,
                        });
                    }
                } else {
                    vocab.prefix_map.insert(name.to_string(), base.to_string());
                }
            }
            [term, "class"] => {
                let iri = resolve(&vocab, term)
                    .ok_or_else(|| syntax(format!("unresolvable term '{}'", term)))?;
                if vocab.properties.contains(&iri) {
                    return Err(VocabError::ClassPropertyClash { term: iri });
                }
                vocab.classes.insert(iri);
            }
            [term, "property"] => {
                let iri = resolve(&vocab, term)
                    .ok_or_else(|| syntax(format!("unresolvable term '{}'", term)))?;
                if vocab.classes.contains(&iri) {
                    return Err(VocabError::ClassPropertyClash { term: iri });
                }
                vocab.properties.insert(iri);
            }
            [child, "subClassOf", parent] => {
                let child = resolve(&vocab, child)
                    .ok_or_else(|| syntax(format!("unresolvable term '{}'", child)))?;
                let parent = resolve(&vocab, parent)
                    .ok_or_else(|| syntax(format!("unresolvable term '{}'", parent)))?;
                for t in [&child, &parent] {
                    if vocab.properties.contains(t) {
                        return Err(VocabError::ClassPropertyClash { term: t.clone() });
                    }
                    vocab.classes.insert(t.clone());
                }
                vocab.subclass_edges.insert((child, parent));
            }
            _ => {
                return Err(syntax(format!("unknown statement '{}'", line.trim())));
            }
        }
    }
    check_prefix_injectivity(&vocab)?;
    check_acyclic(&vocab)?;
    Ok(vocab)
}

// term resolution during load: no bare-name fallback, declarations must be
// explicit about which namespace they populate
fn resolve(vocab: &Vocabulary, term: &str) -> Option<String> {
    if let Some(stripped) = term.strip_prefix('<') {
        return stripped.strip_suffix('>').map(str::to_string);
    }
    for sep in [':', '.'] {
        if let Some((prefix, local)) = term.split_once(sep) {
            if let Some(base) = vocab.prefix_map.get(prefix) {
                return Some(format!("{}{}", base, local));
            }
        }
    }
    None
}

fn check_prefix_injectivity(vocab: &Vocabulary) -> Result<(), VocabError> {
    let mut by_base: BTreeMap<&String, &String> = BTreeMap::new();
    for (prefix, base) in &vocab.prefix_map {
        if let Some(first) = by_base.insert(base, prefix) {
            return Err(VocabError::NonInjectivePrefix {
                first: first.clone(),
                second: prefix.clone(),
                base: base.clone(),
            });
        }
    }
    Ok(())
}

fn check_acyclic(vocab: &Vocabulary) -> Result<(), VocabError> {
    // DFS with colors over the subclass graph
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    let mut color: BTreeMap<&String, Color> = BTreeMap::new();
    fn visit<'a>(
        node: &'a String,
        edges: &'a BTreeSet<(String, String)>,
        color: &mut BTreeMap<&'a String, Color>,
    ) -> Result<(), VocabError> {
        match color.get(node).copied().unwrap_or(Color::White) {
            Color::Gray => {
                return Err(VocabError::SubclassCycle { term: node.clone() });
            }
            Color::Black => return Ok(()),
            Color::White => {}
        }
        color.insert(node, Color::Gray);
        for (c, p) in edges {
            if c == node {
                visit(p, edges, color)?;
            }
        }
        color.insert(node, Color::Black);
        Ok(())
    }
    for (child, _) in &vocab.subclass_edges {
        visit(child, &vocab.subclass_edges, &mut color)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# test vocabulary
prefix myont http://iot.example/ont#
myont:SemanticWebThing class
myont:PhysicalObject class
myont:Sensor subClassOf myont:PhysicalObject
myont:Actuator subClassOf myont:PhysicalObject
myont:hasResources property
";

    #[test]
    fn subclass_edge_present() {
        let v = load_vocabulary(SAMPLE).unwrap();
        assert!(v.subclass_edges().contains(&(
            "http://iot.example/ont#Sensor".to_string(),
            "http://iot.example/ont#PhysicalObject".to_string()
        )));
    }

    #[test]
    fn empty_file_gives_empty_vocabulary() {
        let v = load_vocabulary("").unwrap();
        assert!(v.classes().is_empty());
        assert!(v.properties().is_empty());
        assert!(v.subclass_edges().is_empty());
    }

    #[test]
    fn redeclaration_is_idempotent() {
        let twice = format!("{}myont:Sensor class\nmyont:Sensor class\n", SAMPLE);
        let v1 = load_vocabulary(SAMPLE).unwrap();
        let v2 = load_vocabulary(&twice).unwrap();
        assert_eq!(v1.classes(), v2.classes());
    }

    #[test]
    fn classify_accepts_dot_and_colon() {
        let v = load_vocabulary(SAMPLE).unwrap();
        assert_eq!(v.classify_term("myont.SemanticWebThing"), Classification::Class);
        assert_eq!(v.classify_term("myont:SemanticWebThing"), Classification::Class);
        assert_eq!(v.classify_term("myont:hasResources"), Classification::Property);
        assert_eq!(v.classify_term("nosuch:Thing"), Classification::Unknown);
    }

    #[test]
    fn classify_trims_stray_whitespace() {
        let v = load_vocabulary(SAMPLE).unwrap();
        assert_eq!(v.classify_term("myont.Sensor "), Classification::Class);
    }

    #[test]
    fn bare_local_name_resolves_when_unique() {
        let v = load_vocabulary(SAMPLE).unwrap();
        assert_eq!(v.classify_term("Sensor"), Classification::Class);
    }

    #[test]
    fn subclass_is_reflexive_and_directed() {
        let v = load_vocabulary(SAMPLE).unwrap();
        assert!(v.is_subclass_of("myont:Sensor", "myont:PhysicalObject"));
        assert!(v.is_subclass_of("myont:Sensor", "myont:Sensor"));
        assert!(v.is_subclass_of("anything", "anything"));
        assert!(!v.is_subclass_of("myont:PhysicalObject", "myont:Sensor"));
    }

    #[test]
    fn cycle_is_rejected() {
        let text = "\
prefix m http://x/
m:A subClassOf m:B
m:B subClassOf m:C
m:C subClassOf m:A
";
        assert!(matches!(load_vocabulary(text), Err(VocabError::SubclassCycle { .. })));
    }

    #[test]
    fn conflicting_prefix_is_rejected() {
        let text = "prefix m http://x/\nprefix m http://y/\n";
        assert!(matches!(load_vocabulary(text), Err(VocabError::ConflictingPrefix { .. })));
    }

    #[test]
    fn two_prefixes_same_base_rejected() {
        let text = "prefix m http://x/\nprefix n http://x/\n";
        assert!(matches!(load_vocabulary(text), Err(VocabError::NonInjectivePrefix { .. })));
    }

    #[test]
    fn unknown_statement_is_hard_error() {
        let err = load_vocabulary("myont:Sensor frobnicates\n").unwrap_err();
        match err {
            VocabError::Syntax { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {:?}", other),
        }
    }

    // is_subclass_of must agree with brute-force transitive closure
    #[test]
    fn closure_agreement() {
        let v = load_vocabulary(SAMPLE).unwrap();
        let nodes: Vec<&String> = v.classes().iter().collect();
        let mut closure: BTreeSet<(String, String)> = v
            .classes()
            .iter()
            .map(|c| (c.clone(), c.clone()))
            .chain(v.subclass_edges().iter().cloned())
            .collect();
        loop {
            let mut grew = false;
            let pairs: Vec<_> = closure.iter().cloned().collect();
            for (a, b) in &pairs {
                for (c, d) in &pairs {
                    if b == c && closure.insert((a.clone(), d.clone())) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        for a in &nodes {
            for b in &nodes {
                assert_eq!(
                    v.is_subclass_of(a, b),
                    closure.contains(&((*a).clone(), (*b).clone())),
                    "disagreement on ({}, {})",
                    a,
                    b
                );
            }
        }
    }
}
