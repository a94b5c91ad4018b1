//! Cloud service descriptors: a WSDL subset with `modelReference`
//! annotations.
//!
//! Only `definitions`, `documentation`, `message`/`part`, `portType`, and
//! `operation` (with `input`/`output`) are interpreted. Elements and
//! attributes are matched by local name; namespace machinery is not needed
//! for the controlled descriptors this pipeline ingests.

use quick_xml::events::Event;
use quick_xml::Reader;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SawsdlError {
    #[error("xml syntax error: {0}")]
    Xml(String),
    #[error("root element must be 'definitions'")]
    NotDefinitions,
    #[error("definitions element has no usable name")]
    MissingServiceName,
    #[error("no portType found")]
    NoPortType,
    #[error("no operations")]
    NoOperations,
    #[error("duplicate operation name '{0}'")]
    DuplicateOperation(String),
    #[error("operation without a name attribute")]
    UnnamedOperation,
    #[error("reference to unknown message '{0}'")]
    UnknownMessage(String),
    #[error("model reference '{0}' is not a term or IRI")]
    InvalidModelReference(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudOperation {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Ontology concept the operation is annotated with; empty if absent.
    pub model_reference: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudServiceDescription {
    pub service_id: String,
    pub name: String,
    pub operations: Vec<CloudOperation>,
}

#[derive(Debug, Default)]
struct Element {
    local: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
}

impl Element {
    fn attr(&self, local: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == local)
            .map(|(_, v)| v.as_str())
    }

    fn children_named<'a>(&'a self, local: &'a str) -> impl Iterator<Item = &'a Element> {
        self.children.iter().filter(move |c| c.local == local)
    }
}

fn local_part(qname: &str) -> &str {
    qname.rsplit(':').next().unwrap_or(qname)
}

fn read_tree(text: &str) -> Result<Element, SawsdlError> {
    let mut reader = Reader::from_str(text);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let event = reader.read_event().map_err(|e| SawsdlError::Xml(e.to_string()))?;
        match event {
            Event::Start(start) => {
                let el = element_from(&start)?;
                stack.push(el);
            }
            Event::Empty(start) => {
                let el = element_from(&start)?;
                attach(&mut stack, &mut root, el)?;
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| SawsdlError::Xml("unmatched end tag".into()))?;
                attach(&mut stack, &mut root, el)?;
            }
            Event::Text(t) => {
                let text = t.xml10_content().map_err(|e| SawsdlError::Xml(e.to_string()))?;
                if let Some(parent) = stack.last_mut() {
                    parent.text.push_str(&text);
                }
            }
            Event::CData(c) => {
                if let Some(parent) = stack.last_mut() {
                    parent.text.push_str(&String::from_utf8_lossy(&c));
                }
            }
            Event::Eof => break,
            _ => {} // declarations, comments, processing instructions
        }
    }
    if !stack.is_empty() {
        return Err(SawsdlError::Xml("unterminated element".into()));
    }
    root.ok_or_else(|| SawsdlError::Xml("no root element".into()))
}

fn element_from(start: &quick_xml::events::BytesStart<'_>) -> Result<Element, SawsdlError> {
    let name = String::from_utf8_lossy(start.name().as_ref()).to_string();
    let mut el = Element { local: local_part(&name).to_string(), ..Element::default() };
    for attr in start.attributes() {
        let attr = attr.map_err(|e| SawsdlError::Xml(e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).to_string();
        if key == "xmlns" || key.starts_with("xmlns:") {
            continue;
        }
        let value = attr
            .normalized_value(quick_xml::XmlVersion::default())
            .map_err(|e| SawsdlError::Xml(e.to_string()))?
            .to_string();
        el.attrs.push((local_part(&key).to_string(), value));
    }
    Ok(el)
}

fn attach(
    stack: &mut Vec<Element>,
    root: &mut Option<Element>,
    el: Element,
) -> Result<(), SawsdlError> {
    match stack.last_mut() {
        Some(parent) => parent.children.push(el),
        None => {
            if root.is_some() {
                return Err(SawsdlError::Xml("multiple root elements".into()));
            }
            *root = Some(el);
        }
    }
    Ok(())
}

pub fn parse_sawsdl(text: &str) -> Result<CloudServiceDescription, SawsdlError> {
    let root = read_tree(text)?;
    if root.local != "definitions" {
        return Err(SawsdlError::NotDefinitions);
    }
    let service_id = root
        .attr("name")
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .ok_or(SawsdlError::MissingServiceName)?
        .to_string();
    let name = root
        .children_named("documentation")
        .map(|d| d.text.trim().to_string())
        .find(|t| !t.is_empty())
        .unwrap_or_else(|| service_id.clone());

    let mut messages: Vec<(String, Vec<String>)> = Vec::new();
    for message in root.children_named("message") {
        let msg_name = message.attr("name").unwrap_or("").to_string();
        let parts = message
            .children_named("part")
            .filter_map(|p| p.attr("name"))
            .map(str::to_string)
            .collect();
        messages.push((msg_name, parts));
    }
    let lookup_parts = |reference: &str| -> Result<Vec<String>, SawsdlError> {
        let local = local_part(reference);
        messages
            .iter()
            .find(|(n, _)| n == local)
            .map(|(_, parts)| parts.clone())
            .ok_or_else(|| SawsdlError::UnknownMessage(local.to_string()))
    };

    let port_types: Vec<&Element> = root.children_named("portType").collect();
    if port_types.is_empty() {
        return Err(SawsdlError::NoPortType);
    }
    let mut operations = Vec::new();
    for port_type in port_types {
        for op in port_type.children_named("operation") {
            let op_name = op
                .attr("name")
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or(SawsdlError::UnnamedOperation)?
                .to_string();
            if operations.iter().any(|o: &CloudOperation| o.name == op_name) {
                return Err(SawsdlError::DuplicateOperation(op_name));
            }
            let model_reference = op.attr("modelReference").unwrap_or("").trim().to_string();
            if model_reference.chars().any(char::is_whitespace) {
                return Err(SawsdlError::InvalidModelReference(model_reference));
            }
            let inputs = match op.children_named("input").next().and_then(|i| i.attr("message")) {
                Some(msg) => lookup_parts(msg)?,
                None => Vec::new(),
            };
            let outputs = match op.children_named("output").next().and_then(|o| o.attr("message")) {
                Some(msg) => lookup_parts(msg)?,
                None => Vec::new(),
            };
            operations.push(CloudOperation { name: op_name, inputs, outputs, model_reference });
        }
    }
    if operations.is_empty() {
        return Err(SawsdlError::NoOperations);
    }
    Ok(CloudServiceDescription { service_id, name, operations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> String {
        std::fs::read_to_string(format!(
            "{}/fixtures/cloud_storage.wsdl",
            env!("CARGO_MANIFEST_DIR")
        ))
        .unwrap()
    }

    #[test]
    fn bundled_descriptor_parses() {
        let svc = parse_sawsdl(&fixture()).unwrap();
        assert_eq!(svc.service_id, "AzureBlobMock");
        assert_eq!(svc.name, "Azure Blob Mock");
        assert_eq!(
            svc.operations,
            vec![CloudOperation {
                name: "putObject".into(),
                inputs: vec!["bucket".into(), "key".into(), "payload".into()],
                outputs: vec!["etag".into()],
                model_reference: "myont:StorageService".into(),
            }]
        );
    }

    #[test]
    fn empty_port_type_is_an_error() {
        let text = r#"<definitions name="S"><portType name="P"></portType></definitions>"#;
        assert_eq!(parse_sawsdl(text), Err(SawsdlError::NoOperations));
    }

    #[test]
    fn missing_port_type_is_an_error() {
        let text = r#"<definitions name="S"></definitions>"#;
        assert_eq!(parse_sawsdl(text), Err(SawsdlError::NoPortType));
    }

    #[test]
    fn missing_model_reference_defaults_to_empty() {
        let text = r#"<definitions name="S">
            <portType name="P"><operation name="op"/></portType>
        </definitions>"#;
        let svc = parse_sawsdl(text).unwrap();
        assert_eq!(svc.operations[0].model_reference, "");
    }

    #[test]
    fn duplicate_operation_names_are_rejected() {
        let text = r#"<definitions name="S">
            <portType name="P"><operation name="op"/><operation name="op"/></portType>
        </definitions>"#;
        assert_eq!(parse_sawsdl(text), Err(SawsdlError::DuplicateOperation("op".into())));
    }

    #[test]
    fn xml_syntax_error_is_reported() {
        assert!(matches!(parse_sawsdl("<definitions"), Err(SawsdlError::Xml(_))));
    }
}
