//! Compiles typed descriptions into ground atoms and assembles problems.
//!
//! Emission order is fixed so golden-file comparisons are exact: per thing
//! the identity atoms come first, then resources (each with its description
//! and value atoms), then protocols, then security problems.

use thiserror::Error;

use crate::sawsdl::CloudServiceDescription;
use crate::shop::{Atom, Problem};
use crate::thing::{Direction, ThingDescription};
use crate::vocab::local_name;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtomizeError {
    #[error("'{input}' normalizes to an empty symbol")]
    EmptySymbol { input: String },
    #[error("task atom {atom} is not ground")]
    TaskNotGround { atom: String },
}

/// Emission mode. `General` emits input and output value atoms
/// symmetrically; `PaperCompat` suppresses the input atoms of actuators,
/// matching the published problem listings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AtomizationMode {
    General,
    #[default]
    PaperCompat,
}

/// Turns free text into a planner symbol: whitespace runs, parentheses, and
/// `;` become `_`, and leading all-digit tokens are dropped
/// ("02 long LED" → `long_LED`).
pub fn normalize_symbol(s: &str) -> Result<String, AtomizeError> {
    let cleaned: String = s
        .chars()
        .map(|c| if c == '(' || c == ')' || c == ';' || c.is_whitespace() { ' ' } else { c })
        .collect();
    let mut tokens: Vec<&str> = cleaned.split_whitespace().collect();
    while let Some(first) = tokens.first() {
        if !first.is_empty() && first.bytes().all(|b| b.is_ascii_digit()) {
            tokens.remove(0);
        } else {
            break;
        }
    }
    if tokens.is_empty() {
        return Err(AtomizeError::EmptySymbol { input: s.to_string() });
    }
    Ok(tokens.join("_"))
}

/// Thing ids become `SemanticWebThing_<id>` symbols.
pub fn thing_symbol(thing_id: &str) -> Result<String, AtomizeError> {
    normalize_symbol(&format!("SemanticWebThing_{}", thing_id.trim()))
}

pub fn atomize_thing(
    d: &ThingDescription,
    mode: AtomizationMode,
) -> Result<Vec<Atom>, AtomizeError> {
    let tid = thing_symbol(&d.thing_id)?;
    let mut atoms = Vec::new();
    atoms.push(Atom::ground("SemanticWebThing", &[&tid]));
    if !d.name.trim().is_empty() {
        atoms.push(Atom::ground("thingName", &[&tid, &normalize_symbol(&d.name)?]));
    }
    if !d.description.trim().is_empty() {
        atoms.push(Atom::ground("thingDescription", &[&tid, &normalize_symbol(&d.description)?]));
    }
    for r in &d.resources {
        let kind = r.kind.as_symbol();
        let name = normalize_symbol(&r.name)?;
        atoms.push(Atom::ground("hasResources", &[&tid, kind, &name]));
        if !r.description.trim().is_empty() {
            atoms.push(Atom::ground(
                "Description",
                &[kind, &name, &normalize_symbol(&r.description)?],
            ));
        }
        if let Some(io) = &r.io {
            let suppressed = mode == AtomizationMode::PaperCompat
                && r.kind == crate::thing::ResourceKind::Actuator
                && io.direction == Direction::Input;
            if !suppressed {
                let prefix = match io.direction {
                    Direction::Output => "Output",
                    Direction::Input => "Input",
                };
                let mut emit = |suffix: &str, value: &str| -> Result<(), AtomizeError> {
                    if !value.trim().is_empty() {
                        atoms.push(Atom::ground(
                            format!("{}{}", prefix, suffix),
                            &[kind, &name, &normalize_symbol(value)?],
                        ));
                    }
                    Ok(())
                };
                emit("Name", &io.name)?;
                emit("Description", &io.description)?;
                emit("Unit", &io.unit)?;
            }
        }
    }
    for p in &d.protocols {
        atoms.push(Atom::ground("supportsProtocol", &[&tid, &normalize_symbol(&p.name)?]));
    }
    for s in &d.security_problems {
        atoms.push(Atom::ground("hasSecurityProblem", &[&tid, &normalize_symbol(&s.name)?]));
    }
    Ok(atoms)
}

pub fn atomize_cloud(c: &CloudServiceDescription) -> Result<Vec<Atom>, AtomizeError> {
    let sid = normalize_symbol(&c.service_id)?;
    let mut atoms = Vec::new();
    atoms.push(Atom::ground("CloudService", &[&sid]));
    atoms.push(Atom::ground("serviceName", &[&sid, &normalize_symbol(&c.name)?]));
    for op in &c.operations {
        let op_sym = normalize_symbol(&op.name)?;
        atoms.push(Atom::ground("hasOperation", &[&sid, &op_sym]));
        if !op.model_reference.trim().is_empty() {
            // concept symbol is the local name of the referenced term
            let concept = normalize_symbol(local_name(op.model_reference.trim()))?;
            atoms.push(Atom::ground("modelReference", &[&op_sym, &concept]));
        }
    }
    Ok(atoms)
}

pub fn build_problem(
    name: &str,
    domain_name: &str,
    things: &[ThingDescription],
    clouds: &[CloudServiceDescription],
    tasks: Vec<Atom>,
    mode: AtomizationMode,
) -> Result<Problem, AtomizeError> {
    for task in &tasks {
        if !task.is_ground() {
            return Err(AtomizeError::TaskNotGround { atom: task.to_string() });
        }
    }
    let mut initial_state = Vec::new();
    for thing in things {
        initial_state.extend(atomize_thing(thing, mode)?);
    }
    for cloud in clouds {
        initial_state.extend(atomize_cloud(cloud)?);
    }
    Ok(Problem {
        name: name.to_string(),
        domain_name: domain_name.to_string(),
        initial_state,
        task_list: tasks,
    })
}
