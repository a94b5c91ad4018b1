//! Total-order hierarchical task decomposition over the s-expression
//! domain/problem model, by direct interpretation.
//!
//! Search is depth-first and left-to-right: the first task of the list is
//! expanded, operators and methods are tried in domain order, method
//! branches in branch order, and precondition satisfiers in state order.
//! All tie-breaking is source order, so results are deterministic.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexSet;
use thiserror::Error;

use crate::shop::{Atom, AxiomDef, Domain, MethodDef, OperatorDef, Plan, Problem, Term};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("problem targets domain '{problem}', got domain '{domain}'")]
    DomainMismatch { domain: String, problem: String },
    #[error("search limits must be at least 1")]
    BadLimits,
    #[error("operator effect {atom} is not ground")]
    NonGroundEffect { atom: String },
    #[error("no operator '{head}/{arity}' in the domain")]
    NoSuchOperator { head: String, arity: usize },
    #[error("precondition unsatisfied at step {step}")]
    PreconditionUnsatisfied { step: String },
    #[error("plan cost {declared} does not match operator cost sum {actual}")]
    CostMismatch { declared: f64, actual: f64 },
}

// ---------------------------------------------------------------------------
// substitutions and unification

/// Variable bindings. Bindings may chain (`?x → ?y → a`); resolution follows
/// the chain. A variable is never bound to itself, which keeps the relation
/// acyclic.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Substitution {
    bindings: BTreeMap<String, Term>,
}

impl Substitution {
    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.bindings.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn bind(&mut self, var: &str, term: Term) {
        if let Term::Variable(name) = &term {
            if name == var {
                return;
            }
        }
        self.bindings.insert(var.to_string(), term);
    }

    /// Follows binding chains until a symbol or an unbound variable.
    pub fn resolve(&self, term: &Term) -> Term {
        let mut current = term.clone();
        loop {
            match &current {
                Term::Variable(name) => match self.bindings.get(name) {
                    Some(next) => current = next.clone(),
                    None => return current,
                },
                Term::Symbol(_) => return current,
            }
        }
    }

    pub fn apply(&self, atom: &Atom) -> Atom {
        Atom::new(
            atom.head.clone(),
            atom.args.iter().map(|t| self.resolve(t)).collect(),
        )
    }

    /// Variables mentioned anywhere in the bindings, keys and values both.
    fn mentioned_vars(&self) -> BTreeSet<String> {
        let mut vars: BTreeSet<String> = self.bindings.keys().cloned().collect();
        for term in self.bindings.values() {
            if let Term::Variable(name) = term {
                vars.insert(name.clone());
            }
        }
        vars
    }

    /// Projects onto `vars`, fully resolving each kept binding.
    fn restrict_resolved(&self, vars: &BTreeSet<String>) -> Substitution {
        let mut out = Substitution::default();
        for var in vars {
            let resolved = self.resolve(&Term::Variable(var.clone()));
            out.bind(var, resolved);
        }
        out
    }
}

/// Most general unifier of two atoms, extending `s`. Symbols unify only with
/// identical symbols. Returns `None` on clash.
pub fn unify(a: &Atom, b: &Atom, s: &Substitution) -> Option<Substitution> {
    if a.head != b.head || a.arity() != b.arity() {
        return None;
    }
    let mut s = s.clone();
    for (ta, tb) in a.args.iter().zip(b.args.iter()) {
        let ra = s.resolve(ta);
        let rb = s.resolve(tb);
        match (&ra, &rb) {
            (Term::Variable(va), Term::Variable(vb)) if va == vb => {}
            (Term::Variable(va), _) => s.bind(va, rb),
            (_, Term::Variable(vb)) => s.bind(vb, ra),
            (Term::Symbol(x), Term::Symbol(y)) => {
                if x != y {
                    return None;
                }
            }
        }
    }
    Some(s)
}

// ---------------------------------------------------------------------------
// states

/// Ground fact set with stable insertion order. Adding a present atom is a
/// no-op; lookups by head scan in insertion order, which fixes the
/// enumeration order of precondition satisfiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct State {
    atoms: IndexSet<Atom>,
}

impl State {
    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> State {
        State { atoms: atoms.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) {
        self.atoms.insert(atom);
    }

    pub fn remove(&mut self, atom: &Atom) {
        self.atoms.shift_remove(atom);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn candidates<'a>(&'a self, head: &'a str, arity: usize) -> impl Iterator<Item = &'a Atom> {
        self.atoms
            .iter()
            .filter(move |a| a.head == head && a.arity() == arity)
    }
}

// ---------------------------------------------------------------------------
// precondition satisfaction

#[derive(Debug, Clone, PartialEq)]
pub struct SatisfyOutcome {
    pub substitutions: Vec<Substitution>,
    /// Set when axiom chaining hit the depth bound; some satisfiers may be
    /// missing.
    pub truncated: bool,
}

/// Enumerates every substitution extending `s` under which all conjuncts
/// hold, in deterministic order: state atoms in insertion order first, then
/// axiom derivations in axiom order (tails in tail order). Axiom chaining is
/// bounded by `max_depth`.
pub fn satisfy(
    state: &State,
    axioms: &[AxiomDef],
    conjunction: &[Atom],
    s: &Substitution,
    max_depth: usize,
) -> SatisfyOutcome {
    let mut query_vars = s.mentioned_vars();
    for atom in conjunction {
        query_vars.extend(atom.variables().map(str::to_string));
    }
    let mut truncated = false;
    let mut counter = 0usize;
    let raw = solve(state, axioms, conjunction, s, max_depth, &mut truncated, &mut counter);
    let mut seen = BTreeSet::new();
    let mut substitutions = Vec::new();
    for full in raw {
        let restricted = full.restrict_resolved(&query_vars);
        if seen.insert(restricted.clone()) {
            substitutions.push(restricted);
        }
    }
    SatisfyOutcome { substitutions, truncated }
}

fn solve(
    state: &State,
    axioms: &[AxiomDef],
    conjuncts: &[Atom],
    s: &Substitution,
    budget: usize,
    truncated: &mut bool,
    counter: &mut usize,
) -> Vec<Substitution> {
    let Some((first, rest)) = conjuncts.split_first() else {
        return vec![s.clone()];
    };
    let mut results = Vec::new();
    for atom in state.candidates(&first.head, first.arity()) {
        if let Some(s2) = unify(first, atom, s) {
            results.extend(solve(state, axioms, rest, &s2, budget, truncated, counter));
        }
    }
    for axiom in axioms {
        if axiom.head.head != first.head || axiom.head.arity() != first.arity() {
            continue;
        }
        if budget == 0 {
            *truncated = true;
            break;
        }
        let fresh = rename_axiom(axiom, counter);
        let Some(s1) = unify(first, &fresh.head, s) else { continue };
        for tail in &fresh.tails {
            for s2 in solve(state, axioms, tail, &s1, budget - 1, truncated, counter) {
                results.extend(solve(state, axioms, rest, &s2, budget, truncated, counter));
            }
        }
    }
    results
}

// standardize-apart renaming; `counter` is bumped once per definition use
fn rename_term(term: &Term, tag: usize) -> Term {
    match term {
        Term::Variable(name) => Term::Variable(format!("{}~{}", name, tag)),
        Term::Symbol(_) => term.clone(),
    }
}

fn rename_atom(atom: &Atom, tag: usize) -> Atom {
    Atom::new(atom.head.clone(), atom.args.iter().map(|t| rename_term(t, tag)).collect())
}

fn rename_atoms(atoms: &[Atom], tag: usize) -> Vec<Atom> {
    atoms.iter().map(|a| rename_atom(a, tag)).collect()
}

fn rename_axiom(axiom: &AxiomDef, counter: &mut usize) -> AxiomDef {
    let tag = *counter;
    *counter += 1;
    AxiomDef {
        head: rename_atom(&axiom.head, tag),
        tails: axiom.tails.iter().map(|t| rename_atoms(t, tag)).collect(),
    }
}

fn rename_operator(op: &OperatorDef, counter: &mut usize) -> OperatorDef {
    let tag = *counter;
    *counter += 1;
    OperatorDef {
        head: rename_atom(&op.head, tag),
        precond: rename_atoms(&op.precond, tag),
        delete_list: rename_atoms(&op.delete_list, tag),
        add_list: rename_atoms(&op.add_list, tag),
        cost: op.cost,
    }
}

fn rename_method(method: &MethodDef, counter: &mut usize) -> MethodDef {
    let tag = *counter;
    *counter += 1;
    MethodDef {
        head: rename_atom(&method.head, tag),
        branches: method
            .branches
            .iter()
            .map(|b| crate::shop::MethodBranch {
                precond: rename_atoms(&b.precond, tag),
                subtasks: rename_atoms(&b.subtasks, tag),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// operator application

/// New state with the instantiated delete list removed and add list
/// inserted, deletes first. Deleting an absent atom is a no-op.
pub fn apply_operator(
    state: &State,
    op: &OperatorDef,
    s: &Substitution,
) -> Result<State, PlanError> {
    let mut next = state.clone();
    for atom in &op.delete_list {
        let ground = s.apply(atom);
        if !ground.is_ground() {
            return Err(PlanError::NonGroundEffect { atom: ground.to_string() });
        }
        next.remove(&ground);
    }
    for atom in &op.add_list {
        let ground = s.apply(atom);
        if !ground.is_ground() {
            return Err(PlanError::NonGroundEffect { atom: ground.to_string() });
        }
        next.insert(ground);
    }
    Ok(next)
}

// ---------------------------------------------------------------------------
// plan search

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_depth: usize,
    pub max_plans: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_depth: 64, max_plans: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Plans in discovery order, at most `max_plans`.
    pub plans: Vec<Plan>,
    /// Set when the depth bound cut off at least one branch.
    pub truncated: bool,
}

impl SearchOutcome {
    /// No plan found and at least one branch was cut short, so absence is
    /// not conclusive.
    pub fn is_inconclusive(&self) -> bool {
        self.plans.is_empty() && self.truncated
    }
}

pub fn find_plans(
    domain: &Domain,
    problem: &Problem,
    limits: SearchLimits,
) -> Result<SearchOutcome, PlanError> {
    if domain.name != problem.domain_name {
        return Err(PlanError::DomainMismatch {
            domain: domain.name.clone(),
            problem: problem.domain_name.clone(),
        });
    }
    if limits.max_depth == 0 || limits.max_plans == 0 {
        return Err(PlanError::BadLimits);
    }
    let mut ctx = SearchCtx {
        domain,
        limits,
        plans: Vec::new(),
        truncated: false,
        counter: 0,
    };
    let state = State::from_atoms(problem.initial_state.iter().cloned());
    let mut steps = Vec::new();
    seek(&mut ctx, &state, &problem.task_list, &mut steps, 0.0, 0);
    Ok(SearchOutcome { plans: ctx.plans, truncated: ctx.truncated })
}

struct SearchCtx<'a> {
    domain: &'a Domain,
    limits: SearchLimits,
    plans: Vec<Plan>,
    truncated: bool,
    counter: usize,
}

fn seek(
    ctx: &mut SearchCtx<'_>,
    state: &State,
    tasks: &[Atom],
    steps: &mut Vec<Atom>,
    cost: f64,
    depth: usize,
) {
    if ctx.plans.len() >= ctx.limits.max_plans {
        return;
    }
    let Some((first, rest)) = tasks.split_first() else {
        ctx.plans.push(Plan { steps: steps.clone(), total_cost: cost });
        return;
    };
    if depth >= ctx.limits.max_depth {
        ctx.truncated = true;
        return;
    }
    if first.is_primitive() {
        let ops: Vec<OperatorDef> = ctx
            .domain
            .operators_named(&first.head, first.arity())
            .cloned()
            .collect();
        for op in ops {
            let fresh = rename_operator(&op, &mut ctx.counter);
            let Some(seed) = unify(&fresh.head, first, &Substitution::default()) else {
                continue;
            };
            let sat = satisfy(state, &ctx.domain.axioms, &fresh.precond, &seed, ctx.limits.max_depth);
            if sat.truncated {
                ctx.truncated = true;
            }
            for s in sat.substitutions {
                if ctx.plans.len() >= ctx.limits.max_plans {
                    return;
                }
                let step = s.apply(&fresh.head);
                if !step.is_ground() {
                    continue;
                }
                let Ok(next_state) = apply_operator(state, &fresh, &s) else { continue };
                let next_tasks: Vec<Atom> = rest.iter().map(|t| s.apply(t)).collect();
                steps.push(step);
                seek(ctx, &next_state, &next_tasks, steps, cost + fresh.cost, depth + 1);
                steps.pop();
            }
        }
    } else {
        let methods: Vec<MethodDef> = ctx
            .domain
            .methods_named(&first.head, first.arity())
            .cloned()
            .collect();
        for method in methods {
            let fresh = rename_method(&method, &mut ctx.counter);
            let Some(seed) = unify(&fresh.head, first, &Substitution::default()) else {
                continue;
            };
            for branch in &fresh.branches {
                let sat =
                    satisfy(state, &ctx.domain.axioms, &branch.precond, &seed, ctx.limits.max_depth);
                if sat.truncated {
                    ctx.truncated = true;
                }
                for s in sat.substitutions {
                    if ctx.plans.len() >= ctx.limits.max_plans {
                        return;
                    }
                    let mut next_tasks: Vec<Atom> =
                        branch.subtasks.iter().map(|t| s.apply(t)).collect();
                    next_tasks.extend(rest.iter().map(|t| s.apply(t)));
                    seek(ctx, state, &next_tasks, steps, cost, depth + 1);
                }
            }
        }
    }
}

/// Replays a plan from the initial state, checking each operator's
/// precondition and the declared cost, and returns the final state.
pub fn replay(domain: &Domain, problem: &Problem, plan: &Plan) -> Result<State, PlanError> {
    let mut state = State::from_atoms(problem.initial_state.iter().cloned());
    let mut counter = 0usize;
    let mut cost = 0.0;
    for step in &plan.steps {
        let op = domain
            .operators_named(&step.head, step.arity())
            .next()
            .ok_or_else(|| PlanError::NoSuchOperator {
                head: step.head.clone(),
                arity: step.arity(),
            })?;
        let fresh = rename_operator(op, &mut counter);
        let seed = unify(&fresh.head, step, &Substitution::default())
            .ok_or_else(|| PlanError::PreconditionUnsatisfied { step: step.to_string() })?;
        let sat = satisfy(&state, &domain.axioms, &fresh.precond, &seed, SearchLimits::default().max_depth);
        let s = sat
            .substitutions
            .into_iter()
            .next()
            .ok_or_else(|| PlanError::PreconditionUnsatisfied { step: step.to_string() })?;
        state = apply_operator(&state, &fresh, &s)?;
        cost += fresh.cost;
    }
    if (cost - plan.total_cost).abs() > 1e-9 {
        return Err(PlanError::CostMismatch { declared: plan.total_cost, actual: cost });
    }
    Ok(state)
}

// ---------------------------------------------------------------------------
// ranking by non-functional properties

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankWeights {
    pub security: f64,
    pub protocol: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights { security: 1.0, protocol: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedPlan {
    pub plan: Plan,
    pub score: f64,
    pub score_breakdown: BTreeMap<String, f64>,
}

/// Scores plans by the non-functional properties recorded in the problem
/// state; lower is better. The security component counts the distinct
/// security problems of every thing whose resource is named in a plan step.
/// The protocol component adds one per pair of things that co-occur in a
/// step without sharing a protocol. Ties keep discovery order.
pub fn rank_plans(plans: &[Plan], problem: &Problem, weights: RankWeights) -> Vec<RankedPlan> {
    // resource name -> owning things
    let mut owners: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut security: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut protocols: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for atom in &problem.initial_state {
        let syms: Vec<&str> = atom
            .args
            .iter()
            .map(|t| match t {
                Term::Symbol(s) => s.as_str(),
                Term::Variable(v) => v.as_str(),
            })
            .collect();
        match (atom.head.as_str(), syms.as_slice()) {
            ("hasResources", [tid, _kind, rname]) => {
                owners.entry(rname).or_default().insert(tid);
            }
            ("hasSecurityProblem", [tid, problem_name]) => {
                security.entry(tid).or_default().insert(problem_name);
            }
            ("supportsProtocol", [tid, proto]) => {
                protocols.entry(tid).or_default().insert(proto);
            }
            _ => {}
        }
    }

    let mut ranked: Vec<RankedPlan> = plans
        .iter()
        .map(|plan| {
            let mut involved: BTreeSet<&str> = BTreeSet::new();
            let mut unmatched_pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
            for step in &plan.steps {
                let mut step_things: BTreeSet<&str> = BTreeSet::new();
                for arg in &step.args {
                    if let Term::Symbol(name) = arg {
                        if let Some(tids) = owners.get(name.as_str()) {
                            step_things.extend(tids.iter().copied());
                        }
                    }
                }
                involved.extend(step_things.iter().copied());
                let things: Vec<&str> = step_things.into_iter().collect();
                for (i, a) in things.iter().enumerate() {
                    for b in &things[i + 1..] {
                        let shared = match (protocols.get(*a), protocols.get(*b)) {
                            (Some(pa), Some(pb)) => pa.intersection(pb).next().is_some(),
                            _ => false,
                        };
                        if !shared {
                            unmatched_pairs.insert((a, b));
                        }
                    }
                }
            }
            let security_count: usize = involved
                .iter()
                .map(|tid| security.get(tid).map_or(0, BTreeSet::len))
                .sum();
            let mut score_breakdown = BTreeMap::new();
            score_breakdown.insert("security".to_string(), weights.security * security_count as f64);
            score_breakdown
                .insert("protocol".to_string(), weights.protocol * unmatched_pairs.len() as f64);
            let score = score_breakdown.values().sum();
            RankedPlan { plan: plan.clone(), score, score_breakdown }
        })
        .collect();
    ranked.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap_or(std::cmp::Ordering::Equal));
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shop::{parse_domain_text, parse_problem_text};

    fn fixture(name: &str) -> String {
        std::fs::read_to_string(format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name))
            .unwrap()
    }

    fn iot() -> (Domain, Problem) {
        (
            parse_domain_text(&fixture("iot_domain.shop")).unwrap(),
            parse_problem_text(&fixture("iot_problem.shop")).unwrap(),
        )
    }

    #[test]
    fn unify_binds_variable_to_symbol() {
        let a = Atom::new("p", vec![Term::var("x")]);
        let b = Atom::ground("p", &["A"]);
        let s = unify(&a, &b, &Substitution::default()).unwrap();
        assert_eq!(s.resolve(&Term::var("x")), Term::sym("A"));
    }

    #[test]
    fn unify_fails_on_clash_through_shared_variable() {
        let a = Atom::new("p", vec![Term::var("x"), Term::var("x")]);
        let b = Atom::ground("p", &["A", "B"]);
        assert!(unify(&a, &b, &Substitution::default()).is_none());
    }

    #[test]
    fn unify_resource_pattern_against_state_atom() {
        let pattern = Atom::new(
            "hasResources",
            vec![Term::var("t"), Term::sym("Sensor"), Term::var("s")],
        );
        let fact = Atom::ground("hasResources", &["SemanticWebThing_2341", "Sensor", "DS18B20"]);
        let s = unify(&pattern, &fact, &Substitution::default()).unwrap();
        assert_eq!(s.resolve(&Term::var("t")), Term::sym("SemanticWebThing_2341"));
        assert_eq!(s.resolve(&Term::var("s")), Term::sym("DS18B20"));
    }

    #[test]
    fn satisfy_empty_conjunction_returns_input() {
        let state = State::default();
        let s = Substitution::default();
        let out = satisfy(&state, &[], &[], &s, 8);
        assert_eq!(out.substitutions, vec![s]);
        assert!(!out.truncated);
    }

    #[test]
    fn satisfy_absent_conjunct_yields_nothing() {
        let state = State::from_atoms([Atom::ground("p", &["a"])]);
        let out = satisfy(&state, &[], &[Atom::ground("q", &["a"])], &Substitution::default(), 8);
        assert!(out.substitutions.is_empty());
        assert!(!out.truncated);
    }

    #[test]
    fn satisfy_operator_precondition_has_unique_satisfier() {
        let (domain, problem) = iot();
        let state = State::from_atoms(problem.initial_state.iter().cloned());
        let op = &domain.operators[0];
        let mut seed = Substitution::default();
        seed.bind("sensor", Term::sym("DS18B20"));
        seed.bind("actuator", Term::sym("long_LED"));
        let out = satisfy(&state, &domain.axioms, &op.precond, &seed, 64);
        assert_eq!(out.substitutions.len(), 1);
        let s = &out.substitutions[0];
        assert_eq!(s.resolve(&Term::var("thingId1")), Term::sym("SemanticWebThing_2341"));
        assert_eq!(s.resolve(&Term::var("thingId2")), Term::sym("SemanticWebThing_1234"));
    }

    #[test]
    fn satisfy_enumerates_axiom_tails_in_order() {
        let domain = parse_domain_text(
            "(defdomain d ((:- (reachable ?x ?y) ((edge ?x ?y)) ((edge ?x ?z) (reachable ?z ?y)))))",
        )
        .unwrap();
        let state = State::from_atoms([
            Atom::ground("edge", &["a", "b"]),
            Atom::ground("edge", &["b", "c"]),
        ]);
        let goal = Atom::new("reachable", vec![Term::sym("a"), Term::var("w")]);
        let out = satisfy(&state, &domain.axioms, &[goal], &Substitution::default(), 16);
        let found: Vec<Term> = out
            .substitutions
            .iter()
            .map(|s| s.resolve(&Term::var("w")))
            .collect();
        assert_eq!(found, vec![Term::sym("b"), Term::sym("c")]);
        assert!(!out.truncated);
    }

    #[test]
    fn satisfy_flags_axiom_depth_exhaustion() {
        let domain = parse_domain_text("(defdomain d ((:- (p ?x) ((p ?x)))))").unwrap();
        let goal = Atom::new("p", vec![Term::var("x")]);
        let out = satisfy(&State::default(), &domain.axioms, &[goal], &Substitution::default(), 4);
        assert!(out.substitutions.is_empty());
        assert!(out.truncated);
    }

    #[test]
    fn apply_operator_adds_connection_atom() {
        let (domain, problem) = iot();
        let state = State::from_atoms(problem.initial_state.iter().cloned());
        let op = &domain.operators[0];
        let mut s = Substitution::default();
        s.bind("sensor", Term::sym("DS18B20"));
        s.bind("actuator", Term::sym("long_LED"));
        s.bind("thingId1", Term::sym("SemanticWebThing_2341"));
        s.bind("thingId2", Term::sym("SemanticWebThing_1234"));
        let next = apply_operator(&state, op, &s).unwrap();
        assert_eq!(next.len(), state.len() + 1);
        assert!(next.contains(&Atom::ground(
            "sensorCanConnectToActuator",
            &["DS18B20", "long_LED"]
        )));
    }

    #[test]
    fn apply_operator_with_empty_effects_is_identity() {
        let state = State::from_atoms([Atom::ground("p", &["a"])]);
        let op = OperatorDef {
            head: Atom::ground("!noop", &[]),
            precond: vec![],
            delete_list: vec![],
            add_list: vec![],
            cost: 1.0,
        };
        assert_eq!(apply_operator(&state, &op, &Substitution::default()).unwrap(), state);
    }

    #[test]
    fn deleting_an_absent_atom_is_a_noop() {
        let state = State::from_atoms([Atom::ground("p", &["a"])]);
        let op = OperatorDef {
            head: Atom::ground("!drop", &[]),
            precond: vec![],
            delete_list: vec![Atom::ground("q", &["b"])],
            add_list: vec![],
            cost: 1.0,
        };
        assert_eq!(apply_operator(&state, &op, &Substitution::default()).unwrap(), state);
    }

    #[test]
    fn iot_problem_has_exactly_one_plan() {
        let (domain, problem) = iot();
        let outcome = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        assert!(!outcome.truncated);
        assert_eq!(outcome.plans.len(), 1);
        let plan = &outcome.plans[0];
        assert_eq!(
            plan.steps,
            vec![Atom::ground("!checkSensorActuator", &["DS18B20", "long_LED"])]
        );
        assert_eq!(plan.total_cost, 1.0);
    }

    #[test]
    fn empty_task_list_gives_one_empty_plan() {
        let (domain, mut problem) = iot();
        problem.task_list.clear();
        let outcome = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        assert_eq!(outcome.plans, vec![Plan { steps: vec![], total_cost: 0.0 }]);
    }

    #[test]
    fn unsatisfiable_task_gives_no_plan() {
        let (domain, mut problem) = iot();
        problem.task_list = vec![Atom::ground("composeIoTServices", &["DS18B20", "nosuch"])];
        let outcome = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        assert!(outcome.plans.is_empty());
        assert!(!outcome.truncated);
        assert!(!outcome.is_inconclusive() || outcome.truncated);
    }

    #[test]
    fn domain_mismatch_is_an_error() {
        let (domain, mut problem) = iot();
        problem.domain_name = "other".into();
        assert!(matches!(
            find_plans(&domain, &problem, SearchLimits::default()),
            Err(PlanError::DomainMismatch { .. })
        ));
    }

    #[test]
    fn recursive_method_without_base_case_truncates() {
        let domain = parse_domain_text(
            "(defdomain d ((:method (loop) () ((loop)))))",
        )
        .unwrap();
        let problem = parse_problem_text("(defproblem p d () ((loop)))").unwrap();
        let outcome =
            find_plans(&domain, &problem, SearchLimits { max_depth: 16, max_plans: 4 }).unwrap();
        assert!(outcome.plans.is_empty());
        assert!(outcome.truncated);
        assert!(outcome.is_inconclusive());
    }

    #[test]
    fn replay_reaches_connected_state() {
        let (domain, problem) = iot();
        let outcome = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        let final_state = replay(&domain, &problem, &outcome.plans[0]).unwrap();
        assert!(final_state.contains(&Atom::ground(
            "sensorCanConnectToActuator",
            &["DS18B20", "long_LED"]
        )));
    }

    #[test]
    fn single_fixture_plan_scores_four_with_default_weights() {
        let (domain, problem) = iot();
        let outcome = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        let ranked = rank_plans(&outcome.plans, &problem, RankWeights::default());
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].score, 4.0);
        assert_eq!(ranked[0].score_breakdown["security"], 4.0);
        assert_eq!(ranked[0].score_breakdown["protocol"], 0.0);
    }

    #[test]
    fn fewer_security_problems_rank_first() {
        let (domain, mut problem) = iot();
        // a second actuator with no recorded security problems
        problem.initial_state.extend([
            Atom::ground("SemanticWebThing", &["SemanticWebThing_9"]),
            Atom::ground("hasResources", &["SemanticWebThing_9", "Actuator", "clean_LED"]),
            Atom::ground("supportsProtocol", &["SemanticWebThing_9", "WiFi"]),
        ]);
        let plan_for = |actuator: &str| Plan {
            steps: vec![Atom::ground("!checkSensorActuator", &["DS18B20", actuator])],
            total_cost: 1.0,
        };
        let plans = vec![plan_for("long_LED"), plan_for("clean_LED")];
        let ranked = rank_plans(&plans, &problem, RankWeights::default());
        assert_eq!(ranked[0].plan.steps[0].args[1], Term::sym("clean_LED"));
        assert!(ranked[0].score < ranked[1].score);
        let _ = domain;
    }

    #[test]
    fn ranking_empty_plan_list_is_empty() {
        let (_, problem) = iot();
        assert!(rank_plans(&[], &problem, RankWeights::default()).is_empty());
    }

    #[test]
    fn unshared_protocols_cost_one_per_pair() {
        let (_, mut problem) = iot();
        // strip the actuator thing's WiFi so the pair shares nothing
        problem
            .initial_state
            .retain(|a| a != &Atom::ground("supportsProtocol", &["SemanticWebThing_1234", "WiFi"]));
        let plan = Plan {
            steps: vec![Atom::ground("!checkSensorActuator", &["DS18B20", "long_LED"])],
            total_cost: 1.0,
        };
        let ranked = rank_plans(std::slice::from_ref(&plan), &problem, RankWeights::default());
        assert_eq!(ranked[0].score_breakdown["protocol"], 1.0);
        assert_eq!(ranked[0].score, 5.0);
    }

    #[test]
    fn search_is_deterministic() {
        let (domain, problem) = iot();
        let a = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        let b = find_plans(&domain, &problem, SearchLimits::default()).unwrap();
        assert_eq!(a, b);
    }
}
