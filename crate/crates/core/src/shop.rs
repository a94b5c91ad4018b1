//! Planner file formats: s-expression domains, problems, and plans.
//!
//! The accepted grammar is the total-order subset used by SHOP-family
//! planners: `defdomain` with `:method` / `:operator` / `:-` items, and
//! `defproblem` with an initial state and a ground task list. Line comments
//! start with `;`. Symbols are case-sensitive.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::json::format_f64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShopError {
    #[error("unbalanced ')' at line {line}, column {column}")]
    UnbalancedClose { line: usize, column: usize },
    #[error("unclosed '(' opened at line {line}, column {column}")]
    UnclosedOpen { line: usize, column: usize },
    #[error("{context}: {message}")]
    Shape { context: String, message: String },
    #[error("variable ?{var} not allowed in {context}")]
    VariableInGround { var: String, context: String },
    #[error("operator head '{head}' must start with '!'")]
    OperatorHeadMarker { head: String },
    #[error("duplicate operator '{head}/{arity}'")]
    DuplicateOperator { head: String, arity: usize },
    #[error("head symbol '{head}' is used by more than one of method/operator/axiom")]
    NamespaceClash { head: String },
}

fn shape(context: impl Into<String>, message: impl Into<String>) -> ShopError {
    ShopError::Shape { context: context.into(), message: message.into() }
}

// ---------------------------------------------------------------------------
// terms and atoms

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// `?name`, stored without the marker.
    Variable(String),
    Symbol(String),
}

impl Term {
    pub fn sym(s: impl Into<String>) -> Term {
        Term::Symbol(s.into())
    }

    pub fn var(s: impl Into<String>) -> Term {
        Term::Variable(s.into())
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Variable(name) => write!(f, "?{}", name),
            Term::Symbol(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub head: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(head: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { head: head.into(), args }
    }

    /// Ground atom over plain symbols.
    pub fn ground(head: impl Into<String>, args: &[&str]) -> Atom {
        Atom { head: head.into(), args: args.iter().map(|a| Term::sym(*a)).collect() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }

    pub fn is_primitive(&self) -> bool {
        self.head.starts_with('!')
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(name) => Some(name.as_str()),
            Term::Symbol(_) => None,
        })
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.head)?;
        for arg in &self.args {
            write!(f, " {}", arg)?;
        }
        f.write_str(")")
    }
}

// ---------------------------------------------------------------------------
// domain / problem / plan

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorDef {
    pub head: Atom,
    pub precond: Vec<Atom>,
    pub delete_list: Vec<Atom>,
    pub add_list: Vec<Atom>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodBranch {
    pub precond: Vec<Atom>,
    pub subtasks: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDef {
    pub head: Atom,
    pub branches: Vec<MethodBranch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomDef {
    pub head: Atom,
    pub tails: Vec<Vec<Atom>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Domain {
    pub name: String,
    pub methods: Vec<MethodDef>,
    pub operators: Vec<OperatorDef>,
    pub axioms: Vec<AxiomDef>,
}

impl Domain {
    pub fn operators_named<'a>(
        &'a self,
        head: &'a str,
        arity: usize,
    ) -> impl Iterator<Item = &'a OperatorDef> + 'a {
        self.operators
            .iter()
            .filter(move |op| op.head.head == head && op.head.arity() == arity)
    }

    pub fn methods_named<'a>(
        &'a self,
        head: &'a str,
        arity: usize,
    ) -> impl Iterator<Item = &'a MethodDef> + 'a {
        self.methods
            .iter()
            .filter(move |m| m.head.head == head && m.head.arity() == arity)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Problem {
    pub name: String,
    pub domain_name: String,
    pub initial_state: Vec<Atom>,
    pub task_list: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub steps: Vec<Atom>,
    pub total_cost: f64,
}

// ---------------------------------------------------------------------------
// reader

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Sym(String),
    List(Vec<SExpr>),
}

impl SExpr {
    fn as_sym(&self) -> Option<&str> {
        match self {
            SExpr::Sym(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items) => Some(items),
            SExpr::Sym(_) => None,
        }
    }
}

/// Reads zero or more top-level s-expressions.
pub fn read_sexprs(text: &str) -> Result<Vec<SExpr>, ShopError> {
    let mut stack: Vec<(Vec<SExpr>, usize, usize)> = Vec::new();
    let mut top = Vec::new();
    let mut line = 1usize;
    let mut column = 0usize;
    let mut chars = text.chars().peekable();

    let push = |stack: &mut Vec<(Vec<SExpr>, usize, usize)>,
                top: &mut Vec<SExpr>,
                expr: SExpr| {
        match stack.last_mut() {
            Some((items, _, _)) => items.push(expr),
            None => top.push(expr),
        }
    };

    while let Some(c) = chars.next() {
        if c == '\n' {
            line += 1;
            column = 0;
            continue;
        }
        column += 1;
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        column = 0;
                        break;
                    }
                }
            }
            '(' => stack.push((Vec::new(), line, column)),
            ')' => match stack.pop() {
                Some((items, _, _)) => push(&mut stack, &mut top, SExpr::List(items)),
                None => return Err(ShopError::UnbalancedClose { line, column }),
            },
            c if c.is_whitespace() => {}
            c => {
                let mut word = String::new();
                word.push(c);
                while let Some(&next) = chars.peek() {
                    if next.is_whitespace() || next == '(' || next == ')' || next == ';' {
                        break;
                    }
                    word.push(next);
                    chars.next();
                    column += 1;
                }
                push(&mut stack, &mut top, SExpr::Sym(word));
            }
        }
    }
    if let Some((_, line, column)) = stack.pop() {
        return Err(ShopError::UnclosedOpen { line, column });
    }
    Ok(top)
}

fn read_single(text: &str, what: &str) -> Result<SExpr, ShopError> {
    let mut forms = read_sexprs(text)?;
    match forms.len() {
        1 => Ok(forms.remove(0)),
        0 => Err(shape(what, "empty input")),
        n => Err(shape(what, format!("expected one top-level form, found {}", n))),
    }
}

// ---------------------------------------------------------------------------
// structure parsers

fn parse_term(expr: &SExpr, context: &str) -> Result<Term, ShopError> {
    match expr {
        SExpr::Sym(word) => {
            if let Some(name) = word.strip_prefix('?') {
                if name.is_empty() {
                    return Err(shape(context, "empty variable name"));
                }
                Ok(Term::Variable(name.to_string()))
            } else {
                Ok(Term::Symbol(word.clone()))
            }
        }
        SExpr::List(_) => Err(shape(context, "nested list where a term was expected")),
    }
}

fn parse_atom(expr: &SExpr, context: &str) -> Result<Atom, ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape(context, "expected an atom list"))?;
    let head = items
        .first()
        .and_then(SExpr::as_sym)
        .ok_or_else(|| shape(context, "atom must start with a head symbol"))?;
    if head.starts_with('?') {
        return Err(shape(context, "atom head cannot be a variable"));
    }
    let args = items[1..]
        .iter()
        .map(|item| parse_term(item, context))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(head, args))
}

/// A conjunction is `()` or `((a ...) (b ...))`; a bare `(p x)` whose first
/// element is a symbol is accepted as a one-atom conjunction.
fn parse_conjunction(expr: &SExpr, context: &str) -> Result<Vec<Atom>, ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape(context, "expected a conjunction list"))?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if items[0].as_sym().is_some() {
        return Ok(vec![parse_atom(expr, context)?]);
    }
    items.iter().map(|item| parse_atom(item, context)).collect()
}

pub fn parse_domain(expr: &SExpr) -> Result<Domain, ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape("defdomain", "expected a list"))?;
    match items {
        [SExpr::Sym(kw), SExpr::Sym(name), SExpr::List(body)] if kw == "defdomain" => {
            let mut domain = Domain { name: name.clone(), ..Domain::default() };
            for item in body {
                parse_domain_item(item, &mut domain)?;
            }
            check_domain_invariants(&domain)?;
            Ok(domain)
        }
        _ => Err(shape("defdomain", "expected (defdomain <name> (<items...>))")),
    }
}

pub fn parse_domain_text(text: &str) -> Result<Domain, ShopError> {
    parse_domain(&read_single(text, "defdomain")?)
}

fn parse_domain_item(expr: &SExpr, domain: &mut Domain) -> Result<(), ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape("domain item", "expected a list"))?;
    let kw = items
        .first()
        .and_then(SExpr::as_sym)
        .ok_or_else(|| shape("domain item", "expected :method, :operator, or :-"))?;
    match kw {
        ":method" => {
            let head = parse_atom(
                items.get(1).ok_or_else(|| shape(":method", "missing head"))?,
                ":method head",
            )?;
            let branches = parse_branches(&items[2..], ":method", |precond, subtasks| {
                MethodBranch { precond, subtasks }
            })?;
            if branches.is_empty() {
                return Err(shape(":method", "at least one (precond tasks) branch required"));
            }
            domain.methods.push(MethodDef { head, branches });
        }
        ":operator" => {
            if items.len() < 5 || items.len() > 6 {
                return Err(shape(
                    ":operator",
                    "expected (:operator head precond delete add [cost])",
                ));
            }
            let head = parse_atom(&items[1], ":operator head")?;
            if !head.head.starts_with('!') {
                return Err(ShopError::OperatorHeadMarker { head: head.head });
            }
            let precond = parse_conjunction(&items[2], ":operator precondition")?;
            let delete_list = parse_conjunction(&items[3], ":operator delete list")?;
            let add_list = parse_conjunction(&items[4], ":operator add list")?;
            let cost = match items.get(5) {
                Some(SExpr::Sym(word)) => word
                    .parse::<f64>()
                    .map_err(|_| shape(":operator", format!("invalid cost '{}'", word)))?,
                Some(SExpr::List(_)) => return Err(shape(":operator", "cost must be a number")),
                None => 1.0,
            };
            let declared: BTreeSet<&str> =
                head.variables().chain(precond.iter().flat_map(Atom::variables)).collect();
            for atom in delete_list.iter().chain(add_list.iter()) {
                for var in atom.variables() {
                    if !declared.contains(var) {
                        return Err(shape(
                            ":operator",
                            format!("effect variable ?{} not bound by head or precondition", var),
                        ));
                    }
                }
            }
            domain.operators.push(OperatorDef { head, precond, delete_list, add_list, cost });
        }
        ":-" => {
            let head = parse_atom(
                items.get(1).ok_or_else(|| shape(":- axiom", "missing head"))?,
                ":- axiom head",
            )?;
            let mut tails = Vec::new();
            for item in &items[2..] {
                if item.as_sym().is_some() {
                    continue; // branch label, accepted and discarded
                }
                tails.push(parse_conjunction(item, ":- axiom tail")?);
            }
            if tails.is_empty() {
                return Err(shape(":- axiom", "at least one tail required"));
            }
            domain.axioms.push(AxiomDef { head, tails });
        }
        other => {
            return Err(shape("domain item", format!("unknown item keyword '{}'", other)));
        }
    }
    Ok(())
}

/// Branch sequences are `[label] precond tasks` repeated; labels are bare
/// symbols and are discarded.
fn parse_branches<B>(
    items: &[SExpr],
    context: &str,
    build: impl Fn(Vec<Atom>, Vec<Atom>) -> B,
) -> Result<Vec<B>, ShopError> {
    let mut branches = Vec::new();
    let mut i = 0;
    while i < items.len() {
        if items[i].as_sym().is_some() {
            i += 1; // label
            if i >= items.len() || items[i].as_sym().is_some() {
                return Err(shape(context, "label must be followed by a precondition list"));
            }
        }
        let precond = parse_conjunction(&items[i], &format!("{} precondition", context))?;
        let tasks_expr = items
            .get(i + 1)
            .ok_or_else(|| shape(context, "branch missing its task list"))?;
        if tasks_expr.as_sym().is_some() {
            return Err(shape(context, "branch missing its task list"));
        }
        let subtasks = parse_task_list(tasks_expr, &format!("{} task list", context))?;
        branches.push(build(precond, subtasks));
        i += 2;
    }
    Ok(branches)
}

fn parse_task_list(expr: &SExpr, context: &str) -> Result<Vec<Atom>, ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape(context, "expected a task list"))?;
    if items.is_empty() {
        return Ok(Vec::new());
    }
    if items[0].as_sym().is_some() {
        return Ok(vec![parse_atom(expr, context)?]);
    }
    items.iter().map(|item| parse_atom(item, context)).collect()
}

fn check_domain_invariants(domain: &Domain) -> Result<(), ShopError> {
    let mut op_sigs = BTreeSet::new();
    for op in &domain.operators {
        if !op_sigs.insert((op.head.head.clone(), op.head.arity())) {
            return Err(ShopError::DuplicateOperator {
                head: op.head.head.clone(),
                arity: op.head.arity(),
            });
        }
    }
    let methods: BTreeSet<&str> = domain.methods.iter().map(|m| m.head.head.as_str()).collect();
    let operators: BTreeSet<&str> =
        domain.operators.iter().map(|o| o.head.head.as_str()).collect();
    let axioms: BTreeSet<&str> = domain.axioms.iter().map(|a| a.head.head.as_str()).collect();
    for head in methods.intersection(&operators).chain(
        methods
            .intersection(&axioms)
            .chain(operators.intersection(&axioms)),
    ) {
        return Err(ShopError::NamespaceClash { head: head.to_string() });
    }
    Ok(())
}

pub fn parse_problem(expr: &SExpr) -> Result<Problem, ShopError> {
    let items = expr
        .as_list()
        .ok_or_else(|| shape("defproblem", "expected a list"))?;
    match items {
        [SExpr::Sym(kw), SExpr::Sym(name), SExpr::Sym(domain_name), state, tasks]
            if kw == "defproblem" =>
        {
            let initial_state = parse_conjunction(state, "problem state")?;
            let task_list = parse_task_list(tasks, "problem task list")?;
            for atom in &initial_state {
                if let Some(var) = atom.variables().next() {
                    return Err(ShopError::VariableInGround {
                        var: var.to_string(),
                        context: "the initial state".to_string(),
                    });
                }
            }
            for atom in &task_list {
                if let Some(var) = atom.variables().next() {
                    return Err(ShopError::VariableInGround {
                        var: var.to_string(),
                        context: "the task list".to_string(),
                    });
                }
            }
            Ok(Problem {
                name: name.clone(),
                domain_name: domain_name.clone(),
                initial_state,
                task_list,
            })
        }
        _ => Err(shape(
            "defproblem",
            "expected (defproblem <name> <domain> (<state...>) (<tasks...>))",
        )),
    }
}

pub fn parse_problem_text(text: &str) -> Result<Problem, ShopError> {
    parse_problem(&read_single(text, "defproblem")?)
}

// ---------------------------------------------------------------------------
// printers

fn write_conjunction(out: &mut String, atoms: &[Atom]) {
    out.push('(');
    for (i, atom) in atoms.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&atom.to_string());
    }
    out.push(')');
}

pub fn print_domain(domain: &Domain) -> String {
    let mut out = String::new();
    out.push_str(&format!("(defdomain {} (\n", domain.name));
    for method in &domain.methods {
        out.push_str(&format!("  (:method {}\n", method.head));
        for branch in &method.branches {
            out.push_str("    ");
            write_conjunction(&mut out, &branch.precond);
            out.push('\n');
            out.push_str("    ");
            write_conjunction(&mut out, &branch.subtasks);
            out.push('\n');
        }
        out.push_str("  )\n");
    }
    for op in &domain.operators {
        out.push_str(&format!("  (:operator {}\n", op.head));
        out.push_str("    ");
        write_conjunction(&mut out, &op.precond);
        out.push('\n');
        out.push_str("    ");
        write_conjunction(&mut out, &op.delete_list);
        out.push('\n');
        out.push_str("    ");
        write_conjunction(&mut out, &op.add_list);
        if op.cost != 1.0 {
            out.push_str(&format!("\n    {}", format_f64(op.cost)));
        }
        out.push_str("\n  )\n");
    }
    for axiom in &domain.axioms {
        out.push_str(&format!("  (:- {}\n", axiom.head));
        for tail in &axiom.tails {
            out.push_str("    ");
            write_conjunction(&mut out, tail);
            out.push('\n');
        }
        out.push_str("  )\n");
    }
    out.push_str("))\n");
    out
}

pub fn print_problem(problem: &Problem) -> String {
    let mut out = String::new();
    out.push_str(&format!("(defproblem {} {}\n", problem.name, problem.domain_name));
    out.push_str(" (\n");
    for atom in &problem.initial_state {
        out.push_str(&format!("  {}\n", atom));
    }
    out.push_str(" )\n (");
    for (i, task) in problem.task_list.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&task.to_string());
    }
    out.push_str(")\n)\n");
    out
}

pub fn print_plan(plan: &Plan) -> String {
    let mut out = String::new();
    if plan.steps.is_empty() {
        out.push_str("()\n");
    } else {
        out.push_str("(\n");
        for step in &plan.steps {
            out.push_str(&format!("  {}\n", step));
        }
        out.push_str(")\n");
    }
    out.push_str(&format!("; cost {}\n", format_f64(plan.total_cost)));
    out
}

/// Plan as JSON: `{"steps": [[head, args...], ...], "cost": n}`.
pub fn plan_to_json(plan: &Plan) -> serde_json::Value {
    let steps: Vec<Vec<String>> = plan
        .steps
        .iter()
        .map(|step| {
            std::iter::once(step.head.clone())
                .chain(step.args.iter().map(|arg| arg.to_string()))
                .collect()
        })
        .collect();
    serde_json::json!({ "steps": steps, "cost": plan.total_cost })
}
