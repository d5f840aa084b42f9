//! The textual network format and the `go(...)` query syntax.
//!
//! ```text
//! specification train
//! Clocks X nil
//! States Far Near nil
//! Labels app nil
//! Automata
//!   ( Locations Far Near nil
//!     Labels app nil
//!     Invariants Far : true Near : X<=5 ^ true nil
//!     Transitions Far , app : true, X nil, Near . nil ) .
//!   nil
//! end
//! ```

mod grammar;
mod lexer;
mod print;

use std::collections::HashMap;
use std::fmt;

use num_rational::Rational64;

use crate::model::{
    self, Atom, Automaton, ClockConstraint, ClockId, LabelId, LocationId, Network, Op, Site,
    Transition,
};

use grammar::{Name, Parser, RawConstraint, RawEnd};

pub use print::{print_constraint, print_network, print_query};

/// Position in the source text; `line` and `col` are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.pos.line, self.pos.col, self.message)
    }
}

impl std::error::Error for Diagnostic {}

/// A location vector (one entry per automaton) with a clock constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePattern {
    pub locations: Vec<LocationId>,
    pub constraint: ClockConstraint,
}

/// `go(source, target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub source: StatePattern,
    pub target: StatePattern,
}

struct Resolver<'a, C> {
    net: &'a Network<C>,
    diags: Vec<Diagnostic>,
}

impl<C> Resolver<'_, C> {
    fn clock(&mut self, n: &Name) -> Option<ClockId> {
        let id = self.net.clock_id(&n.text);
        if id.is_none() {
            self.diags.push(Diagnostic::new(
                n.pos,
                format!("undeclared clock `{}`", n.text),
            ));
        }
        id
    }

    fn location(&mut self, n: &Name) -> Option<LocationId> {
        let id = self.net.location_id(&n.text);
        if id.is_none() {
            self.diags.push(Diagnostic::new(
                n.pos,
                format!("undeclared location `{}`", n.text),
            ));
        }
        id
    }

    fn label(&mut self, n: &Name) -> Option<LabelId> {
        let id = self.net.label_id(&n.text);
        if id.is_none() {
            self.diags.push(Diagnostic::new(
                n.pos,
                format!("undeclared label `{}`", n.text),
            ));
        }
        id
    }

    /// `X-Y` lexes as one identifier; when it is not a clock itself, it is
    /// read as a difference of two clocks split at a hyphen.
    fn split_difference(&self, n: &Name) -> Option<(ClockId, ClockId)> {
        n.text.match_indices('-').find_map(|(i, _)| {
            let lhs = self.net.clock_id(&n.text[..i])?;
            let rhs = self.net.clock_id(&n.text[i + 1..])?;
            Some((lhs, rhs))
        })
    }

    /// Resolves a constraint, expanding `=` into a `<=`/`>=` pair.
    fn constraint(&mut self, raw: &RawConstraint) -> Option<ClockConstraint<Rational64>> {
        let mut atoms = Vec::new();
        let mut ok = true;
        for a in &raw.atoms {
            let (lhs, rhs) = match &a.rhs {
                None if self.net.clock_id(&a.lhs.text).is_none() => {
                    match self.split_difference(&a.lhs) {
                        Some((l, r)) => (Some(l), Some(r)),
                        None => (self.clock(&a.lhs), None),
                    }
                }
                None => (self.clock(&a.lhs), None),
                Some(r) => (self.clock(&a.lhs), self.clock(r)),
            };
            let Some(lhs) = lhs else {
                ok = false;
                continue;
            };
            if a.rhs.is_some() && rhs.is_none() {
                ok = false;
                continue;
            }
            if rhs == Some(lhs) {
                self.diags
                    .push(Diagnostic::new(a.pos, "difference of a clock with itself"));
                ok = false;
                continue;
            }
            let make = |op| Atom {
                lhs,
                rhs,
                op,
                constant: a.constant,
            };
            match a.op {
                Op::Eq => atoms.extend([make(Op::Le), make(Op::Ge)]),
                op => atoms.push(make(op)),
            }
        }
        ok.then(|| ClockConstraint::new(atoms))
    }
}

fn names_of(list: &[Name]) -> Vec<String> {
    list.iter().map(|n| n.text.clone()).collect()
}

/// Parses, validates and scales a network description.
pub fn parse_spec(text: &str) -> Result<Network, Vec<Diagnostic>> {
    let tokens = lexer::tokenize(text).map_err(|d| vec![d])?;
    let mut parser = Parser::new(tokens);
    let raw = parser.spec().map_err(|d| vec![d])?;
    parser.finish().map_err(|d| vec![d])?;

    let mut net: Network<Rational64> = Network {
        name: raw.name.text.clone(),
        clocks: names_of(&raw.clocks),
        locations: names_of(&raw.states),
        labels: names_of(&raw.labels),
        automata: Vec::new(),
        scale: 1,
    };
    let mut sites: HashMap<Site, Pos> = HashMap::from([
        (Site::Clocks, raw.clocks_pos),
        (Site::States, raw.states_pos),
        (Site::Labels, raw.labels_pos),
    ]);
    let mut automata = Vec::new();
    let mut r = Resolver {
        net: &net,
        diags: Vec::new(),
    };
    for (ai, ra) in raw.automata.iter().enumerate() {
        sites.insert(Site::Automaton(ai), ra.pos);
        sites.insert(Site::AutomatonLocations(ai), ra.locations_pos);
        sites.insert(Site::AutomatonLabels(ai), ra.labels_pos);
        let locations = ra.locations.iter().filter_map(|n| r.location(n)).collect();
        let alphabet = ra.labels.iter().filter_map(|n| r.label(n)).collect();
        let mut invariants = Vec::new();
        for (ei, inv) in ra.invariants.iter().enumerate() {
            sites.insert(
                Site::Invariant {
                    automaton: ai,
                    entry: ei,
                },
                inv.location.pos,
            );
            let loc = r.location(&inv.location);
            let c = r.constraint(&inv.constraint);
            if let (Some(loc), Some(c)) = (loc, c) {
                invariants.push((loc, c));
            }
        }
        let mut transitions = Vec::new();
        for (ti, rt) in ra.transitions.iter().enumerate() {
            sites.insert(
                Site::Transition {
                    automaton: ai,
                    entry: ti,
                },
                rt.pos,
            );
            let source = r.location(&rt.source);
            let label = r.label(&rt.label);
            let guard = r.constraint(&rt.guard);
            let resets: Vec<Option<ClockId>> = rt.resets.iter().map(|n| r.clock(n)).collect();
            let target = r.location(&rt.target);
            if let (Some(source), Some(label), Some(guard), Some(target)) =
                (source, label, guard, target)
            {
                if let Some(resets) = resets.into_iter().collect::<Option<Vec<_>>>() {
                    transitions.push(Transition {
                        label,
                        source,
                        guard,
                        resets,
                        target,
                    });
                }
            }
        }
        automata.push(Automaton {
            locations,
            alphabet,
            invariants,
            transitions,
        });
    }
    let diags = r.diags;
    if !diags.is_empty() {
        return Err(diags);
    }
    net.automata = automata;
    let net = model::validate(net).map_err(|ds| {
        ds.into_iter()
            .map(|d| {
                let pos = sites.get(&d.site).copied().unwrap_or_default();
                Diagnostic::new(pos, d.message)
            })
            .collect::<Vec<_>>()
    })?;
    Ok(model::normalize_constants(net))
}

fn resolve_end(r: &mut Resolver<'_, i64>, end: &RawEnd) -> Option<StatePattern> {
    let net = r.net;
    if end.locations.len() != net.automata.len() {
        r.diags.push(Diagnostic::new(
            end.pos,
            format!(
                "location vector has {} entries but the network has {} automata",
                end.locations.len(),
                net.automata.len()
            ),
        ));
        return None;
    }
    let mut locations = Vec::new();
    for (i, n) in end.locations.iter().enumerate() {
        let loc = r.location(n)?;
        if !net.automata[i].owns(loc) {
            r.diags.push(Diagnostic::new(
                n.pos,
                format!(
                    "location `{}` does not belong to automaton {}",
                    n.text,
                    i + 1
                ),
            ));
            return None;
        }
        locations.push(loc);
    }
    let c = r.constraint(&end.constraint)?;
    let mut atoms = Vec::new();
    for (a, raw) in c
        .atoms
        .iter()
        .zip(end.constraint.atoms.iter().flat_map(|ra| {
            let n = if ra.op == Op::Eq { 2 } else { 1 };
            std::iter::repeat_n(ra, n)
        }))
    {
        match model::scale_constant(net.scale, a.constant) {
            Some(k) => atoms.push(Atom {
                lhs: a.lhs,
                rhs: a.rhs,
                op: a.op,
                constant: k,
            }),
            None => {
                r.diags.push(Diagnostic::new(
                    raw.pos,
                    format!(
                        "constant {} is finer than the network's resolution 1/{}",
                        model::format_decimal(a.constant),
                        net.scale
                    ),
                ));
                return None;
            }
        }
    }
    Some(StatePattern {
        locations,
        constraint: ClockConstraint::new(atoms),
    })
}

/// Parses `go(s/c, s'/c')` against a loaded network.
pub fn parse_query(text: &str, net: &Network) -> Result<Query, Vec<Diagnostic>> {
    let tokens = lexer::tokenize(text).map_err(|d| vec![d])?;
    let mut parser = Parser::new(tokens);
    let raw = parser.query().map_err(|d| vec![d])?;
    parser.finish().map_err(|d| vec![d])?;
    let mut r = Resolver {
        net,
        diags: Vec::new(),
    };
    let source = resolve_end(&mut r, &raw.source);
    let target = resolve_end(&mut r, &raw.target);
    match (source, target) {
        (Some(source), Some(target)) if r.diags.is_empty() => Ok(Query { source, target }),
        _ => Err(r.diags),
    }
}

/// Query file lines: one query per non-blank line, `//` comments skipped.
/// Returns `(line number, query text)` pairs.
pub fn query_lines(text: &str) -> Vec<(usize, String)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = match line.find("//") {
                Some(c) => &line[..c],
                None => line,
            };
            let line = line.trim();
            (!line.is_empty()).then(|| (i + 1, line.to_owned()))
        })
        .collect()
}
