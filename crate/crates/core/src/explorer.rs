//! On-the-fly exploration of the synchronized product.
//!
//! Symbolic states pair a location vector with a zone. Successors are
//! computed per label by delaying, intersecting with the source invariants
//! and the guards of one transition per participating automaton, resetting,
//! intersecting with the target invariants and extrapolating.

use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use crate::model::sim::{transition_choices, TraceStep};
use crate::model::{max_constants, ClockConstraint, ClockId, LabelId, LocationId, Network};
use crate::parser::{Query, StatePattern};
use crate::zone::ZoneBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Last in, first out.
    Dfs,
    /// First in, first out.
    Bfs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsumption {
    /// A successor is old if an equivalent zone was stored at its locations.
    Equal,
    /// A successor is old if some stored zone at its locations contains it.
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub order: Order,
    pub subsumption: Subsumption,
    pub extrapolate: bool,
    pub max_zones: Option<usize>,
    pub timeout: Option<Duration>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            order: Order::Dfs,
            subsumption: Subsumption::Include,
            extrapolate: true,
            max_zones: None,
            timeout: None,
        }
    }
}

impl Options {
    /// Equality-based visited test and no extrapolation, as in the original
    /// rewrite-rule formulation.
    pub fn faithful() -> Self {
        Options {
            subsumption: Subsumption::Equal,
            extrapolate: false,
            ..Options::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateZone<Z> {
    pub locations: Vec<LocationId>,
    pub zone: Z,
}

/// A successor along with the label and transitions producing it.
#[derive(Debug, Clone)]
pub struct Successor<Z> {
    pub label: LabelId,
    /// `(automaton, transition)` for every participant, in automaton order.
    pub choice: Vec<(usize, usize)>,
    pub state: StateZone<Z>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Limit {
    Zones(usize),
    Time(Duration),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verdict {
    True,
    False,
    Inconclusive(Limit),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub stored: usize,
    pub popped: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Steps from the source to the goal; present exactly when the verdict
    /// is `True`.
    pub witness: Option<Vec<TraceStep>>,
    pub stats: Stats,
}

/// Reachability checking over one network with one zone backend.
pub struct Explorer<'a, B: ZoneBackend> {
    net: &'a Network,
    backend: B,
    options: Options,
    k: Vec<i64>,
}

struct Node<Z> {
    state: StateZone<Z>,
    parent: Option<(usize, LabelId)>,
}

/// Stored states, indexed by location vector and, where the backend offers
/// one, by zone fingerprint.
struct Visited<'b, B: ZoneBackend> {
    backend: &'b B,
    nodes: Vec<Node<B::Zone>>,
    by_locations: HashMap<Vec<LocationId>, Vec<usize>>,
    by_fingerprint: HashMap<(Vec<LocationId>, u64), Vec<usize>>,
}

impl<'b, B: ZoneBackend> Visited<'b, B> {
    fn new(backend: &'b B) -> Self {
        Visited {
            backend,
            nodes: Vec::new(),
            by_locations: HashMap::new(),
            by_fingerprint: HashMap::new(),
        }
    }

    fn store(&mut self, node: Node<B::Zone>) -> usize {
        let id = self.nodes.len();
        let locs = node.state.locations.clone();
        if let Some(h) = self.backend.fingerprint(&node.state.zone) {
            self.by_fingerprint
                .entry((locs.clone(), h))
                .or_default()
                .push(id);
        }
        self.by_locations.entry(locs).or_default().push(id);
        self.nodes.push(node);
        id
    }

    fn contains(&self, sz: &StateZone<B::Zone>, mode: Subsumption) -> bool {
        let b = self.backend;
        let zone = |i: &usize| &self.nodes[*i].state.zone;
        match mode {
            Subsumption::Equal => {
                let candidates = match b.fingerprint(&sz.zone) {
                    Some(h) => self.by_fingerprint.get(&(sz.locations.clone(), h)),
                    None => self.by_locations.get(&sz.locations),
                };
                candidates.is_some_and(|ids| ids.iter().any(|i| b.is_equivalent(zone(i), &sz.zone)))
            }
            Subsumption::Include => self
                .by_locations
                .get(&sz.locations)
                .is_some_and(|ids| ids.iter().any(|i| b.includes(zone(i), &sz.zone))),
        }
    }
}

impl<'a, B: ZoneBackend> Explorer<'a, B> {
    /// `query` contributes its constants to the extrapolation bounds.
    pub fn new(net: &'a Network, backend: B, options: Options, query: &Query) -> Self {
        let k = max_constants(net, [&query.source.constraint, &query.target.constraint]);
        Explorer {
            net,
            backend,
            options,
            k,
        }
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn max_constants(&self) -> &[i64] {
        &self.k
    }

    fn invariant_zone(&self, locs: &[LocationId]) -> B::Zone {
        self.backend.from_constraint(&self.net.invariant_of(locs))
    }

    /// Source zone intersected with the invariants of its locations, or
    /// `None` when that is empty.
    pub fn init_zone(&self, source: &StatePattern) -> Option<StateZone<B::Zone>> {
        let b = &self.backend;
        let z = b.intersect(
            &b.from_constraint(&source.constraint),
            &self.invariant_zone(&source.locations),
        );
        (!b.is_empty(&z)).then(|| StateZone {
            locations: source.locations.clone(),
            zone: z,
        })
    }

    pub fn is_goal(&self, sz: &StateZone<B::Zone>, target: &StatePattern) -> bool {
        let b = &self.backend;
        sz.locations == target.locations
            && !b.is_empty(&b.intersect(&sz.zone, &b.from_constraint(&target.constraint)))
    }

    /// Successors in label declaration order, then transition order.
    pub fn successors(&self, sz: &StateZone<B::Zone>) -> Vec<Successor<B::Zone>> {
        let b = &self.backend;
        let net = self.net;
        let delayed = b.intersect(&b.elapse(&sz.zone), &self.invariant_zone(&sz.locations));
        let mut out = Vec::new();
        if b.is_empty(&delayed) {
            return out;
        }
        for label in (0..net.labels.len()).map(LabelId::from) {
            for choice in transition_choices(net, &sz.locations, label) {
                let mut guard = ClockConstraint::truth();
                let mut resets: Vec<ClockId> = Vec::new();
                let mut locations = sz.locations.clone();
                for &(ai, ti) in &choice {
                    let t = &net.automata[ai].transitions[ti];
                    guard = guard.and(&t.guard);
                    resets.extend(&t.resets);
                    locations[ai] = t.target;
                }
                let z = b.intersect(&delayed, &b.from_constraint(&guard));
                if b.is_empty(&z) {
                    continue;
                }
                let z = b.intersect(&b.reset(&z, &resets), &self.invariant_zone(&locations));
                if b.is_empty(&z) {
                    continue;
                }
                let zone = if self.options.extrapolate {
                    b.extrapolate(&z, &self.k)
                } else {
                    z
                };
                out.push(Successor {
                    label,
                    choice,
                    state: StateZone { locations, zone },
                });
            }
        }
        out
    }

    pub fn explore(&self, query: &Query) -> Outcome {
        let start = Instant::now();
        let mut stats = Stats::default();
        let finish = |verdict, witness, mut stats: Stats| {
            stats.elapsed = start.elapsed();
            Outcome {
                verdict,
                witness,
                stats,
            }
        };
        let Some(init) = self.init_zone(&query.source) else {
            return finish(Verdict::False, None, stats);
        };
        if self.is_goal(&init, &query.target) {
            stats.stored = 1;
            return finish(Verdict::True, Some(Vec::new()), stats);
        }

        let mut graph = Visited::new(&self.backend);
        let mut frontier: VecDeque<usize> = VecDeque::new();
        let root = graph.store(Node {
            state: init,
            parent: None,
        });
        frontier.push_back(root);
        while let Some(id) = match self.options.order {
            Order::Dfs => frontier.pop_back(),
            Order::Bfs => frontier.pop_front(),
        } {
            stats.popped += 1;
            if let Some(limit) = self.options.timeout {
                if start.elapsed() > limit {
                    stats.stored = graph.nodes.len();
                    return finish(Verdict::Inconclusive(Limit::Time(limit)), None, stats);
                }
            }
            for succ in self.successors(&graph.nodes[id].state) {
                if self.is_goal(&succ.state, &query.target) {
                    let mut witness = vec![TraceStep {
                        label: succ.label,
                        locations: succ.state.locations.clone(),
                    }];
                    let mut cur = id;
                    while let Some((parent, label)) = graph.nodes[cur].parent {
                        witness.push(TraceStep {
                            label,
                            locations: graph.nodes[cur].state.locations.clone(),
                        });
                        cur = parent;
                    }
                    witness.reverse();
                    stats.stored = graph.nodes.len();
                    return finish(Verdict::True, Some(witness), stats);
                }
                if graph.contains(&succ.state, self.options.subsumption) {
                    continue;
                }
                if let Some(max) = self.options.max_zones {
                    if graph.nodes.len() >= max {
                        stats.stored = graph.nodes.len();
                        return finish(Verdict::Inconclusive(Limit::Zones(max)), None, stats);
                    }
                }
                let next = graph.store(Node {
                    state: succ.state,
                    parent: Some((id, succ.label)),
                });
                frontier.push_back(next);
            }
        }
        stats.stored = graph.nodes.len();
        finish(Verdict::False, None, stats)
    }

    /// Replays a witness through [`Self::successors`]: each step must be
    /// produced by some successor of the previous state, and the last state
    /// must meet the target.
    pub fn replay(&self, query: &Query, witness: &[TraceStep]) -> bool {
        let Some(init) = self.init_zone(&query.source) else {
            return false;
        };
        // Several transition combinations may lead to the same locations, so
        // keep every matching state.
        let mut states = vec![init];
        for step in witness {
            states = states
                .iter()
                .flat_map(|s| self.successors(s))
                .filter(|s| s.label == step.label && s.state.locations == step.locations)
                .map(|s| s.state)
                .collect();
            if states.is_empty() {
                return false;
            }
        }
        states.iter().any(|s| self.is_goal(s, &query.target))
    }
}

/// Checks `query` with a fresh explorer.
pub fn check<B: ZoneBackend>(
    net: &Network,
    backend: B,
    options: Options,
    query: &Query,
) -> Outcome {
    Explorer::new(net, backend, options, query).explore(query)
}
