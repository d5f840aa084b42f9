//! Concrete semantics over exact rational valuations.
//!
//! Nothing here touches zones; the explorer is checked against these
//! functions, so they must stay independent of it.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use super::{ClockConstraint, ClockId, LabelId, LocationId, Network};

/// Non-negative value for every clock, indexed by [`ClockId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockValuation(pub Vec<Rational64>);

impl ClockValuation {
    pub fn zero(clocks: usize) -> Self {
        ClockValuation(vec![Rational64::zero(); clocks])
    }

    pub fn get(&self, c: ClockId) -> Rational64 {
        self.0[c.index()]
    }

    pub fn shifted(&self, d: Rational64) -> Self {
        ClockValuation(self.0.iter().map(|v| v + d).collect())
    }

    pub fn satisfies(&self, c: &ClockConstraint) -> bool {
        c.holds(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("negative delay")]
    NegativeDelay,
    #[error("invariant of automaton {0} violated")]
    Invariant(usize),
    #[error("automaton {0} has no transition for the label")]
    MissingParticipant(usize),
    #[error("automaton {0} does not take part in the label")]
    NotParticipant(usize),
    #[error("transition of automaton {0} does not match the label or location")]
    BadChoice(usize),
    #[error("guard of automaton {0} not satisfied")]
    Guard(usize),
}

fn check_invariants(
    net: &Network,
    locs: &[LocationId],
    v: &ClockValuation,
) -> Result<(), Rejection> {
    for (i, (aut, loc)) in net.automata.iter().zip(locs).enumerate() {
        if let Some(inv) = aut.invariant(*loc) {
            if !v.satisfies(inv) {
                return Err(Rejection::Invariant(i));
            }
        }
    }
    Ok(())
}

/// Lets `d` time units elapse in `locs`.
///
/// Invariants are conjunctions of difference constraints and therefore
/// convex, so holding at both ends of the delay implies holding throughout.
pub fn sim_delay(
    net: &Network,
    locs: &[LocationId],
    v: &ClockValuation,
    d: Rational64,
) -> Result<ClockValuation, Rejection> {
    if d < Rational64::zero() {
        return Err(Rejection::NegativeDelay);
    }
    check_invariants(net, locs, v)?;
    let shifted = v.shifted(d);
    check_invariants(net, locs, &shifted)?;
    Ok(shifted)
}

/// Fires `label`. `choice` names, for every automaton whose alphabet holds
/// the label, the index of the transition it takes; any other automaton
/// stays put.
pub fn sim_action(
    net: &Network,
    locs: &[LocationId],
    v: &ClockValuation,
    label: LabelId,
    choice: &[(usize, usize)],
) -> Result<(Vec<LocationId>, ClockValuation), Rejection> {
    let mut next_locs = locs.to_vec();
    let mut next = v.clone();
    for (ai, aut) in net.automata.iter().enumerate() {
        let chosen = choice.iter().find(|(a, _)| *a == ai).map(|(_, t)| *t);
        match (aut.has_label(label), chosen) {
            (false, None) => {}
            (false, Some(_)) => return Err(Rejection::NotParticipant(ai)),
            (true, None) => return Err(Rejection::MissingParticipant(ai)),
            (true, Some(ti)) => {
                let tr = aut.transitions.get(ti).ok_or(Rejection::BadChoice(ai))?;
                if tr.label != label || tr.source != locs[ai] {
                    return Err(Rejection::BadChoice(ai));
                }
                if !v.satisfies(&tr.guard) {
                    return Err(Rejection::Guard(ai));
                }
                next_locs[ai] = tr.target;
            }
        }
    }
    for &(ai, ti) in choice {
        for r in &net.automata[ai].transitions[ti].resets {
            next.0[r.index()] = Rational64::zero();
        }
    }
    check_invariants(net, &next_locs, &next)?;
    Ok((next_locs, next))
}

/// Every way of picking one `label` transition in each participating
/// automaton, first automaton most significant.
pub fn transition_choices(
    net: &Network,
    locs: &[LocationId],
    label: LabelId,
) -> Vec<Vec<(usize, usize)>> {
    let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut any = false;
    for (ai, aut) in net.automata.iter().enumerate() {
        if !aut.has_label(label) {
            continue;
        }
        any = true;
        let options: Vec<usize> = aut
            .transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.label == label && t.source == locs[ai])
            .map(|(i, _)| i)
            .collect();
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                options.iter().map(move |&t| {
                    let mut c = prefix.clone();
                    c.push((ai, t));
                    c
                })
            })
            .collect();
    }
    if any {
        combos
    } else {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Total elapsed time budget, in the network's scaled units.
    pub horizon: Rational64,
    /// Every delay is a multiple of this.
    pub granularity: Rational64,
    /// Initial valuations are the grid points in `[0, seed_range]` per clock.
    pub seed_range: Rational64,
    pub max_states: usize,
}

impl OracleConfig {
    pub fn new(horizon: Rational64, granularity: Rational64) -> Self {
        OracleConfig {
            horizon,
            granularity,
            seed_range: Rational64::zero(),
            max_states: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle inconclusive: more than {0} concrete states")]
    Inconclusive(usize),
    #[error("granularity must be positive")]
    BadGranularity,
}

fn grid_seeds(
    net: &Network,
    locs: &[LocationId],
    constraint: &ClockConstraint,
    cfg: &OracleConfig,
) -> Result<Vec<ClockValuation>, OracleError> {
    if cfg.granularity <= Rational64::zero() {
        return Err(OracleError::BadGranularity);
    }
    let steps = (cfg.seed_range / cfg.granularity)
        .floor()
        .to_integer()
        .max(0);
    let n = net.clock_count();
    let mut seeds = Vec::new();
    let mut digits = vec![0i64; n];
    loop {
        let v = ClockValuation(
            digits
                .iter()
                .map(|d| Rational64::from_integer(*d) * cfg.granularity)
                .collect(),
        );
        if v.satisfies(constraint) && check_invariants(net, locs, &v).is_ok() {
            seeds.push(v);
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(seeds);
            }
            digits[i] += 1;
            if digits[i] <= steps {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Location vectors reachable from `(locs, constraint)` using only delays
/// that are multiples of the granularity and a bounded total elapsed time.
///
/// Every returned vector is genuinely reachable; vectors needing other
/// delays or more time are missed.
pub fn sim_reach_oracle(
    net: &Network,
    locs: &[LocationId],
    constraint: &ClockConstraint,
    cfg: &OracleConfig,
) -> Result<HashSet<Vec<LocationId>>, OracleError> {
    let seeds = grid_seeds(net, locs, constraint, cfg)?;
    let ticks = (cfg.horizon / cfg.granularity).floor().to_integer().max(0);
    let mut seen: HashSet<(Vec<LocationId>, ClockValuation)> = HashSet::new();
    let mut reached = HashSet::new();
    let mut bucket: VecDeque<(Vec<LocationId>, ClockValuation)> = VecDeque::new();
    for v in seeds {
        if seen.insert((locs.to_vec(), v.clone())) {
            bucket.push_back((locs.to_vec(), v));
        }
    }
    for tick in 0..=ticks {
        let mut later = VecDeque::new();
        while let Some((l, v)) = bucket.pop_front() {
            if seen.len() > cfg.max_states {
                return Err(OracleError::Inconclusive(cfg.max_states));
            }
            reached.insert(l.clone());
            for label in (0..net.labels.len()).map(LabelId::from) {
                for choice in transition_choices(net, &l, label) {
                    if let Ok(next) = sim_action(net, &l, &v, label, &choice) {
                        if seen.insert(next.clone()) {
                            bucket.push_back(next);
                        }
                    }
                }
            }
            if tick < ticks {
                if let Ok(w) = sim_delay(net, &l, &v, cfg.granularity) {
                    if seen.insert((l.clone(), w.clone())) {
                        later.push_back((l, w));
                    }
                }
            }
        }
        bucket = later;
    }
    Ok(reached)
}

/// One step of a symbolic witness: the label fired and the location vector
/// it leads to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub label: LabelId,
    pub locations: Vec<LocationId>,
}

/// A concrete run: for every step, the delay taken before the action and
/// the transitions chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteRun {
    pub start: ClockValuation,
    pub steps: Vec<(Rational64, Vec<(usize, usize)>)>,
    pub end: ClockValuation,
}

/// Searches grid delays (multiples of the granularity, each at most
/// `max_delay`) realizing `steps` from some seed valuation of the source,
/// ending in a valuation that satisfies `target`.
pub fn realize_trace(
    net: &Network,
    locs: &[LocationId],
    source: &ClockConstraint,
    steps: &[TraceStep],
    target: &ClockConstraint,
    cfg: &OracleConfig,
    max_delay: Rational64,
) -> Result<Option<ConcreteRun>, OracleError> {
    struct Search<'a> {
        net: &'a Network,
        steps: &'a [TraceStep],
        target: &'a ClockConstraint,
        delays: Vec<Rational64>,
        dead: HashMap<usize, HashSet<ClockValuation>>,
        budget: usize,
    }

    impl Search<'_> {
        fn go(
            &mut self,
            depth: usize,
            locs: &[LocationId],
            v: &ClockValuation,
            run: &mut Vec<(Rational64, Vec<(usize, usize)>)>,
        ) -> Result<Option<ClockValuation>, OracleError> {
            if depth == self.steps.len() {
                return Ok(v.satisfies(self.target).then(|| v.clone()));
            }
            if self.dead.get(&depth).is_some_and(|s| s.contains(v)) {
                return Ok(None);
            }
            if self.budget == 0 {
                return Err(OracleError::Inconclusive(0));
            }
            self.budget -= 1;
            let step = &self.steps[depth];
            for d in self.delays.clone() {
                let Ok(w) = sim_delay(self.net, locs, v, d) else {
                    // Invariants are convex: longer delays fail too.
                    break;
                };
                for choice in transition_choices(self.net, locs, step.label) {
                    let Ok((next_locs, next)) = sim_action(self.net, locs, &w, step.label, &choice)
                    else {
                        continue;
                    };
                    if next_locs != step.locations {
                        continue;
                    }
                    run.push((d, choice));
                    if let Some(end) = self.go(depth + 1, &next_locs, &next, run)? {
                        return Ok(Some(end));
                    }
                    run.pop();
                }
            }
            self.dead.entry(depth).or_default().insert(v.clone());
            Ok(None)
        }
    }

    let seeds = grid_seeds(net, locs, source, cfg)?;
    let count = (max_delay / cfg.granularity).floor().to_integer().max(0);
    let delays = (0..=count)
        .map(|i| Rational64::from_integer(i) * cfg.granularity)
        .collect();
    let mut search = Search {
        net,
        steps,
        target,
        delays,
        dead: HashMap::new(),
        budget: cfg.max_states,
    };
    for seed in seeds {
        let mut run = Vec::new();
        if let Some(end) = search.go(0, locs, &seed, &mut run)? {
            return Ok(Some(ConcreteRun {
                start: seed,
                steps: run,
                end,
            }));
        }
    }
    Ok(None)
}
