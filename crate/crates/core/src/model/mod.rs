//! Clocks, clock constraints, timed automata and networks of them.
//!
//! Entities are referred to by ordinal ids into the network's global
//! declaration lists. Constants are generic so the same structures can
//! carry decimal constants straight out of the parser (`Network<Rational64>`)
//! and the integer-scaled form every symbolic computation works on
//! (`Network<i64>`, the default).

pub mod sim;

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed};

macro_rules! ordinal_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            fn from(i: usize) -> Self {
                $name(u32::try_from(i).expect("id overflow"))
            }
        }
    };
}

ordinal_id!(
    /// Position of a clock in the network's `Clocks` list.
    ClockId
);
ordinal_id!(
    /// Position of a location in the network's global `States` list.
    LocationId
);
ordinal_id!(
    /// Position of a label in the network's global `Labels` list.
    LabelId
);

/// Comparison operator of an atomic clock constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Eq => "=",
            Op::Ge => ">=",
            Op::Gt => ">",
        }
    }

    pub fn holds<T: PartialOrd>(self, lhs: &T, rhs: &T) -> bool {
        match self {
            Op::Lt => lhs < rhs,
            Op::Le => lhs <= rhs,
            Op::Eq => lhs == rhs,
            Op::Ge => lhs >= rhs,
            Op::Gt => lhs > rhs,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `lhs # constant` or `lhs - rhs # constant`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom<C = i64> {
    pub lhs: ClockId,
    pub rhs: Option<ClockId>,
    pub op: Op,
    pub constant: C,
}

impl<C> Atom<C> {
    pub fn simple(lhs: ClockId, op: Op, constant: C) -> Self {
        Atom {
            lhs,
            rhs: None,
            op,
            constant,
        }
    }

    pub fn diff(lhs: ClockId, rhs: ClockId, op: Op, constant: C) -> Self {
        Atom {
            lhs,
            rhs: Some(rhs),
            op,
            constant,
        }
    }

    pub fn clocks(&self) -> impl Iterator<Item = ClockId> + '_ {
        std::iter::once(self.lhs).chain(self.rhs)
    }

    fn map_constant<D>(&self, f: impl FnOnce(&C) -> D) -> Atom<D> {
        Atom {
            lhs: self.lhs,
            rhs: self.rhs,
            op: self.op,
            constant: f(&self.constant),
        }
    }
}

impl Atom<i64> {
    /// Evaluates the atom on a valuation expressed in the same (scaled) units.
    pub fn holds(&self, valuation: &[Rational64]) -> bool {
        let mut lhs = valuation[self.lhs.index()];
        if let Some(rhs) = self.rhs {
            lhs -= valuation[rhs.index()];
        }
        self.op
            .holds(&lhs, &Rational64::from_integer(self.constant))
    }
}

impl Atom<Rational64> {
    pub fn holds(&self, valuation: &[Rational64]) -> bool {
        let mut lhs = valuation[self.lhs.index()];
        if let Some(rhs) = self.rhs {
            lhs -= valuation[rhs.index()];
        }
        self.op.holds(&lhs, &self.constant)
    }
}

/// Conjunction of atoms; the empty conjunction is `true`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClockConstraint<C = i64> {
    pub atoms: Vec<Atom<C>>,
}

impl<C> Default for ClockConstraint<C> {
    fn default() -> Self {
        ClockConstraint { atoms: Vec::new() }
    }
}

impl<C> ClockConstraint<C> {
    pub fn truth() -> Self {
        Self::default()
    }

    pub fn new(atoms: Vec<Atom<C>>) -> Self {
        ClockConstraint { atoms }
    }

    pub fn is_true(&self) -> bool {
        self.atoms.is_empty()
    }

    fn map_constants<D>(&self, f: &impl Fn(&C) -> D) -> ClockConstraint<D> {
        ClockConstraint {
            atoms: self.atoms.iter().map(|a| a.map_constant(f)).collect(),
        }
    }
}

impl ClockConstraint<i64> {
    pub fn holds(&self, valuation: &[Rational64]) -> bool {
        self.atoms.iter().all(|a| a.holds(valuation))
    }

    pub fn and(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        ClockConstraint { atoms }
    }
}

impl ClockConstraint<Rational64> {
    pub fn holds(&self, valuation: &[Rational64]) -> bool {
        self.atoms.iter().all(|a| a.holds(valuation))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition<C = i64> {
    pub label: LabelId,
    pub source: LocationId,
    pub guard: ClockConstraint<C>,
    pub resets: Vec<ClockId>,
    pub target: LocationId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton<C = i64> {
    pub locations: Vec<LocationId>,
    pub alphabet: Vec<LabelId>,
    /// One entry per location, in declaration order of the `Invariants` block.
    pub invariants: Vec<(LocationId, ClockConstraint<C>)>,
    pub transitions: Vec<Transition<C>>,
}

impl<C> Automaton<C> {
    pub fn has_label(&self, label: LabelId) -> bool {
        self.alphabet.contains(&label)
    }

    pub fn owns(&self, loc: LocationId) -> bool {
        self.locations.contains(&loc)
    }

    /// Invariant of `loc`. Locations without an entry (only possible before
    /// validation) are unconstrained.
    pub fn invariant(&self, loc: LocationId) -> Option<&ClockConstraint<C>> {
        self.invariants
            .iter()
            .find(|(l, _)| *l == loc)
            .map(|(_, c)| c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network<C = i64> {
    pub name: String,
    pub clocks: Vec<String>,
    pub locations: Vec<String>,
    pub labels: Vec<String>,
    pub automata: Vec<Automaton<C>>,
    /// Constants of every atom are the source constants multiplied by `scale`.
    pub scale: i64,
}

impl<C> Network<C> {
    pub fn clock_name(&self, c: ClockId) -> &str {
        &self.clocks[c.index()]
    }

    pub fn location_name(&self, l: LocationId) -> &str {
        &self.locations[l.index()]
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l.index()]
    }

    pub fn clock_id(&self, name: &str) -> Option<ClockId> {
        self.clocks
            .iter()
            .position(|c| c == name)
            .map(ClockId::from)
    }

    pub fn location_id(&self, name: &str) -> Option<LocationId> {
        self.locations
            .iter()
            .position(|c| c == name)
            .map(LocationId::from)
    }

    pub fn label_id(&self, name: &str) -> Option<LabelId> {
        self.labels
            .iter()
            .position(|c| c == name)
            .map(LabelId::from)
    }

    pub fn clock_count(&self) -> usize {
        self.clocks.len()
    }

    /// Index of the automaton owning `loc`, if any.
    pub fn owner_of(&self, loc: LocationId) -> Option<usize> {
        self.automata.iter().position(|a| a.owns(loc))
    }

    pub fn format_locations(&self, locs: &[LocationId]) -> String {
        let names: Vec<&str> = locs.iter().map(|l| self.location_name(*l)).collect();
        names.join(".")
    }

    /// Every constraint of the network (invariants, then guards).
    pub fn constraints(&self) -> impl Iterator<Item = &ClockConstraint<C>> {
        self.automata.iter().flat_map(|a| {
            a.invariants
                .iter()
                .map(|(_, c)| c)
                .chain(a.transitions.iter().map(|t| &t.guard))
        })
    }
}

impl Network<i64> {
    /// Conjunction of the invariants of every location in `locs`.
    pub fn invariant_of(&self, locs: &[LocationId]) -> ClockConstraint {
        let mut atoms = Vec::new();
        for (aut, loc) in self.automata.iter().zip(locs) {
            if let Some(inv) = aut.invariant(*loc) {
                atoms.extend(inv.atoms.iter().cloned());
            }
        }
        ClockConstraint { atoms }
    }
}

/// Which part of a network a diagnostic is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    Clocks,
    States,
    Labels,
    Automaton(usize),
    AutomatonLocations(usize),
    AutomatonLabels(usize),
    Invariant { automaton: usize, entry: usize },
    Transition { automaton: usize, entry: usize },
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Clocks => write!(f, "Clocks"),
            Site::States => write!(f, "States"),
            Site::Labels => write!(f, "Labels"),
            Site::Automaton(a) => write!(f, "automaton {}", a + 1),
            Site::AutomatonLocations(a) => write!(f, "automaton {} Locations", a + 1),
            Site::AutomatonLabels(a) => write!(f, "automaton {} Labels", a + 1),
            Site::Invariant { automaton, entry } => {
                write!(f, "automaton {} invariant {}", automaton + 1, entry + 1)
            }
            Site::Transition { automaton, entry } => {
                write!(f, "automaton {} transition {}", automaton + 1, entry + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelDiagnostic {
    pub site: Site,
    pub message: String,
}

impl fmt::Display for ModelDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.site, self.message)
    }
}

struct Checker<'a, C> {
    net: &'a Network<C>,
    out: Vec<ModelDiagnostic>,
}

impl<'a, C> Checker<'a, C> {
    fn report(&mut self, site: Site, message: impl Into<String>) {
        self.out.push(ModelDiagnostic {
            site,
            message: message.into(),
        });
    }

    fn duplicates(&mut self, site: Site, what: &str, names: impl IntoIterator<Item = String>) {
        let mut seen = HashSet::new();
        for n in names {
            if !seen.insert(n.clone()) {
                self.report(site, format!("duplicate {what} `{n}`"));
            }
        }
    }

    fn constraint(&mut self, site: Site, c: &ClockConstraint<C>) {
        for atom in &c.atoms {
            for clock in atom.clocks() {
                if clock.index() >= self.net.clocks.len() {
                    self.report(site, format!("undeclared clock #{}", clock.0));
                }
            }
            if atom.rhs == Some(atom.lhs) {
                self.report(site, "difference atom compares a clock with itself");
            }
        }
    }

    fn location_name(&self, l: LocationId) -> String {
        self.net
            .locations
            .get(l.index())
            .cloned()
            .unwrap_or_else(|| format!("#{}", l.0))
    }

    fn label_name(&self, l: LabelId) -> String {
        self.net
            .labels
            .get(l.index())
            .cloned()
            .unwrap_or_else(|| format!("#{}", l.0))
    }
}

/// Checks every structural invariant of a network and returns it unchanged
/// if none is violated.
pub fn validate<C>(network: Network<C>) -> Result<Network<C>, Vec<ModelDiagnostic>> {
    let diags = check(&network);
    if diags.is_empty() {
        Ok(network)
    } else {
        Err(diags)
    }
}

/// Same checks as [`validate`], without taking ownership.
pub fn check<C>(net: &Network<C>) -> Vec<ModelDiagnostic> {
    let mut ck = Checker {
        net,
        out: Vec::new(),
    };
    ck.duplicates(Site::Clocks, "clock", net.clocks.iter().cloned());
    ck.duplicates(Site::States, "location", net.locations.iter().cloned());
    ck.duplicates(Site::Labels, "label", net.labels.iter().cloned());
    if net.scale < 1 {
        ck.report(Site::Clocks, "scale must be positive");
    }

    let mut owner: Vec<Option<usize>> = vec![None; net.locations.len()];
    for (ai, aut) in net.automata.iter().enumerate() {
        let locs_site = Site::AutomatonLocations(ai);
        let labels_site = Site::AutomatonLabels(ai);
        let names: Vec<String> = aut.locations.iter().map(|l| ck.location_name(*l)).collect();
        ck.duplicates(locs_site, "location", names);
        let names: Vec<String> = aut.alphabet.iter().map(|l| ck.label_name(*l)).collect();
        ck.duplicates(labels_site, "label", names);

        for &loc in &aut.locations {
            match owner.get_mut(loc.index()) {
                None => ck.report(locs_site, format!("undeclared location #{}", loc.0)),
                Some(slot) => match *slot {
                    Some(other) if other != ai => {
                        let name = ck.location_name(loc);
                        ck.report(
                            locs_site,
                            format!(
                                "overlapping locations: `{name}` also belongs to automaton {}",
                                other + 1
                            ),
                        )
                    }
                    _ => *slot = Some(ai),
                },
            }
        }
        for &label in &aut.alphabet {
            if label.index() >= net.labels.len() {
                ck.report(labels_site, format!("undeclared label #{}", label.0));
            }
        }

        for (ei, (loc, inv)) in aut.invariants.iter().enumerate() {
            let site = Site::Invariant {
                automaton: ai,
                entry: ei,
            };
            if !aut.owns(*loc) {
                let name = ck.location_name(*loc);
                ck.report(
                    site,
                    format!("undeclared location `{name}` in this automaton"),
                );
            }
            if aut.invariants[..ei].iter().any(|(l, _)| l == loc) {
                let name = ck.location_name(*loc);
                ck.report(site, format!("duplicate invariant for `{name}`"));
            }
            ck.constraint(site, inv);
        }
        for &loc in &aut.locations {
            if aut.invariant(loc).is_none() {
                let name = ck.location_name(loc);
                ck.report(
                    Site::Automaton(ai),
                    format!("missing invariant for location `{name}`"),
                );
            }
        }

        for (ti, tr) in aut.transitions.iter().enumerate() {
            let site = Site::Transition {
                automaton: ai,
                entry: ti,
            };
            if !aut.has_label(tr.label) {
                let name = ck.label_name(tr.label);
                ck.report(site, format!("undeclared label `{name}` in this automaton"));
            }
            for (loc, role) in [(tr.source, "source"), (tr.target, "target")] {
                if !aut.owns(loc) {
                    let name = ck.location_name(loc);
                    ck.report(
                        site,
                        format!("undeclared {role} location `{name}` in this automaton"),
                    );
                }
            }
            ck.constraint(site, &tr.guard);
            for (i, r) in tr.resets.iter().enumerate() {
                if r.index() >= net.clocks.len() {
                    ck.report(site, format!("undeclared clock #{}", r.0));
                } else if tr.resets[..i].contains(r) {
                    let name = net.clock_name(*r).to_owned();
                    ck.report(site, format!("clock `{name}` reset twice"));
                }
            }
        }
    }
    ck.out
}

/// Scales every constant by the least common multiple of their denominators.
///
/// A valuation `v` satisfies an atom of the input iff `scale * v` satisfies
/// the corresponding output atom.
pub fn normalize_constants(network: Network<Rational64>) -> Network<i64> {
    let factor = network
        .constraints()
        .flat_map(|c| c.atoms.iter())
        .fold(1i64, |acc, a| acc.lcm(a.constant.denom()));
    let scale_atom = |c: &Rational64| {
        let scaled = *c * Rational64::from_integer(factor);
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    };
    let automata = network
        .automata
        .iter()
        .map(|a| Automaton {
            locations: a.locations.clone(),
            alphabet: a.alphabet.clone(),
            invariants: a
                .invariants
                .iter()
                .map(|(l, c)| (*l, c.map_constants(&scale_atom)))
                .collect(),
            transitions: a
                .transitions
                .iter()
                .map(|t| Transition {
                    label: t.label,
                    source: t.source,
                    guard: t.guard.map_constants(&scale_atom),
                    resets: t.resets.clone(),
                    target: t.target,
                })
                .collect(),
        })
        .collect();
    Network {
        name: network.name,
        clocks: network.clocks,
        locations: network.locations,
        labels: network.labels,
        automata,
        scale: network.scale * factor,
    }
}

/// Converts a constant written in source units into the network's scaled units.
/// Returns `None` when it is not an integer after scaling.
pub fn scale_constant(scale: i64, c: Rational64) -> Option<i64> {
    let scaled = c * Rational64::from_integer(scale);
    scaled.is_integer().then(|| scaled.to_integer())
}

/// Inverse of [`scale_constant`].
pub fn unscale_constant(scale: i64, c: i64) -> Rational64 {
    Rational64::new(c, scale)
}

/// Largest absolute constant compared against each clock, over the network
/// and the extra constraints (typically the query's source and target).
pub fn max_constants<'a>(
    network: &Network,
    extra: impl IntoIterator<Item = &'a ClockConstraint>,
) -> Vec<i64> {
    let mut k = vec![0i64; network.clock_count()];
    let extra: Vec<&ClockConstraint> = extra.into_iter().collect();
    for c in network.constraints().chain(extra) {
        for atom in &c.atoms {
            for clock in atom.clocks() {
                let slot = &mut k[clock.index()];
                *slot = (*slot).max(atom.constant.abs());
            }
        }
    }
    k
}

/// Source-unit rendering of a scaled constant, as a terminating decimal.
pub fn format_constant(scale: i64, c: i64) -> String {
    format_decimal(unscale_constant(scale, c))
}

/// Renders a rational with a terminating decimal expansion. Rationals whose
/// denominator has prime factors other than 2 and 5 are rendered as `p/q`.
pub fn format_decimal(r: Rational64) -> String {
    if r.is_integer() {
        return r.to_integer().to_string();
    }
    let mut den = *r.denom();
    let mut digits = 0u32;
    for p in [2, 5] {
        let mut count = 0;
        while den % p == 0 {
            den /= p;
            count += 1;
        }
        digits = digits.max(count);
    }
    if !den.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let unit = 10i64.pow(digits);
    let scaled = r.numer().abs() * (unit / r.denom());
    let sign = if r.is_negative() { "-" } else { "" };
    let mut frac = format!("{:0width$}", scaled % unit, width = digits as usize);
    while frac.ends_with('0') {
        frac.pop();
    }
    format!("{sign}{}.{frac}", scaled / unit)
}
