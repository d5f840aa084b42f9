//! Zones as conjunctions of difference atoms, with Fourier-Motzkin
//! quantifier elimination as the single workhorse.
//!
//! This backend shares no arithmetic with [`super::dbm`]; the two are
//! cross-checked against each other.

use std::collections::HashMap;
use std::fmt;

use crate::model::{Atom, ClockConstraint, ClockId, Op};

use super::ZoneError;

/// A clock, or the fresh delay variable used while computing time elapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Clock(ClockId),
    Delay,
}

/// `pos - neg < constant` (or `<=`); a missing side stands for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    pub pos: Option<Var>,
    pub neg: Option<Var>,
    pub strict: bool,
    pub constant: i64,
}

impl LinearAtom {
    pub fn new(pos: Option<Var>, neg: Option<Var>, strict: bool, constant: i64) -> Self {
        LinearAtom {
            pos,
            neg,
            strict,
            constant,
        }
    }

    fn mentions(&self, v: Var) -> bool {
        self.pos == Some(v) || self.neg == Some(v)
    }

    /// `self + other` where `self` is an upper bound on `v` and `other` a
    /// lower bound on it.
    fn combine(&self, lower: &LinearAtom) -> LinearAtom {
        let constant = self
            .constant
            .checked_add(lower.constant)
            .expect("constant overflow");
        LinearAtom {
            pos: lower.pos,
            neg: self.neg,
            strict: self.strict || lower.strict,
            constant,
        }
    }

    /// Whether the atom has no variables (or the same one on both sides).
    fn is_ground(&self) -> bool {
        self.pos == self.neg
    }

    fn ground_holds(&self) -> bool {
        if self.strict {
            0 < self.constant
        } else {
            0 <= self.constant
        }
    }

    /// Negation, still a single atom: `not (p - q < c)` is `q - p <= -c`.
    pub fn negate(&self) -> LinearAtom {
        LinearAtom {
            pos: self.neg,
            neg: self.pos,
            strict: !self.strict,
            constant: -self.constant,
        }
    }

    /// Whether `(constant, strict)` of `self` is at least as tight as `other`'s.
    fn at_least_as_tight(&self, other: &LinearAtom) -> bool {
        self.constant < other.constant
            || (self.constant == other.constant && (self.strict || !other.strict))
    }

    /// The atoms of a model constraint, rewritten to use only `<` and `<=`.
    pub fn from_atom(a: &Atom) -> Vec<LinearAtom> {
        let x = Some(Var::Clock(a.lhs));
        let y = a.rhs.map(Var::Clock);
        let c = a.constant;
        match a.op {
            Op::Le => vec![LinearAtom::new(x, y, false, c)],
            Op::Lt => vec![LinearAtom::new(x, y, true, c)],
            Op::Ge => vec![LinearAtom::new(y, x, false, -c)],
            Op::Gt => vec![LinearAtom::new(y, x, true, -c)],
            Op::Eq => vec![
                LinearAtom::new(x, y, false, c),
                LinearAtom::new(y, x, false, -c),
            ],
        }
    }
}

impl fmt::Display for LinearAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |v: Option<Var>| match v {
            None => "0".to_owned(),
            Some(Var::Clock(c)) => format!("x{}", c.0),
            Some(Var::Delay) => "d".to_owned(),
        };
        let op = if self.strict { "<" } else { "<=" };
        write!(
            f,
            "{} - {} {} {}",
            side(self.pos),
            side(self.neg),
            op,
            self.constant
        )
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Formula {
    clocks: usize,
    atoms: Vec<LinearAtom>,
    ground_false: bool,
}

impl Formula {
    /// Non-negativity of every clock, nothing else.
    pub fn universe(clocks: usize) -> Formula {
        let atoms = (0..clocks)
            .map(|i| LinearAtom::new(None, Some(Var::Clock(ClockId::from(i))), false, 0))
            .collect();
        Formula {
            clocks,
            atoms,
            ground_false: false,
        }
    }

    pub fn from_constraint(c: &ClockConstraint, clocks: usize) -> Result<Formula, ZoneError> {
        let mut f = Formula::universe(clocks);
        for atom in &c.atoms {
            for clock in atom.clocks() {
                f.check_clock(clock)?;
            }
            f.push_all(LinearAtom::from_atom(atom));
        }
        Ok(f)
    }

    pub fn from_atoms(clocks: usize, atoms: Vec<LinearAtom>) -> Result<Formula, ZoneError> {
        let mut f = Formula::universe(clocks);
        for a in &atoms {
            for v in a.pos.iter().chain(&a.neg) {
                f.check_var(*v)?;
            }
        }
        f.push_all(atoms);
        Ok(f)
    }

    pub fn clock_count(&self) -> usize {
        self.clocks
    }

    pub fn atoms(&self) -> &[LinearAtom] {
        &self.atoms
    }

    /// Whether a variable-free contradiction has been derived. Only a
    /// sufficient condition for emptiness; see [`Formula::fm_is_empty`].
    pub fn is_ground_false(&self) -> bool {
        self.ground_false
    }

    fn check_clock(&self, c: ClockId) -> Result<(), ZoneError> {
        if c.index() < self.clocks {
            Ok(())
        } else {
            Err(ZoneError::UnknownClock(c.0))
        }
    }

    fn check_var(&self, v: Var) -> Result<(), ZoneError> {
        match v {
            Var::Clock(c) => self.check_clock(c),
            Var::Delay => Ok(()),
        }
    }

    fn same_scope(&self, other: &Formula) -> Result<(), ZoneError> {
        if self.clocks == other.clocks {
            Ok(())
        } else {
            Err(ZoneError::DimensionMismatch {
                left: self.clocks,
                right: other.clocks,
            })
        }
    }

    fn push_all(&mut self, atoms: impl IntoIterator<Item = LinearAtom>) {
        for a in atoms {
            if self.ground_false {
                return;
            }
            if a.is_ground() {
                if !a.ground_holds() {
                    self.set_false();
                }
            } else {
                self.atoms.push(a);
            }
        }
    }

    fn set_false(&mut self) {
        self.ground_false = true;
        self.atoms.clear();
    }

    fn vars(&self) -> Vec<Var> {
        let mut vars: Vec<Var> = (0..self.clocks)
            .map(|i| Var::Clock(ClockId::from(i)))
            .collect();
        if self.atoms.iter().any(|a| a.mentions(Var::Delay)) {
            vars.push(Var::Delay);
        }
        vars
    }

    /// Eliminates one variable: every lower bound on `v` is paired with every
    /// upper bound, then only the tightest atom per variable pair is kept.
    fn eliminate_one(&mut self, v: Var) {
        if self.ground_false {
            return;
        }
        let (mut lowers, mut uppers, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for a in self.atoms.drain(..) {
            if a.pos == Some(v) {
                uppers.push(a);
            } else if a.neg == Some(v) {
                lowers.push(a);
            } else {
                rest.push(a);
            }
        }
        let mut combined = Vec::with_capacity(lowers.len() * uppers.len());
        for up in &uppers {
            for low in &lowers {
                let c = up.combine(low);
                debug_assert_eq!(c.strict, up.strict || low.strict);
                combined.push(c);
            }
        }
        self.atoms = rest;
        self.push_all(combined);
        self.keep_tightest();
    }

    fn keep_tightest(&mut self) {
        let mut best: HashMap<(Option<Var>, Option<Var>), usize> = HashMap::new();
        let mut out: Vec<LinearAtom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms.drain(..) {
            match best.get(&(a.pos, a.neg)) {
                Some(&i) => {
                    if a.at_least_as_tight(&out[i]) {
                        out[i] = a;
                    }
                }
                None => {
                    best.insert((a.pos, a.neg), out.len());
                    out.push(a);
                }
            }
        }
        self.atoms = out;
    }

    /// `exists vars. self`.
    pub fn fm_exists(&self, vars: &[Var]) -> Result<Formula, ZoneError> {
        for v in vars {
            self.check_var(*v)?;
        }
        let mut f = self.clone();
        for v in vars {
            f.eliminate_one(*v);
        }
        Ok(f)
    }

    /// `(exists clocks. self) and clocks = 0`.
    pub fn fm_reset(&self, clocks: &[ClockId]) -> Result<Formula, ZoneError> {
        let vars: Vec<Var> = clocks.iter().map(|c| Var::Clock(*c)).collect();
        let mut f = self.fm_exists(&vars)?;
        for v in vars {
            f.push_all([
                LinearAtom::new(Some(v), None, false, 0),
                LinearAtom::new(None, Some(v), false, 0),
            ]);
        }
        Ok(f)
    }

    /// Future closure: substitute `x - d` for every clock `x`, require
    /// `d >= 0`, eliminate `d`.
    pub fn fm_elapse(&self) -> Formula {
        assert!(
            !self.atoms.iter().any(|a| a.mentions(Var::Delay)),
            "formula already mentions the delay variable"
        );
        let d = Some(Var::Delay);
        let mut f = Formula {
            clocks: self.clocks,
            atoms: Vec::new(),
            ground_false: self.ground_false,
        };
        let shifted = self.atoms.iter().map(|a| match (a.pos, a.neg) {
            (Some(_), None) => LinearAtom { neg: d, ..*a },
            (None, Some(_)) => LinearAtom { pos: d, ..*a },
            _ => *a,
        });
        f.push_all(shifted);
        f.push_all([LinearAtom::new(None, d, false, 0)]);
        f.eliminate_one(Var::Delay);
        f
    }

    /// Conjunction; satisfiability is not examined.
    pub fn fm_intersect(&self, other: &Formula) -> Result<Formula, ZoneError> {
        self.same_scope(other)?;
        let mut f = self.clone();
        if other.ground_false {
            f.set_false();
        }
        f.push_all(other.atoms.iter().copied());
        Ok(f)
    }

    pub fn fm_is_empty(&self) -> bool {
        let vars = self.vars();
        self.fm_exists(&vars)
            .expect("own variables are in scope")
            .ground_false
    }

    /// Tightest `(constant, strict)` with `self => pos - neg ~ constant`, or
    /// `None` when unbounded. Undefined on empty formulas.
    pub fn tightest_bound(
        &self,
        pos: Option<Var>,
        neg: Option<Var>,
    ) -> Result<Option<(i64, bool)>, ZoneError> {
        for v in pos.iter().chain(&neg) {
            self.check_var(*v)?;
        }
        if pos == neg {
            return Ok(Some((0, false)));
        }
        let others: Vec<Var> = self
            .vars()
            .into_iter()
            .filter(|v| Some(*v) != pos && Some(*v) != neg)
            .collect();
        let projected = self.fm_exists(&others)?;
        // Shortest path from pos to neg in the graph over {0, pos, neg}:
        // either direct, or through the zero node.
        let pick = |p: Option<Var>, q: Option<Var>| {
            projected
                .atoms
                .iter()
                .filter(|a| a.pos == p && a.neg == q)
                .map(|a| (a.constant, a.strict))
                .min_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        };
        let mut best = pick(pos, neg);
        if pos.is_some() && neg.is_some() {
            if let (Some(up), Some(low)) = (pick(pos, None), pick(None, neg)) {
                let via_zero = (up.0 + low.0, up.1 || low.1);
                best = Some(match best {
                    Some(b) if b.0 < via_zero.0 || (b.0 == via_zero.0 && (b.1 || !via_zero.1)) => b,
                    _ => via_zero,
                });
            }
        }
        Ok(best)
    }

    pub fn fm_entails(&self, a: &LinearAtom) -> Result<bool, ZoneError> {
        for v in a.pos.iter().chain(&a.neg) {
            self.check_var(*v)?;
        }
        if self.fm_is_empty() {
            return Ok(true);
        }
        if a.is_ground() {
            return Ok(a.ground_holds());
        }
        Ok(match self.tightest_bound(a.pos, a.neg)? {
            None => false,
            Some((c, strict)) => c < a.constant || (c == a.constant && (strict || !a.strict)),
        })
    }

    /// Whether every valuation of `other` is one of `self`.
    pub fn fm_includes(&self, other: &Formula) -> Result<bool, ZoneError> {
        self.same_scope(other)?;
        if other.fm_is_empty() {
            return Ok(true);
        }
        if self.fm_is_empty() {
            return Ok(false);
        }
        for a in &self.atoms {
            if !other.fm_entails(a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn fm_equiv(&self, other: &Formula) -> Result<bool, ZoneError> {
        Ok(self.fm_includes(other)? && other.fm_includes(self)?)
    }

    /// Tightest bound on `x_i - x_j` for every ordered pair of distinct
    /// indices, 0 standing for the constant zero.
    fn bound_table(&self) -> Vec<Option<(i64, bool)>> {
        let side = |i: usize| (i > 0).then(|| Var::Clock(ClockId::from(i - 1)));
        let mut table = Vec::new();
        for i in 0..=self.clocks {
            for j in (0..=self.clocks).filter(|j| *j != i) {
                table.push(self.tightest_bound(side(i), side(j)).expect("in scope"));
            }
        }
        table
    }

    /// Max-constant widening computed from the tightest bound of every clock
    /// pair; same rule as the matrix backend, repeated until the bounds stop
    /// changing.
    pub fn fm_extrapolate(&self, k: &[i64]) -> Formula {
        assert_eq!(k.len(), self.clocks, "one max constant per clock");
        if self.fm_is_empty() {
            let mut e = Formula::universe(self.clocks);
            e.set_false();
            return e;
        }
        let side = |i: usize| (i > 0).then(|| Var::Clock(ClockId::from(i - 1)));
        let kk = |i: usize| if i == 0 { 0 } else { k[i - 1] };
        let mut f = self.clone();
        let mut table = f.bound_table();
        loop {
            let mut atoms = Vec::new();
            let mut cells = table.iter();
            for i in 0..=self.clocks {
                for j in (0..=self.clocks).filter(|j| *j != i) {
                    let Some(&(c, strict)) = cells.next().expect("table covers all pairs").as_ref()
                    else {
                        continue;
                    };
                    if c > kk(i) {
                        continue;
                    } else if c < -kk(j) {
                        atoms.push(LinearAtom::new(side(i), side(j), true, -kk(j)));
                    } else {
                        atoms.push(LinearAtom::new(side(i), side(j), strict, c));
                    }
                }
            }
            let next = Formula::from_atoms(self.clocks, atoms).expect("in scope");
            let next_table = next.bound_table();
            if next_table == table {
                return f;
            }
            f = next;
            table = next_table;
        }
    }

    /// Back to a model constraint over clocks; non-negativity atoms are left
    /// implicit and a ground contradiction becomes `x0 < 0`.
    pub fn to_constraint(&self) -> ClockConstraint {
        if self.ground_false {
            return ClockConstraint::new(vec![Atom::simple(ClockId(0), Op::Lt, 0)]);
        }
        let clock = |v: Var| match v {
            Var::Clock(c) => c,
            Var::Delay => panic!("delay variable outside elapse"),
        };
        let atoms = self
            .atoms
            .iter()
            .filter(|a| !(a.pos.is_none() && a.constant == 0 && !a.strict))
            .map(|a| {
                let op = if a.strict { Op::Lt } else { Op::Le };
                let rev = if a.strict { Op::Gt } else { Op::Ge };
                match (a.pos, a.neg) {
                    (Some(p), None) => Atom::simple(clock(p), op, a.constant),
                    (None, Some(q)) => Atom::simple(clock(q), rev, -a.constant),
                    (Some(p), Some(q)) => Atom::diff(clock(p), clock(q), op, a.constant),
                    (None, None) => unreachable!("ground atoms are never stored"),
                }
            })
            .collect();
        ClockConstraint::new(atoms)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ground_false {
            return write!(f, "Formula(false)");
        }
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.to_string()).collect();
        write!(f, "Formula[{}]", atoms.join(" & "))
    }
}
