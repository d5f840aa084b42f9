//! Difference-bound matrices.
//!
//! Index 0 is the constant-zero reference clock and clock `x` lives at index
//! `x + 1`. Cell `(i, j)` bounds `x_i - x_j`. Every operation returns a
//! canonical matrix (shortest-path closed) unless stated otherwise, and all
//! empty zones of a given dimension share one representation.

use std::fmt;

use crate::model::{Atom, ClockConstraint, ClockId, Op};

use super::bound::Bound;
use super::ZoneError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dbm {
    dim: usize,
    cells: Vec<Bound>,
    canonical: bool,
    empty: bool,
}

impl Dbm {
    /// All non-negative valuations.
    pub fn universe(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        let mut cells = vec![Bound::INFINITY; dim * dim];
        for j in 0..dim {
            cells[j] = Bound::LE_ZERO;
            cells[j * dim + j] = Bound::LE_ZERO;
        }
        Dbm {
            dim,
            cells,
            canonical: true,
            empty: false,
        }
    }

    pub fn empty(clocks: usize) -> Dbm {
        let dim = clocks + 1;
        Dbm {
            dim,
            cells: vec![Bound::LT_ZERO; dim * dim],
            canonical: true,
            empty: true,
        }
    }

    /// Takes `cells` (row-major, `(clocks + 1)^2` entries) as-is. The result is
    /// marked non-canonical.
    pub fn from_cells(clocks: usize, cells: Vec<Bound>) -> Dbm {
        let dim = clocks + 1;
        assert_eq!(
            cells.len(),
            dim * dim,
            "cell count does not match clock count"
        );
        Dbm {
            dim,
            cells,
            canonical: false,
            empty: false,
        }
    }

    pub fn from_constraint(c: &ClockConstraint, clocks: usize) -> Result<Dbm, ZoneError> {
        let mut d = Dbm::universe(clocks);
        d.canonical = false;
        for atom in &c.atoms {
            d.constrain(atom)?;
        }
        d.close();
        Ok(d)
    }

    pub fn clock_count(&self) -> usize {
        self.dim - 1
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// Cell `(i, j)` in matrix coordinates (0 is the reference clock).
    pub fn get(&self, i: usize, j: usize) -> Bound {
        self.cells[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, b: Bound) {
        self.cells[i * self.dim + j] = b;
    }

    fn tighten(&mut self, i: usize, j: usize, b: Bound) {
        if b < self.get(i, j) {
            self.set(i, j, b);
        }
    }

    fn slot(&self, c: ClockId) -> Result<usize, ZoneError> {
        if c.index() < self.clock_count() {
            Ok(c.index() + 1)
        } else {
            Err(ZoneError::UnknownClock(c.0))
        }
    }

    fn same_shape(&self, other: &Dbm) -> Result<(), ZoneError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(ZoneError::DimensionMismatch {
                left: self.clock_count(),
                right: other.clock_count(),
            })
        }
    }

    /// Conjoins one atom without closing.
    fn constrain(&mut self, atom: &Atom) -> Result<(), ZoneError> {
        let x = self.slot(atom.lhs)?;
        let y = match atom.rhs {
            Some(r) => self.slot(r)?,
            None => 0,
        };
        let c = atom.constant;
        let (upper, lower) = match atom.op {
            Op::Le => (Some(Bound::le(c)), None),
            Op::Lt => (Some(Bound::lt(c)), None),
            Op::Ge => (None, Some(Bound::le(-c))),
            Op::Gt => (None, Some(Bound::lt(-c))),
            Op::Eq => (Some(Bound::le(c)), Some(Bound::le(-c))),
        };
        if let Some(b) = upper {
            self.tighten(x, y, b);
        }
        if let Some(b) = lower {
            self.tighten(y, x, b);
        }
        self.canonical = false;
        Ok(())
    }

    fn mark_empty(&mut self) {
        *self = Dbm::empty(self.clock_count());
    }

    /// Floyd-Warshall closure in place.
    fn close(&mut self) {
        if self.empty {
            return;
        }
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let through = ik + self.get(k, j);
                    if through < self.get(i, j) {
                        self.set(i, j, through);
                    }
                }
            }
            if (0..n).any(|i| self.get(i, i) < Bound::LE_ZERO) {
                self.mark_empty();
                return;
            }
        }
        self.canonical = true;
    }

    pub fn canonicalize(&self) -> Dbm {
        let mut d = self.clone();
        if !d.canonical {
            d.close();
        }
        d
    }

    fn closed(&self) -> std::borrow::Cow<'_, Dbm> {
        if self.canonical {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(self.canonicalize())
        }
    }

    pub fn is_empty(&self) -> bool {
        if self.canonical {
            self.empty
        } else {
            self.canonicalize().empty
        }
    }

    pub fn intersect(&self, other: &Dbm) -> Result<Dbm, ZoneError> {
        self.same_shape(other)?;
        if self.empty || other.empty {
            return Ok(Dbm::empty(self.clock_count()));
        }
        let mut d = self.clone();
        for (a, b) in d.cells.iter_mut().zip(&other.cells) {
            *a = (*a).min(*b);
        }
        d.canonical = false;
        d.close();
        Ok(d)
    }

    /// Conjoins a constraint.
    pub fn restrict(&self, c: &ClockConstraint) -> Result<Dbm, ZoneError> {
        if self.empty {
            return Ok(self.clone());
        }
        let mut d = self.clone();
        for atom in &c.atoms {
            d.constrain(atom)?;
        }
        d.close();
        Ok(d)
    }

    /// `{ v[clocks := 0] | v in self }`, resets applied in list order.
    pub fn reset(&self, clocks: &[ClockId]) -> Result<Dbm, ZoneError> {
        let mut d = self.closed().into_owned();
        let slots = clocks
            .iter()
            .map(|c| d.slot(*c))
            .collect::<Result<Vec<_>, _>>()?;
        if d.empty {
            return Ok(d);
        }
        for r in slots {
            for j in 0..d.dim {
                let from_zero = d.get(0, j);
                let to_zero = d.get(j, 0);
                d.set(r, j, from_zero);
                d.set(j, r, to_zero);
            }
            d.set(r, r, Bound::LE_ZERO);
        }
        Ok(d)
    }

    /// `{ v + t | v in self, t >= 0 }`.
    pub fn elapse(&self) -> Dbm {
        let mut d = self.closed().into_owned();
        if d.empty {
            return d;
        }
        for i in 1..d.dim {
            d.set(i, 0, Bound::INFINITY);
        }
        d
    }

    /// Whether `self` is a superset of `other`.
    pub fn includes(&self, other: &Dbm) -> Result<bool, ZoneError> {
        self.same_shape(other)?;
        let (a, b) = (self.closed(), other.closed());
        if b.empty {
            return Ok(true);
        }
        if a.empty {
            return Ok(false);
        }
        Ok(b.cells.iter().zip(&a.cells).all(|(x, y)| x <= y))
    }

    pub fn is_equivalent(&self, other: &Dbm) -> Result<bool, ZoneError> {
        self.same_shape(other)?;
        Ok(self.closed().cells == other.closed().cells)
    }

    /// Max-constant widening: upper bounds above `k(x_i)` are dropped and
    /// lower bounds below `-k(x_j)` are relaxed to `(-k(x_j), <)`, then the
    /// matrix is closed. Closure can re-derive a dropped bound, so the step is
    /// repeated until the closed matrix stops changing; the result is a
    /// fixpoint.
    pub fn extrapolate(&self, k: &[i64]) -> Dbm {
        assert_eq!(k.len(), self.clock_count(), "one max constant per clock");
        let mut d = self.closed().into_owned();
        loop {
            let next = d.widen_once(k);
            if next == d {
                return d;
            }
            d = next;
        }
    }

    fn widen_once(&self, k: &[i64]) -> Dbm {
        let mut d = self.clone();
        if d.empty {
            return d;
        }
        let kk = |i: usize| if i == 0 { 0 } else { k[i - 1] };
        for i in 0..d.dim {
            for j in 0..d.dim {
                let m = d.get(i, j);
                if i == j || m.is_infinite() {
                    continue;
                }
                if m > Bound::le(kk(i)) {
                    d.set(i, j, Bound::INFINITY);
                } else if m < Bound::lt(-kk(j)) {
                    d.set(i, j, Bound::lt(-kk(j)));
                }
            }
        }
        d.canonical = false;
        d.close();
        d
    }

    /// Projects `x` away: the result ranges over the other clocks, renumbered
    /// in order.
    pub fn eliminate(&self, x: ClockId) -> Result<Dbm, ZoneError> {
        let d = self.closed();
        let gone = d.slot(x)?;
        if d.empty {
            return Ok(Dbm::empty(d.clock_count() - 1));
        }
        let cells = (0..d.dim)
            .filter(|i| *i != gone)
            .flat_map(|i| (0..d.dim).filter(|j| *j != gone).map(move |j| (i, j)))
            .map(|(i, j)| d.get(i, j))
            .collect();
        Ok(Dbm {
            dim: d.dim - 1,
            cells,
            canonical: true,
            empty: false,
        })
    }

    /// Atoms for every informative cell: per clock a lower then an upper
    /// bound, then differences. The empty zone becomes `x0 < 0`.
    pub fn to_constraint(&self) -> ClockConstraint {
        let d = self.closed();
        if d.empty {
            return match d.clock_count() {
                0 => ClockConstraint::truth(),
                _ => ClockConstraint::new(vec![Atom::simple(ClockId(0), Op::Lt, 0)]),
            };
        }
        let mut atoms = Vec::new();
        for i in 1..d.dim {
            let x = ClockId::from(i - 1);
            let low = d.get(0, i);
            if low != Bound::LE_ZERO {
                let v = -low.value().expect("row 0 is finite");
                atoms.push(Atom::simple(
                    x,
                    if low.is_strict() { Op::Gt } else { Op::Ge },
                    v,
                ));
            }
            let up = d.get(i, 0);
            if let Some(v) = up.value() {
                atoms.push(Atom::simple(
                    x,
                    if up.is_strict() { Op::Lt } else { Op::Le },
                    v,
                ));
            }
        }
        for i in 1..d.dim {
            for j in 1..d.dim {
                let b = d.get(i, j);
                if i == j {
                    continue;
                }
                if let Some(v) = b.value() {
                    let op = if b.is_strict() { Op::Lt } else { Op::Le };
                    atoms.push(Atom::diff(
                        ClockId::from(i - 1),
                        ClockId::from(j - 1),
                        op,
                        v,
                    ));
                }
            }
        }
        ClockConstraint::new(atoms)
    }
}

impl fmt::Debug for Dbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "Dbm(empty, {} clocks)", self.clock_count());
        }
        writeln!(
            f,
            "Dbm{}",
            if self.canonical { "" } else { " (not closed)" }
        )?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| format!("{:?}", self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
