//! Symbolic zone representations and the capability set the explorer needs
//! from them.

pub mod bound;
pub mod dbm;
pub mod fm;

use std::fmt::Debug;
use std::hash::{DefaultHasher, Hash, Hasher};

use thiserror::Error;

use crate::model::{ClockConstraint, ClockId};

pub use bound::Bound;
pub use dbm::Dbm;
pub use fm::{Formula, LinearAtom, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZoneError {
    #[error("unknown clock #{0}")]
    UnknownClock(u32),
    #[error("zones over different clock sets ({left} vs {right} clocks)")]
    DimensionMismatch { left: usize, right: usize },
}

/// Zone operations used by the explorer. Implementations are pure and are
/// only ever handed zones over the clock count they were built for, so
/// scope errors are bugs and panic.
pub trait ZoneBackend: Sync {
    type Zone: Clone + Debug + Send + Sync;

    fn name(&self) -> &'static str;
    #[allow(clippy::wrong_self_convention)]
    fn from_constraint(&self, c: &ClockConstraint) -> Self::Zone;
    fn intersect(&self, a: &Self::Zone, b: &Self::Zone) -> Self::Zone;
    fn reset(&self, z: &Self::Zone, clocks: &[ClockId]) -> Self::Zone;
    fn elapse(&self, z: &Self::Zone) -> Self::Zone;
    fn is_empty(&self, z: &Self::Zone) -> bool;
    /// Whether `a` is a superset of `b`.
    fn includes(&self, a: &Self::Zone, b: &Self::Zone) -> bool;
    fn is_equivalent(&self, a: &Self::Zone, b: &Self::Zone) -> bool;
    fn extrapolate(&self, z: &Self::Zone, k: &[i64]) -> Self::Zone;
    fn to_constraint(&self, z: &Self::Zone) -> ClockConstraint;

    /// Hash that agrees on equivalent zones, when the representation has a
    /// cheap canonical form.
    fn fingerprint(&self, _z: &Self::Zone) -> Option<u64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DbmBackend {
    pub clocks: usize,
}

impl DbmBackend {
    pub fn new(clocks: usize) -> Self {
        DbmBackend { clocks }
    }
}

const SCOPE: &str = "zone outside the backend's clock scope";

impl ZoneBackend for DbmBackend {
    type Zone = Dbm;

    fn name(&self) -> &'static str {
        "dbm"
    }

    fn from_constraint(&self, c: &ClockConstraint) -> Dbm {
        Dbm::from_constraint(c, self.clocks).expect(SCOPE)
    }

    fn intersect(&self, a: &Dbm, b: &Dbm) -> Dbm {
        a.intersect(b).expect(SCOPE)
    }

    fn reset(&self, z: &Dbm, clocks: &[ClockId]) -> Dbm {
        z.reset(clocks).expect(SCOPE)
    }

    fn elapse(&self, z: &Dbm) -> Dbm {
        z.elapse()
    }

    fn is_empty(&self, z: &Dbm) -> bool {
        z.is_empty()
    }

    fn includes(&self, a: &Dbm, b: &Dbm) -> bool {
        a.includes(b).expect(SCOPE)
    }

    fn is_equivalent(&self, a: &Dbm, b: &Dbm) -> bool {
        a.is_equivalent(b).expect(SCOPE)
    }

    fn extrapolate(&self, z: &Dbm, k: &[i64]) -> Dbm {
        z.extrapolate(k)
    }

    fn to_constraint(&self, z: &Dbm) -> ClockConstraint {
        z.to_constraint()
    }

    fn fingerprint(&self, z: &Dbm) -> Option<u64> {
        let mut h = DefaultHasher::new();
        z.canonicalize().hash(&mut h);
        Some(h.finish())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FormulaBackend {
    pub clocks: usize,
}

impl FormulaBackend {
    pub fn new(clocks: usize) -> Self {
        FormulaBackend { clocks }
    }
}

impl ZoneBackend for FormulaBackend {
    type Zone = Formula;

    fn name(&self) -> &'static str {
        "formula"
    }

    fn from_constraint(&self, c: &ClockConstraint) -> Formula {
        Formula::from_constraint(c, self.clocks).expect(SCOPE)
    }

    fn intersect(&self, a: &Formula, b: &Formula) -> Formula {
        a.fm_intersect(b).expect(SCOPE)
    }

    fn reset(&self, z: &Formula, clocks: &[ClockId]) -> Formula {
        z.fm_reset(clocks).expect(SCOPE)
    }

    fn elapse(&self, z: &Formula) -> Formula {
        z.fm_elapse()
    }

    fn is_empty(&self, z: &Formula) -> bool {
        z.fm_is_empty()
    }

    fn includes(&self, a: &Formula, b: &Formula) -> bool {
        a.fm_includes(b).expect(SCOPE)
    }

    fn is_equivalent(&self, a: &Formula, b: &Formula) -> bool {
        a.fm_equiv(b).expect(SCOPE)
    }

    fn extrapolate(&self, z: &Formula, k: &[i64]) -> Formula {
        z.fm_extrapolate(k)
    }

    fn to_constraint(&self, z: &Formula) -> ClockConstraint {
        z.to_constraint()
    }
}
