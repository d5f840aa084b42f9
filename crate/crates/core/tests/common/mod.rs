//! Helpers shared by the integration suites: corpus access, random
//! constraint cases, and a point-membership oracle for zone operations that
//! works on rational valuations directly.

#![allow(dead_code)]

use std::path::PathBuf;

use num_rational::Rational64;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tareach::model::{Atom, ClockConstraint, ClockId, Network, Op};
use tareach::parser::{parse_query, parse_spec, Query};
use tareach::zone::{Dbm, Formula, Var};

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus(name)).unwrap()
}

pub fn train() -> Network {
    parse_spec(&corpus_text("train.tas")).unwrap()
}

pub fn query(net: &Network, text: &str) -> Query {
    parse_query(text, net).unwrap()
}

pub const TRAIN_TRUE: &str = "go(Far.Up.u0.nil/true, In.Down.u0.nil/true)";
pub const TRAIN_FALSE: &str = "go(Far.Up.u0.nil/true, In.Up.u0.nil/true)";

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

// ---------------------------------------------------------------------------
// Point oracle

/// `x_i - x_j < c` (strict) or `<= c`; node 0 is the constant zero.
#[derive(Debug, Clone, Copy)]
struct Edge {
    i: usize,
    j: usize,
    c: Rational64,
    strict: bool,
}

/// Whether a system of difference constraints has a real solution: no cycle
/// of negative weight, nor of zero weight through a strict edge.
fn feasible(nodes: usize, edges: &[Edge]) -> bool {
    // (weight, strict); None is unbounded.
    let mut d: Vec<Vec<Option<(Rational64, bool)>>> = vec![vec![None; nodes]; nodes];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some((Rational64::zero(), false));
    }
    let tighter =
        |a: (Rational64, bool), b: (Rational64, bool)| a.0 < b.0 || (a.0 == b.0 && a.1 && !b.1);
    for e in edges {
        let new = (e.c, e.strict);
        match d[e.i][e.j] {
            Some(old) if !tighter(new, old) => {}
            _ => d[e.i][e.j] = Some(new),
        }
    }
    for k in 0..nodes {
        for i in 0..nodes {
            for j in 0..nodes {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    let via = (a.0 + b.0, a.1 || b.1);
                    match d[i][j] {
                        Some(old) if !tighter(via, old) => {}
                        _ => d[i][j] = Some(via),
                    }
                }
            }
        }
    }
    (0..nodes).all(|i| {
        let (w, s) = d[i][i].unwrap();
        w > Rational64::zero() || (w.is_zero() && !s)
    })
}

/// The atom as `lhs - rhs (<|<=) c` with both sides optional.
fn upper_form(a: &Atom) -> Vec<(Option<ClockId>, Option<ClockId>, Rational64, bool)> {
    let c = Rational64::from_integer(a.constant);
    let (l, rr) = (Some(a.lhs), a.rhs);
    match a.op {
        Op::Le => vec![(l, rr, c, false)],
        Op::Lt => vec![(l, rr, c, true)],
        Op::Ge => vec![(rr, l, -c, false)],
        Op::Gt => vec![(rr, l, -c, true)],
        Op::Eq => vec![(l, rr, c, false), (rr, l, -c, false)],
    }
}

/// Whether values for the `free` clocks (non-negative reals) exist that,
/// together with `v` on the other clocks, satisfy `c`.
pub fn exists_fiber(c: &ClockConstraint, v: &[Rational64], free: &[ClockId]) -> bool {
    let node = |x: ClockId| free.iter().position(|f| *f == x).map(|p| p + 1);
    let mut edges = Vec::new();
    for f in 0..free.len() {
        edges.push(Edge {
            i: 0,
            j: f + 1,
            c: Rational64::zero(),
            strict: false,
        });
    }
    for a in &c.atoms {
        for (p, q, k, strict) in upper_form(a) {
            // Move fixed clocks into the constant.
            let mut k = k;
            let pn = match p {
                Some(x) => node(x).or_else(|| {
                    k -= v[x.index()];
                    None
                }),
                None => None,
            };
            let qn = match q {
                Some(x) => node(x).or_else(|| {
                    k += v[x.index()];
                    None
                }),
                None => None,
            };
            edges.push(Edge {
                i: pn.unwrap_or(0),
                j: qn.unwrap_or(0),
                c: k,
                strict,
            });
        }
    }
    feasible(free.len() + 1, &edges)
}

/// Whether `v - d` satisfies `c` (and is non-negative) for some `d >= 0`.
pub fn exists_delay(c: &ClockConstraint, v: &[Rational64]) -> bool {
    // Nodes: 0 is zero, 1 is d. A clock x stands for v_x - d.
    const D: usize = 1;
    let mut edges = vec![Edge {
        i: 0,
        j: D,
        c: Rational64::zero(),
        strict: false,
    }];
    for x in v {
        edges.push(Edge {
            i: D,
            j: 0,
            c: *x,
            strict: false,
        });
    }
    for a in &c.atoms {
        for (p, q, k, strict) in upper_form(a) {
            match (p, q) {
                (Some(p), Some(q)) => {
                    if !(if strict {
                        v[p.index()] - v[q.index()] < k
                    } else {
                        v[p.index()] - v[q.index()] <= k
                    }) {
                        return false;
                    }
                }
                // v_p - d - 0 ≺ k  ⟺  0 - d ≺ k - v_p
                (Some(p), None) => edges.push(Edge {
                    i: 0,
                    j: D,
                    c: k - v[p.index()],
                    strict,
                }),
                // 0 - (v_q - d) ≺ k  ⟺  d - 0 ≺ k + v_q
                (None, Some(q)) => edges.push(Edge {
                    i: D,
                    j: 0,
                    c: k + v[q.index()],
                    strict,
                }),
                (None, None) => {
                    if !(if strict {
                        Rational64::zero() < k
                    } else {
                        Rational64::zero() <= k
                    }) {
                        return false;
                    }
                }
            }
        }
    }
    feasible(2, &edges)
}

pub fn dbm_member(z: &Dbm, v: &[Rational64]) -> bool {
    !z.is_empty() && z.to_constraint().holds(v)
}

fn holds(c: &ClockConstraint, v: &[Rational64]) -> bool {
    v.iter().all(|x| *x >= Rational64::zero()) && c.holds(v)
}

// ---------------------------------------------------------------------------
// Random cases

pub const MAX_CLOCKS: usize = 4;
pub const MAX_CONSTANT: i64 = 10;

const OPS: [Op; 5] = [Op::Lt, Op::Le, Op::Eq, Op::Ge, Op::Gt];

pub fn random_constraint(rng: &mut impl Rng, clocks: usize) -> ClockConstraint {
    let n = rng.gen_range(0..=4);
    let atoms = (0..n)
        .map(|_| {
            let lhs = ClockId(rng.gen_range(0..clocks) as u32);
            let op = OPS[rng.gen_range(0..OPS.len())];
            if clocks > 1 && rng.gen_bool(0.3) {
                let mut rhs = ClockId(rng.gen_range(0..clocks) as u32);
                while rhs == lhs {
                    rhs = ClockId(rng.gen_range(0..clocks) as u32);
                }
                Atom::diff(lhs, rhs, op, rng.gen_range(-MAX_CONSTANT..=MAX_CONSTANT))
            } else {
                Atom::simple(lhs, op, rng.gen_range(0..=MAX_CONSTANT))
            }
        })
        .collect();
    ClockConstraint::new(atoms)
}

/// A valuation on the half-integer grid in `[0, MAX_CONSTANT + 2]`.
pub fn grid_point(rng: &mut impl Rng, clocks: usize) -> Vec<Rational64> {
    (0..clocks)
        .map(|_| r(rng.gen_range(0..=2 * (MAX_CONSTANT + 2)), 2))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub clocks: usize,
    pub a: ClockConstraint,
    pub b: ClockConstraint,
    pub c: ClockConstraint,
    pub shuffled: ClockConstraint,
    pub resets: Vec<ClockId>,
    pub eliminated: ClockId,
    pub k: Vec<i64>,
    pub points: Vec<Vec<Rational64>>,
}

pub const POINTS_PER_CASE: usize = 48;

impl Case {
    pub fn new(seed: u64) -> Case {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clocks = rng.gen_range(1..=MAX_CLOCKS);
        let a = random_constraint(&mut rng, clocks);
        let b = random_constraint(&mut rng, clocks);
        let c = random_constraint(&mut rng, clocks);
        let mut atoms = a.atoms.clone();
        atoms.shuffle(&mut rng);
        let shuffled = ClockConstraint::new(atoms);
        let resets = (0..clocks)
            .filter(|_| rng.gen_bool(0.4))
            .map(|i| ClockId(i as u32))
            .collect();
        let eliminated = ClockId(rng.gen_range(0..clocks) as u32);
        let k = (0..clocks)
            .map(|_| rng.gen_range(0..=MAX_CONSTANT))
            .collect();
        let points = (0..POINTS_PER_CASE)
            .map(|_| grid_point(&mut rng, clocks))
            .collect();
        Case {
            seed,
            clocks,
            a,
            b,
            c,
            shuffled,
            resets,
            eliminated,
            k,
            points,
        }
    }

    fn dbm(&self, c: &ClockConstraint) -> Dbm {
        Dbm::from_constraint(c, self.clocks).unwrap()
    }

    fn formula(&self, c: &ClockConstraint) -> Formula {
        Formula::from_constraint(c, self.clocks).unwrap()
    }

    /// DBM laws and point membership. Returns one message per failure.
    pub fn dbm_failures(&self) -> Vec<String> {
        let mut fails = Vec::new();
        let mut fail = |what: &str| fails.push(format!("seed {}: {what}", self.seed));
        let za = self.dbm(&self.a);
        let zb = self.dbm(&self.b);
        let zc = self.dbm(&self.c);

        // Closure
        if za.canonicalize() != za || za.canonicalize().canonicalize() != za.canonicalize() {
            fail("closure not idempotent");
        }
        if self.dbm(&self.shuffled) != za {
            fail("canonical form depends on atom order");
        }
        if self.dbm(&za.to_constraint()) != za {
            fail("to_constraint does not round-trip");
        }

        // Inclusion
        let ab = za.intersect(&zb).unwrap();
        let abc = ab.intersect(&zc).unwrap();
        if !za.includes(&za).unwrap() {
            fail("includes not reflexive");
        }
        if !za.includes(&ab).unwrap() || !zb.includes(&ab).unwrap() || !ab.includes(&abc).unwrap() {
            fail("intersection not included in operands");
        }
        if !za.includes(&abc).unwrap() {
            fail("includes not transitive");
        }
        if za.includes(&zb).unwrap() && zb.includes(&za).unwrap() && za != zb {
            fail("includes not antisymmetric on canonical forms");
        }

        // Growth and idempotence
        let up = za.elapse();
        if !up.includes(&za).unwrap() || up.elapse() != up {
            fail("elapse not growing or not idempotent");
        }
        let ex = za.extrapolate(&self.k);
        if !ex.includes(&za).unwrap() || !ex.extrapolate(&self.k).is_equivalent(&ex).unwrap() {
            fail("extrapolate not growing or not idempotent");
        }

        // Membership
        let reset = za.reset(&self.resets).unwrap();
        let elim = za.eliminate(self.eliminated).unwrap();
        let e = self.eliminated.index();
        for v in &self.points {
            let in_a = holds(&self.a, v);
            if dbm_member(&za, v) != in_a {
                fail(&format!("from_constraint membership at {v:?}"));
            }
            if dbm_member(&ab, v) != (in_a && holds(&self.b, v)) {
                fail(&format!("intersect membership at {v:?}"));
            }
            if za.includes(&zb).unwrap() && holds(&self.b, v) && !in_a {
                fail(&format!("includes contradicted by {v:?}"));
            }
            let mut w = v.clone();
            for x in &self.resets {
                w[x.index()] = Rational64::zero();
            }
            for p in [v, &w] {
                let zeroed = self.resets.iter().all(|x| p[x.index()].is_zero());
                let expected = zeroed && exists_fiber(&self.a, p, &self.resets);
                if dbm_member(&reset, p) != expected {
                    fail(&format!("reset {:?} membership at {p:?}", self.resets));
                }
            }
            if dbm_member(&up, v) != exists_delay(&self.a, v) {
                fail(&format!("elapse membership at {v:?}"));
            }
            let mut projected = v.clone();
            projected.remove(e);
            if dbm_member(&elim, &projected) != exists_fiber(&self.a, v, &[self.eliminated]) {
                fail(&format!("eliminate x{e} membership at {projected:?}"));
            }
            if in_a && !dbm_member(&ex, v) {
                fail(&format!("extrapolation lost {v:?}"));
            }
        }
        fails
    }

    /// Formula operations against their DBM counterparts.
    pub fn cross_failures(&self) -> Vec<String> {
        let mut fails = Vec::new();
        let mut fail = |what: &str| fails.push(format!("seed {}: {what}", self.seed));
        let n = self.clocks;
        let za = self.dbm(&self.a);
        let zb = self.dbm(&self.b);
        let fa = self.formula(&self.a);
        let fb = self.formula(&self.b);
        let of_dbm = |z: &Dbm| self.formula(&z.to_constraint());
        let equiv = |f: &Formula, z: &Dbm| f.fm_equiv(&of_dbm(z)).unwrap();

        if fa.fm_is_empty() != za.is_empty() {
            fail("emptiness differs");
        }
        let fab = fa.fm_intersect(&fb).unwrap();
        let zab = za.intersect(&zb).unwrap();
        if fab.fm_is_empty() != zab.is_empty() || !equiv(&fab, &zab) {
            fail("intersect differs");
        }
        if !equiv(
            &fa.fm_reset(&self.resets).unwrap(),
            &za.reset(&self.resets).unwrap(),
        ) {
            fail(&format!("reset {:?} differs", self.resets));
        }
        if !equiv(&fa.fm_elapse(), &za.elapse()) {
            fail("elapse differs");
        }
        if !equiv(&fa.fm_extrapolate(&self.k), &za.extrapolate(&self.k)) {
            fail("extrapolate differs");
        }
        if fa.fm_includes(&fb).unwrap() != za.includes(&zb).unwrap() {
            fail("includes differs");
        }

        // Projection: renumber the DBM result back into the full clock set.
        let x = self.eliminated;
        let lifted: Vec<Atom> = za
            .eliminate(x)
            .unwrap()
            .to_constraint()
            .atoms
            .into_iter()
            .map(|a| {
                let up = |c: ClockId| if c.0 >= x.0 { ClockId(c.0 + 1) } else { c };
                Atom {
                    lhs: up(a.lhs),
                    rhs: a.rhs.map(up),
                    ..a
                }
            })
            .collect();
        let expected = Formula::from_constraint(&ClockConstraint::new(lifted), n)
            .unwrap()
            .fm_exists(&[Var::Clock(x)])
            .unwrap();
        let projected = fa.fm_exists(&[Var::Clock(x)]).unwrap();
        // A zero-clock matrix has no atom to express emptiness with.
        let same = if za.is_empty() {
            projected.fm_is_empty()
        } else {
            projected.fm_equiv(&expected).unwrap()
        };
        if !same {
            fail(&format!("exists x{} differs from eliminate", x.0));
        }
        fails
    }
}

// ---------------------------------------------------------------------------
// Random networks

fn random_decimal(rng: &mut impl Rng, lo: i64, hi: i64) -> Rational64 {
    let den = [1, 1, 2, 4, 5, 10][rng.gen_range(0..6)];
    r(rng.gen_range(lo * den..=hi * den), den)
}

fn random_source_constraint(rng: &mut impl Rng, clocks: usize) -> ClockConstraint<Rational64> {
    let ops = [Op::Lt, Op::Le, Op::Ge, Op::Gt];
    let atoms = (0..rng.gen_range(0..=3))
        .map(|_| {
            let lhs = ClockId(rng.gen_range(0..clocks) as u32);
            let op = ops[rng.gen_range(0..ops.len())];
            if clocks > 1 && rng.gen_bool(0.3) {
                let rhs = ClockId(((lhs.index() + rng.gen_range(1..clocks)) % clocks) as u32);
                Atom::diff(lhs, rhs, op, random_decimal(rng, -5, 5))
            } else {
                Atom::simple(lhs, op, random_decimal(rng, 0, 8))
            }
        })
        .collect();
    ClockConstraint::new(atoms)
}

/// A valid network with decimal constants, hyphenated names, and every
/// syntactic feature the printer emits.
pub fn random_network(seed: u64) -> Network<Rational64> {
    use tareach::model::{Automaton, LabelId, LocationId, Transition};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clocks = rng.gen_range(1..=3);
    let labels = rng.gen_range(1..=4);
    let mut locations = Vec::new();
    let mut automata = Vec::new();
    for ai in 0..rng.gen_range(1..=3) {
        let first = locations.len();
        let count = rng.gen_range(1..=3);
        for li in 0..count {
            locations.push(format!("A{ai}-l{li}"));
        }
        let own: Vec<LocationId> = (first..first + count).map(LocationId::from).collect();
        let alphabet: Vec<LabelId> = (0..labels)
            .filter(|_| rng.gen_bool(0.6))
            .map(LabelId::from)
            .collect();
        let invariants = own
            .iter()
            .map(|l| (*l, random_source_constraint(&mut rng, clocks)))
            .collect();
        let mut transitions = Vec::new();
        if !alphabet.is_empty() {
            for _ in 0..rng.gen_range(0..=4) {
                transitions.push(Transition {
                    label: alphabet[rng.gen_range(0..alphabet.len())],
                    source: own[rng.gen_range(0..own.len())],
                    guard: random_source_constraint(&mut rng, clocks),
                    resets: (0..clocks)
                        .filter(|_| rng.gen_bool(0.4))
                        .map(|i| ClockId(i as u32))
                        .collect(),
                    target: own[rng.gen_range(0..own.len())],
                });
            }
        }
        automata.push(Automaton {
            locations: own,
            alphabet,
            invariants,
            transitions,
        });
    }
    Network {
        name: format!("net{seed}"),
        clocks: (0..clocks).map(|i| format!("c{i}")).collect(),
        locations,
        labels: (0..labels).map(|i| format!("e_{i}")).collect(),
        automata,
        scale: 1,
    }
}
