//! Zone-based reachability checking for networks of timed automata.
//!
//! A network is read from its textual description ([`parser`]), checked and
//! scaled to integer constants ([`model`]), and queried with
//! `go(source/constraint, target/constraint)` by on-the-fly exploration of
//! the synchronized product ([`explorer`]) over either zone representation
//! in [`zone`].

pub mod cli;
pub mod explorer;
pub mod model;
pub mod parser;
pub mod zone;
