//! Recursive descent over the token stream, producing unresolved syntax.

use num_rational::Rational64;

use super::lexer::{Tok, Token};
use super::{Diagnostic, Pos};
use crate::model::Op;

#[derive(Debug, Clone)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct RawAtom {
    pub lhs: Name,
    pub rhs: Option<Name>,
    pub op: Op,
    pub constant: Rational64,
    pub pos: Pos,
}

#[derive(Debug, Clone, Default)]
pub struct RawConstraint {
    pub atoms: Vec<RawAtom>,
}

#[derive(Debug, Clone)]
pub struct RawInvariant {
    pub location: Name,
    pub constraint: RawConstraint,
}

#[derive(Debug, Clone)]
pub struct RawTransition {
    pub source: Name,
    pub label: Name,
    pub guard: RawConstraint,
    pub resets: Vec<Name>,
    pub target: Name,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct RawAutomaton {
    pub pos: Pos,
    pub locations: Vec<Name>,
    pub locations_pos: Pos,
    pub labels: Vec<Name>,
    pub labels_pos: Pos,
    pub invariants: Vec<RawInvariant>,
    pub transitions: Vec<RawTransition>,
}

#[derive(Debug, Clone)]
pub struct RawSpec {
    pub name: Name,
    pub clocks: Vec<Name>,
    pub clocks_pos: Pos,
    pub states: Vec<Name>,
    pub states_pos: Pos,
    pub labels: Vec<Name>,
    pub labels_pos: Pos,
    pub automata: Vec<RawAutomaton>,
}

#[derive(Debug, Clone)]
pub struct RawEnd {
    pub locations: Vec<Name>,
    pub pos: Pos,
    pub constraint: RawConstraint,
}

#[derive(Debug, Clone)]
pub struct RawQuery {
    pub source: RawEnd,
    pub target: RawEnd,
}

const RESERVED: [&str; 2] = ["nil", "true"];

/// Section keywords; a name list running into one of these is missing its `nil`.
const SECTIONS: [&str; 8] = [
    "Clocks",
    "States",
    "Labels",
    "Automata",
    "Locations",
    "Invariants",
    "Transitions",
    "end",
];

pub struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, at: 0 }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if t.tok != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(Diagnostic::new(
            t.pos,
            format!("expected {expected}, found {}", t.tok.describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            self.error(&tok.describe())
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.at_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            self.error(&format!("`{kw}`"))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let text = s.clone();
                let pos = self.bump().pos;
                Ok(Name { text, pos })
            }
            _ => self.error("an identifier"),
        }
    }

    /// `ident* "nil"`
    fn idlist(&mut self) -> PResult<Vec<Name>> {
        let mut out = Vec::new();
        while !self.at_keyword("nil") {
            match &self.peek().tok {
                Tok::Ident(s) if !SECTIONS.contains(&s.as_str()) => out.push(self.ident()?),
                _ => return self.error("an identifier or `nil`"),
            }
        }
        self.bump();
        Ok(out)
    }

    pub fn finish(&mut self) -> PResult<()> {
        self.expect(Tok::Eof).map(|_| ())
    }

    pub fn spec(&mut self) -> PResult<RawSpec> {
        self.keyword("specification")?;
        let name = self.ident()?;
        let clocks_pos = self.keyword("Clocks")?;
        let clocks = self.idlist()?;
        let states_pos = self.keyword("States")?;
        let states = self.idlist()?;
        let labels_pos = self.keyword("Labels")?;
        let labels = self.idlist()?;
        self.keyword("Automata")?;
        let mut automata = Vec::new();
        while !self.at_keyword("nil") {
            let pos = self.expect(Tok::LParen)?;
            automata.push(self.automaton(pos)?);
            self.expect(Tok::RParen)?;
            self.expect(Tok::Dot)?;
        }
        self.bump();
        self.keyword("end")?;
        Ok(RawSpec {
            name,
            clocks,
            clocks_pos,
            states,
            states_pos,
            labels,
            labels_pos,
            automata,
        })
    }

    fn automaton(&mut self, pos: Pos) -> PResult<RawAutomaton> {
        let locations_pos = self.keyword("Locations")?;
        let locations = self.idlist()?;
        let labels_pos = self.keyword("Labels")?;
        let labels = self.idlist()?;
        self.keyword("Invariants")?;
        let mut invariants = Vec::new();
        while !self.at_keyword("nil") {
            let location = self.ident()?;
            self.expect(Tok::Colon)?;
            let constraint = self.constraint()?;
            invariants.push(RawInvariant {
                location,
                constraint,
            });
        }
        self.bump();
        self.keyword("Transitions")?;
        let mut transitions = Vec::new();
        while !self.at_keyword("nil") {
            transitions.push(self.transition()?);
        }
        self.bump();
        Ok(RawAutomaton {
            pos,
            locations,
            locations_pos,
            labels,
            labels_pos,
            invariants,
            transitions,
        })
    }

    fn transition(&mut self) -> PResult<RawTransition> {
        let source = self.ident()?;
        let pos = source.pos;
        self.expect(Tok::Comma)?;
        let label = self.ident()?;
        self.expect(Tok::Colon)?;
        let guard = self.constraint()?;
        self.expect(Tok::Comma)?;
        let resets = self.idlist()?;
        self.expect(Tok::Comma)?;
        let target = self.ident()?;
        self.expect(Tok::Dot)?;
        Ok(RawTransition {
            source,
            label,
            guard,
            resets,
            target,
            pos,
        })
    }

    /// `(atom "^")* "true"`
    pub fn constraint(&mut self) -> PResult<RawConstraint> {
        let mut atoms = Vec::new();
        while !self.at_keyword("true") {
            atoms.push(self.atom()?);
            self.expect(Tok::Caret)?;
        }
        self.bump();
        Ok(RawConstraint { atoms })
    }

    fn atom(&mut self) -> PResult<RawAtom> {
        let lhs = match self.peek().tok {
            Tok::Ident(_) => self.ident()?,
            _ => return self.error("a clock constraint or `true`"),
        };
        let pos = lhs.pos;
        let rhs = if self.peek().tok == Tok::Minus {
            self.bump();
            Some(self.ident()?)
        } else {
            None
        };
        let op = match self.peek().tok {
            Tok::Lt => Op::Lt,
            Tok::Le => Op::Le,
            Tok::Eq => Op::Eq,
            Tok::Ge => Op::Ge,
            Tok::Gt => Op::Gt,
            _ => return self.error("a comparison operator (<, <=, =, >=, >)"),
        };
        self.bump();
        let negative = if self.peek().tok == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let constant = match self.peek().tok {
            Tok::Number(n) => {
                self.bump();
                if negative {
                    -n
                } else {
                    n
                }
            }
            _ => return self.error("a number"),
        };
        Ok(RawAtom {
            lhs,
            rhs,
            op,
            constant,
            pos,
        })
    }

    /// `"go" "(" locvec "/" constraint "," locvec "/" constraint ")"`
    pub fn query(&mut self) -> PResult<RawQuery> {
        self.keyword("go")?;
        self.expect(Tok::LParen)?;
        let source = self.query_end()?;
        self.expect(Tok::Comma)?;
        let target = self.query_end()?;
        self.expect(Tok::RParen)?;
        Ok(RawQuery { source, target })
    }

    /// `(ident ".")+ "nil" "/" constraint`
    fn query_end(&mut self) -> PResult<RawEnd> {
        let pos = self.peek().pos;
        let mut locations = vec![self.ident()?];
        self.expect(Tok::Dot)?;
        while !self.at_keyword("nil") {
            locations.push(self.ident()?);
            self.expect(Tok::Dot)?;
        }
        self.bump();
        self.expect(Tok::Slash)?;
        let constraint = self.constraint()?;
        Ok(RawEnd {
            locations,
            pos,
            constraint,
        })
    }
}
