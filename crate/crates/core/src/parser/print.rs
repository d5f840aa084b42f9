//! Renders networks and queries back into the text format.

use std::fmt::Write;

use crate::model::{format_constant, Atom, ClockConstraint, Network};

use super::{Query, StatePattern};

fn atom(net: &Network, a: &Atom) -> String {
    let c = format_constant(net.scale, a.constant);
    match a.rhs {
        Some(r) => format!(
            "{} - {}{}{c}",
            net.clock_name(a.lhs),
            net.clock_name(r),
            a.op
        ),
        None => format!("{}{}{c}", net.clock_name(a.lhs), a.op),
    }
}

/// `atom ^ atom ^ true`, constants in source units.
pub fn print_constraint(net: &Network, c: &ClockConstraint) -> String {
    let mut out = String::new();
    for a in &c.atoms {
        out.push_str(&atom(net, a));
        out.push_str(" ^ ");
    }
    out.push_str("true");
    out
}

fn list<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let mut out: Vec<&str> = names.into_iter().collect();
    out.push("nil");
    out.join(" ")
}

pub fn print_network(net: &Network) -> String {
    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, "specification {}", net.name);
    let _ = writeln!(
        w,
        "Clocks\n  {}",
        list(net.clocks.iter().map(String::as_str))
    );
    let _ = writeln!(
        w,
        "States\n  {}",
        list(net.locations.iter().map(String::as_str))
    );
    let _ = writeln!(
        w,
        "Labels\n  {}",
        list(net.labels.iter().map(String::as_str))
    );
    let _ = writeln!(w, "Automata");
    for a in &net.automata {
        let _ = writeln!(w, "  (");
        let locs = a.locations.iter().map(|l| net.location_name(*l));
        let _ = writeln!(w, "    Locations\n      {}", list(locs));
        let labels = a.alphabet.iter().map(|l| net.label_name(*l));
        let _ = writeln!(w, "    Labels\n      {}", list(labels));
        let _ = writeln!(w, "    Invariants");
        for (loc, c) in &a.invariants {
            let _ = writeln!(
                w,
                "      {} : {}",
                net.location_name(*loc),
                print_constraint(net, c)
            );
        }
        let _ = writeln!(w, "      nil");
        let _ = writeln!(w, "    Transitions");
        for t in &a.transitions {
            let resets = list(t.resets.iter().map(|c| net.clock_name(*c)));
            let _ = writeln!(
                w,
                "      {} , {} : {}, {resets}, {} .",
                net.location_name(t.source),
                net.label_name(t.label),
                print_constraint(net, &t.guard),
                net.location_name(t.target)
            );
        }
        let _ = writeln!(w, "      nil");
        let _ = writeln!(w, "    ) .");
    }
    let _ = writeln!(w, "  nil");
    let _ = writeln!(w, "end");
    s
}

fn pattern(net: &Network, p: &StatePattern) -> String {
    format!(
        "{}.nil/{}",
        net.format_locations(&p.locations),
        print_constraint(net, &p.constraint)
    )
}

pub fn print_query(net: &Network, q: &Query) -> String {
    format!(
        "go({}, {})",
        pattern(net, &q.source),
        pattern(net, &q.target)
    )
}

#[cfg(test)]
mod tests {
    use super::super::{parse_query, parse_spec};
    use super::*;

    const SPEC: &str = "specification s
        Clocks x y nil States a b nil Labels go nil
        Automata
        ( Locations a b nil Labels go nil
          Invariants a : true b : x<=2.5 ^ true nil
          Transitions a , go : x - y<-1 ^ y=3 ^ true, x y nil, b . b , go : true, nil, a . nil ) .
        nil end";

    #[test]
    fn network_round_trip() {
        let net = parse_spec(SPEC).unwrap();
        let text = print_network(&net);
        assert!(
            text.contains("x - y<-1 ^ y<=3 ^ y>=3 ^ true, x y nil, b ."),
            "{text}"
        );
        assert!(text.contains("b : x<=2.5 ^ true"));
        assert!(text.contains("b , go : true, nil, a ."));
        assert_eq!(parse_spec(&text).unwrap(), net);
    }

    #[test]
    fn query_round_trip() {
        let net = parse_spec(SPEC).unwrap();
        let q = parse_query("go(a.nil/true, b.nil/x - y>=0.5 ^ true)", &net).unwrap();
        let text = print_query(&net, &q);
        assert_eq!(text, "go(a.nil/true, b.nil/x - y>=0.5 ^ true)");
        assert_eq!(parse_query(&text, &net).unwrap(), q);
    }
}
