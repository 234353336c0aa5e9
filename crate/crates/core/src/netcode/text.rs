//! Instance text format.
//!
//! ```text
//! node <id>
//! edge <id> <src> <dst> <capacity|inf>
//! pair <i> <s> <t> <bits>
//! ```
//!
//! Capacities are integers, fractions `p/q` or decimals. Pairs are numbered
//! from 1 and must appear in order. Injector nodes are not written; they are
//! added when the instance is built.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CommInstance, CommInstanceBuilder, NetcodeError};
use crate::flow::Capacity;
use crate::scalar::parse_rational;

fn err(line_no: usize, msg: impl std::fmt::Display) -> NetcodeError {
    NetcodeError::Parse(format!("line {line_no}: {msg}"))
}

pub fn parse_instance(text: &str) -> Result<CommInstance, NetcodeError> {
    let mut b = CommInstanceBuilder::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut pairs = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let node = |name: &str| ids.get(name).copied().ok_or_else(|| err(line_no, format!("unknown node `{name}`")));
        match fields.as_slice() {
            ["node", id] => {
                if ids.contains_key(*id) {
                    return Err(err(line_no, format!("duplicate node `{id}`")));
                }
                ids.insert(id.to_string(), b.add_node(*id));
            }
            ["edge", id, src, dst, cap] => {
                let capacity = if *cap == "inf" {
                    Capacity::Infinite
                } else {
                    Capacity::Finite(parse_rational(cap).ok_or_else(|| err(line_no, format!("bad capacity `{cap}`")))?)
                };
                let (s, d) = (node(src)?, node(dst)?);
                b.add_edge(*id, s, d, capacity);
            }
            ["pair", idx, s, t, bits] => {
                if idx.parse::<usize>().ok() != Some(pairs + 1) {
                    return Err(err(line_no, format!("expected pair {}, found `{idx}`", pairs + 1)));
                }
                let bits = bits.parse().map_err(|_| err(line_no, format!("bad bit width `{bits}`")))?;
                let (s, t) = (node(s)?, node(t)?);
                b.add_pair(s, t, bits);
                pairs += 1;
            }
            _ => return Err(err(line_no, format!("unrecognised record `{line}`"))),
        }
    }
    b.build()
}

pub fn write_instance(inst: &CommInstance) -> String {
    let mut out = String::new();
    for (v, name) in inst.nodes().iter().enumerate() {
        if !inst.is_injector(v) {
            writeln!(out, "node {name}").unwrap();
        }
    }
    for e in inst.edges().iter().filter(|e| e.injector_of.is_none()) {
        writeln!(out, "edge {} {} {} {}", e.name, inst.nodes()[e.src], inst.nodes()[e.dst], e.capacity).unwrap();
    }
    for (i, p) in inst.pairs().iter().enumerate() {
        writeln!(out, "pair {} {} {} {}", i + 1, inst.nodes()[p.source], inst.nodes()[p.sink], p.bits).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    const SHARED: &str = "\
# two commodities over one unit edge
node a
node b
node c
edge e1 a b 1
edge e2 b c 3/2
pair 1 a c 1
pair 2 b c 2
";

    #[test]
    fn round_trip() {
        let inst = parse_instance(SHARED).unwrap();
        assert_eq!(inst.pairs().len(), 2);
        assert_eq!(inst.edge(1).capacity, Capacity::Finite(ratio(3, 2)));
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(parse_instance("node a\nnode a").is_err());
        assert!(parse_instance("node a\nedge e a b 1").is_err());
        assert!(parse_instance("node a\nnode b\nedge e a b x").is_err());
        assert!(parse_instance("node a\nnode b\npair 2 a b 1").is_err());
        assert!(parse_instance("wire a b").is_err());
    }
}
