//! Line-oriented circuit format.
//!
//! ```text
//! # comment
//! node <id> input <index>
//! node <id> output <index> [<arity> <table-hex>]
//! node <id> gate <arity> <table-hex>
//! node <id> const <0|1>
//! edge <src> <dst>
//! ```
//!
//! Indices are 1-based. Node records appear in topological order. An output
//! record without a table is a copy of its single predecessor.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Circuit, CircuitError, GateFn, Node, NodeKind};

fn err(line_no: usize, msg: impl std::fmt::Display) -> CircuitError {
    CircuitError::Parse(format!("line {line_no}: {msg}"))
}

fn parse_index(line_no: usize, s: &str) -> Result<usize, CircuitError> {
    match s.parse::<usize>() {
        Ok(i) if i >= 1 => Ok(i - 1),
        _ => Err(err(line_no, format!("bad 1-based index `{s}`"))),
    }
}

fn parse_arity(line_no: usize, s: &str) -> Result<usize, CircuitError> {
    s.parse().map_err(|_| err(line_no, format!("bad arity `{s}`")))
}

pub fn parse_circuit(text: &str) -> Result<Circuit, CircuitError> {
    let mut nodes = Vec::new();
    let mut positions: HashMap<String, usize> = HashMap::new();
    let mut raw_edges = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["node", id, rest @ ..] => {
                let kind = match rest {
                    ["input", idx] => NodeKind::Input(parse_index(line_no, idx)?),
                    ["output", idx] => NodeKind::Output { index: parse_index(line_no, idx)?, func: GateFn::identity() },
                    ["output", idx, arity, hex] => NodeKind::Output {
                        index: parse_index(line_no, idx)?,
                        func: GateFn::from_hex(parse_arity(line_no, arity)?, hex).map_err(|e| err(line_no, e))?,
                    },
                    ["gate", arity, hex] => {
                        NodeKind::Gate(GateFn::from_hex(parse_arity(line_no, arity)?, hex).map_err(|e| err(line_no, e))?)
                    }
                    ["const", "0"] => NodeKind::Const(false),
                    ["const", "1"] => NodeKind::Const(true),
                    _ => return Err(err(line_no, format!("malformed node record `{line}`"))),
                };
                if positions.insert(id.to_string(), nodes.len()).is_some() {
                    return Err(err(line_no, format!("duplicate node `{id}`")));
                }
                nodes.push(Node { name: id.to_string(), kind });
            }
            ["edge", src, dst] => raw_edges.push((line_no, src.to_string(), dst.to_string())),
            _ => return Err(err(line_no, format!("unrecognised record `{line}`"))),
        }
    }

    let mut edges = Vec::with_capacity(raw_edges.len());
    for (line_no, s, d) in raw_edges {
        let lookup = |name: &str| {
            positions
                .get(name)
                .copied()
                .ok_or_else(|| err(line_no, format!("unknown node `{name}`")))
        };
        edges.push((lookup(&s)?, lookup(&d)?));
    }
    Circuit::new(nodes, &edges)
}

pub fn write_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# circuit: {} inputs, {} outputs, {} nodes, {} edges",
        c.n_in(),
        c.n_out(),
        c.len(),
        c.edge_count()
    )
    .unwrap();
    for node in c.nodes() {
        match &node.kind {
            NodeKind::Input(i) => writeln!(out, "node {} input {}", node.name, i + 1),
            NodeKind::Output { index, func } if *func == GateFn::identity() => {
                writeln!(out, "node {} output {}", node.name, index + 1)
            }
            NodeKind::Output { index, func } => writeln!(
                out,
                "node {} output {} {} {}",
                node.name,
                index + 1,
                func.arity(),
                func.to_hex()
            ),
            NodeKind::Gate(f) => writeln!(out, "node {} gate {} {}", node.name, f.arity(), f.to_hex()),
            NodeKind::Const(b) => writeln!(out, "node {} const {}", node.name, u8::from(*b)),
        }
        .unwrap();
    }
    for (s, d) in c.edges() {
        writeln!(out, "edge {} {}", c.node(s).name, c.node(d).name).unwrap();
    }
    out
}
