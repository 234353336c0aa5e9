//! Boolean circuits with arbitrary gates.
//!
//! A [`Circuit`] stores its nodes in a fixed topological order: inputs first
//! (input `i` at position `i`), outputs last, everything else in between.
//! Every gate reads its predecessors in that order, so a gate's truth table is
//! indexed by the predecessor bits taken in ascending node position.

mod depth3;
mod gate;
mod graph;
mod text;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use depth3::{split_high_degree, Layer, Layers};
pub use gate::{GateFn, MAX_ARITY};
pub use graph::{ball_radius_bound, ball_size, degree_profile, undirected_distances, DegreeProfile, NodeDegree};
pub use text::{parse_circuit, write_circuit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate arity {arity} exceeds the limit of {max}")]
    ArityTooLarge { arity: usize, max: usize },
    #[error("truth table length {len} is not a power of two")]
    TableLength { len: usize },
    #[error("input has {got} bits, circuit expects {expected}")]
    InputLength { expected: usize, got: usize },
    #[error("node `{node}` has arity {arity} but in-degree {in_degree}")]
    ArityMismatch { node: String, arity: usize, in_degree: usize },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("cannot hardwire output node `{0}`")]
    HardwireOutput(String),
    #[error("node `{0}` is assigned more than once")]
    DuplicateAssignment(String),
    #[error("circuit is not depth-3 shaped: {0}")]
    NotDepth3(String),
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Position of a node in the circuit's topological order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Input gate `x_{index+1}`.
    Input(usize),
    /// Output gate `y_{index+1}`; it computes `func` of its predecessors.
    Output { index: usize, func: GateFn },
    Gate(GateFn),
    Const(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

impl Node {
    pub fn func(&self) -> Option<&GateFn> {
        match &self.kind {
            NodeKind::Gate(f) | NodeKind::Output { func: f, .. } => Some(f),
            _ => None,
        }
    }

    pub fn is_input(&self) -> bool {
        matches!(self.kind, NodeKind::Input(_))
    }

    pub fn is_output(&self) -> bool {
        matches!(self.kind, NodeKind::Output { .. })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Circuit {
    nodes: Vec<Node>,
    preds: Vec<Vec<NodeId>>,
    succs: Vec<Vec<NodeId>>,
    n_in: usize,
    n_out: usize,
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Circuit")
            .field("nodes", &self.nodes.len())
            .field("edges", &self.edge_count())
            .field("n_in", &self.n_in)
            .field("n_out", &self.n_out)
            .finish()
    }
}

impl Circuit {
    /// Build and validate a circuit. `nodes` must already be in topological
    /// order and `edges` are `(src, dst)` positions.
    pub fn new(nodes: Vec<Node>, edges: &[(usize, usize)]) -> Result<Self, CircuitError> {
        let t = nodes.len();
        let mut names = HashSet::with_capacity(t);
        for node in &nodes {
            if !names.insert(node.name.as_str()) {
                return Err(CircuitError::Invalid(format!("duplicate node name `{}`", node.name)));
            }
        }

        let mut preds = vec![Vec::new(); t];
        let mut succs = vec![Vec::new(); t];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(s, d) in edges {
            if s >= t || d >= t {
                return Err(CircuitError::Invalid(format!("edge ({s}, {d}) out of range")));
            }
            if s >= d {
                return Err(CircuitError::Invalid(format!(
                    "edge `{}` -> `{}` contradicts the topological order",
                    nodes[s].name, nodes[d].name
                )));
            }
            if !seen.insert((s, d)) {
                return Err(CircuitError::Invalid(format!(
                    "parallel edge `{}` -> `{}`",
                    nodes[s].name, nodes[d].name
                )));
            }
            preds[d].push(NodeId(s));
            succs[s].push(NodeId(d));
        }
        for p in preds.iter_mut().chain(succs.iter_mut()) {
            p.sort_unstable();
        }

        let n_in = nodes.iter().filter(|n| n.is_input()).count();
        let n_out = nodes.iter().filter(|n| n.is_output()).count();
        for (pos, node) in nodes.iter().enumerate() {
            match &node.kind {
                NodeKind::Input(index) => {
                    if *index != pos {
                        return Err(CircuitError::Invalid(format!(
                            "input `{}` (index {}) must sit at position {}",
                            node.name,
                            index + 1,
                            index + 1
                        )));
                    }
                    if !preds[pos].is_empty() {
                        return Err(CircuitError::Invalid(format!("input `{}` has incoming edges", node.name)));
                    }
                }
                NodeKind::Output { index, func } => {
                    if pos != t - n_out + index {
                        return Err(CircuitError::Invalid(format!(
                            "output `{}` (index {}) must be among the last {} nodes in index order",
                            node.name,
                            index + 1,
                            n_out
                        )));
                    }
                    if !succs[pos].is_empty() {
                        return Err(CircuitError::Invalid(format!("output `{}` has outgoing edges", node.name)));
                    }
                    check_arity(node, func, preds[pos].len())?;
                }
                NodeKind::Gate(func) => check_arity(node, func, preds[pos].len())?,
                NodeKind::Const(_) => {
                    if !preds[pos].is_empty() {
                        return Err(CircuitError::Invalid(format!("constant `{}` has incoming edges", node.name)));
                    }
                }
            }
        }
        Ok(Self { nodes, preds, succs, n_in, n_out })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn preds(&self, id: NodeId) -> &[NodeId] {
        &self.preds[id.0]
    }

    pub fn succs(&self, id: NodeId) -> &[NodeId] {
        &self.succs[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn input(&self, index: usize) -> NodeId {
        assert!(index < self.n_in);
        NodeId(index)
    }

    pub fn output(&self, index: usize) -> NodeId {
        assert!(index < self.n_out);
        NodeId(self.nodes.len() - self.n_out + index)
    }

    pub fn inputs(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n_in).map(NodeId)
    }

    pub fn outputs(&self) -> impl Iterator<Item = NodeId> {
        let t = self.nodes.len();
        (t - self.n_out..t).map(NodeId)
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name).map(NodeId)
    }

    /// All edges as `(src, dst)`, grouped by destination.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.preds
            .iter()
            .enumerate()
            .flat_map(|(d, ps)| ps.iter().map(move |&s| (s, NodeId(d))))
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    /// Number of non-input nodes.
    pub fn gate_count(&self) -> usize {
        self.nodes.len() - self.n_in
    }

    /// Values of every node on input `x`.
    pub fn evaluate_all(&self, x: &[bool]) -> Result<Vec<bool>, CircuitError> {
        if x.len() != self.n_in {
            return Err(CircuitError::InputLength { expected: self.n_in, got: x.len() });
        }
        let mut values = vec![false; self.nodes.len()];
        self.evaluate_into(x, &mut values);
        Ok(values)
    }

    /// Outputs `y_1..y_m` on input `x`.
    pub fn evaluate(&self, x: &[bool]) -> Result<Vec<bool>, CircuitError> {
        let values = self.evaluate_all(x)?;
        Ok(self.outputs().map(|o| values[o.0]).collect())
    }

    /// Evaluation into a caller-owned buffer; `x` and `values` must be sized.
    pub fn evaluate_into(&self, x: &[bool], values: &mut [bool]) {
        for (pos, node) in self.nodes.iter().enumerate() {
            values[pos] = match &node.kind {
                NodeKind::Input(i) => x[*i],
                NodeKind::Const(b) => *b,
                NodeKind::Gate(f) | NodeKind::Output { func: f, .. } => {
                    let t = self.preds[pos]
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (i, p)| acc | (usize::from(values[p.0]) << i));
                    f.get(t)
                }
            };
        }
    }

    /// Input bits of the number `x` (bit `i` is `x_{i+1}`) evaluated to outputs.
    pub fn evaluate_u64(&self, x: u64) -> Vec<bool> {
        let bits: Vec<bool> = (0..self.n_in).map(|i| (x >> i) & 1 == 1).collect();
        self.evaluate(&bits).expect("input width matches")
    }

    /// Remove the assigned nodes, substituting their fixed values into every
    /// successor's truth table.
    pub fn hardwire(&self, assignments: &[(NodeId, bool)]) -> Result<Circuit, CircuitError> {
        self.hardwire_with_map(assignments).map(|(c, _)| c)
    }

    /// As [`Circuit::hardwire`], also returning old position -> new id.
    pub fn hardwire_with_map(
        &self,
        assignments: &[(NodeId, bool)],
    ) -> Result<(Circuit, Vec<Option<NodeId>>), CircuitError> {
        let mut fixed: HashMap<usize, bool> = HashMap::with_capacity(assignments.len());
        for &(id, b) in assignments {
            let node = self
                .nodes
                .get(id.0)
                .ok_or_else(|| CircuitError::UnknownNode(format!("#{}", id.0)))?;
            if node.is_output() {
                return Err(CircuitError::HardwireOutput(node.name.clone()));
            }
            if fixed.insert(id.0, b).is_some() {
                return Err(CircuitError::DuplicateAssignment(node.name.clone()));
            }
        }

        let mut map = vec![None; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len() - fixed.len());
        let mut next_input = 0;
        for (pos, node) in self.nodes.iter().enumerate() {
            if fixed.contains_key(&pos) {
                continue;
            }
            map[pos] = Some(NodeId(nodes.len()));
            let restrict = |f: &GateFn| {
                let mut f = f.clone();
                for (i, p) in self.preds[pos].iter().enumerate().rev() {
                    if let Some(&b) = fixed.get(&p.0) {
                        f = f.restrict(i, b);
                    }
                }
                f
            };
            let kind = match &node.kind {
                NodeKind::Input(_) => {
                    next_input += 1;
                    NodeKind::Input(next_input - 1)
                }
                NodeKind::Const(b) => NodeKind::Const(*b),
                NodeKind::Gate(f) => NodeKind::Gate(restrict(f)),
                NodeKind::Output { index, func } => NodeKind::Output { index: *index, func: restrict(func) },
            };
            nodes.push(Node { name: node.name.clone(), kind });
        }
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter_map(|(s, d)| Some((map[s.0]?.0, map[d.0]?.0)))
            .collect();
        Ok((Circuit::new(nodes, &edges)?, map))
    }
}

fn check_arity(node: &Node, func: &GateFn, in_degree: usize) -> Result<(), CircuitError> {
    if func.arity() != in_degree {
        return Err(CircuitError::ArityMismatch {
            node: node.name.clone(),
            arity: func.arity(),
            in_degree,
        });
    }
    Ok(())
}

/// Incremental construction in topological order. Predecessors may be given
/// in any order; the gate table is re-indexed to the canonical order.
#[derive(Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    edges: Vec<(usize, usize)>,
    n_in: usize,
    n_out: usize,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn add_input(&mut self, name: impl Into<String>) -> NodeId {
        self.n_in += 1;
        self.push(name.into(), NodeKind::Input(self.n_in - 1), &[])
    }

    pub fn add_const(&mut self, name: impl Into<String>, value: bool) -> NodeId {
        self.push(name.into(), NodeKind::Const(value), &[])
    }

    pub fn add_gate(&mut self, name: impl Into<String>, preds: &[NodeId], func: GateFn) -> NodeId {
        let (preds, func) = canonical(preds, func);
        self.push(name.into(), NodeKind::Gate(func), &preds)
    }

    pub fn add_output(&mut self, name: impl Into<String>, preds: &[NodeId], func: GateFn) -> NodeId {
        let (preds, func) = canonical(preds, func);
        self.n_out += 1;
        let index = self.n_out - 1;
        self.push(name.into(), NodeKind::Output { index, func }, &preds)
    }

    fn push(&mut self, name: String, kind: NodeKind, preds: &[NodeId]) -> NodeId {
        let id = self.nodes.len();
        self.edges.extend(preds.iter().map(|p| (p.0, id)));
        self.nodes.push(Node { name, kind });
        NodeId(id)
    }

    pub fn build(self) -> Result<Circuit, CircuitError> {
        Circuit::new(self.nodes, &self.edges)
    }
}

fn canonical(preds: &[NodeId], func: GateFn) -> (Vec<NodeId>, GateFn) {
    assert_eq!(preds.len(), func.arity(), "predecessor count must equal gate arity");
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by_key(|&i| preds[i]);
    let sorted = order.iter().map(|&i| preds[i]).collect();
    (sorted, func.permute(&order))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_circuit() -> Circuit {
        let mut b = CircuitBuilder::new();
        let a = b.add_input("a");
        let c = b.add_input("b");
        b.add_output("y", &[a, c], GateFn::xor2());
        b.build().unwrap()
    }

    fn and_then_out() -> (Circuit, NodeId) {
        let mut b = CircuitBuilder::new();
        let a = b.add_input("a");
        let c = b.add_input("b");
        let g = b.add_gate("g", &[a, c], GateFn::and2());
        b.add_output("y", &[g], GateFn::identity());
        (b.build().unwrap(), c)
    }

    #[test]
    fn identity_circuit() {
        let mut b = CircuitBuilder::new();
        let x1 = b.add_input("x1");
        let x2 = b.add_input("x2");
        b.add_output("y1", &[x1], GateFn::identity());
        b.add_output("y2", &[x2], GateFn::identity());
        let c = b.build().unwrap();
        assert_eq!(c.evaluate(&[false, true]).unwrap(), vec![false, true]);
    }

    #[test]
    fn xor_truth_table() {
        let c = xor_circuit();
        assert_eq!(c.evaluate(&[true, true]).unwrap(), vec![false]);
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![true]);
    }

    #[test]
    fn length_mismatch() {
        let c = xor_circuit();
        assert_eq!(
            c.evaluate(&[true]),
            Err(CircuitError::InputLength { expected: 2, got: 1 })
        );
    }

    #[test]
    fn arity_mismatch_rejected() {
        let nodes = vec![
            Node { name: "a".into(), kind: NodeKind::Input(0) },
            Node { name: "y".into(), kind: NodeKind::Output { index: 0, func: GateFn::and2() } },
        ];
        assert!(matches!(
            Circuit::new(nodes, &[(0, 1)]),
            Err(CircuitError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn order_violations_rejected() {
        let nodes = vec![
            Node { name: "a".into(), kind: NodeKind::Input(0) },
            Node { name: "g".into(), kind: NodeKind::Gate(GateFn::identity()) },
            Node { name: "y".into(), kind: NodeKind::Output { index: 0, func: GateFn::identity() } },
        ];
        assert!(Circuit::new(nodes.clone(), &[(2, 1), (0, 2)]).is_err());
        assert!(Circuit::new(nodes.clone(), &[(0, 1), (1, 2)]).is_ok());
        assert!(Circuit::new(nodes, &[(0, 1), (0, 1), (1, 2)]).is_err());
    }

    #[test]
    fn hardwire_and_to_one_is_identity() {
        let (c, b_in) = and_then_out();
        let h = c.hardwire(&[(b_in, true)]).unwrap();
        let g = h.find("g").unwrap();
        assert_eq!(h.node(g).func(), Some(&GateFn::identity()));
        assert_eq!(h.n_in(), 1);
        assert_eq!(h.evaluate(&[true]).unwrap(), vec![true]);
        assert_eq!(h.evaluate(&[false]).unwrap(), vec![false]);
    }

    #[test]
    fn hardwire_and_to_zero_is_constant() {
        let (c, b_in) = and_then_out();
        let h = c.hardwire(&[(b_in, false)]).unwrap();
        let g = h.find("g").unwrap();
        assert_eq!(h.node(g).func(), Some(&GateFn::constant(1, false)));
    }

    #[test]
    fn hardwire_errors() {
        let (c, b_in) = and_then_out();
        let y = c.find("y").unwrap();
        assert!(matches!(c.hardwire(&[(y, true)]), Err(CircuitError::HardwireOutput(_))));
        assert!(matches!(
            c.hardwire(&[(b_in, true), (b_in, false)]),
            Err(CircuitError::DuplicateAssignment(_))
        ));
    }

    #[test]
    fn builder_reorders_predecessors() {
        // g = x1 & !x2, given with predecessors listed as [x2, x1]
        let mut b = CircuitBuilder::new();
        let x1 = b.add_input("x1");
        let x2 = b.add_input("x2");
        let f = GateFn::from_fn(2, |t| t == 2).unwrap(); // first given (x2)=0, second (x1)=1
        b.add_output("y", &[x2, x1], f);
        let c = b.build().unwrap();
        assert_eq!(c.evaluate(&[true, false]).unwrap(), vec![true]);
        assert_eq!(c.evaluate(&[false, true]).unwrap(), vec![false]);
    }
}
