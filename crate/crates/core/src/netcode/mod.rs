//! k-pairs communication instances, network-coding solutions and their
//! exact execution.

mod measure;
mod text;

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use measure::{
    edge_distributions, entropy_from_counts, measure_rate, tuple as message_tuple, verify_correctness, Correctness, Counterexample,
    Distributions, EdgeReport, RateReport, DEFAULT_BUDGET, ENTROPY_TOLERANCE,
};
pub use text::{parse_instance, write_instance};

use crate::bits::BitString;
use crate::flow::{Capacity, Commodity, FlowEdge, FlowError, FlowInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetcodeError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("graph has a directed cycle")]
    Cyclic,
    #[error("edge `{0}` has negative capacity")]
    NegativeCapacity(String),
    #[error("pair {0}: source and sink must be distinct existing nodes")]
    BadPair(usize),
    #[error("pair {pair}: message has {got} bits, expected {expected}")]
    MessageWidth { pair: usize, expected: usize, got: usize },
    #[error("expected {expected} messages, got {got}")]
    MessageCount { expected: usize, got: usize },
    #[error("edge `{edge}`: message {message} is outside its alphabet")]
    AlphabetMismatch { edge: String, message: String },
    #[error("edge `{0}` has no function")]
    MissingFunction(String),
    #[error("pair {0} has no decoder")]
    MissingDecoder(usize),
    #[error("`{name}`: {reason}")]
    Function { name: String, reason: String },
    #[error("enumeration needs {bits} message bits, budget is {budget}")]
    BudgetExceeded { bits: usize, budget: usize },
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommEdge {
    pub name: String,
    pub src: usize,
    pub dst: usize,
    pub capacity: Capacity,
    /// Set on the auto-added edge `S_i -> s_i` of pair `i`.
    pub injector_of: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair {
    pub source: usize,
    pub sink: usize,
    /// Message width `b_i`; `A(i) = {0,1}^{b_i}`.
    pub bits: usize,
    pub injector: usize,
    pub injector_edge: usize,
}

/// Directed acyclic k-pairs network. Each pair gets an injector node `S_i`
/// joined to its source by an infinite-capacity edge carrying `A_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommInstance {
    nodes: Vec<String>,
    injector_node: Vec<bool>,
    edges: Vec<CommEdge>,
    pairs: Vec<Pair>,
    /// In-edges ordered by the topological position of their tails, then by
    /// edge index. Edge functions see their inputs in this order.
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    order: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct CommInstanceBuilder {
    nodes: Vec<String>,
    edges: Vec<(String, usize, usize, Capacity)>,
    pairs: Vec<(usize, usize, usize)>,
}

impl CommInstanceBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> usize {
        self.nodes.push(name.into());
        self.nodes.len() - 1
    }

    pub fn add_edge(&mut self, name: impl Into<String>, src: usize, dst: usize, capacity: Capacity) -> usize {
        self.edges.push((name.into(), src, dst, capacity));
        self.edges.len() - 1
    }

    pub fn add_pair(&mut self, source: usize, sink: usize, bits: usize) -> usize {
        self.pairs.push((source, sink, bits));
        self.pairs.len() - 1
    }

    pub fn build(self) -> Result<CommInstance, NetcodeError> {
        let mut names = BTreeSet::new();
        for n in &self.nodes {
            if !names.insert(n.clone()) {
                return Err(NetcodeError::DuplicateNode(n.clone()));
            }
        }
        let mut nodes = self.nodes;
        let mut injector_node = vec![false; nodes.len()];
        let mut edges = Vec::with_capacity(self.edges.len() + self.pairs.len());
        for (name, src, dst, capacity) in self.edges {
            for v in [src, dst] {
                if v >= nodes.len() {
                    return Err(NetcodeError::UnknownNode(format!("#{v}")));
                }
            }
            if capacity.finite().is_some_and(num_traits::Signed::is_negative) {
                return Err(NetcodeError::NegativeCapacity(name));
            }
            edges.push(CommEdge { name, src, dst, capacity, injector_of: None });
        }
        let edge_names: BTreeSet<String> = edges.iter().map(|e| e.name.clone()).collect();
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for (i, (source, sink, bits)) in self.pairs.into_iter().enumerate() {
            if source >= nodes.len() || sink >= nodes.len() || source == sink {
                return Err(NetcodeError::BadPair(i));
            }
            let injector = nodes.len();
            nodes.push(fresh_name(&names, &format!("S{}", i + 1)));
            injector_node.push(true);
            let injector_edge = edges.len();
            edges.push(CommEdge {
                name: fresh_name(&edge_names, &format!("inj{}", i + 1)),
                src: injector,
                dst: source,
                capacity: Capacity::Infinite,
                injector_of: Some(i),
            });
            pairs.push(Pair { source, sink, bits, injector, injector_edge });
        }

        let n = nodes.len();
        let mut out_edges = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.src].push(i);
            indeg[e.dst] += 1;
        }
        let mut heap: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            for &e in &out_edges[v] {
                let w = edges[e].dst;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    heap.push(Reverse(w));
                }
            }
        }
        if order.len() != n {
            return Err(NetcodeError::Cyclic);
        }
        let mut position = vec![0; n];
        for (p, &v) in order.iter().enumerate() {
            position[v] = p;
        }
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            in_edges[e.dst].push(i);
        }
        for list in &mut in_edges {
            list.sort_by_key(|&e| (position[edges[e].src], e));
        }
        Ok(CommInstance { nodes, injector_node, edges, pairs, in_edges, out_edges, order })
    }
}

fn fresh_name(taken: &BTreeSet<String>, base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

impl CommInstance {
    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn is_injector(&self, v: usize) -> bool {
        self.injector_node[v]
    }

    pub fn edges(&self) -> &[CommEdge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &CommEdge {
        &self.edges[e]
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn out_edges(&self, v: usize) -> &[usize] {
        &self.out_edges[v]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn find_node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn find_edge(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    /// Edges other than the injector edges.
    pub fn network_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].injector_of.is_none())
    }

    pub fn message_bits(&self) -> usize {
        self.pairs.iter().map(|p| p.bits).sum()
    }
}

/// Message set `Γ(e)` of an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Alphabet {
    /// All strings of exactly this many bits.
    Bits(usize),
    /// An explicit finite set (e.g. the codewords of a prefix-free code).
    Set(BTreeSet<BitString>),
}

impl Alphabet {
    pub fn contains(&self, m: &BitString) -> bool {
        match self {
            Alphabet::Bits(w) => m.len() == *w,
            Alphabet::Set(s) => s.contains(m),
        }
    }

    /// `log2 |Γ(e)|`.
    pub fn log_size(&self) -> f64 {
        match self {
            Alphabet::Bits(w) => *w as f64,
            Alphabet::Set(s) => (s.len() as f64).log2(),
        }
    }
}

pub type RuleFn = Arc<dyn Fn(&[BitString]) -> Result<BitString, String> + Send + Sync>;

/// Function computing an edge message (or a decoder output) from the
/// messages on the in-edges of the tail node.
#[derive(Clone)]
pub enum EdgeFn {
    Table(BTreeMap<Vec<BitString>, BitString>),
    Rule { name: String, f: RuleFn },
}

impl EdgeFn {
    pub fn rule(name: impl Into<String>, f: impl Fn(&[BitString]) -> Result<BitString, String> + Send + Sync + 'static) -> Self {
        EdgeFn::Rule { name: name.into(), f: Arc::new(f) }
    }

    /// Copy in-edge `index`.
    pub fn forward(index: usize) -> Self {
        Self::rule(format!("forward[{index}]"), move |m| {
            m.get(index).cloned().ok_or_else(|| format!("no in-edge {index}"))
        })
    }

    pub fn constant(message: BitString) -> Self {
        Self::rule(format!("const {message}"), move |_| Ok(message.clone()))
    }

    pub fn name(&self) -> String {
        match self {
            EdgeFn::Table(t) => format!("table[{}]", t.len()),
            EdgeFn::Rule { name, .. } => name.clone(),
        }
    }

    pub fn apply(&self, inputs: &[BitString]) -> Result<BitString, String> {
        match self {
            EdgeFn::Table(t) => t.get(inputs).cloned().ok_or_else(|| {
                let shown: Vec<String> = inputs.iter().map(|m| m.to_string()).collect();
                format!("no table entry for ({})", shown.join(", "))
            }),
            EdgeFn::Rule { f, .. } => f(inputs),
        }
    }
}

impl fmt::Debug for EdgeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Alphabets and functions for every edge plus a decoder per pair. Injector
/// edges carry `A_i` verbatim and need no function.
#[derive(Clone, Debug)]
pub struct CodingSolution {
    pub alphabets: Vec<Alphabet>,
    pub functions: Vec<Option<EdgeFn>>,
    pub decoders: Vec<Option<EdgeFn>>,
}

impl CodingSolution {
    pub fn new(inst: &CommInstance) -> Self {
        let alphabets = inst
            .edges
            .iter()
            .map(|e| match e.injector_of {
                Some(i) => Alphabet::Bits(inst.pairs[i].bits),
                None => Alphabet::Bits(1),
            })
            .collect();
        Self { alphabets, functions: vec![None; inst.edges.len()], decoders: vec![None; inst.pairs.len()] }
    }

    pub fn set_edge(&mut self, edge: usize, alphabet: Alphabet, f: EdgeFn) {
        self.alphabets[edge] = alphabet;
        self.functions[edge] = Some(f);
    }

    pub fn set_decoder(&mut self, pair: usize, f: EdgeFn) {
        self.decoders[pair] = Some(f);
    }
}

/// One run of a coding solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub edge_messages: Vec<BitString>,
    pub decoded: Vec<BitString>,
}

/// Single topological pass: each node forwards once all its in-edges carry a
/// message; decoders run at the sinks.
pub fn execute(inst: &CommInstance, sol: &CodingSolution, messages: &[BitString]) -> Result<Execution, NetcodeError> {
    if messages.len() != inst.pairs.len() {
        return Err(NetcodeError::MessageCount { expected: inst.pairs.len(), got: messages.len() });
    }
    for (i, (p, m)) in inst.pairs.iter().zip(messages).enumerate() {
        if m.len() != p.bits {
            return Err(NetcodeError::MessageWidth { pair: i, expected: p.bits, got: m.len() });
        }
    }
    let mut edge_messages: Vec<Option<BitString>> = vec![None; inst.edges.len()];
    let mut inputs: Vec<BitString> = Vec::new();
    for &v in &inst.order {
        inputs.clear();
        inputs.extend(inst.in_edges[v].iter().map(|&e| edge_messages[e].clone().expect("topological order")));
        for &e in &inst.out_edges[v] {
            let edge = &inst.edges[e];
            let msg = match edge.injector_of {
                Some(i) => messages[i].clone(),
                None => {
                    let f = sol.functions[e].as_ref().ok_or_else(|| NetcodeError::MissingFunction(edge.name.clone()))?;
                    f.apply(&inputs).map_err(|reason| NetcodeError::Function { name: edge.name.clone(), reason })?
                }
            };
            if !sol.alphabets[e].contains(&msg) {
                return Err(NetcodeError::AlphabetMismatch { edge: edge.name.clone(), message: msg.to_string() });
            }
            edge_messages[e] = Some(msg);
        }
    }
    let edge_messages: Vec<BitString> = edge_messages.into_iter().map(Option::unwrap).collect();
    let mut decoded = Vec::with_capacity(inst.pairs.len());
    for (i, p) in inst.pairs.iter().enumerate() {
        let f = sol.decoders[i].as_ref().ok_or(NetcodeError::MissingDecoder(i))?;
        let ins: Vec<BitString> = inst.in_edges[p.sink].iter().map(|&e| edge_messages[e].clone()).collect();
        let out = f
            .apply(&ins)
            .map_err(|reason| NetcodeError::Function { name: format!("decoder {}", i + 1), reason })?;
        decoded.push(out);
    }
    Ok(Execution { edge_messages, decoded })
}

/// Underlying undirected flow instance with the same capacities and pairs.
/// Injector nodes and their edges are dropped unless `keep_injectors`;
/// antiparallel edges become parallel undirected edges.
pub fn undirect(inst: &CommInstance, keep_injectors: bool) -> Result<FlowInstance, NetcodeError> {
    let keep: Vec<bool> = (0..inst.nodes.len()).map(|v| keep_injectors || !inst.injector_node[v]).collect();
    let mut index = vec![usize::MAX; inst.nodes.len()];
    let mut nodes = Vec::new();
    for v in 0..inst.nodes.len() {
        if keep[v] {
            index[v] = nodes.len();
            nodes.push(inst.nodes[v].clone());
        }
    }
    let edges = inst
        .edges
        .iter()
        .filter(|e| keep[e.src] && keep[e.dst])
        .map(|e| FlowEdge { name: e.name.clone(), u: index[e.src], v: index[e.dst], capacity: e.capacity.clone() })
        .collect();
    let commodities = inst
        .pairs
        .iter()
        .map(|p| Commodity { source: index[p.source], sink: index[p.sink] })
        .collect();
    Ok(FlowInstance::new(nodes, edges, commodities)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn unit() -> Capacity {
        Capacity::Finite(ratio(1, 1))
    }

    #[test]
    fn forwarding_on_single_edge() {
        let mut b = CommInstanceBuilder::new();
        let s = b.add_node("s");
        let t = b.add_node("t");
        let e = b.add_edge("e", s, t, Capacity::Finite(ratio(4, 1)));
        b.add_pair(s, t, 4);
        let inst = b.build().unwrap();
        let mut sol = CodingSolution::new(&inst);
        sol.set_edge(e, Alphabet::Bits(4), EdgeFn::forward(0));
        sol.set_decoder(0, EdgeFn::forward(0));
        let msg = BitString::parse("0110").unwrap();
        let run = execute(&inst, &sol, std::slice::from_ref(&msg)).unwrap();
        assert_eq!(run.decoded, vec![msg.clone()]);
        assert_eq!(run.edge_messages[e], msg);
        assert_eq!(execute(&inst, &sol, std::slice::from_ref(&msg)).unwrap(), run);
    }

    #[test]
    fn errors_are_reported() {
        let mut b = CommInstanceBuilder::new();
        let s = b.add_node("s");
        let t = b.add_node("t");
        let e = b.add_edge("e", s, t, unit());
        b.add_pair(s, t, 1);
        let inst = b.build().unwrap();
        let mut sol = CodingSolution::new(&inst);
        let one = BitString::parse("1").unwrap();
        assert!(matches!(execute(&inst, &sol, std::slice::from_ref(&one)), Err(NetcodeError::MissingFunction(_))));
        sol.set_edge(e, Alphabet::Bits(2), EdgeFn::forward(0));
        sol.set_decoder(0, EdgeFn::forward(0));
        assert!(matches!(execute(&inst, &sol, std::slice::from_ref(&one)), Err(NetcodeError::AlphabetMismatch { .. })));
        assert!(matches!(
            execute(&inst, &sol, &[BitString::parse("10").unwrap()]),
            Err(NetcodeError::MessageWidth { .. })
        ));

        let mut b = CommInstanceBuilder::new();
        let x = b.add_node("x");
        let y = b.add_node("y");
        b.add_edge("a", x, y, unit());
        b.add_edge("b", y, x, unit());
        assert_eq!(b.build().unwrap_err(), NetcodeError::Cyclic);
    }

    #[test]
    fn undirect_keeps_parallel_edges() {
        let mut b = CommInstanceBuilder::new();
        let u = b.add_node("u");
        let v = b.add_node("v");
        b.add_edge("a", u, v, unit());
        b.add_edge("b", u, v, Capacity::Finite(ratio(2, 1)));
        b.add_pair(u, v, 1);
        let inst = b.build().unwrap();
        let flat = undirect(&inst, false).unwrap();
        assert_eq!(flat.nodes().len(), 2);
        assert_eq!(flat.edges().len(), 2);
        assert_eq!(flat.edges()[1].capacity, Capacity::Finite(ratio(2, 1)));
        let kept = undirect(&inst, true).unwrap();
        assert_eq!(kept.nodes().len(), 3);
        assert_eq!(kept.edges().len(), 3);
        assert!(kept.edges()[2].capacity.is_infinite());
    }
}
