//! Maximum concurrent multicommodity flow on undirected capacitated graphs.

mod simplex;

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

pub use simplex::{solve, Constraint, LinearProgram, LpError, LpOutcome, PivotRule, Relation};

use crate::scalar::{format_rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("edge `{0}` has an endpoint outside the graph")]
    BadEndpoint(String),
    #[error("edge `{0}` has negative capacity")]
    NegativeCapacity(String),
    #[error("commodity {0} has an endpoint outside the graph")]
    BadCommodity(usize),
    #[error("no commodities")]
    NoCommodities,
    #[error("every commodity is degenerate or unconstrained; the rate is unbounded")]
    Unbounded,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Capacity {
    Finite(BigRational),
    Infinite,
}

impl Capacity {
    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Capacity::Finite(c) => Some(c),
            Capacity::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Capacity::Finite(c) => crate::scalar::ratio_to_f64(c),
            Capacity::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => f.write_str(&format_rational(c)),
            Capacity::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowEdge {
    pub name: String,
    pub u: usize,
    pub v: usize,
    pub capacity: Capacity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Commodity {
    pub source: usize,
    pub sink: usize,
}

/// Undirected multigraph with capacities and unit-demand commodities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowInstance {
    nodes: Vec<String>,
    edges: Vec<FlowEdge>,
    commodities: Vec<Commodity>,
    incident: Vec<Vec<usize>>,
}

impl FlowInstance {
    pub fn new(nodes: Vec<String>, edges: Vec<FlowEdge>, commodities: Vec<Commodity>) -> Result<Self, FlowError> {
        let mut incident = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= nodes.len() || e.v >= nodes.len() {
                return Err(FlowError::BadEndpoint(e.name.clone()));
            }
            if e.capacity.finite().is_some_and(|c| c.is_negative()) {
                return Err(FlowError::NegativeCapacity(e.name.clone()));
            }
            incident[e.u].push(i);
            if e.v != e.u {
                incident[e.v].push(i);
            }
        }
        for (i, c) in commodities.iter().enumerate() {
            if c.source >= nodes.len() || c.sink >= nodes.len() {
                return Err(FlowError::BadCommodity(i));
            }
        }
        Ok(Self { nodes, edges, commodities, incident })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    pub fn find_node(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Same graph and commodities with one capacity replaced.
    pub fn with_capacity(&self, edge: usize, capacity: Capacity) -> Self {
        let mut out = self.clone();
        out.edges[edge].capacity = capacity;
        out
    }

    /// Whether `to` is reachable from `from` over edges of positive capacity.
    pub fn connected(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                return true;
            }
            for &e in &self.incident[v] {
                let edge = &self.edges[e];
                if edge.capacity.finite().is_some_and(|c| c.is_zero()) {
                    continue;
                }
                let w = if edge.u == v { edge.v } else { edge.u };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        false
    }

    /// Unweighted shortest-path distance between two nodes.
    pub fn distance(&self, from: usize, to: usize) -> Option<usize> {
        let mut dist = vec![None; self.nodes.len()];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            if v == to {
                return Some(d);
            }
            for &e in &self.incident[v] {
                let w = if self.edges[e].u == v { self.edges[e].v } else { self.edges[e].u };
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        None
    }
}

/// Direction of travel along an undirected edge `{u, v}`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// From `u` to `v`.
    Forward,
    /// From `v` to `u`.
    Backward,
}

impl Orientation {
    pub fn index(self) -> usize {
        match self {
            Orientation::Forward => 0,
            Orientation::Backward => 1,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CommodityStatus {
    Routed,
    /// Source equals sink; trivially satisfied and left out of the LP.
    Degenerate,
    /// No positive-capacity path; forces the rate to zero.
    Disconnected,
}

/// Per-commodity unit flows and the concurrent rate they achieve.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution<S> {
    /// `flows[i][e][o]`: flow of commodity `i` on edge `e` in orientation `o`.
    pub flows: Vec<Vec<[S; 2]>>,
    pub rate: S,
    pub status: Vec<CommodityStatus>,
    pub rule: PivotRule,
}

impl<S: Scalar> FlowSolution<S> {
    pub fn zero(inst: &FlowInstance) -> Self {
        let k = inst.commodities.len();
        Self {
            flows: vec![vec![[S::zero(), S::zero()]; inst.edges.len()]; k],
            rate: S::zero(),
            status: vec![CommodityStatus::Routed; k],
            rule: PivotRule::default(),
        }
    }

    pub fn flow(&self, commodity: usize, edge: usize, o: Orientation) -> &S {
        &self.flows[commodity][edge][o.index()]
    }

    /// `Σ_i (f^i(u,v) + f^i(v,u))` on one edge.
    pub fn edge_load(&self, edge: usize) -> S {
        self.flows.iter().fold(S::zero(), |acc, f| acc + f[edge][0].clone() + f[edge][1].clone())
    }

    /// Largest rate the flows support: the minimum of `c(e) / load(e)` over
    /// loaded finite edges (`None` if nothing is constrained).
    pub fn supported_rate(&self, inst: &FlowInstance) -> Option<S> {
        let mut best: Option<S> = None;
        for (e, edge) in inst.edges.iter().enumerate() {
            let Some(c) = edge.capacity.finite() else { continue };
            let load = self.edge_load(e);
            if !load.is_positive_tol() {
                continue;
            }
            let r = S::from_rational(c) / load;
            if best.as_ref().is_none_or(|b| r < *b) {
                best = Some(r);
            }
        }
        best
    }
}

#[derive(Copy, Clone, Debug)]
pub struct FlowOptions {
    pub rule: PivotRule,
    /// Remove per-commodity directed cycles (including two-way use of an
    /// edge) after solving.
    pub cancel_cycles: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rule: PivotRule::default(), cancel_cycles: true }
    }
}

pub fn max_concurrent_flow<S: Scalar>(inst: &FlowInstance) -> Result<FlowSolution<S>, FlowError> {
    max_concurrent_flow_with(inst, FlowOptions::default())
}

/// Maximum concurrent flow LP: variables `h^i(e, o) >= 0` and `λ`,
/// conservation with `λ` leaving each source and entering each sink,
/// `Σ_i h^i(e, ·) <= c(e)`, maximise `λ`. Flows are reported as `h / λ`.
pub fn max_concurrent_flow_with<S: Scalar>(inst: &FlowInstance, opts: FlowOptions) -> Result<FlowSolution<S>, FlowError> {
    if inst.commodities.is_empty() {
        return Err(FlowError::NoCommodities);
    }
    let mut sol = FlowSolution::<S>::zero(inst);
    sol.rule = opts.rule;
    for (i, c) in inst.commodities.iter().enumerate() {
        sol.status[i] = if c.source == c.sink {
            CommodityStatus::Degenerate
        } else if !inst.connected(c.source, c.sink) {
            CommodityStatus::Disconnected
        } else {
            CommodityStatus::Routed
        };
    }
    if sol.status.contains(&CommodityStatus::Disconnected) {
        return Ok(sol);
    }
    let active: Vec<usize> = (0..inst.commodities.len()).filter(|&i| sol.status[i] == CommodityStatus::Routed).collect();
    if active.is_empty() {
        return Err(FlowError::Unbounded);
    }

    let m = inst.edges.len();
    let var = |a: usize, e: usize, o: usize| 2 * (a * m + e) + o;
    let lambda = 2 * active.len() * m;
    let mut lp = LinearProgram::<S>::new(lambda + 1);
    lp.objective = vec![(lambda, S::one())];

    for (a, &i) in active.iter().enumerate() {
        let c = inst.commodities[i];
        let component = component_of(inst, c.source);
        for v in 0..inst.nodes.len() {
            // The sink row is implied by the others within the component.
            if !component[v] || v == c.sink {
                continue;
            }
            let mut coeffs = Vec::new();
            for &e in &inst.incident[v] {
                let edge = &inst.edges[e];
                if edge.u == edge.v {
                    continue;
                }
                let (out, inn) = if edge.u == v { (0, 1) } else { (1, 0) };
                coeffs.push((var(a, e, out), S::one()));
                coeffs.push((var(a, e, inn), -S::one()));
            }
            if v == c.source {
                coeffs.push((lambda, -S::one()));
            }
            lp.add(coeffs, Relation::Eq, S::zero());
        }
    }
    for (e, edge) in inst.edges.iter().enumerate() {
        let Some(cap) = edge.capacity.finite() else { continue };
        let coeffs = (0..active.len()).flat_map(|a| [(var(a, e, 0), S::one()), (var(a, e, 1), S::one())]).collect();
        lp.add(coeffs, Relation::Le, S::from_rational(cap));
    }

    match solve(&lp, opts.rule)? {
        LpOutcome::Optimal { x, value } => {
            if !value.is_positive_tol() {
                return Err(FlowError::Lp(LpError::Numerical(format!("optimal rate {value} on connected pairs"))));
            }
            for (a, &i) in active.iter().enumerate() {
                for e in 0..m {
                    for o in 0..2 {
                        sol.flows[i][e][o] = (x[var(a, e, o)].clone() / value.clone()).cleaned();
                    }
                }
            }
            sol.rate = value;
        }
        LpOutcome::Unbounded => return Err(FlowError::Unbounded),
        LpOutcome::Infeasible => {
            return Err(FlowError::Lp(LpError::Numerical("flow LP reported infeasible".into())));
        }
    }
    if opts.cancel_cycles {
        for &i in &active {
            cancel_cycles(inst, &mut sol.flows[i]);
        }
    }
    Ok(sol)
}

fn component_of(inst: &FlowInstance, from: usize) -> Vec<bool> {
    let mut seen = vec![false; inst.nodes.len()];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(v) = stack.pop() {
        for &e in &inst.incident[v] {
            let w = if inst.edges[e].u == v { inst.edges[e].v } else { inst.edges[e].u };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// Cancel every directed cycle in one commodity's flow, including the
/// two-arc cycle of using an edge in both directions. Edge loads never grow
/// and the net flow at every node is unchanged, so the result is acyclic and
/// each arc carries at most one unit.
pub fn cancel_cycles<S: Scalar>(inst: &FlowInstance, flows: &mut [[S; 2]]) {
    for f in flows.iter_mut() {
        for x in f.iter_mut() {
            *x = if x.is_positive_tol() { x.clone() } else { S::zero() };
        }
    }
    let n = inst.nodes.len();
    // arc (e, o) runs from tail to head
    let tail = |e: usize, o: usize| if o == 0 { inst.edges[e].u } else { inst.edges[e].v };
    let head = |e: usize, o: usize| if o == 0 { inst.edges[e].v } else { inst.edges[e].u };
    loop {
        let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, f) in flows.iter().enumerate() {
            for o in 0..2 {
                if f[o].is_positive_tol() {
                    out[tail(e, o)].push((e, o));
                }
            }
        }
        let Some(cycle) = find_cycle(n, &out, head) else { break };
        let delta = cycle
            .iter()
            .map(|&(e, o)| flows[e][o].clone())
            .fold(None::<S>, |m, v| Some(m.map_or(v.clone(), |m| if v < m { v } else { m })))
            .unwrap();
        for &(e, o) in &cycle {
            flows[e][o] = (flows[e][o].clone() - delta.clone()).cleaned();
        }
    }
}

fn find_cycle(
    n: usize,
    out: &[Vec<(usize, usize)>],
    head: impl Fn(usize, usize) -> usize,
) -> Option<Vec<(usize, usize)>> {
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut parent: Vec<Option<((usize, usize), usize)>> = vec![None; n];
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(top) = stack.last_mut() {
            let (v, next) = (top.0, top.1);
            if next < out[v].len() {
                top.1 += 1;
                let arc = out[v][next];
                let w = head(arc.0, arc.1);
                match state[w] {
                    0 => {
                        state[w] = 1;
                        parent[w] = Some((arc, v));
                        stack.push((w, 0));
                    }
                    1 => {
                        let mut cycle = vec![arc];
                        let mut x = v;
                        while x != w {
                            let (a, p) = parent[x].unwrap();
                            cycle.push(a);
                            x = p;
                        }
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                state[v] = 2;
                stack.pop();
            }
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowViolation {
    Bounds { commodity: usize, edge: String, value: f64 },
    Conservation { commodity: usize, node: String, excess: f64 },
    Demand { commodity: usize, node: String, net: f64 },
    TwoWay { commodity: usize, edge: String },
    Capacity { edge: String, used: f64, capacity: f64 },
}

impl fmt::Display for FlowViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowViolation::Bounds { commodity, edge, value } => {
                write!(f, "commodity {commodity}: flow {value} on `{edge}` outside [0, 1]")
            }
            FlowViolation::Conservation { commodity, node, excess } => {
                write!(f, "commodity {commodity}: conservation fails at `{node}` by {excess}")
            }
            FlowViolation::Demand { commodity, node, net } => {
                write!(f, "commodity {commodity}: net flow {net} at terminal `{node}`, expected 1")
            }
            FlowViolation::TwoWay { commodity, edge } => {
                write!(f, "commodity {commodity}: edge `{edge}` used in both directions")
            }
            FlowViolation::Capacity { edge, used, capacity } => {
                write!(f, "edge `{edge}`: rate times load {used} exceeds capacity {capacity}")
            }
        }
    }
}

pub const VERIFY_TOLERANCE: f64 = 1e-6;

/// Check every flow-solution invariant at tolerance `1e-6`. With rate zero
/// the demand constraints are not required.
pub fn verify_flow<S: Scalar>(inst: &FlowInstance, sol: &FlowSolution<S>) -> Vec<FlowViolation> {
    let tol = VERIFY_TOLERANCE;
    let mut out = Vec::new();
    let rate = sol.rate.to_f64();
    for (i, c) in inst.commodities.iter().enumerate() {
        if sol.status.get(i) == Some(&CommodityStatus::Degenerate) {
            continue;
        }
        let f = &sol.flows[i];
        for (e, edge) in inst.edges.iter().enumerate() {
            let (a, b) = (f[e][0].to_f64(), f[e][1].to_f64());
            for v in [a, b] {
                if v < -tol || v > 1.0 + tol {
                    out.push(FlowViolation::Bounds { commodity: i, edge: edge.name.clone(), value: v });
                }
            }
            if a > tol && b > tol {
                out.push(FlowViolation::TwoWay { commodity: i, edge: edge.name.clone() });
            }
        }
        for v in 0..inst.nodes.len() {
            let net = net_out(inst, f, v);
            let node = inst.nodes[v].clone();
            if v == c.source {
                if rate > 0.0 && (net - 1.0).abs() > tol {
                    out.push(FlowViolation::Demand { commodity: i, node, net });
                }
            } else if v == c.sink {
                if rate > 0.0 && (net + 1.0).abs() > tol {
                    out.push(FlowViolation::Demand { commodity: i, node, net: -net });
                }
            } else if net.abs() > tol {
                out.push(FlowViolation::Conservation { commodity: i, node, excess: net });
            }
        }
    }
    for (e, edge) in inst.edges.iter().enumerate() {
        let cap = edge.capacity.to_f64();
        let used = rate * sol.edge_load(e).to_f64();
        if used > cap + tol {
            out.push(FlowViolation::Capacity { edge: edge.name.clone(), used, capacity: cap });
        }
    }
    out
}

fn net_out<S: Scalar>(inst: &FlowInstance, f: &[[S; 2]], v: usize) -> f64 {
    let mut net = 0.0;
    for &e in &inst.incident[v] {
        let edge = &inst.edges[e];
        if edge.u == edge.v {
            continue;
        }
        let (out, inn) = if edge.u == v { (0, 1) } else { (1, 0) };
        net += f[e][out].to_f64() - f[e][inn].to_f64();
    }
    net
}

/// Flow of each commodity through `v`: the outgoing flow at non-terminals,
/// the net flow at a commodity's own source or sink.
pub fn node_throughflow<S: Scalar>(inst: &FlowInstance, sol: &FlowSolution<S>, v: usize) -> Vec<S> {
    inst.commodities
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let f = &sol.flows[i];
            let (mut out, mut inn) = (S::zero(), S::zero());
            for &e in &inst.incident[v] {
                let edge = &inst.edges[e];
                if edge.u == edge.v {
                    continue;
                }
                let (o, n) = if edge.u == v { (0, 1) } else { (1, 0) };
                out = out + f[e][o].clone();
                inn = inn + f[e][n].clone();
            }
            if v == c.source {
                out - inn
            } else if v == c.sink {
                inn - out
            } else {
                out
            }
        })
        .collect()
}

/// `Σ_e (f^i(u,v) + f^i(v,u))`.
pub fn flow_length<S: Scalar>(sol: &FlowSolution<S>, commodity: usize) -> S {
    sol.flows[commodity].iter().fold(S::zero(), |acc, f| acc + f[0].clone() + f[1].clone())
}

/// [`flow_length`] restricted to the edges selected by `mask`.
pub fn flow_length_within<S: Scalar>(sol: &FlowSolution<S>, commodity: usize, mask: &[bool]) -> S {
    sol.flows[commodity]
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold(S::zero(), |acc, (f, _)| acc + f[0].clone() + f[1].clone())
}

/// `commodity,edge,orientation,value` rows for nonzero flows, then the rate.
pub fn write_flow_csv<S: Scalar>(inst: &FlowInstance, sol: &FlowSolution<S>) -> String {
    let mut out = String::from("commodity,edge,orientation,value\n");
    for (i, f) in sol.flows.iter().enumerate() {
        for (e, edge) in inst.edges.iter().enumerate() {
            for (o, name) in [(0, "forward"), (1, "backward")] {
                if !f[e][o].is_zero() {
                    writeln!(out, "{},{},{},{}", i + 1, edge.name, name, format_scalar(&f[e][o])).unwrap();
                }
            }
        }
    }
    writeln!(out, "rate,,,{}", format_scalar(&sol.rate)).unwrap();
    out
}

/// `p/q` for exact scalars, shortest round-trip decimal for floats.
pub fn format_scalar<S: Scalar>(v: &S) -> String {
    if S::is_exact() {
        format_rational(&v.to_rational())
    } else {
        format!("{}", v.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn edge(name: &str, u: usize, v: usize, c: i64) -> FlowEdge {
        FlowEdge { name: name.into(), u, v, capacity: Capacity::Finite(ratio(c, 1)) }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    #[test]
    fn single_edge_single_pair() {
        let inst = FlowInstance::new(names(2), vec![edge("e", 0, 1, 1)], vec![Commodity { source: 0, sink: 1 }]).unwrap();
        let sol = max_concurrent_flow::<BigRational>(&inst).unwrap();
        assert_eq!(sol.rate, ratio(1, 1));
        assert!(verify_flow(&inst, &sol).is_empty());
        assert_eq!(flow_length(&sol, 0), ratio(1, 1));
    }

    #[test]
    fn two_pairs_share_an_edge() {
        let inst = FlowInstance::new(
            names(2),
            vec![edge("e", 0, 1, 1)],
            vec![Commodity { source: 0, sink: 1 }, Commodity { source: 1, sink: 0 }],
        )
        .unwrap();
        let sol = max_concurrent_flow::<f64>(&inst).unwrap();
        assert!((sol.rate - 0.5).abs() < 1e-9);
        assert!(verify_flow(&inst, &sol).is_empty());
    }

    #[test]
    fn path_throughflow_and_off_support() {
        let inst = FlowInstance::new(
            names(4),
            vec![edge("a", 0, 1, 1), edge("b", 1, 2, 1), edge("c", 2, 3, 5)],
            vec![Commodity { source: 0, sink: 2 }],
        )
        .unwrap();
        let sol = max_concurrent_flow::<BigRational>(&inst).unwrap();
        assert_eq!(node_throughflow(&inst, &sol, 1), vec![ratio(1, 1)]);
        assert_eq!(node_throughflow(&inst, &sol, 3), vec![ratio(0, 1)]);
        assert_eq!(flow_length_within(&sol, 0, &[true, false, false]), ratio(1, 1));
    }

    #[test]
    fn degenerate_and_disconnected() {
        let inst = FlowInstance::new(
            names(3),
            vec![edge("e", 0, 1, 1)],
            vec![Commodity { source: 0, sink: 1 }, Commodity { source: 2, sink: 2 }],
        )
        .unwrap();
        let sol = max_concurrent_flow::<f64>(&inst).unwrap();
        assert_eq!(sol.status[1], CommodityStatus::Degenerate);
        assert!((sol.rate - 1.0).abs() < 1e-9);

        let cut = FlowInstance::new(names(3), vec![edge("e", 0, 1, 1)], vec![Commodity { source: 0, sink: 2 }]).unwrap();
        let sol = max_concurrent_flow::<f64>(&cut).unwrap();
        assert_eq!(sol.status[0], CommodityStatus::Disconnected);
        assert_eq!(sol.rate, 0.0);
        assert!(verify_flow(&cut, &sol).is_empty());

        let only = FlowInstance::new(names(1), vec![], vec![Commodity { source: 0, sink: 0 }]).unwrap();
        assert_eq!(max_concurrent_flow::<f64>(&only).unwrap_err(), FlowError::Unbounded);
    }

    #[test]
    fn hand_built_conservation_violation_names_node() {
        let inst = FlowInstance::new(
            names(3),
            vec![edge("a", 0, 1, 1), edge("b", 1, 2, 1)],
            vec![Commodity { source: 0, sink: 2 }],
        )
        .unwrap();
        let mut sol = FlowSolution::<f64>::zero(&inst);
        sol.rate = 1.0;
        sol.flows[0][0][0] = 1.0;
        sol.flows[0][1][0] = 0.9;
        let v = verify_flow(&inst, &sol);
        assert!(v.iter().any(|x| matches!(x, FlowViolation::Conservation { node, .. } if node == "v1")), "{v:?}");
    }

    #[test]
    fn cancellation_removes_two_way_use() {
        let inst = FlowInstance::new(
            names(3),
            vec![edge("a", 0, 1, 3), edge("b", 1, 2, 3), edge("c", 0, 2, 3)],
            vec![Commodity { source: 0, sink: 2 }],
        )
        .unwrap();
        let before = vec![[1.0, 0.0], [1.0, 0.0], [0.5, 0.5]];
        let mut flows = before.clone();
        cancel_cycles(&inst, &mut flows);
        for (f, b) in flows.iter().zip(&before) {
            assert!(f[0] == 0.0 || f[1] == 0.0);
            assert!(f[0] + f[1] <= b[0] + b[1]);
        }
        assert_eq!(net_out(&inst, &flows, 0), 1.0);
        assert_eq!(net_out(&inst, &flows, 1), 0.0);
        // a directed triangle 0 -> 1 -> 2 -> 0 on top of the unit path
        let mut flows = vec![[1.5, 0.0], [1.5, 0.0], [0.0, 0.5]];
        cancel_cycles(&inst, &mut flows);
        assert_eq!(flows, vec![[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn csv_lists_nonzero_flows() {
        let inst = FlowInstance::new(names(2), vec![edge("e", 0, 1, 2)], vec![Commodity { source: 0, sink: 1 }]).unwrap();
        let sol = max_concurrent_flow::<BigRational>(&inst).unwrap();
        assert_eq!(write_flow_csv(&inst, &sol), "commodity,edge,orientation,value\n1,e,forward,1\nrate,,,2\n");
    }
}
