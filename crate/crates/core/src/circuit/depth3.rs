use std::collections::{BTreeSet, HashMap};

use super::{Circuit, CircuitBuilder, CircuitError, GateFn, NodeId, NodeKind};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Layer {
    /// Input gates.
    X,
    /// Middle-layer gates.
    F,
    /// Output gates.
    Y,
}

/// Layer assignment of a depth-3 shaped circuit: every edge goes X->F, F->Y
/// or X->Y.
#[derive(Clone, Debug)]
pub struct Layers {
    pub layer: Vec<Layer>,
    pub x: Vec<NodeId>,
    pub f: Vec<NodeId>,
    pub y: Vec<NodeId>,
}

impl Layers {
    pub fn classify(c: &Circuit) -> Result<Self, CircuitError> {
        let mut layer = Vec::with_capacity(c.len());
        let (mut x, mut f, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for v in c.ids() {
            let node = c.node(v);
            let l = match node.kind {
                NodeKind::Input(_) => Layer::X,
                NodeKind::Output { .. } => Layer::Y,
                NodeKind::Gate(_) => Layer::F,
                NodeKind::Const(_) => {
                    return Err(CircuitError::NotDepth3(format!("constant node `{}`", node.name)))
                }
            };
            layer.push(l);
            match l {
                Layer::X => x.push(v),
                Layer::F => f.push(v),
                Layer::Y => y.push(v),
            }
        }
        for &g in &f {
            if let Some(p) = c.preds(g).iter().find(|p| layer[p.0] != Layer::X) {
                return Err(CircuitError::NotDepth3(format!(
                    "middle gate `{}` reads non-input `{}`",
                    c.node(g).name,
                    c.node(*p).name
                )));
            }
            if let Some(s) = c.succs(g).iter().find(|s| layer[s.0] != Layer::Y) {
                return Err(CircuitError::NotDepth3(format!(
                    "middle gate `{}` feeds non-output `{}`",
                    c.node(g).name,
                    c.node(*s).name
                )));
            }
        }
        Ok(Self { layer, x, f, y })
    }

    /// X ∪ Y in position order.
    pub fn outer(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.x.iter().chain(&self.y).copied().collect();
        v.sort_unstable();
        v
    }

    /// Number of direct X-Y wires.
    pub fn xy_edge_count(&self, c: &Circuit) -> usize {
        self.y
            .iter()
            .map(|&v| c.preds(v).iter().filter(|p| self.layer[p.0] == Layer::X).count())
            .sum()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Ref {
    Orig(NodeId),
    New(usize),
}

struct NewGate {
    preds: Vec<NodeId>,
    func: GateFn,
}

/// Reroute the direct X-Y wires of every X∪Y node whose degree in the
/// X∪Y-induced subgraph exceeds `threshold` through a fresh middle gate.
///
/// For an input `x`, the new gate copies `x` and replaces it in every output
/// that read it. For an output `y`, the new gate computes all of `y` from the
/// inputs it depends on (directly or through its middle predecessors) and `y`
/// becomes a copy of it.
pub fn split_high_degree(c: &Circuit, threshold: usize) -> Result<Circuit, CircuitError> {
    if threshold == 0 {
        return Err(CircuitError::Invalid("split threshold must be at least 1".into()));
    }
    let layers = Layers::classify(c)?;

    let mut y_defs: HashMap<NodeId, (Vec<Ref>, GateFn)> = layers
        .y
        .iter()
        .map(|&v| {
            let refs = c.preds(v).iter().map(|&p| Ref::Orig(p)).collect();
            (v, (refs, c.node(v).func().unwrap().clone()))
        })
        .collect();
    let mut x_adj: HashMap<NodeId, BTreeSet<NodeId>> = layers.x.iter().map(|&v| (v, BTreeSet::new())).collect();
    for &v in &layers.y {
        for &p in c.preds(v) {
            if layers.layer[p.0] == Layer::X {
                x_adj.get_mut(&p).unwrap().insert(v);
            }
        }
    }
    let mut new_gates: Vec<NewGate> = Vec::new();

    for v in layers.outer() {
        match layers.layer[v.0] {
            Layer::X => {
                if x_adj[&v].len() <= threshold {
                    continue;
                }
                let id = new_gates.len();
                new_gates.push(NewGate { preds: vec![v], func: GateFn::identity() });
                for y in std::mem::take(x_adj.get_mut(&v).unwrap()) {
                    let (refs, _) = y_defs.get_mut(&y).unwrap();
                    for r in refs.iter_mut().filter(|r| **r == Ref::Orig(v)) {
                        *r = Ref::New(id);
                    }
                }
            }
            Layer::Y => {
                let (refs, func) = y_defs[&v].clone();
                let direct = refs.iter().filter(|r| matches!(r, Ref::Orig(p) if layers.layer[p.0] == Layer::X));
                if direct.count() <= threshold {
                    continue;
                }
                let mut support = BTreeSet::new();
                for r in &refs {
                    match *r {
                        Ref::Orig(p) if layers.layer[p.0] == Layer::X => {
                            support.insert(p);
                        }
                        Ref::Orig(p) => support.extend(c.preds(p).iter().copied()),
                        Ref::New(j) => support.extend(new_gates[j].preds.iter().copied()),
                    }
                }
                let support: Vec<NodeId> = support.into_iter().collect();
                let composite = GateFn::from_fn(support.len(), |t| {
                    let value_of = |x: NodeId| {
                        let i = support.binary_search(&x).unwrap();
                        (t >> i) & 1 == 1
                    };
                    let inputs: Vec<bool> = refs
                        .iter()
                        .map(|r| match *r {
                            Ref::Orig(p) if layers.layer[p.0] == Layer::X => value_of(p),
                            Ref::Orig(p) => {
                                let bits: Vec<bool> = c.preds(p).iter().map(|&q| value_of(q)).collect();
                                c.node(p).func().unwrap().apply(&bits)
                            }
                            Ref::New(j) => {
                                let g = &new_gates[j];
                                let bits: Vec<bool> = g.preds.iter().map(|&q| value_of(q)).collect();
                                g.func.apply(&bits)
                            }
                        })
                        .collect();
                    func.apply(&inputs)
                })?;
                for r in &refs {
                    if let Ref::Orig(p) = r {
                        if let Some(adj) = x_adj.get_mut(p) {
                            adj.remove(&v);
                        }
                    }
                }
                let id = new_gates.len();
                new_gates.push(NewGate { preds: support, func: composite });
                y_defs.insert(v, (vec![Ref::New(id)], GateFn::identity()));
            }
            Layer::F => unreachable!(),
        }
    }

    let mut b = CircuitBuilder::new();
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for &v in &layers.x {
        map.insert(v, b.add_input(c.node(v).name.clone()));
    }
    for &v in &layers.f {
        let preds: Vec<NodeId> = c.preds(v).iter().map(|p| map[p]).collect();
        map.insert(v, b.add_gate(c.node(v).name.clone(), &preds, c.node(v).func().unwrap().clone()));
    }
    let mut fresh = Vec::with_capacity(new_gates.len());
    for (i, g) in new_gates.iter().enumerate() {
        let preds: Vec<NodeId> = g.preds.iter().map(|p| map[p]).collect();
        let name = unique_name(c, &format!("split{}", i + 1));
        fresh.push(b.add_gate(name, &preds, g.func.clone()));
    }
    for &v in &layers.y {
        let (refs, func) = &y_defs[&v];
        let preds: Vec<NodeId> = refs
            .iter()
            .map(|r| match *r {
                Ref::Orig(p) => map[&p],
                Ref::New(j) => fresh[j],
            })
            .collect();
        b.add_output(c.node(v).name.clone(), &preds, func.clone());
    }
    b.build()
}

fn unique_name(c: &Circuit, base: &str) -> String {
    let mut name = base.to_string();
    while c.find(&name).is_some() {
        name.push('_');
    }
    name
}
