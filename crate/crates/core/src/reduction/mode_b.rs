use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::{gate_rule, half_log, is_far, Binding, Certificate, ReductionError, Relation, ShiftHint, ShiftLayout, Step, Value};
use crate::bits::BitString;
use crate::circuit::{degree_profile, split_high_degree, undirected_distances, Circuit, Layers, NodeId};
use crate::correction::{
    analyze, lemma_budget_blocks, player_output, supervisor_messages, CorrectionError, Family, GameAnalysis, GameSpec,
    GammaEncoder, NearestTable, MAX_N,
};
use crate::flow::{
    flow_length_within, format_scalar, max_concurrent_flow_with, node_throughflow, verify_flow, Capacity, FlowInstance,
    FlowOptions, FlowSolution, PivotRule,
};
use crate::netcode::{
    measure_rate, undirect, verify_correctness, Alphabet, CodingSolution, CommInstance, CommInstanceBuilder, Correctness, EdgeFn,
    RateReport,
};
use crate::scalar::{format_rational, ratio, rational_from_usize, Scalar};

/// A depth-3 circuit split into its input, middle and output layers.
#[derive(Clone, Debug)]
pub struct Depth3Shape {
    pub circuit: Circuit,
    pub layout: ShiftLayout,
    pub layers: Layers,
    /// X ∪ Y.
    pub outer: Vec<NodeId>,
    /// Max degree in the X∪Y-induced subgraph.
    pub c: usize,
    pub avg_degree: BigRational,
    /// `|F| / n`.
    pub epsilon: BigRational,
    pub xy_edges: usize,
    /// Threshold used to reroute high-degree X∪Y nodes, if any.
    pub split: Option<usize>,
}

impl Depth3Shape {
    pub fn new(c: &Circuit, layout: ShiftLayout, split: Option<usize>) -> Result<Self, ReductionError> {
        let circuit = match split {
            Some(t) => split_high_degree(c, t)?,
            None => c.clone(),
        };
        let layers = Layers::classify(&circuit)?;
        let outer = layers.outer();
        let profile = degree_profile(&circuit, Some(&outer))?;
        let epsilon = rational_from_usize(layers.f.len()) / rational_from_usize(layout.n);
        let xy_edges = layers.xy_edge_count(&circuit);
        Ok(Self {
            circuit,
            layout,
            layers,
            outer,
            c: profile.max_undirected.max(1),
            avg_degree: profile.avg_undirected,
            epsilon,
            xy_edges,
            split,
        })
    }

    pub fn n(&self) -> usize {
        self.layout.n
    }
}

/// Far-block counts for every alignment `α`.
#[derive(Clone, Debug)]
pub struct AlphaChoice {
    pub alpha0: usize,
    pub far_blocks: usize,
    /// `counts[α - 1]`: far blocks under alignment `α`.
    pub counts: Vec<usize>,
    /// Whether `α0 = 1` was forced because the circuit has no shift block.
    pub forced: bool,
    /// Per block, the fraction of alignments under which it is far.
    pub block_probability: Vec<f64>,
    /// Per block, far under `α0`.
    pub far: Vec<bool>,
}

fn check_blocks(n: usize, k: usize) -> Result<usize, ReductionError> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(ReductionError::Invalid(format!("block length {k} does not divide n = {n}")));
    }
    Ok(n / k)
}

/// Block `ℓ` is far under `α` when every `x_u`, `u ∈ B_ℓ`, is far from every
/// target `y_{v+α-1}`, `v ∈ B_ℓ`, in the X∪Y-induced subgraph.
pub fn choose_alpha_b(shape: &Depth3Shape, k: usize) -> Result<AlphaChoice, ReductionError> {
    let n = shape.n();
    let m = check_blocks(n, k)?;
    let c = &shape.circuit;
    let outputs: Vec<NodeId> = c.outputs().collect();
    let dist: Vec<Vec<Option<usize>>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let d = undirected_distances(c, c.input(u), Some(&shape.outer))?;
            Ok(outputs.iter().map(|o| d[o.0]).collect())
        })
        .collect::<Result<_, ReductionError>>()?;
    let far_block = |l: usize, alpha: usize| {
        (l * k..(l + 1) * k).all(|u| {
            (l * k..(l + 1) * k)
                .all(|v| shape.layout.target(v, alpha).is_some_and(|t| is_far(dist[u][t], shape.c, n)))
        })
    };
    let table: Vec<Vec<bool>> = (1..=n).into_par_iter().map(|a| (0..m).map(|l| far_block(l, a)).collect()).collect();
    let counts: Vec<usize> = table.iter().map(|row| row.iter().filter(|&&f| f).count()).collect();
    let forced = shape.layout.encoding.is_none();
    let alpha0 = if forced {
        1
    } else {
        counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).unwrap().0 + 1
    };
    let block_probability = (0..m).map(|l| table.iter().filter(|row| row[l]).count() as f64 / n as f64).collect();
    Ok(AlphaChoice {
        alpha0,
        far_blocks: counts[alpha0 - 1],
        counts,
        forced,
        block_probability,
        far: table[alpha0 - 1].clone(),
    })
}

#[derive(Clone, Debug)]
pub struct FamilyExtraction {
    /// Middle-layer values shared by the family, in middle-gate order.
    pub fhat: BitString,
    pub family: Family,
    /// Number of distinct middle-layer value vectors.
    pub buckets: usize,
    /// The circuit with the shift block fixed to `α0` and the middle layer
    /// fixed to `fhat`: only X→Y wires remain.
    pub gamma: Circuit,
}

impl FamilyExtraction {
    /// `|𝓕| >= 2^{(1-ε)n}` with `ε = |F| / n`, i.e. `|𝓕|·2^{|F|} >= 2^n`.
    pub fn pigeonhole_holds(&self) -> bool {
        let n = self.family.n();
        (self.family.len() as u128) << self.fhat.len().min(127) >= 1u128 << n
    }
}

fn pack(bits: impl Iterator<Item = bool>) -> Vec<u64> {
    let mut words = Vec::new();
    for (i, b) in bits.enumerate() {
        if i % 64 == 0 {
            words.push(0);
        }
        *words.last_mut().unwrap() |= u64::from(b) << (i % 64);
    }
    words
}

/// Fix the shift block to `α0`, bucket all `2^n` inputs by their middle
/// layer values and keep the largest bucket (smallest key on ties).
pub fn extract_family(shape: &Depth3Shape, alpha0: usize, budget: usize) -> Result<FamilyExtraction, ReductionError> {
    let n = shape.n();
    if n > budget.min(MAX_N) {
        return Err(CorrectionError::BudgetExceeded { n, budget: budget.min(MAX_N) }.into());
    }
    let c = &shape.circuit;
    let (hard, map) = c.hardwire_with_map(&shape.layout.shift_assignment(c, alpha0))?;
    let f_nodes: Vec<NodeId> = shape.layers.f.iter().map(|v| map[v.0].expect("middle gates survive")).collect();
    let key_of = |x: u32, values: &mut Vec<bool>| {
        let bits: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
        hard.evaluate_into(&bits, values);
        pack(f_nodes.iter().map(|v| values[v.0]))
    };
    const CHUNK: u32 = 1 << 12;
    let total = 1u32 << n;
    let counts: HashMap<Vec<u64>, u32> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ch| {
            let mut values = vec![false; hard.len()];
            let mut h: HashMap<Vec<u64>, u32> = HashMap::new();
            for x in ch * CHUNK..((ch + 1) * CHUNK).min(total) {
                *h.entry(key_of(x, &mut values)).or_insert(0) += 1;
            }
            h
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let unpack = |key: &Vec<u64>| BitString((0..f_nodes.len()).map(|i| key[i / 64] >> (i % 64) & 1 == 1).collect());
    let (best_key, _) = counts
        .iter()
        .map(|(k, &v)| (k, v, unpack(k)))
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.2.cmp(&a.2)))
        .map(|(k, v, _)| (k.clone(), v))
        .expect("at least one input");
    let members: Vec<u32> = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|ch| {
            let mut values = vec![false; hard.len()];
            let mut out = Vec::new();
            for x in ch * CHUNK..((ch + 1) * CHUNK).min(total) {
                if key_of(x, &mut values) == best_key {
                    out.push(x);
                }
            }
            out
        })
        .collect();
    let fhat = unpack(&best_key);
    let fixing: Vec<(NodeId, bool)> = f_nodes.iter().copied().zip(fhat.bits().iter().copied()).collect();
    let gamma = hard.hardwire(&fixing)?;
    Ok(FamilyExtraction { fhat, family: Family::new(n, members)?, buckets: counts.len(), gamma })
}

/// The network `G` with its coding solution and the node/edge roles the
/// certificate needs.
#[derive(Clone, Debug)]
pub struct NetworkB {
    pub instance: CommInstance,
    pub solution: CodingSolution,
    pub analysis: GameAnalysis,
    /// `c_ℓ = E|R_ℓ|`.
    pub costs: Vec<BigRational>,
    pub supervisor: usize,
    pub sources: Vec<usize>,
    pub relays: Vec<usize>,
    pub sinks: Vec<usize>,
    /// Instance edges copied from `Γ`.
    pub gamma_edges: Vec<usize>,
}

fn fresh(taken: &mut HashSet<String>, base: String) -> String {
    let mut name = base;
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}

/// `Γ` with unit capacities, plus per block a source `s_ℓ`, relay `a_ℓ` and
/// sink `t_ℓ`, and the supervisor `u`. The solution runs the correction
/// protocol: `u` sends each relay and sink its flip message, the relay
/// corrects its block before it enters `Γ`, and the sink undoes the
/// correction on `Γ`'s outputs.
pub fn build_network_b(
    gamma: &Circuit,
    layout: &ShiftLayout,
    alpha0: usize,
    family: &Family,
    k: usize,
    budget: usize,
) -> Result<NetworkB, ReductionError> {
    let n = layout.n;
    let m = check_blocks(n, k)?;
    if gamma.n_in() != n || family.n() != n {
        return Err(ReductionError::Invalid(format!(
            "Γ has {} inputs and the family length {}, expected {n}",
            gamma.n_in(),
            family.n()
        )));
    }
    let spec = Arc::new(GameSpec::new(m, family.clone())?);
    let analysis = analyze(&spec, &GammaEncoder, budget)?;
    let costs: Vec<BigRational> = analysis.players.iter().map(|p| p.expected_len.clone()).collect();
    let table = Arc::new(NearestTable::build(family));
    let message_sets: Vec<BTreeSet<BitString>> = (0..1u32 << n)
        .into_par_iter()
        .fold(
            || vec![BTreeSet::new(); m],
            |mut sets, beta| {
                for (s, r) in sets.iter_mut().zip(supervisor_messages(&spec, &table, &GammaEncoder, beta).1) {
                    s.insert(r);
                }
                sets
            },
        )
        .reduce(
            || vec![BTreeSet::new(); m],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    x.extend(y);
                }
                a
            },
        );

    let mut b = CommInstanceBuilder::new();
    let mut taken: HashSet<String> = HashSet::new();
    for v in gamma.ids() {
        let name = fresh(&mut taken, gamma.node(v).name.clone());
        b.add_node(name);
    }
    let supervisor = b.add_node(fresh(&mut taken, "u".into()));
    let mut sources = Vec::with_capacity(m);
    let mut relays = Vec::with_capacity(m);
    let mut sinks = Vec::with_capacity(m);
    for l in 1..=m {
        sources.push(b.add_node(fresh(&mut taken, format!("s{l}"))));
        relays.push(b.add_node(fresh(&mut taken, format!("a{l}"))));
        sinks.push(b.add_node(fresh(&mut taken, format!("t{l}"))));
    }
    let name = |v: usize| -> String {
        if v < gamma.len() {
            gamma.node(NodeId(v)).name.clone()
        } else if v == supervisor {
            "u".into()
        } else {
            let i = v - supervisor - 1;
            format!("{}{}", ["s", "a", "t"][i % 3], i / 3 + 1)
        }
    };
    let unit = Capacity::Finite(BigRational::one());
    let kcap = Capacity::Finite(rational_from_usize(k));
    let mut gamma_edges = Vec::new();
    for (s, d) in gamma.edges() {
        gamma_edges.push(b.add_edge(format!("{}>{}", name(s.0), name(d.0)), s.0, d.0, unit.clone()));
    }
    let edge = |b: &mut CommInstanceBuilder, s: usize, d: usize, cap: Capacity| {
        b.add_edge(format!("{}>{}", name(s), name(d)), s, d, cap)
    };
    for l in 0..m {
        let cl = Capacity::Finite(costs[l].clone());
        edge(&mut b, sources[l], relays[l], kcap.clone());
        edge(&mut b, sources[l], supervisor, kcap.clone());
        edge(&mut b, supervisor, relays[l], cl.clone());
        edge(&mut b, supervisor, sinks[l], cl);
    }
    let mut target_of = vec![0usize; n];
    for j in 0..n {
        let t = layout
            .target(j, alpha0)
            .ok_or_else(|| ReductionError::Layout(format!("no output paired with x{} under alignment {alpha0}", j + 1)))?;
        target_of[j] = t;
        edge(&mut b, relays[j / k], j, unit.clone());
        edge(&mut b, gamma.output(t).0, sinks[j / k], unit.clone());
    }
    for l in 0..m {
        b.add_pair(sources[l], sinks[l], k);
    }
    let inst = b.build()?;

    let mut sol = CodingSolution::new(&inst);
    let block_of_source: HashMap<usize, usize> = sources.iter().enumerate().map(|(l, &s)| (s, l)).collect();
    let u_blocks: Arc<Vec<usize>> =
        Arc::new(inst.in_edges(supervisor).iter().map(|&e| block_of_source[&inst.edge(e).src]).collect());
    for l in 0..m {
        for &e in inst.out_edges(sources[l]) {
            sol.set_edge(e, Alphabet::Bits(k), EdgeFn::forward(0));
        }
        let (spec, table, u_blocks) = (spec.clone(), table.clone(), u_blocks.clone());
        let hint = EdgeFn::rule(format!("supervisor message {}", l + 1), move |msgs| {
            let mut beta = 0u32;
            for (&blk, a) in u_blocks.iter().zip(msgs) {
                for (i, &bit) in a.bits().iter().enumerate() {
                    beta |= u32::from(bit) << (blk * k + i);
                }
            }
            Ok(supervisor_messages(&spec, &table, &GammaEncoder, beta).1.swap_remove(l))
        });
        for &e in inst.out_edges(supervisor).iter().filter(|&&e| {
            let d = inst.edge(e).dst;
            d == relays[l] || d == sinks[l]
        }) {
            sol.set_edge(e, Alphabet::Set(message_sets[l].clone()), hint.clone());
        }

        let ins = inst.in_edges(relays[l]);
        let from_u = ins.iter().position(|&e| inst.edge(e).src == supervisor).expect("relay reads u");
        let from_s = 1 - from_u;
        for &e in inst.out_edges(relays[l]) {
            let i = inst.edge(e).dst - l * k;
            let f = EdgeFn::rule(format!("corrected bit {}", inst.edge(e).dst + 1), move |msgs| {
                let chi = player_output(&GammaEncoder, &msgs[from_u], k).map_err(|e| e.to_string())?;
                Ok(BitString(vec![msgs[from_s].bits()[i] ^ chi.bits()[i]]))
            });
            sol.set_edge(e, Alphabet::Bits(1), f);
        }

        let slots: Vec<Option<usize>> = inst
            .in_edges(sinks[l])
            .iter()
            .map(|&e| {
                let src = inst.edge(e).src;
                (src != supervisor).then(|| {
                    let t = gamma.outputs().position(|o| o.0 == src).expect("sink reads outputs");
                    target_of.iter().position(|&x| x == t).expect("target") - l * k
                })
            })
            .collect();
        sol.set_decoder(
            l,
            EdgeFn::rule(format!("undo correction {}", l + 1), move |msgs| {
                let r = slots.iter().zip(msgs).find(|(s, _)| s.is_none()).map(|(_, r)| r).ok_or("no hint")?;
                let chi = player_output(&GammaEncoder, r, k).map_err(|e| e.to_string())?;
                let mut out = vec![false; k];
                for (slot, y) in slots.iter().zip(msgs) {
                    if let Some(i) = *slot {
                        out[i] = y.bits()[0] ^ chi.bits()[i];
                    }
                }
                Ok(BitString(out))
            }),
        );
    }
    let as_gamma = |u: usize| (u < gamma.len()).then_some(NodeId(u));
    for v in gamma.ids() {
        let outs = inst.out_edges(v.0);
        if outs.is_empty() {
            continue;
        }
        let f = if gamma.node(v).is_input() { EdgeFn::forward(0) } else { gate_rule(gamma, v, &inst, v.0, as_gamma)? };
        for &e in outs {
            sol.set_edge(e, Alphabet::Bits(1), f.clone());
        }
    }
    Ok(NetworkB { instance: inst, solution: sol, analysis, costs, supervisor, sources, relays, sinks, gamma_edges })
}

/// Smallest `c` with `c·n >= factor·n·log_{2c} n`, i.e. `c >= factor·ln n / ln 2c`.
pub fn implied_degree_bound(n: usize, factor: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let g = |c: f64| c - factor * ln_n / (2.0 * c).ln();
    let (mut lo, mut hi) = (0.5, 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.5 || g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Clone, Debug)]
pub struct ModeBOptions {
    pub k: usize,
    /// Claimed middle-layer fraction; the measured `|F|/n` when `None`.
    pub eps: Option<BigRational>,
    pub cyclic: bool,
    pub hint: ShiftHint,
    pub split: Option<usize>,
    pub budget: usize,
    pub strict: bool,
    pub rule: PivotRule,
}

impl Default for ModeBOptions {
    fn default() -> Self {
        Self {
            k: 4,
            eps: None,
            cyclic: false,
            hint: ShiftHint::Auto,
            split: None,
            budget: crate::netcode::DEFAULT_BUDGET,
            strict: false,
            rule: PivotRule::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModeBReport<S> {
    pub shape: Depth3Shape,
    pub alpha: AlphaChoice,
    pub extraction: FamilyExtraction,
    pub network: NetworkB,
    pub correctness: Correctness,
    pub coding: RateReport,
    pub flow_instance: FlowInstance,
    pub flow: FlowSolution<S>,
    /// Per block, flow of its commodity that avoids `u`.
    pub avoid: Vec<S>,
    /// Per block, fewest `Γ` edges on any `s_ℓ`–`t_ℓ` path avoiding `u`.
    pub gamma_distance: Vec<Option<usize>>,
    pub certificate: Certificate,
}

/// 0-1 BFS from `from` in `inst` without `skip`, counting only edges in `weighted`.
fn weighted_distances(inst: &FlowInstance, from: usize, skip: usize, weighted: &[bool]) -> Vec<Option<usize>> {
    let mut dist = vec![None; inst.nodes().len()];
    let mut deque = VecDeque::from([(from, 0usize)]);
    while let Some((v, d)) = deque.pop_front() {
        if dist[v].is_some_and(|old| old <= d) {
            continue;
        }
        dist[v] = Some(d);
        for &e in inst.incident(v) {
            let edge = &inst.edges()[e];
            let w = if edge.u == v { edge.v } else { edge.u };
            if w == skip || edge.capacity.finite().is_some_and(|c| c.is_zero()) {
                continue;
            }
            if weighted[e] {
                deque.push_back((w, d + 1));
            } else {
                deque.push_front((w, d));
            }
        }
    }
    dist
}

fn at_least<S: Scalar>(v: &S, threshold: &BigRational) -> bool {
    Relation::Ge.holds(&Value::lp(v), &Value::Exact(threshold.clone()))
}

/// Full mode-B pipeline and its inequality chain.
pub fn certify_b<S: Scalar>(circuit: &Circuit, opts: &ModeBOptions) -> Result<ModeBReport<S>, ReductionError> {
    let k = opts.k;
    let layout = ShiftLayout::detect(circuit, opts.cyclic, opts.hint)?;
    let shape = Depth3Shape::new(circuit, layout, opts.split)?;
    let n = shape.n();
    let m = check_blocks(n, k)?;
    let alpha = choose_alpha_b(&shape, k)?;
    let extraction = extract_family(&shape, alpha.alpha0, opts.budget)?;
    let network = build_network_b(&extraction.gamma, &shape.layout, alpha.alpha0, &extraction.family, k, opts.budget)?;
    let inst = &network.instance;
    let correctness = verify_correctness(inst, &network.solution, opts.budget)?;
    let coding = measure_rate(inst, &network.solution, opts.budget)?;
    let flow_instance = undirect(inst, false)?;
    let flow: FlowSolution<S> =
        max_concurrent_flow_with(&flow_instance, FlowOptions { rule: opts.rule, cancel_cycles: true })?;
    let flow_violations = verify_flow(&flow_instance, &flow);
    // Injector nodes and edges come last, so the remaining ids carry over.
    let u = network.supervisor;
    debug_assert_eq!(flow_instance.nodes()[u], inst.nodes()[u]);
    let through = node_throughflow(&flow_instance, &flow, u);
    let avoid: Vec<S> = through.iter().map(|t| (S::one() - t.clone()).cleaned()).collect();
    let mut gamma_mask = vec![false; flow_instance.edges().len()];
    for &e in &network.gamma_edges {
        gamma_mask[e] = true;
    }
    let gamma_distance: Vec<Option<usize>> = (0..m)
        .map(|l| weighted_distances(&flow_instance, network.sources[l], u, &gamma_mask)[network.sinks[l]])
        .collect();

    let eps_measured = shape.epsilon.clone();
    let eps = opts.eps.clone().unwrap_or_else(|| eps_measured.clone());
    let kr = rational_from_usize(k);
    let nr = rational_from_usize(n);
    let deg = shape.c;
    let sqrt_n = (n as f64).sqrt();
    let blocks_ok = ((k * k) as f64) < sqrt_n;
    let k_ok = k >= 20;
    let chain_ok = blocks_ok && k_ok;
    let blocks_why = format!("k^2/sqrt n = {:.3} >= 1", (k * k) as f64 / sqrt_n);
    let k_why = format!("k = {k} < 20");
    let chain_why = if k_ok { blocks_why.clone() } else { k_why.clone() };
    let gamma_count = network.gamma_edges.len();
    let family = &extraction.family;
    let eps_family = family.epsilon();
    let total_cost: BigRational = network.costs.iter().fold(BigRational::zero(), |a, c| a + c);
    let lemma = lemma_budget_blocks(n, k, eps_family)?;

    let mut cert = Certificate::new("B", opts.strict);
    cert.param("n", n);
    cert.param("k", k);
    cert.param("blocks m", m);
    cert.param("shift", if shape.layout.cyclic { "cyclic" } else { "plain" });
    cert.param("middle gates |F|", shape.layers.f.len());
    cert.param("eps (measured |F|/n)", format_rational(&eps_measured));
    cert.param("eps (hypothesis)", format_rational(&eps));
    cert.param("c (max X∪Y degree)", deg);
    cert.param("avg X∪Y degree", format_rational(&shape.avg_degree));
    if let Some(t) = shape.split {
        cert.param("split threshold", t);
    }
    cert.param("alpha0", format!("{}{}", alpha.alpha0, if alpha.forced { " (forced: no shift block)" } else { "" }));
    cert.param("far blocks by alignment", alpha.counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
    cert.param("fhat", &extraction.fhat);
    cert.param("family size", family.len());
    cert.param("buckets", extraction.buckets);
    cert.param("edges of Γ", gamma_count);
    cert.param("c_l = E|R_l|", network.costs.iter().map(format_rational).collect::<Vec<_>>().join(" "));
    cert.param("lp rate r'", format_scalar(&flow.rate));

    cert.push(Step::new(
        "middle layer size",
        "|F| <= eps n",
        Value::int(shape.layers.f.len()),
        Relation::Le,
        Value::Exact(&eps * &nr),
        Binding::Binding,
    ));
    cert.push(
        Step::new(
            "eps within 1/300",
            "eps <= 1/300",
            Value::Exact(eps.clone()),
            Relation::Le,
            Value::Exact(ratio(1, 300)),
            Binding::Binding,
        )
        .binding_if(opts.strict, "constant needed only for the asymptotic bound"),
    );
    cert.push(
        Step::new(
            "far blocks at alpha0",
            "far blocks >= n/k - k sqrt n",
            Value::int(alpha.far_blocks),
            Relation::Ge,
            Value::Real(n as f64 / k as f64 - k as f64 * sqrt_n),
            Binding::Binding,
        )
        .binding_if(blocks_ok, blocks_why.clone()),
    );
    cert.push(
        Step::new(
            "far blocks vs 9n/(10k)",
            "n/k - k sqrt n >= 9n/(10k)",
            Value::int(alpha.far_blocks),
            Relation::Ge,
            Value::Exact(ratio(9, 10) * &nr / &kr),
            Binding::Binding,
        )
        .binding_if(blocks_ok, blocks_why.clone()),
    );
    let min_prob = alpha.block_probability.iter().copied().fold(f64::INFINITY, f64::min);
    cert.push(
        Step::new(
            "block far probability",
            "Pr over alpha of far block >= 1 - k^2/sqrt n",
            Value::Real(min_prob),
            Relation::Ge,
            Value::Real(1.0 - (k * k) as f64 / sqrt_n),
            Binding::Binding,
        )
        .binding_if(blocks_ok, blocks_why.clone()),
    );
    cert.push(Step::new(
        "family size",
        "|family| >= 2^((1-eps) n) by pigeonhole",
        Value::Exact(rational_from_usize(family.len()) * BigRational::from_integer(num_bigint::BigInt::from(1) << shape.layers.f.len())),
        Relation::Ge,
        Value::Exact(BigRational::from_integer(num_bigint::BigInt::from(1) << n)),
        Binding::Binding,
    ));

    cert.push(
        Step::new(
            "protocol decodes every block",
            "correction protocol delivers A_l",
            Value::int(usize::from(correctness.counterexample.is_some())),
            Relation::Eq,
            Value::int(0),
            Binding::Binding,
        )
        .note(format!("{} message tuples enumerated", correctness.tuples)),
    );
    cert.push(Step::new(
        "corrected strings in family",
        "players' corrections land in the family",
        Value::Exact(BigRational::from_integer(network.analysis.failures.into())),
        Relation::Eq,
        Value::int(0),
        Binding::Binding,
    ));
    let source_min = coding.source_entropy.iter().copied().fold(f64::INFINITY, f64::min);
    cert.push(Step::new(
        "source entropy",
        "H(A_l) = k",
        Value::Real(source_min),
        Relation::Eq,
        Value::int(k),
        Binding::Binding,
    ));
    let worst = coding
        .edges
        .iter()
        .filter(|e| !e.injector)
        .max_by(|a, b| (a.entropy - a.capacity.to_f64()).total_cmp(&(b.entropy - b.capacity.to_f64())));
    let mut within = Step::new(
        "edge entropies within capacity",
        "H(A_e) <= c_e on every edge",
        Value::int(coding.violations.len()),
        Relation::Eq,
        Value::int(0),
        Binding::Binding,
    );
    if let Some(w) = worst {
        within = within.note(format!("tightest edge {}: H = {:.9}, c = {}", w.name, w.entropy, w.capacity));
    }
    cert.push(within);
    let coding_rate = if correctness.passed() { coding.rate.unwrap_or(0.0) } else { 0.0 };

    let five = rational_from_usize(5) * &nr / &kr;
    cert.push(Step::new(
        "supervisor budget",
        "sum c_l <= 5n/k",
        Value::Exact(total_cost.clone()),
        Relation::Le,
        Value::Exact(five.clone()),
        Binding::Binding,
    ));
    cert.push(
        Step::new(
            "measured cost vs three-term budget",
            "sum E|R_l| <= 3m + 2m lg(...) + sqrt(eps/8) n lg(2/eps)",
            Value::Exact(total_cost.clone()),
            Relation::Le,
            Value::Real(lemma.total),
            Binding::Informational,
        )
        .note(format!("family eps = {eps_family:.9}; terms {:.9} {:.9} {:.9}", lemma.terms[0], lemma.terms[1], lemma.terms[2])),
    );
    cert.push(Step::new(
        "three-term budget vs 5n/k",
        "three-term budget <= 5n/k",
        Value::Real(lemma.total),
        Relation::Le,
        Value::Exact(five),
        Binding::Informational,
    ));

    cert.push(Step::new(
        "flow LP verifies",
        "conservation and capacity rows",
        Value::int(flow_violations.len()),
        Relation::Eq,
        Value::int(0),
        Binding::Binding,
    ));
    cert.push(Step::new(
        "conjecture consistency",
        "flow rate r' >= coding rate k",
        Value::lp(&flow.rate),
        Relation::Ge,
        Value::Real(coding_rate),
        Binding::Binding,
    ));

    let u_edges = flow_instance.incident(u);
    let incidence = u_edges.iter().fold(S::zero(), |acc, &e| acc + flow.edge_load(e));
    let u_capacity = u_edges
        .iter()
        .fold(BigRational::zero(), |acc, &e| acc + flow_instance.edges()[e].capacity.finite().cloned().unwrap_or_default());
    cert.push(Step::new(
        "supervisor edges carry k x incident flow",
        "k sum_v sum_l (f(u,v) + f(v,u)) <= sum c_e",
        Value::lp(&(S::from_usize(k) * incidence.clone())),
        Relation::Le,
        Value::Exact(u_capacity.clone()),
        Binding::Binding,
    ));
    let ten = rational_from_usize(10);
    cert.push(Step::new(
        "supervisor capacity",
        "sum_{e at u} c_e <= n + 10n/k",
        Value::Exact(u_capacity),
        Relation::Le,
        Value::Exact(&nr + &ten * &nr / &kr),
        Binding::Binding,
    ));
    let u_bound = &nr / &kr + &ten * &nr / (&kr * &kr);
    cert.push(Step::new(
        "supervisor incident flow",
        "sum_v sum_l (f(u,v) + f(v,u)) <= n/k + 10n/k^2",
        Value::lp(&incidence),
        Relation::Le,
        Value::Exact(u_bound.clone()),
        Binding::Binding,
    ));
    cert.push(
        Step::new(
            "incident bound vs 1.5 n/k",
            "n/k + 10n/k^2 <= 1.5 n/k",
            Value::Exact(u_bound),
            Relation::Le,
            Value::Exact(ratio(3, 2) * &nr / &kr),
            Binding::Binding,
        )
        .binding_if(k_ok, k_why.clone()),
    );
    let through_total = through.iter().fold(S::zero(), |a, t| a + t.clone());
    cert.push(
        Step::new(
            "flow through supervisor",
            "total flow through u <= 0.75 n/k",
            Value::lp(&through_total),
            Relation::Le,
            Value::Exact(ratio(3, 4) * &nr / &kr),
            Binding::Binding,
        )
        .binding_if(k_ok, k_why.clone()),
    );
    let tenth = ratio(1, 10);
    let nine_tenths = ratio(9, 10);
    let low_u: Vec<bool> = avoid.iter().map(|a| at_least(a, &tenth)).collect();
    let mostly_avoid = avoid.iter().filter(|a| at_least(*a, &nine_tenths)).count();
    let frac = |c: usize| Value::Exact(rational_from_usize(c) / rational_from_usize(m));
    cert.push(
        Step::new(
            "averaging, 1/10 reading",
            "fraction of sources sending >= 1/10 avoiding u >= 1/6",
            frac(low_u.iter().filter(|&&b| b).count()),
            Relation::Ge,
            Value::Exact(ratio(1, 6)),
            Binding::Binding,
        )
        .binding_if(k_ok, k_why.clone()),
    );
    cert.push(
        Step::new(
            "averaging, 9/10 reading",
            "fraction of sources sending >= 9/10 avoiding u >= 1/6",
            frac(mostly_avoid),
            Relation::Ge,
            Value::Exact(ratio(1, 6)),
            Binding::Binding,
        )
        .binding_if(k_ok, k_why.clone()),
    );
    let chosen: Vec<usize> = (0..m).filter(|&l| alpha.far[l] && low_u[l]).collect();
    cert.push(
        Step::new(
            "far and low-supervisor blocks",
            "|L| >= n/(15k)",
            Value::int(chosen.len()),
            Relation::Ge,
            Value::Exact(&nr / (rational_from_usize(15) * &kr)),
            Binding::Binding,
        )
        .binding_if(chain_ok, chain_why.clone())
        .note(format!("L = {{{}}}", chosen.iter().map(|l| (l + 1).to_string()).collect::<Vec<_>>().join(", "))),
    );

    cert.push(Step::new(
        "degree bound on Γ edges",
        "c n >= |E[X∪Y]|",
        Value::int(deg * n),
        Relation::Ge,
        Value::int(gamma_count),
        Binding::Binding,
    )
    .note(format!("{} direct X-Y wires before hardwiring", shape.xy_edges)));
    let kk = S::from_usize(k);
    let gamma_load = network.gamma_edges.iter().fold(S::zero(), |a, &e| a + flow.edge_load(e));
    cert.push(Step::new(
        "Γ edges bound their flow",
        "|E[X∪Y]| = sum c_e >= k sum_e sum_l f_l(e)",
        Value::int(gamma_count),
        Relation::Ge,
        Value::lp(&(kk.clone() * gamma_load.clone())),
        Binding::Binding,
    ));
    let chosen_length = chosen.iter().fold(S::zero(), |a, &l| a + flow_length_within(&flow, l, &gamma_mask));
    let lhs_chain = kk.clone() * chosen_length;
    cert.push(Step::new(
        "restrict to L",
        "k sum_l over all >= k sum over L",
        Value::lp(&(kk.clone() * gamma_load)),
        Relation::Ge,
        Value::lp(&lhs_chain),
        Binding::Binding,
    ));
    let log2c = 2.0 * half_log(deg, n);
    cert.push(
        Step::new(
            "printed final bound",
            "k sum over L of Γ flow length >= (n/30) log_{2c} n",
            Value::lp(&lhs_chain),
            Relation::Ge,
            Value::Real(n as f64 / 30.0 * log2c),
            Binding::Binding,
        )
        .binding_if(chain_ok, chain_why.clone()),
    );
    let lower = chosen.iter().fold(S::zero(), |a, &l| {
        a + avoid[l].clone() * S::from_usize(gamma_distance[l].unwrap_or(0))
    });
    let unreachable = chosen.iter().filter(|&&l| gamma_distance[l].is_none()).count();
    let mut path_step = Step::new(
        "avoiding flow crosses Γ",
        "Γ flow length of l >= (flow avoiding u) x (Γ edges on any path avoiding u)",
        Value::lp(&lhs_chain),
        Relation::Ge,
        Value::lp(&(kk * lower.clone())),
        Binding::Binding,
    );
    if unreachable > 0 {
        path_step = path_step.note(format!("{unreachable} blocks in L cannot reach their sink without u"));
    }
    cert.push(path_step);
    let min_gamma = chosen.iter().filter_map(|&l| gamma_distance[l]).min();
    cert.push(
        Step::new(
            "far blocks stay far without u",
            "Γ edges between s_l and t_l in G - u >= half log_{2c} n",
            min_gamma.map_or(Value::Real(f64::INFINITY), Value::int),
            Relation::Ge,
            Value::Real(half_log(deg, n)),
            Binding::Binding,
        )
        .binding_if(chain_ok && !chosen.is_empty(), if chosen.is_empty() { "L is empty".to_string() } else { chain_why.clone() }),
    );
    cert.push(
        Step::new(
            "re-derived final bound",
            "k |L| (1/10) (half log_{2c} n) >= (n/300) log_{2c} n",
            Value::lp(&lhs_chain),
            Relation::Ge,
            Value::Real(n as f64 / 300.0 * log2c),
            Binding::Binding,
        )
        .binding_if(chain_ok, chain_why),
    );
    cert.push(Step::new(
        "implied degree, printed chain",
        "c >= smallest c with c n >= (n/30) log_{2c} n",
        Value::int(deg),
        Relation::Ge,
        Value::Real(implied_degree_bound(n, 1.0 / 30.0)),
        Binding::Informational,
    ));
    cert.push(Step::new(
        "implied degree, re-derived chain",
        "c >= smallest c with c n >= (n/300) log_{2c} n",
        Value::int(deg),
        Relation::Ge,
        Value::Real(implied_degree_bound(n, 1.0 / 300.0)),
        Binding::Informational,
    ));

    Ok(ModeBReport {
        shape,
        alpha,
        extraction,
        network,
        correctness,
        coding,
        flow_instance,
        flow,
        avoid,
        gamma_distance,
        certificate: cert,
    })
}
