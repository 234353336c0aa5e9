use rayon::prelude::*;

use super::{gate_rule, half_log, is_far, Binding, Certificate, ReductionError, Relation, ShiftHint, ShiftLayout, Step, Value};
use crate::bits::BitString;
use crate::circuit::{degree_profile, undirected_distances, Circuit, NodeId, NodeKind};
use crate::flow::{flow_length, max_concurrent_flow_with, verify_flow, Capacity, FlowInstance, FlowOptions, FlowSolution, PivotRule};
use crate::funcgen::{check_shift_circuit, ShiftSpec};
use crate::netcode::{
    measure_rate, undirect, verify_correctness, Alphabet, CodingSolution, CommInstance, CommInstanceBuilder, Correctness, EdgeFn,
    RateReport,
};
use crate::scalar::{rational_from_usize, Scalar};

/// Far-pair counts for every shift.
#[derive(Clone, Debug)]
pub struct ShiftChoice {
    pub l0: usize,
    pub far_count: usize,
    /// `counts[l - 1]`: far pairs under shift `l`.
    pub counts: Vec<usize>,
    /// Max in/out degree of the circuit.
    pub c: usize,
    /// `d(x_j, y_{target(j, l0)})`.
    pub distances: Vec<Option<usize>>,
    pub far: Vec<bool>,
}

impl ShiftChoice {
    pub fn mean_count(&self) -> f64 {
        self.counts.iter().sum::<usize>() as f64 / self.counts.len() as f64
    }
}

/// Exact BFS distances from every `x_j` to every output; `l0` maximises the
/// number of far pairs, smallest on ties.
pub fn choose_shift_a(c: &Circuit, layout: &ShiftLayout) -> Result<ShiftChoice, ReductionError> {
    let n = layout.n;
    let profile = degree_profile(c, None)?;
    let deg = profile.max_in.max(profile.max_out).max(1);
    let outputs: Vec<NodeId> = c.outputs().collect();
    let dist: Vec<Vec<Option<usize>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let d = undirected_distances(c, c.input(j), None)?;
            Ok(outputs.iter().map(|o| d[o.0]).collect())
        })
        .collect::<Result<_, ReductionError>>()?;
    let pair = |j: usize, l: usize| layout.target(j, l).map(|t| dist[j][t]);
    let counts: Vec<usize> = (1..=n)
        .map(|l| (0..n).filter(|&j| pair(j, l).is_some_and(|d| is_far(d, deg, n))).count())
        .collect();
    let (best, &far_count) = counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).unwrap();
    let l0 = best + 1;
    let distances: Vec<Option<usize>> = (0..n).map(|j| pair(j, l0).flatten()).collect();
    let far = (0..n).map(|j| pair(j, l0).is_some_and(|d| is_far(d, deg, n))).collect();
    Ok(ShiftChoice { l0, far_count, counts, c: deg, distances, far })
}

/// The circuit's DAG with unit capacities and pairs `(x_j, y_{target(j, l0)})`,
/// together with the witness solution in which every edge carries the value
/// its tail takes when the shift block is fixed to `l0`.
pub fn build_instance_a(c: &Circuit, layout: &ShiftLayout, l0: usize) -> Result<(CommInstance, CodingSolution), ReductionError> {
    if l0 == 0 || l0 > layout.n {
        return Err(ReductionError::Invalid(format!("shift {l0} outside 1..={}", layout.n)));
    }
    let mut b = CommInstanceBuilder::new();
    for v in c.ids() {
        b.add_node(c.node(v).name.clone());
    }
    let unit = Capacity::Finite(rational_from_usize(1));
    for (s, d) in c.edges() {
        b.add_edge(format!("{}>{}", c.node(s).name, c.node(d).name), s.0, d.0, unit.clone());
    }
    for j in 0..layout.n {
        let t = layout
            .target(j, l0)
            .ok_or_else(|| ReductionError::Layout(format!("no output paired with x{} under shift {l0}", j + 1)))?;
        b.add_pair(c.input(j).0, c.output(t).0, 1);
    }
    let inst = b.build()?;

    let shift_bits = layout.shift_assignment(c, l0);
    let mut sol = CodingSolution::new(&inst);
    let as_circuit = |u: usize| (u < c.len()).then_some(NodeId(u));
    for v in c.ids() {
        if c.succs(v).is_empty() {
            continue;
        }
        let f = match &c.node(v).kind {
            NodeKind::Input(_) => match shift_bits.iter().find(|(s, _)| *s == v) {
                Some(&(_, bit)) => EdgeFn::constant(BitString(vec![bit])),
                None => EdgeFn::forward(0),
            },
            _ => gate_rule(c, v, &inst, v.0, as_circuit)?,
        };
        for &e in inst.out_edges(v.0) {
            sol.set_edge(e, Alphabet::Bits(1), f.clone());
        }
    }
    for (i, p) in inst.pairs().iter().enumerate() {
        sol.set_decoder(i, gate_rule(c, NodeId(p.sink), &inst, p.sink, as_circuit)?);
    }
    Ok((inst, sol))
}

#[derive(Copy, Clone, Debug)]
pub struct ModeAOptions {
    pub cyclic: bool,
    pub hint: ShiftHint,
    pub budget: usize,
    pub strict: bool,
    pub rule: PivotRule,
}

impl Default for ModeAOptions {
    fn default() -> Self {
        Self { cyclic: false, hint: ShiftHint::Auto, budget: crate::netcode::DEFAULT_BUDGET, strict: false, rule: PivotRule::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ModeAReport<S> {
    pub layout: ShiftLayout,
    pub choice: ShiftChoice,
    pub instance: CommInstance,
    pub correctness: Correctness,
    pub coding: RateReport,
    pub flow_instance: FlowInstance,
    pub flow: FlowSolution<S>,
    pub certificate: Certificate,
}

/// Size at which `n - 2√n >= n/2`.
const FAR_PAIR_THRESHOLD: usize = 16;

/// Full mode-A pipeline: choose `l0`, build and measure the witness
/// solution, solve the flow LP on the undirected instance and evaluate the
/// distance chain.
pub fn certify_a<S: Scalar>(c: &Circuit, opts: &ModeAOptions) -> Result<ModeAReport<S>, ReductionError> {
    let layout = ShiftLayout::detect(c, opts.cyclic, opts.hint)?;
    let n = layout.n;
    let choice = choose_shift_a(c, &layout)?;
    let (instance, solution) = build_instance_a(c, &layout, choice.l0)?;
    let correctness = verify_correctness(&instance, &solution, opts.budget)?;
    let coding = measure_rate(&instance, &solution, opts.budget)?;
    let flow_instance = undirect(&instance, false)?;
    let flow: FlowSolution<S> =
        max_concurrent_flow_with(&flow_instance, FlowOptions { rule: opts.rule, cancel_cycles: true })?;
    let flow_violations = verify_flow(&flow_instance, &flow);

    let mut cert = Certificate::new("A", opts.strict);
    let edges = instance.network_edges().count();
    let deg = choice.c;
    cert.param("n", n);
    cert.param("shift", if layout.cyclic { "cyclic" } else { "plain" });
    cert.param("shift encoding", layout.encoding.map_or("none".into(), |e| format!("{e:?}").to_lowercase()));
    cert.param("c (max in/out degree)", deg);
    cert.param("l0", choice.l0);
    cert.param("far pairs at l0", choice.far_count);
    cert.param("far counts by shift", choice.counts.iter().map(usize::to_string).collect::<Vec<_>>().join(" "));
    cert.param("edges |E|", edges);
    cert.param("half log_{2c} n", format!("{:.9}", half_log(deg, n)));
    cert.param("lp rate r'", crate::flow::format_scalar(&flow.rate));

    let shift_step = |mismatch: usize| {
        Step::new(
            "circuit computes the shift",
            "shift function, exhaustive check",
            Value::int(mismatch),
            Relation::Eq,
            Value::int(0),
            Binding::Binding,
        )
    };
    cert.push(match layout.encoding {
        None => shift_step(0).binding_if(false, "no shift block; the circuit is paired as if it shifted by l0"),
        Some(enc) if n + enc.width(n) <= opts.budget => {
            let spec = ShiftSpec { n, cyclic: layout.cyclic };
            match check_shift_circuit(c, spec, enc) {
                Ok(found) => {
                    let step = shift_step(usize::from(found.is_some()));
                    match found {
                        Some((x, l)) => step.note(format!("disagrees at x = {}, l = {l}", BitString(x))),
                        None => step,
                    }
                }
                Err(e) => shift_step(1).note(e.to_string()),
            }
        }
        Some(_) => shift_step(0).binding_if(false, "beyond the enumeration budget"),
    });

    let source_min = coding.source_entropy.iter().copied().fold(f64::INFINITY, f64::min);
    cert.push(
        Step::new(
            "witness decodes every pair",
            "circuit as coding solution",
            Value::int(usize::from(correctness.counterexample.is_some())),
            Relation::Eq,
            Value::int(0),
            Binding::Binding,
        )
        .note(format!("{} message tuples enumerated", correctness.tuples)),
    );
    cert.push(Step::new(
        "edge entropies within capacity",
        "unit capacities carry gate values",
        Value::int(coding.violations.len()),
        Relation::Eq,
        Value::int(0),
        Binding::Binding,
    ));
    let coding_rate = if correctness.passed() { coding.rate.unwrap_or(0.0) } else { 0.0 };
    cert.push(Step::new(
        "coding rate",
        "coding rate r >= 1",
        Value::Real(coding_rate),
        Relation::Ge,
        Value::int(1),
        Binding::Binding,
    )
    .note(format!("min source entropy {source_min:.12}")));
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
        "flow rate r' >= coding rate",
        Value::lp(&flow.rate),
        Relation::Ge,
        Value::Real(coding_rate),
        Binding::Binding,
    ));

    let total_length = (0..n).fold(S::zero(), |acc, j| acc + flow_length(&flow, j));
    let far_distances: Vec<usize> =
        choice.far.iter().zip(&choice.distances).filter(|(f, _)| **f).filter_map(|(_, d)| *d).collect();
    let unreachable = choice.far.iter().zip(&choice.distances).filter(|(f, d)| **f && d.is_none()).count();
    let far_sum: usize = far_distances.iter().sum();
    let mut length_step = Step::new(
        "flow length covers far distances",
        "sum_j flow length >= sum over far j of d(x_j, y_j')",
        Value::lp(&total_length),
        Relation::Ge,
        Value::int(far_sum),
        Binding::Binding,
    )
    .binding_if(choice.far_count > 0, "no far pairs");
    if unreachable > 0 {
        length_step = length_step.note(format!("{unreachable} far pairs are unreachable and left out of the sum"));
    }
    cert.push(length_step);
    cert.push(Step::new(
        "edges bound total flow",
        "|E| = sum c_e >= sum_e sum_j f^j(e)",
        Value::int(edges),
        Relation::Ge,
        Value::lp(&total_length),
        Binding::Binding,
    ));
    let log_bound = choice.far_count as f64 * half_log(deg, n);
    cert.push(Step::new(
        "far distances vs log bound",
        "far pairs sit at distance >= half log_{2c} n",
        if unreachable > 0 { Value::Real(f64::INFINITY) } else { Value::int(far_sum) },
        Relation::Ge,
        Value::Real(log_bound),
        Binding::Binding,
    ));
    let big = n >= FAR_PAIR_THRESHOLD;
    let sqrt_n = (n as f64).sqrt();
    cert.push(
        Step::new(
            "far pairs at l0",
            "far count >= n - 2 sqrt n",
            Value::int(choice.far_count),
            Relation::Ge,
            Value::Real(n as f64 - 2.0 * sqrt_n),
            Binding::Binding,
        )
        .binding_if(big, format!("n = {n} < {FAR_PAIR_THRESHOLD}")),
    );
    cert.push(
        Step::new(
            "mean far fraction over shifts",
            "Pr over l of far pair >= 1 - 2/sqrt n",
            Value::Real(choice.mean_count() / n as f64),
            Relation::Ge,
            Value::Real(1.0 - 2.0 / sqrt_n),
            Binding::Binding,
        )
        .binding_if(big, format!("n = {n} < {FAR_PAIR_THRESHOLD}")),
    );
    cert.push(Step::new(
        "edge lower bound",
        "|E| >= far count * half log_{2c} n",
        Value::int(edges),
        Relation::Ge,
        Value::Real(log_bound),
        Binding::Binding,
    ));
    cert.push(Step::new(
        "edges per n log_{2c} n",
        "implied constant of the n log n bound",
        Value::Real(edges as f64 / (2.0 * n as f64 * half_log(deg, n))),
        Relation::Ge,
        Value::int(0),
        Binding::Informational,
    ));

    Ok(ModeAReport { layout, choice, instance, correctness, coding, flow_instance, flow, certificate: cert })
}
