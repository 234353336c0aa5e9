//! One line per acceptance criterion. Runs without the libtest harness so the
//! report is always printed.

use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftnet::circuit::{ball_size, degree_profile, Circuit};
use shiftnet::correction::{analyze, lemma_budget, lemma_budget_blocks, Family, GameSpec, GammaEncoder};
use shiftnet::flow::{max_concurrent_flow_with, verify_flow, Capacity, Commodity, FlowEdge, FlowInstance, FlowOptions};
use shiftnet::funcgen::{
    build_barrel_shifter, build_depth3_identity, build_depth3_shift, build_shifter, check_shift_circuit, random_circuit,
    random_depth3, RandomCircuitSpec, ShiftEncoding, ShiftSpec,
};
use shiftnet::netcode::{measure_rate, verify_correctness};
use shiftnet::reduction::{
    build_network_b, certify_a, certify_b, extract_family, Binding, Depth3Shape, ModeAOptions, ModeBOptions, ShiftHint,
    ShiftLayout,
};
use shiftnet::scalar::rational_from_usize;
use shiftnet::{NodeId, Rational};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for n in [2, 4, 8] {
        let c = build_barrel_shifter(n).unwrap();
        if let Some((x, l)) = check_shift_circuit(&c, ShiftSpec::plain(n), ShiftEncoding::Binary).unwrap() {
            bad.push(format!("n={n} x={x:?} l={l}"));
        }
    }
    let t = start.elapsed();
    outcome(bad.is_empty() && t < Duration::from_secs(10), format!("n in {{2,4,8}} exhaustive, {:.2?}, mismatches {bad:?}", t))
}

fn hardwire_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failures = 0;
    let mut checked = 0u64;
    for _ in 0..100 {
        let n_in = rng.gen_range(1..=10);
        let spec = RandomCircuitSpec {
            n_in,
            n_gates: rng.gen_range(0..=12),
            n_out: rng.gen_range(1..=4),
            max_fan_in: 3,
            max_fan_out: 3,
        };
        let c = random_circuit(&mut rng, spec);
        let mut fixed: Vec<(NodeId, bool)> = Vec::new();
        for i in 0..n_in {
            if rng.gen_bool(0.4) {
                fixed.push((c.input(i), rng.gen_bool(0.5)));
            }
        }
        let (h, map) = c.hardwire_with_map(&fixed).unwrap();
        let free: Vec<usize> = (0..n_in).filter(|&i| fixed.iter().all(|f| f.0 != c.input(i))).collect();
        let new_pos: Vec<usize> = free
            .iter()
            .map(|&i| h.inputs().position(|v| Some(v) == map[c.input(i).0]).expect("free input survives"))
            .collect();
        for bits in 0..1u64 << free.len() {
            let mut full = vec![false; n_in];
            for &(v, b) in &fixed {
                full[(0..n_in).find(|&i| c.input(i) == v).unwrap()] = b;
            }
            let mut reduced = vec![false; h.n_in()];
            for (k, (&i, &p)) in free.iter().zip(&new_pos).enumerate() {
                let b = (bits >> k) & 1 == 1;
                full[i] = b;
                reduced[p] = b;
            }
            checked += 1;
            if c.evaluate(&full).unwrap() != h.evaluate(&reduced).unwrap() {
                failures += 1;
            }
        }
    }
    outcome(failures == 0, format!("100 random circuits, {checked} assignments, {failures} disagreements"))
}

/// Largest `r` with `D^(2r) <= t`, i.e. `floor(½ log_D t)`.
fn half_log_floor(d: usize, t: usize) -> usize {
    let mut r = 0;
    while (d as u128).pow(2 * (r as u32 + 1)) <= t as u128 {
        r += 1;
    }
    r
}

fn ball_growth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut circuits: Vec<(String, Circuit)> = Vec::new();
    for n in [4, 8, 16, 32] {
        circuits.push((format!("barrel {n}"), build_barrel_shifter(n).unwrap()));
        circuits.push((format!("cyclic barrel {n}"), build_shifter(ShiftSpec::cyclic(n)).unwrap()));
    }
    for n in [8, 16] {
        circuits.push((format!("depth3-id {n}"), build_depth3_identity(n, 2).unwrap()));
        circuits.push((format!("depth3 random {n}"), random_depth3(&mut rng, n, n / 4, 2, 2)));
    }
    for i in 0..20 {
        let spec = RandomCircuitSpec { n_in: 6, n_gates: 40 + 5 * i, n_out: 4, max_fan_in: 2, max_fan_out: 2 };
        circuits.push((format!("random {i}"), random_circuit(&mut rng, spec)));
    }
    let mut violations = Vec::new();
    let mut balls = 0;
    for (name, c) in &circuits {
        let d = degree_profile(c, None).unwrap().max_undirected.max(2);
        let t = c.len();
        let r = half_log_floor(d, t);
        let limit = (t as f64).sqrt() * d as f64;
        for v in c.ids() {
            balls += 1;
            let size = ball_size(c, v, r, None).unwrap();
            if size as f64 > limit {
                violations.push(format!("{name}: node {} ball {size} > {limit:.2}", v.0));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("{} circuits, {balls} balls, {} violations {:?}", circuits.len(), violations.len(), violations.first()),
    )
}

fn protocol_rate() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut runs = 0;
    let mut problems = Vec::new();
    for n in [8, 16] {
        let c = build_depth3_identity(n, 1).unwrap();
        let layout = ShiftLayout::detect(&c, true, ShiftHint::Auto).unwrap();
        let shape = Depth3Shape::new(&c, layout, None).unwrap();
        let ex = extract_family(&shape, 1, 20).unwrap();
        for k in [2, 4] {
            for (label, family) in [
                ("full", Family::full(n).unwrap()),
                ("density 1/4", Family::random(&mut rng, n, 1 << (n - 2)).unwrap()),
            ] {
                runs += 1;
                let net = build_network_b(&ex.gamma, &shape.layout, 1, &family, k, 20).unwrap();
                let ok = verify_correctness(&net.instance, &net.solution, 20).unwrap().passed();
                let r = measure_rate(&net.instance, &net.solution, 20).unwrap();
                let over = r.edges.iter().filter(|e| e.entropy > e.capacity.to_f64() + 1e-9).count();
                if !ok || over > 0 || !r.violations.is_empty() || r.rate != Some(k as f64) {
                    problems.push(format!("n={n} k={k} {label}: correct {ok}, {over} edges over capacity, rate {:?}", r.rate));
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(problems.is_empty() && t < Duration::from_secs(60), format!("{runs} networks in {t:.2?}; {problems:?}"))
}

fn budget_reproduction() -> Outcome {
    // Independent transcription of the printed expression.
    let printed = |n: f64, k: f64, eps: f64| {
        3.0 * n / k + 2.0 * n / k * (k * (eps / 2.0).sqrt() + 1.0).log2() + (eps / 8.0).sqrt() * n * (2.0 / eps).log2()
    };
    let mut worst: f64 = 0.0;
    for n in [20usize, 100, 1000, 6000] {
        for k in [1usize, 2, 4, 5, 10, 20] {
            for eps in [1.0 / 300.0, 0.01, 0.1, 0.25, 1.0] {
                let blocks = lemma_budget_blocks(n, k, eps).unwrap().total;
                let players = lemma_budget(n, n / k, eps).unwrap().total;
                let want = printed(n as f64, k as f64, eps);
                worst = worst.max((blocks - want).abs() / want).max((players - want).abs() / want);
            }
        }
    }
    outcome(worst <= 1e-9, format!("three-term expression at m = n/k, worst relative error {worst:.2e}"))
}

fn five_n_over_k_claim() -> Outcome {
    let n = 6000;
    let b = lemma_budget_blocks(n, 20, 1.0 / 300.0).unwrap();
    let limit = 5.0 * n as f64 / 20.0;
    outcome(
        b.total <= limit + 1e-9,
        format!(
            "k=20, eps=1/300: terms {:.4}n {:.4}n {:.4}n, total {:.4}n vs 5n/k = {:.4}n",
            b.terms[0] / n as f64,
            b.terms[1] / n as f64,
            b.terms[2] / n as f64,
            b.total / n as f64,
            limit / n as f64
        ),
    )
}

fn correction_game() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut problems = Vec::new();
    let mut games = 0;
    for (n, m) in [(8, 2), (8, 4), (12, 3), (12, 4), (16, 4), (16, 8)] {
        // ε = 1 - log|F|/n <= 1/4
        let min_size = 1usize << (n - n / 4);
        for size in [min_size, min_size * 2, 1 << n] {
            games += 1;
            let spec = GameSpec::new(m, Family::random(&mut rng, n, size).unwrap()).unwrap();
            let a = analyze(&spec, &GammaEncoder, 20).unwrap();
            let budget = lemma_budget(n, m, spec.epsilon()).unwrap().total;
            let measured = a.total_expected.to_f64().unwrap();
            if a.failures > 0 || !a.prefix_free() || !a.source_coding_holds() || measured > 3.0 * budget {
                problems.push(format!(
                    "n={n} m={m} |F|={size}: failures {}, prefix-free {}, {measured:.3} vs 3x{budget:.3}",
                    a.failures,
                    a.prefix_free()
                ));
            }
        }
    }
    outcome(problems.is_empty(), format!("{games} games enumerated over every beta; {problems:?}"))
}

fn unit(name: &str, u: usize, v: usize) -> FlowEdge {
    FlowEdge { name: name.into(), u, v, capacity: Capacity::Finite(rational_from_usize(1)) }
}

fn lp_correctness() -> Outcome {
    let mut cases: Vec<(String, FlowInstance, f64)> = Vec::new();
    cases.push((
        "single pair".into(),
        FlowInstance::new(vec!["s".into(), "t".into()], vec![unit("st", 0, 1)], vec![Commodity { source: 0, sink: 1 }]).unwrap(),
        1.0,
    ));
    for k in 1..=6 {
        // sources 0..k, hub k, sink k+1
        let mut nodes: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
        nodes.extend(["hub".into(), "t".into()]);
        let mut edges: Vec<FlowEdge> = (0..k).map(|i| unit(&format!("in{i}"), i, k)).collect();
        edges.push(unit("shared", k, k + 1));
        let comms = (0..k).map(|i| Commodity { source: i, sink: k + 1 }).collect();
        cases.push((format!("{k} pairs on one edge"), FlowInstance::new(nodes, edges, comms).unwrap(), 1.0 / k as f64));
    }
    let c4 = FlowInstance::new(
        (0..4).map(|i| format!("v{i}")).collect(),
        (0..4).map(|i| unit(&format!("e{i}"), i, (i + 1) % 4)).collect(),
        vec![Commodity { source: 0, sink: 2 }, Commodity { source: 1, sink: 3 }],
    )
    .unwrap();
    cases.push(("C4 antipodal".into(), c4, 1.0));

    let mut problems = Vec::new();
    for (name, inst, want) in &cases {
        let on = max_concurrent_flow_with::<f64>(inst, FlowOptions::default()).unwrap();
        let off = max_concurrent_flow_with::<f64>(inst, FlowOptions { cancel_cycles: false, ..Default::default() }).unwrap();
        let exact = max_concurrent_flow_with::<Rational>(inst, FlowOptions::default()).unwrap();
        let v = verify_flow(inst, &on).len() + verify_flow(inst, &off).len() + verify_flow(inst, &exact).len();
        if (on.rate - want).abs() > 1e-6
            || (on.rate - off.rate).abs() > 1e-6
            || (exact.rate.to_f64().unwrap() - want).abs() > 1e-6
            || v > 0
        {
            problems.push(format!("{name}: rate {} (no cancel {}), {v} violations", on.rate, off.rate));
        }
    }
    outcome(problems.is_empty(), format!("{} instances, f64 and exact; {problems:?}", cases.len()))
}

fn certificate_chains() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();

    let barrel = build_barrel_shifter(8).unwrap();
    let a = certify_a::<Rational>(&barrel, &ModeAOptions::default()).unwrap();
    let b = certify_b::<Rational>(
        &build_depth3_identity(16, 1).unwrap(),
        &ModeBOptions { k: 4, cyclic: true, ..Default::default() },
    )
    .unwrap();
    for (cert, edges_step) in [(&a.certificate, "edges bound total flow"), (&b.certificate, "Γ edges bound their flow")] {
        for name in ["conjecture consistency", edges_step] {
            match cert.step(name) {
                Some(s) if s.pass && matches!(s.lhs, shiftnet::reduction::Value::Exact(_)) => {}
                Some(s) => problems.push(format!("mode {}: `{name}` {} {}", cert.mode, s.lhs, s.rhs)),
                None => problems.push(format!("mode {}: missing `{name}`", cert.mode)),
            }
        }
        let table = cert.render_table();
        for s in &cert.steps {
            if let Binding::Vacuous(why) = &s.binding {
                if !table.contains(&format!("vacuous: {why}")) {
                    problems.push(format!("mode {}: vacuous step `{}` not flagged", cert.mode, s.name));
                }
            }
        }
        if cert.vacuous_count() == 0 {
            problems.push(format!("mode {}: no step flagged vacuous at this size", cert.mode));
        }
    }
    let t = start.elapsed();
    outcome(
        problems.is_empty() && t < Duration::from_secs(300),
        format!(
            "A: {}, B: {}, exact LPs, {t:.1?}; {problems:?}",
            if a.certificate.verdict() { "PASS" } else { "FAIL" },
            if b.certificate.verdict() { "PASS" } else { "FAIL" }
        ),
    )
}

fn determinism() -> Outcome {
    let d3 = build_depth3_shift(ShiftSpec::plain(8), 0.5, ShiftEncoding::OneHot).unwrap().circuit;
    let opts = ModeBOptions { k: 2, ..Default::default() };
    let render = || {
        let b = certify_b::<f64>(&d3, &opts).unwrap().certificate;
        let a = certify_a::<f64>(&build_barrel_shifter(8).unwrap(), &ModeAOptions::default()).unwrap().certificate;
        (a.render_table() + &a.to_csv(), b.render_table() + &b.to_csv())
    };
    let first = render();
    let second = render();
    outcome(first == second, "certify A (barrel 8) and B (depth-3 shift 8) rendered twice, text and csv")
}

/// Criteria that cannot hold as stated; reported but not fatal.
const KNOWN_FAILING: &[usize] = &[5];

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 hardwire soundness", hardwire_soundness),
        ("3 ball growth", ball_growth),
        ("4 protocol achieves rate k", protocol_rate),
        ("5 budget reproduces the three-term expression", budget_reproduction),
        ("5 budget within 5n/k at k=20, eps=1/300", five_n_over_k_claim),
        ("6 correction game", correction_game),
        ("7 LP correctness", lp_correctness),
        ("8 certificate chains", certificate_chains),
        ("9 determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let o = run();
        let id: usize = name.split(' ').next().unwrap().parse().unwrap();
        let known = KNOWN_FAILING.contains(&id) && name.contains("within 5n/k");
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == known {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome: {unexpected:?}");
        std::process::exit(1);
    }
}
