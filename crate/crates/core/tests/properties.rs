use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftnet::circuit::{ball_radius_bound, ball_size, degree_profile};
use shiftnet::correction::{
    expected_cost, gamma_decode, gamma_encode, FlipEncoder, Family, GameSpec, GammaEncoder, NearestTable,
};
use shiftnet::flow::{
    max_concurrent_flow, verify_flow, Capacity, Commodity, CommodityStatus, FlowEdge, FlowInstance,
};
use shiftnet::funcgen::{build_depth3_identity, build_depth3_shift, build_shifter, random_circuit, RandomCircuitSpec, ShiftEncoding, ShiftSpec};
use shiftnet::netcode::{measure_rate, verify_correctness};
use shiftnet::reduction::{build_instance_a, build_network_b, extract_family, Depth3Shape, ShiftHint, ShiftLayout};
use shiftnet::scalar::{ratio, rational_from_usize};
use shiftnet::NodeId;

fn small_circuit(seed: u64) -> shiftnet::Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = RandomCircuitSpec {
        n_in: rng.gen_range(1..=8),
        n_gates: rng.gen_range(0..=20),
        n_out: rng.gen_range(1..=4),
        max_fan_in: rng.gen_range(1..=3),
        max_fan_out: rng.gen_range(1..=3),
    };
    random_circuit(&mut rng, spec)
}

/// Connected random graph: a spanning path plus extra edges, integer
/// capacities in 1..=3, commodities between distinct nodes.
fn random_flow(seed: u64) -> FlowInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let cap = |rng: &mut ChaCha8Rng| Capacity::Finite(rational_from_usize(rng.gen_range(1..=3)));
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push(FlowEdge { name: format!("p{v}"), u, v, capacity: cap(&mut rng) });
    }
    for i in 0..rng.gen_range(0..=n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push(FlowEdge { name: format!("e{i}"), u, v, capacity: cap(&mut rng) });
        }
    }
    let mut comms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let s = rng.gen_range(0..n);
        let t = (s + rng.gen_range(1..n)) % n;
        comms.push(Commodity { source: s, sink: t });
    }
    FlowInstance::new((0..n).map(|i| format!("v{i}")).collect(), edges, comms).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hardwire_commutes_with_evaluate(seed in any::<u64>(), mask in any::<u16>(), values in any::<u16>()) {
        let c = small_circuit(seed);
        let fixed: Vec<(NodeId, bool)> = (0..c.n_in())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| (c.input(i), values >> i & 1 == 1))
            .collect();
        let (h, map) = c.hardwire_with_map(&fixed).unwrap();
        let free: Vec<usize> = (0..c.n_in()).filter(|i| mask >> i & 1 == 0).collect();
        for bits in 0..1u64 << free.len() {
            let mut full: Vec<bool> = (0..c.n_in()).map(|i| values >> i & 1 == 1).collect();
            let mut reduced = vec![false; h.n_in()];
            for (k, &i) in free.iter().enumerate() {
                let b = bits >> k & 1 == 1;
                full[i] = b;
                let pos = h.inputs().position(|v| Some(v) == map[c.input(i).0]).unwrap();
                reduced[pos] = b;
            }
            prop_assert_eq!(c.evaluate(&full).unwrap(), h.evaluate(&reduced).unwrap());
        }
    }

    #[test]
    fn balls_grow_and_respect_moore_bound(seed in any::<u64>()) {
        let c = small_circuit(seed);
        let d = degree_profile(&c, None).unwrap().max_undirected;
        for v in c.ids() {
            let mut prev = 0;
            for r in 0..5 {
                let size = ball_size(&c, v, r, None).unwrap();
                prop_assert!(size >= prev);
                prop_assert!(size as u128 <= ball_radius_bound(d, r));
                prev = size;
            }
        }
    }

    #[test]
    fn gamma_round_trip(v in 1usize..1_000_000, tail in any::<u8>()) {
        let mut bits = gamma_encode(v).0;
        let len = bits.len();
        bits.extend((0..8).map(|i| tail >> i & 1 == 1));
        prop_assert_eq!(gamma_decode(&bits), Some((v, len)));
    }

    #[test]
    fn flip_sets_round_trip(block in 1usize..24, raw in proptest::collection::btree_set(0usize..24, 0..8)) {
        let flips: Vec<usize> = raw.into_iter().filter(|&p| p < block).collect();
        let msg = GammaEncoder.encode(&flips, block);
        prop_assert_eq!(GammaEncoder.decode(&msg, block).unwrap(), flips);
    }

    #[test]
    fn adding_capacity_never_lowers_rate(seed in any::<u64>(), edge in any::<prop::sample::Index>()) {
        let inst = random_flow(seed);
        let base = max_concurrent_flow::<f64>(&inst).unwrap();
        prop_assert!(verify_flow(&inst, &base).is_empty());
        let e = edge.index(inst.edges().len());
        let Capacity::Finite(c) = &inst.edges()[e].capacity else { unreachable!() };
        let wider = inst.with_capacity(e, Capacity::Finite(c + ratio(1, 1)));
        let more = max_concurrent_flow::<f64>(&wider).unwrap();
        prop_assert!(more.rate >= base.rate - 1e-6, "{} -> {}", base.rate, more.rate);
    }

    #[test]
    fn rate_ignores_commodity_order(seed in any::<u64>()) {
        let inst = random_flow(seed);
        let mut comms = inst.commodities().to_vec();
        comms.reverse();
        let swapped = FlowInstance::new(inst.nodes().to_vec(), inst.edges().to_vec(), comms).unwrap();
        let a = max_concurrent_flow::<f64>(&inst).unwrap();
        let b = max_concurrent_flow::<f64>(&swapped).unwrap();
        prop_assert!((a.rate - b.rate).abs() <= 1e-6);
    }

    #[test]
    fn routed_flow_is_at_least_the_distance(seed in any::<u64>()) {
        let inst = random_flow(seed);
        let sol = max_concurrent_flow::<f64>(&inst).unwrap();
        for (i, c) in inst.commodities().iter().enumerate() {
            if sol.status[i] == CommodityStatus::Routed {
                let d = inst.distance(c.source, c.sink).unwrap() as f64;
                prop_assert!(shiftnet::flow::flow_length(&sol, i) >= d - 1e-6);
            }
        }
    }

    #[test]
    fn enlarging_family_never_increases_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..=10);
        let (s1, s2) = (rng.gen_range(1..16), rng.gen_range(1..8));
        let small = Family::random(&mut rng, n, s1.min(1 << n)).unwrap();
        let big = small.union(&Family::random(&mut rng, n, s2.min(1 << n)).unwrap()).unwrap();
        let (ts, tb) = (NearestTable::build(&small), NearestTable::build(&big));
        for beta in 0..1u32 << n {
            prop_assert!(tb.distance(beta) <= ts.distance(beta));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mode_a_witness_is_correct(n_log in 1u32..=3, cyclic in any::<bool>(), depth3 in any::<bool>(), l0 in any::<prop::sample::Index>()) {
        let n = 1usize << n_log;
        let spec = if cyclic { ShiftSpec::cyclic(n) } else { ShiftSpec::plain(n) };
        let c = if depth3 {
            build_depth3_shift(spec, 0.5, ShiftEncoding::Binary).unwrap().circuit
        } else {
            build_shifter(spec).unwrap()
        };
        let layout = ShiftLayout::detect(&c, cyclic, ShiftHint::Auto).unwrap();
        let (inst, sol) = build_instance_a(&c, &layout, l0.index(n) + 1).unwrap();
        prop_assert!(verify_correctness(&inst, &sol, 20).unwrap().passed());
        let r = measure_rate(&inst, &sol, 20).unwrap();
        prop_assert!(r.violations.is_empty());
        prop_assert!(r.rate.unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn mode_b_protocol_achieves_rate_k(seed in any::<u64>(), wide in any::<bool>(), k in prop::sample::select(vec![1usize, 2, 4])) {
        let n = if wide { 8 } else { 4 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = build_depth3_identity(n, 1).unwrap();
        let layout = ShiftLayout::detect(&c, true, ShiftHint::Auto).unwrap();
        let shape = Depth3Shape::new(&c, layout, None).unwrap();
        let ex = extract_family(&shape, 1, 20).unwrap();
        let size = rng.gen_range(1..=1usize << n);
        let family = Family::random(&mut rng, n, size).unwrap();
        let net = build_network_b(&ex.gamma, &shape.layout, 1, &family, k, 20).unwrap();
        prop_assert!(verify_correctness(&net.instance, &net.solution, 20).unwrap().passed());
        let r = measure_rate(&net.instance, &net.solution, 20).unwrap();
        prop_assert!(r.violations.is_empty());
        prop_assert_eq!(r.rate, Some(k as f64));
        for e in &r.edges {
            prop_assert!(e.entropy <= e.alphabet_bound + 1e-9, "{}", e.name);
        }
    }
}

/// Moving the nearest target to a string with fewer but farther-apart flips
/// can lengthen the gamma-coded hint, so the expected cost is not monotone in
/// the family even though every distance shrinks.
#[test]
fn enlarging_family_can_increase_gamma_cost() {
    let small = Family::new(8, [11, 23, 158, 195, 199, 203, 239, 255]).unwrap();
    let big = small.union(&Family::new(8, [138]).unwrap()).unwrap();
    let (_, before) = expected_cost(&GameSpec::new(2, small).unwrap(), 20).unwrap();
    let (_, after) = expected_cost(&GameSpec::new(2, big).unwrap(), 20).unwrap();
    assert_eq!(before, ratio(1299, 128));
    assert_eq!(after, ratio(1309, 128));
}
