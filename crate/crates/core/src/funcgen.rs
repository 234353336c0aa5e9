//! Reference oracles for shifts and products, and generators of concrete
//! circuits that compute them.

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bits::ceil_log2;
use crate::circuit::{degree_profile, Circuit, CircuitBuilder, CircuitError, GateFn, Layers, NodeId};
use crate::scalar::rational_from_usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncgenError {
    #[error("width {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("shift {l} outside [1, {n}]")]
    ShiftOutOfRange { l: usize, n: usize },
    #[error("input has {got} bits, expected {expected}")]
    InputLength { expected: usize, got: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Shift function parameters: plain shifts place `x` inside `2n` zero bits,
/// cyclic shifts rotate within `n` bits.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ShiftSpec {
    pub n: usize,
    pub cyclic: bool,
}

impl ShiftSpec {
    pub fn plain(n: usize) -> Self {
        Self { n, cyclic: false }
    }

    pub fn cyclic(n: usize) -> Self {
        Self { n, cyclic: true }
    }

    pub fn output_width(&self) -> usize {
        if self.cyclic {
            self.n
        } else {
            2 * self.n
        }
    }

    /// 0-based output position receiving `x_{j+1}` under shift `l` (1-based),
    /// or `None` when it falls outside (plain shifts never do for j < n).
    pub fn target(&self, j: usize, l: usize) -> usize {
        if self.cyclic {
            (j + l - 1) % self.n
        } else {
            j + l - 1
        }
    }
}

/// How the shift amount reaches the circuit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ShiftEncoding {
    /// `ceil(lg n)` bits holding `l - 1`, least significant first.
    Binary,
    /// `n` bits with a single 1 at position `l`.
    OneHot,
}

impl ShiftEncoding {
    pub fn width(&self, n: usize) -> usize {
        match self {
            ShiftEncoding::Binary => ceil_log2(n),
            ShiftEncoding::OneHot => n,
        }
    }

    pub fn encode(&self, n: usize, l: usize) -> Vec<bool> {
        match self {
            ShiftEncoding::Binary => (0..ceil_log2(n)).map(|b| ((l - 1) >> b) & 1 == 1).collect(),
            ShiftEncoding::OneHot => (1..=n).map(|i| i == l).collect(),
        }
    }
}

/// `s(x, l)`: plain shifts give `y_j = x_{j-l+1}` for `l <= j <= l+n-1` and
/// zero elsewhere (2n bits); cyclic shifts give `y_j = x_{((j-l) mod n)+1}`.
pub fn shift_oracle(spec: ShiftSpec, x: &[bool], l: usize) -> Result<Vec<bool>, FuncgenError> {
    let n = spec.n;
    if x.len() != n {
        return Err(FuncgenError::InputLength { expected: n, got: x.len() });
    }
    if l < 1 || l > n {
        return Err(FuncgenError::ShiftOutOfRange { l, n });
    }
    let mut y = vec![false; spec.output_width()];
    for (j, &bit) in x.iter().enumerate() {
        y[spec.target(j, l)] = bit;
    }
    Ok(y)
}

/// Binary product of two little-endian numbers, `|a| + |b|` bits.
pub fn mult_oracle(a: &[bool], b: &[bool]) -> Vec<bool> {
    let mut acc = vec![false; a.len() + b.len()];
    for (j, &bj) in b.iter().enumerate() {
        if !bj {
            continue;
        }
        let mut carry = false;
        for i in 0..acc.len() - j {
            let ai = a.get(i).copied().unwrap_or(false);
            let s = u8::from(acc[i + j]) + u8::from(ai) + u8::from(carry);
            acc[i + j] = s & 1 == 1;
            carry = s >= 2;
        }
    }
    acc
}

/// Full circuit input for `(x, l)`: `x` followed by the encoded shift.
pub fn shift_input(encoding: ShiftEncoding, x: &[bool], l: usize) -> Vec<bool> {
    let mut v = x.to_vec();
    v.extend(encoding.encode(x.len(), l));
    v
}

/// Exhaustively compare `c` with the shift oracle over every `x` and `l`.
/// Returns the first disagreeing `(x, l)`.
pub fn check_shift_circuit(
    c: &Circuit,
    spec: ShiftSpec,
    encoding: ShiftEncoding,
) -> Result<Option<(Vec<bool>, usize)>, FuncgenError> {
    let n = spec.n;
    let expected_in = n + encoding.width(n);
    if c.n_in() != expected_in || c.n_out() != spec.output_width() {
        return Err(FuncgenError::InputLength { expected: expected_in, got: c.n_in() });
    }
    for xv in 0..1u64 << n {
        let x: Vec<bool> = (0..n).map(|i| (xv >> i) & 1 == 1).collect();
        for l in 1..=n {
            let got = c.evaluate(&shift_input(encoding, &x, l))?;
            if got != shift_oracle(spec, &x, l)? {
                return Ok(Some((x, l)));
            }
        }
    }
    Ok(None)
}

/// Copies of `src` for `count` consumers through a binary tree of buffers, so
/// that no node drives more than two others.
fn fanout(b: &mut CircuitBuilder, src: NodeId, count: usize, prefix: &str, next: &mut usize) -> Vec<NodeId> {
    if count <= 2 {
        return vec![src; count];
    }
    let mut drivers = Vec::with_capacity(count);
    for part in [count.div_ceil(2), count / 2] {
        *next += 1;
        let buf = b.add_gate(format!("{prefix}_{next}"), &[src], GateFn::identity());
        drivers.extend(fanout(b, buf, part, prefix, next));
    }
    drivers
}

/// `lg n` stages of 2:1 multiplexers; stage `b` shifts by `2^b` when bit `b`
/// of the shift input is set. Select lines fan out through buffer trees, so
/// in-degree is at most 3 and out-degree at most 2.
pub fn build_barrel_shifter(n: usize) -> Result<Circuit, FuncgenError> {
    build_shifter(ShiftSpec::plain(n))
}

pub fn build_shifter(spec: ShiftSpec) -> Result<Circuit, FuncgenError> {
    let n = spec.n;
    if !n.is_power_of_two() {
        return Err(FuncgenError::NotPowerOfTwo(n));
    }
    let stages = ceil_log2(n);
    let width = spec.output_width();
    let mut b = CircuitBuilder::new();
    let xs: Vec<NodeId> = (1..=n).map(|i| b.add_input(format!("x{i}"))).collect();
    let sel: Vec<NodeId> = (1..=stages).map(|i| b.add_input(format!("j{i}"))).collect();

    let mut wires: Vec<Option<NodeId>> = (0..width).map(|p| xs.get(p).copied()).collect();
    let not_a_and_s = GateFn::from_fn(2, |t| t == 1).unwrap(); // inputs (a, sel)
    let s_and_b = GateFn::and2(); // inputs (shifted, sel)
    let mux = GateFn::from_fn(3, |t| if t & 4 != 0 { t & 2 != 0 } else { t & 1 != 0 }).unwrap(); // (a, shifted, sel)
    let mut buffers = 0;

    for stage in 0..stages {
        let dist = 1usize << stage;
        let shifted = |p: usize, wires: &[Option<NodeId>]| -> Option<NodeId> {
            if spec.cyclic {
                wires[(p + width - dist) % width]
            } else if p >= dist {
                wires[p - dist]
            } else {
                None
            }
        };
        let plan: Vec<(Option<NodeId>, Option<NodeId>)> =
            (0..width).map(|p| (wires[p], shifted(p, &wires))).collect();
        let consumers = plan.iter().filter(|(a, s)| a.is_some() || s.is_some()).count();
        let mut drivers = fanout(&mut b, sel[stage], consumers, &format!("sel{}", stage + 1), &mut buffers).into_iter();

        let last = stage + 1 == stages;
        let mut next = vec![None; width];
        for (p, (a, s)) in plan.into_iter().enumerate() {
            let name = if last { format!("y{}", p + 1) } else { format!("m{}_{}", stage + 1, p + 1) };
            let (preds, func) = match (a, s) {
                (None, None) => {
                    if last {
                        b.add_output(name, &[], GateFn::constant(0, false));
                    }
                    continue;
                }
                (Some(a), None) => (vec![a, drivers.next().unwrap()], not_a_and_s.clone()),
                (None, Some(s)) => (vec![s, drivers.next().unwrap()], s_and_b.clone()),
                (Some(a), Some(s)) => (vec![a, s, drivers.next().unwrap()], mux.clone()),
            };
            next[p] = Some(if last {
                b.add_output(name, &preds, func)
            } else {
                b.add_gate(name, &preds, func)
            });
        }
        wires = next;
    }
    if stages == 0 {
        for (p, w) in wires.iter().enumerate() {
            match w {
                Some(x) => b.add_output(format!("y{}", p + 1), &[*x], GateFn::identity()),
                None => b.add_output(format!("y{}", p + 1), &[], GateFn::constant(0, false)),
            };
        }
    }
    Ok(b.build()?)
}

/// Depth-3 shaped circuit with an empty middle layer in which `y_j` copies
/// `x_j`; each `y_j` is also wired (as a don't-care) to the next
/// `window - 1` inputs cyclically, so every X∪Y degree equals `window`.
pub fn build_depth3_identity(n: usize, window: usize) -> Result<Circuit, FuncgenError> {
    let window = window.clamp(1, n.max(1));
    let mut b = CircuitBuilder::new();
    let xs: Vec<NodeId> = (1..=n).map(|i| b.add_input(format!("x{i}"))).collect();
    for j in 0..n {
        let preds: Vec<NodeId> = (0..window).map(|d| xs[(j + d) % n]).collect();
        b.add_output(format!("y{}", j + 1), &preds, GateFn::projection(window, 0)?);
    }
    Ok(b.build()?)
}

/// A generated depth-3 shift circuit with its achieved parameters.
#[derive(Clone, Debug)]
pub struct Depth3Build {
    pub circuit: Circuit,
    pub encoding: ShiftEncoding,
    /// Middle-layer size divided by `n`.
    pub epsilon: BigRational,
    /// Maximum degree in the X∪Y-induced subgraph.
    pub c: usize,
}

/// Depth-3 circuit computing the shift function. The middle layer decodes
/// the shift amount into `ceil(lg n)` binary gates, padded up to
/// `ceil(eps * n)` gates with copies of inputs that outputs read as
/// don't-cares. Each output reads every input it may receive directly, so the
/// X∪Y degree is about `n`; the achieved epsilon and degree are reported.
pub fn build_depth3_shift(spec: ShiftSpec, eps: f64, encoding: ShiftEncoding) -> Result<Depth3Build, FuncgenError> {
    let n = spec.n;
    if !n.is_power_of_two() {
        return Err(FuncgenError::NotPowerOfTwo(n));
    }
    let lg = ceil_log2(n);
    let width = spec.output_width();
    let mut b = CircuitBuilder::new();
    let xs: Vec<NodeId> = (1..=n).map(|i| b.add_input(format!("x{i}"))).collect();
    let shift_inputs: Vec<NodeId> = match encoding {
        ShiftEncoding::Binary => (1..=lg).map(|i| b.add_input(format!("j{i}"))).collect(),
        ShiftEncoding::OneHot => (1..=n).map(|i| b.add_input(format!("h{i}"))).collect(),
    };

    let mut decoders = Vec::with_capacity(lg);
    for bit in 0..lg {
        let (preds, func): (Vec<NodeId>, GateFn) = match encoding {
            ShiftEncoding::Binary => (vec![shift_inputs[bit]], GateFn::identity()),
            ShiftEncoding::OneHot => {
                let preds: Vec<NodeId> = (1..=n)
                    .filter(|l| ((l - 1) >> bit) & 1 == 1)
                    .map(|l| shift_inputs[l - 1])
                    .collect();
                let arity = preds.len();
                (preds, GateFn::from_fn(arity, |t| t != 0)?)
            }
        };
        decoders.push(b.add_gate(format!("d{}", bit + 1), &preds, func));
    }
    let wanted = (eps.max(0.0) * n as f64).ceil() as usize;
    let pads: Vec<NodeId> = (0..wanted.saturating_sub(lg))
        .map(|i| b.add_gate(format!("pad{}", i + 1), &[xs[i % n]], GateFn::identity()))
        .collect();

    for p in 0..width {
        let sources: Vec<usize> = if spec.cyclic {
            (0..n).collect()
        } else {
            (p.saturating_sub(n - 1)..=p.min(n - 1)).collect()
        };
        let my_pads: Vec<NodeId> = pads.iter().enumerate().filter(|(i, _)| i % width == p).map(|(_, &g)| g).collect();
        let mut preds: Vec<NodeId> = sources.iter().map(|&i| xs[i]).collect();
        preds.extend(&decoders);
        preds.extend(&my_pads);
        let (ns, nd) = (sources.len(), decoders.len());
        let func = GateFn::from_fn(preds.len(), |t| {
            let shift = (t >> ns) & ((1 << nd) - 1);
            let src = if spec.cyclic {
                Some((p + n - shift % n) % n)
            } else {
                p.checked_sub(shift).filter(|&i| i < n)
            };
            src.and_then(|i| sources.iter().position(|&s| s == i))
                .is_some_and(|k| (t >> k) & 1 == 1)
        })?;
        b.add_output(format!("y{}", p + 1), &preds, func);
    }
    let circuit = b.build()?;
    let layers = Layers::classify(&circuit)?;
    let c = degree_profile(&circuit, Some(&layers.outer()))?.max_undirected;
    let epsilon = rational_from_usize(layers.f.len()) / rational_from_usize(n);
    Ok(Depth3Build { circuit, encoding, epsilon, c })
}

/// Parameters for [`random_circuit`].
#[derive(Copy, Clone, Debug)]
pub struct RandomCircuitSpec {
    pub n_in: usize,
    pub n_gates: usize,
    pub n_out: usize,
    pub max_fan_in: usize,
    pub max_fan_out: usize,
}

/// Random DAG with random truth tables and bounded fan-in / fan-out.
pub fn random_circuit<R: Rng>(rng: &mut R, spec: RandomCircuitSpec) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut out_deg: Vec<usize> = Vec::new();
    let mut ids: Vec<NodeId> = Vec::new();
    for i in 0..spec.n_in {
        ids.push(b.add_input(format!("x{}", i + 1)));
        out_deg.push(0);
    }
    let pick = |rng: &mut R, ids: &[NodeId], out_deg: &mut [usize]| -> Vec<NodeId> {
        let open: Vec<usize> = (0..ids.len()).filter(|&i| out_deg[i] < spec.max_fan_out).collect();
        let k = rng.gen_range(1..=spec.max_fan_in.max(1)).min(open.len());
        let chosen: Vec<usize> = open.choose_multiple(rng, k).copied().collect();
        for &i in &chosen {
            out_deg[i] += 1;
        }
        chosen.into_iter().map(|i| ids[i]).collect()
    };
    for g in 0..spec.n_gates {
        let preds = pick(rng, &ids, &mut out_deg);
        let func = random_gate(rng, preds.len());
        ids.push(b.add_gate(format!("g{}", g + 1), &preds, func));
        out_deg.push(0);
    }
    for o in 0..spec.n_out {
        let preds = pick(rng, &ids, &mut out_deg);
        let func = random_gate(rng, preds.len());
        b.add_output(format!("y{}", o + 1), &preds, func);
    }
    b.build().expect("random circuit is well formed")
}

/// Random depth-3 circuit on `n` inputs and `n` outputs: each middle gate
/// reads up to `middle_fan_in` inputs, each output up to `window` inputs and
/// up to two middle gates.
pub fn random_depth3<R: Rng>(rng: &mut R, n: usize, middle: usize, window: usize, middle_fan_in: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let xs: Vec<NodeId> = (1..=n).map(|i| b.add_input(format!("x{i}"))).collect();
    let fs: Vec<NodeId> = (1..=middle)
        .map(|i| {
            let k = rng.gen_range(1..=middle_fan_in.clamp(1, n));
            let preds: Vec<NodeId> = xs.choose_multiple(rng, k).copied().collect();
            let func = random_gate(rng, k);
            b.add_gate(format!("f{i}"), &preds, func)
        })
        .collect();
    for j in 1..=n {
        let kx = rng.gen_range(0..=window.min(n));
        let kf = rng.gen_range(0..=2usize.min(fs.len()));
        let mut preds: Vec<NodeId> = xs.choose_multiple(rng, kx).copied().collect();
        preds.extend(fs.choose_multiple(rng, kf).copied());
        let func = random_gate(rng, preds.len());
        b.add_output(format!("y{j}"), &preds, func);
    }
    b.build().expect("random depth-3 circuit is well formed")
}

pub fn random_gate<R: Rng>(rng: &mut R, arity: usize) -> GateFn {
    let table: Vec<bool> = (0..1usize << arity).map(|_| rng.gen()).collect();
    GateFn::from_table(&table).expect("arity within limit")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;

    fn bits(s: &str) -> Vec<bool> {
        BitString::parse(s).unwrap().0
    }

    #[test]
    fn shift_examples() {
        let s = ShiftSpec::plain(4);
        assert_eq!(shift_oracle(s, &bits("1011"), 1).unwrap(), bits("10110000"));
        assert_eq!(shift_oracle(s, &bits("1011"), 2).unwrap(), bits("01011000"));
        assert_eq!(shift_oracle(ShiftSpec::cyclic(4), &bits("1011"), 1).unwrap(), bits("1011"));
        assert_eq!(shift_oracle(ShiftSpec::cyclic(4), &bits("1011"), 2).unwrap(), bits("1101"));
        assert!(matches!(shift_oracle(s, &bits("1011"), 0), Err(FuncgenError::ShiftOutOfRange { .. })));
        assert!(matches!(shift_oracle(s, &bits("1011"), 5), Err(FuncgenError::ShiftOutOfRange { .. })));
    }

    #[test]
    fn mult_examples() {
        assert_eq!(mult_oracle(&bits("11"), &bits("11")), bits("1001"));
        assert_eq!(mult_oracle(&bits("1101"), &bits("0000")), vec![false; 8]);
    }

    #[test]
    fn barrel_rejects_non_power_of_two() {
        assert_eq!(build_barrel_shifter(6).unwrap_err(), FuncgenError::NotPowerOfTwo(6));
    }

    #[test]
    fn barrel_example_from_binary_shift() {
        let c = build_barrel_shifter(4).unwrap();
        // shift amount j = 1 (l = 2), encoded least significant bit first
        let out = c.evaluate(&[bits("1011"), vec![true, false]].concat()).unwrap();
        assert_eq!(out, shift_oracle(ShiftSpec::plain(4), &bits("1011"), 2).unwrap());
    }

    #[test]
    fn barrel_degrees_are_bounded() {
        let c = build_barrel_shifter(16).unwrap();
        let p = degree_profile(&c, None).unwrap();
        assert!(p.max_in <= 3 && p.max_out <= 2, "{p:?}");
    }

    #[test]
    fn cyclic_barrel_matches_oracle() {
        for n in [1, 2, 4, 8] {
            let c = build_shifter(ShiftSpec::cyclic(n)).unwrap();
            assert_eq!(check_shift_circuit(&c, ShiftSpec::cyclic(n), ShiftEncoding::Binary).unwrap(), None);
        }
    }

    #[test]
    fn depth3_identity_small() {
        let c = build_depth3_identity(4, 1).unwrap();
        for x in 0..16u64 {
            assert_eq!(BitString::from(c.evaluate_u64(x)).to_u64(), x);
        }
        let layers = Layers::classify(&c).unwrap();
        assert!(layers.f.is_empty());
        assert_eq!(degree_profile(&c, Some(&layers.outer())).unwrap().max_undirected, 1);
        let wide = build_depth3_identity(6, 3).unwrap();
        assert_eq!(degree_profile(&wide, None).unwrap().max_undirected, 3);
    }

    #[test]
    fn depth3_shift_reports_parameters() {
        let built = build_depth3_shift(ShiftSpec::plain(4), 0.25, ShiftEncoding::OneHot).unwrap();
        assert_eq!(built.epsilon, crate::scalar::ratio(2, 4));
        assert_eq!(built.c, 4);
        let padded = build_depth3_shift(ShiftSpec::plain(4), 1.0, ShiftEncoding::Binary).unwrap();
        assert_eq!(padded.epsilon, crate::scalar::ratio(1, 1));
        assert_eq!(check_shift_circuit(&padded.circuit, ShiftSpec::plain(4), ShiftEncoding::Binary).unwrap(), None);
    }
}
