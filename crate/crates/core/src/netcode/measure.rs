//! Exhaustive enumeration over all message tuples: correctness and exact
//! edge-message entropies.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{execute, CodingSolution, CommInstance, NetcodeError};
use crate::bits::BitString;
use crate::flow::Capacity;

/// Default cap on the total number of message bits enumerated.
pub const DEFAULT_BUDGET: usize = 20;

/// Slack allowed when comparing a computed entropy with a capacity.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

const CHUNK: u64 = 1 << 10;

fn check_budget(inst: &CommInstance, budget: usize) -> Result<u64, NetcodeError> {
    let bits = inst.message_bits();
    if bits > budget || bits >= 64 {
        return Err(NetcodeError::BudgetExceeded { bits, budget });
    }
    Ok(1u64 << bits)
}

/// Message tuple number `t`: pair `i` gets the next `b_i` bits of `t`,
/// least significant first.
pub fn tuple(inst: &CommInstance, t: u64) -> Vec<BitString> {
    let mut offset = 0;
    inst.pairs()
        .iter()
        .map(|p| {
            let m = BitString::from_u64((t >> offset) & mask(p.bits), p.bits);
            offset += p.bits;
            m
        })
        .collect()
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub messages: Vec<BitString>,
    pub pair: usize,
    pub decoded: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correctness {
    pub tuples: u64,
    /// First failing tuple in enumeration order.
    pub counterexample: Option<Counterexample>,
}

impl Correctness {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Check every sink decodes its own message on every message tuple.
/// Refuses when the tuple count exceeds `2^budget`.
pub fn verify_correctness(inst: &CommInstance, sol: &CodingSolution, budget: usize) -> Result<Correctness, NetcodeError> {
    let tuples = check_budget(inst, budget)?;
    let found = (0..tuples).into_par_iter().find_map_first(|t| {
        let messages = tuple(inst, t);
        match execute(inst, sol, &messages) {
            Err(e) => Some(Err(e)),
            Ok(run) => run
                .decoded
                .iter()
                .zip(&messages)
                .position(|(d, m)| d != m)
                .map(|pair| Ok(Counterexample { decoded: run.decoded[pair].clone(), messages, pair })),
        }
    });
    Ok(Correctness { tuples, counterexample: found.transpose()? })
}

/// Exact message histograms over all tuples.
#[derive(Clone, Debug, Default)]
pub struct Distributions {
    pub tuples: u64,
    pub edges: Vec<HashMap<BitString, u64>>,
    pub decoded: Vec<HashMap<BitString, u64>>,
}

impl Distributions {
    fn empty(inst: &CommInstance) -> Self {
        Self {
            tuples: 0,
            edges: vec![HashMap::new(); inst.edges().len()],
            decoded: vec![HashMap::new(); inst.pairs().len()],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.tuples += other.tuples;
        for (a, b) in self.edges.iter_mut().zip(other.edges) {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
        }
        for (a, b) in self.decoded.iter_mut().zip(other.decoded) {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
        }
        self
    }
}

pub fn edge_distributions(inst: &CommInstance, sol: &CodingSolution, budget: usize) -> Result<Distributions, NetcodeError> {
    let tuples = check_budget(inst, budget)?;
    let chunks = tuples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut d = Distributions::empty(inst);
            for t in c * CHUNK..((c + 1) * CHUNK).min(tuples) {
                let run = execute(inst, sol, &tuple(inst, t))?;
                for (h, m) in d.edges.iter_mut().zip(run.edge_messages) {
                    *h.entry(m).or_insert(0) += 1;
                }
                for (h, m) in d.decoded.iter_mut().zip(run.decoded) {
                    *h.entry(m).or_insert(0) += 1;
                }
                d.tuples += 1;
            }
            Ok(d)
        })
        .try_reduce(|| Distributions::empty(inst), |a, b| Ok(a.merge(b)))
}

/// Shannon entropy in bits of the empirical distribution with these counts.
/// Counts are sorted first so the floating-point sum is reproducible.
pub fn entropy_from_counts(counts: impl IntoIterator<Item = u64>) -> f64 {
    let mut counts: Vec<u64> = counts.into_iter().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts.iter().map(|&c| (c as f64 / n) * (n / c as f64).log2()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeReport {
    pub edge: usize,
    pub name: String,
    pub capacity: Capacity,
    pub entropy: f64,
    /// `log2 |Γ(e)|`.
    pub alphabet_bound: f64,
    pub support: usize,
    pub injector: bool,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    pub tuples: u64,
    /// `H(A_i)` per pair.
    pub source_entropy: Vec<f64>,
    /// Entropy of each sink's decoded output.
    pub decoded_entropy: Vec<f64>,
    pub edges: Vec<EdgeReport>,
    /// `min_i H(A_i)` when every finite capacity holds.
    pub rate: Option<f64>,
    /// Edges with `H(A_e) > c(e)`.
    pub violations: Vec<usize>,
    /// Edges whose entropy exceeds the total entropy entering their tail.
    pub data_processing_failures: Vec<usize>,
}

/// Exact `H(A_e)` for every edge under uniform independent messages.
pub fn measure_rate(inst: &CommInstance, sol: &CodingSolution, budget: usize) -> Result<RateReport, NetcodeError> {
    let dist = edge_distributions(inst, sol, budget)?;
    let entropies: Vec<f64> = dist.edges.iter().map(|h| entropy_from_counts(h.values().copied())).collect();
    let mut edges = Vec::with_capacity(entropies.len());
    let mut violations = Vec::new();
    for (e, edge) in inst.edges().iter().enumerate() {
        let violation = match edge.capacity.finite() {
            Some(_) => entropies[e] > edge.capacity.to_f64() + ENTROPY_TOLERANCE,
            None => false,
        };
        if violation {
            violations.push(e);
        }
        edges.push(EdgeReport {
            edge: e,
            name: edge.name.clone(),
            capacity: edge.capacity.clone(),
            entropy: entropies[e],
            alphabet_bound: sol.alphabets[e].log_size(),
            support: dist.edges[e].len(),
            injector: edge.injector_of.is_some(),
            violation,
        });
    }
    let data_processing_failures = (0..inst.edges().len())
        .filter(|&e| {
            let tail = inst.edge(e).src;
            let bound: f64 = inst.in_edges(tail).iter().map(|&i| entropies[i]).sum();
            inst.edge(e).injector_of.is_none() && entropies[e] > bound + ENTROPY_TOLERANCE
        })
        .collect();
    let source_entropy: Vec<f64> = inst.pairs().iter().map(|p| entropies[p.injector_edge]).collect();
    let rate = if violations.is_empty() {
        Some(source_entropy.iter().copied().fold(f64::INFINITY, f64::min))
    } else {
        None
    };
    Ok(RateReport {
        tuples: dist.tuples,
        decoded_entropy: dist.decoded.iter().map(|h| entropy_from_counts(h.values().copied())).collect(),
        source_entropy,
        edges,
        rate,
        violations,
        data_processing_failures,
    })
}

impl RateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge,capacity,entropy,violation\n");
        for e in &self.edges {
            writeln!(out, "{},{},{:.12},{}", e.name, e.capacity, e.entropy, e.violation).unwrap();
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        writeln!(out, "tuples enumerated: {}", self.tuples).unwrap();
        for (i, h) in self.source_entropy.iter().enumerate() {
            writeln!(out, "pair {}: H(A) = {:.6}, H(decoded) = {:.6}", i + 1, h, self.decoded_entropy[i]).unwrap();
        }
        let worst = self
            .edges
            .iter()
            .filter(|e| !e.injector)
            .map(|e| e.entropy - e.capacity.to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        writeln!(out, "max H(A_e) - c(e) over network edges: {worst:.6}").unwrap();
        match self.rate {
            Some(r) => writeln!(out, "rate: {r:.6}").unwrap(),
            None => {
                let names: Vec<&str> = self.violations.iter().map(|&e| self.edges[e].name.as_str()).collect();
                writeln!(out, "rate: none (capacity exceeded on {})", names.join(", ")).unwrap();
            }
        }
        out
    }
}
