//! The F-correction game: a supervisor sees `β` and sends each of `m`
//! players a prefix-free hint from which that player alone decides which of
//! its bits to flip, so that the corrected string lands in `F`.

mod budget;
mod family;
mod gamma;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub use budget::{largest_epsilon_within, lemma_budget, lemma_budget_blocks, LemmaBudget};
pub use family::{parse_family, write_family, Family, MAX_N};
pub use gamma::{gamma_decode, gamma_encode, FlipEncoder, GammaEncoder};

use crate::bits::BitString;
use crate::netcode::entropy_from_counts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorrectionError {
    #[error("family is empty")]
    EmptyFamily,
    #[error("string length {0} outside 1..={MAX_N}")]
    Length(usize),
    #[error("member {member:#x} does not fit in {n} bits")]
    MemberOutOfRange { member: u32, n: usize },
    #[error("{m} players do not divide n = {n}")]
    Players { n: usize, m: usize },
    #[error("beta has {got} bits, expected {expected}")]
    BetaLength { expected: usize, got: usize },
    #[error("malformed message {0}")]
    Decode(String),
    #[error("enumerating 2^{n} strings exceeds the budget of 2^{budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("epsilon must lie in [0, 1], got {0}")]
    Epsilon(f64),
    #[error("{0}")]
    Parse(String),
}

/// Game parameters: `m` players each holding `n / m` consecutive bits.
#[derive(Clone, Debug)]
pub struct GameSpec {
    pub n: usize,
    pub m: usize,
    pub family: Family,
}

impl GameSpec {
    pub fn new(m: usize, family: Family) -> Result<Self, CorrectionError> {
        let n = family.n();
        if m == 0 || !n.is_multiple_of(m) {
            return Err(CorrectionError::Players { n, m });
        }
        Ok(Self { n, m, family })
    }

    pub fn block_len(&self) -> usize {
        self.n / self.m
    }

    /// `1 - log2|F| / n`.
    pub fn epsilon(&self) -> f64 {
        self.family.epsilon()
    }
}

/// Key under which `x_1 x_2 ... x_n` compares lexicographically.
fn lex_key(x: u32, n: usize) -> u32 {
    x.reverse_bits() >> (32 - n)
}

/// Nearest family member for every string, ties broken toward the
/// lexicographically smallest member.
#[derive(Clone, Debug)]
pub struct NearestTable {
    n: usize,
    best: Vec<u32>,
    dist: Vec<u8>,
}

impl NearestTable {
    /// Multi-source breadth-first search over the hypercube. The nearest set
    /// of a string at distance `d + 1` is the union of the nearest sets of
    /// its neighbours at distance `d`, so lexicographic minima propagate.
    pub fn build(family: &Family) -> Self {
        let n = family.n();
        let size = 1usize << n;
        let mut best = vec![0u32; size];
        let mut dist = vec![u8::MAX; size];
        let mut frontier: Vec<u32> = family.members().to_vec();
        for &x in &frontier {
            best[x as usize] = x;
            dist[x as usize] = 0;
        }
        let mut d = 0u8;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &b in &frontier {
                for i in 0..n {
                    let g = (b ^ (1 << i)) as usize;
                    if dist[g] == u8::MAX {
                        dist[g] = d + 1;
                        best[g] = best[b as usize];
                        next.push(g as u32);
                    } else if dist[g] == d + 1 && lex_key(best[b as usize], n) < lex_key(best[g], n) {
                        best[g] = best[b as usize];
                    }
                }
            }
            frontier = next;
            d += 1;
        }
        Self { n, best, dist }
    }

    pub fn nearest(&self, beta: u32) -> u32 {
        self.best[beta as usize]
    }

    pub fn distance(&self, beta: u32) -> usize {
        self.dist[beta as usize] as usize
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Nearest member by scanning the whole family.
pub fn nearest_brute_force(family: &Family, beta: u32) -> u32 {
    let n = family.n();
    *family
        .members()
        .iter()
        .min_by_key(|&&x| ((x ^ beta).count_ones(), lex_key(x, n)))
        .unwrap()
}

/// One play of the game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub beta: BitString,
    /// The member `x*` the supervisor steers toward.
    pub target: BitString,
    pub messages: Vec<BitString>,
    /// `χ_ℓ` as decoded by each player from its own message.
    pub outputs: Vec<BitString>,
    pub total_bits: usize,
}

impl Transcript {
    /// `(β_1 ⊕ χ_1) ∘ ... ∘ (β_m ⊕ χ_m)`.
    pub fn corrected(&self) -> BitString {
        let chi: Vec<bool> = self.outputs.iter().flat_map(|c| c.bits().iter().copied()).collect();
        BitString(self.beta.bits().iter().zip(chi).map(|(b, c)| b ^ c).collect())
    }
}

fn to_u32(bits: &[bool]) -> u32 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | u32::from(b) << i)
}

/// Flip positions (0-based, ascending) of each player's block.
fn flip_sets(spec: &GameSpec, beta: u32, target: u32) -> Vec<Vec<usize>> {
    let w = spec.block_len();
    let diff = beta ^ target;
    (0..spec.m)
        .map(|l| (0..w).filter(|&p| diff >> (l * w + p) & 1 == 1).collect())
        .collect()
}

/// Supervisor: nearest member, then one encoded flip set per player.
pub fn supervisor_messages(spec: &GameSpec, table: &NearestTable, enc: &dyn FlipEncoder, beta: u32) -> (u32, Vec<BitString>) {
    let target = table.nearest(beta);
    let w = spec.block_len();
    let msgs = flip_sets(spec, beta, target).iter().map(|s| enc.encode(s, w)).collect();
    (target, msgs)
}

/// Player: `χ_ℓ` from `R_ℓ` alone.
pub fn player_output(enc: &dyn FlipEncoder, message: &BitString, block_len: usize) -> Result<BitString, CorrectionError> {
    let flips = enc.decode(message, block_len)?;
    let mut chi = vec![false; block_len];
    for p in flips {
        if p >= block_len {
            return Err(CorrectionError::Decode(format!("{message}: flip position {p} beyond block")));
        }
        chi[p] = true;
    }
    Ok(BitString(chi))
}

pub fn play(spec: &GameSpec, beta: &BitString) -> Result<Transcript, CorrectionError> {
    play_with(spec, &NearestTable::build(&spec.family), &GammaEncoder, beta)
}

pub fn play_with(
    spec: &GameSpec,
    table: &NearestTable,
    enc: &dyn FlipEncoder,
    beta: &BitString,
) -> Result<Transcript, CorrectionError> {
    if beta.len() != spec.n {
        return Err(CorrectionError::BetaLength { expected: spec.n, got: beta.len() });
    }
    let b = to_u32(beta.bits());
    let (target, messages) = supervisor_messages(spec, table, enc, b);
    let outputs = messages
        .iter()
        .map(|r| player_output(enc, r, spec.block_len()))
        .collect::<Result<Vec<_>, _>>()?;
    let total_bits = messages.iter().map(BitString::len).sum();
    Ok(Transcript { beta: beta.clone(), target: BitString::from_u64(target as u64, spec.n), messages, outputs, total_bits })
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostMethod {
    Exact,
    /// Uniform samples with a two-sided Hoeffding half-width at 95%.
    MonteCarlo { samples: u64, seed: u64, half_width: f64 },
}

#[derive(Clone, Debug)]
pub struct PlayerStats {
    /// `E|R_ℓ|` (exact when enumerating).
    pub expected_len: BigRational,
    /// `H(R_ℓ)` in bits.
    pub entropy: f64,
    pub distinct_messages: usize,
    pub prefix_free: bool,
    /// A pair `(a, b)` with `a` a proper prefix of `b`, if any.
    pub prefix_witness: Option<(BitString, BitString)>,
}

#[derive(Clone, Debug)]
pub struct GameAnalysis {
    pub n: usize,
    pub m: usize,
    pub family_size: usize,
    pub epsilon: f64,
    pub method: CostMethod,
    pub players: Vec<PlayerStats>,
    pub total_expected: BigRational,
    /// Strings whose corrected output fell outside the family.
    pub failures: u64,
    pub first_failure: Option<BitString>,
}

impl GameAnalysis {
    pub fn prefix_free(&self) -> bool {
        self.players.iter().all(|p| p.prefix_free)
    }

    /// `E|R_ℓ| >= H(R_ℓ)` for every player.
    pub fn source_coding_holds(&self) -> bool {
        self.players
            .iter()
            .all(|p| crate::scalar::ratio_to_f64(&p.expected_len) + 1e-9 >= p.entropy)
    }
}

struct Tally {
    hists: Vec<HashMap<BitString, u64>>,
    failures: u64,
    first_failure: Option<u32>,
    count: u64,
}

impl Tally {
    fn new(m: usize) -> Self {
        Self { hists: vec![HashMap::new(); m], failures: 0, first_failure: None, count: 0 }
    }

    fn add(&mut self, spec: &GameSpec, table: &NearestTable, enc: &dyn FlipEncoder, beta: u32) {
        let (_, msgs) = supervisor_messages(spec, table, enc, beta);
        let w = spec.block_len();
        let mut corrected = beta;
        let mut ok = true;
        for (l, r) in msgs.iter().enumerate() {
            match player_output(enc, r, w) {
                Ok(chi) => corrected ^= to_u32(chi.bits()) << (l * w),
                Err(_) => ok = false,
            }
        }
        if !ok || !spec.family.contains(corrected) {
            self.failures += 1;
            self.first_failure = Some(self.first_failure.map_or(beta, |f| f.min(beta)));
        }
        for (h, r) in self.hists.iter_mut().zip(msgs) {
            *h.entry(r).or_insert(0) += 1;
        }
        self.count += 1;
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.hists.iter_mut().zip(other.hists) {
            for (k, c) in b {
                *a.entry(k).or_insert(0) += c;
            }
        }
        self.failures += other.failures;
        self.first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.count += other.count;
        self
    }
}

/// Exact analysis over all `2^n` strings `β`: expected message lengths,
/// message entropies, prefix-freeness and correctness.
pub fn analyze(spec: &GameSpec, enc: &dyn FlipEncoder, budget: usize) -> Result<GameAnalysis, CorrectionError> {
    if spec.n > budget {
        return Err(CorrectionError::BudgetExceeded { n: spec.n, budget });
    }
    let table = NearestTable::build(&spec.family);
    let total = 1u32 << spec.n;
    const CHUNK: u32 = 1 << 12;
    let tally = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::new(spec.m);
            for beta in c * CHUNK..((c + 1) * CHUNK).min(total) {
                t.add(spec, &table, enc, beta);
            }
            t
        })
        .reduce(|| Tally::new(spec.m), Tally::merge);
    Ok(summarise(spec, tally, CostMethod::Exact))
}

/// Monte-Carlo estimate from `samples` uniform strings drawn with `seed`.
pub fn analyze_sampled(spec: &GameSpec, enc: &dyn FlipEncoder, samples: u64, seed: u64) -> Result<GameAnalysis, CorrectionError> {
    if spec.n > MAX_N {
        return Err(CorrectionError::Length(spec.n));
    }
    let table = NearestTable::build(&spec.family);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new(spec.m);
    for _ in 0..samples.max(1) {
        let beta: u32 = rng.gen_range(0..1u32 << spec.n);
        tally.add(spec, &table, enc, beta);
    }
    let w = spec.block_len();
    let range = (spec.m * max_gamma_message(w)) as f64;
    let half_width = range * ((2.0f64 / 0.05).ln() / (2.0 * samples.max(1) as f64)).sqrt();
    Ok(summarise(spec, tally, CostMethod::MonteCarlo { samples: samples.max(1), seed, half_width }))
}

/// Longest possible gamma flip message for a block of `w` bits.
fn max_gamma_message(w: usize) -> usize {
    let g = |v: usize| 2 * (usize::BITS - 1 - v.leading_zeros()) as usize + 1;
    g(w + 1) + w * g(w.max(1))
}

fn summarise(spec: &GameSpec, tally: Tally, method: CostMethod) -> GameAnalysis {
    let denom = BigInt::from(tally.count);
    let players: Vec<PlayerStats> = tally
        .hists
        .iter()
        .map(|h| {
            let bits: u64 = h.iter().map(|(r, c)| r.len() as u64 * c).sum();
            let mut msgs: Vec<&BitString> = h.keys().collect();
            msgs.sort();
            let prefix_witness = msgs
                .windows(2)
                .find(|w| w[0].is_proper_prefix_of(w[1]))
                .map(|w| (w[0].clone(), w[1].clone()));
            PlayerStats {
                expected_len: BigRational::new(BigInt::from(bits), denom.clone()),
                entropy: entropy_from_counts(h.values().copied()),
                distinct_messages: h.len(),
                prefix_free: prefix_witness.is_none(),
                prefix_witness,
            }
        })
        .collect();
    let total_expected = players.iter().fold(BigRational::from_integer(0.into()), |acc, p| acc + &p.expected_len);
    GameAnalysis {
        n: spec.n,
        m: spec.m,
        family_size: spec.family.len(),
        epsilon: spec.epsilon(),
        method,
        players,
        total_expected,
        failures: tally.failures,
        first_failure: tally.first_failure.map(|b| BitString::from_u64(b as u64, spec.n)),
    }
}

/// Exact per-player `E|R_ℓ|` and the total.
pub fn expected_cost(spec: &GameSpec, budget: usize) -> Result<(Vec<BigRational>, BigRational), CorrectionError> {
    let a = analyze(spec, &GammaEncoder, budget)?;
    Ok((a.players.iter().map(|p| p.expected_len.clone()).collect(), a.total_expected))
}

/// Per-player prefix-freeness of the realised message sets, together with
/// `E|R_ℓ| >= H(R_ℓ)`.
pub fn verify_prefix_free(spec: &GameSpec, enc: &dyn FlipEncoder, budget: usize) -> Result<bool, CorrectionError> {
    let a = analyze(spec, enc, budget)?;
    Ok(a.prefix_free() && a.source_coding_holds())
}
