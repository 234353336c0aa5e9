use super::CircuitError;

/// Largest gate arity accepted by default (a 2^24-entry table).
pub const MAX_ARITY: usize = 24;

/// An arbitrary boolean function given by its truth table.
///
/// Entry `t` of the table is the output when input `i` (counted in the
/// topological order of the gate's predecessors) carries bit `i` of `t`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GateFn {
    arity: usize,
    words: Vec<u64>,
}

impl GateFn {
    pub fn from_fn(arity: usize, f: impl Fn(usize) -> bool) -> Result<Self, CircuitError> {
        if arity > MAX_ARITY {
            return Err(CircuitError::ArityTooLarge { arity, max: MAX_ARITY });
        }
        let len = 1usize << arity;
        let mut words = vec![0u64; len.div_ceil(64)];
        for t in 0..len {
            if f(t) {
                words[t / 64] |= 1 << (t % 64);
            }
        }
        Ok(Self { arity, words })
    }

    pub fn from_table(table: &[bool]) -> Result<Self, CircuitError> {
        let len = table.len();
        if !len.is_power_of_two() {
            return Err(CircuitError::TableLength { len });
        }
        Self::from_fn(len.trailing_zeros() as usize, |t| table[t])
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        Self::from_fn(arity, |_| value).expect("constant arity within limit")
    }

    /// Unary identity.
    pub fn identity() -> Self {
        Self::from_fn(1, |t| t == 1).unwrap()
    }

    pub fn and2() -> Self {
        Self::from_fn(2, |t| t == 3).unwrap()
    }

    pub fn or2() -> Self {
        Self::from_fn(2, |t| t != 0).unwrap()
    }

    pub fn xor2() -> Self {
        Self::from_fn(2, |t| t == 1 || t == 2).unwrap()
    }

    /// Projection onto input `i` of an `arity`-input gate.
    pub fn projection(arity: usize, i: usize) -> Result<Self, CircuitError> {
        Self::from_fn(arity, |t| (t >> i) & 1 == 1)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table_len(&self) -> usize {
        1 << self.arity
    }

    #[inline]
    pub fn get(&self, t: usize) -> bool {
        (self.words[t / 64] >> (t % 64)) & 1 == 1
    }

    pub fn apply(&self, inputs: &[bool]) -> bool {
        debug_assert_eq!(inputs.len(), self.arity);
        let t = inputs
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
        self.get(t)
    }

    /// Fix input `pos` to `value`, yielding a gate of arity one less.
    pub fn restrict(&self, pos: usize, value: bool) -> Self {
        assert!(pos < self.arity, "restricted coordinate out of range");
        let low = (1usize << pos) - 1;
        Self::from_fn(self.arity - 1, |t| {
            let full = (t & low) | (usize::from(value) << pos) | ((t & !low) << 1);
            self.get(full)
        })
        .unwrap()
    }

    /// Reindex inputs: new input `j` is old input `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.arity);
        Self::from_fn(self.arity, |t| {
            let old = perm
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &o)| acc | (((t >> j) & 1) << o));
            self.get(old)
        })
        .unwrap()
    }

    /// Hex rendering of the table read as a little-endian integer.
    pub fn to_hex(&self) -> String {
        let digits = self.table_len().div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nib = (0..4).fold(0u32, |acc, b| {
                    let t = d * 4 + b;
                    acc | (u32::from(t < self.table_len() && self.get(t)) << b)
                });
                char::from_digit(nib, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(arity: usize, hex: &str) -> Result<Self, CircuitError> {
        if arity > MAX_ARITY {
            return Err(CircuitError::ArityTooLarge { arity, max: MAX_ARITY });
        }
        let len = 1usize << arity;
        let nibbles: Vec<u32> = hex
            .chars()
            .rev()
            .map(|c| c.to_digit(16))
            .collect::<Option<_>>()
            .ok_or_else(|| CircuitError::Parse(format!("bad table hex `{hex}`")))?;
        for (d, &nib) in nibbles.iter().enumerate() {
            for b in 0..4 {
                if (nib >> b) & 1 == 1 && d * 4 + b >= len {
                    return Err(CircuitError::Parse(format!(
                        "table `{hex}` has bits beyond 2^{arity} entries"
                    )));
                }
            }
        }
        Self::from_fn(arity, |t| {
            nibbles
                .get(t / 4)
                .is_some_and(|nib| (nib >> (t % 4)) & 1 == 1)
        })
    }
}

impl std::fmt::Debug for GateFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GateFn({}, {})", self.arity, self.to_hex())
    }
}
