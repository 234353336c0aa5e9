use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;

use super::CorrectionError;

/// Largest string length a family may have.
pub const MAX_N: usize = 24;

/// A nonempty set `F ⊆ {0,1}^n`. Member `x` stores `x_1` in bit 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    n: usize,
    members: Vec<u32>,
    bitset: Vec<u64>,
}

impl Family {
    pub fn new(n: usize, members: impl IntoIterator<Item = u32>) -> Result<Self, CorrectionError> {
        if n == 0 || n > MAX_N {
            return Err(CorrectionError::Length(n));
        }
        let mut bitset = vec![0u64; (1usize << n).div_ceil(64)];
        let mut list = Vec::new();
        for x in members {
            if (x as u64) >> n != 0 {
                return Err(CorrectionError::MemberOutOfRange { member: x, n });
            }
            let (w, b) = (x as usize / 64, x as usize % 64);
            if bitset[w] >> b & 1 == 0 {
                bitset[w] |= 1 << b;
                list.push(x);
            }
        }
        if list.is_empty() {
            return Err(CorrectionError::EmptyFamily);
        }
        list.sort_unstable();
        Ok(Self { n, members: list, bitset })
    }

    /// `{0,1}^n`.
    pub fn full(n: usize) -> Result<Self, CorrectionError> {
        if n == 0 || n > MAX_N {
            return Err(CorrectionError::Length(n));
        }
        Self::new(n, 0..1u32 << n)
    }

    /// Strings whose bit at each 0-based position equals the given value.
    pub fn fixed_bits(n: usize, fixed: &[(usize, bool)]) -> Result<Self, CorrectionError> {
        if let Some(&(p, _)) = fixed.iter().find(|(p, _)| *p >= n) {
            return Err(CorrectionError::Parse(format!("position {} outside 1..={n}", p + 1)));
        }
        let (mask, want) = fixed.iter().fold((0u32, 0u32), |(m, w), &(p, v)| (m | 1 << p, w | u32::from(v) << p));
        if n == 0 || n > MAX_N {
            return Err(CorrectionError::Length(n));
        }
        Self::new(n, (0..1u32 << n).filter(|x| x & mask == want))
    }

    /// `size` distinct members drawn uniformly.
    pub fn random<R: Rng>(rng: &mut R, n: usize, size: usize) -> Result<Self, CorrectionError> {
        if n == 0 || n > MAX_N {
            return Err(CorrectionError::Length(n));
        }
        let size = size.clamp(1, 1 << n);
        Self::new(n, sample(rng, 1 << n, size).into_iter().map(|x| x as u32))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn contains(&self, x: u32) -> bool {
        (x as u64) >> self.n == 0 && self.bitset[x as usize / 64] >> (x as usize % 64) & 1 == 1
    }

    /// `1 - log2|F| / n`.
    pub fn epsilon(&self) -> f64 {
        1.0 - (self.members.len() as f64).log2() / self.n as f64
    }

    /// Union with another family over the same length.
    pub fn union(&self, other: &Family) -> Result<Family, CorrectionError> {
        if other.n != self.n {
            return Err(CorrectionError::Length(other.n));
        }
        Family::new(self.n, self.members.iter().chain(&other.members).copied())
    }
}

/// One member per line as a hex integer (bit 0 is `x_1`), or
/// `fixedbits <p1,p2,..> <v1,v2,..>` with 1-based positions, adding every
/// string that matches. `#` starts a comment.
pub fn parse_family(text: &str, n: usize) -> Result<Family, CorrectionError> {
    let mut members = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| CorrectionError::Parse(format!("line {}: {msg}", i + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["fixedbits", positions, values] => {
                let ps: Vec<usize> = positions
                    .split(',')
                    .map(|p| p.parse::<usize>().ok().filter(|&p| p >= 1).map(|p| p - 1))
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad(format!("bad positions `{positions}`")))?;
                let vs: Vec<bool> = values
                    .split(',')
                    .map(|v| match v {
                        "0" => Some(false),
                        "1" => Some(true),
                        _ => None,
                    })
                    .collect::<Option<_>>()
                    .ok_or_else(|| bad(format!("bad values `{values}`")))?;
                if ps.len() != vs.len() {
                    return Err(bad("positions and values differ in length".into()));
                }
                let pairs: Vec<(usize, bool)> = ps.into_iter().zip(vs).collect();
                members.extend_from_slice(Family::fixed_bits(n, &pairs)?.members());
            }
            [hex] => {
                let x = u32::from_str_radix(hex.trim_start_matches("0x"), 16)
                    .map_err(|_| bad(format!("bad hex member `{hex}`")))?;
                members.push(x);
            }
            _ => return Err(bad(format!("unrecognised line `{line}`"))),
        }
    }
    Family::new(n, members)
}

pub fn write_family(f: &Family) -> String {
    let digits = f.n.div_ceil(4);
    let mut out = String::new();
    for x in f.members() {
        writeln!(out, "{x:0digits$x}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructors() {
        assert_eq!(Family::full(4).unwrap().len(), 16);
        assert_eq!(Family::full(4).unwrap().epsilon(), 0.0);
        let half = Family::fixed_bits(4, &[(0, true)]).unwrap();
        assert_eq!(half.len(), 8);
        assert!(half.members().iter().all(|x| x & 1 == 1));
        assert!(Family::new(3, []).is_err());
        assert!(Family::new(3, [8]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r = Family::random(&mut rng, 10, 256).unwrap();
        assert_eq!(r.len(), 256);
        assert!((r.epsilon() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn parse_and_write() {
        let f = parse_family("# two members\n0\nf\n", 4).unwrap();
        assert_eq!(f.members(), &[0, 15]);
        assert_eq!(parse_family(&write_family(&f), 4).unwrap(), f);
        let g = parse_family("fixedbits 3 0\n", 8).unwrap();
        assert_eq!(g.len(), 128);
        assert!(g.members().iter().all(|x| x & 4 == 0));
        assert!(parse_family("fixedbits 0 1", 4).is_err());
        assert!(parse_family("zz", 4).is_err());
        assert!(parse_family("", 4).is_err());
    }
}
