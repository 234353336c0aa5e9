use super::CorrectionError;
use crate::bits::BitString;

/// Elias gamma code of `v >= 1`: `floor(lg v)` zeros, then `v` in binary,
/// most significant bit first.
pub fn gamma_encode(v: usize) -> BitString {
    assert!(v >= 1, "gamma code is defined for positive integers");
    let width = (usize::BITS - v.leading_zeros()) as usize;
    let mut out = BitString(vec![false; width - 1]);
    for b in (0..width).rev() {
        out.push(v >> b & 1 == 1);
    }
    out
}

/// Decode one gamma codeword from the front of `bits`; returns the value and
/// the number of bits consumed.
pub fn gamma_decode(bits: &[bool]) -> Option<(usize, usize)> {
    let zeros = bits.iter().take_while(|&&b| !b).count();
    if zeros >= usize::BITS as usize || bits.len() < 2 * zeros + 1 {
        return None;
    }
    let v = bits[zeros..=2 * zeros].iter().fold(0usize, |acc, &b| acc << 1 | usize::from(b));
    Some((v, 2 * zeros + 1))
}

/// Encoding of one player's flip set.
pub trait FlipEncoder: Sync {
    fn encode(&self, flips: &[usize], block_len: usize) -> BitString;
    fn decode(&self, message: &BitString, block_len: usize) -> Result<Vec<usize>, CorrectionError>;
}

/// `gamma(count + 1)` followed by `gamma(gap + 1)` for each flip, where the
/// gaps are the differences between successive 0-based positions minus one
/// (the first gap is the first position).
#[derive(Copy, Clone, Debug, Default)]
pub struct GammaEncoder;

impl FlipEncoder for GammaEncoder {
    fn encode(&self, flips: &[usize], _block_len: usize) -> BitString {
        let mut out = gamma_encode(flips.len() + 1);
        let mut next = 0;
        for &p in flips {
            out.extend_from(&gamma_encode(p - next + 1));
            next = p + 1;
        }
        out
    }

    fn decode(&self, message: &BitString, block_len: usize) -> Result<Vec<usize>, CorrectionError> {
        let bad = || CorrectionError::Decode(message.to_string());
        let bits = message.bits();
        let (count, mut at) = gamma_decode(bits).ok_or_else(bad)?;
        let mut flips = Vec::with_capacity(count - 1);
        let mut next = 0;
        for _ in 1..count {
            let (g, used) = gamma_decode(&bits[at..]).ok_or_else(bad)?;
            at += used;
            let p = next + g - 1;
            if p >= block_len {
                return Err(bad());
            }
            flips.push(p);
            next = p + 1;
        }
        if at != bits.len() {
            return Err(bad());
        }
        Ok(flips)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codewords() {
        assert_eq!(gamma_encode(1).to_string(), "1");
        assert_eq!(gamma_encode(2).to_string(), "010");
        assert_eq!(gamma_encode(5).to_string(), "00101");
        for v in 1..300 {
            let c = gamma_encode(v);
            assert_eq!(gamma_decode(c.bits()), Some((v, c.len())));
        }
        assert_eq!(gamma_decode(&[false, false, true]), None);
    }

    #[test]
    fn flip_sets_round_trip() {
        let enc = GammaEncoder;
        for flips in [vec![], vec![0], vec![3], vec![0, 1, 2, 3], vec![1, 6, 7]] {
            let m = enc.encode(&flips, 8);
            assert_eq!(enc.decode(&m, 8).unwrap(), flips);
        }
        assert!(enc.decode(&enc.encode(&[9], 10), 8).is_err());
        let mut trailing = enc.encode(&[], 8);
        trailing.push(true);
        assert!(enc.decode(&trailing, 8).is_err());
    }
}
