use super::CorrectionError;

/// The three terms of the communication bound
/// `3m + 2m lg(sqrt(ε/2)·n/m + 1) + sqrt(ε/8)·n·lg(2/ε)`.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LemmaBudget {
    pub terms: [f64; 3],
    pub total: f64,
    /// ε = 0: the last term is replaced by its limit 0.
    pub epsilon_zero: bool,
}

fn checked(eps: f64) -> Result<(), CorrectionError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(CorrectionError::Epsilon(eps));
    }
    Ok(())
}

fn last_term(n: f64, eps: f64) -> f64 {
    if eps == 0.0 {
        0.0
    } else {
        (eps / 8.0).sqrt() * n * (2.0 / eps).log2()
    }
}

pub fn lemma_budget(n: usize, m: usize, eps: f64) -> Result<LemmaBudget, CorrectionError> {
    checked(eps)?;
    if m == 0 {
        return Err(CorrectionError::Players { n, m });
    }
    let (n, m) = (n as f64, m as f64);
    let terms = [3.0 * m, 2.0 * m * ((eps / 2.0).sqrt() * (n / m) + 1.0).log2(), last_term(n, eps)];
    Ok(LemmaBudget { terms, total: terms.iter().sum(), epsilon_zero: eps == 0.0 })
}

/// The same bound written for `m = n/k` players:
/// `3n/k + (2n/k) lg(k sqrt(ε/2) + 1) + sqrt(ε/8)·n·lg(2/ε)`.
pub fn lemma_budget_blocks(n: usize, k: usize, eps: f64) -> Result<LemmaBudget, CorrectionError> {
    checked(eps)?;
    if k == 0 {
        return Err(CorrectionError::Players { n, m: 0 });
    }
    let (n, k) = (n as f64, k as f64);
    let terms = [3.0 * n / k, 2.0 * n / k * (k * (eps / 2.0).sqrt() + 1.0).log2(), last_term(n, eps)];
    Ok(LemmaBudget { terms, total: terms.iter().sum(), epsilon_zero: eps == 0.0 })
}

/// Largest ε for which the block-form bound stays within `factor · n/k`,
/// found by bisection on the range where the bound increases with ε.
/// `None` when even ε → 0 exceeds it.
pub fn largest_epsilon_within(k: usize, factor: f64) -> Option<f64> {
    let per_n = |eps: f64| lemma_budget_blocks(1, k, eps).map(|b| b.total).unwrap_or(f64::INFINITY);
    let limit = factor / k as f64;
    if per_n(0.0) > limit {
        return None;
    }
    // sqrt(ε) lg(2/ε) peaks at ε = 2/e^2; beyond it the bound is not monotone.
    let (mut lo, mut hi) = (0.0, 2.0 / std::f64::consts::E.powi(2));
    if per_n(hi) <= limit {
        return Some(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if per_n(mid) <= limit {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_form_agrees_with_general_form() {
        for (n, k) in [(20, 20), (400, 20), (48, 4)] {
            for eps in [0.0, 1.0 / 300.0, 0.1, 1.0] {
                let a = lemma_budget(n, n / k, eps).unwrap();
                let b = lemma_budget_blocks(n, k, eps).unwrap();
                assert!((a.total - b.total).abs() < 1e-9 * a.total.max(1.0));
            }
        }
    }

    #[test]
    fn zero_epsilon_keeps_only_player_terms() {
        let b = lemma_budget(12, 3, 0.0).unwrap();
        assert!(b.epsilon_zero);
        assert_eq!(b.terms, [9.0, 0.0, 0.0]);
        assert!(lemma_budget(12, 3, -0.1).is_err());
        assert!(lemma_budget(12, 0, 0.1).is_err());
    }

    #[test]
    fn last_term_vanishes_as_epsilon_shrinks() {
        let t = |e: f64| lemma_budget(1000, 10, e).unwrap().terms[2];
        assert!(t(1e-6) < t(1e-4) && t(1e-4) < t(1e-2));
        assert!(t(1e-16) < 1e-3);
    }

    #[test]
    fn largest_epsilon_is_a_boundary() {
        let e = largest_epsilon_within(20, 5.0).unwrap();
        let at = |x: f64| lemma_budget_blocks(20, 20, x).unwrap().total;
        assert!(at(e) <= 5.0 + 1e-12);
        assert!(at(e * 1.001) > 5.0);
        assert_eq!(largest_epsilon_within(20, 2.0), None);
    }
}
