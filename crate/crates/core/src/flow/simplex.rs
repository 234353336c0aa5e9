//! Dense-tableau two-phase primal simplex, generic over the scalar type.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// Entering-variable rule.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index improving column; never cycles.
    Bland,
    /// Largest reduced cost.
    Dantzig,
    /// Dantzig, falling back to Bland while a run of degenerate pivots lasts.
    #[default]
    Hybrid,
}

impl std::str::FromStr for PivotRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bland" => Ok(PivotRule::Bland),
            "dantzig" => Ok(PivotRule::Dantzig),
            "hybrid" => Ok(PivotRule::Hybrid),
            _ => Err(format!("unknown pivot rule `{s}` (bland|dantzig|hybrid)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Constraint<S> {
    pub coeffs: Vec<(usize, S)>,
    pub relation: Relation,
    pub rhs: S,
}

/// `maximize objective·x` subject to the constraints and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram<S> {
    pub n_vars: usize,
    pub objective: Vec<(usize, S)>,
    pub constraints: Vec<Constraint<S>>,
}

impl<S: Scalar> LinearProgram<S> {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, objective: Vec::new(), constraints: Vec::new() }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, S)>, relation: Relation, rhs: S) {
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("numerically infeasible basis: {0}")]
    Numerical(String),
}

const DEGENERATE_STREAK: usize = 50;

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    /// Reduced costs of the current objective (maximisation: enter if > 0).
    reduced: Vec<S>,
    value: S,
    allowed: Vec<bool>,
    pivots: usize,
    /// Constraint each row came from.
    origin: Vec<usize>,
}

impl<S: Scalar> Tableau<S> {
    fn set_objective(&mut self, cost: &[S]) {
        self.reduced = cost.to_vec();
        self.value = S::zero();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[r].iter().enumerate() {
                if !a.is_zero() {
                    self.reduced[j] = self.reduced[j].clone() - cb.clone() * a.clone();
                }
            }
            self.value = self.value.clone() + cb * self.rhs[r].clone();
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let p = self.rows[r][q].clone();
        let row: Vec<S> = self.rows[r].iter().map(|a| (a.clone() / p.clone()).cleaned()).collect();
        let b = (self.rhs[r].clone() / p).cleaned();
        let support: Vec<usize> = (0..row.len()).filter(|&j| !row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][q].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &support {
                let v = self.rows[i][j].clone() - f.clone() * row[j].clone();
                self.rows[i][j] = v.cleaned();
            }
            self.rows[i][q] = S::zero();
            self.rhs[i] = (self.rhs[i].clone() - f * b.clone()).cleaned();
        }
        let f = self.reduced[q].clone();
        if !f.is_zero() {
            for &j in &support {
                let v = self.reduced[j].clone() - f.clone() * row[j].clone();
                self.reduced[j] = v.cleaned();
            }
            self.reduced[q] = S::zero();
            self.value = self.value.clone() + f * b.clone();
        }
        self.rows[r] = row;
        self.rhs[r] = b;
        self.basis[r] = q;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, d) in self.reduced.iter().enumerate() {
            if !self.allowed[j] || !d.is_positive_tol() {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|b| *d > self.reduced[b]) {
                best = Some(j);
            }
        }
        best
    }

    /// Minimum-ratio row; ties go to the smallest basic variable index.
    fn leaving(&self, q: usize) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = &row[q];
            if !a.is_positive_tol() {
                continue;
            }
            let ratio = self.rhs[r].clone() / a.clone();
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let diff = ratio.clone() - bratio.clone();
                    if diff.is_negative_tol() || (diff.is_negligible() && self.basis[r] < self.basis[br]) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    /// Returns false when the objective is unbounded.
    fn optimise(&mut self, rule: PivotRule, limit: usize) -> Result<bool, LpError> {
        let mut streak = 0;
        loop {
            let bland = match rule {
                PivotRule::Bland => true,
                PivotRule::Dantzig => false,
                PivotRule::Hybrid => streak >= DEGENERATE_STREAK,
            };
            let Some(q) = self.entering(bland) else { return Ok(true) };
            let Some(r) = self.leaving(q) else { return Ok(false) };
            if self.pivots >= limit {
                return Err(LpError::IterationLimit(limit));
            }
            if self.rhs[r].is_negligible() {
                streak += 1;
            } else {
                streak = 0;
            }
            self.pivot(r, q);
        }
    }
}

/// Exact scalars are first solved in `f64`; the final basis is then
/// re-solved exactly and accepted only if it is primal and dual feasible.
/// Otherwise the exact tableau runs from scratch.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>, rule: PivotRule) -> Result<LpOutcome<S>, LpError> {
    if S::is_exact() {
        if let Some(out) = exact_from_float_basis(lp, rule) {
            return Ok(out);
        }
    }
    solve_dense(lp, rule).map(|(out, _)| out)
}

type Row<S> = (Vec<(usize, S)>, Relation, S);

/// Rows with nonnegative right-hand sides.
fn normalised<S: Scalar>(lp: &LinearProgram<S>) -> Vec<Row<S>> {
    lp.constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|(j, a)| (*j, -a.clone())).collect(), flipped, -c.rhs.clone())
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect()
}

/// Final basis and the constraints its rows came from.
type BasisInfo = (Vec<usize>, Vec<usize>);

fn solve_dense<S: Scalar>(lp: &LinearProgram<S>, rule: PivotRule) -> Result<(LpOutcome<S>, Option<BasisInfo>), LpError> {
    let m = lp.constraints.len();
    let n = lp.n_vars;
    let mut rows = normalised(lp);

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let width = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        rhs: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        reduced: Vec::new(),
        value: S::zero(),
        allowed: vec![true; width],
        pivots: 0,
        origin: (0..m).collect(),
    };
    let (mut slack, mut art) = (n, art_start);
    for (coeffs, rel, rhs) in rows.drain(..) {
        let mut row = vec![S::zero(); width];
        for (j, a) in coeffs {
            row[j] = row[j].clone() + a;
        }
        match rel {
            Relation::Le => {
                row[slack] = S::one();
                t.basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -S::one();
                slack += 1;
                row[art] = S::one();
                t.basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = S::one();
                t.basis.push(art);
                art += 1;
            }
        }
        t.rows.push(row);
        t.rhs.push(rhs);
    }
    let limit = 50_000 + 50 * (m + width);

    if n_art > 0 {
        let mut cost = vec![S::zero(); width];
        for c in cost.iter_mut().skip(art_start) {
            *c = -S::one();
        }
        t.set_objective(&cost);
        t.optimise(rule, limit)?;
        if t.value.is_negative_tol() {
            return Ok((LpOutcome::Infeasible, None));
        }
        // Drive artificials out of the basis, dropping redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                let q = (0..art_start).find(|&j| !t.rows[r][j].is_negligible());
                match q {
                    Some(q) => t.pivot(r, q),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        t.origin.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for a in t.allowed.iter_mut().skip(art_start) {
            *a = false;
        }
    }

    let mut cost = vec![S::zero(); width];
    for (j, c) in &lp.objective {
        cost[*j] = cost[*j].clone() + c.clone();
    }
    t.set_objective(&cost);
    if !t.optimise(rule, limit)? {
        return Ok((LpOutcome::Unbounded, None));
    }

    let mut x = vec![S::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs[r].clone();
        }
    }
    check_feasible(lp, &x)?;
    let value = lp.objective.iter().fold(S::zero(), |acc, (j, c)| acc + c.clone() * x[*j].clone());
    Ok((LpOutcome::Optimal { x, value }, Some((t.basis, t.origin))))
}

fn exact_from_float_basis<S: Scalar>(lp: &LinearProgram<S>, rule: PivotRule) -> Option<LpOutcome<S>> {
    let approx = LinearProgram::<f64> {
        n_vars: lp.n_vars,
        objective: lp.objective.iter().map(|(j, c)| (*j, c.to_f64())).collect(),
        constraints: lp
            .constraints
            .iter()
            .map(|c| Constraint {
                coeffs: c.coeffs.iter().map(|(j, a)| (*j, a.to_f64())).collect(),
                relation: c.relation,
                rhs: c.rhs.to_f64(),
            })
            .collect(),
    };
    let (LpOutcome::Optimal { .. }, Some((basis, kept))) = solve_dense(&approx, rule).ok()? else {
        return None;
    };
    let n = lp.n_vars;
    let rows = normalised(lp);
    // Column j of the standard form: structural for j < n, then one slack
    // per inequality row.
    let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); n];
    for (i, (coeffs, rel, _)) in rows.iter().enumerate() {
        for (j, a) in coeffs {
            columns[*j].push((i, a.clone()));
        }
        match rel {
            Relation::Le => columns.push(vec![(i, S::one())]),
            Relation::Ge => columns.push(vec![(i, -S::one())]),
            Relation::Eq => {}
        }
    }
    if basis.iter().any(|&b| b >= columns.len()) {
        return None;
    }
    let mut cost = vec![S::zero(); columns.len()];
    for (j, c) in &lp.objective {
        cost[*j] = cost[*j].clone() + c.clone();
    }
    let row_of: std::collections::HashMap<usize, usize> = kept.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let restricted = |j: usize| -> Vec<(usize, S)> {
        columns[j].iter().filter_map(|(i, a)| row_of.get(i).map(|&k| (k, a.clone()))).collect()
    };
    let r = kept.len();
    // B x_B = b over the kept rows.
    let mut b_rows: Vec<Vec<(usize, S)>> = vec![Vec::new(); r];
    for (k, &j) in basis.iter().enumerate() {
        for (i, a) in restricted(j) {
            b_rows[i].push((k, a));
        }
    }
    let b_rhs: Vec<S> = kept.iter().map(|&i| rows[i].2.clone()).collect();
    let x_b = sparse_solve(&b_rows, &b_rhs)?;
    if x_b.iter().any(|v| v.is_negative()) {
        return None;
    }
    // B^T y = c_B
    let bt_rows: Vec<Vec<(usize, S)>> = basis.iter().map(|&j| restricted(j)).collect();
    let c_b: Vec<S> = basis.iter().map(|&j| cost[j].clone()).collect();
    let y = sparse_solve(&bt_rows, &c_b)?;
    let mut in_basis = vec![false; columns.len()];
    for &j in &basis {
        in_basis[j] = true;
    }
    for j in (0..columns.len()).filter(|&j| !in_basis[j]) {
        let d = restricted(j).iter().fold(cost[j].clone(), |acc, (k, a)| acc - y[*k].clone() * a.clone());
        if d.is_positive() {
            return None;
        }
    }
    let mut x = vec![S::zero(); n];
    for (&j, v) in basis.iter().zip(&x_b) {
        if j < n {
            x[j] = v.clone();
        }
    }
    // Dropped rows must hold too; then equal objectives prove optimality.
    check_feasible(lp, &x).ok()?;
    let value = lp.objective.iter().fold(S::zero(), |acc, (j, c)| acc + c.clone() * x[*j].clone());
    let dual = y.iter().zip(&b_rhs).fold(S::zero(), |acc, (y, b)| acc + y.clone() * b.clone());
    (value == dual).then_some(LpOutcome::Optimal { x, value })
}

/// Solve a square sparse system by Gaussian elimination with a Markowitz-style
/// pivot order. `None` if singular.
fn sparse_solve<S: Scalar>(rows: &[Vec<(usize, S)>], rhs: &[S]) -> Option<Vec<S>> {
    use std::collections::{BTreeMap, BTreeSet};

    let r = rows.len();
    let mut a: Vec<BTreeMap<usize, S>> = rows
        .iter()
        .map(|row| {
            let mut m = BTreeMap::new();
            for (j, v) in row {
                if !v.is_zero() {
                    m.insert(*j, v.clone());
                }
            }
            m
        })
        .collect();
    let mut b = rhs.to_vec();
    // Unprocessed rows containing each column.
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); r];
    for (i, row) in a.iter().enumerate() {
        for &j in row.keys() {
            if j >= r {
                return None;
            }
            cols[j].insert(i);
        }
    }
    let mut col_done = vec![false; r];
    let mut order = Vec::with_capacity(r);
    for _ in 0..r {
        let c = (0..r).filter(|&j| !col_done[j]).min_by_key(|&j| (cols[j].len(), j))?;
        let p = *cols[c].iter().min_by_key(|&&i| (a[i].len(), i))?;
        col_done[c] = true;
        for &j in a[p].keys() {
            cols[j].remove(&p);
        }
        let pivot_row = a[p].clone();
        let piv = pivot_row[&c].clone();
        let others: Vec<usize> = cols[c].iter().copied().collect();
        for i in others {
            let f = a[i][&c].clone() / piv.clone();
            for (j, v) in &pivot_row {
                let cur = a[i].get(j).cloned().unwrap_or_else(S::zero);
                let next = cur - f.clone() * v.clone();
                if next.is_zero() {
                    a[i].remove(j);
                    cols[*j].remove(&i);
                } else {
                    a[i].insert(*j, next);
                    cols[*j].insert(i);
                }
            }
            b[i] = b[i].clone() - f * b[p].clone();
        }
        order.push((p, c));
    }
    let mut x = vec![S::zero(); r];
    for &(p, c) in order.iter().rev() {
        let rest = a[p].iter().filter(|(j, _)| **j != c).fold(b[p].clone(), |acc, (j, v)| acc - v.clone() * x[*j].clone());
        x[c] = rest / a[p][&c].clone();
    }
    Some(x)
}

fn check_feasible<S: Scalar>(lp: &LinearProgram<S>, x: &[S]) -> Result<(), LpError> {
    let slack = S::from_usize(1000) * S::tolerance();
    if let Some(j) = x.iter().position(|v| *v < -slack.clone()) {
        return Err(LpError::Numerical(format!("variable {j} is negative ({})", x[j])));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        let lhs = c.coeffs.iter().fold(S::zero(), |acc, (j, a)| acc + a.clone() * x[*j].clone());
        let gap = lhs - c.rhs.clone();
        let ok = match c.relation {
            Relation::Le => gap <= slack,
            Relation::Ge => gap >= -slack.clone(),
            Relation::Eq => gap.abs() <= slack,
        };
        if !ok {
            return Err(LpError::Numerical(format!("constraint {i} violated by {gap}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn textbook<S: Scalar>() -> LinearProgram<S> {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  (optimum 36 at (2, 6))
        let s = |v: usize| S::from_usize(v);
        let mut lp = LinearProgram::new(2);
        lp.objective = vec![(0, s(3)), (1, s(5))];
        lp.add(vec![(0, s(1))], Relation::Le, s(4));
        lp.add(vec![(1, s(2))], Relation::Le, s(12));
        lp.add(vec![(0, s(3)), (1, s(2))], Relation::Le, s(18));
        lp
    }

    #[test]
    fn textbook_all_rules_and_scalars() {
        for rule in [PivotRule::Bland, PivotRule::Dantzig, PivotRule::Hybrid] {
            match solve(&textbook::<f64>(), rule).unwrap() {
                LpOutcome::Optimal { x, value } => {
                    assert!((value - 36.0).abs() < 1e-9);
                    assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
                }
                other => panic!("{other:?}"),
            }
            match solve(&textbook::<BigRational>(), rule).unwrap() {
                LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(36, 1)),
                other => panic!("{other:?}"),
            }
            match solve(&textbook::<f32>(), rule).unwrap() {
                LpOutcome::Optimal { value, .. } => assert!((value - 36.0).abs() < 1e-3),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y, x + y = 3, x >= 1, y >= 1, x - y <= 0  -> 3
        let mut lp = LinearProgram::<BigRational>::new(2);
        let one = ratio(1, 1);
        lp.objective = vec![(0, one.clone()), (1, one.clone())];
        lp.add(vec![(0, one.clone()), (1, one.clone())], Relation::Eq, ratio(3, 1));
        lp.add(vec![(0, one.clone())], Relation::Ge, one.clone());
        lp.add(vec![(1, one.clone())], Relation::Ge, one.clone());
        lp.add(vec![(0, one.clone()), (1, -one.clone())], Relation::Le, ratio(0, 1));
        // redundant copy of the equality
        lp.add(vec![(0, ratio(2, 1)), (1, ratio(2, 1))], Relation::Eq, ratio(6, 1));
        match solve(&lp, PivotRule::Bland).unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, ratio(3, 1));
                assert!(x[0] <= x[1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::<f64>::new(1);
        lp.objective = vec![(0, 1.0)];
        lp.add(vec![(0, 1.0)], Relation::Le, 1.0);
        lp.add(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp, PivotRule::Hybrid).unwrap(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::<f64>::new(2);
        lp.objective = vec![(0, 1.0)];
        lp.add(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(solve(&lp, PivotRule::Hybrid).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // max -x, -x <= -2  -> x = 2
        let mut lp = LinearProgram::<f64>::new(1);
        lp.objective = vec![(0, -1.0)];
        lp.add(vec![(0, -1.0)], Relation::Le, -2.0);
        match solve(&lp, PivotRule::Dantzig).unwrap() {
            LpOutcome::Optimal { x, .. } => assert!((x[0] - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn float_basis_matches_dense_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut guided = 0;
        for _ in 0..60 {
            let n = rng.gen_range(2..7);
            let mut lp = LinearProgram::<BigRational>::new(n);
            lp.objective = (0..n).map(|j| (j, ratio(rng.gen_range(-3..6), rng.gen_range(1..4)))).collect();
            for _ in 0..rng.gen_range(2..8) {
                let mut coeffs = Vec::new();
                for j in 0..n {
                    if rng.gen_bool(0.7) {
                        coeffs.push((j, ratio(rng.gen_range(-2..5), rng.gen_range(1..3))));
                    }
                }
                let rel = [Relation::Le, Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..4)];
                lp.add(coeffs, rel, ratio(rng.gen_range(-3..10), rng.gen_range(1..4)));
            }
            // keep it bounded
            lp.add((0..n).map(|j| (j, ratio(1, 1))).collect(), Relation::Le, ratio(20, 1));
            let dense = solve_dense(&lp, PivotRule::Bland).unwrap().0;
            if exact_from_float_basis(&lp, PivotRule::Hybrid).is_some() {
                guided += 1;
            }
            match (solve(&lp, PivotRule::Hybrid).unwrap(), dense) {
                (LpOutcome::Optimal { value: a, x }, LpOutcome::Optimal { value: b, .. }) => {
                    assert_eq!(a, b);
                    check_feasible(&lp, &x).unwrap();
                }
                (a, b) => assert_eq!(a, b),
            }
        }
        assert!(guided > 10, "float-guided path taken {guided} times");
    }

    #[test]
    fn sparse_solve_inverts() {
        // [2 1 0; 0 1 3; 1 0 1] x = [3, 7, 3] -> x = (1, 1, 2)
        let r = |v| ratio(v, 1);
        let rows = vec![vec![(0, r(2)), (1, r(1))], vec![(1, r(1)), (2, r(3))], vec![(0, r(1)), (2, r(1))]];
        assert_eq!(sparse_solve(&rows, &[r(3), r(7), r(3)]), Some(vec![r(1), r(1), r(2)]));
        let singular = vec![vec![(0, r(1)), (1, r(1))], vec![(0, r(2)), (1, r(2))]];
        assert_eq!(sparse_solve(&singular, &[r(1), r(2)]), None);
    }
}
