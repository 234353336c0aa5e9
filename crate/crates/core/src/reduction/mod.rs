//! Circuit-to-network reductions and their certificate chains.
//!
//! Mode A turns a bounded-degree shift circuit into an `n`-pairs instance on
//! the circuit itself. Mode B wraps the two outer layers of a depth-3 circuit
//! with sources, per-block relays and a supervisor that plays the correction
//! game.

mod certificate;
mod mode_a;
mod mode_b;

use std::str::FromStr;

use thiserror::Error;

pub use certificate::{Binding, Certificate, Relation, Step, Value, LP_TOLERANCE, REAL_TOLERANCE};
pub use mode_a::{build_instance_a, certify_a, choose_shift_a, ModeAOptions, ModeAReport, ShiftChoice};
pub use mode_b::{
    build_network_b, certify_b, choose_alpha_b, extract_family, implied_degree_bound, AlphaChoice, Depth3Shape,
    FamilyExtraction, ModeBOptions, ModeBReport, NetworkB,
};

use crate::bits::BitString;
use crate::circuit::{Circuit, CircuitError, GateFn, NodeId, NodeKind};
use crate::correction::CorrectionError;
use crate::flow::FlowError;
use crate::funcgen::{FuncgenError, ShiftEncoding};
use crate::netcode::{CommInstance, EdgeFn, NetcodeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Netcode(#[from] NetcodeError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Correction(#[from] CorrectionError),
    #[error(transparent)]
    Funcgen(#[from] FuncgenError),
    #[error("circuit layout: {0}")]
    Layout(String),
    #[error("{0}")]
    Invalid(String),
}

/// How the shift amount enters the circuit.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum ShiftHint {
    /// Inputs named `h<i>` are one-hot, `j<i>` binary, otherwise none.
    #[default]
    Auto,
    None,
    OneHot,
    Binary,
}

impl FromStr for ShiftHint {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ShiftHint::Auto),
            "none" => Ok(ShiftHint::None),
            "onehot" => Ok(ShiftHint::OneHot),
            "binary" => Ok(ShiftHint::Binary),
            _ => Err(format!("unknown shift encoding `{s}` (auto|none|onehot|binary)")),
        }
    }
}

/// Inputs `x_1..x_n` come first, then the shift block (if any); `y` outputs
/// are paired with sources by shift amount.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftLayout {
    pub n: usize,
    pub cyclic: bool,
    pub encoding: Option<ShiftEncoding>,
    pub n_out: usize,
}

impl ShiftLayout {
    pub fn detect(c: &Circuit, cyclic: bool, hint: ShiftHint) -> Result<Self, ReductionError> {
        let names: Vec<&str> = c.inputs().map(|v| c.node(v).name.as_str()).collect();
        let tail_count = |prefix: char| {
            names
                .iter()
                .rev()
                .take_while(|s| s.starts_with(prefix) && s[1..].parse::<usize>().is_ok())
                .count()
        };
        let encoding = match hint {
            ShiftHint::None => None,
            ShiftHint::OneHot => Some(ShiftEncoding::OneHot),
            ShiftHint::Binary => Some(ShiftEncoding::Binary),
            ShiftHint::Auto => {
                if tail_count('h') > 0 {
                    Some(ShiftEncoding::OneHot)
                } else if tail_count('j') > 0 {
                    Some(ShiftEncoding::Binary)
                } else {
                    None
                }
            }
        };
        let n_in = c.n_in();
        let n = match encoding {
            None => n_in,
            Some(ShiftEncoding::OneHot) => n_in / 2,
            Some(ShiftEncoding::Binary) => {
                (1..=n_in).find(|&n| n + ShiftEncoding::Binary.width(n) == n_in).unwrap_or(0)
            }
        };
        if n == 0 || encoding.is_some_and(|e| n + e.width(n) != n_in) {
            return Err(ReductionError::Layout(format!("{n_in} inputs do not split into x and a {encoding:?} shift block")));
        }
        if c.n_out() < n {
            return Err(ReductionError::Layout(format!("{} outputs for {n} inputs", c.n_out())));
        }
        Ok(Self { n, cyclic, encoding, n_out: c.n_out() })
    }

    /// 0-based output paired with source `j` (0-based) under shift `l`
    /// (1-based): `y_{j+l-1}`, or `y_{((j+l-2) mod n)+1}` when cyclic.
    /// `None` when that output does not exist.
    pub fn target(&self, j: usize, l: usize) -> Option<usize> {
        let t = if self.cyclic { (j + l - 1) % self.n } else { j + l - 1 };
        (t < self.n_out).then_some(t)
    }

    pub fn x(&self, c: &Circuit, j: usize) -> NodeId {
        c.input(j)
    }

    pub fn shift_inputs(&self, c: &Circuit) -> Vec<NodeId> {
        (self.n..c.n_in()).map(|i| c.input(i)).collect()
    }

    /// Hardwiring that fixes the shift block to `l`.
    pub fn shift_assignment(&self, c: &Circuit, l: usize) -> Vec<(NodeId, bool)> {
        match self.encoding {
            None => Vec::new(),
            Some(e) => self.shift_inputs(c).into_iter().zip(e.encode(self.n, l)).collect(),
        }
    }
}

/// `d >= ½ log_{2c} n`, decided exactly as `(2c)^{2d} >= n`. Unreachable
/// pairs are far. Degrees below 1 are treated as 1.
pub fn is_far(d: Option<usize>, c: usize, n: usize) -> bool {
    let Some(d) = d else { return true };
    let base = 2 * c.max(1) as u128;
    let mut p: u128 = 1;
    for _ in 0..2 * d {
        p = p.saturating_mul(base);
        if p >= n as u128 {
            return true;
        }
    }
    p >= n as u128
}

/// Edge rule evaluating circuit node `v` from the messages on the in-edges
/// of instance node `node`. `circuit_node` maps the tail of each in-edge back
/// to the circuit predecessor it stands for.
pub(crate) fn gate_rule(
    c: &Circuit,
    v: NodeId,
    inst: &CommInstance,
    node: usize,
    circuit_node: impl Fn(usize) -> Option<NodeId>,
) -> Result<EdgeFn, ReductionError> {
    let name = c.node(v).name.clone();
    let func = match &c.node(v).kind {
        NodeKind::Const(b) => GateFn::constant(0, *b),
        _ => c.node(v).func().cloned().ok_or_else(|| ReductionError::Invalid(format!("`{name}` is not a gate")))?,
    };
    let preds = c.preds(v);
    let perm: Vec<usize> = inst
        .in_edges(node)
        .iter()
        .map(|&e| circuit_node(inst.edge(e).src).and_then(|p| preds.iter().position(|&q| q == p)))
        .collect::<Option<_>>()
        .filter(|perm: &Vec<usize>| perm.len() == preds.len())
        .ok_or_else(|| ReductionError::Invalid(format!("in-edges of `{name}` do not match its predecessors")))?;
    Ok(EdgeFn::rule(format!("gate {name}"), move |m| {
        if m.len() != perm.len() {
            return Err(format!("expected {} inputs, got {}", perm.len(), m.len()));
        }
        let mut t = 0usize;
        for (&p, msg) in perm.iter().zip(m) {
            match msg.bits() {
                [b] => t |= usize::from(*b) << p,
                _ => return Err(format!("expected a 1-bit message, got `{msg}`")),
            }
        }
        Ok(BitString(vec![func.get(t)]))
    }))
}

/// `½ log_{2c} n` as a float.
pub fn half_log(c: usize, n: usize) -> f64 {
    0.5 * (n as f64).ln() / (2.0 * c.max(1) as f64).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcgen::{build_barrel_shifter, build_depth3_identity, build_depth3_shift, ShiftSpec};

    #[test]
    fn far_test_is_exact() {
        // ½ log_6 8 ≈ 0.58: distance 1 is far, 0 is not
        assert!(!is_far(Some(0), 3, 8));
        assert!(is_far(Some(1), 3, 8));
        // ½ log_4 16 = 1 exactly
        assert!(is_far(Some(1), 2, 16));
        assert!(!is_far(Some(1), 2, 17));
        assert!(is_far(None, 2, 1 << 20));
        assert!((half_log(2, 16) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layouts() {
        let b = build_barrel_shifter(8).unwrap();
        let l = ShiftLayout::detect(&b, false, ShiftHint::Auto).unwrap();
        assert_eq!((l.n, l.encoding, l.n_out), (8, Some(ShiftEncoding::Binary), 16));
        assert_eq!(l.shift_assignment(&b, 2).iter().map(|a| a.1).collect::<Vec<_>>(), vec![true, false, false]);

        let d = build_depth3_shift(ShiftSpec::plain(4), 0.5, ShiftEncoding::OneHot).unwrap().circuit;
        let l = ShiftLayout::detect(&d, false, ShiftHint::Auto).unwrap();
        assert_eq!((l.n, l.encoding), (4, Some(ShiftEncoding::OneHot)));

        let id = build_depth3_identity(6, 1).unwrap();
        let l = ShiftLayout::detect(&id, true, ShiftHint::Auto).unwrap();
        assert_eq!((l.n, l.encoding), (6, None));
        assert_eq!(l.target(5, 2), Some(0));
        let plain = ShiftLayout { cyclic: false, ..l };
        assert_eq!(plain.target(5, 2), None);
    }
}
