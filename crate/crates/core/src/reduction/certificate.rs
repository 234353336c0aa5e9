use std::fmt;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::One;

use crate::scalar::{format_rational, ratio_to_f64, Scalar};

/// Tolerance for comparisons involving an LP value.
pub const LP_TOLERANCE: f64 = 1e-6;
/// Tolerance for comparisons involving a float (logarithms, entropies).
pub const REAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    /// Closed-form value that needs a logarithm or square root.
    Real(f64),
    /// Read off a floating-point LP solution.
    Lp(f64),
}

impl Value {
    pub fn int(v: usize) -> Self {
        Value::Exact(BigRational::from_integer(v.into()))
    }

    /// An LP-derived scalar: exact when the LP was solved exactly.
    pub fn lp<S: Scalar>(v: &S) -> Self {
        if S::is_exact() {
            Value::Exact(v.to_rational())
        } else {
            Value::Lp(v.to_f64())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => ratio_to_f64(r),
            Value::Real(x) | Value::Lp(x) => *x,
        }
    }

    fn tolerance(&self) -> f64 {
        match self {
            Value::Exact(_) => 0.0,
            Value::Real(_) => REAL_TOLERANCE,
            Value::Lp(_) => LP_TOLERANCE,
        }
    }

    fn csv(&self) -> String {
        match self {
            Value::Exact(r) => format_rational(r),
            Value::Real(x) => format!("{x:.12}"),
            Value::Lp(x) => format!("{x:.9}"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) if r.denom().is_one() => write!(f, "{}", r.numer()),
            Value::Exact(r) => write!(f, "{} (~{:.6})", format_rational(r), ratio_to_f64(r)),
            Value::Real(x) => write!(f, "{x:.9}"),
            Value::Lp(x) => write!(f, "{x:.6} ±1e-6"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

impl Relation {
    pub fn holds(self, lhs: &Value, rhs: &Value) -> bool {
        if let (Value::Exact(a), Value::Exact(b)) = (lhs, rhs) {
            return match self {
                Relation::Ge => a >= b,
                Relation::Le => a <= b,
                Relation::Eq => a == b,
            };
        }
        let tol = lhs.tolerance().max(rhs.tolerance());
        let (a, b) = (lhs.to_f64(), rhs.to_f64());
        match self {
            Relation::Ge => a >= b - tol,
            Relation::Le => a <= b + tol,
            Relation::Eq => (a - b).abs() <= tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Le => "<=",
            Relation::Eq => "=",
        }
    }
}

/// Whether a step counts toward the verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Binding {
    Binding,
    /// The inequality only follows once a size threshold is met; evaluated
    /// and shown, but ignored by the verdict unless strict.
    Vacuous(String),
    /// Reported for comparison only.
    Informational,
}

impl Binding {
    fn label(&self) -> &'static str {
        match self {
            Binding::Binding => "binding",
            Binding::Vacuous(_) => "vacuous",
            Binding::Informational => "informational",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub name: String,
    pub anchor: String,
    pub lhs: Value,
    pub relation: Relation,
    pub rhs: Value,
    pub pass: bool,
    pub binding: Binding,
    pub note: Option<String>,
}

impl Step {
    pub fn new(name: &str, anchor: &str, lhs: Value, relation: Relation, rhs: Value, binding: Binding) -> Self {
        let pass = relation.holds(&lhs, &rhs);
        Self { name: name.into(), anchor: anchor.into(), lhs, relation, rhs, pass, binding, note: None }
    }

    /// Binding when `ok`, vacuous with `reason` otherwise.
    pub fn binding_if(mut self, ok: bool, reason: impl Into<String>) -> Self {
        self.binding = if ok { Binding::Binding } else { Binding::Vacuous(reason.into()) };
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Whether this step makes the verdict fail.
    pub fn fails(&self, strict: bool) -> bool {
        match &self.binding {
            Binding::Binding => !self.pass,
            Binding::Vacuous(_) => strict,
            Binding::Informational => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub mode: String,
    pub params: Vec<(String, String)>,
    pub steps: Vec<Step>,
    pub strict: bool,
}

impl Certificate {
    pub fn new(mode: &str, strict: bool) -> Self {
        Self { mode: mode.into(), params: Vec::new(), steps: Vec::new(), strict }
    }

    pub fn param(&mut self, key: &str, value: impl fmt::Display) {
        self.params.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, step: Step) {
        self.steps.push(step);
    }

    pub fn step(&self, name: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.name == name)
    }

    /// Every binding step passes; under strict mode no step may be vacuous.
    pub fn verdict(&self) -> bool {
        !self.steps.iter().any(|s| s.fails(self.strict))
    }

    pub fn vacuous_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.binding, Binding::Vacuous(_))).count()
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "certificate: mode {}{}", self.mode, if self.strict { " (strict)" } else { "" }).unwrap();
        for (k, v) in &self.params {
            writeln!(out, "  {k:<22} {v}").unwrap();
        }
        writeln!(out).unwrap();
        let rows: Vec<[String; 7]> = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                [
                    (i + 1).to_string(),
                    s.name.clone(),
                    s.lhs.to_string(),
                    s.relation.symbol().to_string(),
                    s.rhs.to_string(),
                    if s.pass { "pass" } else { "FAIL" }.to_string(),
                    s.binding.label().to_string(),
                ]
            })
            .collect();
        let header = ["#", "step", "lhs", "rel", "rhs", "result", "binding"].map(String::from);
        let mut widths = header.clone().map(|h| h.chars().count());
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String; 7]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                s.push_str(c);
                s.extend(std::iter::repeat_n(' ', w - c.chars().count()));
            }
            s.trim_end().to_string()
        };
        writeln!(out, "{}", line(&header)).unwrap();
        for (r, s) in rows.iter().zip(&self.steps) {
            writeln!(out, "{}", line(r)).unwrap();
            writeln!(out, "     anchor: {}", s.anchor).unwrap();
            if let Binding::Vacuous(why) = &s.binding {
                writeln!(out, "     vacuous: {why}").unwrap();
            }
            if let Some(n) = &s.note {
                writeln!(out, "     note: {n}").unwrap();
            }
        }
        writeln!(out).unwrap();
        let failed: Vec<String> = (self.steps.iter().enumerate())
            .filter(|(_, s)| s.fails(self.strict))
            .map(|(i, _)| (i + 1).to_string())
            .collect();
        writeln!(
            out,
            "verdict: {} ({} steps, {} vacuous{})",
            if self.verdict() { "PASS" } else { "FAIL" },
            self.steps.len(),
            self.vacuous_count(),
            if failed.is_empty() { String::new() } else { format!(", failing: {}", failed.join(" ")) }
        )
        .unwrap();
        out
    }

    /// `step,anchor,lhs,rel,rhs,pass,binding`; exact values as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,anchor,lhs,rel,rhs,pass,binding\n");
        let quote = |s: &str| {
            if s.contains([',', '"']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        };
        for s in &self.steps {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                quote(&s.name),
                quote(&s.anchor),
                s.lhs.csv(),
                s.relation.symbol(),
                s.rhs.csv(),
                s.pass,
                s.binding.label()
            )
            .unwrap();
        }
        out
    }
}
