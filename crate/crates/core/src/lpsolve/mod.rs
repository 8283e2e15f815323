//! Canonical linear-program representation and a dual-capable solver.
//!
//! A [`LinearProgram`] is always a maximization over named, box-bounded
//! variables subject to named equality or two-sided inequality rows.
//! [`LinearProgram::solve`] runs a bounded-variable revised simplex and
//! returns primal values, row duals, and reduced costs.
//!
//! Dual convention: the dual of a row is the derivative of the optimal
//! objective with respect to the row's right-hand side (for an equality
//! `a·x = b`, that is d(obj)/db; for a range row, the sensitivity to
//! shifting both bounds together). Reduced costs are `c_j - y·A_j`, so at
//! an optimum a variable at its lower bound has a nonpositive reduced cost
//! and a variable at its upper bound a nonnegative one.

mod simplex;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Handle to a variable of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

/// Handle to a constraint row of a [`LinearProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct RowId(pub(crate) usize);

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct RowDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub terms: Vec<(usize, f64)>,
}

/// Errors raised while building a [`LinearProgram`].
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("bounds for `{name}` are invalid: [{lower}, {upper}]")]
    InvalidBounds {
        name: String,
        lower: f64,
        upper: f64,
    },
    #[error("coefficient for `{0}` is not finite")]
    NonFiniteCoefficient(String),
    #[error("variable id out of range")]
    UnknownVariable,
}

/// Solver tolerances; see field docs for what each gate checks.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Absolute per-row feasibility tolerance on the reported solution.
    pub feasibility: f64,
    /// Relative duality-gap tolerance: |gap| <= gap * (1 + |objective|).
    pub gap: f64,
    /// Relative complementary-slackness tolerance, same normalization.
    pub complementarity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            gap: 1e-6,
            complementarity: 1e-6,
        }
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// Solution of a [`LinearProgram`].
///
/// Primal values, duals, and reduced costs are meaningful only when
/// `status == Optimal`; otherwise the vectors are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    /// Largest absolute row or bound violation of the reported point.
    pub primal_residual: f64,
    /// Absolute duality gap of the reported point.
    pub duality_gap: f64,
    /// Largest single complementary-slackness defect.
    pub complementarity_residual: f64,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.primal[var.0]
    }

    pub fn dual(&self, row: RowId) -> f64 {
        self.duals[row.0]
    }

    pub fn reduced_cost(&self, var: VarId) -> f64 {
        self.reduced_costs[var.0]
    }

    fn failed(status: SolveStatus) -> Self {
        LpSolution {
            status,
            objective: f64::NAN,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            iterations: 0,
            primal_residual: f64::NAN,
            duality_gap: f64::NAN,
            complementarity_residual: f64::NAN,
        }
    }
}

/// A maximization LP with named variables and rows plus domain-entity tags.
///
/// Tags attach stable domain keys (for example `"balance:bus7"` or
/// `"green-balance"`) to variables and rows so callers can read the
/// corresponding primal values and duals without tracking ids themselves.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    name: String,
    vars: Vec<VarDef>,
    rows: Vec<RowDef>,
    var_names: BTreeMap<String, usize>,
    row_names: BTreeMap<String, usize>,
    var_tags: BTreeMap<String, VarId>,
    row_tags: BTreeMap<String, RowId>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>) -> Self {
        LinearProgram {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_variables(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable with bounds `lower <= x <= upper` (infinities allowed)
    /// and the given objective coefficient.
    pub fn add_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        objective: f64,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        if !objective.is_finite() {
            return Err(ModelError::NonFiniteCoefficient(name));
        }
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        let id = self.vars.len();
        self.var_names.insert(name.clone(), id);
        self.vars.push(VarDef {
            name,
            lower,
            upper,
            objective,
        });
        Ok(VarId(id))
    }

    /// Adds an equality row `sum(terms) = rhs`.
    pub fn add_equality(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarId, f64)],
        rhs: f64,
    ) -> Result<RowId, ModelError> {
        self.add_row(name.into(), terms, rhs, rhs)
    }

    /// Adds a two-sided row `lower <= sum(terms) <= upper`; either side may
    /// be infinite.
    pub fn add_range(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarId, f64)],
        lower: f64,
        upper: f64,
    ) -> Result<RowId, ModelError> {
        self.add_row(name.into(), terms, lower, upper)
    }

    fn add_row(
        &mut self,
        name: String,
        terms: &[(VarId, f64)],
        lower: f64,
        upper: f64,
    ) -> Result<RowId, ModelError> {
        if lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        if self.row_names.contains_key(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        // Merge duplicate variable references so the solver sees one
        // coefficient per column.
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(var, coeff) in terms {
            if var.0 >= self.vars.len() {
                return Err(ModelError::UnknownVariable);
            }
            if !coeff.is_finite() {
                return Err(ModelError::NonFiniteCoefficient(
                    self.vars[var.0].name.clone(),
                ));
            }
            *merged.entry(var.0).or_insert(0.0) += coeff;
        }
        let id = self.rows.len();
        self.row_names.insert(name.clone(), id);
        self.rows.push(RowDef {
            name,
            lower,
            upper,
            terms: merged.into_iter().collect(),
        });
        Ok(RowId(id))
    }

    pub fn tag_variable(&mut self, key: impl Into<String>, var: VarId) {
        self.var_tags.insert(key.into(), var);
    }

    pub fn tag_row(&mut self, key: impl Into<String>, row: RowId) {
        self.row_tags.insert(key.into(), row);
    }

    pub fn tagged_variable(&self, key: &str) -> Option<VarId> {
        self.var_tags.get(key).copied()
    }

    pub fn tagged_row(&self, key: &str) -> Option<RowId> {
        self.row_tags.get(key).copied()
    }

    pub fn variable_name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    pub fn row_name(&self, row: RowId) -> &str {
        &self.rows[row.0].name
    }

    /// Solves the program. Non-optimal outcomes are reported through
    /// [`LpSolution::status`] rather than as errors.
    pub fn solve(&self, tol: &Tolerances) -> LpSolution {
        simplex::solve(self, tol)
    }

    /// Renders the program in a plain-text format for cross-checking against
    /// external tools: one `maximize` line, one line per row as
    /// `name [lower, upper]: coeff*var ...`, then one `bounds` line per
    /// variable as `lower <= name <= upper (obj coeff)`.
    pub fn debug_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program {}", self.name);
        let mut obj = String::from("maximize");
        for v in &self.vars {
            if v.objective != 0.0 {
                let _ = write!(obj, " {:+}*{}", v.objective, v.name);
            }
        }
        let _ = writeln!(out, "{obj}");
        let _ = writeln!(out, "subject to");
        for r in &self.rows {
            let mut line = format!("  {} [{}, {}]:", r.name, r.lower, r.upper);
            for &(var, coeff) in &r.terms {
                let _ = write!(line, " {:+}*{}", coeff, self.vars[var].name);
            }
            let _ = writeln!(out, "{line}");
        }
        let _ = writeln!(out, "bounds");
        for v in &self.vars {
            let _ = writeln!(
                out,
                "  {} <= {} <= {} (obj {})",
                v.lower, v.name, v.upper, v.objective
            );
        }
        out
    }

    pub(crate) fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub(crate) fn rows(&self) -> &[RowDef] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_duplicate_names() {
        let mut lp = LinearProgram::new("t");
        lp.add_variable("x", 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            lp.add_variable("x", 0.0, 1.0, 1.0),
            Err(ModelError::DuplicateName(_))
        ));
    }

    #[test]
    fn builder_rejects_inverted_bounds() {
        let mut lp = LinearProgram::new("t");
        assert!(matches!(
            lp.add_variable("x", 2.0, 1.0, 0.0),
            Err(ModelError::InvalidBounds { .. })
        ));
    }

    #[test]
    fn duplicate_terms_merge() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 10.0, 1.0).unwrap();
        lp.add_equality("r", &[(x, 1.0), (x, 1.0)], 4.0).unwrap();
        let sol = lp.solve(&Tolerances::default());
        assert!(sol.is_optimal());
        assert!((sol.value(x) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn tags_resolve() {
        let mut lp = LinearProgram::new("t");
        let x = lp.add_variable("x", 0.0, 1.0, 1.0).unwrap();
        let r = lp.add_equality("r", &[(x, 1.0)], 0.5).unwrap();
        lp.tag_variable("the-var", x);
        lp.tag_row("the-row", r);
        assert_eq!(lp.tagged_variable("the-var"), Some(x));
        assert_eq!(lp.tagged_row("the-row"), Some(r));
        assert_eq!(lp.tagged_row("missing"), None);
    }

    #[test]
    fn debug_text_lists_rows_and_bounds() {
        let mut lp = LinearProgram::new("dump");
        let x = lp.add_variable("x", 0.0, 2.0, 3.0).unwrap();
        lp.add_range("r", &[(x, 1.5)], -1.0, 1.0).unwrap();
        let text = lp.debug_text();
        assert!(text.contains("maximize +3*x"));
        assert!(text.contains("r [-1, 1]: +1.5*x"));
        assert!(text.contains("0 <= x <= 2"));
    }
}
