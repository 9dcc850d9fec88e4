//! Solver-agnostic linear/mixed-integer program representation, plus export
//! to the fixed-field MPS exchange format for cross-checking against
//! external solvers.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

/// Identifies a decision variable by its role in the expansion model.
/// Indices refer to positions in the originating `PlanningCase` and
/// `BlockSchedule` (years are 1-based, blocks 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKey {
    /// Integer PV units built in a region in a year.
    PvBuild { region: usize, year: usize },
    /// Total MW output of a conventional unit group in a (year, block).
    Dispatch { unit: usize, year: usize, block: usize },
    /// Total MW output of a region's PV fleet in a (year, block).
    PvDispatch { region: usize, year: usize, block: usize },
    /// Unserved power in a region (MW).
    Unserved { region: usize, year: usize, block: usize },
    /// Interface flow in the from->to direction (MW).
    FlowPos { iface: usize, year: usize, block: usize },
    /// Interface flow in the to->from direction (MW).
    FlowNeg { iface: usize, year: usize, block: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    /// Sparse row: (variable index, coefficient).
    pub row: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization program in canonical form. Every constraint row references
/// declared variables only; bounds satisfy lower <= upper.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearProgramSpec {
    pub name: String,
    pub variables: Vec<Variable>,
    /// Linear objective coefficients, one per variable.
    pub objective: Vec<f64>,
    /// Constant objective offset (cost of the existing fleet).
    pub objective_constant: f64,
    pub constraints: Vec<Constraint>,
    /// Role-keyed index into `variables`.
    pub index: BTreeMap<VarKey, usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum LpSpecError {
    #[error("constraint {constraint} references undeclared variable {var}")]
    UndeclaredVariable { constraint: String, var: usize },
    #[error("variable {0} has lower bound above upper bound")]
    InvertedBounds(String),
    #[error("objective length {objective} != variable count {variables}")]
    ObjectiveLength { objective: usize, variables: usize },
}

impl LinearProgramSpec {
    pub fn add_variable(
        &mut self,
        key: VarKey,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> usize {
        let idx = self.variables.len();
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.objective.push(0.0);
        self.index.insert(key, idx);
        idx
    }

    pub fn var(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn has_integers(&self) -> bool {
        self.variables.iter().any(|v| v.integer)
    }

    /// Objective value of a full assignment, including the constant term.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    pub fn check(&self) -> Result<(), LpSpecError> {
        if self.objective.len() != self.variables.len() {
            return Err(LpSpecError::ObjectiveLength {
                objective: self.objective.len(),
                variables: self.variables.len(),
            });
        }
        for v in &self.variables {
            if v.lower > v.upper {
                return Err(LpSpecError::InvertedBounds(v.name.clone()));
            }
        }
        for c in &self.constraints {
            for (idx, _) in &c.row {
                if *idx >= self.variables.len() {
                    return Err(LpSpecError::UndeclaredVariable {
                        constraint: c.name.clone(),
                        var: *idx,
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes the program in fixed-field MPS format. Integer variables are
    /// wrapped in INTORG/INTEND markers; the objective constant is encoded
    /// as a RHS entry on the objective row.
    pub fn write_mps(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "NAME          {}", sanitize(&self.name, "MODEL"))?;
        writeln!(out, "ROWS")?;
        writeln!(out, " N  COST")?;
        for (i, c) in self.constraints.iter().enumerate() {
            let tag = match c.sense {
                Sense::Le => "L",
                Sense::Ge => "G",
                Sense::Eq => "E",
            };
            writeln!(out, " {}  {}", tag, row_name(i))?;
        }

        // Column-major entries; one MARKER pair around each integer run.
        writeln!(out, "COLUMNS")?;
        let mut by_col: Vec<Vec<(String, f64)>> = vec![Vec::new(); self.variables.len()];
        for (j, coef) in self.objective.iter().enumerate() {
            if *coef != 0.0 {
                by_col[j].push(("COST".into(), *coef));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            for (j, coef) in &c.row {
                if *coef != 0.0 {
                    by_col[*j].push((row_name(i), *coef));
                }
            }
        }
        let mut in_integer_run = false;
        let mut marker = 0usize;
        for (j, entries) in by_col.iter().enumerate() {
            let integer = self.variables[j].integer;
            if integer != in_integer_run {
                let kind = if integer { "'INTORG'" } else { "'INTEND'" };
                writeln!(
                    out,
                    "    MARKER{:>22}{:>17}",
                    format!("M{marker:07}"),
                    kind
                )?;
                marker += 1;
                in_integer_run = integer;
            }
            let col = col_name(j);
            for pair in entries.chunks(2) {
                let mut line = format!("    {:<10}{:<10}{:>12}", col, pair[0].0, fmt_num(pair[0].1));
                if let Some(second) = pair.get(1) {
                    line.push_str(&format!("   {:<10}{:>12}", second.0, fmt_num(second.1)));
                }
                writeln!(out, "{line}")?;
            }
            if entries.is_empty() {
                // Keep the column declared so readers see every variable.
                writeln!(out, "    {:<10}{:<10}{:>12}", col, "COST", fmt_num(0.0))?;
            }
        }
        if in_integer_run {
            writeln!(out, "    MARKER{:>22}{:>17}", format!("M{marker:07}"), "'INTEND'")?;
        }

        writeln!(out, "RHS")?;
        if self.objective_constant != 0.0 {
            writeln!(
                out,
                "    RHS       {:<10}{:>12}",
                "COST",
                fmt_num(-self.objective_constant)
            )?;
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.rhs != 0.0 {
                writeln!(
                    out,
                    "    RHS       {:<10}{:>12}",
                    row_name(i),
                    fmt_num(c.rhs)
                )?;
            }
        }

        writeln!(out, "BOUNDS")?;
        for (j, v) in self.variables.iter().enumerate() {
            let col = col_name(j);
            if v.lower != 0.0 {
                writeln!(out, " LO BND       {:<10}{:>12}", col, fmt_num(v.lower))?;
            }
            if v.upper.is_finite() {
                writeln!(out, " UP BND       {:<10}{:>12}", col, fmt_num(v.upper))?;
            }
        }
        writeln!(out, "ENDATA")?;
        Ok(())
    }
}

fn sanitize(name: &str, fallback: &str) -> String {
    let cleaned: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        .collect();
    if cleaned.is_empty() {
        fallback.to_string()
    } else {
        cleaned
    }
}

fn row_name(i: usize) -> String {
    format!("C{i:07}")
}

fn col_name(j: usize) -> String {
    format!("X{j:07}")
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e10 {
        format!("{v}")
    } else {
        format!("{v:.9e}")
    }
}
