//! Finite-domain constraint satisfaction problems and their solver.

mod expr;
mod solver;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::value::Value;

pub use expr::{eval_constraint, ArithTerm, ConstraintExpr};
pub use solver::{count_solutions, solve, solve_all, solve_with_rng, Solver};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CspError {
    #[error("variable `{0}` has an infinite domain and cannot be enumerated")]
    InfiniteDomain(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{var}`: {value} does not fit its domain type")]
    TypeMismatch { var: String, value: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Ordered, duplicate-free values.
    Finite(Vec<Value>),
    /// All numbers; only solvable once pinned to a single value.
    Continuous,
}

impl Domain {
    pub fn booleans() -> Self {
        Domain::Finite(vec![Value::Bool(false), Value::Bool(true)])
    }

    pub fn first(&self) -> Option<&Value> {
        match self {
            Domain::Finite(v) => v.first(),
            Domain::Continuous => None,
        }
    }

    fn admits_kind(&self, value: &Value) -> bool {
        match self {
            Domain::Continuous => value.is_numeric(),
            Domain::Finite(values) => match values.first() {
                None => true,
                Some(v) => {
                    std::mem::discriminant(v) == std::mem::discriminant(value)
                        || (v.is_numeric() && value.is_numeric())
                }
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspVar {
    pub name: String,
    pub domain: Domain,
}

impl CspVar {
    pub fn new(name: impl Into<String>, domain: Domain) -> Self {
        CspVar {
            name: name.into(),
            domain,
        }
    }
}

/// Variables, their domains, and constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CspProblem {
    pub vars: Vec<CspVar>,
    pub constraints: Vec<ConstraintExpr>,
}

impl CspProblem {
    pub fn var(&self, name: &str) -> Option<&CspVar> {
        self.vars.iter().find(|v| v.name == name)
    }

    /// Size of the cartesian product of the domains, `None` if any is
    /// continuous or it overflows.
    pub fn search_space(&self) -> Option<u128> {
        self.vars.iter().try_fold(1u128, |acc, v| match &v.domain {
            Domain::Finite(vals) => acc.checked_mul(vals.len() as u128),
            Domain::Continuous => None,
        })
    }
}

/// A satisfying total assignment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Solution {
    pub assignment: BTreeMap<String, Value>,
}

impl Solution {
    pub fn get(&self, var: &str) -> Option<&Value> {
        self.assignment.get(var)
    }
}

/// Returns `csp` with one `var == value` constraint per binding. Values
/// missing from a finite domain are appended to it first.
pub fn filter_csp(csp: &CspProblem, bindings: &[(String, Value)]) -> Result<CspProblem, CspError> {
    let mut out = csp.clone();
    for (name, value) in bindings {
        let var = out
            .vars
            .iter_mut()
            .find(|v| &v.name == name)
            .ok_or_else(|| CspError::UnknownVariable(name.clone()))?;
        if !var.domain.admits_kind(value) {
            return Err(CspError::TypeMismatch {
                var: name.clone(),
                value: value.to_string(),
            });
        }
        if let Domain::Finite(values) = &mut var.domain {
            if !values.iter().any(|v| v.sem_eq(value)) {
                values.push(value.clone());
            }
        }
        out.constraints
            .push(ConstraintExpr::eq(name, value.clone()));
    }
    Ok(out)
}
