use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::rational::BigRational;
use num::Zero;

use crate::decimal::Decimal;
use crate::idl::{quote, ArithOp, RelOp};
use crate::like::like_matches;
use crate::value::Value;

/// A constraint over named CSP variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintExpr {
    Const(bool),
    Not(Box<ConstraintExpr>),
    And(Vec<ConstraintExpr>),
    Or(Vec<ConstraintExpr>),
    Implies(Box<ConstraintExpr>, Box<ConstraintExpr>),
    /// `var op value`
    Cmp {
        var: String,
        op: RelOp,
        value: Value,
    },
    /// `left op right`
    CmpVars {
        left: String,
        op: RelOp,
        right: String,
    },
    /// Wildcard match of a string variable.
    Like {
        var: String,
        pattern: String,
    },
    /// `expr op value` in exact rational arithmetic; false on division by zero.
    Arith {
        expr: ArithTerm,
        op: RelOp,
        value: Decimal,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithTerm {
    Var(String),
    Binary(Box<ArithTerm>, ArithOp, Box<ArithTerm>),
}

impl ArithTerm {
    pub fn eval(&self, lookup: &dyn Fn(&str) -> Option<BigRational>) -> Option<BigRational> {
        match self {
            ArithTerm::Var(v) => lookup(v),
            ArithTerm::Binary(l, op, r) => {
                let (l, r) = (l.eval(lookup)?, r.eval(lookup)?);
                Some(match op {
                    ArithOp::Add => l + r,
                    ArithOp::Sub => l - r,
                    ArithOp::Mul => l * r,
                    ArithOp::Div => {
                        if r.is_zero() {
                            return None;
                        }
                        l / r
                    }
                })
            }
        }
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ArithTerm::Var(v) => {
                out.insert(v);
            }
            ArithTerm::Binary(l, _, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

// Shorthand constructors used by the mapping and by tests.
impl ConstraintExpr {
    pub fn negate(e: ConstraintExpr) -> Self {
        ConstraintExpr::Not(Box::new(e))
    }

    pub fn implies(a: ConstraintExpr, b: ConstraintExpr) -> Self {
        ConstraintExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn eq(var: &str, value: impl Into<Value>) -> Self {
        ConstraintExpr::Cmp {
            var: var.to_string(),
            op: RelOp::Eq,
            value: value.into(),
        }
    }

    /// `var == true`
    pub fn is_true(var: &str) -> Self {
        ConstraintExpr::eq(var, true)
    }

    /// Variables mentioned anywhere in the expression.
    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            ConstraintExpr::Const(_) => {}
            ConstraintExpr::Not(e) => e.collect_vars(out),
            ConstraintExpr::And(es) | ConstraintExpr::Or(es) => {
                es.iter().for_each(|e| e.collect_vars(out))
            }
            ConstraintExpr::Implies(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            ConstraintExpr::Cmp { var, .. } | ConstraintExpr::Like { var, .. } => {
                out.insert(var);
            }
            ConstraintExpr::CmpVars { left, right, .. } => {
                out.insert(left);
                out.insert(right);
            }
            ConstraintExpr::Arith { expr, .. } => expr.collect_vars(out),
        }
    }

    /// Evaluates under a total assignment. An atom whose variable is missing
    /// is false.
    pub fn eval(&self, assignment: &BTreeMap<String, Value>) -> bool {
        match self {
            ConstraintExpr::Const(b) => *b,
            ConstraintExpr::Not(e) => !e.eval(assignment),
            ConstraintExpr::And(es) => es.iter().all(|e| e.eval(assignment)),
            ConstraintExpr::Or(es) => es.iter().any(|e| e.eval(assignment)),
            ConstraintExpr::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
            ConstraintExpr::Cmp { var, op, value } => {
                assignment.get(var).is_some_and(|v| v.satisfies(*op, value))
            }
            ConstraintExpr::CmpVars { left, op, right } => {
                match (assignment.get(left), assignment.get(right)) {
                    (Some(l), Some(r)) => l.satisfies(*op, r),
                    _ => false,
                }
            }
            ConstraintExpr::Like { var, pattern } => {
                matches!(assignment.get(var), Some(Value::Str(s)) if like_matches(pattern, s))
            }
            ConstraintExpr::Arith { expr, op, value } => {
                let lookup = |v: &str| assignment.get(v).and_then(Value::as_rational);
                match expr.eval(&lookup) {
                    Some(lhs) => op.holds(lhs.cmp(&value.to_rational())),
                    None => false,
                }
            }
        }
    }
}

/// `evalConstraint`: standard semantics under a total assignment.
pub fn eval_constraint(c: &ConstraintExpr, assignment: &BTreeMap<String, Value>) -> bool {
    c.eval(assignment)
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Str(s) => quote(s),
        other => other.to_string(),
    }
}

impl fmt::Display for ArithTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithTerm::Var(v) => f.write_str(v),
            ArithTerm::Binary(l, op, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// Infix rendering in the style `(aSet==true ⟹ ¬bSet==true)`.
impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, es: &[ConstraintExpr], sep: &str, empty: &str| {
            if es.is_empty() {
                return f.write_str(empty);
            }
            f.write_str("(")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        };
        match self {
            ConstraintExpr::Const(b) => write!(f, "{b}"),
            ConstraintExpr::Not(e) => write!(f, "¬{e}"),
            ConstraintExpr::And(es) => join(f, es, " AND ", "true"),
            ConstraintExpr::Or(es) => join(f, es, " OR ", "false"),
            ConstraintExpr::Implies(a, b) => write!(f, "({a} ⟹ {b})"),
            ConstraintExpr::Cmp { var, op, value } => {
                write!(f, "{var}{}{}", op.symbol(), fmt_value(value))
            }
            ConstraintExpr::CmpVars { left, op, right } => {
                write!(f, "({left} {} {right})", op.symbol())
            }
            ConstraintExpr::Like { var, pattern } => write!(f, "{var} LIKE {}", quote(pattern)),
            ConstraintExpr::Arith { expr, op, value } => {
                write!(f, "({expr} {} {value})", op.symbol())
            }
        }
    }
}
