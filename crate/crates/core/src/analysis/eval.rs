//! Direct evaluation of dependencies against a request, without going
//! through the CSP. Used for brute-force cross-checks and for reporting
//! which dependencies a request breaks.

use std::collections::BTreeSet;

use num::rational::BigRational;
use num::Zero;

use crate::idl::{
    ArithExpr, ArithOp, ArithmeticDependency, Clause, Connector, Dependency, ParamValueRelation,
    PredefinedDependency, PredefinedKind, Predicate, RelationalDependency, Term, TermContent,
};
use crate::like::like_matches;
use crate::mapping::OnlyOneSemantics;
use crate::model::{build_domains, OperationSpec, Request};
use crate::value::Value;

use super::AnalysisError;
use crate::csp::CspError;

/// Whether `r` satisfies `dep`.
pub fn dependency_holds(dep: &Dependency, r: &Request, semantics: OnlyOneSemantics) -> bool {
    Evaluator { r, semantics }.dependency(dep)
}

/// Indices of the dependencies of `spec` that `r` violates. Required
/// parameters are not dependencies and are not reported here.
pub fn violated_dependencies(
    spec: &OperationSpec,
    r: &Request,
    semantics: OnlyOneSemantics,
) -> Vec<usize> {
    let ev = Evaluator { r, semantics };
    spec.model
        .dependencies
        .iter()
        .enumerate()
        .filter(|(_, d)| !ev.dependency(d))
        .map(|(i, _)| i)
        .collect()
}

/// `oracleAllRequests`: every combination of absent/present-with-value per
/// parameter that sends all required parameters and satisfies every
/// dependency under direct evaluation. Open domains are built with the
/// default window first.
pub fn oracle_all_requests(
    spec: &OperationSpec,
    semantics: OnlyOneSemantics,
) -> Result<BTreeSet<Request>, AnalysisError> {
    let built = build_domains(spec, Default::default());
    let mut choices: Vec<(&str, Vec<Option<Value>>)> = Vec::new();
    for p in &built.parameters {
        let values = p
            .domain
            .values()
            .ok_or_else(|| AnalysisError::Csp(CspError::InfiniteDomain(p.name.clone())))?;
        let mut opts: Vec<Option<Value>> = if p.required { Vec::new() } else { vec![None] };
        opts.extend(values.into_iter().map(Some));
        choices.push((&p.name, opts));
    }

    let mut out = BTreeSet::new();
    let mut current = Request::new();
    enumerate(&built, &choices, 0, &mut current, semantics, &mut out);
    Ok(out)
}

fn enumerate(
    spec: &OperationSpec,
    choices: &[(&str, Vec<Option<Value>>)],
    i: usize,
    current: &mut Request,
    semantics: OnlyOneSemantics,
    out: &mut BTreeSet<Request>,
) {
    if i == choices.len() {
        if spec
            .model
            .dependencies
            .iter()
            .all(|d| dependency_holds(d, current, semantics))
        {
            out.insert(current.clone());
        }
        return;
    }
    let (name, opts) = &choices[i];
    for opt in opts {
        match opt {
            Some(v) => {
                current.bindings.insert(name.to_string(), v.clone());
            }
            None => {
                current.bindings.remove(*name);
            }
        }
        enumerate(spec, choices, i + 1, current, semantics, out);
    }
    current.bindings.remove(*name);
}

struct Evaluator<'a> {
    r: &'a Request,
    semantics: OnlyOneSemantics,
}

impl Evaluator<'_> {
    fn dependency(&self, d: &Dependency) -> bool {
        match d {
            Dependency::Requires {
                condition,
                consequence,
            } => !self.predicate(condition) || self.predicate(consequence),
            Dependency::Predefined(p) => self.predefined(p),
            Dependency::Relational(r) => self.relational(r),
            Dependency::Arithmetic(a) => self.arithmetic(a),
        }
    }

    fn predicate(&self, p: &Predicate) -> bool {
        let first = self.clause(&p.first);
        match &p.rest {
            None => first,
            Some((Connector::And, rest)) => first && self.predicate(rest),
            Some((Connector::Or, rest)) => first || self.predicate(rest),
        }
    }

    fn clause(&self, c: &Clause) -> bool {
        match c {
            Clause::Term(t) => self.term(t),
            Clause::Relational(r) => self.relational(r),
            Clause::Arithmetic(a) => self.arithmetic(a),
            Clause::Predefined(p) => self.predefined(p),
            Clause::Group { negated, inner } => self.predicate(inner) != *negated,
        }
    }

    fn term(&self, t: &Term) -> bool {
        let holds = match &t.content {
            TermContent::Param(p) => self.r.contains(p.name()),
            TermContent::Relation(rel) => match (rel, self.r.get(rel.param().name())) {
                (_, None) => false,
                (ParamValueRelation::StringIn { values, .. }, Some(Value::Str(s))) => {
                    values.contains(s)
                }
                (ParamValueRelation::Like { pattern, .. }, Some(Value::Str(s))) => {
                    like_matches(pattern, s)
                }
                (ParamValueRelation::BoolEq { value, .. }, Some(Value::Bool(b))) => value == b,
                (ParamValueRelation::NumCmp { op, value, .. }, Some(v)) => match v.as_rational() {
                    Some(x) => op.holds(x.cmp(&value.to_rational())),
                    None => false,
                },
                _ => false,
            },
        };
        holds != t.negated
    }

    fn predefined(&self, d: &PredefinedDependency) -> bool {
        let n = d.clauses.len();
        let k = d.clauses.iter().filter(|c| self.predicate(c)).count();
        let holds = match d.kind {
            PredefinedKind::Or => k >= 1,
            PredefinedKind::OnlyOne => match self.semantics {
                OnlyOneSemantics::Exact => k == 1,
                OnlyOneSemantics::AtMostOne => k <= 1,
            },
            PredefinedKind::AllOrNone => k == 0 || k == n,
            PredefinedKind::ZeroOrOne => k <= 1,
        };
        holds != d.negated
    }

    fn relational(&self, r: &RelationalDependency) -> bool {
        match (self.r.get(r.left.name()), self.r.get(r.right.name())) {
            (Some(a), Some(b)) => a.satisfies(r.op, b),
            _ => true,
        }
    }

    fn arithmetic(&self, a: &ArithmeticDependency) -> bool {
        if a.operation
            .leaves()
            .iter()
            .any(|p| !self.r.contains(p.name()))
        {
            return true;
        }
        match self.arith(&a.operation) {
            Some(v) => a.op.holds(v.cmp(&a.value.to_rational())),
            None => false,
        }
    }

    fn arith(&self, e: &ArithExpr) -> Option<BigRational> {
        match e {
            ArithExpr::Param(p) => self.r.get(p.name())?.as_rational(),
            ArithExpr::Group(inner) => self.arith(inner),
            ArithExpr::Binary { left, op, right } => {
                let (l, r) = (self.arith(left)?, self.arith(right)?);
                match op {
                    ArithOp::Add => Some(l + r),
                    ArithOp::Sub => Some(l - r),
                    ArithOp::Mul => Some(l * r),
                    ArithOp::Div if r.is_zero() => None,
                    ArithOp::Div => Some(l / r),
                }
            }
        }
    }
}
