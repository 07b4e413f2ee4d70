//! Typed syntax tree for dependency documents.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decimal::Decimal;

/// A parsed document: an ordered list of dependencies. May be empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyModel {
    pub dependencies: Vec<Dependency>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dependency {
    Requires {
        condition: Predicate,
        consequence: Predicate,
    },
    Predefined(PredefinedDependency),
    Relational(RelationalDependency),
    Arithmetic(ArithmeticDependency),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredefinedKind {
    Or,
    OnlyOne,
    AllOrNone,
    ZeroOrOne,
}

impl PredefinedKind {
    pub fn keyword(self) -> &'static str {
        match self {
            PredefinedKind::Or => "Or",
            PredefinedKind::OnlyOne => "OnlyOne",
            PredefinedKind::AllOrNone => "AllOrNone",
            PredefinedKind::ZeroOrOne => "ZeroOrOne",
        }
    }
}

/// `NOT? Kind(P1, P2, ...)`. Each element is a full predicate, so
/// `Or(p1, p3 AND p5)` is representable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredefinedDependency {
    pub kind: PredefinedKind,
    pub negated: bool,
    pub clauses: Vec<Predicate>,
}

/// `left relOp right` between two parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationalDependency {
    pub left: ParamRef,
    pub op: RelOp,
    pub right: ParamRef,
}

/// `operation relOp value`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithmeticDependency {
    pub operation: ArithExpr,
    pub op: RelOp,
    pub value: Decimal,
}

/// A clause optionally followed by `AND`/`OR` and the rest of the chain.
/// The chain is right-recursive, exactly as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub first: Clause,
    pub rest: Option<(Connector, Box<Predicate>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connector {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clause {
    Term(Term),
    Relational(RelationalDependency),
    Arithmetic(ArithmeticDependency),
    Predefined(PredefinedDependency),
    Group {
        negated: bool,
        inner: Box<Predicate>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub negated: bool,
    pub content: TermContent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermContent {
    Param(ParamRef),
    Relation(ParamValueRelation),
}

/// A parameter name. `[owner.percentage]` and `owner.percentage` written in
/// either form refer to the same parameter.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamRef(pub String);

impl ParamRef {
    pub fn new(name: impl Into<String>) -> Self {
        ParamRef(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ParamRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamValueRelation {
    /// `p == 'A'|'B'|...`
    StringIn {
        param: ParamRef,
        values: Vec<String>,
    },
    /// `p LIKE 'pat*'`
    Like { param: ParamRef, pattern: String },
    /// `p == true`
    BoolEq { param: ParamRef, value: bool },
    /// `p relOp 12.5`
    NumCmp {
        param: ParamRef,
        op: RelOp,
        value: Decimal,
    },
}

impl ParamValueRelation {
    pub fn param(&self) -> &ParamRef {
        match self {
            ParamValueRelation::StringIn { param, .. }
            | ParamValueRelation::Like { param, .. }
            | ParamValueRelation::BoolEq { param, .. }
            | ParamValueRelation::NumCmp { param, .. } => param,
        }
    }
}

/// Arithmetic over parameters. Chains associate left-to-right; `Group`
/// records explicit parentheses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithExpr {
    Param(ParamRef),
    Binary {
        left: Box<ArithExpr>,
        op: ArithOp,
        right: Box<ArithExpr>,
    },
    Group(Box<ArithExpr>),
}

impl ArithExpr {
    pub fn binary(left: ArithExpr, op: ArithOp, right: ArithExpr) -> Self {
        ArithExpr::Binary {
            left: Box::new(left),
            op,
            right: Box::new(right),
        }
    }

    /// Parameter leaves in left-to-right order (duplicates kept).
    pub fn leaves(&self) -> Vec<&ParamRef> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a ParamRef>) {
        match self {
            ArithExpr::Param(p) => out.push(p),
            ArithExpr::Binary { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            ArithExpr::Group(inner) => inner.collect_leaves(out),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Gt => ">",
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
        }
    }

    /// Applies the operator to an ordering result.
    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            RelOp::Lt => ord == Less,
            RelOp::Gt => ord == Greater,
            RelOp::Le => ord != Greater,
            RelOp::Ge => ord != Less,
            RelOp::Eq => ord == Equal,
            RelOp::Ne => ord != Equal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

// Construction helpers, mostly for tests and programmatic model building.

impl Predicate {
    pub fn clause(first: Clause) -> Self {
        Predicate { first, rest: None }
    }

    /// Builds a right-recursive chain `c1 conn c2 conn ... cn`.
    pub fn chain(connector: Connector, clauses: Vec<Clause>) -> Self {
        let mut iter = clauses.into_iter().rev();
        let last = iter.next().expect("chain needs at least one clause");
        let mut acc = Predicate::clause(last);
        for c in iter {
            acc = Predicate {
                first: c,
                rest: Some((connector, Box::new(acc))),
            };
        }
        acc
    }

    pub fn param(name: &str) -> Self {
        Predicate::clause(Clause::param(name))
    }
}

impl Clause {
    pub fn param(name: &str) -> Self {
        Clause::Term(Term {
            negated: false,
            content: TermContent::Param(ParamRef::new(name)),
        })
    }

    pub fn relation(rel: ParamValueRelation) -> Self {
        Clause::Term(Term {
            negated: false,
            content: TermContent::Relation(rel),
        })
    }

    pub fn negated(self) -> Self {
        match self {
            Clause::Term(mut t) => {
                t.negated = !t.negated;
                Clause::Term(t)
            }
            Clause::Group { negated, inner } => Clause::Group {
                negated: !negated,
                inner,
            },
            Clause::Predefined(mut p) => {
                p.negated = !p.negated;
                Clause::Predefined(p)
            }
            other => Clause::Group {
                negated: true,
                inner: Box::new(Predicate::clause(other)),
            },
        }
    }
}

/// Visits every parameter reference in a model in source order.
pub fn visit_params<'a>(model: &'a DependencyModel, f: &mut dyn FnMut(&'a ParamRef)) {
    for dep in &model.dependencies {
        visit_dependency(dep, f);
    }
}

pub fn visit_dependency<'a>(dep: &'a Dependency, f: &mut dyn FnMut(&'a ParamRef)) {
    match dep {
        Dependency::Requires {
            condition,
            consequence,
        } => {
            visit_predicate(condition, f);
            visit_predicate(consequence, f);
        }
        Dependency::Predefined(p) => p.clauses.iter().for_each(|c| visit_predicate(c, f)),
        Dependency::Relational(r) => {
            f(&r.left);
            f(&r.right);
        }
        Dependency::Arithmetic(a) => a.operation.leaves().into_iter().for_each(f),
    }
}

pub fn visit_predicate<'a>(pred: &'a Predicate, f: &mut dyn FnMut(&'a ParamRef)) {
    let mut cur = Some(pred);
    while let Some(p) = cur {
        match &p.first {
            Clause::Term(t) => match &t.content {
                TermContent::Param(r) => f(r),
                TermContent::Relation(rel) => f(rel.param()),
            },
            Clause::Relational(r) => {
                f(&r.left);
                f(&r.right);
            }
            Clause::Arithmetic(a) => {
                for p in a.operation.leaves() {
                    f(p);
                }
            }
            Clause::Predefined(d) => d.clauses.iter().for_each(|c| visit_predicate(c, f)),
            Clause::Group { inner, .. } => visit_predicate(inner, f),
        }
        cur = p.rest.as_ref().map(|(_, r)| r.as_ref());
    }
}

impl DependencyModel {
    pub fn new(dependencies: Vec<Dependency>) -> Self {
        DependencyModel { dependencies }
    }

    pub fn is_empty(&self) -> bool {
        self.dependencies.is_empty()
    }

    /// Distinct parameter names in order of first appearance.
    pub fn referenced_params(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        visit_params(self, &mut |p| {
            if !seen.iter().any(|s| s == p.name()) {
                seen.push(p.name().to_string());
            }
        });
        seen
    }
}
