//! Compilation of an operation's dependencies into a [`CspProblem`].
//!
//! Each parameter `p` becomes two variables: `p` over its domain and the
//! Boolean `pSet` telling whether the request includes it. A bare parameter
//! in a predicate means `pSet == true`; a value relation additionally
//! constrains `p`. Relational and arithmetic dependencies only apply when
//! every parameter they mention is present.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::csp::{ArithTerm, ConstraintExpr, CspProblem, CspVar, Domain};
use crate::idl::{
    render_dependency, ArithExpr, ArithmeticDependency, Clause, Connector, Dependency,
    ParamValueRelation, PredefinedDependency, PredefinedKind, Predicate, RelationalDependency,
    Term, TermContent,
};
use crate::model::{build_domains, IntWindow, OperationSpec, ParamDomain};
use crate::value::Value;

/// How `OnlyOne(P1, ..., Pn)` is encoded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnlyOneSemantics {
    /// Exactly one element holds: pairwise exclusion plus a disjunction.
    #[default]
    Exact,
    /// Pairwise exclusion only; no element holding is also accepted.
    AtMostOne,
}

/// Names of the two CSP variables of a parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamVars {
    pub value: String,
    pub presence: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappedSpec {
    pub csp: CspProblem,
    pub param_index: BTreeMap<String, ParamVars>,
    /// Source text of each constraint, aligned with `csp.constraints`.
    pub sources: Vec<String>,
    /// Domain description of each variable, aligned with `csp.vars`.
    pub domain_labels: Vec<String>,
}

impl MappedSpec {
    pub fn presence_var(&self, param: &str) -> Option<&str> {
        self.param_index.get(param).map(|v| v.presence.as_str())
    }

    pub fn value_var(&self, param: &str) -> Option<&str> {
        self.param_index.get(param).map(|v| v.value.as_str())
    }
}

/// `mapSpec`. Parameters whose domains are still open are first given finite
/// stand-ins with the default integer window.
pub fn map_spec(spec: &OperationSpec, semantics: OnlyOneSemantics) -> MappedSpec {
    let built;
    let spec = if spec.parameters.iter().any(|p| {
        matches!(
            p.domain,
            ParamDomain::OpenString | ParamDomain::OpenInt { .. }
        )
    }) {
        built = build_domains(spec, IntWindow::default());
        &built
    } else {
        spec
    };

    let mut index = BTreeMap::new();
    let mut vars = Vec::new();
    let mut domain_labels = Vec::new();
    for p in &spec.parameters {
        let mut presence = format!("{}Set", p.name);
        while spec.param(&presence).is_some() {
            presence.push('\'');
        }
        let domain = match p.domain.values() {
            Some(values) => Domain::Finite(values),
            None => Domain::Continuous,
        };
        vars.push(CspVar::new(p.name.clone(), domain));
        domain_labels.push(p.domain.describe());
        vars.push(CspVar::new(presence.clone(), Domain::booleans()));
        domain_labels.push("Boolean".to_string());
        index.insert(
            p.name.clone(),
            ParamVars {
                value: p.name.clone(),
                presence,
            },
        );
    }

    let mapper = Mapper {
        index: &index,
        semantics,
    };
    let mut constraints = Vec::new();
    let mut sources = Vec::new();
    for dep in &spec.model.dependencies {
        constraints.push(mapper.dependency(dep));
        sources.push(format!("{};", render_dependency(dep)));
    }
    for p in spec.parameters.iter().filter(|p| p.required) {
        constraints.push(ConstraintExpr::is_true(&index[&p.name].presence));
        sources.push(format!("required {}", p.name));
    }

    MappedSpec {
        csp: CspProblem { vars, constraints },
        param_index: index,
        sources,
        domain_labels,
    }
}

/// Translates dependency syntax into constraints over already-created
/// variables. Every referenced parameter must be in `index`.
pub struct Mapper<'a> {
    pub index: &'a BTreeMap<String, ParamVars>,
    pub semantics: OnlyOneSemantics,
}

impl Mapper<'_> {
    fn vars(&self, name: &str) -> &ParamVars {
        self.index
            .get(name)
            .unwrap_or_else(|| panic!("parameter `{name}` is not declared"))
    }

    fn set(&self, name: &str) -> ConstraintExpr {
        ConstraintExpr::is_true(&self.vars(name).presence)
    }

    /// `mapTerm`
    pub fn term(&self, t: &Term) -> ConstraintExpr {
        let expr = match &t.content {
            TermContent::Param(p) => self.set(p.name()),
            TermContent::Relation(rel) => {
                let name = rel.param().name();
                let var = self.vars(name).value.clone();
                let atom = match rel {
                    ParamValueRelation::StringIn { values, .. } => {
                        let mut eqs: Vec<ConstraintExpr> = values
                            .iter()
                            .map(|v| ConstraintExpr::eq(&var, Value::Str(v.clone())))
                            .collect();
                        if eqs.len() == 1 {
                            eqs.pop().unwrap()
                        } else {
                            ConstraintExpr::Or(eqs)
                        }
                    }
                    ParamValueRelation::Like { pattern, .. } => ConstraintExpr::Like {
                        var,
                        pattern: pattern.clone(),
                    },
                    ParamValueRelation::BoolEq { value, .. } => ConstraintExpr::eq(&var, *value),
                    ParamValueRelation::NumCmp { op, value, .. } => ConstraintExpr::Cmp {
                        var,
                        op: *op,
                        value: Value::from_decimal(value),
                    },
                };
                ConstraintExpr::And(vec![self.set(name), atom])
            }
        };
        if t.negated {
            ConstraintExpr::negate(expr)
        } else {
            expr
        }
    }

    /// `mapPredicate`. Runs of the same connector are flattened, which the
    /// right-recursive chain makes semantically neutral.
    pub fn predicate(&self, p: &Predicate) -> ConstraintExpr {
        let first = self.clause(&p.first);
        let Some((conn, rest)) = &p.rest else {
            return first;
        };
        let mut items = vec![first];
        let mut cur: &Predicate = rest;
        loop {
            match &cur.rest {
                Some((c, next)) if c == conn => {
                    items.push(self.clause(&cur.first));
                    cur = next;
                }
                _ => {
                    items.push(self.predicate(cur));
                    break;
                }
            }
        }
        match conn {
            Connector::And => ConstraintExpr::And(items),
            Connector::Or => ConstraintExpr::Or(items),
        }
    }

    fn clause(&self, c: &Clause) -> ConstraintExpr {
        match c {
            Clause::Term(t) => self.term(t),
            Clause::Relational(r) => self.relational(r),
            Clause::Arithmetic(a) => self.arithmetic(a),
            Clause::Predefined(d) => self.predefined(d),
            Clause::Group { negated, inner } => {
                let e = self.predicate(inner);
                if *negated {
                    ConstraintExpr::negate(e)
                } else {
                    e
                }
            }
        }
    }

    /// `mapDependency`
    pub fn dependency(&self, d: &Dependency) -> ConstraintExpr {
        match d {
            Dependency::Requires {
                condition,
                consequence,
            } => ConstraintExpr::implies(self.predicate(condition), self.predicate(consequence)),
            Dependency::Predefined(p) => self.predefined(p),
            Dependency::Relational(r) => self.relational(r),
            Dependency::Arithmetic(a) => self.arithmetic(a),
        }
    }

    fn predefined(&self, d: &PredefinedDependency) -> ConstraintExpr {
        let elems: Vec<ConstraintExpr> = d.clauses.iter().map(|c| self.predicate(c)).collect();
        let expr = match d.kind {
            PredefinedKind::Or => ConstraintExpr::Or(elems),
            PredefinedKind::OnlyOne => self.only_one(&elems),
            PredefinedKind::AllOrNone => {
                let mut conj = Vec::new();
                for_pairs(elems.len(), |i, j| {
                    conj.push(ConstraintExpr::implies(elems[i].clone(), elems[j].clone()))
                });
                for_pairs(elems.len(), |i, j| {
                    conj.push(ConstraintExpr::implies(
                        ConstraintExpr::negate(elems[i].clone()),
                        ConstraintExpr::negate(elems[j].clone()),
                    ))
                });
                ConstraintExpr::And(conj)
            }
            PredefinedKind::ZeroOrOne => {
                let none = elems.iter().cloned().map(ConstraintExpr::negate).collect();
                ConstraintExpr::Or(vec![self.only_one(&elems), ConstraintExpr::And(none)])
            }
        };
        if d.negated {
            ConstraintExpr::negate(expr)
        } else {
            expr
        }
    }

    fn only_one(&self, elems: &[ConstraintExpr]) -> ConstraintExpr {
        let mut conj = Vec::new();
        for_pairs(elems.len(), |i, j| {
            conj.push(ConstraintExpr::implies(
                elems[i].clone(),
                ConstraintExpr::negate(elems[j].clone()),
            ))
        });
        if self.semantics == OnlyOneSemantics::Exact {
            conj.push(ConstraintExpr::Or(elems.to_vec()));
        }
        ConstraintExpr::And(conj)
    }

    fn relational(&self, r: &RelationalDependency) -> ConstraintExpr {
        ConstraintExpr::implies(
            ConstraintExpr::And(vec![self.set(r.left.name()), self.set(r.right.name())]),
            ConstraintExpr::CmpVars {
                left: self.vars(r.left.name()).value.clone(),
                op: r.op,
                right: self.vars(r.right.name()).value.clone(),
            },
        )
    }

    fn arithmetic(&self, a: &ArithmeticDependency) -> ConstraintExpr {
        let mut guard: Vec<ConstraintExpr> = Vec::new();
        for leaf in a.operation.leaves() {
            let set = self.set(leaf.name());
            if !guard.contains(&set) {
                guard.push(set);
            }
        }
        ConstraintExpr::implies(
            ConstraintExpr::And(guard),
            ConstraintExpr::Arith {
                expr: self.arith_term(&a.operation),
                op: a.op,
                value: a.value.clone(),
            },
        )
    }

    fn arith_term(&self, e: &ArithExpr) -> ArithTerm {
        match e {
            ArithExpr::Param(p) => ArithTerm::Var(self.vars(p.name()).value.clone()),
            ArithExpr::Binary { left, op, right } => ArithTerm::Binary(
                Box::new(self.arith_term(left)),
                *op,
                Box::new(self.arith_term(right)),
            ),
            ArithExpr::Group(inner) => self.arith_term(inner),
        }
    }
}

/// Ordered pairs `(i, j)` with `i != j`, `i` major.
fn for_pairs(n: usize, mut f: impl FnMut(usize, usize)) {
    for i in 0..n {
        for j in 0..n {
            if i != j {
                f(i, j);
            }
        }
    }
}

/// Human-readable dump with `V`, `D` and `C` sections. Each constraint is
/// preceded by a `//` comment giving the dependency it came from.
pub fn render_csp(m: &MappedSpec) -> String {
    let mut out = String::new();
    let names: Vec<&str> = m.csp.vars.iter().map(|v| v.name.as_str()).collect();
    let _ = writeln!(out, "V = {{ {} }}", names.join(", "));
    let domains: Vec<String> = names
        .iter()
        .zip(&m.domain_labels)
        .map(|(n, d)| format!("{n}: {d}"))
        .collect();
    let _ = writeln!(out, "D = {{ {} }}", domains.join(", "));
    if m.csp.constraints.is_empty() {
        out.push_str("C = { }\n");
        return out;
    }
    out.push_str("C = {\n");
    let last = m.csp.constraints.len() - 1;
    for (i, (c, src)) in m.csp.constraints.iter().zip(&m.sources).enumerate() {
        let _ = writeln!(out, "  //{src}");
        let _ = writeln!(out, "  {c}{}", if i < last { " AND" } else { "" });
    }
    out.push_str("}\n");
    out
}
