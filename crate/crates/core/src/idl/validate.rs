//! Structural restrictions the grammar alone does not enforce.

use std::fmt;

use serde::Serialize;

use super::ast::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Predefined dependencies cannot contain `NOT` inside their parentheses.
    NegatedElementInPredefined,
    PredefinedArity,
    ArithmeticArity,
    EmptyStringSet,
    /// Empty names, or names containing `]`, cannot be written down.
    UnrepresentableParameterName,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::NegatedElementInPredefined => "negated-element-in-predefined",
            Rule::PredefinedArity => "predefined-arity",
            Rule::ArithmeticArity => "arithmetic-arity",
            Rule::EmptyStringSet => "empty-string-set",
            Rule::UnrepresentableParameterName => "unrepresentable-parameter-name",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: Rule,
    /// Zero-based index of the offending dependency.
    pub dependency: usize,
    /// Source line of the dependency, when the model came from text.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: [{}] {}", self.rule, self.message),
            None => write!(
                f,
                "dependency {}: [{}] {}",
                self.dependency + 1,
                self.rule,
                self.message
            ),
        }
    }
}

/// Checks every restriction; an empty result means the model is valid.
pub fn validate_model(model: &DependencyModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, dep) in model.dependencies.iter().enumerate() {
        let mut v = Validator {
            dep: i,
            out: &mut out,
        };
        v.dependency(dep);
    }
    out
}

struct Validator<'a> {
    dep: usize,
    out: &'a mut Vec<Diagnostic>,
}

impl Validator<'_> {
    fn report(&mut self, rule: Rule, message: String) {
        self.out.push(Diagnostic {
            rule,
            dependency: self.dep,
            line: None,
            message,
        });
    }

    fn dependency(&mut self, dep: &Dependency) {
        match dep {
            Dependency::Requires {
                condition,
                consequence,
            } => {
                self.predicate(condition, false);
                self.predicate(consequence, false);
            }
            Dependency::Predefined(p) => self.predefined(p),
            Dependency::Relational(r) => self.relational(r),
            Dependency::Arithmetic(a) => self.arithmetic(a),
        }
    }

    fn param(&mut self, p: &ParamRef) {
        if p.name().is_empty() || p.name().contains(']') || p.name().contains('\n') {
            self.report(
                Rule::UnrepresentableParameterName,
                format!(
                    "parameter name `{}` cannot be written in a document",
                    p.name()
                ),
            );
        }
    }

    fn relational(&mut self, r: &RelationalDependency) {
        self.param(&r.left);
        self.param(&r.right);
    }

    fn arithmetic(&mut self, a: &ArithmeticDependency) {
        let leaves = a.operation.leaves();
        if leaves.len() < 2 {
            self.report(
                Rule::ArithmeticArity,
                "arithmetic dependencies relate at least two parameters".into(),
            );
        }
        for p in leaves {
            self.param(p);
        }
    }

    fn predefined(&mut self, p: &PredefinedDependency) {
        if p.clauses.len() < 2 {
            self.report(
                Rule::PredefinedArity,
                format!(
                    "{} needs at least two elements, found {}",
                    p.kind.keyword(),
                    p.clauses.len()
                ),
            );
        }
        for c in &p.clauses {
            self.predicate(c, true);
        }
    }

    /// `inside_predefined` is set while walking the elements of a predefined
    /// dependency; any negated term or group there is reported.
    fn predicate(&mut self, pred: &Predicate, inside_predefined: bool) {
        let mut cur = Some(pred);
        while let Some(p) = cur {
            self.clause(&p.first, inside_predefined);
            cur = p.rest.as_ref().map(|(_, r)| r.as_ref());
        }
    }

    fn clause(&mut self, clause: &Clause, inside_predefined: bool) {
        match clause {
            Clause::Term(t) => {
                if t.negated && inside_predefined {
                    self.report(
                        Rule::NegatedElementInPredefined,
                        "predefined dependencies cannot contain negated terms".into(),
                    );
                }
                match &t.content {
                    TermContent::Param(p) => self.param(p),
                    TermContent::Relation(rel) => {
                        self.param(rel.param());
                        if let ParamValueRelation::StringIn { values, .. } = rel {
                            if values.is_empty() {
                                self.report(
                                    Rule::EmptyStringSet,
                                    "`==` needs at least one string".into(),
                                );
                            }
                        }
                    }
                }
            }
            Clause::Group { negated, inner } => {
                if *negated && inside_predefined {
                    self.report(
                        Rule::NegatedElementInPredefined,
                        "predefined dependencies cannot contain negated groups".into(),
                    );
                }
                self.predicate(inner, inside_predefined);
            }
            Clause::Relational(r) => self.relational(r),
            Clause::Arithmetic(a) => self.arithmetic(a),
            Clause::Predefined(p) => self.predefined(p),
        }
    }
}
