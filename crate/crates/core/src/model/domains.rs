//! Finite stand-ins for open string and unbounded integer domains.

use std::collections::BTreeSet;

use crate::decimal::Decimal;
use crate::idl::{
    ArithmeticDependency, Clause, Dependency, DependencyModel, ParamValueRelation, Predicate,
    TermContent,
};
use crate::like::{like_matches, like_witness};

use super::{OperationSpec, ParamDomain};

/// Stands for "any string not mentioned in the model".
pub const SENTINEL: &str = "⊥other";

/// How unbounded integers are clipped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntWindow {
    /// `[min(c) - margin, max(c) + margin]` over the integer constants `c`
    /// mentioned for the parameter, or `default` when there are none.
    Around { margin: i64, default: (i64, i64) },
    /// The same window for every unbounded integer.
    Fixed { lo: i64, hi: i64 },
}

impl Default for IntWindow {
    fn default() -> Self {
        IntWindow::Around {
            margin: 100,
            default: (0, 100),
        }
    }
}

/// Replaces every `OpenString` and `OpenInt` domain with a finite one.
/// Finite domains and `Continuous` are left as they are.
pub fn build_domains(spec: &OperationSpec, window: IntWindow) -> OperationSpec {
    let mut out = spec.clone();
    for param in &mut out.parameters {
        match &param.domain {
            ParamDomain::OpenString => {
                param.domain = ParamDomain::EnumString {
                    values: string_domain(&spec.model, &param.name),
                };
            }
            ParamDomain::OpenInt { min, max } => {
                let (lo, hi) = int_window(&spec.model, &param.name, *min, *max, window);
                param.domain = ParamDomain::IntRange { min: lo, max: hi };
            }
            _ => {}
        }
    }
    out
}

fn string_domain(model: &DependencyModel, name: &str) -> Vec<String> {
    let mut constants: Vec<String> = Vec::new();
    let mut patterns: Vec<String> = Vec::new();
    for_each_relation(model, &mut |rel| match rel {
        ParamValueRelation::StringIn { param, values } if param.name() == name => {
            for v in values {
                if !constants.contains(v) {
                    constants.push(v.clone());
                }
            }
        }
        ParamValueRelation::Like { param, pattern }
            if param.name() == name && !patterns.contains(pattern) =>
        {
            patterns.push(pattern.clone());
        }
        _ => {}
    });

    let mut values = constants.clone();
    for pattern in &patterns {
        let mut witness = like_witness(pattern);
        while constants.contains(&witness) {
            witness.push('z');
        }
        if !values.contains(&witness) {
            values.push(witness);
        }
    }
    // A pattern made only of `*` matches everything; then no sentinel can
    // avoid it and the first candidate is kept.
    let mut sentinel = SENTINEL.to_string();
    for _ in 0..8 {
        let clashes =
            values.contains(&sentinel) || patterns.iter().any(|p| like_matches(p, &sentinel));
        if !clashes {
            break;
        }
        sentinel.push('\'');
    }
    if !values.contains(&sentinel) {
        values.push(sentinel);
    }
    values
}

fn int_window(
    model: &DependencyModel,
    name: &str,
    min: Option<i64>,
    max: Option<i64>,
    window: IntWindow,
) -> (i64, i64) {
    let (clo, chi) = match window {
        IntWindow::Fixed { lo, hi } => (lo, hi),
        IntWindow::Around { margin, default } => {
            let constants = int_constants(model, name);
            match (constants.first(), constants.last()) {
                (Some(&lo), Some(&hi)) => (lo.saturating_sub(margin), hi.saturating_add(margin)),
                _ => default,
            }
        }
    };
    let width = chi.saturating_sub(clo);
    match (min, max) {
        (Some(lo), Some(hi)) => (lo, hi),
        (Some(lo), None) => (
            lo,
            if chi >= lo {
                chi
            } else {
                lo.saturating_add(width)
            },
        ),
        (None, Some(hi)) => (
            if clo <= hi {
                clo
            } else {
                hi.saturating_sub(width)
            },
            hi,
        ),
        (None, None) => (clo, chi),
    }
}

/// Integer constants compared against `name`, including arithmetic bounds
/// of dependencies that mention it. Non-integral constants contribute their
/// floor and ceiling.
fn int_constants(model: &DependencyModel, name: &str) -> Vec<i64> {
    let mut values: Vec<Decimal> = Vec::new();
    for_each_arith(model, &mut |a| {
        if a.operation.leaves().iter().any(|p| p.name() == name) {
            values.push(a.value.clone());
        }
    });
    for_each_relation(model, &mut |rel| {
        if let ParamValueRelation::NumCmp { param, value, .. } = rel {
            if param.name() == name {
                values.push(value.clone());
            }
        }
    });
    let set: BTreeSet<i64> = values
        .iter()
        .flat_map(|d| [d.floor_i64(), d.ceil_i64()])
        .collect();
    set.into_iter().collect()
}

fn for_each_relation(model: &DependencyModel, f: &mut dyn FnMut(&ParamValueRelation)) {
    walk(model, &mut |clause| {
        if let Clause::Term(t) = clause {
            if let TermContent::Relation(rel) = &t.content {
                f(rel);
            }
        }
    });
}

fn for_each_arith(model: &DependencyModel, f: &mut dyn FnMut(&ArithmeticDependency)) {
    for dep in &model.dependencies {
        if let Dependency::Arithmetic(a) = dep {
            f(a);
        }
    }
    walk(model, &mut |clause| {
        if let Clause::Arithmetic(a) = clause {
            f(a);
        }
    });
}

/// Calls `f` on every clause of every predicate in the model.
fn walk(model: &DependencyModel, f: &mut dyn FnMut(&Clause)) {
    fn pred(p: &Predicate, f: &mut dyn FnMut(&Clause)) {
        let mut cur = Some(p);
        while let Some(p) = cur {
            f(&p.first);
            match &p.first {
                Clause::Predefined(d) => d.clauses.iter().for_each(|c| pred(c, f)),
                Clause::Group { inner, .. } => pred(inner, f),
                _ => {}
            }
            cur = p.rest.as_ref().map(|(_, r)| r.as_ref());
        }
    }
    for dep in &model.dependencies {
        match dep {
            Dependency::Requires {
                condition,
                consequence,
            } => {
                pred(condition, f);
                pred(consequence, f);
            }
            Dependency::Predefined(d) => d.clauses.iter().for_each(|c| pred(c, f)),
            Dependency::Relational(_) | Dependency::Arithmetic(_) => {}
        }
    }
}
