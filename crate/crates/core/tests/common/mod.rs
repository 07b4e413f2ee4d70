//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use idl_core::model::{build_domains, load_idl4oas};
use idl_core::{parse_idl, IntWindow, OperationSpec, ParamDomain, Parameter};
use rand::seq::SliceRandom;
use rand::Rng;

pub const PLACES: &str = include_str!("../data/places.yaml");

pub fn places(operation: &str) -> OperationSpec {
    load_idl4oas(PLACES, operation).expect("places fixture loads")
}

pub fn spec(params: Vec<Parameter>, idl: &str) -> OperationSpec {
    OperationSpec::new("op", params, parse_idl(idl).expect("fixture parses"))
        .expect("fixture binds")
}

pub fn bools(names: &[&str]) -> Vec<Parameter> {
    names
        .iter()
        .map(|n| Parameter::optional(*n, ParamDomain::Boolean))
        .collect()
}

/// Number of request states: per parameter, its values plus "absent" when
/// optional. `None` if some domain is not finite.
pub fn state_space(spec: &OperationSpec) -> Option<u128> {
    let built = build_domains(spec, IntWindow::default());
    built.parameters.iter().try_fold(1u128, |acc, p| {
        let size = p.domain.size()? as u128 + u128::from(!p.required);
        acc.checked_mul(size)
    })
}

// Random specifications over a pairwise covering of the combinatorial
// factors: parameter count, optional share, parameter type, dependency
// count, dependency kind and complex arity.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypeFactor {
    Boolean,
    Integer,
    String,
    EnumInt,
    EnumString,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Requires,
    Or,
    OnlyOne,
    AllOrNone,
    ZeroOrOne,
    ArithRel,
    Complex,
}

const PARAMS: [usize; 2] = [5, 10];
const OPTIONAL: [u32; 3] = [0, 50, 100];
const TYPES: [TypeFactor; 5] = [
    TypeFactor::Boolean,
    TypeFactor::Integer,
    TypeFactor::String,
    TypeFactor::EnumInt,
    TypeFactor::EnumString,
];
const DEPS: [usize; 2] = [5, 10];
const KINDS: [Kind; 7] = [
    Kind::Requires,
    Kind::Or,
    Kind::OnlyOne,
    Kind::AllOrNone,
    Kind::ZeroOrOne,
    Kind::ArithRel,
    Kind::Complex,
];
const ARITY: [usize; 2] = [2, 5];
const LEVELS: [usize; 6] = [
    PARAMS.len(),
    OPTIONAL.len(),
    TYPES.len(),
    DEPS.len(),
    KINDS.len(),
    ARITY.len(),
];

#[derive(Clone, Copy, Debug)]
pub struct Row {
    pub params: usize,
    pub optional_pct: u32,
    pub ty: TypeFactor,
    pub deps: usize,
    pub kind: Kind,
    pub arity: usize,
}

impl Row {
    fn from_levels(l: &[usize; 6]) -> Row {
        Row {
            params: PARAMS[l[0]],
            optional_pct: OPTIONAL[l[1]],
            ty: TYPES[l[2]],
            deps: DEPS[l[3]],
            kind: KINDS[l[4]],
            arity: ARITY[l[5]],
        }
    }
}

/// Greedy pairwise covering array over the factor levels.
#[allow(clippy::needless_range_loop)]
pub fn pairwise_rows(rng: &mut impl Rng) -> Vec<Row> {
    let mut uncovered = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for x in 0..LEVELS[a] {
                for y in 0..LEVELS[b] {
                    uncovered.push((a, x, b, y));
                }
            }
        }
    }
    let covers =
        |row: &[usize; 6], &(a, x, b, y): &(usize, usize, usize, usize)| row[a] == x && row[b] == y;
    let mut rows = Vec::new();
    while let Some(&(a, x, b, y)) = uncovered.first() {
        let mut best: Option<([usize; 6], usize)> = None;
        for _ in 0..60 {
            let mut cand = [0usize; 6];
            for (f, level) in cand.iter_mut().enumerate() {
                *level = rng.gen_range(0..LEVELS[f]);
            }
            cand[a] = x;
            cand[b] = y;
            let gain = uncovered.iter().filter(|p| covers(&cand, p)).count();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((cand, gain));
            }
        }
        let (row, _) = best.unwrap();
        uncovered.retain(|p| !covers(&row, p));
        rows.push(row);
    }
    rows.iter().map(Row::from_levels).collect()
}

/// Every pair of factor levels appears in some row.
pub fn covers_all_pairs(rows: &[Row]) -> bool {
    let levels = |r: &Row| {
        [
            PARAMS.iter().position(|&v| v == r.params).unwrap(),
            OPTIONAL.iter().position(|&v| v == r.optional_pct).unwrap(),
            TYPES.iter().position(|&v| v == r.ty).unwrap(),
            DEPS.iter().position(|&v| v == r.deps).unwrap(),
            KINDS.iter().position(|&v| v == r.kind).unwrap(),
            ARITY.iter().position(|&v| v == r.arity).unwrap(),
        ]
    };
    let all: Vec<[usize; 6]> = rows.iter().map(levels).collect();
    (0..6).all(|a| {
        (a + 1..6).all(|b| {
            (0..LEVELS[a])
                .all(|x| (0..LEVELS[b]).all(|y| all.iter().any(|r| r[a] == x && r[b] == y)))
        })
    })
}

pub struct Generated {
    pub spec: OperationSpec,
    pub idl: String,
}

/// A random specification for `row`. Parameters at even positions get the
/// row's type, the others are booleans.
pub fn generate(row: &Row, rng: &mut impl Rng) -> Generated {
    let mut params = Vec::new();
    for i in 0..row.params {
        let ty = if i % 2 == 0 {
            row.ty
        } else {
            TypeFactor::Boolean
        };
        let domain = match ty {
            TypeFactor::Boolean => ParamDomain::Boolean,
            TypeFactor::Integer => ParamDomain::IntRange { min: 0, max: 2 },
            TypeFactor::String => ParamDomain::OpenString,
            TypeFactor::EnumInt => ParamDomain::EnumInt { values: vec![1, 5] },
            TypeFactor::EnumString => ParamDomain::EnumString {
                values: vec!["A".into(), "B".into()],
            },
        };
        let required = match row.optional_pct {
            0 => true,
            50 => i % 2 == 1,
            _ => false,
        };
        params.push((
            format!("p{i}"),
            ty,
            Parameter::new(format!("p{i}"), domain, required),
        ));
    }
    let g = Gen {
        params: params.iter().map(|(n, t, _)| (n.clone(), *t)).collect(),
        arity: row.arity,
    };
    let mut lines = Vec::new();
    for d in 0..row.deps {
        let kind = if d == 0 || rng.gen_bool(0.5) {
            row.kind
        } else {
            *KINDS.choose(rng).unwrap()
        };
        lines.push(format!("{};", g.dependency(kind, rng)));
    }
    let idl = lines.join("\n");
    let model =
        parse_idl(&idl).unwrap_or_else(|e| panic!("generated IDL fails to parse: {e}\n{idl}"));
    let spec = OperationSpec::new(
        "generated",
        params.into_iter().map(|(_, _, p)| p).collect(),
        model,
    )
    .unwrap_or_else(|e| panic!("generated spec fails to bind: {e}\n{idl}"));
    Generated { spec, idl }
}

struct Gen {
    params: Vec<(String, TypeFactor)>,
    arity: usize,
}

impl Gen {
    fn pick<'a>(&'a self, rng: &mut impl Rng) -> &'a (String, TypeFactor) {
        self.params.choose(rng).unwrap()
    }

    fn numeric(&self) -> Vec<&String> {
        self.params
            .iter()
            .filter(|(_, t)| matches!(t, TypeFactor::Integer | TypeFactor::EnumInt))
            .map(|(n, _)| n)
            .collect()
    }

    fn term(&self, rng: &mut impl Rng) -> String {
        let (name, ty) = self.pick(rng);
        if rng.gen_bool(0.5) {
            return name.clone();
        }
        let op = ["<", ">", "<=", ">=", "==", "!="].choose(rng).unwrap();
        match ty {
            TypeFactor::Boolean => format!("{name}=={}", rng.gen_bool(0.5)),
            TypeFactor::Integer => format!("{name}{op}{}", rng.gen_range(0..=2)),
            TypeFactor::EnumInt => format!("{name}{op}{}", [1, 3, 5].choose(rng).unwrap()),
            TypeFactor::String => match rng.gen_range(0..3) {
                0 => format!("{name}=='A'"),
                1 => format!("{name}=='A'|'B'"),
                _ => format!("{name} LIKE 'A*'"),
            },
            TypeFactor::EnumString => {
                if rng.gen_bool(0.5) {
                    format!("{name}=='B'")
                } else {
                    format!("{name}=='A'|'B'")
                }
            }
        }
    }

    /// A chain of up to `max` clauses. Negation only where allowed.
    fn predicate(&self, max: usize, allow_not: bool, rng: &mut impl Rng) -> String {
        let n = rng.gen_range(1..=max);
        let mut out = String::new();
        for i in 0..n {
            if i > 0 {
                out.push_str(if rng.gen_bool(0.5) { " AND " } else { " OR " });
            }
            let clause = if max > 1 && rng.gen_bool(0.2) {
                format!("({})", self.predicate(2, allow_not, rng))
            } else {
                self.term(rng)
            };
            if allow_not && rng.gen_bool(0.25) {
                out.push_str("NOT ");
                if clause.starts_with('(') {
                    out.push_str(&clause);
                } else {
                    out.push_str(&format!("({clause})"));
                }
            } else {
                out.push_str(&clause);
            }
        }
        out
    }

    fn predefined(&self, kind: Kind, elems: Vec<String>, rng: &mut impl Rng) -> String {
        let kw = match kind {
            Kind::Or => "Or",
            Kind::OnlyOne => "OnlyOne",
            Kind::AllOrNone => "AllOrNone",
            _ => "ZeroOrOne",
        };
        let neg = if rng.gen_bool(0.15) { "NOT " } else { "" };
        format!("{neg}{kw}({})", elems.join(", "))
    }

    fn simple_elems(&self, rng: &mut impl Rng) -> Vec<String> {
        (0..self.arity)
            .map(|_| self.predicate(2, false, rng))
            .collect()
    }

    fn relational_or_arith(&self, rng: &mut impl Rng) -> String {
        let numeric = self.numeric();
        let op = *["<", ">", "<=", ">=", "==", "!="].choose(rng).unwrap();
        if numeric.len() >= 2 && rng.gen_bool(0.5) {
            let k = rng.gen_range(2..=numeric.len().min(3));
            let mut expr = String::new();
            for (i, p) in numeric.choose_multiple(rng, k).enumerate() {
                if i > 0 {
                    expr.push_str([" + ", " - ", " * ", " / "].choose(rng).unwrap());
                }
                expr.push_str(p);
            }
            let value = if rng.gen_bool(0.2) {
                "2.5".to_string()
            } else {
                rng.gen_range(0..=6).to_string()
            };
            return format!("{expr} {op} {value}");
        }
        // Two distinct parameters of the same type.
        let mut pairs = Vec::new();
        for (i, (a, ta)) in self.params.iter().enumerate() {
            for (b, tb) in &self.params[i + 1..] {
                if ta == tb {
                    pairs.push((a, b, *ta));
                }
            }
        }
        let (a, b, ty) = pairs.choose(rng).copied().expect("at least two booleans");
        let op = if ty == TypeFactor::Boolean {
            *["==", "!="].choose(rng).unwrap()
        } else {
            op
        };
        format!("{a} {op} {b}")
    }

    fn dependency(&self, kind: Kind, rng: &mut impl Rng) -> String {
        match kind {
            Kind::Requires => format!(
                "IF {} THEN {}",
                self.predicate(2, true, rng),
                self.predicate(2, true, rng)
            ),
            Kind::Or | Kind::OnlyOne | Kind::AllOrNone | Kind::ZeroOrOne => {
                let elems = self.simple_elems(rng);
                self.predefined(kind, elems, rng)
            }
            Kind::ArithRel => self.relational_or_arith(rng),
            Kind::Complex => {
                // A predefined dependency whose elements nest further
                // dependencies, optionally under a Requires.
                let inner_kind = *[Kind::Or, Kind::OnlyOne, Kind::AllOrNone, Kind::ZeroOrOne]
                    .choose(rng)
                    .unwrap();
                let mut elems = self.simple_elems(rng);
                let nested_kind = *[Kind::Or, Kind::OnlyOne, Kind::AllOrNone, Kind::ZeroOrOne]
                    .choose(rng)
                    .unwrap();
                let nested_elems = (0..2).map(|_| self.term(rng)).collect();
                let slot = rng.gen_range(0..elems.len());
                elems[slot] = self.predefined(nested_kind, nested_elems, rng);
                if rng.gen_bool(0.5) {
                    let slot = rng.gen_range(0..elems.len());
                    elems[slot] = self.relational_or_arith(rng);
                }
                let body = self.predefined(inner_kind, elems, rng);
                if rng.gen_bool(0.5) {
                    format!("IF {} THEN {body}", self.predicate(2, true, rng))
                } else {
                    body
                }
            }
        }
    }
}

/// Shrinks every integer range to at most `k` values so brute force stays
/// cheap. Enums and other domains are unchanged.
pub fn narrow(spec: &OperationSpec, k: i64) -> OperationSpec {
    let mut out = spec.clone();
    for p in &mut out.parameters {
        if let ParamDomain::IntRange { min, max } = p.domain {
            p.domain = ParamDomain::IntRange {
                min,
                max: max.min(min + k - 1),
            };
        }
    }
    out
}

/// Cross-checks every analysis operation against brute-force enumeration
/// and returns one message per discrepancy.
pub fn check_invariants(
    spec: &OperationSpec,
    only_one: idl_core::OnlyOneSemantics,
    rng: &mut impl Rng,
) -> Vec<String> {
    use idl_core::{AnalysisOptions, Analyzer, Request};
    use std::collections::BTreeSet;

    let mut issues = Vec::new();
    let a = Analyzer::with_options(
        spec,
        AnalysisOptions {
            only_one,
            ..Default::default()
        },
    );
    let oracle: BTreeSet<Request> = match a.oracle_all_requests() {
        Ok(o) => o,
        Err(e) => return vec![format!("oracle failed: {e}")],
    };
    let all = a.all_requests().unwrap();
    if all != oracle {
        let missing = oracle.difference(&all).next().map(|r| r.to_string());
        let extra = all.difference(&oracle).next().map(|r| r.to_string());
        issues.push(format!(
            "allRequests has {} requests, oracle {}; missing e.g. {missing:?}, extra e.g. {extra:?}",
            all.len(),
            oracle.len()
        ));
    }
    let count = a.number_of_requests().unwrap();
    if count != oracle.len() as u64 {
        issues.push(format!(
            "numberOfRequests {count} != oracle {}",
            oracle.len()
        ));
    }
    let consistent = a.is_consistent().unwrap();
    if consistent == oracle.is_empty() {
        issues.push(format!(
            "isConsistent {consistent} with {} oracle requests",
            oracle.len()
        ));
    }

    let mut any_defect = false;
    for p in &a.spec().parameters {
        let dead = a.is_dead_parameter(&p.name).unwrap();
        let expected_dead = !oracle.iter().any(|r| r.contains(&p.name));
        if dead != expected_dead {
            issues.push(format!(
                "isDeadParameter({}) = {dead}, expected {expected_dead}",
                p.name
            ));
        }
        any_defect |= dead;
        let everywhere = !oracle.is_empty() && oracle.iter().all(|r| r.contains(&p.name));
        if p.required {
            if !oracle.iter().all(|r| r.contains(&p.name)) {
                issues.push(format!("required {} missing from some request", p.name));
            }
        } else {
            let fo = a.is_false_optional(&p.name).unwrap();
            if fo != everywhere {
                issues.push(format!(
                    "isFalseOptional({}) = {fo}, expected {everywhere}",
                    p.name
                ));
            }
            any_defect |= fo;
        }
    }
    let valid = a.is_valid_spec().unwrap();
    if valid != (consistent && !any_defect) {
        issues.push(format!("isValidSpec {valid} disagrees with its parts"));
    }

    let members: Vec<&Request> = oracle.iter().collect();
    for _ in 0..members.len().min(15) {
        let r = members[rng.gen_range(0..members.len())];
        if !a.is_valid_request(r).unwrap() {
            issues.push(format!("member {r} rejected by isValidRequest"));
        }
        if !a.is_valid_partial_request(r).unwrap() {
            issues.push(format!("member {r} rejected by isValidPartialRequest"));
        }
        for name in r.bindings.keys() {
            let mut sub = r.clone();
            sub.bindings.remove(name);
            if !a.is_valid_partial_request(&sub).unwrap() {
                issues.push(format!(
                    "subset {sub} of valid {r} rejected as partial request"
                ));
            }
        }
    }

    // Random request states outside the valid set must be rejected.
    let choices: Vec<(String, bool, Vec<idl_core::Value>)> = a
        .spec()
        .parameters
        .iter()
        .map(|p| (p.name.clone(), p.required, p.domain.values().unwrap()))
        .collect();
    for _ in 0..15 {
        let r: Request = choices
            .iter()
            .filter_map(|(name, required, values)| {
                if !required && rng.gen_bool(0.4) {
                    None
                } else {
                    Some((name.clone(), values.choose(rng).unwrap().clone()))
                }
            })
            .collect();
        let verdict = a.is_valid_request(&r).unwrap();
        if verdict != oracle.contains(&r) {
            issues.push(format!(
                "isValidRequest({r}) = {verdict}, oracle says {}",
                !verdict
            ));
        }
    }

    match a.random_request(rng).unwrap() {
        Some(r) if !oracle.contains(&r) => {
            issues.push(format!("randomRequest {r} is not a valid request"))
        }
        None if !oracle.is_empty() => {
            issues.push("randomRequest absent on a consistent spec".into())
        }
        Some(_) if oracle.is_empty() => {
            issues.push("randomRequest present on an inconsistent spec".into())
        }
        _ => {}
    }
    issues
}
