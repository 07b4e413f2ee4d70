//! Property tests: syntax round trips, solver against enumeration, and the
//! algebraic laws of the dependency language checked through the analyzer.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use idl_core::csp::{ArithTerm, ConstraintExpr as C};
use idl_core::idl::*;
use idl_core::mapping::Mapper;
use idl_core::{
    map_spec, AnalysisOptions, Analyzer, CspProblem, CspVar, Decimal, Domain, OnlyOneSemantics,
    OperationSpec, ParamDomain, Parameter, Request, Value,
};
use proptest::prelude::*;
use proptest::sample::select;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Syntax trees shaped the way the parser builds them.

fn name() -> impl Strategy<Value = ParamRef> {
    select(vec![
        "p1",
        "p2",
        "limit",
        "max_id",
        "owner.percentage",
        "a-b",
    ])
    .prop_map(ParamRef::new)
}

fn rel_op() -> impl Strategy<Value = RelOp> {
    select(vec![
        RelOp::Lt,
        RelOp::Gt,
        RelOp::Le,
        RelOp::Ge,
        RelOp::Eq,
        RelOp::Ne,
    ])
}

fn decimal() -> impl Strategy<Value = Decimal> {
    prop_oneof![
        (-500i64..500).prop_map(Decimal::from),
        (-500i64..500, 1u32..3)
            .prop_map(|(d, s)| format!("{d}.{}", "5".repeat(s as usize)).parse().unwrap()),
    ]
}

fn text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 _']{0,6}"
}

fn relation() -> impl Strategy<Value = ParamValueRelation> {
    prop_oneof![
        (name(), prop::collection::vec(text(), 1..4))
            .prop_map(|(param, values)| ParamValueRelation::StringIn { param, values }),
        (name(), "[a-z*?]{1,5}")
            .prop_map(|(param, pattern)| ParamValueRelation::Like { param, pattern }),
        (name(), any::<bool>())
            .prop_map(|(param, value)| ParamValueRelation::BoolEq { param, value }),
        (name(), rel_op(), decimal()).prop_map(|(param, op, value)| ParamValueRelation::NumCmp {
            param,
            op,
            value
        }),
    ]
}

fn arith_op() -> impl Strategy<Value = ArithOp> {
    select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div])
}

/// Left-associated chain of at least two operands; parenthesized operands
/// become groups.
fn arith_chain() -> impl Strategy<Value = ArithExpr> {
    let operand = name().prop_map(ArithExpr::Param);
    let operand = operand.prop_recursive(2, 8, 3, |inner| {
        (
            inner.clone(),
            prop::collection::vec((arith_op(), inner), 1..3),
        )
            .prop_map(|(first, rest)| {
                let chain = rest
                    .into_iter()
                    .fold(first, |acc, (op, e)| ArithExpr::binary(acc, op, e));
                ArithExpr::Group(Box::new(chain))
            })
    });
    (
        operand.clone(),
        prop::collection::vec((arith_op(), operand), 1..4),
    )
        .prop_map(|(first, rest)| {
            rest.into_iter()
                .fold(first, |acc, (op, e)| ArithExpr::binary(acc, op, e))
        })
}

fn arithmetic() -> impl Strategy<Value = ArithmeticDependency> {
    (arith_chain(), rel_op(), decimal()).prop_map(|(operation, op, value)| ArithmeticDependency {
        operation,
        op,
        value,
    })
}

fn relational() -> impl Strategy<Value = RelationalDependency> {
    (name(), rel_op(), name()).prop_map(|(left, op, right)| RelationalDependency {
        left,
        op,
        right,
    })
}

fn kind() -> impl Strategy<Value = PredefinedKind> {
    select(vec![
        PredefinedKind::Or,
        PredefinedKind::OnlyOne,
        PredefinedKind::AllOrNone,
        PredefinedKind::ZeroOrOne,
    ])
}

fn predicate() -> impl Strategy<Value = Predicate> {
    let term = (
        any::<bool>(),
        prop_oneof![
            name().prop_map(TermContent::Param),
            relation().prop_map(TermContent::Relation)
        ],
    )
        .prop_map(|(negated, content)| Clause::Term(Term { negated, content }));
    let leaf = prop_oneof![
        4 => term,
        1 => relational().prop_map(Clause::Relational),
        1 => arithmetic().prop_map(Clause::Arithmetic),
    ];
    let clause = leaf.prop_recursive(3, 16, 3, |inner| {
        let pred = chain(inner);
        prop_oneof![
            (any::<bool>(), pred.clone()).prop_map(|(negated, p)| Clause::Group {
                negated,
                inner: Box::new(p)
            }),
            (kind(), any::<bool>(), prop::collection::vec(pred, 2..4)).prop_map(
                |(kind, negated, clauses)| {
                    Clause::Predefined(PredefinedDependency {
                        kind,
                        negated,
                        clauses,
                    })
                }
            ),
        ]
    });
    chain(clause)
}

fn chain(
    clause: impl Strategy<Value = Clause> + Clone,
) -> impl Strategy<Value = Predicate> + Clone {
    (
        clause.clone(),
        prop::collection::vec((select(vec![Connector::And, Connector::Or]), clause), 0..3),
    )
        .prop_map(|(first, rest)| {
            // Right-recursive, mixed connectors.
            let mut clauses = vec![first];
            let mut conns = Vec::new();
            for (c, cl) in rest {
                conns.push(c);
                clauses.push(cl);
            }
            let mut acc = Predicate::clause(clauses.pop().unwrap());
            while let Some(cl) = clauses.pop() {
                acc = Predicate {
                    first: cl,
                    rest: Some((conns.pop().unwrap(), Box::new(acc))),
                };
            }
            acc
        })
}

fn dependency() -> impl Strategy<Value = Dependency> {
    prop_oneof![
        (predicate(), predicate()).prop_map(|(condition, consequence)| Dependency::Requires {
            condition,
            consequence
        }),
        (
            kind(),
            any::<bool>(),
            prop::collection::vec(predicate(), 2..4)
        )
            .prop_map(|(kind, negated, clauses)| Dependency::Predefined(
                PredefinedDependency {
                    kind,
                    negated,
                    clauses
                }
            )),
        relational().prop_map(Dependency::Relational),
        arithmetic().prop_map(Dependency::Arithmetic),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn render_then_parse_is_identity(deps in prop::collection::vec(dependency(), 0..4)) {
        let model = DependencyModel::new(deps);
        let text = render_idl(&model);
        let (parsed, _) = parse_unvalidated(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &model, "{}", text);
        prop_assert_eq!(render_idl(&parsed), text);
    }
}

// Solver against plain enumeration.

fn small_var(i: usize) -> impl Strategy<Value = CspVar> {
    prop_oneof![
        Just(CspVar::new(format!("v{i}"), Domain::booleans())),
        prop::collection::btree_set(-2i64..4, 1..4).prop_map(move |s| CspVar::new(
            format!("v{i}"),
            Domain::Finite(s.into_iter().map(Value::Int).collect())
        )),
    ]
}

fn csp_constraint(n: usize) -> impl Strategy<Value = C> {
    let var = (0..n).prop_map(|i| format!("v{i}"));
    let atom = prop_oneof![
        (var.clone(), any::<bool>()).prop_map(|(v, b)| C::eq(&v, b)),
        (var.clone(), rel_op(), -2i64..4).prop_map(|(var, op, k)| C::Cmp {
            var,
            op,
            value: Value::Int(k)
        }),
        (var.clone(), rel_op(), var.clone()).prop_map(|(left, op, right)| C::CmpVars {
            left,
            op,
            right
        }),
        (
            var.clone(),
            select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul]),
            var,
            rel_op(),
            -3i64..6
        )
            .prop_map(|(a, aop, b, op, k)| C::Arith {
                expr: ArithTerm::Binary(
                    Box::new(ArithTerm::Var(a)),
                    aop,
                    Box::new(ArithTerm::Var(b))
                ),
                op,
                value: Decimal::from(k),
            }),
    ];
    atom.prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(C::negate),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| C::implies(a, b)),
            prop::collection::vec(inner.clone(), 1..4).prop_map(C::And),
            prop::collection::vec(inner, 1..4).prop_map(C::Or),
        ]
    })
}

fn csp() -> impl Strategy<Value = CspProblem> {
    (1usize..5)
        .prop_flat_map(|n| {
            let vars: Vec<_> = (0..n).map(small_var).collect();
            (vars, prop::collection::vec(csp_constraint(n), 0..4))
        })
        .prop_map(|(vars, constraints)| CspProblem { vars, constraints })
}

fn enumerate(csp: &CspProblem) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for v in &csp.vars {
        let Domain::Finite(values) = &v.domain else {
            unreachable!()
        };
        out = out
            .into_iter()
            .flat_map(|a| {
                values.iter().map(move |x| {
                    let mut a = a.clone();
                    a.insert(v.name.clone(), x.clone());
                    a
                })
            })
            .collect();
    }
    out.retain(|a| csp.constraints.iter().all(|c| c.eval(a)));
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn solver_matches_enumeration(p in csp()) {
        let expected: BTreeSet<_> = enumerate(&p).into_iter().collect();
        let solver = idl_core::csp::Solver::new(&p).unwrap();
        let all: BTreeSet<_> = solver.all().into_iter().map(|s| s.assignment).collect();
        prop_assert_eq!(&all, &expected);
        prop_assert_eq!(solver.count(), expected.len() as u64);
        prop_assert_eq!(solver.is_satisfiable(), !expected.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        if let Some(s) = solver.random(&mut rng) {
            prop_assert!(expected.contains(&s.assignment));
        }
    }
}

// Language laws, checked on small specs over four parameters.

const P: [&str; 4] = ["a", "b", "n", "s"];

fn law_params(required: [bool; 4]) -> Vec<Parameter> {
    let domains = [
        ParamDomain::Boolean,
        ParamDomain::Boolean,
        ParamDomain::IntRange { min: 0, max: 2 },
        ParamDomain::EnumString {
            values: vec!["x".into(), "y".into()],
        },
    ];
    P.iter()
        .zip(domains)
        .zip(required)
        .map(|((n, d), r)| Parameter::new(*n, d, r))
        .collect()
}

/// Source text of a predicate over the law parameters, free of negated
/// terms so it may appear inside predefined dependencies.
fn pred_text() -> BoxedStrategy<String> {
    pred_text_with(
        prop_oneof![
            term_text(),
            Just("a != b".to_string()),
            Just("n * n < 3".to_string())
        ]
        .boxed(),
    )
}

/// Like [`pred_text`] but built from terms only, without relational or
/// arithmetic clauses (which hold vacuously when their operands are absent).
fn term_pred_text() -> BoxedStrategy<String> {
    pred_text_with(term_text().boxed())
}

fn term_text() -> BoxedStrategy<String> {
    prop_oneof![
        select(P.to_vec()).prop_map(str::to_string),
        any::<bool>().prop_map(|b| format!("a=={b}")),
        (rel_op(), 0i64..3).prop_map(|(op, k)| format!("n {} {k}", op.symbol())),
        select(vec!["s=='x'", "s=='x'|'y'", "s LIKE 'y*'"]).prop_map(str::to_string),
    ]
    .boxed()
}

fn pred_text_with(atom: BoxedStrategy<String>) -> BoxedStrategy<String> {
    atom.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), select(vec!["AND", "OR"]), inner.clone())
                .prop_map(|(l, c, r)| format!("{l} {c} {r}")),
            inner.clone().prop_map(|p| format!("({p})")),
            prop::collection::vec(inner, 2..3).prop_map(|ps| format!("Or({})", ps.join(", "))),
        ]
    })
    .boxed()
}

fn law_spec(required: [bool; 4], idl: &str) -> OperationSpec {
    common::spec(law_params(required), idl)
}

fn requests(spec: &OperationSpec, only_one: OnlyOneSemantics) -> BTreeSet<Request> {
    let options = AnalysisOptions {
        only_one,
        ..Default::default()
    };
    Analyzer::with_options(spec, options)
        .all_requests()
        .unwrap()
}

fn semantics() -> impl Strategy<Value = OnlyOneSemantics> {
    select(vec![OnlyOneSemantics::Exact, OnlyOneSemantics::AtMostOne])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn all_or_none_is_two_implications(x in pred_text(), y in pred_text()) {
        let sugar = law_spec([false; 4], &format!("AllOrNone({x}, {y});"));
        let plain = law_spec([false; 4], &format!("IF {x} THEN {y};\nIF {y} THEN {x};"));
        prop_assert_eq!(requests(&sugar, OnlyOneSemantics::Exact), requests(&plain, OnlyOneSemantics::Exact));
    }

    #[test]
    fn negation_complements(
        k in kind(),
        elems in prop::collection::vec(pred_text(), 2..4),
        sem in semantics(),
        required in any::<[bool; 4]>(),
    ) {
        let body = format!("{}({})", k.keyword(), elems.join(", "));
        let positive = requests(&law_spec(required, &format!("{body};")), sem);
        let negative = requests(&law_spec(required, &format!("NOT {body};")), sem);
        let everything = requests(&law_spec(required, ""), sem);
        prop_assert!(positive.is_disjoint(&negative));
        prop_assert_eq!(positive.union(&negative).cloned().collect::<BTreeSet<_>>(), everything);
    }

    #[test]
    fn zero_or_one_is_only_one_or_none(elems in prop::collection::vec(pred_text(), 2..4)) {
        let list = elems.join(", ");
        let z = requests(&law_spec([false; 4], &format!("ZeroOrOne({list});")), OnlyOneSemantics::Exact);
        let one = requests(&law_spec([false; 4], &format!("OnlyOne({list});")), OnlyOneSemantics::Exact);
        let none = requests(&law_spec([false; 4], &format!("NOT Or({list});")), OnlyOneSemantics::Exact);
        prop_assert_eq!(z.clone(), one.union(&none).cloned().collect::<BTreeSet<_>>());
        // Without the at-least-one part, OnlyOne already means ZeroOrOne.
        let at_most = requests(&law_spec([false; 4], &format!("OnlyOne({list});")), OnlyOneSemantics::AtMostOne);
        prop_assert_eq!(z, at_most);
    }

    #[test]
    fn guarded_atoms_are_vacuous_when_absent(op in rel_op(), k in 0i64..3, with_arith in any::<bool>()) {
        let idl = if with_arith {
            format!("n + n {} {k};", op.symbol())
        } else {
            format!("n {} b;", op.symbol())
        };
        let spec = law_spec([false; 4], &idl);
        let valid = requests(&spec, OnlyOneSemantics::Exact);
        for r in requests(&law_spec([false; 4], ""), OnlyOneSemantics::Exact) {
            if !r.contains("n") {
                prop_assert!(valid.contains(&r), "{} rejected", r);
            }
        }
    }

    #[test]
    fn analysis_agrees_with_brute_force(
        deps in prop::collection::vec((kind(), pred_text(), pred_text()), 1..3),
        required in any::<[bool; 4]>(),
        sem in semantics(),
        seed in any::<u64>(),
    ) {
        let idl: Vec<String> = deps.iter().map(|(k, x, y)| format!("{}({x}, {y});", k.keyword())).collect();
        let spec = law_spec(required, &idl.join("\n"));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let issues = common::check_invariants(&spec, sem, &mut rng);
        prop_assert!(issues.is_empty(), "{}", issues.join("\n"));
    }
}

// Every parameter gets a value and a presence variable; a term constrains
// only the presence variable; relations are guarded by presence.

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_variables_per_parameter(x in pred_text(), sem in semantics()) {
        let spec = law_spec([false; 4], &format!("IF {x} THEN b;"));
        let mapped = map_spec(&spec, sem);
        prop_assert_eq!(mapped.csp.vars.len(), 2 * P.len());
        for p in P {
            let value = mapped.value_var(p).unwrap();
            let presence = mapped.presence_var(p).unwrap();
            prop_assert_eq!(value, p);
            prop_assert_eq!(presence, format!("{p}Set"));
            prop_assert_eq!(&mapped.csp.var(presence).unwrap().domain, &Domain::booleans());
        }
    }

    #[test]
    fn value_atoms_are_guarded(x in term_pred_text()) {
        let spec = law_spec([false; 4], &format!("IF {x} THEN b;"));
        let mapped = map_spec(&spec, OnlyOneSemantics::Exact);
        let Dependency::Requires { condition, .. } = &spec.model.dependencies[0] else { unreachable!() };
        let mapper = Mapper { index: &mapped.param_index, semantics: OnlyOneSemantics::Exact };
        let c = mapper.predicate(condition);
        // Negation-free terms all require presence: with no parameter
        // present the condition cannot hold, whatever the values.
        for a in assignments_without_presence(&mapped) {
            prop_assert!(!c.eval(&a), "{} holds with nothing present", c);
        }
    }
}

/// All value assignments with every presence variable false.
fn assignments_without_presence(m: &idl_core::MappedSpec) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for v in &m.csp.vars {
        let values: Vec<Value> = if v.name.ends_with("Set") {
            vec![Value::Bool(false)]
        } else {
            match &v.domain {
                Domain::Finite(vals) => vals.clone(),
                Domain::Continuous => vec![Value::Int(0)],
            }
        };
        out = out
            .into_iter()
            .flat_map(|a| {
                values.iter().map(move |x| {
                    let mut a = a.clone();
                    a.insert(v.name.clone(), x.clone());
                    a
                })
            })
            .collect();
    }
    out
}
