//! Chronological backtracking over variables in declaration order.
//!
//! Every constraint is re-evaluated in three-valued logic whenever one of its
//! variables is assigned, so a branch is cut as soon as any constraint is
//! definitely false, not only once it is fully instantiated.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use num::rational::BigRational;
use num::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::RngCore;

use crate::idl::{ArithOp, RelOp};
use crate::like::like_matches;
use crate::value::Value;

use super::{ArithTerm, ConstraintExpr, CspError, CspProblem, Domain, Solution};

const UNASSIGNED: u32 = u32::MAX;

/// Entries kept in the counting memo and the no-good cache.
const MEMO_CAP: usize = 1 << 20;

enum Flow {
    /// The visitor asked to stop.
    Stop,
    /// At least one solution was visited.
    Found,
    Empty,
}

struct Search<'r, 'v> {
    assignment: Vec<u32>,
    rng: Option<&'r mut dyn RngCore>,
    visit: &'v mut dyn FnMut(&[u32]) -> bool,
    dead: HashSet<(usize, Vec<u32>)>,
}

struct Counter {
    assignment: Vec<u32>,
    memo: HashMap<(usize, Vec<u32>), u64>,
    budget: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Tri {
    False,
    True,
    Unknown,
}

impl Tri {
    fn not(self) -> Tri {
        match self {
            Tri::False => Tri::True,
            Tri::True => Tri::False,
            Tri::Unknown => Tri::Unknown,
        }
    }
}

enum Node {
    Const(bool),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    /// Unary atom, truth value precomputed per domain index.
    Table {
        var: usize,
        truth: Vec<bool>,
    },
    Pair {
        left: usize,
        op: RelOp,
        right: usize,
    },
    Arith {
        expr: Term,
        op: RelOp,
        value: BigRational,
        /// Floor of `value` and whether it is integral, if it fits.
        floor: Option<(i64, bool)>,
    },
}

enum Term {
    Var(usize),
    Binary(Box<Term>, ArithOp, Box<Term>),
}

/// A problem compiled for repeated search.
pub struct Solver {
    names: Vec<String>,
    domains: Vec<Vec<Value>>,
    /// Numeric view of the domains of variables used in arithmetic.
    numeric: Vec<Vec<Option<BigRational>>>,
    /// The same values where they are small integers, for the fast path.
    small: Vec<Vec<Option<i64>>>,
    nodes: Vec<Node>,
    /// Constraints mentioning each variable.
    watch: Vec<Vec<usize>>,
    /// Constraints with no variables.
    ground: Vec<usize>,
    /// Variables past this index appear in no constraint.
    last_constrained: Option<usize>,
    /// For each depth `i`, the variables before `i` that share a constraint
    /// with some variable at or after `i`. The number of completions of a
    /// consistent partial assignment depends only on their values.
    frontier: Vec<Vec<usize>>,
}

impl Solver {
    pub fn new(csp: &CspProblem) -> Result<Self, CspError> {
        let index: HashMap<&str, usize> = csp
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let mut pinned: Vec<Option<Vec<Value>>> = vec![None; csp.vars.len()];
        for c in &csp.constraints {
            collect_pins(c, &index, &mut pinned)?;
        }

        let mut domains = Vec::with_capacity(csp.vars.len());
        for (i, var) in csp.vars.iter().enumerate() {
            let values = match (&var.domain, &pinned[i]) {
                (Domain::Finite(values), None) => values.clone(),
                (Domain::Finite(values), Some(pins)) => values
                    .iter()
                    .filter(|v| pins.iter().all(|p| v.sem_eq(p)))
                    .cloned()
                    .collect(),
                (Domain::Continuous, Some(pins)) => {
                    let first = &pins[0];
                    if first.is_numeric() && pins.iter().all(|p| p.sem_eq(first)) {
                        vec![first.clone()]
                    } else {
                        Vec::new()
                    }
                }
                (Domain::Continuous, None) => {
                    return Err(CspError::InfiniteDomain(var.name.clone()))
                }
            };
            domains.push(values);
        }

        let mut compiler = Compiler {
            index: &index,
            domains: &domains,
            arith_vars: Vec::new(),
        };
        let mut nodes = Vec::with_capacity(csp.constraints.len());
        let mut watch = vec![Vec::new(); csp.vars.len()];
        let mut ground = Vec::new();
        let mut last_constrained = None;
        for (ci, c) in csp.constraints.iter().enumerate() {
            nodes.push(compiler.compile(c)?);
            let vars = c.vars();
            if vars.is_empty() {
                ground.push(ci);
            }
            for v in vars {
                let vi = index[v];
                watch[vi].push(ci);
                last_constrained = last_constrained.max(Some(vi));
            }
        }

        let n = csp.vars.len();
        let mut frontier = vec![Vec::new(); n + 1];
        let scopes: Vec<Vec<usize>> = csp
            .constraints
            .iter()
            .map(|c| c.vars().into_iter().map(|v| index[v]).collect())
            .collect();
        for (i, f) in frontier.iter_mut().enumerate() {
            let mut vars: Vec<usize> = scopes
                .iter()
                .filter(|scope| scope.iter().any(|&v| v >= i))
                .flat_map(|scope| scope.iter().copied().filter(|&v| v < i))
                .collect();
            vars.sort_unstable();
            vars.dedup();
            *f = vars;
        }

        let mut numeric = vec![Vec::new(); csp.vars.len()];
        for vi in compiler.arith_vars {
            if numeric[vi].is_empty() {
                numeric[vi] = domains[vi].iter().map(Value::as_rational).collect();
            }
        }

        let small = numeric
            .iter()
            .map(|vals| {
                vals.iter()
                    .map(|q| {
                        q.as_ref()
                            .filter(|q| q.is_integer())
                            .and_then(|q| q.to_integer().to_i64())
                    })
                    .collect()
            })
            .collect();

        Ok(Solver {
            names: csp.vars.iter().map(|v| v.name.clone()).collect(),
            domains,
            numeric,
            small,
            nodes,
            watch,
            ground,
            last_constrained,
            frontier,
        })
    }

    /// First solution in declaration and domain order.
    pub fn first(&self) -> Option<Solution> {
        let mut found = None;
        self.search(None, &mut |s| {
            found = Some(self.solution(s));
            false
        });
        found
    }

    /// A solution found with randomized value ordering. Not uniform over
    /// the solution set.
    pub fn random(&self, rng: &mut dyn RngCore) -> Option<Solution> {
        let mut found = None;
        self.search(Some(rng), &mut |s| {
            found = Some(self.solution(s));
            false
        });
        found
    }

    /// Every solution, in lexicographic order of domain indices.
    pub fn all(&self) -> Vec<Solution> {
        let mut out = Vec::new();
        self.search(None, &mut |s| {
            out.push(self.solution(s));
            true
        });
        out
    }

    /// Visits solutions until `f` returns false.
    pub fn for_each(&self, mut f: impl FnMut(Solution) -> bool) {
        self.search(None, &mut |s| f(self.solution(s)));
    }

    /// Number of solutions, counted without materializing them. Subtrees
    /// are memoized on the values of the current frontier variables.
    pub fn count(&self) -> u64 {
        self.count_within(u64::MAX).expect("unbounded count")
    }

    /// Like [`Solver::count`], but gives up with `None` once more than
    /// `budget` search nodes have been expanded.
    pub fn count_within(&self, budget: u64) -> Option<u64> {
        if !self.ground_ok() {
            return Some(0);
        }
        let n = self.names.len();
        let free_from = self.last_constrained.map_or(0, |l| l + 1);
        let free: u64 = self.domains[free_from..]
            .iter()
            .fold(1u64, |acc, d| acc.saturating_mul(d.len() as u64));
        if free == 0 {
            return Some(0);
        }
        let mut counter = Counter {
            assignment: vec![UNASSIGNED; n],
            memo: HashMap::new(),
            budget,
        };
        self.count_rec(0, free_from, &mut counter)
            .map(|c| c.saturating_mul(free))
    }

    pub fn is_satisfiable(&self) -> bool {
        self.first().is_some()
    }

    fn count_rec(&self, i: usize, stop: usize, c: &mut Counter) -> Option<u64> {
        if i == stop {
            return Some(1);
        }
        let key = (
            i,
            self.frontier[i]
                .iter()
                .map(|&v| c.assignment[v])
                .collect::<Vec<_>>(),
        );
        if let Some(&n) = c.memo.get(&key) {
            return Some(n);
        }
        let mut total = 0u64;
        for k in 0..self.domains[i].len() {
            c.budget = c.budget.checked_sub(1)?;
            c.assignment[i] = k as u32;
            if self.consistent_after(i, &c.assignment) {
                total = total.saturating_add(self.count_rec(i + 1, stop, c)?);
            }
        }
        c.assignment[i] = UNASSIGNED;
        if c.memo.len() < MEMO_CAP {
            c.memo.insert(key, total);
        }
        Some(total)
    }

    fn ground_ok(&self) -> bool {
        let empty: Vec<u32> = Vec::new();
        self.ground
            .iter()
            .all(|&c| self.eval(&self.nodes[c], &empty) != Tri::False)
    }

    fn solution(&self, assignment: &[u32]) -> Solution {
        Solution {
            assignment: self
                .names
                .iter()
                .zip(assignment)
                .enumerate()
                .map(|(i, (name, &k))| (name.clone(), self.domains[i][k as usize].clone()))
                .collect::<BTreeMap<_, _>>(),
        }
    }

    fn search(&self, rng: Option<&mut dyn RngCore>, visit: &mut dyn FnMut(&[u32]) -> bool) {
        if !self.ground_ok() {
            return;
        }
        let mut state = Search {
            assignment: vec![UNASSIGNED; self.names.len()],
            rng,
            visit,
            dead: HashSet::new(),
        };
        self.search_rec(0, &mut state);
    }

    /// Visits the solutions below depth `i`. Subtrees found to hold no
    /// solution are remembered by frontier values and not entered again.
    fn search_rec(&self, i: usize, st: &mut Search<'_, '_>) -> Flow {
        if i == st.assignment.len() {
            return if (st.visit)(&st.assignment) {
                Flow::Found
            } else {
                Flow::Stop
            };
        }
        let key = (
            i,
            self.frontier[i]
                .iter()
                .map(|&v| st.assignment[v])
                .collect::<Vec<_>>(),
        );
        if st.dead.contains(&key) {
            return Flow::Empty;
        }
        let mut order: Vec<u32> = (0..self.domains[i].len() as u32).collect();
        if let Some(rng) = st.rng.as_deref_mut() {
            order.shuffle(rng);
        }
        let mut found = false;
        for k in order {
            st.assignment[i] = k;
            if !self.consistent_after(i, &st.assignment) {
                continue;
            }
            match self.search_rec(i + 1, st) {
                Flow::Stop => {
                    st.assignment[i] = UNASSIGNED;
                    return Flow::Stop;
                }
                Flow::Found => found = true,
                Flow::Empty => {}
            }
        }
        st.assignment[i] = UNASSIGNED;
        if found {
            Flow::Found
        } else {
            if st.dead.len() < MEMO_CAP {
                st.dead.insert(key);
            }
            Flow::Empty
        }
    }

    fn consistent_after(&self, var: usize, assignment: &[u32]) -> bool {
        self.watch[var]
            .iter()
            .all(|&c| self.eval(&self.nodes[c], assignment) != Tri::False)
    }

    fn value_index(&self, var: usize, assignment: &[u32]) -> Option<usize> {
        match assignment.get(var) {
            Some(&k) if k != UNASSIGNED => Some(k as usize),
            _ => None,
        }
    }

    fn eval(&self, node: &Node, a: &[u32]) -> Tri {
        match node {
            Node::Const(b) => tri(*b),
            Node::Not(e) => self.eval(e, a).not(),
            Node::And(es) => {
                let mut out = Tri::True;
                for e in es {
                    match self.eval(e, a) {
                        Tri::False => return Tri::False,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::True => {}
                    }
                }
                out
            }
            Node::Or(es) => {
                let mut out = Tri::False;
                for e in es {
                    match self.eval(e, a) {
                        Tri::True => return Tri::True,
                        Tri::Unknown => out = Tri::Unknown,
                        Tri::False => {}
                    }
                }
                out
            }
            Node::Implies(p, q) => match self.eval(p, a) {
                Tri::False => Tri::True,
                Tri::True => self.eval(q, a),
                Tri::Unknown => match self.eval(q, a) {
                    Tri::True => Tri::True,
                    _ => Tri::Unknown,
                },
            },
            Node::Table { var, truth } => match self.value_index(*var, a) {
                Some(k) => tri(truth[k]),
                None => Tri::Unknown,
            },
            Node::Pair { left, op, right } => {
                match (self.value_index(*left, a), self.value_index(*right, a)) {
                    (Some(l), Some(r)) => {
                        tri(self.domains[*left][l].satisfies(*op, &self.domains[*right][r]))
                    }
                    _ => Tri::Unknown,
                }
            }
            Node::Arith {
                expr,
                op,
                value,
                floor,
            } => match (self.arith_small(expr, a), floor) {
                (Small::Unassigned, _) => Tri::Unknown,
                (Small::Int(lhs), Some((f, integral))) => {
                    // A non-integral bound lies strictly between f and f+1.
                    let ord = match (integral, lhs <= *f) {
                        (true, _) => lhs.cmp(f),
                        (false, true) => Ordering::Less,
                        (false, false) => Ordering::Greater,
                    };
                    tri(op.holds(ord))
                }
                _ => match self.arith(expr, a) {
                    Ok(Some(lhs)) => tri(op.holds(lhs.cmp(value))),
                    Ok(None) => Tri::False,
                    Err(()) => Tri::Unknown,
                },
            },
        }
    }

    /// Integer evaluation without allocation; `Big` when it does not apply.
    fn arith_small(&self, t: &Term, a: &[u32]) -> Small {
        match t {
            Term::Var(v) => match self.value_index(*v, a) {
                Some(k) => self.small[*v][k].map_or(Small::Big, Small::Int),
                None => Small::Unassigned,
            },
            Term::Binary(l, op, r) => {
                let (l, r) = match (self.arith_small(l, a), self.arith_small(r, a)) {
                    (Small::Unassigned, _) | (_, Small::Unassigned) => return Small::Unassigned,
                    (Small::Int(l), Small::Int(r)) => (l, r),
                    _ => return Small::Big,
                };
                let out = match op {
                    ArithOp::Add => l.checked_add(r),
                    ArithOp::Sub => l.checked_sub(r),
                    ArithOp::Mul => l.checked_mul(r),
                    ArithOp::Div => None,
                };
                out.map_or(Small::Big, Small::Int)
            }
        }
    }

    /// `Err` while some variable is unassigned, `Ok(None)` when undefined
    /// (division by zero or a non-numeric value).
    fn arith(&self, t: &Term, a: &[u32]) -> Result<Option<BigRational>, ()> {
        match t {
            Term::Var(v) => match self.value_index(*v, a) {
                Some(k) => Ok(self.numeric[*v][k].clone()),
                None => Err(()),
            },
            Term::Binary(l, op, r) => {
                let l = self.arith(l, a)?;
                let r = self.arith(r, a)?;
                let (Some(l), Some(r)) = (l, r) else {
                    return Ok(None);
                };
                Ok(match op {
                    ArithOp::Add => Some(l + r),
                    ArithOp::Sub => Some(l - r),
                    ArithOp::Mul => Some(l * r),
                    ArithOp::Div if r.is_zero() => None,
                    ArithOp::Div => Some(l / r),
                })
            }
        }
    }
}

enum Small {
    Unassigned,
    Int(i64),
    Big,
}

fn tri(b: bool) -> Tri {
    if b {
        Tri::True
    } else {
        Tri::False
    }
}

/// Records top-level `var == value` constraints, which restrict domains
/// before search. This is what lets a pinned continuous variable be solved.
fn collect_pins(
    c: &ConstraintExpr,
    index: &HashMap<&str, usize>,
    pinned: &mut [Option<Vec<Value>>],
) -> Result<(), CspError> {
    match c {
        ConstraintExpr::Cmp {
            var,
            op: RelOp::Eq,
            value,
        } => {
            let i = *index
                .get(var.as_str())
                .ok_or_else(|| CspError::UnknownVariable(var.clone()))?;
            pinned[i].get_or_insert_with(Vec::new).push(value.clone());
        }
        ConstraintExpr::And(es) => {
            for e in es {
                collect_pins(e, index, pinned)?;
            }
        }
        _ => {}
    }
    Ok(())
}

struct Compiler<'a> {
    index: &'a HashMap<&'a str, usize>,
    domains: &'a [Vec<Value>],
    arith_vars: Vec<usize>,
}

impl Compiler<'_> {
    fn var(&self, name: &str) -> Result<usize, CspError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| CspError::UnknownVariable(name.to_string()))
    }

    fn compile(&mut self, c: &ConstraintExpr) -> Result<Node, CspError> {
        Ok(match c {
            ConstraintExpr::Const(b) => Node::Const(*b),
            ConstraintExpr::Not(e) => Node::Not(Box::new(self.compile(e)?)),
            ConstraintExpr::And(es) => Node::And(
                es.iter()
                    .map(|e| self.compile(e))
                    .collect::<Result<_, _>>()?,
            ),
            ConstraintExpr::Or(es) => Node::Or(
                es.iter()
                    .map(|e| self.compile(e))
                    .collect::<Result<_, _>>()?,
            ),
            ConstraintExpr::Implies(a, b) => {
                Node::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?))
            }
            ConstraintExpr::Cmp { var, op, value } => {
                let v = self.var(var)?;
                Node::Table {
                    var: v,
                    truth: self.domains[v]
                        .iter()
                        .map(|d| d.satisfies(*op, value))
                        .collect(),
                }
            }
            ConstraintExpr::Like { var, pattern } => {
                let v = self.var(var)?;
                Node::Table {
                    var: v,
                    truth: self.domains[v]
                        .iter()
                        .map(|d| matches!(d, Value::Str(s) if like_matches(pattern, s)))
                        .collect(),
                }
            }
            ConstraintExpr::CmpVars { left, op, right } => Node::Pair {
                left: self.var(left)?,
                op: *op,
                right: self.var(right)?,
            },
            ConstraintExpr::Arith { expr, op, value } => {
                let value = value.to_rational();
                let floor = value
                    .floor()
                    .to_integer()
                    .to_i64()
                    .map(|f| (f, value.is_integer()));
                Node::Arith {
                    expr: self.term(expr)?,
                    op: *op,
                    value,
                    floor,
                }
            }
        })
    }

    fn term(&mut self, t: &ArithTerm) -> Result<Term, CspError> {
        Ok(match t {
            ArithTerm::Var(name) => {
                let v = self.var(name)?;
                self.arith_vars.push(v);
                Term::Var(v)
            }
            ArithTerm::Binary(l, op, r) => {
                Term::Binary(Box::new(self.term(l)?), *op, Box::new(self.term(r)?))
            }
        })
    }
}

/// `solve`: some solution, using the thread-local RNG for value ordering.
pub fn solve(csp: &CspProblem) -> Result<Option<Solution>, CspError> {
    solve_with_rng(csp, &mut rand::thread_rng())
}

pub fn solve_with_rng(
    csp: &CspProblem,
    rng: &mut dyn RngCore,
) -> Result<Option<Solution>, CspError> {
    Ok(Solver::new(csp)?.random(rng))
}

/// `solveAll`: every solution, deterministic order, no duplicates.
pub fn solve_all(csp: &CspProblem) -> Result<Vec<Solution>, CspError> {
    Ok(Solver::new(csp)?.all())
}

pub fn count_solutions(csp: &CspProblem) -> Result<u64, CspError> {
    Ok(Solver::new(csp)?.count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::CspVar;
    use rand::SeedableRng;

    fn bools(names: &[&str]) -> Vec<CspVar> {
        names
            .iter()
            .map(|n| CspVar::new(*n, Domain::booleans()))
            .collect()
    }

    fn t(v: &str) -> ConstraintExpr {
        ConstraintExpr::is_true(v)
    }

    #[test]
    fn unconstrained_count() {
        let csp = CspProblem {
            vars: bools(&["a", "b", "c"]),
            constraints: vec![],
        };
        assert_eq!(count_solutions(&csp).unwrap(), 8);
        assert_eq!(solve_all(&csp).unwrap().len(), 8);
    }

    #[test]
    fn exactly_one_of_three() {
        let at_least = ConstraintExpr::Or(vec![t("a"), t("b"), t("c")]);
        let mut constraints = vec![at_least];
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "c")] {
            constraints.push(ConstraintExpr::implies(t(x), ConstraintExpr::negate(t(y))));
        }
        let csp = CspProblem {
            vars: bools(&["a", "b", "c", "d"]),
            constraints,
        };
        assert_eq!(count_solutions(&csp).unwrap(), 6);
        let all = solve_all(&csp).unwrap();
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] != w[1]));
        assert!(all
            .iter()
            .all(|s| csp.constraints.iter().all(|c| c.eval(&s.assignment))));
    }

    #[test]
    fn unsatisfiable() {
        let csp = CspProblem {
            vars: bools(&["a"]),
            constraints: vec![t("a"), ConstraintExpr::negate(t("a"))],
        };
        assert_eq!(solve(&csp).unwrap(), None);
        assert_eq!(count_solutions(&csp).unwrap(), 0);
    }

    #[test]
    fn ground_false() {
        let csp = CspProblem {
            vars: bools(&["a"]),
            constraints: vec![ConstraintExpr::Const(false)],
        };
        assert_eq!(count_solutions(&csp).unwrap(), 0);
        assert!(solve_all(&csp).unwrap().is_empty());
    }

    #[test]
    fn continuous_needs_a_pin() {
        let mut csp = CspProblem {
            vars: vec![CspVar::new("x", Domain::Continuous)],
            constraints: vec![],
        };
        assert_eq!(
            count_solutions(&csp),
            Err(CspError::InfiniteDomain("x".into()))
        );
        csp.constraints
            .push(ConstraintExpr::eq("x", Value::Num("2.5".parse().unwrap())));
        assert_eq!(count_solutions(&csp).unwrap(), 1);
    }

    #[test]
    fn unknown_variable() {
        let csp = CspProblem {
            vars: bools(&["a"]),
            constraints: vec![t("b")],
        };
        assert!(matches!(Solver::new(&csp), Err(CspError::UnknownVariable(v)) if v == "b"));
    }

    #[test]
    fn seeded_random_is_reproducible() {
        let csp = CspProblem {
            vars: vec![CspVar::new(
                "n",
                Domain::Finite((0..50).map(Value::Int).collect()),
            )],
            constraints: vec![],
        };
        let solver = Solver::new(&csp).unwrap();
        let run = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|_| solver.random(&mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(7), run(7));
        assert!(run(7).iter().any(|s| s.get("n") != Some(&Value::Int(0))));
    }

    #[test]
    fn arithmetic_constraint() {
        let int = |n: &str| CspVar::new(n, Domain::Finite((0..=10).map(Value::Int).collect()));
        let csp = CspProblem {
            vars: vec![int("x"), int("y")],
            constraints: vec![ConstraintExpr::Arith {
                expr: ArithTerm::Binary(
                    Box::new(ArithTerm::Var("x".into())),
                    ArithOp::Add,
                    Box::new(ArithTerm::Var("y".into())),
                ),
                op: RelOp::Eq,
                value: 10.into(),
            }],
        };
        assert_eq!(count_solutions(&csp).unwrap(), 11);
    }
}
