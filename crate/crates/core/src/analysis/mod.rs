//! Analysis operations over an operation's dependencies: consistency, dead
//! and false-optional parameters, request validation, and request
//! enumeration, counting and sampling.

mod eval;

use std::collections::BTreeSet;

use rand::RngCore;
use serde::Serialize;

use crate::csp::{filter_csp, ConstraintExpr, CspError, CspProblem, Domain, Solution, Solver};
use crate::mapping::{map_spec, MappedSpec, OnlyOneSemantics};
use crate::model::{build_domains, IntWindow, OperationSpec, ParamDomain, Request, SpecError};
use crate::value::Value;

pub use eval::{dependency_holds, oracle_all_requests, violated_dependencies};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Csp(#[from] CspError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("parameter `{0}` is required, so it cannot be false optional")]
    NotOptional(String),
}

/// Search nodes [`Analyzer::analyze_all`] may spend on counting requests.
pub const REPORT_COUNT_BUDGET: u64 = 5_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub only_one: OnlyOneSemantics,
    pub int_window: IntWindow,
}

/// Summary produced by [`Analyzer::analyze_all`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    pub consistent: bool,
    pub dead_params: Vec<String>,
    pub false_optional_params: Vec<String>,
    pub valid_spec: bool,
    pub request_count: Option<u64>,
    pub diagnostics: Vec<String>,
}

/// An operation with finite domains built and its dependencies mapped once.
/// All queries are read-only, so an analyzer can be shared across threads.
pub struct Analyzer {
    original: OperationSpec,
    spec: OperationSpec,
    mapped: MappedSpec,
    /// `mapped.csp` plus one constraint per parameter fixing its value
    /// variable to the first domain value while absent, so that solutions
    /// and requests correspond one to one.
    request_csp: CspProblem,
    options: AnalysisOptions,
}

impl Analyzer {
    pub fn new(spec: &OperationSpec) -> Self {
        Analyzer::with_options(spec, AnalysisOptions::default())
    }

    pub fn with_options(spec: &OperationSpec, options: AnalysisOptions) -> Self {
        let built = build_domains(spec, options.int_window);
        let mapped = map_spec(&built, options.only_one);
        let mut request_csp = mapped.csp.clone();
        for p in &built.parameters {
            let vars = &mapped.param_index[&p.name];
            let canonical = canonical_value(&mapped.csp, &vars.value);
            request_csp.constraints.push(ConstraintExpr::implies(
                ConstraintExpr::negate(ConstraintExpr::is_true(&vars.presence)),
                ConstraintExpr::eq(&vars.value, canonical),
            ));
        }
        Analyzer {
            original: spec.clone(),
            spec: built,
            mapped,
            request_csp,
            options,
        }
    }

    /// The operation with finite stand-in domains.
    pub fn spec(&self) -> &OperationSpec {
        &self.spec
    }

    pub fn mapped(&self) -> &MappedSpec {
        &self.mapped
    }

    pub fn options(&self) -> AnalysisOptions {
        self.options
    }

    /// Some request satisfies every dependency.
    pub fn is_consistent(&self) -> Result<bool, AnalysisError> {
        Ok(Solver::new(&self.mapped.csp)?.is_satisfiable())
    }

    /// No valid request includes `param`.
    pub fn is_dead_parameter(&self, param: &str) -> Result<bool, AnalysisError> {
        let set = self.presence(param)?;
        Ok(!self.satisfiable_with(&[(set, Value::Bool(true))])?)
    }

    /// Every valid request includes `param` although it is optional. False
    /// for inconsistent operations.
    pub fn is_false_optional(&self, param: &str) -> Result<bool, AnalysisError> {
        let set = self.presence(param)?;
        if self.spec.param(param).is_some_and(|p| p.required) {
            return Err(AnalysisError::NotOptional(param.to_string()));
        }
        Ok(self.is_consistent()? && !self.satisfiable_with(&[(set, Value::Bool(false))])?)
    }

    /// Consistent, with no dead and no false-optional parameters.
    pub fn is_valid_spec(&self) -> Result<bool, AnalysisError> {
        if !self.is_consistent()? {
            return Ok(false);
        }
        Ok(self.dead_parameters()?.is_empty() && self.false_optional_parameters()?.is_empty())
    }

    pub fn dead_parameters(&self) -> Result<Vec<String>, AnalysisError> {
        let mut out = Vec::new();
        for p in &self.spec.parameters {
            if self.is_dead_parameter(&p.name)? {
                out.push(p.name.clone());
            }
        }
        Ok(out)
    }

    pub fn false_optional_parameters(&self) -> Result<Vec<String>, AnalysisError> {
        if !self.is_consistent()? {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        for p in self.spec.parameters.iter().filter(|p| !p.required) {
            let set = self.presence(&p.name)?;
            if !self.satisfiable_with(&[(set, Value::Bool(false))])? {
                out.push(p.name.clone());
            }
        }
        Ok(out)
    }

    /// `r` lists exactly the parameters sent, and together they satisfy
    /// every dependency and requirement.
    pub fn is_valid_request(&self, r: &Request) -> Result<bool, AnalysisError> {
        let mut pins = self.request_pins(r)?;
        for p in &self.spec.parameters {
            if !r.contains(&p.name) {
                let vars = &self.mapped.param_index[&p.name];
                pins.push((vars.presence.clone(), Value::Bool(false)));
                pins.push((
                    vars.value.clone(),
                    canonical_value(&self.mapped.csp, &vars.value),
                ));
            }
        }
        self.satisfiable_with(&pins)
    }

    /// `s` can be extended with further parameters into a valid request.
    pub fn is_valid_partial_request(&self, s: &Request) -> Result<bool, AnalysisError> {
        let pins = self.request_pins(s)?;
        self.satisfiable_with(&pins)
    }

    /// Every valid request. Needs all domains finite.
    pub fn all_requests(&self) -> Result<BTreeSet<Request>, AnalysisError> {
        let solver = Solver::new(&self.request_csp)?;
        let mut out = BTreeSet::new();
        solver.for_each(|s| {
            out.insert(self.decode(&s));
            true
        });
        Ok(out)
    }

    pub fn number_of_requests(&self) -> Result<u64, AnalysisError> {
        Ok(Solver::new(&self.request_csp)?.count())
    }

    /// [`Analyzer::number_of_requests`], or `None` if counting needs more
    /// than `budget` search nodes.
    pub fn number_of_requests_within(&self, budget: u64) -> Result<Option<u64>, AnalysisError> {
        Ok(Solver::new(&self.request_csp)?.count_within(budget))
    }

    /// A valid request picked with randomized search. Not uniform.
    pub fn random_request(&self, rng: &mut dyn RngCore) -> Result<Option<Request>, AnalysisError> {
        Ok(Solver::new(&self.request_csp)?
            .random(rng)
            .map(|s| self.decode(&s)))
    }

    /// Samples `n` requests reusing one compiled solver.
    pub fn random_requests(
        &self,
        n: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<Request>, AnalysisError> {
        let solver = Solver::new(&self.request_csp)?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            match solver.random(rng) {
                Some(s) => out.push(self.decode(&s)),
                None => break,
            }
        }
        Ok(out)
    }

    /// Indices of the dependencies that `r` violates.
    pub fn violated_dependencies(&self, r: &Request) -> Vec<usize> {
        violated_dependencies(&self.spec, r, self.options.only_one)
    }

    pub fn analyze_all(&self) -> Result<AnalysisReport, AnalysisError> {
        let mut diagnostics = Vec::new();
        let consistent = self.is_consistent()?;
        let (dead_params, false_optional_params) = if consistent {
            (self.dead_parameters()?, self.false_optional_parameters()?)
        } else {
            diagnostics.push(
                "no request satisfies all dependencies; per-parameter checks skipped".to_string(),
            );
            (Vec::new(), Vec::new())
        };
        for p in &dead_params {
            diagnostics.push(format!("parameter `{p}` is dead"));
        }
        for p in &false_optional_params {
            diagnostics.push(format!("parameter `{p}` is false optional"));
        }
        let request_count = if self.spec.is_finite() {
            let n = self.number_of_requests_within(REPORT_COUNT_BUDGET)?;
            if n.is_none() {
                diagnostics.push(
                    "request count unavailable: too many requests to count exhaustively"
                        .to_string(),
                );
            }
            n
        } else {
            diagnostics.push(
                "request count unavailable: some parameter has a continuous domain".to_string(),
            );
            None
        };
        Ok(AnalysisReport {
            consistent,
            valid_spec: consistent && dead_params.is_empty() && false_optional_params.is_empty(),
            dead_params,
            false_optional_params,
            request_count,
            diagnostics,
        })
    }

    /// Brute-force counterpart of [`Analyzer::all_requests`].
    pub fn oracle_all_requests(&self) -> Result<BTreeSet<Request>, AnalysisError> {
        oracle_all_requests(&self.spec, self.options.only_one)
    }

    fn presence(&self, param: &str) -> Result<String, AnalysisError> {
        self.mapped
            .presence_var(param)
            .map(str::to_string)
            .ok_or_else(|| AnalysisError::UnknownParameter(param.to_string()))
    }

    fn satisfiable_with(&self, pins: &[(String, Value)]) -> Result<bool, AnalysisError> {
        let csp = filter_csp(&self.mapped.csp, pins)?;
        Ok(Solver::new(&csp)?.is_satisfiable())
    }

    /// Value and presence pins for every binding of `r`, after checking
    /// each value against the declared domain.
    fn request_pins(&self, r: &Request) -> Result<Vec<(String, Value)>, AnalysisError> {
        let mut pins = Vec::new();
        for (name, value) in &r.bindings {
            let param = self
                .original
                .param(name)
                .ok_or_else(|| AnalysisError::UnknownParameter(name.clone()))?;
            check_value(name, &param.domain, value)?;
            let vars = &self.mapped.param_index[name];
            pins.push((vars.value.clone(), value.clone()));
            pins.push((vars.presence.clone(), Value::Bool(true)));
        }
        Ok(pins)
    }

    fn decode(&self, s: &Solution) -> Request {
        self.spec
            .parameters
            .iter()
            .filter_map(|p| {
                let vars = &self.mapped.param_index[&p.name];
                match s.get(&vars.presence) {
                    Some(Value::Bool(true)) => Some((p.name.clone(), s.get(&vars.value)?.clone())),
                    _ => None,
                }
            })
            .collect()
    }
}

fn canonical_value(csp: &CspProblem, var: &str) -> Value {
    match csp.var(var).map(|v| &v.domain) {
        Some(Domain::Finite(values)) if !values.is_empty() => values[0].clone(),
        _ => Value::Int(0),
    }
}

fn check_value(name: &str, domain: &ParamDomain, value: &Value) -> Result<(), SpecError> {
    let mismatch = |expected: &'static str| {
        Err(SpecError::TypeMismatch {
            param: name.to_string(),
            value: value.to_string(),
            expected,
        })
    };
    match (domain, value) {
        (ParamDomain::Boolean, Value::Bool(_)) => Ok(()),
        (ParamDomain::Boolean, _) => mismatch("boolean"),
        (ParamDomain::IntRange { min, max }, Value::Int(i)) if (min..=max).contains(&i) => Ok(()),
        (ParamDomain::IntRange { .. }, Value::Int(_)) => {
            mismatch("value within the declared range")
        }
        (ParamDomain::EnumInt { values }, Value::Int(i)) if values.contains(i) => Ok(()),
        (ParamDomain::EnumInt { .. }, Value::Int(_)) => mismatch("member of the declared enum"),
        (ParamDomain::OpenInt { min, max }, Value::Int(i)) => {
            if min.is_some_and(|m| *i < m) || max.is_some_and(|m| *i > m) {
                mismatch("value within the declared range")
            } else {
                Ok(())
            }
        }
        (d, _) if d.is_integer() => mismatch("integer"),
        (ParamDomain::EnumString { values }, Value::Str(s)) if values.contains(s) => Ok(()),
        (ParamDomain::EnumString { .. }, Value::Str(_)) => mismatch("member of the declared enum"),
        (ParamDomain::OpenString, Value::Str(_)) => Ok(()),
        (d, _) if d.is_string() => mismatch("string"),
        (ParamDomain::Continuous, v) if v.is_numeric() => Ok(()),
        _ => mismatch("number"),
    }
}
