//! Inter-parameter dependencies of web API operations: a small language to
//! write them down, a compiler to constraint satisfaction problems, and
//! analysis operations on top (consistency, dead and false-optional
//! parameters, request validation and generation).
//!
//! ```
//! use idl_core::{parse_idl, Analyzer, OperationSpec, Parameter, ParamDomain, Request};
//!
//! let model = parse_idl("IF p1 THEN p2;").unwrap();
//! let spec = OperationSpec::new(
//!     "op",
//!     vec![
//!         Parameter::optional("p1", ParamDomain::Boolean),
//!         Parameter::optional("p2", ParamDomain::Boolean),
//!     ],
//!     model,
//! )
//! .unwrap();
//! let analyzer = Analyzer::new(&spec);
//! assert!(analyzer.is_consistent().unwrap());
//! assert!(!analyzer.is_valid_request(&Request::new().with("p1", true)).unwrap());
//! ```

pub mod analysis;
pub mod csp;
pub mod decimal;
pub mod idl;
pub mod like;
pub mod mapping;
pub mod model;
pub mod value;

pub use analysis::{AnalysisError, AnalysisOptions, AnalysisReport, Analyzer};
pub use csp::{ConstraintExpr, CspError, CspProblem, CspVar, Domain, Solution};
pub use decimal::Decimal;
pub use idl::{parse_idl, render_idl, DependencyModel, IdlError};
pub use mapping::{map_spec, render_csp, MappedSpec, OnlyOneSemantics};
pub use model::{
    build_domains, load_idl4oas, load_spec_files, IntWindow, OperationSpec, ParamDomain, Parameter,
    Request, SpecError,
};
pub use value::Value;
