//! Canonical text form: one dependency per line, each `;`-terminated.

use std::fmt::Write;

use super::ast::*;
use super::lexer::is_plain_ident;

pub fn render_idl(model: &DependencyModel) -> String {
    let mut out = String::new();
    for dep in &model.dependencies {
        out.push_str(&render_dependency(dep));
        out.push_str(";\n");
    }
    out
}

/// Renders one dependency without the trailing `;`.
pub fn render_dependency(dep: &Dependency) -> String {
    let mut s = String::new();
    write_dependency(&mut s, dep);
    s
}

pub fn render_predicate(pred: &Predicate) -> String {
    let mut s = String::new();
    write_predicate(&mut s, pred);
    s
}

pub fn render_param(p: &ParamRef) -> String {
    if is_plain_ident(p.name()) {
        p.name().to_string()
    } else {
        format!("[{}]", p.name())
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

fn write_dependency(out: &mut String, dep: &Dependency) {
    match dep {
        Dependency::Requires {
            condition,
            consequence,
        } => {
            out.push_str("IF ");
            write_predicate(out, condition);
            out.push_str(" THEN ");
            write_predicate(out, consequence);
        }
        Dependency::Predefined(p) => write_predefined(out, p),
        Dependency::Relational(r) => write_relational(out, r),
        Dependency::Arithmetic(a) => write_arithmetic(out, a),
    }
}

fn write_predefined(out: &mut String, p: &PredefinedDependency) {
    if p.negated {
        out.push_str("NOT ");
    }
    out.push_str(p.kind.keyword());
    out.push('(');
    for (i, c) in p.clauses.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_predicate(out, c);
    }
    out.push(')');
}

fn write_relational(out: &mut String, r: &RelationalDependency) {
    let _ = write!(
        out,
        "{} {} {}",
        render_param(&r.left),
        r.op.symbol(),
        render_param(&r.right)
    );
}

fn write_arithmetic(out: &mut String, a: &ArithmeticDependency) {
    write_arith(out, &a.operation, false);
    let _ = write!(out, " {} {}", a.op.symbol(), a.value);
}

/// `right_operand` marks a position where a bare chain would re-associate,
/// so a nested binary there gets parentheses.
fn write_arith(out: &mut String, e: &ArithExpr, right_operand: bool) {
    match e {
        ArithExpr::Param(p) => out.push_str(&render_param(p)),
        ArithExpr::Group(inner) => {
            out.push('(');
            write_arith(out, inner, false);
            out.push(')');
        }
        ArithExpr::Binary { left, op, right } => {
            if right_operand {
                out.push('(');
            }
            write_arith(out, left, false);
            let _ = write!(out, " {} ", op.symbol());
            write_arith(out, right, true);
            if right_operand {
                out.push(')');
            }
        }
    }
}

fn write_predicate(out: &mut String, pred: &Predicate) {
    write_clause(out, &pred.first);
    if let Some((conn, rest)) = &pred.rest {
        out.push_str(match conn {
            Connector::And => " AND ",
            Connector::Or => " OR ",
        });
        write_predicate(out, rest);
    }
}

fn write_clause(out: &mut String, clause: &Clause) {
    match clause {
        Clause::Term(t) => {
            if t.negated {
                out.push_str("NOT ");
            }
            match &t.content {
                TermContent::Param(p) => out.push_str(&render_param(p)),
                TermContent::Relation(rel) => write_relation(out, rel),
            }
        }
        Clause::Relational(r) => write_relational(out, r),
        Clause::Arithmetic(a) => write_arithmetic(out, a),
        Clause::Predefined(p) => write_predefined(out, p),
        Clause::Group { negated, inner } => {
            if *negated {
                out.push_str("NOT ");
            }
            out.push('(');
            write_predicate(out, inner);
            out.push(')');
        }
    }
}

fn write_relation(out: &mut String, rel: &ParamValueRelation) {
    match rel {
        ParamValueRelation::StringIn { param, values } => {
            out.push_str(&render_param(param));
            out.push_str("==");
            let quoted: Vec<String> = values.iter().map(|v| quote(v)).collect();
            out.push_str(&quoted.join("|"));
        }
        ParamValueRelation::Like { param, pattern } => {
            let _ = write!(out, "{} LIKE {}", render_param(param), quote(pattern));
        }
        ParamValueRelation::BoolEq { param, value } => {
            let _ = write!(out, "{}=={}", render_param(param), value);
        }
        ParamValueRelation::NumCmp { param, op, value } => {
            let _ = write!(out, "{}{}{}", render_param(param), op.symbol(), value);
        }
    }
}
