//! Recursive descent parser producing [`DependencyModel`].

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::validate::validate_model;
use super::IdlError;
use crate::decimal::Decimal;

/// Parses and validates a document.
pub fn parse_idl(source: &str) -> Result<DependencyModel, IdlError> {
    let (model, lines) = parse_unvalidated(source)?;
    let mut diagnostics = validate_model(&model);
    if diagnostics.is_empty() {
        return Ok(model);
    }
    for d in &mut diagnostics {
        d.line = lines.get(d.dependency).copied();
    }
    Err(IdlError::Validation(diagnostics))
}

/// Parses without running structural validation. Returns the model and the
/// starting line of each dependency.
pub fn parse_unvalidated(source: &str) -> Result<(DependencyModel, Vec<usize>), IdlError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut deps = Vec::new();
    let mut lines = Vec::new();
    while parser.peek() != &TokenKind::Eof {
        lines.push(parser.current().line);
        deps.push(parser.dependency()?);
        parser.expect(TokenKind::Semi, "`;` after dependency")?;
    }
    Ok((DependencyModel::new(deps), lines))
}

type PResult<T> = Result<T, IdlError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

fn relop(kind: &TokenKind) -> Option<RelOp> {
    Some(match kind {
        TokenKind::Lt => RelOp::Lt,
        TokenKind::Gt => RelOp::Gt,
        TokenKind::Le => RelOp::Le,
        TokenKind::Ge => RelOp::Ge,
        TokenKind::EqEq => RelOp::Eq,
        TokenKind::Ne => RelOp::Ne,
        _ => return None,
    })
}

fn arithop(kind: &TokenKind) -> Option<ArithOp> {
    Some(match kind {
        TokenKind::Plus => ArithOp::Add,
        TokenKind::Minus => ArithOp::Sub,
        TokenKind::Star => ArithOp::Mul,
        TokenKind::Slash => ArithOp::Div,
        _ => return None,
    })
}

fn predefined_kind(kind: &TokenKind) -> Option<PredefinedKind> {
    Some(match kind {
        TokenKind::OrDep => PredefinedKind::Or,
        TokenKind::OnlyOne => PredefinedKind::OnlyOne,
        TokenKind::AllOrNone => PredefinedKind::AllOrNone,
        TokenKind::ZeroOrOne => PredefinedKind::ZeroOrOne,
        _ => return None,
    })
}

fn is_param(kind: &TokenKind) -> bool {
    matches!(kind, TokenKind::Ident(_) | TokenKind::Bracketed(_))
}

impl Parser {
    fn current(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, n: usize) -> &TokenKind {
        let idx = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn bump(&mut self) -> TokenKind {
        let k = self.tokens[self.pos].kind.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        k
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = self.current();
        Err(IdlError::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        self.error(format!("expected {expected}, found {}", self.peek()))
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<()> {
        if *self.peek() == kind {
            self.bump();
            Ok(())
        } else {
            self.unexpected(what)
        }
    }

    fn param(&mut self) -> PResult<ParamRef> {
        match self.peek().clone() {
            TokenKind::Ident(s) | TokenKind::Bracketed(s) => {
                self.bump();
                Ok(ParamRef(s))
            }
            _ => self.unexpected("a parameter name"),
        }
    }

    /// Optionally signed numeric literal.
    fn number(&mut self) -> PResult<Decimal> {
        let neg = if *self.peek() == TokenKind::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            TokenKind::Number(text) => {
                self.bump();
                let text = if neg { format!("-{text}") } else { text };
                match text.parse() {
                    Ok(d) => Ok(d),
                    Err(_) => self.error(format!("invalid number `{text}`")),
                }
            }
            _ => self.unexpected("a number"),
        }
    }

    fn dependency(&mut self) -> PResult<Dependency> {
        match self.peek().clone() {
            TokenKind::If => {
                self.bump();
                let condition = self.predicate()?;
                self.expect(TokenKind::Then, "`THEN`")?;
                let consequence = self.predicate()?;
                Ok(Dependency::Requires {
                    condition,
                    consequence,
                })
            }
            TokenKind::Not => {
                if predefined_kind(self.peek_at(1)).is_none() {
                    self.bump();
                    return self.error("only predefined dependencies (Or, OnlyOne, AllOrNone, ZeroOrOne) may be negated at top level");
                }
                self.bump();
                let mut d = self.predefined()?;
                d.negated = true;
                Ok(Dependency::Predefined(d))
            }
            k if predefined_kind(&k).is_some() => Ok(Dependency::Predefined(self.predefined()?)),
            TokenKind::LParen => Ok(Dependency::Arithmetic(self.arithmetic_dependency()?)),
            k if is_param(&k) => {
                let next = self.peek_at(1).clone();
                if arithop(&next).is_some() {
                    Ok(Dependency::Arithmetic(self.arithmetic_dependency()?))
                } else if relop(&next).is_some() && is_param(self.peek_at(2)) {
                    let left = self.param()?;
                    let op = relop(&self.bump()).expect("checked");
                    let right = self.param()?;
                    Ok(Dependency::Relational(RelationalDependency {
                        left,
                        op,
                        right,
                    }))
                } else {
                    self.bump();
                    self.error(
                        "a parameter or parameter-value relation is not a dependency on its own; expected a relational or arithmetic dependency",
                    )
                }
            }
            _ => self.unexpected(
                "a dependency (IF, Or, OnlyOne, AllOrNone, ZeroOrOne, relational or arithmetic)",
            ),
        }
    }

    fn predefined(&mut self) -> PResult<PredefinedDependency> {
        let kind = match predefined_kind(self.peek()) {
            Some(k) => k,
            None => return self.unexpected("Or, OnlyOne, AllOrNone or ZeroOrOne"),
        };
        self.bump();
        self.expect(TokenKind::LParen, "`(`")?;
        let mut clauses = vec![self.predicate()?];
        while *self.peek() == TokenKind::Comma {
            self.bump();
            clauses.push(self.predicate()?);
        }
        if clauses.len() < 2 {
            return self.error(format!("{} needs at least two elements", kind.keyword()));
        }
        self.expect(TokenKind::RParen, "`)` or `,`")?;
        Ok(PredefinedDependency {
            kind,
            negated: false,
            clauses,
        })
    }

    fn predicate(&mut self) -> PResult<Predicate> {
        let first = self.clause()?;
        let connector = match self.peek() {
            TokenKind::And => Connector::And,
            TokenKind::OrConn => Connector::Or,
            _ => return Ok(Predicate { first, rest: None }),
        };
        self.bump();
        let rest = self.predicate()?;
        Ok(Predicate {
            first,
            rest: Some((connector, Box::new(rest))),
        })
    }

    fn clause(&mut self) -> PResult<Clause> {
        match self.peek().clone() {
            TokenKind::Not => {
                self.bump();
                match self.peek().clone() {
                    TokenKind::LParen => self.group(true),
                    k if predefined_kind(&k).is_some() => {
                        let mut d = self.predefined()?;
                        d.negated = true;
                        Ok(Clause::Predefined(d))
                    }
                    k if is_param(&k) => match self.param_led(true)? {
                        c @ Clause::Term(_) => Ok(c),
                        _ => self.error("`NOT` cannot prefix a relational or arithmetic dependency; use parentheses"),
                    },
                    _ => self.unexpected("a parameter, `(` or a predefined dependency after `NOT`"),
                }
            }
            TokenKind::LParen => {
                let save = self.pos;
                if let Ok(a) = self.arithmetic_dependency() {
                    return Ok(Clause::Arithmetic(a));
                }
                self.pos = save;
                self.group(false)
            }
            k if predefined_kind(&k).is_some() => Ok(Clause::Predefined(self.predefined()?)),
            k if is_param(&k) => self.param_led(false),
            TokenKind::If => self.error(
                "Requires dependencies (IF ... THEN ...) cannot be nested inside predicates",
            ),
            _ => self.unexpected("a term, `(`, or a dependency"),
        }
    }

    fn group(&mut self, negated: bool) -> PResult<Clause> {
        self.expect(TokenKind::LParen, "`(`")?;
        let inner = self.predicate()?;
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(Clause::Group {
            negated,
            inner: Box::new(inner),
        })
    }

    /// A clause that starts with a parameter name.
    fn param_led(&mut self, negated: bool) -> PResult<Clause> {
        if arithop(self.peek_at(1)).is_some() {
            return Ok(Clause::Arithmetic(self.arithmetic_dependency()?));
        }
        let param = self.param()?;
        let term = |rel| {
            Clause::Term(Term {
                negated,
                content: TermContent::Relation(rel),
            })
        };
        match self.peek().clone() {
            TokenKind::Like => {
                self.bump();
                match self.bump() {
                    TokenKind::Str(pattern) => {
                        Ok(term(ParamValueRelation::Like { param, pattern }))
                    }
                    _ => {
                        self.pos -= 1;
                        self.unexpected("a quoted pattern after `LIKE`")
                    }
                }
            }
            k if relop(&k).is_some() => {
                let op = relop(&k).expect("checked");
                self.bump();
                match self.peek().clone() {
                    TokenKind::Str(first) if op == RelOp::Eq => {
                        self.bump();
                        let mut values = vec![first];
                        while *self.peek() == TokenKind::Pipe {
                            self.bump();
                            match self.bump() {
                                TokenKind::Str(s) => values.push(s),
                                _ => {
                                    self.pos -= 1;
                                    return self.unexpected("a quoted string after `|`");
                                }
                            }
                        }
                        Ok(term(ParamValueRelation::StringIn { param, values }))
                    }
                    TokenKind::Str(_) => self.error("strings can only be compared with `==`"),
                    TokenKind::True | TokenKind::False if op == RelOp::Eq => {
                        let value = self.bump() == TokenKind::True;
                        Ok(term(ParamValueRelation::BoolEq { param, value }))
                    }
                    TokenKind::Number(_) | TokenKind::Minus => {
                        let value = self.number()?;
                        Ok(term(ParamValueRelation::NumCmp { param, op, value }))
                    }
                    k if is_param(&k) => {
                        let right = self.param()?;
                        Ok(Clause::Relational(RelationalDependency {
                            left: param,
                            op,
                            right,
                        }))
                    }
                    _ => self.unexpected("a value or parameter after the relational operator"),
                }
            }
            _ => Ok(Clause::Term(Term {
                negated,
                content: TermContent::Param(param),
            })),
        }
    }

    fn arithmetic_dependency(&mut self) -> PResult<ArithmeticDependency> {
        let operation = self.arith_expr()?;
        if operation.leaves().len() < 2 {
            return self.error("an arithmetic dependency needs at least two parameters");
        }
        let op = match relop(self.peek()) {
            Some(op) => op,
            None => return self.unexpected("a relational operator after the arithmetic operation"),
        };
        self.bump();
        let value = self.number()?;
        Ok(ArithmeticDependency {
            operation,
            op,
            value,
        })
    }

    fn arith_expr(&mut self) -> PResult<ArithExpr> {
        let mut acc = self.arith_primary()?;
        while let Some(op) = arithop(self.peek()) {
            self.bump();
            let right = self.arith_primary()?;
            acc = ArithExpr::binary(acc, op, right);
        }
        Ok(acc)
    }

    fn arith_primary(&mut self) -> PResult<ArithExpr> {
        if *self.peek() == TokenKind::LParen {
            self.bump();
            let inner = self.arith_expr()?;
            self.expect(TokenKind::RParen, "`)`")?;
            Ok(ArithExpr::Group(Box::new(inner)))
        } else {
            Ok(ArithExpr::Param(self.param()?))
        }
    }
}
