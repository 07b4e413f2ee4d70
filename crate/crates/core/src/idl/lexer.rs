//! Tokenizer. Keywords are case-sensitive; `//` starts a line comment.

use std::fmt;

use super::IdlError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    /// `[any text]`
    Bracketed(String),
    Str(String),
    /// Unsigned numeric literal text.
    Number(String),
    If,
    Then,
    And,
    /// Connector `OR`.
    OrConn,
    Not,
    Like,
    True,
    False,
    /// Predefined `Or`.
    OrDep,
    OnlyOne,
    AllOrNone,
    ZeroOrOne,
    LParen,
    RParen,
    Comma,
    Semi,
    Pipe,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Ident(s) => return write!(f, "identifier `{s}`"),
            Bracketed(s) => return write!(f, "parameter `[{s}]`"),
            Str(s) => return write!(f, "string '{s}'"),
            Number(s) => return write!(f, "number {s}"),
            If => "`IF`",
            Then => "`THEN`",
            And => "`AND`",
            OrConn => "`OR`",
            Not => "`NOT`",
            Like => "`LIKE`",
            True => "`true`",
            False => "`false`",
            OrDep => "`Or`",
            OnlyOne => "`OnlyOne`",
            AllOrNone => "`AllOrNone`",
            ZeroOrOne => "`ZeroOrOne`",
            LParen => "`(`",
            RParen => "`)`",
            Comma => "`,`",
            Semi => "`;`",
            Pipe => "`|`",
            Lt => "`<`",
            Gt => "`>`",
            Le => "`<=`",
            Ge => "`>=`",
            EqEq => "`==`",
            Ne => "`!=`",
            Plus => "`+`",
            Minus => "`-`",
            Star => "`*`",
            Slash => "`/`",
            Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

pub(crate) const KEYWORDS: &[(&str, TokenKind)] = &[
    ("IF", TokenKind::If),
    ("THEN", TokenKind::Then),
    ("AND", TokenKind::And),
    ("OR", TokenKind::OrConn),
    ("NOT", TokenKind::Not),
    ("LIKE", TokenKind::Like),
    ("true", TokenKind::True),
    ("false", TokenKind::False),
    ("Or", TokenKind::OrDep),
    ("OnlyOne", TokenKind::OnlyOne),
    ("AllOrNone", TokenKind::AllOrNone),
    ("ZeroOrOne", TokenKind::ZeroOrOne),
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.iter().any(|(k, _)| *k == s)
}

/// True if `s` can be written as a bare identifier.
pub(crate) fn is_plain_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(s)
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, IdlError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let syntax = |line, column, message: String| IdlError::Syntax {
        line,
        column,
        message,
    };

    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        let kind = match c {
            '(' => {
                advance(1, &mut i, &mut col);
                TokenKind::LParen
            }
            ')' => {
                advance(1, &mut i, &mut col);
                TokenKind::RParen
            }
            ',' => {
                advance(1, &mut i, &mut col);
                TokenKind::Comma
            }
            ';' => {
                advance(1, &mut i, &mut col);
                TokenKind::Semi
            }
            '|' => {
                advance(1, &mut i, &mut col);
                TokenKind::Pipe
            }
            '+' => {
                advance(1, &mut i, &mut col);
                TokenKind::Plus
            }
            '-' => {
                advance(1, &mut i, &mut col);
                TokenKind::Minus
            }
            '*' => {
                advance(1, &mut i, &mut col);
                TokenKind::Star
            }
            '/' => {
                advance(1, &mut i, &mut col);
                TokenKind::Slash
            }
            '<' | '>' | '=' | '!' => {
                let eq = chars.get(i + 1) == Some(&'=');
                let kind = match (c, eq) {
                    ('<', true) => TokenKind::Le,
                    ('<', false) => TokenKind::Lt,
                    ('>', true) => TokenKind::Ge,
                    ('>', false) => TokenKind::Gt,
                    ('=', true) => TokenKind::EqEq,
                    ('!', true) => TokenKind::Ne,
                    _ => {
                        return Err(syntax(
                            line,
                            col,
                            format!("unexpected character `{c}` (did you mean `{c}=`?)"),
                        ))
                    }
                };
                advance(if eq { 2 } else { 1 }, &mut i, &mut col);
                kind
            }
            '\'' => {
                let mut text = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => {
                            return Err(syntax(
                                start_line,
                                start_col,
                                "unterminated string literal".into(),
                            ))
                        }
                        Some('\\') if matches!(chars.get(j + 1), Some('\'') | Some('\\')) => {
                            text.push(chars[j + 1]);
                            j += 2;
                        }
                        Some('\'') => break,
                        Some(&ch) => {
                            text.push(ch);
                            j += 1;
                        }
                    }
                }
                advance(j + 1 - i, &mut i, &mut col);
                TokenKind::Str(text)
            }
            '[' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != ']' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&']') {
                    return Err(syntax(
                        start_line,
                        start_col,
                        "unterminated `[` parameter name".into(),
                    ));
                }
                let name: String = chars[i + 1..j].iter().collect();
                if name.is_empty() {
                    return Err(syntax(
                        start_line,
                        start_col,
                        "empty parameter name `[]`".into(),
                    ));
                }
                advance(j + 1 - i, &mut i, &mut col);
                TokenKind::Bracketed(name)
            }
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if chars.get(j) == Some(&'.')
                    && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit())
                {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                let text: String = chars[i..j].iter().collect();
                advance(j - i, &mut i, &mut col);
                TokenKind::Number(text)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                advance(j - i, &mut i, &mut col);
                KEYWORDS
                    .iter()
                    .find(|(k, _)| *k == text)
                    .map(|(_, kind)| kind.clone())
                    .unwrap_or(TokenKind::Ident(text))
            }
            other => return Err(syntax(line, col, format!("unexpected character `{other}`"))),
        };
        tokens.push(Token {
            kind,
            line: start_line,
            column: start_col,
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        column: col,
    });
    Ok(tokens)
}
