//! Textual policy language.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! policy := expr
//! expr   := leaf | "and(" list ")" | "or(" list ")" | "thresh(" INT "," list ")"
//! list   := expr ("," expr)*
//! leaf   := "att" INT          -- 1-based attribute id
//! ```
//!
//! `and` becomes a threshold gate over all children, `or` a threshold-1
//! gate, and `thresh(k, ...)` requires 1 <= k <= arity.

use std::fmt::Write as _;

use super::{AccessTree, Node, PolicyError};

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: u32,
    column: u32,
}

fn syntax(line: u32, column: u32, message: impl Into<String>) -> PolicyError {
    PolicyError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, PolicyError> {
    let mut tokens = Vec::new();
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    while let Some(c) = cur.peek() {
        let (tok_line, tok_col) = (cur.line, cur.column);
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let kind = match c {
            '(' => {
                cur.bump();
                TokenKind::LParen
            }
            ')' => {
                cur.bump();
                TokenKind::RParen
            }
            ',' => {
                cur.bump();
                TokenKind::Comma
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::new();
                while matches!(cur.peek(), Some(d) if d.is_ascii_digit()) {
                    digits.push(cur.bump().unwrap());
                }
                let value = digits
                    .parse::<u64>()
                    .map_err(|_| syntax(tok_line, tok_col, "integer literal too large"))?;
                TokenKind::Int(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while matches!(cur.peek(), Some(d) if d.is_ascii_alphanumeric() || d == '_') {
                    ident.push(cur.bump().unwrap());
                }
                TokenKind::Ident(ident)
            }
            other => {
                return Err(syntax(
                    tok_line,
                    tok_col,
                    format!("unexpected character '{other}'"),
                ))
            }
        };
        tokens.push(Token {
            kind,
            line: tok_line,
            column: tok_col,
        });
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line: cur.line,
        column: cur.column,
    });
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let tok = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, PolicyError> {
        let tok = self.next();
        if tok.kind == kind {
            Ok(tok)
        } else {
            Err(syntax(tok.line, tok.column, format!("expected {what}")))
        }
    }

    fn parse_expr(&mut self) -> Result<Node, PolicyError> {
        let tok = self.next();
        let (ident, line, column) = match &tok.kind {
            TokenKind::Ident(s) => (s.clone(), tok.line, tok.column),
            _ => {
                return Err(syntax(
                    tok.line,
                    tok.column,
                    "expected a policy expression (attN, and, or, thresh)",
                ))
            }
        };
        match ident.as_str() {
            "and" => {
                let children = self.parse_list()?;
                Ok(Node::inner(children.len(), children))
            }
            "or" => {
                let children = self.parse_list()?;
                Ok(Node::inner(1, children))
            }
            "thresh" => {
                self.expect(TokenKind::LParen, "'(' after thresh")?;
                let k_tok = self.next();
                let threshold = match k_tok.kind {
                    TokenKind::Int(v) => v,
                    _ => {
                        return Err(syntax(
                            k_tok.line,
                            k_tok.column,
                            "expected a threshold integer",
                        ))
                    }
                };
                self.expect(TokenKind::Comma, "',' after the threshold")?;
                let mut children = vec![self.parse_expr()?];
                while self.peek().kind == TokenKind::Comma {
                    self.next();
                    children.push(self.parse_expr()?);
                }
                self.expect(TokenKind::RParen, "')' closing thresh")?;
                if threshold == 0 {
                    return Err(syntax(
                        k_tok.line,
                        k_tok.column,
                        "threshold must be at least 1",
                    ));
                }
                if threshold as usize > children.len() {
                    return Err(syntax(
                        k_tok.line,
                        k_tok.column,
                        format!(
                            "threshold {threshold} exceeds child count {}",
                            children.len()
                        ),
                    ));
                }
                Ok(Node::inner(threshold as usize, children))
            }
            leaf => {
                let digits = leaf.strip_prefix("att").unwrap_or("");
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(syntax(
                        line,
                        column,
                        format!("unknown policy term '{leaf}'"),
                    ));
                }
                let attribute: u32 = digits
                    .parse()
                    .map_err(|_| syntax(line, column, "attribute id too large"))?;
                if attribute == 0 {
                    return Err(syntax(line, column, "attribute ids are 1-based"));
                }
                Ok(Node::leaf(attribute))
            }
        }
    }

    fn parse_list(&mut self) -> Result<Vec<Node>, PolicyError> {
        self.expect(TokenKind::LParen, "'('")?;
        let mut children = vec![self.parse_expr()?];
        while self.peek().kind == TokenKind::Comma {
            self.next();
            children.push(self.parse_expr()?);
        }
        self.expect(TokenKind::RParen, "')'")?;
        Ok(children)
    }
}

/// Parses a policy expression into an access tree.
pub fn parse_policy(text: &str) -> Result<AccessTree, PolicyError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let root = parser.parse_expr()?;
    let trailing = parser.peek();
    if trailing.kind != TokenKind::Eof {
        return Err(syntax(
            trailing.line,
            trailing.column,
            "unexpected trailing input",
        ));
    }
    AccessTree::new(root)
}

/// Canonical text form; `parse_policy(&format_policy(t))` rebuilds `t`.
pub fn format_policy(tree: &AccessTree) -> String {
    fn fmt(node: &Node, out: &mut String) {
        match node {
            Node::Leaf { attribute } => {
                let _ = write!(out, "att{attribute}");
            }
            Node::Inner {
                threshold,
                children,
            } => {
                if *threshold == 1 && children.len() > 1 {
                    out.push_str("or(");
                } else if *threshold == children.len() {
                    out.push_str("and(");
                } else {
                    let _ = write!(out, "thresh({threshold}, ");
                }
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    fmt(child, out);
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    fmt(tree.root(), &mut out);
    out
}
