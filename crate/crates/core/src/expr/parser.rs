use std::fmt;

use num_traits::ToPrimitive;

use super::lexer::{tokenize, Token, TokenKind};
use super::{is_integer_literal, is_zero_literal, literal_value, Expr, Func};

/// Deepest tree the parser will build.
pub const MAX_DEPTH: usize = 200;
/// Largest accepted integer exponent.
pub const MAX_EXPONENT: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnknownFunction,
    BadExponent,
    UnbalancedParenthesis,
    /// `sqrt` applied to something that depends on `x`.
    NonConstantSqrt,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::UnexpectedToken => "unexpected token",
            ParseErrorKind::UnknownFunction => "unknown function",
            ParseErrorKind::BadExponent => "bad exponent",
            ParseErrorKind::UnbalancedParenthesis => "unbalanced parenthesis",
            ParseErrorKind::NonConstantSqrt => "sqrt of non-constant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, position: usize, message: impl Into<String>) -> Self {
        Self {
            kind,
            position,
            message: message.into(),
        }
    }
}

/// Parses the textual form of f(x).
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let len = text.chars().count();
    let mut p = Parser {
        tokens,
        pos: 0,
        end: len.saturating_sub(1),
    };
    let (e, _) = p.expr(0)?;
    match p.peek() {
        None => Ok(e),
        Some(t) if t.kind == TokenKind::RParen => Err(ParseError::new(
            ParseErrorKind::UnbalancedParenthesis,
            t.pos,
            "unmatched ')'",
        )),
        Some(t) => Err(ParseError::new(
            ParseErrorKind::UnexpectedToken,
            t.pos,
            format!("unexpected {} after complete expression", describe(&t.kind)),
        )),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Position reported for errors at end of input.
    end: usize,
}

type Parsed = (Expr, usize);

fn describe(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Number(r) => format!("number {r}"),
        TokenKind::Ident(s) => format!("identifier '{s}'"),
        TokenKind::Plus => "'+'".into(),
        TokenKind::Minus => "'-'".into(),
        TokenKind::Star => "'*'".into(),
        TokenKind::Slash => "'/'".into(),
        TokenKind::Caret => "'^'".into(),
        TokenKind::LParen => "'('".into(),
        TokenKind::RParen => "')'".into(),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn check_depth(&self, depth: usize) -> Result<usize, ParseError> {
        if depth > MAX_DEPTH {
            Err(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                self.here().min(self.end),
                format!("expression nested deeper than {MAX_DEPTH}"),
            ))
        } else {
            Ok(depth)
        }
    }

    fn expr(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.term(nesting)?;
        loop {
            let add = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Plus) => true,
                Some(TokenKind::Minus) => false,
                _ => return Ok((lhs, depth)),
            };
            self.pos += 1;
            let (rhs, rd) = self.term(nesting)?;
            depth = self.check_depth(depth.max(rd) + 1)?;
            lhs = if add {
                Expr::add(lhs, rhs)
            } else {
                Expr::sub(lhs, rhs)
            };
        }
    }

    fn term(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (mut lhs, mut depth) = self.unary(nesting)?;
        loop {
            let mul = match self.peek().map(|t| &t.kind) {
                Some(TokenKind::Star) => true,
                Some(TokenKind::Slash) => false,
                _ => return Ok((lhs, depth)),
            };
            self.pos += 1;
            let (rhs, rd) = self.unary(nesting)?;
            if !mul && is_integer_literal(&lhs) && is_integer_literal(&rhs) && !is_zero_literal(&rhs) {
                let q = literal_value(&lhs).unwrap() / literal_value(&rhs).unwrap();
                lhs = Expr::Literal(q);
                depth = 1;
                continue;
            }
            depth = self.check_depth(depth.max(rd) + 1)?;
            lhs = if mul {
                Expr::mul(lhs, rhs)
            } else {
                Expr::div(lhs, rhs)
            };
        }
    }

    fn unary(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        self.check_depth(nesting)?;
        if self.eat(&TokenKind::Minus) {
            let (operand, d) = self.unary(nesting + 1)?;
            let depth = self.check_depth(d + 1)?;
            return Ok((Expr::neg(operand), depth));
        }
        self.power(nesting)
    }

    fn power(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let (base, bd) = self.primary(nesting)?;
        if !self.eat(&TokenKind::Caret) {
            return Ok((base, bd));
        }
        let exp_pos = self.here();
        let (exponent, ed) = self.unary(nesting + 1)?;
        if base == Expr::E {
            let depth = self.check_depth(ed + 1)?;
            return Ok((Expr::apply(Func::Exp, exponent), depth));
        }
        let n = literal_value(&exponent)
            .filter(|_| is_integer_literal(&exponent))
            .and_then(|r| r.numer().to_u32())
            .filter(|n| *n <= MAX_EXPONENT);
        match n {
            Some(n) => {
                let depth = self.check_depth(bd + 1)?;
                Ok((Expr::pow(base, n), depth))
            }
            None => Err(ParseError::new(
                ParseErrorKind::BadExponent,
                exp_pos,
                format!(
                    "exponent must be an integer literal between 0 and {MAX_EXPONENT}, got {}",
                    exponent.render()
                ),
            )),
        }
    }

    fn primary(&mut self, nesting: usize) -> Result<Parsed, ParseError> {
        let here = self.here();
        let Some(tok) = self.next() else {
            return Err(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                here,
                "unexpected end of input",
            ));
        };
        match tok.kind {
            TokenKind::Number(r) => Ok((Expr::Literal(r), 1)),
            TokenKind::LParen => {
                let (inner, d) = self.expr(nesting + 1)?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(ParseError::new(
                        ParseErrorKind::UnbalancedParenthesis,
                        tok.pos,
                        "'(' is never closed",
                    ));
                }
                Ok((inner, d))
            }
            TokenKind::Ident(name) => {
                if self.peek().is_some_and(|t| t.kind == TokenKind::LParen) {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError::new(
                            ParseErrorKind::UnknownFunction,
                            tok.pos,
                            format!("unknown function '{name}'"),
                        ));
                    };
                    let open = self.next().expect("peeked").pos;
                    let (arg, d) = self.expr(nesting + 1)?;
                    if !self.eat(&TokenKind::RParen) {
                        return Err(ParseError::new(
                            ParseErrorKind::UnbalancedParenthesis,
                            open,
                            format!("'(' of {name} is never closed"),
                        ));
                    }
                    if func == Func::Sqrt && arg.contains_var() {
                        return Err(ParseError::new(
                            ParseErrorKind::NonConstantSqrt,
                            tok.pos,
                            "sqrt is only supported for constant arguments",
                        ));
                    }
                    let depth = self.check_depth(d + 1)?;
                    return Ok((Expr::apply(func, arg), depth));
                }
                match name.as_str() {
                    "x" => Ok((Expr::Var, 1)),
                    "pi" => Ok((Expr::Pi, 1)),
                    "e" => Ok((Expr::E, 1)),
                    _ if Func::from_name(&name).is_some() => Err(ParseError::new(
                        ParseErrorKind::UnexpectedToken,
                        tok.pos,
                        format!("function '{name}' needs a parenthesized argument"),
                    )),
                    _ => Err(ParseError::new(
                        ParseErrorKind::UnknownFunction,
                        tok.pos,
                        format!("unknown identifier '{name}'"),
                    )),
                }
            }
            TokenKind::RParen => Err(ParseError::new(
                ParseErrorKind::UnbalancedParenthesis,
                tok.pos,
                "unmatched ')'",
            )),
            other => Err(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                tok.pos,
                format!("unexpected {}", describe(&other)),
            )),
        }
    }
}
