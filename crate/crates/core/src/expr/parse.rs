use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Plus => f.write_str("'+'"),
            Tok::Minus => f.write_str("'-'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
            Tok::Caret => f.write_str("'^'"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    /// Unexpected token; `expected` lists what would have been accepted.
    Syntax { found: String, expected: Vec<&'static str> },
    UnknownFunction(String),
    Arity { func: &'static str, expected: usize, found: usize },
    BadNumber(String),
    BadChar(char),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: ", self.offset)?;
        match &self.kind {
            ParseErrorKind::Syntax { found, expected } => {
                write!(f, "found {found}, expected one of {{{}}}", expected.join(", "))
            }
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function '{name}'"),
            ParseErrorKind::Arity { func, expected, found } => {
                write!(f, "{func} takes {expected} argument(s), got {found}")
            }
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number '{s}'"),
            ParseErrorKind::BadChar(c) => write!(f, "unexpected character '{c}'"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Tok::Plus, start)),
            b'-' => out.push((Tok::Minus, start)),
            b'*' => out.push((Tok::Star, start)),
            b'/' => out.push((Tok::Slash, start)),
            b'^' => out.push((Tok::Caret, start)),
            b'(' => out.push((Tok::LParen, start)),
            b')' => out.push((Tok::RParen, start)),
            b',' => out.push((Tok::Comma, start)),
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let x: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadNumber(text.to_string()),
                })?;
                out.push((Tok::Num(x), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError { offset: start, kind: ParseErrorKind::BadChar(ch) });
            }
        }
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

const PRIMARY_START: &[&str] = &["number", "'t'", "identifier", "'('", "'-'"];

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, expected: &[&'static str]) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Syntax {
                found: self.peek().to_string(),
                expected: expected.to_vec(),
            },
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.primary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.syntax(&["')'", "'+'", "'-'", "'*'", "'/'", "'^'"]);
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name).ok_or(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    self.bump();
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return self.syntax(&["')'", "','", "'+'", "'-'", "'*'", "'/'", "'^'"]);
                    }
                    self.bump();
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset,
                            kind: ParseErrorKind::Arity {
                                func: func.name(),
                                expected: func.arity(),
                                found: args.len(),
                            },
                        });
                    }
                    return Ok(Expr::Call(func, args));
                }
                if Func::from_name(&name).is_some() {
                    return self.syntax(&["'('"]);
                }
                Ok(match name.as_str() {
                    "t" => Expr::Var,
                    "euler" => Expr::Euler,
                    _ => Expr::Param(name),
                })
            }
            _ => self.syntax(PRIMARY_START),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax(&["end of input", "'+'", "'-'", "'*'", "'/'", "'^'"]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_polynomial() {
        let e = parse_expr("t^2 + 1").unwrap();
        assert_eq!(
            e,
            Expr::bin(
                BinOp::Add,
                Expr::bin(BinOp::Pow, Expr::Var, Expr::Num(2.0)),
                Expr::Num(1.0)
            )
        );
    }

    #[test]
    fn parameters_are_collected() {
        let e = parse_expr("m * t^(m-1)").unwrap();
        assert_eq!(e.params(), vec!["m".to_string()]);
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse_expr("2^3^2").unwrap();
        assert_eq!(
            e,
            Expr::bin(
                BinOp::Pow,
                Expr::Num(2.0),
                Expr::bin(BinOp::Pow, Expr::Num(3.0), Expr::Num(2.0))
            )
        );
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let e = parse_expr("-t^2").unwrap();
        assert_eq!(
            e,
            Expr::bin(BinOp::Pow, Expr::Neg(Box::new(Expr::Var)), Expr::Num(2.0))
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse_expr("1.5e-3").unwrap(), Expr::Num(1.5e-3));
        assert_eq!(parse_expr("2E+2").unwrap(), Expr::Num(200.0));
        assert_eq!(parse_expr(".5").unwrap(), Expr::Num(0.5));
    }

    #[test]
    fn unknown_function_is_an_error() {
        let err = parse_expr("1 + foo(t)").unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
    }

    #[test]
    fn syntax_error_reports_offset_and_expected() {
        let err = parse_expr("t + * 2").unwrap_err();
        assert_eq!(err.offset, 4);
        match err.kind {
            ParseErrorKind::Syntax { expected, .. } => assert!(expected.contains(&"number")),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_expr("(t + 1").unwrap_err();
        assert_eq!(err.offset, 6);
        assert!(parse_expr("t t").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn arity_checked() {
        assert!(matches!(
            parse_expr("pow(t)").unwrap_err().kind,
            ParseErrorKind::Arity { .. }
        ));
        assert!(parse_expr("max(t, 1)").is_ok());
    }

    #[test]
    fn function_name_without_call_rejected() {
        assert!(parse_expr("exp + 1").is_err());
    }

    #[test]
    fn bad_character() {
        let err = parse_expr("t # 2").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadChar('#'));
        assert_eq!(err.offset, 2);
    }
}
