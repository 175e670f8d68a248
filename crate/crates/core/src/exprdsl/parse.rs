//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := ("-")? power
//! power  := atom ("^" integer)?
//! atom   := number | ident | ident "(" expr ")" | "(" expr ")"
//! ```

use thiserror::Error;

use super::expr::{Expr, Func};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected one of {expected:?}, found {found}")]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

/// Names visible to the parser.
#[derive(Clone, Debug)]
pub struct ParseContext {
    pub coords: [String; 4],
    /// `None` accepts any other identifier as a parameter.
    pub params: Option<Vec<String>>,
}

impl Default for ParseContext {
    fn default() -> Self {
        Self {
            coords: ["x0", "x1", "x2", "x3"].map(String::from),
            params: None,
        }
    }
}

impl ParseContext {
    pub fn with_coords(names: [&str; 4]) -> Self {
        Self {
            coords: names.map(String::from),
            params: None,
        }
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }
}

/// Parses with the default context (`x0..x3`, free parameters).
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, &ParseContext::default())
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.pos < p.tokens.len() {
        return Err(p.error(&["+", "-", "*", "/", "end of input"]));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integral = true;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                integral &= bytes[i] != b'.';
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                expected: vec!["number"],
                found: format!("`{lit}`"),
            })?;
            out.push((Tok::Num(v, integral), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                offset: i,
                expected: vec!["number", "identifier", "operator"],
                found: format!("`{}`", &text[i..].chars().next().unwrap_or(c)),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a ParseContext,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Num(v, _)) => format!("number {v}"),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Op(c)) => format!("`{c}`"),
        };
        ParseError::Syntax {
            offset: self.offset(),
            expected: expected.to_vec(),
            found,
        }
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::raw_add(lhs, self.term()?);
            } else if self.eat('-') {
                lhs = Expr::raw_sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat('*') {
                lhs = Expr::raw_mul(lhs, self.factor()?);
            } else if self.eat('/') {
                lhs = Expr::raw_div(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(Expr::raw_neg(self.power()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let negative = self.eat('-');
        match self.peek() {
            Some(Tok::Num(v, true)) if *v <= i32::MAX as f64 => {
                let n = *v as i32;
                self.pos += 1;
                Ok(Expr::raw_pow(base, if negative { -n } else { n }))
            }
            _ => Err(self.error(&["integer exponent"])),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.peek().cloned() {
            Some(Tok::Num(v, _)) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&[")"]));
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let f = Func::from_name(&name).ok_or(ParseError::UnknownFunction {
                        name: name.clone(),
                        offset,
                    })?;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.error(&[")"]));
                    }
                    return Ok(Expr::raw_call(f, arg));
                }
                if let Some(i) = self.ctx.coord_index(&name) {
                    return Ok(Expr::coord(i));
                }
                match &self.ctx.params {
                    Some(known) if !known.iter().any(|k| *k == name) => {
                        Err(ParseError::UnknownIdentifier { name, offset })
                    }
                    _ => Ok(Expr::param(&name)),
                }
            }
            _ => Err(self.error(&["number", "identifier", "("])),
        }
    }
}
