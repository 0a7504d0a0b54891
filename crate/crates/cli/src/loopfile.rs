//! The text format for loops.
//!
//! ```text
//! # comments run to the end of the line
//! vars: x, y
//! body:
//!   x >= 0
//!   x' <= x + y
//!   y' <= y - 1
//! increasing: -1*y
//! candidate: 1*x + 1
//! ```

use std::fmt;

use elrf::linexpr::{LinExpr, Var};
use elrf::loop_model::{canonicalize, CandidateFn, RawConstraint, RawRelation, SlcLoop};
use elrf::polyhedron::Relation;
use elrf::rational::{parse_rational, Rational};
use num_traits::One;
use thiserror::Error;

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

/// A parsed loop file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopFile {
    pub lp: SlcLoop,
    pub increasing: Option<CandidateFn>,
    pub candidate: Option<CandidateFn>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String, bool),
    Num(Rational),
    Plus,
    Minus,
    Star,
    Comma,
    Rel(RawRelation),
}

struct Lexed {
    tok: Tok,
    col: usize,
}

fn lex(text: &str, line: usize, offset: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = offset + i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Lexed { tok, col });
            i += 1;
            continue;
        }
        if c == '<' || c == '>' || c == '=' {
            let next_eq = chars.get(i + 1) == Some(&'=');
            let rel = match (c, next_eq) {
                ('<', true) => RawRelation::Le,
                ('>', true) => RawRelation::Ge,
                ('=', false) => RawRelation::Eq,
                ('=', true) => return Err(ParseError::new(line, col, "use `=` for equality, not `==`")),
                _ => {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!("strict operator `{c}` is not allowed; use `<=`, `>=` or `=`"),
                    ))
                }
            };
            out.push(Lexed {
                tok: Tok::Rel(rel),
                col,
            });
            i += if next_eq { 2 } else { 1 };
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if chars.get(i) == Some(&'/') {
                i += 1;
                if !chars.get(i).is_some_and(|d| d.is_ascii_digit()) {
                    return Err(ParseError::new(line, offset + i + 1, "expected a denominator after `/`"));
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if chars.get(i) == Some(&'.') {
                return Err(ParseError::new(
                    line,
                    offset + i + 1,
                    "decimal numbers are not allowed; write rationals as `p/q`",
                ));
            }
            let literal: String = chars[start..i].iter().collect();
            let q = parse_rational(&literal)
                .ok_or_else(|| ParseError::new(line, col, format!("invalid number `{literal}`")))?;
            out.push(Lexed { tok: Tok::Num(q), col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let mut primed = false;
            if chars.get(i) == Some(&'\'') {
                primed = true;
                i += 1;
                if chars.get(i) == Some(&'\'') {
                    return Err(ParseError::new(line, offset + i + 1, "only one prime is allowed"));
                }
            }
            out.push(Lexed {
                tok: Tok::Ident(name, primed),
                col,
            });
            continue;
        }
        return Err(ParseError::new(line, col, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Cursor<'a> {
    toks: &'a [Lexed],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |l| l.col)
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), message)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|l| &l.tok);
        self.pos += 1;
        t
    }

    /// `['+'|'-'] term (('+'|'-') term)*` where a term is `q`, `v`, `v'` or
    /// `q*v`.
    fn expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut e = LinExpr::zero();
        let mut sign = Rational::one();
        match self.peek() {
            Some(Tok::Minus) => {
                sign = -sign;
                self.bump();
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        loop {
            self.term(&mut e, &sign)?;
            match self.peek() {
                Some(Tok::Plus) => sign = Rational::one(),
                Some(Tok::Minus) => sign = -Rational::one(),
                _ => return Ok(e),
            }
            self.bump();
        }
    }

    fn term(&mut self, e: &mut LinExpr, sign: &Rational) -> Result<(), ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(q)) => {
                self.bump();
                if self.peek() == Some(&Tok::Star) {
                    self.bump();
                    let v = self.var()?;
                    e.add_term(&v, sign * q);
                } else {
                    e.add_constant(&(sign * q));
                }
                Ok(())
            }
            Some(Tok::Ident(..)) => {
                let v = self.var()?;
                e.add_term(&v, sign.clone());
                Ok(())
            }
            _ => Err(self.err("expected a number or a variable")),
        }
    }

    fn var(&mut self) -> Result<Var, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name, primed)) => {
                self.bump();
                let v = Var::new(&name);
                Ok(if primed { v.primed() } else { v })
            }
            _ => Err(self.err("expected a variable")),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Vars,
    Body,
    Increasing,
    Candidate,
}

impl Section {
    fn header(line: &str) -> Option<(Section, usize)> {
        let (name, _) = line.split_once(':')?;
        let section = match name.trim() {
            "vars" => Section::Vars,
            "body" => Section::Body,
            "increasing" => Section::Increasing,
            "candidate" => Section::Candidate,
            _ => return None,
        };
        Some((section, name.len() + 1))
    }

    fn name(self) -> &'static str {
        match self {
            Section::Vars => "vars",
            Section::Body => "body",
            Section::Increasing => "increasing",
            Section::Candidate => "candidate",
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(code, _)| code)
}

fn cursor(toks: &[Lexed], line: usize, end_col: usize) -> Cursor<'_> {
    Cursor {
        toks,
        pos: 0,
        line,
        end_col,
    }
}

fn function(
    rest: &str,
    line: usize,
    offset: usize,
    vars: &[Var],
) -> Result<CandidateFn, ParseError> {
    let toks = lex(rest, line, offset)?;
    let mut c = cursor(&toks, line, offset + rest.chars().count() + 1);
    let e = c.expr()?;
    c.finish()?;
    CandidateFn::from_expr(&e, vars).map_err(|err| ParseError::new(line, offset + 1, err.to_string()))
}

/// Parses a loop file. Errors point at the offending line and column.
pub fn parse_loop_file(text: &str) -> Result<LoopFile, ParseError> {
    let mut vars: Option<Vec<Var>> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut current: Option<Section> = None;
    let mut raw: Vec<(usize, RawConstraint)> = Vec::new();
    let mut increasing = None;
    let mut candidate = None;
    let mut last_line = 0;

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let code = strip_comment(full);
        if code.trim().is_empty() {
            continue;
        }
        if let Some((section, consumed)) = Section::header(code) {
            let col = code.len() - code.trim_start().len() + 1;
            if seen.contains(&section) {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("duplicate `{}:` section", section.name()),
                ));
            }
            if section != Section::Vars && vars.is_none() {
                return Err(ParseError::new(line, col, "the file must start with `vars:`"));
            }
            seen.push(section);
            current = Some(section);
            let rest = &code[consumed..];
            let offset = code[..consumed].chars().count();
            match section {
                Section::Vars => {
                    let toks = lex(rest, line, offset)?;
                    let mut names = Vec::new();
                    let mut c = cursor(&toks, line, offset + rest.chars().count() + 1);
                    loop {
                        let col = c.col();
                        match c.bump().cloned() {
                            Some(Tok::Ident(name, false)) => {
                                let v = Var::new(&name);
                                if names.contains(&v) {
                                    return Err(ParseError::new(line, col, format!("duplicate variable `{name}`")));
                                }
                                names.push(v);
                            }
                            Some(Tok::Ident(_, true)) => {
                                return Err(ParseError::new(line, col, "declared variables must be unprimed"))
                            }
                            _ => return Err(ParseError::new(line, col, "expected a variable name")),
                        }
                        match c.peek() {
                            Some(Tok::Comma) => {
                                c.bump();
                            }
                            None => break,
                            _ => return Err(c.err("expected `,` between variables")),
                        }
                    }
                    vars = Some(names);
                }
                Section::Body => {
                    if !rest.trim().is_empty() {
                        let col = offset + rest.len() - rest.trim_start().len() + 1;
                        return Err(ParseError::new(line, col, "body constraints go on the following lines"));
                    }
                }
                Section::Increasing => {
                    increasing = Some(function(rest, line, offset, vars.as_deref().unwrap_or(&[]))?);
                }
                Section::Candidate => {
                    candidate = Some(function(rest, line, offset, vars.as_deref().unwrap_or(&[]))?);
                }
            }
            continue;
        }
        if current != Some(Section::Body) {
            let col = code.len() - code.trim_start().len() + 1;
            return Err(ParseError::new(line, col, "constraint outside the `body:` section"));
        }
        let toks = lex(code, line, 0)?;
        let mut c = cursor(&toks, line, code.chars().count() + 1);
        let lhs = c.expr()?;
        let relation = match c.bump().cloned() {
            Some(Tok::Rel(r)) => r,
            _ => {
                c.pos -= 1;
                return Err(c.err("expected `<=`, `>=` or `=`"));
            }
        };
        let rhs = c.expr()?;
        c.finish()?;
        raw.push((line, RawConstraint::new(lhs, relation, rhs)));
    }

    let vars = vars.ok_or_else(|| ParseError::new(last_line.max(1), 1, "missing `vars:` section"))?;
    if !seen.contains(&Section::Body) {
        return Err(ParseError::new(last_line.max(1), 1, "missing `body:` section"));
    }
    for (line, r) in &raw {
        canonicalize(std::slice::from_ref(r), &vars).map_err(|e| ParseError::new(*line, 1, e.to_string()))?;
    }
    let rows: Vec<RawConstraint> = raw.into_iter().map(|(_, r)| r).collect();
    let lp = canonicalize(&rows, &vars).map_err(|e| ParseError::new(1, 1, e.to_string()))?;
    Ok(LoopFile {
        lp,
        increasing,
        candidate,
    })
}

impl fmt::Display for LoopFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.lp.vars().iter().map(Var::name).collect();
        writeln!(f, "vars: {}", names.join(", "))?;
        writeln!(f, "body:")?;
        for row in self.lp.body().constraints() {
            let op = match row.relation {
                Relation::Eq => "=",
                _ => ">=",
            };
            writeln!(f, "  {} {op} 0", row.expr)?;
        }
        if let Some(g) = &self.increasing {
            writeln!(f, "increasing: {g}")?;
        }
        if let Some(rho) = &self.candidate {
            writeln!(f, "candidate: {rho}")?;
        }
        Ok(())
    }
}
