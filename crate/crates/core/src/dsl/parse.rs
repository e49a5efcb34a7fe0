//! Tokenizer and recursive-descent parser for `.geo` problem text.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::construct::{Arg, Clause, ConstructionStmt, Constructor};
use super::predicate::{PointName, Predicate, PredicateKind};
use super::{ParseError, Problem};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Semi,
    Question,
    Bang,
    Equals,
    Comma,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Semi => "';'".into(),
            Tok::Question => "'?'".into(),
            Tok::Bang => "'!'".into(),
            Tok::Equals => "'='".into(),
            Tok::Comma => "','".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    pos: usize,
}

fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_whitespace() => i += 1,
            b';' | b'?' | b'!' | b'=' | b',' => {
                let tok = match c {
                    b';' => Tok::Semi,
                    b'?' => Tok::Question,
                    b'!' => Tok::Bang,
                    b'=' => Tok::Equals,
                    _ => Tok::Comma,
                };
                out.push(Spanned { tok, pos: i });
                i += 1;
            }
            c if c.is_ascii_lowercase() => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(src[start..i].to_string()), pos: start });
            }
            c if c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.' => {
                let start = i;
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || ((bytes[i] == b'-' || bytes[i] == b'+') && bytes[i - 1] == b'e'))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                    pos: start,
                    expected: "number".into(),
                    found: format!("'{text}'"),
                })?;
                out.push(Spanned { tok: Tok::Num(value), pos: start });
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax { pos: i, expected: "token".into(), found: format!("'{ch}'") });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(src)?, idx: 0, end: src.len() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|s| &s.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |s| s.pos)
    }

    fn found(&self) -> String {
        self.peek().map_or_else(|| "end of input".to_string(), Tok::describe)
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), expected: expected.to_string(), found: self.found() }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn at_end(&self) -> bool {
        self.idx >= self.toks.len()
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match self.toks.get(self.idx) {
            Some(Spanned { tok: Tok::Ident(s), pos }) => {
                let r = (s.clone(), *pos);
                self.idx += 1;
                Ok(r)
            }
            _ => Err(self.error(what)),
        }
    }

    fn statement(&mut self) -> Result<(ConstructionStmt, usize), ParseError> {
        let start = self.pos();
        let allow_double = self.eat(&Tok::Bang);
        let mut new_points = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let (name, _) = self.ident("point name")?;
            new_points.push(PointName::new(&name)?);
        }
        if new_points.is_empty() {
            return Err(self.error("point name"));
        }
        self.expect(&Tok::Equals, "'='")?;
        let primary = self.clause(new_points.len())?;
        let mut constraints = Vec::new();
        while self.eat(&Tok::Comma) {
            let clause_pos = self.pos();
            if new_points.len() != 1 {
                return Err(ParseError::Arity {
                    what: "constrained statement (new points)".into(),
                    expected: "1".into(),
                    found: new_points.len(),
                    pos: clause_pos,
                });
            }
            constraints.push(self.clause(1)?);
        }
        Ok((
            ConstructionStmt {
                new_points,
                constructor: primary.constructor,
                args: primary.args,
                allow_double,
                constraints,
            },
            start,
        ))
    }

    fn clause(&mut self, new_points: usize) -> Result<Clause, ParseError> {
        let pos = self.pos();
        let (name, _) = self.ident("constructor")?;
        let constructor = Constructor::from_name(&name).ok_or_else(|| ParseError::Syntax {
            pos,
            expected: "constructor".into(),
            found: format!("'{name}'"),
        })?;
        let mut args = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) => {
                    let (n, _) = self.ident("point")?;
                    args.push(Arg::Point(PointName::new(&n)?));
                }
                Some(Tok::Num(x)) => {
                    args.push(Arg::Num(*x));
                    self.idx += 1;
                }
                _ => break,
            }
        }
        let clause = Clause { constructor, args };
        check_clause_shape(&clause, new_points, pos)?;
        Ok(clause)
    }

    fn predicate(&mut self) -> Result<(Predicate, usize), ParseError> {
        let pos = self.pos();
        let (name, _) = self.ident("predicate")?;
        let kind = PredicateKind::from_name(&name).ok_or_else(|| ParseError::Syntax {
            pos,
            expected: "predicate".into(),
            found: format!("'{name}'"),
        })?;
        let mut args = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            let (n, _) = self.ident("point")?;
            args.push(PointName::new(&n)?);
        }
        let pred = Predicate::new(kind, args).map_err(|e| match e {
            ParseError::Arity { what, expected, found, .. } => ParseError::Arity { what, expected, found, pos },
            other => other,
        })?;
        Ok((pred, pos))
    }
}

fn check_clause_shape(clause: &Clause, new_points: usize, pos: usize) -> Result<(), ParseError> {
    let sig = clause.constructor.signature();
    if sig.new_points != new_points {
        return Err(ParseError::Arity {
            what: format!("{} (new points)", clause.constructor),
            expected: sig.new_points.to_string(),
            found: new_points,
            pos,
        });
    }
    // Numeric literals must trail the point arguments.
    let first_num = clause.args.iter().position(|a| matches!(a, Arg::Num(_))).unwrap_or(clause.args.len());
    if clause.args[first_num..].iter().any(|a| matches!(a, Arg::Point(_))) {
        return Err(ParseError::Syntax { pos, expected: "numeric arguments last".into(), found: "point".into() });
    }
    let points = clause.point_args();
    let nums = clause.args.len() - points.len();
    if points.len() != sig.point_args {
        return Err(ParseError::Arity {
            what: clause.constructor.name().to_string(),
            expected: sig.point_args.to_string(),
            found: points.len(),
            pos,
        });
    }
    if !sig.numeric_args.contains(&nums) {
        return Err(ParseError::Arity {
            what: format!("{} (numeric)", clause.constructor),
            expected: format!("{:?}", sig.numeric_args),
            found: nums,
            pos,
        });
    }
    for group in clause.constructor.distinct_args() {
        for (i, &a) in group.iter().enumerate() {
            for &b in &group[i + 1..] {
                if points[a] == points[b] {
                    return Err(ParseError::RepeatedInSlot {
                        predicate: clause.constructor.name().to_string(),
                        point: points[a].to_string(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Checks forward references and duplicates of `stmt` against `defined`, then
/// records its new points. `pos` is reported in errors.
pub(crate) fn admit_statement(
    defined: &mut BTreeSet<PointName>,
    stmt: &ConstructionStmt,
    pos: usize,
) -> Result<(), ParseError> {
    for p in stmt.referenced_points() {
        if !defined.contains(&p) {
            return Err(ParseError::UndefinedPoint { name: p.to_string(), pos });
        }
        if stmt.new_points.contains(&p) {
            return Err(ParseError::UndefinedPoint { name: p.to_string(), pos });
        }
    }
    let mut seen = BTreeSet::new();
    for p in &stmt.new_points {
        if !seen.insert(p.clone()) || (defined.contains(p) && !stmt.allow_double) {
            return Err(ParseError::DuplicatePoint { name: p.to_string(), pos });
        }
    }
    // A `!` statement re-using a name constrains the existing point.
    if stmt.allow_double && stmt.new_points.iter().any(|p| defined.contains(p)) && stmt.new_points.len() != 1 {
        return Err(ParseError::DuplicatePoint { name: stmt.new_points[0].to_string(), pos });
    }
    defined.extend(stmt.new_points.iter().cloned());
    Ok(())
}

/// Parses `problem := stmt (';' stmt)* '?' goal (';' goal)*`.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let src = text.to_lowercase();
    let mut p = Parser::new(&src)?;
    let mut defined = BTreeSet::new();
    let mut constructions = Vec::new();
    loop {
        let (stmt, pos) = p.statement()?;
        admit_statement(&mut defined, &stmt, pos)?;
        constructions.push(stmt);
        if p.eat(&Tok::Semi) {
            continue;
        }
        if p.eat(&Tok::Question) {
            break;
        }
        return Err(p.error("';' or '?'"));
    }
    let mut goals = Vec::new();
    loop {
        let (goal, pos) = p.predicate()?;
        for a in &goal.args {
            if !defined.contains(a) {
                return Err(ParseError::UndefinedPoint { name: a.to_string(), pos });
            }
        }
        goals.push(goal);
        if p.eat(&Tok::Semi) {
            continue;
        }
        if p.at_end() {
            break;
        }
        return Err(p.error("';' or end of input"));
    }
    Ok(Problem { constructions, goals })
}

/// Parses `stmt (';' stmt)*` without checking point definitions.
pub fn parse_statements(text: &str) -> Result<Vec<ConstructionStmt>, ParseError> {
    let src = text.to_lowercase();
    let mut p = Parser::new(&src)?;
    let mut out = Vec::new();
    loop {
        let (stmt, _) = p.statement()?;
        out.push(stmt);
        if p.eat(&Tok::Semi) {
            if p.at_end() {
                break;
            }
            continue;
        }
        if p.at_end() {
            break;
        }
        return Err(p.error("';' or end of input"));
    }
    Ok(out)
}

/// Parses a single predicate such as `cong a b a c`.
pub fn parse_predicate(text: &str) -> Result<Predicate, ParseError> {
    let src = text.to_lowercase();
    let mut p = Parser::new(&src)?;
    let (pred, _) = p.predicate()?;
    if !p.at_end() {
        return Err(p.error("end of predicate"));
    }
    Ok(pred)
}

/// Parses a comma-separated predicate list, as used on rule lines.
pub(crate) fn parse_predicate_list(text: &str) -> Result<Vec<Predicate>, ParseError> {
    let src = text.to_lowercase();
    let mut p = Parser::new(&src)?;
    let mut out = Vec::new();
    if p.at_end() {
        return Ok(out);
    }
    loop {
        let (pred, _) = p.predicate()?;
        out.push(pred);
        if p.eat(&Tok::Comma) {
            continue;
        }
        if p.at_end() {
            break;
        }
        return Err(p.error("',' or end of list"));
    }
    Ok(out)
}
