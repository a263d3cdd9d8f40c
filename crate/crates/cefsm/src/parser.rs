//! Line-oriented CEFSM syntax.
//!
//! ```text
//! # comment
//! vars
//!   crp 0..3 = 3          # name lo..hi = initial value
//! channels
//!   fd rs
//! template Processor 3    # name, replica count
//!   locations Run Free Repairing Down
//!   initial Run           # optional, defaults to the first location
//!   Run -> Down U do crp--, cfp++
//!   Free -> Repairing C !fd
//!   Repairing -> Free R when crm < 3 !rs
//! error
//!   cfp >= crp || crm == 0
//! ```
//!
//! Transition lines are `Src -> Dst KIND [when EXPR] [!ch | ?ch] [do UPDATES]`
//! with `KIND` one of `U` (failure), `C` (controlled) and `R` (repair).
//! Updates are `x++`, `x--` or `x = EXPR`, separated by commas. Expressions
//! use `|| && ! == != < <= > >= + - *`, parentheses, integers, `true`,
//! `false`, variable names and `Template.Location` (number of replicas of
//! the template in that location). Several `error` lines are or-ed.
//! Section headers may carry their content on the same line
//! (`channels fd rs`, `error crm == 0`).

use std::collections::HashMap;
use std::fmt;

use resilience_core::EdgeKind;
use thiserror::Error;

use crate::ast::{BinOp, CefsmModel, Expr, LocalTransition, Sync, Template, Update, UpdateOp, VarDecl};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

fn error_at<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    DotDot,
    Dot,
    Assign,
    EqEq,
    Ne,
    Le,
    Ge,
    Lt,
    Gt,
    Bang,
    Question,
    OrOr,
    AndAnd,
    Plus,
    Minus,
    Star,
    PlusPlus,
    MinusMinus,
    LParen,
    RParen,
    Comma,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(v) => return write!(f, "`{v}`"),
            Tok::Arrow => "->",
            Tok::DotDot => "..",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::OrOr => "||",
            Tok::AndAnd => "&&",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::PlusPlus => "++",
            Tok::MinusMinus => "--",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
        };
        write!(f, "`{s}`")
    }
}

fn lex_line(text: &str, line: usize) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: i + 1 };
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s
                .parse()
                .map_err(|_| ParseError {
                    line,
                    column: start + 1,
                    message: format!("integer `{s}` out of range"),
                })?;
            out.push((Tok::Int(v), pos));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('-', Some('-')) => (Tok::MinusMinus, 2),
            ('+', Some('+')) => (Tok::PlusPlus, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('-', _) => (Tok::Minus, 1),
            ('+', _) => (Tok::Plus, 1),
            ('*', _) => (Tok::Star, 1),
            ('.', _) => (Tok::Dot, 1),
            ('=', _) => (Tok::Assign, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('!', _) => (Tok::Bang, 1),
            ('?', _) => (Tok::Question, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            _ => return error_at(pos, format!("unexpected character `{c}`")),
        };
        out.push((tok, pos));
        i += width;
    }
    Ok(out)
}

/// Expression with unresolved names.
#[derive(Clone, Debug)]
enum RawExpr {
    Int(i64),
    Name(String, Pos),
    Qualified(String, String, Pos),
    Not(Box<RawExpr>),
    Neg(Box<RawExpr>),
    Bin(BinOp, Box<RawExpr>, Box<RawExpr>),
}

#[derive(Clone, Debug)]
enum RawUpdate {
    Inc,
    Dec,
    Assign(RawExpr),
}

#[derive(Clone, Debug)]
struct RawTransition {
    src: (String, Pos),
    dst: (String, Pos),
    kind: EdgeKind,
    guard: Option<RawExpr>,
    sync: Option<(bool, String, Pos)>,
    updates: Vec<(String, Pos, RawUpdate)>,
    line: usize,
}

#[derive(Clone, Debug)]
struct RawTemplate {
    name: String,
    pos: Pos,
    count: u32,
    locations: Vec<(String, Pos)>,
    initial: Option<(String, Pos)>,
    transitions: Vec<RawTransition>,
}

struct Cursor<'a> {
    toks: &'a [(Tok, Pos)],
    i: usize,
    end: Pos,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.i).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.i).map(|(t, _)| t);
        self.i += 1;
        t
    }

    fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        match self.peek() {
            Some(t) => error_at(self.pos(), format!("expected {wanted}, found {t}")),
            None => error_at(self.pos(), format!("expected {wanted}, found end of line")),
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.i += 1;
                Ok((s.clone(), pos))
            }
            _ => self.unexpected(what),
        }
    }

    fn int(&mut self, what: &str) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(v)) => {
                self.i += 1;
                Ok(if neg { -v } else { *v })
            }
            _ => self.unexpected(what),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            self.unexpected("end of line")
        }
    }

    fn expr(&mut self) -> Result<RawExpr, ParseError> {
        self.binary(0)
    }

    fn binary(&mut self, min_prec: u8) -> Result<RawExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let (op, prec) = match self.peek() {
                Some(Tok::OrOr) => (BinOp::Or, 1),
                Some(Tok::AndAnd) => (BinOp::And, 2),
                Some(Tok::EqEq) => (BinOp::Eq, 3),
                Some(Tok::Ne) => (BinOp::Ne, 3),
                Some(Tok::Lt) => (BinOp::Lt, 3),
                Some(Tok::Le) => (BinOp::Le, 3),
                Some(Tok::Gt) => (BinOp::Gt, 3),
                Some(Tok::Ge) => (BinOp::Ge, 3),
                Some(Tok::Plus) => (BinOp::Add, 4),
                Some(Tok::Minus) => (BinOp::Sub, 4),
                Some(Tok::Star) => (BinOp::Mul, 5),
                _ => return Ok(lhs),
            };
            if prec < min_prec {
                return Ok(lhs);
            }
            self.i += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = RawExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<RawExpr, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Bang) => {
                self.i += 1;
                Ok(RawExpr::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Minus) => {
                self.i += 1;
                Ok(RawExpr::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Int(v)) => {
                self.i += 1;
                Ok(RawExpr::Int(*v))
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.i += 1;
                Ok(RawExpr::Int(1))
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.i += 1;
                Ok(RawExpr::Int(0))
            }
            Some(Tok::Ident(s)) => {
                self.i += 1;
                if self.eat(&Tok::Dot) {
                    let (loc, _) = self.ident("location name")?;
                    Ok(RawExpr::Qualified(s.clone(), loc, pos))
                } else {
                    Ok(RawExpr::Name(s.clone(), pos))
                }
            }
            _ => self.unexpected("expression"),
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq)]
enum Section {
    Top,
    Vars,
    Channels,
    Template,
    Error,
}

const KEYWORDS: [&str; 8] = ["vars", "channels", "template", "error", "locations", "initial", "when", "do"];

fn check_name(name: &str, pos: Pos) -> Result<(), ParseError> {
    if KEYWORDS.contains(&name) || name == "true" || name == "false" {
        return error_at(pos, format!("`{name}` is a keyword"));
    }
    Ok(())
}

struct RawModel {
    vars: Vec<(VarDecl, Pos)>,
    channels: Vec<(String, Pos)>,
    templates: Vec<RawTemplate>,
    errors: Vec<RawExpr>,
}

fn parse_raw(text: &str) -> Result<RawModel, ParseError> {
    let mut model = RawModel {
        vars: Vec::new(),
        channels: Vec::new(),
        templates: Vec::new(),
        errors: Vec::new(),
    };
    let mut section = Section::Top;
    let mut last_line = 0;
    for (idx, line_text) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks = lex_line(line_text, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks: &toks,
            i: 0,
            end: Pos {
                line,
                column: line_text.chars().count() + 1,
            },
        };
        if let Some(Tok::Ident(head)) = c.peek() {
            let header = match head.as_str() {
                "vars" => Some(Section::Vars),
                "channels" => Some(Section::Channels),
                "error" => Some(Section::Error),
                "template" => Some(Section::Template),
                _ => None,
            };
            if let Some(h) = header {
                c.bump();
                section = h;
                if h == Section::Template {
                    let (name, pos) = c.ident("template name")?;
                    check_name(&name, pos)?;
                    let count_pos = c.pos();
                    let count = c.int("replica count")?;
                    if !(1..=u32::MAX as i64).contains(&count) {
                        return error_at(count_pos, "replica count must be at least 1");
                    }
                    c.finish()?;
                    model.templates.push(RawTemplate {
                        name,
                        pos,
                        count: count as u32,
                        locations: Vec::new(),
                        initial: None,
                        transitions: Vec::new(),
                    });
                    continue;
                }
                if c.at_end() {
                    continue;
                }
            }
        }
        match section {
            Section::Top => return c.unexpected("`vars`, `channels`, `template` or `error`"),
            Section::Vars => {
                let (name, pos) = c.ident("variable name")?;
                check_name(&name, pos)?;
                let lo = c.int("lower bound")?;
                c.expect(&Tok::DotDot)?;
                let hi = c.int("upper bound")?;
                c.expect(&Tok::Assign)?;
                let init_pos = c.pos();
                let init = c.int("initial value")?;
                c.finish()?;
                if lo > hi {
                    return error_at(pos, format!("empty range {lo}..{hi} for `{name}`"));
                }
                if !(lo..=hi).contains(&init) {
                    return error_at(init_pos, format!("initial value {init} outside {lo}..{hi}"));
                }
                model.vars.push((VarDecl { name, lo, hi, init }, pos));
            }
            Section::Channels => {
                while !c.at_end() {
                    c.eat(&Tok::Comma);
                    let (name, pos) = c.ident("channel name")?;
                    check_name(&name, pos)?;
                    model.channels.push((name, pos));
                }
            }
            Section::Error => {
                let e = c.expr()?;
                c.finish()?;
                model.errors.push(e);
            }
            Section::Template => {
                let t = model.templates.last_mut().expect("template section has a template");
                parse_template_line(&mut c, t, line)?;
            }
        }
    }
    if model.templates.is_empty() {
        return error_at(
            Pos {
                line: last_line.max(1),
                column: 1,
            },
            "model declares no template",
        );
    }
    Ok(model)
}

fn parse_template_line(c: &mut Cursor, t: &mut RawTemplate, line: usize) -> Result<(), ParseError> {
    match c.peek() {
        Some(Tok::Ident(s)) if s == "locations" => {
            c.bump();
            while !c.at_end() {
                c.eat(&Tok::Comma);
                let (name, pos) = c.ident("location name")?;
                check_name(&name, pos)?;
                t.locations.push((name, pos));
            }
            Ok(())
        }
        Some(Tok::Ident(s)) if s == "initial" => {
            c.bump();
            let loc = c.ident("initial location")?;
            c.finish()?;
            t.initial = Some(loc);
            Ok(())
        }
        _ => {
            let src = c.ident("location, `locations` or `initial`")?;
            c.expect(&Tok::Arrow)?;
            let dst = c.ident("target location")?;
            let kind_pos = c.pos();
            let kind = match c.peek() {
                Some(Tok::Ident(k)) if k == "U" => EdgeKind::Uncontrolled,
                Some(Tok::Ident(k)) if k == "C" => EdgeKind::Controlled,
                Some(Tok::Ident(k)) if k == "R" => EdgeKind::Repair,
                _ => return error_at(kind_pos, "transition needs a kind: U, C or R"),
            };
            c.bump();
            let mut tr = RawTransition {
                src,
                dst,
                kind,
                guard: None,
                sync: None,
                updates: Vec::new(),
                line,
            };
            while !c.at_end() {
                let pos = c.pos();
                match c.peek() {
                    Some(Tok::Ident(w)) if w == "when" => {
                        c.bump();
                        if tr.guard.is_some() {
                            return error_at(pos, "duplicate `when`");
                        }
                        tr.guard = Some(c.expr()?);
                    }
                    Some(Tok::Bang) | Some(Tok::Question) => {
                        let send = c.bump() == Some(&Tok::Bang);
                        if tr.sync.is_some() {
                            return error_at(pos, "a transition has at most one synchronization");
                        }
                        let (ch, chpos) = c.ident("channel name")?;
                        tr.sync = Some((send, ch, chpos));
                    }
                    Some(Tok::Ident(w)) if w == "do" => {
                        c.bump();
                        loop {
                            let (var, vpos) = c.ident("variable to update")?;
                            let op = match c.bump() {
                                Some(Tok::PlusPlus) => RawUpdate::Inc,
                                Some(Tok::MinusMinus) => RawUpdate::Dec,
                                Some(Tok::Assign) => RawUpdate::Assign(c.expr()?),
                                _ => {
                                    c.i -= 1;
                                    return c.unexpected("`++`, `--` or `=`");
                                }
                            };
                            tr.updates.push((var, vpos, op));
                            if !c.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    _ => return c.unexpected("`when`, `!ch`, `?ch` or `do`"),
                }
            }
            t.transitions.push(tr);
            Ok(())
        }
    }
}

struct Scope<'a> {
    vars: HashMap<&'a str, usize>,
    templates: HashMap<&'a str, (usize, HashMap<&'a str, usize>)>,
}

impl Scope<'_> {
    fn resolve(&self, e: &RawExpr) -> Result<Expr, ParseError> {
        Ok(match e {
            RawExpr::Int(v) => Expr::Int(*v),
            RawExpr::Name(n, pos) => match self.vars.get(n.as_str()) {
                Some(&i) => Expr::Var(i),
                None => return error_at(*pos, format!("undeclared variable `{n}`")),
            },
            RawExpr::Qualified(t, l, pos) => {
                let Some((ti, locs)) = self.templates.get(t.as_str()) else {
                    return error_at(*pos, format!("undeclared template `{t}`"));
                };
                let Some(&li) = locs.get(l.as_str()) else {
                    return error_at(*pos, format!("template `{t}` has no location `{l}`"));
                };
                Expr::Occupancy(*ti, li)
            }
            RawExpr::Not(e) => Expr::Not(Box::new(self.resolve(e)?)),
            RawExpr::Neg(e) => Expr::Neg(Box::new(self.resolve(e)?)),
            RawExpr::Bin(op, a, b) => Expr::Bin(*op, Box::new(self.resolve(a)?), Box::new(self.resolve(b)?)),
        })
    }
}

/// Parses and statically checks a model.
pub fn parse(text: &str) -> Result<CefsmModel, ParseError> {
    let raw = parse_raw(text)?;

    let mut vars = HashMap::new();
    for (i, (v, pos)) in raw.vars.iter().enumerate() {
        if vars.insert(v.name.as_str(), i).is_some() {
            return error_at(*pos, format!("variable `{}` declared twice", v.name));
        }
    }
    let mut channels = HashMap::new();
    for (i, (ch, pos)) in raw.channels.iter().enumerate() {
        if channels.insert(ch.as_str(), i).is_some() {
            return error_at(*pos, format!("channel `{ch}` declared twice"));
        }
    }
    let mut templates = HashMap::new();
    for (i, t) in raw.templates.iter().enumerate() {
        if t.locations.is_empty() {
            return error_at(t.pos, format!("template `{}` declares no locations", t.name));
        }
        let mut locs = HashMap::new();
        for (j, (l, pos)) in t.locations.iter().enumerate() {
            if locs.insert(l.as_str(), j).is_some() {
                return error_at(*pos, format!("location `{l}` declared twice in `{}`", t.name));
            }
        }
        if templates.insert(t.name.as_str(), (i, locs)).is_some() {
            return error_at(t.pos, format!("template `{}` declared twice", t.name));
        }
    }
    let scope = Scope { vars, templates };

    let mut out_templates = Vec::new();
    for t in &raw.templates {
        let locs = &scope.templates[t.name.as_str()].1;
        let loc = |(name, pos): &(String, Pos)| match locs.get(name.as_str()) {
            Some(&i) => Ok(i),
            None => error_at(*pos, format!("template `{}` has no location `{name}`", t.name)),
        };
        let initial = match &t.initial {
            Some(l) => loc(l)?,
            None => 0,
        };
        let mut transitions = Vec::new();
        for tr in &t.transitions {
            let sync = match &tr.sync {
                None => None,
                Some((send, ch, pos)) => {
                    let Some(&ci) = channels.get(ch.as_str()) else {
                        return error_at(*pos, format!("undeclared channel `{ch}`"));
                    };
                    Some(if *send { Sync::Send(ci) } else { Sync::Recv(ci) })
                }
            };
            let mut updates = Vec::new();
            for (var, pos, op) in &tr.updates {
                let Some(&vi) = scope.vars.get(var.as_str()) else {
                    return error_at(*pos, format!("undeclared variable `{var}`"));
                };
                let op = match op {
                    RawUpdate::Inc => UpdateOp::Inc,
                    RawUpdate::Dec => UpdateOp::Dec,
                    RawUpdate::Assign(e) => UpdateOp::Assign(scope.resolve(e)?),
                };
                updates.push(Update { var: vi, op });
            }
            transitions.push(LocalTransition {
                src: loc(&tr.src)?,
                dst: loc(&tr.dst)?,
                kind: tr.kind,
                guard: tr.guard.as_ref().map(|g| scope.resolve(g)).transpose()?,
                sync,
                updates,
                line: tr.line,
            });
        }
        out_templates.push(Template {
            name: t.name.clone(),
            count: t.count,
            locations: t.locations.iter().map(|(l, _)| l.clone()).collect(),
            initial,
            transitions,
        });
    }

    // Every send needs a receive partner and vice versa, of the same kind.
    let mut sends: Vec<Vec<(EdgeKind, usize)>> = vec![Vec::new(); raw.channels.len()];
    let mut recvs: Vec<Vec<(EdgeKind, usize)>> = vec![Vec::new(); raw.channels.len()];
    for t in &out_templates {
        for tr in &t.transitions {
            match tr.sync {
                Some(Sync::Send(c)) => sends[c].push((tr.kind, tr.line)),
                Some(Sync::Recv(c)) => recvs[c].push((tr.kind, tr.line)),
                None => {}
            }
        }
    }
    for (ci, (ch, _)) in raw.channels.iter().enumerate() {
        match (sends[ci].first(), recvs[ci].first()) {
            (Some(&(_, line)), None) => {
                return error_at(Pos { line, column: 1 }, format!("channel `{ch}` has a send `!{ch}` but no receive `?{ch}`"));
            }
            (None, Some(&(_, line))) => {
                return error_at(Pos { line, column: 1 }, format!("channel `{ch}` has a receive `?{ch}` but no send `!{ch}`"));
            }
            (None, None) => {}
            (Some(_), Some(_)) => {
                for &(sk, sline) in &sends[ci] {
                    for &(rk, rline) in &recvs[ci] {
                        if sk != rk {
                            return error_at(
                                Pos { line: sline, column: 1 },
                                format!("channel `{ch}` pairs a {sk} send with a {rk} receive (line {rline})"),
                            );
                        }
                    }
                }
            }
        }
    }

    let mut error: Option<Expr> = None;
    for e in &raw.errors {
        let e = scope.resolve(e)?;
        error = Some(match error {
            None => e,
            Some(prev) => Expr::Bin(BinOp::Or, Box::new(prev), Box::new(e)),
        });
    }

    Ok(CefsmModel {
        vars: raw.vars.into_iter().map(|(v, _)| v).collect(),
        channels: raw.channels.into_iter().map(|(c, _)| c).collect(),
        templates: out_templates,
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
vars
  x 0..2 = 0
channels ping
template A 2
  locations Idle Busy
  Idle -> Busy C when x < 2 !ping do x++
  Busy -> Idle U
template B 1
  locations Wait
  Wait -> Wait C ?ping
error A.Busy == 2 && x >= 1
";

    #[test]
    fn parses_small_model() {
        let m = parse(SMALL).unwrap();
        assert_eq!(m.vars[0], VarDecl { name: "x".into(), lo: 0, hi: 2, init: 0 });
        assert_eq!(m.channels, vec!["ping"]);
        assert_eq!(m.templates.len(), 2);
        let a = &m.templates[0];
        assert_eq!(a.count, 2);
        assert_eq!(a.transitions[0].sync, Some(Sync::Send(0)));
        assert_eq!(a.transitions[0].updates, vec![Update { var: 0, op: UpdateOp::Inc }]);
        assert_eq!(a.transitions[1].kind, EdgeKind::Uncontrolled);
        assert!(m.error.is_some());
    }

    #[test]
    fn expression_precedence() {
        let m = parse("vars\n x 0..9 = 2\ntemplate T 1\n locations L\nerror 1 + 2 * x == 5 || !true && false").unwrap();
        let e = m.error.unwrap();
        let v = |_| 2;
        let o = |_, _| 0;
        assert_eq!(e.eval(&v, &o), 1);
    }

    #[test]
    fn empty_file_is_a_syntax_error() {
        let err = parse("").unwrap_err();
        assert!(err.message.contains("no template"), "{err}");
        let err = parse("# only a comment\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn dangling_send_names_channel() {
        let text = "channels ping\ntemplate A 1\n locations L\n L -> L C !ping\n";
        let err = parse(text).unwrap_err();
        assert!(err.message.contains("`ping`"), "{err}");
        assert_eq!(err.line, 4);
    }

    #[test]
    fn missing_kind() {
        let err = parse("template A 1\n locations L M\n L -> M when true\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 9));
        assert!(err.message.contains("kind"));
    }

    #[test]
    fn undeclared_names() {
        let err = parse("template A 1\n locations L\n L -> L C when y > 0\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 16));
        assert!(err.message.contains("`y`"));
        let err = parse("template A 1\n locations L\n L -> Q C\n").unwrap_err();
        assert!(err.message.contains("no location `Q`"));
        let err = parse("template A 1\n locations L\nerror B.L > 0\n").unwrap_err();
        assert!(err.message.contains("undeclared template `B`"));
        let err = parse("template A 1\n locations L\n L -> L C do z++\n").unwrap_err();
        assert!(err.message.contains("`z`"));
    }

    #[test]
    fn kind_mismatch_across_sync() {
        let text = "channels c\ntemplate A 1\n locations L\n L -> L C !c\n L -> L R ?c\n";
        let err = parse(text).unwrap_err();
        assert!(err.message.contains("pairs a"), "{err}");
    }

    #[test]
    fn bad_declarations() {
        assert!(parse("vars\n x 3..1 = 2\ntemplate A 1\n locations L\n").is_err());
        assert!(parse("vars\n x 0..1 = 2\ntemplate A 1\n locations L\n").is_err());
        assert!(parse("template A 0\n locations L\n").is_err());
        assert!(parse("template A 1\n").is_err());
        assert!(parse("template A 1\n locations L L\n").is_err());
        let err = parse("template A 1\n locations L\n L -> L C $\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 11));
    }

    #[test]
    fn content_before_any_section() {
        let err = parse("x 0..1 = 0\n").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
