//! Concrete syntax for path expressions.
//!
//! Atoms are bare identifiers (`[A-Za-z0-9_]+`) or double-quoted strings;
//! postfix `^-1` marks inverse traversal; `*`, `+`, `?` are the usual
//! postfix operators; `|` alternation; juxtaposition concatenates; `(` `)`
//! group; `.` is the forward-only wildcard; `$NAME` expands a macro from a
//! class file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Label;
use crate::query::ast::RegexAst;

/// Named label classes loaded from a file of `NAME = alt1|alt2|...` lines.
#[derive(Debug, Clone, Default)]
pub struct ClassFile {
    defs: BTreeMap<String, Vec<String>>,
}

impl ClassFile {
    pub fn empty() -> Self {
        ClassFile::default()
    }

    pub fn get(&self, name: &str) -> Option<&[String]> {
        self.defs.get(name).map(|v| v.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.defs.keys().map(|s| s.as_str())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut defs = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw).trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (name, body) = line.split_once('=').ok_or(Error::ClassFile {
                line: lineno,
                msg: "expected `NAME = alt1|alt2|...`".to_string(),
            })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::ClassFile {
                    line: lineno,
                    msg: format!("invalid class name `{name}`"),
                });
            }
            let mut alts = Vec::new();
            for alt in body.split('|') {
                let alt = alt.trim();
                if alt.is_empty() {
                    return Err(Error::ClassFile {
                        line: lineno,
                        msg: "empty alternative".to_string(),
                    });
                }
                alts.push(alt.to_string());
            }
            if defs.insert(name.to_string(), alts).is_some() {
                return Err(Error::ClassFile {
                    line: lineno,
                    msg: format!("class `{name}` defined twice"),
                });
            }
        }
        Ok(ClassFile { defs })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        ClassFile::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Macro(String),
    Dot,
    Star,
    Plus,
    Question,
    Pipe,
    LParen,
    RParen,
    InverseMark,
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        while let Some(&(pos, c)) = self.chars.peek() {
            match c {
                c if c.is_whitespace() => {
                    self.chars.next();
                }
                '(' => out.push((pos, self.single(Tok::LParen))),
                ')' => out.push((pos, self.single(Tok::RParen))),
                '*' => out.push((pos, self.single(Tok::Star))),
                '+' => out.push((pos, self.single(Tok::Plus))),
                '?' => out.push((pos, self.single(Tok::Question))),
                '|' => out.push((pos, self.single(Tok::Pipe))),
                '.' => out.push((pos, self.single(Tok::Dot))),
                '^' => {
                    self.chars.next();
                    let rest = &self.src[pos..];
                    if rest.starts_with("^-1") {
                        self.chars.next();
                        self.chars.next();
                        out.push((pos, Tok::InverseMark));
                    } else {
                        return Err(syntax(pos, "expected `^-1`"));
                    }
                }
                '"' => {
                    self.chars.next();
                    let mut name = String::new();
                    loop {
                        match self.chars.next() {
                            Some((_, '"')) => break,
                            Some((_, ch)) => name.push(ch),
                            None => return Err(syntax(pos, "unterminated quoted label")),
                        }
                    }
                    if name.is_empty() {
                        return Err(syntax(pos, "empty quoted label"));
                    }
                    out.push((pos, Tok::Quoted(name)));
                }
                '$' => {
                    self.chars.next();
                    let name = self.take_ident();
                    if name.is_empty() {
                        return Err(syntax(pos, "expected macro name after `$`"));
                    }
                    out.push((pos, Tok::Macro(name)));
                }
                c if is_ident_char(c) => {
                    let name = self.take_ident();
                    out.push((pos, Tok::Ident(name)));
                }
                other => return Err(syntax(pos, &format!("unexpected character `{other}`"))),
            }
        }
        Ok(out)
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.chars.next();
        tok
    }

    fn take_ident(&mut self) -> String {
        let mut name = String::new();
        while let Some(&(_, c)) = self.chars.peek() {
            if is_ident_char(c) {
                name.push(c);
                self.chars.next();
            } else {
                break;
            }
        }
        name
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn syntax(pos: usize, msg: &str) -> Error {
    Error::Regex {
        pos,
        msg: msg.to_string(),
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    classes: &'a ClassFile,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn parse_alt(&mut self) -> Result<RegexAst> {
        let mut branches = vec![self.parse_concat()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.bump();
            branches.push(self.parse_concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            RegexAst::Alt(branches)
        })
    }

    fn parse_concat(&mut self) -> Result<RegexAst> {
        let mut parts = vec![self.parse_postfix()?];
        while matches!(
            self.peek(),
            Some(Tok::Ident(_) | Tok::Quoted(_) | Tok::Macro(_) | Tok::Dot | Tok::LParen)
        ) {
            parts.push(self.parse_postfix()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            RegexAst::Concat(parts)
        })
    }

    fn parse_postfix(&mut self) -> Result<RegexAst> {
        let mut expr = self.parse_primary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    expr = RegexAst::Star(Box::new(expr));
                }
                Some(Tok::Plus) => {
                    self.bump();
                    expr = RegexAst::Plus(Box::new(expr));
                }
                Some(Tok::Question) => {
                    self.bump();
                    expr = RegexAst::Opt(Box::new(expr));
                }
                Some(Tok::InverseMark) => {
                    return Err(syntax(
                        self.pos(),
                        "`^-1` applies only to a label atom",
                    ));
                }
                _ => return Ok(expr),
            }
        }
    }

    fn parse_primary(&mut self) -> Result<RegexAst> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(name)) | Some(Tok::Quoted(name)) => {
                Ok(RegexAst::Atom(self.finish_atom(name)))
            }
            Some(Tok::Dot) => {
                if self.peek() == Some(&Tok::InverseMark) {
                    return Err(syntax(
                        self.pos(),
                        "the wildcard cannot be inverted; name the labels instead",
                    ));
                }
                Ok(RegexAst::Wildcard)
            }
            Some(Tok::Macro(name)) => {
                let alts = self
                    .classes
                    .get(&name)
                    .ok_or(Error::UnknownMacro { name: name.clone() })?;
                let branches: Vec<RegexAst> = alts
                    .iter()
                    .map(|a| RegexAst::Atom(Label::forward(a.clone())))
                    .collect();
                if self.peek() == Some(&Tok::InverseMark) {
                    return Err(syntax(
                        self.pos(),
                        "`^-1` applies only to a label atom, not a macro",
                    ));
                }
                Ok(if branches.len() == 1 {
                    branches.into_iter().next().unwrap()
                } else {
                    RegexAst::Alt(branches)
                })
            }
            Some(Tok::LParen) => {
                let inner = self.parse_alt()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(syntax(pos, "unclosed `(`")),
                }
            }
            Some(other) => Err(syntax(pos, &format!("unexpected token {other:?}"))),
            None => Err(syntax(pos, "unexpected end of expression")),
        }
    }

    fn finish_atom(&mut self, name: String) -> Label {
        if self.peek() == Some(&Tok::InverseMark) {
            self.bump();
            Label::inverse(name)
        } else {
            Label::forward(name)
        }
    }
}

/// Parse a path expression; macros are resolved against `classes`.
pub fn parse_regex(text: &str, classes: &ClassFile) -> Result<RegexAst> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        toks,
        at: 0,
        classes,
        end: text.len(),
    };
    let ast = parser.parse_alt()?;
    if parser.at != parser.toks.len() {
        return Err(syntax(parser.pos(), "trailing input after expression"));
    }
    Ok(ast)
}
