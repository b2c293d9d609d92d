//! Regular expression syntax tree over edge labels.

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::{Direction, Label};

/// Syntax tree of a path expression. Atoms carry their traversal direction;
/// the wildcard matches any forward label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegexAst {
    Atom(Label),
    Wildcard,
    Concat(Vec<RegexAst>),
    Alt(Vec<RegexAst>),
    Star(Box<RegexAst>),
    Plus(Box<RegexAst>),
    Opt(Box<RegexAst>),
}

impl RegexAst {
    /// Total number of atoms and operators in the tree.
    pub fn node_count(&self) -> usize {
        match self {
            RegexAst::Atom(_) | RegexAst::Wildcard => 1,
            RegexAst::Concat(cs) | RegexAst::Alt(cs) => {
                1 + cs.iter().map(RegexAst::node_count).sum::<usize>()
            }
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Opt(c) => 1 + c.node_count(),
        }
    }

    /// Forward base names of all atoms (inverse atoms contribute their base
    /// name).
    pub fn distinct_labels(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<String>) {
        match self {
            RegexAst::Atom(l) => {
                out.insert(l.name.clone());
            }
            RegexAst::Wildcard => {}
            RegexAst::Concat(cs) | RegexAst::Alt(cs) => {
                cs.iter().for_each(|c| c.collect_labels(out))
            }
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Opt(c) => c.collect_labels(out),
        }
    }

    pub fn uses_inverse(&self) -> bool {
        match self {
            RegexAst::Atom(l) => l.direction == Direction::Inverse,
            RegexAst::Wildcard => false,
            RegexAst::Concat(cs) | RegexAst::Alt(cs) => cs.iter().any(RegexAst::uses_inverse),
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Opt(c) => c.uses_inverse(),
        }
    }

    pub fn uses_wildcard(&self) -> bool {
        match self {
            RegexAst::Atom(_) => false,
            RegexAst::Wildcard => true,
            RegexAst::Concat(cs) | RegexAst::Alt(cs) => cs.iter().any(RegexAst::uses_wildcard),
            RegexAst::Star(c) | RegexAst::Plus(c) | RegexAst::Opt(c) => c.uses_wildcard(),
        }
    }

    /// Canonical text form; `parse_regex(to_text(ast)) == ast` for trees
    /// produced by the parser.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.render(&mut s, 0);
        s
    }

    // Precedence levels: 0 = alternation, 1 = concatenation, 2 = postfix.
    fn render(&self, out: &mut String, min_level: u8) {
        let level = match self {
            RegexAst::Alt(_) => 0,
            RegexAst::Concat(_) => 1,
            _ => 2,
        };
        let parens = level < min_level;
        if parens {
            out.push('(');
        }
        match self {
            RegexAst::Atom(l) => {
                render_atom_name(&l.name, out);
                if l.direction == Direction::Inverse {
                    out.push_str("^-1");
                }
            }
            RegexAst::Wildcard => out.push('.'),
            RegexAst::Concat(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    c.render(out, 2);
                }
            }
            RegexAst::Alt(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    c.render(out, 1);
                }
            }
            RegexAst::Star(c) => {
                c.render(out, 2);
                // A bare postfix chain like `a**` re-parses identically, but
                // postfix over compound expressions needs grouping; render()
                // already added parens for those via min_level = 2.
                out.push('*');
            }
            RegexAst::Plus(c) => {
                c.render(out, 2);
                out.push('+');
            }
            RegexAst::Opt(c) => {
                c.render(out, 2);
                out.push('?');
            }
        }
        if parens {
            out.push(')');
        }
    }
}

fn is_bare_ident(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn render_atom_name(name: &str, out: &mut String) {
    if is_bare_ident(name) {
        out.push_str(name);
    } else {
        out.push('"');
        out.push_str(name);
        out.push('"');
    }
}

impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}
