//! Nondeterministic finite automaton compiled from a path expression.
//!
//! The construction allocates at most two states per syntax-tree node, so
//! the automaton stays linear in the expression size. Epsilon closures and
//! the per-closure outgoing symbol sets are precomputed because the product
//! search asks for them at every expansion step.

use std::collections::BTreeSet;

use crate::graph::{Direction, Label, LabelSet};
use crate::query::ast::RegexAst;

pub type StateId = u32;

/// A transition symbol: a concrete (possibly inverse) label, or the forward
/// wildcard.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Label(Label),
    AnyForward,
}

impl Symbol {
    pub fn matches(&self, label: &Label) -> bool {
        match self {
            Symbol::Label(l) => l == label,
            Symbol::AnyForward => label.direction == Direction::Forward,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueryAutomaton {
    initial: StateId,
    accepting: BTreeSet<StateId>,
    transitions: Vec<Vec<(Symbol, StateId)>>,
    epsilon: Vec<Vec<StateId>>,
    // Derived per-state closure data.
    closures: Vec<Vec<StateId>>,
    closure_accepting: Vec<bool>,
    closure_wanted: Vec<LabelSet>,
    closure_transitions: Vec<Vec<(Symbol, StateId)>>,
}

impl QueryAutomaton {
    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn transitions(&self, q: StateId) -> &[(Symbol, StateId)] {
        &self.transitions[q as usize]
    }

    pub fn epsilon(&self, q: StateId) -> &[StateId] {
        &self.epsilon[q as usize]
    }

    pub fn closure(&self, q: StateId) -> &[StateId] {
        &self.closures[q as usize]
    }

    /// Whether the epsilon closure of `q` contains an accepting state.
    pub fn closure_accepting(&self, q: StateId) -> bool {
        self.closure_accepting[q as usize]
    }

    /// Symbols on transitions leaving the epsilon closure of `q`.
    pub fn closure_wanted(&self, q: StateId) -> &LabelSet {
        &self.closure_wanted[q as usize]
    }

    /// Symbol transitions leaving the epsilon closure of `q`, deduplicated
    /// and sorted.
    pub fn closure_transitions(&self, q: StateId) -> &[(Symbol, StateId)] {
        &self.closure_transitions[q as usize]
    }

    pub fn accepts_epsilon(&self) -> bool {
        self.closure_accepting(self.initial)
    }

    /// Run the automaton on a word of (extended) labels.
    pub fn accepts(&self, word: &[Label]) -> bool {
        let mut current: BTreeSet<StateId> = self.closure(self.initial).iter().copied().collect();
        for label in word {
            let mut next = BTreeSet::new();
            for &q in &current {
                for (sym, target) in self.transitions(q) {
                    if sym.matches(label) {
                        next.extend(self.closure(*target).iter().copied());
                    }
                }
            }
            current = next;
            if current.is_empty() {
                return false;
            }
        }
        current.iter().any(|q| self.accepting.contains(q))
    }
}

struct Builder {
    transitions: Vec<Vec<(Symbol, StateId)>>,
    epsilon: Vec<Vec<StateId>>,
}

struct Fragment {
    start: StateId,
    end: StateId,
}

impl Builder {
    fn state(&mut self) -> StateId {
        let id = self.transitions.len() as StateId;
        self.transitions.push(Vec::new());
        self.epsilon.push(Vec::new());
        id
    }

    fn eps(&mut self, from: StateId, to: StateId) {
        self.epsilon[from as usize].push(to);
    }

    fn sym(&mut self, from: StateId, symbol: Symbol, to: StateId) {
        self.transitions[from as usize].push((symbol, to));
    }

    fn fragment(&mut self, ast: &RegexAst) -> Fragment {
        match ast {
            RegexAst::Atom(label) => {
                let start = self.state();
                let end = self.state();
                self.sym(start, Symbol::Label(label.clone()), end);
                Fragment { start, end }
            }
            RegexAst::Wildcard => {
                let start = self.state();
                let end = self.state();
                self.sym(start, Symbol::AnyForward, end);
                Fragment { start, end }
            }
            RegexAst::Concat(children) => {
                let mut iter = children.iter();
                let first = self.fragment(iter.next().expect("concat is non-empty"));
                let mut end = first.end;
                for child in iter {
                    let next = self.fragment(child);
                    self.eps(end, next.start);
                    end = next.end;
                }
                Fragment {
                    start: first.start,
                    end,
                }
            }
            RegexAst::Alt(children) => {
                let start = self.state();
                let end = self.state();
                for child in children {
                    let frag = self.fragment(child);
                    self.eps(start, frag.start);
                    self.eps(frag.end, end);
                }
                Fragment { start, end }
            }
            RegexAst::Star(child) => {
                let start = self.state();
                let end = self.state();
                let frag = self.fragment(child);
                self.eps(start, frag.start);
                self.eps(start, end);
                self.eps(frag.end, frag.start);
                self.eps(frag.end, end);
                Fragment { start, end }
            }
            RegexAst::Plus(child) => {
                let start = self.state();
                let end = self.state();
                let frag = self.fragment(child);
                self.eps(start, frag.start);
                self.eps(frag.end, frag.start);
                self.eps(frag.end, end);
                Fragment { start, end }
            }
            RegexAst::Opt(child) => {
                let start = self.state();
                let end = self.state();
                let frag = self.fragment(child);
                self.eps(start, frag.start);
                self.eps(start, end);
                self.eps(frag.end, end);
                Fragment { start, end }
            }
        }
    }
}

/// Compile a syntax tree into an NFA.
pub fn compile(ast: &RegexAst) -> QueryAutomaton {
    let mut builder = Builder {
        transitions: Vec::new(),
        epsilon: Vec::new(),
    };
    let frag = builder.fragment(ast);
    let state_count = builder.transitions.len();
    debug_assert!(state_count <= 2 * ast.node_count() + 2);

    let mut accepting = BTreeSet::new();
    accepting.insert(frag.end);

    let closures: Vec<Vec<StateId>> = (0..state_count as StateId)
        .map(|q| eps_closure(&builder.epsilon, q))
        .collect();
    let closure_accepting = closures
        .iter()
        .map(|c| c.iter().any(|q| accepting.contains(q)))
        .collect();
    let closure_wanted = closures
        .iter()
        .map(|c| {
            let mut wanted = LabelSet::new();
            for &q in c {
                for (sym, _) in &builder.transitions[q as usize] {
                    match sym {
                        Symbol::Label(l) => wanted.insert(l.clone()),
                        Symbol::AnyForward => wanted.set_any_forward(),
                    }
                }
            }
            wanted
        })
        .collect();
    let closure_transitions = closures
        .iter()
        .map(|c| {
            let mut trans: BTreeSet<(Symbol, StateId)> = BTreeSet::new();
            for &q in c {
                trans.extend(builder.transitions[q as usize].iter().cloned());
            }
            trans.into_iter().collect()
        })
        .collect();

    QueryAutomaton {
        initial: frag.start,
        accepting,
        transitions: builder.transitions,
        epsilon: builder.epsilon,
        closures,
        closure_accepting,
        closure_wanted,
        closure_transitions,
    }
}

fn eps_closure(epsilon: &[Vec<StateId>], q: StateId) -> Vec<StateId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![q];
    while let Some(s) = stack.pop() {
        if seen.insert(s) {
            stack.extend(epsilon[s as usize].iter().copied());
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parser::{parse_regex, ClassFile};

    fn nfa(expr: &str) -> QueryAutomaton {
        compile(&parse_regex(expr, &ClassFile::empty()).unwrap())
    }

    fn word(labels: &[&str]) -> Vec<Label> {
        labels
            .iter()
            .map(|l| match l.strip_suffix("^-1") {
                Some(base) => Label::inverse(base),
                None => Label::forward(*l),
            })
            .collect()
    }

    #[test]
    fn star_concat_language() {
        let a = nfa("a* b b");
        for accept in [&["b", "b"][..], &["a", "b", "b"], &["a", "a", "b", "b"]] {
            assert!(a.accepts(&word(accept)), "{accept:?}");
        }
        for reject in [&["b"][..], &["a", "b"], &["b", "b", "a"], &[]] {
            assert!(!a.accepts(&word(reject)), "{reject:?}");
        }
    }

    #[test]
    fn alternation_language_is_exact() {
        let a = nfa("a c (a|b)");
        let alphabet = ["a", "b", "c"];
        let mut accepted = Vec::new();
        for x in alphabet {
            for y in alphabet {
                for z in alphabet {
                    if a.accepts(&word(&[x, y, z])) {
                        accepted.push(format!("{x}{y}{z}"));
                    }
                }
            }
        }
        assert_eq!(accepted, vec!["aca".to_string(), "acb".to_string()]);
        assert!(!a.accepts(&word(&["a", "c"])));
        assert!(!a.accepts(&word(&["a", "c", "a", "a"])));
    }

    #[test]
    fn optional_accepts_epsilon_and_single() {
        let a = nfa("x?");
        assert!(a.accepts(&[]));
        assert!(a.accepts(&word(&["x"])));
        assert!(!a.accepts(&word(&["x", "x"])));
        assert!(a.accepts_epsilon());
    }

    #[test]
    fn inverse_labels_are_distinct_symbols() {
        let a = nfa("a* b^-1");
        assert!(a.accepts(&word(&["b^-1"])));
        assert!(a.accepts(&word(&["a", "b^-1"])));
        assert!(!a.accepts(&word(&["b"])));
    }

    #[test]
    fn wildcard_matches_forward_only() {
        let a = nfa(". b");
        assert!(a.accepts(&word(&["z", "b"])));
        assert!(!a.accepts(&[Label::inverse("z"), Label::forward("b")]));
    }

    #[test]
    fn state_count_within_linear_bound() {
        for expr in ["a", "a* b b", "a c (a|b)", "(a|b|c)+ d? e*", "$x|y$"] {
            let Ok(ast) = parse_regex(expr, &ClassFile::empty()) else {
                continue;
            };
            let a = compile(&ast);
            assert!(
                a.state_count() <= 2 * ast.node_count() + 2,
                "{expr}: {} states for {} nodes",
                a.state_count(),
                ast.node_count()
            );
        }
    }

    #[test]
    fn closure_wanted_of_initial_is_first_labels() {
        let a = nfa("a* b b");
        let wanted = a.closure_wanted(a.initial());
        assert!(wanted.matches(&Label::forward("a")));
        assert!(wanted.matches(&Label::forward("b")));
        assert_eq!(wanted.symbol_len(), 2);
    }
}
