//! Token-level regular sets.
//!
//! Patterns are written over whitespace-separated symbols with the usual
//! operators: juxtaposition for concatenation, `|` for alternation, postfix
//! `*`, `+`, `?`, and parentheses. `eps` denotes the empty word and `{}` the
//! empty set. Patterns compile through a Thompson NFA into a DFA; every query
//! runs on the DFA.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pattern {
    /// The empty set.
    Nothing,
    Epsilon,
    Symbol(Symbol),
    Concat(Vec<Pattern>),
    Alt(Vec<Pattern>),
    Star(Box<Pattern>),
    Plus(Box<Pattern>),
    Optional(Box<Pattern>),
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Nothing => f.write_str("{}"),
            Pattern::Epsilon => f.write_str("eps"),
            Pattern::Symbol(s) => write!(f, "{s}"),
            Pattern::Concat(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Pattern::Alt(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Pattern::Star(p) => write!(f, "({p})*"),
            Pattern::Plus(p) => write!(f, "({p})+"),
            Pattern::Optional(p) => write!(f, "({p})?"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Sym(String),
    Open,
    Close,
    Bar,
    Op(char),
}

fn is_op(c: char) -> bool {
    matches!(c, '*' | '+' | '?')
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let flush = |buf: &mut String, out: &mut Vec<Tok>| {
        if buf.is_empty() {
            return;
        }
        let body = buf.trim_end_matches(is_op);
        let ops: Vec<char> = buf[body.len()..].chars().collect();
        if !body.is_empty() {
            out.push(Tok::Sym(body.to_string()));
        }
        out.extend(ops.into_iter().map(Tok::Op));
        buf.clear();
    };
    let mut buf = String::new();
    for c in src.chars() {
        match c {
            '(' | ')' | '|' => {
                flush(&mut buf, &mut out);
                out.push(match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    _ => Tok::Bar,
                });
            }
            c if c.is_whitespace() => flush(&mut buf, &mut out),
            c => buf.push(c),
        }
    }
    flush(&mut buf, &mut out);
    out
}

struct PatternParser {
    toks: Vec<Tok>,
    pos: usize,
}

impl PatternParser {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Pattern {
            position: self.pos,
            message: message.into(),
        }
    }

    fn alt(&mut self) -> Result<Pattern> {
        let mut branches = vec![self.concat()?];
        while self.toks.get(self.pos) == Some(&Tok::Bar) {
            self.pos += 1;
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Pattern::Alt(branches)
        })
    }

    fn concat(&mut self) -> Result<Pattern> {
        let mut parts = Vec::new();
        while let Some(t) = self.toks.get(self.pos) {
            match t {
                Tok::Bar | Tok::Close => break,
                _ => parts.push(self.postfix()?),
            }
        }
        Ok(match parts.len() {
            0 => Pattern::Epsilon,
            1 => parts.pop().unwrap(),
            _ => Pattern::Concat(parts),
        })
    }

    fn postfix(&mut self) -> Result<Pattern> {
        let mut p = self.atom()?;
        while let Some(Tok::Op(c)) = self.toks.get(self.pos) {
            p = match c {
                '*' => Pattern::Star(Box::new(p)),
                '+' => Pattern::Plus(Box::new(p)),
                _ => Pattern::Optional(Box::new(p)),
            };
            self.pos += 1;
        }
        Ok(p)
    }

    fn atom(&mut self) -> Result<Pattern> {
        let tok = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match tok {
            Some(Tok::Sym(s)) if s == "eps" => Ok(Pattern::Epsilon),
            Some(Tok::Sym(s)) if s == "{}" => Ok(Pattern::Nothing),
            Some(Tok::Sym(s)) => Ok(Pattern::Symbol(Symbol::new(s))),
            Some(Tok::Open) => {
                let inner = self.alt()?;
                if self.toks.get(self.pos) != Some(&Tok::Close) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(Tok::Op(c)) => {
                self.pos -= 1;
                Err(self.err(format!("operator `{c}` has no operand")))
            }
            _ => {
                self.pos -= 1;
                Err(self.err("unexpected end or `)`"))
            }
        }
    }
}

impl Pattern {
    pub fn parse(src: &str) -> Result<Pattern> {
        let mut p = PatternParser {
            toks: tokenize(src),
            pos: 0,
        };
        let pat = p.alt()?;
        if p.pos != p.toks.len() {
            return Err(p.err("unbalanced `)`"));
        }
        Ok(pat)
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Pattern::Nothing | Pattern::Epsilon => {}
            Pattern::Symbol(s) => {
                out.insert(s.clone());
            }
            Pattern::Concat(ps) | Pattern::Alt(ps) => {
                ps.iter().for_each(|p| p.collect_symbols(out))
            }
            Pattern::Star(p) | Pattern::Plus(p) | Pattern::Optional(p) => p.collect_symbols(out),
        }
    }
}

/// Thompson NFA: `eps[q]` are epsilon moves, `moves[q]` labeled moves.
#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(usize, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns (entry, exit) for the fragment.
    fn build(&mut self, p: &Pattern, sym_index: &BTreeMap<Symbol, usize>) -> (usize, usize) {
        let s = self.state();
        let e = self.state();
        match p {
            Pattern::Nothing => {}
            Pattern::Epsilon => self.eps[s].push(e),
            Pattern::Symbol(sym) => self.moves[s].push((sym_index[sym], e)),
            Pattern::Concat(ps) => {
                let mut cur = s;
                for part in ps {
                    let (ps_, pe) = self.build(part, sym_index);
                    self.eps[cur].push(ps_);
                    cur = pe;
                }
                self.eps[cur].push(e);
            }
            Pattern::Alt(ps) => {
                for part in ps {
                    let (ps_, pe) = self.build(part, sym_index);
                    self.eps[s].push(ps_);
                    self.eps[pe].push(e);
                }
            }
            Pattern::Star(inner) | Pattern::Plus(inner) | Pattern::Optional(inner) => {
                let (is, ie) = self.build(inner, sym_index);
                self.eps[s].push(is);
                self.eps[ie].push(e);
                if !matches!(p, Pattern::Plus(_)) {
                    self.eps[s].push(e);
                }
                if !matches!(p, Pattern::Optional(_)) {
                    self.eps[ie].push(is);
                }
            }
        }
        (s, e)
    }

    fn closure(&self, set: &mut BTreeSet<usize>) {
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(q) = stack.pop() {
            for &n in &self.eps[q] {
                if set.insert(n) {
                    stack.push(n);
                }
            }
        }
    }
}

/// A regular set of words over symbols, held as a DFA.
#[derive(Clone, Debug)]
pub struct RegularSet {
    source: String,
    alphabet: Vec<Symbol>,
    /// `trans[q][a]` for symbol index `a`; `None` is the dead state.
    trans: Vec<Vec<Option<usize>>>,
    accepting: Vec<bool>,
    /// States from which some accepting state is reachable.
    live: Vec<bool>,
}

impl PartialEq for RegularSet {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source
    }
}

impl RegularSet {
    pub fn parse(src: &str) -> Result<Self> {
        let pattern = Pattern::parse(src)?;
        Ok(Self::from_pattern(&pattern, src.split_whitespace().collect::<Vec<_>>().join(" ")))
    }

    pub fn from_pattern(pattern: &Pattern, source: String) -> Self {
        let mut syms = BTreeSet::new();
        pattern.collect_symbols(&mut syms);
        let alphabet: Vec<Symbol> = syms.into_iter().collect();
        let sym_index: BTreeMap<Symbol, usize> = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut nfa = Nfa::default();
        let (start, end) = nfa.build(pattern, &sym_index);

        let mut first = BTreeSet::from([start]);
        nfa.closure(&mut first);
        let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::from([(first.clone(), 0)]);
        let mut queue = VecDeque::from([first]);
        let mut trans: Vec<Vec<Option<usize>>> = Vec::new();
        let mut accepting = Vec::new();
        while let Some(set) = queue.pop_front() {
            accepting.push(set.contains(&end));
            let mut row = vec![None; alphabet.len()];
            for (a, slot) in row.iter_mut().enumerate() {
                let mut next: BTreeSet<usize> = set
                    .iter()
                    .flat_map(|&q| nfa.moves[q].iter())
                    .filter(|(sym, _)| *sym == a)
                    .map(|&(_, t)| t)
                    .collect();
                if next.is_empty() {
                    continue;
                }
                nfa.closure(&mut next);
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = ids.len();
                        ids.insert(next.clone(), id);
                        queue.push_back(next);
                        id
                    }
                };
                *slot = Some(id);
            }
            trans.push(row);
        }

        let mut live = accepting.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for q in 0..trans.len() {
                if !live[q] && trans[q].iter().flatten().any(|&t| live[t]) {
                    live[q] = true;
                    changed = true;
                }
            }
        }
        RegularSet {
            source,
            alphabet,
            trans,
            accepting,
            live,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Symbols mentioned by the pattern.
    pub fn symbols(&self) -> &[Symbol] {
        &self.alphabet
    }

    fn step(&self, q: usize, s: &Symbol) -> Option<usize> {
        let a = self.alphabet.binary_search(s).ok()?;
        self.trans[q][a]
    }

    fn run(&self, from: usize, w: &[Symbol]) -> Option<usize> {
        w.iter().try_fold(from, |q, s| self.step(q, s))
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.run(0, w).is_some_and(|q| self.accepting[q])
    }

    pub fn is_empty(&self) -> bool {
        !self.live[0]
    }

    pub fn contains_epsilon(&self) -> bool {
        self.accepting[0]
    }

    /// Every member of length at most `k`, in canonical order.
    pub fn enumerate_upto(&self, k: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        let mut layer: Vec<(usize, Vec<Symbol>)> = vec![(0, Vec::new())];
        for depth in 0..=k {
            let mut next = Vec::new();
            for (q, w) in layer {
                if !self.live[q] {
                    continue;
                }
                if self.accepting[q] {
                    out.insert(Word::new(w.clone()));
                }
                if depth == k {
                    continue;
                }
                for (a, t) in self.trans[q].iter().enumerate() {
                    if let Some(t) = *t {
                        let mut w2 = w.clone();
                        w2.push(self.alphabet[a].clone());
                        next.push((t, w2));
                    }
                }
            }
            layer = next;
        }
        out
    }

    fn reachable_from(&self, q: usize, include_self: bool) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = Vec::new();
        if include_self {
            seen.insert(q);
            stack.push(q);
        } else {
            for t in self.trans[q].iter().flatten() {
                if seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        while let Some(p) = stack.pop() {
            for t in self.trans[p].iter().flatten() {
                if seen.insert(*t) {
                    stack.push(*t);
                }
            }
        }
        seen
    }

    /// Is there a member `prefix · z · suffix` of length at least one?
    /// The two affixes occupy disjoint positions.
    pub fn has_word_with_affixes(&self, prefix: &Word, suffix: &Word) -> bool {
        let Some(q1) = self.run(0, prefix) else {
            return false;
        };
        let nonempty_needed = prefix.is_empty() && suffix.is_empty();
        self.reachable_from(q1, !nonempty_needed)
            .into_iter()
            .any(|q| self.run(q, suffix).is_some_and(|f| self.accepting[f]))
    }
}

impl fmt::Display for RegularSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
