//! Flat splicing systems `(A, I, R)`, their type `(m, n)`, applicability
//! and the bounded closure language.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::regular::RegularSet;
use crate::rule::FlatSplicingRule;
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq)]
pub enum InitialSet {
    Finite(BTreeSet<Word>),
    Regular(RegularSet),
}

impl InitialSet {
    pub fn finite<I, W>(words: I) -> Self
    where
        I: IntoIterator<Item = W>,
        W: Into<Word>,
    {
        InitialSet::Finite(words.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, w: &Word) -> bool {
        match self {
            InitialSet::Finite(ws) => ws.contains(w),
            InitialSet::Regular(r) => r.contains(w),
        }
    }

    /// Members of length at most `bound`; a finite set is returned whole.
    pub fn members_upto(&self, bound: usize) -> BTreeSet<Word> {
        match self {
            InitialSet::Finite(ws) => ws.clone(),
            InitialSet::Regular(r) => r.enumerate_upto(bound),
        }
    }

    pub fn max_finite_len(&self) -> Option<usize> {
        match self {
            InitialSet::Finite(ws) => Some(ws.iter().map(|w| w.len()).max().unwrap_or(0)),
            InitialSet::Regular(_) => None,
        }
    }
}

/// How terminality reads "no rule is applicable".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Applicability {
    /// A rule counts only if it has a match site and a partner exists in I.
    #[default]
    WithPartner,
    /// A match site alone makes a rule applicable.
    ContextOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SystemType {
    pub m: usize,
    pub n: usize,
}

impl fmt::Display for SystemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlatSplicingSystem {
    alphabet: BTreeSet<Symbol>,
    initial: InitialSet,
    rules: Vec<FlatSplicingRule>,
    applicability: Applicability,
    /// Exact partner existence per rule, independent of the first operand.
    partner_exists: Vec<bool>,
}

impl FlatSplicingSystem {
    pub fn new(
        alphabet: BTreeSet<Symbol>,
        initial: InitialSet,
        rules: Vec<FlatSplicingRule>,
    ) -> Result<Self> {
        let check = |s: &Symbol| {
            if alphabet.contains(s) {
                Ok(())
            } else {
                Err(Error::UnknownSymbol(s.clone()))
            }
        };
        match &initial {
            InitialSet::Finite(ws) => {
                for w in ws {
                    if w.is_empty() {
                        return Err(Error::EmptyInitialWord);
                    }
                    w.iter().try_for_each(check)?;
                }
            }
            InitialSet::Regular(r) => {
                if r.contains_epsilon() {
                    return Err(Error::EmptyInitialWord);
                }
                r.symbols().iter().try_for_each(check)?;
            }
        }
        for r in &rules {
            r.symbols().try_for_each(check)?;
        }
        let partner_exists = rules
            .iter()
            .map(|r| match &initial {
                InitialSet::Finite(ws) => ws.iter().any(|v| r.partner_matches(v)),
                InitialSet::Regular(set) => set.has_word_with_affixes(r.gamma(), r.delta()),
            })
            .collect();
        Ok(FlatSplicingSystem {
            alphabet,
            initial,
            rules,
            applicability: Applicability::default(),
            partner_exists,
        })
    }

    pub fn with_applicability(mut self, mode: Applicability) -> Self {
        self.applicability = mode;
        self
    }

    pub fn alphabet(&self) -> &BTreeSet<Symbol> {
        &self.alphabet
    }
    pub fn initial(&self) -> &InitialSet {
        &self.initial
    }
    pub fn rules(&self) -> &[FlatSplicingRule] {
        &self.rules
    }
    pub fn applicability(&self) -> Applicability {
        self.applicability
    }

    /// Whether rule `idx` has any partner in I at all (decided exactly).
    pub fn partner_exists(&self, idx: usize) -> bool {
        self.partner_exists[idx]
    }

    /// Is some rule applicable to `u`? Partner existence is decided exactly
    /// for both finite and regular initial sets.
    pub fn applicable(&self, u: &Word) -> bool {
        self.rules.iter().enumerate().any(|(i, r)| {
            (self.applicability == Applicability::ContextOnly || self.partner_exists[i])
                && r.has_site(u)
        })
    }

    pub fn system_type(&self) -> SystemType {
        SystemType {
            m: self.rules.iter().map(|r| r.context_len()).max().unwrap_or(0),
            n: self.rules.iter().map(|r| r.handle_len()).max().unwrap_or(0),
        }
    }

    /// `{ w in F(S) : |w| <= max_len }`: the least set containing the initial
    /// words and closed under splicing any two of its members.
    pub fn closure_language_upto(&self, max_len: usize) -> BTreeSet<Word> {
        let mut known: Vec<Word> = Vec::new();
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue: Vec<Word> = Vec::new();
        for w in self.initial.members_upto(max_len) {
            if w.len() <= max_len && seen.insert(w.clone()) {
                queue.push(w);
            }
        }
        while let Some(fresh) = queue.pop() {
            known.push(fresh.clone());
            let mut produced = Vec::new();
            for other in &known {
                if fresh.len() + other.len() > max_len {
                    continue;
                }
                for r in &self.rules {
                    produced.extend(r.splice(&fresh, other));
                    if other != &fresh {
                        produced.extend(r.splice(other, &fresh));
                    }
                }
            }
            for w in produced {
                if seen.insert(w.clone()) {
                    queue.push(w);
                }
            }
        }
        known.into_iter().collect()
    }
}
