//! Flat splicing rules `<alpha | gamma - delta | beta>` and the splicing
//! operation itself.
//!
//! Sites are gaps: site `i` (with `0 <= i <= |u|`) sits between `u[i-1]` and
//! `u[i]`. A rule fires on `(u, v)` at site `i` when `alpha` ends at `i`,
//! `beta` starts at `i`, and `v` begins with `gamma` and ends with `delta`;
//! the whole of `v` is inserted at the gap.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::word::Word;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FlatSplicingRule {
    alpha: Word,
    gamma: Word,
    delta: Word,
    beta: Word,
}

impl FlatSplicingRule {
    pub fn new(alpha: Word, gamma: Word, delta: Word, beta: Word) -> Result<Self> {
        if gamma.len() > 1 {
            return Err(Error::GammaTooLong(gamma.len()));
        }
        if delta.len() > 1 {
            return Err(Error::DeltaTooLong(delta.len()));
        }
        Ok(FlatSplicingRule {
            alpha,
            gamma,
            delta,
            beta,
        })
    }

    /// Shorthand used heavily in tests: `FlatSplicingRule::of("a", "a", "b", "b")`.
    pub fn of(alpha: &str, gamma: &str, delta: &str, beta: &str) -> Result<Self> {
        Self::new(
            Word::parse(alpha),
            Word::parse(gamma),
            Word::parse(delta),
            Word::parse(beta),
        )
    }

    pub fn alpha(&self) -> &Word {
        &self.alpha
    }
    pub fn gamma(&self) -> &Word {
        &self.gamma
    }
    pub fn delta(&self) -> &Word {
        &self.delta
    }
    pub fn beta(&self) -> &Word {
        &self.beta
    }

    /// `max(|alpha|, |beta|)`, the rule's contribution to `m`.
    pub fn context_len(&self) -> usize {
        self.alpha.len().max(self.beta.len())
    }

    /// `|gamma delta|`, the rule's contribution to `n`.
    pub fn handle_len(&self) -> usize {
        self.gamma.len() + self.delta.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &crate::word::Symbol> {
        self.alpha
            .iter()
            .chain(self.gamma.iter())
            .chain(self.delta.iter())
            .chain(self.beta.iter())
    }

    fn is_site(&self, u: &[crate::word::Symbol], i: usize) -> bool {
        self.alpha.is_suffix_of(&u[..i]) && self.beta.is_prefix_of(&u[i..])
    }

    /// Every gap of `u` where `alpha` ends and `beta` begins, ascending.
    pub fn match_sites(&self, u: &Word) -> Vec<usize> {
        if self.alpha.len() + self.beta.len() > u.len() {
            return Vec::new();
        }
        (self.alpha.len()..=u.len() - self.beta.len())
            .filter(|&i| self.is_site(u, i))
            .collect()
    }

    pub fn has_site(&self, u: &Word) -> bool {
        self.alpha.len() + self.beta.len() <= u.len()
            && (self.alpha.len()..=u.len() - self.beta.len()).any(|i| self.is_site(u, i))
    }

    /// `v = gamma z delta` with the two handles on disjoint positions.
    pub fn partner_matches(&self, v: &Word) -> bool {
        !v.is_empty()
            && v.len() >= self.handle_len()
            && self.gamma.is_prefix_of(v)
            && self.delta.is_suffix_of(v)
    }

    pub fn apply(&self, u: &Word, site: usize, v: &Word) -> Result<Word> {
        if site > u.len() || !self.is_site(u, site) {
            return Err(Error::SiteMismatch {
                word: u.clone(),
                site,
            });
        }
        if !self.partner_matches(v) {
            return Err(Error::PartnerMismatch(v.clone()));
        }
        Ok(u.insert_at(site, v))
    }

    /// All words obtainable from `(u, v)` with this rule.
    pub fn splice(&self, u: &Word, v: &Word) -> BTreeSet<Word> {
        if !self.partner_matches(v) {
            return BTreeSet::new();
        }
        self.match_sites(u)
            .into_iter()
            .map(|i| u.insert_at(i, v))
            .collect()
    }
}

impl fmt::Display for FlatSplicingRule {
    /// File-format spelling: `alpha | gamma - delta | beta`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} | {} - {} | {}",
            self.alpha, self.gamma, self.delta, self.beta
        )
    }
}
