//! Bounded subset checks between Szilard languages and regular sets, and
//! the differential harness comparing grammars with compiled systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::compile::{label_images, CompilationOutput, Homomorphism};
use crate::derivation::{Derivation, Explorer, LabelWord};
use crate::error::Result;
use crate::grammar::{grammar_language_upto, Grammar, GrammarStep};
use crate::regular::RegularSet;
use crate::word::Word;

/// At most this many counterexamples are listed in a verdict.
pub const MAX_COUNTEREXAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub status: Status,
    /// Length bound (`r-in-sz`) or step bound (`sz-in-r`).
    pub bound: usize,
    pub partner_bound: usize,
    /// Shortest failing words first, canonical order.
    pub counterexamples: Vec<(LabelWord, String)>,
    /// Search branches cut off by the bound (sz-in-r only).
    pub truncated: usize,
}

impl Verdict {
    pub fn render(&self) -> String {
        let mut out = format!("{} (bound={})\n", self.status, self.bound);
        for (w, why) in &self.counterexamples {
            out.push_str(&format!("{w} : {why}\n"));
        }
        out
    }
}

/// Is every word of `r` up to length `k` a Szilard word of the system?
///
/// Szilard words are nonempty, so ε in `r` is skipped rather than reported.
pub fn check_reg_subset_sz(r: &RegularSet, ex: &Explorer<'_>, k: usize) -> Result<Verdict> {
    let mut counterexamples = Vec::new();
    for w in r.enumerate_upto(k) {
        if w.is_empty() {
            continue;
        }
        if ex.is_derivation_member(&w)?.is_none() {
            let (depth, _) = ex.longest_realizable_prefix(&w);
            let why = if depth == w.len() {
                "every derivation following it is non-terminal".to_string()
            } else {
                format!("no derivation follows it past {depth} of {} labels", w.len())
            };
            counterexamples.push((w, why));
            if counterexamples.len() == MAX_COUNTEREXAMPLES {
                break;
            }
        }
    }
    Ok(Verdict {
        status: if counterexamples.is_empty() { Status::Pass } else { Status::Fail },
        bound: k,
        partner_bound: ex.partner_bound(),
        counterexamples,
        truncated: 0,
    })
}

/// Is every Szilard word of a terminal derivation with at most `max_steps`
/// steps in `r`?
pub fn check_sz_subset_reg(ex: &Explorer<'_>, r: &RegularSet, max_steps: usize) -> Result<Verdict> {
    let slice = ex.szilard_upto(max_steps)?;
    let counterexamples: Vec<_> = slice
        .words
        .iter()
        .filter(|w| !r.contains(w))
        .take(MAX_COUNTEREXAMPLES)
        .map(|w| (w.clone(), "not accepted by the pattern".to_string()))
        .collect();
    Ok(Verdict {
        status: if counterexamples.is_empty() { Status::Pass } else { Status::Fail },
        bound: max_steps,
        partner_bound: ex.partner_bound(),
        counterexamples,
        truncated: slice.truncated,
    })
}

/// Outcome of comparing a grammar slice with a system's image slice.
#[derive(Clone, Debug)]
pub struct DiffReport {
    pub k: usize,
    pub max_steps: usize,
    pub partner_bound: usize,
    pub grammar_words: BTreeSet<Word>,
    /// False when the grammar oracle could not prove its slice complete.
    pub grammar_exact: bool,
    pub system_words: BTreeSet<Word>,
    /// In the grammar slice but not in the system slice.
    pub missing: BTreeSet<Word>,
    /// In the system slice but not in the grammar slice.
    pub extra: BTreeSet<Word>,
    /// Non-terminal words where the system search hit the step bound.
    pub truncated: usize,
    pub grammar_witnesses: BTreeMap<Word, Vec<GrammarStep>>,
    pub system_witnesses: BTreeMap<Word, Derivation>,
}

impl DiffReport {
    pub fn equal(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }

    /// The report with the roles of the two sides exchanged.
    pub fn swapped(&self) -> DiffReport {
        DiffReport {
            grammar_words: self.system_words.clone(),
            system_words: self.grammar_words.clone(),
            missing: self.extra.clone(),
            extra: self.missing.clone(),
            ..self.clone()
        }
    }

    pub fn render(&self) -> String {
        let mut out = if self.equal() {
            format!("EQUAL (k={})\n", self.k)
        } else {
            format!("DIFFERENT (k={})\n", self.k)
        };
        for w in &self.missing {
            out.push_str(&format!("missing {w}\n"));
        }
        for w in &self.extra {
            out.push_str(&format!("extra {w}\n"));
        }
        out
    }

    /// Bounds and statistics, for stderr.
    pub fn stats(&self) -> String {
        format!(
            "k={} steps={} partner_bound={} grammar={} system={} grammar_exact={} truncated={}",
            self.k,
            self.max_steps,
            self.partner_bound,
            self.grammar_words.len(),
            self.system_words.len(),
            self.grammar_exact,
            self.truncated
        )
    }
}

/// Default step bound for compiled systems: `k * (longest axiom + 4)`.
pub fn default_max_steps(ex: &Explorer<'_>, k: usize) -> usize {
    let longest = ex.starts().iter().map(|w| w.len()).max().unwrap_or(1);
    k * (longest + 4)
}

/// Sentential-form bound used for grammars that are not context-free.
pub fn default_sentential_bound(k: usize) -> usize {
    2 * k + 4
}

/// Compares `L(g)` with the images of terminal derivations, both cut at
/// length `k`. `images[i]` is the image of rule `i`.
pub fn differential_compare_images(
    g: &Grammar,
    ex: &Explorer<'_>,
    images: Vec<Word>,
    k: usize,
    max_steps: usize,
) -> DiffReport {
    let gs = grammar_language_upto(g, k, default_sentential_bound(k));
    let slice = ex.image_language(images, max_steps, Some(k));
    let missing: BTreeSet<Word> = gs.words.difference(&slice.words).cloned().collect();
    let extra: BTreeSet<Word> = slice.words.difference(&gs.words).cloned().collect();
    let grammar_witnesses = missing
        .iter()
        .filter_map(|w| gs.witness(w).map(|s| (w.clone(), s.to_vec())))
        .collect();
    let system_witnesses = extra
        .iter()
        .filter_map(|w| slice.witness(w).map(|d| (w.clone(), d)))
        .collect();
    DiffReport {
        k,
        max_steps,
        partner_bound: ex.partner_bound(),
        grammar_exact: gs.exact,
        grammar_words: gs.words,
        system_words: slice.words.clone(),
        missing,
        extra,
        truncated: slice.truncated,
        grammar_witnesses,
        system_witnesses,
    }
}

/// [`differential_compare_images`] with the images given by `hom`, or by
/// the labels themselves when there is none.
pub fn differential_compare_with(
    g: &Grammar,
    ex: &Explorer<'_>,
    hom: Option<&Homomorphism>,
    k: usize,
    max_steps: usize,
) -> Result<DiffReport> {
    let images = match hom {
        Some(h) => h.rule_images(ex.system())?,
        None => label_images(ex.system()),
    };
    Ok(differential_compare_images(g, ex, images, k, max_steps))
}

pub fn differential_compare(
    g: &Grammar,
    out: &CompilationOutput,
    k: usize,
    max_steps: usize,
    partner_bound: usize,
) -> Result<DiffReport> {
    let ex = Explorer::new(&out.lsys, partner_bound);
    Ok(differential_compare_images(g, &ex, out.rule_images()?, k, max_steps))
}
