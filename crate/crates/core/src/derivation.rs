//! Labeled systems and their derivation languages.
//!
//! A derivation starts from an initial word and repeatedly splices the
//! current word (always the first operand) with a partner drawn from the
//! initial set. It is terminal when no rule applies to the last word. The
//! labels of the applied rules spell a Szilard word (injective, λ-free
//! labeling) or a control word (shared labels allowed, λ erased).
//!
//! Zero-step derivations are excluded, so ε is never a Szilard word.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::system::FlatSplicingSystem;
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Named(Symbol),
    /// The empty label, control mode only.
    Lambda,
}

impl Label {
    pub fn named(s: &str) -> Self {
        Label::Named(Symbol::new(s))
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        match self {
            Label::Named(s) => Some(s),
            Label::Lambda => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Named(s) => write!(f, "{s}"),
            Label::Lambda => f.write_str("lambda"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Szilard,
    Control,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Szilard => "szilard",
            Mode::Control => "control",
        })
    }
}

/// A sequence of non-λ labels.
pub type LabelWord = Word;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSystem {
    name: String,
    system: FlatSplicingSystem,
    labels: Vec<Label>,
    mode: Mode,
}

impl LabeledSystem {
    pub fn new(
        name: impl Into<String>,
        system: FlatSplicingSystem,
        labels: Vec<Label>,
        mode: Mode,
    ) -> Result<Self> {
        if labels.len() != system.rules().len() {
            return Err(Error::LabelCount {
                expected: system.rules().len(),
                found: labels.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            match l {
                Label::Lambda if mode == Mode::Szilard => return Err(Error::LambdaInSzilard),
                Label::Lambda => {}
                Label::Named(s) => {
                    if system.alphabet().contains(s) {
                        return Err(Error::LabelClash(s.clone()));
                    }
                    if !seen.insert(s.clone()) && mode == Mode::Szilard {
                        return Err(Error::DuplicateLabel(s.clone()));
                    }
                }
            }
        }
        Ok(LabeledSystem {
            name: name.into(),
            system,
            labels,
            mode,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn system(&self) -> &FlatSplicingSystem {
        &self.system
    }
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn label_set(&self) -> BTreeSet<Symbol> {
        self.labels.iter().filter_map(|l| l.symbol().cloned()).collect()
    }

    pub fn map_system(self, f: impl FnOnce(FlatSplicingSystem) -> FlatSplicingSystem) -> Self {
        LabeledSystem {
            system: f(self.system),
            ..self
        }
    }

    pub fn explorer(&self, partner_bound: usize) -> Explorer<'_> {
        Explorer::new(self, partner_bound)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DerivationStep {
    pub before: Word,
    pub partner: Word,
    pub rule_index: usize,
    pub site: usize,
    pub after: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Derivation {
    pub start: Word,
    pub steps: Vec<DerivationStep>,
    pub terminal: bool,
}

impl Derivation {
    pub fn last_word(&self) -> &Word {
        self.steps.last().map_or(&self.start, |s| &s.after)
    }

    /// Labels of the applied rules with λ erased.
    pub fn label_word(&self, lsys: &LabeledSystem) -> LabelWord {
        self.steps
            .iter()
            .filter_map(|s| lsys.labels[s.rule_index].symbol().cloned())
            .collect()
    }

    /// Recomputes every step from scratch and checks the terminal flag.
    pub fn replay(&self, lsys: &LabeledSystem) -> Result<()> {
        let sys = lsys.system();
        let fail = |step: usize, message: String| Err(Error::Replay { step, message });
        if !sys.initial().contains(&self.start) {
            return fail(0, format!("start {} is not an initial word", self.start));
        }
        let mut cur = &self.start;
        for (i, st) in self.steps.iter().enumerate() {
            if &st.before != cur {
                return fail(i + 1, "steps do not chain".into());
            }
            if !sys.initial().contains(&st.partner) {
                return fail(i + 1, format!("partner {} is not an initial word", st.partner));
            }
            let Some(rule) = sys.rules().get(st.rule_index) else {
                return fail(i + 1, format!("no rule {}", st.rule_index));
            };
            match rule.apply(&st.before, st.site, &st.partner) {
                Ok(w) if w == st.after => {}
                Ok(w) => return fail(i + 1, format!("recomputed {w}, stored {}", st.after)),
                Err(e) => return fail(i + 1, e.to_string()),
            }
            cur = &st.after;
        }
        if self.terminal == sys.applicable(cur) {
            return fail(self.steps.len(), "terminal flag disagrees with applicability".into());
        }
        Ok(())
    }

    /// Human-readable trace, one line per step.
    pub fn render(&self, lsys: &LabeledSystem) -> String {
        let mut out = format!("start {}\n", self.start);
        for (i, st) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{}. {} : ({}, {}) @{} => {}\n",
                i + 1,
                lsys.labels[st.rule_index],
                st.before,
                st.partner,
                st.site,
                st.after
            ));
        }
        out.push_str(if self.terminal {
            "terminal\n"
        } else {
            "not terminal\n"
        });
        out
    }
}

/// Result of an explicit derivation enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivationEnumeration {
    pub derivations: Vec<Derivation>,
    /// Branches that ran out of steps (or of bounded partners) while a rule
    /// was still applicable.
    pub truncated: usize,
    pub max_steps: usize,
    pub partner_bound: usize,
}

/// A bounded slice of a derivation language, mapped through per-rule images.
#[derive(Debug)]
pub struct LanguageSlice {
    pub words: BTreeSet<Word>,
    /// Distinct non-terminal words where the search was cut off.
    pub truncated: usize,
    pub max_steps: usize,
    pub max_len: Option<usize>,
    pub partner_bound: usize,
    starts: BTreeMap<Word, Word>,
    memo: HashMap<(Word, usize), Rc<Node>>,
    images: Vec<Word>,
    rem_root: usize,
}

impl LanguageSlice {
    /// A terminal derivation whose image is `w`, if `w` is in the slice.
    pub fn witness(&self, w: &Word) -> Option<Derivation> {
        let start = self.starts.get(w)?;
        let mut cur = start.clone();
        let mut rem = self.rem_root;
        let mut image: &[Symbol] = w;
        let mut steps = Vec::new();
        loop {
            let node = self.memo.get(&(cur.clone(), rem))?;
            let entry = node.suffixes.get(&Word::new(image.to_vec()))?;
            let Some(via) = &entry.via else {
                return Some(Derivation {
                    start: start.clone(),
                    steps,
                    terminal: true,
                });
            };
            let im = &self.images[via.rule_index];
            image = &image[im.len()..];
            rem -= im.len();
            cur = via.after.clone();
            steps.push(via.clone());
        }
    }
}

#[derive(Debug)]
struct Entry {
    steps: usize,
    via: Option<DerivationStep>,
}

#[derive(Debug)]
struct Node {
    budget: usize,
    suffixes: HashMap<Word, Entry>,
}

/// Search engine over one labeled system with a fixed partner bound.
pub struct Explorer<'a> {
    lsys: &'a LabeledSystem,
    partner_bound: usize,
    partners: Vec<Vec<Word>>,
    starts: Vec<Word>,
}

impl<'a> Explorer<'a> {
    /// `partner_bound` caps the length of partners and start words taken
    /// from a regular initial set; finite sets are used whole.
    pub fn new(lsys: &'a LabeledSystem, partner_bound: usize) -> Self {
        let members = lsys.system.initial().members_upto(partner_bound);
        let partners = lsys
            .system
            .rules()
            .iter()
            .map(|r| members.iter().filter(|v| r.partner_matches(v)).cloned().collect())
            .collect();
        Explorer {
            lsys,
            partner_bound,
            partners,
            starts: members.into_iter().collect(),
        }
    }

    pub fn system(&self) -> &LabeledSystem {
        self.lsys
    }

    pub fn partner_bound(&self) -> usize {
        self.partner_bound
    }

    pub fn starts(&self) -> &[Word] {
        &self.starts
    }

    /// Every legal `(rule, site, partner)` move from `current`, ordered by
    /// rule index, then site, then partner.
    pub fn step_options(&self, current: &Word) -> Vec<DerivationStep> {
        let mut out = Vec::new();
        for (idx, rule) in self.lsys.system.rules().iter().enumerate() {
            if self.partners[idx].is_empty() {
                continue;
            }
            for site in rule.match_sites(current) {
                for partner in &self.partners[idx] {
                    out.push(DerivationStep {
                        before: current.clone(),
                        partner: partner.clone(),
                        rule_index: idx,
                        site,
                        after: current.insert_at(site, partner),
                    });
                }
            }
        }
        out
    }

    fn is_terminal(&self, w: &Word) -> bool {
        !self.lsys.system.applicable(w)
    }

    /// Depth-first enumeration of all terminal derivations of at most
    /// `max_steps` steps. Exponential in general; meant for small systems.
    pub fn enumerate_terminal_derivations(&self, max_steps: usize) -> DerivationEnumeration {
        let mut result = DerivationEnumeration {
            derivations: Vec::new(),
            truncated: 0,
            max_steps,
            partner_bound: self.partner_bound,
        };
        for start in &self.starts {
            if self.is_terminal(start) {
                continue;
            }
            let mut path = Vec::new();
            self.dfs(start, start, &mut path, max_steps, &mut result);
        }
        result
    }

    fn dfs(
        &self,
        start: &Word,
        cur: &Word,
        path: &mut Vec<DerivationStep>,
        budget: usize,
        out: &mut DerivationEnumeration,
    ) {
        if self.is_terminal(cur) {
            out.derivations.push(Derivation {
                start: start.clone(),
                steps: path.clone(),
                terminal: true,
            });
            return;
        }
        let options = if budget == 0 {
            Vec::new()
        } else {
            self.step_options(cur)
        };
        if options.is_empty() {
            out.truncated += 1;
            return;
        }
        for step in options {
            let next = step.after.clone();
            path.push(step);
            self.dfs(start, &next, path, budget - 1, out);
            path.pop();
        }
    }

    fn rule_images(&self, hom: impl Fn(&Label) -> Result<Word>) -> Result<Vec<Word>> {
        self.lsys.labels.iter().map(hom).collect()
    }

    /// Szilard words of all terminal derivations with at most `k` steps.
    pub fn szilard_upto(&self, k: usize) -> Result<LanguageSlice> {
        if self.lsys.mode != Mode::Szilard {
            return Err(Error::ModeMismatch {
                expected: "szilard",
            });
        }
        self.label_language(k, Some(k))
    }

    /// Control words (λ erased) of all terminal derivations with at most
    /// `max_steps` steps.
    pub fn control_upto(&self, max_steps: usize) -> Result<LanguageSlice> {
        if self.lsys.mode != Mode::Control {
            return Err(Error::ModeMismatch {
                expected: "control",
            });
        }
        self.label_language(max_steps, None)
    }

    /// Label words of terminal derivations, in either mode, keeping those of
    /// length at most `max_len`.
    pub fn label_language(&self, max_steps: usize, max_len: Option<usize>) -> Result<LanguageSlice> {
        let images = self.rule_images(|l| {
            Ok(l.symbol().map_or_else(Word::empty, |s| Word::new(vec![s.clone()])))
        })?;
        Ok(self.image_language(images, max_steps, max_len))
    }

    /// Images of terminal derivations where rule `i` contributes `images[i]`.
    ///
    /// Memoized on `(word, remaining image length)`; each memo entry keeps
    /// the least step count per image suffix, so interleavings that lead to
    /// the same word are explored once.
    pub fn image_language(
        &self,
        images: Vec<Word>,
        max_steps: usize,
        max_len: Option<usize>,
    ) -> LanguageSlice {
        let rem_root = max_len.unwrap_or(usize::MAX);
        let mut search = ImageSearch {
            explorer: self,
            images: &images,
            memo: HashMap::new(),
            truncated: HashSet::new(),
        };
        let mut starts: BTreeMap<Word, Word> = BTreeMap::new();
        let mut best: BTreeMap<Word, usize> = BTreeMap::new();
        for start in &self.starts {
            if self.is_terminal(start) {
                continue;
            }
            let node = search.suffixes(start, max_steps, rem_root);
            for (img, e) in &node.suffixes {
                if e.steps > max_steps {
                    continue;
                }
                let better = best.get(img).is_none_or(|&s| e.steps < s);
                if better {
                    best.insert(img.clone(), e.steps);
                    starts.insert(img.clone(), start.clone());
                }
            }
        }
        let truncated = search.truncated.len();
        let memo = search.memo;
        LanguageSlice {
            words: starts.keys().cloned().collect(),
            truncated,
            max_steps,
            max_len,
            partner_bound: self.partner_bound,
            starts,
            memo,
            images,
            rem_root,
        }
    }

    /// A terminal derivation whose Szilard word is `w`, searched exactly:
    /// each label fixes the rule, partners and sites are tried in order.
    pub fn is_derivation_member(&self, w: &LabelWord) -> Result<Option<Derivation>> {
        if self.lsys.mode != Mode::Szilard {
            return Err(Error::ModeMismatch {
                expected: "szilard",
            });
        }
        if w.is_empty() {
            return Ok(None);
        }
        let mut dead = HashSet::new();
        for start in &self.starts {
            let mut path = Vec::new();
            if self.member_dfs(w, start, &mut path, &mut dead) {
                return Ok(Some(Derivation {
                    start: start.clone(),
                    steps: path,
                    terminal: true,
                }));
            }
        }
        Ok(None)
    }

    fn member_dfs(
        &self,
        w: &LabelWord,
        cur: &Word,
        path: &mut Vec<DerivationStep>,
        dead: &mut HashSet<(Word, usize)>,
    ) -> bool {
        let j = path.len();
        if j == w.len() {
            return self.is_terminal(cur);
        }
        if dead.contains(&(cur.clone(), j)) {
            return false;
        }
        let wanted = &w[j];
        for (idx, rule) in self.lsys.system.rules().iter().enumerate() {
            if self.lsys.labels[idx].symbol() != Some(wanted) {
                continue;
            }
            for site in rule.match_sites(cur) {
                for partner in &self.partners[idx] {
                    let after = cur.insert_at(site, partner);
                    path.push(DerivationStep {
                        before: cur.clone(),
                        partner: partner.clone(),
                        rule_index: idx,
                        site,
                        after: after.clone(),
                    });
                    if self.member_dfs(w, &after, path, dead) {
                        return true;
                    }
                    path.pop();
                }
            }
        }
        dead.insert((cur.clone(), j));
        false
    }

    /// Longest prefix of `w` that some derivation can follow, with one such
    /// derivation (not necessarily terminal).
    pub fn longest_realizable_prefix(&self, w: &LabelWord) -> (usize, Option<Derivation>) {
        let mut best: (usize, Option<Derivation>) = (0, None);
        for start in &self.starts {
            let mut frontier: Vec<(Word, Vec<DerivationStep>)> = vec![(start.clone(), Vec::new())];
            let mut depth = 0;
            while depth < w.len() && !frontier.is_empty() {
                let mut next = Vec::new();
                let mut seen = HashSet::new();
                for (cur, path) in &frontier {
                    for st in self.step_options(cur) {
                        if self.lsys.labels[st.rule_index].symbol() == Some(&w[depth])
                            && seen.insert(st.after.clone())
                        {
                            let mut p = path.clone();
                            let after = st.after.clone();
                            p.push(st);
                            next.push((after, p));
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                frontier = next;
                depth += 1;
            }
            if best.1.is_none() || depth > best.0 {
                let (last, steps) = frontier.swap_remove(0);
                best = (
                    depth,
                    Some(Derivation {
                        start: start.clone(),
                        terminal: self.is_terminal(&last),
                        steps,
                    }),
                );
            }
        }
        best
    }
}

struct ImageSearch<'x, 'a> {
    explorer: &'x Explorer<'a>,
    images: &'x [Word],
    memo: HashMap<(Word, usize), Rc<Node>>,
    truncated: HashSet<Word>,
}

impl ImageSearch<'_, '_> {
    fn suffixes(&mut self, w: &Word, budget: usize, rem: usize) -> Rc<Node> {
        let key = (w.clone(), rem);
        if let Some(node) = self.memo.get(&key) {
            if node.budget >= budget {
                return Rc::clone(node);
            }
        }
        let mut suffixes: HashMap<Word, Entry> = HashMap::new();
        if self.explorer.is_terminal(w) {
            suffixes.insert(
                Word::empty(),
                Entry {
                    steps: 0,
                    via: None,
                },
            );
        } else {
            let options = if budget == 0 {
                Vec::new()
            } else {
                self.explorer.step_options(w)
            };
            if options.is_empty() {
                self.truncated.insert(w.clone());
            }
            for step in options {
                let im = &self.images[step.rule_index];
                if im.len() > rem {
                    continue;
                }
                let im = im.clone();
                let child = self.suffixes(&step.after, budget - 1, rem - im.len());
                for (suf, e) in &child.suffixes {
                    if e.steps > budget - 1 {
                        continue;
                    }
                    let full = im.concat(suf);
                    let steps = e.steps + 1;
                    match suffixes.get(&full) {
                        Some(old) if old.steps <= steps => {}
                        _ => {
                            suffixes.insert(
                                full,
                                Entry {
                                    steps,
                                    via: Some(step.clone()),
                                },
                            );
                        }
                    }
                }
            }
        }
        let node = Rc::new(Node { budget, suffixes });
        self.memo.insert(key, Rc::clone(&node));
        node
    }
}
