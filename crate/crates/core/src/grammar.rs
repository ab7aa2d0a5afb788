//! Grammars, normal-form checks, a bounded language oracle and conversion
//! to Chomsky normal form.
//!
//! The oracle is deliberately independent of the splicing engine: every
//! compiler test compares against it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::word::{Symbol, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub label: Symbol,
    pub lhs: Word,
    pub rhs: Word,
}

impl Production {
    pub fn new(label: impl AsRef<str>, lhs: Word, rhs: Word) -> Self {
        Production {
            label: Symbol::new(label),
            lhs,
            rhs,
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {} -> {}", self.label, self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    name: String,
    nonterminals: Vec<Symbol>,
    terminals: Vec<Symbol>,
    start: Symbol,
    productions: Vec<Production>,
}

impl Grammar {
    pub fn new(
        name: impl Into<String>,
        nonterminals: Vec<Symbol>,
        terminals: Vec<Symbol>,
        start: Symbol,
        productions: Vec<Production>,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::Grammar(m));
        let n: BTreeSet<&Symbol> = nonterminals.iter().collect();
        let t: BTreeSet<&Symbol> = terminals.iter().collect();
        if n.len() != nonterminals.len() || t.len() != terminals.len() {
            return bad("repeated symbol in nonterminals or terminals".into());
        }
        if let Some(s) = n.intersection(&t).next() {
            return bad(format!("`{s}` is both a nonterminal and a terminal"));
        }
        if !n.contains(&start) {
            return bad(format!("start symbol `{start}` is not a nonterminal"));
        }
        let mut labels = BTreeSet::new();
        for p in &productions {
            if !labels.insert(&p.label) {
                return bad(format!("production label `{}` used twice", p.label));
            }
            if p.lhs.is_empty() {
                return bad(format!("production {p} has an empty left side"));
            }
            if !p.lhs.iter().any(|s| n.contains(s)) {
                return bad(format!("production {p} has no nonterminal on its left side"));
            }
            if let Some(s) = p.lhs.iter().chain(p.rhs.iter()).find(|s| !n.contains(s) && !t.contains(s)) {
                return bad(format!("production {p} uses undeclared symbol `{s}`"));
            }
        }
        Ok(Grammar {
            name: name.into(),
            nonterminals,
            terminals,
            start,
            productions,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn nonterminals(&self) -> &[Symbol] {
        &self.nonterminals
    }
    pub fn terminals(&self) -> &[Symbol] {
        &self.terminals
    }
    pub fn start(&self) -> &Symbol {
        &self.start
    }
    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn is_nonterminal(&self, s: &Symbol) -> bool {
        self.nonterminals.contains(s)
    }
    pub fn is_terminal(&self, s: &Symbol) -> bool {
        self.terminals.contains(s)
    }

    pub fn is_context_free(&self) -> bool {
        self.productions.iter().all(|p| p.lhs.len() == 1)
    }

    /// No production shrinks the sentential form.
    pub fn is_monotone(&self) -> bool {
        self.productions.iter().all(|p| p.lhs.len() <= p.rhs.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    /// `D -> a D'` or `D -> a`.
    RightLinear,
    /// `A -> B C` or `A -> a`.
    Cnf,
    /// `A -> a B1 .. Bk`, k >= 0.
    Gnf,
    /// `A -> B C`, `A B -> C D`, `A -> a`, `A -> eps`.
    Kuroda,
    /// Any single-nonterminal left side.
    ContextFree,
    /// No restriction beyond a nonterminal on the left.
    Unrestricted,
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalForm::RightLinear => "rightlinear",
            NormalForm::Cnf => "cnf",
            NormalForm::Gnf => "gnf",
            NormalForm::Kuroda => "kuroda",
            NormalForm::ContextFree => "cf",
            NormalForm::Unrestricted => "type0",
        })
    }
}

impl FromStr for NormalForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "rightlinear" => NormalForm::RightLinear,
            "cnf" => NormalForm::Cnf,
            "gnf" => NormalForm::Gnf,
            "kuroda" => NormalForm::Kuroda,
            "cf" => NormalForm::ContextFree,
            "type0" => NormalForm::Unrestricted,
            _ => {
                return Err(format!(
                    "unknown form `{s}` (expected rightlinear, cnf, gnf, kuroda, cf or type0)"
                ))
            }
        })
    }
}

/// A production that does not fit the claimed normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub label: Symbol,
    pub production: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.production)
    }
}

/// Every production that does not match one of the form's templates.
pub fn validate_form(g: &Grammar, form: NormalForm) -> Vec<Violation> {
    let n = |s: &Symbol| g.is_nonterminal(s);
    let t = |s: &Symbol| g.is_terminal(s);
    g.productions
        .iter()
        .filter(|p| {
            let (l, r) = (&p.lhs[..], &p.rhs[..]);
            let single = l.len() == 1 && n(&l[0]);
            let ok = match form {
                NormalForm::RightLinear => {
                    single && matches!(r, [a] if t(a)) || single && matches!(r, [a, d] if t(a) && n(d))
                }
                NormalForm::Cnf => {
                    single && (matches!(r, [a] if t(a)) || matches!(r, [b, c] if n(b) && n(c)))
                }
                NormalForm::Gnf => {
                    single && matches!(r, [a, rest @ ..] if t(a) && rest.iter().all(n))
                }
                NormalForm::Kuroda => {
                    (single
                        && (r.is_empty()
                            || matches!(r, [a] if t(a))
                            || matches!(r, [b, c] if n(b) && n(c))))
                        || (l.len() == 2 && l.iter().all(n) && r.len() == 2 && r.iter().all(n))
                }
                NormalForm::ContextFree => single,
                NormalForm::Unrestricted => true,
            };
            !ok
        })
        .map(|p| Violation {
            label: p.label.clone(),
            production: p.to_string(),
        })
        .collect()
}

pub fn check_form(g: &Grammar, form: NormalForm) -> Result<()> {
    let v = validate_form(g, form);
    if v.is_empty() {
        return Ok(());
    }
    Err(Error::NormalForm {
        form: form.to_string(),
        violations: v.iter().map(|v| v.production.as_str()).collect::<Vec<_>>().join("; "),
    })
}

/// One rewriting step: production `production` applied at `position` of the
/// current sentential form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GrammarStep {
    pub production: usize,
    pub position: usize,
}

/// Applies `steps` from the start symbol, checking each one.
pub fn replay_grammar(g: &Grammar, steps: &[GrammarStep]) -> Result<Word> {
    let mut cur = Word::new(vec![g.start.clone()]);
    for (i, st) in steps.iter().enumerate() {
        let p = g
            .productions
            .get(st.production)
            .ok_or_else(|| Error::Replay {
                step: i + 1,
                message: format!("no production {}", st.production),
            })?;
        let end = st.position + p.lhs.len();
        if end > cur.len() || cur[st.position..end] != p.lhs[..] {
            return Err(Error::Replay {
                step: i + 1,
                message: format!("{} does not occur in {cur} at {}", p.lhs, st.position),
            });
        }
        cur = rewrite(&cur, st.position, p);
    }
    Ok(cur)
}

fn rewrite(w: &Word, pos: usize, p: &Production) -> Word {
    let mut out = Vec::with_capacity(w.len() + p.rhs.len());
    out.extend_from_slice(&w[..pos]);
    out.extend_from_slice(&p.rhs);
    out.extend_from_slice(&w[pos + p.lhs.len()..]);
    Word::new(out)
}

/// Terminal words of a grammar up to a length bound.
#[derive(Clone, Debug)]
pub struct GrammarSlice {
    pub words: BTreeSet<Word>,
    /// True when `words` is provably all of `L(G)` up to length `k`.
    pub exact: bool,
    pub k: usize,
    pub sentential_bound: usize,
    witnesses: BTreeMap<Word, Vec<GrammarStep>>,
}

impl GrammarSlice {
    /// A derivation of `w` from the start symbol.
    pub fn witness(&self, w: &Word) -> Option<&[GrammarStep]> {
        self.witnesses.get(w).map(Vec::as_slice)
    }
}

/// `{ w in L(G) : |w| <= k }`.
///
/// Context-free grammars are handled exactly by a fixpoint over
/// per-nonterminal word sets. Other grammars are searched breadth-first over
/// sentential forms of length at most `sentential_bound`; the result is exact
/// only if the grammar never shrinks a form.
pub fn grammar_language_upto(g: &Grammar, k: usize, sentential_bound: usize) -> GrammarSlice {
    if g.is_context_free() {
        context_free_upto(g, k)
    } else {
        sentential_search(g, k, sentential_bound)
    }
}

/// How a terminal word was produced from a nonterminal.
#[derive(Clone, Debug)]
struct Tree {
    production: usize,
    /// The word contributed by each nonterminal of the right side, in order.
    children: Vec<Word>,
}

fn context_free_upto(g: &Grammar, k: usize) -> GrammarSlice {
    let mut sets: HashMap<Symbol, BTreeMap<Word, Tree>> =
        g.nonterminals.iter().map(|n| (n.clone(), BTreeMap::new())).collect();
    loop {
        let mut changed = false;
        for (pi, p) in g.productions.iter().enumerate() {
            // Left fold over the right side: partial words with the
            // nonterminal contributions used so far.
            let mut partial: Vec<(Word, Vec<Word>)> = vec![(Word::empty(), Vec::new())];
            for s in p.rhs.iter() {
                let mut next = Vec::new();
                if g.is_terminal(s) {
                    for (w, ch) in partial {
                        if w.len() < k {
                            let mut w = w;
                            w.push(s.clone());
                            next.push((w, ch));
                        }
                    }
                } else {
                    for (w, ch) in &partial {
                        for sub in sets[s].keys() {
                            if w.len() + sub.len() <= k {
                                let mut ch = ch.clone();
                                ch.push(sub.clone());
                                next.push((w.concat(sub), ch));
                            }
                        }
                    }
                }
                partial = next;
            }
            let target = sets.get_mut(&p.lhs[0]).expect("lhs is a nonterminal");
            for (w, children) in partial {
                if !target.contains_key(&w) {
                    target.insert(
                        w,
                        Tree {
                            production: pi,
                            children,
                        },
                    );
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut witnesses = BTreeMap::new();
    for w in sets[&g.start].keys() {
        let mut order = Vec::new();
        preorder(g, &sets, &g.start, w, &mut order);
        witnesses.insert(w.clone(), leftmost_positions(g, &order));
    }
    GrammarSlice {
        words: sets[&g.start].keys().cloned().collect(),
        exact: true,
        k,
        sentential_bound: k,
        witnesses,
    }
}

fn preorder(
    g: &Grammar,
    sets: &HashMap<Symbol, BTreeMap<Word, Tree>>,
    n: &Symbol,
    w: &Word,
    out: &mut Vec<usize>,
) {
    let tree = &sets[n][w];
    out.push(tree.production);
    let nts = g.productions[tree.production]
        .rhs
        .iter()
        .filter(|s| g.is_nonterminal(s));
    for (child, sub) in nts.zip(&tree.children) {
        preorder(g, sets, child, sub, out);
    }
}

/// Turns a preorder production sequence into a leftmost derivation.
fn leftmost_positions(g: &Grammar, order: &[usize]) -> Vec<GrammarStep> {
    let mut cur = Word::new(vec![g.start.clone()]);
    let mut steps = Vec::with_capacity(order.len());
    for &pi in order {
        let position = cur
            .iter()
            .position(|s| g.is_nonterminal(s))
            .expect("preorder matches the sentential form");
        steps.push(GrammarStep {
            production: pi,
            position,
        });
        cur = rewrite(&cur, position, &g.productions[pi]);
    }
    steps
}

fn sentential_search(g: &Grammar, k: usize, bound: usize) -> GrammarSlice {
    let bound = bound.max(k);
    let start = Word::new(vec![g.start.clone()]);
    let mut parent: HashMap<Word, Option<(Word, GrammarStep)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([start]);
    let mut words = BTreeSet::new();
    while let Some(cur) = queue.pop_front() {
        if cur.iter().all(|s| g.is_terminal(s)) {
            if cur.len() <= k {
                words.insert(cur);
            }
            continue;
        }
        for (pi, p) in g.productions.iter().enumerate() {
            if p.lhs.len() > cur.len() {
                continue;
            }
            for pos in 0..=cur.len() - p.lhs.len() {
                if cur[pos..pos + p.lhs.len()] != p.lhs[..] {
                    continue;
                }
                let next = rewrite(&cur, pos, p);
                if next.len() > bound || parent.contains_key(&next) {
                    continue;
                }
                let step = GrammarStep {
                    production: pi,
                    position: pos,
                };
                parent.insert(next.clone(), Some((cur.clone(), step)));
                queue.push_back(next);
            }
        }
    }
    let witnesses = words
        .iter()
        .map(|w| {
            let mut steps = Vec::new();
            let mut cur = w;
            while let Some(Some((prev, st))) = parent.get(cur) {
                steps.push(*st);
                cur = prev;
            }
            steps.reverse();
            (w.clone(), steps)
        })
        .collect();
    GrammarSlice {
        words,
        exact: g.is_monotone(),
        k,
        sentential_bound: bound,
        witnesses,
    }
}

/// A name based on `base` that is not yet in `taken`; records it.
fn fresh(base: &str, taken: &mut BTreeSet<Symbol>) -> Symbol {
    let mut cand = Symbol::new(base);
    let mut i = 1;
    while taken.contains(&cand) {
        cand = Symbol::new(format!("{base}{i}"));
        i += 1;
    }
    taken.insert(cand.clone());
    cand
}

/// Converts a context-free grammar to Chomsky normal form.
///
/// The result generates the same language up to the empty word, which is
/// dropped. Productions are relabeled `p1`, `p2`, ...
pub fn to_cnf(g: &Grammar) -> Result<Grammar> {
    check_form(g, NormalForm::ContextFree)?;
    let mut taken: BTreeSet<Symbol> = g.nonterminals.iter().chain(&g.terminals).cloned().collect();
    let mut nts: Vec<Symbol> = g.nonterminals.clone();
    let mut rules: Vec<(Symbol, Vec<Symbol>)> =
        g.productions.iter().map(|p| (p.lhs[0].clone(), p.rhs.to_vec())).collect();
    let is_t = |s: &Symbol| g.is_terminal(s);

    // Fresh start symbol if the old one occurs on a right side.
    let mut start = g.start.clone();
    if rules.iter().any(|(_, r)| r.contains(&start)) {
        let s0 = fresh(&format!("{start}0"), &mut taken);
        nts.push(s0.clone());
        rules.push((s0.clone(), vec![start]));
        start = s0;
    }

    // Terminals inside long right sides get their own nonterminal.
    let mut term_nt: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    for (_, rhs) in rules.iter_mut() {
        if rhs.len() < 2 {
            continue;
        }
        for s in rhs.iter_mut() {
            if is_t(s) {
                let nt = term_nt
                    .entry(s.clone())
                    .or_insert_with(|| fresh(&format!("T_{s}"), &mut taken))
                    .clone();
                *s = nt;
            }
        }
    }
    for (t, nt) in &term_nt {
        nts.push(nt.clone());
        rules.push((nt.clone(), vec![t.clone()]));
    }

    // Binarize.
    let mut bin = Vec::new();
    for (lhs, rhs) in rules {
        if rhs.len() <= 2 {
            bin.push((lhs, rhs));
            continue;
        }
        let mut head = lhs.clone();
        for s in &rhs[..rhs.len() - 2] {
            let next = fresh(&format!("{lhs}_"), &mut taken);
            nts.push(next.clone());
            bin.push((head, vec![s.clone(), next.clone()]));
            head = next;
        }
        bin.push((head, rhs[rhs.len() - 2..].to_vec()));
    }

    // Remove empty productions.
    let mut nullable: BTreeSet<Symbol> = BTreeSet::new();
    loop {
        let before = nullable.len();
        for (lhs, rhs) in &bin {
            if rhs.iter().all(|s| nullable.contains(s)) {
                nullable.insert(lhs.clone());
            }
        }
        if nullable.len() == before {
            break;
        }
    }
    let mut del: BTreeSet<(Symbol, Vec<Symbol>)> = BTreeSet::new();
    for (lhs, rhs) in &bin {
        let opt: Vec<usize> = (0..rhs.len()).filter(|&i| nullable.contains(&rhs[i])).collect();
        for mask in 0..1usize << opt.len() {
            let kept: Vec<Symbol> = rhs
                .iter()
                .enumerate()
                .filter(|(i, _)| opt.iter().position(|o| o == i).is_none_or(|b| mask >> b & 1 == 0))
                .map(|(_, s)| s.clone())
                .collect();
            if !kept.is_empty() {
                del.insert((lhs.clone(), kept));
            }
        }
    }

    // Remove unit productions.
    let unit = |rhs: &[Symbol]| rhs.len() == 1 && !is_t(&rhs[0]);
    let mut reach: BTreeSet<(Symbol, Symbol)> = nts.iter().map(|n| (n.clone(), n.clone())).collect();
    loop {
        let mut add = Vec::new();
        for (a, b) in &reach {
            for (lhs, rhs) in &del {
                if lhs == b && unit(rhs) && !reach.contains(&(a.clone(), rhs[0].clone())) {
                    add.push((a.clone(), rhs[0].clone()));
                }
            }
        }
        if add.is_empty() {
            break;
        }
        reach.extend(add);
    }
    let mut cnf: BTreeSet<(Symbol, Vec<Symbol>)> = BTreeSet::new();
    for (a, b) in &reach {
        for (lhs, rhs) in &del {
            if lhs == b && !unit(rhs) {
                cnf.insert((a.clone(), rhs.clone()));
            }
        }
    }

    // Keep only generating and reachable nonterminals.
    let mut generating: BTreeSet<Symbol> = BTreeSet::new();
    loop {
        let before = generating.len();
        for (lhs, rhs) in &cnf {
            if rhs.iter().all(|s| is_t(s) || generating.contains(s)) {
                generating.insert(lhs.clone());
            }
        }
        if generating.len() == before {
            break;
        }
    }
    cnf.retain(|(lhs, rhs)| generating.contains(lhs) && rhs.iter().all(|s| is_t(s) || generating.contains(s)));
    let mut reachable = BTreeSet::from([start.clone()]);
    loop {
        let before = reachable.len();
        for (lhs, rhs) in &cnf {
            if reachable.contains(lhs) {
                reachable.extend(rhs.iter().filter(|s| !is_t(s)).cloned());
            }
        }
        if reachable.len() == before {
            break;
        }
    }
    cnf.retain(|(lhs, _)| reachable.contains(lhs));

    let nonterminals: Vec<Symbol> = nts.into_iter().filter(|n| *n == start || reachable.contains(n)).collect();
    let productions = cnf
        .into_iter()
        .enumerate()
        .map(|(i, (lhs, rhs))| Production::new(format!("p{}", i + 1), Word::new(vec![lhs]), Word::new(rhs)))
        .collect();
    Grammar::new(
        g.name.clone(),
        nonterminals,
        g.terminals.clone(),
        start,
        productions,
    )
}
