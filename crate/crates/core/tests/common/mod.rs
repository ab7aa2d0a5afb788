//! Shared helpers for the integration tests: fixture loading, golden
//! traces, random grammar and system generators, and a direct interpreter
//! for regular patterns.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use flatsplice::compile::CompilationOutput;
use flatsplice::grammar::{Grammar, NormalForm, Production};
use flatsplice::regular::Pattern;
use flatsplice::system::InitialSet;
use flatsplice::{Explorer, FlatSplicingRule, FlatSplicingSystem, Label, LabeledSystem, Mode, Symbol, Word};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> String {
    let path = repo_root().join("fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn words(ws: &[&str]) -> BTreeSet<Word> {
    ws.iter().map(|w| Word::parse(w)).collect()
}

pub fn render_set(ws: &BTreeSet<Word>) -> String {
    let v: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

/// `a^i b^j c^k` as a word.
pub fn abc(i: usize, j: usize, k: usize) -> Word {
    let mut v = Vec::new();
    v.extend(std::iter::repeat_n(Symbol::new("a"), i));
    v.extend(std::iter::repeat_n(Symbol::new("b"), j));
    v.extend(std::iter::repeat_n(Symbol::new("c"), k));
    Word::new(v)
}

/// One compiled step: the rule family `label` (a schema name, matched with
/// or without its `~k` instance suffix) splices `partner` into `before`.
pub struct GoldenStep {
    pub trace: &'static str,
    pub label: &'static str,
    pub before: &'static str,
    pub partner: &'static str,
    pub after: &'static str,
}

const fn step(
    trace: &'static str,
    label: &'static str,
    before: &'static str,
    partner: &'static str,
    after: &'static str,
) -> GoldenStep {
    GoldenStep {
        trace,
        label,
        before,
        partner,
        after,
    }
}

/// Golden steps for the Kuroda compiler on `kuroda-golden.g`. Multi-step
/// traces chain: each `before` is the previous `after`.
pub const GOLDEN: &[GoldenStep] = &[
    step("r1-intro", "r1^1", "X S Y", "[r1] A B", "X S [r1] A B Y"),
    step("r1-intro", "r1^2", "X S A Y", "[r1] A B", "X S [r1] A B A Y"),
    step("r1-intro", "r1^3", "X S A C Y", "[r1] A B", "X S [r1] A B A C Y"),
    step("r1-intro", "r1^4", "X S A C D Y", "[r1] A B", "X S [r1] A B A C D Y"),
    step("r1-intro", "r1^5", "X S A C D B Y", "[r1] A B", "X S [r1] A B A C D B Y"),
    step("r2-intro-cd", "r2^7", "X A B C D Y", "[r2] C D", "X A B [r2] C D C D Y"),
    step("r2-intro-c", "r2^9", "X A B C Y", "[r2] C D", "X A B [r2] C D C Y"),
    step("r2-intro-end", "r2^8", "X A B Y", "[r2] C D", "X A B [r2] C D Y"),
    step(
        "r2-gap",
        "r2^10",
        "X A S [r1] S [r1] B C D Y",
        "[r2]",
        "X A [r2] S [r1] S [r1] B C D Y",
    ),
    step(
        "r2-gap",
        "r2^11",
        "X A [r2] S [r1] S [r1] B C D Y",
        "[r2]",
        "X A [r2] S [r1] [r2] S [r1] B C D Y",
    ),
    step(
        "r2-gap",
        "r2^11",
        "X A [r2] S [r1] [r2] S [r1] B C D Y",
        "[r2]",
        "X A [r2] S [r1] [r2] S [r1] [r2] B C D Y",
    ),
    step(
        "r2-gap",
        "r2^12",
        "X A [r2] S [r1] [r2] S [r1] [r2] B C D Y",
        "[r2] C D",
        "X A [r2] S [r1] [r2] S [r1] [r2] B [r2] C D C D Y",
    ),
    step("term-intro", "a_r3^1", "X A Y", "ka_r3", "X A ka_r3 Y"),
    step("erase-intro", "r4^14", "X B Y", "keps_r4", "X B keps_r4 Y"),
    step("term-erase-marked", "a_r3^2", "X S [r1] [rm] A Y", "ka_r3", "X S [r1] [rm] A ka_r3 Y"),
    step("term-erase-marked", "a_r3^3", "X S [r1] [rm] A C Y", "ka_r3", "X S [r1] [rm] A ka_r3 C Y"),
    step("term-erase-marked", "a_r3^4", "X S [r1] [rm] A C D Y", "ka_r3", "X S [r1] [rm] A ka_r3 C D Y"),
    step("term-erase-marked", "a_r3^5", "X S [r1] [rm] A C D S Y", "ka_r3", "X S [r1] [rm] A ka_r3 C D S Y"),
    step(
        "term-erase-marked",
        "a_r3^6",
        "X S [r1] [rm] A C D S B Y",
        "ka_r3",
        "X S [r1] [rm] A ka_r3 C D S B Y",
    ),
    step("term-erase-marked", "r4^15", "X S [r1] [rm] B Y", "keps_r4", "X S [r1] [rm] B keps_r4 Y"),
    step("term-erase-marked", "r4^16", "X S [r1] [rm] B C Y", "keps_r4", "X S [r1] [rm] B keps_r4 C Y"),
    step("term-erase-marked", "r4^17", "X S [r1] [rm] B C D Y", "keps_r4", "X S [r1] [rm] B keps_r4 C D Y"),
    step(
        "term-erase-marked",
        "r4^18",
        "X S [r1] [rm] B C D S Y",
        "keps_r4",
        "X S [r1] [rm] B keps_r4 C D S Y",
    ),
    step(
        "term-erase-marked",
        "r4^19",
        "X S [r1] [rm] B C D S A Y",
        "keps_r4",
        "X S [r1] [rm] B keps_r4 C D S A Y",
    ),
    step("term-close", "rm+1^r3", "X [rm] A ka_r3 C Y", "[rm]", "X [rm] A ka_r3 [rm] C Y"),
    step("erase-close", "rm+2^r4", "X [rm] B keps_r4 C D Y", "[rm]", "X [rm] B keps_r4 [rm] C D Y"),
    step("marker-intro", "rm", "X A [r1] S B Y", "[rm]", "X A [r1] [rm] S B Y"),
    step(
        "marker-walk",
        "rm+3",
        "X [rm] S [r1] A B [r2] C D Y",
        "[rm]",
        "X [rm] S [r1] [rm] A B [r2] C D Y",
    ),
    step(
        "marker-walk",
        "rm+1",
        "X [rm] S [r1] [rm] A B [r2] C D Y",
        "[rm]",
        "X [rm] S [r1] [rm] A B [r2] [rm] C D Y",
    ),
    step(
        "marker-skip",
        "rm+2",
        "X [rm] A [r2] S [r1] [r2] B [r2] C D Y",
        "[rm]",
        "X [rm] A [r2] [rm] S [r1] [r2] B [r2] C D Y",
    ),
    step(
        "marker-skip",
        "rm+4",
        "X [rm] A [r2] [rm] S [r1] [r2] B [r2] C D Y",
        "[rm]",
        "X [rm] A [r2] [rm] S [r1] [r2] [rm] B [r2] C D Y",
    ),
    step(
        "marker-skip",
        "rm+6",
        "X [rm] A [r2] [rm] S [r1] [r2] [rm] B [r2] C D Y",
        "[rm]",
        "X [rm] A [r2] [rm] S [r1] [r2] [rm] B [r2] [rm] C D Y",
    ),
    step(
        "r1-interior",
        "r1^6",
        "X S A [r2] S [r1] [r2] B [r2] C D Y",
        "[r1] A B",
        "X S [r1] A B A [r2] S [r1] [r2] B [r2] C D Y",
    ),
    step(
        "term-interior",
        "a_r3^7",
        "X [rm] A A [r2] S [r1] [r2] B [r2] C D Y",
        "ka_r3",
        "X [rm] A ka_r3 A [r2] S [r1] [r2] B [r2] C D Y",
    ),
    step(
        "erase-interior",
        "r4^20",
        "X [rm] B A [r2] S [r1] [r2] B [r2] C D Y",
        "keps_r4",
        "X [rm] B keps_r4 A [r2] S [r1] [r2] B [r2] C D Y",
    ),
];

pub fn label_in_family(label: &Label, family: &str) -> bool {
    match label.symbol() {
        Some(s) => {
            let name = s.name();
            name == family || name.strip_prefix(family).is_some_and(|rest| rest.starts_with('~'))
        }
        None => false,
    }
}

/// Step options from `before` that use a rule of `family` with `partner`.
pub fn family_results(ex: &Explorer<'_>, family: &str, before: &Word, partner: &Word) -> BTreeSet<Word> {
    let lsys = ex.system();
    ex.step_options(before)
        .into_iter()
        .filter(|s| &s.partner == partner && label_in_family(&lsys.labels()[s.rule_index], family))
        .map(|s| s.after)
        .collect()
}

/// Checks one golden step against the compiled system: the move must be
/// offered by `step_options` and must recompute through the rule itself.
pub fn check_golden(out: &CompilationOutput, ex: &Explorer<'_>, g: &GoldenStep) -> Result<(), String> {
    let (before, partner, after) = (Word::parse(g.before), Word::parse(g.partner), Word::parse(g.after));
    let lsys = &out.lsys;
    let hit = ex.step_options(&before).into_iter().find(|s| {
        s.partner == partner && s.after == after && label_in_family(&lsys.labels()[s.rule_index], g.label)
    });
    let Some(st) = hit else {
        return Err(format!("{} {}: no {} step from {before} gives {after}", g.trace, g.label, g.label));
    };
    let rule = &lsys.system().rules()[st.rule_index];
    match rule.apply(&before, st.site, &partner) {
        Ok(w) if w == after => Ok(()),
        other => Err(format!("{} {}: rule {rule} recomputes {other:?}", g.trace, g.label)),
    }
}

// Random generators. Every generator takes a seed so that failures can be
// reproduced from the printed case.

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn s(name: &str) -> Symbol {
    Symbol::new(name)
}

fn pick<'a>(r: &mut ChaCha8Rng, v: &'a [Symbol]) -> &'a Symbol {
    v.choose(r).expect("nonempty")
}

/// A random grammar in `form`. The productions that give each compiler its
/// full type (a binary production, a production with a successor) are
/// always present, so the compiled type is the declared one.
pub fn random_grammar(form: NormalForm, seed: u64) -> Grammar {
    let mut r = rng(seed);
    let extra_nts = match form {
        NormalForm::Kuroda => r.gen_range(1..=2),
        _ => r.gen_range(1..=3),
    };
    let mut n = vec![s("S")];
    n.extend((1..=extra_nts).map(|i| s(&format!("N{i}"))));
    let t = vec![s("a"), s("b")];
    let w = |v: Vec<&Symbol>| Word::new(v.into_iter().cloned().collect());
    let (n1, a, b) = (&n[1], &t[0], &t[1]);
    let mut rules: Vec<(Word, Word)> = match form {
        NormalForm::RightLinear | NormalForm::Gnf => {
            vec![(w(vec![&n[0]]), w(vec![a, n1])), (w(vec![n1]), w(vec![b]))]
        }
        NormalForm::Cnf => vec![(w(vec![&n[0]]), w(vec![n1, n1])), (w(vec![n1]), w(vec![a]))],
        NormalForm::Kuroda => vec![
            (w(vec![&n[0]]), w(vec![n1, n1])),
            (w(vec![n1, n1]), w(vec![n1, &n[0]])),
            (w(vec![n1]), w(vec![a])),
        ],
        _ => Vec::new(),
    };
    let extra = r.gen_range(0..=3);
    for _ in 0..extra {
        let lhs = pick(&mut r, &n).clone();
        let rule = match form {
            NormalForm::RightLinear => {
                if r.gen_bool(0.5) {
                    (w(vec![&lhs]), w(vec![pick(&mut r, &t)]))
                } else {
                    (w(vec![&lhs]), w(vec![pick(&mut r, &t), pick(&mut r, &n)]))
                }
            }
            NormalForm::Cnf => {
                if r.gen_bool(0.5) {
                    (w(vec![&lhs]), w(vec![pick(&mut r, &t)]))
                } else {
                    (w(vec![&lhs]), w(vec![pick(&mut r, &n), pick(&mut r, &n)]))
                }
            }
            NormalForm::Gnf => {
                let mut rhs = vec![pick(&mut r, &t).clone()];
                for _ in 0..r.gen_range(0..=2) {
                    rhs.push(pick(&mut r, &n).clone());
                }
                (w(vec![&lhs]), Word::new(rhs))
            }
            NormalForm::Kuroda => match r.gen_range(0..4) {
                0 => (w(vec![&lhs]), w(vec![pick(&mut r, &n), pick(&mut r, &n)])),
                1 => (
                    w(vec![&lhs, pick(&mut r, &n)]),
                    w(vec![pick(&mut r, &n), pick(&mut r, &n)]),
                ),
                2 => (w(vec![&lhs]), w(vec![pick(&mut r, &t)])),
                _ => (w(vec![&lhs]), Word::empty()),
            },
            _ => {
                let mut rhs = Vec::new();
                for _ in 0..r.gen_range(0..=3) {
                    let pool = if r.gen_bool(0.5) { &n } else { &t };
                    rhs.push(pick(&mut r, pool).clone());
                }
                (w(vec![&lhs]), Word::new(rhs))
            }
        };
        rules.push(rule);
    }
    if rules.is_empty() {
        rules.push((w(vec![&n[0]]), w(vec![a])));
    }
    let productions = rules
        .into_iter()
        .enumerate()
        .map(|(i, (l, rhs))| Production::new(format!("r{}", i + 1), l, rhs))
        .collect();
    Grammar::new(format!("rand{seed}"), n, t, s("S"), productions).expect("generated grammar is valid")
}

/// A context-free grammar with ε-rules, unit rules and long right sides.
pub fn random_cf_grammar(seed: u64) -> Grammar {
    let mut r = rng(seed);
    let mut n = vec![s("S")];
    n.extend((1..=r.gen_range(0..=2)).map(|i| s(&format!("N{i}"))));
    let t = vec![s("a"), s("b")];
    let count = r.gen_range(1..=5);
    let mut productions = Vec::new();
    for i in 0..count {
        let lhs = if i == 0 { n[0].clone() } else { pick(&mut r, &n).clone() };
        let mut rhs = Vec::new();
        for _ in 0..r.gen_range(0..=3) {
            let pool = if r.gen_bool(0.5) { &n } else { &t };
            rhs.push(pick(&mut r, pool).clone());
        }
        productions.push(Production::new(format!("r{}", i + 1), Word::new(vec![lhs]), Word::new(rhs)));
    }
    Grammar::new(format!("cf{seed}"), n, t, s("S"), productions).expect("generated grammar is valid")
}

pub fn random_word(r: &mut ChaCha8Rng, alphabet: &[Symbol], lo: usize, hi: usize) -> Word {
    let len = r.gen_range(lo..=hi);
    (0..len).map(|_| pick(r, alphabet).clone()).collect()
}

/// A random rule over `alphabet`: contexts of length at most 2, handles of
/// length at most 1.
pub fn random_rule(r: &mut ChaCha8Rng, alphabet: &[Symbol]) -> FlatSplicingRule {
    let alpha = random_word(r, alphabet, 0, 2);
    let beta = random_word(r, alphabet, 0, 2);
    let gamma = random_word(r, alphabet, 0, 1);
    let delta = random_word(r, alphabet, 0, 1);
    FlatSplicingRule::new(alpha, gamma, delta, beta).expect("handles are short")
}

/// A small Szilard system over `{a, b, c}` with labels `l1`, `l2`, ...
pub fn random_szilard_system(seed: u64) -> LabeledSystem {
    let mut r = rng(seed);
    let alphabet = vec![s("a"), s("b"), s("c")];
    let axioms: BTreeSet<Word> = (0..r.gen_range(1..=2))
        .map(|_| random_word(&mut r, &alphabet, 1, 3))
        .collect();
    let rules: Vec<FlatSplicingRule> = (0..r.gen_range(1..=2)).map(|_| random_rule(&mut r, &alphabet)).collect();
    let labels = (1..=rules.len()).map(|i| Label::named(&format!("l{i}"))).collect();
    let sys = FlatSplicingSystem::new(alphabet.into_iter().collect(), InitialSet::Finite(axioms), rules)
        .expect("generated system is valid");
    LabeledSystem::new(format!("rand{seed}"), sys, labels, Mode::Szilard).expect("labels are fresh")
}

/// All words over `alphabet` of length `lo..=hi`.
pub fn all_words(alphabet: &[Symbol], lo: usize, hi: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut layer = vec![Word::empty()];
    for len in 0..=hi {
        if len >= lo {
            out.extend(layer.iter().cloned());
        }
        layer = layer
            .iter()
            .flat_map(|w| {
                alphabet.iter().map(move |a| {
                    let mut x = w.clone();
                    x.push(a.clone());
                    x
                })
            })
            .collect();
    }
    out
}

/// End positions of `p` matched from `i`, by direct recursion on the AST.
fn ends(p: &Pattern, w: &[Symbol], i: usize) -> BTreeSet<usize> {
    match p {
        Pattern::Nothing => BTreeSet::new(),
        Pattern::Epsilon => [i].into(),
        Pattern::Symbol(x) => {
            if w.get(i) == Some(x) {
                [i + 1].into()
            } else {
                BTreeSet::new()
            }
        }
        Pattern::Concat(parts) => parts.iter().fold([i].into(), |acc: BTreeSet<usize>, q| {
            acc.iter().flat_map(|&j| ends(q, w, j)).collect()
        }),
        Pattern::Alt(parts) => parts.iter().flat_map(|q| ends(q, w, i)).collect(),
        Pattern::Star(q) => {
            let mut seen: BTreeSet<usize> = [i].into();
            let mut todo = vec![i];
            while let Some(j) = todo.pop() {
                for k in ends(q, w, j) {
                    if seen.insert(k) {
                        todo.push(k);
                    }
                }
            }
            seen
        }
        Pattern::Plus(q) => {
            let star = Pattern::Star(q.clone());
            ends(q, w, i).into_iter().flat_map(|j| ends(&star, w, j)).collect()
        }
        Pattern::Optional(q) => {
            let mut out = ends(q, w, i);
            out.insert(i);
            out
        }
    }
}

pub fn naive_matches(p: &Pattern, w: &Word) -> bool {
    ends(p, w, 0).contains(&w.len())
}

fn abc_alphabet() -> Vec<Symbol> {
    vec![s("a"), s("b"), s("c")]
}

pub fn random_pattern(r: &mut ChaCha8Rng, depth: usize) -> Pattern {
    let leaf = depth == 0 || r.gen_bool(0.3);
    if leaf {
        return match r.gen_range(0..8) {
            0 => Pattern::Epsilon,
            1 => Pattern::Nothing,
            _ => Pattern::Symbol(pick(r, &abc_alphabet()).clone()),
        };
    }
    let kids = |r: &mut ChaCha8Rng| (0..r.gen_range(2..=3)).map(|_| random_pattern(r, depth - 1)).collect();
    match r.gen_range(0..5) {
        0 => Pattern::Concat(kids(r)),
        1 => Pattern::Alt(kids(r)),
        2 => Pattern::Star(Box::new(random_pattern(r, depth - 1))),
        3 => Pattern::Plus(Box::new(random_pattern(r, depth - 1))),
        _ => Pattern::Optional(Box::new(random_pattern(r, depth - 1))),
    }
}

// Property checks. Each takes a seed, builds its random case and returns a
// description of the first violation. Shared by the proptest suite and the
// acceptance runner.

/// Every legal application lengthens `u` by exactly `|v|`, and the sites
/// reported are exactly the gaps where both contexts hold.
pub fn check_additivity(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let al = abc_alphabet();
    let rule = random_rule(&mut r, &al);
    let u = random_word(&mut r, &al, 0, 6);
    let v = random_word(&mut r, &al, 1, 4);
    let sites = rule.match_sites(&u);
    for i in 0..=u.len() {
        let holds = rule.alpha().is_suffix_of(&u[..i]) && rule.beta().is_prefix_of(&u[i..]);
        if holds != sites.contains(&i) {
            return Err(format!("{rule} on {u}: gap {i} context={holds} sites={sites:?}"));
        }
    }
    for &i in &sites {
        match rule.apply(&u, i, &v) {
            Ok(w) if w.len() == u.len() + v.len() => {}
            Ok(w) => return Err(format!("{rule}: {u} + {v} at {i} gave {w}")),
            Err(e) if rule.partner_matches(&v) => return Err(format!("{rule}: {e}")),
            Err(_) => {}
        }
    }
    Ok(())
}

/// `splice` equals the set of insertions at every gap passing the checks.
pub fn check_splice_brute_force(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let al = abc_alphabet();
    let rule = random_rule(&mut r, &al);
    let u = random_word(&mut r, &al, 0, 6);
    let v = random_word(&mut r, &al, 0, 4);
    let (a, g, d, b) = (rule.alpha(), rule.gamma(), rule.delta(), rule.beta());
    let partner_ok = !v.is_empty()
        && v.len() >= g.len() + d.len()
        && v[..g.len()] == g[..]
        && v[v.len() - d.len()..] == d[..];
    let mut expected = BTreeSet::new();
    if partner_ok {
        for i in 0..=u.len() {
            let left_ok = i >= a.len() && u[i - a.len()..i] == a[..];
            let right_ok = u.len() - i >= b.len() && u[i..i + b.len()] == b[..];
            if left_ok && right_ok {
                let mut w = u[..i].to_vec();
                w.extend_from_slice(&v);
                w.extend_from_slice(&u[i..]);
                expected.insert(Word::new(w));
            }
        }
    }
    let got = rule.splice(&u, &v);
    if got == expected {
        Ok(())
    } else {
        Err(format!("{rule} on ({u}, {v}): splice {} brute force {}", render_set(&got), render_set(&expected)))
    }
}

/// A label word of length at most 3 is in the Szilard slice exactly when
/// membership search finds a witness, and each witness replays to it.
pub fn check_membership_coherence(seed: u64) -> Result<(), String> {
    let lsys = random_szilard_system(seed);
    let ex = lsys.explorer(8);
    let k = 3;
    let slice = ex.szilard_upto(k).map_err(|e| e.to_string())?;
    let labels: Vec<Symbol> = lsys.label_set().into_iter().collect();
    for w in all_words(&labels, 1, k) {
        let found = ex.is_derivation_member(&w).map_err(|e| e.to_string())?;
        if found.is_some() != slice.words.contains(&w) {
            return Err(format!(
                "{w}: member={} enumerated={}\n{}",
                found.is_some(),
                slice.words.contains(&w),
                flatsplice::format::print_system(&lsys)
            ));
        }
        if let Some(d) = found {
            d.replay(&lsys).map_err(|e| format!("{w}: witness does not replay: {e}"))?;
            if d.label_word(&lsys) != w {
                return Err(format!("{w}: witness spells {}", d.label_word(&lsys)));
            }
        }
    }
    Ok(())
}

/// The compiled automaton agrees with a direct interpreter of the pattern
/// after a print/parse round trip, on every word of length at most 6.
pub fn check_reg_contains(seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let p = random_pattern(&mut r, 3);
    let src = p.to_string();
    let set = flatsplice::regular::RegularSet::parse(&src).map_err(|e| format!("{src}: {e}"))?;
    let listed = set.enumerate_upto(4);
    for w in all_words(&abc_alphabet(), 0, 6) {
        let naive = naive_matches(&p, &w);
        if set.contains(&w) != naive {
            return Err(format!("{src} on {w:?}: automaton={} interpreter={naive}", !naive));
        }
        if w.len() <= 4 && listed.contains(&w) != naive {
            return Err(format!("{src} on {w:?}: enumerate disagrees"));
        }
    }
    Ok(())
}

/// CNF conversion keeps the nonempty words of length at most 6.
pub fn check_to_cnf(seed: u64) -> Result<(), String> {
    use flatsplice::grammar::{grammar_language_upto, to_cnf};
    let g = random_cf_grammar(seed);
    let c = to_cnf(&g).map_err(|e| e.to_string())?;
    let k = 6;
    let mut before = grammar_language_upto(&g, k, 2 * k + 4).words;
    before.remove(&Word::empty());
    let after = grammar_language_upto(&c, k, 2 * k + 4).words;
    if before == after {
        Ok(())
    } else {
        Err(format!(
            "{}\nbefore {} after {}",
            flatsplice::format::print_grammar(&g, NormalForm::ContextFree),
            render_set(&before),
            render_set(&after)
        ))
    }
}

/// Compiling, printing, reparsing and enumerating give identical output on
/// every run.
pub fn check_determinism(seed: u64) -> Result<(), String> {
    use flatsplice::compile::{compile, Target};
    use flatsplice::format::{parse_system, print_system};
    let target = Target::ALL[(seed % 6) as usize];
    let g = random_grammar(target.input_form(), seed / 6);
    let run = || -> Result<(String, String), String> {
        let out = compile(&g, target).map_err(|e| e.to_string())?;
        let text = print_system(&out.lsys);
        let back = parse_system(&text).map_err(|e| e.to_string())?;
        if print_system(&back) != text {
            return Err("print/parse round trip changed the system".into());
        }
        let images = out.rule_images().map_err(|e| e.to_string())?;
        let ex = back.explorer(8);
        let slice = ex.image_language(images, 6, Some(2));
        let listed: Vec<String> = slice.words.iter().map(|w| w.to_string()).collect();
        Ok((text, listed.join("\n")))
    };
    let (first, second) = (run()?, run()?);
    if first == second {
        Ok(())
    } else {
        Err(format!("{target} on seed {seed}: two runs differ"))
    }
}

/// The six property suites in reporting order.
pub const PROPERTIES: &[(&str, fn(u64) -> Result<(), String>)] = &[
    ("length additivity of apply", check_additivity),
    ("splice vs gap brute force", check_splice_brute_force),
    ("membership/enumeration coherence", check_membership_coherence),
    ("pattern membership vs interpreter", check_reg_contains),
    ("to_cnf keeps bounded languages", check_to_cnf),
    ("determinism", check_determinism),
];
