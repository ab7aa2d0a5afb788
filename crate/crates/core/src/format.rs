//! Line-oriented text formats for systems, grammars and homomorphisms.
//!
//! All three share the same lexical rules: `#` starts a comment, tokens are
//! whitespace-separated and `eps` spells the empty word. Printing is
//! canonical, so `parse(print(x)) == x` and identical inputs give identical
//! bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::compile::Homomorphism;
use crate::derivation::{Label, LabeledSystem, Mode};
use crate::error::{Error, Result};
use crate::grammar::{validate_form, Grammar, NormalForm, Production};
use crate::regular::RegularSet;
use crate::rule::FlatSplicingRule;
use crate::system::{FlatSplicingSystem, InitialSet};
use crate::word::{Symbol, Word, EPSILON};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-blank lines with comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

fn word_of(toks: &[&str]) -> Word {
    if toks == [EPSILON] {
        Word::empty()
    } else {
        toks.iter().map(|t| Symbol::new(t)).collect()
    }
}

fn check_tokens(line: usize, toks: &[&str]) -> Result<()> {
    for t in toks {
        if *t != EPSILON && !Symbol::is_valid_name(t) {
            return Err(parse_err(line, format!("`{t}` is not a valid symbol")));
        }
    }
    if toks.len() > 1 && toks.contains(&EPSILON) {
        return Err(parse_err(line, "`eps` must stand alone"));
    }
    Ok(())
}

/// `rule LABEL : alpha | gamma - delta | beta`
fn parse_rule_line(line: usize, toks: &[&str]) -> Result<(Label, FlatSplicingRule)> {
    if toks.len() < 3 || toks[2] != ":" {
        return Err(parse_err(line, "expected `rule LABEL : alpha | gamma - delta | beta`"));
    }
    let label = match toks[1] {
        "lambda" => Label::Lambda,
        l if Symbol::is_valid_name(l) => Label::named(l),
        l => return Err(parse_err(line, format!("invalid label `{l}`"))),
    };
    let body = &toks[3..];
    let bars: Vec<usize> = body
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == "|")
        .map(|(i, _)| i)
        .collect();
    if bars.len() != 2 {
        return Err(parse_err(line, "a rule needs exactly two `|` separators"));
    }
    let (alpha, middle, beta) = (&body[..bars[0]], &body[bars[0] + 1..bars[1]], &body[bars[1] + 1..]);
    let dashes: Vec<usize> = middle
        .iter()
        .enumerate()
        .filter(|(_, t)| **t == "-")
        .map(|(i, _)| i)
        .collect();
    if dashes.len() != 1 {
        return Err(parse_err(line, "the inserted handles need exactly one `-`"));
    }
    let (gamma, delta) = (&middle[..dashes[0]], &middle[dashes[0] + 1..]);
    for part in [alpha, gamma, delta, beta] {
        if part.is_empty() {
            return Err(parse_err(line, "empty handle; write `eps`"));
        }
        check_tokens(line, part)?;
    }
    let rule = FlatSplicingRule::new(word_of(alpha), word_of(gamma), word_of(delta), word_of(beta))
        .map_err(|e| parse_err(line, e.to_string()))?;
    Ok((label, rule))
}

pub fn parse_system(text: &str) -> Result<LabeledSystem> {
    let mut name = None;
    let mut mode = None;
    let mut alphabet: Option<BTreeSet<Symbol>> = None;
    let mut axioms: BTreeSet<Word> = BTreeSet::new();
    let mut pattern: Option<String> = None;
    let mut rules = Vec::new();
    let mut labels = Vec::new();
    let mut rule_lines = Vec::new();
    let mut symbol_lines: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut note = |line: usize, w: &[&str]| {
        for t in w {
            symbol_lines.entry(Symbol::new(t)).or_insert(line);
        }
    };

    for (line, toks) in lines(text) {
        match toks[0] {
            "system" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `system NAME`"));
                }
                name = Some(toks[1].to_string());
            }
            "mode" => {
                mode = Some(match toks.get(1..) {
                    Some(["szilard"]) => Mode::Szilard,
                    Some(["control"]) => Mode::Control,
                    _ => return Err(parse_err(line, "expected `mode szilard` or `mode control`")),
                });
            }
            "alphabet" => {
                check_tokens(line, &toks[1..])?;
                if toks[1..].contains(&EPSILON) {
                    return Err(parse_err(line, "`eps` is not a symbol"));
                }
                alphabet = Some(toks[1..].iter().map(|t| Symbol::new(t)).collect());
            }
            "axiom" => {
                check_tokens(line, &toks[1..])?;
                let w = word_of(&toks[1..]);
                if w.is_empty() {
                    return Err(parse_err(line, "initial words must be nonempty"));
                }
                note(line, &toks[1..]);
                axioms.insert(w);
            }
            "axioms-pattern" => {
                if pattern.is_some() {
                    return Err(parse_err(line, "only one `axioms-pattern` line is allowed"));
                }
                let src = toks[1..].join(" ");
                RegularSet::parse(&src).map_err(|e| parse_err(line, e.to_string()))?;
                pattern = Some(src);
            }
            "rule" => {
                let (label, rule) = parse_rule_line(line, &toks)?;
                note(line, &toks[3..]);
                labels.push(label);
                rules.push(rule);
                rule_lines.push(line);
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| parse_err(1, "missing `system NAME` line"))?;
    let mode = mode.ok_or_else(|| parse_err(1, "missing `mode` line"))?;
    let alphabet = alphabet.ok_or_else(|| parse_err(1, "missing `alphabet` line"))?;
    let initial = match pattern {
        None => InitialSet::Finite(axioms),
        Some(p) if axioms.is_empty() => InitialSet::Regular(RegularSet::parse(&p)?),
        Some(p) => {
            let mut src = format!("( {p} )");
            for w in &axioms {
                write!(src, " | ( {w} )").unwrap();
            }
            InitialSet::Regular(RegularSet::parse(&src)?)
        }
    };
    let sys = FlatSplicingSystem::new(alphabet, initial, rules).map_err(|e| match &e {
        Error::UnknownSymbol(s) => parse_err(symbol_lines.get(s).copied().unwrap_or(1), e.to_string()),
        _ => parse_err(1, e.to_string()),
    })?;
    let rule_line_of = |s: &Symbol, nth: usize| {
        labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.symbol() == Some(s))
            .nth(nth)
            .map_or(1, |(i, _)| rule_lines[i])
    };
    LabeledSystem::new(name, sys, labels.clone(), mode).map_err(|e| match &e {
        Error::DuplicateLabel(s) => parse_err(rule_line_of(s, 1), e.to_string()),
        Error::LabelClash(s) => parse_err(rule_line_of(s, 0), e.to_string()),
        Error::LambdaInSzilard => parse_err(
            labels
                .iter()
                .position(|l| *l == Label::Lambda)
                .map_or(1, |i| rule_lines[i]),
            e.to_string(),
        ),
        _ => parse_err(1, e.to_string()),
    })
}

pub fn print_system(lsys: &LabeledSystem) -> String {
    let sys = lsys.system();
    let mut out = String::new();
    writeln!(out, "system {}", lsys.name()).unwrap();
    writeln!(out, "mode {}", lsys.mode()).unwrap();
    let alphabet: Vec<&str> = sys.alphabet().iter().map(|s| s.name()).collect();
    writeln!(out, "alphabet {}", alphabet.join(" ")).unwrap();
    match sys.initial() {
        InitialSet::Finite(ws) => {
            for w in ws {
                writeln!(out, "axiom {w}").unwrap();
            }
        }
        InitialSet::Regular(r) => writeln!(out, "axioms-pattern {}", r.source()).unwrap(),
    }
    for (rule, label) in sys.rules().iter().zip(lsys.labels()) {
        writeln!(out, "rule {label} : {rule}").unwrap();
    }
    out
}

/// Parses a grammar file and validates it against its declared form.
pub fn parse_grammar(text: &str) -> Result<(Grammar, NormalForm)> {
    let (g, form) = parse_grammar_unchecked(text)?;
    let violations = validate_form(&g, form);
    if !violations.is_empty() {
        let first = &violations[0];
        let line = g
            .productions()
            .iter()
            .position(|p| p.label == first.label)
            .and_then(|i| production_line(text, i))
            .unwrap_or(1);
        return Err(parse_err(
            line,
            format!("not in {form} form: {}", first),
        ));
    }
    Ok((g, form))
}

fn production_line(text: &str, index: usize) -> Option<usize> {
    lines(text)
        .filter(|(_, t)| t[0] == "rule")
        .nth(index)
        .map(|(l, _)| l)
}

/// Parses without running the normal-form check (`--no-validate`).
pub fn parse_grammar_unchecked(text: &str) -> Result<(Grammar, NormalForm)> {
    let mut header = None;
    let mut nonterminals = None;
    let mut terminals = None;
    let mut start = None;
    let mut productions = Vec::new();
    for (line, toks) in lines(text) {
        match toks[0] {
            "grammar" => {
                if toks.len() != 4 || toks[2] != "form" {
                    return Err(parse_err(line, "expected `grammar NAME form FORM`"));
                }
                let form: NormalForm = toks[3].parse().map_err(|m: String| parse_err(line, m))?;
                header = Some((toks[1].to_string(), form));
            }
            "nonterminals" | "terminals" => {
                check_tokens(line, &toks[1..])?;
                let syms: Vec<Symbol> = toks[1..].iter().map(|t| Symbol::new(t)).collect();
                if toks[0] == "nonterminals" {
                    nonterminals = Some(syms);
                } else {
                    terminals = Some(syms);
                }
            }
            "start" => {
                if toks.len() != 2 {
                    return Err(parse_err(line, "expected `start SYMBOL`"));
                }
                start = Some(Symbol::new(toks[1]));
            }
            "rule" => {
                if toks.len() < 5 || toks[2] != ":" {
                    return Err(parse_err(line, "expected `rule LABEL : LHS -> RHS`"));
                }
                let Some(arrow) = toks.iter().position(|t| *t == "->") else {
                    return Err(parse_err(line, "missing `->`"));
                };
                let (lhs, rhs) = (&toks[3..arrow], &toks[arrow + 1..]);
                if lhs.is_empty() || rhs.is_empty() {
                    return Err(parse_err(line, "empty side; write `eps` for the empty word"));
                }
                check_tokens(line, lhs)?;
                check_tokens(line, rhs)?;
                productions.push(Production::new(toks[1], word_of(lhs), word_of(rhs)));
            }
            other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
        }
    }
    let (name, form) = header.ok_or_else(|| parse_err(1, "missing `grammar NAME form FORM` line"))?;
    let g = Grammar::new(
        name,
        nonterminals.ok_or_else(|| parse_err(1, "missing `nonterminals` line"))?,
        terminals.ok_or_else(|| parse_err(1, "missing `terminals` line"))?,
        start.ok_or_else(|| parse_err(1, "missing `start` line"))?,
        productions,
    )
    .map_err(|e| parse_err(1, e.to_string()))?;
    Ok((g, form))
}

pub fn print_grammar(g: &Grammar, form: NormalForm) -> String {
    let mut out = String::new();
    let join = |v: &[Symbol]| v.iter().map(|s| s.name()).collect::<Vec<_>>().join(" ");
    writeln!(out, "grammar {} form {}", g.name(), form).unwrap();
    writeln!(out, "nonterminals {}", join(g.nonterminals())).unwrap();
    writeln!(out, "terminals {}", join(g.terminals())).unwrap();
    writeln!(out, "start {}", g.start()).unwrap();
    for p in g.productions() {
        writeln!(out, "rule {} : {} -> {}", p.label, p.lhs, p.rhs).unwrap();
    }
    out
}

pub fn parse_hom(text: &str) -> Result<Homomorphism> {
    let mut map = BTreeMap::new();
    for (line, toks) in lines(text) {
        if toks.len() < 3 || toks[1] != "->" {
            return Err(parse_err(line, "expected `LABEL -> WORD`"));
        }
        check_tokens(line, &toks[..1])?;
        check_tokens(line, &toks[2..])?;
        if map.insert(Symbol::new(toks[0]), word_of(&toks[2..])).is_some() {
            return Err(parse_err(line, format!("label `{}` mapped twice", toks[0])));
        }
    }
    Ok(Homomorphism::new(map))
}

pub fn print_hom(h: &Homomorphism) -> String {
    let mut out = String::new();
    for (l, w) in h.entries() {
        writeln!(out, "{l} -> {w}").unwrap();
    }
    out
}
