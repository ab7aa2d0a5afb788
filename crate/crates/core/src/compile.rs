//! Grammar to labeled-system constructions and label homomorphisms.
//!
//! Side-conditioned rule schemas are expanded into ground rules over the
//! finite symbol classes. In Szilard mode every instance of a schema with
//! variables gets the label `schema~k` (k counting from 1 in expansion
//! order); the homomorphism maps all instances alike.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::derivation::{Label, LabelWord, LabeledSystem, Mode};
use crate::error::{Error, Result};
use crate::grammar::{check_form, Grammar, NormalForm, Production};
use crate::rule::FlatSplicingRule;
use crate::system::{FlatSplicingSystem, InitialSet, SystemType};
use crate::word::{Symbol, Word};

/// A total map from labels to words, lifted to label words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Homomorphism {
    map: BTreeMap<Symbol, Word>,
}

impl Homomorphism {
    pub fn new(map: BTreeMap<Symbol, Word>) -> Self {
        Homomorphism { map }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Symbol, &Word)> {
        self.map.iter()
    }

    pub fn get(&self, label: &Symbol) -> Option<&Word> {
        self.map.get(label)
    }

    pub fn apply(&self, w: &LabelWord) -> Result<Word> {
        let mut out = Vec::new();
        for l in w.iter() {
            let img = self.map.get(l).ok_or_else(|| Error::UnmappedLabel(l.clone()))?;
            out.extend_from_slice(img);
        }
        Ok(Word::new(out))
    }

    pub fn image_upto<'a>(&self, words: impl IntoIterator<Item = &'a Word>) -> Result<BTreeSet<Word>> {
        words.into_iter().map(|w| self.apply(w)).collect()
    }

    /// Per-rule images for a labeled system; λ maps to ε.
    pub fn rule_images(&self, lsys: &LabeledSystem) -> Result<Vec<Word>> {
        lsys.labels()
            .iter()
            .map(|l| match l {
                Label::Lambda => Ok(Word::empty()),
                Label::Named(s) => self.map.get(s).cloned().ok_or_else(|| Error::UnmappedLabel(s.clone())),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    RegSz,
    CnfSz,
    KurodaSz,
    RegCl,
    GnfCl,
    KurodaCl,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::RegSz,
        Target::CnfSz,
        Target::KurodaSz,
        Target::RegCl,
        Target::GnfCl,
        Target::KurodaCl,
    ];

    pub fn input_form(self) -> NormalForm {
        match self {
            Target::RegSz | Target::RegCl => NormalForm::RightLinear,
            Target::CnfSz => NormalForm::Cnf,
            Target::GnfCl => NormalForm::Gnf,
            Target::KurodaSz | Target::KurodaCl => NormalForm::Kuroda,
        }
    }

    pub fn declared_type(self) -> SystemType {
        let (m, n) = match self {
            Target::RegSz | Target::RegCl => (1, 2),
            Target::CnfSz | Target::GnfCl => (2, 2),
            Target::KurodaSz | Target::KurodaCl => (4, 2),
        };
        SystemType { m, n }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::RegSz => "reg-sz",
            Target::CnfSz => "cnf-sz",
            Target::KurodaSz => "kuroda-sz",
            Target::RegCl => "reg-cl",
            Target::GnfCl => "gnf-cl",
            Target::KurodaCl => "kuroda-cl",
        })
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Target::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| format!("unknown target `{s}`"))
    }
}

/// Where a generated rule or axiom comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Production(Symbol),
    /// A fixed rule group or the start axiom, not tied to one production.
    Fixed(&'static str),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Production(l) => write!(f, "production {l}"),
            Source::Fixed(g) => write!(f, "group {g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvenanceEntry {
    /// `rule LABEL` or `axiom WORD`.
    pub item: String,
    pub source: Source,
    /// Schema name within its rule group, e.g. `R11/r^5`.
    pub schema: String,
}

#[derive(Clone, Debug)]
pub struct CompilationOutput {
    pub target: Target,
    pub lsys: LabeledSystem,
    pub hom: Option<Homomorphism>,
    pub provenance: Vec<ProvenanceEntry>,
    pub notes: Vec<String>,
}

impl CompilationOutput {
    /// Per-rule images used by differential comparison: the homomorphism
    /// when there is one, otherwise the labels themselves.
    pub fn rule_images(&self) -> Result<Vec<Word>> {
        match &self.hom {
            Some(h) => h.rule_images(&self.lsys),
            None => Ok(label_images(&self.lsys)),
        }
    }

    pub fn render_provenance(&self) -> String {
        let mut out = String::new();
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        for e in &self.provenance {
            out.push_str(&format!("{} <= {} [{}]\n", e.item, e.source, e.schema));
        }
        out
    }
}

/// Labels as one-letter images, λ as ε.
pub fn label_images(lsys: &LabeledSystem) -> Vec<Word> {
    lsys.labels()
        .iter()
        .map(|l| l.symbol().map_or_else(Word::empty, |s| Word::new(vec![s.clone()])))
        .collect()
}

pub fn compile(g: &Grammar, target: Target) -> Result<CompilationOutput> {
    check_form(g, target.input_form())?;
    match target {
        Target::RegSz => compile_reg(g, Mode::Szilard),
        Target::RegCl => compile_reg(g, Mode::Control),
        Target::CnfSz => compile_cnf_sz(g),
        Target::GnfCl => compile_gnf_cl(g),
        Target::KurodaSz => compile_kuroda(g, Mode::Szilard),
        Target::KurodaCl => compile_kuroda(g, Mode::Control),
    }
}

fn sym(s: impl AsRef<str>) -> Symbol {
    Symbol::new(s)
}

fn word(syms: &[&Symbol]) -> Word {
    syms.iter().map(|s| (*s).clone()).collect()
}

/// Cartesian product of symbol classes.
pub fn expand(classes: &[&[Symbol]]) -> Vec<Vec<Symbol>> {
    let mut out = vec![Vec::new()];
    for class in classes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                class.iter().map(move |s| {
                    let mut v = prefix.clone();
                    v.push(s.clone());
                    v
                })
            })
            .collect();
    }
    out
}

fn union(parts: &[&[Symbol]]) -> Vec<Symbol> {
    let mut seen = BTreeSet::new();
    parts
        .iter()
        .flat_map(|p| p.iter())
        .filter(|s| seen.insert((*s).clone()))
        .cloned()
        .collect()
}

/// What a label means in the output system.
enum LabelKind {
    /// Szilard label with this homomorphic image.
    Szilard(Word),
    /// Control label; `None` is λ.
    Control(Option<Symbol>),
}

struct Builder {
    mode: Mode,
    alphabet: BTreeSet<Symbol>,
    axioms: BTreeSet<Word>,
    rules: Vec<FlatSplicingRule>,
    labels: Vec<Label>,
    hom: BTreeMap<Symbol, Word>,
    provenance: Vec<ProvenanceEntry>,
    notes: Vec<String>,
}

impl Builder {
    fn new(mode: Mode) -> Self {
        Builder {
            mode,
            alphabet: BTreeSet::new(),
            axioms: BTreeSet::new(),
            rules: Vec::new(),
            labels: Vec::new(),
            hom: BTreeMap::new(),
            provenance: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn axiom(&mut self, w: Word, source: Source, schema: &str) {
        if self.axioms.insert(w.clone()) {
            self.provenance.push(ProvenanceEntry {
                item: format!("axiom {w}"),
                source,
                schema: schema.to_string(),
            });
        }
    }

    /// Adds one ground rule per assignment. `name` is the schema label; it
    /// gets a `~k` suffix in Szilard mode when `suffix` is set.
    #[allow(clippy::too_many_arguments)]
    fn schema(
        &mut self,
        name: &str,
        tag: &str,
        source: &Source,
        kind: &LabelKind,
        suffix: bool,
        instances: Vec<(Word, Word, Word, Word)>,
    ) -> Result<()> {
        for (k, (alpha, gamma, delta, beta)) in instances.into_iter().enumerate() {
            let rule = FlatSplicingRule::new(alpha, gamma, delta, beta)?;
            let label = match kind {
                LabelKind::Szilard(img) => {
                    let l = if suffix {
                        sym(format!("{name}~{}", k + 1))
                    } else {
                        sym(name)
                    };
                    self.hom.insert(l.clone(), img.clone());
                    Label::Named(l)
                }
                LabelKind::Control(Some(a)) => Label::Named(a.clone()),
                LabelKind::Control(None) => Label::Lambda,
            };
            let shown = match (&label, suffix) {
                (Label::Named(l), _) if self.mode == Mode::Szilard => l.to_string(),
                (l, true) => format!("{l} ({name}~{})", k + 1),
                (l, false) => format!("{l} ({name})"),
            };
            self.provenance.push(ProvenanceEntry {
                item: format!("rule {shown}"),
                source: source.clone(),
                schema: tag.to_string(),
            });
            self.rules.push(rule);
            self.labels.push(label);
        }
        Ok(())
    }

    fn finish(self, name: String, target: Target) -> Result<CompilationOutput> {
        let sys = FlatSplicingSystem::new(self.alphabet, InitialSet::Finite(self.axioms), self.rules)?;
        let lsys = LabeledSystem::new(name, sys, self.labels, self.mode)?;
        let hom = (self.mode == Mode::Szilard).then(|| Homomorphism::new(self.hom));
        Ok(CompilationOutput {
            target,
            lsys,
            hom,
            provenance: self.provenance,
            notes: self.notes,
        })
    }
}

fn check_fresh(g: &Grammar, generated: &BTreeSet<Symbol>) -> Result<()> {
    match g.nonterminals().iter().find(|s| generated.contains(*s)) {
        Some(s) => Err(Error::SymbolClash(s.clone())),
        None => Ok(()),
    }
}

/// Productions with identical sides collapse to the first occurrence.
fn distinct_productions(g: &Grammar) -> Vec<&Production> {
    let mut seen = BTreeSet::new();
    g.productions()
        .iter()
        .filter(|p| seen.insert((p.lhs.clone(), p.rhs.clone())))
        .collect()
}

fn compile_reg(g: &Grammar, mode: Mode) -> Result<CompilationOutput> {
    let target = if mode == Mode::Szilard { Target::RegSz } else { Target::RegCl };
    let mut b = Builder::new(mode);
    // D1 is the start symbol, the rest follow declaration order.
    let mut order = vec![g.start().clone()];
    order.extend(g.nonterminals().iter().filter(|n| *n != g.start()).cloned());
    let d: BTreeMap<Symbol, (usize, Symbol)> = order
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), (i + 1, sym(format!("D{}", i + 1)))))
        .collect();
    let (x, y) = (sym("X"), sym("Y"));
    let ya = |a: &Symbol| sym(format!("Y{a}"));
    b.alphabet.extend([x.clone(), y.clone()]);
    b.alphabet.extend(d.values().map(|(_, s)| s.clone()));
    b.alphabet.extend(g.terminals().iter().map(ya));
    for n in &order {
        b.notes.push(format!("{} = {n}", d[n].1));
    }
    b.axiom(word(&[&x, &d[g.start()].1, &y]), Source::Fixed("start"), "XD1Y");

    let yw = Word::new(vec![y.clone()]);
    for p in distinct_productions(g) {
        let (i, di) = &d[&p.lhs[0]];
        let a = &p.rhs[0];
        let src = Source::Production(p.label.clone());
        let kind = |name: String| match mode {
            Mode::Szilard => (name, LabelKind::Szilard(Word::new(vec![a.clone()]))),
            Mode::Control => (name, LabelKind::Control(Some(a.clone()))),
        };
        if let Some(next) = p.rhs.get(1) {
            let (j, dj) = &d[next];
            b.axiom(word(&[&ya(a), dj]), src.clone(), "YaDj");
            let (name, k) = kind(format!("{a}_D{j}^{i}"));
            let inst = vec![(word(&[di]), word(&[&ya(a)]), word(&[dj]), yw.clone())];
            b.schema(&name, "a_Dj^i", &src, &k, false, inst)?;
        } else {
            b.axiom(word(&[&ya(a)]), src.clone(), "Ya");
            let (name, k) = kind(format!("{a}^{i}"));
            let inst = vec![(word(&[di]), Word::empty(), word(&[&ya(a)]), yw.clone())];
            b.schema(&name, "a^i", &src, &k, false, inst)?;
        }
    }
    b.finish(format!("{}-{target}", g.name()), target)
}

fn compile_cnf_sz(g: &Grammar) -> Result<CompilationOutput> {
    let mut b = Builder::new(Mode::Szilard);
    let (x, y, e, rk1, rm) = (sym("X"), sym("Y"), sym("E"), sym("[rk1]"), sym("[rm]"));
    let prods = distinct_productions(g);
    let bracket = |p: &Production| sym(format!("[{}]", p.label));
    let binary: Vec<&Production> = prods.iter().copied().filter(|p| p.rhs.len() == 2).collect();
    let unary: Vec<&Production> = prods.iter().copied().filter(|p| p.rhs.len() == 1).collect();
    let d1: Vec<Symbol> = binary.iter().map(|p| bracket(p)).collect();
    let d2: Vec<Symbol> = unary.iter().map(|p| bracket(p)).collect();
    let n: Vec<Symbol> = g.nonterminals().to_vec();

    let mut generated: BTreeSet<Symbol> = [x.clone(), y.clone(), e.clone(), rk1.clone(), rm.clone()].into();
    generated.extend(d1.iter().chain(&d2).cloned());
    check_fresh(g, &generated)?;
    b.alphabet.extend(generated);
    b.alphabet.extend(n.iter().cloned());
    b.notes.push(
        "[rk1]' inserts [rm] as its rule is displayed; the axiom [rk1] is kept but never spliced".into(),
    );
    b.axiom(word(&[&x, g.start(), &e, &y]), Source::Fixed("start"), "XSEY");
    b.axiom(word(&[&rk1]), Source::Fixed("markers"), "[rk1]");
    b.axiom(word(&[&rm]), Source::Fixed("markers"), "[rm]");

    let ne = union(&[&n, std::slice::from_ref(&e)]);
    let alpha2 = union(&[&n, &[e.clone(), y.clone()], &d1]);
    let eps = Word::empty;
    for p in &binary {
        let br = bracket(p);
        let (a1, c1) = (&p.lhs[0], &p.rhs[1]);
        let src = Source::Production(p.label.clone());
        b.axiom(word(&[&br, &p.rhs[0], c1]), src.clone(), "[ri]B1C1");
        let inst = expand(&[&ne, &alpha2])
            .into_iter()
            .filter(|v| {
                let (f, s) = (&v[0], &v[1]);
                let ny = n.contains(f) && *s == y;
                let en = *f == e && n.contains(s);
                let ed = *f == e && d1.contains(s);
                !(ny || en || ed)
            })
            .map(|v| (word(&[a1]), word(&[&br]), word(&[c1]), Word::new(v)))
            .collect();
        b.schema(&format!("{br}^1"), "[ri]^1", &src, &LabelKind::Szilard(eps()), true, inst)?;
    }
    for p in &unary {
        let br = bracket(p);
        let src = Source::Production(p.label.clone());
        b.axiom(word(&[&br]), src.clone(), "[ra]");
        let inst = ne
            .iter()
            .map(|a3| (word(&[&rm, &p.lhs[0]]), eps(), word(&[&br]), word(&[a3])))
            .collect();
        let img = LabelKind::Szilard(p.rhs.clone());
        b.schema(&format!("{br}^a"), "[ri]^a", &src, &img, true, inst)?;
    }
    let fixed = Source::Fixed("markers");
    let inst = n.iter().map(|a4| (word(&[&x]), eps(), word(&[&rm]), word(&[a4]))).collect();
    b.schema("[rk1]'", "[rk1]'", &fixed, &LabelKind::Szilard(eps()), true, inst)?;
    let nd = union(&[&n, &d1, &d2]);
    let inst = expand(&[&nd, &nd])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0]]), eps(), word(&[&rm]), word(&[&v[1]])))
        .collect();
    b.schema("[rk2]'", "[rk2]'", &fixed, &LabelKind::Szilard(eps()), true, inst)?;
    b.finish(format!("{}-cnf-sz", g.name()), Target::CnfSz)
}

/// Gives every production its own copy of its leading terminal: the k-th
/// production starting with `a` gets `a_k`. Returns the renamed grammar and
/// the map from new terminals back to their base letters.
pub fn rename_gnf_terminals(g: &Grammar) -> Result<(Grammar, BTreeMap<Symbol, Symbol>)> {
    check_form(g, NormalForm::Gnf)?;
    let mut count: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut base = BTreeMap::new();
    let mut terminals = Vec::new();
    let mut productions = Vec::new();
    for p in g.productions() {
        let a = &p.rhs[0];
        let k = count.entry(a.clone()).or_insert(0);
        *k += 1;
        let ak = sym(format!("{a}_{k}"));
        if g.is_terminal(&ak) || g.is_nonterminal(&ak) {
            return Err(Error::SymbolClash(ak));
        }
        base.insert(ak.clone(), a.clone());
        terminals.push(ak.clone());
        let mut rhs = vec![ak];
        rhs.extend(p.rhs[1..].iter().cloned());
        productions.push(Production {
            label: p.label.clone(),
            lhs: p.lhs.clone(),
            rhs: Word::new(rhs),
        });
    }
    let renamed = Grammar::new(
        g.name(),
        g.nonterminals().to_vec(),
        terminals,
        g.start().clone(),
        productions,
    )?;
    Ok((renamed, base))
}

fn compile_gnf_cl(g: &Grammar) -> Result<CompilationOutput> {
    let (r, base) = rename_gnf_terminals(g)?;
    let mut b = Builder::new(Mode::Control);
    let (x, y) = (sym("X"), sym("Y"));
    let ya = |a: &Symbol| sym(format!("Y{a}"));
    let ytoks: Vec<Symbol> = r.productions().iter().map(|p| ya(&p.rhs[0])).collect();
    let n: Vec<Symbol> = g.nonterminals().to_vec();
    let mut generated: BTreeSet<Symbol> = [x.clone(), y.clone()].into();
    generated.extend(ytoks.iter().cloned());
    check_fresh(g, &generated)?;
    b.alphabet.extend(generated);
    b.alphabet.extend(n.iter().cloned());
    b.notes.push("terminals renamed per production: ".to_string() + &{
        let v: Vec<String> = base.iter().map(|(k, a)| format!("{k}={a}")).collect();
        v.join(" ")
    });
    b.notes.push(
        "the left context of the inner schemas is Y_aj followed by the production's own left side".into(),
    );
    b.axiom(word(&[&x, g.start(), &y]), Source::Fixed("start"), "XSY");
    let s = g.start();
    let ny = union(&[&n, std::slice::from_ref(&y)]);
    for p in r.productions() {
        let ai = &p.rhs[0];
        let yai = ya(ai);
        let a1 = &p.lhs[0];
        let alpha = &p.rhs[1..];
        let src = Source::Production(p.label.clone());
        let kind = LabelKind::Control(Some(base[ai].clone()));
        let mut partner = vec![yai.clone()];
        partner.extend(alpha.iter().cloned());
        b.axiom(Word::new(partner), src.clone(), "Y_ai alpha");
        let (gamma, delta) = match alpha.last() {
            Some(last) => (word(&[&yai]), word(&[last])),
            None => (Word::empty(), word(&[&yai])),
        };
        if a1 == s {
            let inst = vec![(word(&[&x, s]), gamma.clone(), delta.clone(), word(&[&y]))];
            b.schema("start", "<XS|..|Y>", &src, &kind, false, inst)?;
        }
        let inst = expand(&[&ytoks, &ny])
            .into_iter()
            .map(|v| (word(&[&v[0], a1]), gamma.clone(), delta.clone(), word(&[&v[1]])))
            .collect();
        b.schema("inner", "<Y_aj A|..|a2>", &src, &kind, true, inst)?;
    }
    b.finish(format!("{}-gnf-cl", g.name()), Target::GnfCl)
}

fn compile_kuroda(g: &Grammar, mode: Mode) -> Result<CompilationOutput> {
    let target = if mode == Mode::Szilard { Target::KurodaSz } else { Target::KurodaCl };
    let mut b = Builder::new(mode);
    let (x, y, rm) = (sym("X"), sym("Y"), sym("[rm]"));
    let prods = distinct_productions(g);
    let bracket = |p: &Production| sym(format!("[{}]", p.label));
    let class = |pred: &dyn Fn(&Production) -> bool| -> Vec<Symbol> {
        prods.iter().filter(|p| pred(p)).map(|p| bracket(p)).collect()
    };
    let is_bin = |p: &Production| p.lhs.len() == 1 && p.rhs.len() == 2;
    let is_ctx = |p: &Production| p.lhs.len() == 2;
    let is_term = |p: &Production| p.lhs.len() == 1 && p.rhs.len() == 1;
    let is_erase = |p: &Production| p.rhs.is_empty();
    let (d1, d2, d3, d4) = (class(&is_bin), class(&is_ctx), class(&is_term), class(&is_erase));
    let n: Vec<Symbol> = g.nonterminals().to_vec();
    let k_tok = |p: &Production| match p.rhs.first() {
        Some(a) => sym(format!("k{a}_{}", p.label)),
        None => sym(format!("keps_{}", p.label)),
    };

    let mut generated: BTreeSet<Symbol> = [x.clone(), y.clone(), rm.clone()].into();
    generated.extend(d1.iter().chain(&d2).chain(&d3).chain(&d4).cloned());
    generated.extend(prods.iter().filter(|p| is_term(p) || is_erase(p)).map(|p| k_tok(p)));
    check_fresh(g, &generated)?;
    b.alphabet.extend(generated);
    b.alphabet.extend(n.iter().cloned());
    b.notes.push(
        "right contexts a1..a5 with a5 = a2 are emitted as a1..a4, keeping the declared type (4,2)".into(),
    );
    b.notes.push("r^5 has no Y in its right context; emitted as written".into());
    b.notes.push("contexts are contiguous factors of the word".into());
    b.axiom(word(&[&x, g.start(), &y]), Source::Fixed("start"), "XSY");
    b.axiom(word(&[&rm]), Source::Fixed("R15"), "[rm]");

    let eps = Word::empty;
    let lambda = || match mode {
        Mode::Szilard => LabelKind::Szilard(Word::empty()),
        Mode::Control => LabelKind::Control(None),
    };
    let nd1 = union(&[&n, &d1]);
    let nd12 = union(&[&n, &d1, &d2]);
    let d12 = union(&[&d1, &d2]);
    let yw = || word(&[&y]);

    // The six right-context shapes shared by R11, R13 and R14.
    let shapes: Vec<Vec<Word>> = {
        let plain = |len: usize| -> Vec<Word> {
            let classes: Vec<&[Symbol]> = vec![&n[..]; len];
            expand(&classes)
                .into_iter()
                .map(|mut v| {
                    v.push(y.clone());
                    Word::new(v)
                })
                .collect()
        };
        let five: Vec<Word> = expand(&[&n, &nd1, &nd12, &nd12])
            .into_iter()
            .filter(|v| {
                !(d1.contains(&v[1]) && d12.contains(&v[2]))
                    && !(d12.contains(&v[2]) && d12.contains(&v[3]))
            })
            .map(Word::new)
            .collect();
        let six: Vec<Word> = expand(&[&n, &d2, &n, &d1]).into_iter().map(Word::new).collect();
        vec![plain(0), plain(1), plain(2), plain(3), five, six]
    };

    for p in &prods {
        let src = Source::Production(p.label.clone());
        let l = &p.label;
        let a1 = &p.lhs[0];
        if is_bin(p) {
            let br = bracket(p);
            b.axiom(word(&[&br, &p.rhs[0], &p.rhs[1]]), src.clone(), "[ri]B1C1");
            for (s, betas) in shapes.iter().enumerate() {
                let inst: Vec<_> = betas
                    .iter()
                    .map(|beta| (word(&[a1]), word(&[&br]), word(&[&p.rhs[1]]), beta.clone()))
                    .collect();
                let name = format!("{l}^{}", s + 1);
                b.schema(&name, &format!("R11/r^{}", s + 1), &src, &lambda(), s > 0, inst)?;
            }
        } else if is_ctx(p) {
            let br = bracket(p);
            let b1 = &p.lhs[1];
            let (c1, dd) = (&p.rhs[0], &p.rhs[1]);
            b.axiom(word(&[&br, c1, dd]), src.clone(), "[ri]C1D1");
            b.axiom(word(&[&br]), src.clone(), "[ri]");
            let ab = word(&[a1, b1]);
            let (gam, del) = (word(&[&br]), word(&[dd]));
            let emit = |b: &mut Builder, num: usize, suffix: bool, inst: Vec<(Word, Word, Word, Word)>| {
                b.schema(&format!("{l}^{num}"), &format!("R12/r^{num}"), &src, &lambda(), suffix, inst)
            };
            let inst = expand(&[&n, &n])
                .into_iter()
                .map(|v| (ab.clone(), gam.clone(), del.clone(), Word::new(v)))
                .collect();
            emit(&mut b, 7, true, inst)?;
            emit(&mut b, 8, false, vec![(ab.clone(), gam.clone(), del.clone(), yw())])?;
            let inst = n
                .iter()
                .map(|a| (ab.clone(), gam.clone(), del.clone(), word(&[a, &y])))
                .collect();
            emit(&mut b, 9, true, inst)?;
            let inst = expand(&[&n, &d1])
                .into_iter()
                .map(|v| (word(&[a1]), eps(), word(&[&br]), Word::new(v)))
                .collect();
            emit(&mut b, 10, true, inst)?;
            let inst = expand(&[&n, &d1, &n, &nd1])
                .into_iter()
                .map(|v| (word(&[&br, &v[0], &v[1]]), eps(), word(&[&br]), word(&[&v[2], &v[3]])))
                .collect();
            emit(&mut b, 11, true, inst)?;
            let ny1 = union(&[&n, std::slice::from_ref(&y), &d1]);
            let inst = expand(&[&d1, &n, &ny1])
                .into_iter()
                .map(|v| (word(&[&v[0], &br, b1]), gam.clone(), del.clone(), word(&[&v[1], &v[2]])))
                .collect();
            emit(&mut b, 12, true, inst)?;
            let inst = shapes[5]
                .iter()
                .map(|beta| (ab.clone(), gam.clone(), del.clone(), beta.clone()))
                .collect();
            emit(&mut b, 13, true, inst)?;
        } else {
            // A -> a (R13) and A -> eps (R14) share their shapes.
            let k = k_tok(p);
            b.axiom(word(&[&k]), src.clone(), if is_term(p) { "k_a^i" } else { "k_eps^i" });
            let (group, kind, names): (&str, LabelKind, Vec<String>) = match p.rhs.first() {
                Some(a) => (
                    "R13",
                    match mode {
                        Mode::Szilard => LabelKind::Szilard(Word::new(vec![a.clone()])),
                        Mode::Control => LabelKind::Control(Some(a.clone())),
                    },
                    (1..=7).map(|j| format!("{a}_{l}^{j}")).collect(),
                ),
                None => ("R14", lambda(), (14..=20).map(|j| format!("{l}^{j}")).collect()),
            };
            let tag = |j: usize| match group {
                "R13" => format!("R13/a^{j}"),
                _ => format!("R14/r^{}", j + 13),
            };
            let ins = word(&[&k]);
            b.schema(&names[0], &tag(1), &src, &kind, false, vec![(word(&[&x, a1]), eps(), ins.clone(), yw())])?;
            for (s, betas) in shapes.iter().enumerate() {
                let inst: Vec<_> = betas
                    .iter()
                    .map(|beta| (word(&[&rm, a1]), eps(), ins.clone(), beta.clone()))
                    .collect();
                b.schema(&names[s + 1], &tag(s + 2), &src, &kind, s > 0, inst)?;
            }
            let tail = union(&[std::slice::from_ref(&y), &n, &d1, &d2]);
            let inst = expand(&[&n, &tail])
                .into_iter()
                .map(|v| (word(&[&rm, a1, &k]), eps(), word(&[&rm]), Word::new(v)))
                .collect();
            let (name, t) = if is_term(p) {
                (format!("rm+1^{l}"), "R13/rm+1^i")
            } else {
                (format!("rm+2^{l}"), "R14/rm+2^i")
            };
            b.schema(&name, t, &src, &lambda(), true, inst)?;
        }
    }

    let fixed = Source::Fixed("R15");
    let ins = || word(&[&rm]);
    let r15 = |b: &mut Builder, name: &str, inst: Vec<(Word, Word, Word, Word)>| {
        b.schema(name, &format!("R15/{name}"), &fixed, &lambda(), true, inst)
    };
    let inst = expand(&[&n, &d1, &n])
        .into_iter()
        .map(|v| (word(&[&x, &v[0], &v[1]]), eps(), ins(), word(&[&v[2]])))
        .collect();
    r15(&mut b, "rm", inst)?;
    let inst = expand(&[&n, &n, &d2, &n])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1], &v[2]]), eps(), ins(), word(&[&v[3]])))
        .collect();
    r15(&mut b, "rm+1", inst)?;
    let inst = expand(&[&n, &d2, &n, &d1])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1]]), eps(), ins(), word(&[&v[2], &v[3], &v[1]])))
        .collect();
    r15(&mut b, "rm+2", inst)?;
    let inst = expand(&[&n, &d1, &n, &nd12])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1]]), eps(), ins(), word(&[&v[2], &v[3]])))
        .collect();
    r15(&mut b, "rm+3", inst)?;
    let inst = expand(&[&n, &d1, &d2, &n])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1], &v[2]]), eps(), ins(), word(&[&v[3], &v[2]])))
        .collect();
    r15(&mut b, "rm+4", inst)?;
    let inst = expand(&[&n, &d1, &d2, &n, &d1])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1], &v[2]]), eps(), ins(), word(&[&v[3], &v[4], &v[2]])))
        .collect();
    r15(&mut b, "rm+5", inst)?;
    let n134 = union(&[&n, &d1, &d3, &d4]);
    let inst = expand(&[&n, &d2, &n, &n134])
        .into_iter()
        .map(|v| (word(&[&rm, &v[0], &v[1]]), eps(), ins(), word(&[&v[2], &v[3]])))
        .collect();
    r15(&mut b, "rm+6", inst)?;
    b.finish(format!("{}-{target}", g.name()), target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivation::Explorer;
    use crate::format::parse_grammar;
    use crate::grammar::grammar_language_upto;

    fn g(text: &str) -> Grammar {
        parse_grammar(text).unwrap().0
    }

    fn words(ws: &[&str]) -> BTreeSet<Word> {
        ws.iter().map(|w| Word::parse(w)).collect()
    }

    fn image(out: &CompilationOutput, steps: usize, k: usize) -> BTreeSet<Word> {
        let ex = Explorer::new(&out.lsys, 8);
        ex.image_language(out.rule_images().unwrap(), steps, Some(k)).words
    }

    const ASTARB: &str = "grammar astarb form rightlinear\nnonterminals D1\nterminals a b\nstart D1\n\
        rule r1 : D1 -> a D1\nrule r2 : D1 -> b\n";
    const CNF_AB: &str = "grammar ab form cnf\nnonterminals S A B\nterminals a b\nstart S\n\
        rule r1 : S -> A B\nrule r2 : A -> a\nrule r3 : B -> b\n";
    const GNF_ANBN: &str = "grammar anbn form gnf\nnonterminals S B\nterminals a b\nstart S\n\
        rule r1 : S -> a S B\nrule r2 : S -> a B\nrule r3 : B -> b\n";
    const KURODA_AB: &str = "grammar kab form kuroda\nnonterminals S A B\nterminals a b\nstart S\n\
        rule r1 : S -> A B\nrule r2 : A -> a\nrule r3 : B -> b\n";

    #[test]
    fn hom_examples() {
        let h = Homomorphism::new(BTreeMap::from([
            (sym("a_D1^1"), Word::parse("a")),
            (sym("b^1"), Word::parse("b")),
        ]));
        assert_eq!(h.apply(&Word::parse("a_D1^1 a_D1^1 b^1")).unwrap(), Word::parse("a a b"));
        assert_eq!(h.apply(&Word::empty()).unwrap(), Word::empty());
        assert!(matches!(h.apply(&Word::parse("zz")), Err(Error::UnmappedLabel(_))));
        let eps = Homomorphism::new(BTreeMap::from([(sym("x"), Word::empty())]));
        assert_eq!(eps.apply(&Word::parse("x x x")).unwrap(), Word::empty());
    }

    #[test]
    fn reg_sz_astarb() {
        let out = compile(&g(ASTARB), Target::RegSz).unwrap();
        assert_eq!(out.lsys.system().system_type(), SystemType { m: 1, n: 2 });
        assert_eq!(image(&out, 5, 4), words(&["b", "a b", "a a b", "a a a b"]));
        assert_eq!(
            image(&out, 5, 4),
            grammar_language_upto(&g(ASTARB), 4, 4).words
        );
    }

    #[test]
    fn reg_sz_single_rule() {
        let one = g("grammar one form rightlinear\nnonterminals D1\nterminals a\nstart D1\nrule r1 : D1 -> a\n");
        let out = compile(&one, Target::RegSz).unwrap();
        let sz = Explorer::new(&out.lsys, 8).szilard_upto(3).unwrap();
        assert_eq!(sz.words, words(&["a^1"]));
        assert_eq!(image(&out, 3, 3), words(&["a"]));
    }

    #[test]
    fn reg_cl_labels_are_terminals() {
        let out = compile(&g(ASTARB), Target::RegCl).unwrap();
        assert_eq!(out.lsys.label_set(), [sym("a"), sym("b")].into());
        assert!(out.hom.is_none());
        let cl = Explorer::new(&out.lsys, 8).control_upto(4).unwrap();
        assert_eq!(cl.words, words(&["b", "a b", "a a b", "a a a b"]));
        assert_eq!(out.lsys.system().system_type(), SystemType { m: 1, n: 2 });
    }

    #[test]
    fn cnf_sz_shape() {
        let out = compile(&g(CNF_AB), Target::CnfSz).unwrap();
        assert_eq!(out.lsys.system().system_type(), SystemType { m: 2, n: 2 });
        assert!(image(&out, 24, 2).contains(&Word::parse("a b")));
        // every rule has exactly one provenance entry
        let rules = out.provenance.iter().filter(|e| e.item.starts_with("rule ")).count();
        assert_eq!(rules, out.lsys.system().rules().len());
    }

    #[test]
    fn gnf_renaming_round_trip() {
        let orig = g(GNF_ANBN);
        let (r, base) = rename_gnf_terminals(&orig).unwrap();
        assert_eq!(base[&sym("a_1")], sym("a"));
        assert_eq!(base[&sym("a_2")], sym("a"));
        for (p, q) in orig.productions().iter().zip(r.productions()) {
            let mut back = vec![base[&q.rhs[0]].clone()];
            back.extend(q.rhs[1..].iter().cloned());
            assert_eq!(Word::new(back), p.rhs);
            assert_eq!(p.lhs, q.lhs);
        }
    }

    #[test]
    fn gnf_cl_anbn() {
        let out = compile(&g(GNF_ANBN), Target::GnfCl).unwrap();
        assert_eq!(out.lsys.system().system_type(), SystemType { m: 2, n: 2 });
        let cl = Explorer::new(&out.lsys, 8).control_upto(6).unwrap();
        let short: BTreeSet<Word> = cl.words.into_iter().filter(|w| w.len() <= 4).collect();
        assert_eq!(short, words(&["a b", "a a b b"]));
    }

    #[test]
    fn kuroda_ab() {
        let out = compile(&g(KURODA_AB), Target::KurodaSz).unwrap();
        assert_eq!(out.lsys.system().system_type(), SystemType { m: 4, n: 2 });
        assert_eq!(image(&out, 40, 2), words(&["a b"]));
        let cl = compile(&g(KURODA_AB), Target::KurodaCl).unwrap();
        assert_eq!(cl.lsys.label_set(), [sym("a"), sym("b")].into());
        let ws = Explorer::new(&cl.lsys, 8).control_upto(40).unwrap().words;
        assert!(ws.contains(&Word::parse("a b")));
    }

    #[test]
    fn expansion_count() {
        let n = [sym("A"), sym("B")];
        let d2 = [sym("[r]")];
        assert_eq!(expand(&[&n, &d2]).len(), 2);
        assert_eq!(expand(&[]).len(), 1);
    }

    #[test]
    fn clash_is_reported() {
        let bad = g("grammar c form cnf\nnonterminals S X\nterminals a\nstart S\n\
            rule r1 : S -> X X\nrule r2 : X -> a\n");
        assert!(matches!(compile(&bad, Target::CnfSz), Err(Error::SymbolClash(_))));
    }

    #[test]
    fn wrong_form_is_refused() {
        assert!(matches!(compile(&g(CNF_AB), Target::GnfCl), Err(Error::NormalForm { .. })));
    }
}
