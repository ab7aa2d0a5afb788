use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use flatsplice::compile::{compile, Target};
use flatsplice::decide::{
    check_reg_subset_sz, check_sz_subset_reg, default_max_steps, differential_compare_with, Status,
};
use flatsplice::format::{
    parse_grammar, parse_grammar_unchecked, parse_hom, parse_system, print_hom, print_system,
};
use flatsplice::regular::RegularSet;
use flatsplice::{Applicability, Explorer, LabeledSystem, Mode, Word};

#[derive(Parser)]
#[command(name = "flatsplice", version, about = "Labeled flat splicing systems")]
struct Cli {
    /// Longest partner (and start word) drawn from a regular initial set.
    #[arg(long, global = true, default_value_t = 8)]
    partner_bound: usize,
    /// Whether a context match alone makes a rule applicable.
    #[arg(long, global = true, value_enum, default_value_t = ApplicabilityArg::WithPartner)]
    applicability: ApplicabilityArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ApplicabilityArg {
    WithPartner,
    ContextOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnumMode {
    Lang,
    Szilard,
    Control,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    RInSz,
    SzInR,
}

#[derive(Subcommand)]
enum Command {
    /// Print the type (m,n) of a system.
    Type { system: PathBuf },
    /// Enumerate a bounded slice of a language.
    Enum {
        #[arg(long, value_enum)]
        mode: EnumMode,
        /// Word length bound (lang, szilard) or step bound (control).
        #[arg(long)]
        bound: usize,
        /// Step bound for control mode; defaults to --bound.
        #[arg(long)]
        steps: Option<usize>,
        system: PathBuf,
    },
    /// Print a terminal derivation for a label word, or NO.
    Member {
        #[arg(long)]
        word: String,
        /// Step bound for control-mode searches.
        #[arg(long, default_value_t = 40)]
        steps: usize,
        system: PathBuf,
    },
    /// Compile a grammar into a labeled system.
    Compile {
        #[arg(long)]
        target: Target,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
        #[arg(long)]
        hom: Option<PathBuf>,
        #[arg(long)]
        provenance: Option<PathBuf>,
        /// Accept the grammar even if it violates its declared form.
        #[arg(long)]
        no_validate: bool,
        grammar: PathBuf,
    },
    /// Bounded subset check between a pattern and the Szilard language.
    Subset {
        #[arg(long)]
        pattern: String,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        bound: usize,
        system: PathBuf,
    },
    /// Compare a grammar's language with a system's (image) language.
    Diff {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        hom: Option<PathBuf>,
        #[arg(long)]
        bound: usize,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Find a derivation for a label word and replay it step by step.
    Trace {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 40)]
        steps: usize,
        system: PathBuf,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_system(path: &Path, cli: &Cli) -> Result<LabeledSystem, Failure> {
    let lsys = parse_system(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let mode = match cli.applicability {
        ApplicabilityArg::WithPartner => Applicability::WithPartner,
        ApplicabilityArg::ContextOnly => Applicability::ContextOnly,
    };
    Ok(lsys.map_system(|s| s.with_applicability(mode)))
}

fn lines<'a>(words: impl IntoIterator<Item = &'a Word>) -> String {
    words.into_iter().map(|w| format!("{w}\n")).collect()
}

/// Searches a terminal derivation whose label word is `w`.
fn find(ex: &Explorer<'_>, w: &Word, steps: usize) -> Result<Option<flatsplice::Derivation>, Failure> {
    Ok(match ex.system().mode() {
        Mode::Szilard => ex.is_derivation_member(w)?,
        Mode::Control => ex.label_language(steps, Some(w.len()))?.witness(w),
    })
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Type { system } => {
            let l = load_system(system, cli)?;
            println!("{}", l.system().system_type());
            Ok(true)
        }
        Command::Enum {
            mode,
            bound,
            steps,
            system,
        } => {
            let l = load_system(system, cli)?;
            let ex = l.explorer(cli.partner_bound);
            match mode {
                EnumMode::Lang => {
                    print!("{}", lines(&l.system().closure_language_upto(*bound)));
                }
                EnumMode::Szilard | EnumMode::Control => {
                    let slice = if matches!(mode, EnumMode::Szilard) {
                        ex.szilard_upto(*bound)?
                    } else {
                        ex.control_upto(steps.unwrap_or(*bound))?
                    };
                    print!("{}", lines(&slice.words));
                    eprintln!(
                        "steps={} partner_bound={} truncated={}",
                        slice.max_steps, slice.partner_bound, slice.truncated
                    );
                }
            }
            Ok(true)
        }
        Command::Member { word, steps, system } => {
            let l = load_system(system, cli)?;
            let ex = l.explorer(cli.partner_bound);
            match find(&ex, &Word::parse(word), *steps)? {
                Some(d) => {
                    print!("{}", d.render(&l));
                    Ok(true)
                }
                None => {
                    println!("NO");
                    Ok(false)
                }
            }
        }
        Command::Trace { word, steps, system } => {
            let l = load_system(system, cli)?;
            let ex = l.explorer(cli.partner_bound);
            let w = Word::parse(word);
            let Some(d) = find(&ex, &w, *steps)? else {
                println!("NO");
                let (depth, partial) = ex.longest_realizable_prefix(&w);
                eprintln!("longest realizable prefix: {depth} of {} labels", w.len());
                if let Some(p) = partial {
                    eprint!("{}", p.render(&l));
                }
                return Ok(false);
            };
            print!("{}", d.render(&l));
            d.replay(&l)?;
            println!("replay ok ({} steps)", d.steps.len());
            Ok(true)
        }
        Command::Compile {
            target,
            output,
            hom,
            provenance,
            no_validate,
            grammar,
        } => {
            let text = read(grammar)?;
            let parsed = if *no_validate {
                parse_grammar_unchecked(&text)
            } else {
                parse_grammar(&text)
            };
            let (g, _) = parsed.map_err(|e| Failure(format!("{}: {e}", grammar.display())))?;
            let out = compile(&g, *target)?;
            write(output, &print_system(&out.lsys))?;
            if let Some(h) = hom {
                let text = out.hom.as_ref().map(print_hom).unwrap_or_default();
                write(h, &text)?;
            }
            if let Some(p) = provenance {
                write(p, &out.render_provenance())?;
            }
            eprintln!(
                "{} rules, {} axioms, type {}",
                out.lsys.system().rules().len(),
                out.lsys.system().initial().members_upto(usize::MAX).len(),
                out.lsys.system().system_type()
            );
            Ok(true)
        }
        Command::Subset {
            pattern,
            direction,
            bound,
            system,
        } => {
            let l = load_system(system, cli)?;
            let ex = l.explorer(cli.partner_bound);
            let r = RegularSet::parse(pattern)?;
            let v = match direction {
                Direction::RInSz => check_reg_subset_sz(&r, &ex, *bound)?,
                Direction::SzInR => check_sz_subset_reg(&ex, &r, *bound)?,
            };
            print!("{}", v.render());
            Ok(v.status == Status::Pass)
        }
        Command::Diff {
            grammar,
            system,
            hom,
            bound,
            steps,
        } => {
            let (g, _) = parse_grammar_unchecked(&read(grammar)?)
                .map_err(|e| Failure(format!("{}: {e}", grammar.display())))?;
            let l = load_system(system, cli)?;
            let h = match hom {
                Some(p) => Some(parse_hom(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display())))?),
                None => None,
            };
            let ex = l.explorer(cli.partner_bound);
            let steps = steps.unwrap_or_else(|| default_max_steps(&ex, *bound));
            let rep = differential_compare_with(&g, &ex, h.as_ref(), *bound, steps)?;
            print!("{}", rep.render());
            for (w, d) in &rep.system_witnesses {
                eprintln!("witness for extra {w}:");
                eprint!("{}", d.render(&l));
            }
            eprintln!("{}", rep.stats());
            Ok(rep.equal())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
