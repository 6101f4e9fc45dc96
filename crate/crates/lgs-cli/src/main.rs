//! `lgs`: validation, enumeration, algebra evaluation and certificate checks
//! for λ-graph systems.
//!
//! Exit status: 0 pass, 1 fail, 2 usage or input error, 3 depth budget.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Print a line to stdout; a closed pipe ends the process quietly.
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout().lock(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

use clap::{Args, Parser, Subcommand, ValueEnum};
use lgs::algebra::{verify_relations, Algebra};
use lgs::code::{parse_certificate, Certificate};
use lgs::equivalence::{check_coe, check_eventual_conjugacy, check_groupoid_iso, coe_to_groupoid_iso, Report};
use lgs::groupoid::{cocycle_value, compose, enumerate_elements, BasicBisection, SymbolWeights};
use lgs::language::{check_condition_i, check_essential_freeness, words_from_level, CondIVerdict, FreenessVerdict};
use lgs::sms::Sms;
use lgs::text::parse_system;
use lgs::twosided::{build_stable_iso, check_two_sided, past_equivalence_classes, windows};
use lgs::{Error, Lgs, VertexRef};

#[derive(Parser)]
#[command(name = "lgs", version, about = "λ-graph systems: languages, matrices, groupoids, algebras, certificates")]
struct Cli {
    /// Output style: human-readable text or key<TAB>value records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    format: Format,
    /// Seed for sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of levels to build when an input file is a labeled graph.
    #[arg(long, global = true, default_value_t = 10)]
    graph_depth: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    Records,
}

#[derive(Args)]
struct Pair {
    /// First system.
    l1: PathBuf,
    /// Second system.
    l2: PathBuf,
    /// Certificate file.
    cert: PathBuf,
    /// Checking depth.
    #[arg(short = 'd', long, default_value_t = 3)]
    depth: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the axioms of a λ-graph system.
    Validate { file: PathBuf },
    /// List the admissible words of length k.
    Words {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        /// Count words entering this level instead of level k.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Print the transition matrices A and I of each level.
    Matrices {
        file: PathBuf,
        #[arg(short = 'l', long)]
        level: Option<usize>,
    },
    /// Check the symbolic matrix identity 𝓜 I = I 𝓜 at every level.
    SmsCheck { file: PathBuf },
    /// Print the symbolic matrix system in its text format.
    SmsDump { file: PathBuf },
    /// Check condition (I) on every vertex at depth d.
    CondI {
        file: PathBuf,
        #[arg(short = 'd', long)]
        depth: usize,
    },
    /// Search each depth-d cylinder for a point off X_{m,n}.
    EssFree {
        file: PathBuf,
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'n')]
        n: usize,
        #[arg(short = 'd', long)]
        depth: usize,
    },
    /// Evaluate algebra expressions and print their normal forms.
    Algebra {
        file: PathBuf,
        #[arg(short = 'e', long = "expr", required = true)]
        exprs: Vec<String>,
    },
    /// Verify the defining relations at level l (default 1 through 4).
    Relations {
        file: PathBuf,
        #[arg(short = 'l', long)]
        level: Option<usize>,
    },
    /// Compose two basic bisections written mu,v(l,i),nu.
    GroupoidCompose {
        file: PathBuf,
        b1: String,
        b2: String,
        /// Symbol weights for the cocycle, e.g. a=2,b=0 (default all 1).
        #[arg(short = 'w', long)]
        weights: Option<String>,
    },
    /// List the groupoid cells (x, n, z) at level d.
    GroupoidEnumerate {
        file: PathBuf,
        #[arg(short = 'd', long)]
        depth: usize,
    },
    /// Check a continuous orbit equivalence certificate.
    CoeCheck(Pair),
    /// Check an eventual conjugacy certificate.
    EcCheck(Pair),
    /// Check a two-sided conjugacy certificate.
    ConjCheck {
        #[command(flatten)]
        pair: Pair,
        /// Pre-compose the forward code with σ^M to bring it to future-only form.
        #[arg(long, default_value_t = 0)]
        shift: usize,
    },
    /// Build the groupoid map of a COE certificate and check it.
    CoeIso {
        #[command(flatten)]
        pair: Pair,
        /// Also require c₂ ∘ φ = c₁ for the weights w ≡ 1.
        #[arg(long)]
        check_cocycle: bool,
    },
    /// Build the stable groupoid map of a two-sided certificate and check it on samples.
    StableIso {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Largest base level of sampled bisections.
        #[arg(long, default_value_t = 2)]
        base_depth: usize,
        #[arg(long, default_value_t = 0)]
        shift: usize,
    },
}

struct Out {
    format: Format,
}

impl Out {
    /// A list item: the bare value in plain mode.
    fn item(&self, key: &str, value: impl std::fmt::Display) {
        match self.format {
            Format::Plain => outln!("{value}"),
            Format::Records => outln!("{key}\t{value}"),
        }
    }

    /// A named field: `key: value` in plain mode.
    fn field(&self, key: &str, value: impl std::fmt::Display) {
        match self.format {
            Format::Plain => outln!("{key}: {value}"),
            Format::Records => outln!("{key}\t{value}"),
        }
    }

    fn verdict(&self, pass: bool) -> u8 {
        self.item("verdict", if pass { "PASS" } else { "FAIL" });
        u8::from(!pass)
    }

    fn report(&self, r: &Report) -> u8 {
        for (k, v) in &r.notes {
            self.field(k, v);
        }
        for c in &r.clauses {
            match self.format {
                Format::Plain => {
                    let mut line = format!("{} {} ({} checked)", if c.ok { "PASS" } else { "FAIL" }, c.name, c.checked);
                    if let Some(w) = &c.witness {
                        line.push_str(&format!(" witness {w}"));
                    }
                    if let Some(d) = &c.detail {
                        line.push_str(&format!(": {d}"));
                    }
                    outln!("{line}");
                }
                Format::Records => {
                    outln!("clause\t{}\t{}\t{}", c.name, if c.ok { "PASS" } else { "FAIL" }, c.checked);
                    if let Some(w) = &c.witness {
                        outln!("witness\t{}\t{w}", c.name);
                    }
                    if let Some(d) = &c.detail {
                        outln!("detail\t{}\t{d}", c.name);
                    }
                }
            }
        }
        self.verdict(r.pass())
    }
}

fn read(path: &Path) -> lgs::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn load(path: &Path, graph_depth: usize) -> lgs::Result<Lgs> {
    parse_system(&path.display().to_string(), &read(path)?, graph_depth)
}

fn load_sms(path: &Path, graph_depth: usize) -> lgs::Result<Sms> {
    let text = read(path)?;
    let name = path.display().to_string();
    if text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with('#')).is_some_and(|l| l.starts_with("sms")) {
        Sms::parse(&name, &text)
    } else {
        Ok(Sms::from_lgs(&parse_system(&name, &text, graph_depth)?))
    }
}

struct Loaded {
    s1: Lgs,
    s2: Lgs,
    cert: Certificate,
}

fn load_pair(p: &Pair, graph_depth: usize, shift: usize) -> lgs::Result<Loaded> {
    let s1 = load(&p.l1, graph_depth)?;
    let s2 = load(&p.l2, graph_depth)?;
    let cert = parse_certificate(&p.cert.display().to_string(), &read(&p.cert)?, &s1, &s2)?.precompose_shift(&s1, shift)?;
    Ok(Loaded { s1, s2, cert })
}

fn run(cli: Cli) -> lgs::Result<u8> {
    let out = Out { format: cli.format };
    let gd = cli.graph_depth;
    match cli.cmd {
        Cmd::Validate { file } => {
            let s = load(&file, gd)?;
            let r = s.validate();
            if r.ok() {
                out.item("status", "ok");
                return Ok(0);
            }
            for v in &r.violations {
                out.item("violation", format!("{} at {}: {}", v.rule, v.location, v.detail));
            }
            Ok(1)
        }
        Cmd::Words { file, k, level } => {
            let s = load(&file, gd)?;
            let start = match level {
                Some(l) => l.checked_sub(k).ok_or_else(|| Error::Invalid(format!("level {l} is below k = {k}")))?,
                None => 0,
            };
            for w in words_from_level(&s, start, k)? {
                out.item("word", s.alphabet().format_word(&w));
            }
            Ok(0)
        }
        Cmd::Matrices { file, level } => {
            let s = load(&file, gd)?;
            let levels: Vec<usize> = match level {
                Some(l) => vec![l],
                None => (0..s.depth()).collect(),
            };
            for l in levels {
                let t = s.transition_matrices(l)?;
                for (a, name) in s.alphabet().names().iter().enumerate() {
                    for (i, row) in t.a.iter().enumerate() {
                        let row: Vec<String> = row[a].iter().map(u8::to_string).collect();
                        out.item(&format!("A {l} {name} {}", i + 1), format!("A[{l}][{name}] {}", row.join(" ")));
                    }
                }
                for (i, row) in t.i.iter().enumerate() {
                    let row: Vec<String> = row.iter().map(u8::to_string).collect();
                    out.item(&format!("I {l} {}", i + 1), format!("I[{l}] {}", row.join(" ")));
                }
            }
            Ok(0)
        }
        Cmd::SmsCheck { file } => {
            let sms = load_sms(&file, gd)?;
            let mut pass = true;
            for c in sms.verify_compatibility()? {
                match &c.mismatch {
                    None => out.item("level", format!("PASS level {}", c.level)),
                    Some((i, j, lhs, rhs)) => {
                        pass = false;
                        let a = &sms.alphabet;
                        out.item(
                            "level",
                            format!(
                                "FAIL level {} at ({},{}): 𝓜I has {} but I𝓜 has {}",
                                c.level,
                                i + 1,
                                j + 1,
                                lgs::sms::format_multiset(a, lhs),
                                lgs::sms::format_multiset(a, rhs)
                            ),
                        );
                    }
                }
            }
            Ok(out.verdict(pass))
        }
        Cmd::SmsDump { file } => {
            outln!("{}", load_sms(&file, gd)?.to_text().trim_end());
            Ok(0)
        }
        Cmd::CondI { file, depth } => {
            let s = load(&file, gd)?;
            let r = check_condition_i(&s, depth)?;
            for (v, verdict, n) in &r.verdicts {
                let tag = match verdict {
                    CondIVerdict::Pass => "PASS",
                    _ => "FAIL-AT-DEPTH",
                };
                out.item("vertex", format!("{v} {tag} {n}"));
            }
            Ok(out.verdict(r.all_pass()))
        }
        Cmd::EssFree { file, m, n, depth } => {
            let s = load(&file, gd)?;
            let r = check_essential_freeness(&s, m, n, depth)?;
            for (c, v) in &r.verdicts {
                let text = match v {
                    FreenessVerdict::Witness(w) => format!("witness {}", s.alphabet().format_word(w)),
                    FreenessVerdict::Periodic => "periodic".to_string(),
                };
                out.item("cylinder", format!("{} {text}", c.display(s.alphabet())));
            }
            Ok(out.verdict(r.certified()))
        }
        Cmd::Algebra { file, exprs } => {
            let s = load(&file, gd)?;
            let alg = Algebra::new(&s)?;
            for e in &exprs {
                let x = lgs::expr::parse_expression(&s, e)?;
                for line in alg.display(&x).lines() {
                    out.item("term", line);
                }
            }
            Ok(0)
        }
        Cmd::Relations { file, level } => {
            let s = load(&file, gd)?;
            let levels: Vec<usize> = match level {
                Some(l) => vec![l],
                None => (1..=4.min(s.depth())).collect(),
            };
            let mut pass = true;
            for l in levels {
                let r = verify_relations(&s, l)?;
                for c in &r.checks {
                    pass &= c.failure.is_none();
                    let mut line = format!(
                        "{} level {l} {} ({} instances)",
                        if c.failure.is_none() { "PASS" } else { "FAIL" },
                        c.name,
                        c.instances
                    );
                    if let Some(f) = &c.failure {
                        line.push_str(&format!(": {f}"));
                    }
                    out.item("relation", line);
                }
            }
            Ok(out.verdict(pass))
        }
        Cmd::GroupoidCompose { file, b1, b2, weights } => {
            let s = load(&file, gd)?;
            let w = match weights {
                Some(t) => SymbolWeights::parse(s.alphabet(), &t)?,
                None => SymbolWeights::ones(s.alphabet()),
            };
            let x = BasicBisection::parse(&s, &b1)?;
            let y = BasicBisection::parse(&s, &b2)?;
            let pieces = compose(&s, &x, &y)?;
            if pieces.is_empty() {
                out.item("piece", "empty");
            }
            for p in &pieces {
                out.item("piece", format!("{} cocycle {}", p.display(s.alphabet()), cocycle_value(&w, p)));
            }
            Ok(0)
        }
        Cmd::GroupoidEnumerate { file, depth } => {
            let s = load(&file, gd)?;
            for e in enumerate_elements(&s, depth)? {
                let a = s.alphabet();
                out.item("element", format!("({}, {}, {})", e.x.display(a), e.n, e.z.display(a)));
            }
            Ok(0)
        }
        Cmd::CoeCheck(p) => {
            let l = load_pair(&p, gd, 0)?;
            Ok(out.report(&check_coe(&l.s1, &l.s2, &l.cert, p.depth)?))
        }
        Cmd::EcCheck(p) => {
            let l = load_pair(&p, gd, 0)?;
            Ok(out.report(&check_eventual_conjugacy(&l.s1, &l.s2, &l.cert, p.depth)?))
        }
        Cmd::ConjCheck { pair, shift } => {
            let l = load_pair(&pair, gd, shift)?;
            let r = check_two_sided(&l.s1, &l.s2, &l.cert, pair.depth)?;
            let code = out.report(&r);
            if r.pass() {
                let (_, big_l) = windows(&l.cert)?;
                let pc = past_equivalence_classes(&l.s1, &l.cert, big_l, pair.depth)?;
                for (v, classes) in &pc.classes {
                    for c in classes {
                        let words: Vec<String> = c.iter().map(|w| l.s1.alphabet().format_word(w)).collect();
                        out.item("class", format!("{} {{{}}}", VertexRef::new(big_l, *v), words.join(" ")));
                    }
                }
                out.field("transitive", pc.is_transitive());
            }
            Ok(code)
        }
        Cmd::CoeIso { pair, check_cocycle } => {
            let l = load_pair(&pair, gd, 0)?;
            let phi = coe_to_groupoid_iso(&l.s1, &l.s2, &l.cert, pair.depth)?;
            let (w1, w2) = (SymbolWeights::ones(l.s1.alphabet()), SymbolWeights::ones(l.s2.alphabet()));
            let preserve = check_cocycle.then_some((&w1, &w2));
            Ok(out.report(&check_groupoid_iso(&l.s1, &l.s2, &phi, pair.depth, preserve)?))
        }
        Cmd::StableIso { pair, samples, base_depth, shift } => {
            let l = load_pair(&pair, gd, shift)?;
            let iso = build_stable_iso(&l.s1, &l.s2, &l.cert, pair.depth)?;
            Ok(out.report(&iso.verify(base_depth, samples, cli.seed)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            match &e {
                Error::Parse { .. } => eprintln!("{e}"),
                _ => eprintln!("lgs: {e}"),
            }
            ExitCode::from(match e {
                Error::DepthBudget { .. } => 3,
                Error::Precondition(_) => 1,
                _ => 2,
            })
        }
    }
}
