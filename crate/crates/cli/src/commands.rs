//! Subcommands and their certificates.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use ramsey_core::arrows::{
    aut_orbit_coloring, export_cnf, ramsey_degree_upper_probe, solve, verify_counterexample, verify_result, ArrowResult,
    CopySystem, DegreeStatus, Mode, SearchConfig, Verdict,
};
use ramsey_core::classes::{
    ap_check, elf_minimize, erp_check, f_erp_check, hp_check, jep_check, orderability_encoding, orderability_search_with,
    verify_orderability, ClassVerdict, FiniteClass, Generator, OrderCertificate, OrderStep, OrderVerdict,
    OrderabilityResult, PairBound, PropertyReport, ReportEntry,
};
use ramsey_core::embedding::{enumerate_embeddings, is_embedding};
use ramsey_core::expansions::{isolator, qf_type_morleyisation, same_qftp_partition};
use ramsey_core::indiscernibles::{
    check_locally_based, extract_indiscernible_pattern, is_indiscernible, parse_formula, Delta, IndexedSequence,
    DEFAULT_ARITY_CAP,
};
use ramsey_core::Structure;

use crate::certificate::{write_atomic, CertError, Certificate};
use crate::format::{
    load_class, load_sequence, load_structure, parse_class, parse_sequence, parse_structure, serialize_class,
    serialize_sequence, serialize_structure,
};
use crate::payload::{parse_list, parse_verdict, read_arrow, write_arrow};

/// Exit codes.
pub const HOLDS: i32 = 0;
pub const REFUTED: i32 = 1;
pub const INCONCLUSIVE: i32 = 2;
pub const INPUT_ERROR: i32 = 3;

pub const BUDGET_ENV: &str = "RAMSEY_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "ramsey", version, about = "Finite-scale structural Ramsey workbench")]
pub struct Cli {
    #[command(flatten)]
    pub config: WorkbenchConfig,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct WorkbenchConfig {
    /// Search-node budget for decide mode [default: $RAMSEY_BUDGET or 10000000]
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Local-search steps in refute mode
    #[arg(long, global = true, default_value_t = 200_000)]
    pub refute_steps: u64,
    /// Colourings drawn in sample mode
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    /// Automorphisms of C used for symmetry breaking
    #[arg(long, global = true, default_value_t = 16)]
    pub symmetry: usize,
    /// Write the certificate here (atomically) instead of to stdout
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Cnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Hp,
    Jep,
    Ap,
    Erp,
    FErp,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide C → (B)^A_r
    Arrow {
        c: PathBuf,
        b: PathBuf,
        a: PathBuf,
        #[arg(long, default_value_t = 2)]
        colors: usize,
        #[arg(long, default_value = "decide")]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// One colouring per pattern; a good B-copy shows at most d_i colours of each
    JointArrow {
        c: PathBuf,
        b: PathBuf,
        #[arg(long = "pattern", required = true)]
        patterns: Vec<PathBuf>,
        /// Colour counts, one per pattern
        #[arg(long, value_delimiter = ',')]
        colors: Vec<usize>,
        /// Degree caps, one per pattern [default: all 1]
        #[arg(long, value_delimiter = ',')]
        caps: Vec<usize>,
        #[arg(long, default_value = "decide")]
        mode: Mode,
    },
    /// Ramsey-degree bounds for A inside B over a candidate class
    Degree {
        a: PathBuf,
        b: PathBuf,
        /// Class file of candidate witnesses
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long, short)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        color_cap: usize,
    },
    /// HP, JEP, AP, ERP and f-ERP on a class file
    ClassCheck {
        class: PathBuf,
        #[arg(long, value_enum, default_value_t = PropertyArg::All)]
        property: PropertyArg,
        /// Largest |A| and |B| for ERP pairs
        #[arg(long, default_value_t = 3)]
        pair_bound: usize,
        /// Largest witness C [default: class bound]
        #[arg(long)]
        witness_bound: Option<usize>,
        #[arg(long, default_value_t = 2)]
        colors: usize,
    },
    /// Search for a union of binary types ordering every member
    Orderable { class: PathBuf },
    /// Expansion by one predicate per realized type of arity ≤ k
    Expand {
        m: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Relational structure with only the type predicates of arity ≤ k
    Isolate {
        m: PathBuf,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check Δ-indiscernibility (and local basedness with --based-on)
    Indiscernible {
        sequence: PathBuf,
        #[command(flatten)]
        delta: DeltaArgs,
        #[arg(long, default_value_t = DEFAULT_ARITY_CAP)]
        cap: usize,
        #[arg(long)]
        based_on: Option<PathBuf>,
    },
    /// Extract an indiscernible sub-sequence indexed by a copy of the target
    Extract {
        sequence: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        delta: DeltaArgs,
        /// Index-tuple length cap [default: |target|]
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Least subset carrying every copy of a tuple
    Elf {
        b: PathBuf,
        #[arg(long, value_delimiter = ',')]
        tuple: Vec<usize>,
    },
    /// Replay a certificate without searching
    Verify { certificate: PathBuf },
    /// Write a class file for a built-in family
    Generate {
        generator: Generator,
        #[arg(long)]
        upto: usize,
        #[arg(long, default_value = "generated")]
        name: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DeltaArgs {
    /// A formula of Δ (repeatable)
    #[arg(long = "delta")]
    pub formulas: Vec<String>,
    /// Compare full types instead of formulas
    #[arg(long)]
    pub all_types: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] crate::format::ParseError),
    #[error(transparent)]
    Certificate(#[from] CertError),
    #[error(transparent)]
    Arrow(#[from] ramsey_core::arrows::ArrowError),
    #[error(transparent)]
    Class(#[from] ramsey_core::classes::ClassError),
    #[error(transparent)]
    Indiscernible(#[from] ramsey_core::indiscernibles::IndError),
    #[error(transparent)]
    Formula(#[from] ramsey_core::indiscernibles::FormulaError),
    #[error(transparent)]
    Structure(#[from] ramsey_core::StructureError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

type Res<T> = Result<T, CliError>;

/// What a command produced: text for stdout and its exit code.
pub struct Outcome {
    pub code: i32,
    pub output: String,
    pub summary: String,
}

impl WorkbenchConfig {
    pub fn search(&self) -> Res<SearchConfig> {
        let budget = match self.budget {
            Some(b) => b,
            None => match std::env::var(BUDGET_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("{BUDGET_ENV} must be a positive integer, got `{v}`")))?,
                Err(_) => SearchConfig::default().budget,
            },
        };
        if budget == 0 {
            return Err(CliError::Usage("the budget must be positive".into()));
        }
        Ok(SearchConfig {
            budget,
            refute_steps: self.refute_steps,
            seed: self.seed,
            samples: self.samples,
            symmetry_limit: self.symmetry,
            record_proof: true,
        })
    }
}

fn config_line(cfg: &SearchConfig) -> String {
    format!(
        "budget={} refute-steps={} seed={} samples={} symmetry={}",
        cfg.budget, cfg.refute_steps, cfg.seed, cfg.samples, cfg.symmetry_limit
    )
}

fn parse_config_line(line: &str) -> Result<SearchConfig, CertError> {
    let mut cfg = SearchConfig::default();
    for kv in line.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CertError::Malformed(format!("bad config entry `{kv}`")))?;
        let n = |v: &str| -> Result<u64, CertError> {
            v.parse().map_err(|_| CertError::Malformed(format!("bad config value `{kv}`")))
        };
        match k {
            "budget" => cfg.budget = n(v)?,
            "refute-steps" => cfg.refute_steps = n(v)?,
            "seed" => cfg.seed = n(v)?,
            "samples" => cfg.samples = n(v)? as usize,
            "symmetry" => cfg.symmetry_limit = n(v)? as usize,
            _ => {}
        }
    }
    Ok(cfg)
}

fn load(path: &Path) -> Res<Structure> {
    Ok(load_structure(path)?.structure)
}

fn file_name(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn structure_section(cert: &mut Certificate, name: &str, m: &Structure) {
    cert.section("structure", name, &serialize_structure(name, m));
}

fn read_structure(cert: &Certificate, name: &str) -> Res<Structure> {
    let sec = cert.find("structure", name)?;
    Ok(parse_structure(&sec.text(), &format!("certificate structure {name}"))?.structure)
}

fn read_class(cert: &Certificate, name: &str) -> Res<FiniteClass> {
    let sec = cert.find("class", name)?;
    Ok(parse_class(&sec.text(), &format!("certificate class {name}"), Path::new("."))?.1)
}

fn read_sequence(cert: &Certificate, name: &str) -> Res<IndexedSequence> {
    let sec = cert.find("sequence", name)?;
    Ok(parse_sequence(&sec.text(), &format!("certificate sequence {name}"), Path::new("."))?.1)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Holds => HOLDS,
        Verdict::Fails => REFUTED,
        Verdict::Inconclusive => INCONCLUSIVE,
    }
}

fn class_code(v: ClassVerdict) -> i32 {
    match v {
        ClassVerdict::Pass => HOLDS,
        ClassVerdict::Fail => REFUTED,
        ClassVerdict::Inconclusive => INCONCLUSIVE,
    }
}

fn parse_delta(args: &DeltaArgs, seq: &IndexedSequence) -> Res<Delta> {
    if args.all_types {
        if !args.formulas.is_empty() {
            return Err(CliError::Usage("--all-types and --delta exclude each other".into()));
        }
        return Ok(Delta::AllTypes);
    }
    if args.formulas.is_empty() {
        return Err(CliError::Usage("give at least one --delta formula or --all-types".into()));
    }
    let sig = seq.target().signature();
    Ok(Delta::Formulas(
        args.formulas
            .iter()
            .map(|f| parse_formula(sig, f))
            .collect::<Result<_, _>>()?,
    ))
}

fn write_delta(cert: &mut Certificate, delta: &Delta) {
    match delta {
        Delta::AllTypes => {
            cert.field("delta", "ALL");
        }
        Delta::Formulas(fs) => {
            cert.field("delta", "formulas");
            let texts: Vec<&str> = fs.iter().map(|f| f.text.as_str()).collect();
            cert.section("delta", "formulas", &texts.join("\n"));
        }
    }
}

fn read_delta(cert: &Certificate, seq: &IndexedSequence) -> Res<Delta> {
    match cert.get("delta")? {
        "ALL" => Ok(Delta::AllTypes),
        _ => {
            let sec = cert.find("delta", "formulas")?;
            let sig = seq.target().signature();
            Ok(Delta::Formulas(
                sec.lines
                    .iter()
                    .map(|l| parse_formula(sig, l))
                    .collect::<Result<_, _>>()?,
            ))
        }
    }
}

fn join(t: &[usize]) -> String {
    t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Runs one parsed command line. `argv` is echoed into the certificate.
pub fn execute(cli: Cli, argv: &[String]) -> Res<Outcome> {
    let echo = argv.join(" ");
    let cfg = cli.config.search()?;
    let cfg_line = config_line(&cfg);
    let cert_out = |cert: Certificate, code: i32, summary: String| Outcome {
        code,
        output: cert.render(),
        summary,
    };
    match cli.command {
        Command::Arrow {
            c,
            b,
            a,
            colors,
            mode,
            format,
        } => {
            let (cs, bs, as_) = (load(&c)?, load(&b)?, load(&a)?);
            let system = CopySystem::embeddings(&cs, &bs, &[&as_]);
            if format == OutputFormat::Cnf {
                let cnf = export_cnf(&system, colors)?;
                return Ok(Outcome {
                    code: HOLDS,
                    summary: format!("cnf: {} A-copies, {} B-copies", system.groups[0].a_copies.len(), system.b_copies.len()),
                    output: cnf,
                });
            }
            let res = solve(&cs, &system, &[colors], &[1], mode, &cfg)?;
            let mut cert = Certificate::new("arrow", echo, cfg_line, res.verdict);
            structure_section(&mut cert, "C", &cs);
            structure_section(&mut cert, "B", &bs);
            structure_section(&mut cert, "A0", &as_);
            cert.field("patterns", 1);
            write_arrow(&mut cert, "result", &res);
            let summary = format!("arrow {}: {} ({} nodes)", file_name(&c), res.verdict, res.nodes);
            Ok(cert_out(cert, verdict_code(res.verdict), summary))
        }
        Command::JointArrow {
            c,
            b,
            patterns,
            colors,
            caps,
            mode,
        } => {
            let (cs, bs) = (load(&c)?, load(&b)?);
            let pats: Vec<Structure> = patterns.iter().map(|p| load(p)).collect::<Res<_>>()?;
            let colors = if colors.is_empty() { vec![2; pats.len()] } else { colors };
            let caps = if caps.is_empty() { vec![1; pats.len()] } else { caps };
            let res = ramsey_core::arrows::joint_arrow_check(&cs, &bs, &pats, &colors, &caps, mode, &cfg)?;
            let mut cert = Certificate::new("joint-arrow", echo, cfg_line, res.verdict);
            structure_section(&mut cert, "C", &cs);
            structure_section(&mut cert, "B", &bs);
            for (i, p) in pats.iter().enumerate() {
                structure_section(&mut cert, &format!("A{i}"), p);
            }
            cert.field("patterns", pats.len());
            write_arrow(&mut cert, "result", &res);
            let summary = format!("joint-arrow {}: {} ({} nodes)", file_name(&c), res.verdict, res.nodes);
            Ok(cert_out(cert, verdict_code(res.verdict), summary))
        }
        Command::Degree {
            a,
            b,
            candidates,
            d,
            color_cap,
        } => {
            let (as_, bs) = (load(&a)?, load(&b)?);
            let (cname, class) = load_class(&candidates)?;
            let probe = ramsey_degree_upper_probe(&as_, &bs, class.members(), d, color_cap, &cfg)?;
            let verdict = match probe.status {
                DegreeStatus::Witnessed => Verdict::Holds,
                DegreeStatus::BelowLowerBound => Verdict::Fails,
                DegreeStatus::Inconclusive => Verdict::Inconclusive,
            };
            let mut cert = Certificate::new("degree", echo, cfg_line, verdict);
            structure_section(&mut cert, "A", &as_);
            structure_section(&mut cert, "B", &bs);
            cert.section("class", "candidates", &serialize_class(&cname, &class));
            cert.field("lower", probe.lower)
                .field("d", d)
                .field("color-cap", color_cap)
                .field("status", format!("{:?}", probe.status));
            for check in &probe.checked {
                let per: Vec<String> = check.per_color.iter().map(|(r, v)| format!("r{r}={v}")).collect();
                cert.field("checked", format!("{} {}", check.candidate, per.join(" ")));
            }
            if let Some(k) = probe.witness {
                cert.field("witness", k);
                let c = &class.members()[k];
                let system = CopySystem::embeddings(c, &bs, &[&as_]);
                for r in 1..=color_cap {
                    let res = solve(c, &system, &[r], &[d], Mode::Decide, &cfg)?;
                    write_arrow(&mut cert, &format!("r{r}"), &res);
                }
            }
            let summary = format!("degree ≤ {d}: {:?} (lower bound {})", probe.status, probe.lower);
            Ok(cert_out(cert, verdict_code(verdict), summary))
        }
        Command::ClassCheck {
            class,
            property,
            pair_bound,
            witness_bound,
            colors,
        } => {
            let (name, fc) = load_class(&class)?;
            let wb = witness_bound.unwrap_or(fc.bound());
            let pb = PairBound::both(pair_bound);
            let want = |p: PropertyArg| property == p || property == PropertyArg::All;
            let mut reports = Vec::new();
            if want(PropertyArg::Hp) {
                reports.push(hp_check(&fc));
            }
            if want(PropertyArg::Jep) {
                reports.push(jep_check(&fc));
            }
            if want(PropertyArg::Ap) {
                reports.push(ap_check(&fc));
            }
            if want(PropertyArg::Erp) {
                reports.push(erp_check(&fc, pb, wb, colors, &cfg)?);
            }
            if want(PropertyArg::FErp) {
                reports.push(f_erp_check(&fc, pb, wb, colors, &cfg)?);
            }
            let overall = combine(reports.iter().map(|r| r.verdict));
            let mut cert = Certificate::new("class-check", echo, cfg_line, overall);
            cert.section("class", "input", &serialize_class(&name, &fc));
            cert.field("pair-bound", pair_bound)
                .field("witness-bound", wb)
                .field("colors", colors);
            let mut summary = Vec::new();
            for r in &reports {
                write_report(&mut cert, r);
                summary.push(format!("{}={}", r.property, r.verdict));
            }
            Ok(cert_out(cert, class_code(overall), format!("class-check {name}: {}", summary.join(" "))))
        }
        Command::Orderable { class } => {
            let (name, fc) = load_class(&class)?;
            let res = orderability_search_with(&fc, cfg.budget);
            let mut cert = Certificate::new("orderable", echo, cfg_line, res.verdict);
            cert.section("class", "input", &serialize_class(&name, &fc));
            cert.field("types", res.types.len()).field("nodes", res.nodes);
            for (i, t) in res.types.iter().enumerate() {
                cert.field("type", format!("{i} {t}"));
            }
            match &res.certificate {
                OrderCertificate::Phi(idx) => {
                    cert.field("phi", join(idx));
                }
                OrderCertificate::Exhaustion { steps, clauses } => {
                    cert.field("clauses", clauses.len());
                    let text: Vec<String> = steps
                        .iter()
                        .map(|s| match s {
                            OrderStep::Branch { var } => format!("B {var}"),
                            OrderStep::Conflict { clause } => {
                                let c = &clauses[*clause];
                                format!("C {clause} {} member={} tuple={}", c.kind, c.member, join(&c.tuple))
                            }
                        })
                        .collect();
                    cert.section("order-proof", "exhaustion", &text.join("\n"));
                }
                OrderCertificate::None => {}
            }
            let code = match res.verdict {
                OrderVerdict::Orderable => HOLDS,
                OrderVerdict::NotOrderable => REFUTED,
                OrderVerdict::Inconclusive => INCONCLUSIVE,
            };
            let summary = format!("orderable {name}: {} ({} types)", res.verdict, res.types.len());
            Ok(cert_out(cert, code, summary))
        }
        command @ (Command::Expand { .. } | Command::Isolate { .. }) => {
            let (kind, m, k) = match command {
                Command::Expand { m, k } => ("expand", m, k),
                Command::Isolate { m, k } => ("isolate", m, k),
                _ => unreachable!(),
            };
            let ms = load(&m)?;
            let k = k.unwrap_or(ms.size());
            let out = if kind == "expand" {
                qf_type_morleyisation(&ms, k)
            } else {
                isolator(&ms, k)
            };
            let same = same_qftp_partition(&ms, &out, k)?;
            let verdict = if same { Verdict::Holds } else { Verdict::Fails };
            let mut cert = Certificate::new(kind, echo, cfg_line, verdict);
            cert.field("k", k).field("predicates", out.signature().relations().len());
            structure_section(&mut cert, "input", &ms);
            structure_section(&mut cert, "output", &out);
            let summary = format!(
                "{kind} {}: {} predicates, same type partition: {same}",
                file_name(&m),
                out.signature().relations().len()
            );
            Ok(cert_out(cert, verdict_code(verdict), summary))
        }
        Command::Indiscernible {
            sequence,
            delta,
            cap,
            based_on,
        } => {
            let (name, seq) = load_sequence(&sequence)?;
            let delta = parse_delta(&delta, &seq)?;
            let report = is_indiscernible(&seq, &delta, cap);
            let mut holds = report.holds;
            let mut cert = Certificate::new("indiscernible", echo, cfg_line, Verdict::Inconclusive);
            cert.section("sequence", "input", &serialize_sequence(&name, &seq));
            write_delta(&mut cert, &delta);
            cert.field("cap", cap).field("indiscernible", report.holds);
            for v in &report.violations {
                let f = v.formula.map_or_else(|| "full-type".to_string(), |i| i.to_string());
                cert.field("violation", format!("{} {} {f}", join(&v.left), join(&v.right)));
            }
            if let Some(base) = based_on {
                let (bname, bseq) = load_sequence(&base)?;
                let lb = check_locally_based(&seq, &bseq, &delta, cap)?;
                holds &= lb.holds;
                cert.section("sequence", "base", &serialize_sequence(&bname, &bseq));
                cert.field("locally-based", lb.holds);
                for (i, w) in &lb.witnesses {
                    let w = w.as_ref().map_or_else(|| "none".to_string(), |w| join(w));
                    cert.field("basis", format!("{} {w}", join(i)));
                }
            }
            cert.verdict = if holds { Verdict::Holds } else { Verdict::Fails }.to_string();
            let summary = format!(
                "indiscernible {name}: {} ({} violations)",
                cert.verdict,
                report.violations.len()
            );
            Ok(cert_out(cert, if holds { HOLDS } else { REFUTED }, summary))
        }
        Command::Extract {
            sequence,
            target,
            delta,
            cap,
        } => {
            let (name, seq) = load_sequence(&sequence)?;
            let nt = load(&target)?;
            let delta = parse_delta(&delta, &seq)?;
            let ex = extract_indiscernible_pattern(&seq, &nt, &delta, cap)?;
            let verdict = if ex.embedding.is_some() { Verdict::Holds } else { Verdict::Fails };
            let mut cert = Certificate::new("extract", echo, cfg_line, verdict);
            cert.section("sequence", "input", &serialize_sequence(&name, &seq));
            structure_section(&mut cert, "target", &nt);
            write_delta(&mut cert, &delta);
            cert.field("cap", ex.arity_cap)
                .field("candidates", ex.candidates)
                .field("rejected", ex.rejected);
            if let Some(g) = &ex.embedding {
                cert.field("embedding", join(g.map()));
            }
            let summary = match &ex.embedding {
                Some(g) => format!("extract {name}: copy {}", join(g.map())),
                None => format!("extract {name}: none of {} copies works", ex.candidates),
            };
            Ok(cert_out(cert, verdict_code(verdict), summary))
        }
        Command::Elf { b, tuple } => {
            let bs = load(&b)?;
            let support = elf_minimize(&bs, &tuple)?;
            let mut cert = Certificate::new("elf", echo, cfg_line, Verdict::Holds);
            structure_section(&mut cert, "B", &bs);
            cert.field("tuple", join(&tuple)).field("support", join(&support));
            let summary = format!("elf {}: {{{}}}", file_name(&b), join(&support));
            Ok(cert_out(cert, HOLDS, summary))
        }
        Command::Verify { certificate } => {
            let text = std::fs::read_to_string(&certificate).map_err(|e| CliError::Io {
                path: certificate.display().to_string(),
                source: e,
            })?;
            let cert = match Certificate::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    return Ok(Outcome {
                        code: REFUTED,
                        output: format!("rejected: {e}\n"),
                        summary: format!("rejected: {e}"),
                    })
                }
            };
            match verify(&cert) {
                Ok(()) => Ok(Outcome {
                    code: HOLDS,
                    output: format!("verified: {} {} search-nodes=0\n", cert.kind, cert.verdict),
                    summary: format!("verified {} {}", cert.kind, cert.verdict),
                }),
                Err(e) => Ok(Outcome {
                    code: REFUTED,
                    output: format!("rejected: {} {}: {e}\n", cert.kind, cert.verdict),
                    summary: format!("rejected: {e}"),
                }),
            }
        }
        Command::Generate { generator, upto, name } => {
            if generator == Generator::FromFile {
                return Err(CliError::Usage("`from-file` is not a generator".into()));
            }
            let class = FiniteClass::generate(generator, upto);
            Ok(Outcome {
                code: HOLDS,
                output: serialize_class(&name, &class),
                summary: format!("generated {} members of {generator} up to {upto}", class.len()),
            })
        }
    }
}

fn combine(vs: impl Iterator<Item = ClassVerdict>) -> ClassVerdict {
    let mut out = ClassVerdict::Pass;
    for v in vs {
        match v {
            ClassVerdict::Fail => return ClassVerdict::Fail,
            ClassVerdict::Inconclusive => out = ClassVerdict::Inconclusive,
            ClassVerdict::Pass => {}
        }
    }
    out
}

fn parse_class_verdict(s: &str) -> Result<ClassVerdict, CertError> {
    match s {
        "PASS" => Ok(ClassVerdict::Pass),
        "FAIL" => Ok(ClassVerdict::Fail),
        "INCONCLUSIVE" => Ok(ClassVerdict::Inconclusive),
        other => Err(CertError::Malformed(format!("unknown class verdict `{other}`"))),
    }
}

fn witness_text(w: &Option<(usize, Vec<usize>, Vec<usize>)>) -> String {
    match w {
        Some((k, g, h)) => format!("{k} {} {}", token(g), token(h)),
        None => "none".into(),
    }
}

fn write_report(cert: &mut Certificate, r: &PropertyReport) {
    let p = r.property.to_string();
    cert.field(
        &p,
        format!("{} checked={} skipped={}", r.verdict, r.checked, r.skipped),
    );
    for (i, e) in r.entries.iter().enumerate() {
        let tag = format!("{p}.{i}");
        match e {
            ReportEntry::Substructure { member, subset } => {
                cert.field(&tag, format!("substructure {member} {}", token(subset)));
            }
            ReportEntry::Joint { left, right, witness } => {
                cert.field(&tag, format!("joint {left} {right} {}", witness_text(witness)));
            }
            ReportEntry::Amalgam { a, b, c, e, f, witness } => {
                cert.field(&tag, format!("amalgam {a} {b} {c} {} {} {}", token(e), token(f), witness_text(witness)));
            }
            ReportEntry::Arrow { a, b, witness, results } => {
                let tried: Vec<String> = results.iter().map(|(k, _)| k.to_string()).collect();
                cert.field(
                    &tag,
                    format!("arrow {a} {b} {} {}", witness.map_or("none".into(), |w| w.to_string()), token_str(&tried)),
                );
                for (k, res) in results {
                    write_arrow(cert, &format!("{tag}.{k}"), res);
                }
            }
            ReportEntry::SubsetArrow {
                member,
                a,
                b,
                witness,
                results,
            } => {
                let tried: Vec<String> = results.iter().map(|(k, _)| k.to_string()).collect();
                cert.field(
                    &tag,
                    format!(
                        "subset-arrow {member} {} {} {} {}",
                        token(a),
                        token(b),
                        witness.map_or("none".into(), |w| w.to_string()),
                        token_str(&tried)
                    ),
                );
                for (k, res) in results {
                    write_arrow(cert, &format!("{tag}.{k}"), res);
                }
            }
        }
    }
}

/// A list as one whitespace-free token; `-` stands for the empty list.
fn token(t: &[usize]) -> String {
    if t.is_empty() {
        "-".into()
    } else {
        join(t)
    }
}

fn token_str(t: &[String]) -> String {
    if t.is_empty() {
        "-".into()
    } else {
        t.join(",")
    }
}

fn parse_token(s: &str) -> Result<Vec<usize>, CertError> {
    if s == "-" {
        Ok(Vec::new())
    } else {
        parse_list(s)
    }
}

fn reject(msg: impl Into<String>) -> CliError {
    CliError::Certificate(CertError::Malformed(msg.into()))
}

/// Replays a certificate from its payload. Colouring searches are never
/// rerun: exhaustion claims are replayed step by step and counterexamples
/// are checked copy by copy.
pub fn verify(cert: &Certificate) -> Res<()> {
    let cfg = parse_config_line(&cert.config)?;
    match cert.kind.as_str() {
        "arrow" | "joint-arrow" => {
            let c = read_structure(cert, "C")?;
            let b = read_structure(cert, "B")?;
            let n: usize = cert.get("patterns")?.parse().map_err(|_| reject("bad pattern count"))?;
            let pats: Vec<Structure> = (0..n).map(|i| read_structure(cert, &format!("A{i}"))).collect::<Res<_>>()?;
            let refs: Vec<&Structure> = pats.iter().collect();
            let system = CopySystem::embeddings(&c, &b, &refs);
            let res = read_arrow(cert, "result", &cfg)?;
            check_verdict(cert, res.verdict)?;
            verify_result(&c, &system, &res)?;
            Ok(())
        }
        "degree" => {
            let a = read_structure(cert, "A")?;
            let b = read_structure(cert, "B")?;
            let class = read_class(cert, "candidates")?;
            let d: usize = cert.get("d")?.parse().map_err(|_| reject("bad d"))?;
            let cap: usize = cert.get("color-cap")?.parse().map_err(|_| reject("bad colour cap"))?;
            match parse_verdict(&cert.verdict)? {
                Verdict::Holds => {
                    let k: usize = cert.get("witness")?.parse().map_err(|_| reject("bad witness"))?;
                    let c = class.members().get(k).ok_or_else(|| reject("witness out of range"))?;
                    let system = CopySystem::embeddings(c, &b, &[&a]);
                    for r in 1..=cap {
                        let res = read_arrow(cert, &format!("r{r}"), &cfg)?;
                        if res.verdict != Verdict::Holds || res.colors != [r] || res.caps != [d] {
                            return Err(reject(format!("r={r} is not a holding arrow with cap {d}")));
                        }
                        verify_result(c, &system, &res)?;
                    }
                    Ok(())
                }
                Verdict::Fails => {
                    let lower = ramsey_core::arrows::ramsey_degree_lower(&a);
                    if d >= lower || cap < lower {
                        return Err(reject("d is not below the automorphism bound"));
                    }
                    for c in class.members() {
                        if !ramsey_core::embedding::embeds(c, &b) {
                            continue;
                        }
                        let system = CopySystem::embeddings(c, &b, &[&a]);
                        verify_counterexample(&system, &[aut_orbit_coloring(c, &a)], &[d])?;
                    }
                    Ok(())
                }
                Verdict::Inconclusive => Ok(()),
            }
        }
        "class-check" => verify_class_check(cert, &cfg),
        "orderable" => {
            let class = read_class(cert, "input")?;
            let enc = orderability_encoding(&class);
            let verdict = match cert.verdict.as_str() {
                "ORDERABLE" => OrderVerdict::Orderable,
                "NOT-ORDERABLE" => OrderVerdict::NotOrderable,
                "INCONCLUSIVE" => OrderVerdict::Inconclusive,
                other => return Err(reject(format!("unknown verdict `{other}`"))),
            };
            let certificate = match verdict {
                OrderVerdict::Orderable => OrderCertificate::Phi(parse_list(cert.get("phi")?)?),
                OrderVerdict::NotOrderable => {
                    let sec = cert.find("order-proof", "exhaustion")?;
                    let steps = sec
                        .lines
                        .iter()
                        .map(|l| {
                            let w: Vec<&str> = l.split_whitespace().collect();
                            match w.as_slice() {
                                ["B", v] => v.parse().map(|var| OrderStep::Branch { var }).ok(),
                                ["C", c, ..] => c.parse().map(|clause| OrderStep::Conflict { clause }).ok(),
                                _ => None,
                            }
                            .ok_or_else(|| reject(format!("bad proof step `{l}`")))
                        })
                        .collect::<Res<_>>()?;
                    OrderCertificate::Exhaustion {
                        clauses: enc.clauses.clone(),
                        steps,
                    }
                }
                OrderVerdict::Inconclusive => OrderCertificate::None,
            };
            let res = OrderabilityResult {
                verdict,
                types: enc.types,
                certificate,
                nodes: 0,
            };
            verify_orderability(&class, &res).map_err(reject)
        }
        "expand" | "isolate" => {
            let input = read_structure(cert, "input")?;
            let output = read_structure(cert, "output")?;
            let k: usize = cert.get("k")?.parse().map_err(|_| reject("bad k"))?;
            let expected = if cert.kind == "expand" {
                qf_type_morleyisation(&input, k)
            } else {
                isolator(&input, k)
            };
            if expected != output {
                return Err(reject("output is not the expansion of the input"));
            }
            let same = same_qftp_partition(&input, &output, k)?;
            check_verdict(cert, if same { Verdict::Holds } else { Verdict::Fails })
        }
        "indiscernible" => {
            let seq = read_sequence(cert, "input")?;
            let delta = read_delta(cert, &seq)?;
            let cap: usize = cert.get("cap")?.parse().map_err(|_| reject("bad cap"))?;
            let mut holds = is_indiscernible(&seq, &delta, cap).holds;
            if cert.find("sequence", "base").is_ok() {
                let base = read_sequence(cert, "base")?;
                holds &= check_locally_based(&seq, &base, &delta, cap)?.holds;
            }
            check_verdict(cert, if holds { Verdict::Holds } else { Verdict::Fails })
        }
        "extract" => {
            let seq = read_sequence(cert, "input")?;
            let nt = read_structure(cert, "target")?;
            let delta = read_delta(cert, &seq)?;
            let cap: usize = cert.get("cap")?.parse().map_err(|_| reject("bad cap"))?;
            match cert.get("embedding") {
                Ok(g) => {
                    let g = parse_list(g)?;
                    if !is_embedding(&nt, seq.index(), &g) {
                        return Err(reject("the recorded map is not an embedding"));
                    }
                    let j = seq.reindex(nt, &g)?;
                    if !is_indiscernible(&j, &delta, cap).holds {
                        return Err(reject("the extracted sequence is not indiscernible"));
                    }
                    if !check_locally_based(&j, &seq, &delta, cap)?.holds {
                        return Err(reject("the extracted sequence is not locally based on its source"));
                    }
                    check_verdict(cert, Verdict::Holds)
                }
                Err(_) => {
                    for g in enumerate_embeddings(seq.index(), &nt) {
                        let j = seq.reindex(nt.clone(), g.map())?;
                        if is_indiscernible(&j, &delta, cap).holds {
                            return Err(reject(format!("copy {} is indiscernible", join(g.map()))));
                        }
                    }
                    check_verdict(cert, Verdict::Fails)
                }
            }
        }
        "elf" => {
            let b = read_structure(cert, "B")?;
            let tuple = parse_list(cert.get("tuple")?)?;
            let support = parse_list(cert.get("support")?)?;
            if elf_minimize(&b, &tuple)? != support {
                return Err(reject("support differs"));
            }
            Ok(())
        }
        other => Err(reject(format!("unknown certificate kind `{other}`"))),
    }
}

fn check_verdict(cert: &Certificate, v: Verdict) -> Res<()> {
    if cert.verdict == v.to_string() {
        Ok(())
    } else {
        Err(reject(format!("recorded {}, payload gives {v}", cert.verdict)))
    }
}

fn verify_class_check(cert: &Certificate, cfg: &SearchConfig) -> Res<()> {
    let class = read_class(cert, "input")?;
    let members = class.members();
    let mut verdicts = Vec::new();
    for prop in ["HP", "JEP", "AP", "ERP", "f-ERP"] {
        let Ok(line) = cert.get(prop) else { continue };
        let recorded = parse_class_verdict(line.split_whitespace().next().unwrap_or(""))?;
        verdicts.push(recorded);
        match prop {
            // Substructure and embedding claims are re-derived by
            // enumeration; no colouring search is involved.
            "HP" => {
                if hp_check(&class).verdict != recorded {
                    return Err(reject("HP verdict does not replay"));
                }
            }
            "JEP" | "AP" => {
                let r = if prop == "JEP" { jep_check(&class) } else { ap_check(&class) };
                if r.verdict != recorded {
                    return Err(reject(format!("{prop} verdict does not replay")));
                }
                for (i, e) in r.entries.iter().enumerate() {
                    let recorded_entry = cert.get(&format!("{prop}.{i}"))?;
                    let (w, s, t) = match e {
                        ReportEntry::Joint { left, right, witness } => (witness, *left, *right),
                        ReportEntry::Amalgam { b, c, witness, .. } => (witness, *b, *c),
                        _ => return Err(reject("unexpected entry")),
                    };
                    if let Some((k, g, h)) = w {
                        let d = &members[*k];
                        if !is_embedding(&members[s], d, g) || !is_embedding(&members[t], d, h) {
                            return Err(reject(format!("{prop}.{i}: witness maps are not embeddings")));
                        }
                    }
                    if !recorded_entry.ends_with(&witness_text(w)) {
                        return Err(reject(format!("{prop}.{i}: recorded witness differs")));
                    }
                }
            }
            _ => {
                let mut statuses = Vec::new();
                let mut i = 0;
                while let Ok(entry) = cert.get(&format!("{prop}.{i}")) {
                    let w: Vec<&str> = entry.split_whitespace().collect();
                    let (system_for, witness, tried): (Box<dyn Fn(&Structure) -> Res<CopySystem>>, &str, &str) =
                        match w.as_slice() {
                            ["arrow", a, b, witness, tried @ ..] => {
                                let a: usize = a.parse().map_err(|_| reject("bad index"))?;
                                let b: usize = b.parse().map_err(|_| reject("bad index"))?;
                                let (a, b) = (members[a].clone(), members[b].clone());
                                (
                                    Box::new(move |c: &Structure| Ok(CopySystem::embeddings(c, &b, &[&a]))),
                                    witness,
                                    tried.first().copied().unwrap_or(""),
                                )
                            }
                            ["subset-arrow", m, a, b, witness, tried @ ..] => {
                                let m: usize = m.parse().map_err(|_| reject("bad index"))?;
                                let host = members[m].clone();
                                let (a, b) = (parse_token(a)?, parse_token(b)?);
                                (
                                    Box::new(move |c: &Structure| Ok(CopySystem::qf_copies(c, &host, &b, &[&a])?)),
                                    witness,
                                    tried.first().copied().unwrap_or(""),
                                )
                            }
                            _ => return Err(reject(format!("bad entry `{entry}`"))),
                        };
                    let mut results: Vec<ArrowResult> = Vec::new();
                    for k in parse_token(tried)? {
                        let c = members.get(k).ok_or_else(|| reject("candidate out of range"))?;
                        let res = read_arrow(cert, &format!("{prop}.{i}.{k}"), cfg)?;
                        verify_result(c, &system_for(c)?, &res)?;
                        results.push(res);
                    }
                    let status = if witness != "none" {
                        if results.last().map(|r| r.verdict) != Some(Verdict::Holds) {
                            return Err(reject(format!("{prop}.{i}: witness does not hold")));
                        }
                        ClassVerdict::Pass
                    } else if !results.is_empty() && results.iter().all(|r| r.verdict == Verdict::Fails) {
                        ClassVerdict::Fail
                    } else {
                        ClassVerdict::Inconclusive
                    };
                    statuses.push(status);
                    i += 1;
                }
                if combine(statuses.into_iter()) != recorded {
                    return Err(reject(format!("{prop} verdict does not replay")));
                }
            }
        }
    }
    let overall = combine(verdicts.into_iter());
    if cert.verdict != overall.to_string() {
        return Err(reject("overall verdict differs"));
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command, writes output and
/// returns the exit code.
pub fn run(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { HOLDS };
            let _ = if e.use_stderr() {
                write!(stderr, "{e}")
            } else {
                write!(stdout, "{e}")
            };
            return code;
        }
    };
    let out_path = cli.config.out.clone();
    let echo = echo_args(argv);
    match execute(cli, &echo) {
        Ok(outcome) => {
            match out_path {
                Some(path) => {
                    if let Err(e) = write_atomic(&path, &outcome.output) {
                        let _ = writeln!(stderr, "cannot write {}: {e}", path.display());
                        return INPUT_ERROR;
                    }
                    let _ = writeln!(stdout, "{}", outcome.summary);
                }
                None => {
                    let _ = stdout.write_all(outcome.output.as_bytes());
                }
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            INPUT_ERROR
        }
    }
}

/// The command echo leaves out the output path so that certificates do not
/// depend on where they are written.
fn echo_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut args = argv.iter().skip(1);
    while let Some(a) = args.next() {
        if a == "--out" || a == "-o" {
            args.next();
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

/// Reads the argument vector of the current process.
pub fn main_args() -> Vec<String> {
    std::env::args().collect()
}
