//! `sunflower`: batch front end for sunflower-core.
//!
//! Exit status: 0 success or pass, 1 verified counterexample, 2 usage or
//! input error, 3 budget exceeded, 4 extraction failed.

mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use io::{load_class, parse_vertices, read_json, structure_or_size, Run};
use sunflower_core::generators::{gen_generic, gen_named, GeneratorId};
use sunflower_core::ksets::{
    encode_colouring, enumerate_presentations, find_sunflower_copies, verify_witness, EnumerationBudget, Presentation,
    SetAssignment, SunflowerCert, VerifyMode,
};
use sunflower_core::partitionlab::{
    basic_open_set, min_embedding_colouring, named_partition, partition_report, Colouring, Partition,
};
use sunflower_core::ramsey::{
    gen_witness_hypergraph, ratio, shortest_cycle, suitable_params, vcvrp_adversary, AdversaryBudget, AdversaryMode,
    GenOptions, PartitionedHypergraph,
};
use sunflower_core::structures::{check_3dap_over_empty, QfType, Structure};
use sunflower_core::witness::{
    build_witness_chain, extract_sunflower, paste, verify_certificate, verify_trace, ExtractionTrace, WitnessChain,
};
use sunflower_core::Error;

#[derive(Parser, Serialize)]
#[command(name = "sunflower", version, about = "Structured sunflower experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct Global {
    /// Seed for randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search-node budget for exhaustive searches.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Worker threads for parallel searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exhaustive,
    Random,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a structure with a named generator or a generic class generator.
    Gen {
        #[arg(long, conflicts_with = "class")]
        id: Option<String>,
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        size: usize,
    },
    /// Partition a structure by a named scheme and report on the blocks.
    Partition {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        anchor: Option<usize>,
        /// Class used for the extension-defect report.
        #[arg(long)]
        class: Option<String>,
        #[arg(long)]
        probe: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        base_bound: usize,
    },
    /// Vertices realising a quantifier-free type over a tuple.
    OpenSet {
        #[arg(long)]
        structure: PathBuf,
        /// Comma-separated base vertices.
        #[arg(long, default_value = "")]
        base: String,
        #[arg(long = "type")]
        qf_type: PathBuf,
    },
    /// Colour vertices by the least embedding of A they realise a type over.
    MinColouring {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        a: PathBuf,
        #[arg(long = "type")]
        qf_type: PathBuf,
    },
    /// Encode a colouring as a presentation on 2-sets.
    Encode {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        colouring: PathBuf,
    },
    /// List sunflower copies of B in a presentation.
    SunflowerCheck {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long, conflicts_with = "b_size")]
        b: Option<PathBuf>,
        #[arg(long)]
        b_size: Option<usize>,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// All presentations of a structure on k-sets up to ground relabelling.
    EnumeratePresentations {
        #[arg(long, conflicts_with = "c_size")]
        c: Option<PathBuf>,
        #[arg(long)]
        c_size: Option<usize>,
        #[arg(long)]
        k: usize,
    },
    /// Check that C is a witness of the k-sunflower property for B.
    VerifyWitness {
        #[arg(long, default_value = "pure")]
        class: String,
        #[arg(long, conflicts_with = "b_size")]
        b: Option<PathBuf>,
        #[arg(long)]
        b_size: Option<usize>,
        #[arg(long, conflicts_with = "c_size")]
        c: Option<PathBuf>,
        #[arg(long)]
        c_size: Option<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Partitioned high-girth hypergraphs.
    Hypergraph {
        #[command(subcommand)]
        action: HypergraphAction,
    },
    /// Paste B into every edge of a hypergraph.
    Paste {
        #[arg(long)]
        hypergraph: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        class: String,
    },
    /// Build the recursive witness chain for B up to level k.
    BuildWitness {
        #[arg(long)]
        class: String,
        #[arg(long, conflicts_with = "b_size")]
        b: Option<PathBuf>,
        #[arg(long)]
        b_size: Option<usize>,
        #[arg(long)]
        k: usize,
        /// Part size of every generated hypergraph.
        #[arg(long)]
        c: Option<usize>,
    },
    /// Extract a sunflower copy of the chain's target from a presentation.
    Extract {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
    },
    /// Check a sunflower certificate.
    VerifyCert {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
    },
    /// Replay an extraction trace.
    VerifyTrace {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        presentation: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Disjoint 3-amalgamation over the empty set, pieces up to a size bound.
    #[command(name = "check-3dap")]
    #[serde(rename = "check-3dap")]
    Check3dap {
        #[arg(long)]
        class: String,
        #[arg(long, default_value_t = 1)]
        bound: usize,
    },
    /// Exact parameters for the suitable-sets dichotomy.
    SuitableParams {
        #[arg(long)]
        n: usize,
        /// Rational in (0, 1), e.g. 1/6.
        #[arg(long)]
        a1: String,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum HypergraphAction {
    /// n parts of size c, edges are transversals, Berge girth at least g.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 4)]
        g: usize,
        #[arg(long)]
        c: Option<usize>,
    },
    /// Berge girth of a hypergraph file.
    Girth {
        #[arg(long)]
        hypergraph: PathBuf,
    },
    /// Search for s vertex colourings defeating the mono/transversal dichotomy.
    Adversary {
        #[arg(long)]
        hypergraph: PathBuf,
        #[arg(long)]
        s: usize,
        #[arg(long, value_enum, default_value_t = Mode::Exhaustive)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen { .. } => "gen",
            Command::Partition { .. } => "partition",
            Command::OpenSet { .. } => "open-set",
            Command::MinColouring { .. } => "min-colouring",
            Command::Encode { .. } => "encode",
            Command::SunflowerCheck { .. } => "sunflower-check",
            Command::EnumeratePresentations { .. } => "enumerate-presentations",
            Command::VerifyWitness { .. } => "verify-witness",
            Command::Hypergraph { .. } => "hypergraph",
            Command::Paste { .. } => "paste",
            Command::BuildWitness { .. } => "build-witness",
            Command::Extract { .. } => "extract",
            Command::VerifyCert { .. } => "verify-cert",
            Command::VerifyTrace { .. } => "verify-trace",
            Command::Check3dap { .. } => "check-3dap",
            Command::SuitableParams { .. } => "suitable-params",
        }
    }
}

fn need_seed(g: &Global) -> Result<u64> {
    g.seed.context("this command is randomized: pass --seed")
}

fn enumeration_budget(g: &Global) -> EnumerationBudget {
    let mut b = EnumerationBudget::default();
    if let Some(n) = g.budget {
        b.max_nodes = n;
    }
    b
}

fn presentation(base: Structure, path: &Path) -> Result<Presentation> {
    let a: SetAssignment = read_json(path)?;
    Ok(Presentation::from_assignment(Arc::new(base), a)?)
}

fn parse_ratio(text: &str) -> Result<(i64, i64)> {
    let (n, d) = text.split_once('/').unwrap_or((text, "1"));
    Ok((
        n.trim().parse().context("numerator")?,
        d.trim().parse().context("denominator")?,
    ))
}

fn run(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("setting up threads")?;
    }
    let mut run = Run::new(&g.out, cli.command.name(), serde_json::to_value(cli)?, g.seed)?;
    let mut status = 0;
    match &cli.command {
        Command::Gen { id, class, size } => {
            let seed = need_seed(g)?;
            let s = match (id, class) {
                (Some(id), None) => gen_named(id.parse::<GeneratorId>()?, *size, seed)?,
                (None, Some(c)) => gen_generic(&load_class(c)?, *size, seed)?,
                _ => bail!("give --id or --class"),
            };
            run.json("structure.json", &s)?;
            println!("{} vertices, {} tuples", s.size(), s.tuple_count());
        }
        Command::Partition {
            structure,
            scheme,
            anchor,
            class,
            probe,
            base_bound,
        } => {
            run.input(structure);
            let s: Structure = read_json(structure)?;
            let p = named_partition(&s, scheme, *anchor)?;
            run.json("partition.json", &p)?;
            if let Some(c) = class {
                let k = load_class(c)?;
                let probes: Vec<Structure> = probe.iter().map(|f| read_json(f)).collect::<Result<_>>()?;
                let report = partition_report(&s, &p, &k, &probes, *base_bound)?;
                run.json("report.json", &report)?;
                if g.format == Format::Csv {
                    let rows: Vec<Vec<String>> = report
                        .blocks
                        .iter()
                        .map(|b| {
                            vec![
                                b.index.to_string(),
                                b.size.to_string(),
                                b.defect_count.to_string(),
                                b.probes.iter().filter(|p| p.embeds).count().to_string(),
                                b.open_set_witness.is_some().to_string(),
                            ]
                        })
                        .collect();
                    run.csv(
                        "report.csv",
                        &["block", "size", "defects", "probes_embedding", "open_set_witness"],
                        &rows,
                    )?;
                }
            }
            let sizes: Vec<usize> = p.blocks.iter().map(Vec::len).collect();
            println!("block sizes {sizes:?}");
        }
        Command::OpenSet {
            structure,
            base,
            qf_type,
        } => {
            run.input(structure);
            run.input(qf_type);
            let s: Structure = read_json(structure)?;
            let t: QfType = read_json(qf_type)?;
            let v = basic_open_set(&s, &parse_vertices(base)?, &t)?;
            run.json("open_set.json", &serde_json::json!({ "vertices": v }))?;
            println!("{} vertices", v.len());
        }
        Command::MinColouring { structure, a, qf_type } => {
            run.input(structure);
            run.input(a);
            run.input(qf_type);
            let s: Structure = read_json(structure)?;
            let a: Structure = read_json(a)?;
            let t: QfType = read_json(qf_type)?;
            let c = min_embedding_colouring(&s, &a, &t)?;
            run.json("colouring.json", &c.colouring)?;
            run.json("min_colouring.json", &c)?;
            println!("{} embeddings, {} uncovered", c.embeddings, c.uncovered.len());
        }
        Command::Encode { structure, colouring } => {
            run.input(structure);
            run.input(colouring);
            let s: Structure = read_json(structure)?;
            let chi: Colouring = read_json(colouring)?;
            let p = encode_colouring(&s, &chi)?;
            run.json("presentation.json", &p)?;
        }
        Command::SunflowerCheck {
            structure,
            presentation: pres,
            b,
            b_size,
            limit,
        } => {
            run.input(structure);
            run.input(pres);
            let base: Structure = read_json(structure)?;
            let target = match (b, b_size) {
                (None, Some(n)) => {
                    let rels = vec![Vec::new(); base.signature().len()];
                    Structure::new(base.signature().clone(), *n, rels)?
                }
                _ => structure_or_size(b.as_ref(), *b_size, None)?,
            };
            let p = presentation(base, pres)?;
            let certs = find_sunflower_copies(&p, &target, *limit)?;
            run.json("certificates.json", &certs)?;
            if g.format == Format::Csv {
                let rows: Vec<Vec<String>> = certs.iter().map(|c| vec![join(&c.petals), join(&c.centre)]).collect();
                run.csv("certificates.csv", &["petals", "centre"], &rows)?;
            }
            println!("{} sunflower copies", certs.len());
            if certs.is_empty() {
                status = 1;
            }
        }
        Command::EnumeratePresentations { c, c_size, k } => {
            let base = structure_or_size(c.as_ref(), *c_size, None)?;
            let all = enumerate_presentations(&base, *k, enumeration_budget(g))?;
            run.json("presentations.json", &all)?;
            if g.format == Format::Csv {
                let rows: Vec<Vec<String>> = all
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vec![i.to_string(), serde_json::to_string(p.sets()).unwrap()])
                    .collect();
                run.csv("presentations.csv", &["index", "sets"], &rows)?;
            }
            println!("{} presentations", all.len());
        }
        Command::VerifyWitness {
            class,
            b,
            b_size,
            c,
            c_size,
            k,
            mode,
            trials,
        } => {
            let class = load_class(class)?;
            let target = structure_or_size(b.as_ref(), *b_size, Some(&class))?;
            let candidate = structure_or_size(c.as_ref(), *c_size, Some(&class))?;
            let mode = match mode {
                Mode::Exhaustive => VerifyMode::Exhaustive,
                Mode::Random => VerifyMode::Random {
                    trials: *trials,
                    seed: need_seed(g)?,
                },
            };
            let v = verify_witness(&candidate, &target, *k, mode, enumeration_budget(g))?;
            run.json("verdict.json", &v)?;
            if let Some(cx) = &v.counterexample {
                run.json("counterexample.json", cx)?;
            }
            println!(
                "{} ({} examined)",
                if v.pass { "witness" } else { "counterexample found" },
                v.examined
            );
            status = if v.pass { 0 } else { 1 };
        }
        Command::Hypergraph { action } => match action {
            HypergraphAction::Generate { n, s, g: girth, c } => {
                let opts = GenOptions {
                    c_override: *c,
                    ..GenOptions::default()
                };
                let h = gen_witness_hypergraph(*n, *s, *girth, need_seed(g)?, &opts)?;
                run.json("hypergraph.json", &h)?;
                println!("{} vertices, {} edges", h.vertex_count(), h.edges.len());
            }
            HypergraphAction::Girth { hypergraph } => {
                run.input(hypergraph);
                let h: PartitionedHypergraph = read_json(hypergraph)?;
                let cycle = shortest_cycle(h.vertex_count(), &h.edges, None);
                let girth = cycle.as_ref().map(|c| c.edges.len());
                run.json("girth.json", &serde_json::json!({ "girth": girth, "cycle": cycle }))?;
                match girth {
                    Some(x) => println!("girth {x}"),
                    None => println!("no cycles"),
                }
            }
            HypergraphAction::Adversary {
                hypergraph,
                s,
                mode,
                trials,
            } => {
                run.input(hypergraph);
                let h: PartitionedHypergraph = read_json(hypergraph)?;
                let mode = match mode {
                    Mode::Exhaustive => AdversaryMode::Exhaustive,
                    Mode::Random => AdversaryMode::Random {
                        trials: *trials,
                        seed: need_seed(g)?,
                    },
                };
                let mut budget = AdversaryBudget::default();
                if let Some(n) = g.budget {
                    budget.max_nodes = n;
                }
                let r = vcvrp_adversary(&h, *s, mode, &budget)?;
                run.json("adversary.json", &r)?;
                println!(
                    "{} ({} examined)",
                    if r.counterexample.is_some() {
                        "counterexample found"
                    } else {
                        "no counterexample"
                    },
                    r.examined
                );
                status = i32::from(r.counterexample.is_some());
            }
        },
        Command::Paste { hypergraph, b, class } => {
            run.input(hypergraph);
            run.input(b);
            let h: PartitionedHypergraph = read_json(hypergraph)?;
            let b: Structure = read_json(b)?;
            let out = paste(&h, &b, &load_class(class)?)?;
            run.json("structure.json", &out.structure)?;
            run.json("parts.json", &Partition { blocks: out.parts })?;
            println!("{} vertices, {} copies", out.structure.size(), out.copies.len());
        }
        Command::BuildWitness { class, b, b_size, k, c } => {
            let class = load_class(class)?;
            let target = structure_or_size(b.as_ref(), *b_size, Some(&class))?;
            let opts = GenOptions {
                c_override: *c,
                ..GenOptions::default()
            };
            let chain = build_witness_chain(&class, &target, *k, need_seed(g)?, &opts)?;
            run.json("chain.json", &chain)?;
            let sizes: Vec<usize> = chain.levels.iter().map(|l| l.structure.size()).collect();
            println!("level sizes {sizes:?}");
        }
        Command::Extract {
            chain,
            presentation: pres,
        } => {
            run.input(chain);
            run.input(pres);
            let chain: WitnessChain = read_json(chain)?;
            let a: SetAssignment = read_json(pres)?;
            let k = a.k;
            if k == 0 || k > chain.depth() {
                bail!(
                    "presentation on {k}-sets does not match a chain of depth {}",
                    chain.depth()
                );
            }
            let p = Presentation::from_assignment(Arc::new(chain.level(k).structure.clone()), a)?;
            match extract_sunflower(&chain, &p, k) {
                Ok(out) => {
                    run.json("certificate.json", &out.cert)?;
                    run.json("trace.json", &out.trace)?;
                    println!("sunflower on {:?}, centre {:?}", out.cert.petals, out.cert.centre);
                }
                Err(Error::ExtractionFailed { level, presentation }) => {
                    run.json("counterexample.json", &presentation)?;
                    eprintln!("extraction failed at level {level}; presentation written as counterexample");
                    status = 4;
                }
                Err(e) => return Err(e.into()),
            }
        }
        Command::VerifyCert {
            cert,
            b,
            structure,
            presentation: pres,
        } => {
            for f in [cert, b, structure, pres] {
                run.input(f);
            }
            let cert: SunflowerCert = read_json(cert)?;
            let b: Structure = read_json(b)?;
            let p = presentation(read_json(structure)?, pres)?;
            let ok = verify_certificate(&cert, &b, &p);
            run.json("verdict.json", &serde_json::json!({ "valid": ok }))?;
            println!("{}", if ok { "valid" } else { "invalid" });
            status = i32::from(!ok);
        }
        Command::VerifyTrace {
            chain,
            presentation: pres,
            trace,
            cert,
        } => {
            for f in [chain, pres, trace, cert] {
                run.input(f);
            }
            let chain: WitnessChain = read_json(chain)?;
            let a: SetAssignment = read_json(pres)?;
            let k = a.k;
            if k == 0 || k > chain.depth() {
                bail!(
                    "presentation on {k}-sets does not match a chain of depth {}",
                    chain.depth()
                );
            }
            let p = Presentation::from_assignment(Arc::new(chain.level(k).structure.clone()), a)?;
            let trace: ExtractionTrace = read_json(trace)?;
            let cert: SunflowerCert = read_json(cert)?;
            let verdict = verify_trace(&chain, &p, &trace, &cert);
            run.json(
                "verdict.json",
                &serde_json::json!({ "valid": verdict.is_ok(), "problem": verdict.as_ref().err() }),
            )?;
            match verdict {
                Ok(()) => println!("valid"),
                Err(problem) => {
                    println!("invalid: {problem}");
                    status = 1;
                }
            }
        }
        Command::Check3dap { class, bound } => {
            let r = check_3dap_over_empty(&load_class(class)?, *bound)?;
            run.json("dap.json", &r)?;
            println!(
                "{} ({} families)",
                if r.passed { "passes" } else { "fails" },
                r.families_checked
            );
            status = i32::from(!r.passed);
        }
        Command::SuitableParams { n, a1 } => {
            let (num, den) = parse_ratio(a1)?;
            let p = suitable_params(*n, &ratio(num, den))?;
            run.json("params.json", &p)?;
            println!("epsilon {}, a0 {}, c_min {}", p.epsilon, p.a0, p.c_min);
        }
    }
    run.finish(status)?;
    Ok(status)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded(_)) => 3,
        Some(Error::ExtractionFailed { .. }) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
