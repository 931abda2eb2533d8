//! `bnmatch`: blank node aware diff, patch, equivalence, entailment,
//! integration and versioning for N-Triples files.
//!
//! Exit codes: 0 success or "true", 1 "false", 2 usage error, 3 I/O,
//! parse or processing error. Diagnostics go to stderr; artifacts go to
//! the `-o` file or stdout.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bnmatch::decision::{equivalence_witness, test_entailment_with_budget, DEFAULT_ENTAILMENT_BUDGET};
use bnmatch::delta::{apply_delta, delta_mapped, delta_plain, DeltaScript, Direction};
use bnmatch::generator::{bench, generate_pair, write_pair, GenSpec, BENCH_HEADER};
use bnmatch::integration::{integrate_reviewed, Candidate, IntegrationOptions};
use bnmatch::matcher::{solve_bm, MatcherConfig};
use bnmatch::ntriples::{parse_ntriples, serialize_ntriples};
use bnmatch::store::Repository;
use bnmatch::{EquivalenceRelation, Graph};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bnmatch", version, about = "Blank node matching for RDF graphs", arg_required_else_help = true)]
struct Cli {
    /// More detail on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Delta between two graphs, blank nodes matched first.
    Diff {
        g1: PathBuf,
        g2: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
        /// Label scope of the operations.
        #[arg(long, value_enum, default_value_t = Labels::Target)]
        labels: Labels,
        /// Compare blank node labels verbatim instead of matching.
        #[arg(long)]
        plain: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Apply a delta file to a graph.
    Patch {
        graph: PathBuf,
        delta: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Blank node mapping between two graphs.
    Match {
        g1: PathBuf,
        g2: PathBuf,
        #[command(flatten)]
        matching: MatchArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Are the graphs equal up to blank node renaming? Prints the bijection.
    Equiv { g1: PathBuf, g2: PathBuf },
    /// Does the first graph entail the second? Prints a witness.
    Entail {
        g1: PathBuf,
        g2: PathBuf,
        /// Search nodes to expand before giving up.
        #[arg(long, default_value_t = DEFAULT_ENTAILMENT_BUDGET)]
        budget: u64,
    },
    /// Merge sources, linking blank nodes that describe the same thing.
    Integrate {
        #[arg(required = true, num_args = 2..)]
        graphs: Vec<PathBuf>,
        #[command(flatten)]
        matching: MatchArgs,
        /// Give linked blank nodes one label instead of sameAs triples.
        #[arg(long)]
        unify: bool,
        /// Confirm each candidate pair on stdin (y/n; empty keeps the default).
        #[arg(long)]
        review: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Delta-based version store.
    #[command(subcommand)]
    Vs(VsCommand),
    /// Generate a graph pair with a planted mapping.
    Gen {
        #[arg(long)]
        bnodes: usize,
        /// Triples without blank nodes.
        #[arg(long)]
        triples: usize,
        /// Triples with blank nodes (default three per blank node).
        #[arg(long)]
        bnode_triples: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        connectivity: f64,
        #[arg(long, default_value_t = 0)]
        mutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run every matcher strategy over generated pairs; CSV report.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = MatcherConfig::default().exact_threshold)]
        exact_threshold: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum VsCommand {
    /// Create a repository with the graph as version 1.
    Init { repo: PathBuf, graph: PathBuf },
    /// Store the graph as the next version.
    Commit { repo: PathBuf, graph: PathBuf },
    /// Reconstruct version `index` (1-based).
    Checkout {
        repo: PathBuf,
        index: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Delta taking version `from` to version `to`.
    Patch {
        repo: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct MatchArgs {
    /// exact, suffix, or sameas:<file.nt>
    #[arg(long, default_value = "exact")]
    equiv: String,
    #[arg(long, default_value_t = MatcherConfig::default().exact_threshold)]
    exact_threshold: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Labels {
    Source,
    Target,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<bnmatch::Error> for Failure {
    fn from(e: bnmatch::Error) -> Self {
        match e {
            bnmatch::Error::InfeasibleSpec(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn io_fail(path: &Path, e: io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| io_fail(path, e))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| io_fail(path, e))
    }
}

fn read_graph(path: &Path, verbose: bool) -> Result<Graph, Failure> {
    let text = read_text(path)?;
    let report = parse_ntriples(BufReader::new(text.as_bytes()))
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    if verbose {
        for (line, w) in &report.warnings {
            eprintln!("{}:{line}: {w}", path.display());
        }
    }
    let mut g = report.graph;
    g.set_id(path.display().to_string());
    Ok(g)
}

fn write_out(output: Option<&Path>, body: &str) -> Result<(), Failure> {
    match output {
        Some(p) if p != Path::new("-") => fs::write(p, body).map_err(|e| io_fail(p, e)),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_fail(Path::new("<stdout>"), e))
        }
    }
}

fn relation(spec: &str, verbose: bool) -> Result<EquivalenceRelation, Failure> {
    match spec {
        "exact" => Ok(EquivalenceRelation::exact()),
        "suffix" => Ok(EquivalenceRelation::suffix()),
        other => match other.strip_prefix("sameas:") {
            Some(file) => Ok(EquivalenceRelation::same_as_from_graph(&read_graph(Path::new(file), verbose)?)?),
            None => Err(Failure::Usage(format!(
                "invalid --equiv '{other}' (expected exact, suffix or sameas:<file>)"
            ))),
        },
    }
}

fn config(m: &MatchArgs) -> MatcherConfig {
    MatcherConfig {
        exact_threshold: m.exact_threshold,
        ..MatcherConfig::default()
    }
}

fn execute(cli: Cli) -> Outcome {
    let v = cli.verbose;
    match cli.command {
        Command::Diff {
            g1,
            g2,
            matching,
            labels,
            plain,
            output,
        } => {
            let rel = relation(&matching.equiv, v)?;
            let (a, b) = (read_graph(&g1, v)?, read_graph(&g2, v)?);
            let d = if plain {
                delta_plain(&a, &b)
            } else {
                let m = solve_bm(&a, &b, &rel, &config(&matching));
                if v {
                    eprintln!("matched {} blank node(s), cost {}, method {}", m.len(), m.cost(), m.method());
                }
                let dir = match labels {
                    Labels::Source => Direction::ForwardIntoSourceLabels,
                    Labels::Target => Direction::ForwardIntoTargetLabels,
                };
                delta_mapped(&a, &b, &m, dir)?
            };
            if v {
                eprintln!("{} deletion(s), {} addition(s)", d.deletions().len(), d.additions().len());
            }
            write_out(output.as_deref(), &d.to_file_string())?;
            Ok(true)
        }
        Command::Patch { graph, delta, output } => {
            if graph == Path::new("-") && delta == Path::new("-") {
                return Err(Failure::Usage("only one input can come from stdin".into()));
            }
            let g = read_graph(&graph, v)?;
            let d = DeltaScript::parse(&read_text(&delta)?)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", delta.display())))?;
            let out = apply_delta(&g, &d);
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            write_out(output.as_deref(), &serialize_ntriples(&out.graph))?;
            Ok(true)
        }
        Command::Match {
            g1,
            g2,
            matching,
            output,
        } => {
            let rel = relation(&matching.equiv, v)?;
            let (a, b) = (read_graph(&g1, v)?, read_graph(&g2, v)?);
            let m = solve_bm(&a, &b, &rel, &config(&matching));
            write_out(output.as_deref(), &m.to_bm_string())?;
            Ok(true)
        }
        Command::Equiv { g1, g2 } => {
            let (a, b) = (read_graph(&g1, v)?, read_graph(&g2, v)?);
            match equivalence_witness(&a, &b) {
                Some(m) => {
                    let body: String = m
                        .pairs()
                        .iter()
                        .map(|(x, y)| format!("M {} {}\n", x.value(), y.value()))
                        .collect();
                    write_out(None, &body)?;
                    Ok(true)
                }
                None => {
                    eprintln!("not equivalent");
                    Ok(false)
                }
            }
        }
        Command::Entail { g1, g2, budget } => {
            let (a, b) = (read_graph(&g1, v)?, read_graph(&g2, v)?);
            match test_entailment_with_budget(&a, &b, budget)? {
                Some(m) => {
                    write_out(None, &m.to_text())?;
                    Ok(true)
                }
                None => {
                    eprintln!("not entailed");
                    Ok(false)
                }
            }
        }
        Command::Integrate {
            graphs,
            matching,
            unify,
            review,
            output,
        } => {
            if review && graphs.iter().any(|g| g == Path::new("-")) {
                return Err(Failure::Usage("--review reads answers from stdin; pass graphs as files".into()));
            }
            let rel = relation(&matching.equiv, v)?;
            let sources = graphs.iter().map(|p| read_graph(p, v)).collect::<Result<Vec<_>, _>>()?;
            let stdin = io::stdin();
            let mut answers = stdin.lock().lines();
            let mut decide = |c: &Candidate| -> bool {
                if !review {
                    return c.recommended;
                }
                eprint!(
                    "link {} {} dist={} ({} / {} triples){}? [{}] ",
                    c.left.value(),
                    c.right.value(),
                    c.dist,
                    c.left_triples,
                    c.right_triples,
                    if c.recommended { ", recommended" } else { "" },
                    if c.recommended { "Y/n" } else { "y/N" },
                );
                match answers.next() {
                    Some(Ok(line)) => match line.trim().to_ascii_lowercase().as_str() {
                        "y" | "yes" => true,
                        "n" | "no" => false,
                        _ => c.recommended,
                    },
                    _ => c.recommended,
                }
            };
            let r = integrate_reviewed(&sources, &rel, &config(&matching), &IntegrationOptions { unify }, &mut decide);
            for s in &r.report {
                eprintln!("{}: {} blank node(s), {} linked", s.tag, s.bnodes, s.matched);
            }
            if v {
                for c in &r.candidates {
                    eprintln!("candidate {} {} dist={} recommended={}", c.left.value(), c.right.value(), c.dist, c.recommended);
                }
            }
            eprintln!("{} blank node link(s), {} URI link(s)", r.bnode_links.len(), r.uri_links.len());
            write_out(output.as_deref(), &serialize_ntriples(&r.merged))?;
            Ok(true)
        }
        Command::Vs(cmd) => vs(cmd, v),
        Command::Gen {
            bnodes,
            triples,
            bnode_triples,
            connectivity,
            mutations,
            seed,
            output,
        } => {
            let spec = GenSpec {
                bnode_triples,
                ..GenSpec::new(bnodes, triples, connectivity, mutations, seed)
            };
            let pair = generate_pair(&spec)?;
            write_pair(&output, &spec, &pair)?;
            eprintln!(
                "wrote {}: |G1|={} |G2|={} truth cost {}",
                output.display(),
                pair.g1.len(),
                pair.g2.len(),
                pair.truth.cost()
            );
            Ok(true)
        }
        Command::Bench {
            dir,
            exact_threshold,
            output,
        } => {
            let cfg = MatcherConfig {
                exact_threshold,
                ..MatcherConfig::default()
            };
            let rows = bench(&dir, &cfg)?;
            let mut body = format!("{BENCH_HEADER}\n");
            for r in &rows {
                body.push_str(&r.to_csv());
                body.push('\n');
            }
            write_out(output.as_deref(), &body)?;
            Ok(true)
        }
    }
}

fn vs(cmd: VsCommand, v: bool) -> Outcome {
    match cmd {
        VsCommand::Init { repo, graph } => {
            let g = read_graph(&graph, v)?;
            Repository::init(&repo, &g)?;
            eprintln!("initialised {} with {} triple(s)", repo.display(), g.len());
        }
        VsCommand::Commit { repo, graph } => {
            let g = read_graph(&graph, v)?;
            let r = Repository::open(&repo)?;
            let d = r.commit(&g)?;
            let count = r.load()?.version_count();
            eprintln!("version {count}: {} operation(s)", d.size());
        }
        VsCommand::Checkout { repo, index, output } => {
            let g = Repository::open(&repo)?.checkout(index)?;
            write_out(output.as_deref(), &serialize_ntriples(&g))?;
        }
        VsCommand::Patch { repo, from, to, output } => {
            let d = Repository::open(&repo)?.make_sync_patch(from, to)?;
            write_out(output.as_deref(), &d.to_file_string())?;
        }
    }
    Ok(true)
}

/// Parses `args` (program name first) and runs the command; returns the
/// exit code.
fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()) as u8)
}
