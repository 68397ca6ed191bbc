use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Parser, Subcommand};
use nagatree_core::extend::{lipschitz_extend, ScaffoldMethod, ValuedSubset};
use nagatree_core::fixtures::{Family, FixtureSpec};
use nagatree_core::gupta::gupta_construction;
use nagatree_core::nagata::{nagata_construction, verify_block_radii};
use nagatree_core::rational::int;
use nagatree_core::search::{improve_local, local_result, min_distortion_bnb, Method};
use nagatree_core::{nagata_constant, MetricSpace, Rational};

use crate::error::{Error, Result};
use crate::io::{
    metric_to_json, metric_to_matrix, parse_labels, parse_metric, parse_tree, parse_values,
    read_file, tree_to_json, values_to_text, write_file,
};
use crate::parallel;
use crate::report::{
    digest, ConstructionDoc, DistortionDoc, ExtensionDoc, NagataDoc, RunReport, SearchDoc, TraceDoc,
};

/// Node budget for branch and bound when `--budget` is absent.
pub const DEFAULT_BNB_BUDGET: u64 = 10_000_000;
/// Swap budget for local search when `--budget` is absent.
pub const DEFAULT_LOCAL_ITERATIONS: u64 = 1_000;

#[derive(Parser, Debug)]
#[command(
    name = "nagatree",
    version,
    about = "Low-distortion spanning trees of finite metric spaces"
)]
struct Cli {
    /// Worker threads for searches and pair scans (default: $NAGATREE_THREADS or all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nagata constant, ultrametric and four-point checks; optionally the distortion of a tree.
    Analyze {
        /// Metric file; `-` or absent reads stdin.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Chain-hierarchy tree.
    BuildNagata {
        #[arg(long)]
        input: Option<PathBuf>,
        /// Label of the root point.
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sphere-halving tree of a 0-hyperbolic space.
    BuildGupta {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Writes the realization, frontiers, claims and per-pair checks.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Minimum-distortion spanning tree search.
    SearchOpt {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_method)]
        method: Method,
        /// Node budget (bnb) or swap budget (local).
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exhaustive only: keep trees in which the first point has maximum degree.
        #[arg(long)]
        symmetric: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Lipschitz extension of values on a subset to the whole space.
    Extend {
        #[arg(long)]
        input: Option<PathBuf>,
        /// One label per line.
        #[arg(long)]
        subset: PathBuf,
        /// One row of values per subset label.
        #[arg(long)]
        values: PathBuf,
        #[arg(long, value_parser = parse_scaffold, default_value = "nagata")]
        method: ScaffoldMethod,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Named and random fixture spaces.
    #[command(group(ArgGroup::new("size").required(true).args(["n", "big_n", "k"])))]
    Gen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "N")]
        big_n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "matrix", value_parser = ["matrix", "json"])]
        format: String,
        /// Metric file; absent writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: nagatree_core::Error| e.to_string())
}

fn parse_scaffold(s: &str) -> std::result::Result<ScaffoldMethod, String> {
    s.parse().map_err(|e: nagatree_core::Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse()
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    start: Instant,
}

impl Io<'_> {
    fn input(&mut self, path: &Option<PathBuf>) -> Result<(Vec<u8>, String)> {
        match path {
            Some(p) if p != Path::new("-") => Ok((read_file(p)?, p.display().to_string())),
            _ => {
                let mut buf = Vec::new();
                self.stdin
                    .read_to_end(&mut buf)
                    .map_err(|e| Error::io(Path::new("<stdin>"), e))?;
                Ok((buf, "<stdin>".into()))
            }
        }
    }

    fn metric(&mut self, path: &Option<PathBuf>, report: &mut RunReport) -> Result<MetricSpace> {
        let (bytes, name) = self.input(path)?;
        report.input_digest = Some(digest(&bytes));
        parse_metric(&bytes, &name)
    }

    fn emit(&mut self, path: Option<&PathBuf>, contents: &str) -> Result<()> {
        match path {
            Some(p) if p != Path::new("-") => write_file(p, contents),
            _ => self
                .stdout
                .write_all(contents.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e)),
        }
    }
}

fn bound_violation(msg: String) -> Error {
    nagatree_core::Error::BoundViolation(msg).into()
}

fn check_at_most(what: &str, value: &Rational, bound: &Rational, strict: bool) -> Result<()> {
    let bad = if strict {
        value >= bound
    } else {
        value > bound
    };
    if bad {
        return Err(bound_violation(format!(
            "{what}: distortion {value} exceeds bound {bound}"
        )));
    }
    Ok(())
}

fn execute(cli: Cli, io: &mut Io<'_>, report: &mut RunReport) -> Result<()> {
    let threads = cli
        .threads
        .filter(|&t| t > 0)
        .unwrap_or_else(parallel::default_threads);
    match cli.command {
        Command::Analyze {
            input,
            tree,
            report: out,
        } => {
            let x = io.metric(&input, report)?;
            report.nagata = Some(NagataDoc::new(&x, &nagata_constant(&x)));
            if let Some(path) = tree {
                let t = parse_tree(&read_file(&path)?, &path.display().to_string(), &x)?;
                report.distortion = Some(DistortionDoc::new(
                    &x,
                    &parallel::distortion(&x, &t, threads)?,
                ));
            }
            finish(io, report, out.as_ref())
        }
        Command::BuildNagata {
            input,
            root,
            out,
            report: rep,
        } => {
            let x = io.metric(&input, report)?;
            let root = root
                .map(|l| x.index_of(&l).ok_or(nagatree_core::Error::UnknownLabel(l)))
                .transpose()?;
            let built = nagata_construction(&x, root)?;
            verify_block_radii(&built)?;
            let d = parallel::distortion(&x, &built.tree, threads)?;
            check_at_most("nagata tree", &d.distortion, &built.bound, false)?;
            report.nagata = Some(NagataDoc::new(&x, &nagata_constant(&x)));
            report.distortion = Some(DistortionDoc::new(&x, &d));
            report.construction = Some(ConstructionDoc {
                method: "nagata".into(),
                root: Some(x.label(built.hierarchy.root).into()),
                levels: Some(built.hierarchy.height()),
                bound: (&built.bound).into(),
                components: None,
                steiner_nodes: None,
            });
            if let Some(p) = &out {
                write_file(p, &tree_to_json(&x, &built.tree))?;
            }
            finish(io, report, rep.as_ref())
        }
        Command::BuildGupta {
            input,
            out,
            report: rep,
            trace,
        } => {
            let x = io.metric(&input, report)?;
            let built = gupta_construction(&x)?;
            let d = parallel::distortion(&x, &built.tree, threads)?;
            let bound = int(8);
            check_at_most("halving tree", &d.distortion, &bound, true)?;
            report.distortion = Some(DistortionDoc::new(&x, &d));
            report.construction = Some(ConstructionDoc {
                method: "gupta".into(),
                root: None,
                levels: None,
                bound: (&bound).into(),
                components: Some(built.components.len()),
                steiner_nodes: Some(built.rtree.steiner_count()),
            });
            if let Some(p) = &out {
                write_file(p, &tree_to_json(&x, &built.tree))?;
            }
            if let Some(p) = &trace {
                let mut s = serde_json::to_string_pretty(&TraceDoc::new(&x, &built))?;
                s.push('\n');
                write_file(p, &s)?;
            }
            finish(io, report, rep.as_ref())
        }
        Command::SearchOpt {
            input,
            method,
            budget,
            seed,
            symmetric,
            out,
            report: rep,
        } => {
            let x = io.metric(&input, report)?;
            if symmetric && method != Method::Exhaustive {
                return Err(Error::BadFlag(
                    "--symmetric applies to the exhaustive method only".into(),
                ));
            }
            let (result, budget, seed) = match method {
                Method::Exhaustive => (parallel::exhaustive(&x, symmetric, threads)?, None, None),
                Method::BranchAndBound => {
                    let b = budget.unwrap_or(DEFAULT_BNB_BUDGET);
                    (min_distortion_bnb(&x, b)?, Some(b), None)
                }
                Method::Local => {
                    let iterations = budget.unwrap_or(DEFAULT_LOCAL_ITERATIONS);
                    let start = nagata_construction(&x, None)?.tree;
                    let tree = improve_local(&x, &start, seed, iterations)?;
                    (local_result(&x, tree, 0)?, Some(iterations), Some(seed))
                }
            };
            let d = parallel::distortion(&x, &result.best_tree, threads)?;
            if d.distortion != result.best_distortion {
                return Err(bound_violation(format!(
                    "search reported {} but the tree has distortion {}",
                    result.best_distortion, d.distortion
                )));
            }
            report.distortion = Some(DistortionDoc::new(&x, &d));
            report.search = Some(SearchDoc::new(&result, budget, seed, symmetric));
            if let Some(p) = &out {
                write_file(p, &tree_to_json(&x, &result.best_tree))?;
            }
            finish(io, report, rep.as_ref())
        }
        Command::Extend {
            input,
            subset,
            values,
            method,
            out,
            report: rep,
        } => {
            let x = io.metric(&input, report)?;
            let points = parse_labels(&read_file(&subset)?, &subset.display().to_string(), &x)?;
            let rows = parse_values(&read_file(&values)?, &values.display().to_string())?;
            let data = ValuedSubset::new(&x, points, rows)?;
            let ext = lipschitz_extend(&x, &data, method)?;
            report.extension = Some(ExtensionDoc {
                method: method.name().into(),
                subset: data
                    .points()
                    .iter()
                    .map(|&p| x.label(p).to_string())
                    .collect(),
                dim: data.dim(),
                achieved_lip: ext.achieved_lip,
                guaranteed_lip: (&ext.guaranteed_lip).into(),
            });
            if let Some(p) = &out {
                write_file(p, &values_to_text(&ext.extended))?;
            }
            finish(io, report, rep.as_ref())
        }
        Command::Gen {
            family,
            n,
            big_n,
            k,
            seed,
            format,
            out,
        } => {
            let size = n.or(big_n).or(k).expect("clap enforces one size flag");
            let x = FixtureSpec { family, size, seed }.generate()?;
            let text = if format == "json" {
                metric_to_json(&x)
            } else {
                metric_to_matrix(&x)
            };
            io.emit(out.as_ref(), &text)
        }
    }
}

fn finish(io: &mut Io<'_>, report: &mut RunReport, path: Option<&PathBuf>) -> Result<()> {
    report.timing_ms = io.start.elapsed().as_secs_f64() * 1e3;
    io.emit(path, &report.to_json())
}

fn error_document(kind: &str, message: &str) -> String {
    let mut s =
        serde_json::to_string_pretty(&serde_json::json!({ "error": kind, "message": message }))
            .expect("serializable");
    s.push('\n');
    s
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// status: 0 on success, 2 on input errors, 3 when an internal bound fails.
/// Errors are reported on `stderr` as a JSON document.
pub fn run(
    args: Vec<String>,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let start = Instant::now();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                kind => {
                    let name = if kind == ErrorKind::InvalidSubcommand {
                        "UnknownCommand"
                    } else {
                        "BadFlag"
                    };
                    let _ =
                        stderr.write_all(error_document(name, &e.render().to_string()).as_bytes());
                    2
                }
            };
        }
    };
    let mut report = RunReport::new(args.iter().skip(1).cloned().collect());
    let mut io = Io {
        stdin,
        stdout,
        start,
    };
    match execute(cli, &mut io, &mut report) {
        Ok(()) => 0,
        Err(e) => {
            let _ = stderr.write_all(error_document(&e.kind(), &e.to_string()).as_bytes());
            e.exit_code()
        }
    }
}
