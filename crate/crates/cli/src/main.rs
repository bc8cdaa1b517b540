//! `shf`: command-line front end for separating hash families.
//!
//! Exit codes: 0 when the command succeeds and any checked property holds,
//! 1 when a checked property fails, 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use shf_core::bounds::best_upper_bound;
use shf_core::coverfree::{cff_derived, is_cff, shf_to_cff_double, BinaryFamily};
use shf_core::hypergraph::{cycle_to_violation, find_rainbow_cycle, PartiteHypergraph, RainbowCycle};
use shf_core::search::{
    exact_capacity, identity_construction, rainbow_free_extremal_search, random_shf_alteration, reed_solomon_frameproof,
};
use shf_core::verify::{find_violation_parallel, nonlinear_pair};
use shf_core::{parse_matrix, Matrix, SeparationType};

#[derive(Parser)]
#[command(
    name = "shf",
    version,
    about = "Separating hash families: verify, bound, search, construct"
)]
struct Cli {
    /// Worker threads for parallel verification (0 = all cores).
    #[arg(long, global = true, env = "SHF_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a matrix for a separation, cover-free or linearity property.
    Verify(VerifyArgs),
    /// All applicable upper bounds on C(N, q, W), ascending.
    Bounds {
        rows: usize,
        q: u32,
        /// Separation type, e.g. 1,3
        weights: SeparationType,
        /// Also report the probabilistic lower bound.
        #[arg(long)]
        lower: bool,
    },
    /// Exhaustive searches.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Build a matrix from a known construction.
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Transform a matrix.
    Convert(ConvertArgs),
    /// Rainbow cycles and the shadow graph of a matrix's hypergraph.
    Hypergraph(HypergraphArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct PropertyChoice {
    /// Separation type, e.g. 2,2
    #[arg(long = "type")]
    weights: Option<SeparationType>,
    /// Cover-free order of a binary matrix.
    #[arg(long)]
    cff: Option<usize>,
    /// Every two columns agree in at most one row.
    #[arg(long)]
    linear: bool,
}

#[derive(Args)]
struct VerifyArgs {
    matrix: PathBuf,
    #[command(flatten)]
    property: PropertyChoice,
}

#[derive(Subcommand)]
enum SearchCommand {
    /// Exact C(N, q, W) by exhaustive search.
    Capacity {
        rows: usize,
        q: u32,
        weights: SeparationType,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        /// Write the witness matrix here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Largest linear r-partite hypergraph without rainbow cycles of the given lengths.
    RainbowFree {
        r: usize,
        q: u32,
        /// Cycle lengths, e.g. 3,4
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ConstructCommand {
    /// N x N identity, {1,w}-separating.
    Identity {
        rows: usize,
        w: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reed-Solomon evaluation code over a prime field, {1,w}-separating.
    ReedSolomon {
        q: u32,
        rows: usize,
        w: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random matrix with unseparated tuples deleted.
    Alteration {
        rows: usize,
        q: u32,
        weights: SeparationType,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "transform")]
struct Transform {
    /// Stack every `a` consecutive rows into one row over q^a symbols.
    #[arg(long)]
    group: Option<usize>,
    /// Doubling map from a binary {1,w}-separating matrix to a w-cover-free family.
    #[arg(long)]
    double: Option<usize>,
    /// Delete this member of a cover-free family and all its points (needs --w).
    #[arg(long, requires = "w")]
    derive: Option<usize>,
}

#[derive(Args)]
struct ConvertArgs {
    matrix: PathBuf,
    #[command(flatten)]
    transform: Transform,
    /// Cover-free order of the input for --derive.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct HypergraphQuery {
    /// Find the first rainbow cycle of this length.
    #[arg(long)]
    rainbow: Option<usize>,
    /// Find the shortest rainbow cycle of any length.
    #[arg(long)]
    rainbow_any: bool,
    /// Shadow-graph statistics.
    #[arg(long)]
    shadow: bool,
}

#[derive(Args)]
struct HypergraphArgs {
    matrix: PathBuf,
    #[command(flatten)]
    query: HypergraphQuery,
}

/// Whether a checked property held; commands without one report `Holds`.
enum Outcome {
    Holds,
    Fails,
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit_matrix(m: &Matrix, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, m.to_text()).with_context(|| format!("writing {}", path.display())),
        None => Ok(std::io::stdout().write_all(m.to_text().as_bytes())?),
    }
}

fn print_json(v: &Value) -> Result<()> {
    writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn report(property: String, witness: Option<Value>) -> Result<Outcome> {
    let holds = witness.is_none();
    let mut v = json!({ "property": property, "holds": holds });
    if let Some(w) = witness {
        v["witness"] = w;
    }
    print_json(&v)?;
    Ok(if holds { Outcome::Holds } else { Outcome::Fails })
}

fn verify(args: VerifyArgs) -> Result<Outcome> {
    let m = read_matrix(&args.matrix)?;
    let p = args.property;
    if let Some(sep) = p.weights {
        let witness = find_violation_parallel(&m, &sep)
            .map(serde_json::to_value)
            .transpose()?;
        report(format!("separating {sep}"), witness)
    } else if let Some(w) = p.cff {
        let family = BinaryFamily::new(m)?;
        let witness = is_cff(&family, w).map(serde_json::to_value).transpose()?;
        report(format!("{w}-cover-free"), witness)
    } else {
        let witness = nonlinear_pair(&m).map(|(a, b)| json!({ "columns": [a, b] }));
        report("linear".into(), witness)
    }
}

fn bounds(rows: usize, q: u32, sep: SeparationType, lower: bool) -> Result<Outcome> {
    let r = best_upper_bound(rows, q, &sep)?;
    print_json(&json!({ "best": r.best, "bounds": r.sorted(lower) }))?;
    Ok(Outcome::Holds)
}

fn search(cmd: SearchCommand) -> Result<Outcome> {
    match cmd {
        SearchCommand::Capacity {
            rows,
            q,
            weights,
            budget,
            out,
        } => {
            let r = exact_capacity(rows, q, &weights, budget)?;
            if let Some(path) = &out {
                emit_matrix(&r.witness, Some(path))?;
            }
            print_json(&serde_json::to_value(&r)?)?;
        }
        SearchCommand::RainbowFree {
            r,
            q,
            lengths,
            budget,
            out,
        } => {
            let res = rainbow_free_extremal_search(r, q, &lengths, budget)?;
            if let Some(path) = &out {
                emit_matrix(&res.hypergraph.to_matrix()?, Some(path))?;
            }
            print_json(&json!({
                "r": res.r,
                "q": res.q,
                "lengths": res.lengths,
                "edges": res.edges,
                "hypergraph": res.hypergraph.to_matrix()?.to_text(),
                "stats": res.stats,
                "heuristic": res.heuristic,
            }))?;
        }
    }
    Ok(Outcome::Holds)
}

fn construct(cmd: ConstructCommand) -> Result<Outcome> {
    let (m, out) = match cmd {
        ConstructCommand::Identity { rows, w, out } => (identity_construction(rows, w)?, out),
        ConstructCommand::ReedSolomon { q, rows, w, out } => (reed_solomon_frameproof(q, rows, w)?, out),
        ConstructCommand::Alteration {
            rows,
            q,
            weights,
            seed,
            trials,
            out,
        } => (random_shf_alteration(rows, q, &weights, seed, trials)?, out),
    };
    emit_matrix(&m, out.as_deref())?;
    Ok(Outcome::Holds)
}

fn convert(args: ConvertArgs) -> Result<Outcome> {
    let m = read_matrix(&args.matrix)?;
    let t = args.transform;
    let converted = if let Some(a) = t.group {
        m.group_rows(a)?
    } else if let Some(w) = t.double {
        shf_to_cff_double(&m, w)?.into_matrix()
    } else if let Some(a) = t.derive {
        let w = args.w.context("--derive needs --w")?;
        cff_derived(&BinaryFamily::new(m)?, a, w)?.into_matrix()
    } else {
        bail!("no transform given");
    };
    emit_matrix(&converted, args.out.as_deref())?;
    Ok(Outcome::Holds)
}

fn cycle_report(h: &PartiteHypergraph, cycle: &RainbowCycle) -> Result<Value> {
    let mut v = serde_json::to_value(cycle)?;
    if cycle.k.is_multiple_of(2) && cycle.k == h.parts() {
        v["violation"] = serde_json::to_value(cycle_to_violation(h, cycle)?)?;
    }
    Ok(v)
}

fn hypergraph(args: HypergraphArgs) -> Result<Outcome> {
    let m = read_matrix(&args.matrix)?;
    let h = PartiteHypergraph::from_matrix(&m);
    let q = args.query;
    if q.shadow {
        print_json(&serde_json::to_value(h.shadow_graph().stats())?)?;
        return Ok(Outcome::Holds);
    }
    let lengths: Vec<usize> = match q.rainbow {
        Some(k) => vec![k],
        None => (3..=h.parts()).collect(),
    };
    if lengths.is_empty() {
        bail!("rainbow cycles need at least 3 parts, the matrix has {}", h.parts());
    }
    for &k in &lengths {
        if let Some(cycle) = find_rainbow_cycle(&h, k)? {
            print_json(&json!({ "found": true, "cycle": cycle_report(&h, &cycle)? }))?;
            return Ok(Outcome::Holds);
        }
    }
    print_json(&json!({ "found": false, "lengths": lengths }))?;
    Ok(Outcome::Fails)
}

fn run(cli: Cli) -> Result<Outcome> {
    rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global()?;
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::Bounds {
            rows,
            q,
            weights,
            lower,
        } => bounds(rows, q, weights, lower),
        Command::Search(cmd) => search(cmd),
        Command::Construct(cmd) => construct(cmd),
        Command::Convert(args) => convert(args),
        Command::Hypergraph(args) => hypergraph(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Holds) => ExitCode::SUCCESS,
        Ok(Outcome::Fails) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
