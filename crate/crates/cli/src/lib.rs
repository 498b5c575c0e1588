//! Command-line front end for `boxlab`.
//!
//! [`run`] parses arguments, dispatches to the library and writes a
//! [`RunReport`]. Exit codes: 0 success, 1 a negative verdict, 2 an
//! inconclusive search, 64 usage errors, 65 malformed input, 70 internal
//! failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use boxlab::construct::{
    audit_density, build_hypergraph, random_colouring, AuditSpec, EdgeColouring, ProductFamilies, RandomPairFamilies,
};
use boxlab::hypercore::{find_clique, Hypergraph3, Verdict};
use boxlab::palette::{standard_palette, Palette};
use boxlab::ramsey::{find_bad_triangle, lower_bound_report, search_palette_colouring, ColouringVerdict, SearchBudget};
use boxlab::reduced::{
    build_fortress, check_box_dense, compute_constants, find_reduced_clique, fortress_to_clique, is_reduced_clique,
    verify_fortress, BuildOutcome, BuildParams, ConstantLimits, ConstantsOutcome, Fortress, ReducedHypergraph,
};
use boxlab::scalar::parse_rational;
use boxlab::systems::{extract_subsystem, largest_subsystem, parse_leaf_set, q_set, KMTree, Seq};
use boxlab::{BigRational, Error, Ratio};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

mod report;

pub use report::RunReport;

pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "boxlab", version, about = "Density counting, palette searches and fortress tools for 3-graphs")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "BOXLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for searches (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Single-threaded search order and no timings, so reports are reproducible.
    #[arg(long, global = true)]
    pub deterministic: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Palette densities and listings.
    #[command(subcommand)]
    Palette(PaletteCmd),
    /// Random colouring and the hypergraph it induces.
    Construct(ConstructArgs),
    /// Empirical box-density audit of a constructed hypergraph.
    Audit(AuditArgs),
    /// Palette-respecting colourings of K_k.
    Ramsey(RamseyArgs),
    /// Clique search in a 3-graph.
    Clique(CliqueArgs),
    /// Trees, Q(c) and subsystem extraction.
    #[command(subcommand)]
    Systems(SystemsCmd),
    /// Reduced hypergraphs and fortresses.
    #[command(subcommand)]
    Reduced(ReducedCmd),
    /// The constants recursion of the fortress construction.
    Constants(ConstantsArgs),
    /// End-to-end reproductions.
    #[command(subcommand)]
    Reproduce(ReproduceCmd),
}

#[derive(Subcommand, Debug)]
pub enum PaletteCmd {
    /// Print the exact codegree density.
    MinCodegree {
        /// Palette name (cyclic3, two_colour_nonmono, exactly_two_of_three, nonmono(l)) or file.
        palette: String,
    },
    /// Print the palette in file format.
    Show { palette: String },
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub palette: String,
    /// Hypergraph output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Colouring output file.
    #[arg(long)]
    pub colouring_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    #[arg(long)]
    pub colouring: PathBuf,
    #[arg(long)]
    pub palette: String,
    #[arg(long, value_parser = exact, default_value = "0.02")]
    pub eta: BigRational,
    /// Any of colour, random, product.
    #[arg(long, value_delimiter = ',', default_value = "colour")]
    pub families: Vec<String>,
    /// Trials per random density and for products.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub densities: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct RamseyArgs {
    #[arg(long)]
    pub palette: String,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 1_000_000_000)]
    pub node_limit: u64,
    /// Seconds.
    #[arg(long, default_value_t = 600)]
    pub time_limit: u64,
    /// Disable colour-symmetry breaking.
    #[arg(long)]
    pub no_symmetry: bool,
    /// Write a feasible witness in colouring format.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CliqueArgs {
    #[arg(long)]
    pub hypergraph: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub node_limit: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum SystemsCmd {
    /// Print the full M-ary tree of height k with labels 0..M-1.
    Product {
        #[arg(long)]
        height: usize,
        #[arg(long)]
        arity: usize,
        /// Tree file to write instead of listing the leaves.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List Q(c) for a node given in dotted form (`-` for the root).
    Q {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        node: String,
    },
    /// Extract an m-ary subsystem inside a leaf subset.
    Extract {
        #[arg(long)]
        tree: PathBuf,
        /// Leaf lines of the subset X.
        #[arg(long)]
        leaves: PathBuf,
        #[arg(long, value_parser = exact)]
        eps: BigRational,
        /// Keep the largest arity found instead of the guaranteed one.
        #[arg(long)]
        best_effort: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ReducedCmd {
    /// Check (d, delta)-density over all ordered role assignments.
    CheckDense {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_parser = exact)]
        d: BigRational,
        #[arg(long, value_parser = exact)]
        delta: BigRational,
    },
    /// Search for a clique of order t.
    Clique {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        node_limit: Option<u64>,
    },
    /// Check axiom (F) for a fortress file.
    VerifyFortress {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        fortress: PathBuf,
    },
    /// Run the recursive fortress construction with r = k.
    BuildFortress {
        #[arg(long)]
        file: PathBuf,
        /// Tree file; a leaf line may end in `@<index>`, otherwise the dotted leaf names the index.
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, value_parser = exact)]
        eps: BigRational,
        #[arg(long, default_value_t = 64)]
        retries: u32,
        /// Fortress output file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Same as the top-level `constants` command.
    Constants(ConstantsArgs),
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub r: usize,
    #[arg(long, value_parser = exact)]
    pub eps: BigRational,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub m: u64,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_bits: u64,
    #[arg(long, default_value_t = 1 << 16)]
    pub max_steps: u64,
}

#[derive(Subcommand, Debug)]
pub enum ReproduceCmd {
    /// The small-clique lower-bound table.
    EqResults {
        /// Skip the K11 and K10 searches (the default).
        #[arg(long, conflicts_with = "include_slow")]
        skip_slow: bool,
        /// Run the K11 infeasibility and K10 feasibility searches.
        #[arg(long)]
        include_slow: bool,
        /// Accept an inconclusive slow search without failing.
        #[arg(long)]
        allow_unknown: bool,
        #[arg(long, default_value_t = 1_000_000_000)]
        node_limit: u64,
        /// Seconds per search.
        #[arg(long, default_value_t = 600)]
        time_limit: u64,
    },
}

fn exact(s: &str) -> Result<BigRational, String> {
    parse_rational(s).ok_or_else(|| format!("`{s}` is not a decimal or fraction"))
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: msg.into() }
    }

    fn data(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_DATA, message: msg.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Structural(_) | Error::Io(_) => EXIT_DATA,
            Error::Dimension { .. } | Error::Argument(_) | Error::Precondition(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(RunReport, i32), Failure>;

/// Parses `args` (including the program name) and runs the command,
/// writing the report to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(&cli, out)));
    match result {
        Ok(Ok((report, code))) => {
            if !report.entries().is_empty() && write!(out, "{report}").is_err() {
                return EXIT_INTERNAL;
            }
            code
        }
        Ok(Err(f)) => {
            let _ = writeln!(err, "boxlab: {}", f.message);
            f.code
        }
        Err(_) => {
            let _ = writeln!(err, "boxlab: internal error");
            EXIT_INTERNAL
        }
    }
}

struct Ctx {
    seed: u64,
    threads: usize,
    deterministic: bool,
}

impl Ctx {
    fn timing(&self, report: &mut RunReport, elapsed: Duration) {
        if !self.deterministic {
            report.push("elapsed_ms", elapsed.as_millis());
        }
    }

    fn budget(&self, node_limit: u64, time_limit: u64, symmetry: bool) -> Result<SearchBudget, Failure> {
        if node_limit == 0 || time_limit == 0 {
            return Err(Failure::usage("node and time limits must be positive"));
        }
        Ok(SearchBudget {
            node_limit: Some(node_limit),
            time_limit: Some(Duration::from_secs(time_limit)),
            symmetry_breaking: symmetry,
            threads: if self.deterministic { 1 } else { self.threads },
        })
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let threads = match cli.threads {
        Some(0) => return Err(Failure::usage("--threads must be positive")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let ctx = Ctx { seed: cli.seed, threads, deterministic: cli.deterministic };
    match &cli.command {
        Command::Palette(PaletteCmd::MinCodegree { palette }) => {
            let p = load_palette(palette)?;
            writeln!(out, "{}", p.min_codegree()).map_err(io_failure)?;
            Ok((RunReport::default(), 0))
        }
        Command::Palette(PaletteCmd::Show { palette }) => {
            write!(out, "{}", load_palette(palette)?.to_text()).map_err(io_failure)?;
            Ok((RunReport::default(), 0))
        }
        Command::Construct(a) => construct(&ctx, a),
        Command::Audit(a) => audit(&ctx, a),
        Command::Ramsey(a) => ramsey(&ctx, a),
        Command::Clique(a) => clique(&ctx, a),
        Command::Systems(s) => systems(s),
        Command::Reduced(r) => reduced(&ctx, r),
        Command::Constants(a) => constants(a),
        Command::Reproduce(ReproduceCmd::EqResults {
            skip_slow: _,
            include_slow,
            allow_unknown,
            node_limit,
            time_limit,
        }) => {
            let budget = ctx.budget(*node_limit, *time_limit, true)?;
            reproduce(&ctx, *include_slow, *allow_unknown, &budget)
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure { code: EXIT_INTERNAL, message: format!("write failed: {e}") }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { code: EXIT_INTERNAL, message: format!("{}: {e}", path.display()) })
}

fn with_path<T>(path: &Path, r: boxlab::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

/// A named palette, or a palette file when `src` names an existing path.
pub fn load_palette(src: &str) -> Result<Palette, Failure> {
    let path = Path::new(src);
    if path.is_file() {
        return with_path(path, Palette::parse(&read(path)?));
    }
    standard_palette(src).map_err(|e| Failure::usage(format!("{e} (and no such file)")))
}

fn construct(ctx: &Ctx, a: &ConstructArgs) -> CmdResult {
    if a.n < 2 {
        return Err(Failure::usage("--n must be at least 2"));
    }
    let palette = load_palette(&a.palette)?;
    let phi = random_colouring(a.n, palette.colour_count(), ctx.seed)?;
    let h = build_hypergraph(&phi, &palette)?;
    let mut r = RunReport::new("construct");
    r.push("seed", ctx.seed);
    r.push("n", a.n);
    r.push("palette", &a.palette);
    r.push("colours", palette.colour_count());
    r.push("min_codegree", palette.min_codegree());
    for (c, size) in phi.class_sizes().iter().enumerate() {
        r.push("class_size", format!("{} {size}", c + 1));
    }
    r.push("edges", h.edge_count());
    if let Some(p) = &a.out {
        write_file(p, &h.to_text())?;
        r.push("hypergraph_file", p.display());
    }
    if let Some(p) = &a.colouring_out {
        write_file(p, &phi.to_text())?;
        r.push("colouring_file", p.display());
    }
    Ok((r, 0))
}

fn audit(ctx: &Ctx, a: &AuditArgs) -> CmdResult {
    let h = with_path(&a.hypergraph, Hypergraph3::parse(&read(&a.hypergraph)?))?;
    let phi = with_path(&a.colouring, EdgeColouring::parse(&read(&a.colouring)?))?;
    let palette = load_palette(&a.palette)?;
    let mut spec = AuditSpec { colour_classes: false, random_pairs: None, products: None, eta: a.eta.clone() };
    for f in &a.families {
        match f.trim() {
            "colour" | "color" => spec.colour_classes = true,
            "random" => {
                spec.random_pairs =
                    Some(RandomPairFamilies { densities: a.densities.clone(), trials: a.trials, seed: ctx.seed })
            }
            "product" => spec.products = Some(ProductFamilies { trials: a.trials, seed: ctx.seed.wrapping_add(1) }),
            other => return Err(Failure::usage(format!("unknown family `{other}`"))),
        }
    }
    let rep = audit_density(&h, &phi, &palette, &spec)?;
    let mut r = RunReport::new("audit");
    r.push("seed", ctx.seed);
    r.push("n", h.n());
    r.push("d", rep.d);
    r.push("eta", &rep.eta);
    for f in &rep.families {
        let ratio = f.report.ratio().map_or("-".to_string(), |x| x.to_string());
        r.push(
            "family",
            format!(
                "{} e={} total={} ratio={} margin={} holds={}",
                f.label,
                f.report.e,
                f.report.total,
                ratio,
                f.margin,
                yes_no(f.holds)
            ),
        );
    }
    for s in &rep.skipped {
        r.push("skipped", s);
    }
    if let Some((m, label)) = rep.min_ratio() {
        r.push("min_ratio", m);
        r.push("min_ratio_decimal", format!("{:.4}", ratio_f64(m)));
        r.push("worst_family", label);
    }
    r.push("all_hold", yes_no(rep.all_hold()));
    Ok((r, 0))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn ratio_f64(r: Ratio) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn ramsey(ctx: &Ctx, a: &RamseyArgs) -> CmdResult {
    let palette = load_palette(&a.palette)?;
    let budget = ctx.budget(a.node_limit, a.time_limit, !a.no_symmetry)?;
    let outcome = search_palette_colouring(&palette, a.k, &budget)?;
    let mut r = RunReport::new("ramsey");
    r.push("palette", &a.palette);
    r.push("k", a.k);
    r.push("verdict", outcome.verdict.label());
    r.push("nodes", outcome.nodes_explored);
    ctx.timing(&mut r, outcome.elapsed);
    let code = match &outcome.verdict {
        ColouringVerdict::Feasible(phi) => {
            let ok = find_bad_triangle(phi, &palette).is_none();
            r.push("witness_valid", yes_no(ok));
            match &a.witness_out {
                Some(p) => {
                    write_file(p, &phi.to_text())?;
                    r.push("witness_file", p.display());
                }
                None => push_colouring(&mut r, phi),
            }
            if !ok {
                return Err(Failure { code: EXIT_INTERNAL, message: "witness failed re-validation".into() });
            }
            0
        }
        ColouringVerdict::Infeasible => {
            r.push("lower_bound", format!("pi(K{}) >= {}", a.k, palette.min_codegree()));
            EXIT_NEGATIVE
        }
        ColouringVerdict::Unknown => EXIT_UNKNOWN,
    };
    Ok((r, code))
}

fn push_colouring(r: &mut RunReport, phi: &EdgeColouring) {
    for x in 0..phi.n() {
        for y in x + 1..phi.n() {
            r.push("witness_edge", format!("{x} {y} {}", phi.colour(x, y)));
        }
    }
}

fn clique(ctx: &Ctx, a: &CliqueArgs) -> CmdResult {
    let h = with_path(&a.hypergraph, Hypergraph3::parse(&read(&a.hypergraph)?))?;
    let start = std::time::Instant::now();
    let s = find_clique(&h, a.k, a.node_limit)?;
    let mut r = RunReport::new("clique");
    r.push("n", h.n());
    r.push("k", a.k);
    r.push("verdict", s.verdict.label());
    r.push("nodes", s.nodes);
    ctx.timing(&mut r, start.elapsed());
    let code = match &s.verdict {
        Verdict::Found(w) => {
            r.push("witness", join(w));
            0
        }
        Verdict::Absent => EXIT_NEGATIVE,
        Verdict::Unknown => EXIT_UNKNOWN,
    };
    Ok((r, code))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn systems(cmd: &SystemsCmd) -> CmdResult {
    match cmd {
        SystemsCmd::Product { height, arity, out } => {
            let mut r = RunReport::new("systems product");
            let t = KMTree::product(*height, *arity)?;
            r.push("height", t.height());
            r.push("arity", t.arity());
            match out {
                Some(p) => {
                    write_file(p, &t.to_text())?;
                    r.push("tree_file", p.display());
                }
                None => {
                    for l in t.leaves() {
                        r.push("leaf", l.dotted());
                    }
                }
            }
            Ok((r, 0))
        }
        SystemsCmd::Q { tree, node } => {
            let t = with_path(tree, KMTree::parse(&read(tree)?))?;
            let c = Seq::parse_dotted(node).map_err(|e| Failure::usage(e.to_string()))?;
            let q = q_set(&t, &c)?;
            let mut r = RunReport::new("systems q");
            r.push("node", c.dotted());
            r.push("size", q.len());
            for d in &q {
                r.push("q", d.dotted());
            }
            Ok((r, 0))
        }
        SystemsCmd::Extract { tree, leaves, eps, best_effort, out } => {
            let t = with_path(tree, KMTree::parse(&read(tree)?))?;
            let x = with_path(leaves, parse_leaf_set(&read(leaves)?))?;
            let mut ex = extract_subsystem(&t, &x, eps.clone())?;
            let guaranteed = ex.m;
            if *best_effort {
                if let Some(better) = largest_subsystem(&t, &x).filter(|b| b.m > ex.m) {
                    ex = better;
                }
            }
            let mut r = RunReport::new("systems extract");
            r.push("height", t.height());
            r.push("arity", t.arity());
            r.push("subset_size", x.len());
            r.push("eps", eps);
            r.push("guaranteed_m", guaranteed);
            r.push("m", ex.m);
            match out {
                Some(p) => {
                    write_file(p, &ex.tree.to_text())?;
                    r.push("tree_file", p.display());
                }
                None => {
                    for l in ex.tree.leaves() {
                        r.push("leaf", l.dotted());
                    }
                }
            }
            Ok((r, 0))
        }
    }
}

fn load_reduced(path: &Path) -> Result<ReducedHypergraph, Failure> {
    with_path(path, ReducedHypergraph::parse(&read(path)?))
}

fn reduced(ctx: &Ctx, cmd: &ReducedCmd) -> CmdResult {
    match cmd {
        ReducedCmd::CheckDense { file, d, delta } => {
            let h = load_reduced(file)?;
            let rep = check_box_dense(&h, d, delta)?;
            let mut r = RunReport::new("reduced check-dense");
            r.push("indices", h.index_count());
            r.push("d", d);
            r.push("delta", delta);
            r.push("assignments", rep.assignments);
            if let Some(n) = &rep.note {
                r.push("note", n);
            }
            let name = |i: usize| h.indices()[i].to_string();
            for v in &rep.violations {
                let [i, j, k] = v.roles;
                r.push(
                    "violation",
                    format!("{} {} {} bad_pairs={} pairs={}", name(i), name(j), name(k), v.bad_pairs, v.pairs),
                );
            }
            r.push("verdict", if rep.passes() { "pass" } else { "fail" });
            Ok((r, if rep.passes() { 0 } else { EXIT_NEGATIVE }))
        }
        ReducedCmd::Clique { file, t, node_limit } => {
            let h = load_reduced(file)?;
            let start = std::time::Instant::now();
            let s = find_reduced_clique(&h, *t, *node_limit)?;
            let mut r = RunReport::new("reduced clique");
            r.push("t", t);
            r.push("verdict", s.verdict.label());
            r.push("nodes", s.nodes);
            ctx.timing(&mut r, start.elapsed());
            let code = match &s.verdict {
                Verdict::Found(c) => {
                    let names: Vec<String> = c.indices.iter().map(|&i| h.indices()[i].to_string()).collect();
                    r.push("indices", names.join(" "));
                    for (&(i, j), v) in &c.vertices {
                        r.push("vertex", format!("{} {} {v}", h.indices()[i], h.indices()[j]));
                    }
                    0
                }
                Verdict::Absent => EXIT_NEGATIVE,
                Verdict::Unknown => EXIT_UNKNOWN,
            };
            Ok((r, code))
        }
        ReducedCmd::VerifyFortress { file, fortress } => {
            let h = load_reduced(file)?;
            let f = with_path(fortress, Fortress::parse(&read(fortress)?))?;
            let bad = verify_fortress(&h, &f)?;
            let mut r = RunReport::new("reduced verify-fortress");
            r.push("height", f.tree().height());
            r.push("arity", f.tree().arity());
            for v in &bad {
                r.push("violation", format!("a={} b={} c={} d={}", v.a.dotted(), v.b.dotted(), v.c.dotted(), v.d.dotted()));
            }
            r.push("verdict", if bad.is_empty() { "pass" } else { "fail" });
            if bad.is_empty() && f.tree().arity() == 2 {
                let c = fortress_to_clique(&h, &f)?;
                r.push("clique_order", c.indices.len());
                r.push("clique_valid", yes_no(is_reduced_clique(&h, &c)));
            }
            Ok((r, if bad.is_empty() { 0 } else { EXIT_NEGATIVE }))
        }
        ReducedCmd::BuildFortress { file, tree, m, eps, retries, out } => {
            let h = load_reduced(file)?;
            // the leaf part of the fortress format carries the leaf -> index map
            let named = with_path(tree, Fortress::parse(&read(tree)?))?;
            let system = named.tree().clone();
            let mut leaf_index = std::collections::BTreeMap::new();
            for l in system.leaves() {
                let name = named.index_of(l).expect("every parsed leaf is named");
                let pos = h
                    .position(name)
                    .ok_or_else(|| Failure::data(format!("leaf {} names unknown index {name}", l.dotted())))?;
                leaf_index.insert(l.clone(), pos);
            }
            let k = system.height();
            if k < 2 {
                return Err(Failure::usage("the command runs with r = k, which needs a tree of height at least 2"));
            }
            let mut params = BuildParams::new(k, k, *m, eps.clone(), ctx.seed);
            params.retries = *retries;
            let mut r = RunReport::new("reduced build-fortress");
            r.push("seed", ctx.seed);
            r.push("k", k);
            r.push("r", params.r);
            r.push("m", m);
            r.push("eps", eps);
            r.push("system_arity", system.arity());
            match build_fortress(&h, &system, &leaf_index, &[], &params)? {
                BuildOutcome::Built(b) => {
                    let bad = verify_fortress(&h, &b.fortress)?;
                    r.push("outcome", "built");
                    r.push("leaves", b.system.leaves().len());
                    r.push("eta_exponent", &b.eta_exponent);
                    r.push("verified", yes_no(bad.is_empty()));
                    match out {
                        Some(p) => {
                            write_file(p, &b.fortress.to_text())?;
                            r.push("fortress_file", p.display());
                        }
                        None => {
                            for l in b.system.leaves() {
                                r.push("leaf", format!("{} @{}", l.dotted(), b.fortress.index_of(l).expect("leaf")));
                            }
                        }
                    }
                    Ok((r, 0))
                }
                BuildOutcome::Failed(f) => {
                    r.push("outcome", "failed");
                    r.push("stage", f.stage);
                    r.push("detail", &f.detail);
                    let root = f.root();
                    if !std::ptr::eq(root, &f) {
                        r.push("root_stage", root.stage);
                        r.push("root_detail", &root.detail);
                    }
                    Ok((r, EXIT_NEGATIVE))
                }
            }
        }
        ReducedCmd::Constants(a) => constants(a),
    }
}

/// Decimal when short, otherwise its size in bits.
fn big(x: &BigUint) -> String {
    if x.bits() <= 256 {
        x.to_string()
    } else {
        format!("~2^{} ({} bits)", x.bits() - 1, x.bits())
    }
}

fn constants(a: &ConstantsArgs) -> CmdResult {
    let limits = ConstantLimits { max_bits: a.max_bits, max_steps: a.max_steps };
    let t = compute_constants(a.r, &a.eps, a.k, a.m, limits)?;
    let mut r = RunReport::new("constants");
    r.push("r", t.r);
    r.push("k", t.k);
    r.push("m", t.m);
    r.push("eps", &t.eps);
    for (h, mh) in t.m_seq.iter().enumerate() {
        if let Some(mh) = mh {
            r.push("m_h", format!("{h} {}", big(mh)));
        }
    }
    for (h, e) in t.eta_seq.iter().enumerate() {
        if let Some(e) = e {
            r.push("eta_h", format!("{h} (eps/2)^{}", big(e)));
        }
    }
    match &t.outcome {
        ConstantsOutcome::Computed(c) => {
            r.push("outcome", "computed");
            r.push("big_m", big(&c.big_m));
            r.push("eta", format!("(eps/2)^{}", big(&c.eta_exponent)));
            r.push("log2_eta", format!("{:e}", c.log2_eta));
            r.push("log2_delta", format!("{:e}", c.log2_delta));
            Ok((r, 0))
        }
        ConstantsOutcome::Astronomical(why) => {
            r.push("outcome", "astronomical");
            r.push("reason", why);
            Ok((r, 0))
        }
    }
}

/// One row of the small-clique lower-bound table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundRow {
    pub k: usize,
    pub palette: &'static str,
    pub expected: Ratio,
    pub slow: bool,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Certified { bound: Ratio, nodes: u64 },
    Feasible { nodes: u64 },
    Unknown,
    Skipped,
}

/// Certifies `π(K_k) ≥ d` for the rows of the table by palette searches;
/// the slow rows only when `include_slow`.
pub fn lower_bound_table(include_slow: bool, budget: &SearchBudget) -> boxlab::Result<Vec<BoundRow>> {
    let rows = [
        (5, "cyclic3", Ratio::new(1, 3), false),
        (6, "two_colour_nonmono", Ratio::new(1, 2), false),
        (11, "exactly_two_of_three", Ratio::new(2, 3), true),
    ];
    let mut out = Vec::new();
    for (k, palette, expected, slow) in rows {
        let status = if slow && !include_slow {
            RowStatus::Skipped
        } else {
            let lb = lower_bound_report(&standard_palette(palette)?, k, budget)?;
            match (&lb.outcome.verdict, lb.bound) {
                (ColouringVerdict::Infeasible, Some(bound)) => {
                    RowStatus::Certified { bound, nodes: lb.outcome.nodes_explored }
                }
                (ColouringVerdict::Feasible(_), _) => RowStatus::Feasible { nodes: lb.outcome.nodes_explored },
                _ => RowStatus::Unknown,
            }
        };
        out.push(BoundRow { k, palette, expected, slow, status });
    }
    Ok(out)
}

fn reproduce(ctx: &Ctx, include_slow: bool, allow_unknown: bool, budget: &SearchBudget) -> CmdResult {
    let start = std::time::Instant::now();
    let rows = lower_bound_table(include_slow, budget)?;
    let mut r = RunReport::new("reproduce eq-results");
    r.push("slow", if include_slow { "included" } else { "skipped" });
    let (mut mismatch, mut unknown) = (false, false);
    for row in &rows {
        let line = match &row.status {
            RowStatus::Certified { bound, nodes } => {
                mismatch |= *bound != row.expected;
                format!("K{} >= {bound} palette={} nodes={nodes}", row.k, row.palette)
            }
            RowStatus::Feasible { nodes } => {
                mismatch = true;
                format!("K{} no bound: {} colours K{} nodes={nodes}", row.k, row.palette, row.k)
            }
            RowStatus::Unknown => {
                unknown = true;
                format!("K{} unknown palette={}", row.k, row.palette)
            }
            RowStatus::Skipped => format!("K{} skipped (slow) expected >= {}", row.k, row.expected),
        };
        r.push("row", line);
    }
    if include_slow {
        // the largest clique order that still admits an exactly-two-colour colouring
        let pal = standard_palette("exactly_two_of_three")?;
        let s = search_palette_colouring(&pal, 10, budget)?;
        let line = match &s.verdict {
            ColouringVerdict::Feasible(phi) => {
                let ok = find_bad_triangle(phi, &pal).is_none();
                mismatch |= !ok;
                format!("K10 exactly_two_of_three feasible witness_valid={} nodes={}", yes_no(ok), s.nodes_explored)
            }
            ColouringVerdict::Infeasible => {
                mismatch = true;
                format!("K10 exactly_two_of_three infeasible nodes={}", s.nodes_explored)
            }
            ColouringVerdict::Unknown => {
                unknown = true;
                "K10 exactly_two_of_three unknown".to_string()
            }
        };
        r.push("check", line);
    }
    ctx.timing(&mut r, start.elapsed());
    let code = if mismatch {
        EXIT_NEGATIVE
    } else if unknown && !allow_unknown {
        EXIT_UNKNOWN
    } else {
        0
    };
    r.push("status", if code == 0 { "ok" } else if mismatch { "mismatch" } else { "inconclusive" });
    Ok((r, code))
}
