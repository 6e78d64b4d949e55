//! Command-line driver: `build`, `verify`, `export` and `lemmas`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 internal or I/O error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::construction::{gadgets_for, step, base_case, ConstructionError, ConstructionState};
use crate::presentation::compiled::Compiled;
use crate::presentation::{Expansion, Presentation};
use crate::tree_core::bare::{bare_path_bound_after_deletion, max_bare_path};
use crate::tree_core::binary::{binary_tree, max_binary_height};
use crate::tree_core::export::to_dot;
use crate::tree_core::tree::{ColoredTree, Colour, VertexId};
use crate::verify::{check_all, CheckReport, Params};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "hypotree", version, about = "Build and check hypomorphic non-isomorphic trees of maximum degree 3")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write state_0.json .. state_<steps>.json
    Build(BuildArgs),
    /// Check saved states and write reports
    Verify(VerifyArgs),
    /// Render a tree or gadget of a saved state
    Export(ExportArgs),
    /// Randomized bare-path deletion bound and the binary tree size law
    Lemmas(LemmaArgs),
}

#[derive(Args, Debug, Clone)]
pub struct BuildArgs {
    #[arg(long, env = "HYPOTREE_STEPS", default_value_t = 2)]
    pub steps: u32,
    #[arg(long, env = "HYPOTREE_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Verify states 0..=steps; default: every consecutive state file present
    #[arg(long, env = "HYPOTREE_STEPS")]
    pub steps: Option<u32>,
    /// Expansion depth; default 3 k_n
    #[arg(long, env = "HYPOTREE_DEPTH", value_parser = clap::value_parser!(u64).range(1..))]
    pub depth: Option<u64>,
    #[arg(long, env = "HYPOTREE_EXT_LEN", default_value_t = 6)]
    pub ext_len: usize,
    #[arg(long, env = "HYPOTREE_BUDGET", default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    #[arg(long, env = "HYPOTREE_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dot,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct ExportArgs {
    /// State index to read from the output directory
    #[arg(long, env = "HYPOTREE_STATE", default_value_t = 0)]
    pub state: u32,
    /// T, S, Ttilde, Stilde, or a rule colour such as R1
    #[arg(long, env = "HYPOTREE_WHAT", default_value = "T")]
    pub what: String,
    #[arg(long, env = "HYPOTREE_DEPTH", default_value_t = 3)]
    pub depth: usize,
    #[arg(long, env = "HYPOTREE_FORMAT", value_enum, value_delimiter = ',', default_values_t = [Format::Dot])]
    pub format: Vec<Format>,
    #[arg(long, env = "HYPOTREE_OUT", default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct LemmaArgs {
    #[arg(long, env = "HYPOTREE_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub trees: usize,
    #[arg(long, default_value_t = 40)]
    pub max_vertices: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("step {step}: {source}")]
    Step { step: u32, source: ConstructionError },
    #[error("{path}: {source}")]
    Load { path: PathBuf, source: ConstructionError },
    #[error("no state files in {0}")]
    NoStates(PathBuf),
    #[error("unknown export target {0:?}; expected T, S, Ttilde, Stilde or a rule colour")]
    UnknownTarget(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownTarget(_) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        }
    }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io(dir))?;
    }
    fs::write(path, contents).map_err(io(path))
}

pub fn state_path(dir: &Path, n: u32) -> PathBuf {
    dir.join(format!("state_{n}.json"))
}

pub fn report_dir(dir: &Path, n: u32) -> PathBuf {
    dir.join("reports").join(format!("state_{n}"))
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match &cli.command {
        Command::Build(a) => cmd_build(a).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }),
        Command::Verify(a) => cmd_verify(a).map(|v| {
            print!("{}", v.summary);
            if v.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }),
        Command::Export(a) => cmd_export(a).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }),
        Command::Lemmas(a) => {
            let r = lemma_suite(a.seed, a.trees, a.max_vertices);
            print!("{}", r.summary());
            Ok(if r.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn cmd_build(a: &BuildArgs) -> Result<Vec<PathBuf>, CliError> {
    let mut st = base_case();
    let mut paths = Vec::new();
    for n in 0..=a.steps {
        if n > 0 {
            st = step(&st).map_err(|source| CliError::Step { step: n, source })?;
        }
        let p = state_path(&a.out, n);
        write(&p, &st.to_json())?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn load_state(dir: &Path, n: u32) -> Result<ConstructionState, CliError> {
    let p = state_path(dir, n);
    let s = fs::read_to_string(&p).map_err(io(&p))?;
    ConstructionState::from_json(&s).map_err(|source| CliError::Load { path: p, source })
}

pub struct VerifyOutcome {
    pub reports: Vec<CheckReport>,
    pub passed: bool,
    pub summary: String,
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<VerifyOutcome, CliError> {
    let last = match a.steps {
        Some(s) => s,
        None => {
            let mut n = 0;
            while state_path(&a.out, n + 1).exists() {
                n += 1;
            }
            if !state_path(&a.out, 0).exists() {
                return Err(CliError::NoStates(a.out.clone()));
            }
            n
        }
    };
    let params = Params { depth: a.depth.map(|d| d as usize), ext_len: a.ext_len, budget: a.budget };
    let mut reports = Vec::new();
    let mut prev: Option<ConstructionState> = None;
    for n in 0..=last {
        let st = load_state(&a.out, n)?;
        let r = check_all(&st, prev.as_ref(), &params).map_err(|e| CliError::Other(format!("state {n}: {e}")))?;
        let dir = report_dir(&a.out, n);
        write(&dir.join("report.json"), &r.to_json())?;
        write(&dir.join("report.md"), &r.to_markdown())?;
        write(&dir.join("timings.json"), &r.timings_json())?;
        reports.push(r);
        prev = Some(st);
    }
    let summary = summary_markdown(&reports);
    write(&a.out.join("reports").join("summary.md"), &summary)?;
    let passed = reports.iter().all(CheckReport::passed);
    Ok(VerifyOutcome { reports, passed, summary })
}

pub fn summary_markdown(reports: &[CheckReport]) -> String {
    let mut s = String::from("# Summary\n\n| state | k | b | proved | verified to bound | inconclusive | failed |\n|---|---|---|---|---|---|---|\n");
    for r in reports {
        let mut counts: BTreeMap<crate::verify::Verdict, usize> = BTreeMap::new();
        for c in &r.checks {
            *counts.entry(c.verdict).or_default() += 1;
        }
        let get = |v| counts.get(&v).copied().unwrap_or(0);
        use crate::verify::Verdict::*;
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.n,
            r.k,
            r.b,
            get(Proved),
            get(VerifiedToBound),
            get(Inconclusive),
            get(Failed)
        );
    }
    let failed: Vec<String> =
        reports.iter().flat_map(|r| r.failed_ids().into_iter().map(move |id| format!("state {}: {id}", r.n))).collect();
    if failed.is_empty() {
        s.push_str("\nAll checks passed.\n");
    } else {
        let _ = writeln!(s, "\nFailed checks: {}", failed.join(", "));
    }
    s
}

/// A finite tree with a provenance label per vertex.
pub struct Rendered {
    pub name: String,
    pub tree: ColoredTree,
    pub labels: BTreeMap<VertexId, String>,
}

fn expansion_labels(p: &Presentation, e: &Expansion) -> Result<BTreeMap<VertexId, String>, CliError> {
    let c = Compiled::new(p).map_err(|e| CliError::Other(e.to_string()))?;
    let mut nav = c.navigator();
    let mut out = BTreeMap::new();
    for (i, a) in e.addresses.iter().enumerate() {
        let l = nav.locate(a).map_err(|e| CliError::Other(e.to_string()))?;
        let piece = &c.names[nav.piece_of(l)];
        let mut label = a.to_string();
        if let Some(n) = p.pieces[piece].names.get(&nav.vertex_id(l)) {
            label.push('\n');
            label.push_str(n);
        }
        out.insert(VertexId(i as u64), label);
    }
    Ok(out)
}

fn parse_colour(s: &str) -> Option<Colour> {
    let (kind, num) = s.split_at(1);
    let n: u32 = num.parse().ok()?;
    match kind {
        "R" => Some(Colour::red(n)),
        "B" => Some(Colour::blue(n)),
        _ => None,
    }
}

/// The tree named by `what`: an expansion of `T`, `S` or a rule piece to `depth`, or a gadget.
pub fn render(st: &ConstructionState, what: &str, depth: usize) -> Result<Rendered, CliError> {
    let expand = |p: &Presentation, name: String| -> Result<Rendered, CliError> {
        let c = Compiled::new(p).map_err(|e| CliError::Other(e.to_string()))?;
        let e = c.expand(depth);
        let labels = expansion_labels(p, &e)?;
        Ok(Rendered { name, tree: e.tree, labels })
    };
    match what {
        "T" => expand(&st.t, format!("T{}_depth{depth}", st.n)),
        "S" => expand(&st.s, format!("S{}_depth{depth}", st.n)),
        "Ttilde" | "Stilde" => {
            let (_, _, g) = gadgets_for(st).map_err(|e| CliError::Other(e.to_string()))?;
            let (tree, labels) = if what == "Ttilde" { (g.t_tilde, g.names_t) } else { (g.s_tilde, g.names_s) };
            Ok(Rendered { name: format!("{what}{}", st.n), tree, labels })
        }
        other => {
            let col = parse_colour(other).ok_or_else(|| CliError::UnknownTarget(other.to_string()))?;
            let name = st.t.rules.get(&col).ok_or_else(|| CliError::UnknownTarget(other.to_string()))?;
            let mut p = st.t.clone();
            p.root = name.clone();
            expand(&p, format!("rule_{other}_state{}_depth{depth}", st.n))
        }
    }
}

pub fn cmd_export(a: &ExportArgs) -> Result<Vec<PathBuf>, CliError> {
    let st = load_state(&a.out, a.state)?;
    let r = render(&st, &a.what, a.depth)?;
    let mut formats = a.format.clone();
    formats.dedup();
    let mut paths = Vec::new();
    for f in formats {
        let (ext, body) = match f {
            Format::Dot => ("dot", to_dot(&r.tree, &r.name, &r.labels)),
            Format::Json => {
                let doc = serde_json::json!({ "name": r.name, "tree": r.tree.to_doc(), "labels": r.labels.iter().map(|(k, v)| (k.0.to_string(), v.clone())).collect::<BTreeMap<_, _>>() });
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Other(e.to_string()))?;
                s.push('\n');
                ("json", s)
            }
        };
        let p = a.out.join("export").join(format!("{}.{ext}", r.name));
        write(&p, &body)?;
        paths.push(p);
    }
    Ok(paths)
}

/// A uniformly random recursive tree: vertex `i` attaches to a random earlier vertex.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> ColoredTree {
    let edges: Vec<(u64, u64)> = (1..n as u64).map(|i| (rng.gen_range(0..i), i)).collect();
    ColoredTree::from_edges(n, &edges, None).expect("recursive tree")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub seed: u64,
    pub trees: usize,
    pub edges: usize,
    /// (tree edges, deleted edge, bound k, longest bare path after deletion)
    pub deletion_failures: Vec<(Vec<(u64, u64)>, (u64, u64), usize, usize)>,
    /// (height, vertex count) where the count is not 2^height - 1
    pub binary_failures: Vec<(u32, usize)>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.deletion_failures.is_empty() && self.binary_failures.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "seed {}: {} trees, {} edge deletions, {} bare-path bound failures; binary size law for heights 1..=12: {} failures\n",
            self.seed,
            self.trees,
            self.edges,
            self.deletion_failures.len(),
            self.binary_failures.len()
        )
    }
}

/// Deleting any edge of a tree whose bare paths are at most `k` leaves bare paths at most `2k`;
/// binary trees of height `h` have `2^h - 1` vertices.
pub fn lemma_suite(seed: u64, trees: usize, max_vertices: usize) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport { seed, trees, edges: 0, deletion_failures: Vec::new(), binary_failures: Vec::new() };
    for _ in 0..trees {
        let n = rng.gen_range(2..=max_vertices.max(2));
        let t = random_tree(&mut rng, n);
        let k = max_bare_path(&t);
        for (a, b) in t.edges() {
            report.edges += 1;
            let after = bare_path_bound_after_deletion(&t, a, b).expect("edge of t");
            if after > 2 * k {
                let edges = t.edges().iter().map(|(x, y)| (x.0, y.0)).collect();
                report.deletion_failures.push((edges, (a.0, b.0), k, after));
            }
        }
    }
    for h in 1..=12u32 {
        let t = binary_tree(h, 0);
        let root = t.root_idx().expect("rooted");
        let depth = t.distances(root);
        let shaped = (0..t.len()).all(|i| match t.adj(i).len() {
            1 => depth[i] + 1 == h as usize,
            2 => i == root || h == 1,
            3 => i != root,
            _ => h == 1,
        }) && (h == 1 || t.adj(root).len() == 2);
        if !shaped || max_binary_height(&t) != h as usize || t.len() != (1usize << h) - 1 {
            report.binary_failures.push((h, t.len()));
        }
    }
    report
}
