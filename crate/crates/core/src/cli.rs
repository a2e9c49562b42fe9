//! The `quantizer` command-line front end.
//!
//! Exit codes: 0 on success, 2 on a usage error (reported before any work is
//! done), 1 on a computation error or a failed check.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::engine::{
    branch_decomposition, count_optimal_sets, enumerate_optimal_sets, generate, optimal_set, quantization_error,
    transition_graph, validate_structure, GenerationState, QuantizerSet, QuantizerSetJson,
};
use crate::error::{Error, Result};
use crate::oracle::{
    exhaustive_min, kmeans_1d_exact, lloyd, lloyd_restarts, mc_distortion_estimate, sample, SampleBatch,
};
use crate::rational::{ratio, to_decimal_string, to_f64, to_fraction_string, Rational};

const WORD_HELP: &str = "Words are written with '.' between letters: 2.1.1 is the word (2, 1, 1). \
a(w) is the node of the cylinder J_w, a(w, inf) the node of the union of the later siblings of J_w.";

#[derive(Debug, Parser)]
#[command(name = "quantizer", version, about = "Exact optimal quantizers of a self-similar measure", after_help = WORD_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
    Text,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Dot => "dot",
            Format::Text => "text",
        }
    }
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Decimal places for floating renderings.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(0..=100))]
    digits: u64,
}

#[derive(Debug, Args)]
struct Sampling {
    #[arg(long, default_value_t = 20240317)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..=10_000))]
    depth: u64,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=4096))]
    threads: Option<u64>,
}

#[derive(Debug, Args)]
struct Range {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    from: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    to: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// An optimal set of n-means and V_n.
    Optimal {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
    /// V_n for a range of n.
    Table {
        #[command(flatten)]
        range: Range,
        #[command(flatten)]
        out: Output,
    },
    /// Every optimal set of n-means.
    Enumerate {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Largest number of sets allowed in any layer.
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Number of optimal sets of n-means.
    Count {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Transition graph between the optimal sets of consecutive sizes.
    Tree {
        #[command(flatten)]
        range: Range,
        /// Largest number of sets allowed in any layer and in the graph.
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        cap: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Draw samples from the measure and summarize them.
    OracleSample {
        #[command(flatten)]
        sampling: Sampling,
        /// Write the batch here in binary form.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Lloyd iteration and exact 1-D k-means on a sample, against the exact optimum.
    OracleLloyd {
        /// Number of centers.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10_000))]
        n: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        max_iters: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Comma-separated, strictly increasing starting centers. Without it, Lloyd
        /// runs from `--restarts` k-means++ seeds drawn with `--seed` and keeps the best.
        #[arg(long, value_delimiter = ',', conflicts_with = "restarts")]
        init: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..=10_000))]
        restarts: u64,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo distortion of a set's centroids against its exact error.
    OracleCheck {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), required_unless_present = "input", conflicts_with = "input")]
        n: Option<u64>,
        /// Quantizer set in JSON form, as written by `optimal --format json`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        out: Output,
    },
    /// Golden values, structure, counting and exhaustive-search checks.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Optimal { .. } => "optimal",
            Command::Table { .. } => "table",
            Command::Enumerate { .. } => "enumerate",
            Command::Count { .. } => "count",
            Command::Tree { .. } => "tree",
            Command::OracleSample { .. } => "oracle-sample",
            Command::OracleLloyd { .. } => "oracle-lloyd",
            Command::OracleCheck { .. } => "oracle-check",
            Command::Verify { .. } => "verify",
        }
    }

    fn output(&self) -> &Output {
        match self {
            Command::Optimal { out, .. }
            | Command::Table { out, .. }
            | Command::Enumerate { out, .. }
            | Command::Count { out, .. }
            | Command::Tree { out, .. }
            | Command::OracleSample { out, .. }
            | Command::OracleLloyd { out, .. }
            | Command::OracleCheck { out, .. }
            | Command::Verify { out, .. } => out,
        }
    }

    fn formats(&self) -> &'static [Format] {
        use Format::*;
        match self {
            Command::Optimal { .. } | Command::Table { .. } | Command::Enumerate { .. } | Command::Count { .. } => {
                &[Text, Json, Csv]
            }
            Command::Tree { .. } => &[Text, Json, Dot],
            _ => &[Text, Json],
        }
    }

    /// Flag combinations clap cannot express.
    fn check(&self) -> std::result::Result<(), String> {
        let format = self.output().format;
        if !self.formats().contains(&format) {
            return Err(format!(
                "--format {} is not available for {}",
                format.name(),
                self.name()
            ));
        }
        if let Command::Table { range, .. } | Command::Tree { range, .. } = self {
            if range.from > range.to {
                return Err(format!("--from {} is greater than --to {}", range.from, range.to));
            }
        }
        if let Command::OracleLloyd {
            n, sampling, tol, init, ..
        } = self
        {
            if let Some(init) = init {
                if init.len() as u64 != *n {
                    return Err(format!("--init has {} centers, --n is {n}", init.len()));
                }
                if init
                    .windows(2)
                    .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
                    || init.iter().any(|x| !x.is_finite())
                {
                    return Err("--init must be strictly increasing".into());
                }
            }
            if *n > sampling.samples {
                return Err(format!("--n {n} exceeds --samples {}", sampling.samples));
            }
            if tol.is_nan() || *tol < 0.0 {
                return Err("--tol must be nonnegative".into());
            }
        }
        Ok(())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return 0;
            }
            let rendered = e.render().to_string();
            let mut lines = rendered.lines().filter(|l| !l.trim().is_empty());
            let first = lines.next().unwrap_or("error: invalid arguments");
            let usage = lines.find(|l| l.starts_with("Usage:"));
            let _ = writeln!(err, "{first}");
            if let Some(usage) = usage {
                let _ = writeln!(err, "{usage}");
            }
            return 2;
        }
    };
    if let Err(msg) = cli.command.check() {
        let _ = writeln!(err, "error: {msg}");
        let _ = writeln!(err, "Usage: quantizer {} --help", cli.command.name());
        return 2;
    }
    match dispatch(&cli.command) {
        Ok(Outcome { text, ok }) => {
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return 1;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

struct Outcome {
    text: String,
    ok: bool,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Optimal { n, out } => optimal(*n as usize, out).map(Into::into),
        Command::Table { range, out } => table(range.from as usize, range.to as usize, out).map(Into::into),
        Command::Enumerate { n, cap, out } => enumerate(*n as usize, *cap as usize, out).map(Into::into),
        Command::Count { n, out } => count(*n as usize, out).map(Into::into),
        Command::Tree { range, cap, out } => {
            tree(range.from as usize, range.to as usize, *cap as usize, out).map(Into::into)
        }
        Command::OracleSample { sampling, output, out } => {
            with_threads(sampling, || oracle_sample(sampling, output.as_ref(), out)).map(Into::into)
        }
        Command::OracleLloyd {
            n,
            max_iters,
            tol,
            init,
            restarts,
            sampling,
            out,
        } => {
            let start = match init {
                Some(init) => Start::Init(init),
                None => Start::Restarts(*restarts as usize),
            };
            with_threads(sampling, || {
                oracle_lloyd(*n as usize, start, *max_iters as usize, *tol, sampling, out)
            })
            .map(Into::into)
        }
        Command::OracleCheck {
            n,
            input,
            sampling,
            out,
        } => with_threads(sampling, || oracle_check(*n, input.as_ref(), sampling, out)),
        Command::Verify { n, out } => Ok(verify(*n as usize, out)),
    }
}

fn with_threads<T: Send>(sampling: &Sampling, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match sampling.threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .install(f),
    }
}

fn decimal(r: &Rational, out: &Output) -> String {
    to_decimal_string(r, out.digits as usize)
}

fn float(x: f64, out: &Output) -> String {
    format!("{:.*}", out.digits as usize, x)
}

fn to_json(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn optimal(n: usize, out: &Output) -> Result<String> {
    let q = optimal_set(n)?;
    let mut s = String::new();
    match out.format {
        Format::Json => {
            s = QuantizerSetJson::from(&q).to_json_string();
            s.push('\n');
        }
        Format::Csv => {
            s.push_str("word,kind,centroid,centroid_float,error\n");
            for node in q.nodes() {
                let kind = serde_json::to_value(node.region.kind).expect("serializable");
                let _ = writeln!(
                    s,
                    "{},{},\"{}\",{},\"{}\"",
                    node.region.word,
                    kind.as_str().unwrap_or_default(),
                    to_fraction_string(&node.centroid),
                    decimal(&node.centroid, out),
                    to_fraction_string(&node.error),
                );
            }
        }
        _ => {
            for c in q.centroids() {
                let _ = writeln!(s, "{}", to_fraction_string(&c));
            }
            let _ = writeln!(s, "V_{n} = {}", to_fraction_string(q.v()));
            let _ = writeln!(s, "V_{n} ~ {}", decimal(q.v(), out));
        }
    }
    Ok(s)
}

fn table(from: usize, to: usize, out: &Output) -> Result<String> {
    let mut state = GenerationState::new();
    let mut rows = Vec::new();
    for n in 1..=to {
        while state.n() < n {
            state.split()?;
        }
        if n >= from {
            rows.push((n, state.v().clone()));
        }
    }
    let mut s = String::new();
    match out.format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(n, v)| json!({ "n": n, "V": to_fraction_string(v), "V_float": to_f64(v) }))
                .collect();
            s = to_json(&json!(rows));
        }
        Format::Csv => {
            s.push_str("n,V,V_float\n");
            for (n, v) in &rows {
                let _ = writeln!(s, "{n},\"{}\",{}", to_fraction_string(v), decimal(v, out));
            }
        }
        _ => {
            for (n, v) in &rows {
                let _ = writeln!(s, "V_{n} = {}  ~ {}", to_fraction_string(v), decimal(v, out));
            }
        }
    }
    Ok(s)
}

fn region_list(q: &QuantizerSet) -> String {
    q.nodes()
        .iter()
        .map(|node| node.region.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn enumerate(n: usize, cap: usize, out: &Output) -> Result<String> {
    let sets = enumerate_optimal_sets(n, cap)?;
    let mut s = String::new();
    match out.format {
        Format::Json => {
            let sets: Vec<_> = sets.iter().map(QuantizerSetJson::from).collect();
            s = to_json(&serde_json::to_value(sets).expect("serializable"));
        }
        Format::Csv => {
            s.push_str("set,word,kind,centroid,centroid_float,error\n");
            for (i, q) in sets.iter().enumerate() {
                for node in q.nodes() {
                    let kind = serde_json::to_value(node.region.kind).expect("serializable");
                    let _ = writeln!(
                        s,
                        "{},{},{},\"{}\",{},\"{}\"",
                        i + 1,
                        node.region.word,
                        kind.as_str().unwrap_or_default(),
                        to_fraction_string(&node.centroid),
                        decimal(&node.centroid, out),
                        to_fraction_string(&node.error),
                    );
                }
            }
        }
        _ => {
            let _ = writeln!(
                s,
                "C_{n}: {} set(s), V_{n} = {}",
                sets.len(),
                to_fraction_string(sets[0].v())
            );
            for (i, q) in sets.iter().enumerate() {
                let _ = writeln!(s, "a_{{{n},{}}} = {{{}}}", i + 1, region_list(q));
            }
        }
    }
    Ok(s)
}

fn count(n: usize, out: &Output) -> Result<String> {
    let c = count_optimal_sets(n)?;
    Ok(match out.format {
        Format::Json => to_json(&json!({ "n": n, "count": c.to_string() })),
        Format::Csv => format!("n,count\n{n},{c}\n"),
        _ => format!("{c}\n"),
    })
}

fn tree(from: usize, to: usize, cap: usize, out: &Output) -> Result<String> {
    let g = transition_graph(from, to, cap)?;
    Ok(match out.format {
        Format::Json => to_json(&g.to_json()),
        Format::Dot => g.to_dot(),
        _ => {
            let mut s = String::new();
            for (i, layer) in g.layers.iter().enumerate() {
                let n = from + i;
                let _ = writeln!(
                    s,
                    "C_{n}: {} set(s), V_{n} = {}",
                    layer.len(),
                    to_fraction_string(layer[0].v())
                );
                for (index, q) in layer.iter().enumerate() {
                    let _ = writeln!(s, "  a_{{{n},{}}} = {{{}}}", index + 1, region_list(q));
                }
            }
            for (a, b) in &g.edges {
                let _ = writeln!(s, "{} -> {}", a.label(), b.label());
            }
            s
        }
    })
}

fn draw(sampling: &Sampling) -> Result<SampleBatch> {
    sample(sampling.samples as usize, sampling.depth as usize, sampling.seed)
}

fn oracle_sample(sampling: &Sampling, output: Option<&PathBuf>, out: &Output) -> Result<String> {
    let batch = draw(sampling)?;
    if let Some(path) = output {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", path.display())))?;
        batch
            .write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    }
    let (mean, variance) = (batch.mean(), batch.variance());
    Ok(match out.format {
        Format::Json => to_json(&json!({
            "count": batch.count(),
            "seed": batch.seed,
            "depth": batch.depth,
            "mean": mean,
            "variance": variance,
            "output": output.map(|p| p.display().to_string()),
        })),
        _ => {
            let mut s = format!(
                "samples = {}, seed = {}, depth = {}\n",
                batch.count(),
                batch.seed,
                batch.depth
            );
            let _ = writeln!(s, "mean = {}", float(mean, out));
            let _ = writeln!(s, "variance = {}", float(variance, out));
            if let Some(path) = output {
                let _ = writeln!(s, "written to {}", path.display());
            }
            s
        }
    })
}

enum Start<'a> {
    Init(&'a [f64]),
    Restarts(usize),
}

fn oracle_lloyd(
    k: usize,
    start: Start<'_>,
    max_iters: usize,
    tol: f64,
    sampling: &Sampling,
    out: &Output,
) -> Result<String> {
    let batch = draw(sampling)?;
    let local = match start {
        Start::Init(init) => lloyd(&batch, init, max_iters, tol)?,
        Start::Restarts(r) => lloyd_restarts(&batch, k, r, sampling.seed, max_iters, tol)?,
    };
    let global = kmeans_1d_exact(&batch, k)?;
    let q = optimal_set(k)?;
    let exact = q.centroids();
    let max_dev = |centers: &[f64]| {
        centers
            .iter()
            .zip(&exact)
            .map(|(c, e)| (c - to_f64(e)).abs())
            .fold(0.0, f64::max)
    };
    Ok(match out.format {
        Format::Json => to_json(&json!({
            "k": k,
            "samples": batch.count(),
            "seed": batch.seed,
            "depth": batch.depth,
            "exact": exact.iter().map(to_fraction_string).collect::<Vec<_>>(),
            "V": to_fraction_string(q.v()),
            "lloyd": {
                "centers": local.centers,
                "distortion": local.distortion,
                "iterations": local.iterations,
                "max_deviation": max_dev(&local.centers),
            },
            "kmeans": {
                "centers": global.centers,
                "distortion": global.distortion,
                "max_deviation": max_dev(&global.centers),
            },
        })),
        _ => {
            let mut s = format!(
                "k = {k}, samples = {}, seed = {}, depth = {}\n",
                batch.count(),
                batch.seed,
                batch.depth
            );
            s.push_str("exact\tlloyd\tkmeans\n");
            for (i, e) in exact.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{}\t{}\t{}",
                    to_fraction_string(e),
                    float(local.centers[i], out),
                    float(global.centers[i], out)
                );
            }
            let _ = writeln!(s, "V_{k} = {} ~ {}", to_fraction_string(q.v()), decimal(q.v(), out));
            let _ = writeln!(
                s,
                "lloyd: distortion = {}, iterations = {}, max deviation = {}",
                float(local.distortion, out),
                local.iterations,
                float(max_dev(&local.centers), out)
            );
            let _ = writeln!(
                s,
                "kmeans: distortion = {}, max deviation = {}",
                float(global.distortion, out),
                float(max_dev(&global.centers), out)
            );
            s
        }
    })
}

/// Passes when the estimate is within 4 standard errors of the exact error.
fn oracle_check(n: Option<u64>, input: Option<&PathBuf>, sampling: &Sampling, out: &Output) -> Result<Outcome> {
    let q = match (n, input) {
        (_, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
            QuantizerSetJson::from_json_str(&text)?.to_set()?
        }
        (Some(n), None) => optimal_set(n as usize)?,
        (None, None) => unreachable!("clap requires --n or --input"),
    };
    let batch = draw(sampling)?;
    let centers: Vec<f64> = q.centroids().iter().map(to_f64).collect();
    let est = mc_distortion_estimate(&batch, &centers)?;
    let exact = to_f64(q.v());
    let z = if est.std_error > 0.0 {
        (est.mean - exact) / est.std_error
    } else {
        f64::INFINITY
    };
    let ok = z.abs() < 4.0;
    let verdict = if ok { "PASS" } else { "FAIL" };
    let text = match out.format {
        Format::Json => to_json(&json!({
            "n": q.n(),
            "V": to_fraction_string(q.v()),
            "V_float": exact,
            "estimate": est.mean,
            "std_error": est.std_error,
            "z": z,
            "pass": ok,
        })),
        _ => {
            let mut s = format!("n = {}, samples = {}, seed = {}\n", q.n(), batch.count(), batch.seed);
            let _ = writeln!(
                s,
                "V_{} = {} ~ {}",
                q.n(),
                to_fraction_string(q.v()),
                decimal(q.v(), out)
            );
            let _ = writeln!(
                s,
                "estimate = {} +/- {}",
                float(est.mean, out),
                float(est.std_error, out)
            );
            let _ = writeln!(s, "z = {:.3} {verdict}", z);
            s
        }
    };
    Ok(Outcome { text, ok })
}

struct Check {
    name: String,
    ok: bool,
    detail: Option<String>,
}

fn check(name: String, result: Result<Option<String>>) -> Check {
    match result {
        Ok(None) => Check {
            name,
            ok: true,
            detail: None,
        },
        Ok(Some(detail)) => Check {
            name,
            ok: false,
            detail: Some(detail),
        },
        Err(e) => Check {
            name,
            ok: false,
            detail: Some(e.to_string()),
        },
    }
}

const GOLDEN_V: [(usize, i64, i64); 8] = [
    (1, 288, 3577),
    (2, 69, 3577),
    (3, 57, 14308),
    (6, 1383, 1831424),
    (15, 27, 598016),
    (16, 4635, 117211136),
    (17, 1989, 58605568),
    (18, 3321, 117211136),
];

const GOLDEN_POINTS: [&[(i64, i64)]; 5] = [
    &[(4, 7)],
    &[(1, 7), (5, 7)],
    &[(1, 7), (4, 7), (6, 7)],
    &[(1, 7), (4, 7), (11, 14), (13, 14)],
    &[(1, 28), (5, 28), (4, 7), (11, 14), (13, 14)],
];

const GOLDEN_CARD: [(usize, u32); 7] = [(15, 1), (16, 3), (17, 3), (18, 1), (19, 3), (20, 3), (21, 1)];

fn verify(n_max: usize, out: &Output) -> Outcome {
    let mut checks = Vec::new();
    for (n, num, den) in GOLDEN_V {
        let expected = ratio(num, den);
        checks.push(check(
            format!("V_{n} = {num}/{den}"),
            quantization_error(n).map(|v| (v != expected).then(|| format!("got {}", to_fraction_string(&v)))),
        ));
    }
    for (i, points) in GOLDEN_POINTS.iter().enumerate() {
        let n = i + 1;
        let expected: Vec<Rational> = points.iter().map(|&(a, b)| ratio(a, b)).collect();
        let shown = expected.iter().map(to_fraction_string).collect::<Vec<_>>().join(", ");
        checks.push(check(
            format!("alpha_{n} = {{{shown}}}"),
            optimal_set(n).map(|q| {
                let got = q.centroids();
                (got != expected).then(|| got.iter().map(to_fraction_string).collect::<Vec<_>>().join(", "))
            }),
        ));
    }
    for (n, card) in GOLDEN_CARD {
        checks.push(check(
            format!("card C_{n} = {card}"),
            count_optimal_sets(n).map(|c| (c != card.into()).then(|| format!("got {c}"))),
        ));
    }

    let structure = (|| {
        let mut state = generate(1)?;
        for n in 1..=n_max {
            while state.n() < n {
                state.split()?;
            }
            let report = validate_structure(&state.to_set());
            if !report.passed() {
                return Ok(Some(format!("n = {n}: {report}")));
            }
        }
        Ok(None)
    })();
    checks.push(check(format!("structure n = 1..{n_max}"), structure));

    let decomposition = (|| {
        for n in 2..=n_max.min(100) {
            branch_decomposition(&optimal_set(n)?)?;
        }
        Ok(None)
    })();
    checks.push(check(
        format!("branch decomposition n = 2..{}", n_max.min(100)),
        decomposition,
    ));

    let count_hi = n_max.min(40);
    let counts = (|| {
        for n in 1..=count_hi {
            let listed = enumerate_optimal_sets(n, crate::engine::DEFAULT_ENUMERATION_CAP)?.len();
            let c = count_optimal_sets(n)?;
            if c != listed.into() {
                return Ok(Some(format!("n = {n}: count {c}, enumeration {listed}")));
            }
        }
        Ok(None)
    })();
    checks.push(check(format!("count = enumeration n = 1..{count_hi}"), counts));

    for n in 2..=n_max.min(12) {
        let result = exhaustive_min(n, crate::oracle::DEFAULT_SEARCH_CAP).and_then(|r| {
            let v = quantization_error(n)?;
            Ok((r.v != v).then(|| format!("exhaustive {} vs {}", to_fraction_string(&r.v), to_fraction_string(&v))))
        });
        checks.push(check(format!("exhaustive V_{n}"), result));
    }

    let ok = checks.iter().all(|c| c.ok);
    let text = match out.format {
        Format::Json => to_json(&json!({
            "n": n_max,
            "pass": ok,
            "checks": checks
                .iter()
                .map(|c| json!({ "name": c.name, "pass": c.ok, "detail": c.detail }))
                .collect::<Vec<_>>(),
        })),
        _ => {
            let mut s = String::new();
            for c in &checks {
                let _ = match &c.detail {
                    None => writeln!(s, "{} PASS", c.name),
                    Some(d) => writeln!(s, "{} FAIL ({d})", c.name),
                };
            }
            let passed = checks.iter().filter(|c| c.ok).count();
            let _ = writeln!(s, "{passed}/{} checks passed", checks.len());
            s
        }
    };
    Outcome { text, ok }
}
