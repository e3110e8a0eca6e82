//! `pming` command line: wire a count provider and a context together,
//! score pairs, emit matrices and rankings, freeze contexts for replay.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use pming::render::{sig9_json, sig9_str};
use pming::{
    build_context, distance_matrix, load_count_table, top_k, CachedProvider, Context, CorpusIndex,
    CountCache, CountProvider, DistanceMatrix, HttpProvider, HttpProviderConfig, RankedList,
    ScoreReport, Term, Variant,
};
use serde_json::json;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

const DEFAULT_RHO: f64 = 0.3;

#[derive(Parser)]
#[command(
    name = "pming",
    version,
    about = "Semantic proximity from document hit counts",
    long_about = "Computes the PMING distance of term pairs: a locally normalized\n\
                  combination of pointwise mutual information and the NGD-style\n\
                  log-count spread, over counts from a local corpus index, a static\n\
                  count table, or a live search-engine endpoint."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus index from a directory of .txt files or a JSON-lines file
    Index {
        /// Directory of UTF-8 .txt documents, or a JSON-lines file of {"id","text"} objects
        corpus_path: PathBuf,
        /// Where to write the index file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score one term pair within a context
    Score {
        x: String,
        y: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Emit the full pairwise distance matrix over the context terms
    Matrix {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Rank terms nearest to a query term, ascending by distance
    Topk {
        query: String,
        /// How many entries to keep
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Look up raw counts for a term or a term pair
    Counts {
        x: String,
        y: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Corpus,
    Table,
    Http,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Paper,
    Legacy,
}

impl From<VariantArg> for Variant {
    fn from(value: VariantArg) -> Variant {
        match value {
            VariantArg::Paper => Variant::Paper,
            VariantArg::Legacy => Variant::Legacy,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated context term set W
    #[arg(long, value_delimiter = ',')]
    terms: Option<Vec<String>>,
    /// Load a frozen context JSON instead of building one
    #[arg(long)]
    context: Option<PathBuf>,
    /// Write the context as a JSON fixture for later replay
    #[arg(long, value_name = "PATH")]
    freeze_context: Option<PathBuf>,
    /// Data source kind; inferred from --table/--index/--http-config when omitted
    #[arg(long, value_enum)]
    provider: Option<ProviderKind>,
    /// Count-table JSON file
    #[arg(long, value_name = "PATH")]
    table: Option<PathBuf>,
    /// Corpus index file built by `pming index`
    #[arg(long, value_name = "PATH")]
    index: Option<PathBuf>,
    /// HTTP provider configuration JSON file
    #[arg(long, value_name = "PATH")]
    http_config: Option<PathBuf>,
    /// Component weight in [0,1]; the PMI component gets rho, the spread component 1-rho
    #[arg(long)]
    rho: Option<f64>,
    /// Second-component formula variant
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Cache pair counts on disk ($PMING_CACHE or .pming-cache.json);
    /// the optional value overrides the TTL in milliseconds
    #[arg(long, num_args = 0..=1, default_missing_value = "604800000", value_name = "TTL_MS")]
    cache: Option<u64>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(message: impl fmt::Display) -> Self {
        CliError::Usage(message.to_string())
    }

    fn data(message: impl fmt::Display) -> Self {
        CliError::Data(message.to_string())
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(error: E) -> Self {
        let mut message = error.to_string();
        let mut source = std::error::Error::source(&error);
        while let Some(cause) = source {
            message.push_str(&format!(": {cause}"));
            source = cause.source();
        }
        CliError::Data(message)
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
        Err(CliError::Data(message)) => {
            eprintln!("error: {message}");
            std::process::exit(2);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Index {
            corpus_path,
            output,
        } => {
            let index = if corpus_path.is_dir() {
                CorpusIndex::from_dir(&corpus_path)?
            } else {
                CorpusIndex::from_jsonl(&corpus_path)?
            };
            index.save(&output)?;
            let summary = json!({
                "documents": index.doc_count(),
                "distinct_tokens": index.distinct_tokens(),
                "output": output.display().to_string(),
            });
            println!("{summary}");
            Ok(())
        }
        Command::Score { x, y, run } => {
            let ctx = resolve_context(&run)?;
            let x = parse_term(&x)?;
            let y = parse_term(&y)?;
            let report = ctx.score_pair(&x, &y)?;
            match run.format {
                Format::Json => println!("{}", score_json(&report, &ctx)),
                Format::Tsv => print!("{}", score_tsv(&report, &ctx)),
            }
            Ok(())
        }
        Command::Matrix { run } => {
            let ctx = resolve_context(&run)?;
            let matrix = distance_matrix(&ctx)?;
            match run.format {
                Format::Json => println!("{}", matrix_json(&matrix)),
                Format::Tsv => print!("{}", matrix.to_tsv()),
            }
            Ok(())
        }
        Command::Topk { query, k, run } => {
            if k == 0 {
                return Err(CliError::usage("k must be at least 1"));
            }
            let ctx = resolve_context(&run)?;
            let query = parse_term(&query)?;
            let ranked = top_k(&ctx, &query, k, None)?;
            match run.format {
                Format::Json => println!("{}", ranked_json(&ranked)),
                Format::Tsv => print!("{}", ranked_tsv(&ranked)),
            }
            Ok(())
        }
        Command::Counts { x, y, run } => {
            let provider = resolve_provider(&run)?.ok_or_else(|| {
                CliError::usage("counts needs a data source: --table, --index or --http-config")
            })?;
            let x = parse_term(&x)?;
            let value = match y {
                Some(y) => {
                    let y = parse_term(&y)?;
                    let counts = pming::lookup_counts(provider.as_ref(), &x, &y)?;
                    json!({
                        "x": x.normalized(),
                        "y": y.normalized(),
                        "f_x": counts.f_x(),
                        "f_y": counts.f_y(),
                        "f_xy": counts.f_xy(),
                        "M": counts.m(),
                    })
                }
                None => {
                    let occurrence = provider.occurrence(&x)?;
                    json!({
                        "x": x.normalized(),
                        "f_x": occurrence,
                        "M": provider.corpus_size(),
                    })
                }
            };
            match run.format {
                Format::Json => println!("{value}"),
                Format::Tsv => print!("{}", flat_object_tsv(&value)),
            }
            Ok(())
        }
    }
}

fn parse_term(raw: &str) -> Result<Term, CliError> {
    Term::parse(raw).map_err(CliError::usage)
}

/// Build the provider selected by the flags, wrapped in the disk cache
/// when requested. `Ok(None)` means no source flags were given at all.
fn resolve_provider(run: &RunArgs) -> Result<Option<Arc<dyn CountProvider>>, CliError> {
    let mut sources: Vec<(ProviderKind, &PathBuf)> = Vec::new();
    if let Some(path) = &run.table {
        sources.push((ProviderKind::Table, path));
    }
    if let Some(path) = &run.index {
        sources.push((ProviderKind::Corpus, path));
    }
    if let Some(path) = &run.http_config {
        sources.push((ProviderKind::Http, path));
    }
    if sources.len() > 1 {
        return Err(CliError::usage(
            "choose exactly one data source: --table, --index or --http-config",
        ));
    }
    let Some((kind, path)) = sources.pop() else {
        if run.provider.is_some() {
            return Err(CliError::usage(
                "--provider needs its matching source flag (--table, --index or --http-config)",
            ));
        }
        return Ok(None);
    };
    if let Some(declared) = run.provider {
        if declared != kind {
            return Err(CliError::usage(
                "--provider does not match the given source flag",
            ));
        }
    }

    let provider: Arc<dyn CountProvider> = match kind {
        ProviderKind::Table => Arc::new(load_count_table(path)?),
        ProviderKind::Corpus => Arc::new(CorpusIndex::load(path)?),
        ProviderKind::Http => {
            let config = HttpProviderConfig::from_file(path)?;
            Arc::new(HttpProvider::new(config)?)
        }
    };

    Ok(Some(match run.cache {
        Some(ttl_ms) => {
            let cache = CountCache::open(
                &pming::providers::cache::default_cache_path(),
                Duration::from_millis(ttl_ms),
            );
            Arc::new(CachedProvider::new(provider, cache))
        }
        None => provider,
    }))
}

fn resolve_context(run: &RunArgs) -> Result<Context, CliError> {
    match (&run.terms, &run.context) {
        (Some(_), Some(_)) => Err(CliError::usage(
            "choose either --terms or --context, not both",
        )),
        (None, None) => Err(CliError::usage(
            "a context is required: pass --terms w1,w2,... or --context <file>",
        )),
        (Some(raw_terms), None) => {
            let provider = resolve_provider(run)?.ok_or_else(|| {
                CliError::usage(
                    "building a context needs a data source: --table, --index or --http-config",
                )
            })?;
            let mut terms: Vec<Term> = Vec::with_capacity(raw_terms.len());
            for raw in raw_terms {
                let term = parse_term(raw)?;
                if terms.contains(&term) {
                    eprintln!("warning: duplicate term `{}` ignored", term.normalized());
                } else {
                    terms.push(term);
                }
            }
            let rho = run.rho.unwrap_or(DEFAULT_RHO);
            let variant = run.variant.map(Variant::from).unwrap_or_default();
            let ctx = build_context(&terms, provider, rho, variant)?;
            if let Some(path) = &run.freeze_context {
                fs::write(path, ctx.to_json()).map_err(CliError::data)?;
            }
            Ok(ctx)
        }
        (None, Some(path)) => {
            let data = fs::read_to_string(path).map_err(CliError::data)?;
            let mut ctx = Context::from_json(&data)?;
            if let Some(variant) = run.variant {
                if Variant::from(variant) != ctx.variant() {
                    return Err(CliError::data(format!(
                        "frozen context was built with the {} variant; mu2 is variant-bound, rebuild with --terms to switch",
                        ctx.variant()
                    )));
                }
            }
            if let Some(rho) = run.rho {
                ctx = ctx.with_rho(rho).map_err(CliError::usage)?;
            }
            if let Some(provider) = resolve_provider(run)? {
                ctx = ctx.with_provider(provider);
            }
            if let Some(freeze) = &run.freeze_context {
                fs::write(freeze, ctx.to_json()).map_err(CliError::data)?;
            }
            Ok(ctx)
        }
    }
}

const SCORE_FIELDS: [&str; 16] = [
    "x",
    "y",
    "f_x",
    "f_y",
    "f_xy",
    "M",
    "pmi",
    "spread",
    "component_pmi",
    "component_spread",
    "mu1",
    "mu2",
    "rho",
    "variant",
    "pming",
    "flags",
];

fn score_json(report: &ScoreReport, ctx: &Context) -> serde_json::Value {
    json!({
        "x": report.x,
        "y": report.y,
        "f_x": report.counts.f_x(),
        "f_y": report.counts.f_y(),
        "f_xy": report.counts.f_xy(),
        "M": report.counts.m(),
        "pmi": sig9_json(report.pmi),
        "spread": sig9_json(report.spread),
        "component_pmi": sig9_json(report.component_pmi),
        "component_spread": sig9_json(report.component_spread),
        "mu1": sig9_json(ctx.mu1()),
        "mu2": sig9_json(ctx.mu2()),
        "rho": sig9_json(ctx.rho()),
        "variant": ctx.variant().to_string(),
        "pming": sig9_json(report.pming),
        "flags": report.flags.names(),
    })
}

fn score_tsv(report: &ScoreReport, ctx: &Context) -> String {
    let values = [
        report.x.clone(),
        report.y.clone(),
        report.counts.f_x().to_string(),
        report.counts.f_y().to_string(),
        report.counts.f_xy().to_string(),
        report.counts.m().to_string(),
        sig9_str(report.pmi),
        sig9_str(report.spread),
        sig9_str(report.component_pmi),
        sig9_str(report.component_spread),
        sig9_str(ctx.mu1()),
        sig9_str(ctx.mu2()),
        sig9_str(ctx.rho()),
        ctx.variant().to_string(),
        sig9_str(report.pming),
        report.flags.names().join(","),
    ];
    format!("{}\n{}\n", SCORE_FIELDS.join("\t"), values.join("\t"))
}

fn matrix_json(matrix: &DistanceMatrix) -> serde_json::Value {
    let values: Vec<Vec<serde_json::Value>> = matrix
        .values
        .iter()
        .map(|row| row.iter().map(|v| sig9_json(*v)).collect())
        .collect();
    json!({
        "terms": matrix.terms,
        "rho": sig9_json(matrix.rho),
        "variant": matrix.variant.to_string(),
        "mu1": sig9_json(matrix.mu1),
        "mu2": sig9_json(matrix.mu2),
        "values": values,
    })
}

fn ranked_json(ranked: &RankedList) -> serde_json::Value {
    serde_json::Value::Array(
        ranked
            .entries
            .iter()
            .map(|entry| {
                json!({
                    "term": entry.term,
                    "pming": sig9_json(entry.pming),
                    "flags": entry.flags.names(),
                })
            })
            .collect(),
    )
}

fn ranked_tsv(ranked: &RankedList) -> String {
    let mut out = String::from("term\tpming\tflags\n");
    for entry in &ranked.entries {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            entry.term,
            sig9_str(entry.pming),
            entry.flags.names().join(",")
        ));
    }
    out
}

fn flat_object_tsv(value: &serde_json::Value) -> String {
    let object = value.as_object().expect("flat object");
    let header: Vec<&str> = object.keys().map(String::as_str).collect();
    let row: Vec<String> = object
        .values()
        .map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect();
    format!("{}\n{}\n", header.join("\t"), row.join("\t"))
}
