//! `trajmatch`: generate optimizer trajectories, compare them with the
//! crossmatch test, cluster the resulting similarity matrix and report.

mod manifest;
mod report;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use trajmatch_core::analysis::{
    pairwise_similarity, read_series_csv, write_series_csv, CompareConfig, SimilarityMatrix,
    DEFAULT_ALPHA,
};
use trajmatch_core::cluster::{to_dissimilarity, ward_cluster, ExportFormat};
use trajmatch_core::crossmatch::{crossmatch_test, LabeledSample, TieMode};
use trajmatch_core::portfolio::problems::SUITE;
use trajmatch_core::portfolio::{
    run_suite, AlgorithmSpec, RunConfig, ALGORITHMS, DEFAULT_BUDGET_FACTOR, DEFAULT_POPULATION,
    DEFAULT_RUNS,
};
use trajmatch_core::trajectory::load_trajectories;

use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "trajmatch", version, about = "Crossmatch-based similarity of optimizer trajectories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the optimizer portfolio and write a trajectory file.
    Generate(GenerateArgs),
    /// Compare every pair of algorithms in a trajectory file.
    Compare(CompareArgs),
    /// Ward-cluster a similarity matrix into a dendrogram.
    Cluster(ClusterArgs),
    /// Summarise a similarity matrix and statistic series as markdown.
    Report(ReportArgs),
    /// Crossmatch test between two point files.
    Crossmatch(CrossmatchArgs),
}

#[derive(Debug, Args)]
struct Threads {
    /// Worker threads; 0 lets the pool pick.
    #[arg(long, env = "TRAJMATCH_THREADS", default_value_t = 0)]
    threads: usize,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = ALGORITHMS.map(String::from))]
    algorithms: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = SUITE.map(String::from))]
    problems: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 5])]
    dims: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = DEFAULT_POPULATION)]
    pop: usize,
    /// Evaluations per run are this factor times the dimension.
    #[arg(long, default_value_t = DEFAULT_BUDGET_FACTOR)]
    budget_factor: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path, `.csv` or `.json`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value = "neutral")]
    tie_mode: TieMode,
    /// Append scaled fitness to each solution vector.
    #[arg(long)]
    include_fitness: bool,
    /// Overall matrix; per-dimension matrices go to `<stem>.d<dim>.csv`.
    #[arg(long)]
    out_matrix: PathBuf,
    #[arg(long)]
    out_series: PathBuf,
    #[command(flatten)]
    threads: Threads,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "newick")]
    format: ExportFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    series: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CrossmatchArgs {
    /// CSV of points with a header row.
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value = "neutral")]
    tie_mode: TieMode,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Error with its process exit code: 2 for bad input or configuration, 1
/// for everything else.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self { code: 1, message: e.to_string() }
    }

    pub fn io(path: &Path, e: io::Error) -> Self {
        let code = if e.kind() == io::ErrorKind::NotFound { 2 } else { 1 };
        Self { code, message: format!("{}: {e}", path.display()) }
    }
}

impl From<trajmatch_core::Error> for CliError {
    fn from(e: trajmatch_core::Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 1 };
        Self { code, message: e.to_string() }
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(CliError::internal)?;
    Ok(pool.install(f))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_matrix(m: &SimilarityMatrix, path: &Path) -> Result<(), CliError> {
    let mut w = create(path)?;
    m.write_csv(&mut w)?;
    finish(w, path)
}

/// `results/matrix.csv` and 5 give `results/matrix.d5.csv`.
fn dimension_path(matrix: &Path, dim: usize) -> PathBuf {
    let stem = matrix.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = matrix.extension().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    matrix.with_file_name(format!("{stem}.d{dim}.{ext}"))
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    if args.runs == 0 || args.dims.is_empty() || args.dims.contains(&0) {
        return Err(CliError::input("need at least one run and positive dimensions"));
    }
    let specs = args
        .algorithms
        .iter()
        .map(|id| AlgorithmSpec::new(id, args.pop))
        .collect::<Result<Vec<_>, _>>()?;
    let config = RunConfig {
        budget_factor: args.budget_factor,
        runs: args.runs,
        base_seed: args.seed,
        dimensions: args.dims.clone(),
    };
    let store = with_threads(args.threads.threads, || run_suite(&specs, &args.problems, &config))??;
    store.save(&args.out)?;

    let mut m = RunManifest::new(
        "generate",
        json!({
            "algorithms": specs,
            "problems": args.problems,
            "run": config,
            "n_pop": args.pop,
            "threads": args.threads.threads,
        }),
        Some(args.seed),
    );
    m.output(&args.out)?;
    m.write_beside(&[&args.out])
}

fn compare(args: CompareArgs) -> Result<(), CliError> {
    let store = load_trajectories(&args.input)?;
    let config = CompareConfig {
        alpha: args.alpha,
        tie_mode: args.tie_mode,
        include_fitness: args.include_fitness,
    };
    let analysis = with_threads(args.threads.threads, || pairwise_similarity(&store, &config))??;

    write_matrix(&analysis.overall, &args.out_matrix)?;
    let mut per_dim = Vec::new();
    for (&dim, matrix) in &analysis.per_dimension {
        let path = dimension_path(&args.out_matrix, dim);
        write_matrix(matrix, &path)?;
        per_dim.push(path);
    }
    let mut w = create(&args.out_series)?;
    write_series_csv(&analysis.comparisons, &mut w)?;
    finish(w, &args.out_series)?;

    let mut m = RunManifest::new(
        "compare",
        json!({ "compare": config, "threads": args.threads.threads }),
        None,
    );
    m.input(&args.input)?;
    m.output(&args.out_matrix)?;
    for p in &per_dim {
        m.output(p)?;
    }
    m.output(&args.out_series)?;
    m.write_beside(&[&args.out_matrix, &args.out_series])
}

fn cluster(args: ClusterArgs) -> Result<(), CliError> {
    let matrix = SimilarityMatrix::read_csv(open(&args.input)?)?;
    let dendrogram = ward_cluster(&to_dissimilarity(&matrix)?)?;
    fs::write(&args.out, dendrogram.export(args.format)?).map_err(|e| CliError::io(&args.out, e))?;

    let format = format!("{:?}", args.format).to_ascii_lowercase();
    let mut m = RunManifest::new(
        "cluster",
        json!({ "format": format, "linkage": "ward", "distance": "1 - similarity" }),
        None,
    );
    m.input(&args.input)?;
    m.output(&args.out)?;
    m.write_beside(&[&args.out])
}

fn report(args: ReportArgs) -> Result<(), CliError> {
    let matrix = SimilarityMatrix::read_csv(open(&args.matrix)?)?;
    let series = match &args.series {
        Some(p) => read_series_csv(open(p)?)?,
        None => Vec::new(),
    };
    let built = report::build(
        &report::ReportInputs {
            matrix_path: &args.matrix,
            matrix: &matrix,
            series_path: args.series.as_deref(),
            series: &series,
            top_k: args.top_k,
        },
        &args.out,
    )?;
    let written = report::write(&built, &args.out)?;

    let mut m = RunManifest::new("report", json!({ "top_k": args.top_k }), None);
    m.input(&args.matrix)?;
    if let Some(p) = &args.series {
        m.input(p)?;
    }
    for p in &written {
        m.output(p)?;
    }
    m.write_beside(&[&args.out])
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(open(path)?);
    let mut points = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let point = record
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::input(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        points.push(point);
    }
    Ok(points)
}

fn crossmatch(args: CrossmatchArgs) -> Result<(), CliError> {
    let sample = LabeledSample::new(read_points(&args.x)?, read_points(&args.y)?)?;
    let result = crossmatch_test(&sample, args.tie_mode)?;
    let mut text = serde_json::to_string_pretty(&result).map_err(CliError::internal)?;
    text.push('\n');
    match &args.out {
        Some(out) => {
            fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
            let mut m = RunManifest::new("crossmatch", json!({ "tie_mode": args.tie_mode }), None);
            m.input(&args.x)?;
            m.input(&args.y)?;
            m.output(out)?;
            m.write_beside(&[out])
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(CliError::internal),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Compare(a) => compare(a),
        Command::Cluster(a) => cluster(a),
        Command::Report(a) => report(a),
        Command::Crossmatch(a) => crossmatch(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("trajmatch: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn per_dimension_paths() {
        assert_eq!(dimension_path(Path::new("out/m.csv"), 5), PathBuf::from("out/m.d5.csv"));
        assert_eq!(dimension_path(Path::new("m"), 2), PathBuf::from("m.d2.csv"));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn core_input_errors_exit_with_two() {
        let e: CliError = trajmatch_core::Error::UnknownAlgorithm("x".into()).into();
        assert_eq!(e.code, 2);
        let e = CliError::io(Path::new("x"), io::Error::other("disk"));
        assert_eq!(e.code, 1);
    }
}
