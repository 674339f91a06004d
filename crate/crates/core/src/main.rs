use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rankstream::engine::Engine;
use rankstream::error::{Error, Result};
use rankstream::generate::{GenSpec, Model};
use rankstream::harness::{self, Candidate, Grades};
use rankstream::text::{self, DataLines};

#[derive(Parser)]
#[command(
    name = "rankstream",
    version,
    about = "Streaming footrule rank aggregation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate a stream of rankings, one per line.
    Aggregate(AggregateArgs),
    /// Write a synthetic ranking stream.
    Generate(GenerateArgs),
    /// Score candidate aggregations of a domain against the optimum.
    Evaluate(EvaluateArgs),
    /// Run an experiment grid and report approximation ratios.
    Bench(BenchArgs),
    /// Convert a student-by-lesson grade table to rankings.
    Grades(GradesArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Rankings file; `-` or absent reads standard input.
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print `m,lr_cost,pap_cost,winner` after every ranking.
    #[arg(long)]
    emit_each: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Uniform,
    Biased,
    Mallows,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uniform => Model::Uniform,
            ModelArg::Biased => Model::Biased,
            ModelArg::Mallows => Model::Mallows,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pairs aligned per ranking (biased model).
    #[arg(long)]
    k: Option<usize>,
    /// Dispersion in (0, 1] (mallows model).
    #[arg(long)]
    phi: Option<f64>,
    /// Biased model: use the same k pairs for every ranking.
    #[arg(long)]
    fixed_pairs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Rankings file defining the domain.
    domain: PathBuf,
    /// Comma-separated built-ins: lr, pap, bir, opt, median, average.
    #[arg(long, value_delimiter = ',', default_value = "lr,pap,bir,opt")]
    candidates: Vec<String>,
    /// Extra candidate read from a file holding one ranking.
    #[arg(long = "ranking")]
    rankings: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "uniform")]
    model: Vec<ModelArg>,
    #[arg(long, value_delimiter = ',', default_value = "64")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    m: Vec<usize>,
    /// First seed of each cell's seed range.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeds per (model, n, m) cell.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Biased pair count; defaults to n.
    #[arg(long)]
    k: Option<usize>,
    /// Mallows dispersion; defaults to 0.9.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    fixed_pairs: bool,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "RANKSTREAM_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GradesMode {
    Rankings,
    Average,
}

#[derive(Args)]
struct GradesArgs {
    csv: PathBuf,
    #[arg(long, value_enum, default_value = "rankings")]
    mode: GradesMode,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_input(path: Option<&Path>) -> Result<Box<dyn BufRead>> {
    match path {
        None => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => Ok(Box::new(BufReader::new(open(p)?))),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
    })
}

fn aggregate(args: AggregateArgs) -> Result<()> {
    let input = open_input(args.input.as_deref())?;
    let mut out = open_output(args.out.as_deref())?;
    let mut engine: Option<Engine> = None;
    if args.emit_each {
        writeln!(out, "m,lr_cost,pap_cost,winner")?;
    }
    for item in DataLines::new(input) {
        let (line, labels) = item?;
        let e = match &mut engine {
            Some(e) => e,
            None => engine.insert(
                Engine::new(labels.iter().cloned(), args.seed).map_err(|e| e.at_line(line))?,
            ),
        };
        let step = e.push(&labels).map_err(|err| err.at_line(line))?;
        if args.emit_each {
            writeln!(
                out,
                "{},{},{},{}",
                step.m, step.lr_cost, step.pap_cost, step.winner
            )?;
        }
    }
    let engine = engine.ok_or_else(|| Error::Parse("no rankings in input".into()))?;
    let step = engine.current()?;
    writeln!(
        out,
        "# m={} best_cost={} lr_cost={} pap_cost={} winner={}",
        step.m,
        step.best_cost(),
        step.lr_cost,
        step.pap_cost,
        step.winner
    )?;
    writeln!(out, "{}", step.best_labels(engine.table()).join(" "))?;
    out.flush()?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let spec = GenSpec {
        k: args.k,
        phi: args.phi,
        fixed_pairs: args.fixed_pairs,
        ..GenSpec::new(args.model.into(), args.n, args.m, args.seed)
    };
    let domain = spec.generate()?;
    text::write_domain(&domain, open_output(args.out.as_deref())?)
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let domain = text::read_domain(BufReader::new(open(&args.domain)?))?;
    let mut candidates = args
        .candidates
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| c.parse())
        .collect::<Result<Vec<Candidate>>>()?;
    for path in &args.rankings {
        let mut lines = DataLines::new(BufReader::new(open(path)?));
        let (line, labels) = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("{}: no ranking", path.display())))??;
        let ranking = domain
            .table()
            .ranking(&labels)
            .map_err(|e| e.at_line(line))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        candidates.push(Candidate::Given { name, ranking });
    }
    let rows = harness::evaluate(&domain, &candidates, args.seed)?;
    harness::write_eval_csv(&rows, open_output(args.out.as_deref())?)
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cells = Vec::new();
    for &model in &args.model {
        for &n in &args.n {
            for &m in &args.m {
                for s in 0..args.seeds {
                    let model = Model::from(model);
                    let spec = GenSpec {
                        k: (model == Model::Biased).then_some(args.k).flatten(),
                        phi: (model == Model::Mallows).then_some(args.phi).flatten(),
                        fixed_pairs: args.fixed_pairs,
                        ..GenSpec::new(model, n, m, args.seed + s)
                    }
                    .with_defaults();
                    spec.validate()?;
                    cells.push(spec);
                }
            }
        }
    }
    let rows = harness::bench(&cells, args.threads)?;
    harness::write_bench_csv(&rows, open_output(args.out.as_deref())?)
}

fn grades(args: GradesArgs) -> Result<()> {
    let g = Grades::read(open(&args.csv)?)?;
    let mut out = open_output(args.out.as_deref())?;
    match args.mode {
        GradesMode::Rankings => {
            writeln!(
                out,
                "# one ranking per lesson, highest grade first; equal grades keep row order"
            )?;
            text::write_domain(&g.lesson_rankings(), out)
        }
        GradesMode::Average => {
            writeln!(
                out,
                "# students by mean grade, highest first; equal means keep row order"
            )?;
            writeln!(
                out,
                "{}",
                text::format_ranking(g.table(), &g.average_ranking())
            )?;
            out.flush()?;
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.root() {
        Error::OracleTooLarge { .. } => 3,
        Error::EmptyStream | Error::Snapshot(_) | Error::RankOutOfRange { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = std::panic::catch_unwind(|| match cli.command {
        Command::Aggregate(a) => aggregate(a),
        Command::Generate(a) => generate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bench(a) => bench(a),
        Command::Grades(a) => grades(a),
    });
    match run {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(4),
    }
}
