//! `missq`: batch access to missingness profiles, joint and conditional
//! matrices, orderings, selections, synthetic missingness and network export.
//!
//! Exit codes: 0 success, 2 usage, 3 ingestion, 4 feasibility, 5 I/O, 6 any
//! other failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use missq_core::export::write_matrices_csv;
use missq_core::{
    csv_io, export_network, generate, jm_matrices, order_by_pairwise, order_by_univariate, profile,
    select_by_edges, threshold_select, Aggregation, Analysis, EdgeFilter, ErrorKind, GenerationMode,
    IncompleteDataset, IngestConfig, Metric, MissingnessSpec, PairwiseQMMatrix, Predicate, SelectionSource,
    VariableKind,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INGESTION: u8 = 3;
pub const EXIT_FEASIBILITY: u8 = 4;
pub const EXIT_IO: u8 = 5;
pub const EXIT_OTHER: u8 = 6;

#[derive(Debug, Parser)]
#[command(name = "missq", version, about = "Quality metrics for missing data in CSV tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Amount missing per variable, as `variable,q_am`.
    Profile {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Joint-missingness matrices in long form.
    Jm {
        #[command(flatten)]
        input: InputArgs,
        /// Which joint metric to write.
        #[arg(long, value_enum, default_value_t = JmChoice::All)]
        metric: JmChoice,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Conditional-missingness matrices in long form.
    Cm {
        #[command(flatten)]
        input: InputArgs,
        /// Which conditional metric to write.
        #[arg(long, value_enum, default_value_t = CmChoice::All)]
        metric: CmChoice,
        /// Collapse both directions of each pair (mean, max or min) instead of
        /// writing every ordered pair.
        #[arg(long)]
        aggregate: Option<Aggregation>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Variable ordering by one metric, as `position,index,variable`.
    Order {
        #[command(flatten)]
        input: InputArgs,
        /// q_am (sorted) or a pairwise metric (greedy pair chaining).
        #[arg(long, default_value = "q_am")]
        metric: Metric,
        /// Sort q_am ascending instead of descending.
        #[arg(long)]
        ascending: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Variables passing a threshold, as `index,variable`.
    Select {
        #[command(flatten)]
        input: InputArgs,
        /// Single predicate such as `q_am>0.3` or `jm_abs>=0.05`.
        #[arg(long, conflicts_with = "filter")]
        predicate: Option<Predicate>,
        /// Conjunctive edge filter such as `jm_dir<0.05,cm_did>0.9`; selects
        /// variables on at least one passing pair.
        #[arg(long)]
        filter: Option<EdgeFilter>,
        /// How directional metrics combine per pair (mean, max or min).
        #[arg(long, default_value = "max")]
        aggregate: Aggregation,
        /// Keep at most this many variables, highest values first.
        #[arg(long)]
        top: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Inject synthetic missingness into a complete table.
    Generate {
        /// Procedure: am, jm or cm.
        mode: GenerationMode,
        /// Generator spec, JSON or TOML (by extension).
        #[arg(long)]
        spec: PathBuf,
        /// Complete input table; defaults to the spec's `source`.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Overrides the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Ground-truth manifest path; defaults to OUTPUT with a
        /// `.manifest.json` extension when OUTPUT is a file.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Token written for missing cells.
        #[arg(long, default_value = csv_io::DEFAULT_WRITE_TOKEN)]
        missing_token: String,
        #[command(flatten)]
        ingest: IngestArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write nodes.csv and edges.csv for graph tools.
    ExportNetwork {
        #[command(flatten)]
        input: InputArgs,
        /// Conjunctive edge filter such as `jm_dir<0.05,cm_did>0.9`.
        #[arg(long)]
        filter: Option<EdgeFilter>,
        /// How directional metrics combine per pair (mean, max or min).
        #[arg(long, default_value = "max")]
        aggregate: Aggregation,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the HTTP/JSON service.
    Serve {
        /// Address to listen on.
        #[arg(long, env = "MISSQ_BIND", default_value = "127.0.0.1:8750")]
        bind: SocketAddr,
        /// Built UI bundle to serve at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// CSV files to register at startup.
        datasets: Vec<PathBuf>,
        #[command(flatten)]
        ingest: IngestArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum JmChoice {
    JmMag,
    JmDir,
    JmAbs,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CmChoice {
    CmDid,
    CmH,
    All,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input CSV file.
    pub input: PathBuf,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Comma-separated cell values read as missing (case-insensitive).
    #[arg(long, env = "MISSQ_MISSING_TOKENS", value_delimiter = ',')]
    pub missing_tokens: Option<Vec<String>>,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first row is data; variables are named V1..VK.
    #[arg(long)]
    pub no_header: bool,
    /// Force a variable's kind, as NAME=numerical or NAME=categorical.
    #[arg(long = "kind", value_name = "NAME=KIND", value_parser = parse_kind)]
    pub kinds: Vec<(String, VariableKind)>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<(String, VariableKind), String> {
    let (name, kind) = s.rsplit_once('=').ok_or_else(|| format!("expected NAME=KIND, got `{s}`"))?;
    let kind = kind.parse::<VariableKind>().map_err(|e| e.to_string())?;
    Ok((name.to_string(), kind))
}

impl IngestArgs {
    pub fn config(&self) -> IngestConfig {
        let mut config = IngestConfig::default();
        if let Some(tokens) = &self.missing_tokens {
            config.missing_tokens = tokens.iter().map(|t| t.trim().to_string()).collect();
        }
        config.delimiter = self.delimiter;
        config.header = !self.no_header;
        config.kind_overrides = self.kinds.iter().cloned().collect();
        config
    }
}

impl InputArgs {
    fn load(&self) -> Result<IncompleteDataset, CliError> {
        Ok(csv_io::load_csv(&self.input, &self.ingest.config())?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] missq_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Ingestion => EXIT_INGESTION,
                ErrorKind::Feasibility => EXIT_FEASIBILITY,
                ErrorKind::Io => EXIT_IO,
                ErrorKind::Invalid => EXIT_OTHER,
            },
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    match execute(cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("missq: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command; tabular results without `-o` go to `stdout`.
pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Profile { input, output } => {
            let d = input.load()?;
            with_output(&output, stdout, |w| Ok(profile(&d)?.write_csv(w)?))
        }
        Command::Jm { input, metric, output } => {
            let d = input.load()?;
            let jm = jm_matrices(&d)?;
            let chosen: Vec<&PairwiseQMMatrix> = match metric {
                JmChoice::JmMag => vec![&jm.magnitude],
                JmChoice::JmDir => vec![&jm.directional],
                JmChoice::JmAbs => vec![&jm.absolute],
                JmChoice::All => vec![&jm.magnitude, &jm.directional, &jm.absolute],
            };
            with_output(&output, stdout, |w| Ok(write_matrices_csv(&chosen, w)?))
        }
        Command::Cm {
            input,
            metric,
            aggregate,
            output,
        } => {
            let d = input.load()?;
            let cm = missq_core::cm_matrices(&d)?;
            let mut chosen: Vec<PairwiseQMMatrix> = match metric {
                CmChoice::CmDid => vec![cm.density_difference],
                CmChoice::CmH => vec![cm.entropy],
                CmChoice::All => vec![cm.density_difference, cm.entropy],
            };
            if let Some(agg) = aggregate {
                chosen = chosen.iter().map(|m| m.symmetrized(agg)).collect();
            }
            let refs: Vec<&PairwiseQMMatrix> = chosen.iter().collect();
            with_output(&output, stdout, |w| Ok(write_matrices_csv(&refs, w)?))
        }
        Command::Order {
            input,
            metric,
            ascending,
            output,
        } => {
            let d = input.load()?;
            let ordering = if metric == Metric::QAm {
                order_by_univariate(&profile(&d)?, !ascending)
            } else {
                let a = Analysis::compute(&d)?;
                order_by_pairwise(a.matrices().require(metric)?)?
            };
            with_output(&output, stdout, |w| {
                writeln!(w, "position,index,variable")?;
                for (pos, (&i, name)) in ordering.permutation.iter().zip(&ordering.variables).enumerate() {
                    writeln!(w, "{pos},{i},{}", csv_field(name))?;
                }
                Ok(())
            })
        }
        Command::Select {
            input,
            predicate,
            filter,
            aggregate,
            top,
            output,
        } => {
            let d = input.load()?;
            let indices = match (predicate, filter) {
                (_, Some(f)) => {
                    let a = Analysis::compute(&d)?;
                    select_by_edges(&a.matrices(), &f.with_aggregation(aggregate), top)?
                }
                (Some(p), None) if p.metric == Metric::QAm => {
                    threshold_select(SelectionSource::Profile(&profile(&d)?), &p, top)?
                }
                (Some(p), None) => {
                    let a = Analysis::compute(&d)?;
                    let matrices = a.matrices();
                    threshold_select(SelectionSource::Matrix(matrices.require(p.metric)?), &p, top)?
                }
                (None, None) => return Err(CliError::Usage("select needs --predicate or --filter".into())),
            };
            let names = d.variable_names();
            with_output(&output, stdout, |w| {
                writeln!(w, "index,variable")?;
                for i in indices {
                    writeln!(w, "{i},{}", csv_field(&names[i]))?;
                }
                Ok(())
            })
        }
        Command::Generate {
            mode,
            spec,
            input,
            seed,
            manifest,
            missing_token,
            ingest,
            output,
        } => {
            let mut spec = MissingnessSpec::load(&spec)?;
            spec.mode = Some(mode);
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let source = input
                .or_else(|| spec.source.clone())
                .ok_or_else(|| CliError::Usage("no input table: pass --input or set `source` in the spec".into()))?;
            let d = csv_io::load_csv(&source, &ingest.config())?;
            let (out, truth) = generate(&d, &spec)?;
            with_output(&output, stdout, |w| Ok(csv_io::write_csv(&out, w, &missing_token)?))?;
            let manifest = manifest.or_else(|| output.output.as_ref().map(|o| o.with_extension("manifest.json")));
            if let Some(path) = manifest {
                let mut w = BufWriter::new(File::create(&path)?);
                serde_json::to_writer_pretty(&mut w, &truth).map_err(io::Error::from)?;
                writeln!(w)?;
                w.flush()?;
            }
            Ok(())
        }
        Command::ExportNetwork {
            input,
            filter,
            aggregate,
            output,
        } => {
            let d = input.load()?;
            let a = Analysis::compute(&d)?;
            let filter = filter.unwrap_or_default().with_aggregation(aggregate);
            let net = export_network(&d, &a.matrices(), &filter)?;
            net.write_dir(&output)?;
            Ok(())
        }
        Command::Serve {
            bind,
            ui_dir,
            datasets,
            ingest,
        } => {
            let config = ingest.config();
            let preload = datasets
                .iter()
                .map(|p| csv_io::load_csv(p, &config))
                .collect::<Result<Vec<_>, _>>()?;
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("missq: listening on http://{bind}");
            runtime.block_on(missq_server::serve(missq_server::ServerConfig { bind, ui_dir }, preload))?;
            Ok(())
        }
    }
}

fn with_output(
    output: &OutputArgs,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &output.output {
        Some(path) => {
            let mut w = BufWriter::new(create(path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn create(path: &Path) -> io::Result<File> {
    File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
