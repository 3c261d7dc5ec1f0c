use std::fs::{self, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use carpetlab::census::{self, CensusOptions, DEFAULT_MAX_N};
use carpetlab::classify::{Options, Pipeline};
use carpetlab::geometry::{build_level_grid, grid_connected, render_raster};
use carpetlab::io::{self as cio, InputFormat};
use carpetlab::metrics::connected;
use carpetlab::{build_hata, DigitSet, Error, Result, DEFAULT_CELL_CAP};

#[derive(Parser)]
#[command(name = "carpetlab", version, about = "Topology of Sierpinski-type carpets and sponges")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Highest Hata-graph level used by the cut-point ladder.
    #[arg(long, global = true, default_value_t = 4)]
    kmax: usize,

    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Report cut points when every ladder bound holds through --kmax.
    #[arg(long, global = true)]
    assume_bounded_criterion: bool,

    /// Cap on the number of cells of any level-k structure
    /// (default: $CARPETLAB_MEMCAP or 2^26).
    #[arg(long, global = true)]
    memcap: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Grid,
    Json,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Grid => InputFormat::Grid,
            Format::Json => InputFormat::Json,
        }
    }
}

#[derive(Args)]
struct Input {
    /// Digit set file, or - for standard input.
    #[arg(long, default_value = "-")]
    input: String,

    /// Input format; detected from the first character when omitted.
    #[arg(long, alias = "input-format", value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct GraphInput {
    /// Digit set file, or - for standard input.
    #[arg(long, default_value = "-")]
    input: String,

    /// Input format; detected from the first character when omitted.
    #[arg(long, value_enum)]
    input_format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Full classification.
    Classify {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        json: bool,
    },
    /// Prefractal and Hata-graph connectedness.
    Connected {
        #[command(flatten)]
        input: Input,
    },
    /// chi of the level-k Hata graph.
    Chi {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
    },
    /// Fragility test with its witness.
    Fragility {
        #[command(flatten)]
        input: Input,
    },
    /// Local cut point search at levels 1 and 2.
    Localcut {
        #[command(flatten)]
        input: Input,
    },
    /// Export the level-k Hata graph.
    Hata {
        #[command(flatten)]
        input: GraphInput,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
        /// Label singleton edges with their intersection point.
        #[arg(long)]
        labels: bool,
    },
    /// Render the prefractal Q_n as PNG or PGM (chosen by extension).
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every digit set of the n x n grid.
    Census {
        #[arg(long)]
        n: u32,
        /// One representative per symmetry orbit.
        #[arg(long)]
        symmetry_reduce: bool,
        /// JSON-lines output; an existing file is resumed.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only sets of this size.
        #[arg(long)]
        size: Option<usize>,
        /// Record per-set wall time (makes output non-reproducible).
        #[arg(long)]
        timings: bool,
        /// Check the connected-size gap instead of classifying.
        #[arg(long)]
        gap: bool,
        /// Largest grid side allowed.
        #[arg(long, default_value_t = DEFAULT_MAX_N)]
        max_n: u32,
    },
}

fn cell_cap(flag: Option<u64>) -> Result<u64> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var("CARPETLAB_MEMCAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("CARPETLAB_MEMCAP must be an integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_CELL_CAP),
    }
}

fn read_set(path: &str, format: Option<Format>) -> Result<DigitSet> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path)?;
    }
    cio::parse(&text, format.map(Into::into))
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    let opts = Options {
        kmax: cli.kmax,
        cell_cap: cell_cap(cli.memcap)?,
        assume_bounded: cli.assume_bounded_criterion,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Classify { input, json } => {
            let ds = read_set(&input.input, input.format)?;
            let report = Pipeline::new(&ds, opts).classify()?;
            if json {
                out.write_all(cio::report_json(&ds, &report).as_bytes())?;
            } else {
                out.write_all(cio::report_text(&ds, &report).as_bytes())?;
            }
        }
        Command::Connected { input } => {
            let ds = read_set(&input.input, input.format)?;
            for n in 1..=ds.dim() + 1 {
                match build_level_grid(&ds, n, opts.cell_cap) {
                    Ok(g) => {
                        let c = if grid_connected(&g) { "connected" } else { "disconnected" };
                        writeln!(out, "Q_{n}: {c}")?;
                    }
                    Err(Error::ResourceExhausted { .. }) => writeln!(out, "Q_{n}: skipped (cell cap)")?,
                    Err(e) => return Err(e),
                }
            }
            let c = connected(&build_hata(&ds, 1, false, opts.cell_cap)?);
            let word = if c { "connected" } else { "disconnected" };
            writeln!(out, "Gamma_1: {word}")?;
            writeln!(out, "verdict: {word}")?;
        }
        Command::Chi { input, k } => {
            let ds = read_set(&input.input, input.format)?;
            let mut pipe = Pipeline::new(&ds, opts);
            if !pipe.is_connected()? {
                return Err(Error::Domain("the digit set is not connected".into()));
            }
            writeln!(out, "{}", pipe.chi(k)?)?;
        }
        Command::Fragility { input } => {
            let ds = read_set(&input.input, input.format)?;
            let f = Pipeline::new(&ds, opts).fragility()?;
            out.write_all(cio::fragility_text(&f).as_bytes())?;
        }
        Command::Localcut { input } => {
            let ds = read_set(&input.input, input.format)?;
            let l = Pipeline::new(&ds, opts).local_cut()?;
            out.write_all(cio::local_cut_text(&ds, &l).as_bytes())?;
        }
        Command::Hata { input, k, format, labels } => {
            let ds = read_set(&input.input, input.input_format)?;
            let g = build_hata(&ds, k, labels, opts.cell_cap)?;
            let text = match format {
                GraphFormat::Dot => cio::hata_dot(&ds, &g),
                GraphFormat::Json => cio::hata_json(&ds, &g),
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Render { input, level, out: path } => {
            let ds = read_set(&input.input, input.format)?;
            let raster = render_raster(&ds, level, opts.cell_cap)?;
            let bytes = match path.extension().and_then(|e| e.to_str()) {
                Some("png") => cio::write_png(&raster)?,
                Some("pgm") => cio::write_pgm(&raster),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "{}: output must end in .png or .pgm",
                        path.display()
                    )))
                }
            };
            fs::write(&path, bytes)?;
        }
        Command::Census { n, symmetry_reduce, out: path, size, timings, gap, max_n } => {
            if gap {
                let report = census::verify_gap(n, max_n)?;
                for (size, count) in &report.connected_by_size {
                    writeln!(out, "size {size}: {count} connected")?;
                }
                for bad in report.gap_violations.iter().chain(&report.stray_lines) {
                    let s: Vec<String> = bad.iter().map(|d| d.to_string()).collect();
                    writeln!(out, "counterexample: {}", s.join(" "))?;
                }
                if !report.missing_sizes.is_empty() {
                    writeln!(out, "missing sizes: {:?}", report.missing_sizes)?;
                }
                writeln!(out, "gap: {}", if report.holds() { "holds" } else { "fails" })?;
                return Ok(if report.holds() { 0 } else { 2 });
            }
            let sets = census::enumerate_digit_sets(n, size, symmetry_reduce, max_n)?;
            let copts = CensusOptions {
                pipeline: opts,
                timings,
                ..CensusOptions::default()
            };
            let violations = match path {
                Some(p) => run_census_file(&sets, &copts, &p)?,
                None => {
                    let mut buf = Vec::new();
                    census::census_run(&sets, &copts, None, &mut buf)?;
                    out.write_all(&buf)?;
                    count_violations(&buf)
                }
            };
            if violations > 0 {
                eprintln!("carpetlab: {violations} records carry invariant violations");
                return Ok(2);
            }
        }
    }
    out.flush()?;
    Ok(0)
}

fn count_violations(buf: &[u8]) -> usize {
    String::from_utf8_lossy(buf)
        .lines()
        .filter(|l| l.contains("\"violations\""))
        .count()
}

fn run_census_file(sets: &[DigitSet], opts: &CensusOptions, path: &Path) -> Result<usize> {
    let last = census::resume_point(path)?;
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    census::census_run(sets, opts, last.as_deref(), &mut file)?;
    Ok(count_violations(&fs::read(path)?))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("carpetlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
