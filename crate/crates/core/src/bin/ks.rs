//! `ks` — command-line front end: norms of stored fields, verification
//! suites, and report merging.
//!
//! Exit codes: 0 success, 2 I/O failure, 3 usage error, 4 verification
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kato_sobolev::error::KsError;
use kato_sobolev::io::field_read;
use kato_sobolev::kato::{kato_norm, KatoNormSpec, PNorm, TranslationSet};
use kato_sobolev::report::{merge, ReportDoc};
use kato_sobolev::sobolev::h_norm;
use kato_sobolev::suites::{named_window, run_suite, SuiteConfig, SUITE_NAMES};
use kato_sobolev::weights::BlockOrder;

const EXIT_IO: u8 = 2;
const EXIT_USAGE: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "ks", version, about = "Kato-Sobolev norm toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the H^s norm of a stored field.
    Norm {
        /// Field file (KSF1 format).
        #[arg(long)]
        input: PathBuf,
        /// Sobolev orders, one per block.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<f64>,
    },
    /// Print a windowed K_p^s norm of a stored field.
    KatoNorm {
        /// Field file (KSF1 format).
        #[arg(long)]
        input: PathBuf,
        /// Sobolev orders, one per block.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        s: Vec<f64>,
        /// Translation exponent: a positive number or `inf`.
        #[arg(long, default_value = "2")]
        p: String,
        /// Window name: cell, wide, or partition.
        #[arg(long, default_value = "cell")]
        window: String,
        /// Translation set: `lattice` or `subgrid:K` (every K-th sample).
        #[arg(long, default_value = "lattice")]
        mode: String,
    },
    /// Run a verification suite and emit a JSON report.
    Verify {
        /// Suite name.
        suite: String,
        /// Per-axis sample counts.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        /// Per-axis box lengths.
        #[arg(long = "box", value_delimiter = ',')]
        box_l: Option<Vec<f64>>,
        /// Block dimensions.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        /// RNG seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Corpus size.
        #[arg(long)]
        size: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Contour quadrature nodes per circle factor.
        #[arg(long = "quadrature-nodes", default_value_t = 64)]
        quadrature_nodes: usize,
    },
    /// Merge several suite reports into one document.
    ReportMerge {
        /// Report files to merge.
        paths: Vec<PathBuf>,
        /// Write the merged document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(e: &KsError) -> u8 {
    match e {
        KsError::Io(_) | KsError::Format(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn parse_p(text: &str) -> Result<PNorm, KsError> {
    if text.eq_ignore_ascii_case("inf") {
        return Ok(PNorm::Inf);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| KsError::Check(format!("cannot parse p from `{text}`")))?;
    if !(v >= 1.0 && v.is_finite()) {
        return Err(KsError::Check(format!("p must be in [1, inf], got {v}")));
    }
    Ok(PNorm::Finite(v))
}

fn parse_mode(text: &str, dim: usize) -> Result<TranslationSet, KsError> {
    if text == "lattice" {
        return Ok(TranslationSet::Lattice {
            spacing: vec![1; dim],
        });
    }
    if let Some(step) = text.strip_prefix("subgrid:") {
        let k: usize = step
            .parse()
            .map_err(|_| KsError::Check(format!("cannot parse subgrid step from `{text}`")))?;
        if k == 0 {
            return Err(KsError::Check("subgrid step must be positive".into()));
        }
        return Ok(TranslationSet::SubGrid { step: vec![k; dim] });
    }
    Err(KsError::Check(format!(
        "unknown mode `{text}` (expected lattice or subgrid:K)"
    )))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), KsError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(KsError::Io),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8, KsError> {
    match cli.cmd {
        Cmd::Norm { input, s } => {
            let field = field_read(&input)?;
            let order = BlockOrder::for_grid(&field.grid, &s)?;
            println!("{:.11e}", h_norm(&field, &order)?);
            Ok(0)
        }
        Cmd::KatoNorm {
            input,
            s,
            p,
            window,
            mode,
        } => {
            let field = field_read(&input)?;
            let order = BlockOrder::for_grid(&field.grid, &s)?;
            let spec = KatoNormSpec {
                s: order,
                p: parse_p(&p)?,
                window: named_window(&field.grid, &window)?,
                translations: parse_mode(&mode, field.grid.dim())?,
            };
            println!("{:.11e}", kato_norm(&field, &spec)?);
            Ok(0)
        }
        Cmd::Verify {
            suite,
            grid,
            box_l,
            blocks,
            seed,
            size,
            out,
            quadrature_nodes,
        } => {
            if !SUITE_NAMES.contains(&suite.as_str()) {
                eprintln!(
                    "ks: unknown suite `{suite}` (available: {})",
                    SUITE_NAMES.join(", ")
                );
                return Ok(EXIT_USAGE);
            }
            let cfg = SuiteConfig {
                grid_n: grid,
                box_l,
                blocks,
                seed,
                size,
                nodes: quadrature_nodes,
            };
            let doc = run_suite(&suite, &cfg)?;
            write_or_print(&out, &doc.to_json()?)?;
            if doc.passed() {
                Ok(0)
            } else {
                eprintln!("ks: suite `{suite}` has failing cases");
                Ok(EXIT_VERIFY)
            }
        }
        Cmd::ReportMerge { paths, out } => {
            if paths.is_empty() {
                return Err(KsError::Check("no reports given".into()));
            }
            let mut docs = Vec::with_capacity(paths.len());
            for p in &paths {
                let text = std::fs::read_to_string(p).map_err(KsError::Io)?;
                let doc = ReportDoc::from_json(&text)
                    .map_err(|e| KsError::Check(format!("{}: {e}", p.display())))?;
                docs.push(doc);
            }
            let merged = merge(&docs)?;
            let mut text = serde_json::to_string_pretty(&merged)
                .map_err(|e| KsError::Format(e.to_string()))?;
            text.push('\n');
            write_or_print(&out, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("KS_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            if k > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // keep clap's help/version on stdout with success, everything
            // else is a usage error
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("ks: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
