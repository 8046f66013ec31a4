use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slrep_core::clebsch::{cg_tables, override_tables};
use slrep_core::decontract::{SigmaLabels, SigmaVariant};
use slrep_core::io::{fmt_real, generators_document, CgTableJson, JobConfig};
use slrep_core::labels::{fmt_twice, parse_twice, HighestWeight};
use slrep_core::linalg::C64;
use slrep_core::verify::{check_contraction_limit, default_suite, summary_table, CheckReport};
use slrep_core::Error;

/// Exit status when every check passes.
const EXIT_PASS: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;
/// The cutoff leaves no interior states to check.
const EXIT_EMPTY_INTERIOR: u8 = 3;

#[derive(Parser)]
#[command(name = "slrep", version, about = "sl(n,R) and su(n) generators in the Spin(n) basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write M_ab, K_ab and T_ab with a basis manifest.
    Generators(Job),
    /// Write one Clebsch-Gordan table `hw1 x hw2 -> hw3`.
    Cg(CgArgs),
    /// Run the verification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Fit the contraction-limit slope in the defining su(n) rep.
    ContractLimit(LimitArgs),
}

#[derive(Args, Clone)]
struct Job {
    #[arg(long)]
    n: usize,
    /// Cutoff on the first so(n) label, e.g. `4` or `5/2`.
    #[arg(long, default_value = "2")]
    cutoff: String,
    #[arg(long)]
    spinorial: bool,
    /// sigma-tilde values as `re,im;re,im;...` (n-1 pairs).
    #[arg(long)]
    sigma: Option<String>,
    /// Draw sigma-tilde at random when `--sigma` is absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct CgArgs {
    #[arg(long)]
    n: usize,
    /// Labels as comma-separated values, e.g. `1` or `3/2,1/2`.
    #[arg(long)]
    hw1: String,
    #[arg(long)]
    hw2: String,
    #[arg(long)]
    hw3: String,
    /// Outer-multiplicity copy, 1-based.
    #[arg(long, default_value_t = 1)]
    gamma: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    job: Job,
    /// Flip the phase of one coupled state in the vector x symmetric tables
    /// before checking. The suite is expected to fail.
    #[arg(long, hide = true)]
    debug_corrupt_cg_phase: bool,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Comma-separated epsilon values.
    #[arg(long, default_value = "1e-1,1e-2,1e-3,1e-4")]
    eps: String,
    #[arg(long, default_value_t = 0.01)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    /// Human-readable table (verify and contract-limit only).
    Table,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Table => "table",
        }
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn parse_sigma(s: &str, n: usize) -> CliResult<Vec<C64>> {
    let vals = s
        .split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (re, im) = p.split_once(',').ok_or_else(|| format!("sigma entry {p:?} is not re,im"))?;
            Ok(C64::new(re.trim().parse()?, im.trim().parse()?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    if vals.len() != n - 1 {
        return Err(format!("--sigma needs {} pairs for n = {n}, got {}", n - 1, vals.len()).into());
    }
    Ok(vals)
}

fn parse_hw(n: usize, s: &str) -> CliResult<HighestWeight> {
    let twice = s.split(',').map(|p| parse_twice(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(HighestWeight::from_twice(n, twice)?)
}

impl Job {
    fn check(&self) -> CliResult<()> {
        if !(3..=6).contains(&self.n) {
            return Err(format!("n must be in 3..=6, got {}", self.n).into());
        }
        Ok(())
    }

    fn cutoff_twice(&self) -> CliResult<i32> {
        Ok(parse_twice(&self.cutoff)?)
    }

    fn sigma_tilde(&self) -> CliResult<SigmaLabels> {
        Ok(match (&self.sigma, self.seed) {
            (Some(s), _) => SigmaLabels::new(SigmaVariant::SigmaTilde, parse_sigma(s, self.n)?),
            (None, Some(seed)) => SigmaLabels::random(self.n, SigmaVariant::SigmaTilde, seed),
            (None, None) => SigmaLabels::zeros(self.n, SigmaVariant::SigmaTilde),
        })
    }

    fn config(&self, command: &str, sigma: &SigmaLabels) -> CliResult<JobConfig> {
        Ok(JobConfig {
            command: command.into(),
            n: self.n,
            cutoff: fmt_twice(self.cutoff_twice()?),
            spinorial: self.spinorial,
            sigma: Some(sigma.values.iter().map(|z| [z.re, z.im]).collect()),
            seed: self.seed,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            format: self.format.name().into(),
        })
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// `foo.csv` -> `foo.basis.csv`.
fn sibling(p: &Path, suffix: &str) -> PathBuf {
    let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    p.with_file_name(format!("{stem}.{suffix}"))
}

fn generators(job: &Job) -> CliResult<()> {
    job.check()?;
    let sigma = job.sigma_tilde()?;
    let doc = generators_document(job.config("generators", &sigma)?, &sigma)?;
    match job.format {
        Format::Json => emit(job.out.as_deref(), &doc.to_json()),
        Format::Csv => {
            let (ops, manifest) = doc.to_csv()?;
            let out = job.out.as_deref().ok_or("--format csv needs --out")?;
            std::fs::write(out, ops)?;
            std::fs::write(sibling(out, "basis.csv"), manifest)?;
            std::fs::write(sibling(out, "meta.json"), serde_json::to_string_pretty(&doc.meta)?)?;
            Ok(())
        }
        Format::Table => Err("generators writes json or csv".into()),
    }
}

fn cg(args: &CgArgs) -> CliResult<()> {
    let (h1, h2, h3) = (parse_hw(args.n, &args.hw1)?, parse_hw(args.n, &args.hw2)?, parse_hw(args.n, &args.hw3)?);
    let table = slrep_core::clebsch::cg_table(&h1, &h2, &h3, args.gamma)?;
    let doc = CgTableJson::from_table(&table);
    match args.format {
        Format::Json => emit(args.out.as_deref(), &serde_json::to_string(&doc)?),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["i1", "i2", "i3", "re", "im"])?;
            for (i1, i2, i3, [re, im]) in &doc.entries {
                w.write_record([i1.to_string(), i2.to_string(), i3.to_string(), fmt_real(re.0), fmt_real(im.0)])?;
            }
            emit(args.out.as_deref(), &String::from_utf8(w.into_inner()?)?)
        }
        Format::Table => Err("cg writes json or csv".into()),
    }
}

fn corrupt_cg_phase(n: usize) -> CliResult<()> {
    let (v, s) = (HighestWeight::vector(n), HighestWeight::symmetric(n));
    let mut tables = cg_tables(&v, &s, &v)?.as_ref().clone();
    let m = &mut tables[0].matrix;
    let col = -m.column(0);
    m.set_column(0, &col);
    override_tables(&v, &s, &v, tables);
    Ok(())
}

fn write_reports(reports: &[CheckReport], out: Option<&Path>, format: Format) -> CliResult<()> {
    let text = match format {
        Format::Table => summary_table(reports),
        _ => reports.iter().map(|r| r.json_line() + "\n").collect(),
    };
    emit(out, &text)?;
    if format != Format::Table {
        eprint!("{}", summary_table(reports));
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> CliResult<u8> {
    let job = &args.job;
    job.check()?;
    if args.debug_corrupt_cg_phase {
        corrupt_cg_phase(job.n)?;
    }
    let sigma = job.sigma_tilde()?;
    let reports = default_suite(job.n, job.cutoff_twice()?, job.spinorial, &sigma)?;
    write_reports(&reports, job.out.as_deref(), job.format)?;
    Ok(if reports.iter().all(|r| r.pass) { EXIT_PASS } else { EXIT_FAIL })
}

fn contract_limit(args: &LimitArgs) -> CliResult<u8> {
    let eps = args
        .eps
        .split(',')
        .map(|e| e.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()?;
    let rep = check_contraction_limit(args.n, &eps, args.tol)?;
    write_reports(std::slice::from_ref(&rep), args.out.as_deref(), args.format)?;
    Ok(if rep.pass { EXIT_PASS } else { EXIT_FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generators(job) => generators(job).map(|_| EXIT_PASS),
        Command::Cg(args) => cg(args).map(|_| EXIT_PASS),
        Command::Verify(args) => verify(args),
        Command::ContractLimit(args) => contract_limit(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("slrep: {e}");
            let empty = matches!(e.downcast_ref::<Error>(), Some(Error::EmptyInterior { .. }));
            ExitCode::from(if empty { EXIT_EMPTY_INTERIOR } else { EXIT_ERROR })
        }
    }
}
