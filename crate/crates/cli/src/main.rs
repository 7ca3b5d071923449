//! Command-line runner: every experiment and primitive behind stable
//! subcommands with JSON/CSV/markdown output and budget controls.
//!
//! Exit codes: 0 success (or completed evidence run), 1 assertion failure,
//! 2 configuration error, 3 budget exceeded.

mod config;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cokernel_core::autgroup::{aut_order, aut_order_bruteforce};
use cokernel_core::counting::{ScanOptions, DEFAULT_BUDGET};
use cokernel_core::experiments::{
    self, ExperimentResult, ExtResidueSelection, FiberSelection, RunMode, TwistSampling,
    DEFAULT_SEED,
};
use cokernel_core::matrix::{self, ParsedMatrix};
use cokernel_core::partition::ModuleType;
use cokernel_core::report;
use cokernel_core::ring::{ExtRing, ZmodRing};
use cokernel_core::snf::{cokernel_type, smith_normal_form};
use cokernel_core::{Error as CoreError, RingParams};
use config::FileConfig;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "cokernel", version, about = "Exact cokernel statistics over truncated p-adic rings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named verification experiment
    Verify {
        #[command(subcommand)]
        experiment: VerifyCmd,
    },
    /// Smith normal form, cokernel type, and transform check of one matrix
    Snf(SnfArgs),
    /// Full-space cokernel distribution with closed-form and limit columns
    Distribution(DistributionArgs),
    /// Automorphism-group order of a module type (closed form vs oracle)
    AutOrder(AutOrderArgs),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Per-fiber lift counts against the closed form, across residues
    #[command(name = "theorem-main")]
    TheoremMain(TheoremMainArgs),
    /// The two cokernel computations agree on the full matrix space
    #[command(name = "lemma-lee")]
    LemmaLee(PlainArgs),
    /// Fiber counts are independent of the twist layers
    #[command(name = "lemma-final")]
    LemmaFinal(LemmaFinalArgs),
    /// Explicit product maps are fiber bijections preserving types
    #[command(name = "final1-map")]
    Final1Map(Final1MapArgs),
    /// Lift counts over R are independent of the level-N residue
    #[command(name = "lemma-final3")]
    LemmaFinal3(LemmaFinal3Args),
    /// R-matrix lift counts against their closed form
    #[command(name = "lemma-r")]
    LemmaR(LemmaRArgs),
    /// Full-space counts factor exactly through per-fiber counts
    #[command(name = "geo-identity")]
    GeoIdentity(GeoArgs),
    /// Degree-one specialization of the probability display
    #[command(name = "fw-case")]
    FwCase(FwArgs),
    /// Joint counts for several moduli (evidence mode)
    #[command(name = "conjecture")]
    Conjecture(ConjectureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

/// Flags shared by every subcommand; a key=value config file fills in
/// whatever the flags leave unset.
#[derive(Args, Clone)]
struct CommonArgs {
    /// Prime p
    #[arg(long)]
    p: Option<u64>,
    /// Truncation exponent N; the scalar modulus is p^(N+1)
    #[arg(long = "N")]
    trunc: Option<u32>,
    /// Monic polynomial, ascending coefficients: "1,1,1" = 1 + t + t^2
    #[arg(long)]
    poly: Option<String>,
    /// Matrix size
    #[arg(long)]
    n: Option<usize>,
    /// Module type as a partition, e.g. "2,1"; "" is the trivial module
    #[arg(long = "G")]
    g: Option<String>,
    /// Evaluation budget (default 2^32 candidate matrices per operation)
    #[arg(long)]
    budget: Option<u128>,
    /// Worker threads; results do not depend on this
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for sampled twists/pairs; recorded in the report
    #[arg(long)]
    seed: Option<u64>,
    /// Output format
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// key=value file merged under the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Treat vacuous fibers as hard errors
    #[arg(long)]
    strict: bool,
}

struct Resolved {
    params: Option<RingParams>,
    n: Option<usize>,
    g: Option<ModuleType>,
    opts: ScanOptions,
    seed: u64,
    format: OutputFormat,
    output: Option<PathBuf>,
    file: FileConfig,
}

impl CommonArgs {
    fn resolve(&self) -> Result<Resolved> {
        let file = FileConfig::load(self.config.as_deref())?;
        let p = file.resolve(self.p, "p")?;
        let trunc = file.resolve(self.trunc, "N")?;
        let poly = file.resolve(self.poly.clone(), "poly")?;
        let params = match (p, trunc, &poly) {
            (Some(p), Some(trunc), Some(poly)) => {
                Some(RingParams::from_poly_str(p, trunc, poly).map_err(core_to_anyhow)?)
            }
            _ => None,
        };
        let g = match file.resolve(self.g.clone(), "G")? {
            Some(s) => Some(s.parse::<ModuleType>().map_err(core_to_anyhow)?),
            None => None,
        };
        let opts = ScanOptions {
            budget: file.resolve(self.budget, "budget")?.unwrap_or(DEFAULT_BUDGET),
            workers: file
                .resolve(self.workers, "workers")?
                .unwrap_or_else(|| ScanOptions::default().workers),
            strict: self.strict || file.get("strict") == Some("true"),
        };
        if opts.budget < 1 {
            bail!("budget must be at least 1");
        }
        if opts.workers < 1 {
            bail!("workers must be at least 1");
        }
        Ok(Resolved {
            params,
            n: file.resolve(self.n, "n")?,
            g,
            opts,
            seed: file.resolve(self.seed, "seed")?.unwrap_or(DEFAULT_SEED),
            format: file.resolve(self.format, "format")?.unwrap_or(OutputFormat::Json),
            output: self.output.clone().or_else(|| file.get("output").map(PathBuf::from)),
            file,
        })
    }
}

impl Resolved {
    fn params(&self) -> Result<&RingParams> {
        self.params
            .as_ref()
            .ok_or_else(|| anyhow!("missing --p, --N, or --poly"))
    }

    fn n(&self) -> Result<usize> {
        self.n.ok_or_else(|| anyhow!("missing --n"))
    }

    fn g(&self) -> Result<&ModuleType> {
        self.g.as_ref().ok_or_else(|| anyhow!("missing --G"))
    }
}

#[derive(Args)]
struct PlainArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct TheoremMainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// "all" or a JSON array of residue matrices
    #[arg(long)]
    fibers: Option<String>,
}

#[derive(Args)]
struct LemmaFinalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of sampled twist layers, or "exhaustive"
    #[arg(long)]
    twists: Option<String>,
}

#[derive(Args)]
struct Final1MapArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sampled twist/fiber combinations per map
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct LemmaFinal3Args {
    #[command(flatten)]
    common: CommonArgs,
    /// Sampled residue pairs
    #[arg(long)]
    pairs: Option<usize>,
}

#[derive(Args)]
struct LemmaRArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// "all" (default) or a JSON coefficient matrix over the residue field
    #[arg(long)]
    zbar: Option<String>,
}

#[derive(Args)]
struct GeoArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FwArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ConjectureArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Semicolon-separated modulus polynomials, e.g. "0,1;1,1"
    #[arg(long)]
    polys: Option<String>,
    /// Semicolon-separated target types, e.g. "1;"
    #[arg(long = "Gs")]
    gs: Option<String>,
}

#[derive(Args)]
struct SnfArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Path to a JSON matrix file, or an inline JSON matrix
    #[arg(long)]
    matrix: Option<String>,
}

#[derive(Args)]
struct DistributionArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated list of matrix sizes, e.g. "1,2,3"
    #[arg(long = "n-list")]
    n_list: Option<String>,
}

#[derive(Args)]
struct AutOrderArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Residue field size (a prime power)
    #[arg(long)]
    q: Option<u64>,
}

fn core_to_anyhow(e: CoreError) -> anyhow::Error {
    anyhow::Error::new(e)
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    if let Some(core) = e.downcast_ref::<CoreError>() {
        return match core {
            CoreError::BudgetExceeded { .. } => EXIT_BUDGET,
            CoreError::InvalidFiber { .. } => EXIT_FAIL,
            _ => EXIT_CONFIG,
        };
    }
    if e.to_string().contains("budget exceeded") {
        EXIT_BUDGET
    } else {
        EXIT_CONFIG
    }
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream is not an error worth reporting
            let _ = writeln!(stdout, "{text}");
        }
    }
    Ok(())
}

fn emit_experiment(result: &ExperimentResult, r: &Resolved) -> Result<u8> {
    let text = match r.format {
        OutputFormat::Json => report::to_canonical_json(result).map_err(core_to_anyhow)?,
        OutputFormat::Csv => report::experiment_to_csv(result).map_err(core_to_anyhow)?,
        OutputFormat::Md => report::experiment_to_markdown(result),
    };
    emit(&text, r.output.as_ref())?;
    Ok(match result.mode {
        RunMode::Evidence => 0,
        RunMode::Verify => {
            if result.overall_pass {
                0
            } else {
                EXIT_FAIL
            }
        }
    })
}

fn run_verify(cmd: &VerifyCmd) -> Result<u8> {
    match cmd {
        VerifyCmd::TheoremMain(args) => {
            let r = args.common.resolve()?;
            let params = r.params()?;
            let fibers = match r
                .file
                .resolve(args.fibers.clone(), "fibers")?
                .as_deref()
                .unwrap_or("all")
            {
                "all" => FiberSelection::All,
                json => {
                    let v: serde_json::Value =
                        serde_json::from_str(json).context("parsing --fibers JSON")?;
                    let list = v
                        .as_array()
                        .ok_or_else(|| anyhow!("--fibers must be a JSON array of matrices"))?
                        .iter()
                        .map(|m| {
                            matrix::zmod_matrix_from_json(m, &params.reduced(1))
                                .map_err(core_to_anyhow)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    FiberSelection::Explicit(list)
                }
            };
            let result =
                experiments::verify_theorem_main(params, r.n()?, r.g()?, &fibers, &r.opts)
                    .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::LemmaLee(args) => {
            let r = args.common.resolve()?;
            let result = experiments::verify_lemma_lee(r.params()?, r.n()?, &r.opts)
                .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::LemmaFinal(args) => {
            let r = args.common.resolve()?;
            let sampling = match r
                .file
                .resolve(args.twists.clone(), "twists")?
                .as_deref()
                .unwrap_or("20")
            {
                "exhaustive" => TwistSampling::Exhaustive,
                k => TwistSampling::Sampled(k.parse().context("parsing --twists")?),
            };
            let result = experiments::verify_lemma_final(
                r.params()?,
                r.n()?,
                r.g()?,
                sampling,
                r.seed,
                &r.opts,
            )
            .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::Final1Map(args) => {
            let r = args.common.resolve()?;
            let samples = r.file.resolve(args.samples, "samples")?.unwrap_or(3);
            let result =
                experiments::verify_final1_map(r.params()?, r.n()?, samples, r.seed, &r.opts)
                    .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::LemmaFinal3(args) => {
            let r = args.common.resolve()?;
            let pairs = r.file.resolve(args.pairs, "pairs")?.unwrap_or(10);
            let result = experiments::verify_lemma_final3(
                r.params()?,
                r.n()?,
                r.g()?,
                pairs,
                r.seed,
                &r.opts,
            )
            .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::LemmaR(args) => {
            let r = args.common.resolve()?;
            let params = r.params()?;
            let selection = match r
                .file
                .resolve(args.zbar.clone(), "zbar")?
                .as_deref()
                .unwrap_or("all")
            {
                "all" => ExtResidueSelection::AllValid,
                json => {
                    let v: serde_json::Value =
                        serde_json::from_str(json).context("parsing --zbar JSON")?;
                    ExtResidueSelection::Explicit(
                        matrix::ext_matrix_from_json(&v, params).map_err(core_to_anyhow)?,
                    )
                }
            };
            let result =
                experiments::verify_lemma_r(params, r.n()?, r.g()?, &selection, &r.opts)
                    .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::GeoIdentity(args) => {
            let r = args.common.resolve()?;
            let result =
                experiments::verify_geo_identity(r.params()?, r.n()?, r.g()?, &r.opts)
                    .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::FwCase(args) => {
            let r = args.common.resolve()?;
            let p = r.file.require(args.common.p, "p")?;
            let trunc = r.file.require(args.common.trunc, "N")?;
            let result = experiments::verify_fw_case(p, trunc, r.n()?, r.g()?, &r.opts)
                .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
        VerifyCmd::Conjecture(args) => {
            let r = args.common.resolve()?;
            let p = r.file.require(args.common.p, "p")?;
            let trunc = r.file.require(args.common.trunc, "N")?;
            let polys_raw = r
                .file
                .require(args.polys.clone(), "polys")
                .context("missing --polys")?;
            let gs_raw = r.file.require(args.gs.clone(), "Gs")?;
            let polys: Vec<Vec<i64>> = polys_raw
                .split(';')
                .map(|s| {
                    s.split(',')
                        .map(|c| c.trim().parse::<i64>().context("polynomial coefficient"))
                        .collect::<Result<Vec<i64>>>()
                })
                .collect::<Result<_>>()?;
            let gs: Vec<ModuleType> = gs_raw
                .split(';')
                .map(|s| s.parse::<ModuleType>().map_err(core_to_anyhow))
                .collect::<Result<_>>()?;
            let result = experiments::explore_conjecture(p, trunc, &polys, &gs, r.n()?, &r.opts)
                .map_err(core_to_anyhow)?;
            emit_experiment(&result, &r)
        }
    }
}

fn run_snf(args: &SnfArgs) -> Result<u8> {
    let r = args.common.resolve()?;
    let params = r.params()?;
    let raw = r
        .file
        .require(args.matrix.clone(), "matrix")
        .context("missing --matrix")?;
    let text = if raw.trim_start().starts_with('[') {
        raw
    } else {
        std::fs::read_to_string(&raw).with_context(|| format!("reading matrix file {raw}"))?
    };
    let v: serde_json::Value = serde_json::from_str(&text).context("parsing matrix JSON")?;
    let parsed = matrix::matrix_from_json(&v, params).map_err(core_to_anyhow)?;

    let (exponents, module_type, verified, base) = match &parsed {
        ParsedMatrix::Zmod(m) => {
            let ring = ZmodRing::new(params);
            let snf = smith_normal_form(&ring, m);
            let t = cokernel_type(&ring, m);
            let ok = snf.verify(&ring, m);
            (snf.exponents, t, ok, "zmod")
        }
        ParsedMatrix::Ext(m) => {
            let ring = ExtRing::new(params);
            let snf = smith_normal_form(&ring, m);
            let t = cokernel_type(&ring, m);
            let ok = snf.verify(&ring, m);
            (snf.exponents, t, ok, "ext")
        }
    };
    let report_value = serde_json::json!({
        "p": params.p(),
        "N": params.trunc(),
        "poly": params.poly_string(),
        "base_ring": base,
        "diagonal_exponents": exponents,
        "module_type": module_type.to_string(),
        "transforms_verified": verified,
    });
    let text = match r.format {
        OutputFormat::Json => {
            report::to_canonical_json(&report_value).map_err(core_to_anyhow)?
        }
        OutputFormat::Csv => {
            let exps: Vec<String> = exponents.iter().map(|e| e.to_string()).collect();
            format!(
                "base_ring,diagonal_exponents,module_type,transforms_verified\n{},{:?},{},{}\n",
                base,
                exps.join(" "),
                module_type,
                verified
            )
        }
        OutputFormat::Md => format!(
            "## smith normal form\n\nbase ring: {base}\n\nexponents: {exponents:?}\n\nmodule type: [{module_type}]\n\ntransforms verified: {verified}\n"
        ),
    };
    emit(&text, r.output.as_ref())?;
    Ok(if verified { 0 } else { EXIT_FAIL })
}

fn run_distribution(args: &DistributionArgs) -> Result<u8> {
    let r = args.common.resolve()?;
    let params = r.params()?;
    let ns: Vec<usize> = match r.file.resolve(args.n_list.clone(), "n-list")? {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<usize>().context("parsing --n-list"))
            .collect::<Result<_>>()?,
        None => vec![r.n()?],
    };
    let mut tables = Vec::new();
    for n in ns {
        tables.push(experiments::distribution_table(params, n, &r.opts).map_err(core_to_anyhow)?);
    }
    let text = match r.format {
        OutputFormat::Json => report::to_canonical_json(&tables).map_err(core_to_anyhow)?,
        OutputFormat::Csv => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                let block = report::distribution_to_csv(t).map_err(core_to_anyhow)?;
                if i == 0 {
                    out.push_str(&block);
                } else {
                    // skip the repeated header
                    out.push_str(block.split_once('\n').map(|x| x.1).unwrap_or(""));
                }
            }
            out
        }
        OutputFormat::Md => tables
            .iter()
            .map(report::distribution_to_markdown)
            .collect::<Vec<_>>()
            .join("\n"),
    };
    emit(&text, r.output.as_ref())?;
    Ok(0)
}

fn run_aut_order(args: &AutOrderArgs) -> Result<u8> {
    let r = args.common.resolve()?;
    let g = r.g()?;
    let q = r.file.require(args.q, "q")?;
    let closed = aut_order(g, q);
    let brute = match aut_order_bruteforce(g, q, r.opts.budget) {
        Ok(v) => Some(v),
        Err(CoreError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(core_to_anyhow(e)),
    };
    let matched = brute.as_ref().map(|b| *b == closed);
    let report_value = serde_json::json!({
        "G": g.to_string(),
        "q": q,
        "closed_form": closed.to_string(),
        "bruteforce": brute.as_ref().map(|b| b.to_string()),
        "matched": matched,
    });
    let text = match r.format {
        OutputFormat::Json => {
            report::to_canonical_json(&report_value).map_err(core_to_anyhow)?
        }
        OutputFormat::Csv => format!(
            "G,q,closed_form,bruteforce,matched\n\"{}\",{},{},{},{}\n",
            g,
            q,
            closed,
            brute.as_ref().map(|b| b.to_string()).unwrap_or_default(),
            matched.map(|m| m.to_string()).unwrap_or_default()
        ),
        OutputFormat::Md => format!(
            "## automorphism-group order\n\ntype: [{g}] over q = {q}\n\nclosed form: {closed}\n\noracle: {}\n",
            brute
                .as_ref()
                .map(|b| b.to_string())
                .unwrap_or_else(|| "budget exceeded".into())
        ),
    };
    emit(&text, r.output.as_ref())?;
    Ok(match matched {
        Some(false) => EXIT_FAIL,
        _ => 0,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Verify { experiment } => run_verify(experiment),
        Command::Snf(args) => run_snf(args),
        Command::Distribution(args) => run_distribution(args),
        Command::AutOrder(args) => run_aut_order(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
