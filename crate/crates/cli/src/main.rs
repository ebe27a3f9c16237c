//! `bockstein`: compute connecting homomorphisms of maps over `Z/p^2`,
//! census their distribution over all lifts of a reduction, and verify the
//! counting laws.
//!
//! Exit codes: 0 success / all checks pass, 1 verification failure,
//! 2 usage or input error, 3 enumeration budget exceeded.

mod input;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use bockstein_core::{
    bockstein_of, count_report, exhaustive_census, sample_conditional, sample_unconditional,
    BocksteinMatrix, CensusCheck, Error as CoreError, FiberCensus, GammaContext, JointReport,
    MatrixModP, MatrixModP2, Prime, SampleReport, DEFAULT_BUDGET,
};

use input::MatrixSource;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(CoreError),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => e.fmt(f),
            CliError::Io(e) => e.fmt(f),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "bockstein", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Write the report to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Enumeration cap (element count); also settable via BOCKSTEIN_BUDGET.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Args)]
struct ShapeArgs {
    /// The prime p.
    #[arg(long)]
    p: u64,
    /// Codomain dimension (rows).
    #[arg(long)]
    m: usize,
    /// Domain dimension (columns).
    #[arg(long)]
    n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the connecting homomorphism of a map given mod p^2.
    Compute {
        #[command(flatten)]
        shape: ShapeArgs,
        /// The matrix phi over Z/p^2: rows split by ';', entries by ','.
        #[arg(long)]
        phi: Option<String>,
        /// Read phi from a JSON file of nested arrays instead.
        #[arg(long)]
        phi_file: Option<PathBuf>,
        /// Wrap out-of-range entries into the modulus instead of rejecting.
        #[arg(long)]
        reduce: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Enumerate every lift of a map psi over Z/p and census the induced
    /// homomorphisms against the closed-form fiber counts.
    Census {
        #[command(flatten)]
        shape: ShapeArgs,
        /// The matrix psi over Z/p: rows split by ';', entries by ','.
        #[arg(long)]
        psi: Option<String>,
        /// Read psi from a JSON file of nested arrays instead.
        #[arg(long)]
        psi_file: Option<PathBuf>,
        /// Wrap out-of-range entries into the modulus instead of rejecting.
        #[arg(long)]
        reduce: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Closed-form counts for a given kernel dimension.
    Count {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Kernel dimension k.
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sample maps at random: conditionally on a reduction psi when given,
    /// otherwise jointly over raw matrices mod p^2.
    Sample {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Condition on this psi over Z/p (omit for the joint sweep).
        #[arg(long)]
        psi: Option<String>,
        /// Read psi from a JSON file of nested arrays instead.
        #[arg(long)]
        psi_file: Option<PathBuf>,
        /// Wrap out-of-range entries into the modulus instead of rejecting.
        #[arg(long)]
        reduce: bool,
        /// Number of samples to draw.
        #[arg(long)]
        trials: u64,
        /// PRNG seed; generated and recorded in the report when omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the verification sweep over all maps up to a dimension cap.
    Verify {
        /// The prime p.
        #[arg(long)]
        p: u64,
        /// Check every map with both dimensions up to this cap.
        #[arg(long, default_value = "2")]
        max_dim: usize,
        /// Also run seeded conditional sampling with this many trials.
        #[arg(long)]
        trials: Option<u64>,
        /// PRNG seed for the randomized checks.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("error: {m}"),
                CliError::Core(err) => format!("error: {err}"),
                CliError::Io(err) => format!("error: {err}"),
            };
            eprintln!("{msg}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn effective_budget(out: &OutputArgs) -> Result<u64, CliError> {
    if let Some(b) = out.budget {
        return Ok(b);
    }
    match std::env::var("BOCKSTEIN_BUDGET") {
        Ok(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("BOCKSTEIN_BUDGET is not an integer: {v:?}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn emit(out: &OutputArgs, text: String) -> Result<(), CliError> {
    match &out.output {
        Some(path) => std::fs::write(path, text.as_bytes())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Compute {
            shape,
            phi,
            phi_file,
            reduce,
            out,
        } => {
            let p = Prime::new(shape.p)?;
            let phi = MatrixSource {
                literal: phi.as_deref(),
                file: phi_file.as_deref(),
            }
            .matrix_mod_p2("phi", p, shape.m, shape.n, reduce)?;
            let report = ComputeReport::new(phi);
            emit(&out, report.render(out.format))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            shape,
            psi,
            psi_file,
            reduce,
            out,
        } => {
            let p = Prime::new(shape.p)?;
            let psi = MatrixSource {
                literal: psi.as_deref(),
                file: psi_file.as_deref(),
            }
            .matrix_mod_p("psi", p, shape.m, shape.n, reduce)?;
            let budget = effective_budget(&out)?;
            let ctx = GammaContext::new(psi);
            let census = exhaustive_census(&ctx, budget)?;
            let report = CensusReport::new(census);
            let passed = report.check.passed();
            emit(&out, report.render(out.format))?;
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Count { shape, k, out } => {
            let p = Prime::new(shape.p)?;
            let report = count_report(p, shape.m, shape.n, k)?;
            let text = match out.format {
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
                Format::Text => format!(
                    "p = {}, m = {}, n = {}, k = {}\n\
                     lifts of any such psi : {}\n\
                     hom-space size        : {}\n\
                     fiber size            : {}\n\
                     conditional probability of each homomorphism: {}\n",
                    report.p,
                    report.m,
                    report.n,
                    report.k,
                    report.size_l_psi,
                    report.hom_size,
                    report.fiber_size,
                    report.theorem_probability
                ),
            };
            emit(&out, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sample {
            shape,
            psi,
            psi_file,
            reduce,
            trials,
            seed,
            out,
        } => {
            let p = Prime::new(shape.p)?;
            let budget = effective_budget(&out)?;
            let seed = seed.unwrap_or_else(generate_seed);
            let text = if psi.is_some() || psi_file.is_some() {
                let psi = MatrixSource {
                    literal: psi.as_deref(),
                    file: psi_file.as_deref(),
                }
                .matrix_mod_p("psi", p, shape.m, shape.n, reduce)?;
                let ctx = GammaContext::new(psi);
                let report = sample_conditional(&ctx, trials, seed, budget)?;
                render_sample(&report, out.format)
            } else {
                let report = sample_unconditional(p, shape.m, shape.n, trials, seed)?;
                render_joint(&report, out.format)
            };
            emit(&out, text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            p,
            max_dim,
            trials,
            seed,
            out,
        } => {
            let p = Prime::new(p)?;
            let budget = effective_budget(&out)?;
            let seed = match (trials, seed) {
                (Some(_), None) => Some(generate_seed()),
                _ => seed,
            };
            let report = verify::run_verify(p, max_dim, trials, seed, budget);
            let text = match out.format {
                Format::Json => serde_json::to_string_pretty(&report).expect("report serializes"),
                Format::Csv => report.to_csv(),
                Format::Text => report.to_text(),
            };
            emit(&out, text)?;
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn generate_seed() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

/// The full story of one computed homomorphism: the input, its reduction,
/// the frame, and the resulting matrix.
#[derive(Debug, PartialEq, Serialize, Deserialize)]
struct ComputeReport {
    p: Prime,
    m: usize,
    n: usize,
    phi: MatrixModP2,
    psi: MatrixModP,
    k: usize,
    c: usize,
    kernel_basis: Vec<Vec<u64>>,
    coker_rows: Vec<usize>,
    beta: BocksteinMatrix,
}

impl ComputeReport {
    fn new(phi: MatrixModP2) -> Self {
        let psi = phi.reduce_mod_p();
        let ctx = GammaContext::new(psi.clone());
        let beta = bockstein_of(&ctx, &phi).expect("phi reduces to its own reduction");
        Self {
            p: phi.prime(),
            m: phi.rows(),
            n: phi.cols(),
            phi,
            psi,
            k: ctx.kernel_dim(),
            c: ctx.coker_dim(),
            kernel_basis: ctx.frame().kernel_basis().to_vec(),
            coker_rows: ctx.frame().coker_rows().to_vec(),
            beta,
        }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Csv => format!(
                "p,m,n,k,c,beta,psi_digest\n{},{},{},{},{},{:?},{}\n",
                self.p,
                self.m,
                self.n,
                self.k,
                self.c,
                self.beta.to_literal(),
                self.beta.psi_digest()
            ),
            Format::Text => {
                let mut s = String::new();
                s.push_str(&format!(
                    "phi ({}x{} over Z/{}):\n{}",
                    self.m,
                    self.n,
                    self.p.squared(),
                    self.phi
                ));
                s.push_str(&format!("psi = phi mod {}:\n{}", self.p, self.psi));
                s.push_str(&format!(
                    "kernel dimension k = {}, cokernel dimension c = {}\n",
                    self.k, self.c
                ));
                if !self.kernel_basis.is_empty() {
                    s.push_str("kernel basis (columns of the domain):\n");
                    for v in &self.kernel_basis {
                        s.push_str(&format!("  {v:?}\n"));
                    }
                }
                s.push_str(&format!(
                    "cokernel coordinate rows: {:?}\n",
                    self.coker_rows
                ));
                s.push_str(&format!(
                    "beta ({}x{} over Z/{}):\n{}",
                    self.c, self.k, self.p, self.beta
                ));
                s.push_str(&format!("psi digest: {}\n", self.beta.psi_digest()));
                s
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CensusReport {
    census: FiberCensus,
    check: CensusCheck,
}

impl CensusReport {
    fn new(census: FiberCensus) -> Self {
        let check = census.verify();
        Self { census, check }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Csv => self.census.to_csv(),
            Format::Text => {
                let mut s = String::new();
                s.push_str(&format!(
                    "census over all {} lifts of psi:\n{}",
                    self.census.total(),
                    self.census.psi()
                ));
                s.push_str(&format!(
                    "k = {}, c = {}\n",
                    self.census.kernel_dim(),
                    self.census.coker_dim()
                ));
                for (beta, count) in self.census.counts() {
                    let lit = beta.to_literal();
                    let shown = if lit.is_empty() { "[]" } else { lit.as_str() };
                    s.push_str(&format!("  beta {shown}: {count}\n"));
                }
                let check = &self.check;
                s.push_str(&format!(
                    "total {} = p^(mn): {}\n",
                    self.census.total(),
                    status(check.total_ok)
                ));
                s.push_str(&format!(
                    "every fiber = {}: {}\n",
                    check.predicted.fiber_size,
                    status(check.fiber_sizes_ok)
                ));
                s.push_str(&format!(
                    "distinct homomorphisms = {}: {}\n",
                    check.predicted.hom_size,
                    status(check.distinct_ok)
                ));
                s.push_str(&format!(
                    "census {}\n",
                    if check.passed() { "PASS" } else { "FAIL" }
                ));
                s
            }
        }
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn render_sample(report: &SampleReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => {
            let mut s = String::new();
            s.push_str(&format!(
                "conditional sampling: {} trials, seed {}\npsi:\n{}",
                report.trials(),
                report.seed(),
                report.psi()
            ));
            for (beta, count) in report.counts() {
                let lit = beta.to_literal();
                let shown = if lit.is_empty() { "[]" } else { lit.as_str() };
                s.push_str(&format!("  beta {shown}: {count}\n"));
            }
            s.push_str(&format!(
                "chi-square = {:.6}, df = {}, p-value = {:.6}\n",
                report.chi_square(),
                report.degrees_of_freedom(),
                report.p_value()
            ));
            s
        }
    }
}

fn render_joint(report: &JointReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Text => {
            let mut s = String::new();
            match report.seed() {
                Some(seed) => s.push_str(&format!(
                    "joint sampling: {} draws, seed {seed}\n",
                    report.total()
                )),
                None => s.push_str(&format!(
                    "exhaustive joint sweep over {} maps\n",
                    report.total()
                )),
            }
            for bin in report.bins() {
                let lit = bin.psi().to_literal();
                let shown = if lit.is_empty() { "[]" } else { lit.as_str() };
                s.push_str(&format!(
                    "psi {shown} (k = {}): {} draws\n",
                    bin.kernel_dim(),
                    bin.total()
                ));
                for (beta, count) in bin.counts() {
                    let blit = beta.to_literal();
                    let bshown = if blit.is_empty() { "[]" } else { blit.as_str() };
                    s.push_str(&format!("  beta {bshown}: {count}\n"));
                }
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compute_report_round_trips_through_json() {
        let p = Prime::new(3).unwrap();
        let phi = MatrixModP2::new(p, 2, 2, vec![4, 1, 3, 7]).unwrap();
        let report = ComputeReport::new(phi);
        let back: ComputeReport = serde_json::from_str(&report.render(Format::Json)).unwrap();
        assert_eq!(back, report);
    }
}
