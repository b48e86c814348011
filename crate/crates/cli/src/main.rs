//! `pbwk`: command-line surface for the exact Lie-superalgebra kernel.
//!
//! Subcommands mirror the library layers: `series` for the functional
//! equations and canonical solutions, `algebra` for building and validating
//! structure-constant presentations, `rep` for coderivation representation
//! checks on a chosen algebra, and `pbw` for the symbol map, symmetrization
//! and their verification suites.
//!
//! Exit codes: 0 = all checks pass, 1 = a mathematical check failed,
//! 2 = ring obstruction (a required inverse is missing, or the hypotheses
//! do not hold), 3 = input error.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pbw_kernel::coeff::RingSpec;
use pbw_kernel::envelope::{
    compatibility_check, conjugation_check, strong_pbw_check, ActionKind, PbwMap,
};
use pbw_kernel::expr::{parse_env, parse_series, parse_sym};
use pbw_kernel::series::{
    bernoulli_numbers, defect_general, defect_rep, phi_c, solve_rep, theta_c, TruncSeries,
};
use pbw_kernel::superlie::{
    algebra_from_json, algebra_to_json, morphism_from_json, SuperLieAlgebra,
};
use pbw_kernel::symcoalg::{commutator_defect_all_pairs, functoriality_check, monomials_up_to};
use pbw_kernel::{CheckReport, Error};

#[derive(Parser)]
#[command(
    name = "pbwk",
    version,
    about = "Exact computations with Lie superalgebra coderivations and normal forms"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, default_value = "text", value_parser = ["text", "json"])]
    output: String,

    /// Seed for randomized checks (validation uses it when 2 or 3 is not
    /// invertible).
    #[arg(long, global = true, default_value_t = 0x517e_c0de)]
    seed: u64,

    /// Allow monomial degrees above 8 (permutation sums grow factorially).
    #[arg(long, global = true)]
    unsafe_degree: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truncated power series: canonical solutions and equation checks.
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Build and validate algebra files.
    #[command(subcommand)]
    Algebra(AlgebraCmd),
    /// Representation checks on S(g).
    #[command(subcommand)]
    Rep(RepCmd),
    /// Symbol map, symmetrization and normal-form verification.
    #[command(subcommand)]
    Pbw(PbwCmd),
}

#[derive(Args)]
struct RingArg {
    /// Coefficient ring: Q, Z, or Z/n. Defaults to $PBWK_DEFAULT_RING or Q.
    #[arg(long)]
    ring: Option<String>,
}

impl RingArg {
    fn resolve(&self) -> Result<RingSpec, CliError> {
        let text = match &self.ring {
            Some(r) => r.clone(),
            None => std::env::var("PBWK_DEFAULT_RING").unwrap_or_else(|_| "Q".to_string()),
        };
        Ok(RingSpec::parse(&text)?)
    }
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// Print the Bernoulli numbers b_0..b_n.
    Bernoulli {
        #[arg(long)]
        n: usize,
    },
    /// Print phi_c = t/(e^{t/c} - 1) truncated at --cap.
    Phi {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        ring: RingArg,
    },
    /// Print theta_c (the even coth-type solution) truncated at --cap.
    Theta {
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        ring: RingArg,
    },
    /// Evaluate the one-series representation equation on --phi.
    CheckRep {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        ring: RingArg,
    },
    /// Solve the one-series equation coefficient-by-coefficient.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        c0: String,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        ring: RingArg,
    },
    /// Evaluate the two-series equation on a (phi, psi, rho) triple.
    CheckGen {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[arg(long)]
        cap: usize,
        #[command(flatten)]
        ring: RingArg,
    },
}

#[derive(Subcommand)]
enum AlgebraCmd {
    /// Validate an algebra file against the superalgebra axioms.
    Validate { file: String },
    /// Write the free nilpotent algebra on even generators to a file.
    FreeNilpotent {
        #[arg(long)]
        gens: usize,
        #[arg(long)]
        class: usize,
        #[arg(long)]
        out: String,
        #[command(flatten)]
        ring: RingArg,
    },
}

#[derive(Subcommand)]
enum RepCmd {
    /// Check that --phi induces a representation on the algebra.
    Check {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        degree: usize,
        /// Series truncation cap (defaults to degree + 2).
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Check whether the representations for constants g and h commute.
    Commute {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long)]
        degree: usize,
    },
    /// Check functoriality of the representation along a morphism file.
    Functorial {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        morphism: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
}

#[derive(Subcommand)]
enum PbwCmd {
    /// Apply the symbol map to a U(g) expression.
    Symbol {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        /// Optional series expression overriding the canonical phi.
        #[arg(long, allow_hyphen_values = true)]
        phi: Option<String>,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Apply the symmetrization map to an S(g) expression.
    Symmetrize {
        #[arg(long)]
        algebra: String,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Run the full normal-form verification suite to --degree.
    Verify {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        degree: usize,
    },
    /// Check one conjugation identity (adjoint, left, or right).
    Conjugate {
        #[arg(long)]
        algebra: String,
        #[arg(long, value_parser = ["adjoint", "left", "right"])]
        kind: String,
        #[arg(long)]
        degree: usize,
    },
}

/// Errors mapped to process exit codes.
enum CliError {
    /// exit 2
    Obstruction(String),
    /// exit 3
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::NotInvertible { ref value, .. } => {
                CliError::Obstruction(format!("{value} not invertible ({e})"))
            }
            Error::DegreeBeyondCap { .. } => CliError::Obstruction(e.to_string()),
            Error::Unsupported(_) => CliError::Obstruction(e.to_string()),
            Error::Parse(_) => CliError::Input(e.to_string()),
        }
    }
}

struct Output {
    /// pass | fail
    verdict: &'static str,
    text: String,
    data: serde_json::Value,
}

impl Output {
    fn value(text: String, data: serde_json::Value) -> Output {
        Output {
            verdict: "pass",
            text,
            data,
        }
    }

    fn from_report(context: &str, report: &CheckReport) -> Output {
        let verdict = if report.passed() { "pass" } else { "fail" };
        let mut text = format!("{context}: {report}");
        if !text.ends_with('\n') {
            text.push('\n');
        }
        text.pop();
        Output {
            verdict,
            text,
            data: json!({
                "context": context,
                "checked": report.checked,
                "failures": report.failures,
            }),
        }
    }
}

fn read_algebra(path: &str) -> Result<Arc<SuperLieAlgebra>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    Ok(algebra_from_json(&text)?)
}

fn check_degree(degree: usize, unsafe_degree: bool) -> Result<(), CliError> {
    if degree > 8 && !unsafe_degree {
        return Err(CliError::Input(format!(
            "degree {degree} exceeds the default bound 8; pass --unsafe-degree to override"
        )));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Series(cmd) => run_series(cmd),
        Command::Algebra(cmd) => run_algebra(cmd, cli.seed),
        Command::Rep(cmd) => run_rep(cmd, cli.unsafe_degree),
        Command::Pbw(cmd) => run_pbw(cmd, cli.unsafe_degree),
    }
}

fn run_series(cmd: &SeriesCmd) -> Result<Output, CliError> {
    match cmd {
        SeriesCmd::Bernoulli { n } => {
            let values = bernoulli_numbers(*n);
            let rendered: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            Ok(Output::value(
                rendered.join(", "),
                json!({ "bernoulli": rendered }),
            ))
        }
        SeriesCmd::Phi { c, cap, ring } => {
            let ring = ring.resolve()?;
            let c = ring.parse_scalar(c)?;
            let series = phi_c(&c, *cap)?;
            Ok(Output::value(
                series.to_string(),
                json!({ "series": series.to_string() }),
            ))
        }
        SeriesCmd::Theta { c, cap, ring } => {
            let ring = ring.resolve()?;
            let c = ring.parse_scalar(c)?;
            let series = theta_c(&c, *cap)?;
            Ok(Output::value(
                series.to_string(),
                json!({ "series": series.to_string() }),
            ))
        }
        SeriesCmd::CheckRep { phi, cap, ring } => {
            let ring = ring.resolve()?;
            let series = parse_series(phi, &ring, *cap)?;
            let defect = defect_rep(&series);
            let mut report = CheckReport::default();
            report.record(
                format!("phi = {series}"),
                defect.to_string(),
                "0".to_string(),
                defect.is_zero(),
            );
            let mut out = Output::from_report("representation equation", &report);
            if defect.is_zero() {
                out.text = format!("defect = 0 (cap {})", defect.cap());
            } else {
                out.text = format!("defect = {defect}");
            }
            Ok(out)
        }
        SeriesCmd::Solve { c0, cap, ring } => {
            let ring = ring.resolve()?;
            let c0 = ring.parse_scalar(c0)?;
            let series = solve_rep(&c0, *cap)?;
            Ok(Output::value(
                series.to_string(),
                json!({ "series": series.to_string() }),
            ))
        }
        SeriesCmd::CheckGen {
            phi,
            psi,
            rho,
            cap,
            ring,
        } => {
            let ring = ring.resolve()?;
            let phi = parse_series(phi, &ring, *cap)?;
            let psi = parse_series(psi, &ring, *cap)?;
            let rho = parse_series(rho, &ring, *cap)?;
            let defect = defect_general(&phi, &psi, &rho);
            let mut report = CheckReport::default();
            report.record(
                "two-series equation".to_string(),
                defect.to_string(),
                "0".to_string(),
                defect.is_zero(),
            );
            let mut out = Output::from_report("two-series equation", &report);
            out.text = if defect.is_zero() {
                format!("defect = 0 (cap {})", defect.cap())
            } else {
                format!("defect = {defect}")
            };
            Ok(out)
        }
    }
}

fn run_algebra(cmd: &AlgebraCmd, seed: u64) -> Result<Output, CliError> {
    match cmd {
        AlgebraCmd::Validate { file } => {
            let algebra = read_algebra(file)?;
            let report = algebra.validate_with_seed(seed);
            if report.is_valid() {
                let class = algebra.nilpotency_class(6);
                let text = match class {
                    Some(n) => format!("valid, {n}-nilpotent"),
                    None => "valid, not nilpotent (within class 6)".to_string(),
                };
                Ok(Output {
                    verdict: "pass",
                    text: text.clone(),
                    data: json!({ "valid": true, "nilpotency_class": class, "summary": text }),
                })
            } else {
                Ok(Output {
                    verdict: "fail",
                    text: report.to_string(),
                    data: json!({ "valid": false, "violations": report.violations }),
                })
            }
        }
        AlgebraCmd::FreeNilpotent {
            gens,
            class,
            out,
            ring,
        } => {
            let ring = ring.resolve()?;
            if *gens == 0 {
                return Err(CliError::Input("need at least one generator".into()));
            }
            let generators: Vec<(String, u8)> =
                (0..*gens).map(|i| (format!("x{}", i + 1), 0)).collect();
            let algebra = SuperLieAlgebra::free_nilpotent(&generators, *class, ring)?;
            let text = algebra_to_json(&algebra);
            std::fs::write(out, &text)
                .map_err(|e| CliError::Input(format!("cannot write {out}: {e}")))?;
            Ok(Output::value(
                format!("wrote rank-{} algebra to {out}", algebra.dim()),
                json!({ "rank": algebra.dim(), "file": out }),
            ))
        }
    }
}

fn run_rep(cmd: &RepCmd, unsafe_degree: bool) -> Result<Output, CliError> {
    match cmd {
        RepCmd::Check {
            algebra,
            phi,
            degree,
            cap,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let cap = cap.unwrap_or(degree + 2);
            if cap < *degree {
                return Err(CliError::Input(format!(
                    "series cap {cap} is below the check degree {degree}"
                )));
            }
            let series = parse_series(phi, algebra.ring(), cap)?;
            let report =
                commutator_defect_all_pairs(&series, &series, &series, &algebra, *degree, false)?;
            Ok(Output::from_report("representation check", &report))
        }
        RepCmd::Commute {
            algebra,
            g,
            h,
            degree,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let ring = algebra.ring().clone();
            let g = ring.parse_scalar(g)?;
            let h = ring.parse_scalar(h)?;
            let phi_g = phi_c(&g, degree + 2)?;
            let phi_h = phi_c(&h, degree + 2)?;
            let zero = TruncSeries::zero(&ring, degree + 2);
            let report =
                commutator_defect_all_pairs(&phi_g, &phi_h, &zero, &algebra, *degree, false)?;
            Ok(Output::from_report("commutation check", &report))
        }
        RepCmd::Functorial {
            algebra,
            morphism,
            phi,
            degree,
            cap,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let source = read_algebra(algebra)?;
            let text = std::fs::read_to_string(morphism)
                .map_err(|e| CliError::Input(format!("cannot read {morphism}: {e}")))?;
            let map = morphism_from_json(&text, &source)?;
            let cap = cap.unwrap_or(degree + 2);
            let series = parse_series(phi, source.ring(), cap)?;
            let report = functoriality_check(&map, &series, *degree)?;
            Ok(Output::from_report("functoriality check", &report))
        }
    }
}

fn run_pbw(cmd: &PbwCmd, unsafe_degree: bool) -> Result<Output, CliError> {
    match cmd {
        PbwCmd::Symbol {
            algebra,
            expr,
            phi,
            degree,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let element = parse_env(expr, &algebra)?;
            let pbw = match phi {
                Some(text) => {
                    let cap = pbw_kernel::envelope::admissible_series_cap(&algebra, *degree)?;
                    let series = parse_series(text, algebra.ring(), cap)?;
                    PbwMap::new(algebra.clone(), series)?
                }
                None => PbwMap::for_algebra(&algebra, *degree)?,
            };
            let value = pbw.symbol(&element)?;
            Ok(Output::value(
                value.to_string(),
                json!({ "symbol": value.to_string() }),
            ))
        }
        PbwCmd::Symmetrize {
            algebra,
            expr,
            degree,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let element = parse_sym(expr, &algebra)?;
            let pbw = PbwMap::for_algebra(&algebra, *degree)?;
            let value = pbw.symmetrize(&element)?;
            Ok(Output::value(
                value.to_string(),
                json!({ "symmetrization": value.to_string() }),
            ))
        }
        PbwCmd::Verify { algebra, degree } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let pbw = PbwMap::for_algebra(&algebra, *degree)?;
            let mut report = CheckReport::default();
            // sigma∘beta = id and beta∘sigma = id on lifted words
            for m in monomials_up_to(&algebra, *degree) {
                let w = pbw_kernel::symcoalg::SymElement::monomial(&algebra, m.clone());
                let round = pbw.symbol(&pbw.symmetrize(&w)?)?;
                report.record(
                    format!("sigma∘beta at {}", m.label(&algebra)),
                    round.to_string(),
                    w.to_string(),
                    round == w,
                );
                let lift = pbw_kernel::envelope::EnvMonomial::word(m.indices().to_vec());
                let u = pbw_kernel::envelope::EnvElement::monomial(&algebra, lift);
                let round = pbw.symmetrize(&pbw.symbol(&u)?)?;
                report.record(
                    format!("beta∘sigma at {}", m.label(&algebra)),
                    round.to_string(),
                    u.to_string(),
                    round == u,
                );
            }
            report.merge(compatibility_check(&pbw, *degree)?);
            report.merge(strong_pbw_check(&pbw, &[], *degree)?);
            Ok(Output::from_report("normal-form verification", &report))
        }
        PbwCmd::Conjugate {
            algebra,
            kind,
            degree,
        } => {
            check_degree(*degree, unsafe_degree)?;
            let algebra = read_algebra(algebra)?;
            let pbw = PbwMap::for_algebra(&algebra, *degree)?;
            let kind = ActionKind::parse(kind)?;
            let mut report = CheckReport::default();
            for i in 0..algebra.dim() {
                let a = algebra.basis_element(i);
                report.merge(conjugation_check(&pbw, kind, &a, *degree)?);
            }
            Ok(Output::from_report("conjugation check", &report))
        }
    }
}

fn emit(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{line}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    match result {
        Ok(out) => {
            if cli.output == "json" {
                let mut data = out.data.clone();
                if let serde_json::Value::Object(map) = &mut data {
                    map.insert("verdict".into(), json!(out.verdict));
                }
                emit(&serde_json::to_string_pretty(&data).unwrap());
            } else {
                emit(&out.text);
            }
            if out.verdict == "pass" {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(err) => {
            let (code, kind, message) = match err {
                CliError::Obstruction(m) => (2u8, "obstruction", m),
                CliError::Input(m) => (3u8, "input-error", m),
            };
            if cli.output == "json" {
                let data = json!({ "verdict": kind, "error": message });
                emit(&serde_json::to_string_pretty(&data).unwrap());
            } else {
                eprintln!("error: {message}");
            }
            ExitCode::from(code)
        }
    }
}
