//! Command-line front end. Exit status: 0 when every check passes, 1 for
//! validation or verification failures, 2 for I/O failures.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::io::{
    parse_realization, parse_system_document, read_text, write_text, AnalysisDocument,
    RealizationDocument, ReportDocument, SystemDocument, ToolInfo,
};
use crate::linalg::{frobenius, RealMatrix, TolerancePolicy};
use crate::realizability::{
    check_physical_realizability, compute_s_tilde, multiplicity_noise_bound_from, LtiSystem,
    ResidualReport,
};
use crate::synthesis::{build_synthesis, minimality_certificate};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;

/// Entry-wise tolerance when comparing against the published four-decimal `S̃`.
const PUBLISHED_DIGITS_TOL: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "qrealize",
    version,
    about = "Minimal-noise quantum realization of LTI systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,

    /// Relative threshold for identity residuals.
    #[arg(long, global = true)]
    pub residual_tol: Option<f64>,

    /// Seed for the minimality certificate.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Random candidates for the minimality certificate.
    #[arg(long, global = true, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the minimal noise count for a system file.
    Count { file: PathBuf },
    /// Synthesize a realization and write the full JSON report.
    Synthesize {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a realization (B1, D1) against a system.
    Check {
        system: PathBuf,
        realization: PathBuf,
    },
    /// Reproduce the built-in four-state example end to end.
    PaperExample,
}

struct Settings {
    tol: TolerancePolicy,
    seed: u64,
    trials: usize,
}

impl Cli {
    fn settings(&self, doc: Option<&SystemDocument>) -> Result<Settings> {
        let mut tol = match doc {
            Some(d) => d.tolerance()?,
            None => TolerancePolicy::default(),
        };
        if let Some(v) = self.rank_tol {
            tol.rank_rel_tol = v;
        }
        if let Some(v) = self.residual_tol {
            tol.residual_tol = v;
        }
        tol.validate()?;
        let seed = self.seed.or_else(|| doc.and_then(|d| d.seed)).unwrap_or(0);
        Ok(Settings {
            tol,
            seed,
            trials: self.trials,
        })
    }
}

/// Run a parsed command line, writing human output to `out` and diagnostics
/// to `err`. Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &cli.command {
        Command::Count { file } => cmd_count(cli, file, out),
        Command::Synthesize { file, output } => cmd_synthesize(cli, file, output, out),
        Command::Check {
            system,
            realization,
        } => cmd_check(cli, system, realization, out),
        Command::PaperExample => cmd_paper_example(cli, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_system(path: &Path) -> Result<(SystemDocument, LtiSystem)> {
    let doc = parse_system_document(&read_text(path)?)?;
    let sys = doc.to_system()?;
    Ok((doc, sys))
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> Result<()> {
    out.write_fmt(text)
        .and_then(|_| out.write_all(b"\n"))
        .map_err(|source| Error::Io {
            path: "<stdout>".into(),
            source,
        })
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        emit($out, format_args!($($arg)*))?
    };
}

fn cmd_count(cli: &Cli, file: &Path, out: &mut dyn Write) -> Result<i32> {
    let (doc, sys) = load_system(file)?;
    let settings = cli.settings(Some(&doc))?;
    let skew = compute_s_tilde(&sys, &settings.tol)?;
    let count = skew.noise_count(sys.n_u())?;
    let bound = multiplicity_noise_bound_from(&skew, sys.n_u());
    say!(
        out,
        "r={} n_v={} multiplicity_bound={}",
        count.r,
        count.n_v,
        bound
    );
    Ok(EXIT_PASS)
}

/// Build the report document for a system; never fails on verification
/// problems, which are recorded in the document instead.
pub fn build_report(
    doc: &SystemDocument,
    sys: &LtiSystem,
    tol: &TolerancePolicy,
    seed: u64,
    trials: usize,
) -> ReportDocument {
    let mut report = ReportDocument {
        tool: ToolInfo::current(),
        tolerances: *tol,
        seed,
        input: SystemDocument {
            tolerances: None,
            seed: None,
            ..doc.clone()
        },
        analysis: None,
        realization: None,
        residuals: Vec::new(),
        certificate: None,
        all_pass: false,
        error: None,
    };

    let synthesis = match build_synthesis(sys, tol) {
        Ok(s) => s,
        Err(e) => {
            if let Ok(skew) = compute_s_tilde(sys, tol) {
                report.analysis = Some(analysis_document(sys, &skew));
            }
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.analysis = Some(analysis_document(sys, &synthesis.skew));
    report.realization = Some(RealizationDocument::from_realization(
        &synthesis.realization,
    ));
    report.residuals = synthesis.residuals.entries.clone();

    match minimality_certificate(sys, trials, seed, tol) {
        Ok(cert) => {
            report.all_pass =
                synthesis.residuals.all_pass() && cert.lower_bound_held && cert.ranks_agree();
            report.certificate = Some(cert);
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    if !synthesis.residuals.all_pass() && report.error.is_none() {
        report.error = Some(format!(
            "residuals exceeded: {}",
            synthesis.residuals.failures().join(", ")
        ));
    }
    report
}

fn analysis_document(sys: &LtiSystem, skew: &crate::SkewReport) -> AnalysisDocument {
    AnalysisDocument {
        n: sys.n(),
        n_u: sys.n_u(),
        n_y: sys.n_y(),
        s_tilde: crate::io::matrix_to_rows(&skew.s_tilde),
        s_eigenvalues: skew.eigenvalues().to_vec(),
        r: skew.rank,
        n_v: sys.n_u() + skew.rank,
        multiplicity_bound: multiplicity_noise_bound_from(skew, sys.n_u()),
    }
}

fn cmd_synthesize(cli: &Cli, file: &Path, output: &Path, out: &mut dyn Write) -> Result<i32> {
    let (doc, sys) = load_system(file)?;
    let settings = cli.settings(Some(&doc))?;
    let report = build_report(&doc, &sys, &settings.tol, settings.seed, settings.trials);
    write_text(output, &report.to_json()?)?;

    if let Some(analysis) = &report.analysis {
        say!(out, "r={} n_v={}", analysis.r, analysis.n_v);
    }
    for r in &report.residuals {
        say!(out, "{}: {:.3e} {}", r.name, r.value, verdict(r.pass));
    }
    if let Some(cert) = &report.certificate {
        say!(
            out,
            "certificate: trials={} min_observed_rank={} lower_bound_held={} rank_disagreements={}",
            cert.trials,
            cert.min_observed_rank,
            cert.lower_bound_held,
            cert.rank_disagreements
        );
    }
    if let Some(e) = &report.error {
        say!(out, "error: {e}");
    }
    say!(out, "report written to {}", output.display());
    Ok(if report.all_pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    })
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn print_residuals(out: &mut dyn Write, report: &ResidualReport) -> Result<()> {
    for r in &report.entries {
        say!(
            out,
            "{}: {:.3e} (tol {:.1e}) {}",
            r.name,
            r.value,
            r.tol,
            verdict(r.pass)
        );
    }
    Ok(())
}

fn cmd_check(cli: &Cli, system: &Path, realization: &Path, out: &mut dyn Write) -> Result<i32> {
    let (doc, sys) = load_system(system)?;
    let settings = cli.settings(Some(&doc))?;
    let (b1, d1) = parse_realization(&read_text(realization)?)?;
    let report = check_physical_realizability(&sys, &b1, &d1, &settings.tol)?;
    print_residuals(out, &report)?;
    if report.all_pass() {
        say!(out, "PASS: physically realizable with n_v={}", b1.ncols());
        Ok(EXIT_PASS)
    } else {
        say!(out, "FAIL: {}", report.failures().join(", "));
        Ok(EXIT_FAIL)
    }
}

fn format_matrix(m: &RealMatrix) -> String {
    m.row_iter()
        .map(|row| {
            row.iter()
                .map(|v| format!("{:>9.4}", v + 0.0))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_paper_example(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let started = Instant::now();
    let settings = cli.settings(None)?;
    let sys = fixtures::reference_system();
    let mut ok = true;

    let skew = compute_s_tilde(&sys, &settings.tol)?;
    say!(out, "S~ =\n{}", format_matrix(&skew.s_tilde));
    let published = fixtures::reference_s_tilde();
    let worst = (&skew.s_tilde - &published).amax();
    let matches = worst <= PUBLISHED_DIGITS_TOL;
    ok &= matches;
    say!(
        out,
        "max entry deviation from published S~: {worst:.2e} (tol {PUBLISHED_DIGITS_TOL:.0e}) {}",
        verdict(matches)
    );

    let count = skew.noise_count(sys.n_u())?;
    say!(out, "r={} n_v={}", count.r, count.n_v);
    ok &= count.r == 4 && count.n_v == 6;
    say!(
        out,
        "multiplicity_bound={}",
        multiplicity_noise_bound_from(&skew, sys.n_u())
    );

    let synthesis = build_synthesis(&sys, &settings.tol)?;
    print_residuals(out, &synthesis.residuals)?;
    ok &= synthesis.residuals.all_pass();
    say!(
        out,
        "B1 is {}x{}, |Lambda| = {:.6}",
        synthesis.realization.b1.nrows(),
        synthesis.realization.b1.ncols(),
        frobenius(&synthesis.realization.coupling)
    );

    let cert = minimality_certificate(&sys, settings.trials, settings.seed, &settings.tol)?;
    say!(
        out,
        "certificate: trials={} min_observed_rank={} bound={} lower_bound_held={} rank_disagreements={}",
        cert.trials,
        cert.min_observed_rank,
        cert.r / 2,
        cert.lower_bound_held,
        cert.rank_disagreements
    );
    ok &= cert.lower_bound_held && cert.ranks_agree();

    say!(out, "elapsed: {:.3}s", started.elapsed().as_secs_f64());
    say!(out, "{}", verdict(ok));
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}
