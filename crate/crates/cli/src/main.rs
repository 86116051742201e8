//! `qform`: error probability of indefinite complex Gaussian quadratic forms.

mod number;
mod specfile;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qform::charfun::Prepared;
use qform::closed_form::{eigen_params, legacy_params, probability_corrected, probability_from_legacy, LegacyParams, Variant};
use qform::oracles::{estimate_probability, histogram_d, invert_prepared, HistogramRange, McConfig, DEFAULT_QUAD_TOL};
use qform::selftest::{self, Hooks, Mutation};

use number::{exact, report};
use specfile::SpecFile;

const LEGACY_TAG: &str = "LEGACY (known-erroneous for complex C)";
const DEFAULT_SAMPLES: u64 = 1_000_000;
const DEFAULT_BINS: usize = 101;

#[derive(Parser)]
#[command(name = "qform", version, about = "Pr{D<0} for sums of indefinite Hermitian quadratic forms in complex Gaussian vectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Error probability by closed form, CF inversion and/or Monte Carlo.
    Prob(ProbArgs),
    /// Legacy and eigenvalue parameters.
    Params(ParamsArgs),
    /// Monte Carlo histogram of D as CSV.
    Hist(HistArgs),
    /// Built-in golden and oracle-agreement checks.
    Selftest(SelftestArgs),
    /// Print a problem file in canonical form.
    Format { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Corrected,
    AsPublished,
    Both,
}

impl VariantArg {
    fn corrected(self) -> bool {
        self != VariantArg::AsPublished
    }

    fn as_published(self) -> bool {
        self != VariantArg::Corrected
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Closed,
    Invert,
    Mc,
    All,
}

#[derive(Args)]
struct ProbArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    /// Machine-readable output.
    #[arg(long)]
    csv: bool,
    /// Monte Carlo sample count (overrides the file).
    #[arg(long)]
    samples: Option<u64>,
    /// Monte Carlo seed (overrides the file).
    #[arg(long)]
    seed: Option<u64>,
    /// Inversion quadrature tolerance (overrides the file).
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Args)]
struct ParamsArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "corrected")]
    variant: VariantArg,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct HistArgs {
    file: PathBuf,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script plotting the CSV (requires --out).
    #[arg(long, requires = "out")]
    plot_script: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed bin range `LO,HI`. By default the range is the pilot mean +- 5
    /// pilot standard deviations, widened to be symmetric about zero when it
    /// contains zero.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["symmetric", "plain_pilot"])]
    range: Option<String>,
    /// Always widen the pilot range to be symmetric about zero.
    #[arg(long, conflicts_with = "plain_pilot")]
    symmetric: bool,
    /// Use the pilot range as is, without widening.
    #[arg(long)]
    plain_pilot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    TruncatedMarcum,
    AsPublishedAsCorrected,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run against a deliberately broken implementation.
    #[arg(long, value_enum, hide = true)]
    mutate: Option<MutationArg>,
}

enum Failure {
    Selftest,
    Validation(String),
    Numerical(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Selftest => 1,
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

impl From<qform::Error> for Failure {
    fn from(e: qform::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

type CmdResult = Result<(), Failure>;

fn load(path: &Path) -> Result<SpecFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    SpecFile::parse(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn load_valid(path: &Path) -> Result<SpecFile, Failure> {
    let f = load(path)?;
    let report = f.spec.validate();
    if !report.is_valid() {
        return Err(Failure::Validation(report.to_string()));
    }
    Ok(f)
}

fn emit(text: &str) -> CmdResult {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Io(format!("standard output: {e}")))
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_else(|| "-".into())
}

struct Row {
    method: &'static str,
    variant: &'static str,
    probability: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    delta1: f64,
    delta2: f64,
    error: Option<f64>,
    legacy: bool,
    note: Option<String>,
}

fn prob_rows(f: &SpecFile, args: &ProbArgs) -> Result<Vec<Row>, Failure> {
    let prep = Prepared::new(&f.spec)?;
    let e = prep.eigen();
    let closed = matches!(args.method, MethodArg::Closed | MethodArg::All);
    let mut rows = Vec::new();
    if closed && args.variant.corrected() {
        let (ep, p) = probability_corrected(&prep)?;
        rows.push(Row {
            method: "closed",
            variant: "corrected",
            probability: Some(p),
            a: Some(ep.a),
            b: Some(ep.b),
            delta1: e.delta1,
            delta2: e.delta2,
            error: None,
            legacy: false,
            note: None,
        });
    }
    if closed && args.variant.as_published() {
        let result = legacy_params(&f.spec, Variant::AsPublished).and_then(|lp| Ok((probability_from_legacy(&lp)?, lp)));
        match result {
            Ok((p, lp)) => rows.push(Row {
                method: "closed",
                variant: "as-published",
                probability: Some(p),
                a: Some(lp.a),
                b: Some(lp.b),
                delta1: 1.0 / lp.v1,
                delta2: -1.0 / lp.v2,
                error: None,
                legacy: true,
                note: None,
            }),
            Err(err) if args.variant == VariantArg::Both => rows.push(Row {
                method: "closed",
                variant: "as-published",
                probability: None,
                a: None,
                b: None,
                delta1: f64::NAN,
                delta2: f64::NAN,
                error: None,
                legacy: true,
                note: Some(format!("unavailable: {err}")),
            }),
            Err(err) => return Err(err.into()),
        }
    }
    if matches!(args.method, MethodArg::Invert | MethodArg::All) {
        let tol = args.quad_tol.or(f.quad_tol).unwrap_or(DEFAULT_QUAD_TOL);
        let inv = invert_prepared(&prep, tol)?;
        rows.push(Row {
            method: "invert",
            variant: "-",
            probability: Some(inv.probability),
            a: None,
            b: None,
            delta1: e.delta1,
            delta2: e.delta2,
            error: Some(inv.abs_error),
            legacy: false,
            note: None,
        });
    }
    if matches!(args.method, MethodArg::Mc | MethodArg::All) {
        let mc = f.mc.unwrap_or_default();
        let cfg = McConfig::new(
            args.samples.or(mc.samples).unwrap_or(DEFAULT_SAMPLES),
            args.seed.or(mc.seed).unwrap_or(0),
        );
        let est = estimate_probability(&f.spec, &cfg)?;
        rows.push(Row {
            method: "mc",
            variant: "-",
            probability: Some(est.p_hat),
            a: None,
            b: None,
            delta1: e.delta1,
            delta2: e.delta2,
            error: Some(est.std_err),
            legacy: false,
            note: Some(format!("{} samples, seed {}", cfg.samples, cfg.seed)),
        });
    }
    Ok(rows)
}

fn cmd_prob(args: ProbArgs) -> CmdResult {
    let f = load_valid(&args.file)?;
    let rows = prob_rows(&f, &args)?;
    let mut out = String::new();
    if args.csv {
        out.push_str("method,variant,probability,a,b,delta1,delta2,error,note\n");
        for r in &rows {
            let mut note = r.note.clone().unwrap_or_default();
            if r.legacy {
                note = if note.is_empty() { LEGACY_TAG.into() } else { format!("{LEGACY_TAG}; {note}") };
            }
            let cell = |v: Option<f64>| v.map(exact).unwrap_or_default();
            let d = |v: f64| if v.is_nan() { String::new() } else { exact(v) };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},\"{}\"",
                r.method,
                r.variant,
                cell(r.probability),
                cell(r.a),
                cell(r.b),
                d(r.delta1),
                d(r.delta2),
                cell(r.error),
                note.replace('"', "\"\"")
            )
            .unwrap();
        }
    } else {
        let header = format!(
            "{:<8}{:<14}{:<18}{:<18}{:<18}{:<18}{:<18}{}",
            "method", "variant", "Pr{D<0}", "a", "b", "delta1", "delta2", "error"
        );
        writeln!(out, "{}", header.trim_end()).unwrap();
        for r in &rows {
            let prefix = if r.legacy { format!("{LEGACY_TAG} ") } else { String::new() };
            let d = |v: f64| if v.is_nan() { "-".to_string() } else { report(v) };
            let line = format!(
                "{prefix}{:<8}{:<14}{:<18}{:<18}{:<18}{:<18}{:<18}{}",
                r.method,
                r.variant,
                opt(r.probability, report),
                opt(r.a, report),
                opt(r.b, report),
                d(r.delta1),
                d(r.delta2),
                opt(r.error, number::estimate),
            );
            let line = line.trim_end();
            match &r.note {
                Some(n) => writeln!(out, "{line}  ({n})").unwrap(),
                None => writeln!(out, "{line}").unwrap(),
            }
        }
    }
    emit(&out)
}

fn legacy_entries(lp: &LegacyParams) -> Vec<(String, f64)> {
    let mut v = vec![("w".to_string(), lp.w), ("v1".into(), lp.v1), ("v2".into(), lp.v2)];
    for (k, x) in lp.alpha1.iter().enumerate() {
        v.push((format!("alpha1[{}]", k + 1), *x));
    }
    for (k, x) in lp.alpha2.iter().enumerate() {
        v.push((format!("alpha2[{}]", k + 1), *x));
    }
    v.push(("a".into(), lp.a));
    v.push(("b".into(), lp.b));
    v
}

type Section = (String, bool, Result<Vec<(String, f64)>, String>);

fn cmd_params(args: ParamsArgs) -> CmdResult {
    let f = load_valid(&args.file)?;
    let prep = Prepared::new(&f.spec)?;
    // (section name, legacy flag, entries or the reason they are unavailable)
    let mut sections: Vec<Section> = Vec::new();
    let variants = [
        (Variant::Corrected, args.variant.corrected()),
        (Variant::AsPublished, args.variant.as_published()),
    ];
    for (variant, wanted) in variants {
        if !wanted {
            continue;
        }
        let legacy = variant == Variant::AsPublished;
        match legacy_params(&f.spec, variant) {
            Ok(lp) => sections.push((format!("legacy-{variant}"), legacy, Ok(legacy_entries(&lp)))),
            Err(e) if args.variant == VariantArg::Both => {
                sections.push((format!("legacy-{variant}"), legacy, Err(e.to_string())))
            }
            Err(e) => return Err(e.into()),
        }
    }
    let ep = eigen_params(&prep)?;
    sections.push((
        "eigen".into(),
        false,
        Ok(vec![
            ("delta1".into(), ep.delta1),
            ("delta2".into(), ep.delta2),
            ("a".into(), ep.a),
            ("b".into(), ep.b),
        ]),
    ));

    let mut out = String::new();
    if args.csv {
        out.push_str("section,name,value,note\n");
        for (name, legacy, entries) in &sections {
            let note = if *legacy { LEGACY_TAG } else { "" };
            match entries {
                Ok(list) => {
                    for (k, v) in list {
                        writeln!(out, "{name},{k},{},\"{note}\"", exact(*v)).unwrap();
                    }
                }
                Err(e) => writeln!(out, "{name},,,\"{note}; unavailable: {}\"", e.replace('"', "\"\"")).unwrap(),
            }
        }
    } else {
        for (name, legacy, entries) in &sections {
            let prefix = if *legacy { format!("{LEGACY_TAG} ") } else { String::new() };
            writeln!(out, "{prefix}{name}").unwrap();
            match entries {
                Ok(list) => {
                    for (k, v) in list {
                        writeln!(out, "{prefix}  {k:<12}{}", report(*v)).unwrap();
                    }
                }
                Err(e) => writeln!(out, "{prefix}  unavailable: {e}").unwrap(),
            }
        }
    }
    emit(&out)
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Validation(format!("--range expects LO,HI with LO < HI, got `{s}`"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn gnuplot_script(csv: &Path) -> String {
    let path = csv.display().to_string().replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        "set datafile separator \",\"\n\
         set title \"Histogram of D\"\n\
         set xlabel \"D\"\n\
         set ylabel \"count\"\n\
         set key off\n\
         set style fill solid 0.5 border -1\n\
         plot \"{path}\" every ::1 using (($1+$2)/2):3:($2-$1) with boxes\n\
         pause mouse close\n"
    )
}

fn cmd_hist(args: HistArgs) -> CmdResult {
    let f = load_valid(&args.file)?;
    let range = match &args.range {
        Some(r) => {
            let (lo, hi) = parse_range(r)?;
            HistogramRange::Fixed(lo, hi)
        }
        None if args.symmetric => HistogramRange::PilotSymmetric,
        None if args.plain_pilot => HistogramRange::Pilot,
        None => HistogramRange::PilotAuto,
    };
    let mc = f.mc.unwrap_or_default();
    let cfg = McConfig::new(
        args.samples.or(mc.samples).unwrap_or(DEFAULT_SAMPLES),
        args.seed.or(mc.seed).unwrap_or(0),
    );
    let h = histogram_d(&f.spec, &cfg, args.bins, range)?;
    let csv = h.to_csv();
    let summary = format!(
        "{} samples, {} bins on [{}, {}], {} outside range, symmetry statistic {} (threshold {})\n",
        h.n_total,
        h.n_bins(),
        report(h.edges[0]),
        report(h.edges[h.n_bins()]),
        h.below + h.above,
        report(h.symmetry_statistic()),
        report(h.symmetry_threshold()),
    );
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| io_failure(path, e))?;
            if let Some(script) = &args.plot_script {
                fs::write(script, gnuplot_script(path)).map_err(|e| io_failure(script, e))?;
            }
            emit(&summary)
        }
        None => {
            eprint!("{summary}");
            emit(&csv)
        }
    }
}

fn cmd_selftest(args: SelftestArgs) -> CmdResult {
    let hooks = match args.mutate {
        None => Hooks::default(),
        Some(MutationArg::TruncatedMarcum) => Hooks::mutated(Mutation::TruncatedMarcum),
        Some(MutationArg::AsPublishedAsCorrected) => Hooks::mutated(Mutation::AsPublishedAsCorrected),
    };
    let r = selftest::run_with(&hooks);
    let mut out = String::new();
    for c in &r.checks {
        writeln!(out, "{c}").unwrap();
    }
    let failed: Vec<&str> = r.failed().map(|c| c.name).collect();
    if failed.is_empty() {
        writeln!(out, "selftest: all {} checks passed", r.checks.len()).unwrap();
        emit(&out)
    } else {
        writeln!(out, "selftest: {} of {} checks failed: {}", failed.len(), r.checks.len(), failed.join(", ")).unwrap();
        emit(&out)?;
        Err(Failure::Selftest)
    }
}

fn cmd_format(file: PathBuf) -> CmdResult {
    emit(&load(&file)?.to_toml())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prob(a) => cmd_prob(a),
        Command::Params(a) => cmd_params(a),
        Command::Hist(a) => cmd_hist(a),
        Command::Selftest(a) => cmd_selftest(a),
        Command::Format { file } => cmd_format(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Selftest => eprintln!("qform: selftest failed"),
                Failure::Validation(m) | Failure::Numerical(m) | Failure::Io(m) => eprintln!("qform: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
