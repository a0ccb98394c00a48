//! `dml`: command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (the message names the flag),
//! 2 a failed verification.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dml::arith::{is_prime, totient};
use dml::bounds::{classify_from_table, dyadic_ladder, segment_table, LadderMode, ShiftConfig, DEFAULT_DEMO_THRESHOLD};
use dml::characters::{enumerate_characters, primitive_characters, Parity};
use dml::export::{format_real, Cell, Format, Table};
use dml::lfunc::{l_value, EvalPoint};
use dml::moments::{moment_ratio_scan, MomentReport, Predictor, YMode, DEFAULT_L0_EXPONENT};
use dml::sums::char_sum_moment_over;
use dml::theta::{theta_moment_bound, theta_moment_over};
use dml::Error;

#[derive(Parser, Debug)]
#[command(name = "dml", version, about = "Dirichlet characters, L-values, theta functions and their moments")]
struct Cli {
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format
    #[arg(long = "out", global = true, default_value = "csv")]
    out: Format,

    /// Output file (default: standard output)
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Add a runtime_ms column (breaks byte-identical reruns)
    #[arg(long, global = true)]
    timings: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the characters modulo q
    Characters {
        #[arg(long)]
        q: u64,
        /// Only primitive characters
        #[arg(long)]
        primitive: bool,
        #[arg(long)]
        parity: Option<Parity>,
    },
    /// Evaluate L(σ + it, χ)
    Lvalue {
        #[arg(long)]
        q: u64,
        /// Character index (default: every character)
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        t: f64,
    },
    /// Sums of |θ(1, χ)|^{2k} over primitive characters of one parity
    ThetaMoments {
        #[arg(long = "q-range")]
        q_range: String,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        parity: Parity,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
    },
    /// Sums of |Σ_{n≤y} χ(n)|^{2k} over primitive characters
    CharSumMoments {
        #[arg(long = "q-range")]
        q_range: String,
        #[arg(long)]
        k: f64,
        #[arg(long = "y-mode", default_value = "sqrt")]
        y_mode: YMode,
    },
    /// Shifted moment of |L(½ + offset + i t_j)|^{a_j} at one modulus
    ShiftedMoments {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        shifts: ShiftArgs,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
    },
    /// Label each primitive character by the β-ladder test
    Classify {
        #[arg(long)]
        q: u64,
        #[command(flatten)]
        shifts: ShiftArgs,
        /// exact | demo
        #[arg(long, default_value = "demo")]
        mode: String,
        /// Cap τ of the demo ladder
        #[arg(long, default_value_t = DEFAULT_DEMO_THRESHOLD)]
        threshold: f64,
    },
    /// Ratio of an empirical moment to its predicted size over many moduli
    Scan {
        /// b | b-star | l0 | thm2 | thm3 | thm3-dual
        #[arg(long)]
        pred: String,
        #[arg(long = "q-range")]
        q_range: String,
        /// prime | all
        #[arg(long, default_value = "prime")]
        step: String,
        #[arg(long, default_value_t = 3.0)]
        k: f64,
        #[arg(long, default_value = "even")]
        parity: Parity,
        #[arg(long = "y-mode", default_value = "sqrt")]
        y_mode: YMode,
        /// Off-line parameter y for b-star and l0
        #[arg(long)]
        y: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_L0_EXPONENT)]
        exponent: f64,
        #[arg(long, default_value_t = 0.0)]
        offset: f64,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
        #[command(flatten)]
        shifts: ShiftArgs,
    },
    /// Run invariant suites: characters, lfunc, theta, bounds, sums, moments, cli or all
    Verify {
        module: String,
        /// Range x of the prime sums in the bounds suite
        #[arg(long, default_value_t = dml::verify::DEFAULT_MERTENS_X)]
        x: f64,
    },
}

#[derive(Args, Debug)]
struct ShiftArgs {
    /// Exponents a_1,…,a_{2k}
    #[arg(long, value_delimiter = ',', default_value = "1,1")]
    a: Vec<f64>,
    /// Shifts t_1,…,t_{2k}
    #[arg(long, value_delimiter = ',', default_value = "0,0", allow_hyphen_values = true)]
    t: Vec<f64>,
    /// Exponent A in |t_j| ≤ q^A
    #[arg(long = "A", default_value_t = 1.0)]
    big_a: f64,
}

impl ShiftArgs {
    fn config(&self) -> Result<ShiftConfig, Failure> {
        ShiftConfig::new(self.a.clone(), self.t.clone(), self.big_a).map_err(Failure::from)
    }
}

enum Failure {
    Invalid(String),
    Verification(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument { name, reason } => Failure::Invalid(format!("--{name}: {reason}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn invalid(flag: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Invalid(format!("--{flag}: {reason}"))
}

fn parse_range(flag: &str, text: &str) -> Result<(u64, u64), Failure> {
    let (a, b) = text.split_once(':').ok_or_else(|| invalid(flag, format!("expected a:b, got `{text}`")))?;
    let a: u64 = a.trim().parse().map_err(|_| invalid(flag, format!("bad lower end `{a}`")))?;
    let b: u64 = b.trim().parse().map_err(|_| invalid(flag, format!("bad upper end `{b}`")))?;
    if a < 3 || a > b {
        return Err(invalid(flag, format!("need 3 ≤ a ≤ b, got {a}:{b}")));
    }
    Ok((a, b))
}

fn check_q(q: u64, min: u64) -> Result<(), Failure> {
    if q < min {
        return Err(invalid("q", format!("q = {q} must be at least {min}")));
    }
    Ok(())
}

fn check_positive(flag: &str, v: f64) -> Result<(), Failure> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(invalid(flag, format!("{v} must be a positive real")));
    }
    Ok(())
}

fn report_table(reports: &[MomentReport], timings: bool) -> Table {
    let mut headers = vec![
        "q", "phi_q", "predictor", "config", "sigma_offset", "count", "empirical", "predicted", "ratio", "warnings",
    ];
    if timings {
        headers.push("runtime_ms");
    }
    let mut t = Table::new(headers);
    for r in reports {
        let mut row: Vec<Cell> = vec![
            r.q.into(),
            r.phi.into(),
            r.predictor.into(),
            r.config.clone().into(),
            r.sigma_offset.into(),
            r.count.into(),
            r.empirical.into(),
            r.predicted.into(),
            r.ratio.into(),
            r.warnings.into(),
        ];
        if timings {
            row.push(r.runtime_ms.into());
        }
        t.push(row);
    }
    t
}

fn emit(cli: &Cli, table: &Table) -> Result<(), Failure> {
    let text = table.render(cli.out)?;
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("--output {}: {e}", path.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

fn characters_cmd(cli: &Cli, q: u64, primitive: bool, parity: Option<Parity>) -> Result<(), Failure> {
    check_q(q, 1)?;
    let mut t = Table::new([
        "q", "index", "exponents", "order", "parity", "conductor", "primitive", "real", "gauss_re", "gauss_im",
    ]);
    for chi in enumerate_characters(q) {
        if (primitive && !chi.is_primitive()) || parity.is_some_and(|p| chi.parity() != p) {
            continue;
        }
        let tau = chi.gauss_sum();
        let exps = chi.exponents().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";");
        t.push(vec![
            q.into(),
            chi.index().into(),
            exps.into(),
            chi.order().into(),
            chi.parity().to_string().into(),
            chi.conductor().into(),
            chi.is_primitive().into(),
            chi.is_real().into(),
            tau.re.into(),
            tau.im.into(),
        ]);
    }
    emit(cli, &t)
}

fn lvalue_cmd(cli: &Cli, q: u64, index: Option<usize>, sigma: f64, t: f64) -> Result<(), Failure> {
    check_q(q, 1)?;
    let chars = enumerate_characters(q);
    let chosen: Vec<_> = match index {
        Some(i) => vec![chars.get(i).cloned().ok_or_else(|| invalid("index", format!("{i} ≥ φ(q) = {}", chars.len())))?],
        None => chars,
    };
    let mut table = Table::new(["q", "index", "sigma", "t", "re", "im", "abs"]);
    for chi in &chosen {
        let v = match l_value(EvalPoint::new(sigma, t), chi) {
            Ok(v) => v,
            Err(Error::Pole(p)) if index.is_none() => {
                eprintln!("warning: --sigma: skipping character {} (pole at s = {p})", chi.index());
                continue;
            }
            Err(Error::Pole(p)) => return Err(invalid("sigma", format!("pole at s = {p}"))),
            Err(e) => return Err(e.into()),
        };
        table.push(vec![q.into(), chi.index().into(), sigma.into(), t.into(), v.re.into(), v.im.into(), v.norm().into()]);
    }
    emit(cli, &table)
}

fn theta_moments_cmd(cli: &Cli, range: &str, k: f64, parity: Parity, eps: f64) -> Result<(), Failure> {
    let (a, b) = parse_range("q-range", range)?;
    check_positive("k", k)?;
    check_positive("eps", eps)?;
    let qs: Vec<u64> = (a..=b).collect();
    let rows: Vec<Option<Vec<Cell>>> = rayon_map(&qs, |&q| {
        let chars = primitive_characters(q, Some(parity));
        if chars.is_empty() {
            return Ok(None);
        }
        let m = theta_moment_over(&chars, k, eps)?;
        let phi = totient(q);
        let bound = theta_moment_bound(q, phi, k, parity);
        Ok(Some(vec![q.into(), phi.into(), m.count.into(), m.moment.into(), bound.into(), (m.moment / bound).into()]))
    })?;
    let mut t = Table::new(["q", "phi_q", "count_primitive", "moment", "predicted_bound", "ratio"]);
    rows.into_iter().flatten().for_each(|r| t.push(r));
    emit(cli, &t)
}

fn char_sum_moments_cmd(cli: &Cli, range: &str, k: f64, y_mode: YMode) -> Result<(), Failure> {
    let (a, b) = parse_range("q-range", range)?;
    check_positive("k", k)?;
    let qs: Vec<u64> = (a..=b).collect();
    let rows = rayon_map(&qs, |&q| {
        let y = y_mode.resolve(q);
        if !(y >= 2.0) {
            return Err(Error::InvalidArgument { name: "y-mode", reason: format!("y = {y} must be at least 2") });
        }
        let chars = primitive_characters(q, None);
        let m = char_sum_moment_over(&chars, k, y)?;
        let phi = totient(q) as f64;
        let e = (k - 1.0) * (k - 1.0);
        let pred = phi * y.powf(k) * y.ln().powf(e);
        let dual = phi * y.powf(k) * (2.0 * q as f64 / y).ln().powf(e);
        Ok(vec![q.into(), y.into(), m.into(), pred.into(), dual.into(), (m / pred).into(), (m / dual).into()])
    })?;
    let mut t = Table::new(["q", "y", "moment", "predicted", "dual_predicted", "ratio", "dual_ratio"]);
    rows.into_iter().for_each(|r| t.push(r));
    emit(cli, &t)
}

fn rayon_map<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> dml::Result<R> + Sync + Send,
) -> Result<Vec<R>, Failure> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect::<dml::Result<Vec<R>>>().map_err(Failure::from)
}

fn classify_cmd(cli: &Cli, q: u64, shifts: &ShiftArgs, mode: &str, threshold: f64) -> Result<(), Failure> {
    check_q(q, 3)?;
    let cfg = shifts.config()?;
    cfg.check_shift_range(q)?;
    let mode = match mode {
        "paper" | "exact" => LadderMode::Exact,
        "demo" => {
            check_positive("threshold", threshold)?;
            LadderMode::Demo { threshold }
        }
        other => return Err(invalid("mode", format!("expected exact|demo, got `{other}`"))),
    };
    let ladder = dyadic_ladder(q, &cfg, mode)?;
    if ladder.degenerate {
        eprintln!("warning: no ladder level lies under the cap; every character is tested at level 1 only");
    }
    let chars = primitive_characters(q, None);
    let tables = rayon_map(&chars, |chi| segment_table(chi, &ladder, &cfg))?;
    let mut t = Table::new(["q", "index", "label", "level", "witness", "segments_re", "cap_index", "degenerate"]);
    for (chi, table) in chars.iter().zip(tables) {
        let label = classify_from_table(&table, &ladder);
        // Re G_(i,𝓘) for i = 1..𝓘, the values compared against β_i^{-3/4}
        let top = ladder.cap_index;
        let segments: Vec<String> = (1..=top).map(|i| format_real(table[i - 1][top - i].re)).collect();
        let (level, witness): (Cell, Cell) = match label {
            dml::bounds::ClassLabel::T => ("".into(), "".into()),
            dml::bounds::ClassLabel::S { j, witness } => (j.into(), witness.into()),
        };
        t.push(vec![
            q.into(),
            chi.index().into(),
            label.to_string().into(),
            level,
            witness,
            segments.join(";").into(),
            ladder.cap_index.into(),
            ladder.degenerate.into(),
        ]);
    }
    emit(cli, &t)
}

#[allow(clippy::too_many_arguments)]
fn scan_cmd(
    cli: &Cli,
    pred: &str,
    range: &str,
    step: &str,
    k: f64,
    parity: Parity,
    y_mode: YMode,
    y: Option<f64>,
    exponent: f64,
    offset: f64,
    eps: f64,
    shifts: &ShiftArgs,
) -> Result<(), Failure> {
    let (a, b) = parse_range("q-range", range)?;
    let qs: Vec<u64> = match step {
        "prime" => (a..=b).filter(|&q| is_prime(q)).collect(),
        "all" => (a..=b).collect(),
        other => return Err(invalid("step", format!("expected prime|all, got `{other}`"))),
    };
    if qs.is_empty() {
        return Err(invalid("q-range", "no moduli in range"));
    }
    check_positive("k", k)?;
    let need_y = || y.ok_or_else(|| invalid("y", format!("--pred {pred} needs --y")));
    let predictor = match pred {
        "b" => Predictor::BoundB { cfg: shifts.config()?, offset },
        "b-star" => Predictor::BoundBStar { cfg: shifts.config()?, y: need_y()? },
        "l0" => Predictor::CrudeOffLine { cfg: shifts.config()?, y: need_y()?, exponent },
        "thm2" => Predictor::Theta { k, parity, eps },
        "thm3" => Predictor::CharSum { k, y: y_mode },
        "thm3-dual" => Predictor::CharSumDual { k, y: y_mode },
        other => return Err(invalid("pred", format!("expected b|b-star|l0|thm2|thm3|thm3-dual, got `{other}`"))),
    };
    let reports = moment_ratio_scan(&qs, &predictor)?;
    emit(cli, &report_table(&reports, cli.timings))
}

fn verify_cmd(cli: &Cli, module: &str, x: f64) -> Result<(), Failure> {
    let opts = dml::verify::Options::new(x)?;
    let checks = dml::verify::run_with(module, &opts).ok_or_else(|| {
        invalid("module", format!("unknown suite `{module}` (expected one of {} or all)", dml::verify::MODULES.join(", ")))
    })?;
    let mut t = Table::new(["module", "check", "status", "detail"]);
    for c in &checks {
        t.push(vec![c.module.into(), c.name.into(), (if c.passed { "pass" } else { "FAIL" }).into(), c.detail.clone().into()]);
    }
    emit(cli, &t)?;
    let failed = checks.iter().filter(|c| !c.passed).count();
    eprintln!("{} checks, {} passed, {} failed", checks.len(), checks.len() - failed, failed);
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Characters { q, primitive, parity } => characters_cmd(cli, *q, *primitive, *parity),
        Command::Lvalue { q, index, sigma, t } => lvalue_cmd(cli, *q, *index, *sigma, *t),
        Command::ThetaMoments { q_range, k, parity, eps } => theta_moments_cmd(cli, q_range, *k, *parity, *eps),
        Command::CharSumMoments { q_range, k, y_mode } => char_sum_moments_cmd(cli, q_range, *k, *y_mode),
        Command::ShiftedMoments { q, shifts, offset } => {
            check_q(*q, 3)?;
            let reports = moment_ratio_scan(&[*q], &Predictor::BoundB { cfg: shifts.config()?, offset: *offset })?;
            emit(cli, &report_table(&reports, cli.timings))
        }
        Command::Classify { q, shifts, mode, threshold } => classify_cmd(cli, *q, shifts, mode, *threshold),
        Command::Scan { pred, q_range, step, k, parity, y_mode, y, exponent, offset, eps, shifts } => scan_cmd(
            cli, pred, q_range, step, *k, *parity, *y_mode, *y, *exponent, *offset, *eps, shifts,
        ),
        Command::Verify { module, x } => verify_cmd(cli, module, *x),
    }
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
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads: must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
