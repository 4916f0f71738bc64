//! Command-line front end: `weights`, `convergence`, `verify-matrix` and
//! `integrate`.
//!
//! Exit codes: 0 success, 2 bad arguments (including a table that does not
//! match `--kernel`/`--alpha`), 3 failed verification, 4 numerical
//! non-convergence, 5 unreadable input file.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coeffmat::{block_structure, build_k, det_factorization_check, off_diag_factorization};
use crate::convergence::{convergence_study, reports_to_csv, ConvergenceConfig};
use crate::error::Error;
use crate::kernels::{builtin, builtin_phi, KernelKind};
use crate::quadrature::{corrected_quadrature, Arithmetic, QuadratureConfig};
use crate::refint::reference_integral;
use crate::weightgen::{solve_weights, WeightConfig, WeightTable};
use crate::xprec::{Precision, XReal};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_INPUT: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "ctrule", version, about = "Corrected trapezoidal rules for weakly singular integrals in 2D")]
struct Cli {
    /// Run on one thread; output is then bit-reproducible.
    #[arg(long, global = true)]
    serial: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a correction-weight table.
    Weights(WeightsArgs),
    /// Measure convergence orders against the polar reference integral.
    Convergence(ConvergenceArgs),
    /// Certify the coefficient matrices in exact arithmetic.
    VerifyMatrix(VerifyArgs),
    /// Apply a weight table to an integrand.
    Integrate(IntegrateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Working precision in significant decimal digits.
    #[arg(long, default_value_t = 50)]
    working_digits: u32,
    /// Regularizer exponent k of exp(-|x|^k); defaults to 6 (on-diagonal) or 8.
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args, Debug)]
struct WeightsArgs {
    #[arg(long)]
    kernel: KernelKind,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    p: u32,
    /// Coarsest mesh of the extrapolation, a power of two such as 1/32.
    #[arg(long, default_value = "1/32")]
    h_base: String,
    /// Number of mesh levels.
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Minimum number of digits the table must support.
    #[arg(long)]
    digits: Option<u32>,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Double,
    Extended,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[arg(long)]
    kernel: KernelKind,
    #[arg(long)]
    alpha: f64,
    /// Comma-separated orders.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u32>,
    /// Comma-separated mesh sizes, powers of two.
    #[arg(long, value_delimiter = ',', default_value = "1/8,1/16,1/32,1/64,1/128,1/256,1/512")]
    h: Vec<String>,
    /// Integrand; defaults to the built-in test function of the kernel.
    #[arg(long)]
    phi: Option<String>,
    /// Errors at or below this value are left out of the slope fit.
    #[arg(long, default_value_t = 1e-12)]
    floor: f64,
    #[arg(long, value_enum, default_value_t = Mode::Double)]
    mode: Mode,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    kernel: KernelKind,
    #[arg(long)]
    p_max: u32,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    /// Weight table produced by `weights`.
    #[arg(long)]
    weights: PathBuf,
    #[arg(long)]
    phi: String,
    /// Mesh size.
    #[arg(long)]
    h: String,
    #[arg(long, value_enum, default_value_t = Mode::Double)]
    mode: Mode,
    /// Expected kernel; a table for another kernel is rejected.
    #[arg(long)]
    kernel: Option<KernelKind>,
    /// Expected alpha; a table for another alpha is rejected.
    #[arg(long)]
    alpha: Option<f64>,
    /// Also print the reference integral and the absolute error.
    #[arg(long)]
    compare_ref: bool,
    #[arg(long, default_value_t = 50)]
    working_digits: u32,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::SingularMatrix { .. } | Error::Richardson(_) => EXIT_NUMERIC,
            Error::Io(_) | Error::Json(_) => EXIT_INPUT,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: EXIT_INPUT, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses a power-of-two mesh size written as `1/32`, `0.03125` or `2^-5`
/// and returns its exponent.
pub fn parse_mesh(s: &str) -> Option<u32> {
    let s = s.trim();
    let value = if let Some(e) = s.strip_prefix("2^") {
        let e: i32 = e.trim_matches(|c| c == '(' || c == ')').parse().ok()?;
        return (e <= 0).then_some((-e) as u32);
    } else if let Some((n, d)) = s.split_once('/') {
        n.trim().parse::<f64>().ok()? / d.trim().parse::<f64>().ok()?
    } else {
        s.parse::<f64>().ok()?
    };
    if !(value > 0.0 && value <= 1.0) {
        return None;
    }
    let m = -value.log2();
    (m.fract() == 0.0 && m < 64.0).then_some(m as u32)
}

fn mesh_arg(s: &str) -> std::result::Result<u32, Failure> {
    parse_mesh(s).ok_or_else(|| Failure {
        code: EXIT_USAGE,
        message: format!("mesh size {s:?} is not a power of two 2^-m"),
    })
}

fn cmd_weights(a: WeightsArgs, out: &mut dyn Write) -> CmdResult {
    let prec = Precision::new(a.common.working_digits.max(20));
    let alpha = XReal::parse(&a.alpha, prec)?;
    let cfg = WeightConfig {
        h_base_exp: mesh_arg(&a.h_base)?,
        levels: a.levels,
        orders: None,
        k: a.common.k,
        precision: prec,
        verify: true,
    };
    let table = solve_weights(a.kernel, a.p, &alpha, &cfg)?;
    for w in &table.weights {
        writeln!(out, "w{} = {}", w.gamma, w.value)?;
    }
    writeln!(out, "digits = {}", table.digits)?;
    match &a.out {
        Some(path) => {
            table.save(path)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => writeln!(out, "{}", table.to_json()?)?,
    }
    if let Some(want) = a.digits {
        if table.digits < want {
            return Err(Failure {
                code: EXIT_NUMERIC,
                message: format!("only {} digits reached, {want} requested", table.digits),
            });
        }
    }
    Ok(EXIT_OK)
}

fn cmd_convergence(a: ConvergenceArgs, serial: bool, out: &mut dyn Write) -> CmdResult {
    let prec = Precision::new(a.common.working_digits.max(20));
    let phi = match &a.phi {
        Some(name) => builtin(name, prec)?,
        None => builtin_phi(a.kernel),
    };
    let h_exps = a.h.iter().map(|s| mesh_arg(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    let cfg = ConvergenceConfig {
        h_exps,
        floor_threshold: a.floor,
        arithmetic: match a.mode {
            Mode::Double => Arithmetic::Double,
            Mode::Extended => Arithmetic::Extended(prec),
        },
        reference_digits: 16,
        weights: WeightConfig { k: a.common.k, precision: prec, ..WeightConfig::default() },
        serial,
    };
    let mut reports = Vec::with_capacity(a.p.len());
    for &p in &a.p {
        reports.push(convergence_study(&phi, a.kernel, a.alpha, p, None, &cfg)?);
    }
    let csv = reports_to_csv(&reports);
    match &a.out {
        Some(path) => std::fs::write(path, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    let mut code = EXIT_OK;
    for r in &reports {
        match &r.fit {
            Some(f) => writeln!(
                out,
                "# p={} slope={:.3} expected={:.3} fit_h=[{:e},{:e}] points={}{}",
                r.p,
                f.slope,
                r.expected_order(),
                f.h_range.0,
                f.h_range.1,
                f.points_used,
                if f.dropped_coarsest { " coarsest_dropped" } else { "" }
            )?,
            None => {
                writeln!(out, "# p={} no slope: fewer than two errors above {:e}", r.p, r.floor_threshold)?;
                code = EXIT_NUMERIC;
            }
        }
    }
    Ok(code)
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let off = a.kernel.is_off_diag();
    let p_min = if off { 2 } else { 0 };
    if a.p_max < p_min.max(1) {
        return Err(Failure { code: EXIT_USAGE, message: format!("--p-max must be at least {}", p_min.max(1)) });
    }
    let mut all_ok = true;
    for p in p_min..=a.p_max {
        let k = build_k(a.kernel, p)?;
        let det = k.det();
        let nonsingular = det != 0;
        let mut line = format!("p={p:<2} size={:<3} nonsingular={nonsingular}", k.size());
        let mut ok = nonsingular;
        if off {
            let f = off_diag_factorization(&k)?;
            line += &format!(" K=EH={}", f.k_equals_eh && f.det_product_ok);
            ok &= f.k_equals_eh && f.det_product_ok;
        } else if p >= 1 {
            let b = block_structure(&k)?;
            line += &format!(" C=0={} vandermonde={} detK=detA*detD={}", b.c_is_zero, b.a1_a4_vandermonde && b.first_column_ok, b.det_product_ok && b.d_equals_4e);
            ok &= b.all_ok();
        }
        if p >= 2 {
            let r = det_factorization_check(a.kernel, p, a.trials.max(2), a.seed)?;
            line += &format!(" ratio_constant={} ratio={}", r.constant_ratio, r.ratio);
            ok &= r.constant_ratio;
        }
        if let Ok(c) = k.condition_estimate(Precision::new(30)) {
            line += &format!(" cond={c:.3e}");
        }
        line += if ok { " PASS" } else { " FAIL" };
        writeln!(out, "{line}")?;
        all_ok &= ok;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_integrate(a: IntegrateArgs, serial: bool, out: &mut dyn Write) -> CmdResult {
    let table = WeightTable::load(&a.weights).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", a.weights.display()),
    })?;
    let alpha = table.alpha_f64()?;
    if let Some(k) = a.kernel {
        if k != table.kernel {
            return Err(Error::TableMismatch(format!("table is for {}, --kernel says {k}", table.kernel)).into());
        }
    }
    if let Some(al) = a.alpha {
        if (al - alpha).abs() > 1e-12 {
            return Err(Error::TableMismatch(format!("table has alpha = {}, --alpha says {al}", table.alpha)).into());
        }
    }
    let prec = Precision::new(a.working_digits.max(20));
    let phi = builtin(&a.phi, prec)?;
    let h = 0.5f64.powi(mesh_arg(&a.h)? as i32);
    let cfg = QuadratureConfig {
        h,
        truncation_radius: None,
        arithmetic: match a.mode {
            Mode::Double => Arithmetic::Double,
            Mode::Extended => Arithmetic::Extended(prec),
        },
        serial,
    };
    let q = corrected_quadrature(&phi, table.kernel, alpha, &table, &cfg)?;
    let qx = match &q {
        crate::quadrature::QuadValue::Double(v) => {
            writeln!(out, "Q = {v:.17e}")?;
            XReal::from_f64(*v, prec)
        }
        crate::quadrature::QuadValue::Extended(x) => {
            writeln!(out, "Q = {}", x.to_sci_string(prec.digits() as usize))?;
            x.clone()
        }
    };
    if a.compare_ref {
        let r = reference_integral(&phi, table.kernel, alpha, 20)?;
        writeln!(out, "reference = {}", r.value.to_sci_string(20))?;
        writeln!(out, "abs_error = {:.3e}", (qx - &r.value).abs().to_f64())?;
    }
    Ok(EXIT_OK)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Regular output goes to `out`, diagnostics to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let serial = cli.serial;
    let body = move |buf: &mut Vec<u8>| match cli.command {
        Command::Weights(a) => cmd_weights(a, buf),
        Command::Convergence(a) => cmd_convergence(a, serial, buf),
        Command::VerifyMatrix(a) => cmd_verify(a, buf),
        Command::Integrate(a) => cmd_integrate(a, serial, buf),
    };
    let mut buf = Vec::new();
    let result = if serial {
        match rayon::ThreadPoolBuilder::new().num_threads(1).build() {
            Ok(pool) => pool.install(|| body(&mut buf)),
            Err(e) => Err(Failure { code: EXIT_USAGE, message: e.to_string() }),
        }
    } else {
        body(&mut buf)
    };
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ctrule").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn meshes() {
        assert_eq!(parse_mesh("1/32"), Some(5));
        assert_eq!(parse_mesh("0.125"), Some(3));
        assert_eq!(parse_mesh("2^-7"), Some(7));
        assert_eq!(parse_mesh("0.3"), None);
        assert_eq!(parse_mesh("4"), None);
    }

    #[test]
    fn bad_arguments() {
        assert_eq!(run_str(&["weights", "--kernel", "off-diag", "--alpha", "0.5", "--p", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["weights", "--kernel", "sideways", "--alpha", "0.5", "--p", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["weights", "--kernel", "on-diag-x1", "--alpha", "2.5", "--p", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn verify_small() {
        let (code, out, _) = run_str(&["verify-matrix", "--kernel", "on-diag-x1", "--p-max", "3"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().count(), 4);
        assert!(out.lines().all(|l| l.ends_with("PASS")));
    }

    #[test]
    fn missing_table_file() {
        let (code, _, err) = run_str(&["integrate", "--weights", "/nonexistent/w.json", "--phi", "builtin:zero", "--h", "1/8"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("error"));
    }
}
