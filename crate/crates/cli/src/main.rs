//! `bcb`: kernels, classification, verification suites and integrals on
//! bicomplex product domains.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use bcb_core::builtins::builtin;
use bcb_core::field::{classify_seeded, CLASSIFY_STEP, CLASSIFY_TOL};
use bcb_core::kernels::{kernel_for, BcKernelKind};
use bcb_core::quadrature::{build_rule, integrate_bc, DomainFile};
use bcb_core::sampling::interior_samples;
use bcb_core::verify::{run_suite, Suite, VerifyConfig, CLASSIFY_SAMPLES, RECTANGLE_KERNEL_BASIS};
use bcb_core::{BiComplex, Error, ProductDomain};

const DEFAULT_ORDER: usize = 40;
const MIN_ORDER: usize = 4;

#[derive(Parser)]
#[command(
    name = "bcb",
    version,
    about = "Bicomplex Bergman spaces: kernels, projections and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Domain spec file (JSON) or the alias `bidisk`.
    #[arg(long, default_value = "bidisk")]
    domain: String,
    /// Quadrature order; overrides the domain file.
    #[arg(long)]
    order: Option<usize>,
    /// Pass tolerance; defaults per suite.
    #[arg(long)]
    tol: Option<f64>,
    /// Halton scramble seed (0 = plain sequence).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Reproducing kernels.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Operator-kernel memberships of a built-in field.
    Classify {
        label: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite and print its JSON report.
    Verify {
        #[arg(long)]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// `∫_Ω F dμ` of a built-in field.
    Integrate {
        label: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    /// `K(Z, W)` for one pair.
    Eval {
        #[arg(long, default_value = "bergman")]
        kind: String,
        /// Bicomplex JSON, `{"b1":[re,im],"b2":[re,im]}` or `{"z1":...,"z2":...}`.
        #[arg(long = "Z")]
        z: String,
        #[arg(long = "W")]
        w: String,
        #[command(flatten)]
        common: Common,
    },
    /// CSV of `K(Z, W)` over interior sample points `Z`.
    Table {
        #[arg(long, default_value = "bergman")]
        kind: String,
        #[arg(long = "W")]
        w: String,
        /// Number of sample points.
        #[arg(long, default_value_t = 25)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::UnknownField(_) | Error::StepTooSmall(_) => 2,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Output of a command: text plus whether checks passed.
struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, pass: true }
    }
}

fn load_domain(common: &Common) -> CliResult<(ProductDomain, usize)> {
    let (domain, file_order) = if common.domain == "bidisk" {
        (ProductDomain::bidisk(), None)
    } else {
        let text = fs::read_to_string(&common.domain).map_err(|e| {
            Failure::usage(format!("cannot read domain file {}: {e}", common.domain))
        })?;
        let f = DomainFile::from_json(&text)?;
        (f.domain, f.order)
    };
    let order = common.order.or(file_order).unwrap_or(DEFAULT_ORDER);
    if order < MIN_ORDER {
        return Err(Failure::usage(format!(
            "order must be at least {MIN_ORDER}, got {order}"
        )));
    }
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            return Err(Failure::usage(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    Ok((domain, order))
}

fn parse_point(name: &str, text: &str) -> CliResult<BiComplex> {
    serde_json::from_str(text).map_err(|e| Failure::usage(format!("cannot parse {name}: {e}")))
}

fn parse_kind(kind: &str) -> CliResult<BcKernelKind> {
    kind.parse::<BcKernelKind>().map_err(Failure::from)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values serialize")
}

fn kernel_eval(kind: &str, z: &str, w: &str, common: &Common) -> CliResult<Output> {
    let kind = parse_kind(kind)?;
    let (z, w) = (parse_point("--Z", z)?, parse_point("--W", w)?);
    let (dom, _) = load_domain(common)?;
    for (name, p) in [("Z", z), ("W", w)] {
        if !dom.contains(p) {
            return Err(Error::OutsideDomain(format!("{name} = {p}")).into());
        }
    }
    let k = kernel_for(&dom, kind, RECTANGLE_KERNEL_BASIS)?;
    let v = k.try_eval(z, w)?;
    Ok(Output::ok(
        serde_json::to_string(&v).expect("bicomplex serializes"),
    ))
}

fn kernel_table(kind: &str, w: &str, points: usize, common: &Common) -> CliResult<Output> {
    let kind = parse_kind(kind)?;
    let w = parse_point("--W", w)?;
    let (dom, _) = load_domain(common)?;
    if !dom.contains(w) {
        return Err(Error::OutsideDomain(format!("W = {w}")).into());
    }
    if points == 0 {
        return Err(Failure::usage("--points must be at least 1"));
    }
    let k = kernel_for(&dom, kind, RECTANGLE_KERNEL_BASIS)?;
    let zs = interior_samples(&dom, points, 0.0, common.seed)?;
    let mut text =
        String::from("z_b1_re,z_b1_im,z_b2_re,z_b2_im,k_b1_re,k_b1_im,k_b2_re,k_b2_im\n");
    for z in zs {
        let v = k.try_eval(z, w)?;
        let row = [
            z.b1.re, z.b1.im, z.b2.re, z.b2.im, v.b1.re, v.b1.im, v.b2.re, v.b2.im,
        ];
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    Ok(Output::ok(text.trim_end().to_string()))
}

fn cmd_classify(label: &str, common: &Common) -> CliResult<Output> {
    let f = builtin(label)?;
    let (dom, _) = load_domain(common)?;
    let tol = common.tol.unwrap_or(CLASSIFY_TOL);
    let m = classify_seeded(&f, &dom, CLASSIFY_SAMPLES, CLASSIFY_STEP, tol, common.seed)?;
    let v = json!({
        "label": label,
        "membership": {
            "ker_star": m.star,
            "ker_dagger": m.dagger,
            "ker_bar": m.bar,
            "ker_dagger_bar": m.dagger_bar,
            "ker_star_bar": m.star_bar,
            "ker_star_dagger": m.star_dagger,
            "hol_bc": m.hol,
        },
        "max_residual": {
            "d_star": m.max_residual[0],
            "d_dagger": m.max_residual[1],
            "d_bar": m.max_residual[2],
        },
        "samples": m.samples,
        "step": CLASSIFY_STEP,
        "tol": tol,
    });
    Ok(Output::ok(pretty(&v)))
}

fn cmd_verify(suite: &str, common: &Common) -> CliResult<Output> {
    let suite: Suite = suite.parse()?;
    let (dom, order) = load_domain(common)?;
    let cfg = VerifyConfig {
        order,
        tol: common.tol,
        seed: common.seed,
    };
    let report = run_suite(suite, &dom, &cfg)?;
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    Ok(Output {
        text,
        pass: report.pass,
    })
}

fn cmd_integrate(label: &str, common: &Common) -> CliResult<Output> {
    let f = builtin(label)?;
    let (dom, order) = load_domain(common)?;
    let r1 = build_rule(&dom.omega1, order)?;
    let r2 = build_rule(&dom.omega2, order)?;
    let v = integrate_bc(&dom, &r1, &r2, &f)?;
    Ok(Output::ok(pretty(
        &json!({ "label": label, "order": order, "integral": v }),
    )))
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("BCB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n >= 1).ok_or_else(|| {
        Failure::usage(format!(
            "BCB_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot configure threads: {e}")))
}

fn emit(out: &Output, path: Option<&PathBuf>) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, format!("{}\n", out.text))
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", out.text).map_err(|e| Failure {
                code: 1,
                message: e.to_string(),
            })
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let (out, common) = match &cli.command {
        Command::Kernel(KernelCommand::Eval { kind, z, w, common }) => {
            (kernel_eval(kind, z, w, common)?, common)
        }
        Command::Kernel(KernelCommand::Table {
            kind,
            w,
            points,
            common,
        }) => (kernel_table(kind, w, *points, common)?, common),
        Command::Classify { label, common } => (cmd_classify(label, common)?, common),
        Command::Verify { suite, common } => (cmd_verify(suite, common)?, common),
        Command::Integrate { label, common } => (cmd_integrate(label, common)?, common),
    };
    emit(&out, common.output.as_ref())?;
    Ok(out.pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("bcb: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
