use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use tubeinv::alphainv::{check_suite, ciz_reference, diagonal_spectrum, z_matrix, Backend};
use tubeinv::frob::{frobenius_report, FROB_MAX_H};
use tubeinv::linalg::Tolerance;
use tubeinv::mtc::modular_data;
use tubeinv::quivmod::{ade_quiver, is_builtin, AdeQuiver, BUILTIN_NAMES_NOTE};

mod emit;

/// Largest h for which `invariant` runs the direct solver.
const INVARIANT_MAX_H: u32 = 12;

#[derive(Parser, Debug)]
#[command(name = "tubeinv", version, about = "Modular invariants of Temperley-Lieb module categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// S, T, quantum dimensions and fusion rules at level h
    ModularData,
    /// Z(TM) for a quiver, with invariance checks and the CIZ verdict
    Invariant,
    /// Exact diagonal of Z from the adjacency spectrum
    Diagonal,
    /// Exact Frobenius algebra checks (h ≤ 6)
    Frobenius,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Level h (Coxeter number)
    #[arg(long, global = true)]
    h: Option<u32>,
    /// Builtin quiver name or path to a quiver JSON file
    #[arg(long, global = true)]
    quiver: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = BackendArg::Exact)]
    backend: BackendArg,
    /// Relative singular value threshold for the float backend
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Also impose the braiding constraint on the two-strand object
    #[arg(long, global = true)]
    deep: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum BackendArg {
    Exact,
    Float,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Pretty,
    Latex,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub h: Option<u32>,
    pub quiver: Option<String>,
    pub backend: Backend,
    pub tolerance: Tolerance,
    pub deep: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// A finished run: the rendered report and whether every check passed.
struct Outcome {
    text: String,
    pass: bool,
}

#[derive(Debug)]
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn config(cli: &Cli) -> Result<RunConfig, InputError> {
    let c = &cli.common;
    let backend = match c.backend {
        BackendArg::Exact => Backend::Exact,
        BackendArg::Float => Backend::Float,
    };
    let mut tolerance = Tolerance::default();
    if let Some(t) = c.tolerance {
        if !(t.is_finite() && t > 0.0 && t < 1.0) {
            return Err(InputError(format!("tolerance must lie in (0, 1), got {t}")));
        }
        if backend == Backend::Exact {
            eprintln!("warning: --tolerance is ignored by the exact backend");
        }
        tolerance = Tolerance { rel: t };
    }
    let command = match cli.command {
        Command::ModularData => "modular-data",
        Command::Invariant => "invariant",
        Command::Diagonal => "diagonal",
        Command::Frobenius => "frobenius",
    };
    Ok(RunConfig {
        command,
        h: c.h,
        quiver: c.quiver.clone(),
        backend,
        tolerance,
        deep: c.deep,
        format: c.format,
        out: c.out.clone(),
    })
}

fn load_quiver(cfg: &RunConfig) -> Result<AdeQuiver, InputError> {
    let src = cfg
        .quiver
        .as_deref()
        .ok_or_else(|| InputError(format!("--quiver is required for {}", cfg.command)))?;
    let q = if is_builtin(src) {
        ade_quiver(src)?
    } else {
        let path = std::path::Path::new(src);
        if !path.exists() {
            return Err(InputError(format!(
                "'{src}' is neither a builtin quiver ({BUILTIN_NAMES_NOTE}) nor a readable file"
            )));
        }
        let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{src}: {e}")))?;
        AdeQuiver::from_json(&text)?
    };
    if let Some(h) = cfg.h {
        if h != q.h {
            return Err(InputError(format!("--h {h} does not match the quiver's h = {}", q.h)));
        }
    }
    if q.components > 1 {
        eprintln!("warning: quiver {} has {} connected components", q.name, q.components);
    }
    Ok(q)
}

fn cmd_modular_data(cfg: &RunConfig) -> Result<Outcome, InputError> {
    let h = cfg.h.ok_or_else(|| InputError("--h is required for modular-data".into()))?;
    let md = modular_data(h)?;
    let text = match cfg.format {
        Format::Json => emit::json_text(&md.to_json(15)),
        Format::Pretty => emit::pretty_modular(&md),
        Format::Latex => emit::latex_modular(&md),
    };
    Ok(Outcome { text, pass: true })
}

fn cmd_invariant(cfg: &RunConfig) -> Result<Outcome, InputError> {
    let q = load_quiver(cfg)?;
    if q.h > INVARIANT_MAX_H {
        return Err(InputError(format!(
            "the direct solver is limited to h ≤ {INVARIANT_MAX_H} (got h = {}); use `diagonal` for the exact diagonal",
            q.h
        )));
    }
    let z = z_matrix(&q, cfg.backend, cfg.tolerance, cfg.deep)?;
    let suite = check_suite(&z)?;
    let labels: Vec<usize> = (1..q.h as usize).collect();
    let value = json!({
        "h": z.h,
        "quiver": z.quiver,
        "labels": labels,
        "Z": z.z,
        "checks": {
            "T": suite.report.commutes_with_t && suite.element_t,
            "S": suite.report.commutes_with_s,
            "haploid": suite.report.haploid,
            "dim_condition": suite.report.dim_condition,
            "s_defect": suite.report.s_defect,
        },
        "ciz_match": suite.ciz_match,
        "backend": z.backend,
        "tolerance": z.tolerance,
        "deep": z.deep,
        "min_rank_gap": z.gap,
    });
    let text = match cfg.format {
        Format::Json => emit::json_text(&value),
        Format::Pretty => emit::pretty_invariant(&value, &z.z),
        Format::Latex => emit::latex_partition(&z.z),
    };
    Ok(Outcome {
        text,
        pass: suite.all_pass(),
    })
}

fn cmd_diagonal(cfg: &RunConfig) -> Result<Outcome, InputError> {
    let q = load_quiver(cfg)?;
    let diag = diagonal_spectrum(&q);
    // builtin quivers are compared against their CIZ diagonal
    let expected = ciz_reference(q.h)
        .into_iter()
        .find(|e| e.name == q.name && is_builtin(&q.name))
        .map(|e| (0..e.z.len()).map(|k| e.z[k][k]).collect::<Vec<i64>>());
    let matches = expected.as_ref().map(|e| *e == diag);
    let value = json!({
        "h": q.h,
        "quiver": q.name,
        "labels": (1..q.h as usize).collect::<Vec<_>>(),
        "diagonal": diag,
        "ciz_diagonal_match": matches,
    });
    let text = match cfg.format {
        Format::Json => emit::json_text(&value),
        Format::Pretty => emit::pretty_diagonal(&q.name, q.h, &diag, matches),
        Format::Latex => emit::latex_diagonal(&diag),
    };
    Ok(Outcome {
        text,
        pass: matches != Some(false),
    })
}

fn cmd_frobenius(cfg: &RunConfig) -> Result<Outcome, InputError> {
    let q = load_quiver(cfg)?;
    if cfg.backend != Backend::Exact || q.h > FROB_MAX_H {
        return Err(InputError(format!("exact backend required, h ≤ {FROB_MAX_H}")));
    }
    let report = frobenius_report(&q)?;
    let mut value = serde_json::to_value(&report)?;
    value["all_pass"] = Value::Bool(report.all_pass());
    let text = match cfg.format {
        Format::Json => emit::json_text(&value),
        Format::Pretty => emit::pretty_frobenius(&report),
        Format::Latex => emit::latex_frobenius(&report),
    };
    Ok(Outcome {
        text,
        pass: report.all_pass(),
    })
}

fn run(cli: &Cli) -> Result<Outcome, InputError> {
    let cfg = config(cli)?;
    let out = match cli.command {
        Command::ModularData => cmd_modular_data(&cfg)?,
        Command::Invariant => cmd_invariant(&cfg)?,
        Command::Diagonal => cmd_diagonal(&cfg)?,
        Command::Frobenius => cmd_frobenius(&cfg)?,
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, &out.text).map_err(|e| InputError(format!("{}: {e}", path.display())))?,
        None => print!("{}", out.text),
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
