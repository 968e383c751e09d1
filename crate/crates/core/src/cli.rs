//! Command-line front end. Kept in the library so tests can drive it without
//! spawning a process; `main.rs` only forwards arguments and the exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measurement::{
    prepared_psi1, probabilities, run_step_i, run_step_ii_with, sample, verdict, ProtocolReport, Verdict,
};
use crate::nct::{build_certificate, enumeration_table};
use crate::observables::{chi_states, psi1};
use crate::optics::{
    build_fig2, build_fig3_joint, builtin_device, validate, DeviceGraph, JointPair, PairVariant, BUILTIN_DEVICES,
};
use crate::state::{PathSpinState, SpinVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEFECT: i32 = 2;

const STATES: [&str; 4] = ["psi1", "chi+-", "chi-+", "source"];

#[derive(Debug, Parser)]
#[command(
    name = "ks-sim",
    version,
    about = "Single-particle path/spin contextuality simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate a state through one device and sample detection events.
    Run(RunArgs),
    /// Run both protocol steps and the non-contextual certificate.
    Verify(VerifyArgs),
    /// Print the non-contextual enumeration and certificate.
    Nct(CommonArgs),
    /// Print a device graph as JSON.
    ExportDevice(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Built-in device name.
    #[arg(long, default_value = "fig3-zx-xz", conflicts_with = "device_file")]
    pub device: String,
    /// Device graph JSON file.
    #[arg(long)]
    pub device_file: Option<PathBuf>,
    /// Built-in state: psi1, chi+-, chi-+, or source (|a, x+⟩).
    #[arg(long, default_value = "psi1", conflicts_with = "state_file")]
    pub state: String,
    /// State JSON file.
    #[arg(long)]
    pub state_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, env = "KS_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    #[arg(long, env = "KS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Replacement for the built-in joint Z1X2/X1Z2 device.
    #[arg(long)]
    pub device_file: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, default_value = "fig3-zx-xz", conflicts_with = "device_file")]
    pub device: String,
    /// Validate and re-export a device file.
    #[arg(long)]
    pub device_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, mapped onto an exit code.
enum Failure {
    Usage(String),
    Defect(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_device(name: &str, file: Option<&PathBuf>) -> std::result::Result<(DeviceGraph, String), Failure> {
    let (graph, source) = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            (DeviceGraph::from_json(&text)?, path.display().to_string())
        }
        None => {
            let g = builtin_device(name).ok_or_else(|| {
                Failure::Usage(format!(
                    "unknown device `{name}`; expected one of {}",
                    BUILTIN_DEVICES.join(", ")
                ))
            })?;
            (g, name.to_string())
        }
    };
    let report = validate(&graph);
    if !report.is_valid() {
        return Err(Failure::Usage(format!(
            "invalid device {source}:\n  {}",
            report.messages().join("\n  ")
        )));
    }
    Ok((graph, source))
}

fn load_state(name: &str, file: Option<&PathBuf>) -> std::result::Result<PathSpinState, Failure> {
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(PathSpinState::from_json(&text)?);
    }
    Ok(match name {
        "psi1" => psi1(),
        "chi+-" => chi_states().0,
        "chi-+" => chi_states().1,
        "source" => PathSpinState::ket("a", SpinVector::x_plus())?,
        _ => {
            return Err(Failure::Usage(format!(
                "unknown state `{name}`; expected one of {}",
                STATES.join(", ")
            )))
        }
    })
}

fn config(command: &str, fields: Value) -> Value {
    let mut c = json!({ "command": command, "version": env!("CARGO_PKG_VERSION") });
    if let (Value::Object(dst), Value::Object(src)) = (&mut c, fields) {
        dst.extend(src);
    }
    c
}

/// Pretty JSON with object keys sorted.
fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn path_str(p: Option<&PathBuf>) -> Value {
    p.map_or(Value::Null, |p| Value::String(p.display().to_string()))
}

fn cmd_run(args: &RunArgs) -> std::result::Result<String, Failure> {
    let (graph, _) = load_device(&args.device, args.device_file.as_ref())?;
    let state = load_state(&args.state, args.state_file.as_ref())?;
    let dist = probabilities(&graph, &state)?;
    let counts = sample(&dist, args.shots, args.seed);
    if args.common.format == Format::Csv {
        return Ok(counts.to_csv());
    }
    let report = json!({
        "config": config("run", json!({
            "device": if args.device_file.is_some() { Value::Null } else { Value::String(args.device.clone()) },
            "device_file": path_str(args.device_file.as_ref()),
            "state": if args.state_file.is_some() { Value::Null } else { Value::String(args.state.clone()) },
            "state_file": path_str(args.state_file.as_ref()),
            "shots": args.shots,
            "seed": args.seed,
            "format": "json",
        })),
        "probabilities": dist,
        "counts": counts,
    });
    Ok(render(&report))
}

fn cmd_verify(args: &VerifyArgs) -> std::result::Result<(String, Verdict), Failure> {
    if args.common.format == Format::Csv {
        return Err(Failure::Usage("verify emits JSON only".into()));
    }
    if args.shots == 0 {
        return Err(Failure::Usage("verify needs --shots >= 1".into()));
    }
    let joint = match &args.device_file {
        Some(_) => load_device("", args.device_file.as_ref())?.0,
        None => build_fig3_joint(JointPair::Z1X2X1Z2),
    };
    let prepared = prepared_psi1::<f64>()?;
    let step_i = run_step_i(args.shots, args.seed)?;
    let (step_ii, ii_dist) = run_step_ii_with(&joint, &prepared, args.shots, args.seed.wrapping_add(2))?;
    let mut report = ProtocolReport {
        step_i: Some(step_i),
        step_ii: Some(step_ii),
        verdict: None,
    };
    let v = verdict(&report)?;
    report.verdict = Some(v);
    let certificate = build_certificate(&ii_dist)?;

    let zz = probabilities(&build_fig2(PairVariant::A), &prepared)?;
    let xx = probabilities(&build_fig2(PairVariant::D), &prepared)?;
    let (one, two) = (
        report.step_i.as_ref().expect("set"),
        report.step_ii.as_ref().expect("set"),
    );
    let out = json!({
        "config": config("verify", json!({
            "device_file": path_str(args.device_file.as_ref()),
            "shots": args.shots,
            "seed": args.seed,
            "format": "json",
        })),
        "probabilities": { "step_i_zz": zz, "step_i_xx": xx, "step_ii": ii_dist },
        "counts": { "step_i_zz": one.zz_counts, "step_i_xx": one.xx_counts, "step_ii": two.counts },
        "protocol": {
            "zz_always_plus": one.zz_always_plus,
            "xx_always_plus": one.xx_always_plus,
            "forbidden_equal_sign_counts": two.forbidden_equal_sign_counts,
            "opposite_sign_counts": two.opposite_sign_counts,
        },
        "verdict": v.as_str(),
        "certificate": certificate,
        "certificate_verified": certificate.verify(),
    });
    Ok((render(&out), v))
}

fn cmd_nct(args: &CommonArgs) -> std::result::Result<String, Failure> {
    if args.format == Format::Csv {
        return Err(Failure::Usage("nct emits JSON only".into()));
    }
    let dist = probabilities(&build_fig3_joint(JointPair::Z1X2X1Z2), &psi1::<f64>())?;
    let certificate = build_certificate(&dist)?;
    if !certificate.demonstrates_contradiction() {
        return Err(Failure::Defect(
            "certificate does not demonstrate the contradiction".into(),
        ));
    }
    let out = json!({
        "config": config("nct", json!({})),
        "table": enumeration_table(),
        "certificate": certificate,
    });
    Ok(render(&out))
}

fn cmd_export(args: &ExportArgs) -> std::result::Result<String, Failure> {
    let (graph, _) = load_device(&args.device, args.device_file.as_ref())?;
    let v: Value = serde_json::from_str(&graph.to_json()?).map_err(Error::from)?;
    Ok(render(&v))
}

fn emit(text: &str, out_path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<()> {
    match out_path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if informational {
                let _ = stdout.write_all(text.as_bytes());
                return EXIT_OK;
            }
            let _ = stderr.write_all(text.as_bytes());
            return EXIT_USAGE;
        }
    };

    let (result, out_path) = match &cli.command {
        Command::Run(a) => (cmd_run(a).map(|s| (s, EXIT_OK)), a.common.out.as_ref()),
        Command::Verify(a) => (
            cmd_verify(a).map(|(s, v)| {
                (
                    s,
                    if v == Verdict::QmConfirmedNctViolated {
                        EXIT_OK
                    } else {
                        EXIT_DEFECT
                    },
                )
            }),
            a.common.out.as_ref(),
        ),
        Command::Nct(a) => (cmd_nct(a).map(|s| (s, EXIT_OK)), a.out.as_ref()),
        Command::ExportDevice(a) => (cmd_export(a).map(|s| (s, EXIT_OK)), a.out.as_ref()),
    };

    match result {
        Ok((text, code)) => {
            if let Err(e) = emit(&text, out_path, stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
            if code == EXIT_DEFECT {
                let _ = writeln!(stderr, "error: simulator did not reproduce the quantum prediction");
            }
            code
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Defect(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DEFECT
        }
    }
}
