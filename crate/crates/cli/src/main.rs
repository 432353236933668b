use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use vbg_core::farfield::FarFieldModel;
use vbg_core::pumpdesign::{feasibility_csv, FEASIBILITY_CSV_HEADER};
use vbg_core::report::{self, to_value, RunReport, Warning};
use vbg_core::{Error, ErrorKind, Result, Scenario};

/// Environment variable that caps the worker thread count.
const THREADS_ENV: &str = "VBG_THREADS";

#[derive(Parser, Debug)]
#[command(name = "vbg", version, about = "Virtual Bragg grating interface models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Scenario file (TOML, or JSON with a .json extension).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario used when no config is given.
    #[arg(long, global = true, default_value = "paper-defaults")]
    preset: String,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output stem for file-producing commands; report destination otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Full,
    Isotropic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SweepCommand {
    Selection,
    Farfield,
    Feasibility,
    Budget,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// DFG and SFG channel sets, windows and fringe orders.
    Selection,
    /// Far-field intensity grid.
    Farfield {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Radiative feasibility over (N, ℓ).
    Feasibility {
        /// Site range as MIN:MAX.
        #[arg(long)]
        sites: Option<String>,
        /// Harmonic range as MIN:MAX.
        #[arg(long, allow_hyphen_values = true)]
        ells: Option<String>,
    },
    /// Efficiency chain, required Q and noise floors.
    Budget,
    /// Repeats a command over values of one scenario parameter.
    Sweep {
        /// Dotted scenario path, e.g. `pump.sites`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; each is read as JSON, falling back to a string.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, value_enum, default_value = "farfield")]
        command: SweepCommand,
    },
    /// Checks the scenario and exits.
    Validate,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn usage(path: &str, reason: impl Into<String>) -> Error {
    Error::Config { path: path.into(), reason: reason.into() }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Drops a trailing data extension so `grid.csv` and `grid` name the same set.
fn output_stem(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some("csv" | "json") => out.with_extension(""),
        _ => out.to_path_buf(),
    }
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn load_scenario(g: &Global) -> Result<Scenario> {
    let mut s = match &g.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::preset(&g.preset)?,
    };
    if let Some(seed) = g.seed {
        s.seed = seed;
    }
    Ok(s)
}

fn parse_range<T: std::str::FromStr>(flag: &str, text: &str) -> Result<(T, T)> {
    let (a, b) = text.split_once(':').ok_or_else(|| usage(flag, "expected MIN:MAX"))?;
    let parse = |t: &str| t.trim().parse::<T>().map_err(|_| usage(flag, format!("cannot parse `{t}`")));
    Ok((parse(a)?, parse(b)?))
}

fn parse_value(text: &str) -> Value {
    serde_json::from_str(text.trim()).unwrap_or_else(|_| Value::String(text.trim().to_string()))
}

/// Result of one command: the report plus any data files to write beside it.
struct Output {
    report: RunReport,
    data: Option<DataFiles>,
}

struct DataFiles {
    csv: String,
    json: Value,
    sidecar: Value,
}

fn finish(command: &str, s: &Scenario, result: Value, warnings: Vec<Warning>) -> Result<RunReport> {
    report::check_warning_ids(&warnings)?;
    Ok(RunReport::new(command, s, result, warnings, now_unix()))
}

fn run_selection(s: &Scenario, base: Option<&Path>) -> Result<Output> {
    let (r, w) = report::run_selection(s, base)?;
    Ok(Output { report: finish("selection", s, to_value(&r), w)?, data: None })
}

fn run_budget(s: &Scenario) -> Result<Output> {
    let (r, w) = report::run_budget(s)?;
    Ok(Output { report: finish("budget", s, to_value(&r), w)?, data: None })
}

fn run_farfield(s: &Scenario, mode: Option<Mode>) -> Result<Output> {
    let model = mode.map(|m| match m {
        Mode::Full => FarFieldModel::Full,
        Mode::Isotropic => FarFieldModel::Isotropic,
    });
    let (out, w) = report::run_farfield(s, model)?;
    let sidecar = to_value(&out.grid.sidecar());
    let json = json!({
        "sidecar": sidecar,
        "theta_deg": out.grid.theta_deg,
        "phi_rad": out.grid.phi_rad,
        "intensity": out.grid.intensity,
    });
    Ok(Output {
        report: finish("farfield", s, to_value(&out.report), w)?,
        data: Some(DataFiles { csv: out.grid.to_csv(), json, sidecar }),
    })
}

fn run_feasibility(s: &Scenario) -> Result<Output> {
    let (out, w) = report::run_feasibility(s)?;
    let sidecar = json!({
        "schema_version": vbg_core::farfield::SIDECAR_SCHEMA_VERSION,
        "kind": "feasibility",
        "csv_header": FEASIBILITY_CSV_HEADER,
        "rows": out.records.len(),
        "m_wgm": out.report.m_wgm,
        "emission_nm": out.report.emission_nm,
        "na": out.report.na,
        "radius_um": out.report.radius_um,
        "sites_range": out.report.sites_range,
        "ell_range": out.report.ell_range,
        "seed": s.seed,
    });
    let json = json!({ "sidecar": sidecar, "records": out.records });
    Ok(Output {
        report: finish("feasibility", s, to_value(&out.report), w)?,
        data: Some(DataFiles { csv: feasibility_csv(&out.records), json, sidecar }),
    })
}

fn to_pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialises");
    s.push('\n');
    s
}

/// Writes the data file, sidecar and report for `stem`; returns the paths.
fn write_set(stem: &Path, out: &Output, format: Format) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if let Some(d) = &out.data {
        let (path, body) = match format {
            Format::Csv => (with_suffix(stem, ".csv"), d.csv.clone()),
            Format::Json => (with_suffix(stem, ".json"), to_pretty(&d.json)),
        };
        write_atomic(&path, &body)?;
        written.push(path);
        let meta = with_suffix(stem, ".meta.json");
        write_atomic(&meta, &to_pretty(&d.sidecar))?;
        written.push(meta);
    }
    let rep = with_suffix(stem, ".report.json");
    write_atomic(&rep, &out.report.to_json())?;
    written.push(rep);
    Ok(written)
}

fn emit(out: Output, g: &Global) -> Result<()> {
    let format = g.format.unwrap_or(if out.data.is_some() { Format::Csv } else { Format::Json });
    match (&out.data, &g.out) {
        (None, _) if format == Format::Csv => {
            Err(usage("--format", format!("`{}` produces JSON only", out.report.command)))
        }
        (None, None) => {
            print!("{}", out.report.to_json());
            Ok(())
        }
        (None, Some(p)) => write_atomic(p, &out.report.to_json()),
        (Some(_), None) => Err(usage("--out", format!("`{}` writes files and needs --out", out.report.command))),
        (Some(_), Some(p)) => {
            for path in write_set(&output_stem(p), &out, format)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn sanitize(text: &str) -> String {
    text.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn run_sweep(s: &Scenario, g: &Global, param: &str, values: &str, command: SweepCommand) -> Result<()> {
    let dir = g.out.as_deref().ok_or_else(|| usage("--out", "sweep needs an output directory"))?;
    let raw: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if raw.is_empty() {
        return Err(usage("--values", "no values given"));
    }
    // resolve every point before writing anything
    let points: Vec<(String, Scenario)> =
        raw.iter().map(|v| Ok((v.to_string(), s.with_parameter(param, &parse_value(v))?))).collect::<Result<_>>()?;
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let format = g.format.unwrap_or(match command {
        SweepCommand::Farfield | SweepCommand::Feasibility => Format::Csv,
        _ => Format::Json,
    });
    let param_tag = param.replace('.', "_");
    let mut entries = Vec::new();
    for (raw_value, point) in &points {
        let out = match command {
            SweepCommand::Selection => run_selection(point, config_dir(g).as_deref())?,
            SweepCommand::Farfield => run_farfield(point, None)?,
            SweepCommand::Feasibility => run_feasibility(point)?,
            SweepCommand::Budget => run_budget(point)?,
        };
        if out.data.is_none() && format == Format::Csv {
            return Err(usage("--format", "this sweep command produces JSON only"));
        }
        let stem = dir.join(format!("sweep_{param_tag}_{}", sanitize(raw_value)));
        let files: Vec<String> = write_set(&stem, &out, format)?
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        let mut summary = to_value(&report::sweep_summary(point)?);
        if command == SweepCommand::Farfield {
            let r = &out.report.result;
            summary["fringe_count"] = r["fringe_count"].clone();
            summary["on_axis_bright"] = r["on_axis_bright"].clone();
        }
        entries.push(json!({
            "value": parse_value(raw_value),
            "label": raw_value,
            "files": files,
            "summary": summary,
        }));
    }
    let manifest = json!({
        "tool": report::TOOL_NAME,
        "version": report::VERSION,
        "schema_version": report::REPORT_SCHEMA_VERSION,
        "kind": "sweep",
        "command": command,
        "parameter": param,
        "seed": s.seed,
        "entries": entries,
        report::TIMESTAMP_KEY: now_unix(),
    });
    let path = dir.join("manifest.json");
    write_atomic(&path, &to_pretty(&manifest))?;
    println!("{}", path.display());
    Ok(())
}

fn config_dir(g: &Global) -> Option<PathBuf> {
    g.config.as_ref().and_then(|p| p.parent().map(Path::to_path_buf))
}

fn run(cli: Cli) -> Result<()> {
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let n: usize = n.parse().map_err(|_| usage(THREADS_ENV, "must be a positive integer"))?;
        if n == 0 {
            return Err(usage(THREADS_ENV, "must be a positive integer"));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let g = &cli.global;
    let s = load_scenario(g)?;
    let base = config_dir(g);
    match cli.command {
        Command::Selection => emit(run_selection(&s, base.as_deref())?, g),
        Command::Farfield { mode } => emit(run_farfield(&s, mode)?, g),
        Command::Feasibility { sites, ells } => {
            let mut s = s;
            if let Some(r) = sites {
                let (a, b) = parse_range::<u32>("--sites", &r)?;
                s.feasibility.sites_min = a;
                s.feasibility.sites_max = b;
            }
            if let Some(r) = ells {
                let (a, b) = parse_range::<i64>("--ells", &r)?;
                s.feasibility.ell_min = a;
                s.feasibility.ell_max = b;
            }
            s.validate()?;
            emit(run_feasibility(&s)?, g)
        }
        Command::Budget => emit(run_budget(&s)?, g),
        Command::Sweep { param, values, command } => run_sweep(&s, g, &param, &values, command),
        Command::Validate => {
            let out = Output { report: finish("validate", &s, json!({ "valid": true }), Vec::new())?, data: None };
            emit(out, g)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Io => 4,
            })
        }
    }
}
