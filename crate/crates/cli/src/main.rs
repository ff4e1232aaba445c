use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phase_qubit::fitting::{FitModel, FitParam};
use phase_qubit::paramfile::{format_params, parse_params};
use phase_qubit::units::{Dimension, Unit};
use phase_qubit::Backend;
use phase_qubit_cli::fit::parse_quantity;
use phase_qubit_cli::scenario::{fit_data_csv, parse_initial};
use phase_qubit_cli::{
    compare_backends, fit_report_json, preset, presets, run_fit, run_scenario, CliError, FitRequest, Format, Grid,
    Scenario, OUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "phase-qubit", version, about = "Leaking two-level qubit dynamics: simulate, compare, fit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario and write its time series.
    Simulate(SimulateArgs),
    /// Fit drive parameters to `t,p[,weight]` data.
    Fit(FitArgs),
    /// Report deviations between propagation routes on a scenario.
    Compare(CompareArgs),
    /// List the built-in presets, or print one as a parameter file.
    Presets(PresetsArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario to start from.
    #[arg(long)]
    preset: Option<String>,
    /// Parameter file (`key = value [unit]` lines).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Initial amplitudes `c1_re,c1_im,c0_re,c0_im`.
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    /// Time grid `t0:t1:n`.
    #[arg(long)]
    grid: Option<String>,
    /// Unit of the grid times.
    #[arg(long, default_value = "ns")]
    grid_unit: String,
    /// Propagation route.
    #[arg(long)]
    mode: Option<Backend>,
    /// Scenario name used in summaries and default file names.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; defaults to `$PHASEQUBIT_OUT_DIR/<name>.<ext>` when that
    /// variable is set, standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, hide_env_values = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Write `t,p` fitter input (upper population) instead of the full series.
    #[arg(long)]
    fit_data: bool,
    /// Standard deviation of Gaussian noise added to fitter input.
    #[arg(long)]
    noise: Option<f64>,
    /// Seed of the noise stream.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary file; defaults to standard error.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with header `t,p[,weight]`.
    #[arg(long)]
    data: PathBuf,
    /// Time unit of the data; overrides a `# time_unit = ...` line.
    #[arg(long)]
    time_unit: Option<Unit>,
    #[arg(long, default_value = "ground-start")]
    model: FitModel,
    /// Parameter file providing Γ and Γ₀.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Mean decay rate Γ, e.g. `0.204 us^-1`.
    #[arg(long)]
    gamma: Option<String>,
    /// Lower-level rate Γ₀.
    #[arg(long)]
    gamma0: Option<String>,
    /// Additional parameters to fit (gamma, gamma0, scale).
    #[arg(long, value_delimiter = ',')]
    free: Vec<FitParam>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also integrate the full lab-frame generator (slow for long grids).
    #[arg(long)]
    lab_frame: bool,
}

#[derive(Args)]
struct PresetsArgs {
    /// Print this preset as a parameter file.
    #[arg(long)]
    show: Option<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))
}

fn write_output(output: &OutputArgs, default_name: &str, text: &str) -> Result<(), CliError> {
    let path = match (&output.out, &output.out_dir) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(default_name)),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent.display().to_string(), e))?;
            }
            fs::write(&p, text).map_err(|e| CliError::io(p.display().to_string(), e))
        }
        None => to_stdout(text),
    }
}

fn to_stdout(text: &str) -> Result<(), CliError> {
    match std::io::stdout().write_all(text.as_bytes()) {
        // a closed pipe downstream is not an error of ours
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn build_scenario(a: &ScenarioArgs) -> Result<Scenario, CliError> {
    let mut scenario = match &a.preset {
        Some(name) => preset(name)?.scenario,
        None => {
            let Some(path) = &a.params else {
                return Err(CliError::Usage("either --preset or --params is required".into()));
            };
            let Some(grid) = &a.grid else {
                return Err(CliError::Usage("--grid is required without --preset".into()));
            };
            let unit: Unit = a.grid_unit.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
            Scenario {
                name: path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned()),
                params: parse_params(&read(path)?)?,
                initial: phase_qubit::State::ground(),
                grid: Grid::parse(grid, unit)?,
                mode: Backend::Rwa,
            }
        }
    };
    if a.preset.is_some() {
        if let Some(path) = &a.params {
            scenario.params = parse_params(&read(path)?)?;
        }
        if let Some(grid) = &a.grid {
            let unit: Unit = a.grid_unit.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
            scenario.grid = Grid::parse(grid, unit)?;
        }
    }
    if let Some(init) = &a.initial {
        scenario.initial = parse_initial(init)?;
    }
    if let Some(mode) = a.mode {
        scenario.mode = mode;
    }
    if let Some(name) = &a.name {
        scenario.name = name.clone();
    }
    scenario.params.validate()?;
    Ok(scenario)
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let scenario = build_scenario(&a.scenario)?;
    let out = run_scenario(&scenario)?;
    if a.fit_data {
        let text = fit_data_csv(&out.series, a.noise, a.seed)?;
        write_output(&a.output, &format!("{}.fit.csv", scenario.name), &text)?;
    } else {
        if a.noise.is_some() {
            return Err(CliError::Usage("--noise applies to --fit-data output only".into()));
        }
        let ext = a.format.extension();
        write_output(&a.output, &format!("{}.{ext}", scenario.name), &out.render(a.format))?;
    }
    let summary = out.summary.to_json();
    match &a.summary {
        Some(p) => fs::write(p, summary + "\n").map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            eprintln!("{summary}");
            Ok(())
        }
    }
}

fn fit(a: &FitArgs) -> Result<(), CliError> {
    let file_params = a.params.as_deref().map(read).transpose()?.map(|t| parse_params::<f64>(&t)).transpose()?;
    let rate = |flag: &Option<String>, from_file: Option<f64>, name: &str| match (flag, from_file) {
        (Some(s), _) => parse_quantity(s, Dimension::Rate),
        (None, Some(v)) => Ok(v),
        (None, None) => Err(CliError::Usage(format!("--{name} or --params is required"))),
    };
    let req = FitRequest {
        data_csv: read(&a.data)?,
        time_unit: a.time_unit,
        model: a.model,
        gamma: rate(&a.gamma, file_params.map(|p| p.gamma_mean()), "gamma")?,
        gamma0: rate(&a.gamma0, file_params.map(|p| p.gamma0), "gamma0")?,
        free: a.free.clone(),
    };
    let result = run_fit(&req)?;
    let stem = a.data.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
    write_output(&a.output, &format!("{stem}.fit.json"), &fit_report_json(a.model, &result))
}

fn compare(a: &CompareArgs) -> Result<(), CliError> {
    let scenario = build_scenario(&a.scenario)?;
    let report = compare_backends(&scenario, a.lab_frame)?;
    write_output(&a.output, &format!("{}.compare.json", scenario.name), &report.to_json())
}

fn list_presets(a: &PresetsArgs) -> Result<(), CliError> {
    let text = match &a.show {
        Some(name) => {
            let p = preset(name)?;
            let s = &p.scenario;
            let u = s.initial;
            format!(
                "# {}\n# {}\n# initial = {:e},{:e},{:e},{:e}\n# grid = {} ns\n# mode = {}\n{}",
                p.name,
                p.description,
                u.c1.re,
                u.c1.im,
                u.c0.re,
                u.c0.im,
                s.grid,
                s.mode.name(),
                format_params(&s.params)
            )
        }
        None => presets()
            .iter()
            .map(|p| format!("{:<16} {}\n", p.name, p.description))
            .collect(),
    };
    to_stdout(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Compare(a) => compare(a),
        Command::Presets(a) => list_presets(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
