use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use quasi_sierpinski::closed_form::{analyze, pvw_residuals, AnalysisOptions, AnalysisResult};
use quasi_sierpinski::fem::{compare, solve_apex, ComparisonReport, FemSolution, Tolerances};
use quasi_sierpinski::structure::{build_topology, Topology};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK};
use crate::formats::{
    analysis_from_json, analysis_to_json, read_json, report_to_json, solution_to_json, topology_from_json,
    topology_to_json, write_json, write_nodes_csv, write_supports_csv,
};
use crate::plot::{cantor_curve, deformed_shape, displacement_curves, j_curve, takagi_curve, PlotKind};

pub const DEFAULT_OUT: &str = "qsier-out";

#[derive(Debug, Parser)]
#[command(
    name = "qsier",
    version,
    about = "Quasi-Sierpinski truss: closed-form analysis and FEM verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the truss topology as JSON.
    Generate(Common),
    /// Evaluate the closed-form solution; write JSON and CSV tables.
    Analyze(AnalyzeArgs),
    /// Solve with the FEM and compare against the closed form.
    Verify(VerifyArgs),
    /// Draw the deformed shape or one of the fractal curves.
    Plot(PlotArgs),
    /// Run analyze and verify on several configs in parallel.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory [default: config output_dir, else qsier-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Report non-downward settlements instead of failing.
    #[arg(long)]
    pub allow_nonnegative_delta: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run configuration; optional when --topology and --analysis are given.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Topology written by `generate`.
    #[arg(long, requires = "analysis")]
    pub topology: Option<PathBuf>,
    /// Analysis written by `analyze`.
    #[arg(long, requires = "topology")]
    pub analysis: Option<PathBuf>,
    /// Absolute tolerance for closed-form identities.
    #[arg(long)]
    pub tol_closed_form: Option<f64>,
    /// Relative tolerance for FEM cross-checks.
    #[arg(long)]
    pub tol_fem: Option<f64>,
    #[arg(long)]
    pub allow_nonnegative_delta: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: Common,
    /// deformed, displacements, takagi, cantor or j [default: config plot.what, else deformed].
    #[arg(long)]
    pub what: Option<String>,
    /// Displacement magnification for the deformed shape.
    #[arg(long)]
    pub magnify: Option<f64>,
    /// Geometric ratio for the takagi, j and cantor curves.
    #[arg(long)]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub allow_nonnegative_delta: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Configs to run; repeat the flag.
    #[arg(long = "config", required = true)]
    pub configs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub tol_closed_form: Option<f64>,
    #[arg(long)]
    pub tol_fem: Option<f64>,
}

/// What a command reports on success.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn ok(lines: Vec<String>) -> Self {
        Self {
            lines,
            exit_code: EXIT_OK,
        }
    }
}

pub fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Analyze(a) => analyze_cmd(&a),
        Command::Verify(a) => verify_cmd(&a),
        Command::Plot(a) => plot_cmd(&a),
        Command::Sweep(a) => sweep(&a),
    }
}

fn out_dir(flag: Option<&Path>, run: Option<&RunConfig>) -> Result<PathBuf, CliError> {
    let dir = flag
        .map(Path::to_path_buf)
        .or_else(|| run.and_then(|r| r.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn check_tolerance(flag: &str, value: Option<f64>) -> Result<Option<f64>, CliError> {
    match value {
        Some(v) if !(v.is_finite() && v > 0.0) => Err(CliError::Usage(format!("{flag} must be > 0, got {v}"))),
        other => Ok(other),
    }
}

fn tolerances(run: Option<&RunConfig>, closed_form: Option<f64>, fem: Option<f64>) -> Result<Tolerances, CliError> {
    let mut tol = run.map(|r| r.tolerances).unwrap_or_default();
    if let Some(v) = check_tolerance("--tol-closed-form", closed_form)? {
        tol.closed_form = v;
    }
    if let Some(v) = check_tolerance("--tol-fem", fem)? {
        tol.fem = v;
    }
    Ok(tol)
}

pub fn generate(a: &Common) -> Result<Outcome, CliError> {
    let run = RunConfig::load(&a.config)?;
    let topology = build_topology(&run.structure)?;
    let dir = out_dir(a.out.as_deref(), Some(&run))?;
    let path = dir.join("topology.json");
    write_json(&path, &topology_to_json(&topology))?;
    Ok(Outcome::ok(vec![
        format!(
            "{} nodes, {} members, {} supports",
            topology.nodes.len(),
            topology.member_count(),
            topology.supports.len()
        ),
        format!("wrote {}", path.display()),
    ]))
}

fn closed_form(run: &RunConfig, allow: bool) -> Result<(Topology, AnalysisResult), CliError> {
    let topology = build_topology(&run.structure)?;
    let options = AnalysisOptions {
        allow_nonnegative_delta: allow || run.allow_nonnegative_delta,
    };
    let result = analyze(&run.structure, options)?;
    Ok((topology, result))
}

pub fn analyze_cmd(a: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let run = RunConfig::load(&a.common.config)?;
    let dir = out_dir(a.common.out.as_deref(), Some(&run))?;
    analyze_into(&run, &dir, a.allow_nonnegative_delta)
}

fn analyze_into(run: &RunConfig, dir: &Path, allow: bool) -> Result<Outcome, CliError> {
    let (topology, result) = closed_form(run, allow)?;
    let residuals = pvw_residuals(&run.structure, &result.delta)?;
    write_json(&dir.join("analysis.json"), &analysis_to_json(&result, &residuals))?;
    write_json(&dir.join("config.json"), &run.to_json())?;
    write_supports_csv(&dir.join("supports.csv"), &topology, &result)?;
    write_nodes_csv(&dir.join("nodes.csv"), &topology, &result)?;
    let mut lines = vec![
        format!(
            "apex epsilon {:.6}, delta_1 {:.6}, k_1 {:.6e} kN/mm",
            result.epsilon[0], result.delta[0], result.stiffness[0]
        ),
        format!(
            "wrote analysis.json, config.json, supports.csv, nodes.csv to {}",
            dir.display()
        ),
    ];
    let bad = result.nonnegative_supports();
    if !bad.is_empty() {
        lines.push(format!("warning: non-compressive settlement at supports {bad:?}"));
    }
    Ok(Outcome::ok(lines))
}

struct Verification {
    solution: FemSolution,
    report: ComparisonReport,
    residual_max: f64,
    residual_ok: bool,
}

fn verify_artifacts(
    topology: &Topology,
    result: &AnalysisResult,
    residuals: &[f64],
    tol: &Tolerances,
) -> Result<Verification, CliError> {
    let solution = solve_apex(topology, &result.stiffness, result.load)?;
    let report = compare(topology, &solution, result, tol)?;
    let residual_max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(Verification {
        solution,
        report,
        residual_max,
        residual_ok: residuals.iter().all(|r| r.abs() <= tol.closed_form),
    })
}

fn write_verification(dir: &Path, v: &Verification, tol: &Tolerances) -> Result<Outcome, CliError> {
    let extra = [("pvw_residuals", v.residual_max, tol.closed_form, v.residual_ok)];
    let report_json = report_to_json(&v.report, &extra);
    write_json(&dir.join("solution.json"), &solution_to_json(&v.solution))?;
    write_json(&dir.join("report.json"), &report_json)?;
    let passed = report_json["passed"] == true;
    let mut text = v.report.to_string();
    text = text.replace(
        "\noverall:",
        &format!(
            "\n{:<26} {}  max_abs={:.3e}  tol={:.1e}\noverall:",
            "pvw_residuals",
            if v.residual_ok { "PASS" } else { "FAIL" },
            v.residual_max,
            tol.closed_form
        ),
    );
    if v.report.passed != passed {
        text = text.replace("overall: PASS", "overall: FAIL");
    }
    let report_txt = dir.join("report.txt");
    std::fs::write(&report_txt, format!("{text}\n")).map_err(|e| CliError::io(&report_txt, e))?;
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    lines.push(format!(
        "wrote solution.json, report.json, report.txt to {}",
        dir.display()
    ));
    if passed {
        Ok(Outcome::ok(lines))
    } else {
        Err(CliError::Verification(lines.join("\n")))
    }
}

pub fn verify_cmd(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let run = a.config.as_deref().map(RunConfig::load).transpose()?;
    let tol = tolerances(run.as_ref(), a.tol_closed_form, a.tol_fem)?;
    let dir = out_dir(a.out.as_deref(), run.as_ref())?;
    let verification = match (&a.topology, &a.analysis) {
        (Some(tp), Some(ap)) => {
            let topology = topology_from_json(&read_json(tp)?, tp)?;
            let doc = read_json(ap)?;
            let result = analysis_from_json(&doc, ap)?;
            let residuals: Vec<f64> = match &run {
                Some(r) => pvw_residuals(&r.structure, &result.delta)?
                    .iter()
                    .map(|r| r.value)
                    .collect(),
                None => doc["pvw_residuals"]
                    .as_array()
                    .map(|rs| rs.iter().filter_map(|r| r["value"].as_f64()).collect())
                    .unwrap_or_default(),
            };
            verify_artifacts(&topology, &result, &residuals, &tol)?
        }
        _ => {
            let Some(run) = &run else {
                return Err(CliError::Usage(
                    "verify needs --config, or both --topology and --analysis".into(),
                ));
            };
            let (topology, result) = closed_form(run, a.allow_nonnegative_delta)?;
            let residuals: Vec<f64> = pvw_residuals(&run.structure, &result.delta)?
                .iter()
                .map(|r| r.value)
                .collect();
            verify_artifacts(&topology, &result, &residuals, &tol)?
        }
    };
    write_verification(&dir, &verification, &tol)
}

pub fn plot_cmd(a: &PlotArgs) -> Result<Outcome, CliError> {
    let mut run = RunConfig::load(&a.common.config)?;
    let kind = match &a.what {
        Some(s) => s.parse::<PlotKind>().map_err(CliError::Usage)?,
        None => run.plot.what.unwrap_or(PlotKind::Deformed),
    };
    if let Some(m) = a.magnify {
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::Usage(format!("--magnify must be > 0, got {m}")));
        }
        run.plot.magnify = m;
    }
    if a.ratio.is_some() {
        run.plot.ratio = a.ratio;
    }
    let dir = out_dir(a.common.out.as_deref(), Some(&run))?;
    let figures = match kind {
        PlotKind::Deformed => {
            let (topology, result) = closed_form(&run, a.allow_nonnegative_delta)?;
            deformed_shape(&topology, &result, run.plot.magnify)
        }
        PlotKind::Displacements => displacement_curves(&run)?,
        PlotKind::Takagi => takagi_curve(&run)?,
        PlotKind::Cantor => cantor_curve(&run)?,
        PlotKind::J => j_curve(&run)?,
    };
    let mut names = Vec::new();
    for f in &figures {
        let path = dir.join(&f.file_name);
        std::fs::write(&path, &f.contents).map_err(|e| CliError::io(&path, e))?;
        names.push(f.file_name.clone());
    }
    Ok(Outcome::ok(vec![format!(
        "wrote {} to {}",
        names.join(", "),
        dir.display()
    )]))
}

fn sweep_one(config: &Path, root: &Path, cf: Option<f64>, fem: Option<f64>) -> Value {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "config".into());
    let dir = root.join(&stem);
    let attempt = || -> Result<(), CliError> {
        let run = RunConfig::load(config)?;
        let tol = tolerances(Some(&run), cf, fem)?;
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let (topology, result) = closed_form(&run, false)?;
        write_json(&dir.join("topology.json"), &topology_to_json(&topology))?;
        analyze_into(&run, &dir, false)?;
        let residuals: Vec<f64> = pvw_residuals(&run.structure, &result.delta)?
            .iter()
            .map(|r| r.value)
            .collect();
        let v = verify_artifacts(&topology, &result, &residuals, &tol)?;
        write_verification(&dir, &v, &tol).map(|_| ())
    };
    match attempt() {
        Ok(()) => json!({"config": config.display().to_string(), "dir": stem, "code": 0, "passed": true}),
        Err(e) => json!({
            "config": config.display().to_string(),
            "dir": stem,
            "code": e.exit_code(),
            "passed": false,
            "kind": e.kind(),
        }),
    }
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let root = out_dir(a.out.as_deref(), None)?;
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let mut results: Vec<Option<Value>> = vec![None; a.configs.len()];
    std::thread::scope(|scope| {
        for (chunk_index, chunk) in results.chunks_mut(a.configs.len().div_ceil(jobs)).enumerate() {
            let start = chunk_index * a.configs.len().div_ceil(jobs);
            let (configs, root) = (&a.configs, &root);
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(sweep_one(&configs[start + k], root, a.tol_closed_form, a.tol_fem));
                }
            });
        }
    });
    let results: Vec<Value> = results.into_iter().map(|r| r.expect("every slot filled")).collect();
    let worst = results.iter().filter_map(|r| r["code"].as_i64()).max().unwrap_or(0) as i32;
    let passed = results.iter().filter(|r| r["passed"] == true).count();
    write_json(
        &root.join("sweep.json"),
        &json!({"schema_version": 1, "kind": "sweep", "runs": results}),
    )?;
    let mut lines: Vec<String> = results
        .iter()
        .map(|r| {
            format!(
                "{}: {}",
                r["config"].as_str().unwrap_or("?"),
                if r["passed"] == true {
                    "PASS".to_owned()
                } else {
                    format!("FAIL (exit {})", r["code"])
                }
            )
        })
        .collect();
    lines.push(format!(
        "{passed}/{} passed; wrote sweep.json to {}",
        results.len(),
        root.display()
    ));
    Ok(Outcome {
        lines,
        exit_code: worst,
    })
}
