//! Command-line front end: runs each experiment end-to-end and emits
//! machine-readable tables plus a run manifest per artifact.

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use lti_towers::duality::{
    construct_wk_vector, final_state, jump_estimate, regularity_probe, state_curve,
};
use lti_towers::input::{dual_norm, DualSpaceTag, GeneralizedInput};
use lti_towers::models::{
    heat_psi, make_heatwave_system, make_neumann_heat, make_toy, wave_characteristics_solve,
    wave_w_condition, RayFamily, WaveState,
};
use lti_towers::observability::defect_scan;
use lti_towers::quad::QuadConfig;
use lti_towers::report;
use lti_towers::scalar::ComplexField;
use lti_towers::signal::{TimeGrid, TimeSignal};
use lti_towers::spectral::{Side, TowerVector};
use lti_towers::C64;

use config::{resolve, ConfigFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn tag(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lti-towers",
    version,
    about = "Spectral-truncation experiments for LTI systems with irregular inputs"
)]
struct Cli {
    /// Config file with `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (env LTI_TOWERS_OUT as fallback, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artifact format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomized components.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scalar integrator: generalized final state of the terminal atom vs
    /// its almost-everywhere vanishing state curve.
    ToyDemo {
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        n_grid: Option<usize>,
    },
    /// Obstruction kernel ψ of the Neumann heat system: samples and norms.
    HeatPsi {
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        n_grid: Option<usize>,
    },
    /// Truncated (H¹)* dual norms with their Riesz-representer anchors.
    #[command(name = "h1dual-norm")]
    H1DualNorm {
        #[arg(long)]
        n_basis: Option<usize>,
    },
    /// Zero-trace admissibility condition for the boundary-controlled wave
    /// equation: residuals and the solver's boundary trace.
    WaveW {
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        n_grid: Option<usize>,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Hyperbolic-branch eigenvalues of the coupled heat-wave system.
    HeatwaveEigs {
        #[arg(long)]
        kmin: Option<i64>,
        #[arg(long)]
        kmax: Option<i64>,
    },
    /// Per-mode observability defect scan of the coupled system.
    DefectScan {
        #[arg(long = "N")]
        order: Option<u32>,
        #[arg(long)]
        kmin: Option<i64>,
        #[arg(long)]
        kmax: Option<i64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
    /// Minimum-norm null control on a heat truncation.
    NullControl {
        #[arg(long)]
        modes: Option<usize>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        n_grid: Option<usize>,
    },
    /// Time-regularity probe: jumps and derivative orders of curve pairings
    /// against trace-kernel test vectors.
    RegularityProbe {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long = "T")]
        horizon: Option<f64>,
    },
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    version: String,
    format: String,
    seed: u64,
    params: BTreeMap<String, serde_json::Value>,
    artifacts: Vec<String>,
}

struct Runner {
    out_dir: PathBuf,
    format: Format,
    seed: u64,
    config: ConfigFile,
}

impl Runner {
    fn write_artifact(&self, name: &str, contents: &str) -> Result<String> {
        std::fs::create_dir_all(&self.out_dir)
            .with_context(|| format!("creating {}", self.out_dir.display()))?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        Ok(name.to_string())
    }

    fn write_manifest(
        &self,
        command: &str,
        params: BTreeMap<String, serde_json::Value>,
        artifacts: Vec<String>,
    ) -> Result<()> {
        let manifest = Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            format: self.format.tag().to_string(),
            seed: self.seed,
            params,
            artifacts,
        };
        let name = format!("{command}.manifest.json");
        self.write_artifact(&name, &serde_json::to_string_pretty(&manifest)?)?;
        Ok(())
    }

    /// Rows → CSV or a JSON mirror of the same columns.
    fn table(&self, header: &[&str], rows: &[Vec<String>]) -> String {
        match self.format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&header.join(","));
                out.push('\n');
                for row in rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let objects: Vec<serde_json::Value> = rows
                    .iter()
                    .map(|row| {
                        let map: serde_json::Map<String, serde_json::Value> = header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| {
                                let value = v
                                    .parse::<f64>()
                                    .map(|x| json!(x))
                                    .unwrap_or_else(|_| json!(v));
                                (k.to_string(), value)
                            })
                            .collect();
                        serde_json::Value::Object(map)
                    })
                    .collect();
                serde_json::to_string_pretty(&objects).expect("table serializes")
            }
        }
    }

    fn ext(&self) -> &'static str {
        self.format.tag()
    }
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if !(value > 0.0) || !value.is_finite() {
        bail!("parameter {name} must be positive and finite, got {value}");
    }
    Ok(value)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = if err.downcast_ref::<lti_towers::Error>().is_some() {
                "toolkit"
            } else {
                "config"
            };
            let record = json!({
                "error": { "kind": kind, "message": format!("{err:#}") }
            });
            eprintln!("{record}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out_dir = cli
        .out
        .clone()
        .or_else(|| config.get::<PathBuf>("out").ok().flatten())
        .or_else(|| std::env::var_os("LTI_TOWERS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = match cli.format {
        Some(f) => f,
        None => match config.get::<String>("format")?.as_deref() {
            Some("json") => Format::Json,
            Some("csv") | None => Format::Csv,
            Some(other) => bail!("unknown format {other:?}"),
        },
    };
    let seed = resolve(cli.seed, &config, "seed", 0u64)?;
    let runner = Runner {
        out_dir,
        format,
        seed,
        config,
    };
    match cli.command {
        Command::ToyDemo { horizon, n_grid } => toy_demo(&runner, horizon, n_grid),
        Command::HeatPsi {
            horizon,
            nmax,
            n_grid,
        } => heat_psi_cmd(&runner, horizon, nmax, n_grid),
        Command::H1DualNorm { n_basis } => h1_dual_norm(&runner, n_basis),
        Command::WaveW {
            horizon,
            n_grid,
            eps,
        } => wave_w(&runner, horizon, n_grid, eps),
        Command::HeatwaveEigs { kmin, kmax } => heatwave_eigs(&runner, kmin, kmax),
        Command::DefectScan {
            order,
            kmin,
            kmax,
            horizon,
        } => defect_scan_cmd(&runner, order, kmin, kmax, horizon),
        Command::NullControl {
            modes,
            horizon,
            n_grid,
        } => null_control(&runner, modes, horizon, n_grid),
        Command::RegularityProbe { k, order, horizon } => {
            regularity_probe_cmd(&runner, k, order, horizon)
        }
    }
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn toy_demo(runner: &Runner, horizon: Option<f64>, n_grid: Option<usize>) -> Result<()> {
    let horizon = positive("T", resolve(horizon, &runner.config, "T", 1.0)?)?;
    let n_grid = resolve(n_grid, &runner.config, "n_grid", 33usize)?;
    let sys = make_toy::<f64>();
    let z0 = TowerVector::zero(Side::Primal, 0);
    let u = GeneralizedInput::atom(horizon, horizon, vec![C64::from(1.0)])?;
    let result = final_state(&sys, &z0, &u, -1, horizon, DualSpaceTag::FullDual)?;
    let probe = TowerVector::single(0, C64::from(1.0), Side::Adjoint, 2);
    let grid = TimeGrid::new(horizon, n_grid);
    let curve = state_curve(&sys, &u, &grid, std::slice::from_ref(&probe), false)?;
    let curve_sup: f64 = curve.pairings[0][..n_grid - 1]
        .iter()
        .map(|v| v.modulus())
        .fold(0.0, f64::max);
    let table = runner.table(
        &["final_state", "curve_sup"],
        &[vec![fmt(result.state.get(0).re), fmt(curve_sup)]],
    );
    let artifact = runner.write_artifact(&format!("toy_demo.{}", runner.ext()), &table)?;
    let mut params = BTreeMap::new();
    params.insert("T".into(), json!(horizon));
    params.insert("n_grid".into(), json!(n_grid));
    runner.write_manifest("toy-demo", params, vec![artifact])?;
    Ok(())
}

fn heat_psi_cmd(
    runner: &Runner,
    horizon: Option<f64>,
    nmax: Option<usize>,
    n_grid: Option<usize>,
) -> Result<()> {
    let horizon = positive("T", resolve(horizon, &runner.config, "T", 1.0)?)?;
    let nmax = resolve(nmax, &runner.config, "nmax", 200usize)?;
    let n_grid = resolve(n_grid, &runner.config, "n_grid", 257usize)?;
    if nmax < 1 {
        bail!("nmax must be at least 1");
    }
    let xs: Vec<f64> = (0..n_grid)
        .map(|i| std::f64::consts::PI * i as f64 / (n_grid - 1) as f64)
        .collect();
    let psi = heat_psi(horizon, nmax, &xs);
    let quad_norm =
        lti_towers::models::heat::psi_l2_norm_quadrature(horizon, nmax, &QuadConfig::new(128, 12));
    let rows: Vec<Vec<String>> = xs
        .iter()
        .zip(&psi.values)
        .map(|(x, v)| vec![fmt(*x), fmt(*v)])
        .collect();
    let table = runner.table(&["x", "psi"], &rows);
    let artifact = runner.write_artifact(&format!("heat_psi.{}", runner.ext()), &table)?;
    let summary = json!({
        "l2_norm_series": psi.series_l2_norm,
        "l2_norm_quadrature": quad_norm,
        "tail_bound": psi.tail_bound,
    });
    let summary_file = runner.write_artifact(
        "heat_psi_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let mut params = BTreeMap::new();
    params.insert("T".into(), json!(horizon));
    params.insert("nmax".into(), json!(nmax));
    params.insert("n_grid".into(), json!(n_grid));
    runner.write_manifest("heat-psi", params, vec![artifact, summary_file])?;
    Ok(())
}

fn h1_dual_norm(runner: &Runner, n_basis: Option<usize>) -> Result<()> {
    let n_basis = resolve(n_basis, &runner.config, "n_basis", 512usize)?;
    if n_basis < 4 {
        bail!("n_basis must be at least 4");
    }
    let mut rows = Vec::new();
    // endpoint atom: dual norm converges to sqrt(coth 1)
    let atom = GeneralizedInput::atom(1.0, 1.0, vec![C64::from(1.0)])?;
    let coth_anchor = (1.0f64 / 1.0f64.tanh()).sqrt();
    let mut n = 8usize;
    while n <= n_basis {
        let value = dual_norm(&atom, 1, DualSpaceTag::FullDual, n)?;
        rows.push(vec![
            "delta_at_T".into(),
            n.to_string(),
            fmt(value),
            fmt(coth_anchor),
        ]);
        n *= 4;
    }
    // unit density: representer is the constant one, dual norm exactly 1
    let unit = GeneralizedInput::from_density(TimeSignal::constant(1.0, vec![C64::from(1.0)], 9));
    let value = dual_norm(&unit, 1, DualSpaceTag::FullDual, n_basis.min(64))?;
    rows.push(vec![
        "unit_density".into(),
        n_basis.min(64).to_string(),
        fmt(value),
        fmt(1.0),
    ]);
    // interior atom against the zero-trace dual: representer value tanh(1/2)/2
    let interior = GeneralizedInput::atom(1.0, 0.5, vec![C64::from(1.0)])?;
    let zt = dual_norm(&interior, 1, DualSpaceTag::ZeroTraceDual, n_basis)?;
    rows.push(vec![
        "delta_interior_zero_trace".into(),
        n_basis.to_string(),
        fmt(zt),
        fmt((0.5f64.tanh() / 2.0).sqrt()),
    ]);
    let table = runner.table(&["case", "n_basis", "value", "reference"], &rows);
    let artifact = runner.write_artifact(&format!("h1_dual_norm.{}", runner.ext()), &table)?;
    let mut params = BTreeMap::new();
    params.insert("n_basis".into(), json!(n_basis));
    runner.write_manifest("h1dual-norm", params, vec![artifact])?;
    Ok(())
}

fn wave_w(
    runner: &Runner,
    horizon: Option<f64>,
    n_grid: Option<usize>,
    eps: Option<f64>,
) -> Result<()> {
    let horizon = positive(
        "T",
        resolve(horizon, &runner.config, "T", std::f64::consts::FRAC_PI_2)?,
    )?;
    let n_grid = resolve(n_grid, &runner.config, "n_grid", 4096usize)?;
    let eps = resolve(eps, &runner.config, "eps", 1e-3f64)?;
    // probe the landing point first, then build data satisfying the traced
    // condition exactly there
    let probe_state = WaveState::from_profiles(
        64,
        |x: f64| C64::from(x.cos() + 1.0),
        |_x: f64| C64::from(0.0),
        |x: f64| C64::from(-x.sin()),
    );
    let probe = wave_w_condition(&probe_state, horizon);
    let alpha = probe.landing_x;
    let family_sign = match probe.family {
        RayFamily::Eta => 1.0,
        RayFamily::Xi => -1.0,
    };
    // ψ(x) = ±φ'(x) - (x - α) sin x keeps ψ(0) = ψ(π) = 0 and matches the
    // traced invariant at the landing point
    let phi = |x: f64| C64::from(x.cos() + 1.0);
    let dphi = |x: f64| C64::from(-x.sin());
    let psi_good = move |x: f64| dphi(x) * family_sign - C64::from((x - alpha) * x.sin());
    let psi_bad = move |x: f64| psi_good(x) + C64::from(eps * x.sin());

    let mut rows = Vec::new();
    let cases: Vec<(&str, Box<dyn Fn(f64) -> C64>)> = vec![
        ("compliant", Box::new(psi_good)),
        ("perturbed", Box::new(psi_bad)),
    ];
    for (label, psi) in &cases {
        let state = WaveState::from_profiles(n_grid, phi, psi, dphi);
        let report = wave_w_condition(&state, horizon);
        // run the associated evolution w(0) = φ, w_t(0) = -ψ and record the
        // boundary velocity at the horizon
        let run_state = WaveState::from_profiles(n_grid, phi, |x| -psi(x), dphi);
        let solve = wave_characteristics_solve(&run_state, horizon)?;
        let trace_abs = solve
            .boundary_trace
            .last()
            .map(|(_, v)| v.modulus())
            .unwrap_or(0.0);
        rows.push(vec![
            label.to_string(),
            fmt(report.velocity_residual),
            fmt(report.traced_residual),
            fmt(report.landing_x),
            match report.family {
                RayFamily::Eta => "eta".to_string(),
                RayFamily::Xi => "xi".to_string(),
            },
            fmt(trace_abs),
            fmt(solve.energy_drift),
            solve.grid_aligned.to_string(),
        ]);
    }
    let table = runner.table(
        &[
            "case",
            "psi0_residual",
            "traced_residual",
            "landing_x",
            "family",
            "trace_abs",
            "energy_drift",
            "grid_aligned",
        ],
        &rows,
    );
    let artifact = runner.write_artifact(&format!("wave_w.{}", runner.ext()), &table)?;
    let mut params = BTreeMap::new();
    params.insert("T".into(), json!(horizon));
    params.insert("n_grid".into(), json!(n_grid));
    params.insert("eps".into(), json!(eps));
    runner.write_manifest("wave-w", params, vec![artifact])?;
    Ok(())
}

fn heatwave_eigs(runner: &Runner, kmin: Option<i64>, kmax: Option<i64>) -> Result<()> {
    let kmin = resolve(kmin, &runner.config, "kmin", 5i64)?;
    let kmax = resolve(kmax, &runner.config, "kmax", 40i64)?;
    if kmin < 5 || kmax < kmin {
        bail!("need 5 <= kmin <= kmax, got {kmin}..{kmax}");
    }
    let (_, records) = make_heatwave_system::<f64>(kmin, kmax, false)?;
    let artifact = match runner.format {
        Format::Csv => {
            let csv = report::eigenvalue_records_to_csv(&records);
            runner.write_artifact("heatwave_eigs.csv", &csv)?
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "re_seed": r.seed.re,
                        "im_seed": r.seed.im,
                        "re_root": r.root.re,
                        "im_root": r.root.im,
                        "residual": r.residual,
                        "control_trace_abs": r.control_trace_abs,
                    })
                })
                .collect();
            runner.write_artifact("heatwave_eigs.json", &serde_json::to_string_pretty(&rows)?)?
        }
    };
    let mut params = BTreeMap::new();
    params.insert("kmin".into(), json!(kmin));
    params.insert("kmax".into(), json!(kmax));
    runner.write_manifest("heatwave-eigs", params, vec![artifact])?;
    Ok(())
}

fn defect_scan_cmd(
    runner: &Runner,
    order: Option<u32>,
    kmin: Option<i64>,
    kmax: Option<i64>,
    horizon: Option<f64>,
) -> Result<()> {
    let order = resolve(order, &runner.config, "N", 0u32)?;
    let kmin = resolve(kmin, &runner.config, "kmin", 5i64)?;
    let kmax = resolve(kmax, &runner.config, "kmax", 40i64)?;
    let horizon = positive("T", resolve(horizon, &runner.config, "T", 1.0)?)?;
    if kmin < 5 || kmax < kmin {
        bail!("need 5 <= kmin <= kmax, got {kmin}..{kmax}");
    }
    let (sys, _) = make_heatwave_system::<f64>(kmin, kmax, false)?;
    let scan = defect_scan(&sys, order, kmin..=kmax, horizon)?;
    let artifact = match runner.format {
        Format::Csv => runner.write_artifact("defect_scan.csv", &scan.to_csv())?,
        Format::Json => runner.write_artifact("defect_scan.json", &scan.to_json()?)?,
    };
    let summary = json!({
        "order": scan.order,
        "fit": scan.fit.map(|f| json!({"slope": f.slope, "intercept": f.intercept})),
        "raw_fit": scan.raw_fit.map(|f| json!({"slope": f.slope, "intercept": f.intercept})),
        "verdict": scan.verdict,
    });
    let summary_file = runner.write_artifact(
        "defect_scan_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let mut params = BTreeMap::new();
    params.insert("N".into(), json!(order));
    params.insert("kmin".into(), json!(kmin));
    params.insert("kmax".into(), json!(kmax));
    params.insert("T".into(), json!(horizon));
    runner.write_manifest("defect-scan", params, vec![artifact, summary_file])?;
    Ok(())
}

fn null_control(
    runner: &Runner,
    modes: Option<usize>,
    horizon: Option<f64>,
    n_grid: Option<usize>,
) -> Result<()> {
    let modes = resolve(modes, &runner.config, "modes", 4usize)?;
    let horizon = positive("T", resolve(horizon, &runner.config, "T", 1.0)?)?;
    let n_grid = resolve(n_grid, &runner.config, "n_grid", 257usize)?;
    if modes < 1 {
        bail!("modes must be at least 1");
    }
    let sys = make_neumann_heat::<f64>(modes);
    let z0 = TowerVector::from_pairs(
        sys.mode_indices()
            .map(|k| (k, C64::from(1.0 / (1.0 + k as f64)))),
        Side::Primal,
        0,
    );
    let grid = TimeGrid::new(horizon, n_grid);
    let out = lti_towers::observability::gramian_null_control(&sys, &z0, horizon, &grid)?;
    let rows: Vec<Vec<String>> = (0..n_grid)
        .map(|i| {
            let t = grid.point(i);
            let v = out.control.eval_scalar(t);
            vec![fmt(t), fmt(v.re), fmt(v.im)]
        })
        .collect();
    let table = runner.table(&["t", "re", "im"], &rows);
    let artifact = runner.write_artifact(&format!("null_control.{}", runner.ext()), &table)?;
    let summary = json!({
        "residual": out.residual,
        "control_l2_norm": out.control_l2_norm,
        "gramian_condition": out.gramian_condition,
    });
    let summary_file = runner.write_artifact(
        "null_control_summary.json",
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let mut params = BTreeMap::new();
    params.insert("modes".into(), json!(modes));
    params.insert("T".into(), json!(horizon));
    params.insert("n_grid".into(), json!(n_grid));
    runner.write_manifest("null-control", params, vec![artifact, summary_file])?;
    Ok(())
}

fn regularity_probe_cmd(
    runner: &Runner,
    k: Option<u32>,
    order: Option<u32>,
    horizon: Option<f64>,
) -> Result<()> {
    let order = resolve(order, &runner.config, "order", 0u32)?;
    let k = resolve(k, &runner.config, "k", order + 1)?;
    let horizon = positive("T", resolve(horizon, &runner.config, "T", 1.0)?)?;
    if k < 1 {
        bail!("k must be at least 1");
    }
    let sys = make_neumann_heat::<f64>(6);
    let support: Vec<i64> = (0..=(k as i64 + 1)).collect();
    let wk = construct_wk_vector(&sys, k, &support)?.at_index(2.max(k as i32));
    let non_wk = TowerVector::single(0, C64::from(1.0), Side::Adjoint, 2);
    let u = GeneralizedInput::atom(horizon, horizon / 2.0, vec![C64::from(1.0)])?;
    let cfg = QuadConfig::default();
    let grid = TimeGrid::new(horizon, 33);

    let jump_wk = jump_estimate(&sys, &u, &wk, horizon / 2.0, 1e-5, &cfg)?.modulus();
    let jump_non = jump_estimate(&sys, &u, &non_wk, horizon / 2.0, 1e-5, &cfg)?.modulus();
    let predicted =
        lti_towers::signal::u_inner(&[C64::from(1.0)], &sys.control_trace_of(&non_wk)?).modulus();
    let probe_report = regularity_probe(&sys, &u, &wk, &grid, order.max(1), &cfg)?;

    let mut rows = vec![
        vec!["jump_wk_abs".to_string(), fmt(jump_wk)],
        vec!["jump_nonwk_abs".to_string(), fmt(jump_non)],
        vec!["predicted_jump_abs".to_string(), fmt(predicted)],
        vec![
            "nominal_order".to_string(),
            fmt(probe_report.nominal_order),
        ],
    ];
    for (d, est) in probe_report.derivative_orders.iter().enumerate() {
        rows.push(vec![format!("order_d{}", d + 1), fmt(*est)]);
    }
    for (level, jump) in probe_report.max_jump_per_level.iter().enumerate() {
        rows.push(vec![format!("max_jump_level{level}"), fmt(*jump)]);
    }
    let table = runner.table(&["quantity", "value"], &rows);
    let artifact = runner.write_artifact(&format!("regularity_probe.{}", runner.ext()), &table)?;
    let mut params = BTreeMap::new();
    params.insert("k".into(), json!(k));
    params.insert("order".into(), json!(order));
    params.insert("T".into(), json!(horizon));
    runner.write_manifest("regularity-probe", params, vec![artifact])?;
    Ok(())
}
