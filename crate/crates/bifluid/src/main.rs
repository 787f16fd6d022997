use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bifluid::coupling::{
    energy_ledger, mass_ledgers, renorm_ledger, run_level1, sweep_delta, sweep_epsilon,
};
use bifluid::diagnostics::{
    cell_domination_margins, domination_check, growth_envelope_check, ratio_compactness,
    weak_form_report, CertificateReport,
};
use bifluid::geometry::Species;
use bifluid::report::{read_trajectory_csv, write_trajectory_csv, CertificateSuite};
use bifluid::scenario::{
    bundled_scenario, load_scenario, reconstruct_alpha, Overrides, Scenario, SpeciesFields, BUNDLED,
};
use bifluid::thermo::validate_law;
use bifluid::transport::RenormFn;

#[derive(Parser)]
#[command(name = "bifluid", about = "Bi-fluid transport laboratory", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Name of a bundled scenario.
    #[arg(long, conflicts_with = "file")]
    scenario: Option<String>,
    /// Path to a scenario TOML file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Override the cell count per axis.
    #[arg(long)]
    cells: Option<usize>,
    /// Override the time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Override the artificial diffusion.
    #[arg(long)]
    eps: Option<f64>,
    /// Override the artificial-pressure weight.
    #[arg(long)]
    delta: Option<f64>,
    /// Override the time horizon.
    #[arg(long)]
    total_time: Option<f64>,
    /// Override the Galerkin modes per axis.
    #[arg(long)]
    modes: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> bifluid::Result<Scenario> {
        let mut sc = match (&self.scenario, &self.file) {
            (Some(name), None) => bundled_scenario(name)?,
            (None, Some(path)) => load_scenario(path)?,
            _ => {
                return Err(bifluid::Error::InvalidArg(
                    "pass exactly one of --scenario or --file".into(),
                ))
            }
        };
        sc.apply_overrides(&Overrides {
            cells: self.cells,
            dt: self.dt,
            eps: self.eps,
            delta: self.delta,
            total_time: self.total_time,
            modes: self.modes,
        })?;
        Ok(sc)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and evaluate the certificate battery.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory for report.json and trajectory.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check domination cones on a previously written trajectory.
    Certify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Trajectory CSV written by `simulate`.
        #[arg(long)]
        trajectory: PathBuf,
        /// Admissible margin undershoot.
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
    },
    /// Vanishing-diffusion study over a list of epsilons.
    SweepEps {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated diffusion values.
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vanishing artificial-pressure study over a list of deltas.
    SweepDelta {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated artificial-pressure weights.
        #[arg(long, value_delimiter = ',', required = true)]
        delta_list: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the volume fraction from the final state two ways.
    AlphaRoundtrip {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Check the structural hypotheses of a scenario's pressure law.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// List the bundled scenarios.
    List,
}

fn configure_threads() {
    if let Ok(v) = std::env::var("BIFLUID_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
}

fn certificate_battery(traj: &bifluid::coupling::Trajectory) -> bifluid::Result<Vec<CertificateReport>> {
    let mut reports = Vec::new();
    let dom = domination_check(traj);
    reports.push(CertificateReport::bounded("domination-margin", -dom.min_margin, 1e-12));
    let env = growth_envelope_check(traj);
    reports.push(CertificateReport::bounded("growth-cap", env.max_overshoot, 1e-9));
    reports.push(CertificateReport::bounded("growth-floor", env.max_undershoot, 1e-9));
    for (sp, ledger) in mass_ledgers(traj) {
        reports.push(CertificateReport::bounded(
            &format!("mass-{}", sp.name()),
            ledger.residual().abs() / ledger.scale(),
            1e-10,
        ));
    }
    if !traj.params().frozen_densities {
        for &sp in &Species::ALL {
            let led = renorm_ledger(traj, sp, RenormFn::Square);
            reports.push(CertificateReport::bounded(
                &format!("renorm-{}", sp.name()),
                led.residual().abs() / led.scale(),
                1e-8,
            ));
            reports.push(CertificateReport::bounded(
                &format!("renorm-boundary-{}", sp.name()),
                -led.min_boundary_bregman,
                1e-12,
            ));
        }
    }
    let energy = energy_ledger(traj)?;
    reports.push(CertificateReport::bounded(
        "energy-defect",
        -energy.defect() / energy.scale(),
        1e-6,
    ));
    let compact = ratio_compactness(traj);
    reports.push(CertificateReport::bounded(
        "ratio-compactness",
        compact.max_ratio_to_budget,
        1.0,
    ));
    let weak = weak_form_report(traj)?;
    reports.push(CertificateReport::bounded(
        "weak-continuity",
        weak.max_continuity_residual,
        1e-9,
    ));
    reports.push(CertificateReport::bounded(
        "weak-momentum",
        weak.max_momentum_residual,
        1e-9,
    ));
    Ok(reports)
}

fn print_suite(suite: &CertificateSuite) {
    for c in &suite.certificates {
        println!("{:<24} {:>13.4e} <= {:>9.1e}  {}", c.name, c.value, c.tolerance, c.verdict());
    }
    println!(
        "{}: {}",
        suite.scenario,
        if suite.all_passed { "all certificates pass" } else { "CERTIFICATE FAILURE" }
    );
}

fn run(cli: Cli) -> bifluid::Result<bool> {
    match cli.command {
        Command::Simulate { scenario, out } => {
            let sc = scenario.load()?;
            let traj = run_level1(&sc)?;
            let suite = CertificateSuite::new(&sc.name, certificate_battery(&traj)?);
            print_suite(&suite);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                suite.write_json(&dir.join("report.json"))?;
                write_trajectory_csv(&traj, &dir.join("trajectory.csv"))?;
                println!("wrote {}", dir.display());
            }
            Ok(suite.all_passed)
        }
        Command::Certify { scenario, trajectory, tolerance } => {
            let sc = scenario.load()?;
            let csv = read_trajectory_csv(&trajectory)?;
            let mut min_margin = f64::INFINITY;
            let mut worst = String::new();
            for snap in &csv.snapshots {
                for c in 0..snap.rho.len() {
                    for (name, m) in cell_domination_margins(
                        snap.rho[c],
                        snap.z[c],
                        snap.big_r[c],
                        snap.big_z[c],
                        &sc.cone,
                        &sc.closure,
                    ) {
                        if m < min_margin {
                            min_margin = m;
                            worst = format!("{name} at snapshot {} cell {c}", snap.step);
                        }
                    }
                }
            }
            let passed = min_margin >= -tolerance;
            println!(
                "domination margin {min_margin:.4e} (worst: {worst}): {}",
                if passed { "pass" } else { "FAIL" }
            );
            Ok(passed)
        }
        Command::SweepEps { scenario, eps_list, out } => {
            let sc = scenario.load()?;
            let sweep = sweep_epsilon(&sc, &eps_list)?;
            for i in 0..sweep.eps.len() {
                println!(
                    "eps {:>10.4e}  L1 to reference {:>12.6e}",
                    sweep.eps[i], sweep.distance_to_ref[i]
                );
            }
            for (i, c) in sweep.cauchy.iter().enumerate() {
                println!(
                    "cauchy {:>10.4e} -> {:>10.4e}: {c:>12.6e}",
                    sweep.eps[i],
                    sweep.eps[i + 1]
                );
            }
            if let Some(path) = out {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&sweep)
                        .map_err(|e| bifluid::Error::Parse(e.to_string()))?,
                )?;
            }
            Ok(true)
        }
        Command::SweepDelta { scenario, delta_list, out } => {
            let sc = scenario.load()?;
            let sweep = sweep_delta(&sc, &delta_list)?;
            for i in 0..sweep.delta.len() {
                println!(
                    "delta {:>10.4e}  artificial energy {:>12.6e}",
                    sweep.delta[i], sweep.artificial_energy[i]
                );
            }
            if let Some(path) = out {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&sweep)
                        .map_err(|e| bifluid::Error::Parse(e.to_string()))?,
                )?;
            }
            Ok(true)
        }
        Command::AlphaRoundtrip { scenario } => {
            let sc = scenario.load()?;
            let traj = run_level1(&sc)?;
            let fs = traj.final_state();
            let fields = SpeciesFields {
                rho: fs.rho.clone(),
                z: fs.z.clone(),
                big_r: fs.big_r.clone(),
                big_z: fs.big_z.clone(),
                alpha: Vec::new(),
            };
            let rt = reconstruct_alpha(&sc.closure, &fields, sc.ratio_floor());
            println!(
                "clamped {}  max |f(a)rho - R| {:.4e}  max |g(a)z - Z| {:.4e}  max gap {:.4e}",
                rt.clamped, rt.max_f_residual, rt.max_g_residual, rt.max_gap
            );
            Ok(rt.max_gap <= 1e-8 && rt.clamped == 0)
        }
        Command::Validate { scenario } => {
            let sc = scenario.load()?;
            let rep = validate_law(
                &sc.law,
                &sc.cone,
                sc.params.gamma_lower,
                sc.params.gamma_upper,
                8.0,
                64,
                16,
            );
            println!(
                "{}",
                serde_json::to_string_pretty(&rep)
                    .map_err(|e| bifluid::Error::Parse(e.to_string()))?
            );
            Ok(rep.dzp_nonnegative() && rep.drp_positive())
        }
        Command::List => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
