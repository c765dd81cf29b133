use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cuspedge::report::{
    all_checks_pass, run_analyze, run_classify, run_mesh, run_verify, to_csv, to_json, Options,
};
use cuspedge::surface::SurfaceDefinition;
use cuspedge::tol::Tolerances;

#[derive(Parser)]
#[command(
    name = "cuspedge",
    version,
    about = "Curvature invariants and normal-map classification for surfaces with cuspidal edges"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trace the singular curves and tabulate the edge invariants (CSV + JSON)
    Analyze(Common),
    /// Classify the normal-map singularities along each edge
    Classify(Common),
    /// Run every verification check the surface supports
    Verify(Common),
    /// Export OBJ meshes of the surface and its normal-map image
    Mesh(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Obj,
}

#[derive(Args)]
struct Common {
    /// Surface definition file
    surface: PathBuf,
    /// Jet order for the local expansions
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Grid resolution for seeding and meshing
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Trace step in parameter space (default: domain-derived)
    #[arg(long)]
    step: Option<f64>,
    /// Seed for randomized property suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long, default_value = ".")]
    output: PathBuf,
    /// What to print on stdout
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    tol_reg: Option<f64>,
    #[arg(long)]
    tol_sing: Option<f64>,
    #[arg(long)]
    tol_axis: Option<f64>,
    #[arg(long)]
    tol_crit: Option<f64>,
    #[arg(long)]
    tol_bound: Option<f64>,
    #[arg(long)]
    tol_k_limit: Option<f64>,
    #[arg(long)]
    tol_mu: Option<f64>,
    #[arg(long)]
    tol_point: Option<f64>,
}

impl Common {
    fn options(&self) -> Options {
        let mut tol = Tolerances::default();
        if let Some(x) = self.tol_reg {
            tol.reg = x;
        }
        if let Some(x) = self.tol_sing {
            tol.sing = x;
        }
        if let Some(x) = self.tol_axis {
            tol.axis = x;
        }
        if let Some(x) = self.tol_crit {
            tol.crit = x;
        }
        if let Some(x) = self.tol_bound {
            tol.bound = x;
        }
        if let Some(x) = self.tol_k_limit {
            tol.k_limit = x;
        }
        if let Some(x) = self.tol_mu {
            tol.mu = x;
        }
        if let Some(x) = self.tol_point {
            tol.point = x;
        }
        Options { order: self.order, grid: self.grid, step: self.step, seed: self.seed, tol }
    }

    fn load(&self) -> Result<SurfaceDefinition, String> {
        SurfaceDefinition::load(&self.surface).map_err(|e| e.to_string())
    }
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_NOTHING_TO_ANALYZE: u8 = 2;
const EXIT_INPUT_ERROR: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Analyze(c) => {
            let surface = c.load()?;
            let opt = c.options();
            let report = run_analyze(&surface, &opt).map_err(|e| e.to_string())?;
            let Some(report) = report else {
                eprintln!("no singular points found in the domain");
                write_file(&c.output, &format!("{}.csv", surface.name), to_csv_header())?;
                return Ok(ExitCode::from(EXIT_NOTHING_TO_ANALYZE));
            };
            let csv = to_csv(&report);
            let json = to_json(&report);
            write_file(&c.output, &format!("{}.csv", surface.name), csv.clone())?;
            write_file(&c.output, &format!("{}.json", surface.name), json.clone())?;
            match c.format {
                Format::Csv => print!("{csv}"),
                _ => print!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Classify(c) => {
            let surface = c.load()?;
            let opt = c.options();
            let report = run_classify(&surface, &opt).map_err(|e| e.to_string())?;
            let Some(report) = report else {
                eprintln!("no singular points found in the domain");
                return Ok(ExitCode::from(EXIT_NOTHING_TO_ANALYZE));
            };
            let json = to_json(&report);
            write_file(&c.output, &format!("{}.json", surface.name), json.clone())?;
            print!("{json}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify(c) => {
            let surface = c.load()?;
            let opt = c.options();
            let report = run_verify(&surface, &opt).map_err(|e| e.to_string())?;
            let Some(report) = report else {
                eprintln!("no singular points found in the domain");
                return Ok(ExitCode::from(EXIT_NOTHING_TO_ANALYZE));
            };
            for check in &report.checks {
                let status = if !check.hypotheses_met {
                    "SKIP"
                } else if check.conclusion_holds == Some(true) {
                    "PASS"
                } else {
                    "FAIL"
                };
                println!("{status} {}", check.name);
            }
            write_file(&c.output, &format!("{}.json", surface.name), to_json(&report))?;
            if all_checks_pass(&report) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_CHECK_FAILED))
            }
        }
        Cmd::Mesh(c) => {
            let surface = c.load()?;
            let opt = c.options();
            let mesh = run_mesh(&surface, &opt).map_err(|e| e.to_string())?;
            write_file(&c.output, &format!("{}_surface.obj", surface.name), mesh.surface_obj)?;
            write_file(&c.output, &format!("{}_gauss.obj", surface.name), mesh.gauss_obj)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn to_csv_header() -> String {
    "t,u,v,kappa_s,kappa_nu,kappa_c,kappa_t,kappa_nu_p,kappa_t_p,K_limit\n".to_string()
}

fn write_file(dir: &PathBuf, name: &str, contents: String) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("{}: {e}", path.display()))
}
