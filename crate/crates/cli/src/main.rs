//! `wettix`: batch driver for droplet wetting/dewetting simulations.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigFile;
use wettix_core::error::Error;
use wettix_core::fields::extract_contour;
use wettix_core::harness::{
    self, build_stencils, read_fld, write_xy, ExperimentConfig, KernelMode,
};

const CSV_DOC: &str = "\
Output files and their columns:
  steps.csv    step,mu,area,target_area,bisect_iters,max_dphi
               per-step multiplier, conserved liquid area, bisection
               iteration count, max level-set change
  energy.csv   step,mu,energy
               nonlocal interfacial energy at the configured interval
  errors.csv   steps,inv_dx,l1,linf,order
               per-level errors against the reference; trailing comment
               line '# slope=<v>' holds the log-log fit slope
  mobility_diffs.csv  steps,inv_dx,l1_a,l1_b,rel_diff
  contour_T<t>.xy     'x y' rows, blank line between polylines
  phiL_T<t>.fld       one ASCII header line, then little-endian f64 grid
  kernel_<ifc>.csv    theta plus one weight column per kernel circle

Config files are INI-style sections [grid] [time] [tensions] [mobilities]
[kernel] [shapes] [solver] [output]; unknown keys are rejected. Every key
can be overridden on the command line as section.key=value. Angles accept
pi fractions (e.g. -pi/3). Exit codes: 0 success, 2 configuration error,
3 solver error.";

#[derive(Parser)]
#[command(
    name = "wettix",
    about = "Anisotropic multiphase wetting/dewetting simulations on a periodic grid",
    after_long_help = CSV_DOC,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file path
    config: PathBuf,
    /// section.key=value overrides (recorded in config.snapshot)
    #[arg(value_name = "OVERRIDE")]
    overrides: Vec<String>,
    /// Max concurrent refinement levels (overrides solver.jobs)
    #[arg(long)]
    jobs: Option<usize>,
    /// Output root directory (overrides env WETTIX_OUT; default ./out)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one simulation and write its run directory
    Run(RunArgs),
    /// Run a refinement ladder and emit the convergence table
    Converge(RunArgs),
    /// Emit the kernel weight functions of the configured interfaces as CSV
    Kernel(RunArgs),
    /// Run a simulation and report errors against the equilibrium droplet
    Equilibrium(RunArgs),
    /// Extract the iso-contour of a stored field at the given level value
    Contour {
        /// Path to a .fld file written by a run
        fld: PathBuf,
        /// Level value of the contour (0 = interface)
        level: f64,
    },
}

fn out_root(args: &RunArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os("WETTIX_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn load_experiment(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut file = ConfigFile::parse(&text)?;
    for o in &args.overrides {
        file.apply_override(o)?;
    }
    let cfg = file.to_experiment(&out_root(args), args.jobs)?;
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code_for(err: &Error) -> ExitCode {
    match err {
        Error::Config(_) | Error::PositivityViolation { .. } => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Error> {
    let cfg = load_experiment(args)?;
    let result = harness::run(&cfg)?;
    println!("{}", result.dir.display());
    Ok(())
}

fn cmd_converge(args: &RunArgs) -> Result<(), Error> {
    let cfg = load_experiment(args)?;
    let (rows, slope) = harness::converge(&cfg)?;
    println!("steps,inv_dx,l1,linf,order");
    for r in &rows {
        let linf = r.linf.map(|v| format!("{v:.6e}")).unwrap_or_default();
        let order = r.order.map(|v| format!("{v:.4}")).unwrap_or_default();
        println!("{},{},{:.6e},{},{}", r.steps, r.inv_dx, r.l1, linf, order);
    }
    if let Some(s) = slope {
        println!("# slope={s:.5}");
    }
    println!("{}", cfg.out_dir.join("errors.csv").display());
    Ok(())
}

fn cmd_kernel(args: &RunArgs) -> Result<(), Error> {
    let cfg = load_experiment(args)?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    // the per-interface kernels, before time discretization
    let t = &cfg.tensions;
    let pairs = [
        ("vl", &t.sigma_vl, &t.m_vl),
        ("ls", &t.sigma_ls, &t.m_ls),
        ("vs", &t.sigma_vs, &t.m_vs),
    ];
    for (tag, sigma, m) in pairs {
        let kernel = match cfg.kernel {
            KernelMode::SingleCircle { r } => {
                wettix_core::kernels::build_single_circle_kernel(sigma, r, cfg.q)?.0
            }
            KernelMode::TwoCircle { r1, r2 } => {
                wettix_core::kernels::build_two_circle_kernel(sigma, m, r1, r2, cfg.q)?
            }
        };
        let path = cfg.out_dir.join(format!("kernel_{tag}.csv"));
        let mut out = String::from("theta");
        for c in &kernel.circles {
            out.push_str(&format!(",omega_r{}", c.radius));
        }
        out.push('\n');
        let q = kernel.samples_per_circle();
        for j in 0..q {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
            out.push_str(&format!("{theta:.12e}"));
            for c in &kernel.circles {
                out.push_str(&format!(",{:.12e}", c.weights[j]));
            }
            out.push('\n');
        }
        std::fs::write(&path, out)?;
        println!("{}", path.display());
    }
    // also validate the time-discretized stencil set builds
    build_stencils(&cfg, cfg.dt)?;
    Ok(())
}

fn cmd_equilibrium(args: &RunArgs) -> Result<(), Error> {
    let cfg = load_experiment(args)?;
    let result = harness::run(&cfg)?;
    let (l1, linf) = harness::equilibrium_errors(&cfg, &result)?;
    println!("l1={l1:.6e} linf={linf:.6e}");
    println!("{}", result.dir.display());
    Ok(())
}

fn cmd_contour(fld: &Path, level: f64) -> Result<(), Error> {
    let (mut field, _name) = read_fld(fld)?;
    for v in &mut field.values {
        *v -= level;
    }
    let contours = extract_contour(&field)?;
    let out = fld.with_extension(format!("level{level}.xy"));
    write_xy(&out, &contours)?;
    println!("{}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Equilibrium(a) => cmd_equilibrium(a),
        Command::Contour { fld, level } => cmd_contour(fld, *level),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::config::*;

    #[test]
    fn number_parsing_with_pi() {
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!((parse_number("pi").unwrap() - std::f64::consts::PI).abs() < 1e-15);
        assert!((parse_number("-pi/3").unwrap() + std::f64::consts::PI / 3.0).abs() < 1e-15);
        assert!((parse_number("3*pi/8").unwrap() - 3.0 * std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!(parse_number("two").is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_sections() {
        assert!(ConfigFile::parse("[grid]\nn = 100\n").is_ok());
        assert!(ConfigFile::parse("[grid]\nnn = 100\n").is_err());
        assert!(ConfigFile::parse("[gird]\nn = 100\n").is_err());
        assert!(ConfigFile::parse("n = 100\n").is_err());
        assert!(ConfigFile::parse("[grid]\nn = 100\nn = 50\n").is_err());
    }

    #[test]
    fn profiles_and_shapes_parse() {
        let s = parse_anisotropy("sqrt_sin2(1, -pi/3)").unwrap();
        let th = 0.7;
        let want = (1.0 + (th + std::f64::consts::PI / 3.0).sin().powi(2)).sqrt();
        assert!((s.eval(th, 0) - want).abs() < 1e-14);
        assert!(parse_mobility("induced(sqrt_sin2(1, -pi/3), 0.5)").is_ok());
        assert!(parse_shape("disc(0.5, 0.5, 0.2)").is_ok());
        assert!(parse_shape("rect(0.2, 0.5, 0.8, 0.56)").is_ok());
        assert!(parse_substrate("sinusoid(0.015625, 4, 0.5, 0.5)").is_ok());
        assert!(parse_substrate("slope(1)").is_err());
    }

    #[test]
    fn overrides_replace_and_record() {
        let mut f = ConfigFile::parse("[grid]\nn = 100\n").unwrap();
        f.apply_override("grid.n=200").unwrap();
        assert!(f.text.contains("override: grid.n = 200"));
        assert!(f.apply_override("grid.m=3").is_err());
        assert!(f.apply_override("grid.n").is_err());
    }
}
