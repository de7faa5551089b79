use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use radmhd::config::{parse_magnitudes, DirSpec, InitKind, RunConfig};
use radmhd::propagator::{read_snapshot, simulate, write_snapshot};
use radmhd::report::{
    coefficients_text, compensator_csv, coercivity_text, decay_csv, entropy_audit, growth_constant, initial_field,
    matrices_csv, run_report, sweep_csv,
};
use radmhd::stability::{
    decay_map, find_compensator, kalman_rank, sk_check, sk_sweep, verify_compensator,
};
use radmhd::symbols::{consistency_audit, SystemMatrices};
use radmhd::entropy::{coercivity_constants, sandwich_check};
use radmhd::{Error, Result};

#[derive(Parser)]
#[command(name = "radmhd", version, about = "Stability and entropy diagnostics for linearized radiative Euler-MHD")]
struct Cli {
    /// Configuration file; defaults to the all-ones model.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker thread cap.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the linearization coefficients.
    Coeffs,
    /// Print every system matrix as CSV.
    DumpMatrices,
    /// Symmetry and positivity audit of the dissipation matrices.
    Audit,
    /// Shizuta-Kawashima check at one direction.
    SkCheck {
        #[arg(long, value_parser = parse_vec3)]
        xi: [f64; 3],
    },
    /// Shizuta-Kawashima check over a sphere sample.
    SkSweep {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Kalman rank at one direction.
    Kalman {
        #[arg(long, value_parser = parse_vec3)]
        xi: [f64; 3],
    },
    /// Spectral abscissa over magnitudes and directions.
    DecayMap {
        #[arg(long)]
        mags: Option<String>,
        #[arg(long)]
        dirs: Option<String>,
    },
    /// Search and verify a compensating matrix.
    Compensator {
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Exact linear evolution on a periodic box.
    Simulate {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "L")]
        l: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        n_out: Option<usize>,
        #[arg(long)]
        init: Option<String>,
    },
    /// Entropy production, relative entropy and coercivity for a snapshot.
    EntropyAudit {
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Coercivity constants of the relative Helmholtz functionals.
    Coercivity {
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Full pipeline with report.txt and all artifacts.
    Report,
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected 3 components, got {}", v.len()))
}

fn unit(xi: [f64; 3]) -> Result<[f64; 3]> {
    let n = radmhd::sphere::norm(xi);
    if n == 0.0 {
        return Err(Error::InvalidParameter {
            name: "xi",
            reason: "zero vector".into(),
        });
    }
    Ok(radmhd::sphere::scale(xi, 1.0 / n))
}

fn write(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    println!("wrote {}", dir.join(name).display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    let bad = |name: &'static str, reason: String| Error::InvalidParameter { name, reason };
    let sys = || SystemMatrices::from_model(&cfg.model);
    let out = &cli.out;

    match cli.cmd {
        Cmd::Coeffs => print!("{}", coefficients_text(&cfg.model)?),
        Cmd::DumpMatrices => print!("{}", matrices_csv(&sys()?, &cfg.model.hash())),
        Cmd::Audit => print!("{}", consistency_audit(&sys()?)),
        Cmd::SkCheck { xi } => {
            let r = sk_check(&sys()?, unit(xi)?)?;
            println!("xi: {:?}", r.xi);
            println!("SK: {}", if r.holds { "holds" } else { "fails" });
            println!("min_angle: {:?}", r.min_angle);
            if let Some((lambda, x)) = r.witness {
                println!("witness_eigenvalue: {lambda:?}");
                println!("witness_vector: {:?}", x.as_slice());
            }
        }
        Cmd::SkSweep { n } => {
            let s = sys()?;
            let r = sk_sweep(&s, n.unwrap_or(cfg.run.sweep_n))?;
            println!("SK: {}", if r.holds_everywhere { "holds" } else { "fails" });
            println!("directions: {}", r.checks.len());
            println!("failures: {}", r.failures().count());
            println!("worst_min_angle: {:?}", r.worst_min_angle);
            write(out, "sk_sweep.csv", &sweep_csv("config", &s, &r))?;
        }
        Cmd::Kalman { xi } => println!("kalman_rank: {}", kalman_rank(&sys()?, unit(xi)?)),
        Cmd::DecayMap { mags, dirs } => {
            let mags = match mags {
                Some(m) => parse_magnitudes(&m).map_err(|e| bad("mags", e))?,
                None => cfg.run.mags.clone(),
            };
            let dirs = match dirs {
                Some(d) => DirSpec::parse(&d).map_err(|e| bad("dirs", e))?,
                None => cfg.run.dirs.clone(),
            };
            let map = decay_map(&sys()?, &mags, &dirs.directions())?;
            println!("points: {}", map.points.len());
            println!("low_frequency_slope: {:?}", map.low_slope);
            println!("plateau: {:?}", map.plateau);
            write(out, "decay_map.csv", &decay_csv(&map))?;
        }
        Cmd::Compensator { train, test, budget } => {
            let s = sys()?;
            let k = find_compensator(&s, train.unwrap_or(cfg.run.train), budget.unwrap_or(cfg.run.budget))?;
            let check = verify_compensator(&k, &s, test.unwrap_or(cfg.run.test));
            println!("train_margin: {:?}", k.margin);
            println!("test_margin: {:?}", check.margin);
            println!("max_skew_defect: {:?}", check.max_skew_defect);
            println!("max_odd_defect: {:?}", check.max_odd_defect);
            write(out, "compensator.csv", &compensator_csv(&k, &check, &cfg.model.hash()))?;
        }
        Cmd::Simulate { n, l, t_end, n_out, init } => {
            let r = &mut cfg.run;
            r.n = n.unwrap_or(r.n);
            r.box_len = l.unwrap_or(r.box_len);
            r.t_end = t_end.unwrap_or(r.t_end);
            r.n_out = n_out.unwrap_or(r.n_out);
            if let Some(i) = init {
                r.init = match i.as_str() {
                    "mode" => InitKind::Mode,
                    "random" => InitKind::Random,
                    other => return Err(bad("init", format!("expected mode|random, got `{other}`"))),
                };
            }
            let field0 = initial_field(&cfg.run)?;
            let traj = simulate(&sys()?, &field0, cfg.run.t_end, cfg.run.n_out, cfg.run.sobolev_d)?;
            println!("seed: {}", cfg.run.seed);
            println!("max_imag_residue: {:?}", traj.max_imag_residue);
            println!("max_div_defect: {:?}", traj.max_div_defect);
            println!("N_growth_constant: {:?}", growth_constant(&traj));
            write(out, "norms.csv", &traj.norms_csv())?;
            for (i, (f, t)) in traj.snapshots.iter().zip(&traj.times).enumerate() {
                write_snapshot(&out.join(format!("snapshot_{i:04}.txt")), f, *t)?;
            }
            println!("wrote {} snapshots", traj.snapshots.len());
        }
        Cmd::EntropyAudit { snapshot } => {
            let (field, _) = read_snapshot(&snapshot)?;
            print!("{}", entropy_audit(&cfg.model, &field, cfg.run.coercivity_grid)?.text());
        }
        Cmd::Coercivity { grid } => {
            let m = &cfg.model;
            let c = coercivity_constants(&m.eos, &m.equilibrium, m.params.a, grid.unwrap_or(cfg.run.coercivity_grid))?;
            let s = sandwich_check(&m.eos, &m.equilibrium, m.params.a, &c)?;
            print!("{}", coercivity_text(&c, &s));
        }
        Cmd::Report => {
            let outcome = run_report(&cfg, out)?;
            for c in &outcome.checks {
                println!("{}: {}", c.name, if c.passed { "PASS" } else { "FAIL" });
            }
            println!("wrote {}", out.join("report.txt").display());
            if let Some(f) = outcome.first_failure() {
                eprintln!("first failing check: {}", f.name);
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
