//! Artifact formatting shared by the CLI and the end-to-end report.
//!
//! Every artifact is a pure function of the configuration: no timings,
//! no host data, floats printed in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{InitKind, ModelConfig, RunConfig, RunSettings};
use crate::entropy::{
    coercivity_constants, entropy_production, relative_entropy_eta, sandwich_check, CoercivityConstants,
    Gradients, ProductionBreakdown, SandwichReport,
};
use crate::error::{Error, Result};
use crate::linalg::{Mat9, DIM};
use crate::model::derive_coefficients;
use crate::propagator::{
    default_mode_amplitude, random_field, simulate, single_mode, sobolev_norm, write_snapshot, Field, Trajectory,
    DEFAULT_MODE,
};
use crate::stability::{
    decay_map, find_compensator, kalman_rank, kernel_eigenpairs_nu0, sk_sweep, spectral_abscissa,
    verify_compensator, Compensator, CompensatorCheck, DecayMap, SweepReport,
};
use crate::symbols::{consistency_audit, SystemMatrices, IDX_B, IDX_ER, IDX_T, IDX_U};

/// `||V_0 - V_bar||_{H^d}` of generated initial data.
pub const INIT_HD_NORM: f64 = 1e-2;
/// `|xi . B_bar|` below which a direction counts as orthogonal to the field.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

pub fn coefficients_text(model: &ModelConfig) -> Result<String> {
    let c = derive_coefficients(&model.params, &model.eos, &model.equilibrium)?;
    let mut s = String::new();
    for (k, v) in c.as_array() {
        let _ = writeln!(s, "{k}: {v:?}");
    }
    let _ = writeln!(s, "lambda: {:?}", model.params.lambda);
    let _ = writeln!(s, "Er_bar: {:?}", model.equilibrium.er_bar);
    Ok(s)
}

pub fn matrix_csv(name: &str, hash: &str, m: &Mat9) -> String {
    let mut s = format!("# {name} config={hash}\n");
    for i in 0..DIM {
        let row: Vec<String> = (0..DIM).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(s, "{}", row.join(","));
    }
    s
}

pub fn matrices_csv(sys: &SystemMatrices, hash: &str) -> String {
    sys.matrices().iter().map(|(n, m)| matrix_csv(n, hash, m)).collect()
}

pub fn sweep_csv(label: &str, sys: &SystemMatrices, sweep: &SweepReport) -> String {
    let mut s = String::from("run,xi1,xi2,xi3,holds,min_angle,kalman_rank\n");
    for c in &sweep.checks {
        let _ = writeln!(
            s,
            "{label},{:?},{:?},{:?},{},{:?},{}",
            c.xi[0],
            c.xi[1],
            c.xi[2],
            c.holds,
            c.min_angle,
            kalman_rank(sys, c.xi)
        );
    }
    s
}

pub fn decay_csv(map: &DecayMap) -> String {
    let mut s = String::from("xi1,xi2,xi3,abscissa,cond\n");
    for p in &map.points {
        let _ = writeln!(s, "{:?},{:?},{:?},{:?},{:?}", p.xi[0], p.xi[1], p.xi[2], p.abscissa, p.cond);
    }
    s
}

pub fn compensator_csv(k: &Compensator, check: &CompensatorCheck, hash: &str) -> String {
    let mut s = String::from("quantity,value\n");
    let _ = writeln!(s, "train_margin,{:?}", k.margin);
    let _ = writeln!(s, "test_margin,{:?}", check.margin);
    let _ = writeln!(s, "n_test,{}", check.n_test);
    let _ = writeln!(s, "max_skew_defect,{:?}", check.max_skew_defect);
    let _ = writeln!(s, "max_odd_defect,{:?}", check.max_odd_defect);
    for (j, kj) in k.k.iter().enumerate() {
        s.push_str(&matrix_csv(&format!("K{}", j + 1), hash, kj));
    }
    s
}

pub fn coercivity_text(c: &CoercivityConstants, sandwich: &SandwichReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "grid_n: {}", c.grid_n);
    let _ = writeln!(s, "O1: {}", c.o1);
    let _ = writeln!(s, "O2: {}", c.o2);
    let _ = writeln!(s, "C1: {:?}", c.c1);
    let _ = writeln!(s, "C2: {:?}", c.c2);
    let _ = writeln!(s, "C3: {:?}", c.c3);
    let _ = writeln!(s, "C4: {:?}", c.c4);
    let _ = writeln!(s, "matter_points: {}", sandwich.matter_points);
    let _ = writeln!(s, "matter_violations: {}", sandwich.matter_violations);
    let _ = writeln!(s, "radiation_points: {}", sandwich.radiation_points);
    let _ = writeln!(s, "radiation_violations: {}", sandwich.radiation_violations);
    s
}

/// Flat `key: value` entropy report for a perturbation snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyAudit {
    pub production: ProductionBreakdown,
    pub eta: f64,
    pub eta_extended: f64,
    pub coercivity: CoercivityConstants,
    pub sandwich: SandwichReport,
}

pub fn entropy_audit(model: &ModelConfig, field: &Field, grid_n: usize) -> Result<EntropyAudit> {
    let (p, eq, eos) = (&model.params, &model.equilibrium, &model.eos);
    let grads = Gradients::spectral(field, eq, p.a)?;
    let coercivity = coercivity_constants(eos, eq, p.a, grid_n)?;
    Ok(EntropyAudit {
        production: entropy_production(field, &grads, eq, p)?,
        eta: relative_entropy_eta(field, eos, eq, p, false)?,
        eta_extended: relative_entropy_eta(field, eos, eq, p, true)?,
        sandwich: sandwich_check(eos, eq, p.a, &coercivity)?,
        coercivity,
    })
}

impl EntropyAudit {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.production.as_array() {
            let _ = writeln!(s, "production.{k}: {v:?}");
        }
        let _ = writeln!(s, "eta_integral: {:?}", self.eta);
        let _ = writeln!(s, "eta_integral_extended: {:?}", self.eta_extended);
        s.push_str(&coercivity_text(&self.coercivity, &self.sandwich));
        s
    }
}

/// Initial perturbation scaled to `||U_0||_{H^d} = INIT_HD_NORM`.
pub fn initial_field(run: &RunSettings) -> Result<Field> {
    let f = match run.init {
        InitKind::Random => random_field(run.n, run.box_len, run.spectral_decay_q, run.seed)?,
        InitKind::Mode => single_mode(run.n, run.box_len, DEFAULT_MODE, &default_mode_amplitude(DEFAULT_MODE))?,
    };
    let hd = sobolev_norm(&f, run.sobolev_d);
    Ok(if hd > 0.0 { f.scaled(INIT_HD_NORM / hd) } else { f })
}

pub const DECAY_COMPONENTS: [usize; 8] = [IDX_U, IDX_U + 1, IDX_U + 2, IDX_T, IDX_ER, IDX_B, IDX_B + 1, IDX_B + 2];

/// `N(t) / N(0)` maximized over the trajectory.
pub fn growth_constant(traj: &Trajectory) -> f64 {
    let n0 = traj.norms[0].n2.sqrt();
    traj.norms.iter().map(|r| r.n2.sqrt() / n0).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutcome {
    pub checks: Vec<Check>,
}

impl ReportOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

struct Writer<'a> {
    dir: &'a Path,
}

impl Writer<'_> {
    fn put(&self, name: &str, content: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), content).map_err(|e| Error::Io(format!("{name}: {e}")))
    }
}

/// Runs every analysis in sequence and writes `report.txt` plus the CSV and
/// text artifacts into `out`. Checks encode the expected outcome: SK and
/// decay for the damped model, SK failure exactly on `xi . B_bar = 0` for
/// the undamped one.
pub fn run_report(cfg: &RunConfig, out: &Path) -> Result<ReportOutcome> {
    std::fs::create_dir_all(out)?;
    let w = Writer { dir: out };
    let run = &cfg.run;
    let hash = cfg.model.hash();
    let damped_model = if cfg.model.params.nu > 0.0 {
        cfg.model
    } else {
        cfg.model.with_nu(1.0)?
    };
    let undamped_model = cfg.model.with_nu(0.0)?;
    let damped = SystemMatrices::from_model(&damped_model)?;
    let undamped = SystemMatrices::from_model(&undamped_model)?;
    let mut checks = Vec::new();
    let mut r = String::new();
    let _ = writeln!(r, "config_hash: {hash}");
    let _ = writeln!(r, "seed: {}", run.seed);
    let _ = writeln!(r, "nu_config: {:?}", cfg.model.params.nu);
    let _ = writeln!(r, "nu_damped_run: {:?}", damped_model.params.nu);

    w.put("coefficients.txt", &coefficients_text(&cfg.model)?)?;
    w.put("matrices.csv", &matrices_csv(&SystemMatrices::from_model(&cfg.model)?, &hash))?;

    // symmetry / positivity audit (reported, not asserted)
    let audit = consistency_audit(&damped);
    w.put("audit.txt", &audit.to_string())?;
    let _ = writeln!(r, "\n[audit]");
    let _ = writeln!(r, "Bt_asymmetry_defect: {:?}", audit.bt.asymmetry_defect);
    let _ = writeln!(r, "Bt_sym_min_eigenvalue: {:?}", audit.bt.sym_min_eigenvalue);
    let _ = writeln!(r, "Bt_symmetric: {}", audit.bt_symmetric());
    let _ = writeln!(r, "Bt_positive_semidefinite: {}", audit.bt_positive());
    let _ = writeln!(r, "At_max_relative_asymmetry: {:?}", audit.hyperbolic_relative_asymmetry);
    checks.push(Check {
        name: "symmetrized_fluxes",
        passed: audit.hyperbolic_relative_asymmetry <= 1e-13,
        detail: format!("{:?}", audit.hyperbolic_relative_asymmetry),
    });

    // SK and Kalman, damped
    let sweep = sk_sweep(&damped, run.sweep_n)?;
    let kal_damped: Vec<usize> = sweep.checks.iter().map(|c| kalman_rank(&damped, c.xi)).collect();
    let _ = writeln!(r, "\n[sk]");
    let _ = writeln!(r, "SK: {}", if sweep.holds_everywhere { "holds" } else { "fails" });
    let _ = writeln!(r, "directions: {}", sweep.checks.len());
    let _ = writeln!(r, "worst_min_angle: {:?}", sweep.worst_min_angle);
    let full = kal_damped.iter().filter(|&&k| k == DIM).count();
    let _ = writeln!(r, "kalman_full_rank: {full}/{}", kal_damped.len());
    checks.push(Check {
        name: "sk_damped",
        passed: sweep.holds_everywhere,
        detail: format!("worst angle {:?}", sweep.worst_min_angle),
    });
    let agree_d = sweep.checks.iter().zip(&kal_damped).all(|(c, &k)| c.holds == (k == DIM));
    checks.push(Check {
        name: "kalman_damped",
        passed: agree_d,
        detail: format!("{full}/{} full rank", kal_damped.len()),
    });

    // SK, undamped
    let sweep0 = sk_sweep(&undamped, run.sweep_n)?;
    let kal0: Vec<usize> = sweep0.checks.iter().map(|c| kalman_rank(&undamped, c.xi)).collect();
    let nfail = sweep0.failures().count();
    let pattern = sweep0
        .checks
        .iter()
        .all(|c| c.holds != (undamped.equilibrium.b_dot(c.xi).abs() <= ORTHOGONAL_TOL));
    let mut worst_res = 0.0f64;
    for c in sweep0.failures() {
        if let Some((lambda, x)) = &c.witness {
            let a = (undamped.a_symbol(c.xi) - undamped.a0 * *lambda) * x;
            worst_res = worst_res.max(a.norm()).max((undamped.b_symbol(c.xi) * x).norm());
        }
        for (_, x) in kernel_eigenpairs_nu0(&undamped, c.xi)? {
            worst_res = worst_res.max((undamped.a_symbol(c.xi) * x).norm());
            worst_res = worst_res.max((undamped.b_symbol(c.xi) * x).norm());
        }
    }
    let _ = writeln!(r, "SK(nu=0): {}", if sweep0.holds_everywhere { "holds" } else { "fails" });
    let _ = writeln!(r, "SK(nu=0)_failures: {nfail}/{}", sweep0.checks.len());
    let _ = writeln!(r, "SK(nu=0)_failures_exactly_orthogonal_to_B_bar: {pattern}");
    let _ = writeln!(r, "SK(nu=0)_worst_witness_residual: {worst_res:?}");
    checks.push(Check {
        name: "sk_undamped_pattern",
        passed: pattern && nfail > 0,
        detail: format!("{nfail} failures"),
    });
    checks.push(Check {
        name: "sk_undamped_witness",
        passed: worst_res <= 1e-10,
        detail: format!("{worst_res:?}"),
    });
    let agree0 = sweep0.checks.iter().zip(&kal0).all(|(c, &k)| c.holds == (k == DIM));
    checks.push(Check {
        name: "kalman_undamped",
        passed: agree0,
        detail: String::new(),
    });
    let mut sk_csv = sweep_csv("damped", &damped, &sweep);
    sk_csv.push_str(sweep_csv("undamped", &undamped, &sweep0).split_once('\n').map_or("", |x| x.1));
    w.put("sk_sweep.csv", &sk_csv)?;

    // decay map
    let map = decay_map(&damped, &run.mags, &run.dirs.directions())?;
    w.put("decay_map.csv", &decay_csv(&map))?;
    let a0 = spectral_abscissa(&damped, [0.0; 3])?.abscissa;
    let max_abs = map.points.iter().map(|p| p.abscissa).fold(f64::NEG_INFINITY, f64::max);
    let _ = writeln!(r, "\n[decay]");
    let _ = writeln!(r, "directions: {}", run.dirs.describe());
    let _ = writeln!(r, "abscissa_at_zero: {a0:?}");
    let _ = writeln!(r, "max_abscissa_nonzero_xi: {max_abs:?}");
    let _ = writeln!(r, "low_frequency_slope: {:?}", map.low_slope);
    let _ = writeln!(r, "plateau: {:?}", map.plateau);
    checks.push(Check {
        name: "decay_zero_frequency",
        passed: a0.abs() <= 1e-12,
        detail: format!("{a0:?}"),
    });
    checks.push(Check {
        name: "decay_negative",
        passed: max_abs < 0.0,
        detail: format!("{max_abs:?}"),
    });
    if let Some(slope) = map.low_slope {
        checks.push(Check {
            name: "decay_low_slope",
            passed: (slope - 2.0).abs() <= 0.2,
            detail: format!("{slope:?}"),
        });
    }
    if map.magnitudes.len() >= 2 && map.magnitudes[map.magnitudes.len() - 2] >= 1e2 {
        let hi = map.magnitudes[map.magnitudes.len() - 1];
        let lo = map.magnitudes[map.magnitudes.len() - 2];
        let at = |m: f64| map.points.iter().filter(move |p| (p.xi_norm() - m).abs() <= 1e-12 * m);
        let change = at(hi)
            .zip(at(lo))
            .map(|(a, b)| ((a.abscissa - b.abscissa) / a.abscissa).abs())
            .fold(0.0, f64::max);
        let _ = writeln!(r, "plateau_relative_change: {change:?}");
        checks.push(Check {
            name: "decay_plateau",
            passed: change < 0.05,
            detail: format!("{change:?}"),
        });
    }

    // compensator
    let _ = writeln!(r, "\n[compensator]");
    match find_compensator(&damped, run.train, run.budget) {
        Ok(k) => {
            let check = verify_compensator(&k, &damped, run.test);
            w.put("compensator.csv", &compensator_csv(&k, &check, &hash))?;
            let _ = writeln!(r, "train_margin: {:?}", k.margin);
            let _ = writeln!(r, "test_margin: {:?}", check.margin);
            let _ = writeln!(r, "max_skew_defect: {:?}", check.max_skew_defect);
            let _ = writeln!(r, "max_odd_defect: {:?}", check.max_odd_defect);
            checks.push(Check {
                name: "compensator_margin",
                passed: check.margin > 0.0 && (check.margin - k.margin).abs() <= 0.5 * k.margin,
                detail: format!("train {:?} test {:?}", k.margin, check.margin),
            });
            checks.push(Check {
                name: "compensator_structure",
                passed: check.max_skew_defect <= 1e-12 && check.max_odd_defect == 0.0,
                detail: String::new(),
            });
        }
        Err(Error::NoCompensatorFound { margin }) => {
            let _ = writeln!(r, "train_margin: {margin:?}");
            checks.push(Check {
                name: "compensator_margin",
                passed: false,
                detail: format!("no positive margin ({margin:?})"),
            });
        }
        Err(e) => return Err(e),
    }

    // coercivity
    let model = &cfg.model;
    let coer = coercivity_constants(&model.eos, &model.equilibrium, model.params.a, run.coercivity_grid)?;
    let sandwich = sandwich_check(&model.eos, &model.equilibrium, model.params.a, &coer)?;
    w.put("coercivity.txt", &coercivity_text(&coer, &sandwich))?;
    let _ = writeln!(r, "\n[coercivity]");
    let _ = write!(r, "{}", coercivity_text(&coer, &sandwich));
    checks.push(Check {
        name: "coercivity",
        passed: coer.c1 > 0.0 && coer.c3 > 0.0 && sandwich.matter_violations == 0 && sandwich.radiation_violations == 0,
        detail: String::new(),
    });

    // linear simulation
    let field0 = initial_field(run)?;
    let traj = simulate(&damped, &field0, run.t_end, run.n_out, run.sobolev_d)?;
    w.put("norms.csv", &traj.norms_csv())?;
    write_snapshot(&out.join("snapshot_initial.txt"), &traj.snapshots[0], 0.0)?;
    let last = traj.snapshots.last().expect("n_out >= 1");
    write_snapshot(&out.join("snapshot_final.txt"), last, run.t_end)?;
    let l2_0 = traj.snapshots[0].l2_norm_of(&DECAY_COMPONENTS);
    let l2_t = last.l2_norm_of(&DECAY_COMPONENTS);
    let growth = growth_constant(&traj);
    let _ = writeln!(r, "\n[simulation]");
    let _ = writeln!(r, "n: {}", run.n);
    let _ = writeln!(r, "L: {:?}", run.box_len);
    let _ = writeln!(r, "init: {:?}", run.init);
    let _ = writeln!(r, "max_imag_residue: {:?}", traj.max_imag_residue);
    let _ = writeln!(r, "max_div_defect: {:?}", traj.max_div_defect);
    let _ = writeln!(r, "l2_u_T_er_b_initial: {l2_0:?}");
    let _ = writeln!(r, "l2_u_T_er_b_final: {l2_t:?}");
    let _ = writeln!(r, "N_growth_constant: {growth:?}");
    let _ = writeln!(r, "t,H^d,N2");
    let stride = (traj.norms.len() / 5).max(1);
    for row in traj.norms.iter().step_by(stride) {
        let _ = writeln!(r, "{:?},{:?},{:?}", row.t, row.hd, row.n2);
    }
    checks.push(Check {
        name: "simulation_reality",
        passed: traj.max_imag_residue <= 1e-10,
        detail: format!("{:?}", traj.max_imag_residue),
    });
    checks.push(Check {
        name: "simulation_divergence",
        passed: traj.max_div_defect <= 1e-10,
        detail: format!("{:?}", traj.max_div_defect),
    });
    checks.push(Check {
        name: "simulation_decay",
        passed: l2_t < l2_0 && growth.is_finite(),
        detail: format!("{l2_0:?} -> {l2_t:?}"),
    });

    // entropy on the final state
    let audit = entropy_audit(model, last, run.coercivity_grid)?;
    w.put("entropy.txt", &audit.text())?;
    let _ = writeln!(r, "\n[entropy]");
    for (k, v) in audit.production.as_array() {
        let _ = writeln!(r, "production.{k}: {v:?}");
    }
    let _ = writeln!(r, "eta_integral: {:?}", audit.eta);
    checks.push(Check {
        name: "entropy_production_sign",
        passed: audit.production.five().iter().all(|v| *v >= 0.0) && audit.eta >= 0.0,
        detail: String::new(),
    });

    let _ = writeln!(r, "\n[checks]");
    for c in &checks {
        let _ = writeln!(r, "{}: {} {}", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail);
    }
    let outcome = ReportOutcome { checks };
    let _ = writeln!(r, "overall: {}", if outcome.passed() { "PASS" } else { "FAIL" });
    w.put("report.txt", &r)?;
    Ok(outcome)
}
