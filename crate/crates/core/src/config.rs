//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [params]
//! mu = 1.0
//! sigma = 1.0
//! sigma_a = 1.0
//! sigma_s = 1.0
//! a = 1.0
//! kappa = 1.0
//! nu = 1.0
//!
//! [equilibrium]
//! rho_bar = 1.0
//! theta_bar = 1.0
//! B_bar = 1.0 0.0 0.0
//!
//! [eos]
//! R = 1.0
//! C_v = 1.0
//! ```
//!
//! `lambda` and `Er_bar` are derived; when present they must agree with the
//! derived value. The optional `[grid]`, `[sweep]` and `[run]` sections hold
//! experiment settings. Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{make_ideal_gas_eos, validate_equilibrium, Equilibrium, IdealGas, PhysParams};
use crate::sphere;

/// The physical model: parameters, closure and background state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub params: PhysParams,
    pub eos: IdealGas,
    pub equilibrium: Equilibrium,
}

impl ModelConfig {
    /// All constants one (`R = C_v = rho_bar = theta_bar = a = kappa = sigma_s
    /// = sigma_a = mu = sigma = nu = 1`) with `B_bar = (1, 0, 0)`.
    pub fn all_ones() -> Self {
        let params = PhysParams::all_ones();
        Self {
            params,
            eos: IdealGas { r: 1.0, cv: 1.0 },
            equilibrium: Equilibrium::compatible(&params, 1.0, 1.0, [1.0, 0.0, 0.0])
                .expect("unit equilibrium is admissible"),
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Result<Self> {
        self.params = self.params.with_nu(nu)?;
        Ok(self)
    }

    /// Deterministic textual form; also the input of [`ModelConfig::hash`].
    pub fn canonical(&self) -> String {
        let p = &self.params;
        let e = &self.equilibrium;
        let mut s = String::new();
        let _ = writeln!(s, "[params]");
        for (k, v) in [
            ("mu", p.mu),
            ("sigma", p.sigma),
            ("sigma_a", p.sigma_a),
            ("sigma_s", p.sigma_s),
            ("a", p.a),
            ("kappa", p.kappa),
            ("nu", p.nu),
        ] {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        let _ = writeln!(s, "\n[equilibrium]");
        let _ = writeln!(s, "rho_bar = {:?}", e.rho_bar);
        let _ = writeln!(s, "theta_bar = {:?}", e.theta_bar);
        let _ = writeln!(s, "B_bar = {:?} {:?} {:?}", e.b_bar[0], e.b_bar[1], e.b_bar[2]);
        let _ = writeln!(s, "\n[eos]");
        let _ = writeln!(s, "R = {:?}", self.eos.r);
        let _ = writeln!(s, "C_v = {:?}", self.eos.cv);
        s
    }

    /// First 16 hex digits of the SHA-256 of [`ModelConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// How the initial field of a simulation is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    Mode,
    Random,
}

/// Sphere directions used by decay maps.
#[derive(Debug, Clone, PartialEq)]
pub enum DirSpec {
    Axes,
    Fibonacci(usize),
}

impl DirSpec {
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "axes" {
            return Ok(DirSpec::Axes);
        }
        if let Some(n) = s.strip_prefix("fib:") {
            let n: usize = n.trim().parse().map_err(|_| format!("bad direction count in `{s}`"))?;
            if n == 0 {
                return Err("fib:n needs n >= 1".into());
            }
            return Ok(DirSpec::Fibonacci(n));
        }
        Err(format!("directions must be `axes` or `fib:n`, got `{s}`"))
    }

    pub fn directions(&self) -> Vec<[f64; 3]> {
        match self {
            DirSpec::Axes => vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            DirSpec::Fibonacci(n) => sphere::fibonacci(*n, 0.0),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DirSpec::Axes => "axes".into(),
            DirSpec::Fibonacci(n) => format!("fib:{n}"),
        }
    }
}

/// Parses `lo:hi:log:n`, `lo:hi:lin:n` or a comma separated list of values.
pub fn parse_magnitudes(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| -> std::result::Result<f64, String> {
        t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in `{s}`"))
    };
    match parts.as_slice() {
        [lo, hi, kind, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad count in `{s}`"))?;
            match *kind {
                "log" => {
                    if !(lo > 0.0 && hi > 0.0) {
                        return Err("log spacing needs positive bounds".into());
                    }
                    Ok(spaced(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect())
                }
                "lin" => Ok(spaced(lo, hi, n)),
                other => Err(format!("spacing must be `log` or `lin`, got `{other}`")),
            }
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(format!("magnitudes must be `lo:hi:log:n` or a list, got `{s}`")),
    }
}

fn spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Experiment settings shared by the subcommands and the report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub n: usize,
    pub box_len: f64,
    pub t_end: f64,
    pub n_out: usize,
    pub init: InitKind,
    pub spectral_decay_q: f64,
    pub sobolev_d: f64,
    pub sweep_n: usize,
    pub train: usize,
    pub test: usize,
    pub budget: usize,
    pub mags: Vec<f64>,
    pub dirs: DirSpec,
    pub coercivity_grid: usize,
    pub seed: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            n: 16,
            box_len: std::f64::consts::TAU,
            t_end: 10.0,
            n_out: 20,
            init: InitKind::Random,
            spectral_decay_q: 3.0,
            sobolev_d: 4.0,
            sweep_n: 200,
            train: 64,
            test: 500,
            budget: 4000,
            mags: parse_magnitudes("1e-3:1e3:log:25").expect("static spec"),
            dirs: DirSpec::Axes,
            coercivity_grid: 256,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub run: RunSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::all_ones(),
            run: RunSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, BTreeMap<String, (usize, String)>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                    line: line_no,
                    message: format!("unterminated section header `{line}`"),
                })?;
                let name = name.trim().to_string();
                if !SECTIONS.contains(&name.as_str()) {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!("unknown section `[{name}]`"),
                    });
                }
                sections.entry(name.clone()).or_default();
                current = Some(name);
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let section = current.as_ref().ok_or_else(|| Error::Config {
                line: line_no,
                message: "key outside of any section".into(),
            })?;
            let key = key.trim().to_string();
            if !allowed_keys(section).contains(&key.as_str()) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("unknown key `{key}` in [{section}]"),
                });
            }
            let entries = sections.get_mut(section).expect("section registered");
            if entries.contains_key(&key) {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("duplicate key `{key}` in [{section}]"),
                });
            }
            entries.insert(key, (line_no, value.trim().to_string()));
        }
        Reader { sections }.build()
    }
}

const SECTIONS: [&str; 6] = ["params", "equilibrium", "eos", "grid", "sweep", "run"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "params" => &["mu", "sigma", "sigma_a", "sigma_s", "a", "kappa", "nu", "lambda"],
        "equilibrium" => &["rho_bar", "theta_bar", "Er_bar", "B_bar"],
        "eos" => &["kind", "R", "C_v"],
        "grid" => &["n", "L", "t_end", "n_out", "init", "q", "d"],
        "sweep" => &["n_dirs", "train", "test", "budget", "mags", "dirs", "coercivity_grid"],
        "run" => &["seed"],
        _ => &[],
    }
}

struct Reader {
    sections: BTreeMap<String, BTreeMap<String, (usize, String)>>,
}

impl Reader {
    fn get(&self, section: &str, key: &str) -> Option<&(usize, String)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    fn required_f64(&self, section: &str, key: &str) -> Result<(usize, f64)> {
        let (line, raw) = self.get(section, key).ok_or_else(|| Error::Config {
            line: 0,
            message: format!("missing key `{key}` in [{section}]"),
        })?;
        Ok((*line, parse_f64(*line, key, raw)?))
    }

    fn optional<T>(
        &self,
        section: &str,
        key: &str,
        parse: impl Fn(usize, &str) -> Result<T>,
    ) -> Result<Option<T>> {
        self.get(section, key).map(|(line, raw)| parse(*line, raw)).transpose()
    }

    fn build(self) -> Result<RunConfig> {
        let p = |k| self.required_f64("params", k).map(|(_, v)| v);
        let (mu_line, mu) = self.required_f64("params", "mu")?;
        let params = PhysParams::new(mu, p("sigma")?, p("sigma_a")?, p("sigma_s")?, p("a")?, p("kappa")?, p("nu")?)
            .map_err(|e| Error::Config {
                line: mu_line,
                message: e.to_string(),
            })?;
        if let Some((line, raw)) = self.get("params", "lambda") {
            let lambda = parse_f64(*line, "lambda", raw)?;
            if (lambda - params.lambda).abs() > 1e-12 * params.lambda {
                return Err(Error::Config {
                    line: *line,
                    message: format!("lambda = {lambda} disagrees with 1/(mu sigma) = {}", params.lambda),
                });
            }
        }

        if let Some((line, kind)) = self.get("eos", "kind") {
            if kind != "ideal_gas" && kind != "ideal" {
                return Err(Error::Config {
                    line: *line,
                    message: format!("unsupported eos kind `{kind}` (only `ideal_gas`)"),
                });
            }
        }
        let (r_line, r) = self.required_f64("eos", "R")?;
        let (_, cv) = self.required_f64("eos", "C_v")?;
        let eos = make_ideal_gas_eos(r, cv).map_err(|e| Error::Config {
            line: r_line,
            message: e.to_string(),
        })?;

        let (rho_line, rho_bar) = self.required_f64("equilibrium", "rho_bar")?;
        let (_, theta_bar) = self.required_f64("equilibrium", "theta_bar")?;
        let b_bar = match self.get("equilibrium", "B_bar") {
            Some((line, raw)) => parse_vec3(*line, raw)?,
            None => {
                return Err(Error::Config {
                    line: 0,
                    message: "missing key `B_bar` in [equilibrium]".into(),
                })
            }
        };
        let (er_line, er_bar) = match self.get("equilibrium", "Er_bar") {
            Some((line, raw)) => (*line, parse_f64(*line, "Er_bar", raw)?),
            None => (rho_line, params.a * theta_bar.powi(4)),
        };
        let equilibrium = validate_equilibrium(
            &params,
            Equilibrium {
                rho_bar,
                theta_bar,
                er_bar,
                b_bar,
            },
        )
        .map_err(|e| Error::Config {
            line: er_line,
            message: e.to_string(),
        })?;

        let mut run = RunSettings::default();
        let as_usize = |line: usize, raw: &str| -> Result<usize> {
            raw.parse::<usize>().map_err(|_| Error::Config {
                line,
                message: format!("expected a non-negative integer, got `{raw}`"),
            })
        };
        let as_f64 = |line: usize, raw: &str| parse_f64(line, "value", raw);
        if let Some(v) = self.optional("grid", "n", as_usize)? {
            run.n = v;
        }
        if let Some(v) = self.optional("grid", "L", as_f64)? {
            run.box_len = v;
        }
        if let Some(v) = self.optional("grid", "t_end", as_f64)? {
            run.t_end = v;
        }
        if let Some(v) = self.optional("grid", "n_out", as_usize)? {
            run.n_out = v;
        }
        if let Some(v) = self.optional("grid", "q", as_f64)? {
            run.spectral_decay_q = v;
        }
        if let Some(v) = self.optional("grid", "d", as_f64)? {
            run.sobolev_d = v;
        }
        if let Some(v) = self.optional("grid", "init", |line, raw| match raw {
            "mode" => Ok(InitKind::Mode),
            "random" => Ok(InitKind::Random),
            other => Err(Error::Config {
                line,
                message: format!("init must be `mode` or `random`, got `{other}`"),
            }),
        })? {
            run.init = v;
        }
        if let Some(v) = self.optional("sweep", "n_dirs", as_usize)? {
            run.sweep_n = v;
        }
        if let Some(v) = self.optional("sweep", "train", as_usize)? {
            run.train = v;
        }
        if let Some(v) = self.optional("sweep", "test", as_usize)? {
            run.test = v;
        }
        if let Some(v) = self.optional("sweep", "budget", as_usize)? {
            run.budget = v;
        }
        if let Some(v) = self.optional("sweep", "coercivity_grid", as_usize)? {
            run.coercivity_grid = v;
        }
        if let Some(v) = self.optional("sweep", "mags", |line, raw| {
            parse_magnitudes(raw).map_err(|message| Error::Config { line, message })
        })? {
            run.mags = v;
        }
        if let Some(v) = self.optional("sweep", "dirs", |line, raw| {
            DirSpec::parse(raw).map_err(|message| Error::Config { line, message })
        })? {
            run.dirs = v;
        }
        if let Some(v) = self.optional("run", "seed", |line, raw| {
            raw.parse::<u64>().map_err(|_| Error::Config {
                line,
                message: format!("seed must be an unsigned integer, got `{raw}`"),
            })
        })? {
            run.seed = v;
        }

        Ok(RunConfig {
            model: ModelConfig {
                params,
                eos,
                equilibrium,
            },
            run,
        })
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Config {
        line,
        message: format!("`{key}` expects a real number, got `{raw}`"),
    })
}

fn parse_vec3(line: usize, raw: &str) -> Result<[f64; 3]> {
    let vals: Vec<f64> = raw
        .split_whitespace()
        .map(|t| parse_f64(line, "B_bar", t))
        .collect::<Result<_>>()?;
    <[f64; 3]>::try_from(vals).map_err(|v| Error::Config {
        line,
        message: format!("B_bar needs three reals, got {}", v.len()),
    })
}
