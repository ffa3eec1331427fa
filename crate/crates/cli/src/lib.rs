//! Command-line front end: load a scenario, then solve, check convergence, or validate.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use sweeping::movingset::{reparametrize, retraction_profile, Scenario};
use sweeping::oracles::{oracle_sup_error, OracleScenario};
use sweeping::solver::{
    catching_up_pass, solve_bv, uniform_grid, variation, write_report_csv, write_trajectory_csv, BVSolution,
    CatchingUpConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_LEVEL: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Mean decay ratio above which `converge` reports FAIL.
pub const DECAY_THRESHOLD: f64 = 0.85;

pub const CONSTRAINT_TOL: f64 = 1e-7;
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-3;
pub const RESIDUAL_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Converge,
    Validate,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "sweep", about = "Sweeping-process solver for prox-regular moving sets")]
pub struct RunConfig {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, value_enum, default_value = "solve")]
    pub command: Command,
    #[arg(long, default_value_t = 6)]
    pub min_level: u32,
    #[arg(long, default_value_t = 12)]
    pub max_level: u32,
    /// Cauchy tolerance between consecutive levels.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Uniform output nodes on [0, T].
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
}

#[derive(Debug)]
pub enum CliError {
    Core(sweeping::Error),
    Io(PathBuf, io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Core(e) => write!(f, "{e}"),
            Self::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Usage(m) => f.write_str(m),
        }
    }
}

impl From<sweeping::Error> for CliError {
    fn from(e: sweeping::Error) -> Self {
        Self::Core(e)
    }
}

/// Result of a command: its exit code and the human-readable report.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: String,
}

impl RunConfig {
    fn solver_config(&self) -> CatchingUpConfig {
        CatchingUpConfig {
            min_level: self.min_level,
            max_level: self.max_level,
            cauchy_tol: self.tol,
            ..CatchingUpConfig::default()
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(&cfg.scenario).map_err(|e| CliError::Io(cfg.scenario.clone(), e))?;
    let scenario = Scenario::from_json(&text)?;
    if let Some(bad) = scenario.moving_set.check_admissibility().first_failure() {
        return Err(sweeping::Error::InadmissibleJump {
            time: bad.time,
            rho: bad.rho,
            r: bad.r,
        }
        .into());
    }
    if cfg.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    cfg.solver_config().validate(scenario.moving_set.r())?;
    match cfg.command {
        Command::Solve => run_solve(cfg, &scenario),
        Command::Converge => run_converge(cfg, &scenario),
        Command::Validate => run_validate(cfg, &scenario),
    }
}

fn solve(cfg: &RunConfig, scenario: &Scenario) -> Result<BVSolution, CliError> {
    let grid = uniform_grid(scenario.moving_set.horizon(), cfg.grid);
    Ok(solve_bv(
        &scenario.moving_set,
        &scenario.y0,
        &cfg.solver_config(),
        &grid,
    )?)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    fs::File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(path, e))
}

fn finish(mut w: BufWriter<fs::File>, path: PathBuf, res: io::Result<()>) -> Result<(), CliError> {
    res.and_then(|_| w.flush()).map_err(|e| CliError::Io(path, e))
}

pub fn run_solve(cfg: &RunConfig, scenario: &Scenario) -> Result<Outcome, CliError> {
    let sol = solve(cfg, scenario)?;
    let mut w = create(&cfg.out, "trajectory.csv")?;
    let res = write_trajectory_csv(&mut w, &sol);
    finish(w, cfg.out.join("trajectory.csv"), res)?;
    let mut w = create(&cfg.out, "report.csv")?;
    let res = write_report_csv(&mut w, &sol.report);
    finish(w, cfg.out.join("report.csv"), res)?;

    let r = &sol.report;
    let mut report = String::new();
    let last = r.sup_diffs.last().map_or("-".to_string(), |d| format!("{d:.3e}"));
    let _ = writeln!(
        report,
        "levels {}..{}, last sup_diff {last}, max violation {:.3e}, max residual {:.3e}",
        r.levels_run[0],
        r.levels_run[r.levels_run.len() - 1],
        r.constraint_max_violation,
        r.residual_max
    );
    let code = if r.converged {
        let _ = writeln!(report, "converged");
        EXIT_OK
    } else {
        let _ = writeln!(report, "max level reached without meeting tol {:e}", cfg.tol);
        EXIT_MAX_LEVEL
    };
    Ok(Outcome { code, report })
}

/// `(level, sup_diff, ratio)` rows; `sup_diff` compares `level + 1` with `level`.
pub fn decay_table(cfg: &RunConfig, scenario: &Scenario) -> Result<Vec<(u32, f64, Option<f64>)>, CliError> {
    if cfg.max_level < cfg.min_level + 2 {
        return Err(CliError::Usage("converge needs --max-level >= --min-level + 2".into()));
    }
    let ms = &scenario.moving_set;
    let profile = retraction_profile(ms, CatchingUpConfig::default().profile_grid)?;
    let family = reparametrize(ms, &profile)?;
    let horizon = profile.total();
    let mut rows = Vec::new();
    let mut prev = catching_up_pass(&family, &scenario.y0, cfg.min_level, horizon)?;
    let mut last: Option<f64> = None;
    for n in cfg.min_level..cfg.max_level {
        let next = catching_up_pass(&family, &scenario.y0, n + 1, horizon)?;
        let d = next.sup_diff(&prev)?;
        let ratio = last.map(|l| if d == 0.0 { 0.0 } else { d / l });
        rows.push((n, d, ratio));
        last = Some(d);
        prev = next;
    }
    Ok(rows)
}

pub fn run_converge(cfg: &RunConfig, scenario: &Scenario) -> Result<Outcome, CliError> {
    let rows = decay_table(cfg, scenario)?;
    let path = cfg.out.join("converge.csv");
    let mut w = create(&cfg.out, "converge.csv")?;
    let res = (|| {
        writeln!(w, "level,sup_diff,ratio")?;
        for (n, d, ratio) in &rows {
            match ratio {
                Some(q) => writeln!(w, "{n},{d:.16e},{q:.16e}")?,
                None => writeln!(w, "{n},{d:.16e},")?,
            }
        }
        Ok(())
    })();
    finish(w, path, res)?;

    let mut report = String::from("   n      sup_diff     ratio\n");
    for (n, d, ratio) in &rows {
        let q = ratio.map_or("-".to_string(), |q| format!("{q:.4}"));
        let _ = writeln!(report, "{n:>4}  {d:>12.4e}  {q:>8}");
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.2).collect();
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let pass = mean <= DECAY_THRESHOLD;
    let _ = writeln!(
        report,
        "{} mean ratio over the last {} levels = {mean:.4} (threshold {DECAY_THRESHOLD})",
        if pass { "PASS" } else { "FAIL" },
        tail.len()
    );
    Ok(Outcome {
        code: if pass { EXIT_OK } else { EXIT_CHECK_FAILED },
        report,
    })
}

/// One validation check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

/// Constraint and residual checks run at the nodes of the finest level; the variation,
/// Lipschitz, and oracle checks on the output grid.
pub fn validation_checks(cfg: &RunConfig, scenario: &Scenario) -> Result<Vec<Check>, CliError> {
    let grid = uniform_grid(scenario.moving_set.horizon(), cfg.grid);
    let solver = CatchingUpConfig {
        residual_samples: RESIDUAL_SAMPLES,
        ..cfg.solver_config()
    };
    let sol = solve_bv(&scenario.moving_set, &scenario.y0, &solver, &grid)?;
    let ms = &scenario.moving_set;
    let mut checks = vec![
        Check {
            name: "constraint",
            value: sol.report.constraint_max_violation,
            bound: CONSTRAINT_TOL,
        },
        Check {
            name: "normal-cone residual",
            value: sol.report.residual_max,
            bound: RESIDUAL_TOL,
        },
        Check {
            name: "variation",
            value: variation(&sol.values),
            bound: sol.profile.total() + BOUND_TOL,
        },
    ];
    // Jump rows share a time and are skipped; every other pair lies in a continuous stretch.
    let lip = sol
        .times
        .windows(2)
        .zip(sol.values.windows(2))
        .filter(|(t, _)| t[1] > t[0])
        .map(|(t, y)| y[1].dist(&y[0]) / (t[1] - t[0]))
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "lipschitz",
        value: lip,
        bound: ms.max_lip_excess() + BOUND_TOL,
    });
    if scenario.oracle.is_some() {
        let os = OracleScenario::from_scenario(scenario.clone())?;
        let level = cfg.max_level;
        checks.push(Check {
            name: "oracle sup error",
            value: oracle_sup_error(&os, level, cfg.grid)?,
            bound: os.oracle.tolerance(level),
        });
    }
    Ok(checks)
}

pub fn run_validate(cfg: &RunConfig, scenario: &Scenario) -> Result<Outcome, CliError> {
    let checks = validation_checks(cfg, scenario)?;
    let mut report = String::new();
    for c in &checks {
        let _ = writeln!(
            report,
            "{} {}: {:.3e} (bound {:.3e})",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound
        );
    }
    let code = if checks.iter().all(Check::pass) {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    Ok(Outcome { code, report })
}
