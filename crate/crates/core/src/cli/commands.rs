//! Subcommand implementations. Each returns a [`DiagnosticsReport`]; the
//! binary writes it and maps its overall status to the exit code.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;

use super::config::{experiment, ConfigError, Node, RunConfig};
use super::report::{num, CheckRecord, DiagnosticsReport, Status};
use crate::convolution::{flow_apply, forcing_for, Simulator};
use crate::diagnostics::{
    canonical_cf_refinement, cf_match, default_beta_grid, jump_sup_medians, mean_square_modulus,
    nonincreasing_within, second_moment_empirical, stochastic_continuity_probe, CfComparison, Estimate,
    DEFAULT_CF_TOLERANCE,
};
use crate::error::Error;
use crate::fubini::{verify_fubini, verify_integration_by_parts, Regularity, ResidualReport, TwoParameterIntegrand};
use crate::grid::TimeGrid;
use crate::noise::{levy_tail_mass, sample_increments, ComponentLaw, CylindricalNoiseSpec, IncrementTable, NoiseKind};
use crate::numerics::fit_line;
use crate::rng;
use crate::semigroup::{applicable_checks, Decision};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verifier {
    Fubini,
    Ibp,
    Cf,
    Moments,
    Flow,
    Continuity,
    Jumpsup,
}

impl Verifier {
    pub const ALL: [Verifier; 7] = [
        Verifier::Fubini,
        Verifier::Ibp,
        Verifier::Cf,
        Verifier::Moments,
        Verifier::Flow,
        Verifier::Continuity,
        Verifier::Jumpsup,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Verifier::Fubini => "fubini",
            Verifier::Ibp => "ibp",
            Verifier::Cf => "cf",
            Verifier::Moments => "moments",
            Verifier::Flow => "flow",
            Verifier::Continuity => "continuity",
            Verifier::Jumpsup => "jumpsup",
        }
    }
}

impl FromStr for Verifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Verifier::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown verifier `{s}` (expected one of fubini, ibp, cf, moments, flow, continuity, jumpsup)"))
    }
}

impl fmt::Display for Verifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    NotIntegrable(String),
    Runtime(Error),
    Io(std::io::Error),
}

impl CommandError {
    /// 64 for config errors, 1 for refused simulations, 70 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 64,
            CommandError::NotIntegrable(_) => 1,
            CommandError::Runtime(_) | CommandError::Io(_) => 70,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "{e}"),
            CommandError::NotIntegrable(s) => write!(f, "refusing to simulate a non-integrable configuration (use --force): {s}"),
            CommandError::Runtime(e) => write!(f, "{e}"),
            CommandError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotIntegrable(s) => CommandError::NotIntegrable(s),
            other => CommandError::Runtime(other),
        }
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e)
    }
}

pub type CommandResult<T> = Result<T, CommandError>;

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    pub force: bool,
}

/// Runs every applicable integrability checker.
pub fn cmd_check(config: &RunConfig) -> CommandResult<DiagnosticsReport> {
    let mut report = DiagnosticsReport::new("check", config.echo());
    let start = Instant::now();
    let verdicts = applicable_checks(&config.noise, &config.pair)?;
    let warning = config.pair.spectral_warning();
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    for (name, v) in verdicts {
        let status = Status::from_decision(v.decision);
        let mut note = format!("{}: {}", v.decision, v.detail);
        if let Some(w) = &warning {
            note.push_str(&format!(" (warning: {w})"));
        }
        report.push(CheckRecord::new(format!("integrability_{name}"), status, v.witness, 0.1).with_note(note));
    }
    report.time("check", start.elapsed());
    Ok(report)
}

/// Simulates one path on the configured grid and writes `path.csv`.
pub fn cmd_simulate(config: &RunConfig, options: Options) -> CommandResult<(DiagnosticsReport, Vec<u8>)> {
    let mut report = DiagnosticsReport::new("simulate", config.echo());
    let start = Instant::now();
    let sim = Simulator::new(config.noise.clone(), config.pair.clone())?.force(options.force);
    let grid = TimeGrid::uniform(config.pair.horizon(), config.steps)?;
    let (path, admission) = sim.run(&grid, &config.y0, config.seed, 0)?;
    let mut csv = Vec::new();
    path.write_csv(&mut csv)?;
    let finite = path.final_state().iter().all(|x| x.is_finite());
    let energy: f64 = path.final_state().iter().map(|x| x * x).sum();
    let status = match admission.decision {
        Decision::Integrable => Status::from_bool(finite),
        Decision::Inconclusive => Status::Inconclusive,
        Decision::NotIntegrable => Status::Fail,
    };
    report.push(CheckRecord::new("simulate_final_norm_sq", status, energy, f64::NAN).with_note(admission.to_string()));
    report.time("simulate", start.elapsed());
    Ok((report, csv))
}

pub fn cmd_verify(config: &RunConfig, which: Verifier) -> CommandResult<DiagnosticsReport> {
    let (value, path) = experiment(config, which.name());
    let node = Node::new(&value, &path);
    if !value.is_object() {
        return Err(node.error("expected an object").into());
    }
    let mut report = DiagnosticsReport::new(format!("verify {which}"), config.echo());
    let start = Instant::now();
    match which {
        Verifier::Cf => verify_cf(config, &node, &mut report)?,
        Verifier::Moments => verify_moments(config, &node, &mut report)?,
        Verifier::Flow => verify_flow(config, &node, &mut report)?,
        Verifier::Fubini => verify_fubini_cmd(config, &node, &mut report)?,
        Verifier::Ibp => verify_ibp(config, &node, &mut report)?,
        Verifier::Continuity => verify_continuity(config, &node, &mut report)?,
        Verifier::Jumpsup => verify_jumpsup(config, &node, &mut report)?,
    }
    report.time(which.name(), start.elapsed());
    Ok(report)
}

/// `check` followed by every verifier with an `experiment` block.
pub fn cmd_report(config: &RunConfig) -> CommandResult<DiagnosticsReport> {
    let mut report = cmd_check(config)?;
    report.command = "report".into();
    for v in Verifier::ALL {
        if config.experiments.contains_key(v.name()) {
            report.merge(cmd_verify(config, v)?);
        }
    }
    Ok(report)
}

fn test_vector(config: &RunConfig, node: &Node<'_>) -> CommandResult<Vec<f64>> {
    let v = node.f64_list_or("v", vec![1.0])?;
    if v.is_empty() || v.len() > config.n_modes {
        return Err(ConfigError {
            path: format!("{}.v", node.path()),
            message: format!("must have between 1 and {} entries", config.n_modes),
        }
        .into());
    }
    Ok(v)
}

fn beta_grid(node: &Node<'_>) -> CommandResult<Vec<f64>> {
    match node.get("beta") {
        None => Ok(default_beta_grid()),
        Some(Value::Array(_)) => Ok(node.f64_list("beta")?),
        Some(_) => {
            let path = format!("{}.beta", node.path());
            let b = Node::new(node.require("beta")?, &path);
            let lo = b.f64("min")?;
            let hi = b.f64("max")?;
            let n = b.usize_in("points", 2, 100_000)?;
            if !(hi > lo) {
                return Err(b.error("need max > min").into());
            }
            Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
        }
    }
}

fn time_within_horizon(config: &RunConfig, node: &Node<'_>, key: &str, default: f64) -> CommandResult<f64> {
    let t = node.positive_or(key, default)?;
    if t > config.pair.horizon() * (1.0 + 1e-12) {
        return Err(ConfigError {
            path: format!("{}.{key}", node.path()),
            message: format!("{t} exceeds the operator horizon {}", config.pair.horizon()),
        }
        .into());
    }
    Ok(t)
}

fn require_dyadic(steps: usize, levels: u32, path: &str) -> CommandResult<()> {
    if steps.is_multiple_of(1 << levels) {
        Ok(())
    } else {
        Err(ConfigError {
            path: path.into(),
            message: format!("must be divisible by 2^{levels} for refinement studies"),
        }
        .into())
    }
}

fn push_cf_rows(report: &mut DiagnosticsReport, mesh: f64, cf: &CfComparison<f64>) {
    let section = report.section("cf.csv", "mesh,beta,empirical_re,empirical_im,analytic_re,analytic_im");
    for ((b, e), a) in cf.beta_grid.iter().zip(&cf.empirical).zip(&cf.analytic) {
        section
            .rows
            .push(format!("{},{},{},{},{},{}", num(mesh), num(*b), num(e.re), num(e.im), num(a.re), num(a.im)));
    }
}

fn verify_cf(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let v = test_vector(config, node)?;
    let t = time_within_horizon(config, node, "t", config.pair.horizon())?;
    let m = node.usize_or("samples", 100_000, 2, 100_000_000)?;
    let steps = node.usize_or("steps", config.steps, 1, super::config::MAX_STEPS)?;
    let tol = node.positive_or("tolerance", DEFAULT_CF_TOLERANCE)?;
    let betas = beta_grid(node)?;
    let refine = node.bool_or("refinement", false)?;
    if refine {
        if !matches!(config.noise.kind(), NoiseKind::CanonicalStable { .. }) {
            return Err(node.error("refinement studies need canonical noise").into());
        }
        let levels = node.usize_or("levels", config.levels as usize, 1, 16)? as u32;
        require_dyadic(steps, levels, &format!("{}.steps", node.path()))?;
        let lo = node.positive_or("ratio_min", 1.4)?;
        let hi = node.positive_or("ratio_max", 2.6)?;
        let runs = canonical_cf_refinement(&v, t, &config.noise, &config.pair, m, &betas, config.seed, steps, levels)?;
        for (level, cf) in runs.iter().enumerate() {
            let n = steps >> (levels as usize - level);
            push_cf_rows(report, t / n as f64, cf);
            report.push(CheckRecord::new(format!("cf_distance_steps_{n}"), Status::Pass, cf.sup_distance, f64::NAN));
        }
        for (i, w) in runs.windows(2).enumerate() {
            let ratio = w[0].sup_distance / w[1].sup_distance;
            let n = steps >> (levels as usize - i - 1);
            report.push(
                CheckRecord::new(format!("cf_ratio_steps_{n}"), Status::from_bool((lo..=hi).contains(&ratio)), ratio, hi)
                    .with_note(format!("pass iff ratio in [{lo}, {hi}]")),
            );
        }
    } else {
        let cf = cf_match(&v, t, &config.noise, &config.pair, m, &betas, config.seed, steps, tol)?;
        push_cf_rows(report, t / steps as f64, &cf);
        report.push(CheckRecord::at_most("cf_sup_distance", cf.sup_distance, cf.threshold()));
    }
    Ok(())
}

fn verify_moments(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let ts = node.f64_list_or("t", vec![0.1, 1.0, 5.0].into_iter().filter(|&t| t <= config.pair.horizon()).collect())?;
    let m = node.usize_or("samples", 10_000, 2, 100_000_000)?;
    let steps = node.usize_or("steps", 1, 1, super::config::MAX_STEPS)?;
    let section_header = "t,analytic_drift,analytic_gaussian,analytic_jump,analytic_total,empirical,std_error";
    for (i, &t) in ts.iter().enumerate() {
        if !(t > 0.0 && t <= config.pair.horizon() * (1.0 + 1e-12)) {
            return Err(ConfigError {
                path: format!("{}.t[{i}]", node.path()),
                message: format!("must lie in (0, {}]", config.pair.horizon()),
            }
            .into());
        }
        let mc = second_moment_empirical(t, &config.noise, &config.pair, m, config.seed.wrapping_add(i as u64), steps)?;
        let a = mc.analytic;
        report.section("moments.csv", section_header).rows.push(format!(
            "{},{},{},{},{},{},{}",
            num(t),
            num(a.drift),
            num(a.gaussian),
            num(a.jump),
            num(a.total()),
            num(mc.empirical),
            num(mc.std_error)
        ));
        let z = if mc.std_error > 0.0 {
            (mc.empirical - a.total()).abs() / mc.std_error
        } else if mc.empirical == a.total() {
            0.0
        } else {
            f64::INFINITY
        };
        report.push(CheckRecord::at_most(format!("second_moment_t_{t}"), z, 3.0).with_note("statistic in standard errors"));
    }
    Ok(())
}

fn verify_flow(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let triples = node.usize_or("triples", 100, 1, 1_000_000)?;
    let tol = node.positive_or("tolerance", 1e-10)?;
    let grid = TimeGrid::uniform(config.pair.horizon(), config.steps)?;
    let forcing = forcing_for(&config.noise, &config.pair, &grid, config.seed, 0)?;
    let mut aux = rng::stream(config.seed, 0, rng::AUX_LANE);
    let n = grid.n_steps();
    let pts = grid.points();
    let mut worst = 0.0f64;
    let section = "r,s,t,max_error";
    let mut rows = Vec::with_capacity(triples);
    for _ in 0..triples {
        let mut idx = [aux.random_range(0..=n), aux.random_range(0..=n), aux.random_range(0..=n)];
        idx.sort_unstable();
        let (r, s, t) = (pts[idx[0]], pts[idx[1]], pts[idx[2]]);
        let v: Vec<f64> = (0..config.n_modes).map(|_| rng::standard_normal::<f64, _>(&mut aux)).collect();
        let composed = flow_apply(&config.pair, s, t, &flow_apply(&config.pair, r, s, &v, &forcing)?, &forcing)?;
        let direct = flow_apply(&config.pair, r, t, &v, &forcing)?;
        let err = composed
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        worst = worst.max(err);
        rows.push(format!("{},{},{},{}", num(r), num(s), num(t), num(err)));
    }
    report.section("flow.csv", section).rows.extend(rows);
    report.push(CheckRecord::at_most("flow_composition", worst, tol).with_note("max error relative to 1 + |Φ_{r,t}(v)|"));
    Ok(())
}

fn residual_rows(report: &mut DiagnosticsReport, r: &ResidualReport<f64>) {
    let mut buf = Vec::new();
    r.write_csv_rows(&mut buf).expect("writing to memory");
    let text = String::from_utf8(buf).expect("ascii output");
    report
        .section("residuals.csv", "check,mesh,residual")
        .rows
        .extend(text.lines().map(str::to_string));
}

/// Mean over seeds of per-level residuals.
fn mean_rows(reports: &[ResidualReport<f64>]) -> ResidualReport<f64> {
    let mut out = reports[0].clone();
    for (i, row) in out.rows.iter_mut().enumerate() {
        row.residual = reports.iter().map(|r| r.rows[i].residual).sum::<f64>() / reports.len() as f64;
    }
    out.check = format!("{}_mean", out.check);
    out
}

fn verify_fubini_cmd(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let family = node.str_or("integrand", "indicator")?;
    let points = node.f64_list_or("points", vec![0.25, 0.5, 0.75])?;
    let weights = node.f64_list_or("weights", vec![1.0; points.len()])?;
    let seeds = node.usize_or("seeds", 200, 1, 100_000)? as u64;
    let slack = node.positive_or("slack", 1.2)?;
    let m = config.n_modes.min(2);
    let g = match family {
        "indicator" => TwoParameterIntegrand::new(points, weights, m, Regularity::Regulated, |s, t| {
            vec![if t <= s { 1.0 } else { 0.0 }]
        }),
        "exp_decay" => TwoParameterIntegrand::new(points, weights, m, Regularity::Regulated, |s: f64, t: f64| {
            vec![(-s * t).exp()]
        }),
        "polynomial" => TwoParameterIntegrand::new(points, weights, m, Regularity::Simple, |s: f64, t: f64| {
            vec![1.0 + s * t, s - t * t]
        }),
        other => {
            return Err(ConfigError {
                path: format!("{}.integrand", node.path()),
                message: format!("unknown integrand `{other}` (expected indicator, exp_decay or polynomial)"),
            }
            .into())
        }
    }
    .map_err(|e| node.error(e.to_string()))?;
    let grid = TimeGrid::uniform(config.pair.horizon(), config.steps)?;
    let levels = config.levels;
    require_dyadic(config.steps, levels, "grid.steps")?;
    let spec = config.noise.truncated(m)?;
    let runs: Vec<ResidualReport<f64>> = (0..seeds)
        .map(|r| {
            let inc = sample_increments(&spec, &grid, m, config.seed, r)?;
            verify_fubini(&g, &inc, levels)
        })
        .collect::<Result<_, Error>>()?;
    match g.regularity() {
        Regularity::Simple => {
            let worst = runs.iter().map(|r| r.max_residual()).fold(0.0, f64::max);
            residual_rows(report, &runs[0]);
            report.push(CheckRecord::at_most("fubini_simple_relative_residual", worst, 1e-12));
        }
        Regularity::Regulated => {
            let mean = mean_rows(&runs);
            residual_rows(report, &mean);
            let worst = mean
                .rows
                .windows(2)
                .map(|w| w[1].residual / w[0].residual.max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            report.push(
                CheckRecord::at_most("fubini_regulated_refinement", worst, slack)
                    .with_note("largest ratio of successive mean residuals"),
            );
        }
    }
    Ok(())
}

fn verify_ibp(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let tau_name = node.str_or("tau", "sin")?;
    type Scalar = fn(f64) -> f64;
    let (tau, dtau): (Scalar, Scalar) = match tau_name {
        "constant" => (|_| 1.0, |_| 0.0),
        "linear" => (|t| t, |_| 1.0),
        "sin" => (f64::sin, f64::cos),
        other => {
            return Err(ConfigError {
                path: format!("{}.tau", node.path()),
                message: format!("unknown tau `{other}` (expected constant, linear or sin)"),
            }
            .into())
        }
    };
    let u = test_vector(config, node)?;
    let deterministic = node.bool_or("deterministic", false)?;
    let seeds = node.usize_or("seeds", 10, 1, 100_000)? as u64;
    let levels = config.levels;
    require_dyadic(config.steps, levels, "grid.steps")?;
    let grid = TimeGrid::uniform(config.pair.horizon(), config.steps)?;
    if deterministic {
        let values: Vec<f64> = (0..grid.n_steps())
            .flat_map(|j| {
                let dt = grid.dt(j);
                (0..u.len()).map(move |k| if k == 0 { dt } else { 0.0 })
            })
            .collect();
        let inc = IncrementTable::from_values(grid.clone(), u.len(), values, config.seed, 0)?;
        let r = verify_integration_by_parts(tau, dtau, &u, &inc, levels)?;
        residual_rows(report, &r);
        if tau_name == "constant" {
            report.push(CheckRecord::at_most("ibp_deterministic_residual", r.max_residual(), 1e-12));
        } else {
            let xs: Vec<f64> = r.rows.iter().map(|row| row.mesh.ln()).collect();
            let ys: Vec<f64> = r.rows.iter().map(|row| row.residual.ln()).collect();
            let slope = fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN);
            report.push(
                CheckRecord::new("ibp_deterministic_slope", Status::from_bool((slope - 1.0).abs() <= 0.2), slope, 0.2)
                    .with_note("pass iff |slope - 1| <= 0.2"),
            );
        }
    } else {
        let spec = config.noise.truncated(u.len())?;
        let mut decreasing = 0u64;
        for r in 0..seeds {
            let inc = sample_increments(&spec, &grid, u.len(), config.seed, r)?;
            let res = verify_integration_by_parts(tau, dtau, &u, &inc, levels)?;
            if r == 0 {
                residual_rows(report, &res);
            }
            let d = res.residuals();
            if d.windows(2).all(|w| w[1] < w[0]) {
                decreasing += 1;
            }
        }
        let need = (0.8 * seeds as f64).ceil();
        report.push(
            CheckRecord::new("ibp_refinement_seeds", Status::from_bool(decreasing as f64 >= need), decreasing as f64, need)
                .with_note("seeds whose residual decreased at every halving; pass iff at least the threshold"),
        );
    }
    Ok(())
}

fn monotone_record(name: &str, est: &[Estimate<f64>], k: f64) -> CheckRecord {
    let mut sorted = est.to_vec();
    sorted.sort_by(|a, b| b.epsilon.partial_cmp(&a.epsilon).unwrap());
    let worst = sorted
        .windows(2)
        .map(|w| {
            let band = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            let excess = w[1].mean - w[0].mean;
            if band > 0.0 {
                excess / band
            } else if excess > 0.0 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        })
        .fold(f64::NEG_INFINITY, f64::max);
    debug_assert_eq!(worst <= k, nonincreasing_within(est, k));
    CheckRecord::at_most(name, worst, k).with_note("largest increase as epsilon shrinks, in combined standard errors")
}

fn verify_continuity(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let horizon = config.pair.horizon();
    let t = time_within_horizon(config, node, "t", horizon / 2.0)?;
    let default_eps: Vec<f64> = (0..5).map(|i| (horizon - t) / 2f64.powi(i)).collect();
    let eps = node.f64_list_or("epsilons", default_eps)?;
    let m = node.usize_or("samples", 10_000, 2, 100_000_000)?;
    let mode = node.str_or("statistic", "probability")?;
    let est = match mode {
        "probability" => {
            let v = test_vector(config, node)?;
            let delta = node.positive_or("delta", 0.1)?;
            stochastic_continuity_probe(t, &eps, &v, delta, &config.noise, &config.pair, &config.y0, m, config.seed)?
        }
        "mean_square" => mean_square_modulus(t, &eps, &config.noise, &config.pair, &config.y0, m, config.seed)?,
        other => {
            return Err(ConfigError {
                path: format!("{}.statistic", node.path()),
                message: format!("unknown statistic `{other}` (expected probability or mean_square)"),
            }
            .into())
        }
    };
    let section = report.section("continuity.csv", "statistic,epsilon,mean,std_error");
    for e in &est {
        section.rows.push(format!("{mode},{},{},{}", num(e.epsilon), num(e.mean), num(e.std_error)));
    }
    report.push(monotone_record(&format!("continuity_{mode}_monotone"), &est, 2.0));
    if let Some(z) = est.iter().find(|e| e.epsilon == 0.0) {
        report.push(CheckRecord::at_most(format!("continuity_{mode}_at_zero"), z.mean, 0.0));
    }
    Ok(())
}

fn all_gaussian(spec: &CylindricalNoiseSpec<f64>) -> bool {
    spec.laws()
        .is_some_and(|laws| laws.iter().all(|l| matches!(l, ComponentLaw::Gaussian { .. })))
}

fn verify_jumpsup(config: &RunConfig, node: &Node<'_>, report: &mut DiagnosticsReport) -> CommandResult<()> {
    let ns: Vec<usize> = node
        .usize_list("ns")
        .or_else(|_| Ok::<_, ConfigError>(vec![4, 16, 64, 256]))?
        .into_iter()
        .filter(|&n| n >= 1 && n <= config.n_modes)
        .collect();
    if ns.len() < 2 {
        return Err(node.error(format!("need at least two mode counts ≤ {}", config.n_modes)).into());
    }
    let seeds = node.usize_or("seeds", 50, 1, 100_000)? as u64;
    let bound = node.positive_or("bounded_ratio", 1.2)?;
    let grid = TimeGrid::uniform(config.pair.horizon(), config.steps)?;
    let medians = jump_sup_medians(&config.noise, config.pair.b(), &ns, &grid, seeds)?;
    let section = report.section("jumpsup.csv", "n,median");
    for (n, m) in ns.iter().zip(&medians) {
        section.rows.push(format!("{n},{}", num(*m)));
    }
    let expect = node.str_or("expect", if all_gaussian(&config.noise) { "bounded" } else { "increasing" })?;
    match expect {
        "bounded" => {
            let ratio = medians[medians.len() - 1] / medians[0];
            report.push(CheckRecord::at_most("jumpsup_bounded_ratio", ratio, bound));
        }
        "increasing" => {
            let min_ratio = medians.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
            report.push(
                CheckRecord::new("jumpsup_strictly_increasing", Status::from_bool(min_ratio > 1.0), min_ratio, 1.0)
                    .with_note("smallest ratio of successive medians; pass iff above the threshold"),
            );
        }
        other => {
            return Err(ConfigError {
                path: format!("{}.expect", node.path()),
                message: format!("unknown expectation `{other}` (expected bounded or increasing)"),
            }
            .into())
        }
    }
    if let NoiseKind::CanonicalStable { alpha } = config.noise.kind() {
        let n = node.usize_or("tail_n", 1024, 1, 1 << 20)?;
        let spec = CylindricalNoiseSpec::canonical(*alpha, 2 * n)?;
        let ones = vec![1.0; 2 * n];
        let ratio = levy_tail_mass(&spec, &ones, 1.0, 2 * n)? / levy_tail_mass(&spec, &ones, 1.0, n)?;
        let target = 2f64.powf(alpha / 2.0);
        report.push(
            CheckRecord::at_most("tail_mass_growth", (ratio / target - 1.0).abs(), 0.05)
                .with_note(format!("ratio {ratio:.6} against 2^(alpha/2) = {target:.6}")),
        );
    }
    Ok(())
}
