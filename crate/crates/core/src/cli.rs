//! Command layer behind the `cloudgame` binary: scenario files, result
//! tables and the five commands.
//!
//! Every command renders its output into a `String` first, so the same
//! inputs always produce the same bytes, and tests can drive the commands
//! without spawning a process.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::SolveError;
use crate::game1::{sensitivity_report, solve_game1_with};
use crate::game23::{solve_game2, solve_game3};
use crate::market_model::{
    response_time, CrossEffects, EquilibriumResult, Game, MarketScenario, MeasureMode, ModelError,
    ProviderParams, QosAttraction, SelectionRule, StrategyProfile, Uniqueness,
};
use crate::numerics::{Matrix, ToleranceConfig};
use crate::verifier::{verify_nash, Grid, Resolution};

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFY_FAILED: u8 = 1;
    pub const MULTIPLE: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
    pub const NON_CONVERGENCE: u8 = 4;
    pub const USAGE: u8 = 64;
    pub const VALIDATION: u8 = 65;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid scenario:\n{0}")]
    Validation(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Solve(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => exit::USAGE,
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Solve(e) => solve_exit_code(e),
        }
    }
}

fn solve_exit_code(e: &SolveError) -> u8 {
    match e {
        SolveError::Model(ModelError::DimensionMismatch { .. }) => exit::USAGE,
        SolveError::Model(ModelError::NegativeDemand { .. }) => exit::INFEASIBLE,
        SolveError::Model(_) => exit::VALIDATION,
        SolveError::BoundInfeasible { .. } | SolveError::DemandInfeasible { .. } => exit::INFEASIBLE,
        SolveError::IncomparableEquilibria { .. } => exit::MULTIPLE,
        SolveError::Numerics(_)
        | SolveError::ExternalityOutOfRange { .. }
        | SolveError::NonConvergence { .. }
        | SolveError::UnknownMultiplicity { .. } => exit::NON_CONVERGENCE,
    }
}

// ---------------------------------------------------------------------------
// Scenario files

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub market: MarketSection,
    pub providers: Vec<ProviderEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross: Option<CrossSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketSection {
    pub rt_bar: f64,
    #[serde(default)]
    pub measure: MeasureSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MeasureSection {
    #[default]
    Expected,
    Percentile { phi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderEntry {
    pub id: usize,
    pub cost_per_request: f64,
    pub cost_per_capacity: f64,
    pub own_price_sensitivity: f64,
    pub qos_base: f64,
    pub qos_log_coeff: f64,
    pub price_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSection {
    pub beta: Vec<Vec<f64>>,
    pub gamma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_rate: Option<Vec<Vec<f64>>>,
}

/// Parsed scenario file plus any keys the parser skipped.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: MarketScenario,
    pub tolerances: ToleranceConfig,
    pub ignored_keys: Vec<String>,
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<Matrix, CliError> {
    if rows.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    Matrix::from_rows(rows).ok_or_else(|| CliError::Validation(format!("  - {name}: rows have different lengths")))
}

impl ScenarioFile {
    pub fn from_json(text: &str, strict: bool) -> Result<(Self, Vec<String>), String> {
        let mut ignored = Vec::new();
        let mut de = serde_json::Deserializer::from_str(text);
        let file: ScenarioFile = serde_ignored::deserialize(&mut de, |path| ignored.push(path.to_string()))
            .map_err(|e| e.to_string())?;
        de.end().map_err(|e| e.to_string())?;
        if strict && !ignored.is_empty() {
            return Err(format!("unknown field(s) in strict mode: {}", ignored.join(", ")));
        }
        if file.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                file.schema_version
            ));
        }
        Ok((file, ignored))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files always serialize")
    }

    pub fn from_scenario(scenario: &MarketScenario, tolerances: Option<ToleranceConfig>) -> Self {
        let measure = match scenario.measure {
            MeasureMode::ExpectedValue => MeasureSection::Expected,
            MeasureMode::Percentile(phi) => MeasureSection::Percentile { phi },
        };
        let providers = scenario
            .providers
            .iter()
            .map(|p| ProviderEntry {
                id: p.id,
                cost_per_request: p.cost_per_request,
                cost_per_capacity: p.cost_per_capacity,
                own_price_sensitivity: p.own_price_sensitivity,
                qos_base: p.qos_attraction.base,
                qos_log_coeff: p.qos_attraction.log_coeff,
                price_max: p.price_max,
            })
            .collect();
        let cross = &scenario.cross;
        Self {
            schema_version: SCHEMA_VERSION,
            market: MarketSection {
                rt_bar: scenario.rt_bar,
                measure,
            },
            providers,
            cross: Some(CrossSection {
                beta: cross.beta.to_rows(),
                gamma: cross.gamma.to_rows(),
                gamma_rate: Some(cross.gamma_rate.to_rows()),
            }),
            tolerances,
        }
    }

    /// Builds and validates the scenario; validation failures list every
    /// offending field.
    pub fn into_scenario(self) -> Result<(MarketScenario, ToleranceConfig), CliError> {
        let n = self.providers.len();
        let providers = self
            .providers
            .iter()
            .map(|p| {
                ProviderParams::new(
                    p.id,
                    p.cost_per_request,
                    p.cost_per_capacity,
                    p.own_price_sensitivity,
                    QosAttraction::new(p.qos_base, p.qos_log_coeff),
                    p.price_max,
                )
            })
            .collect();
        let cross = match &self.cross {
            None => CrossEffects::none(n),
            Some(c) => {
                let mut cross = CrossEffects::new(matrix("cross.beta", &c.beta)?, matrix("cross.gamma", &c.gamma)?);
                if let Some(rate) = &c.gamma_rate {
                    cross = cross.with_gamma_rate(matrix("cross.gamma_rate", rate)?);
                }
                cross
            }
        };
        let measure = match self.market.measure {
            MeasureSection::Expected => MeasureMode::ExpectedValue,
            MeasureSection::Percentile { phi } => MeasureMode::Percentile(phi),
        };
        let scenario = MarketScenario::new(providers, cross, self.market.rt_bar, measure);
        let tolerances = self.tolerances.unwrap_or_default();

        let mut problems: Vec<String> = scenario.validate().violations.iter().map(|v| format!("  - {v}")).collect();
        problems.extend(tolerances.problems().into_iter().map(|p| format!("  - {p}")));
        if !problems.is_empty() {
            return Err(CliError::Validation(problems.join("\n")));
        }
        Ok((scenario, tolerances))
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: &Path, strict: bool) -> Result<LoadedScenario, CliError> {
    let text = read_file(path)?;
    let (file, ignored_keys) = ScenarioFile::from_json(&text, strict).map_err(|message| CliError::Parse {
        path: path.display().to_string(),
        message,
    })?;
    let (scenario, tolerances) = file.into_scenario()?;
    Ok(LoadedScenario {
        scenario,
        tolerances,
        ignored_keys,
    })
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Number formatting and result tables

/// Twelve significant digits, shortest form, no negative zero.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if (1e-4..1e15).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn parse_uniqueness(s: &str) -> Option<Uniqueness> {
    match s {
        "unique" => Some(Uniqueness::Unique),
        "multiple" => Some(Uniqueness::Multiple),
        "unknown" => Some(Uniqueness::Unknown),
        _ => None,
    }
}

fn parse_selection_rule(s: &str) -> Option<SelectionRule> {
    match s {
        "none" => Some(SelectionRule::None),
        "componentwise-largest" => Some(SelectionRule::ComponentwiseLargest),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub provider: usize,
    pub price: f64,
    pub qos: f64,
    pub demand: f64,
    pub capacity: f64,
    pub profit: f64,
    pub price_foc_residual: f64,
    pub qos_foc_residual: f64,
}

/// Solver output as written by `solve` and read back by `verify` and
/// `provision`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub game: Game,
    pub uniqueness: Uniqueness,
    pub iterations: usize,
    pub converged: bool,
    pub selected_rule: SelectionRule,
    pub rows: Vec<ResultRow>,
}

pub const RESULT_HEADER: [&str; 8] = [
    "provider",
    "price",
    "qos",
    "demand",
    "capacity",
    "profit",
    "price_foc_residual",
    "qos_foc_residual",
];

impl ResultTable {
    pub fn from_result(scenario: &MarketScenario, eq: &EquilibriumResult) -> Self {
        let rows = (0..scenario.n())
            .map(|i| ResultRow {
                provider: scenario.providers[i].id,
                price: eq.profile.prices[i],
                qos: eq.profile.qos[i],
                demand: eq.demands[i],
                capacity: eq.capacities[i],
                profit: eq.profits[i],
                price_foc_residual: eq.foc_residuals[i].price,
                qos_foc_residual: eq.foc_residuals[i].qos,
            })
            .collect();
        Self {
            game: eq.meta.game,
            uniqueness: eq.meta.uniqueness,
            iterations: eq.meta.iterations,
            converged: eq.meta.converged,
            selected_rule: eq.meta.selected_rule,
            rows,
        }
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::new(
            self.rows.iter().map(|r| r.price).collect(),
            self.rows.iter().map(|r| r.qos).collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# game={},uniqueness={},iterations={},converged={},selected_rule={}\n",
            self.game.id(),
            self.uniqueness,
            self.iterations,
            self.converged,
            self.selected_rule
        );
        out.push_str(&RESULT_HEADER.join(","));
        out.push('\n');
        for r in &self.rows {
            let fields = [
                r.price,
                r.qos,
                r.demand,
                r.capacity,
                r.profit,
                r.price_foc_residual,
                r.qos_foc_residual,
            ];
            out.push_str(&r.provider.to_string());
            for v in fields {
                out.push(',');
                out.push_str(&format_number(v));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let (meta_line, body) = text.split_once('\n').ok_or("empty result table")?;
        let meta = meta_line.strip_prefix('#').ok_or("missing '#' metadata line")?;
        let mut game = None;
        let mut uniqueness = None;
        let mut iterations = None;
        let mut converged = None;
        let mut selected_rule = None;
        for pair in meta.trim().split(',') {
            let (key, value) = pair.split_once('=').ok_or_else(|| format!("bad metadata entry '{pair}'"))?;
            let bad = || format!("bad value '{value}' for '{key}'");
            match key {
                "game" => game = Some(value.parse().ok().and_then(Game::from_id).ok_or_else(bad)?),
                "uniqueness" => uniqueness = Some(parse_uniqueness(value).ok_or_else(bad)?),
                "iterations" => iterations = Some(value.parse().map_err(|_| bad())?),
                "converged" => converged = Some(value.parse().map_err(|_| bad())?),
                "selected_rule" => selected_rule = Some(parse_selection_rule(value).ok_or_else(bad)?),
                _ => return Err(format!("unknown metadata key '{key}'")),
            }
        }

        let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let header = reader.headers().map_err(|e| e.to_string())?;
        if header.iter().ne(RESULT_HEADER) {
            return Err(format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(",")));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| e.to_string())?;
            let num = |k: usize| -> Result<f64, String> {
                let v: f64 = record[k]
                    .parse()
                    .map_err(|_| format!("column {}: bad number '{}'", RESULT_HEADER[k], &record[k]))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(format!("column {}: non-finite value", RESULT_HEADER[k]))
                }
            };
            rows.push(ResultRow {
                provider: record[0].parse().map_err(|_| format!("bad provider id '{}'", &record[0]))?,
                price: num(1)?,
                qos: num(2)?,
                demand: num(3)?,
                capacity: num(4)?,
                profit: num(5)?,
                price_foc_residual: num(6)?,
                qos_foc_residual: num(7)?,
            });
        }
        Ok(Self {
            game: game.ok_or("metadata lacks 'game'")?,
            uniqueness: uniqueness.ok_or("metadata lacks 'uniqueness'")?,
            iterations: iterations.ok_or("metadata lacks 'iterations'")?,
            converged: converged.ok_or("metadata lacks 'converged'")?,
            selected_rule: selected_rule.unwrap_or(SelectionRule::None),
            rows,
        })
    }

    /// Provider ids must match the scenario in order.
    fn check_against(&self, scenario: &MarketScenario) -> Result<(), String> {
        let ids: Vec<usize> = self.rows.iter().map(|r| r.provider).collect();
        let expected: Vec<usize> = scenario.providers.iter().map(|p| p.id).collect();
        if ids != expected {
            return Err(format!("provider ids {ids:?} do not match the scenario's {expected:?}"));
        }
        Ok(())
    }
}

fn load_result(path: &Path, scenario: &MarketScenario) -> Result<ResultTable, CliError> {
    let text = read_file(path)?;
    let parse_err = |message| CliError::Parse {
        path: path.display().to_string(),
        message,
    };
    let table = ResultTable::parse(&text).map_err(parse_err)?;
    table.check_against(scenario).map_err(parse_err)?;
    Ok(table)
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(name = "cloudgame", version, about = "Nash equilibria of cloud price/QoS competition")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalOpts {
    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tatonnement fixed-point tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Switch to the φ-percentile response-time measure.
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    /// Verifier price spacing (applies when the price axis is scanned).
    #[arg(long = "grid-price-step", visible_alias = "price-step", global = true)]
    pub grid_price_step: Option<f64>,
    /// Verifier QoS spacing (applies when the QoS axis is scanned).
    #[arg(long = "grid-qos-step", visible_alias = "qos-step", global = true)]
    pub grid_qos_step: Option<f64>,
    /// Reject unknown keys in the scenario file.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve Game 1 (prices, fixed QoS), 2 (prices and QoS) or 3 (QoS, fixed prices).
    Solve(SolveArgs),
    /// Grid-search every provider's unilateral deviations from a profile.
    Verify(VerifyArgs),
    /// Externality degrees and QoS sensitivities of the Game 1 equilibrium.
    Sensitivity(SensitivityArgs),
    /// Re-solve a game along a grid of one parameter.
    Sweep(SweepArgs),
    /// Capacity needed at a solved profile.
    Provision(ProvisionArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Vectors {
    /// QoS levels, one per provider (Game 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub qos: Option<Vec<f64>>,
    /// Prices, one per provider (Game 3).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub prices: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub scenario: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub game: u8,
    #[command(flatten)]
    pub vectors: Vectors,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub scenario: PathBuf,
    /// Result table written by `solve`.
    #[arg(long, conflicts_with_all = ["qos", "prices"])]
    pub result: Option<PathBuf>,
    #[command(flatten)]
    pub vectors: Vectors,
    /// Game whose strategy space is scanned for an inline profile
    /// (default 2: prices and QoS).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub game: Option<u8>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    pub scenario: PathBuf,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub qos: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub scenario: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub game: u8,
    /// Parameter path, e.g. providers[0].cost_per_request, cross.beta[0][1],
    /// market.rt_bar, qos[1], prices[0].
    #[arg(long)]
    pub axis: String,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    /// Number of grid values, both ends included.
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub vectors: Vectors,
}

#[derive(Debug, Args)]
pub struct ProvisionArgs {
    pub scenario: PathBuf,
    #[arg(long, conflicts_with = "game")]
    pub result: Option<PathBuf>,
    /// Solve this game first instead of reading a result table.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub game: Option<u8>,
    #[command(flatten)]
    pub vectors: Vectors,
}

/// Rendered command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub code: u8,
    /// Lines for standard error.
    pub diagnostics: Vec<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            output,
            code: exit::OK,
            diagnostics: Vec::new(),
        }
    }
}

/// Scenario and settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Context {
    pub scenario: MarketScenario,
    pub tolerances: ToleranceConfig,
    pub global: GlobalOpts,
    pub diagnostics: Vec<String>,
}

impl Context {
    pub fn load(path: &Path, global: &GlobalOpts) -> Result<Self, CliError> {
        let loaded = load_scenario(path, global.strict)?;
        let mut diagnostics: Vec<String> = loaded
            .ignored_keys
            .iter()
            .map(|k| format!("warning: ignoring unknown key '{k}'"))
            .collect();
        let mut scenario = loaded.scenario;
        let mut tolerances = loaded.tolerances;
        if let Some(phi) = global.phi {
            scenario = scenario.with_measure(MeasureMode::Percentile(phi));
        }
        if let Some(t) = global.tol {
            tolerances.fixpoint_tol = t;
        }
        if let Some(m) = global.max_iter {
            tolerances.max_iter = m;
        }
        let mut problems: Vec<String> = scenario.validate().violations.iter().map(|v| format!("  - {v}")).collect();
        problems.extend(tolerances.problems().into_iter().map(|p| format!("  - {p}")));
        for (flag, step) in [("--grid-price-step", global.grid_price_step), ("--grid-qos-step", global.grid_qos_step)] {
            if let Some(h) = step {
                if !(h.is_finite() && h > 0.0) {
                    problems.push(format!("  - {flag} must be finite and > 0, got {h}"));
                }
            }
        }
        if !problems.is_empty() {
            return Err(CliError::Validation(problems.join("\n")));
        }
        if global.tol.is_some() || global.max_iter.is_some() {
            diagnostics.push(format!(
                "note: fixpoint_tol = {}, max_iter = {}",
                tolerances.fixpoint_tol, tolerances.max_iter
            ));
        }
        Ok(Self {
            scenario,
            tolerances,
            global: global.clone(),
            diagnostics,
        })
    }

    /// Deviation grid for verifying a profile of `game`: only the axes that
    /// game lets providers move are scanned.
    pub fn grid(&self, game: Game) -> Grid {
        let mut grid = match game {
            Game::Price => Grid::price_only(),
            Game::PriceQos => Grid::default(),
            Game::Qos => Grid::qos_only(),
        };
        if let (Some(h), Some(_)) = (self.global.grid_price_step, grid.price) {
            grid.price = Some(Resolution::Step(h));
        }
        if let (Some(h), Some(_)) = (self.global.grid_qos_step, grid.qos) {
            grid.qos = Some(Resolution::Step(h));
        }
        grid
    }
}

fn require<'a>(v: &'a Option<Vec<f64>>, flag: &str, game: u8) -> Result<&'a [f64], CliError> {
    v.as_deref()
        .ok_or_else(|| CliError::Usage(format!("game {game} needs --{flag} with one value per provider")))
}

fn solve_game(
    scenario: &MarketScenario,
    tol: &ToleranceConfig,
    game: u8,
    vectors: &Vectors,
) -> Result<EquilibriumResult, CliError> {
    Ok(match game {
        1 => solve_game1_with(scenario, require(&vectors.qos, "qos", 1)?, tol)?,
        2 => solve_game2(scenario, tol)?,
        3 => solve_game3(scenario, require(&vectors.prices, "prices", 3)?)?,
        _ => unreachable!("clap restricts --game to 1..=3"),
    })
}

pub fn cmd_solve(ctx: &Context, args: &SolveArgs) -> Result<Outcome, CliError> {
    let eq = solve_game(&ctx.scenario, &ctx.tolerances, args.game, &args.vectors)?;
    let mut outcome = Outcome::ok(ResultTable::from_result(&ctx.scenario, &eq).to_csv());
    outcome.diagnostics = eq.meta.warnings.iter().map(|w| format!("warning: {w}")).collect();
    if eq.meta.uniqueness == Uniqueness::Multiple {
        outcome.code = exit::MULTIPLE;
        outcome
            .diagnostics
            .push(format!("multiple equilibria; reporting the {} one", eq.meta.selected_rule));
    }
    Ok(outcome)
}

pub fn cmd_verify(ctx: &Context, args: &VerifyArgs) -> Result<Outcome, CliError> {
    let (profile, game) = match &args.result {
        Some(path) => {
            let table = load_result(path, &ctx.scenario)?;
            (table.profile(), table.game)
        }
        None => {
            let (Some(prices), Some(qos)) = (&args.vectors.prices, &args.vectors.qos) else {
                return Err(CliError::Usage("verify needs --result, or both --prices and --qos".into()));
            };
            let game = Game::from_id(args.game.unwrap_or(2)).expect("clap restricts --game to 1..=3");
            (StrategyProfile::new(prices.clone(), qos.clone()), game)
        }
    };
    profile.check(&ctx.scenario)?;
    let cert = verify_nash(&ctx.scenario, &profile, &ctx.grid(game))?;

    let ok = cert.within_bound();
    let mut out = format!(
        "# epsilon={},bound={},within_bound={},price_step={},qos_step={}\n",
        format_number(cert.epsilon),
        format_number(cert.bound()),
        ok,
        format_number(cert.grid_resolution.price_step),
        format_number(cert.grid_resolution.qos_step),
    );
    out.push_str("provider,price,qos,best_price,best_qos,gain,bound,within_bound\n");
    for (i, scan) in cert.per_provider.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            ctx.scenario.providers[i].id,
            format_number(profile.prices[i]),
            format_number(profile.qos[i]),
            format_number(scan.best_price),
            format_number(scan.best_qos),
            format_number(scan.gain),
            format_number(scan.bound),
            scan.within_bound()
        );
    }
    let mut outcome = Outcome::ok(out);
    if !ok {
        outcome.code = exit::VERIFY_FAILED;
        outcome.diagnostics.push(format!(
            "not an equilibrium: epsilon {} exceeds the grid bound",
            format_number(cert.epsilon)
        ));
    }
    Ok(outcome)
}

fn optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn cmd_sensitivity(ctx: &Context, args: &SensitivityArgs) -> Result<Outcome, CliError> {
    let report = sensitivity_report(&ctx.scenario, &args.qos)?;
    let ids: Vec<String> = ctx.scenario.providers.iter().map(|p| p.id.to_string()).collect();
    let matrix_header = format!(
        "provider,{}",
        ids.iter().map(|id| format!("s_{id}")).collect::<Vec<_>>().join(",")
    );

    let mut out = String::from("# delta\nprovider,delta\n");
    for (id, d) in ids.iter().zip(&report.delta) {
        let _ = writeln!(out, "{id},{}", format_number(*d));
    }
    for (label, m) in [("price_qos", &report.price_qos), ("profit_qos", &report.profit_qos)] {
        let _ = write!(out, "\n# {label}\n{matrix_header}\n");
        for (i, id) in ids.iter().enumerate() {
            let row: Vec<String> = m.row(i).iter().map(|&v| format_number(v)).collect();
            let _ = writeln!(out, "{id},{}", row.join(","));
        }
    }
    let _ = write!(out, "\n# critical_qos\n{matrix_header}\n");
    for (id, row) in ids.iter().zip(&report.critical_qos) {
        let row: Vec<String> = row.iter().map(|&v| optional(v)).collect();
        let _ = writeln!(out, "{id},{}", row.join(","));
    }
    Ok(Outcome::ok(out))
}

/// A scalar the `sweep` command can vary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisPath {
    Provider { index: usize, field: ProviderField },
    RtBar,
    Phi,
    Cross { which: CrossField, i: usize, j: usize },
    Qos(usize),
    Price(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderField {
    CostPerRequest,
    CostPerCapacity,
    OwnPriceSensitivity,
    QosBase,
    QosLogCoeff,
    PriceMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossField {
    Beta,
    Gamma,
    GammaRate,
}

fn parse_index(s: &str) -> Option<(usize, &str)> {
    let rest = s.strip_prefix('[')?;
    let (idx, rest) = rest.split_once(']')?;
    Some((idx.parse().ok()?, rest))
}

impl AxisPath {
    /// Parses `path` and checks its indices against an `n`-provider market.
    pub fn parse(path: &str, n: usize) -> Result<Self, String> {
        let unknown = || format!("unknown axis '{path}'");
        let in_range = |i: usize| if i < n { Ok(i) } else { Err(format!("axis '{path}': index {i} out of range for {n} providers")) };
        let axis = if let Some(rest) = path.strip_prefix("providers") {
            let (index, rest) = parse_index(rest).ok_or_else(unknown)?;
            let field = match rest.strip_prefix('.').ok_or_else(unknown)? {
                "cost_per_request" => ProviderField::CostPerRequest,
                "cost_per_capacity" => ProviderField::CostPerCapacity,
                "own_price_sensitivity" => ProviderField::OwnPriceSensitivity,
                "qos_base" => ProviderField::QosBase,
                "qos_log_coeff" => ProviderField::QosLogCoeff,
                "price_max" => ProviderField::PriceMax,
                _ => return Err(unknown()),
            };
            AxisPath::Provider {
                index: in_range(index)?,
                field,
            }
        } else if let Some(rest) = path.strip_prefix("cross.") {
            let (which, rest) = if let Some(r) = rest.strip_prefix("beta") {
                (CrossField::Beta, r)
            } else if let Some(r) = rest.strip_prefix("gamma_rate") {
                (CrossField::GammaRate, r)
            } else if let Some(r) = rest.strip_prefix("gamma") {
                (CrossField::Gamma, r)
            } else {
                return Err(unknown());
            };
            let (i, rest) = parse_index(rest).ok_or_else(unknown)?;
            let (j, rest) = parse_index(rest).ok_or_else(unknown)?;
            if !rest.is_empty() {
                return Err(unknown());
            }
            AxisPath::Cross {
                which,
                i: in_range(i)?,
                j: in_range(j)?,
            }
        } else if let Some(rest) = path.strip_prefix("qos") {
            match parse_index(rest) {
                Some((i, "")) => AxisPath::Qos(in_range(i)?),
                _ => return Err(unknown()),
            }
        } else if let Some(rest) = path.strip_prefix("prices") {
            match parse_index(rest) {
                Some((i, "")) => AxisPath::Price(in_range(i)?),
                _ => return Err(unknown()),
            }
        } else {
            match path {
                "market.rt_bar" => AxisPath::RtBar,
                "market.phi" => AxisPath::Phi,
                _ => return Err(unknown()),
            }
        };
        Ok(axis)
    }

    fn apply(self, scenario: &mut MarketScenario, vectors: &mut Vectors, value: f64) {
        match self {
            AxisPath::Provider { index, field } => {
                let p = &mut scenario.providers[index];
                match field {
                    ProviderField::CostPerRequest => p.cost_per_request = value,
                    ProviderField::CostPerCapacity => p.cost_per_capacity = value,
                    ProviderField::OwnPriceSensitivity => p.own_price_sensitivity = value,
                    ProviderField::QosBase => p.qos_attraction.base = value,
                    ProviderField::QosLogCoeff => p.qos_attraction.log_coeff = value,
                    ProviderField::PriceMax => p.price_max = value,
                }
            }
            AxisPath::RtBar => scenario.rt_bar = value,
            AxisPath::Phi => scenario.measure = MeasureMode::Percentile(value),
            AxisPath::Cross { which, i, j } => {
                let m = match which {
                    CrossField::Beta => &mut scenario.cross.beta,
                    CrossField::Gamma => &mut scenario.cross.gamma,
                    CrossField::GammaRate => &mut scenario.cross.gamma_rate,
                };
                m[(i, j)] = value;
            }
            AxisPath::Qos(i) => {
                if let Some(q) = vectors.qos.as_mut() {
                    q[i] = value;
                }
            }
            AxisPath::Price(i) => {
                if let Some(p) = vectors.prices.as_mut() {
                    p[i] = value;
                }
            }
        }
    }
}

fn status_of(e: &CliError) -> &'static str {
    match e.exit_code() {
        exit::MULTIPLE => "incomparable",
        exit::INFEASIBLE => "infeasible",
        exit::NON_CONVERGENCE => "nonconvergent",
        _ => "invalid",
    }
}

pub fn cmd_sweep(ctx: &Context, args: &SweepArgs) -> Result<Outcome, CliError> {
    let n = ctx.scenario.n();
    let axis = AxisPath::parse(&args.axis, n).map_err(CliError::Usage)?;
    match (axis, args.game) {
        (AxisPath::Qos(_), g) if g != 1 => return Err(CliError::Usage("a qos[i] axis needs --game 1".into())),
        (AxisPath::Price(_), g) if g != 3 => return Err(CliError::Usage("a prices[i] axis needs --game 3".into())),
        _ => {}
    }
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    // fail fast on a missing vector rather than once per row
    match args.game {
        1 => {
            require(&args.vectors.qos, "qos", 1)?;
        }
        3 => {
            require(&args.vectors.prices, "prices", 3)?;
        }
        _ => {}
    }
    let values: Vec<f64> = (0..args.steps)
        .map(|k| {
            if args.steps == 1 {
                args.from
            } else {
                args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64
            }
        })
        .collect();

    let rows: Vec<String> = values
        .par_iter()
        .map(|&value| {
            let mut scenario = ctx.scenario.clone();
            let mut vectors = args.vectors.clone();
            axis.apply(&mut scenario, &mut vectors, value);
            let mut row = format_number(value);
            match solve_game(&scenario, &ctx.tolerances, args.game, &vectors) {
                Ok(eq) => {
                    let _ = write!(row, ",{},{}", eq.meta.uniqueness, eq.meta.iterations);
                    for i in 0..n {
                        for v in [eq.profile.prices[i], eq.profile.qos[i], eq.demands[i], eq.profits[i]] {
                            row.push(',');
                            row.push_str(&format_number(v));
                        }
                    }
                }
                Err(e) => {
                    let _ = write!(row, ",{},", status_of(&e));
                    row.push_str(&",".repeat(4 * n));
                }
            }
            row
        })
        .collect();

    let mut out = format!("{},status,iterations", args.axis);
    for p in &ctx.scenario.providers {
        let id = p.id;
        let _ = write!(out, ",price_{id},qos_{id},demand_{id},profit_{id}");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(Outcome::ok(out))
}

pub fn cmd_provision(ctx: &Context, args: &ProvisionArgs) -> Result<Outcome, CliError> {
    let scenario = &ctx.scenario;
    let (qos, demands) = match (&args.result, args.game) {
        (Some(path), _) => {
            let table = load_result(path, scenario)?;
            (
                table.rows.iter().map(|r| r.qos).collect::<Vec<_>>(),
                table.rows.iter().map(|r| r.demand).collect::<Vec<_>>(),
            )
        }
        (None, Some(game)) => {
            let eq = solve_game(scenario, &ctx.tolerances, game, &args.vectors)?;
            (eq.profile.qos, eq.demands)
        }
        (None, None) => return Err(CliError::Usage("provision needs --result or --game".into())),
    };
    let capacities = crate::market_model::capacity(scenario, &demands, &qos)?;

    let mut out = format!(
        "# measure={},kappa={}\nprovider,qos,demand,capacity,utilization,capacity_cost,response_time\n",
        match scenario.measure {
            MeasureMode::ExpectedValue => "expected".to_owned(),
            MeasureMode::Percentile(phi) => format!("percentile:{}", format_number(phi)),
        },
        format_number(scenario.kappa())
    );
    for i in 0..scenario.n() {
        let (lambda, mu) = (demands[i], capacities[i]);
        // a stable queue by construction: μ − λ = κ/(r̄t − s) > 0
        let rt = response_time(mu, lambda, scenario.measure)?;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            scenario.providers[i].id,
            format_number(qos[i]),
            format_number(lambda),
            format_number(mu),
            format_number(lambda / mu),
            format_number(scenario.capacity_cost(i, qos[i])),
            format_number(rt)
        );
    }
    Ok(Outcome::ok(out))
}

fn scenario_path(command: &Command) -> &Path {
    match command {
        Command::Solve(a) => &a.scenario,
        Command::Verify(a) => &a.scenario,
        Command::Sensitivity(a) => &a.scenario,
        Command::Sweep(a) => &a.scenario,
        Command::Provision(a) => &a.scenario,
    }
}

/// Loads the scenario and runs the parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let ctx = Context::load(scenario_path(&cli.command), &cli.global)?;
    let mut outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Sensitivity(a) => cmd_sensitivity(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Provision(a) => cmd_provision(&ctx, a),
    }?;
    let mut diagnostics = ctx.diagnostics;
    diagnostics.append(&mut outcome.diagnostics);
    outcome.diagnostics = diagnostics;
    Ok(outcome)
}

/// Full binary behaviour: parse arguments, run, write output and
/// diagnostics, and return the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            let written = match &cli.global.out {
                Some(path) => fs::write(path, &outcome.output).map_err(|e| format!("{}: {e}", path.display())),
                None => {
                    use std::io::Write;
                    std::io::stdout().write_all(outcome.output.as_bytes()).map_err(|e| e.to_string())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return exit::USAGE;
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_twelve_significant_digits() {
        assert_eq!(format_number(6.0 + 2f64.ln()), "6.69314718056");
        assert_eq!(format_number(24.0 / 7.0), "3.42857142857");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.25), "1.25");
        assert_eq!(format_number(1.234567890123456e-9), "1.23456789012e-9");
        assert_eq!(format_number(-2.5e20), "-2.5e20");
    }

    #[test]
    fn axis_paths() {
        assert_eq!(
            AxisPath::parse("providers[1].cost_per_request", 2),
            Ok(AxisPath::Provider {
                index: 1,
                field: ProviderField::CostPerRequest
            })
        );
        assert_eq!(
            AxisPath::parse("cross.gamma_rate[0][1]", 2),
            Ok(AxisPath::Cross {
                which: CrossField::GammaRate,
                i: 0,
                j: 1
            })
        );
        assert_eq!(
            AxisPath::parse("cross.beta[1][0]", 2),
            Ok(AxisPath::Cross {
                which: CrossField::Beta,
                i: 1,
                j: 0
            })
        );
        assert_eq!(AxisPath::parse("qos[1]", 2), Ok(AxisPath::Qos(1)));
        assert_eq!(AxisPath::parse("market.rt_bar", 2), Ok(AxisPath::RtBar));
        for bad in ["qos[2]", "providers[0].colour", "cross.delta[0][1]", "qos[0]x", "price"] {
            assert!(AxisPath::parse(bad, 2).is_err(), "{bad}");
        }
    }

    #[test]
    fn strict_mode_rejects_unknown_keys() {
        let text = r#"{"schema_version": 1, "market": {"rt_bar": 2, "colour": 1},
            "providers": [{"id": 0, "cost_per_request": 1, "cost_per_capacity": 1,
            "own_price_sensitivity": 1, "qos_base": 10, "qos_log_coeff": 2, "price_max": 100}]}"#;
        let (_, ignored) = ScenarioFile::from_json(text, false).unwrap();
        assert_eq!(ignored, vec!["market.colour".to_owned()]);
        let err = ScenarioFile::from_json(text, true).unwrap_err();
        assert!(err.contains("market.colour"), "{err}");
    }

    #[test]
    fn validation_lists_every_field() {
        let text = r#"{"schema_version": 1, "market": {"rt_bar": -1},
            "providers": [{"id": 0, "cost_per_request": 1, "cost_per_capacity": 0,
            "own_price_sensitivity": 1, "qos_base": 10, "qos_log_coeff": 2, "price_max": 100}]}"#;
        let (file, _) = ScenarioFile::from_json(text, true).unwrap();
        let err = file.into_scenario().unwrap_err();
        assert_eq!(err.exit_code(), exit::VALIDATION);
        let msg = err.to_string();
        assert!(msg.contains("market.rt_bar") && msg.contains("providers[0].cost_per_capacity"), "{msg}");
    }

    #[test]
    fn result_table_round_trip() {
        let table = ResultTable {
            game: Game::PriceQos,
            uniqueness: Uniqueness::Multiple,
            iterations: 17,
            converged: true,
            selected_rule: SelectionRule::ComponentwiseLargest,
            rows: vec![ResultRow {
                provider: 3,
                price: 3.5,
                qos: 0.25,
                demand: 2.0,
                capacity: 3.0,
                profit: 1.5,
                price_foc_residual: 1e-15,
                qos_foc_residual: -2e-14,
            }],
        };
        assert_eq!(ResultTable::parse(&table.to_csv()).unwrap(), table);
        assert!(ResultTable::parse("provider,price\n").is_err());
    }
}
