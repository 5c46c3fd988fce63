//! Price competition with exogenous QoS levels.
//!
//! With QoS fixed, each provider's profit is concave and quadratic in its own
//! price, and the first-order conditions stack into the linear system
//!
//! ```text
//! M · pr = x̄(s) + z,   Mᵢᵢ = 2yᵢ,  Mᵢⱼ = −βᵢⱼ,  zᵢ = yᵢ(cᵢ + ρᵢ)
//! x̄ᵢ(s) = xᵢ(sᵢ) − Σⱼ≠ᵢ αᵢⱼ(sⱼ)
//! ```
//!
//! `M` is strictly diagonally dominant whenever `yᵢ > Σⱼ βᵢⱼ`, so the price
//! equilibrium exists, is unique, and is the direct solve of this system. At
//! the equilibrium `λᵢ* = yᵢ(prᵢ* − cᵢ − ρᵢ)`.
//!
//! The sensitivity operations differentiate `pr* = M⁻¹(x̄(s) + z)` in closed
//! form. Only interior equilibria are reported: a solution outside the price
//! bounds, or one with negative demand, is an error rather than a projection.

use crate::error::SolveError;
use crate::market_model::{
    demand, EquilibriumResult, Game, MarketScenario, ModelError, SelectionRule, SolveMeta,
    StrategyProfile, Uniqueness,
};
use crate::numerics::{find_root_bisection, invert, solve_linear, sup_distance, Matrix, ToleranceConfig};

/// The stacked first-order conditions `matrix · pr = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Game1System {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
}

/// Sensitivity of the price equilibrium to QoS and costs.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityReport {
    /// Degree of positive externality `δᵢ = yᵢ(M⁻¹)ᵢᵢ`.
    pub delta: Vec<f64>,
    /// `∂prᵢ*/∂sⱼ`.
    pub price_qos: Matrix,
    /// `∂Pᵢ*/∂sⱼ`.
    pub profit_qos: Matrix,
    /// QoS level of provider `j` at which `prᵢ*` turns from rising to
    /// falling (or the reverse); `None` on the diagonal and when the
    /// direction never changes on `[0, r̄t)`.
    pub critical_qos: Vec<Vec<Option<f64>>>,
}

fn check_qos_vector(scenario: &MarketScenario, qos: &[f64]) -> Result<(), ModelError> {
    if qos.len() != scenario.n() {
        return Err(ModelError::DimensionMismatch {
            what: "qos",
            expected: scenario.n(),
            found: qos.len(),
        });
    }
    for (i, &s) in qos.iter().enumerate() {
        if s < 0.0 {
            return Err(ModelError::NegativeQos { provider: i, qos: s });
        }
        if !(s < scenario.rt_bar) {
            return Err(ModelError::DegenerateResponseTime {
                provider: i,
                qos: s,
                rt_bar: scenario.rt_bar,
            });
        }
    }
    Ok(())
}

pub(crate) fn price_matrix(scenario: &MarketScenario) -> Matrix {
    let n = scenario.n();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0 * scenario.providers[i].own_price_sensitivity
        } else {
            -scenario.cross.beta[(i, j)]
        }
    })
}

pub(crate) fn assemble_system(scenario: &MarketScenario, qos: &[f64]) -> Game1System {
    let n = scenario.n();
    let rhs = (0..n)
        .map(|i| {
            let p = &scenario.providers[i];
            let mut net_attraction = p.qos_attraction.value(qos[i]);
            for (j, &s) in qos.iter().enumerate() {
                if j != i {
                    net_attraction -= scenario.cross.alpha(i, j, s);
                }
            }
            net_attraction + p.own_price_sensitivity * p.price_min()
        })
        .collect();
    Game1System {
        matrix: price_matrix(scenario),
        rhs,
    }
}

/// Assembles `M` and `x̄(s) + z` for the QoS vector `qos`.
pub fn build_system(scenario: &MarketScenario, qos: &[f64]) -> Result<Game1System, SolveError> {
    scenario.validated()?;
    check_qos_vector(scenario, qos)?;
    Ok(assemble_system(scenario, qos))
}

/// Unconstrained price equilibrium at `qos`, with the prices of some
/// providers pinned. A pinned provider's price is a constant, so its row
/// drops out and its column moves to the right-hand side.
pub(crate) fn equilibrium_prices(
    scenario: &MarketScenario,
    qos: &[f64],
    pinned: Option<&[Option<f64>]>,
    lin_tol: f64,
) -> Result<Vec<f64>, SolveError> {
    let system = assemble_system(scenario, qos);
    let Some(pinned) = pinned else {
        return Ok(solve_linear(&system.matrix, &system.rhs, lin_tol)?);
    };
    let free: Vec<usize> = (0..scenario.n()).filter(|&i| pinned[i].is_none()).collect();
    let mut prices: Vec<f64> = pinned.iter().map(|p| p.unwrap_or(0.0)).collect();
    if free.is_empty() {
        return Ok(prices);
    }
    let reduced = Matrix::from_fn(free.len(), free.len(), |a, b| system.matrix[(free[a], free[b])]);
    let rhs: Vec<f64> = free
        .iter()
        .map(|&i| {
            let mut r = system.rhs[i];
            for (j, p) in pinned.iter().enumerate() {
                if let Some(price) = p {
                    r += scenario.cross.beta[(i, j)] * price;
                }
            }
            r
        })
        .collect();
    let solved = solve_linear(&reduced, &rhs, lin_tol)?;
    for (k, &i) in free.iter().enumerate() {
        prices[i] = solved[k];
    }
    Ok(prices)
}

/// Checks bounds and demand at a price-FOC point and builds the result with
/// `λᵢ = yᵢ(prᵢ − cᵢ − ρᵢ)` for every provider whose price is free.
pub(crate) fn finish_price_equilibrium(
    scenario: &MarketScenario,
    profile: StrategyProfile,
    bounds: &[(f64, f64)],
    meta: SolveMeta,
) -> Result<EquilibriumResult, SolveError> {
    for (i, (&price, &(min, max))) in profile.prices.iter().zip(bounds).enumerate() {
        if !(price >= min && price <= max) {
            return Err(SolveError::BoundInfeasible {
                provider: i,
                price,
                min,
                max,
            });
        }
    }
    // a pinned price satisfies no first-order condition, so its demand is
    // evaluated from the model directly
    let raw = if bounds.iter().any(|(lo, hi)| lo == hi) {
        Some(demand(scenario, &profile)?)
    } else {
        None
    };
    let demands: Vec<f64> = scenario
        .providers
        .iter()
        .zip(&profile.prices)
        .enumerate()
        .map(|(i, (p, &price))| match &raw {
            Some(raw) if bounds[i].0 == bounds[i].1 => raw[i],
            _ => p.own_price_sensitivity * p.margin(price),
        })
        .collect();
    if let Some((provider, &demand)) = demands.iter().enumerate().find(|(_, d)| **d < 0.0) {
        return Err(SolveError::DemandInfeasible { provider, demand });
    }
    Ok(EquilibriumResult::assemble(scenario, profile, demands, meta)?)
}

pub(crate) fn default_bounds(scenario: &MarketScenario) -> Vec<(f64, f64)> {
    scenario
        .providers
        .iter()
        .map(|p| (p.price_min(), p.price_max))
        .collect()
}

/// Unique price equilibrium for fixed QoS levels.
pub fn solve_game1(scenario: &MarketScenario, qos: &[f64]) -> Result<EquilibriumResult, SolveError> {
    solve_game1_with(scenario, qos, &ToleranceConfig::default())
}

pub fn solve_game1_with(
    scenario: &MarketScenario,
    qos: &[f64],
    tol: &ToleranceConfig,
) -> Result<EquilibriumResult, SolveError> {
    scenario.validated()?;
    check_qos_vector(scenario, qos)?;
    let prices = equilibrium_prices(scenario, qos, None, tol.lin_tol)?;
    let meta = SolveMeta {
        game: Game::Price,
        iterations: 1,
        converged: true,
        uniqueness: Uniqueness::Unique,
        selected_rule: SelectionRule::None,
        warnings: Vec::new(),
    };
    finish_price_equilibrium(
        scenario,
        StrategyProfile::new(prices, qos.to_vec()),
        &default_bounds(scenario),
        meta,
    )
}

/// Path of a simultaneous price best-response iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceIteration {
    pub prices: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change of each round.
    pub steps: Vec<f64>,
}

fn clipped_best_responses(scenario: &MarketScenario, system: &Game1System, prices: &[f64]) -> Vec<f64> {
    scenario
        .providers
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let pull: f64 = (0..scenario.n())
                .filter(|&j| j != i)
                .map(|j| scenario.cross.beta[(i, j)] * prices[j])
                .sum();
            let br = (system.rhs[i] + pull) / (2.0 * p.own_price_sensitivity);
            br.clamp(p.price_min(), p.price_max)
        })
        .collect()
}

/// Provider `i`'s profit-maximising price against the others' `prices`,
/// `(x̄ᵢ(s) + yᵢ(cᵢ + ρᵢ) + Σⱼ βᵢⱼprⱼ) / 2yᵢ`, clipped to its price bounds.
pub fn price_best_response(
    scenario: &MarketScenario,
    qos: &[f64],
    prices: &[f64],
    i: usize,
) -> Result<f64, SolveError> {
    let system = build_system(scenario, qos)?;
    if prices.len() != scenario.n() {
        return Err(ModelError::DimensionMismatch {
            what: "prices",
            expected: scenario.n(),
            found: prices.len(),
        }
        .into());
    }
    Ok(clipped_best_responses(scenario, &system, prices)[i])
}

/// Every provider best-responds to the previous round's prices until the
/// sup-norm step drops to `fixpoint_tol`.
///
/// The map is a contraction with modulus `maxᵢ Σⱼ βᵢⱼ / 2yᵢ < ½`, and it is
/// monotone, so runs from the lowest and the highest prices approach the
/// equilibrium from below and above.
pub fn price_best_response_iteration(
    scenario: &MarketScenario,
    qos: &[f64],
    start: &[f64],
    tol: &ToleranceConfig,
) -> Result<PriceIteration, SolveError> {
    let system = build_system(scenario, qos)?;
    if start.len() != scenario.n() {
        return Err(ModelError::DimensionMismatch {
            what: "start prices",
            expected: scenario.n(),
            found: start.len(),
        }
        .into());
    }
    let mut run = PriceIteration {
        prices: start.to_vec(),
        iterations: 0,
        converged: false,
        steps: Vec::new(),
    };
    while run.iterations < tol.max_iter {
        let next = clipped_best_responses(scenario, &system, &run.prices);
        let step = sup_distance(&next, &run.prices);
        run.prices = next;
        run.iterations += 1;
        run.steps.push(step);
        if step <= tol.fixpoint_tol {
            run.converged = true;
            break;
        }
    }
    Ok(run)
}

fn inverse_price_matrix(scenario: &MarketScenario) -> Result<Matrix, SolveError> {
    Ok(invert(&price_matrix(scenario), ToleranceConfig::default().lin_tol)?)
}

/// `δᵢ = yᵢ(M⁻¹)ᵢᵢ`, the equilibrium pass-through of provider `i`'s own cost
/// into its own price.
pub fn externality_degrees(scenario: &MarketScenario) -> Result<Vec<f64>, SolveError> {
    scenario.validated()?;
    let inv = inverse_price_matrix(scenario)?;
    scenario
        .providers
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let delta = p.own_price_sensitivity * inv[(i, i)];
            // y / (2y) may round a hair below one half, which is a hard floor
            if !(0.5 - 1e-12..1.0).contains(&delta) {
                Err(SolveError::ExternalityOutOfRange { provider: i, delta })
            } else {
                Ok(delta.max(0.5))
            }
        })
        .collect()
}

/// `∂prᵢ*/∂sⱼ = (M⁻¹)ᵢⱼ·x′ⱼ(sⱼ) − Σₗ≠ⱼ (M⁻¹)ᵢₗ·α′ₗⱼ(sⱼ)` for one column `j`.
fn price_qos_column(scenario: &MarketScenario, inv: &Matrix, j: usize, s_j: f64) -> Vec<f64> {
    let n = scenario.n();
    let own = scenario.providers[j].qos_attraction.slope(s_j);
    (0..n)
        .map(|i| {
            let mut d = inv[(i, j)] * own;
            for l in (0..n).filter(|&l| l != j) {
                d -= inv[(i, l)] * scenario.cross.alpha_slope(l, j, s_j);
            }
            d
        })
        .collect()
}

/// Matrix of equilibrium price responses to QoS, `∂prᵢ*/∂sⱼ`.
pub fn price_qos_sensitivity(scenario: &MarketScenario, qos: &[f64]) -> Result<Matrix, SolveError> {
    scenario.validated()?;
    check_qos_vector(scenario, qos)?;
    let inv = inverse_price_matrix(scenario)?;
    let n = scenario.n();
    let mut out = Matrix::zeros(n, n);
    for (j, &s_j) in qos.iter().enumerate() {
        for (i, v) in price_qos_column(scenario, &inv, j, s_j).into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// Matrix of equilibrium profit responses to QoS, `∂Pᵢ*/∂sⱼ`.
///
/// Off the diagonal this is `2yᵢ(prᵢ* − cᵢ − ρᵢ)·∂prᵢ*/∂sⱼ`; on it the own
/// capacity cost adds `−κρᵢ/(r̄t − sᵢ)²`.
pub fn profit_qos_sensitivity(scenario: &MarketScenario, qos: &[f64]) -> Result<Matrix, SolveError> {
    let eq = solve_game1(scenario, qos)?;
    let price_qos = price_qos_sensitivity(scenario, qos)?;
    Ok(profit_from_price_sensitivity(scenario, &eq, &price_qos))
}

fn profit_from_price_sensitivity(
    scenario: &MarketScenario,
    eq: &EquilibriumResult,
    price_qos: &Matrix,
) -> Matrix {
    let n = scenario.n();
    Matrix::from_fn(n, n, |i, j| {
        let p = &scenario.providers[i];
        let margin = p.margin(eq.profile.prices[i]);
        let mut d = 2.0 * p.own_price_sensitivity * margin * price_qos[(i, j)];
        if i == j {
            let headroom = scenario.rt_bar - eq.profile.qos[i];
            d -= scenario.kappa() * p.cost_per_capacity / (headroom * headroom);
        }
        d
    })
}

const CRITICAL_SCAN_POINTS: usize = 512;

/// QoS level of provider `j` at which `∂prᵢ*/∂sⱼ` changes sign, searched on
/// `[0, r̄t)` with the other QoS levels at `qos_base`.
///
/// A coarse scan locates the first sign change, which bisection on the
/// analytic derivative then refines. `None` when the derivative keeps one
/// sign over the whole range.
pub fn critical_qos(
    scenario: &MarketScenario,
    i: usize,
    j: usize,
    qos_base: &[f64],
) -> Result<Option<f64>, SolveError> {
    scenario.validated()?;
    check_qos_vector(scenario, qos_base)?;
    if i == j || i >= scenario.n() || j >= scenario.n() {
        return Ok(None);
    }
    let inv = inverse_price_matrix(scenario)?;
    Ok(critical_qos_with_inverse(scenario, &inv, i, j))
}

fn critical_qos_with_inverse(scenario: &MarketScenario, inv: &Matrix, i: usize, j: usize) -> Option<f64> {
    let slope = |s: f64| price_qos_column(scenario, inv, j, s)[i];
    let top = scenario.rt_bar * (1.0 - 1e-9);
    let mut prev_s = 0.0;
    let mut prev = slope(0.0);
    for k in 1..=CRITICAL_SCAN_POINTS {
        let s = top * k as f64 / CRITICAL_SCAN_POINTS as f64;
        let cur = slope(s);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            return find_root_bisection(slope, prev_s, s, 0.0).ok();
        }
        prev_s = s;
        prev = cur;
    }
    None
}

/// Delta vector, both sensitivity matrices and the critical-QoS table.
pub fn sensitivity_report(scenario: &MarketScenario, qos: &[f64]) -> Result<SensitivityReport, SolveError> {
    let delta = externality_degrees(scenario)?;
    let eq = solve_game1(scenario, qos)?;
    let price_qos = price_qos_sensitivity(scenario, qos)?;
    let profit_qos = profit_from_price_sensitivity(scenario, &eq, &price_qos);
    let inv = inverse_price_matrix(scenario)?;
    let n = scenario.n();
    let critical_qos = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (i != j).then(|| critical_qos_with_inverse(scenario, &inv, i, j)).flatten())
                .collect()
        })
        .collect();
    Ok(SensitivityReport {
        delta,
        price_qos,
        profit_qos,
        critical_qos,
    })
}

/// Equilibrium profit of provider `i` as its own QoS level sweeps
/// `[0, r̄t)` on `points` evenly spaced values, other QoS levels held at
/// `qos_base`. Points where the equilibrium is infeasible are skipped.
pub fn own_qos_profit_curve(
    scenario: &MarketScenario,
    i: usize,
    qos_base: &[f64],
    points: usize,
) -> Result<Vec<(f64, f64)>, SolveError> {
    check_qos_vector(scenario, qos_base)?;
    let top = scenario.rt_bar * (1.0 - 1e-6);
    let mut out = Vec::with_capacity(points);
    let mut qos = qos_base.to_vec();
    for k in 0..points {
        qos[i] = if points > 1 {
            top * k as f64 / (points - 1) as f64
        } else {
            0.0
        };
        match solve_game1(scenario, &qos) {
            Ok(eq) => out.push((qos[i], eq.profits[i])),
            Err(e) if e.is_infeasible() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
