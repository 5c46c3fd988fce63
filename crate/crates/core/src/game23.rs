//! Joint price and QoS competition, and QoS competition at fixed prices.
//!
//! For a given own price, provider `i`'s best QoS level solves
//!
//! ```text
//! x′ᵢ(s)·(prᵢ − cᵢ − ρᵢ) = κρᵢ / (r̄t − s)²
//! ```
//!
//! when the price clears `cᵢ + ρᵢ(1 + κ/(r̄t²·x′ᵢ(0)))`, and is zero otherwise.
//! The left side falls and the right side rises in `s`, and the right side
//! blows up at `r̄t`, so the root is unique and bracketed by `[0, r̄t)`. This
//! best response reads nothing but the provider's own parameters, which makes
//! it a dominant strategy when prices are fixed.
//!
//! With prices free, the equilibrium is computed by tatonnement: alternate
//! QoS best responses with the exact price equilibrium at those QoS levels
//! until nothing moves. Runs started from the lowest and from the highest
//! admissible prices bracket the equilibrium set; if they meet, the
//! equilibrium is unique, otherwise the componentwise-largest one is chosen.

use std::fmt;

use crate::error::SolveError;
use crate::game1::{default_bounds, equilibrium_prices, finish_price_equilibrium};
use crate::market_model::{
    demand, own_hessian, qos_marginal_profit, EquilibriumResult, Game, MarketScenario,
    MeasureMode, ModelError, ProviderParams, SelectionRule, SolveMeta, StrategyProfile,
    Uniqueness,
};
use crate::numerics::{find_root_bisection, sup_distance, ToleranceConfig};

/// Lowest price at which a positive QoS level pays for its capacity.
pub fn qos_threshold(provider: &ProviderParams, rt_bar: f64, measure: MeasureMode) -> f64 {
    let slope0 = provider.qos_attraction.slope(0.0);
    provider.price_min() + provider.cost_per_capacity * measure.kappa() / (rt_bar * rt_bar * slope0)
}

/// Profit-maximising QoS level of one provider at its own price.
pub fn qos_best_response(
    provider: &ProviderParams,
    price: f64,
    rt_bar: f64,
    measure: MeasureMode,
) -> f64 {
    let kappa = measure.kappa();
    let marginal = |s: f64| qos_marginal_profit(provider, price, s, rt_bar, kappa);
    // at or below the threshold the marginal profit of QoS is never positive
    if !(marginal(0.0) > 0.0) {
        return 0.0;
    }
    find_root_bisection(marginal, 0.0, rt_bar, 0.0)
        .expect("marginal QoS profit is positive at 0 and -inf at rt_bar")
}

/// Slope of [`qos_best_response`] in the own price.
///
/// Implicit differentiation of the root condition gives
/// `s′ = x′(s) / (2κρ/(r̄t − s)³ − x″(s)·(pr − c − ρ))`, which is positive.
/// Zero at and below the threshold.
pub fn qos_price_derivative(
    provider: &ProviderParams,
    price: f64,
    rt_bar: f64,
    measure: MeasureMode,
) -> f64 {
    let s = qos_best_response(provider, price, rt_bar, measure);
    if s == 0.0 {
        return 0.0;
    }
    let headroom = rt_bar - s;
    let qa = &provider.qos_attraction;
    let denom = 2.0 * measure.kappa() * provider.cost_per_capacity / (headroom * headroom * headroom)
        - qa.curvature(s) * provider.margin(price);
    qa.slope(s) / denom
}

/// Per-provider view of the joint-concavity condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConcavity {
    /// `∛(4yᵢκρᵢ / x′ᵢ(0)²)`.
    pub rt_bound: f64,
    pub satisfied: bool,
    /// Determinant of the own (price, QoS) Hessian at the supplied profile.
    pub hessian_det: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    /// `∛(4·minᵢ yᵢ·minᵢ ρᵢ·κ / (maxᵢ x′ᵢ(0))²)`.
    pub global_bound: f64,
    pub rt_bar: f64,
    /// `r̄t` is within the global bound.
    pub satisfied: bool,
    pub per_provider: Vec<ProviderConcavity>,
}

/// Checks the sufficient condition for every provider's profit to be jointly
/// concave in its own (price, QoS), and evaluates the Hessian determinants
/// at `profile` when one is supplied.
pub fn joint_concavity_check(
    scenario: &MarketScenario,
    profile: Option<&StrategyProfile>,
) -> ConcavityReport {
    let kappa = scenario.kappa();
    let min_y = scenario
        .providers
        .iter()
        .map(|p| p.own_price_sensitivity)
        .fold(f64::INFINITY, f64::min);
    let min_rho = scenario
        .providers
        .iter()
        .map(|p| p.cost_per_capacity)
        .fold(f64::INFINITY, f64::min);
    let max_slope = scenario
        .providers
        .iter()
        .map(|p| p.qos_attraction.slope(0.0))
        .fold(0.0, f64::max);
    let global_bound = (4.0 * min_y * min_rho * kappa / (max_slope * max_slope)).cbrt();
    let per_provider = scenario
        .providers
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let slope0 = p.qos_attraction.slope(0.0);
            let rt_bound = (4.0 * p.own_price_sensitivity * p.cost_per_capacity * kappa
                / (slope0 * slope0))
                .cbrt();
            let hessian_det = profile.map(|pr| {
                let h = own_hessian(scenario, pr, i);
                h[0][0] * h[1][1] - h[0][1] * h[1][0]
            });
            ProviderConcavity {
                rt_bound,
                satisfied: scenario.rt_bar <= rt_bound,
                hessian_det,
            }
        })
        .collect();
    ConcavityReport {
        global_bound,
        rt_bar: scenario.rt_bar,
        satisfied: scenario.rt_bar <= global_bound,
        per_provider,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartPoint {
    FromMin,
    FromMax,
    Custom,
}

impl fmt::Display for StartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StartPoint::FromMin => "from-min",
            StartPoint::FromMax => "from-max",
            StartPoint::Custom => "custom",
        })
    }
}

/// Path of one tatonnement run.
#[derive(Debug, Clone, PartialEq)]
pub struct TatonnementTrace {
    pub start_point: StartPoint,
    /// Start profile followed by one profile per round.
    pub iterates: Vec<StrategyProfile>,
    /// Sup-norm distance between consecutive iterates.
    pub steps: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl TatonnementTrace {
    pub fn last_step(&self) -> f64 {
        self.steps.last().copied().unwrap_or(f64::NAN)
    }

    pub fn limit(&self) -> &StrategyProfile {
        self.iterates.last().expect("a trace always holds its start")
    }
}

/// Outcome of [`solve_game2_detailed`]: the selected equilibrium and both runs.
#[derive(Debug, Clone)]
pub struct Game2Solution {
    pub result: EquilibriumResult,
    pub from_min: TatonnementTrace,
    pub from_max: TatonnementTrace,
}

fn best_responses(scenario: &MarketScenario, prices: &[f64]) -> Vec<f64> {
    scenario
        .providers
        .iter()
        .zip(prices)
        .map(|(p, &price)| qos_best_response(p, price, scenario.rt_bar, scenario.measure))
        .collect()
}

/// Profile a tatonnement run starts from: the given prices with the QoS
/// levels that best respond to them.
pub fn start_profile(scenario: &MarketScenario, prices: Vec<f64>) -> StrategyProfile {
    let qos = best_responses(scenario, &prices);
    StrategyProfile::new(prices, qos)
}

fn check_bounds(scenario: &MarketScenario, bounds: &[(f64, f64)]) -> Result<(), ModelError> {
    if bounds.len() != scenario.n() {
        return Err(ModelError::DimensionMismatch {
            what: "price bounds",
            expected: scenario.n(),
            found: bounds.len(),
        });
    }
    Ok(())
}

fn run_tatonnement(
    scenario: &MarketScenario,
    start: &StrategyProfile,
    label: StartPoint,
    bounds: &[(f64, f64)],
    tol: &ToleranceConfig,
) -> Result<(EquilibriumResult, TatonnementTrace), SolveError> {
    let pinned: Vec<Option<f64>> = bounds
        .iter()
        .map(|&(lo, hi)| (lo == hi).then_some(lo))
        .collect();
    let pinned = pinned.iter().any(Option::is_some).then_some(pinned.as_slice());

    let mut trace = TatonnementTrace {
        start_point: label,
        iterates: vec![start.clone()],
        steps: Vec::new(),
        converged: false,
        iterations: 0,
    };
    let mut current = start.clone();
    while trace.iterations < tol.max_iter {
        let qos = best_responses(scenario, &current.prices);
        let prices = equilibrium_prices(scenario, &qos, pinned, tol.lin_tol)?;
        let next = StrategyProfile::new(prices, qos);
        let step = sup_distance(&next.prices, &current.prices).max(sup_distance(&next.qos, &current.qos));
        trace.iterations += 1;
        trace.steps.push(step);
        trace.iterates.push(next.clone());
        current = next;
        if step <= tol.fixpoint_tol {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(SolveError::NonConvergence {
            trace: Box::new(trace),
        });
    }

    let mut warnings = Vec::new();
    let concavity = joint_concavity_check(scenario, Some(&current));
    if !concavity.satisfied {
        warnings.push(format!(
            "rt_bar = {} exceeds the joint-concavity bound {}; the fixed point is residual-checked only",
            scenario.rt_bar, concavity.global_bound
        ));
    }
    let meta = SolveMeta {
        game: Game::PriceQos,
        iterations: trace.iterations,
        converged: true,
        uniqueness: Uniqueness::Unknown,
        selected_rule: SelectionRule::None,
        warnings,
    };
    let result = finish_price_equilibrium(scenario, current, bounds, meta)?;
    Ok((result, trace))
}

/// Best-response iteration from `start` until consecutive iterates agree to
/// `fixpoint_tol`. Each round sets every QoS level to its best response to
/// the current prices, then solves the price equilibrium at those levels.
pub fn tatonnement(
    scenario: &MarketScenario,
    start: &StrategyProfile,
    tol: &ToleranceConfig,
) -> Result<(EquilibriumResult, TatonnementTrace), SolveError> {
    scenario.validated()?;
    let n = scenario.n();
    if start.prices.len() != n || start.qos.len() != n {
        return Err(ModelError::DimensionMismatch {
            what: "start profile",
            expected: n,
            found: start.prices.len().min(start.qos.len()),
        }
        .into());
    }
    run_tatonnement(scenario, start, StartPoint::Custom, &default_bounds(scenario), tol)
}

/// Which of two price limits is componentwise largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    First,
    Second,
    Neither,
}

pub fn componentwise_largest(a: &[f64], b: &[f64]) -> Dominance {
    if a.iter().zip(b).all(|(x, y)| x >= y) {
        Dominance::First
    } else if a.iter().zip(b).all(|(x, y)| y >= x) {
        Dominance::Second
    } else {
        Dominance::Neither
    }
}

/// Joint price-QoS equilibrium with the two-start uniqueness test.
pub fn solve_game2(scenario: &MarketScenario, tol: &ToleranceConfig) -> Result<EquilibriumResult, SolveError> {
    solve_game2_detailed(scenario, tol).map(|s| s.result)
}

pub fn solve_game2_detailed(
    scenario: &MarketScenario,
    tol: &ToleranceConfig,
) -> Result<Game2Solution, SolveError> {
    scenario.validated()?;
    solve_game2_within(scenario, &default_bounds(scenario), tol)
}

/// [`solve_game2_detailed`] over explicit price intervals. A degenerate
/// interval `(p, p)` fixes that provider's price at `p`.
pub fn solve_game2_with_bounds(
    scenario: &MarketScenario,
    bounds: &[(f64, f64)],
    tol: &ToleranceConfig,
) -> Result<Game2Solution, SolveError> {
    scenario.validated()?;
    check_bounds(scenario, bounds)?;
    solve_game2_within(scenario, bounds, tol)
}

fn solve_game2_within(
    scenario: &MarketScenario,
    bounds: &[(f64, f64)],
    tol: &ToleranceConfig,
) -> Result<Game2Solution, SolveError> {
    let low = start_profile(scenario, bounds.iter().map(|b| b.0).collect());
    let high = start_profile(scenario, bounds.iter().map(|b| b.1).collect());
    let (from_min, from_max) = rayon::join(
        || run_tatonnement(scenario, &low, StartPoint::FromMin, bounds, tol),
        || run_tatonnement(scenario, &high, StartPoint::FromMax, bounds, tol),
    );

    let (lo_res, lo_trace, hi_res, hi_trace) = match (from_min, from_max) {
        (Ok((a, ta)), Ok((b, tb))) => (a, ta, b, tb),
        (a, b) => {
            let non_converged = |r: &Result<_, SolveError>| matches!(r, Err(SolveError::NonConvergence { .. }));
            if non_converged(&a) || non_converged(&b) {
                let trace_of = |r: Result<(EquilibriumResult, TatonnementTrace), SolveError>| match r {
                    Ok((_, t)) => (None, Some(Box::new(t))),
                    Err(SolveError::NonConvergence { trace }) => (Some(SolveError::NonConvergence { trace: trace.clone() }), Some(trace)),
                    Err(e) => (Some(e), None),
                };
                let (ea, ta) = trace_of(a);
                let (eb, tb) = trace_of(b);
                let reason = ea.or(eb).expect("at least one run failed");
                return Err(SolveError::UnknownMultiplicity {
                    reason: Box::new(reason),
                    from_min: ta,
                    from_max: tb,
                });
            }
            return Err(a.err().or(b.err()).expect("at least one run failed"));
        }
    };

    let gap = sup_distance(&lo_res.profile.prices, &hi_res.profile.prices)
        .max(sup_distance(&lo_res.profile.qos, &hi_res.profile.qos));
    let iterations = lo_trace.iterations.max(hi_trace.iterations);
    let mut result = if gap <= 10.0 * tol.fixpoint_tol {
        let mut r = lo_res;
        r.meta.uniqueness = Uniqueness::Unique;
        r
    } else {
        let mut r = match componentwise_largest(&lo_res.profile.prices, &hi_res.profile.prices) {
            Dominance::First => lo_res,
            Dominance::Second => hi_res,
            Dominance::Neither => {
                return Err(SolveError::IncomparableEquilibria {
                    from_min: Box::new(lo_res),
                    from_max: Box::new(hi_res),
                })
            }
        };
        r.meta.uniqueness = Uniqueness::Multiple;
        r.meta.selected_rule = SelectionRule::ComponentwiseLargest;
        r
    };
    result.meta.iterations = iterations;
    Ok(Game2Solution {
        result,
        from_min: lo_trace,
        from_max: hi_trace,
    })
}

/// QoS equilibrium at fixed prices: every provider plays its dominant QoS
/// best response.
pub fn solve_game3(scenario: &MarketScenario, fixed_prices: &[f64]) -> Result<EquilibriumResult, SolveError> {
    scenario.validated()?;
    if fixed_prices.len() != scenario.n() {
        return Err(ModelError::DimensionMismatch {
            what: "fixed prices",
            expected: scenario.n(),
            found: fixed_prices.len(),
        }
        .into());
    }
    for (i, (p, &price)) in scenario.providers.iter().zip(fixed_prices).enumerate() {
        if !(price >= p.price_min()) {
            return Err(SolveError::BoundInfeasible {
                provider: i,
                price,
                min: p.price_min(),
                max: p.price_max,
            });
        }
    }
    let profile = start_profile(scenario, fixed_prices.to_vec());
    let demands = demand(scenario, &profile)?;
    if let Some((provider, &demand)) = demands.iter().enumerate().find(|(_, d)| **d < 0.0) {
        return Err(SolveError::DemandInfeasible { provider, demand });
    }
    let meta = SolveMeta {
        game: Game::Qos,
        iterations: 1,
        converged: true,
        uniqueness: Uniqueness::Unique,
        selected_rule: SelectionRule::None,
        warnings: Vec::new(),
    };
    Ok(EquilibriumResult::assemble(scenario, profile, demands, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game1::solve_game1;
    use crate::market_model::{CrossEffects, QosAttraction};
    use crate::numerics::{finite_difference, Matrix};
    use approx::assert_relative_eq;

    fn worked_provider() -> ProviderParams {
        ProviderParams::new(0, 1.0, 1.0, 1.0, QosAttraction::new(10.0, 2.0), 100.0)
    }

    #[test]
    fn best_response_worked_root() {
        let s = qos_best_response(&worked_provider(), 4.0, 2.0, MeasureMode::ExpectedValue);
        assert_relative_eq!(s, 1.25, max_relative = 1e-14);
    }

    #[test]
    fn best_response_below_threshold_is_zero() {
        let p = worked_provider();
        let t = qos_threshold(&p, 2.0, MeasureMode::ExpectedValue);
        assert_eq!(t, 2.125);
        assert_eq!(qos_best_response(&p, 2.05, 2.0, MeasureMode::ExpectedValue), 0.0);
        assert_eq!(qos_best_response(&p, t, 2.0, MeasureMode::ExpectedValue), 0.0);
        // continuous just above
        assert!(qos_best_response(&p, t + 1e-9, 2.0, MeasureMode::ExpectedValue) < 1e-8);
    }

    #[test]
    fn derivative_worked_example() {
        let d = qos_price_derivative(&worked_provider(), 4.0, 2.0, MeasureMode::ExpectedValue);
        let x1 = 2.0 / 2.25;
        let x2 = -2.0 / (2.25 * 2.25);
        let expected = x1 / (2.0 / 0.75f64.powi(3) - x2 * 2.0);
        assert_relative_eq!(d, expected, max_relative = 1e-12);
        assert_relative_eq!(d, 0.1607, epsilon = 1e-4);
        assert_eq!(qos_price_derivative(&worked_provider(), 2.0, 2.0, MeasureMode::ExpectedValue), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences_along_a_sweep() {
        let p = worked_provider();
        let mut last_s = 0.0;
        let mut last_d = f64::INFINITY;
        for k in 0..40 {
            let price = 2.2 + 0.25 * k as f64;
            let d = qos_price_derivative(&p, price, 2.0, MeasureMode::ExpectedValue);
            let fd = finite_difference(
                |x| qos_best_response(&p, x, 2.0, MeasureMode::ExpectedValue),
                price,
                1e-6,
            );
            assert_relative_eq!(d, fd, max_relative = 1e-5);
            let s = qos_best_response(&p, price, 2.0, MeasureMode::ExpectedValue);
            assert!(s > last_s && d < last_d, "increasing and concave above threshold");
            last_s = s;
            last_d = d;
        }
    }

    #[test]
    fn concavity_bound_examples() {
        let m = |rt| {
            MarketScenario::new(vec![worked_provider()], CrossEffects::none(1), rt, MeasureMode::ExpectedValue)
        };
        let r = joint_concavity_check(&m(1.0), None);
        assert_relative_eq!(r.global_bound, 1.0, max_relative = 1e-15);
        assert!(r.satisfied);
        assert!(!joint_concavity_check(&m(2.0), None).satisfied);

        let mut flat = m(50.0);
        flat.providers[0].qos_attraction.log_coeff = 1e-9;
        assert!(joint_concavity_check(&flat, None).satisfied);
    }

    #[test]
    fn hessian_at_zero_margin() {
        let m = MarketScenario::new(vec![worked_provider()], CrossEffects::none(1), 1.0, MeasureMode::ExpectedValue);
        let at = StrategyProfile::new(vec![2.0], vec![0.0]);
        let det = joint_concavity_check(&m, Some(&at)).per_provider[0].hessian_det.unwrap();
        // 4yκρ/rt³ − b² = 4 − 4
        assert_relative_eq!(det, 0.0, epsilon = 1e-12);
        let m2 = MarketScenario { rt_bar: 0.8, ..m.clone() };
        assert!(joint_concavity_check(&m2, Some(&at)).per_provider[0].hessian_det.unwrap() > 0.0);
        let m3 = MarketScenario { rt_bar: 1.5, ..m };
        assert!(joint_concavity_check(&m3, Some(&at)).per_provider[0].hessian_det.unwrap() < 0.0);
    }

    fn monopoly_rt1() -> MarketScenario {
        MarketScenario::new(vec![worked_provider()], CrossEffects::none(1), 1.0, MeasureMode::ExpectedValue)
    }

    #[test]
    fn monopoly_fixed_point_satisfies_both_conditions() {
        let s = monopoly_rt1();
        let eq = solve_game2(&s, &ToleranceConfig::default()).unwrap();
        let (pr, q) = (eq.profile.prices[0], eq.profile.qos[0]);
        assert!(q > 0.0);
        // 2pr = x(s) + 2  and  x'(s)(pr − 2) = 1/(1 − s)²
        assert!((2.0 * pr - (10.0 + 2.0 * q.ln_1p()) - 2.0).abs() < 1e-8);
        assert!((2.0 / (1.0 + q) * (pr - 2.0) - 1.0 / (1.0 - q).powi(2)).abs() < 1e-8);

        // independent oracle: Newton on the two-equation system
        let (mut p, mut sq) = (6.0_f64, 0.5_f64);
        for _ in 0..50 {
            let f1 = 2.0 * p - 12.0 - 2.0 * sq.ln_1p();
            let f2 = 2.0 * (p - 2.0) / (1.0 + sq) - 1.0 / (1.0 - sq).powi(2);
            let (a, b) = (2.0, -2.0 / (1.0 + sq));
            let (c, d) = (2.0 / (1.0 + sq), -2.0 * (p - 2.0) / (1.0 + sq).powi(2) - 2.0 / (1.0 - sq).powi(3));
            let det = a * d - b * c;
            p -= (d * f1 - b * f2) / det;
            sq -= (a * f2 - c * f1) / det;
        }
        assert_relative_eq!(pr, p, max_relative = 1e-9);
        assert_relative_eq!(q, sq, max_relative = 1e-8);
    }

    fn symmetric_pair(rt_bar: f64) -> MarketScenario {
        let p = |id| ProviderParams::new(id, 1.0, 1.0, 2.0, QosAttraction::new(8.0, 1.5), 50.0);
        let beta = Matrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]]).unwrap();
        let gamma = Matrix::from_rows(&[[0.0, 0.4], [0.4, 0.0]]).unwrap();
        MarketScenario::new(vec![p(0), p(1)], CrossEffects::new(beta, gamma), rt_bar, MeasureMode::ExpectedValue)
    }

    #[test]
    fn symmetric_market_has_symmetric_unique_equilibrium() {
        let s = symmetric_pair(1.0);
        assert!(joint_concavity_check(&s, None).satisfied);
        let sol = solve_game2_detailed(&s, &ToleranceConfig::default()).unwrap();
        let eq = &sol.result;
        assert_eq!(eq.meta.uniqueness, Uniqueness::Unique);
        assert!((eq.profile.prices[0] - eq.profile.prices[1]).abs() < 1e-12);
        assert!((eq.profile.qos[0] - eq.profile.qos[1]).abs() < 1e-12);
        assert!(sup_distance(&sol.from_min.limit().prices, &sol.from_max.limit().prices) < 1e-7);
        for r in &eq.foc_residuals {
            assert!(r.price.abs() <= 1e-8 && r.qos.abs() <= 1e-8, "{r:?}");
        }
        assert_eq!(sol.from_min.start_point, StartPoint::FromMin);
        assert!(*sol.from_min.steps.last().unwrap() <= 1e-9);
    }

    #[test]
    fn low_margins_keep_qos_at_zero() {
        // tight capacity budget: threshold sits far above the equilibrium price
        let mut s = symmetric_pair(0.3);
        for p in &mut s.providers {
            p.cost_per_capacity = 5.0;
            p.qos_attraction.base = 30.0;
        }
        let eq = solve_game2(&s, &ToleranceConfig::default()).unwrap();
        assert_eq!(eq.profile.qos, vec![0.0, 0.0]);
        assert!(eq.meta.iterations <= 3, "{}", eq.meta.iterations);
        let g1 = solve_game1(&s, &[0.0, 0.0]).unwrap();
        assert_eq!(eq.profile.prices, g1.profile.prices);

        let start = start_profile(&s, s.price_mins());
        let (r, trace) = tatonnement(&s, &start, &ToleranceConfig::default()).unwrap();
        assert!(trace.iterations <= 2 && trace.converged);
        assert_eq!(r.profile.prices, g1.profile.prices);
        assert_eq!(trace.start_point, StartPoint::Custom);
    }

    #[test]
    fn non_convergence_reports_traces() {
        let s = symmetric_pair(1.0);
        let tol = ToleranceConfig {
            max_iter: 2,
            ..ToleranceConfig::default()
        };
        match solve_game2(&s, &tol) {
            Err(SolveError::UnknownMultiplicity { from_min, from_max, .. }) => {
                assert_eq!(from_min.unwrap().iterations, 2);
                assert_eq!(from_max.unwrap().iterations, 2);
            }
            other => panic!("expected unknown multiplicity, got {other:?}"),
        }
    }

    #[test]
    fn selection_rule() {
        assert_eq!(componentwise_largest(&[2.0, 3.0], &[1.0, 3.0]), Dominance::First);
        assert_eq!(componentwise_largest(&[1.0, 3.0], &[2.0, 3.0]), Dominance::Second);
        assert_eq!(componentwise_largest(&[1.0, 4.0], &[2.0, 3.0]), Dominance::Neither);
    }

    #[test]
    fn game3_worked_example_ignores_competitors() {
        let mut s = symmetric_pair(2.0);
        s.providers[0] = ProviderParams { id: 0, ..worked_provider() };
        let eq = solve_game3(&s, &[4.0, 3.0]).unwrap();
        assert_relative_eq!(eq.profile.qos[0], 1.25, max_relative = 1e-14);

        let mut other = s.clone();
        other.providers[1].cost_per_request = 0.2;
        other.providers[1].cost_per_capacity = 2.5;
        other.cross.gamma[(1, 0)] = 0.9;
        other.cross.beta[(1, 0)] = 0.1;
        let eq2 = solve_game3(&other, &[4.0, 3.7]).unwrap();
        assert_eq!(eq.profile.qos[0].to_bits(), eq2.profile.qos[0].to_bits());
    }

    #[test]
    fn game3_at_price_floor_gives_zero_qos() {
        let s = symmetric_pair(1.0);
        let eq = solve_game3(&s, &s.price_mins()).unwrap();
        assert_eq!(eq.profile.qos, vec![0.0, 0.0]);
        assert!(matches!(solve_game3(&s, &[1.0, 3.0]), Err(SolveError::BoundInfeasible { provider: 0, .. })));
    }

    #[test]
    fn collapsed_bounds_reproduce_game3() {
        let s = symmetric_pair(1.0);
        let fixed = [3.5, 4.25];
        let g3 = solve_game3(&s, &fixed).unwrap();
        let bounds: Vec<(f64, f64)> = fixed.iter().map(|&p| (p, p)).collect();
        let g2 = solve_game2_with_bounds(&s, &bounds, &ToleranceConfig::default()).unwrap();
        assert_eq!(g2.result.profile.qos, g3.profile.qos);
        assert_eq!(g2.result.profile.prices, fixed.to_vec());
        assert_eq!(g2.result.meta.uniqueness, Uniqueness::Unique);
    }
}
