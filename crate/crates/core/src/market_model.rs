//! Domain types and the economic primitives of the market: demand, profit,
//! M/M/1 capacity and response time.
//!
//! Demand for provider `i` is separable in prices and QoS levels:
//!
//! ```text
//! λᵢ = xᵢ(sᵢ) − yᵢ·prᵢ − Σⱼ≠ᵢ αᵢⱼ(sⱼ) + Σⱼ≠ᵢ βᵢⱼ·prⱼ
//! xᵢ(s)  = aᵢ + bᵢ·ln(1 + s)
//! αᵢⱼ(s) = γᵢⱼ·ln(1 + θᵢⱼ·s)
//! ```
//!
//! and profit is the margin on served demand minus the cost of the capacity
//! needed to hold the promised response time `r̄t − sᵢ`:
//!
//! ```text
//! Pᵢ = λᵢ·(prᵢ − cᵢ − ρᵢ) − κ·ρᵢ / (r̄t − sᵢ)
//! ```
//!
//! `κ` is 1 when response times are expected values and `ln(1/(1−φ))` when
//! they are φ-percentiles. Demand is returned raw, without clamping at zero;
//! the equilibrium solvers reject profiles whose demand is negative.

use std::fmt;

use thiserror::Error;

use crate::numerics::Matrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{what}: expected {expected} entries, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("provider {provider}: QoS level {qos} leaves no positive response time below rt_bar = {rt_bar}")]
    DegenerateResponseTime { provider: usize, qos: f64, rt_bar: f64 },
    #[error("provider {provider}: QoS level {qos} is negative")]
    NegativeQos { provider: usize, qos: f64 },
    #[error("provider {provider}: price {price} outside [{min}, {max}]")]
    PriceOutOfBounds {
        provider: usize,
        price: f64,
        min: f64,
        max: f64,
    },
    #[error("provider {provider}: negative demand {demand}")]
    NegativeDemand { provider: usize, demand: f64 },
    #[error("unstable queue: service rate {mu} does not exceed arrival rate {lambda}")]
    UnstableQueue { mu: f64, lambda: f64 },
    #[error("invalid scenario:\n{0}")]
    InvalidScenario(ValidationReport),
}

/// Demand drawn by a provider's own QoS level: `a + b·ln(1 + s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosAttraction {
    pub base: f64,
    pub log_coeff: f64,
}

impl QosAttraction {
    pub fn new(base: f64, log_coeff: f64) -> Self {
        Self { base, log_coeff }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.base + self.log_coeff * s.ln_1p()
    }

    /// First derivative, `b / (1 + s)`.
    pub fn slope(&self, s: f64) -> f64 {
        self.log_coeff / (1.0 + s)
    }

    /// Second derivative, `−b / (1 + s)²`.
    pub fn curvature(&self, s: f64) -> f64 {
        -self.log_coeff / ((1.0 + s) * (1.0 + s))
    }
}

/// One provider's cost, price-sensitivity and QoS-attraction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderParams {
    pub id: usize,
    /// `cᵢ`, cost per request served.
    pub cost_per_request: f64,
    /// `ρᵢ`, cost per unit of provisioned service rate.
    pub cost_per_capacity: f64,
    /// `yᵢ`, demand lost per unit of own price.
    pub own_price_sensitivity: f64,
    pub qos_attraction: QosAttraction,
    pub price_max: f64,
}

impl ProviderParams {
    pub fn new(
        id: usize,
        cost_per_request: f64,
        cost_per_capacity: f64,
        own_price_sensitivity: f64,
        qos_attraction: QosAttraction,
        price_max: f64,
    ) -> Self {
        Self {
            id,
            cost_per_request,
            cost_per_capacity,
            own_price_sensitivity,
            qos_attraction,
            price_max,
        }
    }

    /// Marginal cost `cᵢ + ρᵢ`, which is also the lowest admissible price.
    pub fn price_min(&self) -> f64 {
        self.cost_per_request + self.cost_per_capacity
    }

    /// Gross margin per request, `prᵢ − cᵢ − ρᵢ`.
    pub fn margin(&self, price: f64) -> f64 {
        price - self.cost_per_request - self.cost_per_capacity
    }
}

/// Cross-provider substitution effects.
///
/// `beta[i][j]` is the demand provider `i` gains per unit of provider `j`'s
/// price. Provider `j`'s QoS level `s` costs provider `i` demand
/// `gamma[i][j]·ln(1 + gamma_rate[i][j]·s)`. A unit `gamma_rate` gives the
/// same logarithmic shape as the own-QoS attraction.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossEffects {
    pub beta: Matrix,
    pub gamma: Matrix,
    pub gamma_rate: Matrix,
}

impl CrossEffects {
    /// No interaction: every provider is a monopolist in its own segment.
    pub fn none(n: usize) -> Self {
        Self {
            beta: Matrix::zeros(n, n),
            gamma: Matrix::zeros(n, n),
            gamma_rate: Matrix::filled(n, n, 1.0),
        }
    }

    pub fn new(beta: Matrix, gamma: Matrix) -> Self {
        let n = beta.rows();
        Self {
            beta,
            gamma,
            gamma_rate: Matrix::filled(n, n, 1.0),
        }
    }

    pub fn with_gamma_rate(mut self, gamma_rate: Matrix) -> Self {
        self.gamma_rate = gamma_rate;
        self
    }

    /// `αᵢⱼ(s)`; zero on the diagonal.
    pub fn alpha(&self, i: usize, j: usize, s: f64) -> f64 {
        if i == j {
            return 0.0;
        }
        self.gamma[(i, j)] * (self.gamma_rate[(i, j)] * s).ln_1p()
    }

    /// `α′ᵢⱼ(s)`; zero on the diagonal.
    pub fn alpha_slope(&self, i: usize, j: usize, s: f64) -> f64 {
        if i == j {
            return 0.0;
        }
        let rate = self.gamma_rate[(i, j)];
        self.gamma[(i, j)] * rate / (1.0 + rate * s)
    }
}

/// How response times are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureMode {
    ExpectedValue,
    /// φ-percentile with `0 < φ < 1`.
    Percentile(f64),
}

impl MeasureMode {
    /// Capacity multiplier `κ`: 1 for expected values, `ln(1/(1−φ))` for percentiles.
    pub fn kappa(&self) -> f64 {
        match *self {
            MeasureMode::ExpectedValue => 1.0,
            MeasureMode::Percentile(phi) => -(-phi).ln_1p(),
        }
    }
}

impl fmt::Display for MeasureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureMode::ExpectedValue => f.write_str("expected"),
            MeasureMode::Percentile(phi) => write!(f, "percentile({phi})"),
        }
    }
}

/// A complete game instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketScenario {
    pub providers: Vec<ProviderParams>,
    pub cross: CrossEffects,
    /// Benchmark response-time upper bound `r̄t`.
    pub rt_bar: f64,
    pub measure: MeasureMode,
}

impl MarketScenario {
    pub fn new(
        providers: Vec<ProviderParams>,
        cross: CrossEffects,
        rt_bar: f64,
        measure: MeasureMode,
    ) -> Self {
        Self {
            providers,
            cross,
            rt_bar,
            measure,
        }
    }

    pub fn n(&self) -> usize {
        self.providers.len()
    }

    pub fn kappa(&self) -> f64 {
        self.measure.kappa()
    }

    pub fn with_measure(mut self, measure: MeasureMode) -> Self {
        self.measure = measure;
        self
    }

    pub fn price_mins(&self) -> Vec<f64> {
        self.providers.iter().map(ProviderParams::price_min).collect()
    }

    pub fn price_maxs(&self) -> Vec<f64> {
        self.providers.iter().map(|p| p.price_max).collect()
    }

    /// Capacity cost `κ·ρᵢ / (r̄t − sᵢ)` of holding response time `r̄t − sᵢ`.
    pub fn capacity_cost(&self, i: usize, qos: f64) -> f64 {
        self.kappa() * self.providers[i].cost_per_capacity / (self.rt_bar - qos)
    }

    /// Every violated invariant; empty iff the scenario is well formed.
    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// Returns the scenario back if it validates, the report otherwise.
    pub fn validated(&self) -> Result<&Self, ModelError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(self)
        } else {
            Err(ModelError::InvalidScenario(report))
        }
    }

    /// Demand from competitors' prices and QoS levels as seen by provider `i`:
    /// `Σⱼ≠ᵢ βᵢⱼ·prⱼ − Σⱼ≠ᵢ αᵢⱼ(sⱼ)`.
    fn competitor_pull(&self, i: usize, prices: &[f64], qos: &[f64]) -> f64 {
        let mut pull = 0.0;
        for j in 0..self.n() {
            if j != i {
                pull += self.cross.beta[(i, j)] * prices[j] - self.cross.alpha(i, j, qos[j]);
            }
        }
        pull
    }

    fn own_demand(&self, i: usize, price: f64, qos: f64, pull: f64) -> f64 {
        let p = &self.providers[i];
        p.qos_attraction.value(qos) - p.own_price_sensitivity * price + pull
    }
}

/// A joint point in strategy space.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    pub prices: Vec<f64>,
    pub qos: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(prices: Vec<f64>, qos: Vec<f64>) -> Self {
        Self { prices, qos }
    }

    pub fn n(&self) -> usize {
        self.prices.len()
    }

    /// Response time `r̄t − sᵢ` promised by each provider.
    pub fn response_times(&self, rt_bar: f64) -> Vec<f64> {
        self.qos.iter().map(|s| rt_bar - s).collect()
    }

    /// Checks dimensions, `0 ≤ sᵢ < r̄t` and `prᵢᵐⁱⁿ ≤ prᵢ ≤ prᵢᵐᵃˣ`.
    pub fn check(&self, scenario: &MarketScenario) -> Result<(), ModelError> {
        check_dims(scenario, self)?;
        for (i, (&price, &s)) in self.prices.iter().zip(&self.qos).enumerate() {
            check_qos(scenario, i, s)?;
            if s < 0.0 {
                return Err(ModelError::NegativeQos { provider: i, qos: s });
            }
            let p = &scenario.providers[i];
            if !(price >= p.price_min() && price <= p.price_max) {
                return Err(ModelError::PriceOutOfBounds {
                    provider: i,
                    price,
                    min: p.price_min(),
                    max: p.price_max,
                });
            }
        }
        Ok(())
    }
}

fn check_dims(scenario: &MarketScenario, profile: &StrategyProfile) -> Result<(), ModelError> {
    let n = scenario.n();
    for (what, len) in [("prices", profile.prices.len()), ("qos", profile.qos.len())] {
        if len != n {
            return Err(ModelError::DimensionMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    Ok(())
}

fn check_qos(scenario: &MarketScenario, i: usize, s: f64) -> Result<(), ModelError> {
    if !(s < scenario.rt_bar) {
        return Err(ModelError::DegenerateResponseTime {
            provider: i,
            qos: s,
            rt_bar: scenario.rt_bar,
        });
    }
    Ok(())
}

/// Raw demand vector at `profile`.
pub fn demand(scenario: &MarketScenario, profile: &StrategyProfile) -> Result<Vec<f64>, ModelError> {
    check_dims(scenario, profile)?;
    Ok((0..scenario.n())
        .map(|i| {
            let pull = scenario.competitor_pull(i, &profile.prices, &profile.qos);
            scenario.own_demand(i, profile.prices[i], profile.qos[i], pull)
        })
        .collect())
}

/// Profit vector at `profile`.
pub fn profit(scenario: &MarketScenario, profile: &StrategyProfile) -> Result<Vec<f64>, ModelError> {
    let demands = demand(scenario, profile)?;
    demands
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            check_qos(scenario, i, profile.qos[i])?;
            let margin = scenario.providers[i].margin(profile.prices[i]);
            Ok(lambda * margin - scenario.capacity_cost(i, profile.qos[i]))
        })
        .collect()
}

/// Profit of one provider as a function of its own (price, QoS), all
/// competitors held at a fixed profile.
#[derive(Debug, Clone)]
pub struct UnilateralPayoff<'a> {
    scenario: &'a MarketScenario,
    provider: usize,
    pull: f64,
}

impl<'a> UnilateralPayoff<'a> {
    pub fn new(
        scenario: &'a MarketScenario,
        profile: &StrategyProfile,
        provider: usize,
    ) -> Result<Self, ModelError> {
        check_dims(scenario, profile)?;
        Ok(Self {
            scenario,
            provider,
            pull: scenario.competitor_pull(provider, &profile.prices, &profile.qos),
        })
    }

    pub fn demand(&self, price: f64, qos: f64) -> f64 {
        self.scenario.own_demand(self.provider, price, qos, self.pull)
    }

    /// Same arithmetic as [`profit`], so the value at the held profile is
    /// bit-identical to the corresponding entry there.
    pub fn profit(&self, price: f64, qos: f64) -> f64 {
        let margin = self.scenario.providers[self.provider].margin(price);
        self.demand(price, qos) * margin - self.scenario.capacity_cost(self.provider, qos)
    }
}

/// M/M/1 service rate needed to hold response time `r̄t − sᵢ` at load `λᵢ`:
/// `μᵢ = λᵢ + κ / (r̄t − sᵢ)`.
pub fn capacity(
    scenario: &MarketScenario,
    demands: &[f64],
    qos: &[f64],
) -> Result<Vec<f64>, ModelError> {
    let n = scenario.n();
    for (what, len) in [("demands", demands.len()), ("qos", qos.len())] {
        if len != n {
            return Err(ModelError::DimensionMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    let kappa = scenario.kappa();
    demands
        .iter()
        .zip(qos)
        .enumerate()
        .map(|(i, (&lambda, &s))| {
            check_qos(scenario, i, s)?;
            if lambda < 0.0 {
                return Err(ModelError::NegativeDemand {
                    provider: i,
                    demand: lambda,
                });
            }
            Ok(lambda + kappa / (scenario.rt_bar - s))
        })
        .collect()
}

/// M/M/1 response time (expected value or φ-percentile) at service rate `mu`
/// and arrival rate `lambda`.
pub fn response_time(mu: f64, lambda: f64, measure: MeasureMode) -> Result<f64, ModelError> {
    if !(mu > lambda) {
        return Err(ModelError::UnstableQueue { mu, lambda });
    }
    Ok(measure.kappa() / (mu - lambda))
}

/// `∂Pᵢ/∂prᵢ = −yᵢ·(prᵢ − cᵢ − ρᵢ) + λᵢ`, per provider.
pub fn price_gradient(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
) -> Result<Vec<f64>, ModelError> {
    let demands = demand(scenario, profile)?;
    Ok(demands
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let p = &scenario.providers[i];
            -p.own_price_sensitivity * p.margin(profile.prices[i]) + lambda
        })
        .collect())
}

/// `∂Pᵢ/∂sᵢ = x′ᵢ(sᵢ)·(prᵢ − cᵢ − ρᵢ) − κρᵢ/(r̄t − sᵢ)²`, per provider.
pub fn qos_gradient(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
) -> Result<Vec<f64>, ModelError> {
    check_dims(scenario, profile)?;
    (0..scenario.n())
        .map(|i| {
            check_qos(scenario, i, profile.qos[i])?;
            Ok(qos_marginal_profit(
                &scenario.providers[i],
                profile.prices[i],
                profile.qos[i],
                scenario.rt_bar,
                scenario.kappa(),
            ))
        })
        .collect()
}

/// Marginal profit of QoS for a single provider; depends only on its own
/// parameters and price.
pub fn qos_marginal_profit(
    provider: &ProviderParams,
    price: f64,
    qos: f64,
    rt_bar: f64,
    kappa: f64,
) -> f64 {
    let headroom = rt_bar - qos;
    provider.qos_attraction.slope(qos) * provider.margin(price)
        - kappa * provider.cost_per_capacity / (headroom * headroom)
}

/// Own-strategy Hessian of `Pᵢ` in `(prᵢ, sᵢ)`:
/// `[[−2yᵢ, x′ᵢ(sᵢ)], [x′ᵢ(sᵢ), x″ᵢ(sᵢ)·mᵢ − 2κρᵢ/(r̄t − sᵢ)³]]`.
pub fn own_hessian(scenario: &MarketScenario, profile: &StrategyProfile, i: usize) -> [[f64; 2]; 2] {
    let p = &scenario.providers[i];
    let s = profile.qos[i];
    let headroom = scenario.rt_bar - s;
    let pp = -2.0 * p.own_price_sensitivity;
    let ps = p.qos_attraction.slope(s);
    let ss = p.qos_attraction.curvature(s) * p.margin(profile.prices[i])
        - 2.0 * scenario.kappa() * p.cost_per_capacity / (headroom * headroom * headroom);
    [[pp, ps], [ps, ss]]
}

/// One violated scenario invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyMarket,
    Dimension {
        what: String,
        expected: usize,
        found: usize,
    },
    NotFinite {
        field: String,
    },
    Range {
        field: String,
        value: f64,
        requirement: &'static str,
    },
    /// `yᵢ > Σⱼ≠ᵢ βᵢⱼ` fails.
    RowDominance { provider: usize, own: f64, cross_sum: f64 },
    /// `yᵢ > Σⱼ≠ᵢ βⱼᵢ` fails.
    ColumnDominance { provider: usize, own: f64, cross_sum: f64 },
    PriceBounds { provider: usize, min: f64, max: f64 },
    DuplicateId { id: usize },
    MeasureRange { phi: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyMarket => f.write_str("market has no providers"),
            Violation::Dimension {
                what,
                expected,
                found,
            } => write!(f, "{what}: expected size {expected}, found {found}"),
            Violation::NotFinite { field } => write!(f, "{field}: not a finite number"),
            Violation::Range {
                field,
                value,
                requirement,
            } => write!(f, "{field} = {value}: must be {requirement}"),
            Violation::RowDominance {
                provider,
                own,
                cross_sum,
            } => write!(
                f,
                "provider {provider}: own price sensitivity {own} must exceed the sum of \
                 competitor-price effects on its demand ({cross_sum})"
            ),
            Violation::ColumnDominance {
                provider,
                own,
                cross_sum,
            } => write!(
                f,
                "provider {provider}: own price sensitivity {own} must exceed the sum of \
                 its price effects on competitors' demand ({cross_sum})"
            ),
            Violation::PriceBounds { provider, min, max } => write!(
                f,
                "provider {provider}: price_max {max} is below the price floor c + rho = {min}"
            ),
            Violation::DuplicateId { id } => write!(f, "provider id {id} appears more than once"),
            Violation::MeasureRange { phi } => {
                write!(f, "percentile phi = {phi}: must satisfy 0 < phi < 1")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

fn positive(out: &mut Vec<Violation>, field: String, value: f64, strict: bool) {
    if !value.is_finite() {
        out.push(Violation::NotFinite { field });
    } else if (strict && value <= 0.0) || (!strict && value < 0.0) {
        out.push(Violation::Range {
            field,
            value,
            requirement: if strict { "> 0" } else { ">= 0" },
        });
    }
}

fn validate(scenario: &MarketScenario) -> ValidationReport {
    let mut out = Vec::new();
    let n = scenario.n();
    if n == 0 {
        out.push(Violation::EmptyMarket);
    }

    positive(&mut out, "market.rt_bar".into(), scenario.rt_bar, true);
    for (i, p) in scenario.providers.iter().enumerate() {
        positive(&mut out, format!("providers[{i}].cost_per_request"), p.cost_per_request, false);
        positive(&mut out, format!("providers[{i}].cost_per_capacity"), p.cost_per_capacity, true);
        positive(&mut out, 
            format!("providers[{i}].own_price_sensitivity"),
            p.own_price_sensitivity,
            true,
        );
        positive(&mut out, format!("providers[{i}].qos_base"), p.qos_attraction.base, false);
        positive(&mut out, format!("providers[{i}].qos_log_coeff"), p.qos_attraction.log_coeff, true);
        if !p.price_max.is_finite() {
            out.push(Violation::NotFinite {
                field: format!("providers[{i}].price_max"),
            });
        }
    }

    let mut ids: Vec<usize> = scenario.providers.iter().map(|p| p.id).collect();
    ids.sort_unstable();
    for w in ids.windows(2) {
        if w[0] == w[1] && !out.contains(&Violation::DuplicateId { id: w[0] }) {
            out.push(Violation::DuplicateId { id: w[0] });
        }
    }

    let mut shapes_ok = true;
    for (what, m) in [
        ("cross.beta", &scenario.cross.beta),
        ("cross.gamma", &scenario.cross.gamma),
        ("cross.gamma_rate", &scenario.cross.gamma_rate),
    ] {
        for (dim, found) in [("rows", m.rows()), ("columns", m.cols())] {
            if found != n {
                shapes_ok = false;
                out.push(Violation::Dimension {
                    what: format!("{what} {dim}"),
                    expected: n,
                    found,
                });
            }
        }
    }

    if shapes_ok {
        let cross = &scenario.cross;
        for i in 0..n {
            for j in 0..n {
                for (name, m, strict) in [
                    ("beta", &cross.beta, false),
                    ("gamma", &cross.gamma, false),
                    ("gamma_rate", &cross.gamma_rate, true),
                ] {
                    let v = m[(i, j)];
                    let field = format!("cross.{name}[{i}][{j}]");
                    if !v.is_finite() {
                        out.push(Violation::NotFinite { field });
                    } else if i == j && name != "gamma_rate" && v != 0.0 {
                        out.push(Violation::Range {
                            field,
                            value: v,
                            requirement: "0 on the diagonal",
                        });
                    } else if i != j && ((strict && v <= 0.0) || (!strict && v < 0.0)) {
                        out.push(Violation::Range {
                            field,
                            value: v,
                            requirement: if strict { "> 0" } else { ">= 0" },
                        });
                    }
                }
            }
        }
        for (i, p) in scenario.providers.iter().enumerate() {
            let own = p.own_price_sensitivity;
            let row = cross.beta.off_diagonal_row_sum(i);
            if !(own > row) {
                out.push(Violation::RowDominance {
                    provider: i,
                    own,
                    cross_sum: row,
                });
            }
            let col = cross.beta.off_diagonal_col_sum(i);
            if !(own > col) {
                out.push(Violation::ColumnDominance {
                    provider: i,
                    own,
                    cross_sum: col,
                });
            }
        }
    }

    for (i, p) in scenario.providers.iter().enumerate() {
        if p.price_max.is_finite() && p.price_min().is_finite() && p.price_max < p.price_min() {
            out.push(Violation::PriceBounds {
                provider: i,
                min: p.price_min(),
                max: p.price_max,
            });
        }
    }

    if let MeasureMode::Percentile(phi) = scenario.measure {
        if !(phi > 0.0 && phi < 1.0) {
            out.push(Violation::MeasureRange { phi });
        }
    }

    ValidationReport { violations: out }
}

/// Which of the three games produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Game {
    /// QoS fixed, providers compete on price.
    Price = 1,
    /// Joint price and QoS competition.
    PriceQos = 2,
    /// Prices fixed, providers compete on QoS.
    Qos = 3,
}

impl Game {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Game::Price),
            2 => Some(Game::PriceQos),
            3 => Some(Game::Qos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    Multiple,
    Unknown,
}

impl fmt::Display for Uniqueness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Uniqueness::Unique => "unique",
            Uniqueness::Multiple => "multiple",
            Uniqueness::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionRule {
    None,
    ComponentwiseLargest,
}

impl fmt::Display for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionRule::None => "none",
            SelectionRule::ComponentwiseLargest => "componentwise-largest",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveMeta {
    pub game: Game,
    pub iterations: usize,
    pub converged: bool,
    pub uniqueness: Uniqueness,
    pub selected_rule: SelectionRule,
    /// Non-fatal diagnostics, e.g. a missing concavity guarantee.
    pub warnings: Vec<String>,
}

/// First-order-condition residuals of one provider at a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocResidual {
    /// `∂Pᵢ/∂prᵢ`.
    pub price: f64,
    /// `∂Pᵢ/∂sᵢ`.
    pub qos: f64,
}

/// Equilibrium profile together with everything the market implies at it.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub demands: Vec<f64>,
    pub capacities: Vec<f64>,
    pub profits: Vec<f64>,
    pub foc_residuals: Vec<FocResidual>,
    pub meta: SolveMeta,
}

impl EquilibriumResult {
    /// Fills in capacities, profits and residuals from a profile and the
    /// demands the caller derived for it. Profit is `λᵢ·mᵢ − κρᵢ/(r̄t − sᵢ)`
    /// with the supplied `λᵢ`. Demands must be nonnegative.
    pub fn assemble(
        scenario: &MarketScenario,
        profile: StrategyProfile,
        demands: Vec<f64>,
        meta: SolveMeta,
    ) -> Result<Self, ModelError> {
        let capacities = capacity(scenario, &demands, &profile.qos)?;
        let profits = demands
            .iter()
            .enumerate()
            .map(|(i, &lambda)| {
                lambda * scenario.providers[i].margin(profile.prices[i])
                    - scenario.capacity_cost(i, profile.qos[i])
            })
            .collect();
        let foc_residuals = foc_residuals(scenario, &profile)?;
        Ok(Self {
            profile,
            demands,
            capacities,
            profits,
            foc_residuals,
            meta,
        })
    }
}

/// Price and QoS first-order residuals for every provider.
pub fn foc_residuals(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
) -> Result<Vec<FocResidual>, ModelError> {
    let price = price_gradient(scenario, profile)?;
    let qos = qos_gradient(scenario, profile)?;
    Ok(price
        .into_iter()
        .zip(qos)
        .map(|(price, qos)| FocResidual { price, qos })
        .collect())
}
