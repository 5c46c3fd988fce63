//! Brute-force and finite-difference oracles.
//!
//! Nothing here calls into the solvers. Profits come from the market model
//! alone, so a certificate is evidence about a profile regardless of how the
//! profile was produced.

use rayon::prelude::*;

use crate::market_model::{
    foc_residuals, own_hessian, price_gradient, profit, qos_gradient, FocResidual,
    MarketScenario, ModelError, StrategyProfile, UnilateralPayoff,
};
use crate::numerics::{finite_difference, mixed_difference, second_difference};

/// Fraction of `r̄t` kept clear of the capacity-cost singularity at the top
/// of the QoS grid.
pub const QOS_GRID_MARGIN: f64 = 1e-6;

/// How finely one strategy axis is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    /// Evenly spaced points including both ends.
    Points(usize),
    /// Fixed spacing from the lower end.
    Step(f64),
}

impl Resolution {
    /// Grid spacing and point count over `[lo, hi]`.
    fn layout(self, lo: f64, hi: f64) -> (f64, usize) {
        let width = hi - lo;
        if width <= 0.0 {
            return (0.0, 1);
        }
        match self {
            Resolution::Points(n) if n >= 2 => (width / (n - 1) as f64, n),
            Resolution::Points(_) => (0.0, 1),
            Resolution::Step(h) => (h, (width / h).floor() as usize + 1),
        }
    }
}

/// Deviation grid. An axis set to `None` is held at the profile's value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub price: Option<Resolution>,
    pub qos: Option<Resolution>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            price: Some(Resolution::Points(2001)),
            qos: Some(Resolution::Points(1001)),
        }
    }
}

impl Grid {
    /// Price deviations only, QoS frozen.
    pub fn price_only() -> Self {
        Self {
            qos: None,
            ..Self::default()
        }
    }

    /// QoS deviations only, prices frozen.
    pub fn qos_only() -> Self {
        Self {
            price: None,
            ..Self::default()
        }
    }
}

/// Best unilateral deviation found for one provider.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderScan {
    pub provider: usize,
    pub best_price: f64,
    pub best_qos: f64,
    /// Profit improvement of the best deviation; zero when none improves.
    pub gain: f64,
    pub price_step: f64,
    pub qos_step: f64,
    /// Largest gain a grid of this spacing can leave behind at an exact
    /// equilibrium: `½(|Hpp|Δp² + 2|Hps|ΔpΔs + |Hss|Δs²)` from the own
    /// Hessian at the profile.
    pub bound: f64,
}

impl ProviderScan {
    pub fn within_bound(&self) -> bool {
        self.gain <= self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResolution {
    pub price_step: f64,
    pub qos_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NashCertificate {
    pub profile: StrategyProfile,
    /// Largest unilateral improvement found over all providers.
    pub epsilon: f64,
    /// Coarsest spacing used on each axis.
    pub grid_resolution: GridResolution,
    pub per_provider: Vec<ProviderScan>,
}

impl NashCertificate {
    pub fn within_bound(&self) -> bool {
        self.per_provider.iter().all(ProviderScan::within_bound)
    }

    /// Largest per-provider grid bound.
    pub fn bound(&self) -> f64 {
        self.per_provider.iter().map(|p| p.bound).fold(0.0, f64::max)
    }
}

fn axis(res: Option<Resolution>, lo: f64, hi: f64, current: f64) -> (f64, Vec<f64>) {
    match res {
        None => (0.0, vec![current]),
        Some(r) => {
            let (step, count) = r.layout(lo, hi);
            let mut pts: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
            if let Some(last) = pts.last_mut() {
                if *last > hi {
                    *last = hi;
                }
            }
            (step, pts)
        }
    }
}

/// Scans provider `i`'s deviations over the grid, others held at `profile`.
/// Returns the deviated profile and the scan summary.
pub fn best_response_scan(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
    i: usize,
    grid: &Grid,
) -> Result<(StrategyProfile, ProviderScan), ModelError> {
    let payoff = UnilateralPayoff::new(scenario, profile, i)?;
    let p = &scenario.providers[i];
    let (price0, qos0) = (profile.prices[i], profile.qos[i]);
    if !(qos0 < scenario.rt_bar) {
        return Err(ModelError::DegenerateResponseTime {
            provider: i,
            qos: qos0,
            rt_bar: scenario.rt_bar,
        });
    }
    let (price_step, prices) = axis(grid.price, p.price_min(), p.price_max, price0);
    let qos_top = scenario.rt_bar * (1.0 - QOS_GRID_MARGIN);
    let (qos_step, qos_levels) = axis(grid.qos, 0.0, qos_top, qos0);

    let current = payoff.profit(price0, qos0);
    let mut best = (price0, qos0, current);
    for &pr in &prices {
        for &s in &qos_levels {
            let v = payoff.profit(pr, s);
            if v > best.2 {
                best = (pr, s, v);
            }
        }
    }

    let h = own_hessian(scenario, profile, i);
    let bound = 0.5
        * (h[0][0].abs() * price_step * price_step
            + 2.0 * h[0][1].abs() * price_step * qos_step
            + h[1][1].abs() * qos_step * qos_step);
    let mut deviation = profile.clone();
    deviation.prices[i] = best.0;
    deviation.qos[i] = best.1;
    Ok((
        deviation,
        ProviderScan {
            provider: i,
            best_price: best.0,
            best_qos: best.1,
            gain: best.2 - current,
            price_step,
            qos_step,
            bound,
        },
    ))
}

/// Runs [`best_response_scan`] for every provider.
pub fn verify_nash(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
    grid: &Grid,
) -> Result<NashCertificate, ModelError> {
    let per_provider = (0..scenario.n())
        .into_par_iter()
        .map(|i| best_response_scan(scenario, profile, i, grid).map(|(_, scan)| scan))
        .collect::<Result<Vec<_>, _>>()?;
    let epsilon = per_provider.iter().map(|s| s.gain).fold(0.0, f64::max);
    let grid_resolution = GridResolution {
        price_step: per_provider.iter().map(|s| s.price_step).fold(0.0, f64::max),
        qos_step: per_provider.iter().map(|s| s.qos_step).fold(0.0, f64::max),
    };
    Ok(NashCertificate {
        profile: profile.clone(),
        epsilon,
        grid_resolution,
        per_provider,
    })
}

/// Analytic price and QoS first-order residuals at `profile`.
pub fn foc_residual(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
) -> Result<Vec<FocResidual>, ModelError> {
    foc_residuals(scenario, profile)
}

/// Largest discrepancies between analytic profit derivatives and central
/// differences of the profit function.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    /// `∂Pᵢ/∂prᵢ`, relative with a unit floor on the scale.
    pub price_rel_error: f64,
    /// `∂Pᵢ/∂sᵢ`, relative with a unit floor on the scale.
    pub qos_rel_error: f64,
    /// `|∂²Pᵢ/∂prᵢ∂prⱼ − βᵢⱼ|` over `i ≠ j`.
    pub cross_partial_error: f64,
    /// `|∂²Pᵢ/∂prᵢ² + 2yᵢ|`.
    pub own_second_error: f64,
}

pub(crate) fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Compares the analytic gradients against central differences at an
/// interior profile. Second derivatives use step `√fd_step`, which is exact
/// for the profit's quadratic price dependence up to rounding.
pub fn gradient_check(
    scenario: &MarketScenario,
    profile: &StrategyProfile,
    fd_step: f64,
) -> Result<GradientReport, ModelError> {
    let price_grad = price_gradient(scenario, profile)?;
    let qos_grad = qos_gradient(scenario, profile)?;
    let n = scenario.n();
    let second_step = fd_step.sqrt();
    let profit_at = |prof: &StrategyProfile, i: usize| profit(scenario, prof).map(|p| p[i]);

    let mut report = GradientReport {
        price_rel_error: 0.0,
        qos_rel_error: 0.0,
        cross_partial_error: 0.0,
        own_second_error: 0.0,
    };
    for i in 0..n {
        let with_price = |x: f64| {
            let mut p = profile.clone();
            p.prices[i] = x;
            profit_at(&p, i).unwrap_or(f64::NAN)
        };
        let with_qos = |x: f64| {
            let mut p = profile.clone();
            p.qos[i] = x;
            profit_at(&p, i).unwrap_or(f64::NAN)
        };
        let fd_price = finite_difference(with_price, profile.prices[i], fd_step);
        let fd_qos = finite_difference(with_qos, profile.qos[i], fd_step);
        report.price_rel_error = report.price_rel_error.max(rel_error(price_grad[i], fd_price));
        report.qos_rel_error = report.qos_rel_error.max(rel_error(qos_grad[i], fd_qos));

        let own = second_difference(with_price, profile.prices[i], second_step);
        let y = scenario.providers[i].own_price_sensitivity;
        report.own_second_error = report.own_second_error.max((own + 2.0 * y).abs());

        for j in (0..n).filter(|&j| j != i) {
            let both = |a: f64, b: f64| {
                let mut p = profile.clone();
                p.prices[i] = a;
                p.prices[j] = b;
                profit_at(&p, i).unwrap_or(f64::NAN)
            };
            let cross = mixed_difference(both, profile.prices[i], profile.prices[j], second_step);
            report.cross_partial_error = report
                .cross_partial_error
                .max((cross - scenario.cross.beta[(i, j)]).abs());
        }
    }
    Ok(report)
}
