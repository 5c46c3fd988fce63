//! Capacity to buy at an equilibrium, under mean and percentile
//! response-time promises.
//!
//! cargo run --example provisioning

use cloudgame::game1::solve_game1;
use cloudgame::market_model::{
    capacity, response_time, CrossEffects, MarketScenario, MeasureMode, ProviderParams, QosAttraction,
};

fn main() {
    let base = MarketScenario::new(
        vec![ProviderParams::new(0, 1.0, 1.0, 1.0, QosAttraction::new(10.0, 2.0), 100.0)],
        CrossEffects::none(1),
        2.0,
        MeasureMode::ExpectedValue,
    );
    for mode in [
        MeasureMode::ExpectedValue,
        MeasureMode::Percentile(1.0 - (-1.0f64).exp()),
        MeasureMode::Percentile(0.95),
        MeasureMode::Percentile(0.99),
    ] {
        let market = base.clone().with_measure(mode);
        let eq = solve_game1(&market, &[1.0]).unwrap();
        let mu = capacity(&market, &eq.demands, &eq.profile.qos).unwrap()[0];
        let lambda = eq.demands[0];
        println!(
            "{mode:<28} kappa {:.4}  demand {lambda:.4}  capacity {mu:.4}  utilisation {:.3}  rt {:.4}",
            market.kappa(),
            lambda / mu,
            response_time(mu, lambda, mode).unwrap()
        );
    }
}
