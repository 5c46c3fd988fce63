//! How the price equilibrium reacts to QoS: externality degrees, the
//! derivative matrices, and a rival QoS level where the reaction flips sign.
//!
//! cargo run --example sensitivity

use cloudgame::game1::{critical_qos, sensitivity_report, solve_game1};
use cloudgame::market_model::{CrossEffects, MarketScenario, MeasureMode, ProviderParams, QosAttraction};
use cloudgame::numerics::Matrix;

fn main() {
    let p0 = ProviderParams::new(0, 1.0, 1.0, 2.0, QosAttraction::new(40.0, 1.5), 1e3);
    let p1 = ProviderParams::new(1, 1.0, 1.0, 2.0, QosAttraction::new(40.0, 8.0), 1e3);
    let beta = Matrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]]).unwrap();
    // provider 1's QoS pulls demand from provider 0 with a slow-saturating log
    let gamma = Matrix::from_rows(&[[0.0, 4.0], [0.0, 0.0]]).unwrap();
    let rate = Matrix::from_rows(&[[1.0, 0.1], [1.0, 1.0]]).unwrap();
    let market = MarketScenario::new(
        vec![p0, p1],
        CrossEffects::new(beta, gamma).with_gamma_rate(rate),
        20.0,
        MeasureMode::ExpectedValue,
    );

    let report = sensitivity_report(&market, &[0.0, 0.0]).unwrap();
    println!("externality degrees: {:?}", report.delta);
    println!("d price / d qos:  {:?}", report.price_qos.to_rows());
    println!("d profit / d qos: {:?}", report.profit_qos.to_rows());

    let s0 = critical_qos(&market, 0, 1, &[0.0, 0.0]).unwrap().expect("sign change exists");
    println!("provider 0's price peaks when provider 1 offers s = {s0:.4}");
    for s in [0.0, s0 / 2.0, s0, 2.0 * s0, 4.0 * s0] {
        let eq = solve_game1(&market, &[0.0, s]).unwrap();
        println!("  s_1 = {s:7.4}  price_0 = {:.6}", eq.profile.prices[0]);
    }
}
