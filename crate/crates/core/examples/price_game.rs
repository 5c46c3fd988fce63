//! Price competition at fixed QoS: one linear solve.
//!
//! cargo run --example price_game

use cloudgame::game1::{build_system, solve_game1};
use cloudgame::market_model::{CrossEffects, MarketScenario, MeasureMode, ProviderParams, QosAttraction};
use cloudgame::numerics::Matrix;

fn main() {
    let monopoly = MarketScenario::new(
        vec![ProviderParams::new(0, 1.0, 1.0, 1.0, QosAttraction::new(10.0, 2.0), 100.0)],
        CrossEffects::none(1),
        2.0,
        MeasureMode::ExpectedValue,
    );
    let eq = solve_game1(&monopoly, &[1.0]).expect("monopoly solves");
    println!(
        "monopoly at s = 1: price {:.6}, demand {:.6}, profit {:.6}",
        eq.profile.prices[0], eq.demands[0], eq.profits[0]
    );

    let provider = |id| ProviderParams::new(id, 1.0, 1.0, 2.0, QosAttraction::new(8.0, 1.5), 50.0);
    let beta = Matrix::from_rows(&[[0.0, 0.5], [0.5, 0.0]]).unwrap();
    let duopoly = MarketScenario::new(
        vec![provider(0), provider(1)],
        CrossEffects::new(beta, Matrix::zeros(2, 2)),
        1.0,
        MeasureMode::ExpectedValue,
    );
    let system = build_system(&duopoly, &[0.0, 0.0]).unwrap();
    println!("duopoly system: M = {:?}, rhs = {:?}", system.matrix.to_rows(), system.rhs);

    for qos in [[0.0, 0.0], [0.5, 0.0], [0.5, 0.5]] {
        let eq = solve_game1(&duopoly, &qos).unwrap();
        println!(
            "qos {qos:?}: prices [{:.4}, {:.4}], demands [{:.4}, {:.4}]",
            eq.profile.prices[0], eq.profile.prices[1], eq.demands[0], eq.demands[1]
        );
    }
}
