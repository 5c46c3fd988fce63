//! Price and QoS competition by tatonnement from both ends of the price box.
//!
//! cargo run --example joint_competition

use std::path::Path;

use cloudgame::cli::load_scenario;
use cloudgame::game23::{joint_concavity_check, solve_game2_detailed};
use cloudgame::numerics::ToleranceConfig;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/triopoly.json");
    let market = load_scenario(&path, true).unwrap().scenario;

    let concavity = joint_concavity_check(&market, None);
    println!(
        "rt_bar {} vs concavity bound {:.4}: {}",
        concavity.rt_bar,
        concavity.global_bound,
        if concavity.satisfied { "unique equilibrium guaranteed" } else { "no guarantee" }
    );

    let sol = solve_game2_detailed(&market, &ToleranceConfig::default()).unwrap();
    for trace in [&sol.from_min, &sol.from_max] {
        println!("start {}: {} rounds", trace.start_point, trace.iterations);
        for (k, (it, step)) in trace.iterates.iter().skip(1).zip(&trace.steps).enumerate().take(4) {
            println!("  round {:2}: prices {:.5?}  step {step:.2e}", k + 1, it.prices);
        }
    }
    let eq = &sol.result;
    println!("equilibrium ({}):", eq.meta.uniqueness);
    for i in 0..market.n() {
        println!(
            "  provider {i}: price {:.6}  qos {:.6}  demand {:.4}  profit {:.4}",
            eq.profile.prices[i], eq.profile.qos[i], eq.demands[i], eq.profits[i]
        );
    }
}
