//! QoS competition at fixed prices. Each provider's best QoS ignores its
//! rivals, so changing them leaves the QoS vector untouched.
//!
//! cargo run --example fixed_price_qos

use std::path::Path;

use cloudgame::cli::load_scenario;
use cloudgame::game23::{solve_game2_with_bounds, solve_game3};
use cloudgame::numerics::ToleranceConfig;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/triopoly.json");
    let market = load_scenario(&path, true).unwrap().scenario;
    let prices = [4.0, 4.5, 3.8];

    let eq = solve_game3(&market, &prices).unwrap();
    println!("qos at fixed prices {prices:?}: {:.6?}", eq.profile.qos);

    let mut rivals_changed = market.clone();
    rivals_changed.providers[1].qos_attraction.base *= 3.0;
    rivals_changed.cross.beta[(0, 1)] = 0.1;
    rivals_changed.cross.gamma[(0, 2)] = 1.5;
    let again = solve_game3(&rivals_changed, &prices).unwrap();
    println!("provider 0 after rival changes: {} (was {})", again.profile.qos[0], eq.profile.qos[0]);

    // joint competition with every price pinned is the same game
    let pinned: Vec<(f64, f64)> = prices.iter().map(|&p| (p, p)).collect();
    let joint = solve_game2_with_bounds(&market, &pinned, &ToleranceConfig::default()).unwrap();
    println!("pinned joint competition qos: {:.6?}", joint.result.profile.qos);
    println!("identical: {}", joint.result.profile.qos == eq.profile.qos);
}
