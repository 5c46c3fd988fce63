//! Certifying a profile by brute force: scan every unilateral deviation on a
//! grid and compare the best gain with the grid's discretisation bound.
//!
//! cargo run --release --example nash_certificate

use std::path::Path;

use cloudgame::cli::load_scenario;
use cloudgame::game23::solve_game2;
use cloudgame::numerics::ToleranceConfig;
use cloudgame::verifier::{gradient_check, verify_nash, Grid};

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/triopoly.json");
    let market = load_scenario(&path, true).unwrap().scenario;
    let eq = solve_game2(&market, &ToleranceConfig::default()).unwrap();

    let cert = verify_nash(&market, &eq.profile, &Grid::default()).unwrap();
    println!("equilibrium: epsilon {:.3e}, grid bound {:.3e}", cert.epsilon, cert.bound());

    let mut off = eq.profile.clone();
    off.prices[1] += 0.3;
    let cert = verify_nash(&market, &off, &Grid::default()).unwrap();
    let scan = &cert.per_provider[1];
    println!(
        "provider 1 priced 0.3 high: gain {:.4e} by moving to price {:.4}, qos {:.4}",
        scan.gain, scan.best_price, scan.best_qos
    );

    let grads = gradient_check(&market, &eq.profile, 1e-6).unwrap();
    println!("analytic vs finite-difference derivatives: {grads:#?}");
}
