//! Seeded random markets shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::path::PathBuf;

use cloudgame::game1::solve_game1;
use cloudgame::game23::joint_concavity_check;
use cloudgame::market_model::{CrossEffects, MarketScenario, MeasureMode, ProviderParams, QosAttraction};
use cloudgame::numerics::Matrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Cross effects with row and column sums of `beta` at most `share` of the
/// matching own-price sensitivity.
fn cross_effects(rng: &mut ChaCha8Rng, ys: &[f64], share: f64, gamma_max: f64) -> CrossEffects {
    let n = ys.len();
    let spread = (n.max(2) - 1) as f64;
    let beta = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            rng.random_range(0.0..1.0) * share * ys[i].min(ys[j]) / spread
        }
    });
    let gamma = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { rng.random_range(0.0..gamma_max) });
    let rate = Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { rng.random_range(0.2..2.0) });
    CrossEffects::new(beta, gamma).with_gamma_rate(rate)
}

fn providers(rng: &mut ChaCha8Rng, n: usize, price_max: f64) -> Vec<ProviderParams> {
    (0..n)
        .map(|id| {
            ProviderParams::new(
                id,
                rng.random_range(0.5..2.0),
                rng.random_range(0.5..2.0),
                rng.random_range(1.0..3.0),
                QosAttraction::new(rng.random_range(10.0..20.0), rng.random_range(0.5..2.0)),
                price_max,
            )
        })
        .collect()
}

/// A valid price-competition market with `n` providers and a QoS vector at
/// which its equilibrium is interior. Infeasible draws are redrawn.
pub fn game1_market(rng: &mut ChaCha8Rng, n: usize) -> (MarketScenario, Vec<f64>) {
    loop {
        let ps = providers(rng, n, 200.0);
        let ys: Vec<f64> = ps.iter().map(|p| p.own_price_sensitivity).collect();
        let cross = cross_effects(rng, &ys, 0.9, 0.3);
        let rt_bar = rng.random_range(0.5..3.0);
        let market = MarketScenario::new(ps, cross, rt_bar, MeasureMode::ExpectedValue);
        let qos: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.9 * rt_bar)).collect();
        if solve_game1(&market, &qos).is_ok() {
            return (market, qos);
        }
    }
}

/// A market whose `r̄t` sits inside the joint-concavity bound, so joint
/// competition has a unique equilibrium.
pub fn game2_market(rng: &mut ChaCha8Rng, n: usize) -> MarketScenario {
    loop {
        let ps = providers(rng, n, 100.0);
        let ys: Vec<f64> = ps.iter().map(|p| p.own_price_sensitivity).collect();
        let cross = cross_effects(rng, &ys, 0.8, 0.3);
        let mut market = MarketScenario::new(ps, cross, 1.0, MeasureMode::ExpectedValue);
        let bound = joint_concavity_check(&market, None).global_bound;
        market.rt_bar = rng.random_range(0.3..0.8) * bound;
        if market.validate().is_ok() && cloudgame::game23::solve_game2(&market, &Default::default()).is_ok() {
            return market;
        }
    }
}

/// Replaces every parameter that does not belong to provider `keep` with a
/// fresh draw, keeping the market valid.
pub fn perturb_rivals(rng: &mut ChaCha8Rng, market: &MarketScenario, keep: usize) -> MarketScenario {
    let n = market.n();
    loop {
        let mut m = market.clone();
        for (i, p) in m.providers.iter_mut().enumerate() {
            if i == keep {
                continue;
            }
            p.cost_per_request = rng.random_range(0.1..5.0);
            p.cost_per_capacity = rng.random_range(0.1..5.0);
            p.own_price_sensitivity = rng.random_range(0.5..5.0);
            p.qos_attraction = QosAttraction::new(rng.random_range(1.0..40.0), rng.random_range(0.1..5.0));
            p.price_max = rng.random_range(p.price_min()..p.price_min() + 100.0);
        }
        let ys: Vec<f64> = m.providers.iter().map(|p| p.own_price_sensitivity).collect();
        let fresh = cross_effects(rng, &ys, 0.9, 3.0);
        for i in 0..n {
            for j in 0..n {
                // provider `keep`'s own row of cross effects belongs to it
                if i != keep {
                    m.cross.beta[(i, j)] = fresh.beta[(i, j)];
                    m.cross.gamma[(i, j)] = fresh.gamma[(i, j)];
                    m.cross.gamma_rate[(i, j)] = fresh.gamma_rate[(i, j)];
                }
            }
        }
        if m.validate().is_ok() {
            return m;
        }
    }
}
