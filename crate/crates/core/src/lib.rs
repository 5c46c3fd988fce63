//! Nash equilibria of price and QoS competition among cloud providers.
//!
//! Each provider runs an M/M/1 service, sells at a price, and promises a QoS
//! level: headroom below a market-wide response-time benchmark. Demand is
//! affine in prices and logarithmic in QoS; capacity needed to keep the
//! promised response time is bought at a per-unit cost. Three games follow:
//!
//! * [`game1`]: QoS fixed, price competition. A unique equilibrium from one
//!   linear solve, with closed-form sensitivities.
//! * [`game23`]: joint price and QoS competition solved by tatonnement with a
//!   two-start uniqueness test, and QoS competition at fixed prices, where
//!   each provider has a dominant QoS level.
//! * [`verifier`]: grid and finite-difference oracles that certify any
//!   profile using the market model alone.
//!
//! [`cli`] carries the scenario file format, result tables and the commands
//! behind the `cloudgame` binary.
//!
//! ```
//! use cloudgame::market_model::{CrossEffects, MarketScenario, MeasureMode, ProviderParams, QosAttraction};
//! use cloudgame::game1::solve_game1;
//!
//! let provider = ProviderParams::new(0, 1.0, 1.0, 1.0, QosAttraction::new(10.0, 2.0), 100.0);
//! let market = MarketScenario::new(vec![provider], CrossEffects::none(1), 2.0, MeasureMode::ExpectedValue);
//! let eq = solve_game1(&market, &[1.0]).unwrap();
//! assert!((eq.profile.prices[0] - (6.0 + 2f64.ln())).abs() < 1e-12);
//! ```

// `!(a < b)` is how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod game1;
pub mod game23;
pub mod market_model;
pub mod numerics;
pub mod verifier;

pub use error::SolveError;
pub use market_model::{
    EquilibriumResult, MarketScenario, MeasureMode, ProviderParams, StrategyProfile,
};
pub use numerics::ToleranceConfig;
