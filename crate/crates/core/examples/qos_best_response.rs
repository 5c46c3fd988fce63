//! A single provider's QoS choice at a given price.
//!
//! cargo run --example qos_best_response

use cloudgame::game23::{qos_best_response, qos_price_derivative, qos_threshold};
use cloudgame::market_model::{MeasureMode, ProviderParams, QosAttraction};

fn main() {
    let provider = ProviderParams::new(0, 1.0, 1.0, 1.0, QosAttraction::new(10.0, 2.0), 100.0);
    let rt_bar = 2.0;
    let mode = MeasureMode::ExpectedValue;

    let threshold = qos_threshold(&provider, rt_bar, mode);
    println!("below price {threshold} the provider offers no QoS headroom");
    println!("{:>6} {:>10} {:>10}", "price", "qos", "d qos/dp");
    for price in [2.0, 2.05, threshold, 2.5, 3.0, 4.0, 6.0, 10.0, 20.0] {
        println!(
            "{price:>6.3} {:>10.6} {:>10.6}",
            qos_best_response(&provider, price, rt_bar, mode),
            qos_price_derivative(&provider, price, rt_bar, mode)
        );
    }

    // a 95th-percentile promise needs ln 20 times the spare capacity
    let p95 = MeasureMode::Percentile(0.95);
    println!(
        "at price 4: expected-value qos {:.4}, 95th-percentile qos {:.4}",
        qos_best_response(&provider, 4.0, rt_bar, mode),
        qos_best_response(&provider, 4.0, rt_bar, p95)
    );
}
