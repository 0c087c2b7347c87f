//! Fits all three methods on one simulated replicate and prints the
//! held-out metrics.
//!
//!     cargo run --release --example compare_methods

use rankaft::experiment::{run_scenario_replicate, simulation_train_config, Method};
use rankaft::simgen::{MeanKind, ScenarioConfig};

fn main() -> rankaft::Result<()> {
    let scenario = ScenarioConfig {
        mean_kind: MeanKind::Interaction,
        n_train: 1000,
        n_test: 2000,
        seed: 7,
        ..Default::default()
    };
    let train_cfg = simulation_train_config(&scenario);
    let methods = [Method::Deep, Method::Paft, Method::Saft];

    println!(
        "interaction mean, gaussian errors, tau = {}, n_train = {}",
        scenario.tau, scenario.n_train
    );
    let start = std::time::Instant::now();
    let evals = run_scenario_replicate(&scenario, &methods, &train_cfg, 0)?;
    for e in &evals {
        println!(
            "{:>5}: test mse {:.3}, c-index {:.3}",
            e.method.label(),
            e.mse,
            e.c_index
        );
    }
    println!("({:.1}s)", start.elapsed().as_secs_f64());
    Ok(())
}
