//! Tuning probe for the memory experiment regime. Run with --release.

use vdsa_core::experiments::{run_memory_experiment, MemoryExperimentConfig};
use vdsa_core::scenario::{BaselineStep, TrafficScenario};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let window_j: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let excursion_peak: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.55);

    let scenario = TrafficScenario {
        rsu_positions_km: vec![],
        rsu_channels: vec![],
        channel_baselines: vec![0.3, 0.05, 0.6, 0.9],
        baseline_steps: vec![
            BaselineStep {
                time_s: 60.0,
                channel: 2,
                value: excursion_peak,
            },
            BaselineStep {
                time_s: 90.0,
                channel: 2,
                value: 0.05,
            },
        ],
        ..TrafficScenario::default()
    };
    let config = MemoryExperimentConfig {
        id: "probe_memory".into(),
        scenario,
        duration_s: 140.0,
        seeds: 20,
        budget: 8,
        switching_cost: 0.1,
        gamma: -2.0,
        window_j,
        swa_windows: vec![2, 3, 4],
        ewma_alphas: vec![0.9, 0.8, 0.7],
        base_seed: args.get(3).and_then(|s| s.parse().ok()).unwrap_or(1234),
    };
    let t0 = std::time::Instant::now();
    let result = run_memory_experiment(&config).unwrap();
    println!("J={window_j} peak={excursion_peak}  ({:.1?})", t0.elapsed());
    for engine in &result.engines {
        println!(
            "{:26} mean {:.4}  std {:.4}",
            engine.label, engine.mean_rate, engine.std_rate
        );
    }
    let equal = result.engine("equal memoryless").unwrap();
    let memoryless = result.engine("heuristic memoryless").unwrap();
    let ewma = result.engine("heuristic ewma a=0.7").unwrap();
    for (label, a, b) in [
        ("heur_memless - equal", memoryless, equal),
        ("ewma0.7 - heur_memless", ewma, memoryless),
    ] {
        let (mean, se) = a.paired_difference(b);
        println!("{label}: {mean:.4} +- se {se:.4}  ({:.1} sigma)", mean / se);
    }
    println!(
        "best swa: {:?}  best ewma: {:?}",
        result.best_among("heuristic swa").map(|e| &e.label),
        result.best_among("heuristic ewma").map(|e| &e.label)
    );
}
