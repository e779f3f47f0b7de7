//! Tuning probe for the platoon comparison regime. Run with --release.

use vdsa_core::experiments::{run_platoon_experiment, PlatoonExperimentConfig};
use vdsa_core::scenario::{BaselineStep, TrafficScenario};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let window_j: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(16);
    let phase2_gap_hi: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.30);
    let base_seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(99);

    let scenario = TrafficScenario {
        channel_baselines: vec![0.85, 0.90, 0.30, 0.38],
        baseline_steps: vec![
            BaselineStep {
                time_s: 60.0,
                channel: 3,
                value: 0.60,
            },
            BaselineStep {
                time_s: 60.0,
                channel: 4,
                value: 0.25,
            },
            BaselineStep {
                time_s: 61.0,
                channel: 3,
                value: phase2_gap_hi,
            },
        ],
        platoon_size: 10,
        ..TrafficScenario::default()
    };
    let config = PlatoonExperimentConfig {
        id: "probe_platoon".into(),
        scenario,
        duration_s: 140.0,
        runs: 10,
        gammas: vec![0.0, -2.0],
        switching_cost: 0.1,
        window_j,
        ewma_alpha: 0.7,
        base_seed,
    };
    let t0 = std::time::Instant::now();
    let result = run_platoon_experiment(&config).unwrap();
    println!("J={window_j} p2hi={phase2_gap_hi}  ({:.1?})", t0.elapsed());

    let uniform = result.reports_for(0.0);
    let heuristic = result.reports_for(-2.0);
    let mut wins = 0;
    for r in 0..config.runs {
        let mu = uniform[r].best_match_fraction();
        let mh = heuristic[r].best_match_fraction();
        let su = uniform[r].switches_before(60.0);
        let sh = heuristic[r].switches_before(60.0);
        let last = uniform[r].followers() - 1;
        println!(
            "run {r}: match u={mu:.3} h={mh:.3} {}  sw60 u={su} h={sh}  succ_last u={:.4} h={:.4}",
            if mh > mu { "H" } else { "-" },
            uniform[r].mean_success(last),
            heuristic[r].mean_success(last)
        );
        if mh > mu {
            wins += 1;
        }
    }
    let mean_match = |rs: &[&vdsa_core::scenario::ReceptionReport]| {
        rs.iter().map(|r| r.best_match_fraction()).sum::<f64>() / rs.len() as f64
    };
    let mean_sw = |rs: &[&vdsa_core::scenario::ReceptionReport]| {
        rs.iter().map(|r| r.switches_before(60.0) as f64).sum::<f64>() / rs.len() as f64
    };
    let mean_last = |rs: &[&vdsa_core::scenario::ReceptionReport]| {
        rs.iter()
            .map(|r| r.mean_success(r.followers() - 1))
            .sum::<f64>()
            / rs.len() as f64
    };
    println!(
        "wins {wins}/10 | match u={:.3} h={:.3} | sw60 u={:.1} h={:.1} (ratio {:.2}) | last u={:.4} h={:.4}",
        mean_match(&uniform),
        mean_match(&heuristic),
        mean_sw(&uniform),
        mean_sw(&heuristic),
        mean_sw(&uniform) / mean_sw(&heuristic).max(1e-9),
        mean_last(&uniform),
        mean_last(&heuristic)
    );
}
