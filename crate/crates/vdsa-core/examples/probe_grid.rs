//! Grid search over platoon-regime parameters; prints cells that pass
//! the comparison gates on every probed seed. Run with --release.

use vdsa_core::experiments::{run_platoon_experiment, PlatoonExperimentConfig};
use vdsa_core::scenario::{BaselineStep, TrafficScenario};

struct CellOutcome {
    wins: usize,
    ratio: f64,
    sw_u: f64,
    sw_h: f64,
    last_ok: bool,
    match_gap: f64,
}

fn evaluate(window_j: usize, ch4_start: f64, p2_ch3: f64, seed: u64) -> CellOutcome {
    let scenario = TrafficScenario {
        channel_baselines: vec![0.85, 0.90, 0.30, ch4_start],
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
                value: p2_ch3,
            },
        ],
        platoon_size: 10,
        ..TrafficScenario::default()
    };
    let config = PlatoonExperimentConfig {
        id: "grid".into(),
        scenario,
        duration_s: 140.0,
        runs: 10,
        gammas: vec![0.0, -2.0],
        switching_cost: 0.1,
        window_j,
        ewma_alpha: 0.7,
        base_seed: seed,
    };
    let result = run_platoon_experiment(&config).unwrap();
    let uniform = result.reports_for(0.0);
    let heuristic = result.reports_for(-2.0);
    let mut wins = 0;
    let mut sw_u = 0.0;
    let mut sw_h = 0.0;
    let mut match_u = 0.0;
    let mut match_h = 0.0;
    let mut last_u = 0.0;
    let mut last_h = 0.0;
    for r in 0..10 {
        if heuristic[r].best_match_fraction() > uniform[r].best_match_fraction() {
            wins += 1;
        }
        sw_u += uniform[r].switches_before(60.0) as f64;
        sw_h += heuristic[r].switches_before(60.0) as f64;
        match_u += uniform[r].best_match_fraction();
        match_h += heuristic[r].best_match_fraction();
        let last = uniform[r].followers() - 1;
        last_u += uniform[r].mean_success(last);
        last_h += heuristic[r].mean_success(last);
    }
    CellOutcome {
        wins,
        ratio: sw_u / sw_h.max(1e-9),
        sw_u: sw_u / 10.0,
        sw_h: sw_h / 10.0,
        last_ok: last_h > last_u,
        match_gap: (match_h - match_u) / 10.0,
    }
}

fn main() {
    let seeds = [1u64, 5, 7, 21, 42, 99, 777, 1234];
    let mut ranked: Vec<(usize, f64, String)> = Vec::new();
    for &window_j in &[17usize, 18, 19, 20] {
        for &ch4_start in &[0.41, 0.42, 0.43] {
            for &p2_ch3 in &[0.32, 0.33] {
                let mut pass = 0;
                let mut worst_ratio = f64::INFINITY;
                let mut worst_wins = 10;
                let mut mean_gap = 0.0;
                let mut lines = String::new();
                for &seed in &seeds {
                    let out = evaluate(window_j, ch4_start, p2_ch3, seed);
                    let ok = out.wins >= 8 && out.ratio >= 2.0 && out.last_ok && out.sw_u >= 1.0;
                    if ok {
                        pass += 1;
                    }
                    worst_ratio = worst_ratio.min(out.ratio);
                    worst_wins = worst_wins.min(out.wins);
                    mean_gap += out.match_gap / seeds.len() as f64;
                    lines.push_str(&format!(
                        " s{seed}:w{} r{:.2}({:.1}/{:.1})",
                        out.wins, out.ratio, out.sw_u, out.sw_h
                    ));
                }
                let label = format!(
                    "J={window_j} g1={:.2} p2={:.2} pass={pass}/8 worst w{worst_wins} r{worst_ratio:.2} gap{mean_gap:.3} |{lines}",
                    ch4_start - 0.30,
                    0.30_f64.max(p2_ch3) - 0.25
                );
                ranked.push((pass, worst_ratio.min(worst_wins as f64 / 4.0), label));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.partial_cmp(&a.1).unwrap()));
    for (_, _, label) in ranked.iter().take(12) {
        println!("{label}");
    }
}
