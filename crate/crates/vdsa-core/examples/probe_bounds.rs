//! Quick look at the bound curves and crossing iterations for the two
//! reference systems. Run with --release.

use vdsa_core::experiments::{run_bounds_experiment, sustained_crossing, BoundsExperimentConfig};

fn main() {
    for (budget, gammas) in [(8u64, vec![-4.0]), (6u64, vec![-2.0, -4.0])] {
        let config = BoundsExperimentConfig {
            id: format!("probe_n{budget}"),
            betas: vec![0.2, 0.35, 0.6, 0.8],
            budget,
            horizon: 22,
            mc_runs: 10_000,
            gammas: gammas.clone(),
            enumeration_cap: 10_000_000,
            frontier_cap: 64,
            base_seed: 7,
        };
        let t0 = std::time::Instant::now();
        let curves = run_bounds_experiment(&config).unwrap();
        println!("== N={budget}  ({:.1?})", t0.elapsed());
        println!("it | glob LB  UB   | iter LB  UB   | mc_it  mc_eq  | heur...");
        for i in 0..config.horizon {
            print!(
                "{:2} | {:.4} {:.4} | {:.4} {:.4} | {:.4} {:.4} |",
                i + 1,
                curves.global[i].lower,
                curves.global[i].upper,
                curves.iterative[i].lower,
                curves.iterative[i].upper,
                curves.mc_iterative[i],
                curves.mc_equal[i]
            );
            for (_, c) in &curves.mc_heuristic {
                print!(" {:.4}", c[i]);
            }
            println!();
        }
        let global_ub: Vec<f64> = curves.global.iter().map(|b| b.upper).collect();
        println!(
            "cross 0.9: global_ub={:?} iter_mc={:?} equal_mc={:?}",
            sustained_crossing(&global_ub, 0.9),
            sustained_crossing(&curves.mc_iterative, 0.9),
            sustained_crossing(&curves.mc_equal, 0.9),
        );
        for (g, c) in &curves.mc_heuristic {
            println!("  heuristic g={g}: {:?}", sustained_crossing(c, 0.9));
        }
        println!("global choice tuples (it 4..=8):");
        for i in 3..8.min(curves.global_choice.len()) {
            println!("  it {:2}: {:?}", i + 1, curves.global_choice[i]);
        }
        println!("iterative path (it 4..=8):");
        for i in 3..8.min(curves.iterative_path.len()) {
            println!("  it {:2}: {:?}", i + 1, curves.iterative_path[i]);
        }
    }
}
