use scmudd::de::{find_threshold, run_de, DeConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(|s| s.as_str()).unwrap_or("fig3");
    match which {
        "fig3" => {
            for (snr, w) in [(2.47, 2usize), (2.46, 2), (2.93, 1)] {
                let cfg = DeConfig {
                    coupling_width: w,
                    chain_length: 64,
                    ..DeConfig::default()
                }
                .with_snr_db(snr);
                let t = Instant::now();
                let traj = run_de(&cfg).unwrap();
                println!(
                    "W={w} snr={snr}: conv={} iters={} minME={:.6} [{:.1}s]",
                    traj.converged,
                    traj.outer_iterations,
                    traj.final_state().min_me(),
                    t.elapsed().as_secs_f64()
                );
            }
        }
        kind => {
            let w: usize = args[2].parse().unwrap();
            let sched = if kind == "sw" { "sliding-window" } else { "parallel" };
            let cfg = DeConfig {
                coupling_width: w,
                chain_length: if w == 1 { 4 } else { 64 },
                scheduling: sched.into(),
                ..DeConfig::default()
            };
            let t = Instant::now();
            let rep = find_threshold(&cfg, (2.0, 3.4), 0.01).unwrap();
            println!(
                "{sched} W={w}: threshold {:.4} dB  ({} probes, {:.1}s)",
                rep.threshold_db,
                rep.probes.len(),
                t.elapsed().as_secs_f64()
            );
        }
    }
}
