use oampump::dynamics::*;
use oampump::model::*;
use std::time::Instant;

fn main() {
    let p = RiceMeleParams::new(5.0, 1.0).unwrap();
    let cfg = LatticeConfig::centered(0);
    let sched = default_pump_loop(21.0, Orientation::Clockwise)
        .unwrap()
        .with_half_cycles(4);
    let w = wannier_state(&cfg, &p, &sched, Band::Lower, 0).unwrap();
    let samples: Vec<f64> = (1..=4).map(|m| m as f64 * 10.5).collect();
    let t0 = Instant::now();
    let traj = evolve(&w, &sched, &p, &cfg, None, &samples, &EvolveOptions::default()).unwrap();
    println!("auto: mean_l = {:?} in {:?}", traj.mean_site(), t0.elapsed());
    let s = traj.state_at(21.0).unwrap();
    println!("P2 after 1 cycle = {:.6}", s.population(2));

    // disorder trial cost
    let t0 = Instant::now();
    let shift: Vec<f64> = (0..cfg.site_count()).map(|i| 0.05 * (i as f64 * 0.7).sin()).collect();
    let one = default_pump_loop(21.0, Orientation::Clockwise).unwrap();
    let _ = evolve(&w, &one, &p, &cfg, Some(&shift), &[21.0], &EvolveOptions::default()).unwrap();
    println!("one disordered cycle in {:?}", t0.elapsed());
}
