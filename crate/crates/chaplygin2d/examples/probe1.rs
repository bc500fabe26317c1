// Benchmark integrator rates at sweep resolutions.
use chaplygin2d::*;
use std::sync::Arc;

fn main() {
    for (kind, n) in [("poly", 104_000usize), ("chap", 104_000), ("chap", 4533)] {
        let model = if kind == "poly" {
            eos::GasModel::polytropic(1.4, 1.0, 0.0, 1.0).unwrap()
        } else {
            eos::GasModel::chaplygin(2.0, 1.0, 0.0, 1.0).unwrap()
        };
        let grid = Arc::new(mesh::build_grid(26.0, n).unwrap());
        let mut fs = solver::init_state(&solver::InitialProfiles::new(0.1, 1.0), grid.clone(), model).unwrap();
        let t0 = std::time::Instant::now();
        let mut steps = 0usize;
        while steps < 600 {
            let dt = solver::cfl_dt(&fs, 0.4).unwrap();
            let prev = fs.clone();
            fs = solver::step(&fs, dt, 0.4).unwrap();
            let (_, _m) = solver::detect_blowup(&fs, 1e9);
            let _ = prev;
            steps += 1;
        }
        let dt_wall = t0.elapsed().as_secs_f64();
        println!("{kind} N={n}: {:.1} ns/cell-stage ({:.0} steps/s)", dt_wall/ (steps as f64 * 4.0 * n as f64) * 1e9, steps as f64/dt_wall);
    }
}
