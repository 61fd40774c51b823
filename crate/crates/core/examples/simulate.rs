//! Microscopic run of the (1, -1) step compared bin by bin with the
//! hydrodynamic limit. Run with RUST_LOG=info for per-replica lines.

use ncr::sim::{self, SimConfig};
use ncr::{ModelParams, RiemannProblem, RiemannSolution};

fn main() -> ncr::Result<()> {
    env_logger::init();
    let p = ModelParams::from_b(0.08, 0.0)?;
    let mut cfg = SimConfig::new(p, 500, 1.0, 1.0, -1.0);
    cfg.replicas = 8;
    cfg.seed = 1;
    cfg.bin_width = 0.1;
    let out = sim::run(&cfg)?;
    let sol = RiemannSolution::new(RiemannProblem::new(1.0, -1.0, p)?)?;
    let prof = &out.profiles[0];
    let mut l1 = 0.0;
    for (x, u) in prof.bin_centers.iter().zip(&prof.densities) {
        let exact = sol.cell_average(x - 0.05, x + 0.05, 1.0)?;
        l1 += (u - exact).abs() * cfg.bin_width;
        println!("x={x:+.2}  sim={u:+.4}  exact={exact:+.4}");
    }
    println!("L1 {l1:.4}, {} events on {} sites", out.total_events(), out.layout.len);
    Ok(())
}
