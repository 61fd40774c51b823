//! Writes a simulated profile to CSV, reads it back and scores it against
//! both the closed form and the finite-volume solution.

use ncr::fvm::{fvm_solve, FvmConfig};
use ncr::io::{parse_profile_csv, profiles_to_csv, ProfileTable};
use ncr::sim::{self, SimConfig};
use ncr::{ModelParams, RiemannProblem, RiemannSolution};

fn main() -> ncr::Result<()> {
    let p = ModelParams::from_b(0.08, 0.0)?;
    let (um, up) = (-0.3, 0.9);
    let mut cfg = SimConfig::new(p, 400, 1.0, um, up);
    cfg.replicas = 8;
    cfg.bin_width = 0.05;
    let out = sim::run(&cfg)?;
    let csv = profiles_to_csv(&out.profiles.iter().map(ProfileTable::from_empirical).collect::<Vec<_>>());
    let table = parse_profile_csv(&csv)?.remove(0);

    let sol = RiemannSolution::new(RiemannProblem::new(um, up, p)?)?;
    let fvm = fvm_solve(&FvmConfig::new(p, um, up, 2000))?;
    let fvm_at = |x: f64| {
        let i = (((x - fvm.centers[0]) / fvm.dx).round() as usize).min(fvm.centers.len() - 1);
        fvm.densities[i]
    };
    let (mut to_exact, mut to_fvm) = (0.0, 0.0);
    for (x, u) in table.x.iter().zip(&table.u) {
        to_exact += (u - sol.density(*x, 1.0)?).abs() * cfg.bin_width;
        to_fvm += (u - fvm_at(*x)).abs() * cfg.bin_width;
    }
    println!("label {}  L1 to closed form {to_exact:.4}  L1 to Godunov {to_fvm:.4}", sol.label().as_str());
    Ok(())
}
