//! Godunov scheme against the closed form under grid refinement.

use ncr::fvm::{fvm_solve, FvmConfig};
use ncr::{ModelParams, RiemannProblem, RiemannSolution};

fn main() -> ncr::Result<()> {
    let p = ModelParams::from_b(0.08, 0.0)?;
    let sol = RiemannSolution::new(RiemannProblem::new(1.0, -1.0, p)?)?;
    for cells in [250, 500, 1000, 2000, 4000] {
        let prof = fvm_solve(&FvmConfig::new(p, 1.0, -1.0, cells))?;
        let mut l1 = 0.0;
        for (x, u) in prof.centers.iter().zip(&prof.densities) {
            l1 += (u - sol.density(*x, prof.time)?).abs() * prof.dx;
        }
        println!("cells={cells:5}  steps={:5}  L1={l1:.5}", prof.steps);
    }
    Ok(())
}
