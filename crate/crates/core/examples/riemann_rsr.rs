//! The (1, -1) Riemann problem: three waves with a standing shock, plus a
//! coarse profile at t = 1.

use ncr::{ModelParams, RiemannProblem, RiemannSolution};

fn main() -> ncr::Result<()> {
    let p = ModelParams::from_b(0.08, 0.0)?;
    let sol = RiemannSolution::new(RiemannProblem::new(1.0, -1.0, p)?)?;
    println!("label {}", sol.label().as_str());
    print!("{}", sol.structure().to_record());
    for k in 0..=16 {
        let x = -0.8 + 0.1 * k as f64;
        println!("x={x:+.2}  u={:+.6}", sol.density(x, 1.0)?);
    }
    Ok(())
}
