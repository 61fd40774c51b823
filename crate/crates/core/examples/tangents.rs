//! Tangent constructions on a mixed flux: tangency points seen from a
//! density and where each tangent line cuts the graph again.

use ncr::envelope::{tangent_intersections, tangent_points_from};
use ncr::ModelParams;

fn main() -> ncr::Result<()> {
    let p = ModelParams::from_b(0.08, 0.0)?;
    let sp = p.symmetric_flux()?.special_points()?;
    println!("v_infl = {:.6}", sp.v_infl);
    for v in [1.0, 0.9, sp.v_zero, 0.6, sp.v_max] {
        match tangent_points_from(v, &p)? {
            Some(tp) => {
                let ti = tangent_intersections(tp.v_e_near, &p)?;
                println!(
                    "v={v:.4}  v_e near={:+.6} far={:+.6}  tangent at near point meets G at {:+.6} / {:+.6}",
                    tp.v_e_near, tp.v_e_far, ti.v_m_minus, ti.v_m_plus
                );
            }
            None => println!("v={v:.4}  no tangent through this point"),
        }
    }
    Ok(())
}
