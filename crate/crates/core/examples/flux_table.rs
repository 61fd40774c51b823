//! Tabulates G and H over [-1, 1] and prints the special points.
//!
//! cargo run --example flux_table -- 0.08 0.3

use ncr::flux::{flux_h, special_points};
use ncr::{ModelParams, SymmetricFlux};

fn main() -> ncr::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let b = args.next().unwrap_or(0.08);
    let d = args.next().unwrap_or(0.0);
    let sym = ModelParams::from_b(b, 0.0)?;
    let full = ModelParams::from_b(b, d)?;
    let g = SymmetricFlux::new(b);

    println!("# b={b} d={d} class={:?}", g.convexity_class());
    if let Ok(sp) = special_points(&sym) {
        println!(
            "# v_infl={:.6} v_max={:.6} v_zero={:.6} g_max={:.6}",
            sp.v_infl, sp.v_max, sp.v_zero, sp.g_max
        );
    }
    println!("v,G,H");
    for k in 0..=20 {
        let v = -1.0 + 0.1 * k as f64;
        println!("{v:.2},{:.8},{:.8}", g.value(v), flux_h(v, &full));
    }
    Ok(())
}
