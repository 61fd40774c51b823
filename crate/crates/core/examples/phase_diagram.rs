//! ASCII phase diagram: u_minus runs down the rows, u_plus across.

use std::collections::BTreeMap;

use ncr::riemann::phase_diagram_grid;
use ncr::ModelParams;

fn main() -> ncr::Result<()> {
    let b: f64 = std::env::args().nth(1).map(|a| a.parse().expect("b")).unwrap_or(0.08);
    let grid = phase_diagram_grid(&ModelParams::from_b(b, 0.0)?, 41)?;
    let glyph = |l: Option<ncr::PhaseLabel>| match l.map(|l| l.as_str()) {
        None => '.',
        Some("S") => 's',
        Some("R") => 'r',
        Some("RS") => 'A',
        Some("SR") => 'B',
        Some("RSR") => 'X',
        Some(_) => 'Y',
    };
    let mut counts = BTreeMap::new();
    for row in &grid {
        println!("{}", row.iter().map(|&l| glyph(l)).collect::<String>());
        for &l in row {
            *counts.entry(l.map_or("NONE", |l| l.as_str())).or_insert(0) += 1;
        }
    }
    println!("s=S r=R A=RS B=SR X=RSR Y=SRS .=diagonal");
    println!("{counts:?}");
    Ok(())
}
