//! Concave and convex envelopes of G over an interval, piece by piece.

use ncr::envelope::{concave_envelope, convex_envelope, Envelope, PieceKind};
use ncr::ModelParams;

fn show(name: &str, env: &Envelope) {
    println!("{name} on {:?}:", env.interval());
    for piece in env.pieces() {
        match piece.kind {
            PieceKind::FollowsFlux => println!("  [{:+.5}, {:+.5}] follows G", piece.lo, piece.hi),
            PieceKind::Linear { slope } => {
                println!("  [{:+.5}, {:+.5}] chord, slope {slope:+.6}", piece.lo, piece.hi)
            }
        }
    }
}

fn main() -> ncr::Result<()> {
    let p = ModelParams::from_b(0.08, 0.0)?;
    show("concave", &concave_envelope(-1.0, 1.0, &p)?);
    show("convex", &convex_envelope(-1.0, 1.0, &p)?);
    show("concave", &concave_envelope(-0.1, 0.9, &p)?);
    Ok(())
}
