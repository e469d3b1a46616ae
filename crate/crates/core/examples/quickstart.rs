//! Build a frame, verify its connection, then verify a closed-form
//! Yang-Mills solution (the README walkthrough).

use cliffym::fixtures::{build_frame, make_rng, sample_points, FrameRecipe};
use cliffym::{BaseSpace, Connection, FrameKind, Signature, YangMillsField};

fn main() -> cliffym::Result<()> {
    let sig = Signature::new(3, 0)?;
    let base = BaseSpace::new(3, 0)?;
    let recipe = FrameRecipe::Gauge { degree: 2, magnitude: 0.35 };
    let (frame, _) = build_frame::<f64>(recipe, sig, base, FrameKind::Vector, &mut make_rng(7))?;

    let conn = Connection::new(frame);
    let points = sample_points::<f64>(base, 4, &mut make_rng(8));
    assert!(conn.verify(&points)?.max_residual() < 1e-8);

    let ym = YangMillsField::sigma_family(&conn, 1.0)?;
    assert!(ym.verify(&points)?.max_residual() < 1e-7);

    println!("connection and sigma-family solution verified");
    Ok(())
}
