//! Real block normal forms of isometries and adjoint abelian operators.

use minkkit::spectral::{isometry_normal_form, real_block_decomposition, reconstruct, Block};
use minkkit::{LinearOperator, NormModel, SipContext};

fn describe(blocks: &[Block]) {
    for b in blocks {
        match b {
            Block::Real1D { lambda, .. } => println!("  real eigenvalue {lambda:+.6}"),
            Block::Plane2D { modulus, angle, .. } => println!("  plane block: modulus {modulus:.6}, angle {angle:.6}"),
        }
    }
}

fn main() -> minkkit::Result<()> {
    let a = LinearOperator::from_rows(3, &[1.0, 2.0, 0.0, -1.0, 1.0, 0.5, 0.0, 0.0, 3.0])?;
    let nf = real_block_decomposition(&a, 1e-9)?;
    println!("generic operator (residual {:.1e}):", nf.residual);
    describe(&nf.blocks);
    let back = reconstruct(&nf)?;
    println!("  reconstruction error {:.1e}", (back.matrix() - a.matrix()).amax());

    let ctx = SipContext::new(NormModel::lp(4.0, 2)?);
    let quarter_turn = LinearOperator::from_rows(2, &[0.0, 1.0, -1.0, 0.0])?;
    let vnf = isometry_normal_form(&ctx, &quarter_turn, 1e-8)?;
    println!("quarter turn in l4:");
    describe(&vnf.normal_form.blocks);
    for plane in &vnf.planes {
        let (p, q) = plane.auerbach.pair();
        println!("  Auerbach pair {:?}, {:?} (residual {:.1e})", p.as_slice(), q.as_slice(), plane.auerbach.residual());
    }

    let ctx3 = SipContext::new(NormModel::lp(4.0, 3)?);
    let swap = LinearOperator::from_rows(3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0])?;
    let vnf = isometry_normal_form(&ctx3, &swap, 1e-8)?;
    println!("coordinate swap in l4 (3-D): {} fixed, {} reflected", vnf.fixed_count, vnf.reflected_count);
    for r in &vnf.orthogonality {
        println!("  blocks {} and {}: orthogonality residual {:.1e}", r.first, r.second, r.residual);
    }
    Ok(())
}
