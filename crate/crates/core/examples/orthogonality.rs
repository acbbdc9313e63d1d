//! Birkhoff and James orthogonality in a few planes.

use minkkit::ortho::{birkhoff, birkhoff_direction, james};
use minkkit::{NormModel, SipContext, Vector};

fn main() -> minkkit::Result<()> {
    let x = Vector::from_vec(vec![1.0, 0.0]);
    let y = Vector::from_vec(vec![0.0, 1.0]);
    let d = Vector::from_vec(vec![1.0, 1.0]);
    for model in [NormModel::lp(2.0, 2)?, NormModel::lp(4.0, 2)?, NormModel::named_polytope("square")?] {
        let ctx = SipContext::new(model);
        let b = birkhoff(&ctx, &x, &y, 1e-9)?;
        let bd = birkhoff(&ctx, &d, &(&y - &x), 1e-9)?;
        println!("{:?}", ctx.model().classify());
        println!("  e1 ⊥B e2: {} (margin {:.2e})", b.orthogonal, b.margin);
        println!("  (1,1) ⊥B (-1,1): {}, James: {}", bd.orthogonal, james(&ctx, &d, &(&y - &x), 1e-9)?);
        if let Ok(dir) = birkhoff_direction(&ctx, &d, 1e-12) {
            println!("  direction Birkhoff orthogonal to (1,1): {:?}", dir.as_slice());
        }
    }
    Ok(())
}
