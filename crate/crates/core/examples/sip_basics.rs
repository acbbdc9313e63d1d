//! Semi-inner products and norm derivatives on the three kinds of norm.

use minkkit::{NormModel, Side, SipContext, Vector};

fn main() -> minkkit::Result<()> {
    let u = Vector::from_vec(vec![1.0, 2.0]);
    let v = Vector::from_vec(vec![-0.5, 1.5]);

    for model in [
        NormModel::lp(3.0, 2)?,
        NormModel::quadratic(minkkit::Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]))?,
        NormModel::named_polytope("hexagon")?,
    ] {
        let ctx = SipContext::new(model);
        println!("{:?}", ctx.model().classify());
        println!("  ‖u‖ = {:.6}, ‖v‖ = {:.6}", ctx.norm(&u), ctx.norm(&v));
        println!(
            "  ρ'+(u,v) = {:.9} (finite differences {:.9})",
            ctx.rho_plus(&u, &v)?,
            ctx.rho_fd(&u, &v, Side::Plus)
        );
        println!("  ρ'-(u,v) = {:.9}", ctx.rho_minus(&u, &v)?);
        match ctx.sip(&u, &v) {
            Ok(s) => {
                println!("  [u,v] = {s:.9}, [u,u] = {:.9} = ‖u‖²", ctx.sip(&u, &u)?);
                let j = ctx.duality_map(&v)?;
                println!("  duality map of v: {:?}", j.as_slice());
                let back = ctx.riesz_representer(&j)?;
                println!("  Riesz representer recovers v: {:?}", back.as_slice());
            }
            Err(e) => println!("  no semi-inner product: {e}"),
        }
    }
    Ok(())
}
