//! Generalized adjoints and the operator predicates, including the rotation
//! of an ellipse that is an isometry without being adjoint abelian.

use std::f64::consts::PI;

use minkkit::operators::{
    ellipse_example_operator, ellipse_rotation, gen_adjoint_apply, is_adjoint_abelian, is_isometry, is_self_adjoint,
    iso_abelian_check,
};
use minkkit::{LinearOperator, Matrix, NormModel, Sampling, SipContext, Vector};

fn main() -> minkkit::Result<()> {
    let (a, b) = (2.0, 1.0);
    // the ellipse (x/a)² + (y/b)² = 1 as a quadratic unit ball
    let ctx = SipContext::new(NormModel::quadratic(Matrix::from_row_slice(2, 2, &[1.0 / (a * a), 0.0, 0.0, 1.0 / (b * b)]))?);
    let sampling = Sampling::default();

    for phi in [PI / 6.0, PI / 2.0] {
        let f = ellipse_rotation(a, b, phi);
        let iso = is_isometry(&ctx, &f, sampling, 1e-9)?;
        let aa = is_adjoint_abelian(&ctx, &f, sampling, 1e-9)?;
        println!("φ = {phi:.4}: isometry {} ({:.1e}), adjoint abelian {} ({:.3})", iso.verdict, iso.max_residual, aa.verdict, aa.max_residual);

        // the operator as printed, evaluated on e = (1,0), f = (0,1)
        let printed = ellipse_example_operator(a, b, phi);
        let (e, f) = (Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0]));
        let p_iso = is_isometry(&ctx, &printed, sampling, 1e-9)?;
        println!(
            "  printed form: isometry {} ({:.3}), [F(e),f] = {:.6}, [e,F(f)] = {:.6}",
            p_iso.verdict,
            p_iso.max_residual,
            ctx.sip(&printed.apply(&e), &f)?,
            ctx.sip(&e, &printed.apply(&f))?,
        );
    }

    let lp = SipContext::new(NormModel::lp(4.0, 2)?);
    let shear = LinearOperator::from_rows(2, &[1.0, 0.3, 0.0, 1.0])?;
    let y = Vector::from_vec(vec![1.0, -2.0]);
    println!("Aᵀ(y) in l4 for a shear: {:?}", gen_adjoint_apply(&lp, &shear, &y)?.as_slice());

    let diag = LinearOperator::from_rows(2, &[2.0, 0.0, 0.0, 3.0])?;
    println!("diag(2,3) self-adjoint in l4: {}", is_self_adjoint(&lp, &diag, sampling, 1e-9)?.verdict);
    let swap = LinearOperator::from_rows(2, &[0.0, 1.0, 1.0, 0.0])?;
    let report = iso_abelian_check(&lp, &swap, sampling, 1e-9)?;
    println!("coordinate swap iso-abelian in l4: {} (agrees with isometry test: {})", report.report.verdict, report.consistent);
    Ok(())
}
