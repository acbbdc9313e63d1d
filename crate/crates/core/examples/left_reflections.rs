//! Left reflections: construction, compositions and the Euclidean battery.

use minkkit::reflect::{classify_composition, compose, euclidean_battery, left_reflection, LineSpec};
use minkkit::{Matrix, NormModel, SipContext, Vector};

fn main() -> minkkit::Result<()> {
    let l4 = SipContext::new(NormModel::lp(4.0, 2)?);
    let ellipse = SipContext::new(NormModel::quadratic(Matrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]))?);

    let g = LineSpec::through_origin(0.4);
    let r = left_reflection(&l4, &g, 1e-10)?;
    println!("reflection in the 0.4 rad line of l4:\n{}", r.linear);
    println!("  det {:.9}, involution error {:.1e}", r.linear.determinant(), (r.then(&r).linear - Matrix::identity(2, 2)).amax());

    let parallel = LineSpec::line(Vector::from_vec(vec![0.0, 1.0]), g.directions[0].clone())?;
    let r2 = left_reflection(&l4, &parallel, 1e-10)?;
    let two = compose(&[r.clone(), r2.clone()])?;
    println!("two parallel reflections: {:?}", classify_composition(&l4, &two, 1e-8)?);
    let third = LineSpec::line(Vector::from_vec(vec![0.0, -0.7]), g.directions[0].clone())?;
    let three = compose(&[r.clone(), r2, left_reflection(&l4, &third, 1e-10)?])?;
    println!("three parallel reflections: {:?}", classify_composition(&l4, &three, 1e-8)?);
    let crossing = compose(&[r, left_reflection(&l4, &LineSpec::through_origin(1.3), 1e-10)?])?;
    println!("two crossing reflections: {:?}", classify_composition(&l4, &crossing, 1e-8)?);

    for (name, ctx) in [("ellipse", &ellipse), ("l4", &l4)] {
        let report = euclidean_battery(ctx, 8, 1e-7)?;
        println!("battery on {name}:");
        for c in report.criteria() {
            println!("  {:<26} {}/{} (worst defect {:.2e})", c.name, c.passed, c.trials, c.worst_defect);
        }
    }
    Ok(())
}
