//! Isometry groups of polytopal and quadratic unit balls.

use minkkit::symmetry::{group_report, orbit_probe, polytopal_isometry_group};
use minkkit::{Matrix, NormModel, Vector};

fn main() -> minkkit::Result<()> {
    for name in ["square", "hexagon", "octagon", "cube3", "cross3"] {
        let model = NormModel::named_polytope(name)?;
        let report = group_report(&model, 1e-9)?;
        println!("{name:>8}: order {:?}, {}", report.order, report.classification);
    }

    let hexagon = NormModel::named_polytope("hexagon")?;
    let NormModel::Polytopal(p) = &hexagon else { unreachable!() };
    let group = polytopal_isometry_group(p.vertices(), 1e-9)?;
    let orbit = orbit_probe(&hexagon, &Vector::from_vec(vec![0.3, 0.1]), &group)?;
    println!("generic orbit in the hexagon plane has {} points", orbit.len());

    let ellipse = NormModel::quadratic(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]))?;
    let report = group_report(&ellipse, 1e-9)?;
    println!("ellipse: {} ({})", report.classification, report.semidirect.point_stabilizer);
    Ok(())
}
