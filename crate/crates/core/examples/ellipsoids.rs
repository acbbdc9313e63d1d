//! Löwner and John ellipsoids, contact points and the collared ball.

use minkkit::ellipsoid::{contact_points, john, largest_coplanar_group, lowner, RemarkBody};
use minkkit::{NormModel, Vector};

fn main() -> minkkit::Result<()> {
    let square: Vec<Vector> = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|&(x, y)| Vector::from_vec(vec![x, y]))
        .collect();
    let l = lowner(&square, 1e-9)?;
    println!("Löwner ellipse of the square: semi-axes {:?}", l.semi_axes());

    let cross = NormModel::named_polytope("cross3")?;
    let j = john(&cross, 1e-9)?;
    println!("John ellipsoid of the octahedron: semi-axes {:?}", j.semi_axes());
    println!("  {} contact points", contact_points(&cross, &j, 2000, 1e-6).len());

    let l4 = NormModel::lp(4.0, 2)?;
    let j = john(&l4, 1e-9)?;
    println!("John ellipse of the l4 ball: semi-axes {:?}", j.semi_axes());

    let body = RemarkBody::new(16, 0.05)?;
    let j = john(&body, 1e-7)?;
    let contacts = contact_points(&body, &j, 4096, 1e-3);
    println!("ball with a 32-gon collar: John shape\n{}", j.shape);
    if let Some(g) = largest_coplanar_group(&contacts, &j, 1e-6) {
        println!("  {} contacts, {} of them on the plane {:?}·x = {:.4}", contacts.len(), g.count, g.normal.as_slice(), g.offset);
    }
    Ok(())
}
