//! The sign functions showing that no generalized rotation of planar l_p
//! (p ≠ 2) is adjoint abelian.

use minkkit::operators::{lp_rotation_scan, phi_grid_from_tangents, rotation_branch_one};

fn main() -> minkkit::Result<()> {
    let ps: Vec<f64> = (0..=20).map(|i| 1.1 + i as f64 * 0.445).collect();
    let tangents: Vec<f64> = (0..=20).map(|j| 0.05 + j as f64 * 0.0425).collect();
    let table = lp_rotation_scan(&ps, &phi_grid_from_tangents(&tangents))?;
    println!("{} grid points, all positive: {}", table.rows.len(), table.all_positive);
    println!("smallest values: {:?} / {:?}", table.min_branch_one, table.min_branch_two);
    for t in [0.1, 0.5, 0.9] {
        println!("tan φ = {t}: f(2) = {:.12} (2 tan φ), f(50) = {:.6}", rotation_branch_one(2.0, t), rotation_branch_one(50.0, t));
    }
    Ok(())
}
