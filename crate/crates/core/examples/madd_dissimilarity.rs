//! Base distances and the MADD matrix on a handful of projected points.
//!
//! ```text
//! cargo run --example madd_dissimilarity
//! ```

use terp::madd::distance_matrix;
use terp::{base_distance, madd_matrix, ProjectedMatrix};

fn main() -> terp::Result<()> {
    // two tight groups in three projected coordinates
    let rows = vec![
        vec![0.0, 0.1, -0.2],
        vec![0.1, 0.0, -0.1],
        vec![-0.1, 0.2, 0.0],
        vec![2.0, 1.5, 1.8],
        vec![2.2, 1.4, 2.0],
    ];
    let p = ProjectedMatrix::from_rows(&rows)?;
    println!("d(0, 1) = {:.4}", base_distance(&rows[0], &rows[1])?);
    println!("d(0, 3) = {:.4}", base_distance(&rows[0], &rows[3])?);

    let d = distance_matrix(&p);
    let rho = madd_matrix(&p)?;
    println!("\nbase distances:");
    print_matrix(d.row_iter().map(|r| r.iter().copied().collect()));
    println!("\nMADD:");
    print_matrix(rho.matrix().row_iter().map(|r| r.iter().copied().collect()));
    Ok(())
}

fn print_matrix(rows: impl Iterator<Item = Vec<f64>>) {
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:6.3}")).collect();
        println!("  {}", cells.join(" "));
    }
}
