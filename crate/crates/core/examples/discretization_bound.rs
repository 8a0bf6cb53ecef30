//! How much received power can vary inside one grid cell, as a function of
//! the charger distance and the cell edge.

use beamcharge::geometry::{discretization_ratio_bound, BeamSectorGeometry, Point};

fn main() -> beamcharge::Result<()> {
    let charger = Point::new(0.0, 0.0);
    println!("{:>6} {:>6} {:>10}", "d1", "eps", "max/min");
    for d1 in [1.0, 2.0, 4.0, 8.0] {
        for eps in [0.25, 0.5, 1.0] {
            let center = Point::new(0.0, d1);
            let geom = BeamSectorGeometry::for_cell(
                charger,
                center,
                eps,
                std::f64::consts::FRAC_PI_2,
                2.0,
            )?;
            match discretization_ratio_bound(&geom, eps) {
                Ok(b) => println!("{d1:>6} {eps:>6} {b:>10.3}"),
                Err(e) => println!("{d1:>6} {eps:>6} {:>10}  ({e})", "-"),
            }
        }
    }
    Ok(())
}
