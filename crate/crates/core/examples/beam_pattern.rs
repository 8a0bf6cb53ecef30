//! Prints the power pattern of a 4-beam codebook and checks that a sensor sitting
//! on a beam axis receives the full array gain N_a A^2 / d^2.

use std::f64::consts::PI;

use beamcharge::channel::{array_factor, build_codebook, expected_power, UlaConfig};
use beamcharge::geometry::Point;

fn main() -> beamcharge::Result<()> {
    let ula = UlaConfig::default();
    let book = build_codebook(4, &ula)?;

    println!(
        "angle_deg  {}",
        (0..book.len())
            .map(|k| format!("beam{k:<6}"))
            .collect::<String>()
    );
    for step in 0..=18 {
        let a = step as f64 * PI / 18.0;
        let row: String = book
            .entries()
            .iter()
            .map(|cw| format!("{:>10.3}", array_factor(a.cos(), cw, &ula)))
            .collect();
        println!("{:>9.0}{row}", a.to_degrees());
    }

    let charger = Point::new(0.0, 0.0);
    for cw in book.entries() {
        let d = 3.0;
        let sensor = Point::new(d * cw.beam_angle.cos(), d * cw.beam_angle.sin());
        let p = expected_power(sensor, 1.0, charger, cw, &ula)?;
        println!(
            "beam at {:>5.1} deg, sensor on axis at {d} m: {p:.4} (N_a/d^2 = {:.4})",
            cw.beam_angle.to_degrees(),
            ula.n_antennas as f64 / (d * d)
        );
    }
    Ok(())
}
