//! Two chargers aiming at the same sensor. Amplitudes add before squaring, so
//! with independent fades the combined power can land above or below the sum
//! of the individual powers.

use beamcharge::channel::{
    mean_channel, received_power, sample_csi, steering_codeword, superposed_power, UlaConfig,
};
use beamcharge::geometry::{bearing, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> beamcharge::Result<()> {
    let ula = UlaConfig::default();
    let sensor = Point::new(0.0, 0.0);
    let a = Point::new(-2.0, -1.0);
    let b = Point::new(2.5, -1.5);
    let cw_a = steering_codeword(bearing(a, sensor), &ula);
    let cw_b = steering_codeword(bearing(b, sensor), &ula);
    let mean_a = mean_channel(sensor, 1.0, a, &ula)?;
    let mean_b = mean_channel(sensor, 1.0, b, &ula)?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..8 {
        let h_a = sample_csi(&mean_a, &mut rng).realized;
        let h_b = sample_csi(&mean_b, &mut rng).realized;
        let pa = received_power(&h_a, &cw_a)?;
        let pb = received_power(&h_b, &cw_b)?;
        let both = superposed_power(&[(&h_a, &cw_a), (&h_b, &cw_b)])?;
        let tag = if both > pa + pb {
            "constructive"
        } else {
            "destructive"
        };
        println!(
            "{pa:>7.3} + {pb:>7.3} = {:>7.3}   together {both:>7.3}  {tag}",
            pa + pb
        );
    }
    Ok(())
}
