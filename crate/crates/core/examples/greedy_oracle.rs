//! One charging round with known expected powers: greedy utility schedule,
//! the max-energy baseline, the lazy variant and the continuous upper bound.

use beamcharge::energy::{UtilityKind, UtilitySpec};
use beamcharge::oracle::{
    exhaustive_optimum, gmq, gua, gua_lazy, schedule_value, upper_bound_p1, ExpectedPowerMatrix,
    RoundParams,
};

fn main() -> beamcharge::Result<()> {
    // Three stops; the last one is a compromise beam covering both sensors.
    let powers =
        ExpectedPowerMatrix::from_rows(&[vec![0.95, 0.05], vec![0.05, 0.60], vec![0.55, 0.45]])?;
    let initial = [5.0, 60.0];
    let spec = UtilitySpec::new(UtilityKind::U1, 2)?;
    let params = RoundParams {
        n_slots: 8,
        slot_duration: 1.0,
        deadline: 8.0,
        zeta: 2.0,
        capacity: 100.0,
        power_scale: 8.0,
    };

    let greedy = gua(&powers, &initial, &spec, &params)?;
    let lazy = gua_lazy(&powers, &initial, &spec, &params)?;
    let baseline = gmq(&powers, &params)?;
    let (alloc, ub) = upper_bound_p1(&powers, &initial, &spec, &params)?;
    let (best, opt) = exhaustive_optimum(&powers, &initial, &spec, &params)?;

    let v = |s| schedule_value(&powers, &initial, &spec, &params, s);
    println!("gua      {:?}  utility {:.3}", greedy.slots, v(&greedy)?);
    println!("lazy     {:?}  same: {}", lazy.slots, lazy == greedy);
    println!(
        "gmq      {:?}  utility {:.3}",
        baseline.slots,
        v(&baseline)?
    );
    println!("optimum  {:?}  utility {opt:.3}", best.slots);
    println!(
        "p1 bound {ub:.3} with times {:?}",
        alloc
            .t
            .iter()
            .map(|t| format!("{t:.2}"))
            .collect::<Vec<_>>()
    );
    Ok(())
}
