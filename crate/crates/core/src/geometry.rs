//! Field discretization into candidate charger stops, and the bound on how much
//! received power can vary inside one grid cell.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that the field is an integer number of cells.
const DIVISIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

/// Rectangular field split into square cells of edge `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Area {
    width: f64,
    height: f64,
    epsilon: f64,
}

impl Area {
    pub fn new(width: f64, height: f64, epsilon: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0) {
            return Err(Error::Config(format!(
                "area dimensions must be positive, got {width} x {height}"
            )));
        }
        if !(epsilon > 0.0 && epsilon <= width.min(height)) {
            return Err(Error::Config(format!(
                "grid edge {epsilon} must lie in (0, {}]",
                width.min(height)
            )));
        }
        for (name, side) in [("width", width), ("height", height)] {
            let cells = side / epsilon;
            if (cells - cells.round()).abs() > DIVISIBILITY_TOL * cells.max(1.0) {
                return Err(Error::Config(format!(
                    "{name} {side} is not an integer multiple of grid edge {epsilon}"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            epsilon,
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn columns(&self) -> usize {
        (self.width / self.epsilon).round() as usize
    }

    pub fn rows(&self) -> usize {
        (self.height / self.epsilon).round() as usize
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

/// A candidate stop for the charger: the center of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLocation {
    pub index: usize,
    pub center: Point,
}

/// Cell centers in row-major order (x varies fastest).
pub fn build_grid(area: &Area) -> Vec<GridLocation> {
    let (cols, rows) = (area.columns(), area.rows());
    let eps = area.epsilon;
    (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .enumerate()
        .map(|(index, (r, c))| GridLocation {
            index,
            center: Point::new((c as f64 + 0.5) * eps, (r as f64 + 0.5) * eps),
        })
        .collect()
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Angle of the ray from `from` to `to`, measured from the +x axis, in (-pi, pi].
pub fn bearing(from: Point, to: Point) -> f64 {
    (to.y - from.y).atan2(to.x - from.x)
}

/// Worst-case distance from a cell center to one of its corners.
pub fn half_diagonal(epsilon: f64) -> f64 {
    SQRT_2 * epsilon / 2.0
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}

/// Edges of the main lobe around a beam direction, as absolute angles.
///
/// `null_lo`/`null_hi` are the first pattern minima on either side of the beam;
/// `drop_lo`/`drop_hi` are where the pattern falls to `1/gamma` of its peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorBounds {
    pub null_lo: f64,
    pub null_hi: f64,
    pub drop_lo: f64,
    pub drop_hi: f64,
}

/// Geometry of one grid cell seen from the charger along a beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSectorGeometry {
    /// Charger to cell-center distance.
    pub d1: f64,
    /// Bearing of the cell center.
    pub theta1: f64,
    /// Main beam direction.
    pub theta_m: f64,
    /// Smallest and largest corner bearings, unwrapped around `theta1`.
    pub theta_l: f64,
    pub theta_r: f64,
    /// Peak-to-edge power ratio of the main lobe across the cell.
    pub gamma: f64,
    pub bounds: Option<SectorBounds>,
}

impl BeamSectorGeometry {
    /// Builds the sector for an axis-aligned cell of edge `epsilon` centered at `center`.
    pub fn for_cell(
        charger: Point,
        center: Point,
        epsilon: f64,
        theta_m: f64,
        gamma: f64,
    ) -> Result<Self> {
        let d1 = distance(charger, center);
        if d1 == 0.0 {
            return Err(Error::Geometry("charger sits on the cell center".into()));
        }
        let theta1 = bearing(charger, center);
        let h = epsilon / 2.0;
        let corner_offsets = [(-h, -h), (h, -h), (h, h), (-h, h)].map(|(dx, dy)| {
            let corner = Point::new(center.x + dx, center.y + dy);
            wrap_angle(bearing(charger, corner) - theta1)
        });
        let lo = corner_offsets.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = corner_offsets
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            d1,
            theta1,
            theta_m: theta1 + wrap_angle(theta_m - theta1),
            theta_l: theta1 + lo,
            theta_r: theta1 + hi,
            gamma,
            bounds: None,
        })
    }

    pub fn with_bounds(mut self, bounds: SectorBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    /// True when the beam direction falls inside the cell's angular span.
    pub fn is_beam_covered(&self) -> bool {
        self.theta_l <= self.theta_m && self.theta_m <= self.theta_r
    }
}

/// Upper bound on max/min received power inside one grid cell:
/// `gamma * (d1 + sqrt(2) eps / 2)^2 / (d1 - sqrt(2) eps / 2)^2`.
pub fn discretization_ratio_bound(geom: &BeamSectorGeometry, epsilon: f64) -> Result<f64> {
    if !(geom.gamma > 1.25 && geom.gamma <= 2.5) {
        return Err(Error::Argument(format!(
            "gamma {} outside (1.25, 2.5]",
            geom.gamma
        )));
    }
    if epsilon < 0.0 {
        return Err(Error::Argument(format!("negative grid edge {epsilon}")));
    }
    let h = half_diagonal(epsilon);
    if geom.d1 <= h {
        return Err(Error::Geometry(format!(
            "charger and grid overlap: d1 = {} <= {h}",
            geom.d1
        )));
    }
    let ratio = (geom.d1 + h) / (geom.d1 - h);
    Ok(geom.gamma * ratio * ratio)
}

/// Checks that the charger is far enough from a sensor for the main lobe to
/// cover the whole cell, and that charger and sensor are in different cells.
///
/// Lobe angles are taken relative to the beam direction; a missing
/// [`SectorBounds`] means coverage cannot be established.
pub fn min_distance_ok(d_prime: f64, epsilon: f64, sector: &BeamSectorGeometry) -> bool {
    let h = half_diagonal(epsilon);
    if !(d_prime > 0.0) || sector.d1 <= h {
        return false;
    }
    let Some(b) = sector.bounds else {
        return false;
    };
    let sides = [
        (sector.theta_m - b.null_lo, sector.theta_m - b.drop_lo),
        (b.null_hi - sector.theta_m, b.drop_hi - sector.theta_m),
    ];
    let mut required = 0.0f64;
    for (null_off, drop_off) in sides {
        let (null_off, drop_off) = (null_off.abs(), drop_off.abs());
        let denom = (null_off - drop_off).sin();
        if !(denom > 0.0) || !null_off.is_finite() {
            return false;
        }
        required = required.max(h * (FRAC_PI_4 + null_off).sin() / denom);
    }
    d_prime > required
}

/// Locates the main-lobe edges of a power pattern around `theta_m`.
///
/// Walks outward in fixed angular steps, then refines each crossing by
/// bisection. Returns `None` if either side never drops below `peak / gamma`
/// within half a turn.
pub fn sector_bounds(
    pattern: impl Fn(f64) -> f64,
    theta_m: f64,
    gamma: f64,
) -> Option<SectorBounds> {
    const STEP: f64 = 1e-3;
    let peak = pattern(theta_m);
    if !(peak > 0.0) || !(gamma > 1.0) {
        return None;
    }
    let target = peak / gamma;
    let side = |dir: f64| -> Option<(f64, f64)> {
        let at = |k: f64| pattern(theta_m + dir * k);
        let mut k = 0.0;
        let mut prev = peak;
        let mut drop = None;
        while k < PI {
            let next = at(k + STEP);
            if drop.is_none() && next <= target {
                let (mut a, mut b) = (k, k + STEP);
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    if at(mid) > target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                drop = Some(0.5 * (a + b));
            }
            if drop.is_some() && next > prev {
                // Golden-section refine of the minimum bracketed by [k - STEP, k + STEP].
                let (mut a, mut b) = ((k - STEP).max(0.0), k + STEP);
                let g = (5f64.sqrt() - 1.0) / 2.0;
                for _ in 0..80 {
                    let c = b - g * (b - a);
                    let d = a + g * (b - a);
                    if at(c) < at(d) {
                        b = d;
                    } else {
                        a = c;
                    }
                }
                return Some((drop?, 0.5 * (a + b)));
            }
            prev = next;
            k += STEP;
        }
        drop.map(|d| (d, PI))
    };
    let (drop_hi, null_hi) = side(1.0)?;
    let (drop_lo, null_lo) = side(-1.0)?;
    Some(SectorBounds {
        null_lo: theta_m - null_lo,
        null_hi: theta_m + null_hi,
        drop_lo: theta_m - drop_lo,
        drop_hi: theta_m + drop_hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sector(d1: f64, gamma: f64) -> BeamSectorGeometry {
        BeamSectorGeometry {
            d1,
            theta1: 0.0,
            theta_m: 0.0,
            theta_l: -0.1,
            theta_r: 0.1,
            gamma,
            bounds: Some(SectorBounds {
                null_lo: -0.4,
                null_hi: 0.4,
                drop_lo: -0.2,
                drop_hi: 0.2,
            }),
        }
    }

    #[test]
    fn grid_counts() {
        assert_eq!(build_grid(&Area::new(20.0, 20.0, 0.5).unwrap()).len(), 1600);
        assert_eq!(build_grid(&Area::new(2.0, 1.0, 0.5).unwrap()).len(), 8);
        let single = build_grid(&Area::new(1.0, 1.0, 1.0).unwrap());
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].center, Point::new(0.5, 0.5));
    }

    #[test]
    fn grid_is_row_major_and_dense() {
        let area = Area::new(2.0, 1.0, 0.5).unwrap();
        let grid = build_grid(&area);
        for (i, loc) in grid.iter().enumerate() {
            assert_eq!(loc.index, i);
            assert!(loc.center.x > 0.0 && loc.center.x < 2.0);
            assert!(loc.center.y > 0.0 && loc.center.y < 1.0);
        }
        assert_eq!(grid[1].center, Point::new(0.75, 0.25));
        assert_eq!(grid[4].center, Point::new(0.25, 0.75));
        for a in &grid {
            for b in &grid {
                if a.index != b.index {
                    assert!(distance(a.center, b.center) >= 0.5 - 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_divisible_area_rejected() {
        assert!(matches!(Area::new(2.2, 1.0, 0.5), Err(Error::Config(_))));
        assert!(Area::new(1.0, 1.0, 2.0).is_err());
        assert!(Area::new(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        assert_eq!(distance(Point::new(1.0, 1.0), Point::new(1.0, 1.0)), 0.0);
        assert_eq!(
            distance(Point::new(0.25, 0.25), Point::new(0.75, 0.25)),
            0.5
        );
    }

    #[test]
    fn ratio_bound_examples() {
        assert_eq!(
            discretization_ratio_bound(&sector(3.0, 2.0), 0.0).unwrap(),
            2.0
        );
        // Independent re-evaluation: half diagonal of a 0.5 m cell is 0.25 * sqrt(2).
        let h = 0.25 * 2f64.sqrt();
        let expected = 2.0 * ((1.5 + h) * (1.5 + h)) / ((1.5 - h) * (1.5 - h));
        let got = discretization_ratio_bound(&sector(1.5, 2.0), 0.5).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 5.2279).abs() < 1e-4);
        assert!(matches!(
            discretization_ratio_bound(&sector(0.3, 2.0), 0.5),
            Err(Error::Geometry(_))
        ));
        assert!(discretization_ratio_bound(&sector(3.0, 1.0), 0.5).is_err());
    }

    #[test]
    fn min_distance_examples() {
        let s = sector(5.0, 2.0);
        assert!(min_distance_ok(10.0 * 0.5, 0.5, &s));
        assert!(!min_distance_ok(0.0, 0.5, &s));
        let boundary = sector(half_diagonal(0.5), 2.0);
        assert!(!min_distance_ok(100.0, 0.5, &boundary));
        let mut unbounded = s;
        unbounded.bounds = None;
        assert!(!min_distance_ok(100.0, 0.5, &unbounded));
    }

    #[test]
    fn cell_sector_spans_corners() {
        let g =
            BeamSectorGeometry::for_cell(Point::new(0.0, 0.0), Point::new(2.0, 0.0), 1.0, 0.0, 2.0)
                .unwrap();
        assert!((g.d1 - 2.0).abs() < 1e-12);
        assert!((g.theta_r - (0.5f64).atan2(1.5)).abs() < 1e-12);
        assert!((g.theta_l + (0.5f64).atan2(1.5)).abs() < 1e-12);
        assert!(g.is_beam_covered());
    }

    #[test]
    fn sector_bounds_of_cosine_lobe() {
        // cos^2 lobe: drops to 1/2 at pi/4, null at pi/2.
        let b = sector_bounds(|t: f64| t.cos().powi(2), 0.0, 2.0).unwrap();
        assert!((b.drop_hi - PI / 4.0).abs() < 1e-9);
        assert!((b.drop_lo + PI / 4.0).abs() < 1e-9);
        assert!((b.null_hi - PI / 2.0).abs() < 1e-6);
        assert!((b.null_lo + PI / 2.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn bound_at_least_gamma_and_monotone(
            d1 in 1.0f64..20.0,
            eps in 0.01f64..1.0,
            gamma in 1.26f64..2.5,
        ) {
            let s = sector(d1, gamma);
            let b = discretization_ratio_bound(&s, eps).unwrap();
            prop_assert!(b > gamma);
            let wider = discretization_ratio_bound(&s, eps * 1.1).unwrap();
            prop_assert!(wider > b);
            let farther = discretization_ratio_bound(&sector(d1 * 1.1, gamma), eps).unwrap();
            prop_assert!(farther < b);
        }
    }
}
