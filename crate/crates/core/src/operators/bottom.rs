use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{domain, Result};

/// Piecewise-linear bathymetry `h(x)` given by knots `(x, h)`.
///
/// `h` is linear between consecutive knots, so `h_xx = 0` away from them.
/// The profile is extended periodically with period `x_last - x_first`.
/// At a knot the slope of the segment to the right is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct BottomProfile {
    knots: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for BottomProfile {
    type Error = crate::Error;
    fn try_from(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<BottomProfile> for Vec<(f64, f64)> {
    fn from(b: BottomProfile) -> Self {
        b.knots
    }
}

impl BottomProfile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(domain("knots", "bottom profile needs at least one knot"));
        }
        if knots.iter().any(|(x, h)| !x.is_finite() || !h.is_finite()) {
            return Err(domain("knots", "knot coordinates must be finite"));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(domain("knots", "knot positions must be strictly increasing"));
        }
        if let Some((x, h)) = knots.iter().find(|(_, h)| h.abs() > 1.0) {
            return Err(domain(
                "knots",
                format!("|h| must not exceed 1 in scaled units, got h = {h} at x = {x}"),
            ));
        }
        Ok(Self { knots })
    }

    pub fn flat(grid: &Grid) -> Self {
        Self {
            knots: vec![(grid.x0, 0.0), (grid.x0 + grid.length, 0.0)],
        }
    }

    /// A periodic shelf over `grid`: flat, linear rise to `height`, flat,
    /// linear descent, flat. Knot positions sit at irrational-looking
    /// fractions of the period so they do not coincide with grid points.
    pub fn shelf(grid: &Grid, height: f64) -> Result<Self> {
        let l = grid.length;
        let x0 = grid.x0;
        Self::new(vec![
            (x0, 0.0),
            (x0 + 0.211_324_865 * l, 0.0),
            (x0 + 0.414_213_562 * l, height),
            (x0 + 0.618_033_989 * l, height),
            (x0 + 0.788_675_134 * l, 0.0),
            (x0 + l, 0.0),
        ])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn period(&self) -> Option<f64> {
        match (self.knots.first(), self.knots.last()) {
            (Some(a), Some(b)) if self.knots.len() > 1 => Some(b.0 - a.0),
            _ => None,
        }
    }

    /// Knots strictly inside one period, where `h_x` jumps.
    pub fn interior_knots(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.knots.len();
        self.knots
            .iter()
            .enumerate()
            .filter(move |(i, _)| *i > 0 && *i + 1 < n)
            .map(|(_, k)| k.0)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.knots.iter().all(|(_, h)| *h == 0.0)
    }

    /// `(h, h_x)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let Some(period) = self.period() else {
            return (self.knots[0].1, 0.0);
        };
        let first = self.knots[0].0;
        let mut xr = first + (x - first).rem_euclid(period);
        if xr >= first + period {
            xr = first;
        }
        // last knot with position <= xr
        let i = self
            .knots
            .partition_point(|k| k.0 <= xr)
            .saturating_sub(1)
            .min(self.knots.len() - 2);
        let (xa, ha) = self.knots[i];
        let (xb, hb) = self.knots[i + 1];
        let slope = (hb - ha) / (xb - xa);
        (ha + slope * (xr - xa), slope)
    }
}

/// `(h, h_x)` of a bottom profile at `x`.
pub fn bottom_eval(b: &BottomProfile, x: f64) -> (f64, f64) {
    b.eval(x)
}
