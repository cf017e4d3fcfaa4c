//! Well-separated multi-kink configurations and their reference profiles.
//!
//! Even configurations are `b - sqrt(beta) sum Q_{c_j}` over the constant
//! background `b = 1/(3 sqrt beta)`. Odd ones are a kink `phi_c`, `c = 1/(9 beta)`,
//! plus `sqrt(beta) sum Q_{c_j}` placed to its left. Positions are the centers
//! of the objects at `t = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{Background, Field, Grid};
use crate::profiles::{gardner, kink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiKinkConfig {
    pub parity: Parity,
    pub beta: f64,
    /// Soliton scalings `c_1 < ... `, all below `2/(9 beta)`.
    pub scalings: Vec<f64>,
    /// Soliton centers at `t = 0`, increasing.
    pub positions: Vec<f64>,
    /// Kink center at `t = 0` (odd parity only).
    #[serde(default)]
    pub kink_position: f64,
    /// Nominal separation `L`; smaller gaps trigger a warning.
    pub separation: f64,
}

impl MultiKinkConfig {
    pub fn even(beta: f64, scalings: Vec<f64>, positions: Vec<f64>, separation: f64) -> Result<Self> {
        let cfg = Self { parity: Parity::Even, beta, scalings, positions, kink_position: 0.0, separation };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn odd(
        beta: f64,
        scalings: Vec<f64>,
        positions: Vec<f64>,
        kink_position: f64,
        separation: f64,
    ) -> Result<Self> {
        let cfg = Self { parity: Parity::Odd, beta, scalings, positions, kink_position, separation };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks ordering and parameter domains; logs a warning when objects are
    /// closer than `separation`.
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta must be positive, got {}", self.beta)));
        }
        if self.scalings.len() != self.positions.len() {
            return Err(invalid(format!(
                "{} scalings but {} positions",
                self.scalings.len(),
                self.positions.len()
            )));
        }
        for &c in &self.scalings {
            gardner::check_parameters(c, self.beta)?;
        }
        if self.scalings.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(format!("scalings must be strictly increasing: {:?}", self.scalings)));
        }
        let centers = self.object_positions();
        if centers.iter().any(|x| !x.is_finite()) {
            return Err(invalid("positions must be finite"));
        }
        for w in centers.windows(2) {
            if w[1] - w[0] < self.separation {
                log::warn!(
                    "objects at {} and {} are closer than the separation L = {}",
                    w[0],
                    w[1],
                    self.separation
                );
            }
        }
        Ok(())
    }

    /// Number of objects: solitons plus the kink for odd parity.
    pub fn object_count(&self) -> usize {
        self.scalings.len() + usize::from(self.parity == Parity::Odd)
    }

    /// Solitons followed by the kink (odd parity), at `t = 0`.
    pub fn object_positions(&self) -> Vec<f64> {
        let mut v = self.positions.clone();
        if self.parity == Parity::Odd {
            v.push(self.kink_position);
        }
        v
    }

    /// Kink scaling `1/(9 beta)`.
    pub fn kink_scaling(&self) -> f64 {
        1.0 / (9.0 * self.beta)
    }

    pub fn background_level(&self) -> f64 {
        gardner::background(self.beta)
    }

    /// Scalings of all objects in the frame where solitons move with speed `c_j`;
    /// the kink (odd) moves there with `2c`.
    pub fn object_speeds(&self) -> Vec<f64> {
        let mut v = self.scalings.clone();
        if self.parity == Parity::Odd {
            v.push(2.0 * self.kink_scaling());
        }
        v
    }

    /// Frame velocity `y = x + frame_speed t` in which solitons travel at `c_j`.
    pub fn frame_speed(&self) -> f64 {
        match self.parity {
            Parity::Even => 1.0 / (3.0 * self.beta),
            Parity::Odd => 3.0 * self.kink_scaling(),
        }
    }

    /// Soliton centers in the lab frame at time `t`.
    pub fn soliton_centers(&self, t: f64) -> Vec<f64> {
        let v = self.frame_speed();
        self.scalings.iter().zip(&self.positions).map(|(&c, &x)| x + (c - v) * t).collect()
    }

    /// Kink center in the lab frame at time `t` (the kink travels left with speed `c`).
    pub fn kink_center(&self, t: f64) -> f64 {
        self.kink_position - self.kink_scaling() * t
    }

    /// Same configuration with every position moved by `delta`.
    pub fn translated(&self, delta: f64) -> Self {
        let mut out = self.clone();
        out.positions.iter_mut().for_each(|x| *x += delta);
        out.kink_position += delta;
        out
    }

    /// Smallest consecutive scaling gap, including `2c - c_{N-1}` for odd parity.
    pub fn min_speed_gap(&self) -> Option<f64> {
        let speeds = self.object_speeds();
        speeds.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    /// `sigma_0 = min gap / 2`, with the first speed standing alone when there is no gap.
    pub fn sigma0(&self) -> f64 {
        match self.min_speed_gap() {
            Some(g) => 0.5 * g,
            None => 0.5 * self.object_speeds().first().copied().unwrap_or(1.0),
        }
    }
}

/// `sum_j Q_{c_j,beta}(x - center_j)` sampled on the grid.
pub fn soliton_sum(grid: &Grid, beta: f64, scalings: &[f64], centers: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.n()];
    for (&c, &x0) in scalings.iter().zip(centers) {
        for (o, &x) in out.iter_mut().zip(grid.x()) {
            *o += gardner::value(c, beta, x - x0);
        }
    }
    out
}

/// Reference multi-kink profile at time `t` in the lab frame.
pub fn build_multikink_profile(config: &MultiKinkConfig, grid: &Grid, t: f64) -> Result<Field> {
    config.validate()?;
    let centers = config.soliton_centers(t);
    let sum = soliton_sum(grid, config.beta, &config.scalings, &centers);
    let sb = config.beta.sqrt();
    match config.parity {
        Parity::Even => {
            let b = config.background_level();
            Field::new(grid.clone(), sum.iter().map(|q| b - sb * q).collect(), Background::Constant { value: b })
        }
        Parity::Odd => {
            let c = config.kink_scaling();
            let center = config.kink_center(t);
            let values = sum.iter().zip(grid.x()).map(|(q, &x)| kink::value(c, x - center) + sb * q).collect();
            Field::new(grid.clone(), values, Background::Kink { c, center })
        }
    }
}

/// Decaying part in the soliton frame (`v` for even, `u~` for odd) at time `t`,
/// i.e. `sum Q_{c_j}(y - x_j - c_j t)`.
pub fn build_frame_profile(config: &MultiKinkConfig, grid: &Grid, t: f64) -> Result<Vec<f64>> {
    config.validate()?;
    let centers: Vec<f64> = config.scalings.iter().zip(&config.positions).map(|(c, x)| x + c * t).collect();
    Ok(soliton_sum(grid, config.beta, &config.scalings, &centers))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_even_soliton_is_the_two_kink() {
        let grid = Grid::new(1024, 200.0).unwrap();
        let (beta, c, shift, t) = (1.0, 0.1, 2.0, 3.0);
        let tk = gardner::EvenTwoKink::new(beta, c).unwrap();
        let cfg = MultiKinkConfig::even(beta, vec![c], vec![-shift - tk.x0], 30.0).unwrap();
        let field = build_multikink_profile(&cfg, &grid, t).unwrap();
        for (i, &x) in grid.x().iter().enumerate() {
            assert!((field.values()[i] - tk.eval(shift, t, x)).abs() < 1e-13);
        }
        assert_eq!(field.background(), Background::Constant { value: tk.b });
    }

    #[test]
    fn odd_without_solitons_is_the_kink() {
        let grid = Grid::new(512, 100.0).unwrap();
        let cfg = MultiKinkConfig::odd(1.0, vec![], vec![], 1.5, 30.0).unwrap();
        let f = build_multikink_profile(&cfg, &grid, 2.0).unwrap();
        let c = 1.0 / 9.0;
        for (i, &x) in grid.x().iter().enumerate() {
            assert!((f.values()[i] - kink::value(c, x - 1.5 + 2.0 * c)).abs() < 1e-15);
        }
        assert!(f.decaying_part().iter().all(|v| v.abs() < 1e-16));
    }

    #[test]
    fn five_kink_configuration() {
        let c3 = 0.25;
        let beta = 1.0 / (9.0 * c3);
        let cfg = MultiKinkConfig::odd(beta, vec![0.1, 0.3], vec![-60.0, -30.0], 0.0, 30.0).unwrap();
        let grid = Grid::new(2048, 240.0).unwrap();
        let f = build_multikink_profile(&cfg, &grid, 0.0).unwrap();
        let sb = beta.sqrt();
        let peak = |x0: f64| f.values()[grid.x().iter().position(|&x| x >= x0).unwrap()] - kink::value(c3, x0);
        let q = |c: f64, s: f64| gardner::value(c, beta, s);
        assert!((peak(-60.0) - sb * (q(0.1, 0.0) + q(0.3, 30.0))).abs() < 1e-14);
        assert!((peak(-30.0) - sb * (q(0.3, 0.0) + q(0.1, 30.0))).abs() < 1e-14);
        assert_eq!(cfg.object_count(), 3);
        assert!((cfg.sigma0() - 0.1).abs() < 1e-15);
        assert!(MultiKinkConfig::odd(beta, vec![0.1, 0.6], vec![-60.0, -30.0], 0.0, 30.0).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(MultiKinkConfig::even(1.0, vec![0.12, 0.05], vec![0.0, 30.0], 30.0).is_err());
        assert!(MultiKinkConfig::even(1.0, vec![0.05], vec![0.0, 30.0], 30.0).is_err());
        assert!(MultiKinkConfig::even(-1.0, vec![0.05], vec![0.0], 30.0).is_err());
        // Too close: only a warning.
        assert!(MultiKinkConfig::even(1.0, vec![0.05, 0.12], vec![0.0, 5.0], 30.0).is_ok());
    }

    #[test]
    fn translation_equivariance() {
        let grid = Grid::new(512, 160.0).unwrap();
        let cfg = MultiKinkConfig::odd(1.0, vec![0.05, 0.12], vec![-40.0, -10.0], 20.0, 30.0).unwrap();
        let delta = 7.0 * grid.dx();
        let a = build_multikink_profile(&cfg.translated(delta), &grid, 1.0).unwrap();
        let b = build_multikink_profile(&cfg, &grid, 1.0).unwrap().rotated(-7);
        // away from the wrap-around cells
        for (p, q) in a.values().iter().zip(b.values()).skip(16) {
            assert!((p - q).abs() < 1e-13);
        }
    }
}
