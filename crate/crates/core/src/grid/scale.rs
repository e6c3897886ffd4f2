use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};

/// Geometric discretization of `t ∈ [2^{-J}, 1]` for integrals against `dt/t`.
///
/// Nodes are `t_j = 2^{-j/K}`, `j = 0..=JK`; weights are the trapezoid rule in
/// `ln t`, i.e. `ln 2 / K` with halved endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleGrid {
    per_octave: usize,
    octaves: usize,
}

impl ScaleGrid {
    pub fn new(per_octave: usize, octaves: usize) -> Result<Self> {
        if per_octave == 0 || octaves == 0 {
            return Err(Error::InvalidArgument(format!(
                "scale grid needs K >= 1 and J >= 1, got K={per_octave}, J={octaves}"
            )));
        }
        Ok(Self { per_octave, octaves })
    }

    /// K = 8 scales per octave over J = 5 octaves.
    pub fn default_grid() -> Self {
        Self { per_octave: 8, octaves: 5 }
    }

    pub fn per_octave(&self) -> usize {
        self.per_octave
    }

    pub fn octaves(&self) -> usize {
        self.octaves
    }

    pub fn len(&self) -> usize {
        self.per_octave * self.octaves + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Interior weight `ln 2 / K`.
    pub fn step(&self) -> f64 {
        std::f64::consts::LN_2 / self.per_octave as f64
    }

    pub fn t(&self, j: usize) -> f64 {
        (-(j as f64) / self.per_octave as f64).exp2()
    }

    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.len() {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    pub fn t_min(&self) -> f64 {
        (-(self.octaves as f64)).exp2()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|j| (self.t(j), self.weight(j)))
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.weight(j)).collect()
    }

    /// Frequencies `|ξ| ≤ 1/(2 t_min)` see the whole annulus family.
    pub fn resolvable_radius(&self) -> f64 {
        0.5 / self.t_min()
    }

    /// The same range with twice as many scales per octave.
    pub fn refined(&self) -> Self {
        Self { per_octave: self.per_octave * 2, ..*self }
    }

    /// Requires the smallest annulus `|ξ| ≤ 2/t_min` to fit below Nyquist.
    pub fn ensure_resolvable(&self, spec: &GridSpec) -> Result<()> {
        let need = 2.0 / self.t_min();
        if need > spec.nyquist() {
            return Err(Error::InvalidArgument(format!(
                "scale grid reaches |ξ| = {need} but grid Nyquist is {:.3}",
                spec.nyquist()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_log_range() {
        for (k, j) in [(8, 5), (3, 7), (64, 2)] {
            let s = ScaleGrid::new(k, j).unwrap();
            let sum: f64 = s.weights().iter().sum();
            assert!((sum - j as f64 * std::f64::consts::LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn octaves_telescope() {
        let s = ScaleGrid::new(8, 5).unwrap();
        for octave in 0..5 {
            // trapezoid over one octave: half endpoints, full interior
            let lo = octave * 8;
            let sum: f64 = (lo..=lo + 8).map(|j| if j == lo || j == lo + 8 { 0.5 * s.step() } else { s.step() }).sum();
            assert!((sum - std::f64::consts::LN_2).abs() < 1e-15);
        }
    }

    #[test]
    fn nodes_decrease_in_unit_interval() {
        let s = ScaleGrid::default_grid();
        assert_eq!(s.t(0), 1.0);
        assert_eq!(s.t(s.len() - 1), s.t_min());
        for j in 1..s.len() {
            assert!(s.t(j) < s.t(j - 1));
            assert!(s.t(j) > 0.0);
        }
    }

    #[test]
    fn default_is_resolvable_on_default_grid() {
        let s = ScaleGrid::default_grid();
        assert!(s.ensure_resolvable(&GridSpec::default_1d()).is_ok());
        assert!(ScaleGrid::new(8, 7).unwrap().ensure_resolvable(&GridSpec::default_1d()).is_err());
    }
}
