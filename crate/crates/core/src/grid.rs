use crate::error::{Error, Result};
use crate::scalar::Real;

/// Strictly increasing time points `0 = t_0 < t_1 < ... < t_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T> {
    points: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    /// `steps` equal steps on `[0, horizon]`.
    pub fn uniform(horizon: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::DegenerateGrid("at least one step is required".into()));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::DegenerateGrid(format!("horizon must be positive and finite, got {horizon}")));
        }
        let n = T::from_usize_lossy(steps);
        let mut points: Vec<T> = (0..=steps).map(|j| horizon * T::from_usize_lossy(j) / n).collect();
        points[steps] = horizon;
        Self::from_points(points)
    }

    pub fn from_points(points: Vec<T>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateGrid("need at least two points".into()));
        }
        if points[0] != T::zero() {
            return Err(Error::DegenerateGrid(format!("grid must start at 0, starts at {}", points[0])));
        }
        for w in points.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::DegenerateGrid(format!(
                    "points must be finite and strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { points })
    }

    #[inline]
    pub fn points(&self) -> &[T] {
        &self.points
    }

    #[inline]
    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    #[inline]
    pub fn horizon(&self) -> T {
        self.points[self.points.len() - 1]
    }

    #[inline]
    pub fn dt(&self, step: usize) -> T {
        self.points[step + 1] - self.points[step]
    }

    /// Largest step length.
    pub fn mesh(&self) -> T {
        (0..self.n_steps()).map(|j| self.dt(j)).fold(T::zero(), T::max)
    }

    /// Index of the grid point equal to `t` up to a relative `1e-9` of the
    /// horizon.
    pub fn index_of(&self, t: T) -> Result<usize> {
        let tol = self.horizon() * T::lit(1e-9);
        let idx = self.points.partition_point(|&p| p < t - tol);
        if idx < self.points.len() && (self.points[idx] - t).abs() <= tol {
            Ok(idx)
        } else {
            Err(Error::OffGrid(t.as_f64()))
        }
    }

    /// Keeps every `factor`-th point.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.n_steps().is_multiple_of(factor) {
            return Err(Error::DegenerateGrid(format!(
                "cannot coarsen {} steps by a factor of {factor}",
                self.n_steps()
            )));
        }
        Self::from_points(self.points.iter().step_by(factor).copied().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = TimeGrid::uniform(2.0f64, 4).unwrap();
        assert_eq!(g.points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.index_of(1.5).unwrap(), 3);
        assert!(g.index_of(1.2).is_err());
    }

    #[test]
    fn rejects_degenerate() {
        assert!(TimeGrid::<f64>::uniform(1.0, 0).is_err());
        assert!(TimeGrid::from_points(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_points(vec![0.1, 0.5]).is_err());
    }

    #[test]
    fn coarsen_by_two() {
        let g = TimeGrid::uniform(1.0f64, 8).unwrap();
        let c = g.coarsen(2).unwrap();
        assert_eq!(c.n_steps(), 4);
        assert_eq!(c.points()[1], 0.25);
        assert!(g.coarsen(3).is_err());
    }
}
