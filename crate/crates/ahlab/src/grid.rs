//! Radial grids.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the sample points of a [`RadialGrid`] were generated. Recorded so the
/// grid is reproducible from its description alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpacingPolicy {
    /// `count` points spaced uniformly on `[t_min, t_max]`.
    Uniform { count: usize },
    /// Uniform bulk plus a geometrically refined band near `t_min` to resolve
    /// the coordinate pole: `extra` additional points with ratio `ratio` are
    /// inserted between `t_min` and the first uniform node.
    Graded {
        count: usize,
        extra: usize,
        ratio: f64,
    },
    /// Points supplied explicitly.
    Explicit,
}

/// Strictly increasing radial sample points on `[t_min, t_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: Vec<f64>,
    pub policy: SpacingPolicy,
}

impl RadialGrid {
    pub fn uniform(t_min: f64, t_max: f64, count: usize) -> Result<RadialGrid> {
        if count < 8 {
            return Err(Error::invalid("grid needs at least 8 points"));
        }
        if !(t_max > t_min) || t_min < 0.0 {
            return Err(Error::invalid("need 0 <= t_min < t_max"));
        }
        let h = (t_max - t_min) / (count - 1) as f64;
        let points = (0..count).map(|i| t_min + h * i as f64).collect();
        Ok(RadialGrid {
            t_min,
            t_max,
            points,
            policy: SpacingPolicy::Uniform { count },
        })
    }

    /// Uniform grid with `extra` geometrically spaced points (ratio `ratio`)
    /// packed between `t_min` and the first uniform node.
    pub fn graded(t_min: f64, t_max: f64, count: usize, extra: usize, ratio: f64) -> Result<RadialGrid> {
        let base = RadialGrid::uniform(t_min, t_max, count)?;
        if !(ratio > 1.0) {
            return Err(Error::invalid("grading ratio must exceed 1"));
        }
        let h0 = base.points[1] - base.points[0];
        let mut pts = vec![t_min];
        // Offsets h0/ratio^k, k = extra..1, ascending.
        for k in (1..=extra).rev() {
            pts.push(t_min + h0 / ratio.powi(k as i32));
        }
        pts.extend_from_slice(&base.points[1..]);
        Ok(RadialGrid {
            t_min,
            t_max,
            points: pts,
            policy: SpacingPolicy::Graded { count, extra, ratio },
        })
    }

    pub fn from_points(points: Vec<f64>) -> Result<RadialGrid> {
        if points.len() < 8 {
            return Err(Error::invalid("grid needs at least 8 points"));
        }
        if points[0] < 0.0 {
            return Err(Error::invalid("t_min must be non-negative"));
        }
        if !points.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::invalid("grid points must be strictly increasing"));
        }
        Ok(RadialGrid {
            t_min: points[0],
            t_max: *points.last().unwrap(),
            points,
            policy: SpacingPolicy::Explicit,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest index with `points[i] <= t` (clamped).
    pub fn index_at_or_below(&self, t: f64) -> usize {
        match self
            .points
            .binary_search_by(|p| p.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_roundtrips_policy() {
        let g = RadialGrid::uniform(0.0, 10.0, 101).unwrap();
        assert_eq!(g.len(), 101);
        let SpacingPolicy::Uniform { count } = g.policy else {
            panic!()
        };
        let g2 = RadialGrid::uniform(g.t_min, g.t_max, count).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn graded_grid_is_increasing_and_reproducible() {
        let g = RadialGrid::graded(0.0, 10.0, 201, 8, 2.0).unwrap();
        assert!(g.points.windows(2).all(|w| w[1] > w[0]));
        let SpacingPolicy::Graded { count, extra, ratio } = g.policy else {
            panic!()
        };
        let g2 = RadialGrid::graded(0.0, 10.0, count, extra, ratio).unwrap();
        assert_eq!(g.points, g2.points);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialGrid::uniform(5.0, 2.0, 100).is_err());
        assert!(RadialGrid::uniform(-1.0, 2.0, 100).is_err());
        assert!(RadialGrid::from_points(vec![0.0, 1.0, 1.0, 2.0]).is_err());
    }
}
