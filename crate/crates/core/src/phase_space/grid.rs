use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How radial samples are spread along the positive real axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    /// Uniform in |z|; dense near the origin in |z|².
    Modulus,
    /// Uniform in |z|².
    ModulusSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridLayout {
    Radial { spacing: RadialSpacing },
    Cartesian { per_axis: usize, spacing: f64 },
}

/// Sample points in the complex phase plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    points: Vec<Complex64>,
    layout: GridLayout,
    extent: f64,
}

impl PhaseGrid {
    /// `count` points on the positive real axis from 0 to `extent`, origin
    /// included.
    pub fn radial(extent: f64, count: usize, spacing: RadialSpacing) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::InsufficientGrid(format!("radial extent must be > 0, got {extent}")));
        }
        if count < 2 {
            return Err(Error::InsufficientGrid(format!("radial grid needs >= 2 points, got {count}")));
        }
        let last = (count - 1) as f64;
        let points = (0..count)
            .map(|k| {
                let u = k as f64 / last;
                let r = match spacing {
                    RadialSpacing::Modulus => extent * u,
                    RadialSpacing::ModulusSquared => extent * u.sqrt(),
                };
                Complex64::new(r, 0.0)
            })
            .collect();
        Ok(PhaseGrid { points, layout: GridLayout::Radial { spacing }, extent })
    }

    /// Square grid on [−extent, extent]², spacing at most `spacing`.
    pub fn cartesian(extent: f64, spacing: f64) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0 && spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InsufficientGrid(format!(
                "cartesian grid needs positive extent and spacing, got {extent}, {spacing}"
            )));
        }
        let intervals = ((2.0 * extent / spacing) - 1e-9).ceil().max(1.0) as usize;
        let per_axis = intervals + 1;
        let h = 2.0 * extent / intervals as f64;
        let mut points = Vec::with_capacity(per_axis * per_axis);
        for iy in 0..per_axis {
            for ix in 0..per_axis {
                points.push(Complex64::new(-extent + h * ix as f64, -extent + h * iy as f64));
            }
        }
        Ok(PhaseGrid { points, layout: GridLayout::Cartesian { per_axis, spacing: h }, extent })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.points.iter().position(|z| z.norm() < 1e-12)
    }

    /// Trapezoidal area weights; cartesian grids only.
    pub fn area_weights(&self) -> Option<Vec<f64>> {
        let GridLayout::Cartesian { per_axis, spacing } = self.layout else {
            return None;
        };
        let edge = |i: usize| if i == 0 || i + 1 == per_axis { 0.5 } else { 1.0 };
        let mut w = Vec::with_capacity(self.points.len());
        for iy in 0..per_axis {
            for ix in 0..per_axis {
                w.push(edge(ix) * edge(iy) * spacing * spacing);
            }
        }
        Some(w)
    }

    /// Checks that a cartesian grid is wide and fine enough for 2-D
    /// transforms of phase-space functions.
    pub fn require_transform_quality(&self, min_extent: f64, max_spacing: f64) -> Result<()> {
        match self.layout {
            GridLayout::Cartesian { spacing, .. } => {
                if self.extent < min_extent - 1e-9 {
                    return Err(Error::InsufficientGrid(format!(
                        "extent {} below required {min_extent}",
                        self.extent
                    )));
                }
                if spacing > max_spacing + 1e-9 {
                    return Err(Error::InsufficientGrid(format!(
                        "spacing {spacing} above allowed {max_spacing}"
                    )));
                }
                Ok(())
            }
            GridLayout::Radial { .. } => {
                Err(Error::InsufficientGrid("transform needs a cartesian grid".into()))
            }
        }
    }
}
