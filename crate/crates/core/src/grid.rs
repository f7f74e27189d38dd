//! Uniform two-dimensional grids in either chart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlie::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// Axes Re ξ and Im ξ; D₁ = ∂_ξ, D₂ = ∂_ξ̄.
    EuclideanComplex,
    /// Axes x¹, x²; D_α = ∂/∂x^α.
    MinkowskiLightcone,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::EuclideanComplex => "euclidean-complex",
            Chart::MinkowskiLightcone => "minkowski-lightcone",
        }
    }
}

pub const DEFAULT_STENCIL_ORDER: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid2 {
    pub chart: Chart,
    /// Coordinates of node (0, 0).
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub dims: [usize; 2],
    #[serde(default = "default_order")]
    pub stencil_order: usize,
}

fn default_order() -> usize {
    DEFAULT_STENCIL_ORDER
}

impl Grid2 {
    pub fn new(chart: Chart, origin: [f64; 2], spacing: [f64; 2], dims: [usize; 2]) -> Result<Self> {
        let g = Self { chart, origin, spacing, dims, stencil_order: DEFAULT_STENCIL_ORDER };
        g.validate()?;
        Ok(g)
    }

    /// Square grid of n×n nodes with spacing h centred on (c1, c2).
    pub fn centered(chart: Chart, center: [f64; 2], h: f64, n: usize) -> Result<Self> {
        let half = (n as f64 - 1.0) * 0.5 * h;
        Self::new(chart, [center[0] - half, center[1] - half], [h, h], [n, n])
    }

    pub fn euclidean_default() -> Self {
        Self::centered(Chart::EuclideanComplex, [0.0, 0.0], 0.05, 101).unwrap()
    }

    pub fn minkowski_default() -> Self {
        Self::centered(Chart::MinkowskiLightcone, [0.0, 0.0], 0.04, 101).unwrap()
    }

    pub fn with_stencil_order(mut self, order: usize) -> Result<Self> {
        self.stencil_order = order;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims[0] < 9 || self.dims[1] < 9 {
            return Err(Error::InvalidGrid(format!("dims {:?} must be at least 9", self.dims)));
        }
        if !(self.spacing[0] > 0.0 && self.spacing[1] > 0.0) || !self.spacing.iter().all(|h| h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {:?} must be positive", self.spacing)));
        }
        if !self.origin.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if self.stencil_order < 2 || !self.stencil_order.is_multiple_of(2) || self.stencil_order > 24 {
            return Err(Error::InvalidGrid(format!(
                "stencil order {} must be even and in 2..=24",
                self.stencil_order
            )));
        }
        Ok(())
    }

    /// Same physical domain with half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            spacing: [self.spacing[0] * 0.5, self.spacing[1] * 0.5],
            dims: [2 * self.dims[0] - 1, 2 * self.dims[1] - 1],
            ..*self
        }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_width(&self) -> usize {
        self.stencil_order / 2
    }

    #[inline]
    pub fn node(&self, i1: usize, i2: usize) -> usize {
        i2 * self.dims[0] + i1
    }

    #[inline]
    pub fn indices(&self, node: usize) -> (usize, usize) {
        (node % self.dims[0], node / self.dims[0])
    }

    /// Real axis coordinates (x¹, x²) or (Re ξ, Im ξ).
    #[inline]
    pub fn point(&self, i1: usize, i2: usize) -> [f64; 2] {
        [self.origin[0] + i1 as f64 * self.spacing[0], self.origin[1] + i2 as f64 * self.spacing[1]]
    }

    /// Value of the abstract coordinate x^α (1 or 2): ξ and ξ̄ on the
    /// Euclidean chart, the real lightcone coordinates otherwise.
    pub fn coord(&self, alpha: usize, i1: usize, i2: usize) -> C64 {
        let [x, y] = self.point(i1, i2);
        match (self.chart, alpha) {
            (Chart::EuclideanComplex, 1) => C64::new(x, y),
            (Chart::EuclideanComplex, 2) => C64::new(x, -y),
            (Chart::MinkowskiLightcone, 1) => C64::new(x, 0.0),
            (Chart::MinkowskiLightcone, 2) => C64::new(y, 0.0),
            _ => panic!("coordinate index must be 1 or 2"),
        }
    }

    pub fn same_nodes(&self, other: &Self) -> bool {
        self.chart == other.chart && self.dims == other.dims && self.origin == other.origin && self.spacing == other.spacing
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_nodes(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub fn check_chart(&self, chart: Chart) -> Result<()> {
        if self.chart == chart {
            Ok(())
        } else {
            Err(Error::ChartMismatch { expected: chart.name().into(), got: self.chart.name().into() })
        }
    }

    /// Whether node (i1, i2) lies at least `margin` nodes from every edge.
    #[inline]
    pub fn inside(&self, i1: usize, i2: usize, margin: usize) -> bool {
        i1 >= margin && i2 >= margin && i1 + margin < self.dims[0] && i2 + margin < self.dims[1]
    }

    /// Physical half-extent box of the valid interior for a margin, as
    /// [x_lo, x_hi, y_lo, y_hi].
    pub fn interior_box(&self, margin: usize) -> [f64; 4] {
        let lo = self.point(margin, margin);
        let hi = self.point(self.dims[0] - 1 - margin, self.dims[1] - 1 - margin);
        [lo[0], hi[0], lo[1], hi[1]]
    }
}
